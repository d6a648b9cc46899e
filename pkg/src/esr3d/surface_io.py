"""Plain-text surface files, warp tables and JSON reports.

A surface file has a one-line ``M N`` header followed by M*N lines
``x y z`` in traversal order c(r_1,t_1), c(r_2,t_1), ..., c(r_M,t_1),
c(r_1,t_2), ... (the r index varies fastest).  Partitions are uniform.
"""

from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np

from .errors import ParseError
from .grid import Partition, SurfaceGrid, Warp2D

_FMT = "%.17g"


def format_surface(g: SurfaceGrid) -> str:
    m, n = g.shape
    flat = g.points.transpose(1, 0, 2).reshape(m * n, 3)
    lines = [f"{m} {n}"]
    lines += [" ".join(_FMT % v for v in p) for p in flat]
    return "\n".join(lines) + "\n"


def write_surface(path, g: SurfaceGrid):
    Path(path).write_text(format_surface(g))


def parse_surface(text: str) -> SurfaceGrid:
    lines = text.splitlines()
    if not lines or not lines[0].strip():
        raise ParseError("missing 'M N' header", 1)
    head = lines[0].split()
    if len(head) != 2:
        raise ParseError(f"header must hold two integers, got {lines[0]!r}", 1)
    try:
        m, n = int(head[0]), int(head[1])
    except ValueError:
        raise ParseError(f"header must hold two integers, got {lines[0]!r}", 1) from None
    if m < 2 or n < 2:
        raise ParseError(f"M and N must be at least 2, got {m} {n}", 1)

    body = lines[1:]
    # tolerate trailing blank lines only
    while body and not body[-1].strip():
        body.pop()
    pts = np.empty((m * n, 3))
    for k in range(m * n):
        lineno = k + 2
        if k >= len(body):
            raise ParseError(f"expected {m * n} coordinate lines, file ends after {len(body)}", lineno)
        tok = body[k].split()
        if len(tok) != 3:
            raise ParseError(f"expected 3 coordinates, got {len(tok)}", lineno)
        try:
            vals = [float(x) for x in tok]
        except ValueError:
            raise ParseError(f"non-numeric coordinate in {body[k]!r}", lineno) from None
        if not all(math.isfinite(v) for v in vals):
            raise ParseError("non-finite coordinate", lineno)
        pts[k] = vals
    if len(body) > m * n:
        raise ParseError(f"unexpected extra data after {m * n} coordinate lines", m * n + 2)
    points = pts.reshape(n, m, 3).transpose(1, 0, 2)
    return SurfaceGrid(Partition.uniform(m), Partition.uniform(n), points)


def read_surface(path) -> SurfaceGrid:
    return parse_surface(Path(path).read_text())


def write_warp_table(path, warp: Warp2D, r: Partition, t: Partition):
    """One block per row j: a comment line, then ``r_i h_j(r_i)`` pairs."""
    out = []
    for j, h in enumerate(warp.rows):
        out.append(f"# row {j + 1} t={_FMT % t.values[j]}")
        out += [f"{_FMT % ri} {_FMT % hi}" for ri, hi in zip(r.values, h.samples)]
        out.append("")
    Path(path).write_text("\n".join(out))


def build_report(result, **extra) -> dict:
    """JSON-ready summary of a registration result."""
    report = {
        "distance": result.distance,
        "energy": result.energy,
        "rotation": [float(x) for x in np.asarray(result.rotation).ravel()],
        "iterations": result.iterations,
        "energy_trace": [float(e) for e in result.energy_trace],
        "row_energies": [float(e) for e in result.row_energies],
    }
    report.update(extra)
    return report


def write_report(path, report: dict):
    Path(path).write_text(json.dumps(report, indent=2) + "\n")
