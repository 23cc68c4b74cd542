"""Algebraic degree of keystream bits when every live state cell is a variable."""

from __future__ import annotations

from typing import Sequence

from .core import Variant, live_positions, output_cell, renew_cells
from .gf2 import ZERO, AnfPoly


def symbolic_keystream_degrees(variant: Variant, n: int) -> list[int]:
    """Degree of ``z0..z_{n-1}`` in the initial state variables of ``variant``."""
    live = set(live_positions(variant))
    cells = [None] + [AnfPoly.var(j) if j in live else ZERO for j in range(1, 289)]
    out = []
    for _ in range(n):
        out.append(output_cell(cells, variant).degree())
        cells = [c if c is not None else ZERO for c in renew_cells(cells, variant)]
    return out


def degree_runs(degs: Sequence[int]) -> list[tuple[int, int]]:
    """``(index, degree)`` at every index where the degree changes."""
    runs = []
    prev = None
    for i, d in enumerate(degs):
        if d != prev:
            runs.append((i, d))
            prev = d
    return runs
