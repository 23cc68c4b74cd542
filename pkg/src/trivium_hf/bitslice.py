"""Lane-parallel Trivium: one Python int per state cell, one bit per trial.

Each lane carries its own key and fault mask; the IV is shared.  Used by the
campaign runner, where thousands of faulted machines are stepped together.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np

from .core import INIT_ROUNDS, Iv, Key, output_cell, renew_cells
from .faults import FaultMask


def _pack_columns(bits: np.ndarray) -> list[int]:
    """Column ``j`` of a ``(lanes, width)`` 0/1 array as an int with lane ``i`` at bit ``i``."""
    packed = np.packbits(bits.T.astype(np.uint8), axis=1, bitorder="little")
    return [int.from_bytes(row.tobytes(), "little") for row in packed]


def unpack_lanes(x: int, lanes: int) -> np.ndarray:
    raw = np.frombuffer(x.to_bytes((lanes + 7) // 8, "little"), dtype=np.uint8)
    return np.unpackbits(raw, bitorder="little")[:lanes]


class LaneBank:
    """Keys and masks for a batch of lanes."""

    def __init__(self, keys: Sequence[Key], masks: Sequence[FaultMask]):
        if len(keys) != len(masks) or not keys:
            raise ValueError("need one mask per key and at least one lane")
        self.lanes = len(keys)
        self.full = (1 << self.lanes) - 1
        kb = np.array([k.bits() for k in keys], dtype=np.uint8)
        self._key_cells = _pack_columns(kb)
        faulted = [0] * 289
        for lane, m in enumerate(masks):
            for p in m.positions:
                faulted[p] |= 1 << lane
        self.keep = [(p, self.full ^ f) for p, f in enumerate(faulted) if f]

    def _mask(self, cells: list) -> None:
        for p, keep in self.keep:
            cells[p] &= keep

    def load(self, iv: Iv) -> list:
        cells = [0] * 289
        cells[1:81] = self._key_cells
        for i in range(1, 81):
            if iv.bit(i):
                cells[93 + i] = self.full
        cells[286] = cells[287] = cells[288] = self.full
        self._mask(cells)
        return cells

    def step(self, cells: list) -> list:
        out = renew_cells(cells)
        self._mask(out)
        return out

    def keystream(self, iv: Iv, n: int) -> list[int]:
        """Lane-packed ``z0..z_{n-1}``."""
        cells = self.load(iv)
        for _ in range(INIT_ROUNDS):
            cells = self.step(cells)
        out = []
        for _ in range(n):
            out.append(output_cell(cells))
            cells = self.step(cells)
        return out

    def lane_keystream(self, zs: Sequence[int], lane: int) -> list[int]:
        return [(z >> lane) & 1 for z in zs]


def periodic_lanes(zs: Sequence[int], period: int, full: int) -> int:
    """Lanes where ``z[m] == z[m + period]`` for every ``m < period``."""
    if len(zs) < 2 * period:
        raise ValueError(f"need {2 * period} bits, have {len(zs)}")
    diff = 0
    for m in range(period):
        diff |= zs[m] ^ zs[m + period]
        if diff == full:
            break
    return full & ~diff


def equal_lanes(a: Sequence[int], b: Sequence[int], full: int) -> int:
    diff = 0
    for x, y in zip(a, b, strict=True):
        diff |= x ^ y
    return full & ~diff
