"""Keystream features and the case-detection procedure.

The detector sees a :class:`FaultedMachine` only through ``observe``: it picks
IVs and reads keystream.  The key and mask stay private to the machine.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Sequence

from .bitslice import LaneBank, equal_lanes, periodic_lanes, unpack_lanes
from .core import MAX_KEYSTREAM_BITS, ZERO_IV, Iv, Key, Keystream, faulted_keystream
from .faults import FaultMask, ground_truth_case

# block lengths for Features 1-3; the keystream of Case 2 repeats every 1794
# bits, so a 3588 block is used (3358 is not a period, see PERIOD_CASE2_NOMINAL)
PERIOD_CASE1 = 69
PERIOD_CASE2 = 3588
PERIOD_CASE2_NOMINAL = 3358
PERIOD_CASE3 = 4524
FEATURE_PERIODS = {1: PERIOD_CASE1, 2: PERIOD_CASE2, 3: PERIOD_CASE3}
# IV bit flipped for Features 4-6
FEATURE_IV_BITS = {4: 70, 5: 79, 6: 80}
IV_WINDOW = 288


class Detected(str, enum.Enum):
    CASE1 = "Case1"
    CASE2 = "Case2"
    CASE3 = "Case3"
    CASE4 = "Case4"
    CASE5 = "Case5"
    CASE5OR6 = "Case5or6"
    CASE7 = "Case7"

    def __str__(self) -> str:
        return self.value


class FaultedMachine:
    """Oracle with a hidden key and fixed mask; only the IV is chosen by the caller."""

    def __init__(self, key: Key, mask: FaultMask):
        self._key = key
        self._mask = mask
        self._cache: dict[Iv, Keystream] = {}
        self.bits_read: dict[Iv, int] = {}

    def observe(self, iv: Iv, n: int) -> Keystream:
        if not 0 <= n <= MAX_KEYSTREAM_BITS:
            raise ValueError(f"n must lie in 0..{MAX_KEYSTREAM_BITS}")
        ks = self._cache.get(iv)
        if ks is None or len(ks) < n:
            ks = faulted_keystream(self._key, iv, self._mask, n)
            self._cache[iv] = ks
        self.bits_read[iv] = max(self.bits_read.get(iv, 0), n)
        return ks[:n]

    @property
    def bits_consumed(self) -> int:
        return sum(self.bits_read.values())

    def reveal(self) -> tuple[Key, FaultMask]:
        """Ground truth, for scoring experiments only."""
        return self._key, self._mask


def check_feature(machine: FaultedMachine, which: int) -> bool:
    if which in FEATURE_PERIODS:
        p = FEATURE_PERIODS[which]
        z = machine.observe(ZERO_IV, 2 * p)
        return z[:p] == z[p:]
    if which in FEATURE_IV_BITS:
        base = machine.observe(ZERO_IV, IV_WINDOW)
        flipped = machine.observe(ZERO_IV.flip(FEATURE_IV_BITS[which]), IV_WINDOW)
        return base == flipped
    raise ValueError(f"feature must be 1..6, got {which}")


Features = tuple  # six entries, each True, False or None (not evaluated)


def label_from_features(f: Sequence[bool | None], resolve_case5: bool = False) -> Detected:
    """Decision list over the six features; unevaluated entries must not be needed."""
    if f[0]:
        return Detected.CASE1
    if f[1]:
        return Detected.CASE2
    if f[2]:
        return Detected.CASE3
    if f[3]:
        return Detected.CASE4
    if f[4]:
        if f[5]:
            return Detected.CASE5 if resolve_case5 else Detected.CASE5OR6
        return Detected.CASE5
    return Detected.CASE7


def features_needed(f: Sequence[bool]) -> list[int]:
    """Feature numbers the lazy procedure evaluates given all six outcomes."""
    need = []
    for i in range(4):
        need.append(i + 1)
        if f[i]:
            return need
    need.append(5)
    if f[4]:
        need.append(6)
    return need


def bits_for(needed: Sequence[int]) -> int:
    """Keystream bits read by the lazy procedure for the given evaluated features."""
    base = max(2 * FEATURE_PERIODS.get(i, 0) for i in needed)
    if any(i in FEATURE_IV_BITS for i in needed):
        base = max(base, IV_WINDOW)
    return base + IV_WINDOW * sum(1 for i in needed if i in FEATURE_IV_BITS)


@dataclass(frozen=True)
class DetectionResult:
    label: Detected
    features: tuple[bool | None, ...]
    bits_consumed: int

    def record(self, true_case=None) -> dict:
        out = {
            "detected_label": self.label.value,
            "features": list(self.features),
            "keystream_bits_consumed": self.bits_consumed,
        }
        if true_case is not None:
            out = {"true_case": str(true_case), **out}
        return out


def detect_case(machine: FaultedMachine, resolve_case5: bool = False) -> DetectionResult:
    f: list[bool | None] = [None] * 6
    for i in range(4):
        f[i] = check_feature(machine, i + 1)
        if f[i]:
            break
    else:
        f[4] = check_feature(machine, 5)
        if f[4]:
            f[5] = check_feature(machine, 6)
    needed = [i + 1 for i in range(6) if f[i] is not None]
    return DetectionResult(label_from_features(f, resolve_case5), tuple(f), bits_for(needed))


def detect_batch(
    keys: Sequence[Key], masks: Sequence[FaultMask], resolve_case5: bool = False
) -> list[DetectionResult]:
    """Same results as :func:`detect_case` per machine, computed lane-parallel."""
    bank = LaneBank(keys, masks)
    full = bank.full
    z = bank.keystream(ZERO_IV, 2 * PERIOD_CASE3)
    lanes = [periodic_lanes(z, FEATURE_PERIODS[i], full) for i in (1, 2, 3)]
    base = z[:IV_WINDOW]
    for i in (4, 5, 6):
        zi = bank.keystream(ZERO_IV.flip(FEATURE_IV_BITS[i]), IV_WINDOW)
        lanes.append(equal_lanes(base, zi, full))
    table = [unpack_lanes(x, bank.lanes) for x in lanes]
    out = []
    for lane in range(bank.lanes):
        full_f = [bool(table[i][lane]) for i in range(6)]
        needed = features_needed(full_f)
        f = tuple(full_f[i] if i + 1 in needed else None for i in range(6))
        out.append(DetectionResult(label_from_features(f, resolve_case5), f, bits_for(needed)))
    return out


def score(result: DetectionResult, mask: FaultMask) -> bool:
    """Whether the label names the true case (Case5or6 counts for Case 5 and Case 6)."""
    truth = ground_truth_case(mask).value
    if result.label is Detected.CASE5OR6:
        return truth in ("Case5", "Case6")
    return result.label.value == truth
