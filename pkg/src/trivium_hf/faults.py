"""Stuck-at-0 fault masks, injection models and case classification."""

from __future__ import annotations

import enum
import math
import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable

REGISTERS = ((1, 93), (94, 177), (178, 288))
REGISTER_LENGTHS = tuple(hi - lo + 1 for lo, hi in REGISTERS)


def register_of(position: int) -> int:
    """0, 1 or 2 for NFSR1..NFSR3."""
    for r, (lo, hi) in enumerate(REGISTERS):
        if lo <= position <= hi:
            return r
    raise ValueError(f"position {position} outside 1..288")


class CaseLabel(str, enum.Enum):
    CASE1 = "Case1"
    CASE2 = "Case2"
    CASE3 = "Case3"
    CASE4 = "Case4"
    CASE5 = "Case5"
    CASE6 = "Case6"
    CASE7 = "Case7"

    def __str__(self) -> str:
        return self.value


# P_L ranges per case, inclusive
CASE_RANGES: dict[CaseLabel, tuple[tuple[int, int], ...]] = {
    CaseLabel.CASE1: ((94, 162),),
    CaseLabel.CASE2: ((178, 243),),
    CaseLabel.CASE3: ((1, 66),),
    CaseLabel.CASE4: ((163, 171),),
    CaseLabel.CASE5: ((172, 176),),
    CaseLabel.CASE6: ((177, 177),),
    CaseLabel.CASE7: ((67, 93), (244, 288)),
}


def case_positions(label: CaseLabel) -> list[int]:
    return [p for lo, hi in CASE_RANGES[label] for p in range(lo, hi + 1)]


class MaskError(ValueError):
    pass


@dataclass(frozen=True)
class FaultMask:
    """Set of stuck-at-0 state positions, all inside one NFSR."""

    positions: frozenset[int] = frozenset()

    def __post_init__(self) -> None:
        pos = frozenset(int(p) for p in self.positions)
        object.__setattr__(self, "positions", pos)
        if any(p < 1 or p > 288 for p in pos):
            raise MaskError("mask positions must lie in 1..288")
        if len({register_of(p) for p in pos}) > 1:
            raise MaskError("mask positions must share one register")

    @classmethod
    def of(cls, *positions: int) -> "FaultMask":
        return cls(frozenset(positions))

    @classmethod
    def parse(cls, spec: str) -> "FaultMask":
        """Parse ``"100"``, ``"200,250"`` or ``""`` (empty mask); ranges ``a-b`` allowed."""
        out: set[int] = set()
        for part in spec.replace(" ", "").split(","):
            if not part:
                continue
            lo, sep, hi = part.partition("-")
            try:
                if sep:
                    out.update(range(int(lo), int(hi) + 1))
                else:
                    out.add(int(lo))
            except ValueError:
                raise MaskError(f"malformed mask entry {part!r}") from None
        return cls(frozenset(out))

    def __str__(self) -> str:
        return ",".join(str(p) for p in sorted(self.positions))

    def __bool__(self) -> bool:
        return bool(self.positions)

    def __len__(self) -> int:
        return len(self.positions)

    def __iter__(self):
        return iter(sorted(self.positions))

    def __contains__(self, p: int) -> bool:
        return p in self.positions

    @property
    def low(self) -> int:
        """P_L, the lowest faulted position."""
        if not self.positions:
            raise MaskError("empty mask has no P_L")
        return min(self.positions)

    @property
    def high(self) -> int:
        """P_H, the highest faulted position."""
        if not self.positions:
            raise MaskError("empty mask has no P_H")
        return max(self.positions)

    @property
    def bits(self) -> int:
        """Packed form: bit ``p - 1`` set for each faulted position ``p``."""
        out = 0
        for p in self.positions:
            out |= 1 << (p - 1)
        return out


EMPTY_MASK = FaultMask()


def classify_case(mask: FaultMask) -> CaseLabel:
    if not mask:
        raise MaskError("cannot classify an empty mask")
    pl = mask.low
    for label, ranges in CASE_RANGES.items():
        if any(lo <= pl <= hi for lo, hi in ranges):
            return label
    raise AssertionError("unreachable: cases partition 1..288")


def ground_truth_case(mask: FaultMask) -> CaseLabel:
    """Like :func:`classify_case` but maps the fault-free machine to Case 7."""
    return classify_case(mask) if mask else CaseLabel.CASE7


# -- injection models ----------------------------------------------------


@dataclass(frozen=True)
class SingleUniform:
    """One faulted position, uniform over 1..288."""

    def __str__(self) -> str:
        return "single"


@dataclass(frozen=True)
class KWithinRegister:
    """Register drawn proportional to its length, then ``k`` distinct positions in it."""

    k: int

    def __post_init__(self) -> None:
        if self.k < 1:
            raise ValueError("k must be >= 1")
        if self.k > min(REGISTER_LENGTHS):
            raise ValueError(f"k must be <= {min(REGISTER_LENGTHS)}")

    def __str__(self) -> str:
        return f"k:{self.k}"


@dataclass(frozen=True)
class BernoulliWithinRegister:
    """Register drawn proportional to its length, each cell faulted with probability ``p``."""

    p: float

    def __post_init__(self) -> None:
        if not 0.0 < self.p < 1.0:
            raise ValueError("p must lie strictly between 0 and 1")

    def __str__(self) -> str:
        return f"bernoulli:{self.p:g}"


InjectionModel = SingleUniform | KWithinRegister | BernoulliWithinRegister


def parse_model(spec: str) -> InjectionModel:
    """``single`` | ``k:<n>`` | ``bernoulli:<p>``."""
    name, _, arg = spec.partition(":")
    try:
        if name == "single" and not arg:
            return SingleUniform()
        if name == "k":
            return KWithinRegister(int(arg))
        if name == "bernoulli":
            return BernoulliWithinRegister(float(arg))
    except ValueError as exc:
        raise ValueError(f"bad model {spec!r}: {exc}") from None
    raise ValueError(f"unknown injection model {spec!r}")


def _pick_register(rng: random.Random) -> tuple[int, int]:
    x = rng.randrange(288)
    for lo, hi in REGISTERS:
        if x < hi:
            return lo, hi
    raise AssertionError


def sample_fault_mask(model: InjectionModel, seed: int | random.Random) -> FaultMask:
    rng = seed if isinstance(seed, random.Random) else random.Random(seed)
    if isinstance(model, SingleUniform):
        return FaultMask(frozenset((rng.randint(1, 288),)))
    lo, hi = _pick_register(rng)
    if isinstance(model, KWithinRegister):
        return FaultMask(frozenset(rng.sample(range(lo, hi + 1), model.k)))
    if isinstance(model, BernoulliWithinRegister):
        while True:
            pos = [p for p in range(lo, hi + 1) if rng.random() < model.p]
            if pos:
                return FaultMask(frozenset(pos))
    raise TypeError(f"unsupported model {model!r}")


@dataclass(frozen=True)
class CaseEstimate:
    probability: float
    stderr: float
    count: int
    trials: int


def case_probability(
    model: InjectionModel = SingleUniform(), samples: int | None = None, seed: int = 0
) -> dict[CaseLabel, Fraction] | dict[CaseLabel, CaseEstimate]:
    """Exact rationals for SingleUniform (unless ``samples`` is given), else Monte Carlo."""
    if isinstance(model, SingleUniform) and samples is None:
        return {label: Fraction(len(case_positions(label)), 288) for label in CaseLabel}
    if samples is None or samples < 1:
        raise ValueError("Monte Carlo estimate needs samples >= 1")
    counts = tally_cases(sample_masks(model, samples, seed))
    out = {}
    for label in CaseLabel:
        c = counts[label]
        p = c / samples
        out[label] = CaseEstimate(p, math.sqrt(p * (1 - p) / samples), c, samples)
    return out


def sample_masks(model: InjectionModel, count: int, seed: int) -> list[FaultMask]:
    """Masks for trials ``0..count-1``, trial ``i`` seeded with ``seed + i``."""
    return [sample_fault_mask(model, seed + i) for i in range(count)]


def tally_cases(masks: Iterable[FaultMask]) -> dict[CaseLabel, int]:
    counts = {label: 0 for label in CaseLabel}
    for m in masks:
        counts[classify_case(m)] += 1
    return counts
