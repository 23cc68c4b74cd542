"""Bit-exact Trivium with stuck-at-0 faults, plus the reduced (degraded) machines.

Positions follow the usual 1-based numbering: NFSR1 is ``s1..s93``, NFSR2
``s94..s177``, NFSR3 ``s178..s288``.  A state is packed into one int with
``s_j`` at bit ``j - 1``, so a renewal step is a shift plus three feedback
bits.  Time 0 is the loaded input state; time 1152 is the state that emits
``z0``.
"""

from __future__ import annotations

import enum
import random
from dataclasses import dataclass
from typing import Sequence

from .faults import EMPTY_MASK, FaultMask
from .knowledge import KeyKnowledge

INIT_ROUNDS = 1152
MAX_KEYSTREAM_BITS = 1 << 24
STATE_BITS = 288
_ALL = (1 << STATE_BITS) - 1
# feedback cells 1, 94, 178 are written after the shift
_SHIFT_KEEP = _ALL & ~(1 | 1 << 93 | 1 << 177)


class _Word80:
    __slots__ = ("value",)

    def __init__(self, value: int):
        if not 0 <= value < 1 << 80:
            raise ValueError("value must fit in 80 bits")
        object.__setattr__(self, "value", value)

    def __setattr__(self, name, value):
        raise AttributeError(f"{type(self).__name__} is immutable")

    def __eq__(self, other) -> bool:
        return type(other) is type(self) and other.value == self.value

    def __hash__(self) -> int:
        return hash((type(self).__name__, self.value))

    def __repr__(self) -> str:
        return f"{type(self).__name__}({self.hex()!r})"

    def bit(self, i: int) -> int:
        """Bit ``i`` for ``1 <= i <= 80`` (``k_i`` / ``IV_i``)."""
        if not 1 <= i <= 80:
            raise IndexError(f"bit index {i} outside 1..80")
        return (self.value >> (80 - i)) & 1

    def bits(self) -> tuple[int, ...]:
        return tuple(self.bit(i) for i in range(1, 81))

    def hex(self) -> str:
        return f"{self.value:020x}"

    @classmethod
    def from_hex(cls, text: str):
        text = text.strip().lower().removeprefix("0x")
        if len(text) != 20 or any(c not in "0123456789abcdef" for c in text):
            raise ValueError(f"expected 20 hex digits, got {text!r}")
        return cls(int(text, 16))

    @classmethod
    def from_bits(cls, bits: Sequence[int]):
        if len(bits) != 80:
            raise ValueError(f"expected 80 bits, got {len(bits)}")
        v = 0
        for b in bits:
            v = (v << 1) | (b & 1)
        return cls(v)

    @classmethod
    def random(cls, rng: random.Random):
        return cls(rng.getrandbits(80))

    def flip(self, i: int):
        return type(self)(self.value ^ (1 << (80 - i)))


class Key(_Word80):
    """80-bit key; ``k1`` is the most significant bit of the first hex digit."""


class Iv(_Word80):
    """80-bit IV, same bit order as :class:`Key`."""


ZERO_IV = Iv(0)


class Keystream(tuple):
    """Keystream bits ``z0, z1, ...``."""

    def hex(self) -> str:
        if not self:
            return ""
        n = len(self)
        pad = (-n) % 4
        v = 0
        for b in self:
            v = (v << 1) | b
        v <<= pad
        return f"{v:0{(n + pad) // 4}x}"

    @classmethod
    def from_hex(cls, text: str, n: int | None = None) -> "Keystream":
        text = text.strip().lower()
        if not text:
            return cls()
        width = 4 * len(text)
        v = int(text, 16)
        bits = [(v >> (width - 1 - i)) & 1 for i in range(width)]
        return cls(bits if n is None else bits[:n])

    def __getitem__(self, item):
        out = super().__getitem__(item)
        return Keystream(out) if isinstance(item, slice) else out


@dataclass(frozen=True)
class State:
    """Full 288-bit register bank at a given time."""

    bits: int
    time: int = 0

    def __getitem__(self, j: int) -> int:
        if not 1 <= j <= STATE_BITS:
            raise IndexError(f"position {j} outside 1..288")
        return (self.bits >> (j - 1)) & 1

    def dump(self) -> str:
        """288 characters ``'0'/'1'`` ordered ``s1..s288``."""
        return "".join("1" if (self.bits >> i) & 1 else "0" for i in range(STATE_BITS))

    @classmethod
    def parse(cls, text: str, time: int = 0) -> "State":
        text = text.strip()
        if len(text) != STATE_BITS or set(text) - {"0", "1"}:
            raise ValueError("state dump must be 288 characters of 0/1")
        return cls(sum(1 << i for i, c in enumerate(text) if c == "1"), time)


def load_input_state(key: Key, iv: Iv) -> State:
    s = 0
    for i in range(1, 81):
        if key.bit(i):
            s |= 1 << (i - 1)
        if iv.bit(i):
            s |= 1 << (93 + i - 1)
    s |= 0b111 << 285
    return State(s, 0)


def apply_mask(state: State, mask: FaultMask = EMPTY_MASK) -> State:
    return State(state.bits & ~mask.bits, state.time)


def _renew(s: int) -> int:
    t1 = (s >> 65 ^ (s >> 90 & s >> 91) ^ s >> 92 ^ s >> 170) & 1
    t2 = (s >> 161 ^ (s >> 174 & s >> 175) ^ s >> 176 ^ s >> 263) & 1
    t3 = (s >> 242 ^ (s >> 285 & s >> 286) ^ s >> 287 ^ s >> 68) & 1
    return (s << 1) & _SHIFT_KEEP | t3 | t1 << 93 | t2 << 177


def _output(s: int) -> int:
    return (s >> 65 ^ s >> 92 ^ s >> 161 ^ s >> 176 ^ s >> 242 ^ s >> 287) & 1


def state_update(state: State, mask: FaultMask = EMPTY_MASK) -> State:
    return State(_renew(state.bits) & ~mask.bits, state.time + 1)


def advance(state: State, steps: int, mask: FaultMask = EMPTY_MASK) -> State:
    keep = ~mask.bits
    s = state.bits
    for _ in range(steps):
        s = _renew(s) & keep
    return State(s, state.time + steps)


def initialize(key: Key, iv: Iv = ZERO_IV, mask: FaultMask = EMPTY_MASK) -> State:
    return advance(apply_mask(load_input_state(key, iv), mask), INIT_ROUNDS, mask)


def run_keystream(state: State, mask: FaultMask, n: int) -> tuple[Keystream, State]:
    """``n`` keystream bits and the state after the last renewal."""
    if state.time < INIT_ROUNDS:
        raise ValueError("keystream is only produced from time 1152 on")
    if not 0 <= n <= MAX_KEYSTREAM_BITS:
        raise ValueError(f"n must lie in 0..{MAX_KEYSTREAM_BITS}")
    keep = ~mask.bits
    s = state.bits
    out = []
    for _ in range(n):
        out.append(_output(s))
        s = _renew(s) & keep
    return Keystream(out), State(s, state.time + n)


def keystream(state: State, mask: FaultMask = EMPTY_MASK, n: int = 0) -> Keystream:
    return run_keystream(state, mask, n)[0]


def faulted_keystream(key: Key, iv: Iv = ZERO_IV, mask: FaultMask = EMPTY_MASK, n: int = 0) -> Keystream:
    return keystream(initialize(key, iv, mask), mask, n)


def trajectory(key: Key, iv: Iv, mask: FaultMask, until: int) -> list[int]:
    """Packed states for times ``0..until`` inclusive."""
    keep = ~mask.bits
    s = load_input_state(key, iv).bits & keep
    out = [s]
    for _ in range(until):
        s = _renew(s) & keep
        out.append(s)
    return out


def bit(s: int, j: int) -> int:
    """``s_j`` of a packed state."""
    return (s >> (j - 1)) & 1


# -- degraded machines ------------------------------------------------------


class Variant(str, enum.Enum):
    FULL = "full"
    CASE4 = "Case4"
    CASE5 = "Case5"
    CASE6 = "Case6"


# last position of NFSR2 that remains part of the state
REG2_END = {Variant.FULL: 177, Variant.CASE4: 162, Variant.CASE5: 162, Variant.CASE6: 176}


def live_positions(variant: Variant) -> list[int]:
    end = REG2_END[variant]
    return list(range(1, end + 1)) + list(range(178, 289))


def _live_mask(variant: Variant) -> int:
    out = 0
    for p in live_positions(variant):
        out |= 1 << (p - 1)
    return out


_LIVE = {v: _live_mask(v) for v in Variant}
_DEGRADED_SHIFT_KEEP = {v: _SHIFT_KEEP & _LIVE[v] for v in Variant}


class IrreversibleError(ValueError):
    pass


class DomainError(ValueError):
    pass


@dataclass(frozen=True)
class DegradedState:
    """Reduced state of the Case 4/5/6 machines (omitted cells held at 0).

    ``m`` is only meaningful for Case 5: the earliest time from which
    ``(s176, s177)`` stays ``(0, 0)``.
    """

    variant: Variant
    bits: int
    time: int
    m: int = 0

    def __post_init__(self) -> None:
        if self.variant is Variant.FULL:
            raise ValueError("DegradedState needs a Case4/5/6 variant")
        if self.bits & ~_LIVE[self.variant]:
            raise ValueError("bits set outside the variant's live positions")

    @property
    def width(self) -> int:
        return len(live_positions(self.variant))

    def __getitem__(self, j: int) -> int:
        if j not in self._live_set():
            raise IndexError(f"position {j} is not part of the {self.variant.value} state")
        return (self.bits >> (j - 1)) & 1

    def _live_set(self) -> frozenset[int]:
        return _LIVE_SETS[self.variant]

    def dump(self) -> str:
        return "".join(str((self.bits >> (p - 1)) & 1) for p in live_positions(self.variant))


_LIVE_SETS = {v: frozenset(live_positions(v)) for v in Variant}


def _degraded_renew(s: int, variant: Variant) -> int:
    t3 = (s >> 242 ^ (s >> 285 & s >> 286) ^ s >> 287 ^ s >> 68) & 1
    if variant is Variant.CASE6:
        t1 = (s >> 65 ^ (s >> 90 & s >> 91) ^ s >> 92 ^ s >> 170) & 1
        t2 = (s >> 161 ^ (s >> 174 & s >> 175) ^ s >> 263) & 1
    else:
        t1 = (s >> 65 ^ (s >> 90 & s >> 91) ^ s >> 92) & 1
        if variant is Variant.CASE5:
            t1 ^= (s >> 185 ^ s >> 272) & 1
        t2 = (s >> 161 ^ s >> 263) & 1
    return (s << 1) & _DEGRADED_SHIFT_KEEP[variant] | t3 | t1 << 93 | t2 << 177


def _degraded_output(s: int) -> int:
    return (s >> 65 ^ s >> 92 ^ s >> 161 ^ s >> 242 ^ s >> 287) & 1


# inverse: shift left-to-right by one, then rebuild cells 93, 162, 288
_INV_KEEP = _LIVE[Variant.CASE4] & ~(1 << 92 | 1 << 161 | 1 << 287)


def _degraded_unrenew(s: int, variant: Variant) -> int:
    p93 = (s >> 66 ^ (s >> 91 & s >> 92) ^ s >> 93) & 1
    if variant is Variant.CASE5:
        p93 ^= (s >> 186 ^ s >> 273) & 1
    p162 = (s >> 177 ^ s >> 264) & 1
    p288 = (s ^ s >> 69 ^ s >> 243 ^ (s >> 286 & s >> 287)) & 1
    return (s >> 1) & _INV_KEEP | p93 << 92 | p162 << 161 | p288 << 287


def degraded_from_state(state: State, variant: Variant, m: int = 0) -> DegradedState:
    """Project a full (faulted) state onto the variant's live positions."""
    if variant is Variant.CASE5 and state.time < m + 9:
        raise DomainError(f"Case 5 reduction needs time >= m + 9 = {m + 9}")
    return DegradedState(variant, state.bits & _LIVE[variant], state.time, m)


def degraded_update(state: DegradedState) -> DegradedState:
    if state.variant is Variant.CASE5 and state.time < state.m + 9:
        raise DomainError(f"Case 5 renewal needs time >= m + 9 = {state.m + 9}")
    return DegradedState(state.variant, _degraded_renew(state.bits, state.variant), state.time + 1, state.m)


def degraded_inverse(state: DegradedState) -> DegradedState:
    if state.variant is Variant.CASE6:
        raise IrreversibleError("the Case 6 renewal is not reversible")
    if state.variant is Variant.CASE5 and state.time - 1 < state.m + 9:
        raise DomainError(f"Case 5 inverse needs time - 1 >= m + 9 = {state.m + 9}")
    if state.time < 1:
        raise DomainError("cannot step before time 0")
    return DegradedState(state.variant, _degraded_unrenew(state.bits, state.variant), state.time - 1, state.m)


def degraded_keystream(state: DegradedState, n: int) -> Keystream:
    if state.time < INIT_ROUNDS:
        raise ValueError("keystream is only produced from time 1152 on")
    if not 0 <= n <= MAX_KEYSTREAM_BITS:
        raise ValueError(f"n must lie in 0..{MAX_KEYSTREAM_BITS}")
    if state.variant is Variant.CASE5 and state.time < state.m + 9:
        raise DomainError("Case 5 state below its validity bound")
    s, v = state.bits, state.variant
    out = []
    for _ in range(n):
        out.append(_degraded_output(s))
        s = _degraded_renew(s, v)
    return Keystream(out)


def rewind(state: DegradedState, to_time: int) -> DegradedState:
    while state.time > to_time:
        state = degraded_inverse(state)
    return state


def case5_m(key: Key, iv: Iv, mask: FaultMask, lookahead: int = 100) -> int:
    """Earliest time from which ``(s176, s177)`` stays ``(0, 0)`` over ``lookahead`` steps."""
    traj = trajectory(key, iv, mask, 6 + lookahead)
    zero = [bit(s, 176) == 0 and bit(s, 177) == 0 for s in traj]
    for t in range(len(traj) - lookahead):
        if all(zero[t : t + lookahead + 1]):
            if t > 5:
                raise AssertionError(f"m = {t} > 5 contradicts the Case 5 bound")
            return t
    raise AssertionError("(s176, s177) never settles to (0, 0)")


def recover_key_from_case5_state(state: DegradedState, m: int) -> KeyKnowledge:
    """Key bits from the Case 5 reduced state at time 14."""
    if state.variant is not Variant.CASE5:
        raise ValueError("expected a Case 5 reduced state")
    if state.time != 14:
        raise DomainError(f"key readout needs the state at time 14, got {state.time}")
    if not 0 <= m <= 5:
        raise DomainError("m must lie in 0..5")
    kk = KeyKnowledge()
    for i in range(1, 80):
        kk.learn(i, state[14 + i], "s(14,%d)" % (14 + i))
    if m < 5:
        k80 = state[67] ^ (state[92] & state[93]) ^ state[94] ^ state[187] ^ state[274]
        kk.learn(80, k80, "s(13,93) via one inverse step")
    else:
        kk.diagnostics.append("m = 5: one inverse step below time 14 is outside the reduced domain; k80 undetermined")
    return kk


# -- generic renewal over any ring supporting ^ and & -------------------------


def renew_cells(cells: list, variant: Variant = Variant.FULL) -> list:
    """One renewal on a 289-slot list (slot 0 unused); omitted cells are ``None``.

    Works for 0/1 ints, lane-packed ints and :class:`AnfPoly` alike.
    """
    s = cells
    t3 = s[243] ^ (s[286] & s[287]) ^ s[288] ^ s[69]
    if variant is Variant.FULL:
        t1 = s[66] ^ (s[91] & s[92]) ^ s[93] ^ s[171]
        t2 = s[162] ^ (s[175] & s[176]) ^ s[177] ^ s[264]
    elif variant is Variant.CASE6:
        t1 = s[66] ^ (s[91] & s[92]) ^ s[93] ^ s[171]
        t2 = s[162] ^ (s[175] & s[176]) ^ s[264]
    else:
        t1 = s[66] ^ (s[91] & s[92]) ^ s[93]
        if variant is Variant.CASE5:
            t1 = t1 ^ s[186] ^ s[273]
        t2 = s[162] ^ s[264]
    end = REG2_END[variant]
    out = [None, t3, *s[1:93], t1, *s[94:end]]
    out += [None] * (177 - end)
    out += [t2, *s[178:288]]
    return out


def output_cell(cells: list, variant: Variant = Variant.FULL):
    s = cells
    z = s[66] ^ s[93] ^ s[162] ^ s[243] ^ s[288]
    if variant is Variant.FULL:
        z = z ^ s[177]
    return z
