"""Catalog of simulation checks for the structural facts used by the attacks.

Each check runs over ``trials`` random keys (and masks inside the relevant
position range) and stops at the first counterexample.  Several checks test
statements that do not hold as written; they fail with the counterexample
rather than being relaxed.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable

from . import attacks
from .core import (
    INIT_ROUNDS,
    DegradedState,
    IrreversibleError,
    Iv,
    Key,
    Variant,
    ZERO_IV,
    bit,
    case5_m,
    degraded_from_state,
    degraded_inverse,
    degraded_keystream,
    degraded_update,
    faulted_keystream,
    initialize,
    keystream,
    live_positions,
    recover_key_from_case5_state,
    rewind,
    trajectory,
    _renew,
)
from .degrees import degree_runs, symbolic_keystream_degrees
from .detector import FaultedMachine, check_feature
from .faults import EMPTY_MASK, CaseLabel, FaultMask, case_probability


@dataclass
class CheckResult:
    check_id: str
    passed: bool
    trials: int
    detail: str
    counterexample: dict | None = None

    def to_dict(self) -> dict:
        return {
            "check": self.check_id,
            "passed": self.passed,
            "trials": self.trials,
            "detail": self.detail,
            "counterexample": self.counterexample,
        }


class Fail(Exception):
    def __init__(self, detail: str, **example):
        super().__init__(detail)
        self.detail = detail
        self.example = example


CheckFn = Callable[[int, random.Random], str]
CATALOG: dict[str, tuple[str, CheckFn]] = {}


def check(check_id: str, summary: str):
    def register(fn: CheckFn) -> CheckFn:
        CATALOG[check_id] = (summary, fn)
        return fn

    return register


def run_check(check_id: str, trials: int = 10, seed: int = 0) -> CheckResult:
    if check_id not in CATALOG:
        raise KeyError(f"unknown check {check_id!r}")
    if trials < 1:
        raise ValueError("trials must be >= 1")
    _, fn = CATALOG[check_id]
    rng = random.Random(seed)
    try:
        detail = fn(trials, rng)
    except Fail as exc:
        return CheckResult(check_id, False, trials, exc.detail, exc.example)
    return CheckResult(check_id, True, trials, detail)


def _instance(rng: random.Random, lo: int, hi: int) -> tuple[Key, FaultMask]:
    return Key.random(rng), FaultMask.of(rng.randint(lo, hi))


def _where(key: Key, mask: FaultMask, **more) -> dict:
    return {"key": key.hex(), "mask": str(mask), **more}


def _reg(s: int, lo: int, hi: int) -> tuple[int, ...]:
    return tuple(bit(s, j) for j in range(lo, hi + 1))


def _const_key_poly(key: Key, spec) -> int:
    """Evaluate a tiny expression list: ints are key indices, ("+1", i) is k_i + 1."""
    if isinstance(spec, tuple):
        return key.bit(spec[1]) ^ 1
    return key.bit(spec)


# register 1 at time 27 for any fault outside NFSR1
_REG1_AT27 = list(range(43, 67)) + [("+1", 67), ("+1", 68), 69] + list(range(1, 67))


def _reg1_at27(key: Key) -> tuple[int, ...]:
    return tuple(_const_key_poly(key, s) for s in _REG1_AT27)


# -- clean cipher ------------------------------------------------------------


@check("lemma1", "clean keystream degrees: 1 to z65, 2 to z147, 3 to z213, >= 4 to z229")
def _clean_degrees(trials, rng):
    degs = symbolic_keystream_degrees(Variant.FULL, 230)
    want = [(0, 1), (66, 2), (148, 3), (214, 4)]
    got = degree_runs(degs)
    if got != want:
        raise Fail(f"degree runs {got}")
    return f"degree runs {got}"


# -- Case 1 ------------------------------------------------------------------


@check("lemma2", "Case 1 state at time 27")
def _case1_state27(trials, rng):
    for _ in range(trials):
        key, mask = _instance(rng, 94, 162)
        s = trajectory(key, ZERO_IV, mask, 27)[27]
        if _reg(s, 1, 93) != _reg1_at27(key):
            raise Fail("NFSR1 at time 27", **_where(key, mask))
        if any(_reg(s, 162, 288)):
            raise Fail("s(27,162..288) not zero", **_where(key, mask))
    return "NFSR1 rotated key, 162..288 zero"


@check("lemma3", "Case 1 NFSR1 period 69 from time 27, s70..93 = s1..24, 162..288 zero")
def _case1_nfsr1_period(trials, rng):
    for _ in range(trials):
        key, mask = _instance(rng, 94, 162)
        tr = trajectory(key, ZERO_IV, mask, 27 + 300)
        for t in range(27, 27 + 231):
            if _reg(tr[t + 69], 1, 93) != _reg(tr[t], 1, 93):
                raise Fail("NFSR1 not 69-periodic", t=t, **_where(key, mask))
            if _reg(tr[t], 70, 93) != _reg(tr[t], 1, 24) or any(_reg(tr[t], 162, 288)):
                raise Fail("block identity", t=t, **_where(key, mask))
    return "ok over t = 27..257"


def _case1_listing(key: Key) -> list[int]:
    seq = list(range(18, 0, -1)) + [69, ("+1", 68), ("+1", 67)] + list(range(66, 18, -1))
    return [_const_key_poly(key, s) for s in seq]


@check("prop1", "Case 1 keystream period 69 and z0..z68 = (k18..k1, k69, k68+1, k67+1, k66..k19)")
def _case1_ks_listing(trials, rng):
    for _ in range(trials):
        key, mask = _instance(rng, 94, 162)
        z = faulted_keystream(key, ZERO_IV, mask, 276)
        if not attacks.check_period(z, 69):
            raise Fail("period 69", **_where(key, mask))
        if list(z[:69]) != _case1_listing(key):
            diff = [i for i in range(69) if z[i] != _case1_listing(key)[i]]
            raise Fail("z0..z68 differ from the listed key bits", differing=diff, **_where(key, mask))
    return "period and listing hold"


@check("prop1-period", "Case 1 keystream period 69")
def _case1_ks_period(trials, rng):
    for _ in range(trials):
        key, mask = _instance(rng, 94, 162)
        if not attacks.check_period(faulted_keystream(key, ZERO_IV, mask, 690), 69):
            raise Fail("period 69", **_where(key, mask))
    return "z_{m+69} = z_m over 690 bits"


@check("case1-attack", "Case 1 candidates contain the true k1..k69")
def _case1_attack(trials, rng):
    counts = set()
    for _ in range(trials):
        key, mask = _instance(rng, 94, 162)
        kk = attacks.attack_case1(faulted_keystream(key, ZERO_IV, mask, 138))
        counts.add(len(kk.candidates))
        if not kk.consistent_with(key):
            raise Fail("true key not among candidates", **_where(key, mask))
    return f"candidate counts {sorted(counts)}"


# -- Case 2 ------------------------------------------------------------------


def _reg2_at27(key: Key) -> tuple[int, ...]:
    k = lambda i: key.bit(i) if i <= 80 else 0  # noqa: E731
    out = [k(40 + i) ^ (k(65 + i) & k(66 + i)) ^ k(67 + i) for i in range(14)]
    out.append(k(54) ^ (k(79) & k(80)))
    out += [k(i) for i in range(55, 67)]
    return tuple(out + [0] * (84 - len(out)))


@check("lemma4", "Case 2 state at time 27")
def _case2_state27(trials, rng):
    for _ in range(trials):
        key, mask = _instance(rng, 178, 243)
        s = trajectory(key, ZERO_IV, mask, 27)[27]
        if _reg(s, 1, 93) != _reg1_at27(key):
            raise Fail("NFSR1 at time 27", **_where(key, mask))
        if _reg(s, 94, 177) != _reg2_at27(key):
            raise Fail("NFSR2 at time 27", **_where(key, mask))
        if any(_reg(s, 243, 288)):
            raise Fail("s(27,243..288) not zero", **_where(key, mask))
    return "ok"


def _a_closed_form(key: Key) -> list[int]:
    reg = (None,) + _reg1_at27(key)

    def r(p: int) -> int:
        return reg[(p - 1) % 69 + 1] if p > 93 or p < 1 else reg[p]

    out = []
    for i in range(69):
        # NFSR1 rotates with period 69 from time 27
        s = lambda j: r(((j - i - 1) % 69) + 1 if j - i < 1 else j - i)  # noqa: E731
        out.append(s(66) ^ (s(91) & s(92)) ^ s(93))
    return out


@check("lemma5", "Case 2: s(t+1,94) = s(t,171) + a_{t+1}; a28..a96 closed form; a period 69")
def _case2_feedback(trials, rng):
    for _ in range(trials):
        key, mask = _instance(rng, 178, 243)
        tr = trajectory(key, ZERO_IV, mask, 400)
        a = {t + 1: attacks._a_value(tr[t]) for t in range(27, 399)}
        for t in range(27, 399):
            if bit(tr[t + 1], 94) != bit(tr[t], 171) ^ a[t + 1]:
                raise Fail("NFSR2 feedback", t=t, **_where(key, mask))
            if t + 70 <= 399 and a[t + 1] != a[t + 70]:
                raise Fail("a not 69-periodic", t=t, **_where(key, mask))
        if [a[i] for i in range(28, 97)] != _a_closed_form(key):
            raise Fail("a28..a96 closed form", **_where(key, mask))
    return "feedback through s171, closed form and period hold"


def _a_ext(a: dict[int, int], i: int) -> int:
    while i < 28:
        i += 69
    return a[i]


def _changed27(tr, a) -> int:
    s = tr[27]
    for i in range(6):
        v = bit(s, 94 + i) ^ _a_ext(a, 27 - i)
        s = (s & ~(1 << (171 + i))) | (v << (171 + i))
    return s


def _run_from(s: int, mask: FaultMask, steps: int) -> list[int]:
    keep = ~mask.bits
    out = [s]
    for _ in range(steps):
        s = _renew(s) & keep
        out.append(s)
    return out


def _case2_run(key, mask, span):
    tr = trajectory(key, ZERO_IV, mask, 27 + span)
    a = {t + 1: attacks._a_value(tr[t]) for t in range(27, 27 + span)}
    changed = _run_from(_changed27(tr, a), mask, span)
    return tr, a, changed


@check("lemma6", "Case 2 changed state at time 27 leaves later NFSR1/NFSR2 and the keystream unchanged")
def _case2_changed_state(trials, rng):
    for _ in range(trials):
        key, mask = _instance(rng, 178, 243)
        span = INIT_ROUNDS - 27 + 200
        tr, _, ch = _case2_run(key, mask, span)
        for t in range(33 - 27, span + 1):
            u, v = tr[t + 27], ch[t]
            if _reg(u, 1, 177) != _reg(v, 1, 177) or _reg(u, 243, 288) != _reg(v, 243, 288):
                raise Fail("state differs", t=t + 27, **_where(key, mask))
    return "states from time 33 on agree"


@check("lemma7", "Case 2 changed state: s(t+78,j) = s(t,j) + a_{t+172-j}")
def _case2_shift(trials, rng):
    for _ in range(trials):
        key, mask = _instance(rng, 178, 243)
        _, a, ch = _case2_run(key, mask, 400)
        for t in range(0, 300):
            for j in range(94, 178):
                if bit(ch[t + 78], j) != bit(ch[t], j) ^ _a_ext(a, t + 27 + 172 - j):
                    raise Fail("shift relation", t=t + 27, j=j, **_where(key, mask))
    return "ok for t = 27..326"


@check("lemma8-1", "Case 2 changed state: s(t+1794,j) = s(t,j) + sum_m a_{t+34-j+3m}")
def _case2_double_shift(trials, rng):
    for _ in range(trials):
        key, mask = _instance(rng, 178, 243)
        _, a, ch = _case2_run(key, mask, 1794 + 100)
        for t in range(0, 100):
            for j in range(94, 178):
                acc = bit(ch[t], j)
                for m in range(23):
                    acc ^= _a_ext(a, t + 27 + 34 - j + 3 * m)
                if bit(ch[t + 1794], j) != acc:
                    raise Fail("double shift", t=t + 27, j=j, **_where(key, mask))
    return "ok for t = 27..126"


def _case2_state_period(period: int, trials: int, rng) -> str:
    for _ in range(trials):
        key, mask = _instance(rng, 178, 243)
        _, _, ch = _case2_run(key, mask, period + 60)
        for t in range(6, 60):
            if _reg(ch[t + period], 1, 177) != _reg(ch[t], 1, 177):
                raise Fail(f"s1..s177 not {period}-periodic", t=t + 27, **_where(key, mask))
    return f"period {period} holds"


@check("lemma8-2", "Case 2 changed state: s1..s177 period 3358")
def _case2_state_period_3358(trials, rng):
    return _case2_state_period(3358, trials, rng)


@check("lemma8-2-3588", "Case 2 changed state: s1..s177 period 3588 (twice the double-shift length)")
def _case2_state_period_3588(trials, rng):
    return _case2_state_period(3588, trials, rng)


def _ks_period(lo: int, hi: int, period: int, trials: int, rng) -> str:
    for _ in range(trials):
        key, mask = _instance(rng, lo, hi)
        z = faulted_keystream(key, ZERO_IV, mask, 2 * period)
        if not attacks.check_period(z, period):
            m = next(i for i in range(period) if z[i] != z[i + period])
            raise Fail(f"z_(m+{period}) != z_m", m=m, **_where(key, mask))
    return f"period {period} over {2 * period} bits"


@check("prop2", "Case 2 keystream period 3358")
def _case2_ks_period_3358(trials, rng):
    return _ks_period(178, 243, 3358, trials, rng)


@check("prop2-period3588", "Case 2 keystream period 3588")
def _case2_ks_period_3588(trials, rng):
    return _ks_period(178, 243, 3588, trials, rng)


@check("prop2-rank", "Case 2 system rank 210")
def _case2_rank(trials, rng):
    ranks = set()
    for _ in range(trials):
        key, mask = _instance(rng, 178, 243)
        z = faulted_keystream(key, ZERO_IV, mask, attacks.CASE2_ROWS)
        _, rep = attacks.solve_case2(z)
        ranks.add(rep.rank_observed)
        if rep.rank_observed != 210:
            raise Fail(f"rank {rep.rank_observed}", **_where(key, mask))
    return f"ranks {sorted(ranks)}"


@check("prop2-attack", "Case 2 full key recovery")
def _case2_attack(trials, rng):
    for _ in range(trials):
        key, mask = _instance(rng, 178, 243)
        kk, _ = attacks.solve_case2(faulted_keystream(key, ZERO_IV, mask, attacks.CASE2_ROWS))
        if not (kk.is_full() and kk.consistent_with(key)):
            raise Fail("wrong or partial key", **_where(key, mask))
    return "80 bits recovered every time"


# -- Case 3 ------------------------------------------------------------------


@check("lemma9", "Case 3: s66..93 zero from t=92; s172..177 = s94..99 and NFSR2 period 78 from t=98")
def _case3_nfsr12(trials, rng):
    for _ in range(trials):
        key, mask = _instance(rng, 1, 66)
        tr = trajectory(key, ZERO_IV, mask, 98 + 300)
        for t in range(92, 98 + 220):
            if any(_reg(tr[t], 66, 93)):
                raise Fail("s66..93 nonzero", t=t, **_where(key, mask))
            if t >= 98 and (
                _reg(tr[t], 172, 177) != _reg(tr[t], 94, 99) or _reg(tr[t + 78], 94, 177) != _reg(tr[t], 94, 177)
            ):
                raise Fail("NFSR2 structure", t=t, **_where(key, mask))
    return "ok"


@check("lemma10", "Case 3: s(t+1,178) = s(t,264) + b_{t+1} and b period 78 from t=98")
def _case3_feedback(trials, rng):
    for _ in range(trials):
        key, mask = _instance(rng, 1, 66)
        tr = trajectory(key, ZERO_IV, mask, 98 + 300)
        b = {t + 1: attacks._b_value(tr[t]) for t in range(98, 398)}
        for t in range(98, 397):
            if bit(tr[t + 1], 178) != bit(tr[t], 264) ^ b[t + 1]:
                raise Fail("NFSR3 feedback", t=t, **_where(key, mask))
            if t + 79 <= 398 and b[t + 1] != b[t + 79]:
                raise Fail("b not 78-periodic", t=t, **_where(key, mask))
    return "ok"


def _b_ext(b: dict[int, int], i: int) -> int:
    while i < 99:
        i += 78
    return b[i]


def _case3_run(key, mask, span):
    tr = trajectory(key, ZERO_IV, mask, 98 + span)
    b = {t + 1: attacks._b_value(tr[t]) for t in range(98, 98 + span)}
    s = tr[98]
    for i in range(24):
        v = bit(s, 178 + i) ^ _b_ext(b, 98 - i)
        s = (s & ~(1 << (264 + i))) | (v << (264 + i))
    return tr, b, _run_from(s, mask, span)


@check("lemma11", "Case 3 changed state at time 98 leaves s66..288 from t=122 and the keystream unchanged")
def _case3_changed_state(trials, rng):
    for _ in range(trials):
        key, mask = _instance(rng, 1, 66)
        span = INIT_ROUNDS - 98 + 200
        tr, _, ch = _case3_run(key, mask, span)
        for t in range(122 - 98, span + 1):
            if _reg(tr[t + 98], 66, 288) != _reg(ch[t], 66, 288):
                raise Fail("state differs", t=t + 98, **_where(key, mask))
    return "states from time 122 on agree"


@check("lemma12", "Case 3 changed state: s(t+87,j) = s(t,j) + b_{t+265-j}")
def _case3_shift(trials, rng):
    for _ in range(trials):
        key, mask = _instance(rng, 1, 66)
        _, b, ch = _case3_run(key, mask, 400)
        for t in range(0, 300):
            for j in range(178, 289):
                if bit(ch[t + 87], j) != bit(ch[t], j) ^ _b_ext(b, t + 98 + 265 - j):
                    raise Fail("shift relation", t=t + 98, j=j, **_where(key, mask))
    return "ok for t = 98..397"


@check("lemma13-1", "Case 3 changed state: s(t+2262,j) = s(t,j) + sum_m b_{t+31-j+3m}")
def _case3_double_shift(trials, rng):
    for _ in range(trials):
        key, mask = _instance(rng, 1, 66)
        _, b, ch = _case3_run(key, mask, 2262 + 100)
        for t in range(0, 100):
            for j in range(178, 289):
                acc = bit(ch[t], j)
                for m in range(26):
                    acc ^= _b_ext(b, t + 98 + 31 - j + 3 * m)
                if bit(ch[t + 2262], j) != acc:
                    raise Fail("double shift", t=t + 98, j=j, **_where(key, mask))
    return "ok for t = 98..197"


@check("lemma13-2", "Case 3 changed state: s94..288 period 4524")
def _case3_state_period(trials, rng):
    for _ in range(trials):
        key, mask = _instance(rng, 1, 66)
        _, _, ch = _case3_run(key, mask, 4524 + 60)
        for t in range(24, 60):
            if _reg(ch[t + 4524], 94, 288) != _reg(ch[t], 94, 288):
                raise Fail("s94..288 not 4524-periodic", t=t + 98, **_where(key, mask))
    return "period 4524 holds"


@check("prop3", "Case 3 keystream period 4524")
def _case3_ks_period(trials, rng):
    return _ks_period(1, 66, 4524, trials, rng)


@check("prop3-rank", "Case 3 system rank 237")
def _case3_rank(trials, rng):
    ranks = set()
    for _ in range(trials):
        key, mask = _instance(rng, 1, 66)
        _, _, rep = attacks.solve_case3(faulted_keystream(key, ZERO_IV, mask, attacks.CASE3_ROWS))
        ranks.add(rep.rank_observed)
        if rep.rank_observed != 237:
            raise Fail(f"rank {rep.rank_observed}", **_where(key, mask))
    return f"ranks {sorted(ranks)}"


@check("prop3-attack", "Case 3 a1..a92 recovery")
def _case3_attack(trials, rng):
    for _ in range(trials):
        key, mask = _instance(rng, 1, 66)
        tr = trajectory(key, ZERO_IV, mask, 100)
        a, kk, _ = attacks.solve_case3(faulted_keystream(key, ZERO_IV, mask, attacks.CASE3_ROWS))
        if a != attacks.a_sequence_from_trajectory(tr, "case3") or not kk.consistent_with(key):
            raise Fail("a-sequence or key knowledge wrong", **_where(key, mask))
    return "a1..a92 recovered every time"


def _case3_listing(a: dict[int, int], b: dict[int, int]) -> tuple[tuple[int, ...], tuple[int, ...]]:
    A = lambda i: a.get(i, 0)  # noqa: E731
    reg2 = [A(20 - i) for i in range(6)]
    reg2 += [A(14 - i) ^ A(92 - i) for i in range(14)]
    reg2 += [A(78 - i) for i in range(64)]
    reg3 = [A(29 - i) for i in range(29)] + [0] * (111 - 29 - 24)
    reg3 += [_b_ext(b, 98 - i) ^ A(29 - i) for i in range(24)]
    return tuple(reg2), tuple(reg3)


@check("lemma14", "Case 3 state at time 98 in terms of a1..a92 (NFSR3 with the changed cells)")
def _case3_state98(trials, rng):
    for _ in range(trials):
        key, mask = _instance(rng, 1, 66)
        tr, b, ch = _case3_run(key, mask, 200)
        a = attacks.a_sequence_from_trajectory(tr, "case3").as_dict()
        reg2, reg3 = _case3_listing(a, b)
        if _reg(tr[98], 94, 177) != reg2:
            raise Fail("NFSR2 at time 98", **_where(key, mask))
        if any(_reg(tr[98], 207, 264)):
            raise Fail("zero block s(98,207..264)", **_where(key, mask))
        if _reg(ch[0], 178, 288) != reg3:
            got = _reg(ch[0], 178, 288)
            diff = [178 + i for i in range(111) if got[i] != reg3[i]]
            raise Fail("NFSR3 at time 98", positions=diff, **_where(key, mask))
    return "ok"


@check("lemma15", "NFSR1 cell travels unchanged when no fault lies on its path")
def _path_values(trials, rng):
    for _ in range(trials):
        key = Key.random(rng)
        mask = FaultMask(frozenset(rng.sample(range(1, 94), rng.randint(1, 4))))
        tr = trajectory(key, ZERO_IV, mask, 93)
        for j in range(1, 94):
            for m in range(0, 94 - j):
                if any(p in mask for p in range(j, j + m + 1)):
                    continue
                if bit(tr[m], j + m) != bit(tr[0], j):
                    raise Fail("path value changed", j=j, m=m, **_where(key, mask))
    return "ok"


def _fault_in(rng: random.Random, lo: int, hi: int) -> FaultMask:
    """1 to 3 faults in NFSR1 with P_L drawn from lo..hi."""
    pl = rng.randint(lo, hi)
    extra = rng.sample(range(pl + 1, 94), rng.randint(0, 2)) if pl < 93 else []
    return FaultMask(frozenset([pl, *extra]))


@check("prop4-5", "Case 3 key relations never contradict the key; the branch matching cell 93 holds")
def _case3_key_relations(trials, rng):
    fired = [0, 0]
    for _ in range(trials):
        key = Key.random(rng)
        mask = _fault_in(rng, 1, 66)
        if rng.random() < 0.3 and 93 not in mask:
            mask = FaultMask(mask.positions | {93})
        tr = trajectory(key, ZERO_IV, mask, 100)
        a = attacks.a_sequence_from_trajectory(tr, "case3")
        kk = attacks.case3_partial_key(a)
        if any(key.bit(i) != v for i, v in kk.known.items()) or not all(r.holds(key) for r in kk.relations):
            raise Fail("known bit or relation contradicts the key", **_where(key, mask))
        for groups in kk.alternatives:
            fired[1] += 1
            branch = groups[1] if 93 in mask else groups[0]
            if not all(r.holds(key) for r in branch):
                raise Fail("branch selected by cell 93 fails", **_where(key, mask))
        if kk.known:
            fired[0] += 1
    return f"triggered {fired[0]} times, branch systems {fired[1]} times"


# -- Cases 4 to 6 ------------------------------------------------------------


def _equivalence(variant: Variant, lo: int, hi: int, trials: int, rng, iv_bit: tuple[int, ...]) -> str:
    for _ in range(trials):
        key, mask = _instance(rng, lo, hi)
        st = initialize(key, ZERO_IV, mask)
        m = case5_m(key, ZERO_IV, mask) if variant is Variant.CASE5 else 0
        d = degraded_from_state(st, variant, m)
        z = keystream(st, mask, 2000)
        if degraded_keystream(d, 2000) != z:
            raise Fail("reduced machine keystream differs", **_where(key, mask))
        for i in iv_bit:
            if faulted_keystream(key, ZERO_IV.flip(i), mask, 288) != z[:288]:
                raise Fail(f"IV{i} changes the keystream", **_where(key, mask))
        if variant is not Variant.CASE6:
            if degraded_inverse(degraded_update(d)) != d:
                raise Fail("inverse round trip", **_where(key, mask))
        else:
            try:
                degraded_inverse(d)
            except IrreversibleError:
                pass
            else:
                raise Fail("Case 6 inverse accepted")
    return "reduced keystream, IV invariance and inverse behave"


@check("prop6", "Case 4: s171..177 zero, 273-bit machine, reversible, IV70 invariant")
def _case4_structure(trials, rng):
    for _ in range(trials):
        key, mask = _instance(rng, 163, 171)
        for s in trajectory(key, ZERO_IV, mask, 400):
            if any(_reg(s, 171, 177)):
                raise Fail("s171..177 nonzero", **_where(key, mask))
    return _equivalence(Variant.CASE4, 163, 171, trials, rng, (70,))


def _profile_check(variant: Variant) -> str:
    got = degree_runs(symbolic_keystream_degrees(variant, 230))
    want = [(0, 1), (66, 2), (160, 3), (229, 4)]
    if got != want:
        raise Fail(f"degree runs {got}")
    return f"degree runs {got}"


@check("prop7", "Case 4 reduced machine degrees: 1 to z65, 2 to z159, 3 to z228, >= 4 at z229")
def _case4_degrees(trials, rng):
    return _profile_check(Variant.CASE4)


@check("lemma16", "Case 5: (s176, s177) = (0, 0) from t = 5")
def _case5_zero_pair(trials, rng):
    for _ in range(trials):
        key, mask = _instance(rng, 172, 176)
        iv = Iv.random(rng) if rng.random() < 0.5 else ZERO_IV
        for t, s in enumerate(trajectory(key, iv, mask, 300)):
            if t >= 5 and (bit(s, 176) or bit(s, 177)):
                raise Fail("nonzero", t=t, iv=iv.hex(), **_where(key, mask))
    return "ok"


@check("lemma17", "Case 5: s(162+i) + s(177+i) + s(264+i) = 0 from t = m + i, i = 1..9")
def _case5_relations(trials, rng):
    for _ in range(trials):
        key, mask = _instance(rng, 172, 176)
        iv = Iv.random(rng) if rng.random() < 0.5 else ZERO_IV
        m = case5_m(key, iv, mask)
        tr = trajectory(key, iv, mask, 300)
        for i in range(1, 10):
            for t in range(m + i, 300):
                s = tr[t]
                if bit(s, 162 + i) ^ bit(s, 177 + i) ^ bit(s, 264 + i):
                    raise Fail("relation fails", i=i, t=t, m=m, **_where(key, mask))
    return "ok"


@check("prop8", "Case 5: 273-bit machine from t = m + 9, reversible, IV79 invariant")
def _case5_structure(trials, rng):
    return _equivalence(Variant.CASE5, 172, 176, trials, rng, (79,))


@check("prop9", "Case 5 reduced machine degrees: 1 to z65, 2 to z159, 3 to z228, >= 4 at z229")
def _case5_degrees(trials, rng):
    return _profile_check(Variant.CASE5)


@check("case5-readout", "Case 5 key from the reduced state at time 14")
def _case5_readout(trials, rng):
    live = 0
    for p in live_positions(Variant.CASE5):
        live |= 1 << (p - 1)
    seen = set()
    for n in range(trials):
        key, mask = _instance(rng, 172, 176)
        iv = Iv(rng.getrandbits(80)) if n % 2 else ZERO_IV
        m = case5_m(key, iv, mask)
        tr = trajectory(key, iv, mask, 500)
        d = rewind(DegradedState(Variant.CASE5, tr[500] & live, 500, m), 14)
        if d.bits != tr[14] & live:
            raise Fail("inverse chain misses the state at time 14", **_where(key, mask))
        kk = recover_key_from_case5_state(d, m)
        seen.add(m)
        if not kk.consistent_with(key) or kk.n_known != (80 if m < 5 else 79):
            raise Fail("readout wrong", m=m, **_where(key, mask))
    return f"m values seen {sorted(seen)}"


@check("prop10", "Case 6: 287-bit machine, irreversible, IV79 and IV80 invariant")
def _case6_structure(trials, rng):
    return _equivalence(Variant.CASE6, 177, 177, trials, rng, (79, 80))


# -- detection and probabilities ---------------------------------------------


_FACTS = [
    (94, 162, 1, True),
    (178, 243, 2, True),
    (1, 66, 3, True),
    (163, 171, 4, True),
    (172, 176, 5, True),
    (177, 177, 5, True),
    (177, 177, 6, True),
]


@check("features", "each case satisfies its feature (Feature 2 on the 3588 block)")
def _features(trials, rng):
    for _ in range(trials):
        for lo, hi, feature, want in _FACTS:
            key, mask = _instance(rng, lo, hi)
            if check_feature(FaultedMachine(key, mask), feature) != want:
                raise Fail(f"feature {feature}", **_where(key, mask))
    return "all facts hold"


@check("probabilities", "single-position case probabilities and the stated bounds")
def _probabilities(trials, rng):
    p = case_probability()
    want = {CaseLabel.CASE1: 69, CaseLabel.CASE2: 66, CaseLabel.CASE3: 66, CaseLabel.CASE4: 9,
            CaseLabel.CASE5: 5, CaseLabel.CASE6: 1, CaseLabel.CASE7: 72}
    for label, n in want.items():
        if p[label] != Fraction(n, 288):
            raise Fail(f"{label} = {p[label]}")
    if float(p[CaseLabel.CASE1]) < 0.2395 or float(p[CaseLabel.CASE6]) > 0.0035:
        raise Fail("bounds")
    return "exact"


@check("clean", "empty mask reproduces the plain cipher")
def _clean(trials, rng):
    for _ in range(trials):
        key, iv = Key.random(rng), Iv.random(rng)
        a = faulted_keystream(key, iv, EMPTY_MASK, 128)
        m = FaultedMachine(key, EMPTY_MASK)
        if m.observe(iv, 128) != a:
            raise Fail("oracle differs", key=key.hex(), iv=iv.hex())
    return "ok"
