"""Key recovery per fault case.

Cases 2 and 3 share one pipeline: a linear system over the register
contents at a fixed time plus an auxiliary feedback sequence (the ``a`` or
``b`` values), then a rewrite of those unknowns as polynomials in fewer base
variables, obtained by symbolic simulation, followed by linearization and an
exhaustive search over the few free linear unknowns.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass, field
from typing import Sequence

from .core import INIT_ROUNDS, Key, Variant, bit, live_positions, output_cell, renew_cells
from .faults import CaseLabel, FaultMask
from .gf2 import ONE, ZERO, AnfPoly, EliminatedRows, Gf2System, InconsistentSystemError, enumerate_solutions
from .knowledge import KeyKnowledge, Relation, kvar
from .linearize import Linearized, linearize, solve_linearized


class AttackFailure(RuntimeError):
    """The attack produced no unique, consistent answer."""

    def __init__(self, stage: str, message: str, survivors: Sequence | None = None, diagnostics: Sequence[str] = ()):
        super().__init__(f"{stage}: {message}")
        self.stage = stage
        self.survivors = list(survivors or [])
        self.diagnostics = list(diagnostics)


class WrongCaseError(AttackFailure):
    pass


@dataclass(frozen=True)
class ASequence:
    """``a_i`` for ``first <= i <= last``; ``context`` is ``"case2"`` or ``"case3"``."""

    values: tuple[int, ...]
    first: int
    context: str

    @property
    def last(self) -> int:
        return self.first + len(self.values) - 1

    def __getitem__(self, i: int) -> int:
        if not self.first <= i <= self.last:
            raise IndexError(f"a_{i} outside {self.first}..{self.last}")
        return self.values[i - self.first]

    def as_dict(self) -> dict[int, int]:
        return {self.first + j: v for j, v in enumerate(self.values)}


@dataclass(frozen=True)
class BSequence:
    """``b_i`` for ``first <= i <= last`` (Case 3)."""

    values: tuple[int, ...]
    first: int

    def __getitem__(self, i: int) -> int:
        return self.values[i - self.first]


def _a_value(s: int) -> int:
    return bit(s, 66) ^ (bit(s, 91) & bit(s, 92)) ^ bit(s, 93)


def _b_value(s: int) -> int:
    return bit(s, 162) ^ (bit(s, 175) & bit(s, 176)) ^ bit(s, 177)


def a_sequence_from_trajectory(traj: Sequence[int], context: str) -> ASequence:
    """Simulator-side ``a`` values (``a_{t+1}`` from the state at time ``t``)."""
    if context == "case2":
        first, last = 28, 96
    elif context == "case3":
        first, last = 1, 92
    else:
        raise ValueError(f"unknown context {context!r}")
    return ASequence(tuple(_a_value(traj[i - 1]) for i in range(first, last + 1)), first, context)


def b_sequence_from_trajectory(traj: Sequence[int]) -> BSequence:
    return BSequence(tuple(_b_value(traj[i - 1]) for i in range(99, 177)), 99)


# -- symbolic simulation in key variables --------------------------------------


def symbolic_states(mask: FaultMask, until: int) -> list[list]:
    """Cell lists (``AnfPoly`` over ``k1..k80``) for times ``0..until`` with the all-zero IV."""
    cells = [ZERO] * 289
    for i in range(1, 81):
        cells[i] = kvar(i)
    for j in (286, 287, 288):
        cells[j] = ONE
    for p in mask.positions:
        cells[p] = ZERO
    out = [cells]
    for _ in range(until):
        cells = renew_cells(cells)
        for p in mask.positions:
            cells[p] = ZERO
        out.append(cells)
    return out


# -- Case 1 ------------------------------------------------------------------

CASE1_PERIOD = 69


def check_period(ks: Sequence[int], period: int) -> bool:
    return all(ks[m] == ks[m + period] for m in range(len(ks) - period))


@functools.lru_cache(maxsize=1)
def case1_output_map() -> tuple[AnfPoly, ...]:
    """``z0..z68`` of a Case 1 machine as affine functions of the key.

    The NFSR2 fault kills every path from NFSR2/NFSR3 back into NFSR1, so any
    position in 94..162 gives the same functions; 94 is used.
    """
    states = symbolic_states(FaultMask.of(94), INIT_ROUNDS + CASE1_PERIOD - 1)
    return tuple(output_cell(states[INIT_ROUNDS + i]) for i in range(CASE1_PERIOD))


def attack_case1(ks: Sequence[int]) -> KeyKnowledge:
    """Recover what ``z0..z68`` reveal about ``k1..k69``.

    Every ``z_i`` is a sum of two key bits (plus a constant), so the 69
    equations determine the key only up to the 3-dimensional kernel of that
    map: all 8 preimages are returned as candidates.
    """
    if len(ks) < CASE1_PERIOD:
        raise ValueError(f"need at least {CASE1_PERIOD} keystream bits")
    if not check_period(ks, CASE1_PERIOD):
        raise WrongCaseError("period", "keystream does not repeat every 69 bits")
    names = [f"k{i}" for i in range(1, 70)]
    system = Gf2System(names)
    relations = []
    for i, poly in enumerate(case1_output_map()):
        row = 0
        for m in poly.terms:
            if m:
                if m.bit_count() != 1 or m.bit_length() - 1 > 69:
                    raise AssertionError("Case 1 output is not affine in k1..k69")
                row |= 1 << (m.bit_length() - 2)
        value = ks[i] ^ poly.constant_term()
        system.add_row(row, value)
        relations.append(Relation(poly ^ poly.constant_term(), value, f"z{i}"))
    try:
        sols = EliminatedRows(system.rows, system.nvars).solve(system.consts)
    except InconsistentSystemError:
        raise WrongCaseError("linear", "z0..z68 inconsistent with the Case 1 output map") from None
    kk = KeyKnowledge(relations=relations)
    kk.candidates = []
    for x in enumerate_solutions(sols):
        kk.candidates.append({i: (x >> (i - 1)) & 1 for i in range(1, 70)})
    for i in range(1, 70):
        vals = {c[i] for c in kk.candidates}
        if len(vals) == 1:
            kk.learn(i, vals.pop(), "fixed by z0..z68")
    kk.diagnostics.append(
        f"rank {sols.rank} of 69: {len(kk.candidates)} keys k1..k69 produce this keystream"
    )
    return kk


# -- Case 2 ------------------------------------------------------------------

CASE2_TIME = 27
CASE2_ROWS = 3358
CASE2_PERIOD = 1794


def case2_names() -> list[str]:
    return (
        [f"s27_{j}" for j in range(25, 94)]
        + [f"s27_{j}" for j in range(100, 178)]
        + [f"a{i}" for i in range(28, 97)]
    )


def _a2(i: int) -> int:
    """Column of ``a_i`` with the subscript reduced into 28..96."""
    return 147 + (i - 28) % 69


@functools.lru_cache(maxsize=4)
def case2_rows(nrows: int = CASE2_ROWS) -> tuple[int, ...]:
    """Coefficient rows of ``z0..z_{nrows-1}`` over the 216 Case 2 unknowns."""
    r1 = [0] * 94
    r2 = [0] * 178
    for j in range(25, 94):
        r1[j] = 1 << (j - 25)
    for j in range(1, 25):
        r1[j] = r1[j + 69]
    for j in range(100, 178):
        r2[j] = 1 << (69 + j - 100)
    # changed state: s(27,172+i) absorbs a_{96-i}
    for i in range(6):
        r2[94 + i] = r2[172 + i] ^ (1 << _a2(27 - i))
    rows = []
    t = CASE2_TIME
    while len(rows) < nrows:
        if t >= INIT_ROUNDS:
            rows.append(r1[66] ^ r1[93] ^ r2[162] ^ r2[177])
        f1 = r1[69]
        f2 = r2[171] ^ (1 << _a2(t + 1))
        r1 = [0, f1] + r1[1:93]
        r2 = r2[:94] + [f2] + r2[94:177]
        t += 1
    return tuple(rows)


def build_case2_system(ks: Sequence[int], nrows: int = CASE2_ROWS) -> Gf2System:
    if len(ks) < nrows:
        raise ValueError(f"need at least {nrows} keystream bits")
    return Gf2System(case2_names(), list(case2_rows(nrows)), [b & 1 for b in ks[:nrows]])


def case2_reference_vector(traj: Sequence[int]) -> int:
    """Ground-truth unknowns from a simulator trajectory (times 0..96 at least)."""
    s27 = traj[CASE2_TIME]
    a = a_sequence_from_trajectory(traj, "case2")
    x = 0
    for j in range(25, 94):
        x |= bit(s27, j) << (j - 25)
    for j in range(100, 172):
        x |= bit(s27, j) << (69 + j - 100)
    for i in range(6):
        x |= (bit(s27, 94 + i) ^ a[96 - i]) << (69 + 72 + i)
    for i in range(28, 97):
        x |= a[i] << _a2(i)
    return x


@functools.lru_cache(maxsize=1)
def case2_key_polynomials() -> tuple[AnfPoly, ...]:
    """The 216 Case 2 unknowns as polynomials in the key, from symbolic simulation."""
    states = symbolic_states(FaultMask.of(178), 96)
    s27 = states[CASE2_TIME]
    a = {t + 1: states[t][66] ^ (states[t][91] & states[t][92]) ^ states[t][93] for t in range(27, 96)}
    out = [s27[j] for j in range(25, 94)]
    out += [s27[j] for j in range(100, 172)]
    out += [s27[94 + i] ^ a[96 - i] for i in range(6)]
    out += [a[i] for i in range(28, 97)]
    return tuple(out)


@functools.lru_cache(maxsize=4)
def _case2_linearized(nrows: int) -> Linearized:
    return linearize(case2_rows(nrows), case2_key_polynomials())


@functools.lru_cache(maxsize=4)
def _eliminated(rows: tuple[int, ...], nvars: int) -> EliminatedRows:
    return EliminatedRows(rows, nvars)


@dataclass
class SolveReport:
    """Statistics of a Case 2/3 solve, alongside the recovered knowledge."""

    rank_observed: int
    nvars: int
    candidates_before_filter: int
    linearized_rank: int
    linearized_nullity: int
    guess_variables: int
    survivors: int
    extra: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "rank_observed": self.rank_observed,
            "nvars": self.nvars,
            "candidates_before_filter": self.candidates_before_filter,
            "linearized_rank": self.linearized_rank,
            "linearized_nullity": self.linearized_nullity,
            "guess_variables": self.guess_variables,
            "survivors": self.survivors,
            **self.extra,
        }


def solve_case2(ks: Sequence[int], nrows: int = CASE2_ROWS) -> tuple[KeyKnowledge, SolveReport]:
    """Full key from a Case 2 keystream.

    The 216-unknown linear system alone leaves far too many solutions to list,
    so the unknowns are replaced by their key polynomials (register 1 at time
    27 is the rotated key, the ``a`` values are quadratic in it) and the
    product monomials are checked against the linear ones.
    """
    system = build_case2_system(ks, nrows)
    elim = _eliminated(tuple(system.rows), system.nvars)
    try:
        elim.solve(system.consts)
    except InconsistentSystemError:
        raise AttackFailure("linear", "216-unknown system is inconsistent") from None
    lin = _case2_linearized(nrows)
    try:
        res = solve_linearized(lin, system.consts)
    except InconsistentSystemError:
        raise AttackFailure("linearized", "no key polynomial assignment fits the keystream") from None
    report = SolveReport(
        rank_observed=elim.rank,
        nvars=system.nvars,
        candidates_before_filter=1 << (system.nvars - elim.rank),
        linearized_rank=lin.rank,
        linearized_nullity=lin.nullity,
        guess_variables=len(res.guess_variables),
        survivors=len(res.assignments),
    )
    keys = [Key.from_bits([sol.get(i, 0) for i in range(1, 81)]) for sol in res.assignments]
    if len(keys) != 1:
        raise AttackFailure("filter", f"{len(keys)} keys survive the product checks", keys)
    sol = res.assignments[0]
    kk = KeyKnowledge()
    for i in range(1, 81):
        if i in sol:
            kk.learn(i, sol[i], "linearized Case 2 system")
    missing = [i for i in range(1, 81) if i not in sol]
    if missing:
        kk.diagnostics.append(f"key bits absent from the system: {missing}")
    kk.diagnostics.append(
        f"216-unknown rank {elim.rank}; linearized rank {lin.rank} over {len(lin.monomials)} monomials"
    )
    return kk, report


# -- Case 3 ------------------------------------------------------------------

CASE3_TIME = 98
CASE3_ROWS = 4524
CASE3_PERIOD = 2262
CASE3_ZERO_BLOCK = range(207, 265)


def case3_names() -> list[str]:
    return (
        [f"s98_{j}" for j in range(100, 178)]
        + [f"s98_{j}" for j in range(202, 289)]
        + [f"b{i}" for i in range(99, 177)]
    )


def _b3(i: int) -> int:
    """Column of ``b_i`` with the subscript reduced into 99..176."""
    return 165 + (i - 99) % 78


def _s3(j: int) -> int:
    return j - 100 if j <= 177 else 78 + j - 202


@functools.lru_cache(maxsize=4)
def case3_rows(nrows: int = CASE3_ROWS) -> tuple[int, ...]:
    """Coefficient rows of ``z0..z_{nrows-1}`` over the 243 Case 3 unknowns."""
    r2 = {j: 1 << _s3(j) for j in range(100, 178)}
    # NFSR1 is silent from time 92 on, so s(98,94+i) = s(98,172+i)
    for i in range(6):
        r2[94 + i] = r2[172 + i]
    r3 = {j: 1 << _s3(j) for j in range(202, 289)}
    # changed state: s(98,265+i) absorbs b_{176-i}
    for i in range(24):
        r3[178 + i] = r3[265 + i] ^ (1 << _b3(176 - i))
    c2 = [r2[j] for j in range(94, 178)]
    c3 = [r3[j] for j in range(178, 289)]
    rows = []
    t = CASE3_TIME
    while len(rows) < nrows:
        if t >= INIT_ROUNDS:
            rows.append(c2[162 - 94] ^ c2[177 - 94] ^ c3[243 - 178] ^ c3[288 - 178])
        f2 = c2[171 - 94]
        f3 = c3[264 - 178] ^ (1 << _b3(t + 1))
        c2 = [f2] + c2[:-1]
        c3 = [f3] + c3[:-1]
        t += 1
    return tuple(rows)


def build_case3_system(ks: Sequence[int], nrows: int = CASE3_ROWS) -> Gf2System:
    if len(ks) < nrows:
        raise ValueError(f"need at least {nrows} keystream bits")
    return Gf2System(case3_names(), list(case3_rows(nrows)), [b & 1 for b in ks[:nrows]])


def case3_reference_vector(traj: Sequence[int]) -> int:
    """Ground-truth unknowns from a simulator trajectory (times 0..176 at least)."""
    s98 = traj[CASE3_TIME]
    b = b_sequence_from_trajectory(traj)
    x = 0
    for j in range(100, 178):
        x |= bit(s98, j) << _s3(j)
    for j in range(202, 265):
        x |= bit(s98, j) << _s3(j)
    for i in range(24):
        x |= (bit(s98, 178 + i) ^ b[176 - i]) << _s3(265 + i)
    for i in range(99, 177):
        x |= b[i] << _b3(i)
    return x


def _a3(i: int) -> AnfPoly:
    return AnfPoly.var(i) if 1 <= i <= 92 else ZERO


@functools.lru_cache(maxsize=1)
def case3_a_parametrization() -> tuple[dict[int, AnfPoly], dict[int, AnfPoly]]:
    """NFSR2/NFSR3 at time 98 and ``b99..b176`` as polynomials in ``a1..a92``.

    NFSR1 only reaches the other registers through ``a_{t+1}``, and it is
    silent from time 92 on, so NFSR2/3 are a function of ``a1..a92`` alone.
    """
    c = {j: ZERO for j in range(94, 289)}
    for j in (286, 287, 288):
        c[j] = ONE
    at98: dict[int, AnfPoly] = {}
    b: dict[int, AnfPoly] = {}
    for t in range(176):
        if t == CASE3_TIME:
            at98 = dict(c)
        bt = c[162] ^ (c[175] & c[176]) ^ c[177]
        if t >= CASE3_TIME:
            b[t + 1] = bt
        new = {94: _a3(t + 1) ^ c[171], 178: bt ^ c[264]}
        for j in range(95, 178):
            new[j] = c[j - 1]
        for j in range(179, 289):
            new[j] = c[j - 1]
        c = new
    return at98, b


@functools.lru_cache(maxsize=1)
def case3_a_polynomials() -> tuple[AnfPoly, ...]:
    s98, b = case3_a_parametrization()
    out = [s98[j] for j in range(100, 178)]
    out += [s98[j] for j in range(202, 265)]
    out += [s98[178 + i] ^ b[176 - i] for i in range(24)]
    out += [b[i] for i in range(99, 177)]
    return tuple(out)


@functools.lru_cache(maxsize=4)
def _case3_linearized(nrows: int) -> Linearized:
    return linearize(case3_rows(nrows), case3_a_polynomials())


def _case3_reduced(system: Gf2System, x: int) -> dict:
    """Re-solve for the 87 NFSR3 unknowns with NFSR2 and ``b`` fixed, then apply the zero block."""
    reg3 = [_s3(j) for j in range(202, 289)]
    rest = 0
    for i in range(system.nvars):
        if i not in reg3:
            rest |= 1 << i
    rows, consts = [], []
    for r, cst in zip(system.rows, system.consts):
        sub = 0
        for k, col in enumerate(reg3):
            if (r >> col) & 1:
                sub |= 1 << k
        rows.append(sub)
        consts.append(cst ^ (bin(r & rest & x).count("1") & 1))
    elim = EliminatedRows(rows, len(reg3))
    sols = elim.solve(consts)
    zero_rows = [1 << (j - 202) for j in CASE3_ZERO_BLOCK]
    both = EliminatedRows(rows + zero_rows, len(reg3))
    try:
        with_zero = both.solve(consts + [0] * len(zero_rows))
        after = 1 << with_zero.dimension
    except InconsistentSystemError:
        after = 0
    return {
        "reduced_rank": elim.rank,
        "reduced_candidates": 1 << sols.dimension,
        "zero_block_survivors": after,
    }


def solve_case3(ks: Sequence[int], nrows: int = CASE3_ROWS) -> tuple[ASequence, KeyKnowledge, SolveReport]:
    """``a1..a92`` from a Case 3 keystream, and the key bits they reveal."""
    system = build_case3_system(ks, nrows)
    elim = _eliminated(tuple(system.rows), system.nvars)
    try:
        elim.solve(system.consts)
    except InconsistentSystemError:
        raise AttackFailure("linear", "243-unknown system is inconsistent") from None
    lin = _case3_linearized(nrows)
    try:
        res = solve_linearized(lin, system.consts)
    except InconsistentSystemError:
        raise AttackFailure("linearized", "no a-sequence fits the keystream") from None
    if len(res.assignments) != 1:
        seqs = [tuple(s.get(i, 0) for i in range(1, 93)) for s in res.assignments]
        raise AttackFailure("filter", f"{len(seqs)} a-sequences survive the product checks", seqs)
    sol = res.assignments[0]
    a = ASequence(tuple(sol.get(i, 0) for i in range(1, 93)), 1, "case3")
    point = sum(1 << i for i in range(1, 93) if a[i])
    x = 0
    for k, poly in enumerate(case3_a_polynomials()):
        x |= poly.evaluate(point) << k
    if not system.satisfied_by(x):
        raise AttackFailure("check", "recovered a-sequence does not reproduce the keystream")
    report = SolveReport(
        rank_observed=elim.rank,
        nvars=system.nvars,
        candidates_before_filter=1 << (system.nvars - elim.rank),
        linearized_rank=lin.rank,
        linearized_nullity=lin.nullity,
        guess_variables=len(res.guess_variables),
        survivors=1,
        extra=_case3_reduced(system, x),
    )
    return a, case3_partial_key(a), report


def _branch_relations(a: ASequence, t: int, with93: bool) -> list[Relation]:
    rels = []
    for u in range(13, t - 26):
        p = kvar(66 - u) ^ (kvar(91 - u) & kvar(92 - u))
        if with93:
            p = p ^ kvar(93 - u)
        rels.append(Relation(p, a[u + 1], f"a{u + 1}"))
    for v in range(65, t - 1):
        p = kvar(91 - v) & kvar(92 - v)
        if with93:
            p = p ^ kvar(93 - v)
        rels.append(Relation(p, a[v + 1], f"a{v + 1}"))
    return rels


def case3_partial_key(a: ASequence) -> KeyKnowledge:
    """Key bits and relations certified by a Case 3 ``a`` sequence.

    ``a_{t+1} = 1`` for ``t <= 11`` rules out a fault in ``66-t..66``, which
    makes ``a1..a_{t+1}`` a straight read of ``k66..k_{66-t}``.  A 1 at
    ``67 <= t <= 91`` rules out faults in ``93-t..92`` and yields two
    alternative relation sets, depending on whether cell 93 is faulted.
    """
    if a.context != "case3" or a.first != 1 or a.last < 92:
        raise ValueError("expected a Case 3 sequence a1..a92")
    kk = KeyKnowledge()
    early = [t for t in range(12) if a[t + 1]]
    late = [t for t in range(67, 92) if a[t + 1]]
    if early:
        t = max(early)
        for i in range(t + 1):
            kk.learn(66 - i, a[i + 1], f"a{i + 1} with a{t + 1} = 1")
    if late:
        t = max(late)
        for i in range(12):
            kk.learn(66 - i, a[i + 1], f"a{i + 1} with a{t + 1} = 1")
        kk.relations.append(Relation(kvar(54) ^ (kvar(79) & kvar(80)), a[13], "a13"))
        kk.alternatives.append([_branch_relations(a, t, True), _branch_relations(a, t, False)])
    if not early and not late:
        kk.diagnostics.append("no trigger: a_{t+1} = 0 for t <= 11 and 67 <= t <= 91")
    return kk


# -- Cases 4 to 6 ------------------------------------------------------------


@dataclass(frozen=True)
class StructuralReport:
    case: CaseLabel
    width: int
    reversible: bool
    degree_profile: dict[str, tuple[int, int | None]]
    iv_invariant_bits: tuple[int, ...]
    notes: tuple[str, ...] = ()

    def to_dict(self) -> dict:
        return {
            "case": self.case.value,
            "width": self.width,
            "reversible": self.reversible,
            "degree_profile": {k: list(v) for k, v in self.degree_profile.items()},
            "iv_invariant_bits": list(self.iv_invariant_bits),
            "notes": list(self.notes),
        }


_SLOW_PROFILE = {"linear": (0, 65), "quadratic": (66, 159), "cubic": (160, 228), "quartic_or_more": (229, None)}

_STRUCTURE = {
    CaseLabel.CASE4: (Variant.CASE4, True, _SLOW_PROFILE, (70,), ()),
    CaseLabel.CASE5: (
        Variant.CASE5,
        True,
        _SLOW_PROFILE,
        (79,),
        (
            "valid from time m + 9, m <= 5 the first time (s176, s177) stays (0, 0)",
            "k1..k79 read from the reduced state at time 14; k80 too when m < 5",
        ),
    ),
    CaseLabel.CASE6: (Variant.CASE6, False, {}, (79, 80), ("renewal is not invertible",)),
}


def structural_report(case: CaseLabel) -> StructuralReport:
    if case not in _STRUCTURE:
        raise ValueError(f"no structural report for {case}")
    variant, reversible, profile, ivs, notes = _STRUCTURE[case]
    return StructuralReport(case, len(live_positions(variant)), reversible, dict(profile), ivs, notes)
