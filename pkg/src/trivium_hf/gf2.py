"""Dense GF(2) linear algebra on int bitsets, and exact ANF polynomials.

Rows and vectors are plain Python ints: bit ``i`` holds the coefficient of
variable ``i``.  Python's arbitrary precision ints give word-packed XOR for
free, which is all the elimination needs at the sizes used here (a few
thousand rows by a few hundred columns).
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Sequence

import numpy as np

MONOMIAL_CAP = 1 << 22


class InconsistentSystemError(ValueError):
    """Raised when a linear system has no solution."""


class SolutionSpaceTooLarge(ValueError):
    def __init__(self, dimension: int, cap: int):
        super().__init__(f"solution space has 2^{dimension} elements, cap is {cap}")
        self.dimension = dimension
        self.cap = cap


class MonomialCapExceeded(MemoryError):
    def __init__(self, size: int, cap: int, where: str = ""):
        msg = f"polynomial exceeds monomial cap ({size} > {cap})"
        if where:
            msg += f" at {where}"
        super().__init__(msg)
        self.size = size
        self.cap = cap
        self.where = where


def parity(x: int) -> int:
    return x.bit_count() & 1


def bits_to_int(bits: Iterable[int]) -> int:
    """Pack an iterable of 0/1 values, first element at bit 0."""
    out = 0
    for i, b in enumerate(bits):
        if b:
            out |= 1 << i
    return out


def int_to_bits(x: int, width: int) -> list[int]:
    return [(x >> i) & 1 for i in range(width)]


@dataclass
class Gf2System:
    """Linear system ``rows[i] . x = consts[i]`` over named variables."""

    names: list[str]
    rows: list[int] = field(default_factory=list)
    consts: list[int] = field(default_factory=list)

    def __post_init__(self) -> None:
        if len(set(self.names)) != len(self.names):
            raise ValueError("variable names must be unique")
        if len(self.rows) != len(self.consts):
            raise ValueError("rows and consts differ in length")
        limit = 1 << len(self.names)
        if any(r < 0 or r >= limit for r in self.rows):
            raise ValueError("row wider than the variable list")

    @property
    def nvars(self) -> int:
        return len(self.names)

    def __len__(self) -> int:
        return len(self.rows)

    def add_row(self, row: int, const: int) -> None:
        if row >> self.nvars:
            raise ValueError("row wider than the variable list")
        self.rows.append(row)
        self.consts.append(const & 1)

    def index(self, name: str) -> int:
        return self.names.index(name)

    def satisfied_by(self, x: int) -> bool:
        return all(parity(r & x) == c for r, c in zip(self.rows, self.consts))

    def with_consts(self, consts: Sequence[int]) -> "Gf2System":
        return Gf2System(list(self.names), list(self.rows), [c & 1 for c in consts])

    def dumps(self) -> str:
        """Golden-file text form: names header, then ``bits|const`` per row."""
        n = self.nvars
        lines = [" ".join(self.names)]
        for r, c in zip(self.rows, self.consts):
            lines.append("".join("1" if (r >> i) & 1 else "0" for i in range(n)) + f"|{c}")
        return "\n".join(lines) + "\n"

    @classmethod
    def loads(cls, text: str) -> "Gf2System":
        lines = [ln for ln in text.splitlines() if ln.strip()]
        if not lines:
            raise ValueError("empty system dump")
        names = lines[0].split()
        rows, consts = [], []
        for ln in lines[1:]:
            bits, _, const = ln.partition("|")
            if len(bits) != len(names) or const not in ("0", "1"):
                raise ValueError(f"malformed row: {ln!r}")
            rows.append(bits_to_int(int(ch) for ch in bits))
            consts.append(int(const))
        return cls(names, rows, consts)


@dataclass(frozen=True)
class AffineSolutionSet:
    """``{particular + span(basis)}``; dimension is ``nvars - rank``."""

    nvars: int
    particular: int
    basis: tuple[int, ...]
    rank: int

    @property
    def dimension(self) -> int:
        return len(self.basis)

    def __len__(self) -> int:
        return 1 << len(self.basis)

    def contains(self, x: int) -> bool:
        return gf2_rank([*self.basis, x ^ self.particular]) == len(self.basis)


class EliminatedRows:
    """Row-reduced form of a coefficient matrix, reusable for many right-hand sides.

    Tracks, for each pivot and each dependent row, which original rows were
    combined, so a new constant vector is solved with a handful of parity
    operations instead of a fresh elimination.
    """

    def __init__(self, rows: Sequence[int], nvars: int):
        self.nvars = nvars
        self.nrows = len(rows)
        pivots: dict[int, tuple[int, int]] = {}  # leading column -> (row, combination)
        dependent: list[int] = []  # combinations that reduce to the zero row
        for i, row in enumerate(rows):
            comb = 1 << i
            while row:
                lead = row.bit_length() - 1
                hit = pivots.get(lead)
                if hit is None:
                    pivots[lead] = (row, comb)
                    break
                row ^= hit[0]
                comb ^= hit[1]
            else:
                dependent.append(comb)
        # back substitution, smallest pivot columns first; a reduced pivot row
        # carries no other pivot column, so one pass per row suffices
        for col in sorted(pivots):
            row, comb = pivots[col]
            low = row & ((1 << col) - 1)
            while low:
                c = low.bit_length() - 1
                low ^= 1 << c
                hit = pivots.get(c)
                if hit is not None:
                    row ^= hit[0]
                    comb ^= hit[1]
            pivots[col] = (row, comb)
        self.pivots = pivots
        self.dependent = dependent
        self.free = [c for c in range(nvars) if c not in pivots]

    @property
    def rank(self) -> int:
        return len(self.pivots)

    def solve(self, consts: Sequence[int] | int) -> AffineSolutionSet:
        cvec = consts if isinstance(consts, int) else bits_to_int(consts)
        for comb in self.dependent:
            if parity(comb & cvec):
                raise InconsistentSystemError("system is inconsistent")
        x = 0
        for col, (_, comb) in self.pivots.items():
            if parity(comb & cvec):
                x |= 1 << col
        basis = []
        for f in self.free:
            v = 1 << f
            for col, (row, _) in self.pivots.items():
                if (row >> f) & 1:
                    v |= 1 << col
            basis.append(v)
        return AffineSolutionSet(self.nvars, x, tuple(basis), self.rank)


def gf2_rank(rows: Iterable[int]) -> int:
    pivots: dict[int, int] = {}
    for row in rows:
        while row:
            lead = row.bit_length() - 1
            p = pivots.get(lead)
            if p is None:
                pivots[lead] = row
                break
            row ^= p
    return len(pivots)


def gaussian_eliminate(system: Gf2System) -> AffineSolutionSet:
    """Solve ``system``; raises :class:`InconsistentSystemError` if it has no solution."""
    return EliminatedRows(system.rows, system.nvars).solve(system.consts)


def enumerate_solutions(sols: AffineSolutionSet, cap: int = 1 << 16) -> list[int]:
    """All members of ``sols`` in Gray-code order."""
    if len(sols.basis) >= 63 or (1 << len(sols.basis)) > cap:
        raise SolutionSpaceTooLarge(len(sols.basis), cap)
    out = [sols.particular]
    x = sols.particular
    for i in range(1, 1 << len(sols.basis)):
        x ^= sols.basis[(i & -i).bit_length() - 1]
        out.append(x)
    return out


def solution_array(sols: AffineSolutionSet, cap: int = 1 << 20) -> np.ndarray:
    """All solutions as a ``(2^d, nvars)`` uint8 array (vectorised filtering)."""
    d = len(sols.basis)
    if d >= 63 or (1 << d) > cap:
        raise SolutionSpaceTooLarge(d, cap)
    n = sols.nvars
    base = np.array(int_to_bits(sols.particular, n), dtype=np.uint8)
    if d == 0:
        return base[None, :]
    basis = np.array([int_to_bits(b, n) for b in sols.basis], dtype=np.uint8)
    coeff = ((np.arange(1 << d)[:, None] >> np.arange(d)) & 1).astype(np.uint8)
    # XOR-combine basis rows: popcount parity through an integer matmul
    combo = (coeff.astype(np.int32) @ basis.astype(np.int32)) & 1
    return combo.astype(np.uint8) ^ base


class AnfPoly:
    """Boolean polynomial in algebraic normal form.

    ``terms`` is a frozenset of monomials; a monomial is an int whose set bits
    are the variable indices it multiplies.  ``0`` is the constant-1 monomial.
    """

    __slots__ = ("terms",)

    def __init__(self, terms: Iterable[int] = ()):
        object.__setattr__(self, "terms", frozenset(terms))

    def __setattr__(self, name, value):
        raise AttributeError("AnfPoly is immutable")

    @classmethod
    def var(cls, i: int) -> "AnfPoly":
        return cls((1 << i,))

    @classmethod
    def const(cls, c: int) -> "AnfPoly":
        return ONE if c & 1 else ZERO

    def __eq__(self, other) -> bool:
        if isinstance(other, int):
            other = AnfPoly.const(other) if other in (0, 1) else None
        return isinstance(other, AnfPoly) and self.terms == other.terms

    def __hash__(self) -> int:
        return hash(self.terms)

    def __bool__(self) -> bool:
        return bool(self.terms)

    def __len__(self) -> int:
        return len(self.terms)

    def __xor__(self, other) -> "AnfPoly":
        if isinstance(other, int):
            other = AnfPoly.const(other)
        return AnfPoly(self.terms ^ other.terms)

    __rxor__ = __xor__
    __add__ = __xor__
    __radd__ = __xor__

    def __and__(self, other) -> "AnfPoly":
        return anf_mul(self, other)

    __rand__ = __and__
    __mul__ = __and__
    __rmul__ = __and__

    def degree(self) -> int:
        return max((m.bit_count() for m in self.terms), default=-1)

    def constant_term(self) -> int:
        return int(0 in self.terms)

    def variables(self) -> int:
        out = 0
        for m in self.terms:
            out |= m
        return out

    def evaluate(self, point: int) -> int:
        """Value at the assignment whose set bits are the true variables."""
        acc = 0
        for m in self.terms:
            if m & point == m:
                acc ^= 1
        return acc

    def substitute(self, values: Sequence["AnfPoly"], cap: int | None = None) -> "AnfPoly":
        """Compose: replace variable ``i`` by ``values[i]``."""
        out = ZERO
        for m in self.terms:
            term = ONE
            while m:
                i = (m & -m).bit_length() - 1
                m &= m - 1
                term = anf_mul(term, values[i], cap)
            out = out ^ term
        return out

    def format(self, names: Sequence[str] | None = None, times: str = "*") -> str:
        if not self.terms:
            return "0"

        def mono(m: int) -> str:
            if m == 0:
                return "1"
            idx = [i for i in range(m.bit_length()) if (m >> i) & 1]
            return times.join(names[i] if names else f"x{i}" for i in idx)

        ordered = sorted(self.terms, key=lambda m: (m.bit_count(), [i for i in range(m.bit_length()) if (m >> i) & 1]))
        return " + ".join(mono(m) for m in ordered)

    def __repr__(self) -> str:
        return f"AnfPoly({self.format()})"


ZERO = AnfPoly()
ONE = AnfPoly((0,))


def anf_add(a: AnfPoly, b: AnfPoly) -> AnfPoly:
    return AnfPoly(a.terms ^ b.terms)


def anf_mul(a: AnfPoly, b: AnfPoly, cap: int | None = None) -> AnfPoly:
    cap = MONOMIAL_CAP if cap is None else cap
    if isinstance(b, int):
        b = AnfPoly.const(b)
    if not a.terms or not b.terms:
        return ZERO
    if a.terms == ONE.terms:
        return b
    if b.terms == ONE.terms:
        return a
    small, big = (a.terms, b.terms) if len(a.terms) <= len(b.terms) else (b.terms, a.terms)
    out: set[int] = set()
    for x in small:
        counts = Counter(x | y for y in big)
        out.symmetric_difference_update(m for m, k in counts.items() if k & 1)
        if len(out) > cap:
            raise MonomialCapExceeded(len(out), cap)
    return AnfPoly(out)


def anf_degree(a: AnfPoly) -> int:
    return a.degree()


def truth_table(poly: AnfPoly, nvars: int) -> list[int]:
    return [poly.evaluate(x) for x in range(1 << nvars)]


def moebius_coefficient(f, monomial: int) -> int:
    """ANF coefficient of ``monomial`` for a black-box ``f(point) -> bit``.

    XOR of ``f`` over the subcube spanned by the monomial's variables, other
    variables held at 0: ``2^deg`` evaluations.
    """
    idx = [i for i in range(monomial.bit_length()) if (monomial >> i) & 1]
    acc = 0
    for mask in range(1 << len(idx)):
        point = 0
        for j, i in enumerate(idx):
            if (mask >> j) & 1:
                point |= 1 << i
        acc ^= f(point) & 1
    return acc


def iter_gray(basis: Sequence[int], start: int = 0) -> Iterator[int]:
    x = start
    yield x
    for i in range(1, 1 << len(basis)):
        x ^= basis[(i & -i).bit_length() - 1]
        yield x
