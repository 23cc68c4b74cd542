"""Linearization of polynomial systems whose unknowns are themselves low-degree polynomials.

A linear system over intermediate unknowns ``x_i`` is rewritten through
``x_i = f_i(u)``, with ``u`` the base variables, into a system over the
monomials of ``u``.  After elimination, the free linear monomials become
guess variables; every other column is then a polynomial in those guesses and
must agree with the product of the linear values it names.  The remaining
search runs over all guesses at once with numpy.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .gf2 import ONE, ZERO, AnfPoly, EliminatedRows, InconsistentSystemError

GUESS_CAP = 26
_CHUNK = 1 << 18


class LinearizationError(ValueError):
    pass


def _variables(m: int) -> list[int]:
    out = []
    while m:
        low = m & -m
        out.append(low.bit_length() - 1)
        m ^= low
    return out


@dataclass
class Linearized:
    """Monomial-space coefficient matrix, reduced once, reusable per right-hand side."""

    monomials: list[int]
    column: dict[int, int]
    rows: list[int]
    consts: list[int]
    elim: EliminatedRows

    @property
    def rank(self) -> int:
        return self.elim.rank

    @property
    def nullity(self) -> int:
        return len(self.elim.free)


def linearize(rows: Sequence[int], values: Sequence[AnfPoly]) -> Linearized:
    """Substitute ``x_i = values[i]`` into ``rows`` (bit ``i`` of a row selects ``x_i``)."""
    mons: set[int] = set()
    for p in values:
        mons |= p.terms
    mons.discard(0)
    # every variable that appears gets its own linear column
    for m in list(mons):
        for v in _variables(m):
            mons.add(1 << v)
    order = sorted(mons, key=lambda m: (m.bit_count(), m))
    column = {m: i for i, m in enumerate(order)}
    packed = []
    for p in values:
        r, c = 0, 0
        for m in p.terms:
            if m == 0:
                c ^= 1
            else:
                r ^= 1 << column[m]
        packed.append((r, c))
    out_rows, out_consts = [], []
    for row in rows:
        r = c = 0
        for i in _variables(row):
            r ^= packed[i][0]
            c ^= packed[i][1]
        out_rows.append(r)
        out_consts.append(c)
    return Linearized(order, column, out_rows, out_consts, EliminatedRows(out_rows, len(order)))


@dataclass
class LinearizedSolution:
    """Outcome of :func:`solve_linearized`."""

    assignments: list[dict[int, int]]
    guess_variables: list[int]
    nullity: int
    constraints: int


def solve_linearized(lin: Linearized, rhs: Sequence[int], guess_cap: int = GUESS_CAP) -> LinearizedSolution:
    """All base-variable assignments consistent with the linear system and the monomial products."""
    target = [(b ^ c) & 1 for b, c in zip(rhs, lin.consts, strict=True)]
    sol = lin.elim.solve(target)
    free = set(lin.elim.free)
    mons = lin.monomials

    guesses = sorted(mons[c].bit_length() - 1 for c in free if mons[c].bit_count() == 1)
    if len(guesses) > guess_cap:
        raise LinearizationError(f"{len(guesses)} guess variables exceed the cap {guess_cap}")

    def affine(c: int, param: dict[int, AnfPoly]) -> AnfPoly:
        if c in free:
            return param[c]
        row = lin.elim.pivots[c][0]
        acc = ONE if (sol.particular >> c) & 1 else ZERO
        for f in _variables(row & ~(1 << c)):
            acc = acc ^ param[f]
        return acc

    # linear values in terms of the guesses only
    param: dict[int, AnfPoly] = {}
    for v in guesses:
        param[lin.column[1 << v]] = AnfPoly.var(v)
    linear: dict[int, AnfPoly] = {}
    for m in mons:
        if m.bit_count() != 1:
            continue
        c = lin.column[m]
        if c not in free:
            row = lin.elim.pivots[c][0] & ~(1 << c)
            if any(mons[f].bit_count() > 1 for f in _variables(row)):
                raise LinearizationError("a linear unknown depends on a free product column")
        linear[m.bit_length() - 1] = affine(c, param)

    def product(m: int) -> AnfPoly:
        acc = ONE
        for v in _variables(m):
            acc = acc & linear[v]
        return acc

    for c in free:
        if mons[c].bit_count() > 1:
            param[c] = product(mons[c])
    constraints = []
    for c, m in enumerate(mons):
        if m.bit_count() > 1 and c not in free:
            eq = affine(c, param) ^ product(m)
            if eq == ONE:
                raise InconsistentSystemError("monomial constraint reduces to 1 = 0")
            if eq:
                constraints.append(eq)
    constraints.sort(key=len)

    points = _exhaust(guesses, constraints)
    out = []
    for pt in points:
        out.append({v: p.evaluate(pt) for v, p in linear.items()})
    return LinearizedSolution(out, guesses, lin.nullity, len(constraints))


def _exhaust(guesses: list[int], constraints: list[AnfPoly]) -> list[int]:
    """Points (ints with bit ``v`` = value of variable ``v``) satisfying every constraint."""
    n = len(guesses)
    total = 1 << n
    found: list[int] = []
    for start in range(0, total, _CHUNK):
        idx = np.arange(start, min(total, start + _CHUNK), dtype=np.int64)
        cols = {v: ((idx >> k) & 1).astype(bool) for k, v in enumerate(guesses)}
        for eq in constraints:
            val = np.zeros(len(idx), dtype=bool)
            for m in eq.terms:
                if m == 0:
                    val ^= True
                    continue
                vs = _variables(m)
                term = cols[vs[0]]
                for v in vs[1:]:
                    term = term & cols[v]
                val ^= term
            keep = ~val
            if not keep.all():
                idx = idx[keep]
                cols = {v: a[keep] for v, a in cols.items()}
                if len(idx) == 0:
                    break
        for i in idx.tolist():
            pt = 0
            for k, v in enumerate(guesses):
                if (i >> k) & 1:
                    pt |= 1 << v
            found.append(pt)
    return found
