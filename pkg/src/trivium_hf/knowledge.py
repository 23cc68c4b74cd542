"""Partial key knowledge produced by the attacks."""

from __future__ import annotations

from dataclasses import dataclass, field

from .gf2 import AnfPoly

KEY_NAMES = ["1"] + [f"k{i}" for i in range(1, 81)]


def kvar(i: int) -> AnfPoly:
    """Key bit ``k_i`` as a polynomial (variable index ``i``)."""
    if not 1 <= i <= 80:
        raise ValueError(f"key index {i} outside 1..80")
    return AnfPoly.var(i)


def key_point(key) -> int:
    """Assignment int for :meth:`AnfPoly.evaluate`: bit ``i`` is ``k_i``."""
    out = 0
    for i in range(1, 81):
        if key.bit(i):
            out |= 1 << i
    return out


@dataclass(frozen=True)
class Relation:
    """Boolean equation ``poly(k) = value`` over key bits."""

    poly: AnfPoly
    value: int
    label: str = ""

    def holds(self, key) -> bool:
        return self.poly.evaluate(key_point(key)) == self.value

    def __str__(self) -> str:
        text = f"{self.poly.format(KEY_NAMES)} = {self.value}"
        return f"{self.label}: {text}" if self.label else text


@dataclass
class KeyKnowledge:
    """What an attack learned about ``k1..k80``.

    ``known`` holds certified bits.  ``relations`` must all hold.  Each entry
    of ``alternatives`` is a list of relation groups of which at least one
    holds in full.  ``candidates``, when set, lists assignments (index -> bit)
    one of which is the true restriction of the key to those indices.
    """

    known: dict[int, int] = field(default_factory=dict)
    relations: list[Relation] = field(default_factory=list)
    alternatives: list[list[list[Relation]]] = field(default_factory=list)
    candidates: list[dict[int, int]] | None = None
    provenance: dict[int, str] = field(default_factory=dict)
    diagnostics: list[str] = field(default_factory=list)

    def learn(self, index: int, bit: int, why: str) -> None:
        if not 1 <= index <= 80:
            raise ValueError(f"key index {index} outside 1..80")
        prev = self.known.get(index)
        if prev is not None and prev != bit & 1:
            raise ValueError(f"conflicting values for k{index}")
        self.known[index] = bit & 1
        self.provenance.setdefault(index, why)

    @property
    def n_known(self) -> int:
        return len(self.known)

    def is_full(self) -> bool:
        return len(self.known) == 80

    def mask_int(self) -> int:
        """80-bit int, k1 as MSB, set where the bit is known."""
        out = 0
        for i in self.known:
            out |= 1 << (80 - i)
        return out

    def value_int(self) -> int:
        out = 0
        for i, b in self.known.items():
            if b:
                out |= 1 << (80 - i)
        return out

    def recovered_hex(self) -> tuple[str, str]:
        """``(value, mask)`` hex pair; unknown bits read 0 in ``value``."""
        return f"{self.value_int():020x}", f"{self.mask_int():020x}"

    def consistent_with(self, key) -> bool:
        if any(key.bit(i) != b for i, b in self.known.items()):
            return False
        if not all(r.holds(key) for r in self.relations):
            return False
        for groups in self.alternatives:
            if not any(all(r.holds(key) for r in g) for g in groups):
                return False
        if self.candidates is not None:
            if not any(all(key.bit(i) == b for i, b in c.items()) for c in self.candidates):
                return False
        return True

    def to_dict(self) -> dict:
        value, mask = self.recovered_hex()
        out = {
            "recovered_bits": value,
            "known_mask": mask,
            "n_known": self.n_known,
            "residual_relations": [str(r) for r in self.relations],
            "alternatives": [[[str(r) for r in g] for g in groups] for groups in self.alternatives],
        }
        if self.candidates is not None:
            out["candidates"] = [
                "".join(str(c[i]) for i in sorted(c)) for c in self.candidates
            ]
        return out
