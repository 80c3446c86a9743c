"""The partition-indexed algebra with basis L_{n,Λ} and a central element.

Bracket (``variant="corrected"``):

    [L_{n,Λ}, L_{m,Λ'}] = (n-m) L_{n+m, Λ∪Λ'}
                        + Σ_i Λ_i  L_{n, Λ∪Λ'∪(Λ_i+m)∖Λ_i}
                        - Σ_j Λ'_j L_{m, Λ∪Λ'∪(Λ'_j+n)∖Λ'_j}
                        + (c/12) (g+1) g (g-1) δ_{g+g',0},   g = n+|Λ|, g' = m+|Λ'|

``variant="printed"`` uses ``+`` on the third sum; that version is not
antisymmetric and is kept to reproduce its failure.

The central coefficient is stored as the coefficient of ``c`` (symbolic), or as
a plain number when a rational ``c`` is supplied.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping

from .exactcore import GeneralizedPartition, format_rational
from .report import Report

PRINTED = "printed"
CORRECTED = "corrected"
VARIANTS = (PRINTED, CORRECTED)

Basis = tuple  # (n, parts) with parts weakly increasing


@dataclass(frozen=True, order=True)
class LBasis:
    n: int
    Lam: GeneralizedPartition = GeneralizedPartition()

    @classmethod
    def of(cls, n: int, parts: Iterable[int] = ()) -> "LBasis":
        return cls(n, GeneralizedPartition(parts))

    @property
    def grade(self) -> int:
        return self.n + self.Lam.weight

    def raw(self) -> Basis:
        return (self.n, self.Lam.parts)

    def __str__(self) -> str:
        return f"({self.n},{self.Lam})"

    def to_json(self) -> list:
        return [self.n, list(self.Lam.parts)]


def _basis(raw: Basis) -> LBasis:
    return LBasis(raw[0], GeneralizedPartition(raw[1]))


class LElement:
    """Finitely supported ``LBasis -> Fraction`` plus a central coefficient."""

    __slots__ = ("_terms", "central")

    def __init__(self, terms: Mapping[LBasis, Fraction] | None = None, central=0):
        self._terms = {b: Fraction(c) for b, c in (terms or {}).items() if c}
        self.central = Fraction(central)

    @classmethod
    def basis(cls, n: int, parts: Iterable[int] = ()) -> "LElement":
        return cls({LBasis.of(n, parts): 1})

    @classmethod
    def _from_raw(cls, terms: Mapping[Basis, Fraction], central=0) -> "LElement":
        return cls({_basis(b): c for b, c in terms.items()}, central)

    def items(self):
        return sorted(self._terms.items())

    def coefficient(self, b: LBasis) -> Fraction:
        return self._terms.get(b, Fraction(0))

    def is_zero(self) -> bool:
        return not self._terms and not self.central

    def __add__(self, other: "LElement") -> "LElement":
        out = dict(self._terms)
        for b, c in other._terms.items():
            out[b] = out.get(b, 0) + c
        return LElement(out, self.central + other.central)

    def __neg__(self) -> "LElement":
        return LElement({b: -c for b, c in self._terms.items()}, -self.central)

    def __sub__(self, other: "LElement") -> "LElement":
        return self + (-other)

    def scale(self, c) -> "LElement":
        c = Fraction(c)
        return LElement({b: v * c for b, v in self._terms.items()}, self.central * c)

    def __eq__(self, other) -> bool:
        if not isinstance(other, LElement):
            return NotImplemented
        return self._terms == other._terms and self.central == other.central

    def __hash__(self):
        return hash((frozenset(self._terms.items()), self.central))

    def __str__(self) -> str:
        parts = [f"{format_rational(c)}*L{b}" for b, c in self.items()]
        if self.central:
            parts.append(f"{format_rational(self.central)}*c")
        return " + ".join(parts) if parts else "0"

    __repr__ = __str__

    def to_json(self) -> dict:
        return {
            "terms": [{"n": b.n, "Lambda": list(b.Lam.parts), "coeff": format_rational(c)}
                      for b, c in self.items()],
            "central": format_rational(self.central),
        }

    @classmethod
    def from_json(cls, data: Mapping) -> "LElement":
        return cls({LBasis.of(t["n"], t["Lambda"]): Fraction(t["coeff"]) for t in data["terms"]},
                   Fraction(data.get("central", "0")))


def _remove_one(parts: tuple, value: int) -> list:
    out = list(parts)
    out.remove(value)
    return out


def cocycle(grade: int) -> Fraction:
    """(g+1) g (g-1) / 12."""
    return Fraction((grade + 1) * grade * (grade - 1), 12)


_TABLES: dict[str, dict] = {PRINTED: {}, CORRECTED: {}}


def _bracket_int(x: Basis, y: Basis, variant: str) -> tuple[tuple[tuple[Basis, int], ...], int]:
    """Basis bracket with integer structure constants; central part returned as 12*coefficient."""
    table = _TABLES[variant]
    hit = table.get((x, y))
    if hit is not None:
        return hit
    n, lam = x
    m, lam2 = y
    both = lam + lam2
    out: dict[Basis, int] = {}

    def add(mode, parts, c):
        if c:
            b = (mode, tuple(sorted(parts)))
            out[b] = out.get(b, 0) + c

    add(n + m, both, n - m)
    for part in lam:
        add(n, _remove_one(both, part) + [part + m], part)
    sign = -1 if variant == CORRECTED else 1
    for part in lam2:
        add(m, _remove_one(both, part) + [part + n], sign * part)
    g, g2 = n + sum(lam), m + sum(lam2)
    central12 = (g + 1) * g * (g - 1) if g + g2 == 0 else 0
    hit = (tuple(sorted((b, c) for b, c in out.items() if c)), central12)
    table[(x, y)] = hit
    return hit


def _basis_bracket(x: Basis, y: Basis, variant: str) -> tuple[tuple[tuple[Basis, Fraction], ...], Fraction]:
    terms, central12 = _bracket_int(x, y, variant)
    return tuple((b, Fraction(c)) for b, c in terms), Fraction(central12, 12)


def l_bracket(x: LElement, y: LElement, variant: str = CORRECTED, c: Fraction | None = None) -> LElement:
    """Bilinear bracket; the central element brackets to zero with everything."""
    if variant not in VARIANTS:
        raise ValueError(f"unknown variant {variant!r}")
    scale_c = Fraction(1) if c is None else Fraction(c)
    out: dict[Basis, Fraction] = {}
    central = Fraction(0)
    for bx, cx in x._terms.items():
        for by, cy in y._terms.items():
            terms, cen = _basis_bracket(bx.raw(), by.raw(), variant)
            for b, v in terms:
                out[b] = out.get(b, 0) + cx * cy * v
            central += cx * cy * cen * scale_c
    return LElement._from_raw(out, central)


# ---------------------------------------------------------------------------
# windows and scans


def _zkey(z: int) -> tuple[int, bool]:
    return (abs(z), z < 0)


def basis_order_key(b: Basis):
    n, parts = b
    return (abs(n) + sum(abs(p) for p in parts), len(parts), _zkey(n), tuple(_zkey(p) for p in parts))


@dataclass(frozen=True)
class LWindow:
    """Basis elements with mode in [mode_min, mode_max], parts in [part_min, part_max], length <= max_length."""

    mode_min: int = -3
    mode_max: int = 3
    part_min: int = -2
    part_max: int = 2
    max_length: int = 2

    def elements(self) -> list[Basis]:
        parts_lists = [()]
        for length in range(1, self.max_length + 1):
            parts_lists += list(itertools.combinations_with_replacement(
                range(self.part_min, self.part_max + 1), length))
        out = [(n, p) for n in range(self.mode_min, self.mode_max + 1) for p in parts_lists]
        out.sort(key=basis_order_key)
        return out

    def to_json(self) -> dict:
        return {"modes": [self.mode_min, self.mode_max], "parts": [self.part_min, self.part_max],
                "length": self.max_length}


def _case(*xs: Basis) -> list:
    return [[x[0], list(x[1])] for x in xs]


def _residual(acc: dict, central: Fraction) -> LElement:
    return LElement._from_raw({b: v for b, v in acc.items() if v}, central)


def antisymmetry_scan(window: LWindow = LWindow(), variant: str = CORRECTED) -> Report:
    """Check [x,y] = -[y,x] over every pair (diagonal included), x after y in basis order."""
    elems = window.elements()
    report = Report("lie-l-antisym", {"variant": variant}, window)
    for i, x in enumerate(elems):
        for y in elems[: i + 1]:
            t1, c1 = _bracket_int(x, y, variant)
            t2, c2 = _bracket_int(y, x, variant)
            report.checked += 1
            acc: dict = {}
            for b, v in t1 + t2:
                acc[b] = acc.get(b, 0) + v
            if any(acc.values()) or c1 + c2:
                report.counterexamples.append(
                    {"case": _case(x, y), "residual": _residual(acc, Fraction(c1 + c2, 12))})
    report.details["variant"] = variant
    return report


def _jacobi_acc(x: Basis, y: Basis, z: Basis, variant: str) -> tuple[dict, int]:
    table = _TABLES[variant]
    acc: dict = {}
    central12 = 0
    for a, b, cc in ((x, y, z), (y, z, x), (z, x, y)):
        inner = table.get((b, cc)) or _bracket_int(b, cc, variant)
        for bb, v in inner[0]:
            outer = table.get((a, bb)) or _bracket_int(a, bb, variant)
            for t, w in outer[0]:
                acc[t] = acc.get(t, 0) + v * w
            central12 += v * outer[1]
    return acc, central12


def jacobi_residual(x: Basis, y: Basis, z: Basis, variant: str = CORRECTED) -> LElement:
    """[x,[y,z]] + [y,[z,x]] + [z,[x,y]] (central brackets vanish, so inner centrals drop)."""
    acc, central12 = _jacobi_acc(x, y, z, variant)
    return _residual(acc, Fraction(central12, 12))


def jacobi_scan(window: LWindow = LWindow(), variant: str = CORRECTED, all_orders: bool = False,
                max_examples: int | None = None) -> Report:
    """Cyclic-sum residual over basis triples.

    By default triples are taken as multisets (i <= j <= k); with antisymmetry
    that covers every ordering.  ``all_orders=True`` scans the two cyclic
    classes of every multiset, so no appeal to antisymmetry is made.
    """
    elems = window.elements()
    report = Report("lie-l-jacobi", {"variant": variant, "all_orders": all_orders}, window)
    failures = 0
    for i, j, k in itertools.combinations_with_replacement(range(len(elems)), 3):
        orders = [(i, j, k)]
        if all_orders and len({i, j, k}) == 3:
            orders.append((i, k, j))
        for a, b, cc in orders:
            acc, central12 = _jacobi_acc(elems[a], elems[b], elems[cc], variant)
            report.checked += 1
            if central12 or any(acc.values()):
                failures += 1
                if max_examples is None or len(report.counterexamples) < max_examples:
                    report.counterexamples.append({
                        "case": _case(elems[a], elems[b], elems[cc]),
                        "residual": _residual(acc, Fraction(central12, 12)),
                    })
    if failures > len(report.counterexamples):
        report.details["failures"] = failures
    return report


def closure_scan(mode_max: int = 3, part_max: int = 3, max_length: int = 2, part_min: int = 0,
                 variant: str = CORRECTED) -> Report:
    """Brackets of {L_{n,Λ}: n >= -1, parts >= part_min} must stay in that set.

    Zero-coefficient terms are discarded before the membership test.  Any firing
    of the central term inside the region is also reported.
    """
    window = LWindow(-1, mode_max, part_min, part_max, max_length)
    elems = window.elements()
    report = Report("lie-l-closure", {"variant": variant, "part_min": part_min}, window)
    fired = 0
    for x in elems:
        for y in elems:
            terms, central = _basis_bracket(x, y, variant)
            report.checked += 1
            outside = [b for b, _ in terms if b[0] < -1 or any(p < part_min for p in b[1])]
            if central:
                fired += 1
            if outside or central:
                report.counterexamples.append({
                    "case": _case(x, y),
                    "outside": _case(*outside),
                    "central": format_rational(central),
                })
    report.details["central_fired"] = fired
    return report


def consistency_with_operators(n: int, lam, m: int, mu, window=(6, 3)) -> Report:
    """Compare corrected-bracket structure constants with the operator bracket.

    Both the coefficient table and the action of the realized right-hand side
    (against the direct commutator of constraint operators) are checked.
    """
    from .constraints import generalized_bracket_terms, verify_generalized_bracket
    from .weyl import GeneralizedConstraint, Sum, apply, commutator_action
    from .exactcore import IndexMultiset, NLaurent
    from .report import window_check

    abstract = l_bracket(LElement.basis(n, lam), LElement.basis(m, mu), CORRECTED)
    abstract_terms = {(b.n, b.Lam.parts): c for b, c in abstract.items()}
    operator_terms = {(mode, parts.parts): Fraction(c)
                      for (mode, parts), c in generalized_bracket_terms(n, lam, m, mu).items()}
    case = {"n": n, "lambda": list(lam), "m": m, "mu": list(mu)}
    op_report = verify_generalized_bracket(n, lam, m, mu, window)
    realized = Sum(tuple((NLaurent.const(c), GeneralizedConstraint(b.n, IndexMultiset(b.Lam.parts)))
                         for b, c in abstract.items()))
    a = GeneralizedConstraint(n, IndexMultiset(lam))
    b = GeneralizedConstraint(m, IndexMultiset(mu))
    report = window_check("lie-l-consistency", case,
                          lambda p: apply(realized, p), lambda p: commutator_action(a, b, p), tuple(window))
    if abstract_terms != operator_terms:
        report.counterexamples.append({"abstract": str(abstract), "operator": str(operator_terms)})
    if abstract.central:
        report.counterexamples.append({"central": format_rational(abstract.central)})
    report.counterexamples.extend(op_report.counterexamples)
    report.details["abstract"] = abstract
    return report


__all__ = [
    "LBasis", "LElement", "LWindow", "l_bracket", "antisymmetry_scan", "jacobi_scan",
    "jacobi_residual", "closure_scan", "consistency_with_operators", "cocycle", "PRINTED", "CORRECTED",
]
