"""Exact scalars and partition combinatorics.

Rationals are :class:`fractions.Fraction`.  :class:`NLaurent` is a Laurent
polynomial in the formal matrix size ``N`` with rational coefficients; it is
the coefficient ring of every operator and moment in the package, so a single
identity check covers all matrix sizes at once.
"""

from __future__ import annotations

from collections import Counter
from fractions import Fraction
from typing import Iterable, Iterator, Mapping, Union

Scalar = Union[int, Fraction, "NLaurent"]


def parse_rational(text: str) -> Fraction:
    """Parse ``"p/q"`` or ``"p"`` into a Fraction."""
    return Fraction(text.strip())


def format_rational(q: Fraction) -> str:
    q = Fraction(q)
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


class NLaurent:
    """Finitely supported map ``power of N -> Fraction``; immutable."""

    __slots__ = ("_terms", "_hash")

    def __init__(self, terms: Mapping[int, Union[int, Fraction]] | None = None):
        clean: dict[int, Fraction] = {}
        if terms:
            for p, c in terms.items():
                if c:
                    clean[int(p)] = Fraction(c)
        self._terms = clean
        self._hash = None

    @classmethod
    def _raw(cls, terms: dict[int, Fraction]) -> "NLaurent":
        # terms must already be free of zeros
        obj = cls.__new__(cls)
        obj._terms = terms
        obj._hash = None
        return obj

    @classmethod
    def const(cls, c: Union[int, Fraction]) -> "NLaurent":
        return cls._raw({0: Fraction(c)}) if c else ZERO

    @classmethod
    def monomial(cls, power: int, c: Union[int, Fraction] = 1) -> "NLaurent":
        return cls._raw({power: Fraction(c)}) if c else ZERO

    @staticmethod
    def coerce(x: Scalar) -> "NLaurent":
        if isinstance(x, NLaurent):
            return x
        return NLaurent.const(x)

    # -- inspection -------------------------------------------------------
    @property
    def terms(self) -> dict[int, Fraction]:
        return dict(self._terms)

    def items(self):
        return self._terms.items()

    def coefficient(self, power: int) -> Fraction:
        return self._terms.get(power, Fraction(0))

    def powers(self) -> list[int]:
        return sorted(self._terms, reverse=True)

    def is_zero(self) -> bool:
        return not self._terms

    def is_constant(self) -> bool:
        return all(p == 0 for p in self._terms)

    def constant_value(self) -> Fraction:
        if not self.is_constant():
            raise ValueError(f"{self} depends on N")
        return self._terms.get(0, Fraction(0))

    def __bool__(self) -> bool:
        return bool(self._terms)

    # -- arithmetic -------------------------------------------------------
    def __add__(self, other: Scalar) -> "NLaurent":
        other = NLaurent.coerce(other)
        if not other._terms:
            return self
        if not self._terms:
            return other
        out = dict(self._terms)
        for p, c in other._terms.items():
            s = out.get(p, 0) + c
            if s:
                out[p] = s
            else:
                out.pop(p, None)
        return NLaurent._raw(out)

    __radd__ = __add__

    def __neg__(self) -> "NLaurent":
        return NLaurent._raw({p: -c for p, c in self._terms.items()})

    def __sub__(self, other: Scalar) -> "NLaurent":
        return self + (-NLaurent.coerce(other))

    def __rsub__(self, other: Scalar) -> "NLaurent":
        return NLaurent.coerce(other) - self

    def __mul__(self, other: Scalar) -> "NLaurent":
        if not isinstance(other, NLaurent):
            other = Fraction(other)
            if not other:
                return ZERO
            return NLaurent._raw({p: c * other for p, c in self._terms.items()})
        if not self._terms or not other._terms:
            return ZERO
        out: dict[int, Fraction] = {}
        for p, c in self._terms.items():
            for q, d in other._terms.items():
                out[p + q] = out.get(p + q, 0) + c * d
        return NLaurent._raw({p: c for p, c in out.items() if c})

    __rmul__ = __mul__

    def __truediv__(self, other: Union[int, Fraction]) -> "NLaurent":
        if isinstance(other, NLaurent):
            if len(other._terms) != 1:
                raise ZeroDivisionError("only division by a monomial in N is exact")
            (p, c), = other._terms.items()
            return self.shift(-p) * (1 / c)
        return self * (1 / Fraction(other))

    def __pow__(self, e: int) -> "NLaurent":
        if e < 0:
            if len(self._terms) != 1:
                raise ValueError("negative powers only for monomials")
            (p, c), = self._terms.items()
            return NLaurent.monomial(p * e, c ** e)
        out = ONE
        for _ in range(e):
            out = out * self
        return out

    def shift(self, k: int) -> "NLaurent":
        """Multiply by ``N**k``."""
        return NLaurent._raw({p + k: c for p, c in self._terms.items()})

    # -- comparison -------------------------------------------------------
    def __eq__(self, other: object) -> bool:
        if isinstance(other, NLaurent):
            return self._terms == other._terms
        if isinstance(other, (int, Fraction)):
            return self._terms == ({0: Fraction(other)} if other else {})
        return NotImplemented

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash(frozenset(self._terms.items()))
        return self._hash

    def evaluate(self, n_value: Union[int, Fraction]) -> Fraction:
        n_value = Fraction(n_value)
        if n_value == 0:
            raise ZeroDivisionError("cannot substitute N = 0")
        return sum((c * n_value ** p for p, c in self._terms.items()), Fraction(0))

    def split(self) -> list[tuple[int, Fraction]]:
        return [(p, self._terms[p]) for p in self.powers()]

    # -- presentation -----------------------------------------------------
    def __repr__(self) -> str:
        return f"NLaurent({self})"

    def __str__(self) -> str:
        if not self._terms:
            return "0"
        chunks = []
        for p in self.powers():
            c = self._terms[p]
            sign = "-" if c < 0 else "+"
            a = abs(c)
            if p == 0:
                body = format_rational(a)
            else:
                var = "N" if p == 1 else f"N^{p}"
                body = var if a == 1 else f"{format_rational(a)}*{var}"
            chunks.append((sign, body))
        first_sign, first = chunks[0]
        out = ("-" if first_sign == "-" else "") + first
        for sign, body in chunks[1:]:
            out += f" {sign} {body}"
        return out

    def to_json(self) -> dict:
        return {"terms": [[p, format_rational(c)] for p, c in self.split()]}

    @classmethod
    def from_json(cls, data: Mapping) -> "NLaurent":
        return cls({int(p): parse_rational(str(c)) for p, c in data["terms"]})


ZERO = NLaurent._raw({})
ONE = NLaurent._raw({0: Fraction(1)})
N = NLaurent._raw({1: Fraction(1)})


def nlaurent_arith(a: NLaurent, b: NLaurent | None, op: str) -> NLaurent:
    if op == "add":
        return a + b
    if op == "mul":
        return a * b
    if op == "neg":
        return -a
    raise ValueError(f"unknown op {op!r}")


def nlaurent_eval(a: NLaurent, n_value) -> Fraction:
    return a.evaluate(n_value)


def n_power_split(a: NLaurent) -> list[tuple[int, Fraction]]:
    """Pairs ``(power, coefficient)`` by descending power."""
    return a.split()


# ---------------------------------------------------------------------------
# partitions


class _Multiset:
    """Sorted tuple of integers; subclasses fix the sort direction and range."""

    __slots__ = ("parts",)
    _descending = False

    def __init__(self, parts: Iterable[int] = ()):
        parts = tuple(sorted((int(p) for p in parts), reverse=self._descending))
        self._validate(parts)
        object.__setattr__(self, "parts", parts)

    def _validate(self, parts: tuple[int, ...]) -> None:
        pass

    def __setattr__(self, name, value):
        raise AttributeError("partitions are immutable")

    def __iter__(self) -> Iterator[int]:
        return iter(self.parts)

    def __len__(self) -> int:
        return len(self.parts)

    def __eq__(self, other: object) -> bool:
        return type(self) is type(other) and self.parts == other.parts

    def __hash__(self) -> int:
        return hash((type(self).__name__, self.parts))

    def __lt__(self, other: "_Multiset") -> bool:
        return self.parts < other.parts

    def __repr__(self) -> str:
        return f"{type(self).__name__}({list(self.parts)})"

    def __str__(self) -> str:
        return "(" + ",".join(map(str, self.parts)) + ")" if self.parts else "∅"

    @property
    def weight(self) -> int:
        return sum(self.parts)

    @property
    def length(self) -> int:
        return len(self.parts)

    def union(self, other: Iterable[int]):
        return type(self)(self.parts + tuple(other))

    def remove(self, part: int):
        parts = list(self.parts)
        try:
            parts.remove(part)
        except ValueError:
            raise ValueError(f"part {part} does not occur in {self}") from None
        return type(self)(parts)

    def to_json(self) -> list[int]:
        return list(self.parts)


class Partition(_Multiset):
    """Weakly decreasing positive parts."""

    __slots__ = ()
    _descending = True

    def _validate(self, parts):
        if any(p < 1 for p in parts):
            raise ValueError(f"partition parts must be positive: {parts}")


class GeneralizedPartition(_Multiset):
    """Weakly increasing integer parts of any sign."""

    __slots__ = ()


class IndexMultiset(_Multiset):
    """Weakly increasing non-negative integers (derivative indices, part 0 allowed)."""

    __slots__ = ()

    def _validate(self, parts):
        if any(p < 0 for p in parts):
            raise ValueError(f"index multiset entries must be >= 0: {parts}")


EMPTY = Partition()


def partition_union(lam: _Multiset, mu: _Multiset) -> _Multiset:
    if type(lam) is not type(mu):
        raise TypeError("both operands must be the same partition kind")
    return lam.union(mu.parts)


def partition_remove(lam: _Multiset, part: int) -> _Multiset:
    return lam.remove(part)


def weight(lam: _Multiset) -> int:
    return lam.weight


def length(lam: _Multiset) -> int:
    return lam.length


def partitions_of(n: int, max_part: int | None = None) -> Iterator[Partition]:
    """All partitions of ``n`` with parts ``<= max_part``, largest parts first."""
    if max_part is None:
        max_part = n

    def rec(rest: int, cap: int) -> Iterator[tuple[int, ...]]:
        if rest == 0:
            yield ()
            return
        for first in range(min(rest, cap), 0, -1):
            for tail in rec(rest - first, first):
                yield (first,) + tail

    for parts in rec(n, max_part):
        yield Partition(parts)


def partitions_up_to(max_weight: int) -> list[Partition]:
    out = []
    for w in range(max_weight + 1):
        out.extend(partitions_of(w))
    return out


def distinct_permutations(values: Iterable[int]) -> Iterator[tuple[int, ...]]:
    counts = Counter(values)
    keys = sorted(counts)
    total = sum(counts.values())

    def rec(prefix: list[int]) -> Iterator[tuple[int, ...]]:
        if len(prefix) == total:
            yield tuple(prefix)
            return
        for k in keys:
            if counts[k]:
                counts[k] -= 1
                prefix.append(k)
                yield from rec(prefix)
                prefix.pop()
                counts[k] += 1

    yield from rec([])


def monomial_symmetric(lam: Partition, nvars: int) -> dict[tuple[int, ...], int]:
    """m_lambda(x_1..x_nvars) as ``{exponent vector: 1}``.

    When ``l(lam) > nvars`` the restriction is the zero polynomial.
    """
    if lam.length > nvars:
        return {}
    exps = list(lam.parts) + [0] * (nvars - lam.length)
    return {perm: 1 for perm in distinct_permutations(exps)}
