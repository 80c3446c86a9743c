"""Polynomials in the couplings t_0, t_1, ... and differential operators on them.

A monomial key is a tuple of ``(variable, exponent)`` pairs sorted by variable.
Operators are normal ordered: multiplications left of derivatives.

Families (:class:`OperatorFamily` subclasses) stand for infinite sums of
normal-ordered terms.  ``family.operator(cutoff)`` returns every term whose
t- and derivative-indices are all ``<= cutoff``; applying a family to a
polynomial picks the cutoff from the polynomial (``max variable + |mode| + 1``),
beyond which every remaining term differentiates a variable the polynomial does
not contain.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Iterator, Mapping, Union

from .exactcore import ONE, ZERO, IndexMultiset, NLaurent, Scalar, format_rational

Key = tuple  # tuple[tuple[int, int], ...]


def make_key(exps: Mapping[int, int] | Iterable[tuple[int, int]]) -> Key:
    items = exps.items() if isinstance(exps, Mapping) else exps
    acc: dict[int, int] = {}
    for v, e in items:
        if v < 0:
            raise ValueError(f"variable index must be >= 0, got {v}")
        if e:
            acc[v] = acc.get(v, 0) + e
    return tuple(sorted(acc.items()))


def key_from_vars(variables: Iterable[int]) -> Key:
    acc: dict[int, int] = {}
    for v in variables:
        acc[v] = acc.get(v, 0) + 1
    return make_key(acc)


def key_mul(a: Key, b: Key) -> Key:
    if not a:
        return b
    if not b:
        return a
    acc = dict(a)
    for v, e in b:
        acc[v] = acc.get(v, 0) + e
    return tuple(sorted(acc.items()))


def key_degree(a: Key) -> int:
    return sum(e for _, e in a)


def key_max_var(a: Key) -> int:
    return a[-1][0] if a else 0


def _falling(n: int, k: int) -> int:
    out = 1
    for i in range(k):
        out *= n - i
    return out


def key_str(a: Key, letter: str = "t") -> str:
    if not a:
        return "1"
    return "*".join(f"{letter}{v}" if e == 1 else f"{letter}{v}^{e}" for v, e in a)


class TPolynomial:
    """Finitely supported map ``monomial key -> NLaurent``."""

    __slots__ = ("_terms",)

    def __init__(self, terms: Mapping[Key, Scalar] | None = None):
        clean: dict[Key, NLaurent] = {}
        if terms:
            for k, c in terms.items():
                c = NLaurent.coerce(c)
                if c:
                    clean[tuple(k)] = c
        self._terms = clean

    @classmethod
    def _raw(cls, terms: dict[Key, NLaurent]) -> "TPolynomial":
        obj = cls.__new__(cls)
        obj._terms = terms
        return obj

    @classmethod
    def monomial(cls, key: Key = (), coeff: Scalar = 1) -> "TPolynomial":
        return cls({key: coeff})

    @classmethod
    def var(cls, v: int) -> "TPolynomial":
        return cls.monomial(((v, 1),))

    @classmethod
    def one(cls) -> "TPolynomial":
        return cls.monomial(())

    def items(self):
        return self._terms.items()

    def keys(self):
        return self._terms.keys()

    def coefficient(self, key: Key) -> NLaurent:
        return self._terms.get(key, ZERO)

    def is_zero(self) -> bool:
        return not self._terms

    def __bool__(self) -> bool:
        return bool(self._terms)

    def __len__(self) -> int:
        return len(self._terms)

    def max_var(self) -> int:
        return max((key_max_var(k) for k in self._terms), default=0)

    def __add__(self, other: "TPolynomial") -> "TPolynomial":
        if not other._terms:
            return self
        out = dict(self._terms)
        for k, c in other._terms.items():
            s = out.get(k, ZERO) + c
            if s:
                out[k] = s
            else:
                out.pop(k, None)
        return TPolynomial._raw(out)

    def __neg__(self) -> "TPolynomial":
        return TPolynomial._raw({k: -c for k, c in self._terms.items()})

    def __sub__(self, other: "TPolynomial") -> "TPolynomial":
        return self + (-other)

    def scale(self, c: Scalar) -> "TPolynomial":
        c = NLaurent.coerce(c)
        if not c:
            return TPolynomial()
        if c == ONE:
            return self
        return TPolynomial._raw({k: v * c for k, v in self._terms.items() if v * c})

    def __mul__(self, other: Union["TPolynomial", Scalar]) -> "TPolynomial":
        if not isinstance(other, TPolynomial):
            return self.scale(other)
        out: dict[Key, NLaurent] = {}
        for k1, c1 in self._terms.items():
            for k2, c2 in other._terms.items():
                k = key_mul(k1, k2)
                out[k] = out.get(k, ZERO) + c1 * c2
        return TPolynomial._raw({k: c for k, c in out.items() if c})

    __rmul__ = scale

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, TPolynomial):
            return NotImplemented
        return self._terms == other._terms

    def __hash__(self) -> int:
        return hash(frozenset(self._terms.items()))

    def sorted_items(self) -> list[tuple[Key, NLaurent]]:
        return sorted(self._terms.items(), key=lambda kv: (key_degree(kv[0]), kv[0]))

    def __str__(self) -> str:
        if not self._terms:
            return "0"
        return " + ".join(
            f"({c})*{key_str(k)}" if k else f"({c})" for k, c in self.sorted_items()
        )

    __repr__ = __str__

    def to_json(self) -> list:
        return [{"coeff": c.to_json(), "t": [list(p) for p in k]} for k, c in self.sorted_items()]


def poly_arith(p: TPolynomial, q: TPolynomial, op: str) -> TPolynomial:
    if op == "add":
        return p + q
    if op == "mul":
        return p * q
    raise ValueError(f"unknown op {op!r}")


# ---------------------------------------------------------------------------
# finite operators


@dataclass(frozen=True)
class WeylMonomial:
    coeff: NLaurent
    t: Key
    d: Key

    def to_json(self) -> dict:
        return {"coeff": self.coeff.to_json(), "t": [list(p) for p in self.t],
                "d": [list(p) for p in self.d]}


class WeylOperator:
    """Finite sum of normal-ordered monomials ``coeff * t^t * d^d``."""

    __slots__ = ("_terms",)

    def __init__(self, terms: Mapping[tuple[Key, Key], Scalar] | Iterable[WeylMonomial] | None = None):
        clean: dict[tuple[Key, Key], NLaurent] = {}
        if terms:
            pairs = terms.items() if isinstance(terms, Mapping) else (((m.t, m.d), m.coeff) for m in terms)
            for (t, d), c in pairs:
                c = NLaurent.coerce(c)
                k = (tuple(t), tuple(d))
                s = clean.get(k, ZERO) + c
                if s:
                    clean[k] = s
                else:
                    clean.pop(k, None)
        self._terms = clean

    @classmethod
    def _raw(cls, terms):
        obj = cls.__new__(cls)
        obj._terms = terms
        return obj

    @classmethod
    def term(cls, coeff: Scalar = 1, t: Iterable[int] = (), d: Iterable[int] = ()) -> "WeylOperator":
        """Single monomial from lists of variable indices (repeats allowed)."""
        return cls({(key_from_vars(t), key_from_vars(d)): coeff})

    @classmethod
    def identity(cls) -> "WeylOperator":
        return cls.term()

    def monomials(self) -> list[WeylMonomial]:
        return [WeylMonomial(c, t, d) for (t, d), c in sorted(self._terms.items())]

    def items(self):
        return self._terms.items()

    def __len__(self) -> int:
        return len(self._terms)

    def __add__(self, other: "WeylOperator") -> "WeylOperator":
        out = dict(self._terms)
        for k, c in other._terms.items():
            s = out.get(k, ZERO) + c
            if s:
                out[k] = s
            else:
                out.pop(k, None)
        return WeylOperator._raw(out)

    def __neg__(self):
        return WeylOperator._raw({k: -c for k, c in self._terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def scale(self, c: Scalar) -> "WeylOperator":
        c = NLaurent.coerce(c)
        return WeylOperator._raw({k: v * c for k, v in self._terms.items() if v * c})

    def __eq__(self, other):
        if not isinstance(other, WeylOperator):
            return NotImplemented
        return self._terms == other._terms

    def __hash__(self):
        return hash(frozenset(self._terms.items()))

    def apply_monomial(self, key: Key) -> TPolynomial:
        exps = dict(key)
        out: dict[Key, NLaurent] = {}
        for (t, d), c in self._terms.items():
            factor = 1
            rest = dict(exps)
            for v, e in d:
                have = rest.get(v, 0)
                if have < e:
                    factor = 0
                    break
                factor *= _falling(have, e)
                if have == e:
                    del rest[v]
                else:
                    rest[v] = have - e
            if not factor:
                continue
            for v, e in t:
                rest[v] = rest.get(v, 0) + e
            k = tuple(sorted(rest.items()))
            out[k] = out.get(k, ZERO) + c * factor
        return TPolynomial._raw({k: c for k, c in out.items() if c})

    def apply(self, p: TPolynomial) -> TPolynomial:
        out = TPolynomial()
        for k, c in p.items():
            out = out + self.apply_monomial(k).scale(c)
        return out

    def __str__(self):
        if not self._terms:
            return "0"
        parts = []
        for (t, d), c in sorted(self._terms.items()):
            body = "*".join(x for x in (key_str(t) if t else "", key_str(d, "d") if d else "") if x)
            parts.append(f"({c})" + (f"*{body}" if body else ""))
        return " + ".join(parts)

    __repr__ = __str__

    def to_json(self) -> list:
        return [m.to_json() for m in self.monomials()]

    @classmethod
    def from_json(cls, data: list) -> "WeylOperator":
        return cls({
            (make_key(tuple(p) for p in m["t"]), make_key(tuple(p) for p in m["d"])):
                NLaurent.from_json(m["coeff"])
            for m in data
        })


def compose(a: WeylOperator, b: WeylOperator) -> WeylOperator:
    """Normal-ordered product ``a∘b``.

    Moving ``d_v^β`` past ``t_v^γ`` gives ``Σ_κ C(β,κ) γ!/(γ-κ)! t_v^(γ-κ) d_v^(β-κ)``.
    """
    out: dict[tuple[Key, Key], NLaurent] = {}
    for (ta, da), ca in a._terms.items():
        for (tb, db), cb in b._terms.items():
            dad = dict(da)
            tbd = dict(tb)
            shared = [v for v in dad if v in tbd]
            ranges = [range(min(dad[v], tbd[v]) + 1) for v in shared]
            for kappa in itertools.product(*ranges):
                weight = 1
                d_rest = dict(dad)
                t_rest = dict(tbd)
                for v, k in zip(shared, kappa):
                    beta, gamma = dad[v], tbd[v]
                    weight *= _binom(beta, k) * _falling(gamma, k)
                    d_rest[v] = beta - k
                    t_rest[v] = gamma - k
                t_key = key_mul(ta, make_key(t_rest))
                d_key = key_mul(make_key(d_rest), db)
                kk = (t_key, d_key)
                out[kk] = out.get(kk, ZERO) + ca * cb * weight
    return WeylOperator._raw({k: c for k, c in out.items() if c})


def _binom(n: int, k: int) -> int:
    return _falling(n, k) // _falling(k, k)


# ---------------------------------------------------------------------------
# symbolic families


class OperatorFamily:
    """Base class; subclasses are frozen dataclasses (hashable, immutable)."""

    mode: int = 0

    def operator(self, cutoff: int) -> WeylOperator:
        raise NotImplementedError

    def auto_cutoff(self, p: TPolynomial) -> int:
        return p.max_var() + abs(self.mode) + 1

    def apply(self, p: TPolynomial, extra: int = 0) -> TPolynomial:
        cutoff = self.auto_cutoff(p) + extra
        out = TPolynomial()
        for k, c in p.items():
            out = out + _apply_family_monomial(self, k, cutoff).scale(c)
        return out

    def to_json(self) -> dict:
        raise NotImplementedError


@lru_cache(maxsize=None)
def _family_operator(family: OperatorFamily, cutoff: int) -> WeylOperator:
    return family.operator(cutoff)


@lru_cache(maxsize=1 << 20)
def _apply_family_monomial(family: OperatorFamily, key: Key, cutoff: int) -> TPolynomial:
    return _family_operator(family, cutoff).apply_monomial(key)


def _lin(coeff: Scalar, t: Iterable[int] = (), d: Iterable[int] = ()) -> tuple[tuple[Key, Key], NLaurent]:
    return (key_from_vars(t), key_from_vars(d)), NLaurent.coerce(coeff)


def _collect(pairs: Iterable[tuple[tuple[Key, Key], NLaurent]]) -> WeylOperator:
    out: dict[tuple[Key, Key], NLaurent] = {}
    for k, c in pairs:
        out[k] = out.get(k, ZERO) + c
    return WeylOperator._raw({k: c for k, c in out.items() if c})


INV_N2 = NLaurent.monomial(-2)
N2_OVER_4 = NLaurent.monomial(2, Fraction(1, 4))

J0_DERIVATIVE = "derivative"
J0_ZERO = "zero"


@dataclass(frozen=True)
class CurrentMode(OperatorFamily):
    """j_n = -N n t_{-n} (n < 0), (level/N) d_n (n >= 0).

    ``j0="zero"`` switches to the alternative convention j_0 = 0.
    """

    mode: int
    level: int = 2
    j0: str = J0_DERIVATIVE

    def operator(self, cutoff: int) -> WeylOperator:
        n = self.mode
        if abs(n) > cutoff:
            return WeylOperator()
        if n < 0:
            return _collect([_lin(NLaurent.monomial(1, -n), t=[-n])])
        if n == 0 and self.j0 == J0_ZERO:
            return WeylOperator()
        return _collect([_lin(NLaurent.monomial(-1, self.level), d=[n])])

    def to_json(self):
        return {"family": "CurrentMode", "n": self.mode, "level": self.level, "j0": self.j0}


@dataclass(frozen=True)
class VirasoroConstraint(OperatorFamily):
    """Σ_{k>=1} k t_k d_{k+n} + N^-2 Σ_{a=0}^{n} d_a d_{n-a}, n >= -1."""

    mode: int

    def __post_init__(self):
        if self.mode < -1:
            raise ValueError(f"constraint operators need n >= -1, got {self.mode}")

    def operator(self, cutoff: int) -> WeylOperator:
        n = self.mode
        terms = [_lin(k, t=[k], d=[k + n]) for k in range(1, cutoff + 1) if 0 <= k + n <= cutoff]
        terms += [_lin(INV_N2, d=[a, n - a]) for a in range(0, n + 1) if max(a, n - a) <= cutoff]
        return _collect(terms)

    def to_json(self):
        return {"family": "VirasoroConstraint", "n": self.mode}


@dataclass(frozen=True)
class GeneralizedConstraint(OperatorFamily):
    """Partition-indexed constraint, written out term by term:

    N^-2 Σ_a d_a d_{n-a} d_λ + Σ_k k t_k d_{n+k} d_λ + Σ_i λ_i d_{λ_i+n} d_{λ∖λ_i}
    """

    mode: int
    lam: IndexMultiset = IndexMultiset()

    def __post_init__(self):
        if self.mode < -1:
            raise ValueError(f"constraint operators need n >= -1, got {self.mode}")
        if not isinstance(self.lam, IndexMultiset):
            object.__setattr__(self, "lam", IndexMultiset(self.lam))

    def operator(self, cutoff: int) -> WeylOperator:
        n = self.mode
        lam = list(self.lam.parts)
        terms = []
        for a in range(0, n + 1):
            d = [a, n - a] + lam
            if max(d) <= cutoff:
                terms.append(_lin(INV_N2, d=d))
        for k in range(1, cutoff + 1):
            d = [k + n] + lam
            if 0 <= k + n and max(d) <= cutoff:
                terms.append(_lin(k, t=[k], d=d))
        for i, part in enumerate(lam):
            if part == 0:
                continue
            d = [part + n] + lam[:i] + lam[i + 1:]
            if max(d) <= cutoff:
                terms.append(_lin(part, d=d))
        return _collect(terms)

    def to_json(self):
        return {"family": "GeneralizedConstraint", "n": self.mode, "lambda": list(self.lam.parts)}


@dataclass(frozen=True)
class HatL(OperatorFamily):
    """Level-2 Virasoro modes in closed form.

    n >= -1: N^-2 Σ_{k=0}^{n} d_k d_{n-k} + Σ_{k>=1} k t_k d_{n+k}
    n <= -2: Σ_{l>=0} (l-n) t_{l-n} d_l + (N²/4) Σ_{l=1}^{-n-1} l(-n-l) t_l t_{-n-l}
    """

    mode: int

    def operator(self, cutoff: int) -> WeylOperator:
        n = self.mode
        if n >= -1:
            terms = [_lin(INV_N2, d=[k, n - k]) for k in range(0, n + 1) if max(k, n - k) <= cutoff]
            terms += [_lin(k, t=[k], d=[n + k]) for k in range(1, cutoff + 1) if 0 <= n + k <= cutoff]
            return _collect(terms)
        terms = [_lin(l - n, t=[l - n], d=[l]) for l in range(0, cutoff + 1) if l - n <= cutoff]
        terms += [_lin(N2_OVER_4 * (l * (-n - l)), t=[l, -n - l]) for l in range(1, -n)
                  if max(l, -n - l) <= cutoff]
        return _collect(terms)

    def to_json(self):
        return {"family": "HatL", "n": self.mode}


@dataclass(frozen=True)
class SugawaraMode(OperatorFamily):
    """(1/2k) Σ_m :j_m j_{n-m}: with creation modes (negative) to the left."""

    mode: int
    level: int = 2

    def operator(self, cutoff: int) -> WeylOperator:
        n = self.mode
        total = WeylOperator()
        for m in range(-cutoff, cutoff + 1):
            r = n - m
            if abs(r) > cutoff:
                continue
            left, right = m, r
            if left >= 0 and right < 0:
                left, right = right, left
            a = CurrentMode(left, self.level).operator(cutoff)
            b = CurrentMode(right, self.level).operator(cutoff)
            total = total + compose(a, b)
        return total.scale(Fraction(1, 2 * self.level))

    def to_json(self):
        return {"family": "SugawaraMode", "n": self.mode, "level": self.level}


OperatorLike = Union[WeylOperator, OperatorFamily]


@dataclass(frozen=True)
class Product(OperatorFamily):
    """Written-order product: ``Product((A, B)).apply(p) == A(B(p))``."""

    factors: tuple = ()

    def apply(self, p: TPolynomial, extra: int = 0) -> TPolynomial:
        for f in reversed(self.factors):
            if p.is_zero():
                return p
            p = apply(f, p, extra)
        return p

    def operator(self, cutoff: int) -> WeylOperator:
        out = WeylOperator.identity()
        for f in self.factors:
            out = compose(out, f if isinstance(f, WeylOperator) else f.operator(cutoff))
        return out

    def to_json(self):
        return {"family": "Product", "factors": [_op_json(f) for f in self.factors]}


@dataclass(frozen=True)
class Sum(OperatorFamily):
    """Linear combination ``Σ c_i F_i``; ``terms`` is a tuple of ``(NLaurent, family)``."""

    terms: tuple = ()

    def apply(self, p: TPolynomial, extra: int = 0) -> TPolynomial:
        out = TPolynomial()
        for c, f in self.terms:
            out = out + apply(f, p, extra).scale(c)
        return out

    def operator(self, cutoff: int) -> WeylOperator:
        out = WeylOperator()
        for c, f in self.terms:
            op = f if isinstance(f, WeylOperator) else f.operator(cutoff)
            out = out + op.scale(c)
        return out

    def to_json(self):
        return {"family": "Sum", "terms": [[NLaurent.coerce(c).to_json(), _op_json(f)] for c, f in self.terms]}


IDENTITY = Product(())


def _op_json(x: OperatorLike):
    if isinstance(x, WeylOperator):
        return {"family": "Finite", "operator": x.to_json()}
    return x.to_json()


def family_from_json(data: Mapping) -> OperatorLike:
    kind = data["family"]
    if kind == "CurrentMode":
        return CurrentMode(int(data["n"]), int(data.get("level", 2)), data.get("j0", J0_DERIVATIVE))
    if kind == "VirasoroConstraint":
        return VirasoroConstraint(int(data["n"]))
    if kind == "GeneralizedConstraint":
        return GeneralizedConstraint(int(data["n"]), IndexMultiset(data.get("lambda", [])))
    if kind == "HatL":
        return HatL(int(data["n"]))
    if kind == "SugawaraMode":
        return SugawaraMode(int(data["n"]), int(data.get("level", 2)))
    if kind == "Product":
        return Product(tuple(family_from_json(f) for f in data["factors"]))
    if kind == "Sum":
        return Sum(tuple((NLaurent.from_json(c), family_from_json(f)) for c, f in data["terms"]))
    if kind == "Finite":
        return WeylOperator.from_json(data["operator"])
    raise ValueError(f"unknown family {kind!r}")


def apply(a: OperatorLike, p: TPolynomial, extra: int = 0) -> TPolynomial:
    if isinstance(a, WeylOperator):
        return a.apply(p)
    return a.apply(p, extra)


def commutator_action(a: OperatorLike, b: OperatorLike, p: TPolynomial) -> TPolynomial:
    return apply(a, apply(b, p)) - apply(b, apply(a, p))


def window_monomials(max_var: int, max_deg: int) -> list[Key]:
    """Monomials in t_0..t_max_var of degree <= max_deg, ordered by (degree, key)."""
    out = []
    for deg in range(max_deg + 1):
        for combo in itertools.combinations_with_replacement(range(max_var + 1), deg):
            out.append(key_from_vars(combo))
    out.sort(key=lambda k: (key_degree(k), k))
    return out


@dataclass
class WindowResult:
    equal: bool
    monomial: Key | None = None
    lhs: TPolynomial | None = None
    rhs: TPolynomial | None = None

    def __bool__(self) -> bool:
        return self.equal


def equal_on_window(a: OperatorLike, b: OperatorLike, max_var: int, max_deg: int) -> WindowResult:
    if max_var < 0 or max_deg < 0:
        raise ValueError("window bounds must be non-negative")
    for key in window_monomials(max_var, max_deg):
        p = TPolynomial.monomial(key)
        lhs, rhs = apply(a, p), apply(b, p)
        if lhs != rhs:
            return WindowResult(False, key, lhs, rhs)
    return WindowResult(True)


def clear_caches() -> None:
    _family_operator.cache_clear()
    _apply_family_monomial.cache_clear()


def iter_terms(op: WeylOperator) -> Iterator[tuple[Key, Key, NLaurent]]:
    for (t, d), c in op.items():
        yield t, d, c


__all__ = [
    "TPolynomial", "WeylMonomial", "WeylOperator", "OperatorFamily", "CurrentMode",
    "VirasoroConstraint", "GeneralizedConstraint", "HatL", "SugawaraMode", "Product", "Sum",
    "IDENTITY", "apply", "compose", "commutator_action", "equal_on_window", "window_monomials",
    "poly_arith", "make_key", "key_from_vars", "key_str", "family_from_json", "format_rational",
]
