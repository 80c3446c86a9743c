"""Gaussian Wick oracle and loop-equation checks for the Hermitian one-matrix model.

The base point is the Gaussian potential V(x) = x²/2 (t_2 = 1/2), measure
exp(-N tr V(M)), propagator <M_ab M_cd> = δ_ad δ_bc / N.  A multi-trace moment
is the sum over perfect matchings of the matrix letters of N^(faces - pairs),
where faces are the cycles of γ∘σ (γ: next letter in the same trace, σ: the
matching).  Each tr M^0 contributes a factor N.
"""

from __future__ import annotations

import itertools
import math
from collections import Counter
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Mapping, Sequence

import numpy as np

from .exactcore import ONE, ZERO, N, IndexMultiset, NLaurent, format_rational
from .report import Report
from .weyl import GeneralizedConstraint

GAUSS_POINT: dict[int, Fraction] = {2: Fraction(1, 2)}

TABLE_MAX_LETTERS = 14


def trace_word(w: Iterable[int] | str) -> tuple[int, ...]:
    """Sorted trace word; accepts an iterable or a comma list such as ``"2,2"``."""
    if isinstance(w, str):
        w = [int(x) for x in w.split(",") if x.strip()]
    w = tuple(sorted(int(x) for x in w))
    if any(k < 0 for k in w):
        raise ValueError(f"trace powers must be >= 0: {w}")
    return w


# ---------------------------------------------------------------------------
# matching enumeration


@lru_cache(maxsize=None)
def matchings(n_letters: int) -> np.ndarray:
    """All perfect matchings of ``range(n_letters)`` as partner arrays, shape (count, n_letters)."""
    if n_letters % 2:
        raise ValueError("odd letter count has no perfect matching")
    if n_letters == 0:
        return np.zeros((1, 0), dtype=np.int8)
    sub = matchings(n_letters - 2)
    blocks = []
    for j in range(1, n_letters):
        rem = np.array([i for i in range(1, n_letters) if i != j], dtype=np.int8)
        sig = np.empty((sub.shape[0], n_letters), dtype=np.int8)
        sig[:, 0] = j
        sig[:, j] = 0
        if len(rem):
            sig[:, rem] = rem[sub]
        blocks.append(sig)
    out = np.vstack(blocks)
    out.setflags(write=False)
    return out


def count_cycles(perms: np.ndarray) -> np.ndarray:
    """Number of cycles of each row permutation (pointer doubling on cycle minima)."""
    count, size = perms.shape
    if size == 0:
        return np.zeros(count, dtype=np.int64)
    label = np.broadcast_to(np.arange(size, dtype=perms.dtype), perms.shape).copy()
    jump = perms.copy()
    steps = max(1, math.ceil(math.log2(size)))
    for _ in range(steps):
        label = np.minimum(label, np.take_along_axis(label, jump, axis=1))
        jump = np.take_along_axis(jump, jump, axis=1)
    return (label == np.arange(size, dtype=perms.dtype)).sum(axis=1)


def _gamma(word: Sequence[int]) -> np.ndarray:
    gamma = []
    start = 0
    for k in word:
        if k:
            gamma.extend(start + (i + 1) % k for i in range(k))
            start += k
    return np.array(gamma, dtype=np.int8)


def face_histogram(word: Sequence[int]) -> Counter:
    """``{faces: number of matchings}`` for the letters of the positive powers in ``word``."""
    gamma = _gamma([k for k in word if k])
    size = len(gamma)
    hist: Counter = Counter()
    if size % 2:
        return hist
    _accumulate_faces(gamma, np.full(size, -1, dtype=np.int8), list(range(size)), hist)
    return hist


def _accumulate_faces(gamma: np.ndarray, partial: np.ndarray, remaining: list[int], hist: Counter) -> None:
    if len(remaining) <= TABLE_MAX_LETTERS:
        sub = matchings(len(remaining))
        rem = np.array(remaining, dtype=np.int8)
        sig = np.broadcast_to(partial, (sub.shape[0], len(partial))).copy()
        if len(rem):
            sig[:, rem] = rem[sub]
        faces = count_cycles(gamma[sig])
        values, counts = np.unique(faces, return_counts=True)
        for f, c in zip(values.tolist(), counts.tolist()):
            hist[f] += c
        return
    first = remaining[0]
    for j in remaining[1:]:
        nxt = partial.copy()
        nxt[first], nxt[j] = j, first
        _accumulate_faces(gamma, nxt, [i for i in remaining[1:] if i != j], hist)


_MOMENTS: dict[tuple[int, ...], NLaurent] = {}


def wick_moment(w: Iterable[int] | str) -> NLaurent:
    """<tr M^k1 ... tr M^kr> at the Gaussian point, exactly, by matching enumeration."""
    w = trace_word(w)
    hit = _MOMENTS.get(w)
    if hit is not None:
        return hit
    letters = sum(w)
    if letters % 2:
        value = ZERO
    else:
        zeros = w.count(0)
        pairs = letters // 2
        value = NLaurent({f - pairs + zeros: c for f, c in face_histogram(w).items()})
    _MOMENTS[w] = value
    return value


# ---------------------------------------------------------------------------
# cumulants and genus


def _sub_multisets(counts: Mapping[int, int]):
    keys = sorted(counts)
    for choice in itertools.product(*(range(counts[k] + 1) for k in keys)):
        mult = 1
        for k, c in zip(keys, choice):
            mult *= math.comb(counts[k], c)
        yield tuple(itertools.chain.from_iterable([k] * c for k, c in zip(keys, choice))), mult


_CUMULANTS: dict[tuple[int, ...], NLaurent] = {}


def connected_moment(w: Iterable[int] | str) -> NLaurent:
    """Cumulant of the trace factors.

    Uses κ(S) = m(S) - Σ_{B ∋ s_1, B ≠ S} κ(B) m(S∖B), the first-block form of
    Möbius inversion over set partitions, summed over sub-multisets with
    multiplicities.
    """
    w = trace_word(w)
    hit = _CUMULANTS.get(w)
    if hit is not None:
        return hit
    if not w:
        return ZERO
    first, rest = w[0], w[1:]
    value = wick_moment(w)
    for sub, mult in _sub_multisets(Counter(rest)):
        block = trace_word((first,) + sub)
        if len(block) == len(w):
            continue
        other = list(rest)
        for x in sub:
            other.remove(x)
        value = value - connected_moment(block) * wick_moment(other) * mult
    _CUMULANTS[w] = value
    return value


def set_partitions(items: Sequence) -> Iterable[list[list]]:
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for part in set_partitions(rest):
        yield [[first]] + part
        for i in range(len(part)):
            yield part[:i] + [[first] + part[i]] + part[i + 1:]


def connected_moment_setpartitions(w: Iterable[int] | str) -> NLaurent:
    """Reference cumulant: Σ_π (-1)^(|π|-1) (|π|-1)! Π_B m(B), over all set partitions π."""
    w = trace_word(w)
    total = ZERO
    for pi in set_partitions(list(w)):
        term = NLaurent.const((-1) ** (len(pi) - 1) * math.factorial(len(pi) - 1))
        for block in pi:
            term = term * wick_moment(block)
        total = total + term
    return total


def genus_extract(w: Iterable[int] | str) -> list[tuple[int, Fraction]]:
    """Write N^(r-2) κ(w) as Σ_g N^(-2g) a_g; returns ``[(g, a_g), ...]`` by increasing g."""
    w = trace_word(w)
    scaled = connected_moment(w).shift(len(w) - 2)
    out = []
    for p, c in scaled.split():
        if p % 2 or p > 0:
            raise ValueError(f"N^{p} in the connected moment of {list(w)} breaks the genus expansion")
        out.append((-p // 2, c))
    return sorted(out)


def planar_moments(max_k: int) -> list[Fraction]:
    """Genus-0 part of <N^-1 tr M^(2k)> for k = 0..max_k."""
    if max_k < 0:
        raise ValueError("max_k must be >= 0")
    out = []
    for k in range(max_k + 1):
        genus = dict(genus_extract([2 * k]))
        out.append(genus.get(0, Fraction(0)))
    return out


def _planar(a: int) -> Fraction:
    return Fraction(0) if a % 2 else planar_moments(a // 2)[-1]


# ---------------------------------------------------------------------------
# spectral curve


def _xmul(a: dict[int, Fraction], b: dict[int, Fraction]) -> dict[int, Fraction]:
    out: dict[int, Fraction] = {}
    for p, c in a.items():
        for q, d in b.items():
            out[p + q] = out.get(p + q, 0) + c * d
    return {p: c for p, c in out.items() if c}


def _xadd(*terms: tuple[Fraction | int, dict[int, Fraction]]) -> dict[int, Fraction]:
    out: dict[int, Fraction] = {}
    for s, a in terms:
        for p, c in a.items():
            out[p] = out.get(p, 0) + s * c
    return {p: c for p, c in out.items() if c}


def genus0_resolvent(order: int) -> dict[int, Fraction]:
    """W(x) = Σ_k C_k x^(-2k-1) up to x^-(order+1), keyed by power of x."""
    kmax = (order + 1) // 2
    moments = planar_moments(kmax)
    return {-(2 * k + 1): c for k, c in enumerate(moments) if c and 2 * k + 1 <= order + 1}


def polynomial_part(poly: Mapping[int, Fraction]) -> dict[int, Fraction]:
    """Genus-0 value of N^-1 <tr (P(x) - P(M))/(x - M)> for P = Σ p_j x^j."""
    out: dict[int, Fraction] = {}
    for j, pj in poly.items():
        for i in range(j):
            m = _planar(j - 1 - i)
            if m:
                out[i] = out.get(i, 0) + Fraction(pj) * m
    return {p: c for p, c in out.items() if c}


GAUSS_V = {2: Fraction(1, 2)}
GAUSS_VPRIME = {1: Fraction(1)}


def spectral_curve_check(order: int, convention: str = "derivative") -> Report:
    """Genus-0 loop equation W² - V'W + U = 0 and Y² = V'² - 4U, through x^-order.

    ``convention="derivative"`` builds U from (V'(x)-V'(M))/(x-M);
    ``convention="literal"`` from (V(x)-V(M))/(x-M).
    """
    if order < 0:
        raise ValueError("order must be >= 0")
    if convention not in ("derivative", "literal"):
        raise ValueError(f"unknown convention {convention!r}")
    w = genus0_resolvent(order)
    u = polynomial_part(GAUSS_VPRIME if convention == "derivative" else GAUSS_V)
    vp = dict(GAUSS_VPRIME)
    loop = _xadd((1, _xmul(w, w)), (-1, _xmul(vp, w)), (1, u))
    y = _xadd((1, vp), (-2, w))
    curve = _xadd((1, _xmul(y, y)), (-1, _xmul(vp, vp)), (4, u))
    report = Report("spectral", {"order": order, "convention": convention}, {"order": order})
    top = max([1] + list(u))
    for p in range(top, -order - 1, -1):
        report.checked += 1
        for name, series in (("loop", loop), ("curve", curve)):
            if series.get(p):
                report.counterexamples.append({"equation": name, "power": p,
                                               "coefficient": format_rational(series[p])})
    report.details["resolvent"] = {str(p): format_rational(c) for p, c in sorted(w.items(), reverse=True)}
    report.details["U"] = {str(p): format_rational(c) for p, c in sorted(u.items(), reverse=True)}
    return report


# ---------------------------------------------------------------------------
# coupling series


class PerturbationSeries:
    """Truncated power series in couplings s_k (k in ``variables``) with NLaurent coefficients."""

    __slots__ = ("variables", "order", "_coeffs")

    def __init__(self, variables: Iterable[int], order: int,
                 coeffs: Mapping[tuple[int, ...], NLaurent] | None = None):
        self.variables = tuple(sorted(set(variables)))
        self.order = order
        clean = {}
        for alpha, c in (coeffs or {}).items():
            alpha = tuple(alpha)
            if len(alpha) != len(self.variables):
                raise ValueError("exponent length does not match the variable set")
            c = NLaurent.coerce(c)
            if c and sum(alpha) <= order:
                clean[alpha] = c
        self._coeffs = clean

    def _like(self, coeffs, order=None) -> "PerturbationSeries":
        return PerturbationSeries(self.variables, self.order if order is None else order, coeffs)

    @classmethod
    def constant(cls, variables, order, c=1) -> "PerturbationSeries":
        variables = tuple(sorted(set(variables)))
        return cls(variables, order, {(0,) * len(variables): NLaurent.coerce(c)})

    @classmethod
    def variable(cls, variables, order, k: int) -> "PerturbationSeries":
        variables = tuple(sorted(set(variables)))
        alpha = tuple(1 if v == k else 0 for v in variables)
        return cls(variables, order, {alpha: ONE})

    def coefficient(self, alpha: Mapping[int, int] | Sequence[int]) -> NLaurent:
        if isinstance(alpha, Mapping):
            alpha = tuple(alpha.get(v, 0) for v in self.variables)
        return self._coeffs.get(tuple(alpha), ZERO)

    def items(self):
        return sorted(self._coeffs.items(), key=lambda kv: (sum(kv[0]), kv[0]))

    def is_zero(self) -> bool:
        return not self._coeffs

    def __add__(self, other: "PerturbationSeries") -> "PerturbationSeries":
        self._compatible(other)
        out = dict(self._coeffs)
        for a, c in other._coeffs.items():
            out[a] = out.get(a, ZERO) + c
        return self._like(out, min(self.order, other.order))

    def __neg__(self):
        return self._like({a: -c for a, c in self._coeffs.items()})

    def __sub__(self, other):
        return self + (-other)

    def scale(self, c) -> "PerturbationSeries":
        c = NLaurent.coerce(c)
        return self._like({a: v * c for a, v in self._coeffs.items()})

    def __mul__(self, other) -> "PerturbationSeries":
        if not isinstance(other, PerturbationSeries):
            return self.scale(other)
        self._compatible(other)
        order = min(self.order, other.order)
        out: dict[tuple, NLaurent] = {}
        for a, c in self._coeffs.items():
            da = sum(a)
            for b, d in other._coeffs.items():
                if da + sum(b) > order:
                    continue
                k = tuple(x + y for x, y in zip(a, b))
                out[k] = out.get(k, ZERO) + c * d
        return self._like(out, order)

    __rmul__ = scale

    def truncate(self, order: int) -> "PerturbationSeries":
        return self._like(self._coeffs, min(order, self.order))

    def derivative(self, k: int) -> "PerturbationSeries":
        """d/ds_k; the result is trusted one order lower."""
        i = self.variables.index(k)
        out = {}
        for a, c in self._coeffs.items():
            if a[i]:
                b = a[:i] + (a[i] - 1,) + a[i + 1:]
                out[b] = c * a[i]
        return self._like(out, self.order - 1)

    def constant_term(self) -> NLaurent:
        return self._coeffs.get((0,) * len(self.variables), ZERO)

    def inverse(self) -> "PerturbationSeries":
        c0 = self.constant_term()
        if c0 != ONE:
            raise ValueError("inverse needs constant term 1")
        x = self - PerturbationSeries.constant(self.variables, self.order)
        out = PerturbationSeries.constant(self.variables, self.order)
        power = out
        for j in range(1, self.order + 1):
            power = power * x
            out = out + power.scale((-1) ** j)
        return out

    def log(self) -> "PerturbationSeries":
        if self.constant_term() != ONE:
            raise ValueError("log needs constant term 1")
        x = self - PerturbationSeries.constant(self.variables, self.order)
        out = self._like({})
        power = PerturbationSeries.constant(self.variables, self.order)
        for j in range(1, self.order + 1):
            power = power * x
            out = out + power.scale(Fraction((-1) ** (j + 1), j))
        return out

    def _compatible(self, other):
        if self.variables != other.variables:
            raise ValueError("series over different coupling sets")

    def __eq__(self, other) -> bool:
        if not isinstance(other, PerturbationSeries):
            return NotImplemented
        return self.variables == other.variables and self._coeffs == other._coeffs

    def __str__(self) -> str:
        if not self._coeffs:
            return "0"
        chunks = []
        for a, c in self.items():
            mono = "*".join(f"s{v}" + (f"^{e}" if e > 1 else "") for v, e in zip(self.variables, a) if e)
            chunks.append(f"({c})" + (f"*{mono}" if mono else ""))
        return " + ".join(chunks)

    __repr__ = __str__

    def to_json(self) -> dict:
        return {"variables": list(self.variables), "order": self.order,
                "coefficients": [{"alpha": list(a), "value": c.to_json()} for a, c in self.items()]}


def _exponents(nvars: int, order: int):
    for total in range(order + 1):
        for combo in itertools.combinations_with_replacement(range(nvars), total):
            alpha = [0] * nvars
            for i in combo:
                alpha[i] += 1
            yield tuple(alpha)


def moment_series(w: Iterable[int], variables: Iterable[int], order: int) -> PerturbationSeries:
    """<Π tr M^w · exp(-N Σ s_k tr M^k)>_Gauss as a series; the empty word gives Z/Z_Gauss."""
    variables = tuple(sorted(set(variables)))
    w = trace_word(w)
    coeffs = {}
    for alpha in _exponents(len(variables), order):
        word = list(w)
        denom = 1
        for v, e in zip(variables, alpha):
            word += [v] * e
            denom *= math.factorial(e)
        c = wick_moment(word)
        if c:
            coeffs[alpha] = c * NLaurent.monomial(sum(alpha), Fraction((-1) ** sum(alpha), denom))
    return PerturbationSeries(variables, order, coeffs)


def z_series(variables: Iterable[int], order: int) -> PerturbationSeries:
    """Z(τ + s)/Z(τ) around the Gaussian point; the t_0 direction is handled separately."""
    variables = tuple(sorted(set(variables)))
    if 0 in variables:
        raise ValueError("t_0 acts by the factor exp(-N² t_0); leave it out of the coupling set")
    return moment_series((), variables, order)


def free_energy_series(z: PerturbationSeries) -> PerturbationSeries:
    return z.log()


def connected_series(w: Iterable[int], variables: Iterable[int], order: int) -> PerturbationSeries:
    """Cumulant of the trace factors of ``w`` as a function of the couplings."""
    variables = tuple(sorted(set(variables)))
    w = trace_word(w)
    z_inv = z_series(variables, order).inverse()
    moments: dict[tuple, PerturbationSeries] = {}

    def moment(word):
        word = trace_word(word)
        if word not in moments:
            moments[word] = moment_series(word, variables, order) * z_inv
        return moments[word]

    cache: dict[tuple, PerturbationSeries] = {}

    def kappa(word):
        word = trace_word(word)
        if word in cache:
            return cache[word]
        first, rest = word[0], word[1:]
        value = moment(word)
        for sub, mult in _sub_multisets(Counter(rest)):
            if len(sub) == len(rest):
                continue
            other = list(rest)
            for x in sub:
                other.remove(x)
            value = value - (kappa((first,) + sub) * moment(other)).scale(mult)
        cache[word] = value
        return value

    if not w:
        raise ValueError("the cumulant of an empty product is not defined")
    return kappa(w)


def loop_insertion_check(m: int, w: Iterable[int], variables: Iterable[int], order: int) -> Report:
    """d/dt_m of a correlator inserts -N tr M^m.

    Empty ``w``: d/ds_m (Z/Z_0) = -N <tr M^m e^{...}>.  Otherwise the cumulant
    form d/ds_m κ(w) = -N κ(w ∪ (m)).  Compared through order ``order - 1``.
    """
    if m < 1 or order < 1:
        raise ValueError("need m >= 1 and order >= 1")
    variables = tuple(sorted(set(variables) | {m}))
    w = trace_word(w)
    if not w:
        lhs = z_series(variables, order).derivative(m)
        rhs = moment_series((m,), variables, order - 1).scale(-N)
    else:
        lhs = connected_series(w, variables, order).derivative(m)
        rhs = connected_series(w + (m,), variables, order - 1).scale(-N)
    diff = (lhs - rhs).truncate(order - 1)
    report = Report("loop-insertion", {"m": m, "w": list(w)},
                    {"couplings": list(variables), "order": order})
    report.checked = len(list(_exponents(len(variables), order - 1)))
    for alpha, c in diff.items():
        report.counterexamples.append({"alpha": list(alpha), "residual": str(c)})
    report.details["lhs"] = str(lhs.truncate(order - 1))
    return report


def loop_identity_residual(n: int) -> NLaurent:
    """Σ_{k=0}^{n} <tr M^k tr M^(n-k)> - N <tr M^(n+2)> at the Gaussian point."""
    lhs = ZERO
    for k in range(0, n + 1):
        lhs = lhs + wick_moment([k, n - k])
    return lhs - N * wick_moment([n + 2])


def verify_loop_identity(n: int) -> Report:
    if n < -1:
        raise ValueError("n must be >= -1")
    res = loop_identity_residual(n)
    report = Report("loop", {"n": n}, checked=1)
    if res:
        report.counterexamples.append({"residual": str(res)})
    return report


def multiloop_residual(n: int, insertions: Sequence[int]) -> NLaurent:
    ins = list(insertions)
    total = ZERO
    for l in range(0, n + 1):
        total = total + wick_moment([l, n - l] + ins)
    total = total - N * wick_moment([n + 2] + ins)
    for i, ni in enumerate(ins):
        total = total + wick_moment([ni + n] + ins[:i] + ins[i + 1:]) * ni
    return total


def verify_multiloop_identity(n: int, insertions: Sequence[int]) -> Report:
    if n < -1 or any(k < 1 for k in insertions):
        raise ValueError("need n >= -1 and positive insertions")
    res = multiloop_residual(n, insertions)
    report = Report("multiloop", {"n": n, "insertions": list(insertions)}, checked=1)
    if res:
        report.counterexamples.append({"residual": str(res)})
    return report


def _slice_terms(family: GeneralizedConstraint, variables: tuple[int, ...], extra: int = 0):
    """Terms of the family whose multiplications only involve couplings that are
    nonzero on the slice (the coupling set plus the Gaussian t_2)."""
    live = set(variables) | set(GAUSS_POINT)
    cutoff = max(live) + abs(family.mode) + max(family.lam.parts, default=0) + 1 + extra
    op = family.operator(cutoff)
    return [(t, d, c) for (t, d), c in op.items() if all(v in live for v, _ in t)]


def constraint_residual(n: int, lam: Iterable[int], variables: Iterable[int], order: int,
                        extra: int = 0) -> PerturbationSeries:
    """L_{n;λ} Z on the coupling slice, divided by Z_Gauss, through ``order - 1``.

    d_w Z -> (-N)^|w| <Π tr M^w e^{...}>, d_0 included (tr M^0 = N);
    t_k -> τ_k + s_k.
    """
    variables = tuple(sorted(set(variables)))
    if 0 in variables:
        raise ValueError("t_0 is not a coupling of the series")
    family = GeneralizedConstraint(n, IndexMultiset(lam))
    trusted = order - 1
    if trusted < 0:
        raise ValueError("order must be >= 1")
    total = PerturbationSeries(variables, trusted)
    for t, d, c in _slice_terms(family, variables, extra):
        factor = PerturbationSeries.constant(variables, trusted, c)
        for v, e in t:
            tv = PerturbationSeries.constant(variables, trusted, GAUSS_POINT.get(v, 0))
            if v in variables:
                tv = tv + PerturbationSeries.variable(variables, trusted, v)
            for _ in range(e):
                factor = factor * tv
        if factor.is_zero():
            continue
        word = [v for v, e in d for _ in range(e)]
        deriv = moment_series(word, variables, trusted).scale(NLaurent.monomial(len(word), (-1) ** len(word)))
        total = total + factor * deriv
    return total


def verify_constraint_on_z(n: int, lam: Iterable[int], variables: Iterable[int], order: int) -> Report:
    lam = list(lam)
    res = constraint_residual(n, lam, variables, order)
    report = Report("z-constraint", {"n": n, "lambda": lam},
                    {"couplings": sorted(set(variables)), "order": order, "trusted_order": order - 1})
    report.checked = len(list(_exponents(len(res.variables), order - 1)))
    for alpha, c in res.items():
        report.counterexamples.append({"alpha": list(alpha), "residual": str(c)})
    return report


__all__ = [
    "wick_moment", "connected_moment", "connected_moment_setpartitions", "genus_extract",
    "planar_moments", "spectral_curve_check", "PerturbationSeries", "z_series", "moment_series",
    "free_energy_series", "connected_series", "loop_insertion_check", "verify_loop_identity",
    "verify_multiloop_identity", "verify_constraint_on_z", "constraint_residual",
    "loop_identity_residual", "multiloop_residual", "matchings", "count_cycles", "trace_word",
]
