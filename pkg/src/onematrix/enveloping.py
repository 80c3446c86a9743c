"""PBW basis ĵ_μ† ĵ_λ L̂_Λ of the enveloping algebra of {ĵ_m, L̂_n}.

Relations (level 2, c = 1):
    [ĵ_m, ĵ_n] = 2m δ_{m+n,0}
    [L̂_n, L̂_m] = (n-m) L̂_{n+m} + (n³-n)/12 δ_{n+m,0}
    [L̂_n, ĵ_j] = -j ĵ_{n+j}

Generators are encoded as sort keys ``(block, mode)``: block 0 = creation
current (mode < 0), 1 = annihilation current (mode >= 0), 2 = Virasoro.  A word
is canonical exactly when its keys are weakly increasing.
"""

from __future__ import annotations

import csv
import io
import random
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Mapping, Sequence, Union

from .exactcore import ZERO, GeneralizedPartition, IndexMultiset, NLaurent, Partition, Scalar
from .report import Report, window_check
from .weyl import IDENTITY, CurrentMode, HatL, OperatorFamily, Product, Sum, apply, commutator_action

LEVEL = 2
CENTRAL_CHARGE = Fraction(1)

CREATION, ANNIHILATION, VIRASORO = 0, 1, 2


@dataclass(frozen=True)
class CurrentGen:
    mode: int

    @property
    def key(self) -> tuple[int, int]:
        return (CREATION if self.mode < 0 else ANNIHILATION, self.mode)


@dataclass(frozen=True)
class VirGen:
    mode: int

    @property
    def key(self) -> tuple[int, int]:
        return (VIRASORO, self.mode)


@dataclass(frozen=True)
class Central:
    """Central element: ``"current-level"`` (value 2) or ``"virasoro-c"`` (value 1)."""

    kind: str

    @property
    def value(self) -> Fraction:
        if self.kind == "current-level":
            return Fraction(LEVEL)
        if self.kind == "virasoro-c":
            return CENTRAL_CHARGE
        raise ValueError(f"unknown central element {self.kind!r}")


Generator = Union[CurrentGen, VirGen, Central]


def _current_key(mode: int) -> tuple[int, int]:
    return (CREATION if mode < 0 else ANNIHILATION, mode)


@dataclass(frozen=True, order=True)
class CanonicalWord:
    """ĵ_{-μ_1}…ĵ_{-μ_r} ĵ_{λ_1}…ĵ_{λ_s} L̂_{Λ_1}…L̂_{Λ_t} (empty word = 1)."""

    mu: Partition = Partition()
    lam: IndexMultiset = IndexMultiset()
    Lam: GeneralizedPartition = GeneralizedPartition()

    @classmethod
    def from_keys(cls, keys: Sequence[tuple[int, int]]) -> "CanonicalWord":
        return cls(
            Partition(-m for b, m in keys if b == CREATION),
            IndexMultiset(m for b, m in keys if b == ANNIHILATION),
            GeneralizedPartition(m for b, m in keys if b == VIRASORO),
        )

    @classmethod
    def of(cls, mu=(), lam=(), Lam=()) -> "CanonicalWord":
        return cls(Partition(mu), IndexMultiset(lam), GeneralizedPartition(Lam))

    def keys(self) -> tuple[tuple[int, int], ...]:
        return (tuple(sorted((CREATION, -p) for p in self.mu.parts))
                + tuple((ANNIHILATION, p) for p in self.lam.parts)
                + tuple((VIRASORO, p) for p in self.Lam.parts))

    def generators(self) -> list[Generator]:
        return [VirGen(m) if b == VIRASORO else CurrentGen(m) for b, m in self.keys()]

    def __len__(self) -> int:
        return len(self.mu) + len(self.lam) + len(self.Lam)

    def __str__(self) -> str:
        if not len(self):
            return "1"
        return "".join(f"L({m})" if b == VIRASORO else f"j({m})" for b, m in self.keys())

    def to_json(self) -> dict:
        return {"mu": self.mu.to_json(), "lambda": self.lam.to_json(), "Lambda": self.Lam.to_json()}


UNIT_WORD = CanonicalWord()


class EnvElement:
    """Finite linear combination of canonical words."""

    __slots__ = ("_terms",)

    def __init__(self, terms: Mapping[CanonicalWord, Scalar] | None = None):
        clean = {}
        if terms:
            for w, c in terms.items():
                c = NLaurent.coerce(c)
                if c:
                    clean[w] = clean.get(w, ZERO) + c
        self._terms = {w: c for w, c in clean.items() if c}

    @classmethod
    def word(cls, *gens: Generator) -> "EnvElement":
        """Straightened product of the given generators."""
        return straighten(gens)

    @classmethod
    def scalar(cls, c: Scalar) -> "EnvElement":
        return cls({UNIT_WORD: c})

    def items(self):
        return sorted(self._terms.items())

    def coefficient(self, w: CanonicalWord) -> NLaurent:
        return self._terms.get(w, ZERO)

    def __len__(self) -> int:
        return len(self._terms)

    def is_zero(self) -> bool:
        return not self._terms

    def __add__(self, other: "EnvElement") -> "EnvElement":
        out = dict(self._terms)
        for w, c in other._terms.items():
            out[w] = out.get(w, ZERO) + c
        return EnvElement(out)

    def __neg__(self) -> "EnvElement":
        return EnvElement({w: -c for w, c in self._terms.items()})

    def __sub__(self, other: "EnvElement") -> "EnvElement":
        return self + (-other)

    def scale(self, c: Scalar) -> "EnvElement":
        c = NLaurent.coerce(c)
        return EnvElement({w: v * c for w, v in self._terms.items()})

    def __mul__(self, other: "EnvElement") -> "EnvElement":
        return env_multiply(self, other)

    def __eq__(self, other) -> bool:
        if not isinstance(other, EnvElement):
            return NotImplemented
        return self._terms == other._terms

    def __hash__(self):
        return hash(frozenset(self._terms.items()))

    def n_free(self) -> bool:
        return all(c.is_constant() for c in self._terms.values())

    def __str__(self) -> str:
        if not self._terms:
            return "0"
        return " + ".join(f"({c})*{w}" if len(w) else f"({c})" for w, c in self.items())

    __repr__ = __str__

    def to_json(self) -> list:
        return [{**w.to_json(), "coeff": c.to_json()} for w, c in self.items()]

    @classmethod
    def from_json(cls, data: list) -> "EnvElement":
        return cls({CanonicalWord.of(t["mu"], t["lambda"], t["Lambda"]): NLaurent.from_json(t["coeff"])
                    for t in data})


def _gen_keys(gens: Iterable[Generator]) -> tuple[tuple[tuple[int, int], ...], Fraction]:
    keys, scalar = [], Fraction(1)
    for g in gens:
        if isinstance(g, Central):
            scalar *= g.value
        elif isinstance(g, tuple):
            keys.append(g)
        else:
            keys.append(g.key)
    return tuple(keys), scalar


def _swap_corrections(left, right) -> list[tuple[Fraction, tuple]]:
    """``left·right - right·left`` for an out-of-order adjacent pair, as (coeff, replacement)."""
    (b1, m1), (b2, m2) = left, right
    if b1 == VIRASORO and b2 == VIRASORO:
        out = [(Fraction(m1 - m2), ((VIRASORO, m1 + m2),))]
        if m1 + m2 == 0:
            out.append((CENTRAL_CHARGE * Fraction(m1 ** 3 - m1, 12), ()))
        return out
    if b1 == VIRASORO:
        return [(Fraction(-m2), (_current_key(m1 + m2),))]
    if b1 == ANNIHILATION and b2 == CREATION:
        return [(Fraction(LEVEL * m1), ())] if m1 + m2 == 0 else []
    return []


def _straighten_keys(keys: tuple, pick=None) -> dict[tuple, Fraction]:
    bad = [i for i in range(len(keys) - 1) if keys[i] > keys[i + 1]]
    if not bad:
        return {keys: Fraction(1)}
    i = bad[0] if pick is None else pick(bad)
    rec = _straighten_cached if pick is None else (lambda k: _straighten_keys(k, pick))
    out: dict[tuple, Fraction] = {}

    def add(res, c):
        for w, v in res.items():
            s = out.get(w, 0) + c * v
            if s:
                out[w] = s
            else:
                out.pop(w, None)

    left, right = keys[i], keys[i + 1]
    add(rec(keys[:i] + (right, left) + keys[i + 2:]), 1)
    for c, repl in _swap_corrections(left, right):
        if c:
            add(rec(keys[:i] + repl + keys[i + 2:]), c)
    return out


@lru_cache(maxsize=None)
def _straighten_cached(keys: tuple) -> dict[tuple, Fraction]:
    return _straighten_keys(keys)


def straighten(word: Iterable[Generator], rng: random.Random | None = None) -> EnvElement:
    """Rewrite a product of generators in the canonical basis.

    With ``rng`` the disordered pair to swap is chosen at random at every step
    (used to test that the result does not depend on the rewrite order).
    """
    keys, scalar = _gen_keys(word)
    if rng is None:
        res = _straighten_cached(keys)
    else:
        res = _straighten_keys(keys, pick=rng.choice)
    return EnvElement({CanonicalWord.from_keys(w): c * scalar for w, c in res.items()})


def env_multiply(a: EnvElement, b: EnvElement) -> EnvElement:
    out: dict[CanonicalWord, NLaurent] = {}
    for wa, ca in a._terms.items():
        for wb, cb in b._terms.items():
            for w, c in _straighten_cached(wa.keys() + wb.keys()).items():
                cw = CanonicalWord.from_keys(w)
                out[cw] = out.get(cw, ZERO) + ca * cb * c
    return EnvElement(out)


def env_bracket(a: EnvElement, b: EnvElement) -> EnvElement:
    return env_multiply(a, b) - env_multiply(b, a)


def canonical(mu=(), lam=(), Lam=(), coeff: Scalar = 1) -> EnvElement:
    return EnvElement({CanonicalWord.of(mu, lam, Lam): coeff})


def realize_generator(key: tuple[int, int]) -> OperatorFamily:
    block, m = key
    return HatL(m) if block == VIRASORO else CurrentMode(m, LEVEL)


def realize_word(w: CanonicalWord) -> OperatorFamily:
    if not len(w):
        return IDENTITY
    return Product(tuple(realize_generator(k) for k in w.keys()))


def realize(e: EnvElement) -> Sum:
    """Differential-operator realization; a word acts as the composite in written order."""
    return Sum(tuple((c, realize_word(w)) for w, c in e.items()))


def oracle_check(a: EnvElement, b: EnvElement, window=(6, 3)) -> Report:
    """realize([a, b]) must act as the commutator of realize(a) and realize(b)."""
    bracket = env_bracket(a, b)
    ra, rb, rab = realize(a), realize(b), realize(bracket)
    report = window_check(
        "enveloping", {"a": str(a), "b": str(b)},
        lambda p: apply(rab, p), lambda p: commutator_action(ra, rb, p), tuple(window),
    )
    report.details["bracket"] = str(bracket)
    if not bracket.n_free():
        report.counterexamples.append({"structure_constants": "depend on N", "bracket": str(bracket)})
    return report


def random_canonical_word(rng: random.Random, max_mode: int = 2, max_len: int = 2) -> CanonicalWord:
    length = rng.randint(1, max_len)
    keys = []
    for _ in range(length):
        if rng.random() < 0.5:
            keys.append(_current_key(rng.randint(-max_mode, max_mode)))
        else:
            keys.append((VIRASORO, rng.randint(-max_mode, max_mode)))
    return CanonicalWord.from_keys(sorted(keys))


def random_pairs(count: int, seed: int = 0, max_mode: int = 2, max_len: int = 2
                 ) -> list[tuple[EnvElement, EnvElement]]:
    rng = random.Random(seed)
    out = []
    for _ in range(count):
        a = random_canonical_word(rng, max_mode, max_len)
        b = random_canonical_word(rng, max_mode, max_len)
        out.append((EnvElement({a: 1}), EnvElement({b: 1})))
    return out


def structure_constants_csv(pairs: Iterable[tuple[CanonicalWord, CanonicalWord]]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["left", "right", "result", "coefficient"])
    for left, right in pairs:
        br = env_bracket(EnvElement({left: 1}), EnvElement({right: 1}))
        for w, c in br.items():
            writer.writerow([str(left), str(right), str(w), str(c)])
    return buf.getvalue()


__all__ = [
    "CurrentGen", "VirGen", "Central", "CanonicalWord", "EnvElement", "straighten",
    "env_multiply", "env_bracket", "realize", "oracle_check", "canonical", "random_pairs",
    "structure_constants_csv", "UNIT_WORD",
]
