"""Named operator families and action-level checks of their brackets."""

from __future__ import annotations

from fractions import Fraction
from typing import Iterable, Sequence

from .exactcore import NLaurent, IndexMultiset, Partition
from .report import Report, window_check
from .weyl import (
    J0_DERIVATIVE,
    CurrentMode,
    GeneralizedConstraint,
    HatL,
    OperatorFamily,
    Product,
    SugawaraMode,
    Sum,
    TPolynomial,
    VirasoroConstraint,
    WeylOperator,
    apply,
    commutator_action,
)

DEFAULT_LEVEL = 2


def _check_level(k: int) -> int:
    if k < 1:
        raise ValueError(f"level must be >= 1, got {k}")
    return k


def virasoro_constraint(n: int) -> VirasoroConstraint:
    return VirasoroConstraint(n)


def generalized_constraint(n: int, lam: Iterable[int] = ()) -> GeneralizedConstraint:
    """The constraint L_{n;lam}.  Part 0 is accepted (it appears inside brackets)."""
    return GeneralizedConstraint(n, IndexMultiset(lam))


def current_mode(n: int, k: int = DEFAULT_LEVEL, j0: str = J0_DERIVATIVE) -> CurrentMode:
    return CurrentMode(n, _check_level(k), j0)


def hat_l(n: int) -> HatL:
    return HatL(n)


def sugawara_mode(n: int, k: int = DEFAULT_LEVEL) -> SugawaraMode:
    return SugawaraMode(n, _check_level(k))


def derivative(*indices: int) -> WeylOperator:
    return WeylOperator.term(1, d=indices)


def virasoro_central(m: int, n: int) -> Fraction:
    """Central term of [L_m, L_n] at c = 1."""
    return Fraction(m ** 3 - m, 12) if m + n == 0 else Fraction(0)


def _window(window) -> tuple[int, int]:
    max_var, max_deg = window
    if max_var < 0 or max_deg < 0:
        raise ValueError("window bounds must be non-negative")
    return max_var, max_deg


def verify_virasoro_bracket(m: int, n: int, window=(6, 3), family: str = "hat") -> Report:
    """[L_m, L_n] - (m-n) L_{m+n} - (m^3-m)/12 δ_{m+n,0} annihilates the window.

    ``family="constraint"`` uses the constraint operators (needs m, n >= -1),
    ``family="hat"`` the full level-2 realization.
    """
    window = _window(window)
    make = VirasoroConstraint if family == "constraint" else HatL
    a, b = make(m), make(n)
    central = virasoro_central(m, n) if family == "hat" else Fraction(0)
    target = m + n
    target_op = make(target) if (m - n) and (family == "hat" or target >= -1) else None

    def lhs(p):
        return commutator_action(a, b, p)

    def rhs(p):
        out = p.scale(central)
        if target_op is not None:
            out = out + apply(target_op, p).scale(m - n)
        return out

    return window_check(f"virasoro-{family}", {"m": m, "n": n}, lhs, rhs, window)


def verify_kacmoody(m: int, n: int, window=(6, 3), k: int = DEFAULT_LEVEL) -> Report:
    window = _window(window)
    a, b = current_mode(m, k), current_mode(n, k)
    value = k * m if m + n == 0 else 0
    return window_check(
        "kacmoody", {"m": m, "n": n, "level": k},
        lambda p: commutator_action(a, b, p), lambda p: p.scale(value), window,
    )


def verify_mixed_bracket(n: int, j: int, window=(6, 3)) -> Report:
    """[L̂_n, ĵ_j] = -j ĵ_{n+j}."""
    window = _window(window)
    ell, cur, target = hat_l(n), current_mode(j), current_mode(n + j)
    return window_check(
        "mixed", {"n": n, "j": j},
        lambda p: commutator_action(ell, cur, p),
        lambda p: apply(target, p).scale(-j), window,
    )


def verify_sugawara(n: int, window=(6, 3), k: int = DEFAULT_LEVEL) -> Report:
    window = _window(window)
    s, h = sugawara_mode(n, k), hat_l(n)
    return window_check("sugawara", {"n": n, "level": k},
                        lambda p: apply(s, p), lambda p: apply(h, p), window)


def generalized_bracket_terms(n: int, lam: Sequence[int], m: int, mu: Sequence[int]
                              ) -> dict[tuple[int, IndexMultiset], int]:
    """Right-hand side of [L_{n;λ}, L_{m;μ}] as ``{(mode, multiset): coefficient}``.

    (n-m) L_{n+m;λ∪μ} + Σ_i λ_i L_{n;λ∪μ∪(m+λ_i)∖λ_i} - Σ_j μ_j L_{m;λ∪μ∪(n+μ_j)∖μ_j}
    """
    lam, mu = IndexMultiset(lam), IndexMultiset(mu)
    both = lam.union(mu.parts)
    out: dict[tuple[int, IndexMultiset], int] = {}

    def add(mode, parts, c):
        if not c:
            return
        key = (mode, parts)
        out[key] = out.get(key, 0) + c
        if not out[key]:
            del out[key]

    add(n + m, both, n - m)
    for part in lam.parts:
        add(n, both.remove(part).union([m + part]), part)
    for part in mu.parts:
        add(m, both.remove(part).union([n + part]), -part)
    return out


def generalized_bracket_rhs(n: int, lam, m: int, mu) -> Sum:
    terms = generalized_bracket_terms(n, lam, m, mu)
    return Sum(tuple((NLaurent.const(c), GeneralizedConstraint(mode, parts))
                     for (mode, parts), c in sorted(terms.items(), key=lambda kv: (kv[0][0], kv[0][1].parts))))


def verify_generalized_bracket(n: int, lam, m: int, mu, window=(6, 3)) -> Report:
    window = _window(window)
    a = generalized_constraint(n, lam)
    b = generalized_constraint(m, mu)
    rhs = generalized_bracket_rhs(n, lam, m, mu)
    report = window_check(
        "generalized", {"n": n, "lambda": list(lam), "m": m, "mu": list(mu)},
        lambda p: commutator_action(a, b, p), lambda p: apply(rhs, p), window,
    )
    report.details["rhs"] = [
        {"coeff": c, "n": mode, "lambda": list(parts.parts)}
        for (mode, parts), c in sorted(generalized_bracket_terms(n, lam, m, mu).items(),
                                       key=lambda kv: (kv[0][0], kv[0][1].parts))
    ]
    return report


def current_word(lam: Iterable[int], k: int = DEFAULT_LEVEL) -> Product:
    return Product(tuple(current_mode(part, k) for part in lam))


def verify_scaling_identity(n: int, lam, window=(6, 3)) -> Report:
    """ĵ_λ ∘ L̂_n acts as (2/N)^{l(λ)} L_{n;λ}."""
    window = _window(window)
    lam = Partition(lam)
    left = Product(current_word(lam.parts).factors + (hat_l(n),))
    factor = NLaurent.monomial(-lam.length, 2 ** lam.length)
    right = Sum(((factor, generalized_constraint(n, lam.parts)),))
    return window_check("scaling", {"n": n, "lambda": list(lam.parts)},
                        lambda p: apply(left, p), lambda p: apply(right, p), window)


def verify_factorization(n: int, lam, window=(6, 3)) -> Report:
    """L_{n;λ} acts as d_{λ_1}...d_{λ_l} ∘ L_n."""
    window = _window(window)
    lam = IndexMultiset(lam)
    gen = generalized_constraint(n, lam.parts)
    comp = Product((derivative(*lam.parts), virasoro_constraint(n)))
    return window_check("factorization", {"n": n, "lambda": list(lam.parts)},
                        lambda p: apply(gen, p), lambda p: apply(comp, p), window)


def generalized_constraint_region(max_mode: int, max_weight: int) -> list[tuple[int, Partition]]:
    from .exactcore import partitions_up_to

    return [(n, lam) for n in range(-1, max_mode + 1) for lam in partitions_up_to(max_weight)]


__all__ = [
    "virasoro_constraint", "generalized_constraint", "current_mode", "hat_l", "sugawara_mode",
    "derivative", "verify_virasoro_bracket", "verify_kacmoody", "verify_mixed_bracket",
    "verify_sugawara", "verify_generalized_bracket", "verify_scaling_identity",
    "verify_factorization", "generalized_bracket_terms", "generalized_bracket_rhs",
    "current_word", "OperatorFamily", "TPolynomial",
]
