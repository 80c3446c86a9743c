from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Callable, Iterable

from .weyl import Key, TPolynomial, key_str, window_monomials


@dataclass
class Report:
    """Verdict of one verification case.

    ``passed`` is true iff ``counterexamples`` is empty.  ``details`` carries
    case-specific payload (right-hand side terms, residual series, ...).
    """

    suite: str
    case: Any
    window: Any = None
    counterexamples: list = field(default_factory=list)
    checked: int = 0
    details: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return not self.counterexamples

    def __bool__(self) -> bool:
        return self.passed

    def to_json(self) -> dict:
        return {
            "suite": self.suite,
            "case": _jsonable(self.case),
            "window": _jsonable(self.window),
            "pass": self.passed,
            "checked": self.checked,
            "counterexamples": _jsonable(self.counterexamples),
            **({"details": _jsonable(self.details)} if self.details else {}),
        }


def _jsonable(x):
    if hasattr(x, "to_json"):
        return x.to_json()
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, (int, float, str, bool)) or x is None:
        return x
    return str(x)


def window_check(
    suite: str,
    case: Any,
    lhs: Callable[[TPolynomial], TPolynomial],
    rhs: Callable[[TPolynomial], TPolynomial],
    window: tuple[int, int],
    monomials: Iterable[Key] | None = None,
    max_examples: int = 5,
) -> Report:
    """Compare two actions monomial by monomial over a window."""
    max_var, max_deg = window
    report = Report(suite, case, {"max_var": max_var, "max_deg": max_deg})
    keys = window_monomials(max_var, max_deg) if monomials is None else monomials
    failures = 0
    for key in keys:
        p = TPolynomial.monomial(key)
        a, b = lhs(p), rhs(p)
        report.checked += 1
        if a != b:
            failures += 1
            if len(report.counterexamples) < max_examples:
                report.counterexamples.append(
                    {"monomial": key_str(key), "lhs": str(a), "rhs": str(b)}
                )
    if failures > len(report.counterexamples):
        report.details["failures"] = failures
    return report
