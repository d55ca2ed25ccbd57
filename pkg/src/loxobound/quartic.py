"""The rank-indexed quartic and exact isolation of its dominant root.

For every rank n >= 2 the quartic has integer coefficients, three real
roots below 1 and a single root alpha_n above (2n-1)^2.  All sign
decisions run in exact rational arithmetic; floats appear only in the
presentation layer.  The dominant root feeds the displacement bound
log(alpha)/2 and the trace bound 2 sinh^2(log(alpha)/4).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Union

Rational = Union[int, Fraction]


@dataclass(frozen=True)
class Quartic:
    """Exact coefficients (c4, c3, c2, c1, c0) for one rank."""

    n: int
    coeffs: tuple[int, int, int, int, int]


@dataclass(frozen=True)
class AlphaRoot:
    """A sign-certified bracket around the dominant root."""

    n: int
    lo: Fraction
    hi: Fraction

    @property
    def value(self) -> float:
        return float((self.lo + self.hi) / 2)

    @property
    def width(self) -> Fraction:
        return self.hi - self.lo

    def contains(self, x: float) -> bool:
        return self.lo <= Fraction(x) <= self.hi


def coefficients(n: int) -> Quartic:
    """Exact integer coefficients; no floating intermediates."""
    if n < 2:
        raise ValueError(f"rank must be >= 2, got {n}")
    c4 = 8 * n**3 - 12 * n**2 + 2 * n + 1
    c3 = -64 * n**6 + 192 * n**5 - 192 * n**4 + 64 * n**3 + 4 * n**2 + 2 * n - 4
    c2 = -96 * n**5 + 224 * n**4 - 168 * n**3 + 52 * n**2 - 18 * n + 6
    c1 = 32 * n**5 - 112 * n**4 + 128 * n**3 - 68 * n**2 + 22 * n - 4
    c0 = 16 * n**4 - 32 * n**3 + 24 * n**2 - 8 * n + 1
    return Quartic(n, (c4, c3, c2, c1, c0))


def eval_exact(q: Quartic, x: Rational) -> Fraction:
    """Exact Horner evaluation."""
    x = Fraction(x)
    acc = Fraction(0)
    for c in q.coeffs:
        acc = acc * x + c
    return acc


def _sign(v: Fraction) -> int:
    return (v > 0) - (v < 0)


# Probe points with their factored closed forms and expected signs.  The
# closed forms are polynomial identities in n, checked exactly against
# Horner evaluation for every requested rank.
def _probes(n: int) -> list[tuple[str, Fraction, Callable[[int], Fraction], int]]:
    return [
        (
            "-2",
            Fraction(-2),
            lambda n: Fraction(
                (2 * n - 3)
                * (256 * n**5 - 608 * n**4 + 424 * n**3 - 36 * n**2 + 18 * n - 27)
            ),
            +1,
        ),
        (
            "-1/n",
            Fraction(-1, n),
            lambda n: Fraction(
                -(16 * n**8 - 48 * n**7 + 72 * n**6 - 84 * n**5 + 33 * n**4
                  + 10 * n**3 + 8 * n**2 - 6 * n - 1),
                n**4,
            ),
            -1,
        ),
        (
            "-1/(2n-1)",
            Fraction(-1, 2 * n - 1),
            lambda n: Fraction(32 * n**4 * (n - 1), (2 * n - 1) ** 3),
            +1,
        ),
        ("1", Fraction(1), lambda n: Fraction(-64 * n**4 * (n - 1) ** 2), -1),
        (
            "(2n-1)^2",
            Fraction((2 * n - 1) ** 2),
            lambda n: Fraction(
                -128 * n**4 * (2 * n**2 - 3 * n + 1) ** 3 * (4 * n**2 - 8 * n + 5)
            ),
            -1,
        ),
        (
            "(2n-1)^3",
            Fraction((2 * n - 1) ** 3),
            lambda n: Fraction(
                16 * (2 * n - 1) ** 4 * (n - 1) ** 2
                * (32 * n**7 - 80 * n**6 + 56 * n**5 + 4 * n**4 - 22 * n**3
                   + 16 * n**2 - 5 * n + 1)
            ),
            +1,
        ),
    ]


@dataclass(frozen=True)
class SignTableRow:
    label: str
    point: Fraction
    value: Fraction
    factored: Fraction
    expected_sign: int

    @property
    def passed(self) -> bool:
        return self.value == self.factored and _sign(self.value) == self.expected_sign


def sign_table(n: int) -> list[SignTableRow]:
    """Evaluate all six probe points exactly and compare with closed forms.

    The sign pattern (+, -, +, -, -, +) pins three roots inside (-2, 1)
    and one inside ((2n-1)^2, (2n-1)^3).
    """
    q = coefficients(n)
    rows = []
    for label, pt, factored, sign in _probes(n):
        rows.append(
            SignTableRow(label, pt, eval_exact(q, pt), factored(n), sign)
        )
    return rows


def _bisect(q: Quartic, lo: Fraction, hi: Fraction, tol: Fraction) -> tuple[Fraction, Fraction]:
    """Shrink a sign-changing bracket to width <= tol; signs preserved."""
    flo, fhi = eval_exact(q, lo), eval_exact(q, hi)
    if _sign(flo) == 0 or _sign(fhi) == 0 or _sign(flo) == _sign(fhi):
        raise RuntimeError(
            f"invalid bracket [{lo}, {hi}] for rank {q.n}: signs "
            f"{_sign(flo)}, {_sign(fhi)}"
        )
    while hi - lo > tol:
        mid = (lo + hi) / 2
        fmid = eval_exact(q, mid)
        if fmid == 0:
            # land exactly on the root: return a tight straddling bracket
            eps = tol / 4
            return mid - eps, mid + eps
        if _sign(fmid) == _sign(flo):
            lo, flo = mid, fmid
        else:
            hi, fhi = mid, fmid
    return lo, hi


DEFAULT_TOL = Fraction(1, 10**12)


def alpha(n: int, tol: Rational = DEFAULT_TOL) -> AlphaRoot:
    """Certified bracket around the unique root above (2n-1)^2."""
    tol = Fraction(tol)
    if tol <= 0:
        raise ValueError("tolerance must be positive")
    q = coefficients(n)
    lo, hi = _bisect(q, Fraction((2 * n - 1) ** 2), Fraction((2 * n - 1) ** 3), tol)
    root = AlphaRoot(n, lo, hi)
    # certificate: negative below, positive above
    if not (eval_exact(q, lo) < 0 < eval_exact(q, hi)):
        raise RuntimeError(f"bracket certificate failed for rank {n}")
    return root


def all_roots(n: int, tol: Rational = DEFAULT_TOL) -> list[tuple[Fraction, Fraction]]:
    """Four disjoint sign brackets: three in (-2, 1), one above (2n-1)^2."""
    tol = Fraction(tol)
    if tol <= 0:
        raise ValueError("tolerance must be positive")
    q = coefficients(n)
    cuts = [
        Fraction(-2),
        Fraction(-1, n),
        Fraction(-1, 2 * n - 1),
        Fraction(1),
        Fraction((2 * n - 1) ** 2),
        Fraction((2 * n - 1) ** 3),
    ]
    brackets = []
    for lo, hi in zip(cuts, cuts[1:]):
        slo, shi = _sign(eval_exact(q, lo)), _sign(eval_exact(q, hi))
        if slo == shi:
            continue
        brackets.append(_bisect(q, lo, hi, tol))
    if len(brackets) != 4:
        raise RuntimeError(
            f"expected 4 sign changes for rank {n}, found {len(brackets)}"
        )
    return brackets


def half_log_alpha(n: int, tol: Rational = DEFAULT_TOL) -> float:
    """The displacement lower bound log(alpha_n)/2."""
    return 0.5 * math.log(alpha(n, tol).value)


def trace_bound(n: int, tol: Rational = DEFAULT_TOL) -> float:
    """The trace-inequality lower bound 2 sinh^2(log(alpha_n)/4)."""
    return 2.0 * math.sinh(0.25 * math.log(alpha(n, tol).value)) ** 2


def alpha_row(n: int, tol: Rational = DEFAULT_TOL) -> dict:
    """One presentation row: coefficients, bracket, root, derived bounds."""
    q = coefficients(n)
    root = alpha(n, tol)
    a = root.value
    return {
        "n": n,
        "c4": q.coeffs[0],
        "c3": q.coeffs[1],
        "c2": q.coeffs[2],
        "c1": q.coeffs[3],
        "c0": q.coeffs[4],
        "alpha_lo": str(root.lo),
        "alpha_hi": str(root.hi),
        "alpha": a,
        "half_log_alpha": 0.5 * math.log(a),
        "trace_bound": 2.0 * math.sinh(0.25 * math.log(a)) ** 2,
    }
