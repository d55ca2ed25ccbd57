"""Displacement functions over the simplex indexed by the prefix alphabet.

Each relation r contributes f_r(x) = (1-x_r)(1-X_r)/(x_r X_r) where x_r
is the coordinate of its psi and X_r the mass of its retained class set.
The collection maxima F (five families) and G (all ten) are the objects
being minimized; their common minimizer is the equalizing point y whose
coordinates depend only on the shape of the alphabet element.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np

from .quartic import alpha
from .relations import Relation, build_F, build_G
from .words import PsiElement, PsiType, Word, enumerate_psi, psi_count, reduce

SUM_TOL = 1e-12
ARGMAX_RTOL = 1e-9


class PsiBasis:
    """Fixed coordinate order on the alphabet of one rank."""

    def __init__(self, n: int):
        self.n = n
        self.elements = enumerate_psi(n)
        self.size = len(self.elements)
        self.index = {p.word: i for i, p in enumerate(self.elements)}
        self.types = np.array([p.ptype.value for p in self.elements])
        self.type_masks = {t: self.types == t.value for t in PsiType}

    def index_of(self, psi) -> int:
        word = psi.word if isinstance(psi, PsiElement) else psi
        return self.index[word]

    def indices(self, psis: Iterable) -> np.ndarray:
        return np.fromiter(
            (self.index_of(p) for p in psis), dtype=np.int64
        )


@lru_cache(maxsize=None)
def basis(n: int) -> PsiBasis:
    return PsiBasis(n)


@dataclass(frozen=True)
class SimplexPoint:
    """Strictly positive coordinates over the alphabet summing to one."""

    basis: PsiBasis
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.shape != (self.basis.size,):
            raise ValueError(
                f"expected {self.basis.size} coordinates, got {v.shape}"
            )
        if not np.all(v > 0):
            raise ValueError("simplex coordinates must be strictly positive")
        total = math.fsum(v.tolist())
        if abs(total - 1.0) > SUM_TOL:
            raise ValueError(f"coordinates sum to {total!r}, not 1")
        object.__setattr__(self, "values", v)

    @property
    def n(self) -> int:
        return self.basis.n

    def coord(self, psi) -> float:
        return float(self.values[self.basis.index_of(psi)])


def uniform_point(n: int) -> SimplexPoint:
    b = basis(n)
    return SimplexPoint(b, np.full(b.size, 1.0 / b.size))


def random_interior_point(rng, n: int) -> SimplexPoint:
    b = basis(n)
    return SimplexPoint(b, rng.dirichlet(np.ones(b.size)))


@dataclass(frozen=True)
class DisplacementValue:
    value: float
    x_r: float
    X_r: float
    relation: Relation


def _masses(x: SimplexPoint, rel: Relation) -> tuple[float, float]:
    b = x.basis
    x_r = float(x.values[b.index_of(rel.psi)])
    X_r = math.fsum(float(x.values[b.index[w]]) for w in rel.psi_words)
    return x_r, X_r


def f_r(x: SimplexPoint, rel: Relation) -> DisplacementValue:
    """Evaluate one displacement function exactly as defined."""
    if rel.gamma.n != x.n:
        raise ValueError("relation and point have different ranks")
    x_r, X_r = _masses(x, rel)
    if x_r <= 0 or X_r <= 0:
        raise ValueError("displacement undefined at nonpositive masses")
    value = (1.0 - x_r) * (1.0 - X_r) / (x_r * X_r)
    return DisplacementValue(value, x_r, X_r, rel)


def grad_f_r(x: SimplexPoint, rel: Relation) -> np.ndarray:
    """Gradient over all alphabet coordinates; zero off the support.

    With A = -(1-x_r)/(x_r X_r^2) on every retained coordinate and
    B = -(1-X_r)/(x_r^2 X_r) on the psi coordinate; when psi is itself
    retained the two contributions add there.
    """
    b = x.basis
    x_r, X_r = _masses(x, rel)
    g = np.zeros(b.size)
    A = -(1.0 - x_r) / (x_r * X_r * X_r)
    B = -(1.0 - X_r) / (x_r * x_r * X_r)
    g[b.indices(rel.psi_set)] = A
    g[b.index_of(rel.psi)] += B
    return g


def hessian_form(x: SimplexPoint, rel: Relation, u: np.ndarray, v: np.ndarray) -> float:
    """Second-derivative quadratic form along directions u and v.

    f_r factors through the linear map x -> (x_r, X_r), so the ambient
    Hessian is the 2x2 Hessian of (1/z1 - 1)(1/z2 - 1) pulled back.
    """
    b = x.basis
    z1, z2 = _masses(x, rel)
    sel = b.indices(rel.psi_set)
    i_r = b.index_of(rel.psi)
    u1, u2 = u[i_r], float(np.sum(u[sel]))
    v1, v2 = v[i_r], float(np.sum(v[sel]))
    h00 = 2.0 * (1.0 - z2) / (z1**3 * z2)
    h01 = 1.0 / (z1**2 * z2**2)
    h11 = 2.0 * (1.0 - z1) / (z1 * z2**3)
    return h00 * u1 * v1 + h01 * (u1 * v2 + u2 * v1) + h11 * u2 * v2


def in_convexity_region(x: SimplexPoint, rel: Relation) -> bool:
    """Membership in the region where f_r is strictly convex."""
    x_r, X_r = _masses(x, rel)
    return x_r + X_r - x_r * X_r < 0.75


class DisplacementSystem:
    """Vectorized evaluation of a relation collection at simplex points."""

    def __init__(self, n: int, relations: Sequence[Relation]):
        self.n = n
        self.basis = basis(n)
        self.relations = list(relations)
        m, k = len(self.relations), self.basis.size
        self.S = np.zeros((m, k))
        self.r_idx = np.zeros(m, dtype=np.int64)
        for i, rel in enumerate(self.relations):
            self.S[i, self.basis.indices(rel.psi_set)] = 1.0
            self.r_idx[i] = self.basis.index_of(rel.psi)

    def masses(self, values: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        return values[self.r_idx], self.S @ values

    def values(self, values: np.ndarray) -> np.ndarray:
        xr, Xr = self.masses(values)
        return (1.0 - xr) * (1.0 - Xr) / (xr * Xr)

    def max(self, x: SimplexPoint) -> tuple[float, list[Relation]]:
        """Maximum value and every relation attaining it within tolerance."""
        vals = self.values(x.values)
        top = float(vals.max())
        hits = [
            self.relations[i]
            for i in range(len(self.relations))
            if vals[i] >= top * (1.0 - ARGMAX_RTOL)
        ]
        return top, hits

    def grad_weighted(self, values: np.ndarray, weights: np.ndarray) -> np.ndarray:
        """Gradient of sum_r w_r f_r(x); the smoothed-max building block."""
        xr, Xr = self.masses(values)
        A = -(1.0 - xr) / (xr * Xr * Xr)
        B = -(1.0 - Xr) / (xr * xr * Xr)
        g = self.S.T @ (weights * A)
        np.add.at(g, self.r_idx, weights * B)
        return g


@lru_cache(maxsize=None)
def F_system(n: int) -> DisplacementSystem:
    return DisplacementSystem(n, build_F(n))


@lru_cache(maxsize=None)
def G_system(n: int) -> DisplacementSystem:
    return DisplacementSystem(n, build_G(n))


def max_F(x: SimplexPoint) -> tuple[float, list[Relation]]:
    return F_system(x.n).max(x)


def max_G(x: SimplexPoint) -> tuple[float, list[Relation]]:
    return G_system(x.n).max(x)


def type_coordinate_values(n: int, alpha_value: float) -> dict[PsiType, float]:
    """The equalizing coordinate for each alphabet shape."""
    a = alpha_value
    m = 2 * n - 1
    b235 = m * (a - 1.0) / (
        (4 * n * n - 4 * n - 1) * m * a * a + (4 * n * n - 2) * a - m
    )
    return {
        PsiType.T1: 1.0 / (m * a + 1.0),
        PsiType.T2: b235,
        PsiType.T3: b235,
        PsiType.T4: m / (m + a),
        PsiType.T5: b235,
    }


def candidate_y(n: int, alpha_value: float) -> SimplexPoint:
    """The closed-form point at which every five-family value coincides.

    Its coordinate sum equals 1 precisely because alpha_value is a root
    of the rank-n quartic, so the sum check doubles as a root check.
    """
    lo, hi = (2 * n - 1) ** 2, (2 * n - 1) ** 3
    if not (lo < alpha_value < hi):
        raise ValueError(
            f"alpha {alpha_value} outside the certified range ({lo}, {hi})"
        )
    b = basis(n)
    by_type = type_coordinate_values(n, alpha_value)
    vals = np.empty(b.size)
    for t, mask in b.type_masks.items():
        vals[mask] = by_type[t]
    return SimplexPoint(b, vals)


def descent_direction(n: int) -> np.ndarray:
    """Tangent direction decreasing every non-4b family: ones off the
    conjugate shape, a negative balancing weight on it."""
    b = basis(n)
    u = np.ones(b.size)
    u[b.type_masks[PsiType.T4]] = -(1.0 + 4.0 * (n - 1) ** 2) / (2.0 * (n - 1))
    return u


def tau_word_map(n: int, i1: int, t1: int, i2: int, t2: int):
    """Letter swap x_i1^t1 <-> x_i2^t2 (and inverses) applied letterwise."""
    if i1 == i2:
        raise ValueError("swap needs two distinct indices")
    a, b = i1 * t1, i2 * t2
    table = {a: b, b: a, -a: -b, -b: -a}

    def apply(w: Word) -> Word:
        return reduce([table.get(g, g) for g in w.letters], n)

    return apply


def apply_tau(x: SimplexPoint, i1: int, t1: int, i2: int, t2: int) -> SimplexPoint:
    """Push the simplex point forward along the letter-swap symmetry."""
    b = x.basis
    tau = tau_word_map(b.n, i1, t1, i2, t2)
    vals = np.empty_like(x.values)
    for p, v in zip(b.elements, x.values):
        vals[b.index[tau(p.word)]] = v
    return SimplexPoint(b, vals)
