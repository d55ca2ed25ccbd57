"""Minimizing the collection maxima over the simplex.

Two routes, kept deliberately independent.  The reduced route works in
the three shape coordinates (a, b, c), solves the equalization system in
closed form and certifies it with a first-order (KKT) residual; it is
the authoritative optimum.  The numerical route anneals a log-sum-exp
smoothing of the max and runs projected gradient descent from several
starts; it serves as a consistency check of the closed form.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

import numpy as np

from .displacement import (
    DisplacementSystem,
    PsiType,
    SimplexPoint,
    basis,
    candidate_y,
    type_coordinate_values,
)

CONSTRAINT_TOL = 1e-9


@dataclass(frozen=True)
class ReducedPoint:
    """Common coordinate values on the three shape groups.

    ``a`` sits on the squares, ``b`` on shapes 2/3/5, ``c`` on the
    conjugate shape; feasibility means 2na + 8n(n-1)^2 b + 4n(n-1)c = 1.
    """

    a: float
    b: float
    c: float

    def as_array(self) -> np.ndarray:
        return np.array([self.a, self.b, self.c])


def constraint_value(n: int, p: ReducedPoint) -> float:
    return 2 * n * p.a + 8 * n * (n - 1) ** 2 * p.b + 4 * n * (n - 1) * p.c


def _check_reduced(n: int, p: ReducedPoint) -> None:
    if not (0 < p.a < 1 and 0 < p.b < 1 and 0 < p.c < 1):
        raise ValueError(f"reduced coordinates must lie in (0,1): {p}")
    res = abs(constraint_value(n, p) - 1.0)
    if res > CONSTRAINT_TOL:
        raise ValueError(f"mass constraint violated by {res:.3e}")


def reduced_f(n: int, p: ReducedPoint) -> tuple[float, float, float]:
    """The three distinct displacement values on the reduced slice.

    Families 1a / {2b,3a,5a} / 4b collapse to one value each; the class
    mass of a 1a relation is always (2n-1)/(2n) on the slice.
    """
    _check_reduced(n, p)
    m = 2 * n - 1
    A = 4 * n * (n - 1) - (1.0 - 2 * n * p.a)
    f1 = (1.0 - p.a) / p.a / m
    f2 = (1.0 - p.b) / p.b * (1.0 - 2 * n * p.a) / A
    f3 = (1.0 - p.c) / p.c * m
    return f1, f2, f3


def lift(n: int, p: ReducedPoint) -> SimplexPoint:
    """Expand shape coordinates to the full simplex (renormalized exactly)."""
    _check_reduced(n, p)
    b = basis(n)
    vals = np.empty(b.size)
    vals[b.type_masks[PsiType.T1]] = p.a
    for t in (PsiType.T2, PsiType.T3, PsiType.T5):
        vals[b.type_masks[t]] = p.b
    vals[b.type_masks[PsiType.T4]] = p.c
    vals /= math.fsum(vals.tolist())
    return SimplexPoint(b, vals)


def closed_form_optimum(n: int, alpha_value: float) -> ReducedPoint:
    """Equalization solution of the three reduced values set equal.

    Verifies that the result is feasible and that all three values agree
    with alpha_value; a failure indicates an inconsistent alpha.
    """
    m = 2 * n - 1
    a = 1.0 / (1.0 + m * alpha_value)
    bvals = type_coordinate_values(n, alpha_value)
    p = ReducedPoint(a, bvals[PsiType.T2], bvals[PsiType.T4])
    res = abs(constraint_value(n, p) - 1.0)
    if res > CONSTRAINT_TOL:
        raise RuntimeError(
            f"equalization point misses the mass constraint by {res:.3e}; "
            f"alpha={alpha_value!r} is not a root"
        )
    for v in reduced_f(n, p):
        if abs(v - alpha_value) > 1e-9 * alpha_value:
            raise RuntimeError(
                f"equalization failed: value {v!r} vs alpha {alpha_value!r}"
            )
    return p


def closed_form_comparison(n: int, alpha_value: float) -> dict:
    """Diagnostics for the two candidate square-shape formulas.

    The adopted a* = 1/(1 + (2n-1) alpha) solves the equalization
    equation; the c*-patterned variant 1/((2n-1) + alpha) does not, and
    the report quantifies both residuals rather than asserting taste.
    """
    m = 2 * n - 1

    def diag(a):
        bvals = type_coordinate_values(n, alpha_value)
        p = ReducedPoint(a, bvals[PsiType.T2], bvals[PsiType.T4])
        con = abs(constraint_value(n, p) - 1.0)
        f1 = (1.0 - a) / a / m
        return {
            "a": a,
            "constraint_residual": con,
            "equalization_residual": abs(f1 - alpha_value) / alpha_value,
        }

    return {
        "adopted": diag(1.0 / (1.0 + m * alpha_value)),
        "variant": diag(1.0 / (m + alpha_value)),
        "note": (
            "square-shape coordinate: adopted form satisfies both the mass "
            "constraint and equalization; the variant form does not"
        ),
    }


# -- first-order certificate ------------------------------------------------

@dataclass(frozen=True)
class KktCertificate:
    point: ReducedPoint
    multipliers: tuple[float, float, float]
    residual: float
    breakdown: dict


def _objective_grads(n: int, p: ReducedPoint):
    """Gradients of the reduced target, both inequality constraints, and
    the mass constraint at p."""
    a, b, c = p.a, p.b, p.c
    m = 2 * n - 1
    A = 4 * n * (n - 1) - (1.0 - 2 * n * a)
    gf = np.array([0.0, 0.0, -m / c**2])
    g1 = (1.0 - a) / a * c / (1.0 - c) - m * m
    gg1 = np.array([
        -c / (a * a * (1.0 - c)),
        0.0,
        (1.0 - a) / (a * (1.0 - c) ** 2),
    ])
    g2 = (1.0 - 2 * n * a) / A * (1.0 - b) / b * c / (1.0 - c) - m
    gg2 = np.array([
        -8 * n * n * (n - 1) / A**2 * (1.0 - b) / b * c / (1.0 - c),
        -(1.0 - 2 * n * a) / A / (b * b) * c / (1.0 - c),
        (1.0 - 2 * n * a) / A * (1.0 - b) / b / (1.0 - c) ** 2,
    ])
    gh = np.array([2.0 * n, 8.0 * n * (n - 1) ** 2, 4.0 * n * (n - 1)])
    return gf, g1, gg1, g2, gg2, gh


def kkt_solve(n: int, p: ReducedPoint) -> KktCertificate:
    """Solve the 3x3 stationarity system and score the full conditions.

    The residual aggregates stationarity, primal feasibility of both
    routes, complementarity, and multiplier signs, so it vanishes only
    at a genuine constrained minimizer.
    """
    gf, g1, gg1, g2, gg2, gh = _objective_grads(n, p)
    M = np.column_stack([gg1, gg2, gh])
    try:
        lam = np.linalg.solve(M, -gf)
    except np.linalg.LinAlgError as exc:
        raise RuntimeError(
            f"constraint gradients are singular at {p}: {exc}"
        ) from exc
    stationarity = float(np.abs(gf + M @ lam).max())
    h_res = abs(constraint_value(n, p) - 1.0)
    breakdown = {
        "stationarity": stationarity,
        "g1": g1,
        "g2": g2,
        "mass_residual": h_res,
        "complementarity_1": abs(lam[0] * g1),
        "complementarity_2": abs(lam[1] * g2),
        "dual_violation": max(-lam[0], -lam[1], 0.0),
        "primal_violation": max(g1, g2, 0.0),
    }
    residual = max(
        stationarity,
        h_res,
        breakdown["complementarity_1"],
        breakdown["complementarity_2"],
        breakdown["dual_violation"],
        breakdown["primal_violation"],
    )
    return KktCertificate(p, tuple(float(v) for v in lam), residual, breakdown)


def qualification_direction(n: int) -> np.ndarray:
    """A direction along the mass constraint strictly into both
    inequality constraints."""
    return np.array([2.0 * (n - 1), 0.0, -1.0])


def qualification_products(n: int, p: ReducedPoint) -> tuple[float, float, float]:
    """(grad h . d, grad g1 . d, grad g2 . d) for the witness direction."""
    _, _, gg1, _, gg2, gh = _objective_grads(n, p)
    d = qualification_direction(n)
    return float(gh @ d), float(gg1 @ d), float(gg2 @ d)


# -- simplex projection -----------------------------------------------------

def project_simplex(v: np.ndarray, floor: float = 1e-12) -> np.ndarray:
    """Euclidean projection onto {x >= floor, sum x = 1}.

    Sort-based threshold search; feasible inputs are returned unchanged.
    """
    v = np.asarray(v, dtype=float)
    k = v.size
    mass = 1.0 - k * floor
    if mass <= 0:
        raise ValueError(f"floor {floor} infeasible for {k} coordinates")
    if np.all(v >= floor) and abs(v.sum() - 1.0) <= 1e-15 * k:
        return v.copy()
    y = v - floor
    u = np.sort(y)[::-1]
    css = np.cumsum(u)
    j = np.arange(1, k + 1)
    tau = (css - mass) / j
    rho = int(np.nonzero(u > tau)[0][-1])
    z = np.maximum(y - tau[rho], 0.0)
    return z + floor


# -- annealed smoothed minimax ----------------------------------------------

@dataclass(frozen=True)
class OptimizeConfig:
    seed: int = 42
    multistarts: int = 8
    max_iters: int = 10000
    stages: int = 20
    t0: float = 1.0
    floor: float = 1e-12
    armijo: float = 1e-4
    stage_rtol: float = 1e-12
    threads: int = 1


@dataclass
class StartTrace:
    start: int
    value: float
    iterations: int
    stage_values: list = field(default_factory=list)
    floor_clips: int = 0


@dataclass
class MinimaxResult:
    point: SimplexPoint
    value: float
    converged: bool
    best_start: int
    starts: list
    config: OptimizeConfig


def _smoothed(system: DisplacementSystem, x: np.ndarray, t: float):
    """Log-sum-exp smoothing of log max f_r; scale-free in the rank.

    The values span orders of magnitude away from the optimum, so the
    temperature is applied to log f_r (same minimizer, O(1) spreads).
    Returns the smoothed objective and the gradient weights w_r / f_r.
    """
    vals = system.values(x)
    lv = np.log(vals)
    m = float(lv.max())
    e = np.exp((lv - m) / t)
    phi = m + t * math.log(float(e.sum()))
    return phi, (e / e.sum()) / vals


def _run_start(system, x0, cfg: OptimizeConfig, start_id: int) -> tuple[np.ndarray, StartTrace]:
    x = project_simplex(x0, cfg.floor)
    trace = StartTrace(start_id, math.inf, 0)
    per_stage = max(cfg.max_iters // cfg.stages, 1)
    eta = 1e-2
    for stage in range(cfg.stages):
        t = cfg.t0 * 0.5**stage
        phi, w = _smoothed(system, x, t)
        it = 0
        while it < per_stage and trace.iterations < cfg.max_iters:
            g = system.grad_weighted(x, w)
            g -= g.mean()  # tangent component; steps in coordinate units
            gnorm = float(np.linalg.norm(g))
            if gnorm == 0.0:
                break
            d = g / gnorm
            improved = False
            eta = min(eta * 2.0, 1.0)
            while eta > 1e-16:
                xn = project_simplex(x - eta * d, cfg.floor)
                if np.min(xn) <= cfg.floor:
                    trace.floor_clips += 1
                phin, wn = _smoothed(system, xn, t)
                if phin <= phi - cfg.armijo * gnorm * float(d @ (x - xn)):
                    improved = phi - phin > cfg.stage_rtol * max(abs(phi), 1.0)
                    x, phi, w = xn, phin, wn
                    break
                eta *= 0.5
            it += 1
            trace.iterations += 1
            if not improved:
                break
        trace.stage_values.append((stage, t, it, phi))
    trace.value = float(system.values(x).max())
    return x, trace


def minimize_max(system: DisplacementSystem, cfg: Optional[OptimizeConfig] = None) -> MinimaxResult:
    """Annealed smoothed-max descent over the simplex, multistarted.

    Each start anneals the log-sum-exp temperature through fixed stages
    and runs projected gradient steps with backtracking inside each
    stage.  Starts are merged by minimum value with index tie-break, so
    the result is deterministic for a given seed.
    """
    cfg = cfg or OptimizeConfig()
    rng = np.random.default_rng(cfg.seed)
    k = system.basis.size
    starts = [np.full(k, 1.0 / k)]
    while len(starts) < cfg.multistarts:
        starts.append(rng.dirichlet(np.ones(k)))

    if cfg.threads > 1:
        with ThreadPoolExecutor(max_workers=cfg.threads) as pool:
            outcomes = list(
                pool.map(lambda sx: _run_start(system, sx[1], cfg, sx[0]),
                         enumerate(starts))
            )
    else:
        outcomes = [_run_start(system, s, cfg, i) for i, s in enumerate(starts)]

    best = min(range(len(outcomes)), key=lambda i: (outcomes[i][1].value, i))
    x_best, _ = outcomes[best]
    values = [o[1].value for o in outcomes]
    spread = (max(values) - min(values)) / max(abs(min(values)), 1.0)
    stages = outcomes[best][1].stage_values
    stalled = True
    if len(stages) > 1:
        (_, t_prev, _, phi_prev), (_, t_last, _, phi_last) = stages[-2], stages[-1]
        # progress beyond the shrinking smoothing bias
        bias_drop = (t_prev - t_last) * math.log(len(system.relations))
        stalled = abs((phi_prev - phi_last) - bias_drop) <= 1e-5 * max(abs(phi_last), 1.0)
    return MinimaxResult(
        point=SimplexPoint(system.basis, x_best),
        value=outcomes[best][1].value,
        converged=bool(stalled or (len(values) >= 2 and spread < 1e-6)),
        best_start=best,
        starts=[o[1] for o in outcomes],
        config=cfg,
    )


def minimize_F(n: int, cfg: Optional[OptimizeConfig] = None) -> MinimaxResult:
    from .displacement import F_system

    return minimize_max(F_system(n), cfg)


def minimize_G(n: int, cfg: Optional[OptimizeConfig] = None) -> MinimaxResult:
    from .displacement import G_system

    return minimize_max(G_system(n), cfg)
