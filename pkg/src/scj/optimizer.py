"""Numerical optimization of the jamming parameters against the
closed-form secrecy capacity.

The objectives are quadrature outputs with flat regions and frequent
boundary optima, so every solve runs a coarse grid over the box followed
by golden-section refinement inside the best bracket.  Ties break toward
the smaller parameter (prefer less jamming at equal capacity).
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

from .analytic import (
    QuadratureConfig,
    connection_probability,
    nsee,
    secrecy_probability,
    stc,
)
from .core import SystemParams

INV_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class SolverConfig:
    grid_points: int = 21
    refine_iters: int = 24
    fraction_points: int = 9   # budget split grid of the joint problems
    quadrature: QuadratureConfig | None = None
    threads: int = 1


@dataclass
class OptimizationResult:
    argmax: dict
    value: float
    trace: list = field(default_factory=list)  # (point dict, value) in evaluation order


def _objective(params: SystemParams, scheme: str, qc) -> float:
    p_c = connection_probability(params, scheme, qc)
    p_s = secrecy_probability(params, scheme, qc)
    return stc(p_c, p_s, params)


def _solve_scalar(eval_at, lo, hi, cfg: SolverConfig, name: str) -> OptimizationResult:
    """Grid + golden-section maximization of a scalar objective on a box.

    Strict-improvement acceptance makes the smallest argument win ties,
    and the refinement never leaves the bracket around the grid best.
    """
    trace = []
    best_x, best_v = lo, -math.inf

    def probe(x):
        nonlocal best_x, best_v
        v = eval_at(x)
        trace.append(({name: x}, v))
        if v > best_v:
            best_x, best_v = x, v
        return v

    n = max(cfg.grid_points, 2)
    xs = [lo + (hi - lo) * i / (n - 1) for i in range(n)]
    vals = [probe(x) for x in xs]
    i = vals.index(max(vals))
    a = xs[max(i - 1, 0)]
    b = xs[min(i + 1, n - 1)]
    x1 = b - INV_GOLDEN * (b - a)
    x2 = a + INV_GOLDEN * (b - a)
    f1, f2 = probe(x1), probe(x2)
    for _ in range(cfg.refine_iters):
        if b - a < 1e-12:
            break
        if f1 < f2:
            a, x1, f1 = x1, x2, f2
            x2 = a + INV_GOLDEN * (b - a)
            f2 = probe(x2)
        else:
            b, x2, f2 = x2, x1, f1
            x1 = b - INV_GOLDEN * (b - a)
            f1 = probe(x1)
    return OptimizationResult(argmax={name: best_x}, value=best_v, trace=trace)


def solve_p1(params: SystemParams, cfg: SolverConfig | None = None) -> OptimizationResult:
    """Best in-ball activation probability for the sight-based scheme."""
    cfg = cfg or SolverConfig()
    qc = cfg.quadrature

    def at(rho):
        return _objective(params.replace(rho=rho), "scj", qc)

    return _solve_scalar(at, 0.0, 1.0, cfg, "rho")


def solve_p2(params: SystemParams, cfg: SolverConfig | None = None) -> OptimizationResult:
    """Best activation fraction for the partial-jamming baseline."""
    cfg = cfg or SolverConfig()
    qc = cfg.quadrature

    def at(varrho):
        return _objective(params.replace(varrho=varrho), "pj", qc)

    return _solve_scalar(at, 0.0, 1.0, cfg, "varrho")


def _budget_point(args):
    params, scheme, epsilon, frac, cfg = args
    lam_T = frac * epsilon
    lam_P = epsilon - lam_T
    sub = params.replace(lambda_T=lam_T, lambda_P=lam_P)
    inner = solve_p1(sub, cfg) if scheme == "scj" else solve_p2(sub, cfg)
    return lam_T, lam_P, inner


def _solve_budget(params: SystemParams, scheme: str, epsilon: float,
                  cfg: SolverConfig) -> OptimizationResult:
    """Joint maximization over the activation knob and the legitimate-node
    budget split lambda_T + lambda_P <= epsilon.

    The capacity at the inner optimum never decreases with more potential
    jammers (the activation knob can always ignore them), so the budget
    constraint binds and a fraction grid over lambda_T suffices.
    """
    if epsilon < 0:
        raise ValueError("epsilon must be >= 0")
    key = "rho" if scheme == "scj" else "varrho"
    if epsilon == 0.0:
        return OptimizationResult(
            argmax={key: 0.0, "lambda_T": 0.0, "lambda_P": 0.0},
            value=0.0, trace=[({key: 0.0, "lambda_T": 0.0, "lambda_P": 0.0}, 0.0)])
    n = max(cfg.fraction_points, 2)
    fracs = [i / (n - 1) for i in range(1, n)]  # lambda_T = 0 gives zero capacity
    jobs = [(params, scheme, epsilon, f, cfg) for f in fracs]
    if cfg.threads > 1:
        with ProcessPoolExecutor(max_workers=cfg.threads) as pool:
            results = list(pool.map(_budget_point, jobs))
    else:
        results = [_budget_point(j) for j in jobs]
    trace = []
    best = None
    for lam_T, lam_P, inner in results:
        point = dict(inner.argmax)
        point.update({"lambda_T": lam_T, "lambda_P": lam_P})
        trace.append((point, inner.value))
        # strict improvement: the smaller lambda_P (scanned last) never
        # displaces an equal-value solution with more jammers... scan
        # order is ascending lambda_T, i.e. descending lambda_P, so
        # prefer later points only on strict improvement reversed below
        if best is None or inner.value > best[1] or (
                inner.value == best[1] and (lam_P, point[key]) < (best[0]["lambda_P"], best[0][key])):
            best = (point, inner.value)
    return OptimizationResult(argmax=best[0], value=best[1], trace=trace)


def solve_p3(params: SystemParams, epsilon: float,
             cfg: SolverConfig | None = None) -> OptimizationResult:
    """Sight-based scheme under a total legitimate-density budget."""
    return _solve_budget(params, "scj", epsilon, cfg or SolverConfig())


def solve_p4(params: SystemParams, epsilon: float,
             cfg: SolverConfig | None = None) -> OptimizationResult:
    """Partial-jamming baseline under the same budget."""
    return _solve_budget(params, "pj", epsilon, cfg or SolverConfig())


def nsee_at_optimum(params: SystemParams, scheme: str, epsilon: float,
                    cfg: SolverConfig | None = None) -> float:
    """Energy efficiency of the budget-constrained optimum."""
    cfg = cfg or SolverConfig()
    res = solve_p3(params, epsilon, cfg) if scheme == "scj" else solve_p4(params, epsilon, cfg)
    knob = {"rho": res.argmax.get("rho")} if scheme == "scj" else {"varrho": res.argmax.get("varrho")}
    at = params.replace(lambda_T=res.argmax["lambda_T"],
                        lambda_P=res.argmax["lambda_P"], **knob)
    return nsee(res.value, at, scheme)
