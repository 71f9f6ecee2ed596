"""Damped Gauss-Newton (Levenberg-Marquardt) engine shared by the
estimators, the baseline refinement and the best-fit searches."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np


@dataclass
class LMConfig:
    max_iters: int = 100
    damping_init: float = 1e-3
    damping_factor: float = 10.0
    rel_tol: float = 1e-8


@dataclass
class LMResult:
    x: np.ndarray
    cost: float
    iterations: int
    converged: bool


def finite_difference_jacobian(
    residual: Callable[[np.ndarray], np.ndarray],
    x: np.ndarray,
    step: float = 1e-7,
) -> np.ndarray:
    r0 = residual(x)
    jac = np.empty((r0.size, x.size), dtype=complex)
    for j in range(x.size):
        dx = np.zeros_like(x)
        dx[j] = step
        jac[:, j] = (residual(x + dx) - residual(x - dx)) / (2 * step)
    return jac


def levenberg_marquardt(
    residual: Callable[[np.ndarray], np.ndarray],
    x0: np.ndarray,
    jacobian: Callable[[np.ndarray], np.ndarray] | None = None,
    config: LMConfig | None = None,
    project: Callable[[np.ndarray], np.ndarray] | None = None,
) -> LMResult:
    """Minimize |residual(x)|^2 over real parameters x.

    The residual may be complex; normal equations use the real part of
    J^H J.  Damping is multiplied/divided by `damping_factor` on
    reject/accept.  `project` optionally clamps iterates to a feasible set.
    """
    cfg = config or LMConfig()
    x = np.asarray(x0, dtype=float).copy()
    if project is not None:
        x = project(x)
    r = residual(x)
    cost = float(np.real(np.vdot(r, r)))
    lam = cfg.damping_init
    iters = 0
    converged = False
    for iters in range(1, cfg.max_iters + 1):
        if not np.isfinite(cost):
            break
        jac = jacobian(x) if jacobian is not None else finite_difference_jacobian(residual, x)
        a = np.real(jac.conj().T @ jac)
        g = np.real(jac.conj().T @ r)
        diag = np.diag(a).copy()
        diag[diag < 1e-30] = 1e-30
        accepted = False
        for _ in range(25):
            try:
                step = np.linalg.solve(a + lam * np.diag(diag), -g)
            except np.linalg.LinAlgError:
                lam *= cfg.damping_factor
                continue
            x_new = x + step
            if project is not None:
                x_new = project(x_new)
            r_new = residual(x_new)
            cost_new = float(np.real(np.vdot(r_new, r_new)))
            if np.isfinite(cost_new) and cost_new <= cost:
                rel = (cost - cost_new) / max(cost, 1e-300)
                x, r, cost = x_new, r_new, cost_new
                lam = max(lam / cfg.damping_factor, 1e-15)
                accepted = True
                if rel < cfg.rel_tol:
                    converged = True
                break
            lam *= cfg.damping_factor
        if not accepted or converged:
            converged = converged or not accepted
            break
    return LMResult(x=x, cost=cost, iterations=iters, converged=converged)
