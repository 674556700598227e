"""
Log-barrier interior point method for the capability-scaling programs.

A program minimizes ``cost @ x`` subject to strict linear inequalities
``G @ x < h``, equalities ``A @ x == b`` and per-service delay constraints
``sum(S) / budget - 1 < 0``, where each S is the sojourn time of one
(service, instance) pair. Each centering step is an equality-constrained Newton
method; the barrier weight grows geometrically until the duality gap bound
``m / t`` is small.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np

from flexshare.config import SolverConfig
from flexshare.errors import SolverConvergenceError

logger = logging.getLogger(__name__)

MIN_STEP = 1e-14
STALL_STEPS = 8


@dataclass(frozen=True)
class DelayTerm:
    """One sojourn-time term: variable indices and constants of a (service, instance) pair."""

    constraint: int
    mu_index: int
    lam_index: int  # -1 when the higher-priority rate is a constant
    lam_const: float
    own_rate: float
    load: float


@dataclass
class DelayConstraints:
    """Vectorized evaluation of the per-service delay constraints."""

    budgets: np.ndarray
    terms: Sequence[DelayTerm]
    shift_index: Optional[int] = None
    _arrays: Tuple[np.ndarray, ...] = field(init=False, repr=False)

    def __post_init__(self) -> None:
        self.budgets = np.asarray(self.budgets, dtype=float)
        t = self.terms
        self._arrays = (
            np.array([x.constraint for x in t], dtype=int),
            np.array([x.mu_index for x in t], dtype=int),
            np.array([x.lam_index for x in t], dtype=int),
            np.array([x.lam_const for x in t], dtype=float),
            np.array([x.own_rate for x in t], dtype=float),
            np.array([x.load for x in t], dtype=float),
        )

    def __len__(self) -> int:
        return len(self.budgets)

    def with_shift(self, index: int) -> "DelayConstraints":
        return DelayConstraints(self.budgets, self.terms, shift_index=index)

    def _sojourn(self, x: np.ndarray):
        con, mu_i, lam_i, lam_c, own, load = self._arrays
        mu = x[mu_i]
        lam = np.where(lam_i >= 0, x[np.maximum(lam_i, 0)], lam_c)
        gap_a = mu - load * lam
        gap_b = mu - load * (lam + own)
        return mu, gap_a, gap_b, load * mu / (gap_a * gap_b)

    def values(self, x: np.ndarray) -> Optional[np.ndarray]:
        """Constraint values, or None outside the stable region."""
        con = self._arrays[0]
        mu, gap_a, gap_b, s = self._sojourn(x)
        if np.any(mu <= 0) or np.any(gap_b <= 0) or np.any(gap_a <= 0):
            return None
        totals = np.bincount(con, weights=s, minlength=len(self.budgets))
        f = totals / self.budgets - 1.0
        if self.shift_index is not None:
            f = f - x[self.shift_index]
        return f

    def sojourn_times(self, x: np.ndarray) -> np.ndarray:
        return self._sojourn(x)[3]

    def derivatives(self, x: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Values, gradients (J x n) and Hessians (J x n x n) of the constraints."""
        con, mu_i, lam_i, _, _, load = self._arrays
        n = len(x)
        count = len(self.budgets)
        mu, gap_a, gap_b, s = self._sojourn(x)

        # Derivatives of log S, then of S.
        g_mu = 1.0 / mu - 1.0 / gap_a - 1.0 / gap_b
        g_lam = load / gap_a + load / gap_b
        inv_a2 = 1.0 / gap_a**2
        inv_b2 = 1.0 / gap_b**2
        h_mumu = -1.0 / mu**2 + inv_a2 + inv_b2
        h_mulam = -load * (inv_a2 + inv_b2)
        h_lamlam = load**2 * (inv_a2 + inv_b2)

        scale = s / self.budgets[con]
        d_mu = scale * g_mu
        d_lam = scale * g_lam
        d_mumu = scale * (g_mu * g_mu + h_mumu)
        d_mulam = scale * (g_mu * g_lam + h_mulam)
        d_lamlam = scale * (g_lam * g_lam + h_lamlam)

        grads = np.zeros((count, n))
        hess = np.zeros((count, n, n))
        np.add.at(grads, (con, mu_i), d_mu)
        np.add.at(hess, (con, mu_i, mu_i), d_mumu)
        has_lam = lam_i >= 0
        if np.any(has_lam):
            c, m, k = con[has_lam], mu_i[has_lam], lam_i[has_lam]
            np.add.at(grads, (c, k), d_lam[has_lam])
            np.add.at(hess, (c, m, k), d_mulam[has_lam])
            np.add.at(hess, (c, k, m), d_mulam[has_lam])
            np.add.at(hess, (c, k, k), d_lamlam[has_lam])

        totals = np.bincount(con, weights=s, minlength=count)
        f = totals / self.budgets - 1.0
        if self.shift_index is not None:
            f = f - x[self.shift_index]
            grads[:, self.shift_index] -= 1.0
        return f, grads, hess


@dataclass
class ConvexProgram:
    cost: np.ndarray
    G: np.ndarray
    h: np.ndarray
    A: np.ndarray
    b: np.ndarray
    delays: Optional[DelayConstraints] = None

    @property
    def size(self) -> int:
        return len(self.cost)

    @property
    def constraint_count(self) -> int:
        return len(self.h) + (len(self.delays) if self.delays is not None else 0)

    def slack(self, x: np.ndarray) -> Optional[Tuple[np.ndarray, Optional[np.ndarray]]]:
        """Linear slacks and delay values if ``x`` is strictly inside, else None."""
        r = self.h - self.G @ x
        if not np.all(r > 0) or not np.all(np.isfinite(r)):
            return None
        f = None
        if self.delays is not None and len(self.delays):
            f = self.delays.values(x)
            if f is None or not np.all(f < 0) or not np.all(np.isfinite(f)):
                return None
        return r, f

    def barrier(self, x: np.ndarray, t: float) -> float:
        inside = self.slack(x)
        if inside is None:
            return np.inf
        r, f = inside
        value = t * float(self.cost @ x) - float(np.sum(np.log(r)))
        if f is not None:
            value -= float(np.sum(np.log(-f)))
        return value


@dataclass
class BarrierResult:
    x: np.ndarray
    objective: float
    newton_steps: int
    barrier_weight: float


class BarrierSolver:
    """Sequential unconstrained minimization with Newton centering."""

    def __init__(self, config: Optional[SolverConfig] = None, growth: Optional[float] = None):
        self.config = config or SolverConfig()
        self.growth = growth or self.config.barrier_growth

    def minimize(
        self,
        program: ConvexProgram,
        x0: np.ndarray,
        phase: str = "optimize",
        stop: Optional[Callable[[np.ndarray, float], bool]] = None,
    ) -> BarrierResult:
        """Minimize from a strictly feasible ``x0``.

        ``stop(x, gap)`` sees each central point with its duality gap bound and
        ends the outer loop early when it returns True.
        """
        x = np.asarray(x0, dtype=float).copy()
        if program.slack(x) is None:
            raise SolverConvergenceError(phase, 0, {"reason": "start point is not strictly feasible"})
        m = max(program.constraint_count, 1)
        t = self.config.initial_barrier
        steps = 0
        while True:
            x, used = self._center(program, x, t, phase, steps)
            steps += used
            objective = float(program.cost @ x)
            logger.debug("%s: t=%.3g objective=%.10g gap<=%.3g", phase, t, objective, m / t)
            if stop is not None and stop(x, m / t):
                break
            if m / t < self.config.gap_tolerance * max(1.0, abs(objective)):
                break
            t *= self.growth
        return BarrierResult(x=x, objective=float(program.cost @ x), newton_steps=steps, barrier_weight=t)

    def _gradient_hessian(self, program: ConvexProgram, x: np.ndarray, t: float):
        r = program.h - program.G @ x
        inv_r = 1.0 / r
        grad = t * program.cost + program.G.T @ inv_r
        hess = (program.G.T * inv_r**2) @ program.G
        if program.delays is not None and len(program.delays):
            f, grads, hessians = program.delays.derivatives(x)
            inv_f = -1.0 / f
            grad = grad + grads.T @ inv_f
            hess = hess + (grads.T * inv_f**2) @ grads + np.tensordot(inv_f, hessians, axes=1)
        return grad, hess

    def _newton_step(self, program: ConvexProgram, grad: np.ndarray, hess: np.ndarray) -> np.ndarray:
        n = len(grad)
        hess = 0.5 * (hess + hess.T)
        eigmin = float(np.linalg.eigvalsh(hess)[0])
        scale = max(1.0, float(np.trace(hess)) / n)
        floor = 1e-12 * scale
        if eigmin < floor:
            # The delay terms are not jointly convex in (mu, Lambda); shift to a positive definite model.
            hess = hess + (floor - eigmin) * np.eye(n)
        p = program.A.shape[0]
        if p == 0:
            return np.linalg.solve(hess, -grad)
        kkt = np.zeros((n + p, n + p))
        kkt[:n, :n] = hess
        kkt[:n, n:] = program.A.T
        kkt[n:, :n] = program.A
        rhs = np.concatenate([-grad, np.zeros(p)])
        try:
            solution = np.linalg.solve(kkt, rhs)
        except np.linalg.LinAlgError:
            solution = np.linalg.lstsq(kkt, rhs, rcond=None)[0]
        return solution[:n]

    def _center(self, program: ConvexProgram, x: np.ndarray, t: float, phase: str, done: int):
        cfg = self.config
        steps = 0
        value = program.barrier(x, t)
        best = np.inf
        stalled = 0
        while True:
            if done + steps >= cfg.max_newton_steps:
                raise SolverConvergenceError(phase, done + steps)
            grad, hess = self._gradient_hessian(program, x, t)
            dx = self._newton_step(program, grad, hess)
            slope = float(grad @ dx)
            steps += 1
            decrement = -slope / 2.0
            if decrement <= cfg.newton_tolerance:
                return x, steps
            if decrement < best:
                best, stalled = decrement, 0
            else:
                stalled += 1
                if stalled >= STALL_STEPS:
                    logger.debug("%s: Newton decrement stalled at %.3g, t=%.3g", phase, decrement, t)
                    return x, steps
            step = 1.0
            candidate = x + dx
            trial = program.barrier(candidate, t)
            while not np.isfinite(trial) or trial > value + cfg.armijo_alpha * step * slope:
                step *= cfg.armijo_beta
                if step < MIN_STEP:
                    # Stalled on round-off; the point is as central as float64 allows.
                    return x, steps
                candidate = x + step * dx
                trial = program.barrier(candidate, t)
            x, value = candidate, trial


def stack_rows(rows: List[Tuple[np.ndarray, float]], n: int) -> Tuple[np.ndarray, np.ndarray]:
    if not rows:
        return np.zeros((0, n)), np.zeros(0)
    return np.vstack([r for r, _ in rows]), np.array([v for _, v in rows], dtype=float)
