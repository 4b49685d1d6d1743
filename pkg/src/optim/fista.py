"""Accelerated proximal gradient with restart and backtracking."""

import logging
import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from src.common.errors import NumericalError, raise_on_errors
from src.optim.models import (
    BACKTRACK,
    MOMENTUM_RESET,
    RESTART,
    FistaConfig,
    IterationLog,
    IterationRecord,
    validate_fista_config,
)

logger = logging.getLogger(__name__)

INCREASE_RTOL = 1e-12


@dataclass
class LeastSquaresTerm:
    """D(x) = 1/2 |op(x) - data|^2 for a linear op.

    Callers pass op(x) around so each FISTA iteration applies op and its
    adjoint once; by linearity op of an extrapolated point is the same
    combination of op values.
    """

    op: Callable[[np.ndarray], np.ndarray]
    adjoint: Callable[[np.ndarray], np.ndarray]
    data: np.ndarray

    def apply(self, x: np.ndarray) -> np.ndarray:
        return self.op(x)

    def value(self, ax: np.ndarray) -> float:
        r = ax - self.data
        return 0.5 * float(np.vdot(r, r))

    def gradient(self, ax: np.ndarray) -> np.ndarray:
        return self.adjoint(ax - self.data)


@dataclass
class ProxTerm:
    """J with its proximal map: prox(v, step) = argmin_x step * J(x) + 1/2 |x - v|^2."""

    prox: Callable[[np.ndarray, float], np.ndarray]
    energy: Callable[[np.ndarray], float]


ZERO_REGULARIZER = ProxTerm(prox=lambda v, step: v, energy=lambda x: 0.0)


@dataclass
class FistaResult:
    x: np.ndarray
    ax: np.ndarray
    objective: float
    data_term: float
    log: IterationLog


def fista(
    smooth: LeastSquaresTerm,
    regularizer: ProxTerm,
    lipschitz: float,
    cfg: FistaConfig = None,
    x0: Optional[np.ndarray] = None,
    shape: Optional[Sequence[int]] = None,
    discrepancy: Optional[Callable[[float], float]] = None,
) -> FistaResult:
    """Minimize D(x) + J(x) starting from x0 (zeros of ``shape`` by default).

    Steps without momentum use step_scale/L, extrapolated steps use
    momentum_step_scale/L. The momentum is reset whenever the new step points
    against the last move, keeping that step. On an objective increase the
    momentum restarts and the iteration falls back to a plain proximal
    gradient step from the current iterate, halving the step up to
    backtrack_max times. Stops after max_iters, when the iterate no longer
    changes, or when the best objective has not improved for stall_window
    iterations. Returns the best iterate seen.

    ``discrepancy`` maps the residual norm to a logged data discrepancy.
    """
    cfg = cfg or FistaConfig()
    raise_on_errors(validate_fista_config(cfg))
    if not lipschitz > 0:
        raise ValueError(f"Lipschitz constant must be > 0, got {lipschitz}")
    if x0 is None:
        if shape is None:
            raise ValueError("fista needs x0 or shape")
        x0 = np.zeros(tuple(shape))
    eta = cfg.step_scale / lipschitz
    eta_momentum = cfg.momentum_step_scale / lipschitz

    def evaluate(x, ax):
        d = smooth.value(ax)
        total = d + regularizer.energy(x)
        if not math.isfinite(total):
            raise NumericalError(f"non-finite objective {total!r}")
        return total, d

    def disc_of(d):
        return None if discrepancy is None else discrepancy(math.sqrt(2.0 * d))

    x = np.array(x0, dtype=np.float64)
    ax = smooth.apply(x)
    energy, data_term = evaluate(x, ax)
    best = FistaResult(x=x, ax=ax, objective=energy, data_term=data_term, log=IterationLog())
    log = best.log
    log.append(IterationRecord(0, energy, data_term, energy, [], disc_of(data_term)))

    x_prev, ax_prev = x, ax
    t = 1.0
    stall = 0
    log.stop_reason = "max_iters"
    for k in range(1, cfg.max_iters + 1):
        t_next = (1.0 + math.sqrt(1.0 + 4.0 * t * t)) / 2.0
        beta = (t - 1.0) / t_next
        step = eta_momentum if beta > 0 else eta
        y = x + beta * (x - x_prev)
        ay = ax + beta * (ax - ax_prev)
        x_new = regularizer.prox(y - step * smooth.gradient(ay), step)
        ax_new = smooth.apply(x_new)
        e_new, d_new = evaluate(x_new, ax_new)
        events = []

        if cfg.restart and e_new > energy + INCREASE_RTOL * abs(energy):
            events.append(RESTART)
            t_next = 1.0
            grad = smooth.gradient(ax)
            step = eta
            for attempt in range(cfg.backtrack_max + 1):
                x_new = regularizer.prox(x - step * grad, step)
                ax_new = smooth.apply(x_new)
                e_new, d_new = evaluate(x_new, ax_new)
                if e_new <= energy + INCREASE_RTOL * abs(energy) or attempt == cfg.backtrack_max:
                    break
                events.append(BACKTRACK)
                step /= 2.0
            if e_new > energy:
                x_new, ax_new, e_new, d_new = x, ax, energy, data_term
            logger.info("fista iter %d: restart with %d backtracking steps", k, events.count(BACKTRACK))
        elif cfg.restart and beta > 0 and np.vdot(y - x_new, x_new - x) > 0:
            events.append(MOMENTUM_RESET)
            t_next = 1.0
            logger.debug("fista iter %d: momentum reset", k)

        x_prev, ax_prev = x, ax
        x, ax, energy, data_term = x_new, ax_new, e_new, d_new
        t = t_next

        if energy < best.objective:
            best.x, best.ax, best.objective, best.data_term = x, ax, energy, data_term
            stall = 0
        else:
            stall += 1
        log.append(IterationRecord(k, energy, data_term, best.objective, events, disc_of(data_term)))
        logger.debug("fista iter %d: objective %.8g best %.8g", k, energy, best.objective)

        if np.array_equal(x, x_prev):
            log.stop_reason = "unchanged"
            break
        if stall >= cfg.stall_window:
            log.stop_reason = "stalled"
            break
    return best
