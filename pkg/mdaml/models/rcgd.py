from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Callable, Mapping, NamedTuple, Optional

import numpy as np

from mdaml import logger
from mdaml.models.spd import (
    Array, SPDMatrix, TangentVector, Transport, frobenius_inner,
    parallel_transport, project_to_tangent, retract, tangent_norm)
from mdaml.resources.error import (
    ConfigError, LineSearchError, ManifoldError, NumericError,
    PreconditionError)

Cost = Callable[[SPDMatrix], float]
Gradient = Callable[[SPDMatrix], Array]


class BetaRule(str, Enum):
    FLETCHER_REEVES = 'fletcher_reeves'
    POLAK_RIBIERE_PLUS = 'polak_ribiere_plus'


@dataclass(frozen=True)
class RcgdConfig:
    max_iters: int = 100
    grad_tol: float = 1e-5
    armijo_c: float = 1e-4
    backtrack_factor: float = 0.5
    max_backtracks: int = 30
    initial_step: float = 1.0
    beta_rule: BetaRule = BetaRule.POLAK_RIBIERE_PLUS
    transport: Transport = Transport.REPROJECTION
    fixed_beta: Optional[float] = None
    step_memory: bool = True

    def __post_init__(self) -> None:
        try:
            object.__setattr__(self, 'beta_rule', BetaRule(self.beta_rule))
            object.__setattr__(self, 'transport', Transport(self.transport))
        except ValueError as e:
            raise ConfigError(str(e)) from e
        if self.max_iters < 1 or self.max_backtracks < 1:
            raise ConfigError('max_iters and max_backtracks must be >= 1')
        if self.grad_tol <= 0 or self.initial_step <= 0:
            raise ConfigError('grad_tol and initial_step must be positive')
        if not 0 < self.armijo_c < 1:
            raise ConfigError(f'armijo_c {self.armijo_c} not in (0, 1)')
        if not 0 < self.backtrack_factor < 1:
            raise ConfigError(
                f'backtrack_factor {self.backtrack_factor} not in (0, 1)')
        if self.fixed_beta is not None and self.fixed_beta < 0:
            raise ConfigError('fixed_beta must be >= 0')

    @staticmethod
    def from_config(config: Mapping[str, Any]) -> RcgdConfig:
        return RcgdConfig(
            max_iters=int(config['RCGD_MAX_ITERS']),
            grad_tol=float(config['RCGD_GRAD_TOL']),
            armijo_c=float(config['RCGD_ARMIJO_C']),
            backtrack_factor=float(config['RCGD_BACKTRACK_FACTOR']),
            max_backtracks=int(config['RCGD_MAX_BACKTRACKS']),
            initial_step=float(config['RCGD_INITIAL_STEP']),
            beta_rule=config['RCGD_BETA_RULE'],
            transport=config['RCGD_TRANSPORT'],
            fixed_beta=None if config['RCGD_FIXED_BETA'] is None
            else float(config['RCGD_FIXED_BETA']),
            step_memory=bool(config['RCGD_STEP_MEMORY']))

    @property
    def max_step(self) -> float:
        """Remembered steps stay within the range one backtracking pass
        covers below initial_step."""
        return self.initial_step \
            / self.backtrack_factor ** self.max_backtracks


@dataclass
class RcgdTrace:
    objective_per_iter: list[float] = field(default_factory=list)
    grad_norm_per_iter: list[float] = field(default_factory=list)
    step_per_iter: list[float] = field(default_factory=list)
    beta_per_iter: list[float] = field(default_factory=list)
    iters_used: int = 0
    converged: bool = False

    def to_dict(self) -> dict[str, Any]:
        return {
            'objective_per_iter': self.objective_per_iter,
            'grad_norm_per_iter': self.grad_norm_per_iter,
            'step_per_iter': self.step_per_iter,
            'beta_per_iter': self.beta_per_iter,
            'iters_used': self.iters_used,
            'converged': self.converged}


class LineSearchResult(NamedTuple):
    step: float
    point: SPDMatrix
    cost: float


def conjugate_beta(
        g_new: TangentVector,
        g_old_transported: TangentVector,
        rule: BetaRule | str,
        old_norm: Optional[float] = None) -> float:
    """Both rules divide by <g_old, g_old> taken at the old point, without
    old_norm the transported gradient stands in for it."""
    if not g_new.base_point.same_point(g_old_transported.base_point):
        raise ManifoldError('gradients are based at different points')
    if old_norm is None:
        old_norm = frobenius_inner(
            g_old_transported.data,
            g_old_transported.data)
    if old_norm == 0:
        return 0.0
    if BetaRule(rule) == BetaRule.FLETCHER_REEVES:
        return frobenius_inner(g_new.data, g_new.data) / old_norm
    return max(
        0.0,
        frobenius_inner(g_new.data, g_new.data - g_old_transported.data)
        / old_norm)


def line_search(
        m: SPDMatrix,
        h: TangentVector,
        cost: Cost,
        f0: float,
        slope0: float,
        cfg: RcgdConfig,
        initial_step: Optional[float] = None) -> LineSearchResult:
    """Armijo backtracking along the retraction curve t -> R_M(t H)."""
    if not slope0 < 0:
        raise PreconditionError(f'not a descent direction, slope {slope0}')
    step = initial_step or cfg.initial_step
    for _ in range(cfg.max_backtracks):
        try:
            candidate = retract(m, h.scaled(step))
            value = float(cost(candidate))
        except (ManifoldError, NumericError):
            value = math.inf  # Step left the manifold numerically
        if math.isfinite(value) and value <= f0 + cfg.armijo_c * step * slope0:
            return LineSearchResult(step, candidate, value)
        step *= cfg.backtrack_factor
    raise LineSearchError(
        f'no Armijo step within {cfg.max_backtracks} backtracks')


def _checked(value: float, name: str, iteration: int) -> float:
    if not math.isfinite(value):
        raise NumericError(f'non-finite {name} at iteration {iteration}')
    return value


def rcgd_minimize(
        m0: SPDMatrix,
        cost: Cost,
        egrad: Gradient,
        cfg: Optional[RcgdConfig] = None) -> tuple[SPDMatrix, RcgdTrace]:
    cfg = cfg or RcgdConfig()
    trace = RcgdTrace()
    m = m0
    f = _checked(float(cost(m)), 'cost', 0)
    step_guess = cfg.initial_step
    previous: Optional[tuple[SPDMatrix, TangentVector, TangentVector]] = None
    for iteration in range(cfg.max_iters + 1):
        euclidean = np.asarray(egrad(m), dtype=float)
        if not np.all(np.isfinite(euclidean)):
            raise NumericError(f'non-finite gradient at iteration {iteration}')
        gradient = project_to_tangent(m, euclidean)
        grad_norm = tangent_norm(gradient)
        trace.objective_per_iter.append(f)
        trace.grad_norm_per_iter.append(grad_norm)
        trace.iters_used = iteration
        if grad_norm < cfg.grad_tol:
            trace.converged = True
            break
        if iteration == cfg.max_iters:
            break
        steepest = gradient.scaled(-1.0)
        direction, beta = steepest, 0.0
        if previous:
            m_old, h_old, g_old = previous
            if cfg.fixed_beta is not None:
                beta = cfg.fixed_beta
            else:
                beta = conjugate_beta(
                    gradient,
                    parallel_transport(g_old, m_old, m, cfg.transport),
                    cfg.beta_rule,
                    frobenius_inner(g_old.data, g_old.data))
            if beta:
                direction = TangentVector(
                    steepest.data + beta * parallel_transport(
                        h_old, m_old, m, cfg.transport).data,
                    m)
        slope = frobenius_inner(euclidean, direction.data)
        if slope >= 0:
            direction, beta = steepest, 0.0
            slope = frobenius_inner(euclidean, direction.data)
            if slope >= 0:  # pragma: no cover
                logger.log('warn', 'rcgd', 'no descent direction, stopping')
                break
        try:
            result = line_search(
                m, direction, cost, f, slope, cfg, step_guess)
        except LineSearchError as e:
            if direction is steepest:
                logger.log('warn', 'rcgd', 'line search failed, stopping', e)
                break
            logger.log(
                'warn',
                'rcgd',
                f'line search failed at iteration {iteration}, '
                'restarting with steepest descent')
            direction, beta = steepest, 0.0
            try:
                result = line_search(
                    m,
                    direction,
                    cost,
                    f,
                    frobenius_inner(euclidean, direction.data),
                    cfg)
            except LineSearchError as e2:
                logger.log('warn', 'rcgd', 'line search failed, stopping', e2)
                break
        if cfg.step_memory:
            # Double after a step that needed no backtracking
            step_guess = min(
                2 * result.step if result.step >= step_guess
                else result.step,
                cfg.max_step)
        trace.step_per_iter.append(result.step)
        trace.beta_per_iter.append(beta)
        previous = (m, direction, gradient)
        m = result.point
        f = _checked(result.cost, 'cost', iteration + 1)
    logger.log(
        'debug',
        'rcgd',
        f'{trace.iters_used} iterations, converged {trace.converged}, '
        f'objective {f:.6g}')
    return m, trace
