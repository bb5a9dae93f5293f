"""Hybrid non-monotone line search on the Stiefel manifold.

Each iteration blends three tangent projections of the Euclidean gradient,
takes a Barzilai-Borwein step averaged with the previous accepted step,
retracts through the polar factor, and accepts against a Zhang-Hager
reference value ``C_m`` (a decaying average of past objective values).
"""

from __future__ import annotations

import csv
import logging
import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Callable, List, Optional, Union

import numpy as np

from .errors import ConfigError, DimensionError, NumericalError
from .objective import (
    CenteredProblem,
    check_stiefel,
    gradient,
    objective_value,
    riemannian_gradient,
)

log = logging.getLogger(__name__)

MIN_WEIGHT = 0.01
MAX_SHRINKS = 60
_CURVATURE_EPS = 1e-16


@dataclass(frozen=True)
class SimplexWeights:
    """Mixing weights for the three tangent directions."""

    alpha: float
    beta: float
    gamma: float

    def __post_init__(self):
        vals = (self.alpha, self.beta, self.gamma)
        if not all(math.isfinite(v) for v in vals):
            raise ConfigError(f"simplex weights must be finite, got {vals}")
        if abs(sum(vals) - 1.0) > 1e-12:
            raise ConfigError(f"alpha + beta + gamma must equal 1, got {sum(vals)!r}")
        if min(vals) < MIN_WEIGHT - 1e-12:
            raise ConfigError(f"each weight must be >= {MIN_WEIGHT}, got {vals}")

    def as_tuple(self):
        return (self.alpha, self.beta, self.gamma)

    @classmethod
    def uniform(cls) -> "SimplexWeights":
        return cls(1 / 3, 1 / 3, 1 - 2 / 3)


@dataclass(frozen=True)
class SearchConfig:
    """Line-search constants.

    ``eps_grad=None`` resolves to ``1e-4 * sqrt(d k)`` for the problem at hand.
    ``mode="plain"`` uses the first direction alone without step averaging.
    """

    eps_grad: Optional[float] = None
    dt_init: float = 1e-2
    dt_min: float = 1e-10
    dt_max: float = 1e2
    rho: float = 1e-4
    delta: float = 0.5
    mu: float = 0.85
    max_iters: int = 1000
    seed: int = 0
    mode: str = "hybrid"

    def __post_init__(self):
        if not (0 < self.dt_min < self.dt_max):
            raise ConfigError("need 0 < dt_min < dt_max")
        if not self.dt_init > 0:
            raise ConfigError("dt_init must be positive")
        for name in ("rho", "delta", "mu"):
            v = getattr(self, name)
            if not 0 < v < 1:
                raise ConfigError(f"{name} must lie in (0, 1), got {v}")
        if self.eps_grad is not None and not self.eps_grad > 0:
            raise ConfigError("eps_grad must be positive")
        if self.max_iters < 0:
            raise ConfigError("max_iters must be >= 0")
        if self.mode not in ("hybrid", "plain"):
            raise ConfigError(f"mode must be 'hybrid' or 'plain', got {self.mode!r}")

    def resolved_eps(self, d: int, k: int) -> float:
        if self.eps_grad is not None:
            return float(self.eps_grad)
        return 1e-4 * math.sqrt(d * k)


@dataclass
class DescentTrace:
    """Per-iteration history of one ``minimize`` call.

    ``f_values``, ``grad_norms`` and ``c_values`` hold ``iterations + 1``
    entries (iterate 0 included); ``accepted_steps`` holds one step per
    accepted move.
    """

    f_values: List[float] = field(default_factory=list)
    accepted_steps: List[float] = field(default_factory=list)
    grad_norms: List[float] = field(default_factory=list)
    c_values: List[float] = field(default_factory=list)
    converged: bool = False
    iterations: int = 0
    floor_hits: List[int] = field(default_factory=list)
    direction_fallbacks: List[int] = field(default_factory=list)
    mode: str = "hybrid"
    weights: tuple = ()
    eps_grad: float = 0.0

    def to_csv(self, path: Union[str, Path, None] = None) -> str:
        """Serialize as ``iteration,f,grad_norm,dt``; ``dt`` is blank at iteration 0."""
        import io

        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["iteration", "f", "grad_norm", "dt"])
        for i, (f, g) in enumerate(zip(self.f_values, self.grad_norms)):
            dt = repr(self.accepted_steps[i - 1]) if i > 0 else ""
            w.writerow([i, repr(float(f)), repr(float(g)), dt])
        text = buf.getvalue()
        if path is not None:
            Path(path).write_text(text, encoding="utf-8")
        return text


# ---------------------------------------------------------------------------
# building blocks
# ---------------------------------------------------------------------------


def init_stiefel(d: int, k: int, seed: int) -> np.ndarray:
    """Orthonormal factor of a seeded Gaussian ``d x k`` matrix.

    The QR factor is sign-fixed so that ``R`` has a positive diagonal,
    which removes the LAPACK sign ambiguity.
    """
    if d < k:
        raise DimensionError(f"d={d} < k={k}: Stiefel manifold St(d, k) is empty")
    rng = np.random.default_rng(seed)
    M = rng.standard_normal((d, k))
    Q, R = np.linalg.qr(M)
    s = np.sign(np.diag(R))
    s[s == 0] = 1.0
    return Q * s


def direction_components(W, G):
    """The three tangent directions ``(F1, F2, F3)``."""
    WtG = W.T @ G
    F1 = G - W @ WtG.T
    F2 = G - W @ WtG
    F3 = 0.5 * F2
    return F1, F2, F3


def hybrid_direction(W, G, weights: SimplexWeights) -> np.ndarray:
    F1, F2, F3 = direction_components(W, G)
    return weights.alpha * F1 + weights.beta * F2 + weights.gamma * F3


def tangency_error(W, F) -> float:
    S = W.T @ F
    return float(np.linalg.norm(S + S.T))


def bb_step(m: int, S, O, cfg: SearchConfig) -> float:
    """Alternating Barzilai-Borwein step, clamped to ``[dt_min, dt_max]``.

    Even ``m`` uses ``||S||^2 / |<S, O>|``, odd ``m`` uses ``|<S, O>| / ||O||^2``.
    """
    sy = abs(float(np.sum(S * O)))
    oo = float(np.sum(O * O))
    if sy < _CURVATURE_EPS or math.sqrt(oo) < _CURVATURE_EPS:
        return cfg.dt_init
    if m % 2 == 0:
        dt = float(np.sum(S * S)) / sy
    else:
        dt = sy / oo
    return max(min(dt, cfg.dt_max), cfg.dt_min)


def retract(Q) -> np.ndarray:
    """Nearest orthonormal matrix to ``Q`` via the thin SVD, ``U V^T``."""
    U, s, Vt = np.linalg.svd(Q, full_matrices=False)
    if not np.all(np.isfinite(s)) or s[-1] < 1e-12 * s[0]:
        raise NumericalError(
            "retraction input is rank deficient (sigma_min/sigma_max < 1e-12); reduce the step length"
        )
    return U @ Vt


def tangent_step(W, F, dt_prev: float, dt_curr: float) -> np.ndarray:
    """``W - (dt_prev + dt_curr)/2 * F``."""
    return W - (0.5 * (dt_prev + dt_curr)) * F


# ---------------------------------------------------------------------------
# main loop
# ---------------------------------------------------------------------------


def minimize(
    p: CenteredProblem,
    weights: Optional[SimplexWeights] = None,
    cfg: Optional[SearchConfig] = None,
    W0=None,
    callback: Optional[Callable[[int, np.ndarray, float], None]] = None,
):
    """Run the line search from ``W0`` (default: ``init_stiefel(d, k, cfg.seed)``).

    Returns ``(W, trace)``.  Hitting ``max_iters`` sets ``trace.converged``
    to False instead of raising.  ``callback(m, W_m, f_m)`` is called for the
    initial point and after every accepted step.
    """
    cfg = cfg or SearchConfig()
    weights = weights or SimplexWeights.uniform()
    plain = cfg.mode == "plain"
    d, k = p.d, p.k
    eps = cfg.resolved_eps(d, k)

    W = init_stiefel(d, k, cfg.seed) if W0 is None else np.array(W0, dtype=np.float64)
    check_stiefel(W)

    f = objective_value(p, W)
    G = gradient(p, W)
    R = riemannian_gradient(W, G)
    gnorm = float(np.linalg.norm(R))
    C = f
    P = 1.0

    trace = DescentTrace(
        f_values=[f],
        grad_norms=[gnorm],
        c_values=[C],
        mode=cfg.mode,
        weights=() if plain else weights.as_tuple(),
        eps_grad=eps,
    )
    if not math.isfinite(f):
        raise NumericalError("objective is not finite at the initial point")

    if callback is not None:
        callback(0, W, f)

    dt = cfg.dt_init
    dt_prev = None
    m = 0
    while True:
        if gnorm <= eps:
            trace.converged = True
            break
        if m >= cfg.max_iters:
            break

        if plain:
            F = R
        else:
            F = hybrid_direction(W, G, weights)
            if np.sum(G * F) < 0.0:
                log.warning("iteration %d: hybrid direction is not a descent direction; using F1", m)
                trace.direction_fallbacks.append(m)
                F = R
        slope = -float(np.sum(G * F))  # directional derivative along -F

        base = dt if (plain or dt_prev is None) else dt_prev
        tau = 0.5 * (base + dt)
        shrinks = 0
        floored = False
        while True:
            W_new = retract(W - tau * F)
            f_new = objective_value(p, W_new)
            if f_new < C + cfg.rho * tau * slope:
                break
            shrinks += 1
            tau *= cfg.delta
            if shrinks >= MAX_SHRINKS or tau < cfg.dt_min:
                tau = cfg.dt_min
                W_new = retract(W - tau * F)
                f_new = objective_value(p, W_new)
                floored = True
                trace.floor_hits.append(m)
                break
        dt_accepted = cfg.dt_min if floored else max(dt * cfg.delta**shrinks, cfg.dt_min)

        if not math.isfinite(f_new):
            raise NumericalError(f"objective became non-finite at iteration {m}")
        check_stiefel(W_new)

        G_new = gradient(p, W_new)
        R_new = riemannian_gradient(W_new, G_new)
        S = W_new - W
        O = R_new - R

        P_new = cfg.mu * P + 1.0
        C = (cfg.mu * P * C + f_new) / P_new
        P = P_new

        W, G, R, f = W_new, G_new, R_new, f_new
        gnorm = float(np.linalg.norm(R))
        m += 1
        trace.f_values.append(f)
        trace.grad_norms.append(gnorm)
        trace.c_values.append(C)
        trace.accepted_steps.append(tau)
        if callback is not None:
            callback(m, W, f)

        dt_prev = dt_accepted
        dt = bb_step(m, S, O, cfg)

    trace.iterations = m
    check_stiefel(W)
    return W, trace


def plain_config(cfg: SearchConfig) -> SearchConfig:
    return replace(cfg, mode="plain")
