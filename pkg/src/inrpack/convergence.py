"""Numerical checks of the joint-training convergence bounds on quadratic losses.

The setting is two trained parameter vectors and a third, virtual one formed
as their fixed linear combination. Each loss is a diagonal quadratic, so its
smoothness constant (largest curvature), PL constant (smallest curvature),
minimizer and minimum are exact by construction and bound checking carries no
estimation error.

Gradient descent runs with the prescribed step sizes 1/(gamma_i * beta_i) on
the trained vectors. Bounds on the optimality gaps are then evaluated from
trajectory-measured gradient magnitudes and gradient-similarity extrema, and
compared pointwise against the empirical gaps.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "QuadraticLoss",
    "ConvergenceConfig",
    "Trajectory",
    "TrajectoryStats",
    "BoundReport",
    "ConfigError",
    "DivergenceError",
    "gamma3_cap",
    "run_gd",
    "measure_trajectory",
    "interference_primary",
    "interference_combined",
    "primary_bound_rhs",
    "secondary_bound_rhs",
    "verify",
    "config_from_json",
    "config_to_json",
    "reference_config",
]


class ConfigError(ValueError):
    """The configuration violates a structural or feasibility requirement."""


class DivergenceError(RuntimeError):
    """An iterate went non-finite during gradient descent."""


@dataclass(frozen=True)
class QuadraticLoss:
    """Diagonal quadratic 0.5 * sum_k curvature[k] * (x - minimizer)[k]^2 + offset."""

    curvature: np.ndarray
    minimizer: np.ndarray
    offset: float = 0.0

    def __post_init__(self):
        curvature = np.asarray(self.curvature, dtype=np.float64)
        minimizer = np.asarray(self.minimizer, dtype=np.float64)
        object.__setattr__(self, "curvature", curvature)
        object.__setattr__(self, "minimizer", minimizer)
        if curvature.ndim != 1 or curvature.size < 1:
            raise ConfigError("curvature must be a non-empty 1-D array")
        if not np.all(curvature > 0):
            raise ConfigError("curvature entries must be positive")
        if minimizer.shape != curvature.shape:
            raise ConfigError("minimizer and curvature must have the same dimension")
        if self.offset < 0:
            raise ConfigError("offset must be >= 0")

    @property
    def dim(self) -> int:
        return self.curvature.size

    @property
    def beta(self) -> float:
        """Smoothness constant: the largest curvature."""
        return float(self.curvature.max())

    @property
    def mu(self) -> float:
        """PL constant: the smallest curvature."""
        return float(self.curvature.min())

    def value(self, x) -> float:
        d = np.asarray(x, dtype=np.float64) - self.minimizer
        return 0.5 * float(np.dot(self.curvature * d, d)) + self.offset

    def grad(self, x) -> np.ndarray:
        return self.curvature * (np.asarray(x, dtype=np.float64) - self.minimizer)

    def gap(self, x) -> float:
        """Optimality gap value(x) - minimum, computed without cancellation."""
        d = np.asarray(x, dtype=np.float64) - self.minimizer
        return 0.5 * float(np.dot(self.curvature * d, d))


def gamma3_cap(losses, gamma, alpha3) -> float:
    """Largest loss weight the third image may carry; the bound derivation
    needs 1 - gamma3 * (a31^2 b3/(b1 g1) + a32^2 b3/(b2 g2)) >= 0."""
    l1, l2, l3 = losses
    denom = (
        alpha3[0] ** 2 * l3.beta / (l1.beta * gamma[0])
        + alpha3[1] ** 2 * l3.beta / (l2.beta * gamma[1])
    )
    if denom <= 0:
        return math.inf
    return 1.0 / denom


@dataclass(frozen=True)
class ConvergenceConfig:
    """Three quadratic losses, loss weights, the combination coefficients of
    the third vector, initial points, and the iteration budget."""

    losses: tuple  # (QuadraticLoss, QuadraticLoss, QuadraticLoss)
    gamma: np.ndarray  # (3,)
    alpha3: np.ndarray  # (2,)
    theta1_init: np.ndarray
    theta2_init: np.ndarray
    iterations: int = 500
    grad_bound_squares: tuple | None = None  # optional a-priori (G1^2, G2^2, G3^2)

    def __post_init__(self):
        gamma = np.asarray(self.gamma, dtype=np.float64)
        alpha3 = np.asarray(self.alpha3, dtype=np.float64)
        t1 = np.asarray(self.theta1_init, dtype=np.float64)
        t2 = np.asarray(self.theta2_init, dtype=np.float64)
        object.__setattr__(self, "gamma", gamma)
        object.__setattr__(self, "alpha3", alpha3)
        object.__setattr__(self, "theta1_init", t1)
        object.__setattr__(self, "theta2_init", t2)
        if len(self.losses) != 3:
            raise ConfigError("need exactly three losses")
        d = self.losses[0].dim
        if any(l.dim != d for l in self.losses):
            raise ConfigError("all losses must share one dimension")
        if gamma.shape != (3,):
            raise ConfigError("gamma must have three entries")
        if not np.all((gamma > 0) & (gamma < 1)):
            raise ConfigError("each gamma must lie in (0, 1)")
        if abs(float(gamma.sum()) - 1.0) > 1e-9:
            raise ConfigError("gamma must sum to 1 within 1e-9")
        if alpha3.shape != (2,):
            raise ConfigError("alpha3 must have two entries")
        if t1.shape != (d,) or t2.shape != (d,):
            raise ConfigError(f"initial points must have dimension {d}")
        if self.iterations < 0:
            raise ConfigError("iterations must be >= 0")
        cap = gamma3_cap(self.losses, gamma, alpha3)
        if gamma[2] > cap:
            raise ConfigError(
                f"infeasible loss weights: gamma3 = {gamma[2]:.6g} exceeds "
                f"1 / (a31^2 b3/(b1 g1) + a32^2 b3/(b2 g2)) = {cap:.6g}"
            )

    @property
    def dim(self) -> int:
        return self.losses[0].dim

    def w3_init(self) -> np.ndarray:
        return self.alpha3[0] * self.theta1_init + self.alpha3[1] * self.theta2_init

    def step_sizes(self) -> tuple:
        """(eta1, eta2, eta3) = (1/(g1 b1), 1/(g2 b2), 1/b3); the third is the
        virtual step size used only inside the bound."""
        l1, l2, l3 = self.losses
        return (
            1.0 / (self.gamma[0] * l1.beta),
            1.0 / (self.gamma[1] * l2.beta),
            1.0 / l3.beta,
        )


@dataclass
class Trajectory:
    theta1: np.ndarray  # (T+1, d)
    theta2: np.ndarray
    w3: np.ndarray

    @property
    def steps(self) -> int:
        return self.theta1.shape[0] - 1


def run_gd(config: ConvergenceConfig, iterations: int | None = None) -> Trajectory:
    """Gradient descent on the weighted three-term loss, recording the two
    trained vectors and their combination at every iteration."""
    t = config.iterations if iterations is None else int(iterations)
    if t < 0:
        raise ValueError("iterations must be >= 0")
    l1, l2, l3 = config.losses
    g1, g2, g3 = (float(v) for v in config.gamma)
    a31, a32 = (float(v) for v in config.alpha3)
    eta1, eta2, _ = config.step_sizes()

    th1 = config.theta1_init.copy()
    th2 = config.theta2_init.copy()
    theta1 = np.empty((t + 1, config.dim))
    theta2 = np.empty((t + 1, config.dim))
    w3 = np.empty((t + 1, config.dim))
    theta1[0] = th1
    theta2[0] = th2
    w3[0] = a31 * th1 + a32 * th2

    for k in range(1, t + 1):
        grad3 = l3.grad(w3[k - 1])
        d1 = g1 * l1.grad(th1) + g3 * a31 * grad3
        d2 = g2 * l2.grad(th2) + g3 * a32 * grad3
        th1 = th1 - eta1 * d1
        th2 = th2 - eta2 * d2
        if not (np.all(np.isfinite(th1)) and np.all(np.isfinite(th2))):
            raise DivergenceError(f"non-finite iterate at step {k}")
        theta1[k] = th1
        theta2[k] = th2
        w3[k] = a31 * th1 + a32 * th2

    return Trajectory(theta1, theta2, w3)


@dataclass
class TrajectoryStats:
    """Gradient magnitudes and similarity extrema measured along one run.

    g*_sq are maxima of the squared gradient norms (the tightest uniform
    bounds valid on the visited iterates); rho13/rho23 are minima and rho12
    the maximum of the pairwise gradient inner products, matching the
    directions in which each enters the combined-error bound.
    """

    g1_sq: float
    g2_sq: float
    g3_sq: float
    rho13: float
    rho23: float
    rho12: float


def measure_trajectory(config: ConvergenceConfig, traj: Trajectory) -> TrajectoryStats:
    l1, l2, l3 = config.losses
    grads1 = (traj.theta1 - l1.minimizer) * l1.curvature
    grads2 = (traj.theta2 - l2.minimizer) * l2.curvature
    grads3 = (traj.w3 - l3.minimizer) * l3.curvature
    return TrajectoryStats(
        g1_sq=float(np.max(np.sum(grads1 * grads1, axis=1))),
        g2_sq=float(np.max(np.sum(grads2 * grads2, axis=1))),
        g3_sq=float(np.max(np.sum(grads3 * grads3, axis=1))),
        rho13=float(np.min(np.sum(grads3 * grads1, axis=1))),
        rho23=float(np.min(np.sum(grads3 * grads2, axis=1))),
        rho12=float(np.max(np.sum(grads1 * grads2, axis=1))),
    )


def interference_primary(config: ConvergenceConfig, side: int, g3_sq: float) -> float:
    """Constant bounding the squared cross-image error injected into trained
    vector ``side`` (1 or 2): gamma3^2 * alpha3[side]^2 * G3^2."""
    if side not in (1, 2):
        raise ValueError("side must be 1 or 2")
    a = float(config.alpha3[side - 1])
    return float(config.gamma[2]) ** 2 * a * a * g3_sq


def interference_combined(config: ConvergenceConfig, stats: TrajectoryStats) -> float:
    """Constant bounding the squared error of the virtual update on the
    combined vector; mixes gradient magnitudes and similarity extrema."""
    l1, l2, l3 = config.losses
    g1, g2, g3 = (float(v) for v in config.gamma)
    a31, a32 = (float(v) for v in config.alpha3)
    r1 = l3.beta / l1.beta
    r2 = l3.beta / l2.beta
    lam = 1.0 - g3 * (a31 * a31 * r1 / g1 + a32 * a32 * r2 / g2)
    return (
        lam * lam * stats.g3_sq
        + a31 * a31 * r1 * r1 * stats.g1_sq
        + a32 * a32 * r2 * r2 * stats.g2_sq
        - 2.0 * a31 * r1 * lam * stats.rho13
        - 2.0 * a32 * r2 * lam * stats.rho23
        + 2.0 * a31 * a32 * r1 * r2 * stats.rho12
    )


def _geometric_sum(ratio: float, t) -> np.ndarray:
    """sum_{k=0}^{t-1} ratio^k, vectorized over t; ratio in [0, 1)."""
    t = np.asarray(t, dtype=np.float64)
    if ratio == 1.0:
        return t
    return (1.0 - ratio ** t) / (1.0 - ratio)


def primary_bound_rhs(config: ConvergenceConfig, t, side: int, g3_sq: float):
    """Gap bound for trained vector ``side`` at iteration(s) t: geometric decay
    of the initial gap plus the accumulated cross-image interference."""
    t_arr = np.asarray(t)
    if np.any(t_arr < 0):
        raise ValueError("iteration index must be >= 0")
    loss = config.losses[side - 1]
    init = config.theta1_init if side == 1 else config.theta2_init
    gap0 = loss.gap(init)
    ratio = 1.0 - loss.mu / loss.beta
    delta = interference_primary(config, side, g3_sq)
    g = float(config.gamma[side - 1])
    rhs = ratio ** np.asarray(t, dtype=np.float64) * gap0
    rhs = rhs + delta / (2.0 * loss.beta * g * g) * _geometric_sum(ratio, t)
    return rhs if np.ndim(t) else float(rhs)


def secondary_bound_rhs(config: ConvergenceConfig, t, stats: TrajectoryStats):
    """Gap bound for the combined vector at iteration(s) t, using the virtual
    step size 1/beta3."""
    t_arr = np.asarray(t)
    if np.any(t_arr < 0):
        raise ValueError("iteration index must be >= 0")
    l3 = config.losses[2]
    gap0 = l3.gap(config.w3_init())
    ratio = 1.0 - l3.mu / l3.beta
    delta = interference_combined(config, stats)
    rhs = ratio ** np.asarray(t, dtype=np.float64) * gap0
    rhs = rhs + delta / (2.0 * l3.beta) * _geometric_sum(ratio, t)
    return rhs if np.ndim(t) else float(rhs)


@dataclass
class BoundReport:
    """Everything measured and asserted for one verification run."""

    iterations: int
    gaps: dict  # name -> (T+1,) empirical optimality gaps
    bounds: dict  # name -> (T+1,) theoretical right-hand sides
    stats: TrajectoryStats
    deltas: dict  # interference constants
    asymptotic_limits: dict
    tail_gaps: dict  # mean gap over the trailing 10% of iterations
    tail_transients: dict  # geometric remnant of the initial gap over the tail
    violations: dict  # name -> None or (first t, gap value, bound value)
    tail_violations: dict  # name -> bool

    @property
    def passed(self) -> bool:
        return all(v is None for v in self.violations.values()) and not any(
            self.tail_violations.values()
        )

    def first_violation(self):
        for name, v in self.violations.items():
            if v is not None:
                return name, v
        return None

    def to_dict(self) -> dict:
        return {
            "iterations": self.iterations,
            "passed": self.passed,
            "gaps": {k: list(v) for k, v in self.gaps.items()},
            "bounds": {k: list(v) for k, v in self.bounds.items()},
            "gradient_norm_squared_max": {
                "g1_sq": self.stats.g1_sq,
                "g2_sq": self.stats.g2_sq,
                "g3_sq": self.stats.g3_sq,
            },
            "gradient_similarity_extrema": {
                "rho13_min": self.stats.rho13,
                "rho23_min": self.stats.rho23,
                "rho12_max": self.stats.rho12,
            },
            "interference": self.deltas,
            "asymptotic_limits": self.asymptotic_limits,
            "tail_gaps": self.tail_gaps,
            "tail_transients": self.tail_transients,
            "violations": {
                k: (None if v is None else {"t": v[0], "gap": v[1], "bound": v[2]})
                for k, v in self.violations.items()
            },
            "tail_violations": self.tail_violations,
        }

    def to_json(self, indent=None) -> str:
        return json.dumps(self.to_dict(), indent=indent)


def _first_violation(gaps: np.ndarray, bounds: np.ndarray):
    bad = np.nonzero(gaps > bounds)[0]
    if bad.size == 0:
        return None
    t = int(bad[0])
    return (t, float(gaps[t]), float(bounds[t]))


def verify(config: ConvergenceConfig, iterations: int | None = None) -> BoundReport:
    """Run gradient descent and check every per-iteration gap against its
    bound, plus the tail-mean gaps against the asymptotic limits.

    The inequalities are checked exactly (no tolerance). The config is not
    mutated; measured gradient bounds come from the trajectory unless the
    config carries a-priori ones.
    """
    t_total = config.iterations if iterations is None else int(iterations)
    traj = run_gd(config, t_total)
    stats = measure_trajectory(config, traj)
    if config.grad_bound_squares is not None:
        g1, g2, g3 = (float(v) for v in config.grad_bound_squares)
        stats = TrajectoryStats(g1, g2, g3, stats.rho13, stats.rho23, stats.rho12)

    l1, l2, l3 = config.losses
    ts = np.arange(t_total + 1)

    gaps = {
        "primary_1": np.array([l1.gap(x) for x in traj.theta1]),
        "primary_2": np.array([l2.gap(x) for x in traj.theta2]),
        "combined": np.array([l3.gap(x) for x in traj.w3]),
    }
    bounds = {
        "primary_1": np.asarray(primary_bound_rhs(config, ts, 1, stats.g3_sq)),
        "primary_2": np.asarray(primary_bound_rhs(config, ts, 2, stats.g3_sq)),
        "combined": np.asarray(secondary_bound_rhs(config, ts, stats)),
    }

    d13 = interference_primary(config, 1, stats.g3_sq)
    d23 = interference_primary(config, 2, stats.g3_sq)
    d123 = interference_combined(config, stats)
    g1, g2 = float(config.gamma[0]), float(config.gamma[1])
    limits = {
        "primary_1": d13 / (2.0 * l1.mu * g1 * g1),
        "primary_2": d23 / (2.0 * l2.mu * g2 * g2),
        "combined": d123 / (2.0 * l3.mu),
    }

    # Finite-horizon form of the asymptotic claim: the tail mean may still
    # carry the geometrically decayed initial gap, so allow exactly that
    # remnant. By the time a run has converged it is far below resolution.
    tail = max(1, (t_total + 1) // 10)
    tail_ts = ts[-tail:].astype(np.float64)
    initial_gaps = {
        "primary_1": l1.gap(config.theta1_init),
        "primary_2": l2.gap(config.theta2_init),
        "combined": l3.gap(config.w3_init()),
    }
    ratios = {
        "primary_1": 1.0 - l1.mu / l1.beta,
        "primary_2": 1.0 - l2.mu / l2.beta,
        "combined": 1.0 - l3.mu / l3.beta,
    }
    tail_transients = {
        k: float(np.mean(ratios[k] ** tail_ts) * initial_gaps[k]) for k in gaps
    }
    tail_gaps = {k: float(np.mean(v[-tail:])) for k, v in gaps.items()}
    tail_violations = {
        k: bool(tail_gaps[k] > limits[k] + tail_transients[k]) for k in gaps
    }
    violations = {k: _first_violation(gaps[k], bounds[k]) for k in gaps}

    return BoundReport(
        iterations=t_total,
        gaps=gaps,
        bounds=bounds,
        stats=stats,
        deltas={"primary_1": d13, "primary_2": d23, "combined": d123},
        asymptotic_limits=limits,
        tail_gaps=tail_gaps,
        tail_transients=tail_transients,
        violations=violations,
        tail_violations=tail_violations,
    )


def config_from_json(text: str) -> ConvergenceConfig:
    """Build a config from its JSON form; see ``config_to_json`` for the schema."""
    raw = json.loads(text)
    try:
        losses = tuple(
            QuadraticLoss(
                np.asarray(entry["curvature"], dtype=np.float64),
                np.asarray(entry["minimizer"], dtype=np.float64),
                float(entry.get("offset", 0.0)),
            )
            for entry in raw["losses"]
        )
        bounds = raw.get("grad_bound_squares")
        return ConvergenceConfig(
            losses=losses,
            gamma=np.asarray(raw["gamma"], dtype=np.float64),
            alpha3=np.asarray(raw["alpha3"], dtype=np.float64),
            theta1_init=np.asarray(raw["theta1_init"], dtype=np.float64),
            theta2_init=np.asarray(raw["theta2_init"], dtype=np.float64),
            iterations=int(raw.get("iterations", 500)),
            grad_bound_squares=tuple(bounds) if bounds is not None else None,
        )
    except KeyError as exc:
        raise ConfigError(f"missing config field: {exc}") from exc


def config_to_json(config: ConvergenceConfig, indent=None) -> str:
    raw = {
        "losses": [
            {
                "curvature": list(l.curvature),
                "minimizer": list(l.minimizer),
                "offset": l.offset,
            }
            for l in config.losses
        ],
        "gamma": list(config.gamma),
        "alpha3": list(config.alpha3),
        "theta1_init": list(config.theta1_init),
        "theta2_init": list(config.theta2_init),
        "iterations": config.iterations,
    }
    if config.grad_bound_squares is not None:
        raw["grad_bound_squares"] = list(config.grad_bound_squares)
    return json.dumps(raw, indent=indent)


def reference_config(iterations: int = 500) -> ConvergenceConfig:
    """Canonical 2-D regression fixture: equal curvatures diag(0.5, 1.0),
    distinct minimizers, weights (0.4, 0.4, 0.2), equal mixing, zero starts."""
    curv = np.array([0.5, 1.0])
    return ConvergenceConfig(
        losses=(
            QuadraticLoss(curv, np.array([1.0, 0.0])),
            QuadraticLoss(curv, np.array([0.0, 1.0])),
            QuadraticLoss(curv, np.array([1.0, 1.0])),
        ),
        gamma=np.array([0.4, 0.4, 0.2]),
        alpha3=np.array([0.5, 0.5]),
        theta1_init=np.zeros(2),
        theta2_init=np.zeros(2),
        iterations=iterations,
    )
