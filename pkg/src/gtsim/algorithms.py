"""Decentralized SGD trajectories, with and without gradient tracking.

Both methods use the adapt-then-combine form. With a mixing matrix W, oracle
output g_i^t at the current models, and step-size alpha_t:

- tracked:  y^t = W (y^{t-1} + g^t - g^{t-1}),  x^{t+1} = W (x^t - alpha_t y^t)
- vanilla:  x^{t+1} = W (x^t - alpha_t g^t)

with y^0 = g^0 = 0. The tracker mean equals the gradient mean at every
iteration, so the averaged model always follows x_bar^{t+1} = x_bar^t -
alpha_t g_bar^t. Runs are pure functions of (config, seed, run_id).

This module also hosts the step-size calculators: the fixed-step cap for the
non-convex regime and the schedule offset floor for the PL regime.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .noise import prepare_sampler, sample_gradient_block

__all__ = [
    "RunAbort",
    "ConstantStep",
    "InverseTimeStep",
    "AlgorithmState",
    "TrajectoryRecord",
    "RunConfig",
    "gt_dsgd_step",
    "dsgd_step",
    "run",
    "trajectory_csv_lines",
    "StepCapResult",
    "nonconvex_step_cap",
    "T0Result",
    "pl_t0_floor",
]


class RunAbort(RuntimeError):
    """A trajectory produced a non-finite update; carries (iteration, agent)."""

    def __init__(self, iteration: int, agent: int, what: str):
        super().__init__(f"non-finite {what} at iteration {iteration}, agent {agent}")
        self.iteration = iteration
        self.agent = agent


@dataclass(frozen=True)
class ConstantStep:
    alpha: float
    kind = "constant"

    def __post_init__(self):
        if self.alpha <= 0:
            raise ValueError("step-size must be positive")

    def value(self, t: int) -> float:
        return self.alpha


@dataclass(frozen=True)
class InverseTimeStep:
    """alpha_t = a / (mu * (t + t0)); the schedule used for PL-type costs."""

    a: float
    mu: float = 1.0
    t0: float = 0.0
    kind = "inverse_time"

    def __post_init__(self):
        if self.a <= 0 or self.mu <= 0:
            raise ValueError("a and mu must be positive")
        if self.t0 < 0 or 1.0 + self.t0 <= 0:
            raise ValueError("t0 must keep t + t0 positive for t >= 1")

    def value(self, t: int) -> float:
        return self.a / (self.mu * (t + self.t0))


@dataclass
class AlgorithmState:
    """Per-agent models, trackers, and previous oracle outputs at time t."""

    x: np.ndarray       # (n, d)
    y: np.ndarray       # (n, d), zeros before the first tracker update
    g_prev: np.ndarray  # (n, d), zeros before the first oracle call
    t: int = 1

    @classmethod
    def initial(cls, x0: np.ndarray) -> "AlgorithmState":
        x0 = np.asarray(x0, dtype=float)
        return cls(x=x0.copy(), y=np.zeros_like(x0), g_prev=np.zeros_like(x0), t=1)

    def tracker_residual(self) -> float:
        """|| mean_i y_i - mean_i g_i ||, zero (to roundoff) for the tracked method."""
        return float(np.linalg.norm(self.y.mean(axis=0) - self.g_prev.mean(axis=0)))


def _abort_if_nonfinite(arr, t, what):
    # a non-finite entry always makes the full sum non-finite
    if not math.isfinite(float(arr.sum())):
        bad = int(np.argwhere(~np.isfinite(arr))[0][0])
        raise RunAbort(t, bad, what)


def _step(state, w, oracle, ensemble, sched, key, tracked, global_grads=None):
    seed, run_id = key
    t = state.t
    alpha = sched.value(t)
    g, exact = sample_gradient_block(
        oracle, ensemble, state.x, seed, run_id, t, alpha=alpha, global_grads=global_grads
    )
    _abort_if_nonfinite(g, t, "oracle output")
    wm = w.w if hasattr(w, "w") else w
    if tracked:
        y = wm @ (state.y + g - state.g_prev)
        _abort_if_nonfinite(y, t, "tracker update")
        x_next = wm @ (state.x - alpha * y)
    else:
        y = state.y
        x_next = wm @ (state.x - alpha * g)
    _abort_if_nonfinite(x_next, t, "model update")
    return AlgorithmState(x=x_next, y=y, g_prev=g, t=t + 1), exact


def gt_dsgd_step(state, w, oracle, ensemble, sched, key) -> AlgorithmState:
    """One tracked-descent transition from iteration t to t+1."""
    new, _ = _step(state, w, oracle, ensemble, sched, key, tracked=True)
    return new


def dsgd_step(state, w, oracle, ensemble, sched, key) -> AlgorithmState:
    """One vanilla decentralized SGD transition (tracker fields unused)."""
    new, _ = _step(state, w, oracle, ensemble, sched, key, tracked=False)
    return new


@dataclass
class TrajectoryRecord:
    """Per-iteration metrics of one run; optional raw traces for checks.

    Metric arrays are indexed by iteration 1..T (position t-1). When traces
    are recorded, ``x_hist`` has T+1 entries (models at t = 1..T+1) while
    ``y_hist``/``g_hist``/``z_hist`` have T (values produced at t = 1..T).
    """

    algorithm: str
    seed: int
    run_id: int
    T: int
    alpha: np.ndarray
    f_avg: np.ndarray
    mse_to_opt: np.ndarray
    consensus_gap: np.ndarray
    tracker_gap: np.ndarray
    stationarity_sum: np.ndarray
    final_x: np.ndarray
    snapshots: dict = field(default_factory=dict)
    x_hist: Optional[np.ndarray] = None
    y_hist: Optional[np.ndarray] = None
    g_hist: Optional[np.ndarray] = None
    z_hist: Optional[np.ndarray] = None

    def max_tracker_mean_residual(self) -> float:
        """Worst || y_bar^t - g_bar^t || over the recorded trace."""
        if self.y_hist is None:
            raise ValueError("traces were not recorded")
        res = np.linalg.norm(self.y_hist.mean(axis=1) - self.g_hist.mean(axis=1), axis=1)
        return float(res.max()) if len(res) else 0.0


@dataclass
class RunConfig:
    """Everything one seeded run needs; shared across the run set."""

    w: object               # MixingMatrix
    ensemble: object        # CostEnsemble
    oracle: object          # OracleSpec
    schedule: object        # step schedule
    T: int
    x0: np.ndarray          # (n, d) initial models
    record_stride: int = 0  # 0 = auto: every iteration if n*d <= 1e4, else every 10
    record_trace: bool = False


def _auto_stride(n, d, stride):
    if stride > 0:
        return stride
    return 1 if n * d <= 10_000 else 10


def run(algorithm: str, config: RunConfig, seed: int, run_id: int) -> TrajectoryRecord:
    """Execute T iterations, recording metrics each iteration.

    Deterministic in (config, seed, run_id); distinct runs are independent
    and may execute on any worker with identical results.
    """
    if algorithm not in ("gt_dsgd", "dsgd"):
        raise ValueError(f"unknown algorithm {algorithm!r}")
    tracked = algorithm == "gt_dsgd"
    e = config.ensemble
    n, d = config.x0.shape
    T = int(config.T)
    opt = e.optimum()
    x_star = opt[0] if opt is not None else None
    stride = _auto_stride(n, d, config.record_stride)

    alpha_rec = np.empty(T)
    f_avg = np.empty(T)
    mse = np.full(T, np.nan)
    cons = np.empty(T)
    track = np.zeros(T)
    statio = np.empty(T)
    snapshots = {}
    if config.record_trace:
        x_hist = np.empty((T + 1, n, d))
        y_hist = np.empty((T, n, d))
        g_hist = np.empty((T, n, d))
        z_hist = np.empty((T, n, d))

    sampler = prepare_sampler(config.oracle, e, n, d)
    wm = config.w.w if hasattr(config.w, "w") else np.asarray(config.w)
    sched = config.schedule
    inv_n = 1.0 / n
    trace = config.record_trace

    x = config.x0.astype(float).copy()
    y = np.zeros((n, d))
    g_prev = np.zeros((n, d))
    # overflow is handled by the explicit non-finite abort, not warnings
    with np.errstate(over="ignore", invalid="ignore"):
        for t in range(1, T + 1):
            xbar = x.sum(axis=0) * inv_n
            gg = e.grad_global_all(x)
            alpha = sched.value(t)
            alpha_rec[t - 1] = alpha
            f_avg[t - 1] = e.value_global(xbar)
            if x_star is not None:
                diff = x - x_star
                mse[t - 1] = (diff * diff).sum() * inv_n
            dev = x - xbar
            cons[t - 1] = (dev * dev).sum() * inv_n
            statio[t - 1] = (gg * gg).sum()
            if trace:
                x_hist[t - 1] = x
            elif stride and (t - 1) % stride == 0:
                snapshots[t] = x.copy()

            g, exact = sampler(x, seed, run_id, t, alpha, gg)
            _abort_if_nonfinite(g, t, "oracle output")
            if tracked:
                y = wm @ (y + g - g_prev)
                _abort_if_nonfinite(y, t, "tracker update")
                x = wm @ (x - alpha * y)
                ydev = y - y.sum(axis=0) * inv_n
                track[t - 1] = (ydev * ydev).sum() * inv_n
            else:
                x = wm @ (x - alpha * g)
            _abort_if_nonfinite(x, t, "model update")
            g_prev = g

            if trace:
                y_hist[t - 1] = y
                g_hist[t - 1] = g
                if exact is None:
                    exact = e.grad_all(x_hist[t - 1])
                z_hist[t - 1] = g - exact

    if trace:
        x_hist[T] = x

    return TrajectoryRecord(
        algorithm=algorithm,
        seed=seed,
        run_id=run_id,
        T=T,
        alpha=alpha_rec,
        f_avg=f_avg,
        mse_to_opt=mse,
        consensus_gap=cons,
        tracker_gap=track,
        stationarity_sum=statio,
        final_x=x.copy(),
        snapshots=snapshots,
        x_hist=x_hist if trace else None,
        y_hist=y_hist if trace else None,
        g_hist=g_hist if trace else None,
        z_hist=z_hist if trace else None,
    )


def trajectory_csv_lines(rec: TrajectoryRecord):
    """Stream a record as CSV lines (one row per iteration)."""
    yield "t,alpha_t,f_avg,mse_to_opt,consensus_gap,tracker_gap,stationarity_sum"
    for t in range(1, rec.T + 1):
        i = t - 1
        mse = "" if math.isnan(rec.mse_to_opt[i]) else repr(float(rec.mse_to_opt[i]))
        yield (
            f"{t},{float(rec.alpha[i])!r},{float(rec.f_avg[i])!r},{mse},"
            f"{float(rec.consensus_gap[i])!r},{float(rec.tracker_gap[i])!r},"
            f"{float(rec.stationarity_sum[i])!r}"
        )


# ---------------------------------------------------------------------------
# Step-size calculators (advisory; experiments may override)
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class StepCapResult:
    alpha: float        # recommended min(sqrt(n/T), cap)
    cap: float          # the problem-constant cap C
    terms: dict         # per-term breakdown; inf marks a non-binding term


def _inv_or_inf(num, den):
    return num / den if den > 0 else math.inf


def nonconvex_step_cap(
    n: int,
    T: int,
    L: float,
    lam: float,
    sigma_sq: float,
    sigma_max_sq: float,
    d: int,
    rho: float = 0.0,
    eps_exponent: float = 1.0,
) -> StepCapResult:
    """Fixed-step cap for the non-convex regime: every term of the min.

    Terms whose denominator vanishes (lam = 0, rho = 0, or zero noise) are
    reported as +inf and never bind. Recommended alpha is min(sqrt(n/T), cap).
    """
    if L <= 0:
        raise ValueError("L must be positive")
    if not (0.0 <= lam < 1.0):
        raise ValueError("lam must lie in [0, 1)")
    one = 1.0 - lam * lam
    sigma = math.sqrt(sigma_sq)
    terms = {
        "consensus": _inv_or_inf(one ** 2, 16.0 * lam * lam * L * math.sqrt(3.0)),
        "mixing_sqrt4": _inv_or_inf(one, 4.0 * lam * L * 12.0 ** 0.25),
        "mixing_cbrt": _inv_or_inf(one ** (4.0 / 3.0), 4.0 * lam ** (4.0 / 3.0) * L * 12.0 ** (1.0 / 3.0)),
        "mixing_noise": _inv_or_inf(
            n ** (1.0 / 3.0) * one ** (4.0 / 3.0),
            lam ** (4.0 / 3.0) * sigma_max_sq ** (1.0 / 3.0) * L ** (2.0 / 3.0) * 1614.0 ** (1.0 / 3.0),
        ),
        "smoothness": 1.0 / (4.0 * L),
        "noise_dimension": (
            (n / (9.0 * sigma_sq)) * math.sqrt(n / (282.0 * math.e * sigma_sq * d * L))
            if sigma_sq > 0 else math.inf
        ),
        "relaxed_ratio": _inv_or_inf(sigma * math.sqrt(32.0), rho),
        "relaxed_root": (
            (1.0 / (16.0 * n * rho * rho)) ** (1.0 / (1.0 + eps_exponent))
            if rho > 0 else math.inf
        ),
    }
    cap = min(terms.values())
    alpha = min(math.sqrt(n / T), cap) if T > 0 else cap
    return StepCapResult(alpha=alpha, cap=cap, terms=terms)


@dataclass(frozen=True)
class T0Result:
    t0: float
    terms: dict


def pl_t0_floor(
    n: int,
    lam: float,
    a: float,
    L: float,
    mu: float,
    sigma_sq: float,
    sigma_max_sq: float,
    rho: float = 0.0,
    eps_exponent: float = 1.0,
) -> T0Result:
    """Schedule offset floor for alpha_t = a/(mu (t + t0)) in the PL regime.

    Evaluates every term of the max. Terms carrying rho vanish at rho = 0;
    terms multiplied by lam vanish at lam = 0. Requires a >= 6.
    """
    if a < 6:
        raise ValueError("the schedule constant a must be >= 6")
    if mu <= 0 or L <= 0:
        raise ValueError("mu and L must be positive")
    if not (0.0 <= lam < 1.0):
        raise ValueError("lam must lie in [0, 1)")
    kappa = L / mu
    one = 1.0 - lam * lam
    sigma = math.sqrt(sigma_sq)
    sigma_max = math.sqrt(sigma_max_sq)
    eps = eps_exponent

    if rho > 0:
        relaxed_a = (a / mu) * (12.0 * rho * rho * L) ** (1.0 / (4.0 + 2.0 * eps))
        relaxed_b = (a / mu) * (18.0 * rho * rho * L * L) ** (1.0 / (5.0 + 2.0 * eps))
        inv32 = (
            (1.0 / (32.0 * sigma_sq)) ** (1.0 / (2.0 + eps)) if sigma_sq > 0 else math.inf
        )
        relaxed_c = (a / mu) * rho ** (1.0 / (2.0 + eps)) * max(
            sigma_max ** (2.0 / (2.0 + eps)), inv32
        )
        relaxed_d = (a / mu) * (4.0 * n * rho) ** (1.0 / (1.0 + eps)) * max(
            1.0, (1.0 / mu) ** (1.0 / (1.0 + eps)), (4.0 * kappa) ** (1.0 / (1.0 + eps))
        )
    else:
        relaxed_a = relaxed_b = relaxed_c = relaxed_d = 0.0

    terms = {
        "mixing": 12.0 / one,
        "network_curvature": 64.0 * n * a ** 3 * kappa ** 3 * lam * lam * L / one ** 4,
        "noise_fourth": 9216.0 * sigma_max_sq ** 2 * lam ** 4 / (n * n),
        "curvature_quartic": 576.0 * a ** 4 * kappa ** 2 / (mu * mu),
        "noise_curvature": 384.0 * a * a * sigma_sq * kappa / mu,
        "relaxed_a": relaxed_a,
        "relaxed_b": relaxed_b,
        "condition": 2.0 * a * kappa,
        "curvature_linear": 6.0 * a / mu,
        "noise_scale": (2.0 * a * math.sqrt(L) / (mu * math.sqrt(n))) * max(
            4.0 * sigma * math.sqrt(3.0),
            3.0 * math.sqrt(2.0 * L),
            48.0 * sigma * lam * math.sqrt(3.0 * L),
        ),
        "relaxed_c": relaxed_c,
        "relaxed_d": relaxed_d,
        "condition_mixing": 2.0 * a * kappa * max(3.0 * L, 640.0 * lam * lam),
        "mixing_condition": (
            (2.0 * a * lam * kappa * math.sqrt(3.0) / one ** 2) * max(
                math.sqrt(kappa), 8.0 * lam * L * math.sqrt(5.0)
            )
        ),
    }
    return T0Result(t0=max(terms.values()), terms=terms)
