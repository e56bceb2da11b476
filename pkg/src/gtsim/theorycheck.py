"""Trajectory-level inequality checks.

Four descent/consensus inequalities hold pathwise (deterministically, given
the realized noise trace) whenever their step-size caps are respected; any
slack below -1e-9 is a build bug, not statistical variation. The noise
property checks are Monte-Carlo and pass at three standard errors.

All checks are pure functions of recorded traces: re-running on the same
trajectories yields identical reports.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .noise import calibrate_sigma, noise_samples

__all__ = [
    "SLACK_TOL",
    "CheckReport",
    "merge_reports",
    "check_descent",
    "check_descent_pl",
    "check_consensus_bound",
    "check_tracker_recursion",
    "check_noise_properties",
    "descent_step_cap",
    "descent_pl_step_cap",
    "consensus_step_cap",
    "tracker_step_cap",
]

SLACK_TOL = -1e-9
_EXP_CAP = 700.0


@dataclass
class CheckReport:
    """Outcome of one check: worst signed slack, negative means violation."""

    name: str
    instances: int
    worst_slack: float
    violations: list = field(default_factory=list)
    deterministic: bool = True
    details: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.worst_slack >= SLACK_TOL

    def summary(self) -> str:
        status = "pass" if self.passed else "FAIL"
        return (
            f"{self.name}: {status} ({self.instances} instances, "
            f"worst slack {self.worst_slack:.3e})"
        )


def merge_reports(name: str, reports) -> CheckReport:
    """Combine per-run reports of the same check into one."""
    reports = list(reports)
    if not reports:
        raise ValueError("nothing to merge")
    return CheckReport(
        name=name,
        instances=sum(r.instances for r in reports),
        worst_slack=min(r.worst_slack for r in reports),
        violations=[v for r in reports for v in r.violations],
        deterministic=all(r.deterministic for r in reports),
        details={"runs": len(reports)},
    )


def _require_trace(rec):
    if rec.x_hist is None or rec.z_hist is None:
        raise ValueError("this check needs a trajectory recorded with traces enabled")


def _constant_alpha(rec) -> float:
    alpha = float(rec.alpha[0])
    if np.max(np.abs(rec.alpha - alpha)) > 1e-15:
        raise ValueError("this check is stated for a constant step-size")
    return alpha


def descent_step_cap(L: float) -> float:
    return 1.0 / (4.0 * L)


def descent_pl_step_cap(L: float) -> float:
    return 1.0 / (2.0 * L)


def consensus_step_cap(lam: float, L: float) -> float:
    if lam == 0.0:
        return math.inf
    return (1.0 - lam * lam) ** 2 / (16.0 * lam * lam * L * math.sqrt(3.0))


def tracker_step_cap(lam: float, L: float) -> float:
    if lam == 0.0:
        return math.inf
    return (1.0 - lam * lam) ** 1.5 / (4.0 * lam * lam * L * math.sqrt(6.0))


def _sq(v) -> float:
    v = np.asarray(v)
    return float(np.sum(v * v))


def check_descent(rec, e, run_label: int | None = None) -> CheckReport:
    """Per-iteration descent inequality for the averaged model, fixed step.

    With alpha <= 1/(4L), for every t:

        f(xbar^{t+1}) <= f(xbar^t) - (alpha/2) ||grad f(xbar^t)||^2
                         - alpha <grad f(xbar^t), zbar^t> + alpha^2 L ||zbar^t||^2
                         + (alpha L^2 / 2n) sum_i ||x_i^t - xbar^t||^2
                         - (alpha/4) ||gbar_exact^t||^2
    """
    _require_trace(rec)
    alpha = _constant_alpha(rec)
    L = e.smoothness()
    if alpha > descent_step_cap(L) * (1 + 1e-12):
        raise ValueError(f"alpha {alpha} exceeds the cap 1/(4L) = {descent_step_cap(L)}")
    T, n = rec.T, rec.x_hist.shape[1]
    worst = math.inf
    violations = []
    for t in range(1, T + 1):
        x = rec.x_hist[t - 1]
        xbar = x.mean(axis=0)
        zbar = rec.z_hist[t - 1].mean(axis=0)
        exact_bar = (rec.g_hist[t - 1] - rec.z_hist[t - 1]).mean(axis=0)
        grad_bar = e.grad_global(xbar)
        gap = _sq(x - xbar)
        rhs = (
            e.value_global(xbar)
            - 0.5 * alpha * _sq(grad_bar)
            - alpha * float(grad_bar @ zbar)
            + alpha * alpha * L * _sq(zbar)
            + alpha * L * L / (2.0 * n) * gap
            - 0.25 * alpha * _sq(exact_bar)
        )
        lhs = e.value_global(rec.x_hist[t].mean(axis=0))
        slack = rhs - lhs
        if slack < worst:
            worst = slack
        if slack < SLACK_TOL:
            violations.append((run_label, t))
    return CheckReport("descent", T, worst, violations)


def check_descent_pl(rec, e, run_label: int | None = None) -> CheckReport:
    """Descent inequality with the (1 - alpha_t mu) contraction, PL costs.

    Needs alpha_t <= 1/(2L) for all recorded t and a known PL constant mu.
    """
    _require_trace(rec)
    L = e.smoothness()
    mu = e.pl_constant()
    if mu is None:
        raise ValueError("PL descent check needs an ensemble with a known mu")
    if np.max(rec.alpha) > descent_pl_step_cap(L) * (1 + 1e-12):
        raise ValueError("some alpha_t exceeds the cap 1/(2L)")
    _, f_star = e.optimum()
    T, n = rec.T, rec.x_hist.shape[1]
    worst = math.inf
    violations = []
    for t in range(1, T + 1):
        alpha = float(rec.alpha[t - 1])
        x = rec.x_hist[t - 1]
        xbar = x.mean(axis=0)
        zbar = rec.z_hist[t - 1].mean(axis=0)
        grad_bar = e.grad_global(xbar)
        gap = _sq(x - xbar)
        rhs = (
            (1.0 - alpha * mu) * (e.value_global(xbar) - f_star)
            - alpha * float(grad_bar @ zbar)
            + alpha * alpha * L * _sq(zbar)
            + alpha * L * L / (2.0 * n) * gap
        )
        lhs = e.value_global(rec.x_hist[t].mean(axis=0)) - f_star
        slack = rhs - lhs
        if slack < worst:
            worst = slack
        if slack < SLACK_TOL:
            violations.append((run_label, t))
    return CheckReport("descent_pl", T, worst, violations)


def check_consensus_bound(rec, w, e, run_label: int | None = None) -> CheckReport:
    """Summed consensus-gap bound over the horizon, fixed step.

    With alpha <= (1-lam^2)^2 / (16 lam^2 L sqrt(3)):

        (1/n) sum_t sum_i ||x_i^t - xbar^t||^2
          <= 4 Dx / (1-lam^2)
           + 32 alpha^2 lam^2 / (n (1-lam^2)^3) * sum_i ||y_i^1 - ybar^1||^2
           + 512 alpha^2 lam^4 / (n (1-lam^2)^4) * sum_t sum_i ||z_i^t||^2
           + 768 alpha^4 lam^4 L^2 / (1-lam^2)^4 * sum_t (||gbar_exact^t||^2 + ||zbar^t||^2)

    where Dx is the initial consensus gap. All right-hand quantities come from
    the same recorded trajectory.
    """
    _require_trace(rec)
    alpha = _constant_alpha(rec)
    L = e.smoothness()
    lam = float(w.lam)
    cap = consensus_step_cap(lam, L)
    if alpha > cap * (1 + 1e-12):
        raise ValueError(f"alpha {alpha} exceeds the consensus cap {cap}")
    one = 1.0 - lam * lam
    T, n = rec.T, rec.x_hist.shape[1]

    lhs = 0.0
    sum_z_sq = 0.0
    sum_avg_sq = 0.0
    for t in range(1, T + 1):
        x = rec.x_hist[t - 1]
        lhs += _sq(x - x.mean(axis=0)) / n
        z = rec.z_hist[t - 1]
        sum_z_sq += _sq(z)
        exact_bar = (rec.g_hist[t - 1] - z).mean(axis=0)
        sum_avg_sq += _sq(exact_bar) + _sq(z.mean(axis=0))
    x1 = rec.x_hist[0]
    delta_x = _sq(x1 - x1.mean(axis=0)) / n
    y1 = rec.y_hist[0]
    y1_gap = _sq(y1 - y1.mean(axis=0))
    rhs = (
        4.0 * delta_x / one
        + 32.0 * alpha * alpha * lam * lam / (n * one ** 3) * y1_gap
        + 512.0 * alpha ** 2 * lam ** 4 / (n * one ** 4) * sum_z_sq
        + 768.0 * alpha ** 4 * lam ** 4 * L * L / one ** 4 * sum_avg_sq
    )
    slack = rhs - lhs
    violations = [] if slack >= SLACK_TOL else [(run_label, T)]
    return CheckReport("consensus_bound", 1, slack, violations,
                       details={"lhs": lhs, "rhs": rhs})


def check_tracker_recursion(rec, w, e, run_label: int | None = None) -> CheckReport:
    """One-step tracker-gap recursion, fixed step.

    With alpha <= (1-lam^2)^(3/2) / (4 lam^2 L sqrt(6)), for every t:

        ||y^{t+1} - ybar^{t+1}||^2 <= (3+lam^2)/4 ||y^t - ybar^t||^2
          + 24 lam^2 L^2/(1-lam^2) ||x^t - xbar^t||^2
          + 4 lam^2/(1-lam^2) ||z^{t+1} - z^t||^2
          + 12 alpha^2 lam^2 L^2/(1-lam^2) * n ||gbar^t||^2

    (stacked norms over agents; gbar is the mean oracle output).
    """
    _require_trace(rec)
    alpha = _constant_alpha(rec)
    L = e.smoothness()
    lam = float(w.lam)
    cap = tracker_step_cap(lam, L)
    if alpha > cap * (1 + 1e-12):
        raise ValueError(f"alpha {alpha} exceeds the tracker cap {cap}")
    one = 1.0 - lam * lam
    T, n = rec.T, rec.x_hist.shape[1]
    worst = math.inf
    violations = []
    for t in range(1, T):
        y_now = rec.y_hist[t - 1]
        y_next = rec.y_hist[t]
        x = rec.x_hist[t - 1]
        z_now = rec.z_hist[t - 1]
        z_next = rec.z_hist[t]
        gbar = rec.g_hist[t - 1].mean(axis=0)
        lhs = _sq(y_next - y_next.mean(axis=0))
        rhs = (
            (3.0 + lam * lam) / 4.0 * _sq(y_now - y_now.mean(axis=0))
            + 24.0 * lam * lam * L * L / one * _sq(x - x.mean(axis=0))
            + 4.0 * lam * lam / one * _sq(z_next - z_now)
            + 12.0 * alpha * alpha * lam * lam * L * L / one * n * _sq(gbar)
        )
        slack = rhs - lhs
        if slack < worst:
            worst = slack
        if slack < SLACK_TOL:
            violations.append((run_label, t))
    if T < 2:
        worst = 0.0
    return CheckReport("tracker_recursion", max(T - 1, 0), worst, violations)


def _capped_exp_mean(w):
    capped = int(np.sum(w > _EXP_CAP))
    vals = np.exp(np.minimum(w, _EXP_CAP))
    return float(vals.mean()), float(vals.std(ddof=1) / math.sqrt(len(vals))), capped


def check_noise_properties(
    o,
    e,
    xs,
    samples: int = 100_000,
    seed: int = 0,
    n_avg=(4, 16),
    agent: int = 0,
) -> CheckReport:
    """Monte-Carlo noise checks against the closed-form sub-Gaussian bounds.

    At each grid point x (plain-Gaussian noise, so the point only matters for
    dataset-backed oracles):

    - tail:    P(||Z|| > eps) <= 2 exp(-eps^2 / (2 sigma^2)) at eps = sigma, 2 sigma, 3 sigma
    - moment:  E ||Z||^(2p)   <= (2p)^(p+1) sigma^(2p) for p = 1, 2, 3
    - average: E exp(m ||zbar||^2 / (96 sigma^2)) <= 2 d e for m in ``n_avg``

    sigma^2 is the calibrated parameter of the agent's noise. Every sub-check
    passes if the estimate stays within three standard errors of its bound;
    margins are recorded in the details.
    """
    if samples < 100_000:
        raise ValueError("noise property checks need at least 1e5 samples")
    if getattr(o, "rho", 0.0) != 0.0:
        raise ValueError("closed-form comparisons require the rho = 0 flavor")
    if o.kind == "gaussian":
        s = float(o.s_vector(e.n)[agent])
    else:
        s = float(o.s)
    d = e.d
    sigma_sq = calibrate_sigma(s, d)
    if sigma_sq == 0.0:
        # noiseless: every bound holds with slack equal to the bound itself
        return CheckReport("noise_properties", 1, 2.0, [], deterministic=False,
                           details={"noiseless": True})
    sigma = math.sqrt(sigma_sq)

    worst = math.inf
    violations = []
    details = {}

    def record(label, estimate, bound, stderr):
        nonlocal worst
        slack = bound + 3.0 * stderr - estimate
        details[label] = {"estimate": estimate, "bound": bound, "stderr": stderr}
        if slack < worst:
            worst = slack
        if slack < 0:
            violations.append(label)

    for k, x in enumerate(xs):
        z = noise_samples(o, e, agent, x, samples, seed=seed + k)
        norms = np.linalg.norm(z, axis=1)
        for mult in (1.0, 2.0, 3.0):
            eps = mult * sigma
            p_hat = float(np.mean(norms > eps))
            stderr = math.sqrt(max(p_hat * (1 - p_hat), 1.0 / samples) / samples)
            bound = min(1.0, 2.0 * math.exp(-eps * eps / (2.0 * sigma_sq)))
            record(f"tail_x{k}_eps{mult:g}sigma", p_hat, bound, stderr)
        for p in (1, 2, 3):
            vals = norms ** (2 * p)
            est = float(vals.mean())
            stderr = float(vals.std(ddof=1) / math.sqrt(samples))
            bound = (2.0 * p) ** (p + 1) * sigma_sq ** p
            record(f"moment_x{k}_p{p}", est, bound, stderr)
        for m in n_avg:
            draws = np.stack(
                [noise_samples(o, e, agent, x, samples, seed=seed + 1000 + 17 * k + j)
                 for j in range(m)]
            )
            zbar = draws.mean(axis=0)
            wexp = m * np.sum(zbar * zbar, axis=1) / (96.0 * sigma_sq)
            est, stderr, capped = _capped_exp_mean(wexp)
            bound = 2.0 * d * math.e
            record(f"avg_mgf_x{k}_n{m}", est, bound, stderr)
            if capped:
                details[f"avg_mgf_x{k}_n{m}"]["capped"] = capped

    return CheckReport(
        "noise_properties",
        instances=len(details),
        worst_slack=worst,
        violations=violations,
        deterministic=False,
        details=details,
    )
