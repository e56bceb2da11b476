"""Stochastic first-order oracles.

Three flavors of noisy gradient access: exact gradient plus Gaussian noise,
mini-batch sampling over finite local datasets, and a synthetic noise model
whose amplitude grows with the global gradient norm (the "relaxed" regime
where the squared-norm MGF bound carries a gradient-dependent term).

All randomness is counter-based: one Philox stream per (seed, run, iteration),
with agent i owning row i of the block, so draws are a pure function of the
key and independent of scheduling.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence, Union

import numpy as np

__all__ = [
    "OracleError",
    "GaussianOracle",
    "MinibatchOracle",
    "RelaxedSubgaussianOracle",
    "OracleSpec",
    "noise_block",
    "sample_gradient",
    "prepare_sampler",
    "sample_gradient_block",
    "calibrate_sigma",
    "MgfEstimate",
    "estimate_mgf",
    "noise_samples",
]

_EXP_CAP = 700.0  # exp(700) is near the float64 overflow edge


class OracleError(ValueError):
    """Invalid oracle configuration or sampling request."""


@dataclass(frozen=True)
class GaussianOracle:
    """Exact gradient plus N(0, s_i^2 I) noise; ``s`` scalar or per-agent."""

    s: Union[float, tuple]
    kind = "gaussian"

    def __post_init__(self):
        if np.any(np.asarray(self.s, dtype=float) < 0):
            raise OracleError("noise std must be >= 0")

    def s_vector(self, n: int) -> np.ndarray:
        s = np.asarray(self.s, dtype=float)
        if s.ndim == 0:
            return np.full(n, float(s))
        if s.shape != (n,):
            raise OracleError(f"per-agent std must have length {n}")
        return s


@dataclass(frozen=True)
class MinibatchOracle:
    """Uniform without-replacement mini-batches over finite local datasets.

    ``allow_full`` lifts the batch < m_i restriction for test fixtures only.
    """

    batch_size: int
    allow_full: bool = False
    kind = "minibatch"

    def __post_init__(self):
        if self.batch_size < 1:
            raise OracleError("batch_size must be >= 1")


@dataclass(frozen=True)
class RelaxedSubgaussianOracle:
    """Gaussian noise with amplitude sqrt(1 + rho * alpha^(2+eps) * ||grad f(x)||).

    Reduces to the plain Gaussian oracle at rho = 0. Conformance to the
    squared-norm MGF bound is certified empirically via :func:`estimate_mgf`,
    not proven.
    """

    s: float
    rho: float
    eps_exponent: float
    kind = "relaxed_subgaussian"

    def __post_init__(self):
        if self.s < 0:
            raise OracleError("noise std must be >= 0")
        if self.rho < 0:
            raise OracleError("rho must be >= 0")
        if self.eps_exponent <= 0:
            raise OracleError("eps_exponent must be > 0")


OracleSpec = Union[GaussianOracle, MinibatchOracle, RelaxedSubgaussianOracle]


_MASK64 = 2**64 - 1
_RUN_BITS, _T_BITS = 24, 36


def _generator(seed: int, stream: int, run: int, t: int) -> np.random.Generator:
    """Counter-based generator for one (seed, stream, run, iteration) cell.

    The cell is packed into the 128-bit Philox key (distinct keys yield
    independent streams by construction); the block counter stays at zero and
    only advances within the cell's own draws.
    """
    if not (0 <= run < 2**_RUN_BITS):
        raise OracleError(f"run index must fit in {_RUN_BITS} bits")
    if not (0 <= t < 2**_T_BITS):
        raise OracleError(f"iteration index must fit in {_T_BITS} bits")
    key = [int(seed) & _MASK64, (stream << (_RUN_BITS + _T_BITS)) | (run << _T_BITS) | t]
    return np.random.Generator(np.random.Philox(key=key))


def noise_block(seed: int, run: int, t: int, n: int, d: int) -> np.ndarray:
    """Standard-normal block for iteration t; rows are the per-agent draws."""
    return _generator(seed, 0, run, t).standard_normal((n, d))


def _batch_generator(seed: int, run: int, t: int) -> np.random.Generator:
    # separate stream tag so index draws never alias the normal draws
    return _generator(seed, 1, run, t)


def _require_dataset(e):
    if not hasattr(e, "grad_batch"):
        raise OracleError("no dataset: mini-batch oracle needs a dataset-backed ensemble")


def _batch_of(o, e, i, gen):
    m = e.sample_count(i)
    if o.batch_size > m or (o.batch_size == m and not o.allow_full):
        raise OracleError(f"batch_size {o.batch_size} must be < local dataset size {m}")
    return gen.choice(m, size=o.batch_size, replace=False)


def _relaxed_scale(o, alpha, global_grad_norm):
    if o.rho == 0.0:
        return 1.0
    if alpha is None:
        raise OracleError("relaxed oracle needs the current step-size alpha")
    return np.sqrt(1.0 + o.rho * alpha ** (2.0 + o.eps_exponent) * global_grad_norm)


def sample_gradient(o: OracleSpec, e, i: int, x: np.ndarray, key, alpha: Optional[float] = None) -> np.ndarray:
    """Draw the stochastic gradient for one agent; ``key`` is (seed, run, t).

    Deterministic in (key, agent): repeated calls return identical output.
    """
    seed, run, t = key
    x = np.asarray(x, dtype=float)
    if o.kind == "minibatch":
        _require_dataset(e)
        gen = _batch_generator(seed, run, t)
        idx = None
        for j in range(i + 1):  # replay preceding agents' draws to reach agent i
            idx = _batch_of(o, e, j, gen)
        return e.grad_batch(i, x, idx)
    z = noise_block(seed, run, t, e.n, e.d)[i]
    grad = e.grad_local(i, x)
    if o.kind == "gaussian":
        return grad + o.s_vector(e.n)[i] * z
    if o.kind == "relaxed_subgaussian":
        scale = _relaxed_scale(o, alpha, float(np.linalg.norm(e.grad_global(x))))
        return grad + o.s * scale * z
    raise OracleError(f"unknown oracle kind {o.kind!r}")


def prepare_sampler(o: OracleSpec, e, n: int, d: int):
    """Bind an oracle to an ensemble for the hot loop.

    Returns ``f(x_rows, seed, run, t, alpha, global_grads) -> (g, exact)``
    where ``exact`` holds the noiseless local gradients when they come for
    free (additive-noise flavors), else None.
    """
    if o.kind == "minibatch":
        _require_dataset(e)

        def sample_minibatch(x_rows, seed, run, t, alpha=None, global_grads=None):
            gen = _batch_generator(seed, run, t)
            g = np.empty((n, d))
            for i in range(n):
                g[i] = e.grad_batch(i, x_rows[i], _batch_of(o, e, i, gen))
            return g, None

        return sample_minibatch

    if o.kind == "gaussian":
        s_col = o.s_vector(n)[:, None]
        if not s_col.any():

            def sample_exact(x_rows, seed, run, t, alpha=None, global_grads=None):
                exact = e.grad_all(x_rows)
                return exact, exact

            return sample_exact

        def sample_gaussian(x_rows, seed, run, t, alpha=None, global_grads=None):
            exact = e.grad_all(x_rows)
            return exact + s_col * noise_block(seed, run, t, n, d), exact

        return sample_gaussian

    if o.kind == "relaxed_subgaussian":
        if o.rho == 0.0:

            def sample_plain(x_rows, seed, run, t, alpha=None, global_grads=None):
                exact = e.grad_all(x_rows)
                return exact + o.s * noise_block(seed, run, t, n, d), exact

            return sample_plain

        def sample_relaxed(x_rows, seed, run, t, alpha=None, global_grads=None):
            exact = e.grad_all(x_rows)
            if global_grads is None:
                global_grads = e.grad_global_all(x_rows)
            if alpha is None:
                raise OracleError("relaxed oracle needs the current step-size alpha")
            norms = np.linalg.norm(global_grads, axis=1)
            scale = np.sqrt(1.0 + o.rho * alpha ** (2.0 + o.eps_exponent) * norms)
            return exact + o.s * scale[:, None] * noise_block(seed, run, t, n, d), exact

        return sample_relaxed

    raise OracleError(f"unknown oracle kind {o.kind!r}")


def sample_gradient_block(
    o: OracleSpec,
    e,
    x_rows: np.ndarray,
    seed: int,
    run: int,
    t: int,
    alpha: Optional[float] = None,
    need_exact: bool = False,
    global_grads: Optional[np.ndarray] = None,
):
    """Stochastic gradients for all agents at once; returns (g, exact).

    For additive-noise flavors the exact gradients come for free; for the
    mini-batch flavor they are computed only when ``need_exact`` is set,
    doubling the oracle cost.
    """
    n, d = x_rows.shape
    g, exact = prepare_sampler(o, e, n, d)(x_rows, seed, run, t, alpha, global_grads)
    if exact is None and need_exact:
        exact = e.grad_all(x_rows)
    return g, exact


def calibrate_sigma(s: float, d: int) -> float:
    """Smallest sigma^2 with E[exp(||N(0, s^2 I_d)||^2 / sigma^2)] <= e.

    Closed form 2 s^2 / (1 - exp(-2/d)); the noiseless case returns 0.
    """
    if s < 0:
        raise OracleError("noise std must be >= 0")
    if d < 1:
        raise OracleError("dimension must be >= 1")
    if s == 0.0:
        return 0.0
    return 2.0 * s * s / (1.0 - np.exp(-2.0 / d))


def noise_samples(
    o: OracleSpec,
    e,
    i: int,
    x: np.ndarray,
    count: int,
    seed: int = 0,
    alpha: Optional[float] = None,
) -> np.ndarray:
    """Monte-Carlo noise draws z = g - grad f_i(x) for diagnostics, (count, d)."""
    x = np.asarray(x, dtype=float)
    gen = _generator(seed, 2, i, 0)
    if o.kind == "gaussian":
        return o.s_vector(e.n)[i] * gen.standard_normal((count, e.d))
    if o.kind == "relaxed_subgaussian":
        scale = _relaxed_scale(o, alpha, float(np.linalg.norm(e.grad_global(x))))
        return o.s * scale * gen.standard_normal((count, e.d))
    if o.kind == "minibatch":
        _require_dataset(e)
        grad = e.grad_local(i, x)
        out = np.empty((count, e.d))
        for k in range(count):
            out[k] = e.grad_batch(i, x, _batch_of(o, e, i, gen)) - grad
        return out
    raise OracleError(f"unknown oracle kind {o.kind!r}")


@dataclass(frozen=True)
class MgfEstimate:
    value: float
    stderr: float
    capped: int
    samples: int


def estimate_mgf(
    o: OracleSpec,
    e,
    i: int,
    x: np.ndarray,
    sigma_sq: float,
    samples: int,
    seed: int = 0,
    alpha: Optional[float] = None,
) -> MgfEstimate:
    """Monte-Carlo estimate of E[exp(||z||^2 / sigma^2)] with a standard error.

    Exponents are capped at 700 before exponentiation; the number of capped
    samples is reported so overflow never passes silently.
    """
    if samples < 10_000:
        raise OracleError("estimate_mgf needs at least 1e4 samples")
    if sigma_sq <= 0:
        raise OracleError("sigma_sq must be > 0")
    z = noise_samples(o, e, i, x, samples, seed=seed, alpha=alpha)
    w = np.sum(z * z, axis=1) / sigma_sq
    capped = int(np.sum(w > _EXP_CAP))
    vals = np.exp(np.minimum(w, _EXP_CAP))
    return MgfEstimate(
        value=float(vals.mean()),
        stderr=float(vals.std(ddof=1) / np.sqrt(samples)),
        capped=capped,
        samples=samples,
    )
