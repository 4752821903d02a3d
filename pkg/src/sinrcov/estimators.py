"""Downlink SINR coverage estimators for Poisson cellular networks.

Four routes to the same curve of P(SINR > T) versus threshold:

* ``hybrid_coverage``  - Monte Carlo over geometry only; fading of the K-1
  strongest interferers is integrated out exactly and the remaining far-field
  annulus enters through the exponential functional of the point process.
* ``empirical_coverage`` - plain Monte Carlo over geometry and Rayleigh
  fading, counting threshold exceedances.
* ``sg_coverage`` - deterministic nested quadrature for the infinite-network
  limit (requires pathloss exponent > 2).
* ``prob_model_coverage`` - closed-form Gaussian-moment approximation of the
  interference (pathloss exponent 4 only; moment inputs supplied by the
  caller).

The two Monte Carlo estimators draw geometry from identical per-trial
substreams, so their curves are positively correlated and directly
comparable, and per-threshold standard errors of the hybrid route never
exceed the empirical ones in expectation.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from . import streams
from .geometry import (
    NetworkConfig,
    nearest_window_distances,
    sample_ordered_distances_direct,
    sample_window_realization,
)
from .quadrature import (
    DEFAULT_ABS_TOL,
    _pow_eta,
    integrate_adaptive,
    tail_integral,
    tail_integral_batch,
)

SAMPLER_WINDOW = "window"
SAMPLER_DIRECT = "direct"

METHOD_HYBRID = "hybrid"
METHOD_SIMULATION = "simulation"
METHOD_SG = "sg"
METHOD_PROBABILISTIC = "probabilistic"

# Trials are processed in fixed-size blocks; partial sums are reduced in
# block order, so results are identical for any worker count.
_TRIAL_BLOCK = 1024


class EstimatorError(RuntimeError):
    """A Monte Carlo estimator could not produce an estimate."""


class ModelValidityError(ValueError):
    """The closed-form moment model is outside its validity region."""


@dataclass(frozen=True)
class EstimatorSettings:
    """Algorithmic knobs shared by the Monte Carlo estimators."""

    dominant_count: int = 4
    interferer_total: int = 10
    trials: int = 50_000
    quad_abs_tol: float = DEFAULT_ABS_TOL
    seed: int = 0

    def __post_init__(self) -> None:
        if not 1 <= self.dominant_count <= self.interferer_total:
            raise ValueError(
                f"need 1 <= dominant_count <= interferer_total, got "
                f"K={self.dominant_count}, N={self.interferer_total}"
            )
        if self.trials < 1:
            raise ValueError(f"trials must be >= 1, got {self.trials}")
        if not self.quad_abs_tol > 0:
            raise ValueError(f"quad_abs_tol must be > 0, got {self.quad_abs_tol}")
        if not 0 <= self.seed < 2**64:
            raise ValueError(f"seed must be a 64-bit unsigned integer")


@dataclass(frozen=True)
class ThresholdGrid:
    """SINR thresholds in dB and linear form, strictly increasing."""

    thresholds_db: np.ndarray
    thresholds_linear: np.ndarray

    def __post_init__(self) -> None:
        db = np.asarray(self.thresholds_db, dtype=float)
        lin = np.asarray(self.thresholds_linear, dtype=float)
        if db.ndim != 1 or db.shape != lin.shape or db.size == 0:
            raise ValueError("thresholds must be equal-length 1-D arrays")
        if np.any(np.diff(db) <= 0):
            raise ValueError("thresholds must be strictly increasing")
        if np.any(lin <= 0):
            raise ValueError("linear thresholds must be positive")
        if not np.allclose(lin, 10.0 ** (db / 10.0), rtol=1e-12, atol=0.0):
            raise ValueError("linear thresholds must equal 10**(db/10)")
        object.__setattr__(self, "thresholds_db", db)
        object.__setattr__(self, "thresholds_linear", lin)

    def __len__(self) -> int:
        return self.thresholds_db.size

    @classmethod
    def from_db_values(cls, values) -> "ThresholdGrid":
        db = np.asarray(values, dtype=float)
        return cls(db, 10.0 ** (db / 10.0))

    @classmethod
    def from_db_range(cls, tmin_db: float, tmax_db: float,
                      tstep_db: float) -> "ThresholdGrid":
        if not tstep_db > 0:
            raise ValueError(f"tstep_db must be > 0, got {tstep_db}")
        if tmax_db < tmin_db:
            raise ValueError("tmax_db must be >= tmin_db")
        count = int(math.floor((tmax_db - tmin_db) / tstep_db + 1e-9)) + 1
        return cls.from_db_values(tmin_db + tstep_db * np.arange(count))

    @classmethod
    def from_linear_values(cls, values) -> "ThresholdGrid":
        lin = np.asarray(values, dtype=float)
        if np.any(lin <= 0):
            raise ValueError("linear thresholds must be positive")
        return cls(10.0 * np.log10(lin), lin)


@dataclass(frozen=True)
class CoverageCurve:
    """Per-threshold coverage estimates of one method at one (eta, N, K)."""

    method: str
    eta: float
    interferer_total: int
    dominant_count: int
    thresholds_db: np.ndarray
    thresholds_linear: np.ndarray
    estimates: np.ndarray
    stderrs: np.ndarray
    trials_used: np.ndarray


@dataclass(frozen=True)
class ProbModelParams:
    """Caller-supplied moment inputs of the closed-form baseline.

    ``mu_s`` and ``sigma_s_sq`` are the mean and variance parameters of the
    interference-plus-signal moment model for ``interferer_total`` nearest
    interferers; ``sigma0_sq`` is the reference power of the serving link.
    All three come from an external moment computation and have no defaults.
    """

    mu_s: float
    sigma_s_sq: float
    sigma0_sq: float
    interferer_total: int

    def __post_init__(self) -> None:
        if not self.sigma_s_sq >= 0:
            raise ValueError(f"sigma_s_sq must be >= 0, got {self.sigma_s_sq}")
        if not self.sigma0_sq > 0:
            raise ValueError(f"sigma0_sq must be > 0, got {self.sigma0_sq}")
        if self.interferer_total < 2:
            raise ValueError(
                f"interferer_total must be >= 2, got {self.interferer_total}"
            )


def _blocks(n_trials: int):
    return [(lo, min(lo + _TRIAL_BLOCK, n_trials))
            for lo in range(0, n_trials, _TRIAL_BLOCK)]


def _map_blocks(fn, n_trials: int, threads: int):
    """Run ``fn(lo, hi)`` over fixed trial blocks, preserving block order.

    The block layout and per-trial substreams never depend on ``threads``,
    so any worker count reproduces the single-threaded result bit for bit.
    The sampling loops are Python-bound, so this is a scheduling knob rather
    than a throughput one.
    """
    blocks = _blocks(n_trials)
    if threads <= 1 or len(blocks) == 1:
        return [fn(lo, hi) for lo, hi in blocks]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(lambda b: fn(*b), blocks))


def hybrid_sample_value(s: float, distances, dominant_count: int,
                        interferer_total: int, bs_density: float,
                        noise_power: float, pathloss_exponent: float,
                        quad_abs_tol: float = DEFAULT_ABS_TOL) -> float:
    """Conditional coverage of one geometry draw at s = T * r**eta.

    Multiplies the noise factor exp(-s*sigma^2), the exact fading average
    1/(1 + s*R_i**-eta) over interferers 2..K, and the far-field factor
    exp(-2*pi*lam * tail_integral(s, eta, R_K, R_N)).  With K == N the tail
    factor is exactly 1; with K == 1 the dominant product is empty.
    """
    if not s >= 0:
        raise ValueError(f"s must be >= 0, got {s}")
    d = np.asarray(distances, dtype=float)
    if not 1 <= dominant_count <= interferer_total:
        raise ValueError(
            f"need 1 <= dominant_count <= interferer_total, got "
            f"K={dominant_count}, N={interferer_total}"
        )
    if d.size < interferer_total:
        raise ValueError(
            f"need at least {interferer_total} distances, got {d.size}"
        )
    eta = pathloss_exponent
    dominant = 1.0
    for i in range(1, dominant_count):
        dominant /= 1.0 + s / _pow_eta(d[i], eta)
    tail = tail_integral(s, eta, d[dominant_count - 1],
                         d[interferer_total - 1], quad_abs_tol)
    return float(math.exp(-s * noise_power) * dominant
                 * math.exp(-2.0 * math.pi * bs_density * tail))


def _hybrid_trial_values(D: np.ndarray, t_linear: np.ndarray, K: int, N: int,
                         lam: float, sig2: float, eta: float,
                         quad_abs_tol: float) -> np.ndarray:
    """Vectorized hybrid values, one row per retained trial."""
    r = D[:, 0]
    s = t_linear[None, :] * _pow_eta(r, eta)[:, None]
    dominant = np.ones_like(s)
    for i in range(1, K):
        dominant /= 1.0 + s / _pow_eta(D[:, i], eta)[:, None]
    a = np.broadcast_to(D[:, K - 1][:, None], s.shape)
    b = np.broadcast_to(D[:, N - 1][:, None], s.shape)
    tails = tail_integral_batch(s, eta, a, b, quad_abs_tol)
    return np.exp(-s * sig2 - 2.0 * math.pi * lam * tails) * dominant


def _check_window_feasible(cfg: NetworkConfig, n_needed: int) -> None:
    if cfg.expected_window_count < n_needed:
        raise ValueError(
            f"expected window point count {cfg.expected_window_count:.2f} is "
            f"below interferer_total {n_needed}; increase half_width or "
            f"bs_density"
        )


def hybrid_coverage(cfg: NetworkConfig, settings: EstimatorSettings,
                    grid: ThresholdGrid, sampler: str = SAMPLER_WINDOW,
                    threads: int = 1) -> CoverageCurve:
    """Monte Carlo coverage curve of the dominant-plus-tail estimator.

    Each trial draws one geometry (window or direct sampler), shares it
    across every threshold, and accumulates the conditional coverage values.
    Window trials with fewer than ``interferer_total`` points are skipped and
    reported via ``trials_used``.
    """
    if sampler not in (SAMPLER_WINDOW, SAMPLER_DIRECT):
        raise ValueError(f"unknown sampler {sampler!r}")
    K, N = settings.dominant_count, settings.interferer_total
    if sampler == SAMPLER_WINDOW:
        _check_window_feasible(cfg, N)
    t_linear = grid.thresholds_linear
    lam, sig2, eta = cfg.bs_density, cfg.noise_power, cfg.pathloss_exponent

    def block(lo: int, hi: int):
        rows = []
        for m in range(lo, hi):
            if sampler == SAMPLER_WINDOW:
                rng = streams.trial_stream(settings.seed,
                                           streams.GEOMETRY_WINDOW, m)
                total, d = nearest_window_distances(cfg, N, rng)
                if total < N:
                    continue
            else:
                rng = streams.trial_stream(settings.seed,
                                           streams.GEOMETRY_DIRECT, m)
                d = sample_ordered_distances_direct(lam, N, rng).distances
            rows.append(d)
        if not rows:
            return np.zeros(len(grid)), np.zeros(len(grid)), 0
        vals = _hybrid_trial_values(np.vstack(rows), t_linear, K, N, lam,
                                    sig2, eta, settings.quad_abs_tol)
        return vals.sum(axis=0), (vals * vals).sum(axis=0), len(rows)

    sums = np.zeros(len(grid))
    sumsq = np.zeros(len(grid))
    used = 0
    for part_sum, part_sq, part_n in _map_blocks(block, settings.trials,
                                                 threads):
        sums += part_sum
        sumsq += part_sq
        used += part_n
    if used == 0:
        raise EstimatorError(
            "no trial produced enough points for the hybrid estimator"
        )
    mean = sums / used
    if used > 1:
        var = np.maximum(0.0, (sumsq - used * mean * mean) / (used - 1))
        stderr = np.sqrt(var / used)
    else:
        stderr = np.zeros(len(grid))
    return CoverageCurve(
        method=METHOD_HYBRID, eta=eta, interferer_total=N, dominant_count=K,
        thresholds_db=grid.thresholds_db, thresholds_linear=t_linear,
        estimates=mean, stderrs=stderr,
        trials_used=np.full(len(grid), used, dtype=int),
    )


def empirical_coverage(cfg: NetworkConfig, settings: EstimatorSettings,
                       grid: ThresholdGrid,
                       include_all_window_points: bool = False,
                       threads: int = 1) -> CoverageCurve:
    """Empirical fraction of trials whose SINR exceeds each threshold.

    Geometry comes from the same window substreams as the hybrid estimator;
    fading gains are unit-mean exponentials from an independent substream.
    By default exactly the ``interferer_total - 1`` nearest interferers
    contribute; ``include_all_window_points`` widens the sum to every window
    point to approximate the infinite-network target instead.
    """
    N = settings.interferer_total
    _check_window_feasible(cfg, N)
    t_linear = grid.thresholds_linear
    eta, sig2 = cfg.pathloss_exponent, cfg.noise_power

    def block(lo: int, hi: int):
        successes = np.zeros(len(grid), dtype=np.int64)
        used = 0
        for m in range(lo, hi):
            grng = streams.trial_stream(settings.seed,
                                        streams.GEOMETRY_WINDOW, m)
            if include_all_window_points:
                real = sample_window_realization(cfg, grng)
                if real.point_count < N:
                    continue
                d = real.distances
            else:
                total, d = nearest_window_distances(cfg, N, grng)
                if total < N:
                    continue
            gains = streams.trial_stream(settings.seed, streams.FADING,
                                         m).standard_exponential(d.size)
            signal = gains[0] / _pow_eta(d[0], eta)
            interference = float((gains[1:] / _pow_eta(d[1:], eta)).sum())
            denom = interference + sig2
            sinr = signal / denom if denom > 0.0 else math.inf
            successes += sinr > t_linear
            used += 1
        return successes, used

    successes = np.zeros(len(grid), dtype=np.int64)
    used = 0
    for part_succ, part_n in _map_blocks(block, settings.trials, threads):
        successes += part_succ
        used += part_n
    if used == 0:
        raise EstimatorError(
            "no trial produced enough points for the empirical estimator"
        )
    p = successes / used
    stderr = np.sqrt(p * (1.0 - p) / used)
    return CoverageCurve(
        method=METHOD_SIMULATION, eta=eta, interferer_total=N,
        dominant_count=settings.dominant_count,
        thresholds_db=grid.thresholds_db, thresholds_linear=t_linear,
        estimates=p, stderrs=stderr,
        trials_used=np.full(len(grid), used, dtype=int),
    )


def sg_coverage(cfg: NetworkConfig, grid: ThresholdGrid,
                quad_abs_tol: float = DEFAULT_ABS_TOL) -> CoverageCurve:
    """Infinite-network coverage via nested adaptive quadrature.

    Averages exp(-s*sigma^2) * exp(-2*pi*lam * tail(s, r, inf)) over the
    serving-distance density with s = T * r**eta.  Deterministic; the inner
    tail tolerance is budgeted so the combined error stays below
    ``quad_abs_tol``.  Only defined for pathloss exponents above 2.
    """
    eta = cfg.pathloss_exponent
    if eta <= 2.0:
        raise ValueError(
            f"the infinite-network benchmark requires pathloss_exponent > 2, "
            f"got {eta}"
        )
    if not quad_abs_tol > 0:
        raise ValueError(f"quad_abs_tol must be > 0, got {quad_abs_tol}")
    lam, sig2 = cfg.bs_density, cfg.noise_power
    inner_tol = quad_abs_tol / (8.0 * math.pi * lam)
    outer_tol = 0.5 * quad_abs_tol
    estimates = np.empty(len(grid))
    for j, t_lin in enumerate(grid.thresholds_linear):

        def outer(r):
            rr = np.asarray(r, dtype=float)
            flat = rr.ravel()
            s = t_lin * _pow_eta(flat, eta)
            tails = tail_integral_batch(s, eta, flat,
                                        np.full(flat.size, np.inf), inner_tol)
            out = (np.exp(-s * sig2 - 2.0 * math.pi * lam * tails)
                   * 2.0 * math.pi * lam * flat
                   * np.exp(-math.pi * lam * flat * flat))
            return out.reshape(rr.shape)

        value = integrate_adaptive(outer, 0.0, math.inf, outer_tol).value
        estimates[j] = min(1.0, max(0.0, value))
    zeros = np.zeros(len(grid))
    return CoverageCurve(
        method=METHOD_SG, eta=eta, interferer_total=0, dominant_count=0,
        thresholds_db=grid.thresholds_db,
        thresholds_linear=grid.thresholds_linear,
        estimates=estimates, stderrs=zeros,
        trials_used=np.zeros(len(grid), dtype=int),
    )


def interference_moment_coefficient(i: int, bs_density: float) -> float:
    """Second-moment coefficient of the i-th nearest interferer (i >= 2).

    The i = 2 value is (67 - 96*ln 2)/(pi*lam)**2; for i >= 3 the
    Gamma-ratio series is evaluated in log space with the inner sum
    accumulated in ascending k under compensated summation.
    """
    if i < 2:
        raise ValueError(f"coefficient defined for i >= 2, got {i}")
    if not bs_density > 0:
        raise ValueError(f"bs_density must be > 0, got {bs_density}")
    return _moment_coefficient_unit(i) / (bs_density * bs_density)


_LN2 = math.log(2.0)


def _moment_coefficient_unit(i: int) -> float:
    """Coefficient at unit density (the 1/lam**2 scaling is exact)."""
    pi_sq = math.pi * math.pi
    if i == 2:
        return (67.0 - 96.0 * _LN2) / pi_sq
    lg_i = math.lgamma(i)
    first = math.exp(math.log(24.0) + math.lgamma(i - 2) - lg_i)
    for k in range(5):
        first -= math.exp(math.log(24.0) + math.lgamma(i + k - 2)
                          - math.lgamma(k + 1) - (i + k - 2) * _LN2 - lg_i)
    # inner sum of k!/((k+2)! 2^(k+1)) = 1/((k+1)(k+2)2^(k+1)), ascending k
    # with Kahan compensation; it approaches 1 - ln 2 from below, so the
    # bracket is a small difference of O(1) quantities.
    acc = 0.0
    comp = 0.0
    for k in range(i + 2):
        term = 1.0 / ((k + 1.0) * (k + 2.0) * 2.0 ** (k + 1))
        y = term - comp
        t = acc + y
        comp = (t - acc) - y
        acc = t
    second = math.exp(math.lgamma(i + 4) - lg_i) * (1.0 - _LN2 - acc)
    return (first + second) / pi_sq


def prob_model_coverage(params: ProbModelParams, cfg: NetworkConfig,
                        grid: ThresholdGrid) -> CoverageCurve:
    """Closed-form Gaussian-moment coverage baseline (pathloss exponent 4).

    Augments the supplied moments with the noise corrections, checks the
    validity condition mu >= sigma/sqrt(2) of the underlying Gaussian
    approximation, and evaluates the closed form per threshold.
    """
    if cfg.pathloss_exponent != 4.0:
        raise ValueError(
            f"the moment-based baseline is defined for pathloss_exponent 4, "
            f"got {cfg.pathloss_exponent}"
        )
    lam, sig2 = cfg.bs_density, cfg.noise_power
    pl2 = (math.pi * lam) ** 2
    beta = math.fsum(
        interference_moment_coefficient(i, lam)
        for i in range(2, params.interferer_total + 1)
    )
    mu_t = params.mu_s + 2.0 * sig2 / pl2
    sigma_t_sq = (params.sigma_s_sq + 20.0 * sig2 * sig2 / (pl2 * pl2)
                  + 2.0 * sig2 * beta - 4.0 * sig2 * params.mu_s / pl2)
    if sigma_t_sq < 0.0:
        raise ModelValidityError(
            f"augmented variance is negative ({sigma_t_sq:.6g}); the moment "
            f"inputs are inconsistent"
        )
    if mu_t < math.sqrt(sigma_t_sq / 2.0):
        raise ModelValidityError(
            f"validity condition violated: mu_tilde={mu_t:.6g} < "
            f"sigma_tilde/sqrt(2)={math.sqrt(sigma_t_sq / 2.0):.6g}"
        )
    disc = mu_t * mu_t - sigma_t_sq / 2.0
    mu_u_sq = math.sqrt(disc)
    sigma_u_sq = mu_t - mu_u_sq
    t_lin = grid.thresholds_linear
    sigma0 = params.sigma0_sq
    estimates = (np.exp(-t_lin * mu_u_sq / (sigma0 + 2.0 * t_lin * sigma_u_sq))
                 / np.sqrt(1.0 + 2.0 * t_lin * sigma_u_sq / sigma0))
    return CoverageCurve(
        method=METHOD_PROBABILISTIC, eta=cfg.pathloss_exponent,
        interferer_total=params.interferer_total, dominant_count=0,
        thresholds_db=grid.thresholds_db, thresholds_linear=t_lin,
        estimates=estimates, stderrs=np.zeros(len(grid)),
        trials_used=np.zeros(len(grid), dtype=int),
    )


def with_combo(curve: CoverageCurve, interferer_total: int,
               dominant_count: int) -> CoverageCurve:
    """Stamp a curve with the (N, K) combination it is reported under."""
    return replace(curve, interferer_total=interferer_total,
                   dominant_count=dominant_count)
