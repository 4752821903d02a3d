"""Batch sweep front-end: parse flags, run method sweeps, emit CSV.

The CSV schema is fixed: header ``method,eta,N,K,T_db,coverage,stderr,
trials_used``, one row per grid point, rows ordered by (method, N, K, T_db),
floats printed with 9 significant digits.  Progress goes to stderr so piped
CSV stays clean.  Exit codes: 0 success, 2 usage error, 3 numerical failure.
"""
from __future__ import annotations

import argparse
import sys
import time
from dataclasses import dataclass

from .estimators import (
    METHOD_HYBRID,
    METHOD_PROBABILISTIC,
    METHOD_SG,
    METHOD_SIMULATION,
    SAMPLER_DIRECT,
    SAMPLER_WINDOW,
    CoverageCurve,
    EstimatorSettings,
    ProbModelParams,
    ThresholdGrid,
    empirical_coverage,
    hybrid_coverage,
    prob_model_coverage,
    sg_coverage,
    with_combo,
)
from .geometry import NetworkConfig

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_NUMERICAL = 3

_ALL_METHODS = (METHOD_HYBRID, METHOD_SIMULATION, METHOD_SG,
                METHOD_PROBABILISTIC)

CSV_HEADER = "method,eta,N,K,T_db,coverage,stderr,trials_used"


@dataclass(frozen=True)
class SweepSpec:
    """Fully validated description of one sweep run."""

    network: NetworkConfig
    grid: ThresholdGrid
    methods: tuple
    n_list: tuple
    k_list: tuple
    trials: int
    quad_abs_tol: float
    seed: int
    sampler: str
    threads: int
    output_path: str
    mu_s: float | None = None
    sigma_s_sq: float | None = None
    sigma0_sq: float | None = None


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="sinrcov",
        description="Sweep downlink SINR coverage probability estimators "
                    "over a threshold grid and write the curves as CSV.",
    )
    p.add_argument("--lambda", dest="bs_density", type=float, default=1.0,
                   help="BS density in BS/km^2 (default 1)")
    p.add_argument("--eta", type=float, default=4.0,
                   help="path-loss exponent (default 4)")
    p.add_argument("--noise", type=float, default=0.1,
                   help="noise power sigma^2 in linear units (default 0.1)")
    p.add_argument("--K", type=int, nargs="+", default=[4],
                   help="dominant interferer count(s) (default 4)")
    p.add_argument("--N", type=int, nargs="+", default=[10],
                   help="total interferer count(s) (default 10)")
    p.add_argument("--trials", type=int, default=50_000,
                   help="Monte Carlo trials per curve (default 50000)")
    p.add_argument("--half-width", type=float, default=40.0,
                   help="simulation window half-width L in km (default 40)")
    p.add_argument("--tmin-db", type=float, default=-20.0,
                   help="lowest SINR threshold in dB (default -20)")
    p.add_argument("--tmax-db", type=float, default=20.0,
                   help="highest SINR threshold in dB (default 20)")
    p.add_argument("--tstep-db", type=float, default=2.0,
                   help="threshold step in dB (default 2)")
    p.add_argument("--methods", type=str, default="hybrid,simulation",
                   help="comma-separated subset of hybrid,simulation,sg,"
                        "probabilistic (default hybrid,simulation)")
    p.add_argument("--quad-tol", type=float, default=1e-6,
                   help="absolute quadrature tolerance (default 1e-6)")
    p.add_argument("--seed", type=int, default=0,
                   help="64-bit root seed (default 0)")
    p.add_argument("--threads", type=int, default=1,
                   help="worker threads; output is identical for any count")
    p.add_argument("--out", type=str, default="-",
                   help="output CSV path, '-' for stdout (default '-')")
    p.add_argument("--sampler", choices=[SAMPLER_WINDOW, SAMPLER_DIRECT],
                   default=SAMPLER_WINDOW,
                   help="geometry sampler for the hybrid method "
                        "(default window)")
    p.add_argument("--mu-S", dest="mu_s", type=float, default=None,
                   help="moment-model mean input (probabilistic method)")
    p.add_argument("--sigma-S-sq", dest="sigma_s_sq", type=float,
                   default=None,
                   help="moment-model variance input (probabilistic method)")
    p.add_argument("--sigma0-sq", dest="sigma0_sq", type=float, default=None,
                   help="moment-model reference power (probabilistic method)")
    return p


def parse_args(argv=None) -> SweepSpec:
    """Parse and validate CLI flags into a SweepSpec; exits 2 on violation."""
    parser = build_parser()
    args = parser.parse_args(argv)

    methods = tuple(m.strip() for m in args.methods.split(",") if m.strip())
    if not methods:
        parser.error("--methods must name at least one method")
    for m in methods:
        if m not in _ALL_METHODS:
            parser.error(f"unknown method {m!r}; choose from "
                         f"{', '.join(_ALL_METHODS)}")
    methods = tuple(sorted(set(methods)))

    try:
        network = NetworkConfig(
            bs_density=args.bs_density,
            pathloss_exponent=args.eta,
            noise_power=args.noise,
            half_width=args.half_width,
        )
        grid = ThresholdGrid.from_db_range(args.tmin_db, args.tmax_db,
                                           args.tstep_db)
    except ValueError as exc:
        parser.error(str(exc))

    if args.trials < 1:
        parser.error(f"--trials must be >= 1, got {args.trials}")
    if not args.quad_tol > 0:
        parser.error(f"--quad-tol must be > 0, got {args.quad_tol}")
    if not 0 <= args.seed < 2**64:
        parser.error("--seed must be a 64-bit unsigned integer")
    if args.threads < 1:
        parser.error(f"--threads must be >= 1, got {args.threads}")

    n_list = tuple(sorted(set(args.N)))
    k_list = tuple(sorted(set(args.K)))
    if min(n_list) < 1 or min(k_list) < 1:
        parser.error("--N and --K values must be >= 1")
    bad = [(n, k) for n in n_list for k in k_list if k > n]
    if bad:
        parser.error(
            f"every K must be <= every swept N; violated by (N, K) pairs "
            f"{bad}"
        )

    if METHOD_SG in methods and args.eta <= 2.0:
        parser.error(
            f"method 'sg' requires --eta > 2 (infinite-network integral "
            f"diverges otherwise); got eta={args.eta}"
        )
    if METHOD_PROBABILISTIC in methods:
        missing = [flag for flag, val in (("--mu-S", args.mu_s),
                                          ("--sigma-S-sq", args.sigma_s_sq),
                                          ("--sigma0-sq", args.sigma0_sq))
                   if val is None]
        if missing:
            parser.error(
                f"method 'probabilistic' requires {', '.join(missing)}"
            )
        if args.eta != 4.0:
            parser.error(
                f"method 'probabilistic' is defined only for --eta 4; got "
                f"eta={args.eta}"
            )
        if min(n_list) < 2:
            parser.error("method 'probabilistic' requires --N >= 2")

    needs_window = METHOD_SIMULATION in methods or (
        METHOD_HYBRID in methods and args.sampler == SAMPLER_WINDOW)
    if needs_window and network.expected_window_count < max(n_list):
        parser.error(
            f"expected window point count "
            f"{network.expected_window_count:.2f} is below the largest "
            f"requested N={max(n_list)}; increase --half-width or --lambda"
        )

    return SweepSpec(
        network=network, grid=grid, methods=methods, n_list=n_list,
        k_list=k_list, trials=args.trials, quad_abs_tol=args.quad_tol,
        seed=args.seed, sampler=args.sampler, threads=args.threads,
        output_path=args.out, mu_s=args.mu_s, sigma_s_sq=args.sigma_s_sq,
        sigma0_sq=args.sigma0_sq,
    )


def _compute(method: str, spec: SweepSpec, n: int, k: int) -> CoverageCurve:
    settings = EstimatorSettings(
        dominant_count=k, interferer_total=n, trials=spec.trials,
        quad_abs_tol=spec.quad_abs_tol, seed=spec.seed,
    )
    if method == METHOD_HYBRID:
        return hybrid_coverage(spec.network, settings, spec.grid,
                               sampler=spec.sampler, threads=spec.threads)
    if method == METHOD_SIMULATION:
        return empirical_coverage(spec.network, settings, spec.grid,
                                  threads=spec.threads)
    if method == METHOD_SG:
        return sg_coverage(spec.network, spec.grid, spec.quad_abs_tol)
    params = ProbModelParams(mu_s=spec.mu_s, sigma_s_sq=spec.sigma_s_sq,
                             sigma0_sq=spec.sigma0_sq, interferer_total=n)
    return prob_model_coverage(params, spec.network, spec.grid)


def _cache_key(method: str, n: int, k: int):
    # sg ignores (N, K); simulation and probabilistic ignore K.
    if method == METHOD_SG:
        return (method,)
    if method in (METHOD_SIMULATION, METHOD_PROBABILISTIC):
        return (method, n)
    return (method, n, k)


def run_sweep(spec: SweepSpec) -> list[CoverageCurve]:
    """One CoverageCurve per (method, N, K) combination, deterministically.

    Estimator failures are re-raised annotated with the failing combination.
    """
    curves: list[CoverageCurve] = []
    cache: dict = {}
    for method in spec.methods:
        for n in spec.n_list:
            for k in spec.k_list:
                key = _cache_key(method, n, k)
                if key not in cache:
                    start = time.perf_counter()
                    try:
                        cache[key] = _compute(method, spec, n, k)
                    except Exception as exc:
                        note = f"{exc} [method={method}, N={n}, K={k}]"
                        try:
                            annotated = type(exc)(note)
                        except TypeError:
                            annotated = RuntimeError(note)
                        raise annotated from exc
                    print(f"[sinrcov] {method} N={n} K={k}: done in "
                          f"{time.perf_counter() - start:.1f}s",
                          file=sys.stderr)
                curves.append(with_combo(cache[key], n, k))
    return curves


def _fmt(x: float) -> str:
    return format(float(x), ".9g")


def write_csv(curves, path: str) -> None:
    """Write curves at 9 significant digits, ordered by (method, N, K, T_db)."""
    rows = []
    for c in curves:
        for j in range(len(c.thresholds_db)):
            rows.append((c.method, c.interferer_total, c.dominant_count,
                         float(c.thresholds_db[j]), c.eta,
                         float(c.estimates[j]), float(c.stderrs[j]),
                         int(c.trials_used[j])))
    rows.sort(key=lambda r: (r[0], r[1], r[2], r[3]))
    lines = [CSV_HEADER + "\n"]
    for method, n, k, t_db, eta, est, se, used in rows:
        lines.append(f"{method},{_fmt(eta)},{n},{k},{_fmt(t_db)},"
                     f"{_fmt(est)},{_fmt(se)},{used}\n")
    text = "".join(lines)
    if path == "-":
        sys.stdout.write(text)
        return
    try:
        with open(path, "w", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise OSError(f"failed writing CSV to {path!r}: {exc}") from exc


def main(argv=None) -> int:
    try:
        spec = parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else EXIT_USAGE
    try:
        curves = run_sweep(spec)
        write_csv(curves, spec.output_path)
    except Exception as exc:  # numerical or I/O failure
        print(f"sinrcov: error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    return EXIT_OK


if __name__ == "__main__":
    raise SystemExit(main())
