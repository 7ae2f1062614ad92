"""Command-line driver: simulate series, build confidence regions, analyze
empirical CSV series, and run the coverage / implied-prior studies.

Exit codes: 0 success, 1 numerical failure, 2 usage error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import warnings
from pathlib import Path

import numpy as np

from arcd import io as arcd_io
from arcd.ar import (
    ARParams,
    DegenerateDesignError,
    InvalidParameterError,
    SeriesSample,
    SingularMatrixError,
    fit,
    is_causal,
    omega_p2,
    simulate,
)
from arcd.bayes import DegenerateSpikeError, boundary_band_mask, corrected_region, flat_prior_posterior, spike_correction
from arcd.cd import (
    UnderIdentifiedError,
    cd_asymptotic_surface,
    cd_bootstrap_surface,
    estimate_cdf_grid,
    fit_probit_quadratic,
)
from arcd.experiments import (
    STUDY_METHODS,
    ExperimentConfig,
    run_coverage_study,
    run_implied_prior_study,
)
from arcd.grids import ParamGrid2D, region_from_density
from arcd.rng import derive_rng, fresh_seed
from arcd.wald import bootstrap_wald_distribution, confidence_curve, region_from_curve

NUMERICAL_ERRORS = (
    DegenerateDesignError,
    SingularMatrixError,
    UnderIdentifiedError,
    DegenerateSpikeError,
    InvalidParameterError,
    np.linalg.LinAlgError,
)


def _fmt(x: float) -> str:
    return f"{x:.6g}"


def _parse_floats(text: str, expect: int | None = None, name: str = "value"):
    try:
        vals = [float(v) for v in text.split(",") if v.strip() != ""]
    except ValueError:
        raise argparse.ArgumentTypeError(f"cannot parse {name} list {text!r}")
    if expect is not None and len(vals) != expect:
        raise argparse.ArgumentTypeError(f"expected {expect} comma-separated {name}s, got {len(vals)}")
    return vals


def _resolve_seed(args) -> int:
    if args.seed is None:
        seed = fresh_seed()
        print(f"seed: {seed}")
        return seed
    return args.seed


def _resolve_level(level: float, parser: argparse.ArgumentParser) -> float:
    if not (0.0 < level < 1.0):
        parser.error(f"--level must lie in (0, 1), got {level}")
    return level


def _load_series(args, parser) -> SeriesSample:
    if args.input is None:
        parser.error("--input is required")
    return arcd_io.read_series_csv(args.input, header=args.header)


def _build_region(series, method, level, grid, n, fr, omega, n_bootstrap, n_mc, rng_root):
    """Surface and region for one method on a prepared grid."""
    if method in ("wald_asymptotic", "wald_bootstrap"):
        boot_q = None
        if method == "wald_bootstrap":
            boot_q = bootstrap_wald_distribution(
                series, 2, n_bootstrap, derive_rng(rng_root, 1), fit_result=fr
            )
        surface = confidence_curve(series, 2, grid, method, fit_result=fr, bootstrap_q=boot_q)
        return surface, region_from_curve(surface, level), None
    if method == "cd_asymptotic":
        surface = cd_asymptotic_surface(grid, fr.phi_hat, omega, n)
        return surface, region_from_density(surface, level), None
    estimate = estimate_cdf_grid(
        grid, fr.phi_hat, n, sigma2=1.0, N_mc=n_mc, seed=derive_rng(rng_root, 2)
    )
    pq = fit_probit_quadratic(estimate, n)
    surface = cd_bootstrap_surface(grid, pq)
    return surface, region_from_density(surface, level), pq


def cmd_simulate(args, parser) -> int:
    phi = np.array(_parse_floats(args.phi, name="phi"))
    if args.sigma2 <= 0:
        parser.error(f"--sigma2 must be positive, got {args.sigma2}")
    if args.n < 1:
        parser.error(f"--n must be >= 1, got {args.n}")
    seed = _resolve_seed(args)
    if not is_causal(phi):
        print("warning: non-causal parameters", file=sys.stderr)
    series = simulate(ARParams(phi=phi, sigma2=args.sigma2), args.n, seed)
    out = Path(args.out)
    arcd_io.write_series_csv(out, series)
    arcd_io.write_json(
        out.with_suffix(out.suffix + ".json"),
        {"phi": phi.tolist(), "sigma2": args.sigma2, "n": args.n, "seed": seed},
    )
    print(f"wrote {out} ({args.n} rows)")
    return 0


def cmd_region(args, parser) -> int:
    level = _resolve_level(args.level, parser)
    seed = _resolve_seed(args)
    if args.simulate:
        if args.phi is None:
            parser.error("--simulate requires --phi")
        phi = np.array(_parse_floats(args.phi, name="phi"))
        series = simulate(ARParams(phi=phi, sigma2=args.sigma2), args.n, seed)
    else:
        series = _load_series(args, parser)
    fr = fit(series, 2)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        omega = omega_p2(fr.phi_hat)
    grid = ParamGrid2D.around_estimate(
        fr.phi_hat, omega.omega, series.n, half_widths_se=args.half_width_se, m=args.grid_m
    )
    surface, region, pq = _build_region(
        series, args.method, level, grid, series.n, fr, omega, args.n_bootstrap, args.n_mc, seed
    )
    prefix = args.out_prefix
    arcd_io.surface_to_csv(f"{prefix}_surface.csv", surface)
    arcd_io.region_to_json(f"{prefix}_region.json", region)
    if pq is not None:
        arcd_io.write_json(f"{prefix}_probit_fit.json", pq.to_dict())
    print(f"phi_hat: ({_fmt(fr.phi_hat[0])}, {_fmt(fr.phi_hat[1])})")
    print(f"area: {_fmt(region.area)}")
    if args.truth is not None:
        truth = _parse_floats(args.truth, expect=2, name="truth")
        print(f"covers truth: {region.contains(truth)}")
    return 0


def cmd_analyze(args, parser) -> int:
    level = _resolve_level(args.level, parser)
    seed = _resolve_seed(args)
    series = _load_series(args, parser)
    values = series.values
    if args.transform == "logshift":
        values = np.log(values - values.min() + args.shift)
    if args.demean:
        values = values - values.mean()
        if np.allclose(values, 0.0):
            raise DegenerateDesignError("series is constant after demeaning")
    series = SeriesSample(values)
    order = args.order
    fr = fit(series, order)
    if order == 2:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            omega = omega_p2(fr.phi_hat)
        ses = np.sqrt(np.abs(np.diag(omega.omega)) / series.n)
    else:
        from arcd.ar import omega_general

        omega = omega_general(fr.phi_hat)
        ses = np.sqrt(np.abs(np.diag(omega.omega)) / series.n)
    for j, (est, se) in enumerate(zip(fr.phi_hat, ses), start=1):
        print(f"phi_{j}: {_fmt(est)} (se {_fmt(se)})")
    print(f"sigma2_hat: {_fmt(fr.sigma2_hat)}")
    if order != 2:
        print("regions are 2-D only; skipping region construction")
        return 0

    grid = ParamGrid2D.around_estimate(
        fr.phi_hat, omega.omega, series.n, half_widths_se=args.half_width_se, m=args.grid_m
    )
    prefix = args.out_prefix
    methods = args.methods.split(",") if args.methods != "all" else list(STUDY_METHODS)
    reference_cd = None
    for method in methods:
        if method not in STUDY_METHODS:
            parser.error(f"unknown method {method!r}")
        surface, region, pq = _build_region(
            series, method, level, grid, series.n, fr, omega, args.n_bootstrap, args.n_mc, seed
        )
        if method == "cd_asymptotic":
            reference_cd = surface
        arcd_io.surface_to_csv(f"{prefix}_{method}_surface.csv", surface)
        arcd_io.region_to_json(f"{prefix}_{method}_region.json", region)
        if pq is not None:
            arcd_io.write_json(f"{prefix}_{method}_probit_fit.json", pq.to_dict())
        print(f"{method}: area {_fmt(region.area)}")

    posterior = flat_prior_posterior(series, grid, fit_result=fr)
    bayes_region = region_from_density(posterior, level)
    arcd_io.surface_to_csv(f"{prefix}_bayes_flat_surface.csv", posterior)
    arcd_io.region_to_json(f"{prefix}_bayes_flat_region.json", bayes_region)
    print(f"bayes_flat: area {_fmt(bayes_region.area)}")

    if reference_cd is None:
        reference_cd = cd_asymptotic_surface(grid, fr.phi_hat, omega, series.n)
    correction = spike_correction(posterior, reference_cd)
    band_mask = boundary_band_mask(grid, correction.band)
    touches = bool((bayes_region.member & band_mask).any())
    arcd_io.write_json(f"{prefix}_spike.json", correction.to_dict())
    if touches:
        corrected = corrected_region(posterior, correction, level)
        arcd_io.region_to_json(f"{prefix}_bayes_corrected_region.json", corrected)
        print(
            f"bayes_corrected: a {_fmt(correction.a)} area {_fmt(corrected.area)}"
        )
    else:
        print("bayes region does not touch the boundary band; no correction worked out")
    return 0


def cmd_coverage(args, parser) -> int:
    seed = _resolve_seed(args)
    cfg_data = {}
    if args.config:
        with open(args.config) as fh:
            cfg_data = json.load(fh)
    flags = {
        "phi0": tuple(_parse_floats(args.phi0, expect=2, name="phi0")) if args.phi0 else None,
        "n_values": tuple(int(v) for v in _parse_floats(args.n, name="n")) if args.n else None,
        "levels": tuple(_parse_floats(args.levels, name="level")) if args.levels else None,
        "methods": tuple(args.methods.split(",")) if args.methods else None,
        "replicates": args.replicates,
        "N_bootstrap": args.n_bootstrap,
        "N_mc": args.n_mc,
        "grid_m": args.grid_m,
        "root_seed": seed,
    }
    for key, value in flags.items():
        if value is not None:
            cfg_data[key] = value
    if "phi0" not in cfg_data:
        parser.error("--phi0 (or a config file providing it) is required")
    config = ExperimentConfig.from_dict(cfg_data)
    rows = run_coverage_study(config, n_jobs=args.threads)
    arcd_io.coverage_rows_to_csv(args.out, rows)
    for row in rows:
        print(
            f"n={row.n} {row.method} {_fmt(row.level)}: "
            f"coverage {_fmt(row.coverage)} (se {_fmt(row.mc_se)}), mean area {_fmt(row.mean_area)}"
        )
    print(f"wrote {args.out}")
    return 0


def cmd_implied_prior(args, parser) -> int:
    seed = _resolve_seed(args)
    phi0 = _parse_floats(args.phi0, expect=2, name="phi0")
    window = _parse_floats(args.window, expect=4, name="window bound")
    grid = ParamGrid2D(window[0], window[1], window[2], window[3], args.grid_m)
    surface = run_implied_prior_study(
        phi0, args.n, args.reps, grid, seed=seed, sigma2=args.sigma2, n_jobs=args.threads
    )
    prefix = args.out_prefix
    arcd_io.surface_to_csv(f"{prefix}_surface.csv", surface)
    levels = _parse_floats(args.contour_levels, name="contour level")
    arcd_io.contours_to_json(f"{prefix}_contours.json", surface, levels)
    finite = surface.values[np.isfinite(surface.values)]
    print(f"mean residual surface: min {_fmt(finite.min())} max {_fmt(finite.max())}")
    print(f"wrote {prefix}_surface.csv and {prefix}_contours.json")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="arcd",
        description="Confidence distributions and regions for zero-mean AR(p) processes",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    default_threads = os.cpu_count() or 1

    p = sub.add_parser("simulate", help="simulate an AR(p) series to CSV")
    p.add_argument("--phi", required=True, help="comma-separated coefficients")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--sigma2", type=float, default=1.0)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out", default="series.csv")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("region", help="confidence surface and region for one method")
    p.add_argument("--input", default=None, help="series CSV")
    p.add_argument("--header", action="store_true", help="input CSV has a header row")
    p.add_argument("--simulate", action="store_true", help="simulate the input series inline")
    p.add_argument("--phi", default=None, help="truth for --simulate")
    p.add_argument("--n", type=int, default=100)
    p.add_argument("--sigma2", type=float, default=1.0)
    p.add_argument("--method", required=True, choices=STUDY_METHODS)
    p.add_argument("--level", type=float, default=0.95)
    p.add_argument("--grid-m", type=int, default=100)
    p.add_argument("--half-width-se", type=float, default=5.0)
    p.add_argument("--n-bootstrap", type=int, default=1000)
    p.add_argument("--n-mc", type=int, default=1000)
    p.add_argument("--truth", default=None, help="point to test for coverage, e.g. 0.4,0.2")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out-prefix", default="region")
    p.set_defaults(func=cmd_region)

    p = sub.add_parser("analyze", help="empirical pipeline: transform, fit, all regions")
    p.add_argument("--input", required=True)
    p.add_argument("--header", action="store_true")
    p.add_argument("--transform", choices=["none", "logshift"], default="none")
    p.add_argument("--shift", type=float, default=0.1)
    p.add_argument("--demean", action="store_true")
    p.add_argument("--order", type=int, default=2)
    p.add_argument("--level", type=float, default=0.95)
    p.add_argument("--methods", default="all")
    p.add_argument("--grid-m", type=int, default=100)
    p.add_argument("--half-width-se", type=float, default=5.0)
    p.add_argument("--n-bootstrap", type=int, default=1000)
    p.add_argument("--n-mc", type=int, default=1000)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out-prefix", default="analyze")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("coverage", help="coverage/mean-area study")
    p.add_argument("--config", default=None, help="JSON config file (flags win)")
    p.add_argument("--phi0", default=None)
    p.add_argument("--n", default=None, help="comma-separated sample sizes")
    p.add_argument("--levels", default=None)
    p.add_argument("--methods", default=None)
    p.add_argument("--replicates", type=int, default=None)
    p.add_argument("--n-bootstrap", type=int, default=None)
    p.add_argument("--n-mc", type=int, default=None)
    p.add_argument("--grid-m", type=int, default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--threads", type=int, default=default_threads)
    p.add_argument("--out", default="coverage.csv")
    p.set_defaults(func=cmd_coverage)

    p = sub.add_parser("implied-prior", help="mean implied-prior residual surface")
    p.add_argument("--phi0", required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--reps", type=int, required=True)
    p.add_argument("--window", default="-0.5,0.5,-0.5,0.5", help="phi1_min,phi1_max,phi2_min,phi2_max")
    p.add_argument("--grid-m", type=int, default=100)
    p.add_argument("--sigma2", type=float, default=1.0)
    p.add_argument("--contour-levels", default="-0.02,-0.01,-0.005,0.005,0.01,0.02")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--threads", type=int, default=default_threads)
    p.add_argument("--out-prefix", default="implied_prior")
    p.set_defaults(func=cmd_implied_prior)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 2
    try:
        return args.func(args, parser)
    except SystemExit as exc:  # parser.error inside a command
        return exc.code if isinstance(exc.code, int) else 2
    except NUMERICAL_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
