"""Command-line front end: pricing tables, residual diagnostics, FD and
Monte Carlo benchmarks, and panel calibration, emitted as csv/tsv/pretty
tables. Named presets pin the standard benchmark parameter sets.

Exit codes: 0 success, 2 usage error, 3 numeric-domain error,
4 non-convergence.
"""

from __future__ import annotations

import argparse
import csv
import io
import math
import sys
from typing import Sequence

import numpy as np

from . import calibration as cal
from .core import DomainError, OptionQuery
from .expansion import SabrParams, price_d, price_sa2
from .fd import (
    FdConfig,
    FdInstabilityError,
    ResidualRegion,
    compare,
    cutoff_sensitivity,
    residual_norm,
    richardson_ratios,
    solve_sequence,
)
from .hagan import price_h
from .mc import McConfig, simulate_price
from .models import MODEL_NAMES, price_fn_for_model, vol_fn_for_model

__all__ = ["main"]

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_DOMAIN = 3
EXIT_NO_CONVERGENCE = 4

# benchmark parameter presets; *_rows entries are (T, nu)
RESIDUAL_PRESETS = {
    "table4": dict(
        nu=0.125, rho=-0.4, t_range=(0.1, 1.0), sigma_range=(0.1, 0.3),
        y_range=(-0.5, 0.5), scale=1e3,
    ),
    "table5-row1": dict(
        nu=0.1, rho=-0.4, t_range=(0.1, 30.0), sigma_range=(0.1, 0.3),
        y_range=(-0.3, 0.3), scale=1e2,
    ),
    "table5-row2": dict(
        nu=0.1, rho=-0.4, t_range=(0.1, 30.0), sigma_range=(0.1, 0.3),
        y_range=(-1.5, 1.5), scale=1e2,
    ),
    "table5-row3": dict(
        nu=0.25, rho=-0.4, t_range=(0.1, 0.2), sigma_range=(0.1, 0.3),
        y_range=(-1.5, 1.5), scale=1e2,
    ),
    "table5-row4": dict(
        nu=1.0, rho=-0.4, t_range=(0.1, 1.0), sigma_range=(0.1, 0.3),
        y_range=(-0.2, 0.2), scale=1e2,
    ),
    "table5-row5": dict(
        nu=1.0, rho=-0.4, t_range=(0.1, 1.0), sigma_range=(0.1, 0.3),
        y_range=(-1.0, 1.0), scale=1e2,
    ),
    "table5-row6": dict(
        nu=1.0, rho=-0.4, t_range=(0.1, 2.0), sigma_range=(0.1, 0.3),
        y_range=(-0.2, 0.2), scale=1e2,
    ),
}

FD_PRESETS = {
    "fd1-row1": dict(t=5.0, nu=1.0, rho=-0.2),
    "fd1-row2": dict(t=2.0, nu=1.5, rho=-0.2),
    "fd1-row3": dict(t=2.0, nu=1.0, rho=-0.2),
    "fd1-row4": dict(t=2.0, nu=0.5, rho=-0.2),
    "fd1-row5": dict(t=1.0, nu=1.5, rho=-0.2),
    "fd1-row6": dict(t=1.0, nu=1.0, rho=-0.2),
    "fd1-row7": dict(t=0.5, nu=1.0, rho=-0.2),
    "fd2-row1": dict(t=2.0, nu=1.0, rho=-0.5),
    "fd2-row2": dict(t=1.0, nu=1.0, rho=-0.5),
    "fd2-row3": dict(t=0.5, nu=1.0, rho=-0.5),
}

MC_PRESETS = {
    "mc-paper": dict(spot=10.0, sigma=0.2, nu=0.2, rho=-0.3, t=1.0),
}


class CliError(Exception):
    def __init__(self, message: str, code: int):
        super().__init__(message)
        self.code = code


def _parse_values(raw: str, name: str) -> list[float]:
    """Float list flag: '0.1', '0.1,0.2', or linspace 'a:b:n'."""
    raw = raw.strip()
    if ":" in raw:
        parts = raw.split(":")
        if len(parts) != 3:
            raise CliError(f"--{name}: range must be start:stop:count", EXIT_USAGE)
        try:
            a, b, n = float(parts[0]), float(parts[1]), int(parts[2])
        except ValueError as exc:
            raise CliError(f"--{name}: {exc}", EXIT_USAGE) from exc
        if n < 1:
            raise CliError(f"--{name}: count must be >= 1", EXIT_USAGE)
        return [float(v) for v in np.linspace(a, b, n)]
    try:
        return [float(v) for v in raw.split(",") if v.strip() != ""]
    except ValueError as exc:
        raise CliError(f"--{name}: {exc}", EXIT_USAGE) from exc


def _params_from_args(args) -> SabrParams:
    return SabrParams(
        sigma0=args.sigma,
        nu=args.nu,
        rho=args.rho,
        kappa0=args.kappa0,
        theta=args.theta,
    )


def _emit(rows: list[list], header: list[str], args) -> None:
    if args.format in ("csv", "tsv"):
        buf = io.StringIO()
        writer = csv.writer(buf, delimiter="," if args.format == "csv" else "\t")
        writer.writerow(header)
        writer.writerows(rows)
        text = buf.getvalue()
    else:
        cells = [header] + [[_fmt(v) for v in row] for row in rows]
        widths = [max(len(r[i]) for r in cells) for i in range(len(header))]
        lines = ["  ".join(c.rjust(w) for c, w in zip(r, widths)) for r in cells]
        text = "\n".join(lines) + "\n"
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _fmt(v) -> str:
    if isinstance(v, float):
        return f"{v:.6g}"
    return str(v)


def _model_list(raw: str) -> list[str]:
    models = [m.strip() for m in raw.split(",") if m.strip()]
    for m in models:
        if m not in MODEL_NAMES:
            raise CliError(
                f"--model: unknown model {m!r}; choose from {', '.join(MODEL_NAMES)}",
                EXIT_USAGE,
            )
    if not models:
        raise CliError("--model: at least one model required", EXIT_USAGE)
    return models


def cmd_price(args) -> int:
    models = _model_list(args.model)
    params = _params_from_args(args)
    ys = _parse_values(args.y, "y")
    ts = _parse_values(args.t, "t")
    header = ["y", "t"]
    for m in models:
        header += [f"price_{m}", f"vol_{m}"]
    rows = []
    for t in ts:
        for y in ys:
            row: list = [y, t]
            for m in models:
                try:
                    price = price_fn_for_model(m, params)(y, params.sigma0, t)
                except DomainError as exc:
                    raise CliError(str(exc), EXIT_DOMAIN) from exc
                try:
                    vol = vol_fn_for_model(m, params)(y, t)
                except DomainError:
                    vol = float("nan")
                row += [price, vol]
            rows.append(row)
    _emit(rows, header, args)
    return EXIT_OK


def cmd_residual(args) -> int:
    if args.preset:
        if args.preset not in RESIDUAL_PRESETS:
            raise CliError(
                f"--preset: unknown preset {args.preset!r}; choose from "
                f"{', '.join(sorted(RESIDUAL_PRESETS))}",
                EXIT_USAGE,
            )
        p = RESIDUAL_PRESETS[args.preset]
        nu, rho, scale = p["nu"], p["rho"], p["scale"]
        t_range, sigma_range, y_range = p["t_range"], p["sigma_range"], p["y_range"]
    else:
        nu, rho, scale = args.nu, args.rho, 1e3
        t_range = tuple(_parse_values(args.t, "t"))
        sigma_range = tuple(_parse_values(args.sigma_range, "sigma-range"))
        y_range = tuple(_parse_values(args.y, "y"))
        for name, rng in (("t", t_range), ("sigma-range", sigma_range), ("y", y_range)):
            if len(rng) != 2 or rng[0] >= rng[1]:
                raise CliError(f"--{name}: need a nonempty range lo,hi", EXIT_USAGE)
    region = ResidualRegion(t_range=t_range, sigma_range=sigma_range, y_range=y_range)
    params = SabrParams(sigma0=sigma_range[0], nu=nu, rho=rho)
    label = f"{scale:.0e}R"
    rows = []
    for model in ("h", "d", "sa2", "bs"):
        try:
            fn = price_fn_for_model(model, params)
            r = residual_norm(fn, params, region)
        except DomainError as exc:
            raise CliError(str(exc), EXIT_DOMAIN) from exc
        rows.append([model, scale * r])
    _emit(rows, ["model", label], args)
    return EXIT_OK


def cmd_fd(args) -> int:
    if args.preset:
        if args.preset not in FD_PRESETS:
            raise CliError(
                f"--preset: unknown preset {args.preset!r}; choose from "
                f"{', '.join(sorted(FD_PRESETS))}",
                EXIT_USAGE,
            )
        p = FD_PRESETS[args.preset]
        t, nu, rho = p["t"], p["nu"], p["rho"]
    else:
        t, nu, rho = args.expiry, args.nu, args.rho
    params = SabrParams(sigma0=0.18, nu=nu, rho=rho)
    config = FdConfig()
    try:
        solutions = solve_sequence(params, t, config, max_level=args.levels)
    except FdInstabilityError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NO_CONVERGENCE
    except DomainError as exc:
        raise CliError(str(exc), EXIT_DOMAIN) from exc
    ratios = richardson_ratios(solutions)
    header = [
        "level", "100*l2_h", "100*linf_h", "100*log_l2_h",
        "100*l2_sa2", "100*linf_sa2", "100*log_l2_sa2",
        "100*l2_bs", "richardson", "est_error",
    ]
    rows = []
    for k, sol in enumerate(solutions):
        try:
            rep_h = compare(sol, price_fn_for_model("h", params))
            rep_sa2 = compare(sol, price_fn_for_model("sa2", params))
            rep_bs = compare(sol, price_fn_for_model("bs", params))
        except DomainError as exc:
            raise CliError(str(exc), EXIT_DOMAIN) from exc
        ratio = ratios[k - 2] if k >= 2 else float("nan")
        est = sol.est_error if sol.est_error is not None else float("nan")
        rows.append([
            k, 100 * rep_h.l2, 100 * rep_h.linf, 100 * rep_h.log_l2,
            100 * rep_sa2.l2, 100 * rep_sa2.linf, 100 * rep_sa2.log_l2,
            100 * rep_bs.l2, ratio, est,
        ])
    if args.cutoff:
        sens = cutoff_sensitivity(params, t, config)
        rows.append(["cutoff", 100 * sens, *[float("nan")] * 8])
    _emit(rows, header, args)
    return EXIT_OK


def cmd_mc(args) -> int:
    if args.preset:
        if args.preset not in MC_PRESETS:
            raise CliError(
                f"--preset: unknown preset {args.preset!r}; choose from "
                f"{', '.join(sorted(MC_PRESETS))}",
                EXIT_USAGE,
            )
        p = MC_PRESETS[args.preset]
        spot, sigma, nu, rho, t = p["spot"], p["sigma"], p["nu"], p["rho"], p["t"]
    else:
        spot, sigma, nu, rho, t = args.spot, args.sigma, args.nu, args.rho, args.expiry
    params = SabrParams(sigma0=sigma, nu=nu, rho=rho)
    strikes = _parse_values(args.strikes, "strikes") if args.strikes else [spot]
    config = McConfig(n_paths=args.paths, dt=args.dt, seed=args.seed)
    rows = []
    for strike in strikes:
        try:
            query = OptionQuery(spot=spot, strike=strike, rate=args.rate, expiry=t)
            c_mc, se = simulate_price(query, params, config)
            y = query.log_moneyness
            disc = math.exp(-args.rate * t)
            c_h = disc * strike * price_h(y, t, params)
            c_d = disc * strike * price_d(y, t, params)
            c_sa2 = disc * price_sa2(query, params).total
        except DomainError as exc:
            raise CliError(str(exc), EXIT_DOMAIN) from exc
        rows.append([strike, y, c_mc, se, c_h, c_d, c_sa2, c_h - c_mc, c_d - c_mc])
    header = ["strike", "y", "c_mc", "std_error", "c_h", "c_d", "c_sa2", "e_h", "e_d"]
    _emit(rows, header, args)
    return EXIT_OK


def cmd_calibrate(args) -> int:
    try:
        if args.quotes:
            days = cal.read_quotes_csv(args.quotes)
            sigma_prev0 = args.sigma_prev
        else:
            gen = SabrParams(sigma0=args.sigma, nu=args.nu, rho=args.rho)
            days = cal.synth_panel(
                gen, n_days=args.synth_days, noise_level=args.noise, seed=args.seed
            )
            sigma_prev0 = None
        init = tuple(_parse_values(args.init, "init"))
        if len(init) != 3:
            raise CliError("--init: need nu,sigma,rho", EXIT_USAGE)
        results = cal.calibrate_panel(
            days, init, args.objective, sigma_prev0=sigma_prev0
        )
    except DomainError as exc:
        raise CliError(str(exc), EXIT_DOMAIN) from exc
    if args.out:
        cal.write_results_csv(args.out, results)
    else:
        cal.write_results_csv("/dev/stdout", results)
    nus = [r.nu for r in results]
    sigmas = [r.sigma for r in results]
    rhos = [r.rho for r in results]
    ises = [r.ise for r in results]
    oses = [r.ose for r in results if math.isfinite(r.ose)]
    summary_header = [
        "ise", "ose", "nu_mean", "nu_std", "sigma_mean", "sigma_std",
        "rho_mean", "rho_std",
    ]
    summary = [[
        float(np.mean(ises)),
        float(np.mean(oses)) if oses else float("nan"),
        float(np.mean(nus)), float(np.std(nus)),
        float(np.mean(sigmas)), float(np.std(sigmas)),
        float(np.mean(rhos)), float(np.std(rhos)),
    ]]
    summary_args = argparse.Namespace(format=args.format, out=None)
    _emit(summary, summary_header, summary_args)
    if not all(r.converged for r in results):
        return EXIT_NO_CONVERGENCE
    return EXIT_OK


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--sigma", type=float, default=0.2, help="initial volatility")
    p.add_argument("--nu", type=float, default=0.125, help="vol-of-vol")
    p.add_argument("--rho", type=float, default=-0.4, help="correlation")
    p.add_argument("--kappa0", type=float, default=0.0, help="mean-reversion scale")
    p.add_argument("--theta", type=float, default=0.0, help="mean-reversion level")
    p.add_argument("--seed", type=int, default=0, help="random seed")
    p.add_argument("--out", default=None, help="output path (default: stdout)")
    p.add_argument(
        "--format", choices=("csv", "tsv", "pretty"), default="pretty",
        help="output table format",
    )
    p.add_argument(
        "--print-config", action="store_true",
        help="print the resolved configuration and exit",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sabrkit",
        description="SABR pricing, benchmarks, and calibration toolkit",
    )
    sub = parser.add_subparsers(dest="subcommand", required=True)

    p = sub.add_parser("price", help="price table over a (y, t) lattice")
    _add_common(p)
    p.add_argument("--model", default="sa2", help="comma list of models: "
                   + ", ".join(MODEL_NAMES))
    p.add_argument("--y", default="0", help="log-moneyness values (list or a:b:n)")
    p.add_argument("--t", default="1", help="expiries (list or a:b:n)")
    p.set_defaults(func=cmd_price)

    p = sub.add_parser("residual", help="PDE residual norms per model")
    _add_common(p)
    p.add_argument("--preset", default=None, help="named region preset "
                   "(table4, table5-row1..6)")
    p.add_argument("--y", default="-0.5,0.5", help="log-moneyness range lo,hi")
    p.add_argument("--t", default="0.1,1", help="expiry range lo,hi")
    p.add_argument("--sigma-range", default="0.1,0.3", help="sigma range lo,hi")
    p.set_defaults(func=cmd_residual)

    p = sub.add_parser("fd", help="finite-difference benchmark vs closed forms")
    _add_common(p)
    p.add_argument("--preset", default=None, help="named row preset "
                   "(fd1-row1..7, fd2-row1..3)")
    p.add_argument("--expiry", type=float, default=0.5, help="maturity T")
    p.add_argument("--levels", type=int, default=1, help="max refinement level")
    p.add_argument("--cutoff", action="store_true",
                   help="append a cut-off sensitivity row")
    p.set_defaults(func=cmd_fd)

    p = sub.add_parser("mc", help="Monte Carlo benchmark across strikes")
    _add_common(p)
    p.add_argument("--preset", default=None, help="named preset (mc-paper)")
    p.add_argument("--spot", type=float, default=10.0)
    p.add_argument("--rate", type=float, default=0.0)
    p.add_argument("--expiry", type=float, default=1.0, help="maturity T")
    p.add_argument("--strikes", default=None, help="strike values (list or a:b:n)")
    p.add_argument("--paths", type=int, default=30000)
    p.add_argument("--dt", type=float, default=1e-3)
    p.set_defaults(func=cmd_mc)

    p = sub.add_parser("calibrate", help="fit (nu, sigma, rho) to a quote panel")
    _add_common(p)
    p.add_argument("--quotes", default=None, help="quote CSV "
                   "(day,type,expiry_months,delta,implied_vol)")
    p.add_argument("--objective", default="sigma_d", choices=cal.OBJECTIVES)
    p.add_argument("--init", default="0.5,0.2,-0.3", help="start nu,sigma,rho")
    p.add_argument("--sigma-prev", type=float, default=None,
                   help="day-0 sigma for delta-to-moneyness conversion")
    p.add_argument("--synth-days", type=int, default=5,
                   help="synthetic panel length when no --quotes given")
    p.add_argument("--noise", type=float, default=0.0,
                   help="synthetic quote noise (vol points)")
    p.set_defaults(func=cmd_calibrate)

    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.print_config:
        skip = {"func", "print_config", "subcommand"}
        for key in sorted(vars(args)):
            if key not in skip:
                print(f"{key}={getattr(args, key)}")
        return EXIT_OK
    try:
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except DomainError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN


if __name__ == "__main__":
    sys.exit(main())
