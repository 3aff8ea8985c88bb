"""Command line front end.

Exit status: 0 on success, 2 when the inputs fail validation, 3 when a
numerical procedure cannot certify its result. Failures print a one-line
JSON diagnostic on standard error.

Every subcommand accepts ``--config FILE`` with ``key = value`` lines (keys
are flag names with or without the leading dashes); flags given on the
command line take precedence.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from collections.abc import Sequence
from pathlib import Path
from typing import Any, NoReturn

import numpy as np

from .errors import ConfigurationError, NumericalError
from .io import dumps_json, format_float, write_rows

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_NUMERICAL = 3


class CLIValidationError(ConfigurationError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str) -> NoReturn:
        _diagnose("ValidationError", message, EXIT_VALIDATION)
        raise SystemExit(EXIT_VALIDATION)


def _diagnose(kind: str, message: str, code: int, **extra: Any) -> None:
    payload = {"error": kind, "message": message, "exit": code}
    if extra:
        payload["diagnostics"] = {k: repr(v) if not isinstance(v, (int, float, str)) else v
                                  for k, v in extra.items()}
    sys.stderr.write(json.dumps(payload, sort_keys=True) + "\n")


def _real(text: str) -> float:
    try:
        return float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None


def _exponent(text: str) -> float:
    if text.strip().lower() in ("inf", "infinity", "oo"):
        return math.inf
    return _real(text)


def _int_pair(text: str) -> tuple[int, int]:
    try:
        a, b = text.split(":")
        return int(a), int(b)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected 'a:b', got {text!r}") from None


def _real_list(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a comma-separated list, got {text!r}") from None


def _require(args: argparse.Namespace, *names: str) -> None:
    missing = [n for n in names if getattr(args, n, None) is None]
    if missing:
        flags = ", ".join("--" + n.replace("_", "-") for n in missing)
        raise CLIValidationError(f"missing required option(s): {flags}")


def _read_config(path: str) -> dict[str, str]:
    values: dict[str, str] = {}
    for lineno, line in enumerate(Path(path).read_text().splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise CLIValidationError(f"{path}:{lineno}: expected key = value")
        key, value = (part.strip() for part in line.split("=", 1))
        values[key.lstrip("-").replace("-", "_")] = value
    return values


# {{{ mlf


def cmd_mlf(args: argparse.Namespace) -> int:
    from .mlf import MLParams, RaySpec, evaluate_ray

    _require(args, "alpha", "beta", "s", "r_min", "r_max")
    params = MLParams(args.alpha, args.beta)
    ray = RaySpec(args.s, args.gamma)
    if args.method != "series":
        ray.require_decay(params.alpha)
    if not 0 < args.r_min <= args.r_max:
        raise CLIValidationError("need 0 < r-min <= r-max")
    if args.points < 1:
        raise CLIValidationError("points must be positive")
    r = np.geomspace(args.r_min, args.r_max, args.points) if args.points > 1 else np.array([args.r_min])
    rows = []
    for rr in r:
        ev = evaluate_ray(params, ray, float(rr), method=args.method)
        rows.append([float(rr), ev.value.real, ev.value.imag, ev.method])
    _write_table(args.output, ["r", "re", "im", "method"], rows)
    return EXIT_OK


def _write_table(path: str | None, header: Sequence[str], rows: list[list[Any]]) -> None:
    if path in (None, "-"):
        sys.stdout.write(",".join(header) + "\n")
        for row in rows:
            sys.stdout.write(
                ",".join(format_float(v) if isinstance(v, float) else str(v) for v in row) + "\n"
            )
    else:
        write_rows(path, header, rows)


# }}}


# {{{ kernel


def cmd_kernel(args: argparse.Namespace) -> int:
    from .mlf import MLParams, RaySpec
    from .radial import asymptotic_slope, default_windows, default_xi_grid, sample_kernel_hat

    _require(args, "d", "gamma")
    if args.d < 1:
        raise CLIValidationError("--d must be a positive integer")
    params = MLParams(args.alpha, args.beta)
    ray = RaySpec(args.s, args.gamma)
    ray.require_decay(params.alpha)
    lo, hi = args.xi_octaves
    if lo >= hi:
        raise CLIValidationError("--xi-octaves needs lo < hi")
    grid = default_xi_grid(lo, hi, args.per_octave)
    samples = sample_kernel_hat(params, ray, args.d, grid)
    if args.output:
        samples.to_csv(args.output)
    low_w, high_w = default_windows(grid, *args.slope_windows)
    small = asymptotic_slope(samples, low_w)
    mag = np.abs(samples.values)
    in_high = (grid >= high_w[0]) & (grid <= high_w[1])
    floor = 1e-12 * float(np.max(mag))
    try:
        large = asymptotic_slope(samples, high_w)
    except ConfigurationError:
        large = -math.inf
    super_poly = bool(large < -10 or np.max(mag[in_high]) <= floor)
    summary = {
        "d": args.d,
        "gamma": args.gamma,
        "small_xi_slope": small,
        "large_xi_slope": large,
        "small_xi_window": list(low_w),
        "large_xi_window": list(high_w),
        "super_polynomial": super_poly,
    }
    sys.stdout.write(dumps_json(summary) + "\n")
    return EXIT_OK


# }}}


# {{{ lp-verify


def cmd_lp_verify(args: argparse.Namespace) -> int:
    from .littlewood_paley import verify_band_bound
    from .mlf import MLParams, RaySpec
    from .radial import admissible_exponents

    _require(args, "p", "d", "gamma")
    if not args.p > 1:
        raise CLIValidationError(f"p must exceed 1: got {args.p}")
    if args.j_min > args.j_max:
        raise CLIValidationError("--j-min must not exceed --j-max")
    params = MLParams(args.alpha, args.beta)
    ray = RaySpec(args.s, args.gamma)
    ray.require_decay(params.alpha)
    report = verify_band_bound(params, ray, args.d, args.p, (args.j_min, args.j_max))
    if args.output:
        report.to_csv(args.output)
    summary = report.summary()
    summary["admissible"] = args.p in admissible_exponents(args.gamma, args.d)
    sys.stdout.write(dumps_json(summary) + "\n")
    return EXIT_OK


# }}}


# {{{ solve / dispersive


def _problem(args: argparse.Namespace, with_forcing: bool) -> Any:
    from .fracpde import FieldProfile, ForcingProfile, ProblemSpec

    _require(args, "alpha", "beta", "mu", "nu")
    profile = FieldProfile(args.profile, args.sigma)
    forcing = None
    if with_forcing:
        forcing = ForcingProfile(FieldProfile(args.profile, args.sigma))
    return ProblemSpec(args.alpha, args.beta, args.mu, args.nu,
                       None if with_forcing else profile, forcing)


def cmd_solve(args: argparse.Namespace) -> int:
    from .fracpde import Grid, check_box, sample, solve_homogeneous, solve_inhomogeneous

    _require(args, "t_list")
    inhomogeneous = args.forcing != "none"
    spec = _problem(args, inhomogeneous)
    grid = Grid(args.d, args.n_grid, args.box)
    if any(t < 0 for t in args.t_list):
        raise CLIValidationError("times must be non-negative")
    out = Path(args.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    if not inhomogeneous:
        check_box(sample(spec.initial, grid))
    rows = []
    for k, t in enumerate(args.t_list):
        if inhomogeneous:
            field = solve_inhomogeneous(spec, t, grid, args.n_time)
        else:
            field = solve_homogeneous(spec, t, grid)
        check_box(field)
        stem = out / f"snapshot_{k:03d}"
        if args.format == "binary":
            field.to_binary(stem.with_suffix(".bin"))
        else:
            field.to_csv(stem.with_suffix(".csv"))
        rows.append([float(t), field.norm(args.q)])
    write_rows(out / "norms.csv", ["t", "norm_q", "bound"], _with_bounds(spec, args, grid, rows))
    return EXIT_OK


def _with_bounds(spec: Any, args: argparse.Namespace, grid: Any, rows: list[list[float]]) -> list:
    """Append ``C t**e`` with the exponent of the applicable estimate and ``C``
    the smallest constant that dominates every positive time; ``nan`` when
    the estimate does not apply."""
    from .fracpde import (
        check_dispersive_hypotheses,
        check_inhomogeneous_hypotheses,
        dispersive_exponent,
        inhomogeneous_exponent,
    )

    try:
        if spec.forcing is None:
            check_dispersive_hypotheses(spec, args.p, args.q, grid.d)
            e = dispersive_exponent(spec, args.p, args.q, grid.d)
        else:
            check_inhomogeneous_hypotheses(spec, args.p, args.q, math.inf, grid.d)
            e = inhomogeneous_exponent(spec, args.p, args.q, math.inf, grid.d)
    except ConfigurationError:
        e = None
    positive = [(t, n) for t, n in rows if t > 0]
    if e is None or not positive:
        return [[t, n, math.nan] for t, n in rows]
    c = max(n / t**e for t, n in positive)
    return [[t, n, c * t**e if t > 0 else math.nan] for t, n in rows]


def cmd_dispersive(args: argparse.Namespace) -> int:
    from .fracpde import (
        Grid,
        check_dispersive_hypotheses,
        check_inhomogeneous_hypotheses,
        verify_dispersive,
        verify_inhomogeneous_decay,
    )

    _require(args, "p", "q")
    inhomogeneous = args.mode == "inhomogeneous"
    spec = _problem(args, inhomogeneous)
    grid = Grid(args.d, args.n_grid, args.box)
    if not 0 < args.t_min < args.t_max or args.t_points < 2:
        raise CLIValidationError("need 0 < t-min < t-max and at least two times")
    times = np.geomspace(args.t_min, args.t_max, args.t_points)
    if inhomogeneous:
        check_inhomogeneous_hypotheses(spec, args.p, args.q, args.r, args.d)
        report = verify_inhomogeneous_decay(spec, args.p, args.q, args.r, times, grid, args.n_time)
        passed = report.slope <= report.expected + args.tolerance
    else:
        check_dispersive_hypotheses(spec, args.p, args.q, args.d)
        report = verify_dispersive(spec, args.p, args.q, times, grid, family=args.family)
        passed = abs(report.slope - report.expected) <= args.tolerance
    if args.output:
        report.to_csv(args.output)
    verdict = {
        "slope": report.slope,
        "expected": report.expected,
        "pass": bool(passed),
        "prefactor": report.prefactor,
        "mode": args.mode,
    }
    sys.stdout.write(dumps_json(verdict) + "\n")
    return EXIT_OK


# }}}


def _add_ml(p: argparse.ArgumentParser, gamma_default: float | None) -> None:
    p.add_argument("--alpha", type=_real)
    p.add_argument("--beta", type=_real)
    p.add_argument("--s", type=_real)
    p.add_argument("--gamma", type=_real, default=gamma_default)


def _add_pde(p: argparse.ArgumentParser) -> None:
    p.add_argument("--alpha", type=_real)
    p.add_argument("--beta", type=_real)
    p.add_argument("--mu", type=_real)
    p.add_argument("--nu", type=_real)
    p.add_argument("--d", type=int, default=1)
    p.add_argument("--n-grid", type=int, default=1024)
    p.add_argument("--box", type=_real, default=64.0)
    p.add_argument("--profile", default="gaussian",
                   choices=["gaussian", "super_gaussian", "modulated_gaussian"])
    p.add_argument("--sigma", type=_real, default=1.0)
    p.add_argument("--n-time", type=int, default=16)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="mlfourier", description=__doc__.splitlines()[0])
    parser.add_argument("--config", help="key = value file with default option values")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    p = sub.add_parser("mlf", help="evaluate E_{alpha,beta}(exp(i pi s) r^gamma)")
    _add_ml(p, 1.0)
    p.add_argument("--r-min", type=_real)
    p.add_argument("--r-max", type=_real)
    p.add_argument("--points", type=int, default=1)
    p.add_argument("--method", choices=["series", "contour", "auto"], default="auto")
    p.add_argument("--output", default="-")
    p.set_defaults(func=cmd_mlf)

    p = sub.add_parser("kernel", help="Fourier transform of the kernel and slope fits")
    _add_ml(p, None)
    p.set_defaults(alpha=0.5, beta=1.0, s=1.0)
    p.add_argument("--d", type=int)
    p.add_argument("--xi-octaves", type=_int_pair, default=(-14, 10))
    p.add_argument("--per-octave", type=int, default=8)
    p.add_argument("--slope-windows", type=_int_pair, default=(5, 4))
    p.add_argument("--output")
    p.set_defaults(func=cmd_kernel)

    p = sub.add_parser("lp-verify", help="Littlewood-Paley band norms against the envelope")
    _add_ml(p, None)
    p.set_defaults(alpha=0.5, beta=1.0, s=1.0)
    p.add_argument("--d", type=int)
    p.add_argument("--p", type=_exponent)
    p.add_argument("--j-min", type=int, default=-10)
    p.add_argument("--j-max", type=int, default=14)
    p.add_argument("--output")
    p.set_defaults(func=cmd_lp_verify)

    p = sub.add_parser("solve", help="spectral solution snapshots")
    _add_pde(p)
    p.add_argument("--t-list", type=_real_list)
    p.add_argument("--forcing", choices=["none", "profile"], default="none")
    p.add_argument("--p", type=_exponent, default=1.0)
    p.add_argument("--q", type=_exponent, default=math.inf)
    p.add_argument("--format", choices=["csv", "binary"], default="csv")
    p.add_argument("--output-dir", default="snapshots")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("dispersive", help="fit decay exponents of the solution")
    _add_pde(p)
    p.add_argument("--p", type=_exponent)
    p.add_argument("--q", type=_exponent)
    p.add_argument("--r", type=_exponent, default=math.inf)
    p.add_argument("--mode", choices=["homogeneous", "inhomogeneous"], default="homogeneous")
    p.add_argument("--family", choices=["fixed", "dilated"], default="fixed")
    p.add_argument("--t-min", type=_real, default=1.0)
    p.add_argument("--t-max", type=_real, default=100.0)
    p.add_argument("--t-points", type=int, default=9)
    p.add_argument("--tolerance", type=_real, default=0.03)
    p.add_argument("--output")
    p.set_defaults(func=cmd_dispersive)

    parser._subparser_map = sub.choices  # type: ignore[attr-defined]
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        config_path = None
        if "--config" in argv:
            i = argv.index("--config")
            if i + 1 >= len(argv):
                raise CLIValidationError("--config needs a file name")
            config_path = argv[i + 1]
            del argv[i:i + 2]
        args = parser.parse_args(argv)
        if args.command is None:
            raise CLIValidationError("a subcommand is required")
        if config_path is not None:
            sub = parser._subparser_map[args.command]  # type: ignore[attr-defined]
            values = _read_config(config_path)
            known = {a.dest for a in sub._actions}
            unknown = sorted(set(values) - known)
            if unknown:
                raise CLIValidationError(f"unknown configuration keys: {', '.join(unknown)}")
            sub.set_defaults(**values)
            args = parser.parse_args(argv)
        return args.func(args)
    except ConfigurationError as exc:
        _diagnose(type(exc).__name__, str(exc), EXIT_VALIDATION)
        return EXIT_VALIDATION
    except NumericalError as exc:
        _diagnose(type(exc).__name__, str(exc), EXIT_NUMERICAL, **exc.diagnostics)
        return EXIT_NUMERICAL
    except (ArithmeticError, FloatingPointError, np.linalg.LinAlgError) as exc:
        _diagnose(type(exc).__name__, str(exc), EXIT_NUMERICAL)
        return EXIT_NUMERICAL
    except OSError as exc:
        _diagnose(type(exc).__name__, str(exc), EXIT_VALIDATION)
        return EXIT_VALIDATION
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_VALIDATION


if __name__ == "__main__":
    raise SystemExit(main())
