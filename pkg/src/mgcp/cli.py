"""Command-line entry point: pmf, sample, integral, mlf, residual, verify."""

from __future__ import annotations

import argparse
import sys

import numpy as np

from mgcp import fractional_variants as fv
from mgcp import gcp_core, integrals, samplers
from mgcp.config import ConfigError, ExperimentConfig, config_from_dict, load_config
from mgcp.fractional_variants import VariantKind
from mgcp.harness import SUITES, Table, emit_csv, format_real, run_suite, stream_for
from mgcp.special_functions import MlfParams, SeriesConvergenceError, mlf3


def _floats(text: str) -> list[float]:
    return [float(v) for v in text.split(",") if v.strip()]


def _global_flags(parser: argparse.ArgumentParser, suppress: bool) -> None:
    default = argparse.SUPPRESS if suppress else None
    parser.add_argument("--config", default=default, help="experiment config (JSON)")
    parser.add_argument("--seed", type=int, default=default, help="override the config seed")
    parser.add_argument("--out", default=default, help="output CSV path (default: stdout)")
    parser.add_argument("--quiet", action="store_true", default=argparse.SUPPRESS if suppress else False)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mgcp", description=__doc__)
    _global_flags(parser, suppress=False)
    sub = parser.add_subparsers(dest="command", required=True)

    def command(name: str, help_text: str) -> argparse.ArgumentParser:
        p = sub.add_parser(name, help=help_text)
        _global_flags(p, suppress=True)
        return p

    p = command("pmf", "pmf table of the base process or a variant")
    p.add_argument("--n-max", type=int)
    p.add_argument("--method", choices=("direct", "conv", "sumgcp"), default="conv")
    p.add_argument("--variant")

    p = command("sample", "sample paths on a time grid")
    p.add_argument("--variant")
    p.add_argument("--paths", type=int, default=10)
    p.add_argument("--grid", help='comma-separated times; use ":" between coordinates, e.g. "0.5:1,1:2"')

    p = command("integral", "draws of the (fractional) integral of the process")
    p.add_argument("--mode", choices=("compound", "quadrature"), default="compound")
    p.add_argument("--alpha", help="integration orders a1,..,ad (default all 1)")
    p.add_argument("--paths", type=int, default=1000)
    p.add_argument("--nodes", type=int, default=256)

    p = command("mlf", "three-parameter Mittag-Leffler function")
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--beta", type=float, default=1.0)
    p.add_argument("--gamma", type=float, default=1.0)
    p.add_argument("--x", type=float, required=True)

    p = command("residual", "governing-equation residual diagnostics")
    p.add_argument("--variant")
    p.add_argument("--n", type=int, default=1)
    p.add_argument("--axis", type=int, default=0)

    p = command("verify", "run verification suites")
    p.add_argument("--suite", default="all", choices=SUITES + ("all",))
    return parser


def _config(args) -> ExperimentConfig:
    if not args.config:
        raise ConfigError("--config", "this command needs a config file")
    cfg = load_config(args.config)
    if args.seed is not None:
        cfg = cfg.with_seed(args.seed)
    return cfg


def _variant_config(args, cfg: ExperimentConfig) -> ExperimentConfig:
    """Apply a ``--variant`` override, adapting the time argument to the variant's shape."""
    if not getattr(args, "variant", None):
        return cfg
    kind = VariantKind.parse(args.variant)
    obj = cfg.to_dict()
    obj["variant"] = kind.value
    t = obj["t"]
    if kind.multivariate and isinstance(t, list):
        if len(set(t)) != 1:
            raise ConfigError("t", f"{kind.value} needs equal time coordinates or a scalar time")
        obj["t"] = t[0]
    elif not kind.multivariate and not isinstance(t, list):
        obj["t"] = [t] * cfg.d
    return config_from_dict(obj)


def _parse_grid(text: str | None, cfg: ExperimentConfig) -> np.ndarray:
    if not text:
        return cfg.base_time.t[None, :]
    points = []
    for item in text.split(","):
        coords = [float(v) for v in item.split(":")]
        if len(coords) == 1:
            coords = coords * cfg.d
        if len(coords) != cfg.d:
            raise ValueError(f"grid point {item!r} must have 1 or {cfg.d} coordinates")
        points.append(coords)
    return np.array(points)


def cmd_pmf(args) -> int:
    cfg = _variant_config(args, _config(args))
    n_max = args.n_max if args.n_max is not None else cfg.n_max
    if cfg.variant is VariantKind.BASE:
        table = gcp_core.pmf_table(cfg.rate_matrix, cfg.base_time, n_max, method=args.method)
    else:
        table = fv.variant_pmf_table(cfg.rate_matrix, cfg.time, cfg.orders, cfg.variant, n_max)
    cum = table.cumulative()
    rows = [(n, float(p), float(c)) for n, (p, c) in enumerate(zip(table.probs, cum))]
    emit_csv(Table(("n", "p", "cumulative"), rows), args.out)
    return 0


def cmd_sample(args) -> int:
    cfg = _variant_config(args, _config(args))
    grid = _parse_grid(args.grid, cfg)
    rng = stream_for(cfg.seed, "cli.sample")
    path = samplers.sample_variant_path(cfg.rate_matrix, grid, cfg.orders, cfg.variant, rng, size=args.paths)
    header = ["path_id", "grid_index"] + [f"t_{i + 1}" for i in range(cfg.d)] + ["value"]
    rows = [
        [r, g, *(float(v) for v in grid[g]), int(path.values[r, g])]
        for r in range(args.paths)
        for g in range(grid.shape[0])
    ]
    emit_csv(Table(header, rows), args.out)
    return 0


def cmd_integral(args) -> int:
    cfg = _config(args)
    orders = _floats(args.alpha) if args.alpha else [1.0] * cfg.d
    spec = integrals.IntegralSpec(np.array(orders), cfg.base_time, args.nodes)
    rng = stream_for(cfg.seed, f"cli.integral.{args.mode}")
    if args.mode == "compound":
        draws = integrals.integral_sample_compound(cfg.rate_matrix, spec, rng, size=args.paths)
    else:
        draws = integrals.integral_sample_quadrature(cfg.rate_matrix, spec, rng, size=args.paths)
    emit_csv(Table(("replicate", "value"), [(i, float(v)) for i, v in enumerate(draws)]), args.out)
    if not args.quiet:
        m, v = integrals.integral_mean(cfg.rate_matrix, spec), integrals.integral_variance(cfg.rate_matrix, spec)
        print(f"# exact mean {format_real(m)}, variance {format_real(v)}", file=sys.stderr)
    return 0


def cmd_mlf(args) -> int:
    res = mlf3(MlfParams(args.alpha, args.beta, args.gamma), args.x)
    emit_csv(Table(("value", "terms_used", "tail_bound"), [(res.value, res.terms_used, res.tail_bound)]), args.out)
    return 0


def cmd_residual(args) -> int:
    cfg = _variant_config(args, _config(args))
    res = fv.governing_system_residual(cfg.rate_matrix, cfg.time, cfg.orders, args.n, cfg.variant, axis=args.axis)
    emit_csv(Table(("variant", "n", "axis", "residual"), [(cfg.variant.value, args.n, args.axis, float(res))]), args.out)
    return 0


def cmd_verify(args) -> int:
    cfg = _config(args)
    report = run_suite(cfg, args.suite)
    if not args.quiet:
        for line in report.lines():
            print(line)
    if args.out:
        emit_csv(report.table(), args.out)
    return 0 if report.overall else 1


COMMANDS = {
    "pmf": cmd_pmf,
    "sample": cmd_sample,
    "integral": cmd_integral,
    "mlf": cmd_mlf,
    "residual": cmd_residual,
    "verify": cmd_verify,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except (ConfigError, SeriesConvergenceError, ValueError, OSError) as exc:
        print(f"mgcp {args.command}: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
