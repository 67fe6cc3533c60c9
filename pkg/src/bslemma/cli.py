"""Command-line entry point.

Exit codes: 0 success, 1 validation failure (bad flags or config, metric
violations, an unverified witness, a failed transfer check), 2 internal or
I/O error.  Failures print one JSON object on stderr::

    {"error": "metric-axiom-violation", "message": "..."}
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import asdict

import numpy as np

from . import __version__
from .config import load_config, parse_real, to_json_text, write_records, write_text
from .covering import estimate_doubling
from .errors import BSLemmaError, ConfigError, ValidationError
from .experiments import (
    FIT_FIELDS,
    SWEEP_FIELDS,
    SweepSpec,
    TransferMap,
    bs_sweep,
    c_delta_table,
    check_bilipschitz_transfer,
    check_snowflake_transfer,
)
from .metric import GeneratorSpec, PointConfiguration, generate_configuration
from .support import SolverMode, SupportParams, default_mode, supported_points
from .witness import construct_witness

SUPPORT_FIELDS = ("index", "isolation_radius", "deficit", "supported")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ValidationError(message)


def _unit_interval(name: str, text) -> float:
    value = parse_real(text)
    if not 0.0 < value < 1.0:
        raise ValidationError(f"--{name} must lie in (0, 1), got {text}")
    return value


def _s_value(text) -> int:
    try:
        s = int(text)
    except (TypeError, ValueError) as exc:
        raise ValidationError(f"--s must be an integer, got {text!r}") from exc
    if s < 2:
        raise ValidationError(f"--s must be >= 2, got {s}")
    return s


def _floats(text: str) -> list[float]:
    return [parse_real(part) for part in text.split(",") if part.strip()]


def _configuration(args) -> PointConfiguration:
    _, loaded = load_config(args.config)
    if isinstance(loaded, GeneratorSpec):
        if args.seed is not None:
            loaded = GeneratorSpec(loaded.family, loaded.count, args.seed, loaded.dimension, loaded.radius)
        return generate_configuration(loaded)
    return loaded


def _mode(args, config) -> SolverMode:
    return SolverMode.parse(args.solver) if args.solver else default_mode(config.space)


def cmd_supported(args) -> int:
    if args.delta is None or args.s is None:
        raise ValidationError("supported needs --delta and --s")
    params = SupportParams(_unit_interval("delta", args.delta), _s_value(args.s))
    config = _configuration(args)
    mode = _mode(args, config)
    indices, report = supported_points(config, params, mode)
    if args.format == "json":
        payload = {
            "delta": params.delta,
            "s": params.s,
            "solver": str(mode),
            "direction": report.direction,
            "supported": indices.tolist(),
            "points": report.rows(),
        }
        write_text(to_json_text(payload), args.output)
    else:
        write_records(report.rows(), args.output, "csv", SUPPORT_FIELDS)
    return 0


def cmd_doubling(args) -> int:
    config = _configuration(args)
    est = estimate_doubling(config, args.samples, args.seed or 0)
    rows = [{"center": c, "radius": R, "count": k} for c, R, k in est.samples]
    if args.format == "csv":
        write_records(rows, args.output, "csv", ("center", "radius", "count"))
    else:
        write_text(to_json_text({"D_hat": est.D_hat, "dim_hat": est.dim_hat, "samples": rows}), args.output)
    return 0


def cmd_witness(args) -> int:
    config = _configuration(args)
    result = construct_witness(config)
    write_text(to_json_text(result.to_json()), args.output)
    return 0 if result.verified else 1


def cmd_sweep(args) -> int:
    _, loaded = load_config(args.config)
    if not isinstance(loaded, GeneratorSpec):
        raise ConfigError("sweep needs a configuration with a 'generator'")
    with open(args.config) as fh:
        settings = json.load(fh).get("sweep", {})
    deltas = _floats(args.delta) if args.delta else [parse_real(d) for d in settings.get("deltas", [])]
    s_values = [int(s) for s in args.s.split(",")] if args.s else settings.get("s", [])
    for d in deltas:
        _unit_interval("delta", d)
    for s in s_values:
        _s_value(s)
    spec = SweepSpec(
        generator=loaded,
        deltas=tuple(deltas),
        s_values=tuple(s_values),
        trials=args.trials or int(settings.get("trials", 1)),
        seed=args.seed if args.seed is not None else int(settings.get("seed", 0)),
        mode=SolverMode.parse(args.solver) if args.solver else None,
    )
    records = bs_sweep(spec, workers=args.workers)
    write_records(records, args.output, args.format or "csv", SWEEP_FIELDS)
    if args.fit_output:
        write_records(c_delta_table(records, loaded.dimension), args.fit_output, "csv", FIT_FIELDS)
    return 0


def cmd_transfer(args) -> int:
    if args.delta is None:
        raise ValidationError("transfer needs --delta")
    delta = _unit_interval("delta", args.delta)
    config = _configuration(args)
    mode = SolverMode.parse(args.solver) if args.solver else None
    if args.kind == "snowflake":
        if args.epsilon is None:
            raise ValidationError("snowflake transfer needs --epsilon")
        report = check_snowflake_transfer(config, _unit_interval("epsilon", args.epsilon), delta, mode)
        ok = report.equal and not report.boundary_hits
    else:
        if args.s is None or args.matrix is None:
            raise ValidationError("bilipschitz transfer needs --matrix and --s")
        entries = _floats(args.matrix)
        dim = int(round(len(entries) ** 0.5))
        if dim * dim != len(entries):
            raise ValidationError("--matrix needs a square number of entries")
        offset = _floats(args.offset) if args.offset else [0.0] * dim
        f = TransferMap(np.reshape(entries, (dim, dim)), offset, parse_real(args.lipschitz))
        report = check_bilipschitz_transfer(config, f, delta, _s_value(args.s), mode)
        ok = report.holds
    write_text(to_json_text(asdict(report)), args.output)
    return 0 if ok else 1


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="bslemma", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(p, fmt_default="csv"):
        p.add_argument("config", help="JSON configuration file")
        p.add_argument("-o", "--output", default="-", help="output path ('-' for stdout)")
        p.add_argument("--format", choices=("csv", "json"), default=fmt_default)
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--solver", default=None, help="restricted-to-c | euclidean-exact-2d | candidate-grid:N")

    p = sub.add_parser("supported", help="(delta, s)-supported points of a configuration")
    common(p)
    p.add_argument("--delta", help="decimal or rational, e.g. 1/20")
    p.add_argument("--s")
    p.set_defaults(run=cmd_supported)

    p = sub.add_parser("doubling", help="doubling constant and dimension estimate")
    common(p, "json")
    p.add_argument("--samples", type=int, default=200)
    p.set_defaults(run=cmd_doubling)

    p = sub.add_parser("witness", help="non-doubling witness construction (exit 0 iff verified)")
    common(p, "json")
    p.set_defaults(run=cmd_witness)

    p = sub.add_parser("sweep", help="supported-fraction sweep over (delta, s)")
    common(p)
    p.add_argument("--delta", help="comma-separated deltas")
    p.add_argument("--s", help="comma-separated s values")
    p.add_argument("--trials", type=int, default=None)
    p.add_argument("--workers", type=int, default=None)
    p.add_argument("--fit-output", default=None, help="also write the c(delta) table here")
    p.set_defaults(run=cmd_sweep)

    p = sub.add_parser("transfer", help="snowflake or bi-Lipschitz transfer check (exit 0 iff it holds)")
    common(p, "json")
    p.add_argument("--kind", choices=("snowflake", "bilipschitz"), default="snowflake")
    p.add_argument("--delta")
    p.add_argument("--epsilon")
    p.add_argument("--s")
    p.add_argument("--matrix", help="row-major entries, e.g. 2,0,0,1")
    p.add_argument("--offset")
    p.add_argument("--lipschitz", default="1")
    p.set_defaults(run=cmd_transfer)
    return parser


def _fail(kind: str, message: str, code: int) -> int:
    sys.stderr.write(json.dumps({"error": kind, "message": message}) + "\n")
    return code


def run_command(argv: list[str] | None = None) -> int:
    try:
        args = build_parser().parse_args(argv)
        return args.run(args)
    except ValidationError as exc:
        return _fail(exc.kind, str(exc), 1)
    except BSLemmaError as exc:
        return _fail(exc.kind, str(exc), 1 if exc.kind == "degenerate-witness" else 2)
    except OSError as exc:
        return _fail("io", str(exc), 2)
    except Exception as exc:  # noqa: BLE001
        return _fail("internal", f"{type(exc).__name__}: {exc}", 2)


def main() -> None:
    sys.exit(run_command())


if __name__ == "__main__":
    main()
