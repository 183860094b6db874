"""
Command-line front end.

Results go to stdout (or ``--output``), diagnostics to stderr. Exit codes:
0 success, 1 usage error, 2 validation failure, 3 budget exceeded.
"""
import argparse
import logging
import sys
from collections.abc import Callable, Sequence
from fractions import Fraction
from pathlib import Path
from typing import NoReturn

from pydantic import BaseModel
from pydantic import ValidationError as SchemaError

from app.core.config import settings
from app.core.errors import TreeHomError, ValidationFailure
from app.core.logging import setup_logging
from app.schemas.experiments import ExperimentConfig
from app.services.enumeration import (
    SurfaceTensionTable,
    enumerate_invariant,
    enumerate_invariant_parallel,
    surface_tension_table,
)
from app.services.experiments import (
    concentration_csv,
    estimate_slope,
    render_depth_field,
    run_concentration,
    run_coupling_experiment,
    run_min_probability_test,
    run_stationarity_test,
    sample_configuration,
    sample_limit_shape,
)
from app.services.kirszbraun import kirszbraun_extend
from app.services.lattice import Slope, validate_homomorphism
from app.services.profiles import (
    AsymptoticProfile,
    BoundaryProfile,
    QuadraticSurfaceTension,
    SurfaceTensionModel,
    TabulatedSurfaceTension,
    minimize_entropy,
)
from app.services.serialization import (
    dump_config,
    dump_height,
    dump_profile,
    load_config,
    load_height,
    load_partial,
    load_profile,
)

logger = logging.getLogger(__name__)

USAGE_ERROR = 1


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    """argparse with usage errors mapped to exit code 1."""

    def error(self, message: str) -> NoReturn:
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        sys.exit(USAGE_ERROR)


def _emit(text: str, output: Path | None) -> None:
    if output is None:
        sys.stdout.write(text)
    else:
        output.write_text(text)
        logger.info("wrote %s", output)


def _read(path: Path) -> str:
    try:
        return path.read_text()
    except OSError as e:
        raise UsageError(f"cannot read {path}: {e}")


def _report(cfg: ExperimentConfig, report: BaseModel) -> str:
    lines = cfg.header()
    for key, value in report.model_dump().items():
        if isinstance(value, list):
            value = ",".join(str(v) for v in value)
        lines.append(f"{key}={value}")
    return "\n".join(lines) + "\n"


def _experiment(args: argparse.Namespace, name: str) -> ExperimentConfig:
    overrides = {
        key: getattr(args, key)
        for key in ExperimentConfig.model_fields
        if key != "experiment" and getattr(args, key, None) is not None
    }
    overrides["experiment"] = name
    if args.config is not None:
        return ExperimentConfig.from_file(_read(args.config), overrides)
    if "seed" not in overrides:
        raise UsageError(f"{name} needs --seed")
    return ExperimentConfig.model_validate(overrides)


# =============================================================================
# Commands
# =============================================================================


def cmd_enumerate(args: argparse.Namespace) -> int:
    slope = Slope.parse(args.slope, args.n, args.m)
    if args.workers > 1:
        result = enumerate_invariant_parallel(args.m, args.n, args.d, slope, workers=args.workers, budget=args.budget)
    else:
        result = enumerate_invariant(args.m, args.n, args.d, slope, budget=args.budget)
    _emit(f"count={result.count}\nent={result.ent:.12g}\n", args.output)
    return 0


def _parse_slopes(text: str, m: int) -> list[tuple[Fraction, ...]]:
    slopes = []
    for part in text.split(";"):
        values = [Fraction(v) for v in part.split(",") if v.strip()]
        if len(values) == 1 and values[0] == 0:
            values *= m
        if len(values) != m:
            raise UsageError(f"slope {part!r} needs {m} components")
        slopes.append(tuple(values))
    return slopes


def cmd_surface_tension(args: argparse.Namespace) -> int:
    try:
        slopes = _parse_slopes(args.slopes, args.m)
    except (ValueError, ZeroDivisionError):
        raise UsageError(f"bad slope list {args.slopes!r}")
    table = surface_tension_table(args.m, args.n, args.d, slopes, budget=args.budget)
    _emit(table.to_csv(), args.output)
    return 0


def cmd_sample(args: argparse.Namespace) -> int:
    state = sample_configuration(_experiment(args, "sample"))
    _emit(dump_config(state.cfg), args.output)
    return 0


def cmd_extend(args: argparse.Namespace) -> int:
    partial, d = load_partial(_read(args.input))
    h = kirszbraun_extend(partial)
    _emit(dump_height(h, d), args.output)
    return 0


def cmd_concentration(args: argparse.Namespace) -> int:
    cfg = _experiment(args, "concentration")
    _emit(concentration_csv(cfg, run_concentration(cfg)), cfg.output)
    return 0


def cmd_stationarity(args: argparse.Namespace) -> int:
    cfg = _experiment(args, "stationarity")
    _emit(_report(cfg, run_stationarity_test(cfg)), cfg.output)
    return 0


def cmd_coupling(args: argparse.Namespace) -> int:
    cfg = _experiment(args, "coupling")
    _emit(_report(cfg, run_coupling_experiment(cfg)), cfg.output)
    return 0


def cmd_minprob(args: argparse.Namespace) -> int:
    cfg = _experiment(args, "minprob-test")
    start = load_config(_read(args.input)) if args.input else None
    _emit(_report(cfg, run_min_probability_test(cfg, start)), cfg.output)
    return 0


def cmd_estimate_slope(args: argparse.Namespace) -> int:
    cfg = _experiment(args, "slope")
    start = load_config(_read(args.input)) if args.input else None
    _emit(_report(cfg, estimate_slope(cfg, start)), cfg.output)
    return 0


def cmd_limit_shape(args: argparse.Namespace) -> int:
    cfg = _experiment(args, "limit-shape")
    shape = sample_limit_shape(cfg)
    if args.heights is not None:
        args.heights.write_text(dump_height(shape.height, cfg.d))
    text = render_depth_field(shape.height, png=cfg.png)
    _emit(text, cfg.output)
    return 0


def _surface_tension_model(args: argparse.Namespace, m: int) -> SurfaceTensionModel:
    if args.ent is not None:
        return TabulatedSurfaceTension(SurfaceTensionTable.from_csv(_read(args.ent)))
    try:
        minimizer = tuple(float(v) for v in args.quadratic.split(","))
    except ValueError:
        raise UsageError(f"bad --quadratic minimizer {args.quadratic!r}")
    if len(minimizer) == 1:
        minimizer *= m
    if len(minimizer) != m:
        raise UsageError(f"--quadratic needs {m} components")
    return QuadraticSurfaceTension(minimizer=minimizer)


def cmd_solve_variational(args: argparse.Namespace) -> int:
    boundary = load_profile(_read(args.boundary))
    if not isinstance(boundary, BoundaryProfile):
        raise ValidationFailure("--boundary must list exactly the boundary points of a box")
    if args.eps is not None and abs(args.eps - boundary.grid.eps) > 1e-9:
        raise ValidationFailure(f"--eps {args.eps} differs from the file's eps={boundary.grid.eps:g}")
    solution = minimize_entropy(boundary, _surface_tension_model(args, boundary.grid.m))
    header = (
        f"# objective={solution.objective:.12g}\n"
        f"# iterations={solution.iterations}\n"
        f"# admissible={solution.admissible}\n"
    )
    _emit(header + dump_profile(solution.profile), args.output)
    return 0


def cmd_validate_profile(args: argparse.Namespace) -> int:
    profile: AsymptoticProfile | BoundaryProfile = load_profile(_read(args.input))
    profile.validate()
    kind = "boundary" if isinstance(profile, BoundaryProfile) else "profile"
    _emit(f"valid {kind} points={len(profile.h1)}\n", args.output)
    return 0


def cmd_render(args: argparse.Namespace) -> int:
    h, _ = load_height(_read(args.input))
    if not validate_homomorphism(h):
        raise ValidationFailure("input is not a homomorphism")
    _emit(render_depth_field(h, png=args.png), args.output)
    return 0


# =============================================================================
# Parser
# =============================================================================


def _sizes(p: argparse.ArgumentParser) -> None:
    p.add_argument("--m", type=int, default=2, help="lattice dimension")
    p.add_argument("--n", type=int, default=4, help="period")
    p.add_argument("--d", type=int, default=3, help="tree degree")


def _stochastic(p: argparse.ArgumentParser) -> None:
    p.add_argument("--seed", type=int, help="root seed (required unless given by --config)")
    p.add_argument("--m", type=int)
    p.add_argument("--n", type=int)
    p.add_argument("--d", type=int)
    p.add_argument("--slope")
    p.add_argument("--steps", type=int)
    p.add_argument("--trials", type=int)
    p.add_argument("--burn-in", dest="burn_in", type=int)
    p.add_argument("--dynamics", choices=["adapted", "glauber"])
    p.add_argument("--workers", type=int)
    p.add_argument("--output", type=Path)


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--config", type=Path, help="key=value file; flags override it")
    common.add_argument("--verbose", action="store_true", help="debug logging")

    parser = _Parser(prog="treehom", description="Homomorphisms from Z^m to the d-regular tree")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def command(name: str, handler: Callable[[argparse.Namespace], int], text: str) -> argparse.ArgumentParser:
        p = sub.add_parser(name, parents=[common], help=text, description=text)
        p.set_defaults(handler=handler)
        return p

    p = command("enumerate", cmd_enumerate, "count pinned n-invariant configurations of one slope")
    _sizes(p)
    p.add_argument("--slope", default="0")
    p.add_argument("--budget", type=int, default=settings.ENUMERATION_NODE_BUDGET)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--output", type=Path)

    p = command("surface-tension", cmd_surface_tension, "ent_n(s) table as CSV")
    p.add_argument("--m", type=int, default=2)
    p.add_argument("--n", type=int, nargs="+", default=[2])
    p.add_argument("--d", type=int, default=3)
    p.add_argument("--slopes", default="0", help="semicolon-separated slopes, e.g. '0;1/2,0'")
    p.add_argument("--budget", type=int, default=settings.ENUMERATION_NODE_BUDGET)
    p.add_argument("--output", type=Path)

    p = command("sample", cmd_sample, "sample a configuration (TREEHOM v1)")
    _stochastic(p)

    p = command("extend", cmd_extend, "Kirszbraun extension of PARTIAL v1 data")
    p.add_argument("--input", type=Path, required=True)
    p.add_argument("--output", type=Path)

    p = command("concentration", cmd_concentration, "max-deviation tails per period")
    _stochastic(p)
    p.add_argument("--n-values", dest="n_values")
    p.add_argument("--thresholds")

    p = command("stationarity", cmd_stationarity, "empirical vs uniform law on an enumerated class")
    _stochastic(p)

    p = command("coupling", cmd_coupling, "coupled chains and their depth deviation")
    _stochastic(p)
    p.add_argument("--initial", choices=["identical", "raised"])

    p = command("minprob-test", cmd_minprob, "true-minimum frequency after resampling")
    _stochastic(p)
    p.add_argument("--site")
    p.add_argument("--input", type=Path, help="TREEHOM v1 start configuration")

    p = command("estimate-slope", cmd_estimate_slope, "time-averaged slope along the chain")
    _stochastic(p)
    p.add_argument("--input", type=Path, help="TREEHOM v1 start configuration")

    p = command("limit-shape", cmd_limit_shape, "fixed-boundary sampling rendered as PGM")
    _stochastic(p)
    p.add_argument("--region", choices=["box", "diamond"])
    p.add_argument("--boundary", choices=["flat", "three-geodesic"])
    p.add_argument("--png", type=Path)
    p.add_argument("--heights", type=Path, help="also write the sample as HEIGHT v1")

    p = command("solve-variational", cmd_solve_variational, "minimize the macroscopic entropy")
    p.add_argument("--boundary", type=Path, required=True, help="PROFILE v1 boundary file")
    model = p.add_mutually_exclusive_group(required=True)
    model.add_argument("--ent", type=Path, help="surface tension CSV")
    model.add_argument("--quadratic", help="closed-form stand-in minimized at this slope")
    p.add_argument("--eps", type=float)
    p.add_argument("--output", type=Path)

    p = command("validate-profile", cmd_validate_profile, "check a PROFILE v1 file")
    p.add_argument("--input", type=Path, required=True)
    p.add_argument("--output", type=Path)

    p = command("render", cmd_render, "render a HEIGHT v1 file as PGM")
    p.add_argument("--input", type=Path, required=True)
    p.add_argument("--output", type=Path)
    p.add_argument("--png", type=Path)

    return parser


def main(argv: Sequence[str] | None = None) -> int:
    """Parse ``argv`` and run one command; returns the exit code."""
    args = build_parser().parse_args(argv)
    setup_logging("DEBUG" if args.verbose else settings.LOG_LEVEL)
    try:
        return int(args.handler(args))
    except UsageError as e:
        sys.stderr.write(f"treehom: error: {e}\n")
        return USAGE_ERROR
    except SchemaError as e:
        sys.stderr.write(f"treehom: error: {e}\n")
        return USAGE_ERROR
    except TreeHomError as e:
        sys.stderr.write(f"treehom: {type(e).__name__}: {e}\n")
        return e.exit_code
