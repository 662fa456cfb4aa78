"""Command-line entry point for the PT-SUSY toolkit."""

import argparse
import logging
import shlex
import sys
from pathlib import Path
from typing import Dict, List, Optional, Sequence

from pydantic import ValidationError

from app import __version__
from app.config import get_settings
from app.errors import ConfigError, PTSusyError
from app.export.writer import (
    NONLINEAR_HEADER,
    SPECTRUM_HEADER,
    render_csv,
    render_key_values,
    scalar_fields,
    write_outputs,
)
from app.models.reports import NonlinearTable, SpectrumTable
from app.models.run_config import RunConfig
from app.services.runner import ExperimentRunner

logger = logging.getLogger(__name__)

COMMANDS = ["solve", "oracle", "ep", "partner", "scan", "nonlinear", "calibrate"]

# Config-file keys and the RunConfig field each one sets.
CONFIG_KEYS = {
    "a": "a",
    "gamma": "gamma",
    "gamma-from": "gamma_from",
    "gamma-to": "gamma_to",
    "gamma-step": "gamma_step",
    "g": "g",
    "state": "state",
    "xi-re": "xi_re",
    "xi-im": "xi_im",
    "target": "target",
    "step": "step",
    "tol": "tol",
    "out": "out",
    "format": "format",
    "emit-plot": "emit_plot",
    "jobs": "jobs",
    "log-level": "log_level",
}

TRUE_WORDS = {"1", "true", "yes", "on"}
FALSE_WORDS = {"0", "false", "no", "off"}


def load_config_file(path: Path) -> Dict[str, object]:
    """Parse `key=value` lines; `#` starts a comment."""
    values: Dict[str, object] = {}
    text = Path(path).read_text(encoding="utf-8")
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"expected key=value, got {raw.strip()!r}", number)
        key, value = (part.strip() for part in line.split("=", 1))
        key = key.replace("_", "-")
        if key not in CONFIG_KEYS:
            raise ConfigError(f"unknown key {key!r}", number)
        if not value:
            raise ConfigError(f"missing value for {key!r}", number)
        field = CONFIG_KEYS[key]
        if field == "g":
            try:
                values[field] = [float(item) for item in value.split(",")]
            except ValueError as exc:
                raise ConfigError(f"invalid g list {value!r}", number) from exc
        elif field == "emit_plot":
            if value.lower() not in TRUE_WORDS | FALSE_WORDS:
                raise ConfigError(f"invalid boolean {value!r}", number)
            values[field] = value.lower() in TRUE_WORDS
        else:
            values[field] = value
    return values


def build_parser() -> argparse.ArgumentParser:
    """Subcommand parser; every option defaults to None so layers can be merged."""
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="key=value file read before the flags")
    common.add_argument("--a", type=float, help="delta separation")
    common.add_argument("--gamma", type=float, help="gain/loss parameter")
    common.add_argument("--gamma-from", dest="gamma_from", type=float)
    common.add_argument("--gamma-to", dest="gamma_to", type=float)
    common.add_argument("--gamma-step", dest="gamma_step", type=float)
    common.add_argument("--g", type=float, nargs="+", help="nonlinearity value(s)")
    common.add_argument("--state", type=int, choices=[0, 1], help="state index (removed state for partner/scan)")
    common.add_argument("--xi-re", dest="xi_re", type=float, help="Re of the left integration constant")
    common.add_argument("--xi-im", dest="xi_im", type=float, help="Im of the left integration constant")
    common.add_argument("--target", type=float, help="|E0| for calibrate")
    common.add_argument("--step", type=float, help="grid step h")
    common.add_argument("--tol", type=float, help="Newton tolerance")
    common.add_argument("--out", type=Path, help="output file")
    common.add_argument("--format", choices=["csv", "json"])
    common.add_argument("--emit-plot", dest="emit_plot", action="store_const", const=True)
    common.add_argument("--jobs", type=int, help="parallel partner solves in scan")
    common.add_argument("--log-level", dest="log_level", choices=["DEBUG", "INFO", "WARNING", "ERROR"])

    parser = argparse.ArgumentParser(
        prog="ptsusy",
        description="Shooting solver and SUSY partner construction for the PT-symmetric double-delta trap",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    subparsers = parser.add_subparsers(dest="command", required=True)
    helps = {
        "solve": "solve one original bound state",
        "oracle": "closed-form eigenvalues",
        "ep": "exceptional point study",
        "partner": "remove a state and solve the partner system",
        "scan": "gamma sweep of both sectors",
        "nonlinear": "partner energies against E_id for g > 0",
        "calibrate": "separation for a target |E0| at gamma=0",
    }
    for name in COMMANDS:
        subparsers.add_parser(name, parents=[common], help=helps[name])
    return parser


def parse_args(argv: Optional[Sequence[str]] = None) -> RunConfig:
    """Settings defaults < --config file < flags."""
    args = vars(build_parser().parse_args(argv))
    settings = get_settings()
    merged: Dict[str, object] = {
        "a": settings.separation,
        "gamma_step": settings.gamma_step,
        "step": settings.step,
        "tol": settings.tolerance,
        "jobs": settings.jobs,
        "log_level": settings.log_level,
    }
    config_path = args.pop("config")
    file_values = load_config_file(config_path) if config_path is not None else {}
    merged.update(file_values)
    merged.update({key: value for key, value in args.items() if value is not None})
    explicit_step = "step" in file_values or args["step"] is not None
    if merged["command"] == "nonlinear" and not explicit_step:
        merged["step"] = settings.nonlinear_step
    return RunConfig(**merged)


def execute(config: RunConfig):
    """Run the command a RunConfig names and return its result."""
    runner = ExperimentRunner(config.a, config.step, config.tol)
    command = config.command
    if command == "solve":
        return runner.states(config.gamma, config.g[0])[config.state]
    if command == "oracle":
        return runner.oracle(config.gamma)
    if command == "ep":
        return runner.exceptional_point()
    if command == "partner":
        return runner.remove(config.gamma, config.state, config.xi_left, config.g[0])
    if command == "scan":
        return runner.sweep(config.gamma_grid, config.state, config.jobs)
    if command == "nonlinear":
        return runner.nonlinear(config.g, config.gamma_grid)
    if command == "calibrate":
        return runner.calibrate(config.target)
    raise ValueError(f"unknown command {command!r}")


def report(result, config: RunConfig) -> None:
    """Print a result summary to stdout."""
    if isinstance(result, SpectrumTable):
        if config.out is None:
            rows = [
                [r.gamma, r.E0_1.real, r.E0_1.imag, r.E1_1.real, r.E1_1.imag, r.E0_2.real, r.E0_2.imag]
                for r in result.rows
            ]
            print(render_csv(SPECTRUM_HEADER, rows), end="")
        elif result.gamma_crit is not None:
            print(f"{len(result.rows)} rows, gamma_crit={result.gamma_crit:.10f}")
        return
    if isinstance(result, NonlinearTable):
        if config.out is None:
            rows = [
                [r.g, r.gamma, r.E0_2.real, r.E0_2.imag, r.E_id.real, r.E_id.imag, r.deviation]
                for r in result.rows
            ]
            print(render_csv(NONLINEAR_HEADER, rows), end="")
        failed = [row for row in result.rows if row.error]
        if failed:
            print(f"{len(failed)} point(s) failed", file=sys.stderr)
        return
    print(render_key_values(scalar_fields(result)), end="")


def main(argv: Optional[Sequence[str]] = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        config = parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    except (ConfigError, ValidationError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: cannot read config: {exc}", file=sys.stderr)
        return 2

    logging.basicConfig(level=config.log_level, format="%(levelname)s %(name)s: %(message)s")
    command_line = shlex.join(["ptsusy"] + argv)
    try:
        result = execute(config)
        report(result, config)
        written: List[Path] = write_outputs(result, config, command_line)
    except PTSusyError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 4
    for path in written:
        print(f"Wrote {path}")
    return 0


def run():
    """Entry point for the command-line tool."""
    sys.exit(main())


if __name__ == "__main__":
    run()
