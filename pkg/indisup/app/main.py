"""
Command-line entry point.

    python -m indisup.app.main generate --wells 39 --samples 2000 --seed 7 --out field.csv
    python -m indisup.app.main train --data field.csv --out runs/baseline
    python -m indisup.app.main symmetry --data field.csv --out runs/fig3 --jobs 8
    python -m indisup.app.main sweep --data field.csv --out runs/sweep --seq-len-grid 1,20,50
    python -m indisup.app.main evaluate --data field.csv --checkpoint runs/baseline/model.npz --out runs/eval

Logs go to stderr; stdout carries one summary line per command.
"""

import argparse
import sys
try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

import structlog
from pydantic import ValidationError

from indisup.app.cli.commands import (
    COMMAND_REGISTRY,
    EXIT_USAGE,
    add_common_arguments,
    execute_command,
    settings_from_args,
)
from indisup.app.core.observability import configure_logging

log = structlog.get_logger()


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="indisup",
        description="Indirect physics-constrained supervision of UCS from well logs",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for spec in COMMAND_REGISTRY.values():
        p = sub.add_parser(spec.name, help=spec.help)
        add_common_arguments(p)
        spec.configure(p)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        settings = settings_from_args(args)
    except (ValidationError, OSError, ValueError, tomllib.TOMLDecodeError) as exc:
        configure_logging()
        log.error("invalid_configuration", error=str(exc))
        return EXIT_USAGE

    configure_logging(settings)
    log.info("command_started", command=args.command, env=settings.env)
    return execute_command(args.command, args, settings)


if __name__ == "__main__":
    sys.exit(main())
