import argparse
import logging
import sys
from pathlib import Path
from typing import Sequence

from app.commands import COMMANDS, RunContext
from app.commands.loader import load_config
from app.observability.logging import attach_run_log, detach_run_log, setup_logging
from app.observability.metrics import write_metrics
from app.settings import get_settings

logger = logging.getLogger("app.main")

EXIT_OK = 0
EXIT_CONFIG_ERROR = 2
EXIT_IO_ERROR = 3


# Factory function to create the command-line parser
def create_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ghostlab",
        description="Numerical experiments on nonuniformly elliptic variational problems",
    )
    subparsers = parser.add_subparsers(dest="command", required=True)
    for name, command in COMMANDS.items():
        sub = subparsers.add_parser(name, help=command.help)
        sub.add_argument("--config", type=Path, required=True, help="YAML experiment config")
        sub.add_argument("--out", type=Path, default=None, help="output directory (default: GHOSTLAB_OUT_DIR)")
        sub.add_argument("--seed", type=int, default=None, help="seed for random parameter draws")
        sub.add_argument("--threads", type=int, default=None, help="sweep points solved concurrently")
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    """Run one command; returns 0 on success, 2 on a config error and 3 on an I/O error."""
    args = create_parser().parse_args(argv)
    settings = get_settings()
    setup_logging(settings.log_level)

    ctx = RunContext(
        out_dir=args.out if args.out is not None else settings.out_dir,
        seed=args.seed if args.seed is not None else settings.seed,
        threads=max(1, args.threads if args.threads is not None else settings.threads),
    )
    try:
        ctx.out_dir.mkdir(parents=True, exist_ok=True)
        run_log = attach_run_log(ctx.out_dir / "run.log")
    except OSError as exc:
        logger.error("cannot prepare output directory %s: %s", ctx.out_dir, exc)
        return EXIT_IO_ERROR

    command = COMMANDS[args.command]
    logger.info("%s: config=%s out=%s seed=%d threads=%d",
                args.command, args.config, ctx.out_dir, ctx.seed, ctx.threads)
    try:
        config = load_config(args.config, command.config_model)
        written = command.run(config, ctx)
    # Config and domain errors are ValueErrors (pydantic ValidationError included)
    except ValueError as exc:
        logger.error("%s: %s", args.command, exc)
        return EXIT_CONFIG_ERROR
    except OSError as exc:
        logger.error("%s: %s", args.command, exc)
        return EXIT_IO_ERROR
    else:
        for path in written:
            logger.info("wrote %s", path)
        return EXIT_OK
    finally:
        try:
            write_metrics(ctx.out_dir / "metrics.prom")
        except OSError as exc:
            logger.warning("could not write metrics: %s", exc)
        detach_run_log(run_log)


if __name__ == "__main__":
    sys.exit(main())
