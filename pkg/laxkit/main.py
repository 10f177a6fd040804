import argparse
import json
import logging
import sys
from pathlib import Path
from typing import List, Optional

from .api.commands import COMMANDS, run_command
from .api.report import dumps
from .core.config import parse_window, settings
from .core.errors import ConfigError, LaxkitError
from .core.log import configure_logging
from .models import load_run_config

logger = logging.getLogger(__name__)


def _join_window(argv: List[str]) -> List[str]:
    # argparse reads "--window -1:1" as a missing value followed by an option
    joined: List[str] = []
    it = iter(argv)
    for arg in it:
        if arg == "--window":
            value = next(it, None)
            joined.append(arg if value is None else f"--window={value}")
        else:
            joined.append(arg)
    return joined


def _parse_args(argv: Optional[List[str]] = None) -> argparse.Namespace:
    parser = argparse.ArgumentParser(
        prog="laxkit",
        description="Exact computations in multipoint Lax operator algebras on the Riemann sphere.",
    )
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("--config", dest="config_path", type=Path, required=True, help="run configuration (JSON)")
    parser.add_argument("--window", help="degree window LO:HI (overrides the configuration)")
    parser.add_argument("--jobs", type=int, help="worker threads for table and basis construction")
    parser.add_argument("--seed", type=int, help="seed for every sampled check")
    parser.add_argument("--out", dest="out_dir", type=Path, help="directory for report.json and artifacts")
    parser.add_argument("--format", choices=("json",), default="json")
    parser.add_argument("--log-level", help="logging level for stderr (default from LAXKIT_LOG_LEVEL)")
    return parser.parse_args(_join_window(sys.argv[1:] if argv is None else list(argv)))


def _fail(exc: LaxkitError) -> int:
    sys.stderr.write(json.dumps(exc.to_dict(), sort_keys=True) + "\n")
    return exc.exit_code


def main(argv: Optional[List[str]] = None) -> int:
    args = _parse_args(argv)
    configure_logging(args.log_level)
    try:
        if args.jobs is not None and args.jobs < 1:
            raise ConfigError("must be at least 1", field_path=("--jobs",))
        window = None
        if args.window is not None:
            try:
                window = parse_window(args.window)
            except ValueError as exc:
                raise ConfigError(str(exc), field_path=("--window",)) from exc
        run = load_run_config(args.config_path)
        report, artifacts = run_command(args.command, run, window=window, seed=args.seed, jobs=args.jobs)
    except LaxkitError as exc:
        logger.error("%s", exc.detail)
        return _fail(exc)

    out_dir = args.out_dir or Path(run.output_dir or settings.OUTPUT_DIR)
    path = report.write(out_dir, artifacts)
    logger.info("report written to %s", path)
    sys.stdout.write(dumps(report.to_json()))
    return 0 if report.passed else 1


if __name__ == "__main__":
    sys.exit(main())
