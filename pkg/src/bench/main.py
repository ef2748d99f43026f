import argparse
import logging
import sys

from src.config.settings import LOG_FILE, LOG_LEVEL
from src.bench.handlers.commands import EXIT_USAGE, EXIT_VERIFY_FAILED, register_commands
from src.errors import FFTConvError, VerificationError

logger = logging.getLogger(__name__)


def setup_logging() -> None:
    handlers = [logging.StreamHandler()]
    if LOG_FILE:
        handlers.append(logging.FileHandler(LOG_FILE))
    logging.basicConfig(
        level=LOG_LEVEL,
        format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
        handlers=handlers
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fftconv", description="FFT convolution benchmark harness")
    subparsers = parser.add_subparsers(dest="command", required=True)
    register_commands(subparsers)
    return parser


def main(argv=None) -> int:
    """Parse argv, run one subcommand and map the outcome to an exit code."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        # argparse exits 2 on usage errors and 0 on --help
        return int(e.code or 0)
    try:
        return args.handler(args)
    except VerificationError as e:
        logger.error(f"Verification failed: {e}")
        return EXIT_VERIFY_FAILED
    except FFTConvError as e:
        logger.error(f"{args.command} failed: {e}")
        return EXIT_USAGE
    except OSError as e:
        logger.error(f"{args.command} failed on I/O: {e}")
        return EXIT_USAGE


if __name__ == '__main__':
    setup_logging()
    sys.exit(main())
