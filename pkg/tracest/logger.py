import logging
import sys

logger = logging.getLogger("tracest")
logger.setLevel(logging.WARNING)

if not logger.handlers:
    _handler = logging.StreamHandler(sys.stderr)
    _handler.setFormatter(logging.Formatter("[tracest %(levelname)s] %(message)s"))
    logger.addHandler(_handler)
    logger.propagate = False


def set_verbosity(verbose: bool = False, debug: bool = False) -> None:
    if debug:
        logger.setLevel(logging.DEBUG)
    elif verbose:
        logger.setLevel(logging.INFO)
    else:
        logger.setLevel(logging.WARNING)
