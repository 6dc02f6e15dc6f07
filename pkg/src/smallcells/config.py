import os
from typing import Optional

# Fixed length of an index block. Sample i lives in block i // BLOCK_SIZE, so the stream is a
# pure function of (seed, i) no matter how blocks are spread over workers.
BLOCK_SIZE = 65536

DEFAULT_N = 10**8
DEFAULT_K = 150
DEFAULT_SEED = 42

SIGMA_BINS = 10
TAU_BINS = 10

DKW_ALPHA = 0.01

# relative gap below which two edge rates are treated as equal
EQUAL_RATE_RTOL = 1e-9

THREADS_ENV_VAR = "SMALLCELLS_THREADS"


def resolve_threads(explicit: Optional[int] = None) -> int:
    """
    Resolves the number of worker threads. An explicit value wins, then the
    ``SMALLCELLS_THREADS`` environment variable, then 1.

    Args:
        explicit (int, optional): Value passed on the command line. Defaults to None.

    Raises:
        ValueError: If the resolved value is not a positive integer.

    Returns:
        int: Number of workers.
    """
    if explicit is not None:
        threads = explicit
    else:
        raw = os.environ.get(THREADS_ENV_VAR, "").strip()
        if not raw:
            return 1
        try:
            threads = int(raw)
        except ValueError:
            raise ValueError(f"{THREADS_ENV_VAR} must be an integer, got {raw!r}.")

    if threads < 1:
        raise ValueError("Number of threads must be at least 1.")
    return threads
