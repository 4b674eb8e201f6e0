"""Process-wide numerical settings."""

import os

#: Seed for every randomized kernel (power-iteration restarts and the like).
SEED = 20160512

#: Magnitude above which evaluated entries are reported as overflowed.
VALUE_CAP = 1e300


def set_seed(seed):
    global SEED
    SEED = int(seed)


def get_seed():
    return SEED


def scan_threads():
    """Worker cap for windowed scans, from ``COSLAW_THREADS`` (default 1)."""
    raw = os.environ.get("COSLAW_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1
