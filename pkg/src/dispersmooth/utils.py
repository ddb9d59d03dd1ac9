"""Small shared helpers."""

from __future__ import annotations

import os


def worker_count() -> int:
    """Worker cap for embarrassingly parallel ensembles.

    Controlled by the DISPERSMOOTH_THREADS environment variable; defaults to
    a modest pool.  Results never depend on the worker count (jobs are pure
    and merged in submission order).
    """
    raw = os.environ.get("DISPERSMOOTH_THREADS", "")
    try:
        value = int(raw)
    except ValueError:
        value = 0
    if value >= 1:
        return value
    return min(4, os.cpu_count() or 1)
