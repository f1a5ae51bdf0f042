"""Deterministic worker-pool helper.

Worker count comes from the CCDL_THREADS environment variable: unset or 1
runs serially, 0 means one worker per CPU, any other value is used as-is.
Results are always returned in input order, so estimates reduced from them
are identical for every worker count.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor


def worker_count() -> int:
    raw = os.environ.get("CCDL_THREADS", "1")
    try:
        n = int(raw)
    except ValueError:
        raise ValueError(f"CCDL_THREADS={raw!r} is not an integer")
    if n < 0:
        raise ValueError(f"CCDL_THREADS={n} must be >= 0")
    if n == 0:
        return os.cpu_count() or 1
    return n


def map_ordered(fn, items) -> list:
    """Apply fn to each item, in parallel when configured, preserving order."""
    items = list(items)
    n = worker_count()
    if n <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=n) as pool:
        return list(pool.map(fn, items))
