from contextlib import contextmanager
from typing import Iterator, List
import time


def format_duration(seconds: float) -> str:
    """Human-readable elapsed time: '850ms', '12.3s', '4m 05s', '1h 02m'."""
    if seconds < 0:
        raise ValueError("Duration cannot be negative")
    if seconds < 1:
        return f"{seconds * 1000:.0f}ms"
    if seconds < 60:
        return f"{seconds:.1f}s"
    total = int(seconds)
    hours, rem = divmod(total, 3600)
    minutes, secs = divmod(rem, 60)
    if hours > 0:
        return f"{hours}h {minutes:02d}m"
    return f"{minutes}m {secs:02d}s"


@contextmanager
def stopwatch() -> Iterator[List[float]]:
    """Yields a one-element list that holds the elapsed seconds once the block exits."""
    elapsed = [0.0]
    start = time.perf_counter()
    try:
        yield elapsed
    finally:
        elapsed[0] = time.perf_counter() - start
