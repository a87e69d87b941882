from __future__ import annotations

import time
from contextlib import contextmanager
from typing import Iterator, Optional


def note(tag: str, msg: str, enabled: bool = True) -> None:
    """Print a bracket-tagged console line such as ``[run] wrote out/x.csv``."""
    if enabled:
        print(f"[{tag}] {msg}", flush=True)


@contextmanager
def step(msg: str, enabled: bool = True, tag: Optional[str] = None) -> Iterator[None]:
    """Announce a unit of work and report its wall time when it finishes.

    The timing line is printed even when the body raises, so a failing stage
    still shows how far it got.
    """
    t0 = time.perf_counter()
    if enabled:
        print(f"[{tag}] {msg}" if tag else msg, flush=True)
    try:
        yield
    finally:
        if enabled:
            dt = (time.perf_counter() - t0) * 1000.0
            print(f"  done in {dt:.1f} ms", flush=True)
