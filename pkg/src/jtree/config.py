"""Runtime switches."""

from __future__ import annotations

import os
from contextlib import contextmanager

# When true, every public transformation re-verifies the family and path
# properties after mutating the graph.  Slow; meant for tests and debugging.
DEBUG_CHECKS = os.environ.get("JTREE_DEBUG_CHECKS") == "1"


def checks_enabled() -> bool:
    return DEBUG_CHECKS


@contextmanager
def debug_checks(enabled: bool = True):
    global DEBUG_CHECKS
    prev = DEBUG_CHECKS
    DEBUG_CHECKS = enabled
    try:
        yield
    finally:
        DEBUG_CHECKS = prev
