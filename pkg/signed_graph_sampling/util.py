"""Utilities for signed graph sampling"""

from __future__ import annotations

from contextlib import contextmanager
import logging
from pathlib import Path
import time
from typing import IO, Any, Iterator, MutableMapping

from signed_graph_sampling.const import FLOAT_FORMAT
from signed_graph_sampling.exceptions import InputError

_LOGGER = logging.getLogger(__name__)


def format_float(value: float) -> str:
    """Formats value with 17 significant digits for exact round-trip"""
    return FLOAT_FORMAT % value


def ensure_list(value: Any) -> list[Any]:
    """Wraps a single value in a list, None becomes an empty list"""
    if value is None:
        return []
    if isinstance(value, (list, tuple)):
        return list(value)
    return [value]


@contextmanager
def open_text(target: str | Path | IO[str], mode: str) -> Iterator[IO[str]]:
    """Opens a path for text I/O or passes an open stream through unchanged"""
    if hasattr(target, "read") or hasattr(target, "write"):
        yield target  # type: ignore[misc]
        return
    try:
        with open(target, mode, encoding="utf-8", newline="") as stream:  # type: ignore[arg-type]
            yield stream
    except OSError as ex:
        raise InputError(f"Cannot open {target}", str(ex)) from ex


@contextmanager
def stage_timer(timings: MutableMapping[str, float], stage: str) -> Iterator[None]:
    """Accumulates monotonic wall time of a pipeline stage into timings"""
    start = time.perf_counter()
    try:
        yield
    finally:
        elapsed = time.perf_counter() - start
        timings[stage] = timings.get(stage, 0.0) + elapsed
        _LOGGER.debug("Stage %s took %.6f s", stage, elapsed)
