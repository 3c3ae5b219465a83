"""Input validation helpers shared by the estimator and the CLI."""

from __future__ import annotations

from pathlib import Path
from typing import Iterable, Iterator

import numpy as np

from .exceptions import FrameFormatError, InsufficientFramesError, WindowError
from .frames import Frame, WindowSpec, frame_paths, iter_frame_dir


def check_frame(obj: object) -> Frame:
    """Assert that ``obj`` is a usable frame and return it."""
    if not isinstance(obj, Frame):
        raise FrameFormatError(f"expected a Frame, got {type(obj).__name__}")
    if obj.n_valid == 0:
        raise FrameFormatError("frame has no valid points")
    return obj


def check_window(window: object) -> WindowSpec | None:
    """Normalize a window argument: WindowSpec, 4-tuple, or None."""
    if window is None or isinstance(window, WindowSpec):
        return window
    if isinstance(window, (tuple, list)) and len(window) == 4:
        return WindowSpec(*[int(v) for v in window])
    raise WindowError(
        "window must be a WindowSpec or (row_start, row_end, col_start, col_end)"
    )


def check_phi_grid(grid: object) -> tuple[float, ...]:
    values = tuple(float(p) for p in np.atleast_1d(np.asarray(grid, dtype=float)))
    if not values:
        raise ValueError("phi grid must be non-empty")
    if any(p < 0.0 or p > 1.0 for p in values):
        raise ValueError("phi values must lie in [0, 1]")
    if list(values) != sorted(values):
        raise ValueError("phi grid must be ascending")
    return values


def as_frame_source(X: object, stride: int) -> Iterator[Frame]:
    """Resolve the estimator's X into a lazy frame iterator.

    Accepts a sequence directory path or an iterable of frames. Directories
    are checked to hold at least ``stride + 1`` frame files up front.
    """
    if isinstance(X, (str, Path)):
        directory = Path(X)
        if not directory.is_dir():
            raise FrameFormatError(f"{directory} is not a directory")
        n = len(frame_paths(directory))
        if n < stride + 1:
            raise InsufficientFramesError(
                f"insufficient frames: found {n}, need at least {stride + 1}"
            )
        return iter_frame_dir(directory)
    if isinstance(X, Iterable):
        return (check_frame(f) for f in X)
    raise FrameFormatError(
        "X must be a frame directory path or an iterable of Frame objects"
    )
