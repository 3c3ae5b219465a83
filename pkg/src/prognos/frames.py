"""XYZM frame parsing, windowing, and stride iteration.

A frame is a ``height x width`` grid of observation points, each carrying
``n_channels`` real value channels (by convention x, y, z, grayscale) plus a
validity mask. The on-disk format is ASCII:

    XYZM <width> <height>
    <x> <y> <z> <m>          # width*height lines, row-major
    ...

A line reading ``nan nan nan -1`` marks an invalid point; invalid points are
excluded from every pairwise computation downstream. Frame sequences live in
directories of files named ``frame_<index>.xyzm`` with zero-padded 6-digit
indices.
"""

from __future__ import annotations

import logging
import math
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Iterator

import numpy as np

from .exceptions import (
    FrameFormatError,
    FrameParseError,
    SequenceOrderError,
    TruncationError,
    WindowError,
)

log = logging.getLogger(__name__)

#: channel index of the grayscale value in a standard XYZM frame
GRAY_CHANNEL = 3
#: canonical serialization of an invalid point
INVALID_LINE = "nan nan nan -1"

_HEADER_RE = re.compile(r"^XYZM\s+(\d+)\s+(\d+)\s*$")
_FILENAME_RE = re.compile(r"^frame_(\d{6})\.xyzm$")


@dataclass(frozen=True)
class Frame:
    """One time slice of the observed point grid.

    Parameters
    ----------
    time_index : int
        Ordinal of the frame within its sequence (non-negative).
    values : ndarray, shape (height, width, n_channels)
        Channel values; entries at masked-off points are not meaningful.
    mask : ndarray of bool, shape (height, width)
        True where the point is valid.
    """

    time_index: int
    values: np.ndarray
    mask: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        mask = np.asarray(self.mask, dtype=bool)
        if self.time_index < 0:
            raise FrameFormatError("time_index must be non-negative")
        if values.ndim != 3:
            raise FrameFormatError("values must have shape (height, width, channels)")
        if values.shape[2] < 2:
            raise FrameFormatError("frames need at least two value channels")
        if mask.shape != values.shape[:2]:
            raise FrameFormatError("mask shape does not match the grid")
        if values.shape[0] < 1 or values.shape[1] < 1:
            raise FrameFormatError("frame grid must be non-empty")
        if not np.all(np.isfinite(values[mask])):
            raise FrameFormatError("valid points must carry finite channel values")
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "mask", mask)

    @property
    def height(self) -> int:
        return self.values.shape[0]

    @property
    def width(self) -> int:
        return self.values.shape[1]

    @property
    def n_channels(self) -> int:
        return self.values.shape[2]

    @property
    def n_points(self) -> int:
        return self.height * self.width

    @property
    def n_valid(self) -> int:
        return int(self.mask.sum())

    def flat_values(self, channel: int) -> np.ndarray:
        """Channel values flattened row-major to shape (n_points,)."""
        return self.values[:, :, channel].reshape(-1)

    def flat_mask(self) -> np.ndarray:
        return self.mask.reshape(-1)


@dataclass(frozen=True)
class WindowSpec:
    """Inclusive row/column bounds of an observation window."""

    row_start: int
    row_end: int
    col_start: int
    col_end: int

    def __post_init__(self):
        if self.row_start < 0 or self.col_start < 0:
            raise WindowError("window bounds must be non-negative")
        if self.row_end < self.row_start or self.col_end < self.col_start:
            raise WindowError("window is empty")

    @property
    def n_rows(self) -> int:
        return self.row_end - self.row_start + 1

    @property
    def n_cols(self) -> int:
        return self.col_end - self.col_start + 1

    @classmethod
    def full(cls, frame: Frame) -> "WindowSpec":
        return cls(0, frame.height - 1, 0, frame.width - 1)


@dataclass(frozen=True)
class SequenceConfig:
    """Stride, dimension count, and window for a sequence analysis."""

    stride: int = 1
    n_dims: int = 4
    window: WindowSpec | None = None

    def __post_init__(self):
        if self.stride < 1:
            raise FrameFormatError("stride must be >= 1")
        if self.n_dims < 2:
            raise FrameFormatError("need at least two value channels")


def parse_xyzm(data: bytes | str, time_index: int = 0) -> Frame:
    """Parse an XYZM byte stream into a :class:`Frame` with four channels.

    Raises
    ------
    FrameFormatError
        If the header is malformed.
    TruncationError
        If the number of data lines does not match the header.
    FrameParseError
        If a data line holds the wrong number of tokens or a non-numeric
        token; the exception carries the 1-based line number.
    """
    if isinstance(data, bytes):
        text = data.decode("ascii")
    else:
        text = data
    lines = text.splitlines()
    # tolerate trailing blank lines but nothing else
    while lines and not lines[-1].strip():
        lines.pop()
    if not lines:
        raise FrameFormatError("empty stream")
    header = _HEADER_RE.match(lines[0])
    if header is None:
        raise FrameFormatError(f"malformed header: {lines[0]!r}")
    width, height = int(header.group(1)), int(header.group(2))
    if width < 1 or height < 1:
        raise FrameFormatError("header declares an empty grid")
    expected = width * height
    if len(lines) - 1 != expected:
        raise TruncationError(
            f"expected {expected} data lines, found {len(lines) - 1}"
        )

    values = np.empty((expected, 4), dtype=float)
    for i, line in enumerate(lines[1:]):
        tokens = line.split()
        if len(tokens) != 4:
            raise FrameParseError(
                f"expected 4 tokens, found {len(tokens)}", line_number=i + 2
            )
        try:
            values[i] = [float(tok) for tok in tokens]
        except ValueError as exc:
            raise FrameParseError(str(exc), line_number=i + 2) from None

    grid = values.reshape(height, width, 4)
    mask = np.all(np.isfinite(grid), axis=2) & (grid[:, :, GRAY_CHANNEL] >= 0)
    # canonicalize invalid points so serialization round-trips
    grid[~mask] = [math.nan, math.nan, math.nan, -1.0]
    return Frame(time_index=time_index, values=grid, mask=mask)


def serialize_xyzm(frame: Frame) -> str:
    """Render a frame back to XYZM text at full round-trip precision."""
    out = [f"XYZM {frame.width} {frame.height}"]
    flat = frame.values.reshape(-1, frame.n_channels)
    mask = frame.flat_mask()
    for i in range(flat.shape[0]):
        if mask[i]:
            out.append(" ".join(repr(float(v)) for v in flat[i]))
        else:
            out.append(INVALID_LINE)
    return "\n".join(out) + "\n"


def frame_filename(index: int) -> str:
    return f"frame_{index:06d}.xyzm"


def read_frame(path: str | Path, time_index: int | None = None) -> Frame:
    """Read one frame file; the time index defaults to the one in the name."""
    path = Path(path)
    if time_index is None:
        m = _FILENAME_RE.match(path.name)
        time_index = int(m.group(1)) if m else 0
    return parse_xyzm(path.read_bytes(), time_index=time_index)


def write_frame(frame: Frame, path: str | Path) -> None:
    Path(path).write_text(serialize_xyzm(frame), encoding="ascii")


def frame_paths(directory: str | Path) -> list[Path]:
    """Frame files of a sequence directory, sorted by their encoded index."""
    directory = Path(directory)
    found = []
    for p in directory.iterdir():
        m = _FILENAME_RE.match(p.name)
        if m:
            found.append((int(m.group(1)), p))
    found.sort(key=lambda item: item[0])
    return [p for _, p in found]


def iter_frame_dir(directory: str | Path) -> Iterator[Frame]:
    """Lazily parse the frames of a sequence directory in time order."""
    for path in frame_paths(directory):
        yield read_frame(path)


def extract_window(frame: Frame, window: WindowSpec) -> Frame:
    """Copy a sub-grid out of a frame, preserving adjacency and the mask."""
    if window.row_end >= frame.height or window.col_end >= frame.width:
        raise WindowError(
            f"window rows {window.row_start}..{window.row_end} cols "
            f"{window.col_start}..{window.col_end} outside a "
            f"{frame.height}x{frame.width} frame"
        )
    rows = slice(window.row_start, window.row_end + 1)
    cols = slice(window.col_start, window.col_end + 1)
    return Frame(
        time_index=frame.time_index,
        values=frame.values[rows, cols].copy(),
        mask=frame.mask[rows, cols].copy(),
    )


def stride_pairs(frames: Iterable[Frame], stride: int) -> Iterator[tuple[Frame, Frame]]:
    """Yield analyzed pairs ``(frame[k*n], frame[(k+1)*n])`` for k = 0, 1, ...

    The input is consumed lazily and at most two frames are materialized at
    any instant; intermediate frames skipped by the stride are dropped as
    soon as they are read. A sequence shorter than ``stride + 1`` yields
    nothing and logs a warning.
    """
    if stride < 1:
        raise ValueError("stride must be >= 1")
    it = iter(frames)
    prev = next(it, None)
    if prev is None:
        log.warning("empty frame sequence; no pairs to analyze")
        return
    yielded = False
    while True:
        cur = None
        for _ in range(stride):
            # release the skipped frame before pulling the next one so no
            # more than two frames are ever alive
            cur = None
            cur = next(it, None)
            if cur is None:
                if not yielded:
                    log.warning(
                        "sequence shorter than stride+1 (%d); no pairs", stride + 1
                    )
                return
        if cur.time_index <= prev.time_index:
            raise SequenceOrderError(
                f"frames out of order: {prev.time_index} then {cur.time_index}"
            )
        yield prev, cur
        yielded = True
        prev = cur
