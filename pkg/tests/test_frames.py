"""Frame parsing, windowing, and stride iteration."""

import gc
import weakref

import numpy as np
import pytest

from prognos.exceptions import (
    FrameFormatError,
    FrameParseError,
    SequenceOrderError,
    TruncationError,
    WindowError,
)
from prognos.frames import (
    Frame,
    WindowSpec,
    extract_window,
    parse_xyzm,
    serialize_xyzm,
    stride_pairs,
)
from prognos.rank import borda_count


def make_frame(values, time_index=0, mask=None):
    values = np.asarray(values, dtype=float)
    if mask is None:
        mask = np.ones(values.shape[:2], dtype=bool)
    return Frame(time_index=time_index, values=values, mask=mask)


class TestParse:
    def test_two_point_frame(self):
        frame = parse_xyzm(b"XYZM 2 1\n0 0 0 255\n1 0 0 254\n")
        assert (frame.width, frame.height) == (2, 1)
        assert frame.values[0, 0, 3] == 255.0
        assert frame.values[0, 1, 3] == 254.0
        assert frame.mask.all()

    def test_full_resolution_frame(self):
        width, height = 532, 500
        rng = np.random.default_rng(0)
        vals = rng.uniform(1.0, 255.0, size=(width * height, 4))
        body = "\n".join(" ".join(repr(float(v)) for v in row) for row in vals)
        frame = parse_xyzm(f"XYZM {width} {height}\n{body}\n")
        assert frame.n_points == 266000
        assert frame.n_valid == 266000

    def test_invalid_point_masked(self):
        frame = parse_xyzm(b"XYZM 2 1\n0 0 0 255\nnan nan nan -1\n")
        assert frame.mask[0, 0]
        assert not frame.mask[0, 1]
        # invalid point is excluded from pairwise tallies downstream
        with pytest.raises(Exception):
            borda_count(frame.flat_values(3), frame.flat_mask())

    def test_malformed_header(self):
        with pytest.raises(FrameFormatError):
            parse_xyzm(b"XYZW 2 1\n0 0 0 1\n1 1 1 1\n")

    def test_wrong_line_count(self):
        with pytest.raises(TruncationError):
            parse_xyzm(b"XYZM 2 2\n0 0 0 1\n1 1 1 1\n")

    def test_non_numeric_token_carries_line_number(self):
        with pytest.raises(FrameParseError) as err:
            parse_xyzm(b"XYZM 2 1\n0 0 0 1\n1 bad 0 1\n")
        assert err.value.line_number == 3

    def test_wrong_token_count(self):
        with pytest.raises(FrameParseError):
            parse_xyzm(b"XYZM 1 1\n0 0 0\n")


class TestRoundTrip:
    def test_serialize_parse_round_trip(self):
        rng = np.random.default_rng(7)
        values = rng.uniform(-10, 255, size=(3, 4, 4))
        mask = np.ones((3, 4), dtype=bool)
        mask[1, 2] = False
        values[1, 2] = [np.nan, np.nan, np.nan, -1]
        values[:, :, 3] = np.abs(values[:, :, 3])
        values[~mask] = [np.nan, np.nan, np.nan, -1]
        frame = Frame(time_index=5, values=values, mask=mask)
        text = serialize_xyzm(frame)
        back = parse_xyzm(text, time_index=5)
        assert np.array_equal(back.mask, frame.mask)
        assert np.array_equal(
            back.values[back.mask], frame.values[frame.mask]
        )

    def test_serialized_text_is_stable(self):
        frame = parse_xyzm(b"XYZM 2 1\n0.1 0.2 0.30000000000000004 255\n1 0 0 254\n")
        text = serialize_xyzm(frame)
        assert serialize_xyzm(parse_xyzm(text)) == text


class TestWindow:
    def test_interior_window(self):
        rng = np.random.default_rng(1)
        frame = make_frame(rng.uniform(1, 2, size=(500, 532, 4)))
        win = extract_window(frame, WindowSpec(353, 362, 343, 352))
        assert (win.height, win.width) == (10, 10)
        assert win.n_points == 100
        assert np.array_equal(win.values, frame.values[353:363, 343:353])

    def test_full_frame_window_is_identity(self):
        rng = np.random.default_rng(2)
        frame = make_frame(rng.uniform(1, 2, size=(4, 4, 4)))
        win = extract_window(frame, WindowSpec.full(frame))
        assert np.array_equal(win.values, frame.values)

    def test_out_of_bounds_window(self):
        frame = make_frame(np.ones((4, 4, 4)))
        with pytest.raises(WindowError):
            extract_window(frame, WindowSpec(0, 4, 0, 3))

    def test_empty_window_rejected(self):
        with pytest.raises(WindowError):
            WindowSpec(2, 1, 0, 3)

    def test_single_point_window_degenerates_downstream(self):
        frame = make_frame(np.ones((4, 4, 4)))
        win = extract_window(frame, WindowSpec(1, 1, 2, 2))
        assert win.n_points == 1
        with pytest.raises(Exception):
            borda_count(win.flat_values(0), win.flat_mask())

    def test_window_commutes_with_analysis(self):
        # Borda counts on the extracted window equal counts computed from
        # the full frame restricted to the window's points.
        rng = np.random.default_rng(3)
        frame = make_frame(rng.uniform(1, 2, size=(4, 4, 4)))
        spec = WindowSpec(1, 2, 0, 3)
        win = extract_window(frame, spec)
        direct = borda_count(win.flat_values(0), win.flat_mask())
        restricted = frame.values[1:3, 0:4, 0].reshape(-1)
        assert np.array_equal(direct, borda_count(restricted))


def test_sequence_config_validation():
    from prognos.frames import SequenceConfig

    assert SequenceConfig().stride == 1
    with pytest.raises(FrameFormatError):
        SequenceConfig(stride=0)
    with pytest.raises(FrameFormatError):
        SequenceConfig(n_dims=1)


def _dummy_frames(n, width=2):
    for t in range(n):
        yield make_frame(np.full((1, width, 4), float(t)), time_index=t)


class TestStridePairs:
    def test_consecutive_pairs(self):
        pairs = [(a.time_index, b.time_index) for a, b in stride_pairs(_dummy_frames(5), 1)]
        assert pairs == [(0, 1), (1, 2), (2, 3), (3, 4)]

    def test_stride_two(self):
        pairs = [(a.time_index, b.time_index) for a, b in stride_pairs(_dummy_frames(5), 2)]
        assert pairs == [(0, 2), (2, 4)]

    def test_large_sequence_stride_100(self):
        pairs = [(a.time_index, b.time_index) for a, b in stride_pairs(_dummy_frames(2383), 100)]
        assert len(pairs) == 23
        assert pairs[-1] == (2200, 2300)

    def test_short_sequence_yields_nothing(self, caplog):
        assert list(stride_pairs(_dummy_frames(2), 3)) == []

    def test_out_of_order_rejected(self):
        frames = [
            make_frame(np.ones((1, 2, 4)), time_index=1),
            make_frame(np.ones((1, 2, 4)), time_index=0),
        ]
        with pytest.raises(SequenceOrderError):
            list(stride_pairs(frames, 1))

    def test_memory_contract_two_frames(self):
        refs = []

        def source(n):
            for t in range(n):
                frame = make_frame(np.full((1, 2, 4), float(t)), time_index=t)
                refs.append(weakref.ref(frame))
                yield frame

        max_alive = 0
        for _ in stride_pairs(source(30), 3):
            gc.collect()
            alive = sum(1 for r in refs if r() is not None)
            max_alive = max(max_alive, alive)
        assert max_alive <= 2
