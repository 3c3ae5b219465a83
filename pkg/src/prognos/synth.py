"""Synthetic inflating-membrane sequences with known ground truth.

Frames sample a spherical cap on a regular grid, one observation point per
grid cell, with channels x, y, z, grayscale. The cap radius grows linearly,
so spatial channels increase monotonically while the grayscale value (a
proxy for surface brightness under stretch) decreases with the local areal
stretch. Grayscale is digitized to integer levels the way a camera would;
set ``gray_quantization = 0`` for the continuous variant.

A weak spot makes the local stretch inside a disk run away super-linearly
from its onset until the burst frame, with a deterministic flicker
(per-point phase wobble) that keeps the local ranking churning; the spot
expresses only in the grayscale channel, so every point outside the spot
follows exactly the trajectory of the spotless control twin under the same
seed. Control sequences have no weak spot and no burst and optionally
deflate after a peak.

Noise is uniform additive per channel, scaled as a fraction of the
channel's mean frame-to-frame change of the nominal (spotless) trajectory,
and drawn from per-frame substreams of the scenario seed, so generation is
deterministic and embarrassingly parallel over frames.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .exceptions import ScenarioError
from .frames import Frame, frame_filename, serialize_xyzm
from .kvformat import format_kv, parse_kv

#: grid spans on the cap, radians; chosen so all direction components are
#: positive (keeps every channel positive and rank order stable under growth)
_POLAR_RANGE = (0.9, 1.1)
_AZIMUTH_RANGE = (0.6, 0.97)
_GOLDEN_ANGLE = 2.399963229728653


@dataclass(frozen=True)
class WeakSpot:
    """Localized super-linear stretch runaway driving the burst."""

    center_row: float
    center_col: float
    radius: float
    onset_frame: int
    exponent: float = 2.0
    amplitude: float = 0.05
    wobble: float = 0.3
    wobble_period: float = 4.0
    heterogeneity: float = 0.25

    def __post_init__(self):
        if self.radius <= 0:
            raise ScenarioError("weak spot radius must be positive")
        if self.onset_frame < 0:
            raise ScenarioError("weak spot onset must be non-negative")
        if self.exponent < 1.0:
            raise ScenarioError("weak spot exponent must be >= 1 (super-linear)")
        if self.amplitude <= 0:
            raise ScenarioError("weak spot amplitude must be positive")
        if not 0.0 <= self.wobble < 1.0:
            raise ScenarioError("wobble must lie in [0, 1)")
        if self.wobble_period <= 0:
            raise ScenarioError("wobble period must be positive")
        if not 0.0 <= self.heterogeneity < 1.0:
            raise ScenarioError("heterogeneity must lie in [0, 1)")


@dataclass(frozen=True)
class BalloonScenario:
    """Full description of one synthetic sequence."""

    width: int = 10
    height: int = 10
    frames: int = 60
    burst_frame: int | None = None
    base_radius: float = 1.0
    growth_rate: float = 0.012
    weak_spot: WeakSpot | None = None
    noise_amplitude: tuple[float, float, float, float] = (0.0, 0.0, 0.0, 0.0)
    seed: int = 0
    deflate_after: int | None = None
    edge_stretch: float = 0.08
    gray_full: float = 250.0
    gray_quantization: float = 1.0

    def __post_init__(self):
        if self.width < 2 or self.height < 2:
            raise ScenarioError("grid must be at least 2x2")
        if self.frames < 2:
            raise ScenarioError("need at least two frames")
        if self.growth_rate <= 0:
            raise ScenarioError("growth rate must be positive")
        if isinstance(self.noise_amplitude, (int, float)):
            object.__setattr__(
                self, "noise_amplitude", (float(self.noise_amplitude),) * 4
            )
        if len(self.noise_amplitude) != 4:
            raise ScenarioError("noise amplitude needs one entry per channel")
        if any(a < 0 for a in self.noise_amplitude):
            raise ScenarioError("noise amplitudes must be non-negative")
        if self.burst_frame is not None:
            if not 0 < self.burst_frame < self.frames:
                raise ScenarioError("burst frame must lie inside the sequence")
            if self.weak_spot is None:
                raise ScenarioError("a bursting scenario needs a weak spot")
            if self.weak_spot.onset_frame >= self.burst_frame:
                raise ScenarioError("weak spot must start before the burst")
        if self.deflate_after is not None and self.deflate_after < 1:
            raise ScenarioError("deflate_after must be >= 1")
        if self.gray_quantization < 0:
            raise ScenarioError("gray quantization must be non-negative")

    @property
    def n_emitted(self) -> int:
        """Frames actually produced: the sequence ends at the burst."""
        if self.burst_frame is not None:
            return self.burst_frame + 1
        return self.frames


def _directions(scenario: BalloonScenario) -> np.ndarray:
    """Unit direction per grid point, shape (height, width, 3)."""
    h, w = scenario.height, scenario.width
    rows = np.linspace(_POLAR_RANGE[0], _POLAR_RANGE[1], h)
    cols = np.linspace(_AZIMUTH_RANGE[0], _AZIMUTH_RANGE[1], w)
    polar, azimuth = np.meshgrid(rows, cols, indexing="ij")
    return np.stack(
        [
            np.sin(polar) * np.cos(azimuth),
            np.sin(polar) * np.sin(azimuth),
            np.cos(polar),
        ],
        axis=2,
    )


def _radius(scenario: BalloonScenario, t: int) -> float:
    g = scenario.growth_rate
    if scenario.deflate_after is not None and t > scenario.deflate_after:
        t_eff = max(0, 2 * scenario.deflate_after - t)
    else:
        t_eff = t
    return scenario.base_radius * (1.0 + g * t_eff)


def _edge_pattern(scenario: BalloonScenario) -> np.ndarray:
    """Static spatial stretch pattern: discrete plateaus, edge stretches more.

    Plateaus are exactly equal within a ring band, so the background keeps a
    fixed rank structure (ties included) for the whole run; the plateau gaps
    stay wide enough that quantized bands never collide under uniform
    inflation.
    """
    h, w = scenario.height, scenario.width
    r = (np.arange(h) - (h - 1) / 2.0) / max((h - 1) / 2.0, 1.0)
    c = (np.arange(w) - (w - 1) / 2.0) / max((w - 1) / 2.0, 1.0)
    rr, cc = np.meshgrid(r, c, indexing="ij")
    rho2 = np.clip(rr * rr + cc * cc, 0.0, 2.0)
    ring = np.digitize(rho2, (0.4, 0.9, 1.4))
    return 1.0 + scenario.edge_stretch * ring


def _spot_heterogeneity(scenario: BalloonScenario) -> np.ndarray:
    """Deterministic per-point depth diversity inside the weak spot."""
    h, w = scenario.height, scenario.width
    idx = np.arange(h * w, dtype=float).reshape(h, w)
    return np.mod(idx * _GOLDEN_ANGLE / (2.0 * math.pi), 1.0)


def _spot_factor(scenario: BalloonScenario, t: int) -> np.ndarray:
    """Extra stretch multiplier inside the weak spot at frame t.

    The spot is a sharp disk: every point inside the radius runs away
    together (material heterogeneity spreads their depths by up to 25% and
    the flicker keeps their ordering churning); points outside are exactly
    untouched, so the defect never smears into the background ranks.
    """
    spot = scenario.weak_spot
    h, w = scenario.height, scenario.width
    if spot is None or t < spot.onset_frame:
        return np.ones((h, w))
    end = scenario.burst_frame if scenario.burst_frame is not None else scenario.frames - 1
    span = max(end - spot.onset_frame, 1)
    tau = min((t - spot.onset_frame) / span, 1.0)
    rows = np.arange(h)[:, None] - spot.center_row
    cols = np.arange(w)[None, :] - spot.center_col
    dist = np.sqrt(rows * rows + cols * cols)
    inside = dist <= spot.radius
    col_side = np.broadcast_to(np.arange(w)[None, :] >= spot.center_col, (h, w))
    hetero = _spot_heterogeneity(scenario).copy()
    # balance the two disk halves to the same mean depth so single-point
    # moves keep flipping the aggregated block order
    for side in (col_side, ~col_side):
        members = inside & side
        if members.any():
            hetero[members] -= hetero[members].mean() - 0.5
    fall = np.where(inside, 1.0 - spot.heterogeneity * hetero, 0.0)
    # two flicker modes: a slow per-point jitter keeps individual ranks
    # churning gently at the raw scale, and a small coherent quadrant slosh
    # keeps the aggregated block means reordering at the coarser levels
    jitter_phase = np.arange(h * w, dtype=float).reshape(h, w) * _GOLDEN_ANGLE
    point_mode = np.sin(2.0 * math.pi * t / spot.wobble_period + jitter_phase)
    row_side = (np.arange(h)[:, None] >= spot.center_row).astype(float)
    quadrant = math.pi * row_side + 0.5 * math.pi * col_side.astype(float)
    quad_mode = np.sin(
        2.0 * math.pi * t / (spot.wobble_period / 2.6) + quadrant
    )
    flicker = 1.0 + spot.wobble * point_mode + 0.5 * spot.wobble * quad_mode
    return 1.0 + spot.amplitude * fall * (tau**spot.exponent) * flicker


def _exact_values(scenario: BalloonScenario, t: int, with_spot: bool) -> np.ndarray:
    """Noise-free channel values at frame t, shape (height, width, 4)."""
    n = _directions(scenario)
    r = _radius(scenario, t)
    base_stretch = (r / scenario.base_radius) ** 2
    stretch = base_stretch * _edge_pattern(scenario)
    if with_spot:
        stretch = stretch * _spot_factor(scenario, t)
    gray = scenario.gray_full / stretch
    out = np.empty((scenario.height, scenario.width, 4))
    out[:, :, :3] = r * n
    out[:, :, 3] = gray
    return out


def _noise_scales(scenario: BalloonScenario) -> np.ndarray:
    """Per-channel noise scale: amplitude x mean |frame step| of the
    nominal spotless trajectory (so a bursting run and its control twin
    share scales)."""
    amps = np.asarray(scenario.noise_amplitude, dtype=float)
    if not amps.any():
        return np.zeros(4)
    steps = np.zeros(4)
    prev = _exact_values(scenario, 0, with_spot=False)
    # averaged over the nominal frame count, so a bursting run and its
    # truncation-free control twin share the exact same scales
    for t in range(1, scenario.frames):
        cur = _exact_values(scenario, t, with_spot=False)
        steps += np.mean(np.abs(cur - prev), axis=(0, 1))
        prev = cur
    steps /= max(scenario.frames - 1, 1)
    return amps * steps


def _frame_noise(scenario: BalloonScenario, t: int, scales: np.ndarray) -> np.ndarray:
    if not scales.any():
        return np.zeros((scenario.height, scenario.width, 4))
    rng = np.random.default_rng(np.random.SeedSequence([scenario.seed, t]))
    raw = rng.uniform(-1.0, 1.0, size=(scenario.height, scenario.width, 4))
    return raw * scales[None, None, :]


def generate(scenario: BalloonScenario) -> list[Frame]:
    """Produce the frame sequence for a scenario (ends at the burst)."""
    scales = _noise_scales(scenario)
    frames = []
    for t in range(scenario.n_emitted):
        values = _exact_values(scenario, t, with_spot=True)
        values = values + _frame_noise(scenario, t, scales)
        if scenario.gray_quantization > 0:
            q = scenario.gray_quantization
            values[:, :, 3] = np.clip(
                np.round(values[:, :, 3] / q) * q, 0.0, 255.0
            )
        mask = np.ones((scenario.height, scenario.width), dtype=bool)
        frames.append(Frame(time_index=t, values=values, mask=mask))
    return frames


def control_sequence(scenario: BalloonScenario) -> list[Frame]:
    """Generate a no-failure control run; rejects burst/weak-spot settings."""
    if scenario.burst_frame is not None or scenario.weak_spot is not None:
        raise ScenarioError("control sequences carry no burst and no weak spot")
    return generate(scenario)


def control_twin(scenario: BalloonScenario) -> BalloonScenario:
    """The same scenario with the weak spot and burst removed."""
    return dataclasses.replace(scenario, weak_spot=None, burst_frame=None)


def demo_burst_scenario(
    seed: int = 3, burst_frame: int = 56, growth_rate: float = 0.012
) -> BalloonScenario:
    """A 10x10 bursting scenario from the validated benchmark family.

    The weak spot starts 18 frames before the burst and runs away
    quadratically; its flicker keeps the local ranking churning at every
    aggregation scale, which is what the detector keys on.
    """
    spot = WeakSpot(
        center_row=4.4,
        center_col=5.5,
        radius=2.8,
        onset_frame=burst_frame - 18,
        exponent=2.0,
        amplitude=0.25,
        wobble=0.08,
        wobble_period=9.0,
        heterogeneity=0.45,
    )
    return BalloonScenario(
        width=10,
        height=10,
        frames=burst_frame + 4,
        burst_frame=burst_frame,
        growth_rate=growth_rate,
        weak_spot=spot,
        seed=seed,
        edge_stretch=0.015,
        noise_amplitude=(0.05, 0.05, 0.05, 0.0),
    )


def demo_control_scenario(
    seed: int = 3, frames: int = 60, growth_rate: float = 0.012, deflate_after: int | None = None
) -> BalloonScenario:
    """A no-failure control twin of the benchmark family."""
    return BalloonScenario(
        width=10,
        height=10,
        frames=frames,
        growth_rate=growth_rate,
        seed=seed,
        deflate_after=deflate_after,
        edge_stretch=0.015,
        noise_amplitude=(0.05, 0.05, 0.05, 0.0),
    )


# --- scenario and manifest files (flat key = value text) -------------------

_SCENARIO_FIELDS = {
    "width": int,
    "height": int,
    "frames": int,
    "burst_frame": int,
    "base_radius": float,
    "growth_rate": float,
    "seed": int,
    "deflate_after": int,
    "edge_stretch": float,
    "gray_full": float,
    "gray_quantization": float,
    "weak_center_row": float,
    "weak_center_col": float,
    "weak_radius": float,
    "weak_onset": int,
    "weak_exponent": float,
    "weak_amplitude": float,
    "weak_heterogeneity": float,
    "weak_wobble": float,
    "weak_wobble_period": float,
}


def read_scenario(path: str | Path) -> BalloonScenario:
    """Load a scenario file."""
    raw = parse_kv(Path(path).read_text())
    kwargs: dict[str, object] = {}
    weak: dict[str, object] = {}
    for key, value in raw.items():
        if key == "noise_amplitude":
            parts = [float(p) for p in value.split(",")]
            if len(parts) == 1:
                parts = parts * 4
            kwargs["noise_amplitude"] = tuple(parts)
            continue
        if key not in _SCENARIO_FIELDS:
            raise ScenarioError(f"unknown scenario key {key!r}")
        if value.lower() in ("none", ""):
            continue
        parsed = _SCENARIO_FIELDS[key](value)
        if key.startswith("weak_"):
            weak[key[len("weak_") :]] = parsed
        else:
            kwargs[key] = parsed
    if weak:
        try:
            kwargs["weak_spot"] = WeakSpot(
                center_row=weak.pop("center_row"),
                center_col=weak.pop("center_col"),
                radius=weak.pop("radius"),
                onset_frame=weak.pop("onset"),
                **{k: v for k, v in weak.items()},
            )
        except KeyError as exc:
            raise ScenarioError(f"weak spot is missing field {exc}") from None
    return BalloonScenario(**kwargs)


def write_scenario(scenario: BalloonScenario, path: str | Path) -> None:
    items: dict[str, object] = {
        "width": scenario.width,
        "height": scenario.height,
        "frames": scenario.frames,
        "burst_frame": scenario.burst_frame if scenario.burst_frame is not None else "none",
        "base_radius": scenario.base_radius,
        "growth_rate": scenario.growth_rate,
        "noise_amplitude": ",".join(repr(a) for a in scenario.noise_amplitude),
        "seed": scenario.seed,
        "deflate_after": scenario.deflate_after if scenario.deflate_after is not None else "none",
        "edge_stretch": scenario.edge_stretch,
        "gray_full": scenario.gray_full,
        "gray_quantization": scenario.gray_quantization,
    }
    spot = scenario.weak_spot
    if spot is not None:
        items.update(
            {
                "weak_center_row": spot.center_row,
                "weak_center_col": spot.center_col,
                "weak_radius": spot.radius,
                "weak_onset": spot.onset_frame,
                "weak_exponent": spot.exponent,
                "weak_amplitude": spot.amplitude,
                "weak_heterogeneity": spot.heterogeneity,
                "weak_wobble": spot.wobble,
                "weak_wobble_period": spot.wobble_period,
            }
        )
    Path(path).write_text(format_kv(items))


def write_sequence(scenario: BalloonScenario, outdir: str | Path) -> Path:
    """Generate the sequence into a directory plus a ground-truth manifest."""
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    for frame in generate(scenario):
        path = outdir / frame_filename(frame.time_index)
        path.write_text(serialize_xyzm(frame), encoding="ascii")
    manifest = {
        "run_id": outdir.name,
        "label": "burst" if scenario.burst_frame is not None else "no-failure",
        "burst_frame": scenario.burst_frame if scenario.burst_frame is not None else "none",
        "frames_emitted": scenario.n_emitted,
        "width": scenario.width,
        "height": scenario.height,
        "seed": scenario.seed,
    }
    (outdir / "manifest.txt").write_text(format_kv(manifest))
    return outdir / "manifest.txt"


def read_manifest(path: str | Path) -> dict[str, str]:
    return parse_kv(Path(path).read_text())
