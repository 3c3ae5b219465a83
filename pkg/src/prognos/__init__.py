"""Training-free instability prognosis for multi-channel point-grid sequences."""

from .detector import InstabilityDetector
from .frames import Frame, WindowSpec, extract_window, parse_xyzm, serialize_xyzm, stride_pairs
from .lengthscale import MixityConfig
from .pipeline import EngineConfig, analyze_pair, run_sequence
from .prognosis import PrognosisState, lead_percentage
from .synth import BalloonScenario, WeakSpot, control_sequence, generate

__version__ = "0.1.0"

__all__ = [
    "BalloonScenario",
    "EngineConfig",
    "Frame",
    "InstabilityDetector",
    "MixityConfig",
    "PrognosisState",
    "WeakSpot",
    "WindowSpec",
    "analyze_pair",
    "control_sequence",
    "extract_window",
    "generate",
    "lead_percentage",
    "parse_xyzm",
    "run_sequence",
    "serialize_xyzm",
    "stride_pairs",
    "__version__",
]
