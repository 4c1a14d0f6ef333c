"""BP warm-up plus ordered-statistics decoding for quantum LDPC codes."""

from .bp import BPConfig, SoftOutput, bp_decode, prior_llrs
from .gf2 import BitMatrix, BitVector, EliminationResult, eliminate_ordered, rank
from .model import CSSCode, DecodingModel, build_bicycle, build_phenomenological
from .osd import Candidate, DecoderConfig, bf_osd, osd0, osd_cs, osd_w
from .sim import RunStats, SimConfig, compare_matched, run_monte_carlo

__version__ = "0.1.0"

__all__ = [
    "BPConfig",
    "BitMatrix",
    "BitVector",
    "CSSCode",
    "Candidate",
    "DecoderConfig",
    "DecodingModel",
    "EliminationResult",
    "RunStats",
    "SimConfig",
    "SoftOutput",
    "bf_osd",
    "bp_decode",
    "build_bicycle",
    "build_phenomenological",
    "compare_matched",
    "eliminate_ordered",
    "osd0",
    "osd_cs",
    "osd_w",
    "prior_llrs",
    "rank",
    "run_monte_carlo",
]
