"""Exact verification of small rational ReLU networks.

Complete region-wise verification, box-bounded verification (IBP and exact),
finite-support proxy scoring, symmetry transforms, and the 1-D patching
construction, plus a harness that runs the three verification tracks.
"""

from .bounded import ibp_bounds, verify_bounded
from .diagonal import PatchPlan, build_unsound_pair, compile_pwl_to_network, pwl_from_network_1d
from .exact import LinearSpec, Verdict, equivalence_check, verify_full
from .network import Layer, Network, forward
from .proxy import EvalSupport, proxy_score
from .regions import Box, FullSpace, count_regions, enumerate_regions

__version__ = "0.1.0"

__all__ = [
    "Box",
    "EvalSupport",
    "FullSpace",
    "Layer",
    "LinearSpec",
    "Network",
    "PatchPlan",
    "Verdict",
    "build_unsound_pair",
    "compile_pwl_to_network",
    "count_regions",
    "enumerate_regions",
    "equivalence_check",
    "forward",
    "ibp_bounds",
    "proxy_score",
    "pwl_from_network_1d",
    "verify_bounded",
    "verify_full",
]
