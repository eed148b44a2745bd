"""Achievable rates, decodable relay sets and identity checks for compress-and-forward relay networks."""
from __future__ import annotations

from .pmf import ChannelSpec, JointPmf, Mode, SpecError, build_joint, cond_mutual_info
from .setfuncs import EvalContext
from .specio import load_example, load_spec, spec_from_dict, spec_to_dict

__all__ = [
    "ChannelSpec", "EvalContext", "JointPmf", "Mode", "SpecError", "build_joint",
    "cond_mutual_info", "load_example", "load_spec", "spec_from_dict", "spec_to_dict",
]
__version__ = "0.1.0"
