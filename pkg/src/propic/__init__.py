"""Typed tensor networks for finite-dimensional quantum information."""

from .analysis import DensityMatrix, SuperOp, apply, choi, is_completely_positive, is_positive, kraus_from_choi
from .morph import (
    Direction,
    Essence,
    Frame,
    Leg,
    Morph,
    MorphError,
    adjoint,
    bar,
    compose,
    identity,
    inner,
    opposite,
    partial_trace,
    rebase,
    tensor,
)
from .network import EvalResult, Plan
from .thick import Channel, thicken_morph

__version__ = "0.1.0"

__all__ = [
    "Channel",
    "DensityMatrix",
    "Direction",
    "Essence",
    "EvalResult",
    "Frame",
    "Leg",
    "Morph",
    "MorphError",
    "Plan",
    "SuperOp",
    "adjoint",
    "apply",
    "bar",
    "choi",
    "compose",
    "identity",
    "inner",
    "is_completely_positive",
    "is_positive",
    "kraus_from_choi",
    "opposite",
    "partial_trace",
    "rebase",
    "tensor",
    "thicken_morph",
]
