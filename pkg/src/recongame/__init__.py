"""Noisy distance-query reconstruction games: geometry, strategies and a simulator."""

from .engine import GameConfig, GameResult, brute_force_opt, evaluate_transcript, opt_curve, run_game
from .errors import ConfigurationError, DomainError, ProtocolViolation, ResourceError
from .feasible import Transcript, is_consistent, region_estimate
from .spaces import (
    DiscreteUniform,
    EuclideanBall,
    EuclideanBox,
    FiniteExplicit,
    HammingCube,
    NoiseParams,
    UltrametricStrings,
    approx_eq,
    build_cover,
    distance,
    sample_uniform,
    space_from_json,
)

__version__ = "0.1.0"

__all__ = [
    "ConfigurationError",
    "DiscreteUniform",
    "DomainError",
    "EuclideanBall",
    "EuclideanBox",
    "FiniteExplicit",
    "GameConfig",
    "GameResult",
    "HammingCube",
    "NoiseParams",
    "ProtocolViolation",
    "ResourceError",
    "Transcript",
    "UltrametricStrings",
    "approx_eq",
    "brute_force_opt",
    "build_cover",
    "distance",
    "evaluate_transcript",
    "is_consistent",
    "opt_curve",
    "region_estimate",
    "run_game",
    "sample_uniform",
    "space_from_json",
]
