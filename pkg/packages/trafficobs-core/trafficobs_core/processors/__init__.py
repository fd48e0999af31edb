"""Numerical workers: traffic model, synthesis, estimators and harness."""

from trafficobs_core.processors.actm import ActmModel, SystemMatrices, assemble_system
from trafficobs_core.processors.lipschitz import estimate_lipschitz, sample_lipschitz
from trafficobs_core.processors.observer import LuenbergerObserver
from trafficobs_core.processors.synthesis import LmiSynthesizer, SynthesisProblem, alpha_sweep
from trafficobs_core.processors.ukf import UnscentedKalmanFilter

__all__ = [
    "ActmModel",
    "SystemMatrices",
    "assemble_system",
    "estimate_lipschitz",
    "sample_lipschitz",
    "SynthesisProblem",
    "LmiSynthesizer",
    "alpha_sweep",
    "LuenbergerObserver",
    "UnscentedKalmanFilter",
]
