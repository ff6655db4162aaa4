"""Driven qubit fluorescence: Davydov variational dynamics, time-local master equations and HEOM."""

from ._core import (
    ModelConfig,
    RunConfig,
    asymmetry,
    bath_correlation,
    config_echo,
    discretize_bath,
    load_config,
    parse_config,
    run_davydov,
    run_heom,
    run_tlme,
)

__all__ = [
    "ModelConfig",
    "RunConfig",
    "asymmetry",
    "bath_correlation",
    "config_echo",
    "discretize_bath",
    "load_config",
    "parse_config",
    "run_davydov",
    "run_heom",
    "run_tlme",
]
