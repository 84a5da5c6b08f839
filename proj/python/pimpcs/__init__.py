"""Planar quadcopter landing with an MPC and its neural surrogate."""

from ._core import (
    PARAM_COUNT,
    FormatError,
    MpcConfig,
    PlantParams,
    SimulationError,
    Surrogate,
    classify_landing,
    derivative,
    equilibrium_control,
    euler_step,
    fit_profile,
    load_dataset,
    mpc_solve,
    net_control,
    rk4_step,
    sha256,
    simulate,
    tracking_error,
)

__all__ = [
    "PARAM_COUNT",
    "FormatError",
    "MpcConfig",
    "PlantParams",
    "SimulationError",
    "Surrogate",
    "classify_landing",
    "derivative",
    "equilibrium_control",
    "euler_step",
    "fit_profile",
    "load_dataset",
    "mpc_solve",
    "net_control",
    "rk4_step",
    "sha256",
    "simulate",
    "tracking_error",
]
