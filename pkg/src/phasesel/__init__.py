"""Salient-object selection via chaotic phase synchronization.

A 2-D lattice of coupled Rossler oscillators, parameterized per pixel
from image contrast, phase-synchronizes only over the most salient
object; a moving attention level shifts the synchronized group from
object to object over time.
"""

from .dynamics import (
    ChainConfig,
    DivergenceError,
    IntegrationConfig,
    LatticeField,
    LatticeParams,
    RosslerParams,
    chain_coupling,
    integrate_chain,
    integrate_lattice,
    integrate_oscillator,
    lattice_coupling,
    rk4_step,
    rossler_derivative,
)
from .grid import GateSet

__version__ = "0.1.0"
