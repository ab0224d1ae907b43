"""memomarket: binary market lattices driven by Gaussian noise with
Volterra-kernel memory.

The package builds the discrete-time approximation of a stock market whose
driving noise carries exponential memory, certifies or refutes absence of
arbitrage in the resulting multi-period binary market, measures the
arbitrage probability and its decay, and checks the weak-convergence
behaviour of the lattice processes against their continuous-time limits.
"""

from ._backend import backend_name
from .kernels import ConstantKernel, KernelModel, MemoryKernel, MemoryKernelParams
from .lattice import CoefficientTable, LatticeConfig, build_coefficient_table, lattice_steps
from .market import (
    MarketParams,
    NoArbitrageCertificate,
    StepBounds,
    certify_no_arbitrage,
    evolve_market,
    min_periods_no_arbitrage,
    risk_neutral_step_prob,
    step_bounds,
)
from .paths import (
    DiscretePath,
    sample_path_direct,
    sample_path_fast,
    sample_prices,
    split_by_jump_threshold,
    sup_jump,
    quadratic_variation,
)
from .rng import InnovationSpec, sample_innovations

__version__ = "0.1.0"

__all__ = [
    "ConstantKernel",
    "CoefficientTable",
    "DiscretePath",
    "InnovationSpec",
    "KernelModel",
    "LatticeConfig",
    "MarketParams",
    "MemoryKernel",
    "MemoryKernelParams",
    "NoArbitrageCertificate",
    "StepBounds",
    "backend_name",
    "build_coefficient_table",
    "certify_no_arbitrage",
    "evolve_market",
    "lattice_steps",
    "min_periods_no_arbitrage",
    "quadratic_variation",
    "risk_neutral_step_prob",
    "sample_innovations",
    "sample_path_direct",
    "sample_path_fast",
    "sample_prices",
    "split_by_jump_threshold",
    "step_bounds",
    "sup_jump",
]
