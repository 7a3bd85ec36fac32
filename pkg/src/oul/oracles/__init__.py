"""Brute-force references used to validate the spectral solvers."""
from .finite_difference import apply_fokker_planck, wirtinger_map
from .fock import (
    FockLiouvillian,
    build_fock_liouvillian,
    coherent_density,
    coherent_state,
    evolve_density,
    mean_occupation,
    q_function,
    steady_state,
    thermal_state,
)
from .kernels import exact_ou_kernel, mehler_series, van_loan_covariance
from .quadrature import gauss_hermite, tensor_rule
from .sampling import SampleStatistics, sample_ou

__all__ = [
    "apply_fokker_planck",
    "wirtinger_map",
    "FockLiouvillian",
    "build_fock_liouvillian",
    "coherent_density",
    "coherent_state",
    "evolve_density",
    "mean_occupation",
    "q_function",
    "steady_state",
    "thermal_state",
    "exact_ou_kernel",
    "mehler_series",
    "van_loan_covariance",
    "gauss_hermite",
    "tensor_rule",
    "SampleStatistics",
    "sample_ou",
]
