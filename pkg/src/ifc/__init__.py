"""Interference-function power control: construction, contraction
certificates, synchronous and asynchronous iteration, bound checks."""
from .certify import (
    Certificate,
    CertificationError,
    certify_by_enumeration,
    certify_common_v,
    certify_drpc,
    certify_linear,
    certify_linear_rowsum,
    certify_macro,
    certify_mpa,
    certify_ubpc,
    convergence_steps_bound,
    convergence_time_bound,
    enumerate_assignment_spectra,
)
from .core import AxiomVerdict, InterferenceFunction, LogUniformSampler, dc_metric
from .engine import (
    AsyncSchedule,
    IterationTrace,
    empirical_rate,
    envelope_check,
    reference_fixed_point,
    run_async,
    run_sync,
)
from .numkit import spectral_radius, weighted_max_norm_mat, weighted_max_norm_vec
from .zoo import NetworkScenario, UbpcParams, build_normalized, example4

__version__ = "0.1.0"
