"""Loewner-framework identification of descriptor models from frequency data.

Covers plain Loewner interpolation, explicit estimation of a linear
polynomial part (poly-Loewner) and the implicit barycentric variant with
a free numerator constant (poly-AA).
"""
from .data import (FrequencySample, PartitionConfig, TangentialDataset, dump_samples,
                   load_samples, partition, tangentialize)
from .errors import *  # noqa: F401,F403
from .loewner import (DescriptorRealization, LoewnerQuadruple, ReductionReport,
                      apply_k_parameterization, build_quadruple, check_regularity,
                      direct_interpolant, eval_transfer, reduce, sylvester_residuals)
from .polyaa import (AugmentedLoewner, BarycentricModel, build_augmented, eval_barycentric,
                     fit_poly_aa, recover_poly_terms, solve_null_vector)
from .polyfit import (HighFreqWindow, PolyCoefficients, estimate_general, estimate_pair,
                      estimate_single, fit_poly_loewner, subtract_poly)
from .synthetic import SyntheticSystem, make_synthetic, projector_oracle, sample_system

__version__ = "0.1.0"
