from .file_io import read_file, write_file, build_document, write_json, write_trajectory_csv
from .errors import (KacGapError, DomainError, ConfigError, NumericalError, BoundViolation,
                     DegenerateProfileError, exit_code_for)
from .config import RunConfig, build_config, parse_config_text
from .products import (RationalProductSpec, ProductResult, gamma_product_limit, partial_product,
                       truncated_product)
from .sphere import SphereSpec, MarginalDensity, SpherePoint, sample_uniform, quadrature_rule
from .correlation import CorrelationSpectrum, kappa, correlation_bound_check, projection_sum_bound
from .bounds import BoundReport, GapBoundInputs, a_coeff, c_coeff, hat_delta_lb, delta_lb, lambda_lb
from .variational import (TrialProfile, MaxwellianSpectrum, LinearizedModel, dirichlet_form_A,
                          rayleigh_min, linearized_gap, exact_maxwellian_spectrum)
from .kac_walk import VelocityState, GapEstimate, KacWalk, step, estimate_gap_autocorr, dirichlet_mc

__all__ = [
    'read_file',
    'write_file',
    'build_document',
    'write_json',
    'write_trajectory_csv',
    'KacGapError',
    'DomainError',
    'ConfigError',
    'NumericalError',
    'BoundViolation',
    'DegenerateProfileError',
    'exit_code_for',
    'RunConfig',
    'build_config',
    'parse_config_text',
    'RationalProductSpec',
    'ProductResult',
    'gamma_product_limit',
    'partial_product',
    'truncated_product',
    'SphereSpec',
    'MarginalDensity',
    'SpherePoint',
    'sample_uniform',
    'quadrature_rule',
    'CorrelationSpectrum',
    'kappa',
    'correlation_bound_check',
    'projection_sum_bound',
    'BoundReport',
    'GapBoundInputs',
    'a_coeff',
    'c_coeff',
    'hat_delta_lb',
    'delta_lb',
    'lambda_lb',
    'TrialProfile',
    'MaxwellianSpectrum',
    'LinearizedModel',
    'dirichlet_form_A',
    'rayleigh_min',
    'linearized_gap',
    'exact_maxwellian_spectrum',
    'VelocityState',
    'GapEstimate',
    'KacWalk',
    'step',
    'estimate_gap_autocorr',
    'dirichlet_mc',
]
