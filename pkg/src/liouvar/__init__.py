"""Desk-scale numerics for square-root cancellation of the Liouville function in short intervals."""

from .dirichlet import (
    DirichletPolynomial,
    evaluate,
    lambda_poly_scan,
    mean_square,
    mvt_check,
    perron_truncated,
    plancherel_compare,
    prime_sum_scan,
)
from .identities import rearrangement_check, rough_identity_check, smooth_rough_split_check
from .sieve import (
    FactorProfile,
    LambdaSegment,
    count_big_prime_divisors,
    factor_profile,
    lambda_prefix,
    sieve_lambda,
)
from .smooth import dickman_rho, psi_estimate, psi_exact, psi_table, smooth_density_check, threshold_H
from .storage import read_segment, write_segment
from .variance import FullGrid, RandomSample, Strided, h_scan, predicted_bound, variance, window_sum

__version__ = "0.1.0"
