"""Certified bounds and exact principal eigenvalues of the discrete
p-Laplacian on finite weighted chains (the reciprocal of the optimal
constant in weighted discrete Hardy inequalities)."""

from .chain import (
    BoundaryCase,
    Chain,
    ChainError,
    Exponent,
    ExponentError,
    chain_from_dict,
    dirichlet_form,
    dual_chain,
    geometric_chain,
    load_chain,
    make_chain,
    mu_norm_p,
    nu_hat,
    rayleigh_quotient,
    sum_table,
    uniform_chain,
)
from .nd import (
    Certificate,
    ClassError,
    basic_bounds_nd,
    bound_from_test_function_nd,
    delta_bar_seq_nd,
    delta_prime_seq_nd,
    delta_prime_bar_seq_nd,
    delta_seq_nd,
    improved_estimates_nd,
    op_I_nd,
    op_II_nd,
    op_R_nd,
    sigma_p_nd,
)
from .dn import (
    basic_bounds_dn,
    bound_from_test_function_dn,
    delta_bar_seq_dn,
    delta_prime_seq_dn,
    delta_prime_bar_seq_dn,
    delta_seq_dn,
    improved_estimates_dn,
    op_I_dn,
    op_II_dn,
    op_R_dn,
    op_Rtilde_dn,
    sigma_p_dn,
    tilde_mu,
)
from .solver import (
    DualityReport,
    EigenSolution,
    InverseIterationResult,
    ShotResult,
    SolverError,
    VerificationReport,
    check_duality,
    inverse_iteration,
    lambda_truncated_seq,
    shoot,
    shoot_dn,
    shoot_nd,
    solve,
    solve_dn,
    solve_nd,
    verify_solution,
)
from .reports import BoundsReport, bounds_report, solution_to_dict

__version__ = "0.1.0"
