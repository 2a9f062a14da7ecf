"""Analytic guarantees of random participant selection, as executable code."""

from .accountants import (
    ACCOUNTANTS,
    ConstantAccountant,
    GaussianRdpAccountant,
    MockAccountant,
    PrivacyAccountant,
    make_accountant,
)
from .kernel import (
    LogProb,
    binomial_log_cdf,
    binomial_log_tail_gt,
    binomial_tail_exact,
    binomial_tail_gt,
)
from .theorems import (
    BoundParams,
    EpsilonResult,
    epsilon_client_centric,
    epsilon_server_centric,
    gamma,
    overselection_success,
    overselection_success_exact,
    p_k,
    phi,
    phi_recurrence,
    q_r_client,
    q_r_server,
    secagg_failure_bound,
    secagg_threshold,
    selection_probability,
    theorem1_bound,
)

__all__ = [
    "ACCOUNTANTS",
    "BoundParams",
    "ConstantAccountant",
    "EpsilonResult",
    "GaussianRdpAccountant",
    "LogProb",
    "MockAccountant",
    "PrivacyAccountant",
    "binomial_log_cdf",
    "binomial_log_tail_gt",
    "binomial_tail_exact",
    "binomial_tail_gt",
    "epsilon_client_centric",
    "epsilon_server_centric",
    "gamma",
    "make_accountant",
    "overselection_success",
    "overselection_success_exact",
    "p_k",
    "phi",
    "phi_recurrence",
    "q_r_client",
    "q_r_server",
    "secagg_failure_bound",
    "secagg_threshold",
    "selection_probability",
    "theorem1_bound",
]
