"""Exit-time stochastic domination toolkit.

Exact biased-walk exit tables, discrete and continuous Girsanov reweighting,
analytic Brownian survival formulas, coupled squared-modulus SDE simulation,
and the dominance/independence verification layer on top of them.
"""

from .walk import (
    MODE_FLOAT,
    MODE_RATIONAL,
    JointExitTable,
    SurvivalCurve,
    WalkSpec,
    exit_joint,
    mean_exit,
    modulus_chain_up_prob,
    survival_pmf,
    upper_exit_prob,
)
from .walk_girsanov import (
    WalkLikelihoodRatio,
    check_independence_discrete,
    factorization_check_discrete,
    likelihood_ratio_walk,
    martingale_one_step_check,
    reweighted_survival_walk,
)
from .bm import (
    DriftSpec,
    SeriesControl,
    dominance_scan_continuous,
    drift_y,
    drifted_survival,
    drifted_survival_quad,
    driftless_exit_density,
    driftless_survival,
    sign_given_modulus,
)
from .mc import (
    CoupledStats,
    ExitSamples,
    RngStreamSpec,
    check_independence_continuous,
    likelihood_ratio_bm,
    reweighted_survival_bm,
    simulate_exit_bm,
    simulate_y_coupled,
)
from .dominance import (
    CONSISTENT,
    DOMINATES,
    INCONCLUSIVE,
    VIOLATES,
    DominanceReport,
    dominance_scan_discrete,
    empirical_dominance_test,
    tail_conditional_mean_check,
)

__version__ = "0.1.0"
