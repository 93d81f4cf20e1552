"""Solvers for finite discounted MDPs whose state is only partly observed.

The state is a pair ``(x_o, x_u)``; the controller sees ``x_o`` only. The
package offers the full-information optimum (a lower bound), a frozen-belief
approximation, a truncated belief-state dynamic program, an occupation-measure
LP over hidden-state-blind policies, gap bounds between them, and a seeded
Monte Carlo simulator used as an independent oracle.
"""

from .approx import VirtualModel, build_virtual, solve_virtual, stationary_distribution, stationary_reduction
from .belief import (
    BeliefGraph,
    as_belief,
    belief_update,
    expected_cost,
    observation_prob,
    reachable_beliefs,
)
from .belief_dp import BeliefDpReport, belief_policy_action, horizon_for, solve_belief_dp
from .bounds import (
    BoundCheck,
    GapReport,
    compute_gap_constants,
    compute_gap_constants_belief,
    gap_report,
    verify_theorem5,
    verify_theorem6,
)
from .compare import compare
from .constrained import audit_policy, solve_constrained_dual, solve_constrained_primal
from .errors import (
    BudgetExceeded,
    Disagreement,
    HypothesisNotSatisfied,
    Infeasible,
    IterationLimit,
    KeyNotCovered,
    LsiMdpError,
    ModelError,
    NotApplicable,
    NotConverged,
    SingularSystem,
    ZeroProbabilityObservation,
)
from .full_info import build_full_info, solve_full_info
from .lp import LpProblem, LpSolution, solve_lp, to_lp_text
from .mdp import (
    FiniteMdp,
    MdpSolution,
    Policy,
    bellman_apply,
    policy_evaluation,
    solve_mdp,
    value_iteration,
)
from .model import FactoredKernel, LsiModel, check_factorization, example_model, load_model, save_model
from .sim import JointPolicy, SimConfig, SimResult, simulate, simulate_belief_objective, simulate_both

__version__ = "0.1.0"
