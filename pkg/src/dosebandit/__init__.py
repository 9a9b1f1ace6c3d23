"""Dose-finding designs with multi-armed-bandit dose selection.

BOIN and Keyboard baseline designs plus four bandit variants (Thompson
sampling, constrained Thompson sampling, greedy, median), a Monte Carlo
operating-characteristics harness, and an HTTP trial-conduct service.
"""

from .designs import (
    Boundaries,
    Decision,
    KeyPartition,
    Region,
    boin_boundaries,
    elimination_check,
    keyboard_partition,
)
from .numerics import BetaParams, RngStream, beta_cdf, beta_quantile, beta_sample
from .policies import Policy, PolicyKind, bandit_select, policy_values
from .scenarios import Scenario, builtin_scenarios, load_scenarios
from .study import StudyMetrics, emit_report, epsilon_sweep, make_design, run_study
from .trial import (
    CohortOutcome,
    DesignParams,
    Family,
    Status,
    TrialState,
    new_trial,
    next_dose,
    next_dose_explained,
    record_cohort,
    select_mtd,
    simulate_trial,
)

__version__ = "0.1.0"
