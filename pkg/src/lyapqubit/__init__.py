"""Bang-bang Lyapunov control of a driven two-level system.

Exact propagators, switching-time analysis, regime classification, the
slow-switching fidelity limit, and a hybrid free-evolution/single-shot
policy that steers any reachable state exactly to the target.
"""

from .control import (
    EPS_SWITCH,
    ControlDecision,
    InfeasibleError,
    Regime,
    RegimeError,
    bang_bang_select,
    classify_regime,
    exact_steering_strength,
    fsc_gain_coefficient,
    fsc_population_gain,
    segment_duration,
    select_field,
    ssc_fidelity_bound,
    ssc_step,
)
from .engine import Policy, Sample, Segment, SimConfig, Trajectory, run, run_oracle
from .extended import (
    AlignmentError,
    ApplyField,
    FreeEvolve,
    Kick,
    SingleShotPlan,
    alignment_wait_time,
    hybrid_policy,
    plan_single_shot,
    reachable_by_single_control,
    required_phase,
    single_shot,
)
from .propagator import (
    Unitary2,
    controlled_unitary,
    default_oracle_step,
    evolve,
    free_unitary,
    oracle_integrate,
)
from .scenario import Scenario, ScenarioError, parse_scenario
from .states import (
    BlochAngles,
    DegenerateStateError,
    DressedFrame,
    FieldBoundError,
    PureState,
    SystemParams,
    dressed,
    fidelity,
    from_bloch,
    gauge_fix,
    lyapunov,
    switching_function,
    to_bloch,
)
from .sweeps import (
    SweepGrid,
    SweepResult,
    fidelity_vs_strength,
    phase_alignment_table,
    sweep_first_segment,
    sweep_ssc_fidelity,
)

__version__ = "0.1.0"

__all__ = [
    "AlignmentError",
    "ApplyField",
    "BlochAngles",
    "ControlDecision",
    "DegenerateStateError",
    "DressedFrame",
    "EPS_SWITCH",
    "FieldBoundError",
    "FreeEvolve",
    "InfeasibleError",
    "Kick",
    "Policy",
    "PureState",
    "Regime",
    "RegimeError",
    "Sample",
    "Scenario",
    "ScenarioError",
    "Segment",
    "SimConfig",
    "SingleShotPlan",
    "SweepGrid",
    "SweepResult",
    "SystemParams",
    "Trajectory",
    "Unitary2",
    "alignment_wait_time",
    "bang_bang_select",
    "classify_regime",
    "controlled_unitary",
    "default_oracle_step",
    "dressed",
    "evolve",
    "exact_steering_strength",
    "fidelity",
    "fidelity_vs_strength",
    "free_unitary",
    "from_bloch",
    "fsc_gain_coefficient",
    "fsc_population_gain",
    "gauge_fix",
    "hybrid_policy",
    "lyapunov",
    "oracle_integrate",
    "parse_scenario",
    "phase_alignment_table",
    "plan_single_shot",
    "reachable_by_single_control",
    "required_phase",
    "run",
    "run_oracle",
    "segment_duration",
    "select_field",
    "single_shot",
    "ssc_fidelity_bound",
    "ssc_step",
    "sweep_first_segment",
    "sweep_ssc_fidelity",
    "switching_function",
    "to_bloch",
]
