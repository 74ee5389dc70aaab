"""Control of discrete-time stochastic packet networks.

Implements MaxWeight and two receding-horizon policies (linear and
quadratic cost) for networks with integer link moves, mutually exclusive
channels, Bernoulli link successes modulated by a Markov channel chain, and
Bernoulli arrivals.  Ships exact slot dynamics, the expectation algebra that
turns the horizon cost into a binary quadratic program, an exact desk-scale
solver, closed-loop simulation with counter-based randomness, stability
classification and arrival-rate region sweeps, plus a small CLI.
"""

from .expect import (
    AssembledProgram,
    ExpandedModel,
    ProgramBuilder,
    assemble_constraints,
    assemble_costs,
    clamp_minus,
    expected_B,
    expected_cross,
    expected_queue,
    markov_dist,
)
from .model import (
    ArrivalProcess,
    NetworkSpec,
    QueueState,
    SlotRealization,
    is_admissible,
    realize_slot,
    step,
)
from .policy import Controller, PolicyConfig, decide, mw_equivalence_check
from .scenarios import (
    Scenario,
    ScenarioError,
    generic_scenario,
    load_scenario,
    natural_scenario,
    resolve_scenario,
    save_scenario,
)
from .sim import (
    SimulationTrace,
    StabilityVerdict,
    SweepPoint,
    classify_stability,
    compare_policies,
    run,
    slot_generator,
    sweep_region,
)
from .solver import (
    BqpInstance,
    BqpSolution,
    InfeasibleProgramError,
    solve,
    solve_by_enumeration,
    solve_linear,
)

__version__ = "0.1.0"

__all__ = [
    "ArrivalProcess",
    "AssembledProgram",
    "BqpInstance",
    "BqpSolution",
    "Controller",
    "ExpandedModel",
    "InfeasibleProgramError",
    "NetworkSpec",
    "PolicyConfig",
    "ProgramBuilder",
    "QueueState",
    "Scenario",
    "ScenarioError",
    "SimulationTrace",
    "SlotRealization",
    "StabilityVerdict",
    "SweepPoint",
    "assemble_constraints",
    "assemble_costs",
    "clamp_minus",
    "classify_stability",
    "compare_policies",
    "decide",
    "expected_B",
    "expected_cross",
    "expected_queue",
    "generic_scenario",
    "is_admissible",
    "load_scenario",
    "markov_dist",
    "mw_equivalence_check",
    "natural_scenario",
    "realize_slot",
    "resolve_scenario",
    "run",
    "save_scenario",
    "slot_generator",
    "solve",
    "solve_by_enumeration",
    "solve_linear",
    "step",
    "sweep_region",
]
