"""Controllers: MaxWeight and the receding-horizon network policies.

All three policies solve the same per-slot program and apply the first
control block of the minimizing trajectory:

* ``qpnc`` keeps the full quadratic cost,
* ``lpnc`` drops the quadratic term and minimizes the linear cost only,
* ``maxweight`` is the one-step special case (horizon 1, one hard
  constraint), i.e. the myopic minimization of the expected next-slot
  weighted queue change subject to the admissibility rules.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .expect import ProgramBuilder
from .model import NetworkSpec, QueueState, is_admissible
from .solver import PreparedSolver

__all__ = ["PolicyConfig", "Controller", "decide", "mw_equivalence_check"]

KINDS = ("maxweight", "lpnc", "qpnc")
_ALIASES = {"mw": "maxweight"}


@dataclass(frozen=True)
class PolicyConfig:
    """Which controller to run and with what weights.

    ``maxweight`` always runs with horizon 1 and one hard constraint,
    whatever was passed.  The queue weight Q defaults to the identity and the
    control weight R to zero, which makes the policies directly comparable.
    An unset tau_hard resolves to min(2, horizon).
    """

    kind: str
    horizon: int = 1
    tau_hard: int | None = None
    Q: np.ndarray | None = None
    R: np.ndarray | None = None

    def __post_init__(self):
        kind = _ALIASES.get(self.kind, self.kind)
        if kind not in KINDS:
            raise ValueError(f"unknown policy kind {self.kind!r}; expected one of {KINDS}")
        object.__setattr__(self, "kind", kind)
        horizon = self.horizon
        tau = self.tau_hard
        if kind == "maxweight":
            horizon, tau = 1, 1
        if horizon < 1:
            raise ValueError("horizon must be at least 1")
        if tau is None:
            tau = min(2, horizon)
        if not 1 <= tau <= horizon:
            raise ValueError(f"tau_hard {tau} out of range 1..{horizon}")
        object.__setattr__(self, "horizon", horizon)
        object.__setattr__(self, "tau_hard", tau)

    @property
    def label(self) -> str:
        return self.kind if self.kind == "maxweight" else f"{self.kind}:{self.horizon}"


class Controller:
    """Decision engine for one (network, policy) pair.

    Precomputes everything that does not depend on the live queue vector:
    cost templates per channel state and the stacked inequality system
    (constituency rows over all planning slots on top of the
    queue-nonnegativity rows).  Stateless across calls and safe to reuse for
    many runs of the same network.
    """

    def __init__(self, spec: NetworkSpec, cfg: PolicyConfig):
        self.spec = spec
        self.cfg = cfg
        self.builder = ProgramBuilder(spec, cfg.horizon, Q=cfg.Q, R=cfg.R, tau_hard=cfg.tau_hard)
        H, m = cfg.horizon, spec.m
        cons = np.kron(np.eye(H), spec.constituency.astype(np.float64))
        self._solvers = []
        for sigma in range(1, spec.p + 1):
            ineq, _ = self.builder.constraints(np.zeros(spec.n), sigma)
            A = np.vstack([cons, ineq])
            quad = self.builder.quadratic_cost(sigma) if cfg.kind == "qpnc" else None
            self._solvers.append(PreparedSolver(quad, A))
        self._ones = np.ones(cons.shape[0])
        # arrival rates are constant unless some source follows a schedule
        if any(a.schedule is not None for a in spec.arrivals):
            self._static_abar = None
        else:
            self._static_abar = spec.mean_rates()
        self._m = m

    def decide(self, state: QueueState) -> np.ndarray:
        """Admissible control for the current slot (first block of the plan)."""
        return self._decide(state.q, state.sigma, state.t)

    def _decide(self, q: np.ndarray, sigma: int, t: int) -> np.ndarray:
        abar = self._static_abar
        if abar is None:
            abar = self.spec.mean_rates(t)
        c = self.builder.linear_cost(q, sigma, abar)
        _, rhs = self.builder.constraints(q, sigma, abar)
        b = np.concatenate([self._ones, rhs])
        sol = self._solvers[sigma - 1].solve(c, b)
        return sol.u_star[: self._m]


def decide(state: QueueState, spec: NetworkSpec, cfg: PolicyConfig) -> np.ndarray:
    """One-off decision; builds a Controller and delegates to it."""
    return Controller(spec, cfg).decide(state)


def mw_equivalence_check(states, spec: NetworkSpec) -> bool:
    """Whether MaxWeight and the linear one-step policy decide identically.

    True when the two controllers return the same control on every supplied
    state; they share the horizon-1 program by construction, so this is a
    consistency check of the wiring.
    """
    mw = Controller(spec, PolicyConfig(kind="maxweight"))
    lp = Controller(spec, PolicyConfig(kind="lpnc", horizon=1, tau_hard=1))
    for state in states:
        u_mw = mw.decide(state)
        if not is_admissible(state.q, u_mw, spec):
            return False
        if not np.array_equal(u_mw, lp.decide(state)):
            return False
    return True
