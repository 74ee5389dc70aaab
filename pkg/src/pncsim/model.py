"""Packet-network model: topology, Markov channel states, arrivals, slot dynamics.

The system is a discrete-time queueing network.  Buffers hold nonnegative
integer packet counts.  Each link is a signed column of the link matrix;
activating it moves that column's packet counts in one slot, but only if the
link's Bernoulli success trial comes up.  Success probabilities are the
diagonal weights of the channel state selected by a Markov chain.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

__all__ = [
    "ArrivalProcess",
    "NetworkSpec",
    "QueueState",
    "SlotRealization",
    "is_admissible",
    "realize_slot",
    "step",
]

_COLSUM_TOL = 1e-12


@dataclass(frozen=True)
class ArrivalProcess:
    """Bernoulli packet source feeding one buffer.

    Each slot, `weight` packets arrive with the active probability.  Without a
    schedule the probability is constant, so the mean rate is
    ``probability * weight``.  With a schedule, the probability follows the
    cyclic ``(duration, probability)`` phases, starting with the first phase at
    slot 0 (shifted by `phase_offset` slots).
    """

    probability: float
    weight: int = 1
    schedule: tuple[tuple[int, float], ...] | None = None
    phase_offset: int = 0

    def __post_init__(self):
        if not 0.0 <= self.probability <= 1.0:
            raise ValueError(f"arrival probability {self.probability} not in [0, 1]")
        if self.weight < 0 or int(self.weight) != self.weight:
            raise ValueError(f"arrival weight {self.weight} must be a nonnegative integer")
        if self.schedule is not None:
            sched = tuple((int(d), float(p)) for d, p in self.schedule)
            object.__setattr__(self, "schedule", sched)
            for d, p in sched:
                if d < 1:
                    raise ValueError(f"schedule duration {d} must be >= 1")
                if not 0.0 <= p <= 1.0:
                    raise ValueError(f"schedule probability {p} not in [0, 1]")

    def probability_at(self, t: int) -> float:
        """Active arrival probability in slot t."""
        if self.schedule is None:
            return self.probability
        cycle = sum(d for d, _ in self.schedule)
        phase = (t + self.phase_offset) % cycle
        for duration, prob in self.schedule:
            if phase < duration:
                return prob
            phase -= duration
        raise AssertionError("unreachable: phase exceeded cycle length")

    def rate_at(self, t: int) -> float:
        """Mean packets per slot in slot t (weight times active probability)."""
        return self.weight * self.probability_at(t)

    @property
    def mean_rate(self) -> float:
        """Long-run mean packets per slot (cycle average when scheduled)."""
        if self.schedule is None:
            return self.weight * self.probability
        cycle = sum(d for d, _ in self.schedule)
        return self.weight * sum(d * p for d, p in self.schedule) / cycle


def _frozen_array(values, dtype) -> np.ndarray:
    arr = np.array(values, dtype=dtype)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class NetworkSpec:
    """Static description of one network.

    Attributes
    ----------
    link_matrix : (n, m) int array
        Signed packet counts each link moves per successful activation;
        columns are links.
    constituency : (r, m) 0/1 array
        Rows of mutually exclusive links; a control u must satisfy
        ``constituency @ u <= 1`` element-wise.
    transition : (p, p) float array
        Column-stochastic transition matrix of the channel-state chain;
        column j holds the distribution of the next state given state j+1.
    success_weights : (p, m) float array
        Row i is the diagonal of the i-th channel state's success-probability
        matrix; entries lie in [0, 1].
    arrivals : tuple of ArrivalProcess, length n
        One source per buffer.
    """

    link_matrix: np.ndarray
    constituency: np.ndarray
    transition: np.ndarray
    success_weights: np.ndarray
    arrivals: tuple[ArrivalProcess, ...]

    def __post_init__(self):
        B = np.array(self.link_matrix)
        if B.ndim != 2:
            raise ValueError("link_matrix must be 2-dimensional")
        if not np.all(B == np.asarray(B, dtype=np.int64)):
            raise ValueError("link_matrix entries must be integers")
        object.__setattr__(self, "link_matrix", _frozen_array(B, np.int64))

        C = np.array(self.constituency)
        if C.ndim != 2 or C.shape[1] != self.m:
            raise ValueError("constituency must be r x m")
        if not np.isin(C, (0, 1)).all():
            raise ValueError("constituency entries must be 0 or 1")
        object.__setattr__(self, "constituency", _frozen_array(C, np.int64))

        P = np.array(self.transition, dtype=np.float64)
        if P.ndim != 2 or P.shape[0] != P.shape[1]:
            raise ValueError("transition must be square")
        if np.any(P < 0.0):
            raise ValueError("transition entries must be nonnegative")
        colsums = P.sum(axis=0)
        if np.any(np.abs(colsums - 1.0) > _COLSUM_TOL):
            raise ValueError(
                f"transition columns must each sum to 1 within {_COLSUM_TOL}; got {colsums}"
            )
        object.__setattr__(self, "transition", _frozen_array(P, np.float64))

        W = np.array(self.success_weights, dtype=np.float64)
        if W.ndim != 2 or W.shape != (P.shape[0], self.m):
            raise ValueError("success_weights must be p x m (one diagonal per channel state)")
        if np.any(W < 0.0) or np.any(W > 1.0):
            raise ValueError("success probabilities must lie in [0, 1]")
        object.__setattr__(self, "success_weights", _frozen_array(W, np.float64))

        arrivals = tuple(self.arrivals)
        if len(arrivals) != self.n:
            raise ValueError(f"need {self.n} arrival processes, got {len(arrivals)}")
        if not all(isinstance(a, ArrivalProcess) for a in arrivals):
            raise TypeError("arrivals must be ArrivalProcess instances")
        object.__setattr__(self, "arrivals", arrivals)

    @property
    def n(self) -> int:
        """Buffer count."""
        return self.link_matrix.shape[0]

    @property
    def m(self) -> int:
        """Link count."""
        return self.link_matrix.shape[1]

    @property
    def p(self) -> int:
        """Channel-state count."""
        return self.transition.shape[0]

    @cached_property
    def link_matrix_minus(self) -> np.ndarray:
        """Link matrix with positive entries zeroed (worst case over successes)."""
        return _frozen_array(np.minimum(self.link_matrix, 0), np.int64)

    @cached_property
    def _transition_cdfs(self) -> np.ndarray:
        """Column-wise cumulative sums of the transition matrix."""
        return _frozen_array(np.cumsum(self.transition, axis=0), np.float64)

    def success_diagonal(self, sigma: int) -> np.ndarray:
        """Success-probability diagonal of channel state sigma (1-based)."""
        if not 1 <= sigma <= self.p:
            raise ValueError(f"channel state {sigma} out of range 1..{self.p}")
        return self.success_weights[sigma - 1]

    def mean_rates(self, t: int | None = None) -> np.ndarray:
        """Arrival-rate vector: schedule-active rates at slot t, or long-run means."""
        if t is None:
            return np.array([a.mean_rate for a in self.arrivals])
        return np.array([a.rate_at(t) for a in self.arrivals])


@dataclass(frozen=True)
class QueueState:
    """Queue vector, current channel state (1-based), and slot counter."""

    q: np.ndarray
    sigma: int
    t: int = 0

    def __post_init__(self):
        q = np.asarray(self.q)
        if q.ndim != 1:
            raise ValueError("queue vector must be 1-dimensional")
        if q.dtype != np.int64 and not np.all(q == q.astype(np.int64)):
            raise ValueError("queue entries must be integers")
        if np.any(q < 0):
            raise ValueError(f"queues must stay nonnegative, got {q}")
        object.__setattr__(self, "q", _frozen_array(q, np.int64))
        if self.sigma < 1:
            raise ValueError("sigma is a 1-based state index")


@dataclass(frozen=True)
class SlotRealization:
    """Random outcomes of one slot: link successes, arrivals, next channel state."""

    link_success: np.ndarray
    arrivals: np.ndarray
    next_sigma: int

    def __post_init__(self):
        s = np.asarray(self.link_success)
        if not ((s == 0) | (s == 1)).all():
            raise ValueError("link_success entries must be 0 or 1")
        object.__setattr__(self, "link_success", _frozen_array(s, np.int64))
        object.__setattr__(self, "arrivals", _frozen_array(self.arrivals, np.int64))


def _check_control(u, m: int) -> np.ndarray:
    u = np.asarray(u)
    if u.shape != (m,):
        raise ValueError(f"control must have shape ({m},), got {u.shape}")
    if not ((u == 0) | (u == 1)).all():
        raise ValueError("control entries must be 0 or 1")
    return u.astype(np.int64)


def is_admissible(q, u, spec: NetworkSpec) -> bool:
    """Whether control u may be applied at queue vector q.

    Requires ``constituency @ u <= 1`` and nonnegativity of the next queue
    vector under the minus-clamped link matrix.  The clamp makes the check
    robust: each realized column is either the full column or zero, both of
    which dominate the clamped column element-wise, so a control passing this
    check keeps queues nonnegative for every success pattern.
    """
    q = np.asarray(q)
    if q.shape != (spec.n,):
        raise ValueError(f"queue vector must have shape ({spec.n},), got {q.shape}")
    u = _check_control(u, spec.m)
    if np.any(spec.constituency @ u > 1):
        return False
    return bool(np.all(q + spec.link_matrix_minus @ u >= 0))


def _draw_slot(spec: NetworkSpec, t: int, sigma: int,
               rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray, int]:
    """Shared drawing routine behind realize_slot and the simulation loop."""
    arrivals = np.zeros(spec.n, dtype=np.int64)
    for i, proc in enumerate(spec.arrivals):
        if rng.random() < proc.probability_at(t):
            arrivals[i] = proc.weight
    weights = spec.success_weights[sigma - 1]
    success = np.zeros(spec.m, dtype=np.int64)
    for j in range(spec.m):
        if rng.random() < weights[j]:
            success[j] = 1
    cdf = spec._transition_cdfs[:, sigma - 1]
    idx = int(np.searchsorted(cdf, rng.random(), side="right"))
    next_sigma = min(idx, spec.p - 1) + 1
    return arrivals, success, next_sigma


def realize_slot(state: QueueState, spec: NetworkSpec, rng: np.random.Generator) -> SlotRealization:
    """Draw one slot's randomness from `rng`.

    Draw order is fixed so that a given generator state always yields the same
    realization: arrivals by ascending buffer index, then link successes by
    ascending link index, then the channel transition.  Every draw consumes
    exactly one uniform, including degenerate ones (probability 0 or 1).
    """
    if not 1 <= state.sigma <= spec.p:
        raise ValueError(f"channel state {state.sigma} out of range 1..{spec.p}")
    arrivals, success, next_sigma = _draw_slot(spec, state.t, state.sigma, rng)
    return SlotRealization(link_success=success, arrivals=arrivals, next_sigma=next_sigma)


def step(state: QueueState, u, realization: SlotRealization, spec: NetworkSpec) -> QueueState:
    """Advance one slot: apply the realized link moves and arrivals.

    The control must be admissible at ``state.q``; an inadmissible control is
    a contract violation and raises instead of being clamped.
    """
    u = _check_control(u, spec.m)
    if not is_admissible(state.q, u, spec):
        raise ValueError(f"control {u.tolist()} is not admissible at q={state.q.tolist()}")
    realized = spec.link_matrix * realization.link_success[np.newaxis, :]
    q_next = state.q + realized @ u + realization.arrivals
    return QueueState(q=q_next, sigma=realization.next_sigma, t=state.t + 1)
