"""Closed-loop simulation, stability classification, and rate-region sweeps.

Randomness is counter based: slot t of a run with seed s draws from a
Philox generator keyed by (s, t), so a slot's arrivals, link successes and
channel transition depend only on (seed, slot, draw index) and never on the
controls.  Different policies simulated with the same seed therefore face
bit-identical stochastic environments, which is what makes paired
comparisons meaningful.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .model import ArrivalProcess, NetworkSpec, QueueState, _draw_slot
from .policy import Controller, PolicyConfig

__all__ = [
    "SimulationTrace",
    "StabilityVerdict",
    "SweepPoint",
    "classify_stability",
    "compare_policies",
    "run",
    "slot_generator",
    "sweep_region",
]


def slot_generator(seed: int, t: int) -> np.random.Generator:
    """Independent generator for slot t of the run with the given seed."""
    key = np.array([seed, t], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


class _SlotStream:
    """Re-keys one Philox generator per slot instead of constructing anew.

    Produces bit-identical draws to ``slot_generator(seed, t)`` at a fraction
    of the construction cost; used by the simulation loop.
    """

    def __init__(self, seed: int):
        self._bg = np.random.Philox(key=np.array([seed, 0], dtype=np.uint64))
        self.generator = np.random.Generator(self._bg)
        self._template = self._bg.state
        self._template["buffer_pos"] = 4
        self._template["has_uint32"] = 0
        self._template["uinteger"] = 0
        self._template["state"]["counter"][:] = 0

    def rekey(self, t: int) -> np.random.Generator:
        self._template["state"]["key"][1] = t
        self._bg.state = self._template
        return self.generator


@dataclass(frozen=True)
class SimulationTrace:
    """Per-slot record of one closed-loop run.

    ``queues`` has T+1 rows: row t is the queue vector at the start of slot t,
    row T the final state.  ``sigmas`` likewise.  Controls, successes and
    arrivals have one row per simulated slot.
    """

    queues: np.ndarray
    sigmas: np.ndarray
    controls: np.ndarray
    link_success: np.ndarray
    arrivals: np.ndarray
    seed: int

    @property
    def length(self) -> int:
        return self.controls.shape[0]

    @property
    def avg_queue(self) -> np.ndarray:
        """Per-buffer time average over the recorded slots."""
        return self.queues[: self.length].mean(axis=0)

    @property
    def final_queue(self) -> np.ndarray:
        return self.queues[self.length]

    @property
    def total_departures(self) -> int:
        """Packets that left the system: inflow minus queue growth."""
        inflow = int(self.arrivals.sum())
        growth = int(self.queues[self.length].sum() - self.queues[0].sum())
        return inflow - growth


@dataclass(frozen=True)
class StabilityVerdict:
    slope: float
    stable: bool


@dataclass(frozen=True)
class SweepPoint:
    stable_fraction: float
    stable: bool


def run(spec: NetworkSpec, policy_cfg: PolicyConfig, T: int, seed: int,
        q0=None, sigma0: int = 1) -> SimulationTrace:
    """Simulate T slots under one policy.

    Slot order: decide, realize the slot's randomness, then advance the
    state.  Deterministic in (spec, policy_cfg, T, seed, q0, sigma0).
    """
    if T < 1:
        raise ValueError("T must be at least 1")
    n, m = spec.n, spec.m
    controller = Controller(spec, policy_cfg)
    init = QueueState(q=np.zeros(n, dtype=np.int64) if q0 is None else q0,
                      sigma=sigma0, t=0)
    q, sigma = init.q, init.sigma

    queues = np.zeros((T + 1, n), dtype=np.int64)
    sigmas = np.zeros(T + 1, dtype=np.int64)
    controls = np.zeros((T, m), dtype=np.int8)
    successes = np.zeros((T, m), dtype=np.int8)
    arrivals = np.zeros((T, n), dtype=np.int64)

    stream = _SlotStream(seed)
    B = spec.link_matrix
    B_minus = spec.link_matrix_minus
    C = spec.constituency
    for t in range(T):
        queues[t] = q
        sigmas[t] = sigma
        u = controller._decide(q, sigma, t)
        arr, success, next_sigma = _draw_slot(spec, t, sigma, stream.rekey(t))
        controls[t] = u
        successes[t] = success
        arrivals[t] = arr
        # same update and admissibility contract as model.step, inlined
        if (C @ u > 1).any() or (q + B_minus @ u < 0).any():
            raise ValueError(f"control {u.tolist()} is not admissible at q={q.tolist()}")
        q = q + B @ (success * u) + arr
        sigma = next_sigma
    queues[T] = q
    sigmas[T] = sigma

    for a in (queues, sigmas, controls, successes, arrivals):
        a.setflags(write=False)
    return SimulationTrace(queues=queues, sigmas=sigmas, controls=controls,
                           link_success=successes, arrivals=arrivals, seed=seed)


def classify_stability(trace: SimulationTrace, window_fraction: float = 0.5,
                       slope_threshold: float = 0.05) -> StabilityVerdict:
    """Least-squares drift of the total queue over the trailing window.

    The verdict is stable when the fitted slope (packets per slot) stays at
    or below the threshold.  Traces shorter than 200 slots say nothing about
    drift and are rejected.
    """
    L = trace.length
    if L < 200:
        raise ValueError(f"trace too short to classify ({L} slots, need >= 200)")
    if not 0.0 < window_fraction <= 1.0:
        raise ValueError("window_fraction must lie in (0, 1]")
    total = trace.queues[:L].sum(axis=1).astype(np.float64)
    start = L - max(2, int(round(L * window_fraction)))
    x = np.arange(start, L, dtype=np.float64)
    slope = float(np.polyfit(x, total[start:], 1)[0])
    return StabilityVerdict(slope=slope, stable=slope <= slope_threshold)


def _with_rates(spec: NetworkSpec, a1: float, a2: float) -> NetworkSpec:
    """Clone a network with the first two buffers' arrival rates replaced.

    Each buffer keeps its configured weight; the Bernoulli probability is set
    to rate / weight, which must stay within [0, 1].
    """
    if spec.n < 2:
        raise ValueError("rate sweeps need at least two buffers")
    new = list(spec.arrivals)
    for idx, rate in ((0, a1), (1, a2)):
        proc = new[idx]
        weight = proc.weight if proc.weight > 0 else 1
        prob = rate / weight
        if not 0.0 <= prob <= 1.0 + 1e-12:
            raise ValueError(
                f"rate {rate} not realizable with weight {weight} on buffer {idx + 1}")
        new[idx] = ArrivalProcess(probability=min(prob, 1.0), weight=weight)
    return replace(spec, arrivals=tuple(new))


def sweep_region(spec_template: NetworkSpec, policy_cfg: PolicyConfig, grid, T: int,
                 seeds, q0=None, sigma0: int = 1, window_fraction: float = 0.5,
                 slope_threshold: float = 0.05,
                 stable_fraction: float = 0.8) -> dict[tuple[float, float], SweepPoint]:
    """Stability map over a grid of arrival-rate pairs.

    Every grid point is simulated once per seed; the point counts as stable
    when at least ``stable_fraction`` of the seeds are classified stable.
    """
    seeds = list(seeds)
    if not seeds:
        raise ValueError("need at least one seed")
    result: dict[tuple[float, float], SweepPoint] = {}
    for a1, a2 in grid:
        spec = _with_rates(spec_template, a1, a2)
        stable = 0
        for seed in seeds:
            trace = run(spec, policy_cfg, T, seed, q0=q0, sigma0=sigma0)
            verdict = classify_stability(trace, window_fraction, slope_threshold)
            stable += int(verdict.stable)
        frac = stable / len(seeds)
        result[(float(a1), float(a2))] = SweepPoint(stable_fraction=frac,
                                                    stable=frac >= stable_fraction)
    return result


def compare_policies(spec: NetworkSpec, cfgs, T: int, seeds, q0=None,
                     sigma0: int = 1) -> list[dict]:
    """Seed-averaged per-buffer queue averages, one row per (policy, buffer).

    The same seed list is reused for every policy, so each policy sees the
    same arrival and channel realizations (paired comparison).
    """
    seeds = list(seeds)
    rows = []
    for cfg in cfgs:
        means = np.zeros(spec.n)
        for seed in seeds:
            trace = run(spec, cfg, T, seed, q0=q0, sigma0=sigma0)
            means += trace.avg_queue
        means /= len(seeds)
        for buf in range(spec.n):
            rows.append({
                "policy": cfg.kind,
                "horizon": cfg.horizon,
                "buffer": buf + 1,
                "avg_queue": float(means[buf]),
            })
    return rows
