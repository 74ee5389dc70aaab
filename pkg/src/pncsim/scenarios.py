"""Built-in networks and JSON scenario files.

Two networks ship with the package:

* ``builtin:generic`` - two buffers, three mutually exclusive links with
  integer packet moves, a single always-on channel state.  Its third link
  drains the first buffer fast but needs the second buffer nonempty, which
  is exactly the structure a one-step policy fails to exploit.
* ``builtin:natural`` - a three-buffer relay with two mutually exclusive
  channels and a two-state (good/bad) channel chain in which the first link
  only works in the good state.

A scenario file is a JSON document with the keys n, m, p, link_matrix,
constituency, transition, success_weights, arrivals, initial_queue and
initial_sigma; see :func:`scenario_to_dict` for the exact shape.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace

import numpy as np

from .model import ArrivalProcess, NetworkSpec

__all__ = [
    "Scenario",
    "ScenarioError",
    "builtin_names",
    "generic_scenario",
    "load_scenario",
    "natural_scenario",
    "resolve_scenario",
    "save_scenario",
    "scenario_to_dict",
]

BUILTIN_PREFIX = "builtin:"


class ScenarioError(ValueError):
    """A scenario file or name could not be turned into a network."""


@dataclass(frozen=True)
class Scenario:
    name: str
    spec: NetworkSpec
    initial_queue: np.ndarray
    initial_sigma: int

    def __post_init__(self):
        q = np.array(self.initial_queue, dtype=np.int64)
        if q.shape != (self.spec.n,) or np.any(q < 0):
            raise ScenarioError(f"initial_queue must be {self.spec.n} nonnegative integers")
        q.setflags(write=False)
        object.__setattr__(self, "initial_queue", q)
        if not 1 <= self.initial_sigma <= self.spec.p:
            raise ScenarioError(
                f"initial_sigma {self.initial_sigma} out of range 1..{self.spec.p}")


def generic_scenario(rate1: float | None = None, rate2: float | None = None,
                     third_column: tuple[int, int] = (-5, -1)) -> Scenario:
    """Two-buffer network with three exclusive links.

    Defaults: buffer 1 receives weight-3 arrivals with probability 0.8
    (rate 2.4), buffer 2 receives nothing.  Explicit rates are converted to
    Bernoulli probabilities at the fixed weights (3 and 1).  ``third_column``
    allows the variant whose third link consumes two packets of buffer 2.
    """
    link_matrix = [[-2, -1, third_column[0]], [0, 1, third_column[1]]]
    arr1 = (ArrivalProcess(probability=0.8, weight=3) if rate1 is None
            else ArrivalProcess(probability=rate1 / 3.0, weight=3))
    arr2 = (ArrivalProcess(probability=0.0, weight=1) if rate2 is None
            else ArrivalProcess(probability=rate2, weight=1))
    spec = NetworkSpec(
        link_matrix=link_matrix,
        constituency=[[1, 1, 1]],
        transition=[[1.0]],
        success_weights=[[1.0, 1.0, 1.0]],
        arrivals=(arr1, arr2),
    )
    return Scenario(name="generic", spec=spec,
                    initial_queue=np.zeros(2, dtype=np.int64), initial_sigma=1)


def natural_scenario(alternating: bool = False, phase_offset: int = 0) -> Scenario:
    """Three-buffer relay behind a two-state good/bad channel chain.

    The stationary variant feeds buffers 1 and 3 at rates 0.5 and 0.9, which
    overloads the shared slot budget.  The alternating variant switches both
    sources between high and low phases (rates 0.675/0.075 every 100 slots
    and 0.76/0.0 every 250 slots, starting high) so the load becomes
    stabilizable on average.
    """
    if alternating:
        arrivals = (
            ArrivalProcess(probability=0.375, weight=1,
                           schedule=((100, 0.675), (100, 0.075)),
                           phase_offset=phase_offset),
            ArrivalProcess(probability=0.0, weight=1),
            ArrivalProcess(probability=0.38, weight=1,
                           schedule=((250, 0.76), (250, 0.0)),
                           phase_offset=phase_offset),
        )
    else:
        arrivals = (
            ArrivalProcess(probability=0.5, weight=1),
            ArrivalProcess(probability=0.0, weight=1),
            ArrivalProcess(probability=0.9, weight=1),
        )
    spec = NetworkSpec(
        link_matrix=[[-3, 0], [3, -1], [0, -1]],
        constituency=[[1, 1]],
        transition=[[0.1, 0.2], [0.9, 0.8]],
        success_weights=[[1.0, 1.0], [0.0, 1.0]],
        arrivals=arrivals,
    )
    name = "natural-alternating" if alternating else "natural"
    return Scenario(name=name, spec=spec,
                    initial_queue=np.zeros(3, dtype=np.int64), initial_sigma=1)


def builtin_names() -> tuple[str, ...]:
    return (BUILTIN_PREFIX + "generic", BUILTIN_PREFIX + "natural")


def with_rates(scenario: Scenario, rate1: float | None, rate2: float | None) -> Scenario:
    """Override the first two buffers' arrival rates, keeping their weights."""
    new = list(scenario.spec.arrivals)
    for idx, rate in ((0, rate1), (1, rate2)):
        if rate is None:
            continue
        weight = new[idx].weight if new[idx].weight > 0 else 1
        prob = rate / weight
        if not 0.0 <= prob <= 1.0 + 1e-12:
            raise ScenarioError(
                f"rate {rate} not realizable with weight {weight} on buffer {idx + 1}")
        new[idx] = ArrivalProcess(probability=min(prob, 1.0), weight=weight)
    return replace(scenario, spec=replace(scenario.spec, arrivals=tuple(new)))


# ---------------------------------------------------------------------------
# JSON serialization


def scenario_to_dict(scenario: Scenario) -> dict:
    spec = scenario.spec
    arrivals = []
    for a in spec.arrivals:
        entry: dict = {"probability": a.probability, "weight": a.weight}
        if a.schedule is not None:
            entry["schedule"] = [[d, p] for d, p in a.schedule]
            if a.phase_offset:
                entry["phase_offset"] = a.phase_offset
        arrivals.append(entry)
    return {
        "name": scenario.name,
        "n": spec.n,
        "m": spec.m,
        "p": spec.p,
        "link_matrix": spec.link_matrix.tolist(),
        "constituency": spec.constituency.tolist(),
        "transition": spec.transition.tolist(),
        "success_weights": spec.success_weights.tolist(),
        "arrivals": arrivals,
        "initial_queue": scenario.initial_queue.tolist(),
        "initial_sigma": scenario.initial_sigma,
    }


def save_scenario(scenario: Scenario, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(scenario_to_dict(scenario), fh, indent=2)
        fh.write("\n")


def _want(doc: dict, key: str, where: str):
    if key not in doc:
        raise ScenarioError(f"{where}: missing key {key!r}")
    return doc[key]


def _int_matrix(value, rows: int, cols: int, where: str) -> list:
    if (not isinstance(value, list) or len(value) != rows
            or any(not isinstance(r, list) or len(r) != cols for r in value)):
        raise ScenarioError(f"{where}: expected a {rows} x {cols} matrix")
    for i, row in enumerate(value):
        for j, entry in enumerate(row):
            if isinstance(entry, bool) or not isinstance(entry, (int, float)):
                raise ScenarioError(f"{where}[{i}][{j}]: expected a number, got {entry!r}")
    return value


def scenario_from_dict(doc: dict, where: str = "scenario") -> Scenario:
    if not isinstance(doc, dict):
        raise ScenarioError(f"{where}: expected a JSON object")
    n = _want(doc, "n", where)
    m = _want(doc, "m", where)
    p = _want(doc, "p", where)
    for key, val in (("n", n), ("m", m), ("p", p)):
        if not isinstance(val, int) or val < 1:
            raise ScenarioError(f"{where}.{key}: expected a positive integer, got {val!r}")

    link = _int_matrix(_want(doc, "link_matrix", where), n, m, f"{where}.link_matrix")
    cons = _want(doc, "constituency", where)
    if not isinstance(cons, list) or any(not isinstance(r, list) or len(r) != m for r in cons):
        raise ScenarioError(f"{where}.constituency: expected rows of length {m}")
    trans = _int_matrix(_want(doc, "transition", where), p, p, f"{where}.transition")
    weights = _int_matrix(_want(doc, "success_weights", where), p, m,
                          f"{where}.success_weights")

    raw_arrivals = _want(doc, "arrivals", where)
    if not isinstance(raw_arrivals, list) or len(raw_arrivals) != n:
        raise ScenarioError(f"{where}.arrivals: expected a list of {n} entries")
    arrivals = []
    for i, entry in enumerate(raw_arrivals):
        spot = f"{where}.arrivals[{i}]"
        if not isinstance(entry, dict):
            raise ScenarioError(f"{spot}: expected an object")
        try:
            schedule = entry.get("schedule")
            if schedule is not None:
                schedule = tuple((d, p_) for d, p_ in schedule)
            arrivals.append(ArrivalProcess(
                probability=float(entry.get("probability", 0.0)),
                weight=int(entry.get("weight", 1)),
                schedule=schedule,
                phase_offset=int(entry.get("phase_offset", 0)),
            ))
        except (TypeError, ValueError) as exc:
            raise ScenarioError(f"{spot}: {exc}") from exc

    try:
        spec = NetworkSpec(
            link_matrix=link,
            constituency=cons,
            transition=trans,
            success_weights=weights,
            arrivals=tuple(arrivals),
        )
    except (TypeError, ValueError) as exc:
        raise ScenarioError(f"{where}: {exc}") from exc

    q0 = _want(doc, "initial_queue", where)
    sigma0 = _want(doc, "initial_sigma", where)
    if not isinstance(sigma0, int):
        raise ScenarioError(f"{where}.initial_sigma: expected an integer")
    try:
        return Scenario(name=str(doc.get("name", "scenario")), spec=spec,
                        initial_queue=q0, initial_sigma=sigma0)
    except (TypeError, ValueError) as exc:
        raise ScenarioError(f"{where}: {exc}") from exc


def load_scenario(path) -> Scenario:
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise ScenarioError(f"cannot read scenario {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"{path}:{exc.lineno}:{exc.colno}: invalid JSON: {exc.msg}") from exc
    return scenario_from_dict(doc, where=str(path))


def resolve_scenario(name: str, alternating: bool = False,
                     phase_offset: int = 0) -> Scenario:
    """Builtin name or file path to a Scenario.

    The alternating arrival schedules only exist for the natural builtin.
    """
    if name == BUILTIN_PREFIX + "generic":
        if alternating:
            raise ScenarioError("alternating arrivals are only defined for builtin:natural")
        return generic_scenario()
    if name == BUILTIN_PREFIX + "natural":
        return natural_scenario(alternating=alternating, phase_offset=phase_offset)
    if name.startswith(BUILTIN_PREFIX):
        raise ScenarioError(f"unknown builtin scenario {name!r}; try {builtin_names()}")
    if alternating:
        raise ScenarioError("alternating arrivals are only defined for builtin:natural")
    return load_scenario(name)
