"""Local search algorithms.

All three searchers see the graph only through an OracleSession: an
opaque start handle, unit-cost queries, and free target recognition.
The climbing search runs three phases:

  1. a random walk (with a mixing warm-up) until the current vertex's
     degree reaches start_degree_threshold, capped at half the budget;
  2. repeated moves to a uniformly random member of the current vertex's
     branch_width highest-degree neighbors (previous vertex excluded),
     until the degree reaches climb_stop_threshold;
  3. a random walk restricted to neighbors of degree at least
     walk_restrict_threshold until the target is recognized.

The ball-growing search repeatedly adds the highest-degree frontier vertex
(ties by ascending handle) and charges one unit per vertex added.  The
plain random walk is the baseline.
"""
from __future__ import annotations

import heapq
import json
import math
from dataclasses import dataclass, field

from . import params
from .errors import ConfigError, ParameterError
from .oracle import LocalOracle


@dataclass
class DcaConfig:
    """Thresholds and budget for the climbing search.

    All quantities are precomputed functions of (n, m); the algorithm
    itself never queries global graph properties.
    """

    omega: float
    start_degree_threshold: float
    climb_stop_threshold: float
    walk_restrict_threshold: float
    branch_width: int
    budget: int
    warmup_steps: int

    @classmethod
    def default(cls, n: int, m: int, budget_constant: float = 20.0, **overrides):
        """Default configuration for an n-vertex, m-edges-per-vertex graph.

        Any field can be overridden by keyword; remaining fields keep
        their default formulas.
        """
        omega = overrides.get("omega", params.default_omega(n))
        lnn = math.log(n) if n > 1 else 0.0
        budget = max(1, math.ceil(budget_constant * omega * (lnn**3.5 if lnn > 0 else 1.0)))
        climb = params.climb_stop_threshold(n)
        fields = {
            "omega": omega,
            "start_degree_threshold": params.start_degree_threshold(n, omega),
            "climb_stop_threshold": climb,
            "walk_restrict_threshold": min(params.walk_restrict_threshold(n), climb),
            "branch_width": max(1, m // 2),
            "budget": budget,
            "warmup_steps": max(0, math.ceil(math.log2(n))) if n > 1 else 0,
        }
        unknown = set(overrides) - set(fields)
        if unknown:
            raise ConfigError(f"unknown config overrides: {sorted(unknown)}")
        fields.update(overrides)
        config = cls(**fields)
        config.validate()
        return config

    def validate(self):
        if self.branch_width < 1:
            raise ConfigError(f"branch_width must be >= 1, got {self.branch_width}")
        if self.budget <= 0:
            raise ConfigError(f"budget must be positive, got {self.budget}")
        if not 0 < self.walk_restrict_threshold <= self.climb_stop_threshold:
            raise ConfigError(
                "need 0 < walk_restrict_threshold <= climb_stop_threshold, got "
                f"{self.walk_restrict_threshold} and {self.climb_stop_threshold}"
            )
        if self.warmup_steps < 0:
            raise ConfigError("warmup_steps must be >= 0")


@dataclass
class TraceEvent:
    phase: int
    step: int
    handle: int
    degree: int | None
    cost: int


@dataclass
class SearchTrace:
    """Per-run record of one search."""

    algorithm: str
    success: bool
    start_handle: int
    total_cost: int
    budget: int
    phase1_steps: int = 0
    climb_sequence: list[int] = field(default_factory=list)
    phase3_steps: int = 0
    fallback_steps: int = 0
    events: list[TraceEvent] | None = None
    transcript: list | None = None

    @property
    def T(self) -> int:
        return len(self.climb_sequence)


def _start(session, rng, start):
    if start is None:
        return session.uniform_start(rng)
    return session.oracle._check_handle(start)


def dca_search(
    oracle: LocalOracle,
    config: DcaConfig,
    rng,
    *,
    start=None,
    skip_phase1: bool = False,
    audit: bool = False,
    record_events: bool = False,
) -> SearchTrace:
    """Run the three-phase climbing search.

    Args:
      oracle: oracle over a graph with m >= 2.
      config: thresholds and budget (see DcaConfig.default).
      rng: random source for start, walk and branch choices.
      start: fixed start handle instead of a uniform draw (testing hook).
      skip_phase1: begin the climb directly at the start vertex, the
        conjecture variant; the trace is tagged "dca_no_phase1".
      audit: record a query transcript on the trace.
      record_events: record per-step events on the trace.

    Returns:
      SearchTrace; success=False with total_cost <= budget when the
      budget runs out (not an error).
    """
    config.validate()
    if oracle.graph.m < 2:
        raise ConfigError("climbing search needs m >= 2")
    ses = oracle.session(audit=audit)
    events: list[TraceEvent] | None = [] if record_events else None
    algorithm = "dca_no_phase1" if skip_phase1 else "dca"

    def emit(phase, step, handle, degree=None):
        if events is not None:
            events.append(TraceEvent(phase, step, handle, degree, ses.cost))

    def finish(success, start_h, p1, climb, p3, fallbacks):
        return SearchTrace(
            algorithm=algorithm,
            success=success,
            start_handle=start_h,
            total_cost=ses.cost,
            budget=config.budget,
            phase1_steps=p1,
            climb_sequence=climb,
            phase3_steps=p3,
            fallback_steps=fallbacks,
            events=events,
            transcript=ses.transcript,
        )

    budget = config.budget
    h = _start(ses, rng, start)
    emit(0, 0, h)
    if ses.is_target(h):
        return finish(True, h, 0, [h], 0, 0)

    fallbacks = 0
    p1_steps = 0
    current = h
    known_degree = None

    if not skip_phase1:
        # Phase 1: warm-up walk, then accept the first vertex at the
        # start threshold.  Capped at half the budget; on cap, accept
        # wherever the walk stands.
        cap = budget // 2
        while True:
            if ses.cost + 1 > cap:
                break
            current = ses.random_neighbor(current, rng)
            p1_steps += 1
            if ses.is_target(current):
                return finish(True, h, p1_steps, [current], 0, 0)
            d = None
            past_warmup = p1_steps >= config.warmup_steps
            if past_warmup and ses.cost + 1 <= cap:
                d = ses.degree(current)
            emit(1, p1_steps, current, d)
            if d is not None and d >= config.start_degree_threshold:
                known_degree = d
                break
            if past_warmup and d is None:
                break

    # Phase 2: climb by degree.
    v = current
    prev = None
    climb = [v]
    d = known_degree
    t = 0
    while True:
        if d is None:
            if ses.cost + 1 > budget:
                return finish(False, h, p1_steps, climb, 0, fallbacks)
            d = ses.degree(v)
        emit(2, t, v, d)
        if d >= config.climb_stop_threshold:
            break
        if ses.cost + 1 > budget:
            return finish(False, h, p1_steps, climb, 0, fallbacks)
        top = ses.top_k_neighbors(v, config.branch_width, exclude=prev)
        if top:
            nxt = top[int(rng.integers(0, len(top)))]
        else:
            # no distinct neighbor besides prev (loops-only corner);
            # take one unrestricted step to keep moving
            if ses.cost + 1 > budget:
                return finish(False, h, p1_steps, climb, 0, fallbacks)
            nxt = ses.random_neighbor(v, rng)
            fallbacks += 1
        prev, v = v, nxt
        t += 1
        climb.append(v)
        if ses.is_target(v):
            return finish(True, h, p1_steps, climb, 0, fallbacks)
        d = None

    # Phase 3: restricted random walk.
    p3_steps = 0
    while True:
        if ses.cost + 1 > budget:
            return finish(False, h, p1_steps, climb, p3_steps, fallbacks)
        nxt = ses.random_neighbor_above(v, config.walk_restrict_threshold, rng)
        if nxt is None:
            if ses.cost + 1 > budget:
                return finish(False, h, p1_steps, climb, p3_steps, fallbacks)
            nxt = ses.random_neighbor(v, rng)
            fallbacks += 1
        v = nxt
        p3_steps += 1
        emit(3, p3_steps, v)
        if ses.is_target(v):
            return finish(True, h, p1_steps, climb, p3_steps, fallbacks)


def bbckl_search(
    oracle: LocalOracle,
    budget: int,
    rng,
    *,
    start=None,
    audit: bool = False,
    record_events: bool = False,
) -> SearchTrace:
    """Grow a ball by repeatedly adding the max-degree frontier vertex.

    Each added vertex costs one unit (its neighbor enumeration); the
    budget caps additions.  climb_sequence records the insertion order.
    """
    if budget <= 0:
        raise ConfigError(f"budget must be positive, got {budget}")
    ses = oracle.session(audit=audit)
    events: list[TraceEvent] | None = [] if record_events else None
    h = _start(ses, rng, start)
    members = [h]
    in_ball = {h}
    pushed = {h}
    if events is not None:
        events.append(TraceEvent(2, 0, h, None, ses.cost))

    def finish(success):
        return SearchTrace(
            algorithm="bbckl",
            success=success,
            start_handle=h,
            total_cost=ses.cost,
            budget=budget,
            climb_sequence=members,
            events=events,
            transcript=ses.transcript,
        )

    if ses.is_target(h):
        return finish(True)

    frontier: list[tuple[int, int]] = []

    def expand(v):
        handles, degrees = ses.all_neighbors(v)
        for nh, nd in zip(handles.tolist(), degrees.tolist()):
            if nh not in pushed:
                pushed.add(nh)
                heapq.heappush(frontier, (-int(nd), int(nh)))

    expand(h)
    while frontier:
        _, cand = heapq.heappop(frontier)
        if cand in in_ball:
            continue
        members.append(cand)
        in_ball.add(cand)
        if events is not None:
            events.append(TraceEvent(2, len(members) - 1, cand, None, ses.cost))
        if ses.is_target(cand):
            return finish(True)
        if ses.cost + 1 > budget:
            return finish(False)
        expand(cand)
    return finish(False)


def random_walk_search(
    oracle: LocalOracle,
    budget: int,
    rng,
    *,
    start=None,
    audit: bool = False,
    record_events: bool = False,
) -> SearchTrace:
    """Baseline: unrestricted random walk until the target or the budget."""
    if budget <= 0:
        raise ConfigError(f"budget must be positive, got {budget}")
    ses = oracle.session(audit=audit)
    events: list[TraceEvent] | None = [] if record_events else None
    h = _start(ses, rng, start)
    if events is not None:
        events.append(TraceEvent(1, 0, h, None, ses.cost))

    def finish(success, steps):
        return SearchTrace(
            algorithm="walk",
            success=success,
            start_handle=h,
            total_cost=ses.cost,
            budget=budget,
            phase1_steps=steps,
            events=events,
            transcript=ses.transcript,
        )

    if ses.is_target(h):
        return finish(True, 0)
    v = h
    steps = 0
    while ses.cost + 1 <= budget:
        v = ses.random_neighbor(v, rng)
        steps += 1
        if events is not None:
            events.append(TraceEvent(1, steps, v, None, ses.cost))
        if ses.is_target(v):
            return finish(True, steps)
    return finish(False, steps)


def climb_ratios(trace: SearchTrace, index_resolver) -> list[float]:
    """Consecutive index ratios along the climb, analysis side.

    Args:
      trace: a trace whose climb_sequence is nonempty.
      index_resolver: callable handle -> true vertex index.

    Returns:
      [v_2/v_1, ..., v_T/v_{T-1}]; empty when T < 2.
    """
    seq = trace.climb_sequence
    if len(seq) < 2:
        return []
    idx = [index_resolver(hh) for hh in seq]
    return [idx[k + 1] / idx[k] for k in range(len(idx) - 1)]


def write_trace_events(trace: SearchTrace, path, index_resolver=None) -> None:
    """Newline-delimited event export; requires record_events=True."""
    if trace.events is None:
        raise ParameterError("trace was recorded without events")
    with open(path, "w") as fh:
        for ev in trace.events:
            fh.write(
                json.dumps(
                    {
                        "phase": ev.phase,
                        "step": ev.step,
                        "handle": ev.handle,
                        "index": None if index_resolver is None else index_resolver(ev.handle),
                        "degree": ev.degree,
                        "cost": ev.cost,
                    },
                    sort_keys=True,
                )
                + "\n"
            )


def trace_summary(trace: SearchTrace) -> dict:
    return {
        "algorithm": trace.algorithm,
        "success": trace.success,
        "start_handle": trace.start_handle,
        "total_cost": trace.total_cost,
        "budget": trace.budget,
        "phase1_steps": trace.phase1_steps,
        "T": trace.T,
        "phase3_steps": trace.phase3_steps,
        "fallback_steps": trace.fallback_steps,
    }
