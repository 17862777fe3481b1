"""Local-access view of a graph through opaque handles.

Algorithms see vertices only as permuted integer handles and interact
through unit-cost queries; recognizing the target and reading a returned
list are free.  Per-vertex neighbor rows (distinct neighbors ordered by
degree descending, handle ascending) are materialized lazily and cached on
the oracle, so many sessions over one graph share the work.

Audit mode records a transcript per session; `verify_locality` replays it
and enforces that a session issuing q unit-cost queries visits at most
q + 1 distinct handles, all of which were previously returned (or were the
session's start).
"""
from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .errors import ConsistencyError, HandleError, ParameterError
from .generator import PAGraph
from .rng import STREAM_HANDLE, check_seed, stream_rng


@dataclass(frozen=True)
class AuditRecord:
    kind: str
    subject: int | None
    arg_handles: tuple
    params: tuple
    results: tuple
    cost: int
    flags: tuple = ()


class LocalOracle:
    """Shared read-only query surface over one immutable PAGraph."""

    def __init__(self, graph: PAGraph, handle_seed: int):
        self.graph = graph
        self.handle_seed = check_seed(handle_seed)
        rng = stream_rng(self.handle_seed, STREAM_HANDLE)
        self._perm = rng.permutation(graph.n)  # handle -> vertex-1
        self._inv = np.empty(graph.n, dtype=np.int64)  # vertex-1 -> handle
        self._inv[self._perm] = np.arange(graph.n)
        self._rows: dict[int, tuple[np.ndarray, np.ndarray]] = {}
        self._target_handle = int(self._inv[0])

    # index <-> handle resolution; analysis-side only, never used by searches
    def vertex_of(self, handle: int) -> int:
        self._check_handle(handle)
        return int(self._perm[handle]) + 1

    def handle_of(self, vertex: int) -> int:
        if not 1 <= vertex <= self.graph.n:
            raise HandleError(f"vertex {vertex} outside 1..{self.graph.n}")
        return int(self._inv[vertex - 1])

    def _check_handle(self, handle) -> int:
        h = handle
        if not isinstance(h, (int, np.integer)) or not 0 <= h < self.graph.n:
            raise HandleError(f"invalid handle {handle!r}")
        return int(h)

    def _row(self, vertex: int):
        """Distinct neighbors of vertex as (handles, degrees), sorted by
        (degree desc, handle asc)."""
        row = self._rows.get(vertex)
        if row is None:
            g = self.graph
            own = g.left_choices(vertex)
            rights = g.left_slot_owners(vertex)
            nbrs = np.unique(np.concatenate([own[own != vertex], rights[rights != vertex]]))
            if nbrs.size:
                degs = g.degrees[nbrs.astype(np.int64) - 1]
                handles = self._inv[nbrs.astype(np.int64) - 1]
                order = np.lexsort((handles, -degs))
                row = (handles[order], degs[order])
            else:
                row = (np.empty(0, dtype=np.int64), np.empty(0, dtype=np.int64))
            self._rows[vertex] = row
        return row

    def session(self, audit: bool = False) -> "OracleSession":
        return OracleSession(self, audit=audit)


class OracleSession:
    """One search's private cost counter and (optional) audit transcript."""

    def __init__(self, oracle: LocalOracle, audit: bool = False):
        self.oracle = oracle
        self.cost = 0
        self.transcript: list[AuditRecord] | None = [] if audit else None

    def _record(self, kind, subject=None, arg_handles=(), params=(), results=(), flags=()):
        if self.transcript is not None:
            self.transcript.append(
                AuditRecord(
                    kind=kind,
                    subject=subject,
                    arg_handles=tuple(int(a) for a in arg_handles),
                    params=tuple(params),
                    results=tuple(int(r) for r in results),
                    cost=self.cost,
                    flags=tuple(flags),
                )
            )

    def uniform_start(self, rng) -> int:
        """Uniformly random start handle; experiment plumbing, costs nothing."""
        h = int(rng.integers(0, self.oracle.graph.n))
        self._record("start", results=(h,))
        return h

    def degree(self, v) -> int:
        v = self.oracle._check_handle(v)
        self.cost += 1
        d = int(self.oracle.graph.degrees[self.oracle._perm[v]])
        self._record("degree", subject=v, params=(d,))
        return d

    def top_k_neighbors(self, v, k: int, exclude=None) -> list[int]:
        v = self.oracle._check_handle(v)
        if k < 1:
            raise ParameterError(f"k must be >= 1, got {k}")
        if exclude is not None:
            exclude = self.oracle._check_handle(exclude)
        self.cost += 1
        handles, _ = self.oracle._row(self.oracle.vertex_of(v))
        prefix = handles[: k + 1].tolist()
        if exclude is not None and exclude in prefix:
            prefix.remove(exclude)
        out = [int(h) for h in prefix[:k]]
        flags = ("k_exceeds_m",) if k > self.oracle.graph.m else ()
        self._record(
            "top_k_neighbors",
            subject=v,
            arg_handles=() if exclude is None else (exclude,),
            params=(k,),
            results=out,
            flags=flags,
        )
        return out

    def all_neighbors(self, v):
        """Full distinct-neighbor row as (handles, degrees) arrays, one unit.

        The row is the same fixed total order top_k_neighbors reads, with
        the neighbors' degrees alongside, mirroring a degree-sorted
        adjacency list that is walked once.
        """
        v = self.oracle._check_handle(v)
        self.cost += 1
        handles, degrees = self.oracle._row(self.oracle.vertex_of(v))
        self._record("all_neighbors", subject=v, results=handles.tolist())
        return handles, degrees

    def random_neighbor(self, v, rng) -> int:
        v = self.oracle._check_handle(v)
        self.cost += 1
        g = self.oracle.graph
        vertex = self.oracle.vertex_of(v)
        d = int(g.degrees[vertex - 1])
        slot = int(rng.integers(0, d))
        if slot < g.m:
            u = int(g.left[(vertex - 1) * g.m + slot])
        else:
            u = int(g.left_slot_owners(vertex)[slot - g.m])
        out = self.oracle.handle_of(u)
        self._record("random_neighbor", subject=v, results=(out,))
        return out

    def random_neighbor_above(self, v, threshold, rng):
        v = self.oracle._check_handle(v)
        self.cost += 1
        handles, degrees = self.oracle._row(self.oracle.vertex_of(v))
        qualifying = int(np.searchsorted(-degrees, -threshold, side="right"))
        if qualifying == 0:
            self._record(
                "random_neighbor_above", subject=v, params=(threshold,), results=()
            )
            return None
        out = int(handles[int(rng.integers(0, qualifying))])
        self._record(
            "random_neighbor_above", subject=v, params=(threshold,), results=(out,)
        )
        return out

    def is_target(self, v) -> bool:
        v = self.oracle._check_handle(v)
        hit = v == self.oracle._target_handle
        self._record("is_target", subject=v, params=(hit,))
        return hit

    def stationary_weight(self, v) -> float:
        v = self.oracle._check_handle(v)
        g = self.oracle.graph
        w = float(g.degrees[self.oracle._perm[v]]) / (2.0 * g.m * g.n)
        self._record("stationary_weight", subject=v, params=(w,))
        return w


_UNIT_COST_KINDS = {
    "degree",
    "top_k_neighbors",
    "all_neighbors",
    "random_neighbor",
    "random_neighbor_above",
}


def verify_locality(transcript) -> dict:
    """Replay a transcript and enforce the locality contract.

    Raises ConsistencyError if any queried handle was not previously
    returned (one initial handle is free), or if the number of distinct
    queried handles exceeds unit-cost queries + 1.

    Returns:
      Summary dict with the query count and distinct handles touched.
    """
    seen: set[int] = set()
    touched: set[int] = set()
    unit_queries = 0
    for k, rec in enumerate(transcript):
        if rec.kind in _UNIT_COST_KINDS:
            unit_queries += 1
        inputs = list(rec.arg_handles)
        if rec.subject is not None:
            inputs.append(rec.subject)
        for h in inputs:
            touched.add(h)
            if h not in seen:
                # only the very first handle, before anything was
                # returned, may appear out of thin air (a given start)
                if seen:
                    raise ConsistencyError(
                        f"record {k} ({rec.kind}): handle {h} was never returned"
                    )
                seen.add(h)
        seen.update(rec.results)
    if len(touched) > unit_queries + 1:
        raise ConsistencyError(
            f"{len(touched)} distinct handles touched with only "
            f"{unit_queries} unit-cost queries"
        )
    return {"unit_queries": unit_queries, "distinct_handles": len(touched)}


def write_transcript(transcript, path) -> None:
    """Newline-delimited transcript export for offline auditing."""
    with open(path, "w") as fh:
        for rec in transcript:
            fh.write(
                json.dumps(
                    {
                        "kind": rec.kind,
                        "subject": rec.subject,
                        "arg_handles": list(rec.arg_handles),
                        "params": list(rec.params),
                        "results": list(rec.results),
                        "cost": rec.cost,
                        "flags": list(rec.flags),
                    },
                    sort_keys=True,
                )
                + "\n"
            )


def read_transcript(path) -> list[AuditRecord]:
    out = []
    with open(path) as fh:
        for line in fh:
            d = json.loads(line)
            out.append(
                AuditRecord(
                    kind=d["kind"],
                    subject=d["subject"],
                    arg_handles=tuple(d["arg_handles"]),
                    params=tuple(d["params"]),
                    results=tuple(d["results"]),
                    cost=d["cost"],
                    flags=tuple(d["flags"]),
                )
            )
    return out
