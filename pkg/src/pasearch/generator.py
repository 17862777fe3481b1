"""Preferential attachment multigraphs, built two equivalent ways.

The sequential construction grows a virtual endpoint array: edge j of the
process draws a uniform position r among the 2j-1 possibilities (2(j-1)
existing endpoints plus one fresh self-slot), so an existing vertex is hit
with probability proportional to its current degree and the new vertex
closes a self-loop with probability 1/(2j-1).

The continuous construction draws mn+1 unit exponentials, places interval
boundaries at square roots of normalized partial sums, and reads edge i's
left endpoint off a uniform point in (0, R_i].  Both yield the same graph
distribution; the second also exposes the latent block sums eta used by
the analysis layer.

Vertices are labeled 1..n.  A vertex's degree counts a self-loop twice and
parallel edges with multiplicity, so degrees always sum to exactly 2mn.
"""
from __future__ import annotations

import struct
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .errors import ConsistencyError, ParameterError
from .rng import (
    STREAM_ELL,
    STREAM_SEQUENTIAL,
    STREAM_UNIFORM,
    STREAM_XI,
    check_seed,
    stream_rng,
)

MAX_EDGES = 2**30

_HEADER = struct.Struct("<4sBBHQQQ")
_GRAPH_MAGIC = b"PAG1"
_XI_HEADER = struct.Struct("<4sQQQ")
_XI_MAGIC = b"PAX1"
_CONSTRUCTION_TAGS = {"sequential": 0, "continuous": 1, "uniform": 2}
_TAG_CONSTRUCTIONS = {v: k for k, v in _CONSTRUCTION_TAGS.items()}


@dataclass(eq=False)
class PAGraph:
    """A realized multigraph stored as the flat array of left choices.

    left[k] is the 1-based left choice of edge k+1; edge k+1 belongs to
    vertex k // m + 1, and a left choice equal to its owner is a self-loop.
    Degrees and the owner-by-left-choice transpose are derived lazily.
    """

    n: int
    m: int
    seed: int
    construction: str
    left: np.ndarray
    _degrees: np.ndarray | None = field(default=None, repr=False)
    _right_indptr: np.ndarray | None = field(default=None, repr=False)
    _right_owners: np.ndarray | None = field(default=None, repr=False)

    @property
    def degrees(self) -> np.ndarray:
        """Degree of every vertex: m owner slots plus left-slot hits."""
        if self._degrees is None:
            counts = np.bincount(self.left, minlength=self.n + 1)[1:]
            self._degrees = (counts + self.m).astype(np.int64)
        return self._degrees

    def left_choices(self, t: int) -> np.ndarray:
        if not 1 <= t <= self.n:
            raise ParameterError(f"vertex {t} outside 1..{self.n}")
        return self.left[(t - 1) * self.m : t * self.m]

    def _right_csr(self):
        if self._right_indptr is None:
            self._right_indptr, self._right_owners = _kernels.build_right_csr(
                self.left, self.n, self.m
            )
        return self._right_indptr, self._right_owners

    def left_slot_owners(self, v: int) -> np.ndarray:
        """Owners of every edge whose left choice is v (self-loops included)."""
        if not 1 <= v <= self.n:
            raise ParameterError(f"vertex {v} outside 1..{self.n}")
        indptr, owners = self._right_csr()
        return owners[indptr[v - 1] : indptr[v]]

    def right_neighbors(self, v: int) -> np.ndarray:
        """Vertices t > v having v among their left choices, with multiplicity."""
        row = self.left_slot_owners(v)
        return row[row > v]


@dataclass(eq=False)
class ContinuousRealization:
    """Latent variables behind one continuous-construction graph.

    Indexing conventions: xi[k] is the (k+1)-th exponential draw;
    upsilon[N] is the N-th partial sum (upsilon[0] = 0); R[i] the i-th
    normalized boundary (R[0] = 0); W[j] = R[m j]; w[j-1] and eta[j-1]
    belong to vertex j; left_points[i-1] is edge i's uniform point.
    """

    n: int
    m: int
    seed: int
    xi: np.ndarray
    upsilon: np.ndarray
    R: np.ndarray
    W: np.ndarray
    w: np.ndarray
    eta: np.ndarray
    left_points: np.ndarray


def _check_parameters(n, m):
    if n is None or m is None or int(n) < 1 or int(m) < 1:
        raise ParameterError(f"need n >= 1 and m >= 1, got n={n}, m={m}")
    n, m = int(n), int(m)
    if n * m > MAX_EDGES:
        raise ParameterError(f"n*m = {n * m} exceeds supported maximum {MAX_EDGES}")
    return n, m


def generate_sequential(n: int, m: int, seed: int) -> PAGraph:
    """Sample a preferential attachment graph by the endpoint-array process.

    Args:
      n: vertex count.
      m: edges per vertex.
      seed: uint64 seed; the draw stream is a named substream of it.

    Returns:
      PAGraph with construction tag "sequential".
    """
    n, m = _check_parameters(n, m)
    seed = check_seed(seed)
    rng = stream_rng(seed, STREAM_SEQUENTIAL)
    mn = n * m
    highs = np.arange(1, mn + 1, dtype=np.uint32)
    np.multiply(highs, 2, out=highs)
    r = rng.integers(1, highs, dtype=np.uint32, endpoint=False)
    left = _kernels.resolve_left_choices(r, m)
    return PAGraph(n=n, m=m, seed=seed, construction="sequential", left=left)


def generate_uniform_attachment(n: int, m: int, seed: int) -> PAGraph:
    """Control model: each left choice uniform on {1..t}, no degree bias.

    Used as a negative control by the generator-equivalence tests; not a
    preferential attachment sampler.
    """
    n, m = _check_parameters(n, m)
    seed = check_seed(seed)
    rng = stream_rng(seed, STREAM_UNIFORM)
    owners = np.arange(n * m, dtype=np.uint32) // m + 1
    left = rng.integers(1, owners, dtype=np.uint32, endpoint=True)
    return PAGraph(n=n, m=m, seed=seed, construction="uniform", left=left)


def _derive_continuous(n, m, seed, xi):
    mn = n * m
    prefix = _kernels.compensated_cumsum(xi)
    upsilon = np.empty(mn + 2, dtype=np.float64)
    upsilon[0] = 0.0
    upsilon[1:] = prefix
    R = np.sqrt(upsilon[: mn + 1] / upsilon[mn + 1])
    W = np.ascontiguousarray(R[::m])
    w = np.diff(W)
    eta = np.diff(upsilon[0 : mn + 1 : m])

    rng_ell = stream_rng(seed, STREAM_ELL)
    u = rng_ell.random(mn)
    ell = (1.0 - u) * R[1:]
    np.maximum(ell, np.finfo(np.float64).tiny, out=ell)
    left = np.searchsorted(W, ell, side="left").astype(np.uint32)

    graph = PAGraph(n=n, m=m, seed=seed, construction="continuous", left=left)
    realization = ContinuousRealization(
        n=n, m=m, seed=seed, xi=xi, upsilon=upsilon, R=R, W=W, w=w, eta=eta,
        left_points=ell,
    )
    return graph, realization


def generate_continuous(n: int, m: int, seed: int):
    """Sample a graph via the interval model, keeping the latent variables.

    Returns:
      (PAGraph, ContinuousRealization); the graph marginal matches
      generate_sequential in distribution.
    """
    n, m = _check_parameters(n, m)
    seed = check_seed(seed)
    rng_xi = stream_rng(seed, STREAM_XI)
    xi = rng_xi.standard_exponential(n * m + 1)
    return _derive_continuous(n, m, seed, xi)


def sample_exponential_sum(m: int, rng: np.random.Generator, size=None):
    """Draw the sum of m independent mean-one exponentials (one block weight).

    With size=None returns a float; otherwise an array of independent draws.
    """
    if int(m) < 1:
        raise ParameterError(f"need m >= 1, got {m}")
    out = rng.standard_gamma(int(m), size=size)
    return float(out) if size is None else out


def interval_lookup(W, p: float) -> int:
    """Index j of the half-open interval (W_{j-1}, W_j] containing p.

    Args:
      W: boundary array W_0 = 0 < W_1 < ... < W_n.
      p: point with 0 < p <= W_n.
    """
    W = np.asarray(W, dtype=np.float64)
    if not 0.0 < p <= W[-1]:
        raise ParameterError(f"point {p} outside (0, {W[-1]}]")
    return int(np.searchsorted(W, p, side="left"))


def validate_graph(graph: PAGraph) -> None:
    """Check the structural identities; raise ConsistencyError on violation."""
    n, m, left = graph.n, graph.m, graph.left
    if left.shape != (n * m,):
        raise ConsistencyError(f"left array has shape {left.shape}, want ({n * m},)")
    owners = np.arange(n * m, dtype=np.int64) // m + 1
    if left.size and not (left >= 1).all():
        raise ConsistencyError("left choice below 1")
    if left.size and not (left <= owners).all():
        raise ConsistencyError("left choice above its owner")
    deg = graph.degrees
    if int(deg.sum()) != 2 * m * n:
        raise ConsistencyError(f"degree sum {int(deg.sum())} != {2 * m * n}")
    if (deg < m).any():
        raise ConsistencyError("vertex with degree below m")
    counts = np.bincount(left, minlength=n + 1)[1:]
    if not (deg == counts + m).all():
        raise ConsistencyError("degrees inconsistent with left-slot counts")


def _storage_dtype(n):
    for dtype in (np.uint8, np.uint16, np.uint32):
        if n <= np.iinfo(dtype).max:
            return np.dtype(dtype).newbyteorder("<")
    return np.dtype(np.uint64).newbyteorder("<")


def write_graph(graph: PAGraph, path) -> None:
    """Serialize to the binary graph format (fixed header + packed choices)."""
    dtype = _storage_dtype(graph.n)
    header = _HEADER.pack(
        _GRAPH_MAGIC,
        _CONSTRUCTION_TAGS[graph.construction],
        dtype.itemsize,
        0,
        graph.n,
        graph.m,
        graph.seed,
    )
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(graph.left.astype(dtype).tobytes())


def read_graph(path) -> PAGraph:
    with open(path, "rb") as fh:
        magic, tag, width, _, n, m, seed = _HEADER.unpack(fh.read(_HEADER.size))
        if magic != _GRAPH_MAGIC:
            raise ParameterError(f"not a graph file: bad magic {magic!r}")
        if tag not in _TAG_CONSTRUCTIONS:
            raise ParameterError(f"unknown construction tag {tag}")
        dtype = {1: np.uint8, 2: np.uint16, 4: np.uint32, 8: np.uint64}.get(width)
        if dtype is None:
            raise ParameterError(f"unsupported entry width {width}")
        raw = fh.read(n * m * width)
    left = np.frombuffer(raw, dtype=np.dtype(dtype).newbyteorder("<"))
    if left.shape != (n * m,):
        raise ParameterError("truncated graph file")
    return PAGraph(
        n=n, m=m, seed=seed, construction=_TAG_CONSTRUCTIONS[tag],
        left=left.astype(np.uint32),
    )


def write_edgelist(graph: PAGraph, path) -> None:
    """Plain-text export: one "u v" line per edge, u = left choice, v = owner."""
    owners = np.arange(graph.n * graph.m, dtype=np.int64) // graph.m + 1
    with open(path, "w") as fh:
        for u, v in zip(graph.left.tolist(), owners.tolist()):
            fh.write(f"{u} {v}\n")


def write_realization(realization: ContinuousRealization, path) -> None:
    """Side file holding the latent exponentials; the rest is re-derivable."""
    header = _XI_HEADER.pack(
        _XI_MAGIC, realization.n, realization.m, realization.seed
    )
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(realization.xi.astype("<f8").tobytes())


def read_realization(path):
    """Load a side file and re-derive the graph plus all latent arrays.

    Derived quantities are recomputed with the active backend, so files are
    portable across backends up to the documented last-ulp difference in
    the prefix sums.
    """
    with open(path, "rb") as fh:
        magic, n, m, seed = _XI_HEADER.unpack(fh.read(_XI_HEADER.size))
        if magic != _XI_MAGIC:
            raise ParameterError(f"not a realization file: bad magic {magic!r}")
        raw = fh.read((n * m + 1) * 8)
    xi = np.frombuffer(raw, dtype="<f8").astype(np.float64)
    if xi.shape != (n * m + 1,):
        raise ParameterError("truncated realization file")
    return _derive_continuous(n, m, seed, xi)
