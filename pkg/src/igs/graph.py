"""Colored directed graphs and their undirected metric.

Nodes are the dense integers ``0..num_nodes-1``. Arcs are kept in canonical
order (lexicographic by tail, then head). All distances ignore arc direction
and use unit weights.
"""
from __future__ import annotations

import json
import warnings
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from . import kernels
from .errors import (
    BadColorIndex,
    Disconnected,
    MultiEdge,
    SelfLoop,
    UnknownNode,
    ValidationError,
)

EXACT_DIAMETER_MAX_NODES = 50_000


class ColoredDigraph:
    """Immutable colored digraph with arcs sorted by (tail, head)."""

    def __init__(self, num_nodes, tails, heads, colors, num_colors, marks=None):
        tails = np.asarray(tails, dtype=np.int64)
        heads = np.asarray(heads, dtype=np.int64)
        colors = np.asarray(colors, dtype=np.int64)
        if not (tails.shape == heads.shape == colors.shape) or tails.ndim != 1:
            raise ValueError("tails, heads and colors must be 1-d arrays of equal length")
        order = np.lexsort((heads, tails))
        self.tails = tails[order]
        self.heads = heads[order]
        self.colors = colors[order]
        for a in (self.tails, self.heads, self.colors):
            a.setflags(write=False)
        self.num_nodes = int(num_nodes)
        self.num_colors = int(num_colors)
        self.marks = dict(marks or {})

    @classmethod
    def from_arcs(cls, arcs, num_colors, marks=None, num_nodes=None):
        arcs = list(arcs)
        if arcs:
            t, h, c = (np.array(x, dtype=np.int64) for x in zip(*arcs))
        else:
            t = h = c = np.empty(0, dtype=np.int64)
        if num_nodes is None:
            num_nodes = int(max(t.max(initial=-1), h.max(initial=-1))) + 1
        return cls(num_nodes, t, h, c, num_colors, marks)

    @property
    def num_arcs(self) -> int:
        return int(self.tails.shape[0])

    @property
    def arcs(self):
        return list(zip(self.tails.tolist(), self.heads.tolist(), self.colors.tolist()))

    def __len__(self):
        return self.num_nodes

    def __eq__(self, other):
        if not isinstance(other, ColoredDigraph):
            return NotImplemented
        return (
            self.num_nodes == other.num_nodes
            and self.num_colors == other.num_colors
            and self.marks == other.marks
            and np.array_equal(self.tails, other.tails)
            and np.array_equal(self.heads, other.heads)
            and np.array_equal(self.colors, other.colors)
        )

    def __hash__(self):
        return hash((self.num_nodes, self.num_colors, self.tails.tobytes(), self.heads.tobytes()))

    def __repr__(self):
        return (
            f"ColoredDigraph(nodes={self.num_nodes}, arcs={self.num_arcs}, "
            f"colors={self.num_colors}, marks={self.marks})"
        )

    @cached_property
    def csr(self):
        """``(indptr, indices)`` of the underlying undirected graph."""
        src = np.concatenate([self.tails, self.heads])
        dst = np.concatenate([self.heads, self.tails])
        order = np.argsort(src, kind="stable")
        indices = dst[order].astype(np.int32)
        counts = np.bincount(src, minlength=self.num_nodes)
        indptr = np.zeros(self.num_nodes + 1, dtype=np.int64)
        np.cumsum(counts, out=indptr[1:])
        return indptr, indices

    def degrees(self):
        return np.bincount(
            np.concatenate([self.tails, self.heads]), minlength=self.num_nodes
        )

    def to_dict(self):
        d = {"num_colors": self.num_colors, "arcs": [list(a) for a in self.arcs]}
        if self.marks:
            d["marks"] = dict(self.marks)
        return d

    @classmethod
    def from_dict(cls, d):
        marks = {str(k): int(v) for k, v in (d.get("marks") or {}).items()}
        return cls.from_arcs([tuple(a) for a in d["arcs"]], int(d["num_colors"]), marks)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), separators=(",", ":"))


@dataclass(frozen=True)
class RuleGraph:
    graph: ColoredDigraph
    a: int
    b: int

    def __post_init__(self):
        from .errors import RuleTooShort

        n = self.graph.num_nodes
        if not (0 <= self.a < n and 0 <= self.b < n):
            raise UnknownNode(self.a if not 0 <= self.a < n else self.b)
        if self.a == self.b:
            raise RuleTooShort("rule nodes A and B coincide")
        validate_graph(self.graph)
        if distance(self.graph, self.a, self.b) < 2:
            raise RuleTooShort(f"d(A,B) = {distance(self.graph, self.a, self.b)} < 2")

    @property
    def num_internal(self) -> int:
        return self.graph.num_nodes - 2


def validate_graph(g: ColoredDigraph) -> None:
    """Raise the first violated invariant (color range, self-loop, multi-edge,
    weak connectivity), carrying the offending arc or node."""
    bad = np.flatnonzero((g.colors < 1) | (g.colors > g.num_colors))
    if bad.size:
        raise BadColorIndex(g.arcs[bad[0]], g.num_colors)
    loops = np.flatnonzero(g.tails == g.heads)
    if loops.size:
        raise SelfLoop(g.arcs[loops[0]])
    if g.num_arcs and max(g.tails.max(), g.heads.max()) >= g.num_nodes:
        raise ValidationError("arc endpoint outside the node range")
    if g.num_arcs > 1:
        lo = np.minimum(g.tails, g.heads)
        hi = np.maximum(g.tails, g.heads)
        key = lo * g.num_nodes + hi
        order = np.argsort(key, kind="stable")
        dup = np.flatnonzero(np.diff(key[order]) == 0)
        if dup.size:
            i, j = order[dup[0]], order[dup[0] + 1]
            raise MultiEdge(g.arcs[i], g.arcs[j])
    if g.num_nodes == 0:
        raise ValidationError("graph has no nodes")
    indptr, indices = g.csr
    dist = kernels.bfs(indptr, indices, 0)
    missing = np.flatnonzero(dist < 0)
    if missing.size:
        raise Disconnected(int(missing[0]))


def _check_node(g, u):
    if not 0 <= u < g.num_nodes:
        raise UnknownNode(u)


def distances_from(g: ColoredDigraph, u: int) -> np.ndarray:
    _check_node(g, u)
    indptr, indices = g.csr
    return kernels.bfs(indptr, indices, int(u))


def distance(g: ColoredDigraph, u: int, v: int) -> int:
    """Undirected hop distance; -1 never occurs on validated graphs."""
    _check_node(g, v)
    return int(distances_from(g, u)[v])


def eccentricity(g: ColoredDigraph, u: int) -> int:
    return int(distances_from(g, u).max())


@dataclass(frozen=True)
class DiameterResult:
    lower: int
    upper: int
    method: str

    @property
    def exact(self) -> bool:
        return self.lower == self.upper

    @property
    def value(self) -> int:
        return self.lower


def _midpoint(da, db, d):
    on_path = np.flatnonzero((da + db == d) & (da == d // 2))
    return int(on_path[0])


def diameter_bounds(g: ColoredDigraph, max_bfs=None) -> DiameterResult:
    """Diameter with a certificate.

    Up to ``EXACT_DIAMETER_MAX_NODES`` nodes every eccentricity is computed.
    Above that, a 4-sweep start followed by fringe-by-fringe eccentricity
    checks (iFUB) tightens ``lower``/``upper`` until they meet or ``max_bfs``
    searches have been spent.
    """
    indptr, indices = g.csr
    n = g.num_nodes
    if n <= EXACT_DIAMETER_MAX_NODES and max_bfs is None:
        d = int(kernels.eccentricities(indptr, indices, np.arange(n)).max())
        return DiameterResult(d, d, "all-sources")

    budget = max_bfs if max_bfs is not None else 10 * int(np.sqrt(n)) + 100
    used = 0

    def sweep(s):
        nonlocal used
        used += 1
        return kernels.bfs(indptr, indices, int(s))

    start = int(np.argmax(g.degrees()))
    lower = 0
    for _ in range(2):
        d0 = sweep(start)
        a = int(np.argmax(d0))
        da = sweep(a)
        b = int(np.argmax(da))
        db = sweep(b)
        lower = max(lower, int(da[b]))
        start = _midpoint(da, db, int(da[b]))
    du = sweep(start)
    level = int(du.max())
    upper = 2 * level
    while upper > lower and used < budget:
        fringe = np.flatnonzero(du == level)
        take = fringe[: max(0, budget - used)]
        ecc = kernels.eccentricities(indptr, indices, take)
        used += take.size
        if ecc.size:
            lower = max(lower, int(ecc.max()))
        if take.size < fringe.size:
            break
        if lower > 2 * (level - 1):
            upper = lower
            break
        upper = 2 * (level - 1)
        level -= 1
    upper = max(upper, lower)
    return DiameterResult(lower, upper, "ifub")


def diameter(g: ColoredDigraph) -> int:
    res = diameter_bounds(g)
    if not res.exact:
        warnings.warn(
            f"diameter bound not tight: {res.lower} <= diam <= {res.upper}", RuntimeWarning
        )
    return res.value


def chi(g: ColoredDigraph) -> np.ndarray:
    """Per-color arc counts (index j-1 holds color j)."""
    return np.bincount(g.colors - 1, minlength=g.num_colors).astype(np.int64)


def density(g: ColoredDigraph):
    from fractions import Fraction

    n = g.num_nodes
    if n < 2:
        raise ValidationError("density needs at least two nodes")
    return Fraction(g.num_arcs, n * (n - 1))
