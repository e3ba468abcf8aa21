"""Box counting on graphs: greedy ball covering, exact small-graph oracles,
N_L curves and log-log slope fits.

Convention: a box for scale ``L`` is a ball of radius ``L // 2``, so every box
has diameter at most ``L``. Ties between equally good centers go to the
smallest node id, which makes every curve a pure function of the graph.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy import stats

from . import kernels
from .errors import DegenerateRange, TooLarge, TooSmall
from .graph import ColoredDigraph, diameter_bounds

BRUTE_FORCE_MAX_NODES = 24
REFERENCE_DIR = Path(__file__).parent / "data" / "reference"


@dataclass(frozen=True)
class Cover:
    count: int
    box_of: np.ndarray  # box index per node
    centers: np.ndarray
    radius: int


def _init_keys(g, radius, profile):
    if profile is not None and radius < profile.shape[1]:
        return profile[:, radius]
    indptr, indices = g.csr
    return kernels.ball_profile(indptr, indices, radius)[:, radius]


def vgbc_cover(g: ColoredDigraph, L: int, profile=None) -> Cover:
    """Volume-greedy ball covering at scale ``L``.

    ``profile`` is an optional ball-size table from ``kernels.ball_profile``
    reused across scales.
    """
    if L < 1:
        raise ValueError("L must be >= 1")
    r = L // 2
    indptr, indices = g.csr
    if r == 0:
        ids = np.arange(g.num_nodes, dtype=np.int32)
        return Cover(g.num_nodes, ids, ids.copy(), 0)
    count, box_of, centers = kernels.vgbc(indptr, indices, r, _init_keys(g, r, profile))
    return Cover(int(count), np.asarray(box_of), np.asarray(centers), r)


def distance_matrix(g: ColoredDigraph) -> np.ndarray:
    indptr, indices = g.csr
    return np.array([kernels.bfs(indptr, indices, s) for s in range(g.num_nodes)])


def _maximal_cliques(nbr, n):
    """Bron-Kerbosch with pivoting over int bitmasks."""
    out = []
    stack = [(0, (1 << n) - 1, 0)]
    while stack:
        r, p, x = stack.pop()
        if not p and not x:
            out.append(r)
            continue
        pu = p | x
        pivot = max(_bits(pu), key=lambda u: bin(p & nbr[u]).count("1"))
        for v in _bits(p & ~nbr[pivot]):
            bit = 1 << v
            stack.append((r | bit, p & nbr[v], x & nbr[v]))
            p &= ~bit
            x |= bit
    return out


def _bits(mask):
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


def brute_force_cover(g: ColoredDigraph, L: int) -> int:
    """Exact minimum number of node sets of diameter < ``L`` covering the graph.

    Distances are those of the whole graph. Exponential; test oracle only.
    """
    n = g.num_nodes
    if n > BRUTE_FORCE_MAX_NODES:
        raise TooLarge(f"brute-force covering is limited to {BRUTE_FORCE_MAX_NODES} nodes")
    d = distance_matrix(g)
    nbr = [sum(1 << v for v in range(n) if v != u and d[u, v] < L) for u in range(n)]
    cliques = sorted(_maximal_cliques(nbr, n), key=lambda c: -bin(c).count("1"))
    by_node = [[c for c in cliques if c >> u & 1] for u in range(n)]
    full = (1 << n) - 1
    best = n

    def search(covered, used):
        nonlocal best
        if covered == full:
            best = min(best, used)
            return
        if used + 1 >= best:
            return
        u = (~covered & full & -(~covered & full)).bit_length() - 1
        for c in by_node[u]:
            search(covered | c, used + 1)

    search(0, 0)
    return best


def greedy_packing(g: ColoredDigraph, L: int) -> int:
    """Nodes taken in id order, keeping those at distance > ``L`` from all kept."""
    indptr, indices = g.csr
    blocked = np.zeros(g.num_nodes, dtype=bool)
    count = 0
    for v in range(g.num_nodes):
        if blocked[v]:
            continue
        count += 1
        dist = kernels.bfs(indptr, indices, v)
        blocked |= (dist >= 0) & (dist <= L)
    return count


# ----------------------------------------------------------------------------- curves


@dataclass(frozen=True)
class CoverCurve:
    L: np.ndarray
    N: np.ndarray  # after the monotone repair
    num_nodes: int
    num_arcs: int
    diameter: int
    raw: np.ndarray = field(default=None)  # greedy counts before the repair
    repaired: bool = False

    @property
    def points(self):
        return list(zip(self.L.tolist(), self.N.tolist()))

    @property
    def fraction(self) -> np.ndarray:
        return self.N / self.num_nodes


def nl_curve(g: ColoredDigraph, L_values, diam=None) -> CoverCurve:
    """Greedy box counts for each scale. Scales at or above the diameter use one
    box (the whole graph); counts are made non-increasing by a running minimum."""
    Ls = np.array(sorted(set(int(L) for L in L_values)), dtype=np.int64)
    if Ls.size == 0 or Ls[0] < 1:
        raise ValueError("scales must be positive integers")
    if diam is None:
        diam = diameter_bounds(g).value
    radii = sorted({int(L) // 2 for L in Ls if L < diam})
    profile = None
    if radii:
        indptr, indices = g.csr
        profile = kernels.ball_profile(indptr, indices, radii[-1])
    by_radius = {r: vgbc_cover(g, 2 * r + 1 if r else 1, profile).count for r in radii}
    raw = np.array([1 if L >= diam else by_radius[int(L) // 2] for L in Ls], dtype=np.int64)
    fixed = np.minimum.accumulate(raw)
    return CoverCurve(Ls, fixed, g.num_nodes, g.num_arcs, int(diam), raw,
                      bool(np.any(fixed != raw)))


@dataclass(frozen=True)
class SlopeFit:
    slope: float
    intercept: float
    stderr: float
    r_squared: float
    range: tuple

    @property
    def dimension(self) -> float:
        return -self.slope


def loglog_slope(curve, lrange=None) -> SlopeFit:
    """OLS fit of ``log N`` against ``log L``.

    ``curve`` is a CoverCurve or a sequence of ``(L, N)`` pairs (``N`` may be a
    normalized count). ``lrange`` is an inclusive ``(lo, hi)`` filter on L.
    """
    if isinstance(curve, CoverCurve):
        L, N = curve.L.astype(float), curve.N.astype(float)
    else:
        arr = np.asarray(curve, dtype=float).reshape(-1, 2)
        L, N = arr[:, 0], arr[:, 1]
    keep = N > 0
    if lrange is not None:
        keep &= (L >= lrange[0]) & (L <= lrange[1])
    L, N = L[keep], N[keep]
    if np.unique(L).size < 3:
        raise DegenerateRange(f"need at least 3 distinct scales, got {np.unique(L).size}")
    x, y = np.log(L), np.log(N)
    if np.ptp(y) == 0:
        return SlopeFit(0.0, float(y[0]), 0.0, 1.0, (int(L.min()), int(L.max())))
    fit = stats.linregress(x, y)
    return SlopeFit(float(fit.slope), float(fit.intercept), float(fit.stderr),
                    float(fit.rvalue**2), (int(L.min()), int(L.max())))


@dataclass(frozen=True)
class BoxDimension:
    estimate: float
    stderr: float
    fit: SlopeFit
    curve: CoverCurve


MIN_DIAMETER = 8


def estimate_box_dimension(g: ColoredDigraph, lmin: int = 2, lmax=None) -> BoxDimension:
    """Box dimension from greedy covers over ``L = lmin..lmax`` (default
    ``lmax = diameter // 2``)."""
    diam = diameter_bounds(g).value
    if diam < MIN_DIAMETER:
        raise TooSmall(f"diameter {diam} < {MIN_DIAMETER}: too few scales")
    lmax = diam // 2 if lmax is None else int(lmax)
    curve = nl_curve(g, range(int(lmin), lmax + 1), diam)
    fit = loglog_slope(curve)
    return BoxDimension(fit.dimension, fit.stderr, fit, curve)


# ----------------------------------------------------------------------------- io


def write_curve_csv(curve: CoverCurve, path):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["L", "N_L", "N_L_over_V"])
        for L, N in curve.points:
            w.writerow([L, N, repr(N / curve.num_nodes)])


def read_curve_csv(path):
    with open(path, newline="", encoding="utf-8") as fh:
        return [(int(r["L"]), int(r["N_L"])) for r in csv.DictReader(fh)]


def write_curve_svg(curve: CoverCurve, fit: SlopeFit, path, title=None):
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(5, 4))
    ax.loglog(curve.L, curve.fraction, "o", ms=3, label="greedy cover")
    lo, hi = fit.range
    xs = np.array([lo, hi], dtype=float)
    ax.loglog(xs, np.exp(fit.intercept) * xs**fit.slope / curve.num_nodes, "-",
              label=f"slope {fit.slope:.4f} (dim {fit.dimension:.4f})")
    ax.set_xlabel("L")
    ax.set_ylabel("N_L / |V|")
    if title:
        ax.set_title(title)
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, format="svg")
    plt.close(fig)


def reference_curves(name: str):
    """Published normalized curves bundled with the package, one array of
    ``(L, N_L/|V|)`` rows per series."""
    path = REFERENCE_DIR / f"{name}.csv"
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.DictReader(fh))
    series = {}
    for r in rows:
        series.setdefault(int(r.get("series", 0)), []).append((int(r["L"]), float(r["N_L_over_V"])))
    return [np.array(series[k]) for k in sorted(series)]


def reference_names():
    return sorted(p.stem for p in REFERENCE_DIR.glob("*.csv"))


def mean_dimension(fits) -> tuple:
    """Mean and standard error of the dimension over several fits."""
    d = np.array([f.dimension for f in fits])
    se = d.std(ddof=1) / math.sqrt(d.size) if d.size > 1 else 0.0
    return float(d.mean()), float(se)
