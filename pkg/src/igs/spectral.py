"""Deterministic-case matrix theory.

Builds the arc matrix, the simple A-B path chi sets of every rule, the path
matrix family and its minimal spectral radius, and the resulting dimension
``log rho(M) / log rho_min``. Matrices are plain integer numpy arrays.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    NonPrimitiveInput,
    NonPrimitiveMember,
    NotConverged,
    NotDeterministic,
    NotPrimitiveSystem,
    PathExplosion,
    TooLarge,
)
from .graph import RuleGraph, chi

RHO_TOL = 1e-10
RHO_MAX_ITER = 100_000
TIE_TOL = 1e-9


def build_arc_matrix(spec) -> np.ndarray:
    if not spec.is_deterministic:
        raise NotDeterministic("arc matrix needs one rule graph per color")
    return np.array([chi(spec.rule(c).graph) for c in range(1, spec.num_colors + 1)])


# ----------------------------------------------------------------------------- paths


@dataclass(frozen=True)
class PathSet:
    paths: tuple  # node sequences A..B
    chis: tuple  # chi tuple per path, aligned with ``paths``

    @property
    def chi_set(self):
        """Distinct chi vectors in first-seen order."""
        return tuple(dict.fromkeys(self.chis))


def enumerate_ab_paths(rule: RuleGraph, limit: int = 1_000_000) -> PathSet:
    """All simple A-B paths of the underlying undirected rule graph (DFS)."""
    g = rule.graph
    adj = [[] for _ in range(g.num_nodes)]
    for t, h, c in g.arcs:
        adj[t].append((h, c))
        adj[h].append((t, c))
    for nbrs in adj:
        nbrs.sort()
    lam = g.num_colors

    paths, chis = [], []
    on_path = [False] * g.num_nodes
    on_path[rule.a] = True
    node_stack = [rule.a]
    color_stack = []  # color of the arc entering node_stack[k + 1]
    count = [0] * lam
    iters = [iter(adj[rule.a])]
    while iters:
        step = next(iters[-1], None)
        if step is None:
            iters.pop()
            on_path[node_stack.pop()] = False
            if color_stack:
                count[color_stack.pop() - 1] -= 1
            continue
        v, c = step
        if on_path[v]:
            continue
        if v == rule.b:
            count[c - 1] += 1
            paths.append(tuple(node_stack) + (v,))
            chis.append(tuple(count))
            count[c - 1] -= 1
            if len(paths) > limit:
                raise PathExplosion(f"more than {limit} simple A-B paths")
            continue
        on_path[v] = True
        node_stack.append(v)
        color_stack.append(c)
        count[c - 1] += 1
        iters.append(iter(adj[v]))
    return PathSet(tuple(paths), tuple(chis))


def path_chi_sets(spec, limit: int = 1_000_000):
    """``V_i`` for each color of a deterministic spec."""
    if not spec.is_deterministic:
        raise NotDeterministic("path chi sets need one rule graph per color")
    return [enumerate_ab_paths(spec.rule(c), limit).chi_set for c in range(1, spec.num_colors + 1)]


@dataclass(frozen=True)
class MatrixFamily:
    members: tuple  # integer matrices
    provenance: tuple = field(default=())  # per member, the chi row chosen for each color

    def __len__(self):
        return len(self.members)


def build_path_matrix_family(spec, limit: int = 1_000_000) -> MatrixFamily:
    sets = path_chi_sets(spec, limit)
    members, prov = [], []
    for rows in itertools.product(*sets):
        members.append(np.array(rows, dtype=np.int64))
        prov.append(tuple(rows))
    return MatrixFamily(tuple(members), tuple(prov))


def family_from_matrices(mats) -> MatrixFamily:
    ms = tuple(np.asarray(m, dtype=np.int64) for m in mats)
    return MatrixFamily(ms, tuple(tuple(map(tuple, m.tolist())) for m in ms))


# ----------------------------------------------------------------------------- radii


def primitivity_exponent(m) -> int | None:
    """Smallest k <= (n-1)^2 + 1 with m^k entrywise positive, else None."""
    b = np.asarray(m) > 0
    n = b.shape[0]
    if b.ndim != 2 or b.shape[1] != n or n < 1:
        raise ValueError("square matrix expected")
    if np.any(np.asarray(m) < 0):
        return None
    p = b.copy()
    bi = b.astype(np.int64)
    for k in range(1, (n - 1) ** 2 + 2):
        if p.all():
            return k
        p = (p.astype(np.int64) @ bi) > 0
    return None


def is_primitive(m) -> bool:
    return primitivity_exponent(m) is not None


def spectral_radius_2x2(m) -> float:
    (a, b), (c, d) = np.asarray(m, dtype=float)
    tr, det = a + d, a * d - b * c
    disc = tr * tr - 4 * det
    if disc < 0:
        return math.sqrt(det)
    return (abs(tr) + math.sqrt(disc)) / 2


def perron(m, tol: float = RHO_TOL, max_iter: int = RHO_MAX_ITER):
    """Perron root and right Perron vector of a primitive matrix.

    Power iteration from the all-ones vector; stops once the Collatz-Wielandt
    bracket ``[min_i (Mx)_i/x_i, max_i (Mx)_i/x_i]``, which always contains the
    root, is narrower than ``tol``.
    """
    a = np.asarray(m, dtype=float)
    if not is_primitive(a):
        raise NonPrimitiveInput(f"{a.tolist()} is not primitive")
    x = np.ones(a.shape[0])
    for _ in range(max_iter):
        y = a @ x
        ratios = y / x
        lo, hi = ratios.min(), ratios.max()
        x = y / y.sum()
        if hi - lo <= tol:
            return 0.5 * (lo + hi), x
    raise NotConverged(f"power iteration did not converge in {max_iter} steps")


def spectral_radius(m, strict: bool = False, tol: float = RHO_TOL) -> float:
    a = np.asarray(m)
    if is_primitive(a):
        return perron(a, tol)[0]
    if not strict and a.shape == (2, 2):
        return spectral_radius_2x2(a)
    raise NonPrimitiveInput(f"{a.tolist()} is not primitive")


def collatz_wielandt_gap(m, v) -> float:
    r = (np.asarray(m, dtype=float) @ v) / v
    return float(r.max() - r.min())


@dataclass(frozen=True)
class RhoMin:
    value: float
    members: tuple
    indices: tuple
    radii: tuple


def rho_min(family: MatrixFamily) -> RhoMin:
    radii = []
    for k, m in enumerate(family.members):
        if not is_primitive(m):
            prov = family.provenance[k] if family.provenance else None
            raise NonPrimitiveMember(np.asarray(m).tolist(), prov)
        radii.append(spectral_radius(m))
    lo = min(radii)
    idx = tuple(k for k, r in enumerate(radii) if r - lo <= TIE_TOL)
    return RhoMin(lo, tuple(family.members[k] for k in idx), idx, tuple(radii))


def primitivity_report(spec):
    """Human-readable notes on non-primitive matrices of a system (no raising)."""
    notes = []
    if spec.is_deterministic:
        m = build_arc_matrix(spec)
        if not is_primitive(m):
            notes.append(f"arc matrix {m.tolist()} is not primitive")
        try:
            fam = build_path_matrix_family(spec)
        except PathExplosion:
            return notes
        bad = [p for m, p in zip(fam.members, fam.provenance) if not is_primitive(m)]
        if bad:
            notes.append(f"{len(bad)} path matrices are not primitive, e.g. {list(bad[0])}")
    else:
        from .lyapunov import build_random_matrix_set, iter_script_d

        ms = build_random_matrix_set(spec)
        bad = [m.tolist() for m in ms.members if not is_primitive(m)]
        if bad:
            notes.append(f"random arc matrices not primitive: {bad}")
        seen = set()
        for s in iter_script_d(spec, cap=100_000):
            for m in s.members:
                key = m.tobytes()
                if key not in seen:
                    seen.add(key)
                    if not is_primitive(m):
                        notes.append(f"path matrix {m.tolist()} is not primitive")
    return notes


# ----------------------------------------------------------------------------- dimension


@dataclass(frozen=True)
class DeterministicTheory:
    arc_matrix: np.ndarray
    path_chi_sets: tuple
    family: MatrixFamily
    rho_m: float
    rho_min: RhoMin
    dimension: float


def deterministic_dimension(spec) -> DeterministicTheory:
    m = build_arc_matrix(spec)
    if not is_primitive(m):
        raise NotPrimitiveSystem(f"arc matrix {m.tolist()} is not primitive")
    fam = build_path_matrix_family(spec)
    try:
        rm = rho_min(fam)
    except NonPrimitiveMember as exc:
        raise NotPrimitiveSystem(str(exc)) from exc
    rho_m = spectral_radius(m)
    return DeterministicTheory(
        m, tuple(path_chi_sets(spec)), fam, rho_m, rm, math.log(rho_m) / math.log(rm.value)
    )


# ----------------------------------------------------------------------------- oracles


def min_product_norm(family: MatrixFamily, x0, n: int, limit: int = 10**7) -> int:
    """Exact ``min || x0 D_1 ... D_n ||_1`` over all member sequences.

    The search runs forward over the reachable row vectors, dropping duplicates
    and vectors dominated entrywise by another reachable vector (members are
    nonnegative, so a dominated prefix can never finish strictly lower).
    """
    if n > 8 or len(family) ** n > limit:
        raise TooLarge(f"{len(family)}^{n} sequences exceed the exhaustive limit")
    front = {tuple(int(v) for v in x0)}
    mats = [np.asarray(m, dtype=np.int64) for m in family.members]
    for _ in range(n):
        nxt = {tuple((np.array(x) @ m).tolist()) for x in front for m in mats}
        front = _pareto_min(nxt)
    return min(sum(x) for x in front)


def _pareto_min(vectors):
    vs = sorted(vectors, key=sum)
    keep = []
    for v in vs:
        if not any(all(a <= b for a, b in zip(k, v)) for k in keep):
            keep.append(v)
    return set(keep)


@dataclass(frozen=True)
class ProductBoundReport:
    n: int
    trials: int
    rho_min: float
    min_ratio: float
    argmin: tuple  # member indices of the worst sequence
    violations: int

    @property
    def ok(self) -> bool:
        return self.violations == 0


def check_product_bound(family: MatrixFamily, n: int, trials: int, seed: int = 0,
                        tol: float = 1e-9) -> ProductBoundReport:
    """Sample member sequences and test ``rho(prod) >= rho_min^n``.

    Violations are counted, not raised. Radii of products come from a dense
    eigenvalue solve, independent of the power iteration used for ``rho_min``.
    """
    rm = rho_min(family).value
    rng = np.random.Generator(np.random.Philox(key=int(seed)))
    mats = np.array([np.asarray(m, dtype=float) for m in family.members])
    worst, arg, bad = math.inf, (), 0
    for _ in range(trials):
        seq = rng.integers(0, len(mats), size=n)
        p = np.linalg.multi_dot(list(mats[seq])) if n > 1 else mats[seq[0]]
        ratio = float(np.abs(np.linalg.eigvals(p)).max()) / rm**n
        if ratio < worst:
            worst, arg = ratio, tuple(int(s) for s in seq)
        if ratio < 1 - tol:
            bad += 1
    return ProductBoundReport(n, trials, rm, worst, arg, bad)
