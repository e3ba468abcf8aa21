"""Bundled invariant suite behind ``igs selftest``.

Every check is oracle based: exact matrix powers, exhaustive searches or
brute-force covers. None of them uses published numbers.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import boxcover, lyapunov, spectral
from .errors import IGSError, TooLarge
from .graph import ColoredDigraph, chi, diameter_bounds
from .system import (
    ab_distance_series,
    bundled_systems,
    expectation_diff,
    generate,
    node_count,
    parse_system_file,
    predicted_node_counts,
    replay_chi,
)

QUICK_STEPS = 2000
QUICK_TRIALS = 40


@dataclass(frozen=True)
class Check:
    name: str
    ok: bool
    detail: str = ""
    info: bool = False  # informational lines never fail the suite

    def line(self) -> str:
        tag = "INFO" if self.info else ("PASS" if self.ok else "FAIL")
        return f"{tag:4}  {self.name}" + (f": {self.detail}" if self.detail else "")


def check_fixture(name, spec):
    diffs = expectation_diff(spec)
    if not diffs:
        return Check(f"{name}: recorded rule invariants", True)
    text = "; ".join(f"{k} expected {w} found {g}" for k, w, g in diffs)
    return Check(f"{name}: recorded rule invariants", False, text)


def check_chi_law(name, spec, n=4):
    trace = generate(spec, n, seed=0)
    observed = [chi(g) for g in trace.levels]
    if spec.is_deterministic:
        m = spectral.build_arc_matrix(spec)
        x = chi(spec.initial)
        expected = [x @ np.linalg.matrix_power(m, k) for k in range(n + 1)]
        nodes_ok = node_count(trace) == predicted_node_counts(spec, n)
    else:
        expected = replay_chi(spec, trace)
        nodes_ok = True
    bad = [k for k, (a, b) in enumerate(zip(observed, expected)) if not np.array_equal(a, b)]
    if bad or not nodes_ok:
        k = bad[0] if bad else None
        detail = f"level {k}: chi {observed[k].tolist()} vs {expected[k].tolist()}" if bad else "node counts differ"
        return Check(f"{name}: arc-count law", False, detail)
    return Check(f"{name}: arc-count law", True, f"levels 0..{n}")


def check_min_product(name, spec, n=3):
    fam = spectral.build_path_matrix_family(spec)
    dist = ab_distance_series(generate(spec, n, seed=0))
    x0 = chi(spec.initial)
    got = []
    for k in range(n + 1):
        try:
            got.append(spectral.min_product_norm(fam, x0, k) if k else int(x0.sum()))
        except TooLarge:
            break
    ok = got == dist[: len(got)]
    return Check(f"{name}: A-B distance equals min product norm", ok, f"{dist[:len(got)]} vs {got}")


def check_product_bound(name, spec, n=4, trials=1000):
    rep = spectral.check_product_bound(spectral.build_path_matrix_family(spec), n, trials, seed=0)
    return Check(f"{name}: rho(product) >= rho_min^{n}", rep.ok,
                 f"{rep.violations} violations, min ratio {rep.min_ratio:.6f}")


def check_counterexample():
    d1, d2 = np.array([[1, 1], [1, 2]]), np.array([[2, 1], [1, 1]])
    lhs = float(np.abs(np.linalg.eigvals(d1 @ d2)).max())
    rhs = spectral.spectral_radius(d1) ** 2
    return Check("product bound fails for an arbitrary matrix pair", True,
                 f"rho(D1 D2) = {lhs:.4f} < rho_min^2 = {rhs:.4f}", info=True)


def _random_graph(rng, n):
    arcs = [(int(rng.integers(0, v)), v, 1) for v in range(1, n)]
    have = {(min(a, b), max(a, b)) for a, b, _ in arcs}
    for _ in range(int(rng.integers(0, n))):
        a, b = (int(x) for x in rng.integers(0, n, size=2))
        if a != b and (min(a, b), max(a, b)) not in have:
            have.add((min(a, b), max(a, b)))
            arcs.append((a, b, 1))
    return ColoredDigraph.from_arcs(arcs, 1, num_nodes=n)


def check_covering(graphs=40, seed=0):
    rng = np.random.Generator(np.random.Philox(key=seed))
    worst = 0.0
    for _ in range(graphs):
        g = _random_graph(rng, int(rng.integers(4, 13)))
        diam = diameter_bounds(g).value
        dmat = boxcover.distance_matrix(g)
        for L in range(1, diam + 2):
            cover = boxcover.vgbc_cover(g, L)
            # greedy balls have diameter <= 2 * (L // 2); compare against the
            # exact cover by sets of that same diameter bound
            exact = boxcover.brute_force_cover(g, 2 * (L // 2) + 1)
            pack = boxcover.greedy_packing(g, L)
            if pack > boxcover.brute_force_cover(g, L) or pack > cover.count:
                return Check("packing <= covering", False, f"{g.arcs} L={L}")
            if not exact <= cover.count <= (math.log(g.num_nodes) + 1) * exact:
                return Check("greedy cover within the set-cover bound", False, f"{g.arcs} L={L}")
            for b in range(cover.count):
                members = np.flatnonzero(cover.box_of == b)
                if dmat[np.ix_(members, members)].max() > L:
                    return Check("greedy boxes have diameter <= L", False, f"{g.arcs} L={L}")
            worst = max(worst, cover.count / exact)
    return Check("greedy cover vs exact cover, packing <= covering", True,
                 f"{graphs} random graphs, worst ratio {worst:.3f}")


def _distinct_sets(spec):
    sets = [lyapunov.build_random_matrix_set(spec)]
    for s in lyapunov.iter_script_d(spec):
        if not any(s.same_content(t) for t in sets):
            sets.append(s)
    return sets


def check_jensen(name, spec):
    worst = -math.inf
    for s in _distinct_sets(spec):
        mc = lyapunov.lyapunov_mc(s, QUICK_STEPS, QUICK_TRIALS, seed=0)
        bound = lyapunov.expectation_matrix_bound(s).value
        worst = max(worst, mc.value - bound - 3 * mc.stderr)
    return Check(f"{name}: Lyapunov estimate <= log rho(E X)", worst <= 0,
                 f"max excess {worst:.2e}")


def check_start_vector(name, spec):
    ms = lyapunov.build_random_matrix_set(spec)
    e1 = np.eye(ms.dim)[0]
    a = lyapunov.lyapunov_mc(ms, QUICK_STEPS, QUICK_TRIALS, seed=1, x0=e1)
    b = lyapunov.lyapunov_mc(ms, QUICK_STEPS, QUICK_TRIALS, seed=2)
    gap = abs(a.value - b.value)
    tol = 3 * math.hypot(a.stderr, b.stderr)
    return Check(f"{name}: start-vector invariance", gap <= tol, f"gap {gap:.2e} <= {tol:.2e}")


def check_determinism(name, spec):
    a = generate(spec, 3, seed=7).final.to_json()
    b = generate(spec, 3, seed=7).final.to_json()
    ms = lyapunov.build_random_matrix_set(spec)
    la = lyapunov.lyapunov_mc(ms, 200, 4, seed=7)
    lb = lyapunov.lyapunov_mc(ms, 200, 4, seed=7)
    return Check(f"{name}: seed determinism", a == b and la == lb)


def run(paths=None, quick=False):
    """Run every check over the given system files (bundled ones by default)."""
    specs = []
    for p in paths or bundled_systems():
        spec = parse_system_file(p, check_expect=False)
        specs.append((str(p), spec))
    checks = []
    for name, spec in specs:
        steps = [check_fixture, check_chi_law, check_determinism]
        if spec.is_deterministic:
            steps += [check_min_product, check_product_bound]
        else:
            steps += [check_jensen, check_start_vector]
        for fn in steps:
            try:
                checks.append(fn(name, spec))
            except IGSError as exc:
                checks.append(Check(f"{name}: {fn.__name__}", False, str(exc)))
    checks.append(check_counterexample())
    checks.append(check_covering(graphs=10 if quick else 40))
    return checks
