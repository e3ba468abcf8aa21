"""Iterated graph systems: definitions, validation, substitution, generation."""
from __future__ import annotations

import itertools
import json
import os
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

import numpy as np

from .errors import (
    BadProbabilityVector,
    ColorArityMismatch,
    InvalidRuleGraph,
    ParseError,
    ResourceLimit,
    RuleTooShort,
    ValidationError,
)
from .graph import ColoredDigraph, RuleGraph, chi, density, distance, validate_graph

DEFAULT_MAX_ARCS = 5_000_000
PROB_TOL = 1e-12


def max_arcs_default() -> int:
    env = os.environ.get("IGS_MAX_ARCS")
    return int(float(env)) if env else DEFAULT_MAX_ARCS


@dataclass(frozen=True)
class Variant:
    rule: RuleGraph
    prob: Fraction


@dataclass(frozen=True)
class SystemSpec:
    initial: ColoredDigraph
    num_colors: int
    rules: tuple  # rules[i] is a tuple of Variant for color i+1
    expect: dict = field(default_factory=dict, compare=False)
    source: str | None = field(default=None, compare=False)

    @property
    def is_deterministic(self) -> bool:
        return all(len(vs) == 1 for vs in self.rules)

    @property
    def variant_counts(self):
        return tuple(len(vs) for vs in self.rules)

    @property
    def a_node(self) -> int:
        return self.initial.marks.get("A", 0)

    @property
    def b_node(self) -> int:
        return self.initial.marks.get("B", 1)

    def rule(self, color: int, variant: int = 0) -> RuleGraph:
        """Rule graph for a 1-based color and 0-based variant."""
        return self.rules[color - 1][variant].rule

    def probs(self, color: int):
        return tuple(v.prob for v in self.rules[color - 1])


def make_system(initial, rules, probs=None, expect=None) -> SystemSpec:
    """Convenience constructor: ``rules[i]`` is a RuleGraph or list of them."""
    norm = []
    for i, rs in enumerate(rules):
        rs = list(rs) if isinstance(rs, (list, tuple)) else [rs]
        ps = probs[i] if probs is not None else [Fraction(1, len(rs))] * len(rs)
        norm.append(tuple(Variant(r, Fraction(p)) for r, p in zip(rs, ps)))
    spec = SystemSpec(initial, initial.num_colors, tuple(norm), dict(expect or {}))
    validate_system(spec)
    return spec


# ----------------------------------------------------------------------------- validation


def color_closure(spec: SystemSpec):
    """Colors that can appear in some level, starting from the initial graph."""
    seen = set(np.unique(spec.initial.colors).tolist())
    frontier = list(seen)
    while frontier:
        c = frontier.pop()
        for v in spec.rules[c - 1]:
            for d in np.unique(v.rule.graph.colors).tolist():
                if d not in seen:
                    seen.add(d)
                    frontier.append(d)
    return seen


def validate_system(spec: SystemSpec):
    """Raise on invalid specs; return a list of warning strings otherwise."""
    lam = spec.num_colors
    if lam < 1:
        raise ColorArityMismatch("num_colors must be positive")
    if len(spec.rules) != lam:
        raise ColorArityMismatch(f"{len(spec.rules)} rule lists for {lam} colors")
    if spec.initial.num_colors != lam:
        raise ColorArityMismatch(
            f"initial graph has {spec.initial.num_colors} colors, system has {lam}"
        )
    try:
        validate_graph(spec.initial)
    except ValidationError as exc:
        raise InvalidRuleGraph(0, 0, f"initial graph: {exc}") from exc
    for i, variants in enumerate(spec.rules, start=1):
        if not variants:
            raise ColorArityMismatch(f"color {i} has no rule graph")
        ps = [v.prob for v in variants]
        if any(p < 0 for p in ps) or abs(float(sum(ps)) - 1.0) > PROB_TOL:
            raise BadProbabilityVector(f"color {i}: probabilities {[str(p) for p in ps]}")
        for j, v in enumerate(variants, start=1):
            g = v.rule.graph
            if g.num_colors != lam:
                raise ColorArityMismatch(f"rule ({i},{j}) has {g.num_colors} colors")
            try:
                validate_graph(g)
            except ValidationError as exc:
                raise InvalidRuleGraph(i, j, exc) from exc
            if distance(g, v.rule.a, v.rule.b) < 2:
                raise RuleTooShort(f"rule ({i},{j}): d(A,B) < 2")

    notes = []
    unreachable = sorted(set(range(1, lam + 1)) - color_closure(spec))
    if unreachable:
        notes.append(f"colors {unreachable} never appear in any level")
    from .spectral import primitivity_report

    notes.extend(primitivity_report(spec))
    for n in notes:
        warnings.warn(n, RuntimeWarning, stacklevel=2)
    return notes


# ----------------------------------------------------------------------------- substitution


@dataclass
class _Template:
    internal: int
    a_local: np.ndarray  # local endpoint codes: -1 = A, -2 = B, k >= 0 internal
    b_local: np.ndarray
    colors: np.ndarray


def _template(rule: RuleGraph) -> _Template:
    g = rule.graph
    others = [v for v in range(g.num_nodes) if v not in (rule.a, rule.b)]
    code = np.empty(g.num_nodes, dtype=np.int64)
    code[rule.a] = -1
    code[rule.b] = -2
    code[others] = np.arange(len(others))
    return _Template(len(others), code[g.tails], code[g.heads], g.colors.copy())


def _draw_variants(g: ColoredDigraph, spec: SystemSpec, level: int, seed: int):
    if spec.is_deterministic:
        return np.zeros(g.num_arcs, dtype=np.int64)
    key = (int(seed) & (2**64 - 1)) | (int(level) << 64)
    u = np.random.Generator(np.random.Philox(key=key)).random(g.num_arcs)
    choice = np.zeros(g.num_arcs, dtype=np.int64)
    for c in range(1, spec.num_colors + 1):
        sel = g.colors == c
        cum = np.cumsum([float(p) for p in spec.probs(c)])
        choice[sel] = np.minimum(np.searchsorted(cum, u[sel], side="right"), len(cum) - 1)
    return choice


def _expand(g: ColoredDigraph, spec: SystemSpec, choice: np.ndarray, max_arcs=None):
    templates = {
        (c, j): _template(v.rule)
        for c in range(1, spec.num_colors + 1)
        for j, v in enumerate(spec.rules[c - 1])
    }
    arcs_per = np.zeros(g.num_arcs, dtype=np.int64)
    fresh_per = np.zeros(g.num_arcs, dtype=np.int64)
    for (c, j), t in templates.items():
        sel = (g.colors == c) & (choice == j)
        arcs_per[sel] = t.colors.size
        fresh_per[sel] = t.internal
    total = int(arcs_per.sum())
    cap = max_arcs_default() if max_arcs is None else max_arcs
    if total > cap:
        raise ResourceLimit(f"next level would have {total} arcs (cap {cap}; see IGS_MAX_ARCS)")
    base = g.num_nodes + np.cumsum(fresh_per) - fresh_per

    tails, heads, colors = [], [], []
    for (c, j), t in templates.items():
        idx = np.flatnonzero((g.colors == c) & (choice == j))
        if idx.size == 0:
            continue
        ends = np.stack([g.tails[idx], g.heads[idx]])  # A -> tail, B -> head

        def resolve(local):
            out = base[idx][:, None] + np.maximum(local, 0)[None, :]
            out = np.where(local[None, :] == -1, ends[0][:, None], out)
            return np.where(local[None, :] == -2, ends[1][:, None], out)

        tails.append(resolve(t.a_local).ravel())
        heads.append(resolve(t.b_local).ravel())
        colors.append(np.broadcast_to(t.colors, (idx.size, t.colors.size)).ravel())
    n_nodes = g.num_nodes + int(fresh_per.sum())
    out = ColoredDigraph(
        n_nodes,
        np.concatenate(tails),
        np.concatenate(heads),
        np.concatenate(colors),
        g.num_colors,
        g.marks,
    )
    return out


def substitute_step(g: ColoredDigraph, spec: SystemSpec, level: int = 0, seed: int = 0,
                    max_arcs=None) -> ColoredDigraph:
    """Replace every arc by a fresh copy of a rule variant of its color.

    The variant of the k-th arc (canonical order) at ``level`` is drawn from a
    Philox stream keyed by ``(seed, level)``, taking its k-th uniform. Fresh
    node ids are allocated contiguously per arc in canonical order.
    """
    return _step(g, spec, level, seed, max_arcs)[0]


def _step(g, spec, level, seed, max_arcs=None):
    choice = _draw_variants(g, spec, level, seed)
    return _expand(g, spec, choice, max_arcs), choice


@dataclass(frozen=True)
class GenerationTrace:
    levels: tuple
    a_node: int
    b_node: int
    seed: int
    choice_log: tuple  # choice_log[t][k]: variant index used for arc k of levels[t]

    @property
    def n(self) -> int:
        return len(self.levels) - 1

    @property
    def final(self) -> ColoredDigraph:
        return self.levels[-1]


def generate(spec: SystemSpec, n: int, seed: int = 0, max_arcs=None) -> GenerationTrace:
    if n < 0:
        raise ValueError("n must be >= 0")
    levels = [spec.initial]
    log = []
    g = spec.initial
    for t in range(n):
        g, choice = _step(g, spec, t, seed, max_arcs)
        levels.append(g)
        log.append(choice)
    return GenerationTrace(tuple(levels), spec.a_node, spec.b_node, int(seed), tuple(log))


def replay_chi(spec: SystemSpec, trace: GenerationTrace):
    """Per-level chi vectors recomputed from the choice log alone."""
    out = [chi(trace.levels[0])]
    for t, choice in enumerate(trace.choice_log):
        prev = trace.levels[t]
        nxt = np.zeros(spec.num_colors, dtype=np.int64)
        for c in range(1, spec.num_colors + 1):
            counts = np.bincount(choice[prev.colors == c], minlength=len(spec.rules[c - 1]))
            for j, k in enumerate(counts):
                nxt += k * chi(spec.rule(c, j).graph)
        out.append(nxt)
    return out


def node_count(trace: GenerationTrace):
    return [g.num_nodes for g in trace.levels]


def predicted_node_counts(spec: SystemSpec, n: int):
    """Deterministic node counts ``2 + sum_t chi(level t-1) . (|V(R_i)| - 2)``."""
    from .spectral import build_arc_matrix

    m = build_arc_matrix(spec)
    internal = np.array([spec.rule(c).num_internal for c in range(1, spec.num_colors + 1)])
    x = chi(spec.initial)
    counts = [spec.initial.num_nodes]
    for _ in range(n):
        counts.append(counts[-1] + int(x @ internal))
        x = x @ m
    return counts


def ab_distance_series(trace: GenerationTrace):
    return [distance(g, trace.a_node, trace.b_node) for g in trace.levels]


def density_series(trace: GenerationTrace):
    return [density(g) for g in trace.levels]


# ----------------------------------------------------------------------------- files


def _parse_prob(raw, where):
    try:
        if isinstance(raw, str):
            p = Fraction(raw.strip())
        elif isinstance(raw, bool):
            raise TypeError
        elif isinstance(raw, int):
            p = Fraction(raw)
        elif isinstance(raw, float):
            p = Fraction(repr(raw))
        else:
            raise TypeError
    except (ValueError, ZeroDivisionError, TypeError) as exc:
        raise ParseError(f"{where}: bad probability {raw!r}") from exc
    return p


def _fmt_prob(p: Fraction) -> str:
    return str(p)


def _parse_graph(d, where):
    try:
        return ColoredDigraph.from_dict(d)
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"{where}: malformed graph ({exc})") from exc


def system_from_dict(d, source=None, check_expect=True) -> SystemSpec:
    try:
        lam = int(d["num_colors"])
        initial = _parse_graph(d["initial"], "initial")
        raw_rules = d["rules"]
    except KeyError as exc:
        raise ParseError(f"missing field {exc}") from exc
    if "A" not in initial.marks or "B" not in initial.marks:
        raise ParseError("initial: marks A and B are required")
    rules = []
    for i, entries in enumerate(raw_rules, start=1):
        variants = []
        for j, e in enumerate(entries, start=1):
            where = f"rules[{i - 1}][{j - 1}]"
            g = _parse_graph(e.get("graph", {}), where + ".graph")
            try:
                rule = RuleGraph(g, int(e["A"]), int(e["B"]))
            except KeyError as exc:
                raise ParseError(f"{where}: missing field {exc}") from exc
            except ValidationError as exc:
                if isinstance(exc, RuleTooShort):
                    raise
                raise InvalidRuleGraph(i, j, exc) from exc
            variants.append(Variant(rule, _parse_prob(e.get("p", "1"), where + ".p")))
        rules.append(tuple(variants))
    spec = SystemSpec(initial, lam, tuple(rules), dict(d.get("expect") or {}), source)
    validate_system(spec)
    if check_expect:
        check_expectations(spec)
    return spec


def system_to_dict(spec: SystemSpec, include_expect=True):
    d = {
        "num_colors": spec.num_colors,
        "initial": spec.initial.to_dict(),
        "rules": [
            [
                {"graph": v.rule.graph.to_dict(), "A": v.rule.a, "B": v.rule.b,
                 "p": _fmt_prob(v.prob)}
                for v in variants
            ]
            for variants in spec.rules
        ],
    }
    if include_expect and spec.expect:
        d["expect"] = spec.expect
    return d


def parse_system_file(path, check_expect=True) -> SystemSpec:
    path = resolve_system_path(path)
    text = Path(path).read_text(encoding="utf-8")
    try:
        d = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: line {exc.lineno}: {exc.msg}") from exc
    return system_from_dict(d, source=str(path), check_expect=check_expect)


def write_system_file(spec: SystemSpec, path):
    Path(path).write_text(json.dumps(system_to_dict(spec), indent=1) + "\n", encoding="utf-8")


def bundled_systems():
    root = Path(__file__).parent / "data" / "systems"
    return sorted(p.stem for p in root.glob("*.json"))


def resolve_system_path(name) -> Path:
    """A path, or the stem of a bundled system file."""
    p = Path(name)
    if p.exists():
        return p
    bundled = Path(__file__).parent / "data" / "systems" / f"{name}.json"
    if bundled.exists():
        return bundled
    raise ParseError(f"no such system file: {name}")


def load_bundled(name: str) -> SystemSpec:
    return parse_system_file(resolve_system_path(name))


# ----------------------------------------------------------------------------- expectations


def observed_invariants(spec: SystemSpec):
    from .spectral import enumerate_ab_paths

    rule_chis, path_counts, path_sets = [], [], []
    for variants in spec.rules:
        rc, pc, ps = [], [], []
        for v in variants:
            rc.append(chi(v.rule.graph).tolist())
            paths = enumerate_ab_paths(v.rule)
            pc.append(len(paths.paths))
            ps.append(sorted(list(c) for c in paths.chi_set))
        rule_chis.append(rc)
        path_counts.append(pc)
        path_sets.append(ps)
    return {"rule_chis": rule_chis, "path_counts": path_counts, "path_chi_sets": path_sets}


def expectation_diff(spec: SystemSpec):
    """List of ``(key, expected, observed)`` mismatches against ``spec.expect``."""
    if not spec.expect:
        return []
    seen = observed_invariants(spec)
    diffs = []
    for key, want in spec.expect.items():
        if key not in seen:
            continue
        got = seen[key]
        if key == "path_chi_sets":
            want = [[sorted(list(map(list, s))) for s in row] for row in want]
        if want != got:
            diffs.append((key, want, got))
    return diffs


def check_expectations(spec: SystemSpec):
    diffs = expectation_diff(spec)
    if diffs:
        text = "; ".join(f"{k}: expected {w}, found {g}" for k, w, g in diffs)
        raise ValidationError(f"fixture invariants do not hold: {text}")


def variant_products(spec: SystemSpec):
    """All variant combinations ``(j_1..j_lambda)`` with their exact probability."""
    for combo in itertools.product(*(range(q) for q in spec.variant_counts)):
        p = Fraction(1)
        for c, j in enumerate(combo, start=1):
            p *= spec.rules[c - 1][j].prob
        yield combo, p
