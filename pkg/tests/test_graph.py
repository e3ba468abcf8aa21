from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import cycle_graph, path_graph
from igs.errors import BadColorIndex, Disconnected, MultiEdge, SelfLoop, UnknownNode
from igs.graph import (
    ColoredDigraph,
    RuleGraph,
    chi,
    density,
    diameter,
    diameter_bounds,
    distance,
    eccentricity,
    validate_graph,
)
from igs.system import generate


def test_pentagon_rule_is_valid(det):
    r = det.rule(1)
    validate_graph(r.graph)
    assert (r.graph.num_nodes, r.graph.num_arcs) == (5, 5)


def test_arcs_are_canonically_sorted():
    g = ColoredDigraph.from_arcs([(2, 0, 1), (0, 2, 2), (0, 1, 1)], 2)
    assert g.arcs == [(0, 1, 1), (0, 2, 2), (2, 0, 1)]


def test_self_loop_witness():
    with pytest.raises(SelfLoop) as exc:
        validate_graph(ColoredDigraph.from_arcs([(0, 1, 1), (1, 1, 1)], 1))
    assert exc.value.witness == (1, 1, 1)


def test_antiparallel_pair_is_a_multi_edge():
    with pytest.raises(MultiEdge) as exc:
        validate_graph(ColoredDigraph.from_arcs([(0, 1, 1), (1, 0, 2)], 2))
    assert set(exc.value.witness) == {(0, 1, 1), (1, 0, 2)}


def test_disconnected_witness():
    g = ColoredDigraph.from_arcs([(0, 1, 1), (2, 3, 1)], 1)
    with pytest.raises(Disconnected) as exc:
        validate_graph(g)
    assert exc.value.witness == 2


def test_bad_color():
    with pytest.raises(BadColorIndex):
        validate_graph(ColoredDigraph.from_arcs([(0, 1, 3)], 2))


def test_distances(det):
    r1, r2 = det.rule(1), det.rule(2)
    assert distance(r1.graph, r1.a, r1.b) == 2
    assert distance(r2.graph, r2.a, r2.b) == 5
    assert eccentricity(cycle_graph(10), 0) == 5
    with pytest.raises(UnknownNode):
        distance(r1.graph, 0, 99)


def test_diameters(det, comb):
    assert diameter(det.rule(1).graph) == 2
    assert diameter(generate(comb, 2).final) == 9


def test_rule_graph_needs_distance_two():
    from igs.errors import RuleTooShort

    with pytest.raises(RuleTooShort):
        RuleGraph(path_graph(2), 0, 1)


def test_chi_and_density(det):
    assert chi(det.rule(1).graph).tolist() == [2, 3]
    assert chi(det.rule(2).graph).tolist() == [5, 5]
    assert density(path_graph(3)) == Fraction(2, 6)


def test_json_round_trip(det):
    g = generate(det, 2).final
    assert ColoredDigraph.from_dict(g.to_dict()) == g


def test_csr_is_symmetric():
    g = cycle_graph(6)
    indptr, indices = g.csr
    assert np.all(np.diff(indptr) == 2)
    pairs = {(u, int(v)) for u in range(6) for v in indices[indptr[u]:indptr[u + 1]]}
    assert all((v, u) in pairs for u, v in pairs)


@st.composite
def connected_graphs(draw, max_nodes=60):
    n = draw(st.integers(2, max_nodes))
    parents = [draw(st.integers(0, v - 1)) for v in range(1, n)]
    arcs = {(min(p, v), max(p, v)) for v, p in enumerate(parents, start=1)}
    extra = draw(st.lists(st.tuples(st.integers(0, n - 1), st.integers(0, n - 1)), max_size=n))
    arcs |= {(min(a, b), max(a, b)) for a, b in extra if a != b}
    return ColoredDigraph.from_arcs([(a, b, 1) for a, b in sorted(arcs)], 1, num_nodes=n)


@settings(max_examples=60, deadline=None)
@given(connected_graphs())
def test_ifub_bounds_contain_exact_diameter(g):
    exact = diameter_bounds(g)
    assert exact.exact
    cert = diameter_bounds(g, max_bfs=10_000)
    assert cert.lower <= exact.value <= cert.upper
    assert cert.exact
    tight = diameter_bounds(g, max_bfs=3)
    assert tight.lower <= exact.value <= tight.upper
