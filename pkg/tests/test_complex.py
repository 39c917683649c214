"""Graph differentials, quotient spaces and the closed-cycle check."""

from __future__ import annotations

import random

import pytest
import sympy

from morse_graph_kit.chain import BasedChainComplex, random_acyclic_complex
from morse_graph_kit.complex import (
    QuotientSpace,
    build_star_relations,
    build_xi_relations,
    contract,
    differential_d,
    differential_dprime,
    differential_dsecond,
    h_n_reduce,
    normalize,
    tensor_reduce,
    universal_cycle,
    verify_cycle_closed,
    verify_d_squared,
)
from morse_graph_kit.errors import InvalidDegree, MalformedGraph
from morse_graph_kit.graph import (
    ColorScheme,
    Edge,
    EdgeKind,
    GraphVector,
    LabeledGraph,
    Labeling,
    enumerate_graphs,
    enumerate_labelings,
    theta_graph,
)


def _compact(label, src, dst):
    return Edge(label, EdgeKind.COMPACT, src, dst)


def test_contraction_shifts_vertices_and_signs():
    graph = LabeledGraph(
        3,
        (_compact(1, 1, 2), _compact(2, 2, 3), _compact(3, 1, 3), _compact(4, 1, 3)),
    )
    contracted = contract(graph, 2)
    assert contracted.n == 2
    assert contracted.labels == (1, 3, 4)
    assert contracted.sign == 1
    assert contract(graph, 1).sign == -1


def test_contraction_that_closes_a_loop_vanishes():
    assert contract(theta_graph(), 1) is None
    assert differential_d(GraphVector.of(theta_graph())).is_zero()


def test_contract_rejects_separated_edges():
    graph = theta_graph().replace_edge(Edge(1, EdgeKind.SEPARATED, 1, 2, ("p", "q")))
    with pytest.raises(MalformedGraph, match="not compact"):
        contract(graph, 1)


def test_d_squared_vanishes_on_g23():
    report = verify_d_squared(enumerate_graphs(2, 3))
    assert report.passed
    assert report.stats == {"graphs": 8}


def test_d_squared_vanishes_on_every_theta_labeling():
    labeled = [graph for _, graph in enumerate_labelings(theta_graph())]
    assert len(labeled) == 96
    report = verify_d_squared(labeled)
    assert report.passed, report.counterexamples


def _random_labeling(rng, graph):
    vertices = list(range(1, graph.n + 1))
    labels = list(graph.labels)
    rng.shuffle(vertices)
    rng.shuffle(labels)
    flips = frozenset(label for label in labels if rng.random() < 0.5)
    return Labeling(tuple(vertices), tuple(labels), flips).apply(graph)


@pytest.mark.slow
def test_d_squared_vanishes_on_sampled_four_vertex_graphs():
    rng = random.Random(3)
    graphs = enumerate_graphs(4, 6)
    sample = [_random_labeling(rng, rng.choice(graphs)) for _ in range(1000)]
    report = verify_d_squared(sample)
    assert report.passed, report.counterexamples
    assert report.stats == {"graphs": 1000}


def test_dprime_separates_compact_edges(elementary):
    scheme = ColorScheme.uniform(elementary, 3)
    image = differential_dprime(GraphVector.of(theta_graph()), scheme)
    # three edges, two generators each
    assert len(image) == 6
    for graph, coef in image:
        assert coef == -1
        assert graph.degree_vector(scheme).count(0) == 1


def test_dprime_breaks_separated_edges(elementary_scheme):
    graph = theta_graph().replace_edge(Edge(2, EdgeKind.SEPARATED, 1, 2, ("p", "q")))
    image = differential_dprime(GraphVector.of(graph), elementary_scheme)
    kinds = {g.edge(2).kind for g, _ in image}
    assert EdgeKind.BROKEN_IN in kinds
    assert EdgeKind.BROKEN_OUT in kinds


def test_dprime_rejects_unknown_colors(elementary_scheme):
    graph = theta_graph().replace_edge(Edge(1, EdgeKind.SEPARATED, 1, 2, ("p", "zz")))
    with pytest.raises(MalformedGraph, match="not a generator"):
        differential_dprime(GraphVector.of(graph), elementary_scheme)


def test_dsecond_needs_two_generators_of_one_degree():
    c = BasedChainComplex([["a", "b"], ["x"]])
    scheme = ColorScheme.uniform(c, 3)
    graph = theta_graph().replace_edge(Edge(1, EdgeKind.SEPARATED, 1, 2, ("x", "a")))
    image = differential_dsecond(GraphVector.of(graph), scheme)
    assert [g.edge(1).colors for g, _ in image] == [("x", "b", "a")]
    assert differential_dsecond(GraphVector.of(theta_graph()), scheme).is_zero()


def test_diagonal_insertions_normalize_to_zero():
    c = BasedChainComplex([["a", "b"], ["x"]], [sympy.Matrix([[1], [1]])])
    scheme = ColorScheme.uniform(c, 3)
    diagonal = (
        (EdgeKind.BROKEN_IN, ("x", "x", "a")),
        (EdgeKind.BROKEN_OUT, ("x", "a", "a")),
    )
    for kind, colors in diagonal:
        graph = theta_graph().replace_edge(Edge(1, kind, 1, 2, colors))
        assert normalize(GraphVector.of(graph), scheme).is_zero()


def test_normalize_applies_boundary_coefficients(elementary_scheme):
    broken = theta_graph().replace_edge(Edge(1, EdgeKind.BROKEN_IN, 1, 2, ("p", "q", "q")))
    normal = normalize(GraphVector.of(broken), elementary_scheme)
    expected = theta_graph().replace_edge(Edge(1, EdgeKind.SEPARATED, 1, 2, ("q", "q")))
    assert normal == GraphVector.of(expected)

    zero = theta_graph().replace_edge(Edge(1, EdgeKind.BROKEN_OUT, 1, 2, ("q", "q", "q")))
    assert normalize(GraphVector.of(zero), elementary_scheme).is_zero()


def test_normalize_drops_closure_loops(elementary_scheme):
    graph = LabeledGraph(
        2,
        (
            Edge(1, EdgeKind.BROKEN, 1, 1, ("p",)),
            _compact(2, 1, 2),
            _compact(3, 1, 2),
            _compact(4, 1, 2),
        ),
    )
    assert normalize(GraphVector.of(graph), ColorScheme.uniform(elementary_scheme.complexes[0], 4)).is_zero()


def test_star_relations_on_theta_space():
    space = build_star_relations(2, 3)
    assert space.name == "A(2,3)"
    assert space.basis == [theta_graph()]
    assert space.relation_count == 0


def test_star_relations_are_kept_reduced():
    space = build_star_relations(3, 5)
    for pivot, row in space.relation_rows():
        assert row[pivot] == 1
        assert space.reduce(row).is_zero()
    for key in space.basis:
        assert space.reduce({key: 1}) == {key: 1}


def test_quotient_space_reduces_by_relations():
    a, b = theta_graph(), theta_graph().replace_edge(_compact(3, 2, 1))
    space = QuotientSpace("toy")
    space.register([a, b])
    space.add_relation(GraphVector([(a, 1), (b, 1)]))
    assert space.dimension == 1
    assert space.project(GraphVector.of(a) + GraphVector.of(b)).is_zero()


def test_xi_relations_exist_for_elementary_colors(elementary_scheme):
    rows = build_xi_relations(2, 3, elementary_scheme)
    assert rows
    for row in rows:
        assert not row.is_zero()


def test_trivial_scheme_has_no_xi_relations():
    assert build_xi_relations(2, 3, ColorScheme.trivial(3)) == []


def test_h_n_reduce_rejects_large_degrees(elementary):
    deep = BasedChainComplex([["q"], [], [], ["p"]])
    scheme = ColorScheme((deep, elementary, elementary))
    graph = theta_graph().replace_edge(Edge(1, EdgeKind.SEPARATED, 1, 2, ("p", "q")))
    with pytest.raises(InvalidDegree):
        h_n_reduce(GraphVector.of(graph), scheme)


def test_tensor_reduce_is_bilinear():
    total = tensor_reduce([({"a": 1}, {"x": 2}), ({"a": 1}, {"x": -2, "y": 1})])
    assert total == {("a", "y"): 1}


def test_universal_cycle_terms(elementary_scheme):
    cycle = universal_cycle(2, 3, elementary_scheme)
    terms = cycle.terms()
    assert len(terms) == len(cycle.graphs)
    assert all(g.degree_vector(elementary_scheme) == (1, 1, 1) for _, g in terms)


def test_cycle_closed_over_elementary_colors(elementary_scheme):
    report = verify_cycle_closed(2, 3, elementary_scheme)
    assert report.passed, report.counterexamples
    assert report.stats["graphs"] > 0


@pytest.mark.slow
@pytest.mark.parametrize("seed", [0, 1, 2])
def test_cycle_closed_over_random_colors(seed):
    rng = random.Random(seed)
    scheme = ColorScheme(tuple(random_acyclic_complex(rng, max_generators=6) for _ in range(3)))
    assert verify_cycle_closed(2, 3, scheme).passed
