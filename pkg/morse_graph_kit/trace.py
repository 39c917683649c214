"""Traces of colored graphs by graded endomorphisms.

For a separated edge with input color ``p`` and output color ``q`` the trace
factor is ``h_{qp}``, the coefficient of ``p`` in ``h(q)``, with
``h ∈ End_{d(p)−d(q)}``. Smoothing fuses each separated edge into a compact
edge ``src → dst``.
"""

from __future__ import annotations

import random
from collections.abc import Mapping, Sequence
from dataclasses import dataclass
from fractions import Fraction

import structlog

from .chain import GradedEndomorphism
from .complex import (
    QuotientSpace,
    boundary_image,
    build_star_relations,
    build_xi_relations,
    colored_space,
    h_space,
)
from .errors import DegreeError, MalformedGraph, WellDefinednessViolation
from .graph import (
    ColorScheme,
    Edge,
    EdgeKind,
    GraphVector,
    LabeledGraph,
    enumerate_graphs,
)
from .linalg import SparseRow
from .reports import VerificationReport

log = structlog.get_logger(__name__)


@dataclass(frozen=True)
class TraceAssignment:
    """One graded endomorphism per edge label (``maps[i-1]`` for label ``i``)."""

    maps: tuple[GradedEndomorphism, ...]

    @classmethod
    def uniform(cls, h: GradedEndomorphism, m: int) -> TraceAssignment:
        return cls(tuple(h for _ in range(m)))

    @property
    def scheme(self) -> ColorScheme:
        return ColorScheme(tuple(h.complex for h in self.maps))

    def for_label(self, label: int) -> GradedEndomorphism:
        if not 1 <= label <= len(self.maps):
            raise MalformedGraph(f"no endomorphism for edge label {label}")
        return self.maps[label - 1]

    def factor(self, edge: Edge) -> Fraction:
        """Trace factor of one edge (1 for compact edges).

        Raises:
            DegreeError: If the map degree differs from ``d(p) − d(q)``.
        """
        if edge.kind is EdgeKind.COMPACT:
            return Fraction(1)
        if edge.kind is not EdgeKind.SEPARATED:
            raise MalformedGraph(
                f"edge {edge.label} is {edge.kind.value}; traces need regular edges"
            )
        h = self.for_label(edge.label)
        p, q = edge.colors
        degree = h.complex.degree_of(p) - h.complex.degree_of(q)
        if h.degree != degree:
            raise DegreeError(
                f"edge {edge.label} ({p}, {q}) has degree {degree}, map has {h.degree}"
            )
        return h.entry(q, p)


def smooth(graph: LabeledGraph) -> LabeledGraph | None:
    """Fuse separated edges into compact edges; None if a self-loop appears."""
    edges = []
    for e in graph.edges:
        if e.kind is EdgeKind.COMPACT:
            edges.append(e)
        elif e.kind is EdgeKind.SEPARATED:
            if e.src == e.dst:
                return None
            edges.append(Edge(e.label, EdgeKind.COMPACT, e.src, e.dst))
        else:
            raise MalformedGraph(
                f"edge {e.label} is {e.kind.value}; smoothing needs regular edges"
            )
    return LabeledGraph(graph.n, tuple(edges), graph.sign)


def trace(h: TraceAssignment, graph: LabeledGraph) -> tuple[Fraction, LabeledGraph | None]:
    """``Tr_h(Γ) = (∏ h_{q p}) · Smooth(Γ)`` as ``(coefficient, smoothed graph)``."""
    coef = Fraction(1)
    for e in graph.edges:
        coef *= h.factor(e)
        if coef == 0:
            return Fraction(0), None
    smoothed = smooth(graph)
    if smoothed is None:
        return Fraction(0), None
    return coef, smoothed


def trace_vector(h: TraceAssignment, v: GraphVector) -> GraphVector:
    out = GraphVector()
    for graph, coef in v:
        factor, smoothed = trace(h, graph)
        if smoothed is not None:
            out.add(smoothed, coef * factor)
    return out


def check_well_defined(
    h: TraceAssignment, source: QuotientSpace, target: QuotientSpace
) -> None:
    """Every relation of ``source`` must trace to zero in ``target``.

    Raises:
        WellDefinednessViolation: With the first offending relation row.
    """
    for _, row in source.relation_rows():
        image = target.project(trace_vector(h, GraphVector(row)))
        if image:
            raise WellDefinednessViolation(
                f"a relation of {source.name} traces to a nonzero class of {target.name}",
                dict(row),
            )


def trace_on_class(
    h: TraceAssignment,
    cls: Mapping[LabeledGraph, Fraction],
    target: QuotientSpace,
    source: QuotientSpace | None = None,
) -> SparseRow:
    """``Tr_h`` of a class of ``source`` (given by representative coefficients),
    reduced in ``target``. When ``source`` is given its relations are checked
    first."""
    if source is not None:
        check_well_defined(h, source, target)
    return target.project(trace_vector(h, GraphVector(cls)))


def verify_xi_trace(
    n: int, m: int, scheme: ColorScheme, h: TraceAssignment
) -> VerificationReport:
    """The trace of every ξ-relation row vanishes."""
    report = VerificationReport(check="xi-trace")
    rows = build_xi_relations(n, m, scheme)
    for row in rows:
        image = trace_vector(h, row)
        if image:
            report.fail(
                row=[{"graph": g.to_json(), "coeff": c} for g, c in row],
                image_terms=len(image),
            )
    report.stats = {"xi_rows": len(rows)}
    return report


def _pairing_functional(
    g1: TraceAssignment,
    g2: TraceAssignment,
    graphs: Sequence[LabeledGraph],
    target: QuotientSpace,
) -> dict[LabeledGraph, SparseRow]:
    delta = {}
    for graph in graphs:
        image = target.project(
            trace_vector(g1, GraphVector.of(graph)) - trace_vector(g2, GraphVector.of(graph))
        )
        if image:
            delta[graph] = image
    return delta


def verify_tr_closedness(
    n: int,
    m: int,
    scheme: ColorScheme,
    g1: TraceAssignment,
    g2: TraceAssignment,
    *,
    max_functionals: int | None = None,
    rng: random.Random | None = None,
) -> VerificationReport:
    """Closedness of ``Tr′γ̃`` and propagator independence of the pairing.

    Part ``closed``: ``⟨(1⊗(d+d′))Tr′γ̃⟩ = 0`` in ``A_{n,m} ⊗ H_n(C⃗)`` for both
    assignments. Part ``pairing``: ``Z(c, g1) = Z(c, g2)`` for every functional
    ``c`` annihilating the ``H_n`` relations (all of a kernel basis, or a seeded
    sample of ``max_functionals`` of them).
    """
    report = VerificationReport(check="independence")
    target = build_star_relations(n, m)
    hn = h_space(n, m, scheme)
    graphs = enumerate_graphs(n, m, (1,) * m, scheme)

    for name, h in (("g1", g1), ("g2", g2)):
        tensor = SparseRow()
        for graph in graphs:
            left = target.project(trace_vector(h, GraphVector.of(graph)))
            if not left:
                continue
            right = hn.reduce_vector(boundary_image(GraphVector.of(graph), scheme))
            for lk, lv in left.items():
                tensor.iadd_coef(lv, {(lk, rk): rv for rk, rv in right.items()})
        if tensor:
            report.fail(part="closed", assignment=name, nonzero_terms=len(tensor))

    delta = _pairing_functional(g1, g2, graphs, target)
    columns = set(graphs)
    for _, row in hn.relation_rows():
        columns.update(row)
    functionals = list(hn.annihilator_basis(columns))
    if max_functionals is not None and len(functionals) > max_functionals:
        functionals = (rng or random.Random(0)).sample(functionals, max_functionals)
    for functional in functionals:
        value = SparseRow()
        for graph, image in delta.items():
            weight = functional.get(graph, 0)
            if weight:
                value.iadd_coef(weight, image)
        if value:
            report.fail(
                part="pairing",
                functional=[
                    {"graph": k.to_json(), "coeff": v} for k, v in sorted(functional.items())
                ],
            )
    report.stats = {
        "graphs": len(graphs),
        "functionals_checked": len(functionals),
        "a_dimension": target.dimension,
    }
    log.info("trace closedness checked", passed=report.passed, **report.stats)
    return report


def colored_trace_check(
    n: int, m: int, scheme: ColorScheme, h: TraceAssignment
) -> None:
    """Well-definedness of ``Tr_h: A(C⃗)/ξ → A_{n,m}`` on all relations."""
    check_well_defined(h, colored_space(n, m, scheme), build_star_relations(n, m))


def counts_constraints(
    n: int, m: int, scheme: ColorScheme
) -> list[tuple[LabeledGraph, SparseRow]]:
    """Linear constraints ``#M_{(d+d′)Γ} = 0`` on counts vectors.

    One row per ``Σ(1,…,1)`` generator ``Γ``: the reduced ``(d + d′)Γ`` as a
    functional on graph keys.
    """
    rows = []
    for position in range(m):
        eta = tuple(2 if j == position else 1 for j in range(m))
        for graph in enumerate_graphs(n, m, eta, scheme):
            image = boundary_image(GraphVector.of(graph), scheme)
            if image:
                rows.append((graph, image.as_row()))
    return rows
