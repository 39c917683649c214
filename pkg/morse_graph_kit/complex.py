"""Graph differentials, relation spaces and the universal cycle.

* ``d`` contracts compact edges; ``d′`` separates compact edges and breaks
  separated ones; ``d″`` inserts same-degree breaks.
* ``A_{n,m}`` and ``A_{n,m}(C⃗)/ξ`` are quotients of trivalent graph spaces by
  the ``(*)``-relation, the label change relation and (colored case) the
  ξ-relation.
* ``H_n(C⃗)`` is presented on graphs without bivalent vertices: broken edges
  are rewritten by the ∂- and C-relations, then ``(d+d′)``-images of the
  Σ(1,…,1) graphs are divided out.
"""

from __future__ import annotations

import random
from collections.abc import Callable, Hashable, Iterable, Mapping
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import structlog

from .errors import InvalidDegree, MalformedGraph
from .graph import (
    ColorScheme,
    Edge,
    EdgeKind,
    GraphVector,
    LabeledGraph,
    canonical_form,
    enumerate_graphs,
)
from .linalg import SparseEchelon, SparseRow
from .reports import VerificationReport

log = structlog.get_logger(__name__)


# -- differentials ------------------------------------------------------------


def contract(graph: LabeledGraph, label: int) -> LabeledGraph | None:
    """Contract compact edge ``label = (u → v)``: ``v`` merges into ``u``.

    Vertices above ``v`` shift down by one and the sign picks up ``(−1)^{v−1}``.
    Returns None when the contraction closes a loop.
    """
    e = graph.edge(label)
    if e.kind is not EdgeKind.COMPACT:
        raise MalformedGraph(f"edge {label} is not compact")
    u, v = e.src, e.dst

    def remap(w: int) -> int:
        if w == v:
            w = u
        return w - 1 if w > v else w

    edges = []
    for f in graph.edges:
        if f.label == label:
            continue
        src, dst = remap(f.src), remap(f.dst)
        if src == dst:
            return None
        edges.append(f.moved(src, dst))
    sign = -1 if (v - 1) % 2 else 1
    return LabeledGraph(graph.n - 1, tuple(edges), graph.sign * sign)


def differential_d(v: GraphVector) -> GraphVector:
    """Sum of compact-edge contractions; the summand is the missing label."""
    out = GraphVector()
    for graph, coef in v:
        for e in graph.edges:
            if e.kind is EdgeKind.COMPACT:
                contracted = contract(graph, e.label)
                if contracted is not None:
                    out.add(contracted, coef)
    return out


def _check_colors(graph: LabeledGraph, scheme: ColorScheme) -> None:
    for e in graph.edges:
        for color in e.colors:
            scheme.degree(e.label, color)


def differential_dprime(v: GraphVector, scheme: ColorScheme) -> GraphVector:
    """``d′ = Σ_e d′_e``.

    Compact edge: ``−Σ_r Γ[e := Sep(r, r)]``. Separated ``(p, q)``:
    ``Σ_{d(r)=d(p)−1} in(p, r, q) + Σ_{d(s)=d(q)+1} (−1)^{d(p)−d(s)} out(p, s, q)``.

    Raises:
        MalformedGraph: If a color is not a generator of its complex.
    """
    out = GraphVector()
    for graph, coef in v:
        _check_colors(graph, scheme)
        for e in graph.edges:
            if e.kind is EdgeKind.COMPACT:
                for r in scheme.names(e.label):
                    sep = Edge(e.label, EdgeKind.SEPARATED, e.src, e.dst, (r, r))
                    out.add(graph.replace_edge(sep), -coef)
            elif e.kind is EdgeKind.SEPARATED:
                p, q = e.colors
                dp = scheme.degree(e.label, p)
                dq = scheme.degree(e.label, q)
                for r in scheme.names_of_degree(e.label, dp - 1):
                    broken = Edge(e.label, EdgeKind.BROKEN_IN, e.src, e.dst, (p, r, q))
                    out.add(graph.replace_edge(broken), coef)
                for s in scheme.names_of_degree(e.label, dq + 1):
                    sign = -1 if (dp - dq - 1) % 2 else 1
                    broken = Edge(e.label, EdgeKind.BROKEN_OUT, e.src, e.dst, (p, s, q))
                    out.add(graph.replace_edge(broken), sign * coef)
    return out


def differential_dsecond(v: GraphVector, scheme: ColorScheme) -> GraphVector:
    """Same-degree break insertions on separated edges.

    ``Σ_{d(r)=d(p), r≠p} in(p, r, q) + Σ_{d(s)=d(q), s≠q} (−1)^{d(p)−d(s)} out(p, s, q)``.

    The full sum also runs over ``r = p`` and ``s = q``. Those terms are dropped:
    :func:`normalize` sends them to ``∂_{pp}·Sep(p, q)`` and ``∂_{qq}·Sep(p, q)``,
    and ``∂`` has no diagonal entries since it lowers degree by one. Callers that
    read broken edges without normalizing see the sum without them.
    """
    out = GraphVector()
    for graph, coef in v:
        _check_colors(graph, scheme)
        for e in graph.edges:
            if e.kind is not EdgeKind.SEPARATED:
                continue
            p, q = e.colors
            dp = scheme.degree(e.label, p)
            dq = scheme.degree(e.label, q)
            for r in scheme.names_of_degree(e.label, dp):
                if r != p:
                    broken = Edge(e.label, EdgeKind.BROKEN_IN, e.src, e.dst, (p, r, q))
                    out.add(graph.replace_edge(broken), coef)
            for s in scheme.names_of_degree(e.label, dq):
                if s != q:
                    sign = -1 if (dp - dq) % 2 else 1
                    broken = Edge(e.label, EdgeKind.BROKEN_OUT, e.src, e.dst, (p, s, q))
                    out.add(graph.replace_edge(broken), sign * coef)
    return out


def normalize(v: GraphVector, scheme: ColorScheme) -> GraphVector:
    """Rewrite broken edges by the ∂- and C-relations.

    ``in(p, r, q) ↦ ∂_{pr}·Sep(r, q)``, ``out(p, s, q) ↦ ∂_{sq}·Sep(p, s)`` and
    ``Broken(r) ↦ Sep(r, r)``. Terms with a closure loop are dropped.
    """
    out = GraphVector()
    for graph, coef in v:
        factor = Fraction(coef)
        edges = []
        for e in graph.edges:
            if e.kind is EdgeKind.BROKEN_IN:
                p, r, q = e.colors
                factor *= scheme.boundary(e.label, p, r)
                e = Edge(e.label, EdgeKind.SEPARATED, e.src, e.dst, (r, q))
            elif e.kind is EdgeKind.BROKEN_OUT:
                p, s, q = e.colors
                factor *= scheme.boundary(e.label, s, q)
                e = Edge(e.label, EdgeKind.SEPARATED, e.src, e.dst, (p, s))
            elif e.kind is EdgeKind.BROKEN:
                (r,) = e.colors
                e = Edge(e.label, EdgeKind.SEPARATED, e.src, e.dst, (r, r))
            if factor == 0:
                break
            edges.append(e)
        if factor == 0:
            continue
        normal = LabeledGraph(graph.n, tuple(edges), graph.sign)
        if not normal.has_closure_loop:
            out.add(normal, factor)
    return out


# -- quotient spaces ----------------------------------------------------------


Keyer = Callable[[LabeledGraph], tuple[LabeledGraph, int]]


def _identity_key(graph: LabeledGraph) -> tuple[LabeledGraph, int]:
    return graph.unsigned(), graph.sign


class QuotientSpace:
    """Graph space modulo a span of relations, kept in reduced echelon form.

    Args:
        name: Label used in logs and reports.
        keyer: Maps a graph to ``(key, sign)`` with ``graph = sign·key`` in the
            quotient (sign 0 means the graph vanishes).
    """

    def __init__(self, name: str, keyer: Keyer = _identity_key):
        self.name = name
        self._keyer = keyer
        self._echelon = SparseEchelon()
        self._ambient: set[LabeledGraph] = set()

    def lift(self, vector: GraphVector | Mapping[LabeledGraph, Fraction]) -> SparseRow:
        row = SparseRow()
        for graph, coef in vector.items():
            key, sign = self._keyer(graph)
            if sign:
                row.iadd_coef(sign * coef, {key: 1})
        return row

    def register(self, graphs: Iterable[LabeledGraph]) -> None:
        for graph in graphs:
            key, sign = self._keyer(graph)
            if sign:
                self._ambient.add(key)

    def add_relation(self, vector: GraphVector | Mapping[LabeledGraph, Fraction]) -> bool:
        row = self.lift(vector)
        self._ambient.update(row)
        return self._echelon.add(row)

    def add_row(self, row: Mapping[Hashable, Fraction]) -> bool:
        """Add a relation already expressed in keys."""
        self._ambient.update(row)
        return self._echelon.add(row)

    def reduce(self, row: Mapping[Hashable, Fraction]) -> SparseRow:
        return self._echelon.reduce(row)

    def project(self, vector: GraphVector | Mapping[LabeledGraph, Fraction]) -> SparseRow:
        return self._echelon.reduce(self.lift(vector))

    def class_of(self, graph: LabeledGraph) -> SparseRow:
        return self.project(GraphVector.of(graph))

    @property
    def relation_count(self) -> int:
        return len(self._echelon)

    @property
    def basis(self) -> list[LabeledGraph]:
        pivots = set(self._echelon.pivots)
        return sorted(self._ambient - pivots)

    @property
    def dimension(self) -> int:
        return len(self.basis)

    def relation_rows(self) -> list[tuple[Hashable, SparseRow]]:
        return list(self._echelon.rows())

    def annihilator_basis(self, columns: Iterable[Hashable]) -> Iterable[SparseRow]:
        """Functionals on ``columns`` vanishing on every relation."""
        return self._echelon.kernel_basis(columns)

    def coordinates(self, vector: GraphVector | Mapping[LabeledGraph, Fraction]) -> list[Fraction]:
        reduced = self.project(vector)
        return [reduced.get(key, Fraction(0)) for key in self.basis]


def label_change_key(permute_edge_labels: bool | None) -> Keyer:
    def keyer(graph: LabeledGraph) -> tuple[LabeledGraph, int]:
        return canonical_form(graph, permute_edge_labels)

    return keyer


def _star_rows(
    graphs: Iterable[LabeledGraph], keyer: Keyer
) -> dict[LabeledGraph, SparseRow]:
    rows: dict[LabeledGraph, SparseRow] = {}
    for graph in graphs:
        key, sign = keyer(graph)
        if not sign:
            continue
        for image, coef in differential_d(GraphVector.of(graph)):
            rows.setdefault(image, SparseRow()).iadd_coef(sign * coef, {key: 1})
    return rows


def build_star_relations(
    n: int, m: int, scheme: ColorScheme | None = None
) -> QuotientSpace:
    """Trivalent graph space modulo the (*)-relation and label change.

    One relation per contracted graph ``Γ′``: the functional ``d*Γ′`` collecting
    the coefficient of ``Γ′`` in ``dΓ`` over all ``Γ``.
    """
    permute = scheme is None
    space = QuotientSpace(
        f"A({n},{m})" if permute else f"A({n},{m};C)", label_change_key(permute)
    )
    graphs = enumerate_graphs(n, m, (1,) * m, scheme)
    space.register(graphs)
    for _, row in sorted(_star_rows(graphs, space._keyer).items()):
        if row:
            space.add_row(row)
    log.info(
        "star relations built",
        space=space.name,
        graphs=len(graphs),
        relations=space.relation_count,
        dimension=space.dimension,
    )
    return space


def _xi_row(
    graph: LabeledGraph, label: int, scheme: ColorScheme
) -> GraphVector:
    e = graph.edge(label)
    p, q = e.colors
    dp = scheme.degree(label, p)
    row = GraphVector()
    for x in scheme.names_of_degree(label, dp + 1):
        coef = scheme.boundary(label, x, p)
        if coef:
            sep = Edge(label, EdgeKind.SEPARATED, e.src, e.dst, (x, q))
            row.add(graph.replace_edge(sep), coef)
    for y in scheme.names_of_degree(label, dp - 1):
        coef = scheme.boundary(label, q, y)
        if coef:
            sep = Edge(label, EdgeKind.SEPARATED, e.src, e.dst, (p, y))
            row.add(graph.replace_edge(sep), coef)
    if p == q:
        row.add(graph.replace_edge(Edge(label, EdgeKind.COMPACT, e.src, e.dst)), -1)
    return row


def build_xi_relations(n: int, m: int, scheme: ColorScheme) -> list[GraphVector]:
    """ξ-relation rows, one per degree-0 separated edge ``(p, q)`` at label ``i``.

    ``Σ_x ∂_{xp}[Γ(x, q)] + Σ_y ∂_{qy}[Γ(p, y)] − δ_{pq}[Γ(∅, ∅)]``.
    """
    rows = []
    for label in range(1, m + 1):
        eta = tuple(0 if j == label else 1 for j in range(1, m + 1))
        for graph in enumerate_graphs(n, m, eta, scheme):
            row = _xi_row(graph, label, scheme)
            if row:
                rows.append(row)
    return rows


def colored_space(n: int, m: int, scheme: ColorScheme) -> QuotientSpace:
    """``A_{n,m}(C⃗)/ξ``."""
    space = build_star_relations(n, m, scheme)
    for row in build_xi_relations(n, m, scheme):
        space.add_relation(row)
    space.name = f"A({n},{m};C)/xi"
    return space


class HnSpace(QuotientSpace):
    """Reduced presentation of ``H_n(C⃗)`` on graphs without bivalent vertices."""

    def __init__(self, n: int, m: int, scheme: ColorScheme):
        super().__init__(f"H({n},{m})")
        self.n = n
        self.m = m
        self.scheme = scheme
        generators = 0
        for position in range(m):
            eta = tuple(2 if j == position else 1 for j in range(m))
            for graph in enumerate_graphs(n, m, eta, scheme):
                image = boundary_image(GraphVector.of(graph), scheme)
                generators += 1
                if image:
                    self.add_relation(image)
        log.info(
            "H space built",
            space=self.name,
            generators=generators,
            relations=self.relation_count,
        )

    def reduce_vector(self, v: GraphVector) -> SparseRow:
        for graph, _ in v:
            degrees = graph.degree_vector(self.scheme)
            if any(not 0 <= eta <= 2 for eta in degrees):
                raise InvalidDegree(f"degree vector {degrees} outside 0..2")
        return self.project(normalize(v, self.scheme))


def boundary_image(v: GraphVector, scheme: ColorScheme) -> GraphVector:
    """``(d + d′)v`` in the reduced presentation."""
    return normalize(differential_d(v) + differential_dprime(v, scheme), scheme)


@lru_cache(maxsize=8)
def h_space(n: int, m: int, scheme: ColorScheme) -> HnSpace:
    return HnSpace(n, m, scheme)


def h_n_reduce(v: GraphVector, scheme: ColorScheme) -> SparseRow:
    """Coordinates of ``⟨v⟩`` in ``H_n(C⃗)``.

    ``v`` may mix ``G_n`` terms (all labels) and ``G_{n−1}`` terms (one label
    missing); ``n`` and ``m`` are read off the ``G_n`` terms.

    Raises:
        InvalidDegree: If a term has an edge degree outside 0..2.
    """
    if v.is_zero():
        return SparseRow()
    n = max(graph.n for graph, _ in v)
    m = max(len(graph.labels) for graph, _ in v if graph.n == n)
    return h_space(n, m, scheme).reduce_vector(v)


# -- universal cycle ----------------------------------------------------------


def tensor_reduce(
    pairs: Iterable[tuple[Mapping[Hashable, Fraction], Mapping[Hashable, Fraction]]],
) -> SparseRow:
    """``Σ left ⊗ right`` as a sparse row over key pairs."""
    total = SparseRow()
    for left, right in pairs:
        for lk, lv in left.items():
            total.iadd_coef(lv, {(lk, rk): rv for rk, rv in right.items()})
    return total


@dataclass
class UniversalCycle:
    """``γ̃ = Σ_Γ [Γ] ⊗ Γ`` over the trivalent graphs of one space."""

    space: QuotientSpace
    graphs: tuple[LabeledGraph, ...]

    def terms(self) -> list[tuple[SparseRow, LabeledGraph]]:
        return [(self.space.class_of(graph), graph) for graph in self.graphs]

    def apply(
        self, right: Callable[[LabeledGraph], Mapping[Hashable, Fraction]]
    ) -> SparseRow:
        """``Σ_Γ [Γ] ⊗ right(Γ)`` reduced to a sparse tensor."""
        return tensor_reduce((cls, right(graph)) for cls, graph in self.terms())


def universal_cycle(
    n: int, m: int, scheme: ColorScheme | None = None, *, with_xi: bool = True
) -> UniversalCycle:
    if scheme is None:
        space = build_star_relations(n, m)
    elif with_xi:
        space = colored_space(n, m, scheme)
    else:
        space = build_star_relations(n, m, scheme)
    return UniversalCycle(space, tuple(enumerate_graphs(n, m, (1,) * m, scheme)))


# -- checks -------------------------------------------------------------------


def _tensor_sample(tensor: SparseRow, limit: int = 5) -> list[dict]:
    out = []
    for (left, right), coef in sorted(tensor.items())[:limit]:
        out.append(
            {"left": left.to_json(), "right": right.to_json(), "coeff": coef}
        )
    return out


def verify_d_squared(graphs: Iterable[LabeledGraph]) -> VerificationReport:
    report = VerificationReport(check="d∘d")
    checked = 0
    for graph in graphs:
        checked += 1
        twice = differential_d(differential_d(GraphVector.of(graph)))
        if twice:
            report.fail(graph=graph.to_json(), terms=len(twice))
    report.stats = {"graphs": checked}
    return report


def sample_graphs(
    graphs: list[LabeledGraph], samples: int, rng: random.Random
) -> list[LabeledGraph]:
    if samples >= len(graphs):
        return graphs
    return rng.sample(graphs, samples)


def verify_cycle_closed(n: int, m: int, scheme: ColorScheme) -> VerificationReport:
    """``⟨(1⊗(d+d′))γ̃⟩ = 0`` in ``A(C⃗)/ξ ⊗ H_n(C⃗)``."""
    report = VerificationReport(check="cycle-closed")
    cycle = universal_cycle(n, m, scheme)
    hn = h_space(n, m, scheme)

    def right(graph: LabeledGraph) -> SparseRow:
        return hn.reduce_vector(boundary_image(GraphVector.of(graph), scheme))

    tensor = cycle.apply(right)
    if tensor:
        report.fail(nonzero_terms=len(tensor), sample=_tensor_sample(tensor))
    report.stats = {
        "graphs": len(cycle.graphs),
        "a_dimension": cycle.space.dimension,
        "h_relations": hn.relation_count,
    }
    return report
