"""Labeled graphs with compact, separated and broken edges.

Conventions:

* Black vertices are ``1..n``; edges carry integer labels that survive
  contraction, so a graph of ``G_{n-1}`` obtained from ``d`` simply misses one
  label.
* A separated edge ``src → dst`` colored ``(p, q)`` has ``p`` on its input
  (white vertex feeding ``dst``) and ``q`` on its output (white vertex fed by
  ``src``); ``src ∈ A_q`` and ``dst ∈ D_p``.
* Broken edges pass through one bivalent white vertex: ``BROKEN (r,)`` is
  ``src → r → dst``; ``BROKEN_IN (p, r, q)`` is a separated edge whose input
  piece is broken at ``r``; ``BROKEN_OUT (p, s, q)`` breaks the output piece.
* The orientation is ``dv_1∧…∧dv_n`` wedge the 2-forms of the compact edges in
  label order. Only compact edges can be reversed.
"""

from __future__ import annotations

import itertools
import json
from collections import Counter
from collections.abc import Iterable, Iterator, Mapping, Sequence
from dataclasses import dataclass, field, replace
from enum import Enum
from fractions import Fraction
from typing import Any

import networkx as nx
from sympy.combinatorics import Permutation
from sympy.utilities.iterables import multiset_permutations

from .chain import BasedChainComplex
from .errors import MalformedGraph
from .linalg import Rational, SparseRow, format_rational, parse_rational


class EdgeKind(str, Enum):
    COMPACT = "compact"
    SEPARATED = "separated"
    BROKEN = "broken"
    BROKEN_IN = "broken_in"
    BROKEN_OUT = "broken_out"


COLOR_SLOTS: dict[EdgeKind, tuple[str, ...]] = {
    EdgeKind.COMPACT: (),
    EdgeKind.SEPARATED: ("in", "out"),
    EdgeKind.BROKEN: ("mid",),
    EdgeKind.BROKEN_IN: ("in", "mid", "out"),
    EdgeKind.BROKEN_OUT: ("in", "mid", "out"),
}

REGULAR_KINDS = frozenset({EdgeKind.COMPACT, EdgeKind.SEPARATED})


def permutation_sign(images: Sequence[int]) -> int:
    """Sign of the permutation ``i ↦ images[i-1]`` of ``1..len(images)``."""
    if len(images) < 2:
        return 1
    return Permutation([v - 1 for v in images]).signature()


@dataclass(frozen=True, order=True)
class Edge:
    label: int
    kind: EdgeKind
    src: int
    dst: int
    colors: tuple[str, ...] = ()

    @property
    def is_regular(self) -> bool:
        return self.kind in REGULAR_KINDS

    @property
    def is_closure_loop(self) -> bool:
        return self.kind is not EdgeKind.COMPACT and self.src == self.dst

    @property
    def input_color(self) -> str:
        return self.colors[0]

    @property
    def output_color(self) -> str:
        return self.colors[-1]

    def degree(self, scheme: ColorScheme | None) -> int:
        """Edge degree: compact 1, separated ``d(p)−d(q)``, broken 0,
        broken-separated ``d(p)−d(q)−1``."""
        if self.kind is EdgeKind.COMPACT:
            return 1
        if self.kind is EdgeKind.BROKEN:
            return 0
        if scheme is None:
            raise MalformedGraph(f"edge {self.label} needs a color scheme")
        dp = scheme.degree(self.label, self.input_color)
        dq = scheme.degree(self.label, self.output_color)
        if self.kind is EdgeKind.SEPARATED:
            return dp - dq
        return dp - dq - 1

    def moved(self, src: int, dst: int) -> Edge:
        return replace(self, src=src, dst=dst)


@dataclass(frozen=True, order=True)
class LabeledGraph:
    """A graph with labeled vertices and edges.

    ``sign`` records the orientation relative to the canonical one; as a key in a
    :class:`GraphVector` it is always folded into the coefficient.
    """

    n: int
    edges: tuple[Edge, ...]
    sign: int = field(default=1, compare=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "edges", tuple(sorted(self.edges)))

    # -- structure -----------------------------------------------------------

    @property
    def labels(self) -> tuple[int, ...]:
        return tuple(e.label for e in self.edges)

    def edge(self, label: int) -> Edge:
        for e in self.edges:
            if e.label == label:
                return e
        raise KeyError(f"no edge labeled {label}")

    def valences(self) -> Counter:
        counts: Counter = Counter({v: 0 for v in range(1, self.n + 1)})
        for e in self.edges:
            counts[e.src] += 1
            counts[e.dst] += 1
        return counts

    @property
    def is_regular(self) -> bool:
        """No bivalent white vertices."""
        return all(e.is_regular for e in self.edges)

    @property
    def is_uncolored(self) -> bool:
        return all(e.kind is EdgeKind.COMPACT for e in self.edges)

    @property
    def has_closure_loop(self) -> bool:
        return any(e.is_closure_loop for e in self.edges)

    def degree_vector(self, scheme: ColorScheme | None = None) -> tuple[int, ...]:
        return tuple(e.degree(scheme) for e in self.edges)

    def with_sign(self, sign: int) -> LabeledGraph:
        return LabeledGraph(self.n, self.edges, sign)

    def unsigned(self) -> LabeledGraph:
        return self if self.sign == 1 else self.with_sign(1)

    def replace_edge(self, edge: Edge) -> LabeledGraph:
        edges = tuple(edge if e.label == edge.label else e for e in self.edges)
        return LabeledGraph(self.n, edges, self.sign)

    def closure(self) -> LabeledGraph:
        """Every edge fused into a compact edge ``src → dst``.

        The result may contain self-loops (from closure loops); it is meant for
        connectivity questions, not as a graph-space element.
        """
        return LabeledGraph(
            self.n,
            tuple(Edge(e.label, EdgeKind.COMPACT, e.src, e.dst) for e in self.edges),
            self.sign,
        )

    def is_connected(self) -> bool:
        g = nx.MultiGraph()
        g.add_nodes_from(range(1, self.n + 1))
        g.add_edges_from((e.src, e.dst) for e in self.edges)
        return nx.is_connected(g)

    def validate(self, scheme: ColorScheme | None = None) -> LabeledGraph:
        """Check structural rules; returns ``self``.

        Raises:
            MalformedGraph: On any violation.
        """
        if self.n < 1:
            raise MalformedGraph("a graph needs at least one black vertex")
        labels = self.labels
        if len(set(labels)) != len(labels):
            raise MalformedGraph(f"repeated edge labels {labels}")
        if any(label < 1 for label in labels):
            raise MalformedGraph("edge labels start at 1")
        for e in self.edges:
            if not (1 <= e.src <= self.n and 1 <= e.dst <= self.n):
                raise MalformedGraph(f"edge {e.label} has an endpoint outside 1..{self.n}")
            if len(e.colors) != len(COLOR_SLOTS[e.kind]):
                raise MalformedGraph(
                    f"{e.kind.value} edge {e.label} needs {len(COLOR_SLOTS[e.kind])} colors"
                )
            if e.kind is EdgeKind.COMPACT and e.src == e.dst:
                raise MalformedGraph(f"compact edge {e.label} is a self-loop")
            if scheme is not None and e.colors:
                complex = scheme.complex_for(e.label)
                for color in e.colors:
                    if color not in complex:
                        raise MalformedGraph(
                            f"color {color!r} of edge {e.label} is not a generator"
                        )
        low = [v for v, k in self.valences().items() if k < 3]
        if low:
            raise MalformedGraph(f"black vertices {low} have valence below 3")
        if not self.is_connected():
            raise MalformedGraph("closure is not connected")
        return self

    # -- serialisation -------------------------------------------------------

    def to_json(self) -> dict[str, Any]:
        edges = []
        colors: dict[str, dict[str, str]] = {}
        rho = []
        for e in self.edges:
            edges.append({"label": e.label, "class": e.kind.value, "src": e.src, "dst": e.dst})
            if e.colors:
                colors[str(e.label)] = dict(zip(COLOR_SLOTS[e.kind], e.colors))
            if e.kind is not EdgeKind.COMPACT and e.kind is not EdgeKind.BROKEN:
                rho.append([f"in{e.label}", f"out{e.label}"])
        data: dict[str, Any] = {"n": self.n, "edges": edges, "sign": self.sign}
        if colors:
            data["colors"] = colors
        if rho:
            data["rho"] = rho
        if self.has_closure_loop:
            data["flags"] = ["closure_loop"]
        return data

    @classmethod
    def from_json(
        cls, data: Mapping[str, Any], scheme: ColorScheme | None = None
    ) -> LabeledGraph:
        try:
            colors = data.get("colors", {})
            edges = []
            for raw in data["edges"]:
                kind = EdgeKind(raw["class"])
                label = int(raw["label"])
                slots = COLOR_SLOTS[kind]
                table = colors.get(str(label), {})
                edge_colors = tuple(str(table[slot]) for slot in slots)
                edges.append(Edge(label, kind, int(raw["src"]), int(raw["dst"]), edge_colors))
            graph = cls(int(data["n"]), tuple(edges), int(data.get("sign", 1)))
        except (KeyError, TypeError, ValueError) as exc:
            raise MalformedGraph(f"cannot read graph: {exc}") from exc
        if graph.sign not in (-1, 1):
            raise MalformedGraph(f"sign must be ±1, got {graph.sign}")
        return graph.validate(scheme)


@dataclass(frozen=True)
class ColorScheme:
    """The tuple ``C⃗`` of based complexes; edge label ``i`` uses ``complexes[i-1]``."""

    complexes: tuple[BasedChainComplex, ...]

    @classmethod
    def uniform(cls, complex: BasedChainComplex, m: int) -> ColorScheme:
        return cls(tuple(complex for _ in range(m)))

    @classmethod
    def trivial(cls, m: int, max_degree: int = 3) -> ColorScheme:
        return cls.uniform(BasedChainComplex.zero(max_degree), m)

    def complex_for(self, label: int) -> BasedChainComplex:
        if not 1 <= label <= len(self.complexes):
            raise MalformedGraph(f"no complex for edge label {label}")
        return self.complexes[label - 1]

    def degree(self, label: int, name: str) -> int:
        complex = self.complex_for(label)
        if name not in complex:
            raise MalformedGraph(f"color {name!r} of edge {label} is not a generator")
        return complex.degree_of(name)

    def names(self, label: int) -> tuple[str, ...]:
        return tuple(self.complex_for(label).names())

    def names_of_degree(self, label: int, degree: int) -> tuple[str, ...]:
        complex = self.complex_for(label)
        if 0 <= degree <= complex.max_degree:
            return complex.basis[degree]
        return ()

    def boundary(self, label: int, x: str, y: str) -> Fraction:
        """``∂_{xy}``: coefficient of ``y`` in ``∂x`` in the complex of ``label``."""
        return self.complex_for(label).boundary_coefficient(x, y)

    @property
    def is_trivial(self) -> bool:
        return all(len(c) == 0 for c in self.complexes)

    def to_json(self) -> dict[str, Any]:
        return {"complexes": [c.to_json() for c in self.complexes]}


# -- graph vectors ------------------------------------------------------------


class GraphVector:
    """Finite ℚ-linear combination of labeled graphs.

    Keys are graphs with ``sign == 1``; signed graphs fold their sign into the
    coefficient on insertion.
    """

    def __init__(
        self,
        terms: Mapping[LabeledGraph, Rational] | Iterable[tuple[LabeledGraph, Rational]] = (),
    ):
        self._terms = SparseRow()
        items = terms.items() if isinstance(terms, Mapping) else terms
        for graph, coef in items:
            self.add(graph, coef)

    @classmethod
    def of(cls, graph: LabeledGraph, coef: Rational = 1) -> GraphVector:
        return cls([(graph, coef)])

    def add(self, graph: LabeledGraph, coef: Rational = 1) -> None:
        if coef:
            self._terms.iadd_coef(graph.sign, {graph.unsigned(): Fraction(coef)})

    def items(self) -> list[tuple[LabeledGraph, Fraction]]:
        return sorted(self._terms.items())

    def coefficient(self, graph: LabeledGraph) -> Fraction:
        return graph.sign * self._terms.get(graph.unsigned(), Fraction(0))

    def as_row(self) -> SparseRow:
        return SparseRow(self._terms)

    def __iter__(self) -> Iterator[tuple[LabeledGraph, Fraction]]:
        return iter(self.items())

    def __len__(self) -> int:
        return len(self._terms)

    def __bool__(self) -> bool:
        return bool(self._terms)

    def is_zero(self) -> bool:
        return not self._terms

    def __add__(self, other: GraphVector) -> GraphVector:
        out = GraphVector()
        out._terms = self._terms + other._terms
        return out

    def __sub__(self, other: GraphVector) -> GraphVector:
        out = GraphVector()
        out._terms = self._terms - other._terms
        return out

    def __mul__(self, scalar: Rational) -> GraphVector:
        out = GraphVector()
        out._terms = self._terms * Fraction(scalar)
        return out

    __rmul__ = __mul__

    def __neg__(self) -> GraphVector:
        return self * -1

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, GraphVector):
            return NotImplemented
        return dict(self._terms) == dict(other._terms)

    __hash__ = None  # type: ignore[assignment]

    def __repr__(self) -> str:
        return f"GraphVector({len(self)} terms)"

    def to_jsonl(self) -> str:
        lines = [
            json.dumps(
                {"coeff": format_rational(coef), "graph": graph.to_json()},
                sort_keys=True,
                ensure_ascii=False,
            )
            for graph, coef in self.items()
        ]
        return "\n".join(lines) + ("\n" if lines else "")

    @classmethod
    def from_jsonl(cls, text: str, scheme: ColorScheme | None = None) -> GraphVector:
        vector = cls()
        for number, line in enumerate(text.splitlines(), start=1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise MalformedGraph(f"line {number}: {exc}") from exc
            if "graph" in record:
                graph = LabeledGraph.from_json(record["graph"], scheme)
                coef = parse_rational(record.get("coeff", "1"))
            else:
                graph = LabeledGraph.from_json(record, scheme)
                coef = Fraction(1)
            vector.add(graph, coef)
        return vector


# -- canonical forms ----------------------------------------------------------


def canonical_form(
    graph: LabeledGraph, permute_edge_labels: bool | None = None
) -> tuple[LabeledGraph, int]:
    """Canonical representative under the label-change relation.

    Vertex relabelings contribute their sign, compact-edge reversals −1 and edge
    label permutations +1. Edge labels are only permuted when
    ``permute_edge_labels`` is true (default: for uncolored graphs).

    Returns:
        ``(canonical, sign)`` with ``graph = sign · canonical``; ``sign`` is 0 when
        the graph equals its own negative.
    """
    if permute_edge_labels is None:
        permute_edge_labels = graph.is_uncolored
    sorted_labels = sorted(graph.labels)
    best_key: tuple | None = None
    signs: set[int] = set()

    for images in itertools.permutations(range(1, graph.n + 1)):
        sign = graph.sign * permutation_sign(images)
        body = []
        for e in graph.edges:
            src, dst = images[e.src - 1], images[e.dst - 1]
            if e.kind is EdgeKind.COMPACT and src > dst:
                src, dst = dst, src
                sign = -sign
            body.append((e.label, e.kind, src, dst, e.colors))
        if permute_edge_labels:
            shape = sorted(item[1:] for item in body)
            key = tuple((label, *rest) for label, rest in zip(sorted_labels, shape))
        else:
            key = tuple(sorted(body))
        if best_key is None or key < best_key:
            best_key, signs = key, {sign}
        elif key == best_key:
            signs.add(sign)

    assert best_key is not None
    canonical = LabeledGraph(graph.n, tuple(Edge(*item) for item in best_key))
    if len(signs) > 1:
        return canonical, 0
    return canonical, signs.pop()


# -- enumeration --------------------------------------------------------------


def _pair_shapes(n: int, m: int) -> Iterator[tuple[tuple[int, int], ...]]:
    """Multisets of ``m`` vertex pairs ``u < v`` giving every vertex valence ≥ 3."""
    pairs = [(u, v) for u in range(1, n + 1) for v in range(u + 1, n + 1)]

    def extend(start: int, chosen: list, valence: list) -> Iterator[tuple]:
        remaining = m - len(chosen)
        deficit = sum(max(0, 3 - k) for k in valence[1:])
        if deficit > 2 * remaining:
            return
        if remaining == 0:
            yield tuple(chosen)
            return
        for index in range(start, len(pairs)):
            u, v = pairs[index]
            valence[u] += 1
            valence[v] += 1
            chosen.append(pairs[index])
            yield from extend(index, chosen, valence)
            chosen.pop()
            valence[u] -= 1
            valence[v] -= 1

    yield from extend(0, [], [0] * (n + 1))


def _edge_options(
    label: int, eta: int, scheme: ColorScheme | None, trivalent_only: bool
) -> list[tuple[EdgeKind, tuple[str, ...]]]:
    options: list[tuple[EdgeKind, tuple[str, ...]]] = []
    if eta == 1:
        options.append((EdgeKind.COMPACT, ()))
    if scheme is None:
        return options
    complex = scheme.complex_for(label)
    names = list(complex.names())
    degree = complex.degree_of
    for p in names:
        for q in names:
            if degree(p) - degree(q) == eta:
                options.append((EdgeKind.SEPARATED, (p, q)))
    if trivalent_only:
        return options
    if eta == 0:
        options.extend((EdgeKind.BROKEN, (r,)) for r in names)
    for p in names:
        for q in names:
            if degree(p) - degree(q) - 1 != eta:
                continue
            for r in scheme.names_of_degree(label, degree(p) - 1):
                options.append((EdgeKind.BROKEN_IN, (p, r, q)))
            for s in scheme.names_of_degree(label, degree(q) + 1):
                options.append((EdgeKind.BROKEN_OUT, (p, s, q)))
    return options


def enumerate_graphs(
    n: int,
    m: int,
    eta: Sequence[int] | None = None,
    scheme: ColorScheme | None = None,
    *,
    trivalent_only: bool = True,
    labels: Sequence[int] | None = None,
) -> list[LabeledGraph]:
    """All labeled graphs with ``n`` black vertices and edge degrees ``eta``.

    Graphs are distinct up to label-preserving isomorphism, carry the canonical
    orientation, have black valences ≥ 3, no closure loops, and a connected
    closure. ``trivalent_only`` excludes bivalent (broken) edges.
    """
    labels = tuple(labels) if labels is not None else tuple(range(1, m + 1))
    if len(labels) != m:
        raise MalformedGraph(f"expected {m} labels, got {len(labels)}")
    eta = tuple(eta) if eta is not None else (1,) * m
    if len(eta) != m:
        raise MalformedGraph(f"degree vector {eta} does not have {m} entries")
    options = [
        _edge_options(label, eta_i, scheme, trivalent_only)
        for label, eta_i in zip(labels, eta)
    ]
    if any(not opts for opts in options):
        return []

    found: set[LabeledGraph] = set()
    for shape in _pair_shapes(n, m):
        for assignment in multiset_permutations(list(shape)):
            choices = [
                [
                    Edge(label, kind, src, dst, colors)
                    for kind, colors in opts
                    for src, dst in ((u, v), (v, u))
                ]
                for label, opts, (u, v) in zip(labels, options, assignment)
            ]
            for edges in itertools.product(*choices):
                graph = LabeledGraph(n, edges)
                if graph.is_connected():
                    found.add(graph)
    return sorted(found)


@dataclass(frozen=True)
class Labeling:
    """A relabeling of a reference graph.

    Attributes:
        vertex_map: ``vertex_map[v-1]`` is the new label of vertex ``v``.
        label_map: ``label_map[j]`` is the new label of the ``j``-th edge (in label
            order).
        flips: New labels of compact edges whose direction is reversed.
    """

    vertex_map: tuple[int, ...]
    label_map: tuple[int, ...]
    flips: frozenset[int] = frozenset()

    @property
    def sign(self) -> int:
        """Orientation sign: vertex permutation times ``(−1)^{#flips}``."""
        return permutation_sign(self.vertex_map) * (-1) ** len(self.flips)

    def apply(self, graph: LabeledGraph) -> LabeledGraph:
        """The relabeled graph, with ``sign`` relative to its canonical orientation."""
        edges = []
        for e, new_label in zip(graph.edges, self.label_map):
            src, dst = self.vertex_map[e.src - 1], self.vertex_map[e.dst - 1]
            if new_label in self.flips:
                src, dst = dst, src
            edges.append(Edge(new_label, e.kind, src, dst, e.colors))
        return LabeledGraph(graph.n, tuple(edges), graph.sign * self.sign)

    def to_json(self) -> dict[str, Any]:
        return {
            "vertex_map": list(self.vertex_map),
            "label_map": list(self.label_map),
            "flips": sorted(self.flips),
        }


def enumerate_labelings(graph: LabeledGraph) -> list[tuple[Labeling, LabeledGraph]]:
    """Every ``(α, β, orientation)`` relabeling of ``graph``.

    There are ``n!·m!·2^c`` of them (``c`` compact edges); a labeled graph with
    automorphism group ``Aut`` appears ``|Aut|`` times.
    """
    labels = graph.labels
    out = []
    for vertex_map in itertools.permutations(range(1, graph.n + 1)):
        for label_map in itertools.permutations(labels):
            compact = [
                new for e, new in zip(graph.edges, label_map) if e.kind is EdgeKind.COMPACT
            ]
            for size in range(len(compact) + 1):
                for flips in itertools.combinations(sorted(compact), size):
                    labeling = Labeling(vertex_map, label_map, frozenset(flips))
                    out.append((labeling, labeling.apply(graph)))
    return out


def theta_graph() -> LabeledGraph:
    """Θ: two vertices, three compact edges ``1 → 2``."""
    return LabeledGraph(2, tuple(Edge(i, EdgeKind.COMPACT, 1, 2) for i in (1, 2, 3)))
