"""Assembly of ``Z_{2k,3k}`` from moduli counts and traces.

``Z = Σ_Γ Tr_g[[Γ]] · #M_Γ`` over the labeled graphs of ``G_{2k,3k}(C⃗)``,
projected to ``A_{2k,3k}``. Counts may come from the geometric Θ engine
(``k = 1``) or be supplied for any ``k``; supplied counts are checked against
the boundary constraints ``#M_{(d+d′)Γ} = 0``.

Counts are keyed by labeled graphs exactly as :func:`enumerate_graphs` produces
them; a graph carrying ``sign = −1`` contributes ``−count`` to its key.
"""

from __future__ import annotations

import json
import math
import random
from collections.abc import Iterable, Mapping
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Any

import structlog

from .chain import (
    BasedChainComplex,
    GradedEndomorphism,
    direct_sum_with_elementary,
    extend_propagator,
)
from .complex import QuotientSpace, build_star_relations, h_space
from .errors import InvalidCounts, MalformedGraph
from .graph import (
    ColorScheme,
    Edge,
    EdgeKind,
    GraphVector,
    LabeledGraph,
    enumerate_graphs,
    enumerate_labelings,
    theta_graph,
)
from .linalg import SparseRow
from .morse import MorseSystem, morse_complex, reduced_complex
from .reports import VerificationReport
from .theta import ThetaCount, count_theta_flows, labeled_count
from .trace import TraceAssignment, counts_constraints, trace_vector

log = structlog.get_logger(__name__)


@dataclass
class CountsVector:
    """Signed moduli counts ``#M_Γ`` keyed by unsigned labeled graphs."""

    counts: dict[LabeledGraph, int] = field(default_factory=dict)
    provenance: str = "supplied"

    @classmethod
    def of(
        cls,
        items: Mapping[LabeledGraph, int] | Iterable[tuple[LabeledGraph, int]],
        provenance: str = "supplied",
    ) -> CountsVector:
        out = cls(provenance=provenance)
        pairs = items.items() if isinstance(items, Mapping) else items
        for graph, count in pairs:
            out.add(graph, count)
        return out

    def add(self, graph: LabeledGraph, count: int) -> None:
        key = graph.unsigned()
        value = self.counts.get(key, 0) + graph.sign * int(count)
        if value:
            self.counts[key] = value
        else:
            self.counts.pop(key, None)

    def get(self, graph: LabeledGraph) -> int:
        return graph.sign * self.counts.get(graph.unsigned(), 0)

    def items(self) -> list[tuple[LabeledGraph, int]]:
        return sorted(self.counts.items())

    def pair(self, row: Mapping[LabeledGraph, Fraction]) -> Fraction:
        """Value of a linear functional on graph keys."""
        return sum(
            (Fraction(coef) * self.counts.get(graph, 0) for graph, coef in row.items()),
            Fraction(0),
        )

    def __len__(self) -> int:
        return len(self.counts)

    def to_json(self) -> dict[str, Any]:
        return {
            "provenance": self.provenance,
            "counts": [{"graph": g.to_json(), "count": c} for g, c in self.items()],
        }

    @classmethod
    def from_json(
        cls, data: Mapping[str, Any], scheme: ColorScheme | None = None
    ) -> CountsVector:
        """Raises:
        MalformedGraph: If the document or one of its graphs is malformed.
        """
        try:
            out = cls(provenance=str(data.get("provenance", "supplied")))
            for entry in data["counts"]:
                graph = LabeledGraph.from_json(entry["graph"], scheme)
                out.add(graph, int(entry["count"]))
        except (KeyError, TypeError, AttributeError) as exc:
            raise MalformedGraph(f"malformed counts document: {exc}") from exc
        return out


@dataclass
class ZClass:
    """A class in ``A_{n,m}`` given by its reduced representative."""

    space: QuotientSpace
    row: SparseRow

    @property
    def basis(self) -> list[LabeledGraph]:
        return self.space.basis

    @property
    def coords(self) -> list[Fraction]:
        return [self.row.get(key, Fraction(0)) for key in self.basis]

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, ZClass):
            return NotImplemented
        return self.space.name == other.space.name and dict(self.row) == dict(other.row)

    def is_zero(self) -> bool:
        return not self.row

    def to_json(self) -> dict[str, Any]:
        return {
            "space": self.space.name,
            "basis": [g.to_json() for g in self.basis],
            "class_coords": self.coords,
        }


@lru_cache(maxsize=8)
def _target(n: int, m: int) -> QuotientSpace:
    return build_star_relations(n, m)


def _shape(counts: CountsVector) -> tuple[int, int]:
    if not counts.counts:
        raise InvalidCounts("cannot infer (n, m) from an empty counts vector", [])
    n = max(g.n for g in counts.counts)
    m = max(len(g.labels) for g in counts.counts if g.n == n)
    return n, m


def validate_counts(counts: CountsVector, n: int, m: int, scheme: ColorScheme) -> None:
    """Raises:
    InvalidCounts: Listing every violated ``(d + d′)Γ`` row.
    """
    violations = []
    for generator, row in counts_constraints(n, m, scheme):
        value = counts.pair(row)
        if value:
            violations.append({"generator": generator.to_json(), "value": value})
    if violations:
        log.warning("counts violate constraints", violations=len(violations))
        raise InvalidCounts(f"{len(violations)} boundary constraints violated", violations)


def assemble_z(
    counts: CountsVector,
    g: TraceAssignment,
    n: int | None = None,
    m: int | None = None,
    *,
    validate: bool = True,
) -> ZClass:
    """``Σ_Γ Tr_g[[Γ]]·#M_Γ`` in ``A_{n,m}``.

    Only regular graphs with ``n`` vertices, all ``m`` labels and every edge of
    degree 1 enter the sum; other keys take part in validation only.

    Raises:
        InvalidCounts: If ``validate`` and the counts violate a constraint.
    """
    if n is None or m is None:
        n, m = _shape(counts)
    scheme = g.scheme
    if validate:
        validate_counts(counts, n, m, scheme)
    target = _target(n, m)
    vector = GraphVector()
    used = 0
    for graph, count in counts.items():
        if graph.n != n or len(graph.labels) != m or not graph.is_regular:
            continue
        if any(e.degree(scheme) != 1 for e in graph.edges):
            continue
        vector = vector + trace_vector(g, GraphVector.of(graph)) * count
        used += 1
    z = ZClass(target, target.project(vector))
    log.info("z assembled", space=target.name, graphs=used, nonzero=len(z.row))
    return z


def sample_valid_counts(
    n: int, m: int, scheme: ColorScheme, rng: random.Random, bound: int = 3
) -> CountsVector:
    """Random integral counts satisfying every boundary constraint.

    A seeded integer combination of the annihilator basis of the ``H_n(C⃗)``
    relations, cleared of denominators.
    """
    space = h_space(n, m, scheme)
    columns = set(enumerate_graphs(n, m, (1,) * m, scheme))
    for _, row in space.relation_rows():
        columns.update(row)
    total = SparseRow()
    for functional in space.annihilator_basis(columns):
        total.iadd_coef(rng.randint(-bound, bound), functional)
    scale = math.lcm(1, *(Fraction(v).denominator for v in total.values()))
    counts = CountsVector(provenance="sampled")
    for graph, value in total.items():
        counts.add(graph, int(Fraction(value) * scale))
    return counts


# -- birth/death --------------------------------------------------------------


def apply_death(
    counts: CountsVector, label: int, names: tuple[str, str]
) -> CountsVector:
    """Counts after the canceling pair ``(p, q)`` of edge ``label`` dies.

    ``#M_{Γ(∅,∅)}`` gains ``#M_{Γ(p,q)}``; graphs still colored by ``p`` or
    ``q`` on that edge disappear.
    """
    p, q = names
    out = CountsVector(provenance=counts.provenance)
    for graph, count in counts.items():
        edge = graph.edge(label)
        if edge.kind is EdgeKind.SEPARATED and edge.colors == (p, q):
            out.add(graph.replace_edge(Edge(label, EdgeKind.COMPACT, edge.src, edge.dst)), count)
        elif p in edge.colors or q in edge.colors:
            continue
        else:
            out.add(graph, count)
    return out


def verify_birth_death(
    n: int,
    m: int,
    g: TraceAssignment,
    *,
    label: int = 1,
    degree: int = 0,
    names: tuple[str, str] = ("p+", "q+"),
    rng: random.Random | None = None,
) -> VerificationReport:
    """``Z(c, g′)`` on ``C ⊕ (p → q)`` equals ``Z(apply_death(c), g)``.

    ``g′ = g + g^elem`` on the edge ``label``; the counts ``c`` are seeded
    random integers on every graph of the enlarged scheme.
    """
    rng = rng or random.Random(0)
    report = VerificationReport(check="birth-death")
    born = direct_sum_with_elementary(g.scheme.complex_for(label), degree, names)
    maps = list(g.maps)
    maps[label - 1] = extend_propagator(g.for_label(label), born, names)
    g_born = TraceAssignment(tuple(maps))
    graphs = enumerate_graphs(n, m, (1,) * m, g_born.scheme)
    before = CountsVector.of(((graph, rng.randint(-3, 3)) for graph in graphs), "sampled")
    after = apply_death(before, label, names)
    z_before = assemble_z(before, g_born, n, m, validate=False)
    z_after = assemble_z(after, g, n, m, validate=False)
    if z_before != z_after:
        report.fail(before=z_before.coords, after=z_after.coords)
    report.stats = {"graphs": len(graphs), "label": label, "degree": degree}
    log.info("birth-death checked", passed=report.passed, graphs=len(graphs))
    return report


# -- Θ pipeline ---------------------------------------------------------------


def graph_key(graph: LabeledGraph) -> str:
    return json.dumps(graph.to_json(), sort_keys=True)


def reduced_scheme(system: MorseSystem) -> ColorScheme:
    """``C̃^{(i)} = C^{(i)}/⟨a_i, b_i⟩`` for every function, dropping the global
    maximum and minimum."""
    complexes: list[BasedChainComplex] = []
    for i in range(len(system.functions)):
        complex = morse_complex(system, i)
        top = complex.basis[complex.max_degree][-1]
        bottom = complex.basis[0][0]
        complexes.append(reduced_complex(complex, top, bottom))
    return ColorScheme(tuple(complexes))


def theta_counts(
    theta: ThetaCount,
) -> tuple[CountsVector, list[dict[str, Any]], VerificationReport]:
    """Per-graph counts of every labeling of Θ from one geometric count.

    Each labeling's count is measured from the determinant of its own defect
    system and must equal its orientation sign times the reference count.
    """
    report = VerificationReport(check="sign-covariance")
    counts = CountsVector(provenance="computed")
    per_labeling = []
    seen: dict[LabeledGraph, int] = {}
    for labeling, graph in enumerate_labelings(theta_graph()):
        expected = labeling.sign * theta.total
        measured = labeled_count(theta.solutions, labeling)
        per_labeling.append(
            {"labeling": labeling.to_json(), "count": measured, "expected": expected}
        )
        if measured != expected:
            report.fail(labeling=labeling.to_json(), count=measured, expected=expected)
        key = graph.unsigned()
        if key not in seen:
            seen[key] = expected
            counts.add(key, expected)
        elif seen[key] != expected:
            report.fail(graph=key.to_json(), counts=[seen[key], expected])
    report.stats = {"labelings": len(per_labeling), "graphs": len(seen)}
    return counts, per_labeling, report


def z23_pipeline(system: MorseSystem) -> tuple[ZClass, dict[str, Any]]:
    """Principal term of ``Z_{2,3}`` for three perfect Morse functions.

    The reduced complexes are zero, so ``g = 0`` and only compact Θ graphs
    contribute.

    Raises:
        ValueError: If a function is not perfect.
        NonGeneric, Unresolved: Propagated from the Θ count.
    """
    for i, fn in enumerate(system.functions):
        points = system.critical_points(i)
        if len(points) != 2:
            raise ValueError(f"{fn.name} has {len(points)} critical points; expected 2")
    scheme = reduced_scheme(system)
    theta = count_theta_flows(system)
    counts, per_labeling, covariance = theta_counts(theta)
    if not covariance.passed:
        log.error("labeled counts break sign covariance", failures=len(covariance.counterexamples))
    g = TraceAssignment(tuple(GradedEndomorphism.zero(c, 1) for c in scheme.complexes))
    z = assemble_z(counts, g, 2, 3)
    report = {
        **z.to_json(),
        "per_graph": {graph_key(graph): count for graph, count in counts.items()},
        "per_labeling": per_labeling,
        "covariance": covariance.to_json(),
        "theta": theta.to_json(),
        "anomaly": None,
    }
    return z, report
