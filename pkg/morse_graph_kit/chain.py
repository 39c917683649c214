"""Based chain complexes over ℚ, graded endomorphisms and propagators.

Matrix convention: for a graded map ``M`` and generators ``x``, ``y``,
``M.entry(x, y)`` is the coefficient of ``y`` in ``M(x)``. Blocks are stored as
sympy matrices acting on column vectors, so ``block[i][row(y), col(x)]`` holds
that coefficient.
"""

from __future__ import annotations

import random
from collections.abc import Iterator, Mapping, Sequence
from fractions import Fraction
from typing import Any

import structlog
import sympy

from .errors import (
    DimensionError,
    DuplicateBasisName,
    InconsistentInput,
    InvalidHomotopy,
    NoSolution,
)
from .linalg import (
    format_rational,
    matrix_rank,
    parse_rational,
    solve_min_pivot,
    to_fraction,
)
from .reports import VerificationReport

log = structlog.get_logger(__name__)


def _zeros(rows: int, cols: int) -> sympy.Matrix:
    return sympy.zeros(rows, cols)


def _grow(m: sympy.Matrix, rows: int, cols: int) -> sympy.Matrix:
    """Embed ``m`` in the top-left corner of a larger zero matrix."""
    grown = _zeros(rows, cols)
    for r in range(m.rows):
        for c in range(m.cols):
            grown[r, c] = m[r, c]
    return grown


def _matrix_to_json(m: sympy.Matrix) -> list[list[str]]:
    return [[format_rational(m[r, c]) for c in range(m.cols)] for r in range(m.rows)]


def _matrix_from_json(rows: Sequence[Sequence[Any]], shape: tuple[int, int]) -> sympy.Matrix:
    m = _zeros(*shape)
    if len(rows) != shape[0] or any(len(row) != shape[1] for row in rows):
        raise DimensionError(f"expected a {shape[0]}x{shape[1]} matrix")
    for r, row in enumerate(rows):
        for c, value in enumerate(row):
            q = parse_rational(value)
            m[r, c] = sympy.Rational(q.numerator, q.denominator)
    return m


class BasedChainComplex:
    """Finite chain complex ``C_0 ← C_1 ← … ← C_d`` with named generators.

    Args:
        basis: ``basis[k]`` lists the generator names of degree ``k``.
        boundary: ``boundary[k]`` is the matrix of ``∂: C_{k+1} → C_k`` with
            rows indexed by ``basis[k]`` and columns by ``basis[k+1]``.

    Raises:
        DuplicateBasisName: If a name occurs twice.
        DimensionError: If a boundary block has the wrong shape.
        InconsistentInput: If ``∂∘∂ ≠ 0``.
    """

    def __init__(
        self,
        basis: Sequence[Sequence[str]],
        boundary: Sequence[sympy.Matrix] | None = None,
    ):
        if not basis:
            raise DimensionError("a complex needs at least degree 0")
        self.basis: tuple[tuple[str, ...], ...] = tuple(tuple(b) for b in basis)
        self.max_degree = len(self.basis) - 1

        self._index: dict[str, tuple[int, int]] = {}
        for degree, names in enumerate(self.basis):
            for i, name in enumerate(names):
                if name in self._index:
                    raise DuplicateBasisName(f"generator name {name!r} is used twice")
                self._index[name] = (degree, i)

        if boundary is None:
            boundary = [
                _zeros(self.size(k), self.size(k + 1)) for k in range(self.max_degree)
            ]
        if len(boundary) != self.max_degree:
            raise DimensionError(
                f"expected {self.max_degree} boundary blocks, got {len(boundary)}"
            )
        self.boundary: tuple[sympy.Matrix, ...] = tuple(sympy.Matrix(m) for m in boundary)
        for k, m in enumerate(self.boundary):
            expected = (self.size(k), self.size(k + 1))
            if m.shape != expected:
                raise DimensionError(
                    f"boundary[{k}] has shape {m.shape}, expected {expected}"
                )
        for k in range(self.max_degree - 1):
            if not (self.boundary[k] * self.boundary[k + 1]).is_zero_matrix:
                raise InconsistentInput(f"∂∘∂ ≠ 0 on degree {k + 2}")

    # -- structure -----------------------------------------------------------

    def size(self, degree: int) -> int:
        if 0 <= degree <= self.max_degree:
            return len(self.basis[degree])
        return 0

    def names(self) -> Iterator[str]:
        for names in self.basis:
            yield from names

    def __contains__(self, name: object) -> bool:
        return name in self._index

    def __len__(self) -> int:
        return len(self._index)

    def degree_of(self, name: str) -> int:
        try:
            return self._index[name][0]
        except KeyError:
            raise KeyError(f"unknown generator {name!r}") from None

    def locate(self, name: str) -> tuple[int, int]:
        try:
            return self._index[name]
        except KeyError:
            raise KeyError(f"unknown generator {name!r}") from None

    def boundary_block(self, degree: int) -> sympy.Matrix:
        """Matrix of ``∂`` on ``C_degree`` (zero outside 1..d)."""
        if 1 <= degree <= self.max_degree:
            return self.boundary[degree - 1]
        return _zeros(self.size(degree - 1), self.size(degree))

    def boundary_coefficient(self, x: str, y: str) -> Fraction:
        """Coefficient of ``y`` in ``∂x``."""
        dx, ix = self.locate(x)
        dy, iy = self.locate(y)
        if dy != dx - 1:
            return Fraction(0)
        return to_fraction(self.boundary[dy][iy, ix])

    def boundary_endomorphism(self) -> GradedEndomorphism:
        return GradedEndomorphism(
            self, -1, {k: self.boundary[k - 1] for k in range(1, self.max_degree + 1)}
        )

    def homology_dimensions(self) -> dict[int, int]:
        dims = {}
        for k in range(self.max_degree + 1):
            outgoing = matrix_rank(self.boundary_block(k))
            incoming = matrix_rank(self.boundary_block(k + 1))
            dims[k] = self.size(k) - outgoing - incoming
        return dims

    def is_acyclic(self) -> bool:
        return not any(self.homology_dimensions().values())

    def require_acyclic(self) -> None:
        certificate = {k: v for k, v in self.homology_dimensions().items() if v}
        if certificate:
            raise NoSolution(
                f"complex is not acyclic: homology dimensions {certificate}",
                certificate,
            )

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, BasedChainComplex):
            return NotImplemented
        return self.basis == other.basis and all(
            a == b for a, b in zip(self.boundary, other.boundary)
        )

    def __hash__(self) -> int:
        return hash(self.basis)

    def __repr__(self) -> str:
        sizes = [len(b) for b in self.basis]
        return f"BasedChainComplex(sizes={sizes})"

    # -- constructors --------------------------------------------------------

    @classmethod
    def zero(cls, max_degree: int = 3) -> BasedChainComplex:
        return cls([[] for _ in range(max_degree + 1)])

    @classmethod
    def elementary(
        cls, degree: int, names: tuple[str, str], max_degree: int | None = None
    ) -> BasedChainComplex:
        """``p ↦ q`` with ``p`` in ``degree + 1`` and ``q`` in ``degree``."""
        top = degree + 1 if max_degree is None else max_degree
        return direct_sum_with_elementary(cls.zero(top), degree, names)

    # -- serialisation -------------------------------------------------------

    def to_json(self) -> dict[str, Any]:
        return {
            "max_degree": self.max_degree,
            "basis": [list(b) for b in self.basis],
            "boundary": [_matrix_to_json(m) for m in self.boundary],
        }

    @classmethod
    def from_json(cls, data: Mapping[str, Any]) -> BasedChainComplex:
        basis = data["basis"]
        if "max_degree" in data and data["max_degree"] != len(basis) - 1:
            raise DimensionError("max_degree does not match the basis")
        sizes = [len(b) for b in basis]
        blocks = data.get("boundary")
        if blocks is None:
            return cls(basis)
        if len(blocks) != len(basis) - 1:
            raise DimensionError("wrong number of boundary blocks")
        boundary = [
            _matrix_from_json(rows, (sizes[k], sizes[k + 1]))
            for k, rows in enumerate(blocks)
        ]
        return cls(basis, boundary)


class GradedEndomorphism:
    """Degree-``k`` map ``C → C`` stored blockwise.

    ``blocks[i]`` is the matrix of ``C_i → C_{i+k}``; absent blocks are zero.
    """

    def __init__(
        self,
        complex: BasedChainComplex,
        degree: int,
        blocks: Mapping[int, sympy.Matrix] | None = None,
    ):
        self.complex = complex
        self.degree = degree
        self._blocks: dict[int, sympy.Matrix] = {}
        for i, m in (blocks or {}).items():
            m = sympy.Matrix(m)
            expected = (complex.size(i + degree), complex.size(i))
            if m.shape != expected:
                raise DimensionError(
                    f"block {i} has shape {m.shape}, expected {expected}"
                )
            if expected[0] and expected[1] and not m.is_zero_matrix:
                self._blocks[i] = m

    @classmethod
    def zero(cls, complex: BasedChainComplex, degree: int) -> GradedEndomorphism:
        return cls(complex, degree)

    @classmethod
    def identity(cls, complex: BasedChainComplex) -> GradedEndomorphism:
        return cls(
            complex,
            0,
            {i: sympy.eye(complex.size(i)) for i in range(complex.max_degree + 1)},
        )

    @classmethod
    def from_entries(
        cls,
        complex: BasedChainComplex,
        degree: int,
        entries: Mapping[tuple[str, str], Any],
    ) -> GradedEndomorphism:
        """Build from ``{(x, y): coefficient of y in f(x)}``."""
        blocks: dict[int, sympy.Matrix] = {}
        for (x, y), value in entries.items():
            dx, ix = complex.locate(x)
            dy, iy = complex.locate(y)
            if dy != dx + degree:
                raise DimensionError(
                    f"entry ({x}, {y}) does not have degree {degree}"
                )
            block = blocks.setdefault(dx, _zeros(complex.size(dy), complex.size(dx)))
            q = parse_rational(value)
            block[iy, ix] += sympy.Rational(q.numerator, q.denominator)
        return cls(complex, degree, blocks)

    def block(self, i: int) -> sympy.Matrix:
        if i in self._blocks:
            return self._blocks[i]
        return _zeros(self.complex.size(i + self.degree), self.complex.size(i))

    def blocks(self) -> dict[int, sympy.Matrix]:
        return dict(self._blocks)

    def entry(self, x: str, y: str) -> Fraction:
        """Coefficient of ``y`` in ``self(x)``; zero if degrees do not match."""
        dx, ix = self.complex.locate(x)
        dy, iy = self.complex.locate(y)
        if dy != dx + self.degree or dx not in self._blocks:
            return Fraction(0)
        return to_fraction(self._blocks[dx][iy, ix])

    def apply(self, x: str) -> dict[str, Fraction]:
        dx, ix = self.complex.locate(x)
        target = dx + self.degree
        if dx not in self._blocks:
            return {}
        column = self._blocks[dx][:, ix]
        return {
            self.complex.basis[target][r]: to_fraction(column[r])
            for r in range(column.rows)
            if column[r] != 0
        }

    def nonzero_entries(self) -> Iterator[tuple[str, str, Fraction]]:
        for i in sorted(self._blocks):
            m = self._blocks[i]
            for c in range(m.cols):
                for r in range(m.rows):
                    if m[r, c] != 0:
                        yield (
                            self.complex.basis[i][c],
                            self.complex.basis[i + self.degree][r],
                            to_fraction(m[r, c]),
                        )

    def rebind(self, complex: BasedChainComplex) -> GradedEndomorphism:
        """Same blocks viewed on another complex with the same basis."""
        if complex.basis != self.complex.basis:
            raise DimensionError("rebinding requires an identical basis")
        return GradedEndomorphism(complex, self.degree, self._blocks)

    def _check_compatible(self, other: GradedEndomorphism) -> None:
        if self.complex.basis != other.complex.basis:
            raise DimensionError("endomorphisms live on different complexes")

    def compose(self, other: GradedEndomorphism) -> GradedEndomorphism:
        """``self ∘ other``."""
        self._check_compatible(other)
        blocks = {}
        for i in range(self.complex.max_degree + 1):
            mid = i + other.degree
            if i in other._blocks and mid in self._blocks:
                blocks[i] = self._blocks[mid] * other._blocks[i]
        return GradedEndomorphism(self.complex, self.degree + other.degree, blocks)

    def __matmul__(self, other: GradedEndomorphism) -> GradedEndomorphism:
        return self.compose(other)

    def _combine(self, other: GradedEndomorphism, sign: int) -> GradedEndomorphism:
        self._check_compatible(other)
        if self.degree != other.degree:
            raise DimensionError(
                f"cannot add maps of degree {self.degree} and {other.degree}"
            )
        blocks = dict(self._blocks)
        for i, m in other._blocks.items():
            blocks[i] = blocks[i] + sign * m if i in blocks else sign * m
        return GradedEndomorphism(self.complex, self.degree, blocks)

    def __add__(self, other: GradedEndomorphism) -> GradedEndomorphism:
        return self._combine(other, 1)

    def __sub__(self, other: GradedEndomorphism) -> GradedEndomorphism:
        return self._combine(other, -1)

    def __neg__(self) -> GradedEndomorphism:
        return self.scale(-1)

    def scale(self, factor: Any) -> GradedEndomorphism:
        q = parse_rational(factor)
        s = sympy.Rational(q.numerator, q.denominator)
        return GradedEndomorphism(
            self.complex, self.degree, {i: s * m for i, m in self._blocks.items()}
        )

    def is_zero(self) -> bool:
        return not self._blocks

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, GradedEndomorphism):
            return NotImplemented
        return (
            self.complex.basis == other.complex.basis
            and self.degree == other.degree
            and (self - other).is_zero()
        )

    __hash__ = None  # type: ignore[assignment]

    def __repr__(self) -> str:
        return f"GradedEndomorphism(degree={self.degree}, blocks={sorted(self._blocks)})"

    def to_json(self) -> dict[str, Any]:
        return {
            "degree": self.degree,
            "blocks": {str(i): _matrix_to_json(m) for i, m in sorted(self._blocks.items())},
        }

    @classmethod
    def from_json(
        cls, complex: BasedChainComplex, data: Mapping[str, Any]
    ) -> GradedEndomorphism:
        degree = int(data["degree"])
        blocks = {}
        for key, rows in data.get("blocks", {}).items():
            i = int(key)
            shape = (complex.size(i + degree), complex.size(i))
            blocks[i] = _matrix_from_json(rows, shape)
        return cls(complex, degree, blocks)


def boundary_prime(f: GradedEndomorphism) -> GradedEndomorphism:
    """``∂′f = ∂∘f + (−1)^{k+1} f∘∂`` for ``f`` of degree ``k``."""
    d = f.complex.boundary_endomorphism()
    sign = -1 if f.degree % 2 == 0 else 1
    return d @ f + (f @ d).scale(sign)


def is_propagator(g: GradedEndomorphism) -> bool:
    return g.degree == 1 and boundary_prime(g) == GradedEndomorphism.identity(g.complex)


def solve_propagator(complex: BasedChainComplex) -> GradedEndomorphism:
    """Degree-1 ``g`` with ``∂g + g∂ = 1``.

    Solved degree by degree from the bottom; free variables are set to zero, so
    the result is deterministic.

    Raises:
        NoSolution: If the complex is not acyclic (certificate: homology dimensions).
    """
    complex.require_acyclic()
    d = complex.max_degree
    blocks: dict[int, sympy.Matrix] = {}
    for i in range(d + 1):
        rhs = sympy.eye(complex.size(i))
        if i >= 1 and (i - 1) in blocks:
            rhs = rhs - blocks[i - 1] * complex.boundary[i - 1]
        if i == d:
            if not rhs.is_zero_matrix:
                raise NoSolution("top degree is not covered by ∂", {d: complex.size(d)})
            continue
        blocks[i] = solve_min_pivot(complex.boundary[i], rhs)
    g = GradedEndomorphism(complex, 1, blocks)
    log.debug(
        "propagator solved",
        sizes=[complex.size(k) for k in range(d + 1)],
        nonzero=sum(1 for _ in g.nonzero_entries()),
    )
    return g


def solve_homotopy(
    g1: GradedEndomorphism, g2: GradedEndomorphism
) -> GradedEndomorphism:
    """Degree-2 ``h`` with ``g1 − g2 = ∂h − h∂``.

    Raises:
        InconsistentInput: If ``g1 − g2`` is not a ``∂′``-cycle or the system fails.
    """
    complex = g1.complex
    difference = g1 - g2
    if difference.degree != 1:
        raise DimensionError("propagators have degree 1")
    if not boundary_prime(difference).is_zero():
        raise InconsistentInput("g1 − g2 is not a ∂′-cycle")

    d = complex.max_degree
    blocks: dict[int, sympy.Matrix] = {}
    for i in range(d + 1):
        rhs = difference.block(i)
        if i >= 1 and (i - 1) in blocks:
            rhs = rhs + blocks[i - 1] * complex.boundary[i - 1]
        if i + 2 > d:
            if not rhs.is_zero_matrix:
                raise InconsistentInput(f"no homotopy: residue in degree {i}")
            continue
        blocks[i] = solve_min_pivot(complex.boundary[i + 1], rhs)
    h = GradedEndomorphism(complex, 2, blocks)
    if boundary_prime(h) != difference:
        raise InconsistentInput("homotopy residual is nonzero")
    return h


def handle_slide_boundary(
    complex: BasedChainComplex, h: GradedEndomorphism
) -> BasedChainComplex:
    """Complex with ``∂′ = ∂ + ∂h − h∂`` for a square-zero degree-0 ``h``.

    Raises:
        InvalidHomotopy: If ``h`` has nonzero degree, ``h² ≠ 0`` or ``h∂h ≠ 0``.
    """
    if h.degree != 0:
        raise InvalidHomotopy(f"handle slides have degree 0, got {h.degree}")
    if not (h @ h).is_zero():
        raise InvalidHomotopy("h∘h ≠ 0")
    d = complex.boundary_endomorphism()
    if not (h @ d @ h).is_zero():
        raise InvalidHomotopy("h∂h ≠ 0")
    new = d + d @ h - h @ d
    boundary = [new.block(k + 1) for k in range(complex.max_degree)]
    return BasedChainComplex(complex.basis, boundary)


def transport_propagator(
    g: GradedEndomorphism, h: GradedEndomorphism, target: BasedChainComplex | None = None
) -> GradedEndomorphism:
    """``g′ = (1 − h) g (1 + h)``, a propagator for the handle-slid complex."""
    one = GradedEndomorphism.identity(g.complex)
    g_new = (one - h) @ g @ (one + h)
    if target is None:
        target = handle_slide_boundary(g.complex, h)
    return g_new.rebind(target)


def direct_sum_with_elementary(
    complex: BasedChainComplex, degree: int, names: tuple[str, str]
) -> BasedChainComplex:
    """``C ⊕ (p → q)`` with ``p`` of degree ``degree + 1``, ``q`` of degree ``degree``.

    New generators are appended to their degrees.
    """
    p, q = names
    if not 0 <= degree < complex.max_degree:
        raise DimensionError(
            f"degree must lie in 0..{complex.max_degree - 1}, got {degree}"
        )
    for name in names:
        if name in complex:
            raise DuplicateBasisName(f"generator name {name!r} is used twice")
    if p == q:
        raise DuplicateBasisName(f"generator name {p!r} is used twice")
    basis = [list(b) for b in complex.basis]
    basis[degree + 1].append(p)
    basis[degree].append(q)
    boundary = []
    for k, m in enumerate(complex.boundary):
        grown = _grow(m, len(basis[k]), len(basis[k + 1]))
        if k == degree:
            grown[len(basis[k]) - 1, len(basis[k + 1]) - 1] = 1
        boundary.append(grown)
    return BasedChainComplex(basis, boundary)


def _pad(g: GradedEndomorphism, target: BasedChainComplex) -> GradedEndomorphism:
    blocks = {}
    for i, m in g.blocks().items():
        blocks[i] = _grow(m, target.size(i + g.degree), target.size(i))
    return GradedEndomorphism(target, g.degree, blocks)


def elementary_propagator(
    target: BasedChainComplex, names: tuple[str, str]
) -> GradedEndomorphism:
    """``g^elem`` on ``target`` with ``g^elem(q) = p`` and zero elsewhere."""
    p, q = names
    return GradedEndomorphism.from_entries(target, 1, {(q, p): 1})


def extend_propagator(
    g: GradedEndomorphism, target: BasedChainComplex, names: tuple[str, str]
) -> GradedEndomorphism:
    """``g′ = g + g^elem`` on ``C ⊕ (p → q)``."""
    return _pad(g, target) + elementary_propagator(target, names)


def reduced_complex(
    complex: BasedChainComplex, top: str, bottom: str
) -> BasedChainComplex:
    """Quotient by a top generator and a bottom generator.

    Raises:
        NoSolution: If the result is not acyclic.
    """
    d = complex.max_degree
    dt, it = complex.locate(top)
    db, ib = complex.locate(bottom)
    if dt != d or db != 0:
        raise DimensionError(
            f"expected generators of degree {d} and 0, got {dt} and {db}"
        )
    basis = [list(b) for b in complex.basis]
    del basis[d][it]
    del basis[0][ib]
    boundary = [sympy.Matrix(m) for m in complex.boundary]
    if d >= 1:
        boundary[d - 1].col_del(it)
        boundary[0].row_del(ib)
    reduced = BasedChainComplex(basis, boundary)
    reduced.require_acyclic()
    return reduced


# -- random data for checks --------------------------------------------------


def _inverse(m: sympy.Matrix) -> sympy.Matrix:
    return m if m.rows == 0 else m.inv()


def _unimodular(rng: random.Random, size: int, steps: int = 6) -> sympy.Matrix:
    m = sympy.eye(size)
    if size < 2:
        return m
    for _ in range(steps):
        a, b = rng.sample(range(size), 2)
        m[a, :] = m[a, :] + rng.choice([-2, -1, 1, 2]) * m[b, :]
    return m


def random_acyclic_complex(
    rng: random.Random, max_generators: int = 6, max_degree: int = 3
) -> BasedChainComplex:
    """Sum of elementary complexes in a random integral basis."""
    pairs = rng.randint(1, max(1, max_generators // 2))
    complex = BasedChainComplex.zero(max_degree)
    for j in range(pairs):
        degree = rng.randrange(max_degree)
        complex = direct_sum_with_elementary(
            complex, degree, (f"a{degree + 1}.{j}", f"b{degree}.{j}")
        )
    changes = [_unimodular(rng, complex.size(k)) for k in range(max_degree + 1)]
    boundary = [
        changes[k] * m * _inverse(changes[k + 1]) for k, m in enumerate(complex.boundary)
    ]
    return BasedChainComplex(complex.basis, boundary)


def random_non_acyclic_complex(
    rng: random.Random, max_generators: int = 6, max_degree: int = 3
) -> BasedChainComplex:
    """Acyclic complex plus one cycle that is not a boundary."""
    base = random_acyclic_complex(rng, max(2, max_generators - 1), max_degree)
    degree = rng.randrange(max_degree + 1)
    basis = [list(b) for b in base.basis]
    basis[degree].append(f"z{degree}")
    boundary = []
    for k, m in enumerate(base.boundary):
        boundary.append(_grow(m, len(basis[k]), len(basis[k + 1])))
    return BasedChainComplex(basis, boundary)


def random_endomorphism(
    rng: random.Random, complex: BasedChainComplex, degree: int, bound: int = 2
) -> GradedEndomorphism:
    blocks = {}
    for i in range(complex.max_degree + 1):
        rows, cols = complex.size(i + degree), complex.size(i)
        if rows and cols:
            blocks[i] = sympy.Matrix(
                rows, cols, lambda r, c: rng.randint(-bound, bound)
            )
    return GradedEndomorphism(complex, degree, blocks)


def random_propagator(
    rng: random.Random, complex: BasedChainComplex
) -> GradedEndomorphism:
    """``solve_propagator(C) + ∂′k`` for a random integral degree-2 ``k``."""
    return solve_propagator(complex) + boundary_prime(
        random_endomorphism(rng, complex, 2)
    )


def random_square_zero(
    rng: random.Random, complex: BasedChainComplex
) -> GradedEndomorphism:
    """Rank-one ``h = u vᵀ`` with ``vᵀu = 0`` inside a single degree."""
    degrees = [k for k in range(complex.max_degree + 1) if complex.size(k) >= 2]
    if not degrees:
        raise DimensionError("a rank-one square-zero map needs two generators of one degree")
    k = rng.choice(degrees)
    n = complex.size(k)
    a, b = rng.sample(range(n), 2)
    u = sympy.zeros(n, 1)
    u[a] = rng.choice([-2, -1, 1, 2])
    v = sympy.zeros(n, 1)
    v[b] = rng.choice([-1, 1])
    return GradedEndomorphism(complex, 0, {k: u * v.T})


def verify_handle_slide(
    complex: BasedChainComplex, h: GradedEndomorphism, g: GradedEndomorphism
) -> VerificationReport:
    """Exact checks of the handle-slide and propagator-transport identities."""
    report = VerificationReport(check="handle-slide")
    slid = handle_slide_boundary(complex, h)
    one = GradedEndomorphism.identity(complex)
    d = complex.boundary_endomorphism()
    d_new = slid.boundary_endomorphism().rebind(complex)

    if d_new @ (one - h) != (one - h) @ d:
        report.fail(identity="∂′(1−h) = (1−h)∂")
    if d @ (one + h) != (one + h) @ d_new:
        report.fail(identity="∂(1+h) = (1+h)∂′")

    g_new = transport_propagator(g, h, slid)
    if not is_propagator(g_new):
        report.fail(identity="g′ is a propagator for ∂′")
    hgh = h @ g @ h
    if hgh.is_zero() and g_new.rebind(complex) - g != g @ h - h @ g:
        report.fail(identity="g′ − g = gh − hg")
    report.stats = {
        "generators": len(complex),
        "hgh_zero": hgh.is_zero(),
        "h_nonzero": sum(1 for _ in h.nonzero_entries()),
    }
    return report
