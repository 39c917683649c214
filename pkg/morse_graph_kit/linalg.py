"""Exact rational linear algebra.

Two representations are used:

* ``SparseRow`` (a dict ``key -> Fraction``) for graph-space vectors, whose keys
  are graphs and whose dimension runs into the thousands;
* ``sympy.Matrix`` with rational entries for chain complexes, which stay small.
"""

from __future__ import annotations

from collections.abc import Hashable, Iterable, Iterator, Mapping
from fractions import Fraction
from typing import Any

import sympy

from .errors import InconsistentInput

Rational = Fraction | int


def parse_rational(value: Any) -> Fraction:
    """Parse ``"p/q"``, ``"p"``, an int or a Fraction. Floats are rejected."""
    if isinstance(value, bool):
        raise ValueError(f"not a rational: {value!r}")
    if isinstance(value, (Fraction, int)):
        return Fraction(value)
    if isinstance(value, sympy.Rational):
        return Fraction(int(value.p), int(value.q))
    if isinstance(value, str):
        return Fraction(value.strip())
    raise ValueError(f"not a rational: {value!r}")


def format_rational(value: Rational | sympy.Rational) -> str:
    q = to_fraction(value)
    return f"{q.numerator}/{q.denominator}"


def to_fraction(value: Any) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, sympy.Basic):
        rational = sympy.Rational(value)
        return Fraction(int(rational.p), int(rational.q))
    return Fraction(value)


def to_sympy(value: Rational) -> sympy.Rational:
    q = Fraction(value)
    return sympy.Rational(q.numerator, q.denominator)


class SparseRow(dict):
    """Dictionary ``key -> Fraction`` where absent keys are zero.

    Zero coefficients are never stored.
    """

    def __init__(self, data: Mapping[Hashable, Rational] | Iterable = ()):
        super().__init__()
        self.__iadd__(data)

    def __missing__(self, key: Hashable) -> Fraction:
        return Fraction(0)

    def iadd_coef(self, coef: Rational, other: Mapping[Hashable, Rational]) -> SparseRow:
        """``self += coef * other``."""
        if coef == 0:
            return self
        for key, value in other.items():
            if value == 0:
                continue
            total = self.get(key, 0) + coef * value
            if total == 0:
                self.pop(key, None)
            else:
                self[key] = Fraction(total)
        return self

    def __iadd__(self, other: Mapping[Hashable, Rational] | Iterable) -> SparseRow:
        items = other.items() if isinstance(other, Mapping) else other
        for key, value in items:
            if value == 0:
                continue
            total = self.get(key, 0) + Fraction(value)
            if total == 0:
                self.pop(key, None)
            else:
                self[key] = total
        return self

    def __add__(self, other: Mapping[Hashable, Rational]) -> SparseRow:
        return SparseRow(self).__iadd__(other)

    def __sub__(self, other: Mapping[Hashable, Rational]) -> SparseRow:
        return SparseRow(self).iadd_coef(-1, other)

    def __neg__(self) -> SparseRow:
        return self * -1

    def __mul__(self, scalar: Rational) -> SparseRow:
        if scalar == 0:
            return SparseRow()
        return SparseRow((k, v * scalar) for k, v in self.items())

    __rmul__ = __mul__

    def is_zero(self) -> bool:
        return not self


class SparseEchelon:
    """Incremental reduced row echelon form over ℚ with sparse rows.

    Each stored row has coefficient 1 at its pivot, and no stored row contains
    another row's pivot, so a vector is reduced in one pass.

    Args:
        order: Sort key on row keys; the pivot of a new row is its smallest key.
    """

    def __init__(self, order=None):
        self._order = order if order is not None else (lambda key: key)
        self._rows: dict[Hashable, SparseRow] = {}
        # key -> pivots whose rows contain key
        self._occurs: dict[Hashable, set[Hashable]] = {}

    def __len__(self) -> int:
        return len(self._rows)

    @property
    def pivots(self) -> list[Hashable]:
        return sorted(self._rows, key=self._order)

    def row(self, pivot: Hashable) -> SparseRow:
        return self._rows[pivot]

    def rows(self) -> Iterator[tuple[Hashable, SparseRow]]:
        for pivot in self.pivots:
            yield pivot, self._rows[pivot]

    def reduce(self, vector: Mapping[Hashable, Rational]) -> SparseRow:
        """Return the normal form of ``vector`` modulo the stored rows."""
        result = SparseRow(vector)
        for key in [k for k in result if k in self._rows]:
            coef = result.get(key, 0)
            if coef:
                result.iadd_coef(-coef, self._rows[key])
        return result

    def add(self, vector: Mapping[Hashable, Rational]) -> bool:
        """Add a relation. Returns False when it was already in the span."""
        reduced = self.reduce(vector)
        if not reduced:
            return False
        pivot = min(reduced, key=self._order)
        reduced = reduced * (1 / reduced[pivot])
        for other in list(self._occurs.get(pivot, ())):
            row = self._rows[other]
            coef = row.get(pivot, 0)
            if not coef:
                continue
            before = set(row)
            row.iadd_coef(-coef, reduced)
            for key in before - set(row):
                self._occurs[key].discard(other)
            for key in set(row) - before:
                self._occurs.setdefault(key, set()).add(other)
        self._rows[pivot] = reduced
        for key in reduced:
            self._occurs.setdefault(key, set()).add(pivot)
        return True

    def kernel_basis(self, columns: Iterable[Hashable]) -> Iterator[SparseRow]:
        """Yield a basis of the functionals vanishing on every stored row.

        A functional is given by its values on ``columns`` (which must contain
        every key occurring in a row). Free columns get value 1 in turn; pivot
        values follow from the rows.
        """
        for free in sorted(set(columns) - set(self._rows), key=self._order):
            functional = SparseRow({free: 1})
            for pivot in self._occurs.get(free, ()):
                if pivot == free:
                    continue
                functional[pivot] = -self._rows[pivot][free]
            yield SparseRow(functional)


def solve_min_pivot(a: sympy.Matrix, b: sympy.Matrix) -> sympy.Matrix:
    """Solve ``a x = b`` exactly, setting every free variable to zero.

    Raises:
        InconsistentInput: If the system has no solution.
    """
    if a.rows != b.rows:
        raise InconsistentInput(f"row mismatch: {a.rows} vs {b.rows}")
    if a.cols == 0:
        if any(entry != 0 for entry in b):
            raise InconsistentInput("nonzero right-hand side with no unknowns")
        return sympy.zeros(0, b.cols)
    if a.rows == 0:
        return sympy.zeros(a.cols, b.cols)
    reduced, pivots = a.row_join(b).rref()
    solution = sympy.zeros(a.cols, b.cols)
    for row, col in enumerate(pivots):
        if col >= a.cols:
            raise InconsistentInput("linear system is inconsistent")
        solution[col, :] = reduced[row, a.cols :]
    return solution


def matrix_rank(m: sympy.Matrix) -> int:
    if m.rows == 0 or m.cols == 0:
        return 0
    return m.rank()
