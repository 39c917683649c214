"""Chain complexes, propagators, homotopies and handle slides."""

from __future__ import annotations

import random
from fractions import Fraction

import pytest
import sympy

from morse_graph_kit.chain import (
    BasedChainComplex,
    GradedEndomorphism,
    boundary_prime,
    direct_sum_with_elementary,
    elementary_propagator,
    extend_propagator,
    handle_slide_boundary,
    is_propagator,
    random_acyclic_complex,
    random_non_acyclic_complex,
    random_propagator,
    random_square_zero,
    reduced_complex,
    solve_homotopy,
    solve_propagator,
    transport_propagator,
    verify_handle_slide,
)
from morse_graph_kit.errors import (
    DimensionError,
    DuplicateBasisName,
    InconsistentInput,
    InvalidHomotopy,
    NoSolution,
)


def test_elementary_propagator_maps_q_to_p(elementary):
    g = solve_propagator(elementary)
    assert g.entry("q", "p") == Fraction(1)
    assert is_propagator(g)


def test_zero_complex_has_zero_propagator():
    g = solve_propagator(BasedChainComplex.zero(3))
    assert g.is_zero()
    assert is_propagator(g)


def test_non_acyclic_complex_has_no_propagator():
    c = BasedChainComplex([["a"], []])
    with pytest.raises(NoSolution) as excinfo:
        solve_propagator(c)
    assert excinfo.value.certificate == {0: 1}


def test_boundary_squaring_to_nonzero_is_rejected():
    with pytest.raises(InconsistentInput, match="∂∘∂"):
        BasedChainComplex(
            [["a"], ["b"], ["c"]],
            [sympy.Matrix([[1]]), sympy.Matrix([[1]])],
        )


def test_duplicate_names_are_rejected():
    with pytest.raises(DuplicateBasisName):
        BasedChainComplex([["a"], ["a"]])


def test_boundary_shape_mismatch_is_rejected():
    with pytest.raises(DimensionError, match="shape"):
        BasedChainComplex([["a"], ["b"]], [sympy.Matrix([[1, 0]])])


def test_propagators_on_random_acyclic_complexes():
    rng = random.Random(11)
    for _ in range(100):
        c = random_acyclic_complex(rng, max_generators=20)
        assert is_propagator(solve_propagator(c))


def test_random_non_acyclic_complexes_report_their_homology():
    rng = random.Random(12)
    for _ in range(100):
        c = random_non_acyclic_complex(rng)
        with pytest.raises(NoSolution) as excinfo:
            solve_propagator(c)
        assert excinfo.value.certificate == {
            k: v for k, v in c.homology_dimensions().items() if v
        }
        assert sum(excinfo.value.certificate.values()) == 1


def test_homotopy_between_two_propagators(rng):
    c = random_acyclic_complex(rng, max_generators=8)
    g1 = solve_propagator(c)
    g2 = random_propagator(rng, c)
    h = solve_homotopy(g1, g2)
    assert h.degree == 2
    assert boundary_prime(h) == g1 - g2


def test_homotopy_requires_a_cycle_difference(elementary):
    g = solve_propagator(elementary)
    bogus = GradedEndomorphism.from_entries(elementary, 1, {("q", "p"): 2})
    with pytest.raises(InconsistentInput, match="cycle"):
        solve_homotopy(g, bogus)


def test_handle_slide_rejects_non_square_zero():
    c = BasedChainComplex([["a", "b"]])
    h = GradedEndomorphism.from_entries(c, 0, {("a", "b"): 1, ("b", "a"): 1})
    with pytest.raises(InvalidHomotopy, match="h∘h"):
        handle_slide_boundary(c, h)


def test_handle_slide_rejects_nonzero_degree(elementary):
    h = GradedEndomorphism.from_entries(elementary, 1, {("q", "p"): 1})
    with pytest.raises(InvalidHomotopy, match="degree 0"):
        handle_slide_boundary(elementary, h)


def test_handle_slide_identities_on_random_handle_slides():
    rng = random.Random(5)
    checked = 0
    while checked < 100:
        c = random_acyclic_complex(rng, max_generators=6)
        try:
            h = random_square_zero(rng, c)
        except DimensionError:
            continue
        report = verify_handle_slide(c, h, random_propagator(rng, c))
        assert report.passed, report.counterexamples
        checked += 1


def test_transported_propagator_is_a_propagator():
    c = direct_sum_with_elementary(
        BasedChainComplex.elementary(1, ("a", "b"), max_degree=3), 1, ("c", "d")
    )
    h = GradedEndomorphism.from_entries(c, 0, {("b", "d"): 1})
    slid = handle_slide_boundary(c, h)
    g = transport_propagator(solve_propagator(c), h, slid)
    assert is_propagator(g)
    assert slid.boundary_coefficient("a", "d") == Fraction(-1)


def test_direct_sum_appends_pair(elementary):
    born = direct_sum_with_elementary(elementary, 1, ("p+", "q+"))
    assert born.basis[2] == ("p+",)
    assert born.basis[1] == ("p", "q+")
    assert born.boundary_coefficient("p+", "q+") == Fraction(1)
    assert born.is_acyclic()


def test_direct_sum_rejects_existing_names(elementary):
    with pytest.raises(DuplicateBasisName):
        direct_sum_with_elementary(elementary, 0, ("p", "x"))


def test_extended_propagator_is_a_propagator(elementary):
    born = direct_sum_with_elementary(elementary, 2, ("p+", "q+"))
    g = extend_propagator(solve_propagator(elementary), born, ("p+", "q+"))
    assert is_propagator(g)
    assert g.entry("q+", "p+") == Fraction(1)
    assert elementary_propagator(born, ("p+", "q+")).entry("q", "p") == 0


def test_reduced_complex_of_perfect_function_is_zero():
    c = BasedChainComplex([["b"], [], [], ["a"]])
    reduced = reduced_complex(c, "a", "b")
    assert len(reduced) == 0


def test_reduced_complex_drops_top_and_bottom():
    padded = BasedChainComplex(
        [["bottom"], ["b"], ["a"], ["top"]],
        [sympy.zeros(1, 1), sympy.Matrix([[1]]), sympy.zeros(1, 1)],
    )
    expected = BasedChainComplex.elementary(1, ("a", "b"), max_degree=3)
    assert reduced_complex(padded, "top", "bottom") == expected


def test_reduced_complex_requires_top_and_bottom_degrees(elementary):
    with pytest.raises(DimensionError):
        reduced_complex(elementary, "q", "p")


def test_reduced_complex_reports_non_acyclic_quotient():
    c = BasedChainComplex([["b", "z"], [], [], ["a"]])
    with pytest.raises(NoSolution):
        reduced_complex(c, "a", "b")


def test_complex_json_round_trip(rng):
    c = random_acyclic_complex(rng)
    assert BasedChainComplex.from_json(c.to_json()) == c


def test_endomorphism_json_round_trip(rng):
    c = random_acyclic_complex(rng)
    g = random_propagator(rng, c)
    assert GradedEndomorphism.from_json(c, g.to_json()) == g
