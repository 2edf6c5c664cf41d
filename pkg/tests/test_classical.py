from fractions import Fraction

import numpy as np
import pytest

from cstar_ergodic import (
    FiniteMeasureSystem,
    conditional_probability,
    cyclic_system,
    embed,
    is_ergodic,
    is_ergodic_classical,
    uniform_system,
)
from cstar_ergodic.errors import HypothesisError, StateError, ZeroProbabilityError


def test_exact_weights_kept_rational():
    sys = cyclic_system(3)
    assert sys.exact
    assert sys.measure({0, 1}) == Fraction(2, 3)


def test_weights_must_sum_to_one():
    with pytest.raises(StateError):
        FiniteMeasureSystem((Fraction(1, 2), Fraction(1, 3)), (0, 1))


def test_preimage_iterates():
    sys = uniform_system([1, 2, 0])
    assert sys.preimage({0}, 0) == {0}
    assert sys.preimage({0}, 1) == {2}
    assert sys.preimage({0}, 2) == {1}


def test_measure_preservation_of_permutations():
    sys = cyclic_system(5)
    assert sys.is_permutation() and sys.is_measure_preserving()


def test_collapsing_map_increases_measure():
    sys = uniform_system([0, 0])
    assert not sys.is_non_increasing()
    with pytest.raises(HypothesisError) as exc:
        embed(sys)
    assert exc.value.code == "not-contractive"


def test_map_onto_null_atom_is_contractive():
    # mass moves onto a null atom: mu(T^{-1}S) <= mu(S) holds
    sys = FiniteMeasureSystem((Fraction(1), Fraction(0)), (0, 0))
    assert sys.is_non_increasing()


def test_cycles():
    sys = uniform_system([1, 0, 3, 2])
    assert sorted(sys.cycles()) == [(0, 1), (2, 3)]


@pytest.mark.parametrize("table, ergodic", [
    ([1, 2, 3, 0], True),
    ([1, 0, 3, 2], False),
    ([0, 1, 2], False),
])
def test_classical_ergodicity_matches_cycle_count(table, ergodic):
    sys = uniform_system(table)
    assert is_ergodic_classical(sys) == ergodic
    assert (len(sys.cycles()) == 1) == ergodic


def test_embedding_composes_with_map():
    sys = uniform_system([2, 0, 1])
    dyn = embed(sys)
    f = np.diag([1.0, 2.0, 3.0]).astype(complex)
    # (f o T)(a) = f(T(a))
    np.testing.assert_allclose(np.diag(dyn.tau(f)), [3, 1, 2])


def test_conditional_probability():
    w = [Fraction(1, 4)] * 4
    assert conditional_probability(w, {0, 1}, {1, 2}) == Fraction(1, 2)
    with pytest.raises(ZeroProbabilityError):
        conditional_probability([1, 0], {0}, {1})
