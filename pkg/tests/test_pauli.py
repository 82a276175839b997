import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ddsim.errors import DimensionError, ResourceError
from ddsim.pauli import (PauliString, PauliSum, commutator, conjugate, equals_zero,
                         format_sum, multiply, parse_sum, to_matrix)

from conftest import pauli_strings, pauli_sums

P = PauliString.parse


def S(text, n, c=1.0):
    return PauliSum.from_string(P(text, n), c)


def test_single_qubit_products():
    assert multiply(P("X"), P("Y")) == P("i Z")
    assert multiply(P("Z"), P("Z")) == P("I")
    assert multiply(P("XI"), P("IY")) == P("XY")


def test_product_size_mismatch():
    with pytest.raises(DimensionError):
        multiply(P("X"), P("XX"))


def test_commutator_examples():
    assert commutator(S("Z", 1), S("X", 1)) == S("Y", 1, 2j)
    a = S("XZ", 2) + S("YY", 2, 0.5)
    assert len(commutator(a, a)) == 0
    assert equals_zero(commutator(S("X1 X2", 2), S("Z1 Z2", 2)))


def test_commutator_dimension_error():
    with pytest.raises(DimensionError):
        commutator(S("X", 1), S("XX", 2))


def test_conjugate_examples():
    assert conjugate(S("Z", 1), P("X")) == S("Z", 1, -1.0)
    h = S("X1 X2", 4)
    assert conjugate(h, P("Y2 Y4", 4)) == -h
    assert conjugate(h, PauliString.identity(4)) == h


def test_to_matrix_examples():
    assert np.allclose(to_matrix(S("Z", 1)), np.diag([1, -1]))
    assert np.allclose(to_matrix(PauliSum.zero(2)), 0)
    h = S("XX", 2) + S("YY", 2) + S("ZZ", 2)
    assert np.allclose(np.linalg.eigvalsh(to_matrix(h)), [-3, 1, 1, 1])


def test_to_matrix_cap():
    with pytest.raises(ResourceError):
        to_matrix(S("Z1", 13))


def test_equals_zero():
    assert not equals_zero(S("Z", 1, 1e-9), 1e-12)
    assert equals_zero(PauliSum.zero(3), 1e-12)


def test_dense_ordering_site_one_is_most_significant():
    m = to_matrix(S("Z1", 2))
    assert np.allclose(np.diag(m), [1, 1, -1, -1])


@given(pauli_strings(5), pauli_strings(5), pauli_strings(5))
@settings(max_examples=1000)
def test_associativity(a, b, c):
    assert (a * b) * c == a * (b * c)


@given(pauli_strings(4))
def test_square_is_phase_identity(a):
    sq = a * a
    assert sq.is_identity()
    assert sq.phase == (2 * a.phase) % 4


@given(pauli_sums(3), pauli_strings(3))
def test_conjugation_involution(h, g):
    assert equals_zero(conjugate(conjugate(h, g), g) - h, 1e-12)


@given(pauli_sums(3), pauli_sums(3))
def test_commutator_antisymmetry(a, b):
    assert equals_zero(commutator(a, b) + commutator(b, a), 1e-10)


@given(pauli_sums(3, 3), pauli_sums(3, 3), pauli_sums(3, 3))
def test_jacobi(a, b, c):
    j = (commutator(a, commutator(b, c)) + commutator(b, commutator(c, a))
         + commutator(c, commutator(a, b)))
    assert equals_zero(j, 1e-9)


@given(pauli_sums(3), pauli_sums(3))
def test_matrix_homomorphism(a, b):
    assert np.allclose(to_matrix(a.product(b)), to_matrix(a) @ to_matrix(b), atol=1e-10)


@given(pauli_strings(4), pauli_strings(4))
def test_string_matrix_product(a, b):
    assert np.allclose((a * b).to_matrix(), a.to_matrix() @ b.to_matrix())


@given(pauli_sums(4))
def test_format_parse_roundtrip(h):
    back, _ = parse_sum(format_sum(h), 4)
    assert equals_zero(back - h, 1e-12)


def test_format_with_unit():
    h = S("Y1 X2 Z3", 3, 2.0)
    text = format_sum(h, "J²αΔt")
    assert text == "+2.0·J²αΔt · Y1 X2 Z3"
    back, unit = parse_sum(text, 3)
    assert back == h and unit == "J²αΔt"


def test_hermiticity_flag():
    assert S("XY", 2, 2.0).is_hermitian()
    assert not S("XY", 2, 2j).is_hermitian()


@given(st.integers(1, 6), st.data())
def test_commutes_with_matches_matrices(n, data):
    a = data.draw(pauli_strings(n))
    b = data.draw(pauli_strings(n))
    ma, mb = a.to_matrix(), b.to_matrix()
    assert a.commutes_with(b) == np.allclose(ma @ mb, mb @ ma)
