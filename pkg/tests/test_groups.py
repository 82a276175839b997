import numpy as np
import pytest
from hypothesis import given, strategies as st

from ddsim.errors import ConfigError, ParameterError
from ddsim.groups import (DDGroup, Path, closure_table_bruteforce, count_simultaneous_rotations,
                          efficient_group, group_from_name, hadamard_group_8, m_prime_path,
                          nested_group, parse_path, sample_pauli_group_element)
from ddsim.pauli import PauliString

P = PauliString.parse


def names(g):
    return [str(e) for e in g.elements]


def test_gzy_n4():
    assert names(efficient_group("ZY", 4)) == ["I", "Z1 Z3", "Z1 Y2 Z3 Y4", "Y2 Y4"]


def test_gxy_n2():
    assert names(efficient_group("XY", 2)) == ["I", "X1", "X1 Y2", "Y2"]


def test_odd_group():
    assert names(efficient_group("odd", 4)) == ["I", "X1 X3", "Y1 Y3", "Z1 Z3"]


@pytest.mark.parametrize("kind", ["XY", "XZ", "ZY", "ODD"])
@pytest.mark.parametrize("n", [2, 4, 8])
def test_efficient_groups_closed(kind, n):
    g = efficient_group(kind, n)
    assert g.is_closed() and g.involutions()
    assert g.table.tolist() == closure_table_bruteforce(g.elements)


@pytest.mark.parametrize("kind", ["XY", "XZ", "ZY"])
def test_perpendicular_axes(kind):
    g = efficient_group(kind, 6)
    odd, even = g[1].letters[0::2], g[3].letters[1::2]
    assert len(set(odd)) == 1 and len(set(even)) == 1 and odd[0] != even[0]


def test_odd_n_rejected():
    with pytest.raises(ParameterError):
        efficient_group("XY", 5)


def test_nested_m1():
    assert names(nested_group(1)) == ["I", "Z2", "X2", "Y2"]


@pytest.mark.parametrize("m", [1, 2, 3])
def test_nested_size_and_closure(m):
    g = nested_group(m)
    assert len(g) == 4 ** m
    assert g.is_closed()


def test_nested_m2_columns():
    g = nested_group(2)
    assert str(g[1]) == "Z2"
    # consecutive Gray-code columns differ on exactly one site
    for a, b in zip(g.elements, g.elements[1:]):
        assert (a * b).weight == 1


def test_m_prime_path():
    p = m_prime_path(2)
    assert p.order[:4] == (0, 1, 2, 3)
    assert sorted(p.order) == list(range(16))
    assert m_prime_path(1) == Path.identity(4)


def test_g8():
    g = hadamard_group_8()
    assert g[0].is_identity()
    assert str(g[1]) == "Z3 Z4 Y5 Y6 X7 X8"
    assert g.table.tolist() == closure_table_bruteforce(g.elements)
    assert g.is_closed()


def test_q_counts():
    assert sum(count_simultaneous_rotations(2, r) for r in range(3)) == 16
    assert all(count_simultaneous_rotations(m, 0) == 1 for m in range(1, 6))
    q = [count_simultaneous_rotations(4, r) for r in range(5)]
    assert int(np.argmax(q)) == 3
    m = 5
    assert count_simultaneous_rotations(m, 1) / 4 ** m == pytest.approx(3 * m / 4 ** m)
    assert count_simultaneous_rotations(m, m) / 4 ** m == pytest.approx(0.75 ** m)
    with pytest.raises(ParameterError):
        count_simultaneous_rotations(2, 3)


def test_pauli_sampling_uniform():
    rng = np.random.default_rng(1)
    counts = np.zeros((3, 4))
    for _ in range(10_000):
        p = sample_pauli_group_element(3, rng)
        for q, ch in enumerate(p.letters):
            counts[q, "IXYZ".index(ch)] += 1
    freq = counts / 10_000
    sigma = np.sqrt(0.25 * 0.75 / 10_000)
    assert np.all(np.abs(freq - 0.25) < 3 * sigma + 1e-3)


def test_pauli_sampling_determinism():
    def stream(seed):
        rng = np.random.default_rng(seed)
        return [sample_pauli_group_element(6, rng) for _ in range(5)]

    assert stream(5) == stream(5)
    assert stream(5) != stream(6)


def test_group_validation():
    with pytest.raises(ParameterError):
        DDGroup((P("X"), P("I")))
    with pytest.raises(ParameterError):
        DDGroup((P("I"), P("X"), P("X")))


def test_names_and_paths():
    assert group_from_name("gzy", 4).name == "GZY"
    assert len(group_from_name("NESTED(2)", 4)) == 16
    with pytest.raises(ConfigError):
        group_from_name("G8", 6)
    with pytest.raises(ConfigError):
        group_from_name("foo", 4)
    assert parse_path("path=[0,2,1,3]").order == (0, 2, 1, 3)
    assert parse_path("0 1 2 3") == Path.identity(4)
    with pytest.raises(ParameterError):
        Path((0, 0, 1))


@given(st.permutations(range(4)))
def test_path_accepts_permutations(order):
    p = Path(tuple(order))
    assert p.starts_with_identity() == (order[0] == 0)
