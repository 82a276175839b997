import math

import numpy as np
import pytest

from ddsim.aht import verify_zero_orders
from ddsim.errors import ParameterError, ResourceError
from ddsim.groups import efficient_group, hadamard_group_8
from ddsim.model import heisenberg_chain
from ddsim.engine import PropagatorCache
from ddsim.schedule import REFERENCE_LINES, parse_labels
from ddsim.search import (SearchConfig, block_unitaries, candidate_paths, greedy_search,
                          replay_fidelities)

G8 = efficient_group("ZY", 8)
H8 = heisenberg_chain(8)


@pytest.fixture(scope="module")
def long_search():
    return greedy_search(SearchConfig(G8, H8, 0.1, 18))


def test_horizon_one_all_tie():
    res = greedy_search(SearchConfig(efficient_group("ZY", 4), heisenberg_chain(4), 0.1, 1))
    assert res.labels == [1, 2, 3, 4]
    assert res.log[0].n_ties == 24


def test_stream_cancels_orders(long_search):
    labels = long_search.labels
    assert len(labels) == 72
    for end in (24, 48, 72):
        assert all(verify_zero_orders(H8, G8, labels[:end])[:2])


def test_frozen_stream(long_search):
    want = ("1234-2143-2314-3241-3124-1342-4312-4213-1423-4132-2431-3421-"
            "4231-2413-4123-4321-3412-1432")
    assert long_search.dash == want


def test_committed_is_argmax(long_search):
    cache = PropagatorCache(H8)
    paths = candidate_paths(4)
    blocks = dict(zip(paths, block_unitaries(G8, H8, 0.1, paths, cache)))
    u = np.eye(256, dtype=complex)
    for rec in long_search.log:
        fits = [abs(np.trace(b @ u) / 256) ** 2 for b in blocks.values()]
        assert rec.fitness == pytest.approx(max(fits), abs=1e-12)
        assert rec.fitness >= rec.runner_up - 1e-12
        u = blocks[rec.path] @ u


def test_dominates_reference_substitution(long_search):
    ref = [v for line in REFERENCE_LINES for v in line]
    cache = PropagatorCache(H8)
    paths = candidate_paths(4)
    blocks = dict(zip(paths, block_unitaries(G8, H8, 0.1, paths, cache)))
    u = np.eye(256, dtype=complex)
    for n, rec in enumerate(long_search.log):
        alt = tuple(ref[4 * n:4 * n + 4])
        f_alt = abs(np.trace(blocks[alt] @ u) / 256) ** 2
        assert rec.fitness >= f_alt - 1e-12
        u = blocks[rec.path] @ u


def test_replay_beats_pdd(long_search):
    algor = replay_fidelities(G8, H8, 0.1, long_search.labels)
    pdd = replay_fidelities(G8, H8, 0.1, [1, 2, 3, 4] * 18)
    assert len(algor) == 18
    assert np.all(algor >= pdd - 1e-12)


def test_determinism():
    cfg = SearchConfig(efficient_group("ZY", 4), heisenberg_chain(4, anisotropy=2.0), 0.1, 6)
    assert greedy_search(cfg).labels == greedy_search(cfg).labels


def test_fitness_csv(long_search):
    lines = long_search.fitness_csv().splitlines()
    assert lines[0] == "cycle,path,fitness,runner_up,ties"
    assert len(lines) == 19 and lines[1].startswith("0,1234,")


def test_caps(caplog):
    assert len(candidate_paths(4)) == 24
    with caplog.at_level("WARNING"):
        assert len(candidate_paths(7, cap=24)) == math.factorial(7)
    assert "candidate paths" in caplog.text
    with pytest.raises(ResourceError):
        candidate_paths(8)
    with pytest.raises(ResourceError):
        greedy_search(SearchConfig(hadamard_group_8(), H8, 0.1, 1))


def test_config_validation():
    with pytest.raises(ParameterError):
        SearchConfig(G8, H8, 0.1, 0)
    with pytest.raises(ParameterError):
        SearchConfig(G8, H8, -0.1, 2)


def test_stream_parses_back(long_search):
    assert parse_labels(long_search.dash) == long_search.labels
