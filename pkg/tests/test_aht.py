import itertools
import math

import numpy as np
import pytest

from ddsim.aht import (ToggledSequence, build_rh2_completion_table, convergence_order_fit,
                       default_completion_table, effective_hamiltonian, load_completion_table,
                       magnus, magnus0, magnus1, magnus1_four, magnus2, magnus2_bruteforce,
                       numeric_effective_hamiltonian, pauli_decompose, save_completion_table,
                       supercycle_magnus, toggled, verify_zero_orders)
from ddsim.closed_forms import (PATH1, PATH2, FormParams, first_order_family,
                                h1_zeeman_path2, path_forms, uniform_pcdd2, uniform_pscpd2,
                                uniform_sdd)
from ddsim.engine import expm_hermitian
from ddsim.errors import BranchAmbiguityError, DomainError, ParameterError
from ddsim.groups import DDGroup, Path, efficient_group
from ddsim.model import heisenberg_chain
from ddsim.pauli import PauliString, PauliSum, equals_zero, to_matrix
from ddsim.schedule import (REFERENCE_LINES, cdd_labels, h2_labels, half_pcdd2_labels,
                            pdd_labels, scpd_labels, sdd_labels)

ZY4 = efficient_group("ZY", 4)
H4 = heisenberg_chain(4)
ALL_PATHS = [Path((0,) + p) for p in itertools.permutations((1, 2, 3))]


def single_qubit_group():
    return DDGroup(tuple(PauliString.from_letters(c) for c in "IXYZ"), name="1q")


def test_toggled_basics():
    assert toggled(H4, ZY4, [1]).hamiltonians == (H4,)
    seq = toggled(H4, ZY4, [1, 2, 3, 4])
    assert len({h.identity_key() for h in seq.hamiltonians}) == 4
    with pytest.raises(ParameterError):
        toggled(H4, ZY4, [5])


def test_toggled_sign_rule():
    # Y2 Y4 flips X and Z couplings that touch an even site
    h = toggled(H4, ZY4, [4]).hamiltonians[0]
    for p, c in h.terms.items():
        letters = set(p.letters) - {"I"}
        assert c == pytest.approx(-1.0 if letters <= {"X", "Z"} else 1.0)


def test_magnus0():
    for path in ALL_PATHS:
        assert equals_zero(magnus0(toggled(H4, ZY4, [1, 2, 3, 4], path)))
    assert magnus0(ToggledSequence((H4, H4))) == H4


def test_magnus1_trivial_cases():
    assert equals_zero(magnus1(ToggledSequence((H4,))))
    assert equals_zero(magnus1(toggled(H4, ZY4, sdd_labels(4))))
    assert equals_zero(magnus2(ToggledSequence((H4, H4, H4))))


def test_magnus1_four_slot_reduction():
    for path in ALL_PATHS:
        seq = toggled(heisenberg_chain(6, anisotropy=2.0), efficient_group("ZY", 6),
                      [1, 2, 3, 4], path, dt=0.3)
        assert equals_zero(magnus1(seq) - magnus1_four(seq), 1e-12)


def test_magnus2_fast_matches_bruteforce():
    g = efficient_group("XY", 4)
    h = heisenberg_chain(4, anisotropy=1.7, shifts=(0.3, -1.0, 0.2, 0.5))
    for labels in (pdd_labels(4), sdd_labels(4), [1, 3, 2, 2, 4, 1, 3]):
        seq = toggled(h, g, labels, dt=0.2)
        assert equals_zero(magnus2(seq) - magnus2_bruteforce(seq), 1e-12)


@pytest.mark.parametrize("kind", ["XY", "XZ", "ZY", "odd"])
def test_six_form_classification(kind):
    g = efficient_group(kind, 6)
    h = heisenberg_chain(6, anisotropy=1.3)
    results = {}
    for perm in itertools.permutations(range(4)):
        if perm[0] != 0:
            continue
        m1 = magnus1(toggled(h, g, [1, 2, 3, 4], Path(perm)))
        results[perm] = m1
    distinct = []
    for m in results.values():
        assert not equals_zero(m)
        if not any(equals_zero(m - d) for d in distinct):
            distinct.append(m)
    assert len(distinct) == 6


def test_gzy_pdd_first_order_forms():
    p = FormParams(6, 1.0, 1.3, 1.0)
    fam = first_order_family(p)
    h = heisenberg_chain(6, anisotropy=1.3)
    g = efficient_group("ZY", 6)

    def which(path):
        m1 = magnus1(toggled(h, g, [1, 2, 3, 4], Path(path)))
        return [k for k, v in fam.items() if equals_zero(m1 - v, 1e-12)]

    assert which((0, 1, 2, 3)) == ["-Ax"]
    assert which((0, 2, 1, 3)) in (["+Az"], ["-Az"])
    hits = {which((0,) + p)[0] for p in itertools.permutations((1, 2, 3))}
    assert hits == set(fam)


def test_reversal_properties():
    g = efficient_group("XY", 6)
    h = heisenberg_chain(6, anisotropy=0.8)
    for path in ALL_PATHS:
        seq = toggled(h, g, [1, 2, 3, 4], path, dt=0.1)
        rev = seq.reversed()
        assert equals_zero(magnus0(seq) - magnus0(rev))
        assert equals_zero(magnus1(seq) + magnus1(rev), 1e-14)
        assert equals_zero(magnus2(seq) - magnus2(rev), 1e-14)


def test_supercycle_matches_flat():
    labs = cdd_labels(2)
    blocks = [toggled(H4, ZY4, labs[k:k + 4], dt=0.1) for k in range(0, 16, 4)]
    flat = toggled(H4, ZY4, labs, dt=0.1)
    # PCDD2 blocks have nonzero first order individually
    with pytest.raises(DomainError):
        supercycle_magnus(blocks, 2)
    halves = [toggled(H4, ZY4, labs[:8], dt=0.1), toggled(H4, ZY4, labs[8:], dt=0.1)]
    assert equals_zero(supercycle_magnus(halves, 2) - magnus2(flat), 1e-12)


def test_h2_cancels_three_orders():
    for kind in ("XY", "XZ", "ZY"):
        for a in (1.0, 5.0):
            assert all(verify_zero_orders(heisenberg_chain(6, anisotropy=a),
                                          efficient_group(kind, 6), h2_labels()))
    blocks = [toggled(H4, ZY4, h2_labels()[k:k + 8]) for k in range(0, 24, 8)]
    assert all(equals_zero(magnus(b, j)) for b in blocks for j in (0, 1))
    assert equals_zero(supercycle_magnus(blocks, 2))


def test_half_pcdd2_cancels_first_order():
    seq = toggled(H4, ZY4, half_pcdd2_labels())
    assert equals_zero(magnus0(seq)) and equals_zero(magnus1(seq))
    rest = toggled(H4, ZY4, cdd_labels(2)[8:])
    assert equals_zero(magnus1(rest))


def test_reference_lines_cancel():
    for line in REFERENCE_LINES:
        assert len(line) == 24
        for a in (1.0, 5.0):
            assert all(verify_zero_orders(heisenberg_chain(6, anisotropy=a),
                                          efficient_group("ZY", 6), line))


def test_sdd_uniform_form():
    g = efficient_group("XY", 6)
    p = FormParams(6, 1.0, 1.0, 0.1)
    m2 = magnus2(toggled(heisenberg_chain(6), g, sdd_labels(4), PATH1, dt=0.1))
    assert equals_zero(m2 - uniform_sdd(p), 1e-14)
    z1x2x3z4 = PauliString.from_sites(6, {1: "Z", 2: "X", 3: "X", 4: "Z"})
    assert m2.coef(z1x2x3z4) == pytest.approx(-4 * 1.0 * 0.1 ** 2)
    assert equals_zero(path_forms("path1", "SDD", p) - uniform_sdd(p), 1e-14)
    assert equals_zero(path_forms("path1", "PCDD2", p) - uniform_pcdd2(p), 1e-14)
    assert equals_zero(path_forms("path1", "PSCPD2", p) - uniform_pscpd2(p), 1e-14)


@pytest.mark.parametrize("n", [4, 6])
@pytest.mark.parametrize("alpha", [1.0, 5.0])
@pytest.mark.parametrize("protocol,labels", [("SDD", sdd_labels(4)), ("PCDD2", cdd_labels(2)),
                                             ("PSCPD2", scpd_labels(2))])
def test_path_forms_with_shift(n, alpha, protocol, labels):
    delta = (10.0,) + (0.0,) * (n - 1)
    p = FormParams(n, 1.0, alpha, 0.05, delta)
    h = heisenberg_chain(n, anisotropy=alpha, shifts=delta)
    g = efficient_group("XY", n)
    for name, path in (("path1", PATH1), ("path2", PATH2)):
        m2 = magnus2(toggled(h, g, labels, path, dt=0.05))
        assert equals_zero(m2 - path_forms(name, protocol, p), 1e-10)


def test_path2_first_order_with_shifts():
    delta = (10.0, 0.0, 0.0, 0.0, 0.0, 0.0)
    p = FormParams(6, 1.0, 1.0, 0.05, delta)
    h = heisenberg_chain(6, shifts=delta)
    m1 = magnus1(toggled(h, efficient_group("XY", 6), [1, 2, 3, 4], PATH2, dt=0.05))
    assert any(equals_zero(m1 - h1_zeeman_path2(p, s), 1e-12) for s in (1, -1))


def test_path_forms_unknown():
    with pytest.raises(ParameterError):
        path_forms("path3", "SDD", FormParams(4))


def test_numeric_heff_roundtrip():
    rng = np.random.default_rng(4)
    a = rng.normal(size=(8, 8)) + 1j * rng.normal(size=(8, 8))
    h = 0.3 * (a + a.conj().T)
    u = expm_hermitian(h, 0.5)
    assert np.allclose(numeric_effective_hamiltonian(u, 0.5), h, atol=1e-10)
    assert np.allclose(numeric_effective_hamiltonian(np.eye(4), 1.0), 0.0, atol=1e-15)


def test_numeric_heff_branch_error():
    with pytest.raises(BranchAmbiguityError):
        numeric_effective_hamiltonian(np.diag([1.0, -1.0]).astype(complex), 1.0)


def test_pauli_decompose_roundtrip():
    h = heisenberg_chain(4, anisotropy=2.0, shifts=(1, 0, -1, 0.5))
    assert equals_zero(pauli_decompose(to_matrix(h), 4) - h, 1e-12)


def test_heff_matches_truncated_magnus():
    errs = []
    for dt in (0.04, 0.02):
        seq = toggled(H4, ZY4, [1, 2, 3, 4], dt=dt)
        heff = effective_hamiltonian(H4, ZY4, [1, 2, 3, 4], dt)
        trunc = to_matrix(magnus1(seq) + magnus2(seq))
        errs.append(np.linalg.norm(heff - trunc, 2))
    assert 8 * 0.75 <= errs[0] / errs[1] <= 8 * 1.25


def test_convergence_order_single_qubit():
    g = single_qubit_group()
    h = PauliSum.from_terms(1, [(PauliString.from_letters(c), b)
                                for c, b in zip("XYZ", (0.3, 0.5, 0.7))])
    slope, _ = convergence_order_fit(pdd_labels(4), g, h, np.geomspace(0.02, 0.2, 5))
    assert 0.7 <= slope <= 1.3
    slope2, _ = convergence_order_fit(cdd_labels(2, 4, g), g, h, np.geomspace(0.02, 0.2, 5))
    assert 4.5 <= slope2 <= 6.5
    slope0, norms = convergence_order_fit(pdd_labels(4), g, PauliSum.zero(1), [0.1, 0.2])
    assert math.isnan(slope0) and np.all(norms == 0)


def test_rh2_table_all_starts():
    tbl, infeasible = build_rh2_completion_table(ZY4)
    assert infeasible == [] and len(tbl) == 24
    assert tbl[(1, 2, 3, 4)][:4] == (1, 2, 3, 4)
    shipped = default_completion_table()
    for start in tbl.starts():
        labels = shipped[start]
        assert labels[:4] == start
        for h in (H4, heisenberg_chain(6, anisotropy=5.0)):
            g = ZY4 if h.n_qubits == 4 else efficient_group("ZY", 6)
            assert all(verify_zero_orders(h, g, labels))


def test_completion_table_persistence(tmp_path):
    tbl = default_completion_table()
    f = tmp_path / "t.txt"
    save_completion_table(tbl, f)
    back = load_completion_table(f)
    assert all(back[s] == tbl[s] for s in tbl.starts())
