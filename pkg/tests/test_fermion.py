"""Jordan-Wigner mapping, FCIDUMP parsing, Hamiltonians, pools."""

from itertools import combinations
from pathlib import Path

import numpy as np
import pytest

from adaptft.fermion import (
    FcidumpError,
    FermionOperator,
    MolecularSystem,
    build_hamiltonian,
    hf_occupations,
    jordan_wigner,
    make_pool,
    number_operator,
    parse_fcidump,
    penalized_hamiltonian,
    s_squared,
    s_z,
    spin_orbital_index,
)
from adaptft.pauli import PauliSum
from adaptft.statevector import StateVector, exact_ground_state, expectation

from oracles import (
    dense_fermion,
    dense_hamiltonian,
    dense_ladder,
    dense_sum,
    determinant_ground_energy,
)

FIXTURES = Path(__file__).parent / "fixtures"


def random_system(rng, n, ne=None):
    h1 = rng.normal(size=(n, n))
    h1 = 0.5 * (h1 + h1.T)
    h2 = rng.normal(size=(n, n, n, n))
    h2 = h2 + h2.transpose(1, 0, 2, 3)
    h2 = h2 + h2.transpose(0, 1, 3, 2)
    h2 = h2 + h2.transpose(2, 3, 0, 1)
    return MolecularSystem(
        n_spatial_orbitals=n,
        n_electrons=ne if ne is not None else n,
        ms2=0,
        core_energy=rng.normal(),
        h1=h1,
        h2=h2,
    )


class TestJordanWigner:
    def test_number_operator_image(self):
        img = jordan_wigner(FermionOperator([(0, 1), (0, 0)]), 1)
        assert img == PauliSum(1, [("", 0.5), ("Z0", -0.5)])

    def test_single_excitation_image(self):
        op = FermionOperator([(0, 1), (1, 0)]) - FermionOperator([(1, 1), (0, 0)])
        img = jordan_wigner(op, 2)
        want = PauliSum(2, [("X0 Y1", 0.5j), ("Y0 X1", -0.5j)])
        assert img == want

    def test_index_out_of_range(self):
        with pytest.raises(ValueError):
            jordan_wigner(FermionOperator([(3, 1), (0, 0)]), 2)

    @pytest.mark.parametrize("n_so", [2, 3, 4])
    def test_matches_dense_ladder_products(self, n_so):
        rng = np.random.default_rng(n_so)
        for _ in range(10):
            length = int(rng.integers(1, 5))
            term = [(int(rng.integers(n_so)), int(rng.integers(2))) for _ in range(length)]
            coeff = complex(rng.normal(), rng.normal())
            op = FermionOperator(term, coeff)
            img = jordan_wigner(op, n_so)
            assert np.allclose(dense_sum(img), dense_fermion(op, n_so), atol=1e-12)

    def test_anticommutation_relations(self):
        n_so = 3
        eye = np.eye(2**n_so)
        for p in range(n_so):
            for q in range(n_so):
                anti = (
                    FermionOperator([(p, 1), (q, 0)])
                    + FermionOperator([(q, 0), (p, 1)])
                )
                img = dense_sum(jordan_wigner(anti, n_so))
                assert np.allclose(img, (p == q) * eye, atol=1e-12)
                for da, db in ((1, 1), (0, 0)):
                    anti = (
                        FermionOperator([(p, da), (q, db)])
                        + FermionOperator([(q, db), (p, da)])
                    )
                    if p == q and da != db:
                        continue
                    img = dense_sum(jordan_wigner(anti, n_so))
                    want = eye if (p == q and da + db == 1) else np.zeros_like(eye)
                    assert np.allclose(img, want, atol=1e-12)

    def test_linearity(self):
        rng = np.random.default_rng(9)
        a = FermionOperator([(0, 1), (2, 0)], 1.0)
        b = FermionOperator([(1, 1), (1, 0)], 1.0)
        alpha, beta = complex(rng.normal()), complex(rng.normal())
        lhs = jordan_wigner(alpha * a + beta * b, 3)
        rhs = jordan_wigner(a, 3).scale(alpha) + jordan_wigner(b, 3).scale(beta)
        assert lhs.allclose(rhs, 1e-12)


class TestFcidump:
    MINIMAL = (
        "&FCI NORB=1,NELEC=2,MS2=0,\n"
        " ORBSYM=1,\n"
        " ISYM=1,\n"
        "&END\n"
        "0.5 1 1 1 1\n"
        "-1.0 1 1 0 0\n"
        "0.7 0 0 0 0\n"
    )

    def test_minimal_file(self):
        sys = parse_fcidump(self.MINIMAL)
        assert sys.n_spatial_orbitals == 1
        assert sys.n_electrons == 2
        assert sys.h1[0, 0] == -1.0
        assert sys.h2[0, 0, 0, 0] == 0.5
        assert sys.core_energy == 0.7

    def test_eightfold_fill(self):
        text = (
            "&FCI NORB=3,NELEC=2,MS2=0,\n&END\n"
            "0.25 1 2 3 1\n"
        )
        sys = parse_fcidump(text)
        for idx in [(0, 1, 2, 0), (1, 0, 2, 0), (0, 1, 0, 2), (1, 0, 0, 2),
                    (2, 0, 0, 1), (0, 2, 0, 1), (2, 0, 1, 0), (0, 2, 1, 0)]:
            assert sys.h2[idx] == 0.25

    def test_index_out_of_range_names_line(self):
        text = "&FCI NORB=4,NELEC=2,MS2=0,\n&END\n0.1 5 1 1 1\n"
        with pytest.raises(FcidumpError, match="line 3"):
            parse_fcidump(text)

    def test_conflicting_duplicate(self):
        text = (
            "&FCI NORB=2,NELEC=2,MS2=0,\n&END\n"
            "0.5 1 1 1 1\n"
            "0.6 1 1 1 1\n"
        )
        with pytest.raises(FcidumpError, match="conflicting"):
            parse_fcidump(text)

    def test_consistent_duplicate_allowed(self):
        text = (
            "&FCI NORB=2,NELEC=2,MS2=0,\n&END\n"
            "0.5 1 1 1 1\n"
            "0.5 1 1 1 1\n"
        )
        assert parse_fcidump(text).h2[0, 0, 0, 0] == 0.5

    def test_missing_header_key(self):
        with pytest.raises(FcidumpError, match="NELEC"):
            parse_fcidump("&FCI NORB=2\n&END\n")

    def test_h2_fixture_fci_energy(self):
        sys = parse_fcidump((FIXTURES / "h2_r0.74.fcidump").read_text())
        energy, _ = exact_ground_state(build_hamiltonian(sys))
        assert energy == pytest.approx(-1.137, abs=5e-4)


class TestHamiltonian:
    def test_constant_hamiltonian(self):
        sys = MolecularSystem(1, 2, 0, 0.31, np.zeros((1, 1)), np.zeros((1, 1, 1, 1)))
        h = build_hamiltonian(sys)
        assert h == PauliSum(2, [("", 0.31)])

    def test_matches_dense_oracle_random(self):
        rng = np.random.default_rng(1)
        for n in (1, 2):
            sys = random_system(rng, n)
            h = build_hamiltonian(sys, threshold=0.0)
            assert np.allclose(dense_sum(h), dense_hamiltonian(sys), atol=1e-10)

    def test_hermitian_and_symmetry_commutators(self):
        rng = np.random.default_rng(2)
        sys = random_system(rng, 2)
        h = build_hamiltonian(sys)
        assert h.is_hermitian(1e-10)
        n_op = number_operator(sys.n_qubits)
        assert h.commutator(n_op).simplify(1e-10).term_count() == 0
        assert h.commutator(s_z(2)).simplify(1e-10).term_count() == 0
        assert h.commutator(s_squared(2)).simplify(1e-10).term_count() == 0

    def test_ground_energy_vs_determinant_ci(self):
        rng = np.random.default_rng(3)
        sys = random_system(rng, 2, ne=2)
        h = build_hamiltonian(sys)
        # global Fock-space minimum over matching-electron sector
        e_ci = determinant_ground_energy(sys)
        vals = np.linalg.eigvalsh(dense_sum(h))
        assert min(vals) <= e_ci + 1e-9
        sys_h2 = parse_fcidump((FIXTURES / "h2_r0.74.fcidump").read_text())
        e_ci = determinant_ground_energy(sys_h2)
        e_qubit, _ = exact_ground_state(build_hamiltonian(sys_h2))
        assert e_qubit == pytest.approx(e_ci, abs=1e-9)

    def test_penalized_term_counts_match_reference_tables(self):
        h2o = parse_fcidump((FIXTURES / "h2o_r2.30.fcidump").read_text())
        n2 = parse_fcidump((FIXTURES / "n2_r2.20.fcidump").read_text())
        h_h2o = penalized_hamiltonian(build_hamiltonian(h2o), 0.5)
        h_n2 = penalized_hamiltonian(build_hamiltonian(n2), 0.5)
        assert h_h2o.term_count() == 292
        assert h_n2.term_count() == 307


class TestSpinOperators:
    def test_s2_single_alpha_electron(self):
        s2 = s_squared(2)
        state = StateVector.from_basis_index(4, 0b0001)
        assert expectation(s2, state).real == pytest.approx(0.75, abs=1e-12)

    def test_s2_closed_shell(self):
        s2 = s_squared(2)
        state = StateVector.from_basis_index(4, 0b0101)
        assert expectation(s2, state).real == pytest.approx(0.0, abs=1e-12)

    def test_penalty_forces_singlet_on_stretched_h2(self):
        sys = parse_fcidump((FIXTURES / "h2_r2.50.fcidump").read_text())
        h = build_hamiltonian(sys)
        hs = penalized_hamiltonian(h, 0.5)
        assert hs.is_hermitian(1e-12)
        e_plain, _ = exact_ground_state(h)
        e_pen, state = exact_ground_state(hs)
        s2 = expectation(s_squared(sys.n_spatial_orbitals), state).real
        assert abs(s2) < 1e-8
        assert e_pen == pytest.approx(e_plain, abs=1e-8)  # singlet ground both ways


def brute_force_index_sets(n):
    """Independent enumeration used to cross-check pool cardinalities."""
    n_so = 2 * n
    spin = lambda so: so >= n
    singles = [
        (p, q) for p in range(n_so) for q in range(p + 1, n_so) if spin(p) == spin(q)
    ]
    doubles = set()
    for quad in combinations(range(n_so), 4):
        for create in combinations(quad, 2):
            annihilate = tuple(sorted(set(quad) - set(create)))
            if sum(map(spin, create)) != sum(map(spin, annihilate)):
                continue
            key = (create, annihilate) if create > annihilate else (annihilate, create)
            doubles.add(key)
    return singles, doubles


class TestPools:
    def test_pauli_singles_on_pair(self):
        # 2 spatial orbitals: alpha qubits (0,1), beta qubits (2,3)
        sys = MolecularSystem(2, 2, 0, 0.0, np.zeros((2, 2)), np.zeros((2, 2, 2, 2)))
        pool = make_pool("pauli_string", sys)
        singles = [lab for lab in pool.labels if len(lab.split()) == 2]
        assert set(singles) == {"X0 Y1", "Y0 X1", "X2 Y3", "Y2 X3"}
        for g, lab in zip(pool.generators, pool.labels):
            assert g.term_count() == 1
            assert g.coefficient(lab) == 1.0j

    @pytest.mark.parametrize("flavor", ["fermionic", "qubit_excitation", "pauli_string"])
    def test_generators_exactly_anti_hermitian(self, flavor):
        rng = np.random.default_rng(4)
        sys = random_system(rng, 3)
        pool = make_pool(flavor, sys)
        for g in pool.generators:
            assert g.adjoint() == g.scale(-1.0)

    def test_unknown_flavor(self):
        rng = np.random.default_rng(4)
        with pytest.raises(ValueError):
            make_pool("bogus", random_system(rng, 2))

    def test_pool_sizes_against_brute_force(self):
        rng = np.random.default_rng(5)
        for n in (2, 3):
            sys = random_system(rng, n, ne=2)
            singles, doubles = brute_force_index_sets(n)
            f_pool = make_pool("fermionic", sys)
            q_pool = make_pool("qubit_excitation", sys)
            p_pool = make_pool("pauli_string", sys)
            assert len(f_pool) == len(singles) + len(doubles)
            assert len(f_pool) == len(q_pool)
            # deduplicated strings: 2 per single pair, 8 per 4-qubit set
            pair_sets = {frozenset(s) for s in singles}
            quad_sets = {frozenset(c + a) for c, a in doubles}
            assert len(p_pool) == 2 * len(pair_sets) + 8 * len(quad_sets)

    def test_qubit_flavor_strips_z_chains(self):
        rng = np.random.default_rng(6)
        sys = random_system(rng, 3)
        f_pool = make_pool("fermionic", sys)
        q_pool = make_pool("qubit_excitation", sys)
        assert f_pool.labels == q_pool.labels
        for fg, qg in zip(f_pool.generators, q_pool.generators):
            f_letters = [s.letters() for s, _ in fg.terms()]
            q_letters = [s.letters() for s, _ in qg.terms()]
            assert any("Z" in lt.values() for lt in f_letters) or f_letters == q_letters
            assert all("Z" not in lt.values() for lt in q_letters)

    def test_pool_dump_format(self):
        sys = MolecularSystem(2, 2, 0, 0.0, np.zeros((2, 2)), np.zeros((2, 2, 2, 2)))
        pool = make_pool("pauli_string", sys)
        lines = pool.dump().strip().split("\n")
        assert len(lines) == len(pool)
        label, terms = lines[0].split("\t")
        assert label == pool.labels[0]
        assert terms.split() == ["0.0", "1.0", "X0", "Y1"]


class TestReference:
    def test_hf_occupations_blocked(self):
        sys = MolecularSystem(2, 2, 0, 0.0, np.zeros((2, 2)), np.zeros((2, 2, 2, 2)))
        assert hf_occupations(sys) == (0, 2)
        assert spin_orbital_index(1, 1, 2) == 3

    def test_hf_energy_matches_scf_oracle(self):
        import json

        sys = parse_fcidump((FIXTURES / "h2o_r1.00.fcidump").read_text())
        oracle = json.loads((FIXTURES / "h2o_r1.00.oracle.json").read_text())
        h = build_hamiltonian(sys)
        state = StateVector.from_basis_index(
            h.n_qubits, sum(1 << q for q in hf_occupations(sys))
        )
        assert expectation(h, state).real == pytest.approx(oracle["e_hf"], abs=1e-9)
