import numpy as np
import pytest

from spinloop import (
    C3V,
    InvalidInputError,
    SiteBasis,
    circular_harmonics,
    classify_oscillator_level,
    divacancy_basis,
    nv_basis,
    oscillator_states,
    project_salcs,
    real_singlet_basis_change,
    two_hole_multiplets,
)
from spinloop.symmetry import ELEMENTS

RT2 = np.sqrt(2.0)
RT3 = np.sqrt(3.0)
RT6 = np.sqrt(6.0)


class TestGroup:
    def test_order_and_dimensions(self):
        assert C3V.order == 6
        dims = [C3V.irrep_dim(g) for g in C3V.irreps]
        assert sum(d * d for d in dims) == 6

    def test_character_orthogonality(self):
        assert C3V.character_orthogonality_defect() < 1e-12

    def test_closure(self):
        for a in ELEMENTS:
            for b in ELEMENTS:
                assert C3V.multiply(a, b) in ELEMENTS


class TestSalcs:
    def test_representation_property(self):
        basis = divacancy_basis()
        for a in ELEMENTS:
            for b in ELEMENTS:
                lhs = basis.matrix(a) @ basis.matrix(b)
                rhs = basis.matrix(C3V.multiply(a, b))
                assert np.abs(lhs - rhs).max() < 1e-12

    def test_divacancy_salcs(self):
        salcs = project_salcs(divacancy_basis())
        mat = salcs.coefficient_matrix()
        # orthonormal and complete
        assert np.abs(mat @ mat.T - np.eye(6)).max() < 1e-12
        a1 = salcs.by_irrep("A1")
        assert len(a1) == 2
        np.testing.assert_allclose(
            a1[0].coefficients, [1 / RT3, 1 / RT3, 1 / RT3, 0, 0, 0],
            atol=1e-12,
        )
        np.testing.assert_allclose(
            a1[1].coefficients, [0, 0, 0, 1 / RT3, 1 / RT3, 1 / RT3],
            atol=1e-12,
        )
        ex = salcs.by_irrep("E", row=0)
        ey = salcs.by_irrep("E", row=1)
        assert len(ex) == len(ey) == 2
        np.testing.assert_allclose(
            ex[1].coefficients, [0, 0, 0, 2 / RT6, -1 / RT6, -1 / RT6],
            atol=1e-12,
        )
        np.testing.assert_allclose(
            ey[1].coefficients, [0, 0, 0, 0, 1 / RT2, -1 / RT2], atol=1e-12
        )
        assert len(salcs.by_irrep("A2")) == 0

    def test_nv_salcs(self):
        salcs = project_salcs(nv_basis())
        a1 = salcs.by_irrep("A1")
        np.testing.assert_allclose(a1[0].coefficients, [1, 0, 0, 0], atol=1e-12)
        np.testing.assert_allclose(
            a1[1].coefficients, [0, 1 / RT3, 1 / RT3, 1 / RT3], atol=1e-12
        )
        ex = salcs.by_irrep("E", row=0)[0]
        ey = salcs.by_irrep("E", row=1)[0]
        np.testing.assert_allclose(
            ex.coefficients, [0, 2 / RT6, -1 / RT6, -1 / RT6], atol=1e-12
        )
        np.testing.assert_allclose(
            ey.coefficients, [0, 0, 1 / RT2, -1 / RT2], atol=1e-12
        )

    def test_salcs_transform_per_irrep(self):
        # A1 rows invariant under every element; E rows invariant under
        # the projector built from E characters
        salcs = project_salcs(divacancy_basis())
        basis = salcs.basis
        for s in salcs.by_irrep("A1"):
            for g in ELEMENTS:
                np.testing.assert_allclose(
                    basis.matrix(g) @ s.coefficients, s.coefficients,
                    atol=1e-12,
                )

    def test_single_fixed_orbital_is_a1(self):
        basis = SiteBasis(labels=("w",), action={g: (0,) for g in ELEMENTS})
        salcs = project_salcs(basis)
        assert len(salcs.orbitals) == 1
        assert salcs.orbitals[0].irrep == "A1"

    def test_non_homomorphic_action_rejected(self):
        action = {g: (0, 1, 2) for g in ELEMENTS}
        action["C3"] = (1, 0, 2)  # order-2 element labelled as a rotation
        bad = SiteBasis(labels=("a", "b", "c"), action=action)
        with pytest.raises(InvalidInputError):
            project_salcs(bad)


class TestMultiplets:
    def test_state_counts(self):
        assert len(two_hole_multiplets("ee")) == 6
        assert len(two_hole_multiplets("ae")) == 8
        assert len(two_hole_multiplets("aa")) == 1

    def test_unknown_configuration(self):
        with pytest.raises(InvalidInputError):
            two_hole_multiplets("bb")

    def test_gram_matrix_is_identity(self):
        states = (
            two_hole_multiplets("ee")
            + two_hole_multiplets("ae")
            + two_hole_multiplets("aa")
        )
        assert len(states) == 15
        vecs = np.array([s.vector() for s in states])
        gram = vecs @ vecs.T
        assert np.abs(gram - np.eye(15)).max() < 1e-12

    def test_antisymmetry(self):
        # swapping both orbital and spin slots negates every state
        swap = np.zeros((36, 36))
        k = 0
        for i1 in range(3):
            for i2 in range(3):
                for j1 in range(2):
                    for j2 in range(2):
                        src = ((i1 * 3 + i2) * 2 + j1) * 2 + j2
                        dst = ((i2 * 3 + i1) * 2 + j2) * 2 + j1
                        swap[dst, src] = 1.0
                        k += 1
        for config in ("ee", "ae", "aa"):
            for s in two_hole_multiplets(config):
                v = s.vector()
                np.testing.assert_allclose(swap @ v, -v, atol=1e-12)

    def test_1a1_expansion(self):
        # (|e+ e-> + |e- e+>) (ud - du) / 2 up to the stored global phase
        (state,) = [s for s in two_hole_multiplets("ee") if s.term == "1A1"]
        terms = {(o, sp): c for o, sp, c in state.terms}
        phase = np.sign(terms[(("e+", "e-"), ("u", "d"))])
        assert terms[(("e+", "e-"), ("u", "d"))] == pytest.approx(phase * 0.5)
        assert terms[(("e+", "e-"), ("d", "u"))] == pytest.approx(-phase * 0.5)
        assert terms[(("e-", "e+"), ("u", "d"))] == pytest.approx(phase * 0.5)
        assert terms[(("e-", "e+"), ("d", "u"))] == pytest.approx(-phase * 0.5)

    def test_1a1_prime_expansion(self):
        # |aa> (ud - du) / sqrt(2) up to the stored global phase
        (state,) = two_hole_multiplets("aa")
        terms = {(o, sp): c for o, sp, c in state.terms}
        phase = np.sign(terms[(("a", "a"), ("u", "d"))])
        assert terms[(("a", "a"), ("u", "d"))] == pytest.approx(phase / RT2)
        assert terms[(("a", "a"), ("d", "u"))] == pytest.approx(-phase / RT2)

    def test_phase_convention(self):
        for config in ("ee", "ae", "aa"):
            for s in two_hole_multiplets(config):
                first = min(s.terms, key=lambda t: (t[0], t[1]))
                assert first[2] > 0


class TestSingletBasisChange:
    def test_orthogonal_round_trip(self):
        t = real_singlet_basis_change()
        np.testing.assert_allclose(t @ t.T, np.eye(3), atol=1e-15)

    def test_rows(self):
        t = real_singlet_basis_change()
        np.testing.assert_allclose(t[2], [1 / RT2, 0, 1 / RT2])  # 1A1
        np.testing.assert_allclose(t[1], [0, 1, 0])              # 1E_y


class TestOscillatorLevels:
    def test_enumeration(self):
        states = oscillator_states(4)
        assert len(states) == 15
        assert len(set((s.n, s.m) for s in states)) == 15
        assert all(s.i <= 4 for s in states)
        # level-major order, n descending inside each level
        assert [(s.n, s.m) for s in states[:4]] == [(0, 0), (1, 0), (0, 1), (2, 0)]

    def test_level_0_single_a1(self):
        sectors = classify_oscillator_level(0, 6)
        assert [s.irrep for s in sectors] == ["A1"]
        np.testing.assert_allclose(sectors[0].basis, [[1.0]])

    def test_level_1_pure_e(self):
        sectors = classify_oscillator_level(1, 6)
        assert [s.irrep for s in sectors] == ["E"]
        assert sectors[0].basis.shape == (2, 2)

    def test_level_3_has_a2(self):
        sectors = {s.irrep: s for s in classify_oscillator_level(3, 6)}
        assert set(sectors) == {"A1", "A2", "E"}
        # cubic harmonics: A1 keeps x(x^2 - 3y^2)-type even parity in y
        a1 = sectors["A1"].basis[0]
        a2 = sectors["A2"].basis[0]
        # y -> -y on level-3 states ordered (3,0),(2,1),(1,2),(0,3)
        parity = np.array([1.0, -1.0, 1.0, -1.0])
        np.testing.assert_allclose(a1 * parity, a1, atol=1e-12)
        np.testing.assert_allclose(a2 * parity, -a2, atol=1e-12)

    def test_a2_first_appears_at_3(self):
        for i in range(3):
            assert all(
                s.irrep != "A2" for s in classify_oscillator_level(i, 6)
            )
        assert any(s.irrep == "A2" for s in classify_oscillator_level(3, 6))

    def test_dimension_sum_and_span(self):
        for i in range(7):
            sectors = classify_oscillator_level(i, 8)
            total = sum(s.basis.shape[0] for s in sectors)
            assert total == i + 1
            stacked = np.vstack([s.basis for s in sectors])
            proj = stacked.T @ stacked
            np.testing.assert_allclose(proj, np.eye(i + 1), atol=1e-12)

    def test_out_of_range(self):
        with pytest.raises(InvalidInputError):
            classify_oscillator_level(7, 6)
        with pytest.raises(InvalidInputError):
            classify_oscillator_level(-1, 6)

    def test_circular_harmonics_orthonormal(self):
        for i in (2, 5):
            harms = circular_harmonics(i)
            mat = np.array([v for _, v in harms])
            gram = mat.conj() @ mat.T
            np.testing.assert_allclose(gram, np.eye(i + 1), atol=1e-12)
            assert sorted(l for l, _ in harms) == list(range(-i, i + 1, 2))
