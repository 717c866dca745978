import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pseudoherm import krein
from pseudoherm import linalg as la
from pseudoherm.errors import NotHermitian, NotInversionSymmetric, SingularG, SingularGa
from pseudoherm.models import (ANTI, TRANSPOSE, build, lattice, lattice_doubled, oscillators,
                               qubit, random_pseudo_hermitian, schematic)

from conftest import multiset_distance

V5 = (1.4, 1.2, 2.0, 1.2, 1.4)
K2 = [[2.0, -1.0], [-1.0, 2.0]]


def oscillator_oracle(gamma, omegas=(1.0, np.sqrt(3.0))):
    out = []
    for w in omegas:
        root = np.sqrt(complex(4 * w * w - gamma * gamma)) / 2
        out += [-0.5j * gamma + root, -0.5j * gamma - root]
    return np.array(out)


def all_residuals(inst):
    return [entry.residual(inst.matrices) for entry in inst.intertwiners]


class TestQubit:
    def test_unbroken(self):
        np.testing.assert_allclose(la.eigvals(qubit(0.5, 1.0).H), [-0.8660254037844386, 0.8660254037844386],
                                   atol=1e-12)

    def test_ep_coalesced_vector(self):
        H = qubit(1.0, 1.0).H
        np.testing.assert_allclose(la.eigvals(H), [0, 0], atol=1e-7)
        v = np.array([1, 1j]) / np.sqrt(2)
        assert np.linalg.norm(H @ v) < 1e-12
        _, s, _ = la.svd(H)
        assert s[1] < 1e-12 < s[0]

    def test_hermitian_limit(self):
        inst = qubit(0.0, 1.0)
        assert la.is_hermitian(inst.H)
        np.testing.assert_allclose(la.eigvals(inst.H), [-1, 1], atol=1e-12)

    @given(st.floats(-1.0, 1.0), st.floats(-1.0, 1.0), st.floats(-np.pi, np.pi), st.floats(-np.pi, np.pi))
    @settings(max_examples=100, deadline=None)
    def test_conserved_formula(self, ra, rb, t1, t2):
        a, b = ra * np.exp(1j * t1), rb * np.exp(1j * t2)
        v = np.array([a, b])
        c = np.vdot(v, qubit().intertwiner().G @ v)
        assert abs(c.imag) < 1e-12
        assert abs(c.real - 2 * abs(a * b) * np.cos(np.angle(a) - np.angle(b))) <= 1e-12


class TestSchematic:
    def test_origin(self):
        np.testing.assert_allclose(la.eigvals(schematic(0, 0).H), [1, 1.5, 9], atol=1e-12)

    def test_ep(self):
        lam = la.eigvals(schematic(4.0, 0.0).H)
        np.testing.assert_allclose(lam, [1.5, 5, 5], atol=1e-7)

    def test_dp(self):
        np.testing.assert_allclose(la.eigvals(schematic(np.sqrt(15) / 2, 0.0).H).real, [1.5, 1.5, 8.5],
                                   atol=1e-9)

    @pytest.mark.parametrize("x", [0.0, 1.0, 2.5, 3.9])
    def test_closed_form(self, x):
        r = np.sqrt(16 - x * x)
        assert multiset_distance(la.eigvals(schematic(x, 0.0).H), [1.5, 5 - r, 5 + r]) <= 1e-10

    def test_entries(self):
        H = schematic(2.0, 4.0).H
        assert H[1, 2] == H[2, 1] == 0.5j
        assert H[0, 2] == 2j and H[0, 1] == 4.0


class TestLattice:
    def test_k0_kinds(self):
        inst = lattice(0.0, np.log(1.001), V5)
        cls = krein.classify_spectrum(*inst.classification_pair())
        assert cls.all_real
        assert (cls.positive_kind_count, cls.negative_kind_count) == (3, 2)
        np.testing.assert_allclose(cls.eigenvalues.real,
                                   [-0.27702451, -0.13265606, 1.87704252, 2.25361941, 3.47901864], atol=1e-7)

    @pytest.mark.parametrize("k", [0.0, 0.3, np.pi / 2, 2.0, np.pi])
    def test_hermitian_at_zero_h(self, k):
        assert la.is_hermitian(lattice(k, 0.0, V5).H)

    def test_thresholdless(self):
        lam = la.eigvals(lattice(np.pi / 2, np.log(1.01), V5).H)
        assert np.max(np.abs(lam.imag)) > 1e-6
        assert np.max(np.abs(lam.imag)) == pytest.approx(0.01822, abs=1e-4)

    def test_intertwiner_entries(self):
        assert [e.name for e in lattice(0.0, 0.1, V5).intertwiners] == ["G", "G_transpose"]
        generic = lattice(1.0, 0.1, V5)
        assert [e.name for e in generic.intertwiners] == ["G_transpose"]
        assert generic.intertwiner().relation == TRANSPOSE
        with pytest.raises(ValueError):
            generic.classification_pair()

    def test_inversion_symmetry_required(self):
        with pytest.raises(NotInversionSymmetric):
            lattice(0.0, 0.1, (1.0, 2.0, 3.0))

    @given(st.floats(-np.pi, np.pi), st.floats(-1, 1))
    @settings(max_examples=50, deadline=None)
    def test_time_reversal(self, k, h):
        np.testing.assert_allclose(lattice(k, h, V5).H, lattice(-k, h, V5).H.conj(), atol=1e-14)


class TestLatticeDoubled:
    def test_kramers_degeneracy(self):
        cls = krein.classify_spectrum(*lattice_doubled(np.pi / 2, 0.0, V5).classification_pair())
        assert len(cls.clusters) == 5
        assert all(c.algebraic == 2 and c.kind is krein.Kind.INDEFINITE for c in cls.clusters)

    def test_quartets(self):
        inst = lattice_doubled(np.pi / 2, np.log(1.01), V5)
        cls = krein.classify_spectrum(*inst.classification_pair())
        assert not cls.all_real
        lam = cls.eigenvalues
        assert multiset_distance(lam, lam.conj()) < 1e-9


class TestOscillators:
    @pytest.mark.parametrize("gamma", [0.0, 1.0, 3.0])
    def test_closed_form(self, gamma):
        lam = la.eigvals(oscillators(K2, gamma).H)
        assert multiset_distance(lam, oscillator_oracle(gamma)) <= 1e-10

    def test_undamped_values(self):
        lam = la.eigvals(oscillators(K2, 0.0).H)
        np.testing.assert_allclose(lam, [-np.sqrt(3), -1, 1, np.sqrt(3)], atol=1e-12)

    def test_critical_damping_ep(self):
        inst = oscillators(K2, 2.0)
        H, G = inst.classification_pair()
        cls = krein.classify_spectrum(H, G)
        ep = [c for c in cls.clusters if c.is_exceptional]
        assert len(ep) == 1
        assert abs(ep[0].representative) < 1e-7
        assert ep[0].kind is krein.Kind.INDEFINITE
        assert inst.parameters["G_a_singular"] is True

    def test_underdamped_g_b_sign(self):
        inst = oscillators(K2, 0.0)
        H, G = inst.classification_pair()
        dec = la.gen_eig(H)
        for lam, v in zip(dec.eigenvalues, dec.vectors.T):
            q = v[:2]
            value = np.vdot(v, G @ v).real
            assert value == pytest.approx(2 * np.vdot(q, q).real * lam.real, abs=1e-10)

    def test_overdamped_positive_under_g_a(self):
        inst = oscillators(K2, 3.0)
        entry = inst.intertwiner("G_a")
        assert entry.relation == ANTI
        H, G = inst.classification_pair("G_a")
        cls = krein.classify_spectrum(H, G)
        over = [c for c in cls.clusters if c.is_real and abs(abs(c.representative) - np.sqrt(5) / 2) < 1e-8]
        assert len(over) == 2
        assert all(c.kind is krein.Kind.POSITIVE for c in over)

    def test_explicit_singular_tau(self):
        with pytest.raises(SingularGa):
            oscillators(K2, 2.0, tau=1.0)

    def test_asymmetric_k(self):
        with pytest.raises(NotHermitian):
            oscillators([[2.0, 1.0], [0.0, 2.0]])

    def test_quadruplets(self):
        lam = la.eigvals(oscillators([[3.0, 1.0], [1.0, -1.0]], 0.0).H)
        assert multiset_distance(lam, -lam) < 1e-10
        assert multiset_distance(lam, lam.conj()) < 1e-10
        assert np.max(np.abs(lam.imag)) > 0.1


class TestResiduals:
    def test_random_draws(self):
        rng = np.random.default_rng(5)
        worst = 0.0
        for _ in range(1000):
            kind = rng.integers(5)
            if kind == 0:
                inst = qubit(*rng.uniform(-3, 3, 2))
            elif kind == 1:
                inst = schematic(*rng.uniform(-10, 10, 2))
            elif kind == 2:
                inst = lattice(rng.choice([0.0, np.pi]), rng.uniform(-1, 1), V5)
            elif kind == 3:
                inst = lattice_doubled(rng.uniform(-np.pi, np.pi), rng.uniform(-1, 1), V5)
            else:
                A = rng.standard_normal((2, 2))
                inst = oscillators(A @ A.T + 0.1 * np.eye(2), rng.uniform(0, 4))
            worst = max(worst, *all_residuals(inst))
        assert worst <= 1e-12


class TestRandomPseudoHermitian:
    def test_identity_metric(self):
        assert la.is_hermitian(random_pseudo_hermitian(np.eye(4), 3))

    def test_conjugate_closed(self):
        lam = la.eigvals(random_pseudo_hermitian(np.diag([1.0, -1.0]), 7))
        assert multiset_distance(lam, lam.conj()) <= 1e-9

    def test_residual(self):
        G = np.diag([1.0, 1.0, -1.0])
        H = random_pseudo_hermitian(G, 1)
        assert krein.verify_intertwiner(H, G) <= 1e-10

    def test_singular(self):
        with pytest.raises(SingularG):
            random_pseudo_hermitian(np.diag([1.0, 0.0]), 0)

    def test_seeded(self):
        G = np.diag([1.0, -1.0])
        np.testing.assert_array_equal(random_pseudo_hermitian(G, 4), random_pseudo_hermitian(G, 4))


class TestBuild:
    def test_by_name(self):
        assert build("qubit", g=0.2).parameters == {"g": 0.2, "kappa": 1.0}

    def test_unknown_model(self):
        with pytest.raises(KeyError):
            build("nope")

    def test_unknown_parameter(self):
        with pytest.raises(TypeError):
            build("schematic", z=1)
