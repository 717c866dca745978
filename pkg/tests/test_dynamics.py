import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pseudoherm import linalg as la
from pseudoherm.dynamics import conserved_value, evolve, propagator, pseudo_unitarity_residual
from pseudoherm.errors import DimensionMismatch, Overflow
from pseudoherm.models import qubit, random_hermitian

from conftest import random_unitary

SX = np.array([[0, 1], [1, 0]], dtype=complex)


def qubit_closed_form(g, kappa, v0, t):
    """Two-mode solution from the eigenbasis with analytic ``omega = sqrt(kappa^2 - g^2)``."""
    w = np.sqrt(complex(kappa * kappa - g * g))
    H = qubit(g, kappa).H
    # exp(-iHt) = cos(wt) I - i sin(wt)/w H, valid since H^2 = w^2 I
    U = np.cos(w * t) * np.eye(2) - 1j * np.sinc(w * t / np.pi) * t * H
    return U @ v0


class TestPropagator:
    def test_zero_time(self):
        np.testing.assert_array_equal(propagator(qubit().H, 0.0), np.eye(2))

    @pytest.mark.parametrize("t", [0.3, 1.0, 3.0, 7.5])
    def test_qubit_pseudo_unitary(self, t):
        assert pseudo_unitarity_residual(propagator(qubit(0.5, 1.0).H, t), SX) <= 1e-9

    def test_hermitian_unitary(self, rng):
        U = propagator(random_hermitian(4, rng), 2.0)
        assert la.norm(la.dagger(U) @ U - np.eye(4)) <= 1e-9

    @given(st.floats(0, 5), st.floats(0, 5))
    @settings(max_examples=30, deadline=None)
    def test_group_law(self, t1, t2):
        H = qubit(0.5, 1.0).H
        lhs = propagator(H, t1 + t2)
        rhs = propagator(H, t1) @ propagator(H, t2)
        assert la.norm(lhs - rhs) <= 1e-9 * max(1.0, la.norm(lhs))

    def test_closed_form(self):
        H = qubit(0.5, 1.0).H
        for t in (0.5, 2.0, 9.0):
            U = propagator(H, t)
            assert np.linalg.norm(U @ [1, 0] - qubit_closed_form(0.5, 1.0, np.array([1, 0]), t)) < 1e-10

    def test_overflow(self):
        with pytest.raises(Overflow):
            propagator(qubit(5.0, 1.0).H, 100.0)

    def test_non_finite_time(self):
        with pytest.raises(ValueError):
            propagator(qubit().H, np.inf)


class TestEvolve:
    def test_unbroken_drift(self):
        tr = evolve(qubit(0.5, 1.0).H, [1, 0], np.linspace(0, 10, 1000), SX)
        assert tr.drift <= 1e-8
        assert tr.imag_residue <= 1e-10
        assert len(tr.times) == len(tr.states) == len(tr.conserved) == 1000

    def test_states_match_closed_form(self):
        times = np.linspace(0, 10, 50)
        tr = evolve(qubit(0.5, 1.0).H, [1, 0], times, SX)
        for t, s in zip(times, tr.states):
            assert np.linalg.norm(s - qubit_closed_form(0.5, 1.0, np.array([1, 0]), t)) < 1e-9

    def test_broken_phase_locking(self):
        v0 = np.array([1.0, 0.3 + 0.2j])
        tr = evolve(qubit(1.5, 1.0).H, v0, np.linspace(0, 10, 1000), SX)
        a, b = tr.states[:, 0], tr.states[:, 1]
        assert abs(a[-1] * b[-1]) > 1e3 * abs(a[0] * b[0])
        phase = np.cos(np.angle(a) - np.angle(b))
        assert abs(phase[-1]) < 1e-6
        assert tr.relative_drift <= 1e-6

    def test_phase_locked_start(self):
        alpha = 0.7
        v0 = np.array([0.6 * np.exp(1j * alpha), 0.8j * np.exp(1j * alpha)])
        tr = evolve(qubit(0.5, 1.0).H, v0, np.linspace(0, 10, 200), SX)
        assert np.max(np.abs(tr.conserved)) <= 1e-9

    def test_hermitian_norm(self, rng):
        v0 = rng.standard_normal(3) + 1j * rng.standard_normal(3)
        tr = evolve(random_hermitian(3, rng), v0, np.linspace(0, 5, 100))
        np.testing.assert_allclose(tr.conserved, np.vdot(v0, v0).real, rtol=1e-12)

    def test_not_chained(self):
        H = qubit(0.5, 1.0).H
        tr = evolve(H, [1, 0], [2.0, 5.0])
        np.testing.assert_array_equal(tr.states[1], propagator(H, 5.0) @ np.array([1, 0], dtype=complex))

    def test_unsorted(self):
        with pytest.raises(ValueError):
            evolve(qubit().H, [1, 0], [1.0, 0.0])

    def test_wrong_length(self):
        with pytest.raises(DimensionMismatch):
            evolve(qubit().H, [1, 0, 0], [0.0])

    def test_overflow(self):
        with pytest.raises(Overflow):
            evolve(qubit(3.0, 1.0).H, [1, 0], [0.0, 200.0], SX)


class TestResidual:
    def test_identity(self):
        G = np.diag([1.0, 1.0, -1.0])
        assert pseudo_unitarity_residual(np.eye(3), G) == 0.0

    def test_qubit(self):
        assert pseudo_unitarity_residual(propagator(qubit(0.5, 1.0).H, 3.0), SX) <= 1e-9

    def test_random_unitary(self, rng):
        assert pseudo_unitarity_residual(random_unitary(4, rng), np.eye(4)) <= 1e-12

    def test_mismatch(self):
        with pytest.raises(DimensionMismatch):
            pseudo_unitarity_residual(np.eye(2), np.eye(3))

    def test_conserved_value(self):
        assert conserved_value(SX, [1, 1]) == 2
