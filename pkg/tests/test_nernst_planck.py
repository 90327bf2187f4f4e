import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from modpnp.errors import NegativeCoefficientError, NegativeConcentrationError
from modpnp.mesh_linalg import build_mesh
from modpnp.nernst_planck import (PhysicalParams, assemble_np_operator, coupling_coefficients,
                                  edge_fluxes, friction_matrix, mobility_average)

conc = st.floats(0.0, 10.0)


class TestMobilityAverage:
    def test_equal_inputs(self):
        for kind in ("arithmetic", "harmonic", "geometric"):
            assert mobility_average(1.7, 1.7, kind) == pytest.approx(1.7, rel=1e-15)

    def test_values(self):
        assert mobility_average(1, 4, "arithmetic") == 2.5
        assert mobility_average(1, 4, "harmonic") == pytest.approx(1.6)
        assert mobility_average(1, 4, "geometric") == 2.0

    @given(st.floats(1e-3, 1e3), st.floats(1e-3, 1e3))
    def test_ordering(self, a, b):
        h = mobility_average(a, b, "harmonic")
        g = mobility_average(a, b, "geometric")
        m = mobility_average(a, b, "arithmetic")
        assert h <= g * (1 + 1e-12) and g <= m * (1 + 1e-12)

    def test_unknown(self):
        with pytest.raises(ValueError):
            mobility_average(1, 1, "median")


class TestCoupling:
    def test_vacuum(self):
        c = coupling_coefficients(np.zeros(3), np.zeros(3), PhysicalParams())
        np.testing.assert_array_equal(c.D_nn, 1.0)
        np.testing.assert_array_equal(c.D_np, 0.0)
        np.testing.assert_array_equal(c.D_pp, 1.0)
        np.testing.assert_array_equal(c.D_pn, 0.0)

    def test_unit_concentrations(self):
        c = coupling_coefficients(np.ones(1), np.ones(1), PhysicalParams())
        np.testing.assert_allclose([c.D_nn[0], c.D_np[0], c.D_pp[0], c.D_pn[0]],
                                   [2 / 3, 1 / 3, 2 / 3, 1 / 3], rtol=1e-15)

    def test_unequal_diffusivities(self):
        c = coupling_coefficients(np.ones(1), np.ones(1), PhysicalParams(D_n=1.0, D_p=2.0))
        assert c.D_pp[0] == pytest.approx(10 / 9, rel=1e-15)
        assert c.D_pn[0] == pytest.approx(4 / 9, rel=1e-15)

    @given(conc, conc, st.floats(0.1, 10))
    def test_equal_diffusivity_closed_form(self, cn, cp, D):
        c = coupling_coefficients(np.array([cn]), np.array([cp]), PhysicalParams(D_n=D, D_p=D))
        s = 1 + cn + cp
        assert c.D_nn[0] == pytest.approx(D * (1 + cn) / s, rel=1e-15, abs=1e-300)
        assert c.D_np[0] == pytest.approx(D * cn / s, rel=1e-15, abs=1e-300)
        assert c.D_pp[0] == pytest.approx(D * (1 + cp) / s, rel=1e-15, abs=1e-300)
        assert c.D_pn[0] == pytest.approx(D * cp / s, rel=1e-15, abs=1e-300)

    @given(conc, conc, st.floats(0.1, 10), st.floats(0.1, 10),
           st.sampled_from(["arithmetic", "harmonic", "geometric"]))
    def test_ordering_and_sign(self, cn, cp, Dn, Dp, avg):
        c = coupling_coefficients(np.array([cn]), np.array([cp]),
                                  PhysicalParams(D_n=Dn, D_p=Dp, drag_average=avg))
        for v in (c.D_nn, c.D_np, c.D_pp, c.D_pn):
            assert v[0] >= 0
        # D_nn - D_np = D_np_avg D_n / W >= 0, likewise for p
        assert c.D_nn[0] >= c.D_np[0] and c.D_pp[0] >= c.D_pn[0]

    def test_classical_and_off(self):
        rng = np.random.default_rng(0)
        cn, cp = rng.uniform(0, 5, (2, 20))
        for p in (PhysicalParams(model="classical", D_n=2.0), PhysicalParams(drag_average="off", D_n=2.0)):
            c = coupling_coefficients(cn, cp, p)
            np.testing.assert_array_equal(c.D_nn, 2.0)
            np.testing.assert_array_equal(c.D_pp, 1.0)
            np.testing.assert_array_equal(c.D_np, 0.0)
            np.testing.assert_array_equal(c.D_pn, 0.0)

    def test_large_drag_limit(self):
        rng = np.random.default_rng(1)
        cn, cp = rng.uniform(0, 5, (2, 50))
        c = coupling_coefficients(cn, cp, PhysicalParams(D_n=1.0, D_p=3.0, D_np_override=1e12))
        np.testing.assert_allclose(c.D_nn, 1.0, rtol=1e-10)
        np.testing.assert_allclose(c.D_pp, 3.0, rtol=1e-10)
        assert np.max(c.D_np) <= 1e-10 and np.max(c.D_pn) <= 1e-10

    def test_clamp(self):
        c = coupling_coefficients(np.array([-5e-11]), np.array([0.0]), PhysicalParams())
        assert c.D_np[0] == 0.0
        with pytest.raises(NegativeConcentrationError):
            coupling_coefficients(np.array([-1e-9]), np.array([0.0]), PhysicalParams())


def _bern(t):
    return 1.0 if t == 0 else t / math.expm1(t)


class TestAssembly:
    def test_constant_potential_is_stiffness(self):
        mesh = build_mesh(-1, 1, 8)
        A = assemble_np_operator(mesh, np.ones(9), -1.0, np.full(9, 0.3), PhysicalParams())
        k = 1 / mesh.h
        ref = np.diag(np.full(9, 2 * k)) - k * np.eye(9, k=1) - k * np.eye(9, k=-1)
        ref[0, 0] = ref[-1, -1] = k
        np.testing.assert_allclose(A.to_dense(), ref, rtol=1e-15)

    @pytest.mark.parametrize("z", [-1.0, 1.0, 2.0])
    def test_boltzmann_null(self, z):
        rng = np.random.default_rng(2)
        mesh = build_mesh(-1, 1, 64)
        phi = rng.uniform(-1, 1, 65)
        A = assemble_np_operator(mesh, np.full(65, 0.7), z, phi, PhysicalParams())
        c = np.exp(-z * phi)
        assert np.max(np.abs(A.matvec(c))) <= 1e-12 * A.diag.max()

    def test_brute_force_flux_oracle(self):
        rng = np.random.default_rng(3)
        mesh = build_mesh(0, 1, 4)
        params = PhysicalParams(q=1.3, kB_T=0.7)
        for _ in range(20):
            phi = rng.normal(size=5)
            omega = rng.uniform(0.1, 3, 5)
            c = rng.uniform(0, 2, 5)
            z = float(rng.choice([-2.0, -1.0, 1.0]))
            ref = np.zeros(5)
            for i in range(4):
                d = z * 1.3 / 0.7 * (phi[i + 1] - phi[i])
                w = 2 * omega[i] * omega[i + 1] / (omega[i] + omega[i + 1])
                f = w / mesh.h * (_bern(d) * c[i] - _bern(-d) * c[i + 1])
                ref[i] += f
                ref[i + 1] -= f
            A = assemble_np_operator(mesh, omega, z, phi, params)
            np.testing.assert_allclose(A.matvec(c), ref, atol=1e-14 * np.abs(ref).max() + 1e-14)

    def test_edge_fluxes_match_operator(self):
        rng = np.random.default_rng(4)
        mesh = build_mesh(-1, 1, 30)
        phi, c = rng.normal(size=31), rng.uniform(0, 1, 31)
        omega = rng.uniform(0.5, 1.5, 31)
        J = edge_fluxes(mesh, omega, 1.0, phi, c, PhysicalParams())
        div = np.zeros(31)
        div[:-1] += J
        div[1:] -= J
        A = assemble_np_operator(mesh, omega, 1.0, phi, PhysicalParams())
        np.testing.assert_allclose(A.matvec(c), div, atol=1e-12)

    def test_conservation_and_m_matrix(self):
        rng = np.random.default_rng(5)
        mesh = build_mesh(-1, 1, 40)
        for _ in range(50):
            # potential jumps give |delta| up to 50 per edge
            phi = np.cumsum(np.r_[0.0, rng.uniform(-50, 50, 40)])
            omega = rng.uniform(0, 3, 41)
            A = assemble_np_operator(mesh, omega, -1.0, phi, PhysicalParams())
            scale = max(A.diag.max(), 1.0)
            assert np.max(np.abs(A.column_sums())) <= 1e-13 * scale
            assert np.all(A.lower <= 0) and np.all(A.upper <= 0) and np.all(A.diag >= 0)

    def test_negative_coefficient(self):
        mesh = build_mesh(0, 1, 4)
        with pytest.raises(NegativeCoefficientError):
            assemble_np_operator(mesh, np.array([1, 1, -1e-10, 1, 1.0]), 1.0, np.zeros(5),
                                 PhysicalParams())


class TestFriction:
    def test_examples(self):
        p = PhysicalParams()
        np.testing.assert_array_equal(friction_matrix(0, 0, p), np.zeros((2, 2)))
        np.testing.assert_array_equal(friction_matrix(1, 0, p), np.diag([1.0, 0.0]))
        M = friction_matrix(1, 1, p)
        np.testing.assert_array_equal(M, [[2, -1], [-1, 2]])
        np.testing.assert_allclose(np.linalg.eigvalsh(M), [1, 3])

    def test_symmetric_psd_sampled(self):
        rng = np.random.default_rng(6)
        for kind in ("arithmetic", "harmonic", "geometric"):
            p = PhysicalParams(D_n=0.5, D_p=3.0, drag_average=kind)
            for cn, cp in rng.uniform(0, 10, (1000, 2)):
                M = friction_matrix(cn, cp, p)
                assert M[0, 1] == M[1, 0]
                assert np.linalg.eigvalsh(M).min() >= -1e-14

    def test_inverse_reproduces_flux_form(self):
        # M u = -kT F, so the flux c u is -kT diag(c) M^{-1} F
        p = PhysicalParams(D_n=1.0, D_p=2.0)
        cn, cp = 0.8, 1.7
        Minv = np.linalg.inv(friction_matrix(cn, cp, p))
        c = coupling_coefficients(np.array([cn]), np.array([cp]), p)
        K = p.kB_T * np.diag([cn, cp]) @ Minv
        np.testing.assert_allclose(K, [[c.D_nn[0], c.D_np[0]], [c.D_pn[0], c.D_pp[0]]], rtol=1e-13)

    def test_off_has_no_drag(self):
        M = friction_matrix(2.0, 3.0, PhysicalParams(drag_average="off"))
        np.testing.assert_array_equal(M, np.diag([2.0, 3.0]))
