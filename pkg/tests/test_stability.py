import itertools

import numpy as np
import pytest

from fracstab import fde, lkf, stability
from fracstab.errors import DimensionMismatch, Infeasible

A_LIN = np.array([[-1.5, 0.1, -0.1], [0.1, -1.8, -0.3], [0.3, 0.1, -1.3]])


def scalar_problem(a=-2.0, L=0.1, tau_bar=0.1, alpha=0.95):
    c = fde.SystemConstants(L_f=L, L_g=L, L_tau=0.0, tau_bar=tau_bar)
    return stability.LmiProblem(A=np.array([[a]]), constants=c,
                                alpha=alpha, tau_bar=tau_bar)


def toy3_problem(tau_bar=0.5, alpha=0.95, L_f=0.3, L_g=0.2):
    c = fde.SystemConstants(L_f=L_f, L_g=L_g, L_tau=0.05, tau_bar=tau_bar)
    return stability.LmiProblem(A=A_LIN, constants=c, alpha=alpha,
                                tau_bar=tau_bar)


def hopfield_problem():
    c = fde.SystemConstants(L_f=3.81, L_g=2.22, L_tau=0.078, tau_bar=0.5)
    return stability.LmiProblem(A=A_LIN, constants=c, alpha=0.95, tau_bar=0.5)


def scalar_grid_best_gamma(prob, feasible_only=True):
    """Exhaustive oracle over a coarse grid of (p, q, r, eps1, eps2, eps3)."""
    a = float(prob.A[0, 0])
    tb, al = prob.tau_bar, prob.alpha
    Lf, Lg = prob.constants.L_f, prob.constants.L_g
    best = None
    for p, q, r, e1, e2 in itertools.product(
            np.linspace(0.1, 1.0, 7), np.geomspace(0.01, 10.0, 8),
            np.geomspace(1e-3, 1.0, 4), np.geomspace(0.05, 30.0, 8),
            np.geomspace(0.05, 30.0, 8)):
        e3 = 1e3
        w11 = (2.0 * p * a + tb * q + tb ** al / al * r
               + (e1 + e2) * p * p + Lf ** 2 / e1 + Lg ** 2 / e2)
        omega_neg = w11 < 0.0 and w11 * (-e3) - p * p > 0.0
        side = Lg ** 2 / e2 < tb * q
        if omega_neg and side:
            gamma = -(w11 + p * p / e3)
            if best is None or gamma > best:
                best = gamma
    return best


class TestAssembleOmega:
    def test_scalar_arithmetic(self):
        # A=-1, P=Q=R=1, eps=(1,1,1), tb=1, a=1, L=0: Omega11 = -2+1+1+2 = 2
        c = fde.SystemConstants(L_f=0.0, L_g=0.0, L_tau=0.0, tau_bar=1.0)
        prob = stability.LmiProblem(A=np.array([[-1.0]]), constants=c,
                                    alpha=1.0, tau_bar=1.0)
        one = np.eye(1)
        om = stability.assemble_omega(prob, one, one, one, (1.0, 1.0, 1.0))
        assert om == pytest.approx(np.array([[2.0, 1.0], [1.0, -1.0]]))
        assert np.linalg.eigvalsh(om)[-1] > 0.0  # not negative definite

    def test_limiting_structure(self):
        c = fde.SystemConstants(L_f=0.0, L_g=0.0, L_tau=0.0, tau_bar=0.5)
        prob = stability.LmiProblem(A=A_LIN, constants=c, alpha=0.9, tau_bar=0.5)
        P = np.eye(3)
        Q = 0.3 * np.eye(3)
        R = 0.2 * np.eye(3)
        eps = 1e-8
        w11 = stability.omega11(prob, P, Q, R, eps, eps)
        expect = (P @ A_LIN + A_LIN.T @ P + 0.5 * Q + 0.5 ** 0.9 / 0.9 * R)
        assert np.allclose(w11, expect, atol=1e-6)

    def test_eps_validation(self):
        prob = scalar_problem()
        with pytest.raises(DimensionMismatch):
            stability.assemble_omega(prob, np.eye(1), np.eye(1), np.eye(1),
                                     (1.0, -1.0, 1.0))


class TestSolve:
    def test_scalar_feasible_with_grid_oracle(self):
        prob = scalar_problem()
        cert = stability.solve_lmi(prob, gamma_tol=1e-3)
        assert cert.gamma > 0.0
        check = stability.verify_certificate(prob, cert)
        assert check.passed
        # exhaustive grid search can only find feasible points at most as
        # good as the true optimum the solver approximates
        grid_best = scalar_grid_best_gamma(prob)
        assert grid_best is not None
        assert cert.gamma >= grid_best - 1e-6

    def test_scalar_infeasible_confirmed_by_grid(self):
        prob = scalar_problem(a=1.0, L=1.0)
        assert scalar_grid_best_gamma(prob) is None
        with pytest.raises(Infeasible):
            stability.solve_lmi(prob, gamma_tol=1e-3)

    def test_toy3_certificate(self):
        prob = toy3_problem()
        cert = stability.solve_lmi(prob, gamma_tol=1e-3)
        assert cert.gamma > 0.5
        assert cert.delta > 0.0
        assert stability.verify_certificate(prob, cert).passed
        assert cert.normalization <= 1.0 + 1e-9

    def test_margin_consistency_resolve(self):
        prob = toy3_problem()
        cert = stability.solve_lmi(prob, gamma_tol=1e-3)
        tb2 = prob.tau_bar + 0.9 * cert.delay_margin
        prob2 = toy3_problem(tau_bar=tb2)
        cert2 = stability.solve_lmi(prob2, gamma_tol=1e-3)
        assert cert2.gamma > 0.0

    def test_hopfield_provably_infeasible(self):
        with pytest.raises(Infeasible) as err:
            stability.solve_lmi(hopfield_problem())
        assert err.value.provable
        assert "provably infeasible" in str(err.value)
        assert err.value.best_lambda_max is not None

    def test_two_dimensional_problem(self):
        # even dimension exercises the generic triangular packing
        A = np.array([[-2.0, 0.4], [-0.3, -1.6]])
        c = fde.SystemConstants(L_f=0.2, L_g=0.15, L_tau=0.0, tau_bar=0.3)
        prob = stability.LmiProblem(A=A, constants=c, alpha=0.8, tau_bar=0.3)
        cert = stability.solve_lmi(prob, gamma_tol=1e-3)
        assert cert.gamma > 0.0
        assert stability.verify_certificate(prob, cert).passed
        assert cert.weights.P.shape == (2, 2)

    def test_gamma_monotone_in_tau_bar(self):
        gammas = []
        for tb in (0.1, 0.3, 0.5, 0.7):
            cert = stability.solve_lmi(scalar_problem(tau_bar=tb), gamma_tol=1e-3)
            gammas.append(cert.gamma)
        diffs = np.diff(gammas)
        assert np.all(diffs <= 1e-3), gammas


class TestBoundsAndMargins:
    def make_cert(self):
        return stability.solve_lmi(scalar_problem(), gamma_tol=1e-3)

    def test_ml_bound_at_t0(self):
        cert = self.make_cert()
        v = stability.ml_bound(cert, phi_norm=2.0, alpha=0.95, t=0.0)
        ref = np.sqrt(cert.bounds.c2 / cert.bounds.c1) * 2.0
        assert v == pytest.approx(ref, rel=1e-12)

    def test_ml_bound_zero_history(self):
        cert = self.make_cert()
        for t in (0.0, 1.0, 7.5):
            assert stability.ml_bound(cert, 0.0, 0.95, t) == 0.0

    def test_ml_bound_decreasing(self):
        cert = self.make_cert()
        vals = [stability.ml_bound(cert, 1.0, 0.95, t) for t in np.linspace(0, 10, 30)]
        assert np.all(np.diff(vals) < 0.0)

    def test_delay_margin_formula(self):
        cert = self.make_cert()
        qmax = float(np.linalg.eigvalsh(cert.weights.Q)[-1])
        rmax = float(np.linalg.eigvalsh(cert.weights.R)[-1])
        for alpha, tb in ((0.95, 0.1), (0.6, 0.1)):
            got = stability.delay_margin(cert, tb, alpha)
            assert got == pytest.approx(
                cert.delta / (qmax + tb ** (alpha - 1.0) * rmax), rel=1e-12)

    def test_delay_margin_alpha_insensitive_when_R_small(self):
        cert = self.make_cert()
        rmax = float(np.linalg.eigvalsh(cert.weights.R)[-1])
        qmax = float(np.linalg.eigvalsh(cert.weights.Q)[-1])
        if rmax < 1e-3 * qmax:
            m1 = stability.delay_margin(cert, 0.1, 0.5)
            m2 = stability.delay_margin(cert, 0.1, 0.95)
            assert m1 == pytest.approx(m2, rel=0.2)


class TestBoundDomination:
    def toy3_model(self, tau_bar=0.5, alpha=0.95):
        # dynamics consistent with the toy3 constants: remainder of f is
        # 0.3 (tanh - id), delayed part 0.2 tanh, delay inside [0, tau_bar]
        om = np.array([0.3, 0.3, 0.3])
        c = fde.SystemConstants(L_f=0.3, L_g=0.2, L_tau=0.05, tau_bar=tau_bar)
        return fde.SystemModel(
            alpha=alpha, dim=3,
            f=lambda x: A_LIN @ x + 0.3 * (np.tanh(x) - x),
            g=lambda x: 0.2 * np.tanh(x),
            tau=lambda x: tau_bar * (1.0 - 0.3 * 0.5 * (1.0 + np.tanh(om @ x))),
            B=np.zeros((3, 1)), constants=c)

    def test_trajectory_below_ml_bound(self):
        prob = toy3_problem()
        cert = stability.solve_lmi(prob, gamma_tol=1e-3)
        model = self.toy3_model()
        x0 = np.array([0.5, -0.3, 0.4])
        init = fde.InitialFunction.constant(x0, 0.5)
        traj = fde.integrate(model, init, fde.SolverConfig(t_end=10.0, h=0.05))
        phi_norm = float(np.linalg.norm(x0))
        norms = np.linalg.norm(traj.states(), axis=1)
        bounds = np.array([stability.ml_bound(cert, phi_norm, 0.95, float(t))
                           for t in traj.times()])
        assert np.all(norms <= bounds + 1e-12)

    def test_lkf_decay_below_comparison_envelope(self):
        # eval_full(t) <= V(t0) E_a(-(gamma/c2)(t-t0)^a) along the toy run
        prob = toy3_problem()
        cert = stability.solve_lmi(prob, gamma_tol=1e-3)
        model = self.toy3_model()
        init = fde.InitialFunction.constant([0.5, -0.3, 0.4], 0.5)
        traj = fde.integrate(model, init, fde.SolverConfig(t_end=10.0, h=0.05))
        from fracstab.specfun import ml
        v0 = lkf.eval_full(cert.weights, 0.95, traj, 0.0)
        ok = True
        for t in traj.times()[::4]:
            v = lkf.eval_full(cert.weights, 0.95, traj, float(t))
            env = v0 * ml(0.95, -(cert.gamma / cert.bounds.c2) * float(t) ** 0.95)
            ok = ok and (v <= env * (1.0 + 1e-6) + 1e-12)
        assert ok
