import numpy as np
import pytest

from fracstab import control, fde, hopfield
from fracstab.errors import ConfigError, DimensionMismatch


def char_poly_roots_3x3(M):
    """Independent eigenvalue oracle: explicit characteristic polynomial
    from trace, principal 2-minors and determinant, then np.roots."""
    tr = M[0, 0] + M[1, 1] + M[2, 2]
    m2 = (M[0, 0] * M[1, 1] - M[0, 1] * M[1, 0]
          + M[0, 0] * M[2, 2] - M[0, 2] * M[2, 0]
          + M[1, 1] * M[2, 2] - M[1, 2] * M[2, 1])
    det = (M[0, 0] * (M[1, 1] * M[2, 2] - M[1, 2] * M[2, 1])
           - M[0, 1] * (M[1, 0] * M[2, 2] - M[1, 2] * M[2, 0])
           + M[0, 2] * (M[1, 0] * M[2, 1] - M[1, 1] * M[2, 0]))
    return np.roots([1.0, -tr, m2, -det])


class TestBuild:
    def test_origin_is_equilibrium(self):
        params = hopfield.HopfieldParams()
        model = hopfield.build(params)
        assert np.allclose(model.f(np.zeros(3)), 0.0)
        assert np.allclose(model.g(np.zeros(3)), 0.0)
        assert model.tau(np.zeros(3)) == pytest.approx(params.tau_bar)

    def test_delay_saturation_range(self):
        params = hopfield.HopfieldParams()
        tau = hopfield.delay_map(params)
        big = np.full(3, 50.0)
        assert tau(big) == pytest.approx(0.5 * (1.0 - 0.3), abs=1e-6)
        assert tau(-big) == pytest.approx(0.5 * (1.0 + 0.3), abs=1e-6)

    def test_delay_positivity_everywhere(self):
        # tau(x) >= tau_bar (1 - eta) = 0.35 for every state
        params = hopfield.HopfieldParams()
        tau = hopfield.delay_map(params)
        rng = np.random.default_rng(11)
        floor = params.tau_bar * (1.0 - params.eta)
        vals = [tau(rng.normal(scale=s, size=3))
                for s in (0.1, 1.0, 10.0, 100.0) for _ in range(500)]
        assert min(vals) >= floor - 1e-12
        assert min(vals) > 0.0

    def test_constants_carried(self):
        model = hopfield.build(hopfield.HopfieldParams())
        assert model.constants.L_f == 3.81
        assert model.constants.L_g == 2.22
        assert model.constants.L_tau == 0.078

    def test_validation(self):
        with pytest.raises(DimensionMismatch):
            hopfield.HopfieldParams(eta=1.0)
        with pytest.raises(DimensionMismatch):
            hopfield.HopfieldParams(C=np.array([[1.0, 0.2, 0.0],
                                                [0.0, 1.0, 0.0],
                                                [0.0, 0.0, 1.0]]))


class TestLinearize:
    def test_trace(self):
        A = hopfield.linearize(hopfield.HopfieldParams())
        assert np.trace(A) == pytest.approx(-4.6, abs=1e-12)

    def test_eigenvalue_real_parts(self):
        A = hopfield.linearize(hopfield.HopfieldParams())
        roots = char_poly_roots_3x3(A)
        got = np.sort(roots.real)
        expect = np.sort([-1.83, -1.39, -1.39])
        assert np.max(np.abs(got - expect)) <= 0.02
        assert np.all(roots.real < 0.0)  # Hurwitz

    def test_oracle_matches_eigvals(self):
        A = hopfield.linearize(hopfield.HopfieldParams())
        got = np.sort_complex(char_poly_roots_3x3(A))
        ref = np.sort_complex(np.linalg.eigvals(A))
        assert np.allclose(got, ref, atol=1e-8)

    def test_zero_weights_spectrum(self):
        params = hopfield.HopfieldParams(A_inst=np.zeros((3, 3)),
                                         W=np.zeros((3, 3)),
                                         L_f=1.2, L_g=0.0)
        A = hopfield.linearize(params)
        assert np.allclose(np.sort(np.linalg.eigvals(A).real),
                           [-1.2, -1.0, -0.9])


class TestParameterize:
    def test_regressors_vanish_at_origin(self):
        param = hopfield.parameterize(hopfield.HopfieldParams())
        assert np.allclose(param.phi_f(np.zeros(3)), 0.0)
        assert np.allclose(param.phi_g(np.zeros(3)), 0.0)

    def test_reconstruction_identity(self):
        params = hopfield.HopfieldParams()
        param = hopfield.parameterize(params)
        rng = np.random.default_rng(7)
        for _ in range(20):
            x = rng.normal(scale=1.5, size=3)
            err_f = np.linalg.norm(param.phi_f(x) @ param.theta_f_true
                                   - params.A_inst @ np.tanh(x))
            err_g = np.linalg.norm(param.phi_g(x) @ param.theta_g_true
                                   - params.W @ np.tanh(x))
            assert err_f <= 1e-14 and err_g <= 1e-14

    def test_known_part_plus_regressor_recovers_f(self):
        params = hopfield.HopfieldParams()
        param = hopfield.parameterize(params)
        model = hopfield.build(params)
        x = np.array([0.4, -0.2, 0.9])
        recon = param.A @ x + param.phi_f(x) @ param.theta_f_true
        assert np.allclose(recon, model.f(x), atol=1e-14)

    def test_bounds_carry_safety_factor(self):
        params = hopfield.HopfieldParams()
        param = hopfield.parameterize(params)
        assert param.theta_f_bound == pytest.approx(
            1.5 * np.linalg.norm(params.A_inst.ravel()))
        assert param.theta_g_bound == pytest.approx(
            1.5 * np.linalg.norm(params.W.ravel()))


class TestLipschitzAudit:
    def test_published_constants_are_upper_bounds(self):
        params = hopfield.HopfieldParams()
        audit = hopfield.lipschitz_audit(params, n_pairs=10_000, radius=2.0)
        assert audit.within(params), (audit.max_ratio_f, audit.max_ratio_g,
                                      audit.max_ratio_tau)
        # ratios should be meaningfully positive, not degenerate
        assert audit.max_ratio_f > 2.0
        assert audit.max_ratio_g > 1.0
        assert audit.max_ratio_tau > 0.02


class TestBenchmarkDynamics:
    def test_uncontrolled_converges_without_oscillation(self):
        params = hopfield.HopfieldParams()
        model = hopfield.build(params)
        init = fde.InitialFunction.constant([0.5, -0.3, 0.4], params.tau_bar)
        traj = fde.integrate(model, init, fde.SolverConfig(t_end=15.0, h=0.05))
        norms = np.linalg.norm(traj.states(), axis=1)
        assert norms[-1] < 0.05 * norms[0]
        assert np.all(np.diff(norms) <= 1e-9)  # monotone decay

    def test_delay_interval_and_convergence(self):
        params = hopfield.HopfieldParams()
        model = hopfield.build(params)
        init = fde.InitialFunction.constant([0.5, -0.3, 0.4], params.tau_bar)
        traj = fde.integrate(model, init, fde.SolverConfig(t_end=15.0, h=0.05))
        taus = np.array(traj.series["tau"])
        assert np.all(taus >= 0.35 - 1e-12)
        assert np.all(taus <= 0.50 + 1e-12)
        assert abs(taus[-1] - 0.5) < 0.005  # tau -> tau_bar as x -> 0

    def test_alpha_accelerates_convergence(self):
        settles = []
        for alpha in (0.70, 0.99):
            params = hopfield.HopfieldParams(alpha=alpha)
            model = hopfield.build(params)
            init = fde.InitialFunction.constant([0.5, -0.3, 0.4], params.tau_bar)
            traj = fde.integrate(model, init, fde.SolverConfig(t_end=15.0, h=0.05))
            norms = np.linalg.norm(traj.states(), axis=1)
            idx = np.where(norms <= 0.1 * norms[0])[0]
            settles.append(traj.times()[idx[0]] if idx.size else np.inf)
        assert settles[1] < settles[0]


class TestToml:
    def test_defaults_roundtrip(self, tmp_path):
        p = tmp_path / "hopfield.toml"
        p.write_text(
            "[weights]\n"
            "c = [1.0, 1.2, 0.9]\n"
            "a_inst = [[-2.0, 0.5, -0.3], [0.4, -1.8, 0.2], [-0.1, 0.3, -2.2]]\n"
            "w = [[1.5, -0.4, 0.2], [-0.3, 1.2, -0.5], [0.4, -0.2, 1.8]]\n"
            "[delay]\n"
            "tau_bar = 0.5\n"
            "eta = 0.3\n"
            "omega = [0.3, 0.3, 0.3]\n"
            "[simulation]\n"
            "alpha = 0.95\n")
        params = hopfield.params_from_toml(p)
        ref = hopfield.HopfieldParams()
        assert np.allclose(params.C, ref.C)
        assert np.allclose(params.A_inst, ref.A_inst)
        assert np.allclose(params.W, ref.W)
        assert params.tau_bar == ref.tau_bar
        assert params.alpha == ref.alpha

    def test_override_for_sweeps(self, tmp_path):
        p = tmp_path / "h.toml"
        p.write_text("[delay]\ntau_bar = 0.3\n[simulation]\nalpha = 0.8\n")
        params = hopfield.params_from_toml(p)
        assert params.tau_bar == 0.3
        assert params.alpha == 0.8
        assert np.allclose(params.W, hopfield.HopfieldParams().W)

    def test_missing_file(self):
        with pytest.raises(ConfigError):
            hopfield.params_from_toml("/nonexistent/nowhere.toml")

    def test_bad_toml(self, tmp_path):
        p = tmp_path / "bad.toml"
        p.write_text("[delay\ntau_bar = ")
        with pytest.raises(ConfigError):
            hopfield.params_from_toml(p)
