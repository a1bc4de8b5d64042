"""Adaptive control with fractional parameter update laws, plus the sliding
mode baseline used for energy comparisons.

The controller

    u = -K x - B'P x - B'P [Phi_f(x) th_f + Phi_g(x(t - tau_hat)) th_g]

compensates linearly parameterized unknown drift and delayed coupling.  The
estimates evolve by order-alpha update laws with sigma-modification leak,
so they ride inside the solver's augmented fractional state; the delay
estimate comes from a first-order exponential filter x_hat of the state
(integer order, advanced exactly once per committed step), which avoids
classical state derivatives that fractional trajectories do not possess.

Design conditions gate every closed-loop run:

  (C1) (A-BK)'P + P(A-BK) + 2PBB'P <= -mu I for some mu > 0,
  (C2) T_f < tau_bar / (2 L_tau L_phi_g th_g_bar),
  (C3) sigma_f, sigma_g < mu / (4 max(th_f_bar^2, th_g_bar^2)),

each an eigenvalue or scalar inequality checked before integrating; runs
with violated conditions are refused unless forced.  When the delay map or
the delayed regressor is constant (L_tau = 0 or tau_bar = 0), (C2) guards
against an estimation error that cannot exist and passes vacuously.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from . import sdp
from .errors import (ConditionViolation, DegenerateDenominator,
                     DimensionMismatch)
from .fde import (InitialFunction, SolverConfig, SystemConstants, SystemModel,
                  Trajectory, integrate)
from .specfun import gamma_fn

Array = np.ndarray


@dataclass
class Parameterization:
    """Linearly parameterized structure f = Ax + Phi_f th_f, g = Phi_g th_g."""

    A: Array
    phi_f: Callable[[Array], Array]
    phi_g: Callable[[Array], Array]
    theta_f_true: Array
    theta_g_true: Array
    theta_f_bound: float
    theta_g_bound: float

    def __post_init__(self):
        self.A = np.atleast_2d(np.asarray(self.A, dtype=float))
        self.theta_f_true = np.asarray(self.theta_f_true, dtype=float)
        self.theta_g_true = np.asarray(self.theta_g_true, dtype=float)
        for th, bound, name in ((self.theta_f_true, self.theta_f_bound, "f"),
                                (self.theta_g_true, self.theta_g_bound, "g")):
            if np.linalg.norm(th) > bound + 1e-12:
                raise DimensionMismatch(
                    f"theta_{name} bound {bound} below the true norm")

    @property
    def p_f(self) -> int:
        return self.theta_f_true.size

    @property
    def p_g(self) -> int:
        return self.theta_g_true.size


@dataclass
class AdaptiveConfig:
    """Gains of the controller and of the update laws."""

    K: Array
    P: Array
    Gamma_f: Array
    Gamma_g: Array
    sigma_f: float = 0.01
    sigma_g: float = 0.01
    T_f: float = 0.05
    mu: float = 0.0  # margin attained by (C1); filled by the designer

    def __post_init__(self):
        self.K = np.atleast_2d(np.asarray(self.K, dtype=float))
        self.P = np.atleast_2d(np.asarray(self.P, dtype=float))
        self.Gamma_f = np.atleast_2d(np.asarray(self.Gamma_f, dtype=float))
        self.Gamma_g = np.atleast_2d(np.asarray(self.Gamma_g, dtype=float))
        if self.T_f <= 0.0:
            raise DimensionMismatch("T_f must be positive")
        if min(self.sigma_f, self.sigma_g) < 0.0:
            raise DimensionMismatch("sigma leaks must be non-negative")


@dataclass
class AdaptiveState:
    """Estimator state: parameter estimates, filter state, delay estimate."""

    theta_f_hat: Array
    theta_g_hat: Array
    x_hat: Array
    tau_hat: float


@dataclass
class UltimateBound:
    """Closed-loop limsup radius and the delay-mismatch contribution."""

    bound: float
    delta_tau: float


@dataclass
class SmcConfig:
    """Sliding-mode baseline u = -K_s x - rho sgn(x) with optional boundary layer."""

    K_s: Array
    rho: float = 2.5
    boundary_layer: float = 0.0

    def __post_init__(self):
        self.K_s = np.atleast_2d(np.asarray(self.K_s, dtype=float))


# -- elementary operations -----------------------------------------------------

def filter_step(state: AdaptiveState, x: Array, T_f: float, h: float,
                tau_fn: Callable[[Array], float],
                tau_bar: Optional[float] = None) -> AdaptiveState:
    """Exact exponential update of the filter over one step of width h.

    x is held constant over the step (zero-order hold of the input), so
    x_hat+ = x + (x_hat - x) exp(-h/T_f); the delay estimate is re-evaluated
    at the new filter state.  ``tau_fn`` supplies the delay map, which the
    estimator composes with the filtered state.
    """
    x = np.asarray(x, dtype=float)
    decay = math.exp(-h / T_f)
    x_new = x + (state.x_hat - x) * decay
    tau_new = float(tau_fn(x_new))
    if tau_bar is not None:
        tau_new = min(max(tau_new, 0.0), tau_bar)
    return AdaptiveState(state.theta_f_hat, state.theta_g_hat, x_new, tau_new)


def adaptive_control(x: Array, x_delayed_hat: Array, state: AdaptiveState,
                     cfg: AdaptiveConfig, B: Array,
                     param: Parameterization) -> Array:
    """u = -Kx - B'Px - B'P [Phi_f(x) th_f_hat + Phi_g(x_del_hat) th_g_hat]."""
    BtP = B.T @ cfg.P
    comp = (param.phi_f(x) @ state.theta_f_hat
            + param.phi_g(x_delayed_hat) @ state.theta_g_hat)
    return -cfg.K @ x - BtP @ x - BtP @ comp


def adaptation_rhs(x: Array, x_delayed_hat: Array, state: AdaptiveState,
                   cfg: AdaptiveConfig, B: Array,
                   param: Parameterization) -> tuple[Array, Array]:
    """Caputo right-hand sides of the sigma-modified update laws."""
    BBtP = B @ B.T @ cfg.P
    drive = BBtP @ x
    df = cfg.Gamma_f @ (param.phi_f(x).T @ drive) - cfg.sigma_f * state.theta_f_hat
    dg = (cfg.Gamma_g @ (param.phi_g(x_delayed_hat).T @ drive)
          - cfg.sigma_g * state.theta_g_hat)
    return df, dg


def delay_error_bound(constants: SystemConstants, M_x: float, M_u: float,
                      B_norm: float, T_f: float, alpha: float) -> float:
    """Estimation-error bound L_tau M_D T_f^alpha / Gamma(alpha+1)."""
    M_D = (constants.L_f + constants.L_g) * M_x + B_norm * M_u
    return constants.L_tau * M_D * T_f ** alpha / gamma_fn(alpha + 1.0)


def delta_tau_estimate(constants: SystemConstants, param: Parameterization,
                       L_x: float, M_x: float, M_u: float, B_norm: float,
                       T_f: float, alpha: float, mu: float) -> float:
    """Concrete instantiation of the O(T_f^{2 alpha}) mismatch term.

    Square of the regressor mismatch L_phi_g L_x L_tau M_D T_f^a/Gamma(a+1)
    scaled by th_g_bar^2 / mu.  One computable choice among many consistent
    with the order bound; recorded in run manifests.
    """
    M_D = (constants.L_f + constants.L_g) * M_x + B_norm * M_u
    mism = (constants.L_phi_g * L_x * constants.L_tau * M_D
            * T_f ** alpha / gamma_fn(alpha + 1.0))
    return mism ** 2 * param.theta_g_bound ** 2 / mu


def ultimate_bound(cfg: AdaptiveConfig, param: Parameterization,
                   delta_tau: float) -> UltimateBound:
    """Radius sqrt(2(sf thf^2 + sg thg^2 + dtau)/(mu - 2(sf+sg)))."""
    den = cfg.mu - 2.0 * (cfg.sigma_f + cfg.sigma_g)
    if den <= 0.0:
        raise DegenerateDenominator(
            f"mu={cfg.mu} must exceed 2(sigma_f+sigma_g)="
            f"{2.0 * (cfg.sigma_f + cfg.sigma_g)}")
    num = 2.0 * (cfg.sigma_f * param.theta_f_bound ** 2
                 + cfg.sigma_g * param.theta_g_bound ** 2 + delta_tau)
    return UltimateBound(math.sqrt(num / den), delta_tau)


def smc_control(x: Array, cfg: SmcConfig) -> Array:
    """Reaching law -K_s x - rho sgn(x); sgn(0) = 0, optional saturation."""
    x = np.asarray(x, dtype=float)
    if cfg.boundary_layer > 0.0:
        sw = np.clip(x / cfg.boundary_layer, -1.0, 1.0)
    else:
        sw = np.sign(x)
    return -cfg.K_s @ x - cfg.rho * sw


# -- feedback design -------------------------------------------------------------

def design_feedback(A: Array, B: Array, poles=(-2.0, -2.0, -2.0)) -> Array:
    """Stabilizing K placing the spectrum of A - BK at the requested poles.

    Exact placement needs B invertible (the benchmark has B = I); a
    non-square B falls back to Ackermann for single-input controllable
    pairs.
    """
    A = np.atleast_2d(np.asarray(A, dtype=float))
    B = np.atleast_2d(np.asarray(B, dtype=float))
    n = A.shape[0]
    target = np.diag(np.asarray(poles, dtype=float)[:n])
    if B.shape[0] == B.shape[1]:
        if abs(np.linalg.det(B)) < 1e-12:
            raise DimensionMismatch("square B is singular; cannot place poles")
        return np.linalg.solve(B, A - target)
    if B.shape[1] == 1:
        ctrb = np.hstack([np.linalg.matrix_power(A, i) @ B for i in range(n)])
        if abs(np.linalg.det(ctrb)) < 1e-12:
            raise DimensionMismatch("(A, B) not controllable")
        coeffs = np.poly(np.asarray(poles, dtype=float)[:n])
        acker = np.zeros_like(A)
        for i, c in enumerate(coeffs):
            acker += c * np.linalg.matrix_power(A, n - i)
        e_last = np.zeros((1, n))
        e_last[0, -1] = 1.0
        return e_last @ np.linalg.solve(ctrb, acker)
    raise DimensionMismatch("pole placement implemented for square or single-input B")


def design_lyapunov(A: Array, B: Array, K: Array, *, p_cap: float = 50.0,
                    mu_tol: float = 1e-3) -> tuple[Array, float]:
    """P > 0 maximizing mu in (A-BK)'P + P(A-BK) + 2PBB'P <= -mu I.

    The quadratic term linearizes by the Schur block [[-Lyap(P) - mu I,
    sqrt(2) PB], [sqrt(2) B'P, I]] > 0, so the barrier engine applies with
    bisection over mu.  The quadratic term self-limits the scale of P; the
    cap only bounds the barrier domain.
    """
    A = np.atleast_2d(np.asarray(A, dtype=float))
    B = np.atleast_2d(np.asarray(B, dtype=float))
    K = np.atleast_2d(np.asarray(K, dtype=float))
    Acl = A - B @ K
    n = A.shape[0]
    m_tri = n * (n + 1) // 2
    idx = np.tril_indices(n)
    eye = np.eye(n)
    s2 = math.sqrt(2.0)

    def unpack(v):
        P = np.zeros((n, n))
        P[idx] = v
        return P + P.T - np.diag(np.diag(P))

    def factory(mu):
        def schur(v):
            P = unpack(v)
            lyap = Acl.T @ P + P @ Acl
            M = np.zeros((2 * n, 2 * n))
            M[:n, :n] = -lyap - mu * eye
            M[:n, n:] = s2 * (P @ B)
            M[n:, :n] = s2 * (B.T @ P)
            M[n:, n:] = eye
            return M

        def pos(v):
            return unpack(v)

        def cap(v):
            return p_cap * eye - unpack(v)

        return [schur, pos, cap]

    res = sdp.maximize_parameter(factory, m_tri, tol=mu_tol)
    if not res.feasible_at_zero:
        raise ConditionViolation("A - BK admits no Lyapunov certificate; "
                                 "is it Hurwitz?")
    P = unpack(res.x)
    mu = float(-np.linalg.eigvalsh(Acl.T @ P + P @ Acl
                                   + 2.0 * P @ B @ B.T @ P)[-1])
    return P, mu


# -- design-condition gates -------------------------------------------------------

@dataclass
class ConditionsReport:
    c1_ok: bool
    c1_mu: float
    c2_ok: bool
    c2_limit: float
    c3_ok: bool
    c3_limit: float

    @property
    def all_ok(self) -> bool:
        return self.c1_ok and self.c2_ok and self.c3_ok


def check_conditions(cfg: AdaptiveConfig, param: Parameterization,
                     constants: SystemConstants, B: Array) -> ConditionsReport:
    A = param.A
    B = np.atleast_2d(np.asarray(B, dtype=float))
    Acl = A - B @ cfg.K
    mu = float(-np.linalg.eigvalsh(Acl.T @ cfg.P + cfg.P @ Acl
                                   + 2.0 * cfg.P @ B @ B.T @ cfg.P)[-1])
    c1_ok = mu > 0.0
    den = 2.0 * constants.L_tau * constants.L_phi_g * param.theta_g_bound
    if den == 0.0 or constants.tau_bar == 0.0:
        # no delay-estimation error can exist; the gate is vacuous
        c2_limit, c2_ok = math.inf, True
    else:
        c2_limit = constants.tau_bar / den
        c2_ok = cfg.T_f < c2_limit
    c3_limit = mu / (4.0 * max(param.theta_f_bound ** 2,
                               param.theta_g_bound ** 2))
    c3_ok = max(cfg.sigma_f, cfg.sigma_g) < c3_limit
    return ConditionsReport(c1_ok, mu, c2_ok, c2_limit, c3_ok, c3_limit)


# -- closed-loop simulation --------------------------------------------------------

class AdaptiveController:
    """Lockstep controller driving :func:`fracstab.fde.integrate`.

    The parameter estimates are the augmented fractional state; the filter
    advances by the exact exponential update, lazily extended so control
    evaluations at the step being computed already see x_hat there.
    """

    def __init__(self, model: SystemModel, param: Parameterization,
                 cfg: AdaptiveConfig, theta_f0: Optional[Array] = None,
                 theta_g0: Optional[Array] = None):
        self.model = model
        self.param = param
        self.cfg = cfg
        self.n = model.dim
        self.p_f = param.p_f
        self.p_g = param.p_g
        self.extra_dim = self.p_f + self.p_g
        self.theta_f0 = (np.zeros(self.p_f) if theta_f0 is None
                         else np.asarray(theta_f0, dtype=float))
        self.theta_g0 = (np.zeros(self.p_g) if theta_g0 is None
                         else np.asarray(theta_g0, dtype=float))
        self._xhat: list[Array] = []
        self._tauhat: list[float] = []

    def initial_extra(self) -> Array:
        return np.concatenate([self.theta_f0, self.theta_g0])

    def _split(self, x_aug: Array):
        n, pf = self.n, self.p_f
        return x_aug[:n], x_aug[n:n + pf], x_aug[n + pf:]

    def _ensure_filter(self, k: int, traj: Trajectory) -> None:
        if not self._xhat:
            x0 = traj.state(0)[:self.n]
            self._xhat.append(x0.copy())
            self._tauhat.append(self._clip_tau(self.model.tau(x0)))
        decay = math.exp(-traj.h / self.cfg.T_f)
        while len(self._xhat) <= k:
            j = len(self._xhat) - 1
            xj = traj.state(j)[:self.n]  # committed node, zero-order hold
            nxt = xj + (self._xhat[j] - xj) * decay
            self._xhat.append(nxt)
            self._tauhat.append(self._clip_tau(self.model.tau(nxt)))

    def _clip_tau(self, tau: float) -> float:
        return min(max(float(tau), 0.0), self.model.constants.tau_bar)

    def _estimator_at(self, t: float, x_aug: Array, traj: Trajectory):
        k = int(round((t - traj.t0) / traj.h))
        self._ensure_filter(k, traj)
        x, thf, thg = self._split(x_aug)
        xd_hat = traj.lookup(t - self._tauhat[k])[:self.n]
        state = AdaptiveState(thf, thg, self._xhat[k], self._tauhat[k])
        return x, xd_hat, state

    def control(self, t: float, x_aug: Array, traj: Trajectory) -> Array:
        x, xd_hat, state = self._estimator_at(t, x_aug, traj)
        return adaptive_control(x, xd_hat, state, self.cfg, self.model.B,
                                self.param)

    def extra_rhs(self, t: float, x_aug: Array, traj: Trajectory,
                  u: Array) -> Array:
        x, xd_hat, state = self._estimator_at(t, x_aug, traj)
        df, dg = adaptation_rhs(x, xd_hat, state, self.cfg, self.model.B,
                                self.param)
        return np.concatenate([df, dg])

    def on_commit(self, k: int, t: float, x_aug: Array, traj: Trajectory) -> None:
        self._ensure_filter(k, traj)
        traj.series.setdefault("tau_hat", []).append(self._tauhat[k])
        traj.series.setdefault("x_hat", []).append(self._xhat[k].copy())


@dataclass
class ControlledRun:
    """Closed-loop run unpacked into aligned per-node arrays."""

    t: Array
    x: Array
    u: Array
    tau: Array
    traj: Trajectory
    model: SystemModel
    tau_hat: Optional[Array] = None
    x_hat: Optional[Array] = None
    theta_f: Optional[Array] = None
    theta_g: Optional[Array] = None

    @property
    def norms(self) -> Array:
        return np.linalg.norm(self.x, axis=1)


def simulate_adaptive(model: SystemModel, param: Parameterization,
                      cfg: AdaptiveConfig, init: InitialFunction,
                      scfg: SolverConfig, theta_f0: Optional[Array] = None,
                      theta_g0: Optional[Array] = None,
                      force: bool = False) -> ControlledRun:
    """Closed-loop adaptive run; refuses configurations violating (C1)-(C3)."""
    report = check_conditions(cfg, param, model.constants, model.B)
    if not report.all_ok and not force:
        raise ConditionViolation(
            f"design conditions violated: C1={report.c1_ok} (mu={report.c1_mu:.4f}), "
            f"C2={report.c2_ok} (limit={report.c2_limit:.4f}), "
            f"C3={report.c3_ok} (limit={report.c3_limit:.4f})")
    ctrl = AdaptiveController(model, param, cfg, theta_f0, theta_g0)
    traj = integrate(model, init, scfg, controller=ctrl)
    n, pf = model.dim, param.p_f
    states = traj.states()
    return ControlledRun(
        t=traj.times(), x=states[:, :n], u=np.array(traj.series["u"]),
        tau=np.array(traj.series["tau"]), traj=traj, model=model,
        tau_hat=np.array(traj.series["tau_hat"]),
        x_hat=np.array(traj.series["x_hat"]),
        theta_f=states[:, n:n + pf], theta_g=states[:, n + pf:])


def simulate_smc(model: SystemModel, smc_cfg: SmcConfig, init: InitialFunction,
                 scfg: SolverConfig) -> ControlledRun:
    """Closed-loop run with the sliding mode baseline."""
    traj = integrate(model, init, scfg,
                     controller=lambda t, x: smc_control(x, smc_cfg))
    return ControlledRun(
        t=traj.times(), x=traj.states(), u=np.array(traj.series["u"]),
        tau=np.array(traj.series["tau"]), traj=traj, model=model)


def simulate_uncontrolled(model: SystemModel, init: InitialFunction,
                          scfg: SolverConfig) -> ControlledRun:
    """Open-loop run packaged like the controlled ones."""
    traj = integrate(model, init, scfg)
    return ControlledRun(
        t=traj.times(), x=traj.states(), u=np.array(traj.series["u"]),
        tau=np.array(traj.series["tau"]), traj=traj, model=model)
