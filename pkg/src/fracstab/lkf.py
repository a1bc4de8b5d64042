"""Numerical evaluation of the singular-kernel Lyapunov-Krasovskii functional

    V(t) = x'Px + int_{-tb}^0 int_{t+th}^t x'Qx ds dth
               + int_0^{tb} xi^(a-1) int_{t-xi}^t x'Rx ds dxi,

its two-sided bounds, and L1-scheme Caputo derivatives of sampled scalars.

The third term carries an integrable singularity at xi = 0.  Substituting
u = xi^a turns the outer integral into (1/a) int_0^{tb^a} inner(u^(1/a)) du
with a bounded integrand, removing the singularity exactly; a composite
trapezoid over u (200 nodes by default) then converges cleanly.  Inner time
integrals reuse the trajectory grid with trapezoid weights, optionally
refined, with window endpoints interpolated linearly like the trajectory
itself.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import DimensionMismatch, InsufficientHistory, OutOfRange
from .fde import SystemModel, Trajectory
from .specfun import gamma_fn

Array = np.ndarray


def _check_spd(M: Array, name: str) -> None:
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise DimensionMismatch(f"{name} must be square")
    if not np.allclose(M, M.T, atol=1e-9 * (1.0 + np.abs(M).max())):
        raise DimensionMismatch(f"{name} must be symmetric")
    if np.linalg.eigvalsh(M)[0] <= 0.0:
        raise DimensionMismatch(f"{name} must be positive definite")


@dataclass
class LkfWeights:
    """Symmetric positive-definite weight matrices of the functional."""

    P: Array
    Q: Array
    R: Array

    def __post_init__(self):
        self.P = np.asarray(self.P, dtype=float)
        self.Q = np.asarray(self.Q, dtype=float)
        self.R = np.asarray(self.R, dtype=float)
        for M, name in ((self.P, "P"), (self.Q, "Q"), (self.R, "R")):
            _check_spd(M, name)
        if not (self.P.shape == self.Q.shape == self.R.shape):
            raise DimensionMismatch("P, Q, R must share one dimension")


@dataclass
class LkfBounds:
    """Sandwich constants: c1 ||x(t)||^2 <= V <= c2 ||x_t||_inf^2."""

    c1: float
    c2: float

    @staticmethod
    def from_weights(weights: LkfWeights, tau_bar: float, alpha: float) -> "LkfBounds":
        c1 = float(np.linalg.eigvalsh(weights.P)[0])
        c2 = float(np.linalg.eigvalsh(weights.P)[-1]
                   + 0.5 * tau_bar ** 2 * np.linalg.eigvalsh(weights.Q)[-1]
                   + tau_bar ** (alpha + 1.0) / (alpha + 1.0)
                   * np.linalg.eigvalsh(weights.R)[-1])
        if not (0.0 < c1 <= c2):
            raise DimensionMismatch(f"bounds degenerate: c1={c1}, c2={c2}")
        return LkfBounds(c1, c2)


def eval_v1(P: Array, x: Array) -> float:
    """Quadratic term x'Px."""
    P = np.asarray(P, dtype=float)
    x = np.asarray(x, dtype=float)
    if P.shape[0] != x.size:
        raise DimensionMismatch(f"P is {P.shape}, x has size {x.size}")
    return float(x @ P @ x)


class _Window:
    """Quadratic-form samples w(s) = x(s)'Mx(s) on [t - tau_bar, t],
    with cumulative trapezoid integrals measured backward from t."""

    def __init__(self, M: Array, traj: Trajectory, t: float, tau_bar: float,
                 refine: int):
        n = M.shape[0]
        if t < traj.t0 - 1e-12 or t > traj.t_latest + 1e-12:
            raise OutOfRange(f"t={t} outside [{traj.t0}, {traj.t_latest}]")
        self.M = M
        self.traj = traj
        self.t = t
        self.n = n
        self.h = traj.h / max(1, int(refine))
        self.tau_bar = tau_bar
        self.J = int(np.floor(tau_bar / self.h + 1e-12))
        self.rem = max(tau_bar - self.J * self.h, 0.0)
        if self.rem < 1e-12 * max(1.0, tau_bar):
            self.rem = 0.0
        self.w_nodes = np.array([self._w(t - j * self.h) for j in range(self.J + 1)])
        # cum[j] = integral of w over [t - j h, t]
        self.cum = np.zeros(self.J + 1)
        if self.J >= 1:
            seg = 0.5 * self.h * (self.w_nodes[:-1] + self.w_nodes[1:])
            self.cum[1:] = np.cumsum(seg)

    def _w(self, s: float) -> float:
        x = self.traj.lookup(s)[:self.n]
        return float(x @ self.M @ x)

    def inner(self, xi: float) -> float:
        """integral of w over [t - xi, t] for 0 <= xi <= tau_bar."""
        if xi <= 0.0:
            return 0.0
        j = min(int(np.floor(xi / self.h + 1e-12)), self.J)
        base = self.cum[j]
        rem = xi - j * self.h
        if rem <= 1e-14:
            return float(base)
        w_end = self._w(self.t - xi)
        w_j = self.w_nodes[j]
        return float(base + 0.5 * rem * (w_j + w_end))


def eval_v2(Q: Array, traj: Trajectory, t: float, tau_bar: Optional[float] = None,
            refine: int = 1) -> float:
    """Double-integral term: iterated composite trapezoid over the grid."""
    Q = np.asarray(Q, dtype=float)
    tb = traj.history.tau_bar if tau_bar is None else float(tau_bar)
    if tb == 0.0:
        return 0.0
    win = _Window(Q, traj, t, tb, refine)
    xi = [j * win.h for j in range(win.J + 1)]
    vals = [win.cum[j] for j in range(win.J + 1)]
    if win.rem > 0.0:
        xi.append(tb)
        vals.append(win.inner(tb))
    return float(np.trapezoid(vals, xi))


def eval_v3(R: Array, alpha: float, traj: Trajectory, t: float,
            tau_bar: Optional[float] = None, n_outer: int = 200,
            refine: int = 1) -> float:
    """Singular-kernel term via the exact substitution u = xi^alpha."""
    R = np.asarray(R, dtype=float)
    if not (0.0 < alpha <= 1.0):
        raise OutOfRange(f"alpha must lie in (0, 1], got {alpha}")
    tb = traj.history.tau_bar if tau_bar is None else float(tau_bar)
    if tb == 0.0:
        return 0.0
    win = _Window(R, traj, t, tb, refine)
    us = np.linspace(0.0, tb ** alpha, n_outer + 1)
    vals = np.empty_like(us)
    vals[0] = 0.0
    for i in range(1, len(us)):
        xi = min(us[i] ** (1.0 / alpha), tb)
        vals[i] = win.inner(xi)
    return float(np.trapezoid(vals, us) / alpha)


def eval_full(weights: LkfWeights, alpha: float, traj: Trajectory, t: float,
              tau_bar: Optional[float] = None, n_outer: int = 200,
              refine: int = 1) -> float:
    """V1 + V2 + V3 at time t."""
    n = weights.P.shape[0]
    x = traj.lookup(t)[:n]
    return (eval_v1(weights.P, x)
            + eval_v2(weights.Q, traj, t, tau_bar, refine)
            + eval_v3(weights.R, alpha, traj, t, tau_bar, n_outer, refine))


# -- L1 Caputo derivative -------------------------------------------------------

def caputo_derivative_numeric(samples, alpha: float, t_index: int, h: float) -> float:
    """L1 product-integration Caputo derivative of a sampled scalar at node
    ``t_index`` on a uniform grid of step h.

    D^a y(t_n) ~ h^(-a)/Gamma(2-a) * sum_j c_j (y_{n-j} - y_{n-j-1}) with
    c_j = (j+1)^(1-a) - j^(1-a); exact for piecewise-linear y, order 2-a on
    smooth inputs.
    """
    y = np.asarray(samples, dtype=float)
    n = int(t_index)
    if n < 1:
        raise InsufficientHistory("Caputo derivative needs t_index >= 1")
    if n >= y.size:
        raise OutOfRange(f"t_index {n} beyond series of length {y.size}")
    c = _l1_weights(alpha, n)
    diffs = y[n - np.arange(n)] - y[n - 1 - np.arange(n)]
    return float(h ** (-alpha) / gamma_fn(2.0 - alpha) * (c @ diffs))


def _l1_weights(alpha: float, n: int) -> Array:
    j = np.arange(n, dtype=float)
    jp = j ** (1.0 - alpha)
    jp[0] = 0.0  # 0^0 must follow the alpha -> 1 limit, not numpy's 1
    return (j + 1.0) ** (1.0 - alpha) - jp


def caputo_l1_series(samples, alpha: float, h: float) -> Array:
    """L1 Caputo derivative at every node >= 1; index 0 is NaN."""
    y = np.asarray(samples, dtype=float)
    out = np.full(y.size, np.nan)
    pref = h ** (-alpha) / gamma_fn(2.0 - alpha)
    d = np.diff(y)  # d[i] = y[i+1] - y[i]
    c_full = _l1_weights(alpha, max(y.size - 1, 1))
    for n in range(1, y.size):
        out[n] = pref * float(c_full[:n] @ d[n - 1::-1])
    return out


# -- inequality checks -------------------------------------------------------------

@dataclass
class QuadraticLemmaReport:
    """Signed excess of the L1 derivative of x'Px over 2 x'P D^a x."""

    max_excess: float
    tolerance: float
    argmax_node: int
    excess: Array

    @property
    def passed(self) -> bool:
        return self.max_excess <= self.tolerance


def verify_quadratic_lemma(P: Array, traj: Trajectory, model: SystemModel,
                           slack_factor: float = 2.0) -> QuadraticLemmaReport:
    """Check D^a(x'Px) <= 2 x'P rhs numerically along a produced trajectory.

    The tolerance is slack_factor * h^alpha * max|2 x'P rhs|: the L1 scheme
    carries an O(1)-per-node error against the t^alpha startup layer whose
    magnitude scales with h^alpha and with the derivative scale.
    """
    P = np.asarray(P, dtype=float)
    n = model.dim
    xs = traj.states()[:, :n]
    F = traj.rhs_values()[:, :n]
    if F.shape[0] != xs.shape[0]:
        raise DimensionMismatch("trajectory lacks rhs values at every node")
    V = np.einsum("ki,ij,kj->k", xs, P, xs)
    rhs = 2.0 * np.einsum("ki,ij,kj->k", xs, P, F)
    dV = caputo_l1_series(V, model.alpha, traj.h)
    excess = dV[1:] - rhs[1:]
    worst = int(np.argmax(excess))
    scale = max(float(np.max(np.abs(rhs))), 1e-12)
    tol = slack_factor * traj.h ** model.alpha * scale
    return QuadraticLemmaReport(float(excess[worst]), tol, worst + 1, excess)


@dataclass
class SandwichReport:
    """Node-wise check of c1||x||^2 <= V <= c2 sup_window ||x||^2.

    Slacks are relative.  The tolerance 1e-6 covers the one-sided trapezoid
    bias of the V3 quadrature, visible where the upper bound is attained
    with equality (constant history at t = t0); real violations are orders
    of magnitude larger.
    """

    worst_lower_slack: float
    worst_upper_slack: float
    n_checked: int

    @property
    def passed(self) -> bool:
        return self.worst_lower_slack >= -1e-6 and self.worst_upper_slack >= -1e-6


def sandwich_check(weights: LkfWeights, alpha: float, traj: Trajectory,
                   tau_bar: Optional[float] = None, stride: int = 1,
                   n_outer: int = 200) -> SandwichReport:
    tb = traj.history.tau_bar if tau_bar is None else float(tau_bar)
    bounds = LkfBounds.from_weights(weights, tb, alpha)
    n = weights.P.shape[0]
    times = traj.times()[::stride]
    lo_slack = np.inf
    hi_slack = np.inf
    for t in times:
        v = eval_full(weights, alpha, traj, float(t), tb, n_outer)
        x = traj.lookup(float(t))[:n]
        lower = bounds.c1 * float(x @ x)
        # sup over the window, sampled on the grid plus the left endpoint
        sup = 0.0
        s = t
        while s > t - tb - 1e-12:
            sup = max(sup, float(np.linalg.norm(traj.lookup(max(s, t - tb))[:n])))
            s -= traj.h
        upper = bounds.c2 * sup ** 2
        scale = max(1.0, abs(v))
        lo_slack = min(lo_slack, (v - lower) / scale)
        hi_slack = min(hi_slack, (upper - v) / scale)
    return SandwichReport(float(lo_slack), float(hi_slack), len(times))
