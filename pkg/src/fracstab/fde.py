"""Adams-Bashforth-Moulton integration of Caputo fractional systems with
state-dependent delay lookups.

The solver works on the Volterra form of the initial value problem

    x(t) = x0 + (1/Gamma(a)) * integral_0^t (t-s)^(a-1) F(s, x(s)) ds,

discretised on a uniform grid with the classical fractional predictor-
corrector: product-rectangle weights for the predictor, product-trapezoid
weights for the corrector.  The full history sum is recomputed at every
step (no short-memory shortcut), which is what makes recomputation of any
node from a stored prefix bit-for-bit identical to the incremental run.

Delay handling: the retarded argument t - tau(x(t)) is resolved against the
stored trajectory by piecewise-linear interpolation, falling back to the
initial function for arguments left of t0.  When a lookup lands inside the
step currently being computed, the provisional (predictor, then corrected)
value of the right endpoint is used, so the scheme stays explicit within
each corrector sweep.  Interpolation stays linear on purpose: solutions are
only Holder continuous of order alpha, so higher-order interpolation would
assume smoothness the solution does not have.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional, Protocol

import numpy as np

from .errors import DimensionMismatch, NumericalBlowup, OutOfRange
from .specfun import gamma_fn

Array = np.ndarray
_NODE_SNAP = 1e-9  # fraction of h within which t counts as a grid node


def _floor(x: float) -> int:
    n = int(x)
    return n - 1 if x < n else n


@dataclass
class InitialFunction:
    """Initial history phi on [-tau_bar, 0], with a bound on ||phi'||_inf."""

    tau_bar: float
    phi: Callable[[float], Array]
    phi_derivative_bound: float = 0.0

    def __post_init__(self):
        if self.tau_bar < 0.0:
            raise DimensionMismatch("tau_bar must be >= 0")

    @staticmethod
    def constant(x0, tau_bar: float) -> "InitialFunction":
        x0 = np.asarray(x0, dtype=float)
        return InitialFunction(tau_bar, lambda theta, v=x0: v.copy(), 0.0)

    def __call__(self, theta: float) -> Array:
        return np.asarray(self.phi(theta), dtype=float)


@dataclass
class SystemConstants:
    """Lipschitz metadata: spot-checkable by finite sampling, not derived here."""

    L_f: float
    L_g: float
    L_tau: float
    tau_bar: float
    L_phi_f: float = 0.0
    L_phi_g: float = 0.0

    def __post_init__(self):
        for name in ("L_f", "L_g", "L_tau", "tau_bar", "L_phi_f", "L_phi_g"):
            if getattr(self, name) < 0.0:
                raise DimensionMismatch(f"{name} must be non-negative")


@dataclass
class SystemModel:
    """Caputo system D^a x = f(x) + g(x(t - tau(x))) + B u with a in (0, 1].

    f and g must vanish at the origin and tau must map into [0, tau_bar];
    these are assumptions on the user-supplied callables, audited by tests
    rather than enforced per call.
    """

    alpha: float
    dim: int
    f: Callable[[Array], Array]
    g: Callable[[Array], Array]
    tau: Callable[[Array], float]
    B: Array
    constants: SystemConstants

    def __post_init__(self):
        self.B = np.atleast_2d(np.asarray(self.B, dtype=float))
        if not (0.0 < self.alpha <= 1.0):
            raise DimensionMismatch(f"alpha must lie in (0, 1], got {self.alpha}")
        if self.B.shape[0] != self.dim:
            raise DimensionMismatch(
                f"B has {self.B.shape[0]} rows, expected dim={self.dim}")

    @property
    def input_dim(self) -> int:
        return self.B.shape[1]


@dataclass
class SolverConfig:
    """Uniform-grid solve settings; h defaults to the benchmark step 0.05 s.

    corrector_iterations = 1 is the classical PECE scheme; more sweeps
    re-evaluate the corrector at the updated endpoint (capped at 5, beyond
    which the fixed point has long converged at any sane step size).
    """

    t_end: float
    h: float = 0.05
    t0: float = 0.0
    corrector_iterations: int = 1
    blowup_guard: float = 1e6

    def __post_init__(self):
        if self.h <= 0.0:
            raise DimensionMismatch("h must be positive")
        if self.t_end <= self.t0:
            raise DimensionMismatch("t_end must exceed t0")
        if not (1 <= self.corrector_iterations <= 5):
            raise DimensionMismatch("corrector_iterations must be in 1..5")


class Trajectory:
    """Grid samples plus initial history, with interpolated lookup.

    ``lookup`` is defined on [t0 - tau_bar, t_latest]: exact node values on
    the grid, piecewise-linear in between, delegating to the history for
    arguments at or left of t0 (so lookup(t0) == phi(0) and the seam is
    continuous).  During a step the integrator can expose a provisional
    right-endpoint value, extending the lookup domain to the node being
    computed.
    """

    def __init__(self, t0: float, h: float, history: InitialFunction,
                 x0: Optional[Array] = None):
        self.t0 = float(t0)
        self.h = float(h)
        self.history = history
        first = np.asarray(x0, dtype=float) if x0 is not None else history(0.0)
        self.dim = first.size
        self._states = [first.copy()]
        self._rhs: list[Array] = []
        self.series: dict[str, list] = {}
        self._prov: Optional[Array] = None
        self._limit: Optional[int] = None  # node-count cap for replay views
        self.meta: dict = {}

    # -- committed data ----------------------------------------------------

    @property
    def n_nodes(self) -> int:
        return len(self._states)

    @property
    def t_latest(self) -> float:
        return self.t0 + (self.n_nodes - 1) * self.h

    def times(self) -> Array:
        return self.t0 + self.h * np.arange(self.n_nodes)

    def states(self) -> Array:
        return np.array(self._states)

    def state(self, k: int) -> Array:
        return self._states[k]

    def rhs_values(self) -> Array:
        return np.array(self._rhs)

    def append(self, x: Array, rhs: Array) -> None:
        self._states.append(np.asarray(x, dtype=float).copy())
        self._rhs.append(np.asarray(rhs, dtype=float).copy())

    def set_initial_rhs(self, rhs: Array) -> None:
        if self._rhs:
            raise DimensionMismatch("initial rhs already set")
        self._rhs.insert(0, np.asarray(rhs, dtype=float).copy())

    # -- provisional value for in-step delay lookups ------------------------

    def set_provisional(self, x: Array) -> None:
        self._prov = np.asarray(x, dtype=float)

    def clear_provisional(self) -> None:
        self._prov = None

    # -- lookup --------------------------------------------------------------

    def lookup(self, t: float) -> Array:
        tol = _NODE_SNAP * self.h
        if t <= self.t0 + tol:
            theta = t - self.t0
            if theta < -self.history.tau_bar - tol:
                raise OutOfRange(
                    f"t={t} precedes the history window "
                    f"[{self.t0 - self.history.tau_bar}, {self.t0}]")
            if theta >= -tol:
                return self._states[0].copy()
            return self.history(max(theta, -self.history.tau_bar))
        pos = (t - self.t0) / self.h
        k = _floor(pos)
        frac = pos - k
        if frac > 1.0 - _NODE_SNAP:
            k += 1
            frac = 0.0
        elif frac < _NODE_SNAP:
            frac = 0.0
        visible = self._limit if self._limit is not None else self.n_nodes
        last = visible - 1 + (1 if self._prov is not None else 0)
        if k > last or (k == last and frac > 0.0):
            raise OutOfRange(f"t={t} beyond latest available node t={self.t0 + last * self.h}")
        left = self._node_value(k, visible)
        if frac == 0.0:
            return left.copy()
        right = self._node_value(k + 1, visible)
        return left + frac * (right - left)

    def _node_value(self, k: int, visible: int) -> Array:
        if k < visible:
            return self._states[k]
        assert self._prov is not None
        return self._prov


def lookup(traj: Trajectory, t: float) -> Array:
    """Module-level alias of :meth:`Trajectory.lookup`."""
    return traj.lookup(t)


# -- controllers --------------------------------------------------------------

class LockstepController(Protocol):
    """Controller whose internal state advances in lockstep with the solver.

    ``extra_dim`` fractional components (parameter estimates) are appended to
    the plant state and integrated by the same ABM scheme; any integer-order
    internals (filters) advance inside ``on_commit``, which runs once per
    committed node and may precompute whatever the next step's control
    evaluations need.
    """

    extra_dim: int

    def initial_extra(self) -> Array: ...

    def control(self, t: float, x_aug: Array, traj: Trajectory) -> Array: ...

    def extra_rhs(self, t: float, x_aug: Array, traj: Trajectory,
                  u: Array) -> Array: ...

    def on_commit(self, k: int, t: float, x_aug: Array, traj: Trajectory) -> None: ...


class _SimpleControl:
    """Adapts None / constant vector / callable u(t, x) to the controller protocol."""

    extra_dim = 0

    def __init__(self, u, m: int):
        self.m = m
        if u is None:
            self._fn = lambda t, x: np.zeros(m)
        elif callable(u):
            self._fn = u
        else:
            vec = np.asarray(u, dtype=float)
            self._fn = lambda t, x: vec

    def initial_extra(self) -> Array:
        return np.zeros(0)

    def control(self, t, x_aug, traj):
        return np.asarray(self._fn(t, x_aug), dtype=float)

    def extra_rhs(self, t, x_aug, traj, u):
        return np.zeros(0)

    def on_commit(self, k, t, x_aug, traj):
        pass


def _as_controller(u, model: SystemModel):
    # Duck-typed: anything exposing the lockstep interface is used as-is;
    # None, vectors and plain callables get the simple adapter.
    if hasattr(u, "extra_dim") and hasattr(u, "extra_rhs"):
        return u
    return _SimpleControl(u, model.input_dim)


# -- ABM core ------------------------------------------------------------------

def _predictor_weights(alpha: float, k: int, h: float) -> Array:
    # b_{j,k+1} = (h^a / a) ((k+1-j)^a - (k-j)^a), j = 0..k
    i = np.arange(k + 1, 0, -1, dtype=float)  # k+1-j for j=0..k
    return (h ** alpha / alpha) * (i ** alpha - (i - 1.0) ** alpha)


def _corrector_weights(alpha: float, k: int) -> Array:
    # a_{0,k+1} = k^(a+1) - (k-a)(k+1)^a
    # a_{j,k+1} = (k-j+2)^(a+1) + (k-j)^(a+1) - 2(k-j+1)^(a+1), 1 <= j <= k
    ap1 = alpha + 1.0
    w = np.empty(k + 1)
    w[0] = k ** ap1 - (k - alpha) * (k + 1.0) ** alpha
    if k >= 1:
        m = np.arange(k - 1, -1, -1, dtype=float)  # k-j for j=1..k
        w[1:] = (m + 2.0) ** ap1 + m ** ap1 - 2.0 * (m + 1.0) ** ap1
    return w


def _rhs_factory(model: SystemModel, controller) -> Callable:
    n = model.dim
    B = model.B

    def rhs(t: float, x_aug: Array, traj: Trajectory) -> tuple[Array, Array, float]:
        x = x_aug[:n]
        tau_now = float(model.tau(x))
        x_del = traj.lookup(t - tau_now)[:n]
        u = controller.control(t, x_aug, traj)
        dx = model.f(x) + model.g(x_del) + B @ u
        extra = controller.extra_rhs(t, x_aug, traj, u)
        if controller.extra_dim:
            return np.concatenate([dx, extra]), u, tau_now
        return dx, u, tau_now

    return rhs


def _step_core(rhs, traj: Trajectory, k: int, alpha: float, h: float,
               corrector_iterations: int, x0_aug: Array):
    """Compute node k+1 from the committed prefix 0..k.  Pure: no commit."""
    t_next = traj.t0 + (k + 1) * h
    F_all = traj.rhs_values()  # committed right-hand sides
    if F_all.shape[0] < k + 1:
        raise DimensionMismatch(
            f"trajectory holds {F_all.shape[0]} rhs values, step k={k} needs {k + 1}")
    F_hist = F_all[:k + 1]
    bw = _predictor_weights(alpha, k, h)
    pred = x0_aug + (bw @ F_hist) / gamma_fn(alpha)
    aw = _corrector_weights(alpha, k)
    hist_corr = aw @ F_hist
    scale = h ** alpha / gamma_fn(alpha + 2.0)
    cur = pred
    for _ in range(corrector_iterations):
        traj.set_provisional(cur)
        f_new, _, _ = rhs(t_next, cur, traj)
        cur = x0_aug + scale * (f_new + hist_corr)
    traj.set_provisional(cur)
    f_fin, u_fin, tau_fin = rhs(t_next, cur, traj)
    traj.clear_provisional()
    return cur, f_fin, u_fin, tau_fin


def abm_step(model: SystemModel, traj: Trajectory, u, k: int,
             corrector_iterations: int = 1) -> Array:
    """Recompute node k+1 of ``traj`` from its committed prefix.

    Runs exactly the arithmetic of the incremental solve (same weights, same
    summation order), so the result is bit-for-bit the stored node when the
    trajectory came from :func:`integrate` with the same control provider.
    Does not commit anything.
    """
    controller = _as_controller(u, model)
    rhs = _rhs_factory(model, controller)
    x0_aug = traj.state(0)
    saved = traj._limit
    traj._limit = k + 1  # replay view: nodes 0..k plus the provisional slot
    try:
        x_next, _, _, _ = _step_core(rhs, traj, k, model.alpha, traj.h,
                                     corrector_iterations, x0_aug)
    finally:
        traj._limit = saved
    return x_next


def integrate(model: SystemModel, init: InitialFunction, cfg: SolverConfig,
              controller=None) -> Trajectory:
    """Integrate the system on [t0, t_end]; returns the full trajectory.

    The trajectory records the right-hand side at every committed node (the
    final evaluation of each PECE step) plus per-node series ``u`` and
    ``tau``.  A supplied controller advances in lockstep: its fractional
    components ride in the augmented state, its integer-order internals are
    updated once per committed node.
    """
    probe = init(0.0)
    if probe.size != model.dim:
        raise DimensionMismatch(
            f"history returns dim {probe.size}, model has dim {model.dim}")
    ctrl = _as_controller(controller, model)
    extra0 = np.asarray(ctrl.initial_extra(), dtype=float)

    if ctrl.extra_dim:
        base_phi = init.phi

        def aug_phi(theta, e0=extra0):
            return np.concatenate([np.asarray(base_phi(theta), dtype=float), e0])

        history = InitialFunction(init.tau_bar, aug_phi, init.phi_derivative_bound)
    else:
        history = init

    traj = Trajectory(cfg.t0, cfg.h, history)
    traj.meta.update(alpha=model.alpha, plant_dim=model.dim, h=cfg.h,
                     t0=cfg.t0, t_end=cfg.t_end)
    traj.series["u"] = []
    traj.series["tau"] = []

    rhs = _rhs_factory(model, ctrl)
    x0_aug = traj.state(0)
    f0, u0, tau0 = rhs(cfg.t0, x0_aug, traj)
    traj.set_initial_rhs(f0)
    traj.series["u"].append(np.asarray(u0, dtype=float).copy())
    traj.series["tau"].append(tau0)
    ctrl.on_commit(0, cfg.t0, x0_aug, traj)

    n_steps = int(round((cfg.t_end - cfg.t0) / cfg.h))
    for k in range(n_steps):
        x_next, f_next, u_next, tau_next = _step_core(
            rhs, traj, k, model.alpha, cfg.h, cfg.corrector_iterations, x0_aug)
        norm = float(np.linalg.norm(x_next))
        t_next = cfg.t0 + (k + 1) * cfg.h
        if not np.isfinite(norm) or norm > cfg.blowup_guard:
            raise NumericalBlowup(
                f"state norm {norm:.3e} exceeded guard {cfg.blowup_guard:.1e} "
                f"at t={t_next}", t=t_next, norm=norm)
        traj.append(x_next, f_next)
        traj.series["u"].append(np.asarray(u_next, dtype=float).copy())
        traj.series["tau"].append(tau_next)
        ctrl.on_commit(k + 1, t_next, x_next, traj)
    return traj


# -- Holder regularity ---------------------------------------------------------

def holder_constant(model: SystemModel, traj: Trajectory) -> float:
    """M_D / Gamma(alpha+1) with M_D = (L_f + L_g) M_x + ||B|| M_u.

    M_x is the largest state norm observed along the run (history endpoint
    included) and M_u the largest recorded control norm.
    """
    n = model.dim
    states = traj.states()[:, :n]
    M_x = float(np.max(np.linalg.norm(states, axis=1)))
    u_series = traj.series.get("u") or []
    M_u = max((float(np.linalg.norm(u)) for u in u_series), default=0.0)
    c = model.constants
    M_D = (c.L_f + c.L_g) * M_x + float(np.linalg.norm(model.B, 2)) * M_u
    return M_D / gamma_fn(model.alpha + 1.0)


@dataclass
class HolderAudit:
    """Exhaustive grid-pair check of the Holder bound."""

    bound: float
    worst_quotient: float
    worst_pair: tuple[float, float]

    @property
    def satisfied(self) -> bool:
        return self.worst_quotient <= self.bound * (1.0 + 1e-9) + 1e-12


def holder_audit(model: SystemModel, traj: Trajectory) -> HolderAudit:
    """Check ||x(t)-x(s)|| <= C |t-s|^alpha over every grid pair."""
    bound = holder_constant(model, traj)
    n = model.dim
    states = traj.states()[:, :n]
    times = traj.times()
    worst = 0.0
    worst_pair = (times[0], times[0])
    for i in range(len(times) - 1):
        d = np.linalg.norm(states[i + 1:] - states[i], axis=1)
        gaps = (times[i + 1:] - times[i]) ** model.alpha
        q = d / gaps
        j = int(np.argmax(q))
        if q[j] > worst:
            worst = float(q[j])
            worst_pair = (float(times[i]), float(times[i + 1 + j]))
    return HolderAudit(bound, worst, worst_pair)


# -- serialization ---------------------------------------------------------------

def write_csv(traj: Trajectory, path, model: Optional[SystemModel] = None) -> None:
    """Trajectory CSV: commented header, then t, x1..xn, u1..um, tau rows."""
    n = traj.meta.get("plant_dim", traj.dim)
    u_series = traj.series.get("u") or []
    m = len(u_series[0]) if u_series else (model.input_dim if model else 0)
    tau_series = traj.series.get("tau") or []
    cols = (["t [s]"] + [f"x{i + 1} [-]" for i in range(n)]
            + [f"u{i + 1} [-]" for i in range(m)] + ["tau [s]"])
    times = traj.times()
    states = traj.states()
    lines = ["# " + ",".join(cols)]
    for k, t in enumerate(times):
        row = [_fmt(t)]
        row += [_fmt(v) for v in states[k, :n]]
        if u_series:
            row += [_fmt(v) for v in u_series[k]]
        else:
            row += [_fmt(0.0)] * m
        row.append(_fmt(tau_series[k]) if tau_series else _fmt(float("nan")))
        lines.append(",".join(row))
    text = "\n".join(lines) + "\n"
    if hasattr(path, "write"):
        path.write(text)
    else:
        with open(path, "w") as fh:
            fh.write(text)


def _fmt(v: float) -> str:
    return f"{float(v):.12g}"
