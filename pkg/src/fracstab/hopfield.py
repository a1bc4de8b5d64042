"""Three-neuron fractional Hopfield benchmark with state-dependent delay.

Dynamics per neuron:

    D^a x_i = -c_i x_i + sum_j a_ij tanh(x_j) + sum_j w_ij tanh(x_j(t - tau(x))) + u_i,
    tau(x)  = tau_bar (1 - eta tanh(w' x)),

so the delay shrinks when the weighted activity w'x is positive and never
leaves (tau_bar (1 - eta), tau_bar (1 + eta)).  Default numbers give a
Hurwitz linearization and published Lipschitz constants L_f = 3.81,
L_g = 2.22, L_tau = 0.078, which the audit below tests as upper bounds by
random sampling rather than re-deriving.
"""

from __future__ import annotations

import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .control import Parameterization
from .errors import ConfigError, DimensionMismatch
from .fde import SystemConstants, SystemModel

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

Array = np.ndarray

_DEFAULT_C = (1.0, 1.2, 0.9)
_DEFAULT_A_INST = ((-2.0, 0.5, -0.3), (0.4, -1.8, 0.2), (-0.1, 0.3, -2.2))
_DEFAULT_W = ((1.5, -0.4, 0.2), (-0.3, 1.2, -0.5), (0.4, -0.2, 1.8))

# Published constants for the default weights; audited, not derived.
DEFAULT_L_F = 3.81
DEFAULT_L_G = 2.22
DEFAULT_L_TAU = 0.078


@dataclass
class HopfieldParams:
    """Benchmark parameters; defaults reproduce the reference configuration."""

    C: Array = field(default_factory=lambda: np.diag(_DEFAULT_C))
    A_inst: Array = field(default_factory=lambda: np.array(_DEFAULT_A_INST))
    W: Array = field(default_factory=lambda: np.array(_DEFAULT_W))
    tau_bar: float = 0.5
    eta: float = 0.3
    omega: Array = field(default_factory=lambda: np.array([0.3, 0.3, 0.3]))
    B: Array = field(default_factory=lambda: np.eye(3))
    alpha: float = 0.95
    L_f: float = DEFAULT_L_F
    L_g: float = DEFAULT_L_G
    L_tau: float = DEFAULT_L_TAU
    theta_safety: float = 1.5

    def __post_init__(self):
        self.C = np.atleast_2d(np.asarray(self.C, dtype=float))
        self.A_inst = np.atleast_2d(np.asarray(self.A_inst, dtype=float))
        self.W = np.atleast_2d(np.asarray(self.W, dtype=float))
        self.omega = np.asarray(self.omega, dtype=float)
        self.B = np.atleast_2d(np.asarray(self.B, dtype=float))
        n = self.C.shape[0]
        if not (self.A_inst.shape == self.W.shape == (n, n)):
            raise DimensionMismatch("C, A_inst, W must share one square shape")
        if self.omega.size != n:
            raise DimensionMismatch("omega must have one entry per neuron")
        if np.any(np.diag(self.C) <= 0.0) or np.count_nonzero(
                self.C - np.diag(np.diag(self.C))):
            raise DimensionMismatch("C must be diagonal with positive entries")
        if not (0.0 <= self.eta < 1.0):
            raise DimensionMismatch("eta must lie in [0, 1) to keep tau positive")
        if self.tau_bar < 0.0:
            raise DimensionMismatch("tau_bar must be non-negative")

    @property
    def n(self) -> int:
        return self.C.shape[0]


def delay_map(params: HopfieldParams):
    tb, eta, om = params.tau_bar, params.eta, params.omega

    def tau(x: Array) -> float:
        return tb * (1.0 - eta * np.tanh(float(om @ np.asarray(x)[:om.size])))

    return tau


def build(params: HopfieldParams) -> SystemModel:
    """System model f(x) = -Cx + A tanh(x), g(x) = W tanh(x), state delay."""
    C, A_inst, W = params.C, params.A_inst, params.W
    constants = SystemConstants(
        L_f=params.L_f, L_g=params.L_g, L_tau=params.L_tau,
        tau_bar=params.tau_bar,
        L_phi_f=1.0, L_phi_g=1.0)  # block-tanh regressors are 1-Lipschitz
    return SystemModel(
        alpha=params.alpha, dim=params.n,
        f=lambda x: -C @ x + A_inst @ np.tanh(x),
        g=lambda x: W @ np.tanh(x),
        tau=delay_map(params),
        B=params.B, constants=constants)


def linearize(params: HopfieldParams) -> Array:
    """Linearized matrix at the origin: -C + A_inst + W."""
    return -params.C + params.A_inst + params.W


def parameterize(params: HopfieldParams) -> Parameterization:
    """Linear parameterization with A = -C known and row-major theta layout.

    Phi_f(x) = I kron tanh(x)', so Phi_f(x) theta reproduces A_inst tanh(x)
    exactly when theta is the row-major vectorization of A_inst; same for
    the delayed block.  Bounds carry the configured safety factor over the
    true norms.
    """
    n = params.n
    eye = np.eye(n)

    def phi(x: Array) -> Array:
        return np.kron(eye, np.tanh(np.asarray(x, dtype=float))[None, :])

    theta_f = params.A_inst.ravel()
    theta_g = params.W.ravel()
    return Parameterization(
        A=-params.C, phi_f=phi, phi_g=phi,
        theta_f_true=theta_f, theta_g_true=theta_g,
        theta_f_bound=params.theta_safety * float(np.linalg.norm(theta_f)),
        theta_g_bound=params.theta_safety * float(np.linalg.norm(theta_g)))


@dataclass
class LipschitzAudit:
    """Empirical ratio maxima over random pairs, tested against the
    published constants as upper bounds."""

    max_ratio_f: float
    max_ratio_g: float
    max_ratio_tau: float
    n_pairs: int
    seed: int

    def within(self, params: HopfieldParams) -> bool:
        return (self.max_ratio_f <= params.L_f
                and self.max_ratio_g <= params.L_g
                and self.max_ratio_tau <= params.L_tau)


def lipschitz_audit(params: HopfieldParams, n_pairs: int = 10_000,
                    radius: float = 2.0, seed: int = 20240817) -> LipschitzAudit:
    model = build(params)
    tau = delay_map(params)
    rng = np.random.default_rng(seed)
    xs = rng.uniform(-radius, radius, size=(n_pairs, params.n))
    ys = rng.uniform(-radius, radius, size=(n_pairs, params.n))
    rf = rg = rt = 0.0
    for x, y in zip(xs, ys):
        d = float(np.linalg.norm(x - y))
        if d < 1e-12:
            continue
        rf = max(rf, float(np.linalg.norm(model.f(x) - model.f(y))) / d)
        rg = max(rg, float(np.linalg.norm(model.g(x) - model.g(y))) / d)
        rt = max(rt, abs(tau(x) - tau(y)) / d)
    return LipschitzAudit(rf, rg, rt, n_pairs, seed)


# -- TOML configuration -----------------------------------------------------------

def params_from_dict(cfg: dict) -> HopfieldParams:
    w = cfg.get("weights", {})
    d = cfg.get("delay", {})
    s = cfg.get("simulation", {})
    kwargs = {}
    if "c" in w:
        kwargs["C"] = np.diag(np.asarray(w["c"], dtype=float))
    for src, dst in (("a_inst", "A_inst"), ("w", "W"), ("b", "B")):
        if src in w:
            kwargs[dst] = np.asarray(w[src], dtype=float)
    for src, dst in (("lf", "L_f"), ("lg", "L_g"), ("ltau", "L_tau")):
        if src in w:
            kwargs[dst] = float(w[src])
    if "tau_bar" in d:
        kwargs["tau_bar"] = float(d["tau_bar"])
    if "eta" in d:
        kwargs["eta"] = float(d["eta"])
    if "omega" in d:
        kwargs["omega"] = np.asarray(d["omega"], dtype=float)
    if "alpha" in s:
        kwargs["alpha"] = float(s["alpha"])
    ctrl = cfg.get("controller", {})
    if "theta_safety" in ctrl:
        kwargs["theta_safety"] = float(ctrl["theta_safety"])
    try:
        return HopfieldParams(**kwargs)
    except DimensionMismatch as exc:
        raise ConfigError(str(exc)) from exc


def load_config(path) -> dict:
    """Raw TOML config (sections weights/delay/simulation/controller)."""
    p = Path(path)
    if not p.exists():
        raise ConfigError(f"config file not found: {p}")
    try:
        with open(p, "rb") as fh:
            return tomllib.load(fh)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"bad TOML in {p}: {exc}") from exc


def params_from_toml(path) -> HopfieldParams:
    return params_from_dict(load_config(path))
