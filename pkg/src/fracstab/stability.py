"""Stability certificates for Caputo delay systems via a dense LMI.

The certified condition is negativity of the block matrix

    Omega = [[Omega11, P], [P, -eps3 I]],
    Omega11 = PA + A'P + tb Q + (tb^a / a) R + (eps1 + eps2) P^2
              + (L_f^2/eps1 + L_g^2/eps2) I,

over P, Q, R > 0 and eps1..3 > 0, together with the absorption side
condition L_g^2/eps2 < tb lambda_min(Q), which the derivation needs even
though the matrix inequality alone does not encode it.  The decay rate
gamma = -lambda_max(Omega11 + P^2/eps3) is maximized under the
normalization lambda_max(P) <= 1, without which gamma scales freely.

Although Omega11 is quadratic in P, a Schur embedding with the reciprocal
substitutions mu_i = 1/eps_i is exactly affine:

    Omega_ext = [[ L(P,Q,R) + (L_f^2 mu1 + L_g^2 mu2 + gamma) I,  P,  P,  P ],
                 [ P, -eps3 I, 0, 0 ],
                 [ P, 0, -mu1 I, 0 ],
                 [ P, 0, 0, -mu2 I ]] < 0
    <=>  Omega + diag(gamma I, 0) < 0,

so the bespoke barrier solver in ``sdp`` applies directly, and every
certificate is re-checked afterwards by plain eigenvalue computations with
no reference to solver state.

Feasibility preflight: testing Omega11 with the eigenvector of
lambda_min(P) and AM-GM on the eps terms gives

    v' Omega11 v >= 2 lambda_min(P) (lambda_min(sym A) + L_f + L_g),

so whenever lambda_min(sym A) + L_f + L_g >= 0 the inequality is
infeasible for every admissible point; the solver reports that analytic
obstruction instead of burning iterations.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import sdp
from .errors import DimensionMismatch, Infeasible, NotApplicable
from .fde import SystemConstants
from .lkf import LkfBounds, LkfWeights
from .specfun import ml

Array = np.ndarray


@dataclass
class LmiProblem:
    """Problem data: linearization matrix, Lipschitz constants, order, delay bound."""

    A: Array
    constants: SystemConstants
    alpha: float
    tau_bar: float

    def __post_init__(self):
        self.A = np.atleast_2d(np.asarray(self.A, dtype=float))
        if self.A.shape[0] != self.A.shape[1]:
            raise DimensionMismatch("A must be square")
        if not np.all(np.isfinite(self.A)):
            raise DimensionMismatch("A must be finite")
        if self.tau_bar <= 0.0:
            raise DimensionMismatch("tau_bar must be positive")
        if not (0.0 < self.alpha <= 1.0):
            raise DimensionMismatch("alpha must lie in (0, 1]")

    @property
    def n(self) -> int:
        return self.A.shape[0]


@dataclass
class LmiCertificate:
    """Feasible point with its derived margins, all re-checkable by eigenvalues."""

    weights: LkfWeights
    eps1: float
    eps2: float
    eps3: float
    gamma: float
    delta: float
    delay_margin: float
    bounds: LkfBounds
    normalization: float  # lambda_max(P) at the solution; scale pin for gamma


@dataclass
class CertificateCheck:
    """Independent re-check of a certificate (no solver state involved)."""

    omega_max_eig: float
    min_eig_P: float
    min_eig_Q: float
    min_eig_R: float
    side_margin: float  # tb lambda_min(Q) - L_g^2/eps2, must be > 0
    gamma_recomputed: float
    delta_recomputed: float

    @property
    def passed(self) -> bool:
        return (self.omega_max_eig <= -1e-9
                and self.min_eig_P > 0.0 and self.min_eig_Q > 0.0
                and self.min_eig_R > 0.0 and self.side_margin > 0.0
                and self.gamma_recomputed > 0.0)


def omega11(prob: LmiProblem, P: Array, Q: Array, R: Array,
            eps1: float, eps2: float) -> Array:
    A, tb, a = prob.A, prob.tau_bar, prob.alpha
    c = prob.constants
    n = prob.n
    return (P @ A + A.T @ P + tb * Q + tb ** a / a * R
            + (eps1 + eps2) * (P @ P)
            + (c.L_f ** 2 / eps1 + c.L_g ** 2 / eps2) * np.eye(n))


def assemble_omega(prob: LmiProblem, P: Array, Q: Array, R: Array, eps) -> Array:
    """The 2n x 2n block matrix [[Omega11, P], [P, -eps3 I]]."""
    P = np.asarray(P, dtype=float)
    Q = np.asarray(Q, dtype=float)
    R = np.asarray(R, dtype=float)
    eps1, eps2, eps3 = (float(e) for e in eps)
    if min(eps1, eps2, eps3) <= 0.0:
        raise DimensionMismatch("eps components must be positive")
    n = prob.n
    for M, name in ((P, "P"), (Q, "Q"), (R, "R")):
        if M.shape != (n, n):
            raise DimensionMismatch(f"{name} must be {n}x{n}")
    top = omega11(prob, P, Q, R, eps1, eps2)
    out = np.zeros((2 * n, 2 * n))
    out[:n, :n] = top
    out[:n, n:] = P
    out[n:, :n] = P
    out[n:, n:] = -eps3 * np.eye(n)
    return out


# -- decision-vector packing -----------------------------------------------------

def _tri_indices(n: int):
    return np.tril_indices(n)


def _unpack(v: Array, n: int):
    m = n * (n + 1) // 2
    idx = _tri_indices(n)

    def sym(entries):
        M = np.zeros((n, n))
        M[idx] = entries
        return M + M.T - np.diag(np.diag(M))

    P = sym(v[0:m])
    Q = sym(v[m:2 * m])
    R = sym(v[2 * m:3 * m])
    mu1, mu2, eps3 = v[3 * m], v[3 * m + 1], v[3 * m + 2]
    return P, Q, R, mu1, mu2, eps3


def _nvar(n: int) -> int:
    return 3 * (n * (n + 1) // 2) + 3


def _block_factory(prob: LmiProblem, scalar_cap: float):
    A, tb, a = prob.A, prob.tau_bar, prob.alpha
    c = prob.constants
    n = prob.n
    eye = np.eye(n)

    def factory(gamma: float):
        def big(v):
            P, Q, R, mu1, mu2, eps3 = _unpack(v, n)
            L = P @ A + A.T @ P + tb * Q + tb ** a / a * R
            top = L + (c.L_f ** 2 * mu1 + c.L_g ** 2 * mu2 + gamma) * eye
            M = np.zeros((4 * n, 4 * n))
            M[:n, :n] = top
            M[:n, n:2 * n] = P
            M[n:2 * n, :n] = P
            M[:n, 2 * n:3 * n] = P
            M[2 * n:3 * n, :n] = P
            M[:n, 3 * n:] = P
            M[3 * n:, :n] = P
            M[n:2 * n, n:2 * n] = -eps3 * eye
            M[2 * n:3 * n, 2 * n:3 * n] = -mu1 * eye
            M[3 * n:, 3 * n:] = -mu2 * eye
            return -M

        def posP(v):
            return _unpack(v, n)[0]

        def posQ(v):
            return _unpack(v, n)[1]

        def posR(v):
            return _unpack(v, n)[2]

        def norm_cap(v):
            return eye - _unpack(v, n)[0]

        def side(v):
            _, Q, _, _, mu2, _ = _unpack(v, n)
            return tb * Q - c.L_g ** 2 * mu2 * eye

        def mu1_pos(v):
            return np.array([[_unpack(v, n)[3]]])

        def mu2_pos(v):
            return np.array([[_unpack(v, n)[4]]])

        def eps3_pos(v):
            return np.array([[_unpack(v, n)[5]]])

        def mu1_cap(v):
            return np.array([[scalar_cap - _unpack(v, n)[3]]])

        def mu2_cap(v):
            return np.array([[scalar_cap - _unpack(v, n)[4]]])

        def eps3_cap(v):
            return np.array([[scalar_cap - _unpack(v, n)[5]]])

        return [big, posP, posQ, posR, norm_cap, side,
                mu1_pos, mu2_pos, eps3_pos, mu1_cap, mu2_cap, eps3_cap]

    return factory


def infeasibility_obstruction(prob: LmiProblem) -> Optional[str]:
    """Analytic necessary-condition check; a message means provably infeasible.

    For any admissible P > 0, the lambda_min(P) eigenvector v gives
    v' Omega11 v >= 2 lambda_min(P) (lambda_min(sym A) + L_f + L_g) by AM-GM
    on the eps terms, so a non-negative bracket rules out every point.
    """
    sym_min = float(np.linalg.eigvalsh(0.5 * (prob.A + prob.A.T))[0])
    margin = sym_min + prob.constants.L_f + prob.constants.L_g
    if margin >= 0.0:
        return (f"provably infeasible: lambda_min(sym A) + L_f + L_g = "
                f"{sym_min:.4f} + {prob.constants.L_f} + {prob.constants.L_g} "
                f"= {margin:.4f} >= 0, so v'Omega11 v > 0 along the "
                f"lambda_min(P) eigenvector for every admissible P, Q, R, eps")
    return None


def solve_lmi(prob: LmiProblem, *, gamma_tol: float = 1e-4,
              scalar_cap: float = 1e4) -> LmiCertificate:
    """Certificate maximizing gamma, or ``Infeasible`` with diagnostics.

    Bisection over the shifted feasibility family Omega + diag(gamma I, 0) < 0
    (monotone in gamma), phase-I barrier per level, analytic centering at the
    best level, then an independent eigenvalue re-check.
    """
    factory = _block_factory(prob, scalar_cap)
    nvar = _nvar(prob.n)
    obstruction = infeasibility_obstruction(prob)
    res = sdp.maximize_parameter(factory, nvar, tol=gamma_tol)
    if not res.feasible_at_zero or obstruction is not None:
        P, Q, R, mu1, mu2, eps3 = _unpack(res.x, prob.n)
        # Diagnostic only: clamp the point into the admissible orthant so a
        # concrete lambda_max(Omega) is always attached to the report.
        floor = 1e-9
        eigP = np.linalg.eigvalsh(0.5 * (P + P.T))[0]
        if eigP <= floor:
            P = P + (floor - eigP) * np.eye(prob.n)
        Q = _clamp_pd(Q, floor)
        R = _clamp_pd(R, floor)
        omega = assemble_omega(prob, P, Q, R,
                               (1.0 / max(mu1, floor), 1.0 / max(mu2, floor),
                                max(eps3, floor)))
        best = float(np.linalg.eigvalsh(omega)[-1])
        msg = obstruction or (
            f"no feasible point found; best attained lambda_max(Omega) = {best:.4e}")
        raise Infeasible(msg, best_lambda_max=best,
                         provable=obstruction is not None)
    cert = _certificate_from_point(prob, res.x)
    check = verify_certificate(prob, cert)
    if not check.passed:
        raise Infeasible(
            f"solver point failed the independent re-check: {check}",
            best_lambda_max=check.omega_max_eig)
    return cert


def _clamp_pd(M: Array, floor: float) -> Array:
    M = 0.5 * (M + M.T)
    lo = float(np.linalg.eigvalsh(M)[0])
    if lo <= floor:
        M = M + (floor - lo) * np.eye(M.shape[0])
    return M


def _certificate_from_point(prob: LmiProblem, x: Array) -> LmiCertificate:
    P, Q, R, mu1, mu2, eps3 = _unpack(x, prob.n)
    eps1, eps2 = 1.0 / mu1, 1.0 / mu2
    weights = LkfWeights(P, Q, R)
    omega = assemble_omega(prob, P, Q, R, (eps1, eps2, eps3))
    delta = float(-np.linalg.eigvalsh(omega)[-1])
    gamma = float(-np.linalg.eigvalsh(
        omega11(prob, P, Q, R, eps1, eps2) + P @ P / eps3)[-1])
    bounds = LkfBounds.from_weights(weights, prob.tau_bar, prob.alpha)
    qmax = float(np.linalg.eigvalsh(Q)[-1])
    rmax = float(np.linalg.eigvalsh(R)[-1])
    margin = delta / (qmax + prob.tau_bar ** (prob.alpha - 1.0) * rmax)
    return LmiCertificate(weights=weights, eps1=eps1, eps2=eps2, eps3=float(eps3),
                          gamma=gamma, delta=delta, delay_margin=margin,
                          bounds=bounds,
                          normalization=float(np.linalg.eigvalsh(P)[-1]))


def verify_certificate(prob: LmiProblem, cert: LmiCertificate) -> CertificateCheck:
    """Eigenvalue-only re-check of every certified inequality."""
    P, Q, R = cert.weights.P, cert.weights.Q, cert.weights.R
    omega = assemble_omega(prob, P, Q, R, (cert.eps1, cert.eps2, cert.eps3))
    omega_max = float(np.linalg.eigvalsh(omega)[-1])
    gam = float(-np.linalg.eigvalsh(
        omega11(prob, P, Q, R, cert.eps1, cert.eps2) + P @ P / cert.eps3)[-1])
    side = (prob.tau_bar * float(np.linalg.eigvalsh(Q)[0])
            - prob.constants.L_g ** 2 / cert.eps2)
    return CertificateCheck(
        omega_max_eig=omega_max,
        min_eig_P=float(np.linalg.eigvalsh(P)[0]),
        min_eig_Q=float(np.linalg.eigvalsh(Q)[0]),
        min_eig_R=float(np.linalg.eigvalsh(R)[0]),
        side_margin=float(side),
        gamma_recomputed=gam,
        delta_recomputed=float(-np.linalg.eigvalsh(omega)[-1]),
    )


def ml_bound(cert: LmiCertificate, phi_norm: float, alpha: float, t: float,
             t0: float = 0.0) -> float:
    """Decay envelope sqrt(c2/c1) ||phi|| [E_a(-(gamma/c2)(t-t0)^a)]^(1/2)."""
    if phi_norm == 0.0:
        return 0.0
    c1, c2 = cert.bounds.c1, cert.bounds.c2
    dt = max(t - t0, 0.0)
    arg = -(cert.gamma / c2) * dt ** alpha
    e = ml(alpha, arg)
    return float(np.sqrt(c2 / c1) * phi_norm * np.sqrt(max(e, 0.0)))


def delay_margin(cert: LmiCertificate, tau_bar: float, alpha: float) -> float:
    """Certified delay enlargement delta / (lmax(Q) + tb^(a-1) lmax(R))."""
    if cert.delta <= 0.0:
        raise NotApplicable("certificate is not strictly feasible")
    qmax = float(np.linalg.eigvalsh(cert.weights.Q)[-1])
    rmax = float(np.linalg.eigvalsh(cert.weights.R)[-1])
    return cert.delta / (qmax + tau_bar ** (alpha - 1.0) * rmax)
