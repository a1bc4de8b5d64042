"""Dense log-det barrier solver for small affine matrix-inequality problems.

Feasibility of {x : S_i(x) > 0 for all i} with affine symmetric blocks
S_i(x) = C_i + sum_v x_v A_iv is decided by the standard phase-I program

    minimize s   subject to   S_i(x) + s I > 0,

driven down the central path with Newton steps on t*s - sum_i logdet(.).
A strictly negative optimal slack certifies interior feasibility with
margin |s|; a positive lower bound (optimal s minus the duality gap nu/t)
certifies infeasibility of the affine system.  Quasiconvex objectives
(decay rates, Lyapunov margins) reduce to bisection over a parametrised
family of such feasibility problems.

Everything here is dense and tiny (tens of variables, blocks up to ~12x12),
so clarity wins over sparsity tricks, and every returned point can be
re-checked independently by a plain eigenvalue computation.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import DimensionMismatch

Array = np.ndarray

BlockFn = Callable[[Array], Array]


class AffineBlocks:
    """Probes affine block callables into constant + per-variable matrices."""

    def __init__(self, block_fns: Sequence[BlockFn], nvar: int, check: bool = True):
        self.nvar = nvar
        self.C: list[Array] = []
        self.A: list[Array] = []  # (nvar, m, m) per block
        self.sizes: list[int] = []
        zero = np.zeros(nvar)
        for fn in block_fns:
            C = _sym(np.atleast_2d(np.asarray(fn(zero), dtype=float)))
            m = C.shape[0]
            A = np.empty((nvar, m, m))
            for v in range(nvar):
                e = np.zeros(nvar)
                e[v] = 1.0
                A[v] = _sym(np.atleast_2d(np.asarray(fn(e), dtype=float))) - C
            self.C.append(C)
            self.A.append(A)
            self.sizes.append(m)
            if check:
                rng = np.random.default_rng(12345)
                xr = rng.normal(size=nvar)
                probe = _sym(np.atleast_2d(np.asarray(fn(xr), dtype=float)))
                lin = C + np.tensordot(xr, A, axes=1)
                scale = 1.0 + np.abs(probe).max()
                if not np.allclose(probe, lin, atol=1e-8 * scale):
                    raise DimensionMismatch("block callable is not affine in x")
        self.nu = float(sum(self.sizes))

    def eval(self, x: Array) -> list[Array]:
        return [C + np.tensordot(x, A, axes=1) for C, A in zip(self.C, self.A)]

    def min_eig(self, x: Array) -> float:
        return min(float(np.linalg.eigvalsh(M)[0]) for M in self.eval(x))


def _sym(M: Array) -> Array:
    return 0.5 * (M + M.T)


def _chol_logdet(M: Array) -> Optional[float]:
    try:
        L = np.linalg.cholesky(M)
    except np.linalg.LinAlgError:
        return None
    return 2.0 * float(np.sum(np.log(np.diag(L))))


@dataclass
class SlackResult:
    slack: float
    x: Array
    feasible: bool
    newton_iters: int


def min_slack(blocks: AffineBlocks, x0: Optional[Array] = None, *,
              feas_margin: float = 1e-7, gap_tol: float = 1e-10,
              t0: float = 1.0, t_mult: float = 10.0,
              max_newton: int = 80) -> SlackResult:
    """Phase-I: minimize the uniform slack s with S_i(x) + sI > 0.

    Stops early once s is decisively negative (strict feasibility with
    margin) or decisively positive (slack lower bound s - nu/t above zero).
    """
    nv = blocks.nvar
    x = np.zeros(nv) if x0 is None else np.asarray(x0, dtype=float).copy()
    worst = -min(float(np.linalg.eigvalsh(M)[0]) for M in blocks.eval(x))
    s = worst + 1.0
    y = np.append(x, s)
    nu = blocks.nu
    t = t0
    iters = 0

    def split(y):
        return y[:-1], y[-1]

    def barrier_state(y):
        x, s = split(y)
        Ms = [M + s * np.eye(M.shape[0]) for M in blocks.eval(x)]
        chols = []
        for M in Ms:
            try:
                chols.append(np.linalg.cholesky(M))
            except np.linalg.LinAlgError:
                return None
        return Ms, chols

    def merit(y, t):
        st = barrier_state(y)
        if st is None:
            return np.inf
        _, chols = st
        phi = -sum(2.0 * float(np.sum(np.log(np.diag(L)))) for L in chols)
        return t * y[-1] + phi

    while True:
        # centering at this t
        for _ in range(max_newton):
            iters += 1
            st = barrier_state(y)
            if st is None:
                raise DimensionMismatch("barrier iterate left the domain")
            Ms, chols = st
            g = np.zeros(nv + 1)
            H = np.zeros((nv + 1, nv + 1))
            g[-1] += t
            for bi, (M, L) in enumerate(zip(Ms, chols)):
                m = M.shape[0]
                Minv = np.linalg.inv(M)
                A = blocks.A[bi]
                # W[v] = Minv @ A_v for each variable, plus the slack identity
                W = np.empty((nv + 1, m, m))
                W[:nv] = np.einsum("ij,vjk->vik", Minv, A)
                W[nv] = Minv
                g -= np.trace(W, axis1=1, axis2=2)
                H += np.einsum("amn,bnm->ab", W, W)
            H[np.diag_indices_from(H)] += 1e-13 * (1.0 + np.trace(H) / (nv + 1))
            try:
                d = np.linalg.solve(H, -g)
            except np.linalg.LinAlgError:
                d = np.linalg.lstsq(H, -g, rcond=None)[0]
            lam2 = float(-g @ d)
            if lam2 <= 0.0:
                break
            # backtracking: stay in the domain, then Armijo on the merit
            f0 = merit(y, t)
            step = 1.0
            gd = float(g @ d)
            for _ in range(60):
                cand = y + step * d
                fc = merit(cand, t)
                if np.isfinite(fc) and fc <= f0 + 0.01 * step * gd:
                    y = cand
                    break
                step *= 0.5
            else:
                break
            if lam2 * 0.5 <= 1e-12:
                break
            x_cur, s_cur = split(y)
            if s_cur < -max(10.0 * feas_margin, 1e-6):
                return SlackResult(float(s_cur), x_cur.copy(), True, iters)
        x_cur, s_cur = split(y)
        gap = nu / t
        if s_cur < -feas_margin:
            return SlackResult(float(s_cur), x_cur.copy(), True, iters)
        # The duality bound s* >= s - nu/t holds at the centered point; an
        # early (imperfectly centered) exit can only misjudge toward
        # "infeasible", which downstream bisection turns into a slightly
        # conservative objective, never an invalid certificate: feasibility
        # is only ever declared at an explicitly checked point.
        if s_cur - gap > 0.0:
            return SlackResult(float(s_cur), x_cur.copy(), False, iters)
        if gap <= gap_tol:
            return SlackResult(float(s_cur), x_cur.copy(), s_cur < -feas_margin, iters)
        t *= t_mult


def analytic_center(blocks: AffineBlocks, x_start: Array, *,
                    max_newton: int = 120) -> Array:
    """Newton minimization of -sum logdet S_i(x) from a strictly feasible start."""
    x = np.asarray(x_start, dtype=float).copy()
    nv = blocks.nvar

    def phi(x):
        total = 0.0
        for M in blocks.eval(x):
            ld = _chol_logdet(M)
            if ld is None:
                return np.inf
            total -= ld
        return total

    for _ in range(max_newton):
        Ms = blocks.eval(x)
        g = np.zeros(nv)
        H = np.zeros((nv, nv))
        for bi, M in enumerate(Ms):
            Minv = np.linalg.inv(M)
            A = blocks.A[bi]
            W = np.einsum("ij,vjk->vik", Minv, A)
            g -= np.trace(W, axis1=1, axis2=2)
            H += np.einsum("amn,bnm->ab", W, W)
        H[np.diag_indices_from(H)] += 1e-13 * (1.0 + np.trace(H) / nv)
        try:
            d = np.linalg.solve(H, -g)
        except np.linalg.LinAlgError:
            d = np.linalg.lstsq(H, -g, rcond=None)[0]
        lam2 = float(-g @ d)
        if lam2 * 0.5 <= 1e-11:
            break
        f0 = phi(x)
        step = 1.0
        moved = False
        for _ in range(60):
            cand = x + step * d
            fc = phi(cand)
            if np.isfinite(fc) and fc <= f0 + 0.01 * step * float(g @ d):
                x = cand
                moved = True
                break
            step *= 0.5
        if not moved:
            break
    return x


@dataclass
class MaximizeResult:
    value: float
    x: Array
    feasible_at_zero: bool
    best_slack: float  # slack of the last phase-I when infeasible


def maximize_parameter(block_factory: Callable[[float], Sequence[BlockFn]],
                       nvar: int, *, hi0: float = 0.25, tol: float = 1e-4,
                       max_doublings: int = 40,
                       feas_margin: float = 1e-7) -> MaximizeResult:
    """Largest gamma with the affine system ``block_factory(gamma)`` feasible.

    The family must be monotone: feasible sets shrink as gamma grows.  The
    search returns the centered point at the best feasible level; if even
    gamma = 0 is infeasible the result carries ``feasible_at_zero=False``
    and the phase-I point for diagnostics.
    """
    def solve_at(gamma, warm):
        blocks = AffineBlocks(block_factory(gamma), nvar, check=(gamma == 0.0))
        return blocks, min_slack(blocks, warm, feas_margin=feas_margin)

    blocks0, res0 = solve_at(0.0, None)
    if not res0.feasible:
        return MaximizeResult(0.0, res0.x, False, res0.slack)
    lo, x_lo = 0.0, res0.x
    hi = hi0
    for _ in range(max_doublings):
        _, res = solve_at(hi, x_lo)
        if not res.feasible:
            break
        lo, x_lo = hi, res.x
        hi *= 2.0
    else:
        hi = lo  # never found infeasible level: settle at the last feasible
    while hi - lo > max(tol, tol * lo):
        mid = 0.5 * (lo + hi)
        _, res = solve_at(mid, x_lo)
        if res.feasible:
            lo, x_lo = mid, res.x
        else:
            hi = mid
    blocks_lo = AffineBlocks(block_factory(lo), nvar, check=False)
    x_center = analytic_center(blocks_lo, x_lo)
    if blocks_lo.min_eig(x_center) <= 0.0:
        x_center = x_lo  # centering should never leave the set; belt and braces
    return MaximizeResult(lo, x_center, True, 0.0)
