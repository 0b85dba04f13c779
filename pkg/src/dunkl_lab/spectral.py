"""Separated eigenproblems of the Calogero-Coulomb family.

Every separated equation is brought to Sturm-Liouville form

    -(P chi')' + V chi = lam W chi

after factoring out the power behaviour forced by its regular-singular
endpoints (``r^l``, ``sin^q``, ``xi^{q/2}``, ``(xi^2-1)^{q/2}``, ...).  The
variable is then mapped, ``z = z(t)`` with ``t`` on a uniform grid, and the
problem is discretized by a cell-centred finite-volume scheme whose matrix is
symmetric tridiagonal.  Eigenvalues from three nested grids are combined by
Richardson extrapolation in ``h^2``.

Cross-methods: shooting for the angular equations, and a P1 finite-element
dense generalized eigensolve (:func:`oracle_dense`).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np
from scipy.integrate import solve_ivp
from scipy.linalg import eigh, eigh_tridiagonal
from scipy.optimize import brentq

DEFAULT_CELLS = 800
ENVELOPE_LOG = 36.0  # truncate where the decaying envelope is below e^-36 ~ 2e-16 of its maximum


class SpectralError(RuntimeError):
    """Base class of solver failures."""


class ConvergenceError(SpectralError):
    """A level did not converge; carries the residual reached."""

    def __init__(self, message: str, residual: float = float("nan")):
        super().__init__(message)
        self.residual = residual


class UnsupportedRegimeError(SpectralError):
    """Request outside the validated parameter regime (continuum, strong field, ...)."""


class NoRootError(SpectralError):
    """The outer root search had no sign change in its bracket."""


@dataclass
class EigenResult:
    kind: str
    labels: dict
    eigenvalue: float
    extras: dict = field(default_factory=dict)
    grid: dict = field(default_factory=dict)
    residual: float = 0.0
    method: str = "finite_difference"

    def as_row(self) -> dict:
        row = {"kind": self.kind, **self.labels, "eigenvalue": self.eigenvalue}
        row.update(self.extras)
        row["residual"] = self.residual
        row["method"] = self.method
        return row


# ----------------------------------------------------------------------------------
# Sturm-Liouville core


@dataclass(frozen=True)
class SLProblem:
    """``-(P chi_z)_z + V chi = lam W chi`` on ``z = z(t)``, ``t in [t0, t1]``.

    ``P``, ``V``, ``W`` are functions of ``z``; ``zmap`` returns ``(z, dz/dt)``.
    ``left``/``right`` are ``"natural"`` (flux-free; automatic where ``P``
    vanishes) or ``"dirichlet"``.
    """

    kind: str
    P: Callable
    V: Callable
    W: Callable
    t0: float
    t1: float
    zmap: Callable = staticmethod(lambda t: (t, np.ones_like(t)))
    left: str = "natural"
    right: str = "natural"
    exponents: tuple = ()
    params: dict = field(default_factory=dict)

    def mapped(self, t):
        z, dz = self.zmap(t)
        with np.errstate(divide="ignore", invalid="ignore"):
            p = self.P(z) / dz
        # 0/0 only at a mapped endpoint where the flux vanishes
        return np.nan_to_num(p, nan=0.0), self.V(z) * dz, self.W(z) * dz

    def with_params(self, **changes) -> "SLProblem":
        return replace(self, **changes)


def _faces_centres(prob: SLProblem, n: int):
    h = (prob.t1 - prob.t0) / n
    faces = prob.t0 + h * np.arange(n + 1)
    centres = faces[:-1] + h / 2
    return h, faces, centres


def fv_tridiagonal(prob: SLProblem, n: int):
    """Symmetric tridiagonal ``(d, e)`` of ``W^-1/2 A W^-1/2`` and the weights."""
    h, faces, centres = _faces_centres(prob, n)
    pf, _, _ = prob.mapped(faces)
    _, v, w = prob.mapped(centres)
    pf = np.array(pf, dtype=float)
    if prob.left == "dirichlet":
        pf[0] *= 2.0
    else:
        pf[0] = 0.0
    if prob.right == "dirichlet":
        pf[-1] *= 2.0
    else:
        pf[-1] = 0.0
    diag = (pf[:-1] + pf[1:]) / h**2 + v
    off = -pf[1:-1] / h**2
    sw = np.sqrt(w)
    return diag / w, off / (sw[:-1] * sw[1:]), sw, h


def fv_eigen(prob: SLProblem, n: int, indices: Sequence[int], vectors: bool = False):
    """Selected eigenvalues (and eigenfunctions ``chi``) on ``n`` cells.

    Mapped grids make the matrix strongly graded near singular endpoints;
    bisection with a vanishing tolerance keeps the low levels accurate to
    working precision there, where QR-type drivers lose ``eps * |T|``.
    """
    d, e, sw, h = fv_tridiagonal(prob, n)
    lo, hi = min(indices), max(indices)
    sel = [k - lo for k in indices]
    opts = dict(select="i", select_range=(lo, hi), lapack_driver="stebz", tol=1e-300)
    if vectors:
        vals, vecs = eigh_tridiagonal(d, e, **opts)
        return vals[sel], vecs[:, sel] / sw[:, None]
    vals = eigh_tridiagonal(d, e, eigvals_only=True, **opts)
    return vals[sel]


def fv_residual(prob: SLProblem, n: int, k: int) -> float:
    """Relative residual ``|(C - lam) v| / (|lam| + 1)`` of level ``k`` on grid ``n``."""
    d, e, _, _ = fv_tridiagonal(prob, n)
    vals, vecs = eigh_tridiagonal(d, e, select="i", select_range=(k, k), lapack_driver="stebz", tol=1e-300)
    v = vecs[:, 0]
    Cv = d * v
    Cv[:-1] += e * v[1:]
    Cv[1:] += e * v[:-1]
    return float(np.linalg.norm(Cv - vals[0] * v) / (abs(vals[0]) + 1.0))


def richardson(values: Sequence[float]) -> tuple[float, float]:
    """Extrapolate values on grids ``h, h/2, h/4`` assuming an ``h^2, h^4`` expansion.

    Returns ``(extrapolated, observed_order)``.
    """
    if len(values) == 1:
        return float(values[0]), float("nan")
    if len(values) == 2:
        a, b = values
        return float((4 * b - a) / 3), float("nan")
    a, b, c = values[-3:]
    ext = (64 * c - 20 * b + a) / 45
    d1, d2 = a - b, b - c
    order = math.log2(abs(d1 / d2)) if d2 != 0 and d1 != 0 else float("inf")
    return float(ext), float(order)


def richardson_levels(fun: Callable[[int], np.ndarray], n: int, levels: int = 3):
    """``fun(n), fun(2n), ...`` combined per component."""
    rows = [np.atleast_1d(np.asarray(fun(n * 2**k), dtype=float)) for k in range(levels)]
    arr = np.array(rows)
    ext = np.empty(arr.shape[1])
    orders = np.empty(arr.shape[1])
    for j in range(arr.shape[1]):
        ext[j], orders[j] = richardson(arr[:, j])
    return ext, orders, arr


def solve_levels(prob: SLProblem, indices: Sequence[int], n: int = DEFAULT_CELLS, levels: int = 3):
    """Extrapolated eigenvalues of ``prob`` with diagnostics."""
    ext, orders, raw = richardson_levels(lambda m: fv_eigen(prob, m, indices), n, levels)
    res = max(fv_residual(prob, n * 2 ** (levels - 1), k) for k in indices)
    grid = {"cells": [n * 2**k for k in range(levels)], "t_range": [prob.t0, prob.t1]}
    return ext, orders, raw, res, grid


# ----------------------------------------------------------------------------------
# dense P1 finite-element oracle

_GAUSS_X, _GAUSS_W = np.polynomial.legendre.leggauss(4)


def oracle_matrices(prob: SLProblem, n: int):
    """Dense stiffness and (lumped) mass matrices of linear elements on the ``t`` grid."""
    h = (prob.t1 - prob.t0) / n
    nodes = prob.t0 + h * np.arange(n + 1)
    A = np.zeros((n + 1, n + 1))
    m = np.zeros(n + 1)
    for e in range(n):
        a, b = nodes[e], nodes[e + 1]
        tq = (a + b) / 2 + h / 2 * _GAUSS_X
        wq = h / 2 * _GAUSS_W
        p, v, w = prob.mapped(tq)
        phi_a, phi_b = (b - tq) / h, (tq - a) / h
        kp = np.sum(wq * p) / h**2
        A[e, e] += kp
        A[e + 1, e + 1] += kp
        A[e, e + 1] -= kp
        A[e + 1, e] -= kp
        A[e, e] += np.sum(wq * v * phi_a * phi_a)
        A[e + 1, e + 1] += np.sum(wq * v * phi_b * phi_b)
        A[e, e + 1] += np.sum(wq * v * phi_a * phi_b)
        A[e + 1, e] += np.sum(wq * v * phi_a * phi_b)
        m[e] += np.sum(wq * w * phi_a)
        m[e + 1] += np.sum(wq * w * phi_b)
    keep = np.ones(n + 1, dtype=bool)
    if prob.left == "dirichlet":
        keep[0] = False
    if prob.right == "dirichlet":
        keep[-1] = False
    return A[np.ix_(keep, keep)], m[keep]


def oracle_dense(prob: SLProblem, count: int, n: int = 400, levels: int = 3) -> list[EigenResult]:
    """Brute-force check: dense generalized ``eigh`` of the element matrices, extrapolated."""

    def fun(m):
        A, mass = oracle_matrices(prob, m)
        return eigh(A, np.diag(mass), eigvals_only=True, subset_by_index=[0, count - 1])

    ext, orders, raw = richardson_levels(fun, n, levels)
    return [
        EigenResult(
            prob.kind,
            {"level": k},
            float(ext[k]),
            grid={"nodes": [n * 2**j + 1 for j in range(levels)], "order": float(orders[k])},
            residual=float(abs(raw[-1, k] - raw[-2, k])),
            method="oracle_dense",
        )
        for k in range(count)
    ]


def convergence_order(prob: SLProblem, k: int, n: int = 100) -> float:
    """Observed order of the finite-volume scheme for level ``k``."""
    vals = [fv_eigen(prob, n * 2**j, [k])[0] for j in range(3)]
    return richardson(vals)[1]


# ----------------------------------------------------------------------------------
# angular equations: -(s^nu chi')' = mu s^nu chi on (0, pi), s = sin u


def gegenbauer_problem(nu: float, kind: str, params: dict | None = None) -> SLProblem:
    """``-(sin^nu u chi')' = mu sin^nu u chi``; levels ``mu_m = m (m + nu)``."""
    nu = float(nu)
    s = lambda u: np.sin(u) ** nu
    return SLProblem(
        kind,
        P=s,
        V=lambda u: np.zeros_like(u),
        W=s,
        t0=0.0,
        t1=np.pi,
        exponents=(0.0, 0.0),
        params={"nu": nu, **(params or {})},
    )


def shoot_gegenbauer(nu: float, m: int, guess: float, rtol: float = 1e-13) -> float:
    """Level ``m`` of :func:`gegenbauer_problem` by shooting from ``u = 0`` to ``pi/2``.

    The regular solution starts from its series ``1 - mu s^2/(2(1+nu))``; even
    levels satisfy ``chi'(pi/2) = 0`` and odd levels ``chi(pi/2) = 0``.
    """
    nu = float(nu)
    s0 = 1e-4

    def mismatch(mu):
        c = -mu / (2 * (1 + nu))
        y0 = [1 + c * s0**2, 2 * c * s0]

        def rhs(u, y):
            return [y[1], -mu * y[0] - nu * np.cos(u) / np.sin(u) * y[1]]

        sol = solve_ivp(rhs, (s0, np.pi / 2), y0, method="DOP853", rtol=rtol, atol=1e-14)
        end = sol.y[:, -1]
        return end[1] if m % 2 == 0 else end[0]

    # bracket between neighbouring levels of the same parity class
    width = max(1.0, 0.5 * (2 * m + 1 + nu))
    lo, hi = guess - width, guess + width
    if m == 0:
        lo = -0.5 * (1 + nu)
    flo, fhi = mismatch(lo), mismatch(hi)
    tries = 0
    while flo * fhi > 0 and tries < 30:
        width *= 0.7
        lo, hi = guess - width, guess + width
        flo, fhi = mismatch(lo), mismatch(hi)
        tries += 1
    if flo * fhi > 0:
        raise ConvergenceError(f"shooting bracket failed for level {m}")
    return brentq(mismatch, lo, hi, xtol=1e-14, rtol=1e-15, maxiter=200)


def solve_angular_jacobi(g, count: int = 3, n: int = 400, method: str = "finite_difference") -> list[EigenResult]:
    """Levels of ``2 I_rel = p_phi^2 + 9 g(g-1)/cos^2(3 phi)`` on ``|phi| < pi/6`` (N = 3).

    With ``u = 3 phi + pi/2`` and ``psi = sin^g(u) chi`` the problem becomes
    :func:`gegenbauer_problem` with ``nu = 2g`` and ``2 I_rel = 9 (mu + g^2)``.
    """
    g = float(g)
    if not (g == 0 or g > 0.5):
        raise UnsupportedRegimeError("angular Jacobi solver supports g = 0 or g > 1/2")
    prob = gegenbauer_problem(2 * g, "angular_jacobi", {"g": g})
    ext, orders, raw, res, grid = solve_levels(prob, range(count), n)
    out = []
    for m in range(count):
        mu = ext[m]
        if method == "shooting":
            mu = shoot_gegenbauer(2 * g, m, ext[m])
        out.append(
            EigenResult(
                "angular_jacobi",
                {"m": m},
                9 * (mu + g * g),
                extras={"q": float(3 * np.sqrt(max(mu + g * g, 0.0)))},
                grid={**grid, "order": float(orders[m])},
                residual=res,
                method=method,
            )
        )
    return out


def _channel_l(N: int, Lam: float) -> float:
    b = N - 2
    return (-b + math.sqrt(b * b + 4 * Lam)) / 2


def solve_azimuthal(N: int, q, count: int = 3, n: int = 400, method: str = "finite_difference") -> list[EigenResult]:
    """Levels of ``-(1/sin^{N-2})(sin^{N-2} Phi')' + q(q+N-3)/sin^2 Phi = Lam Phi``.

    ``Phi = sin^q(theta) chi`` reduces it to :func:`gegenbauer_problem` with
    ``nu = N - 2 + 2q`` and ``Lam = mu + q(q+N-2)``; each level is reported with
    its orbital number ``l`` from ``Lam = l(l+N-2)``.
    """
    q = float(q)
    if q < 0:
        raise ValueError("q must be non-negative")
    nu = N - 2 + 2 * q
    prob = gegenbauer_problem(nu, "azimuthal", {"N": N, "q": q})
    ext, orders, raw, res, grid = solve_levels(prob, range(count), n)
    out = []
    for m in range(count):
        mu = shoot_gegenbauer(nu, m, ext[m]) if method == "shooting" else ext[m]
        Lam = mu + q * (q + N - 2)
        out.append(
            EigenResult(
                "azimuthal",
                {"N": N, "q": q, "l1": m},
                Lam,
                extras={"l": _channel_l(N, Lam)},
                grid={**grid, "order": float(orders[m])},
                residual=res,
                method=method,
            )
        )
    return out


# ----------------------------------------------------------------------------------
# relative angular spectrum


def angular_q_levels(N: int, g, count: int = 5) -> list[tuple[Fraction, int]]:
    """Lowest ``count`` distinct values ``q = g N(N-1)/2 + 3 l_3 + ... + N l_N``.

    Returned with their multiplicities ``#{(l_3, ..., l_N)}``.  For ``N = 2``
    there is a single value.
    """
    g = Fraction(g)
    base = g * N * (N - 1) / 2
    ks = list(range(3, N + 1))
    if not ks:
        return [(base, 1)]
    bound = 3 * count
    while True:
        counts: dict[int, int] = {0: 1}
        for k in ks:
            new: dict[int, int] = {}
            for s, c in counts.items():
                t = s
                while t <= bound:
                    new[t] = new.get(t, 0) + c
                    t += k
            counts = new
        values = sorted(counts)
        if len(values) >= count and values[count - 1] <= bound:
            return [(base + v, counts[v]) for v in values[:count]]
        bound *= 2


def q_multiplicities(N: int, g, q_max) -> dict[Fraction, int]:
    """All ``q <= q_max`` with multiplicities."""
    count = 4
    while True:
        levels = angular_q_levels(N, g, count)
        if N == 2 or levels[-1][0] > q_max:
            return {q: m for q, m in levels if q <= q_max}
        count *= 2


# ----------------------------------------------------------------------------------
# radial equation


def _radial_problem(N: int, gamma: float, l: float, R: float) -> SLProblem:
    nu = N - 1 + 2 * l
    return SLProblem(
        "radial",
        P=lambda r: 0.5 * r**nu,
        V=lambda r: -gamma * r ** (nu - 1),
        W=lambda r: r**nu,
        t0=0.0,
        t1=math.sqrt(R),
        zmap=lambda t: (t * t, 2 * t),
        right="dirichlet",
        exponents=(l, 0.0),
        params={"N": N, "gamma": gamma, "l": l, "R": R},
    )


def coulomb_cutoff(kappa: float, gamma: float, extra: float = 0.0) -> float:
    """Radius beyond which ``r^{gamma/kappa + extra} e^{-kappa r}`` is ``e^-ENVELOPE_LOG`` of its peak."""
    p = max(gamma / kappa + extra, 0.0)
    f = lambda r: p * math.log(r) - kappa * r if r > 0 else -math.inf
    rpk = max(p / kappa, 1e-12)
    target = (f(rpk) if p > 0 else 0.0) - ENVELOPE_LOG
    hi = max(2 * rpk, 1.0 / kappa)
    while f(hi) > target:
        hi *= 2
    lo = rpk if p > 0 else 0.0
    return brentq(lambda r: f(r) - target, max(lo, 1e-12), hi)


def solve_radial(N: int, gamma, l, n_r: int, n: int = DEFAULT_CELLS) -> EigenResult:
    """Bound level ``n_r`` of ``-(1/2)(R'' + (N-1)/r R') + l(l+N-2)/(2r^2) R - gamma/r R = E R``.

    ``R = r^l chi`` and the map ``r = t^2`` give a smooth problem in ``t``.
    The truncation radius is set from the decay rate of the computed level and
    refined until it is stable.
    """
    gamma = float(gamma)
    l = float(l)
    if gamma <= 0:
        raise UnsupportedRegimeError("continuum states (gamma <= 0) are not supported")
    R = 50.0 * (n_r + 1) ** 2 / gamma
    for _ in range(8):
        prob = _radial_problem(N, gamma, l, R)
        E = fv_eigen(prob, n // 2, [n_r])[0]
        if E >= 0:
            R *= 4
            continue
        kappa = math.sqrt(-2 * E)
        R_new = coulomb_cutoff(kappa, gamma, extra=n_r)
        if abs(R_new - R) < 0.05 * R:
            break
        R = R_new
    prob = _radial_problem(N, gamma, l, R)
    ext, orders, raw, res, grid = solve_levels(prob, [n_r], n)
    grid.update(order=float(orders[0]), R=R)
    nu_eff = gamma / math.sqrt(-2 * ext[0]) if ext[0] < 0 else float("nan")
    return EigenResult(
        "radial",
        {"N": N, "l": l, "n_r": n_r},
        float(ext[0]),
        extras={"nu": nu_eff},
        grid=grid,
        residual=res,
    )


def radial_problem(N: int, gamma, l, R: float) -> SLProblem:
    return _radial_problem(N, float(gamma), float(l), float(R))


def coulomb_energy(N: int, gamma, n) -> float:
    """Closed-form level ``-gamma^2 / (2 (n + (N-3)/2)^2)``."""
    nu = float(n) + (N - 3) / 2
    return -float(gamma) ** 2 / (2 * nu * nu)


# ----------------------------------------------------------------------------------
# parabolic coordinates


def _parabolic_problem(N: int, q: float, E: float, F: float, sign: int, Z: float, kind: str) -> SLProblem:
    """``-(P chi')' + (-E/2 z + sign F/4 z^2) W chi = lam W chi``, ``Phi = z^{q/2} chi``.

    ``sign = +1`` is the xi equation, ``-1`` the eta equation.  The map
    ``z = t^2`` is used on ``[0, Z]``.
    """
    a = (N - 1) / 2
    P = lambda z: z ** (a + q)
    W = lambda z: z ** (a - 1 + q)
    V = lambda z: (-E / 2 * z + sign * F / 4 * z * z) * W(z)
    return SLProblem(
        kind,
        P=P,
        V=V,
        W=W,
        t0=0.0,
        t1=math.sqrt(Z),
        zmap=lambda t: (t * t, 2 * t),
        right="dirichlet",
        exponents=(q / 2, 0.0),
        params={"N": N, "q": q, "E": E, "F": F},
    )


def parabolic_lambda(N: int, gamma, q, n_i: int, n: int) -> float:
    """Closed-form separation constant at zero field for general ``N``.

    ``lam_i = kappa (n_i + q/2 + (N-1)/4)`` with ``kappa = gamma/(n + (N-3)/2)``;
    at ``N = 3`` this is ``gamma (n_i + (q+1)/2)/(n + (N-3)/2)``.
    """
    nu = float(n) + (N - 3) / 2
    return float(gamma) / nu * (n_i + float(q) / 2 + (N - 1) / 4)


def stark_slope(N: int, gamma, n, n1: int, n2: int) -> float:
    """First-order field coefficient ``dE/dF = (3/2) nu (n1 - n2)/gamma``, ``nu = n + (N-3)/2``.

    For ``gamma = 1`` this is the usual ``(3/2)(n + (N-3)/2)(n1 - n2)``.
    """
    nu = float(n) + (N - 3) / 2
    return 1.5 * nu * (n1 - n2) / float(gamma)


@dataclass(frozen=True)
class ParabolicGrid:
    Z1: float
    Z2: float
    n: int = DEFAULT_CELLS
    levels: int = 3


def parabolic_grid(N: int, gamma, q, n1: int, n2: int, n: int = DEFAULT_CELLS, levels: int = 3) -> ParabolicGrid:
    """Truncation of the xi and eta domains from the zero-field decay ``e^{-kappa z/2}``.

    The decay rate comes from a coarse zero-field solve, refined until the
    truncation is stable; it does not use the closed-form energy.
    """
    gamma, q = float(gamma), float(q)
    Z1 = Z2 = 60.0 * (n1 + n2 + q + 1) / gamma
    for _ in range(8):
        coarse = ParabolicGrid(Z1, Z2, 200, 1)
        E = _parabolic_solve_once(N, gamma, q, 0.0, n1, n2, coarse, coarse.n)[0]
        kappa = math.sqrt(-2 * E)
        new = [coulomb_cutoff(kappa / 2, 0.0, extra=2 * ni + q + N) for ni in (n1, n2)]
        done = abs(new[0] - Z1) < 0.05 * Z1 and abs(new[1] - Z2) < 0.05 * Z2
        Z1, Z2 = new
        if done:
            break
    return ParabolicGrid(Z1, Z2, n, levels)


def _lam_pair(N, q, E, F, n1, n2, grid: ParabolicGrid, cells: int):
    p1 = _parabolic_problem(N, q, E, F, +1, grid.Z1, "parabolic_xi")
    p2 = _parabolic_problem(N, q, E, F, -1, grid.Z2, "parabolic_eta")
    return fv_eigen(p1, cells, [n1])[0], fv_eigen(p2, cells, [n2])[0]


def _parabolic_solve_once(N, gamma, q, F, n1, n2, grid: ParabolicGrid, cells: int):
    """Root of ``lam1(E) + lam2(E) = gamma`` on one grid."""

    def mismatch(E):
        l1, l2 = _lam_pair(N, q, E, F, n1, n2, grid, cells)
        return l1 + l2 - gamma

    # lam_i(E) increase as E decreases (E enters as -E/2 z); the sum crosses gamma once
    hi = -1e-12
    lo = -0.5
    while mismatch(lo) < 0:
        lo *= 4
        if lo < -1e8:
            raise NoRootError("no parabolic root below E = -1e8")
    if mismatch(hi) > 0:
        raise NoRootError("parabolic mismatch positive at E -> 0")
    E = brentq(mismatch, lo, hi, xtol=1e-16, rtol=1e-15, maxiter=300)
    l1, l2 = _lam_pair(N, q, E, F, n1, n2, grid, cells)
    # enforce the exact constraint lam1 + lam2 = gamma by splitting the tiny remainder
    rem = gamma - (l1 + l2)
    return E, l1 + rem / 2, l2 + rem / 2


def solve_parabolic_pair(
    N: int,
    g,
    q,
    gamma,
    F,
    n1: int,
    n2: int,
    grid: ParabolicGrid | None = None,
) -> EigenResult:
    """Two-parameter problem of the separated parabolic equations.

    Finds ``E`` with ``lam1(E) + lam2(E) = gamma`` where ``lam1`` is level
    ``n1`` of the xi equation and ``lam2`` level ``n2`` of the eta equation.
    Fields ``F > 0`` are resonances; only the weak-field regime, in which the
    outer turning point of the eta equation lies well beyond the truncation,
    is accepted.
    """
    gamma, q, F = float(gamma), float(q), float(F)
    if F < 0:
        raise UnsupportedRegimeError("F must be non-negative")
    if grid is None:
        grid = parabolic_grid(N, gamma, q, n1, n2)
    if F > 0:
        guess = coulomb_energy(N, gamma, n1 + n2 + q + 1)
        turning = 2 * abs(guess) / F
        if turning < 2 * grid.Z2:
            raise UnsupportedRegimeError(
                f"F={F:g} is outside the weak-field regime (eta turning point {turning:.3g} "
                f"inside twice the truncation {grid.Z2:.3g})"
            )

    def fun(cells):
        return np.array(_parabolic_solve_once(N, gamma, q, F, n1, n2, grid, cells))

    ext, orders, raw = richardson_levels(fun, grid.n, grid.levels)
    E, l1, l2 = ext
    return EigenResult(
        "parabolic",
        {"N": N, "g": float(g), "q": q, "n1": n1, "n2": n2, "n": n1 + n2 + q + 1},
        float(E),
        extras={"lambda1": float(l1), "lambda2": float(l2), "F": F},
        grid={"cells": [grid.n * 2**k for k in range(grid.levels)], "Z": [grid.Z1, grid.Z2], "order": float(orders[0])},
        residual=float(abs(l1 + l2 - gamma)),
    )


def stark_slope_numeric(
    N: int, g, q, gamma, n1: int, n2: int, F: float = 1e-5, grid: ParabolicGrid | None = None
) -> dict:
    """``dE/dF`` from fields ``0, F, 2F`` on one fixed grid.

    ``s(F) = (E(F) - E(0))/F`` is combined as ``2 s(F) - s(2F)`` to cancel the
    quadratic Stark term.
    """
    if grid is None:
        grid = parabolic_grid(N, gamma, q, n1, n2)
    E = [solve_parabolic_pair(N, g, q, gamma, f, n1, n2, grid).eigenvalue for f in (0.0, F, 2 * F)]
    s1 = (E[1] - E[0]) / F
    s2 = (E[2] - E[0]) / (2 * F)
    slope = 2 * s1 - s2
    return {
        "N": N,
        "g": float(g),
        "q": float(q),
        "n1": n1,
        "n2": n2,
        "n": n1 + n2 + float(q) + 1,
        "F": F,
        "E0": E[0],
        "slope": slope,
        "slope_closed": stark_slope(N, gamma, n1 + n2 + float(q) + 1, n1, n2),
        "scale": abs(1.5 * (n1 + n2 + float(q) + 1 + (N - 3) / 2) / float(gamma)),
    }


# ----------------------------------------------------------------------------------
# two centres in elliptic coordinates


def _elliptic_eta_problem(N, q, E, a, g1, g2) -> SLProblem:
    """``-(P chi')' + [2a(g1-g2) eta + 2a^2 E eta^2 + q(q+N-2)] W chi = lam W chi``

    on ``(-1, 1)`` after ``Phi = (1-eta^2)^{q/2} chi``; ``P = (1-eta^2)^{(N-1)/2+q}``.
    """
    A = (N - 1) / 2
    P = lambda z: np.clip(1 - z * z, 0.0, None) ** (A + q)
    W = lambda z: np.clip(1 - z * z, 0.0, None) ** (A - 1 + q)
    shift = q * (q + N - 2)
    V = lambda z: (2 * a * (g1 - g2) * z + 2 * a * a * E * z * z + shift) * W(z)
    # eta = sin(t) on (-pi/2, pi/2) smooths the endpoint behaviour
    return SLProblem(
        "elliptic_eta",
        P=P,
        V=V,
        W=W,
        t0=-np.pi / 2,
        t1=np.pi / 2,
        zmap=lambda t: (np.sin(t), np.cos(t)),
        exponents=(q / 2, q / 2),
        params={"N": N, "q": q, "E": E, "a": a, "gamma1": g1, "gamma2": g2},
    )


def _elliptic_xi_problem(N, q, E, a, g1, g2, T) -> SLProblem:
    """``-(P chi')' + [-2a(g1+g2) xi - 2a^2 E xi^2 - q(q+N-2)] W chi = mu W chi``

    on ``(1, 1+T^2)`` with ``xi = 1 + t^2`` and ``Phi = (xi^2-1)^{q/2} chi``; the
    separation constant is ``lam = -mu``.
    """
    A = (N - 1) / 2
    u = lambda z: np.clip(z * z - 1, 0.0, None)
    P = lambda z: u(z) ** (A + q)
    W = lambda z: u(z) ** (A - 1 + q)
    shift = q * (q + N - 2)
    V = lambda z: (-2 * a * (g1 + g2) * z - 2 * a * a * E * z * z - shift) * W(z)
    return SLProblem(
        "elliptic_xi",
        P=P,
        V=V,
        W=W,
        t0=0.0,
        t1=T,
        zmap=lambda t: (1 + t * t, 2 * t),
        right="dirichlet",
        exponents=(q / 2, 0.0),
        params={"N": N, "q": q, "E": E, "a": a, "gamma1": g1, "gamma2": g2},
    )


@dataclass(frozen=True)
class EllipticGrid:
    T: float
    n_xi: int = DEFAULT_CELLS
    n_eta: int = 400
    levels: int = 3


def elliptic_grid(N, q, a, g1, g2, E_guess: float, n_xi: int = DEFAULT_CELLS, n_eta: int = 400, levels: int = 3) -> EllipticGrid:
    """xi truncation from the decay ``e^{-kappa a xi}`` at the guessed energy."""
    kappa = math.sqrt(-2 * E_guess)
    R = coulomb_cutoff(kappa, g1 + g2, extra=q + N)
    Xi = 1 + R / a
    return EllipticGrid(math.sqrt(Xi - 1), n_xi, n_eta, levels)


def _two_center_once(N, q, a, g1, g2, k_xi, k_eta, grid: EllipticGrid, scale: int, E_lo: float):
    def lam_eta(E):
        return fv_eigen(_elliptic_eta_problem(N, q, E, a, g1, g2), grid.n_eta * scale, [k_eta])[0]

    def mu_xi(E):
        return fv_eigen(_elliptic_xi_problem(N, q, E, a, g1, g2, grid.T), grid.n_xi * scale, [k_xi])[0]

    # D(E) = lam_eta + mu_xi decreases monotonically in E
    D = lambda E: lam_eta(E) + mu_xi(E)
    hi = -1e-10
    lo = E_lo
    for _ in range(6):
        if D(lo) > 0:
            break
        lo *= 2
    else:
        raise NoRootError(f"two-centre mismatch negative at the lower bracket E = {lo:g}")
    if D(hi) > 0:
        raise NoRootError("two-centre level not bound in the truncated domain")
    E = brentq(D, lo, hi, xtol=1e-15, rtol=1e-15, maxiter=300)
    return E, lam_eta(E), -mu_xi(E)


def solve_two_center(
    N: int,
    g,
    q,
    gamma1,
    gamma2,
    a,
    level_selector: tuple[int, int] = (0, 0),
    grid: EllipticGrid | None = None,
) -> EigenResult:
    """Two-centre level with ``k_xi`` xi-nodes and ``k_eta`` eta-nodes.

    Outer root search on ``E`` of ``lam_eta(E) - lam_xi(E)``; the inner
    separation constants are tridiagonal eigenvalues of the separated
    problems.  Bracketing uses the united-charge bound
    ``E >= -(g1+g2)^2 / (2 (q + 1 + (N-3)/2)^2)``.
    """
    a, g1, g2, q = float(a), float(gamma1), float(gamma2), float(q)
    if not a > 0:
        raise UnsupportedRegimeError("two-centre solver needs a > 0; use the single-centre solver at a = 0")
    if g1 + g2 <= 0:
        raise UnsupportedRegimeError("no bound states for non-positive total charge")
    k_xi, k_eta = level_selector
    nu_min = q + 1 + (N - 3) / 2
    E_lo = -1.5 * (abs(g1) + abs(g2)) ** 2 / (2 * nu_min**2)
    if grid is None:
        E_guess = -((g1 + g2) ** 2) / (2 * (nu_min + k_xi + k_eta) ** 2)
        for _ in range(6):
            grid = elliptic_grid(N, q, a, g1, g2, E_guess)
            E_new = _two_center_once(N, q, a, g1, g2, k_xi, k_eta, replace(grid, n_xi=300, n_eta=200), 1, E_lo)[0]
            if abs(E_new - E_guess) < 1e-3 * abs(E_guess):
                break
            E_guess = E_new
        grid = elliptic_grid(N, q, a, g1, g2, E_new)

    def fun(cells_n):
        scale = cells_n // grid.n_xi
        return np.array(_two_center_once(N, q, a, g1, g2, k_xi, k_eta, grid, scale, E_lo))

    ext, orders, raw = richardson_levels(fun, grid.n_xi, grid.levels)
    E, lam_eta, lam_xi = ext
    res_eta, res_xi = two_center_residuals(N, q, a, g1, g2, float(E), lam_eta, lam_xi, k_xi, k_eta, grid)
    return EigenResult(
        "two_center",
        {"N": N, "g": float(g), "q": q, "k_xi": k_xi, "k_eta": k_eta},
        float(E),
        extras={
            "lambda": float((lam_eta + lam_xi) / 2),
            "lambda_eta": float(lam_eta),
            "lambda_xi": float(lam_xi),
            "a": a,
            "gamma1": g1,
            "gamma2": g2,
        },
        grid={"T": grid.T, "cells_xi": grid.n_xi, "cells_eta": grid.n_eta, "order": float(orders[0])},
        residual=max(res_eta, res_xi),
    )


def two_center_residuals(N, q, a, g1, g2, E, lam_eta, lam_xi, k_xi, k_eta, grid: EllipticGrid):
    """Residuals of the two separated equations at a converged ``(E, lam)``.

    Each is the distance of the extrapolated separation constant, evaluated at
    the extrapolated energy, from the common value, plus the relative
    eigen-residual on the finest grid.
    """
    lam = (lam_eta + lam_xi) / 2
    pe = _elliptic_eta_problem(N, q, E, a, g1, g2)
    px = _elliptic_xi_problem(N, q, E, a, g1, g2, grid.T)
    scale = 2 ** (grid.levels - 1)
    le, _, _ = richardson_levels(lambda m: fv_eigen(pe, m, [k_eta]), grid.n_eta, grid.levels)
    lx, _, _ = richardson_levels(lambda m: -fv_eigen(px, m, [k_xi]), grid.n_xi, grid.levels)
    r_eta = abs(le[0] - lam) + fv_residual(pe, grid.n_eta * scale, k_eta) * 1e-6
    r_xi = abs(lx[0] - lam) + fv_residual(px, grid.n_xi * scale, k_xi) * 1e-6
    return float(r_eta), float(r_xi)


def eta_parity(N, q, E, a, g1, g2, k_eta: int, n: int = 400) -> float:
    """Parity of the ``k_eta``-th eta eigenfunction: ``sum chi(eta) chi(-eta) / sum chi^2``."""
    prob = _elliptic_eta_problem(N, q, E, a, g1, g2)
    _, vecs = fv_eigen(prob, n, [k_eta], vectors=True)
    v = vecs[:, 0]
    return float(np.dot(v, v[::-1]) / np.dot(v, v))


# ----------------------------------------------------------------------------------
# spectrum assembly


@dataclass(frozen=True)
class SpectrumRow:
    n: Fraction
    energy: float
    degeneracy: int
    parabolic_degeneracy: int
    q_values: tuple


def spherical_states(N: int, g, n_max) -> list[dict]:
    """States ``(n_r, l1, l_3..l_N)`` with ``n = n_r + q + l1 + 1 <= n_max``."""
    q_mult = q_multiplicities(N, g, Fraction(n_max) - 1)
    out = []
    for q, mult in sorted(q_mult.items()):
        kmax = Fraction(n_max) - q - 1
        k = 0
        while k <= kmax:
            for n_r in range(k + 1):
                out.append({"q": q, "mult": mult, "n_r": n_r, "l1": k - n_r, "l": q + k - n_r, "n": q + k + 1})
            k += 1
    return out


def parabolic_states(N: int, g, n_max) -> list[dict]:
    """States ``(n1, n2, l_3..l_N)`` with ``n = n1 + n2 + q + 1 <= n_max``."""
    q_mult = q_multiplicities(N, g, Fraction(n_max) - 1)
    out = []
    for q, mult in sorted(q_mult.items()):
        kmax = Fraction(n_max) - q - 1
        k = 0
        while k <= kmax:
            for n1 in range(k + 1):
                out.append({"q": q, "mult": mult, "n1": n1, "n2": k - n1, "n": q + k + 1})
            k += 1
    return out


def assemble_spectrum(N: int, g, gamma, n_max) -> list[SpectrumRow]:
    """Levels ``E_n`` up to ``n_max`` with spherical and parabolic state counts."""
    sph: dict = {}
    for s in spherical_states(N, g, n_max):
        sph.setdefault(s["n"], [0, set()])
        sph[s["n"]][0] += s["mult"]
        sph[s["n"]][1].add(s["q"])
    par: dict = {}
    for s in parabolic_states(N, g, n_max):
        par[s["n"]] = par.get(s["n"], 0) + s["mult"]
    rows = []
    for n in sorted(sph):
        rows.append(
            SpectrumRow(
                Fraction(n),
                coulomb_energy(N, gamma, n),
                sph[n][0],
                par.get(n, 0),
                tuple(sorted(sph[n][1])),
            )
        )
    return rows


def spectrum_from_solver(N: int, g, gamma, n_max, n: int = DEFAULT_CELLS) -> list[EigenResult]:
    """Numerical ``E`` for every distinct ``(l, n_r)`` channel with ``n <= n_max``."""
    seen = set()
    out = []
    for s in spherical_states(N, g, n_max):
        key = (s["l"], s["n_r"])
        if key in seen:
            continue
        seen.add(key)
        res = solve_radial(N, gamma, s["l"], s["n_r"], n=n)
        res.labels.update(q=float(s["q"]), n=float(s["n"]))
        res.extras["E_closed"] = coulomb_energy(N, gamma, s["n"])
        out.append(res)
    return out
