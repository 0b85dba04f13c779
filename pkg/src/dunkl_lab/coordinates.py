"""Double-precision coordinate charts.

Cartesian points ``x`` map to Jacobi points ``y = O x`` whose component 0 is
the centre-of-mass coordinate ``x0 = sum(x)/sqrt(N)`` and whose components
1..N-1 span the relative space.  Spherical, parabolic and elliptic charts act
on ``(x0, y_rel)``; the direction of ``y_rel`` is carried unchanged as a block
of hyperspherical angles.

Elliptic convention: charge 1 sits at ``x0 = +a`` and charge 2 at ``x0 = -a``;
with ``xi = (r1 + r2)/2a`` and ``eta = (r1 - r2)/2a`` the inverse map is

    x0 = -a xi eta,   |y_rel| = a sqrt((xi^2 - 1)(1 - eta^2)),

so the first charge is the point ``(xi, eta) = (1, -1)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

CHARTS = ("cartesian", "jacobi", "spherical", "parabolic", "elliptic")


class ChartError(ValueError):
    """A point lies on a degenerate locus of a chart.

    ``tag`` is one of ``origin``, ``coincident``, ``range`` or
    ``parameter``.  Axis and focus points are not errors; they are returned
    with :attr:`ChartPoint.flag` set.
    """

    def __init__(self, tag: str, message: str):
        super().__init__(f"{tag}: {message}")
        self.tag = tag


@dataclass(frozen=True)
class ChartPoint:
    chart: str
    coords: np.ndarray
    angles: np.ndarray | None = None
    flag: str | None = None  # degenerate locus the point lies on, if any

    def __post_init__(self):
        if self.chart not in CHARTS:
            raise ValueError(f"unknown chart {self.chart!r}")


@dataclass(frozen=True)
class JacobiMap:
    N: int
    O: np.ndarray

    def forward(self, x) -> np.ndarray:
        return self.O @ np.asarray(x, dtype=float)

    def inverse(self, y) -> np.ndarray:
        return self.O.T @ np.asarray(y, dtype=float)


@dataclass(frozen=True)
class RootImage:
    pairs: tuple
    betas: np.ndarray  # one row per pair i<j


def jacobi_matrix(N: int) -> JacobiMap:
    """Orthogonal centre-of-mass/relative transform.

    Row 0 is ``(1, ..., 1)/sqrt(N)``; row ``k >= 1`` is
    ``(1, ..., 1, -k, 0, ..., 0)/sqrt(k(k+1))`` with ``k`` leading ones.
    """
    if N < 2:
        raise ValueError("N must be at least 2")
    O = np.zeros((N, N))
    O[0, :] = 1.0 / np.sqrt(N)
    for k in range(1, N):
        c = 1.0 / np.sqrt(k * (k + 1))
        O[k, :k] = c
        O[k, k] = -k * c
    return JacobiMap(N, O)


def beta_roots(N: int) -> RootImage:
    """Images ``beta_ij = O (e_i - e_j)`` of the roots of the Calogero potential."""
    O = jacobi_matrix(N).O
    pairs = tuple((i, j) for i in range(N) for j in range(i + 1, N))
    betas = np.array([O[:, i] - O[:, j] for i, j in pairs])
    betas[:, 0] = 0.0  # exact: row 0 is constant
    return RootImage(pairs, betas)


def reflect(beta: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Reflection of ``y`` across the hyperplane orthogonal to ``beta``."""
    beta = np.asarray(beta, dtype=float)
    y = np.asarray(y, dtype=float)
    return y - 2.0 * (beta @ y) / (beta @ beta) * beta


def calogero_sum_cartesian(x) -> float:
    """``sum_{i<j} 1/(x_i - x_j)^2``."""
    x = np.asarray(x, dtype=float)
    N = len(x)
    total = 0.0
    for i in range(N):
        for j in range(i + 1, N):
            d = x[i] - x[j]
            if d == 0.0:
                raise ChartError("coincident", f"x_{i + 1} = x_{j + 1}")
            total += 1.0 / d**2
    return total


def calogero_sum_jacobi(y) -> float:
    """``sum_{i<j} 1/(beta_ij . y)^2``; equals :func:`calogero_sum_cartesian` of ``O^T y``."""
    y = np.asarray(y, dtype=float)
    roots = beta_roots(len(y))
    dots = roots.betas @ y
    if np.any(dots == 0.0):
        raise ChartError("coincident", "point on a reflection hyperplane")
    # (beta . y)^2 = (x_i - x_j)^2 because |alpha_ij|^2 = |beta_ij|^2 = 2 and O is orthogonal
    return float(np.sum(1.0 / dots**2))


# ----------------------------------------------------------------------------------
# hyperspherical angles of the relative direction


def direction_angles(v: np.ndarray) -> np.ndarray:
    """Hyperspherical angles of a nonzero vector of dimension ``d``.

    ``d = 1`` gives one angle in ``{0, pi}`` (the sign);
    ``d >= 2`` gives ``d - 1`` angles, the last one in ``(-pi, pi]``.
    """
    v = np.asarray(v, dtype=float)
    d = len(v)
    if d == 1:
        return np.array([0.0 if v[0] >= 0 else np.pi])
    angles = np.empty(d - 1)
    for k in range(d - 2):
        angles[k] = np.arctan2(np.linalg.norm(v[k + 1 :]), v[k])
    angles[d - 2] = np.arctan2(v[d - 1], v[d - 2])
    return angles


def direction_vector(angles: np.ndarray, d: int) -> np.ndarray:
    """Unit vector with the given hyperspherical angles."""
    angles = np.asarray(angles, dtype=float)
    if d == 1:
        return np.array([np.cos(angles[0])])
    out = np.empty(d)
    s = 1.0
    for k in range(d - 1):
        out[k] = s * np.cos(angles[k])
        s *= np.sin(angles[k])
    out[d - 1] = s
    return out


def _split(y) -> tuple[float, np.ndarray]:
    y = np.asarray(y, dtype=float)
    if len(y) < 2:
        raise ValueError("a Jacobi point has at least two components")
    return float(y[0]), y[1:]


def _rel_angles(yrel: np.ndarray, rho: float) -> np.ndarray:
    if rho == 0.0:
        # direction undefined on the axis; use the reference direction
        return np.zeros(max(len(yrel) - 1, 1))
    return direction_angles(yrel)


# ----------------------------------------------------------------------------------
# charts on Jacobi points


def to_jacobi(x) -> ChartPoint:
    x = np.asarray(x, dtype=float)
    return ChartPoint("jacobi", jacobi_matrix(len(x)).forward(x))


def from_jacobi(p: ChartPoint) -> np.ndarray:
    return jacobi_matrix(len(p.coords)).inverse(p.coords)


def to_spherical(y) -> ChartPoint:
    """``(r, theta)`` with ``x0 = r cos(theta)`` and ``|y_rel| = r sin(theta)``."""
    x0, yrel = _split(y)
    rho = float(np.linalg.norm(yrel))
    r = float(np.hypot(x0, rho))
    if r == 0.0:
        raise ChartError("origin", "spherical chart undefined at r = 0")
    theta = float(np.arctan2(rho, x0))
    return ChartPoint("spherical", np.array([r, theta]), _rel_angles(yrel, rho))


def from_spherical(p: ChartPoint, N: int) -> np.ndarray:
    r, theta = p.coords
    if r < 0 or not 0.0 <= theta <= np.pi:
        raise ChartError("range", "need r >= 0 and 0 <= theta <= pi")
    n = direction_vector(p.angles, N - 1)
    return np.concatenate([[r * np.cos(theta)], r * np.sin(theta) * n])


def to_parabolic(y) -> ChartPoint:
    """``xi = r + x0``, ``eta = r - x0``; points on the axis (xi or eta = 0) are flagged."""
    x0, yrel = _split(y)
    rho = float(np.linalg.norm(yrel))
    r = float(np.hypot(x0, rho))
    if r == 0.0:
        raise ChartError("origin", "parabolic chart undefined at r = 0")
    flag = "axis" if rho == 0.0 else None
    # stable forms: r - |x0| loses precision when rho << |x0|
    if x0 >= 0:
        xi = r + x0
        eta = rho * rho / xi
    else:
        eta = r - x0
        xi = rho * rho / eta
    return ChartPoint("parabolic", np.array([xi, eta]), _rel_angles(yrel, rho), flag)


def from_parabolic(p: ChartPoint, N: int) -> np.ndarray:
    xi, eta = p.coords
    if xi < 0 or eta < 0:
        raise ChartError("range", "need xi, eta >= 0")
    n = direction_vector(p.angles, N - 1)
    return np.concatenate([[(xi - eta) / 2.0], np.sqrt(xi * eta) * n])


def _centre_distances(x0: float, rho: float, a: float) -> tuple[float, float]:
    return float(np.hypot(x0 - a, rho)), float(np.hypot(x0 + a, rho))


def to_elliptic(y, a: float) -> ChartPoint:
    """Prolate-spheroidal chart about charges at ``x0 = +a`` (1) and ``x0 = -a`` (2)."""
    if not a > 0:
        raise ChartError("parameter", "elliptic chart needs a > 0")
    x0, yrel = _split(y)
    rho = float(np.linalg.norm(yrel))
    r1, r2 = _centre_distances(x0, rho, a)
    flag = "focus" if r1 == 0.0 or r2 == 0.0 else ("axis" if rho == 0.0 else None)
    xi = (r1 + r2) / (2 * a)
    # from x0 = -a xi eta; exact and well conditioned away from the midplane
    eta = -x0 / (a * xi)
    xi = max(xi, 1.0)
    eta = min(max(eta, -1.0), 1.0)
    return ChartPoint("elliptic", np.array([xi, eta]), _rel_angles(yrel, rho), flag)


def from_elliptic(p: ChartPoint, a: float, N: int) -> np.ndarray:
    if not a > 0:
        raise ChartError("parameter", "elliptic chart needs a > 0")
    xi, eta = p.coords
    if xi < 1.0 or abs(eta) > 1.0:
        raise ChartError("range", "need xi >= 1 and |eta| <= 1")
    n = direction_vector(p.angles, N - 1)
    rho = a * np.sqrt((xi * xi - 1.0) * (1.0 - eta * eta))
    return np.concatenate([[-a * xi * eta], rho * n])


def elliptic_from_distances(r1: float, r2: float, a: float) -> tuple[float, float]:
    return (r1 + r2) / (2 * a), (r1 - r2) / (2 * a)


# ----------------------------------------------------------------------------------
# dispatch


def transform(point: Sequence[float], src: str, dst: str, N: int, a: float | None = None) -> ChartPoint:
    """Convert between charts, going through Jacobi coordinates.

    Non-Cartesian inputs are given as ``coords`` followed by the angle block
    (see :func:`chart_width`).
    """
    point = np.asarray(point, dtype=float)
    if len(point) != chart_width(src, N):
        raise ValueError(f"{src} point for N={N} needs {chart_width(src, N)} numbers, got {len(point)}")
    y = _to_jacobi_any(point, src, N, a)
    return _from_jacobi_any(y, dst, a)


def chart_width(chart: str, N: int) -> int:
    """Number of numbers describing a point of ``chart``."""
    if chart in ("cartesian", "jacobi"):
        return N
    if chart in ("spherical", "parabolic", "elliptic"):
        return 2 + max(N - 2, 1)
    raise ValueError(f"unknown chart {chart!r}")


def flatten(p: ChartPoint) -> np.ndarray:
    """Inverse of the input layout of :func:`transform`."""
    if p.angles is None:
        return np.asarray(p.coords, dtype=float)
    return np.concatenate([p.coords, p.angles])


def _to_jacobi_any(point: np.ndarray, src: str, N: int, a) -> np.ndarray:
    if src == "cartesian":
        return to_jacobi(point).coords
    if src == "jacobi":
        return point
    p = ChartPoint(src, point[:2], point[2:])
    if src == "spherical":
        return from_spherical(p, N)
    if src == "parabolic":
        return from_parabolic(p, N)
    return from_elliptic(p, _need_a(a), N)


def _from_jacobi_any(y: np.ndarray, dst: str, a) -> ChartPoint:
    if dst == "jacobi":
        return ChartPoint("jacobi", y)
    if dst == "cartesian":
        return ChartPoint("cartesian", jacobi_matrix(len(y)).inverse(y))
    if dst == "spherical":
        return to_spherical(y)
    if dst == "parabolic":
        return to_parabolic(y)
    if dst == "elliptic":
        return to_elliptic(y, _need_a(a))
    raise ValueError(f"unknown chart {dst!r}")


def _need_a(a):
    if a is None:
        raise ChartError("parameter", "elliptic chart needs --a")
    return float(a)
