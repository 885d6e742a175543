"""Riemannian geometry on a single coordinate chart from exact metric jets.

Index conventions used throughout the package:

* metric jets:      ``g[i, j]``, ``dg[k, i, j] = d_k g_ij``,
                    ``d2g[l, k, i, j] = d_l d_k g_ij``
* Christoffels:     ``gamma[k, i, j] = Gamma^k_ij``
* curvature:        ``riem[i, j, k, l]`` is the fully covariant tensor,
                    normalized so that on a round sphere of radius r
                    ``riem = (1/r^2) (g_ik g_jl - g_il g_jk)``; with this sign
                    ``sec(u, v) = R(u,v,u,v) / |u ^ v|^2`` and the Ricci form
                    ``Ric[j, l] = g^{ik} riem[i, j, k, l]`` is positive on
                    spheres.

All derivative data is exact (supplied by the chart's jet evaluator); finite
differences appear only in tests as an independent cross-check.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import (
    DegenerateMetricError,
    DegeneratePlaneError,
    OutOfChartError,
)

Array = np.ndarray

#: Relative area tolerance below which two vectors are considered coplanar.
PLANE_TOL = 1e-12

#: Fraction of the box width kept as margin on each side when sampling.
DEFAULT_MARGIN = 0.1


@dataclass(frozen=True)
class ChartPoint:
    """A point given by its chart coordinates."""

    coords: Array

    def __post_init__(self):
        object.__setattr__(
            self, "coords", np.array(self.coords, dtype=float, copy=True)
        )

    @property
    def dim(self) -> int:
        return self.coords.shape[0]


@dataclass(frozen=True)
class MetricJet:
    """Metric components with exact first and second chart derivatives."""

    g: Array
    dg: Array
    d2g: Array

    def validate(self, tol: float = 1e-12) -> None:
        """Check the symmetry invariants; raises AssertionError on failure."""
        assert np.allclose(self.g, self.g.T, atol=tol)
        assert np.allclose(self.dg, np.swapaxes(self.dg, 1, 2), atol=tol)
        assert np.allclose(self.d2g, np.swapaxes(self.d2g, 2, 3), atol=tol)
        assert np.allclose(self.d2g, np.swapaxes(self.d2g, 0, 1), atol=tol)


@dataclass(frozen=True)
class ChartManifold:
    """A Riemannian manifold seen through one coordinate chart.

    ``metric_jet`` maps chart coordinates to a :class:`MetricJet` and must be
    smooth on ``chart_box`` (an array of shape ``(dim, 2)`` with the low/high
    bounds per axis).
    """

    dim: int
    metric_jet: Callable[[Array], MetricJet]
    chart_box: Array
    name: str = "chart"
    margin: float = DEFAULT_MARGIN

    def __post_init__(self):
        box = np.array(self.chart_box, dtype=float)
        if box.shape != (self.dim, 2):
            raise ValueError(f"chart_box must have shape ({self.dim}, 2)")
        object.__setattr__(self, "chart_box", box)

    def point(self, coords) -> ChartPoint:
        p = ChartPoint(np.asarray(coords, dtype=float))
        if p.dim != self.dim:
            raise ValueError(f"{self.name}: point has dimension {p.dim}, expected {self.dim}")
        return p

    def contains(self, p: ChartPoint, with_margin: bool = False) -> bool:
        lo, hi = self.chart_box[:, 0], self.chart_box[:, 1]
        if with_margin:
            w = (hi - lo) * self.margin
            lo, hi = lo + w, hi - w
        return bool(np.all(p.coords > lo) and np.all(p.coords < hi))

    def sample_box(self) -> Array:
        """The chart box shrunk by the boundary margin."""
        lo, hi = self.chart_box[:, 0], self.chart_box[:, 1]
        w = (hi - lo) * self.margin
        return np.stack([lo + w, hi - w], axis=1)

    def jet(self, p: ChartPoint) -> MetricJet:
        if not self.contains(p):
            raise OutOfChartError(
                f"{self.name}: point {p.coords} outside chart box"
            )
        return self.metric_jet(p.coords)


# ---------------------------------------------------------------------------
# Built-in charts
# ---------------------------------------------------------------------------

def sphere_chart(dim: int, radius: float = 1.0, box_halfwidth: float = 20.0,
                 name: str | None = None) -> ChartManifold:
    """Round sphere of the given radius in stereographic coordinates.

    The metric is conformally flat, ``g_ij = u(x) delta_ij`` with
    ``u = 4 r^4 / (r^2 + |x|^2)^2``, which has closed-form derivatives of
    every order.
    """
    r2 = float(radius) ** 2
    eye = np.eye(dim)

    def jet(x: Array) -> MetricJet:
        q = r2 + float(x @ x)
        u = 4.0 * r2 * r2 / (q * q)
        du = -16.0 * r2 * r2 * x / q ** 3                      # du[k]
        d2u = (-16.0 * r2 * r2 / q ** 3) * eye \
            + (96.0 * r2 * r2 / q ** 4) * np.outer(x, x)       # d2u[l, k]
        g = u * eye
        dg = du[:, None, None] * eye[None, :, :]
        d2g = d2u[:, :, None, None] * eye[None, None, :, :]
        return MetricJet(g, dg, d2g)

    box = np.array([[-box_halfwidth, box_halfwidth]] * dim)
    return ChartManifold(dim, jet, box, name or f"S{dim}(r={radius:g})")


def constant_metric_chart(dim: int, matrix=None, box_halfwidth: float = 50.0,
                          name: str = "flat") -> ChartManifold:
    """Chart with a constant (flat) metric: tori, circles, Euclidean space."""
    g0 = np.eye(dim) if matrix is None else np.array(matrix, dtype=float)
    if g0.shape != (dim, dim):
        raise ValueError("metric matrix has wrong shape")
    zeros1 = np.zeros((dim, dim, dim))
    zeros2 = np.zeros((dim, dim, dim, dim))

    def jet(x: Array) -> MetricJet:
        return MetricJet(g0, zeros1, zeros2)

    box = np.array([[-box_halfwidth, box_halfwidth]] * dim)
    return ChartManifold(dim, jet, box, name)


# ---------------------------------------------------------------------------
# Connection and curvature from a jet
# ---------------------------------------------------------------------------

def metric_inverse(g: Array) -> Array:
    try:
        ginv = np.linalg.inv(g)
    except np.linalg.LinAlgError as exc:
        raise DegenerateMetricError(f"singular metric: {exc}") from exc
    if not np.all(np.isfinite(ginv)):
        raise DegenerateMetricError("metric inverse is not finite")
    return ginv


def _christoffel_numerator(dg: Array) -> Array:
    # T[i, j, l] = d_i g_jl + d_j g_il - d_l g_ij
    return dg + np.transpose(dg, (1, 0, 2)) - np.transpose(dg, (1, 2, 0))


def christoffel_from_jet(jet: MetricJet) -> Array:
    """Levi-Civita symbols ``Gamma^k_ij`` of the metric jet."""
    ginv = metric_inverse(jet.g)
    T = _christoffel_numerator(jet.dg)
    return 0.5 * np.einsum("kl,ijl->kij", ginv, T)


def christoffel_derivative_from_jet(jet: MetricJet) -> Array:
    """Exact partials ``dgamma[a, k, i, j] = d_a Gamma^k_ij``."""
    ginv = metric_inverse(jet.g)
    dg, d2g = jet.dg, jet.d2g
    T = _christoffel_numerator(dg)
    # dT[a, i, j, l] = d_a T[i, j, l]
    dT = d2g + np.transpose(d2g, (0, 2, 1, 3)) - np.transpose(d2g, (0, 2, 3, 1))
    dginv = -np.einsum("ma,kab,bs->kms", ginv, dg, ginv)  # dginv[k, m, s] = d_k g^{ms}
    return 0.5 * (np.einsum("akl,ijl->akij", dginv, T)
                  + np.einsum("kl,aijl->akij", ginv, dT))


def riemann_from_jet(jet: MetricJet) -> Array:
    """Fully covariant curvature tensor ``riem[i, j, k, l]``.

    Sign convention: ``riem[i,j,k,l] = g_im (d_k Gamma^m_lj - d_l Gamma^m_kj
    + Gamma^m_ks Gamma^s_lj - Gamma^m_ls Gamma^s_kj)``, which gives
    ``R(u,v,u,v) > 0`` on round spheres.
    """
    g = jet.g
    gamma = christoffel_from_jet(jet)
    dgamma = christoffel_derivative_from_jet(jet)
    curv_op = (np.einsum("kmlj->mjkl", dgamma)
               - np.einsum("lmkj->mjkl", dgamma)
               + np.einsum("mks,slj->mjkl", gamma, gamma)
               - np.einsum("mls,skj->mjkl", gamma, gamma))
    return np.einsum("im,mjkl->ijkl", g, curv_op)


def ricci_from_jet(jet: MetricJet) -> tuple[Array, Array]:
    """Ricci data ``(bilinear form, operator)`` of the metric jet.

    The bilinear form is ``Ric[j, l] = g^{ik} riem[i, j, k, l]`` (positive on
    spheres); the operator raises its first index with the metric, so that
    ``Ric(v, w) = g(ric_op v, w)``.
    """
    ginv = metric_inverse(jet.g)
    riem = riemann_from_jet(jet)
    ric = np.einsum("ik,ijkl->jl", ginv, riem)
    ric_op = ginv @ ric
    return ric, ric_op


# Point-level wrappers matching the operation map.

def christoffel_at(man: ChartManifold, p: ChartPoint) -> Array:
    return christoffel_from_jet(man.jet(p))


def riemann_at(man: ChartManifold, p: ChartPoint) -> Array:
    return riemann_from_jet(man.jet(p))


def ricci_at(man: ChartManifold, p: ChartPoint) -> tuple[Array, Array]:
    return ricci_from_jet(man.jet(p))


def sectional_from_data(riem: Array, g: Array, u: Array, v: Array) -> float:
    """Sectional curvature of span(u, v) from precomputed tensors."""
    uu = float(u @ g @ u)
    vv = float(v @ g @ v)
    uv = float(u @ g @ v)
    area2 = uu * vv - uv * uv
    if area2 < PLANE_TOL * uu * vv or area2 <= 0.0:
        raise DegeneratePlaneError("vectors span no plane")
    num = float(np.einsum("ijkl,i,j,k,l->", riem, u, v, u, v))
    return num / area2


def sectional_curvature(man: ChartManifold, p: ChartPoint,
                        u: Array, v: Array) -> float:
    jet = man.jet(p)
    return sectional_from_data(riemann_from_jet(jet), jet.g, np.asarray(u, float),
                               np.asarray(v, float))


# ---------------------------------------------------------------------------
# Generalized symmetric eigenproblem
# ---------------------------------------------------------------------------

def sym_eigen(phi: Array, g: Array, tol: float = 1e-12,
              max_sweeps: int = 100) -> tuple[Array, Array]:
    """Eigenvalues and g-orthonormal eigenbasis of ``phi`` relative to ``g``.

    Solves ``phi v = lam g v`` for symmetric ``phi`` and positive definite
    ``g`` by congruence reduction (``g = L L^T``) followed by cyclic Jacobi
    iteration on ``L^-1 phi L^-T``.  Dimensions here are tiny, so robustness
    is preferred over speed.

    Returns ``(vals, vecs)`` with ``vals`` ascending and ``vecs[:, i]`` the
    eigenvector for ``vals[i]``; the basis satisfies ``v_i^T g v_j = delta_ij``.
    """
    phi = np.asarray(phi, dtype=float)
    g = np.asarray(g, dtype=float)
    try:
        L = np.linalg.cholesky(g)
    except np.linalg.LinAlgError as exc:
        raise DegenerateMetricError(
            f"metric not positive definite: {exc}") from exc
    B = np.linalg.solve(L, np.linalg.solve(L, phi.T).T)
    B = 0.5 * (B + B.T)
    k = B.shape[0]
    V = np.eye(k)
    tol_eff = tol * max(1.0, float(np.linalg.norm(B)))

    for _ in range(max_sweeps):
        off = float(np.max(np.abs(B - np.diag(np.diag(B))))) if k > 1 else 0.0
        if off <= tol_eff:
            break
        for p in range(k - 1):
            for q in range(p + 1, k):
                apq = B[p, q]
                if abs(apq) <= tol_eff:
                    continue
                tau = (B[q, q] - B[p, p]) / (2.0 * apq)
                t = np.sign(tau) / (abs(tau) + np.hypot(1.0, tau)) if tau != 0.0 else 1.0
                c = 1.0 / np.hypot(1.0, t)
                s = t * c
                # B <- J^T B J with J the rotation in the (p, q) plane
                bp, bq = B[:, p].copy(), B[:, q].copy()
                B[:, p] = c * bp - s * bq
                B[:, q] = s * bp + c * bq
                bp, bq = B[p, :].copy(), B[q, :].copy()
                B[p, :] = c * bp - s * bq
                B[q, :] = s * bp + c * bq
                B[p, q] = B[q, p] = 0.0
                vp, vq = V[:, p].copy(), V[:, q].copy()
                V[:, p] = c * vp - s * vq
                V[:, q] = s * vp + c * vq

    vals = np.diag(B).copy()
    vecs = np.linalg.solve(L.T, V)
    order = np.argsort(vals, kind="stable")
    return vals[order], vecs[:, order]
