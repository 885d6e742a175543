"""Maps between chart manifolds and the geometry of their graphs.

A :class:`SmoothMap` carries exact jets of the map up to third order.  From
these, the module computes the pullback metric and its derivatives, the
metric induced on the domain by the graph embedding, the singular values of
the differential, and the adapted orthonormal frames of the graph's tangent
and normal spaces.

Map jet layout: ``value[a]``, ``d1[a, i] = d_i f^a``, ``d2[a, i, j]``,
``d3[a, i, j, k]``, symmetric in all derivative indices.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .chart_manifold import (
    ChartManifold,
    ChartPoint,
    MetricJet,
    metric_inverse,
    sym_eigen,
)
from .errors import (
    CapabilityError,
    FrameConstructionError,
    InvalidParameterError,
    OutOfChartError,
)
from .product_space import ProductPoint, ProductSpace, SplitVector

Array = np.ndarray

#: A singular value counts toward the rank iff it exceeds this tolerance
#: times ``(1 + lambda_max)``.
RANK_TOL = 1e-8

#: Default tolerance for the internal verification of adapted frames.
FRAME_VERIFY_TOL = 1e-8


@dataclass(frozen=True)
class MapJet:
    value: Array
    d1: Array
    d2: Array
    d3: Array | None = None


@dataclass(frozen=True)
class SmoothMap:
    """A chart-to-chart map with an exact jet evaluator up to order three."""

    domain: ChartManifold
    target: ChartManifold
    jet_fn: Callable[[Array], MapJet]
    name: str = "map"

    def jet(self, p: ChartPoint) -> MapJet:
        if not self.domain.contains(p):
            raise OutOfChartError(
                f"{self.name}: point {p.coords} outside domain chart")
        jet = self.jet_fn(p.coords)
        image = ChartPoint(jet.value)
        if not self.target.contains(image):
            raise OutOfChartError(
                f"{self.name}: image {jet.value} outside target chart")
        return jet

    def image_point(self, p: ChartPoint) -> ChartPoint:
        return ChartPoint(self.jet(p).value)

    def product_space(self) -> ProductSpace:
        return ProductSpace(self.domain, self.target)

    def product_point(self, p: ChartPoint) -> ProductPoint:
        return ProductPoint(p, self.image_point(p))


@dataclass(frozen=True)
class GraphFrameData:
    """Singular values and adapted frames of the graph at one point.

    ``lambdas`` are ascending; ``alpha[:, i]`` / ``beta[:, i]`` / ``e[:, i]``
    are basis vectors in chart components; ``e_tilde`` / ``xi`` are the
    product-orthonormal tangent and normal frames of the graph as split
    vectors.
    """

    lambdas: Array
    rank: int
    alpha: Array
    beta: Array
    e: Array
    e_tilde: tuple[SplitVector, ...]
    xi: tuple[SplitVector, ...]


# ---------------------------------------------------------------------------
# Pullback metric and its exact derivatives
# ---------------------------------------------------------------------------

def pullback_metric_at(f: SmoothMap, p: ChartPoint) -> Array:
    """Components of the pullback of the target metric, ``d_i f^a d_j f^b h_ab``."""
    jet = f.jet(p)
    h = f.target.jet(ChartPoint(jet.value)).g
    return np.einsum("ai,bj,ab->ij", jet.d1, jet.d1, h)


def pullback_metric_jet(fjet: MapJet, hjet: MetricJet,
                        order: int = 2) -> tuple[Array, Array | None, Array | None]:
    """Pullback metric with exact first (and second) chart derivatives.

    Second derivatives consume the order-3 jet of the map and the order-2
    jet of the target metric; pass ``order=1`` when only first derivatives
    are needed.
    """
    d1, d2, d3 = fjet.d1, fjet.d2, fjet.d3
    h, dh, d2h = hjet.g, hjet.dg, hjet.d2g

    P = np.einsum("ai,bj,ab->ij", d1, d1, h)
    if order < 1:
        return P, None, None

    # dP[k, i, j] = d_k P_ij
    dP = (np.einsum("aki,bj,ab->kij", d2, d1, h)
          + np.einsum("ai,bkj,ab->kij", d1, d2, h)
          + np.einsum("ai,bj,cab,ck->kij", d1, d1, dh, d1))
    if order < 2:
        return P, dP, None

    if d3 is None:
        raise CapabilityError("second pullback derivatives need order-3 map jets")
    # d2P[l, k, i, j] = d_l d_k P_ij, by product and chain rule
    d2P = (np.einsum("alki,bj,ab->lkij", d3, d1, h)
           + np.einsum("aki,blj,ab->lkij", d2, d2, h)
           + np.einsum("aki,bj,cab,cl->lkij", d2, d1, dh, d1)
           + np.einsum("ali,bkj,ab->lkij", d2, d2, h)
           + np.einsum("ai,blkj,ab->lkij", d1, d3, h)
           + np.einsum("ai,bkj,cab,cl->lkij", d1, d2, dh, d1)
           + np.einsum("ali,bj,cab,ck->lkij", d2, d1, dh, d1)
           + np.einsum("ai,blj,cab,ck->lkij", d1, d2, dh, d1)
           + np.einsum("ai,bj,dcab,dl,ck->lkij", d1, d1, d2h, d1, d1)
           + np.einsum("ai,bj,cab,clk->lkij", d1, d1, dh, d2))
    return P, dP, d2P


def induced_metric_jet(f: SmoothMap, p: ChartPoint, order: int = 2) -> MetricJet:
    """Jet of the graph-induced metric ``g_M + f*(g_N)`` at ``p``."""
    fjet = f.jet(p)
    gm = f.domain.jet(p)
    hjet = f.target.jet(ChartPoint(fjet.value))
    P, dP, d2P = pullback_metric_jet(fjet, hjet, order=order)
    g = gm.g + P
    dg = gm.dg + dP if dP is not None else None
    d2g = gm.d2g + d2P if d2P is not None else None
    return MetricJet(g, dg, d2g)


def induced_manifold(f: SmoothMap) -> ChartManifold:
    """The domain manifold re-equipped with the graph-induced metric."""

    def jet(x: Array) -> MetricJet:
        return induced_metric_jet(f, ChartPoint(x), order=2)

    return ChartManifold(f.domain.dim, jet, f.domain.chart_box,
                         name=f"graph({f.name})", margin=f.domain.margin)


# ---------------------------------------------------------------------------
# Singular values and adapted frames
# ---------------------------------------------------------------------------

def _gram_schmidt_step(vec: Array, basis: list[Array], gram: Array) -> Array:
    """One stabilized Gram-Schmidt pass of ``vec`` against ``basis`` (g-inner)."""
    w = vec.copy()
    for _ in range(2):
        for b in basis:
            w = w - float(b @ gram @ w) * b
    return w


def singular_values_at(f: SmoothMap, p: ChartPoint,
                       rank_tol: float = RANK_TOL) -> GraphFrameData:
    """Singular value decomposition data of the differential at ``p``.

    Only the ``lambdas``, ``rank``, ``alpha`` and ``beta`` fields are
    populated; :func:`adapted_frames_at` fills in the graph frames.
    """
    fjet = f.jet(p)
    m, n = f.domain.dim, f.target.dim
    gm = f.domain.jet(p).g
    h = f.target.jet(ChartPoint(fjet.value)).g
    P = np.einsum("ai,bj,ab->ij", fjet.d1, fjet.d1, h)

    mu, alpha = sym_eigen(P, gm)
    mu = np.maximum(mu, 0.0)
    lam = np.sqrt(mu)
    lam_max = lam[-1]
    cut = rank_tol * (1.0 + lam_max)
    rank = int(np.sum(lam > cut))
    if rank > min(m, n):
        raise FrameConstructionError(
            f"rank {rank} exceeds min(dim M, dim N) = {min(m, n)}")

    # beta_{n-m+i} = df(alpha_i) / lambda_i for the positive singular values,
    # stabilized against the vectors already built; then any g_N-orthonormal
    # completion in the first n - r slots.
    beta = np.zeros((n, n))
    built: list[Array] = []
    for i in range(m - rank, m):
        w = fjet.d1 @ alpha[:, i] / lam[i]
        w = _gram_schmidt_step(w, built, h)
        norm = np.sqrt(float(w @ h @ w))
        if norm < 0.5:
            raise FrameConstructionError(
                f"collapsed image vector for singular value {lam[i]:.3e}")
        w = w / norm
        beta[:, n - m + i] = w
        built.append(w)
    completed = []
    for cand in np.eye(n).T:
        w = _gram_schmidt_step(cand, built, h)
        norm = np.sqrt(float(w @ h @ w))
        if norm > 1e-6:
            w = w / norm
            built.append(w)
            completed.append(w)
        if len(completed) == n - rank:
            break
    if len(completed) < n - rank:
        raise FrameConstructionError("could not complete target frame")
    for j, w in enumerate(completed):
        beta[:, j] = w

    return GraphFrameData(lambdas=lam, rank=rank, alpha=alpha, beta=beta,
                          e=np.zeros((m, 0)), e_tilde=(), xi=())


def adapted_frames_at(f: SmoothMap, p: ChartPoint,
                      verify_tol: float = FRAME_VERIFY_TOL,
                      rank_tol: float = RANK_TOL) -> GraphFrameData:
    """Complete adapted frames of the graph at ``p``.

    Builds, from the singular value decomposition, the orthonormal frames

    * ``e_i = alpha_i / sqrt(1 + lambda_i^2)``  (domain, induced metric),
    * ``e_tilde_i = (alpha_i (+) lambda_i beta_{n-m+i}) / sqrt(1+lambda_i^2)``
      (graph tangent space, product metric),
    * ``xi_i = beta_i`` or
      ``(-lambda_{i+m-n} alpha_{i+m-n} (+) beta_i) / sqrt(1+lambda_{i+m-n}^2)``
      (graph normal space, product metric),

    and verifies the evaluation identities of the split-signature form on
    them; a residual above ``verify_tol`` raises
    :class:`FrameConstructionError`.
    """
    svd = singular_values_at(f, p, rank_tol=rank_tol)
    m, n = f.domain.dim, f.target.dim
    lam, rank, alpha, beta = svd.lambdas, svd.rank, svd.alpha, svd.beta

    scale = 1.0 / np.sqrt(1.0 + lam ** 2)
    e = alpha * scale[None, :]

    e_tilde = []
    for i in range(m):
        fiber = lam[i] * beta[:, n - m + i] if i >= m - rank else np.zeros(n)
        e_tilde.append(SplitVector(scale[i] * alpha[:, i], scale[i] * fiber))

    xi = []
    for i in range(n):
        if i < n - rank:
            xi.append(SplitVector(np.zeros(m), beta[:, i]))
        else:
            j = i + m - n
            xi.append(SplitVector(-scale[j] * lam[j] * alpha[:, j],
                                  scale[j] * beta[:, i]))

    frames = GraphFrameData(lambdas=lam, rank=rank, alpha=alpha, beta=beta,
                            e=e, e_tilde=tuple(e_tilde), xi=tuple(xi))

    res = frame_formula_residual(f, p, frames)
    if res > verify_tol:
        raise FrameConstructionError(
            f"frame verification residual {res:.3e} exceeds {verify_tol:.1e}")
    return frames


def frame_formula_residual(f: SmoothMap, p: ChartPoint,
                           frames: GraphFrameData) -> float:
    """Worst residual of the split-form evaluation identities on the frames.

    Checks, against direct block evaluation of the split-signature form:
    the diagonal values ``(1-lambda_i^2)/(1+lambda_i^2)`` on the tangent
    frame, the two-case values on the normal frame, the paired off-diagonal
    values ``-2 lambda/(1+lambda^2)``, and orthonormality of both frames in
    the product metric.
    """
    prod = f.product_space()
    q = f.product_point(p)
    G = prod.metric_matrix(q)
    S = prod.s_matrix(q)
    m, n = f.domain.dim, f.target.dim
    lam, rank = frames.lambdas, frames.rank

    def stack(vs):
        return np.array([np.concatenate([v.m_part, v.n_part]) for v in vs]).T

    E = stack(frames.e_tilde)
    X = stack(frames.xi)

    res = 0.0
    diag = (1.0 - lam ** 2) / (1.0 + lam ** 2)
    res = max(res, float(np.abs(E.T @ S @ E - np.diag(diag)).max()))

    xi_diag = -np.ones(n)
    for i in range(n - rank, n):
        j = i + m - n
        xi_diag[i] = -(1.0 - lam[j] ** 2) / (1.0 + lam[j] ** 2)
    res = max(res, float(np.abs(X.T @ S @ X - np.diag(xi_diag)).max()))

    mixed = E.T @ S @ X
    expected = np.zeros((m, n))
    for i in range(rank):
        li = lam[m - rank + i]
        expected[m - rank + i, n - rank + i] = -2.0 * li / (1.0 + li ** 2)
    res = max(res, float(np.abs(mixed - expected).max()))

    res = max(res, float(np.abs(E.T @ G @ E - np.eye(m)).max()))
    res = max(res, float(np.abs(X.T @ G @ X - np.eye(n)).max()))
    res = max(res, float(np.abs(E.T @ G @ X).max()))

    g = induced_metric_jet(f, p, order=0).g
    res = max(res, float(np.abs(frames.e.T @ g @ frames.e - np.eye(m)).max()))
    return res


# ---------------------------------------------------------------------------
# The deficit tensor s = g_M - f*(g_N) and its shifted variant
# ---------------------------------------------------------------------------

def s_tensor_at(f: SmoothMap, p: ChartPoint) -> Array:
    """Chart components of the deficit tensor ``g_M - f*(g_N)``."""
    return f.domain.jet(p).g - pullback_metric_at(f, p)


def trace_s_at(f: SmoothMap, p: ChartPoint) -> float:
    """Trace of the deficit tensor with respect to the induced metric.

    Equals ``sum_i (1 - lambda_i^2) / (1 + lambda_i^2)`` over the singular
    values.
    """
    s = s_tensor_at(f, p)
    g = induced_metric_jet(f, p, order=0).g
    return float(np.einsum("ij,ji->", metric_inverse(g), s))


def shifted_s_at(f: SmoothMap, p: ChartPoint, c: float) -> Array:
    """The shifted tensor ``s - ((1-c)/(1+c)) g`` in chart components.

    Its eigenvalues relative to the induced metric are
    ``(1-lambda_i^2)/(1+lambda_i^2) - (1-c)/(1+c)``, so non-negativity
    encodes the bound ``lambda_max^2 <= c``.
    """
    if c <= 0.0:
        raise InvalidParameterError(f"shift parameter must be positive, got {c}")
    g = induced_metric_jet(f, p, order=0).g
    return s_tensor_at(f, p) - (1.0 - c) / (1.0 + c) * g
