"""Second fundamental form and mean curvature of the graph embedding.

The graph embedding sends a domain point x to (x, f(x)) in the product.
Its second fundamental tensor is computed in product-chart components,

    A(d_i, d_j)^C = d_i d_j F^C + Gamma^C_AB d_i F^A d_j F^B
                    - Gamma^k_ij(g) d_k F^C,

with the block product Christoffels and the Christoffels of the induced
metric, then contracted with the adapted orthonormal frame.  No normal
projection is applied; the tangential residual is reported as a diagnostic,
since for a correct computation it must vanish identically.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .chart_manifold import ChartPoint, christoffel_from_jet
from .graph_map import (
    GraphFrameData,
    SmoothMap,
    adapted_frames_at,
    induced_metric_jet,
)
from .product_space import SplitVector

Array = np.ndarray

#: Default mean-curvature threshold for calling a map minimal.  One order
#: looser than the totally-geodesic threshold: the mean curvature spends one
#: more derivative of the map.
MINIMAL_TOL = 1e-6

#: Default threshold on the second fundamental form for total geodesy.
TOTALLY_GEODESIC_TOL = 1e-8


@dataclass(frozen=True)
class EmbeddingJet:
    """Jet of the graph embedding in product-chart components."""

    value: Array   # (m + n,)
    d1: Array      # (m + n, m): identity block over d_i f^a
    d2: Array      # (m + n, m, m): zero block over d_i d_j f^a


@dataclass(frozen=True)
class ExtrinsicData:
    """Second fundamental form data at one point.

    ``a_frame_m`` / ``a_frame_n`` hold the factor components of
    ``A(e_i, e_j)`` in the adapted orthonormal frame (indices ``[i, j, :]``);
    ``a_coord_m`` / ``a_coord_n`` the same in chart-basis slots.
    """

    frames: GraphFrameData
    a_frame_m: Array
    a_frame_n: Array
    a_coord_m: Array
    a_coord_n: Array
    mean_curvature: SplitVector
    a_norm_sq: float
    h_norm: float
    tangency_residual: float

    def a(self, i: int, j: int) -> SplitVector:
        return SplitVector(self.a_frame_m[i, j], self.a_frame_n[i, j])

    def a_coord(self, u: Array, v: Array) -> SplitVector:
        """``A(u, v)`` for chart-component vectors ``u``, ``v``."""
        return SplitVector(
            np.einsum("ijc,i,j->c", self.a_coord_m, u, v),
            np.einsum("ijc,i,j->c", self.a_coord_n, u, v))


def graph_embedding_jet(f: SmoothMap, p: ChartPoint) -> EmbeddingJet:
    """Value, differential and Hessian of x -> (x, f(x)) in chart slots."""
    jet = f.jet(p)
    m, n = f.domain.dim, f.target.dim
    value = np.concatenate([p.coords, jet.value])
    d1 = np.vstack([np.eye(m), jet.d1])
    d2 = np.concatenate([np.zeros((m, m, m)), jet.d2], axis=0)
    return EmbeddingJet(value, d1, d2)


def second_fundamental_at(f: SmoothMap, p: ChartPoint,
                          frames: GraphFrameData | None = None) -> ExtrinsicData:
    """Second fundamental form, mean curvature and scalar invariants at ``p``."""
    fjet = f.jet(p)
    m, n = f.domain.dim, f.target.dim
    image = ChartPoint(fjet.value)

    gm_jet = f.domain.jet(p)
    gn_jet = f.target.jet(image)
    gamma_m = christoffel_from_jet(gm_jet)
    gamma_n = christoffel_from_jet(gn_jet)

    induced = induced_metric_jet(f, p, order=1)
    gamma_g = christoffel_from_jet(induced)

    # Factor components of A in chart-basis slots.  The domain part carries
    # the connection difference; the target part is the map Hessian corrected
    # by the induced connection.
    a_coord_m = np.einsum("kij->ijk", gamma_m - gamma_g)
    a_coord_n = (np.einsum("aij->ija", fjet.d2)
                 + np.einsum("abc,bi,cj->ija", gamma_n, fjet.d1, fjet.d1)
                 - np.einsum("kij,ak->ija", gamma_g, fjet.d1))

    if frames is None:
        frames = adapted_frames_at(f, p)
    e = frames.e
    a_frame_m = np.einsum("ijc,ip,jq->pqc", a_coord_m, e, e)
    a_frame_n = np.einsum("ijc,ip,jq->pqc", a_coord_n, e, e)

    H = SplitVector(np.einsum("iic->c", a_frame_m),
                    np.einsum("iic->c", a_frame_n))

    gm, gn = gm_jet.g, gn_jet.g
    a_norm_sq = float(np.einsum("ijc,cd,ijd->", a_frame_m, gm, a_frame_m)
                      + np.einsum("ijc,cd,ijd->", a_frame_n, gn, a_frame_n))
    h_norm = float(np.sqrt(H.m_part @ gm @ H.m_part + H.n_part @ gn @ H.n_part))

    # Gauss-formula diagnostic: A(e_i, e_j) must be product-orthogonal to
    # every tangent frame vector.
    tang = 0.0
    for k in range(m):
        et = frames.e_tilde[k]
        vals = (np.einsum("ijc,cd,d->ij", a_frame_m, gm, et.m_part)
                + np.einsum("ijc,cd,d->ij", a_frame_n, gn, et.n_part))
        tang = max(tang, float(np.abs(vals).max()))

    return ExtrinsicData(frames=frames, a_frame_m=a_frame_m,
                         a_frame_n=a_frame_n, a_coord_m=a_coord_m,
                         a_coord_n=a_coord_n, mean_curvature=H,
                         a_norm_sq=a_norm_sq, h_norm=h_norm,
                         tangency_residual=tang)


@dataclass(frozen=True)
class MinimalityReport:
    max_h_norm: float
    max_a_norm: float
    minimal_tol: float
    geodesic_tol: float
    points_checked: int

    @property
    def is_totally_geodesic(self) -> bool:
        return self.max_a_norm < self.geodesic_tol

    @property
    def is_minimal(self) -> bool:
        # total geodesy implies minimality regardless of the measured H
        return self.max_h_norm < self.minimal_tol or self.is_totally_geodesic


def minimality_report(f: SmoothMap, grid: list[ChartPoint],
                      minimal_tol: float = MINIMAL_TOL,
                      geodesic_tol: float = TOTALLY_GEODESIC_TOL) -> MinimalityReport:
    """Scan a grid and report minimality / total geodesy of the graph."""
    if not grid:
        raise ValueError("empty sample grid")
    max_h = 0.0
    max_a = 0.0
    for p in grid:
        ext = second_fundamental_at(f, p)
        max_h = max(max_h, ext.h_norm)
        max_a = max(max_a, np.sqrt(ext.a_norm_sq))
    return MinimalityReport(max_h_norm=max_h, max_a_norm=max_a,
                            minimal_tol=minimal_tol, geodesic_tol=geodesic_tol,
                            points_checked=len(grid))
