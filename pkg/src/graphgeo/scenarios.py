"""Built-in (domain, target, map) scenarios with exact jets.

Every scenario declares the properties it is expected to have; the test
suite re-verifies each declaration numerically, and properties listed as
``None`` are measured rather than asserted.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product as iter_product

import numpy as np

from .chart_manifold import ChartManifold, ChartPoint, constant_metric_chart, sphere_chart
from .errors import UnknownScenarioError
from .graph_map import MapJet, SmoothMap

Array = np.ndarray


@dataclass(frozen=True)
class ExpectedProperties:
    """Declared behavior of a scenario; ``None`` means measured only."""

    minimal: bool | None
    totally_geodesic: bool | None
    lambda_field: str
    isometric: bool = False


@dataclass(frozen=True)
class Scenario:
    name: str
    f: SmoothMap
    expected: ExpectedProperties
    sample_box: Array
    grid_shape: tuple[int, ...]
    sigma: float

    @property
    def domain(self) -> ChartManifold:
        return self.f.domain

    @property
    def target(self) -> ChartManifold:
        return self.f.target

    def grid_points(self, shape: tuple[int, ...] | None = None,
                    box: Array | None = None) -> list[ChartPoint]:
        """Deterministic rectangular grid of chart points over the sample box."""
        shape = shape or self.grid_shape
        box = self.sample_box if box is None else np.asarray(box, dtype=float)
        axes = [np.linspace(box[i, 0], box[i, 1], shape[i])
                for i in range(self.domain.dim)]
        return [self.domain.point(np.array(c)) for c in iter_product(*axes)]

    def random_points(self, count: int, rng: np.random.Generator,
                      box: Array | None = None) -> list[ChartPoint]:
        box = self.sample_box if box is None else np.asarray(box, dtype=float)
        lo, hi = box[:, 0], box[:, 1]
        return [self.domain.point(rng.uniform(lo, hi)) for _ in range(count)]


# ---------------------------------------------------------------------------
# Map builders
# ---------------------------------------------------------------------------

def constant_map(domain: ChartManifold, target: ChartManifold,
                 value, name: str = "constant") -> SmoothMap:
    value = np.asarray(value, dtype=float)
    m, n = domain.dim, target.dim
    z2, z3 = np.zeros((n, m, m)), np.zeros((n, m, m, m))

    def jet(x: Array) -> MapJet:
        return MapJet(value.copy(), np.zeros((n, m)), z2, z3)

    return SmoothMap(domain, target, jet, name)


def linear_map(domain: ChartManifold, target: ChartManifold, matrix,
               shift=None, name: str = "linear") -> SmoothMap:
    Q = np.asarray(matrix, dtype=float)
    m, n = domain.dim, target.dim
    if Q.shape != (n, m):
        raise ValueError(f"matrix must have shape ({n}, {m})")
    b = np.zeros(n) if shift is None else np.asarray(shift, dtype=float)
    z2, z3 = np.zeros((n, m, m)), np.zeros((n, m, m, m))

    def jet(x: Array) -> MapJet:
        return MapJet(Q @ x + b, Q.copy(), z2, z3)

    return SmoothMap(domain, target, jet, name)


def complex_power_map(domain: ChartManifold, target: ChartManifold,
                      k: int, scale: float = 1.0,
                      name: str | None = None) -> SmoothMap:
    """The plane map ``w -> scale * w^k`` in real coordinates, exact jets.

    On stereographic sphere charts this is a holomorphic map of the sphere.
    Supported powers: 1, 2, 3 (hand-derived polynomial jets).
    """
    if domain.dim != 2 or target.dim != 2:
        raise ValueError("complex power maps are two-dimensional")
    if k not in (1, 2, 3):
        raise ValueError("only powers 1, 2, 3 are implemented")
    t = float(scale)

    def jet(xy: Array) -> MapJet:
        x, y = xy
        d3 = np.zeros((2, 2, 2, 2))
        if k == 1:
            val = np.array([x, y])
            d1 = np.array([[1.0, 0.0], [0.0, 1.0]])
            d2 = np.zeros((2, 2, 2))
        elif k == 2:
            val = np.array([x * x - y * y, 2.0 * x * y])
            d1 = np.array([[2 * x, -2 * y], [2 * y, 2 * x]])
            d2 = np.array([[[2.0, 0.0], [0.0, -2.0]],
                           [[0.0, 2.0], [2.0, 0.0]]])
        else:
            val = np.array([x ** 3 - 3 * x * y * y, 3 * x * x * y - y ** 3])
            d1 = np.array([[3 * x * x - 3 * y * y, -6 * x * y],
                           [6 * x * y, 3 * x * x - 3 * y * y]])
            d2 = np.array([[[6 * x, -6 * y], [-6 * y, -6 * x]],
                           [[6 * y, 6 * x], [6 * x, -6 * y]]])
            d3 = np.zeros((2, 2, 2, 2))
            # f^1 = x^3 - 3xy^2: xxx = 6, xyy/yxy/yyx = -6
            d3[0, 0, 0, 0] = 6.0
            d3[0, 0, 1, 1] = d3[0, 1, 0, 1] = d3[0, 1, 1, 0] = -6.0
            # f^2 = 3x^2y - y^3: xxy perms = 6, yyy = -6
            d3[1, 0, 0, 1] = d3[1, 0, 1, 0] = d3[1, 1, 0, 0] = 6.0
            d3[1, 1, 1, 1] = -6.0
        return MapJet(t * val, t * d1, t * d2, t * d3)

    return SmoothMap(domain, target, jet, name or f"w^{k}" + (f"*{t:g}" if t != 1.0 else ""))


def precompose_linear(f: SmoothMap, matrix, name: str | None = None) -> SmoothMap:
    """The composition ``x -> f(Q x)`` with exact chain-rule jets."""
    Q = np.asarray(matrix, dtype=float)

    def jet(x: Array) -> MapJet:
        inner = f.jet_fn(Q @ x)
        d1 = np.einsum("ab,bi->ai", inner.d1, Q)
        d2 = np.einsum("abc,bi,cj->aij", inner.d2, Q, Q)
        d3 = None
        if inner.d3 is not None:
            d3 = np.einsum("abcd,bi,cj,dk->aijk", inner.d3, Q, Q, Q)
        return MapJet(inner.value, d1, d2, d3)

    return SmoothMap(f.domain, f.target, jet, name or f"{f.name}∘linear")


def rotation_matrix_2d(angle: float) -> Array:
    c, s = np.cos(angle), np.sin(angle)
    return np.array([[c, -s], [s, c]])


# ---------------------------------------------------------------------------
# Registry
# ---------------------------------------------------------------------------

def _box(halfwidth: float, dim: int) -> Array:
    return np.array([[-halfwidth, halfwidth]] * dim)


def registry() -> dict[str, Scenario]:
    """All built-in scenarios, keyed by name."""
    scenarios: list[Scenario] = []

    s2 = sphere_chart(2, 1.0)
    s3 = sphere_chart(3, 1.0)
    s2_half = sphere_chart(2, 0.5)
    s2_double = sphere_chart(2, 2.0)
    torus = constant_metric_chart(2, name="T2")
    circle = constant_metric_chart(1, name="S1")

    scenarios.append(Scenario(
        name="constant-s2",
        f=constant_map(s2, s2, [0.3, -0.2], name="const"),
        expected=ExpectedProperties(minimal=True, totally_geodesic=True,
                                    lambda_field="all zero"),
        sample_box=_box(1.2, 2), grid_shape=(20, 20), sigma=1.0))

    scenarios.append(Scenario(
        name="constant-s3",
        f=constant_map(s3, s2_double, [0.2, 0.1], name="const"),
        expected=ExpectedProperties(minimal=True, totally_geodesic=True,
                                    lambda_field="all zero"),
        sample_box=_box(1.0, 3), grid_shape=(6, 6, 6), sigma=1.0))

    scenarios.append(Scenario(
        name="identity-s2",
        f=linear_map(s2, s2, np.eye(2), name="id"),
        expected=ExpectedProperties(minimal=True, totally_geodesic=True,
                                    lambda_field="all one", isometric=True),
        sample_box=_box(1.2, 2), grid_shape=(20, 20), sigma=1.0))

    scenarios.append(Scenario(
        name="identity-s3",
        f=linear_map(s3, s3, np.eye(3), name="id"),
        expected=ExpectedProperties(minimal=True, totally_geodesic=True,
                                    lambda_field="all one", isometric=True),
        sample_box=_box(1.0, 3), grid_shape=(6, 6, 6), sigma=1.0))

    scenarios.append(Scenario(
        name="rotation-s2",
        f=linear_map(s2, s2, rotation_matrix_2d(np.pi / 5), name="rot"),
        expected=ExpectedProperties(minimal=True, totally_geodesic=True,
                                    lambda_field="all one", isometric=True),
        sample_box=_box(1.2, 2), grid_shape=(20, 20), sigma=1.0))

    scenarios.append(Scenario(
        name="holo-w2",
        f=complex_power_map(s2, s2, 2),
        expected=ExpectedProperties(minimal=True, totally_geodesic=False,
                                    lambda_field="conformal, 2|w|(1+|w|^2)/(1+|w|^4)"),
        sample_box=_box(1.2, 2), grid_shape=(20, 20), sigma=1.0))

    scenarios.append(Scenario(
        name="holo-w3",
        f=complex_power_map(s2, s2, 3),
        expected=ExpectedProperties(minimal=True, totally_geodesic=False,
                                    lambda_field="conformal, 3|w|^2(1+|w|^2)/(1+|w|^6)"),
        sample_box=_box(1.1, 2), grid_shape=(20, 20), sigma=1.0))

    scenarios.append(Scenario(
        name="conformal-shrink",
        f=complex_power_map(s2, s2, 1, scale=0.5, name="w/2"),
        expected=ExpectedProperties(minimal=True, totally_geodesic=False,
                                    lambda_field="conformal, <1 for |w|^2<2, >1 past it"),
        sample_box=_box(1.8, 2), grid_shape=(20, 20), sigma=1.0))

    scenarios.append(Scenario(
        name="torus-linear",
        f=linear_map(torus, torus, [[2.0, 1.0], [1.0, 1.0]], name="Qx"),
        expected=ExpectedProperties(minimal=True, totally_geodesic=True,
                                    lambda_field="constant, det-1 pair"),
        sample_box=_box(2.0, 2), grid_shape=(20, 20), sigma=1.0))

    scenarios.append(Scenario(
        name="proj-s3-s1",
        f=linear_map(s3, circle, [[0.4, 0.0, 0.0]], name="0.4*x1"),
        expected=ExpectedProperties(minimal=False, totally_geodesic=False,
                                    lambda_field="rank one"),
        sample_box=_box(1.0, 3), grid_shape=(6, 6, 6), sigma=1.0))

    scenarios.append(Scenario(
        name="scaled-sphere-0.5",
        f=linear_map(s2, s2_half, 0.5 * np.eye(2), name="0.5x"),
        expected=ExpectedProperties(minimal=None, totally_geodesic=None,
                                    lambda_field="constant 0.5"),
        sample_box=_box(1.2, 2), grid_shape=(20, 20), sigma=1.0))

    scenarios.append(Scenario(
        name="scaled-sphere-2.0",
        f=linear_map(s2, s2_double, 2.0 * np.eye(2), name="2x"),
        expected=ExpectedProperties(minimal=None, totally_geodesic=None,
                                    lambda_field="constant 2"),
        sample_box=_box(1.2, 2), grid_shape=(20, 20), sigma=1.0))

    return {s.name: s for s in scenarios}


def get(name: str) -> Scenario:
    reg = registry()
    if name not in reg:
        raise UnknownScenarioError(
            f"unknown scenario {name!r}; available: {', '.join(sorted(reg))}")
    return reg[name]


# ---------------------------------------------------------------------------
# Jet self-test
# ---------------------------------------------------------------------------

@dataclass
class JetCheck:
    label: str
    disc_h: float
    disc_half: float

    # Below this the discrepancy is cancellation noise, not truncation error,
    # and no h-convergence can be observed (zero or polynomial jets).
    EXACT_FLOOR = 1e-10

    @property
    def exact(self) -> bool:
        return self.disc_h < self.EXACT_FLOOR

    @property
    def ratio(self) -> float:
        return self.disc_h / self.disc_half if self.disc_half > 0 else np.inf

    @property
    def ok(self) -> bool:
        return self.exact or 3.5 <= self.ratio <= 4.5


def _central_diff(fn, x: Array, h: float) -> Array:
    out = []
    for k in range(x.size):
        e = np.zeros_like(x)
        e[k] = h
        out.append((fn(x + e) - fn(x - e)) / (2.0 * h))
    return np.stack(out, axis=0)


def jets_selftest(scenario: Scenario, h: float = 1e-4,
                  points: list[ChartPoint] | None = None) -> list[JetCheck]:
    """Check every exact jet against central differences of the order below.

    Each discrepancy must either vanish (exactly-zero jets) or shrink by a
    factor of about four when the step is halved.
    """
    f = scenario.f
    if points is None:
        rng = np.random.default_rng(7)
        points = scenario.random_points(3, rng)
    checks: list[JetCheck] = []

    def jet_of(x):
        return f.jet_fn(x)

    def disc(fn_val, fn_exact, x, step):
        fd = _central_diff(fn_val, x, step)
        return float(np.abs(fd - fn_exact(x)).max())

    for p in points:
        x = p.coords
        pairs = [
            ("f:d1", lambda y: jet_of(y).value,
             lambda y: jet_of(y).d1.T),
            ("f:d2", lambda y: jet_of(y).d1,
             lambda y: np.moveaxis(jet_of(y).d2, 1, 0)),
            ("f:d3", lambda y: jet_of(y).d2,
             lambda y: np.moveaxis(jet_of(y).d3, 1, 0)),
            ("gM:d1", lambda y: f.domain.metric_jet(y).g,
             lambda y: f.domain.metric_jet(y).dg),
            ("gM:d2", lambda y: f.domain.metric_jet(y).dg,
             lambda y: f.domain.metric_jet(y).d2g),
        ]
        for label, val_fn, exact_fn in pairs:
            checks.append(JetCheck(
                label=f"{label}@{np.round(x, 3)}",
                disc_h=disc(val_fn, exact_fn, x, h),
                disc_half=disc(val_fn, exact_fn, x, h / 2.0)))

        img = f.jet_fn(x).value
        for label, val_fn, exact_fn in [
            ("gN:d1", lambda y: f.target.metric_jet(y).g,
             lambda y: f.target.metric_jet(y).dg),
            ("gN:d2", lambda y: f.target.metric_jet(y).dg,
             lambda y: f.target.metric_jet(y).d2g),
        ]:
            checks.append(JetCheck(
                label=f"{label}@{np.round(img, 3)}",
                disc_h=disc(val_fn, exact_fn, img, h),
                disc_half=disc(val_fn, exact_fn, img, h / 2.0)))
    return checks
