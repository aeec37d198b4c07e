"""Parametric surfaces, their first fundamental form and geodesics.

Geodesics solve ``u'' + e1 = 0, v'' + e2 = 0`` with
``e_j = G^j_11 p^2 + 2 G^j_12 p q + G^j_22 q^2`` and are launched with
``(u', v') = (cos theta, sin theta)``.  That is unit speed only where the
metric is the identity, so the integration parameter is not arclength in
general; the g-speed is nevertheless conserved along each ray.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from ..errors import DegenerateMetricError
from . import kernels
from .expr import Expr, add, compile_program, differentiate, div, evaluate, mul, num, parse_triple, sub

__all__ = [
    "SurfacePatch",
    "MetricData",
    "GeodesicState",
    "Geodesic",
    "GeodesicCircle",
    "DegenerateMetricWarning",
    "parse_surface",
    "metric_data",
    "shoot",
    "shoot_many",
    "geodesic_spray",
    "geodesic_circles",
    "canonical_angle",
    "TORUS",
    "UNIT_SPHERE",
    "SPHERE_POLAR_CHART",
    "PLANE",
]

TORUS = "((2+cos(v))*cos(u), (2+cos(v))*sin(u), sin(v))"
UNIT_SPHERE = "(cos(u)*cos(v), sin(u)*cos(v), sin(v))"
# stereographic chart centred on the north pole, with E = G = 1 at (0, 0)
SPHERE_POLAR_CHART = "(4*u/(4+u^2+v^2), 4*v/(4+u^2+v^2), (4-u^2-v^2)/(4+u^2+v^2))"
PLANE = "(u, v, 0)"

TWO_PI = 2.0 * math.pi


class DegenerateMetricWarning(UserWarning):
    pass


@dataclass(frozen=True)
class SurfacePatch:
    x: Expr
    y: Expr
    z: Expr
    text: str = ""

    @property
    def components(self) -> tuple:
        return (self.x, self.y, self.z)

    @cached_property
    def x_u(self) -> tuple:
        return tuple(differentiate(c, "u") for c in self.components)

    @cached_property
    def x_v(self) -> tuple:
        return tuple(differentiate(c, "v") for c in self.components)

    def point(self, u, v) -> np.ndarray:
        return np.stack([evaluate(c, u, v) for c in self.components], axis=-1)


def parse_surface(text: str) -> SurfacePatch:
    x, y, z = parse_triple(text)
    return SurfacePatch(x, y, z, text.strip())


def _dot(a, b) -> Expr:
    return add(add(mul(a[0], b[0]), mul(a[1], b[1])), mul(a[2], b[2]))


@dataclass
class MetricData:
    E: Expr
    F: Expr
    G: Expr
    partials: dict  # 'E_u', 'E_v', ... -> Expr
    christoffel: tuple  # christoffel[k][i][j] = Gamma^{k+1}_{i+1, j+1}
    code: np.ndarray = field(repr=False)
    consts: np.ndarray = field(repr=False)
    outputs: np.ndarray = field(repr=False)  # registers of E, F, G, E_u, E_v, F_u, F_v, G_u, G_v

    PROGRAMS = ("E", "F", "G", "E_u", "E_v", "F_u", "F_v", "G_u", "G_v")

    def first_form(self, u, v):
        vals = kernels.eval_programs(self.code, self.consts, self.outputs[:3], u, v)
        return vals[0], vals[1], vals[2]

    def check_regular(self, u: float, v: float) -> None:
        E, F, G = (float(np.ravel(x)[0]) for x in self.first_form(np.array([u]), np.array([v])))
        det = E * G - F * F
        if not (E > 0 and G > 0 and det > 1e-12 * (E + G) ** 2):
            raise DegenerateMetricError(u, v, det)

    def christoffel_at(self, u: float, v: float) -> np.ndarray:
        """Numeric Gamma[k][i][j] at one point."""
        return np.array([[[evaluate(g, u, v) for g in row] for row in plane] for plane in self.christoffel])

    def speed(self, u, v, p, q):
        E, F, G = self.first_form(u, v)
        return np.sqrt(E * p * p + 2.0 * F * p * q + G * q * q)


def metric_data(S: SurfacePatch) -> MetricData:
    xu, xv = S.x_u, S.x_v
    E, F, G = _dot(xu, xu), _dot(xu, xv), _dot(xv, xv)
    d = {n + "_" + w: differentiate(f, w) for n, f in (("E", E), ("F", F), ("G", G)) for w in "uv"}
    Eu, Ev, Fu, Fv, Gu, Gv = (d[k] for k in ("E_u", "E_v", "F_u", "F_v", "G_u", "G_v"))
    two = num(2)
    ga = {
        (0, 0, 0): add(sub(mul(Ev, F), mul(mul(two, Fu), F)), mul(Eu, G)),
        (1, 1, 1): add(sub(mul(Gv, E), mul(mul(two, Fv), F)), mul(Gu, F)),
        (1, 0, 0): sub(add(sub(num(0), mul(Ev, E)), mul(mul(two, Fu), E)), mul(Eu, F)),
        (0, 1, 1): sub(add(sub(num(0), mul(Gv, F)), mul(mul(two, Fv), G)), mul(Gu, G)),
        (0, 0, 1): sub(mul(Ev, G), mul(Gu, F)),
        (1, 0, 1): add(sub(num(0), mul(Ev, F)), mul(Gu, E)),
    }
    den = mul(two, sub(mul(E, G), mul(F, F)))
    gamma = [[[None, None], [None, None]] for _ in range(2)]
    for (k, i, j), num_expr in ga.items():
        g = div(num_expr, den)
        gamma[k][i][j] = g
        gamma[k][j][i] = g
    code, consts, outputs = compile_program([E, F, G, Eu, Ev, Fu, Fv, Gu, Gv])
    return MetricData(
        E=E, F=F, G=G, partials=d,
        christoffel=tuple(tuple(tuple(r) for r in plane) for plane in gamma),
        code=code,
        consts=consts,
        outputs=outputs,
    )


@dataclass
class GeodesicState:
    u: float
    v: float
    p: float
    q: float
    s: float = 0.0


@dataclass
class Geodesic:
    theta: float
    s: np.ndarray  # (n,) parameter values
    state: np.ndarray  # (n, 4) rows (u, v, p, q)
    xyz: np.ndarray  # (n, 3)
    truncated: bool = False

    @property
    def uv(self) -> np.ndarray:
        return self.state[:, :2]

    def __len__(self):
        return len(self.s)

    def final(self) -> GeodesicState:
        u, v, p, q = self.state[-1]
        return GeodesicState(float(u), float(v), float(p), float(q), float(self.s[-1]))

    def at(self, t: float):
        """``(u, v)`` at parameter ``t`` by cubic Hermite interpolation, or None
        if ``t`` lies outside the integrated range."""
        s = self.s
        if t < s[0] - 1e-12 or t > s[-1] + 1e-12:
            return None
        i = int(np.searchsorted(s, t, side="right")) - 1
        i = min(max(i, 0), len(s) - 2) if len(s) > 1 else 0
        if len(s) == 1:
            return tuple(self.state[0, :2])
        h = s[i + 1] - s[i]
        x = (t - s[i]) / h
        h00 = 2 * x**3 - 3 * x**2 + 1
        h10 = x**3 - 2 * x**2 + x
        h01 = -2 * x**3 + 3 * x**2
        h11 = x**3 - x**2
        y0, y1 = self.state[i], self.state[i + 1]
        out = h00 * y0[:2] + h10 * h * y0[2:] + h01 * y1[:2] + h11 * h * y1[2:]
        return float(out[0]), float(out[1])


def canonical_angle(theta: float) -> float:
    """``theta`` reduced mod 2 pi and rounded to 12 decimals, so that theta and
    theta + 2 pi launch bit-identical rays."""
    t = round(math.fmod(theta, TWO_PI), 12)
    if t < 0:
        t = round(t + TWO_PI, 12)
    if t >= round(TWO_PI, 12):
        t = 0.0
    return t + 0.0


def _schedule(r: float, step: float):
    if not r > 0:
        raise ValueError("radius must be positive")
    if not step > 0:
        raise ValueError("step must be positive")
    n = int(math.floor(r / step + 1e-9))
    last = r - n * step
    if last <= 1e-12 * max(1.0, r):
        last = 0.0
    s = step * np.arange(n + 1, dtype=float)
    if last:
        s = np.append(s, r)
    else:
        s[-1] = r if n else s[-1]
    return n, last, s


def shoot_many(S, a: float, b: float, thetas, r: float, step: float = 0.01, backend: str | None = None,
               metric: MetricData | None = None) -> list:
    if isinstance(S, str):
        S = parse_surface(S)
    md = metric if metric is not None else metric_data(S)
    md.check_regular(a, b)
    thetas = [canonical_angle(t) for t in thetas]
    init = np.array([[a, b, math.cos(t), math.sin(t)] for t in thetas], dtype=float)
    n, last, s = _schedule(r, step)
    traj, nvalid = kernels.rk4_batch(md.code, md.consts, md.outputs, init, step, n, last, backend=backend)
    out = []
    for i, t in enumerate(thetas):
        k = int(nvalid[i])
        st = traj[i, :k].copy()
        truncated = k < len(s)
        if truncated:
            warnings.warn(
                DegenerateMetricWarning(
                    f"metric degenerates along ray theta={t:.6g} near (u, v) = ({st[-1, 0]:.6g}, {st[-1, 1]:.6g}); "
                    f"path truncated at parameter {s[k - 1]:.6g}"
                ),
                stacklevel=2,
            )
        out.append(Geodesic(t, s[:k].copy(), st, S.point(st[:, 0], st[:, 1]), truncated))
    return out


def shoot(S, a: float, b: float, theta: float, r: float, step: float = 0.01, backend: str | None = None) -> Geodesic:
    return shoot_many(S, a, b, [theta], r, step, backend)[0]


def geodesic_spray(S, a: float, b: float, m: int, r: float, step: float = 0.01, backend: str | None = None,
                   metric: MetricData | None = None) -> list:
    """Rays at theta = 0, 2 pi/m, ..., 2 pi (m + 1 rays; the last repeats the first)."""
    if m < 1:
        raise ValueError("need at least one ray")
    thetas = [TWO_PI * i / m for i in range(m + 1)]
    return shoot_many(S, a, b, thetas, r, step, backend, metric)


@dataclass
class GeodesicCircle:
    t: float
    uv: np.ndarray  # (k, 2)
    xyz: np.ndarray  # (k, 3)
    self_intersecting: bool


def _segments_cross(P: np.ndarray) -> bool:
    """Heuristic self-intersection test for the polyline P (k, 2): bounding-box
    prefilter, then a proper-crossing orientation test on non-adjacent segments."""
    if len(P) < 4:
        return False
    A, B = P[:-1], P[1:]
    lo, hi = np.minimum(A, B), np.maximum(A, B)
    nseg = len(A)
    closed = np.allclose(P[0], P[-1], atol=1e-9)
    i, j = np.triu_indices(nseg, k=2)
    if closed:
        keep = ~((i == 0) & (j == nseg - 1))
        i, j = i[keep], j[keep]
    box = np.all(lo[i] <= hi[j], axis=1) & np.all(lo[j] <= hi[i], axis=1)
    i, j = i[box], j[box]
    if not len(i):
        return False

    def orient(p, q, r):
        return (q[:, 0] - p[:, 0]) * (r[:, 1] - p[:, 1]) - (q[:, 1] - p[:, 1]) * (r[:, 0] - p[:, 0])

    eps = 1e-12
    d1 = orient(A[i], B[i], A[j])
    d2 = orient(A[i], B[i], B[j])
    d3 = orient(A[j], B[j], A[i])
    d4 = orient(A[j], B[j], B[i])
    return bool(np.any((d1 * d2 < -eps) & (d3 * d4 < -eps)))


def geodesic_circles(S, a: float, b: float, m: int, r: float, spacing: float, step: float = 0.01,
                     backend: str | None = None, rays: list | None = None) -> list:
    """Join points at parameter t = spacing, 2 spacing, ..., <= r across the rays."""
    if not spacing > 0:
        raise ValueError("circle spacing must be positive")
    if isinstance(S, str):
        S = parse_surface(S)
    if rays is None:
        rays = geodesic_spray(S, a, b, m, r, step, backend)
    count = int(math.floor(r / spacing + 1e-9))
    circles = []
    for j in range(1, count + 1):
        t = j * spacing
        pts = [p for p in (ray.at(t) for ray in rays) if p is not None]
        uv = np.array(pts, dtype=float).reshape(-1, 2)
        xyz = S.point(uv[:, 0], uv[:, 1]) if len(uv) else np.zeros((0, 3))
        circles.append(GeodesicCircle(t, uv, xyz, _segments_cross(uv)))
    return circles
