"""Volumes of Euclidean balls and slabs, small-ball volume expansions and the
tube formula for hypersurfaces in CP^n.

The expansion convention is

    V_M(r) / V_flat(r) = 1 + c2 r^2 + c4 r^4 + ...,   V_flat(r) = (pi r^2)^n / n!

with ``d = 2n`` (``n`` half-integral for odd ``d``, ``n! = Gamma(n + 1)``).
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from fractions import Fraction
from numbers import Rational

import numpy as np

from .exact_forms import Scalar

__all__ = [
    "ball_volume",
    "unit_volume_radius",
    "slab_volume",
    "adaptive_simpson",
    "ExpansionInput",
    "c2",
    "c2_as_printed",
    "c4",
    "expansion_report",
    "expansion_input_from_spec",
    "sphere_expansion_input",
    "sphere_expansion_oracle",
    "sphere_ball_ratio",
    "is_flat_to_order",
    "tube_volume_cpn",
]


def ball_volume(d: int, r: float = 1.0) -> float:
    if d < 1:
        raise ValueError("dimension must be at least 1")
    if r < 0:
        raise ValueError("radius must be nonnegative")
    if r == 0:
        return 0.0
    n = d / 2.0
    return math.exp(n * math.log(math.pi * r * r) - math.lgamma(n + 1.0))


def _log_ball_volume(d: int, r: float) -> float:
    n = d / 2.0
    return n * math.log(math.pi) + d * math.log(r) - math.lgamma(n + 1.0)


def unit_volume_radius(d: int, tol: float = 1e-12) -> float:
    """Radius ``r_d`` with ``ball_volume(d, r_d) = 1``, by bisection.

    ``dV/dr = d V / r`` amplifies the radius error, hence the tight default.
    """
    if d < 1:
        raise ValueError("dimension must be at least 1")
    lo, hi = 0.0, 1.0
    while _log_ball_volume(d, hi) < 0:
        lo, hi = hi, 2.0 * hi
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if _log_ball_volume(d, mid) < 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def adaptive_simpson(f, a: float, b: float, tol: float = 1e-9, max_depth: int = 60) -> float:
    """Adaptive Simpson quadrature with Richardson correction."""
    if a == b:
        return 0.0

    def simpson(fa, fm, fb, h):
        return h * (fa + 4.0 * fm + fb) / 6.0

    fa, fb, fm = f(a), f(b), f(0.5 * (a + b))
    whole = simpson(fa, fm, fb, b - a)
    # explicit stack instead of recursion: (a, b, fa, fm, fb, whole, tol, depth)
    stack = [(a, b, fa, fm, fb, whole, tol, 0)]
    total = 0.0
    while stack:
        a0, b0, fa0, fm0, fb0, S, eps, depth = stack.pop()
        m = 0.5 * (a0 + b0)
        lm, rm = 0.5 * (a0 + m), 0.5 * (m + b0)
        flm, frm = f(lm), f(rm)
        left = simpson(fa0, flm, fm0, m - a0)
        right = simpson(fm0, frm, fb0, b0 - m)
        delta = left + right - S
        if depth >= max_depth or abs(delta) <= 15.0 * eps:
            total += left + right + delta / 15.0
        else:
            stack.append((a0, m, fa0, flm, fm0, left, eps / 2.0, depth + 1))
            stack.append((m, b0, fm0, frm, fb0, right, eps / 2.0, depth + 1))
    return total


def slab_volume(d: int, half_width: float, tol: float = 1e-9) -> float:
    """Volume of ``B(r_d) and R^{d-1} x [-w, w]`` where ``B(r_d)`` has unit volume."""
    if d < 2:
        raise ValueError("slab volume needs d >= 2")
    if half_width < 0:
        raise ValueError("half-width must be nonnegative")
    rd = unit_volume_radius(d)
    w = min(half_width, rd)
    if w == 0:
        return 0.0

    def section(t):
        rho2 = rd * rd - t * t
        return ball_volume(d - 1, math.sqrt(rho2)) if rho2 > 0 else 0.0

    return 2.0 * adaptive_simpson(section, 0.0, w, tol / 2.0)


# -- volume expansion -------------------------------------------------------


@dataclass(frozen=True)
class ExpansionInput:
    n: object  # half-dimension; int, Fraction or float
    s: object
    ric_norm_sq: object
    r_norm_sq: object
    laplacian_s: object = 0

    @classmethod
    def for_dimension(cls, d: int, s, ric_norm_sq, r_norm_sq, laplacian_s=0) -> "ExpansionInput":
        return cls(Fraction(d, 2), s, ric_norm_sq, r_norm_sq, laplacian_s)

    @property
    def exact(self) -> bool:
        return all(isinstance(x, (Rational, Scalar)) for x in (self.n, self.s, self.ric_norm_sq, self.r_norm_sq, self.laplacian_s))

    def _values(self):
        vals = (self.n, self.s, self.ric_norm_sq, self.r_norm_sq, self.laplacian_s)
        if self.exact:
            return tuple(Scalar(x) if not isinstance(x, Scalar) else x for x in vals)
        return tuple(float(x) for x in vals)


def _simplify(x):
    if isinstance(x, Scalar) and x.is_rational:
        return x.a
    return x


def c2(inp: ExpansionInput):
    """``-s / (12 (n + 1))``, the constant fixed by the round-sphere expansion."""
    n, s, *_ = inp._values()
    return _simplify(-s / ((n + 1) * 12))


def c2_as_printed(inp: ExpansionInput):
    """``-s / (3 (n + 1))``: the alternative constant, kept for comparison only."""
    n, s, *_ = inp._values()
    return _simplify(-s / ((n + 1) * 3))


def c4(inp: ExpansionInput):
    """``(8|Ric|^2 - 3|R|^2 + 5 s^2 - 18 Lap s) / (1440 (n+1)(n+2))``."""
    n, s, ric, rr, lap = inp._values()
    return _simplify((ric * 8 - rr * 3 + s * s * 5 - lap * 18) / ((n + 1) * (n + 2) * 1440))


def is_flat_to_order(inp: ExpansionInput, k: int = 2) -> bool:
    """True when ``c2`` (k = 1) or both ``c2`` and ``c4`` (k = 2) vanish."""
    if k not in (1, 2):
        raise ValueError("order must be 1 or 2")
    coeffs = [c2(inp)] + ([c4(inp)] if k == 2 else [])
    return all((not c) if not isinstance(c, float) else abs(c) < 1e-15 for c in coeffs)


def expansion_report(inp: ExpansionInput) -> dict:
    a, b, c = c2(inp), c2_as_printed(inp), c4(inp)
    return {
        "c2": a,
        "c2_alternative": b,
        "c4": c,
        "c2_float": float(a),
        "c2_alternative_float": float(b),
        "c4_float": float(c),
        "c2_note": "c2 = -s/(12(n+1)) matches the round-sphere oracle; c2_alternative = -s/(3(n+1)) does not",
        "flat_to_order_2": is_flat_to_order(inp, 2),
    }


def expansion_input_from_spec(spec) -> ExpansionInput:
    from .invariant_curvature import curvature, curvature_scalars

    cs = curvature_scalars(curvature(spec))
    return ExpansionInput.for_dimension(spec.dim, cs.s, cs.ric_norm_sq, cs.r_norm_sq, cs.laplacian_s)


def sphere_expansion_input(d: int) -> ExpansionInput:
    """Curvature data of the unit round ``S^d``."""
    return ExpansionInput.for_dimension(d, d * (d - 1), d * (d - 1) ** 2, 2 * d * (d - 1), 0)


def _sinc_m1(y: float) -> float:
    """``sin(y)/y - 1`` without cancellation."""
    if abs(y) < 0.1:
        y2 = y * y
        return y2 * (-1 / 6 + y2 * (1 / 120 + y2 * (-1 / 5040 + y2 * (1 / 362880 - y2 / 39916800))))
    return math.sin(y) / y - 1.0


def sphere_ball_ratio_minus_one(d: int, r: float, tol: float = 1e-16) -> float:
    """``V_{S^d}(r) / V_flat(r) - 1`` with ``V_{S^d}(r) = vol(S^{d-1}) int_0^r sin^{d-1}``.

    Rescaling ``t = r x`` gives ``d int_0^1 x^{d-1} ((sin(rx)/(rx))^{d-1} - 1) dx``,
    which is evaluated directly so the small difference keeps full precision.
    """
    def g(x):
        if x == 0.0:
            return 0.0
        return d * x ** (d - 1) * math.expm1((d - 1) * math.log1p(_sinc_m1(r * x)))

    return adaptive_simpson(g, 0.0, 1.0, tol)


def sphere_ball_ratio(d: int, r: float) -> float:
    return 1.0 + sphere_ball_ratio_minus_one(d, r)


def sphere_expansion_oracle(d: int, r_max: float = 0.01, samples: int = 24) -> tuple[float, float]:
    """Least-squares ``(c2, c4)`` from the exact ball volumes of the unit ``S^d``."""
    if not 2 <= d <= 10:
        raise ValueError("oracle supports 2 <= d <= 10")
    if r_max > 0.2:
        warnings.warn("r_max > 0.2: higher-order terms bias the (c2, c4) fit", RuntimeWarning, stacklevel=2)
    rs = np.linspace(r_max / samples, r_max, samples)
    y = np.array([sphere_ball_ratio_minus_one(d, r) / (r * r) for r in rs])
    A = np.column_stack([np.ones_like(rs), rs * rs])
    (a, b), *_ = np.linalg.lstsq(A, y, rcond=None)
    return float(a), float(b)


# -- tubes ------------------------------------------------------------------


def tube_volume_cpn(n: int, k: int, r: float) -> float:
    """``pi^n / n! (1 - (1 - k sin^2 r)^n)``; valid for small ``r`` only (not checked)."""
    if n < 1 or k < 1:
        raise ValueError("need n >= 1 and k >= 1")
    if r < 0:
        raise ValueError("radius must be nonnegative")
    return math.pi ** n / math.factorial(n) * (1.0 - (1.0 - k * math.sin(r) ** 2) ** n)
