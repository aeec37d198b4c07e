"""Chevalley-Eilenberg calculus for Lie algebras given by structure equations.

An algebra is specified dually: ``diffs[i-1] = de^i`` as an exact 2-form.
Brackets of the dual frame follow from ``d alpha(X, Y) = -alpha([X, Y])``,
i.e. ``[e_i, e_j] = -sum_k c^k_ij e_k`` where ``de^k = sum_{i<j} c^k_ij e^{ij}``.
"""
from __future__ import annotations

import os
import random
import re
from fractions import Fraction
from itertools import combinations, combinations_with_replacement
from math import comb, factorial
from typing import Sequence

from .errors import DimensionMismatch, JacobiError, NotNilpotentError, ParseError
from .exact_forms import ONE, ZERO, KForm, Scalar, monomials, parse_form, wedge
from .exact_linalg import Echelon, kernel_and_rank

__all__ = [
    "LieAlgebraSpec",
    "ce_differential",
    "jacobi_check",
    "invariant_cohomology",
    "solve_d",
    "nilpotency_step",
    "symplectic_existence",
    "parse_algebra",
    "builtin_algebra",
    "BUILTIN_NAMES",
]


def _d_monomial(diffs: Sequence[KForm], dim: int, idx: tuple, cache: dict) -> KForm:
    hit = cache.get(idx)
    if hit is not None:
        return hit
    out = KForm.zero(dim, len(idx) + 1)
    for p, i in enumerate(idx):
        di = diffs[i - 1]
        if not di:
            continue
        left = KForm._from_clean(dim, p, {idx[:p]: ONE})
        right = KForm._from_clean(dim, len(idx) - p - 1, {idx[p + 1:]: ONE})
        term = wedge(wedge(left, di), right)
        out = out - term if p % 2 else out + term
    cache[idx] = out
    return out


def _differential(diffs, dim, f: KForm, cache: dict) -> KForm:
    out = KForm.zero(dim, f.degree + 1)
    for idx, c in f.terms.items():
        dm = _d_monomial(diffs, dim, idx, cache)
        if dm:
            out = out + dm * c
    return out


def jacobi_check(diffs: Sequence[KForm]):
    """Return None if ``d(de^i) = 0`` for every generator, else ``(i, residue)``
    for the first failing (1-based) generator."""
    diffs = list(diffs)
    if not diffs:
        return None
    dim = len(diffs)
    cache: dict = {}
    for i, di in enumerate(diffs, start=1):
        res = _differential(diffs, dim, di, cache)
        if res:
            return i, res
    return None


class LieAlgebraSpec:
    """Structure equations ``de^i`` of an n-dimensional Lie algebra.

    The Jacobi identity (``d^2 = 0`` on generators) is verified on
    construction.  Nilpotency is not required here; see
    :func:`nilpotency_step`.
    """

    def __init__(self, dim: int, diffs: Sequence[KForm] | dict | None = None, name: str = ""):
        if isinstance(diffs, dict):
            full = [KForm.zero(dim, 2) for _ in range(dim)]
            for i, f in diffs.items():
                full[i - 1] = f
            diffs = full
        elif diffs is None:
            diffs = [KForm.zero(dim, 2) for _ in range(dim)]
        diffs = list(diffs)
        if len(diffs) != dim:
            raise ValueError(f"expected {dim} structure equations, got {len(diffs)}")
        for i, f in enumerate(diffs, start=1):
            if f.dim != dim:
                raise DimensionMismatch(f"de^{i} lives in dimension {f.dim}, expected {dim}")
            if f.terms and f.degree != 2:
                raise ValueError(f"de^{i} must be a 2-form")
            if not f.terms:
                diffs[i - 1] = KForm.zero(dim, 2)
        self.dim = dim
        self.diffs = tuple(diffs)
        self.name = name
        self._cache: dict = {}
        failure = jacobi_check(self.diffs)
        if failure is not None:
            raise JacobiError(*failure)

    def d(self, f: KForm) -> KForm:
        if f.dim != self.dim:
            raise DimensionMismatch(f"form of dimension {f.dim} on a {self.dim}-dimensional algebra")
        return _differential(self.diffs, self.dim, f, self._cache)

    def is_abelian(self) -> bool:
        return not any(self.diffs)

    def bracket(self) -> list:
        """``B[i][j][k]`` (0-based) with ``[e_i, e_j] = sum_k B[i][j][k] e_k``."""
        n = self.dim
        B = [[[ZERO] * n for _ in range(n)] for _ in range(n)]
        for k, dk in enumerate(self.diffs):
            for (i, j), c in dk.terms.items():
                B[i - 1][j - 1][k] = -c
                B[j - 1][i - 1][k] = c
        return B

    def direct_sum_abelian(self, extra: int, name: str = "") -> "LieAlgebraSpec":
        """This algebra plus ``extra`` closed generators appended at the end."""
        n = self.dim + extra
        diffs = [KForm(n, 2, d.terms) for d in self.diffs] + [KForm.zero(n, 2)] * extra
        return LieAlgebraSpec(n, diffs, name=name or f"{self.name}+R{extra}")

    def to_text(self) -> str:
        lines = [f"dim {self.dim}"]
        for i, f in enumerate(self.diffs, start=1):
            if f:
                lines.append(f"d e{i} = {f.to_literal()}")
        return "\n".join(lines) + "\n"

    def __eq__(self, other):
        return isinstance(other, LieAlgebraSpec) and self.dim == other.dim and self.diffs == other.diffs

    def __hash__(self):
        return hash((self.dim, self.diffs))

    def __repr__(self):
        eqs = ", ".join(f"de{i}={f}" for i, f in enumerate(self.diffs, 1) if f)
        return f"LieAlgebraSpec(dim={self.dim}{', ' + eqs if eqs else ''})"


def ce_differential(spec: LieAlgebraSpec, f: KForm) -> KForm:
    """Graded-Leibniz extension of ``e^i -> de^i``."""
    return spec.d(f)


# ---------------------------------------------------------------------------


def _d_images(spec: LieAlgebraSpec, k: int):
    basis = monomials(spec.dim, k)
    return basis, [spec.d(KForm._from_clean(spec.dim, k, {I: ONE})).terms for I in basis]


def invariant_cohomology(spec: LieAlgebraSpec) -> list[int]:
    """Betti numbers of the complex of invariant forms."""
    n = spec.dim
    ranks = []
    for k in range(n + 1):
        if k == n:
            ranks.append(0)
            continue
        _, imgs = _d_images(spec, k)
        ranks.append(kernel_and_rank(imgs)[1])
    return [comb(n, k) - ranks[k] - (ranks[k - 1] if k else 0) for k in range(n + 1)]


def closed_forms(spec: LieAlgebraSpec, k: int) -> list[KForm]:
    """A basis of the closed invariant k-forms."""
    basis, imgs = _d_images(spec, k)
    ker, _, _ = kernel_and_rank(imgs)
    return [KForm._from_clean(spec.dim, k, {basis[i]: c for i, c in v.items()}) for v in ker]


def solve_d(spec: LieAlgebraSpec, target: KForm):
    """A primitive ``g`` with ``dg = target``, or None if target is not exact.

    Free variables of the linear system are set to zero, so e.g. ``e^{15}``
    on the (M6) algebra gives exactly ``e^4``.
    """
    if target.dim != spec.dim:
        raise DimensionMismatch("target lives in a different dimension")
    k = target.degree
    if k < 1:
        raise ValueError("target degree must be at least 1")
    if not target:
        return KForm.zero(spec.dim, k - 1)
    basis, imgs = _d_images(spec, k - 1)
    _, _, ech = kernel_and_rank(imgs)
    coeffs = ech.express(target.terms)
    if coeffs is None:
        return None
    return KForm._from_clean(spec.dim, k - 1, {basis[i]: c for i, c in coeffs.items()})


def nilpotency_step(spec: LieAlgebraSpec) -> int:
    """Nilpotency step via the ascending series of closed-enough 1-forms.

    ``V_0`` is the space of closed 1-forms and ``V_{i+1}`` the 1-forms whose
    differential lies in ``Lambda^2 V_i``; the step is ``s + 1`` for the first
    ``s`` with ``V_s`` everything.  Raises :class:`NotNilpotentError` if the
    series stalls.
    """
    n = spec.dim
    if n == 0:
        return 0
    ones = [KForm.basis(n, i) for i in range(1, n + 1)]
    dimg = [spec.d(e).terms for e in ones]
    V = [KForm._from_clean(n, 1, {(i + 1,): c for i, c in v.items()}) for v in kernel_and_rank(dimg)[0]]
    s = 0
    while True:
        if len(V) == n:
            return s + 1
        span2 = Echelon()
        for a, b in combinations(V, 2):
            span2.add(wedge(a, b).terms)
        # alpha in V_{i+1}  <=>  d(alpha) reduces to zero modulo Lambda^2 V_i
        residues = [span2.reduce(t)[0] for t in dimg]
        ker, _, _ = kernel_and_rank(residues)
        newV = [KForm._from_clean(n, 1, {(i + 1,): c for i, c in v.items()}) for v in ker]
        if len(newV) <= len(V):
            raise NotNilpotentError(f"ascending series stalls at dimension {len(V)} < {n}: algebra is not nilpotent")
        V = newV
        s += 1


def is_nilpotent(spec: LieAlgebraSpec) -> bool:
    try:
        nilpotency_step(spec)
    except NotNilpotentError:
        return False
    return True


# ---------------------------------------------------------------------------
# symplectic forms


def _top_coefficient(f: KForm) -> Scalar:
    return f.terms.get(tuple(range(1, f.dim + 1)), ZERO)


def _pfaffian_polynomial(Z: list[KForm], half: int) -> dict:
    """Coefficients of ``(sum t_i Z_i)^half`` on the volume form, keyed by
    sorted index multisets."""
    poly = {}
    for multiset in combinations_with_replacement(range(len(Z)), half):
        w = KForm.one(Z[0].dim)
        for i in multiset:
            w = wedge(w, Z[i])
            if not w:
                break
        c = _top_coefficient(w) if w else ZERO
        if c:
            mult = factorial(half)
            for i in set(multiset):
                mult //= factorial(multiset.count(i))
            poly[multiset] = c * mult
    return poly


def _eval_poly(poly: dict, t: Sequence) -> Scalar:
    total = ZERO
    for ms, c in poly.items():
        term = c
        for i in ms:
            term = term * t[i]
        total = total + term
    return total


def _combine(Z: list[KForm], t: Sequence) -> KForm:
    out = KForm.zero(Z[0].dim, 2)
    for z, ti in zip(Z, t):
        if ti:
            out = out + z * ti
    return out


def symplectic_existence(spec: LieAlgebraSpec, seed: int | None = None):
    """A closed invariant 2-form ``w`` with ``w^{n/2} != 0``, or None.

    Candidates, in order: the standard form ``e^{12}+e^{34}+...`` if closed;
    deterministic rational points in the space of closed 2-forms; seeded
    random integer points; finally the top-degree polynomial is expanded
    exactly (kernel dimension <= 15) and None is returned only if it
    vanishes identically.  ``seed`` defaults to ``$HOLOTORSION_SEED`` or 0.
    """
    n = spec.dim
    if n % 2:
        raise ValueError("symplectic forms need even dimension")
    half = n // 2
    if n == 0:
        return KForm.zero(0, 2)
    standard = KForm(n, 2, {(2 * a - 1, 2 * a): 1 for a in range(1, half + 1)})

    def good(w: KForm) -> bool:
        return bool(w) and not spec.d(w) and bool(_top_coefficient(w ** half))

    if good(standard):
        return standard
    Z = closed_forms(spec, 2)
    if not Z:
        return None
    m = len(Z)
    deterministic = [
        [1] * m,
        list(range(1, m + 1)),
        [Fraction(1, i + 1) for i in range(m)],
        [(-1) ** i * (i + 1) for i in range(m)],
        [(i + 1) ** 2 for i in range(m)],
    ]
    for t in deterministic:
        w = _combine(Z, t)
        if good(w):
            return w
    if seed is None:
        seed = int(os.environ.get("HOLOTORSION_SEED", "0"))
    rng = random.Random(seed)
    for _ in range(20):
        t = [rng.randint(-100, 100) for _ in range(m)]
        w = _combine(Z, t)
        if good(w):
            return w
    if m > 15:
        raise RuntimeError(f"closed 2-forms span dimension {m} > 15; symbolic fallback not attempted")
    poly = _pfaffian_polynomial(Z, half)
    if not poly:
        return None
    # nonzero polynomial of degree half: random points from 201 values miss with prob <= half/201
    while True:
        t = [rng.randint(-100, 100) for _ in range(m)]
        if _eval_poly(poly, t):
            return _combine(Z, t)


# ---------------------------------------------------------------------------
# text format and built-ins

_LINE_RE = re.compile(r"^\s*d\s*e\s*(\d+)\s*=\s*(.+?)\s*$")


def parse_algebra(text: str, name: str = "") -> LieAlgebraSpec:
    """Parse ``dim N`` followed by ``d eI = <form literal>`` lines.

    Blank lines and ``#`` comments are ignored; omitted generators are closed.
    """
    dim = None
    diffs: dict[int, KForm] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if dim is None:
            m = re.match(r"^dim\s+(\d+)$", line)
            if not m:
                raise ParseError("expected 'dim N' as the first statement", line=lineno)
            dim = int(m.group(1))
            continue
        m = _LINE_RE.match(line)
        if not m:
            raise ParseError(f"expected 'd eI = <form>', got {line!r}", line=lineno)
        i = int(m.group(1))
        if not 1 <= i <= dim:
            raise ParseError(f"generator e{i} outside 1..{dim}", line=lineno)
        if i in diffs:
            raise ParseError(f"de{i} given twice", line=lineno)
        try:
            f = parse_form(m.group(2), dim, 2)
        except ParseError as exc:
            raise ParseError(exc.message, position=exc.position, line=lineno) from None
        diffs[i] = f
    if dim is None:
        raise ParseError("empty algebra file")
    return LieAlgebraSpec(dim, diffs, name=name)


_BUILTIN_TEXT = {
    # de^4 = e^{15}, de^6 = e^{13}
    "m6": "dim 6\nd e4 = 1*e{15}\nd e6 = 1*e{13}\n",
    # (M6) plus closed e^7, e^8
    "m6x2": "dim 8\nd e4 = 1*e{15}\nd e6 = 1*e{13}\n",
    # complex Heisenberg group; J0 (Je1=e2, Je3=e4, Je5=e6) is bi-invariant
    "iwasawa": "dim 6\nd e5 = -1*e{13}+1*e{24}\nd e6 = -1*e{14}-1*e{23}\n",
    "heisenberg3": "dim 3\nd e3 = 1*e{12}\n",
    # 5-dim Heisenberg plus a line: locally conformally Kahler for J0
    "h5r": "dim 6\nd e5 = 1*e{12}+1*e{34}\n",
    # (M6) plus a closed e^7, carrier for a G2 3-form
    "m6r": "dim 7\nd e4 = 1*e{15}\nd e6 = 1*e{13}\n",
    # su(2) with its bi-invariant metric (constant curvature 1/4); not nilpotent
    "su2": "dim 3\nd e1 = 1*e{23}\nd e2 = -1*e{13}\nd e3 = 1*e{12}\n",
}

BUILTIN_NAMES = tuple(sorted(_BUILTIN_TEXT)) + ("abelian:N",)


def builtin_algebra(name: str) -> LieAlgebraSpec:
    """Named algebras: ``m6``, ``m6x2``, ``m6r``, ``iwasawa``, ``heisenberg3``,
    ``h5r``, ``su2`` and ``abelian:N``.  A leading ``@`` is ignored."""
    key = name.lstrip("@").lower()
    if key.startswith("abelian:"):
        n = int(key.split(":", 1)[1])
        return LieAlgebraSpec(n, None, name=f"abelian:{n}")
    if key not in _BUILTIN_TEXT:
        raise KeyError(f"unknown built-in algebra {name!r}; known: {', '.join(BUILTIN_NAMES)}")
    return parse_algebra(_BUILTIN_TEXT[key], name=key)
