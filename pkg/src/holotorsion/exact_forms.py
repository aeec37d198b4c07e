"""Exact sparse exterior algebra over Q(sqrt 3).

Forms live on an oriented orthonormal coframe ``e^1, ..., e^n``.  A monomial
``e^{i1 i2 ... ik}`` is keyed by the strictly increasing tuple ``(i1, ..., ik)``
(1-based, as in the printed formulas); coefficients are :class:`Scalar`.

Evaluation convention: ``e^{i1..ik}(e_{i1}, ..., e_{ik}) = 1`` (determinant
normalisation), so ``(a ^ b)(X, Y) = a(X) b(Y) - a(Y) b(X)`` for 1-forms.
"""
from __future__ import annotations

import re
from fractions import Fraction
from itertools import combinations
from numbers import Rational
from typing import Iterable, Mapping, Sequence

from .errors import DimensionMismatch, ParseError, SingularMatrixError

__all__ = [
    "Scalar",
    "S3",
    "KForm",
    "CoframeChange",
    "as_scalar",
    "parse_scalar",
    "parse_form",
    "wedge",
    "hodge_star",
    "substitute",
    "contract",
    "apply_derivation",
    "permutation_sign",
    "monomials",
]


class Scalar:
    """Exact element ``a + b*sqrt(3)`` of Q(sqrt 3)."""

    __slots__ = ("a", "b")

    def __init__(self, a=0, b=0):
        if isinstance(a, Scalar):
            if b:
                raise TypeError("Scalar(a, b) needs rational parts")
            self.a, self.b = a.a, a.b
            return
        self.a = a if type(a) is Fraction else Fraction(a)
        self.b = b if type(b) is Fraction else Fraction(b)

    # -- construction helpers -------------------------------------------------
    @staticmethod
    def _raw(a: Fraction, b: Fraction) -> "Scalar":
        s = object.__new__(Scalar)
        s.a = a
        s.b = b
        return s

    # -- arithmetic -----------------------------------------------------------
    def __add__(self, other):
        o = _coerce(other)
        if o is None:
            return NotImplemented
        return Scalar._raw(self.a + o.a, self.b + o.b)

    __radd__ = __add__

    def __sub__(self, other):
        o = _coerce(other)
        if o is None:
            return NotImplemented
        return Scalar._raw(self.a - o.a, self.b - o.b)

    def __rsub__(self, other):
        o = _coerce(other)
        if o is None:
            return NotImplemented
        return Scalar._raw(o.a - self.a, o.b - self.b)

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return Scalar._raw(self.a * other, self.b * other)
        o = _coerce(other)
        if o is None:
            return NotImplemented
        if not self.b and not o.b:
            return Scalar._raw(self.a * o.a, _ZERO)
        return Scalar._raw(self.a * o.a + 3 * self.b * o.b, self.a * o.b + self.b * o.a)

    __rmul__ = __mul__

    def __neg__(self):
        return Scalar._raw(-self.a, -self.b)

    def __pos__(self):
        return self

    def norm(self) -> Fraction:
        """Field norm ``(a + b s3)(a - b s3) = a^2 - 3 b^2``."""
        return self.a * self.a - 3 * self.b * self.b

    def conjugate(self) -> "Scalar":
        return Scalar._raw(self.a, -self.b)

    def inverse(self) -> "Scalar":
        if not self:
            raise ZeroDivisionError("Scalar division by zero")
        if not self.b:
            return Scalar._raw(1 / self.a, _ZERO)
        n = self.norm()
        return Scalar._raw(self.a / n, -self.b / n)

    def __truediv__(self, other):
        o = _coerce(other)
        if o is None:
            return NotImplemented
        if not o.b:
            if not o.a:
                raise ZeroDivisionError("Scalar division by zero")
            return Scalar._raw(self.a / o.a, self.b / o.a)
        return self * o.inverse()

    def __rtruediv__(self, other):
        o = _coerce(other)
        if o is None:
            return NotImplemented
        return o * self.inverse()

    def __pow__(self, k: int):
        if not isinstance(k, int):
            return NotImplemented
        if k < 0:
            return self.inverse() ** (-k)
        result, base = ONE, self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    # -- comparison -----------------------------------------------------------
    def __bool__(self):
        return bool(self.a) or bool(self.b)

    def __eq__(self, other):
        o = _coerce(other)
        if o is None:
            return NotImplemented
        return self.a == o.a and self.b == o.b

    def __hash__(self):
        if not self.b:
            return hash(self.a)
        return hash((self.a, self.b))

    def sign(self) -> int:
        """Exact sign of the real number ``a + b*sqrt(3)``."""
        sa = (self.a > 0) - (self.a < 0)
        sb = (self.b > 0) - (self.b < 0)
        if sb == 0:
            return sa
        if sa == 0 or sa == sb:
            return sb
        # opposite signs: compare a^2 with 3 b^2
        n = self.norm()
        return sa if n > 0 else (sb if n < 0 else 0)

    def __lt__(self, other):
        o = _coerce(other)
        if o is None:
            return NotImplemented
        return (self - o).sign() < 0

    def __le__(self, other):
        o = _coerce(other)
        if o is None:
            return NotImplemented
        return (self - o).sign() <= 0

    def __gt__(self, other):
        o = _coerce(other)
        if o is None:
            return NotImplemented
        return (self - o).sign() > 0

    def __ge__(self, other):
        o = _coerce(other)
        if o is None:
            return NotImplemented
        return (self - o).sign() >= 0

    def __abs__(self):
        return -self if self.sign() < 0 else self

    @property
    def is_rational(self) -> bool:
        return not self.b

    def __float__(self):
        return float(self.a) + float(self.b) * 1.7320508075688772

    # -- text -------------------------------------------------------------
    def to_literal(self) -> str:
        """Literal accepted by :func:`parse_scalar` (``p/q`` or ``p/q+r/s s3``)."""
        if not self.b:
            return _frac_str(self.a)
        if not self.a:
            return f"{_frac_str(self.b)} s3"
        sign = "+" if self.b > 0 else "-"
        return f"{_frac_str(self.a)}{sign}{_frac_str(abs(self.b))} s3"

    def __str__(self):
        if not self.b:
            return _frac_str(self.a)
        if not self.a:
            return f"{_frac_str(self.b)}√3"
        sign = "+" if self.b > 0 else "-"
        return f"{_frac_str(self.a)}{sign}{_frac_str(abs(self.b))}√3"

    def __repr__(self):
        return f"Scalar({self.to_literal()!r})"


_ZERO = Fraction(0)
ZERO = Scalar._raw(_ZERO, _ZERO)
ONE = Scalar._raw(Fraction(1), _ZERO)
#: sqrt(3)
S3 = Scalar._raw(_ZERO, Fraction(1))


def _frac_str(x: Fraction) -> str:
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def _coerce(x):
    if type(x) is Scalar:
        return x
    if isinstance(x, (int, Rational)):
        return Scalar._raw(Fraction(x), _ZERO)
    return None


def as_scalar(x) -> Scalar:
    """Convert int / Fraction / Scalar / literal string to :class:`Scalar`."""
    if type(x) is Scalar:
        return x
    if isinstance(x, str):
        return parse_scalar(x)
    s = _coerce(x)
    if s is None:
        raise TypeError(f"cannot convert {x!r} to an exact Scalar (floats are not allowed)")
    return s


_RAT = r"\d+(?:/\d+)?"
_SCALAR_RE = re.compile(
    rf"\s*(?P<s1>[+-]?)\s*(?P<r1>{_RAT})"
    rf"(?:(?P<s2>[+-])(?P<r2>{_RAT})\s*\*?\s*(?P<t2>s3)|\s*\*?\s*(?P<t1>s3))?\s*$"
)


def parse_scalar(text: str) -> Scalar:
    """Parse ``p``, ``p/q``, ``r/s s3`` or ``p/q+r/s s3`` (``s3`` = sqrt 3)."""
    m = _SCALAR_RE.match(text)
    if not m:
        raise ParseError(f"malformed scalar literal {text!r}")
    first = _parse_rat(m.group("r1"))
    if m.group("s1") == "-":
        first = -first
    if m.group("t1"):
        return Scalar(0, first)
    if m.group("r2") is None:
        return Scalar(first)
    second = _parse_rat(m.group("r2"))
    if m.group("s2") == "-":
        second = -second
    return Scalar(first, second)


def _parse_rat(tok: str) -> Fraction:
    if "/" in tok:
        p, q = tok.split("/")
        if int(q) == 0:
            raise ParseError(f"zero denominator in {tok!r}")
        return Fraction(int(p), int(q))
    return Fraction(int(tok))


# ---------------------------------------------------------------------------
# permutations and monomials


def permutation_sign(seq: Sequence[int]) -> int:
    """Sign of the permutation sorting ``seq`` (0 if an entry repeats)."""
    inv = 0
    n = len(seq)
    for i in range(n):
        si = seq[i]
        for j in range(i + 1, n):
            sj = seq[j]
            if si > sj:
                inv += 1
            elif si == sj:
                return 0
    return -1 if inv & 1 else 1


def _merge_sign(left: tuple, right: tuple) -> int:
    """Sign of ``e^left ^ e^right`` relative to the sorted union (0 on overlap)."""
    inv = 0
    for i in left:
        for j in right:
            if i > j:
                inv += 1
            elif i == j:
                return 0
    return -1 if inv & 1 else 1


def monomials(dim: int, degree: int):
    """Canonical basis multi-indices of degree ``degree`` in dimension ``dim``."""
    return list(combinations(range(1, dim + 1), degree))


# ---------------------------------------------------------------------------


class KForm:
    """Immutable sparse exterior form of fixed degree.

    ``terms`` maps a multi-index to its coefficient.  Unsorted or repeated
    indices are accepted at construction and normalised; zero coefficients
    are never stored, so ``==`` compares term-by-term.
    """

    __slots__ = ("dim", "degree", "terms", "_hash")

    def __init__(self, dim: int, degree: int, terms: Mapping | Iterable = ()):
        if dim < 0 or degree < 0:
            raise ValueError("dimension and degree must be nonnegative")
        self.dim = dim
        self.degree = degree
        items = terms.items() if isinstance(terms, Mapping) else terms
        acc: dict = {}
        for idx, c in items:
            idx = tuple(idx)
            if len(idx) != degree:
                raise ValueError(f"multi-index {idx} has length {len(idx)}, expected {degree}")
            for i in idx:
                if not 1 <= i <= dim:
                    raise ValueError(f"index {i} out of range 1..{dim}")
            sgn = permutation_sign(idx)
            if sgn == 0:
                continue
            key = tuple(sorted(idx))
            c = as_scalar(c)
            if sgn < 0:
                c = -c
            prev = acc.get(key)
            acc[key] = c if prev is None else prev + c
        self.terms = {k: acc[k] for k in sorted(acc) if acc[k]}
        self._hash = None

    @classmethod
    def _from_clean(cls, dim, degree, terms: dict) -> "KForm":
        f = object.__new__(cls)
        f.dim = dim
        f.degree = degree
        f.terms = {k: terms[k] for k in sorted(terms) if terms[k]}
        f._hash = None
        return f

    @classmethod
    def zero(cls, dim: int, degree: int) -> "KForm":
        return cls._from_clean(dim, degree, {})

    @classmethod
    def one(cls, dim: int) -> "KForm":
        return cls._from_clean(dim, 0, {(): ONE})

    @classmethod
    def basis(cls, dim: int, *indices: int, coeff=1) -> "KForm":
        """``coeff * e^{indices}`` (indices may be unsorted)."""
        return cls(dim, len(indices), {tuple(indices): coeff})

    @classmethod
    def volume(cls, dim: int) -> "KForm":
        return cls._from_clean(dim, dim, {tuple(range(1, dim + 1)): ONE})

    @classmethod
    def parse(cls, text: str, dim: int, degree: int | None = None) -> "KForm":
        return parse_form(text, dim, degree)

    # -- structure --------------------------------------------------------
    def is_zero(self) -> bool:
        return not self.terms

    def __bool__(self):
        return bool(self.terms)

    def __len__(self):
        return len(self.terms)

    def coefficient(self, *indices: int) -> Scalar:
        idx = tuple(indices[0]) if len(indices) == 1 and isinstance(indices[0], tuple) else tuple(indices)
        sgn = permutation_sign(idx)
        if sgn == 0:
            return ZERO
        c = self.terms.get(tuple(sorted(idx)), ZERO)
        return c if sgn > 0 else -c

    def support(self) -> list[tuple]:
        return list(self.terms)

    def is_rational(self) -> bool:
        return all(c.is_rational for c in self.terms.values())

    def _check(self, other: "KForm"):
        if not isinstance(other, KForm):
            raise TypeError(f"expected KForm, got {type(other).__name__}")
        if other.dim != self.dim:
            raise DimensionMismatch(f"forms live in dimensions {self.dim} and {other.dim}")

    # -- linear structure -------------------------------------------------
    def __add__(self, other):
        if not isinstance(other, KForm):
            return NotImplemented
        self._check(other)
        if other.degree != self.degree:
            if not other.terms:
                return self
            if not self.terms:
                return other
            raise ValueError(f"cannot add forms of degree {self.degree} and {other.degree}")
        out = dict(self.terms)
        for k, c in other.terms.items():
            prev = out.get(k)
            out[k] = c if prev is None else prev + c
        return KForm._from_clean(self.dim, self.degree, out)

    def __neg__(self):
        return KForm._from_clean(self.dim, self.degree, {k: -c for k, c in self.terms.items()})

    def __sub__(self, other):
        if not isinstance(other, KForm):
            return NotImplemented
        return self + (-other)

    def __mul__(self, c):
        if isinstance(c, KForm):
            return NotImplemented
        c = as_scalar(c)
        if not c:
            return KForm.zero(self.dim, self.degree)
        return KForm._from_clean(self.dim, self.degree, {k: v * c for k, v in self.terms.items()})

    __rmul__ = __mul__

    def __truediv__(self, c):
        return self * as_scalar(c).inverse()

    def __eq__(self, other):
        if not isinstance(other, KForm):
            return NotImplemented
        if self.dim != other.dim:
            return False
        if not self.terms and not other.terms:
            return True
        return self.degree == other.degree and self.terms == other.terms

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.dim, self.degree if self.terms else -1, tuple(self.terms.items())))
        return self._hash

    # -- products ---------------------------------------------------------
    def wedge(self, other: "KForm") -> "KForm":
        return wedge(self, other)

    def __xor__(self, other):
        if not isinstance(other, KForm):
            return NotImplemented
        return wedge(self, other)

    def __pow__(self, k: int):
        """k-fold wedge power."""
        out = KForm.one(self.dim)
        for _ in range(k):
            out = wedge(out, self)
        return out

    # -- text -------------------------------------------------------------
    def to_literal(self) -> str:
        if not self.terms:
            return "0"
        parts = []
        for idx, c in self.terms.items():
            body = "e{" + (" ".join(map(str, idx)) if self.dim > 9 else "".join(map(str, idx))) + "}"
            if c.b and c.a:
                parts.append(f"+({c.to_literal()})*{body}")
            else:
                lit = c.to_literal()
                parts.append((lit if lit.startswith("-") else "+" + lit) + "*" + body)
        text = "".join(parts)
        return text[1:] if text.startswith("+") else text

    def __str__(self):
        return self.to_literal()

    def __repr__(self):
        return f"KForm(dim={self.dim}, degree={self.degree}, {self.to_literal()!r})"


# ---------------------------------------------------------------------------
# form literals: signed sums of  c*e{i1 i2 ...}


_TERM_RE = re.compile(
    r"\s*(?P<sign>[+-])?\s*"
    r"(?:(?:\((?P<paren>[^()]*)\)|(?P<coef>\d+(?:/\d+)?(?:\s*\*?\s*s3)?))\s*\*?\s*)?"
    r"(?:e\{(?P<idx>[^}]*)\}|e(?P<bare>\d+))?"
)


def parse_form(text: str, dim: int, degree: int | None = None) -> KForm:
    """Parse a form literal such as ``-1*e{12}+1*e{34}+1*e{56}``.

    Indices inside ``e{...}`` are either whitespace separated or, when written
    without spaces, one digit each.  Coefficients: ``p/q``, ``r/s s3`` or
    parenthesised ``(p/q+r/s s3)``; a bare ``e{...}`` has coefficient 1.
    ``0`` denotes the zero form (``degree`` must then be given).
    """
    s = text.strip()
    if s in ("", "0"):
        if degree is None:
            raise ParseError("zero form needs an explicit degree")
        return KForm.zero(dim, degree)
    pos = 0
    terms = []
    first = True
    while pos < len(s):
        m = _TERM_RE.match(s, pos)
        if not m or m.end() == pos:
            raise ParseError(f"unexpected character {s[pos]!r} in form literal", position=pos)
        if not first and m.group("sign") is None:
            raise ParseError("expected '+' or '-' between terms", position=pos)
        idx_text = m.group("idx") if m.group("idx") is not None else m.group("bare")
        coef_text = m.group("paren") if m.group("paren") is not None else m.group("coef")
        if idx_text is None:
            if coef_text is None:
                raise ParseError("empty term in form literal", position=pos)
            idx: tuple = ()
        else:
            idx_text = idx_text.strip()
            if not idx_text:
                idx = ()
            elif " " in idx_text or "," in idx_text:
                idx = tuple(int(t) for t in re.split(r"[\s,]+", idx_text) if t)
            else:
                if not idx_text.isdigit():
                    raise ParseError(f"malformed multi-index {idx_text!r}", position=m.start("idx"))
                idx = tuple(int(ch) for ch in idx_text)
        c = parse_scalar(coef_text) if coef_text is not None else ONE
        if m.group("sign") == "-":
            c = -c
        if degree is None:
            degree = len(idx)
        elif len(idx) != degree:
            raise ParseError(f"term of degree {len(idx)} in a degree-{degree} form", position=pos)
        for i in idx:
            if not 1 <= i <= dim:
                raise ParseError(f"index {i} outside 1..{dim}", position=pos)
        terms.append((idx, c))
        pos = m.end()
        first = False
    return KForm(dim, degree, terms)


# ---------------------------------------------------------------------------
# operations


def wedge(f: KForm, g: KForm) -> KForm:
    """Exterior product; signs from the merge permutation."""
    f._check(g)
    deg = f.degree + g.degree
    if deg > f.dim or not f.terms or not g.terms:
        return KForm.zero(f.dim, deg)
    out: dict = {}
    for I, a in f.terms.items():
        for K, b in g.terms.items():
            sgn = _merge_sign(I, K)
            if not sgn:
                continue
            key = tuple(sorted(I + K))
            c = a * b
            if sgn < 0:
                c = -c
            prev = out.get(key)
            out[key] = c if prev is None else prev + c
    return KForm._from_clean(f.dim, deg, out)


def hodge_star(f: KForm, orientation: int = 1) -> KForm:
    """Hodge star for the orthonormal coframe oriented by ``orientation * e^{1..n}``.

    ``*e^I = sign(I, I^c) * e^{I^c}`` so that ``e^I ^ *e^I = vol``.
    """
    if orientation not in (1, -1):
        raise ValueError("orientation must be +1 or -1")
    n = f.dim
    full = range(1, n + 1)
    out = {}
    for I, c in f.terms.items():
        Ic = tuple(i for i in full if i not in I)
        sgn = _merge_sign(I, Ic) * orientation
        out[Ic] = c if sgn > 0 else -c
    return KForm._from_clean(n, n - f.degree, out)


def contract(j: int, f: KForm) -> KForm:
    """Interior product with the dual basis vector ``e_j``."""
    if not 1 <= j <= f.dim:
        raise ValueError(f"basis vector index {j} outside 1..{f.dim}")
    if f.degree == 0:
        return KForm.zero(f.dim, 0)
    out = {}
    for I, c in f.terms.items():
        if j in I:
            p = I.index(j)
            out[I[:p] + I[p + 1:]] = c if p % 2 == 0 else -c
    return KForm._from_clean(f.dim, f.degree - 1, out)


class CoframeChange:
    """Invertible linear change ``e^i -> sum_j M[i][j] e^j`` (rows are images)."""

    __slots__ = ("matrix", "dim", "_images")

    def __init__(self, matrix: Sequence[Sequence]):
        rows = [[as_scalar(x) for x in row] for row in matrix]
        n = len(rows)
        if any(len(r) != n for r in rows):
            raise ValueError("coframe change must be a square matrix")
        from .exact_linalg import determinant

        if not determinant(rows):
            raise SingularMatrixError("coframe change matrix is singular")
        self.matrix = tuple(tuple(r) for r in rows)
        self.dim = n
        self._images = tuple(
            KForm._from_clean(n, 1, {(j + 1,): c for j, c in enumerate(row) if c}) for row in self.matrix
        )

    @classmethod
    def identity(cls, n: int) -> "CoframeChange":
        return cls([[1 if i == j else 0 for j in range(n)] for i in range(n)])

    @classmethod
    def from_images(cls, n: int, images: Mapping[int, KForm]) -> "CoframeChange":
        """Identity except ``e^i -> images[i]`` (1-forms, 1-based keys)."""
        rows = [[1 if i == j else 0 for j in range(n)] for i in range(n)]
        for i, img in images.items():
            if img.degree != 1 or img.dim != n:
                raise ValueError("images must be 1-forms of the ambient dimension")
            rows[i - 1] = [img.coefficient(j + 1) for j in range(n)]
        return cls(rows)

    def image(self, i: int) -> KForm:
        return self._images[i - 1]

    def compose(self, then: "CoframeChange") -> "CoframeChange":
        """Change equal to applying ``self`` first and ``then`` second (matrix ``self @ then``)."""
        n = self.dim
        A, B = self.matrix, then.matrix
        return CoframeChange(
            [[sum((A[i][k] * B[k][j] for k in range(n)), ZERO) for j in range(n)] for i in range(n)]
        )

    def __eq__(self, other):
        return isinstance(other, CoframeChange) and self.matrix == other.matrix

    def __hash__(self):
        return hash(self.matrix)

    def __repr__(self):
        return f"CoframeChange({[[x.to_literal() for x in r] for r in self.matrix]})"


def substitute(f: KForm, change: CoframeChange) -> KForm:
    """Replace each ``e^i`` by its image and expand multiplicatively."""
    if change.dim != f.dim:
        raise DimensionMismatch(f"change of dimension {change.dim} applied to a {f.dim}-dimensional form")
    out = KForm.zero(f.dim, f.degree)
    for I, c in f.terms.items():
        img = KForm.one(f.dim)
        for i in I:
            img = wedge(img, change.image(i))
        out = out + img * c
    return out


def apply_derivation(f: KForm, matrix: Sequence[Sequence]) -> KForm:
    """Extend ``e^i -> sum_j M[i][j] e^j`` to ``f`` as a degree-0 derivation."""
    n = f.dim
    rows = [[as_scalar(x) for x in row] for row in matrix]
    images = [KForm._from_clean(n, 1, {(j + 1,): c for j, c in enumerate(row) if c}) for row in rows]
    out = KForm.zero(n, f.degree)
    for I, c in f.terms.items():
        for p, i in enumerate(I):
            left = KForm._from_clean(n, p, {I[:p]: ONE})
            right = KForm._from_clean(n, len(I) - p - 1, {I[p + 1:]: ONE})
            out = out + wedge(wedge(left, images[i - 1]), right) * c
    return out
