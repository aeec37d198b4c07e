"""Exact linear algebra over Q(sqrt 3) on sparse vectors.

Vectors are dicts ``{key: Scalar}`` with hashable, orderable keys (column
indices or multi-indices); absent keys are zero.
"""
from __future__ import annotations

from typing import Hashable, Iterable, Sequence

from .exact_forms import ONE, ZERO, KForm, Scalar, as_scalar

__all__ = ["Echelon", "rank", "kernel_and_rank", "determinant", "form_vector", "vector_form"]


def _axpy(target: dict, coeff: Scalar, source: dict) -> None:
    """target += coeff * source, dropping zeros."""
    for k, c in source.items():
        v = target.get(k)
        nv = c * coeff if v is None else v + c * coeff
        if nv:
            target[k] = nv
        elif v is not None:
            del target[k]


class Echelon:
    """Incrementally maintained reduced row echelon basis.

    Each stored row has a pivot key absent from every other row, with pivot
    coefficient 1.  Rows optionally carry a ``combo``: the coefficients
    expressing the row in terms of the caller's original input vectors, which
    gives kernels and particular solutions without a second pass.
    """

    def __init__(self):
        self.rows: dict[Hashable, dict] = {}
        self.combos: dict[Hashable, dict] = {}

    def __len__(self):
        return len(self.rows)

    @property
    def rank(self) -> int:
        return len(self.rows)

    def reduce(self, vec: dict, combo: dict | None = None):
        """Return ``(residue, combo)`` after eliminating all stored pivots."""
        v = dict(vec)
        cmb = dict(combo) if combo is not None else None
        for p in [p for p in v if p in self.rows]:
            c = v.get(p)
            if c is None:
                continue
            _axpy(v, -c, self.rows[p])
            if cmb is not None:
                _axpy(cmb, -c, self.combos[p])
        return v, cmb

    def add(self, vec: dict, combo: dict | None = None) -> bool:
        """Insert ``vec``; return False (and leave the basis unchanged) if dependent."""
        v, cmb = self.reduce(vec, combo)
        if not v:
            return False
        p = min(v)
        inv = v[p].inverse()
        v = {k: c * inv for k, c in v.items()}
        if cmb is not None:
            cmb = {k: c * inv for k, c in cmb.items()}
        for q, row in self.rows.items():
            c = row.get(p)
            if c is not None:
                _axpy(row, -c, v)
                if cmb is not None:
                    _axpy(self.combos[q], -c, cmb)
        self.rows[p] = v
        if cmb is not None:
            self.combos[p] = cmb
        return True

    def contains(self, vec: dict) -> bool:
        return not self.reduce(vec)[0]

    def express(self, vec: dict):
        """Combination of original inputs equal to ``vec``, or None if outside the span."""
        if len(self.combos) != len(self.rows):
            raise ValueError("express() needs every row to be added with a combo")
        v, _ = self.reduce(vec)
        if v:
            return None
        # rows are fully reduced, so vec = sum over pivots p of vec[p] * row_p
        out: dict = {}
        for p in self.rows:
            c = vec.get(p)
            if c:
                _axpy(out, c, self.combos[p])
        return out


def rank(vectors: Iterable[dict]) -> int:
    ech = Echelon()
    for v in vectors:
        ech.add(v)
    return ech.rank


def kernel_and_rank(images: Sequence[dict]):
    """For a linear map given by the images of basis vectors ``0..m-1``,
    return ``(kernel_basis, rank, echelon)``.

    Kernel vectors are dicts ``{i: coeff}`` over the source basis indices.
    """
    ech = Echelon()
    ker = []
    for i, img in enumerate(images):
        v, cmb = ech.reduce(img, {i: ONE})
        if not v:
            ker.append(cmb)
        else:
            ech.add(img, {i: ONE})
    return ker, ech.rank, ech


def determinant(matrix: Sequence[Sequence]) -> Scalar:
    """Exact determinant by Gaussian elimination over the field."""
    a = [[as_scalar(x) for x in row] for row in matrix]
    n = len(a)
    det = ONE
    for col in range(n):
        piv = next((r for r in range(col, n) if a[r][col]), None)
        if piv is None:
            return ZERO
        if piv != col:
            a[col], a[piv] = a[piv], a[col]
            det = -det
        p = a[col][col]
        det = det * p
        inv = p.inverse()
        for r in range(col + 1, n):
            f = a[r][col]
            if f:
                f = f * inv
                row_c = a[col]
                a[r] = [x - f * y for x, y in zip(a[r], row_c)]
    return det


def form_vector(f: KForm) -> dict:
    return dict(f.terms)


def vector_form(vec: dict, dim: int, degree: int) -> KForm:
    return KForm(dim, degree, vec)
