"""Levi-Civita connection and curvature of the left-invariant metric for
which the coframe ``e^1..e^n`` is orthonormal.

All arrays are nested lists indexed from 0 (frame vector ``e_{i+1}`` at
position ``i``).  Conventions:

* ``gamma[i][j][k] = g(nabla_{e_i} e_j, e_k)`` from the Koszul formula;
* ``R(X, Y) = nabla_[X,Y] - [nabla_X, nabla_Y]`` and
  ``R[i][j][k][l] = g(R(e_i, e_j) e_k, e_l)``, so that
  ``Ric[j][l] = sum_i R[i][j][i][l]`` is positive on round spheres.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .errors import InvalidStructureError
from .exact_forms import ZERO, Scalar, as_scalar
from .lie_ce import LieAlgebraSpec

__all__ = [
    "ConnectionTable",
    "CurvatureTensor",
    "CurvatureScalars",
    "koszul_connection",
    "curvature",
    "curvature_scalars",
    "ricci",
    "symmetry_residues",
    "gray_identity_residue",
    "is_einstein",
    "rotate_spec",
]


@dataclass(frozen=True)
class ConnectionTable:
    gamma: tuple
    bracket: tuple

    @property
    def dim(self):
        return len(self.gamma)


@dataclass(frozen=True)
class CurvatureTensor:
    R: tuple

    @property
    def dim(self):
        return len(self.R)

    def is_zero(self) -> bool:
        return all(not c for a in self.R for b in a for c_ in b for c in c_)


@dataclass(frozen=True)
class CurvatureScalars:
    s: Scalar
    ric_norm_sq: Scalar
    r_norm_sq: Scalar
    laplacian_s: Scalar  # identically zero: s is constant on the group


def _freeze(a):
    if isinstance(a, list):
        return tuple(_freeze(x) for x in a)
    return a


def koszul_connection(spec: LieAlgebraSpec) -> ConnectionTable:
    """``2 g(nabla_X Y, Z) = g([X,Y],Z) - g([Y,Z],X) + g([Z,X],Y)`` on the frame."""
    n = spec.dim
    B = spec.bracket()
    half = Scalar(1, 0) / 2
    gamma = [[[ZERO] * n for _ in range(n)] for _ in range(n)]
    for i in range(n):
        for j in range(n):
            for k in range(n):
                c = B[i][j][k] - B[j][k][i] + B[k][i][j]
                if c:
                    gamma[i][j][k] = c * half
    return ConnectionTable(_freeze(gamma), _freeze(B))


def curvature(spec_or_conn) -> CurvatureTensor:
    conn = spec_or_conn if isinstance(spec_or_conn, ConnectionTable) else koszul_connection(spec_or_conn)
    G, B = conn.gamma, conn.bracket
    n = conn.dim
    # sparse row lists: nz_gamma[i][j] = [(m, gamma[i][j][m]) ...]
    nzG = [[[(m, c) for m, c in enumerate(G[i][j]) if c] for j in range(n)] for i in range(n)]
    nzB = [[[(m, c) for m, c in enumerate(B[i][j]) if c] for j in range(n)] for i in range(n)]
    R = [[[[ZERO] * n for _ in range(n)] for _ in range(n)] for _ in range(n)]
    for i in range(n):
        for j in range(i + 1, n):
            for k in range(n):
                acc = [ZERO] * n
                # nabla_[e_i,e_j] e_k
                for m, b in nzB[i][j]:
                    for l, g in nzG[m][k]:
                        acc[l] = acc[l] + b * g
                # - nabla_i nabla_j e_k + nabla_j nabla_i e_k
                for m, g1 in nzG[j][k]:
                    for l, g2 in nzG[i][m]:
                        acc[l] = acc[l] - g1 * g2
                for m, g1 in nzG[i][k]:
                    for l, g2 in nzG[j][m]:
                        acc[l] = acc[l] + g1 * g2
                for l in range(n):
                    if acc[l]:
                        R[i][j][k][l] = acc[l]
                        R[j][i][k][l] = -acc[l]
    return CurvatureTensor(_freeze(R))


def ricci(R: CurvatureTensor) -> list:
    n = R.dim
    T = R.R
    return [[sum((T[i][j][i][l] for i in range(n)), ZERO) for l in range(n)] for j in range(n)]


def curvature_scalars(R: CurvatureTensor) -> CurvatureScalars:
    n = R.dim
    ric = ricci(R)
    s = sum((ric[j][j] for j in range(n)), ZERO)
    ric2 = sum((c * c for row in ric for c in row), ZERO)
    r2 = sum((c * c for a in R.R for b in a for cc in b for c in cc), ZERO)
    return CurvatureScalars(s=s, ric_norm_sq=ric2, r_norm_sq=r2, laplacian_s=ZERO)


def symmetry_residues(R: CurvatureTensor) -> dict:
    """Number of index tuples violating each classical symmetry (all 0 for a
    genuine curvature tensor)."""
    n = R.dim
    T = R.R
    bad = {"skew_ij": 0, "skew_kl": 0, "pair": 0, "bianchi": 0}
    rng = range(n)
    for i in rng:
        for j in rng:
            for k in rng:
                for l in rng:
                    r = T[i][j][k][l]
                    if r != -T[j][i][k][l]:
                        bad["skew_ij"] += 1
                    if r != -T[i][j][l][k]:
                        bad["skew_kl"] += 1
                    if r != T[k][l][i][j]:
                        bad["pair"] += 1
                    if r + T[j][k][i][l] + T[k][i][j][l]:
                        bad["bianchi"] += 1
    return bad


def _check_J(J: Sequence[Sequence], n: int):
    J = [[as_scalar(x) for x in row] for row in J]
    if len(J) != n or any(len(r) != n for r in J):
        raise InvalidStructureError(f"J must be {n}x{n}")
    for i in range(n):
        for j in range(n):
            sq = sum((J[i][m] * J[m][j] for m in range(n)), ZERO)
            if sq != (-1 if i == j else 0):
                raise InvalidStructureError("J^2 != -1")
            if J[i][j] != -J[j][i]:
                raise InvalidStructureError("J is not orthogonal (J^T J != 1)")
    return J


def gray_identity_residue(R: CurvatureTensor, J: Sequence[Sequence]) -> dict:
    """Nonzero components of

        R(W,X,Y,Z) + R(JW,JX,JY,JZ) - R(JW,JX,Y,Z) - R(JW,X,JY,Z) - R(JW,X,Y,JZ)
                   - R(W,JX,JY,Z) - R(W,JX,Y,JZ) - R(W,X,JY,JZ)

    over frame 4-tuples, which vanish when J is integrable.  ``J[a][b] =
    g(J e_a, e_b)``.
    """
    n = R.dim
    if n % 2:
        raise InvalidStructureError("Gray identity needs even dimension")
    J = _check_J(J, n)
    nzJ = [[(b, c) for b, c in enumerate(J[a]) if c] for a in range(n)]
    T = R.R

    def apply(t, slot):
        """Tensor with J inserted in the given argument slot."""
        out = [[[[ZERO] * n for _ in range(n)] for _ in range(n)] for _ in range(n)]
        for w in range(n):
            for x in range(n):
                for y in range(n):
                    for z in range(n):
                        idx = [w, x, y, z]
                        a = idx[slot]
                        acc = ZERO
                        for b, c in nzJ[a]:
                            idx2 = list(idx)
                            idx2[slot] = b
                            v = t[idx2[0]][idx2[1]][idx2[2]][idx2[3]]
                            if v:
                                acc = acc + c * v
                        out[w][x][y][z] = acc
        return out

    J0 = apply(T, 0)
    J1 = apply(T, 1)
    J01 = apply(J0, 1)
    J02 = apply(J0, 2)
    J03 = apply(J0, 3)
    J12 = apply(J1, 2)
    J13 = apply(J1, 3)
    J23 = apply(apply(T, 2), 3)
    J0123 = apply(apply(J01, 2), 3)
    res = {}
    for w in range(n):
        for x in range(n):
            for y in range(n):
                for z in range(n):
                    v = (
                        T[w][x][y][z]
                        + J0123[w][x][y][z]
                        - J01[w][x][y][z]
                        - J02[w][x][y][z]
                        - J03[w][x][y][z]
                        - J12[w][x][y][z]
                        - J13[w][x][y][z]
                        - J23[w][x][y][z]
                    )
                    if v:
                        res[(w, x, y, z)] = v
    return res


def is_einstein(spec: LieAlgebraSpec):
    """``(verdict, eigenvalues, spread)``: Ricci an exact multiple of the
    identity; eigenvalues exact (sympy) sorted ascending; spread as float."""
    import sympy

    R = curvature(spec)
    ric = ricci(R)
    n = spec.dim
    lam = ric[0][0] if n else ZERO
    verdict = all(ric[i][j] == (lam if i == j else 0) for i in range(n) for j in range(n))
    M = sympy.Matrix(n, n, lambda i, j: _to_sympy(ric[i][j]))
    eig = []
    for val, mult in M.eigenvals().items():
        eig.extend([sympy.nsimplify(val)] * mult)
    eig.sort(key=lambda e: float(e))
    spread = float(eig[-1] - eig[0]) if eig else 0.0
    return verdict, eig, spread


def _to_sympy(x: Scalar):
    import sympy

    return sympy.Rational(x.a.numerator, x.a.denominator) + sympy.Rational(x.b.numerator, x.b.denominator) * sympy.sqrt(3)


def rotate_spec(spec: LieAlgebraSpec, A: Sequence[Sequence]) -> LieAlgebraSpec:
    """Structure equations in the rotated orthonormal coframe ``f^i = sum_j A[i][j] e^j``
    (``A`` orthogonal).  The metric is unchanged, so curvature invariants must be."""
    from .exact_forms import CoframeChange, KForm, substitute

    n = spec.dim
    A = [[as_scalar(x) for x in r] for r in A]
    for i in range(n):
        for j in range(n):
            if sum((A[i][k] * A[j][k] for k in range(n)), ZERO) != (1 if i == j else 0):
                raise InvalidStructureError("rotation matrix is not orthogonal")
    # e^j = sum_i A[i][j] f^i  (A^{-1} = A^T);  df^i = sum_j A[i][j] de^j
    to_f = CoframeChange([[A[i][j] for i in range(n)] for j in range(n)])
    diffs = []
    for i in range(n):
        de = KForm.zero(n, 2)
        for j in range(n):
            if A[i][j]:
                de = de + spec.diffs[j] * A[i][j]
        diffs.append(substitute(de, to_f))
    return LieAlgebraSpec(n, diffs, name=f"{spec.name}(rotated)")
