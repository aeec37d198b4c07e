"""Gray-Hervella classification of invariant almost Hermitian structures.

The intrinsic torsion is ``F[i][j][k] = g((nabla_{e_i} J) e_j, e_k)``
(0-based frame indices), stored sparsely as ``{(i, j, k): Scalar}``.  It
lies in the space ``W`` of tensors with

    F(X, Y, Z) = -F(X, Z, Y) = -F(X, JY, JZ),

of dimension ``2n * n(n-1)`` in real dimension ``2n``.  ``W`` splits
orthogonally into ``W1 + W2 + W3 + W4``:

* ``W1 + W2`` / ``W3 + W4`` are the -1 / +1 eigenspaces of
  ``(S F)(X, Y, Z) = F(JX, JY, Z)``;
* ``W1`` is the totally skew part of ``W1 + W2``;
* ``W4`` is the image of ``theta -> Phi(theta) / (2(n-1))`` applied to the trace
  ``c12(F)(Z) = sum_i F(e_i, e_i, Z)``, where
  ``Phi(t)(X,Y,Z) = <X,Y>t(Z) - <X,Z>t(Y) - <X,JY>t(JZ) + <X,JZ>t(JY)``.

``J`` is a matrix with ``J[a][b] = g(J e_a, e_b)``, so the fundamental form
``w(X, Y) = g(JX, Y)`` has coefficients ``w_ab = J[a][b]``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations

from .errors import ConventionError, InvalidStructureError
from .exact_forms import ONE, ZERO, KForm, Scalar, apply_derivation, as_scalar, contract, hodge_star, wedge
from .exact_linalg import Echelon
from .invariant_curvature import koszul_connection
from .lie_ce import LieAlgebraSpec

__all__ = [
    "AlmostHermitianStructure",
    "TorsionTensor",
    "TorsionReport",
    "standard_J",
    "parse_matrix",
    "fundamental_form",
    "nijenhuis",
    "torsion_tensor",
    "project_classes",
    "projectors",
    "verify_gh_dimensions",
    "gh_dimension_formulas",
    "classify_point",
    "lee_form_from_dw",
    "lee_form_codifferential",
    "type_21_part",
    "CLASS_SUBSETS",
]

CLASS_SUBSETS = tuple(
    "".join(str(i) for i in s) for k in range(5) for s in combinations((1, 2, 3, 4), k)
)


def standard_J(n2: int) -> list:
    """``J e_{2a-1} = e_{2a}`` for a = 1..n."""
    J = [[ZERO] * n2 for _ in range(n2)]
    for a in range(0, n2, 2):
        J[a][a + 1] = ONE
        J[a + 1][a] = -ONE
    return J


def parse_matrix(text: str) -> list:
    """Whitespace-separated Scalar literals, one matrix row per line."""
    import re

    from .errors import ParseError
    from .exact_forms import parse_scalar

    tok = re.compile(r"[+-]?\d+(?:/\d+)?(?:[+-]\d+(?:/\d+)?\s*\*?\s*s3|\s*\*?\s*s3)?")
    rows = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        pos, row = 0, []
        while pos < len(line):
            if line[pos] in " \t,":
                pos += 1
                continue
            m = tok.match(line, pos)
            if not m:
                raise ParseError(f"malformed matrix entry near {line[pos:pos + 10]!r}", position=pos, line=lineno)
            row.append(parse_scalar(m.group(0)))
            pos = m.end()
        rows.append(row)
    if not rows or any(len(r) != len(rows) for r in rows):
        raise ParseError("matrix must be square with one row per line")
    return rows


@dataclass(frozen=True)
class AlmostHermitianStructure:
    spec: LieAlgebraSpec
    J: tuple
    orientation_compatible: bool = field(init=False)

    def __post_init__(self):
        n2 = self.spec.dim
        if n2 % 2:
            raise InvalidStructureError("almost Hermitian structures need even dimension")
        J = tuple(tuple(as_scalar(x) for x in row) for row in self.J)
        if len(J) != n2 or any(len(r) != n2 for r in J):
            raise InvalidStructureError(f"J must be a {n2}x{n2} matrix")
        for i in range(n2):
            for j in range(n2):
                if J[i][j] != -J[j][i]:
                    raise InvalidStructureError("J is not orthogonal: J^T J != 1 (J must be skew)")
                sq = sum((J[i][m] * J[m][j] for m in range(n2)), ZERO)
                if sq != (-1 if i == j else 0):
                    raise InvalidStructureError("J^2 != -1")
        object.__setattr__(self, "J", J)
        w = _omega(J)
        top = (w ** (n2 // 2)).terms.get(tuple(range(1, n2 + 1)), ZERO)
        object.__setattr__(self, "orientation_compatible", top.sign() > 0)

    @property
    def n(self) -> int:
        return self.spec.dim // 2


def _omega(J) -> KForm:
    n2 = len(J)
    return KForm._from_clean(n2, 2, {(i + 1, j + 1): J[i][j] for i in range(n2) for j in range(i + 1, n2) if J[i][j]})


def fundamental_form(ahs: AlmostHermitianStructure) -> KForm:
    return _omega(ahs.J)


# ---------------------------------------------------------------------------
# Nijenhuis tensor


def _vec_bracket(B, u: list, w: list) -> list:
    n = len(u)
    out = [ZERO] * n
    for i, ui in enumerate(u):
        if not ui:
            continue
        for j, wj in enumerate(w):
            if not wj:
                continue
            c = ui * wj
            for k, b in enumerate(B[i][j]):
                if b:
                    out[k] = out[k] + c * b
    return out


def _vec_J(J, u: list) -> list:
    n = len(u)
    out = [ZERO] * n
    for m, um in enumerate(u):
        if um:
            for k in range(n):
                if J[m][k]:
                    out[k] = out[k] + um * J[m][k]
    return out


def nijenhuis(ahs: AlmostHermitianStructure) -> dict:
    """``N(X,Y) = [JX,JY] - [X,Y] - J[JX,Y] - J[X,JY]`` on frame pairs;
    returns ``{(a, b, k): coeff}`` (nonzero components only)."""
    n2 = ahs.spec.dim
    B = ahs.spec.bracket()
    J = ahs.J
    basis = [[ONE if i == a else ZERO for i in range(n2)] for a in range(n2)]
    Jb = [_vec_J(J, e) for e in basis]
    out = {}
    for a in range(n2):
        for b in range(a + 1, n2):
            t1 = _vec_bracket(B, Jb[a], Jb[b])
            t2 = B[a][b]
            t3 = _vec_J(J, _vec_bracket(B, Jb[a], basis[b]))
            t4 = _vec_J(J, _vec_bracket(B, basis[a], Jb[b]))
            for k in range(n2):
                v = t1[k] - t2[k] - t3[k] - t4[k]
                if v:
                    out[(a, b, k)] = v
                    out[(b, a, k)] = -v
    return out


# ---------------------------------------------------------------------------
# tensor operators on W


class _Ops:
    """Sparse linear operators on 3-tensors determined by J."""

    def __init__(self, J):
        self.J = J
        self.n2 = len(J)
        self.n = self.n2 // 2
        # column lists: cols[b] = [(a, J[a][b])] so that (J inserted)(.. a ..) = sum_b J[a][b] t(.. b ..)
        self.cols = [[(a, J[a][b]) for a in range(self.n2) if J[a][b]] for b in range(self.n2)]
        self.rows = [[(b, J[a][b]) for b in range(self.n2) if J[a][b]] for a in range(self.n2)]

    @staticmethod
    def _acc(out, key, v):
        prev = out.get(key)
        nv = v if prev is None else prev + v
        if nv:
            out[key] = nv
        elif prev is not None:
            del out[key]

    def slot(self, t: dict, s: int) -> dict:
        out: dict = {}
        for idx, v in t.items():
            for a, c in self.cols[idx[s]]:
                key = idx[:s] + (a,) + idx[s + 1:]
                self._acc(out, key, c * v)
        return out

    def S(self, t):
        return self.slot(self.slot(t, 0), 1)

    def constrain(self, t: dict) -> dict:
        """Orthogonal projection of an arbitrary 3-tensor onto W."""
        half = Scalar(1, 0) / 2
        skew: dict = {}
        for (a, b, c), v in t.items():
            self._acc(skew, (a, b, c), v * half)
            self._acc(skew, (a, c, b), -v * half)
        anti = self.slot(self.slot(skew, 1), 2)
        out = dict(skew)
        for k, v in anti.items():
            self._acc(out, k, -v)
        return {k: v * half for k, v in out.items()}

    @staticmethod
    def lin(*pairs) -> dict:
        out: dict = {}
        for c, t in pairs:
            for k, v in t.items():
                _Ops._acc(out, k, v * c)
        return out

    def cyclic(self, t):
        third = Scalar(1, 0) / 3
        out: dict = {}
        for (x, y, z), v in t.items():
            w = v * third
            self._acc(out, (x, y, z), w)
            self._acc(out, (z, x, y), w)
            self._acc(out, (y, z, x), w)
        return out

    def c12(self, t) -> list:
        th = [ZERO] * self.n2
        for (a, b, c), v in t.items():
            if a == b:
                th[c] = th[c] + v
        return th

    def Jcov(self, th: list) -> list:
        """``(theta o J)(e_c) = sum_m J[c][m] theta_m``."""
        return [sum((cm * th[m] for m, cm in self.rows[c]), ZERO) for c in range(self.n2)]

    def Phi(self, th: list) -> dict:
        n2 = self.n2
        Jt = self.Jcov(th)
        out: dict = {}
        for a in range(n2):
            for c in range(n2):
                if th[c]:
                    self._acc(out, (a, a, c), th[c])
                    self._acc(out, (a, c, a), -th[c])
            # -<X,JY> t(JZ): <e_a, J e_b> = J[b][a]
            for b, jba in self.cols[a]:
                # here cols[a] gives (b, J[b][a])
                for c in range(n2):
                    if Jt[c]:
                        self._acc(out, (a, b, c), -jba * Jt[c])
                        self._acc(out, (a, c, b), jba * Jt[c])
        return out

    def project(self, t: dict) -> tuple:
        """``(F1, F2, F3, F4)`` for ``t`` in W."""
        half = Scalar(1, 0) / 2
        St = self.S(t)
        p12 = self.lin((half, t), (-half, St))
        p34 = self.lin((half, t), (half, St))
        f1 = self.cyclic(p12)
        f2 = self.lin((ONE, p12), (-ONE, f1))
        if self.n < 2:
            f4: dict = {}
        else:
            f4 = {k: v / (2 * (self.n - 1)) for k, v in self.Phi(self.c12(t)).items()}
        f3 = self.lin((ONE, p34), (-ONE, f4))
        return f1, f2, f3, f4


def _norm_sq(t: dict) -> Scalar:
    return sum((v * v for v in t.values()), ZERO)


# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TorsionTensor:
    F: dict
    J: tuple

    @property
    def dim(self):
        return len(self.J)

    def component(self, i, j, k) -> Scalar:
        return self.F.get((i, j, k), ZERO)


@dataclass
class TorsionReport:
    norms: dict  # {1: |F1|^2, ..., 4: |F4|^2}
    total_norm: Scalar
    lee_form: KForm
    components: tuple  # (F1, F2, F3, F4) sparse tensors
    memberships: dict = field(default_factory=dict)  # subset label -> bool
    flags: dict = field(default_factory=dict)
    extras: dict = field(default_factory=dict)

    @property
    def minimal_class(self) -> str:
        return "".join(str(i) for i in (1, 2, 3, 4) if self.norms[i])

    @property
    def is_kahler(self) -> bool:
        return self.minimal_class == ""


def torsion_tensor(ahs: AlmostHermitianStructure) -> TorsionTensor:
    """``F[i][j][k] = sum_m (J[j][m] gamma[i][m][k] - gamma[i][j][m] J[m][k])``."""
    G = koszul_connection(ahs.spec).gamma
    J = ahs.J
    n2 = ahs.spec.dim
    F = {}
    for i in range(n2):
        for j in range(n2):
            for k in range(n2):
                v = ZERO
                for m in range(n2):
                    if J[j][m] and G[i][m][k]:
                        v = v + J[j][m] * G[i][m][k]
                    if G[i][j][m] and J[m][k]:
                        v = v - G[i][j][m] * J[m][k]
                if v:
                    F[(i, j, k)] = v
    return TorsionTensor(F, ahs.J)


def project_classes(T: TorsionTensor) -> TorsionReport:
    ops = _Ops(T.J)
    if ops.constrain(T.F) != T.F:
        raise InvalidStructureError("tensor violates F(X,Y,Z) = -F(X,Z,Y) = -F(X,JY,JZ)")
    comps = ops.project(T.F)
    norms = {i + 1: _norm_sq(c) for i, c in enumerate(comps)}
    n2 = ops.n2
    if ops.n >= 2:
        lee = ops.Jcov(ops.c12(T.F))
        lee_form = KForm._from_clean(n2, 1, {(c + 1,): v / (ops.n - 1) for c, v in enumerate(lee) if v})
    else:
        lee_form = KForm.zero(n2, 1)
    members = {}
    present = {i for i in (1, 2, 3, 4) if norms[i]}
    for label in CLASS_SUBSETS:
        allowed = {int(ch) for ch in label}
        members[label] = present <= allowed
    return TorsionReport(
        norms=norms,
        total_norm=_norm_sq(T.F),
        lee_form=lee_form,
        components=comps,
        memberships=members,
    )


# ---------------------------------------------------------------------------
# the dw route


def type_21_part(gamma: KForm, J) -> KForm:
    """``[[Lambda^{2,1}]]`` component of a 3-form: ``(D^2 + 9)/8`` with ``D`` the
    derivation extending ``J`` on 1-forms."""
    n2 = len(J)
    Jt = [[J[j][i] for j in range(n2)] for i in range(n2)]
    D2 = apply_derivation(apply_derivation(gamma, Jt), Jt)
    return (D2 + gamma * 9) * (Scalar(1, 0) / 8)


def lee_form_from_dw(dw: KForm, w: KForm, n: int) -> KForm:
    """``theta = Lambda(dw) / (n-1)`` with ``Lambda = sum_{i<j} w_ij i(e_j) i(e_i)``."""
    out = KForm.zero(dw.dim, 1)
    for (i, j), c in w.terms.items():
        out = out + contract(j, contract(i, dw)) * c
    return out * (Scalar(1, 0) / (n - 1))


def lee_form_codifferential(spec: LieAlgebraSpec, J, orientation: int = 1) -> KForm:
    """Lee form from the codifferential ``delta w = - * d * w``:
    ``theta(X) = -delta w(JX) / (n-1)``."""
    w = _omega(J)
    n2 = spec.dim
    n = n2 // 2
    delta = -hodge_star(spec.d(hodge_star(w, orientation)), orientation)
    comps = [delta.coefficient(m + 1) for m in range(n2)]
    out = {}
    for c in range(n2):
        v = sum((J[c][m] * comps[m] for m in range(n2) if J[c][m]), ZERO)
        if v:
            out[(c + 1,)] = -v / (n - 1)
    return KForm._from_clean(n2, 1, out)


def classify_point(spec: LieAlgebraSpec, J) -> TorsionReport:
    """Torsion report with independent cross-checks.

    Raises :class:`ConventionError` if the F route and the dw / Nijenhuis
    routes disagree.
    """
    ahs = AlmostHermitianStructure(spec, tuple(tuple(r) for r in J))
    n = ahs.n
    T = torsion_tensor(ahs)
    rep = project_classes(T)
    w = fundamental_form(ahs)
    dw = spec.d(w)
    N = nijenhuis(ahs)
    herm_N = not N
    herm_F = not rep.norms[1] and not rep.norms[2]
    dw21 = type_21_part(dw, ahs.J) if dw else dw
    qk_dw = not dw21
    qk_F = not rep.norms[3] and not rep.norms[4]
    sympl_dw = not dw
    sympl_F = not rep.norms[1] and not rep.norms[3] and not rep.norms[4]
    flags = {
        "hermitian_nijenhuis": herm_N,
        "hermitian_projection": herm_F,
        "quasi_kahler_dw": qk_dw,
        "quasi_kahler_projection": qk_F,
        "symplectic_dw": sympl_dw,
        "symplectic_projection": sympl_F,
        "orientation_compatible": ahs.orientation_compatible,
    }
    problems = []
    if herm_N != herm_F:
        problems.append("Hermitian: Nijenhuis route and projection route disagree")
    if qk_dw != qk_F:
        problems.append("quasi-Kahler: dw route and projection route disagree")
    if sympl_dw != sympl_F:
        problems.append("symplectic: dw route and projection route disagree")
    if n >= 2:
        theta_dw = lee_form_from_dw(dw, w, n)
        theta_cod = lee_form_codifferential(spec, ahs.J)
        flags["lee_routes_agree"] = theta_dw == rep.lee_form == theta_cod
        if not flags["lee_routes_agree"]:
            problems.append("Lee form: contraction, codifferential and trace routes disagree")
        if rep.minimal_class == "4":
            flags["dw_equals_theta_wedge_w"] = dw == wedge(rep.lee_form, w)
            if not flags["dw_equals_theta_wedge_w"]:
                problems.append("pure W4 structure with dw != theta ^ w")
    flags["consistent"] = not problems
    if problems:
        raise ConventionError("; ".join(problems))
    rep.flags = flags
    rep.extras = {"dw": dw, "nijenhuis": N, "fundamental_form": w}
    return rep


# ---------------------------------------------------------------------------
# dimensions


def gh_dimension_formulas(n: int) -> tuple:
    return (
        n * (n - 1) * (n - 2) // 3,
        2 * n * (n - 1) * (n + 1) // 3,
        n * (n + 1) * (n - 2),
        2 * n,
    )


def _w_basis(ops: _Ops) -> list:
    """Basis of W: e^a (x) b for b in a basis of the J-anti-invariant 2-forms."""
    n2 = ops.n2
    ech = Echelon()
    two = []
    for b, c in combinations(range(n2), 2):
        t = {(0, b, c): ONE, (0, c, b): -ONE}
        q = {k[1:]: v for k, v in ops.constrain(t).items()}
        flat = {k: v for k, v in q.items() if k[0] < k[1]}
        if flat and ech.add(flat):
            two.append(q)
    return [{(a,) + k: v for k, v in q.items()} for a in range(n2) for q in two]


def projectors(J):
    """Callable ``P(t) -> (F1, F2, F3, F4)`` for the given J."""
    return _Ops([[as_scalar(x) for x in r] for r in J]).project


def verify_gh_dimensions(n: int) -> dict:
    """Exact ranks of the four projectors on W for the standard J on R^{2n}.

    Also verifies idempotency, mutual annihilation and completeness on a
    basis of W, and computes ``dim W`` independently as the rank of the
    projection of every elementary 3-tensor.
    """
    if not 2 <= n <= 5:
        raise ValueError("n must satisfy 2 <= n <= 5")
    ops = _Ops(standard_J(2 * n))
    basis = _w_basis(ops)
    images = [ops.project(b) for b in basis]
    idempotent = orthogonal = complete = True
    echs = [Echelon() for _ in range(4)]
    for b, comps in zip(basis, images):
        total = ops.lin(*((ONE, c) for c in comps))
        if total != b:
            complete = False
        for i, ci in enumerate(comps):
            again = ops.project(ci)
            for j, cj in enumerate(again):
                if i == j and cj != ci:
                    idempotent = False
                if i != j and cj:
                    orthogonal = False
            echs[i].add(ci)
    # orthogonality in the tensor inner product of the four images
    for i in range(4):
        for j in range(i + 1, 4):
            for ri in echs[i].rows.values():
                for rj in echs[j].rows.values():
                    if sum((v * rj[k] for k, v in ri.items() if k in rj), ZERO):
                        orthogonal = False
    n2 = 2 * n
    brute = Echelon()
    for a in range(n2):
        for b in range(n2):
            for c in range(n2):
                brute.add(ops.constrain({(a, b, c): ONE}))
    ranks = tuple(e.rank for e in echs)
    return {
        "n": n,
        "ranks": ranks,
        "expected": gh_dimension_formulas(n),
        "total": sum(ranks),
        "dim_W": brute.rank,
        "basis_size": len(basis),
        "idempotent": idempotent,
        "orthogonal": orthogonal,
        "complete": complete,
    }
