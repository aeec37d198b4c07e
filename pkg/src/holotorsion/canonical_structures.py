"""Canonical G2, Spin(7) and Sp(2)Sp(1) forms, and the exact verification of
a closed but non-parallel quaternionic 4-form on (M6) x T^2."""
from __future__ import annotations

import enum
from dataclasses import dataclass, field

from .errors import DimensionMismatch
from .exact_forms import ONE, S3, CoframeChange, KForm, Scalar, hodge_star, parse_form, substitute, wedge
from .exact_linalg import Echelon
from .lie_ce import LieAlgebraSpec, builtin_algebra

__all__ = [
    "StructureKind",
    "build",
    "complex_volume_pair",
    "wedge_complex",
    "ReductionCheck",
    "verify_reduction_minus",
    "verify_reduction_plus",
    "theorem_substitution",
    "Theorem7Report",
    "theorem7_verify",
    "closed_monomial_census",
    "non_parallel_witness",
    "G2TypeReport",
    "classify_g2",
    "g2_type_from_derivatives",
]


class StructureKind(enum.Enum):
    G2_THREE_FORM = 7
    QUATERNION_TRIPLE = 8
    OMEGA_PLUS = "8+"
    OMEGA_MINUS = "8-"
    SIGMA = "6s"
    TAU = "6t"
    ALPHA = "6a"
    BETA = "6b"

    @property
    def dim(self) -> int:
        return {"G2_THREE_FORM": 7, "SIGMA": 6, "TAU": 6, "ALPHA": 6, "BETA": 6}.get(self.name, 8)


_LITERALS = {
    StructureKind.G2_THREE_FORM: "e{125}-e{345}+e{136}-e{426}+e{147}-e{237}+e{567}",
    StructureKind.SIGMA: "-e{12}+e{34}+e{56}",
    StructureKind.TAU: "e{12}+e{34}+e{56}",
    StructureKind.ALPHA: "3*e{135}+e{146}+e{236}+e{245}",
    StructureKind.BETA: "3*e{246}+e{235}+e{136}+e{145}",
}
_TRIPLE = (
    "e{13}+e{57}+e{24}+e{68}",
    "e{15}-e{37}+e{26}-e{48}",
    "e{17}+e{35}+e{28}+e{46}",
)


def build(kind: StructureKind | str):
    """The canonical form for ``kind``; a 3-tuple for QUATERNION_TRIPLE."""
    if isinstance(kind, str):
        kind = StructureKind[kind.upper()]
    if kind is StructureKind.QUATERNION_TRIPLE:
        return tuple(parse_form(t, 8) for t in _TRIPLE)
    if kind in (StructureKind.OMEGA_PLUS, StructureKind.OMEGA_MINUS):
        w1, w2, w3 = build(StructureKind.QUATERNION_TRIPLE)
        last = w3 ^ w3
        return (w1 ^ w1) + (w2 ^ w2) + (last if kind is StructureKind.OMEGA_PLUS else -last)
    return parse_form(_LITERALS[kind], kind.dim)


# -- complex forms as (real, imaginary) pairs ------------------------------


def wedge_complex(p: tuple, q: tuple) -> tuple:
    a, b = p
    c, d = q
    return (wedge(a, c) - wedge(b, d), wedge(a, d) + wedge(b, c))


def complex_volume_pair(dim: int = 6, conjugate_first: bool = True) -> tuple:
    """``(phi, psi)``, real and imaginary parts of
    ``(e^1 - i e^2)(e^3 + i e^4)(e^5 + i e^6)``.

    The conjugate in the first factor matches ``sigma = -e^12 + e^34 + e^56``
    and is what makes the Omega_- reduction identity hold.  With
    ``conjugate_first=False`` the literal product ``(e^1 + i e^2)...`` is
    returned; the identity then fails by four monomials.
    """
    acc = None
    for k in range(1, 7, 2):
        im = KForm.basis(dim, k + 1)
        factor = (KForm.basis(dim, k), -im if (k == 1 and conjugate_first) else im)
        acc = factor if acc is None else wedge_complex(acc, factor)
    return acc


def _lift(f: KForm, dim: int = 8) -> KForm:
    return KForm._from_clean(dim, f.degree, dict(f.terms))


@dataclass
class ReductionCheck:
    holds: bool
    residue: KForm
    side_conditions: dict  # name -> wedge product (zero when the condition holds)

    def __bool__(self):
        return self.holds


def _reduction(omega4: KForm, two: KForm, a: KForm, b: KForm, sign_sq: int) -> ReductionCheck:
    e7, e8 = KForm.basis(8, 7), KForm.basis(8, 8)
    e78 = KForm.basis(8, 7, 8)
    two8, a8, b8 = _lift(two), _lift(a), _lift(b)
    half = ONE / 2
    rhs = (two8 ^ two8) * (half * sign_sq) + (a8 ^ e7) + (b8 ^ e8) - (two8 ^ e78)
    residue = omega4 * half - rhs
    sides = {"two_form^first": two ^ a, "two_form^second": two ^ b}
    return ReductionCheck(not residue and not any(sides.values()), residue, sides)


def verify_reduction_minus(phi: KForm | None = None, psi: KForm | None = None, sigma: KForm | None = None) -> ReductionCheck:
    """``Omega_-/2 = sigma^2/2 + phi e^7 + psi e^8 - sigma e^78`` and
    ``sigma phi = 0 = sigma psi``; pass perturbed forms to falsify."""
    p0, q0 = complex_volume_pair()
    return _reduction(
        build(StructureKind.OMEGA_MINUS),
        sigma if sigma is not None else build(StructureKind.SIGMA),
        phi if phi is not None else p0,
        psi if psi is not None else q0,
        +1,
    )


def verify_reduction_plus(alpha: KForm | None = None, beta: KForm | None = None, tau: KForm | None = None,
                          tau_sq_sign: int = -1, omega4: KForm | None = None) -> ReductionCheck:
    """``Omega_+/2 = -tau^2/2 + alpha e^7 + beta e^8 - tau e^78`` and
    ``tau alpha = 0 = tau beta``."""
    return _reduction(
        omega4 if omega4 is not None else build(StructureKind.OMEGA_PLUS),
        tau if tau is not None else build(StructureKind.TAU),
        alpha if alpha is not None else build(StructureKind.ALPHA),
        beta if beta is not None else build(StructureKind.BETA),
        tau_sq_sign,
    )


# -- the closed Sp(2)Sp(1) form ------------------------------------------


def theorem_substitution(dim: int = 8) -> CoframeChange:
    """``e^1 -> e^1 + sqrt3 e^2``, ``e^3 -> e^3 - sqrt3 e^4``."""
    return CoframeChange.from_images(dim, {
        1: KForm.basis(dim, 1) + KForm.basis(dim, 2, coeff=S3),
        3: KForm.basis(dim, 3) - KForm.basis(dim, 4, coeff=S3),
    })


def closed_monomial_census(spec: LieAlgebraSpec | None = None) -> dict:
    """Closedness of each distinct simple 3-form occurring in alpha and beta."""
    spec = spec or builtin_algebra("m6")
    out = {}
    for kind in (StructureKind.ALPHA, StructureKind.BETA):
        for idx in build(kind).support():
            f = KForm.basis(spec.dim, *idx)
            out["e{" + "".join(map(str, idx)) + "}"] = not spec.d(f)
    return out


@dataclass
class Theorem7Report:
    closed_after_sub: bool
    nonclosed_before_sub: bool
    irrational: bool
    ideal_witness_index: int | None
    residue_monomials: list  # support of d(Omega-hat); empty when closed
    d_omega_before: KForm
    census: dict
    substitution_paths_agree: bool
    printed_effect_matches: bool
    witness: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return (
            self.closed_after_sub
            and self.nonclosed_before_sub
            and self.irrational
            and self.ideal_witness_index is not None
            and self.substitution_paths_agree
            and self.printed_effect_matches
            and sum(not v for v in self.census.values()) == 1
        )


def theorem7_verify() -> Theorem7Report:
    spec = builtin_algebra("m6x2")
    sub = theorem_substitution()
    omega = build(StructureKind.OMEGA_PLUS)
    d_before = spec.d(omega)
    omega_hat = substitute(omega, sub)
    d_after = spec.d(omega_hat)
    irrational = any(c.b for c in omega_hat.terms.values())

    # second construction path: substitute the 6-dim pieces, then reassemble
    sub6 = theorem_substitution(6)
    tau, alpha, beta = (build(k) for k in (StructureKind.TAU, StructureKind.ALPHA, StructureKind.BETA))
    a_hat, b_hat, t_hat = substitute(alpha, sub6), substitute(beta, sub6), substitute(tau, sub6)
    paths_agree = verify_reduction_plus(alpha=a_hat, beta=b_hat, tau=t_hat, omega4=omega_hat).holds
    printed = (
        t_hat == tau
        and a_hat == alpha + parse_form("-9*e{245}-3s3*e{145}+3s3*e{235}", 6)
        and b_hat == beta + parse_form("-3*e{246}-1s3*e{146}+1s3*e{236}", 6)
    )
    witness = non_parallel_witness(spec, sub)
    return Theorem7Report(
        closed_after_sub=not d_after,
        nonclosed_before_sub=bool(d_before),
        irrational=irrational,
        ideal_witness_index=witness["index"],
        residue_monomials=["e{" + "".join(map(str, m)) + "}" for m in d_after.support()],
        d_omega_before=d_before,
        census=closed_monomial_census(builtin_algebra("m6")),
        substitution_paths_agree=paths_agree,
        printed_effect_matches=printed,
        witness=witness,
    )


def non_parallel_witness(spec: LieAlgebraSpec | None = None, sub: CoframeChange | None = None) -> dict:
    """First ``i`` (1-based) with ``d w_i`` outside ``span{w_j ^ e^k}`` in degree 3.

    Returns ``{"index": i or None, "span_rank": r, "outside": [...]}``.
    """
    spec = spec or builtin_algebra("m6x2")
    if spec.dim != 8:
        raise DimensionMismatch("the quaternionic triple lives in dimension 8")
    triple = build(StructureKind.QUATERNION_TRIPLE)
    if sub is not None:
        triple = tuple(substitute(w, sub) for w in triple)
    ech = Echelon()
    for w in triple:
        for k in range(1, 9):
            ech.add(dict((w ^ KForm.basis(8, k)).terms))
    outside = [i for i, w in enumerate(triple, start=1) if not ech.contains(dict(spec.d(w).terms))]
    return {"index": outside[0] if outside else None, "span_rank": ech.rank, "outside": outside}


# -- G2 types --------------------------------------------------------------


@dataclass
class G2TypeReport:
    d_phi: KForm
    d_star_phi: KForm
    calibrated: bool
    cocalibrated: bool
    nearly_parallel_constant: Scalar | None
    parallel: bool


def _proportionality(f: KForm, g: KForm) -> Scalar | None:
    """``c`` with ``f = c g`` (both nonzero), else None."""
    if not f or not g or set(f.terms) != set(g.terms):
        return None
    k0 = next(iter(g.terms))
    c = f.terms[k0] / g.terms[k0]
    return c if f == g * c else None


def g2_type_from_derivatives(phi: KForm, d_phi: KForm, d_star_phi: KForm) -> G2TypeReport:
    cal, cocal = not d_phi, not d_star_phi
    c = _proportionality(d_phi, hodge_star(phi)) if cocal else None
    return G2TypeReport(d_phi, d_star_phi, cal, cocal, c, cal and cocal)


def classify_g2(spec: LieAlgebraSpec, phi: KForm) -> G2TypeReport:
    if spec.dim != 7 or phi.dim != 7:
        raise DimensionMismatch("G2 structures need dimension 7")
    if phi.degree != 3:
        raise DimensionMismatch("a G2 structure is a 3-form")
    return g2_type_from_derivatives(phi, spec.d(phi), spec.d(hodge_star(phi)))
