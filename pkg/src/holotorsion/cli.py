"""Command-line entry point.

Every subcommand prints one JSON report ``{subcommand, version, inputs,
results, warnings}`` with sorted keys.  Exact scalars are printed as strings
(``p/q`` or ``p/q+r/s√3``), floats with 12 significant digits.  Exit status
is 0 on success, 1 on a domain error (JSON payload under ``error``) and 2 on
a usage error.
"""
from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
import warnings
from fractions import Fraction

import numpy as np

from . import __version__
from .errors import HolotorsionError, NotNilpotentError
from .exact_forms import KForm, Scalar, parse_form, parse_scalar
from .lie_ce import LieAlgebraSpec, builtin_algebra, nilpotency_step, parse_algebra

SURFACES = {
    "torus": "TORUS",
    "sphere": "UNIT_SPHERE",
    "polar-sphere": "SPHERE_POLAR_CHART",
    "plane": "PLANE",
}


class UsageError(Exception):
    """Bad flag values that argparse cannot catch by itself."""


# -- inputs -------------------------------------------------------------


def load_algebra(path: str, require_nilpotent: bool = True) -> LieAlgebraSpec:
    """An algebra from a ``@name`` built-in or a structure-equation file.

    The Jacobi identity is checked on construction; files must also describe
    a nilpotent algebra unless ``require_nilpotent`` is false.
    """
    if path.startswith("@"):
        try:
            return builtin_algebra(path)
        except (KeyError, ValueError) as exc:
            raise UsageError(str(exc).strip("'\"")) from None
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    spec = parse_algebra(text, name=os.path.basename(path))
    if require_nilpotent:
        try:
            nilpotency_step(spec)
        except NotNilpotentError as exc:
            raise NotNilpotentError(f"{path}: {exc}") from None
    return spec


def _iwasawa_almost_kahler() -> list:
    # J e1 = e6, J e2 = e5, J e3 = e4
    J = [[Scalar(0)] * 6 for _ in range(6)]
    for a, b in ((0, 5), (1, 4), (2, 3)):
        J[a][b] = Scalar(1)
        J[b][a] = Scalar(-1)
    return J


def load_J(path: str, dim: int) -> list:
    from .gray_hervella import parse_matrix, standard_J

    key = path.lower()
    if key == "@j0":
        return standard_J(dim)
    if key == "@ak":
        if dim != 6:
            raise UsageError("@ak is the almost-Kahler structure of a 6-dimensional algebra")
        return _iwasawa_almost_kahler()
    if path.startswith("@"):
        raise UsageError(f"unknown built-in J {path!r}; known: @J0, @ak")
    with open(path, encoding="utf-8") as fh:
        return parse_matrix(fh.read())


def _read_surface(text: str) -> str:
    from .geodesic_lab import surface

    if text.startswith("@"):
        name = SURFACES.get(text[1:].lower())
        if name is None:
            raise UsageError(f"unknown built-in surface {text!r}; known: " + ", ".join("@" + k for k in SURFACES))
        return getattr(surface, name)
    if os.path.isfile(text):
        with open(text, encoding="utf-8") as fh:
            return fh.read().strip()
    return text


def _number(text: str) -> float:
    """A float, or a constant expression such as ``pi/2``."""
    from .geodesic_lab.expr import evaluate, parse_expr

    try:
        return float(text)
    except ValueError:
        pass
    value = float(evaluate(parse_expr(text), 0.0, 0.0))
    if not math.isfinite(value):
        raise UsageError(f"not a finite number: {text!r}")
    return value


def _pair(text: str) -> tuple[float, float]:
    parts = text.split(",")
    if len(parts) != 2:
        raise UsageError(f"expected 'a,b', got {text!r}")
    return _number(parts[0]), _number(parts[1])


def _exact_or_float(text: str):
    try:
        return parse_scalar(text.strip())
    except (HolotorsionError, ValueError):
        return float(text)


# -- output -------------------------------------------------------------


def _float(x: float):
    if not math.isfinite(x):
        return None
    return float(f"{x:.12g}") + 0.0


def jsonable(obj):
    if isinstance(obj, (bool, type(None), str)):
        return obj
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return _float(float(obj))
    if isinstance(obj, (Scalar, Fraction, KForm)):
        return str(obj)
    if isinstance(obj, np.ndarray):
        return jsonable(obj.tolist())
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    return str(obj)


def dumps(obj) -> str:
    return json.dumps(jsonable(obj), sort_keys=True, indent=2, ensure_ascii=False)


def _exact(x) -> dict:
    return {"exact": str(x), "float": float(x)}


# -- subcommands --------------------------------------------------------


def cmd_verify(args):
    from . import canonical_structures as cs

    if args.what == "theorem7":
        rep = cs.theorem7_verify()
        return {
            "closed_after_sub": rep.closed_after_sub,
            "nonclosed_before_sub": rep.nonclosed_before_sub,
            "irrational": rep.irrational,
            "ideal_witness_index": rep.ideal_witness_index,
            "residue_monomials": rep.residue_monomials,
            "d_omega_before": rep.d_omega_before,
            "nonclosed_monomials": [k for k, closed in rep.census.items() if not closed],
            "closed_monomial_count": sum(rep.census.values()),
            "span_rank": rep.witness["span_rank"],
            "witness_indices": rep.witness["outside"],
            "substitution_paths_agree": rep.substitution_paths_agree,
            "printed_effect_matches": rep.printed_effect_matches,
            "ok": rep.ok,
        }
    out = {}
    for name, check in (("minus", cs.verify_reduction_minus()), ("plus", cs.verify_reduction_plus())):
        out[name] = {
            "holds": check.holds,
            "residue": check.residue,
            "side_conditions": {k: v for k, v in check.side_conditions.items()},
        }
    out["ok"] = out["minus"]["holds"] and out["plus"]["holds"]
    return out


def cmd_cohomology(args):
    from .lie_ce import invariant_cohomology

    spec = load_algebra(args.algebra)
    b = invariant_cohomology(spec)
    return {
        "betti": b,
        "euler_characteristic": sum((-1) ** k * x for k, x in enumerate(b)),
        "poincare_symmetric": b == b[::-1],
        "nilpotency_step": nilpotency_step(spec),
    }


def cmd_symplectic(args):
    from .lie_ce import symplectic_existence

    spec = load_algebra(args.algebra)
    seed = int(os.environ.get("HOLOTORSION_SEED", "0"))
    w = symplectic_existence(spec, seed=seed)
    if w is None:
        return {"exists": False, "witness": None, "seed": seed}
    top = (w ** (spec.dim // 2)).coefficient(*range(1, spec.dim + 1))
    return {"exists": True, "witness": w, "closed": not spec.d(w), "top_coefficient": top, "seed": seed}


def cmd_curvature(args):
    from .invariant_curvature import curvature, curvature_scalars, is_einstein, symmetry_residues

    spec = load_algebra(args.algebra, require_nilpotent=False)
    R = curvature(spec)
    cs = curvature_scalars(R)
    verdict, eig, spread = is_einstein(spec)
    return {
        "s": _exact(cs.s),
        "ric_norm_sq": _exact(cs.ric_norm_sq),
        "r_norm_sq": _exact(cs.r_norm_sq),
        "laplacian_s": _exact(cs.laplacian_s),
        "einstein": verdict,
        "ricci_eigenvalues": [str(e) for e in eig],
        "eigenvalue_spread": spread,
        "symmetry_violations": symmetry_residues(R),
    }


def cmd_classify(args):
    from .gray_hervella import classify_point

    spec = load_algebra(args.algebra, require_nilpotent=False)
    J = load_J(args.J, spec.dim)
    rep = classify_point(spec, J)
    return {
        "norms": {f"W{i}": v for i, v in rep.norms.items()},
        "total_norm": rep.total_norm,
        "class": "W" + rep.minimal_class if rep.minimal_class else "Kahler",
        "minimal_class": rep.minimal_class,
        "kahler": rep.is_kahler,
        "lee_form": rep.lee_form,
        "memberships": {("Z_" + (k or "empty")): v for k, v in rep.memberships.items()},
        "flags": rep.flags,
        "fundamental_form": rep.extras["fundamental_form"],
        "dw": rep.extras["dw"],
        "nijenhuis_zero": not rep.extras["nijenhuis"],
    }


def cmd_gh_dims(args):
    from .gray_hervella import verify_gh_dimensions

    rows = []
    for n in args.n or [2, 3]:
        r = verify_gh_dimensions(n)
        r["matches"] = tuple(r["ranks"]) == tuple(r["expected"]) and r["total"] == 2 * n * n * (n - 1)
        rows.append(r)
    return {"dimensions": rows, "ok": all(r["matches"] and r["idempotent"] and r["orthogonal"] and r["complete"] for r in rows)}


def cmd_classify_g2(args):
    from .canonical_structures import StructureKind, build, classify_g2

    spec = load_algebra(args.algebra, require_nilpotent=False)
    phi = parse_form(args.phi, 7, 3) if args.phi else build(StructureKind.G2_THREE_FORM)
    rep = classify_g2(spec, phi)
    return {
        "phi": phi,
        "d_phi": rep.d_phi,
        "d_star_phi": rep.d_star_phi,
        "calibrated": rep.calibrated,
        "cocalibrated": rep.cocalibrated,
        "nearly_parallel_constant": rep.nearly_parallel_constant,
        "parallel": rep.parallel,
    }


def cmd_geodesics(args):
    from .geodesic_lab import kernels
    from .geodesic_lab.surface import geodesic_circles, geodesic_spray, metric_data, parse_surface

    text = _read_surface(args.surface)
    surf = parse_surface(text)
    a, b = _pair(args.origin)
    if args.rays < 1 or not args.radius > 0 or not args.step > 0:
        raise UsageError("need --rays >= 1, --radius > 0 and --step > 0")
    md = metric_data(surf)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        rays = geodesic_spray(surf, a, b, args.rays, args.radius, args.step, metric=md)
        circles = geodesic_circles(surf, a, b, args.rays, args.radius, args.circles, rays=rays) if args.circles else []
    data = {
        "surface": text,
        "rays": [g.xyz for g in rays],
        "circles": [c.xyz for c in circles],
        "circle_parameters": [c.t for c in circles],
        "self_intersecting": [c.self_intersecting for c in circles],
    }
    if args.csv:
        with open(args.csv, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh)
            w.writerow(["curve", "s", "u", "v", "x", "y", "z"])
            for i, g in enumerate(rays):
                for s, (u, v), p in zip(g.s, g.uv, g.xyz):
                    w.writerow([f"ray{i}"] + [f"{x:.12g}" for x in (s, u, v, *p)])
            for j, c in enumerate(circles):
                for (u, v), p in zip(c.uv, c.xyz):
                    w.writerow([f"circle{j}"] + [f"{x:.12g}" for x in (c.t, u, v, *p)])
    summary = {
        "ray_count": len(rays),
        "circle_count": len(circles),
        "samples_per_ray": len(rays[0]),
        "truncated_rays": [i for i, g in enumerate(rays) if g.truncated],
        "self_intersecting_circles": [j for j, c in enumerate(circles) if c.self_intersecting],
        "backend": kernels.BACKEND,
    }
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(dumps(data))
            fh.write("\n")
        summary["out"] = args.out
    else:
        summary["data"] = data
    return summary, [str(w.message) for w in caught]


def cmd_ball(args):
    from .volume_lab import ball_volume

    return {"volume": ball_volume(args.dim, args.radius)}


def cmd_unit_radius(args):
    from .volume_lab import unit_volume_radius

    r = unit_volume_radius(args.dim)
    return {"radius": r, "asymptotic": math.sqrt(args.dim / (2 * math.pi * math.e))}


def cmd_slab(args):
    from .volume_lab import slab_volume, unit_volume_radius

    return {"volume": slab_volume(args.dim, args.half_width), "unit_radius": unit_volume_radius(args.dim)}


def cmd_expansion(args):
    from .volume_lab import ExpansionInput, expansion_input_from_spec, expansion_report

    if args.algebra:
        inp = expansion_input_from_spec(load_algebra(args.algebra, require_nilpotent=False))
    else:
        if args.dim is None:
            raise UsageError("--scalars needs --dim")
        vals = [_exact_or_float(x) for x in args.scalars.split(",")]
        if len(vals) != 4:
            raise UsageError("--scalars takes s,ric2,r2,lap")
        if not all(isinstance(v, Scalar) for v in vals):
            vals = [float(v) for v in vals]
        inp = ExpansionInput.for_dimension(args.dim, *vals)
    rep = expansion_report(inp)
    rep["input"] = {"n": inp.n, "s": inp.s, "ric_norm_sq": inp.ric_norm_sq,
                    "r_norm_sq": inp.r_norm_sq, "laplacian_s": inp.laplacian_s}
    return rep


def cmd_tube(args):
    from .volume_lab import tube_volume_cpn

    return {"volume": tube_volume_cpn(args.n, args.k, args.r)}


# -- parser -------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="holotorsion", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"holotorsion {__version__}")
    sub = p.add_subparsers(dest="command", required=True, metavar="COMMAND")

    s = sub.add_parser("verify", help="exact check of the closed 4-form theorem or the reduction identities")
    s.add_argument("what", choices=["theorem7", "reductions"])
    s.set_defaults(func=cmd_verify)

    for name, func, hlp in (
        ("cohomology", cmd_cohomology, "Betti numbers of invariant forms"),
        ("symplectic", cmd_symplectic, "search for an invariant symplectic form"),
        ("curvature", cmd_curvature, "curvature invariants of the orthonormal-coframe metric"),
    ):
        s = sub.add_parser(name, help=hlp)
        s.add_argument("--algebra", required=True, help="structure-equation file or @builtin")
        s.set_defaults(func=func)

    s = sub.add_parser("classify", help="Gray-Hervella class of an almost Hermitian structure")
    s.add_argument("--algebra", required=True)
    s.add_argument("--J", required=True, help="matrix file, @J0 or @ak")
    s.set_defaults(func=cmd_classify)

    s = sub.add_parser("gh-dims", help="ranks of the four torsion projectors")
    s.add_argument("--n", type=int, action="append", help="half-dimension (repeatable; default 2 and 3)")
    s.set_defaults(func=cmd_gh_dims)

    s = sub.add_parser("classify-g2", help="torsion type of a G2 3-form")
    s.add_argument("--algebra", required=True)
    s.add_argument("--phi", help="3-form literal (default: the standard G2 form)")
    s.set_defaults(func=cmd_classify_g2)

    s = sub.add_parser("geodesics", help="geodesic spray and circles on a parametric surface")
    s.add_argument("--surface", default="@torus", help="file, inline '(x, y, z)' or @torus/@sphere/@polar-sphere/@plane")
    s.add_argument("--origin", default="0,pi/2")
    s.add_argument("--rays", type=int, default=100)
    s.add_argument("--radius", type=float, default=4.0)
    s.add_argument("--step", type=float, default=0.01)
    s.add_argument("--circles", type=float, default=0.4, help="circle spacing; 0 disables circles")
    s.add_argument("--out", help="write the plot JSON here instead of stdout")
    s.add_argument("--csv", help="also write one CSV row per sample")
    s.set_defaults(func=cmd_geodesics)

    s = sub.add_parser("ball", help="volume of a Euclidean ball")
    s.add_argument("--dim", type=int, required=True)
    s.add_argument("--radius", type=float, default=1.0)
    s.set_defaults(func=cmd_ball)

    s = sub.add_parser("unit-radius", help="radius of the unit-volume ball")
    s.add_argument("--dim", type=int, required=True)
    s.set_defaults(func=cmd_unit_radius)

    s = sub.add_parser("slab", help="volume of the unit-volume ball inside a slab")
    s.add_argument("--dim", type=int, required=True)
    s.add_argument("--half-width", type=float, default=0.4)
    s.set_defaults(func=cmd_slab)

    s = sub.add_parser("expansion", help="small-ball volume coefficients c2, c4")
    g = s.add_mutually_exclusive_group(required=True)
    g.add_argument("--algebra")
    g.add_argument("--scalars", help="s,ric2,r2,lap (exact literals or floats)")
    s.add_argument("--dim", type=int, help="dimension for --scalars")
    s.set_defaults(func=cmd_expansion)

    s = sub.add_parser("tube", help="tube volume around a degree-k hypersurface of CP^n")
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--k", type=int, required=True)
    s.add_argument("--r", type=float, required=True)
    s.set_defaults(func=cmd_tube)
    return p


def _inputs(args) -> dict:
    return {k: v for k, v in sorted(vars(args).items()) if k not in ("func", "command")}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    report = {"subcommand": args.command, "version": __version__, "inputs": _inputs(args), "warnings": []}
    try:
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            out = args.func(args)
        if isinstance(out, tuple):
            out, extra = out
            report["warnings"].extend(extra)
        report["warnings"].extend(str(w.message) for w in caught)
        report["results"] = out
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"holotorsion: error: {exc}", file=sys.stderr)
        return 2
    except FileNotFoundError as exc:
        report["error"] = {"type": "FileNotFoundError", "message": f"file not found: {exc.filename}"}
        print(dumps(report))
        return 1
    except (HolotorsionError, ValueError, OSError) as exc:
        report["error"] = {"type": type(exc).__name__, "message": str(exc)}
        print(dumps(report))
        return 1
    print(dumps(report))
    return 0


if __name__ == "__main__":
    sys.exit(main())
