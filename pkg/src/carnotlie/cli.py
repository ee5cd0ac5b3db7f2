"""Command-line front end.

Runs the pipeline validate -> strata -> derivations -> prolongation ->
killing -> filtration -> john on one algebra file or on the bundled corpus
and writes a JSON or text report.

Exit codes: 0 success, 1 a mathematical check failed, 2 input error.
"""
from __future__ import annotations

import argparse
import json
import sys
import time
from fractions import Fraction
from importlib import resources
from typing import Any, Sequence

from .algebra import (
    ParseError,
    StratificationError,
    StratifiedAlgebra,
    StructureError,
    infer_stratification,
    parse_algebra,
    validate,
)
from .derivations import GramError, isometric_part, strata_derivations
from .john import (
    DEFAULT_EPS,
    ConvergenceError,
    DegeneratePointSetError,
    NormError,
    NormSpec,
    equivariance_residual,
    facet_symmetries,
    gram_from_norm,
    inner_john,
    parse_norm,
)
from .killing import NotClosedError, contact_check, identification_defects, killing_basis, killing_filtration
from .linalg import Subspace
from .prolongation import check_graded, prolong

STAGES = ("validate", "strata", "derivations", "prolongation", "killing", "filtration", "john")

CORPUS = (
    "abelian1",
    "abelian2",
    "abelian3",
    "abelian4",
    "heisenberg",
    "heisenberg2",
    "engel",
    "free_2_2",
    "free_2_3",
    "free_3_2",
)

EXIT_OK = 0
EXIT_CHECK = 1
EXIT_INPUT = 2

SCHEMA_VERSION = 1


class InputError(Exception):
    pass


def _q(x: Fraction) -> str:
    return str(Fraction(x))


def _matrix(m) -> list[list[str]]:
    return [[_q(x) for x in row] for row in m]


def bundled_text(name: str) -> str:
    return resources.files("carnotlie").joinpath("data", name).read_text()


def load_corpus() -> list[tuple[str, StratifiedAlgebra]]:
    return [(name, parse_algebra(bundled_text(f"{name}.alg"))) for name in CORPUS]


def parse_stages(text: str | None) -> tuple[str, ...]:
    if not text:
        return STAGES
    chosen = [s.strip() for s in text.split(",") if s.strip()]
    unknown = [s for s in chosen if s not in STAGES]
    if unknown:
        raise InputError(f"unknown stage(s): {', '.join(unknown)}; choose from {', '.join(STAGES)}")
    return tuple(s for s in STAGES if s in chosen)


def _dims(d: dict[int, int]) -> dict[str, int]:
    return {str(k): v for k, v in sorted(d.items())}


def run_report(
    alg: StratifiedAlgebra,
    norm: NormSpec | None = None,
    *,
    max_degree: int | None = None,
    eps: float = DEFAULT_EPS,
    stages: Sequence[str] = STAGES,
    timings: bool = False,
) -> dict[str, Any]:
    """Run the pipeline on one algebra and return the report as a dict.

    Stages not listed in ``stages`` are still computed when a later listed
    stage depends on them, but are left out of the report.
    """
    failures: list[str] = []
    report: dict[str, Any] = {
        "schema": SCHEMA_VERSION,
        "algebra": {
            "name": alg.name,
            "dim": alg.dim,
            "step": alg.step,
            "basis": list(alg.basis_names),
            "strata_dims": list(alg.strata_dims),
        },
    }
    clock: dict[str, float] = {}
    d1 = alg.strata_dims[0]
    if norm is None:
        norm = NormSpec.identity(d1)
    elif norm.dim != d1:
        raise InputError(f"norm acts on R^{norm.dim} but the first stratum has dimension {d1}")
    report["norm"] = norm.to_json()

    def timed(name, fn):
        t = time.perf_counter()
        out = fn()
        clock[name] = time.perf_counter() - t
        return out

    defects = timed("validate", lambda: validate(alg))
    if "validate" in stages:
        report["validation"] = {"ok": not defects, "defects": defects}
    if defects:
        failures.extend(f"validate: {d}" for d in defects)
        report["skipped"] = [s for s in stages if s != "validate"]
        return _finish(report, failures, clock, timings)

    if "strata" in stages:
        def strata():
            v1 = Subspace.coordinate(alg.strata[0], alg.dim)
            try:
                inferred = infer_stratification(alg, v1)
            except StratificationError as exc:
                return {"ok": False, "error": str(exc)}
            dims = [s.dim for s in inferred]
            return {"ok": dims == list(alg.strata_dims), "inferred_dims": dims}

        report["strata"] = timed("strata", strata)
        if not report["strata"]["ok"]:
            failures.append("strata: inferred stratification differs from the declared one")

    needs = set(stages)
    gram = None
    g0 = None
    tower = None
    K = None
    if needs & {"derivations", "prolongation", "killing", "filtration", "john"}:
        try:
            gram = timed("john", lambda: gram_from_norm(norm, eps))
        except (NormError, ConvergenceError, DegeneratePointSetError) as exc:
            failures.append(f"john: {exc}")
            report["john"] = {"ok": False, "error": str(exc)}
            return _finish(report, failures, clock, timings)
    if "john" in stages:
        report["john"] = timed("john", lambda: _john_section(norm, gram, eps))
        if not report["john"]["ok"]:
            failures.append("john: inscription or equivariance check failed")

    if needs & {"derivations", "prolongation", "killing", "filtration"}:
        der0 = timed("derivations", lambda: strata_derivations(alg, check=False))
        try:
            g0 = timed("derivations", lambda: isometric_part(alg, gram, check=False))
        except GramError as exc:
            raise InputError(str(exc)) from None
        if "derivations" in stages:
            report["derivations"] = {
                "dim_der0": len(der0),
                "dim_g0": len(g0),
                "gram": _matrix(gram),
                "g0_basis": [_matrix(u.matrix) for u in g0],
            }
        report["isometry_algebra_dim"] = alg.dim + len(g0)

    if needs & {"prolongation", "filtration"}:
        tower = timed("prolongation", lambda: prolong(alg, g0, max_degree))
        graded = timed("prolongation", lambda: check_graded(tower))
        finite = tower.terminated_at is not None
        g1 = tower.space_dim(1) if 1 in tower.positive or finite else None
        if "prolongation" in stages:
            report["prolongation"] = {
                "degree_dims": _dims(tower.dims()),
                "status": tower.status,
                "terminated_at": tower.terminated_at,
                "max_degree": tower.max_degree,
                "dimension": tower.dimension if finite else None,
                "g1_zero": g1 == 0,
                "defects": graded,
            }
        if not finite:
            failures.append(f"prolongation: {tower.status}")
        if graded:
            failures.extend(f"prolongation: {d}" for d in graded)

    if needs & {"killing", "filtration"}:
        try:
            K = timed("killing", lambda: killing_basis(alg, g0))
        except (NotClosedError, ArithmeticError) as exc:
            failures.append(f"killing: {exc}")
            return _finish(report, failures, clock, timings)
        contact = timed("killing", lambda: [contact_check(f, alg) for f in K.basis])
        bad = [f"field {i}: {d}" for i, c in enumerate(contact) for d in c.details if not c.ok]
        if "killing" in stages:
            names = list(alg.basis_names)
            report["killing"] = {
                "dim": K.dim,
                "fields": [[p.to_str(names) for p in f.components] for f in K.basis],
                "bracket_table": [
                    {"pair": [a, b], "coords": {str(k): _q(c) for k, c in sorted(row.items())}}
                    for (a, b), row in sorted(K.bracket_table.items())
                    if a < b
                ],
                "contact_ok": not bad,
                "contact_defects": bad,
            }
        if bad:
            failures.extend(f"killing: {d}" for d in bad)

    if "filtration" in stages:
        def filtration():
            chain = killing_filtration(K)
            ident = identification_defects(K, tower)
            return {
                "dims": {str(j): sub.dim for j, sub in zip(range(-1, len(chain) - 1), chain)},
                "k1_zero": len(chain) > 2 and chain[2].dim == 0,
                "identification_defects": ident,
            }

        report["filtration"] = timed("filtration", filtration)
        failures.extend(f"filtration: {d}" for d in report["filtration"]["identification_defects"])

    return _finish(report, failures, clock, timings)


def _john_section(norm: NormSpec, gram, eps: float) -> dict[str, Any]:
    if norm.kind == "gram":
        return {"ok": True, "kind": "gram", "gram": _matrix(gram)}
    e = inner_john(norm, eps)
    q = e.Q
    inscription = max(
        sum(float(a[i]) * q[i, j] * float(a[j]) for i in range(len(a)) for j in range(len(a)))
        for a in norm.facets
    )
    residuals = [equivariance_residual(norm, q, t) for t in facet_symmetries(norm)]
    worst = max(residuals, default=0.0)
    return {
        "ok": inscription <= 1 + eps and worst <= 1e-8,
        "kind": "polytope",
        "Q": [[float(x) for x in row] for row in q],
        "iterations": e.iterations,
        "gram": _matrix(gram),
        "max_facet_value": inscription,
        "symmetries": len(residuals),
        "max_equivariance_residual": worst,
    }


def _finish(report, failures, clock, timings):
    report["failures"] = failures
    report["ok"] = not failures
    if timings:
        report["timings"] = {k: round(v, 6) for k, v in sorted(clock.items())}
    return report


def format_text(report: dict[str, Any]) -> str:
    a = report["algebra"]
    lines = [f"== {a['name'] or '(unnamed)'}: dim {a['dim']}, step {a['step']}, strata {a['strata_dims']}"]
    if "validation" in report:
        v = report["validation"]
        lines.append("validate: ok" if v["ok"] else "validate: FAILED")
        lines.extend(f"  {d}" for d in v["defects"])
    if "strata" in report:
        s = report["strata"]
        lines.append(f"strata: {'ok' if s['ok'] else 'FAILED'} {s.get('inferred_dims', s.get('error'))}")
    if "john" in report:
        j = report["john"]
        if j.get("kind") == "polytope":
            lines.append(
                f"john: {j['iterations']} iterations, gram {j['gram']}, "
                f"max residual {j['max_equivariance_residual']:.2e} over {j['symmetries']} symmetries"
            )
        else:
            lines.append(f"john: {j.get('kind', j.get('error'))}")
    if "derivations" in report:
        d = report["derivations"]
        lines.append(f"derivations: dim Der_0 = {d['dim_der0']}, dim g_0 = {d['dim_g0']}")
    if "isometry_algebra_dim" in report:
        lines.append(f"isometry algebra: dim {report['isometry_algebra_dim']}")
    if "prolongation" in report:
        p = report["prolongation"]
        dims = ", ".join(f"g_{k}: {v}" for k, v in p["degree_dims"].items())
        lines.append(f"prolongation: {dims} ({p['status']})")
    if "killing" in report:
        k = report["killing"]
        lines.append(f"killing: dim {k['dim']}, contact {'ok' if k['contact_ok'] else 'FAILED'}")
        for i, f in enumerate(k["fields"]):
            lines.append(f"  Z{i} = " + ", ".join(f))
    if "filtration" in report:
        f = report["filtration"]
        dims = ", ".join(f"K_{j}: {v}" for j, v in f["dims"].items())
        lines.append(f"filtration: {dims}")
        lines.extend(f"  {d}" for d in f["identification_defects"])
    if "skipped" in report:
        lines.append(f"skipped: {', '.join(report['skipped'])}")
    if "timings" in report:
        lines.append("timings: " + ", ".join(f"{k} {v:.4f}s" for k, v in report["timings"].items()))
    lines.append("result: ok" if report["ok"] else f"result: FAILED ({len(report['failures'])} failure(s))")
    return "\n".join(lines)


def _read(path: str) -> str:
    try:
        with open(path, encoding="utf-8") as fh:
            return fh.read()
    except OSError as exc:
        raise InputError(f"{path}: {exc.strerror}") from None


def _located(path: str, exc: ParseError) -> InputError:
    return InputError(f"{path}:{exc.line}:{exc.column}: {exc.message}")


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="carnotlie",
        description="Exact Tanaka prolongation and Killing-field reports for Carnot algebras.",
    )
    p.add_argument("algebra", nargs="?", help="algebra file (text or JSON format)")
    p.add_argument("--norm", help="norm file on the first stratum (default: identity Gram matrix)")
    p.add_argument("--max-degree", type=int, default=None, help="prolongation degree cap (default: step + 2)")
    p.add_argument("--eps", type=float, default=DEFAULT_EPS, help="John ellipsoid tolerance")
    p.add_argument("--format", choices=("json", "text"), default="json")
    p.add_argument("--check", metavar="STAGES", help=f"comma-separated subset of: {','.join(STAGES)}")
    p.add_argument("--corpus", action="store_true", help="run every bundled algebra")
    p.add_argument("--timings", action="store_true", help="include per-stage wall-clock timings")
    p.add_argument("-o", "--output", help="write the report here instead of standard output")
    return p


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.corpus == bool(args.algebra):
            raise InputError("give either an algebra file or --corpus")
        if args.max_degree is not None and args.max_degree < 1:
            raise InputError("--max-degree must be at least 1")
        if args.eps <= 0:
            raise InputError("--eps must be positive")
        stages = parse_stages(args.check)
        norm = None
        if args.norm:
            try:
                norm = parse_norm(_read(args.norm))
            except ParseError as exc:
                raise _located(args.norm, exc) from None
        if args.corpus:
            if norm is not None:
                raise InputError("--norm cannot be combined with --corpus")
            algebras = [alg for _, alg in load_corpus()]
        else:
            try:
                algebras = [parse_algebra(_read(args.algebra))]
            except ParseError as exc:
                raise _located(args.algebra, exc) from None
            except StructureError as exc:
                raise InputError(f"{args.algebra}: {exc}") from None
        opts = dict(max_degree=args.max_degree, eps=args.eps, stages=stages, timings=args.timings)
        reports = [run_report(alg, norm, **opts) for alg in algebras]
    except InputError as exc:
        print(f"carnotlie: error: {exc}", file=sys.stderr)
        return EXIT_INPUT

    if args.format == "json":
        payload: Any = {"schema": SCHEMA_VERSION, "reports": reports} if args.corpus else reports[0]
        text = json.dumps(payload, indent=2, sort_keys=True)
    else:
        text = "\n\n".join(format_text(r) for r in reports)
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    else:
        print(text)
    failed = [r for r in reports if not r["ok"]]
    for r in failed:
        for f in r["failures"]:
            print(f"carnotlie: {r['algebra']['name'] or 'algebra'}: {f}", file=sys.stderr)
    return EXIT_CHECK if failed else EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
