from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

import numpy as np
from pydantic import BaseModel

from .analyze import (
    RepImages,
    check_equivalence,
    classify,
    decompose,
    exact_weights,
    numeric_signature,
    random_regular,
    rep_images,
    signature,
)
from .catalog import (
    ClosedFormRep,
    FormSpec,
    build_borel_pair,
    build_sigma,
    extended_datum,
    parse_params,
    phi_minus_closed_form,
    sharp_catalog,
)
from .db import connect, init_db
from .errors import BadCharacteristic, BadParams, ConfigError
from .extend import extend_form
from .field import FieldCtx, get_field
from .interfaces import build_report, run_suite
from .linalg import polymat_format
from .models import CatalogEntryModel, ClassifyModel, JobConfig
from .utils import ensure_parent, jdump, status_line
from .verify import (
    check_borel_pair,
    check_opposite_relation,
    check_sl2_homomorphism,
    default_field,
    field_for,
    rep_degree,
)


def _status(event: str, **fields: object) -> None:
    print(status_line(event, **fields), file=sys.stderr)


def _emit(cfg: JobConfig, report: BaseModel | dict) -> None:
    payload = report.model_dump(mode="json", by_alias=True, exclude_none=True) if isinstance(report, BaseModel) else report
    text = jdump(payload)
    if cfg.out:
        ensure_parent(cfg.out)
        Path(cfg.out).write_text(text + "\n", encoding="utf-8")
    else:
        print(text)


def _p_set(text: str) -> list[int]:
    try:
        return [int(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise ConfigError(f"--p-set must be a comma-separated list of primes, got {text!r}") from None


def _config(args: argparse.Namespace) -> JobConfig:
    return JobConfig(
        command=args.command,
        action=getattr(args, "action", "run"),
        form=getattr(args, "form", None),
        form2=getattr(args, "form2", None),
        p=getattr(args, "p", 2),
        m=getattr(args, "m", None),
        params=parse_params(getattr(args, "params", None)),
        params2=parse_params(getattr(args, "params2", None)),
        mode=getattr(args, "mode", "auto"),
        relation=getattr(args, "relation", "borel"),
        seed=args.seed,
        budget=args.budget,
        jobs=args.jobs,
        out=args.out,
        db=getattr(args, "db", None),
        run_id=getattr(args, "run_id", None),
        e_max=getattr(args, "e_max", 1),
        p_set=_p_set(getattr(args, "p_set", "2,3,5")),
        conj=getattr(args, "conj", False),
        degree_bound=getattr(args, "degree_bound", None),
        md=getattr(args, "md", "artifacts/suite.md"),
    )


def _spec(cfg: JobConfig) -> FormSpec:
    assert cfg.form is not None
    return FormSpec.make(cfg.form, cfg.p, cfg.params)


def _explicit_field(cfg: JobConfig) -> FieldCtx | None:
    return None if cfg.m is None else get_field(cfg.p, cfg.m)


def _field(cfg: JobConfig, *reps: ClosedFormRep) -> FieldCtx:
    """F_{p^m} из --m, иначе наименьшее поле, на котором формы различимы."""

    if cfg.m is not None:
        return get_field(cfg.p, cfg.m)
    if len(reps) == 1:
        return default_field(reps[0])
    return field_for(cfg.p, degree=max(rep_degree(r) for r in reps), twist=max(max(r.twists) for r in reps))


# --- commands ----------------------------------------------------------------------------
def _cmd_catalog(cfg: JobConfig) -> int:
    spec = _spec(cfg)
    if spec.kind == "borel":
        datum = build_borel_pair(spec)
        phi_minus, note = None, ""
        try:
            phi_minus = polymat_format(phi_minus_closed_form(spec))
        except (BadParams, BadCharacteristic) as exc:
            note = str(exc)
        entry = CatalogEntryModel(
            form=spec.form,
            p=spec.p,
            params=spec.param_map,
            dim=len(datum.weights),
            weights=list(datum.weights),
            phi_plus=polymat_format(datum.phi_plus),
            phi_minus=phi_minus,
            note=note,
        )
    else:
        rep = build_sigma(spec)
        entry = CatalogEntryModel(
            form=spec.form,
            p=spec.p,
            params=spec.param_map,
            dim=rep.n,
            weights=list(exact_weights(rep)),
            twists=list(rep.twists),
            sigma=polymat_format(rep.entries),
        )
    _emit(cfg, entry)
    _status("catalog_ok", form=spec.form, p=spec.p, dim=entry.dim)
    return 0


def _cmd_verify_borel(cfg: JobConfig) -> int:
    spec = _spec(cfg)
    if cfg.relation == "opposite":
        report = check_opposite_relation(
            extended_datum(spec), ctx=_explicit_field(cfg), budget=cfg.budget, seed=cfg.seed
        )
    else:
        report = check_borel_pair(build_borel_pair(spec), mode=cfg.mode, ctx=_explicit_field(cfg))
    _emit(cfg, report)
    _status("verify_ok", form=spec.form, relation=cfg.relation, backend=report.backend, passed=report.passed)
    return 0 if report.passed else 1


def _cmd_verify_sl2(cfg: JobConfig) -> int:
    spec = _spec(cfg)
    report = check_sl2_homomorphism(
        build_sigma(spec), mode=cfg.mode, ctx=_explicit_field(cfg), budget=cfg.budget, seed=cfg.seed
    )
    _emit(cfg, report)
    _status("verify_ok", form=spec.form, backend=report.backend, passed=report.passed)
    return 0 if report.passed else 1


def _cmd_extend(cfg: JobConfig) -> int:
    spec = _spec(cfg)
    solution = extend_form(spec, degree_bound=cfg.degree_bound, seed=cfg.seed)
    _emit(cfg, solution.to_report(spec))
    _status("extend_ok", form=spec.form, status=solution.status, degree_bound=solution.degree_bound)
    return 0 if solution.unique else 1


def _cmd_invariants(cfg: JobConfig) -> int:
    spec = _spec(cfg)
    ctx = _field(cfg, build_sigma(spec))
    sig = signature(spec, ctx)
    _emit(cfg, sig.to_model(ctx.q, spec.form))
    _status("invariants_ok", form=spec.form, q=ctx.q, d=f"{sig.d_sigma[0]},{sig.d_sigma[1]}", end_dim=sig.end_dim)
    return 0


def _images(cfg: JobConfig, spec: FormSpec, ctx: FieldCtx) -> RepImages:
    images = rep_images(build_sigma(spec), ctx)
    if cfg.conj:
        P = random_regular(ctx, images.n, np.random.default_rng(cfg.seed))
        images = images.conjugate(P)
    return images


def _cmd_classify(cfg: JobConfig) -> int:
    spec = _spec(cfg)
    ctx = _field(cfg, build_sigma(spec))
    images = _images(cfg, spec, ctx)
    found = classify(images, e_max=cfg.e_max, budget=cfg.budget, seed=cfg.seed)
    model = ClassifyModel(
        q=ctx.q,
        form=found.form,
        params=found.param_map,
        signature=numeric_signature(images).to_model(ctx.q, found.form),
        candidates=len(sharp_catalog(cfg.p, min(cfg.e_max, ctx.m - 1))),
    )
    _emit(cfg, model)
    _status("classify_ok", form=spec.form, q=ctx.q, found=str(found), conj=cfg.conj)
    return 0


def _cmd_decompose(cfg: JobConfig) -> int:
    spec = _spec(cfg)
    ctx = _field(cfg, build_sigma(spec))
    images = _images(cfg, spec, ctx)
    report = decompose(images, budget=cfg.budget, seed=cfg.seed, form=spec, e_max=cfg.e_max)
    _emit(cfg, report.to_model(ctx.q, spec.form))
    _status("decompose_ok", form=spec.form, q=ctx.q, summands=len(report.summands), indecomposable=report.indecomposable)
    return 0


def _cmd_equiv(cfg: JobConfig) -> int:
    spec1 = _spec(cfg)
    assert cfg.form2 is not None
    spec2 = FormSpec.make(cfg.form2, cfg.p, cfg.params2)
    ctx = _field(cfg, build_sigma(spec1), build_sigma(spec2))
    images1 = rep_images(build_sigma(spec1), ctx)
    images2 = _images(cfg, spec2, ctx)
    result = check_equivalence(images1, images2, budget=cfg.budget, seed=cfg.seed)
    _emit(cfg, result.to_model(ctx.q))
    _status("equiv_ok", form=spec1.form, form2=spec2.form, q=ctx.q, equivalent=result.equivalent, exact=result.exact)
    return 0 if result.equivalent else 1


def _cmd_suite(cfg: JobConfig) -> int:
    if cfg.action == "report":
        assert cfg.db is not None
        conn = connect(cfg.db)
        try:
            init_db(conn)
            out = build_report(conn, run_id=cfg.run_id, md_path=cfg.md)
        finally:
            conn.close()
        _emit(cfg, {"schema": 1, **out})
        _status("report_ok", run_id=out["run_id"], passed=out["passed"], md=out["md_path"])
        return 0 if out["passed"] else 1

    conn = None
    if cfg.db:
        conn = connect(cfg.db)
        init_db(conn)
    try:
        report = run_suite(
            conn,
            p_set=tuple(cfg.p_set),
            e_max=cfg.e_max,
            seed=cfg.seed,
            budget=cfg.budget,
            jobs=cfg.jobs,
            run_id_override=cfg.run_id,
        )
    finally:
        if conn is not None:
            conn.close()
    _emit(cfg, report)
    failed = [v.criterion for v in report.criteria if not v.passed]
    _status("suite_ok", run_id=report.run_id, passed=report.passed, failed=",".join(map(str, failed)) or "-")
    return 0 if report.passed else 1


HANDLERS = {
    "catalog": _cmd_catalog,
    "verify-borel": _cmd_verify_borel,
    "verify-sl2": _cmd_verify_sl2,
    "extend": _cmd_extend,
    "invariants": _cmd_invariants,
    "classify": _cmd_classify,
    "decompose": _cmd_decompose,
    "equiv": _cmd_equiv,
    "suite": _cmd_suite,
}


# --- parser --------------------------------------------------------------------------------
def _common(cmd: argparse.ArgumentParser) -> None:
    cmd.add_argument("--seed", type=int, default=0)
    cmd.add_argument("--budget", type=int, default=10**6)
    cmd.add_argument("--jobs", type=int, default=1)
    cmd.add_argument("--out", help="write the JSON report here instead of stdout")


def _form_flags(cmd: argparse.ArgumentParser, *, mode: bool = False) -> None:
    cmd.add_argument("--form", required=True, help="kind:label, e.g. borel:IX or sharp:XXVI")
    cmd.add_argument("--p", type=int, required=True)
    cmd.add_argument("--m", type=int, help="work over F_{p^m}; default is the smallest sufficient field")
    cmd.add_argument("--params", default="", help="k=v,... e.g. e1=0,d2=0")
    if mode:
        cmd.add_argument("--mode", choices=["symbolic", "exhaustive", "auto"], default="auto")
    _common(cmd)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sl2forms", description="Catalog, verify and classify SL(2) forms in positive characteristic")
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging on stderr")
    sub = parser.add_subparsers(dest="command")

    catalog = sub.add_parser("catalog", help="print a catalog entry")
    _form_flags(catalog)

    verify_borel = sub.add_parser("verify-borel", help="check the Borel pair relations")
    _form_flags(verify_borel, mode=True)
    verify_borel.add_argument("--relation", choices=["borel", "opposite"], default="borel")

    verify_sl2 = sub.add_parser("verify-sl2", help="check that sigma is a homomorphism of SL(2)")
    _form_flags(verify_sl2, mode=True)

    extend = sub.add_parser("extend", help="solve for phi- and assemble sigma")
    _form_flags(extend, mode=True)
    extend.add_argument("--degree-bound", type=int)

    invariants = sub.add_parser("invariants", help="weights, fixed-space and endomorphism invariants")
    _form_flags(invariants)

    classify_cmd = sub.add_parser("classify", help="identify the SHARP class of a representation")
    _form_flags(classify_cmd)
    classify_cmd.add_argument("--conj", action="store_true", help="conjugate by a seeded random P first")
    classify_cmd.add_argument("--e-max", type=int, default=1)

    decompose_cmd = sub.add_parser("decompose", help="split into indecomposable summands")
    _form_flags(decompose_cmd)
    decompose_cmd.add_argument("--conj", action="store_true", help="conjugate by a seeded random P first")
    decompose_cmd.add_argument("--e-max", type=int, default=1)

    equiv = sub.add_parser("equiv", help="search for a conjugating matrix between two forms")
    _form_flags(equiv)
    equiv.add_argument("--form2", required=True)
    equiv.add_argument("--params2", default="")
    equiv.add_argument("--conj", action="store_true", help="conjugate the second form by a seeded random P")

    suite = sub.add_parser("suite", help="run the acceptance battery or report a stored run")
    suite.add_argument("action", nargs="?", choices=["run", "report"], default="run")
    suite.add_argument("--db")
    suite.add_argument("--run-id")
    suite.add_argument("--p-set", default="2,3,5")
    suite.add_argument("--e-max", type=int, default=1)
    suite.add_argument("--md", default="artifacts/suite.md")
    _common(suite)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if not args.command:
        parser.print_help()
        return 2

    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    try:
        cfg = _config(args)
        return int(HANDLERS[cfg.command](cfg))
    except Exception as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
