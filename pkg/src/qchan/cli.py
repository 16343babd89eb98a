"""Command-line harness: ``qchan <command> [options]``.

Exit codes: 0 when every reported residual is within tolerance, 1 when a
check fails, 2 on bad input.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys

import numpy as np

from . import experiments
from .channels import KrausSet, completeness_defect, process_distance
from .correctability import build_alpha, check_correctability, convert
from .errors import MalformedInput, QchanError
from .io import (
    dumps,
    kraus_from_json,
    kraus_to_json,
    load_json,
    matrix_from_json,
    matrix_to_json,
    rows_to_csv,
)
from .recovery import (
    CodeSpec,
    PAULI_Z,
    bar_set,
    bitflip_code,
    check_universal_conditions,
    diagonality_residual,
    embed,
    syndrome_identity_residual,
    plan_from_correctable,
    random_bitflip_channel,
    recover_end_to_end,
)
from .ru import det_T_closed_form, hs_basis, ru_kraus_set, transformation_T
from .states import bloch_distance_sq, projector, random_density, rng_for

log = logging.getLogger("qchan")


def default_tol() -> float:
    return float(os.environ.get("QCHAN_TOL", "1e-10"))


def _emit(args, payload: dict, rows: list[dict] | None = None) -> None:
    if getattr(args, "format", "json") == "csv" and rows is not None:
        text = rows_to_csv(rows)
    else:
        text = dumps(payload)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _experiment(args, record) -> int:
    log.info("%s: %d samples in %.1f ms", record.experiment, record.samples, record.runtime_ms)
    payload = record.to_dict(timing=args.timing)
    ok = record.max_bloch_dist_sq < args.tol
    payload["passed"] = ok
    _emit(args, payload, record.per_sample)
    return 0 if ok else 1


def cmd_fig1(args) -> int:
    return _experiment(args, experiments.fig1(args.n, args.samples, args.seed))


def cmd_fig2(args) -> int:
    return _experiment(args, experiments.fig2(args.samples, args.seed))


def cmd_fig3(args) -> int:
    return _experiment(args, experiments.fig3(args.n, args.samples, args.seed))


def cmd_build_ru(args) -> int:
    k = ru_kraus_set(args.n)
    defect = completeness_defect(k)
    payload = {
        "n": args.n,
        "count": len(k),
        "expected_count": args.n * 2 ** (args.n - 1),
        "completeness_residual": defect,
        "passed": defect < max(args.tol, 1e-12) and len(k) == args.n * 2 ** (args.n - 1),
    }
    if args.include_operators:
        payload["kraus"] = kraus_to_json(k)
    _emit(args, payload)
    return 0 if payload["passed"] else 1


def cmd_check_hs(args) -> int:
    b = hs_basis(args.n)
    t = transformation_T(args.n)
    det = float(np.linalg.det(t).real)
    closed = det_T_closed_form(args.n)
    payload = {
        "n": args.n,
        "gram_rank": b.gram_rank,
        "required_rank": args.n**2,
        "family_relation_residual": b.relation_residual,
        "det_T": det,
        "det_T_closed_form": closed,
        "det_T_relative_error": abs(det - closed) / abs(closed),
        "labels": [str(lab) for lab in b.labels],
    }
    payload["passed"] = (
        b.gram_rank == args.n**2
        and b.relation_residual <= 1e-12
        and payload["det_T_relative_error"] <= 1e-10
    )
    _emit(args, payload)
    return 0 if payload["passed"] else 1


def cmd_check_correctability(args) -> int:
    kraus = kraus_from_json(load_json(args.kraus), args.kraus, trace_preserving=False)
    p = matrix_from_json(load_json(args.projector), args.projector)
    rep = check_correctability(kraus, p, args.tol)
    payload = {
        "verdict": rep.verdict,
        "max_residual": rep.max_residual,
        "hermiticity_defect": rep.hermiticity_defect,
        "tolerance": rep.tol,
        "alpha": matrix_to_json(rep.alpha),
    }
    _emit(args, payload)
    return 0 if rep.satisfied else 1


def cmd_convert(args) -> int:
    kraus = kraus_from_json(load_json(args.kraus), args.kraus)
    if args.basis:
        basis = kraus_from_json(load_json(args.basis), args.basis, trace_preserving=False)
    else:
        basis = hs_basis(kraus.dim_in).as_kraus()
    res = convert(kraus, basis)
    lmin = float(np.linalg.eigvalsh(res.H)[0])
    payload = {
        "H": matrix_to_json(res.H),
        "eigenvalues": [float(x) for x in res.eigenvalues],
        "kept": [int(i) for i in res.kept],
        "expansion_residual": res.expansion_residual,
        "H_min_eigenvalue": lmin,
        "F_tilde_completeness": completeness_defect(res.F_tilde),
        "process_distance": process_distance(kraus, res.F_tilde),
        "F_tilde": kraus_to_json(res.F_tilde),
    }
    tol = max(args.tol, 1e-9)
    payload["passed"] = (
        payload["F_tilde_completeness"] <= tol
        and payload["process_distance"] <= tol
        and lmin >= -tol * max(1.0, float(np.linalg.norm(res.H)))
    )
    _emit(args, payload)
    return 0 if payload["passed"] else 1


def cmd_recover_demo(args) -> int:
    code = bitflip_code()
    worst = 0.0
    for i in range(args.samples):
        noise = random_bitflip_channel(rng_for(args.seed, 2 * i))
        rho = random_density(2, rng_for(args.seed, 2 * i + 1))
        out = recover_end_to_end(rho, code, noise)
        worst = max(worst, bloch_distance_sq(out, rho))
    plan = plan_from_correctable(code.correctable, code)
    bar = bar_set(code.correctable, build_alpha(code.correctable, code.P))
    z1 = KrausSet([embed(PAULI_Z, 1, 3)], label="Z1")
    basis_states = {
        "0": np.diag([1.0, 0.0]),
        "1": np.diag([0.0, 1.0]),
        "+": projector(np.array([1, 1]) / np.sqrt(2)),
        "+i": projector(np.array([1, 1j]) / np.sqrt(2)),
    }
    negative = {
        name: bloch_distance_sq(recover_end_to_end(rho, code, z1, plan), rho)
        for name, rho in basis_states.items()
    }
    tol = max(args.tol, 1e-9)
    payload = {
        "code": code.description,
        "samples": args.samples,
        "seed": args.seed,
        "max_bloch_dist_sq": worst,
        "syndromes": plan.r_alpha,
        "completion_projector": plan.has_completion,
        "diagonality_residual": diagonality_residual(bar.kraus, bar.d, code.P),
        "syndrome_identity_residual": syndrome_identity_residual(plan, bar.kraus, code),
        "negative_control_Z1": negative,
        "negative_control_detected": max(negative.values()) > 1e-3,
    }
    payload["passed"] = worst < tol and payload["negative_control_detected"]
    _emit(args, payload)
    return 0 if payload["passed"] else 1


def _load_code(source: str) -> CodeSpec:
    if source == "bitflip":
        return bitflip_code()
    obj = load_json(source)
    try:
        return CodeSpec(
            n_sys=int(obj["n_sys"]),
            n_anc=int(obj["n_anc"]),
            P=matrix_from_json(obj["P"], f"{source}.P"),
            U_C=matrix_from_json(obj["U_C"], f"{source}.U_C"),
            description=str(obj.get("description", "")),
        )
    except KeyError as exc:
        raise MalformedInput(f"{source}: missing field {exc.args[0]!r}") from exc
    except (TypeError, ValueError) as exc:
        if isinstance(exc, MalformedInput):
            raise
        raise MalformedInput(f"{source}: {exc}") from exc


def cmd_check_universal(args) -> int:
    code = _load_code(args.code)
    if args.kraus:
        q = kraus_from_json(load_json(args.kraus), args.kraus, trace_preserving=False)
    elif args.candidate == "ru":
        q = ru_kraus_set(code.dim)
    else:
        q = code.correctable
        if q is None:
            raise MalformedInput("code has no built-in error set; pass --kraus")
    rep = check_universal_conditions(q, code, max(args.tol, 1e-8))
    for note in rep.warnings:
        log.warning(note)
    payload = {"code": code.description, "operators": len(q), **rep.to_dict()}
    _emit(args, payload)
    return 0 if rep.all_passed else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qchan", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, n=True, samples=True):
        if n:
            p.add_argument("--n", type=int, default=4)
        if samples:
            p.add_argument("--samples", type=int, default=1000)
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--tol", type=float, default=default_tol())
        p.add_argument("--out")
        p.add_argument("--format", choices=["json", "csv"], default="json")
        return p

    figures = (("fig1", cmd_fig1, True, []), ("fig2", cmd_fig2, False, []), ("fig3", cmd_fig3, True, ["state-ru"]))
    for name, fn, has_n, aliases in figures:
        p = common(sub.add_parser(name, aliases=aliases, help=fn.__doc__), n=has_n)
        p.add_argument("--timing", action="store_true", help="include runtime_ms (breaks byte-identity)")
        p.set_defaults(func=fn)

    p = common(sub.add_parser("build-ru", help="explicit RU Kraus set"), samples=False)
    p.add_argument("--include-operators", action="store_true")
    p.set_defaults(func=cmd_build_ru)

    p = common(sub.add_parser("check-hs", help="HS-completeness certificate"), samples=False)
    p.set_defaults(func=cmd_check_hs)

    p = common(sub.add_parser("check-correctability"), n=False, samples=False)
    p.add_argument("--kraus", required=True)
    p.add_argument("--projector", required=True)
    p.set_defaults(func=cmd_check_correctability, tol=1e-8)

    p = common(sub.add_parser("convert"), n=False, samples=False)
    p.add_argument("--kraus", required=True)
    p.add_argument("--basis")
    p.set_defaults(func=cmd_convert)

    p = common(sub.add_parser("recover-demo", help="bit-flip code end to end"), n=False)
    p.set_defaults(func=cmd_recover_demo, samples=100)

    p = common(sub.add_parser("check-universal"), n=False, samples=False)
    p.add_argument("--code", default="bitflip", help="'bitflip' or a code JSON file")
    p.add_argument("--kraus")
    p.add_argument("--candidate", choices=["code", "ru"], default="code")
    p.set_defaults(func=cmd_check_universal)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code else 0
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        return args.func(args)
    except MalformedInput as exc:
        sys.stderr.write(dumps({"error": "MalformedInput", "detail": str(exc)}))
        return 2
    except QchanError as exc:
        sys.stderr.write(dumps({"error": type(exc).__name__, "detail": str(exc)}))
        return 1


if __name__ == "__main__":
    sys.exit(main())
