"""Command-line front end: ``waylab <command> ...``.

Exit codes: 0 when every check passes, 1 when a verdict fails, 2 for invalid
input or a violated hypothesis (the instance is outside a theorem's scope).
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path
from typing import Sequence

import numpy as np

from waylab import io
from waylab.errors import HypothesisViolation, WaylabError
from waylab.explorer import SearchConfig, search_many, sweep_theorem1, sweep_to_csv
from waylab.measurement import check_conservation, theorem1_check
from waylab.operators import DEFAULT_TOL, ToleranceConfig, frobenius, isometry_defect
from waylab.verdict import Check, Verdict
from waylab.way_model import (
    build_additive,
    build_traditional,
    build_way_model,
    proposition1_check,
    theorem2_verify,
    theorem3_verify,
)

EXIT_PASS, EXIT_FAIL, EXIT_INVALID = 0, 1, 2
TOL_ENV = "WAYLAB_TOL_DEFECT"
TOL_KEYS = tuple(f.name for f in ToleranceConfig.__dataclass_fields__.values())


class UsageError(WaylabError):
    pass


# --- helpers --------------------------------------------------------------------


def _tolerances(overrides: Sequence[str], environ) -> ToleranceConfig:
    values = {}
    env = environ.get(TOL_ENV)
    if env:
        values["tol_defect"] = _positive_float(env, TOL_ENV)
    for item in overrides:
        key, sep, raw = item.partition("=")
        key = key.strip()
        if not sep:
            raise UsageError(f"--tol expects key=value, got {item!r}")
        if not key.startswith("tol_"):
            key = f"tol_{key}"
        if key not in TOL_KEYS:
            raise UsageError(f"unknown tolerance {key!r}; choose from {', '.join(TOL_KEYS)}")
        values[key] = _positive_float(raw, f"--tol {key}")
    return DEFAULT_TOL.replace(**values)


def _positive_float(raw: str, name: str) -> float:
    try:
        value = float(raw)
    except ValueError:
        raise UsageError(f"{name}: {raw!r} is not a number") from None
    if not np.isfinite(value) or value <= 0:
        raise UsageError(f"{name} must be positive and finite, got {raw!r}")
    return value


def _fmt(x) -> str:
    if isinstance(x, bool) or x is None:
        return str(x)
    if isinstance(x, (float, np.floating)):
        return f"{x:.6g}"
    if isinstance(x, (list, tuple)):
        return "[" + ", ".join(_fmt(v) for v in x) + "]"
    return str(x)


def format_table(header: Sequence[str], rows: Sequence[Sequence]) -> str:
    """Left-aligned text table; floats shown to 6 significant digits."""
    cells = [[str(h) for h in header]] + [[_fmt(c) for c in row] for row in rows]
    widths = [max(len(r[i]) for r in cells) for i in range(len(header))]
    lines = ["  ".join(c.ljust(w) for c, w in zip(r, widths)).rstrip() for r in cells]
    lines.insert(1, "  ".join("-" * w for w in widths))
    return "\n".join(lines) + "\n"


def _flatten(facts: dict, prefix: str = "") -> list[tuple[str, object]]:
    rows = []
    for key, value in facts.items():
        if isinstance(value, dict):
            rows.extend(_flatten(value, f"{prefix}{key}."))
        else:
            rows.append((f"{prefix}{key}", value))
    return rows


def verdict_table(v: Verdict) -> str:
    rows = [(c.name, c.defect, c.threshold, "pass" if c.passed else "FAIL") for c in v.checks]
    text = format_table(("check", "defect", "threshold", "result"), rows)
    if v.facts:
        text += "\n" + format_table(("fact", "value"), _flatten(v.facts))
    text += f"\noverall: {'pass' if v.passed else 'FAIL'}\n"
    return text


def _emit(args, text: str) -> None:
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)


def _emit_verdict(args, v: Verdict, extra: dict | None = None) -> int:
    if args.format == "table":
        _emit(args, verdict_table(v))
    else:
        doc = io.verdict_to_json(v)
        if extra:
            doc.update(extra)
        _emit(args, io.dumps(doc))
    return EXIT_PASS if v.passed else EXIT_FAIL


def _merge(*verdicts: Verdict) -> Verdict:
    checks, facts, witnesses = [], {}, []
    for v in verdicts:
        checks.extend(v.checks)
        facts.update(v.facts)
        witnesses.extend(v.witnesses)
    return Verdict(tuple(checks), facts, tuple(witnesses))


def _load_model(args, tol):
    return io.model_from_json(io.load_file(args.input), str(args.input), tol)


def _model_with_energies(spec, tol):
    model = build_way_model(spec.system, spec.apparatus_dim, tol=tol)
    h_sa = spec.h_sa
    if h_sa is None and spec.hamiltonian is not None:
        h_sa = build_additive(spec.hamiltonian, model, tol)
    if h_sa is None and spec.h_s is None:
        raise UsageError("model needs 'h_sa' or a structured Hamiltonian ('form', 'h1', 'h2', ...)")
    return model.with_hamiltonians(h_sa=h_sa, h_s=spec.h_s, h_a=spec.h_a, tol=tol)


# --- commands -------------------------------------------------------------------


def cmd_check_conservation(args, tol) -> int:
    doc = io.load_file(args.input)
    if isinstance(doc, dict) and "measurement" in doc:
        m = io.measurement_from_json(doc["measurement"], f"{args.input}:measurement")
        h_doc, h_src = doc.get("h"), f"{args.input}:h"
    else:
        m = io.measurement_from_json(doc, str(args.input))
        h_doc, h_src = None, ""
    if args.h:
        h_doc, h_src = io.load_file(args.h), str(args.h)
    if h_doc is None:
        raise UsageError("no observable given: pass --h or include 'h' in the input")
    h = io.matrix_from_json(h_doc, h_src)
    return _emit_verdict(args, check_conservation(m, h, tol))


def cmd_theorem1(args, tol) -> int:
    doc = io.load_file(args.input)
    if not isinstance(doc, dict):
        raise io.SchemaError(f"{args.input}: expected an object with 'measurement' and 'h'")
    m = io.measurement_from_json(doc.get("measurement"), f"{args.input}:measurement")
    h = io.matrix_from_json(doc.get("h"), f"{args.input}:h")
    return _emit_verdict(args, theorem1_check(m, h, tol))


def cmd_model_build(args, tol) -> int:
    spec = _load_model(args, tol)
    model = build_way_model(spec.system, spec.apparatus_dim, tol=tol)
    phi = model.system.basis
    x = model.apparatus.basis
    paired = np.stack([np.kron(phi[:, c], x[:, c]) for c in range(phi.shape[1])], axis=1)
    checks = (
        Check("U isometry", isometry_defect(model.u), tol.tol_isometry, "||U^dag U - I||_F"),
        Check("V isometry", isometry_defect(model.v), tol.tol_isometry, "||V^dag V - I||_F"),
        Check("U phi = phi (x) X", frobenius(model.u @ phi - paired), tol.tol_isometry, "defining relation of U"),
        Check("V X = phi (x) X", frobenius(model.v @ x - paired), tol.tol_isometry, "defining relation of V"),
    )
    verdict = Verdict(checks, facts={"dims": list(model.dims), "multiplicities": list(model.system.multiplicities)})
    extra = {"model": {
        "s": io.matrix_to_json(model.system.matrix()),
        "a": io.matrix_to_json(model.apparatus.matrix()),
        "apparatus_basis": io.matrix_to_json(x),
        "u": io.matrix_to_json(model.u),
        "v": io.matrix_to_json(model.v),
    }}
    return _emit_verdict(args, verdict, extra)


def cmd_prop1(args, tol) -> int:
    model = _model_with_energies(_load_model(args, tol), tol)
    return _emit_verdict(args, proposition1_check(model, tol))


def cmd_theorem2(args, tol) -> int:
    spec = _load_model(args, tol)
    if spec.hamiltonian is None:
        raise UsageError("theorem2 needs 'form' with its operators ('h1', 'h2', 'd1', 'd2')")
    model = build_way_model(spec.system, spec.apparatus_dim, tol=tol)
    return _emit_verdict(args, theorem2_verify(model, spec.hamiltonian, tol))


def cmd_theorem3(args, tol) -> int:
    spec = _load_model(args, tol)
    missing = [k for k in ("xi", "h1", "h2") if getattr(spec, k) is None]
    if missing:
        raise UsageError(f"theorem3 needs fields: {', '.join(missing)}")
    setup, built = build_traditional(spec.system, spec.xi, spec.h1, spec.h2, tol)
    return _emit_verdict(args, _merge(built, theorem3_verify(setup, tol)))


def cmd_explore(args, tol) -> int:
    h = io.matrix_from_json(io.load_file(args.h), str(args.h))
    initial = None
    if args.init:
        initial = io.measurement_from_json(io.load_file(args.init), str(args.init))
    kwargs = {"max_iters": args.max_iters}
    if args.target is not None:
        kwargs["target_conservation_defect"] = args.target
    if args.weight is not None:
        kwargs["commutator_objective_weight"] = args.weight
    configs = [SearchConfig(h.shape[0], args.outcomes, args.seed + k, **kwargs) for k in range(args.trials)]
    reports = search_many(h, configs, workers=args.workers, initial=initial, tol=tol)
    # A run that raised its defect would break the monotone acceptance contract.
    sound = all(r.conservation_defect <= r.initial_conservation_defect for r in reports)
    if args.format == "table":
        rows = [(r.config.seed, r.classification, r.initial_conservation_defect, r.conservation_defect,
                 r.commutation_defect, r.iterations) for r in reports]
        _emit(args, format_table(("seed", "classification", "initial", "conservation", "commutation",
                                  "iterations"), rows))
    else:
        docs = [io.report_to_json(r) for r in reports]
        _emit(args, io.dumps(docs[0] if len(docs) == 1 else docs))
    return EXIT_PASS if sound else EXIT_FAIL


def cmd_sweep(args, tol) -> int:
    try:
        dims = [int(d) for d in args.dims.split(",") if d.strip()]
    except ValueError:
        raise UsageError(f"--dims expects comma-separated integers, got {args.dims!r}") from None
    rows = sweep_theorem1(dims, args.trials, args.seed, engineered=args.engineered, tol=tol)
    if args.format == "csv":
        _emit(args, sweep_to_csv(rows))
    elif args.format == "table":
        names = list(rows[0].__dataclass_fields__) if rows else ["dim"]
        _emit(args, format_table(names, [[getattr(r, k) for k in names] for r in rows]))
    else:
        _emit(args, io.dumps(io.to_plain([r.__dict__ for r in rows])))
    return EXIT_FAIL if any(r.violations for r in rows) else EXIT_PASS


# --- parser ---------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--tol", action="append", default=[], metavar="KEY=VALUE",
                        help=f"tolerance override, repeatable; keys: {', '.join(TOL_KEYS)}")
    common.add_argument("--out", help="write output here instead of stdout")
    common.add_argument("--format", choices=("json", "table"), default="json")

    parser = argparse.ArgumentParser(prog="waylab", description="Conservation and WAY-type measurement checks.")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, func, help_text, needs_input=True, parents=(common,)):
        p = sub.add_parser(name, parents=list(parents), help=help_text)
        if needs_input:
            p.add_argument("--in", dest="input", required=True, help="input JSON document")
        p.set_defaults(func=func)
        return p

    p = add("check-conservation", cmd_check_conservation, "check that a measurement conserves H")
    p.add_argument("--h", help="observable matrix JSON (optional if the input has 'h')")
    add("theorem1", cmd_theorem1, "projective conservation <=> commutation check")
    add("model-build", cmd_model_build, "build U, V and the apparatus observable")
    add("prop1", cmd_prop1, "six-way equivalence check for a WAY model")
    add("theorem2", cmd_theorem2, "WAY conclusions for a structured joint energy")
    add("theorem3", cmd_theorem3, "traditional-setup conclusions including H2 = aI")

    p = add("explore", cmd_explore, "search for conserving, noncommuting Kraus measurements", needs_input=False)
    p.add_argument("--h", required=True, help="observable matrix JSON")
    p.add_argument("--outcomes", type=int, default=2)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--trials", type=int, default=1, help="consecutive seeds starting at --seed")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--max-iters", type=int, default=500)
    p.add_argument("--target", type=float, help="target conservation defect")
    p.add_argument("--weight", type=float, help="commutator objective weight")
    p.add_argument("--init", help="starting measurement JSON")

    sweep_common = argparse.ArgumentParser(add_help=False)
    sweep_common.add_argument("--tol", action="append", default=[], metavar="KEY=VALUE")
    sweep_common.add_argument("--out")
    sweep_common.add_argument("--format", choices=("json", "table", "csv"), default="csv")
    p = add("sweep", cmd_sweep, "random projective sweep of the conservation <=> commutation check",
            needs_input=False, parents=(sweep_common,))
    p.add_argument("--dims", required=True, help="comma-separated dimensions, e.g. 2,3,4")
    p.add_argument("--trials", type=int, required=True)
    p.add_argument("--engineered", type=int, default=0, help="commuting pairs added per dimension")
    p.add_argument("--seed", type=int, required=True)
    return parser


def main(argv: Sequence[str] | None = None, environ=None) -> int:
    environ = os.environ if environ is None else environ
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if isinstance(exc.code, int) else EXIT_INVALID
    try:
        tol = _tolerances(args.tol, environ)
        return args.func(args, tol)
    except HypothesisViolation as exc:
        print(f"waylab: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except (WaylabError, ValueError) as exc:
        print(f"waylab: invalid input: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
