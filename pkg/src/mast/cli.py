"""Command-line front door: build models, run what-if inference, convert formats.

Exit codes: 0 success, 1 domain error (bad model file, unknown factor/state),
2 usage error (bad flags, wrong impact arity/range).
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from typing import Sequence

from . import inference, model_io
from .model import (
    DEFAULT_BASE_COST,
    FACTOR_IDS,
    MastModel,
    build_model,
    infer_training,
)


class UsageError(Exception):
    """Bad command-line input; reported like an argparse error (exit 2)."""


class DomainError(Exception):
    """Valid invocation that fails against the model (exit 1)."""


def _parse_impacts(raw: str) -> list[float]:
    parts = [p.strip() for p in raw.split(",")]
    if len(parts) != 4:
        raise UsageError(f"--impacts expects 4 comma-separated values, got {len(parts)}")
    try:
        impacts = [float(p) for p in parts]
    except ValueError:
        raise UsageError(f"--impacts values must be numbers, got {raw!r}") from None
    for i, impact in enumerate(impacts):
        if not 0.0 <= impact <= 10.0:
            raise UsageError(f"impact {i + 1} must be in [0, 10], got {impact:g}")
    return impacts


def _parse_evidence(pairs: list[str] | None) -> dict[str, str]:
    evidence: dict[str, str] = {}
    for chunk in pairs or []:
        for item in chunk.split(","):
            item = item.strip()
            if not item:
                continue
            if "=" not in item:
                raise UsageError(f"evidence must be factor=State, got {item!r}")
            factor, state = item.split("=", 1)
            evidence[factor.strip()] = state.strip()
    return evidence


def _load_mast_model(path: str) -> tuple[MastModel, dict[str, str]]:
    try:
        document = model_io.load_document(path)
    except model_io.ModelFormatError as exc:
        raise DomainError(str(exc)) from exc
    if document.mast is None:
        raise DomainError(
            f"{path} holds a generic diagram, not a staff-training model; "
            "inference commands need the model parameters")
    return document.mast, dict(document.evidence or {})


def cmd_init(args: argparse.Namespace) -> int:
    impacts = _parse_impacts(args.impacts)
    if args.base_cost < 0:
        raise UsageError(f"--base-cost must be >= 0, got {args.base_cost:g}")
    model = build_model(impacts, args.base_cost)
    model_io.save_model(model, args.out)
    print(f"wrote {args.out}")
    print(f"{'factor':<12} {'impact':>6}  label")
    for factor in model.factors:
        print(f"{factor.id:<12} {factor.impact:>6g}  {factor.label}")
    print(f"base cost {model.base_cost:.2f}")
    return 0


def _run_estimate(model: MastModel, evidence: dict[str, str]):
    try:
        return infer_training(model, evidence)
    except (ValueError, KeyError, inference.InferenceError) as exc:
        message = exc.args[0] if exc.args else str(exc)
        raise DomainError(message) from exc


def cmd_infer(args: argparse.Namespace) -> int:
    model, _ = _load_mast_model(args.model)
    evidence = _parse_evidence(args.evidence)
    estimate = _run_estimate(model, evidence)
    if args.json:
        post = inference.posterior(model.diagram, evidence, model.training_node_id)
        print(json.dumps({
            "probability": estimate.probability,
            "percentage": estimate.percentage,
            "cost": estimate.cost,
            "posterior": dict(post.probabilities),
            "evidence": {k: evidence[k] for k in sorted(evidence)},
        }))
    else:
        print(f"probability {estimate.probability!r}")
        print(f"staff training required: {estimate.percentage:.1f}%  cost {estimate.cost:.2f}")
    return 0


def cmd_sensitivity(args: argparse.Namespace) -> int:
    model, _ = _load_mast_model(args.model)
    evidence = _parse_evidence(args.evidence)
    for node_id in evidence:
        if node_id not in model.factor_ids:
            raise DomainError(
                f"evidence is only accepted on risk factors, not {node_id!r} "
                f"(valid: {', '.join(model.factor_ids)})")
    if args.vary not in model.factor_ids:
        raise DomainError(
            f"unknown factor {args.vary!r} (valid: {', '.join(model.factor_ids)})")
    try:
        result = inference.sensitivity(
            model.diagram, evidence, model.training_node_id, args.vary, target_state="Yes")
    except (ValueError, KeyError, inference.InferenceError) as exc:
        raise DomainError(str(exc)) from exc

    if args.json:
        print(json.dumps({
            "vary": result.vary,
            "target_state": result.target_state,
            "rows": [
                {
                    "state": row.state,
                    "posterior": dict(row.posterior.probabilities),
                    "expected_utility": row.expected_utility,
                }
                for row in result.rows
            ],
            "spread": result.spread,
        }))
        return 0
    print(f"vary {result.vary}  (target {model.training_node_id}={result.target_state})")
    print(f"{'state':<10} {'P(Yes)':>10} {'cost':>14}")
    for row in result.rows:
        print(f"{row.state:<10} {row.posterior[result.target_state]:>10.6f} "
              f"{row.expected_utility:>14.2f}")
    print(f"spread {result.spread:.3f}")
    return 0


def cmd_export(args: argparse.Namespace) -> int:
    try:
        document = model_io.load_document(args.model)
        if args.format == "xdsl":
            model_io.export_xdsl(document.diagram, args.out)
        else:
            model_io.save_model(document.model_or_diagram, args.out)
    except (model_io.ModelFormatError, ValueError) as exc:
        raise DomainError(str(exc)) from exc
    print(f"wrote {args.out}")
    return 0


def cmd_import(args: argparse.Namespace) -> int:
    try:
        if args.format == "xdsl":
            diagram = model_io.import_xdsl(args.model)
            model_io.save_model(diagram, args.out)
        else:
            document = model_io.load_document(args.model)
            model_io.save_model(document.model_or_diagram, args.out)
    except (model_io.ModelFormatError, ValueError) as exc:
        raise DomainError(str(exc)) from exc
    print(f"wrote {args.out}")
    return 0


def cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    from .service import create_app

    app = create_app(args.snapshot_dir)
    uvicorn.run(app, host=args.host, port=args.port, log_level="info")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mast",
        description="Estimate the staff training a software project needs, and its cost, "
                    "from weighted risk factors.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_init = sub.add_parser("init", help="build a model file from four impact weights")
    p_init.add_argument("--impacts", required=True,
                        help="four comma-separated weights in [0,10], order: "
                             + ",".join(FACTOR_IDS))
    p_init.add_argument("--base-cost", type=float, default=DEFAULT_BASE_COST,
                        help="cost of training everyone (default %(default)s)")
    p_init.add_argument("--out", required=True, help="output model file (.mast.json)")
    p_init.set_defaults(handler=cmd_init)

    p_infer = sub.add_parser("infer", help="training percentage and cost under evidence")
    p_infer.add_argument("--model", required=True)
    p_infer.add_argument("--evidence", action="append",
                         help="factor=State pairs, comma-separated or repeated; "
                              f"factors: {', '.join(FACTOR_IDS)}; "
                              "states: Probable, Possible, Remote; omit a factor to "
                              "marginalize it over its prior")
    p_infer.add_argument("--json", action="store_true", help="machine-readable full precision")
    p_infer.set_defaults(handler=cmd_infer)

    p_sens = sub.add_parser("sensitivity", help="sweep one factor across its states")
    p_sens.add_argument("--model", required=True)
    p_sens.add_argument("--vary", required=True, help="factor id to sweep")
    p_sens.add_argument("--evidence", action="append")
    p_sens.add_argument("--json", action="store_true")
    p_sens.set_defaults(handler=cmd_sensitivity)

    p_export = sub.add_parser("export", help="convert a native model file to xdsl or native")
    p_export.add_argument("--model", required=True, help="input model file (native)")
    p_export.add_argument("--format", choices=("xdsl", "native"), default="xdsl")
    p_export.add_argument("--out", required=True)
    p_export.set_defaults(handler=cmd_export)

    p_import = sub.add_parser("import", help="read xdsl or native and write a native file")
    p_import.add_argument("--model", required=True, help="input file")
    p_import.add_argument("--format", choices=("xdsl", "native"), default="xdsl")
    p_import.add_argument("--out", required=True)
    p_import.set_defaults(handler=cmd_import)

    p_serve = sub.add_parser("serve", help="run the what-if HTTP service")
    p_serve.add_argument("--host", default="127.0.0.1")
    p_serve.add_argument("--port", type=int, default=int(os.environ.get("PORT", "8080")))
    p_serve.add_argument("--snapshot-dir", default=os.environ.get("SNAPSHOT_DIR") or None)
    p_serve.set_defaults(handler=cmd_serve)

    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.handler(args)
    except UsageError as exc:
        print(f"{parser.prog}: error: {exc}", file=sys.stderr)
        return 2
    except DomainError as exc:
        print(f"{parser.prog}: error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"{parser.prog}: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
