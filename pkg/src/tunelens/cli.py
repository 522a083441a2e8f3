"""Command-line frontend mirroring the HTTP API for offline/scripted use.

Every analysis subcommand is a thin composition of one engine operation
plus the shared canonical serialization, so `--json` output is
byte-identical to the corresponding server endpoint payload for the same
inputs and seed. Reports default to human-readable tables; stdout carries
the report, stderr the diagnostics.

Exit codes: 0 success, 1 validation/usage error, 2 internal error.
"""

from __future__ import annotations

import argparse
import json
import sys
import traceback
from pathlib import Path
from typing import Any, Sequence

from .forest import ForestConfig
from .guidance import (
    GuidanceUnavailableError,
    bounds_payload,
    canonical_json,
    compute_guidance,
    importance_payload,
    model_fit_payload,
)
from .space import Dataset, SchemaError, SpaceDef, ingest_trials, parse_space
from .server import ServerSettings, serve, suggest_payload


class _Parser(argparse.ArgumentParser):
    def error(self, message: str) -> None:  # exit 1, not argparse's default 2
        self.print_usage(sys.stderr)
        sys.stderr.write(f"error: {message}\n")
        raise SystemExit(1)


def _forest_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--trees", type=int, default=100, help="number of trees (default 100)")
    p.add_argument("--max-depth", type=int, default=None, help="max tree depth (default unlimited)")
    p.add_argument("--min-samples-leaf", type=int, default=2)
    p.add_argument("--feature-subsample", type=float, default=1.0 / 3.0)
    p.add_argument("--no-bootstrap", action="store_true", help="fit each tree on the full data")


def _forest_config(args: argparse.Namespace) -> ForestConfig:
    return ForestConfig(
        n_trees=args.trees,
        max_depth=args.max_depth,
        min_samples_leaf=args.min_samples_leaf,
        feature_subsample=args.feature_subsample,
        bootstrap=not args.no_bootstrap,
    )


def _load_space(path: str) -> SpaceDef:
    return parse_space(Path(path).read_text())


def _load_dataset(space_path: str, trials_path: str) -> Dataset:
    """Ingest a trial log; rejected lines go to stderr, accepted ones proceed."""
    space = _load_space(space_path)
    accepted, diagnostics = ingest_trials(Path(trials_path).read_text(), space)
    for d in diagnostics:
        sys.stderr.write(f"{trials_path}:{d.line}: {d.level}: {d.message}\n")
    return Dataset(space=space, trials=tuple(accepted), version=len(accepted))


def _print_payload(payload: Any) -> None:
    sys.stdout.write(canonical_json(payload) + "\n")


def _fmt(v: float | None, digits: int = 6) -> str:
    return "-" if v is None else f"{v:.{digits}f}"


def _cmd_ingest(args: argparse.Namespace) -> int:
    space = _load_space(args.space)
    accepted, diagnostics = ingest_trials(Path(args.trials).read_text(), space)
    payload = {
        "accepted": len(accepted),
        "rejected": [
            {"line": d.line, "reason": d.message} for d in diagnostics if d.level == "error"
        ],
        "warnings": [
            {"line": d.line, "message": d.message} for d in diagnostics if d.level == "warning"
        ],
        "version": len(accepted),
    }
    if args.json:
        _print_payload(payload)
    else:
        print(f"accepted {payload['accepted']} trials")
        for r in payload["rejected"]:
            sys.stderr.write(f"rejected line {r['line']}: {r['reason']}\n")
        for w in payload["warnings"]:
            sys.stderr.write(f"warning line {w['line']}: {w['message']}\n")
    if args.out:
        doc = Dataset(space=space, trials=tuple(accepted), version=len(accepted)).to_doc()
        Path(args.out).write_text(canonical_json(doc) + "\n")
    return 0


def _guidance(args: argparse.Namespace):
    dataset = _load_dataset(args.space, args.trials)
    return dataset, compute_guidance(
        dataset,
        args.metric,
        seed=args.seed,
        config=_forest_config(args),
        k=args.k,
        guidance_min=args.guidance_min,
    )


def _cmd_importance(args: argparse.Namespace) -> int:
    dataset, bundle = _guidance(args)
    selected = (
        [p for p in args.params.split(",") if p]
        if args.params
        else dataset.space.param_names
    )
    payload = importance_payload(bundle, selected, dataset)
    if args.json:
        _print_payload(payload)
        return 0
    print(f"importance for metric {payload['metric']!r}")
    print(f"total prediction variance: {payload['total_variance']:.6g}")
    if payload["zero_variance"]:
        print("constant surrogate: zero variance, no importance attributable")
    width = max(len(e["params"][0]) for e in payload["entries"])
    print(f"{'param'.ljust(width)}  displayed  raw_fraction")
    for e in sorted(payload["entries"], key=lambda e: -e["displayed_score"]):
        print(
            f"{e['params'][0].ljust(width)}  {e['displayed_score']:>9.4f}  {e['raw_fraction']:>12.6f}"
        )
    return 0


def _cmd_bounds(args: argparse.Namespace) -> int:
    dataset, bundle = _guidance(args)
    payload = bounds_payload(bundle)
    if args.json:
        _print_payload(payload)
        return 0
    r2 = payload["surrogate_r2"]
    shown = "-" if r2 is None else f"{max(r2, 0.0):.4f} (raw {r2:.4f})"
    print(
        f"suggested ranges for {payload['metric']!r} ({payload['direction']}), "
        f"{payload['n_trees']} trees, surrogate R^2 {shown}"
    )
    width = max(len(p["name"]) for p in payload["params"])
    print(f"{'param'.ljust(width)}  {'lo':>14}  {'hi':>14}  support")
    for p in payload["params"]:
        print(
            f"{p['name'].ljust(width)}  {p['lo']:>14.6g}  {p['hi']:>14.6g}  {p['support']:.2f}"
        )
    return 0


def _cmd_cv(args: argparse.Namespace) -> int:
    dataset, bundle = _guidance(args)
    payload = model_fit_payload(bundle)
    if args.json:
        _print_payload(payload)
        return 0
    if "error" in payload:
        print(f"cross-validation unavailable: {payload['error']}")
        return 0
    print(
        f"{payload['k']}-fold cross-validation on {payload['n_train']} trials, "
        f"metric {payload['metric']!r}"
    )
    for i, s in enumerate(payload["fold_scores"], start=1):
        print(f"fold {i:>2}: {_fmt(s, 4)}")
    mean = payload["mean_score"]
    print(f"mean R^2: {max(mean, 0.0):.4f} (raw {mean:.4f})")
    for w in payload["warnings"]:
        sys.stderr.write(f"warning: {w}\n")
    return 0


def _cmd_suggest(args: argparse.Namespace) -> int:
    doc: dict[str, Any] = {"strategy": args.strategy}
    if args.spec:
        doc["spec"] = json.loads(Path(args.spec).read_text())
    if args.state:
        doc["state"] = json.loads(Path(args.state).read_text())
    if args.results:
        doc["results"] = json.loads(Path(args.results).read_text())
    if args.metric:
        doc["metric"] = args.metric
    if args.direction:
        doc["direction"] = args.direction
    if args.shrink is not None:
        doc["shrink"] = args.shrink
    space = _load_space(args.space) if args.space else None
    payload = suggest_payload(doc, space)
    if args.state_out and payload["state"] is not None:
        Path(args.state_out).write_text(canonical_json(payload["state"]) + "\n")
    if args.json:
        _print_payload(payload)
    else:
        for item in payload["batch"]:
            sys.stdout.write(canonical_json(item) + "\n")
    return 0


def _cmd_serve(args: argparse.Namespace) -> int:
    settings = ServerSettings(
        space_path=args.space,
        storage_path=args.storage,
        host=args.host,
        port=args.port,
        default_seed=args.seed,
        guidance_min=args.guidance_min,
        cv_k=args.k,
        forest_config=_forest_config(args),
        static_dir=args.static_dir,
    )
    serve(settings)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="tunelens", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="validate a trial log against a space")
    p.add_argument("--space", required=True)
    p.add_argument("--trials", required=True)
    p.add_argument("--out", default=None, help="write the validated dataset document here")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=_cmd_ingest)

    for name, func, help_text in (
        ("importance", _cmd_importance, "variance-based importance scores"),
        ("bounds", _cmd_bounds, "suggested optimal ranges from best-leaf paths"),
        ("cv", _cmd_cv, "k-fold cross-validation of the surrogate"),
    ):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--space", required=True)
        p.add_argument("--trials", required=True)
        p.add_argument("--metric", required=True)
        if name == "importance":
            p.add_argument("--params", default=None, help="comma-separated selection")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--k", type=int, default=10)
        p.add_argument("--guidance-min", type=int, default=10)
        p.add_argument("--json", action="store_true")
        _forest_flags(p)
        p.set_defaults(func=func)

    p = sub.add_parser("suggest", help="generate next-batch configurations")
    p.add_argument("--strategy", required=True, choices=["naive", "adaptive_init", "adaptive_refine"])
    p.add_argument("--spec", default=None, help="grid spec JSON file")
    p.add_argument("--state", default=None, help="adaptive state JSON file (refine)")
    p.add_argument("--results", default=None, help="results JSON file (refine)")
    p.add_argument("--metric", default=None, help="metric whose direction drives refine")
    p.add_argument("--direction", default=None, choices=["maximize", "minimize"])
    p.add_argument("--shrink", type=float, default=None)
    p.add_argument("--space", default=None, help="space JSON for lattice snapping/direction")
    p.add_argument("--state-out", default=None, help="write the refined state here")
    p.add_argument("--json", action="store_true", help="full payload instead of batch JSONL")
    p.set_defaults(func=_cmd_suggest)

    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("--space", required=True)
    p.add_argument("--storage", required=True)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--guidance-min", type=int, default=10)
    p.add_argument("--k", type=int, default=10)
    p.add_argument("--static-dir", default=None)
    _forest_flags(p)
    p.set_defaults(func=_cmd_serve)

    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (SchemaError, GuidanceUnavailableError, ValueError, KeyError) as exc:
        msg = exc.args[0] if isinstance(exc, KeyError) and exc.args else exc
        sys.stderr.write(f"error: {msg}\n")
        return 1
    except FileNotFoundError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 1
    except Exception:
        traceback.print_exc()
        return 2


if __name__ == "__main__":
    sys.exit(main())
