"""Command-line interface: corpus generation, experiment runs, reports, serving.

Exit codes: 0 on success, 2 on spec/usage errors, 1 on runtime failures.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .evaluate import (ExperimentSpec, SpecError, emit_report, load_results,
                       report_from_results, run_experiment, save_results)
from .shapes import SHAPES, make_demo
from .trajio import write_trajectory


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="motiongp",
        description="One-shot motion skills: corpus generation, evaluation "
                    "runs, report emission, and the session service.")
    sub = parser.add_subparsers(dest="command", required=True)

    p_gen = sub.add_parser("demo-gen", help="write corpus demonstrations")
    p_gen.add_argument("--out", required=True, help="output directory")
    p_gen.add_argument("--shapes", nargs="*", default=sorted(SHAPES),
                       help="shape names (default: all)")
    p_gen.add_argument("--rate", type=float, default=20.0,
                       help="sample rate in Hz")

    p_run = sub.add_parser("run", help="run an experiment spec")
    p_run.add_argument("--spec", required=True, help="spec JSON file")
    p_run.add_argument("--out", required=True, help="output directory")
    p_run.add_argument("--seed", type=int, default=None,
                       help="override the spec's seed")

    p_rep = sub.add_parser("report", help="emit artifacts from a prior run")
    p_rep.add_argument("--out", required=True,
                       help="directory holding results.json; artifacts go here")
    p_rep.add_argument("--format", required=True,
                       help="table or plotdata")

    p_srv = sub.add_parser("serve", help="start the HTTP session service")
    p_srv.add_argument("--host", default="127.0.0.1")
    p_srv.add_argument("--port", type=int, default=8000)
    p_srv.add_argument("--capacity", type=int, default=64,
                       help="maximum concurrent sessions")
    return parser


def _cmd_demo_gen(args) -> int:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for name in args.shapes:
        if name not in SHAPES:
            print(f"spec error: unknown shape {name!r}; available: "
                  f"{sorted(SHAPES)}", file=sys.stderr)
            return 2
        demo = make_demo(name, sample_rate_hz=args.rate)
        write_trajectory(out / f"{name}.traj", demo, label=name)
        print(f"wrote {out / (name + '.traj')}")
    return 0


def _cmd_run(args) -> int:
    try:
        raw = json.loads(Path(args.spec).read_text())
    except FileNotFoundError:
        print(f"spec error: no such spec file {args.spec}", file=sys.stderr)
        return 2
    except json.JSONDecodeError as exc:
        print(f"spec error: spec file is not valid JSON ({exc})",
              file=sys.stderr)
        return 2
    if args.seed is not None:
        raw["seed"] = args.seed
    spec = ExperimentSpec.from_dict(raw)
    report = run_experiment(spec)
    path = save_results(report, args.out)
    total = sum(c.wall_seconds for c in report.cases)
    print(f"wrote {path} ({len(report.cases)} cases, {total:.2f}s compute)")
    return 0


def _cmd_report(args) -> int:
    results = load_results(args.out)
    report = report_from_results(results)
    written = emit_report(report, args.out, args.format)
    for path in written:
        print(f"wrote {path}")
    return 0


def _cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    uvicorn.run(create_app(capacity=args.capacity), host=args.host,
                port=args.port, log_level="info")
    return 0


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    handler = {"demo-gen": _cmd_demo_gen, "run": _cmd_run,
               "report": _cmd_report, "serve": _cmd_serve}[args.command]
    try:
        return handler(args)
    except SpecError as exc:
        print(str(exc), file=sys.stderr)
        return 2
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # noqa: BLE001 - CLI boundary
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
