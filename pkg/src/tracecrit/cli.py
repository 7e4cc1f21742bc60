"""Command-line front end.

One experiment per invocation; parameters arrive as a JSON string or a
path to a JSON file.  Exit code 0 means every verdict was PASS or
NOT-APPLICABLE, 1 means at least one FAIL, 2 means the invocation itself
was invalid.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .errors import ToolkitError
from .experiments import REGISTRY, ExperimentReport, run_experiment, run_sweep

FORMATS = ("json", "csv", "md")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tracecrit",
        description=(
            "Deterministic experiments probing the trace-distance security "
            "criterion for quantum-generated keys"
        ),
    )
    parser.add_argument(
        "--experiment",
        required=True,
        help=f"one of: {', '.join(sorted(REGISTRY))}, or 'sweep'",
    )
    parser.add_argument(
        "--params",
        default="{}",
        help="experiment parameters as a JSON string or a path to a JSON file",
    )
    parser.add_argument("--seed", type=int, default=0, help="64-bit seed (default 0)")
    parser.add_argument("--out", default=None, help="output path (default stdout)")
    parser.add_argument("--format", choices=FORMATS, default="json")
    return parser


def load_params(raw: str) -> dict:
    """Parse --params as inline JSON, falling back to a file path."""
    text = raw.strip()
    if text.startswith("{"):
        parsed = json.loads(text)
    else:
        path = Path(text)
        if not path.exists():
            raise ToolkitError(f"params is neither inline JSON nor an existing file: {raw!r}")
        parsed = json.loads(path.read_text())
    if not isinstance(parsed, dict):
        raise ToolkitError("params must decode to a JSON object")
    return parsed


def render_csv(report: ExperimentReport) -> str:
    lines = ["field,value"]
    doc = report.to_dict()
    for key in sorted(doc["results"]):
        value = doc["results"][key]
        if isinstance(value, (dict, list)):
            value = json.dumps(value, sort_keys=True, separators=(",", ":"))
        lines.append(f"{key},{_csv_quote(value)}")
    for v in doc["verdicts"]:
        lines.append(f"verdict:{v['relation']},{v['status']}")
    return "\n".join(lines) + "\n"


def _csv_quote(value) -> str:
    text = value if isinstance(value, str) else repr(value)
    if any(c in text for c in ',"\n'):
        return '"' + text.replace('"', '""') + '"'
    return text


def render_markdown(report: ExperimentReport) -> str:
    doc = report.to_dict(include_timing=True)
    lines = [f"# experiment: {doc['experiment']}", ""]
    lines.append(f"- seed: {doc['seed']}")
    lines.append(f"- version: {doc['version']}")
    if "elapsed_seconds" in doc:
        lines.append(f"- elapsed: {doc['elapsed_seconds']:.4f} s")
    lines.append(f"- params: `{json.dumps(doc['params'], sort_keys=True)}`")
    lines.append("")
    rows = [("result", "value")] + [
        (k, json.dumps(v, sort_keys=True) if isinstance(v, (dict, list)) else repr(v))
        for k, v in sorted(doc["results"].items())
    ]
    width0 = max(len(r[0]) for r in rows)
    width1 = max(len(r[1]) for r in rows)
    lines.append(f"| {rows[0][0].ljust(width0)} | {rows[0][1].ljust(width1)} |")
    lines.append(f"| {'-' * width0} | {'-' * width1} |")
    for name, value in rows[1:]:
        lines.append(f"| {name.ljust(width0)} | {value.ljust(width1)} |")
    lines.append("")
    for v in doc["verdicts"]:
        lines.append(f"- **{v['status']}** {v['relation']}: {v['detail']}")
    return "\n".join(lines) + "\n"


def _emit(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        Path(out).write_text(text)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        params = load_params(args.params)
        if args.experiment == "sweep":
            target = params.get("experiment")
            if not target:
                raise ToolkitError("sweep params need an 'experiment' entry")
            csv_text = run_sweep(
                target, params.get("grid", {}), seed=args.seed, base=params.get("base")
            )
            _emit(csv_text, args.out)
            data_lines = [line for line in csv_text.splitlines()[1:] if line]
            return 0 if all(line.rsplit(",", 1)[-1] == "True" for line in data_lines) else 1
        report = run_experiment(args.experiment, params, seed=args.seed)
    except ToolkitError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except json.JSONDecodeError as exc:
        print(f"error: bad JSON in --params: {exc}", file=sys.stderr)
        return 2

    if args.format == "json":
        _emit(report.canonical_json() + "\n", args.out)
    elif args.format == "csv":
        _emit(render_csv(report), args.out)
    else:
        _emit(render_markdown(report), args.out)
    return 0 if report.all_ok() else 1


if __name__ == "__main__":
    raise SystemExit(main())
