"""Command line: extract, score, batch-score, render, overlay, winrate.

Exit codes: 0 success, 1 usage or fatal error, 2 partial failure.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import json
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import Any, Callable, Sequence

import numpy as np

from . import __version__
from .extraction import EmptyGlyph, ExtractionConfig, extract_glyph
from .images import read_image, write_image
from .metrics import EmptyInput, MetricConfig, geometric_score, win_rate
from .rendering import AxisOverlayConfig, rasterize_strokes, render_axis_overlay
from .serialization import ParseError, emit_bezierseq, emit_svg, parse_bezierseq

PROGRAM_SUFFIX = ".bezierseq"
SCORE_KEYS = ("geometric", "distance", "angle", "length", "base_geometric")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(1)


# ---------------------------------------------------------------------------
# Configuration: defaults <- --config file <- flags

def _flag(name: str) -> str:
    return "--" + name.replace("_", "-")


def _coerce(cls, name: str, raw: Any):
    default = next(f.default for f in dataclasses.fields(cls) if f.name == name)
    if name == "binarize_threshold":
        return raw if raw == "otsu" else int(raw)
    if isinstance(default, bool):
        if isinstance(raw, bool):
            return raw
        low = str(raw).strip().lower()
        if low in ("1", "true", "yes", "on"):
            return True
        if low in ("0", "false", "no", "off"):
            return False
        raise UsageError(f"{name}: expected a boolean, got {raw!r}")
    return type(default)(raw)


def read_config_file(path: str | Path) -> dict[str, str]:
    """``key = value`` lines; ``#`` starts a comment."""
    values = {}
    for lineno, line in enumerate(Path(path).read_text().splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{lineno}: expected key=value")
        key, value = (s.strip() for s in line.split("=", 1))
        values[key.replace("-", "_")] = value
    return values


def _add_config_flags(parser: argparse.ArgumentParser, cls) -> None:
    if not any(a.dest == "config" for a in parser._actions):
        parser.add_argument("--config", help="key=value file with config overrides")
    for f in dataclasses.fields(cls):
        if f.name == "apply_sigmoid":
            parser.add_argument("--no-sigmoid", dest="apply_sigmoid", action="store_const", const=False, default=None,
                                help="report base scores without sigmoid shaping")
            continue
        if f.name == "size" and cls is AxisOverlayConfig:
            parser.add_argument("--size", type=int, default=None, help="overlay canvas side in pixels (default 512)")
            continue
        parser.add_argument(_flag(f.name), dest=f.name, default=None, help=f"default {f.default}")


def build_config(cls, args: argparse.Namespace):
    file_values = getattr(args, "_file_config", {})
    kwargs = {}
    try:
        for f in dataclasses.fields(cls):
            if f.name in file_values:
                kwargs[f.name] = _coerce(cls, f.name, file_values[f.name])
            cli = getattr(args, f.name, None)
            if cli is not None:
                kwargs[f.name] = _coerce(cls, f.name, cli)
        return cls(**kwargs)
    except (TypeError, ValueError) as exc:
        raise UsageError(f"invalid {cls.__name__}: {exc}") from exc


# ---------------------------------------------------------------------------
# Worker helpers (module level so process pools can pickle them)


def _map(func: Callable, items: Sequence, jobs: int) -> list:
    if jobs <= 1 or len(items) <= 1:
        return [func(x) for x in items]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(func, items))


def _extract_one(task: tuple) -> dict:
    src, out_dir, config, precision, want_svg, svg_px = task
    src = Path(src)
    dest_dir = Path(out_dir) if out_dir else src.parent
    out = dest_dir / (src.stem + PROGRAM_SUFFIX)
    record = {"input": str(src), "output": str(out)}
    try:
        seq = extract_glyph(read_image(src), config)
    except EmptyGlyph as exc:
        return {**record, "status": "failed", "error": f"EmptyGlyph: {exc}"}
    except Exception as exc:  # unreadable or undecodable input
        return {**record, "status": "failed", "error": f"{type(exc).__name__}: {exc}"}
    out.write_text(emit_bezierseq(seq, precision) + "\n")
    record.update(status="ok", strokes=len(seq))
    if want_svg:
        svg = dest_dir / (src.stem + ".svg")
        svg.write_text(emit_svg(seq, svg_px))
        record["svg"] = str(svg)
    return record


def _read_program(path: Path, mode: str):
    return parse_bezierseq(path.read_bytes(), mode)


def _score_pair(task: tuple) -> dict:
    name, gt_path, gen_path, mode, config = task
    record: dict[str, Any] = {"name": name}
    try:
        gt, _ = _read_program(Path(gt_path), "strict")
    except (OSError, ParseError) as exc:
        return {**record, "error": f"ground truth: {exc}"}
    if gen_path is None:
        gen, note = (), "generated program missing; scored as empty"
    else:
        try:
            gen, diag = _read_program(Path(gen_path), mode)
            note = f"{len(diag.errors)} parse diagnostics" if diag.errors else None
        except (OSError, ParseError) as exc:
            gen, note = (), f"generated program unparseable ({exc}); scored as empty"
    try:
        report = geometric_score(gt, gen, config)
    except EmptyInput as exc:
        return {**record, "error": f"ground truth: {exc}"}
    record.update(report.to_json())
    record["missing"] = gen_path is None
    if note:
        record["note"] = note
    return record


def _manifest(command: str, args: argparse.Namespace, inputs: list[str], files: list[dict]) -> dict:
    # Every manifest snapshots all three configs; fields a command has no
    # flags for stay at their defaults.
    configs = [build_config(cls, args) for cls in (ExtractionConfig, MetricConfig, AxisOverlayConfig)]
    return {
        "tool": "bezierglyph",
        "version": __version__,
        "command": command,
        "config": {type(c).__name__: dataclasses.asdict(c) for c in configs},
        "inputs": inputs,
        "files": files,
    }


def _dump(obj: Any) -> str:
    return json.dumps(obj, sort_keys=False)


# ---------------------------------------------------------------------------
# Commands


def cmd_extract(args) -> int:
    config = build_config(ExtractionConfig, args)
    if args.out:
        Path(args.out).mkdir(parents=True, exist_ok=True)
    tasks = [(p, args.out, config, args.precision, args.svg, args.svg_size) for p in args.inputs]
    records = _map(_extract_one, tasks, args.jobs)
    manifest_path = Path(args.manifest) if args.manifest else Path(args.out or ".") / "manifest.json"
    manifest = _manifest("extract", args, [str(p) for p in args.inputs], records)
    manifest_path.write_text(json.dumps(manifest, indent=2) + "\n")
    failed = [r for r in records if r["status"] != "ok"]
    for r in failed:
        print(f"{r['input']}: {r['error']}", file=sys.stderr)
    return 2 if failed else 0


def cmd_score(args) -> int:
    config = build_config(MetricConfig, args)
    try:
        gt, _ = _read_program(Path(args.gt), "strict")
    except (OSError, ParseError) as exc:
        print(f"ground truth {args.gt}: {exc}", file=sys.stderr)
        return 1
    mode = "strict" if args.strict else "lenient"
    try:
        gen, diag = _read_program(Path(args.gen), mode)
        for offset, msg in diag.errors:
            print(f"{args.gen}: offset {offset}: {msg}", file=sys.stderr)
    except ParseError as exc:
        if args.strict:
            print(f"generated {args.gen}: {exc}", file=sys.stderr)
            return 1
        print(f"generated {args.gen}: {exc}; scoring as empty", file=sys.stderr)
        gen = ()
    except OSError as exc:
        print(f"generated {args.gen}: {exc}", file=sys.stderr)
        return 1
    try:
        report = geometric_score(gt, gen, config)
    except EmptyInput as exc:
        print(f"ground truth {args.gt}: {exc}", file=sys.stderr)
        return 1
    for note in report.diagnostics:
        print(note, file=sys.stderr)
    print(json.dumps(report.to_json(), indent=2))
    return 0


def cmd_batch_score(args) -> int:
    config = build_config(MetricConfig, args)
    gt_dir, gen_dir = Path(args.gt_dir), Path(args.gen_dir)
    gt_names = {p.stem for p in gt_dir.glob("*" + PROGRAM_SUFFIX)}
    gen_names = {p.stem for p in gen_dir.glob("*" + PROGRAM_SUFFIX)}
    common = sorted(gt_names & gen_names)
    if not common:
        print("no matching program names between the two directories", file=sys.stderr)
        return 1
    missing = sorted(gt_names - gen_names)
    extra = sorted(gen_names - gt_names)
    names = sorted(common + missing) if args.missing_as_zero else common
    mode = "strict" if args.strict else "lenient"
    tasks = [
        (n, str(gt_dir / (n + PROGRAM_SUFFIX)),
         str(gen_dir / (n + PROGRAM_SUFFIX)) if n in gen_names else None, mode, config)
        for n in names
    ]
    records = _map(_score_pair, tasks, args.jobs)
    lines = [_dump(r) for r in records]
    scored = [r for r in records if "error" not in r]
    summary = {"pairs": len(scored)}
    for key in SCORE_KEYS:
        summary[key] = float(np.mean([r[key] for r in scored])) if scored else 0.0
    summary["errors"] = [r["name"] for r in records if "error" in r]
    summary["unmatched_gt"] = [] if args.missing_as_zero else missing
    summary["missing_scored_as_zero"] = missing if args.missing_as_zero else []
    summary["unmatched_gen"] = extra
    lines.append(_dump({"summary": summary}))
    text = "\n".join(lines) + "\n"
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    if args.manifest:
        manifest_path = Path(args.manifest)
    else:
        manifest_path = Path(args.out + ".manifest.json") if args.out else Path("manifest.json")
    files = [{"name": r["name"], "status": "failed" if "error" in r else "ok", **({"error": r["error"]} if "error" in r else {})}
             for r in records]
    manifest = _manifest("batch-score", args, [str(gt_dir), str(gen_dir)], files)
    manifest_path.write_text(json.dumps(manifest, indent=2) + "\n")
    return 2 if summary["errors"] else 0


def cmd_render(args) -> int:
    src = Path(args.input)
    try:
        seq, diag = _read_program(src, "strict" if args.strict else "lenient")
    except (OSError, ParseError) as exc:
        print(f"{src}: {exc}", file=sys.stderr)
        return 1
    for offset, msg in diag.errors:
        print(f"{src}: offset {offset}: {msg}", file=sys.stderr)
    png = args.png
    if not png and not args.svg:
        png = str(src.with_suffix(".png"))
    if png:
        write_image(png, rasterize_strokes(seq, args.size, args.stroke_width))
    if args.svg:
        Path(args.svg).write_text(emit_svg(seq, args.size, args.stroke_width))
    return 0


def cmd_overlay(args) -> int:
    config = build_config(AxisOverlayConfig, args)
    src = Path(args.input)
    try:
        if src.suffix == PROGRAM_SUFFIX:
            glyph, _ = _read_program(src, "lenient")
        else:
            glyph = read_image(src)
    except (OSError, ParseError, ValueError) as exc:
        print(f"{src}: {exc}", file=sys.stderr)
        return 1
    out = args.output or str(src.with_name(src.stem + ".overlay.png"))
    write_image(out, render_axis_overlay(glyph, config))
    return 0


def _winrate_rows(args) -> list[tuple[str, int, int, int]]:
    rows = []
    if args.csv:
        with open(args.csv, newline="") as fh:
            for rec in csv.reader(fh):
                rec = [c.strip() for c in rec if c.strip() != ""]
                if not rec:
                    continue
                label, nums = (rec[0], rec[1:]) if len(rec) == 4 else (f"row{len(rows) + 1}", rec)
                try:
                    w, t, l = (int(v) for v in nums)
                except ValueError:
                    if not rows:  # header line
                        continue
                    raise UsageError(f"bad winrate row {rec!r}")
                rows.append((label, w, t, l))
    counts = args.counts or []
    if len(counts) % 3:
        raise UsageError("counts must come in wins/ties/losses triplets")
    for k in range(0, len(counts), 3):
        rows.append((f"row{len(rows) + 1}", *counts[k : k + 3]))
    if not rows:
        raise UsageError("no counts given")
    return rows


def cmd_winrate(args) -> int:
    rows = _winrate_rows(args)
    try:
        for label, w, t, l in rows:
            print(f"{label}\t{w}\t{t}\t{l}\t{win_rate(w, t, l):.2f}%")
        if len(rows) > 1:
            w, t, l = (sum(r[k] for r in rows) for k in (1, 2, 3))
            print(f"aggregate\t{w}\t{t}\t{l}\t{win_rate(w, t, l):.2f}%")
    except ValueError as exc:
        print(f"winrate: {exc}", file=sys.stderr)
        return 1
    return 0


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="bezierglyph", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("extract", help="raster glyphs to .bezierseq programs")
    p.add_argument("inputs", nargs="+")
    p.add_argument("--out", help="output directory (default: beside each input)")
    p.add_argument("--svg", action="store_true", help="also write an SVG per input")
    p.add_argument("--svg-size", type=int, default=512)
    p.add_argument("--precision", type=int, default=3)
    p.add_argument("--manifest", help="manifest path (default: <out>/manifest.json)")
    p.add_argument("--jobs", type=int, default=1)
    _add_config_flags(p, ExtractionConfig)
    p.set_defaults(func=cmd_extract)

    p = sub.add_parser("score", help="Geometric Score of a generated program")
    p.add_argument("gt")
    p.add_argument("gen")
    p.add_argument("--strict", action="store_true", help="parse the generated program strictly")
    _add_config_flags(p, MetricConfig)
    p.set_defaults(func=cmd_score)

    p = sub.add_parser("batch-score", help="score every matching pair in two directories")
    p.add_argument("gt_dir")
    p.add_argument("gen_dir")
    p.add_argument("--out", help="write JSON lines here instead of stdout")
    p.add_argument("--missing-as-zero", action="store_true")
    p.add_argument("--manifest", help="manifest path (default: <out>.manifest.json or ./manifest.json)")
    p.add_argument("--strict", action="store_true")
    p.add_argument("--jobs", type=int, default=1)
    _add_config_flags(p, MetricConfig)
    p.set_defaults(func=cmd_batch_score)

    p = sub.add_parser("render", help="rasterise and/or export a program")
    p.add_argument("input")
    p.add_argument("--png")
    p.add_argument("--svg")
    p.add_argument("--size", type=int, default=512)
    p.add_argument("--stroke-width", type=float, default=3.0)
    p.add_argument("--strict", action="store_true")
    p.set_defaults(func=cmd_render)

    p = sub.add_parser("overlay", help="draw the labelled coordinate frame around a glyph")
    p.add_argument("input", help="PNG/PGM image or .bezierseq program")
    p.add_argument("-o", "--output")
    _add_config_flags(p, AxisOverlayConfig)
    p.set_defaults(func=cmd_overlay)

    p = sub.add_parser("winrate", help="(wins + ties/2) / total")
    p.add_argument("counts", nargs="*", type=int, help="wins ties losses [wins ties losses ...]")
    p.add_argument("--csv", help="CSV rows of [label,] wins, ties, losses")
    p.set_defaults(func=cmd_winrate)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        config_path = getattr(args, "config", None)
        args._file_config = read_config_file(config_path) if config_path else {}
        return args.func(args)
    except UsageError as exc:
        print(f"bezierglyph: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"bezierglyph: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
