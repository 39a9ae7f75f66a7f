"""Command-line entry point: annotate, evaluate, stats, export, validate.

Exit status: 0 success, 1 validation failure or undefined metric, 2 I/O or
parse failure, 3 usage error.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from contextlib import contextmanager
from functools import partial

from .core import PageValidationError, validate_page
from .dataset_io import (
    GT,
    PRED,
    Dataset,
    DatasetParseError,
    DatasetValidationError,
    compute_stats,
    dumps_dataset,
    export_dot,
    export_graphml,
    load_dataset,
    parse_type_filter,
)
from .evaluation import evaluate
from .relations import DEFAULT_PATTERNS, AnnotateConfig, annotate, load_patterns

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_IO = 2
EXIT_USAGE = 3

log = logging.getLogger("docgraph")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _ratio(text: str) -> float:
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not 0.0 <= v <= 1.0:
        raise argparse.ArgumentTypeError(f"{v} is outside [0, 1]")
    return v


def _ratio_list(text: str) -> list[float]:
    return [_ratio(part) for part in text.split(",") if part.strip()]


def _non_negative(text: str) -> float:
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if v < 0:
        raise argparse.ArgumentTypeError("must be >= 0")
    return v


def _positive_int(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return v


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="docgraph", description="Layout relation graphs: annotation and evaluation.")
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging on stderr")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND", parser_class=_Parser)
    sub.required = True

    jobs = argparse.ArgumentParser(add_help=False)
    jobs.add_argument("--jobs", type=_positive_int, default=os.cpu_count() or 1,
                      help="worker processes (default: CPU count)")

    p = sub.add_parser("annotate", parents=[jobs], help="build relation graphs for a layout file")
    p.add_argument("input")
    p.add_argument("-o", "--output", help="write the graph file here instead of stdout")
    p.add_argument("--xy-min-gap", type=_non_negative, default=0.0,
                   help="whitespace wider than this (pixels) splits an X-Y cut region")
    p.add_argument("--ref-patterns", help="file of 'kind<TAB>regex' reference patterns")
    only = p.add_mutually_exclusive_group()
    only.add_argument("--spatial-only", action="store_true")
    only.add_argument("--logical-only", action="store_true")

    p = sub.add_parser("evaluate", parents=[jobs], help="score predictions against ground truth")
    p.add_argument("gt")
    p.add_argument("pred")
    p.add_argument("--iou-threshold", type=_ratio, default=0.5)
    rel = p.add_mutually_exclusive_group()
    rel.add_argument("--rel-threshold", type=_ratio, default=None)
    rel.add_argument("--rel-thresholds", type=_ratio_list, default=None,
                     help="comma list, one report per value, e.g. 0.5,0.75,0.95")
    p.add_argument("--max-dets", type=_positive_int, default=300)
    p.add_argument("--no-dla", action="store_true", help="skip box mAP")
    p.add_argument("--no-fuse", action="store_true", help="ignore relation 'existence' fields")
    p.add_argument("--format", choices=["json", "text"], default="json")

    p = sub.add_parser("stats", help="relation and instance counts")
    p.add_argument("dataset")
    p.add_argument("--format", choices=["text", "json"], default="text")

    p = sub.add_parser("export", help="write a page graph as DOT or GraphML")
    p.add_argument("dataset")
    p.add_argument("--page", type=int, help="page id (default: first page)")
    p.add_argument("--format", choices=["dot", "graphml"], default="dot")
    p.add_argument("--types", default=None,
                   help="'spatial', 'logical' or a comma list of relation names")
    p.add_argument("-o", "--output")

    p = sub.add_parser("validate", help="check page invariants")
    p.add_argument("dataset")
    p.add_argument("--predictions", action="store_true", help="allow overlapping boxes")
    return parser


@contextmanager
def _pool(jobs: int, n_items: int):
    if jobs <= 1 or n_items <= 1:
        yield None
    else:
        with ProcessPoolExecutor(max_workers=min(jobs, n_items)) as ex:
            yield ex


def _emit(text: str, output=None) -> None:
    if output:
        with open(output, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _cmd_annotate(args) -> int:
    patterns = load_patterns(args.ref_patterns) if args.ref_patterns else list(DEFAULT_PATTERNS)
    config = AnnotateConfig(min_gap=args.xy_min_gap, patterns=patterns,
                            spatial=not args.logical_only, logical=not args.spatial_only)
    dataset = load_dataset(args.input, role=GT)
    with _pool(args.jobs, len(dataset.pages)) as ex:
        mapper = ex.map if ex is not None else map
        pages = list(mapper(partial(annotate, config=config), dataset.pages))
    _emit(dumps_dataset(Dataset(pages, dataset.metadata)), args.output)
    return EXIT_OK


def _format_report_text(r) -> str:
    def fmt(v):
        return "undefined" if v is None else f"{100 * v:.2f}"
    lines = [f"T_IoU={r.iou_threshold} T_R={r.rel_threshold}  mR_g={fmt(r.mR_g)}  mAP_g={fmt(r.mAP_g)}"
             + (f"  DLA mAP={fmt(r.dla.map)}" if r.dla is not None else "")]
    for name in r.recall:
        lines.append(f"  {name:<10} R={fmt(r.recall[name]):>7}  AP={fmt(r.ap[name]):>7}")
    if r.excluded_relations:
        lines.append(f"  no ground truth for: {', '.join(r.excluded_relations)}")
    return "\n".join(lines) + "\n"


def _cmd_evaluate(args) -> int:
    gt = load_dataset(args.gt, role=GT)
    pred = load_dataset(args.pred, role=PRED)
    if args.rel_thresholds:
        thresholds = args.rel_thresholds
    else:
        thresholds = [args.rel_threshold if args.rel_threshold is not None else 0.5]
    gt_ids = {p.id for p in gt.pages}
    extra = sorted(p.id for p in pred.pages if p.id not in gt_ids)
    if extra:
        log.warning("prediction pages without ground truth ignored: %s", extra)
    with _pool(args.jobs, len(gt.pages)) as ex:
        reports = evaluate(gt.pages, pred.pages, args.iou_threshold, thresholds,
                           fuse=not args.no_fuse, with_dla=not args.no_dla,
                           max_dets=args.max_dets, executor=ex)
    if args.format == "json":
        _emit(json.dumps([r.to_dict() for r in reports], indent=1) + "\n")
    else:
        _emit("".join(_format_report_text(r) for r in reports))
    if any(r.undefined for r in reports):
        log.error("metric undefined: ground truth has no relations or no boxes")
        return EXIT_INVALID
    return EXIT_OK


def _cmd_stats(args) -> int:
    report = compute_stats(load_dataset(args.dataset))
    if args.format == "json":
        _emit(json.dumps(report.to_dict(), indent=1) + "\n")
    else:
        _emit(report.to_text())
    return EXIT_OK


def _cmd_export(args) -> int:
    try:
        types = parse_type_filter(args.types)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    dataset = load_dataset(args.dataset, validate=False)
    if not dataset.pages:
        raise UsageError("dataset has no pages")
    if args.page is None:
        page = dataset.pages[0]
    else:
        page = next((p for p in dataset.pages if p.id == args.page), None)
        if page is None:
            raise UsageError(f"no page with id {args.page}")
    report = validate_page(page, allow_overlap=True)
    if not report.ok:
        raise PageValidationError(report)
    render = export_dot if args.format == "dot" else export_graphml
    _emit(render(page, types), args.output)
    return EXIT_OK


def _cmd_validate(args) -> int:
    dataset = load_dataset(args.dataset, validate=False)
    reports = [validate_page(p, allow_overlap=args.predictions) for p in dataset.pages]
    bad = [r for r in reports if not r.ok]
    out = {"pages": len(reports), "invalid_pages": len(bad),
           "warnings": dataset.warnings, "reports": [r.to_dict() for r in bad]}
    _emit(json.dumps(out, indent=1, ensure_ascii=False) + "\n")
    return EXIT_INVALID if bad else EXIT_OK


COMMANDS = {
    "annotate": _cmd_annotate,
    "evaluate": _cmd_evaluate,
    "stats": _cmd_stats,
    "export": _cmd_export,
    "validate": _cmd_validate,
}


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s", stream=sys.stderr)
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"docgraph {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DatasetParseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except DatasetValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        print(json.dumps([r.to_dict() for r in exc.reports], indent=1), file=sys.stderr)
        return EXIT_INVALID
    except PageValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        print(json.dumps(exc.report.to_dict(), indent=1), file=sys.stderr)
        return EXIT_INVALID
    except ValueError as exc:
        # malformed pattern files and other bad inputs surfaced while reading
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
