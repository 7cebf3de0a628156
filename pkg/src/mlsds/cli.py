"""Command-line interface.

Exit status: 0 success, 1 validation errors (findings on stderr),
2 usage errors (bad flags, missing input files).
"""

from __future__ import annotations

import argparse
import os
import shutil
import sys
import tempfile
from pathlib import Path
from typing import Mapping, Sequence

from mlsds import __version__
from mlsds._reader import Reader, check_version, load_json
from mlsds.datasheet import compile_bundle, load_bundle
from mlsds.findings import DatasheetError, Finding, ValidationReport
from mlsds.footprint import (
    breakdown_csv,
    compute_footprint,
    footprint_inputs_from_obj,
    footprint_report_json,
    read_bom_csv,
)
from mlsds.labels import (
    parse_nutrition_label,
    parse_privacy_label,
    validate_nutrition_label,
    validate_privacy_label,
)
from mlsds.manifest import default_registry, load_registry, parse_manifest, validate_manifest
from mlsds.metrics import (
    ModelMeta,
    build_model_report,
    curve_csv,
    model_meta_from_obj,
    model_report_json,
    read_eval_csv,
)
from mlsds.render import output_files
from mlsds.study import (
    DEFAULT_DISTANCES_M,
    DIMENSIONS,
    build_study_report,
    check_study,
    read_participants_csv,
    read_readings_csv,
    strata_csv,
    study_report_json,
)
from mlsds.wire import ConfidenceByte, decode_confidence, encode_confidence

EXIT_OK, EXIT_INVALID, EXIT_USAGE = 0, 1, 2
UNSPECIFIED_META = ModelMeta("unspecified", 0, "unspecified", "unspecified")


class UsageError(Exception):
    pass


def _use_color(stream) -> bool:
    return not os.environ.get("MLSDS_NO_COLOR") and hasattr(stream, "isatty") and stream.isatty()


def print_findings(findings: Sequence[Finding], stream=None) -> None:
    stream = stream or sys.stderr
    color = _use_color(stream)
    for f in findings:
        line = str(f)
        if color:
            code = "31" if f.severity == "error" else "33"
            line = f"\033[{code}m{f.severity}\033[0m{line[len(f.severity):]}"
        print(line, file=stream)


def write_atomically(out_dir: Path, files: Mapping[str, str]) -> None:
    """Write every file into a scratch directory inside ``out_dir``, then
    move them into place. Nothing is written outside ``out_dir``."""
    out_dir.mkdir(parents=True, exist_ok=True)
    scratch = Path(tempfile.mkdtemp(prefix=".mlsds-", dir=out_dir))
    try:
        for name, text in files.items():
            (scratch / name).write_bytes(text.encode("utf-8"))
        for name in files:
            os.replace(scratch / name, out_dir / name)
    finally:
        shutil.rmtree(scratch, ignore_errors=True)


def _read(path: str) -> str:
    p = Path(path)
    if not p.is_file():
        raise UsageError(f"input file not found: {path}")
    try:
        return p.read_bytes().decode("utf-8")
    except UnicodeDecodeError as exc:
        raise DatasheetError(f"not valid UTF-8 at byte {exc.start}", path) from None


def _registry(args):
    if args.registry:
        if not Path(args.registry).is_file():
            raise UsageError(f"registry file not found: {args.registry}")
        return load_registry(args.registry)
    return default_registry()


def _finish(args, report: ValidationReport) -> int:
    if getattr(args, "strict", False):
        report = report.strict()
    print_findings(report.findings)
    if getattr(args, "report", None):
        Path(args.report).write_text(report.to_json(), encoding="utf-8")
    return EXIT_OK if report.valid else EXIT_INVALID


def _bundle_dir(path: str) -> Path:
    p = Path(path)
    if not (p / "bundle.json").is_file():
        raise UsageError(f"no bundle.json in {path}")
    return p


# -- subcommands -----------------------------------------------------------

def cmd_validate(args) -> int:
    registry = _registry(args)
    report = ValidationReport()
    if args.bundle:
        _, report = compile_bundle(load_bundle(_bundle_dir(args.bundle)), registry)
    if args.manifest:
        report += validate_manifest(parse_manifest(_read(args.manifest)), registry)
    if args.privacy:
        report += validate_privacy_label(parse_privacy_label(_read(args.privacy)))
    if args.nutrition:
        report += validate_nutrition_label(parse_nutrition_label(_read(args.nutrition)))
    if not (args.bundle or args.manifest or args.privacy or args.nutrition):
        raise UsageError("validate needs --bundle, --manifest, --privacy or --nutrition")
    return _finish(args, report)


def cmd_metrics(args) -> int:
    records = read_eval_csv(_read(args.eval), args.eval)
    meta = UNSPECIFIED_META
    if args.meta:
        r = Reader(load_json(_read(args.meta), args.meta), "")
        check_version(r)
        meta = model_meta_from_obj({k: v for k, v in r.obj.items() if k != "schema_version"}, "")
    report = build_model_report(records, meta)
    if args.out:
        write_atomically(Path(args.out), {
            "model.json": model_report_json(report),
            "roc.csv": curve_csv(report.roc.points, ("fpr", "tpr")),
            "pr.csv": curve_csv(report.pr.points, ("recall", "precision")),
        })
    else:
        sys.stdout.write(model_report_json(report))
    return _finish(args, ValidationReport())


def cmd_footprint(args) -> int:
    if args.bundle:
        doc = load_bundle(_bundle_dir(args.bundle)).doc.get("footprint")
        if not isinstance(doc, dict) or not isinstance(doc.get("bom"), str):
            raise DatasheetError("bundle has no footprint section with a bom file", "footprint")
        config = {k: v for k, v in doc.items() if k != "bom"}
        bom_text = _read(str(Path(args.bundle) / doc["bom"]))
    elif args.bom and args.config:
        r = Reader(load_json(_read(args.config), args.config), "")
        check_version(r)
        config = {k: v for k, v in r.obj.items() if k != "schema_version"}
        bom_text = _read(args.bom)
    else:
        raise UsageError("footprint needs --bundle, or both --bom and --config")
    inputs = footprint_inputs_from_obj(config, "footprint")
    report = compute_footprint(read_bom_csv(bom_text, "footprint.bom"),
                               inputs.transport_kg, inputs.training_kg, inputs.usage)
    if args.out:
        write_atomically(Path(args.out), {
            "footprint.json": footprint_report_json(report),
            "footprint.csv": breakdown_csv(report),
        })
    else:
        sys.stdout.write(footprint_report_json(report))
    return _finish(args, ValidationReport())


def cmd_study(args) -> int:
    participants = read_participants_csv(_read(args.participants), args.participants)
    readings = read_readings_csv(_read(args.readings), args.readings)
    distances = DEFAULT_DISTANCES_M
    if args.distances:
        try:
            distances = tuple(float(x) for x in args.distances.split(","))
        except ValueError:
            raise UsageError(f"--distances must be comma-separated numbers, got {args.distances!r}") from None
    checked = check_study(participants, readings, distances)
    if not checked.valid:
        return _finish(args, checked)
    report = build_study_report(participants, readings, distances)
    if args.out:
        files = {f"study.{dim}.csv": strata_csv(report.stratification(dim)) for dim in DIMENSIONS}
        files["study.json"] = study_report_json(report)
        write_atomically(Path(args.out), files)
    else:
        sys.stdout.write(study_report_json(report))
    return _finish(args, checked)


def cmd_wire(args) -> int:
    if args.action == "encode":
        try:
            p = float(args.value)
        except ValueError:
            raise UsageError(f"not a number: {args.value!r}") from None
        print(encode_confidence(p).raw)
    else:
        try:
            raw = int(args.value, 0)
        except ValueError:
            raise UsageError(f"not an integer: {args.value!r}") from None
        print(repr(decode_confidence(ConfidenceByte(raw))))
    return EXIT_OK


def cmd_build(args) -> int:
    bundle = load_bundle(_bundle_dir(args.bundle))
    sheet, report = compile_bundle(bundle, _registry(args), strict=args.strict)
    if sheet is not None:
        write_atomically(Path(args.out), output_files(sheet, args.format))
    return _finish(args, report)


# -- argument parsing ------------------------------------------------------

def _common(p: argparse.ArgumentParser, registry: bool = False) -> None:
    p.add_argument("--report", metavar="FILE", help="write findings as JSON to FILE")
    p.add_argument("--strict", action="store_true", help="treat warnings as errors")
    if registry:
        p.add_argument("--registry", metavar="FILE", help="compliance registry JSON (default: built-in)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mlsds", description="Compile ML sensor datasheets.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="validate a bundle or standalone section documents")
    p.add_argument("--bundle", metavar="DIR")
    p.add_argument("--manifest", metavar="FILE")
    p.add_argument("--privacy", metavar="FILE")
    p.add_argument("--nutrition", metavar="FILE")
    _common(p, registry=True)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("metrics", help="ROC, PR, threshold and confusion matrix from score,label CSV")
    p.add_argument("--eval", required=True, metavar="FILE")
    p.add_argument("--meta", metavar="FILE", help="model metadata JSON")
    p.add_argument("--out", metavar="DIR")
    _common(p)
    p.set_defaults(func=cmd_metrics)

    p = sub.add_parser("footprint", help="carbon footprint report")
    p.add_argument("--bundle", metavar="DIR")
    p.add_argument("--bom", metavar="FILE")
    p.add_argument("--config", metavar="FILE", help="JSON with transport_kg, training_kg and usage")
    p.add_argument("--out", metavar="DIR")
    _common(p)
    p.set_defaults(func=cmd_footprint)

    p = sub.add_parser("study", help="stratified end-to-end study report")
    p.add_argument("--participants", required=True, metavar="FILE")
    p.add_argument("--readings", required=True, metavar="FILE")
    p.add_argument("--distances", metavar="LIST", help="comma-separated metres (default 1,3,5)")
    p.add_argument("--out", metavar="DIR")
    _common(p)
    p.set_defaults(func=cmd_study)

    p = sub.add_parser("wire", help="confidence byte codec")
    p.add_argument("action", choices=("encode", "decode"))
    p.add_argument("value")
    p.set_defaults(func=cmd_wire)

    p = sub.add_parser("build", help="build the full datasheet from a bundle")
    p.add_argument("--bundle", required=True, metavar="DIR")
    p.add_argument("--out", required=True, metavar="DIR")
    p.add_argument("--format", choices=("md", "html", "both"), default="both")
    _common(p, registry=True)
    p.set_defaults(func=cmd_build)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"mlsds: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DatasheetError as exc:
        report = ValidationReport(exc.findings())
        return _finish(args, report)
    except OSError as exc:
        print(f"mlsds: {exc}", file=sys.stderr)
        return EXIT_USAGE
