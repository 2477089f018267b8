"""Command-line front end.

    recfosm study run table1 --out t1.csv --format csv
    recfosm study curves --param E --lo 20 --hi 140 --points 61
    recfosm recip report --dist '{"family": "Weibull", "params": {"a": 3, "b": 5}}'
    recfosm recip report --csv data.csv
    recfosm ingest data.csv

Failures print a one-line JSON diagnostic on stderr and exit with 2
(validation), 3 (numeric failure) or 4 (I/O).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from pathlib import Path

import numpy as np

from . import study
from .beam import PARAMETERS, BeamParams
from .errors import InputFileError, RecfosmError


def _summary(result: study.StudyResult) -> str:
    lines = [f"study {result.name}", f"{'cov':>8}  {'method':<8} {'mean':>12} {'sd':>12}"]
    for r in result.rows:
        cov = "-" if r.cov is None else f"{r.cov:g}"
        extra = ""
        if "se_mean" in r.meta:
            extra = f"  (se {r.meta['se_mean']:.3g} / {r.meta['se_sd']:.3g})"
        lines.append(f"{cov:>8}  {r.method:<8} {r.mean:12.6g} {r.sd:12.6g}{extra}")
    return "\n".join(lines)


def _cmd_study_run(args) -> int:
    spec = study.load_spec(args.spec).with_overrides(
        seed=args.seed, mc_count=args.mc_count, out=args.out, fmt=args.format)
    result = study.run_study(spec)
    print(_summary(result))
    if args.series:
        study.write_text(Path(args.series), study.series_csv_text(result))
    return 0


def _cmd_study_curves(args) -> int:
    nominal = BeamParams.from_mapping(json.loads(args.nominal) if args.nominal else {})
    grid = np.linspace(args.lo, args.hi, args.points)
    rows = study.curve_series(nominal, args.param, grid)
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\n")
    w.writeheader()
    for row in rows:
        w.writerow({k: repr(float(v)) for k, v in row.items()})
    if args.out:
        study.write_text(Path(args.out), buf.getvalue())
    else:
        sys.stdout.write(buf.getvalue())
    return 0


def _cmd_recip_report(args) -> int:
    record = json.loads(args.dist) if args.dist else None
    report = study.reciprocal_report(record, args.csv, mc_count=args.mc_count, seed=args.seed)
    print(json.dumps(report, sort_keys=True, indent=2))
    return 0


def _cmd_ingest(args) -> int:
    inp = study.ingest_samples(args.path)
    print(json.dumps({
        "names": list(inp.names),
        "rows": inp.sample_count,
        "mean": inp.mean.tolist(),
        "covariance": inp.covariance.tolist(),
    }, sort_keys=True, indent=2))
    return 0


def _positive_int(text):
    value = int(text)
    if value < 2:
        raise argparse.ArgumentTypeError(f"must be >= 2, got {value}")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="recfosm", description=__doc__.split("\n")[0])
    verbs = parser.add_subparsers(dest="verb", required=True)

    study_p = verbs.add_parser("study", help="run declarative studies")
    study_sub = study_p.add_subparsers(dest="action", required=True)
    run = study_sub.add_parser("run", help="run a study spec (path or bundled name)")
    run.add_argument("spec", help=f"spec file, or one of {study.bundled_specs()}")
    run.add_argument("--seed", type=int)
    run.add_argument("--mc-count", type=_positive_int)
    run.add_argument("--out", help="output table path")
    run.add_argument("--format", choices=study.FORMATS)
    run.add_argument("--series", help="also write a wide CSV series (one row per CoV)")
    run.set_defaults(func=_cmd_study_run)

    curves = study_sub.add_parser("curves", help="deflection and its expansions along one parameter")
    curves.add_argument("--param", choices=PARAMETERS, default="E")
    curves.add_argument("--lo", type=float, default=20.0)
    curves.add_argument("--hi", type=float, default=140.0)
    curves.add_argument("--points", type=_positive_int, default=61)
    curves.add_argument("--nominal", help="JSON object overriding beam nominals")
    curves.add_argument("--out")
    curves.set_defaults(func=_cmd_study_curves)

    recip = verbs.add_parser("recip", help="reciprocal moments")
    recip_sub = recip.add_subparsers(dest="action", required=True)
    report = recip_sub.add_parser("report", help="mean and covariance of 1/X")
    src = report.add_mutually_exclusive_group(required=True)
    src.add_argument("--dist", help="distribution record as JSON")
    src.add_argument("--csv", help="CSV of realizations")
    report.add_argument("--mc-count", type=int, default=10**6,
                        help="sample size of the Monte Carlo cross-check (0 disables)")
    report.add_argument("--seed", type=int, default=0)
    report.set_defaults(func=_cmd_recip_report)

    ingest = verbs.add_parser("ingest", help="summarize a CSV of realizations")
    ingest.add_argument("path")
    ingest.set_defaults(func=_cmd_ingest)
    return parser


def _fail(kind: str, message: str, code: int, **extra) -> int:
    diag = {"error": kind, "message": message, "exit_code": code}
    diag.update({k: v for k, v in extra.items() if v is not None})
    print(json.dumps(diag, sort_keys=True, default=str), file=sys.stderr)
    return code


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except RecfosmError as exc:
        extra = {k: getattr(exc, k, None) for k in ("line", "row", "column", "order", "index")}
        return _fail(type(exc).__name__, str(exc), exc.exit_code, **extra)
    except json.JSONDecodeError as exc:
        return _fail("JSONDecodeError", str(exc), 2)
    except OSError as exc:
        return _fail(type(exc).__name__, str(exc), InputFileError.exit_code)


if __name__ == "__main__":
    sys.exit(main())
