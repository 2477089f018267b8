"""Declarative studies on the cantilever beam, CSV ingestion and reports.

A study spec is a JSON document::

    {
      "name": "table1",
      "model": {"nominal": {"F": 0.1, "L": 1000, "E": 70, "h": 30, "b": 30},
                "random": ["E"], "substitute": ["E"]},
      "inputs": {"E": {"family": "FisherF", "params": {"m": 25, "n": 100}, "scale": 70}},
      "methods": ["fosm", "sofm", "recfosm", "mc"],
      "mc_count": 100000,
      "cov_sweep": null,
      "seed": 0,
      "output": {"path": "table1.csv", "format": "csv"}
    }

Input records take one of three forms:

* a distribution record ``{"family", "params", "scale", "shift"}``;
* ``{"family", "mean", "cov"}``; ``mean`` defaults to the nominal value,
  ``cov`` to the current value of ``cov_sweep``;
* ``{"csv": path, "column": name}`` for measurement data.

Adding ``"realizations": N`` to a distribution-based record draws N
realizations (seeded) and runs every estimator on them as measurement data.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Any, Mapping

import numpy as np

from .beam import PARAMETERS, BeamParams, tip_deflection_model
from .distributions import Distribution, from_mean_cov
from .errors import (
    ConfigurationError,
    EstimatorUndefinedError,
    InputFileError,
    ParameterDomainError,
    ValidationError,
)
from .inputs import RandomInput
from .propagation import METHOD_KEYS, estimate, sample_standard_errors
from .reciprocal import empirical_reciprocal_moments, reciprocal_moments

DEFAULT_MC_COUNT = 10**5
FORMATS = ("json", "csv")


class CSVParseError(ValidationError):
    def __init__(self, message, line=None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


# ---------------------------------------------------------------------------
# spec


@dataclass(frozen=True)
class OutputSpec:
    path: str | None = None
    format: str = "json"


@dataclass(frozen=True)
class StudySpec:
    nominal: BeamParams
    random: tuple[str, ...]
    inputs: Mapping[str, Mapping[str, Any]]
    methods: tuple[str, ...]
    mc_count: int = DEFAULT_MC_COUNT
    cov_sweep: tuple[float, ...] | None = None
    seed: int = 0
    substitute: tuple[str, ...] | None = None
    output: OutputSpec = field(default_factory=OutputSpec)
    name: str = "study"
    base_dir: str = "."

    def __post_init__(self):
        if not self.methods:
            raise ConfigurationError("methods must not be empty")
        bad = [m for m in self.methods if m not in METHOD_KEYS]
        if bad:
            raise ConfigurationError(f"unknown methods {bad}; choose from {sorted(METHOD_KEYS)}")
        if len(set(self.methods)) != len(self.methods):
            raise ConfigurationError(f"duplicate methods {list(self.methods)}")
        if not self.random:
            raise ConfigurationError("model.random must list at least one parameter")
        unknown = [r for r in self.random if r not in PARAMETERS]
        if unknown:
            raise ConfigurationError(f"unknown random parameters {unknown}")
        missing = [r for r in self.random if r not in self.inputs]
        extra = [k for k in self.inputs if k not in self.random]
        if missing or extra:
            raise ConfigurationError(f"inputs must cover model.random exactly; missing {missing}, extra {extra}")
        if self.substitute is not None:
            stray = [s for s in self.substitute if s not in self.random]
            if stray or not self.substitute:
                raise ConfigurationError(f"substitute must be a nonempty subset of model.random, got {self.substitute}")
        if not (isinstance(self.mc_count, int) and self.mc_count >= 2):
            raise ConfigurationError(f"mc_count must be an integer >= 2, got {self.mc_count!r}")
        if not isinstance(self.seed, int) or isinstance(self.seed, bool) or self.seed < 0:
            raise ConfigurationError(f"seed must be a non-negative integer, got {self.seed!r}")
        if self.cov_sweep is not None:
            if not self.cov_sweep:
                raise ConfigurationError("cov_sweep must be null or a nonempty list")
            if not all(isinstance(c, (int, float)) and 0 < c < 1 for c in self.cov_sweep):
                raise ConfigurationError(f"cov_sweep values must lie in (0, 1), got {list(self.cov_sweep)}")
        if self.output.format not in FORMATS:
            raise ConfigurationError(f"output format must be one of {FORMATS}, got {self.output.format!r}")
        swept = [k for k, r in self.inputs.items() if _is_mean_cov(r) and "cov" not in r]
        if swept and self.cov_sweep is None:
            raise ConfigurationError(f"inputs {swept} take their cov from cov_sweep, which is missing")
        if self.cov_sweep is not None and not swept:
            raise ConfigurationError("cov_sweep given but no input takes its cov from it")

    @classmethod
    def from_dict(cls, data: Mapping, base_dir: str | Path = ".") -> "StudySpec":
        if not isinstance(data, Mapping):
            raise ConfigurationError("study spec must be a JSON object")
        known = {"name", "description", "model", "inputs", "methods", "mc_count",
                 "cov_sweep", "seed", "output"}
        extra = set(data) - known
        if extra:
            raise ConfigurationError(f"unknown study fields {sorted(extra)}")
        try:
            model = data["model"]
            nominal = BeamParams.from_mapping(model.get("nominal", {}))
            random = tuple(model["random"])
            substitute = model.get("substitute")
            inputs = dict(data["inputs"])
            methods = tuple(data["methods"])
        except (KeyError, TypeError, AttributeError) as exc:
            raise ConfigurationError(f"study spec is missing or mistypes a field: {exc}") from None
        sweep = data.get("cov_sweep")
        out = data.get("output") or {}
        if not isinstance(out, Mapping):
            raise ConfigurationError("output must be an object {path, format}")
        return cls(
            nominal=nominal,
            random=random,
            inputs=inputs,
            methods=methods,
            mc_count=data.get("mc_count", DEFAULT_MC_COUNT),
            cov_sweep=tuple(sweep) if sweep is not None else None,
            seed=data.get("seed", 0),
            substitute=tuple(substitute) if substitute is not None else None,
            output=OutputSpec(out.get("path"), out.get("format", "json")),
            name=str(data.get("name", "study")),
            base_dir=str(base_dir),
        )

    def with_overrides(self, *, seed=None, mc_count=None, out=None, fmt=None) -> "StudySpec":
        from dataclasses import replace
        output = OutputSpec(out if out is not None else self.output.path,
                            fmt if fmt is not None else self.output.format)
        return replace(self,
                       seed=self.seed if seed is None else seed,
                       mc_count=self.mc_count if mc_count is None else mc_count,
                       output=output)


def bundled_specs() -> list[str]:
    return sorted(p.name[:-5] for p in resources.files("recfosm.specs").iterdir()
                  if p.name.endswith(".json"))


def load_spec(ref: str | Path) -> StudySpec:
    """Load a spec from a path, or by bundled name (``table1``, ...)."""
    path = Path(ref)
    if path.is_file():
        text, base = _read_text(path), path.parent
    else:
        name = str(ref)[:-5] if str(ref).endswith(".json") else str(ref)
        if name not in bundled_specs():
            raise InputFileError(f"no spec file {ref!r} and no bundled spec of that name "
                                 f"(bundled: {bundled_specs()})")
        text, base = resources.files("recfosm.specs").joinpath(name + ".json").read_text(), Path(".")
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigurationError(f"invalid JSON in {ref}: {exc}") from None
    return StudySpec.from_dict(data, base)


def _read_text(path: Path) -> str:
    try:
        return path.read_text()
    except OSError as exc:
        raise InputFileError(f"cannot read {path}: {exc}") from None


# ---------------------------------------------------------------------------
# inputs


def _is_mean_cov(record) -> bool:
    return isinstance(record, Mapping) and "family" in record and "params" not in record


def distribution_from_record(record: Mapping, nominal_value: float, cov: float | None = None) -> Distribution:
    if not isinstance(record, Mapping) or "family" not in record:
        raise ConfigurationError(f"input record needs a 'family': {record!r}")
    if "params" in record:
        return Distribution.from_record(record)
    mean = record.get("mean", nominal_value)
    c = record.get("cov", cov)
    if c is None:
        raise ConfigurationError(f"input record {record!r} has no cov and no sweep value")
    try:
        return from_mean_cov(record["family"], float(mean), float(c))
    except (TypeError, ValueError) as exc:
        if isinstance(exc, ValidationError):
            raise
        raise ParameterDomainError(f"non-numeric mean/cov in {record!r}") from None


def build_input(spec: StudySpec, cov: float | None = None) -> RandomInput:
    records = [spec.inputs[name] for name in spec.random]
    from_csv = [isinstance(r, Mapping) and "csv" in r for r in records]
    if any(from_csv):
        if not all(from_csv):
            raise ConfigurationError("inputs must be either all CSV columns or all distributions")
        files = {r["csv"] for r in records}
        if len(files) != 1:
            raise ConfigurationError(f"CSV inputs must come from one file, got {sorted(files)}")
        path = Path(spec.base_dir) / files.pop()
        data = ingest_samples(path)
        cols = [r.get("column", name) for r, name in zip(records, spec.random)]
        missing = [c for c in cols if c not in data.names]
        if missing:
            raise ConfigurationError(f"columns {missing} not in {path} (header: {list(data.names)})")
        idx = [data.names.index(c) for c in cols]
        return RandomInput.from_samples(data.samples[:, idx], spec.random)
    nominal = spec.nominal.as_dict()
    marginals = [distribution_from_record(r, nominal[name], cov) for r, name in zip(records, spec.random)]
    inp = RandomInput.independent(marginals, spec.random)
    counts = {r.get("realizations") for r in records}
    if counts == {None}:
        return inp
    if len(counts) != 1:
        raise ConfigurationError(f"all inputs must use the same number of realizations, got {counts}")
    n = counts.pop()
    if not isinstance(n, int) or n < 2:
        raise ConfigurationError(f"realizations must be an integer >= 2, got {n!r}")
    return RandomInput.from_samples(inp.draw(n, spec.seed), spec.random)


# ---------------------------------------------------------------------------
# running


@dataclass(frozen=True)
class ResultRow:
    cov: float | None
    method: str
    mean: float
    sd: float
    meta: dict

    def to_dict(self) -> dict:
        return {"cov": self.cov, "method": self.method, "mean": self.mean, "sd": self.sd, "meta": self.meta}


@dataclass(frozen=True)
class StudyResult:
    name: str
    rows: tuple[ResultRow, ...]

    def get(self, method: str, cov: float | None = None) -> ResultRow:
        for r in self.rows:
            if r.method == method and (cov is None or r.cov == cov):
                return r
        raise KeyError((method, cov))


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    return obj


def run_study(spec: StudySpec, write: bool = True) -> StudyResult:
    """Run every method at every sweep point; deterministic given the seed.

    Each sweep point reuses the same seed, so the underlying uniform
    variates are shared across CoV values (common random numbers).
    """
    model = tip_deflection_model(spec.nominal, spec.random)
    rows = []
    for cov in (spec.cov_sweep or (None,)):
        inp = build_input(spec, cov)
        mc_count = spec.mc_count
        if inp.is_data_backed:
            mc_count = min(mc_count, inp.sample_count)
        for key in spec.methods:
            est = estimate(key, model, inp, mc_count=mc_count, seed=spec.seed,
                           substitute=spec.substitute)
            meta = dict(est.meta)
            if inp.is_data_backed and key != "mc":
                meta["sample_count"] = inp.sample_count
            rows.append(ResultRow(cov, key, est.mean, est.sd, _jsonable(meta)))
    result = StudyResult(spec.name, tuple(rows))
    if write and spec.output.path:
        path = Path(spec.output.path)
        if spec.output.format == "csv":
            write_table_csv(result, path)
        else:
            write_table_json(result, path)
    return result


# ---------------------------------------------------------------------------
# serialization

TABLE_COLUMNS = ("cov", "method", "mean", "sd", "meta")


def _fmt(x) -> str:
    return "" if x is None else repr(float(x))


def table_csv_text(result: StudyResult) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(TABLE_COLUMNS)
    for r in result.rows:
        w.writerow([_fmt(r.cov), r.method, _fmt(r.mean), _fmt(r.sd), json.dumps(r.meta, sort_keys=True)])
    return buf.getvalue()


def table_json_text(result: StudyResult) -> str:
    doc = {"study": result.name, "rows": [r.to_dict() for r in result.rows]}
    return json.dumps(doc, sort_keys=True, indent=2) + "\n"


def write_text(path: Path, text: str) -> None:
    try:
        path.write_text(text)
    except OSError as exc:
        raise InputFileError(f"cannot write {path}: {exc}") from None


def write_table_csv(result: StudyResult, path) -> None:
    write_text(Path(path), table_csv_text(result))


def write_table_json(result: StudyResult, path) -> None:
    write_text(Path(path), table_json_text(result))


def read_table_csv(path, name: str = "study") -> StudyResult:
    rows = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if tuple(header) != TABLE_COLUMNS:
            raise CSVParseError(f"unexpected header {header}", line=1)
        for cov, method, mean, sd, meta in reader:
            rows.append(ResultRow(float(cov) if cov else None, method, float(mean), float(sd), json.loads(meta)))
    return StudyResult(name, tuple(rows))


def series_csv_text(result: StudyResult) -> str:
    """Wide series for plotting: one row per CoV, mean/sd column per method."""
    methods = list(dict.fromkeys(r.method for r in result.rows))
    covs = list(dict.fromkeys(r.cov for r in result.rows))
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["cov"] + [f"{m}_{stat}" for m in methods for stat in ("mean", "sd")])
    for c in covs:
        line = [_fmt(c)]
        for m in methods:
            r = result.get(m, c)
            line += [_fmt(r.mean), _fmt(r.sd)]
        w.writerow(line)
    return buf.getvalue()


def curve_series(nominal: BeamParams, param: str, grid) -> list[dict]:
    """Deflection against one parameter with its three local approximations.

    Expansions are taken at the nominal value x0: first order in x, second
    order in x, and first order in z = 1/x.
    """
    model = tip_deflection_model(nominal, [param])
    x0 = np.array([getattr(nominal, param)])
    g0 = model.value(x0)
    d1 = model.gradient(x0)[0]
    d2 = model.hessian_diag(x0)[0]
    dz = -x0[0] ** 2 * d1
    out = []
    for x in grid:
        dx = x - x0[0]
        out.append({param: float(x),
                    "exact": model.value(np.array([x])),
                    "first_order": g0 + d1 * dx,
                    "second_order": g0 + d1 * dx + 0.5 * d2 * dx * dx,
                    "reciprocal_first_order": g0 + dz * (1.0 / x - 1.0 / x0[0])})
    return out


# ---------------------------------------------------------------------------
# CSV measurement data


def ingest_samples(csv_path) -> RandomInput:
    """Read realizations (one per row, header with parameter names)."""
    path = Path(csv_path)
    text = _read_text(path)
    reader = csv.reader(io.StringIO(text))
    try:
        header = next(reader)
    except StopIteration:
        raise CSVParseError("empty file; a header row is required", line=1) from None
    names = [h.strip() for h in header]
    if not names or any(not n for n in names):
        raise CSVParseError(f"header has empty column names: {header}", line=1)
    try:
        float(names[0])
    except ValueError:
        pass
    else:
        raise CSVParseError("header row required, found numeric first row", line=1)
    rows = []
    for lineno, row in enumerate(reader, start=2):
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != len(names):
            raise CSVParseError(f"expected {len(names)} fields, got {len(row)}", line=lineno)
        try:
            rows.append([float(c) for c in row])
        except ValueError:
            bad = next(c for c in row if not _is_float(c))
            raise CSVParseError(f"non-numeric cell {bad!r}", line=lineno) from None
    if len(rows) < 2:
        raise EstimatorUndefinedError(f"{path}: {len(rows)} data row(s); at least 2 are needed")
    data = np.array(rows)
    if not np.all(np.isfinite(data)):
        i, j = np.argwhere(~np.isfinite(data))[0]
        raise CSVParseError(f"non-finite value in column {names[j]!r}", line=int(i) + 2)
    return RandomInput.from_samples(data, names)


def _is_float(s) -> bool:
    try:
        float(s)
        return True
    except ValueError:
        return False


def write_samples_csv(path, names, samples) -> None:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(names)
    for row in np.atleast_2d(samples):
        w.writerow([repr(float(v)) for v in row])
    write_text(Path(path), buf.getvalue())


# ---------------------------------------------------------------------------
# reciprocal report


def reciprocal_report(dist_record: Mapping | None = None, csv_path=None,
                      mc_count: int = 10**6, seed: int = 0) -> dict:
    """Moments of 1/X from a distribution record or a measurement CSV.

    Distribution records go through the analytic pair when one applies and
    quadrature otherwise, and are cross-checked against ``mc_count`` sampled
    reciprocals (set ``mc_count=0`` to skip). CSV data use the empirical
    estimators. The chosen route is reported as ``source``.
    """
    if (dist_record is None) == (csv_path is None):
        raise ConfigurationError("give exactly one of a distribution record or a CSV path")
    if csv_path is not None:
        data = ingest_samples(csv_path)
        rm = empirical_reciprocal_moments(data.samples)
        out = rm.to_dict()
        out["names"] = list(data.names)
        return _jsonable(out)
    dist = Distribution.from_record(dist_record)
    rm = reciprocal_moments(dist)
    out = rm.to_dict()
    if mc_count:
        z = 1.0 / dist.sample(mc_count, seed)
        mean, sd, se_mean, se_sd = sample_standard_errors(z)
        var = sd * sd
        se_var = 2.0 * sd * se_sd
        out["diagnostics"] = dict(out["diagnostics"])
        out["diagnostics"]["validation"] = {
            "count": mc_count, "seed": seed,
            "mean_z": mean, "var_z": var, "se_mean": se_mean, "se_var": se_var,
            "mean_within_3se": abs(mean - rm.mean_z[0]) <= 3 * se_mean,
            "var_within_3se": abs(var - rm.cov_z[0, 0]) <= 3 * se_var,
        }
    return _jsonable(out)
