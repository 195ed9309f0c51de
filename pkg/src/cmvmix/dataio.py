"""File formats: three-way datasets (JSON / long CSV) and fitted models.

Serialization is canonical: fixed key order, row-major flattening, floats
written with Python's shortest round-trip repr (lossless), optionals
omitted when absent.  Equal in-memory values therefore produce
byte-identical files, and every read(write(x)) is exact.
"""

import csv
import json
import warnings
from dataclasses import asdict
from typing import Optional

import numpy as np

from .data import Dataset
from .distributions import CmvnParams, MvnParams
from .ecm import FitConfig, FitResult, Kind, MixtureModel, Responsibilities
from .errors import ParseError, SchemaError, ShapeError

SCHEMA_VERSION = 1

_DATASET_KEYS = {"schema_version", "n", "r", "p", "samples", "labels", "good_flags", "names"}


def _matrix_to_rows(a):
    return [[float(x) for x in row] for row in np.asarray(a)]


def _check_finite(a, what):
    if not np.all(np.isfinite(a)):
        raise ValueError(f"{what} contains non-finite values; refusing to write")


def _dump_canonical(doc, path):
    text = json.dumps(doc, indent=1)
    with open(path, "w") as fh:
        fh.write(text)
        fh.write("\n")


def _load_json(path):
    try:
        with open(path) as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: invalid JSON at line {exc.lineno}: {exc.msg}") from None


def _check_version(doc, path):
    version = doc.get("schema_version")
    if version != SCHEMA_VERSION:
        raise SchemaError(f"{path}: unsupported schema_version {version!r}")


def _warn_unknown(doc, known, path):
    extra = set(doc) - known
    if extra:
        warnings.warn(f"{path}: ignoring unknown fields {sorted(extra)}")


def _infer_format(path, fmt):
    if fmt is not None:
        return fmt
    return "csv-long" if str(path).endswith(".csv") else "json"


def write_dataset(data: Dataset, path, fmt: Optional[str] = None) -> None:
    """Write a dataset as canonical JSON or long CSV."""
    fmt = _infer_format(path, fmt)
    _check_finite(data.samples, "samples")
    if fmt == "json":
        doc = {
            "schema_version": SCHEMA_VERSION,
            "n": data.n,
            "r": data.r,
            "p": data.p,
            "samples": [[float(x) for x in s.reshape(-1)] for s in data.samples],
        }
        if data.true_labels is not None:
            doc["labels"] = [int(x) for x in data.true_labels]
        if data.good_flags is not None:
            doc["good_flags"] = [bool(x) for x in data.good_flags]
        if data.unit_names is not None:
            doc["names"] = list(data.unit_names)
        _dump_canonical(doc, path)
    elif fmt == "csv-long":
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            header = ["unit", "row", "col", "value"]
            with_label = data.true_labels is not None
            if with_label:
                header.append("label")
            writer.writerow(header)
            for i in range(data.n):
                for a in range(data.r):
                    for b in range(data.p):
                        row = [i + 1, a + 1, b + 1, repr(float(data.samples[i, a, b]))]
                        if with_label:
                            row.append(int(data.true_labels[i]))
                        writer.writerow(row)
    else:
        raise ValueError(f"unknown format {fmt!r}")


def read_dataset(path, fmt: Optional[str] = None) -> Dataset:
    """Read a dataset written by write_dataset (or hand-authored to the
    same schemas)."""
    fmt = _infer_format(path, fmt)
    if fmt == "json":
        return _read_dataset_json(path)
    if fmt == "csv-long":
        return _read_dataset_csv(path)
    raise ValueError(f"unknown format {fmt!r}")


def _read_dataset_json(path) -> Dataset:
    doc = _load_json(path)
    if not isinstance(doc, dict):
        raise ParseError(f"{path}: top level must be an object")
    _check_version(doc, path)
    _warn_unknown(doc, _DATASET_KEYS, path)
    try:
        n, r, p = int(doc["n"]), int(doc["r"]), int(doc["p"])
        flat = doc["samples"]
    except KeyError as exc:
        raise ParseError(f"{path}: missing field {exc}") from None
    if len(flat) != n:
        raise ShapeError(f"{path}: expected {n} samples, found {len(flat)}")
    samples = np.empty((n, r, p))
    for i, values in enumerate(flat):
        if len(values) != r * p:
            raise ShapeError(f"{path}: sample {i + 1} has {len(values)} values, expected {r * p}")
        samples[i] = np.asarray(values, dtype=float).reshape(r, p)
    if not np.all(np.isfinite(samples)):
        raise ParseError(f"{path}: samples contain non-finite values")
    return Dataset(
        samples=samples,
        true_labels=doc.get("labels"),
        good_flags=doc.get("good_flags"),
        unit_names=doc.get("names"),
    )


def _read_dataset_csv(path) -> Dataset:
    cells = {}
    labels = {}
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ParseError(f"{path}: empty file") from None
        if header[:4] != ["unit", "row", "col", "value"]:
            raise ParseError(f"{path}: line 1: expected header unit,row,col,value[,label]")
        with_label = len(header) > 4 and header[4] == "label"
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            try:
                unit, a, b = int(row[0]), int(row[1]), int(row[2])
                value = float(row[3])
            except (ValueError, IndexError):
                raise ParseError(f"{path}: line {lineno}: malformed record {row!r}") from None
            if not np.isfinite(value):
                raise ParseError(f"{path}: line {lineno}: non-finite value")
            key = (unit, a, b)
            if key in cells:
                raise ShapeError(f"{path}: duplicate cell (unit={unit}, row={a}, col={b})")
            cells[key] = value
            if with_label:
                try:
                    lab = int(row[4])
                except (ValueError, IndexError):
                    raise ParseError(f"{path}: line {lineno}: malformed label") from None
                if labels.setdefault(unit, lab) != lab:
                    raise ParseError(f"{path}: line {lineno}: inconsistent label for unit {unit}")
    if not cells:
        raise ShapeError(f"{path}: no data cells")
    n = max(k[0] for k in cells)
    r = max(k[1] for k in cells)
    p = max(k[2] for k in cells)
    samples = np.empty((n, r, p))
    for i in range(1, n + 1):
        for a in range(1, r + 1):
            for b in range(1, p + 1):
                if (i, a, b) not in cells:
                    raise ShapeError(f"{path}: missing cell (unit={i}, row={a}, col={b})")
                samples[i - 1, a - 1, b - 1] = cells[(i, a, b)]
    true_labels = None
    if labels:
        true_labels = [labels[i] for i in range(1, n + 1)]
    return Dataset(samples=samples, true_labels=true_labels)


_FIT_KEYS = {
    "schema_version", "kind", "g", "weights", "components", "loglik",
    "loglik_trace", "n_obs", "n_params", "seed", "config", "z", "v",
    "labels", "bad_flags", "converged", "iterations", "start_index",
    "warnings",
}


def write_fit(result: FitResult, path) -> None:
    """Persist a fit: parameters, posteriors, trace, config echo and seed."""
    from .selection import count_free_params  # local to avoid a cycle

    model = result.model
    comps = []
    for comp in model.components:
        base = comp.base if model.kind is Kind.CMVN else comp
        rec = {
            "m": _matrix_to_rows(base.m),
            "sigma": _matrix_to_rows(base.sigma),
            "psi": _matrix_to_rows(base.psi),
        }
        if model.kind is Kind.CMVN:
            rec["alpha"] = float(comp.alpha)
            rec["eta"] = float(comp.eta)
        comps.append(rec)
    n_obs = int(result.resp.z.shape[0])
    r, p = model.components[0].shape if model.kind is Kind.MVN else model.components[0].base.shape
    doc = {
        "schema_version": SCHEMA_VERSION,
        "kind": model.kind.value,
        "g": model.g,
        "weights": [float(w) for w in model.weights],
        "components": comps,
        "loglik": result.loglik,
        "loglik_trace": [float(x) for x in result.loglik_trace],
        "n_obs": n_obs,
        "n_params": count_free_params(model.kind, model.g, r, p),
        "seed": int(result.seed),
        "config": asdict(result.config),
        "z": [[float(x) for x in row] for row in result.resp.z],
        "labels": [int(x) for x in result.hard_labels],
        "converged": bool(result.converged),
        "iterations": int(result.iterations),
        "start_index": int(result.start_index),
        "warnings": list(result.warnings),
    }
    if result.resp.v is not None:
        doc["v"] = [[float(x) for x in row] for row in result.resp.v]
    if result.bad_flags is not None:
        doc["bad_flags"] = [bool(x) for x in result.bad_flags]
    _dump_canonical(doc, path)


def read_fit(path) -> FitResult:
    """Load a fit written by write_fit; the round trip is exact."""
    doc = _load_json(path)
    if not isinstance(doc, dict):
        raise ParseError(f"{path}: top level must be an object")
    _check_version(doc, path)
    _warn_unknown(doc, _FIT_KEYS, path)
    try:
        kind = Kind(doc["kind"])
        comps = []
        for rec in doc["components"]:
            base = MvnParams(
                np.asarray(rec["m"], dtype=float),
                np.asarray(rec["sigma"], dtype=float),
                np.asarray(rec["psi"], dtype=float),
            )
            if kind is Kind.CMVN:
                comps.append(CmvnParams(base, float(rec["alpha"]), float(rec["eta"])))
            else:
                comps.append(base)
        model = MixtureModel(kind=kind, weights=np.asarray(doc["weights"], dtype=float),
                             components=tuple(comps))
        resp = Responsibilities(
            z=np.asarray(doc["z"], dtype=float),
            v=np.asarray(doc["v"], dtype=float) if "v" in doc else None,
        )
        config = FitConfig(**doc["config"])
        return FitResult(
            model=model,
            resp=resp,
            loglik_trace=np.asarray(doc["loglik_trace"], dtype=float),
            converged=bool(doc["converged"]),
            iterations=int(doc["iterations"]),
            hard_labels=np.asarray(doc["labels"], dtype=int),
            bad_flags=np.asarray(doc["bad_flags"], dtype=bool) if "bad_flags" in doc else None,
            seed=int(doc["seed"]),
            config=config,
            start_index=int(doc["start_index"]),
            warnings=tuple(doc["warnings"]),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"{path}: malformed fit document: {exc}") from None


def write_sweep(sweep_result, path) -> None:
    """Persist a sweep table (kind, G, BIC per cell, winning row)."""
    entries = []
    for e in sweep_result.entries:
        rec = {"kind": e.kind.value, "g": e.g}
        if e.bic is not None:
            rec["bic"] = float(e.bic)
        if e.error is not None:
            rec["error"] = e.error
        entries.append(rec)
    doc = {"schema_version": SCHEMA_VERSION, "entries": entries, "best": sweep_result.best}
    _dump_canonical(doc, path)


REPORT_SCHEMA = {
    "type": "object",
    "required": ["schema_version", "clusters"],
    "properties": {
        "schema_version": {"const": 1},
        "clusters": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["cluster", "alpha", "eta", "bad_points"],
                "properties": {
                    "cluster": {"type": "integer", "minimum": 1},
                    "alpha": {"type": "number"},
                    "eta": {"type": "number"},
                    "bad_points": {
                        "type": "array",
                        "items": {
                            "type": "object",
                            "required": ["unit", "name", "v"],
                            "properties": {
                                "unit": {"type": "integer", "minimum": 1},
                                "name": {"type": "string"},
                                "v": {"type": "number"},
                            },
                        },
                    },
                },
            },
        },
    },
}
