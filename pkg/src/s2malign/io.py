"""File formats for models, series, templates, alignments and reports."""

from __future__ import annotations

import csv
import hashlib
import json
from pathlib import Path

import numpy as np

from .cca import LatentMap
from .core import AlignedModel, Alignment, Marker, Model, as_series
from .synthesis import Template


def _fmt(v: float) -> str:
    return repr(float(v))


def dumps(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def write_json(path, obj) -> None:
    Path(path).write_text(dumps(obj))


def read_json(path):
    with open(path) as fh:
        try:
            return json.load(fh)
        except json.JSONDecodeError as exc:
            raise ValueError(f"{path}: invalid JSON ({exc})") from exc


def config_hash(obj) -> str:
    blob = json.dumps(obj, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()


# models


def model_to_json(model: Model) -> dict:
    return {
        "samples_per_unit": model.samples_per_unit,
        "markers": [{"start": m.start, "end": m.end, "class": m.class_id} for m in model.markers],
    }


def model_from_json(obj) -> Model:
    try:
        markers = tuple(
            Marker(float(m["start"]), float(m["end"]), int(m.get("class", 0))) for m in obj["markers"]
        )
        return Model(markers, float(obj["samples_per_unit"]))
    except (KeyError, TypeError) as exc:
        raise ValueError(f"malformed model: {exc!r}") from exc


def load_model(path) -> Model:
    return model_from_json(read_json(path))


def save_model(path, model: Model) -> None:
    write_json(path, model_to_json(model))


def aligned_to_json(aligned: AlignedModel) -> dict:
    return {
        "markers": [{"start": s, "end": e, "class": c} for s, e, c in aligned.markers_in_samples]
    }


def aligned_from_json(obj) -> AlignedModel:
    try:
        return AlignedModel(
            tuple((int(m["start"]), int(m["end"]), int(m.get("class", 0))) for m in obj["markers"])
        )
    except (KeyError, TypeError) as exc:
        raise ValueError(f"malformed aligned model: {exc!r}") from exc


def load_aligned(path) -> AlignedModel:
    return aligned_from_json(read_json(path))


# series


def load_series(path) -> np.ndarray:
    """CSV with one value per line (no header), or a JSON array of numbers."""
    path = Path(path)
    text = path.read_text()
    if path.suffix.lower() == ".json" or text.lstrip().startswith("["):
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ValueError(f"{path}: invalid JSON ({exc})") from exc
        if isinstance(data, dict):
            data = data.get("values")
        return as_series(data, str(path))
    values = []
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.strip()
        if not line:
            continue
        try:
            values.append(float(line))
        except ValueError as exc:
            raise ValueError(f"{path}:{lineno}: not a number: {line!r}") from exc
    return as_series(values, str(path))


def save_series(path, values) -> None:
    Path(path).write_text("".join(_fmt(v) + "\n" for v in np.asarray(values, dtype=float)))


def load_template(path) -> Template:
    path = Path(path)
    if path.suffix.lower() == ".json":
        obj = read_json(path)
        if isinstance(obj, dict):
            return Template(as_series(obj["values"], str(path)), int(obj.get("class", 0)))
        return Template(as_series(obj, str(path)))
    return Template(load_series(path))


def template_to_json(template: Template) -> dict:
    return {"values": [float(v) for v in template.values], "class": template.class_id}


def save_template(path, template: Template) -> None:
    path = Path(path)
    if path.suffix.lower() == ".json":
        write_json(path, template_to_json(template))
    else:
        save_series(path, template.values)


# learned maps and alignments


def save_latent(path, latent: LatentMap, extra: dict | None = None) -> None:
    obj = latent.to_json()
    if extra:
        obj.update(extra)
    write_json(path, obj)


def load_latent(path) -> tuple[LatentMap, dict]:
    obj = read_json(path)
    try:
        return LatentMap.from_json(obj), obj
    except (KeyError, TypeError) as exc:
        raise ValueError(f"malformed latent map: {exc!r}") from exc


def save_alignment(path, alignment: Alignment) -> None:
    write_json(path, alignment.to_json())


# reports

SWEEP_COLUMNS = ("noise_rate", "method", "series_id", "error_samples")


def write_sweep_csv(path, rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(SWEEP_COLUMNS)
        for rate, method, sid, err in rows:
            w.writerow([_fmt(rate), method, int(sid), _fmt(err)])


def read_sweep_csv(path) -> list[tuple[float, str, int, float]]:
    with open(path, newline="") as fh:
        r = csv.DictReader(fh)
        return [
            (float(row["noise_rate"]), row["method"], int(row["series_id"]), float(row["error_samples"]))
            for row in r
        ]
