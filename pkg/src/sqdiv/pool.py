"""Prediction pools: loading, validation, persistence, and correctness.

A pool bundles per-model class-probability dumps over one shared evaluation
set. On disk it is a JSON manifest pointing at one labels CSV and one
predictions CSV per model:

    manifest.json  {"classes": [...], "labels_path": "labels.csv",
                    "models": [{"id": 0, "name": "...", "predictions_path": "..."}, ...]}
    labels file    sample_id,true_label            (one row per sample)
    model file     sample_id,p_<class0>,...,p_<classC-1>

Samples are joined across files by sample_id, never by row position; the
labels file fixes the canonical sample order. Relative paths in the manifest
resolve against the manifest's directory.

Pools and correctness matrices are immutable after construction and safe to
share across threads.
"""

from __future__ import annotations

import csv
import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

# Row sums farther than this from 1 are rejected outright.
ROW_SUM_TOL = 1e-6
# Rows closer to 1 than this are left untouched by renormalization, so a
# write -> read round trip keeps the exact same probability bits.
_RENORM_SKIP = 1e-9


class PoolFormatError(ValueError):
    """A manifest, predictions file, or labels file is missing or invalid."""


@dataclass(frozen=True)
class ModelRecord:
    """One base model in the pool.

    model_id is positional: the loader assigns 0..M-1 in manifest order, so
    reordering the manifest permutes ids while names keep their predictions.
    """

    model_id: int
    name: str
    predictions_path: str


@dataclass(eq=False)
class PredictionPool:
    """Immutable M x N x C probability tensor plus labels and metadata.

    Parameters
    ----------
    models : tuple of ModelRecord, ids 0..M-1 in order
    classes : tuple of class names, length C >= 2
    sample_ids : tuple of sample identifiers, length N >= 1
    truth : int array (N,), class index per sample
    probs : float array (M, N, C); each row sums to 1 within ROW_SUM_TOL
    """

    models: tuple[ModelRecord, ...]
    classes: tuple[str, ...]
    sample_ids: tuple[str, ...]
    truth: np.ndarray
    probs: np.ndarray
    _fingerprint: str | None = field(default=None, repr=False, compare=False)
    _labels: np.ndarray | None = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        self.models = tuple(self.models)
        self.classes = tuple(str(c) for c in self.classes)
        self.sample_ids = tuple(str(s) for s in self.sample_ids)
        self.truth = np.asarray(self.truth, dtype=np.int64)
        self.probs = np.asarray(self.probs, dtype=np.float64)

        m, n, c = len(self.models), len(self.sample_ids), len(self.classes)
        if m < 2:
            raise PoolFormatError("a pool needs at least 2 models")
        if c < 2:
            raise PoolFormatError("a pool needs at least 2 classes")
        if n < 1:
            raise PoolFormatError("a pool needs at least 1 sample")
        if self.probs.shape != (m, n, c):
            raise PoolFormatError(
                f"probs shape {self.probs.shape} does not match "
                f"{m} models x {n} samples x {c} classes"
            )
        if self.truth.shape != (n,):
            raise PoolFormatError("truth length does not match sample count")
        if len(set(self.classes)) != c:
            raise PoolFormatError("duplicate class names")
        if len(set(self.sample_ids)) != n:
            raise PoolFormatError("duplicate sample ids")
        ids = [rec.model_id for rec in self.models]
        if ids != list(range(m)):
            raise PoolFormatError("model ids must be 0..M-1 in order")
        if self.truth.min() < 0 or self.truth.max() >= c:
            raise PoolFormatError("truth entry is not a valid class index")
        if not np.isfinite(self.probs).all() or (self.probs < 0).any():
            raise PoolFormatError("probabilities must be finite and non-negative")

        sums = self.probs.sum(axis=2)
        if (np.abs(sums - 1.0) > ROW_SUM_TOL).any():
            bad = np.argwhere(np.abs(sums - 1.0) > ROW_SUM_TOL)[0]
            raise PoolFormatError(
                "probability normalization: row sums to "
                f"{sums[bad[0], bad[1]]:.8f} for model {bad[0]}, sample index {bad[1]}"
            )
        drift = np.abs(sums - 1.0) > _RENORM_SKIP
        if drift.any():
            probs = self.probs.copy()
            probs[drift] /= sums[drift][:, None]
            self.probs = probs

        self.truth.setflags(write=False)
        self.probs.setflags(write=False)

    @property
    def n_models(self):
        return len(self.models)

    @property
    def n_samples(self):
        return len(self.sample_ids)

    @property
    def n_classes(self):
        return len(self.classes)

    def class_index(self, name):
        try:
            return self.classes.index(name)
        except ValueError:
            raise PoolFormatError(f"unknown class label: {name!r}") from None

    def sample_index(self, sample_id):
        try:
            return self.sample_ids.index(sample_id)
        except ValueError:
            raise KeyError(f"unknown sample_id: {sample_id!r}") from None

    def predicted_labels(self):
        """Argmax class index per (model, sample); ties go to the lowest index."""
        if self._labels is None:
            labels = np.argmax(self.probs, axis=2)
            labels.setflags(write=False)
            self._labels = labels
        return self._labels

    def fingerprint(self):
        """Content hash over classes, sample ids, truth, model names, and probs."""
        if self._fingerprint is None:
            meta = {
                "classes": list(self.classes),
                "samples": list(self.sample_ids),
                "truth": self.truth.tolist(),
                "models": [rec.name for rec in self.models],
            }
            digest = hashlib.sha256()
            digest.update(json.dumps(meta, sort_keys=True).encode("utf-8"))
            digest.update(np.ascontiguousarray(self.probs).tobytes())
            self._fingerprint = digest.hexdigest()
        return self._fingerprint


@dataclass(eq=False)
class CorrectnessMatrix:
    """Boolean (M, N) matrix: bits[i, j] iff model i predicts sample j right."""

    bits: np.ndarray
    derived_from: str

    def __post_init__(self):
        self.bits = np.asarray(self.bits, dtype=bool)
        self.bits.setflags(write=False)

    @property
    def n_models(self):
        return self.bits.shape[0]

    @property
    def n_samples(self):
        return self.bits.shape[1]


def correctness(pool):
    """Derive the correctness matrix; pure and deterministic for a given pool."""
    bits = pool.predicted_labels() == pool.truth[None, :]
    return CorrectnessMatrix(bits=bits, derived_from=pool.fingerprint())


def model_accuracy(cm, model_id):
    """Fraction of samples the model gets right."""
    if not 0 <= int(model_id) < cm.n_models:
        raise ValueError(f"model_id {model_id} out of range (pool has {cm.n_models})")
    return float(cm.bits[int(model_id)].mean())


def _read_csv(path, context):
    path = Path(path)
    if not path.is_file():
        raise PoolFormatError(f"{context} file not found: {path}")
    with path.open(newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise PoolFormatError(f"{context} file is empty: {path}")
    return rows[0], rows[1:]


def _read_labels(path, class_to_index):
    header, rows = _read_csv(path, "labels")
    if [h.strip() for h in header] != ["sample_id", "true_label"]:
        raise PoolFormatError(f"labels header must be sample_id,true_label: {path}")
    sample_ids, truth = [], []
    seen = set()
    for row in rows:
        if len(row) != 2:
            raise PoolFormatError(f"malformed row in labels file {path}: {row!r}")
        sid, label = row[0], row[1]
        if sid in seen:
            raise PoolFormatError(f"duplicate sample_id {sid!r} in labels file")
        seen.add(sid)
        if label not in class_to_index:
            raise PoolFormatError(f"unknown class label {label!r} for sample {sid!r}")
        sample_ids.append(sid)
        truth.append(class_to_index[label])
    if not sample_ids:
        raise PoolFormatError(f"labels file has no rows: {path}")
    return sample_ids, np.asarray(truth, dtype=np.int64)


def _read_predictions(path, classes, model_name):
    header, rows = _read_csv(path, "predictions")
    expected = ["sample_id"] + [f"p_{c}" for c in classes]
    if [h.strip() for h in header] != expected:
        raise PoolFormatError(
            f"predictions header for model {model_name!r} must be "
            f"{','.join(expected)}: {path}"
        )
    vectors = {}
    for row in rows:
        if len(row) != len(expected):
            raise PoolFormatError(
                f"malformed row for model {model_name!r} in {path}: {row!r}"
            )
        sid = row[0]
        if sid in vectors:
            raise PoolFormatError(
                f"duplicate sample_id {sid!r} for model {model_name!r}"
            )
        try:
            vec = np.array([float(v) for v in row[1:]], dtype=np.float64)
        except ValueError:
            raise PoolFormatError(
                f"malformed row for model {model_name!r} in {path}: {row!r}"
            ) from None
        if (vec < 0).any() or not np.isfinite(vec).all():
            raise PoolFormatError(
                f"probability out of range for model {model_name!r}, sample {sid!r}"
            )
        total = float(vec.sum())
        if abs(total - 1.0) > ROW_SUM_TOL:
            raise PoolFormatError(
                f"probability normalization: row for model {model_name!r}, "
                f"sample {sid!r} sums to {total:.8f}"
            )
        vectors[sid] = vec
    return vectors


def load_pool(manifest_path):
    """Load, join, and validate a pool from its manifest.

    Samples are matched across model files by sample_id; the labels file
    order becomes the pool's sample order. Any coverage gap between a model
    file and the labels file is a hard error.
    """
    manifest_path = Path(manifest_path)
    if not manifest_path.is_file():
        raise PoolFormatError(f"manifest not found: {manifest_path}")
    try:
        manifest = json.loads(manifest_path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise PoolFormatError(f"manifest is not valid JSON: {exc}") from None
    for key in ("classes", "labels_path", "models"):
        if key not in manifest:
            raise PoolFormatError(f"manifest missing key {key!r}")

    classes = [str(c) for c in manifest["classes"]]
    if len(classes) < 2 or len(set(classes)) != len(classes):
        raise PoolFormatError("manifest must list at least 2 distinct classes")
    entries = manifest["models"]
    if not isinstance(entries, list) or len(entries) < 2:
        raise PoolFormatError("manifest must reference at least 2 model files")
    declared = [e.get("id") for e in entries]
    if len(set(declared)) != len(declared):
        raise PoolFormatError("duplicate model ids in manifest")

    base = manifest_path.parent
    class_to_index = {c: i for i, c in enumerate(classes)}
    sample_ids, truth = _read_labels(base / manifest["labels_path"], class_to_index)
    want = set(sample_ids)

    models = []
    probs = np.empty((len(entries), len(sample_ids), len(classes)), dtype=np.float64)
    for position, entry in enumerate(entries):
        name = str(entry.get("name", f"model-{position}"))
        rel = entry.get("predictions_path")
        if not rel:
            raise PoolFormatError(f"model {name!r} has no predictions_path")
        vectors = _read_predictions(base / rel, classes, name)
        if set(vectors) != want:
            missing = sorted(want - set(vectors))[:3]
            extra = sorted(set(vectors) - want)[:3]
            raise PoolFormatError(
                f"sample coverage mismatch for model {name!r}"
                + (f"; missing {missing}" if missing else "")
                + (f"; unexpected {extra}" if extra else "")
            )
        for j, sid in enumerate(sample_ids):
            probs[position, j] = vectors[sid]
        models.append(ModelRecord(model_id=position, name=name, predictions_path=str(rel)))

    return PredictionPool(
        models=tuple(models),
        classes=tuple(classes),
        sample_ids=tuple(sample_ids),
        truth=truth,
        probs=probs,
    )


def write_pool(pool, out_dir):
    """Write the pool in manifest/CSV form; returns the manifest path.

    Floats are written with full round-trip precision so a reload reproduces
    the same fingerprint.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)

    with (out / "labels.csv").open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["sample_id", "true_label"])
        for sid, t in zip(pool.sample_ids, pool.truth):
            writer.writerow([sid, pool.classes[int(t)]])

    header = ["sample_id"] + [f"p_{c}" for c in pool.classes]
    entries = []
    for rec in pool.models:
        fname = f"model_{rec.model_id:02d}.csv"
        with (out / fname).open("w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(header)
            for j, sid in enumerate(pool.sample_ids):
                row = [sid] + [repr(float(v)) for v in pool.probs[rec.model_id, j]]
                writer.writerow(row)
        entries.append(
            {"id": rec.model_id, "name": rec.name, "predictions_path": fname}
        )

    manifest = {
        "classes": list(pool.classes),
        "labels_path": "labels.csv",
        "models": entries,
    }
    manifest_path = out / "manifest.json"
    manifest_path.write_text(
        json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
    return manifest_path
