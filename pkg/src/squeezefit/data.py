"""Labeled point sets: container, file loaders, downsampling, splits."""

from __future__ import annotations

import csv
import gzip
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import FormatError, InvalidInput, StratifyError
from .validation import check_points_labels

IDX_IMAGE_MAGIC = 0x00000803
IDX_LABEL_MAGIC = 0x00000801


@dataclass(frozen=True)
class LabeledDataset:
    """Points in R^d with an integer class label per point."""

    points: np.ndarray
    labels: np.ndarray

    def __post_init__(self):
        pts, lab = check_points_labels(self.points, self.labels)
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "labels", lab)

    @property
    def n(self) -> int:
        return self.points.shape[0]

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    @property
    def classes(self) -> np.ndarray:
        return np.unique(self.labels)

    def class_indices(self, label: int) -> np.ndarray:
        return np.flatnonzero(self.labels == label)

    def subset(self, indices) -> "LabeledDataset":
        idx = np.asarray(indices, dtype=np.int64)
        return LabeledDataset(self.points[idx], self.labels[idx])

    def transformed(self, matrix) -> "LabeledDataset":
        """Apply a linear map to every point (labels unchanged)."""
        m = np.asarray(matrix, dtype=np.float64)
        return LabeledDataset(self.points @ m.T, self.labels)


def load_csv(path, label_column: int = 0, skip_header: bool = False) -> LabeledDataset:
    """Read a labeled dataset from a UTF-8 CSV file, one point per row.

    ``label_column`` selects the integer class column (default: first); every
    other column is a float feature. Malformed rows raise :class:`FormatError`
    with the offending line number.
    """
    path = Path(path)
    points: list[list[float]] = []
    labels: list[int] = []
    width = None
    try:
        handle = path.open("r", encoding="utf-8", newline="")
    except OSError as exc:
        raise FormatError(f"cannot open {path}: {exc}") from exc
    with handle:
        reader = csv.reader(handle)
        for line_no, row in enumerate(reader, start=1):
            if skip_header and line_no == 1:
                continue
            if not row or all(not cell.strip() for cell in row):
                continue
            if width is None:
                width = len(row)
                if not 0 <= label_column < width:
                    raise FormatError(
                        f"{path}: label column {label_column} out of range "
                        f"for {width}-column rows"
                    )
            if len(row) != width:
                raise FormatError(
                    f"{path}: line {line_no} has {len(row)} fields, expected {width}"
                )
            try:
                label = int(float(row[label_column]))
                if float(row[label_column]) != label:
                    raise ValueError("non-integer label")
                feats = [
                    float(cell)
                    for i, cell in enumerate(row)
                    if i != label_column
                ]
            except ValueError as exc:
                raise FormatError(f"{path}: line {line_no}: {exc}") from exc
            labels.append(label)
            points.append(feats)
    if not points:
        raise FormatError(f"{path}: no data rows")
    return LabeledDataset(np.asarray(points, dtype=np.float64), np.asarray(labels))


def save_csv(ds: LabeledDataset, path) -> Path:
    """Write a dataset as CSV, label first then features, one point per row.

    Floats are written with ``repr`` so :func:`load_csv` round-trips the
    points bit-exactly.
    """
    path = Path(path)
    with path.open("w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle)
        for label, row in zip(ds.labels.tolist(), ds.points.tolist()):
            writer.writerow([int(label)] + [repr(float(v)) for v in row])
    return path


def _open_maybe_gz(path: Path):
    if path.suffix == ".gz":
        return gzip.open(path, "rb")
    return path.open("rb")


def _read_exact(handle, count: int, path: Path, what: str) -> bytes:
    blob = handle.read(count)
    if len(blob) != count:
        raise FormatError(f"{path}: truncated while reading {what}")
    return blob


def load_idx(images_path, labels_path, keep_labels=None) -> LabeledDataset:
    """Read an IDX image/label file pair (big-endian, ubyte pixels).

    Pixels are scaled to [0, 1] and flattened row-major. ``keep_labels``
    optionally restricts to a subset of classes, e.g. ``{4, 9}``.
    """
    images_path, labels_path = Path(images_path), Path(labels_path)
    with _open_maybe_gz(images_path) as handle:
        magic, count, rows, cols = struct.unpack(
            ">iiii", _read_exact(handle, 16, images_path, "image header")
        )
        if magic != IDX_IMAGE_MAGIC:
            raise FormatError(
                f"{images_path}: bad image magic {magic:#010x}, "
                f"expected {IDX_IMAGE_MAGIC:#010x}"
            )
        raw = _read_exact(handle, count * rows * cols, images_path, "pixel data")
        images = np.frombuffer(raw, dtype=np.uint8).reshape(count, rows * cols)
    with _open_maybe_gz(labels_path) as handle:
        magic, label_count = struct.unpack(
            ">ii", _read_exact(handle, 8, labels_path, "label header")
        )
        if magic != IDX_LABEL_MAGIC:
            raise FormatError(
                f"{labels_path}: bad label magic {magic:#010x}, "
                f"expected {IDX_LABEL_MAGIC:#010x}"
            )
        labels = np.frombuffer(
            _read_exact(handle, label_count, labels_path, "label data"),
            dtype=np.uint8,
        )
    if count != label_count:
        raise FormatError(
            f"image/label count mismatch: {count} images vs {label_count} labels"
        )
    points = images.astype(np.float64) / 255.0
    labels = labels.astype(np.int64)
    if keep_labels is not None:
        keep = np.isin(labels, sorted(int(v) for v in keep_labels))
        points, labels = points[keep], labels[keep]
    return LabeledDataset(points, labels)


def _interval_weights(size_in: int, size_out: int) -> np.ndarray:
    """Row-stochastic overlap matrix for area-weighted 1-d downsampling."""
    if size_out > size_in:
        raise InvalidInput(f"cannot upsample: {size_in} -> {size_out}")
    ratio = size_in / size_out
    weights = np.zeros((size_out, size_in))
    for out in range(size_out):
        lo, hi = out * ratio, (out + 1) * ratio
        first, last = int(np.floor(lo)), int(np.ceil(hi))
        for cell in range(first, min(last, size_in)):
            overlap = min(hi, cell + 1) - max(lo, cell)
            if overlap > 0:
                weights[out, cell] = overlap / ratio
    return weights


def downsample_images(ds: LabeledDataset, side_in: int, side_out: int) -> LabeledDataset:
    """Block-average square images (flattened rows) to a coarser grid.

    Uses exact area weighting, so non-integer ratios (e.g. 28 -> 10) are fine
    and constant images stay constant.
    """
    side_in, side_out = int(side_in), int(side_out)
    if ds.dim != side_in * side_in:
        raise InvalidInput(
            f"points have dimension {ds.dim}, expected {side_in}^2 = {side_in ** 2}"
        )
    weights = _interval_weights(side_in, side_out)
    imgs = ds.points.reshape(ds.n, side_in, side_in)
    coarse = np.einsum("oi,nij,pj->nop", weights, imgs, weights)
    return LabeledDataset(coarse.reshape(ds.n, side_out * side_out), ds.labels)


def downsample_columns(ds: LabeledDataset, width_out: int) -> LabeledDataset:
    """Block-average each feature vector down to ``width_out`` entries.

    The 1-d analogue of :func:`downsample_images`, used for spectral bands.
    """
    weights = _interval_weights(ds.dim, int(width_out))
    return LabeledDataset(ds.points @ weights.T, ds.labels)


def split_train_test(
    ds: LabeledDataset, fraction: float, seed: int
) -> tuple[LabeledDataset, LabeledDataset]:
    """Stratified split: ``round(fraction * n_c)`` training points per class."""
    if not 0.0 < fraction < 1.0:
        raise InvalidInput(f"fraction must be in (0, 1), got {fraction!r}")
    rng = np.random.default_rng(seed)
    train_idx: list[np.ndarray] = []
    test_idx: list[np.ndarray] = []
    for label in ds.classes:
        members = ds.class_indices(label)
        if members.size < 2:
            raise StratifyError(
                f"class {label} has {members.size} point(s); need at least 2"
            )
        order = rng.permutation(members)
        cut = int(np.floor(fraction * members.size + 0.5))
        train_idx.append(order[:cut])
        test_idx.append(order[cut:])
    train = np.sort(np.concatenate(train_idx))
    test = np.sort(np.concatenate(test_idx))
    return ds.subset(train), ds.subset(test)
