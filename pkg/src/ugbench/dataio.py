"""LIBSVM-format parsing/serialization and synthetic problem generation."""

import io
from dataclasses import dataclass

import numpy as np


class LibsvmParseError(ValueError):
    """Malformed LIBSVM input; message names the offending line/column."""

    def __init__(self, message, line=None, column=None):
        loc = ""
        if line is not None:
            loc = f" (line {line}" + (f", column {column}" if column else "") + ")"
        super().__init__(message + loc)
        self.line = line
        self.column = column


@dataclass(frozen=True)
class Dataset:
    features: np.ndarray  # dense m x n
    labels: np.ndarray    # m reals
    source: str = ""

    @property
    def m(self):
        return self.features.shape[0]

    @property
    def n(self):
        return self.features.shape[1]


def parse_libsvm(stream, classification=False, source=""):
    """Parse LIBSVM text: `<label> <idx>:<val> ...` with 1-based indices.

    Indices must be strictly increasing within a row; n is the max index
    seen; missing entries are zero.  With classification=True, {0, 1}
    labels are remapped to {-1, +1}.
    """
    if isinstance(stream, str):
        stream = io.StringIO(stream)
    rows = []
    labels = []
    max_index = 0
    for lineno, raw in enumerate(stream, start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tokens = line.split()
        try:
            labels.append(float(tokens[0]))
        except ValueError:
            raise LibsvmParseError(
                f"non-numeric label {tokens[0]!r}", line=lineno, column=1
            ) from None
        row = {}
        prev_index = 0
        for col, tok in enumerate(tokens[1:], start=2):
            idx_str, sep, val_str = tok.partition(":")
            if not sep:
                raise LibsvmParseError(
                    f"expected <index>:<value>, got {tok!r}",
                    line=lineno, column=col,
                )
            try:
                idx = int(idx_str)
                val = float(val_str)
            except ValueError:
                raise LibsvmParseError(
                    f"non-numeric token {tok!r}", line=lineno, column=col
                ) from None
            if idx <= 0:
                raise LibsvmParseError(
                    f"index must be >= 1, got {idx}", line=lineno, column=col
                )
            if idx <= prev_index:
                raise LibsvmParseError(
                    f"indices must be strictly increasing, got {idx} after "
                    f"{prev_index}", line=lineno, column=col,
                )
            prev_index = idx
            row[idx] = val
            max_index = max(max_index, idx)
        rows.append(row)
    if not rows:
        raise LibsvmParseError("no records")
    features = np.zeros((len(rows), max_index))
    for i, row in enumerate(rows):
        for idx, val in row.items():
            features[i, idx - 1] = val
    labels = np.asarray(labels)
    if classification:
        unique = set(np.unique(labels))
        if unique <= {0.0, 1.0}:
            labels = 2.0 * labels - 1.0
    return Dataset(features=features, labels=labels, source=source)


def serialize_libsvm(dataset):
    """Write a Dataset back to LIBSVM text (zeros omitted)."""
    lines = []
    for i in range(dataset.m):
        parts = [repr(float(dataset.labels[i]))]
        row = dataset.features[i]
        for j in np.nonzero(row)[0]:
            parts.append(f"{j + 1}:{float(row[j])!r}")
        lines.append(" ".join(parts))
    return "\n".join(lines) + "\n"


def normalize_columns(dataset):
    """Per-column max-abs scaling (opt-in; off by default in the CLI)."""
    scale = np.max(np.abs(dataset.features), axis=0)
    scale[scale == 0.0] = 1.0
    return Dataset(
        features=dataset.features / scale,
        labels=dataset.labels,
        source=dataset.source + ":normalized",
    )


def synth_least_squares(m, n, seed):
    """Synthetic interpolation instance: b = A x* with x* on the unit sphere.

    A has i.i.d. Uniform[0, 1] entries; the ball-constrained least-squares
    problem then has F* = 0 at the feasible point x*.
    Returns (Dataset, x_star).
    """
    if m < 1 or n < 1:
        raise ValueError(f"m, n must be >= 1, got {m}, {n}")
    rng = np.random.Generator(np.random.Philox(seed))
    x_star = rng.standard_normal(n)
    x_star /= np.linalg.norm(x_star)
    A = rng.random((m, n))
    b = A @ x_star
    ds = Dataset(features=A, labels=b, source=f"synthetic:ls:{m}x{n}:{seed}")
    return ds, x_star


def synth_p_power(m, n, p, seed):
    """Same data recipe as synth_least_squares; p only tags the source."""
    if not 1.0 <= p <= 2.0:
        raise ValueError(f"p must lie in [1, 2], got {p}")
    ds, x_star = synth_least_squares(m, n, seed)
    return Dataset(
        features=ds.features, labels=ds.labels,
        source=f"synthetic:ppower(p={p}):{m}x{n}:{seed}",
    ), x_star
