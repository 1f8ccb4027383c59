"""Text formats for prototypes, models and metrics.

All floats are written with 17 significant digits so a write/read round
trip reproduces every double exactly.
"""

import numpy as np

from .errors import HeaderMismatchError, LoadError, NormError, ParseError
from .network import MlpParams

MODEL_MAGIC = "hpn-model v1"
METRICS_HEADER = "epoch,split,metric,value"


def _fmt(x):
    return format(float(x), ".17g")


def _floats(line, lineno):
    try:
        vals = [float(c) for c in line.split()]
    except ValueError:
        raise ParseError("cannot parse row as numbers", lineno) from None
    if not all(np.isfinite(vals)):
        raise ParseError("non-finite value", lineno)
    return vals


def write_prototypes(path, P, names=None):
    P = np.asarray(P, dtype=np.float64)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"# hyperspherical prototypes K={P.shape[0]} D={P.shape[1]}\n")
        if names:
            fh.write("# names: " + ",".join(names) + "\n")
        for row in P:
            fh.write(" ".join(_fmt(v) for v in row) + "\n")


def read_prototypes(path, tol=1e-6):
    """Return ``(P, names)``; ``names`` is ``None`` unless a names comment is present."""
    names = None
    rows = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            s = line.strip()
            if not s:
                continue
            if s.startswith("#"):
                body = s[1:].strip()
                if body.startswith("names:"):
                    names = [n.strip() for n in body[len("names:"):].split(",")]
                continue
            vals = _floats(s, lineno)
            if rows and len(vals) != len(rows[0]):
                raise HeaderMismatchError(f"row has {len(vals)} values, expected {len(rows[0])}", lineno)
            rows.append(vals)
    if not rows:
        raise LoadError("prototype file has no rows")
    P = np.array(rows, dtype=np.float64)
    norms = np.linalg.norm(P, axis=1)
    bad = np.flatnonzero(np.abs(norms - 1.0) > tol)
    if bad.size:
        i = int(bad[0])
        raise NormError(f"prototype row {i} is not unit norm (norm {norms[i]:.6g})")
    if names is not None and len(names) != P.shape[0]:
        raise HeaderMismatchError(f"{len(names)} names for {P.shape[0]} prototypes")
    return P, names


def write_model(path, params):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(MODEL_MAGIC + "\n")
        fh.write(" ".join(str(w) for w in params.widths) + "\n")
        for W, b in params.layers:
            for row in W:
                fh.write(" ".join(_fmt(v) for v in row) + "\n")
            fh.write(" ".join(_fmt(v) for v in b) + "\n")


def read_model(path):
    with open(path, encoding="utf-8") as fh:
        lines = fh.read().split("\n")
    while lines and not lines[-1]:
        lines.pop()
    if not lines or lines[0].strip() != MODEL_MAGIC:
        raise LoadError(f"not a model file (expected {MODEL_MAGIC!r})", 1)
    if len(lines) < 2:
        raise LoadError("missing layer widths", 2)
    try:
        widths = [int(w) for w in lines[1].split()]
    except ValueError:
        raise ParseError("layer widths must be integers", 2) from None
    if len(widths) < 2 or any(w < 1 for w in widths):
        raise LoadError("need at least two positive layer widths", 2)
    pos = 2
    layers = []
    for fan_in, fan_out in zip(widths, widths[1:]):
        W = []
        for _ in range(fan_out + 1):
            if pos >= len(lines):
                raise HeaderMismatchError("file ends before all layers are read", pos + 1)
            W.append(_floats(lines[pos], pos + 1))
            pos += 1
        b = W.pop()
        for k, row in enumerate(W):
            if len(row) != fan_in:
                raise HeaderMismatchError(f"weight row has {len(row)} values, expected {fan_in}",
                                          pos - fan_out + k)
        if len(b) != fan_out:
            raise HeaderMismatchError(f"bias has {len(b)} values, expected {fan_out}", pos)
        layers.append((np.array(W, dtype=np.float64).reshape(fan_out, fan_in), np.array(b)))
    if pos != len(lines):
        raise HeaderMismatchError("trailing lines after the last layer", pos + 1)
    return MlpParams(layers)


def write_metrics(path, log):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(METRICS_HEADER + "\n")
        for epoch, split, metric, value in log.rows:
            fh.write(f"{epoch},{split},{metric},{_fmt(value)}\n")
