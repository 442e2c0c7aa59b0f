"""Dataset ingestion, chain CSV round-tripping, and trace-plot SVGs."""

from __future__ import annotations

import csv
import math
from importlib import resources
from pathlib import Path
from xml.sax.saxutils import escape

import numpy as np

from .errors import DataError
from .target import Dataset

__all__ = [
    "bundled_data_path",
    "load_dataset",
    "write_chain_csv",
    "read_chain_csv",
    "write_trace_svg",
    "format_float",
]

CHAIN_COLUMNS = ("iteration", "beta0", "beta1", "log_post", "accepted")


def bundled_data_path() -> Path:
    return Path(str(resources.files("metropolis_epi") / "data" / "leukemia.csv"))


def _binary(text, name, row):
    text = text.strip()
    if text not in ("0", "1"):
        raise DataError(f"{name} must be 0 or 1, got {text!r}", row=row)
    return int(text)


def load_dataset(path) -> Dataset:
    """Read a ``y,x`` (one row per subject) or ``y,x,count`` CSV file."""
    path = Path(path)
    try:
        fh = path.open(newline="")
    except OSError as exc:
        raise DataError(f"cannot open {path}: {exc.strerror}") from None
    with fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise DataError(f"{path} is empty; expected a 'y,x' or 'y,x,count' header", row=1)
        header = [h.strip().lower() for h in header]
        if header not in (["y", "x"], ["y", "x", "count"]):
            raise DataError(f"header must be 'y,x' or 'y,x,count', got {','.join(header)!r}", row=1)
        weighted = len(header) == 3
        rows = []
        for lineno, record in enumerate(reader, start=2):
            if not record or all(not f.strip() for f in record):
                continue
            if len(record) != len(header):
                raise DataError(f"expected {len(header)} fields, got {len(record)}", row=lineno)
            y = _binary(record[0], "y", lineno)
            x = _binary(record[1], "x", lineno)
            count = 1
            if weighted:
                try:
                    count = int(record[2].strip())
                except ValueError:
                    raise DataError(f"count must be an integer, got {record[2]!r}", row=lineno) from None
                if count < 0:
                    raise DataError(f"count must be non-negative, got {count}", row=lineno)
                if count == 0:
                    continue
            rows.append((y, x, count))
    if not rows:
        raise DataError(f"{path} contains no observations")
    return Dataset(tuple(rows))


def format_float(v: float) -> str:
    """Shortest decimal string that parses back to the same double."""
    return repr(float(v))


def write_chain_csv(path, draws, log_posts, accepted, first_iteration: int = 1):
    draws = np.asarray(draws)
    with open(path, "w", newline="") as fh:
        fh.write(",".join(CHAIN_COLUMNS) + "\n")
        lines = []
        for j, ((b0, b1), lp, acc) in enumerate(zip(draws.tolist(), np.asarray(log_posts).tolist(),
                                                    np.asarray(accepted).tolist())):
            lines.append(f"{first_iteration + j},{b0!r},{b1!r},{lp!r},{int(acc)}\n")
        fh.writelines(lines)


def read_chain_csv(path) -> dict:
    """Inverse of :func:`write_chain_csv`; returns arrays keyed by column."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or tuple(h.strip() for h in header) != CHAIN_COLUMNS:
            raise DataError(f"chain file header must be {','.join(CHAIN_COLUMNS)}", row=1)
        cols = [[] for _ in CHAIN_COLUMNS]
        for lineno, record in enumerate(reader, start=2):
            if len(record) != len(CHAIN_COLUMNS):
                raise DataError(f"expected {len(CHAIN_COLUMNS)} fields, got {len(record)}", row=lineno)
            try:
                for col, field in zip(cols, record):
                    col.append(float(field))
            except ValueError:
                raise DataError(f"unparsable number in {record!r}", row=lineno) from None
    if not cols[0]:
        raise DataError(f"{path} contains no draws")
    return {
        "iteration": np.array(cols[0], dtype=np.int64),
        "draws": np.column_stack([cols[1], cols[2]]),
        "log_posts": np.array(cols[3]),
        "accepted": np.array(cols[4]) != 0,
    }


def _nice_ticks(lo, hi, n=5):
    if hi <= lo:
        return [lo]
    step = 10 ** math.floor(math.log10((hi - lo) / n))
    for mult in (1, 2, 5, 10):
        if (hi - lo) / (step * mult) <= n:
            step *= mult
            break
    start = math.ceil(lo / step) * step
    ticks = []
    t = start
    while t <= hi + 1e-12 * step:
        ticks.append(round(t, 12))
        t += step
    return ticks


def write_trace_svg(path, iterations, values, label: str, thin: int = 1, window=None,
                    width: int = 900, height: int = 320):
    """Trace plot as a single polyline, one point per plotted iteration.

    ``window=(start, end)`` restricts to iterations in ``[start, end]``;
    ``thin=k`` keeps every k-th point of what remains.
    """
    it = np.asarray(iterations)
    v = np.asarray(values, dtype=np.float64)
    if window is not None:
        keep = (it >= window[0]) & (it <= window[1])
        it, v = it[keep], v[keep]
    it, v = it[::thin], v[::thin]
    left, right, top, bottom = 70, 20, 20, 50
    pw, ph = width - left - right, height - top - bottom
    if it.size == 0:
        x0, x1, y0, y1 = 0.0, 1.0, 0.0, 1.0
    else:
        x0, x1 = float(it[0]), float(it[-1])
        y0, y1 = float(v.min()), float(v.max())
    if x1 == x0:
        x1 = x0 + 1.0
    if y1 == y0:
        y0, y1 = y0 - 0.5, y1 + 0.5

    def sx(x):
        return left + (x - x0) / (x1 - x0) * pw

    def sy(y):
        return top + (y1 - y) / (y1 - y0) * ph

    points = " ".join(f"{sx(x):.2f},{sy(y):.2f}" for x, y in zip(it.tolist(), v.tolist()))
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        '<rect width="100%" height="100%" fill="white"/>',
        f'<line x1="{left}" y1="{top + ph}" x2="{left + pw}" y2="{top + ph}" stroke="black"/>',
        f'<line x1="{left}" y1="{top}" x2="{left}" y2="{top + ph}" stroke="black"/>',
    ]
    for t in _nice_ticks(y0, y1):
        parts.append(f'<text x="{left - 6}" y="{sy(t) + 4:.2f}" font-size="11" text-anchor="end">{t:g}</text>')
    for t in _nice_ticks(x0, x1):
        parts.append(f'<text x="{sx(t):.2f}" y="{top + ph + 16}" font-size="11" text-anchor="middle">{t:g}</text>')
    parts += [
        f'<text x="{left + pw / 2:.1f}" y="{height - 8}" font-size="13" text-anchor="middle">iteration</text>',
        f'<text x="16" y="{top + ph / 2:.1f}" font-size="13" text-anchor="middle" '
        f'transform="rotate(-90 16 {top + ph / 2:.1f})">{escape(label)}</text>',
        f'<polyline fill="none" stroke="steelblue" stroke-width="0.6" points="{points}"/>',
        "</svg>",
    ]
    Path(path).write_text("\n".join(parts) + "\n")
