"""Learning curves and their CSV / SVG renderings."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from xml.sax.saxutils import escape

import numpy as np


@dataclass(frozen=True)
class LearningCurve:
    """Cost per update for every seed; ``per_seed`` has shape ``(n_seeds, K)``."""

    per_seed: np.ndarray
    seeds: tuple[int, ...] = ()

    def __post_init__(self):
        arr = np.atleast_2d(np.asarray(self.per_seed, dtype=np.float64))
        if arr.ndim != 2:
            raise ValueError("per_seed must be a (n_seeds, K) array")
        object.__setattr__(self, "per_seed", arr)
        seeds = tuple(self.seeds) or tuple(range(arr.shape[0]))
        if len(seeds) != arr.shape[0]:
            raise ValueError(f"{len(seeds)} seed labels for {arr.shape[0]} rows")
        object.__setattr__(self, "seeds", seeds)

    @property
    def n_updates(self) -> int:
        return self.per_seed.shape[1]

    @property
    def mean(self) -> np.ndarray:
        return self.per_seed.mean(axis=0)

    @property
    def std(self) -> np.ndarray:
        """Population standard deviation across seeds."""
        return self.per_seed.std(axis=0)

    @property
    def final(self) -> tuple[float, float]:
        return float(self.mean[-1]), float(self.std[-1])


def format_float(x: float) -> str:
    """Shortest round-tripping scientific form with a bare exponent: ``5e0``, ``1.25e-3``."""
    mantissa, exponent = np.format_float_scientific(float(x), unique=True, trim="-").split("e")
    return f"{mantissa}e{int(exponent)}"


def emit_csv(curve: LearningCurve, path) -> Path:
    if curve.per_seed.size == 0:
        raise ValueError("cannot write an empty learning curve")
    path = Path(path)
    header = ["update", "mean_cost", "std_cost"] + [f"seed_{i}" for i in range(len(curve.seeds))]
    rows = [",".join(header)]
    mean, std = curve.mean, curve.std
    for k in range(curve.n_updates):
        cells = [str(k), format_float(mean[k]), format_float(std[k])]
        cells += [format_float(v) for v in curve.per_seed[:, k]]
        rows.append(",".join(cells))
    path.write_text("\n".join(rows) + "\n")
    return path


def read_csv(path) -> LearningCurve:
    """Inverse of :func:`emit_csv` (seed labels become ``0..n-1``)."""
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    return LearningCurve(data[:, 3:].T)


# --- SVG --------------------------------------------------------------------

PALETTE = ("#d62728", "#1f77b4", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")
WIDTH, HEIGHT = 640, 400
LEFT, RIGHT, TOP, BOTTOM = 70, 150, 20, 45


def _fmt(v: float) -> str:
    return f"{v:.2f}"


def emit_svg_plot(curves: dict[str, LearningCurve], path, *, title: str = "") -> Path:
    """Mean cost per update on a log10 axis with a shaded +-1 std band per curve."""
    if not curves:
        raise ValueError("need at least one curve")
    lengths = {c.n_updates for c in curves.values()}
    if len(lengths) != 1:
        raise ValueError(f"curves have different lengths: {sorted(lengths)}")
    n = lengths.pop()
    if n == 0:
        raise ValueError("cannot plot empty curves")

    positive = np.concatenate([c.per_seed.ravel() for c in curves.values()])
    positive = positive[positive > 0]
    floor = positive.min() if positive.size else 1.0

    def log_bounds(c: LearningCurve):
        m, s = c.mean, c.std
        mid = np.log10(np.maximum(m, floor))
        lo = np.log10(np.maximum(m - s, floor))
        hi = np.log10(np.maximum(m + s, floor))
        return mid, lo, hi

    bounds = {name: log_bounds(c) for name, c in curves.items()}
    ymin = np.floor(min(b[1].min() for b in bounds.values()))
    ymax = np.ceil(max(b[2].max() for b in bounds.values()))
    if ymax <= ymin:
        ymax = ymin + 1

    pw, ph = WIDTH - LEFT - RIGHT, HEIGHT - TOP - BOTTOM

    def px(k):
        return LEFT + (pw * k / (n - 1) if n > 1 else pw / 2)

    def py(v):
        return TOP + ph * (ymax - v) / (ymax - ymin)

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">',
        f'<rect x="{LEFT}" y="{TOP}" width="{pw}" height="{ph}" fill="none" stroke="#444"/>',
    ]
    if title:
        out.append(f'<title>{escape(title)}</title>')
    for e in range(int(ymin), int(ymax) + 1):
        y = _fmt(py(e))
        out.append(f'<line x1="{LEFT}" y1="{y}" x2="{LEFT + pw}" y2="{y}" stroke="#ddd"/>')
        out.append(f'<text x="{LEFT - 6}" y="{y}" text-anchor="end" dominant-baseline="middle">1e{e}</text>')
    for k in sorted({0, (n - 1) // 2, n - 1}):
        x = _fmt(px(k))
        out.append(f'<text x="{x}" y="{TOP + ph + 16}" text-anchor="middle">{k + 1}</text>')
    out.append(f'<text x="{LEFT + pw / 2}" y="{HEIGHT - 8}" text-anchor="middle">update</text>')
    out.append(f'<text x="16" y="{TOP + ph / 2}" text-anchor="middle" '
               f'transform="rotate(-90 16 {TOP + ph / 2})">cost (log10)</text>')

    ks = range(n)
    for i, (name, (mid, lo, hi)) in enumerate(bounds.items()):
        color = PALETTE[i % len(PALETTE)]
        upper = " ".join(f"{_fmt(px(k))},{_fmt(py(hi[k]))}" for k in ks)
        lower = " ".join(f"{_fmt(px(k))},{_fmt(py(lo[k]))}" for k in reversed(ks))
        out.append(f'<polygon points="{upper} {lower}" fill="{color}" fill-opacity="0.2" stroke="none"/>')
        line = " ".join(f"{_fmt(px(k))},{_fmt(py(mid[k]))}" for k in ks)
        out.append(f'<polyline points="{line}" fill="none" stroke="{color}" stroke-width="1.5"/>')
        ly = TOP + 10 + 18 * i
        out.append(f'<line x1="{LEFT + pw + 12}" y1="{ly}" x2="{LEFT + pw + 32}" y2="{ly}" '
                   f'stroke="{color}" stroke-width="3"/>')
        out.append(f'<text x="{LEFT + pw + 38}" y="{ly}" dominant-baseline="middle">{escape(name)}</text>')
    out.append("</svg>")

    path = Path(path)
    path.write_text("\n".join(out) + "\n")
    return path
