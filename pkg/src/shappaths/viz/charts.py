"""Stacked importance bars, cluster heatmaps, and embedding scatters."""

from __future__ import annotations

import numpy as np

from ..errors import DataError
from .svg import NOISE, Canvas, nice_ticks
from .waterfall import PlotSpec


def stacked_bar(meanabs: np.ndarray, spec: PlotSpec = PlotSpec(),
                feature_names=None, class_names=None) -> str:
    """Per-feature mean-|SHAP| bars stacked by class, tallest first."""
    spec.validate()
    meanabs = np.atleast_2d(np.asarray(meanabs, dtype=float))
    p, k = meanabs.shape
    feature_names = list(feature_names) if feature_names else [f"feature_{j}" for j in range(p)]
    class_names = list(class_names) if class_names else [f"class_{c}" for c in range(k)]
    totals = meanabs.sum(axis=1)
    order = np.lexsort((np.arange(p), -totals))[: spec.top_n]

    left, right, top, bottom = 64, 150, 40, 70
    plot_w, plot_h = spec.width - left - right, spec.height - top - bottom
    hi = float(totals[order].max()) if order.size else 1.0
    hi = hi or 1.0
    canvas = Canvas(spec.width, spec.height, title="mean |SHAP| by feature and class")
    for tick in nice_ticks(0.0, hi):
        y = top + plot_h - tick / (hi * 1.05) * plot_h
        canvas.line(left, y, left + plot_w, y, stroke="#f0f0f0")
        canvas.text(left - 6, y + 3, f"{tick:g}", anchor="end", size=9)

    slot = plot_w / max(len(order), 1)
    bar_w = 0.62 * slot
    for i, j in enumerate(order):
        x = left + i * slot + (slot - bar_w) / 2
        y = top + plot_h
        for c in range(k):
            h = meanabs[j, c] / (hi * 1.05) * plot_h
            if h > 0:
                canvas.rect(x, y - h, bar_w, h, fill=spec.palette[c % len(spec.palette)],
                            cls=f"bar-{c}")
            y -= h
        canvas.text(x + bar_w / 2, top + plot_h + 14, feature_names[j],
                    anchor="middle", size=9)
    canvas.text(left + plot_w / 2, spec.height - 12, spec.x_label or "feature",
                anchor="middle", size=11)
    legend_x = left + plot_w + 12
    canvas.text(legend_x, top, "classes", size=11, weight="bold")
    for c, name in enumerate(class_names):
        y = top + 16 + c * 16
        canvas.rect(legend_x, y - 9, 10, 10, fill=spec.palette[c % len(spec.palette)])
        canvas.text(legend_x + 14, y, name, size=10)
    return canvas.to_svg()


def _diverging_color(t: float) -> str:
    """t in [-1, 1] -> blue / white / red."""
    t = max(-1.0, min(1.0, t))
    if t >= 0:
        r, g, b = 255, round(255 * (1 - t * 0.75)), round(255 * (1 - t * 0.85))
    else:
        r, g, b = round(255 * (1 + t * 0.85)), round(255 * (1 + t * 0.75)), 255
    return f"#{r:02x}{g:02x}{b:02x}"


def cluster_heatmap(ds, labeling, feature_subset=None,
                    spec: PlotSpec = PlotSpec()) -> str:
    """Cluster-mean raw feature values, diverging around the global mean.

    Colors normalize per feature (columns have their own scales); noise
    points are excluded and counted in the footnote. ``feature_subset``
    defaults to all features; callers usually pass the top features by
    mean |SHAP|.
    """
    spec.validate()
    labels = np.asarray(getattr(labeling, "labels", labeling), dtype=int)
    if labels.shape != (ds.n,):
        raise DataError(f"labels must have length {ds.n}")
    features = list(feature_subset) if feature_subset is not None else list(range(ds.p))
    clusters = [int(c) for c in np.unique(labels) if c != -1]
    global_mean = ds.features[:, features].mean(axis=0)
    cells = np.zeros((len(clusters), len(features)))
    for i, c in enumerate(clusters):
        members = labels == c
        cells[i] = ds.features[members][:, features].mean(axis=0)
    deviation = cells - global_mean
    scale = np.maximum(np.abs(deviation).max(axis=0), 1e-300)

    left, right, top, bottom = 110, 30, 56, 46
    plot_w = spec.width - left - right
    plot_h = spec.height - top - bottom
    cell_w = plot_w / max(len(features), 1)
    cell_h = min(36.0, plot_h / max(len(clusters), 1))
    canvas = Canvas(spec.width, spec.height, title="cluster means of raw features")
    for j, f in enumerate(features):
        canvas.text(left + (j + 0.5) * cell_w, top - 8, ds.feature_names[f],
                    anchor="middle", size=9)
    for i, c in enumerate(clusters):
        y = top + i * cell_h
        canvas.text(left - 8, y + cell_h / 2 + 3, f"cluster {c}", anchor="end", size=10)
        for j in range(len(features)):
            color = _diverging_color(float(deviation[i, j] / scale[j]))
            canvas.rect(left + j * cell_w, y, cell_w - 1, cell_h - 1, fill=color,
                        cls="cell")
            canvas.text(left + (j + 0.5) * cell_w, y + cell_h / 2 + 3,
                        f"{cells[i, j]:.2f}", anchor="middle", size=8)
    n_noise = int((labels == -1).sum())
    if n_noise:
        canvas.text(left, top + len(clusters) * cell_h + 18,
                    f"noise: {n_noise} samples excluded", size=9, fill=NOISE,
                    cls="footnote")
    return canvas.to_svg()


def pca_scatter(scores: np.ndarray, labels, spec: PlotSpec = PlotSpec(),
                label_names=None, title: str = "embedding") -> str:
    """2-D scatter of PCA scores colored by integer label (-1 = noise)."""
    spec.validate()
    scores = np.atleast_2d(np.asarray(scores, dtype=float))
    labels = np.asarray(getattr(labels, "labels", labels), dtype=int)
    left, right, top, bottom = 56, 150, 40, 40
    plot_w, plot_h = spec.width - left - right, spec.height - top - bottom
    lo = scores.min(axis=0)
    hi = scores.max(axis=0)
    span = np.maximum(hi - lo, 1e-9)
    lo, hi = lo - 0.06 * span, hi + 0.06 * span
    canvas = Canvas(spec.width, spec.height, title=title)

    def pix(pt):
        return (left + (pt[0] - lo[0]) / (hi[0] - lo[0]) * plot_w,
                top + plot_h - (pt[1] - lo[1]) / (hi[1] - lo[1]) * plot_h)

    for pt, lab in zip(scores, labels):
        color = NOISE if lab == -1 else spec.palette[lab % len(spec.palette)]
        x, y = pix(pt)
        canvas.circle(x, y, 2.4, fill=color, cls="point")
    legend_x = left + plot_w + 12
    present = [int(v) for v in np.unique(labels)]
    for i, v in enumerate(present):
        y = top + 16 + i * 16
        color = NOISE if v == -1 else spec.palette[v % len(spec.palette)]
        name = "noise" if v == -1 else (
            label_names[v] if label_names and v < len(label_names) else str(v))
        canvas.circle(legend_x + 5, y - 4, 4, fill=color)
        canvas.text(legend_x + 14, y, name, size=10)
    return canvas.to_svg()
