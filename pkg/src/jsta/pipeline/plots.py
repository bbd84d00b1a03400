"""Deterministic SVG figures carrying their data as CSV comment blocks."""
from __future__ import annotations

import io
import re
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

GDD_THEORY = -2.59e5  # fs^2
GDD_MEASURED_REFERENCE = -2.66e5  # fs^2

_BLOCK = re.compile(r"<!-- JSTA-DATA name=(\S+)\n(.*?)\n-->", re.S)


def _csv(table) -> str:
    buf = io.StringIO()
    np.savetxt(buf, np.atleast_2d(np.asarray(table, float)), delimiter=",", fmt="%.9e")
    return buf.getvalue().rstrip("\n")


def _save(fig, path, blocks: dict) -> Path:
    plt.rcParams["svg.hashsalt"] = "jsta"
    buf = io.StringIO()
    fig.savefig(buf, format="svg", metadata={"Date": None, "Creator": "jsta"})
    plt.close(fig)
    svg = buf.getvalue()
    comments = "".join(f"<!-- JSTA-DATA name={k}\n{_csv(v)}\n-->\n" for k, v in blocks.items())
    head_end = svg.index("?>") + 2 if svg.startswith("<?xml") else 0
    svg = svg[:head_end] + "\n" + comments + svg[head_end:].lstrip("\n")
    path = Path(path)
    path.write_text(svg)
    return path


def read_svg_data(path) -> dict:
    """Recover the embedded data blocks of an SVG written here."""
    text = Path(path).read_text()
    out = {}
    for name, body in _BLOCK.findall(text):
        out[name] = np.loadtxt(io.StringIO(body), delimiter=",", ndmin=2)
    return out


def heatmap(path, values, x, y, title: str, xlabel: str, ylabel: str, cmap: str = "viridis",
            mask=None) -> Path:
    """Image of ``values[ix, iy]`` with ``x`` on the horizontal axis."""
    v = np.asarray(values, float)
    shown = v if mask is None else np.where(mask, v, np.nan)
    fig, ax = plt.subplots(figsize=(4.8, 4.0))
    ext = [x[0], x[-1], y[0], y[-1]]
    im = ax.imshow(shown.T, origin="lower", extent=ext, aspect="auto", cmap=cmap, interpolation="nearest")
    fig.colorbar(im, ax=ax)
    ax.set_title(title)
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    fig.tight_layout()
    return _save(fig, path, {"values": v, "x": np.asarray(x)[None, :], "y": np.asarray(y)[None, :]})


def fit_summary(path, labels, gdd_values, gdd_truth=None) -> Path:
    """Fitted GDD per post-selection with the two reference lines."""
    gdd = np.asarray(gdd_values, float)
    fig, ax = plt.subplots(figsize=(5.0, 3.6))
    k = np.arange(gdd.size)
    ax.plot(k, gdd, "o", label="fitted")
    ax.axhline(GDD_THEORY, color="C1", ls="--", label="GDD theory -2.59e5 fs^2")
    ax.axhline(GDD_MEASURED_REFERENCE, color="C2", ls=":", label="GDD measured ref. -2.66e5 fs^2")
    if gdd_truth is not None:
        ax.axhline(gdd_truth, color="k", lw=0.8, label="configured")
    ax.set_xticks(k)
    ax.set_xticklabels(labels, rotation=30, fontsize=7)
    ax.set_ylabel("GDD (fs^2)")
    ax.legend(fontsize=7)
    fig.tight_layout()
    table = np.stack([k, gdd], axis=1) if gdd.size else np.zeros((0, 2))
    return _save(fig, path, {"gdd": table,
                             "references": [[GDD_THEORY, GDD_MEASURED_REFERENCE]]})


def centroid_plot(path, idler_points, centroids) -> Path:
    p = np.asarray(idler_points, float).reshape(-1, 2)
    c = np.asarray(centroids, float).reshape(-1, 2)
    fig, ax = plt.subplots(figsize=(4.2, 4.0))
    ax.plot(p[:, 0], p[:, 1], "s", label="idler post-selection")
    ax.plot(c[:, 0], c[:, 1], "o", label="signal centroid")
    for a, b in zip(p, c):
        ax.annotate("", xy=b, xytext=a, arrowprops={"arrowstyle": "->", "lw": 0.6})
    ax.set_xlabel("x (mm)")
    ax.set_ylabel("y (mm)")
    ax.set_aspect("equal")
    ax.legend(fontsize=7)
    fig.tight_layout()
    return _save(fig, path, {"centroids": np.hstack([p, c])})
