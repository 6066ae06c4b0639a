"""Report files for the command line: canonical JSON, per-box CSV, figures.

Reports are written atomically (temp file + rename) so a failed run never
leaves a partial file behind.  JSON uses sorted keys and the shortest
round-trip float representation, making reports byte-stable for identical
inputs; only the wall_time_ms fields vary between runs.
"""

from __future__ import annotations

import csv
import json
import os

import numpy as np


def canonical_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2) + "\n"


def write_text_atomic(path, text: str) -> None:
    tmp = f"{path}.tmp{os.getpid()}"
    with open(tmp, "w") as fh:
        fh.write(text)
    os.replace(tmp, path)


def write_report(path, obj) -> None:
    write_text_atomic(path, canonical_json(obj))


def stream_boxes_csv(path, chunks, dim: int) -> None:
    """Write per-box rows (center coords, local estimate, local error radius).

    ``chunks`` yields (centers, estimates, radii) arrays; rows are streamed so
    large grids never materialize as strings in memory.
    """
    tmp = f"{path}.tmp{os.getpid()}"
    with open(tmp, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow([f"x{i + 1}" for i in range(dim)] + ["local_estimate", "local_error"])
        for centers, estimates, radii in chunks:
            for row, est, rad in zip(centers, estimates, radii):
                writer.writerow([repr(float(v)) for v in row] + [repr(float(est)), repr(float(rad))])
    os.replace(tmp, path)


def render_box_maps(path, centers: np.ndarray, estimates: np.ndarray, radii: np.ndarray, side: float) -> bool:
    """Render side-by-side maps of local estimates and local error radii.

    Supports one- and two-dimensional grids; returns False (no file written)
    for higher dimensions.
    """
    dim = centers.shape[1]
    if dim > 2:
        return False
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, axes = plt.subplots(1, 2, figsize=(11, 4.2))
    titles = ["local quadrature estimate", "local error bound"]
    if dim == 1:
        order = np.argsort(centers[:, 0])
        for ax, vals, title in zip(axes, (estimates, radii), titles):
            ax.plot(centers[order, 0], vals[order], lw=0.8)
            ax.set_xlabel("x")
            ax.set_title(title)
    else:
        xs = np.unique(centers[:, 0])
        ys = np.unique(centers[:, 1])
        ix = np.searchsorted(xs, centers[:, 0])
        iy = np.searchsorted(ys, centers[:, 1])
        extent = [
            xs[0] - side / 2, xs[-1] + side / 2,
            ys[0] - side / 2, ys[-1] + side / 2,
        ]
        for ax, vals, title in zip(axes, (estimates, radii), titles):
            img = np.full((len(ys), len(xs)), np.nan)
            img[iy, ix] = vals
            pcm = ax.imshow(img, origin="lower", extent=extent, aspect="auto")
            fig.colorbar(pcm, ax=ax)
            ax.set_xlabel("x1")
            ax.set_ylabel("x2")
            ax.set_title(title)
    fig.tight_layout()
    tmp = f"{path}.tmp{os.getpid()}.png"
    fig.savefig(tmp, dpi=130)
    plt.close(fig)
    os.replace(tmp, path)
    return True
