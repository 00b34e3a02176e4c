"""Static SVG scatter plots of 2-D embeddings."""
from __future__ import annotations

import numpy as np


def scatter_svg(coords, path, labels=None, highlight=None, title=None) -> None:
    """Write an SVG scatter of the first two embedding coordinates.

    Points are coloured by ``labels``; the index ``highlight`` (typically the
    top within-class outlier) is drawn in red on top. Output is
    byte-reproducible for equal inputs.
    """
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    coords = np.asarray(coords, dtype=float)
    if coords.ndim != 2 or coords.shape[1] < 1:
        raise ValueError("coords must be an (n, d) array")
    xy = coords[:, :2] if coords.shape[1] >= 2 else np.c_[coords[:, 0], np.zeros(len(coords))]
    with plt.rc_context({"svg.hashsalt": "pfgap", "svg.fonttype": "none"}):
        fig, ax = plt.subplots(figsize=(5, 4))
        if labels is None:
            ax.scatter(xy[:, 0], xy[:, 1], s=18, c="0.4")
        else:
            labels = np.asarray(labels)
            cmap = plt.get_cmap("tab10")
            for k, lab in enumerate(sorted(set(labels.tolist()), key=str)):
                sel = labels == lab
                ax.scatter(xy[sel, 0], xy[sel, 1], s=18, color=cmap(k % 10), label=str(lab))
            ax.legend(title="class", fontsize=8)
        if highlight is not None:
            ax.scatter([xy[highlight, 0]], [xy[highlight, 1]], s=60, c="red",
                       edgecolors="black", zorder=3)
        if title:
            ax.set_title(title)
        ax.set_xlabel("MDS 1")
        ax.set_ylabel("MDS 2")
        fig.tight_layout()
        fig.savefig(path, format="svg", metadata={"Date": None})
        plt.close(fig)
