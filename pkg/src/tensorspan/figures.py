"""Matplotlib rendering for span reports and stabilization tables."""

from __future__ import annotations

from pathlib import Path


def _pyplot():
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    return plt


def save_spectrum_figure(values, rank: int, path, title: str = "") -> Path:
    """Singular-value profile of the span matrix with the rank cut marked."""
    plt = _pyplot()
    path = Path(path)
    vals = [max(v, 1e-300) for v in values]
    fig, ax = plt.subplots(figsize=(6.0, 3.6))
    idx = range(1, len(vals) + 1)
    ax.semilogy(idx, vals, "o", ms=4, color="tab:blue")
    if 0 < rank < len(vals):
        cut = rank + 0.5
        ax.axvline(cut, color="tab:red", lw=1, ls="--")
        ax.annotate(
            f"rank = {rank}",
            xy=(cut, vals[rank - 1]),
            xytext=(5, 0),
            textcoords="offset points",
            color="tab:red",
            fontsize=9,
        )
    ax.set_xlabel("index")
    ax.set_ylabel("singular value")
    if title:
        ax.set_title(title, fontsize=10)
    ax.grid(True, which="both", alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def save_table_figure(ns, dims, n_b: int, path, title: str = "") -> Path:
    """Measured span dimension against the last-factor size."""
    plt = _pyplot()
    path = Path(path)
    fig, ax = plt.subplots(figsize=(6.0, 3.6))
    ax.plot(ns, dims, "o-", color="tab:blue", label="span dimension")
    ax.axvline(n_b, color="tab:gray", lw=1, ls=":", label=f"boundary n = {n_b}")
    ax.set_xlabel("last factor dimension n")
    ax.set_ylabel("projective span dimension")
    ax.set_xticks(list(ns))
    if title:
        ax.set_title(title, fontsize=10)
    ax.legend(fontsize=8)
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path
