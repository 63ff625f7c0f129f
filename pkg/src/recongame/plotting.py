"""Static SVG figures: feasible-region scatter and error curves.

Output is byte-stable for a fixed input: the SVG id salt is pinned and the
date stamp is dropped. The config hash goes into the SVG description.
"""

from __future__ import annotations

import io
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

STYLE = {
    "svg.hashsalt": "recongame",
    "svg.fonttype": "none",
    "font.size": 9,
    "axes.spines.top": False,
    "axes.spines.right": False,
    "figure.figsize": (4.5, 4.0),
}


def _save(fig, path, config_hash: str) -> None:
    buf = io.StringIO()
    fig.savefig(buf, format="svg", metadata={"Date": None, "Description": f"config-hash {config_hash}"})
    plt.close(fig)
    head, _, body = buf.getvalue().partition("\n")
    Path(path).write_text(f"{head}\n<!-- config-hash: {config_hash} -->\n{body}")


def plot_region(result, path, config_hash: str = "", max_points: int = 4000) -> None:
    """Feasible samples, final witness, guess and a-posteriori secret of a 2D game."""
    space = result.transcript.space
    if not space.is_euclidean or space.dim != 2:
        raise ValueError("region plots need a two-dimensional Euclidean space")
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots()
        lo, hi = space.bbox()
        if hasattr(space, "radius"):
            ax.add_patch(plt.Circle(space.c, space.radius, fill=False, lw=0.8, color="0.5"))
        else:
            ax.add_patch(plt.Rectangle(lo, *(hi - lo), fill=False, lw=0.8, color="0.5"))
        S = result.feasible_samples
        if S is not None and len(S):
            S = np.asarray(S)[:max_points]
            ax.scatter(S[:, 0], S[:, 1], s=2, color="tab:blue", alpha=0.4, lw=0, label="feasible samples")
        W = result.final_witness
        if W is not None and len(W):
            W = np.asarray(W)
            if len(W) >= 3:
                from scipy.spatial import ConvexHull, QhullError

                try:
                    hull = W[ConvexHull(W).vertices]
                    ax.fill(hull[:, 0], hull[:, 1], fill=False, ec="tab:orange", lw=0.8)
                except QhullError:
                    pass
            ax.scatter(W[:, 0], W[:, 1], s=12, color="tab:orange", lw=0, label="witness")
        if result.guess is not None:
            g = np.asarray(result.guess)
            ax.plot(*g, marker="x", color="k", ms=7, ls="", label="guess")
            if result.error_lb is not None:
                ax.add_patch(plt.Circle(g, result.error_lb, fill=False, ls="--", lw=0.8, color="k"))
        if result.secret is not None:
            ax.plot(*np.asarray(result.secret), marker="*", color="tab:red", ms=8, ls="", label="secret")
        shown = [np.asarray(P, float).reshape(-1, 2) for P in (S, W, result.guess, result.secret)
                 if P is not None and len(np.atleast_1d(P))]
        if result.guess is not None and result.error_lb is not None:
            g = np.asarray(result.guess, float)
            shown.append(np.array([g - result.error_lb, g + result.error_lb]))
        if shown:
            P = np.vstack(shown)
            a, b = P.min(axis=0), P.max(axis=0)
            pad = 0.15 * max(float((b - a).max()), 1e-9)
            a, b = np.maximum(a - pad, lo), np.minimum(b + pad, hi)
        else:
            a, b = lo, hi
        ax.set_xlim(a[0], b[0])
        ax.set_ylim(a[1], b[1])
        ax.set_aspect("equal")
        ax.legend(loc="upper right", fontsize=7, frameon=False)
        ax.set_title(f"T = {len(result.transcript)}")
        _save(fig, path, config_hash)


def plot_curve(rows, path, config_hash: str = "", reference: float | None = None,
               log_excess: bool = False) -> None:
    """Lower and upper envelopes over T; with ``log_excess`` plots lb - reference on a log axis."""
    T = np.array([r["T"] for r in rows], float)
    lb = np.array([np.nan if r["lb"] is None else r["lb"] for r in rows], float)
    ub = np.array([np.nan if r["ub"] is None else r["ub"] for r in rows], float)
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots()
        if log_excess and reference is not None:
            ax.semilogy(T, lb - reference, "o-", ms=3, label="lb - OPT")
            ax.set_ylabel("excess error")
        else:
            ax.plot(T, lb, "o-", ms=3, label="forced lb")
            if np.isfinite(ub).any():
                ax.plot(T, ub, "s-", ms=3, label="upper bound")
            if reference is not None:
                ax.axhline(reference, color="0.4", ls=":", lw=0.8, label="OPT")
            ax.set_ylabel("error")
        ax.set_xlabel("T")
        ax.legend(frameon=False, fontsize=7)
        _save(fig, path, config_hash)
