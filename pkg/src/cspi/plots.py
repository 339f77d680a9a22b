"""Matplotlib rendering of the figure traces (written alongside the CSVs).

Phase-space figures draw the real part of the path as a solid curve and
the imaginary part as a dashed curve; the sphere figure plots each
component of the (generally complex) unit vector against time.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

__all__ = ["render_phase_figure", "render_sphere_figure"]


def render_phase_figure(path, t, p, q, title, mark_endpoints=True):
    """Parametric (q, p) plot; complex p, q split into solid/dashed curves."""
    fig, ax = plt.subplots(figsize=(5.0, 5.0))
    ax.plot([z.real for z in q], [z.real for z in p], "-", color="C0", label="real part")
    ax.plot([z.imag for z in q], [z.imag for z in p], "--", color="C1", label="imaginary part")
    if mark_endpoints:
        ax.plot([q[0].real, q[-1].real], [p[0].real, p[-1].real], "ko", ms=4)
    ax.set_xlabel("q")
    ax.set_ylabel("p")
    ax.set_title(title)
    ax.legend(loc="best", fontsize=8)
    ax.set_aspect("equal", adjustable="datalim")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def render_sphere_figure(path, t, components, title):
    """Components n_x, n_y, n_z versus t; real solid, imaginary dashed."""
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    labels = ("n_x", "n_y", "n_z")
    for idx, comp in enumerate(components):
        color = f"C{idx}"
        ax.plot(t, [z.real for z in comp], "-", color=color, label=f"Re {labels[idx]}")
        ax.plot(t, [z.imag for z in comp], "--", color=color, label=f"Im {labels[idx]}")
    ax.set_xlabel("t")
    ax.set_ylabel("unit-vector components")
    ax.set_title(title)
    ax.legend(loc="best", fontsize=7, ncol=2)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
