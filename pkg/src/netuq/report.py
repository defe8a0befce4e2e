"""Figure rendering for experiment tables.

Renders summary plots next to the delimited output files.  Uses the Agg
backend so runs never require a display.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)

FIGURE_DPI = 150


def render_composite_figures(rows, out_dir, stem: str = "composite"
                             ) -> list[Path]:
    """Error-decay and point-count figures for a composite sweep."""
    out_dir = Path(out_dir)
    degrees = [r.degree for r in rows]
    written = []

    fig, ax = plt.subplots(figsize=(5.0, 3.6))
    ax.semilogy(degrees, [r.err_full for r in rows], "o-",
                label="full quadrature")
    ax.semilogy(degrees, [r.err_reduced for r in rows], "s--",
                label="modified quadrature")
    ax.set_xlabel("expansion degree N")
    ax.set_ylabel("max coefficient error")
    ax.grid(True, which="both", alpha=0.3)
    ax.legend()
    fig.tight_layout()
    path = out_dir / f"{stem}_errors.png"
    fig.savefig(path, dpi=FIGURE_DPI)
    plt.close(fig)
    written.append(path)

    fig, ax = plt.subplots(figsize=(5.0, 3.6))
    ax.semilogy(degrees, [r.npoints for r in rows], "o-",
                label="tensor grid points")
    ax.semilogy(degrees, [r.nonzeros for r in rows], "s--",
                label="nonzero weights")
    ax.semilogy(degrees, [r.basis_size for r in rows], "^:",
                label="basis size")
    ax.set_xlabel("expansion degree N")
    ax.set_ylabel("count")
    ax.grid(True, which="both", alpha=0.3)
    ax.legend()
    fig.tight_layout()
    path = out_dir / f"{stem}_counts.png"
    fig.savefig(path, dpi=FIGURE_DPI)
    plt.close(fig)
    written.append(path)
    return written


def render_network_figures(rows, out_dir, stem: str = "heat_network"
                           ) -> list[Path]:
    """Solve-count and timing figures for a heat-network sweep."""
    out_dir = Path(out_dir)
    dims = [r.s for r in rows]
    written = []

    fig, ax = plt.subplots(figsize=(5.0, 3.6))
    ax.semilogy(dims, [r.npoints for r in rows], "k:",
                label="grid points")
    ax.semilogy(dims, [r.solves_c1 for r in rows], "o-",
                label="pipe solves")
    ax.semilogy(dims, [r.solves_c2 for r in rows], "s--",
                label="reactor solves")
    ax.set_xlabel("input dimension s")
    ax.set_ylabel("count")
    ax.grid(True, which="both", alpha=0.3)
    ax.legend()
    fig.tight_layout()
    path = out_dir / f"{stem}_solves.png"
    fig.savefig(path, dpi=FIGURE_DPI)
    plt.close(fig)
    written.append(path)

    fig, ax = plt.subplots(figsize=(5.0, 3.6))
    ax.plot(dims, [r.time_c1 for r in rows], "o-", label="pipe")
    ax.plot(dims, [r.time_c2 for r in rows], "s--", label="reactor")
    ax.set_xlabel("input dimension s")
    ax.set_ylabel("solve wall time [s]")
    ax.grid(True, alpha=0.3)
    ax.legend()
    fig.tight_layout()
    path = out_dir / f"{stem}_times.png"
    fig.savefig(path, dpi=FIGURE_DPI)
    plt.close(fig)
    written.append(path)
    return written
