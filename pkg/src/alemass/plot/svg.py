from __future__ import annotations

import io
import math
from typing import Any, Dict

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import networkx as nx  # noqa: E402
import numpy as np  # noqa: E402

from ..io.report import PlotSpec  # noqa: E402

# Fixed salt and no date so repeated renders are byte-identical
_RC = {"svg.hashsalt": "alemass", "svg.fonttype": "path", "path.simplify": False}


def _finish(fig) -> bytes:
    buf = io.BytesIO()
    fig.tight_layout()
    fig.savefig(buf, format="svg", metadata={"Date": None})
    plt.close(fig)
    return buf.getvalue()


def convergence_figure(data: Dict[str, Any]) -> bytes:
    """Mass samples against rho, and |m(rho) - m_inf| on log-log axes."""
    r = np.asarray(data["radii"], dtype=float)
    v = np.asarray(data["values"], dtype=float)
    limit = float(data["limit"])
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(9, 4))
    ax1.semilogx(r, v, "o-", label="m(rho)")
    if data.get("running"):
        ax1.semilogx(r, data["running"], "s--", label="running extrapolation")
    if math.isfinite(limit):
        ax1.axhline(limit, color="k", linewidth=0.8, label=f"m_inf = {limit:.6g}")
    ax1.set_xlabel("rho")
    ax1.set_ylabel("mass")
    ax1.legend(fontsize=8)

    dev = np.abs(v - limit)
    keep = dev > 0
    if np.count_nonzero(keep) >= 2:
        ax2.loglog(r[keep], dev[keep], "o-")
        ax2.set_title(f"decay rate {data.get('kappa', float('nan')):.3f}", fontsize=9)
    else:
        ax2.text(0.5, 0.5, "constant samples", ha="center", va="center", transform=ax2.transAxes)
    ax2.set_xlabel("rho")
    ax2.set_ylabel("|m(rho) - m_inf|")
    fig.suptitle(data.get("title", ""), fontsize=10)
    return _finish(fig)


def moser_figure(data: Dict[str, Any]) -> bytes:
    r = np.asarray(data["radii"], dtype=float)
    fig, ax = plt.subplots(figsize=(5, 4))
    for key, label in (("displacement", "|Phi(x) - x|"), ("jacobian_defect", "|D Phi - I|")):
        y = np.asarray(data.get(key, []), dtype=float)
        keep = y > 0
        if np.count_nonzero(keep) >= 2:
            ax.loglog(r[keep], y[keep], "o-", label=label)
    ax.set_xlabel("rho")
    ax.legend(fontsize=8)
    ax.set_title(data.get("title", ""), fontsize=9)
    return _finish(fig)


def capsule_figure(data: Dict[str, Any]) -> bytes:
    """Central vertex with its chains laid out as spokes."""
    g = nx.Graph()
    for node, label in data["nodes"]:
        g.add_node(node, label=label)
    g.add_edges_from(tuple(e) for e in data["edges"])
    pos = {0: (0.0, 0.0)}
    spokes = data["chains"]
    for i, members in enumerate(spokes):
        ang = 2.0 * math.pi * i / max(1, len(spokes))
        for j, node in enumerate(members, start=1):
            pos[node] = (j * math.cos(ang), j * math.sin(ang))
    fig, ax = plt.subplots(figsize=(5, 5))
    nx.draw_networkx(
        g, pos=pos, ax=ax, labels={n: g.nodes[n]["label"] for n in g.nodes},
        node_color="lightgray", font_size=8,
    )
    ax.set_title(data.get("title", ""), fontsize=9)
    ax.set_axis_off()
    return _finish(fig)


_RENDERERS = {
    "convergence": convergence_figure,
    "moser": moser_figure,
    "capsule": capsule_figure,
}


def render_svg(plot: PlotSpec) -> bytes:
    fn = _RENDERERS.get(plot.kind)
    if fn is None:
        raise ValueError(f"Unknown plot kind {plot.kind!r}")
    with matplotlib.rc_context(_RC):
        return fn(plot.data)
