"""Network and stability plot documents (SVG plus the table behind them)."""

from __future__ import annotations

import io
from dataclasses import dataclass
from typing import TYPE_CHECKING, Dict, List, Optional, Tuple

import matplotlib
import networkx as nx
import numpy as np
import pandas as pd
from matplotlib.backends.backend_svg import FigureCanvasSVG
from matplotlib.collections import LineCollection
from matplotlib.figure import Figure

from netscale.network.ega import EgaResult

if TYPE_CHECKING:
    from netscale.core.kernel import OverallResult, TypeResult

# Fixed salt and no timestamp: identical inputs give identical bytes
_SVG_RC = {"svg.hashsalt": "netscale", "svg.fonttype": "none", "font.family": "DejaVu Sans"}
_PANEL_SIZE = (6.0, 5.0)
STABILITY_COLUMNS = ["panel", "ID", "statement", "stability", "empirical_community", "threshold"]


@dataclass(frozen=True)
class PlotDocument:
    """A rendered SVG and the data table it was drawn from."""
    svg: str
    data: pd.DataFrame


def nmi_label(value: Optional[float]) -> str:
    return "NMI: n/a" if value is None else f"NMI: {value:.2f}%"


def _render(fig: Figure) -> str:
    buffer = io.StringIO()
    with matplotlib.rc_context(_SVG_RC):
        FigureCanvasSVG(fig).print_svg(buffer, metadata={"Date": None})
    return buffer.getvalue()


def _figure(n_panels: int) -> Tuple[Figure, List]:
    with matplotlib.rc_context(_SVG_RC):
        fig = Figure(figsize=(_PANEL_SIZE[0] * n_panels, _PANEL_SIZE[1]))
        axes = [fig.add_subplot(1, n_panels, k + 1) for k in range(n_panels)]
    return fig, axes


def _notice(title: str, message: str) -> str:
    fig, (ax,) = _figure(1)
    ax.set_axis_off()
    ax.set_title(title)
    ax.text(0.5, 0.5, message, ha="center", va="center", wrap=True, transform=ax.transAxes)
    return _render(fig)


def _layout(ega: EgaResult, seed: int) -> Dict[str, np.ndarray]:
    graph = nx.Graph()
    graph.add_nodes_from(ega.network.item_ids)
    graph.add_weighted_edges_from((a, b, abs(w)) for a, b, w in ega.network.edges())
    return nx.spring_layout(graph, weight="weight", seed=seed)


def _draw_network(ax, ega: EgaResult, title: str, seed: int) -> None:
    pos = _layout(ega, seed)
    cmap = matplotlib.colormaps["tab10"]
    segments, widths, colors = [], [], []
    for a, b, w in ega.network.edges():
        segments.append([pos[a], pos[b]])
        widths.append(0.5 + 3.0 * abs(w))
        colors.append("#2a7ab0" if w >= 0 else "#c0392b")
    if segments:
        ax.add_collection(LineCollection(segments, linewidths=widths, colors=colors, alpha=0.6, zorder=1))

    ids = list(ega.network.item_ids)
    xy = np.array([pos[i] for i in ids])
    communities = [ega.partition.label_of(i) for i in ids]
    ax.scatter(
        xy[:, 0], xy[:, 1], s=260,
        c=[cmap((c - 1) % cmap.N) for c in communities],
        edgecolors="black", linewidths=0.6, zorder=2,
    )
    for (x, y), item_id in zip(xy, ids):
        ax.annotate(item_id, (x, y), ha="center", va="center", fontsize=7, zorder=3)
    ax.set_title(title)
    ax.text(0.02, 0.02, nmi_label(ega.nmi.value if ega.nmi else None), transform=ax.transAxes)
    ax.set_axis_off()
    ax.autoscale_view()


def _network_table(panels: List[Tuple[str, EgaResult]]) -> pd.DataFrame:
    rows = []
    for panel, ega in panels:
        for item_id in ega.partition.item_ids:
            rows.append({
                "panel": panel,
                "ID": item_id,
                "community": ega.partition.label_of(item_id),
                "NMI": None if ega.nmi is None else round(ega.nmi.value, 2),
                "method": ega.method.value,
            })
    return pd.DataFrame(rows, columns=["panel", "ID", "community", "NMI", "method"])


def network_plot(initial: EgaResult, final: EgaResult, title: str, seed: int = 0) -> PlotDocument:
    """Initial network on the left, final on the right, nodes colored by community."""
    fig, (left, right) = _figure(2)
    _draw_network(left, initial, f"{title}: before reduction", seed)
    _draw_network(right, final, f"{title}: after reduction", seed)
    return PlotDocument(_render(fig), _network_table([("initial", initial), ("final", final)]))


def _stability_table(type_result: "TypeResult") -> pd.DataFrame:
    report = type_result.bootEGA
    rows = []
    for panel, boot in (("initial", report.initial_boot), ("final", report.final_boot)):
        for item_id, value in boot.item_stability.items():
            rows.append({
                "panel": panel,
                "ID": item_id,
                "statement": report.statements.get(item_id, ""),
                "stability": value,
                "empirical_community": boot.empirical.label_of(item_id),
                "threshold": report.threshold,
            })
    return pd.DataFrame(rows, columns=STABILITY_COLUMNS)


def stability_plot(type_result: "TypeResult") -> PlotDocument:
    """Sorted item stabilities before and after pruning, with the threshold line."""
    data = _stability_table(type_result)
    fig, axes = _figure(2)
    cmap = matplotlib.colormaps["tab10"]
    for ax, panel in zip(axes, ("initial", "final")):
        rows = data[data["panel"] == panel].sort_values(["stability", "ID"], kind="mergesort")
        y = np.arange(len(rows))
        ax.barh(
            y, rows["stability"],
            color=[cmap((c - 1) % cmap.N) for c in rows["empirical_community"]],
        )
        ax.set_yticks(y, labels=list(rows["ID"]), fontsize=6)
        ax.axvline(type_result.bootEGA.threshold, color="black", linestyle="--", linewidth=1)
        ax.set_xlim(0.0, 1.0)
        ax.set_xlabel("item stability")
        ax.set_title(f"{type_result.item_type}: {panel} ({len(rows)} items)")
    return PlotDocument(_render(fig), data)


def render_plots(
    type_result: "TypeResult", seed: int = 0
) -> Tuple[PlotDocument, PlotDocument]:
    """Network and stability documents for one type; degraded results get a notice panel."""
    title = type_result.item_type
    if type_result.initial_EGA is None or type_result.final_EGA is None:
        note = "; ".join(type_result.notes) or "reduction did not run"
        empty_network = pd.DataFrame(columns=["panel", "ID", "community", "NMI", "method"])
        empty_stability = pd.DataFrame(columns=STABILITY_COLUMNS)
        return (
            PlotDocument(_notice(f"{title}: network", note), empty_network),
            PlotDocument(_notice(f"{title}: stability", note), empty_stability),
        )
    network = network_plot(type_result.initial_EGA, type_result.final_EGA, title, seed)
    return network, stability_plot(type_result)


def render_overall_plot(overall: "OverallResult", seed: int = 0) -> Optional[PlotDocument]:
    if overall.initial_EGA is None or overall.final_EGA is None:
        return None
    return network_plot(overall.initial_EGA, overall.final_EGA, "overall", seed)
