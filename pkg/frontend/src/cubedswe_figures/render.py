"""Figure renderers for solver CSV output.

Four figure kinds: log-log convergence plots, time-series traces, and
orthographic northern-hemisphere maps of a nodal field or of the difference
between two field dumps.  All rendering is deterministic for a fixed
matplotlib version: fonts, sizes and color cycles are pinned here and output
files carry no timestamps, so golden-file regression tests can compare bytes
(`renderer_key` names the golden set for the installed renderer).

The map renderers only interpolate the emitted node scatter for display
(linear triangulation); no physics is recomputed from the inputs.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import matplotlib.tri as mtri  # noqa: E402
import numpy as np  # noqa: E402

from .schemas import SchemaError, read_table  # noqa: E402

FIGURE_KINDS = ("loglog-convergence", "timeseries", "sphere-map",
                "difference-map")

_RC = {
    "figure.figsize": (6.4, 4.8),
    "figure.dpi": 100,
    "savefig.dpi": 100,
    "font.family": "DejaVu Sans",
    "font.size": 10,
    "axes.grid": True,
    "grid.alpha": 0.3,
    "svg.hashsalt": "cubedswe-figures",
}

_SAVE_KWARGS = {
    # strip renderer metadata that would otherwise embed dates or versions
    ".png": {"metadata": {"Software": "cubedswe-figures"}},
    ".svg": {"metadata": {"Date": None, "Creator": "cubedswe-figures"}},
}


def renderer_key() -> str:
    """Identifier of the rendering stack a golden file set belongs to."""
    return f"mpl-{matplotlib.__version__}"


def _save(fig, out_path: str):
    suffix = "." + out_path.rsplit(".", 1)[-1].lower() if "." in out_path \
        else ""
    kwargs = _SAVE_KWARGS.get(suffix, {})
    fig.savefig(out_path, **kwargs)
    plt.close(fig)


def plot_loglog_convergence(in_paths, out_path, title=None):
    """Error versus step size, one panel per problem, one line per order."""
    tables = [read_table(p, "convergence") for p in in_paths]
    data = {k: np.concatenate([t[k] for t in tables])
            for k in ("h", "error", "order")}
    problems = sorted({str(p) for t in tables for p in t["problem"]})
    with plt.rc_context(_RC):
        fig, axes = plt.subplots(1, len(problems), squeeze=False,
                                 figsize=(4.0 * len(problems), 3.6))
        allprob = np.concatenate([t["problem"] for t in tables])
        for ax, problem in zip(axes[0], problems):
            sel = np.array([str(p) == problem for p in allprob])
            for order in sorted(set(data["order"][sel])):
                osel = sel & (data["order"] == order)
                idx = np.argsort(data["h"][osel])
                ax.loglog(data["h"][osel][idx], data["error"][osel][idx],
                          marker="o", ms=4, label=f"order {order:g}")
                href = data["h"][osel][idx]
                eref = data["error"][osel][idx]
                guide = eref[0] * (href / href[0]) ** order
                ax.loglog(href, guide, ":", lw=0.8, color="gray")
            ax.set_title(problem)
            ax.set_xlabel("step size")
            ax.legend(fontsize=8)
        axes[0][0].set_ylabel("error")
        if title:
            fig.suptitle(title)
        fig.tight_layout()
        _save(fig, out_path)


def plot_timeseries(in_paths, out_path, title=None, logscale=False):
    """All non-time columns of one or more trace files against time (days)."""
    with plt.rc_context(_RC):
        fig, ax = plt.subplots()
        for path in in_paths:
            table = read_table(path, "timeseries")
            days = table["time"] / 86400.0
            prefix = f"{_stem(path)}: " if len(in_paths) > 1 else ""
            for name, values in table.items():
                if name == "time":
                    continue
                if logscale:
                    ax.semilogy(days, np.abs(values),
                                label=prefix + f"|{name}|")
                else:
                    ax.plot(days, values, label=prefix + name)
        ax.set_xlabel("time (days)")
        ax.legend(fontsize=8)
        if title:
            ax.set_title(title)
        fig.tight_layout()
        _save(fig, out_path)


def _stem(path: str) -> str:
    return path.replace("\\", "/").rsplit("/", 1)[-1].rsplit(".", 1)[0]


def _north_projection(lon, lat):
    """Orthographic projection from above the north pole."""
    return (np.cos(lat) * np.sin(lon), -np.cos(lat) * np.cos(lon))


def _draw_north_map(ax, lon, lat, values, field):
    north = lat > 0.0
    if north.sum() < 3:
        raise SchemaError("no northern-hemisphere nodes in the field dump")
    x, y = _north_projection(lon[north], lat[north])
    tri = mtri.Triangulation(x, y)
    # drop sliver triangles that span the projection boundary
    xc = x[tri.triangles].mean(axis=1)
    yc = y[tri.triangles].mean(axis=1)
    rc = np.sqrt(xc**2 + yc**2)
    tri.set_mask(rc > 0.995)
    v = values[north]
    vmax = np.abs(v).max()
    if vmax == 0.0:
        vmax = 1.0
    levels = np.linspace(-vmax, vmax, 21)
    cs = ax.tricontourf(tri, v, levels=levels, cmap="RdBu_r")
    theta = np.linspace(0.0, 2.0 * np.pi, 181)
    ax.plot(np.cos(theta), np.sin(theta), "k-", lw=0.8)
    for phi in (np.pi / 6.0, np.pi / 3.0):
        r = np.cos(phi)
        ax.plot(r * np.cos(theta), r * np.sin(theta), "k:", lw=0.4)
    ax.set_aspect("equal")
    ax.set_axis_off()
    return cs


def plot_sphere_map(in_paths, out_path, field="zeta", title=None):
    """Northern-hemisphere filled-contour map of one nodal field."""
    if len(in_paths) != 1:
        raise SchemaError("sphere-map takes exactly one field dump")
    table = read_table(in_paths[0], "fields")
    if field not in table:
        raise SchemaError(
            f"{in_paths[0]}: no column {field!r} to map")
    with plt.rc_context(_RC):
        fig, ax = plt.subplots(figsize=(5.2, 4.6))
        cs = _draw_north_map(ax, table["lon"], table["lat"], table[field],
                             field)
        fig.colorbar(cs, ax=ax, shrink=0.85, label=field)
        ax.set_title(title or f"{field} (northern hemisphere)")
        fig.tight_layout()
        _save(fig, out_path)


def plot_difference_map(in_paths, out_path, field="H", title=None):
    """Map of the nodal difference between two field dumps of one grid."""
    if len(in_paths) != 2:
        raise SchemaError("difference-map takes exactly two field dumps")
    ta = read_table(in_paths[0], "fields")
    tb = read_table(in_paths[1], "fields")
    for name in (field, "lon", "lat"):
        if name not in ta or name not in tb:
            raise SchemaError(f"both inputs must carry column {name!r}")
    if ta["lon"].size != tb["lon"].size or not (
            np.allclose(ta["lon"], tb["lon"], atol=1e-12)
            and np.allclose(ta["lat"], tb["lat"], atol=1e-12)):
        raise SchemaError("field dumps are not on the same grid")
    with plt.rc_context(_RC):
        fig, ax = plt.subplots(figsize=(5.2, 4.6))
        cs = _draw_north_map(ax, ta["lon"], ta["lat"],
                             ta[field] - tb[field], field)
        fig.colorbar(cs, ax=ax, shrink=0.85, label=f"difference in {field}")
        ax.set_title(title or f"{field} difference (northern hemisphere)")
        fig.tight_layout()
        _save(fig, out_path)


RENDERERS = {
    "loglog-convergence": plot_loglog_convergence,
    "timeseries": plot_timeseries,
    "sphere-map": plot_sphere_map,
    "difference-map": plot_difference_map,
}
