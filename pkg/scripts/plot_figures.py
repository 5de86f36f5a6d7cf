"""Plotting recipe for the CSVs written by the sweep scripts.

Reads the files produced by dirichlet_metrics_sweep.py,
dirichlet_avar_sweep.py, mgamma_metrics_sweep.py, and
mgamma_avar_sweep.py from --data-dir and renders one PNG per comparison
into the same directory.  Missing CSVs are skipped with a note, so the
script can be run after any subset of the data recipes.

The recipe per file:

* metrics CSVs (``*_metrics.csv``): keep the rows whose ``param_index``
  equals the swept coordinate (0 for the shape sweeps, 4 for the scale
  sweep), then draw one row of panels per sample size n with columns
  bias / variance / RMSE, ``sweep_value`` on the x-axis and one line per
  estimator.
* asymptotic-variance CSVs (``*_avar_*.csv``): keep the swept
  coordinate's rows and draw ``avar`` against ``sweep_value``, one line
  per estimator, one panel per file, grouped into a single figure per
  family.

matplotlib is required only by this script, not by the package.

Usage:
    python3 scripts/plot_figures.py --data-dir data
"""

from __future__ import annotations

import argparse
import csv
from collections import defaultdict
from pathlib import Path

ESTIMATOR_ORDER = ("me", "same", "mle", "dir_me", "dir_same")

METRICS_FILES = (
    ("dirichlet_metrics.csv", 0, "dirichlet, shapes (a1, 0.2, 1, 2, 5)"),
    ("mgamma_shape_metrics.csv", 0, "mgamma, shapes (a1, 1, 2, 5), scale 1"),
    ("mgamma_scale_metrics.csv", 4, "mgamma, shapes (0.2, 1, 2, 5), scale swept"),
)

AVAR_FIGURES = (
    (
        "dirichlet_avar.png",
        (
            ("dirichlet_avar_k3.csv", 0, "shapes (a1, 1, 5)"),
            ("dirichlet_avar_k5.csv", 0, "shapes (a1, 0.2, 1, 2, 5)"),
        ),
    ),
    (
        "mgamma_avar.png",
        (
            ("mgamma_shape_avar_k2.csv", 0, "shapes (a1, 5), scale 1"),
            ("mgamma_shape_avar_k4.csv", 0, "shapes (a1, 1, 2, 5), scale 1"),
            ("mgamma_scale_avar_k2.csv", 2, "shapes (1, 5), scale swept"),
            ("mgamma_scale_avar_k4.csv", 4, "shapes (0.2, 1, 2, 5), scale swept"),
        ),
    ),
)


def _read_rows(path: Path, swept_index: int) -> list[dict]:
    with path.open(newline="") as handle:
        rows = [row for row in csv.DictReader(handle)]
    return [row for row in rows if int(row["param_index"]) == swept_index]


def _series(rows: list[dict], value_key: str) -> dict[str, tuple[list, list]]:
    by_estimator: dict[str, tuple[list, list]] = defaultdict(lambda: ([], []))
    for row in rows:
        xs, ys = by_estimator[row["estimator"]]
        xs.append(float(row["sweep_value"]))
        ys.append(float(row[value_key]))
    return by_estimator


def _plot_lines(ax, by_estimator, ylabel):
    for tag in ESTIMATOR_ORDER:
        if tag in by_estimator:
            xs, ys = by_estimator[tag]
            ax.plot(xs, ys, marker="o", markersize=3, label=tag)
    ax.set_xlabel("swept parameter value")
    ax.set_ylabel(ylabel)
    ax.grid(True, alpha=0.3)


def _plot_metrics(plt, path: Path, swept_index: int, title: str, out: Path) -> None:
    rows = _read_rows(path, swept_index)
    n_values = sorted({int(row["n"]) for row in rows})
    metrics = ("bias", "variance", "rmse")
    fig, axes = plt.subplots(
        len(n_values), len(metrics), figsize=(12, 3.2 * len(n_values)), squeeze=False
    )
    for row_idx, n in enumerate(n_values):
        subset = [row for row in rows if int(row["n"]) == n]
        for col_idx, metric in enumerate(metrics):
            ax = axes[row_idx][col_idx]
            _plot_lines(ax, _series(subset, metric), metric)
            ax.set_title(f"{metric}, n = {n}")
    axes[0][0].legend()
    fig.suptitle(title)
    fig.tight_layout()
    fig.savefig(out, dpi=150)
    plt.close(fig)
    print(f"wrote {out}")


def _plot_avar(plt, data_dir: Path, out: Path, panels) -> None:
    present = [p for p in panels if (data_dir / p[0]).exists()]
    if not present:
        print(f"skipping {out.name}: no input CSVs found")
        return
    fig, axes = plt.subplots(
        1, len(present), figsize=(5.0 * len(present), 3.6), squeeze=False
    )
    for ax, (name, swept_index, title) in zip(axes[0], present):
        rows = _read_rows(data_dir / name, swept_index)
        _plot_lines(ax, _series(rows, "avar"), "asymptotic variance")
        ax.set_title(title)
    axes[0][0].legend()
    fig.tight_layout()
    fig.savefig(out, dpi=150)
    plt.close(fig)
    print(f"wrote {out}")


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--data-dir", default="data", help="directory with the CSVs")
    args = parser.parse_args(argv)

    try:
        import matplotlib
    except ImportError:
        print("matplotlib is required: pip install matplotlib")
        return 2
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    data_dir = Path(args.data_dir)
    for name, swept_index, title in METRICS_FILES:
        path = data_dir / name
        if not path.exists():
            print(f"skipping {name}: not found in {data_dir}")
            continue
        _plot_metrics(plt, path, swept_index, title, path.with_suffix(".png"))
    for out_name, panels in AVAR_FIGURES:
        _plot_avar(plt, data_dir, data_dir / out_name, panels)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
