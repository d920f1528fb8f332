"""Batch report rendering: human-readable summary, CSV tables, figures.

Given one or more solve reports this module emits

* ``summary.txt`` -- one status line per run, sorted by config hash;
* ``degree_residuals.csv`` -- per-degree rows: scalar-data sup, the
  below-degree deviation of the conjugated cocycle, the per-degree data
  obstruction residual, plus the run-level verification residual
  (columns: config_hash, system, d, N, L, degree, data_sup,
  sub_degree_deviation, data_poo_residual, verify_residual, status);
* ``seminorm_vs_majorant.csv`` -- one row per solved coefficient
  (columns: config_hash, component, index, degree, h_seminorm, majorant_g,
  margin, status);
* ``degree_residuals.png`` and ``seminorm_vs_majorant.png`` -- the same two
  tables as figures, rendered to files next to the CSV output.

Row order is deterministic: runs sort by config hash, rows by degree and
canonical index.
"""

from __future__ import annotations

import csv
from pathlib import Path
from typing import Mapping, Sequence

__all__ = ["summarize_runs", "write_csv_tables", "render_figures", "write_report_bundle"]

DEGREE_COLUMNS = ["config_hash", "system", "d", "N", "L", "degree", "data_sup",
                  "sub_degree_deviation", "data_poo_residual", "verify_residual",
                  "status"]
MAJORANT_COLUMNS = ["config_hash", "component", "index", "degree", "h_seminorm",
                    "majorant_g", "margin", "status"]


def _sorted_runs(reports: Sequence[Mapping]) -> list[Mapping]:
    return sorted(reports, key=lambda r: r.get("config_hash", ""))


def _status(flag) -> str:
    if flag is None:
        return "N/A"
    return "PASS" if flag else "FAIL"


def summarize_runs(reports: Sequence[Mapping]) -> str:
    lines = []
    for rep in _sorted_runs(reports):
        sysname = rep.get("system", {}).get("type", "?")
        verify = rep.get("verify", {})
        holder = rep.get("holder", {})
        lines.append(
            f"{rep.get('config_hash', '?')[:12]:<12}  {sysname:<5}  "
            f"d={rep.get('d', '?')} N={rep.get('N', '?')} L={rep.get('L', '?')}  "
            f"verify={verify.get('max_residual', float('nan')):.3e}  "
            f"K={holder.get('K', float('nan')):.4g}  "
            f"S={holder.get('S', float('nan')):.4g}  "
            f"{_status(rep.get('passed'))}")
    if not lines:
        lines.append("(no runs)")
    return "\n".join(lines) + "\n"


def degree_rows(reports: Sequence[Mapping]) -> list[list]:
    rows = []
    for rep in _sorted_runs(reports):
        per_degree_poo = rep.get("data_poo", {}).get("per_degree", {})
        verify_res = rep.get("verify", {}).get("max_residual", "")
        for degree, diag in sorted(rep.get("degrees", {}).items(),
                                   key=lambda kv: int(kv[0])):
            rows.append([
                rep.get("config_hash", ""),
                rep.get("system", {}).get("type", ""),
                rep.get("d", ""), rep.get("N", ""), rep.get("L", ""),
                int(degree),
                diag.get("data_sup", ""),
                diag.get("sub_degree_deviation", ""),
                per_degree_poo.get(degree, ""),
                verify_res,
                _status(rep.get("passed")),
            ])
    return rows


def majorant_rows(reports: Sequence[Mapping]) -> list[list]:
    rows = []
    for rep in _sorted_runs(reports):
        for row in rep.get("majorant", {}).get("rows", []):
            g = row["g"]
            semi = row["h_seminorm"]
            rows.append([
                rep.get("config_hash", ""),
                row["component"],
                "".join(str(e) for e in row["index"]),
                row["degree"],
                semi,
                g,
                g - semi,
                _status(row["pass"]),
            ])
    return rows


def write_csv_tables(reports: Sequence[Mapping], outdir) -> list[Path]:
    """Write both CSV tables (headers always present, even for no runs)."""
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    paths = []
    for name, header, rows in [
        ("degree_residuals.csv", DEGREE_COLUMNS, degree_rows(reports)),
        ("seminorm_vs_majorant.csv", MAJORANT_COLUMNS, majorant_rows(reports)),
    ]:
        path = outdir / name
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(header)
            writer.writerows(rows)
        paths.append(path)
    return paths


def render_figures(reports: Sequence[Mapping], outdir) -> list[Path]:
    """Render the residual and domination figures as PNG files.

    Skipped (returning an empty list) when there are no runs to draw.
    """
    reports = _sorted_runs(reports)
    if not reports:
        return []
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    paths = []

    fig, ax = plt.subplots(figsize=(7.0, 4.2))
    for rep in reports:
        degrees = sorted(int(k) for k in rep.get("degrees", {}))
        if not degrees:
            continue
        label = f"{rep.get('config_hash', '?')[:8]} d={rep.get('d')}"
        devs = [max(rep["degrees"][str(k)]["sub_degree_deviation"], 1e-18)
                for k in degrees]
        poo = [max(rep.get("data_poo", {}).get("per_degree", {}).get(str(k), 0.0), 1e-18)
               for k in degrees]
        ax.semilogy(degrees, devs, "o-", label=f"{label} conj. deviation")
        ax.semilogy(degrees, poo, "s--", label=f"{label} data POO")
    ax.set_xlabel("degree")
    ax.set_ylabel("residual")
    ax.set_title("Per-degree residuals")
    ax.grid(True, which="both", alpha=0.3)
    ax.legend(fontsize=7)
    fig.tight_layout()
    path = outdir / "degree_residuals.png"
    fig.savefig(path, dpi=150)
    plt.close(fig)
    paths.append(path)

    fig, ax = plt.subplots(figsize=(6.0, 4.5))
    drew = False
    for rep in reports:
        rows = rep.get("majorant", {}).get("rows", [])
        if not rows:
            continue
        drew = True
        xs = [max(r["h_seminorm"], 1e-18) for r in rows]
        ys = [r["g"] for r in rows]
        ax.loglog(xs, ys, "o", alpha=0.7,
                  label=rep.get("config_hash", "?")[:8])
    if drew:
        lo, hi = ax.get_xlim()
        ax.loglog([lo, hi], [lo, hi], "k:", label="equality")
        ax.set_xlabel("empirical coefficient seminorm")
        ax.set_ylabel("majorant bound g")
        ax.set_title("Seminorm vs majorant domination")
        ax.grid(True, which="both", alpha=0.3)
        ax.legend(fontsize=7)
        fig.tight_layout()
        path = outdir / "seminorm_vs_majorant.png"
        fig.savefig(path, dpi=150)
        paths.append(path)
    plt.close(fig)
    return paths


def write_report_bundle(reports: Sequence[Mapping], outdir,
                        figures: bool = True) -> dict:
    """Summary + CSV tables (+ figures) in one directory; returns the paths."""
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    summary = summarize_runs(reports)
    summary_path = outdir / "summary.txt"
    summary_path.write_text(summary)
    csv_paths = write_csv_tables(reports, outdir)
    figure_paths = render_figures(reports, outdir) if figures else []
    return {
        "summary": summary,
        "summary_path": summary_path,
        "csv_paths": csv_paths,
        "figure_paths": figure_paths,
    }
