"""Band computation and figure rendering for experiment result CSVs.

The input schema is the flat per-round file written by the experiment
harness, one row per (replication, round, agent)::

    replication,t,agent,phase,assigned_arm,oracle_arm,regret_instant,regret_cum,optimal_changed

Bands are always recomputed from the raw ``regret_instant`` rows, never
from anything pre-aggregated: per replication the instantaneous regret is
accumulated into a cumulative trace, and the per-round minimum, mean, and
maximum over replications form the band. Tick marks are drawn once per row
whose ``optimal_changed`` field is set, on the panel of that row's agent.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from math import fsum
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

EXPECTED_HEADER = (
    "replication",
    "t",
    "agent",
    "phase",
    "assigned_arm",
    "oracle_arm",
    "regret_instant",
    "regret_cum",
    "optimal_changed",
)

PNG_METADATA = {"Software": "regretplot"}
DPI = 110


class SchemaError(ValueError):
    """The CSV header does not match the documented schema."""


class EmptyInputError(ValueError):
    """The CSV contains a header but no data rows."""


@dataclass(frozen=True)
class PlotSpec:
    """What to render: inputs become figure columns, agents become rows."""

    inputs: tuple[Path, ...]
    out: Path
    agents: tuple[int, ...] | None = None
    ticks: bool = True
    title: str | None = None


@dataclass(frozen=True)
class ResultTable:
    """Parsed columns of one result CSV."""

    path: Path
    replication: np.ndarray
    round_index: np.ndarray
    agent: np.ndarray
    regret_instant: np.ndarray
    optimal_changed: np.ndarray

    @property
    def agent_ids(self) -> tuple[int, ...]:
        return tuple(int(a) for a in np.unique(self.agent))


@dataclass(frozen=True)
class PanelSeries:
    """One panel's recomputed band and tick positions."""

    variant: str
    agent: int
    rounds: np.ndarray
    minimum: np.ndarray
    mean: np.ndarray
    maximum: np.ndarray
    tick_rounds: tuple[int, ...] = field(default_factory=tuple)

    @property
    def tick_count(self) -> int:
        return len(self.tick_rounds)


@dataclass(frozen=True)
class RenderResult:
    out: Path
    panels: tuple[PanelSeries, ...]

    @property
    def tick_count(self) -> int:
        return sum(panel.tick_count for panel in self.panels)


def load_result_table(path: str | Path) -> ResultTable:
    """Read and validate one harness CSV."""
    path = Path(path)
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = tuple(next(reader))
        except StopIteration:
            raise SchemaError(f"{path}: file is empty, expected header row") from None
        if header != EXPECTED_HEADER:
            missing = [c for c in EXPECTED_HEADER if c not in header]
            unexpected = [c for c in header if c not in EXPECTED_HEADER]
            raise SchemaError(
                f"{path}: header mismatch; missing columns {missing}, "
                f"unexpected columns {unexpected}"
            )
        rows = list(reader)
    if not rows:
        raise EmptyInputError(f"{path}: no data rows")
    data = np.array(rows, dtype=object)
    return ResultTable(
        path=path,
        replication=data[:, 0].astype(int),
        round_index=data[:, 1].astype(int),
        agent=data[:, 2].astype(int),
        regret_instant=data[:, 6].astype(float),
        optimal_changed=data[:, 8].astype(int),
    )


def compute_bands(table: ResultTable, agent: int) -> PanelSeries:
    """Min/mean/max cumulative-regret band for one agent, from raw rows."""
    mask = table.agent == agent
    if not mask.any():
        raise EmptyInputError(f"{table.path}: no rows for agent {agent}")
    reps = np.unique(table.replication[mask])
    rounds = np.unique(table.round_index[mask])
    order = {t: i for i, t in enumerate(rounds)}
    traces = np.full((len(reps), len(rounds)), np.nan)
    for r_pos, rep in enumerate(reps):
        rep_mask = mask & (table.replication == rep)
        t_idx = np.array([order[t] for t in table.round_index[rep_mask]])
        instant = np.empty(len(rounds))
        instant[t_idx] = table.regret_instant[rep_mask]
        traces[r_pos] = np.cumsum(instant)
    mean = np.array([fsum(traces[:, c]) for c in range(traces.shape[1])]) / len(reps)
    ticks = tuple(int(t) for t in table.round_index[mask & (table.optimal_changed == 1)])
    return PanelSeries(
        variant=table.path.stem,
        agent=int(agent),
        rounds=rounds,
        minimum=traces.min(axis=0),
        mean=mean,
        maximum=traces.max(axis=0),
        tick_rounds=ticks,
    )


def render_regret_curves(spec: PlotSpec) -> RenderResult:
    """Render the figure described by ``spec`` and return the plotted series."""
    tables = [load_result_table(path) for path in spec.inputs]
    agents = spec.agents
    if agents is None:
        agents = tables[0].agent_ids
    panels: list[PanelSeries] = []
    n_rows, n_cols = len(agents), len(tables)
    fig, axes = plt.subplots(
        n_rows,
        n_cols,
        figsize=(4.2 * n_cols, 2.8 * n_rows),
        squeeze=False,
        sharex="col",
    )
    for col, table in enumerate(tables):
        for row, agent in enumerate(agents):
            series = compute_bands(table, agent)
            panels.append(series)
            ax = axes[row][col]
            ax.fill_between(
                series.rounds,
                series.minimum,
                series.maximum,
                alpha=0.3,
                color="tab:blue",
                linewidth=0,
            )
            ax.plot(series.rounds, series.mean, color="tab:blue", linewidth=1.4)
            if spec.ticks and series.tick_rounds:
                ax.plot(
                    series.tick_rounds,
                    np.full(len(series.tick_rounds), 0.02),
                    linestyle="none",
                    marker="|",
                    markersize=7,
                    color="black",
                    transform=ax.get_xaxis_transform(),
                )
            ax.set_ylabel(f"agent {agent} cumulative regret")
            if row == n_rows - 1:
                ax.set_xlabel("round")
            if row == 0:
                ax.set_title(series.variant, fontsize=10)
    if spec.title:
        fig.suptitle(spec.title)
    fig.tight_layout()
    out = Path(spec.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(out, dpi=DPI, metadata=PNG_METADATA)
    plt.close(fig)
    return RenderResult(out=out, panels=tuple(panels))
