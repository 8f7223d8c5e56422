"""Trajectory CSV, run metrics and SVG charts.

Metrics are computed from a :class:`~optcoord.sim.TrajectoryLog` plus the graph
and step size only, so a log read back from ``trajectory.csv`` reproduces the
same numbers.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .costs import CostSet
from .graph import LaplacianView
from .optimizer import PrimalDualState, converge_to_saddle, lyapunov_value
from .sim import TrajectoryLog

THRESHOLDS = (1e-2, 1e-4, 1e-6)
LYAPUNOV_SLACK = 1e-12


# -- CSV --------------------------------------------------------------------

def _fmt(v: float) -> str:
    return repr(float(v))


def csv_header(n_max: int, q: int, p_max: int) -> list[str]:
    cols = ["round", "agent"]
    cols += [f"x{i}" for i in range(n_max)]
    cols += [f"y{i}" for i in range(q)]
    cols += [f"xi{i}" for i in range(q)]
    cols += [f"lambda{i}" for i in range(q)]
    cols += [f"u{i}" for i in range(p_max)]
    cols += [f"e{i}" for i in range(q)]
    cols += [f"r{i}" for i in range(q)]
    return cols


def write_csv(log: TrajectoryLog, path) -> None:
    """One row per (recorded round, agent); shorter state/input vectors are right-padded with blanks."""
    n_agents, q = log.y[0].shape
    n_max = max(x.size for x in log.x[0])
    p_max = max(u.size for u in log.u[0])
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(csv_header(n_max, q, p_max))
        for r, k in enumerate(log.rounds):
            for i in range(n_agents):
                x, u = log.x[r][i], log.u[r][i]
                row = [str(k), str(i)]
                row += [_fmt(v) for v in x] + [""] * (n_max - x.size)
                row += [_fmt(v) for v in log.y[r][i]]
                row += [_fmt(v) for v in log.xi[r][i]]
                row += [_fmt(v) for v in log.lam[r][i]]
                row += [_fmt(v) for v in u] + [""] * (p_max - u.size)
                row += [_fmt(v) for v in log.e[r][i]]
                row += [_fmt(v) for v in log.references[r][i]]
                w.writerow(row)


def read_csv(path, lap: LaplacianView) -> TrajectoryLog:
    """Rebuild a log from ``trajectory.csv``; diagnostics are recomputed with ``lap``."""
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    if not rows:
        raise ValueError(f"{path} has no data rows")

    def vec(row, prefix):
        vals = []
        i = 0
        while f"{prefix}{i}" in row:
            cell = row[f"{prefix}{i}"]
            if cell != "":
                vals.append(float(cell))
            i += 1
        return np.array(vals)

    by_round: dict[int, list[dict]] = {}
    for row in rows:
        by_round.setdefault(int(row["round"]), []).append(row)
    log = TrajectoryLog()
    for k in sorted(by_round):
        agents = sorted(by_round[k], key=lambda r: int(r["agent"]))
        y = np.array([vec(r, "y") for r in agents])
        xi = np.array([vec(r, "xi") for r in agents])
        refs = np.array([vec(r, "r") for r in agents])
        log.rounds.append(k)
        log.x.append([vec(r, "x") for r in agents])
        log.y.append(y)
        log.xi.append(xi)
        log.lam.append(np.array([vec(r, "lambda") for r in agents]))
        log.u.append([vec(r, "u") for r in agents])
        log.e.append(np.array([vec(r, "e") for r in agents]))
        log.references.append(refs)
        ystar = refs.mean(axis=0)
        log.optimum.append(ystar)
        log.consensus_error.append(float(np.linalg.norm(lap.entries @ xi)))
        log.mean_output_distance.append(float(np.linalg.norm(y.mean(axis=0) - ystar)))
    return log


# -- metrics ----------------------------------------------------------------

@dataclass
class RunReport:
    final_round: int
    final_consensus_error: float
    final_max_tracking_error: float
    final_optimum_distance: float
    final_max_output_error: float
    convergence_round: dict[str, int | None]
    lyapunov_monotone: bool
    lyapunov_max_increase: float
    lyapunov_from_round: int
    wall_clock_seconds: float = 0.0
    extra: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "final_round": self.final_round,
            "final_consensus_error": self.final_consensus_error,
            "final_max_tracking_error": self.final_max_tracking_error,
            "final_optimum_distance": self.final_optimum_distance,
            "final_max_output_error": self.final_max_output_error,
            "convergence_round": self.convergence_round,
            "lyapunov_monotone": self.lyapunov_monotone,
            "lyapunov_max_increase": self.lyapunov_max_increase,
            "lyapunov_from_round": self.lyapunov_from_round,
            "wall_clock_seconds": self.wall_clock_seconds,
            **self.extra,
        }


def _per_row_errors(log: TrajectoryLog) -> tuple[np.ndarray, np.ndarray]:
    e = np.array(log.e)
    track = np.linalg.norm(e, axis=2).max(axis=1)
    out = np.linalg.norm(np.array(log.y) - np.array(log.optimum)[:, None, :], axis=2).max(axis=1)
    return track, out


def settling_round(log: TrajectoryLog, threshold: float) -> int | None:
    """First logged round after which consensus, tracking and output errors all stay below ``threshold``."""
    track, out = _per_row_errors(log)
    worst = np.maximum(np.maximum(track, out), np.array(log.consensus_error))
    above = np.nonzero(worst >= threshold)[0]
    if above.size == 0:
        return log.rounds[0]
    if above[-1] == len(log) - 1:
        return None
    return log.rounds[above[-1] + 1]


def last_phase_start(log: TrajectoryLog) -> int:
    """Index of the first logged row that carries the final reference set."""
    refs = log.references
    idx = len(refs) - 1
    while idx > 0 and np.array_equal(refs[idx - 1], refs[-1]):
        idx -= 1
    return idx


def lyapunov_series(log: TrajectoryLog, lap: LaplacianView, beta: float,
                    start: int = 0) -> tuple[np.ndarray, tuple[np.ndarray, np.ndarray]]:
    """``V(xi(k), lambda(k+1))`` for logged rows ``start..`` of one phase.

    ``lambda(k+1) = lambda(k) + beta L xi(k)`` is rebuilt from row ``k`` itself.
    The saddle is the phase's own limit: the coordinator is stepped on from the
    last logged row until both equilibrium residuals are below 1e-10 and then
    a little further, so the reference point sits at its fixed point.
    """
    costs = CostSet.from_references(log.references[-1])
    last = PrimalDualState(log.xi[-1], log.lam[-1], beta)
    saddle = converge_to_saddle(last, lap, costs, tol=1e-10)
    try:
        saddle = converge_to_saddle(saddle, lap, costs, tol=1e-13, max_steps=5000)
    except RuntimeError:
        pass  # residual floor above 1e-13 is rounding, not a failure
    ref = (saddle.primal, saddle.multiplier)
    values = []
    for r in range(start, len(log)):
        xi = log.xi[r]
        lam_next = log.lam[r] + beta * (lap.entries @ xi)
        values.append(lyapunov_value(xi, lam_next, ref, lap, beta))
    return np.array(values), ref


def build_report(log: TrajectoryLog, lap: LaplacianView, beta: float) -> RunReport:
    track, out = _per_row_errors(log)
    start = last_phase_start(log)
    values, _ = lyapunov_series(log, lap, beta, start)
    incr = np.diff(values)
    max_inc = float(incr.max()) if incr.size else 0.0
    return RunReport(
        final_round=int(log.rounds[-1]),
        final_consensus_error=float(log.consensus_error[-1]),
        final_max_tracking_error=float(track[-1]),
        final_optimum_distance=float(log.mean_output_distance[-1]),
        final_max_output_error=float(out[-1]),
        convergence_round={f"{t:.0e}": settling_round(log, t) for t in THRESHOLDS},
        lyapunov_monotone=bool(max_inc <= LYAPUNOV_SLACK),
        lyapunov_max_increase=max_inc,
        lyapunov_from_round=int(log.rounds[start]),
    )


# -- SVG --------------------------------------------------------------------

_PALETTE = ("#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
            "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf")


def _thin(xs: np.ndarray, ys: np.ndarray, limit: int = 1500):
    if xs.size <= limit:
        return xs, ys
    idx = np.unique(np.linspace(0, xs.size - 1, limit).astype(int))
    return xs[idx], ys[idx]


def svg_chart(series, title: str, xlabel: str, ylabel: str,
              width: int = 640, height: int = 420, markers=()) -> str:
    """Polyline chart. ``series`` is a list of ``(label, xs, ys, style)`` with style ``"solid"``/``"dashed"``.

    ``markers`` holds ``(x, y, colour)`` points drawn as small circles.
    """
    margin_l, margin_r, margin_t, margin_b = 70, 120, 40, 50
    allx = np.concatenate([np.asarray(s[1], float) for s in series] + [np.array([m[0] for m in markers])])
    ally = np.concatenate([np.asarray(s[2], float) for s in series] + [np.array([m[1] for m in markers])])
    x0, x1 = float(allx.min()), float(allx.max())
    y0, y1 = float(ally.min()), float(ally.max())
    if x1 == x0:
        x0, x1 = x0 - 1, x1 + 1
    if y1 == y0:
        y0, y1 = y0 - 1, y1 + 1
    pad = 0.05 * (y1 - y0)
    y0, y1 = y0 - pad, y1 + pad
    pw, ph = width - margin_l - margin_r, height - margin_t - margin_b

    def sx(v):
        return margin_l + (v - x0) / (x1 - x0) * pw

    def sy(v):
        return margin_t + (1 - (v - y0) / (y1 - y0)) * ph

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
           f'viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="11">',
           f'<rect width="{width}" height="{height}" fill="white"/>',
           f'<text x="{width / 2:.1f}" y="20" text-anchor="middle" font-size="14">{title}</text>',
           f'<rect x="{margin_l}" y="{margin_t}" width="{pw}" height="{ph}" fill="none" stroke="black"/>']
    for t in range(5):
        xv = x0 + (x1 - x0) * t / 4
        yv = y0 + (y1 - y0) * t / 4
        out.append(f'<text x="{sx(xv):.1f}" y="{margin_t + ph + 15}" text-anchor="middle">{xv:.4g}</text>')
        out.append(f'<text x="{margin_l - 5}" y="{sy(yv) + 4:.1f}" text-anchor="end">{yv:.4g}</text>')
    out.append(f'<text x="{margin_l + pw / 2:.1f}" y="{height - 10}" text-anchor="middle">{xlabel}</text>')
    out.append(f'<text x="15" y="{margin_t + ph / 2:.1f}" text-anchor="middle" '
               f'transform="rotate(-90 15 {margin_t + ph / 2:.1f})">{ylabel}</text>')
    for n, (label, xs, ys, style) in enumerate(series):
        colour = _PALETTE[n % len(_PALETTE)] if style != "dashed" else "#444444"
        xs, ys = _thin(np.asarray(xs, float), np.asarray(ys, float))
        pts = " ".join(f"{sx(a):.2f},{sy(b):.2f}" for a, b in zip(xs, ys))
        dash = ' stroke-dasharray="5,4"' if style == "dashed" else ""
        out.append(f'<polyline fill="none" stroke="{colour}" stroke-width="1.4"{dash} points="{pts}"/>')
        ly = margin_t + 12 + 14 * n
        if ly < height - margin_b:
            out.append(f'<line x1="{width - margin_r + 8}" y1="{ly - 4}" x2="{width - margin_r + 24}" '
                       f'y2="{ly - 4}" stroke="{colour}"{dash}/>')
            out.append(f'<text x="{width - margin_r + 28}" y="{ly}">{label}</text>')
    for mx, my, colour in markers:
        out.append(f'<circle cx="{sx(mx):.2f}" cy="{sy(my):.2f}" r="3.5" fill="{colour}"/>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def write_plots(log: TrajectoryLog, out_dir) -> list[Path]:
    """Top view of outputs, outputs / states / multipliers against round."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    rounds = np.array(log.rounds, dtype=float)
    y = np.array(log.y)
    lam = np.array(log.lam)
    opt = np.array(log.optimum)
    n_agents, q = y.shape[1], y.shape[2]
    written = []

    if q >= 2:
        series = [(f"agent {i}", y[:, i, 0], y[:, i, 1], "solid") for i in range(n_agents)]
        markers = [(y[0, i, 0], y[0, i, 1], "black") for i in range(n_agents)]
        markers += [(y[-1, i, 0], y[-1, i, 1], "red") for i in range(n_agents)]
        svg = svg_chart(series, "Output trajectories (top view)", "y[0]", "y[1]", markers=markers)
        written.append(_write(out_dir / "trajectories_xy.svg", svg))

    for c in range(q):
        series = [(f"agent {i}", rounds, y[:, i, c], "solid") for i in range(n_agents)]
        series.append(("optimum", rounds, opt[:, c], "dashed"))
        written.append(_write(out_dir / f"outputs_axis{c}.svg",
                              svg_chart(series, f"Output component {c}", "round", f"y[{c}]")))
        series = [(f"agent {i}", rounds, lam[:, i, c], "solid") for i in range(n_agents)]
        written.append(_write(out_dir / f"lambda_axis{c}.svg",
                              svg_chart(series, f"Multiplier component {c}", "round", f"lambda[{c}]")))

    n_max = max(x.size for x in log.x[0])
    for c in range(n_max):
        series = [(f"agent {i}", rounds, np.array([log.x[r][i][c] for r in range(len(log))]), "solid")
                  for i in range(n_agents) if log.x[0][i].size > c]
        written.append(_write(out_dir / f"states_component{c}.svg",
                              svg_chart(series, f"State component {c}", "round", f"x[{c}]")))
    return written


def _write(path: Path, text: str) -> Path:
    path.write_text(text)
    return path
