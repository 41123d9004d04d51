"""Experiment harness: scenarios, comparison runs, CSV/JSONL output and SVG plots."""
from __future__ import annotations

import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import IO, Iterable, Sequence

import numpy as np

from . import baselines, mtpi
from .core import PhaseState, PhysParams, Vec3, energy
from .diagnostics import COLUMNS, METRICS, ErrorTracker, Summary
from .errors import ConfigError, DegenerateReferenceError, KeplerError

METHODS = ("mtpi", "rk4", "leapfrog", "composition4")

# Reference experiment: initial data, parameters and per-method step sizes
REF_Q0 = (100.0, 0.0, 0.1)
REF_P0 = (0.0, 0.01, 0.0)
REF_M = 0.5
REF_K = 3.0
REF_STEPS = {"mtpi": 10.0, "rk4": 0.02, "leapfrog": 0.01, "composition4": 0.02}

PLOT_FLOOR = 1e-18
PLOT_MAX_POINTS = 2000


@dataclass(frozen=True)
class Scenario:
    q0: tuple[float, float, float]
    p0: tuple[float, float, float]
    m: float
    k: float
    method: str
    step: float
    n_steps: int | None = None
    n_periods: float | None = None
    sample_stride: int = 1
    label: str = ""

    def __post_init__(self):
        object.__setattr__(self, "q0", _vec_field("q0", self.q0))
        object.__setattr__(self, "p0", _vec_field("p0", self.p0))
        if not self.label:
            object.__setattr__(self, "label", self.method)

    @property
    def params(self) -> PhysParams:
        return PhysParams(self.m, self.k)

    def validate(self) -> None:
        if self.method not in METHODS:
            raise ConfigError(f"method: expected one of {', '.join(METHODS)}, got {self.method!r}")
        for name in ("m", "k", "step"):
            v = getattr(self, name)
            if not (isinstance(v, (int, float)) and v > 0 and math.isfinite(v)):
                raise ConfigError(f"{name}: must be a positive finite number, got {v!r}")
        if Vec3.of(self.q0).norm() == 0.0:
            raise ConfigError("q0: initial position must not be the force center")
        if (self.n_steps is None) == (self.n_periods is None):
            raise ConfigError("n_steps / n_periods: exactly one duration must be given")
        if self.n_steps is not None and (not isinstance(self.n_steps, int) or self.n_steps < 0):
            raise ConfigError(f"n_steps: must be a non-negative integer, got {self.n_steps!r}")
        if self.n_periods is not None:
            if not (self.n_periods >= 0 and math.isfinite(self.n_periods)):
                raise ConfigError(f"n_periods: must be non-negative, got {self.n_periods!r}")
            if not energy(PhaseState.of(self.q0, self.p0), self.params) < 0.0:
                raise ConfigError("n_periods: duration in periods requires a bound orbit (energy < 0)")
        if not isinstance(self.sample_stride, int) or self.sample_stride < 1:
            raise ConfigError(f"sample_stride: must be a positive integer, got {self.sample_stride!r}")


def _vec_field(name, v) -> tuple[float, float, float]:
    try:
        x, y, z = (float(c) for c in v)
    except (TypeError, ValueError):
        raise ConfigError(f"{name}: expected three numbers, got {v!r}") from None
    return (x, y, z)


@dataclass
class RunResult:
    scenario: Scenario
    samples: np.ndarray = field(repr=False)
    summary: Summary
    steps_per_period: float
    n_steps: int
    period: float | None = None
    delta: float | None = None

    def column(self, name: str) -> np.ndarray:
        return self.samples[:, COLUMNS.index(name)]


@dataclass
class FailedRun:
    scenario: Scenario
    error: KeplerError


def run_scenario(scenario: Scenario) -> RunResult:
    """Propagate one scenario and evaluate the diagnostics at its sampling stride."""
    scenario.validate()
    params = scenario.params
    state = PhaseState.of(scenario.q0, scenario.p0)
    E0 = energy(state, params)
    period = None
    if E0 < 0.0:
        period = 2.0 * math.pi * params.k * math.sqrt(params.m) / (2.0 * math.sqrt(2.0) * abs(E0) ** 1.5)
    delta = None
    if scenario.method == "mtpi":
        angles = mtpi.init(scenario.q0, scenario.p0, scenario.step, params).angles
        delta = angles.delta
        spp = mtpi.steps_per_period(angles)
    else:
        spp = period / scenario.step if period is not None else math.nan
    if scenario.n_steps is not None:
        n = scenario.n_steps
    else:
        n = math.ceil(scenario.n_periods * spp)
    if scenario.method == "mtpi":
        rows, _ = mtpi.trajectory(scenario.q0, scenario.p0, scenario.step, params, n, scenario.sample_stride)
    else:
        rows = baselines.trajectory(
            scenario.method, scenario.q0, scenario.p0, params, scenario.step, n, scenario.sample_stride
        )
    tracker = ErrorTracker(scenario.q0, scenario.p0, params, h0=scenario.step)
    tracker.observe_rows(rows[1:])
    return RunResult(scenario, tracker.samples(), tracker.summarize(), spp, n, period, delta)


def run_comparison(scenarios: Sequence[Scenario], max_workers: int | None = None) -> list[RunResult | FailedRun]:
    """Run scenarios independently; results keep the input order.

    A failing scenario yields a :class:`FailedRun` in its slot instead of
    aborting the others.
    """
    if not scenarios:
        raise ConfigError("scenarios: at least one scenario is required")

    def one(sc: Scenario):
        try:
            return run_scenario(sc)
        except ConfigError:
            raise
        except KeplerError as exc:
            return FailedRun(sc, exc)

    workers = max_workers or min(len(scenarios), os.cpu_count() or 1)
    if workers <= 1:
        return [one(sc) for sc in scenarios]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(one, scenarios))


def _fmt(x: float) -> str:
    return format(x, ".17g")


def emit_csv(result: RunResult, stream: IO[str]) -> None:
    """Write samples as CSV; reals carry 17 significant digits so re-parsing is exact."""
    stream.write(",".join(COLUMNS) + "\n")
    for row in result.samples.tolist():
        stream.write(str(int(row[0])) + "," + ",".join(_fmt(v) for v in row[1:]) + "\n")


def emit_jsonl(result: RunResult, stream: IO[str]) -> None:
    """One JSON object per sample, keyed by the CSV column names; NaN becomes null."""
    for row in result.samples.tolist():
        obj = {"n": int(row[0])}
        for name, v in zip(COLUMNS[1:], row[1:]):
            obj[name] = None if math.isnan(v) else v
        stream.write(json.dumps(obj) + "\n")


def read_csv(stream: IO[str]) -> np.ndarray:
    header = stream.readline().rstrip("\n").split(",")
    if tuple(header) != COLUMNS:
        raise ValueError(f"unexpected CSV header {header}")
    rows = [[float(v) for v in line.split(",")] for line in stream.read().splitlines() if line]
    return np.array(rows, dtype=float).reshape(-1, len(COLUMNS))


def read_jsonl(stream: IO[str]) -> np.ndarray:
    rows = []
    for line in stream:
        if line.strip():
            obj = json.loads(line)
            rows.append([math.nan if obj[c] is None else float(obj[c]) for c in COLUMNS])
    return np.array(rows, dtype=float).reshape(-1, len(COLUMNS))


# --- SVG rendering ---

_PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#17becf")
_W, _H = 960, 600
_LEFT, _RIGHT, _TOP, _BOTTOM = 90, 760, 40, 540


def _esc(text: str) -> str:
    return text.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;").replace('"', "&quot;")


def _thin(x: np.ndarray, y: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """First point plus the last point of each of PLOT_MAX_POINTS - 1 x bins (y is non-decreasing)."""
    if x.size <= PLOT_MAX_POINTS:
        return x, y
    span = x[-1] - x[0]
    if span > 0:
        bins = np.minimum(np.floor((x - x[0]) / span * (PLOT_MAX_POINTS - 1)), PLOT_MAX_POINTS - 2).astype(np.int64)
    else:
        bins = np.zeros(x.size, np.int64)
    last = np.flatnonzero(np.diff(bins, append=bins[-1] + 1))
    keep = np.unique(np.concatenate(([0], last)))
    return x[keep], y[keep]


def _svg_open(title: str) -> list[str]:
    return [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {_W} {_H}" width="{_W}" height="{_H}">',
        f'<rect x="0" y="0" width="{_W}" height="{_H}" fill="white"/>',
        f'<text x="{(_LEFT + _RIGHT) / 2:.0f}" y="24" text-anchor="middle" font-family="sans-serif" '
        f'font-size="16">{_esc(title)}</text>',
        f'<rect x="{_LEFT}" y="{_TOP}" width="{_RIGHT - _LEFT}" height="{_BOTTOM - _TOP}" '
        'fill="none" stroke="black"/>',
    ]


def _legend(labels: Iterable[str]) -> list[str]:
    out = []
    for i, label in enumerate(labels):
        y = _TOP + 20 + 22 * i
        color = _PALETTE[i % len(_PALETTE)]
        out.append(f'<line x1="{_RIGHT + 15}" y1="{y}" x2="{_RIGHT + 45}" y2="{y}" stroke="{color}" stroke-width="2"/>')
        out.append(f'<text x="{_RIGHT + 52}" y="{y + 4}" font-family="sans-serif" font-size="13">{_esc(label)}</text>')
    return out


def emit_plot(results: Sequence[RunResult], metric: str, destination: str | os.PathLike) -> None:
    """Write a log-scale plot of the running supremum of ``metric`` against time."""
    if metric not in METRICS:
        raise ValueError(f"unknown metric {metric!r}")
    if not results:
        raise ValueError("nothing to plot")
    series = []
    for res in results:
        vals = res.column(metric)
        if vals.size == 0:
            raise ValueError(f"{res.scenario.label}: no samples")
        if np.isnan(vals).all():
            raise DegenerateReferenceError(f"{metric} is disabled for {res.scenario.label}")
        sup = np.maximum.accumulate(np.nan_to_num(vals, nan=0.0))
        x, y = _thin(res.column("t"), np.log10(np.maximum(sup, PLOT_FLOOR)))
        series.append((res.scenario.label, x, y))

    xmin = min(float(s[1][0]) for s in series)
    xmax = max(float(s[1][-1]) for s in series)
    if xmax <= xmin:
        xmax = xmin + 1.0
    ymin = math.floor(min(float(s[2].min()) for s in series))
    ymax = math.ceil(max(float(s[2].max()) for s in series))
    if ymax <= ymin:
        ymax = ymin + 1

    def px(x):
        return _LEFT + (x - xmin) / (xmax - xmin) * (_RIGHT - _LEFT)

    def py(y):
        return _BOTTOM - (y - ymin) / (ymax - ymin) * (_BOTTOM - _TOP)

    parts = _svg_open(f"running supremum of {metric}")
    step = max(1, math.ceil((ymax - ymin) / 12))
    for dec in range(ymin, ymax + 1, step):
        y = py(dec)
        parts.append(f'<line x1="{_LEFT}" y1="{y:.2f}" x2="{_RIGHT}" y2="{y:.2f}" stroke="#dddddd"/>')
        parts.append(f'<text x="{_LEFT - 8}" y="{y + 4:.2f}" text-anchor="end" font-family="sans-serif" '
                     f'font-size="12">1e{dec}</text>')
    for i in range(6):
        xv = xmin + (xmax - xmin) * i / 5
        x = px(xv)
        parts.append(f'<text x="{x:.2f}" y="{_BOTTOM + 18}" text-anchor="middle" font-family="sans-serif" '
                     f'font-size="12">{xv:.4g}</text>')
    parts.append(f'<text x="{(_LEFT + _RIGHT) / 2:.0f}" y="{_BOTTOM + 45}" text-anchor="middle" '
                 'font-family="sans-serif" font-size="13">t</text>')
    for i, (label, x, y) in enumerate(series):
        pts = " ".join(f"{px(a):.2f},{py(b):.2f}" for a, b in zip(x.tolist(), y.tolist()))
        color = _PALETTE[i % len(_PALETTE)]
        parts.append(f'<polyline data-label="{_esc(label)}" fill="none" stroke="{color}" stroke-width="1.5" '
                     f'points="{pts}"/>')
    parts += _legend(s[0] for s in series)
    parts.append("</svg>")
    Path(destination).write_text("\n".join(parts) + "\n", encoding="utf-8")


def emit_orbit_plot(results: Sequence[RunResult], destination: str | os.PathLike) -> None:
    """Trajectories projected on the x-y plane, equal axis scaling."""
    series = []
    for res in results:
        x, y = res.column("qx"), res.column("qy")
        if x.size > PLOT_MAX_POINTS * 4:
            idx = np.unique(np.linspace(0, x.size - 1, PLOT_MAX_POINTS * 4).astype(np.int64))
            x, y = x[idx], y[idx]
        series.append((res.scenario.label, x, y))
    xs = np.concatenate([s[1] for s in series])
    ys = np.concatenate([s[2] for s in series])
    cx, cy = (xs.max() + xs.min()) / 2, (ys.max() + ys.min()) / 2
    half = max(xs.max() - xs.min(), ys.max() - ys.min(), 1e-300) / 2 * 1.05
    scale = min(_RIGHT - _LEFT, _BOTTOM - _TOP) / (2 * half)
    ox, oy = (_LEFT + _RIGHT) / 2, (_TOP + _BOTTOM) / 2
    parts = _svg_open("trajectories, x-y projection")
    for i, (label, x, y) in enumerate(series):
        pts = " ".join(f"{ox + (a - cx) * scale:.2f},{oy - (b - cy) * scale:.2f}"
                       for a, b in zip(x.tolist(), y.tolist()))
        color = _PALETTE[i % len(_PALETTE)]
        parts.append(f'<polyline data-label="{_esc(label)}" fill="none" stroke="{color}" stroke-width="1" '
                     f'points="{pts}"/>')
    parts.append(f'<circle cx="{ox - cx * scale:.2f}" cy="{oy + cy * scale:.2f}" r="3" fill="black"/>')
    parts += _legend(s[0] for s in series)
    parts.append("</svg>")
    Path(destination).write_text("\n".join(parts) + "\n", encoding="utf-8")


# --- experiment drivers ---

SUMMARY_COLUMNS = ("label", "method", "step", "n_steps", "steps_per_period", "delta") + METRICS


def write_outputs(results: Sequence[RunResult | FailedRun], out_dir: str | os.PathLike,
                  fmt: str = "csv", plot: bool = False) -> list[Path]:
    """Write per-run samples, ``summary.csv`` and (optionally) plots; returns the paths written."""
    if fmt not in ("csv", "jsonl"):
        raise ConfigError(f"format: expected csv or jsonl, got {fmt!r}")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    ok = [r for r in results if isinstance(r, RunResult)]
    written = []
    for res in ok:
        path = out / f"{res.scenario.label}.{fmt}"
        with open(path, "w", newline="", encoding="utf-8") as fh:
            (emit_csv if fmt == "csv" else emit_jsonl)(res, fh)
        written.append(path)
    path = out / "summary.csv"
    with open(path, "w", newline="", encoding="utf-8") as fh:
        fh.write(",".join(SUMMARY_COLUMNS) + "\n")
        for res in ok:
            s = res.summary
            vals = [res.scenario.label, res.scenario.method, _fmt(res.scenario.step), str(res.n_steps),
                    _fmt(res.steps_per_period), "" if res.delta is None else _fmt(res.delta)]
            vals += ["" if getattr(s, mname) is None else _fmt(getattr(s, mname)) for mname in METRICS]
            fh.write(",".join(vals) + "\n")
    written.append(path)
    if plot and ok:
        for metric in METRICS:
            usable = [r for r in ok if not np.isnan(r.column(metric)).all()]
            if usable:
                path = out / f"{metric}.svg"
                emit_plot(usable, metric, path)
                written.append(path)
        path = out / "orbit_xy.svg"
        emit_orbit_plot(ok, path)
        written.append(path)
    return written


def paper_scenarios(periods: float = 5.0, stride: int = 1) -> list[Scenario]:
    """The four in-scope methods on the reference initial data at the reference step sizes."""
    return [
        Scenario(REF_Q0, REF_P0, REF_M, REF_K, method, REF_STEPS[method],
                 n_periods=periods, sample_stride=stride, label=method)
        for method in METHODS
    ]


def paper_experiment(periods: float = 5.0, out_dir: str | os.PathLike | None = None, fmt: str = "csv",
                     plot: bool = True, stride: int = 1) -> list[RunResult | FailedRun]:
    results = run_comparison(paper_scenarios(periods, stride))
    if out_dir is not None:
        write_outputs(results, out_dir, fmt, plot)
    return results
