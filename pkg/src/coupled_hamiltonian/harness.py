"""Simulation, symplecticity checks and order studies driven by a config."""

from __future__ import annotations

import csv
import io
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .integrators import integrate
from .registry import build_model
from .symplectic import check_symplectic, check_symplectic_on_manifold, sample_states

RATIO_BOUNDS = (3.5, 4.5)


def fmt(x):
    """Shortest round-trip decimal representation of a binary64 value."""
    return repr(float(x))


def run_simulation(config, instance=None):
    """Integrate the configured model; returns ``(instance, trajectory)``."""
    instance = build_model(config.model, config.params) if instance is None else instance
    traj = integrate(instance.system, config.integrator, instance.initial_state,
                     config.n_steps, config.record_stride)
    return instance, traj


def csv_columns(instance):
    cols = ["t", *instance.observables]
    cols += [name for name in instance.energy_names if name]
    cols += ["H_total", "dH_total", *instance.system.constraint_names]
    return cols


def trajectory_rows(instance, traj):
    h0 = traj.energies[0, 2]
    for t, state, (h1, h2, h), g in zip(traj.times, traj.states, traj.energies,
                                        traj.constraint_residuals):
        row = [t, *(f(state.z) for f in instance.observables.values())]
        row += [e for e, name in zip((h1, h2), instance.energy_names) if name]
        row += [h, h - h0, *g]
        yield [fmt(x) for x in row]


def trajectory_csv(instance, traj):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(csv_columns(instance))
    writer.writerows(trajectory_rows(instance, traj))
    return buf.getvalue()


def gnuplot_script(csv_path, columns):
    """Two panels: displacements over time, and energy columns over time."""
    def plot(names):
        return "plot " + ", ".join(
            f"'{csv_path}' using 1:{columns.index(n) + 1} with lines title '{n}'" for n in names)

    disp = [c for c in ("u_nb", "q1", "q2") if c in columns]
    energy = [c for c in ("H_el", "H_sp", "H_total") if c in columns]
    lines = ["set datafile separator ','", "set xlabel 't'", "set multiplot layout 2,1",
             plot(disp), plot(energy), "unset multiplot"]
    return "\n".join(lines) + "\n"


def run_check(config, constrained=False, samples=None, tol=None, instance=None):
    instance = build_model(config.model, config.params) if instance is None else instance
    samples = config.samples if samples is None else samples
    tol = config.tol if tol is None else tol
    states = sample_states(instance.initial_state, samples, config.half_width, config.seed)
    check = check_symplectic_on_manifold if constrained else check_symplectic
    return check(instance.system, states, tol, seed=config.seed)


@dataclass
class OrderStudyReport:
    dts: list
    max_abs_dH: list
    ratios: list
    slope: float
    status: str

    @property
    def passed(self):
        return self.status == "PASS"

    def to_csv(self):
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["dt", "max_abs_dH", "ratio_to_next"])
        for i, (dt, dh) in enumerate(zip(self.dts, self.max_abs_dH)):
            ratio = fmt(self.ratios[i]) if i < len(self.ratios) else ""
            writer.writerow([fmt(dt), fmt(dh), ratio])
        return buf.getvalue()

    def summary(self):
        ratios = ", ".join(f"{r:.4f}" for r in self.ratios)
        return f"{self.status}: ratios [{ratios}], log-log slope {self.slope:.4f}"


def _max_energy_deviation(config, instance):
    traj = integrate(instance.system, config.integrator, instance.initial_state,
                     config.n_steps, stride=config.n_steps, track_every_step=True)
    return traj.max_abs_dH


def order_study(config, dts, jobs=1):
    """``max |H(t) - H(0)|`` over the fixed horizon ``config.total_time`` per step size.

    ``ratios[i] = max_abs_dH[i] / max_abs_dH[i+1]``; a second-order method
    shows ``ratio / (dt_i / dt_{i+1})^2`` near 1. Non-decreasing step sizes
    make the study INVALID.
    """
    dts = [float(dt) for dt in dts]
    if len(dts) < 2:
        raise ValueError("an order study needs at least two step sizes")
    configs = [config.with_dt(dt) for dt in dts]
    instance = build_model(config.model, config.params)
    if jobs > 1:
        with ThreadPoolExecutor(jobs) as pool:
            dhs = list(pool.map(lambda c: _max_energy_deviation(c, instance), configs))
    else:
        dhs = [_max_energy_deviation(c, instance) for c in configs]
    ratios = [a / b if b != 0 else (1.0 if a == 0 else math.inf)
              for a, b in zip(dhs, dhs[1:])]
    if any(b >= a for a, b in zip(dts, dts[1:])):
        status = "INVALID"
        slope = math.nan
    else:
        positive = all(d > 0 for d in dhs)
        slope = float(np.polyfit(np.log(dts), np.log(dhs), 1)[0]) if positive else math.nan
        lo, hi = RATIO_BOUNDS
        ok = all(lo <= r / (a / b) ** 2 * 4.0 <= hi
                 for r, a, b in zip(ratios, dts, dts[1:]))
        status = "PASS" if ok else "FAIL"
    return OrderStudyReport(dts, dhs, ratios, slope, status)
