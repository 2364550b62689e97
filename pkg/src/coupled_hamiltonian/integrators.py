"""One-step maps and a trajectory driver.

Stormer-Verlet is the kick-drift-kick variant, with the interaction force
applied in the kicks together with ``-dH/dq``. Implicit midpoint works for any
smooth field; RK4 is the non-symplectic baseline.
"""

from __future__ import annotations

import weakref
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .core import PhaseState
from .exceptions import CapabilityError, ConvergenceError, NumericError, UsageError


class IntegratorKind(str, Enum):
    STORMER_VERLET = "stormer_verlet"
    IMPLICIT_MIDPOINT = "implicit_midpoint"
    RK4 = "rk4"


@dataclass(frozen=True)
class IntegratorSpec:
    kind: IntegratorKind = IntegratorKind.STORMER_VERLET
    dt: float = 1e-3
    fixed_point_tol: float = 1e-12
    max_iterations: int = 50

    def __post_init__(self):
        object.__setattr__(self, "kind", IntegratorKind(self.kind))
        if not self.dt > 0:
            raise ValueError(f"dt must be positive, got {self.dt!r}")
        if not self.fixed_point_tol > 0:
            raise ValueError(f"fixed_point_tol must be positive, got {self.fixed_point_tol!r}")
        if int(self.max_iterations) != self.max_iterations or self.max_iterations < 1:
            raise ValueError(f"max_iterations must be a positive integer, got {self.max_iterations!r}")


@dataclass
class Trajectory:
    """Snapshots recorded every ``stride`` steps (first and last always kept).

    ``energies`` has columns ``(H1, H2, H_total)``. ``max_abs_dH`` and
    ``max_abs_constraints`` are taken over *every* step when the run was made
    with ``track_every_step=True``, otherwise over the snapshots.
    """

    times: np.ndarray
    states: list
    energies: np.ndarray
    constraint_residuals: np.ndarray
    stride: int = 1
    dt: float = 0.0
    max_abs_dH: float = field(default=float("nan"))
    max_abs_constraints: np.ndarray = field(default_factory=lambda: np.zeros(0))

    def __len__(self):
        return len(self.times)

    @property
    def final(self):
        return self.states[-1]

    def array(self):
        """Snapshot states stacked as rows."""
        return np.array([s.z for s in self.states])


_verlet_ok = weakref.WeakKeyDictionary()


def _require_verlet(sys):
    cached = _verlet_ok.get(sys)
    if cached is None:
        cached = _probe_verlet(sys)
        _verlet_ok[sys] = cached
    if cached is not True:
        raise CapabilityError(f"Stormer-Verlet cannot integrate {sys.name or 'this system'}: "
                              f"{cached}; use implicit_midpoint instead")


def _probe_verlet(sys):
    if not (sys.sub1.separable and sys.sub2.separable):
        return "a subsystem Hamiltonian is not separable"
    if sys.interaction.is_zero:
        return True
    L = sys.layout
    rng = np.random.default_rng(12345)
    pcols = L.p_columns
    for _ in range(3):
        z = rng.uniform(-1.0, 1.0, L.dim)
        base = np.concatenate(sys.forces(z))
        z2 = z.copy()
        z2[pcols] += rng.uniform(-1.0, 1.0, pcols.size)
        moved = np.concatenate(sys.forces(z2))
        scale = max(1.0, np.max(np.abs(base), initial=0.0))
        if np.max(np.abs(moved - base), initial=0.0) > 1e-12 * scale:
            return "the interaction depends on momenta"
    return True


def _kick_force(sys, z):
    """Momentum rates ``(-dH1/dq1 + f1, -dH2/dq2 + f2)`` at positions in ``z``."""
    L = sys.layout
    gq1, _ = sys.sub1.gradients(z[L.q1], z[L.p1], L.weights1)
    gq2, _ = sys.sub2.gradients(z[L.q2], z[L.p2], L.weights2)
    f1, f2 = sys.forces(z)
    return -gq1 + f1, -gq2 + f2


def _verlet(sys, z, dt, force=None):
    """Advance the flat state by one kick-drift-kick step.

    Returns the new state and the force at the new positions (reusable as the
    first kick of the next step).
    """
    L = sys.layout
    z = z.copy()
    a1, a2 = _kick_force(sys, z) if force is None else force
    half = 0.5 * dt
    z[L.p1] += half * a1
    z[L.p2] += half * a2
    _, gp1 = sys.sub1.gradients(z[L.q1], z[L.p1], L.weights1)
    _, gp2 = sys.sub2.gradients(z[L.q2], z[L.p2], L.weights2)
    z[L.q1] += dt * gp1
    z[L.q2] += dt * gp2
    a1, a2 = _kick_force(sys, z)
    z[L.p1] += half * a1
    z[L.p2] += half * a2
    if not np.all(np.isfinite(z)):
        raise NumericError("non-finite state after Stormer-Verlet step")
    return z, (a1, a2)


def stormer_verlet_step(sys, s, dt):
    """One Stormer-Verlet step (separable subsystems, position-only interaction)."""
    _require_verlet(sys)
    z, _ = _verlet(sys, s.z, dt)
    return s.replace(z=z, t=s.t + dt)


def _midpoint(sys, z, dt, tol, max_iterations):
    z_new = z + dt * sys.vector_field(z)
    residual = np.inf
    for _ in range(max_iterations):
        z_next = z + dt * sys.vector_field(0.5 * (z + z_new))
        residual = np.max(np.abs(z_next - z_new), initial=0.0)
        z_new = z_next
        if residual <= tol:
            return z_new
        if not np.isfinite(residual):
            break
    raise ConvergenceError(f"implicit midpoint fixed-point iteration did not converge in "
                           f"{max_iterations} iterations (last residual {residual:.3e})",
                           residual=residual)


def implicit_midpoint_step(sys, s, dt, spec=None):
    """One implicit midpoint step, solved by fixed-point iteration."""
    spec = IntegratorSpec(IntegratorKind.IMPLICIT_MIDPOINT, dt=1.0) if spec is None else spec
    if dt == 0:
        return s.replace(t=s.t)
    z = _midpoint(sys, s.z, dt, spec.fixed_point_tol, spec.max_iterations)
    return s.replace(z=z, t=s.t + dt)


def _rk4(sys, z, dt):
    k1 = sys.vector_field(z)
    k2 = sys.vector_field(z + 0.5 * dt * k1)
    k3 = sys.vector_field(z + 0.5 * dt * k2)
    k4 = sys.vector_field(z + dt * k3)
    return z + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def rk4_step(sys, s, dt):
    """Classical fourth-order Runge-Kutta step."""
    return s.replace(z=_rk4(sys, s.z, dt), t=s.t + dt)


def step_function(spec):
    """Return ``step(sys, state, dt)`` for the integrator named in ``spec``."""
    if spec.kind is IntegratorKind.STORMER_VERLET:
        return stormer_verlet_step
    if spec.kind is IntegratorKind.IMPLICIT_MIDPOINT:
        return lambda sys, s, dt: implicit_midpoint_step(sys, s, dt, spec)
    return rk4_step


def integrate(sys, spec, s0, n_steps, stride=1, track_every_step=False, on_snapshot=None):
    """Apply ``n_steps`` steps of size ``spec.dt`` starting from ``s0``.

    Snapshot time ``n`` is ``t0 + n*dt`` rather than an accumulated sum.
    Errors raised by a step are re-raised with the step index attached.
    """
    if int(n_steps) != n_steps or n_steps < 1:
        raise UsageError(f"n_steps must be a positive integer, got {n_steps!r}")
    if int(stride) != stride or stride < 1:
        raise UsageError(f"stride must be a positive integer, got {stride!r}")
    n_steps, stride = int(n_steps), int(stride)
    dt = spec.dt
    kind = spec.kind
    if kind is IntegratorKind.STORMER_VERLET:
        _require_verlet(sys)

    t0 = s0.t
    z = s0.z.copy()
    h0 = sum(sys.energies(z))
    max_dh = 0.0
    max_g = np.abs(sys.constraint_values(z))
    times, states, energies, residuals = [], [], [], []

    def record(n, z):
        state = s0.replace(z=z, t=t0 + n * dt)
        h1, h2 = sys.energies(z)
        times.append(state.t)
        states.append(state)
        energies.append((h1, h2, h1 + h2))
        residuals.append(sys.constraint_values(z))
        if on_snapshot is not None:
            on_snapshot(n, state)

    record(0, z)
    force = None
    for n in range(1, n_steps + 1):
        try:
            if kind is IntegratorKind.STORMER_VERLET:
                z, force = _verlet(sys, z, dt, force)
            elif kind is IntegratorKind.IMPLICIT_MIDPOINT:
                z = _midpoint(sys, z, dt, spec.fixed_point_tol, spec.max_iterations)
            else:
                z = _rk4(sys, z, dt)
            if not np.all(np.isfinite(z)):
                raise NumericError("non-finite state")
            if track_every_step:
                max_dh = max(max_dh, abs(sum(sys.energies(z)) - h0))
                if sys.constraints:
                    max_g = np.maximum(max_g, np.abs(sys.constraint_values(z)))
            if n % stride == 0 or n == n_steps:
                record(n, z)
        except (NumericError, ConvergenceError) as exc:
            exc.step_index = n
            exc.args = (f"step {n}: {exc.args[0] if exc.args else exc}",) + exc.args[1:]
            raise

    energies = np.array(energies)
    residuals = np.array(residuals).reshape(len(times), len(sys.constraints))
    if not track_every_step:
        max_dh = float(np.max(np.abs(energies[:, 2] - h0)))
        max_g = np.max(np.abs(residuals), axis=0)
    return Trajectory(np.array(times), states, energies, residuals, stride=stride, dt=dt,
                      max_abs_dH=max_dh, max_abs_constraints=max_g)
