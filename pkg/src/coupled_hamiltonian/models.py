"""Concrete systems: spring-mass pair, simply supported beam, and their coupling.

The beam ``rho A u_tt = -EI u_xxxx`` on ``[0, L]`` with ``u = u_xx = 0`` at both
ends is semi-discretized on ``n_x`` uniform intervals. Unknowns are the
interior displacements ``u_1..u_{n_x-1}`` and the momentum densities ``v_i``;
each pair carries weight ``dx`` in the symplectic form.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .core import CoordinateLayout, CoupledSystem, Interaction, PhaseState, Subsystem
from .exceptions import LayoutError


def _positive(obj, *names):
    for name in names:
        value = getattr(obj, name)
        if not (np.isfinite(value) and value > 0):
            raise ValueError(f"{type(obj).__name__}.{name} must be positive, got {value!r}")


@dataclass(frozen=True)
class SpringMassParams:
    m1: float = 0.1
    m2: float = 0.1
    k: float = 0.5

    def __post_init__(self):
        _positive(self, "m1", "m2", "k")


@dataclass(frozen=True)
class BeamParams:
    rho: float = 10.0
    area: float = 1.0
    modulus: float = 1.0
    inertia: float = 1.0
    length: float = 1.0
    n_x: int = 50

    def __post_init__(self):
        _positive(self, "rho", "area", "modulus", "inertia", "length")
        if int(self.n_x) != self.n_x or self.n_x < 4:
            raise ValueError(f"BeamParams.n_x must be an integer >= 4, got {self.n_x!r}")

    @property
    def dx(self):
        return self.length / self.n_x

    @property
    def n_interior(self):
        return self.n_x - 1

    @property
    def rho_a(self):
        return self.rho * self.area

    @property
    def ei(self):
        return self.modulus * self.inertia


@dataclass(frozen=True)
class CouplingSpec:
    n_b: int = 10
    b: float = 0.2

    def validate(self, beam):
        if int(self.n_b) != self.n_b or not 1 <= self.n_b <= beam.n_x - 1:
            raise ValueError(f"n_b must lie in [1, {beam.n_x - 1}], got {self.n_b!r}")
        if abs(self.n_b * beam.dx - self.b) >= beam.dx:
            warnings.warn(f"coupling index n_b={self.n_b} (x={self.n_b * beam.dx:g}) "
                          f"is not within one cell of b={self.b:g}", stacklevel=3)


def _with_ghosts(u):
    # u_0 = u_N = 0 and the mirror ghosts u_{-1} = -u_1, u_{N+1} = -u_{N-1}
    return np.concatenate(([-u[0], 0.0], u, [0.0, -u[-1]]))


def apply_delta4(u, dx, n_x=None):
    """Fourth difference of the interior values ``u`` under the simply supported closure."""
    u = np.asarray(u, dtype=float)
    if u.ndim != 1 or u.size < 1 or (n_x is not None and u.size != n_x - 1):
        raise LayoutError(f"expected {'n_x - 1' if n_x is None else n_x - 1} interior values, got shape {u.shape}")
    g = _with_ghosts(u)
    return (g[4:] - 4.0 * g[3:-1] + 6.0 * g[2:-2] - 4.0 * g[1:-3] + g[:-4]) / dx**4


def delta4_at(u, i, dx):
    """``apply_delta4(u, dx)[i]`` using only the five stencil points."""
    n = u.size
    def at(j):
        if j == -1 or j == n:
            return 0.0
        if j == -2:
            return -u[0]
        if j == n + 1:
            return -u[n - 1]
        return u[j]
    return (at(i + 2) - 4.0 * at(i + 1) + 6.0 * u[i] - 4.0 * at(i - 1) + at(i - 2)) / dx**4


def second_difference(u, dx):
    """``(u_{i+1} - 2u_i + u_{i-1}) / dx^2`` at every interior node, u_0 = u_N = 0."""
    g = np.concatenate(([0.0], u, [0.0]))
    return (g[2:] - 2.0 * g[1:-1] + g[:-2]) / dx**2


def beam_energy(u, v, p):
    """Discrete elastic energy ``H_el`` of the beam."""
    curvature = second_difference(u, p.dx)
    return 0.5 * p.dx * (np.dot(v, v) / p.rho_a + p.ei * np.dot(curvature, curvature))


def spring_mass_energy(q, p, sp):
    return p[0] ** 2 / (2 * sp.m1) + p[1] ** 2 / (2 * sp.m2) + 0.5 * sp.k * (q[1] - q[0]) ** 2


def build_spring_mass(sp):
    """Two point masses joined by a linear spring; positions (q1, q2)."""

    def grad_q(q, p):
        stretch = sp.k * (q[1] - q[0])
        return np.array([-stretch, stretch])

    def grad_p(q, p):
        return np.array([p[0] / sp.m1, p[1] / sp.m2])

    return Subsystem(2, lambda q, p: spring_mass_energy(q, p, sp), grad_q, grad_p,
                     separable=True, name="spring_mass")


def build_beam(p):
    """Semi-discretized simply supported Euler-Bernoulli beam over ``(u, v)``.

    The weighted gradients are ``EI * delta4(u)`` and ``v / (rho A)``, so that
    ``dv/dt = -EI delta4(u)`` as in the semi-discrete beam equation.
    """
    dx, ei, rho_a = p.dx, p.ei, p.rho_a
    return Subsystem(
        p.n_interior,
        lambda u, v: beam_energy(u, v, p),
        lambda u, v: ei * apply_delta4(u, dx),
        lambda u, v: np.asarray(v) / rho_a,
        separable=True,
        name="beam",
    )


def effective_coupling_mass(p, sp):
    """Reduced mass ``rho A dx m1 / (rho A dx + m1)`` of the node-mass pair."""
    node_mass = p.rho_a * p.dx
    return node_mass * sp.m1 / (node_mass + sp.m1)


def coupling_force(u, q, p, sp, c):
    """Magnitude ``f`` of the force the mass ``m1`` exerts on beam node ``n_b``.

    Chosen so that ``v_nb/(rho A) - p1/m1`` has zero time derivative: the beam
    node receives ``+f/dx`` and the mass ``-f``.
    """
    d4 = delta4_at(np.asarray(u, dtype=float), c.n_b - 1, p.dx)
    return effective_coupling_mass(p, sp) * (p.ei / p.rho_a * d4 + sp.k / sp.m1 * (q[1] - q[0]))


def beam_spring_layout(p):
    n = p.n_interior
    return CoordinateLayout(n, n, 2, 2, np.r_[np.full(n, p.dx), 1.0, 1.0])


def build_coupled_beam_spring(p, sp, c, c1=0.0, c2=0.0):
    """Beam coupled at node ``n_b`` to the mass ``m1`` of a spring-mass pair.

    Registers the conserved quantities ``u_nb - q1 - c1`` and
    ``v_nb/(rho A) - p1/m1 - c2``.
    """
    c.validate(p)
    layout = beam_spring_layout(p)
    L = layout
    nb = c.n_b - 1
    n = p.n_interior
    dx = p.dx

    def joint(z):
        f = coupling_force(z[L.q1], z[L.q2], p, sp, c)
        beam_force = np.zeros(n)
        beam_force[nb] = f / dx
        return beam_force, np.array([-f, 0.0])

    interaction = Interaction.from_joint(joint, label="beam_spring")
    u_col = L.q1.start + nb
    v_col = L.p1.start + nb
    q1_col = L.q2.start
    p1_col = L.p2.start

    def position_gap(z):
        return z[u_col] - z[q1_col] - c1

    def velocity_gap(z):
        return z[v_col] / p.rho_a - z[p1_col] / sp.m1 - c2

    return CoupledSystem(layout, build_beam(p), build_spring_mass(sp), interaction,
                         (position_gap, velocity_gap), name="beam_spring",
                         constraint_names=("constraint_1", "constraint_2"))


def build_initial_state(p, sp, c, q2_0=-1.0):
    """Beam at rest and undeformed, mass ``m1`` at rest at 0, ``q2 = q2_0``."""
    z = np.zeros(beam_spring_layout(p).dim)
    z[2 * p.n_interior + 1] = q2_0
    return PhaseState(beam_spring_layout(p), z, 0.0)


def harmonic_oscillator(name="oscillator"):
    """``H = (q^2 + p^2) / 2`` in one dimension."""
    return Subsystem(1, lambda q, p: 0.5 * float(q[0] ** 2 + p[0] ** 2),
                     lambda q, p: np.array(q, dtype=float),
                     lambda q, p: np.array(p, dtype=float),
                     separable=True, name=name)


def build_harmonic():
    """A single unit harmonic oscillator (second block empty)."""
    layout = CoordinateLayout(1, 1, 0, 0)
    return CoupledSystem(layout, harmonic_oscillator(), Subsystem.empty(), name="harmonic")


def build_coupled_oscillators(coupling=0.0, gamma=0.0):
    """Two unit oscillators with a spring of stiffness ``coupling`` between them.

    ``gamma`` adds the non-Hamiltonian force ``gamma * p1`` on the first
    oscillator.
    """
    layout = CoordinateLayout(1, 1, 1, 1)
    L = layout

    def joint(z):
        stretch = coupling * (z[L.q2][0] - z[L.q1][0])
        return np.array([stretch + gamma * z[L.p1][0]]), np.array([-stretch])

    if coupling == 0.0 and gamma == 0.0:
        interaction = Interaction.zero(layout)
    else:
        interaction = Interaction.from_joint(joint, label=f"spring k={coupling:g}, gamma={gamma:g}")
    return CoupledSystem(layout, harmonic_oscillator("oscillator_1"),
                         harmonic_oscillator("oscillator_2"), interaction,
                         name="coupled_oscillators")


def build_spring_mass_system(sp):
    """The spring-mass pair on its own (second block empty)."""
    layout = CoordinateLayout(2, 2, 0, 0)
    return CoupledSystem(layout, build_spring_mass(sp), Subsystem.empty(), name="spring_mass")
