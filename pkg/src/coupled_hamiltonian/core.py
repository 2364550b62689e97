"""Coupled canonical Hamiltonian systems with interaction forces.

A coupled system is made of two Hamiltonian subsystems living on the blocks
``(q1, p1)`` and ``(q2, p2)`` of one flat state vector, plus interaction
forces ``f1``, ``f2`` entering the momentum equations::

    dq1/dt =  dH1/dp1            dq2/dt =  dH2/dp2
    dp1/dt = -dH1/dq1 + f1       dp2/dt = -dH2/dq2 + f2

Gradients are *weighted*: a coordinate pair with weight ``w`` (``dx`` for a
semi-discretized field, 1 for a point mass) uses ``(1/w) dH/dz``, which is the
quantity the canonical equations consume.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from .exceptions import LayoutError, NumericError

FD_STEP_SCALE = np.cbrt(np.finfo(float).eps)

ScalarFn = Callable[[np.ndarray, np.ndarray], float]
VectorFn = Callable[[np.ndarray, np.ndarray], np.ndarray]
StateFn = Callable[[np.ndarray], np.ndarray]


def fd_step(x):
    """Central-difference step per coordinate: cbrt(eps) * max(1, |x_i|)."""
    return FD_STEP_SCALE * np.maximum(1.0, np.abs(np.asarray(x, dtype=float)))


def fd_gradient(h, x):
    """Central-difference gradient of the scalar function ``h`` at ``x``."""
    x = np.array(x, dtype=float)
    steps = fd_step(x)
    grad = np.empty_like(x)
    for i, step in enumerate(steps):
        xp = x.copy()
        xm = x.copy()
        xp[i] += step
        xm[i] -= step
        hp, hm = h(xp), h(xm)
        if not (np.isfinite(hp) and np.isfinite(hm)):
            raise NumericError(f"non-finite function value near coordinate {i}")
        grad[i] = (hp - hm) / (xp[i] - xm[i])
    return grad


@dataclass(frozen=True, eq=False)
class CoordinateLayout:
    """Block partition ``(q1, p1, q2, p2)`` of the flat state vector.

    ``weights`` holds one positive entry per canonical pair, ordered as the
    q1 coordinates followed by the q2 coordinates.
    """

    dim_q1: int
    dim_p1: int
    dim_q2: int
    dim_p2: int
    weights: Optional[Sequence[float]] = None

    def __post_init__(self):
        dims = (self.dim_q1, self.dim_p1, self.dim_q2, self.dim_p2)
        if any(int(d) != d or d < 0 for d in dims):
            raise LayoutError(f"block sizes must be nonnegative integers, got {dims}")
        if self.dim_q1 != self.dim_p1 or self.dim_q2 != self.dim_p2:
            raise LayoutError("q and p blocks must pair up: "
                              f"dim_q1={self.dim_q1}, dim_p1={self.dim_p1}, "
                              f"dim_q2={self.dim_q2}, dim_p2={self.dim_p2}")
        n_pairs = self.dim_q1 + self.dim_q2
        if self.weights is None:
            w = np.ones(n_pairs)
        else:
            w = np.array(self.weights, dtype=float).ravel()
        if w.shape != (n_pairs,):
            raise LayoutError(f"expected {n_pairs} weights, got {w.size}")
        if not np.all(np.isfinite(w)) or np.any(w <= 0):
            raise LayoutError("weights must be finite and positive")
        w.flags.writeable = False
        object.__setattr__(self, "weights", w)

    @property
    def dim(self):
        return self.dim_q1 + self.dim_p1 + self.dim_q2 + self.dim_p2

    @property
    def q1(self):
        return slice(0, self.dim_q1)

    @property
    def p1(self):
        return slice(self.dim_q1, self.dim_q1 + self.dim_p1)

    @property
    def q2(self):
        start = self.dim_q1 + self.dim_p1
        return slice(start, start + self.dim_q2)

    @property
    def p2(self):
        start = self.dim_q1 + self.dim_p1 + self.dim_q2
        return slice(start, start + self.dim_p2)

    @property
    def weights1(self):
        return self.weights[: self.dim_q1]

    @property
    def weights2(self):
        return self.weights[self.dim_q1:]

    @property
    def q_columns(self):
        """State indices of all q coordinates (q1 then q2)."""
        return np.r_[np.arange(self.q1.start, self.q1.stop),
                     np.arange(self.q2.start, self.q2.stop)]

    @property
    def p_columns(self):
        """State indices of all p coordinates, paired with :attr:`q_columns`."""
        return np.r_[np.arange(self.p1.start, self.p1.stop),
                     np.arange(self.p2.start, self.p2.stop)]

    def symplectic_matrix(self):
        """Matrix ``W`` of the weighted form sum_a w_a dq_a ^ dp_a."""
        W = np.zeros((self.dim, self.dim))
        qc, pc = self.q_columns, self.p_columns
        W[qc, pc] = self.weights
        W[pc, qc] = -self.weights
        return W

    def check(self, z):
        z = np.asarray(z, dtype=float)
        if z.shape != (self.dim,):
            raise LayoutError(f"state has shape {z.shape}, layout expects ({self.dim},)")
        return z

    def state(self, z, t=0.0):
        return PhaseState(self, z, t)

    def zeros(self, t=0.0):
        return PhaseState(self, np.zeros(self.dim), t)


@dataclass(frozen=True, eq=False)
class PhaseState:
    """Immutable snapshot ``(z, t)`` of a coupled system."""

    layout: CoordinateLayout
    z: np.ndarray
    t: float = 0.0

    def __post_init__(self):
        z = np.array(self.layout.check(self.z), dtype=float)
        if not np.all(np.isfinite(z)):
            raise NumericError("state contains non-finite entries")
        z.flags.writeable = False
        object.__setattr__(self, "z", z)
        object.__setattr__(self, "t", float(self.t))

    @property
    def q1(self):
        return self.z[self.layout.q1]

    @property
    def p1(self):
        return self.z[self.layout.p1]

    @property
    def q2(self):
        return self.z[self.layout.q2]

    @property
    def p2(self):
        return self.z[self.layout.p2]

    def replace(self, z=None, t=None):
        return PhaseState(self.layout,
                          self.z if z is None else z,
                          self.t if t is None else t)


@dataclass(frozen=True, eq=False)
class Subsystem:
    """One canonical Hamiltonian block.

    ``grad_q`` and ``grad_p`` return weighted gradients. When they are omitted,
    finite differences of ``hamiltonian`` are used instead (divided by the
    layout weights).
    """

    dim_q: int
    hamiltonian: ScalarFn
    grad_q: Optional[VectorFn] = None
    grad_p: Optional[VectorFn] = None
    separable: bool = False
    name: str = ""

    def energy(self, q, p):
        return float(self.hamiltonian(q, p))

    def gradients(self, q, p, weights=None):
        """Return ``(dH/dq, dH/dp)`` in the weighted convention."""
        if self.grad_q is not None and self.grad_p is not None:
            return (np.asarray(self.grad_q(q, p), dtype=float),
                    np.asarray(self.grad_p(q, p), dtype=float))
        n = self.dim_q
        if n == 0:
            return np.zeros(0), np.zeros(0)
        g = fd_gradient(lambda x: self.hamiltonian(x[:n], x[n:]), np.r_[q, p])
        if weights is not None:
            g /= np.r_[weights, weights]
        gq = g[:n] if self.grad_q is None else np.asarray(self.grad_q(q, p), dtype=float)
        gp = g[n:] if self.grad_p is None else np.asarray(self.grad_p(q, p), dtype=float)
        return gq, gp

    @classmethod
    def empty(cls):
        """A zero-dimensional subsystem, for single-block models."""
        return cls(0, lambda q, p: 0.0, lambda q, p: np.zeros(0),
                   lambda q, p: np.zeros(0), separable=True, name="empty")


def probe_separable(sub, rng=None, n_probes=3, weights=None):
    """Check that ``grad_q`` ignores p and ``grad_p`` ignores q at random points."""
    rng = np.random.default_rng(0) if rng is None else rng
    n = sub.dim_q
    for _ in range(n_probes):
        q, p = rng.uniform(-1, 1, n), rng.uniform(-1, 1, n)
        gq, gp = sub.gradients(q, p, weights)
        gq2, _ = sub.gradients(q, rng.uniform(-1, 1, n), weights)
        _, gp2 = sub.gradients(rng.uniform(-1, 1, n), p, weights)
        scale_q = 1e-12 * max(1.0, np.max(np.abs(gq), initial=0.0))
        scale_p = 1e-12 * max(1.0, np.max(np.abs(gp), initial=0.0))
        if sub.grad_q is None or sub.grad_p is None:
            scale_q = scale_p = 1e-6 * max(1.0, np.max(np.abs(np.r_[gq, gp]), initial=0.0))
        if np.max(np.abs(gq - gq2), initial=0.0) > scale_q:
            return False
        if np.max(np.abs(gp - gp2), initial=0.0) > scale_p:
            return False
    return True


@dataclass(frozen=True, eq=False)
class Interaction:
    """Interaction forces added to the momentum equations.

    ``f1`` and ``f2`` take the full state vector. ``joint``, when given,
    returns both blocks from a single evaluation and is preferred by
    :meth:`forces`; models whose two forces share one expensive scalar use it
    so both blocks see bit-identical values.
    """

    f1: StateFn
    f2: StateFn
    label: str = ""
    joint: Optional[Callable[[np.ndarray], tuple]] = None
    is_zero: bool = False

    def forces(self, z):
        if self.joint is not None:
            a, b = self.joint(z)
        else:
            a, b = self.f1(z), self.f2(z)
        return np.asarray(a, dtype=float), np.asarray(b, dtype=float)

    @classmethod
    def zero(cls, layout):
        n1, n2 = layout.dim_p1, layout.dim_p2
        return cls(lambda z: np.zeros(n1), lambda z: np.zeros(n2),
                   label="none", is_zero=True)

    @classmethod
    def from_joint(cls, joint, label=""):
        return cls(lambda z: joint(z)[0], lambda z: joint(z)[1],
                   label=label, joint=joint)


@dataclass(frozen=True, eq=False)
class CoupledSystem:
    """Two subsystems on one layout, coupled through ``interaction``.

    ``constraints`` are scalar functions of the flat state whose values stay
    constant along the flow; they define the invariant manifold used by the
    constrained symplecticity check.
    """

    layout: CoordinateLayout
    sub1: Subsystem
    sub2: Subsystem
    interaction: Optional[Interaction] = None
    constraints: tuple = ()
    name: str = ""
    constraint_names: tuple = ()

    def __post_init__(self):
        if self.sub1.dim_q != self.layout.dim_q1:
            raise LayoutError(f"sub1 has dim_q={self.sub1.dim_q}, layout dim_q1={self.layout.dim_q1}")
        if self.sub2.dim_q != self.layout.dim_q2:
            raise LayoutError(f"sub2 has dim_q={self.sub2.dim_q}, layout dim_q2={self.layout.dim_q2}")
        if self.interaction is None:
            object.__setattr__(self, "interaction", Interaction.zero(self.layout))
        object.__setattr__(self, "constraints", tuple(self.constraints))
        names = tuple(self.constraint_names) or tuple(
            f"constraint_{i + 1}" for i in range(len(self.constraints)))
        if len(names) != len(self.constraints):
            raise LayoutError("one name per constraint expected")
        object.__setattr__(self, "constraint_names", names)

    def with_interaction(self, interaction):
        return CoupledSystem(self.layout, self.sub1, self.sub2, interaction,
                             self.constraints, self.name, self.constraint_names)

    def gradients(self, z):
        """Weighted gradients ``(gq1, gp1, gq2, gp2)`` at the flat state ``z``."""
        L = self.layout
        gq1, gp1 = self.sub1.gradients(z[L.q1], z[L.p1], L.weights1)
        gq2, gp2 = self.sub2.gradients(z[L.q2], z[L.p2], L.weights2)
        return gq1, gp1, gq2, gp2

    def forces(self, z):
        """Interaction forces with shape checks."""
        f1, f2 = self.interaction.forces(z)
        if f1.shape != (self.layout.dim_p1,) or f2.shape != (self.layout.dim_p2,):
            raise LayoutError(f"interaction returned shapes {f1.shape}, {f2.shape}; "
                              f"expected ({self.layout.dim_p1},), ({self.layout.dim_p2},)")
        return f1, f2

    def vector_field(self, z):
        L = self.layout
        z = L.check(z)
        gq1, gp1, gq2, gp2 = self.gradients(z)
        f1, f2 = self.forces(z)
        out = np.empty(L.dim)
        out[L.q1] = gp1
        out[L.p1] = -gq1 + f1
        out[L.q2] = gp2
        out[L.p2] = -gq2 + f2
        for block in ("q1", "p1", "q2", "p2"):
            if not np.all(np.isfinite(out[getattr(L, block)])):
                raise NumericError(f"non-finite vector field in block {block}")
        return out

    def energies(self, z):
        """Return ``(H1, H2)`` at the flat state ``z``."""
        L = self.layout
        h1 = self.sub1.energy(z[L.q1], z[L.p1])
        h2 = self.sub2.energy(z[L.q2], z[L.p2])
        if not (np.isfinite(h1) and np.isfinite(h2)):
            raise NumericError(f"non-finite energy (H1={h1}, H2={h2})")
        return h1, h2

    def constraint_values(self, z):
        return np.array([g(z) for g in self.constraints], dtype=float)


def eval_vector_field(sys, s):
    """Right-hand side ``dz/dt`` of the coupled system at ``s``."""
    if s.layout is not sys.layout:
        sys.layout.check(s.z)
    return sys.vector_field(s.z)


def total_energy(sys, s):
    """``H1 + H2`` at ``s``; the interaction carries no potential."""
    h1, h2 = sys.energies(s.z)
    return h1 + h2
