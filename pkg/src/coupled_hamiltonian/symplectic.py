"""Numerical symplecticity checks for interaction-coupled systems.

For the coupled field ``X`` with interaction ``(f1, f2)`` and weighted form
``omega = sum_a w_a dq_a ^ dp_a``, the Lie derivative of ``omega`` along ``X``
reduces to the two-form ``sum_a w_a df_a ^ dq_a``. The flow preserves
``omega`` exactly where this two-form vanishes. Here it is assembled from a
finite-difference Jacobian of the interaction and evaluated on sampled states,
optionally restricted to the tangent space of the constraint manifold.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
import scipy.linalg

from .core import PhaseState, fd_step
from .exceptions import NumericError, UsageError

DEFAULT_TOL = 1e-6
DEFAULT_SAMPLES = 50
DEFAULT_HALF_WIDTH = 1.0


@dataclass(frozen=True, eq=False)
class ObstructionForm:
    """Antisymmetric coefficient matrix of the two-form at one state.

    ``omega[k, l]`` is the coefficient of ``dz_k ^ dz_l`` for ``k < l``; the
    lower triangle holds the negated values, so ``omega(X, Y) = X @ omega @ Y``.
    """

    at_state: PhaseState
    omega: np.ndarray

    @property
    def max_abs(self):
        return float(np.max(np.abs(self.omega), initial=0.0))

    def restricted(self, basis):
        """Matrix of the form restricted to the span of ``basis`` columns."""
        return basis.T @ self.omega @ basis


@dataclass(frozen=True)
class SymplecticVerdict:
    symplectic: bool
    residual: float
    samples: int
    tolerance: float
    constrained: bool
    seed: Optional[int] = None

    def summary(self):
        word = "symplectic" if self.symplectic else "NOT symplectic"
        mode = "on constraint manifold" if self.constrained else "unconstrained"
        seed = "" if self.seed is None else f", seed={self.seed}"
        return (f"{word} ({mode}): residual={self.residual:.3e}, tol={self.tolerance:.1e}, "
                f"samples={self.samples}{seed}")


def interaction_jacobian(sys, s):
    """Central-difference Jacobian of the stacked interaction ``(f1, f2)``.

    Row ``a`` pairs with the ``a``-th entry of ``layout.q_columns``; column
    ``k`` is the derivative with respect to state coordinate ``k``.
    """
    L = sys.layout
    z = np.array(s.z, dtype=float)
    n_rows = L.dim_p1 + L.dim_p2
    if sys.interaction.is_zero:
        return np.zeros((n_rows, L.dim))
    jac = np.empty((n_rows, L.dim))
    steps = fd_step(z)
    for k, h in enumerate(steps):
        zp, zm = z.copy(), z.copy()
        zp[k] += h
        zm[k] -= h
        fp = np.concatenate(sys.forces(zp))
        fm = np.concatenate(sys.forces(zm))
        if not (np.all(np.isfinite(fp)) and np.all(np.isfinite(fm))):
            raise NumericError(f"non-finite interaction near state coordinate {k}")
        jac[:, k] = (fp - fm) / (zp[k] - zm[k])
    return jac


def obstruction_form(sys, s):
    """Coefficients of ``sum_a w_a df_a ^ dq_a`` at ``s``."""
    L = sys.layout
    jac = interaction_jacobian(sys, s)
    weighted = jac * L.weights[:, None]
    # df_a ^ dq_a puts J[a, k] at (k, col(q_a)); antisymmetrize explicitly
    half = np.zeros((L.dim, L.dim))
    half[:, L.q_columns] = weighted.T
    return ObstructionForm(s, half - half.T)


def sample_states(reference, n=DEFAULT_SAMPLES, half_width=DEFAULT_HALF_WIDTH, seed=0):
    """States drawn uniformly from a box of ``half_width`` around ``reference``."""
    rng = np.random.default_rng(seed)
    z0 = reference.z
    return [reference.replace(z=z0 + rng.uniform(-half_width, half_width, z0.size))
            for _ in range(n)]


def _verdict(residuals, tol, constrained, seed):
    residual = float(max(residuals))
    return SymplecticVerdict(residual <= tol, residual, len(residuals), tol, constrained, seed)


def _validate(states, tol):
    states = list(states)
    if not states:
        raise UsageError("sample set is empty")
    if not tol > 0:
        raise UsageError(f"tolerance must be positive, got {tol!r}")
    return states


def check_symplectic(sys, states, tol=DEFAULT_TOL, seed=None):
    """Max of the obstruction two-form over ``states`` against ``tol``."""
    states = _validate(states, tol)
    residuals = [obstruction_form(sys, s).max_abs for s in states]
    return _verdict(residuals, tol, False, seed)


def constraint_jacobian(sys, z):
    """Rows are central-difference gradients of the registered constraints."""
    z = np.asarray(z, dtype=float)
    steps = fd_step(z)
    G = np.empty((len(sys.constraints), z.size))
    for k, h in enumerate(steps):
        zp, zm = z.copy(), z.copy()
        zp[k] += h
        zm[k] -= h
        G[:, k] = (sys.constraint_values(zp) - sys.constraint_values(zm)) / (zp[k] - zm[k])
    return G


def project_to_constraints(sys, s, tol=DEFAULT_TOL, max_iterations=10):
    """Minimum-norm Newton projection of ``s`` onto ``{g(z) = 0}``.

    Stops once every constraint is below ``tol / 10``.
    """
    z = np.array(s.z, dtype=float)
    target = tol / 10.0
    g = sys.constraint_values(z)
    for _ in range(max_iterations):
        if np.max(np.abs(g), initial=0.0) <= target:
            return s.replace(z=z)
        G = constraint_jacobian(sys, z)
        z = z - np.linalg.lstsq(G, g, rcond=None)[0]
        g = sys.constraint_values(z)
    if np.max(np.abs(g), initial=0.0) <= target:
        return s.replace(z=z)
    raise NumericError(f"projection onto constraints left residual {np.max(np.abs(g)):.3e} "
                       f"> {target:.1e}")


def tangent_basis(sys, s):
    """Orthonormal basis of the null space of the constraint Jacobian at ``s``."""
    return scipy.linalg.null_space(constraint_jacobian(sys, s.z))


def check_symplectic_on_manifold(sys, states, tol=DEFAULT_TOL, seed=None):
    """Obstruction form restricted to the constraint manifold's tangent spaces.

    Each sample is first projected onto the constraint set.
    """
    if not sys.constraints:
        raise UsageError(f"{sys.name or 'system'} has no registered constraints")
    states = _validate(states, tol)
    residuals = []
    for s in states:
        s = project_to_constraints(sys, s, tol)
        B = tangent_basis(sys, s)
        restricted = obstruction_form(sys, s).restricted(B)
        residuals.append(float(np.max(np.abs(restricted), initial=0.0)))
    return _verdict(residuals, tol, True, seed)


def jacobian_of_map(step, s, dt):
    """Central-difference Jacobian of ``z -> step(state(z), dt).z`` at ``s``."""
    z = np.array(s.z, dtype=float)
    n = z.size
    D = np.empty((n, n))
    for k, h in enumerate(fd_step(z)):
        zp, zm = z.copy(), z.copy()
        zp[k] += h
        zm[k] -= h
        D[:, k] = (step(s.replace(z=zp), dt).z - step(s.replace(z=zm), dt).z) / (zp[k] - zm[k])
    return D


def map_pullback_residual(step, s, dt):
    """``max |D^T W D - W|`` for the one-step map's Jacobian ``D`` at ``s``."""
    if not dt > 0:
        raise UsageError(f"dt must be positive, got {dt!r}")
    W = s.layout.symplectic_matrix()
    D = jacobian_of_map(step, s, dt)
    return float(np.max(np.abs(D.T @ W @ D - W), initial=0.0))
