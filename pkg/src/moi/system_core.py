"""Parameterized dynamical systems and trajectory storage.

A :class:`ParameterizedSystem` is a vector field ``f(x, p)`` on R^n with an
m-dimensional parameter, optional analytic Jacobian, and a disturbance map
``p -> x0(p)`` giving the state at the end of a finite-time disturbance.
Angles are never wrapped here: the state space is R^n and any modular
comparison is a model-level decision (see :mod:`moi.model_zoo`).
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .errors import DimensionMismatch, NonFiniteOutput

Array = np.ndarray

#: relative/absolute floor for finite-difference Jacobian steps
_FD_STEP = 1e-6


@dataclass(frozen=True)
class ParameterizedSystem:
    """A vector field f(x, p) with optional analytic Jacobian and
    disturbance-generated initial condition.

    Parameters
    ----------
    state_dim, param_dim
        Dimensions n and m of the state and parameter spaces.
    field
        Callable (x, p) -> dx/dt, both numpy arrays.
    jacobian
        Optional callable (x, p) -> (n, n) array of partials of ``field``
        with respect to x.  When absent, central finite differences are used.
    initial_condition
        Optional callable p -> x0(p), the post-disturbance state the
        simulation driver starts from.
    name
        Text label for reports.
    state_names
        Optional component labels (length n), carried into mode output so
        eigenvector entries are interpretable.
    wrap_indices
        Indices of angle-like coordinates that convergence tests should
        compare modulo 2*pi.  The field itself is always evaluated on the
        unwrapped state.
    """

    state_dim: int
    param_dim: int
    field: Callable[[Array, Array], Array]
    jacobian: Optional[Callable[[Array, Array], Array]] = None
    initial_condition: Optional[Callable[[Array], Array]] = None
    name: str = ""
    state_names: Optional[tuple[str, ...]] = None
    wrap_indices: Optional[tuple[int, ...]] = None


class Termination(enum.Enum):
    """How a fixed-step simulation ended."""

    CONVERGED_TO_SEP = "ConvergedToSEP"
    MAX_TIME_REACHED = "MaxTimeReached"
    DIVERGED = "Diverged"
    SOLVER_FAILURE = "SolverFailure"


@dataclass(frozen=True)
class Trajectory:
    """A fixed-step trajectory plus optional per-state instability flags.

    ``states[n]`` is the state after n steps of size ``step`` (``states[0]``
    is the initial condition).  When recorded, ``instability_flags[n]`` says
    whether the field Jacobian at ``states[n]`` is unstable; the flag
    sequence always has the same length as ``states``.
    """

    states: Array
    step: float
    parameter: Array
    termination: Termination
    instability_flags: Optional[Array] = None

    def __len__(self) -> int:
        return len(self.states)

    @property
    def elapsed(self) -> float:
        """Simulated time covered by the stored states."""
        return (len(self.states) - 1) * self.step


def _check_vector(v, dim: int, label: str) -> Array:
    arr = np.asarray(v, dtype=float)
    if arr.shape != (dim,):
        raise DimensionMismatch(
            f"{label} has shape {arr.shape}, expected ({dim},)"
        )
    return arr


def eval_field(sys: ParameterizedSystem, x, p) -> Array:
    """Evaluate dx/dt = f(x, p) with dimension and finiteness checks."""
    x = _check_vector(x, sys.state_dim, "state")
    p = _check_vector(p, sys.param_dim, "parameter")
    out = np.asarray(sys.field(x, p), dtype=float)
    if out.shape != (sys.state_dim,):
        raise DimensionMismatch(
            f"field returned shape {out.shape}, expected ({sys.state_dim},)"
        )
    if not np.all(np.isfinite(out)):
        raise NonFiniteOutput(f"field({x}, {p}) produced NaN/Inf: {out}")
    return out


def eval_jacobian(sys: ParameterizedSystem, x, p) -> Array:
    """Evaluate the n-by-n state Jacobian of the field at (x, p).

    Uses the analytic Jacobian when the system supplies one; otherwise
    central finite differences with per-coordinate step
    ``max(1e-6, 1e-6 * |x_i|)``.
    """
    x = _check_vector(x, sys.state_dim, "state")
    p = _check_vector(p, sys.param_dim, "parameter")
    if sys.jacobian is not None:
        J = np.asarray(sys.jacobian(x, p), dtype=float)
    else:
        n = sys.state_dim
        J = np.empty((n, n))
        for i in range(n):
            delta = max(_FD_STEP, _FD_STEP * abs(x[i]))
            xp = x.copy()
            xm = x.copy()
            xp[i] += delta
            xm[i] -= delta
            J[:, i] = (eval_field(sys, xp, p) - eval_field(sys, xm, p)) / (
                2.0 * delta
            )
    if J.shape != (sys.state_dim, sys.state_dim):
        raise DimensionMismatch(
            f"jacobian returned shape {J.shape}, expected square of dim "
            f"{sys.state_dim}"
        )
    if not np.all(np.isfinite(J)):
        raise NonFiniteOutput(f"jacobian at ({x}, {p}) produced NaN/Inf")
    return J


def initial_state(sys: ParameterizedSystem, p) -> Array:
    """Return x0(p), the post-disturbance initial condition."""
    if sys.initial_condition is None:
        raise ValueError(f"system {sys.name!r} has no initial_condition")
    p = _check_vector(p, sys.param_dim, "parameter")
    x0 = np.asarray(sys.initial_condition(p), dtype=float)
    x0 = _check_vector(x0, sys.state_dim, "initial condition")
    if not np.all(np.isfinite(x0)):
        raise NonFiniteOutput(f"initial_condition({p}) produced NaN/Inf")
    return x0
