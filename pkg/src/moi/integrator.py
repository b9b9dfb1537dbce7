"""Implicit trapezoidal integration and trajectory classification.

The stepper is A-stable, which matters here: trajectories of interest pass
near saddle points and through strongly contracting regions where explicit
schemes at practical step sizes either blow up or demand tiny steps. Each
step solves the trapezoidal fixed-point equation with a Newton iteration
seeded at the forward-Euler predictor.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NewtonDivergence, NonFiniteOutput
from .spectral import DEFAULT_STABILITY_TOL, is_unstable
from .system_core import (
    ParameterizedSystem,
    Termination,
    Trajectory,
    eval_jacobian,
    initial_state,
)


@dataclass(frozen=True)
class IntegratorConfig:
    """Fixed-step integration settings.

    ``step`` is the only field without a default; everything else carries a
    conservative default suitable for the bundled models.
    """

    step: float
    newton_tol: float = 1e-12
    newton_max_iter: int = 50
    max_time: float = 200.0
    sep_tol: float = 1e-6
    sep_dwell: int = 10
    divergence_norm: float = 1e6

    def __post_init__(self) -> None:
        if not self.step > 0.0:
            raise ValueError(f"step must be positive, got {self.step}")
        if not self.newton_tol > 0.0:
            raise ValueError(f"newton_tol must be positive, got {self.newton_tol}")
        if self.newton_max_iter < 1:
            raise ValueError(
                f"newton_max_iter must be at least 1, got {self.newton_max_iter}"
            )
        if not self.max_time > 0.0:
            raise ValueError(f"max_time must be positive, got {self.max_time}")
        if not self.sep_tol > 0.0:
            raise ValueError(f"sep_tol must be positive, got {self.sep_tol}")
        if self.sep_dwell < 1:
            raise ValueError(f"sep_dwell must be at least 1, got {self.sep_dwell}")
        if not self.divergence_norm > 0.0:
            raise ValueError(
                f"divergence_norm must be positive, got {self.divergence_norm}"
            )


def step_trapezoidal(
    sys: ParameterizedSystem,
    x: np.ndarray,
    p: np.ndarray,
    cfg: IntegratorConfig,
) -> np.ndarray:
    """Advance one fixed step of the implicit trapezoidal rule.

    Solves  y = x + (h/2) * (f(x) + f(y))  for y by Newton iteration seeded
    at the forward-Euler predictor. Raises ``NewtonDivergence`` if the
    residual fails to reach ``cfg.newton_tol`` within ``cfg.newton_max_iter``
    iterations.
    """
    h = cfg.step
    fx = sys.field(x, p)
    y = x + h * fx
    eye = np.eye(sys.state_dim)
    for _ in range(cfg.newton_max_iter):
        g = y - x - 0.5 * h * (fx + sys.field(y, p))
        if np.linalg.norm(g) <= cfg.newton_tol:
            if not np.all(np.isfinite(y)):
                raise NonFiniteOutput("trapezoidal step produced non-finite state")
            return y
        jac = eval_jacobian(sys, y, p)
        y = y - np.linalg.solve(eye - 0.5 * h * jac, g)
    g = y - x - 0.5 * h * (fx + sys.field(y, p))
    if np.linalg.norm(g) <= cfg.newton_tol:
        if not np.all(np.isfinite(y)):
            raise NonFiniteOutput("trapezoidal step produced non-finite state")
        return y
    raise NewtonDivergence(
        f"Newton iteration stalled at residual {np.linalg.norm(g):.3e} "
        f"after {cfg.newton_max_iter} iterations (tol {cfg.newton_tol:.1e})"
    )


def sep_distance(
    sys: ParameterizedSystem, x: np.ndarray, sep: np.ndarray
) -> float:
    """Euclidean distance from ``x`` to ``sep``, angle-aware.

    Coordinates listed in ``sys.wrap_indices`` are treated as angles: their
    difference is reduced to (-pi, pi] before taking the norm, so a state one
    full revolution away from the equilibrium counts as being at it.
    """
    d = np.asarray(x, dtype=float) - np.asarray(sep, dtype=float)
    if sys.wrap_indices is not None:
        for idx in sys.wrap_indices:
            d[idx] = (d[idx] + np.pi) % (2.0 * np.pi) - np.pi
    return float(np.linalg.norm(d))


def simulate(
    sys: ParameterizedSystem,
    p: np.ndarray,
    cfg: IntegratorConfig,
    sep: np.ndarray,
    record_flags: bool = False,
    stability_tol: float = DEFAULT_STABILITY_TOL,
) -> Trajectory:
    """Integrate from the system's initial condition and classify the outcome.

    The trajectory terminates with:

    - ``CONVERGED_TO_SEP`` once the state has stayed within ``cfg.sep_tol``
      of ``sep`` (angle-aware) for ``cfg.sep_dwell`` consecutive stored
      states;
    - ``DIVERGED`` as soon as the state norm exceeds ``cfg.divergence_norm``
      (checked before the proximity test, so a divergent state can never be
      mistaken for a converged one);
    - ``SOLVER_FAILURE`` if a step raises ``NewtonDivergence`` or
      ``NonFiniteOutput`` — the partial trajectory up to the last good state
      is returned;
    - ``MAX_TIME_REACHED`` after ``floor(max_time / step)`` steps without
      any of the above.

    With ``record_flags=True`` every stored state (including the initial one)
    gets a boolean marking whether the Jacobian there has an eigenvalue with
    real part above ``stability_tol``.
    """
    p = np.asarray(p, dtype=float)
    x = initial_state(sys, p)

    states = [x]
    flags = [is_unstable(eval_jacobian(sys, x, p), stability_tol)] if record_flags else None

    nmax = int(np.floor(cfg.max_time / cfg.step + 1e-9))
    termination = Termination.MAX_TIME_REACHED
    consec = 0
    for _ in range(nmax):
        try:
            x = step_trapezoidal(sys, x, p, cfg)
        except (NewtonDivergence, NonFiniteOutput):
            termination = Termination.SOLVER_FAILURE
            break
        states.append(x)
        if record_flags:
            flags.append(is_unstable(eval_jacobian(sys, x, p), stability_tol))
        if np.linalg.norm(x) > cfg.divergence_norm:
            termination = Termination.DIVERGED
            break
        if sep_distance(sys, x, sep) <= cfg.sep_tol:
            consec += 1
            if consec >= cfg.sep_dwell:
                termination = Termination.CONVERGED_TO_SEP
                break
        else:
            consec = 0

    return Trajectory(
        states=np.asarray(states),
        step=cfg.step,
        parameter=p,
        termination=termination,
        instability_flags=np.asarray(flags, dtype=bool) if record_flags else None,
    )
