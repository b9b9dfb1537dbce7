"""Benchmark systems: a damped driven pendulum and a classical swing network.

Both models come with a finite-time disturbance whose end state is the
system's initial condition x0(p): the pendulum loses its restoring torque
for a fixed interval, the network suffers a bolted short circuit at a
generator terminal.  The shared parameterizations make the recovery
boundary interesting — driving torque for the pendulum, machine inertia for
the network.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from importlib import resources
from pathlib import Path
from typing import Optional

import numpy as np

from .errors import DataFormatError, ParamOutOfRange
from .integrator import IntegratorConfig, step_trapezoidal
from .recovery_boundary import find_equilibrium
from .system_core import ParameterizedSystem

#: divergence-norm settings that reliably separate escape from recovery for
#: the bundled models (the library-wide default of 1e6 is far too lax: the
#: pendulum's velocity saturates near 6 on recovering runs and the network
#: angles stay below ~20, so these catch escape orders of magnitude sooner).
PENDULUM_DIVERGENCE_NORM = 50.0
MULTIMACHINE_DIVERGENCE_NORM = 200.0


# ---------------------------------------------------------------------------
# pendulum


@dataclass(frozen=True)
class PendulumParams:
    """Damped driven pendulum constants and disturbance settings.

    The driving torque is the run-time parameter p; ``c3`` is its nominal
    value.  ``ic_method`` selects how the post-disturbance state is
    produced: ``"closed"`` evaluates the exact solution of the linear
    disturbance dynamics, ``"integrated"`` replays them with the fixed-step
    trapezoidal integrator at ``ic_step`` (the two agree to ~1e-4; the
    integrated path is what a simulation-only workflow would see).
    """

    c1: float = 2.0
    c2: float = 0.5
    c3: float = 1.5
    disturbance_duration: float = 0.8
    ic_method: str = "closed"
    ic_step: float = 0.02

    def __post_init__(self) -> None:
        if min(self.c1, self.c2, self.c3) <= 0.0:
            raise ValueError(
                f"c1, c2, c3 must be positive, got "
                f"({self.c1}, {self.c2}, {self.c3})"
            )
        if self.c3 / self.c1 >= 1.0:
            raise ParamOutOfRange(
                f"c3/c1 = {self.c3 / self.c1} >= 1: torque exceeds the "
                "maximum restoring torque, no equilibria exist"
            )
        if self.disturbance_duration < 0.0:
            raise ValueError("disturbance_duration must be non-negative")
        if self.ic_method not in ("closed", "integrated"):
            raise ValueError(
                f"ic_method must be 'closed' or 'integrated', "
                f"got {self.ic_method!r}"
            )
        if self.ic_step <= 0.0:
            raise ValueError("ic_step must be positive")


def _sep_angle(c1: float, torque: float) -> float:
    ratio = torque / c1
    if not -1.0 < ratio < 1.0:
        raise ParamOutOfRange(
            f"driving torque {torque} is at or beyond the maximum restoring "
            f"torque {c1}; no equilibrium exists"
        )
    return np.arcsin(ratio)


def pendulum_sep(params: PendulumParams, torque: float) -> np.ndarray:
    """Stable equilibrium (asin(torque/c1), 0) at the given torque."""
    return np.array([_sep_angle(params.c1, torque), 0.0])


def pendulum_uep(params: PendulumParams, torque: float) -> np.ndarray:
    """Saddle (pi - asin(torque/c1), 0) on the basin boundary."""
    return np.array([np.pi - _sep_angle(params.c1, torque), 0.0])


def pendulum_disturbance_ic(params: PendulumParams, p) -> np.ndarray:
    """State at the end of the disturbance started from the equilibrium.

    During the disturbance the restoring torque is absent and the angle
    accelerates under the drive alone: z1' = z2, z2' = -c2 z2 + torque,
    for ``disturbance_duration`` seconds from the pre-disturbance SEP.
    """
    p = np.atleast_1d(np.asarray(p, dtype=float))
    torque = p[0]
    c2 = params.c2
    t = params.disturbance_duration
    start = pendulum_sep(params, torque)
    if params.ic_method == "closed":
        e = np.exp(-c2 * t)
        return np.array(
            [
                start[0] + (torque / c2) * t - (torque / c2**2) * (1 - e),
                (torque / c2) * (1 - e),
            ]
        )
    disturbance = ParameterizedSystem(
        state_dim=2,
        param_dim=1,
        field=lambda x, q: np.array([x[1], -c2 * x[1] + q[0]]),
        jacobian=lambda x, q: np.array([[0.0, 1.0], [0.0, -c2]]),
        name="pendulum-disturbance",
    )
    cfg = IntegratorConfig(step=params.ic_step)
    x = start
    for _ in range(int(round(t / params.ic_step))):
        x = step_trapezoidal(disturbance, x, p, cfg)
    return x


def pendulum_system(params: Optional[PendulumParams] = None) -> ParameterizedSystem:
    """Pendulum as a parameterized system over the scalar driving torque.

    Dynamics: x1' = x2, x2' = -c1 sin(x1) - c2 x2 + p.  The angle is left
    unwrapped — recovery means returning to the same equilibrium
    representative the disturbance started from, not to a shifted copy.
    """
    if params is None:
        params = PendulumParams()
    c1, c2 = params.c1, params.c2

    def field(x, p):
        return np.array([x[1], -c1 * np.sin(x[0]) - c2 * x[1] + p[0]])

    def jacobian(x, p):
        return np.array([[0.0, 1.0], [-c1 * np.cos(x[0]), -c2]])

    return ParameterizedSystem(
        state_dim=2,
        param_dim=1,
        field=field,
        jacobian=jacobian,
        initial_condition=lambda p: pendulum_disturbance_ic(params, p),
        name="pendulum",
        state_names=("angle", "velocity"),
    )


# ---------------------------------------------------------------------------
# multi-machine swing network


@dataclass(frozen=True)
class MultiMachineParams:
    """Classical swing network reduced to machine internal nodes.

    Node 0 is a phase-anchoring source at angle 0 with EMF ``slack_emf``
    (set 0 to disable); nodes 1..n are the machines.  ``conductance`` and
    ``susceptance`` are the (n+1)x(n+1) reduced admittance matrices;
    ``fault_*`` are their fault-on counterparts (None when the dataset has
    no fault block).  ``inertia`` holds the per-machine coefficients on
    domega/dt with omega in rad/s.  ``inertia_mode`` picks the run-time
    parameter: ``"scale"`` makes p a scalar multiplier on all inertias,
    ``"vector"`` makes p the per-machine inertia coefficients themselves.
    """

    inertia: np.ndarray
    damping: np.ndarray
    mech_power: np.ndarray
    emf: np.ndarray
    slack_emf: float
    conductance: np.ndarray
    susceptance: np.ndarray
    fault_conductance: Optional[np.ndarray] = None
    fault_susceptance: Optional[np.ndarray] = None
    fault_duration: float = 0.2
    fault_step: float = 1.0 / 60.0
    inertia_mode: str = "scale"

    def __post_init__(self) -> None:
        for name in ("inertia", "damping", "mech_power", "emf"):
            object.__setattr__(
                self, name, np.asarray(getattr(self, name), dtype=float)
            )
        n = self.inertia.shape[0]
        for name in ("damping", "mech_power", "emf"):
            if getattr(self, name).shape != (n,):
                raise ValueError(
                    f"{name} must have shape ({n},) to match inertia"
                )
        for name in (
            "conductance",
            "susceptance",
            "fault_conductance",
            "fault_susceptance",
        ):
            value = getattr(self, name)
            if value is None:
                continue
            value = np.asarray(value, dtype=float)
            object.__setattr__(self, name, value)
            if value.shape != (n + 1, n + 1):
                raise ValueError(
                    f"{name} must have shape ({n + 1}, {n + 1}) "
                    f"(node 0 = anchor), got {value.shape}"
                )
        if (self.fault_conductance is None) != (self.fault_susceptance is None):
            raise ValueError(
                "fault_conductance and fault_susceptance must be supplied "
                "together"
            )
        if not np.all(self.inertia > 0.0):
            raise ValueError(f"inertia must be positive, got {self.inertia}")
        if self.fault_duration < 0.0:
            raise ValueError("fault_duration must be non-negative")
        if self.fault_step <= 0.0:
            raise ValueError("fault_step must be positive")
        if self.inertia_mode not in ("scale", "vector"):
            raise ValueError(
                f"inertia_mode must be 'scale' or 'vector', "
                f"got {self.inertia_mode!r}"
            )

    @property
    def n_machines(self) -> int:
        return self.inertia.shape[0]


def bundled_network_path() -> Path:
    """Path of the packaged 9-bus classical swing dataset."""
    return Path(str(resources.files("moi") / "data" / "ieee9_classical.dat"))


def load_network(path) -> MultiMachineParams:
    """Parse a plain-text network description.

    Directives (whitespace-delimited, ``#`` comments, blank lines ignored):

    - ``GEN <count>`` — number of machines, must come first;
    - ``G <i> <inertia> <damping> <mech_power> <emf>`` — one per machine,
      i in 1..count;
    - ``SLACK <emf>`` — optional anchor-node EMF (node 0; absent = no
      anchor, its row/column stay zero);
    - ``Y <i> <j> <conductance> <susceptance>`` — entries of the symmetric
      reduced admittance matrix over nodes 0..count, either triangle;
    - ``YFAULT <i> <j> <conductance> <susceptance>`` — same for the
      fault-on matrix (optional block).
    """
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise DataFormatError(f"cannot read network file {path}: {exc}") from exc

    count: Optional[int] = None
    gens: dict[int, tuple[float, float, float, float]] = {}
    slack: Optional[float] = None
    y_entries: dict[tuple[int, int], tuple[float, float]] = {}
    yf_entries: dict[tuple[int, int], tuple[float, float]] = {}

    def fail(lineno: int, msg: str) -> DataFormatError:
        return DataFormatError(f"{path}:{lineno}: {msg}")

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tok = line.split()
        key = tok[0].upper()
        if key == "GEN":
            if count is not None:
                raise fail(lineno, "duplicate GEN line")
            if len(tok) != 2:
                raise fail(lineno, "expected `GEN <count>`")
            try:
                count = int(tok[1])
            except ValueError:
                raise fail(lineno, f"machine count {tok[1]!r} is not an integer")
            if count < 1:
                raise fail(lineno, f"machine count must be >= 1, got {count}")
        elif key == "G":
            if count is None:
                raise fail(lineno, "G line before GEN header")
            if len(tok) != 6:
                raise fail(
                    lineno, "expected `G <i> <inertia> <damping> <mech_power> <emf>`"
                )
            try:
                i = int(tok[1])
                values = tuple(float(v) for v in tok[2:])
            except ValueError:
                raise fail(lineno, f"non-numeric machine entry: {line!r}")
            if not 1 <= i <= count:
                raise fail(lineno, f"machine index {i} outside 1..{count}")
            if i in gens:
                raise fail(lineno, f"duplicate machine {i}")
            gens[i] = values
        elif key == "SLACK":
            if len(tok) != 2:
                raise fail(lineno, "expected `SLACK <emf>`")
            if slack is not None:
                raise fail(lineno, "duplicate SLACK line")
            try:
                slack = float(tok[1])
            except ValueError:
                raise fail(lineno, f"non-numeric SLACK value {tok[1]!r}")
        elif key in ("Y", "YFAULT"):
            if count is None:
                raise fail(lineno, f"{key} line before GEN header")
            if len(tok) != 5:
                raise fail(
                    lineno,
                    f"expected `{key} <i> <j> <conductance> <susceptance>`",
                )
            try:
                i, j = int(tok[1]), int(tok[2])
                g, b = float(tok[3]), float(tok[4])
            except ValueError:
                raise fail(lineno, f"non-numeric admittance entry: {line!r}")
            if not (0 <= i <= count and 0 <= j <= count):
                raise fail(lineno, f"node index outside 0..{count}")
            entries = y_entries if key == "Y" else yf_entries
            pair = (min(i, j), max(i, j))
            if pair in entries:
                raise fail(lineno, f"duplicate {key} entry for nodes {pair}")
            entries[pair] = (g, b)
        else:
            raise fail(lineno, f"unknown directive {tok[0]!r}")

    if count is None:
        raise DataFormatError(f"{path}: missing GEN header")
    missing = sorted(set(range(1, count + 1)) - set(gens))
    if missing:
        raise DataFormatError(f"{path}: missing G lines for machines {missing}")

    def build(entries: dict) -> tuple[np.ndarray, np.ndarray]:
        g_mat = np.zeros((count + 1, count + 1))
        b_mat = np.zeros((count + 1, count + 1))
        for (i, j), (g, b) in entries.items():
            g_mat[i, j] = g_mat[j, i] = g
            b_mat[i, j] = b_mat[j, i] = b
        return g_mat, b_mat

    g_pre, b_pre = build(y_entries)
    if yf_entries:
        g_fault, b_fault = build(yf_entries)
    else:
        g_fault, b_fault = None, None
    rows = [gens[i] for i in range(1, count + 1)]
    return MultiMachineParams(
        inertia=np.array([r[0] for r in rows]),
        damping=np.array([r[1] for r in rows]),
        mech_power=np.array([r[2] for r in rows]),
        emf=np.array([r[3] for r in rows]),
        slack_emf=0.0 if slack is None else slack,
        conductance=g_pre,
        susceptance=b_pre,
        fault_conductance=g_fault,
        fault_susceptance=b_fault,
    )


def _swing_system(
    params: MultiMachineParams,
    conductance: np.ndarray,
    susceptance: np.ndarray,
    name: str,
) -> ParameterizedSystem:
    """Swing dynamics over given admittance matrices, without an IC hook."""
    n = params.n_machines
    emf_nodes = np.concatenate([[params.slack_emf], params.emf])
    damping = params.damping
    mech = params.mech_power
    base_inertia = params.inertia

    if params.inertia_mode == "scale":
        param_dim = 1

        def inertias(p: np.ndarray) -> np.ndarray:
            m = p[0] * base_inertia
            if not np.all(m > 0.0):
                raise ParamOutOfRange(
                    f"inertia scale {p[0]} makes some inertia non-positive"
                )
            return m

    else:
        param_dim = n

        def inertias(p: np.ndarray) -> np.ndarray:
            if not np.all(p > 0.0):
                raise ParamOutOfRange(f"inertia vector must be positive: {p}")
            return p

    def field(x, p):
        th = np.concatenate([[0.0], x[:n]])
        w = x[n:]
        pe = np.empty(n)
        for i in range(1, n + 1):
            d = th[i] - th
            pe[i - 1] = emf_nodes[i] * np.sum(
                emf_nodes * (conductance[i] * np.cos(d) + susceptance[i] * np.sin(d))
            )
        return np.concatenate([w, (mech - pe - damping * w) / inertias(p)])

    def jacobian(x, p):
        th = np.concatenate([[0.0], x[:n]])
        # K[i,k] = d(pe_i)/d(theta_k) over machine angles; the anchor's
        # fixed angle contributes only to the diagonal.
        K = np.zeros((n, n))
        for i in range(1, n + 1):
            for jn in range(n + 1):
                if jn == i:
                    continue
                d = th[i] - th[jn]
                t = (
                    emf_nodes[i]
                    * emf_nodes[jn]
                    * (
                        -conductance[i, jn] * np.sin(d)
                        + susceptance[i, jn] * np.cos(d)
                    )
                )
                K[i - 1, i - 1] += t
                if jn >= 1:
                    K[i - 1, jn - 1] -= t
        m = inertias(p)
        jac = np.zeros((2 * n, 2 * n))
        jac[:n, n:] = np.eye(n)
        jac[n:, :n] = -K / m[:, None]
        jac[n:, n:] = -np.diag(damping / m)
        return jac

    return ParameterizedSystem(
        state_dim=2 * n,
        param_dim=param_dim,
        field=field,
        jacobian=jacobian,
        name=name,
        state_names=tuple(f"theta_{i}" for i in range(1, n + 1))
        + tuple(f"omega_{i}" for i in range(1, n + 1)),
        wrap_indices=tuple(range(n)),
    )


def fault_scenario_ic(
    params: MultiMachineParams, p, cfg: IntegratorConfig
) -> np.ndarray:
    """State at fault clearing, used as the network's x0(p).

    Solves the pre-fault equilibrium from a flat start, substitutes the
    fault-on admittance matrices, integrates for ``params.fault_duration``
    (rounded to whole steps of ``cfg.step``), and returns the cleared
    state.  The inertia parameter applies during the fault as well — it is
    a machine property, not a network one.
    """
    if params.fault_conductance is None:
        raise DataFormatError(
            "network data has no fault-on admittance block (YFAULT)"
        )
    p = np.asarray(p, dtype=float)
    pre = _swing_system(
        params, params.conductance, params.susceptance, "multimachine-prefault"
    )
    fault = _swing_system(
        params,
        params.fault_conductance,
        params.fault_susceptance,
        "multimachine-fault",
    )
    x = find_equilibrium(pre, p)
    for _ in range(int(round(params.fault_duration / cfg.step))):
        x = step_trapezoidal(fault, x, p, cfg)
    return x


def multimachine_system(params: MultiMachineParams) -> ParameterizedSystem:
    """Swing network as a parameterized system over its inertia hook.

    Dynamics per machine i (angles rad, speeds rad/s, node 0 anchored at
    angle 0):

        theta_i' = omega_i
        M_i omega_i' = Pm_i - sum_j E_i E_j (G_ij cos(theta_i - theta_j)
                       + B_ij sin(theta_i - theta_j)) - D_i omega_i

    The initial condition replays the terminal-fault scenario via
    :func:`fault_scenario_ic` at ``params.fault_step``.  Angle states are
    flagged for wrap-aware distance: a machine one revolution ahead is
    electrically back at the equilibrium.
    """
    base = _swing_system(
        params, params.conductance, params.susceptance, "multimachine"
    )
    ic_cfg = IntegratorConfig(step=params.fault_step)
    return replace(
        base,
        initial_condition=lambda p: fault_scenario_ic(params, p, ic_cfg),
    )
