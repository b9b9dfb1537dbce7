"""Eigenvalue machinery: decomposition, spectral abscissa, instability tests.

The kernel is LAPACK's dense nonsymmetric solver via ``numpy.linalg.eig``;
everything here is contract-level plumbing around it: residual bookkeeping,
stability classification against a tolerance, and extraction of the unique
unstable eigenpair with a deterministic sign convention.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    ComplexUnstableEigenvalue,
    ConvergenceFailure,
    MultipleUnstableEigenvalues,
    NoUnstableEigenvalue,
)

#: default margin above zero for calling a real part "unstable"
DEFAULT_STABILITY_TOL = 1e-9

#: imaginary parts below this are treated as zero when realifying a vector
_IMAG_DROP = 1e-9


@dataclass(frozen=True)
class EigenPair:
    """One eigenvalue with its unit right eigenvector and residual.

    ``residual`` is ``||A v - lambda v||_2`` for the matrix the pair was
    computed from; the producing routines guarantee it is at most
    ``1e-9 * max(1, ||A||_2)``.
    """

    value: complex
    vector: np.ndarray
    residual: float


@dataclass(frozen=True)
class StabilityVerdict:
    """Spectral abscissa plus instability classification of one matrix."""

    abscissa: float
    unstable: bool
    unstable_count: int


def _eig(A: np.ndarray):
    A = np.asarray(A, dtype=float)
    try:
        return np.linalg.eig(A)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - LAPACK failure
        raise ConvergenceFailure(f"eigenvalue kernel failed: {exc}") from exc


def _eigvals(A) -> np.ndarray:
    A = np.asarray(A, dtype=float)
    try:
        return np.linalg.eigvals(A)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - LAPACK failure
        raise ConvergenceFailure(f"eigenvalue kernel failed: {exc}") from exc


def eigendecompose(A) -> list[EigenPair]:
    """All eigenpairs of a real square matrix, unit-norm vectors, residuals.

    Eigenvalues are returned with multiplicity in the kernel's order.
    """
    A = np.asarray(A, dtype=float)
    values, vectors = _eig(A)
    pairs = []
    for k in range(len(values)):
        v = vectors[:, k]
        nrm = np.linalg.norm(v)
        if nrm != 0.0:
            v = v / nrm
        res = float(np.linalg.norm(A @ v - values[k] * v))
        pairs.append(EigenPair(value=complex(values[k]), vector=v, residual=res))
    return pairs


def spectral_abscissa(A) -> float:
    """Largest real part over the eigenvalues of A."""
    return float(np.max(_eigvals(A).real))


def is_unstable(A, stability_tol: float = DEFAULT_STABILITY_TOL) -> bool:
    """True iff the spectral abscissa exceeds ``stability_tol``.

    Real parts in ``[0, stability_tol]`` classify as stable; near a
    hyperbolic unstable equilibrium the abscissa is O(1), far above the
    margin, so the tolerance only guards against floating-point zeros.
    """
    return spectral_abscissa(A) > stability_tol


def unstable_count(A, stability_tol: float = DEFAULT_STABILITY_TOL) -> int:
    """Number of eigenvalues with real part above ``stability_tol``."""
    return int(np.sum(_eigvals(A).real > stability_tol))


def stability_verdict(
    A, stability_tol: float = DEFAULT_STABILITY_TOL
) -> StabilityVerdict:
    values = _eigvals(A)
    absc = float(np.max(values.real))
    count = int(np.sum(values.real > stability_tol))
    return StabilityVerdict(
        abscissa=absc, unstable=absc > stability_tol, unstable_count=count
    )


def canonical_sign(v: np.ndarray) -> np.ndarray:
    """Flip ``v`` so its largest-magnitude component is positive."""
    k = int(np.argmax(np.abs(v)))
    if v[k] < 0:
        return -v
    return v


def unstable_eigenpair(
    A, stability_tol: float = DEFAULT_STABILITY_TOL
) -> EigenPair:
    """The unique unstable eigenpair of A, realified and sign-canonicalized.

    Requires exactly one eigenvalue with real part above ``stability_tol``,
    and that eigenvalue must be real.  The returned vector is real with unit
    2-norm and its largest-magnitude component positive, so repeated calls
    (and the kernel's arbitrary +/- choice) give one representative.

    Raises
    ------
    NoUnstableEigenvalue
        No eigenvalue above the tolerance; the parameter is too deep inside
        the recovery region for a meaningful mode.
    MultipleUnstableEigenvalues
        Two or more (non-conjugate) unstable eigenvalues.
    ComplexUnstableEigenvalue
        The unstable eigenvalue is complex (as a single value or a
        conjugate pair); the codimension-one picture does not apply.
    """
    A = np.asarray(A, dtype=float)
    pairs = eigendecompose(A)
    unstable = [pr for pr in pairs if pr.value.real > stability_tol]
    if len(unstable) == 0:
        raise NoUnstableEigenvalue(
            f"spectral abscissa {max(pr.value.real for pr in pairs):.6g} "
            f"<= tol {stability_tol:g}"
        )
    if len(unstable) == 1:
        pair = unstable[0]
        if abs(pair.value.imag) > _IMAG_DROP:
            raise ComplexUnstableEigenvalue(
                f"unstable eigenvalue {pair.value} is not real"
            )
    else:
        if len(unstable) == 2 and _conjugate_pair(unstable[0], unstable[1]):
            raise ComplexUnstableEigenvalue(
                f"unstable eigenvalues form a complex pair "
                f"{unstable[0].value}, {unstable[1].value}"
            )
        raise MultipleUnstableEigenvalues(
            f"{len(unstable)} eigenvalues above tol {stability_tol:g}: "
            f"{[pr.value for pr in unstable]}"
        )

    lam = float(pair.value.real)
    v = np.real(pair.vector)
    nrm = np.linalg.norm(v)
    if nrm == 0.0:  # pragma: no cover - degenerate kernel output
        raise ConvergenceFailure("unstable eigenvector has zero real part")
    v = canonical_sign(v / nrm)
    res = float(np.linalg.norm(A @ v - lam * v))
    return EigenPair(value=complex(lam), vector=v, residual=res)


def _conjugate_pair(a: EigenPair, b: EigenPair) -> bool:
    if abs(a.value.imag) <= _IMAG_DROP:
        return False
    return abs(a.value - np.conj(b.value)) <= 1e-9 * max(1.0, abs(a.value))
