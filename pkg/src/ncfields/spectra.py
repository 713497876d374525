"""Dressed quadratic Hamiltonians, closed-form mode spectra and an eigen-oracle.

All matrices act on one real mode block ``(Q1, Q2, P1, P2)`` with
``H = xi^T M xi / 2``.  The two deformed Hamiltonians per block are

E-kind::

    H = 1/2 [ (1 + theta^2 n^2 / 4) |P|^2 + n^2 |Q|^2 + n^2 theta Q.eps.P ]

B-kind::

    H = 1/2 [ |P|^2 + (n^2 + theta^2 / 4) |Q|^2 + theta P.eps.Q ]

obtained from ``H0 = (|p|^2 + n^2 |q|^2) / 2`` through the dressing maps.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .symplectic_core import (
    LEVI_CIVITA,
    DeformationKind,
    DeformationParams,
    build_canonical_form,
    build_deformed_form,
    dressing_map,
)


class SpectrumSource(str, enum.Enum):
    CLOSED_FORM = "closed_form"
    ORACLE = "oracle"


@dataclass(frozen=True)
class QuadraticHamiltonian:
    mode_index: int
    h_matrix: np.ndarray

    def energy(self, state: np.ndarray) -> float:
        state = np.asarray(state, dtype=float)
        return 0.5 * float(state @ self.h_matrix @ state)


@dataclass(frozen=True)
class SpectrumResult:
    """Frequency pair of one mode block.

    ``stable`` is False when either frequency is negative, which only
    happens with ``doubled_splitting=True`` (see :func:`closed_form_spectrum`).
    ``degenerate`` marks an oracle result whose generator was defective.
    """

    n: int
    omega_minus: float
    omega_plus: float
    source: SpectrumSource
    kind: DeformationKind = DeformationKind.CANONICAL
    theta: float = 0.0
    stable: bool = True
    degenerate: bool = False

    @property
    def pair(self) -> tuple[float, float]:
        return (self.omega_minus, self.omega_plus)

    @property
    def gap(self) -> float:
        return self.omega_plus - self.omega_minus

    def to_row(self) -> tuple:
        return (
            self.kind.value,
            self.theta,
            self.n,
            self.omega_minus,
            self.omega_plus,
            self.source.value,
            self.stable,
        )


SPECTRUM_CSV_HEADER = ("kind", "theta", "n", "omega_minus", "omega_plus", "source", "stable")


@dataclass(frozen=True)
class ModeCoefficients:
    n: int
    lambda_plus: float
    lambda_minus: float
    delta_n: float


def _check_mode(n: int, *, allow_zero: bool) -> int:
    if isinstance(n, bool) or int(n) != n:
        raise ValueError(f"mode index must be an integer, got {n!r}")
    n = int(n)
    if n == 0 and not allow_zero:
        raise ValueError("mode index must be nonzero")
    return n


def undeformed_hamiltonian_matrix(n: int) -> np.ndarray:
    """``diag(n^2, n^2, 1, 1)``: the free massless mode in bare coordinates."""
    n2 = float(n) ** 2
    return np.diag([n2, n2, 1.0, 1.0])


def hamiltonian_matrix(params: DeformationParams, n: int) -> QuadraticHamiltonian:
    """Dressed Hamiltonian of mode block ``n``.

    ``n = 0`` returns the free zero-mode block ``diag(0, 0, 1, 1)`` for
    every kind.
    """
    n = _check_mode(n, allow_zero=True)
    if n < 0:
        raise ValueError("n must be >= 0; spectra depend on |n| only")
    if n == 0:
        return QuadraticHamiltonian(0, np.diag([0.0, 0.0, 1.0, 1.0]))

    theta = params.effective_theta
    n2 = float(n) ** 2
    if params.kind is DeformationKind.B_DEFORMED:
        pp, qq = 1.0, n2 + theta**2 / 4.0
        qp = 0.5 * theta * LEVI_CIVITA.T
    else:
        pp, qq = 1.0 + theta**2 * n2 / 4.0, n2
        qp = 0.5 * n2 * theta * LEVI_CIVITA
    m = np.block([[qq * np.eye(2), qp], [qp.T, pp * np.eye(2)]])
    return QuadraticHamiltonian(n, m)


def bare_hamiltonian_matrix(params: DeformationParams, n: int) -> np.ndarray:
    """Hamiltonian of block ``n`` in the undressed coordinates ``(q, p)``."""
    if n != 0:
        return undeformed_hamiltonian_matrix(n)
    f = dressing_map(params, 1).forward
    return f.T @ hamiltonian_matrix(params, 0).h_matrix @ f


def closed_form_spectrum(
    params: DeformationParams, n: int, *, doubled_splitting: bool = False
) -> SpectrumResult:
    """Exact normal-mode frequencies of block ``n``.

    E-kind: ``(|n|/2) sqrt(4 + theta^2 n^2) -/+ theta n^2 / 2``.
    B-kind: ``sqrt(4 n^2 + theta^2) / 2 -/+ theta / 2``.

    ``doubled_splitting=True`` uses ``-/+ theta n^2`` for the E-kind
    splitting, as it is sometimes quoted; those values do not solve the
    equations of motion and can turn negative when ``theta^2 n^2 > 4/3``,
    in which case ``stable`` is False.
    """
    n = _check_mode(n, allow_zero=False)
    theta = params.effective_theta
    a = abs(n)
    if params.kind is DeformationKind.B_DEFORMED:
        centre = 0.5 * math.sqrt(4.0 * a * a + theta * theta)
        half_gap = 0.5 * theta
    else:
        centre = 0.5 * a * math.sqrt(4.0 + theta * theta * a * a)
        half_gap = (1.0 if doubled_splitting else 0.5) * theta * a * a
    lo, hi = centre - half_gap, centre + half_gap
    return SpectrumResult(
        n=n,
        omega_minus=lo,
        omega_plus=hi,
        source=SpectrumSource.CLOSED_FORM,
        kind=params.kind,
        theta=params.theta,
        stable=lo >= 0.0 and hi >= 0.0,
    )


ORACLE_PATHS = ("deformed", "dressed")


def dynamics_generator(params: DeformationParams, n: int, path: str = "deformed") -> np.ndarray:
    """Linear generator ``K = bracket @ M`` of ``d xi / dt = K xi``.

    ``path='deformed'`` pairs the deformed bracket with the bare
    Hamiltonian; ``path='dressed'`` pairs the canonical bracket with the
    dressed Hamiltonian.  Both describe the same flow.
    """
    if path == "deformed":
        return build_deformed_form(params, 1).bracket @ bare_hamiltonian_matrix(params, n)
    if path == "dressed":
        return build_canonical_form(1).bracket @ hamiltonian_matrix(params, abs(n)).h_matrix
    raise ValueError(f"path must be one of {ORACLE_PATHS}")


def _metric_eigenvalues(params: DeformationParams, n: int, path: str) -> np.ndarray:
    """Eigenvalues of ``K = bracket @ M`` through the similar matrix ``L bracket L``.

    ``L = M^(1/2)`` requires ``M`` positive definite, which holds for
    ``n != 0``.  ``L bracket L`` is antisymmetric, so ``i L bracket L`` is
    Hermitian and its eigensolver always converges.  Used when the general
    eigensolver fails to converge on nearly degenerate generators.
    """
    if path == "deformed":
        bracket = build_deformed_form(params, 1).bracket
        m = bare_hamiltonian_matrix(params, n)
    else:
        bracket = build_canonical_form(1).bracket
        m = hamiltonian_matrix(params, abs(n)).h_matrix
    w, v = np.linalg.eigh(m)
    root = (v * np.sqrt(w)) @ v.T
    a = root @ bracket @ root
    return -1j * np.linalg.eigvalsh(1j * 0.5 * (a - a.T))


def oracle_spectrum(
    params: DeformationParams, n: int, path: str = "deformed", *, defect_tol: float = 1e10
) -> SpectrumResult:
    """Frequencies from the eigenvalues of the linear generator.

    The two largest imaginary parts of the eigenvalues of ``K`` are
    returned in ascending order.  If the eigenvector matrix is
    ill-conditioned beyond ``defect_tol`` (defective ``K``) the result is
    flagged ``degenerate`` and frequencies come from eigenvalue moduli.
    """
    n = _check_mode(n, allow_zero=False)
    k = dynamics_generator(params, n, path)
    try:
        evals, evecs = np.linalg.eig(k)
        defective = not np.isfinite(np.linalg.cond(evecs)) or np.linalg.cond(evecs) > defect_tol
    except np.linalg.LinAlgError:
        evals = _metric_eigenvalues(params, n, path)
        defective = False
    if defective:
        mod = np.sort(np.abs(evals))
        lo, hi = mod[0], mod[2]
    else:
        im = np.sort(evals.imag)
        lo, hi = im[2], im[3]
    return SpectrumResult(
        n=n,
        omega_minus=float(lo),
        omega_plus=float(hi),
        source=SpectrumSource.ORACLE,
        kind=params.kind,
        theta=params.theta,
        stable=bool(np.all(np.abs(evals.real) <= 1e-9 * max(1.0, np.abs(evals).max()))),
        degenerate=defective,
    )


def spectrum_deviation(a: SpectrumResult, b: SpectrumResult) -> float:
    """Max absolute difference between two frequency pairs, ignoring labels."""
    return float(np.max(np.abs(np.sort(a.pair) - np.sort(b.pair))))


def mode_coefficients(params: DeformationParams, n: int) -> ModeCoefficients:
    """``Delta_n = 2|n| / sqrt(4 + theta^2 n^2)`` and ``Lambda^pm = Delta^-1/2 +- theta Delta^1/2 / 2``."""
    if params.kind is DeformationKind.B_DEFORMED:
        raise ValueError("mode coefficients are defined for the E-deformation only")
    n = _check_mode(n, allow_zero=False)
    theta = params.effective_theta
    delta = 2.0 * abs(n) / math.sqrt(4.0 + theta * theta * n * n)
    root = math.sqrt(delta)
    return ModeCoefficients(
        n=n,
        lambda_plus=1.0 / root + 0.5 * theta * root,
        lambda_minus=1.0 / root - 0.5 * theta * root,
        delta_n=delta,
    )


def normal_mode_trajectory(
    params: DeformationParams,
    n: int,
    amplitudes: Sequence[complex],
    t: "float | np.ndarray",
    *,
    with_momenta: bool = False,
):
    """Mode trajectory ``(q^1_n(t), q^2_n(t))`` built from circular normal modes.

    ``amplitudes = (A1, B1, A2, B2)``: ``A1``/``A2`` multiply
    ``exp(-i w t)``, ``B1``/``B2`` multiply ``exp(+i w t)``.  Mode 1 has
    polarisation ``(1, i)`` on ``A1``, mode 2 ``(1, -i)`` on ``A2``.

    E-kind, weights ``Lambda^+`` (mode 1) and ``Lambda^-`` (mode 2)::

        q1 = 1/2 [L+ (A1 e^{-i w1 t} + B1 e^{i w1 t}) + L- (A2 e^{-i w2 t} + B2 e^{i w2 t})]
        q2 = i/2 [L+ (A1 e^{-i w1 t} - B1 e^{i w1 t}) + L- (B2 e^{i w2 t} - A2 e^{-i w2 t})]

    with ``w1 = omega_plus`` and ``w2 = omega_minus``.  B-kind uses the
    common weight ``1/sqrt(w_n)``, ``2 w_n = sqrt(4 n^2 + theta^2)``, with
    ``w1 = omega_minus`` and ``w2 = omega_plus``.

    With ``with_momenta=True`` returns ``(q, p)``; ``p`` follows from the
    first half of Hamilton's equations in bare coordinates.
    """
    n = _check_mode(n, allow_zero=False)
    a1, b1, a2, b2 = (complex(a) for a in amplitudes)
    t = np.asarray(t, dtype=float)
    spec = closed_form_spectrum(params, n)

    if params.kind is DeformationKind.B_DEFORMED:
        w = 0.5 * math.sqrt(4.0 * n * n + params.theta**2)
        c1 = c2 = 1.0 / math.sqrt(w)
        w1, w2 = spec.omega_minus, spec.omega_plus
    else:
        coef = mode_coefficients(params, n)
        c1, c2 = coef.lambda_plus, coef.lambda_minus
        w1, w2 = spec.omega_plus, spec.omega_minus

    m1, p1 = np.exp(-1j * w1 * t), np.exp(1j * w1 * t)
    m2, p2 = np.exp(-1j * w2 * t), np.exp(1j * w2 * t)
    q1 = 0.5 * (c1 * (a1 * m1 + b1 * p1) + c2 * (a2 * m2 + b2 * p2))
    q2 = 0.5j * (c1 * (a1 * m1 - b1 * p1) + c2 * (b2 * p2 - a2 * m2))
    q = np.stack([q1, q2])
    if not with_momenta:
        return q

    dq1 = 0.5j * (c1 * w1 * (b1 * p1 - a1 * m1) + c2 * w2 * (b2 * p2 - a2 * m2))
    dq2 = 0.5 * (c1 * w1 * (a1 * m1 + b1 * p1) - c2 * w2 * (a2 * m2 + b2 * p2))
    dq = np.stack([dq1, dq2])
    # q' = bracket_qq n^2 q + p in bare coordinates
    bqq = build_deformed_form(params, 1).bracket[:2, :2]
    p = dq - float(n) ** 2 * np.tensordot(bqq, q, axes=1)
    return q, p
