"""Noncommutative chiral bosons on quantum Hall edges.

Covers the general deformation matrix ``Omega`` of ``N`` chiral branches
and its velocities, the coupled left/right edge model, the deformed
Kac-Moody mode map, electron exchange phases, filling factors and the
nonlinear edge dispersion produced by a momentum-shifted field.

Sector labels ``s = +1, -1`` map to array indices ``0, 1`` and the
antisymmetric symbol is ``eps[+, -] = +1`` throughout.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from fractions import Fraction
from numbers import Rational
from typing import NamedTuple, Sequence

import numpy as np

from .errors import InvalidModelError
from .symplectic_core import LEVI_CIVITA
from .textio import format_float, format_matrix, format_record, parse_record

SECTORS = (1, -1)
SECTOR_SIGNS = np.diag([1.0, -1.0])


def _sector_index(s: int) -> int:
    if s not in SECTORS:
        raise ValueError(f"sector sign must be +1 or -1, got {s!r}")
    return 0 if s == 1 else 1


def levi_civita(s: int, s_prime: int) -> float:
    """``eps[s, s']`` with ``eps[+, -] = +1``."""
    return float(LEVI_CIVITA[_sector_index(s), _sector_index(s_prime)])


# ---------------------------------------------------------------------------
# general deformation matrix
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class ChiralModel:
    """``N`` chiral branches coupled through a real symmetric matrix ``omega``.

    ``family`` records which constructor produced the matrix: ``"general"``
    for arbitrary input and ``"edge"`` for the two-branch left/right metric
    whose zero-deformation value is ``diag(+1, -1)``.
    """

    omega: np.ndarray
    theta: float = 0.0
    family: str = "general"

    def __post_init__(self) -> None:
        omega = np.array(self.omega, dtype=float)
        if omega.ndim != 2 or omega.shape[0] != omega.shape[1] or omega.shape[0] == 0:
            raise InvalidModelError("omega must be a nonempty square matrix")
        if not np.all(np.isfinite(omega)):
            raise InvalidModelError("omega has non-finite entries")
        scale = max(1.0, float(np.abs(omega).max()))
        if np.abs(omega - omega.T).max() > 1e-12 * scale:
            raise InvalidModelError("omega must be symmetric")
        if np.linalg.cond(omega) > 1e12:
            raise InvalidModelError("omega must be invertible")
        omega.setflags(write=False)
        object.__setattr__(self, "omega", omega)
        object.__setattr__(self, "theta", float(self.theta))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, ChiralModel):
            return NotImplemented
        return (
            self.family == other.family
            and self.theta == other.theta
            and np.array_equal(self.omega, other.omega)
        )

    __hash__ = None

    @property
    def n_branches(self) -> int:
        return self.omega.shape[0]

    def to_text(self) -> str:
        entries = " ".join(format_float(v) for v in self.omega.ravel())
        return format_record(
            {"kind": self.family, "N": self.n_branches, "theta": self.theta, "omega": entries}
        )

    @classmethod
    def from_text(cls, text: str) -> "ChiralModel":
        rec = parse_record(text)
        try:
            n = int(rec["N"])
            values = [float(v) for v in rec["omega"].split()]
            theta = float(rec.get("theta", "0.0"))
        except (KeyError, ValueError) as exc:
            raise InvalidModelError(f"malformed model text: {exc}") from exc
        if len(values) != n * n:
            raise InvalidModelError(f"expected {n * n} matrix entries, got {len(values)}")
        return cls(np.reshape(values, (n, n)), theta, rec.get("kind", "general"))


def build_omega_general(
    a: np.ndarray, b: np.ndarray, *, theta: float = 0.0, family: str = "general"
) -> ChiralModel:
    """Assemble ``Omega_IJ = a_IJ delta_IJ + (I - J)(b_IJ - b_JI)``.

    Indices ``I, J`` run from 1.  Only the diagonal of ``a`` and the
    antisymmetric part of ``b`` contribute.  ``a`` may be given as complex
    numbers as long as the diagonal is real to round-off.
    """
    a = np.asarray(a)
    b = np.asarray(b, dtype=float)
    if a.ndim != 2 or a.shape != b.shape or a.shape[0] != a.shape[1]:
        raise InvalidModelError("a and b must be square matrices of equal size")
    diag = np.diag(a)
    if np.iscomplexobj(diag):
        if np.abs(diag.imag).max() > 1e-12 * max(1.0, np.abs(diag).max()):
            raise InvalidModelError("diagonal of a must be real")
        diag = diag.real
    idx = np.arange(1, a.shape[0] + 1)
    gap = idx[:, None] - idx[None, :]
    omega = np.diag(diag.astype(float)) + gap * (b - b.T)
    return ChiralModel(omega, theta, family)


def edge_metric(theta: float) -> ChiralModel:
    """Two-branch left/right metric ``[[1, -theta], [-theta, -1]]``.

    Built from ``a_IJ = -exp(i pi (I + J) / 2)`` and
    ``b_IJ = (theta / 2) eps_IJ``.
    """
    idx = np.arange(1, 3)
    a = -np.exp(0.5j * np.pi * (idx[:, None] + idx[None, :]))
    return build_omega_general(a, 0.5 * theta * LEVI_CIVITA, theta=theta, family="edge")


def chiral_velocities(model: ChiralModel) -> np.ndarray:
    """Signed branch velocities, sorted in descending order.

    Magnitudes are square roots of the eigenvalues of ``Omega^2``; each
    sign is that of the ``Omega`` eigenvalue on the shared eigenvector
    (positive for left movers).
    """
    mu = np.linalg.eigvalsh(model.omega)
    lam = np.clip(np.linalg.eigvalsh(model.omega @ model.omega), 0.0, None)
    signs = np.sign(mu[np.argsort(np.abs(mu), kind="stable")])
    v = signs * np.sqrt(lam)
    return np.sort(v)[::-1]


def theta_bar(theta: float) -> float:
    """``sqrt(1 + theta^2)``."""
    return math.hypot(1.0, theta)


# ---------------------------------------------------------------------------
# coupled left/right edges
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CoupledEdgeModel:
    """Left and right movers with inverse velocities ``k_plus``, ``k_minus`` and coupling ``k``."""

    k_plus: float
    k_minus: float
    k: float

    def __post_init__(self) -> None:
        for name in ("k_plus", "k_minus", "k"):
            value = float(getattr(self, name))
            if not math.isfinite(value):
                raise InvalidModelError(f"{name} must be finite")
            object.__setattr__(self, name, value)
        if self.k_plus <= 0 or self.k_minus <= 0:
            raise InvalidModelError("k_plus and k_minus must be positive")

    @property
    def omega(self) -> np.ndarray:
        """``omega[s, s'] = s k_s delta + s k eps``, i.e. ``[[k+, k], [k, -k-]]``."""
        return np.array([[self.k_plus, self.k], [self.k, -self.k_minus]])


class EdgeEigen(NamedTuple):
    lambda_plus: float
    lambda_minus: float
    U: np.ndarray


def coupled_edge_eigen(model: CoupledEdgeModel) -> EdgeEigen:
    """Eigenvalues ``lambda_+ > 0 > lambda_-`` of ``omega`` and the rotation ``U``.

    ``U`` has columns ``(lambda_+ + k_-, k)`` and ``(-k, lambda_+ + k_-)``,
    normalized, so ``U^T omega U = diag(lambda_+, lambda_-)``, ``det U = 1``
    and ``U = I`` when ``k = 0``.
    """
    kp, km, k = model.k_plus, model.k_minus, model.k
    root = 0.5 * math.sqrt(4.0 * k * k + (kp + km) ** 2)
    lam_p = 0.5 * (kp - km) + root
    lam_m = 0.5 * (kp - km) - root
    a = lam_p + km
    norm = math.hypot(a, k)
    u = np.array([[a, -k], [k, a]]) / norm
    return EdgeEigen(lam_p, lam_m, u)


def deformed_bracket_delta(model: CoupledEdgeModel) -> np.ndarray:
    """``Delta = U^-1 diag(+1, -1) U^-T`` for the decoupled fields."""
    u_inv = np.linalg.inv(coupled_edge_eigen(model).U)
    delta = u_inv @ SECTOR_SIGNS @ u_inv.T
    return 0.5 * (delta + delta.T)


# ---------------------------------------------------------------------------
# deformed Kac-Moody modes
# ---------------------------------------------------------------------------


def field_map_matrix(theta: float) -> np.ndarray:
    """``M = c (I - r eps)`` acting on the sector index.

    ``c = sqrt((tb + 1) / 2)`` and ``r = sqrt((tb - 1) / (tb + 1))`` with
    ``tb = sqrt(1 + theta^2)``.  ``M M^T = M^T M = tb I``.
    """
    tb = theta_bar(theta)
    c = math.sqrt(0.5 * (tb + 1.0))
    r = math.sqrt((tb - 1.0) / (tb + 1.0))
    return c * (np.eye(2) - r * LEVI_CIVITA)


def kac_moody_map(theta: float, alpha_modes: np.ndarray) -> np.ndarray:
    """Deformed modes ``beta^s = c (alpha^s - r eps_ss' alpha^s')``.

    ``alpha_modes`` has the sector on axis 0 (length 2, order ``+, -``);
    remaining axes index modes and are mapped independently.
    """
    alpha = np.asarray(alpha_modes)
    if alpha.ndim == 0 or alpha.shape[0] != 2:
        raise ValueError("alpha_modes must have the two sectors on axis 0")
    return np.tensordot(field_map_matrix(theta), alpha, axes=(1, 0))


def mode_algebra(modes: Sequence[int], sector_matrix: np.ndarray | None = None) -> np.ndarray:
    """Commutator tensor ``T[s, i, s', j] = [a^s_{n_i}, a^{s'}_{n_j}]``.

    With ``sector_matrix = G`` this is ``n_i G[s, s'] delta(n_i + n_j)``;
    the default ``G = I`` is the undeformed U(1) current algebra.
    """
    n = np.asarray(modes, dtype=int)
    if np.any(n == 0):
        raise ValueError("zero modes are not part of the oscillator algebra")
    g = np.eye(2) if sector_matrix is None else np.asarray(sector_matrix, dtype=float)
    pair = (n[:, None] + n[None, :] == 0) * n[:, None]
    return np.einsum("ab,ij->aibj", g, pair.astype(float))


def induced_mode_algebra(theta: float, modes: Sequence[int]) -> np.ndarray:
    """Commutators of the mapped modes, propagated bilinearly from the undeformed algebra.

    ``[beta^s_n, beta^s'_m] = sum M[s,a] M[s',b] [alpha^a_n, alpha^b_m]``.
    The result equals ``theta_bar * n * delta_ss' * delta(n + m)``.
    """
    m = field_map_matrix(theta)
    return np.einsum("sa,tb,aibj->sitj", m, m, mode_algebra(modes))


def edge_form_congruence(theta: float) -> np.ndarray:
    """``M diag(+1, -1) M^T``, the bracket matrix of the mapped fields.

    ``M`` depends on ``theta`` only through ``theta^2``; the result is the
    edge metric at ``-|theta|``, i.e. ``[[1, |theta|], [|theta|, -1]]``.
    """
    m = field_map_matrix(theta)
    return m @ SECTOR_SIGNS @ m.T


# ---------------------------------------------------------------------------
# statistics and filling
# ---------------------------------------------------------------------------


def statistical_phase(m: int, theta: float, s: int, s_prime: int, position_sign: int) -> complex:
    """Exchange phase of the electron operators ``O_s(x) O_s'(x')``.

    Same sector: ``-1``.  Opposite sectors:
    ``exp(-i (2m + 1) pi theta eps_ss' position_sign)``.
    """
    if int(m) != m or m < 0:
        raise ValueError("m must be a nonnegative integer")
    if position_sign not in (1, -1):
        raise ValueError("position_sign must be +1 or -1")
    if s == s_prime:
        _sector_index(s)
        return complex(-1.0, 0.0)
    eps = levi_civita(s, s_prime)
    return cmath.exp(-1j * (2 * m + 1) * math.pi * theta * eps * position_sign)


@dataclass(frozen=True)
class FillingResult:
    m: int
    theta_bar: float
    nu: float
    exponent: float
    nu_exact: Fraction | None = None


def filling_factor(m: int, theta_bar: "float | Fraction") -> FillingResult:
    """Correlation exponent ``(2m + 1) theta_bar`` and filling ``1 / exponent``.

    ``theta_bar`` is an independent parameter here.  Rational input also
    yields ``nu_exact`` as a :class:`fractions.Fraction`.
    """
    if int(m) != m or m < 0:
        raise ValueError("m must be a nonnegative integer")
    m = int(m)
    if not theta_bar > 0:
        raise ValueError("theta_bar must be positive")
    exact = None
    if isinstance(theta_bar, Rational):
        exact = 1 / ((2 * m + 1) * Fraction(theta_bar))
    exponent = (2 * m + 1) * float(theta_bar)
    return FillingResult(m, float(theta_bar), 1.0 / exponent, exponent, exact)


JAIN_VARIANTS = ("published", "consistent")


@dataclass(frozen=True)
class JainResult:
    m: int
    p: int
    theta_bar: Fraction
    nu: float
    nu_target: Fraction
    consistent: bool
    real_theta_exists: bool
    theta: float | None

    def to_row(self) -> tuple:
        return (
            self.m,
            self.p,
            float(self.theta_bar),
            self.nu,
            float(self.nu_target),
            self.consistent,
            self.real_theta_exists,
        )


JAIN_CSV_HEADER = ("m", "p", "theta_bar", "nu", "nu_target", "consistent", "real_theta_exists")


def jain_theta_bar(m: int, p: int, *, variant: str = "published", tol: float = 1e-12) -> JainResult:
    """Deformation ``theta_bar`` meant to produce the Jain filling ``p / (2m + p)``.

    ``variant='published'`` uses ``1 - (1 - 1/p) / (2m + 1)``; its filling
    ``1 / ((2m + 1) theta_bar)`` is ``p / (2mp + 1)``, which matches the
    target only for ``p = 1``.  ``variant='consistent'`` uses
    ``1 - 2m (1 - 1/p) / (2m + 1)``, which hits the target exactly.  The
    ``consistent`` flag compares the computed filling with the target to
    ``tol``; a real ``theta`` exists only when ``theta_bar >= 1``.
    """
    if int(m) != m or m < 0:
        raise ValueError("m must be a nonnegative integer")
    if int(p) != p or p < 1:
        raise ValueError("p must be a positive integer")
    m, p = int(m), int(p)
    shift = Fraction(1, 2 * m + 1) * (1 - Fraction(1, p))
    if variant == "published":
        tb = 1 - shift
    elif variant == "consistent":
        tb = 1 - 2 * m * shift
    else:
        raise ValueError(f"variant must be one of {JAIN_VARIANTS}")
    nu = filling_factor(m, tb).nu
    target = Fraction(p, 2 * m + p)
    real = tb >= 1
    theta = math.sqrt(float(tb * tb - 1)) if real else None
    return JainResult(m, p, tb, nu, target, abs(nu - float(target)) <= tol, real, theta)


# ---------------------------------------------------------------------------
# nonlinear dispersion
# ---------------------------------------------------------------------------


def nonlinear_dispersion(theta: float, n: int) -> float:
    """Single-quantum energy ``n (1 + theta^2 n^2)`` of edge mode ``n >= 1``."""
    if int(n) != n or n < 1:
        raise ValueError("n must be a positive integer")
    n = int(n)
    return n * (1.0 + theta * theta * n * n)


def shifted_field_map(theta: float, phi_modes: np.ndarray, pi_modes: np.ndarray) -> np.ndarray:
    """``Phi_s = phi_s + theta sum_s' eps_ss' pi_s'`` applied mode-wise.

    Both arrays carry the sector on axis 0 and must have equal shapes.
    """
    phi = np.asarray(phi_modes)
    pi = np.asarray(pi_modes)
    if phi.shape != pi.shape:
        raise ValueError(f"phi and pi shapes differ: {phi.shape} vs {pi.shape}")
    if phi.ndim == 0 or phi.shape[0] != 2:
        raise ValueError("mode arrays must have the two sectors on axis 0")
    return phi + theta * np.tensordot(LEVI_CIVITA, pi, axes=(1, 0))


def edge_mode_basis(n_max: int) -> list[tuple[int, int]]:
    """Oscillator labels ``(s, n)`` with ``0 < |n| <= n_max``, sector-major."""
    if n_max < 1:
        raise ValueError("n_max must be >= 1")
    ns = [n for n in range(-n_max, n_max + 1) if n != 0]
    return [(s, n) for s in SECTORS for n in ns]


def _mode_profiles(n_max: int, n_grid: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Per-sector profiles of ``d phi`` and ``d^2 phi`` for each basis oscillator.

    ``phi_s = i sum alpha_n / n exp(-i n s x)`` gives
    ``d phi_s = s sum alpha_n exp(-i n s x)`` and
    ``d^2 phi_s = -i sum n alpha_n exp(-i n s x)``.
    Returned arrays have shape ``(2, n_basis, n_grid)``.
    """
    x = 2.0 * np.pi * np.arange(n_grid) / n_grid
    basis = edge_mode_basis(n_max)
    d1 = np.zeros((2, len(basis), n_grid), dtype=complex)
    d2 = np.zeros_like(d1)
    for k, (s, n) in enumerate(basis):
        wave = np.exp(-1j * n * s * x)
        d1[_sector_index(s), k] = s * wave
        d2[_sector_index(s), k] = -1j * n * wave
    return x, d1, d2


def _quadratic_form(fields: np.ndarray) -> np.ndarray:
    """``C[a, b] = (1/4pi) sum_s integral f_s^a f_s^b dx`` by the trapezoid rule."""
    n_grid = fields.shape[-1]
    c = np.einsum("sax,sbx->ab", fields, fields) * (2.0 * np.pi / n_grid) / (4.0 * np.pi)
    return 0.5 * (c + c.T)


def shifted_hamiltonian_form(theta: float, n_max: int) -> np.ndarray:
    """Oscillator quadratic form of ``(1/4pi) sum_s integral (d Phi_s)^2``.

    ``Phi`` is the shifted field with ``pi_s = d phi_s``; the integral is
    exact for the truncated trigonometric polynomials.
    """
    _, d1, d2 = _mode_profiles(n_max, 4 * n_max + 4)
    return _quadratic_form(shifted_field_map(theta, d1, d2))


def expanded_hamiltonian_form(theta: float, n_max: int, cross: float | None = None) -> np.ndarray:
    """Quadratic form of ``(d phi)^2 + theta^2 (d^2 phi)^2 + cross eps d phi_s d^2 phi_s'``.

    ``cross`` defaults to ``2 theta``, the coefficient produced by squaring
    the shifted field.
    """
    cross = 2.0 * theta if cross is None else float(cross)
    _, d1, d2 = _mode_profiles(n_max, 4 * n_max + 4)
    n_grid = d1.shape[-1]
    w = (2.0 * np.pi / n_grid) / (4.0 * np.pi)
    c = np.einsum("sax,sbx->ab", d1, d1) + theta**2 * np.einsum("sax,sbx->ab", d2, d2)
    c = c + cross * np.einsum("st,sax,tbx->ab", LEVI_CIVITA, d1, d2)
    c = c * w
    return 0.5 * (c + c.T)


def dispersion_from_form(form: np.ndarray, n_max: int) -> np.ndarray:
    """Energies ``E_n = n (C[-n, n] + C[n, -n])`` of the number-conserving part.

    Returns shape ``(2, n_max)``: one row per sector.  The coefficient of
    ``alpha^s_-n alpha^s_n`` times the commutator ``[alpha_n, alpha_-n] = n``
    is the energy carried by one quantum of mode ``n``.
    """
    index = {label: k for k, label in enumerate(edge_mode_basis(n_max))}
    out = np.empty((2, n_max))
    for s in SECTORS:
        for n in range(1, n_max + 1):
            a, b = index[(s, -n)], index[(s, n)]
            out[_sector_index(s), n - 1] = n * (form[a, b] + form[b, a]).real
    return out


def heisenberg_generator(form: np.ndarray, n_max: int) -> np.ndarray:
    """Matrix ``L`` with ``[H, alpha_j] = sum_a L[j, a] alpha_a``.

    Uses ``[alpha^s_n, alpha^s'_m] = n delta_ss' delta(n + m)``.
    """
    basis = edge_mode_basis(n_max)
    g = np.zeros((len(basis), len(basis)))
    for i, (s, n) in enumerate(basis):
        for j, (t, m) in enumerate(basis):
            if s == t and n + m == 0:
                g[i, j] = n
    return (2.0 * form @ g).T


def dispersion_oracle(theta: float, n_max: int) -> np.ndarray:
    """``E_n`` for ``n = 1..n_max`` read off the shifted-field Hamiltonian.

    The form is assembled from the shifted fields by quadrature and the
    ``alpha_-n alpha_n`` coefficients are extracted for both sectors, which
    must agree.
    """
    table = dispersion_from_form(shifted_hamiltonian_form(theta, n_max), n_max)
    if not np.allclose(table[0], table[1], rtol=1e-13, atol=0.0):
        raise ArithmeticError("sector dispersions disagree")
    return table[0]


# ---------------------------------------------------------------------------
# shifted-field commutator
# ---------------------------------------------------------------------------


def canonical_field_kernels(n_max: int) -> tuple[np.ndarray, np.ndarray]:
    """Fourier data of the undeformed chiral field commutators.

    Returns ``(modes, K)`` with ``K[a, b, k]`` the coefficient of
    ``exp(i n_k (x - y))`` in ``[F_a(x), F_b(y)]`` for
    ``F = (phi_+, phi_-, pi_+, pi_-)``.  The kernels are
    ``[phi_s, phi_s'] = -i s delta_ss' eps(x - y)``,
    ``[phi_s, pi_s'] = i delta_ss' delta(x - y)`` and
    ``[pi_s, pi_s'] = i s delta_ss' delta'(x - y)``, with ``eps`` the odd
    periodic step whose derivative is ``delta`` minus its mean.
    """
    modes = np.arange(-n_max, n_max + 1)
    safe = np.where(modes == 0, 1, modes)
    delta = np.full(modes.shape, 1.0 / (2.0 * np.pi), dtype=complex)
    step = np.where(modes == 0, 0.0, 1.0 / (2.0j * np.pi * safe))
    ddelta = 1j * modes / (2.0 * np.pi)
    k = np.zeros((4, 4, modes.size), dtype=complex)
    for i, s in enumerate(SECTORS):
        k[i, i] = -1j * s * step
        k[i, 2 + i] = 1j * delta
        k[2 + i, i] = -1j * delta
        k[2 + i, 2 + i] = 1j * s * ddelta
    return modes, k


def shifted_field_kernels(theta: float, n_max: int) -> tuple[np.ndarray, np.ndarray]:
    """Fourier data of ``[Phi_s(x), Phi_s'(y)]`` by bilinear propagation."""
    modes, k = canonical_field_kernels(n_max)
    t = np.hstack([np.eye(2), theta * LEVI_CIVITA])
    return modes, np.einsum("sa,tb,abk->stk", t, t, k)


def shifted_commutator_kernel(
    theta: float, x: "np.ndarray | float", y: "np.ndarray | float", n_max: int
) -> np.ndarray:
    """Truncated mode sum of ``[Phi_s(x), Phi_s'(y)]``, shape ``(..., 2, 2)``."""
    modes, k = shifted_field_kernels(theta, n_max)
    u = np.subtract(x, y)
    phase = np.exp(1j * np.multiply.outer(u, modes))
    return np.einsum("...k,stk->...st", phase, k)


def format_model(model: ChiralModel) -> str:
    """Plain-text matrix dump used by the command-line reports."""
    return format_matrix(model.omega)
