"""Canonical and deformed symplectic forms on truncated mode spaces.

Each Fourier mode pair (n, -n) of the two-component field is resolved into
real coordinates laid out per block as ``(q1, q2, p1, p2)``.  A symplectic
form ``omega`` is stored together with its Poisson tensor ``bracket``, whose
entries are the fundamental brackets ``{xi_I, xi_J} = bracket[I, J]``.

Sign conventions
----------------
``epsilon = [[0, 1], [-1, 0]]`` (``eps_12 = +1``).  The form is the
two-form matrix of ``sum dq ^ dp`` plus the deformation block, and the
Hamiltonian vector field obeys ``i_X omega = dH``.  This makes the Poisson
tensor ``-inv(omega)`` (equivalently ``bracket @ omega.T == I``) and gives

* E-deformation (p-p block ``+theta*eps``):  ``{q1, q2} = -theta``
* B-deformation (q-q block ``-theta*eps``):  ``{p1, p2} = +theta``

with ``{q_i, p_j} = delta_ij`` in both cases.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

LEVI_CIVITA = np.array([[0.0, 1.0], [-1.0, 0.0]])
_I2 = np.eye(2)
_Z2 = np.zeros((2, 2))

BLOCK_DIM = 4
COORDINATE_NAMES = ("q1", "q2", "p1", "p2")


class DeformationKind(str, enum.Enum):
    CANONICAL = "canonical"
    E_DEFORMED = "E"
    B_DEFORMED = "B"

    @classmethod
    def parse(cls, value: "str | DeformationKind") -> "DeformationKind":
        if isinstance(value, cls):
            return value
        key = str(value).strip()
        aliases = {
            "canonical": cls.CANONICAL,
            "e": cls.E_DEFORMED,
            "edeformed": cls.E_DEFORMED,
            "e_deformed": cls.E_DEFORMED,
            "b": cls.B_DEFORMED,
            "bdeformed": cls.B_DEFORMED,
            "b_deformed": cls.B_DEFORMED,
        }
        try:
            return aliases[key.lower()]
        except KeyError:
            raise ValueError(f"unknown deformation kind {value!r}") from None


@dataclass(frozen=True)
class DeformationParams:
    """Deformation kind plus the dimensionless parameter ``theta``.

    ``kind=CANONICAL`` ignores ``theta`` and behaves like either deformed
    kind at ``theta = 0``.
    """

    kind: DeformationKind = DeformationKind.CANONICAL
    theta: float = 0.0

    def __post_init__(self) -> None:
        object.__setattr__(self, "kind", DeformationKind.parse(self.kind))
        theta = float(self.theta)
        if not math.isfinite(theta):
            raise ValueError(f"theta must be finite, got {self.theta!r}")
        object.__setattr__(self, "theta", theta)

    @classmethod
    def e(cls, theta: float) -> "DeformationParams":
        return cls(DeformationKind.E_DEFORMED, theta)

    @classmethod
    def b(cls, theta: float) -> "DeformationParams":
        return cls(DeformationKind.B_DEFORMED, theta)

    @property
    def effective_theta(self) -> float:
        return 0.0 if self.kind is DeformationKind.CANONICAL else self.theta

    def tensor(self) -> np.ndarray:
        """The antisymmetric deformation tensor ``theta * eps``."""
        return self.effective_theta * LEVI_CIVITA


@dataclass(frozen=True)
class ModeBlock:
    """Real canonical coordinates of one part of the mode pair (n, -n).

    A complex mode ``q_n = (x + i y) / sqrt(2)`` (and likewise ``p_n``)
    splits into a real-part block ``(x1, x2, u1, u2)`` and an
    imaginary-part block ``(y1, y2, v1, v2)``; ``q_{-n}`` is the conjugate,
    so no further coordinates are needed.
    """

    mode_index: int
    part: str
    coords: tuple[float, float, float, float]

    def __post_init__(self) -> None:
        if self.mode_index < 0:
            raise ValueError("mode_index must be >= 0")
        if self.part not in ("re", "im"):
            raise ValueError("part must be 're' or 'im'")
        coords = tuple(float(c) for c in self.coords)
        if len(coords) != BLOCK_DIM:
            raise ValueError("a mode block has exactly four coordinates")
        object.__setattr__(self, "coords", coords)

    @property
    def vector(self) -> np.ndarray:
        return np.array(self.coords)


def real_blocks(n: int, q: "np.ndarray | list", p: "np.ndarray | list") -> tuple[ModeBlock, ModeBlock]:
    """Resolve complex modes ``q_n = (q^1_n, q^2_n)``, ``p_n`` into two real blocks."""
    q = np.asarray(q, dtype=complex)
    p = np.asarray(p, dtype=complex)
    if q.shape != (2,) or p.shape != (2,):
        raise ValueError("q and p must each hold the two field components")
    if n == 0 and (np.any(q.imag != 0) or np.any(p.imag != 0)):
        raise ValueError("the zero mode is real")
    s = math.sqrt(2.0)
    re = ModeBlock(abs(n), "re", tuple(s * np.concatenate([q.real, p.real])))
    im = ModeBlock(abs(n), "im", tuple(s * np.concatenate([q.imag, p.imag])))
    return re, im


def complex_modes(re: ModeBlock, im: ModeBlock) -> tuple[np.ndarray, np.ndarray]:
    """Inverse of :func:`real_blocks`; returns ``(q_n, p_n)``."""
    z = (re.vector + 1j * im.vector) / math.sqrt(2.0)
    return z[:2], z[2:]


def coordinate_index(block: int, name: str) -> int:
    """Position of coordinate ``name`` (``'q1'`` ... ``'p2'``) in mode block ``block``."""
    return BLOCK_DIM * block + COORDINATE_NAMES.index(name)


@dataclass(frozen=True)
class SymplecticMatrix:
    """Antisymmetric form ``omega`` and its Poisson tensor ``bracket``."""

    omega: np.ndarray
    bracket: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        omega = np.array(self.omega, dtype=float)
        bracket = np.array(self.bracket, dtype=float)
        if omega.ndim != 2 or omega.shape[0] != omega.shape[1] or omega.shape[0] % 2:
            raise ValueError("omega must be a square matrix of even dimension")
        if bracket.shape != omega.shape:
            raise ValueError("bracket and omega shapes differ")
        omega.setflags(write=False)
        bracket.setflags(write=False)
        object.__setattr__(self, "omega", omega)
        object.__setattr__(self, "bracket", bracket)

    @classmethod
    def from_form(cls, omega: np.ndarray) -> "SymplecticMatrix":
        """Build from a form alone; the bracket is obtained by inversion."""
        omega = np.asarray(omega, dtype=float)
        if not np.array_equal(omega, -omega.T):
            raise ValueError("omega is not antisymmetric")
        try:
            inv = np.linalg.inv(omega)
        except np.linalg.LinAlgError:
            raise ValueError("omega is degenerate") from None
        return cls(omega, -inv)

    @property
    def dim(self) -> int:
        return self.omega.shape[0]

    def poisson(self, grad_f: np.ndarray, grad_g: np.ndarray) -> float:
        """``{F, G}`` for linear functions with the given gradients."""
        return float(np.asarray(grad_f) @ self.bracket @ np.asarray(grad_g))

    def to_text(self) -> str:
        from .textio import format_matrix

        return format_matrix(self.omega)


def _check_n_modes(n_modes: int) -> int:
    if isinstance(n_modes, bool) or int(n_modes) != n_modes:
        raise ValueError(f"n_modes must be an integer, got {n_modes!r}")
    if n_modes < 1:
        raise ValueError(f"n_modes must be >= 1, got {n_modes}")
    return int(n_modes)


def _tile(block: np.ndarray, n_modes: int) -> np.ndarray:
    return np.kron(np.eye(n_modes), block)


def _blocks(params: DeformationParams) -> tuple[np.ndarray, np.ndarray]:
    t = params.tensor()
    if params.kind is DeformationKind.B_DEFORMED:
        omega = np.block([[-t, _I2], [-_I2, _Z2]])
        bracket = np.block([[_Z2, _I2], [-_I2, t]])
    else:
        omega = np.block([[_Z2, _I2], [-_I2, t]])
        bracket = np.block([[-t, _I2], [-_I2, _Z2]])
    return omega, bracket


def build_canonical_form(n_modes: int) -> SymplecticMatrix:
    """Darboux form on ``n_modes`` blocks, ``[[0, I], [-I, 0]]`` per block."""
    return build_deformed_form(DeformationParams(), n_modes)


def build_deformed_form(params: DeformationParams, n_modes: int) -> SymplecticMatrix:
    """Deformed form: E adds ``theta*eps`` in the p-p sector, B adds ``-theta*eps`` in q-q."""
    n_modes = _check_n_modes(n_modes)
    omega, bracket = _blocks(params)
    return SymplecticMatrix(_tile(omega, n_modes), _tile(bracket, n_modes))


def deformation_block(params: DeformationParams) -> np.ndarray:
    """The 4x4 difference between the deformed and canonical form on one block."""
    omega, _ = _blocks(params)
    return omega - _blocks(DeformationParams())[0]


@dataclass(frozen=True)
class DressingMap:
    """Linear map ``(Q, P) = forward @ (q, p)`` to Darboux coordinates."""

    forward: np.ndarray
    inverse: np.ndarray

    def apply(self, state: np.ndarray) -> np.ndarray:
        return self.forward @ np.asarray(state, dtype=float)

    def undo(self, state: np.ndarray) -> np.ndarray:
        return self.inverse @ np.asarray(state, dtype=float)


def dressing_map(params: DeformationParams, n_modes: int = 1) -> DressingMap:
    """Dressing transformation that removes the deformation.

    E-kind: ``Q = q - E p / 2``, ``P = p``.
    B-kind: ``Q = q``, ``P = p - B q / 2``.
    """
    n_modes = _check_n_modes(n_modes)
    half = 0.5 * params.tensor()
    if params.kind is DeformationKind.B_DEFORMED:
        fwd = np.block([[_I2, _Z2], [-half, _I2]])
        inv = np.block([[_I2, _Z2], [half, _I2]])
    else:
        fwd = np.block([[_I2, -half], [_Z2, _I2]])
        inv = np.block([[_I2, half], [_Z2, _I2]])
    return DressingMap(_tile(fwd, n_modes), _tile(inv, n_modes))


def pulled_back_form(params: DeformationParams, n_modes: int) -> np.ndarray:
    """Deformed form expressed in the dressed coordinates."""
    dm = dressing_map(params, n_modes)
    omega = build_deformed_form(params, n_modes).omega
    return dm.inverse.T @ omega @ dm.inverse


def canonicalization_residual(params: DeformationParams, n_modes: int) -> float:
    """Max-norm distance between the pulled-back form and the Darboux form."""
    canonical = build_canonical_form(n_modes).omega
    return float(np.max(np.abs(pulled_back_form(params, n_modes) - canonical)))


def quantum_commutator_matrix(params: DeformationParams, n_modes: int) -> np.ndarray:
    """Matrix ``C`` with ``[xi_I, xi_J] = i C[I, J]``; equal to the Poisson tensor."""
    return np.array(build_deformed_form(params, n_modes).bracket)


KERNEL_SECTORS = ("phi_phi", "phi_pi", "pi_pi")


def dirichlet_kernel(u: "np.ndarray | float", n_max: int) -> np.ndarray:
    """Partial sum ``(1/2pi) sum_{|n|<=n_max} exp(-i n u)`` of the periodic delta."""
    u = np.asarray(u, dtype=float)
    n = np.arange(1, n_max + 1)
    return (1.0 + 2.0 * np.cos(u[..., None] * n).sum(axis=-1)) / (2.0 * np.pi)


def commutator_kernel(
    params: DeformationParams,
    x: "np.ndarray | float",
    y: "np.ndarray | float",
    n_max: int,
    which: str,
) -> np.ndarray:
    """Truncated mode-sum reconstruction of an equal-time field commutator.

    Returns the complex 2x2 matrix (indexed by field components i, j) of
    ``[A^i(x), B^j(y)]`` with ``(A, B)`` chosen by ``which``.  ``x`` and
    ``y`` broadcast; the result has shape ``broadcast(x, y).shape + (2, 2)``.
    The partial sums only converge weakly, so compare against smooth test
    functions rather than pointwise.
    """
    if which not in KERNEL_SECTORS:
        raise ValueError(f"which must be one of {KERNEL_SECTORS}, got {which!r}")
    if n_max < 1:
        raise ValueError("n_max must be >= 1")
    c = quantum_commutator_matrix(params, 1)
    coeff = {"phi_phi": c[:2, :2], "phi_pi": c[:2, 2:], "pi_pi": c[2:, 2:]}[which]
    d = dirichlet_kernel(np.subtract(x, y), n_max)
    return 1j * d[..., None, None] * coeff
