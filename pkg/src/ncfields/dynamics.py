"""Time evolution of a single mode block under a deformed bracket.

States are bare coordinates ``(q1, q2, p1, p2)`` and evolve by
``d xi/dt = K xi`` with ``K = bracket_deformed @ M_bare``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.linalg import eigh, expm

from .errors import StepFailureError
from .spectra import bare_hamiltonian_matrix, dynamics_generator, hamiltonian_matrix
from .symplectic_core import DeformationParams, dressing_map
from .textio import to_csv

TRAJECTORY_CSV_HEADER = ("t", "q1", "q2", "p1", "p2", "H")


@dataclass(frozen=True)
class Trajectory:
    times: np.ndarray
    states: np.ndarray
    energy: np.ndarray

    def __post_init__(self) -> None:
        times = np.asarray(self.times, dtype=float)
        states = np.asarray(self.states, dtype=float)
        energy = np.asarray(self.energy, dtype=float)
        if times.ndim != 1 or times.size == 0:
            raise ValueError("times must be a nonempty 1-d sequence")
        if np.any(np.diff(times) <= 0):
            raise ValueError("times must be strictly increasing")
        if states.shape[0] != times.size or energy.shape != times.shape:
            raise ValueError("times, states and energy lengths differ")
        for arr in (times, states, energy):
            arr.setflags(write=False)
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "states", states)
        object.__setattr__(self, "energy", energy)

    def __len__(self) -> int:
        return self.times.size

    def energy_drift(self) -> float:
        """``max |H(t) - H(0)| / |H(0)|`` (absolute if ``H(0) == 0``)."""
        dev = np.max(np.abs(self.energy - self.energy[0]))
        scale = abs(self.energy[0])
        return float(dev / scale) if scale > 0 else float(dev)

    def to_csv(self) -> str:
        rows = (
            (t, *x, h) for t, x, h in zip(self.times, self.states, self.energy)
        )
        return to_csv(TRAJECTORY_CSV_HEADER, rows)


def block_energy(params: DeformationParams, n: int, states: np.ndarray) -> np.ndarray:
    """Energy of bare states, evaluated in the dressed frame.

    Equal to ``0.5 x^T M_bare x``.  Going through the dressed coordinates
    avoids cancellation for the zero mode, whose coordinates grow linearly
    while the energy depends on the conserved momenta only.
    """
    states = np.atleast_2d(np.asarray(states, dtype=float))
    xi = states @ dressing_map(params, 1).forward.T
    h = hamiltonian_matrix(params, abs(n)).h_matrix
    return 0.5 * np.einsum("ti,ij,tj->t", xi, h, xi)


def _state(state0: Sequence[float]) -> np.ndarray:
    x = np.asarray(state0, dtype=float)
    if x.shape != (4,):
        raise ValueError("state0 must be a real 4-vector (q1, q2, p1, p2)")
    return x


def propagator(params: DeformationParams, n: int, times: Sequence[float]) -> np.ndarray:
    """Stack of ``exp(t K)`` for each ``t``.

    When the block Hamiltonian ``M`` is positive definite the flow is
    conjugate, through ``L = M^(1/2)``, to ``exp(t A)`` with
    ``A = L bracket L`` antisymmetric.  ``A`` is exponentiated from the
    Hermitian eigendecomposition of ``iA``, so each propagator is
    orthogonal in the energy metric to round-off and energy does not drift
    with ``t``.  For singular ``M`` (the zero mode) ``K`` is nilpotent
    with ``K^2 = 0`` and ``exp(t K) = I + t K`` is used directly; any
    other singular case falls back to ``expm``.
    """
    times = np.asarray(times, dtype=float)
    k = dynamics_generator(params, n)
    m = bare_hamiltonian_matrix(params, n)
    w, v = eigh(m)
    if w.min() <= 1e-12 * w.max():
        scale = np.linalg.norm(k) ** 2
        if np.linalg.norm(k @ k) <= 1e-13 * scale:
            return np.eye(4) + np.multiply.outer(times, k)
        return np.array([expm(t * k) for t in times])
    root = (v * np.sqrt(w)) @ v.T
    inv_root = (v / np.sqrt(w)) @ v.T
    a = root @ (k @ inv_root)
    a = 0.5 * (a - a.T)
    mu, u = np.linalg.eigh(1j * a)
    phases = np.exp(-1j * np.multiply.outer(times, mu))
    rot = np.einsum("ij,tj,kj->tik", u, phases, u.conj()).real
    return inv_root @ rot @ root


def exact_evolve(
    params: DeformationParams, n: int, state0: Sequence[float], t_grid: Sequence[float]
) -> Trajectory:
    """Propagate with ``exp(t K)`` at every grid time (see :func:`propagator`)."""
    x0 = _state(state0)
    times = np.asarray(t_grid, dtype=float)
    if times.ndim != 1 or times.size == 0:
        raise ValueError("t_grid must be a nonempty 1-d sequence")
    if np.any(np.diff(times) <= 0):
        raise ValueError("t_grid must be strictly increasing")
    states = propagator(params, n, times) @ x0
    return Trajectory(times, states, block_energy(params, n, states))


def max_stable_step(params: DeformationParams, n: int) -> float:
    """``2 / ||K||_2``; below it the implicit midpoint step is always solvable."""
    return 2.0 / np.linalg.norm(dynamics_generator(params, n), 2)


def cayley_step_matrix(k: np.ndarray, dt: float) -> np.ndarray:
    """One implicit-midpoint step of a linear system: ``(I - dt K/2)^-1 (I + dt K/2)``."""
    eye = np.eye(k.shape[0])
    lhs = eye - 0.5 * dt * k
    if np.linalg.cond(lhs) > 1e12:
        raise StepFailureError("implicit midpoint system is singular for this step size")
    return np.linalg.solve(lhs, eye + 0.5 * dt * k)


def midpoint_evolve(
    params: DeformationParams, n: int, state0: Sequence[float], dt: float, steps: int
) -> Trajectory:
    """Implicit midpoint integration, ``steps`` steps of size ``dt``.

    For this linear flow every step is a Cayley transform, which conserves
    the quadratic energy to round-off.  Raises :class:`StepFailureError`
    when ``dt >= 2 / ||K||``.
    """
    x0 = _state(state0)
    if not dt > 0:
        raise ValueError("dt must be positive")
    if steps < 1:
        raise ValueError("steps must be >= 1")
    limit = max_stable_step(params, n)
    if dt >= limit:
        raise StepFailureError(f"dt={dt!r} exceeds the step limit 2/||K|| = {limit:.6g}")
    k = dynamics_generator(params, n)
    step = cayley_step_matrix(k, dt)
    states = np.empty((steps + 1, 4))
    states[0] = x0
    for i in range(steps):
        states[i + 1] = step @ states[i]
    times = dt * np.arange(steps + 1)
    return Trajectory(times, states, block_energy(params, n, states))


def frequency_extract(
    traj: Trajectory,
    *,
    per_coordinate: bool = False,
    rel_floor: float = 1e-3,
    halo: int = 2,
) -> "list[float] | list[list[float]]":
    """Angular frequencies of spectral peaks in each coordinate.

    Each coordinate has its mean removed and is Hann-windowed before the
    DFT.  A peak is a bin that is the largest within ``halo`` bins on
    either side and exceeds both ten times the median magnitude and
    ``rel_floor`` times the largest magnitude of that coordinate.  Peaks
    closer than one bin across coordinates are merged unless
    ``per_coordinate`` is set.  Two frequencies closer than about four
    bins are not resolved.
    """
    times = traj.times
    if times.size < 256:
        raise ValueError("frequency extraction needs at least 256 samples")
    steps = np.diff(times)
    dt = steps.mean()
    if not np.allclose(steps, dt, rtol=1e-9, atol=0.0):
        raise ValueError("frequency extraction needs a uniform time grid")

    n = times.size
    omega = 2.0 * np.pi * np.fft.rfftfreq(n, d=dt)
    bin_width = omega[1]
    window = np.hanning(n)
    found: list[list[float]] = []
    for col in np.atleast_2d(traj.states.T):
        mag = np.abs(np.fft.rfft((col - col.mean()) * window))
        top = mag.max()
        if top <= 1e-12 * max(1.0, np.abs(col).max()) * n:
            found.append([])
            continue
        threshold = max(10.0 * np.median(mag), rel_floor * top)
        peaks = [
            float(omega[k])
            for k in range(1, mag.size - 1)
            if mag[k] > threshold and mag[k] == mag[max(0, k - halo) : k + halo + 1].max()
        ]
        found.append(peaks)
    if per_coordinate:
        return found

    merged: list[float] = []
    for w in sorted(w for peaks in found for w in peaks):
        if merged and w - merged[-1] <= bin_width:
            continue
        merged.append(w)
    return merged


def frequency_bin(traj: Trajectory) -> float:
    """Angular width of one DFT bin for the trajectory's time grid."""
    dt = float(np.mean(np.diff(traj.times)))
    return 2.0 * np.pi / (traj.times.size * dt)
