"""Gaussian-state algebra for the optical modes of the interferometer.

Quadratures are ordered interleaved, ``(x1, p1, x2, p2, ...)``, with
``x = a + a†`` and ``p = -i(a - a†)``. In this convention the vacuum has unit
variance in every quadrature, so a variance of 1 is the shot-noise limit.

Every transform returns a new state; states are immutable values.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from numpy.typing import ArrayLike, NDArray

from tnli_afm.errors import InvalidArgumentError, NumericalError

SYMMETRY_RTOL = 1e-12
SYMPLECTIC_ATOL = 1e-10
PHYSICALITY_ATOL = 1e-9

_OMEGA_1 = np.array([[0.0, 1.0], [-1.0, 0.0]])


def symplectic_form(n_modes: int) -> NDArray[np.float64]:
    """Block-diagonal symplectic form with ``[[0, 1], [-1, 0]]`` per mode."""
    return np.kron(np.eye(n_modes), _OMEGA_1)


def _frozen(values: ArrayLike) -> NDArray[np.float64]:
    array = np.array(values, dtype=np.float64)
    array.setflags(write=False)
    return array


@dataclass(frozen=True, eq=False)
class GaussianState:
    """Mean quadrature vector and covariance matrix over ``n_modes`` modes."""

    mean: NDArray[np.float64]
    cov: NDArray[np.float64]

    def __post_init__(self) -> None:
        mean = _frozen(self.mean)
        cov = _frozen(self.cov)
        if mean.ndim != 1 or mean.size == 0 or mean.size % 2:
            raise InvalidArgumentError(
                f"mean must be a vector of length 2*n_modes, got shape {mean.shape}"
            )
        if cov.shape != (mean.size, mean.size):
            raise InvalidArgumentError(
                f"cov must be {mean.size}x{mean.size}, got shape {cov.shape}"
            )
        scale = max(float(np.max(np.abs(cov))), 1.0)
        if np.max(np.abs(cov - cov.T)) > SYMMETRY_RTOL * scale:
            raise InvalidArgumentError("cov is not symmetric")
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "cov", cov)

    @property
    def n_modes(self) -> int:
        return self.mean.size // 2

    def symplectic_eigenvalues(self) -> NDArray[np.float64]:
        """Symplectic eigenvalues of the covariance, ascending.

        The eigenvalues of ``i Omega V`` come in pairs ``±nu``; one of each pair
        is returned. The state is physical when all of them are at least 1.
        """
        omega = symplectic_form(self.n_modes)
        eigenvalues = np.abs(np.linalg.eigvals(1j * omega @ self.cov))
        return np.sort(eigenvalues)[::2]

    def is_physical(self, atol: float = PHYSICALITY_ATOL) -> bool:
        """Check ``cov + i Omega >= 0`` through the symplectic spectrum."""
        return bool(np.min(self.symplectic_eigenvalues()) >= 1.0 - atol)

    def purity(self) -> float:
        """``1 / sqrt(det cov)``; equals 1 for pure states."""
        return float(1.0 / np.sqrt(np.linalg.det(self.cov)))


@dataclass(frozen=True, eq=False)
class SymplecticOp:
    """Affine symplectic map ``mean -> S mean + d``, ``cov -> S cov S^T``.

    Construction fails with :class:`NumericalError` unless ``S^T Omega S = Omega``
    to within ``SYMPLECTIC_ATOL``.
    """

    matrix: NDArray[np.float64]
    displacement: NDArray[np.float64] | None = None

    def __post_init__(self) -> None:
        matrix = _frozen(self.matrix)
        dim = matrix.shape[0] if matrix.ndim == 2 else 0
        if dim == 0 or matrix.shape != (dim, dim) or dim % 2:
            raise InvalidArgumentError(f"invalid symplectic shape {matrix.shape}")
        displacement = _frozen(
            np.zeros(dim) if self.displacement is None else self.displacement
        )
        if displacement.shape != (dim,):
            raise InvalidArgumentError("displacement length does not match matrix")
        object.__setattr__(self, "matrix", matrix)
        object.__setattr__(self, "displacement", displacement)
        error = self.symplectic_error()
        if error > SYMPLECTIC_ATOL:
            raise NumericalError(f"matrix is not symplectic (max error {error:.3e})")

    @property
    def n_modes(self) -> int:
        return self.matrix.shape[0] // 2

    def symplectic_error(self) -> float:
        """``max |S^T Omega S - Omega|``."""
        omega = symplectic_form(self.n_modes)
        return float(np.max(np.abs(self.matrix.T @ omega @ self.matrix - omega)))

    @classmethod
    def embed(
        cls, local: NDArray[np.float64], modes: tuple[int, ...], n_modes: int
    ) -> SymplecticOp:
        """Lift a map acting on ``modes`` to the full ``n_modes`` system."""
        index = [q for mode in modes for q in (2 * mode, 2 * mode + 1)]
        full = np.eye(2 * n_modes)
        full[np.ix_(index, index)] = local
        return cls(full)

    def __matmul__(self, other: SymplecticOp) -> SymplecticOp:
        """Composition: ``(self @ other)`` applies ``other`` first."""
        return SymplecticOp(
            self.matrix @ other.matrix,
            self.matrix @ other.displacement + self.displacement,
        )

    def apply(self, state: GaussianState) -> GaussianState:
        if state.n_modes != self.n_modes:
            raise InvalidArgumentError(
                f"operator acts on {self.n_modes} modes, state has {state.n_modes}"
            )
        cov = self.matrix @ state.cov @ self.matrix.T
        return GaussianState(
            self.matrix @ state.mean + self.displacement, _symmetrized(cov)
        )


@dataclass(frozen=True)
class MeasurementCombination:
    """Weighted sum of homodyne quadratures, ``M = sum_i w_i X_i(theta_i)``.

    ``X_i(theta) = x_i cos(theta) + p_i sin(theta)``.
    """

    angles: tuple[float, ...]
    weights: tuple[float, ...]

    def __post_init__(self) -> None:
        angles = tuple(float(a) for a in self.angles)
        weights = tuple(float(w) for w in self.weights)
        if not angles or len(angles) != len(weights):
            raise InvalidArgumentError(
                "need one homodyne angle and one weight per mode"
            )
        if not all(np.isfinite(angles + weights)):
            raise InvalidArgumentError("angles and weights must be finite")
        if not any(weights):
            raise InvalidArgumentError("at least one weight must be nonzero")
        object.__setattr__(self, "angles", angles)
        object.__setattr__(self, "weights", weights)

    @property
    def n_modes(self) -> int:
        return len(self.angles)

    @classmethod
    def single(
        cls, n_modes: int, mode: int, angle: float, weight: float = 1.0
    ) -> MeasurementCombination:
        """Homodyne readout of one mode, the others ignored."""
        _check_index(n_modes, mode)
        weights = [0.0] * n_modes
        weights[mode] = weight
        return cls((angle,) * n_modes, tuple(weights))

    @classmethod
    def phase_sum(cls, n_modes: int = 2) -> MeasurementCombination:
        """Balanced phase-sum quadrature ``(p_1 + ... + p_n) / sqrt(n)``."""
        return cls((np.pi / 2,) * n_modes, (1.0 / np.sqrt(n_modes),) * n_modes)

    def shifted(self, mode: int, delta: float) -> MeasurementCombination:
        """Copy with the homodyne angle of ``mode`` offset by ``delta``."""
        _check_index(self.n_modes, mode)
        angles = list(self.angles)
        angles[mode] += delta
        return MeasurementCombination(tuple(angles), self.weights)

    def vector(self) -> NDArray[np.float64]:
        """Projection vector ``g`` with ``M = g . (x1, p1, ...)``."""
        g = np.empty(2 * self.n_modes)
        g[0::2] = np.multiply(self.weights, np.cos(self.angles))
        g[1::2] = np.multiply(self.weights, np.sin(self.angles))
        return g


class QuadratureStats(NamedTuple):
    mean: float
    variance: float


def _symmetrized(cov: NDArray[np.float64]) -> NDArray[np.float64]:
    return 0.5 * (cov + cov.T)


def _check_index(n_modes: int, mode: int) -> None:
    if isinstance(mode, bool) or not 0 <= mode < n_modes:
        raise InvalidArgumentError(f"mode {mode} out of range for {n_modes} modes")


def _check_mode(state: GaussianState, mode: int) -> None:
    _check_index(state.n_modes, mode)


def _check_pair(state: GaussianState, mode_a: int, mode_b: int) -> None:
    _check_mode(state, mode_a)
    _check_mode(state, mode_b)
    if mode_a == mode_b:
        raise InvalidArgumentError("a two-mode operation needs two distinct modes")


def vacuum_state(n_modes: int) -> GaussianState:
    """Vacuum on ``n_modes`` modes: zero mean, identity covariance."""
    if isinstance(n_modes, bool) or int(n_modes) != n_modes or n_modes < 1:
        raise InvalidArgumentError(f"n_modes must be a positive integer, got {n_modes}")
    return GaussianState(np.zeros(2 * n_modes), np.eye(2 * n_modes))


def displace(state: GaussianState, mode: int, amplitude: complex) -> GaussianState:
    """Coherent displacement by ``amplitude``: shifts ``(x, p)`` by ``2 alpha``."""
    _check_mode(state, mode)
    mean = state.mean.copy()
    mean[2 * mode] += 2.0 * complex(amplitude).real
    mean[2 * mode + 1] += 2.0 * complex(amplitude).imag
    return GaussianState(mean, state.cov)


def two_mode_squeeze_op(
    n_modes: int, mode_a: int, mode_b: int, r: float, squeeze_phase: float = 0.0
) -> SymplecticOp:
    """Two-mode squeezer; at zero phase it squeezes ``x_a - x_b`` and ``p_a + p_b``."""
    c, s = np.cosh(r), np.sinh(r)
    reflect = np.array(
        [
            [np.cos(squeeze_phase), np.sin(squeeze_phase)],
            [np.sin(squeeze_phase), -np.cos(squeeze_phase)],
        ]
    )
    local = np.block([[c * np.eye(2), s * reflect], [s * reflect, c * np.eye(2)]])
    return SymplecticOp.embed(local, (mode_a, mode_b), n_modes)


def rotation_op(n_modes: int, mode: int, phi: float) -> SymplecticOp:
    """Phase shift ``a -> a e^{i phi}``.

    Reading out the rotated mode at homodyne angle ``theta`` is the same as
    reading the unrotated mode at ``theta - phi``.
    """
    c, s = np.cos(phi), np.sin(phi)
    return SymplecticOp.embed(np.array([[c, -s], [s, c]]), (mode,), n_modes)


def beamsplitter_op(
    n_modes: int, mode_a: int, mode_b: int, transmissivity: float
) -> SymplecticOp:
    t, s = np.sqrt(transmissivity), np.sqrt(1.0 - transmissivity)
    local = np.block([[t * np.eye(2), s * np.eye(2)], [-s * np.eye(2), t * np.eye(2)]])
    return SymplecticOp.embed(local, (mode_a, mode_b), n_modes)


def two_mode_squeeze(
    state: GaussianState,
    mode_a: int,
    mode_b: int,
    r: float,
    squeeze_phase: float = 0.0,
) -> GaussianState:
    """Apply the two-mode squeezer with squeezing parameter ``r >= 0``.

    On vacuum with zero phase each mode ends with variance ``cosh 2r``,
    ``Cov(x_a, x_b) = sinh 2r`` and ``Cov(p_a, p_b) = -sinh 2r``.
    """
    _check_pair(state, mode_a, mode_b)
    if not r >= 0:
        raise InvalidArgumentError(
            f"squeezing parameter must be >= 0 (fold the sign into the phase), got {r}"
        )
    return two_mode_squeeze_op(state.n_modes, mode_a, mode_b, r, squeeze_phase).apply(
        state
    )


def phase_rotate(state: GaussianState, mode: int, phi: float) -> GaussianState:
    _check_mode(state, mode)
    return rotation_op(state.n_modes, mode, phi).apply(state)


def beamsplitter(
    state: GaussianState, mode_a: int, mode_b: int, transmissivity: float
) -> GaussianState:
    """Mix two modes on a beamsplitter of power transmissivity ``T``."""
    _check_pair(state, mode_a, mode_b)
    if not 0.0 <= transmissivity <= 1.0:
        raise InvalidArgumentError(
            f"transmissivity must lie in [0, 1], got {transmissivity}"
        )
    return beamsplitter_op(state.n_modes, mode_a, mode_b, transmissivity).apply(state)


def loss_channel(state: GaussianState, mode: int, eta: float) -> GaussianState:
    """Pure-loss channel of transmission ``eta`` mixing in vacuum.

    Per quadrature of ``mode``: mean scales by ``sqrt(eta)`` and a variance
    ``V`` becomes ``eta V + (1 - eta)``.
    """
    _check_mode(state, mode)
    if not 0.0 <= eta <= 1.0:
        raise InvalidArgumentError(f"loss transmission must lie in [0, 1], got {eta}")
    block = slice(2 * mode, 2 * mode + 2)
    scale = np.ones(2 * state.n_modes)
    scale[block] = np.sqrt(eta)
    cov = state.cov * np.outer(scale, scale)
    cov[block, block] += (1.0 - eta) * np.eye(2)
    return GaussianState(state.mean * scale, _symmetrized(cov))


def measure_stats(
    state: GaussianState, comb: MeasurementCombination
) -> QuadratureStats:
    """Exact mean and variance of the combined homodyne observable."""
    if comb.n_modes != state.n_modes:
        raise InvalidArgumentError(
            f"measurement covers {comb.n_modes} modes, state has {state.n_modes}"
        )
    g = comb.vector()
    return QuadratureStats(float(g @ state.mean), float(g @ state.cov @ g))
