"""States, arcs on the circle, effect operators and outcome densities.

The effect operator of an outcome set X has entries
``c[m, n] * integral over X of t**(m-n)`` with the integral taken against
normalized arc length; every probability and density below is derived
from that kernel.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Tuple

import numpy as np
from numpy.polynomial.legendre import leggauss

from .phase_matrix import PhaseMatrix, _mirror_lower
from .specfun import displacement_element

__all__ = [
    "TWO_PI",
    "Arc",
    "DensityMatrix",
    "DiagonalState",
    "CoherentVector",
    "fourier_arc",
    "effect_operator",
    "effect_norm",
    "density",
    "prob",
    "number_unitary",
    "et_quadrature_oracle",
]

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class Arc:
    """Finite disjoint union of half-open arcs on the circle.

    Each component is ``(start, length)`` with start normalized to
    [0, 2pi) and length in (0, 2pi]; components may individually wrap
    past 2pi but must be pairwise disjoint with total length <= 2pi.
    """

    components: Tuple[Tuple[float, float], ...]

    def __post_init__(self):
        comps = []
        for start, length in self.components:
            if not 0.0 < length <= TWO_PI + 1e-12:
                raise ValueError(f"arc length {length} outside (0, 2pi]")
            comps.append((float(start) % TWO_PI, min(float(length), TWO_PI)))
        total = sum(l for _, l in comps)
        if total > TWO_PI + 1e-9:
            raise ValueError(f"total arc length {total} exceeds 2pi")
        intervals = sorted(self._unwrapped(comps))
        for (a0, b0), (a1, b1) in zip(intervals, intervals[1:]):
            if a1 < b0 - 1e-12:
                raise ValueError("arc components overlap")
        object.__setattr__(self, "components", tuple(comps))

    @staticmethod
    def _unwrapped(comps) -> list:
        """Components as sorted non-wrapping intervals inside [0, 2pi)."""
        out = []
        for start, length in comps:
            end = start + length
            if end <= TWO_PI + 1e-15:
                out.append((start, end))
            else:
                out.append((start, TWO_PI))
                out.append((0.0, end - TWO_PI))
        return out

    @staticmethod
    def interval(start: float, length: float) -> "Arc":
        return Arc(((start, length),))

    @staticmethod
    def full() -> "Arc":
        return Arc(((0.0, TWO_PI),))

    @staticmethod
    def half() -> "Arc":
        return Arc(((0.0, math.pi),))

    @property
    def measure(self) -> float:
        """Normalized length (Haar measure) of the arc."""
        return sum(l for _, l in self.components) / TWO_PI

    def rotated(self, phi: float) -> "Arc":
        return Arc(tuple((s + phi, l) for s, l in self.components))

    def complement(self) -> "Arc":
        gaps = []
        intervals = sorted(self._unwrapped(self.components))
        merged = []
        for a, b in intervals:
            if merged and a <= merged[-1][1] + 1e-15:
                merged[-1][1] = max(merged[-1][1], b)
            else:
                merged.append([a, b])
        if not merged:
            return Arc.full()
        for (_, b0), (a1, _) in zip(merged, merged[1:]):
            if a1 - b0 > 1e-15:
                gaps.append((b0, a1 - b0))
        head = merged[0][0]
        tail = TWO_PI - merged[-1][1]
        wrap = tail + head
        if wrap > 1e-15:
            gaps.append((merged[-1][1] % TWO_PI, wrap))
        if not gaps:
            raise ValueError("complement of the full circle is empty")
        return Arc(tuple(gaps))

    def contains(self, theta: float) -> bool:
        t = theta % TWO_PI
        for a, b in self._unwrapped(self.components):
            if a <= t < b:
                return True
        return False


def fourier_arc(arc: Arc, k: int) -> complex:
    """Normalized Fourier integral of ``exp(i k theta)`` over the arc."""
    total = 0.0j
    for start, length in arc.components:
        if k == 0:
            total += length / TWO_PI
        else:
            total += (
                np.exp(1j * k * (start + length)) - np.exp(1j * k * start)
            ) / (TWO_PI * 1j * k)
    return complex(total)


@dataclass(frozen=True)
class DensityMatrix:
    """Truncated state: Hermitian, PSD and trace one."""

    entries: np.ndarray

    def __post_init__(self):
        rho = np.asarray(self.entries, dtype=np.complex128)
        if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
            raise ValueError("state must be a square matrix")
        if np.abs(rho - rho.conj().T).max() > 1e-12:
            raise ValueError("state is not Hermitian")
        rho = _mirror_lower(rho)
        if abs(rho.trace().real - 1.0) > 1e-10:
            raise ValueError(f"state trace {rho.trace().real} is not 1")
        if np.linalg.eigvalsh(rho)[0] < -1e-10:
            raise ValueError("state is not positive semidefinite")
        rho.flags.writeable = False
        object.__setattr__(self, "entries", rho)

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    @staticmethod
    def from_pure(vec) -> "DensityMatrix":
        v = np.asarray(vec, dtype=np.complex128).ravel()
        v = v / np.linalg.norm(v)
        return DensityMatrix(np.outer(v, v.conj()))

    def to_dict(self) -> dict:
        flat = self.entries.reshape(-1)
        return {
            "dim": self.dim,
            "entries": [[float(z.real), float(z.imag)] for z in flat],
            "trace": float(self.entries.trace().real),
        }

    @staticmethod
    def from_dict(data: dict) -> "DensityMatrix":
        dim = int(data["dim"])
        arr = np.array([complex(re, im) for re, im in data["entries"]]).reshape(dim, dim)
        return DensityMatrix(arr)


@dataclass(frozen=True)
class DiagonalState:
    """Diagonal state given by its probability weights over number states."""

    weights: np.ndarray

    def __post_init__(self):
        lam = np.asarray(self.weights, dtype=float).ravel()
        if lam.size == 0:
            raise ValueError("empty weight vector")
        if lam.min() < -1e-12:
            raise ValueError(f"negative weight {lam.min()}")
        if abs(lam.sum() - 1.0) > 1e-12:
            raise ValueError(f"weights sum to {lam.sum()}, expected 1")
        lam = np.clip(lam, 0.0, None)
        last = int(np.nonzero(lam)[0][-1]) if lam.any() else 0
        lam = lam[: last + 1].copy()
        lam.flags.writeable = False
        object.__setattr__(self, "weights", lam)

    @property
    def support_max(self) -> int:
        return self.weights.size - 1

    @staticmethod
    def number_state(s: int) -> "DiagonalState":
        w = np.zeros(s + 1)
        w[s] = 1.0
        return DiagonalState(w)

    def density_matrix(self, dim: int) -> DensityMatrix:
        if dim <= self.support_max:
            raise ValueError("dim too small for the state's support")
        rho = np.zeros((dim, dim), dtype=np.complex128)
        rho[: self.weights.size, : self.weights.size] = np.diag(self.weights)
        return DensityMatrix(rho)


@dataclass(frozen=True)
class CoherentVector:
    """Truncated, renormalized coherent state with its captured weight.

    ``fidelity`` is the probability weight of the untruncated state that
    the first ``dim`` levels capture; callers should gate on it before
    trusting concentration results.
    """

    z: complex
    dim: int
    amplitudes: np.ndarray = field(init=False, repr=False)
    fidelity: float = field(init=False)

    def __post_init__(self):
        z = complex(self.z)
        n = np.arange(self.dim)
        if z == 0:
            amps = np.zeros(self.dim, dtype=np.complex128)
            amps[0] = 1.0
            captured = 1.0
        else:
            r = abs(z)
            log_mod = -0.5 * r * r + n * math.log(r) - 0.5 * np.array(
                [math.lgamma(k + 1.0) for k in range(self.dim)]
            )
            amps = np.exp(log_mod) * np.exp(1j * n * np.angle(z))
            captured = float(np.exp(2 * log_mod).sum())
            amps = amps / math.sqrt(captured)
        amps.flags.writeable = False
        object.__setattr__(self, "z", z)
        object.__setattr__(self, "amplitudes", amps)
        object.__setattr__(self, "fidelity", captured)

    def density_matrix(self) -> DensityMatrix:
        return DensityMatrix.from_pure(self.amplitudes)


def effect_operator(matrix: PhaseMatrix, arc: Arc) -> np.ndarray:
    """Effect of the outcome set: entrywise c[m,n] * fourier_arc(m - n)."""
    d = matrix.dim
    coeffs = np.array([fourier_arc(arc, k) for k in range(-(d - 1), d)])
    k_table = np.subtract.outer(np.arange(d), np.arange(d)) + (d - 1)
    return matrix.entries * coeffs[k_table]


def effect_norm(matrix: PhaseMatrix, arc: Arc) -> float:
    """Operator norm (largest eigenvalue) of the effect of the arc."""
    return float(np.linalg.eigvalsh(effect_operator(matrix, arc))[-1])


def density(matrix: PhaseMatrix, rho: DensityMatrix, grid: int = 512):
    """Outcome probability density sampled on a uniform angle grid.

    Returns ``(thetas, values)``; values are real and may dip a hair
    below zero (truncated Fourier series), they are not clamped.
    """
    if matrix.dim != rho.dim:
        raise ValueError(f"dimension mismatch: {matrix.dim} vs {rho.dim}")
    d = matrix.dim
    a = matrix.entries * rho.entries.T  # a[m, n] = c[m, n] * rho[n, m]
    # coefficient of exp(i k theta) collects the entries with m - n = k
    modes = np.array([np.trace(a, offset=-k) for k in range(-(d - 1), d)])
    thetas = np.linspace(0.0, TWO_PI, grid, endpoint=False)
    ks = np.arange(-(d - 1), d)
    values = (np.exp(1j * np.outer(thetas, ks)) @ modes).real / TWO_PI
    return thetas, values


def prob(matrix: PhaseMatrix, rho: DensityMatrix, arc: Arc) -> float:
    """Outcome probability tr(rho * E(arc))."""
    if matrix.dim != rho.dim:
        raise ValueError(f"dimension mismatch: {matrix.dim} vs {rho.dim}")
    return float(np.tensordot(rho.entries.T, effect_operator(matrix, arc)).real)


def number_unitary(t: complex, dim: int) -> np.ndarray:
    """Number representation U(t) = diag(t**n) for |t| = 1."""
    if abs(abs(t) - 1.0) > 1e-12:
        raise ValueError("t must lie on the unit circle")
    return np.diag(complex(t) ** np.arange(dim))


def et_quadrature_oracle(
    state: DiagonalState,
    arc: Arc,
    dim: int,
    r_max: float = 10.0,
    quad_points: int = 160,
) -> np.ndarray:
    """Phase-space average of shifted diagonal states, by direct quadrature.

    Numerically integrates (1/pi) * D(r e^{i theta}) T D(r e^{i theta})^*
    * r over the arc and the radial range [0, r_max], using Gauss-Legendre
    nodes in both variables.  This is the slow independent oracle for the
    closed-form construction; accuracy is reported by the caller's
    comparison, not guaranteed here.
    """
    support = np.nonzero(state.weights)[0]
    x_r, w_r = leggauss(quad_points)
    radii = 0.5 * r_max * (x_r + 1.0)
    w_radii = 0.5 * r_max * w_r
    n_theta = 2 * dim + 1
    x_t, w_t = leggauss(n_theta)

    out = np.zeros((dim, dim), dtype=np.complex128)
    for start, length in arc.components:
        thetas = start + 0.5 * length * (x_t + 1.0)
        w_thetas = 0.5 * length * w_t
        for theta, wt in zip(thetas, w_thetas):
            phase = complex(math.cos(theta), math.sin(theta))
            for r, wr in zip(radii, w_radii):
                z = r * phase
                cols = np.array(
                    [[displacement_element(m, int(s), z) for s in support] for m in range(dim)]
                )
                block = (cols * state.weights[support]) @ cols.conj().T
                out += (wt * wr * r) * block
    return out / math.pi
