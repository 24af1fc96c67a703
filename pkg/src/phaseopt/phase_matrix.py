"""Truncated phase matrices: constructors, validation, Gram factorization.

A phase matrix of dimension D is the top-left D x D corner of the
(infinite) positive semidefinite, unit-diagonal matrix that determines a
phase-shift covariant observable.  All verdicts computed from it are
verdicts *at truncation D*.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .specfun import c_state_matrix

__all__ = [
    "EPS_PSD",
    "EPS_RANK",
    "EPS_GRAM",
    "ValidationReport",
    "validate",
    "PhaseMatrix",
    "EtaSystem",
    "canonical",
    "chessboard",
    "state_generated",
    "from_eta",
    "example4",
    "example5",
    "gram_factor",
    "translate",
    "u_equivalent",
    "TruncationError",
]

EPS_PSD = 1e-10
EPS_RANK = 1e-9
EPS_GRAM = 1e-10
_EPS_HERM = 1e-12


class TruncationError(ValueError):
    """A construction would silently drop weight beyond the truncation."""


@dataclass(frozen=True)
class ValidationReport:
    """Outcome of the phase-matrix admissibility checks with witnesses."""

    ok: bool
    dim: int
    hermiticity_dev: float
    diagonal_dev: float
    min_eigenvalue: float
    max_modulus: float
    failures: tuple = ()
    witness: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "verdict": "pass" if self.ok else "fail",
            "dim": self.dim,
            "hermiticity_dev": self.hermiticity_dev,
            "diagonal_dev": self.diagonal_dev,
            "min_eigenvalue": self.min_eigenvalue,
            "max_modulus": self.max_modulus,
            "failures": list(self.failures),
            "witness": self.witness,
        }


def _mirror_lower(a: np.ndarray) -> np.ndarray:
    """Hermitian matrix built structurally from the lower triangle of `a`."""
    lower = np.tril(a, -1)
    return lower + lower.conj().T + np.diag(np.diag(a).real)


def validate(entries, eps_psd: float = EPS_PSD) -> ValidationReport:
    """Check Hermiticity, unit diagonal and positive semidefiniteness.

    Returns a verdict object rather than raising; the failed condition
    and a witness (offending entry or eigenvalue) are reported.
    """
    a = np.asarray(entries, dtype=np.complex128)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    dim = a.shape[0]
    failures = []
    witness = {}

    if not np.isfinite(a).all():
        bad = np.nonzero(~np.isfinite(a))
        witness["nonfinite_entry"] = [int(bad[0][0]), int(bad[1][0])]
        return ValidationReport(
            ok=False,
            dim=dim,
            hermiticity_dev=float("nan"),
            diagonal_dev=float("nan"),
            min_eigenvalue=float("nan"),
            max_modulus=float("nan"),
            failures=("finite",),
            witness=witness,
        )

    herm = np.abs(a - a.conj().T)
    herm_dev = float(herm.max()) if dim else 0.0
    if herm_dev > _EPS_HERM:
        failures.append("hermitian")
        i, j = np.unravel_index(int(herm.argmax()), herm.shape)
        witness["hermitian_entry"] = [int(i), int(j)]

    diag_dev = float(np.abs(np.diag(a) - 1.0).max())
    if diag_dev > _EPS_HERM:
        failures.append("unit_diagonal")
        witness["diagonal_index"] = int(np.abs(np.diag(a) - 1.0).argmax())

    h = _mirror_lower(a)
    min_eig = float(np.linalg.eigvalsh(h)[0])
    if min_eig < -eps_psd:
        failures.append("psd")
        witness["min_eigenvalue"] = min_eig

    mods = np.abs(a)
    max_mod = float(mods.max())
    if max_mod > 1.0 + 10.0 * eps_psd:
        failures.append("modulus")
        i, j = np.unravel_index(int(mods.argmax()), mods.shape)
        witness["modulus_entry"] = [int(i), int(j)]

    return ValidationReport(
        ok=not failures,
        dim=dim,
        hermiticity_dev=herm_dev,
        diagonal_dev=diag_dev,
        min_eigenvalue=min_eig,
        max_modulus=max_mod,
        failures=tuple(failures),
        witness=witness,
    )


class PhaseMatrix:
    """Immutable D x D phase matrix (Hermitian, unit diagonal, PSD).

    Hermiticity is enforced structurally: the stored array is rebuilt
    from the lower triangle so the invariant cannot drift.
    """

    __slots__ = ("dim", "entries")

    def __init__(self, entries, *, eps_psd: float = EPS_PSD):
        report = validate(entries, eps_psd)
        if not report.ok:
            raise ValueError(f"not a valid phase matrix: {', '.join(report.failures)}")
        h = _mirror_lower(np.asarray(entries, dtype=np.complex128))
        np.fill_diagonal(h, 1.0)
        h.flags.writeable = False
        object.__setattr__(self, "entries", h)
        object.__setattr__(self, "dim", h.shape[0])

    def __setattr__(self, name, value):
        raise AttributeError("PhaseMatrix is immutable")

    def __repr__(self):
        return f"PhaseMatrix(dim={self.dim})"

    def __getitem__(self, idx):
        return self.entries[idx]

    def allclose(self, other: "PhaseMatrix", tol: float = 1e-12) -> bool:
        return self.dim == other.dim and bool(
            np.abs(self.entries - other.entries).max() <= tol
        )

    def to_dict(self) -> dict:
        flat = self.entries.reshape(-1)
        return {
            "dim": self.dim,
            "entries": [[float(z.real), float(z.imag)] for z in flat],
        }

    @staticmethod
    def from_dict(data: dict) -> "PhaseMatrix":
        dim = int(data["dim"])
        raw = data["entries"]
        if len(raw) != dim * dim:
            raise ValueError(f"entries has {len(raw)} pairs, expected {dim * dim}")
        arr = np.array([complex(re, im) for re, im in raw]).reshape(dim, dim)
        return PhaseMatrix(arr)


@dataclass(frozen=True)
class EtaSystem:
    """Unit vectors whose Gram matrix reproduces a phase matrix.

    ``vectors[n]`` is the n-th unit vector in the rank-dimensional space.
    """

    rank: int
    vectors: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.vectors, dtype=np.complex128)
        if v.ndim != 2 or v.shape[1] != self.rank:
            raise ValueError("vectors must be a (D, rank) array")
        norms = np.linalg.norm(v, axis=1)
        if np.abs(norms - 1.0).max() > 1e-6:
            raise ValueError("eta vectors must be unit vectors")
        object.__setattr__(self, "vectors", v)

    @property
    def dim(self) -> int:
        return self.vectors.shape[0]

    def gram(self) -> np.ndarray:
        return self.vectors.conj() @ self.vectors.T


def canonical(dim: int) -> PhaseMatrix:
    """All-ones phase matrix (the canonical phase observable)."""
    if dim < 1:
        raise ValueError("dim must be positive")
    return PhaseMatrix(np.ones((dim, dim), dtype=np.complex128))


def chessboard(xi: complex, dim: int) -> PhaseMatrix:
    """Alternating two-vector Gram matrix: 1 on same parity, xi across.

    Generated by the unit vectors e0 (even slots) and
    ``xi*e0 + sqrt(1-|xi|^2)*e1`` (odd slots); requires ``|xi| <= 1``.
    """
    xi = complex(xi)
    if abs(xi) > 1.0 + 1e-12:
        raise ValueError(f"|xi| must be <= 1, got {abs(xi)}")
    if dim < 1:
        raise ValueError("dim must be positive")
    c = np.empty((dim, dim), dtype=np.complex128)
    idx = np.arange(dim)
    even = (idx % 2 == 0)
    same = np.equal.outer(even, even)
    c[same] = 1.0
    c[np.outer(even, ~even)] = xi
    c[np.outer(~even, even)] = np.conj(xi)
    return PhaseMatrix(c)


def state_generated(weights, dim: int, s_max: int = 64) -> PhaseMatrix:
    """Phase matrix of the observable generated by a diagonal state.

    ``weights`` is the probability vector over number states (anything
    :class:`numpy` can coerce; trailing zeros allowed).  Support beyond
    ``s_max`` raises :class:`TruncationError` rather than truncating
    silently.
    """
    lam = np.asarray(getattr(weights, "weights", weights), dtype=float).ravel()
    if lam.size == 0 or lam.min() < -1e-12 or abs(lam.sum() - 1.0) > 1e-12:
        raise ValueError("weights must be a probability vector")
    support = np.nonzero(lam > 0)[0]
    if support.size and support[-1] >= s_max:
        raise TruncationError(
            f"state support reaches level {support[-1]}, above the cutoff {s_max}"
        )
    c = np.zeros((dim, dim))
    for s in support:
        c += lam[s] * c_state_matrix(int(s), dim)
    return PhaseMatrix(c)


def from_eta(vectors, eps_gram: float = EPS_GRAM) -> PhaseMatrix:
    """Gram matrix of a family of unit vectors (PSD by construction)."""
    v = np.asarray(vectors, dtype=np.complex128)
    if v.ndim != 2:
        raise ValueError("expected a (D, r) array of row vectors")
    norms = np.linalg.norm(v, axis=1)
    bad = np.abs(norms - 1.0) > eps_gram
    if bad.any():
        raise ValueError(f"vector {int(bad.argmax())} is not unit norm")
    return PhaseMatrix(v.conj() @ v.T)


def example4(n0: int, dim: int) -> PhaseMatrix:
    """Identity block followed by an all-ones tail starting at index n0."""
    if n0 < 0 or dim < 1:
        raise ValueError("need n0 >= 0 and dim >= 1")
    c = np.eye(dim, dtype=np.complex128)
    c[n0:, n0:] = 1.0
    return PhaseMatrix(c)


def example5(dim: int) -> PhaseMatrix:
    """Rank-2 Gram family: e0, e1, (e0+e1)/sqrt2, (e0+ie1)/sqrt2, then e0."""
    if dim < 1:
        raise ValueError("dim must be positive")
    f1 = np.array([1.0, 0.0], dtype=np.complex128)
    f2 = np.array([0.0, 1.0], dtype=np.complex128)
    special = [f1, f2, (f1 + f2) / np.sqrt(2.0), (f1 + 1j * f2) / np.sqrt(2.0)]
    vecs = [special[n] if n < 4 else f1 for n in range(dim)]
    return from_eta(np.array(vecs))


def gram_factor(matrix: PhaseMatrix, eps_rank: float = EPS_RANK) -> EtaSystem:
    """Factor a phase matrix into unit vectors via eigendecomposition.

    Eigenvalues above ``eps_rank`` times the largest are kept; the number
    kept is the numerical rank at this truncation.
    """
    w, q = np.linalg.eigh(matrix.entries)
    keep = w > eps_rank * w[-1]
    wk = w[keep]
    vectors = q[:, keep].conj() * np.sqrt(wk)
    # eigenvector roundoff can leave norms a hair off 1; renormalize rows
    vectors /= np.linalg.norm(vectors, axis=1)[:, None]
    return EtaSystem(rank=int(keep.sum()), vectors=vectors)


def translate(matrix: PhaseMatrix, x: complex) -> PhaseMatrix:
    """Rotate the observable by the circle point x: entries pick up x**(n-m)."""
    x = complex(x)
    if abs(abs(x) - 1.0) > 1e-12:
        raise ValueError(f"translation point must be unimodular, |x|={abs(x)}")
    d = matrix.dim
    powers = x ** np.arange(d)
    c = matrix.entries * np.outer(powers.conj(), powers)
    return PhaseMatrix(c)


def u_equivalent(
    m1: PhaseMatrix, m2: PhaseMatrix, tol: float = 1e-10
) -> Optional[np.ndarray]:
    """Unimodular sequence lambda with ``c1 = lam_n * conj(lam_m) * c2``.

    Entrywise moduli must agree within ``tol``; the phases are propagated
    by BFS over the graph of nonzero entries of ``m2``, fixing the free
    phase of each connected component to 1 at its smallest index, and
    every edge (tree and non-tree) is verified.  Returns ``None`` when no
    such sequence exists at this truncation.
    """
    if m1.dim != m2.dim:
        raise ValueError("dimension mismatch")
    d = m1.dim
    c1, c2 = m1.entries, m2.entries
    if np.abs(np.abs(c1) - np.abs(c2)).max() > tol:
        return None
    support = np.abs(c2) > tol
    lam = np.zeros(d, dtype=np.complex128)
    for root in range(d):
        if lam[root] != 0:
            continue
        lam[root] = 1.0
        queue = deque([root])
        while queue:
            m = queue.popleft()
            for n in range(d):
                if n == m or not support[m, n] or lam[n] != 0:
                    continue
                # c1[m,n] = lam[n] * conj(lam[m]) * c2[m,n]
                ratio = c1[m, n] / c2[m, n]
                cand = ratio * lam[m]
                mag = abs(cand)
                if abs(mag - 1.0) > 10 * tol:
                    return None
                lam[n] = cand / mag
                queue.append(n)
    residual = c1 - np.outer(lam.conj(), lam) * c2
    if np.abs(residual).max() > tol:
        return None
    return lam
