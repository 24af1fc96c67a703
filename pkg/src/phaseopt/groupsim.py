"""Exact finite model of covariant observables on cyclic groups Z_N.

Every statement about covariant observables on a compact group becomes a
finite linear-algebra identity here: observables are seed effects
conjugated through a diagonal representation, postprocessings are cyclic
convolutions, channels are matrices on vectorized operators, and subset
sweeps are exhaustive.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Iterable, Sequence, Tuple

import numpy as np

__all__ = [
    "CyclicRep",
    "FiniteCovariantObservable",
    "FiniteMeasure",
    "make_covariant",
    "smear_finite",
    "norm_bound_check",
    "kraus_to_superop",
    "unitary_channel",
    "depolarizing_channel",
    "random_channel",
    "apply_channel",
    "adjoint_channel_matrix",
    "choi_matrix",
    "is_channel",
    "covariantize",
    "mix",
    "convexity_check",
    "pre_norm_check",
]


@dataclass(frozen=True)
class CyclicRep:
    """Diagonal unitary representation of Z_N with integer weights."""

    order: int
    weights: Tuple[int, ...]

    def __post_init__(self):
        if self.order < 1:
            raise ValueError("group order must be positive")
        object.__setattr__(self, "weights", tuple(int(w) for w in self.weights))

    @property
    def dim(self) -> int:
        return len(self.weights)

    def unitary(self, g: int) -> np.ndarray:
        phases = np.exp(
            2j * math.pi * (np.array(self.weights) * (g % self.order)) / self.order
        )
        return np.diag(phases)

    def state_action(self, g: int) -> np.ndarray:
        """Superoperator of rho -> U(g) rho U(g)^* on column-vectorized rho."""
        u = self.unitary(g)
        return np.kron(u.conj(), u)


@dataclass(frozen=True)
class FiniteMeasure:
    """Probability weights on Z_N."""

    weights: Tuple[float, ...]

    def __post_init__(self):
        w = tuple(float(x) for x in self.weights)
        if min(w) < -1e-14:
            raise ValueError("measure weights must be nonnegative")
        if abs(sum(w) - 1.0) > 1e-12:
            raise ValueError(f"measure weights sum to {sum(w)}")
        object.__setattr__(self, "weights", w)

    @property
    def order(self) -> int:
        return len(self.weights)

    @staticmethod
    def dirac(order: int, x: int) -> "FiniteMeasure":
        w = [0.0] * order
        w[x % order] = 1.0
        return FiniteMeasure(tuple(w))

    @staticmethod
    def uniform(order: int) -> "FiniteMeasure":
        return FiniteMeasure(tuple([1.0 / order] * order))

    def convolve(self, other: "FiniteMeasure") -> "FiniteMeasure":
        n = self.order
        if other.order != n:
            raise ValueError("order mismatch")
        out = [0.0] * n
        for a, wa in enumerate(self.weights):
            for b, wb in enumerate(other.weights):
                out[(a + b) % n] += wa * wb
        return FiniteMeasure(tuple(out))


class FiniteCovariantObservable:
    """Covariant observable on Z_N: effects U(x) A U(x)^* from a seed A."""

    __slots__ = ("rep", "seed", "_effects")

    def __init__(self, rep: CyclicRep, seed: np.ndarray, *, tol: float = 1e-10):
        seed = np.asarray(seed, dtype=np.complex128)
        if seed.shape != (rep.dim, rep.dim):
            raise ValueError("seed shape does not match the representation")
        if np.abs(seed - seed.conj().T).max() > 1e-10:
            raise ValueError("seed must be Hermitian")
        if np.linalg.eigvalsh(seed)[0] < -1e-10:
            raise ValueError("seed must be positive semidefinite")
        effects = [rep.unitary(x) @ seed @ rep.unitary(x).conj().T for x in range(rep.order)]
        total = sum(effects)
        if np.abs(total - np.eye(rep.dim)).max() > tol:
            raise ValueError("effects do not resolve the identity")
        self.rep = rep
        self.seed = seed
        self._effects = effects

    def effect(self, x: int) -> np.ndarray:
        return self._effects[x % self.rep.order]

    def effect_set(self, subset: Iterable[int]) -> np.ndarray:
        out = np.zeros((self.rep.dim, self.rep.dim), dtype=np.complex128)
        for x in subset:
            out = out + self.effect(x)
        return out

    def norm(self, subset: Iterable[int]) -> float:
        subset = list(subset)
        if not subset:
            return 0.0
        return float(np.linalg.eigvalsh(self.effect_set(subset))[-1])


def make_covariant(rep: CyclicRep, seed: np.ndarray) -> FiniteCovariantObservable:
    """Rescale a PSD seed so its orbit resolves the identity.

    The group average S of the seed orbit commutes with the
    representation, so conjugating the seed by S^(-1/2) normalizes the
    orbit; a singular average means the seed cannot generate a POVM.
    """
    seed = np.asarray(seed, dtype=np.complex128)
    avg = sum(
        rep.unitary(x) @ seed @ rep.unitary(x).conj().T for x in range(rep.order)
    )
    w, q = np.linalg.eigh(avg)
    if w[0] < 1e-12 * max(w[-1], 1.0):
        raise ValueError("seed does not generate a POVM (singular group average)")
    inv_sqrt = (q * (1.0 / np.sqrt(w))) @ q.conj().T
    return FiniteCovariantObservable(rep, inv_sqrt @ seed @ inv_sqrt)


def smear_finite(
    obs: FiniteCovariantObservable, nu: FiniteMeasure
) -> FiniteCovariantObservable:
    """Postprocess by a measure on Z_N: E_nu({x}) = sum_g nu(x - g) E({g})."""
    n = obs.rep.order
    if nu.order != n:
        raise ValueError("measure order does not match the group")
    seed = sum(nu.weights[(-g) % n] * obs.effect(g) for g in range(n))
    return FiniteCovariantObservable(obs.rep, seed)


def norm_bound_check(
    obs: FiniteCovariantObservable, nu: FiniteMeasure, subset: Sequence[int]
) -> Tuple[float, float]:
    """Smearing norm bound: returns (|E_nu(X)|, max_g nu(X - g)).

    The left side can never exceed the right side; the assertion is made
    here so scenario runs fail loudly on violation.
    """
    n = obs.rep.order
    smeared = smear_finite(obs, nu)
    lhs = smeared.norm(subset)
    rhs = max(
        sum(nu.weights[(x - g) % n] for x in subset) for g in range(n)
    )
    if lhs > rhs + 1e-10:
        raise AssertionError(f"norm bound violated: {lhs} > {rhs}")
    return lhs, rhs


# --- channels as matrices on column-vectorized operators ---------------------


def kraus_to_superop(kraus: Sequence[np.ndarray]) -> np.ndarray:
    """Superoperator matrix of rho -> sum_i K_i rho K_i^*."""
    ks = [np.asarray(k, dtype=np.complex128) for k in kraus]
    d = ks[0].shape[0]
    out = np.zeros((d * d, d * d), dtype=np.complex128)
    for k in ks:
        out += np.kron(k.conj(), k)
    return out


def unitary_channel(u: np.ndarray) -> np.ndarray:
    return kraus_to_superop([u])


def depolarizing_channel(dim: int, p: float = 1.0) -> np.ndarray:
    """Mix the state with the maximally mixed one with probability p."""
    ident = kraus_to_superop([np.eye(dim)])
    # rho -> tr(rho) I / dim, written on vectorized operators
    vec_eye = np.eye(dim, dtype=np.complex128).reshape(-1, order="F")
    full = np.outer(vec_eye, vec_eye.conj()) / dim
    return (1.0 - p) * ident + p * full


def random_channel(dim: int, rng, kraus_count: int = None) -> np.ndarray:
    """Haar-ish random channel from a random Stinespring isometry."""
    k = kraus_count or dim
    g = rng.normal(size=(k * dim, dim)) + 1j * rng.normal(size=(k * dim, dim))
    q, _ = np.linalg.qr(g)
    kraus = [q[i * dim : (i + 1) * dim, :] for i in range(k)]
    return kraus_to_superop(kraus)


def apply_channel(superop: np.ndarray, rho: np.ndarray) -> np.ndarray:
    d = rho.shape[0]
    vec = rho.reshape(-1, order="F")
    return (superop @ vec).reshape(d, d, order="F")


def adjoint_channel_matrix(superop: np.ndarray) -> np.ndarray:
    """Heisenberg-picture matrix: tr(Phi(rho) A) = tr(rho Phi*(A))."""
    return superop.conj().T


def choi_matrix(superop: np.ndarray) -> np.ndarray:
    """Choi matrix J with J[(i,k),(j,l)] = <k| Phi(|i><j|) |l>-style pairing."""
    d = int(round(math.sqrt(superop.shape[0])))
    k4 = superop.reshape(d, d, d, d)
    # column-stacked superop indices are K[(l, k), (j, i)] for
    # Phi(E_{ij})[k, l]; regroup into the (i k) x (j l) block matrix
    return k4.transpose(3, 1, 2, 0).reshape(d * d, d * d)


def is_channel(superop: np.ndarray, tol: float = 1e-10) -> bool:
    """Complete positivity (PSD Choi) plus trace preservation."""
    d = int(round(math.sqrt(superop.shape[0])))
    choi = choi_matrix(superop)
    if np.abs(choi - choi.conj().T).max() > tol:
        return False
    if np.linalg.eigvalsh(choi)[0] < -tol:
        return False
    # partial trace of the Choi matrix over the output slot must be I
    ptrace = choi.reshape(d, d, d, d).trace(axis1=1, axis2=3)
    return bool(np.abs(ptrace - np.eye(d)).max() <= 100 * tol)


def covariantize(rep: CyclicRep, superop: np.ndarray) -> np.ndarray:
    """Group-average a channel so it commutes with the U-action on states."""
    if not is_channel(superop):
        raise ValueError("input is not a channel (CP + trace-preserving)")
    n = rep.order
    out = np.zeros_like(superop)
    for g in range(n):
        s = rep.state_action(g)
        out += s @ superop @ s.conj().T
    out /= n
    return out


def mix(
    e1: FiniteCovariantObservable, e2: FiniteCovariantObservable, alpha: float
) -> FiniteCovariantObservable:
    """Convex combination through seed mixing (same representation)."""
    if e1.rep != e2.rep:
        raise ValueError("observables live on different representations")
    if not 0.0 <= alpha <= 1.0:
        raise ValueError("alpha must be in [0, 1]")
    return FiniteCovariantObservable(e1.rep, alpha * e1.seed + (1 - alpha) * e2.seed)


def convexity_check(
    e1: FiniteCovariantObservable,
    e2: FiniteCovariantObservable,
    alpha: float,
    tol: float = 1e-9,
) -> dict:
    """Exhaustive norm convexity sweep over all outcome subsets.

    Checks ``|E(X)| <= alpha |E1(X)| + (1-alpha) |E2(X)|`` for every
    subset X of Z_N, and that saturation |E(X)| = 1 forces both component
    norms to 1.  Returns a small report; raises on violation.
    """
    mixed = mix(e1, e2, alpha)
    n = e1.rep.order
    worst_slack = math.inf
    saturated = 0
    for size in range(1, n + 1):
        for subset in itertools.combinations(range(n), size):
            nm = mixed.norm(subset)
            n1 = e1.norm(subset)
            n2 = e2.norm(subset)
            bound = alpha * n1 + (1 - alpha) * n2
            if nm > bound + tol:
                raise AssertionError(
                    f"convexity violated on {subset}: {nm} > {bound}"
                )
            worst_slack = min(worst_slack, bound - nm)
            if nm >= 1.0 - tol:
                saturated += 1
                if n1 < 1.0 - tol or n2 < 1.0 - tol:
                    raise AssertionError(
                        f"norm saturation on {subset} not inherited: {n1}, {n2}"
                    )
    return {
        "subsets": 2 ** n - 1,
        "saturated": saturated,
        "worst_slack": worst_slack,
    }


def pre_norm_check(
    obs: FiniteCovariantObservable,
    pre_obs: FiniteCovariantObservable,
    superop: np.ndarray,
    tol: float = 1e-10,
) -> dict:
    """Preprocessing can only shrink effect norms; verified exhaustively.

    Requires ``pre_obs({x}) = Phi^*(obs({x}))`` to hold first; then sweeps
    all subsets asserting ``|F(X)| <= |E(X)|``, recording where equality
    holds (unitary channels give equality everywhere).
    """
    n = obs.rep.order
    adj = adjoint_channel_matrix(superop)
    for x in range(n):
        mapped = apply_channel(adj, obs.effect(x))
        if np.abs(mapped - pre_obs.effect(x)).max() > tol:
            raise ValueError(
                f"pre_obs is not the pullback of obs through the channel at x={x}"
            )
    equal_everywhere = True
    for size in range(1, n + 1):
        for subset in itertools.combinations(range(n), size):
            nf = pre_obs.norm(subset)
            ne = obs.norm(subset)
            if nf > ne + tol:
                raise AssertionError(f"norm grew under preprocessing on {subset}")
            if abs(nf - ne) > 1e-9:
                equal_everywhere = False
    return {"subsets": 2 ** n - 1, "norm_equal_everywhere": equal_everywhere}
