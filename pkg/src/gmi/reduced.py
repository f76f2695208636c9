"""Reduced-set construction: compress a sample set into a small weighted
point set whose mixture embedding stays close to the empirical mean
embedding in RKHS norm.

The objective for points Z and coefficients beta is

    J(Z, beta) = || sum_j beta_j k(z_j, .) - (1/N) sum_i k(x_i, .) ||^2

minimized by alternating a closed-form ridge solve for beta with a
backtracking gradient step on the points. Both half-steps only ever
accept strict improvements, so J is non-increasing across iterations.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from gmi.backend import impl
from gmi.errors import DimensionMismatchError, ReducedSizeError
from gmi.kernel import KernelParams, as_embedding_matrix

__all__ = ["ReduceOptions", "ReducedSet", "reduce", "reduction_error"]

_MAX_BACKTRACKS = 40


@dataclass(frozen=True)
class ReduceOptions:
    """Knobs for :func:`reduce`; defaults follow standard reduced-set practice.

    ``warm_start`` adds one extra descent candidate initialized from the
    half-budget solution padded with zero-coefficient points. Its starting
    objective equals the half-budget error exactly, which makes the best
    achievable error non-increasing as the budget doubles.
    """

    seed: int = 0
    restarts: int = 3
    max_iters: int = 200
    tol: float = 1e-6
    ridge: float = 1e-6
    warm_start: bool = True

    def __post_init__(self):
        if int(self.restarts) < 1:
            raise ValueError("restarts must be >= 1")
        if int(self.max_iters) < 1:
            raise ValueError("max_iters must be >= 1")
        if not (float(self.tol) >= 0.0):
            raise ValueError("tol must be >= 0")
        if not (float(self.ridge) >= 0.0):
            raise ValueError("ridge must be >= 0")


@dataclass(frozen=True)
class ReducedSet:
    """A fitted reduced set: points (R, d), betas (R,), and the kernel used.

    ``error`` is the objective J at the returned iterate; ``converged`` is
    False only when the alternating scheme ran out of iterations while
    still improving.
    """

    points: np.ndarray
    betas: np.ndarray
    kernel: KernelParams
    converged: bool
    error: float

    def __post_init__(self):
        if self.points.shape[0] != self.betas.shape[0] or self.points.shape[0] < 1:
            raise ValueError("points and betas must align and be nonempty")

    @property
    def size(self) -> int:
        return self.points.shape[0]


def _canonical_error(X, points, betas, gamma) -> float:
    n = X.shape[0]
    a = np.full(n, 1.0 / n)
    return float(impl.expansion_sq_distance(X, a, points, betas, gamma))


def reduction_error(samples, rs: ReducedSet) -> float:
    """J(rs.points, rs.betas) against ``samples``, by three-block Gram
    expansion. Tiny negative values (about -1e-12) can appear in floating
    point and are returned as-is."""
    X = as_embedding_matrix(samples, "samples")
    if X.shape[1] != rs.points.shape[1]:
        raise DimensionMismatchError(
            f"samples dim {X.shape[1]} != reduced-set dim {rs.points.shape[1]}")
    return _canonical_error(X, rs.points, rs.betas, rs.kernel.gamma)


def _kmeanspp_indices(X: np.ndarray, size: int, rng, d2=None) -> np.ndarray:
    """D^2-weighted seeding. ``d2`` optionally carries squared distances to
    centers chosen before this call (used to pad a warm start)."""
    n = X.shape[0]
    chosen = []
    if d2 is None:
        first = int(rng.integers(n))
        chosen.append(first)
        d2 = np.sum((X - X[first]) ** 2, axis=1)
    else:
        d2 = d2.copy()
    while len(chosen) < size:
        total = float(d2.sum())
        if total <= 0.0:
            # every sample coincides with a chosen center; pad deterministically
            used = set(chosen)
            for i in range(n):
                if i not in used:
                    chosen.append(i)
                    used.add(i)
                    if len(chosen) == size:
                        break
            while len(chosen) < size:
                chosen.append(chosen[0] if chosen else 0)
            break
        nxt = int(rng.choice(n, p=d2 / total))
        chosen.append(nxt)
        d2 = np.minimum(d2, np.sum((X - X[nxt]) ** 2, axis=1))
    return np.asarray(chosen[:size], dtype=np.intp)


def _descend(X, Z0, beta0, gamma, S, opts: ReduceOptions):
    """Alternating minimization from one starting candidate.

    Returns (Z, beta, J, converged). J is tracked incrementally from the
    same Gram blocks used for the updates; only strict improvements are
    ever accepted, so the sequence of J values is non-increasing exactly.
    """
    n = X.shape[0]
    Z = np.array(Z0, dtype=np.float64, copy=True)
    beta = np.array(beta0, dtype=np.float64, copy=True)
    r = Z.shape[0]

    def grams(Zc):
        kzz = impl.rbf_gram(Zc, Zc, gamma)
        kzx = impl.rbf_gram(Zc, X, gamma)
        return kzz, kzx, kzx.mean(axis=1)

    kzz, kzx, c = grams(Z)
    J = float(beta @ kzz @ beta - 2.0 * (beta @ c) + S)
    eye = np.eye(r)
    step = 1.0
    converged = False

    for _ in range(int(opts.max_iters)):
        j_outer = J

        # (a) coefficients: ridge-regularized closed form, kept only on improvement
        try:
            beta_new = np.linalg.solve(kzz + opts.ridge * eye, c)
        except np.linalg.LinAlgError:
            beta_new, *_ = np.linalg.lstsq(kzz + opts.ridge * eye, c, rcond=None)
        j_beta = float(beta_new @ kzz @ beta_new - 2.0 * (beta_new @ c) + S)
        if j_beta < J:
            beta, J = beta_new, j_beta

        # (b) points: one backtracking gradient step on J at fixed beta
        u = kzz @ beta
        m = (kzz * beta[None, :]) @ Z
        grad = (4.0 * gamma) * beta[:, None] * (
            (Z * c[:, None] - (kzx @ X) / n) - (Z * u[:, None] - m))
        if float(np.sum(grad * grad)) > 0.0:
            t = step
            for _ in range(_MAX_BACKTRACKS):
                z_try = Z - t * grad
                kzz_t, kzx_t, c_t = grams(z_try)
                j_try = float(beta @ kzz_t @ beta - 2.0 * (beta @ c_t) + S)
                if j_try < J:
                    Z, kzz, kzx, c, J = z_try, kzz_t, kzx_t, c_t, j_try
                    step = 2.0 * t
                    break
                t *= 0.5

        improvement = j_outer - J
        if improvement == 0.0:
            # neither half-step found a strictly better iterate: fixed point
            converged = True
            break
        if j_outer > 0.0 and improvement < float(opts.tol) * j_outer:
            converged = True
            break

    return Z, beta, J, converged


def reduce(samples, size: int, params: KernelParams,
           opts: ReduceOptions = ReduceOptions()) -> ReducedSet:
    """Fit a reduced set of ``size`` points to ``samples``.

    Runs ``opts.restarts`` k-means++-seeded descents (plus the half-budget
    warm start when enabled) and keeps the candidate with the lowest
    objective; ties go to the earlier candidate so results are
    deterministic for a given seed regardless of evaluation order.
    """
    X = as_embedding_matrix(samples, "samples")
    n = X.shape[0]
    size = int(size)
    if size < 1:
        raise ReducedSizeError(f"reduced size must be >= 1, got {size}")
    if size > n:
        raise ReducedSizeError(f"reduced size {size} exceeds {n} samples")
    gamma = params.gamma

    if np.all(X == X[0]):
        pt = X[:1].copy()
        return ReducedSet(points=pt, betas=np.ones(1), kernel=params,
                          converged=True,
                          error=_canonical_error(X, pt, np.ones(1), gamma))

    ones = np.full(n, 1.0 / n)
    S = float(ones @ impl.rbf_gram(X, X, gamma) @ ones)

    seeds = np.random.SeedSequence(int(opts.seed)).spawn(int(opts.restarts) + 1)
    candidates = []
    for r in range(int(opts.restarts)):
        rng = np.random.default_rng(seeds[r])
        idx = _kmeanspp_indices(X, size, rng)
        candidates.append((X[idx].copy(), np.full(size, 1.0 / size)))

    if opts.warm_start and size >= 2:
        half = reduce(X, size // 2, params, opts)
        pad = size - half.size
        rng = np.random.default_rng(seeds[-1])
        d2 = np.min(impl.pairwise_sq_dists(X, half.points), axis=1)
        idx = _kmeanspp_indices(X, pad, rng, d2=d2)
        z0 = np.vstack([half.points, X[idx]])
        # zero betas on the padding: the starting objective equals half.error
        b0 = np.concatenate([half.betas, np.zeros(pad)])
        candidates.append((z0, b0))

    best = None
    for z0, b0 in candidates:
        z, b, j, conv = _descend(X, z0, b0, gamma, S, opts)
        if best is None or j < best[2]:
            best = (z, b, j, conv)

    z, b, _, conv = best
    return ReducedSet(points=z, betas=b, kernel=params, converged=conv,
                      error=_canonical_error(X, z, b, gamma))
