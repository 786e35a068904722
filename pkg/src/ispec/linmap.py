"""The two-order spectral map, its differential at zero, and local inversion.

For a pair of angular momenta ``(l1, l2)`` the spectral map sends a potential
``q`` to

    ( ∫q ,  (lambda~_{l1,n})_{n<=N} ,  (lambda~_{l2,n})_{n<=N} ),
    lambda~_{l,n} = lambda_{l,n}(q) - (n + l/2)² pi² - ∫q + l(l+1),

i.e. the mean together with the eigenvalue remainders of both orders.  Its
differential at ``q = 0`` has rows ``zeta -> ∫ zeta (psi_{l,n}² - 1)`` where
``psi_{l,n}`` is the L²-normalized free eigenfunction.  Writing
``psi² ≈ 2 Phi_l(j r)`` and replacing ``j = j_{l+1/2,n}`` by its asymptotic
value ``(n + l/2) pi`` separates the rows into a trigonometric-like part ``A``
and a square-summable correction ``K``.

Matrices act on grid samples: a row ``R`` applied to ``zeta`` is
``R @ zeta.values``, so the quadrature weights are folded into every row.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial import legendre as npleg

from .funcspace import Grid, GridFn, default_grid, norm
from .special import Order, bessel_half, bessel_zeros, phi_psi
from .spectral import (
    Potential,
    SpectrumError,
    _as_potential,
    _normalized_eigenfunction,
    dirichlet_spectrum,
    remainder_sequence,
)

__all__ = [
    "SpectralImage",
    "LinearizedOperator",
    "ReconstructionOptions",
    "ReconstructionReport",
    "spectral_map",
    "d0_rows",
    "k_row_norms",
    "kernel_probe",
    "trial_basis",
    "reconstruct",
    "cosine_basis",
]


def _pair(pair) -> tuple[int, int]:
    l1, l2 = (Order.coerce(p).ell for p in pair)
    if l1 == l2:
        raise ValueError("the two angular momenta must differ")
    return l1, l2


@dataclass(frozen=True)
class SpectralImage:
    """Mean and two remainder sequences of equal length ``N``."""

    pair: tuple
    mean: float
    seq1: np.ndarray
    seq2: np.ndarray

    def __post_init__(self):
        s1 = np.asarray(self.seq1, dtype=float)
        s2 = np.asarray(self.seq2, dtype=float)
        if s1.shape != s2.shape or s1.ndim != 1:
            raise ValueError("both sequences must be 1-d with the same length")
        if not (np.all(np.isfinite(s1)) and np.all(np.isfinite(s2)) and math.isfinite(self.mean)):
            raise ValueError("spectral image entries must be finite")
        object.__setattr__(self, "seq1", s1)
        object.__setattr__(self, "seq2", s2)
        object.__setattr__(self, "mean", float(self.mean))
        object.__setattr__(self, "pair", _pair(self.pair))

    @property
    def N(self) -> int:
        return int(self.seq1.size)

    def vector(self) -> np.ndarray:
        """``[mean, seq1..., seq2...]`` (length ``2N+1``)."""
        return np.concatenate([[self.mean], self.seq1, self.seq2])

    def shifted(self, c: float) -> "SpectralImage":
        """Image of ``q + c``: only the mean moves."""
        return SpectralImage(self.pair, self.mean + c, self.seq1, self.seq2)

    def to_json(self) -> dict:
        return {
            "pair": list(self.pair),
            "N": self.N,
            "mean": self.mean,
            "seq1": self.seq1.tolist(),
            "seq2": self.seq2.tolist(),
        }

    @classmethod
    def from_json(cls, data: dict) -> "SpectralImage":
        return cls(tuple(data["pair"]), data["mean"], data["seq1"], data["seq2"])

    @classmethod
    def from_spectra(cls, spec1: dict, spec2: dict, mean: float | None = None) -> "SpectralImage":
        """Build an image from two spectrum JSON documents (``ell``, ``eigenvalues``).

        If ``mean`` is not given it is estimated by the raw remainder
        ``lambda_N - (N + l/2)² pi² + l(l+1)`` of the first spectrum, which
        converges to ``∫q`` as ``N`` grows.
        """
        seqs, raw_last = [], None
        for spec in (spec1, spec2):
            ell = int(spec["ell"])
            lam = np.asarray(spec["eigenvalues"], dtype=float)
            n = np.arange(1, lam.size + 1)
            raw = lam - (n + ell / 2) ** 2 * np.pi**2 + ell * (ell + 1)
            seqs.append(raw)
            if raw_last is None:
                raw_last = float(raw[-1])
        if seqs[0].size != seqs[1].size:
            raise ValueError("spectra must have the same length")
        if mean is None:
            mean = raw_last
        return cls((spec1["ell"], spec2["ell"]), mean, seqs[0] - mean, seqs[1] - mean)


def spectral_map(pair, q=None, N: int = 10) -> SpectralImage:
    """Evaluate the spectral map of ``q`` truncated to ``N`` eigenvalues per order.

    Parameters
    ----------
    pair : (int, int)
        Distinct angular momenta ``(l1, l2)``.
    q : Potential, GridFn or None
    N : int
        Number of eigenvalues per order, ``N >= 1``.
    """
    l1, l2 = _pair(pair)
    if N < 1:
        raise ValueError("N must be >= 1")
    q = _as_potential(q)
    r1, _ = remainder_sequence(l1, q, N)
    r2, _ = remainder_sequence(l2, q, N)
    return SpectralImage((l1, l2), q.mean, r1, r2)


# ---------------------------------------------------------------------------
# differential at q = 0
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class LinearizedOperator:
    """Rows of the differential at zero, split as ``matrix = A + K``.

    Row 0 is the quadrature weight vector; rows ``1..N`` belong to ``l1`` and
    rows ``N+1..2N`` to ``l2``.  The ``A`` part carries row 0 unchanged.
    """

    pair: tuple
    N: int
    grid: Grid
    matrix: np.ndarray
    A: np.ndarray
    K: np.ndarray

    def apply(self, zeta: GridFn) -> np.ndarray:
        if zeta.grid != self.grid:
            raise ValueError("zeta lives on a different grid")
        return self.matrix @ zeta.values


def free_square(ell: int, n: int | np.ndarray, r: np.ndarray) -> np.ndarray:
    """``psi_{l,n}(r)²`` for the free problem, normalized in L²(0, 1).

    ``psi² = 4 Phi_l(j r) / (pi j J_{nu+1}(j)²)`` with ``j = j_{l+1/2,n}``,
    using ``∫_0^1 r J_nu(j r)² dr = J_{nu+1}(j)²/2``.
    """
    n = np.atleast_1d(n)
    j = bessel_zeros(ell, int(n.max()))[n - 1]
    jp = bessel_half(ell + 1, "plus_nu", j)
    out = np.empty((n.size, r.size))
    for i, (jj, dd) in enumerate(zip(j, jp)):
        out[i] = 4.0 * phi_psi(ell, jj * r)[0] / (np.pi * jj * dd * dd)
    return out


def _asymptotic_rows(ell: int, N: int, r: np.ndarray) -> np.ndarray:
    n = np.arange(1, N + 1)
    return np.stack([2.0 * phi_psi(ell, (k + ell / 2) * np.pi * r)[0] for k in n]) - 1.0


def d0_rows(pair, N: int, grid: Grid | None = None) -> LinearizedOperator:
    """Differential of the spectral map at ``q = 0`` on ``grid``.

    Full rows are ``psi_{l,n}² - 1``; ``A`` rows are
    ``2 Phi_l((n + l/2) pi r) - 1`` and ``K = full - A``.  For ``l = 0`` the two
    coincide (``psi² = 2 sin²(n pi r)``) and ``K`` vanishes.
    """
    l1, l2 = _pair(pair)
    grid = grid or default_grid()
    r, w = grid.nodes, grid.weights
    n = np.arange(1, N + 1)
    full = [w[None, :]]
    asym = [w[None, :]]
    for ell in (l1, l2):
        full.append((free_square(ell, n, r) - 1.0) * w)
        asym.append(_asymptotic_rows(ell, N, r) * w)
    M = np.vstack(full)
    A = np.vstack(asym)
    return LinearizedOperator((l1, l2), int(N), grid, M, A, M - A)


def k_row_norms(ell: int, N: int, grid: Grid | None = None) -> np.ndarray:
    """``||K_n||²_{L²}`` for ``n = 1..N`` (single order)."""
    grid = grid or default_grid()
    r, w = grid.nodes, grid.weights
    K = free_square(ell, np.arange(1, N + 1), r) - 1.0 - _asymptotic_rows(ell, N, r)
    return K**2 @ w


def trial_basis(grid: Grid, dim: int = 25) -> np.ndarray:
    """Orthonormal mean-zero shifted Legendre polynomials ``P_1..P_dim`` on the grid (columns)."""
    x = 2.0 * grid.nodes - 1.0
    cols = []
    for k in range(1, dim + 1):
        c = np.zeros(k + 1)
        c[k] = 1.0
        cols.append(npleg.legval(x, c) * math.sqrt(2 * k + 1))
    return np.stack(cols, axis=1)


def kernel_probe(pair, N: int, grid: Grid | None = None, trial_dim: int = 25, rel_tol: float = 1e-6):
    """Smallest singular value and numerical kernel dimension of the differential.

    The differential is restricted to a mean-zero polynomial trial space of
    dimension ``trial_dim``; the kernel dimension is ``trial_dim`` minus the
    number of singular values at or above ``rel_tol * smax``, hence at least
    ``trial_dim - (2N+1)`` when there are fewer rows than trial functions.

    Returns
    -------
    smin : float
    kernel_dim_estimate : int
    """
    grid = grid or default_grid()
    if grid.size <= 2 * N + 1:
        raise ValueError("grid dimension must exceed the number of rows 2N+1")
    op = d0_rows(pair, N, grid)
    B = trial_basis(grid, trial_dim)
    s = np.linalg.svd(op.matrix @ B, compute_uv=False)
    rank = int(np.count_nonzero(s >= rel_tol * s[0]))
    # fewer rows than trial functions leaves trial_dim - (2N+1) directions unseen by the SVD
    smin = float(s[-1]) if s.size == trial_dim else 0.0
    return smin, trial_dim - rank


# ---------------------------------------------------------------------------
# Gauss–Newton reconstruction
# ---------------------------------------------------------------------------


def cosine_basis(grid: Grid, count: int) -> np.ndarray:
    """Columns ``1, cos(pi x), ..., cos(count pi x)`` sampled on the grid."""
    k = np.arange(count + 1)
    return np.cos(np.pi * np.outer(grid.nodes, k))


@dataclass
class ReconstructionOptions:
    """Tuning knobs for :func:`reconstruct`.

    Attributes
    ----------
    sigma_cut : float
        Relative truncated-SVD cutoff (``sigma < sigma_cut * sigma_max`` dropped).
    tol_out : float
        Stop once the Euclidean image misfit falls below this value.
    max_iter : int
    retries : int
        Number of step halvings tried before declaring divergence.
    warn_norm : float
        Warn when the target lies farther than this from the free image.
    grid : Grid or None
    q_true : Potential or None
        If given, the report carries ``||q_hat - q_true||``.
    """

    sigma_cut: float = 1e-3
    tol_out: float = 1e-10
    max_iter: int = 20
    retries: int = 3
    warn_norm: float = 1.0
    grid: Grid | None = None
    q_true: Potential | None = None


@dataclass
class ReconstructionReport:
    pair: tuple
    N: int
    iterations: int
    misfit_history: list
    sigma_cut: float
    converged: bool
    diverged: bool
    q_error_if_known: float | None = None
    coefficients: list = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "pair": list(self.pair),
            "N": self.N,
            "iterations": self.iterations,
            "misfit_history": [float(m) for m in self.misfit_history],
            "q_error_if_known": self.q_error_if_known,
            "sigma_cut": self.sigma_cut,
            "converged": self.converged,
            "diverged": self.diverged,
        }


def _jacobian(pair, q: Potential, N: int, basis: np.ndarray) -> np.ndarray:
    """Derivative of the spectral image with respect to the basis coefficients."""
    w = q.grid.weights
    rows = [w]
    for ell in pair:
        lam = dirichlet_spectrum(ell, q, N).eigenvalues
        for n in range(N):
            psi = _normalized_eigenfunction(ell, q, float(lam[n])).values
            rows.append(w * (psi * psi - 1.0))
    return np.vstack(rows) @ basis


def reconstruct(pair, target: SpectralImage, options: ReconstructionOptions | None = None):
    """Recover a potential near zero from its truncated spectral image.

    Damped Gauss–Newton from ``q = 0`` in the basis
    ``{1, cos(pi x), ..., cos(2N pi x)}`` (``2N+1`` unknowns for ``2N+1`` data).
    Each step solves the linearized system by truncated SVD; the step is
    halved up to ``options.retries`` times until the misfit decreases.

    Returns
    -------
    q_hat : Potential
        Best iterate found.
    report : ReconstructionReport
    """
    opts = options or ReconstructionOptions()
    l1, l2 = _pair(pair)
    if target.pair != (l1, l2):
        raise ValueError("target was generated for a different pair")
    N = target.N
    grid = opts.grid or default_grid()
    basis = cosine_basis(grid, 2 * N)
    y = target.vector()

    free = spectral_map((l1, l2), Potential.zero(grid), N).vector()
    if np.linalg.norm(y - free) > opts.warn_norm:
        warnings.warn("target is far from the free image; local reconstruction may fail", stacklevel=2)

    def residual(c):
        q = Potential(GridFn(grid, basis @ c))
        return q, spectral_map((l1, l2), q, N).vector() - y

    c = np.zeros(basis.shape[1])
    q, F = residual(c)
    misfit = float(np.linalg.norm(F))
    history = [misfit]
    converged = misfit < opts.tol_out
    diverged = False
    it = 0
    while not converged and it < opts.max_iter:
        it += 1
        J = _jacobian((l1, l2), q, N, basis)
        U, s, Vt = np.linalg.svd(J, full_matrices=False)
        keep = s >= opts.sigma_cut * s[0]
        step = -(Vt[keep].T @ ((U[:, keep].T @ F) / s[keep]))
        t, accepted = 1.0, False
        for _ in range(opts.retries + 1):
            try:
                q_new, F_new = residual(c + t * step)
                m_new = float(np.linalg.norm(F_new))
            except SpectrumError:
                m_new = math.inf
            if m_new < misfit:
                accepted = True
                break
            t *= 0.5
        if not accepted:
            diverged = True
            break
        c, q, F, misfit = c + t * step, q_new, F_new, m_new
        history.append(misfit)
        converged = misfit < opts.tol_out
    err = None
    if opts.q_true is not None:
        err = float(norm(q.values - opts.q_true.values))
    report = ReconstructionReport(
        pair=(l1, l2),
        N=N,
        iterations=it,
        misfit_history=history,
        sigma_cut=opts.sigma_cut,
        converged=converged,
        diverged=diverged,
        q_error_if_known=err,
        coefficients=c.tolist(),
    )
    return q, report
