"""Fixed-energy scattering data and the product representation of ``phi(1, lambda)``.

* :func:`phi0_reference` -- the free regular solution at ``r = 1``,
  ``2^nu lambda^(-nu/2) Gamma(nu+1) J_nu(sqrt(lambda))``.
* :func:`hadamard_check` -- compares ``phi(1, nu, lambda)`` from the solver
  with the canonical product over the Dirichlet eigenvalues.  The unknown
  leading constant is eliminated by dividing by the same quantities at a
  reference point ``lambda_ref``; the omitted factors ``n > N_prod`` are
  restored from the asymptotic eigenvalues ``(n + l/2)² pi² + ∫q - l(l+1)``.
* :func:`jost_match` -- decomposes ``phi(r, nu, 1)`` at ``r = 1`` over the
  outgoing/incoming solutions

      f±(r) = exp(±i (nu + 1/2) pi/2) sqrt(pi r / 2) H^(1,2)_nu(r),

  valid for ``r >= 1`` when ``q`` is supported in ``[0, 1]``, and returns the
  unimodular ratio ``sigma = exp(i pi (nu + 1/2)) alpha / beta``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

from .funcspace import Grid, GridFn, default_grid, norm
from .special import Order, bessel_half, hankel_half
from .spectral import (
    Potential,
    _as_potential,
    _normalized_eigenfunction,
    dirichlet_spectrum,
    endpoint_value,
)

__all__ = [
    "JostData",
    "phi0_reference",
    "hadamard_check",
    "jost_match",
    "jost_solutions",
    "WRONSKIAN",
    "matched_partner",
    "sigma_gap",
]

WRONSKIAN = -2j  # W(f+, f-) = f+ f-' - f+' f-, fixed by the plane-wave asymptotics


def phi0_reference(order, lam) -> complex:
    """Free regular solution ``phi_0(1, nu, lambda)`` (principal square root).

    For ``|lambda| <= 1`` the power series
    ``Gamma(nu+1) sum_k (-lambda/4)^k / (k! Gamma(nu+k+1))`` is used, which
    also covers ``lambda = 0`` (value 1).

    Examples
    --------
    >>> round(phi0_reference(0, 0.0).real, 12)
    1.0
    """
    order = Order.coerce(order)
    nu = order.nu
    lam = complex(lam)
    if abs(lam) <= 1.0:
        total, term = 0.0 + 0.0j, 1.0 + 0.0j
        for k in range(40):
            if k:
                term *= -lam / (4.0 * k * (nu + k))
            total += term
        return total
    k = np.sqrt(lam)
    pref = np.exp(nu * math.log(2.0) + gammaln(nu + 1.0)) * k ** (-nu)
    return complex(pref * bessel_half(order, "plus_nu", k))


def _tail_log_ratio(ell: int, shift: float, lam, lam_ref, N: int, extra: int = 200_000) -> complex:
    """``sum_{n>N} log((1 - lam/mu_n)/(1 - lam_ref/mu_n))`` for model eigenvalues ``mu_n``."""
    n = np.arange(N + 1, N + extra + 1, dtype=float)
    mu = (n + ell / 2) ** 2 * np.pi**2 + shift
    s = np.sum(np.log1p(-complex(lam) / mu) - np.log1p(-complex(lam_ref) / mu))
    # remaining terms: log ratio ~ -(lam - lam_ref)/mu, sum_{n>M} 1/((n+a)² pi²) ~ 1/(pi² (M + a + 1/2))
    M = N + extra
    s += -(complex(lam) - complex(lam_ref)) / (np.pi**2 * (M + ell / 2 + 0.5))
    return s


def hadamard_check(
    order,
    q=None,
    lam=-4.0,
    N_prod: int = 200,
    lam_ref: float = -1.0,
    tail: bool = True,
    eigenvalues: np.ndarray | None = None,
) -> float:
    """Relative residual of the ratio-calibrated product representation.

    Compares ``phi(1, lam) / phi(1, lam_ref)`` from the solver with
    ``(lam/lam_ref)^m prod_n (1 - lam/lambda_n) / (1 - lam_ref/lambda_n)``.

    Parameters
    ----------
    order : Order or int
    q : Potential or None
    lam : complex
        Evaluation point, away from the eigenvalues.
    N_prod : int
        Number of computed eigenvalues in the product.
    lam_ref : float
        Calibration point (not an eigenvalue).
    tail : bool
        Multiply by the asymptotic factors for ``n > N_prod``.
    eigenvalues : array, optional
        Precomputed eigenvalues (at least ``N_prod``); computed with the
        solver when omitted.

    Raises
    ------
    ValueError
        If ``lam`` or ``lam_ref`` is within a relative distance 1e-6 of an
        eigenvalue.
    """
    order = Order.coerce(order)
    q = _as_potential(q)
    if eigenvalues is None:
        eigenvalues = dirichlet_spectrum(order, q, N_prod).eigenvalues
    ev = np.asarray(eigenvalues, dtype=float)[:N_prod]
    for point in (lam, lam_ref):
        if np.min(np.abs(complex(point) - ev) / np.maximum(1.0, np.abs(ev))) < 1e-6:
            raise ValueError(f"lambda = {point} is too close to an eigenvalue")
    # order m of the zero at lambda = 0
    m = 1 if abs(endpoint_value(order, 0.0, q)[0]) < 1e-8 else 0
    if m:
        ev = ev[np.abs(ev) > 1e-8]
    solver = complex(endpoint_value(order, lam, q)[0]) / complex(endpoint_value(order, lam_ref, q)[0])
    logp = np.sum(np.log(1.0 - complex(lam) / ev) - np.log(1.0 - complex(lam_ref) / ev))
    if tail:
        shift = q.mean - order.ell * (order.ell + 1)
        logp += _tail_log_ratio(order.ell, shift, lam, lam_ref, N_prod)
    product = np.exp(logp) * (complex(lam) / lam_ref) ** m
    return float(abs(solver - product) / abs(solver))


# ---------------------------------------------------------------------------
# Jost decomposition at lambda = 1
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class JostData:
    """Jost coefficients of ``phi(r, nu, 1) = alpha f+ + beta f-`` matched at ``r = 1``."""

    order: Order
    alpha: complex
    beta: complex
    sigma: complex
    wronskian: complex
    matched_at: float = 1.0

    @property
    def wronskian_check(self) -> float:
        return float(abs(self.wronskian - WRONSKIAN))

    def to_json(self) -> dict:
        return {
            "ell": self.order.ell,
            "alpha_re": self.alpha.real,
            "alpha_im": self.alpha.imag,
            "sigma_re": self.sigma.real,
            "sigma_im": self.sigma.imag,
            "wronskian_check": self.wronskian_check,
        }


def jost_solutions(order, r: float = 1.0):
    """``(f+, f+', f-, f-')`` at ``r`` for ``lambda = 1``."""
    order = Order.coerce(order)
    nu = order.nu
    out = []
    for kind, sign in ((1, 1), (2, -1)):
        h = hankel_half(order, kind, r)
        hn = hankel_half(order.ell + 1, kind, r)
        dh = nu / r * h - hn
        ph = np.exp(sign * 1j * (nu + 0.5) * np.pi / 2)
        s = math.sqrt(np.pi / 2)
        f = ph * s * math.sqrt(r) * h
        df = ph * s * (h / (2 * math.sqrt(r)) + math.sqrt(r) * dh)
        out += [complex(f), complex(df)]
    return tuple(out)


def jost_match(order, q=None) -> JostData:
    """Jost functions ``alpha, beta`` and Regge interpolation ``sigma`` at ``lambda = 1``.

    Examples
    --------
    >>> abs(jost_match(1).sigma - 1) < 1e-10
    True
    """
    order = Order.coerce(order)
    q = _as_potential(q)
    phi, dphi = endpoint_value(order, 1.0, q)
    fp, dfp, fm, dfm = jost_solutions(order, 1.0)
    W = fp * dfm - dfp * fm
    if abs(W) < 1e-12:
        raise ArithmeticError("Jost solutions are numerically dependent")
    alpha = (phi * dfm - dphi * fm) / W
    beta = (fp * dphi - dfp * phi) / W
    sigma = np.exp(1j * np.pi * (order.nu + 0.5)) * alpha / beta
    return JostData(order, complex(alpha), complex(beta), complex(sigma), complex(W))


# ---------------------------------------------------------------------------
# potentials sharing finitely many eigenvalues
# ---------------------------------------------------------------------------


def matched_partner(q, N: int, ell: int = 0, max_iter: int = 12, tol: float = 1e-11) -> Potential:
    """A potential whose first ``N`` eigenvalues of order ``ell`` equal those of ``q``.

    Gauss–Newton from ``0`` in the span of ``{1, cos(2 pi k x), k < N}``
    (``N`` unknowns for ``N`` eigenvalues).  For ``ell = 0`` and ``q``
    symmetric about ``x = 1/2`` the partner converges to ``q`` as ``N``
    grows, since one Dirichlet spectrum determines a symmetric potential.
    """
    q = _as_potential(q)
    grid = q.grid
    target = dirichlet_spectrum(ell, q, N).eigenvalues
    basis = np.cos(2 * np.pi * np.outer(grid.nodes, np.arange(N)))
    w = grid.weights
    c = np.zeros(N)
    cur = Potential(GridFn(grid, basis @ c))
    F = dirichlet_spectrum(ell, cur, N).eigenvalues - target
    for _ in range(max_iter):
        if np.linalg.norm(F) < tol:
            break
        rows = [w * _normalized_eigenfunction(ell, cur, float(lam)).values ** 2
                for lam in dirichlet_spectrum(ell, cur, N).eigenvalues]
        J = np.vstack(rows) @ basis
        step = np.linalg.lstsq(J, -F, rcond=None)[0]
        t = 1.0
        for _ in range(6):
            trial = Potential(GridFn(grid, basis @ (c + t * step)))
            F_new = dirichlet_spectrum(ell, trial, N).eigenvalues - target
            if np.linalg.norm(F_new) < np.linalg.norm(F):
                break
            t *= 0.5
        else:
            break
        c, cur, F = c + t * step, trial, F_new
    return cur


def sigma_gap(q, Ns=(5, 10, 20, 30), ell: int = 0):
    """``|sigma_q - sigma_{q_N}|`` and ``||q - q_N||`` for matched partners ``q_N``.

    Returns
    -------
    list of (N, sigma_gap, potential_gap)
    """
    q = _as_potential(q)
    s = jost_match(ell, q).sigma
    out = []
    for N in Ns:
        p = matched_partner(q, N, ell)
        out.append((int(N), float(abs(jost_match(ell, p).sigma - s)), float(norm(p.values - q.values))))
    return out
