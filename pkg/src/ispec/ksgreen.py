"""Kneser–Sommerfeld series, its integrated (Green) form, and derived identities.

The corrected Kneser–Sommerfeld expansion states, for ``0 <= x <= X <= 1``
and ``z`` off the zeros ``j_n = j_{nu,n}``::

    sum_n J(x j_n) J(X j_n) / ((z² - j_n²) J'(j_n)²)
        = pi / (4 J(z)) * J(x z) [J(z) Y(X z) - Y(z) J(X z)]

with ``J = J_nu``, ``Y = Y_nu``.  The series converges like ``sum 1/n²`` so
plain truncation stalls near 1e-4; the functions here add a tail estimate:

* terms ``N_terms < n <= 64 N_terms`` are summed exactly (zeros and Bessel
  values are cheap in closed form);
* beyond that, the terms are replaced by their large-argument form
  ``cos(x j - phi) cos(X j - phi) / (sqrt(x X) (z² - j²))`` with
  ``j ~ (n + ell/2) pi``, ``phi = nu pi/2 + pi/4``, and the sum by an integral
  expressed through the sine and cosine integrals.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import sici

from .funcspace import Grid, GridFn, integral
from .special import (
    Order,
    bessel_half,
    bessel_y_half,
    bessel_zeros,
    phi_psi,
    pq_polynomials,
)
from .xform import OpTag, apply

__all__ = [
    "KSQuery",
    "IllConditionedError",
    "ks_lhs",
    "ks_rhs",
    "ks_residual",
    "green_sides",
    "green_residual",
    "moment_functional",
    "reduced_identity_sides",
    "reduced_identity_residual",
    "reduced_identity_limit",
    "half_order_closed_form",
    "ks_sweep",
    "TAIL_FACTOR",
    "ZERO_GUARD",
]

TAIL_FACTOR = 64  # exact terms are summed up to TAIL_FACTOR * N_terms
ZERO_GUARD = 1e-3  # minimal distance from z to the zeros j_{nu,n}


class IllConditionedError(ValueError):
    """``z`` is too close to a zero of ``J_nu`` for the series to be meaningful."""


@dataclass(frozen=True)
class KSQuery:
    """Arguments of one evaluation of the Kneser–Sommerfeld identity.

    Parameters
    ----------
    order : Order or int
    x, X : float
        Radial arguments with ``0 <= x <= X <= 1``.
    z : complex
    n_terms : int
        Number of series terms summed explicitly.
    tail_mode : {"none", "integral_compensation"}
    """

    order: Order
    x: float
    X: float
    z: complex
    n_terms: int = 400
    tail_mode: str = "integral_compensation"

    def __post_init__(self):
        object.__setattr__(self, "order", Order.coerce(self.order))
        if not 0.0 <= self.x <= self.X <= 1.0:
            raise ValueError("need 0 <= x <= X <= 1")
        if self.n_terms < 1:
            raise ValueError("n_terms must be positive")
        if self.tail_mode not in ("none", "integral_compensation"):
            raise ValueError(f"unknown tail mode {self.tail_mode!r}")
        _guard(self.order, self.z)


def _guard(order: Order, z) -> None:
    zr = abs(complex(z))
    # zeros up to a little beyond |z|
    count = max(2, int(zr / np.pi) + order.ell + 3)
    j = bessel_zeros(order, count)
    if np.min(np.abs(complex(z) - j)) < ZERO_GUARD or np.min(np.abs(complex(z) + j)) < ZERO_GUARD:
        raise IllConditionedError(f"z={z} lies within {ZERO_GUARD} of a zero of J_{order.nu}")


def _terms(order: Order, x: float, X: float, z, j: np.ndarray) -> np.ndarray:
    ell = order.ell
    jp = bessel_half(ell + 1, "plus_nu", j)  # J'_nu(j_n) = -J_{nu+1}(j_n)
    num = bessel_half(ell, "plus_nu", x * j) * bessel_half(ell, "plus_nu", X * j)
    return num / ((z * z - j * j) * jp * jp)


def _integral_tail_cos(omega: float, c: float, A: float) -> float:
    """``∫_A^∞ cos(omega s + c) / s² ds`` for ``omega >= 0``, ``A > 0``."""
    if omega == 0.0:
        return math.cos(c) / A
    si, ci = sici(omega * A)
    sin_int = math.cos(c) * (0.5 * math.pi - si) - math.sin(c) * ci
    return math.cos(omega * A + c) / A - omega * sin_int


def _asymptotic_remainder(order: Order, x: float, X: float, M: int) -> float:
    """Integral estimate of the sum of large-argument terms with index ``n > M``."""
    if x == 0.0:
        return 0.0
    beta = order.ell / 2.0
    phi = order.nu * math.pi / 2 + math.pi / 4
    A = M + 0.5 + beta  # midpoint rule: sum_{n>M} f(n + beta) ~ ∫_{A}^∞ f(s) ds
    # cos(a)cos(b) = [cos(a - b) + cos(a + b)]/2 with a = x s pi - phi, b = X s pi - phi
    t1 = _integral_tail_cos(math.pi * (X - x), 0.0, A)
    t2 = _integral_tail_cos(math.pi * (X + x), -2.0 * phi, A)
    # 1/(z² - j²) ~ -1/(pi² s²) once j >> |z|
    return -0.5 * (t1 + t2) / (math.pi**2 * math.sqrt(x * X))


def ks_lhs(query: KSQuery):
    """Truncated (and optionally tail-compensated) series side."""
    order, x, X, z, N = query.order, query.x, query.X, complex(query.z), query.n_terms
    if x == 0.0 and order.nu > 0:
        return 0.0
    zz = z if z.imag != 0 else z.real
    j = bessel_zeros(order, N)
    total = np.sum(_terms(order, x, X, zz, j))
    if query.tail_mode == "integral_compensation":
        M = TAIL_FACTOR * N
        jt = bessel_zeros(order, M)[N:]
        total = total + np.sum(_terms(order, x, X, zz, jt))
        total = total + _asymptotic_remainder(order, x, X, M)
    return total


def ks_rhs(order, x: float, X: float, z):
    """Closed-form side ``pi/(4 J(z)) J(xz) [J(z) Y(Xz) - Y(z) J(Xz)]``."""
    order = Order.coerce(order)
    ell = order.ell
    z = complex(z)
    zz = z if z.imag != 0 else z.real
    if x == 0.0:
        return 0.0
    Jz, Yz = bessel_half(ell, "plus_nu", zz), bessel_y_half(ell, zz)
    JX, YX = bessel_half(ell, "plus_nu", X * zz), bessel_y_half(ell, X * zz)
    return np.pi / (4 * Jz) * bessel_half(ell, "plus_nu", x * zz) * (Jz * YX - Yz * JX)


def ks_residual(query: KSQuery) -> float:
    """``|LHS - RHS|`` of the Kneser–Sommerfeld identity.

    Examples
    --------
    >>> r = ks_residual(KSQuery(0, 0.3, 0.7, 2.5))
    >>> bool(r < 1e-8)
    True
    """
    return float(abs(ks_lhs(query) - ks_rhs(query.order, query.x, query.X, query.z)))


def half_order_closed_form(x: float, X: float, z):
    """The ``nu = 1/2`` series summed in elementary functions.

    Both sides reduce to ``-sin(x z) sin((1 - X) z) / (2 z sin z sqrt(x X))``.
    """
    z = complex(z)
    val = -np.sin(x * z) * np.sin((1 - X) * z) / (2 * z * np.sin(z) * math.sqrt(x * X))
    return val.real if z.imag == 0 else val


def ks_sweep(n_queries: int = 30, seed: int = 0, n_terms: int = 400):
    """Residuals of the compensated series on random queries.

    Orders cycle through ``nu = 1/2, 3/2, 5/2``; ``0.05 <= x <= X <= 1``;
    every third ``z`` is complex (``Im z`` in ``[0.1, 2]``), the rest real in
    ``[0.5, 20]``.  Draws closer than ``ZERO_GUARD`` to a zero are redrawn.

    Returns
    -------
    list of dict
        ``ell, x, X, z, residual`` and, for ``nu = 1/2``, ``closed_form_gap``
        (closed-form side against the elementary expression).
    """
    rng = np.random.default_rng(seed)
    out = []
    while len(out) < n_queries:
        ell = len(out) % 3
        x, X = np.sort(rng.uniform(0.05, 1.0, size=2))
        z = complex(rng.uniform(0.5, 20.0), rng.uniform(0.1, 2.0) if len(out) % 3 == 2 else 0.0)
        try:
            q = KSQuery(ell, float(x), float(X), z if z.imag else z.real, n_terms)
        except IllConditionedError:
            continue
        row = {"ell": ell, "x": float(x), "X": float(X), "z": [z.real, z.imag], "residual": ks_residual(q)}
        if ell == 0:
            row["closed_form_gap"] = float(abs(ks_rhs(0, q.x, q.X, q.z) - half_order_closed_form(q.x, q.X, q.z)))
        out.append(row)
    return out


# ---------------------------------------------------------------------------
# integrated (diagonal) form
# ---------------------------------------------------------------------------


def _fine_rule(grid: Grid, max_freq: float, nodes: int = 16):
    """Composite Gauss rule refining every grid panel so that ``max_freq * width <= 8``."""
    s, w = np.polynomial.legendre.leggauss(nodes)
    xs, ws = [], []
    for p in range(grid.panels):
        a, b = grid.a[p], grid.b[p]
        k = max(1, math.ceil((b - a) * max_freq / 8.0))
        e = a + (b - a) * np.arange(k + 1) / k
        lo, hi = e[:-1, None], e[1:, None]
        xs.append((lo + 0.5 * (hi - lo) * (s + 1)).ravel())
        ws.append((0.5 * (hi - lo) * w).ravel())
    return np.concatenate(xs), np.concatenate(ws)


def _green_coefficients(order: Order, zeta: GridFn, j: np.ndarray) -> np.ndarray:
    """``c_n = ∫ x zeta J(j_n x)² dx = (2/(pi j_n)) ∫ zeta Phi(j_n x) dx``."""
    x, w = _fine_rule(zeta.grid, 2.0 * float(j[-1]))
    zw = zeta(x) * w
    out = np.empty(j.size)
    chunk = max(1, 2_000_000 // x.size)
    for k in range(0, j.size, chunk):
        jj = j[k : k + chunk]
        phi, _ = phi_psi(order.ell, np.outer(jj, x).ravel())
        out[k : k + chunk] = phi.reshape(jj.size, x.size) @ zw
    return 2.0 / (np.pi * j) * out


def _reciprocal_tail(order: Order, z, N: int) -> complex:
    """``sum_{n > N} 1 / (z² - j_n²)``: exact to ``64 N`` then an integral remainder."""
    M = TAIL_FACTOR * N
    j = bessel_zeros(order, M)[N:]
    A = M + 0.5 + order.ell / 2.0
    return np.sum(1.0 / (z * z - j * j)) - 1.0 / (math.pi**2 * A)


def green_sides(order, zeta: GridFn, z, n_terms: int = 400, tail: bool = True):
    """Both sides of the integrated Kneser–Sommerfeld identity on the diagonal.

    Returns
    -------
    lhs : complex or float
        ``sum_n c_n / ((z² - j_n²) J'(j_n)²)`` with ``c_n = ∫ x zeta J(j_n x)²``.
        With ``tail=True`` indices beyond ``n_terms`` use ``c_n / J'(j_n)² ~ (1/2)∫zeta``
        (large-argument form of ``J²``; the oscillating part integrates to
        ``O(j^-2)``).
    rhs : complex or float
        ``-(J(z) ∫ zeta Psi(zx) + Y(z) ∫ zeta Phi(zx)) / (2 z J(z))``, which is
        ``pi/(4 J(z)) ∫ x zeta J(xz)[J(z) Y(xz) - Y(z) J(xz)] dx``.
    """
    order = Order.coerce(order)
    ell = order.ell
    z = complex(z)
    _guard(order, z)
    zz = z if z.imag != 0 else z.real
    j = bessel_zeros(order, n_terms)
    c = _green_coefficients(order, zeta, j)
    jp2 = bessel_half(ell + 1, "plus_nu", j) ** 2
    lhs = np.sum(c / ((zz * zz - j * j) * jp2))
    if tail:
        lhs = lhs + 0.5 * float(integral(zeta)) * _reciprocal_tail(order, zz, n_terms)
    rhs = _green_rhs(order, zeta, zz)
    return lhs, rhs


def _green_rhs(order: Order, zeta: GridFn, z):
    ell = order.ell
    x = zeta.grid.nodes
    w = zeta.grid.weights * zeta.values
    if np.iscomplexobj(z) or np.real(z) < 0:
        y = bessel_half(ell, "plus_nu", z * x)
        yy = bessel_y_half(ell, z * x)
        phi, psi = 0.5 * np.pi * z * x * y * y, -0.5 * np.pi * z * x * y * yy
    else:
        phi, psi = phi_psi(ell, z * x)
    Jz, Yz = bessel_half(ell, "plus_nu", z), bessel_y_half(ell, z)
    return -(Jz * np.sum(w * psi) + Yz * np.sum(w * phi)) / (2 * z * Jz)


def green_residual(order, zeta: GridFn, z, n_terms: int = 400, tail: bool = True) -> float:
    """``|lhs - rhs|`` from :func:`green_sides`."""
    lhs, rhs = green_sides(order, zeta, z, n_terms, tail)
    return float(abs(lhs - rhs))


def moment_functional(order, zeta: GridFn, z_small: float = 1e-3):
    """``∫ x zeta (1 - x^(2 nu)) dx`` and the matching small-``z`` Green value.

    With ``J(w) ~ (w/2)^nu / Gamma(nu+1)`` and ``Y(w) ~ -Gamma(nu)/pi (2/w)^nu``
    the bracket ``J(z) Y(xz) - Y(z) J(xz)`` tends to ``-(1 - x^(2 nu)) / (pi nu)``
    times ``J(z) / J(xz)``, so the Green right-hand side tends to
    ``-moment / (4 nu)``.  Returns ``(moment, -4 nu * rhs(z_small))``; the two
    agree to ``O(z_small²)``.
    """
    order = Order.coerce(order)
    nu = order.nu
    moment = float(integral(zeta, weight=lambda t: t * (1.0 - t ** (2 * nu))))
    rhs = _green_rhs(order, zeta, z_small)
    return moment, float(np.real(rhs)) * (-4.0 * nu)


# ---------------------------------------------------------------------------
# reduced trigonometric identity
# ---------------------------------------------------------------------------


def reduced_identity_sides(ell: int, zeta: GridFn, z):
    """Two evaluations of the same quantity for ``T_ell zeta``.

    ``direct = ∫ T zeta [P(1/z) cos(z(2x-1)) - Q(1/z) sin(z(2x-1))] dx`` and
    ``bessel = sqrt(pi z/2) [J_nu(z) ∫ T zeta sin(2zx) + (-1)^ell J_{-nu}(z) ∫ T zeta cos(2zx)]``.
    """
    z = complex(z)
    zz = z if z.imag != 0 else z.real
    tz = apply(OpTag("T", ell), zeta) if ell > 0 else zeta
    x, w = tz.grid.nodes, tz.grid.weights * tz.values
    p, q = pq_polynomials(ell)
    u = zz * (2 * x - 1)
    direct = np.sum(w * (p(1 / zz) * np.cos(u) - q(1 / zz) * np.sin(u)))
    s = np.sum(w * np.sin(2 * zz * x))
    c = np.sum(w * np.cos(2 * zz * x))
    bessel = np.sqrt(np.pi * zz / 2) * (
        bessel_half(ell, "plus_nu", zz) * s + (-1) ** ell * bessel_half(ell, "minus_nu", zz) * c
    )
    return direct, bessel


def reduced_identity_residual(ell: int, zeta: GridFn, z) -> float:
    """``|direct - bessel|`` from :func:`reduced_identity_sides`; ``zeta`` should have mean zero."""
    d, b = reduced_identity_sides(ell, zeta, z)
    return float(abs(d - b))


def reduced_identity_limit(ell: int, zeta: GridFn, z: float = 1e-4):
    """``z^ell * direct`` at small ``z`` against its limit ``(2 ell - 1)!! ∫ T_ell zeta``.

    The leading coefficient of ``P_ell`` is ``(2 ell - 1)!!`` and
    ``z^ell Q_{ell-1}(1/z) = O(z)``, so both numbers agree to ``O(z)``; the
    limit is zero for mean-zero ``zeta`` because ``∫ S_k f = -∫ f``.
    """
    d, _ = reduced_identity_sides(ell, zeta, z)
    tz = apply(OpTag("T", ell), zeta) if ell > 0 else zeta
    dfact = float(np.prod(np.arange(2 * ell - 1, 0, -2))) if ell > 0 else 1.0
    return float(np.real(z**ell * d)), dfact * float(integral(tz))
