"""Half-integer Bessel functions, their zeros, and the associated polynomial families.

For a half-integer order ``nu = ell + 1/2`` the Bessel functions reduce to
trigonometric functions multiplied by polynomials in ``1/z``::

    J_nu(z)  = sqrt(2/(pi z)) * [P_ell(1/z) sin z - Q_{ell-1}(1/z) cos z]
    J_-nu(z) = (-1)^ell sqrt(2/(pi z)) * [P_ell(1/z) cos z + Q_{ell-1}(1/z) sin z]

with the three-term recursions

    P_{l+1}(t) = (2l+1) t P_l(t) - P_{l-1}(t),   P_0 = 1, P_1 = t
    Q_{l+1}(t) = (2l+3) t Q_l(t) - Q_{l-1}(t),   Q_{-1} = 0, Q_0 = 1.

Everything here works with exact rational coefficients (``fractions.Fraction``)
and converts to floating point only when a polynomial is evaluated.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
import numpy as np
from scipy.optimize import brentq
from scipy.special import gamma

__all__ = [
    "Order",
    "PolySeq",
    "pq_polynomials",
    "a_tilde_polynomial",
    "a_polynomial",
    "bessel_half",
    "bessel_y_half",
    "hankel_half",
    "bessel_half_prime",
    "phi_psi",
    "bessel_zero",
    "bessel_zeros",
    "MAX_ELL",
]

#: Largest angular momentum for which the polynomial tables are precomputed.
MAX_ELL = 12

# below this |z| the closed forms are replaced by the power series
SERIES_SWITCH = 1e-2


@dataclass(frozen=True)
class Order:
    """Angular momentum ``ell`` together with the Bessel order ``nu = ell + 1/2``."""

    ell: int

    def __post_init__(self):
        if int(self.ell) != self.ell or self.ell < 0:
            raise ValueError(f"angular momentum must be a non-negative integer, got {self.ell!r}")

    @property
    def nu(self) -> float:
        return self.ell + 0.5

    @classmethod
    def coerce(cls, value) -> "Order":
        return value if isinstance(value, Order) else cls(int(value))


@dataclass(frozen=True)
class PolySeq:
    """A polynomial stored by its coefficients, lowest degree first.

    Parameters
    ----------
    kind : str
        One of ``"P"``, ``"Q"``, ``"A_tilde"``, ``"A_obstruction"``.
    index : int
        The subscript of the family member (``Q`` members may have index -1).
    coeffs : tuple
        Exact coefficients. Real families use :class:`fractions.Fraction`;
        ``A_tilde`` uses pairs ``(re, im)`` of fractions.
    """

    kind: str
    index: int
    coeffs: tuple

    @property
    def degree(self) -> int:
        for k in range(len(self.coeffs) - 1, -1, -1):
            if _cabs(self.coeffs[k]) != 0:
                return k
        return -1  # the zero polynomial

    def numeric(self) -> np.ndarray:
        """Floating-point coefficient vector (complex for ``A_tilde``)."""
        if self.kind == "A_tilde":
            return np.array([complex(float(a), float(b)) for a, b in self.coeffs])
        return np.array([float(c) for c in self.coeffs], dtype=float)

    def __call__(self, t):
        c = self.numeric()
        if c.size == 0:
            return 0.0 * np.asarray(t)
        # numpy's polyval wants highest degree first
        return np.polyval(c[::-1], t)


def _cabs(c):
    return abs(c[0]) + abs(c[1]) if isinstance(c, tuple) else abs(c)


def _trim(coeffs: list) -> tuple:
    while coeffs and coeffs[-1] == 0:
        coeffs.pop()
    return tuple(coeffs)


def _recur(prev: list, cur: list, factor: int, shift_cur: bool) -> list:
    """Return ``factor * t * cur - prev`` (or ``factor*cur - prev`` if not shifting)."""
    out = [Fraction(0)] * (max(len(prev), len(cur) + 1))
    for k, c in enumerate(cur):
        out[k + 1 if shift_cur else k] += factor * c
    for k, c in enumerate(prev):
        out[k] -= c
    return out


@lru_cache(maxsize=None)
def _p_table(n: int) -> tuple:
    table = [[Fraction(1)], [Fraction(0), Fraction(1)]]
    for ell in range(1, n):
        table.append(_recur(table[ell - 1], table[ell], 2 * ell + 1, True))
    return tuple(_trim(list(p)) for p in table[: n + 1])


@lru_cache(maxsize=None)
def _q_table(n: int) -> tuple:
    # index shifted by one: entry k holds Q_{k-1}
    table = [[], [Fraction(1)]]
    for ell in range(0, n):
        table.append(_recur(table[ell], table[ell + 1], 2 * ell + 3, True))
    return tuple(_trim(list(q)) for q in table[: n + 2])


def pq_polynomials(ell: int) -> tuple[PolySeq, PolySeq]:
    """Return ``(P_ell, Q_{ell-1})`` with exact rational coefficients.

    Examples
    --------
    >>> p, q = pq_polynomials(2)
    >>> [str(c) for c in p.coeffs], [str(c) for c in q.coeffs]
    (['-1', '0', '3'], ['0', '3'])
    """
    ell = int(ell)
    if ell < 0:
        raise ValueError("ell must be >= 0")
    n = max(ell + 1, MAX_ELL)
    return (PolySeq("P", ell, _p_table(n)[ell]), PolySeq("Q", ell - 1, _q_table(n)[ell]))


@lru_cache(maxsize=None)
def a_tilde_polynomial(ell: int) -> PolySeq:
    """The complex polynomial ``Ã_ell(z) = z^ell P_ell(1/z) - i z^ell Q_{ell-1}(1/z)``.

    It satisfies ``Ã_{l+1} = (2l+1) Ã_l - z^2 Ã_{l-1}`` with ``Ã_0 = 1`` and
    ``Ã_1 = 1 - i z``.  Coefficients are returned as ``(re, im)`` fraction pairs.
    """
    ell = int(ell)
    p, q = pq_polynomials(ell)
    size = ell + 1
    re = [Fraction(0)] * size
    im = [Fraction(0)] * size
    # reversing the coefficient order multiplies by z^ell and substitutes 1/z
    for k, c in enumerate(p.coeffs):
        re[ell - k] += c
    for k, c in enumerate(q.coeffs):
        im[ell - k] -= c
    return PolySeq("A_tilde", ell, tuple(zip(re, im)))


@lru_cache(maxsize=None)
def a_polynomial(ell: int) -> PolySeq:
    """Real polynomial ``A_ell(t) = Ã_ell(t / 2i)``.

    Built by substitution from :func:`a_tilde_polynomial`; the imaginary part
    cancels exactly, which is checked here (it is an exact rational computation).

    >>> [str(c) for c in a_polynomial(2).coeffs]
    ['3', '-3/2', '1/4']
    """
    at = a_tilde_polynomial(ell)
    out = []
    # (1/(2i))^k = (-i/2)^k  ->  cycle of unit factors 1, -i, -1, i
    unit = [(1, 0), (0, -1), (-1, 0), (0, 1)]
    for k, (a, b) in enumerate(at.coeffs):
        ur, ui = unit[k % 4]
        scale = Fraction(1, 2**k)
        re = (a * ur - b * ui) * scale
        im = (a * ui + b * ur) * scale
        if im != 0:  # pragma: no cover - would be an algebra bug
            raise ArithmeticError(f"A_{ell} picked up an imaginary coefficient at degree {k}")
        out.append(re)
    return PolySeq("A_obstruction", ell, _trim(out))


# ---------------------------------------------------------------------------
# Bessel functions of half-integer order
# ---------------------------------------------------------------------------


def _series_terms(nu: float, z, sign: int = 1, tol: float = 1e-17, kmax: int = 80):
    """Power series of J_{sign*nu}(z); ``z`` is an array."""
    mu = sign * nu
    half = z / 2.0
    h2 = -(half * half)
    term = np.power(half + 0j, mu) / gamma(mu + 1.0)
    total = term.copy()
    for k in range(1, kmax):
        term = term * h2 / (k * (k + mu))
        total = total + term
        if np.all(np.abs(term) <= tol * np.maximum(np.abs(total), 1e-300)):
            break
    return total


def _closed_form(ell: int, z, branch: str):
    p, q = pq_polynomials(ell)
    t = 1.0 / z
    pv, qv = p(t), q(t)
    pref = np.sqrt(2.0 / (np.pi * z))
    if branch == "plus_nu":
        return pref * (pv * np.sin(z) - qv * np.cos(z))
    return (-1) ** ell * pref * (pv * np.cos(z) + qv * np.sin(z))


def bessel_half(order, branch: str, z):
    """Evaluate ``J_nu(z)`` or ``J_{-nu}(z)`` for ``nu = ell + 1/2``.

    Parameters
    ----------
    order : Order or int
        The angular momentum ``ell``.
    branch : {"plus_nu", "minus_nu"}
        Which of the two functions to evaluate.
    z : float, complex or array_like
        Argument.  Complex values use the principal branch of the square root.

    Returns
    -------
    ndarray or scalar
        Real when every ``z`` is real and non-negative, complex otherwise.

    Notes
    -----
    For small ``|z|`` the trigonometric closed form loses all accuracy to
    cancellation, so the power series is used there instead.  The switch sits
    at ``max(1e-2, ell)`` for the regular branch (the cancellation grows like
    ``ell!`` relative terms), and at ``1e-2`` for the singular branch, whose
    closed form is dominated by its leading term and stays well conditioned.
    """
    ell = Order.coerce(order).ell
    if branch not in ("plus_nu", "minus_nu"):
        raise ValueError(f"unknown branch {branch!r}")
    z_in = np.asarray(z)
    scalar = z_in.ndim == 0
    zc = np.atleast_1d(z_in).astype(complex)
    real_out = np.isrealobj(z_in) and np.all(z_in >= 0)

    out = np.empty(zc.shape, dtype=complex)
    az = np.abs(zc)
    zero = az == 0
    if branch == "minus_nu" and np.any(zero):
        raise ValueError("J_{-nu} has a pole at z = 0")
    switch = max(SERIES_SWITCH, float(ell)) if branch == "plus_nu" else SERIES_SWITCH
    small = (az < switch) & ~zero
    big = ~small & ~zero
    out[zero] = 0.0
    if np.any(small):
        out[small] = _series_terms(ell + 0.5, zc[small], 1 if branch == "plus_nu" else -1)
    if np.any(big):
        out[big] = _closed_form(ell, zc[big], branch)
    if real_out:
        out = out.real
    return out[0] if scalar else out


def bessel_y_half(order, z):
    """``Y_nu(z) = (-1)^(ell+1) J_{-nu}(z)`` for half-integer ``nu``."""
    ell = Order.coerce(order).ell
    return (-1) ** (ell + 1) * bessel_half(ell, "minus_nu", z)


def hankel_half(order, kind: int, z):
    """Hankel function ``H^(1)_nu`` (``kind=1``) or ``H^(2)_nu`` (``kind=2``)."""
    j = bessel_half(order, "plus_nu", z)
    y = bessel_y_half(order, z)
    if kind == 1:
        return j + 1j * y
    if kind == 2:
        return j - 1j * y
    raise ValueError("kind must be 1 or 2")


def bessel_half_prime(order, z, which: str = "J"):
    """Derivative of ``J_nu`` (``which="J"``) or ``Y_nu`` (``which="Y"``).

    Uses ``C'_nu = (nu/z) C_nu - C_{nu+1}``, valid for both kinds.
    """
    ell = Order.coerce(order).ell
    nu = ell + 0.5
    z = np.asarray(z)
    if which == "J":
        return nu / z * bessel_half(ell, "plus_nu", z) - bessel_half(ell + 1, "plus_nu", z)
    if which == "Y":
        return nu / z * bessel_y_half(ell, z) - bessel_y_half(ell + 1, z)
    raise ValueError("which must be 'J' or 'Y'")


def phi_psi(ell: int, x):
    """The kernels ``Phi_ell(x) = (pi x/2) J_nu(x)^2`` and ``Psi_ell(x) = -(pi x/2) J_nu(x) Y_nu(x)``.

    For ``ell = 0`` these are ``(1 - cos 2x)/2`` and ``sin(2x)/2``.  At ``x = 0``
    both kernels vanish (``J_nu Y_nu -> -1/(pi nu)`` stays bounded).
    """
    x = np.asarray(x, dtype=float)
    if np.any(x < 0):
        raise ValueError("x must be non-negative")
    ell = int(ell)
    xs = np.atleast_1d(x)
    phi = np.zeros_like(xs)
    psi = np.empty_like(xs)
    pos = xs > 0
    j = bessel_half(ell, "plus_nu", xs[pos])
    y = bessel_y_half(ell, xs[pos])
    phi[pos] = 0.5 * np.pi * xs[pos] * j * j
    psi[pos] = -0.5 * np.pi * xs[pos] * j * y
    psi[~pos] = 0.0
    if x.ndim == 0:
        return phi[0], psi[0]
    return phi, psi


# ---------------------------------------------------------------------------
# zeros
# ---------------------------------------------------------------------------


def _scaled_j(ell: int, z: float) -> float:
    """``J_nu(z) * sqrt(pi z / 2)``; same zeros, no decaying prefactor."""
    p, q = pq_polynomials(ell)
    t = 1.0 / z
    return float(p(t) * math.sin(z) - q(t) * math.cos(z))


def _newton_polish(ell: int, z: np.ndarray, steps: int = 4) -> np.ndarray:
    """Vectorized Newton iterations on the scaled closed form."""
    p, q = pq_polynomials(ell)
    dp = np.polyder(p.numeric()[::-1]) if p.degree > 0 else np.zeros(1)
    dq = np.polyder(q.numeric()[::-1]) if q.degree > 0 else np.zeros(1)
    pc, qc = p.numeric()[::-1], q.numeric()[::-1] if q.coeffs else np.zeros(1)
    for _ in range(steps):
        t = 1.0 / z
        s, c = np.sin(z), np.cos(z)
        pv, qv = np.polyval(pc, t), np.polyval(qc, t)
        dpv, dqv = np.polyval(dp, t), np.polyval(dq, t)
        h = pv * s - qv * c
        dh = -dpv * t * t * s + pv * c + dqv * t * t * c + qv * s
        z = z - h / dh
    return z


@lru_cache(maxsize=64)
def _zeros_bracketed(ell: int, count: int) -> tuple:
    """First ``count`` zeros by interlacing brackets and Brent's method."""
    if ell == 0:
        return tuple(np.pi * np.arange(1, count + 1))
    lower = _zeros_bracketed(ell - 1, count + 1)
    roots = []
    for n in range(count):
        a, b = lower[n], lower[n + 1]
        r = brentq(lambda s: _scaled_j(ell, s), a, b, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=200)
        roots.append(float(_newton_polish(ell, np.array([r]), steps=1)[0]))
    out = tuple(roots)
    if np.any(np.diff(out) <= 0):  # pragma: no cover - signals a bracketing bug
        raise ArithmeticError(f"zeros of J_{ell + 0.5} not strictly increasing")
    return out


# beyond this index zeros come from McMahon's expansion polished by Newton
_BRACKETED = 200


def bessel_zeros(order, count: int) -> np.ndarray:
    """The first ``count`` positive zeros ``j_{nu,1} < ... < j_{nu,count}``.

    The first 200 zeros are isolated by interlacing with the zeros of the next
    lower order (``j_{nu-1,n} < j_{nu,n} < j_{nu-1,n+1}``, starting from
    ``j_{1/2,n} = n pi``) and polished with Brent's method.  Higher zeros
    start from McMahon's expansion around ``(n + ell/2) pi`` and are refined
    by Newton iterations, vectorized over ``n``.
    """
    ell = Order.coerce(order).ell
    count = int(count)
    if count < 1:
        return np.zeros(0)
    head = np.array(_zeros_bracketed(ell, min(count, _BRACKETED)))
    if count <= _BRACKETED:
        return head
    n = np.arange(_BRACKETED + 1, count + 1, dtype=float)
    beta = (n + ell / 2.0) * np.pi
    mu = 4.0 * (ell + 0.5) ** 2
    guess = beta - (mu - 1) / (8 * beta) - 4 * (mu - 1) * (7 * mu - 31) / (3 * (8 * beta) ** 3)
    tail = _newton_polish(ell, guess, steps=4)
    out = np.concatenate([head, tail])
    if np.any(np.diff(out) <= 0) or np.any(np.abs(np.diff(out) - np.pi) > 0.5):
        raise ArithmeticError(f"could not isolate the zeros of J_{ell + 0.5} beyond n={_BRACKETED}")
    return out


def bessel_zero(order, n: int) -> float:
    """The ``n``-th positive zero ``j_{nu,n}`` of ``J_nu`` (``n >= 1``).

    >>> round(bessel_zero(1, 1), 6)
    4.493409
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    return float(bessel_zeros(order, n)[n - 1])
