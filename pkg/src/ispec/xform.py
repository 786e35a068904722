"""Index-reduction integral operators and their compositions.

For ``ell >= 1`` the basic Volterra-type operators are::

    S_ell f (x)  = f(x) - 4 ell x^(2 ell - 1) ∫_x^1 t^(-2 ell) f(t) dt
    S*_ell g (x) = g(x) - 4 ell x^(-2 ell)    ∫_0^x t^(2 ell - 1) g(t) dt   (L² adjoint)
    A_ell g (x)  = g(x) - 4 ell x^(-2 ell - 1) ∫_0^x t^(2 ell) g(t) dt     (inverse of S_ell)

and the signed compositions::

    T_ell  = (-1)^(ell+1) S_ell ... S_1        (T_0 = identity)
    T*_ell = (-1)^(ell+1) S*_1 ... S*_ell
    B_ell  = (-1)^(ell+1) A_ell ... A_1        (left inverse of T_ell)

On a grid every basic factor is "identity minus a diagonal scaling times a
running-integral matrix" (see :func:`ispec.funcspace.partial_integral_matrix`);
compositions are applied factor by factor.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .funcspace import Grid, GridFn, partial_integral_matrix

__all__ = [
    "OpTag",
    "FAMILIES",
    "MAX_ELL",
    "operator_matrix",
    "apply",
    "t2_explicit",
    "ode_residual_S",
    "ode_residual_Sadj",
    "CHECK_EDGES",
    "identity_suite",
]

MAX_ELL = 8
FAMILIES = ("S", "S_adj", "InvA", "T", "T_adj", "B", "T2_explicit")


@dataclass(frozen=True)
class OpTag:
    """Names one operator: a family and an angular momentum."""

    family: str
    ell: int

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown operator family {self.family!r}")
        lo = 0 if self.family in ("T", "T_adj", "B") else 1
        if self.family == "T2_explicit":
            if self.ell != 2:
                raise ValueError("T2_explicit only exists for ell = 2")
        elif not lo <= self.ell <= MAX_ELL:
            raise ValueError(f"ell={self.ell} outside the supported range [{lo}, {MAX_ELL}]")


def _factor(grid: Grid, family: str, ell: int, v: np.ndarray) -> np.ndarray:
    """Apply one basic factor ``S_ell``, ``S*_ell`` or ``A_ell`` to node values."""
    x = grid.nodes
    if v.ndim == 2:
        x = x[:, None]
    if family == "S":
        return v - 4 * ell * x ** (2 * ell - 1) * (partial_integral_matrix(grid, -2.0 * ell, "right") @ v)
    if family == "S_adj":
        return v - 4 * ell * x ** (-2.0 * ell) * (partial_integral_matrix(grid, 2.0 * ell - 1, "left") @ v)
    return v - 4 * ell * x ** (-2.0 * ell - 1) * (partial_integral_matrix(grid, 2.0 * ell, "left") @ v)


def _apply_values(grid: Grid, tag: OpTag, v: np.ndarray) -> np.ndarray:
    fam, ell = tag.family, tag.ell
    if fam in ("S", "S_adj", "InvA"):
        return _factor(grid, fam, ell, v)
    if fam == "T2_explicit":
        x = grid.nodes if v.ndim == 1 else grid.nodes[:, None]
        r2 = partial_integral_matrix(grid, -2.0, "right") @ v
        r4 = partial_integral_matrix(grid, -4.0, "right") @ v
        return -v - 12 * x * r2 + 24 * x**3 * r4
    if ell == 0:  # T_0 = B_0 = identity by convention
        return v.copy()
    # T = S_ell ... S_1 (S_1 acts first); T* = S*_1 ... S*_ell (S*_ell acts first);
    # B = A_ell ... A_1 (A_1 acts first).  The factors commute in any case.
    basic = {"T": "S", "T_adj": "S_adj", "B": "InvA"}[fam]
    order = range(ell, 0, -1) if fam == "T_adj" else range(1, ell + 1)
    for k in order:
        v = _factor(grid, basic, k, v)
    return (-1) ** (ell + 1) * v


def operator_matrix(grid: Grid, family: str, ell: int) -> np.ndarray:
    """Dense matrix of the operator ``(family, ell)`` acting on node values.

    Built by applying the operator to the identity; meant for linear-algebra
    probes rather than routine application.
    """
    return _apply_values(grid, OpTag(family, ell), np.eye(grid.size))


def apply(tag: OpTag | tuple, f: GridFn) -> GridFn:
    """Apply an operator to a grid function.

    Parameters
    ----------
    tag : OpTag or (family, ell)
        ``family`` is one of ``S``, ``S_adj``, ``InvA``, ``T``, ``T_adj``,
        ``B``, ``T2_explicit``.
    f : GridFn

    Examples
    --------
    >>> from ispec.funcspace import default_grid
    >>> G = default_grid()
    >>> g = apply(("S", 1), G.function(lambda t: t))
    >>> bool(np.allclose(g.values, G.nodes * (1 + 4 * np.log(G.nodes)), atol=1e-10))
    True
    """
    if not isinstance(tag, OpTag):
        tag = OpTag(*tag)
    return GridFn(f.grid, _apply_values(f.grid, tag, f.values))


def t2_explicit(zeta: GridFn) -> GridFn:
    """``T_2 ζ = -ζ - 12 x ∫_x^1 ζ/t² dt + 24 x³ ∫_x^1 ζ/t⁴ dt``.

    Built directly from the two running integrals rather than by composing
    ``S_2 S_1``; used to cross-check :func:`apply` with ``("T", 2)``.
    """
    return apply(OpTag("T2_explicit", 2), zeta)


# Residuals of the differential relations are sampled on a coarse mesh of
# [1/4, 3/4]: two panels with 12 Legendre nodes each.  High derivatives taken
# on the fine working grid amplify rounding by (2/h)^k ||D^k|| ~ 1e13 for k=4,
# and near the endpoints the images S f carry x^(2l-1) log x terms; wide
# panels away from 0 and 1 keep both effects below 1e-8.
CHECK_EDGES = (0.25, 0.5, 0.75)
CHECK_NODES = 12


def _check_mesh():
    s, _ = np.polynomial.legendre.leggauss(CHECK_NODES)
    e = np.asarray(CHECK_EDGES)
    x = (e[:-1, None] + 0.5 * (e[1:] - e[:-1])[:, None] * (s[None, :] + 1.0)).ravel()
    return e, s, x


def _mesh_derivative(values: np.ndarray, k: int) -> np.ndarray:
    leg = np.polynomial.legendre
    e, s, _ = _check_mesh()
    m = s.size
    V = leg.legvander(s, m - 1)
    out = []
    for p in range(e.size - 1):
        c = np.linalg.solve(V, values[p * m : (p + 1) * m])
        c = leg.legder(c, k) if k else c
        out.append(leg.legval(s, c) * (2.0 / (e[p + 1] - e[p])) ** k)
    return np.concatenate(out)


def _check_residual(res: np.ndarray, buffer: int) -> float:
    local = np.tile(np.arange(CHECK_NODES), len(CHECK_EDGES) - 1)
    keep = (local >= buffer) & (local < CHECK_NODES - buffer)
    return float(np.max(np.abs(res[keep])))


def ode_residual_S(ell: int, f: GridFn, buffer: int = 2) -> float:
    """Sup-norm of ``g^(2ℓ) - f^(2ℓ) - (4ℓ/x) f^(2ℓ-1)`` with ``g = S_ℓ f``.

    ``g`` is computed on the working grid of ``f``; both functions are then
    resampled on the check mesh of [1/4, 3/4] and differentiated panelwise.
    The sup runs over check nodes at least ``buffer`` nodes from a panel edge.
    """
    if ell < 1 or 2 * ell > 4:
        raise ValueError("derivative order 2*ell must be between 2 and 4")
    g = apply(OpTag("S", ell), f)
    _, _, x = _check_mesh()
    fv, gv = f(x), g(x)
    k = 2 * ell
    res = _mesh_derivative(gv, k) - _mesh_derivative(fv, k) - 4 * ell / x * _mesh_derivative(fv, k - 1)
    return _check_residual(res, buffer)


def ode_residual_Sadj(ell: int, f: GridFn, buffer: int = 2) -> float:
    """Sup-norm of ``g''' + (4/x) g'' - f'''`` with ``g = S*_1 f`` (``ell = 1`` only).

    Sampled on the same check mesh as :func:`ode_residual_S`.
    """
    if ell != 1:
        raise ValueError("the adjoint relation is checked for ell = 1 only")
    g = apply(OpTag("S_adj", 1), f)
    _, _, x = _check_mesh()
    fv, gv = f(x), g(x)
    res = _mesh_derivative(gv, 3) + 4.0 / x * _mesh_derivative(gv, 2) - _mesh_derivative(fv, 3)
    return _check_residual(res, buffer)


# ---------------------------------------------------------------------------
# identity suite
# ---------------------------------------------------------------------------


def _random_smooth(grid: Grid, rng: np.random.Generator) -> GridFn:
    a = rng.normal(size=5)
    b = rng.uniform(0, 2 * np.pi, size=5)
    k = np.arange(5)
    return grid.function(lambda x: np.cos(np.pi * np.multiply.outer(x, k) + b) @ a)


def identity_suite(grid: Grid | None = None, ell_max: int = 3, samples: int = 10, seed: int = 0) -> dict:
    """Run the operator identities and return ``{name: (worst value, tolerance)}``.

    Checked for ``1 <= ell <= ell_max`` (the trigonometric transfer and the
    index reduction start at ``ell = 1``; ``T_0`` is the identity):

    * ``adjoint``: ``<S_l f, g> = <f, S*_l g>``
    * ``range``: ``<x^(2l), S_l f> = 0``
    * ``commute``: ``S_l S_m f = S_m S_l f``
    * ``kernel_T_adj``: ``T*_l x^(2k) = 0`` for ``1 <= k <= l``
    * ``index_reduction``: ``Phi_l(z .) = -S*_l [Phi_(l-1)(z .)]``
    * ``trig_cos``, ``trig_sin``: ``∫(2 Phi_l(z t) - 1) f = ∫ cos(2zt) T_l f`` and
      ``∫ Psi_l(z t) f = -1/2 ∫ sin(2zt) T_l f``
    * ``inverse_A``, ``inverse_B``: ``A_l S_l f = f`` and ``B_l T_l f = f``
    * ``t2_paths``: explicit ``T_2`` against the composition (L² norm; at the
      first nodes, ``x ~ 1e-9``, the term ``24 x³ ∫ f/t⁴`` cancels to about
      ``1e-9`` absolute)

    Values are absolute; norms are L² norms on the grid.
    """
    from .funcspace import default_grid, inner, norm
    from .special import bessel_zeros, phi_psi

    grid = grid or default_grid()
    rng = np.random.default_rng(seed)
    x = grid.nodes
    fs = [_random_smooth(grid, rng) for _ in range(samples)]
    gs = [_random_smooth(grid, rng) for _ in range(samples)]
    worst = {k: 0.0 for k in (
        "adjoint", "range", "commute", "kernel_T_adj", "index_reduction",
        "trig_cos", "trig_sin", "inverse_A", "inverse_B", "t2_paths")}

    def up(name, v):
        worst[name] = max(worst[name], float(abs(v)))

    for ell in range(1, ell_max + 1):
        for f, g in zip(fs, gs):
            Sf = apply(("S", ell), f)
            up("adjoint", inner(Sf, g) - inner(f, apply(("S_adj", ell), g)))
            up("range", inner(grid.function(lambda t: t ** (2 * ell)), Sf))
            up("inverse_A", norm(apply(("InvA", ell), Sf) - f))
            up("inverse_B", norm(apply(("B", ell), apply(("T", ell), f)) - f))
            for m in range(1, ell_max + 1):
                up("commute", norm(apply(("S", ell), apply(("S", m), f)) - apply(("S", m), Sf)))
            Tf = apply(("T", ell), f)
            for z in (2.0, 7.3):
                Phi, Psi = phi_psi(ell, z * x)
                up("trig_cos", inner(GridFn(grid, 2 * Phi - 1), f) - inner(grid.function(lambda t: np.cos(2 * z * t)), Tf))
                up("trig_sin", inner(GridFn(grid, Psi), f) + 0.5 * inner(grid.function(lambda t: np.sin(2 * z * t)), Tf))
        for k in range(1, ell + 1):
            up("kernel_T_adj", norm(apply(("T_adj", ell), grid.function(lambda t: t ** (2 * k)))))
        for z in (1.0, 5.0, float(bessel_zeros(ell, 3)[2])):
            lhs = GridFn(grid, phi_psi(ell, z * x)[0])
            rhs = -apply(("S_adj", ell), GridFn(grid, phi_psi(ell - 1, z * x)[0]))
            up("index_reduction", np.max(np.abs((lhs - rhs).values)))
    for f in fs:
        up("t2_paths", norm(t2_explicit(f) - apply(("T", 2), f)))
    tol = {"adjoint": 1e-10, "range": 1e-10, "commute": 1e-9, "kernel_T_adj": 1e-9,
           "index_reduction": 1e-9, "trig_cos": 1e-9, "trig_sin": 1e-9,
           "inverse_A": 1e-9, "inverse_B": 1e-8, "t2_paths": 1e-9}
    return {k: (worst[k], tol[k]) for k in worst}
