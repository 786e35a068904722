"""The (0, 2) uniqueness argument in numbers.

1. The fourth-order equation has a one-dimensional even solution space,
   spanned by the derivative of an explicit odd function zeta.
2. Plugging zeta back into the transformed equation leaves the value 90 at
   x = 1/2 instead of 0, so zeta cannot come from a kernel element.
3. The even solution y0 of the companion equation produces three integrals
   which force the free constant K to vanish.

    python3 demos/03_obstruction_and_appendix.py
"""
from ispec.funcspace import inner, norm
from ispec.uniq import appendix_a_pipeline, obstruction_value, ode01_shoot, ode02_even_space, zeta_explicit

_, defect = ode01_shoot()
print(f"(0,1): the regular solution is far from even, defect {defect:.3f}")

space = ode02_even_space()
y, ref = space.basis[0], zeta_explicit(1.0).derivative
match = norm(inner(y, ref) / inner(y, y) * y - ref) / norm(ref)
print(f"(0,2): even solution space dimension {space.dimension}, singular values {space.singular_values}")
print(f"       relative L2 distance to zeta' after scaling: {match:.1e}")

for A in (1.0, -2.0):
    direct, numeric = obstruction_value(A)
    print(f"obstruction at x = 1/2 for A = {A:+.0f}: {direct:.6f} (formula), {numeric:.6f} (via T_2)")

r = appendix_a_pipeline()
print("\neven solution of the companion equation:")
print(f"  ∫ f0 cos(2 pi x)     = {r.integral_cos:.6f}")
print(f"  ∫_0^1/2 t f0         = {r.integral_t:.7f}")
print(f"  ∫_0^1/2 t³ f0        = {r.integral_t3:.4e}")
print(f"  b/K = {r.b_over_K:.4f},  c/K = {r.c_over_K:.3f}")
print(f"  closing equation: K * {r.system_coefficient:.4f} = 0  ->  K forced to zero: {r.K_forced_zero}")
