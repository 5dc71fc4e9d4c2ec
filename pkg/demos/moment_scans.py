"""Diagonal-weight remainder versus spectral scale, and the main-term size versus T."""
from kzlab.afe import MainTermConfig, diagonal_weight, l_central_gl2, main_term_integral
from kzlab.hecke import hecke_eigenvalues_holomorphic
from kzlab.spectral import TestFunctionSpec

g = hecke_eigenvalues_holomorphic(16, 2**17)
L1g = l_central_gl2(g, 1).value.real
print(f"L(1, g) = {L1g:.12f}")

print("relative remainder |D - M|/|M| along mu = t (i, -0.4i, -0.6i):")
for t in (5, 10, 20, 40):
    d = diagonal_weight((1j * t, -0.4j * t, -0.6j * t), 16, g, L1g=L1g)
    print(f"  t = {t:3d}  D = {d.value.real:+.6e}  rel {abs(d.remainder) / abs(d.prediction):.3f}")

print("main-term integral I(T) / (T^3 R^2):")
for T in (10, 20, 40):
    r = main_term_integral(MainTermConfig(TestFunctionSpec(float(T)), L1g=L1g))
    print(f"  T = {T:3d}  |I| = {abs(r.value):.6e}  ratio {r.per_T_ratio:.3e}")
