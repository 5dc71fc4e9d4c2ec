"""AFE weights V(y) across y, and L(s, g) for the weight 12 and 16 cusp forms."""
import numpy as np

from kzlab.afe import afe_weight, l_central_gl2, weight_limit
from kzlab.hecke import hecke_eigenvalues_holomorphic

mu = (0.0, 20j, -20j)
print("V(y) at mu = (0, 20i, -20i):")
print(f"  small-y limit {weight_limit('V', mu)}")
for y in np.logspace(-4, 4, 9):
    r = afe_weight("V", y, mu)
    print(f"  y = {y:9.1e}  V = {r.value.real:+.6e}{r.value.imag:+.6e}j  err {r.self_error:.1e}")

for k, s in [(12, 0.5), (16, 0.5), (16, 1.0)]:
    g = hecke_eigenvalues_holomorphic(k, 2**17)
    L = l_central_gl2(g, s)
    print(f"L({s}, Delta_{k}) = {L.value.real:.12f}  FE residual {L.fe_residual:.1e}  terms {L.terms}")
