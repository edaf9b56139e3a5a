"""Numerical verification of the qualitative solution properties.

Runs the four verification harnesses on concrete instances: strong
positivity with instantaneous nonlocal spread, orderings in the data and in
the potential, the sup-norm bound with its integrability threshold, and the
stability estimate's linear response to each perturbation channel.
"""

import numpy as np

from tfcauchy import (Domain1D, ProblemSpec, SeparableSource, abp_constant_study,
                      abp_threshold, bernstein, build_operator, check_abp,
                      check_comparison, check_decay, check_positivity,
                      check_stability, eigensystem, solve)

dom = Domain1D(0.0, 1.0, 160)
psi = bernstein.fractional(1.0)
es = eigensystem(build_operator(dom, psi, 0.0))
times = np.linspace(0.0, 1.0, 33)
x = dom.x


def bump(center, width, height=1.0):
    r = (x - center) / width
    return height * np.where(np.abs(r) < 1,
                             np.exp(1 - 1 / np.maximum(1 - r ** 2, 1e-300)), 0.0)


# 1. strong positivity: datum on the left tenth, mass appears everywhere
phi0 = bump(0.05, 0.05)
spec = ProblemSpec(dom, psi, 0.0, phi0, None, 0.5, 1.0)
fld = solve(spec, es, times)
rep = check_positivity(fld, spec, strict_interior=True)
print("positivity:", "pass" if rep.passed else "FAIL",
      f"(interior minimum {rep.details['strict_margin']:.3e} at t >= {rep.tolerances['t_min']})")
print("  datum support [0, 0.1]; phi(T, 0.9) =",
      f"{fld.values[-1, int(np.argmin(np.abs(x - 0.9)))]:.3e}  (nonlocal spread)")

# 2. comparisons
base = bump(0.5, 0.3)
s_hi = ProblemSpec(dom, psi, 0.0, base + 0.1, None, 0.5, 1.0)
s_lo = ProblemSpec(dom, psi, 0.0, base, None, 0.5, 1.0)
rep = check_comparison(s_hi, s_lo, solve(s_hi, es, times), solve(s_lo, es, times),
                       mode="data", tol=1e-9)
print("comparison (datum):", "pass" if rep.passed else "FAIL",
      f"worst gap {rep.details['worst_gap']:.2e}")
V1 = np.ones(dom.n_grid)
es_v = eigensystem(build_operator(dom, psi, V1))
s_v = ProblemSpec(dom, psi, V1, base, None, 0.5, 1.0)
rep = check_comparison(s_v, s_lo, solve(s_v, es_v, times), solve(s_lo, es, times),
                       mode="potential", tol=1e-9)
print("comparison (potential):", "pass" if rep.passed else "FAIL",
      f"worst gap {rep.details['worst_gap']:.2e}")

# 3. sup-norm bound: threshold, pure-datum case, empirical constants
print("\nsup-norm bound exponent threshold p >", abp_threshold(psi, 0.5))
rep = check_abp(s_lo, solve(s_lo, es, times), 4.0)
print("F = 0 case: max phi =", f"{rep.witness['lhs']:.6f}",
      "<= sup phi0 =", f"{rep.witness['phi0_sup']:.6f}")
zero = np.zeros(dom.n_grid)


def draw(rg):
    r2 = bump(rg.uniform(0.2, 0.8), rg.uniform(0.05, 0.3), rg.uniform(0.5, 2.0))
    a, b = rg.uniform(0.5, 2.0), rg.uniform(0.0, 1.0)
    return ProblemSpec(dom, psi, 0.0, zero,
                       SeparableSource(lambda t, aa=a, bb=b: aa * (1 + bb * t), r2),
                       0.5, 1.0)


study = abp_constant_study(draw, es, times, p=4.0, n_instances=25, seed=3,
                           n_duhamel=32)
print("empirical constant over 25 random sources: max =",
      f"{study['max']:.4f}", " min =", f"{min(study['constants']):.4f}")

# 4. stability: linear response in each channel
print("\nstability response (deviation per unit perturbation):")
r2 = bump(0.45, 0.2)
s_base = ProblemSpec(dom, psi, zero, base, SeparableSource(lambda t: 1.0, r2),
                     0.5, 1.0)
f_base = solve(s_base, es, times)
for channel in ("potential", "datum", "source"):
    slopes = []
    for e in (1e-1, 1e-2, 1e-3):
        V2, phi2, F2, es2 = s_base.V, base, s_base.F, es
        if channel == "potential":
            V2 = s_base.V + e
            es2 = eigensystem(build_operator(dom, psi, V2))
        elif channel == "datum":
            phi2 = base * (1.0 + e)
        else:
            F2 = SeparableSource(lambda t, s=e: 1.0 + s, r2)
        s2 = ProblemSpec(dom, psi, V2, phi2, F2, 0.5, 1.0)
        rep = check_stability(s_base, s2, f_base, solve(s2, es2, times))
        slopes.append(rep.witness["lhs"] / e)
    print(f"  {channel:10s}: LHS/eps = " + "  ".join(f"{s:.4f}" for s in slopes))

# 5. decay
spec0 = ProblemSpec(dom, psi, 0.0, base, None, 0.5, 4.0)
rep = check_decay(solve(spec0, es, np.linspace(0, 4, 65)), es, 0.5)
print("\ndecay:", "pass" if rep.passed else "FAIL",
      f"(max/median of (1+lam_1 t^a)|phi| = {rep.details['ratio']:.2f})")
