"""Tour of the Runge-Kutta growth-factor engine.

Each Fourier mode of the coupled nonlocal system is a 2x2 oscillator with
parameter nu; one RK step amplifies it by psi(tau, nu), computable in closed
form from the Butcher tableau.  This script reproduces the headline numbers:
the classical 4-stage method is strongly stable exactly up to tau^2 nu = 8,
the weighted Euler family flips behaviour at delta = 1/2, and forward Euler
never touches the imaginary axis.
"""

import numpy as np

import nonlocalwave as nlw

for name in ("forward-euler", "backward-euler", "crank-nicolson", "rk4"):
    tab = nlw.load_tableau(name)
    rep = nlw.classify(tab)
    print(f"{name:16s} tr(G^2)={rep.tr_g2:+.4f}  tr((G-ew^T)^2)={rep.tr_gewt2:+.4f}"
          f"  {rep.classification.value:6s}  imaginary-axis extent {rep.imag_extent}")

print()
print("rk4 growth factor along z = tau^2 nu (boundary exactly at 8):")
for z in (0.0, 2.0, 6.0, 7.99, 8.0, 8.01, 10.0):
    print(f"  z={z:5.2f}  psi={nlw.growth_factor_z(nlw.rk4(), z):.12f}")

print()
print("weighted Euler: unconditional strong stability iff delta >= 1/2")
for delta in (0.3, 0.5, 0.7):
    psis = [nlw.growth_factor_z(nlw.weighted_euler(delta), z)
            for z in np.geomspace(0.01, 100, 7)]
    print(f"  delta={delta}: sup psi on sample = {max(psis):.6f}")

print()
h = 2 * np.pi / 128
tau_max = nlw.cfl_threshold(nlw.rk4(), c=3.0, sigma=1.0, h=h)
print(f"square-root step law for rk4 at c=3, sigma=1, h=2pi/128: tau <= {tau_max:.4f}")
print("matrix oracle at that point:",
      np.linalg.norm(nlw.brute_force_growth(nlw.rk4(), tau_max, 3.0 * 64), 2))
