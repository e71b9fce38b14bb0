# %% [markdown]
# # Energy window and the recovery gap
#
# Two diagnostics that stay meaningful as eps and tau change: the integral of
# |u_t|^2 + |u|^p over (tau, T - 2 tau), and the gap between the discrete
# functional of a backward-mean sequence and a fine quadrature of the
# continuous functional.

# %%
import numpy as np

from wedreg import convergence_study, make_problem, power, recovery_gap, scalar_domain

prob = make_problem(scalar_domain(), power(4), [1.0], [0.0], 3.0, 600, 0.4)
eps_list = [0.4, 0.2, 0.1, 0.05, 0.025, 0.0125]
energies = np.array([r.energy_value for r in convergence_study(prob, eps_list)])
for eps, e in zip(eps_list, energies):
    print(f"eps={eps:<7g} energy={e:.4f}")
print("max/min:", energies.max() / energies.min())

# %% [markdown]
# The values climb toward the limit's window energy. For the oscillator
# u'^2 + u^4 = 1 along the exact solution, so the limit value is T - 3 tau.

# %%
print("limit value:", 3.0 - 3 * prob.tau)

# %% [markdown]
# Recovery gap for u_ref = cos t (zero initial slope, so the sequence stays
# bounded). The gap is negative and shrinks at first order in tau.

# %%
gaps = []
for n in (100, 200, 400, 800):
    p = make_problem(scalar_domain(), power(4), [1.0], [0.0], 3.0, n, 0.2)
    gaps.append(recovery_gap(lambda t: np.cos(t)[:, None], p, u_tt=lambda t: -np.cos(t)[:, None]))
gaps = np.array(gaps)
print("gaps:", gaps)
print("orders:", np.log2(np.abs(gaps[:-1] / gaps[1:])))
