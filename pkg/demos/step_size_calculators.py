"""Advisory step-size and transient-time calculators.

The fixed-step cap (non-convex regime) and the schedule offset floor (PL
regime) evaluate every term of their min/max expressions; terms that a
parameter switches off (lam = 0, rho = 0) drop out as +inf or 0. Transient
times report how many iterations the network terms need to fall behind the
centralized leading term, with hidden constants dropped.
"""

from gtsim import algorithms as alg, metrics

print("fixed-step cap, fully connected network (lam = 0), plain noise:")
res = alg.nonconvex_step_cap(n=9, T=10**6, L=1.0, lam=0.0, sigma_sq=1.0,
                             sigma_max_sq=1.0, d=1)
for name, val in res.terms.items():
    print(f"  {name:>16}: {val:.6g}")
print(f"  cap C = {res.cap:.6g}; recommended alpha = min(sqrt(n/T), C) = {res.alpha:.6g}")

print("\nsame problem on a poorly connected network (lam = 0.95):")
res = alg.nonconvex_step_cap(n=9, T=10**6, L=1.0, lam=0.95, sigma_sq=1.0,
                             sigma_max_sq=1.0, d=1)
binding = min(res.terms, key=res.terms.get)
print(f"  cap C = {res.cap:.3g}, binding term: {binding}")

print("\nschedule offset floor for alpha_t = a/(mu (t + t0)), a = 6:")
res = alg.pl_t0_floor(n=1, lam=0.0, a=6.0, L=1.0, mu=1.0, sigma_sq=1.0, sigma_max_sq=1.0)
top = sorted(res.terms.items(), key=lambda kv: -kv[1])[:3]
for name, val in top:
    print(f"  {name:>18}: {val:.6g}")
print(f"  t0 floor = {res.t0:.6g} (conservative by design; experiments may override)")

print("\ntransient times (network-effect horizon, constants dropped):")
for n in (2, 10, 50):
    for lam in (0.0, 0.9):
        nc = metrics.transient_time_nonconvex(n, lam)
        pl = metrics.transient_time_pl(n, lam, a=6.0)
        print(f"  n={n:>2} lam={lam:.1f}: non-convex {nc:.3g}, PL(a=6) {pl:.3g}")
