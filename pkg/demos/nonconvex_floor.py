"""Numerical search for the smallest gradient of the nonconvex chain before its last two coordinates move."""

from hardchains.verifiers import disc_tight_constant, disc_tight_point, nonconvex_grad_floor_search

T = 50
print(f"T={T}: floor search versus the explicit construction, both reported as multiples of mu^(3/4)")
for r in (1.0, 10.0):
    print(f"  r={r:g}, upper constant {disc_tight_constant(r):.1f}, lower constant 0.25")
    for mu in (0.25, 0.04, 0.01):
        rep = nonconvex_grad_floor_search(T, mu, r, restarts=2)
        _, explicit = disc_tight_point(T, mu, r)
        s = mu**0.75
        print(f"    mu={mu:<5} search {rep.measured / s:6.3f}  explicit {explicit / s:6.3f}"
              f"  best start {rep.metadata['best_start']}")
