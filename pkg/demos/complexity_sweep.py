"""Accuracy sweep: fitted slopes of planted and measured iteration counts on a log-log scale."""

from hardchains.harness import ExperimentConfig, complexity_sweep

runs = [
    ("convex, GD", ExperimentConfig(epsilon_grid=(0.04, 0.02, 0.01, 0.005), budget=10**6)),
    ("convex, prox-AGD", ExperimentConfig(epsilon_grid=(0.04, 0.02, 0.01, 0.005), algorithm="prox-agd")),
    # unit constants: every accuracy here falls back to the convex plan
    ("p=2, L=(1,1)", ExperimentConfig(family="nonconvex-p2", p=2, lipschitz=(1.0, 1.0),
                                      epsilon_grid=(0.05, 0.025, 0.0125, 0.00625), budget=10**6)),
]
for label, config in runs:
    rows, fits = complexity_sweep(config)
    print(label)
    for row in rows:
        print(f"  eps={row['eps']:<7g} plan={row['instance_family']:<14} T_plan={row['T_plan']:<6}"
              f" T_measured={row['T_measured']}{' (budget hit)' if row['exhausted'] else ''}")
    for name, fit in fits.items():
        print(f"  {name} slope {fit['slope']:.3f}")
