"""Analytic rates next to quick Monte Carlo estimates.

    python3 demos/rate_check.py [n_realizations]
"""

import sys

from isacnet import DEFAULTS, Allocation, mc_comm_rate, mc_sense_rate, rc_approx, rc_exact, rs_cluster, rs_q1

n = int(sys.argv[1]) if len(sys.argv) > 1 else 3000

print("user rate (nats/s/Hz), defaults")
print(f"{'K':>3} {'L':>2} {'exact':>8} {'approx':>8} {'MC':>8} {'±95%':>7}")
for k, l in [(1, 1), (4, 1), (4, 2), (8, 2)]:
    a = Allocation(k, l)
    mc = mc_comm_rate(DEFAULTS, a, n=n, seed=1)
    print(f"{k:>3} {l:>2} {rc_exact(DEFAULTS, a).rate_nats:8.4f} {rc_approx(DEFAULTS, k, l, 1, 1).rate_nats:8.4f} "
          f"{mc.mean:8.4f} {mc.half_width_95:7.4f}")

print("\nradar information rate (nats/s/Hz), K = 1")
print(f"{'beta':>5} {'dT':>4} {'Q':>2} {'analytic':>9} {'no hole':>8} {'MC':>8} {'±95%':>7}")
for beta, dt, q in [(2.0, 1.0, 1), (2.5, 1.0, 1), (2.5, 10.0, 1), (2.0, 1.0, 3)]:
    cfg = DEFAULTS.replace(beta=beta, delta_t=dt)
    if q == 1:
        an, base = rs_q1(cfg).rate_nats, f"{rs_q1(cfg, hole_corrected=False).rate_nats:8.4f}"
    else:
        an, base = rs_cluster(cfg, 1, 1, q).rate_nats, f"{'-':>8}"
    mc = mc_sense_rate(cfg, Allocation(1, 1, 1, q), n=n, seed=2)
    print(f"{beta:5.1f} {dt:4.0f} {q:>2} {an:9.4f} {base} {mc.mean:8.4f} {mc.half_width_95:7.4f}")
