"""Sensing-communication tradeoff at a small antenna count.

    python3 demos/tradeoff_region.py [m_t]

Prints the swept frontier, the time-sharing segment between the two corners
and the weighted-sum optimum for a few weights. Takes about half a minute
at m_t = 10.
"""

import sys

from isacnet import DEFAULTS, boundary_sweep, comm_corner, sense_corner, solve_p1, time_share_bound

m_t = int(sys.argv[1]) if len(sys.argv) > 1 else 10
cfg = DEFAULTS.replace(m_t=m_t)
frontier = boundary_sweep(cfg)
cc, sc = comm_corner(cfg), sense_corner(cfg)

print(f"frontier, m_t={m_t} (ASE in nats/s/Hz/km^2)")
for p in frontier.points:
    a = p.alloc
    print(f"  comm {p.comm_ase:7.3f}  sense {p.sense_ase:7.3f}  K={a.k} L={a.l} J={a.j} Q={a.q}")

print("\ntime sharing between the corners vs best single allocation")
for p in time_share_bound(cc, sc, 5).points:
    best = frontier.sense_at(p.comm_ase)
    print(f"  comm {p.comm_ase:7.3f}  shared {p.sense_ase:7.3f}  swept {best:7.3f}  "
          f"margin {100 * (best / p.sense_ase - 1):+6.1f}%")

print("\nweighted sum")
for rho in (0.0, 0.25, 0.5, 0.75, 1.0):
    r = solve_p1(cfg, rho, boundary=frontier)
    print(f"  rho={rho:4.2f}  T={r.t_ase:7.3f}  at {r.best_point.alloc}")
