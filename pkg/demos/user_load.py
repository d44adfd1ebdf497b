"""Optimal user load and where the communication ASE peaks.

    python3 demos/user_load.py
"""

import numpy as np

from isacnet import DEFAULTS, optimal_user_load, rc_approx

for l in (1, 2, 3):
    print(f"L={l}: v* = {optimal_user_load(l, DEFAULTS.alpha):.4f}")

v = optimal_user_load(1, DEFAULTS.alpha)
for m_t in (10, 20, 40):
    cfg = DEFAULTS.replace(m_t=m_t)
    ase = [rc_approx(cfg, k, 1, 1, 1).ase for k in range(1, m_t + 1)]
    print(f"m_t={m_t:>2}: ASE peaks at K={1 + int(np.argmax(ase))}, v*(m_t+1) = {v * (m_t + 1):.2f}")
