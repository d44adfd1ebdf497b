"""Acceptance criteria 1-10 at their stated tolerances.

Each test records a single PASS/FAIL line (shown in the terminal summary)
and then asserts it. Run alone with ``pytest tests/test_acceptance.py -v``.
"""

import math
import subprocess
import sys
import warnings

import numpy as np
import pytest
from scipy import stats

from conftest import record_acceptance
from isacnet.comm import rc_approx, rc_exact
from isacnet.montecarlo import (mc_comm_rate, mc_sense_rate, sample_beam_gain, sample_interferer_gain,
                                sample_zf_gain)
from isacnet.network import DEFAULTS, Allocation, validate_allocation
from isacnet.region import boundary_sweep, comm_corner, optimal_user_load, sense_corner, time_share_bound
from isacnet.sensing import rs_cluster, rs_q1, sense_laplace_conditional, ts_alpha_eq_2beta

pytestmark = pytest.mark.acceptance

COMM_GRID = [(k, l) for k in range(1, 9) for l in (1, 2, 3)
             if validate_allocation(DEFAULTS, Allocation(k, l, 1, 1))]


def test_criterion_01_exact_rate_matches_simulation():
    bad = []
    for k, l in COMM_GRID:
        a = Allocation(k, l, 1, 1)
        ex = rc_exact(DEFAULTS, a).rate_nats
        mc = mc_comm_rate(DEFAULTS, a, n=20000, seed=100 + 10 * k + l)
        if not (abs(ex / mc.mean - 1) <= 0.05 or abs(ex - mc.mean) <= mc.half_width_95):
            bad.append(f"K={k} L={l}: exact {ex:.4f} vs MC {mc.mean:.4f}±{mc.half_width_95:.4f}")
    ok = record_acceptance(1, not bad, f"{len(COMM_GRID) - len(bad)}/{len(COMM_GRID)} allocations within 5% "
                           f"or CI {'; '.join(bad)}")
    assert ok


def test_criterion_02_misr_approximation_tightness():
    worst_any, worst_l1, bad = 0.0, 0.0, []
    for k, l in COMM_GRID:
        ex = rc_exact(DEFAULTS, Allocation(k, l, 1, 1)).rate_nats
        gap = abs(rc_approx(DEFAULTS, k, l, 1, 1).rate_nats / ex - 1)
        worst_any = max(worst_any, gap)
        if l == 1:
            worst_l1 = max(worst_l1, gap)
        if gap > (0.05 if l == 1 else 0.10):
            bad.append(f"K={k} L={l} {100 * gap:.1f}%")
    ok = record_acceptance(2, not bad, f"worst gap {100 * worst_any:.1f}% (L=1: {100 * worst_l1:.1f}%); "
                           f"over limit: {', '.join(bad) or 'none'}")
    assert ok


def test_criterion_03_hole_correction():
    # at beta = 2 the radial-quadrature form of the conditional transform must agree with the closed form
    for z, r in [(0.3, 0.2), (1.0, 0.5), (5.0, 1.1)]:
        assert sense_laplace_conditional(z, r, DEFAULTS, 1, form="direct") == pytest.approx(
            sense_laplace_conditional(z, r, DEFAULTS, 1), rel=1e-6)
    parts, ok = [], True
    for beta in (2.5, 2.0):
        for dt in (1.0, 10.0):
            cfg = DEFAULTS.replace(beta=beta, delta_t=dt)
            mc = mc_sense_rate(cfg, Allocation(1, 1, 1, 1), n=20000, seed=int(10 * beta + dt))
            under = 1 - rs_q1(cfg, hole_corrected=False).rate_nats / mc.mean
            err = rs_q1(cfg).rate_nats / mc.mean - 1
            ok &= 0.08 <= under <= 0.25 and abs(err) <= 0.05
            parts.append(f"beta={beta:g} dT={dt:g}: baseline -{100 * under:.1f}%, corrected {100 * err:+.2f}%")
    assert record_acceptance(3, ok, "; ".join(parts))


def test_criterion_04_optimal_user_load():
    v = optimal_user_load(1, 4.0)
    ok, parts = 0.5 <= v <= 0.7, [f"v*={v:.4f}"]
    for m_t in (10, 20):
        c = DEFAULTS.replace(m_t=m_t)
        target = round(v * (m_t + 1))
        for name, fn in (("exact", lambda k: rc_exact(c, Allocation(k, 1, 1, 1)).ase),
                         ("approx", lambda k: rc_approx(c, k, 1, 1, 1).ase)):
            k_best = 1 + int(np.argmax([fn(k) for k in range(1, m_t + 1)]))
            ok &= abs(k_best - target) <= 1
            parts.append(f"m_t={m_t} {name} argmax K={k_best} (target {target})")
    assert record_acceptance(4, ok, "; ".join(parts))


def test_criterion_05_single_bs_cluster_optimal():
    ok, parts = True, []
    for m_t in (10, 20):
        c = DEFAULTS.replace(m_t=m_t)
        for name, fn in (("exact", lambda k, l: rc_exact(c, Allocation(k, l, 1, 1)).ase),
                         ("approx", lambda k, l: rc_approx(c, k, l, 1, 1).ase)):
            best = [max(fn(k, l) for k in range(1, m_t // l + 1)) for l in range(1, 6)]
            l_star = 1 + int(np.argmax(best))
            ok &= l_star == 1
            parts.append(f"m_t={m_t} {name}: L*={l_star}")
    assert record_acceptance(5, ok, "; ".join(parts))


def test_criterion_06_sensing_cluster_benefit():
    c = DEFAULTS.replace(m_r=40)
    qs = list(range(1, c.m_t + 1))
    ase = []
    for q in qs:
        j = c.j_max if q == 1 else min(c.j_max, (c.m_t - 1) // (q - 1))
        ase.append(rs_q1(c, j=j).ase if q == 1 else rs_cluster(c, 1, j, q).ase)
    ase = np.array(ase)
    best = int(np.argmax(ase))
    unimodal = bool(np.all(np.diff(ase[:best + 1]) > 0) and np.all(np.diff(ase[best:]) < 0))
    ratio = ase[best] / ase[0]
    ok = unimodal and 0 < best < len(qs) - 1 and qs[best] >= 2 and ratio >= 1.5
    detail = (f"Q*={qs[best]}, max/Q=1 ratio {ratio:.3f}, unimodal={unimodal}; "
              f"ASE(Q)={np.array2string(ase, precision=2, max_line_width=400)}")
    assert record_acceptance(6, ok, detail)


@pytest.fixture(scope="module")
def frontiers():
    out = {}
    for m_t in (10, 20):
        c = DEFAULTS.replace(m_t=m_t)
        out[m_t] = (boundary_sweep(c), comm_corner(c), sense_corner(c))
    return out


def test_criterion_07_region_dominates_time_sharing(frontiers):
    ok, parts = True, []
    for m_t, (b, cc, sc) in frontiers.items():
        seg = time_share_bound(cc, sc, 41)
        margins = [b.sense_at(p.comm_ase) / p.sense_ase - 1 for p in seg.points]
        mid = seg.points[len(seg.points) // 2]
        mid_margin = b.sense_at(mid.comm_ase) / mid.sense_ase - 1
        dominated = min(margins) >= -1e-9
        ok &= dominated and mid_margin >= 0.20
        parts.append(f"m_t={m_t}: worst margin {100 * min(margins):+.1f}%, midpoint {100 * mid_margin:+.1f}%")
    assert record_acceptance(7, ok, "; ".join(parts))


def test_criterion_08_gain_distributions():
    n = 1_000_000
    p_zf = stats.kstest(sample_zf_gain(20, 4 * 2 + 1 * (2 - 1), n, seed=8), stats.gamma(12).cdf).pvalue
    p_int = {k: stats.kstest(sample_interferer_gain(20, k, n, seed=80 + k), stats.gamma(k).cdf).pvalue
             for k in (1, 4)}
    beam = float(np.mean(sample_beam_gain(20, 3, n, seed=83)))
    ok = p_zf > 0.01 and all(p > 0.01 for p in p_int.values()) and abs(beam / 3 - 1) <= 0.01
    detail = (f"ZF Gamma(12) KS p={p_zf:.3f}; interferer KS p=" +
              ", ".join(f"K={k}:{p:.3f}" for k, p in p_int.items()) + f"; E[h^t]/K={beam / 3:.4f}")
    assert record_acceptance(8, ok, detail)


def test_criterion_09_density_scaling():
    a = Allocation(4, 2, 1, 1)
    base_c = rc_exact(DEFAULTS, a)
    base_s = rs_q1(DEFAULTS)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        base_t = ts_alpha_eq_2beta(DEFAULTS, form="derived")
    ok, worst = True, 0.0
    for lam in (0.5, 1.0, 2.0):
        c = DEFAULTS.replace(lambda_b=lam)
        rc = rc_exact(c, a)
        ok &= math.isclose(rc.rate_nats, base_c.rate_nats, rel_tol=1e-9)
        ok &= math.isclose(rc.ase, lam * base_c.ase, rel_tol=1e-9)
        for s, ref in ((rs_q1(c).ase, base_s.ase), (ts_alpha_eq_2beta(c, form="derived").ase, base_t.ase)):
            worst = max(worst, abs(s / (lam * ref) - 1))
    ok &= worst <= 0.01
    assert record_acceptance(9, ok, f"R_c invariant and ASE_c linear; sensing ASE linearity error "
                                    f"{100 * worst:.2e}%")


def test_criterion_10_cli_determinism(tmp_path):
    outs = []
    for run, jobs in enumerate((1, 8, 1, 8)):
        for target in ("comm", "sense"):
            f = tmp_path / f"{target}_{run}.csv"
            cmd = [sys.executable, "-m", "isacnet", "validate", target, "--k", "1:2:1", "--n", "400",
                   "--seed", "17", "--jobs", str(jobs), "--out", str(f)]
            subprocess.run(cmd, check=True, capture_output=True)
            outs.append((target, f.read_bytes()))
    same = all(b == next(o for t2, o in outs if t2 == t) for t, b in outs)
    assert record_acceptance(10, same, f"{len(outs)} CSVs from --jobs 1 and 8, two runs each: "
                                       f"{'byte-identical' if same else 'differ'}")


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-v"]))
