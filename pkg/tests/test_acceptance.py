"""Acceptance criteria 1-11, each recorded as one pass/fail line in the run summary."""

import json
import math
import sys
import time
from importlib import resources

import mpmath
import numpy as np
import pytest

from conftest import record_criterion
from morsecomb import graded, symspace
from morsecomb.cli import main
from morsecomb.config import config_from_dict, parse_config
from morsecomb.estimates import angle_sweep, bound_f, bound_R0, bound_R1
from morsecomb.flags import Flag, cartan_flag, perturb_flag, transform_flag, xi_angle
from morsecomb.morse import (
    check_morse,
    check_straight_spaced,
    euclidean_counterexample,
    fitted_constants,
    parallel_set_proximity,
    perturbed_flat_sequence,
    random_replacement_trial,
    replace_segment,
)
from morsecomb.pingpong import enumerate_reduced_words, flag_families, word_elements
from morsecomb.samples import schottky_elements
from morsecomb.weyl import FacePattern, ThetaSpec

pytestmark = pytest.mark.slow

FIXTURES = resources.files("morsecomb") / "fixtures"
FULL3 = FacePattern.full(3)


def fixture_path(name):
    return str(FIXTURES / f"{name}.json")


def test_formula_reproduction():
    got = {
        "f(1,4)": (bound_f(1, 4), math.pi / 6),
        "f(1,2)": (bound_f(1, 2), math.pi),
        "R0(1,pi/6)": (bound_R0(1, math.pi / 6), 4.0),
        "R1(1,pi/2)": (bound_R1(1, math.pi / 2), 6.0),
        "R1(1,pi/6)": (bound_R1(1, math.pi / 6), 14.0),
    }
    err = max(abs(a - b) for a, b in got.values())
    assert record_criterion(1, err <= 1e-12, f"closed-form bounds, max error {err:.2e}")


def test_delta_triangle():
    t0 = time.perf_counter()
    rng = np.random.default_rng(2)
    pts = np.array([[symspace.random_point(rng, 3, 2.0) for _ in range(3)] for _ in range(10_000)])
    x, y, z = pts[:, 0], pts[:, 1], pts[:, 2]
    lhs = symspace.delta_distance(x, z)
    rhs = symspace.delta_distance(x, y) + symspace.delta_distance(y, z)
    # d(x,z) is majorized by d(x,y) + d(y,z): partial sums of the descending vectors
    worst = float(np.max(np.cumsum(lhs, axis=1)[:, :-1] - np.cumsum(rhs, axis=1)[:, :-1]))
    elapsed = time.perf_counter() - t0
    ok = worst <= 1e-8 and elapsed < 10.0
    assert record_criterion(2, ok, f"1e4 triples, worst excess {worst:.2e}, {elapsed:.2f} s")


def test_xi_angle_identities():
    rng = np.random.default_rng(3)
    xi = ThetaSpec(0.2, FULL3).xi
    same = opposite = invariance = 0.0
    for _ in range(1000):
        x = symspace.random_point(rng, 3, 1.5)
        a = perturb_flag(Flag.standard(FULL3), 1.0, rng)
        b = perturb_flag(Flag.opposite_standard(FULL3), 1.0, rng)
        g = symspace.random_element(rng, 3, 1.0)
        same = max(same, xi_angle(x, a, a, xi))
        opposite = max(opposite, abs(xi_angle(x, a, cartan_flag(x, a), xi) - math.pi))
        moved = xi_angle(symspace.act(g, x), transform_flag(g, a), transform_flag(g, b), xi)
        invariance = max(invariance, abs(moved - xi_angle(x, a, b, xi)))
    ok = same <= 1e-8 and opposite <= 1e-8 and invariance <= 1e-6
    assert record_criterion(
        3, ok, f"1e3 configs, self {same:.1e}, antipode {opposite:.1e}, invariance {invariance:.1e}"
    )


@pytest.fixture(scope="module")
def schottky_families():
    cfg = parse_config(open(fixture_path("schottky")).read())
    fams = flag_families(cfg.groups, cfg.x, cfg.pattern)
    return cfg, fams


def test_riemannian_angle_bound(schottky_families):
    cfg, (l1, l2) = schottky_families
    reports = angle_sweep(l1, l2, cfg.x, cfg.theta, [10.0, 20.0, 40.0, 80.0], 1000, 4, "ray")
    violations = [r.R for r in reports if not r.riemannian_max <= bound_f(r.D, r.R) + 1e-6]
    detail = ", ".join(f"R={r.R:g}: {r.riemannian_max:.2e}<={bound_f(r.D, r.R):.3f}" for r in reports)
    assert record_criterion(4, not violations, f"D={reports[0].D:.3f}; {detail}")


def test_xi_angle_decay(schottky_families):
    cfg, (l1, l2) = schottky_families
    r_min = 10.0
    lo, hi = angle_sweep(l1, l2, cfg.x, cfg.theta, [r_min, 8 * r_min], 300, 5, "cone")
    ok = hi.measured_max < 0.5 * lo.measured_max
    assert record_criterion(
        5, ok, f"cone max xi-angle {lo.measured_max:.3e} at R={r_min:g}, {hi.measured_max:.3e} at R={8 * r_min:g}"
    )


def _unpowered_config(seed):
    a, b = schottky_elements(seed)
    return {
        "d": 3,
        "theta": {"beta": 0.2, "beta_prime": 0.45},
        "groups": [
            {"name": "A", "generators": [a.tolist()]},
            {"name": "B", "generators": [b.tolist()]},
        ],
        "max_syllables": 6,
        "seed": seed,
    }


@pytest.fixture(scope="module")
def doubling_runs(tmp_path_factory):
    d = tmp_path_factory.mktemp("doubling")
    t0 = time.perf_counter()
    runs = {}
    for seed in (0, 1, 2):
        cfg_path, out = d / f"cfg{seed}.json", d / f"rep{seed}.json"
        cfg_path.write_text(json.dumps(_unpowered_config(seed)))
        code = main(["schottky", "--config", str(cfg_path), "--out", str(out), "--max-power", "32"])
        runs[seed] = (code, json.loads(out.read_text()))
    dup = d / "dup.json"
    dup_code = main(["certify", "--config", fixture_path("duplicated"), "--out", str(dup)])
    return runs, dup_code, time.perf_counter() - t0


def test_schottky_doubling_end_to_end(doubling_runs):
    runs, dup_code, elapsed = doubling_runs
    parts, ok = [], True
    for seed, (code, rep) in runs.items():
        n = rep["attempts"][-1]["power"]
        c = rep["freeness"]["qi_constants"]["c"]
        good = code == 0 and n <= 32 and rep["freeness"]["free_up_to"] == 6 and rep["freeness"]["pass"] and c > 0
        ok &= good
        parts.append(f"seed {seed}: N={n} c={c:.3f}")
    ok &= dup_code == 1 and elapsed < 300
    detail = "; ".join(parts) + f"; duplicated exit {dup_code}; {elapsed:.0f} s"
    assert record_criterion(6, ok, detail)


def _mp_syllable(group, letters):
    g = mpmath.eye(group.generators[0].shape[0])
    for a in letters:
        m = mpmath.matrix(group.generators[abs(a) - 1].tolist()) ** group.power
        g = g * (m if a > 0 else mpmath.inverse(m))
    return g


def _mp_sqrt(m, inverse=False):
    e, q = mpmath.eigsy(m)
    return q * mpmath.diag([(mpmath.sqrt(v) if not inverse else 1 / mpmath.sqrt(v)) for v in e]) * q.T


def _mp_distance(p, q):
    r = _mp_sqrt(p, inverse=True)
    e, _ = mpmath.eigsy(r * q * r)
    return float(mpmath.sqrt(sum(mpmath.log(v) ** 2 for v in e)))


def _mp_spacings(word, groups, cache):
    """d(m_r, m_{r+1}) for every r, exact, each read from the shared knot p_r (x = I)."""
    r0 = word.n_syllables
    syl = [(k, letters) for k, letters in word.syllables]
    out = []
    for r in range(1, r0 + 1) if r0 == 1 else range(1, r0):
        key = (syl[r - 1], syl[r] if r < r0 else None, r == 1, r + 1 == r0 or r0 == 1)
        if key not in cache:
            g_in = _mp_syllable(groups[syl[r - 1][0]], syl[r - 1][1])
            back = mpmath.inverse(g_in)
            back = back * back.T  # p_{r-1} seen from p_r
            if r0 == 1:
                cache[key] = _mp_distance(back, mpmath.eye(back.rows))
            else:
                g_out = _mp_syllable(groups[syl[r][0]], syl[r][1])
                fwd = g_out * g_out.T  # p_{r+1} seen from p_r
                m_r = back if r == 1 else _mp_sqrt(back)
                m_next = fwd if r + 1 == r0 else _mp_sqrt(fwd)
                cache[key] = _mp_distance(m_r, m_next)
        out.append(cache[key])
    return out


@pytest.fixture(scope="module")
def high_power_run(tmp_path_factory):
    d = tmp_path_factory.mktemp("high")
    cfg_path, out = d / "cfg.json", d / "rep.json"
    cfg_path.write_text(json.dumps(_unpowered_config(2)))
    code = main(["schottky", "--config", str(cfg_path), "--out", str(out), "--power", "64"])
    return code, json.loads(out.read_text())


def test_midpoint_spacing_on_certified_runs(doubling_runs, high_power_run):
    runs, _, _ = doubling_runs
    parts, ok, n_words = [], True, 0
    for code, rep in [*runs.values(), high_power_run]:
        cfg = config_from_dict(rep["config"])
        cert = rep["certificate"]
        bound = cert["constants"]["spacing_bound"]
        least, cache = np.inf, {}
        # second route: exact midpoint spacings for every enumerated word
        with mpmath.workdps(60 + 3 * cfg.groups[0].power):
            for w in enumerate_reduced_words(cfg.groups, cfg.max_syllables):
                n_words += 1
                least = min(least, min(_mp_spacings(w, cfg.groups, cache)))
        measured = cert["conditions"]["spacing"]["l_measured"]
        ok &= code == 0 and least >= bound - 1e-6 and abs(least - measured) <= 1e-6 * max(1.0, least)
        parts.append(f"N={cfg.groups[0].power}: {least:.3f}>={bound:.3f}")
    assert record_criterion(7, ok, f"{n_words} words; " + ", ".join(parts))


def test_replacement_stability():
    rng = np.random.default_rng(8)
    th = ThetaSpec(0.45, FULL3)
    measured, failures = [], 0
    for _ in range(100):
        path, t1, t2, patch = random_replacement_trial(rng)
        base = check_morse(path, 2.0, 1.0, th, 1.0)
        v = check_morse(replace_segment(path, t1, t2, patch), 2.0, 1.0, th, 1.0)
        failures += not (base.pass_ and v.pass_)
        measured.append(v.D_measured)
    d_common = max(measured)
    fits = {}
    for r in (1.0, 16.0):
        p, q = euclidean_counterexample(r)
        fits[r] = fitted_constants(replace_segment(p, -r, r, q), 1.0)[0]
    ratio = fits[16.0] / fits[1.0]
    ok = failures == 0 and d_common <= 1.0 and ratio >= 4.0
    assert record_criterion(
        8, ok, f"100 trials, {failures} failures, common D''={d_common:.3f}; euclidean L16/L1={ratio:.2f}"
    )


def test_straight_spaced_proximity_trend():
    th = ThetaSpec(0.2, FULL3)
    deltas, spacings = (0.8, 0.4, 0.1), (4.0, 8.0, 16.0)
    eps = np.zeros((3, 3))
    ell = np.zeros((3, 3))
    prox = np.zeros((3, 3))
    for i, delta in enumerate(deltas):
        for j, s in enumerate(spacings):
            seq = perturbed_flat_sequence(8, s, delta)
            eps[i, j], ell[i, j], _ = check_straight_spaced(seq, th)
            prox[i, j] = parallel_set_proximity(seq, th)
    # rows: eps decreasing; columns: l increasing; proximity must fall along both
    grid_ok = np.all(np.diff(eps, axis=0) < 0) and np.all(np.diff(ell, axis=1) > 0)
    trend = np.all(np.diff(prox, axis=0) < 0) and np.all(np.diff(prox, axis=1) < 0)
    ok = bool(grid_ok and trend and np.all(np.isfinite(prox)))
    corners = f"prox {prox[0, 0]:.3f} (eps={eps[0, 0]:.2f}, l={ell[0, 0]:.1f}) -> {prox[2, 2]:.3f} (eps={eps[2, 2]:.2f}, l={ell[2, 2]:.1f})"
    assert record_criterion(9, ok, f"3x3 grid, {corners}")


def _hyperbolic_distance(mats, dps=60):
    """sqrt(2) arccosh(tr(g g^T) / 2) for the exact product g of the given SL(2) matrices."""
    with mpmath.workdps(dps):
        m = mpmath.eye(2)
        for a in mats:
            m = m * mpmath.matrix(np.asarray(a).tolist())
        t = sum(m[i, j] ** 2 for i in range(2) for j in range(2))
        return float(mpmath.sqrt(2) * mpmath.acosh(t / 2))


def _letter_matrices(w, groups):
    mats = []
    for k, letters in w.syllables:
        for a in letters:
            (p, q), (r, t) = groups[k].generators[abs(a) - 1]
            # the SL(2) inverse is exact: [[t, -q], [-r, p]]
            mats.append(np.array([[p, q], [r, t]]) if a > 0 else np.array([[t, -q], [-r, p]]))
    return mats


def test_rank_one_klein_combination(tmp_path):
    out = tmp_path / "klein.json"
    code = main(["certify", "--config", fixture_path("klein"), "--out", str(out)])
    rep = json.loads(out.read_text())
    cfg = parse_config(open(fixture_path("klein")).read())
    worst = 0.0
    rng = np.random.default_rng(10)
    for _ in range(200):
        g = symspace.random_element(rng, 2, 1.5)
        got = float(symspace.distance(np.eye(2), symspace.orbit_point(g)))
        worst = max(worst, abs(got - _hyperbolic_distance([g])))
    # group words up to 3 syllables, through the graded route used by the certifier
    x = graded.GradedPoint.identity(2)
    for w in enumerate_reduced_words(cfg.groups, 3):
        got = graded.distance(x, word_elements(w, cfg.groups)[-1].act(x))
        worst = max(worst, abs(got - _hyperbolic_distance(_letter_matrices(w, cfg.groups))))
    ok = code == 0 and rep["freeness"]["free_up_to"] == 6 and rep["freeness"]["pass"] and worst <= 1e-8
    assert record_criterion(
        10, ok, f"Klein pair exit {code}, free up to {rep['freeness']['free_up_to']} syllables, distance error {worst:.1e}"
    )


def test_determinism(tmp_path):
    outs = []
    for k in range(2):
        out = tmp_path / f"r{k}.json"
        main(["certify", "--config", fixture_path("schottky"), "--out", str(out), "--seed", "11"])
        outs.append(out.read_bytes())
    ok = outs[0] == outs[1]
    assert record_criterion(11, ok, f"two certify runs, {len(outs[0])} bytes, identical={ok}")


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q"]))
