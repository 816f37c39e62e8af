"""Quick invariant suites run by the ``selftest`` command.

Each suite returns (passed, detail).  They are small versions of the
property tests, sized to finish in a few seconds together.
"""

import math

import numpy as np

from . import graded, symspace
from .estimates import bound_f, bound_R0, bound_R1, measure_max_xi_angle
from .flags import Flag, FlagFamily, cartan_flag, perturb_flag, transform_flag, xi_angle
from .morse import euclidean_counterexample, fitted_constants, replace_segment
from .pingpong import GroupSpec, certify_combination
from .weyl import FacePattern, ThetaSpec


def bound_formulas(rng):
    got = [bound_f(1, 4), bound_f(1, 2), bound_R0(1, math.pi / 6), bound_R1(1, math.pi / 2), bound_R1(1, math.pi / 6)]
    want = [math.pi / 6, math.pi, 4.0, 6.0, 14.0]
    err = max(abs(a - b) for a, b in zip(got, want))
    return err <= 1e-12, {"max_error": err}


def delta_triangle(rng, n=500):
    worst = -np.inf
    for _ in range(n):
        x, y, z = (symspace.random_point(rng, 3, 1.5) for _ in range(3))
        lhs = symspace.delta_distance(x, z)
        rhs = symspace.delta_distance(x, y) + symspace.delta_distance(y, z)
        # majorization: partial sums of lhs bounded by those of rhs
        worst = max(worst, float(np.max(np.cumsum(lhs)[:-1] - np.cumsum(rhs)[:-1])))
    return worst <= 1e-8, {"max_violation": worst, "triples": n}


def xi_identities(rng, n=100):
    pat = FacePattern.full(3)
    xi = ThetaSpec(0.2, pat).xi
    worst = 0.0
    for _ in range(n):
        x = symspace.random_point(rng, 3, 1.0)
        a = perturb_flag(Flag.standard(pat), 1.0, rng)
        b = perturb_flag(Flag.opposite_standard(pat), 1.0, rng)
        g = symspace.random_element(rng, 3, 0.8)
        worst = max(
            worst,
            xi_angle(x, a, a, xi),
            abs(xi_angle(x, a, cartan_flag(x, a), xi) - math.pi),
            abs(
                xi_angle(symspace.act(g, x), transform_flag(g, a), transform_flag(g, b), xi)
                - xi_angle(x, a, b, xi)
            ),
        )
    return worst <= 1e-6, {"max_error": worst, "configurations": n}


def graded_consistency(rng, n=100):
    worst = 0.0
    for _ in range(n):
        x, y = symspace.random_point(rng, 3, 2.0), symspace.random_point(rng, 3, 2.0)
        gd = graded.distance(graded.as_graded(x), graded.as_graded(y))
        worst = max(worst, abs(gd - float(symspace.distance(x, y))))
    return worst <= 1e-8, {"max_error": worst}


def ray_angle_bound(rng, n=100):
    pat = FacePattern.full(3)
    th = ThetaSpec(0.2, pat)
    fam1 = FlagFamily([perturb_flag(Flag.standard(pat), 0.3, rng) for _ in range(3)])
    fam2 = FlagFamily([perturb_flag(Flag.opposite_standard(pat), 0.3, rng) for _ in range(3)])
    rep = measure_max_xi_angle(fam1, fam2, np.eye(3), th, 20.0, n, int(rng.integers(2**31)), mode="ray")
    return rep.holds, rep.to_dict()


def euclidean_negative(rng):
    fits = {}
    for r in (1.0, 16.0):
        path, patch = euclidean_counterexample(r)
        fits[r] = fitted_constants(replace_segment(path, -r, r, patch), 1.0)[0]
    return fits[16.0] >= 4 * fits[1.0], {"L_r1": fits[1.0], "L_r16": fits[16.0]}


def duplicated_refuted(rng):
    pat = FacePattern.full(3)
    g = np.diag([math.e, 1.0, 1.0 / math.e])
    groups = [GroupSpec("a", (g,)), GroupSpec("b", (g,))]
    cert = certify_combination(groups, np.eye(3), ThetaSpec(0.2, pat), ThetaSpec(0.45, pat), max_syllables=2)
    return cert.verdict == "refuted", {"verdict": cert.verdict}


def rank_one_distance(rng, n=50):
    worst = 0.0
    for _ in range(n):
        g = symspace.random_element(rng, 2, 1.5)
        want = math.sqrt(2.0) * math.acosh(np.trace(g @ g.T) / 2.0)
        got = float(symspace.distance(np.eye(2), symspace.orbit_point(g)))
        worst = max(worst, abs(got - want))
    return worst <= 1e-8, {"max_error": worst}


SUITES = {
    "bound_formulas": bound_formulas,
    "delta_triangle": delta_triangle,
    "xi_identities": xi_identities,
    "graded_consistency": graded_consistency,
    "ray_angle_bound": ray_angle_bound,
    "euclidean_negative": euclidean_negative,
    "duplicated_refuted": duplicated_refuted,
    "rank_one_distance": rank_one_distance,
}


def run_selftest(seed=0):
    results = {}
    for name, suite in SUITES.items():
        rng = np.random.default_rng([seed, len(results)])
        try:
            ok, detail = suite(rng)
        except Exception as exc:  # a crashing suite is a failed suite
            ok, detail = False, {"error": f"{type(exc).__name__}: {exc}"}
        results[name] = {"pass": bool(ok), "detail": detail}
    return results
