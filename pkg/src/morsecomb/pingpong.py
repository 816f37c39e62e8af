"""Free products of matrix groups: reduced words, orbit paths and certification.

Words in a factor are tuples of signed 1-based generator indices, so
(1, -2) is a_1 a_2^{-1}.  A ReducedWord lists its syllables in written
order, w = gamma_1 gamma_2 ... gamma_r, and its orbit path visits the
prefix points p_r = g_r x with g_r = g_{r-1} gamma_r.  This is the path
of the word in the Cayley graph: translating the hinge at p_r by g_r^{-1}
gives (gamma_r^{-1} x, x, gamma_{r+1} x), the ping-pong configuration.
All products are kept in graded form, which is what lets orbit points of
long words be compared at all.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, GeometryError, NotAntipodal, NotProximal
from .estimates import bound_R1, compute_D
from .flags import FlagFamily, graded_flag_of_segment, thicken_flag_family
from .graded import GradedElement, GradedPoint, as_graded, midpoint, relative
from .linalg import unit_angle
from .morse import PathSample, _flag_ok, morse_verdict
from .parsets import diamond_distances_batch
from .symspace import as_group_element
from .tolerances import DEFAULT_TOL
from .weyl import angle_to_xi, theta_gap


@dataclass(frozen=True, eq=False)
class GroupSpec:
    """Factor subgroup given by generators; ``power`` replaces each generator by its power."""

    name: str
    generators: tuple
    ball_radius: int = 1
    power: int = 1

    def __post_init__(self):
        gens = tuple(as_group_element(g) for g in self.generators)
        if not gens:
            raise ConfigError("generators", "a factor needs at least one generator")
        if self.ball_radius < 1:
            raise ConfigError("ball_radius", "ball radius must be at least 1")
        if self.power < 1:
            raise ConfigError("power", "power must be at least 1")
        object.__setattr__(self, "generators", gens)

    @property
    def d(self):
        return self.generators[0].shape[0]

    def graded_generators(self):
        return [GradedElement.from_matrix(g).power(self.power) for g in self.generators]

    def to_dict(self):
        out = {
            "name": self.name,
            "generators": [g.tolist() for g in self.generators],
            "ball_radius": self.ball_radius,
        }
        if self.power != 1:
            out["power"] = self.power
        return out


def factor_words(n_gens, radius):
    """Reduced words of length 1..radius in n_gens generators, shortlex order (1, -1, 2, -2, ...)."""
    letters = [s * (i + 1) for i in range(n_gens) for s in (1, -1)]
    out = []
    layer = [()]
    for _ in range(radius):
        layer = [w + (a,) for w in layer for a in letters if not (w and w[-1] == -a)]
        out.extend(layer)
    return out


def _eval_letters(letters, gens):
    g = GradedElement.identity(gens[0].d)
    # the word a_1 a_2 ... is the matrix product in written order
    for a in reversed(letters):
        h = gens[abs(a) - 1]
        g = (h if a > 0 else h.inverse()).compose(g)
    return g


def factor_ball(group, tol=DEFAULT_TOL):
    """[(letters, element)] for the nontrivial elements of the word ball."""
    gens = group.graded_generators()
    out = []
    for w in factor_words(len(gens), group.ball_radius):
        g = _eval_letters(w, gens)
        if not g.is_identity(tol):
            out.append((w, g))
    return out


@dataclass(frozen=True)
class ReducedWord:
    syllables: tuple

    def __post_init__(self):
        syl = tuple((int(k), tuple(int(a) for a in w)) for k, w in self.syllables)
        for (k1, _), (k2, _) in zip(syl, syl[1:]):
            if k1 == k2:
                raise ValueError("adjacent syllables must come from different factors")
        if any(not w for _, w in syl):
            raise ValueError("syllables must be nonempty")
        object.__setattr__(self, "syllables", syl)

    def __len__(self):
        return sum(len(w) for _, w in self.syllables)

    @property
    def n_syllables(self):
        return len(self.syllables)

    def label(self, groups):
        parts = []
        for k, w in self.syllables:
            name = groups[k].name if groups is not None else f"G{k}"
            for a in w:
                parts.append(f"{name}.{abs(a)}" + ("" if a > 0 else "^-1"))
        return " ".join(parts)

    def to_dict(self, groups=None):
        return {
            "syllables": [[k, list(w)] for k, w in self.syllables],
            "label": self.label(groups),
        }

    @classmethod
    def from_dict(cls, data):
        return cls(tuple((k, tuple(w)) for k, w in data["syllables"]))


def _letter_log_norms(groups):
    """Per factor, log of the operator norm of each letter (+i for generator i, -i its inverse)."""
    out = []
    for g in groups:
        table = {}
        for i, h in enumerate(g.graded_generators(), start=1):
            table[i], table[-i] = float(np.max(h.s)), float(-np.min(h.s))
        out.append(table)
    return out


def _fixes_x(xg, word, g, log_norms, tol):
    """(is the word trivial in floating point, displacement of x).

    Besides a displacement below tol.id, a word counts as trivial when
    |g - 1| is below tol.id relative to the product of its letter norms,
    the normwise backward error of the product.  Cancellation in words
    like a^N a^-N leaves residuals near eps * |a^N|^2, far above tol.id
    for large N, while free words keep |g| comparable to that product.
    """
    disp = float(np.linalg.norm(relative(xg, g.act(xg))[0]))
    if disp <= tol.id:
        return True, disp
    scale = sum(log_norms[k][a] for k, letters in word.syllables for a in letters)
    top = float(np.max(g.s))
    if top > 30.0:
        residual = top
    else:
        r = np.linalg.norm(g.matrix() - np.eye(g.d), 2)
        residual = np.log(r) if r > 0 else -np.inf
    return bool(residual - scale <= np.log(tol.id)), disp


def _walk(balls, max_syllables):
    """(word, syllable elements, prefix products) over alternating syllable sequences.

    Words come in order of syllable count, then lexicographically by
    (factor index, syllable position in the factor ball).  Prefix products
    g_r = g_{r-1} gamma_r are carried along, never recomputed.
    """
    level = [((), [], [])]
    for _ in range(max_syllables):
        nxt = []
        for syl, gammas, prefixes in level:
            prev = syl[-1][0] if syl else None
            for k, ball in enumerate(balls):
                if k == prev:
                    continue
                for letters, h in ball:
                    g = h if not prefixes else prefixes[-1].compose(h)
                    item = (syl + ((k, letters),), gammas + [h], prefixes + [g])
                    yield ReducedWord(item[0]), item[1], item[2]
                    nxt.append(item)
        level = nxt


class OrbitFrames:
    """Orbit path of a word evaluated equivariantly.

    point(k, j) is the knot p_j translated by g_k^{-1}, built from the
    subword between k and j.  Far knots of long words cannot be compared
    after forming g_k and g_j separately (the products lose the tiny
    entries that encode their relative position); subword products are
    free of cancellation in the ping-pong regime and stay accurate.
    """

    def __init__(self, gammas, x, prefixes=None, lengths=None):
        self.gammas = list(gammas)
        # knot parameters: cumulative word length (one unit per syllable by default)
        steps = np.ones(len(self.gammas)) if lengths is None else np.asarray(lengths, dtype=float)
        self.ts = np.concatenate([[0.0], np.cumsum(steps)])
        self.x = as_graded(x)
        self._fwd = {}
        self._pts = {}
        if prefixes is not None:
            for j, g in enumerate(prefixes, start=1):
                self._fwd[(0, j)] = g

    @property
    def r0(self):
        return len(self.gammas)

    def forward(self, i, j):
        """gamma_{i+1} ... gamma_j for i < j."""
        key = (i, j)
        if key not in self._fwd:
            if j == i + 1:
                self._fwd[key] = self.gammas[i]
            else:
                self._fwd[key] = self.forward(i, j - 1).compose(self.gammas[j - 1])
        return self._fwd[key]

    def point(self, k, j):
        key = (k, j)
        if key not in self._pts:
            if j == k:
                p = self.x
            elif j > k:
                p = self.forward(k, j).act(self.x)
            else:
                p = self.forward(j, k).inverse().act(self.x)
            self._pts[key] = p
        return self._pts[key]

    def pair_logs(self, i, j):
        return relative(self.x, self.point(i, j))[0]

    def diamond_table(self, th, tol=DEFAULT_TOL):
        """{(i, j): distances of p_{i+1}..p_{j-1} to the diamond on (p_i, p_j)}.

        Each distance is evaluated in the frame of the intermediate knot,
        where that knot is the base point; all triples go in one batch.
        """
        triples = [
            (i, k, j)
            for i in range(self.r0 + 1)
            for j in range(i + 2, self.r0 + 1)
            for k in range(i + 1, j)
        ]
        if not triples:
            return {}
        dist = diamond_distances_batch(
            [self.point(k, i) for i, k, j in triples],
            [self.point(k, j) for i, k, j in triples],
            [self.x] * len(triples),
            th,
            tol,
        )
        table = {}
        for (i, k, j), v in zip(triples, dist):
            table.setdefault((i, j), []).append(v)
        return {key: np.array(v) for key, v in table.items()}

    def _mid(self, k, r):
        """m_r (1 <= r <= r0) translated by g_k^{-1}."""
        if r == 1:
            return self.point(k, 0)
        if r == self.r0:
            return self.point(k, self.r0)
        return midpoint(self.point(k, r - 1), self.point(k, r))

    def midpoint_hinges(self, th, tol=DEFAULT_TOL):
        """xi-angles at the interior midpoints m_2..m_{r0-1}.

        m_{r-1} and m_{r+1} lie on the same side of p_{r-1} (resp. p_r) as
        m_r, so seen from a single knot frame one of them is far away in
        the direction of m_r and their relative position is lost.  Instead
        m_{r-1} is read in the frame of p_{r-1} and m_{r+1} in that of p_r.
        In x-normalized coordinates, with gamma_r = u e^s v^T, m_r is
        u e^s u^T in the first frame and v e^{-s} v^T in the second, and
        gamma_r carries the chart v e^{-s/2} onto u e^{s/2}, so the two
        readings share one tangent space at m_r.
        """
        h = GradedElement(self.x.frame, 0.5 * self.x.logs, self.x.frame)
        h_inv = h.inverse()
        out = []
        for r in range(2, self.r0):
            g = h_inv.compose(self.gammas[r - 1]).compose(h)
            lb, ub = relative(GradedPoint(g.u, g.s), h_inv.act(self._mid(r - 1, r - 1)))
            lf, uf = relative(GradedPoint(g.v, -g.s), h_inv.act(self._mid(r, r + 1)))
            if not (_flag_ok(lb, th.pattern, tol) and _flag_ok(lf, th.pattern, tol)):
                out.append(0.0)
                continue
            out.append(float(unit_angle((ub * th.xi) @ ub.T, (uf * th.xi) @ uf.T)))
        return out

    def midpoint_spacings(self):
        return [
            float(np.linalg.norm(relative(self._mid(r, r), self._mid(r, r + 1))[0]))
            for r in range(1, self.r0)
        ] if self.r0 > 1 else [float(np.linalg.norm(self.pair_logs(0, 1)))]

    def morse(self, th, D, pair_budget=2000, regular_span=0.0, tol=DEFAULT_TOL):
        table = self.diamond_table(th, tol)
        return morse_verdict(
            self.ts,
            np.inf,
            0.0,
            th,
            D,
            self.pair_logs,
            lambda i, j: table[(i, j)],
            pair_budget,
            regular_span,
            tol,
        )


def enumerate_reduced_words(groups, max_syllables, tol=DEFAULT_TOL):
    if len(groups) < 2:
        raise ValueError("a free product needs at least two factors")
    balls = [factor_ball(g, tol) for g in groups]
    for word, _, _ in _walk(balls, max_syllables):
        yield word


def word_elements(w, groups, tol=DEFAULT_TOL):
    """Prefix products g_1, ..., g_r of a word."""
    elems = []
    for k, letters in w.syllables:
        h = _eval_letters(letters, groups[k].graded_generators())
        elems.append(h if not elems else elems[-1].compose(h))
    return elems


def _path_from_elements(w, elems, x):
    ts = np.cumsum([0] + [len(letters) for _, letters in w.syllables]).astype(float)
    return PathSample(ts, [x] + [g.act(x) for g in elems])


def orbit_path(w, groups, x, tol=DEFAULT_TOL):
    if not w.syllables:
        raise ValueError("the empty word has a one-knot orbit path")
    return _path_from_elements(w, word_elements(w, groups, tol), as_graded(x))


def midpoint_sequence(path):
    """m_1 = p_0, m_r = mid(p_{r-1}, p_r) for 2 <= r <= r_0 - 1, m_{r_0} = p_{r_0}."""
    p = path.points
    r0 = len(p) - 1
    if r0 < 1:
        raise ValueError("need at least two knots")
    return [p[0]] + [midpoint(p[r - 1], p[r]) for r in range(2, r0)] + [p[r0]]


def min_spacing(seq):
    return float(min(np.linalg.norm(relative(a, b)[0]) for a, b in zip(seq, seq[1:])))


@dataclass
class Targets:
    """Conclusion targets; D_max None means 2 D + 1 with D the hinge constant of the flag families."""

    eps_max: float = math.pi / 6
    l_min: float = 0.0
    D_max: float = None

    def to_dict(self):
        return {"eps_max": self.eps_max, "l_min": self.l_min, "D_max": self.D_max}

    def resolve_D(self, D):
        return self.D_max if self.D_max is not None else 2.0 * D + 1.0


@dataclass
class Certificate:
    conditions: dict
    constants: dict
    verdict: str
    counterexample: ReducedWord = None
    words_checked: int = 0
    groups: list = field(default=None, repr=False)

    def to_dict(self):
        return {
            "verdict": self.verdict,
            "conditions": self.conditions,
            "constants": self.constants,
            "counterexample": None
            if self.counterexample is None
            else self.counterexample.to_dict(self.groups),
            "words_checked": self.words_checked,
        }


def _worst(cur, val, word):
    if cur is None or val > cur[0]:
        return (val, word)
    return cur


def certify_combination(
    groups,
    x,
    th,
    th_prime,
    targets=None,
    max_syllables=4,
    pair_budget=2000,
    regular_span=0.0,
    tol=DEFAULT_TOL,
):
    """Check the combination hypotheses on word balls and the conclusions on reduced words.

    Verdicts: "refuted" when some nontrivial reduced word is trivial in
    floating point (see _fixes_x), "certified" when every condition
    passes, "inconclusive" otherwise.
    """
    if targets is None:
        targets = Targets()
    if len(groups) < 2:
        raise ConfigError("groups", "certification needs at least two factors")
    if len({g.name for g in groups}) != len(groups):
        raise ConfigError("groups", "factor names must be unique")
    if any(g.d != th.pattern.d for g in groups):
        raise ConfigError("groups", "generator size does not match the dimension")
    try:
        alpha = theta_gap(th, th_prime)
    except GeometryError as exc:
        raise ConfigError("theta", str(exc)) from exc
    xg = as_graded(x)
    xm = xg.matrix()
    balls = [factor_ball(g, tol) for g in groups]
    conditions = {}
    counterexample = None

    # (a) norms over the word balls
    S = np.inf
    for k, ball in enumerate(balls):
        for letters, g in ball:
            dist = float(np.linalg.norm(relative(xg, g.act(xg))[0]))
            if dist < S:
                S, s_word = dist, ReducedWord(((k, letters),))
    norm_ok = bool(S > tol.id)
    if not norm_ok:
        counterexample = s_word

    # (b) Theta-regularity and (c) flag families
    worst_angle = 0.0
    families = []
    irregular = None
    for k, ball in enumerate(balls):
        flags = []
        for letters, g in ball:
            gx = g.act(xg)
            logs, _ = relative(xg, gx)
            if np.linalg.norm(logs) <= tol.degenerate:
                irregular = irregular or ReducedWord(((k, letters),))
                worst_angle = np.pi
                continue
            ang = angle_to_xi(logs, th)
            worst_angle = max(worst_angle, ang)
            if ang > th.beta:
                irregular = irregular or ReducedWord(((k, letters),))
                continue
            try:
                flags.append(graded_flag_of_segment(xg, gx, th.pattern, tol))
            except GeometryError:
                irregular = irregular or ReducedWord(((k, letters),))
        families.append(FlagFamily(flags))
    regular_ok = irregular is None
    conditions["norm_bound"] = {
        "pass": norm_ok,
        "S": float(S),
        "ball_approximation": True,
    }
    conditions["theta_regularity"] = {
        "pass": regular_ok,
        "max_angle": float(worst_angle),
        "beta": th.beta,
        "failing_word": None if irregular is None else irregular.to_dict(groups),
    }

    antipodal_ok = False
    delta_flag = margin = None
    D = None
    if regular_ok and all(len(f) for f in families):
        try:
            families, delta_flag = thicken_flag_family(families, tol)
            antipodal_ok = True
            margin = float(min(f.margin for f in families))
        except NotAntipodal as exc:
            conditions["antipodality"] = {
                "pass": False,
                "factors": [exc.i, exc.j],
                "flags": list(exc.indices),
            }
    if antipodal_ok:
        conditions["antipodality"] = {"pass": True, "margin": margin, "delta_flag": delta_flag}
        D = 0.0
        for i in range(len(families)):
            for j in range(i + 1, len(families)):
                D = max(D, compute_D(families[i], families[j], xm, tol))
    elif "antipodality" not in conditions:
        conditions["antipodality"] = {"pass": False, "reason": "flag families unavailable"}

    constants = {"alpha": float(alpha), "delta_flag": delta_flag}
    spacing_bound = None
    if D is not None:
        R1 = bound_R1(D, alpha)
        spacing_bound = max(0.0, S * math.sin(alpha) / 2.0 - 4.0 * D)
        D_max = targets.resolve_D(D)
        constants.update(
            {"D": float(D), "R1": float(R1), "spacing_bound": float(spacing_bound), "D_max": D_max}
        )
        # the combination criterion asks for S much larger than R1; recorded, not enforced
        conditions["norm_bound"]["S_over_2R1"] = float(S / (2.0 * R1)) if R1 > 0 else None

    # (e) words
    hypotheses_ok = norm_ok and regular_ok and antipodal_ok
    straight_fail = spacing_fail = morse_fail = None
    eps_worst = d_worst = None
    l_least = np.inf
    theta_fit = 0.0
    n_words = 0
    log_norms = _letter_log_norms(groups)
    for word, gammas, prefixes in _walk(balls, max_syllables):
        n_words += 1
        trivial, _ = _fixes_x(xg, word, prefixes[-1], log_norms, tol)
        if trivial:
            counterexample = counterexample or word
            break
        if not hypotheses_ok:
            continue
        orbit = OrbitFrames(gammas, xg, prefixes, [len(w) for _, w in word.syllables])
        try:
            spacing = min(orbit.midpoint_spacings())
            l_least = min(l_least, spacing)
            if spacing < spacing_bound - 1e-6:
                spacing_fail = spacing_fail or word
            hinges = orbit.midpoint_hinges(th_prime, tol)
            if hinges:
                eps = float(np.pi - min(hinges))
                eps_worst = _worst(eps_worst, eps, word)
                if eps > targets.eps_max or spacing < targets.l_min:
                    straight_fail = straight_fail or word
            verdict = orbit.morse(th_prime, D_max, pair_budget, regular_span, tol)
        except GeometryError:
            morse_fail = morse_fail or word
            continue
        theta_fit = max(theta_fit, verdict.theta_fit)
        d_worst = _worst(d_worst, verdict.D_measured, word)
        if not verdict.pass_:
            morse_fail = morse_fail or word

    def wd(w):
        return None if w is None else w.to_dict(groups)

    if hypotheses_ok:
        conditions["straightness"] = {
            "pass": straight_fail is None,
            "eps_max": targets.eps_max,
            "eps_measured": None if eps_worst is None else float(eps_worst[0]),
            "l_min": targets.l_min,
            "l_measured": float(l_least) if np.isfinite(l_least) else None,
            "failing_word": wd(straight_fail),
        }
        conditions["spacing"] = {
            "pass": spacing_fail is None,
            "bound": spacing_bound,
            "l_measured": float(l_least) if np.isfinite(l_least) else None,
            "failing_word": wd(spacing_fail),
        }
        conditions["morse"] = {
            "pass": morse_fail is None,
            "D_max": D_max,
            "D_measured": None if d_worst is None else float(d_worst[0]),
            "theta_fit": float(theta_fit),
            "failing_word": wd(morse_fail),
        }
    conditions["freeness"] = {
        "pass": counterexample is None,
        "max_syllables": max_syllables,
        "words_checked": n_words,
    }
    if counterexample is not None:
        status = "refuted"
    elif all(c["pass"] for c in conditions.values()):
        status = "certified"
    else:
        status = "inconclusive"
    return Certificate(conditions, constants, status, counterexample, n_words, list(groups))


@dataclass(frozen=True)
class FreenessResult:
    free_up_to: int
    counterexample: ReducedWord
    qi_constants: tuple

    def __iter__(self):
        return iter((self.free_up_to, self.counterexample, self.qi_constants))

    @property
    def passed(self):
        return self.counterexample is None and self.qi_constants[0] > 0


def fit_linear_growth(lengths, dists):
    """Least-squares (c, a) in d ~ c |w| - a."""
    lengths = np.asarray(lengths, dtype=float)
    dists = np.asarray(dists, dtype=float)
    if len(lengths) < 2 or np.ptp(lengths) == 0:
        c = float(np.min(dists / lengths)) if len(lengths) else 0.0
        return c, 0.0
    m = np.stack([lengths, -np.ones_like(lengths)], axis=1)
    (c, a), *_ = np.linalg.lstsq(m, dists, rcond=None)
    return float(c), float(a)


def verify_freeness_ball(groups, x, max_syllables, tol=DEFAULT_TOL):
    """Scan reduced words for one that fixes x; fit linear displacement growth."""
    xg = as_graded(x)
    balls = [factor_ball(g, tol) for g in groups]
    lengths, dists = [], []
    if len(groups) < 2:
        for letters, g in balls[0] if balls else []:
            lengths.append(len(letters))
            dists.append(float(np.linalg.norm(relative(xg, g.act(xg))[0])))
        return FreenessResult(max_syllables, None, fit_linear_growth(lengths, dists))
    log_norms = _letter_log_norms(groups)
    for word, _, prefixes in _walk(balls, max_syllables):
        trivial, disp = _fixes_x(xg, word, prefixes[-1], log_norms, tol)
        if trivial:
            return FreenessResult(
                word.n_syllables - 1, word, fit_linear_growth(lengths, dists) if lengths else (0.0, 0.0)
            )
        lengths.append(len(word))
        dists.append(disp)
    return FreenessResult(max_syllables, None, fit_linear_growth(lengths, dists))


def jordan_projection(g):
    """Descending log-moduli of eigenvalues of g."""
    w = np.linalg.eigvals(np.asarray(g, dtype=float))
    return np.sort(np.log(np.abs(w)))[::-1]


def schottky_powers(elements, N, pattern, names=None, ball_radius=1, tol=DEFAULT_TOL):
    """Cyclic factors generated by g_i^N; each g_i must be proximal for the pattern."""
    specs = []
    for i, g in enumerate(elements):
        lam = N * jordan_projection(g)
        if any(lam[k - 1] - lam[k] <= tol.gap for k in pattern.dims):
            raise NotProximal(i)
        name = names[i] if names is not None else f"g{i + 1}"
        specs.append(GroupSpec(name, (g,), ball_radius=ball_radius, power=N))
    return specs


def group_norm(group, x, tol=DEFAULT_TOL):
    """Least displacement of x over the nontrivial ball elements."""
    xg = as_graded(x)
    return float(
        min(np.linalg.norm(relative(xg, g.act(xg))[0]) for _, g in factor_ball(group, tol))
    )


def flag_families(groups, x, pattern, tol=DEFAULT_TOL):
    """One FlagFamily per factor: flags of the segments from x to its ball images."""
    xg = as_graded(x)
    out = []
    for group in groups:
        flags = [
            graded_flag_of_segment(xg, g.act(xg), pattern, tol) for _, g in factor_ball(group, tol)
        ]
        out.append(FlagFamily(flags))
    return out
