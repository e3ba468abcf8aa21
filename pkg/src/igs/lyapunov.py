"""Random-case theory: the random arc matrix set, the collection of random path
matrix sets, Monte-Carlo Lyapunov exponents and the random dimension.

All Monte-Carlo randomness comes from Philox streams keyed by ``(seed, trial)``
so results are bit-reproducible and independent of evaluation order.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from scipy import stats

from . import kernels
from .errors import (
    NonPrimitiveMember,
    NotPrimitiveSystem,
    TooManySets,
    ValidationError,
)
from .graph import chi
from .spectral import enumerate_ab_paths, is_primitive, spectral_radius

DEFAULT_STEPS = 10_000
DEFAULT_TRIALS = 400
SCRIPT_D_CAP = 100_000
TRAJECTORY_CAP = 1_000_000


@dataclass(frozen=True)
class RandomMatrixSet:
    members: tuple  # integer matrices, all lambda x lambda
    probs: tuple  # exact Fractions aligned with members
    label: object = None
    combos: tuple = ()  # variant combination (j_1..j_lambda) behind each member

    def __post_init__(self):
        if len(self.members) != len(self.probs) or not self.members:
            raise ValidationError("members and probs must be non-empty and aligned")
        shapes = {np.shape(m) for m in self.members}
        if len(shapes) != 1:
            raise ValidationError(f"members have mixed shapes {sorted(shapes)}")
        if any(p < 0 for p in self.probs) or abs(float(sum(self.probs)) - 1.0) > 1e-12:
            raise ValidationError(f"probabilities {[str(p) for p in self.probs]} do not sum to 1")

    def __len__(self):
        return len(self.members)

    @property
    def dim(self) -> int:
        return int(np.shape(self.members[0])[0])

    def stacked(self) -> np.ndarray:
        return np.array([np.asarray(m, dtype=np.float64) for m in self.members])

    def mean_matrix(self) -> np.ndarray:
        return sum(float(p) * np.asarray(m, dtype=np.float64)
                   for m, p in zip(self.members, self.probs))

    def same_content(self, other) -> bool:
        return self.probs == other.probs and all(
            np.array_equal(a, b) for a, b in zip(self.members, other.members)
        )


def _variant_combos(spec):
    for combo in itertools.product(*(range(q) for q in spec.variant_counts)):
        p = Fraction(1)
        for c, j in enumerate(combo, start=1):
            p *= spec.rules[c - 1][j].prob
        yield combo, p


def build_random_matrix_set(spec) -> RandomMatrixSet:
    """One member per variant combination; row i is chi of the chosen color-i rule."""
    members, probs, combos = [], [], []
    for combo, p in _variant_combos(spec):
        rows = [chi(spec.rule(c, j).graph) for c, j in enumerate(combo, start=1)]
        members.append(np.array(rows, dtype=np.int64))
        probs.append(p)
        combos.append(combo)
    return RandomMatrixSet(tuple(members), tuple(probs), "M", tuple(combos))


# ----------------------------------------------------------------------------- script D


@dataclass(frozen=True)
class ScriptD:
    sets: tuple
    path_sets: tuple  # path_sets[i][j]: PathSet of rule (i+1, j)

    def __len__(self):
        return len(self.sets)

    def __iter__(self):
        return iter(self.sets)


def _all_path_sets(spec):
    return tuple(tuple(enumerate_ab_paths(v.rule) for v in variants) for variants in spec.rules)


def script_d_size(spec, path_sets=None) -> int:
    path_sets = path_sets or _all_path_sets(spec)
    return math.prod(len(ps.paths) for row in path_sets for ps in row)


def iter_script_d(spec, cap: int = SCRIPT_D_CAP, path_sets=None):
    """Yield the random path matrix sets lazily, last rule's path varying fastest.

    A set's label is ``label[i][j]``, the index of the path chosen in rule
    ``(i+1, j)``. Counting is over path lists, so paths sharing a chi vector
    give sets with identical content.
    """
    path_sets = path_sets or _all_path_sets(spec)
    size = script_d_size(spec, path_sets)
    if size > cap:
        raise TooManySets(f"{size} random path matrix sets exceed the cap {cap}")
    slots = [(i, j) for i, row in enumerate(path_sets) for j in range(len(row))]
    combos = list(_variant_combos(spec))
    for pick in itertools.product(*(range(len(path_sets[i][j].paths)) for i, j in slots)):
        chosen = {s: path_sets[s[0]][s[1]].chis[k] for s, k in zip(slots, pick)}
        members = tuple(
            np.array([chosen[(c, j)] for c, j in enumerate(combo)], dtype=np.int64)
            for combo, _ in combos
        )
        label, it = [], iter(pick)
        for row in path_sets:
            label.append(tuple(next(it) for _ in row))
        yield RandomMatrixSet(members, tuple(p for _, p in combos), tuple(label),
                              tuple(c for c, _ in combos))


def enumerate_script_D(spec, cap: int = SCRIPT_D_CAP) -> ScriptD:
    path_sets = _all_path_sets(spec)
    return ScriptD(tuple(iter_script_d(spec, cap, path_sets)), path_sets)


def format_label(label) -> str:
    if not isinstance(label, tuple):
        return str(label)
    return " ".join(f"P{i + 1}{j + 1}={k}" for i, row in enumerate(label) for j, k in enumerate(row))


# ----------------------------------------------------------------------------- estimators


@dataclass(frozen=True)
class LyapunovEstimate:
    value: float
    stderr: float
    steps: int
    trials: int
    method: str  # "monte-carlo" or "expectation-bound"
    seed: int | None = None
    burn_in: int = 0


def check_members(rset: RandomMatrixSet, strict: bool = False):
    """Members must be allowable (no zero row or column); ``strict`` also asks
    for primitivity of every member."""
    for m, combo in zip(rset.members, rset.combos or (None,) * len(rset)):
        a = np.asarray(m)
        bad = np.any(a < 0) or not a.any(axis=1).all() or not a.any(axis=0).all()
        if bad or (strict and not is_primitive(a)):
            raise NonPrimitiveMember(a.tolist(), combo)


def default_burn_in(n: int) -> int:
    return max(100, n // 100)


def crn_uniforms(trials: int, steps: int, seed: int) -> np.ndarray:
    """Uniforms for every trial, row t drawn from the Philox stream ``(seed, t)``."""
    out = np.empty((trials, steps))
    for t in range(trials):
        key = (int(seed) & (2**64 - 1)) | (t << 64)
        out[t] = np.random.Generator(np.random.Philox(key=key)).random(steps)
    return out


def _indices(rset: RandomMatrixSet, u: np.ndarray) -> np.ndarray:
    cum = np.cumsum([float(p) for p in rset.probs])
    return np.minimum(np.searchsorted(cum, u, side="right"), len(cum) - 1)


def lyapunov_mc(rset: RandomMatrixSet, n: int = DEFAULT_STEPS, trials: int = DEFAULT_TRIALS,
                seed: int = 0, x0=None, burn_in=None, strict: bool = False,
                uniforms=None) -> LyapunovEstimate:
    """Top Lyapunov exponent of i.i.d. products drawn from ``rset``.

    Each trial multiplies a row vector by ``burn_in + n`` random members,
    renormalizing to unit l1 norm each step, and averages the log norm factors
    of the last ``n`` steps. The estimate is the mean over trials; the error is
    the sample standard deviation over trials divided by sqrt(trials).
    """
    if n < 100:
        raise ValidationError("lyapunov_mc needs n >= 100 steps")
    if trials < 2:
        raise ValidationError("lyapunov_mc needs at least two trials")
    check_members(rset, strict)
    burn = default_burn_in(n) if burn_in is None else int(burn_in)
    x0 = np.ones(rset.dim) if x0 is None else np.asarray(x0, dtype=np.float64)
    if x0.shape != (rset.dim,) or np.any(x0 < 0) or not x0.any():
        raise ValidationError("x0 must be a nonnegative nonzero vector of matching size")
    u = crn_uniforms(trials, burn + n, seed) if uniforms is None else uniforms
    per_trial = kernels.lyapunov_sums(rset.stacked(), _indices(rset, u), x0, burn)
    return LyapunovEstimate(
        float(per_trial.mean()),
        float(per_trial.std(ddof=1) / math.sqrt(trials)),
        n, trials, "monte-carlo", int(seed), burn,
    )


def expectation_matrix_bound(rset: RandomMatrixSet) -> LyapunovEstimate:
    """``log rho(E X)``, an upper bound for the Lyapunov exponent (Jensen)."""
    e = rset.mean_matrix()
    if is_primitive(e):
        rho = spectral_radius(e)
    else:
        rho = float(np.abs(np.linalg.eigvals(e)).max())
    return LyapunovEstimate(math.log(rho), 0.0, 0, 0, "expectation-bound")


@dataclass(frozen=True)
class LminResult:
    estimate: LyapunovEstimate
    label: object
    index: int
    estimates: tuple  # one per set of the collection, same order
    labels: tuple
    ties: tuple  # indices whose estimate is within 2 pooled stderrs of the minimum

    def __iter__(self):
        return iter((self.estimate, self.label))


def lmin_script_D(spec, n: int = DEFAULT_STEPS, trials: int = DEFAULT_TRIALS, seed: int = 0,
                  cap: int = SCRIPT_D_CAP, burn_in=None) -> LminResult:
    """Smallest Lyapunov exponent over the random path matrix sets.

    Every set is driven by the same uniforms (common random numbers), and sets
    with identical content are estimated once.
    """
    sets = enumerate_script_D(spec, cap).sets
    burn = default_burn_in(n) if burn_in is None else int(burn_in)
    u = crn_uniforms(trials, burn + n, seed)
    cache, ests = [], []
    for s in sets:
        hit = next((e for t, e in cache if t.same_content(s)), None)
        if hit is None:
            hit = lyapunov_mc(s, n, trials, seed, burn_in=burn, uniforms=u)
            cache.append((s, hit))
        ests.append(hit)
    k = min(range(len(ests)), key=lambda i: ests[i].value)
    best = ests[k]
    ties = tuple(
        i for i, e in enumerate(ests)
        if e.value - best.value <= 2 * math.hypot(e.stderr, best.stderr)
    )
    return LminResult(best, sets[k].label, k, tuple(ests), tuple(s.label for s in sets), ties)


@dataclass(frozen=True)
class RandomTheory:
    l_m: LyapunovEstimate
    lmin: LminResult
    bound: LyapunovEstimate
    dimension: float
    stderr: float


def random_dimension(spec, n: int = DEFAULT_STEPS, trials: int = DEFAULT_TRIALS, seed: int = 0,
                     cap: int = SCRIPT_D_CAP) -> RandomTheory:
    """``L(M) / L_min`` with first-order propagation of the two standard errors."""
    ms = build_random_matrix_set(spec)
    try:
        l_m = lyapunov_mc(ms, n, trials, seed)
        lmin = lmin_script_D(spec, n, trials, seed, cap)
    except NonPrimitiveMember as exc:
        raise NotPrimitiveSystem(str(exc)) from exc
    a, b = l_m.value, lmin.estimate.value
    if b <= 0:
        raise NotPrimitiveSystem(f"minimal Lyapunov exponent {b} is not positive")
    d = a / b
    se = abs(d) * math.hypot(l_m.stderr / a, lmin.estimate.stderr / b)
    return RandomTheory(l_m, lmin, expectation_matrix_bound(ms), d, se)


# ----------------------------------------------------------------------------- trajectories


def stochastic_substitution_trajectory(rset: RandomMatrixSet, alpha0, n: int, seed: int = 0,
                                       cap: int = TRAJECTORY_CAP) -> np.ndarray:
    """``log ||alpha_k||_1`` for k = 0..n of the branching recursion.

    Each of the ``alpha[i]`` units of color i independently picks a member with
    the set's probabilities and contributes that member's row i. Once the total
    exceeds ``cap`` the vector is scaled down (rounded to integers) and the
    lost log mass is carried in an offset.
    """
    alpha = np.asarray(alpha0, dtype=np.int64)
    if alpha.shape != (rset.dim,) or np.any(alpha < 0) or not alpha.any():
        raise ValidationError("alpha0 must be a nonnegative nonzero count vector")
    mats = np.array([np.asarray(m, dtype=np.int64) for m in rset.members])
    p = np.array([float(q) for q in rset.probs])
    p = p / p.sum()
    rng = np.random.Generator(np.random.Philox(key=int(seed)))
    offset = 0.0
    out = np.empty(n + 1)
    out[0] = math.log(alpha.sum())
    for k in range(1, n + 1):
        nxt = np.zeros(rset.dim, dtype=np.int64)
        for i in np.flatnonzero(alpha):
            counts = rng.multinomial(alpha[i], p)
            nxt += counts @ mats[:, i, :]
        total = int(nxt.sum())
        if total == 0:
            raise ValidationError("trajectory died out (a member has a zero row)")
        if total > cap:
            scaled = np.rint(nxt * (cap / 10 / total)).astype(np.int64)
            offset += math.log(total) - math.log(int(scaled.sum()))
            nxt = scaled
        alpha = nxt
        out[k] = math.log(alpha.sum()) + offset
    return out


@dataclass(frozen=True)
class GrowthFit:
    slope: float
    stderr: float
    intercept: float


def growth_rate(series, start: int = 0, stop=None) -> GrowthFit:
    """Least-squares slope of a log-norm series over steps ``start..stop``."""
    y = np.asarray(series, dtype=np.float64)[start:stop]
    x = np.arange(start, start + y.size)
    fit = stats.linregress(x, y)
    return GrowthFit(float(fit.slope), float(fit.stderr), float(fit.intercept))
