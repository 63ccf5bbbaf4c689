"""Finite-scale probes of how information moves under a cell map.

Everything here replaces a quantifier over an infinite configuration space
with a finite family of configurations, so each verdict is one-sided:
determined regions are supersets of the truth (fewer pairs means fewer
refutations), propagation exponents are lower bounds, and blocking verdicts
hold only up to the stated horizon.  The docstrings of the individual
functions say which side they err on.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

from .shift_core import (
    Alphabet,
    Configuration,
    LocalRule,
    Padded,
    Periodic,
    agree_on,
    apply_rule,
)


class InverseRequired(ValueError):
    """Negative times were requested but no inverse rule was supplied."""


class TruncationWarning(UserWarning):
    """A half-line check hit the truncation horizon; the reported value is
    only a lower bound."""


# ---------------------------------------------------------------------------
# configuration families


def _as_alphabet(alphabet) -> Alphabet:
    return alphabet if isinstance(alphabet, Alphabet) else Alphabet(alphabet)


def padded_scale_family(
    alphabet: Alphabet,
    c_max: int,
    pad,
    extra_words: Sequence[tuple] = (),
) -> tuple:
    """The all-pad configuration, every single-site deviation within
    [-c_max, c_max], and optional extra padded words anchored at 0.

    Single-site deviations are what make brute-force regions sharp: for any
    spacetime cell whose input window pokes outside the agreed interval,
    some deviation pair witnesses the disagreement.
    """
    alphabet = _as_alphabet(alphabet)
    others = [s for s in alphabet if s != pad]
    family = [Padded(alphabet, (), pad)]
    for c in range(-c_max, c_max + 1):
        for s in others:
            family.append(Padded(alphabet, (s,), pad, anchor=c))
    for word in extra_words:
        family.append(Padded(alphabet, word, pad, anchor=0))
    return tuple(family)


def periodic_family(alphabet: Alphabet, max_period: int) -> tuple:
    """All periodic points of period up to max_period, one representative
    per rotation class."""
    alphabet = _as_alphabet(alphabet)
    out = []
    seen = set()
    for p in range(1, max_period + 1):
        for idx in range(len(alphabet) ** p):
            word, rest = [], idx
            for _ in range(p):
                rest, r = divmod(rest, len(alphabet))
                word.append(alphabet.symbols[r])
            word = tuple(word)
            canon = min(word[i:] + word[:i] for i in range(p))
            if canon in seen:
                continue
            seen.add(canon)
            out.append(Periodic(alphabet, word))
    return tuple(out)


def crossing_family(k: int, n: int, shifts: Iterable[int] = (0,)) -> tuple:
    """Every intermediate pattern of a block crossing, padded with blanks,
    at each requested anchor shift."""
    from .arrow_bracket import BLANK, enumerate_L, level_alphabet

    alphabet = level_alphabet(n)
    words = sorted(enumerate_L(k, n).words)
    return tuple(
        Padded(alphabet, w, BLANK, anchor=s) for s in shifts for w in words
    )


# ---------------------------------------------------------------------------
# orbits over a two-sided time range


def _orbit_table(rule, inverse, cfg, t_lo, t_hi):
    if t_lo < 0 and inverse is None:
        raise InverseRequired("negative times need an inverse rule")
    table = {0: cfg}
    cur = cfg
    for t in range(1, t_hi + 1):
        cur = apply_rule(rule, cur)
        table[t] = cur
    cur = cfg
    for t in range(-1, t_lo - 1, -1):
        cur = apply_rule(inverse, cur)
        table[t] = cur
    return table


# ---------------------------------------------------------------------------
# determined regions


@dataclass(frozen=True)
class DeterminedRegion:
    """Spacetime cells forced by agreement on [-n, n] at time zero.

    `cells` is relative to the family: with more configurations the region
    can only shrink, so a finite family yields an over-approximation of the
    family-closure's true region.
    """

    n: int
    cells: frozenset
    family_id: str
    t_range: tuple
    i_range: tuple


def determined_region(
    rule: LocalRule,
    family: Sequence[Configuration],
    n: int,
    t_range: tuple,
    i_range: tuple,
    inverse: LocalRule | None = None,
    family_id: str = "user",
) -> DeterminedRegion:
    """Brute-force determined region over all family pairs.

    A cell (i, t) is included iff every pair of family members that agrees
    on [-n, n] at time 0 also agrees at position i after t steps (negative t
    uses the supplied inverse).
    """
    if not family:
        raise ValueError("family must be nonempty")
    t_lo, t_hi = t_range
    i_lo, i_hi = i_range
    orbits = [_orbit_table(rule, inverse, y, t_lo, t_hi) for y in family]
    pairs = [
        (a, b)
        for a in range(len(family))
        for b in range(a + 1, len(family))
        if agree_on(family[a], family[b], -n, n)
    ]
    cells = set()
    for t in range(t_lo, t_hi + 1):
        for i in range(i_lo, i_hi + 1):
            if all(orbits[a][t][i] == orbits[b][t][i] for a, b in pairs):
                cells.add((i, t))
    return DeterminedRegion(n, frozenset(cells), family_id, t_range, i_range)


def region_to_lines(region: DeterminedRegion) -> str:
    """Sorted "(i,t)" pairs, one per line."""
    return "\n".join(f"({i},{t})" for i, t in sorted(region.cells)) + "\n"


# ---------------------------------------------------------------------------
# exact rational convex geometry


def _cross(o, a, b):
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def convex_hull(points) -> tuple:
    """Monotone-chain hull, counterclockwise, collinear points dropped."""
    pts = sorted(set(points))
    if len(pts) <= 2:
        return tuple(pts)
    lower: list = []
    for p in pts:
        while len(lower) >= 2 and _cross(lower[-2], lower[-1], p) <= 0:
            lower.pop()
        lower.append(p)
    upper: list = []
    for p in reversed(pts):
        while len(upper) >= 2 and _cross(upper[-2], upper[-1], p) <= 0:
            upper.pop()
        upper.append(p)
    return tuple(lower[:-1] + upper[:-1])


def _segment_distance_sq(p, a, b) -> Fraction:
    ab = (b[0] - a[0], b[1] - a[1])
    ap = (p[0] - a[0], p[1] - a[1])
    denom = ab[0] * ab[0] + ab[1] * ab[1]
    if denom == 0:
        return ap[0] * ap[0] + ap[1] * ap[1]
    t = Fraction(ab[0] * ap[0] + ab[1] * ap[1], denom)
    t = max(Fraction(0), min(Fraction(1), t))
    dx = p[0] - (a[0] + t * ab[0])
    dy = p[1] - (a[1] + t * ab[1])
    return dx * dx + dy * dy


def _contains(hull, p) -> bool:
    if len(hull) == 1:
        return hull[0] == p
    if len(hull) == 2:
        return _segment_distance_sq(p, hull[0], hull[1]) == 0
    return all(
        _cross(hull[i], hull[(i + 1) % len(hull)], p) >= 0 for i in range(len(hull))
    )


def _point_hull_distance_sq(p, hull) -> Fraction:
    if _contains(hull, p):
        return Fraction(0)
    if len(hull) == 1:
        a = hull[0]
        return (p[0] - a[0]) ** 2 + (p[1] - a[1]) ** 2
    return min(
        _segment_distance_sq(p, hull[i], hull[(i + 1) % len(hull)])
        for i in range(len(hull))
    )


def hausdorff_distance_sq(hull_a, hull_b) -> Fraction:
    """Squared Hausdorff distance between two convex hulls, exact.

    For convex sets the supremum of the distance-to-the-other-set is
    attained at a vertex, so scanning vertices suffices.
    """
    d = Fraction(0)
    for p in hull_a:
        d = max(d, _point_hull_distance_sq(p, hull_b))
    for q in hull_b:
        d = max(d, _point_hull_distance_sq(q, hull_a))
    return d


@dataclass(frozen=True)
class PolygonSequence:
    scales: tuple
    hulls: tuple
    gaps_sq: tuple

    def gaps(self) -> list[float]:
        return [float(g) ** 0.5 for g in self.gaps_sq]


def prediction_polygon(regions: Sequence[DeterminedRegion]) -> PolygonSequence:
    """Scale each region by 1/n and hull it; report consecutive gaps.

    Vertices are exact rationals; the squared Hausdorff distances between
    consecutive hulls measure how fast the scaled shapes settle.
    """
    if not regions:
        raise ValueError("need at least one region")
    first = regions[0].family_id
    for r in regions:
        if r.family_id != first:
            raise ValueError("regions come from different family generators")
    hulls = []
    for r in regions:
        pts = [(Fraction(i, r.n), Fraction(t, r.n)) for i, t in r.cells]
        hulls.append(convex_hull(pts))
    gaps = tuple(
        hausdorff_distance_sq(a, b) for a, b in zip(hulls, hulls[1:])
    )
    return PolygonSequence(tuple(r.n for r in regions), tuple(hulls), gaps)


def polygon_to_lines(hull) -> str:
    """Rational vertex list, one "x,y" pair per line."""
    return "\n".join(f"{x},{y}" for x, y in hull) + "\n"


# ---------------------------------------------------------------------------
# propagation exponents


@dataclass(frozen=True)
class LyapunovEstimate:
    """Cumulative propagation fronts and their per-step ratios.

    lambda_plus[t] bounds how far right-half information must reach left
    (the paper-style I^+ maximized over the family and over shifts);
    lambda_minus is the mirror.  Values are exact for padded families;
    `truncated` marks runs where the horizon clipped a front, making the
    estimate a lower bound only.
    """

    t_max: int
    horizon: int
    lambda_plus: tuple
    lambda_minus: tuple
    truncated: bool = False

    def ratio_plus(self, t: int) -> float:
        return self.lambda_plus[t] / t if t else 0.0

    def ratio_minus(self, t: int) -> float:
        return self.lambda_minus[t] / t if t else 0.0


def _pair_difference_fronts(rule, y, z, t_max, horizon):
    """Per-time cumulative extreme difference positions of two padded
    configurations, clipped to [-horizon, horizon]."""
    right, left = [], []
    hi, lo = None, None
    clipped = False
    cy, cz = y, z
    for _ in range(t_max + 1):
        a = min(cy.support[0] if len(cy.support) else 0,
                cz.support[0] if len(cz.support) else 0)
        b = max(cy.support[-1] if len(cy.support) else 0,
                cz.support[-1] if len(cz.support) else 0)
        if a < -horizon or b > horizon:
            clipped = True
            a, b = max(a, -horizon), min(b, horizon)
        for i in range(a, b + 1):
            if cy[i] != cz[i]:
                hi = i if hi is None else max(hi, i)
                lo = i if lo is None else min(lo, i)
        right.append(hi)
        left.append(lo)
        cy = apply_rule(rule, cy)
        cz = apply_rule(rule, cz)
    return right, left, clipped


def lyapunov_profile(
    rule: LocalRule,
    family: Sequence[Padded],
    t_max: int,
    horizon: int = 10**6,
) -> LyapunovEstimate:
    """Propagation exponents of a padded family.

    For each ordered pair the premise "agree on a half-line" fails exactly
    beyond the pair's extreme initial difference, and the conclusion "stay
    equal on the complementary half-line up to time t" fails exactly when
    the cumulative difference front has crossed the cut.  Maximizing the
    front advance over pairs therefore evaluates the quantifier definition
    without enumerating cuts; the equivalence with the direct evaluation is
    covered by tests.  Families with a periodic member are rejected: two
    distinct periodic points never agree on a half-line, which makes the
    premise vacuous and the profile identically zero.
    """
    for y in family:
        if not isinstance(y, Padded):
            raise TypeError("lyapunov_profile needs padded configurations")
        if y.pad != family[0].pad:
            raise ValueError("family members must share one pad symbol")
    plus = [0] * (t_max + 1)
    minus = [0] * (t_max + 1)
    truncated = False
    for a in range(len(family)):
        for b in range(a + 1, len(family)):
            if family[a] == family[b]:
                continue
            right, left, clipped = _pair_difference_fronts(
                rule, family[a], family[b], t_max, horizon
            )
            truncated = truncated or clipped
            r0, l0 = right[0], left[0]
            if r0 is None:
                continue  # every difference sits beyond the horizon
            for t in range(t_max + 1):
                plus[t] = max(plus[t], right[t] - r0)
                minus[t] = max(minus[t], l0 - left[t])
    if truncated:
        warnings.warn(
            "difference front reached the horizon; exponents are lower bounds",
            TruncationWarning,
            stacklevel=2,
        )
    return LyapunovEstimate(t_max, horizon, tuple(plus), tuple(minus), truncated)


def profile_from_fronts(right, left, start: int, horizon: int) -> LyapunovEstimate:
    """Wrap precomputed cumulative fronts of a single perturbation (a
    configuration versus itself without the perturbing symbol) as an
    estimate; `start` is the perturbation site, the initial difference."""
    plus = tuple(r - start for r in right)
    minus = tuple(start - l for l in left)
    return LyapunovEstimate(len(right) - 1, horizon, plus, minus)


def lyapunov_csv(estimate: LyapunovEstimate) -> str:
    lines = ["t,Lambda_plus,Lambda_minus,ratio_plus,ratio_minus"]
    for t in range(1, estimate.t_max + 1):
        lines.append(
            f"{t},{estimate.lambda_plus[t]},{estimate.lambda_minus[t]},"
            f"{estimate.ratio_plus(t):.6f},{estimate.ratio_minus(t):.6f}"
        )
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# blocking words


@dataclass(frozen=True)
class BlockingUpTo:
    t_max: int


@dataclass(frozen=True)
class RefutedAt:
    t: int


@dataclass(frozen=True)
class BlockingReport:
    word: tuple
    t_max: int
    verdict: BlockingUpTo | RefutedAt


def _occurring_words(family, max_len):
    words = set()
    for y in family:
        if not isinstance(y, Padded):
            raise TypeError("blocking_word_search needs padded configurations")
        sup = y.support
        lo = (sup[0] if len(sup) else 0) - max_len
        hi = (sup[-1] if len(sup) else 0) + max_len
        for length in range(1, max_len + 1):
            for c in range(lo, hi - length + 2):
                words.add(tuple(y[c + j] for j in range(length)))
    return sorted(words)


def embedded_word_family(
    alphabet: Alphabet, words: Sequence[tuple], pad, mark=None
) -> tuple:
    """For each word: the word embedded at [1, len], plus variants carrying
    one extra non-pad symbol two cells right of the word and two cells left
    of it.  The variant pairs give every embedded word both one-sided
    shielding tests something to shield against."""
    alphabet = _as_alphabet(alphabet)
    mark = mark if mark is not None else next(s for s in alphabet if s != pad)
    family = []
    for w in words:
        w = tuple(w)
        family.append(Padded(alphabet, w, pad, anchor=1))
        family.append(
            Padded(alphabet, w + (pad, mark), pad, anchor=1)
        )
        family.append(
            Padded(alphabet, (mark, pad, pad) + w, pad, anchor=-2)
        )
    return tuple(family)


def _difference_extremes(rule, y, z, t_max, margin):
    """Rightmost/leftmost difference position per time step (None if the
    orbits agree at that time)."""
    right, left = [], []
    cy, cz = y, z
    for _ in range(t_max + 1):
        a = min(cy.support[0] if len(cy.support) else 0,
                cz.support[0] if len(cz.support) else 0) - margin
        b = max(cy.support[-1] if len(cy.support) else 0,
                cz.support[-1] if len(cz.support) else 0) + margin
        hi = lo = None
        for i in range(a, b + 1):
            if cy[i] != cz[i]:
                hi = i if hi is None or i > hi else hi
                lo = i if lo is None or i < lo else lo
        right.append(hi)
        left.append(lo)
        cy = apply_rule(rule, cy)
        cz = apply_rule(rule, cz)
    return right, left


def blocking_word_search(
    rule: LocalRule,
    family: Sequence[Padded],
    max_len: int,
    t_max: int,
    words: Sequence[tuple] | None = None,
) -> list[BlockingReport]:
    """Test words for the two-sided shielding property: pairs sharing the
    word followed (resp. preceded) by an identical half-line must keep that
    half-line identical under iteration, out to t_max.

    A pair refutes a word from the right at time t when its difference
    front, initially strictly left of an occurrence, has crossed into the
    occurrence's half-line; mirrored on the left.  The verdict takes the
    earliest refutation over pairs, occurrences, and sides.  By default
    every word of length <= max_len occurring in the family is reported;
    pass `words` to restrict the report.
    """
    for y in family:
        if isinstance(y, Padded) and y.pad != family[0].pad:
            raise ValueError("family members must share one pad symbol")
    if words is None:
        words = _occurring_words(family, max_len)
    fronts = []
    for a in range(len(family)):
        for b in range(a + 1, len(family)):
            if family[a] == family[b]:
                continue
            right, left = _difference_extremes(
                rule, family[a], family[b], t_max, rule.radius + 1
            )
            if right[0] is None:
                continue  # identical as maps
            fronts.append((a, right, left))
    lo = min((y.support[0] if len(y.support) else 0) for y in family)
    hi = max((y.support[-1] if len(y.support) else 0) for y in family)
    lo, hi = lo - max_len - 2, hi + max_len + 2
    occurrences: list[dict] = []
    for y in family:
        index: dict = {}
        for length in range(1, max_len + 1):
            for c in range(lo, hi - length + 2):
                index.setdefault(
                    tuple(y[c + j] for j in range(length)), []
                ).append(c)
        occurrences.append(index)
    reports = []
    for word in words:
        word = tuple(word)
        refuted = None
        for a, right, left in fronts:
            spots = occurrences[a].get(word, ())
            # right side: earliest occurrence strictly beyond the initial
            # difference front refutes soonest
            c = next((c for c in spots if c > right[0]), None)
            if c is not None:
                hit = next(
                    (t for t in range(1, t_max + 1)
                     if right[t] is not None and right[t] >= c),
                    None,
                )
                if hit is not None and (refuted is None or hit < refuted):
                    refuted = hit
            # left side: latest occurrence ending before the leftmost
            # initial difference
            end = next(
                (c + len(word) - 1 for c in reversed(spots)
                 if c + len(word) - 1 < left[0]),
                None,
            )
            if end is not None:
                hit = next(
                    (t for t in range(1, t_max + 1)
                     if left[t] is not None and left[t] <= end),
                    None,
                )
                if hit is not None and (refuted is None or hit < refuted):
                    refuted = hit
        verdict = BlockingUpTo(t_max) if refuted is None else RefutedAt(refuted)
        reports.append(BlockingReport(word, t_max, verdict))
    return reports


# ---------------------------------------------------------------------------
# directional probes


@dataclass(frozen=True)
class Direction:
    """A line through the spacetime origin with a thickness.

    Either the time axis (`vertical=True`) or the graph t = slope * i with
    slope given as time over space.  Thickness is measured as the horizontal
    band |i| <= r in the vertical case and |t - slope*i| <= r * (1 + |slope|)
    otherwise, which is exact in rational arithmetic and within a constant
    factor of Euclidean distance.
    """

    thickness: Fraction
    vertical: bool = False
    slope: Fraction | None = None

    def __post_init__(self):
        if self.thickness <= 0:
            raise ValueError("thickness must be positive")
        if self.vertical == (self.slope is not None):
            raise ValueError("give exactly one of vertical or slope")

    def contains(self, i: int, t: int) -> bool:
        if self.vertical:
            return abs(i) <= self.thickness
        s = self.slope
        return abs(t - s * i) <= self.thickness * (1 + abs(s))


@dataclass(frozen=True)
class ExpansiveAtScale:
    direction: Direction
    extent: tuple
    pairs_checked: int


@dataclass(frozen=True)
class NotDeterminedAtScale:
    direction: Direction
    extent: tuple
    witness_pair: tuple
    witness_cell: tuple


def direction_probe(
    rule: LocalRule,
    inverse: LocalRule | None,
    family: Sequence[Configuration],
    direction: Direction,
    extent: tuple,
):
    """Does the thickened line determine the surrounding window?

    Data cells are the band intersected with [-E, E] x [-T, T]; the query
    box is the half-scale window, which keeps the question meaningful (a
    bounded band can never pin down cells whose input cones leave it).
    Returns ExpansiveAtScale, or NotDeterminedAtScale with a witness pair
    agreeing on the band yet differing inside the query box.
    """
    e_extent, t_extent = extent
    if t_extent > 0 and inverse is None:
        raise InverseRequired("the probe window spans negative times")
    band = [
        (i, t)
        for t in range(-t_extent, t_extent + 1)
        for i in range(-e_extent, e_extent + 1)
        if direction.contains(i, t)
    ]
    query = [
        (i, t)
        for t in range(-(t_extent // 2), t_extent // 2 + 1)
        for i in range(-(e_extent // 2), e_extent // 2 + 1)
    ]
    orbits = [
        _orbit_table(rule, inverse, y, -t_extent, t_extent) for y in family
    ]
    checked = 0
    for a in range(len(family)):
        for b in range(a + 1, len(family)):
            if not all(orbits[a][t][i] == orbits[b][t][i] for i, t in band):
                continue
            checked += 1
            for i, t in query:
                if orbits[a][t][i] != orbits[b][t][i]:
                    return NotDeterminedAtScale(
                        direction, extent, (a, b), (i, t)
                    )
    return ExpansiveAtScale(direction, extent, checked)
