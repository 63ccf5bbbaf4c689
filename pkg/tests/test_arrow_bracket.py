"""Tests for the bracket-and-arrow automaton.

Expected step counts below were obtained by running the sparse walker to
completion and cross-checking small cases against the range-2 cell map; they
are frozen here as regression oracles.
"""

import random

import pytest

from expansive_lab.arrow_bracket import (
    ARROW_LEFT,
    ARROW_RIGHT,
    BLANK,
    ArrowWalk,
    Timeout,
    admissible,
    admissible_periodic_words,
    arrow_trace,
    ascii_legend,
    bracket_info,
    build_inverse_rule,
    build_rule,
    canonical_point,
    close_bracket,
    conflict_report,
    default_step_budget,
    enumerate_L,
    hierarchical_arrangement,
    hierarchical_choices,
    is_arrow,
    level_alphabet,
    make_block,
    make_preblock,
    mirror_transition,
    open_bracket,
    perturbation_front,
    render_pgm,
    render_text,
    run_crossing,
    scan_periodic_injectivity,
    transitions,
    walk_from_configuration,
    walk_to_configuration,
)
from expansive_lab.shift_core import Padded, Periodic, apply_rule, orbit

# Measured crossing times, frozen.  Level 0 is 6n + 4 for every n tried;
# level 1 grows quadratically in the counter bound.
LEVEL0_STEPS = {1: 10, 2: 16, 3: 22, 4: 28, 5: 34, 6: 40, 7: 46, 8: 52}
LEVEL1_STEPS = {1: 70, 2: 176, 3: 330}
N2_STEPS_BY_LEVEL = {0: 16, 1: 176, 2: 1776, 3: 17776, 4: 177776}


# ---------------------------------------------------------------------------
# symbols and transition table


def test_alphabet_size_and_order():
    a1 = level_alphabet(1)
    assert len(a1) == 9
    assert a1.symbols[:3] == (BLANK, ARROW_RIGHT, ARROW_LEFT)
    assert len(level_alphabet(2)) == 13
    assert len(level_alphabet(3)) == 17


def test_bracket_info_roundtrip():
    for k in range(3):
        for marked in (False, True):
            assert bracket_info(open_bracket(k, marked)) == ("[", marked, k)
            assert bracket_info(close_bracket(k, marked)) == ("]", marked, k)
    assert bracket_info(BLANK) is None
    assert bracket_info(ARROW_LEFT) is None


@pytest.mark.parametrize("n", [1, 2, 3])
def test_transition_count(n):
    pats = transitions(n)
    assert len(pats) == 4 * n + 6
    # every left- and right-hand side carries exactly one arrow
    for _name, lhs, rhs in pats:
        assert sum(map(is_arrow, lhs)) == 1
        assert sum(map(is_arrow, rhs)) == 1


def test_mirror_of_reset_close():
    """The mirror construction must reproduce the left-moving reset rule:
    a left arrow facing an open bracket with counter 0 resets it to n and
    passes through."""
    n = 1
    by_name = {name: (lhs, rhs) for name, lhs, rhs in transitions(n)}
    lhs, rhs = by_name["reset-close"]
    assert (lhs, rhs) == ((ARROW_RIGHT, "]0", BLANK), (BLANK, "]1", ARROW_RIGHT))
    assert mirror_transition(lhs, rhs) == (
        (BLANK, "[0", ARROW_LEFT),
        (ARROW_LEFT, "[1", BLANK),
    )
    assert by_name["reset-close-mirror"] == mirror_transition(lhs, rhs)


@pytest.mark.parametrize("n", [1, 2])
def test_no_conflicting_transitions(n):
    assert conflict_report(n) == []
    build_rule(n)  # must not raise


def test_blank_quiescence():
    system = build_rule(1)
    quiet = (BLANK,) * 5
    assert system.rule.evaluate(quiet) == BLANK


# ---------------------------------------------------------------------------
# blocks


def test_preblock_words():
    assert make_preblock(0) == "[-]"
    assert make_preblock(1) == "[[-]-[-]]"
    assert make_preblock(2) == "[[[-]-[-]]-[[-]-[-]]]"
    for k in range(6):
        assert len(make_preblock(k)) == 6 * 2**k - 3


def test_block_words():
    b0 = make_block(0, 2)
    assert b0.word == ("[2", "-", "-", "-", "]2")
    b1 = make_block(1, 1)
    assert b1.word == (
        "[1", "-", "[1", "-", "-", "-", "]1", "-",
        "-", "-", "[1", "-", "-", "-", "]1", "-", "]1",
    )
    for k in range(5):
        assert make_block(k, 1).width == 12 * 2**k - 7


def test_block_is_admissible_and_fixed():
    system = build_rule(2)
    cfg = Padded(system.alphabet, make_block(2, 2).word, BLANK)
    assert admissible(cfg, 2)
    assert apply_rule(system.rule, cfg) == cfg


# ---------------------------------------------------------------------------
# crossings


@pytest.mark.parametrize("n,steps", sorted(LEVEL0_STEPS.items()))
def test_level0_crossing_steps(n, steps):
    report = run_crossing(0, n)
    assert report.steps == steps
    assert report.restored


@pytest.mark.parametrize("n,steps", sorted(LEVEL1_STEPS.items()))
def test_level1_crossing_steps(n, steps):
    assert run_crossing(1, n).steps == steps


@pytest.mark.parametrize("k,steps", sorted(N2_STEPS_BY_LEVEL.items()))
def test_n2_crossings_by_level(k, steps):
    assert run_crossing(k, 2).steps == steps


def test_left_crossing_is_symmetric():
    for k, n in [(0, 1), (0, 3), (1, 2), (2, 1)]:
        assert run_crossing(k, n, "left").steps == run_crossing(k, n, "right").steps


def test_crossing_growth_rate():
    # each extra level multiplies the crossing time by at least 2n
    for n in (1, 2, 3):
        prev = run_crossing(0, n).steps
        for k in (1, 2):
            cur = run_crossing(k, n).steps
            assert cur >= 2 * n * prev
            prev = cur


def test_crossing_timeout():
    with pytest.raises(Timeout) as err:
        run_crossing(1, 2, max_steps=10)
    assert err.value.limit == 10


def test_default_budget_covers_measured_crossings():
    for k, steps in N2_STEPS_BY_LEVEL.items():
        assert default_step_budget(k, 2) > steps


def test_bad_direction_rejected():
    with pytest.raises(ValueError):
        run_crossing(0, 1, "up")


# ---------------------------------------------------------------------------
# crossing language


def test_enumerate_L_sizes():
    lang = enumerate_L(0, 1)
    assert len(lang.right) == LEVEL0_STEPS[1] + 1
    assert len(lang.left) == LEVEL0_STEPS[1] + 1
    lang = enumerate_L(1, 1)
    assert len(lang.right) == LEVEL1_STEPS[1] + 1


def test_enumerate_L_endpoints():
    lang = enumerate_L(0, 1)
    block = make_block(0, 1).word
    assert lang.right[0] == (ARROW_RIGHT,) + block
    assert lang.right[-1] == block + (ARROW_RIGHT,)
    assert lang.left[0] == block + (ARROW_LEFT,)
    assert lang.left[-1] == (ARROW_LEFT,) + block


def test_enumerate_L_members_have_one_arrow():
    lang = enumerate_L(1, 2)
    for word in lang.words:
        assert sum(map(is_arrow, word)) == 1
        assert word[0] != BLANK and word[-1] != BLANK


# ---------------------------------------------------------------------------
# walker against the cell map


def _padded_from_word(word, n, anchor=0):
    return Padded(level_alphabet(n), word, BLANK, anchor)


@pytest.mark.parametrize("k,n", [(0, 1), (0, 2), (1, 1)])
def test_walker_matches_cell_map_on_crossings(k, n):
    """The sparse walker and the range-2 cell map must generate the same
    orbit from the canonical crossing start."""
    system = build_rule(n)
    cfg = _padded_from_word((ARROW_RIGHT,) + make_block(k, n).word, n, anchor=-1)
    walk = walk_from_configuration(cfg, n)
    cur = cfg
    for _ in range(LEVEL1_STEPS.get(n, 200) if k else LEVEL0_STEPS[n]):
        cur = apply_rule(system.rule, cur)
        assert walk.step()
        assert walk_to_configuration(walk, system.alphabet) == cur


def test_walker_matches_cell_map_on_random_configs():
    rng = random.Random(0xAB)
    n = 2
    system = build_rule(n)
    for _ in range(25):
        length = rng.randrange(8, 30, 2)
        word = [BLANK] * length
        for i in range(0, length, 2):
            if rng.random() < 0.5:
                marked = rng.random() < 0.3
                k = rng.randrange(n) if marked else rng.randrange(n + 1)
                maker = open_bracket if rng.random() < 0.5 else close_bracket
                word[i] = maker(k, marked)
        arrow_at = rng.randrange(1, length, 2)
        word[arrow_at] = ARROW_RIGHT if rng.random() < 0.5 else ARROW_LEFT
        cfg = _padded_from_word(tuple(word), n)
        assert admissible(cfg, n)
        walk = walk_from_configuration(cfg, n)
        cur = cfg
        for _ in range(40):
            nxt = apply_rule(system.rule, cur)
            if not walk.step():
                # stuck walker must coincide with a cell-map fixed point
                assert nxt == cur
                break
            cur = nxt
            assert walk_to_configuration(walk, system.alphabet) == cur


def test_walk_roundtrip():
    n = 1
    cfg = _padded_from_word((ARROW_LEFT, BLANK, "[1", BLANK, "]1"), n, anchor=3)
    walk = walk_from_configuration(cfg, n)
    assert walk.pos == 3 and walk.facing == -1
    assert walk_to_configuration(walk, level_alphabet(n)) == cfg


# ---------------------------------------------------------------------------
# traces, conservation, locality


def test_trace_of_free_arrow():
    n = 1
    system = build_rule(n)
    cfg = _padded_from_word((ARROW_RIGHT,), n)
    trace = arrow_trace(cfg, system, 25)
    assert trace.positions == list(range(26))
    assert trace.stuck_at is None and not trace.no_arrow


def test_trace_without_arrow():
    system = build_rule(1)
    cfg = _padded_from_word(make_block(0, 1).word, 1)
    trace = arrow_trace(cfg, system, 10)
    assert trace.no_arrow and trace.pairs == ()


def test_trace_stuck_on_orphaned_marked_bracket():
    # a right arrow facing a marked open bracket has no applicable rule
    system = build_rule(1)
    cfg = _padded_from_word((ARROW_RIGHT, "[*0"), 1)
    trace = arrow_trace(cfg, system, 10)
    assert trace.stuck_at == 0
    assert trace.positions == [0]
    assert apply_rule(system.rule, cfg) == cfg


def test_arrow_conservation_and_locality():
    n = 1
    system = build_rule(n)
    rng = random.Random(7)
    words = rng.sample(sorted(enumerate_L(1, n).words), 12)
    for word in words:
        cfg = _padded_from_word(word, n)
        cur = cfg
        for _ in range(30):
            pos = next(i for i in cur.support if is_arrow(cur[i]))
            nxt = apply_rule(system.rule, cur)
            arrows = [i for i in range(nxt.support[0], nxt.support[-1] + 1)
                      if is_arrow(nxt[i])]
            assert len(arrows) == 1
            lo, hi = min(cur.support[0], nxt.support[0]), max(cur.support[-1], nxt.support[-1])
            changed = [i for i in range(lo, hi + 1) if cur[i] != nxt[i]]
            assert all(abs(i - pos) <= 2 for i in changed)
            cur = nxt


def test_arrowless_admissible_configs_are_fixed():
    n = 2
    system = build_rule(n)
    for w in admissible_periodic_words(n, 4):
        cfg = Periodic(system.alphabet, w)
        assert apply_rule(system.rule, cfg) == cfg


# ---------------------------------------------------------------------------
# admissibility


def test_admissible_examples():
    n = 2
    assert admissible(_padded_from_word(make_block(1, n).word, n), n)
    # adjacent brackets
    assert not admissible(_padded_from_word(("[2", "]2"), n), n)
    # two arrows
    assert not admissible(_padded_from_word((ARROW_RIGHT, BLANK, ARROW_LEFT), n), n)
    # marked counter must stay below n: build in a wider alphabet, judge at n
    assert not admissible(_padded_from_word(("[*2",), 3), n)
    assert admissible(_padded_from_word(("[*1",), n), n)
    # unmarked counter can equal n but not exceed it
    assert admissible(_padded_from_word(("]2",), n), n)
    assert not admissible(_padded_from_word(("]3",), 3), n)


def test_admissible_periodic_wrap():
    n = 1
    alpha = level_alphabet(n)
    assert not admissible(Periodic(alpha, ("[1", "-", "-", "]1")), n)  # wrap adjacency
    assert admissible(Periodic(alpha, ("[1", "-", "]1", "-")), n)
    # a periodic arrow repeats; below period 5 the repeats crowd one window
    assert not admissible(Periodic(alpha, (ARROW_RIGHT, "-", "-", "-")), n)
    assert admissible(Periodic(alpha, (ARROW_RIGHT, "-", "-", "-", "-")), n)


def _linear_word_count(p, b):
    # words over {blank} + b brackets with no two adjacent brackets
    prev2, prev1 = 1, 1 + b
    if p == 0:
        return prev2
    for _ in range(p - 1):
        prev2, prev1 = prev1, prev1 + b * prev2
    return prev1


def test_enumeration_matches_transfer_matrix_count():
    """Cyclic admissible word counts have a closed form: trace of the
    adjacency transfer matrix, plus arrow placements times a path count."""
    for n in (1, 2):
        b = 4 * n + 2
        # trace(M^p) for M = [[1, b], [1, 0]] via the recurrence on traces
        tr = {1: 1, 2: 1 + 2 * b}
        for p in range(3, 8):
            tr[p] = tr[p - 1] + b * tr[p - 2]
        for p in range(1, 8):
            expected = tr[p]
            if p >= 5:
                expected += 2 * p * _linear_word_count(p - 1, b)
            got = sum(1 for _ in admissible_periodic_words(n, p))
            assert got == expected, (n, p)


# ---------------------------------------------------------------------------
# reversibility


def test_known_collision_pair():
    """One genuine failure of injectivity on the full admissible set: a
    mobile configuration steps onto a stuck one.  Both map to the stuck
    fixed point."""
    n = 1
    system = build_rule(n)
    stuck = Periodic(system.alphabet, (ARROW_RIGHT, "[*0", "-", "-", "-"))
    mobile = Periodic(system.alphabet, ("-", "[*0", "-", "-", ARROW_RIGHT))
    assert admissible(stuck, n) and admissible(mobile, n)
    assert apply_rule(system.rule, stuck) == stuck
    assert apply_rule(system.rule, mobile).word == stuck.word


@pytest.mark.parametrize("n,max_p", [(1, 7), (2, 6)])
def test_collisions_always_involve_a_stuck_point(n, max_p):
    report = scan_periodic_injectivity(n, range(1, max_p + 1))
    assert report.points > 0
    assert report.collisions_with_only_mobile_members() == []


@pytest.mark.parametrize("n", [1, 2])
def test_inverse_rule_undoes_mobile_points(n, max_p=5):
    system = build_rule(n)
    inverse = build_inverse_rule(n)
    checked = 0
    for p in range(5, max_p + 1):
        for w in admissible_periodic_words(n, p):
            if canonical_point(w) != w:
                continue
            x = Periodic(system.alphabet, w)
            y = apply_rule(system.rule, x)
            if y.word == w:
                continue
            assert apply_rule(inverse, y).word == w
            checked += 1
    assert checked > 100


def test_inverse_rule_on_crossing_orbit():
    n = 2
    system = build_rule(n)
    inverse = build_inverse_rule(n)
    cfg = _padded_from_word((ARROW_RIGHT,) + make_block(1, n).word, n, anchor=-1)
    path = orbit(system.rule, cfg, 60)
    for before, after in zip(path, path[1:]):
        assert apply_rule(inverse, after) == before


def test_canonical_point_examples():
    assert canonical_point(("-", "-")) == ("-",)
    assert canonical_point(("]1", "-", "]1", "-")) == ("-", "]1")
    assert canonical_point((">", "-", "-")) == ("-", "-", ">")


# ---------------------------------------------------------------------------
# perturbation fronts


def test_perturbation_front_matches_brute_force():
    n = 1
    system = build_rule(n)
    word = make_block(1, n).word
    cfg = _padded_from_word((ARROW_RIGHT,) + word, n, anchor=-1)
    base = _padded_from_word(word, n)
    right, left = perturbation_front(cfg, n, 150)
    cur = cfg
    hi, lo = -(10**9), 10**9
    for t in range(151):
        a = min(cur.support[0], base.support[0]) - 1
        z = max(cur.support[-1], base.support[-1]) + 1
        for i in range(a, z + 1):
            if cur[i] != base[i]:
                hi, lo = max(hi, i), min(lo, i)
        assert (right[t], left[t]) == (hi, lo)
        cur = apply_rule(system.rule, cur)


def test_perturbation_front_is_monotone():
    n = 2
    cfg = _padded_from_word((ARROW_RIGHT,) + make_block(2, n).word, n, anchor=-1)
    right, left = perturbation_front(cfg, n, 2000)
    assert len(right) == 2001
    assert all(b >= a for a, b in zip(right, right[1:]))
    assert all(b <= a for a, b in zip(left, left[1:]))


# ---------------------------------------------------------------------------
# hierarchical arrangements


def test_choices_seed_zero_and_determinism():
    assert hierarchical_choices(4, 0) == ((0, 0),) * 4
    assert hierarchical_choices(5, 9) == hierarchical_choices(5, 9)
    for phi, psi in hierarchical_choices(6, 123):
        assert phi in (0, 1) and psi in (0, 1)


def test_arrangement_offsets_seed_zero():
    arr = hierarchical_arrangement(6, 2, 0)
    assert arr.offsets == (0, 3, 15, 63, 255, 1023, 4095)
    assert arr.free_cell == 4095
    assert arr.plain_symbol(arr.free_cell) is None


def test_stage2_pair_lifts_to_level1_block():
    """The seed-0 stage-2 bracket pair at plain cells 3..11, lifted to
    automaton cells 6..22, is exactly the level-1 block word."""
    arr = hierarchical_arrangement(3, 2, 0)
    got = tuple(arr.lifted_symbol(i) for i in range(6, 23))
    assert got == make_block(1, 2).word


def test_arrangement_nesting_is_balanced():
    arr = hierarchical_arrangement(6, 2, 0)
    depth = 0
    for x in range(4096):
        s = arr.plain_symbol(x)
        if s == "[":
            depth += 1
        elif s == "]":
            depth -= 1
            assert depth >= 0
    assert depth == 0


def test_arrangement_has_no_adjacent_lifted_brackets():
    arr = hierarchical_arrangement(5, 1, 3)
    cfg = arr.configuration(0, 400)
    assert admissible(cfg, 1)


def test_arrangement_configuration_arrow_placement():
    arr = hierarchical_arrangement(3, 2, 0)
    cfg = arr.configuration(0, 40, arrow_at=2 * arr.free_cell % 40 + 1, facing=-1)
    assert sum(1 for i in cfg.support if is_arrow(cfg[i])) == 1
    with pytest.raises(ValueError):
        arr.configuration(0, 40, arrow_at=100)
    with pytest.raises(ValueError):
        arr.configuration(6, 23, arrow_at=6)  # bracket cell of the stage-2 block


def test_bad_choices_length_rejected():
    from expansive_lab.arrow_bracket import HierarchicalArrangement

    with pytest.raises(ValueError):
        HierarchicalArrangement(3, 1, ((0, 0),))


# ---------------------------------------------------------------------------
# rendering


def test_render_text_crossing_start():
    n = 1
    system = build_rule(n)
    cfg = _padded_from_word((ARROW_RIGHT,) + make_block(0, n).word, n, anchor=-1)
    rows = orbit(system.rule, cfg, 1)
    txt = render_text(rows, -1, 5, ascii_legend(n))
    assert txt == ">[---]-\n-C>--]-\n"


def test_ascii_legend_is_injective():
    for n in (1, 2, 4):
        legend = ascii_legend(n)
        assert len(set(legend.values())) == len(legend)
        assert legend[open_bracket(n)] == "["
        assert legend[close_bracket(n)] == "]"


def test_render_pgm_golden():
    n = 1
    system = build_rule(n)
    cfg = _padded_from_word((ARROW_RIGHT,) + make_block(0, n).word, n, anchor=-1)
    rows = orbit(system.rule, cfg, 1)
    pgm = render_pgm(rows, -1, 5, system.alphabet)
    assert pgm == "P2\n7 2\n8\n1 4 0 0 0 6 0\n0 7 1 0 0 6 0\n"


def test_render_pgm_shape():
    n = 2
    system = build_rule(n)
    cfg = _padded_from_word((ARROW_RIGHT,) + make_block(0, n).word, n, anchor=-1)
    rows = orbit(system.rule, cfg, 16)
    pgm = render_pgm(rows, -2, 6, system.alphabet)
    lines = pgm.splitlines()
    assert lines[0] == "P2" and lines[1] == "9 17" and lines[2] == "12"
    assert len(lines) == 3 + 17
    for line in lines[3:]:
        values = [int(v) for v in line.split()]
        assert len(values) == 9
        assert all(0 <= v <= 12 for v in values)
