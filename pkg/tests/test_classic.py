import pytest
from hypothesis import given
from hypothesis import strategies as st

from support.gitrepo import RepoBuilder, text
from support.synth import generate
from szzkit.classic import (
    LARGEST, LATEST, Attribution, CandidateSet, ag_szz, b_szz, ma_szz, run_classic, select_single,
)
from szzkit.repo import Repository


@pytest.fixture
def builder(tmp_path):
    return RepoBuilder(tmp_path / "repo")


def test_fix_that_only_adds_lines_has_no_candidates(builder):
    builder.commit({"f.c": text("a", "b")})
    fix = builder.commit({"f.c": text("a", "guard();", "b")})
    repo = Repository(builder.path)
    for algo in (b_szz, ag_szz, ma_szz):
        assert algo(repo, builder.sha(fix)).ids() == frozenset()
    pred = run_classic(repo, builder.sha(fix), "b")
    assert pred.route == "empty" and pred.predicted == frozenset()


def test_single_deleted_line_blames_its_author(builder):
    a = builder.commit({"f.c": text("a", "bad();", "c")})
    builder.commit({"g.c": text("x")})
    fix = builder.commit({"f.c": text("a", "c")})
    cands = b_szz(Repository(builder.path), builder.sha(fix))
    assert cands.ids() == {builder.sha(a)}
    assert cands.candidates[builder.sha(a)].traced_lines == 1


def test_root_fix_has_no_candidates(builder):
    fix = builder.commit({"f.c": text("a")})
    assert b_szz(Repository(builder.path), builder.sha(fix)).ids() == frozenset()


def test_noise_deletions_are_ignored_by_ag(builder):
    code = builder.commit({"f.c": text("int f(void)", "{", "\tint x = 1;", "\treturn x;", "}")})
    comment = builder.commit({"f.c": text("int f(void)", "{", "\t// start", "\tint x = 1;", "\treturn x;", "}")})
    blank = builder.commit({"f.c": text("int f(void)", "{", "\t// start", "", "\tint x = 1;", "\treturn x;", "}")})
    fix = builder.commit({"f.c": text("int f(void)", "{", "\tint  x = 1;", "\treturn x + 0;", "}")})
    repo = Repository(builder.path)
    fix_id = builder.sha(fix)
    assert b_szz(repo, fix_id).ids() == {builder.sha(code), builder.sha(comment), builder.sha(blank)}
    # the whitespace-only edit of "int x = 1;" is cosmetic; only the return line counts
    assert ag_szz(repo, fix_id).ids() == {builder.sha(code)}
    assert ag_szz(repo, fix_id).candidates[builder.sha(code)].traced_lines == 1


def test_merge_is_looked_through_by_ma(builder):
    base = builder.commit({"f.c": text("a", "b", "c")})
    side = builder.commit({"f.c": text("a", "b", "side_bug();", "c")}, parents=[base], branch="side")
    main = builder.commit({"g.c": text("x")}, parents=[base])
    merge = builder.commit({}, "merge side", parents=[main, side],
                           state={"f.c": text("a", "b", "side_bug();", "c"), "g.c": text("x")})
    fix = builder.commit({"f.c": text("a", "b", "c")}, parents=[merge])
    repo = Repository(builder.path)
    fix_id = builder.sha(fix)
    assert b_szz(repo, fix_id).ids() == {builder.sha(merge)}
    assert ag_szz(repo, fix_id).ids() == {builder.sha(merge)}
    assert ma_szz(repo, fix_id).ids() == {builder.sha(side)}


def test_run_classic_variants(builder):
    a = builder.commit({"f.c": text("a1", "a2", "a3")})
    b = builder.commit({"f.c": text("a1", "a2", "a3", "b1")})
    fix = builder.commit({"f.c": text("zz")})
    repo = Repository(builder.path)
    fix_id = builder.sha(fix)
    assert run_classic(repo, fix_id, "b").predicted == {builder.sha(a), builder.sha(b)}
    assert run_classic(repo, fix_id, "l").predicted == {builder.sha(a)}
    assert run_classic(repo, fix_id, "r").predicted == {builder.sha(b)}
    pred = run_classic(repo, fix_id[:10], "ag")
    assert pred.fix == fix_id and pred.route == "classic" and pred.algorithm == "ag"
    assert pred.candidates[0][0] == builder.sha(b)
    with pytest.raises(ValueError):
        run_classic(repo, fix_id, "llm4szz")


def _cands(items):
    cs = CandidateSet("f" * 40)
    for commit, lines, when in items:
        cs.candidates[commit] = Attribution(lines, when)
    return cs


candidate_items = st.lists(
    st.tuples(st.text("0123456789abcdef", min_size=8, max_size=8), st.integers(1, 4), st.integers(0, 3)),
    min_size=1, max_size=8, unique_by=lambda t: t[0])


@given(candidate_items, st.randoms())
def test_select_single_is_an_argmax_and_order_independent(items, rnd):
    latest = select_single(_cands(items), LATEST)
    largest = select_single(_cands(items), LARGEST)
    by_id = {c: (n, t) for c, n, t in items}
    assert by_id[latest][1] == max(t for _, _, t in items)
    assert by_id[largest][0] == max(n for _, n, _ in items)
    # documented tie-breaks
    assert latest == min(c for c, _, t in items if t == by_id[latest][1])
    top = [c for c, n, _ in items if n == by_id[largest][0]]
    assert by_id[largest][1] == max(by_id[c][1] for c in top)
    shuffled = list(items)
    rnd.shuffle(shuffled)
    assert select_single(_cands(shuffled), LATEST) == latest
    assert select_single(_cands(shuffled), LARGEST) == largest


def test_select_single_edge_cases():
    assert select_single(_cands([])) is None
    with pytest.raises(ValueError):
        select_single(_cands([("a", 1, 1)]), "oldest")


@pytest.mark.parametrize("seed", range(3))
def test_ag_candidates_are_a_subset_of_b(tmp_path, seed):
    synth = generate(tmp_path / "r", seed=seed, comments=True)
    repo = Repository(synth.builder.path)
    for mark in synth.marks[1:]:
        fix = synth.sha(mark)
        b = b_szz(repo, fix)
        ag = ag_szz(repo, fix)
        assert ag.ids() <= b.ids()
        for commit, attr in ag.candidates.items():
            assert attr.traced_lines <= b.candidates[commit].traced_lines
