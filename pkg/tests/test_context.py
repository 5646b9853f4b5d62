import pytest
from hypothesis import given
from hypothesis import strategies as st

from support.histories import ASSIGN, INSTANCE, INSTANCE_TEST
from support.gitrepo import RepoBuilder, text
from szzkit.context import expand_context, expand_versions, refine_context, refine_versions, resolve_statement
from szzkit.diff import align, build_line_map, parse_unified
from szzkit.errors import FileAbsent
from szzkit.repo import FileVersion, Repository


def _fv(lines, path="f.c", rev=None):
    return FileVersion(path, rev, tuple(lines))


def test_constructor_change_exposes_statement_outside_the_patch(instance_history):
    repo = Repository(instance_history.path)
    raw = parse_unified(repo.diff(instance_history.fix))
    patch = next(p for p in raw if p.new_path == INSTANCE)
    in_patch = {ln.text for h in patch.hunks for ln in h.lines}
    assert ASSIGN not in in_patch

    ctx = expand_context(repo, instance_history.fix, INSTANCE)
    functions = [r for r in ctx.regions if r.kind == "function"]
    [ctor] = [r for r in functions if "ZooKeeperInstance" in r.names]
    assert (9, ASSIGN) in ctor.old_lines
    assert ctor.old_lines[0][0] == 7  # the whole constructor, signature included
    assert "9: " + ASSIGN in ctor.old_text
    assert ASSIGN in ctx.render()


def test_test_file_context_is_separate(instance_history):
    repo = Repository(instance_history.path)
    ctx = expand_context(repo, instance_history.fix, INSTANCE_TEST)
    assert ctx.path == INSTANCE_TEST
    assert ctx.regions


def test_top_level_change_gets_three_line_window():
    old = [f"const int c{k} = {k};" for k in range(1, 21)]
    new = list(old)
    new[9] = "const int c10 = 100;"
    [region] = expand_versions(_fv(old), _fv(new))
    assert region.kind == "window"
    assert [no for no, _ in region.old_lines] == list(range(7, 14))
    assert [no for no, _ in region.new_lines] == list(range(7, 14))


def test_window_is_clamped_at_file_start():
    old = [f"int v{k};" for k in range(1, 10)]
    new = ["int v0;"] + old[1:]
    [region] = expand_versions(_fv(old), _fv(new))
    assert region.old_lines[0][0] == 1 and region.old_lines[-1][0] == 4


def test_nearby_windows_merge_and_distant_ones_do_not():
    old = [f"int v{k};" for k in range(1, 41)]
    new = list(old)
    new[4] = "int w5;"
    new[9] = "int w10;"  # 4 unchanged lines apart: merged
    new[30] = "int w31;"  # far away: separate window
    regions = expand_versions(_fv(old), _fv(new))
    assert [(r.old_lines[0][0], r.old_lines[-1][0]) for r in regions] == [(2, 13), (28, 34)]


def test_created_file_has_empty_old_side():
    new = ["int f(void)", "{", "\treturn 1;", "}"]
    regions = expand_versions(None, _fv(new))
    assert regions and all(r.old_text == "" for r in regions)
    assert regions[0].kind == "function"


def test_missing_file_is_reported(lock_history):
    with pytest.raises(FileAbsent):
        expand_context(Repository(lock_history.path), lock_history.fix, "nope.c")


SOURCE = st.lists(st.sampled_from(["int f(void)", "{", "}", "\tx++;", "\ty--;", "", "int z;", "\treturn 0;"]),
                  max_size=30)


@given(SOURCE, SOURCE)
def test_regions_cover_each_change_exactly_once(old, new):
    regions = expand_versions(_fv(old), _fv(new))
    changed = [(r.op, r.old_no, r.new_no) for r in align(old, new) if r.op != "="]
    covered = [(r.op, r.old_no, r.new_no) for reg in regions for r in reg.changed]
    assert sorted(covered, key=str) == sorted(changed, key=str)
    for reg in regions:
        if reg.kind == "window":
            rows = list(reg.rows)
            lead = next(i for i, r in enumerate(rows) if r.op != "=")
            tail = next(i for i, r in enumerate(reversed(rows)) if r.op != "=")
            assert lead <= 3 and tail <= 3


def test_refinement_around_three_buggy_lines():
    buggy = [f"line {k}" for k in range(1, 13)]
    fixed = buggy[:5] + ["fix a", "fix b", "fix c"] + buggy[5:]
    ref = refine_versions(_fv(buggy), _fv(fixed), {4, 5, 6})
    assert (ref.buggy.first_line, ref.buggy.last_line) == (1, 9)
    assert (ref.fixed.first_line, ref.fixed.last_line) == (1, 12)
    assert ref.margin == 3 and not ref.whole_file


def test_identical_files_give_identical_slices():
    lines = [f"s{k}" for k in range(1, 21)]
    ref = refine_versions(_fv(lines), _fv(lines), {10})
    assert (ref.buggy.first_line, ref.buggy.last_line) == (7, 13)
    assert (ref.fixed.first_line, ref.fixed.last_line) == (7, 13)
    assert ref.buggy.text == ref.fixed.text
    assert ref.buggy.text.splitlines()[0] == "7: s7"


def test_margin_grows_past_deleted_boundary():
    buggy = [f"s{k}" for k in range(1, 21)]
    fixed = [ln for k, ln in enumerate(buggy, 1) if k != 7]
    ref = refine_versions(_fv(buggy), _fv(fixed), {10})
    assert ref.margin == 4
    assert (ref.buggy.first_line, ref.buggy.last_line) == (6, 14)
    assert ref.buggy.lines[0] == ref.fixed.lines[0] and ref.buggy.lines[-1] == ref.fixed.lines[-1]


def test_no_mappable_boundary_falls_back_to_whole_files():
    buggy = ["a", "b", "c"]
    fixed = ["x", "y"]
    ref = refine_versions(_fv(buggy), _fv(fixed), {2})
    assert ref.whole_file
    assert (ref.buggy.first_line, ref.buggy.last_line) == (1, 3)
    assert (ref.fixed.first_line, ref.fixed.last_line) == (1, 2)


def test_absent_fixed_version_gives_empty_fixed_slice():
    ref = refine_versions(_fv(["a", "b"]), None, {1})
    assert ref.fixed is None
    assert (ref.buggy.first_line, ref.buggy.last_line) == (1, 2)


def test_invalid_buggy_lines():
    with pytest.raises(ValueError):
        refine_versions(_fv(["a"]), _fv(["a"]), set())
    with pytest.raises(ValueError):
        refine_versions(_fv(["a"]), _fv(["a"]), {2})


@st.composite
def refinement_cases(draw):
    base = draw(st.lists(st.sampled_from(["a", "b", "c", "d", "}", ""]), min_size=1, max_size=40))
    fixed = list(base)
    for _ in range(draw(st.integers(0, 6))):
        pos = draw(st.integers(0, len(fixed)))
        if draw(st.booleans()) and fixed:
            del fixed[min(pos, len(fixed) - 1)]
        else:
            fixed.insert(pos, draw(st.sampled_from(["new", "a", "}"])))
    lines = draw(st.sets(st.integers(1, len(base)), min_size=1, max_size=4))
    return base, fixed, lines


def _admissible(line_map, size, lines, n):
    lo, hi = max(1, min(lines) - n), min(size, max(lines) + n)
    return line_map.map_old(lo) is not None and line_map.map_old(hi) is not None


@given(refinement_cases())
def test_refinement_contract(case):
    buggy, fixed, lines = case
    ref = refine_versions(_fv(buggy), _fv(fixed), lines)
    assert ref.buggy.first_line <= min(lines) and max(lines) <= ref.buggy.last_line
    assert len(ref.buggy.lines) == ref.buggy.last_line - ref.buggy.first_line + 1
    if not fixed:
        assert ref.fixed is None
        return
    line_map = build_line_map(_fv(buggy), _fv(fixed))
    limit = len(buggy) + 3
    first_ok = next((n for n in range(3, limit + 1) if _admissible(line_map, len(buggy), lines, n)), None)
    if ref.whole_file:
        assert first_ok is None
        assert ref.fixed.lines == tuple(fixed)
        return
    assert ref.margin == first_ok
    assert line_map.map_old(ref.buggy.first_line) == ref.fixed.first_line
    assert line_map.map_old(ref.buggy.last_line) == ref.fixed.last_line
    assert ref.buggy.lines[0] == ref.fixed.lines[0] and ref.buggy.lines[-1] == ref.fixed.lines[-1]


def test_refine_context_against_repository(lock_history):
    repo = Repository(lock_history.path)
    ref = refine_context(repo, lock_history.reword, lock_history.fix,
                         "drivers/net/ethernet/acme/acme_main.c", {8, 9})
    assert (ref.buggy.first_line, ref.buggy.last_line) == (5, 12)
    assert ref.buggy.rev == lock_history.reword and ref.fixed.rev == lock_history.fix
    with pytest.raises(FileAbsent):
        refine_context(repo, lock_history.reword, lock_history.fix, "missing.c", {1})


def test_refine_context_before_creation(tmp_path):
    b = RepoBuilder(tmp_path / "r")
    old = b.commit({"x.c": text("q")})
    new = b.commit({"f.c": text("a", "b")})
    ref = refine_context(Repository(b.path), b.sha(new), b.sha(old), "f.c", {1})
    assert ref.fixed is None


def test_resolve_statement():
    file = _fv(["int a;", "  x =  1;", "}", "x = 1;", ""])
    assert resolve_statement(file, "x = 1;") == [2, 4]
    assert resolve_statement(file, "12:   int a;") == [1]
    assert resolve_statement(file, "- int a;") == [1]
    assert resolve_statement(file, "int a;\n}") == [1, 3]
    assert resolve_statement(file, "missing();") == []
    assert resolve_statement(file, "") == []
