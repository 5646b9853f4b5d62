import difflib
import re

import pytest
from hypothesis import given
from hypothesis import strategies as st

from support.gitrepo import RepoBuilder, git, text
from support.oracles import is_common_subsequence, lcs_oracle
from szzkit.diff import (
    ADDED, BLANK, CODE, COMMENT, DELETED, FilePatch, align, build_line_map, classify_noise,
    cosmetic_deletions, count_changed_lines, parse_unified, render_unified,
)
from szzkit.errors import MalformedDiff
from szzkit.repo import FileVersion, Repository

ONE_LINE = """\
diff --git a/src/x.c b/src/x.c
index 1111111..2222222 100644
--- a/src/x.c
+++ b/src/x.c
@@ -2,3 +2,3 @@ int main(void)
 a
-b
+B
 c
"""


def test_empty_input():
    assert parse_unified("") == []


def test_single_replacement():
    [patch] = parse_unified(ONE_LINE)
    assert (patch.old_path, patch.new_path, patch.is_binary) == ("src/x.c", "src/x.c", False)
    [hunk] = patch.hunks
    assert hunk.section == "int main(void)"
    assert [(ln.kind, ln.old_no, ln.new_no, ln.text) for ln in hunk.deleted + hunk.added] == [
        (DELETED, 3, None, "b"), (ADDED, None, 3, "B")]


def test_added_and_deleted_files_and_binary():
    diff = (
        "diff --git a/new.c b/new.c\nnew file mode 100644\nindex 0000000..1111111\n"
        "--- /dev/null\n+++ b/new.c\n@@ -0,0 +1,2 @@\n+x\n+y\n"
        "diff --git a/old.c b/old.c\ndeleted file mode 100644\n"
        "--- a/old.c\n+++ /dev/null\n@@ -1 +0,0 @@\n-z\n"
        "diff --git a/img.png b/img.png\nindex 1..2 100644\nBinary files a/img.png and b/img.png differ\n"
    )
    new, old, binary = parse_unified(diff)
    assert (new.old_path, new.new_path, new.added_count) == (None, "new.c", 2)
    assert (old.old_path, old.new_path, old.deleted_count) == ("old.c", None, 1)
    assert binary.is_binary and binary.hunks == ()
    assert count_changed_lines([new, old, binary]) == 3


def test_rename_header():
    diff = ("diff --git a/a.c b/b.c\nsimilarity index 90%\nrename from a.c\nrename to b.c\n"
            "--- a/a.c\n+++ b/b.c\n@@ -1 +1 @@\n-q\n+r\n")
    [p] = parse_unified(diff)
    assert (p.old_path, p.new_path) == ("a.c", "b.c")


def test_no_newline_marker_and_round_trip():
    diff = "--- a/f\n+++ b/f\n@@ -1 +1 @@\n-a\n\\ No newline at end of file\n+a\n"
    [p] = parse_unified(diff)
    assert p.hunks[0].lines[0].no_newline and not p.hunks[0].lines[1].no_newline
    assert parse_unified(render_unified([p])) == [p]


def test_hunk_lengths_match_body():
    [p] = parse_unified(ONE_LINE)
    for h in p.hunks:
        assert sum(ln.kind != ADDED for ln in h.lines) == h.old_len
        assert sum(ln.kind != DELETED for ln in h.lines) == h.new_len


@pytest.mark.parametrize("diff, offset", [
    ("--- a/f\n+++ b/f\n@@ -1,2 +1,2 @@\n a\n", lambda d: len(d.encode())),
    ("--- a/f\n+++ b/f\n@@ -1 +1 @@\n?a\n", lambda d: d.index("?a")),
    ("@@ -1 +1 @@\n-a\n+b\n", lambda d: 0),
    ("--- a/f\n+++ b/f\n@@ nonsense @@\n", lambda d: d.index("@@")),
])
def test_malformed_diffs_report_byte_offsets(diff, offset):
    with pytest.raises(MalformedDiff) as info:
        parse_unified(diff)
    assert info.value.offset == offset(diff)
    assert f"at byte {offset(diff)}" in str(info.value)


def test_out_of_order_hunks_are_rejected():
    diff = "--- a/f\n+++ b/f\n@@ -5 +5 @@\n-a\n+b\n@@ -1 +1 @@\n-c\n+d\n"
    with pytest.raises(MalformedDiff):
        parse_unified(diff)


def _fig2_files():
    base = {f"drivers/net/f{i}.c": text(*(f"f{i} original line {k};" for k in range(1, 21)))
            for i in range(3)}
    changed = {}
    for i, (adds, dels) in enumerate([(10, 3), (9, 3), (6, 2)]):
        rows = [f"f{i} original line {k};" for k in range(1, 21)]
        del rows[4:4 + dels]
        rows[8:8] = [f"f{i} new line {k};" for k in range(adds)]
        changed[f"drivers/net/f{i}.c"] = text(*rows)
    changed["drivers/net/f3.h"] = text(*(f"#define F3_{k} {k}" for k in range(4)))
    return base, changed


def test_four_file_commit_totals(tmp_path):
    builder = RepoBuilder(tmp_path / "r")
    base, changed = _fig2_files()
    builder.commit(base)
    fix = builder.commit(changed, "net: lock the rx walk")
    sha = builder.sha(fix)
    stat = git(builder.path, "show", "--shortstat", "--format=", sha)
    assert re.search(r"4 files changed, 29 insertions\(\+\), 8 deletions\(-\)", stat)
    patches = parse_unified(Repository(builder.path).diff(sha))
    assert len(patches) == 4
    assert sum(p.added_count for p in patches) == 29
    assert sum(p.deleted_count for p in patches) == 8
    assert count_changed_lines(patches) == 37


def test_count_changed_lines_trivia():
    assert count_changed_lines([]) == 0
    diff = "--- a/f\n+++ b/f\n@@ -1,2 +1,3 @@\n-a\n-b\n+c\n+d\n+e\n"
    assert count_changed_lines(parse_unified(diff)) == 5


LINE = st.sampled_from(["a", "b", "c", "int x;", "", "  y = 2;", "--x;", "++y;", "}"])


@given(st.lists(LINE, max_size=25), st.lists(LINE, max_size=25), st.integers(0, 4))
def test_difflib_output_round_trips(old, new, context):
    diff = "".join(difflib.unified_diff([s + "\n" for s in old], [s + "\n" for s in new],
                                        "a/f.c", "b/f.c", n=context))
    patches = parse_unified(diff)
    assert parse_unified(render_unified(patches)) == patches
    ops = difflib.SequenceMatcher(None, old, new, autojunk=False).get_opcodes()
    deleted = sum(i2 - i1 for tag, i1, i2, _, _ in ops if tag in ("delete", "replace"))
    added = sum(j2 - j1 for tag, _, _, j1, j2 in ops if tag in ("insert", "replace"))
    assert sum(p.deleted_count for p in patches) == deleted
    assert sum(p.added_count for p in patches) == added
    for p in patches:
        for h in p.hunks:
            for ln in h.deleted:
                assert old[ln.old_no - 1] == ln.text
            for ln in h.added:
                assert new[ln.new_no - 1] == ln.text


@pytest.mark.parametrize("line", ["", "   ", "\t", " \t  "])
@pytest.mark.parametrize("language", ["c", "java"])
def test_blank_lines(line, language):
    assert classify_noise(line, language) == BLANK


@pytest.mark.parametrize("line", [
    "// fix later", "   /* one-liner */", " * continued block", " */", "*", "/* a */ /* b */",
    "/** javadoc", "//",
])
def test_comment_lines(line):
    assert classify_noise(line, "c") == COMMENT
    assert classify_noise(line, "java") == COMMENT


@pytest.mark.parametrize("line", [
    "x = 1; /* init */", "return 0; // done", 'printf("/* not a comment */");', "a */ b;",
    "*p = 0;", '"//";', "*/ x = 1;",
])
def test_code_lines(line):
    assert classify_noise(line, "c") == CODE


def _strip_comments_oracle(line: str) -> str:
    # drop string literals, then comments; whatever is left is code
    without_strings = re.sub(r'"(\\.|[^"\\])*"|\'(\\.|[^\'\\])*\'', "S", line)
    no_block = re.sub(r"/\*.*?\*/", "", without_strings)
    return re.sub(r"/\*.*$|//.*$", "", no_block).strip()


@given(st.lists(st.sampled_from(["x", "=", "1;", "/*", "*/", "//", " ", "c", '"s"', "(", ")"]),
                max_size=10))
def test_classification_agrees_with_regex_strip(tokens):
    line = " ".join(tokens)
    stripped = line.strip()
    if not stripped:
        assert classify_noise(line) == BLANK
        return
    if stripped == "*" or stripped.startswith(("* ", "*\t", "*/")):
        return  # continuation lines are a separate rule
    expected = CODE if _strip_comments_oracle(line) else COMMENT
    assert classify_noise(line) == expected


def test_cosmetic_deletions_are_whitespace_only_pairs():
    diff = "--- a/f\n+++ b/f\n@@ -1,3 +1,3 @@\n-if (x)  {\n-  y = 1;\n-z();\n+if (x) {\n+  y = 2;\n+  z();\n"
    [p] = parse_unified(diff)
    assert cosmetic_deletions(p.hunks[0]) == {1, 3}


def _fv(lines):
    return FileVersion("f", None, tuple(lines))


def test_identical_files_map_one_to_one():
    lines = [f"l{k}" for k in range(10)]
    assert build_line_map(_fv(lines), _fv(lines)).pairs == tuple((k, k) for k in range(1, 11))


def test_insertion_shifts_following_lines():
    old = [f"l{k}" for k in range(1, 11)]
    new = old[:4] + ["ins1", "ins2"] + old[4:]
    m = build_line_map(_fv(old), _fv(new))
    assert (5, 7) in m
    assert (5, 5) not in m
    assert m.map_new(5) is None


def test_empty_sides():
    assert build_line_map(None, _fv(["a"])).pairs == ()
    assert build_line_map(_fv([]), _fv([])).pairs == ()


def _edit(draw, base):
    out = list(base)
    for _ in range(draw(st.integers(0, 8))):
        op = draw(st.sampled_from(["ins", "del", "sub"]))
        pos = draw(st.integers(0, len(out)))
        if op == "ins" or not out:
            out.insert(pos, draw(st.sampled_from(["new", "x", "}", ""])) + str(draw(st.integers(0, 3))))
        elif op == "del":
            del out[min(pos, len(out) - 1)]
        else:
            out[min(pos, len(out) - 1)] = "changed"
    return out


@st.composite
def file_pairs(draw, max_lines=50):
    base = draw(st.lists(st.sampled_from(["a", "b", "c", "}", "", "x = 1;"]), max_size=max_lines))
    return base, _edit(draw, base)


@given(file_pairs())
def test_line_map_is_an_optimal_alignment(pair):
    old, new = pair
    m = build_line_map(_fv(old), _fv(new))
    length, count, some_lcs = lcs_oracle(old, new)
    assert is_common_subsequence(m.pairs, old, new)
    assert len(m) == length
    if count == 1:
        assert list(m.pairs) == some_lcs
    olds = [o for o, _ in m.pairs]
    news = [n for _, n in m.pairs]
    assert olds == sorted(set(olds)) and news == sorted(set(news))


@given(file_pairs())
def test_unmapped_lines_are_the_alignment_changes(pair):
    old, new = pair
    m = build_line_map(_fv(old), _fv(new))
    rows = align(old, new)
    assert len(old) - len(m) == sum(r.op == "-" for r in rows)
    assert len(new) - len(m) == sum(r.op == "+" for r in rows)
    assert [r.text for r in rows if r.op != "+"] == old
    assert [r.text for r in rows if r.op != "-"] == new


@given(st.lists(st.text(st.sampled_from("abc"), min_size=1, max_size=3), max_size=40, unique=True),
       st.data())
def test_unique_lines_match_the_oracle_exactly(base, data):
    new = [ln for ln in base if data.draw(st.booleans())]
    new[data.draw(st.integers(0, len(new))):0] = ["inserted"]
    _, count, lcs = lcs_oracle(base, new)
    assert count == 1  # a deletion-only edit of unique lines has a single alignment
    assert list(build_line_map(_fv(base), _fv(new)).pairs) == lcs


def test_file_patch_json_shape():
    [p] = parse_unified(ONE_LINE)
    d = p.to_dict()
    assert set(d) == {"old_path", "new_path", "is_binary", "hunks"}
    assert d["hunks"][0]["lines"][1] == {"kind": "deleted", "old_no": 3, "new_no": None, "text": "b"}
    assert isinstance(p, FilePatch)
