"""Text-format round trips and parse failures."""

import pytest

from kmatch.errors import BadVertex
from kmatch.khg import load_khg, load_khg_system, parse_khg, save_khg
from kmatch.oracle import gen_divisibility_barrier, gen_space_barrier


def test_roundtrip(tmp_path):
    cx = gen_space_barrier(8, 3, 1, 3)
    path = tmp_path / "sb.khg"
    save_khg(cx, path)
    back = load_khg(path)
    assert back.level(3) == cx.level(3)
    assert back.universe.part_sizes == cx.universe.part_sizes


def test_roundtrip_with_lower_levels(tmp_path):
    cx = gen_space_barrier(6, 3, 1, 2)
    path = tmp_path / "sb.khg"
    save_khg(cx, path, include_lower=True)
    back = load_khg(path, close=False)  # explicit levels must validate closure
    assert back.level(2) == cx.level(2)


def test_parse_comments_and_names():
    text = """# a tiny instance
khg 1
k 3
parts 2
part A 2: a1 a2   # first part
part B 2: b1 b2
edge a1 a2 b1
"""
    uni, k, edges, names = parse_khg(text)
    assert k == 3 and uni.r == 2
    assert names == ["a1", "a2", "b1", "b2"]
    assert edges[3] == [(0, 1, 2)]


def test_parse_errors():
    with pytest.raises(BadVertex):
        parse_khg("k 3\nparts 1\n")  # missing header
    with pytest.raises(BadVertex):
        parse_khg("khg 1\nk 3\nparts 1\npart A 2: v1\n")  # size mismatch
    with pytest.raises(BadVertex):
        parse_khg("khg 1\nk 3\nparts 1\npart A 1: v1\nedge v1 v2 v3\n")


def test_partite_roundtrip(tmp_path):
    H = gen_divisibility_barrier([5, 3], 3, [(1, 2), (3, 0)])
    path = tmp_path / "div.khg"
    save_khg(H, path)
    back = load_khg_system(path)
    assert back.level(3) == H.level(3)
    assert back.universe.part_labels == ("A", "B")
