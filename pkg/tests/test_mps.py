import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from gstep.milp.instance import BINARY, InstanceBuilder
from gstep.milp.mps import MpsFormatError, read_mps, structural_diff, write_mps

from conftest import ALL, instance, modes


def test_empty_instance_is_header_only():
    inst = InstanceBuilder("empty").finish()
    text = write_mps(inst)
    sections = [l.split()[0] for l in text.splitlines() if l and not l[0] in " *"]
    assert sections == ["NAME", "ROWS", "COLUMNS", "RHS", "BOUNDS", "ENDATA"] or sections[-1] == "ENDATA"
    back = read_mps(None, text=text)
    assert back.n_vars == 0 and back.n_rows == 0


def _small():
    B = InstanceBuilder("small model")
    x = B.var("x", (1,), 0.0, 4.5, cost=1.25)
    y = B.var("y", ("a", 2), -np.inf, np.inf, cost=-0.1)
    z = B.var("z", (0,), kind=BINARY, cost=1e-7 / 3)
    w = B.var("w", (), 2.0, 2.0)
    B.row([(x, 1.0), (y, 2.0)], "L", 10.0, "cap", "cap[1]")
    B.row([(x, 1.0), (z, -3.0)], "G", -1.0 / 7, "link", "link[1]")
    B.row([(y, 1.0), (w, 1.0)], "E", 0.0, "eq", "eq[a]")
    B.offset = 12.5
    return B.finish()


def test_small_round_trip_is_exact(tmp_path):
    inst = _small()
    p = tmp_path / "m.mps"
    write_mps(inst, p)
    back = read_mps(p)
    assert structural_diff(inst, back) == []
    assert back.variables[2].kind == BINARY


def test_binary_markers_written():
    text = write_mps(_small())
    assert "'INTORG'" in text and "'INTEND'" in text


def test_comments_are_optional():
    text = "\n".join(l for l in write_mps(_small()).splitlines() if not l.startswith("*"))
    back = read_mps(None, text=text)
    inst = _small()
    assert back.A.shape == inst.A.shape
    assert np.array_equal(back.c, inst.c) and np.array_equal(back.rhs, inst.rhs)
    assert np.array_equal(back.binary_mask, inst.binary_mask)


@pytest.mark.parametrize("mangle", [
    lambda t: t.replace("ROWS", "ROWZ"),
    lambda t: t.replace(" L  R0000001", " Q  R0000001"),
    lambda t: t.replace("ENDATA", ""),
    lambda t: t.replace("C0000001  R0000001", "C0000001  R9999999"),
    lambda t: t.replace("C0000001  R0000001  1", "C0000001  R0000001  one"),
])
def test_malformed_input(mangle):
    text = "\n".join(l for l in write_mps(_small()).splitlines() if not l.startswith("*"))
    bad = mangle(text)
    assert bad != text
    with pytest.raises(MpsFormatError):
        read_mps(None, text=bad)


@pytest.mark.parametrize("name", ALL)
def test_fixture_round_trip(name, tmp_path):
    for mode in modes(name):
        inst = instance(name, mode)
        p = tmp_path / f"{mode}.mps"
        write_mps(inst, p)
        assert structural_diff(inst, read_mps(p)) == []


@settings(max_examples=40, deadline=None)
@given(st.lists(st.floats(-1e12, 1e12, allow_nan=False, allow_subnormal=False), min_size=3, max_size=3))
def test_coefficient_round_trip(vals):
    B = InstanceBuilder("p")
    a = B.var("a", (0,), cost=vals[0])
    B.row([(a, vals[1] or 1.0)], "L", vals[2], "r", "r[0]")
    inst = B.finish()
    assert structural_diff(inst, read_mps(None, text=write_mps(inst))) == []
