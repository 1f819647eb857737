import dataclasses

import pytest
from hypothesis import given, settings, strategies as st

from gstep.model import (DanglingReferenceError, InvariantViolation, SystemFormatError, apply_opoi,
                         default_big_m, dump_system, load_system, parse_system, save_system,
                         validate_system)

from conftest import ALL, FIXTURES, system

MINIMAL = """\
name: one
config: {epochs: 1, years_per_epoch: 1}
zones:
- {id: Z}
generators:
- {id: G, zone: Z, tech: gas_ccgt, p_max: 100.0, var_cost: 30.0}
"""


def test_minimal_system(tmp_path):
    p = tmp_path / "s.yaml"
    p.write_text(MINIMAL)
    m = load_system(p)
    assert len(m.zones) == 1 and len(m.generators) == 1
    assert validate_system(m) == []


def test_unknown_zone_in_line_is_dangling(tmp_path):
    p = tmp_path / "s.yaml"
    p.write_text(MINIMAL + "lines:\n- {id: L, from_zone: Z, to_zone: Q, existing_capacity: 5.0, susceptance: 1.0}\n")
    with pytest.raises(DanglingReferenceError) as exc:
        load_system(p)
    assert "line:L" in str(exc.value) and "zone Q" in str(exc.value)


def test_parse_error_carries_line(tmp_path):
    p = tmp_path / "s.yaml"
    p.write_text(MINIMAL.replace("p_max: 100.0", "p_max: lots"))
    with pytest.raises(SystemFormatError) as exc:
        load_system(p)
    assert exc.value.line == 6
    assert "p_max" in str(exc.value)


def test_unknown_field_rejected():
    with pytest.raises(SystemFormatError, match="colour"):
        parse_system(MINIMAL.replace("tech: gas_ccgt", "tech: gas_ccgt, colour: red"))


def test_isone_offshore_projects():
    m = load_system(FIXTURES / "isone" / "system_single_rev.yaml")
    assert len(m.offshore) == 6
    cap = {g.zone: g.p_max for g in m.generators if g.tech == "offshore_wind"}
    assert cap == {"REV": 704.0, "VINE": 800.0, "PKCTY": 800.0, "COMW": 1232.0, "MFLR1": 804.0, "MFLR2": 400.0}


def test_isone_split_rev_merges_back():
    m = system("isone")
    cap = {g.zone: g.p_max for g in m.generators if g.tech == "offshore_wind"}
    assert cap["REV_CT"] + cap["REV_RI"] == 704.0
    merged = apply_opoi(m)
    assert sorted(z.id for z in merged.offshore) == ["COMW", "MFLR1", "MFLR2", "PKCTY", "REV", "VINE"]


def test_offshore_without_candidate_is_unreachable():
    m = system("toy3")
    cut = dataclasses.replace(m, lines=tuple(l for l in m.lines if l.id != "WA" and l.id != "WB"))
    assert any(v.rule == "offshore unreachable" and v.entity == "zone:W" for v in validate_system(cut))


def test_storage_dod_out_of_range():
    m = system("toy2")
    bad = dataclasses.replace(m, storage=dataclasses.replace(m.storage, dod=1.2))
    vs = validate_system(bad)
    assert "dod out of range" in [v.rule for v in vs]
    assert all(v.entity == "storage" for v in vs)


@pytest.mark.parametrize("field,value,rule", [
    ("flex_fraction", 1.5, "flex_fraction out of range"),
    ("discount_rate", 0.0, "discount_rate must be positive"),
    ("big_m", 1.0, "big_m too small"),
])
def test_config_violations(field, value, rule):
    m = system("toy3")
    bad = dataclasses.replace(m, config=dataclasses.replace(m.config, **{field: value}))
    assert rule in [v.rule for v in validate_system(bad)]


def test_invariant_violation_raised_on_load(tmp_path):
    p = tmp_path / "s.yaml"
    p.write_text(MINIMAL.replace("p_max: 100.0", "p_max: 100.0, p_min: 150.0"))
    with pytest.raises(InvariantViolation, match="capacity limits out of order"):
        load_system(p)


@pytest.mark.parametrize("name", ALL)
def test_fixtures_validate_and_round_trip(name, tmp_path):
    m = system(name)
    assert validate_system(m) == []
    assert validate_system(m) == []  # idempotent
    p = save_system(m, tmp_path / name / "system.yaml")
    if m.scenarios:
        (p.parent / m.scenarios).write_bytes((FIXTURES / name / m.scenarios).read_bytes())
    again = load_system(p)
    assert again == m
    assert again.content_hash() == m.content_hash()
    assert dump_system(again) == dump_system(m)


def test_default_big_m():
    m = system("toy3")
    # 2 pi * max candidate AC susceptance * 1.1
    assert default_big_m(m) == pytest.approx(2 * 3.141592653589793 * 400.0 * 1.1)


def test_content_hash_sees_changes():
    m = system("toy2")
    other = dataclasses.replace(m, config=dataclasses.replace(m.config, scc=190.0))
    assert other.content_hash() != m.content_hash()


@settings(max_examples=40, deadline=None)
@given(st.floats(0, 1), st.floats(0, 0.99), st.floats(0, 0.99))
def test_storage_ranges_property(eta, dod, kappa):
    m = system("toy2")
    s = dataclasses.replace(m.storage, eta_ch=eta, dod=dod, degradation=kappa)
    rules = {v.rule for v in validate_system(dataclasses.replace(m, storage=s))}
    assert ("efficiency out of range" in rules) == (eta == 0)
    assert "dod out of range" not in rules and "degradation out of range" not in rules
