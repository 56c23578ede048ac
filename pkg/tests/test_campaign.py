import pytest

from depthgate.campaign import (
    CampaignPlan,
    RunRecord,
    candidate_prefixes,
    default_m_schedule,
    generate_instances,
    load_records,
    prove,
    prove_lower_bound,
    prove_upper_bound,
    table_counts,
    verify_file,
    RUN_LOG,
    MANIFEST,
)
from depthgate.layers import first_layer
from depthgate.network import Network, is_sorting, parse_network
from depthgate.sat import SolverConfig

INTERNAL = SolverConfig()


def test_plan_validation():
    assert CampaignPlan(13, 8).m_schedule == [10, 11, 12, 13]
    assert default_m_schedule(2) == [1, 2]
    with pytest.raises(ValueError):
        CampaignPlan(5, 4, m_schedule=[3, 3, 5])
    with pytest.raises(ValueError):
        CampaignPlan(5, 4, m_schedule=[3, 4])
    with pytest.raises(ValueError):
        CampaignPlan(5, 4, mode="fix3")


def test_candidate_prefixes():
    assert candidate_prefixes(5, 4, "plain")[0].prefix == Network(5)
    assert candidate_prefixes(5, 4, "fix1")[0].prefix.layers == (first_layer(5),)
    fix2 = candidate_prefixes(5, 4, "fix2")
    assert len(fix2) == 6 and all(c.prefix.depth == 2 for c in fix2)
    assert [c.index for c in fix2] == list(range(6))


def test_run_record_roundtrip():
    r = RunRecord(5, 4, "fix2", 3, 5, "UNSAT", 12, 100, 400, "a.cnf")
    assert RunRecord.from_line(r.to_line()) == r
    assert r.to_line().startswith("n=5 d_total=4 mode=fix2 candidate=3 m=5 status=UNSAT")
    with pytest.raises(ValueError):
        RunRecord(5, 4, "fix2", 0, 5, "MAYBE", 0, 0, 0)
    with pytest.raises(ValueError):
        RunRecord(5, 4, "fix2", 0, 5, "SAT", 0, 0, 0)


def test_lower_bound_four_channels():
    v = prove_lower_bound(CampaignPlan(4, 2, "fix2", solver=INTERNAL))
    assert v.kind == "lower" and v.network is None


def test_two_channels_single_candidate():
    v = prove_lower_bound(CampaignPlan(2, 1, "fix2", solver=INTERNAL))
    assert v.kind == "upper" and len(v.results) == 1
    assert v.network == Network(2, (((1, 2),),))


def test_upper_bound_examples():
    v = prove_upper_bound(5, 5, "plain", INTERNAL)
    assert v.kind == "upper" and is_sorting(v.network) and v.network.depth == 5
    v1 = prove_upper_bound(1, 0)
    assert v1.kind == "upper" and v1.network == Network(1)
    v4 = prove_upper_bound(4, 2, "fix1", INTERNAL)
    assert v4.kind == "lower"


def test_unknown_poisons_the_verdict():
    starved = SolverConfig(internal_var_cap=0)
    v = prove(CampaignPlan(4, 2, "fix2", solver=starved))
    assert v.kind == "inconclusive" and v.blockers == [0, 1]


def test_resume_skips_conclusive_records(tmp_path):
    plan = CampaignPlan(5, 4, "fix2", out_dir=tmp_path, solver=INTERNAL)
    first = prove(plan)
    assert first.kind == "lower"
    log = (tmp_path / RUN_LOG).read_text()
    broken = CampaignPlan(5, 4, "fix2", out_dir=tmp_path, solver=SolverConfig("/nonexistent {cnf}"))
    again = prove(broken)
    assert again.kind == "lower"
    assert (tmp_path / RUN_LOG).read_text() == log
    keys = [r.key for r in load_records(tmp_path / RUN_LOG).values()]
    assert keys == sorted(keys)


def test_sat_records_point_to_witnesses(tmp_path):
    v = prove(CampaignPlan(4, 3, "fix1", out_dir=tmp_path, solver=INTERNAL))
    assert v.kind == "upper"
    sat = [r for r in load_records(tmp_path / RUN_LOG).values() if r.status == "SAT" and r.m == 4]
    assert len(sat) == 1
    assert is_sorting(parse_network((tmp_path / sat[0].witness_path).read_text()))


def test_instance_generation_is_deterministic(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    ea = generate_instances(CampaignPlan(7, 5, "fix2", out_dir=a))
    eb = generate_instances(CampaignPlan(7, 5, "fix2", out_dir=b))
    assert (a / MANIFEST).read_bytes() == (b / MANIFEST).read_bytes()
    assert len(ea) == len(eb) == 14 * 4
    for e in ea:
        text = (a / e.cnf_path).read_text()
        assert text == (b / e.cnf_path).read_text()
        assert f"\np cnf {e.vars} {e.clauses}\n" in text


def test_table_small_rows():
    text, ok = table_counts(7)
    assert ok
    rows = {int(l.split()[0]): l.split()[1:] for l in text.splitlines()[1:]}
    assert rows[1][:2] == ["1", "n/a"]
    assert rows[3] == ["4", "2", "4", "2", "2", "ok"]
    assert table_counts(7)[0] == text


def test_verify_file(tmp_path, capsys):
    good = tmp_path / "fig1.net"
    good.write_text("4 3\n1:2 3:4\n1:3 2:4\n2:3\n")
    assert verify_file(good)
    bad = tmp_path / "f4.net"
    bad.write_text("4 1\n1:3 2:4\n")
    assert not verify_file(bad)
    assert "(1,0,0,0)" in capsys.readouterr().out
