import json
import math

import numpy as np
import pytest

from edgesym.alternatives import SkewNormal, SkewT
from edgesym.edgeworth import EdgeworthModel
from edgesym.errors import GrammarError
from edgesym.montecarlo import (
    CSV_HEADER,
    Cell,
    Scenario,
    SimulationSpec,
    TestConfig,
    load_spec,
    model_string,
    parse_model,
    run,
    spec_from_dict,
    stream,
    table1_spec,
    table2_spec,
)
from edgesym.statistics import run_test


def small_spec(**kw):
    base = dict(
        scenarios=[Scenario("G0", EdgeworthModel("gaussian", xi=0.0)),
                   Scenario("SN2", SkewNormal(2.0))],
        tests=[TestConfig("b1", "S2_b1"), TestConfig("dag", "T_dagger", "two", "specified")],
        n=50, N=200, master_seed=11,
    )
    base.update(kw)
    return SimulationSpec(**base)


def test_single_cell_matches_direct_loop():
    spec = SimulationSpec([Scenario("G0", EdgeworthModel("gaussian", xi=0.0))],
                          [TestConfig("b1", "S2_b1")], n=30, N=100, master_seed=5)
    cell = run(spec).cell("G0", "b1")
    rejections = 0
    for r in range(100):
        x = EdgeworthModel("gaussian", xi=0.0).rvs(30, stream(5, 0, r))
        rejections += run_test("S2_b1", x).p_two_sided <= 0.05
    assert cell.rejections == rejections
    assert cell.N == 100 and cell.skipped == 0
    assert cell.frequency == rejections / 100
    assert cell.stderr == pytest.approx(math.sqrt(cell.frequency * (1 - cell.frequency) / 100))


def test_same_seed_same_report():
    a, b = run(small_spec()), run(small_spec())
    assert a.to_csv() == b.to_csv()
    assert a.digests == b.digests
    assert run(small_spec(master_seed=12)).digests != a.digests


def test_csv_identical_across_workers():
    a, b = run(small_spec(), workers=1), run(small_spec(), workers=2)
    assert a.to_csv() == b.to_csv()
    assert a.to_csv().splitlines()[0] == ",".join(CSV_HEADER)


def test_samples_shared_across_tests():
    one = run(small_spec(tests=[TestConfig("b1", "S2_b1")]))
    two = run(small_spec())
    assert one.digests == two.digests
    assert one.cell("SN2", "b1") == two.cell("SN2", "b1")


def test_table_grids():
    t1 = table1_spec(N=100)
    assert [s.label for s in t1.scenarios] == ["SN(0)", "SN(0.1)", "SN(0.2)",
                                              "SL(0)", "SL(0.1)", "SL(0.2)"]
    assert len(t1.tests) == 7 and all(t.sided == "one" for t in t1.tests)
    t2 = table2_spec(N=100)
    labels = [s.label for s in t2.scenarios]
    assert "St(2,0)" in labels and "St(8,6)" in labels and "SN(3)" in labels
    assert len(labels) == 16 and all(t.sided == "two" for t in t2.tests)


def test_skips_are_counted_and_flagged():
    spec = SimulationSpec([Scenario("St1", SkewT(1, 0.0))],
                          [TestConfig("dag", "T_dagger", "two", "specified"),
                           TestConfig("b1", "S2_b1")], n=20, N=100, master_seed=3)
    rep = run(spec)
    dag = rep.cell("St1", "dag")
    assert dag.skipped == 100 and dag.N == 0 and dag.flagged
    assert dag.skip_reasons == {"NoCenter": 100}
    assert math.isnan(dag.frequency)
    assert not rep.cell("St1", "b1").flagged


def test_flag_threshold():
    def cell(skipped):
        return Cell("s", "t", 10, 1000 - skipped, 0, skipped, 0.0, 1.0, {})
    assert not cell(10).flagged
    assert cell(11).flagged


def test_skip_pairs_removed():
    rep = run(small_spec(skip={("G0", "dag")}))
    with pytest.raises(KeyError):
        rep.cell("G0", "dag")
    assert len(rep.cells) == 3


@pytest.mark.parametrize("change", [dict(N=99), dict(n=9), dict(alpha=1.0), dict(alpha=0.0),
                                    dict(master_seed=-1), dict(tests=[])])
def test_invalid_spec(change):
    with pytest.raises(ValueError):
        small_spec(**change)


def test_duplicate_labels():
    with pytest.raises(ValueError):
        small_spec(tests=[TestConfig("x", "S2_b1"), TestConfig("x", "T_dagger")])


def test_bad_test_config():
    for kw in (dict(test_id="nope"), dict(test_id="S1", sided="both"),
               dict(test_id="S1", location="mode")):
        with pytest.raises(ValueError):
            TestConfig("x", **kw)


def test_spec_round_trip(tmp_path):
    spec = small_spec(skip={("G0", "dag")})
    path = tmp_path / "spec.json"
    path.write_text(json.dumps(spec.to_dict()))
    again = load_spec(path)
    assert again.to_dict() == spec.to_dict()
    assert run(again).to_csv() == run(spec).to_csv()


def test_spec_from_dict_shorthand():
    spec = spec_from_dict({"scenarios": ["skewnormal:1"], "tests": ["S2_b1"], "N": 100})
    assert spec.scenarios[0].model == SkewNormal(1.0)
    assert spec.tests[0].label == "S2_b1"
    with pytest.raises(ValueError):
        spec_from_dict([1, 2])


def test_json_report():
    rep = run(small_spec())
    data = json.loads(rep.to_json())
    assert data["seed"] == 11
    assert set(data["sample_digests"]) == {"G0", "SN2"}
    cell = data["cells"][0]
    assert {"statistic_mean", "statistic_variance", "skip_reasons", "flagged"} <= set(cell)
    assert "wall_time" not in rep.to_csv()


def test_parse_model():
    m = parse_model("gaussian-edgeworth:xi=0.1,theta=2,sigma=3")
    assert (m.xi, m.theta, m.sigma) == (0.1, 2.0, 3.0)
    assert parse_model("student:5-edgeworth:xi=0.05").xi == 0.05
    assert parse_model("skewt:4:2") == SkewT(4.0, 2.0)
    for model in (m, SkewNormal(1.5), SkewT(8, -2.0), EdgeworthModel("laplace", xi=-0.1)):
        assert parse_model(model_string(model)) == model
    for bad in ("gaussian-edgeworth:xi=abc", "gaussian-edgeworth:rho=1", "cauchy-edgeworth:xi=0",
                "gaussian"):
        with pytest.raises(GrammarError):
            parse_model(bad)


def test_stream_independence():
    a = stream(1, 0, 0).standard_normal(1000)
    b = stream(1, 0, 1).standard_normal(1000)
    c = stream(1, 1, 0).standard_normal(1000)
    assert abs(np.corrcoef(a, b)[0, 1]) < 0.15 and abs(np.corrcoef(a, c)[0, 1]) < 0.15
    np.testing.assert_array_equal(a, stream(1, 0, 0).standard_normal(1000))
