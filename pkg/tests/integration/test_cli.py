import math

import pytest
import yaml

from app.main import EXIT_CONFIG_ERROR, EXIT_IO_ERROR, EXIT_OK, main
from app.services.export import read_rows

SPAN = """\
node a a1,a2
node b b1,b2
node c g
statement c holds p=2 q=2.4 alpha=0.5 n=2
edge c a g=a1
edge c b g=b1
"""

PROBE = {
    "center": [0.5, 0.5],
    "radii": [0.4, 0.25, 0.125, 0.0625],
    "offsets": [[1, 0], [2, 0], [3, 0], [4, 0]],
}

# u = x2 with a coefficient depending on x1 only: the affine data is the exact discrete minimizer.
SWEEP = {
    "sweep": {"p": 2.0, "n": 2, "q": [2.2, 2.8]},
    "coefficient": {"kind": "distance_power", "alpha": 0.5},
    "grid": {"m": 32},
    "boundary": {"kind": "affine", "c1": 0.0, "c2": 1.0},
    "metrics_probe": PROBE,
    "plot": {"svg": True},
}


def write_config(path, data):
    path.write_text(yaml.safe_dump(data), encoding="utf-8")
    return path


def run(command, config, out, *extra):
    return main([command, "--config", str(config), "--out", str(out), *extra])


def test_classify_writes_one_row_per_regime(tmp_path):
    config = write_config(tmp_path / "classify.yaml", {"tuples": [
        {"p": 2.0, "q": 2.0, "alpha": 0.5, "n": 2},
        {"p": 2.0, "q": 2.4, "alpha": 0.5, "n": 2},
        {"p": 2.0, "q": 3.0, "alpha": 1.0, "n": 3, "family": "double_phase"},
        {"p": 2.0, "q": 3.0, "alpha": 0.5, "n": 2},
    ]})
    assert run("classify", config, tmp_path / "out") == EXIT_OK
    frame = read_rows(tmp_path / "out" / "verdicts.csv", "verdicts")
    assert len(frame) == 4
    assert frame["regime"].nunique() == 4
    assert frame["margin"][1] == pytest.approx(0.05)


def test_classify_random_draws_follow_the_seed(tmp_path):
    config = write_config(tmp_path / "classify.yaml", {"random_draws": {"count": 5}})
    assert run("classify", config, tmp_path / "a", "--seed", "3") == EXIT_OK
    assert run("classify", config, tmp_path / "b", "--seed", "3") == EXIT_OK
    assert run("classify", config, tmp_path / "c", "--seed", "4") == EXIT_OK
    first = (tmp_path / "a" / "verdicts.csv").read_bytes()
    assert first == (tmp_path / "b" / "verdicts.csv").read_bytes()
    assert first != (tmp_path / "c" / "verdicts.csv").read_bytes()


@pytest.mark.parametrize("text", [
    "tuples:\n  - {p: 2.0, q: 2.4, alpha: 0.5, n: 2, colour: red}\n",
    "tuples: [\n",
    "tuples: []\n",
    "- just a list\n",
    "tuples:\n  - {p: 2.0, q: 1.0, alpha: 0.5, n: 2}\n",
])
def test_bad_config_exits_with_config_error(tmp_path, text):
    config = tmp_path / "classify.yaml"
    config.write_text(text, encoding="utf-8")
    assert run("classify", config, tmp_path / "out") == EXIT_CONFIG_ERROR
    assert not (tmp_path / "out" / "verdicts.csv").exists()


def test_missing_config_exits_with_io_error(tmp_path):
    assert run("classify", tmp_path / "absent.yaml", tmp_path / "out") == EXIT_IO_ERROR


def test_moser_sequence_csv(tmp_path):
    config = write_config(tmp_path / "moser.yaml",
                          {"t0": 2.0, "sigma": 1.0, "p": 2.0, "gamma": 1.0, "q": 2.5, "max_iters": 5})
    assert run("moser", config, tmp_path / "out") == EXIT_OK
    frame = read_rows(tmp_path / "out" / "moser.csv", "moser")
    assert list(frame["i"]) == [0, 1, 2, 3, 4, 5]
    assert list(frame["t_i"]) == [2.0, 2.5, 3.0, 3.5, 4.0, 4.5]


@pytest.mark.parametrize("checker, expected", [
    ({"kind": "accept_all"}, "class 0: a.a1 b.b1 c.g\nclass 1: a.a2\nclass 2: b.b2\n"),
    ({"kind": "threshold"}, "class 0: a.a1 b.b1 c.g\nclass 1: a.a2\nclass 2: b.b2\n"),
    ({"kind": "reject_ids", "ids": ["a"]}, "class 0: b.b1 c.g\nclass 1: b.b2\n"),
])
def test_colimit_of_span(tmp_path, checker, expected):
    (tmp_path / "span.dag").write_text(SPAN, encoding="utf-8")
    config = write_config(tmp_path / "colimit.yaml", {"dag": "span.dag", "checker": checker})
    assert run("colimit", config, tmp_path / "out") == EXIT_OK
    assert (tmp_path / "out" / "colimit.txt").read_text() == expected


def test_colimit_with_nothing_validated(tmp_path):
    (tmp_path / "span.dag").write_text(SPAN, encoding="utf-8")
    config = write_config(tmp_path / "colimit.yaml",
                          {"dag": "span.dag", "checker": {"kind": "reject_ids", "ids": ["a", "b", "c"]}})
    assert run("colimit", config, tmp_path / "out") == EXIT_CONFIG_ERROR


def test_sweep_on_affine_data(tmp_path):
    config = write_config(tmp_path / "sweep.yaml", SWEEP)
    out = tmp_path / "out"
    assert run("sweep", config, out) == EXIT_OK

    frame = read_rows(out / "sweep.csv", "sweep")
    assert list(frame["q"]) == [2.2, 2.8]
    assert frame["converged"].all()
    assert list(frame["holder_exponent"]) == [1.5, 1.5]
    assert all(math.isinf(s) for s in frame["s_order"])
    assert list(frame["C"]) == [0.0, 0.0]

    assert (out / "holder.dat").read_text() == "2.2 1.5\n2.8 1.5\n"
    assert (out / "s_order.dat").read_text() == "2.2 inf\n2.8 inf\n"
    assert (out / "sweep.svg").read_text().startswith("<svg")
    assert (out / "run.log").stat().st_size > 0
    assert "ghostlab_solves_total" in (out / "metrics.prom").read_text()


def test_sweep_metric_failure_keeps_the_solver_verdict(tmp_path):
    # three distinct offset lengths are too few for the Caccioppoli fit
    probe = {**PROBE, "offsets": [[1, 0], [1, 0], [2, 0], [4, 0]]}
    config = write_config(tmp_path / "sweep.yaml", {**SWEEP, "metrics_probe": probe})
    out = tmp_path / "out"
    assert run("sweep", config, out) == EXIT_OK

    frame = read_rows(out / "sweep.csv", "sweep")
    assert frame["converged"].all()
    for column in ("holder_exponent", "holder_fit", "s_order", "C", "residual"):
        assert frame[column].isna().all()
    assert (out / "holder.dat").read_text() == "2.2 nan\n2.8 nan\n"


def test_sweep_is_reproducible_across_thread_counts(tmp_path):
    config = write_config(tmp_path / "sweep.yaml", SWEEP)
    assert run("sweep", config, tmp_path / "one") == EXIT_OK
    assert run("sweep", config, tmp_path / "two", "--threads", "2") == EXIT_OK
    for name in ("sweep.csv", "holder.dat", "s_order.dat", "sweep.svg"):
        assert (tmp_path / "one" / name).read_bytes() == (tmp_path / "two" / name).read_bytes()


def test_metrics_on_saved_field(tmp_path):
    config = write_config(tmp_path / "sweep.yaml", {**SWEEP, "save_fields": True})
    assert run("sweep", config, tmp_path / "sweep") == EXIT_OK
    fields = tmp_path / "sweep" / "fields"
    assert (fields / "field_q2.2.csv").exists()
    assert (fields / "history_q2.8.csv").exists()

    metrics = write_config(tmp_path / "metrics.yaml", {
        "field": "sweep/fields/field_q2.2.csv",
        "growth": {"p": 2.0, "q": 2.2, "alpha": 0.5, "n": 2, "family": "double_phase"},
        "metrics_probe": PROBE,
    })
    assert run("metrics", metrics, tmp_path / "out") == EXIT_OK
    frame = read_rows(tmp_path / "out" / "metrics.csv", "metrics")
    assert frame["regime"][0] == "SharpSchauderHolds"
    assert frame["holder_exponent"][0] == 1.5
    assert math.isinf(frame["s_order"][0])


def test_sweep_must_straddle_the_threshold(tmp_path):
    config = write_config(tmp_path / "sweep.yaml", {**SWEEP, "sweep": {"p": 2.0, "n": 2, "q": [2.1, 2.3]}})
    out = tmp_path / "out"
    assert run("sweep", config, out) == EXIT_CONFIG_ERROR
    assert not (out / "sweep.csv").exists()
    assert (out / "run.log").exists()
    assert (out / "metrics.prom").exists()
