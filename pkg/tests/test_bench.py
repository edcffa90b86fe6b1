import math
import re

import numpy as np
import pytest

from gsslnoise import algorithms as alg
from gsslnoise.bench import (
    DEFAULT_ALGORITHMS,
    AffinitySpec,
    AggregateRow,
    AlgorithmSpec,
    ConfigError,
    DatasetSpec,
    ExperimentRecord,
    GridConfig,
    aggregate,
    build_config,
    emit_report,
    parse_config,
    read_aggregate_csv,
    read_records_csv,
    render_markdown,
    run_grid,
    write_aggregate_csv,
    write_records_csv,
)
from gsslnoise.bench.cli import cli
from gsslnoise.bench.config import parse_algorithms, parse_seeds
from gsslnoise.noise import NoiseSpec, make_label_state

SMALL = dict(datasets=(DatasetSpec("digit1", 60, 8),), affinities=(AffinitySpec(k=5),))


def rec(seed, acc, **kw):
    base = dict(dataset="g241c", label_fraction=0.1, noise_rate=0.0, affinity="mknn(k=15)",
                algorithm="gfhf", alpha=None, mu=None, p=None)
    base.update(kw)
    return ExperimentRecord(seed=seed, accuracy=acc, **base)


# grid

def test_single_cell():
    cfg = GridConfig(seeds=(0,), label_fractions=(0.5,), noise_rates=(0.1,),
                     algorithms=(AlgorithmSpec("gfhf"),), **SMALL)
    assert cfg.cell_count == 1
    records = run_grid(cfg)
    assert len(records) == 1 and not records[0].failed
    assert 0.0 <= records[0].accuracy <= 1.0


def test_four_dataset_cell_count():
    cfg = GridConfig(datasets=tuple(DatasetSpec(n) for n in ("g241c", "g241n", "digit1", "csv:coil2.csv")))
    assert len(DEFAULT_ALGORITHMS) == 6
    assert cfg.cell_count == 20 * 4 * 4 * 5 * 1 * 6 == 9600


def test_repeat_run_identical():
    cfg = GridConfig(seeds=(0, 1), label_fractions=(0.2,), noise_rates=(0.0, 0.2), **SMALL)
    a = [r.accuracy for r in run_grid(cfg)]
    b = [r.accuracy for r in run_grid(cfg)]
    assert a == b


def test_workers_do_not_change_records():
    cfg = GridConfig(seeds=(0, 1, 2), label_fractions=(0.2,), noise_rates=(0.0, 0.35), **SMALL)
    par = GridConfig(**{**cfg.__dict__, "workers": 3})
    assert (write_records_csv(run_grid(cfg), timing=False)
            == write_records_csv(run_grid(par), timing=False))


def test_failed_cells_are_recorded():
    # 8 instances at 10% give a single label for two classes
    cfg = GridConfig(seeds=(0,), datasets=(DatasetSpec("g241c", 8, 2),), label_fractions=(0.1, 0.5),
                     noise_rates=(0.0,), affinities=(AffinitySpec(k=3, mutual=False),),
                     algorithms=(AlgorithmSpec("gfhf"), AlgorithmSpec("lgc", alpha=0.5)))
    records = run_grid(cfg)
    assert len(records) == cfg.cell_count == 4
    failed = [r for r in records if r.failed]
    assert len(failed) == 2 and all(r.label_fraction == 0.1 for r in failed)
    assert all(math.isnan(r.accuracy) and "NoiseError" in r.error for r in failed)
    rows = aggregate(records)
    bad = [r for r in rows if r.label_fraction == 0.1]
    assert all(r.missing and r.n_failed == 1 and math.isnan(r.mean) for r in bad)


def test_graph_reuse_is_exact():
    cfg = GridConfig(seeds=(0, 1), label_fractions=(0.2,), noise_rates=(0.0, 0.2), **SMALL)
    records = run_grid(cfg)
    ds_spec, aff = cfg.datasets[0], cfg.affinities[0]
    for r in records:
        dataset = ds_spec.load(cfg.seed_root)
        graph = aff.build(dataset)  # fresh graph, empty cache
        state = make_label_state(NoiseSpec(r.seed, r.label_fraction, r.noise_rate), dataset)
        spec = AlgorithmSpec(r.algorithm, r.alpha, r.mu, r.p)
        pred = alg.predict(spec.run(graph, state), state, graph)
        assert alg.accuracy(pred, dataset.truth, state) == r.accuracy


@pytest.mark.parametrize("kw", [
    dict(seeds=()),
    dict(label_fractions=(0.0,)),
    dict(noise_rates=(1.0,)),
    dict(workers=0),
    dict(seeds=(1, 1)),
    dict(algorithms=(AlgorithmSpec("gfhf"), AlgorithmSpec("gfhf"))),
])
def test_config_validation(kw):
    with pytest.raises(ConfigError):
        GridConfig(**kw)


@pytest.mark.parametrize("kw", [
    dict(name="svm"), dict(name="lgc"), dict(name="gfhf", alpha=0.5),
    dict(name="lgc", alpha=1.0), dict(name="gtam", mu=-1.0), dict(name="le", p=0.0),
])
def test_algorithm_spec_validation(kw):
    with pytest.raises(ConfigError):
        AlgorithmSpec(**kw)


# aggregation

def test_two_point_aggregate():
    (row,) = aggregate([rec(0, 0.9), rec(1, 1.0)])
    assert row.mean == pytest.approx(0.95)
    assert row.std == pytest.approx(math.sqrt(0.005), abs=1e-15)
    assert row.std == pytest.approx(0.0707, abs=1e-4)
    assert row.n_seeds == 2 and row.n_failed == 0


def test_single_seed_std_zero():
    (row,) = aggregate([rec(3, 0.7)])
    assert row.std == 0.0 and row.mean == 0.7


def test_two_pass_oracle_and_order_invariance():
    rng = np.random.default_rng(8)
    vals = rng.uniform(0.4, 1.0, size=20)
    records = [rec(i, float(v)) for i, v in enumerate(vals)]
    (row,) = aggregate(records)
    mean = sum(vals) / 20
    var = sum((v - mean) ** 2 for v in vals) / 19
    assert abs(row.mean - mean) <= 1e-12
    assert abs(row.std - math.sqrt(var)) <= 1e-12
    for _ in range(5):
        shuffled = [records[i] for i in rng.permutation(20)]
        assert aggregate(shuffled) == [row]


def test_aggregate_groups():
    records = [rec(s, 0.5 + 0.1 * s, noise_rate=r, algorithm=a, alpha=al)
               for s in range(3) for r in (0.0, 0.2) for a, al in (("gfhf", None), ("lgc", 0.9))]
    rows = aggregate(records)
    assert len(rows) == 4
    assert [(r.algorithm, r.noise_rate) for r in rows] == [
        ("gfhf", 0.0), ("gfhf", 0.2), ("lgc", 0.0), ("lgc", 0.2)]
    assert all(r.n_seeds == 3 for r in rows)
    with pytest.raises(ValueError):
        aggregate([])


# serialisation and rendering

def test_records_round_trip(tmp_path):
    records = [rec(0, 0.8125, wall_time=0.25, iterations=3), rec(1, math.nan, error="boom"),
               rec(2, 0.5, algorithm="lgc", alpha=0.1)]
    text = write_records_csv(records, tmp_path / "r.csv")
    assert text.splitlines()[0] == "# gsslnoise-records v1"
    back = read_records_csv(tmp_path / "r.csv")
    assert back[0] == records[0] and back[2] == records[2]
    assert math.isnan(back[1].accuracy) and back[1].error == "boom"
    zeroed = write_records_csv(records, timing=False)
    assert ",0.25," not in zeroed


def test_aggregate_round_trip(tmp_path):
    rows = aggregate([rec(0, 0.9), rec(1, 1.0), rec(0, 0.6, algorithm="le", p=0.2),
                      rec(0, math.nan, algorithm="gtam", mu=99.0, error="x")])
    write_aggregate_csv(rows, tmp_path / "a.csv")
    back = read_aggregate_csv(tmp_path / "a.csv")
    assert len(back) == len(rows)
    for a, b in zip(rows, back):
        if a.missing:
            assert b.missing and math.isnan(b.mean) and b.n_failed == 1
        else:
            assert a == b
    assert "NA" in (tmp_path / "a.csv").read_text()


def test_markdown_unset_markers():
    rows = aggregate([rec(0, 0.9), rec(0, 0.8, algorithm="lgc", alpha=0.9)])
    md = render_markdown(rows)
    assert "| GFHF | --- | --- | --- | 0% | 0.90000±0.00000 |" in md
    assert "| LGC | 0.9 | --- | --- | 0% | 0.80000±0.00000 |" in md


def test_markdown_missing_cell_marker():
    rows = aggregate([rec(0, 0.9), rec(0, 0.8, label_fraction=0.01, algorithm="le", p=0.2)])
    md = render_markdown(rows)
    # GFHF has no 1% cell and LE no 10% cell; both stay in the table as NA
    assert "| GFHF | --- | --- | --- | 0% | 0.90000±0.00000 | NA |" in md
    assert "| LE | --- | --- | 0.2 | 0% | NA | 0.80000±0.00000 |" in md


def test_svg_deterministic(tmp_path):
    rows = aggregate([rec(s, 0.5 + 0.05 * s, noise_rate=r) for s in range(3) for r in (0.0, 0.1)])
    a = emit_report(rows, "svg-plot", tmp_path / "a.svg").read_bytes()
    b = emit_report(rows, "svg-plot", tmp_path / "b.svg").read_bytes()
    assert a == b and a.lstrip().startswith(b"<?xml")
    with pytest.raises(ValueError):
        emit_report(rows, "pdf", tmp_path / "x.pdf")


# table structure of the full default pipeline on g241c

TABLE_HEADER = ("| Algorithm | α | μ | p | Noise | Acc. (10% labeled) | Acc. (5% labeled) "
                "| Acc. (2.5% labeled) | Acc. (1% labeled) |")
TABLE_ROWS = [(alg_, a, m, p) for alg_, a, m, p in (
    ("GFHF", "---", "---", "---"), ("GTAM", "---", "0.0101", "---"), ("GTAM", "---", "99", "---"),
    ("LGC", "0.1", "---", "---"), ("LGC", "0.9", "---", "---"), ("LE", "---", "---", "0.2"))]


def test_default_pipeline_table_structure(g241c_default_grid):
    _, records, _ = g241c_default_grid
    md = render_markdown(aggregate(records)).splitlines()
    assert md[0] == "### g241c, mknn(k=15)"
    assert md[2] == TABLE_HEADER
    body = md[4:]
    body = [line for line in body if line]
    assert len(body) == 5 * 6
    cell = re.compile(r"^\d\.\d{5}±\d\.\d{5}$")
    for i, line in enumerate(body):
        cells = [c.strip() for c in line.strip("|").split("|")]
        rate = ("0%", "5%", "10%", "20%", "35%")[i // 6]
        assert tuple(cells[:4]) == TABLE_ROWS[i % 6]
        assert cells[4] == rate
        assert len(cells) == 9 and all(cell.match(c) for c in cells[5:])


# configuration files

def test_parse_seeds():
    assert parse_seeds("0..3") == (0, 1, 2, 3)
    assert parse_seeds("5, 1, 10..11") == (5, 1, 10, 11)
    for bad in ("3..1", "a", ""):
        with pytest.raises(ConfigError):
            parse_seeds(bad)


def test_parse_algorithms():
    specs = parse_algorithms("gfhf; GTAM lambda=99; lgc alpha=0.99; le p=0.2")
    assert specs == (AlgorithmSpec("gfhf"), AlgorithmSpec("gtam", mu=99.0),
                     AlgorithmSpec("lgc", alpha=0.99), AlgorithmSpec("le", p=0.2))
    with pytest.raises(ConfigError):
        parse_algorithms("lgc beta=1")
    with pytest.raises(ConfigError):
        parse_algorithms("lgc alpha")


def test_config_file():
    text = """
    # a comment
    seeds = 0..4          # five seeds
    datasets = g241n, digit1
    n = 200
    label_fractions = 0.1, 0.05
    noise_rates = 0, 0.2
    k = 10, 15
    algorithms = gfhf; lgc alpha=0.9
    """
    cfg = build_config(parse_config(text))
    assert cfg.seeds == (0, 1, 2, 3, 4)
    assert cfg.datasets == (DatasetSpec("g241n", 200, 241), DatasetSpec("digit1", 200, 241))
    assert [a.k for a in cfg.affinities] == [10, 15]
    assert cfg.cell_count == 5 * 2 * 2 * 2 * 2 * 2


def test_config_errors():
    with pytest.raises(ConfigError, match="unknown key"):
        parse_config("colour = blue")
    with pytest.raises(ConfigError):
        parse_config("just words")
    with pytest.raises(ConfigError):
        build_config({"weights": "rbf"})
    with pytest.raises(ConfigError):
        build_config({"mutual": "maybe"})


# command line

def test_cli_dry_run(capsys):
    assert cli(["run", "--dry-run"]) == 0
    assert capsys.readouterr().out.strip() == "cells: 2400"
    assert cli(["run", "--dry-run", "--seeds", "0..1", "--noise-rates", "0,0.1",
                "--datasets", "g241c,digit1"]) == 0
    assert capsys.readouterr().out.strip() == f"cells: {2 * 2 * 4 * 2 * 6}"


def test_cli_usage_errors(capsys, tmp_path):
    assert cli(["run", "--frobnicate"]) == 1
    assert "usage" in capsys.readouterr().err
    assert cli([]) == 1
    assert cli(["run", "--dry-run", "--seeds", "9..1"]) == 1
    bad = tmp_path / "bad.conf"
    bad.write_text("nonsense = 1\n")
    assert cli(["run", "--config", str(bad), "--dry-run"]) == 1
    assert cli(["generate", "--datasets", "mnist", "--out-dir", str(tmp_path)]) == 1


def test_cli_runtime_failure(tmp_path, capsys):
    assert cli(["report", str(tmp_path / "missing.csv")]) == 2


def test_cli_generate(tmp_path):
    assert cli(["generate", "--datasets", "g241c,digit1", "--n", "40", "--d", "8",
                "--seed-root", "3", "--out-dir", str(tmp_path)]) == 0
    assert sorted(p.name for p in tmp_path.iterdir()) == ["digit1_seed3.csv", "g241c_seed3.csv"]


def test_cli_run_and_report(tmp_path, capsys):
    conf = tmp_path / "one.conf"
    conf.write_text("seeds = 0\ndatasets = digit1\nn = 60\nd = 8\nk = 5\n"
                    "label_fractions = 0.2\nnoise_rates = 0.1\nalgorithms = lgc alpha=0.9\n")
    out = tmp_path / "out"
    assert cli(["run", "--config", str(conf), "--out-dir", str(out), "--format", "markdown",
                "--format", "csv", "--no-timing"]) == 0
    assert (out / "records.csv").exists() and (out / "report.csv").exists()
    capsys.readouterr()
    assert cli(["report", str(out / "records.csv"), "--format", "markdown",
                "--output", str(tmp_path / "t.md")]) == 0
    table = [l for l in (tmp_path / "t.md").read_text().splitlines() if l.startswith("| LGC")]
    assert len(table) == 1
    assert (tmp_path / "t.md").read_text() == (out / "report.md").read_text()


def test_cli_verify(capsys):
    assert cli(["verify"]) == 0
    out = capsys.readouterr().out
    assert out.count("PASS") == 5 and "FAIL" not in out
