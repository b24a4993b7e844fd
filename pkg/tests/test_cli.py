import json
import subprocess
import sys

import pytest

from motorparams import batch, cli, corpus

PLATE_FLAGS = ["--voltage", "400", "--freq", "50", "--speed", "1470", "--current", "20", "--power-kw", "10",
               "--pf", "0.85", "--eff", "0.9", "--tb", "2.5", "--tlr", "2.0", "--ilr", "6.0"]


@pytest.fixture
def small_corpus(tmp_path):
    path = tmp_path / "c.csv"
    assert cli.main(["synth", "--count", "4", "--seed", "2", "--out", str(path)]) == 0
    return path


def test_synth_writes_loadable_corpus(small_corpus):
    records, report = corpus.load_corpus(small_corpus)
    assert report.retained == 4 and all(r.truth is not None for r in records)


def test_batch_then_report_agree(tmp_path, small_corpus, capsys):
    out = tmp_path / "r.csv"
    stats_path = tmp_path / "s.json"
    code = cli.main(["batch", "--corpus", str(small_corpus), "--algorithm", "NRGA", "--generations", "2",
                     "--out", str(out), "--stats-out", str(stats_path), "--report-format", "json"])
    assert code == 0
    printed = batch.stats_from_json(capsys.readouterr().out)[0]
    assert batch.CorpusStats.from_json(stats_path.read_text()) == printed
    assert cli.main(["report", str(out), "--format", "json"]) == 0
    assert batch.stats_from_json(capsys.readouterr().out)[0] == printed
    assert printed.algorithm == "Hybrid NR-GA" and printed.overall.n_motors == 4


def test_batch_synthetic_markdown(capsys):
    assert cli.main(["batch", "--synthetic", "2", "--algorithm", "LM", "--standard", "NEMA"]) == 0
    text = capsys.readouterr().out
    assert "| Levenberg-Marquardt | - | - | - |" in text


def test_estimate_from_flags_json(tmp_path):
    out = tmp_path / "e.json"
    assert cli.main(["estimate", *PLATE_FLAGS, "--algorithm", "DNR", "--out", str(out)]) == 0
    data = json.loads(out.read_text())
    assert set(data["params"]) == {"r_s", "x_s", "x_m", "r_r1", "x_r1", "r_r2", "x_r2", "r_c"}
    assert len(data["residuals"]) == 6 and data["algorithm"] == "DNR"


def test_estimate_from_csv_text(small_corpus, capsys):
    assert cli.main(["estimate", "--csv", str(small_corpus), "--algorithm", "LM", "--max-iter", "5"]) == 0
    assert capsys.readouterr().out.startswith("Levenberg-Marquardt:")


def test_config_file_overridden_by_flags(tmp_path):
    cfg_file = tmp_path / "run.cfg"
    cfg_file.write_text("# solver settings\nalgorithm = LM\nmax_iter = 7\nlambda0 = 0.5\nstrategy = gain-ratio\n"
                        "pop = 12\npool = 8\n\n")
    args = cli.build_parser().parse_args(["batch", "--config", str(cfg_file), "--max-iter", "9", "--kr", "0.5"])
    cfg = cli.build_run_config(cli.merged_options(args))
    assert cfg.algorithm == "LM"
    assert cfg.descent.max_iterations == 9
    assert cfg.descent.damping.lambda0 == 0.5 and cfg.descent.damping.strategy.value == "gain-ratio"
    assert cfg.descent.restrictions.k_r == 0.5


def test_hybrid_sizes_from_flags():
    args = cli.build_parser().parse_args(["batch", "--algorithm", "DNRGA", "--pop", "10", "--pool", "6",
                                          "--elite", "1", "--crossover-fraction", "0.5", "--generations", "4"])
    h = cli.build_run_config(cli.merged_options(args)).hybrid
    assert (h.n_pop, h.n_pool, h.n_elite, h.crossover_fraction, h.max_generations) == (10, 6, 1, 0.5, 4)


@pytest.mark.parametrize("argv", [
    ["batch", "--bogus"],
    ["batch"],
    ["estimate", "--voltage", "400"],
    ["batch", "--synthetic", "2", "--algorithm", "SA"],
    ["batch", "--synthetic", "2", "--algorithm", "GA", "--pop", "4"],
    ["batch", "--synthetic", "2", "--strategy", "fast"],
    [],
])
def test_usage_errors_exit_1(argv):
    with pytest.raises(SystemExit) as exc:
        sys.exit(cli.main(argv))
    assert exc.value.code == 1


def test_bad_config_file_exits_1(tmp_path):
    bad = tmp_path / "bad.cfg"
    bad.write_text("colour = blue\n")
    assert cli.main(["batch", "--synthetic", "1", "--config", str(bad)]) == 1
    assert cli.main(["batch", "--synthetic", "1", "--config", str(tmp_path / "missing.cfg")]) == 1


def test_parse_failure_exits_2(tmp_path):
    bad = tmp_path / "bad.csv"
    bad.write_text(",".join(corpus.COLUMNS) + "\nm1,IEC,400,50,1470,20,10,x,0.9,2.5,2.0,6.0,4\n")
    assert cli.main(["batch", "--corpus", str(bad)]) == 2
    assert cli.main(["estimate", "--csv", str(bad)]) == 2


def test_empty_corpus_succeeds(tmp_path, capsys):
    empty = tmp_path / "empty.csv"
    assert cli.main(["synth", "--count", "0", "--out", str(empty)]) == 0
    assert cli.main(["batch", "--corpus", str(empty), "--report-format", "json"]) == 0
    stats = batch.stats_from_json(capsys.readouterr().out)[0]
    assert stats.overall.n_motors == 0 and stats.overall.convergence_rate is None


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "motorparams", "--help"], capture_output=True, text=True)
    assert res.returncode == 0 and "estimate" in res.stdout
