import subprocess
import sys

import numpy as np
import pytest

from saccade.brain import save_genome
from saccade.cli import main
from saccade.evolution import random_genome
from saccade.idx import parse_pbm, synthetic_digits

SMALL = ["--population-size", "10", "--initial-length", "600"]


def test_evaluate_oracle_stub(tmp_path, capsys):
    assert main(["evaluate", "--stub", "oracle", "--out", str(tmp_path)]) == 0
    out = capsys.readouterr().out
    assert "overall" in out and "1.000" in out.splitlines()[-1]
    assert (tmp_path / "accuracy.csv").read_text().splitlines()[-1] == "overall,10,1.000000,1.000000"


def test_evolve_zero_generations(tmp_path):
    assert main(["evolve", "--generations", "0", "--out", str(tmp_path)] + SMALL) == 0
    assert len((tmp_path / "fitness_log.csv").read_text().splitlines()) == 2
    assert (tmp_path / "best.genome").exists() and (tmp_path / "best.genome.json").exists()


def test_evolve_config_file_and_override(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("generations = 3\nseed = 4\npopulation_size = 10\ninitial_length = 600\n")
    assert main(["evolve", "--config", str(cfg), "--generations", "1", "--out", str(tmp_path / "o")]) == 0
    text = (tmp_path / "o" / "config.txt").read_text()
    assert "generations = 1\n" in text and "seed = 4\n" in text


def test_evolve_from_elite_and_resume(tmp_path):
    elite = tmp_path / "elite.genome"
    save_genome(elite, random_genome(np.random.default_rng(0), 700))
    run = ["evolve", "--generations", "4", "--checkpoint-every", "2", "--seed-genome", str(elite)] + SMALL
    assert main(run + ["--out", str(tmp_path / "a")]) == 0
    assert main(["evolve", "--generations", "6", "--checkpoint-every", "2", "--out", str(tmp_path / "b"),
                 "--resume", str(tmp_path / "a" / "checkpoint.json")] + SMALL) == 0
    assert len((tmp_path / "b" / "fitness_log.csv").read_text().splitlines()) == 8


def test_heatmap_csv_shape(tmp_path):
    genome = tmp_path / "g.genome"
    save_genome(genome, random_genome(np.random.default_rng(5)))
    assert main(["heatmap", "--genome", str(genome), "--out", str(tmp_path)]) == 0
    rows = (tmp_path / "heatmap.csv").read_text().splitlines()
    assert len(rows) == 28 and all(len(r.split(",")) == 28 for r in rows)
    assert (tmp_path / "heatmap.pgm").read_text().startswith("P2\n28 28\n255\n")


def test_trace(tmp_path):
    assert main(["trace", "--stub", "empty", "--index", "3", "--start", "0", "0", "--out", str(tmp_path)]) == 0
    assert len((tmp_path / "trace.jsonl").read_text().splitlines()) == 40
    assert (tmp_path / "trace.pgm").exists() and (tmp_path / "trace.path.csv").exists()


def test_synth(tmp_path):
    assert main(["synth", "--out", str(tmp_path)]) == 0
    for d, img in enumerate(synthetic_digits().images):
        np.testing.assert_array_equal(parse_pbm((tmp_path / f"digit_{d}.pbm").read_text()), img)


@pytest.mark.parametrize("argv", [
    ["evaluate"],
    ["evaluate", "--genome", "/nonexistent.genome"],
    ["evaluate", "--stub", "oracle", "--dataset", "mnist"],
    ["evolve", "--config", "/nonexistent.cfg"],
    ["trace", "--stub", "empty", "--index", "99"],
    ["bogus"],
    ["evaluate", "--stub", "oracle", "--frobnicate"],
])
def test_errors_exit_nonzero(argv, tmp_path, capsys):
    assert main(argv + ["--out", str(tmp_path)] if argv[0] != "bogus" else argv) != 0
    assert capsys.readouterr().err


def test_malformed_config(tmp_path, capsys):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("population_size = 7\n")
    assert main(["evolve", "--config", str(cfg), "--out", str(tmp_path)]) == 2
    assert "even" in capsys.readouterr().err


def test_console_entry_point(tmp_path):
    done = subprocess.run([sys.executable, "-m", "saccade.cli", "synth", "--out", str(tmp_path)],
                          capture_output=True, text=True)
    assert done.returncode == 0 and "wrote 10 digits" in done.stdout
