import csv
import io
from pathlib import Path

import numpy as np
import pytest

from tmcodes import __version__
from tmcodes.cli import (
    EXIT_BAD_CONFIG,
    EXIT_CAP_EXCEEDED,
    EXIT_DECODE_FAILURE,
    EXIT_GUARANTEE_VIOLATION,
    main,
)

FIXTURES = Path(__file__).parent / "fixtures"
RELAY = str(FIXTURES / "relay.topo")
WIRE = str(FIXTURES / "wire.topo")


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


def table(text):
    body = [line for line in text.splitlines() if not line.startswith("#")]
    rows = list(csv.reader(io.StringIO("\n".join(body))))
    return rows[0], np.array(rows[1:], dtype=float)


def test_bounds_eight_edge_scenario(capsys):
    code, out, _ = run(capsys, "bounds", "--E", 8, "--C", 4, "--m", 2, "--p-max", 0.2, "--steps", 200)
    assert code == 0
    header, data = table(out)
    assert header[0] == "p" and len(data) == 200
    assert out.startswith(f"# tmcodes {__version__}\n")
    assert "# config.E=8" in out


def test_bounds_first_row_is_one(capsys):
    _, out, _ = run(capsys, "bounds", "--E", 9, "--C", 2, "--m", 3, "--steps", 11)
    header, data = table(out)
    first = dict(zip(header, data[0]))
    assert first["p"] == 0
    for name, value in first.items():
        if name not in ("p", "bench2"):
            assert value == 1.0, name


def test_classical_matches_fixture(capsys):
    _, out, _ = run(capsys, "bounds", "--classical", "--p-max", 0.25, "--steps", 100)
    header, data = table(out)
    ref_header, ref = table((FIXTURES / "classical_bounds.csv").read_text())
    assert header == ref_header
    np.testing.assert_allclose(data, ref, rtol=0, atol=1e-8)


def test_bounds_output_is_reproducible(capsys, tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    for path in (a, b):
        assert run(capsys, "bounds", "--C", 2, "--E", 3, "--m", 1, "--n", 10, "--output", path)[0] == 0
    assert a.read_bytes() == b.read_bytes()


def test_config_file_and_flag_precedence(capsys, tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# sweep\nC=2\nE=3\nm=1\nsteps=5\np_max=0.1\n")
    _, out, _ = run(capsys, "bounds", "--config", cfg)
    assert len(table(out)[1]) == 5
    _, out, _ = run(capsys, "bounds", "--config", cfg, "--steps", 7)
    _, data = table(out)
    assert len(data) == 7 and data[-1, 0] == pytest.approx(0.1)


@pytest.mark.parametrize("argv", [
    ["bounds", "--C", 3, "--E", 2, "--m", 1],
    ["bounds", "--C", 1, "--E", 1],
    ["bounds", "--C", 1, "--E", 1, "--m", 1, "--p-max", 0.6],
    ["construct", "--topology", "nowhere.topo", "--m", 1, "--n", 2, "--p", 0, "--output", "x"],
])
def test_bad_config_exit_code(capsys, argv):
    assert run(capsys, *argv)[0] == EXIT_BAD_CONFIG


def test_bad_config_file_key(capsys, tmp_path):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("colour=blue\n")
    code, _, err = run(capsys, "bounds", "--config", cfg)
    assert code == EXIT_BAD_CONFIG and "colour" in err


def test_construct_certifies_and_is_deterministic(capsys, tmp_path):
    paths = [tmp_path / "a.book", tmp_path / "b.book"]
    for path in paths:
        code, out, _ = run(capsys, "construct", "--topology", RELAY, "--m", 2, "--n", 3,
                           "--p", 2 / 24, "--seed", 4, "--output", path)
        assert code == 0
    assert "design_distance=5" in out
    certified = int(out.split("certified_min_distance=")[1].split()[0])
    assert certified >= 5
    assert paths[0].read_bytes() == paths[1].read_bytes()


def test_construct_zero_noise_keeps_everything(capsys, tmp_path):
    code, out, _ = run(capsys, "construct", "--topology", RELAY, "--m", 2, "--n", 2,
                       "--p", 0, "--output", tmp_path / "z.book")
    assert code == 0
    assert "codebook_size=256 design_distance=1" in out


def test_binary_relay_has_no_certified_code(capsys, tmp_path):
    # four pairwise independent columns do not exist in GF(2)^2
    code, _, err = run(capsys, "construct", "--topology", RELAY, "--m", 1, "--n", 2,
                       "--p", 0, "--output", tmp_path / "z.book")
    assert code == EXIT_BAD_CONFIG and "certified" in err


def test_construct_cap_exceeded(capsys, tmp_path):
    code, _, _ = run(capsys, "construct", "--topology", RELAY, "--m", 2, "--n", 6,
                     "--p", 0, "--output", tmp_path / "big.book")
    assert code == EXIT_CAP_EXCEEDED


def linear(capsys, tmp_path, seed, attempts, check="pairwise"):
    return run(capsys, "construct", "--topology", WIRE, "--m", 1, "--n", 8, "--p", 0.125,
               "--construction", "linear", "--epsilon", 0, "--attempts", attempts, "--seed", seed,
               "--linear-check", check, "--output", tmp_path / "lin.book")


def test_construct_linear_exhausted_attempts(capsys, tmp_path):
    assert linear(capsys, tmp_path, 0, 1, "zero")[0] == EXIT_GUARANTEE_VIOLATION


def test_construct_linear_pairwise_check_certifies(capsys, tmp_path):
    for seed in range(8):
        code, out, _ = linear(capsys, tmp_path, seed, 20)
        assert code == 0 and "CERTIFICATION FAILED" not in out


def test_construct_linear_zero_check_can_fail_certification(capsys, tmp_path):
    # seed 2 passes the distance-from-zero test but two codewords sit at distance 2
    code, out, _ = linear(capsys, tmp_path, 2, 1, "zero")
    assert code == EXIT_GUARANTEE_VIOLATION
    assert "certified_min_distance=2" in out


@pytest.fixture(scope="module")
def relay_book(tmp_path_factory):
    path = tmp_path_factory.mktemp("books") / "relay.book"
    assert main(["construct", "--topology", RELAY, "--m", "2", "--n", "3", "--p", str(2 / 24),
                 "--output", str(path)]) == 0
    return path


def test_simulate_exhaustive_is_perfect(capsys, relay_book):
    code, out, _ = run(capsys, "simulate", "--codebook", relay_book)
    assert code == 0
    header, data = table(out)
    trials, successes, failures, ambiguities = data[0]
    assert trials > 0 and successes == trials and failures == ambiguities == 0


def test_simulate_random_and_adversarial(capsys, relay_book):
    for mode in ("random", "adversarial"):
        code, out, _ = run(capsys, "simulate", "--codebook", relay_book, "--noise", mode, "--trials", 20)
        assert code == 0, mode
        assert table(out)[1][0].tolist() == [20, 20, 0, 0]


def test_simulate_reports_decode_failure_beyond_radius(capsys, tmp_path):
    # a design distance of 1 corrects nothing, so random flips at budget 1 must confuse it
    book = tmp_path / "d1.book"
    assert main(["construct", "--topology", RELAY, "--m", "2", "--n", "2", "--p", "0",
                 "--output", str(book)]) == 0
    text = book.read_text().replace("budget=0", "budget=1")
    book.write_text(text)
    code, _, _ = run(capsys, "simulate", "--codebook", book, "--noise", "random", "--trials", 30)
    assert code == EXIT_DECODE_FAILURE
    code, _, _ = run(capsys, "simulate", "--codebook", book)
    assert code == EXIT_GUARANTEE_VIOLATION


def test_concat_experiment(capsys, tmp_path):
    out_path = tmp_path / "gmd.txt"
    code, _, _ = run(capsys, "concat", "--topology", RELAY, "--m", 2, "--b", 3, "--d-in", 3,
                     "--K-out", 2, "--N-out", 6, "--trials", 100, "--output", out_path)
    assert code == 0
    text = out_path.read_text()
    assert "d_out=5" in text and "# summary mode=sweep" in text


def test_version_flag(capsys):
    with pytest.raises(SystemExit):
        main(["--version"])
    assert __version__ in capsys.readouterr().out
