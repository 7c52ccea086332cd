import json
from dataclasses import replace

import pytest

import lssd.certificate as certificate
from lssd.cli import EXIT_BUDGET, EXIT_CHECK_FAILED, EXIT_OK, EXIT_PARSE_ERROR, main
from lssd.core_model import noisy_bit_game
from lssd.hypergraph import RPartiteHypergraph, dump_hypergraph
from lssd.nosignaling import NoSignalingBox, save_box


def run(capsys, settings, *argv):
    code = main(list(argv), settings=settings)
    return code, capsys.readouterr().out


class TestClassicalCommand:
    def test_theorem1(self, capsys, settings, game_file, theorem1):
        code, out = run(capsys, settings, "pc", str(game_file(theorem1)))
        assert code == EXIT_OK
        assert out.splitlines()[0] == "2/5"
        assert out.splitlines()[1].startswith("f_1: ")

    def test_point_mass(self, capsys, settings, game_file, point_mass_game):
        code, out = run(capsys, settings, "pc", str(game_file(point_mass_game)))
        assert code == EXIT_OK
        assert out.splitlines()[0] == "1/1"

    def test_json(self, capsys, settings, game_file, theorem1):
        code, out = run(capsys, settings, "pc", str(game_file(theorem1)), "--json")
        assert json.loads(out)["value"] == "2/5"

    def test_budget(self, capsys, settings, game_file, oversized_game):
        code, out = run(capsys, settings, "pc", str(game_file(oversized_game)))
        assert code == EXIT_BUDGET
        assert "100000000000000000000 required" in out

    def test_parse_error(self, capsys, settings, game_file):
        code, _ = run(capsys, settings, "pc", str(game_file("lssd-game v1\nparties 2\n")))
        assert code == EXIT_PARSE_ERROR

    def test_missing_file(self, capsys, settings, tmp_path):
        code, _ = run(capsys, settings, "pc", str(tmp_path / "absent.txt"))
        assert code == EXIT_PARSE_ERROR

    @pytest.mark.parametrize("command", ["pc", "pns", "validate-box", "hypergraph"])
    def test_invalid_utf8(self, capsys, settings, tmp_path, caplog, command):
        path = tmp_path / "latin1.txt"
        path.write_bytes(b"lssd-game v1\nparties 2\n\xff\xfe 2 2\n")
        code, _ = run(capsys, settings, command, str(path))
        assert code == EXIT_PARSE_ERROR
        assert "line 3" in caplog.text


class TestNoSignalingCommands:
    def test_theorem1_with_dumps(self, capsys, settings, game_file, theorem1, tmp_path):
        box_path, lp_path = tmp_path / "box.txt", tmp_path / "lp.txt"
        code, out = run(capsys, settings, "pns", str(game_file(theorem1)),
                        "--dump-box", str(box_path), "--dump-lp", str(lp_path))
        assert code == EXIT_OK
        value, box_text = out.split("\n", 1)
        assert value == "1/2"
        assert box_text == box_path.read_text()
        assert box_text.startswith("lssd-box v1\n")
        assert lp_path.read_text().startswith("lssd-lp v1\n")

        code, out = run(capsys, settings, "validate-box", str(box_path))
        assert code == EXIT_OK
        assert out.strip() == "valid"

    def test_binary_outputs_equal_classical(self, capsys, settings, game_file):
        path = str(game_file(noisy_bit_game("1/4")))
        _, pc_out = run(capsys, settings, "pc", path)
        _, pns_out = run(capsys, settings, "pns", path, "--full")
        assert pc_out.splitlines()[0] == pns_out.splitlines()[0] == "9/16"

    def test_printed_box_validates(self, capsys, settings, game_file, tmp_path):
        _, out = run(capsys, settings, "pns", str(game_file(noisy_bit_game("1/4"))))
        path = tmp_path / "printed.txt"
        path.write_text(out.split("\n", 1)[1], encoding="utf-8")
        code, verdict = run(capsys, settings, "validate-box", str(path))
        assert code == EXIT_OK
        assert verdict.strip() == "valid"

    def test_signaling_box_fails(self, capsys, settings, tmp_path):
        path = tmp_path / "box.txt"
        save_box(NoSignalingBox.from_function((2, 2, 2), lambda o, a: 1 if o == (0, a[0]) else 0), path)
        code, out = run(capsys, settings, "validate-box", str(path))
        assert code == EXIT_CHECK_FAILED
        assert out.startswith("invalid:")


class TestQuantumCommands:
    def test_paper_strategy(self, capsys, settings, game_file, theorem1):
        code, out = run(capsys, settings, "pq-lower", str(game_file(theorem1)), "--paper-strategy")
        assert code == EXIT_OK
        value, payload = out.split("\n", 1)
        assert value.startswith("0.435679")
        assert len(json.loads(payload)["state"]) == 4

    def test_point_mass(self, capsys, settings, game_file, point_mass_game):
        code, out = run(capsys, settings, "pq-lower", str(game_file(point_mass_game)), "--seeds", "1",
                        "--budget", "100")
        assert code == EXIT_OK
        assert float(out.splitlines()[0]) == pytest.approx(1.0, abs=1e-9)

    def test_verify_sos(self, capsys, settings):
        code, out = run(capsys, settings, "verify-sos", "--json", "--grid", "21")
        assert code == EXIT_OK
        report = json.loads(out)
        assert report["valid"] and report["identity_ok"]
        assert report["grid_ok"] is True

    def test_verify_sos_grid_failure(self, capsys, settings, monkeypatch):
        monkeypatch.setattr(certificate, "grid_max_eigenvalue", lambda points: 0.45)
        code, out = run(capsys, settings, "verify-sos")
        assert code == EXIT_CHECK_FAILED
        assert "grid_ok: False" in out
        assert out.splitlines()[-1] == "valid: False"

    def test_verify_sos_skip_grid(self, capsys, settings):
        code, out = run(capsys, settings, "verify-sos", "--json", "--grid", "0")
        assert code == EXIT_OK
        assert json.loads(out)["grid_ok"] is None

    @pytest.mark.slow
    def test_verify_sos_default_grid(self, capsys, settings):
        code, out = run(capsys, settings, "verify-sos", "--json")
        assert code == EXIT_OK
        assert json.loads(out)["grid_ok"] is True

    @pytest.mark.slow
    def test_example2(self, capsys, settings):
        code, out = run(capsys, settings, "example2")
        assert code == EXIT_OK
        assert "PASS" in out


class TestReports:
    def test_theorem1_table(self, capsys, settings):
        code, out = run(capsys, settings, "theorem1")
        assert code == EXIT_OK
        assert out.count("PASS") == 4

    def test_theorem1_json(self, capsys, settings):
        code, out = run(capsys, settings, "theorem1", "--json")
        record = json.loads(out)
        assert code == EXIT_OK
        assert record["p_c"]["value"] == "2/5"
        assert record["p_ns"]["value"] == "1/2"
        assert record["pass"] is True

    def test_example1(self, capsys, settings):
        code, out = run(capsys, settings, "example1", "--alpha", "1/4")
        assert code == EXIT_OK
        assert "p_c: 9/16" in out
        assert "permutation formula: 9/16" in out

    def test_example1_alpha_out_of_range(self, capsys, settings):
        code, _ = run(capsys, settings, "example1", "--alpha", "3/5")
        assert code == EXIT_PARSE_ERROR

    def test_example1_product(self, capsys, settings):
        code, out = run(capsys, settings, "example1-product")
        assert code == EXIT_OK
        assert "alpha: 292893/1000000" in out
        assert "superadditive: PASS" in out

    def test_example1_product_denominator_from_settings(self, capsys, settings):
        code, out = run(capsys, replace(settings, alpha_denominator=1000), "example1-product")
        assert code == EXIT_OK
        assert "alpha: 293/1000" in out

    def test_hypergraph(self, capsys, settings, game_file):
        g = RPartiteHypergraph.create((2, 2, 2), [(0, 0, 0), (0, 1, 1), (1, 0, 1), (1, 1, 0)])
        path = str(game_file(dump_hypergraph(g), name="g.txt"))
        code, out = run(capsys, settings, "hypergraph", path)
        assert code == EXIT_OK
        assert "nu: 1" in out and "nu_f: 2/1" in out
        code, out = run(capsys, settings, "hypergraph", path, "--verify")
        assert code == EXIT_OK
        assert "FAIL" not in out


def test_threads_flag_respects_environment(capsys, settings, game_file, theorem1):
    pinned = replace(settings, threads=2, threads_from_env=True)
    assert pinned.resolve_threads(8) == 2
    assert settings.resolve_threads(3) == 3
    code, out = run(capsys, pinned, "--threads", "8", "pc", str(game_file(theorem1)))
    assert code == EXIT_OK
