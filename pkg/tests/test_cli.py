"""Tests for the command-line interface.

Commands run in-process through main(argv) with captured stdout; one
subprocess smoke test covers the installed entry point.
"""

import json
import subprocess
import sys
from pathlib import Path

import pytest

from plnc import LatinSquare, build_qam, square_removes_fade
from plnc.cli import main, parse_fade
from plnc.gaussian import GaussianInt, gr_reduce


def run_cli(capsys, *argv: str) -> str:
    assert main(list(argv)) == 0
    return capsys.readouterr().out


class TestParseFade:
    def test_exact_ratio(self) -> None:
        z = parse_fade("1,1/2,0")
        assert z.is_exact
        assert z.exact == gr_reduce(GaussianInt(1, 1), GaussianInt(2, 0))

    def test_float_forms(self) -> None:
        assert complex(parse_fade("0.5")) == 0.5 + 0j
        assert complex(parse_fade("0.5,-1.5")) == 0.5 - 1.5j
        assert not parse_fade("0.5").is_exact

    def test_rejects_garbage(self) -> None:
        with pytest.raises(ValueError):
            parse_fade("1,2,3")


class TestSfsCommands:
    def test_count_with_brute_force(self, capsys) -> None:
        out = json.loads(run_cli(capsys, "sfs-count", "--family", "qam", "--M", "16",
                                 "--brute-force"))
        assert out["formula"] == 388
        assert out["enumerated"] == 388
        assert out["verdict"] == "AGREE"
        assert out["bound"] == 532

    def test_count_psk_has_no_bound(self, capsys) -> None:
        out = json.loads(run_cli(capsys, "sfs-count", "--family", "psk", "--M", "16"))
        assert out["formula"] == 912 and out["bound"] is None

    def test_list_pam4(self, capsys) -> None:
        fades = json.loads(run_cli(capsys, "sfs-list", "--family", "pam", "--M", "4"))
        assert len(fades) == 14
        assert all({"re", "im"} <= set(f) for f in fades)

    def test_invalid_size_exits_nonzero(self, capsys) -> None:
        assert main(["sfs-count", "--family", "qam", "--M", "5"]) == 1
        assert "error" in capsys.readouterr().err.lower()


class TestLsCommands:
    def test_standard_square(self, capsys, fixture_dir: Path) -> None:
        out = run_cli(capsys, "ls-standard", "--family", "qam", "--M", "16")
        assert out == (fixture_dir / "ls_qam16.txt").read_text()

    def test_solve_exact_fade(self, capsys) -> None:
        out = run_cli(capsys, "ls-solve", "--family", "qam", "--M", "4",
                      "--fade", "1,1/2,0")
        sq = LatinSquare.from_text(out)
        assert square_removes_fade(sq, build_qam(4), 0.5 + 0.5j)

    def test_solve_respects_t_max(self, capsys) -> None:
        assert main(["ls-solve", "--family", "qam", "--M", "4",
                     "--fade", "1,1/2,0", "--t-max", "4"]) == 1
        err = capsys.readouterr().err
        assert "no completion" in err

    def test_output_file(self, tmp_path, capsys) -> None:
        dest = tmp_path / "sq.txt"
        run_cli(capsys, "ls-standard", "--family", "pam", "--M", "4", "-o", str(dest))
        assert LatinSquare.from_text(dest.read_text()).M == 4


class TestCodebookPipeline:
    def test_codebook_then_distance_report(self, tmp_path, capsys) -> None:
        cb_path = tmp_path / "cb.json"
        stats = json.loads(run_cli(capsys, "codebook", "--family", "qam", "--M", "4",
                                   "-o", str(cb_path)))
        assert stats["fades"] == 12
        assert cb_path.is_file()

        report = run_cli(capsys, "distance-report", "--codebook", str(cb_path),
                         "--grid", "0.2:1.4:4,-0.5:0.5:3")
        lines = report.strip().splitlines()
        assert lines[0] == "fade_re,fade_im,selected,t,min_cluster_distance"
        assert len(lines) == 1 + 12

    def test_distance_report_single_fades(self, tmp_path, capsys) -> None:
        cb_path = tmp_path / "cb.json"
        run_cli(capsys, "codebook", "--family", "pam", "--M", "2", "-o", str(cb_path))
        report = run_cli(capsys, "distance-report", "--codebook", str(cb_path),
                         "--fade", "1,0/1,0", "--fade", "0.9")
        rows = report.strip().splitlines()[1:]
        assert len(rows) == 2
        assert all(float(r.split(",")[-1]) > 0 for r in rows)


class TestSimBer:
    def test_config_plus_overrides(self, tmp_path, capsys) -> None:
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({
            "kind": "qam", "M": 4, "scheme": "xor",
            "snr_db": [15.0], "trials": 4096, "seed": 3,
        }))
        out = run_cli(capsys, "sim-ber", "--config", str(cfg), "--trials", "8192")
        lines = out.strip().splitlines()
        assert lines[0].startswith("scheme,constellation,M,")
        assert ",8192," in lines[1]

    def test_flags_only_ls_run(self, tmp_path, capsys) -> None:
        cb_path = tmp_path / "cb.json"
        run_cli(capsys, "codebook", "--family", "qam", "--M", "4", "-o", str(cb_path))
        out = run_cli(capsys, "sim-ber", "--family", "qam", "--M", "4",
                      "--scheme", "ls", "--snr", "inf", "--trials", "4096",
                      "--seed", "1", "--codebook", str(cb_path))
        assert out.strip().splitlines()[1].endswith("0.000000e+00")

    def test_ls_without_codebook_fails(self, capsys) -> None:
        assert main(["sim-ber", "--family", "qam", "--M", "4", "--scheme", "ls",
                     "--snr", "10", "--trials", "64"]) == 1
        assert "codebook" in capsys.readouterr().err.lower()


class TestExportFixtures:
    def test_matches_committed_fixtures(self, tmp_path, capsys, fixture_dir: Path) -> None:
        out = json.loads(run_cli(capsys, "export-fixtures", "-o", str(tmp_path)))
        names = {Path(p).name for p in out["written"]}
        assert names == {"ls_qam16.txt", "ls_pam4.txt", "sfs_pam4.json", "sfs_qam4.json"}
        for name in names:
            assert (tmp_path / name).read_bytes() == (fixture_dir / name).read_bytes()


def test_installed_entry_point_smoke() -> None:
    proc = subprocess.run([sys.executable, "-m", "plnc.cli", "sfs-count",
                           "--family", "pam", "--M", "8"],
                          capture_output=True, text=True, timeout=60)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["formula"] == 70
