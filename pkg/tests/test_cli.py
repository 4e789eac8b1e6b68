import json

import pytest

from selenc.cli import main
from selenc.selective import CipherHeader

KEY = "00112233445566778899aabbccddeeff"


def run(*argv):
    return main(list(argv))


@pytest.fixture
def stream_file(tmp_path):
    path = tmp_path / "plain.264"
    assert run("gen-test", "--out", str(path), "--gop", "4", "--frames", "12",
               "--payload", "64", "--seed", "3") == 0
    return path


class TestGenTest:
    def test_writes_stream(self, tmp_path, capsys):
        out = tmp_path / "gen.264"
        assert run("gen-test", "--out", str(out), "--gop", "2", "--frames", "4") == 0
        assert out.stat().st_size > 0
        assert "wrote" in capsys.readouterr().out

    def test_bad_params_exit_nonzero(self, tmp_path, capsys):
        rc = run("gen-test", "--out", str(tmp_path / "x"), "--gop", "0", "--frames", "4")
        assert rc == 1
        assert "gop" in capsys.readouterr().err


class TestEncryptDecrypt:
    def test_round_trip(self, stream_file, tmp_path, capsys):
        enc = tmp_path / "enc.264"
        meta = tmp_path / "meta.seh"
        out = tmp_path / "round.264"
        assert run("encrypt", "--in", str(stream_file), "--out", str(enc), "--meta", str(meta),
                   "--key", KEY, "--nonce", "00" * 8) == 0
        assert "selected=" in capsys.readouterr().out
        assert run("decrypt", "--in", str(enc), "--meta", str(meta), "--out", str(out),
                   "--key", KEY) == 0
        assert out.read_bytes() == stream_file.read_bytes()

    def test_policy_flag(self, stream_file, tmp_path):
        enc = tmp_path / "enc.264"
        meta = tmp_path / "meta.seh"
        assert run("encrypt", "--in", str(stream_file), "--out", str(enc), "--meta", str(meta),
                   "--key", KEY, "--policy", "all-i", "--nonce", "11" * 8) == 0
        header = CipherHeader.from_bytes(meta.read_bytes())
        assert header.policy.name == "ALL_INTRA"

    def test_deterministic_nonce(self, stream_file, tmp_path):
        names = [(tmp_path / f"e{i}.264", tmp_path / f"m{i}.seh") for i in (1, 2)]
        for enc, meta in names:
            run("encrypt", "--in", str(stream_file), "--out", str(enc), "--meta", str(meta),
                "--key", KEY, "--nonce", "ab" * 8)
        assert names[0][0].read_bytes() == names[1][0].read_bytes()
        assert names[0][1].read_bytes() == names[1][1].read_bytes()

    def test_passphrase(self, stream_file, tmp_path):
        enc = tmp_path / "enc.264"
        meta = tmp_path / "meta.seh"
        out = tmp_path / "round.264"
        assert run("encrypt", "--in", str(stream_file), "--out", str(enc), "--meta", str(meta),
                   "--passphrase", "sesame", "--kdf-iters", "3") == 0
        assert run("decrypt", "--in", str(enc), "--meta", str(meta), "--out", str(out),
                   "--passphrase", "sesame", "--kdf-iters", "3") == 0
        assert out.read_bytes() == stream_file.read_bytes()

    def test_wrong_key_diagnostic(self, stream_file, tmp_path, capsys):
        enc = tmp_path / "enc.264"
        meta = tmp_path / "meta.seh"
        run("encrypt", "--in", str(stream_file), "--out", str(enc), "--meta", str(meta),
            "--key", KEY, "--nonce", "22" * 8)
        capsys.readouterr()
        rc = run("decrypt", "--in", str(enc), "--meta", str(meta),
                 "--out", str(tmp_path / "x.264"), "--key", "ff" * 16)
        err = capsys.readouterr().err
        assert rc == 1
        assert err.startswith("selenc: error:") and err.count("\n") == 1

    def test_bad_nonce(self, stream_file, tmp_path, capsys):
        rc = run("encrypt", "--in", str(stream_file), "--out", str(tmp_path / "e.264"),
                 "--meta", str(tmp_path / "m.seh"), "--key", KEY, "--nonce", "xyz")
        assert rc == 1
        assert "nonce" in capsys.readouterr().err

    def test_missing_input_file(self, tmp_path, capsys):
        rc = run("encrypt", "--in", str(tmp_path / "nope.264"), "--out", str(tmp_path / "e"),
                 "--meta", str(tmp_path / "m"), "--key", KEY)
        assert rc == 1
        assert "selenc: error:" in capsys.readouterr().err

    def test_key_and_passphrase_mutually_exclusive(self, stream_file, tmp_path):
        with pytest.raises(SystemExit) as exc:
            run("encrypt", "--in", str(stream_file), "--out", str(tmp_path / "e"),
                "--meta", str(tmp_path / "m"), "--key", KEY, "--passphrase", "x")
        assert exc.value.code == 2

    def test_key_required(self, stream_file, tmp_path):
        with pytest.raises(SystemExit):
            run("encrypt", "--in", str(stream_file), "--out", str(tmp_path / "e"),
                "--meta", str(tmp_path / "m"))


class TestInspect:
    def test_table(self, stream_file, capsys):
        assert run("inspect", "--in", str(stream_file)) == 0
        out = capsys.readouterr().out
        assert "SPS" in out and "IDR" in out and "nals=14" in out

    def test_json(self, stream_file, capsys):
        assert run("inspect", "--in", str(stream_file), "--json") == 0
        doc = json.loads(capsys.readouterr().out)
        assert len(doc["nals"]) == 14
        assert doc["nals"][0]["name"] == "SPS"

    def test_empty_file(self, tmp_path, capsys):
        empty = tmp_path / "empty.264"
        empty.write_bytes(b"")
        assert run("inspect", "--in", str(empty)) == 1
        assert "error" in capsys.readouterr().err


class TestBench:
    def test_text_output(self, stream_file, capsys):
        assert run("bench", "--in", str(stream_file), "--key", KEY) == 0
        out = capsys.readouterr().out
        for field in ("selective_encrypted_bytes", "naive_encrypted_bytes",
                      "aes_blocks_selective", "wall_time_naive"):
            assert f"{field}=" in out

    def test_json_output(self, stream_file, capsys):
        assert run("bench", "--in", str(stream_file), "--key", KEY, "--json",
                   "--policy", "all-i") == 0
        doc = json.loads(capsys.readouterr().out)
        assert doc["selective_encrypted_bytes"] <= doc["naive_encrypted_bytes"]
