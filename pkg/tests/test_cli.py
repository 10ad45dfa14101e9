import json
import random
import string

import pytest

from sphererc.cli import main, parse_grid, UsageError
from sphererc.corpus import SHERLOCK


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_parse_grid():
    assert parse_grid("0.1:0.3:3") == pytest.approx((0.1, 0.2, 0.3))
    assert parse_grid("0.5") == (0.5,)
    for bad in ("a:b:c", "0.1:0.2", "0.1:0.2:0"):
        with pytest.raises(UsageError):
            parse_grid(bad)


def test_learn_and_recall(tmp_path, capsys):
    corpus = tmp_path / "c.txt"
    corpus.write_text("abracadabra, abracadabra!")
    model = tmp_path / "m.hrcm"
    code, out, _ = run(capsys, "learn", str(corpus), "-o", str(model), "--n", "40", "--alpha", "0.8")
    assert code == 0 and "err=0" in out
    code, out, _ = run(capsys, "recall", str(model), "--start", "a", "--length", "25")
    assert code == 0 and out == "abracadabra, abracadabra!\n"
    code, out, _ = run(capsys, "recall", str(model), "--start", "b", "--length", "1")
    assert code == 0 and out == "b\n"


def test_learn_online(tmp_path, capsys):
    corpus = tmp_path / "c.txt"
    corpus.write_text("hello world, hello there")
    model = tmp_path / "m.hrcm"
    code, out, _ = run(capsys, "learn", str(corpus), "-o", str(model), "--n", "60", "--alpha", "1",
                       "--mode", "online", "--max-epochs", "2000")
    assert code == 0 and "err=0 " in out


def test_learn_bundled_corpus(tmp_path, capsys):
    model = tmp_path / "s.hrcm"
    code, out, _ = run(capsys, "learn", "-o", str(model), "--n", "1200")
    assert code == 0 and "T=1140 M=38 N=1200" in out and "err=0 " in out
    code, out, _ = run(capsys, "recall", str(model), "--start", SHERLOCK[0], "--length", str(len(SHERLOCK)))
    assert out == SHERLOCK + "\n"


def test_usage_errors(tmp_path, capsys):
    assert run(capsys, "learn", str(tmp_path / "missing.txt"))[0] == 2
    one = tmp_path / "one.txt"
    one.write_text("a")
    assert run(capsys, "learn", str(one))[0] == 2
    small = tmp_path / "small.txt"
    small.write_text("abcdefghij")
    assert run(capsys, "learn", str(small), "--n", "3")[0] == 2

    bad = tmp_path / "bad.hrcm"
    bad.write_bytes(b"garbage")
    code, _, err = run(capsys, "recall", str(bad), "--start", "a", "--length", "3")
    assert code == 2 and "magic" in err or "shorter" in err

    corpus = tmp_path / "c.txt"
    corpus.write_text("abcabc")
    model = tmp_path / "m.hrcm"
    run(capsys, "learn", str(corpus), "-o", str(model), "--n", "10")
    assert run(capsys, "recall", str(model), "--start", "z", "--length", "3")[0] == 2
    assert run(capsys, "recall", str(model), "--start", "a", "--length", "0")[0] == 2
    with pytest.raises(SystemExit) as exc:
        main(["learn", "--alpha", "0"])
    assert exc.value.code == 2


def test_sweep_csv(tmp_path, capsys):
    out = tmp_path / "s.csv"
    code, _, _ = run(capsys, "sweep", "--t", "40", "--trials", "2", "--nu-grid", "0.2:1.0:5",
                     "--rho-grid", "0.1:0.3:2", "--out", str(out))
    assert code == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "axis1,axis2,mean_error,std_error,trials"
    assert len(lines) == 11
    meta = json.loads((tmp_path / "s.csv.meta.json").read_text())
    assert meta["axis2"] == "rho" and meta["T"] == 40 and meta["reservoir_kind"] == "dense"


def test_sweep_alpha_axis_and_absent_cells(tmp_path, capsys):
    out = tmp_path / "a.csv"
    code, _, _ = run(capsys, "sweep", "--t", "40", "--trials", "1", "--nu-grid", "0.05:0.5:2",
                     "--alpha-grid", "0.5:1:2", "--rho", "0.2", "--out", str(out))
    assert code == 0
    rows = [r.split(",") for r in out.read_text().splitlines()[1:]]
    assert rows[0][2:] == ["", "", "0"]  # N=2 < M=8
    assert rows[-1][4] == "1"


def test_sweep_usage_errors(tmp_path, capsys):
    out = str(tmp_path / "x.csv")
    assert run(capsys, "sweep", "--t", "40", "--trials", "0", "--nu-grid", "0.5", "--out", out)[0] == 2
    assert run(capsys, "sweep", "--t", "40", "--trials", "1", "--nu-grid", "1.5", "--out", out)[0] == 2
    assert run(capsys, "sweep", "--t", "40", "--trials", "1", "--nu-grid", "0.5",
               "--out", str(tmp_path / "no" / "x.csv"))[0] == 3


def test_sweep_reproducible(tmp_path, capsys):
    args = ["sweep", "--t", "30", "--trials", "3", "--nu-grid", "0.3:0.9:3", "--rho", "0.2", "--seed", "7"]
    run(capsys, *args, "--out", str(tmp_path / "a.csv"))
    run(capsys, *args, "--out", str(tmp_path / "b.csv"), "--jobs", "2")
    assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()


def test_encrypt_decrypt(tmp_path, capsys):
    rnd = random.Random(5)
    msg = "".join(rnd.choice(string.ascii_letters + " .,") for _ in range(500))
    plain, cipher, back = tmp_path / "p.txt", tmp_path / "c.hrc", tmp_path / "b.txt"
    plain.write_text(msg)
    assert run(capsys, "encrypt", "--in", str(plain), "--out", str(cipher), "--password", "hunter2")[0] == 0
    assert cipher.read_bytes()[:4] == b"HRC1"
    assert run(capsys, "decrypt", "--in", str(cipher), "--out", str(back), "--password", "hunter2")[0] == 0
    assert back.read_text() == msg
    assert run(capsys, "decrypt", "--in", str(cipher), "--out", str(back), "--password", "hunter3")[0] == 0
    assert back.read_text() != msg and len(back.read_text()) == 500


def test_crypto_usage_errors(tmp_path, capsys):
    plain = tmp_path / "p.txt"
    plain.write_text("some text")
    out = str(tmp_path / "c.hrc")
    assert run(capsys, "encrypt", "--in", str(plain), "--out", out, "--password", "")[0] == 2
    assert run(capsys, "encrypt", "--in", str(tmp_path / "nope"), "--out", out, "--password", "x")[0] == 2
    assert run(capsys, "decrypt", "--in", str(plain), "--out", out, "--password", "x")[0] == 2
    assert run(capsys, "encrypt", "--in", str(plain), "--out", out, "--password", "x",
               "--max-length", "4")[0] == 2
    assert run(capsys, "encrypt", "--in", str(plain), "--out", out, "--password", "x",
               "--n-factor", "0.01")[0] in (0, 3)
