import numpy as np
import pytest

from sparsecorrupt import cli
from sparsecorrupt.dictionaries import profile
from sparsecorrupt.pgm import read_pgm, write_pgm
from sparsecorrupt.signals import load_sparse_csv
from sparsecorrupt.specs import dictionary_pair


def run(capsys, *argv):
    code = cli.main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_parse_range():
    assert cli.parse_range("1:4") == [1, 2, 3, 4]
    assert cli.parse_range("2:10:4") == [2, 6, 10]
    assert cli.parse_range("3,5") == [3, 5]
    assert cli.parse_range("7") == [7]


def test_coherence_dft_identity(capsys):
    code, out, _ = run(capsys, "coherence", "--a", "dft:64", "--b", "identity:64")
    assert code == 0
    assert out.strip() == "mu_a=0 mu_b=0 mu_m=0.125 mu_d=0.125"


def test_coherence_identical_bases(capsys):
    code, out, _ = run(capsys, "coherence", "--a", "identity:4", "--b", "identity:4")
    assert code == 0 and "mu_m=1 " in out


def test_coherence_etf_passthrough(capsys):
    spec = "etf:16x20:seed=1:iter=2000"
    code, out, _ = run(capsys, "coherence", "--a", spec, "--b", "etf-partner")
    prof = profile(*dictionary_pair(spec, "etf-partner"))
    assert code == 0
    assert f"mu_m={prof.mu_m:.6g}" in out


def test_threshold(capsys, tmp_path):
    code, out, _ = run(capsys, "threshold", "--case", "caseI", "--a", "dft:64", "--b", "identity:64",
                       "--ne-range", "8", "--out-dir", str(tmp_path))
    assert code == 0 and out.splitlines()[1].endswith(",8,7")
    text = (tmp_path / "threshold_caseI.csv").read_text()
    assert text.startswith("# sparsecorrupt threshold") and "config_hash:" in text
    code, out, _ = run(capsys, "threshold", "--case", "caseIII", "--mu-m", "0.125", "--ne-range", "8,17")
    rows = out.splitlines()[1:]
    assert rows[0].endswith(",8,1") and rows[1].endswith(",17,0")


def test_generate_recover_roundtrip(capsys, tmp_path):
    inst = tmp_path / "inst"
    assert run(capsys, "generate", "--a", "dft:16", "--b", "identity:16", "--nx", "2", "--ne", "2",
               "--seed", "9", "--out-dir", str(inst))[0] == 0
    for case, extra in (("caseI", ["--x-support", str(inst / "x.csv"), "--e-support", str(inst / "e.csv")]),
                        ("caseII_E", ["--e-support", str(inst / "e.csv")]),
                        ("caseIV", ["--method", "omp", "--nx", "2", "--ne", "2"])):
        out_dir = tmp_path / case
        code, out, err = run(capsys, "recover", "--a", "dft:16", "--b", "identity:16",
                             "--z", str(inst / "z.csv"), "--case", case, "--truth", str(inst / "x.csv"),
                             "--out-dir", str(out_dir), *extra)
        assert code == 0, err
        x = load_sparse_csv(inst / "x.csv")
        xh = load_sparse_csv(out_dir / "x_hat.csv")
        assert np.allclose(xh.values, x.values, atol=1e-8)
        assert "config_hash:" in (out_dir / "report.txt").read_text()


def test_recover_degenerate_haar_mask_exit_code(capsys, tmp_path):
    from sparsecorrupt.signals import SparseVector, save_sparse_csv, save_vector_csv
    side = 8
    e = np.zeros(side * side)
    e[[0, 1, side, side + 1]] = 1.0
    save_sparse_csv(tmp_path / "e.csv", SparseVector.from_dense(e))
    save_vector_csv(tmp_path / "z.csv", e)
    code, _, err = run(capsys, "recover", "--a", "haar2d:8:octaves=2", "--b", "identity:64",
                       "--z", str(tmp_path / "z.csv"), "--case", "caseII_E",
                       "--e-support", str(tmp_path / "e.csv"), "--out-dir", str(tmp_path / "o"))
    assert code == cli.EXIT_NUMERICAL
    assert "columns" in err


def test_exit_codes(capsys, tmp_path):
    assert run(capsys, "recover", "--a", "dft:4", "--b", "identity:4", "--z",
               str(tmp_path / "missing.csv"), "--case", "caseIV")[0] == cli.EXIT_IO
    assert run(capsys, "coherence", "--a", "dft:4", "--b", "identity:8")[0] == cli.EXIT_PRECONDITION
    assert run(capsys, "coherence", "--a", "dft:4")[0] == cli.EXIT_USAGE
    assert len({cli.EXIT_IO, cli.EXIT_PRECONDITION, cli.EXIT_NUMERICAL, cli.EXIT_USAGE}) == 4


def test_phase_smoke_and_determinism(capsys, tmp_path):
    args = ["phase", "--a", "hadamard:16", "--b", "identity:16", "--case", "caseII_E",
            "--method", "omp", "--nx-range", "1:4", "--ne-range", "1:4", "--trials", "5", "--seed", "2"]
    assert run(capsys, *args, "--threads", "1", "--out-dir", str(tmp_path / "a"))[0] == 0
    assert run(capsys, *args, "--threads", "2", "--out-dir", str(tmp_path / "b"))[0] == 0
    a = (tmp_path / "a" / "grid.csv").read_text().splitlines()
    b = (tmp_path / "b" / "grid.csv").read_text().splitlines()
    # same config hash and identical results regardless of thread count
    assert a[2] == b[2] and a[3:] == b[3:]
    assert len(a) == 3 + 1 + 16
    assert (tmp_path / "a" / "contour.csv").exists()


def test_phase_from_config_file(capsys, tmp_path):
    cfg = tmp_path / "run.ini"
    cfg.write_text("[phase]\na = dft:8\nb = identity:8\ncase = caseI\ntrials = 4\ndiagonal = yes\n"
                   "nx-range = 1:3\nne-range = 1:3\n")
    code, out, _ = run(capsys, "phase", "--config", str(cfg), "--threads", "1",
                       "--out-dir", str(tmp_path / "o"))
    assert code == 0 and "diagonal crossing" in out
    text = (tmp_path / "o" / "grid.csv").read_text()
    assert '"trials": 4' in text and '"diagonal": true' in text
    assert run(capsys, "phase", "--config", str(tmp_path / "nope.ini"))[0] == cli.EXIT_IO


def test_inpaint_synthetic(capsys, tmp_path):
    code, out, _ = run(capsys, "inpaint", "--synthetic", "16", "--transform", "dct",
                       "--case", "caseI", "--out-dir", str(tmp_path))
    assert code == 0 and "mse_db=" in out
    for name in ("restored", "sparsified", "corrupted"):
        assert read_pgm(tmp_path / f"{name}.pgm").shape == (16, 16)
    assert b"config_hash" in (tmp_path / "restored.pgm").read_bytes()[:2000]


def test_inpaint_with_image_and_mask(capsys, tmp_path):
    img = np.linspace(0, 0.8, 64).reshape(8, 8)
    mask = np.zeros((8, 8))
    mask[2, 3:6] = 1
    write_pgm(tmp_path / "img.pgm", img)
    write_pgm(tmp_path / "mask.pgm", mask)
    code, out, _ = run(capsys, "inpaint", "--image", str(tmp_path / "img.pgm"), "--mask",
                       str(tmp_path / "mask.pgm"), "--case", "caseII_E", "--out-dir", str(tmp_path / "o"))
    assert code == 0
    write_pgm(tmp_path / "odd.pgm", np.zeros((6, 6)))
    assert run(capsys, "inpaint", "--image", str(tmp_path / "odd.pgm"),
               "--out-dir", str(tmp_path / "p"))[0] == cli.EXIT_PRECONDITION
