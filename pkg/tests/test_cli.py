import csv
import io

import numpy as np
import pytest

from se2n.apfun import read_coefficients, read_point_set
from se2n.cli import main
from se2n.diffusion import EPS_FLOOR
from se2n.drivers import blob_image, stripe_with_gap
from se2n.imageio import read_image, to_uint8, write_image


def rows(text):
    return list(csv.reader(io.StringIO(text)))


@pytest.fixture
def stripe(tmp_path):
    img, bad = stripe_with_gap(M=32, height=2, gap=2)
    path = tmp_path / "stripe.pgm"
    write_image(path, np.where(bad, 0.0, img))
    return path, img, bad


def test_image_round_trip(tmp_path, rng):
    img = rng.random((9, 7))
    for name in ("a.pgm", "a.png"):
        write_image(tmp_path / name, img)
        assert np.array_equal(to_uint8(read_image(tmp_path / name)), to_uint8(img))
    rgb = np.zeros((4, 4, 3), dtype=np.uint8)
    rgb[..., 1] = 255
    from PIL import Image

    Image.fromarray(rgb).save(tmp_path / "g.png")
    assert np.allclose(read_image(tmp_path / "g.png"), 0.587)


def test_inpaint(stripe, tmp_path, capsys):
    path, img, bad = stripe
    out = tmp_path / "res" / "out.pgm"
    code = main(["inpaint", str(path), "--n", "8", "--time", "0.1", "--steps", "2", "--intervals", "3",
                 "--out", str(out), "--report"])
    assert code == 0
    table = rows(capsys.readouterr().out)
    assert table[0] == ["round", "bad_pixels", "mass_residual"]
    assert len(table) == 5 and int(table[1][1]) == bad.sum()
    assert read_image(out).shape == (32, 32)
    assert out.with_suffix(".png").exists() and (out.parent / "out_badset.png").exists()


def test_inpaint_deterministic(stripe, tmp_path):
    path, _, _ = stripe
    outs = []
    for i in range(2):
        out = tmp_path / f"o{i}.pgm"
        assert main(["inpaint", str(path), "--n", "6", "--time", "0.05", "--steps", "1",
                     "--intervals", "2", "--out", str(out)]) == 0
        outs.append(out.read_bytes())
    assert outs[0] == outs[1]


def test_inpaint_time_zero(tmp_path, rng):
    img = rng.random((16, 16))
    img[img < 0.05] = 0.2
    src = tmp_path / "in.pgm"
    write_image(src, img)
    out = tmp_path / "out.pgm"
    assert main(["inpaint", str(src), "--time", "0", "--intervals", "1", "--steps", "1", "--out", str(out)]) == 0
    want = np.maximum(read_image(src), EPS_FLOOR)
    assert np.abs(read_image(out) - want).max() <= 1.5 / 255


def test_inpaint_mask_and_errors(stripe, tmp_path, capsys):
    path, img, bad = stripe
    mask = tmp_path / "mask.pgm"
    write_image(mask, bad.astype(float))
    assert main(["inpaint", str(path), "--mask", str(mask), "--n", "4", "--time", "0.01", "--steps", "1",
                 "--intervals", "1", "--out", str(tmp_path / "m.pgm")]) == 0
    small = tmp_path / "small.pgm"
    write_image(small, np.ones((8, 8)))
    assert main(["inpaint", str(path), "--mask", str(small), "--out", str(tmp_path / "x.pgm")]) == 2
    assert main(["inpaint", str(tmp_path / "missing.pgm"), "--out", str(tmp_path / "x.pgm")]) == 2
    write_image(tmp_path / "black.pgm", np.zeros((16, 16)))
    assert main(["inpaint", str(tmp_path / "black.pgm"), "--out", str(tmp_path / "x.pgm")]) == 2


def test_features(tmp_path, capsys):
    paths = []
    for s in (1, 2):
        p = tmp_path / f"img{s}.png"
        write_image(p, blob_image(48, seed=s) / blob_image(48, seed=s).max())
        paths.append(str(p))
    out = tmp_path / "feat.csv"
    assert main(["features", *paths, "--kind", "rpsbs", "--window", "4", "--out", str(out), "--report"]) == 0
    table = rows(out.read_text())
    assert table[0][:4] == ["id", "kind", "dim", "v0"]
    assert [r[0] for r in table[1:]] == ["img1.png", "img2.png"]
    dim = int(table[1][2])
    assert all(len(r) == 3 + dim for r in table[1:])
    assert out.with_suffix(".png").exists()
    assert rows(capsys.readouterr().out)[0] == ["id", "kind", "dim"]


def test_features_partial_failure(tmp_path):
    good = tmp_path / "ok.png"
    write_image(good, blob_image(32, seed=3) / 3)
    bad = tmp_path / "tiny.png"
    write_image(bad, np.ones((8, 8)))
    out = tmp_path / "f.csv"
    assert main(["features", str(good), str(bad), "--kind", "ps", "--window", "3", "--out", str(out)]) == 2
    assert len(rows(out.read_text())) == 2


def test_approx(tmp_path, capsys):
    out = tmp_path / "ap"
    assert main(["approx", "--out", str(out), "--report"]) == 0
    table = rows(capsys.readouterr().out)
    assert table[0] == ["method", "coefficients", "evaluation", "rotated", "translated"]
    interp, approx = (list(map(float, r[1:])) for r in table[1:])
    assert interp[1] == interp[2] and approx[1] == approx[2]
    assert interp[3] / interp[1] > 1e3
    assert read_coefficients(out / "interpolation.coef").shape == (8, 32)
    assert (out / "norms.png").exists() and (out / "norms.csv").exists()
    # explicit sets read back from the written files reproduce the table
    out2 = tmp_path / "ap2"
    assert main(["approx", "--e", str(out / "E.txt"), "--f", str(out / "F.txt"), "--out", str(out2)]) == 0
    assert (out2 / "norms.csv").read_text() == (out / "norms.csv").read_text()
    assert main(["approx", "--e", str(out / "E.txt"), "--out", str(out2)]) == 2


def test_approx_ill_posed(tmp_path):
    e = tmp_path / "e.txt"
    e.write_text("0.1 0.0\n0.2 0.0\n0.1 0.3926990816987241\n0.2 0.3926990816987241\n")
    assert main(["approx", "--e", str(e), "--f", str(e), "--out", str(tmp_path / "o")]) == 3


def test_freqset(tmp_path, capsys):
    out = tmp_path / "F4.txt"
    assert main(["freqset", "--n", "4", "--depth", "3", "--out", str(out), "--report"]) == 0
    table = rows(capsys.readouterr().out)
    assert table[0] == ["N", "depth", "Q", "has_zero", "admissible", "F1_size"]
    assert table[1][:5] == ["4", "3", "10", "1", "1"]
    xi, om = read_point_set(out)
    assert len(xi) == 10
    cert = (tmp_path / "F4_certificate.txt").read_text()
    assert cert.startswith("admissible True")
    assert out.with_suffix(".png").exists()


def test_freqset_seed_file_and_cap(tmp_path):
    seed = tmp_path / "seed.txt"
    seed.write_text("1.0 0.2\n")
    assert main(["freqset", "--n", "4", "--depth", "1", "--seed-file", str(seed), "--out", str(tmp_path / "a.txt")]) == 3
    assert main(["freqset", "--n", "7", "--depth", "4", "--cap", "100", "--out", str(tmp_path / "b.txt")]) != 0


def test_selftest(capsys):
    assert main(["selftest"]) == 0
    table = rows(capsys.readouterr().out)
    assert table[0] == ["check", "status"]
    assert all(r[1] == "pass" for r in table[1:]) and len(table) == 7


def test_bad_arguments():
    with pytest.raises(SystemExit) as exc:
        main(["features", "x.png", "--kind", "nope", "--out", "y"])
    assert exc.value.code == 2
