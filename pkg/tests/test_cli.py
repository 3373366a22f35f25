import numpy as np
import pytest

from lerf import Flow, load_image, make_constant_bank, save_flow, save_image, save_lut_bank
from lerf.cli import main
from lerf.kernels import aniso_gaussian

from conftest import random_image, smooth_image


@pytest.fixture
def png(tmp_path):
    p = tmp_path / "in.png"
    save_image(smooth_image(2, 24, 20), p)
    return p


@pytest.fixture
def bank_file(tmp_path):
    p = tmp_path / "bank.lerf"
    save_lut_bank(make_constant_bank(aniso_gaussian(), [0.0, 1.0, 1.0]), p)
    return p


def test_resize_identity_roundtrip(png, tmp_path):
    out = tmp_path / "out.png"
    assert main(["resize", "--in", str(png), "--out", str(out),
                 "--scale", "1.0", "--kernel", "bicubic"]) == 0
    np.testing.assert_array_equal(load_image(out).data, load_image(png).data)


def test_resize_asymmetric_dims(png, tmp_path):
    out = tmp_path / "out.png"
    assert main(["resize", "--in", str(png), "--out", str(out),
                 "--scale", "2.0", "--scale-w", "2.4", "--kernel", "lanczos3"]) == 0
    img = load_image(out)
    assert (img.height, img.width) == (48, 48)


def test_resize_lerf_g_with_bank(png, bank_file, tmp_path):
    out = tmp_path / "out.png"
    assert main(["resize", "--in", str(png), "--out", str(out),
                 "--scale", "2.0", "--kernel", "lerf-g", "--lut", str(bank_file)]) == 0
    assert load_image(out).height == 48


def test_resize_downscale_with_aa(png, tmp_path):
    out = tmp_path / "out.png"
    assert main(["resize", "--in", str(png), "--out", str(out),
                 "--scale", "0.5", "--kernel", "bilinear", "--aa"]) == 0
    assert load_image(out).height == 12


def test_resize_with_hyper_map(png, tmp_path):
    hm = np.zeros((24, 20, 3))
    hm[..., 1:] = 1.0
    np.save(tmp_path / "map.npy", hm)
    out = tmp_path / "out.png"
    assert main(["resize", "--in", str(png), "--out", str(out), "--scale", "2.0",
                 "--kernel", "lerf-g", "--hyper-map", str(tmp_path / "map.npy")]) == 0


def test_missing_input_exit_3(tmp_path):
    assert main(["resize", "--in", str(tmp_path / "nope.png"),
                 "--out", str(tmp_path / "o.png"), "--scale", "2.0"]) == 3


def test_bad_bank_exit_4(png, tmp_path):
    bad = tmp_path / "bad.lerf"
    bad.write_bytes(b"NOT A BANK")
    assert main(["resize", "--in", str(png), "--out", str(tmp_path / "o.png"),
                 "--scale", "2.0", "--kernel", "lerf-g", "--lut", str(bad)]) == 4


def test_missing_bank_exit_2(png, tmp_path):
    assert main(["resize", "--in", str(png), "--out", str(tmp_path / "o.png"),
                 "--scale", "2.0", "--kernel", "lerf-g"]) == 2


def test_warp_identity_with_mask(png, tmp_path):
    mat = tmp_path / "H.txt"
    mat.write_text("1 0 0 0 1 0 0 0 1")
    out = tmp_path / "w.png"
    mask = tmp_path / "m.png"
    assert main(["warp", "--in", str(png), "--out", str(out), "--matrix", str(mat),
                 "--kernel", "bicubic", "--emit-mask", str(mask)]) == 0
    np.testing.assert_array_equal(load_image(out).data, load_image(png).data)
    assert np.all(load_image(mask).data == 1.0)


def test_warp_out_size_and_forward(png, tmp_path):
    mat = tmp_path / "H.txt"
    mat.write_text("2 0 0 0 2 0 0 0 1")  # forward: source -> target x2
    out = tmp_path / "w.png"
    assert main(["warp", "--in", str(png), "--out", str(out), "--matrix", str(mat),
                 "--forward", "--out-size", "48x40", "--kernel", "bilinear"]) == 0
    assert load_image(out).height == 48


def test_flow_warp_zero_flow(png, tmp_path):
    flo = tmp_path / "z.flo"
    save_flow(Flow(np.zeros((24, 20, 2))), flo)
    out = tmp_path / "f.png"
    assert main(["flow-warp", "--in", str(png), "--out", str(out),
                 "--flow", str(flo), "--kernel", "bilinear"]) == 0
    np.testing.assert_array_equal(load_image(out).data, load_image(png).data)


def test_bench_cli(tmp_path, capsys):
    d = tmp_path / "data"
    d.mkdir()
    for i in range(2):
        save_image(smooth_image(i, 32, 32), d / f"i{i}.png")
    csv = tmp_path / "out.csv"
    assert main(["bench", "--dataset", str(d), "--tasks", "2.0x2.0",
                 "--kernel", "bicubic", "--csv", str(csv)]) == 0
    assert "2x2" in capsys.readouterr().out
    assert csv.exists()
    assert main(["bench", "--dataset", str(d), "--tasks", "garbage",
                 "--kernel", "bicubic"]) == 2


def test_warp_bench_cli(tmp_path, capsys):
    d = tmp_path / "data"
    m = tmp_path / "mats"
    d.mkdir()
    m.mkdir()
    for i in range(2):
        save_image(smooth_image(i, 32, 32), d / f"i{i}.png")
        (m / f"i{i}.txt").write_text("1 0 1.5 0 1 0.5 0 0 1")
    assert main(["warp-bench", "--dataset", str(d), "--matrices", str(m),
                 "--kernel", "bicubic"]) == 0
    assert "roundtrip" in capsys.readouterr().out


def test_cli_misuse_exits_2():
    with pytest.raises(SystemExit) as e:
        main(["resize", "--in", "x.png"])  # missing required args
    assert e.value.code == 2
