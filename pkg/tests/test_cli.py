import subprocess
import sys

import numpy as np
import pytest

from isf import cli
from isf.formats import read_labels, read_metrics_csv, read_pnm_raw, write_labels, write_pnm
from isf.metrics import undersegmentation_error

from scenes import disk_image, textured_rgb


@pytest.fixture
def disk_files(tmp_path):
    rgb, gt = disk_image()
    img, gtp = tmp_path / "disk.ppm", tmp_path / "disk_gt.pgm"
    img.write_bytes(write_pnm(rgb))
    gtp.write_bytes(write_labels(gt))
    return img, gtp


def _rows(text):
    return read_metrics_csv(text.encode())


def test_segment_two_region_fixture_recalls_the_border(disk_files, tmp_path, capsys):
    img, gt = disk_files
    out = tmp_path / "labels.pgm"
    code = cli.main(
        ["segment", "--input", str(img), "--superpixels", "16", "--labels", str(out),
         "--gt", str(gt), "--overlay", str(tmp_path / "o.ppm"),
         "--seed-dump", str(tmp_path / "seeds.csv"), "--figure", str(tmp_path / "f.png")]
    )
    assert code == 0
    text = capsys.readouterr().out
    assert text.splitlines()[1].split(",")[4] == "1.000000"
    assert _rows(text)[0].k == 16
    assert read_labels(out.read_bytes()).shape == (64, 64)
    assert (tmp_path / "f.png").read_bytes()[:4] == b"\x89PNG"
    assert (tmp_path / "seeds.csv").read_text().count("\n") == 17


def test_overlay_has_no_magenta_only_pixels_when_border_is_recalled(disk_files, tmp_path):
    img, gt = disk_files
    ov = tmp_path / "o.ppm"
    cli.main(["segment", "--input", str(img), "-k", "16", "--labels", str(tmp_path / "l.pgm"),
              "--gt", str(gt), "--overlay", str(ov)])
    arr, _ = read_pnm_raw(ov.read_bytes())
    labels = read_labels((tmp_path / "l.pgm").read_bytes())
    # no leakage means every ground-truth border site is also a superpixel border
    assert undersegmentation_error(labels, read_labels(gt.read_bytes())) == 0.0
    assert not np.all(arr == (255, 0, 255), axis=2).any()


def test_regmin_on_constant_image_reports_one_superpixel(tmp_path, capsys):
    img = tmp_path / "flat.ppm"
    img.write_bytes(write_pnm(np.full((20, 30, 3), 77, np.uint8)))
    code = cli.main(["segment", "--input", str(img), "--method", "regmin", "-k", "12",
                     "--labels", str(tmp_path / "l.pgm"), "--verbose"])
    assert code == 0
    err = capsys.readouterr().err
    assert "k'=1" in err and "iter 1: F=0.000000" in err


def test_missing_input_exits_2(tmp_path, capsys):
    code = cli.main(["segment", "--input", str(tmp_path / "nope.ppm"), "-k", "4",
                     "--labels", str(tmp_path / "l.pgm")])
    assert code == 2
    assert "nope.ppm" in capsys.readouterr().err


def test_corrupt_input_exits_2(tmp_path):
    bad = tmp_path / "bad.ppm"
    bad.write_bytes(b"P6\n4 4\n255\n\x00")
    assert cli.main(["segment", "--input", str(bad), "-k", "4",
                     "--labels", str(tmp_path / "l.pgm")]) == 2


@pytest.mark.parametrize(
    "argv",
    [
        [],
        ["segment", "--input", "x.ppm", "-k", "4"],
        ["segment", "--input", "x.ppm", "-k", "4", "--labels", "l", "--bogus"],
        ["segment", "--input", "x.ppm", "-k", "four", "--labels", "l"],
        ["segment", "--input", "x.ppm", "-k", "4", "--labels", "l", "--method", "slic"],
        ["bench", "--input", "x", "--superpixels", "1,a"],
        ["teleport"],
    ],
)
def test_invalid_flags_exit_64(argv, capsys):
    with pytest.raises(SystemExit) as exc:
        cli.main(argv)
    assert exc.value.code == 64
    assert "usage" in capsys.readouterr().err


def test_out_of_range_parameters_exit_64(disk_files, tmp_path):
    img, _ = disk_files
    base = ["segment", "--input", str(img), "--labels", str(tmp_path / "l.pgm")]
    assert cli.main(base + ["-k", "2"]) == 64  # mixed sampling needs k >= 4
    assert cli.main(base + ["-k", "8", "--alpha", "-1"]) == 64
    assert cli.main(base + ["-k", "8", "--iters", "0"]) == 64


def test_internal_invariant_failure_exits_70(disk_files, tmp_path, monkeypatch):
    from isf.forest import VerificationReport

    def broken(*_a, **_k):
        rep = VerificationReport()
        rep.record("connected", False, "forced")
        return rep

    monkeypatch.setattr(cli, "verify_forest", broken)
    img, _ = disk_files
    assert cli.main(["segment", "--input", str(img), "-k", "8",
                     "--labels", str(tmp_path / "l.pgm")]) == 70


def test_metrics_identity_and_mismatch(disk_files, tmp_path, capsys):
    _, gt = disk_files
    assert cli.main(["metrics", "--labels", str(gt), "--gt", str(gt)]) == 0
    row = _rows(capsys.readouterr().out)[0]
    assert (row.br, row.ue, row.dice) == (1.0, 0.0, 1.0)
    small = tmp_path / "small.pgm"
    small.write_bytes(write_labels(np.ones((3, 3), np.int64)))
    assert cli.main(["metrics", "--labels", str(small), "--gt", str(gt)]) == 65


def test_segment_with_mismatched_ground_truth_exits_65(disk_files, tmp_path):
    img, _ = disk_files
    small = tmp_path / "small.pgm"
    small.write_bytes(write_labels(np.ones((3, 3), np.int64)))
    assert cli.main(["segment", "--input", str(img), "-k", "8", "--gt", str(small),
                     "--labels", str(tmp_path / "l.pgm")]) == 65


def test_bench_emits_one_row_per_k(tmp_path, capsys):
    img = tmp_path / "tex.ppm"
    img.write_bytes(write_pnm(textured_rgb(40, 40)))
    fig = tmp_path / "bench.png"
    code = cli.main(["bench", "--input", str(img), "--superpixels", "250,500",
                     "--iters", "2", "--figure", str(fig)])
    assert code == 0
    rows = _rows(capsys.readouterr().out)
    assert [r.k for r in rows] == [250, 500]
    assert all(r.seconds > 0 and r.br is None for r in rows)
    assert fig.read_bytes()[:4] == b"\x89PNG"


def test_bench_directory_with_ground_truth(disk_files, tmp_path):
    img, gt = disk_files
    idir, gdir = tmp_path / "images", tmp_path / "gt"
    idir.mkdir()
    gdir.mkdir()
    (idir / "disk.ppm").write_bytes(img.read_bytes())
    (gdir / "disk.pgm").write_bytes(gt.read_bytes())
    out = tmp_path / "sweep.csv"
    code = cli.main(["bench", "--input", str(idir), "--superpixels", "16",
                     "--alpha", "0.04,0.5", "--gt", str(gdir), "--out", str(out),
                     "--iters", "3", "--figure", str(tmp_path / "b.png")])
    assert code == 0
    rows = read_metrics_csv(out.read_bytes())
    assert [(r.image, r.alpha) for r in rows] == [("disk.ppm", 0.04), ("disk.ppm", 0.5)]
    assert all(r.br == 1.0 for r in rows)


def test_bench_timer_brackets_only_the_segmentation_call(disk_files, monkeypatch):
    img, _ = disk_files
    events = []
    real_read, real_run = cli._read, cli.isf_run

    def read(path):
        events.append("read")
        return real_read(path)

    def run(lattice, config):
        events.append("run")
        return real_run(lattice, config)

    def timer():
        events.append("tick")
        return float(len(events))

    monkeypatch.setattr(cli, "_read", read)
    monkeypatch.setattr(cli, "isf_run", run)
    args = cli.build_parser().parse_args(
        ["bench", "--input", str(img), "--superpixels", "8,16", "--repeat", "2", "--iters", "2"]
    )
    rows = cli.bench_rows(args, timer=timer)
    assert len(rows) == 2
    ticks = [i for i, e in enumerate(events) if e == "tick"]
    assert len(ticks) == 8
    for start, stop in zip(ticks[::2], ticks[1::2]):
        assert events[start + 1 : stop] == ["run"]
    assert events.index("read") < ticks[0]


def test_repeat_must_be_positive(disk_files):
    img, _ = disk_files
    assert cli.main(["bench", "--input", str(img), "--superpixels", "8", "--repeat", "0"]) == 64


def test_bench_empty_directory_exits_2(tmp_path):
    assert cli.main(["bench", "--input", str(tmp_path), "--superpixels", "8"]) == 2


# -- sky ---------------------------------------------------------------------------


def _sky_scene():
    rgb = np.zeros((48, 64, 3), np.uint8)
    rgb[:20] = (110, 160, 230)
    rgb[20:] = (70, 90, 40)
    rng = np.random.default_rng(0)
    noisy = rgb.astype(float) + rng.normal(0, 2, rgb.shape)
    return np.clip(np.rint(noisy), 0, 255).astype(np.uint8)


def test_sky_mask_is_the_flat_top_region(tmp_path, capsys):
    img = tmp_path / "sky.ppm"
    img.write_bytes(write_pnm(_sky_scene()))
    gt = np.zeros((48, 64), np.int64)
    gt[:20] = 1
    gtp = tmp_path / "sky_gt.pgm"
    gtp.write_bytes(write_labels(gt))
    out = tmp_path / "mask.pgm"
    code = cli.main(["sky", "--input", str(img), "-k", "48", "--threshold", "10",
                     "--out", str(out), "--gt", str(gtp)])
    assert code == 0
    mask, maxval = read_pnm_raw(out.read_bytes())
    assert maxval == 255 and set(np.unique(mask)) <= {0, 255}
    assert np.array_equal(mask == 255, gt == 1)
    assert _rows(capsys.readouterr().out)[0].dice == 1.0


def test_zero_threshold_picks_largest_top_superpixel():
    from isf import IsfConfig, Lattice, isf_run
    from isf.sky import sky_mask

    lat = Lattice.from_rgb(textured_rgb(40, 40, seed=4))
    labels, _ = isf_run(lat, IsfConfig("mix-mean", 30, alpha=0.08))
    img = lat.as_image(labels)
    top = np.unique(img[0])
    sizes = {v: np.count_nonzero(img == v) for v in top}
    best = max(sorted(sizes), key=lambda v: sizes[v])
    mask = sky_mask(lat, labels, 0.0)
    assert mask.any()
    assert np.array_equal(mask, img == best)


def test_sky_needs_a_color_image(tmp_path):
    img = tmp_path / "g.pgm"
    img.write_bytes(write_pnm(np.zeros((8, 8), np.uint8)))
    assert cli.main(["sky", "--input", str(img), "-k", "4", "--threshold", "1",
                     "--out", str(tmp_path / "m.pgm")]) == 64


def test_module_entry_point_runs():
    proc = subprocess.run([sys.executable, "-m", "isf", "--help"], capture_output=True, text=True)
    assert proc.returncode == 0 and "segment" in proc.stdout
