import numpy as np
import pytest
from PIL import Image

from bgsweep.datasets import (
    Layout,
    SequenceSpec,
    SyntheticConfig,
    export_synthetic,
    generate_synthetic,
    load_sequence,
    read_gray,
    synthetic_truth,
    write_pgm,
)
from bgsweep.errors import (
    ConfigError,
    DecodeError,
    FrameDimensionError,
    MissingSequenceError,
    NumberingGapError,
    SequenceError,
)


def make_cd_sequence(root, n=6, size=(5, 4), roi=None, rgb=True):
    (root / "input").mkdir(parents=True)
    (root / "groundtruth").mkdir()
    rng = np.random.default_rng(0)
    frames = []
    for i in range(1, n + 1):
        gray = rng.integers(0, 256, size=size[::-1], dtype=np.uint8)
        frames.append(gray)
        img = np.dstack([gray] * 3) if rgb else gray
        Image.fromarray(img).save(root / "input" / f"in{i:06d}.png")
        gt = np.where(gray > 128, 255, 0).astype(np.uint8)
        Image.fromarray(gt).save(root / "groundtruth" / f"gt{i:06d}.png")
    if roi:
        (root / "temporalROI.txt").write_text(f"{roi[0]} {roi[1]}\n")
    return SequenceSpec(name=root.name, input_dir=root / "input",
                        groundtruth_dir=root / "groundtruth")


def test_changedetection_load(tmp_path):
    spec = make_cd_sequence(tmp_path / "highway")
    items = list(load_sequence(spec))
    assert [it.index for it in items] == list(range(1, 7))
    for it in items:
        assert it.frame.dtype == np.uint8 and it.frame.shape == (4, 5)
        assert it.truth.shape == it.frame.shape
        assert np.array_equal(it.truth, np.where(it.frame > 128, 255, 0))


def test_temporal_roi_restricts_scoring_not_frames(tmp_path):
    spec = make_cd_sequence(tmp_path / "seq", n=8, roi=(3, 6))
    items = list(load_sequence(spec))
    assert len(items) == 8
    assert [it.index for it in items if it.scored] == [3, 4, 5, 6]
    assert all(it.frame is not None for it in items)
    # ROI honoured from the file but can be switched off
    assert sum(it.scored for it in load_sequence(spec, honor_roi=False)) == 8


def test_temporal_roi_large_indices(tmp_path):
    # "470 1700"-style files are parsed as first/last 1-based indices
    (tmp_path / "temporalROI.txt").write_text("470 1700")
    from bgsweep.datasets import read_temporal_roi
    assert read_temporal_roi(tmp_path / "temporalROI.txt") == (470, 1700)


def test_temporal_roi_out_of_range(tmp_path):
    spec = make_cd_sequence(tmp_path / "seq", n=4, roi=(2, 9))
    with pytest.raises(ConfigError):
        list(load_sequence(spec))


def test_empty_directory(tmp_path):
    (tmp_path / "input").mkdir()
    with pytest.raises(MissingSequenceError):
        list(load_sequence(SequenceSpec(name="x", input_dir=tmp_path / "input")))


def test_missing_directory(tmp_path):
    with pytest.raises(MissingSequenceError):
        list(load_sequence(SequenceSpec(name="x", input_dir=tmp_path / "nope")))


def test_numbering_gap_names_file(tmp_path):
    spec = make_cd_sequence(tmp_path / "seq", n=5)
    (spec.input_dir / "in000003.png").unlink()
    with pytest.raises(NumberingGapError) as err:
        list(load_sequence(spec))
    assert "in000004.png" in str(err.value)


def test_undecodable_frame(tmp_path):
    spec = make_cd_sequence(tmp_path / "seq", n=3)
    (spec.input_dir / "in000002.png").write_bytes(b"not an image")
    with pytest.raises(DecodeError) as err:
        list(load_sequence(spec))
    assert "in000002.png" in str(err.value)


def test_groundtruth_dimension_mismatch(tmp_path):
    spec = make_cd_sequence(tmp_path / "seq", n=3)
    Image.fromarray(np.zeros((3, 3), np.uint8)).save(spec.groundtruth_dir / "gt000002.png")
    with pytest.raises(FrameDimensionError) as err:
        list(load_sequence(spec))
    assert "gt000002.png" in str(err.value)


def test_missing_groundtruth_for_scored_frame(tmp_path):
    spec = make_cd_sequence(tmp_path / "seq", n=3)
    (spec.groundtruth_dir / "gt000003.png").unlink()
    with pytest.raises(MissingSequenceError):
        list(load_sequence(spec))


def test_rgb_frames_converted_at_load(tmp_path):
    path = tmp_path / "c.png"
    Image.fromarray(np.array([[[255, 0, 0], [0, 0, 255]]], dtype=np.uint8)).save(path)
    assert read_gray(path).tolist() == [[76, 29]]


def test_cmu_layout(tmp_path):
    (tmp_path / "frames").mkdir()
    (tmp_path / "masks").mkdir()
    rng = np.random.default_rng(1)
    for i in range(4):
        Image.fromarray(rng.integers(0, 256, (6, 5, 3), dtype=np.uint8)).save(
            tmp_path / "frames" / f"img_{i:04d}.tif")
        Image.fromarray(np.array([[0, 128, 127, 255, 200]] * 6, dtype=np.uint8)).save(
            tmp_path / "masks" / f"mask{i}.png")
    spec = SequenceSpec(name="cmu", input_dir=tmp_path / "frames",
                        groundtruth_dir=tmp_path / "masks", layout=Layout.CMU)
    items = list(load_sequence(spec))
    assert len(items) == 4
    assert items[0].truth[0].tolist() == [0, 255, 0, 255, 255]


def test_cmu_custom_pattern_and_count_mismatch(tmp_path):
    (tmp_path / "f").mkdir()
    (tmp_path / "m").mkdir()
    for i in range(3):
        write_pgm(tmp_path / "f" / f"cam1-{i + 10}.pgm", np.zeros((2, 2), np.uint8))
    for i in range(2):
        write_pgm(tmp_path / "m" / f"cam1-{i + 10}.pgm", np.zeros((2, 2), np.uint8))
    spec = SequenceSpec(name="c", input_dir=tmp_path / "f", groundtruth_dir=tmp_path / "m",
                        layout="cmu", frame_pattern=r"^cam1-(\d+)\.pgm$",
                        mask_pattern=r"^cam1-(\d+)\.pgm$")
    with pytest.raises(SequenceError):
        list(load_sequence(spec))


def test_synthetic_single_frame_no_noise():
    cfg = SyntheticConfig(width=10, height=8, frames=1, square_size=3, noise_amplitude=0,
                          background_level=20, square_level=220)
    [(frame, truth)] = list(generate_synthetic(cfg))
    expected = np.zeros((8, 10), np.uint8)
    expected[:3, :3] = 255
    assert np.array_equal(truth, expected)
    assert np.array_equal(frame, np.where(expected == 255, 220, 20))


def test_synthetic_static_truth():
    cfg = SyntheticConfig(width=12, height=12, frames=5, square_size=4, velocity=(0, 0))
    truths = [t for _, t in generate_synthetic(cfg)]
    assert all(np.array_equal(truths[0], t) for t in truths)


def test_synthetic_deterministic():
    cfg = SyntheticConfig(width=16, height=16, frames=4, square_size=4, seed=7)
    a = list(generate_synthetic(cfg))
    b = list(generate_synthetic(cfg))
    assert all(np.array_equal(x[0], y[0]) and np.array_equal(x[1], y[1]) for x, y in zip(a, b))


def test_synthetic_wraps_and_keeps_area():
    cfg = SyntheticConfig(width=20, height=14, frames=30, square_size=6, velocity=(7, -5))
    for t in range(cfg.frames):
        truth = synthetic_truth(cfg, t)
        assert np.count_nonzero(truth == 255) == 36


def test_synthetic_noise_bounds():
    cfg = SyntheticConfig(width=30, height=30, frames=3, noise_amplitude=4, square_size=5,
                          background_level=100, square_level=200)
    for frame, truth in generate_synthetic(cfg):
        bg = frame[truth == 0].astype(int)
        fg = frame[truth == 255].astype(int)
        assert bg.min() >= 96 and bg.max() <= 104
        assert fg.min() >= 196 and fg.max() <= 204


@pytest.mark.parametrize("bad", [
    dict(square_level=60, background_level=50, noise_amplitude=5),
    dict(square_size=0),
    dict(square_size=200),
    dict(frames=0),
])
def test_synthetic_config_validation(bad):
    with pytest.raises(ConfigError):
        SyntheticConfig(**bad)


def test_export_round_trip(tmp_path):
    cfg = SyntheticConfig(width=9, height=7, frames=3, square_size=3, seed=2)
    spec = export_synthetic(cfg, tmp_path / "synth")
    loaded = list(load_sequence(spec))
    generated = list(generate_synthetic(cfg))
    assert len(loaded) == 3
    for item, (frame, truth) in zip(loaded, generated):
        assert np.array_equal(item.frame, frame)
        assert np.array_equal(item.truth, truth)
    assert (tmp_path / "synth" / "input" / "in000001.pgm").read_bytes().startswith(b"P5")


def test_in_memory_synthetic_spec():
    cfg = SyntheticConfig(width=8, height=8, frames=4, square_size=2)
    items = list(load_sequence(SequenceSpec.from_synthetic(cfg)))
    assert [it.index for it in items] == [1, 2, 3, 4]
    assert all(it.scored for it in items)
