import numpy as np
import pytest
from PIL import Image

from obbfuse.annotations import VISIBLE, AnnotationRecord, ModalityLabelSet
from obbfuse.edgeops import mge
from obbfuse.errors import ShapeMismatch
from obbfuse.geometry import RotatedBox, quad_from_rbox
from obbfuse.render import (
    category_color,
    export_edge_map,
    normalize_u16,
    render_overlay,
    write_pgm16,
)


@pytest.fixture
def png_image(tmp_path, rng):
    path = tmp_path / "scene.png"
    pixels = (rng.random((32, 48, 3)) * 255).astype(np.uint8)
    Image.fromarray(pixels).save(path)
    return path


def labels_of(boxes, categories, image_id="scene"):
    records = tuple(
        AnnotationRecord(box=b, category=c, source=VISIBLE) for b, c in zip(boxes, categories)
    )
    return ModalityLabelSet(image_id, VISIBLE, records)


class TestOverlay:
    def test_empty_labels_render_no_paths(self, png_image):
        svg = render_overlay(png_image, labels_of([], []))
        assert svg.count("<path") == 0
        assert 'width="48" height="32"' in svg
        assert "base64," in svg

    def test_single_box_path_uses_quad_corners(self, png_image):
        box = RotatedBox(10, 10, 8, 4, 0)
        svg = render_overlay(png_image, labels_of([box], ["car"]))
        assert svg.count("<path") == 1
        for x, y in quad_from_rbox(box).vertices:
            assert f"{x:.2f} {y:.2f}" in svg

    def test_three_records_three_paths_and_colors_stable(self, png_image):
        boxes = [RotatedBox(8, 8, 6, 3, 0.2), RotatedBox(24, 16, 6, 3, -0.4), RotatedBox(40, 8, 6, 3, 1.0)]
        labels = labels_of(boxes, ["car", "bus", "car"])
        first = render_overlay(png_image, labels)
        second = render_overlay(png_image, labels)
        assert first == second  # byte-identical across runs
        assert first.count("<path") == 3
        assert first.count(category_color("car")) >= 2

    def test_category_color_is_deterministic_hex(self):
        assert category_color("car") == category_color("car")
        assert category_color("car") != category_color("bus")
        assert len(category_color("truck")) == 7


class TestEdgeMapExport:
    def test_constant_tensor_exports_zeros(self, tmp_path):
        path = tmp_path / "flat.pgm"
        export_edge_map(np.full((1, 4, 6), 3.3), path)
        data = path.read_bytes()
        header, samples = data.split(b"65535\n", 1)
        assert header == b"P5\n6 4\n"
        assert np.frombuffer(samples, dtype=">u2").tolist() == [0] * 24

    def test_step_image_produces_bright_band(self, tmp_path):
        u = np.zeros((3, 16, 16))
        u[:, :, 8:] = 1.0
        edge = mge(u)
        path = tmp_path / "step.pgm"
        export_edge_map(edge, path)
        data = path.read_bytes().split(b"65535\n", 1)[1]
        img = np.frombuffer(data, dtype=">u2").reshape(16, 16)
        assert img[:, 7:9].min() == 65535  # responses at the step columns
        assert img[:, :6].max() == 0

    def test_three_channel_collapse_is_pixelwise_max(self):
        x = np.zeros((3, 2, 2))
        x[0, 0, 0] = 1.0  # channel 0 normalizes to 65535 there
        x[1, 1, 1] = 2.0
        x[2] = 5.0  # flat channel collapses to zero
        out = normalize_u16(x)
        assert out.tolist() == [[65535, 0], [0, 65535]]

    def test_single_channel_kept_as_is(self):
        x = np.array([[[0.0, 1.0], [2.0, 4.0]]])
        out = normalize_u16(x)
        assert out.tolist() == [[0, 16384], [32768, 65535]]

    def test_png_export_round_trips(self, tmp_path, rng):
        path = tmp_path / "edge.png"
        x = rng.random((1, 8, 8))
        export_edge_map(x, path)
        back = np.asarray(Image.open(path))
        assert back.shape == (8, 8)
        assert back.max() == 65535

    def test_pgm_writer_validates_dtype(self):
        with pytest.raises(ShapeMismatch):
            write_pgm16("/tmp/never.pgm", np.zeros((4, 4), dtype=np.uint8))

    def test_channel_count_validated(self):
        with pytest.raises(ShapeMismatch):
            normalize_u16(np.zeros((2, 4, 4)))
