import os
import struct
import tempfile
import warnings

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from smashfilter.codecs import (
    atomic_write,
    boxes_csv,
    csv_bytes,
    decode_bank,
    decode_compressed,
    decode_filter,
    decode_matrix,
    decode_model,
    decode_pgm,
    decode_volume,
    encode_bank,
    encode_compressed,
    encode_filter,
    encode_matrix,
    encode_model,
    encode_pgm,
    encode_volume,
    manifest_bytes,
    read_any,
    read_boxes,
    read_csv,
    read_manifest,
    read_pgm_sequence,
    read_volume,
    render_overlay,
    write_pgm_sequence,
    write_volume,
)
from smashfilter.errors import FormatError, TruncationError
from smashfilter.inference import SvmModel
from smashfilter.localization import BoundingBox
from smashfilter.mach import MachFilter
from smashfilter.sensing import compress, compressed_temporal_derivative, make_matrix
from smashfilter.stsf import FilterBank, smashed_response
from smashfilter.view import AffineView


def f32(x):
    return np.asarray(x, dtype=np.float32).astype(np.float64)


def ppm_payload(data):
    # header "P6\n<w> <h>\n255\n"
    return data[data.index(b"255\n") + 4 :]


class TestVolume:
    def test_round_trip(self, rng, tmp_path):
        v = f32(rng.standard_normal((5, 4, 3)))
        write_volume(tmp_path / "v.rvf", v)
        np.testing.assert_array_equal(read_volume(tmp_path / "v.rvf"), v)

    def test_layout(self):
        v = np.arange(8.0).reshape(2, 2, 2)
        data = encode_volume(v)
        assert data[:4] == b"RVF1" and struct.unpack("<3I", data[4:16]) == (2, 2, 2)
        frame0 = np.frombuffer(data[16:32], dtype="<f4")
        np.testing.assert_array_equal(frame0, v[:, :, 0].ravel())
        assert len(data) == 16 + 8 * 4

    def test_truncation_names_counts(self, rng):
        data = encode_volume(rng.random((3, 3, 2)))
        with pytest.raises(TruncationError) as info:
            decode_volume(data[:-5])
        msg = str(info.value)
        assert str(len(data)) in msg and str(len(data) - 5) in msg

    def test_bad_magic(self):
        with pytest.raises(FormatError):
            decode_volume(b"XXXX" + bytes(12))

    def test_trailing_bytes(self, rng):
        data = encode_volume(rng.random((2, 2, 2)))
        with pytest.raises(FormatError):
            decode_volume(data + b"\0")


class TestFilters:
    def test_round_trip_all_tags(self, rng):
        vol = f32(rng.standard_normal((4, 3, 2)))
        view = AffineView(((1.0, 0.25), (0.0, 1.0)), (-2.0, 0.5))
        for tag in ["type1", "type2", ("compensated", view)]:
            f = MachFilter(vol, 0.5, 1e-3, 2.0, "wave", tag)
            g = decode_filter(encode_filter(f))
            np.testing.assert_array_equal(g.volume, f.volume)
            assert (g.alpha, g.beta, g.gamma, g.label, g.view_tag) == (0.5, 1e-3, 2.0, "wave", tag)

    def test_bank(self, rng):
        fs = [MachFilter(f32(rng.standard_normal((3, 3, 2))), label=l) for l in ["run", "walk", "run"]]
        bank = decode_bank(encode_bank(FilterBank(fs)))
        assert bank.actions == ["run", "walk"] and bank.filter_to_action == [0, 1, 0]
        for a, b in zip(bank.filters, fs):
            np.testing.assert_array_equal(a.volume, b.volume)

    def test_truncated_bank(self, rng):
        data = encode_bank(FilterBank([MachFilter(np.ones((2, 2, 2)), label="a")]))
        with pytest.raises(TruncationError):
            decode_bank(data[:30])


class TestMatrix:
    def test_seed_only_equals_materialized(self):
        m = make_matrix("bernoulli", 77, 6, 20)
        a = decode_matrix(encode_matrix(m))
        b = decode_matrix(encode_matrix(m, materialized=True))
        np.testing.assert_array_equal(a.entries, b.entries)
        np.testing.assert_array_equal(a.entries, m.entries)
        assert len(encode_matrix(m)) == 4 + 1 + 8 + 4 + 4 + 1

    def test_checksum_failure(self):
        data = bytearray(encode_matrix(make_matrix("gaussian", 3, 4, 9), materialized=True))
        data[-1] ^= 0x01
        with pytest.raises(FormatError, match="checksum"):
            decode_matrix(bytes(data))

    def test_large_seed(self):
        m = make_matrix("gaussian", 2**64 - 1, 3, 5)
        assert decode_matrix(encode_matrix(m)).seed == 2**64 - 1


class TestCompressed:
    def test_replay_gives_identical_response(self, rng, tmp_path):
        video = rng.standard_normal((8, 8, 6))
        m = make_matrix("gaussian", 12, 16, 64)
        z = compress(video, m, noise_sigma=0.25)
        atomic_write(tmp_path / "z.cmp", encode_compressed(z))
        z2 = read_any(tmp_path / "z.cmp", expect=[b"CMP1"])
        np.testing.assert_array_equal(z2.measurements, f32(z.measurements))
        assert z2.noise_sigma == 0.25 and z2.frame_dims == (8, 8)
        f = MachFilter(rng.standard_normal((3, 3, 2)))
        z_stored = decode_compressed(encode_compressed(z))
        a = smashed_response(compressed_temporal_derivative(z_stored), f).data
        b = smashed_response(compressed_temporal_derivative(z2), f).data
        np.testing.assert_array_equal(a, b)

    def test_derivative_order_kept(self, rng):
        m = make_matrix("gaussian", 1, 4, 9)
        z = compressed_temporal_derivative(compress(rng.random((3, 3, 4)), m))
        z2 = decode_compressed(encode_compressed(z))
        assert z2.derivative_order == 1 and z2.frames == 3


class TestModel:
    def test_round_trip(self, rng):
        model = SvmModel(rng.standard_normal((3, 5)), rng.standard_normal(3), rng.standard_normal(5), rng.random(5) + 0.1, list("abc"))
        got = decode_model(encode_model(model), classes=list("abc"))
        np.testing.assert_array_equal(got.weights, model.weights)
        np.testing.assert_array_equal(got.bias, model.bias)
        np.testing.assert_array_equal(got.feature_mean, model.feature_mean)
        np.testing.assert_array_equal(got.feature_std, model.feature_std)
        assert got.classes == list("abc")

    def test_read_any_rejects_unexpected(self, rng, tmp_path):
        write_volume(tmp_path / "v.rvf", rng.random((2, 2, 2)))
        with pytest.raises(FormatError):
            read_any(tmp_path / "v.rvf", expect=[b"MDL1"])


class TestPgm:
    def test_hand_built_pair(self, tmp_path):
        (tmp_path / "0001.pgm").write_bytes(b"P5\n2 2\n255\n" + bytes([255, 0, 51, 102]))
        (tmp_path / "0000.pgm").write_bytes(b"P5\n# comment\n2 2\n255\n" + bytes([0, 255, 0, 255]))
        v = read_pgm_sequence(tmp_path)
        assert v.shape == (2, 2, 2)
        np.testing.assert_array_equal(v[:, :, 0], [[0, 1], [0, 1]])
        np.testing.assert_array_equal(v[:, :, 1], [[1, 0], [0.2, 0.4]])

    def test_truncated(self):
        with pytest.raises(TruncationError):
            decode_pgm(b"P5\n3 3\n255\n" + bytes(4))

    def test_sixteen_bit_rejected(self):
        with pytest.raises(FormatError):
            decode_pgm(b"P5\n1 1\n65535\n" + bytes(2))

    def test_sequence_round_trip(self, rng, tmp_path):
        v = np.rint(rng.random((4, 5, 3)) * 255) / 255
        write_pgm_sequence(tmp_path, v)
        np.testing.assert_array_equal(read_pgm_sequence(tmp_path), v)

    def test_encode(self):
        assert encode_pgm(np.array([[0.0, 1.0]])) == b"P5\n2 1\n255\n\x00\xff"


class TestOverlay:
    def test_two_by_two(self):
        frames = np.array([[0.0, 1.0], [0.5, 1.0]])[:, :, None]
        [data] = render_overlay(frames, [BoundingBox(0, (0, 0), 1, 1, 0.5)])
        assert data.startswith(b"P6\n2 2\n255\n")
        assert ppm_payload(data) == bytes([0, 255, 0, 255, 255, 255, 128, 128, 128, 255, 255, 255])

    def test_full_frame_box(self, rng):
        frames = rng.random((6, 7, 1))
        [data] = render_overlay(frames, [BoundingBox(0, (2, 3), 6, 7, 0.5)])
        rgb = np.frombuffer(ppm_payload(data), dtype=np.uint8).reshape(6, 7, 3)
        for edge in [rgb[0], rgb[-1], rgb[:, 0], rgb[:, -1]]:
            np.testing.assert_array_equal(edge, np.tile([0, 255, 0], (len(edge), 1)))

    def test_no_boxes(self, rng):
        frames = rng.random((3, 4, 2))
        for t, data in enumerate(render_overlay(frames, [])):
            rgb = np.frombuffer(ppm_payload(data), dtype=np.uint8).reshape(3, 4, 3)
            assert (rgb[..., 0] == rgb[..., 1]).all() and (rgb[..., 1] == rgb[..., 2]).all()

    def test_clipped_box_warns(self, rng):
        with pytest.warns(UserWarning, match="clipped"):
            render_overlay(rng.random((4, 4, 1)), [BoundingBox(0, (0, 0), 5, 5, 0.5)])

    def test_inside_box_does_not_warn(self, rng):
        with warnings.catch_warnings():
            warnings.simplefilter("error")
            render_overlay(rng.random((4, 4, 1)), [BoundingBox(0, (1, 1), 3, 3, 0.5)])


class TestText:
    @settings(max_examples=50, deadline=None)
    @given(st.lists(st.floats(allow_nan=False, allow_infinity=False), min_size=1, max_size=5))
    def test_csv_floats_exact(self, values):
        with tempfile.TemporaryDirectory() as d:
            p = os.path.join(d, "x.csv")
            atomic_write(p, csv_bytes(["v"], [[x] for x in values]))
            _, rows = read_csv(p)
        assert [float(r[0]) for r in rows] == values

    def test_boxes_round_trip(self, tmp_path):
        boxes = [BoundingBox(0, (3, 4), 5, 6, 0.6999999999999999), BoundingBox(1, (0, 0), 1, 1, 1.0, True)]
        atomic_write(tmp_path / "b.csv", boxes_csv(boxes))
        got = read_boxes(tmp_path / "b.csv")
        assert [(b.center, b.height, b.width, b.mass_fraction, b.degenerate) for b in got] == [
            (b.center, b.height, b.width, b.mass_fraction, b.degenerate) for b in boxes
        ]

    def test_manifest(self, tmp_path):
        entries = {"seed": 3, "beta": 1e-3, "dist": "gaussian"}
        atomic_write(tmp_path / "m", manifest_bytes(entries))
        assert manifest_bytes(entries) == manifest_bytes(dict(reversed(list(entries.items()))))
        assert read_manifest(tmp_path / "m") == {"seed": "3", "beta": "0.001", "dist": "gaussian"}
