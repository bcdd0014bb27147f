"""Binary file formats, PGM/PPM frames, CSV and manifest helpers.

All integers are little-endian.  Bulk arrays are float32, parameters
float64.  Every writer goes through :func:`atomic_write`.
"""
import csv
import io
import os
import struct
import tempfile
import warnings
from pathlib import Path

import numpy as np

from .errors import FormatError, TruncationError
from .inference import SvmModel
from .localization import BoundingBox
from .mach import MachFilter
from .sensing import CompressedVideo, MeasurementMatrix
from .stsf import FilterBank
from .view import AffineView

DIST_CODES = {"gaussian": 0, "bernoulli": 1}
DIST_NAMES = {v: k for k, v in DIST_CODES.items()}
VIEW_CODES = {"type1": 0, "type2": 1, "compensated": 2}
MAX_ELEMENTS = 2**31 - 1


def atomic_write(path, data):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


class Reader:
    def __init__(self, data, what):
        self.data = memoryview(data)
        self.pos = 0
        self.what = what

    def take(self, n):
        if self.pos + n > len(self.data):
            raise TruncationError(self.what, self.pos + n, len(self.data))
        out = self.data[self.pos : self.pos + n]
        self.pos += n
        return out

    def unpack(self, fmt):
        size = struct.calcsize(fmt)
        vals = struct.unpack(fmt, self.take(size))
        return vals if len(vals) > 1 else vals[0]

    def magic(self, expected):
        got = bytes(self.take(len(expected)))
        if got != expected:
            raise FormatError(f"{self.what}: bad magic {got!r}, expected {expected!r}")

    def floats(self, count, dtype="<f4"):
        if count > MAX_ELEMENTS:
            raise FormatError(f"{self.what}: element count {count} overflows")
        itemsize = np.dtype(dtype).itemsize
        return np.frombuffer(self.take(count * itemsize), dtype=dtype).astype(np.float64)

    def done(self):
        if self.pos != len(self.data):
            raise FormatError(f"{self.what}: {len(self.data) - self.pos} trailing bytes")


def _dims(*dims):
    n = 1
    for d in dims:
        n *= d
    if n > MAX_ELEMENTS:
        raise FormatError(f"dimensions {dims} overflow")
    return n


# --- RVF1: video volume -------------------------------------------------


def encode_volume(v):
    v = np.asarray(v, dtype=np.float64)
    P, Q, R = v.shape
    body = np.ascontiguousarray(v.transpose(2, 0, 1), dtype="<f4").tobytes()
    return b"RVF1" + struct.pack("<3I", P, Q, R) + body


def decode_volume(data, what="RVF1"):
    rd = Reader(data, what)
    rd.magic(b"RVF1")
    P, Q, R = rd.unpack("<3I")
    n = _dims(P, Q, R)
    v = rd.floats(n).reshape(R, P, Q).transpose(1, 2, 0)
    rd.done()
    return np.ascontiguousarray(v)


def write_volume(path, v):
    atomic_write(path, encode_volume(v))


def read_volume(path):
    return decode_volume(Path(path).read_bytes(), str(path))


# --- MCH1 / BNK1: filters -----------------------------------------------


def _encode_filter(f):
    L, M, N = f.dims
    tag = f.view_tag
    if isinstance(tag, tuple):
        code = VIEW_CODES["compensated"]
        view = tag[1]
        extra = struct.pack("<6d", *np.asarray(view.A).ravel(), *view.b)
    else:
        code = VIEW_CODES[tag]
        extra = b""
    label = f.label.encode("utf-8")
    body = np.ascontiguousarray(f.volume.transpose(2, 0, 1), dtype="<f4").tobytes()
    return (
        b"MCH1"
        + struct.pack("<3I3dB", L, M, N, f.alpha, f.beta, f.gamma, code)
        + extra
        + struct.pack("<I", len(label))
        + label
        + body
    )


def _decode_filter(rd):
    rd.magic(b"MCH1")
    L, M, N, alpha, beta, gamma, code = rd.unpack("<3I3dB")
    if code == VIEW_CODES["compensated"]:
        vals = rd.unpack("<6d")
        tag = ("compensated", AffineView((vals[0:2], vals[2:4]), vals[4:6]))
    elif code in (0, 1):
        tag = "type1" if code == 0 else "type2"
    else:
        raise FormatError(f"{rd.what}: unknown view tag {code}")
    n_label = rd.unpack("<I")
    label = bytes(rd.take(n_label)).decode("utf-8")
    vol = rd.floats(_dims(L, M, N)).reshape(N, L, M).transpose(1, 2, 0)
    return MachFilter(np.ascontiguousarray(vol), alpha, beta, gamma, label, tag)


def encode_filter(f):
    return _encode_filter(f)


def decode_filter(data, what="MCH1"):
    rd = Reader(data, what)
    f = _decode_filter(rd)
    rd.done()
    return f


def encode_bank(bank):
    return b"BNK1" + struct.pack("<I", len(bank.filters)) + b"".join(_encode_filter(f) for f in bank.filters)


def decode_bank(data, what="BNK1"):
    rd = Reader(data, what)
    rd.magic(b"BNK1")
    count = rd.unpack("<I")
    filters = [_decode_filter(rd) for _ in range(count)]
    rd.done()
    return FilterBank(filters)


# --- PHI1: measurement matrix -------------------------------------------


def _phi_header(m, materialized):
    return b"PHI1" + struct.pack("<BQ2IB", DIST_CODES[m.distribution], m.seed, m.K, m.D, int(materialized))


def encode_matrix(m, materialized=False):
    out = _phi_header(m, materialized)
    if materialized:
        out += np.ascontiguousarray(m.entries, dtype="<f4").tobytes()
    return out


def _decode_phi(rd):
    rd.magic(b"PHI1")
    dist, seed, K, D, materialized = rd.unpack("<BQ2IB")
    if dist not in DIST_NAMES:
        raise FormatError(f"{rd.what}: unknown distribution code {dist}")
    m = MeasurementMatrix(DIST_NAMES[dist], seed, K, D)
    if materialized:
        stored = rd.floats(_dims(K, D)).reshape(K, D)
        if not np.array_equal(stored, m.entries.astype(np.float32).astype(np.float64)):
            raise FormatError(f"{rd.what}: checksum failure, stored entries differ from seed regeneration")
    return m, bool(materialized)


def decode_matrix(data, what="PHI1"):
    rd = Reader(data, what)
    m, _ = _decode_phi(rd)
    rd.done()
    return m


# --- CMP1: compressed video ---------------------------------------------


def encode_compressed(z):
    K, R = z.measurements.shape
    P, Q = z.frame_dims
    return (
        b"CMP1"
        + _phi_header(z.matrix, False)
        + struct.pack("<3IBf", P, Q, R, z.derivative_order, z.noise_sigma)
        + np.ascontiguousarray(z.measurements.T, dtype="<f4").tobytes()
    )


def decode_compressed(data, what="CMP1"):
    rd = Reader(data, what)
    rd.magic(b"CMP1")
    m, materialized = _decode_phi(rd)
    if materialized:
        raise FormatError(f"{what}: embedded matrix header must not be materialized")
    P, Q, R, order, sigma = rd.unpack("<3IBf")
    if order not in (0, 1):
        raise FormatError(f"{what}: bad derivative order {order}")
    Z = rd.floats(_dims(R, m.K)).reshape(R, m.K).T
    rd.done()
    return CompressedVideo(np.ascontiguousarray(Z), (P, Q), m, float(sigma), order)


# --- MDL1: SVM model ----------------------------------------------------


def encode_model(model):
    C, dim = model.weights.shape
    parts = [b"MDL1", struct.pack("<2I", C, dim)]
    for c in range(C):
        parts.append(np.ascontiguousarray(model.weights[c], dtype="<f8").tobytes())
        parts.append(struct.pack("<d", model.bias[c]))
    parts.append(np.ascontiguousarray(model.feature_mean, dtype="<f8").tobytes())
    parts.append(np.ascontiguousarray(model.feature_std, dtype="<f8").tobytes())
    return b"".join(parts)


def decode_model(data, what="MDL1", classes=None):
    rd = Reader(data, what)
    rd.magic(b"MDL1")
    C, dim = rd.unpack("<2I")
    W = np.empty((C, dim))
    b = np.empty(C)
    for c in range(C):
        W[c] = rd.floats(dim, "<f8")
        b[c] = rd.unpack("<d")
    mean = rd.floats(dim, "<f8")
    std = rd.floats(dim, "<f8")
    rd.done()
    return SvmModel(W, b, mean, std, list(classes) if classes else [str(i) for i in range(C)])


# --- generic file helpers -----------------------------------------------

_DECODERS = {
    b"RVF1": decode_volume,
    b"MCH1": decode_filter,
    b"BNK1": decode_bank,
    b"PHI1": decode_matrix,
    b"CMP1": decode_compressed,
    b"MDL1": decode_model,
}


def read_any(path, expect=None):
    """Decode a file by its magic; ``expect`` restricts the accepted formats."""
    data = Path(path).read_bytes()
    magic = data[:4]
    if magic not in _DECODERS or (expect and magic not in expect):
        raise FormatError(f"{path}: unexpected magic {magic!r}")
    return _DECODERS[magic](data, str(path))


# --- PGM / PPM ----------------------------------------------------------


def _pnm_header(data, what):
    """Parse a binary PNM header; returns (magic, width, height, maxval, offset)."""
    tokens, pos = [], 0
    while len(tokens) < 4:
        while pos < len(data) and data[pos : pos + 1].isspace():
            pos += 1
        if pos < len(data) and data[pos : pos + 1] == b"#":
            while pos < len(data) and data[pos : pos + 1] not in (b"\n", b"\r"):
                pos += 1
            continue
        start = pos
        while pos < len(data) and not data[pos : pos + 1].isspace():
            pos += 1
        if start == pos:
            raise FormatError(f"{what}: truncated PNM header")
        tokens.append(data[start:pos])
    pos += 1  # single whitespace byte before the raster
    try:
        return tokens[0], int(tokens[1]), int(tokens[2]), int(tokens[3]), pos
    except ValueError as exc:
        raise FormatError(f"{what}: malformed PNM header") from exc


def decode_pgm(data, what="PGM"):
    """Binary 8-bit P5 image as a float array scaled to [0, 1]."""
    magic, w, h, maxval, pos = _pnm_header(data, what)
    if magic != b"P5":
        raise FormatError(f"{what}: expected P5, got {magic!r}")
    if not 0 < maxval < 256:
        raise FormatError(f"{what}: only 8-bit PGM is supported (maxval {maxval})")
    need = w * h
    if len(data) - pos < need:
        raise TruncationError(what, pos + need, len(data))
    img = np.frombuffer(data, dtype=np.uint8, count=need, offset=pos).reshape(h, w)
    return img.astype(np.float64) / 255.0


def encode_pgm(frame):
    """Frame values in [0, 1] quantized to 8 bits."""
    img = np.clip(np.rint(np.asarray(frame) * 255.0), 0, 255).astype(np.uint8)
    h, w = img.shape
    return f"P5\n{w} {h}\n255\n".encode() + img.tobytes()


def read_pgm_sequence(directory):
    paths = sorted(p for p in Path(directory).iterdir() if p.suffix.lower() == ".pgm")
    if not paths:
        raise FormatError(f"{directory}: no .pgm frames found")
    frames = [decode_pgm(p.read_bytes(), str(p)) for p in paths]
    shapes = {f.shape for f in frames}
    if len(shapes) != 1:
        raise FormatError(f"{directory}: frames differ in size {sorted(shapes)}")
    return np.stack(frames, axis=2)


def write_pgm_sequence(directory, v):
    directory = Path(directory)
    width = max(4, len(str(v.shape[2] - 1)))
    for t in range(v.shape[2]):
        atomic_write(directory / f"{t:0{width}d}.pgm", encode_pgm(v[:, :, t]))


def encode_ppm(rgb):
    rgb = np.asarray(rgb, dtype=np.uint8)
    h, w, _ = rgb.shape
    return f"P6\n{w} {h}\n255\n".encode() + rgb.tobytes()


def render_overlay(frames, boxes):
    """One P6 image per frame; boxes drawn as 1-pixel green outlines."""
    v = np.asarray(frames, dtype=np.float64)
    by_frame = {}
    for b in boxes:
        if not 0 <= b.frame_index < v.shape[2]:
            raise ValueError(f"box frame {b.frame_index} outside video with {v.shape[2]} frames")
        by_frame.setdefault(b.frame_index, []).append(b)
    out = []
    for t in range(v.shape[2]):
        f = v[:, :, t]
        lo, hi = f.min(), f.max()
        gray = np.zeros(f.shape) if hi <= lo else (f - lo) / (hi - lo)
        g8 = np.rint(gray * 255.0).astype(np.uint8)
        rgb = np.repeat(g8[:, :, None], 3, axis=2)
        for b in by_frame.get(t, []):
            _draw_box(rgb, b)
        out.append(encode_ppm(rgb))
    return out


def _draw_box(rgb, box):
    rows, cols, _ = rgb.shape
    top, left, bottom, right = box.corners
    t, l = max(0, top), max(0, left)
    b, r = min(rows, bottom) - 1, min(cols, right) - 1
    if (t, l, b + 1, r + 1) != (top, left, bottom, right):
        warnings.warn(f"box in frame {box.frame_index} clipped to frame bounds", stacklevel=3)
    if b < t or r < l:
        return
    green = np.array([0, 255, 0], dtype=np.uint8)
    rgb[t, l : r + 1] = green
    rgb[b, l : r + 1] = green
    rgb[t : b + 1, l] = green
    rgb[t : b + 1, r] = green


# --- CSV and manifests --------------------------------------------------


def fmt(x):
    """Shortest decimal that round-trips the float exactly."""
    if isinstance(x, (bool, np.bool_)):
        return str(int(x))
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    return str(x)


def csv_bytes(header, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([fmt(x) for x in row])
    return buf.getvalue().encode()


def read_csv(path):
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    return rows[0], rows[1:]


BOX_HEADER = ["frame", "center_row", "center_col", "height", "width", "mass", "degenerate"]


def boxes_csv(boxes):
    return csv_bytes(
        BOX_HEADER,
        [(b.frame_index, b.center[0], b.center[1], b.height, b.width, b.mass_fraction, b.degenerate) for b in boxes],
    )


def read_boxes(path):
    _, rows = read_csv(path)
    return [
        BoundingBox(int(r[0]), (int(r[1]), int(r[2])), int(r[3]), int(r[4]), float(r[5]), bool(int(r[6])))
        for r in rows
    ]


def manifest_bytes(entries):
    lines = [f"{k}={fmt(v)}" for k, v in sorted(entries.items())]
    return ("\n".join(lines) + "\n").encode()


def read_manifest(path):
    out = {}
    for line in Path(path).read_text().splitlines():
        if line and not line.startswith("#"):
            k, _, v = line.partition("=")
            out[k] = v
    return out
