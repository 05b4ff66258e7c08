"""File formats: CSV/PGM images, attribution exports, path blobs, curves."""
from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

from .errors import InputError
from .paths import PathSegments


def read_pgm(path) -> np.ndarray:
    """Read a binary (P5) or ASCII (P2) PGM, rescaled to [0, 1]."""
    data = Path(path).read_bytes()
    tokens = []
    pos = 0
    while len(tokens) < 4:
        while pos < len(data) and chr(data[pos]).isspace():
            pos += 1
        if pos < len(data) and data[pos:pos + 1] == b"#":
            while pos < len(data) and data[pos:pos + 1] != b"\n":
                pos += 1
            continue
        start = pos
        while pos < len(data) and not chr(data[pos]).isspace():
            pos += 1
        if start == pos:
            raise InputError(f"truncated PGM header in {path}")
        tokens.append(data[start:pos].decode("ascii"))
    magic, width, height, maxval = tokens[0], int(tokens[1]), int(tokens[2]), int(tokens[3])
    if magic == "P5":
        dtype = np.dtype(np.uint8 if maxval < 256 else ">u2")
        body = data[pos + 1:]
        if len(body) < width * height * dtype.itemsize:
            raise InputError(f"{path}: expected {width * height} pixels, file is truncated")
        pixels = np.frombuffer(body, dtype=dtype, count=width * height)
    elif magic == "P2":
        pixels = np.array(data[pos:].split(), dtype=np.int64)[: width * height]
    else:
        raise InputError(f"{path} is not a PGM file (magic {magic!r})")
    if pixels.size != width * height:
        raise InputError(f"{path}: expected {width * height} pixels, found {pixels.size}")
    return pixels.reshape(height, width).astype(np.float64) / maxval


def write_pgm(path, image8) -> None:
    img = np.asarray(image8)
    if img.ndim != 2:
        raise InputError("PGM images are 2-D")
    h, w = img.shape
    Path(path).write_bytes(f"P5\n{w} {h}\n255\n".encode("ascii") + img.astype(np.uint8).tobytes())


def read_images(path, shape=None) -> np.ndarray:
    """Images from a CSV (one flattened image per row) or a single PGM.

    Returns an array of shape ``(n,) + shape`` (flat rows when ``shape`` is
    ``None``). A trailing label column is not expected here.
    """
    path = Path(path)
    if not path.exists():
        raise InputError(f"input not found: {path}")
    if path.suffix.lower() == ".pgm":
        img = read_pgm(path)
        return img.reshape((1,) + (tuple(shape) if shape else img.shape))
    rows = []
    with path.open(newline="") as fh:
        for row in csv.reader(fh):
            if row:
                try:
                    rows.append([float(v) for v in row])
                except ValueError:
                    raise InputError(f"{path}: non-numeric value in row {len(rows) + 1}") from None
    if len({len(r) for r in rows}) > 1:
        raise InputError(f"{path}: rows differ in length")
    arr = np.array(rows, dtype=np.float64)
    if shape:
        arr = arr.reshape((len(rows),) + tuple(shape))
    return arr


def to_uint8(values):
    """Min-max scale to 0..255; returns the image and the (min, max) used."""
    v = np.asarray(values, dtype=np.float64)
    lo, hi = float(v.min()), float(v.max())
    if hi > lo:
        scaled = (v - lo) / (hi - lo)
    else:
        scaled = np.zeros_like(v)
    return np.round(scaled * 255).astype(np.uint8), (lo, hi)


def export_attribution(values, shape, prefix) -> list[Path]:
    """Write ``<prefix>.csv`` (index,value), ``<prefix>.pgm`` and ``<prefix>.pgm.json``."""
    prefix = Path(prefix)
    prefix.parent.mkdir(parents=True, exist_ok=True)
    flat = np.ravel(values)
    csv_path = prefix.with_name(prefix.name + ".csv")
    with csv_path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["index", "value"])
        for i, v in enumerate(flat):
            w.writerow([i, repr(float(v))])
    img_shape = tuple(shape) if len(shape) == 2 else (1, flat.size)
    img8, (lo, hi) = to_uint8(flat.reshape(img_shape))
    pgm_path = prefix.with_name(prefix.name + ".pgm")
    write_pgm(pgm_path, img8)
    side = prefix.with_name(prefix.name + ".pgm.json")
    side.write_text(json.dumps({"min": lo, "max": hi, "shape": list(img_shape)}, sort_keys=True) + "\n")
    return [csv_path, pgm_path, side]


def read_attribution_csv(path) -> np.ndarray:
    with Path(path).open(newline="") as fh:
        rows = list(csv.reader(fh))[1:]
    out = np.empty(len(rows))
    for idx, val in rows:
        out[int(idx)] = float(val)
    return out


def read_saliency_pgm(path) -> np.ndarray:
    """Undo the min-max scaling using the sidecar JSON (8-bit precision)."""
    side = json.loads(Path(str(path) + ".json").read_text())
    return side["min"] + read_pgm(path) * (side["max"] - side["min"])


def export_path(path: PathSegments, prefix, s=None, eta=None, lam=None) -> list[Path]:
    """Write ``<prefix>.json`` header and ``<prefix>.bin`` little-endian float64 rows.

    Row order in the blob: start, end, then the ``n`` steps.
    """
    prefix = Path(prefix)
    prefix.parent.mkdir(parents=True, exist_ok=True)
    start = np.ravel(path.start)
    rows = [start, np.ravel(path.end)] + [np.ravel(st) for st in path.steps]
    blob = prefix.with_name(prefix.name + ".bin")
    blob.write_bytes(np.concatenate(rows).astype("<f8").tobytes())
    header = {
        "n": len(path.steps),
        "d": int(start.size),
        "shape": list(np.shape(path.start)),
        "s": s,
        "eta": eta,
        "lambda": lam,
        "rows": "start,end,steps",
        "blob": blob.name,
    }
    head = prefix.with_name(prefix.name + ".json")
    head.write_text(json.dumps(header, indent=2, sort_keys=True) + "\n")
    return [head, blob]


def read_path(header_path):
    header_path = Path(header_path)
    header = json.loads(header_path.read_text())
    raw = np.frombuffer((header_path.parent / header["blob"]).read_bytes(), dtype="<f8")
    d, n = header["d"], header["n"]
    if raw.size != d * (n + 2):
        raise InputError(f"path blob holds {raw.size} values, header implies {d * (n + 2)}")
    rows = raw.reshape(n + 2, d).astype(np.float64)
    shape = tuple(header["shape"])
    path = PathSegments(rows[0].reshape(shape), rows[1].reshape(shape),
                        tuple(r.reshape(shape) for r in rows[2:]))
    return path, header


def write_curve_csv(curve, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["k", "y_raw", "y_hat"])
        for k, y, yh in zip(curve.pixels, curve.y_raw, curve.y_hat):
            w.writerow([int(k), repr(float(y)), repr(float(yh))])
    return path


def read_curve_csv(path):
    with Path(path).open(newline="") as fh:
        rows = list(csv.reader(fh))[1:]
    arr = np.array([[float(v) for v in r] for r in rows])
    return arr[:, 0].astype(int), arr[:, 1], arr[:, 2]


def write_table(path, header, rows) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for r in rows:
            w.writerow([repr(v) if isinstance(v, float) else v for v in r])
    return path


def read_table(path):
    with Path(path).open(newline="") as fh:
        rows = list(csv.reader(fh))
    return rows[0], rows[1:]
