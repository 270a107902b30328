"""Map file formats.

Linear data travels as PFM (little-endian float32, bottom-to-top rows);
8-bit previews and encoded maps as PNG. Normals use the standard
(n + 1) / 2 byte encoding. Keeping the linear and 8-bit paths distinct
prevents accidental double gamma.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image

from .scene import SvbrdfMaps, normalize_vectors

MAX_PIXELS = 1 << 26  # dimension overflow guard

ENCODINGS = ("linear-float", "8-bit-encoded")


class PfmFormatError(ValueError):
    """Malformed or unsupported PFM content."""


def _read_header_line(fh) -> str:
    chars = bytearray()
    while True:
        ch = fh.read(1)
        if not ch:
            raise PfmFormatError("unexpected end of PFM header")
        if ch == b"\n":
            return chars.decode("ascii")
        chars += ch


def read_pfm(path) -> np.ndarray:
    """Read a PFM file into (H, W) float32 for 'Pf' or (H, W, 3) for 'PF'."""
    with open(path, "rb") as fh:
        magic = _read_header_line(fh)
        if magic == "PF":
            channels = 3
        elif magic == "Pf":
            channels = 1
        else:
            raise PfmFormatError(f"bad PFM magic {magic!r}")
        dims = _read_header_line(fh).split()
        if len(dims) != 2:
            raise PfmFormatError("bad PFM dimensions line")
        try:
            width, height = int(dims[0]), int(dims[1])
        except ValueError as exc:
            raise PfmFormatError("non-integer PFM dimensions") from exc
        if width < 1 or height < 1 or width * height > MAX_PIXELS:
            raise PfmFormatError(f"unsupported PFM dimensions {width}x{height}")
        try:
            scale = float(_read_header_line(fh))
        except ValueError as exc:
            raise PfmFormatError("bad PFM scale line") from exc
        if scale >= 0:
            raise PfmFormatError("big-endian PFM (non-negative scale) is not supported")
        count = width * height * channels
        raw = fh.read(count * 4)
        if len(raw) != count * 4:
            raise PfmFormatError("truncated PFM pixel data")
        data = np.frombuffer(raw, dtype="<f4").reshape(height, width, channels)
    data = np.flipud(data).copy()  # stored bottom-to-top
    return data[..., 0] if channels == 1 else data


def write_pfm(path, image: np.ndarray) -> None:
    """Write (H, W) as 'Pf' or (H, W, 3) as 'PF', little-endian, scale -1.0."""
    image = np.asarray(image)
    if image.ndim == 2:
        magic, data = "Pf", image[..., None]
    elif image.ndim == 3 and image.shape[2] == 3:
        magic, data = "PF", image
    else:
        raise PfmFormatError("image must be (H, W) or (H, W, 3)")
    height, width = data.shape[:2]
    with open(path, "wb") as fh:
        fh.write(f"{magic}\n{width} {height}\n-1.0\n".encode("ascii"))
        fh.write(np.flipud(data).astype("<f4").tobytes())


def encode_normal_png(normal: np.ndarray) -> np.ndarray:
    """Unit normals to uint8 RGB via channel = round(255 (n + 1) / 2)."""
    return np.clip(np.round(255.0 * (np.asarray(normal) + 1.0) / 2.0), 0, 255).astype(np.uint8)


def decode_normal_png(encoded: np.ndarray) -> np.ndarray:
    """Inverse of encode_normal_png, renormalized to unit length."""
    n = np.asarray(encoded, dtype=float) * (2.0 / 255.0) - 1.0
    out = normalize_vectors(n)
    zero = np.linalg.norm(n, axis=-1) == 0
    out[zero] = (0.0, 0.0, 1.0)
    return out


def write_png(path, array_u8: np.ndarray) -> None:
    Image.fromarray(array_u8).save(path)


def read_png(path) -> np.ndarray:
    return np.asarray(Image.open(path))


@dataclass
class MapFileSet:
    """Paths and encoding for one SVBRDF map triple plus the scalar F0."""

    albedo_path: str
    normal_path: str
    roughness_path: str
    encoding: str = "linear-float"
    f0: float = 0.05

    def __post_init__(self):
        if self.encoding not in ENCODINGS:
            raise ValueError(f"encoding must be one of {ENCODINGS}")

    @classmethod
    def from_json(cls, text: str, base_dir=None) -> "MapFileSet":
        doc = json.loads(text)
        if not isinstance(doc, dict):
            raise ValueError("map file set must be a JSON object")
        known = {"albedo_path", "normal_path", "roughness_path", "encoding", "f0"}
        unknown = set(doc) - known
        if unknown:
            raise ValueError(f"unknown map file set fields: {sorted(unknown)}")
        required = {"albedo_path", "normal_path", "roughness_path"}
        missing = required - set(doc)
        if missing:
            raise ValueError(f"missing map file set fields: {sorted(missing)}")
        paths = {k: doc[k] for k in required}
        if base_dir is not None:
            paths = {k: str(Path(base_dir) / v) for k, v in paths.items()}
        return cls(encoding=doc.get("encoding", "linear-float"),
                   f0=float(doc.get("f0", 0.05)), **paths)

    def to_json(self) -> str:
        return json.dumps({
            "albedo_path": self.albedo_path,
            "normal_path": self.normal_path,
            "roughness_path": self.roughness_path,
            "encoding": self.encoding,
            "f0": self.f0,
        })

    def load(self) -> SvbrdfMaps:
        if self.encoding == "linear-float":
            albedo = np.asarray(read_pfm(self.albedo_path), dtype=float)
            normal = np.asarray(read_pfm(self.normal_path), dtype=float)
            rough = np.asarray(read_pfm(self.roughness_path), dtype=float)
        else:
            albedo = read_png(self.albedo_path).astype(float) / 255.0
            normal = decode_normal_png(read_png(self.normal_path))
            rough = read_png(self.roughness_path).astype(float) / 255.0
        if rough.ndim == 3:
            rough = rough[..., 0]
        normal = normalize_vectors(normal)
        maps = SvbrdfMaps(albedo=albedo, normal=normal, roughness=rough, f0=self.f0)
        maps.validate()
        return maps

    def save(self, maps: SvbrdfMaps) -> None:
        if self.encoding == "linear-float":
            write_pfm(self.albedo_path, maps.albedo)
            write_pfm(self.normal_path, maps.normal)
            write_pfm(self.roughness_path, maps.roughness)
        else:
            write_png(self.albedo_path,
                      np.clip(np.round(255.0 * np.clip(maps.albedo, 0, 1)), 0, 255).astype(np.uint8))
            write_png(self.normal_path, encode_normal_png(maps.normal))
            write_png(self.roughness_path,
                      np.clip(np.round(255.0 * np.clip(maps.roughness, 0, 1)), 0, 255).astype(np.uint8))
