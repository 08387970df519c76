"""Binary netpbm IO: P6 (color) and P5 (grayscale), 8-bit, maxval 255.

Pixels map to floats in [-1, 1]: p -> 2p/255 - 1 on read; writes use
round-half-away-from-zero so write(read(f)) is byte-identical.
"""

from __future__ import annotations

import numpy as np

from .errors import ImageFormatError

_WS = b" \t\r\n"


class _Scanner:
    def __init__(self, blob: bytes):
        self.blob = blob
        self.pos = 0

    def skip_separators(self) -> None:
        blob, n = self.blob, len(self.blob)
        while self.pos < n:
            c = self.blob[self.pos : self.pos + 1]
            if c in (b"#",):
                while self.pos < n and blob[self.pos : self.pos + 1] != b"\n":
                    self.pos += 1
            elif c in (b" ", b"\t", b"\r", b"\n"):
                self.pos += 1
            else:
                return

    def int_token(self, what: str) -> int:
        self.skip_separators()
        start = self.pos
        while self.pos < len(self.blob) and self.blob[self.pos : self.pos + 1].isdigit():
            self.pos += 1
        if self.pos == start:
            raise ImageFormatError(f"expected {what}", start)
        return int(self.blob[start : self.pos])


def _parse_header(blob: bytes):
    if len(blob) < 2:
        raise ImageFormatError("file too short for a netpbm header", 0)
    magic = blob[:2]
    if magic not in (b"P6", b"P5"):
        raise ImageFormatError(f"unsupported magic {magic!r} (want P6 or P5)", 0)
    sc = _Scanner(blob)
    sc.pos = 2
    width = sc.int_token("width")
    height = sc.int_token("height")
    if width < 1 or height < 1:
        raise ImageFormatError("non-positive image dimensions", 2)
    sc.skip_separators()
    maxval_at = sc.pos
    maxval = sc.int_token("maxval")
    if maxval != 255:
        raise ImageFormatError(f"unsupported maxval {maxval} (only 255)", maxval_at)
    if sc.pos >= len(blob) or blob[sc.pos : sc.pos + 1] not in (b" ", b"\t", b"\r", b"\n"):
        raise ImageFormatError("missing whitespace after maxval", sc.pos)
    sc.pos += 1
    return magic, width, height, sc.pos


def read_image(path) -> np.ndarray:
    """Load a P6 file as (3,H,W) or a P5 file as (H,W), float32 in [-1,1]."""
    with open(path, "rb") as fh:
        blob = fh.read()
    magic, width, height, start = _parse_header(blob)
    channels = 3 if magic == b"P6" else 1
    need = width * height * channels
    payload = blob[start : start + need]
    if len(payload) < need:
        raise ImageFormatError(
            f"truncated payload: expected {need} bytes, found {len(payload)}",
            start + len(payload),
        )
    raw = np.frombuffer(payload, dtype=np.uint8).astype(np.float32)
    # (2p - 255)/255 keeps a single rounding per pixel (2p/255 - 1 cancels)
    pixels = (raw * np.float32(2.0) - np.float32(255.0)) / np.float32(255.0)
    if channels == 3:
        return pixels.reshape(height, width, 3).transpose(2, 0, 1)
    return pixels.reshape(height, width)


def _to_bytes(pixels: np.ndarray) -> np.ndarray:
    # round half away from zero; the argument is non-negative here
    scaled = (pixels.astype(np.float64) + 1.0) * 127.5
    return np.clip(np.floor(scaled + 0.5), 0, 255).astype(np.uint8)


def write_image(path, pixels: np.ndarray) -> None:
    """Write (3,H,W) as P6 or (H,W) as P5."""
    pixels = np.asarray(pixels)
    if pixels.ndim == 3 and pixels.shape[0] == 3:
        _, h, w = pixels.shape
        body = _to_bytes(pixels.transpose(1, 2, 0)).tobytes()
        magic = b"P6"
    elif pixels.ndim == 2:
        h, w = pixels.shape
        body = _to_bytes(pixels).tobytes()
        magic = b"P5"
    else:
        raise ImageFormatError(f"cannot encode array of shape {pixels.shape}", 0)
    with open(path, "wb") as fh:
        fh.write(magic + b"\n" + f"{w} {h}\n255\n".encode("ascii") + body)
