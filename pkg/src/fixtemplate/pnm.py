"""Netpbm export/import for rasters, plus RGB overlays.

PBM (P4) and 16-bit PGM (P5) carry the window and generating metadata in a
``# fixtemplate {json}`` comment so a file re-parses to the raster it came
from. PNG output is a convenience copy of the PPM.
"""

from __future__ import annotations

import json
import re
from pathlib import Path

import numpy as np

from .raster import Raster, Window, WindowError

_TAG = b"# fixtemplate "

GREEN = (0, 128, 0)
LIGHT_BLUE = (120, 180, 230)
DARK_BROWN = (101, 67, 33)
WHITE = (255, 255, 255)
BLACK = (0, 0, 0)


class PNMError(ValueError):
    pass


def _comment(r: Raster) -> bytes:
    payload = {"window": list(r.window.as_tuple()), "meta": r.meta}
    return _TAG + json.dumps(payload, sort_keys=True, separators=(",", ":")).encode() + b"\n"


def pbm_bytes(r: Raster) -> bytes:
    h, w = r.cells.shape
    bits = np.packbits(r.inside.astype(np.uint8), axis=1)
    return b"P4\n" + _comment(r) + f"{w} {h}\n".encode() + bits.tobytes()


def pgm_bytes(r: Raster) -> bytes:
    h, w = r.cells.shape
    vals = np.minimum(r.cells, 65535).astype(">u2")
    return b"P5\n" + _comment(r) + f"{w} {h}\n65535\n".encode() + vals.tobytes()


def ppm_bytes(rgb: np.ndarray) -> bytes:
    h, w, _ = rgb.shape
    return f"P6\n{w} {h}\n255\n".encode() + np.ascontiguousarray(rgb, dtype=np.uint8).tobytes()


_HEADER_TOKEN = re.compile(rb"\s+|#[^\n]*\n|\S+")


def _header(data: bytes, count: int):
    """Magic plus ``count`` integer fields; returns (magic, fields, comments, offset)."""
    pos, toks, comments = 0, [], []
    while len(toks) < count + 1:
        m = _HEADER_TOKEN.match(data, pos)
        if m is None:
            raise PNMError("truncated header")
        tok = m.group(0)
        pos = m.end()
        if tok.startswith(b"#"):
            comments.append(tok)
        elif not tok.isspace():
            toks.append(tok)
    # Exactly one whitespace byte separates the header from the raster.
    return toks[0], [int(t) for t in toks[1:]], comments, pos + 1


def _payload(comments) -> tuple[Window | None, dict]:
    for c in comments:
        if c.startswith(_TAG):
            obj = json.loads(c[len(_TAG):].decode())
            return Window(*obj["window"]), obj["meta"]
    return None, {}


def parse_pnm(data: bytes, window: Window | None = None) -> Raster:
    magic = data[:2]
    if magic == b"P4":
        _, (w, h), comments, off = _header(data, 2)
        row = (w + 7) // 8
        bits = np.frombuffer(data, dtype=np.uint8, count=row * h, offset=off).reshape(h, row)
        inside = np.unpackbits(bits, axis=1)[:, :w].astype(bool)
        cells = np.where(inside, 0, 1)
    elif magic == b"P5":
        _, (w, h, maxval), comments, off = _header(data, 3)
        if maxval < 256:
            cells = np.frombuffer(data, dtype=np.uint8, count=w * h, offset=off)
        else:
            cells = np.frombuffer(data, dtype=">u2", count=w * h, offset=off)
        cells = cells.reshape(h, w).astype(np.int32)
    else:
        raise PNMError(f"unsupported magic {magic!r}; expected P4 or P5")
    stored, meta = _payload(comments)
    win = window or stored
    if win is None:
        raise PNMError("file carries no window; pass one explicitly")
    if (win.width, win.height) != (w, h):
        raise WindowError(f"window is {win.width}x{win.height} but image is {w}x{h}")
    return Raster(win, cells, meta)


def read_raster(path, window: Window | None = None) -> Raster:
    return parse_pnm(Path(path).read_bytes(), window)


def render_overlay(layers, background=WHITE, window: Window | None = None) -> np.ndarray:
    """Paint Inside cells of each (raster, rgb) layer in order over a background."""
    if not layers and window is None:
        raise ValueError("zero layers: pass the window to size the image")
    win = layers[0][0].window if layers else window
    img = blank(win, background)
    for r, color in layers:
        if r.window != win:
            raise WindowError("overlay layers must share a window")
        img[r.inside] = color
    return img


def blank(window: Window, background=WHITE) -> np.ndarray:
    img = np.empty((window.height, window.width, 3), dtype=np.uint8)
    img[:] = background
    return img


def draw_cross(img: np.ndarray, window: Window, point: complex, color=BLACK, span: float = 0.05) -> None:
    """Two 1-pixel lines through ``point``, each about 5% of the window extent."""
    i, j = window.pixel_of(point)
    hw = max(1, round((span * window.width - 1) / 2))
    hh = max(1, round((span * window.height - 1) / 2))
    img[j, max(0, i - hw) : i + hw + 1] = color
    img[max(0, j - hh) : j + hh + 1, i] = color


def write_png(path, rgb: np.ndarray) -> None:
    from PIL import Image

    # Fixed encoder settings keep the bytes stable across runs.
    Image.fromarray(np.ascontiguousarray(rgb, dtype=np.uint8), "RGB").save(
        path, format="PNG", optimize=False, compress_level=6
    )
