"""Model documents (YAML) and 8-bit netpbm rasters.

A model document looks like::

    model: kb
    image_size: {width: 1280, height: 800}
    intrinsics: {fx: 380.0, fy: 380.0, cx: 640.0, cy: 400.0}
    distortion: {k1: 0.01, k2: -0.002, k3: 0.0, k4: 0.0}

OCC documents carry ``intrinsics: {c, d, e, cx, cy}`` and
``distortion: {a: [a0..a4], k: [k0..kp]}``. A UCM document may give
``legacy_ucm: {gamma_x, gamma_y, xi}`` instead of fx, fy and ``distortion``;
the principal point still comes from ``intrinsics``.
"""

from __future__ import annotations

import math
import os
import re
from pathlib import Path

import numpy as np
import yaml

from .errors import MalformedHeader, ParseError, UnsupportedFormat, ValidationError
from .evaluation import Raster
from .models import KINDS, PARAM_TYPES, CameraModel, ImageSize, OccParams, ucm_from_legacy

_FOCAL = ("fx", "fy", "cx", "cy")
INTRINSIC_KEYS = {kind: _FOCAL for kind in KINDS} | {"occ": ("c", "d", "e", "cx", "cy")}
DISTORTION_KEYS = {
    "ucm": ("alpha",),
    "eucm": ("alpha", "beta"),
    "ds": ("alpha", "xi"),
    "kb": ("k1", "k2", "k3", "k4"),
    "woodscape": ("k1", "k2", "k3", "k4"),
    "rt": ("k1", "k2", "k3", "p1", "p2"),
    "occ": ("a", "k"),
}
LEGACY_KEYS = ("gamma_x", "gamma_y", "xi")


class _Doc:
    """Plain Python view of a YAML mapping that remembers source lines."""

    def __init__(self, node: yaml.MappingNode, where: str):
        self.where = where
        self.line = node.start_mark.line + 1
        self.items: dict[str, yaml.Node] = {}
        self.key_lines: dict[str, int] = {}
        for key_node, value_node in node.value:
            if not isinstance(key_node, yaml.ScalarNode):
                raise ParseError(f"{where}: keys must be plain strings", key_node.start_mark.line + 1)
            key = key_node.value
            if key in self.items:
                raise ParseError(f"{where}: duplicate key {key!r}", key_node.start_mark.line + 1)
            self.items[key] = value_node
            self.key_lines[key] = key_node.start_mark.line + 1

    def expect_keys(self, required, optional=()):
        allowed = set(required) | set(optional)
        for key, line in self.key_lines.items():
            if key not in allowed:
                raise ParseError(f"{self.where}: unexpected key {key!r}", line)
        missing = [k for k in required if k not in self.items]
        if missing:
            raise ParseError(f"{self.where}: missing key(s) {', '.join(missing)}", self.line)

    def node(self, key) -> yaml.Node:
        return self.items[key]

    def mapping(self, key) -> "_Doc":
        n = self.items[key]
        if not isinstance(n, yaml.MappingNode):
            raise ParseError(f"{self.where}.{key} must be a mapping", n.start_mark.line + 1)
        return _Doc(n, f"{self.where}.{key}" if self.where else key)

    def number(self, key) -> float:
        return _number(self.items[key], f"{self.where}.{key}")

    def numbers(self, key) -> list[float]:
        n = self.items[key]
        if not isinstance(n, yaml.SequenceNode):
            raise ParseError(f"{self.where}.{key} must be a list of numbers", n.start_mark.line + 1)
        return [_number(v, f"{self.where}.{key}[{i}]") for i, v in enumerate(n.value)]


def _number(node: yaml.Node, where: str) -> float:
    line = node.start_mark.line + 1
    if not isinstance(node, yaml.ScalarNode) or node.tag.endswith(":bool"):
        raise ParseError(f"{where} must be a number", line)
    text = node.value
    if node.tag.endswith(":int"):
        return float(int(text.replace("_", ""), 0))
    if node.tag.endswith(":float"):
        x = float(yaml.safe_load(text))
    elif node.style is None:
        # YAML 1.1 reads plain 1e-7 (no dot) as a string; accept it as a number
        try:
            x = float(text)
        except ValueError:
            raise ParseError(f"{where} must be a number, got {text!r}", line) from None
    else:
        raise ParseError(f"{where} must be a number, got {text!r}", line)
    if not math.isfinite(x):
        raise ValidationError(f"{where} must be finite")
    return x


def parse_model(text: str) -> CameraModel:
    """Parse and validate a model document held in a string."""
    try:
        root = yaml.compose(text, Loader=yaml.SafeLoader)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        raise ParseError(f"invalid YAML: {getattr(exc, 'problem', exc)}", mark.line + 1 if mark else None) from exc
    if not isinstance(root, yaml.MappingNode):
        raise ParseError("document must be a mapping", root.start_mark.line + 1 if root else 1)
    doc = _Doc(root, "")
    if "model" not in doc.items:
        raise ParseError("missing key 'model'", 1)
    kind_node = doc.node("model")
    kind = kind_node.value if isinstance(kind_node, yaml.ScalarNode) else None
    if kind not in PARAM_TYPES:
        raise ParseError(f"model must be one of {', '.join(KINDS)}", kind_node.start_mark.line + 1)

    legacy = "legacy_ucm" in doc.items
    if legacy and kind != "ucm":
        raise ParseError("legacy_ucm is only allowed with model: ucm", doc.key_lines["legacy_ucm"])
    if legacy:
        doc.expect_keys(("model", "image_size", "intrinsics", "legacy_ucm"))
    else:
        doc.expect_keys(("model", "image_size", "intrinsics", "distortion"))

    size = doc.mapping("image_size")
    size.expect_keys(("width", "height"))
    image_size = ImageSize(size.number("width"), size.number("height"))

    intr = doc.mapping("intrinsics")
    if legacy:
        intr.expect_keys(("cx", "cy"))
        lg = doc.mapping("legacy_ucm")
        lg.expect_keys(LEGACY_KEYS)
        params = ucm_from_legacy(
            lg.number("gamma_x"), lg.number("gamma_y"), intr.number("cx"), intr.number("cy"), lg.number("xi")
        )
        return CameraModel(params, image_size)

    intr.expect_keys(INTRINSIC_KEYS[kind])
    dist = doc.mapping("distortion")
    dist.expect_keys(DISTORTION_KEYS[kind])
    if kind == "occ":
        params = OccParams(
            cx=intr.number("cx"),
            cy=intr.number("cy"),
            a=tuple(dist.numbers("a")),
            k=tuple(dist.numbers("k")),
            c=intr.number("c"),
            d=intr.number("d"),
            e=intr.number("e"),
        )
    else:
        values = {k: intr.number(k) for k in INTRINSIC_KEYS[kind]}
        values |= {k: dist.number(k) for k in DISTORTION_KEYS[kind]}
        params = PARAM_TYPES[kind](**values)
    return CameraModel(params, image_size)


def load_model(path) -> CameraModel:
    """Read a model document from ``path``.

    Raises:
        ParseError: malformed YAML or wrong key set (carries the line number).
        ValidationError: a parameter violates its family's invariants.
    """
    return parse_model(Path(path).read_text(encoding="utf-8"))


def model_document(model: CameraModel) -> dict:
    p = model.params
    doc = {
        "model": model.kind,
        "image_size": {"width": model.width, "height": model.height},
    }
    if isinstance(p, OccParams):
        doc["intrinsics"] = {"c": p.c, "d": p.d, "e": p.e, "cx": p.cx, "cy": p.cy}
        doc["distortion"] = {"a": list(p.a), "k": list(p.k)}
    else:
        doc["intrinsics"] = {k: float(getattr(p, k)) for k in _FOCAL}
        doc["distortion"] = {k: float(getattr(p, k)) for k in DISTORTION_KEYS[model.kind]}
    return doc


def dump_model(model: CameraModel) -> str:
    # PyYAML writes floats with repr(), which round-trips exactly
    return yaml.safe_dump(model_document(model), sort_keys=False, default_flow_style=None)


def _check_writable(path: Path, overwrite: bool) -> None:
    if path.exists() and not overwrite:
        raise FileExistsError(f"{path} exists; pass overwrite=True (--force) to replace it")


def save_model(model: CameraModel, path, overwrite: bool = False) -> None:
    path = Path(path)
    _check_writable(path, overwrite)
    path.write_text(dump_model(model), encoding="utf-8")


# --- netpbm ----------------------------------------------------------------

_TOKEN = re.compile(rb"(?:\s|#[^\n]*\n?)*(\S+)")


def parse_raster(data: bytes) -> Raster:
    """Decode a binary PGM (P5) or PPM (P6) with maxval 255."""
    magic = data[:2]
    if magic in (b"P1", b"P2", b"P3", b"P4", b"P7"):
        raise UnsupportedFormat(f"netpbm variant {magic.decode()} is not supported; use P5 or P6")
    if magic not in (b"P5", b"P6"):
        raise MalformedHeader("not a PGM/PPM file")
    pos = 2
    values = []
    for _ in range(3):
        m = _TOKEN.match(data, pos)
        if m is None or not m.group(1).isdigit():
            raise MalformedHeader("header needs width, height and maxval as decimal integers")
        values.append(int(m.group(1)))
        pos = m.end()
    width, height, maxval = values
    if pos >= len(data) or data[pos : pos + 1] not in (b" ", b"\t", b"\n", b"\r"):
        raise MalformedHeader("header must end with a single whitespace byte")
    pos += 1
    if width < 1 or height < 1:
        raise MalformedHeader("width and height must be positive")
    if not 0 < maxval < 65536:
        raise MalformedHeader(f"maxval {maxval} out of range")
    if maxval != 255:
        raise UnsupportedFormat(f"only 8-bit images with maxval 255 are supported, got {maxval}")
    channels = 1 if magic == b"P5" else 3
    count = width * height * channels
    body = data[pos : pos + count]
    if len(body) != count:
        raise MalformedHeader(f"expected {count} sample bytes, found {len(body)}")
    px = np.frombuffer(body, dtype=np.uint8).reshape((height, width, channels) if channels == 3 else (height, width))
    return Raster(px.copy())


def encode_raster(raster: Raster) -> bytes:
    magic = b"P5" if raster.channels == 1 else b"P6"
    header = magic + f"\n{raster.width} {raster.height}\n255\n".encode("ascii")
    return header + np.ascontiguousarray(raster.pixels).tobytes()


def load_raster(path) -> Raster:
    return parse_raster(Path(path).read_bytes())


def save_raster(raster: Raster, path, overwrite: bool = False) -> None:
    path = Path(path)
    _check_writable(path, overwrite)
    tmp = path.with_name(path.name + f".tmp{os.getpid()}")
    tmp.write_bytes(encode_raster(raster))
    os.replace(tmp, path)
