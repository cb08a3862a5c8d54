"""Binary model container.

Layout (little-endian)::

    magic      4 bytes   b"PFZ1"
    version    u32
    config     u32 count, then entries: u16 key length, key (utf-8),
               u8 tag, value   -- tags: i=i64, f=f64, b=u8, s=str, F=f64 list
    sections   repeated: 4-byte tag, u64 payload length, payload
    crc32      u32 over every preceding byte

Sections: ``CLAS`` class labels, ``CBOK`` codebook, ``MSVM`` one per
feature classifier, ``BASE`` optional bag-of-words baseline, ``FWTS``
fusion weights. A codebook-only file carries just ``CBOK``.

Floats are written as raw IEEE-754 doubles, so a load/save round trip is
bit-exact.
"""
from __future__ import annotations

import io
import struct
import zlib
from pathlib import Path

import numpy as np

from .codebook import Codebook
from .config import PipelineConfig
from .errors import (
    BadMagic,
    ChecksumMismatch,
    InvariantViolation,
    ModelFormatError,
    ModelIoError,
    UnsupportedVersion,
)
from .features import FEATURE_KINDS, FeatureKind
from .fusion import FusionWeights
from .pipeline import ModelBundle
from .svm import BinarySvm, KernelKind, KernelSpec, MulticlassSvm

MAGIC = b"PFZ1"
VERSION = 1
_HEADER = struct.Struct("<4sI")
_CRC = struct.Struct("<I")
_KERNEL_CODES = {KernelKind.LINEAR: 0, KernelKind.RBF: 1}
_KERNEL_KINDS = {v: k for k, v in _KERNEL_CODES.items()}


# ---------------------------------------------------------------- writing

class _Writer:
    def __init__(self):
        self.buf = io.BytesIO()

    def pack(self, fmt, *vals):
        self.buf.write(struct.pack("<" + fmt, *vals))

    def string(self, s: str):
        raw = s.encode("utf-8")
        self.pack("I", len(raw))
        self.buf.write(raw)

    def floats(self, arr):
        a = np.ascontiguousarray(arr, dtype="<f8")
        self.buf.write(a.tobytes())

    def getvalue(self) -> bytes:
        return self.buf.getvalue()


def _encode_config(cfg: dict) -> bytes:
    w = _Writer()
    w.pack("I", len(cfg))
    for key in sorted(cfg):
        val = cfg[key]
        raw = key.encode("utf-8")
        w.pack("H", len(raw))
        w.buf.write(raw)
        if isinstance(val, bool):
            w.pack("cB", b"b", int(val))
        elif isinstance(val, int):
            w.pack("cq", b"i", val)
        elif isinstance(val, float):
            w.pack("cd", b"f", val)
        elif isinstance(val, str):
            w.pack("c", b"s")
            w.string(val)
        elif isinstance(val, (tuple, list)):
            w.pack("cI", b"F", len(val))
            w.floats(np.asarray(val, dtype=np.float64))
        else:
            raise TypeError(f"cannot encode config value {key}={val!r}")
    return w.getvalue()


def _encode_codebook(cb: Codebook) -> bytes:
    w = _Writer()
    seed = -1 if cb.rng_seed is None else int(cb.rng_seed)
    w.pack("qdII", seed, float(cb.inertia), cb.size, cb.dim)
    w.floats(cb.centers)
    return w.getvalue()


def _encode_msvm(model: MulticlassSvm) -> bytes:
    w = _Writer()
    w.string(model.feature_kind)
    w.pack("I", len(model.class_labels))
    for c in model.class_labels:
        w.string(c)
    for b in model.binaries:
        n_sv, dim = b.support_vectors.shape
        w.pack("BdddII", _KERNEL_CODES[b.kernel.kind], float(b.kernel.gamma), float(b.C),
               float(b.bias), n_sv, dim)
        w.floats(b.alphas)
        w.floats(b.support_vectors)
    return w.getvalue()


def _encode_labels(labels) -> bytes:
    w = _Writer()
    w.pack("I", len(labels))
    for c in labels:
        w.string(c)
    return w.getvalue()


def _container(config: dict, sections) -> bytes:
    body = io.BytesIO()
    body.write(_HEADER.pack(MAGIC, VERSION))
    body.write(_encode_config(config))
    for tag, payload in sections:
        body.write(tag)
        body.write(struct.pack("<Q", len(payload)))
        body.write(payload)
    data = body.getvalue()
    return data + _CRC.pack(zlib.crc32(data) & 0xFFFFFFFF)


def bundle_bytes(bundle: ModelBundle) -> bytes:
    cfg = bundle.config.to_dict()
    cfg["content"] = "model"
    sections = [(b"CLAS", _encode_labels(bundle.class_labels)),
                (b"CBOK", _encode_codebook(bundle.codebook))]
    for k in FEATURE_KINDS:
        sections.append((b"MSVM", _encode_msvm(bundle.classifiers[k])))
    if bundle.baseline is not None:
        sections.append((b"BASE", _encode_msvm(bundle.baseline)))
    w = _Writer()
    w.pack("ddd", *bundle.weights.as_tuple())
    sections.append((b"FWTS", w.getvalue()))
    return _container(cfg, sections)


def codebook_bytes(codebook: Codebook, config: PipelineConfig | None = None) -> bytes:
    cfg = (config or PipelineConfig(words=codebook.size)).to_dict()
    cfg["content"] = "codebook"
    return _container(cfg, [(b"CBOK", _encode_codebook(codebook))])


def _write(path, data: bytes):
    try:
        Path(path).write_bytes(data)
    except OSError as exc:
        raise ModelIoError(f"cannot write {path}: {exc}") from exc


def save_model(bundle: ModelBundle, path) -> None:
    _write(path, bundle_bytes(bundle))


def save_codebook(codebook: Codebook, path, config: PipelineConfig | None = None) -> None:
    _write(path, codebook_bytes(codebook, config))


# ---------------------------------------------------------------- reading

class _Reader:
    def __init__(self, data: bytes, pos: int = 0):
        self.data = data
        self.pos = pos

    def take(self, n: int) -> bytes:
        if n < 0 or self.pos + n > len(self.data):
            raise ModelFormatError("model file is structurally malformed")
        out = self.data[self.pos:self.pos + n]
        self.pos += n
        return out

    def unpack(self, fmt):
        st = struct.Struct("<" + fmt)
        return st.unpack(self.take(st.size))

    def string(self) -> str:
        (n,) = self.unpack("I")
        return self.take(n).decode("utf-8")

    def floats(self, n: int) -> np.ndarray:
        return np.frombuffer(self.take(8 * n), dtype="<f8").astype(np.float64)


def _decode_config(r: _Reader) -> dict:
    (count,) = r.unpack("I")
    out = {}
    for _ in range(count):
        (klen,) = r.unpack("H")
        key = r.take(klen).decode("utf-8")
        (tag,) = r.unpack("c")
        if tag == b"b":
            out[key] = bool(r.unpack("B")[0])
        elif tag == b"i":
            out[key] = r.unpack("q")[0]
        elif tag == b"f":
            out[key] = r.unpack("d")[0]
        elif tag == b"s":
            out[key] = r.string()
        elif tag == b"F":
            (n,) = r.unpack("I")
            out[key] = tuple(float(v) for v in r.floats(n))
        else:
            raise ModelFormatError(f"unknown config tag {tag!r} for key {key!r}")
    return out


def _decode_codebook(r: _Reader) -> Codebook:
    seed, inertia, V, D = r.unpack("qdII")
    centers = r.floats(V * D).reshape(V, D)
    return Codebook(centers, None if seed < 0 else seed, inertia)


def _decode_msvm(r: _Reader) -> MulticlassSvm:
    kind = r.string()
    (n,) = r.unpack("I")
    labels = tuple(r.string() for _ in range(n))
    binaries = []
    for _ in range(n):
        code, gamma, C, bias, n_sv, dim = r.unpack("BdddII")
        if code not in _KERNEL_KINDS:
            raise ModelFormatError(f"unknown kernel code {code}")
        alphas = r.floats(n_sv)
        sv = r.floats(n_sv * dim).reshape(n_sv, dim)
        binaries.append(BinarySvm(sv, alphas, bias, KernelSpec(_KERNEL_KINDS[code], gamma), C))
    return MulticlassSvm(labels, tuple(binaries), kind)


def _read_container(data: bytes):
    head = data[:len(MAGIC)]
    if head != MAGIC[:len(head)]:
        raise BadMagic("not a phfusion model file (bad magic)")
    if len(data) < _HEADER.size + _CRC.size:
        raise ChecksumMismatch("model file is truncated")
    body, (crc,) = data[:-_CRC.size], _CRC.unpack(data[-_CRC.size:])
    if zlib.crc32(body) & 0xFFFFFFFF != crc:
        raise ChecksumMismatch("model file checksum mismatch (corrupt or truncated)")
    _, version = _HEADER.unpack(body[:_HEADER.size])
    if version != VERSION:
        raise UnsupportedVersion(f"model format version {version} is not supported "
                                 f"(expected {VERSION})")
    r = _Reader(body, _HEADER.size)
    try:
        config = _decode_config(r)
    except UnicodeDecodeError as exc:
        raise ModelFormatError(f"config block is malformed: {exc}") from exc
    sections = []
    while r.pos < len(body):
        tag = r.take(4)
        (length,) = r.unpack("Q")
        sections.append((tag, _Reader(r.take(length))))
    return config, sections


def _read(path) -> bytes:
    try:
        return Path(path).read_bytes()
    except OSError as exc:
        raise ModelIoError(f"cannot read {path}: {exc}") from exc


def bundle_from_bytes(data: bytes) -> ModelBundle:
    config, sections = _read_container(data)
    if config.get("content") != "model":
        raise ModelFormatError(f"file holds a {config.get('content')!r}, not a model")
    try:
        labels = codebook = weights = baseline = None
        msvms = []
        for tag, r in sections:
            if tag == b"CLAS":
                (n,) = r.unpack("I")
                labels = tuple(r.string() for _ in range(n))
            elif tag == b"CBOK":
                codebook = _decode_codebook(r)
            elif tag == b"MSVM":
                msvms.append(_decode_msvm(r))
            elif tag == b"BASE":
                baseline = _decode_msvm(r)
            elif tag == b"FWTS":
                weights = FusionWeights(*r.unpack("ddd"))
            else:
                raise ModelFormatError(f"unknown section {tag!r}")
        if labels is None or codebook is None or weights is None or len(msvms) != 3:
            raise ModelFormatError("model file is missing required sections")
        classifiers = {FeatureKind(m.feature_kind): m for m in msvms}
        if set(classifiers) != set(FEATURE_KINDS):
            raise ModelFormatError("model file must hold one classifier per feature")
        cfg = PipelineConfig.from_dict(config)
    except ModelFormatError:
        raise
    except (ValueError, KeyError, TypeError, UnicodeDecodeError, struct.error) as exc:
        raise ModelFormatError(f"model file is malformed: {exc}") from exc
    bundle = ModelBundle(cfg, codebook, classifiers, weights, labels, baseline)
    try:
        bundle.check_consistent()
    except InvariantViolation as exc:
        raise ModelFormatError(f"model file is inconsistent: {exc}") from exc
    return bundle


def load_model(path) -> ModelBundle:
    return bundle_from_bytes(_read(path))


def load_codebook(path) -> tuple[Codebook, PipelineConfig]:
    """Codebook (and its build config) from a codebook or model file."""
    config, sections = _read_container(_read(path))
    try:
        for tag, r in sections:
            if tag == b"CBOK":
                return _decode_codebook(r), PipelineConfig.from_dict(config)
    except (ValueError, KeyError, TypeError, UnicodeDecodeError, struct.error) as exc:
        raise ModelFormatError(f"codebook section is malformed: {exc}") from exc
    raise ModelFormatError(f"{path} holds no codebook")
