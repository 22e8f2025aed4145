"""Domain types, the .fseq/.cseq binary interchange formats, and manifests.

File layouts (all little-endian, fixed regardless of platform):

.fseq   magic "FSQ1" | u32 T | u32 D | f32 frame_rate (0.0 = absent)
        | T*D f32 frame values, row-major
.cseq   magic "CSQ1" | u32 T | u32 K | T u32 codes

Manifests are UTF-8 JSON-lines, one object per line with keys exactly
{id, class, path, role, label, speaker}.  Relative paths are resolved
against the manifest file's directory.
"""

import json
import os
import struct
import tempfile
import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import DataError

FSEQ_MAGIC = b"FSQ1"
CSEQ_MAGIC = b"CSQ1"

ROLES = ("template", "dev", "test")
LABELS = ("positive", "negative", "impostor")


def _as_locked(arr):
    arr = np.array(arr, copy=True)
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True)
class FeatureSequence:
    """A T x D matrix of float32 per-frame feature vectors."""

    frames: np.ndarray
    frame_rate_hz: float | None = None

    def __post_init__(self):
        frames = np.asarray(self.frames)
        if frames.ndim != 2:
            raise DataError(f"frames must be 2-D (T, D), got shape {frames.shape}")
        t, d = frames.shape
        if t < 1 or d < 1:
            raise DataError(f"need T >= 1 and D >= 1, got T={t}, D={d}")
        if not np.all(np.isfinite(frames)):
            raise DataError("frames contain non-finite values")
        object.__setattr__(self, "frames", _as_locked(frames.astype(np.float32)))
        if self.frame_rate_hz is not None:
            rate = float(self.frame_rate_hz)
            if not (np.isfinite(rate) and rate > 0):
                raise DataError(f"frame_rate_hz must be positive, got {rate}")
            object.__setattr__(self, "frame_rate_hz", rate)

    def __len__(self):
        return self.frames.shape[0]

    @property
    def dim(self):
        return self.frames.shape[1]


@dataclass(frozen=True)
class CodeSequence:
    """A length-T sequence of integer codes over an alphabet of size K."""

    codes: np.ndarray
    alphabet_size: int

    def __post_init__(self):
        codes = np.asarray(self.codes)
        if codes.ndim != 1:
            raise DataError(f"codes must be 1-D, got shape {codes.shape}")
        if codes.shape[0] < 1:
            raise DataError("need at least one code")
        if not np.issubdtype(codes.dtype, np.integer):
            raise DataError(f"codes must be integers, got dtype {codes.dtype}")
        k = int(self.alphabet_size)
        if k < 1:
            raise DataError(f"alphabet_size must be >= 1, got {k}")
        codes = codes.astype(np.int64)
        if codes.min() < 0 or codes.max() >= k:
            raise DataError(f"codes must lie in [0, {k}), got range "
                            f"[{codes.min()}, {codes.max()}]")
        object.__setattr__(self, "codes", _as_locked(codes))
        object.__setattr__(self, "alphabet_size", k)

    def __len__(self):
        return self.codes.shape[0]


@dataclass(frozen=True)
class Codebook:
    """K x D matrix of float32 centroids mapping frames to codes."""

    centroids: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.centroids)
        if c.ndim != 2 or c.shape[0] < 1 or c.shape[1] < 1:
            raise DataError(f"centroids must be (K, D) with K,D >= 1, got {c.shape}")
        if not np.all(np.isfinite(c)):
            raise DataError("centroids contain non-finite values")
        c = c.astype(np.float32)
        if np.unique(c, axis=0).shape[0] < c.shape[0]:
            warnings.warn("codebook contains duplicate centroids; the lower "
                          "index wins every tie", stacklevel=2)
        object.__setattr__(self, "centroids", _as_locked(c))

    @property
    def size(self):
        return self.centroids.shape[0]

    @property
    def dim(self):
        return self.centroids.shape[1]


@dataclass(frozen=True)
class ManifestEntry:
    id: str
    word_class: str
    path: str
    role: str
    label: str
    speaker: str


@dataclass(frozen=True)
class Manifest:
    entries: tuple = field(default_factory=tuple)

    def by_role(self, role):
        return [e for e in self.entries if e.role == role]

    def templates_for(self, word_class):
        return [e for e in self.entries
                if e.role == "template" and e.word_class == word_class]

    def classes(self, role=None):
        seen = []
        for e in self.entries:
            if role is not None and e.role != role:
                continue
            if e.word_class not in seen:
                seen.append(e.word_class)
        return seen


def atomic_write_bytes(path, payload):
    """Write bytes via a temp file + rename so readers never see partial files."""
    path = os.fspath(path)
    d = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".tmp-", suffix="~")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(payload)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_fseq(seq, path):
    """Serialize a FeatureSequence to the .fseq binary format."""
    if not isinstance(seq, FeatureSequence):
        seq = FeatureSequence(seq)
    t, d = seq.frames.shape
    rate = 0.0 if seq.frame_rate_hz is None else float(seq.frame_rate_hz)
    header = struct.pack("<4sIIf", FSEQ_MAGIC, t, d, rate)
    body = np.ascontiguousarray(seq.frames, dtype="<f4").tobytes()
    atomic_write_bytes(path, header + body)


def read_fseq(path):
    """Inverse of write_fseq. Validates magic, sizes and finiteness."""
    with open(path, "rb") as fh:
        blob = fh.read()
    if len(blob) < 16:
        raise DataError(f"{path}: too short to hold an .fseq header")
    magic, t, d, rate = struct.unpack_from("<4sIIf", blob, 0)
    if magic != FSEQ_MAGIC:
        raise DataError(f"{path}: bad magic {magic!r}, expected {FSEQ_MAGIC!r}")
    if t < 1 or d < 1:
        raise DataError(f"{path}: invalid dimensions T={t}, D={d}")
    expected = 16 + 4 * t * d
    if len(blob) < expected:
        raise DataError(f"{path}: truncated payload, header declares {t}x{d} "
                        f"floats but only {len(blob) - 16} bytes follow")
    if len(blob) > expected:
        raise DataError(f"{path}: {len(blob) - expected} trailing bytes after payload")
    frames = np.frombuffer(blob, dtype="<f4", count=t * d, offset=16).reshape(t, d)
    if not np.all(np.isfinite(frames)):
        raise DataError(f"{path}: payload contains non-finite values")
    if rate != 0.0 and not (np.isfinite(rate) and rate > 0):
        raise DataError(f"{path}: invalid frame rate {rate}")
    return FeatureSequence(frames, frame_rate_hz=None if rate == 0.0 else float(rate))


def write_cseq(seq, path):
    """Serialize a CodeSequence to the .cseq binary format."""
    t = len(seq)
    header = struct.pack("<4sII", CSEQ_MAGIC, t, seq.alphabet_size)
    body = seq.codes.astype("<u4").tobytes()
    atomic_write_bytes(path, header + body)


def read_cseq(path):
    """Inverse of write_cseq. Validates magic, sizes and code range."""
    with open(path, "rb") as fh:
        blob = fh.read()
    if len(blob) < 12:
        raise DataError(f"{path}: too short to hold a .cseq header")
    magic, t, k = struct.unpack_from("<4sII", blob, 0)
    if magic != CSEQ_MAGIC:
        raise DataError(f"{path}: bad magic {magic!r}, expected {CSEQ_MAGIC!r}")
    if t < 1 or k < 1:
        raise DataError(f"{path}: invalid header T={t}, K={k}")
    expected = 12 + 4 * t
    if len(blob) < expected:
        raise DataError(f"{path}: truncated payload, header declares {t} codes "
                        f"but only {len(blob) - 12} bytes follow")
    if len(blob) > expected:
        raise DataError(f"{path}: {len(blob) - expected} trailing bytes after payload")
    codes = np.frombuffer(blob, dtype="<u4", count=t, offset=12).astype(np.int64)
    if codes.size and codes.max() >= k:
        raise DataError(f"{path}: stored code {codes.max()} >= alphabet size {k}")
    return CodeSequence(codes, alphabet_size=int(k))


_MANIFEST_KEYS = {"id", "class", "path", "role", "label", "speaker"}


def load_manifest(path):
    """Load and validate a JSON-lines manifest.

    Checks: exact key set per line, unique ids, known roles/labels, every
    referenced file resolvable, and at least one template for each class
    that appears in the dev/test splits.
    """
    base = os.path.dirname(os.path.abspath(os.fspath(path)))
    if not os.path.exists(path):
        raise DataError(f"{path}: file not found")
    entries = []
    seen_ids = set()
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as e:
                raise DataError(f"{path}:{lineno}: invalid JSON: {e}") from e
            if not isinstance(obj, dict) or set(obj) != _MANIFEST_KEYS:
                raise DataError(f"{path}:{lineno}: keys must be exactly "
                                f"{sorted(_MANIFEST_KEYS)}")
            if obj["role"] not in ROLES:
                raise DataError(f"{path}:{lineno}: unknown role {obj['role']!r}")
            if obj["label"] not in LABELS:
                raise DataError(f"{path}:{lineno}: unknown label {obj['label']!r}")
            if obj["id"] in seen_ids:
                raise DataError(f"{path}:{lineno}: duplicate id {obj['id']!r}")
            seen_ids.add(obj["id"])
            resolved = obj["path"]
            if not os.path.isabs(resolved):
                resolved = os.path.join(base, resolved)
            if not os.path.isfile(resolved):
                raise DataError(f"{path}:{lineno}: file not found: {resolved}")
            entries.append(ManifestEntry(
                id=obj["id"], word_class=obj["class"], path=resolved,
                role=obj["role"], label=obj["label"], speaker=obj["speaker"],
            ))
    manifest = Manifest(entries=tuple(entries))
    template_classes = {e.word_class for e in manifest.by_role("template")}
    for role in ("dev", "test"):
        for e in manifest.by_role(role):
            if e.word_class not in template_classes:
                raise DataError(f"{path}: {role} entry {e.id!r} has class "
                                f"{e.word_class!r} with no templates")
    return manifest
