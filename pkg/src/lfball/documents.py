"""JSON map documents.

A document looks like::

    {"version": 1, "kind": "lfm", "m": 1, "label": "shift",
     "payload": {"T": [[{"re": 1, "im": 0}, {"re": 0.5, "im": 0}],
                       [{"re": 0.5, "im": 0}, {"re": 1, "im": 0}]]}}

or, for a half-space normal form, ``"kind": "bcd"`` with payload keys
``alpha`` (real), ``c`` (complex), ``b`` and ``d`` (complex vectors of length
``m - 1``) and ``A`` (an ``(m-1) x (m-1)`` complex matrix). Complex entries are
``{"re": .., "im": ..}`` objects; a bare JSON number is read as a real value.
"""

import hashlib
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .bcd import BCDMap, bcd_to_ball
from .errors import DocumentParseError, SchemaError
from .lfm import LinearFractionalMap

FORMAT_VERSION = 1


def canonical_json(obj):
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), allow_nan=False)


def digest(obj):
    """sha256 of the canonical JSON encoding."""
    return hashlib.sha256(canonical_json(obj).encode()).hexdigest()


def encode_complex(z):
    z = complex(z)
    return {"re": z.real, "im": z.imag}


def encode_vector(v):
    return [encode_complex(x) for x in np.asarray(v).reshape(-1)]


def encode_matrix(M):
    return [encode_vector(row) for row in np.asarray(M)]


def _complex(value, path):
    if isinstance(value, bool):
        raise SchemaError("expected a number or {re, im} object", path)
    if isinstance(value, (int, float)):
        return complex(value)
    if isinstance(value, dict):
        extra = set(value) - {"re", "im"}
        if extra or "re" not in value:
            raise SchemaError("complex entries need exactly the keys 're' and 'im'", path)
        re_, im_ = value["re"], value.get("im", 0.0)
        for part, key in ((re_, "re"), (im_, "im")):
            if isinstance(part, bool) or not isinstance(part, (int, float)):
                raise SchemaError("must be a number", f"{path}.{key}")
        return complex(re_, im_)
    raise SchemaError("expected a number or {re, im} object", path)


def _vector(value, n, path):
    if not isinstance(value, list):
        raise SchemaError("expected an array", path)
    if len(value) != n:
        raise SchemaError(f"expected length {n}, got {len(value)}", path)
    return np.array([_complex(x, f"{path}[{i}]") for i, x in enumerate(value)], dtype=complex)


def _matrix(value, rows, cols, path):
    if not isinstance(value, list):
        raise SchemaError("expected an array of rows", path)
    if len(value) != rows:
        raise SchemaError(f"expected {rows} rows, got {len(value)}", path)
    out = np.zeros((rows, cols), dtype=complex)
    for i, row in enumerate(value):
        out[i] = _vector(row, cols, f"{path}[{i}]")
    return out


def _real(value, path):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise SchemaError("expected a real number", path)
    return float(value)


@dataclass(frozen=True, eq=False)
class MapDocument:
    kind: str
    m: int
    payload: dict
    label: str = None
    version: int = FORMAT_VERSION

    def to_json(self):
        doc = {"version": self.version, "kind": self.kind, "m": self.m, "payload": self.payload}
        if self.label is not None:
            doc["label"] = self.label
        return doc

    @property
    def digest(self):
        return digest(self.to_json())

    def build(self):
        """The ``LinearFractionalMap`` or ``BCDMap`` the document describes."""
        p = self.payload
        m = self.m
        if self.kind == "lfm":
            T = _matrix(p.get("T"), m + 1, m + 1, "payload.T")
            return LinearFractionalMap(T, label=self.label)
        k = m - 1
        alpha = _real(p.get("alpha"), "payload.alpha")
        if not 0.0 < alpha <= 1.0:
            raise SchemaError("alpha must lie in (0, 1]", "payload.alpha")
        return BCDMap(
            alpha=alpha,
            c=_complex(p.get("c"), "payload.c"),
            b=_vector(p.get("b", []), k, "payload.b"),
            d=_vector(p.get("d", []), k, "payload.d"),
            A=_matrix(p.get("A", []), k, k, "payload.A") if k else np.zeros((0, 0)),
            label=self.label,
        )

    def ball_map(self):
        """A ball map without a scale attached; half-space forms are conjugated first."""
        obj = self.build()
        if isinstance(obj, BCDMap):
            return bcd_to_ball(obj, validate=False)
        return obj


def from_json(obj):
    """Check the top-level structure of a decoded document."""
    if not isinstance(obj, dict):
        raise SchemaError("document must be a JSON object", "$")
    version = obj.get("version")
    if version != FORMAT_VERSION:
        raise SchemaError(f"unsupported version {version!r} (expected {FORMAT_VERSION})", "version")
    kind = obj.get("kind")
    if kind not in ("lfm", "bcd"):
        raise SchemaError("must be 'lfm' or 'bcd'", "kind")
    m = obj.get("m")
    if isinstance(m, bool) or not isinstance(m, int) or m < 1:
        raise SchemaError("must be a positive integer", "m")
    payload = obj.get("payload")
    if not isinstance(payload, dict):
        raise SchemaError("must be an object", "payload")
    label = obj.get("label")
    if label is not None and not isinstance(label, str):
        raise SchemaError("must be a string", "label")
    unknown = set(obj) - {"version", "kind", "m", "payload", "label"}
    if unknown:
        raise SchemaError(f"unknown keys {sorted(unknown)}", "$")
    doc = MapDocument(kind=kind, m=m, payload=payload, label=label, version=version)
    doc.build()  # surface payload errors at load time
    return doc


def loads(text):
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise DocumentParseError(exc.msg, exc.lineno, exc.colno) from exc
    return from_json(obj)


def load(path):
    return loads(Path(path).read_text())


def lfm_document(phi, label=None):
    return MapDocument(
        kind="lfm", m=phi.m, payload={"T": encode_matrix(phi.T)}, label=label or phi.label
    )


def bcd_document(bmap, label=None):
    payload = {
        "alpha": bmap.alpha,
        "c": encode_complex(bmap.c),
        "b": encode_vector(bmap.b),
        "d": encode_vector(bmap.d),
        "A": encode_matrix(bmap.A),
    }
    return MapDocument(kind="bcd", m=bmap.m, payload=payload, label=label or bmap.label)


def dumps(doc, indent=2):
    return json.dumps(doc.to_json(), indent=indent, sort_keys=True) + "\n"
