"""FLD1 binary field files.

Layout (all little-endian):

    bytes 0-3   magic "FLD1"
    byte  4     kind: 1 spinor, 2 phi, 3 gauge, 4 su2, 5 scalar
    byte  5     rank r (3 or 4)
    byte  6     flags: bit 0 jets present, bit 1 cell-centered
    byte  7     reserved, must be 0
    r times     u32 n_i, f64 origin_i, f64 spacing_i, u8 boundary
                (boundary: 0 open, 1 periodic)
    payload     f64 samples, site-major (last grid axis fastest),
                component-fastest within a site, real/imaginary
                interleaved for complex kinds
    jets        same layout when flagged, axis-major within a site
    trailer     8 bytes: FNV-1a 64-bit checksum of all preceding bytes

Writes are atomic (temp file plus rename), so a failed write never leaves
a partial file behind.  Readers validate magic, header sanity, byte count
and checksum as distinct error types before touching the payload.
"""

from __future__ import annotations

import os
import struct
import tempfile

import numpy as np

from .errors import (BadMagicError, ChecksumError, CountMismatchError,
                     FieldFormatError, HeaderError)
from .fields import GaugeField, PhiField, SpinorField, SU2Field
from .lattice import Grid, ScalarField

MAGIC = b"FLD1"

KIND_SPINOR = 1
KIND_PHI = 2
KIND_GAUGE = 3
KIND_SU2 = 4
KIND_SCALAR = 5

_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x100000001B3
_MASK64 = 0xFFFFFFFFFFFFFFFF


def fnv1a64(data: bytes) -> int:
    """FNV-1a 64-bit hash of a byte string."""
    h = _FNV_OFFSET
    prime = _FNV_PRIME
    mask = _MASK64
    for b in memoryview(data):
        h = ((h ^ b) * prime) & mask
    return h


def _kind_of(field) -> int:
    if isinstance(field, SpinorField):
        return KIND_SPINOR
    if isinstance(field, PhiField):
        return KIND_PHI
    if isinstance(field, GaugeField):
        return KIND_GAUGE
    if isinstance(field, SU2Field):
        return KIND_SU2
    if isinstance(field, ScalarField):
        return KIND_SCALAR
    raise FieldFormatError(f"cannot serialize {type(field).__name__}")


def _floats_per_site(kind: int, rank: int) -> int:
    return {KIND_SPINOR: 4, KIND_PHI: 4, KIND_GAUGE: 3 * rank,
            KIND_SU2: 8, KIND_SCALAR: 1}[kind]


def _payload_bytes(values: np.ndarray) -> bytes:
    if np.iscomplexobj(values):
        flat = np.ascontiguousarray(values, dtype="<c16")
    else:
        flat = np.ascontiguousarray(values, dtype="<f8")
    return flat.tobytes()


def write_field(field, path: str) -> None:
    """Serialize a field to an FLD1 file atomically."""
    kind = _kind_of(field)
    grid = field.grid
    jet = getattr(field, "jet", None)
    flags = (1 if jet is not None else 0) | (2 if grid.cell_centered else 0)

    parts = [MAGIC, struct.pack("<BBBB", kind, grid.rank, flags, 0)]
    for i in range(grid.rank):
        parts.append(struct.pack("<IddB", grid.shape[i], grid.origin[i],
                                 grid.spacing[i], 1 if grid.periodic[i] else 0))
    parts.append(_payload_bytes(field.values))
    if jet is not None:
        parts.append(_payload_bytes(jet))
    blob = b"".join(parts)
    blob += struct.pack("<Q", fnv1a64(blob))

    directory = os.path.dirname(os.path.abspath(path)) or "."
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".fld1-")
    try:
        with os.fdopen(fd, "wb") as handle:
            handle.write(blob)
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise


def _split_complex(flat: np.ndarray, shape: tuple) -> np.ndarray:
    return flat.view("<c16").reshape(shape).astype(np.complex128)


def read_field(path: str):
    """Deserialize an FLD1 file; the inverse of :func:`write_field`."""
    with open(path, "rb") as handle:
        blob = handle.read()

    if len(blob) < 4 or blob[:4] != MAGIC:
        raise BadMagicError(f"{path}: not an FLD1 file")
    if len(blob) < 8:
        raise CountMismatchError(f"{path}: truncated header")
    kind, rank, flags, reserved = struct.unpack("<BBBB", blob[4:8])
    if kind not in (KIND_SPINOR, KIND_PHI, KIND_GAUGE, KIND_SU2, KIND_SCALAR):
        raise HeaderError(f"{path}: unknown field kind {kind}")
    if rank not in (3, 4):
        raise HeaderError(f"{path}: unsupported rank {rank}")
    if flags & ~0b11:
        raise HeaderError(f"{path}: unknown flag bits {flags:#04x}")
    if reserved != 0:
        raise HeaderError(f"{path}: reserved byte is {reserved}, expected 0")
    has_jet = bool(flags & 1)
    cell_centered = bool(flags & 2)
    if kind == KIND_SCALAR and has_jet:
        raise HeaderError(f"{path}: scalar fields carry no jets")

    header_size = 8 + rank * 21
    if len(blob) < header_size:
        raise CountMismatchError(f"{path}: truncated axis records")
    shape, origin, spacing, periodic = [], [], [], []
    off = 8
    for _ in range(rank):
        n, o, h, boundary = struct.unpack("<IddB", blob[off:off + 21])
        off += 21
        if n < 4:
            raise HeaderError(f"{path}: axis with {n} < 4 points")
        if not (np.isfinite(o) and np.isfinite(h) and h > 0):
            raise HeaderError(f"{path}: bad axis origin/spacing")
        if boundary not in (0, 1):
            raise HeaderError(f"{path}: bad boundary code {boundary}")
        shape.append(n)
        origin.append(o)
        spacing.append(h)
        periodic.append(boundary == 1)

    sites = int(np.prod(shape))
    per_site = _floats_per_site(kind, rank)
    payload_floats = sites * per_site * (1 + (rank if has_jet else 0))
    expected = header_size + 8 * payload_floats + 8
    if len(blob) != expected:
        raise CountMismatchError(
            f"{path}: file has {len(blob)} bytes, layout requires {expected}")

    stored, = struct.unpack("<Q", blob[-8:])
    actual = fnv1a64(blob[:-8])
    if stored != actual:
        raise ChecksumError(
            f"{path}: checksum {stored:#018x} != computed {actual:#018x}")

    grid = Grid(shape=tuple(shape), origin=tuple(origin), spacing=tuple(spacing),
                periodic=tuple(periodic), cell_centered=cell_centered)
    flat = np.frombuffer(blob, dtype="<f8", count=payload_floats,
                         offset=header_size)
    nvals = sites * per_site
    raw_values = flat[:nvals]
    raw_jet = flat[nvals:] if has_jet else None
    gshape = tuple(shape)

    if kind == KIND_SPINOR:
        values = _split_complex(raw_values, gshape + (2,))
        jet = _split_complex(raw_jet, gshape + (rank, 2)) if has_jet else None
        norms = np.sum(values.real**2 + values.imag**2, axis=-1)
        normalized = bool(np.max(np.abs(norms - 1.0)) <= 1e-10)
        return SpinorField(grid, values, jet=jet, normalized=normalized)
    if kind == KIND_PHI:
        values = raw_values.reshape(gshape + (4,)).copy()
        jet = raw_jet.reshape(gshape + (rank, 4)).copy() if has_jet else None
        return PhiField(grid, values, jet=jet)
    if kind == KIND_GAUGE:
        values = raw_values.reshape(gshape + (rank, 3)).copy()
        jet = raw_jet.reshape(gshape + (rank, rank, 3)).copy() if has_jet else None
        return GaugeField(grid, values, jet=jet)
    if kind == KIND_SU2:
        values = _split_complex(raw_values, gshape + (2, 2))
        jet = _split_complex(raw_jet, gshape + (rank, 2, 2)) if has_jet else None
        return SU2Field(grid, values, jet=jet)
    values = raw_values.reshape(gshape).copy()
    return ScalarField(grid, values)
