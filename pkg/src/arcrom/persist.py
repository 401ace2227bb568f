"""Versioned binary container for offline reduced-order artifacts.

Layout (all integers little-endian):

* magic bytes ``ARCROM1\\0``
* header: uint32 version, uint32 model count
* basis section: uint32 rows, uint32 R, float64 eps_svd, uint32 sigma
  count; basis entries as complex64 in column-major order; singular
  values as float64
* one record per EIM model: uint8 kind code, uint8 entry row, uint8
  entry column, uint8 pad, uint32 q, uint32 n_c, float64 eps_eim,
  magic indices as uint32, the interpolation square and the two reduced
  matrix stacks (forward / reverse pair orientation) as complex64 in
  row-major order, uint32 trajectory length, trajectory as float64

A structured-text metadata sidecar (``<path>.meta.json``) carries the
family hash, tolerances, seeds and discretization parameters so a
container is never combined with a mismatched arc family.
"""

from __future__ import annotations

import hashlib
import json
import struct
from pathlib import Path

import numpy as np

from .geometry import ArcFamily
from .kernel import ElasticParams
from .rom import EimModel, ReducedBasis

__all__ = [
    "MAGIC",
    "family_hash",
    "write_container",
    "read_container",
]

MAGIC = b"ARCROM1\0"
_VERSION = 1
_KIND_CODES = {"cross": 0, "self_j": 1, "self_reg": 2}
_KIND_NAMES = {v: k for k, v in _KIND_CODES.items()}


def family_hash(family: ArcFamily, params: ElasticParams, n: int) -> str:
    """Stable digest of everything the offline artifacts depend on."""
    geom = family.geom
    payload = {
        "box_half_width": geom.box_half_width,
        "r_min": geom.r_min,
        "r_max": geom.r_max,
        "d_min": geom.d_min,
        "d_max": geom.d_max,
        "s": geom.s,
        "basis_label": family.basis.label,
        "decay_norms": [float(b) for b in family.basis.decay_norms],
        "omega": params.omega,
        "lame_lambda": params.lame_lambda,
        "lame_mu": params.lame_mu,
        "n": n,
    }
    blob = json.dumps(payload, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()


def _pack_complex64(a: np.ndarray, order: str = "C") -> bytes:
    return np.ascontiguousarray(
        a.astype(np.complex64).flatten(order=order)
    ).tobytes()


def write_container(path, basis: ReducedBasis, models, meta: dict) -> None:
    """Write the offline artifacts and their metadata sidecar."""
    path = Path(path)
    chunks = [MAGIC, struct.pack("<II", _VERSION, len(models))]
    rows, r = basis.v.shape
    chunks.append(struct.pack("<IIdI", rows, r, basis.eps_svd,
                              len(basis.singular_values)))
    chunks.append(_pack_complex64(basis.v, order="F"))
    chunks.append(np.asarray(basis.singular_values,
                             dtype="<f8").tobytes())
    for m in models:
        p, q_entry = m.entry
        chunks.append(struct.pack("<BBBBIId", _KIND_CODES[m.kind], p, q_entry,
                                  0, m.q, m.n_c, m.eps_eim))
        chunks.append(np.asarray(m.magic_indices, dtype="<u4").tobytes())
        chunks.append(_pack_complex64(m.interp_square))
        chunks.append(_pack_complex64(m.reduced_mats))
        chunks.append(_pack_complex64(m.reduced_mats_rev))
        traj = np.asarray(m.error_trajectory, dtype="<f8")
        chunks.append(struct.pack("<I", len(traj)))
        chunks.append(traj.tobytes())
    path.write_bytes(b"".join(chunks))
    sidecar = dict(meta)
    sidecar["format"] = {"magic": "ARCROM1", "version": _VERSION}
    Path(str(path) + ".meta.json").write_text(
        json.dumps(sidecar, indent=2, sort_keys=True) + "\n"
    )


class _Reader:
    def __init__(self, data: bytes):
        self.data = data
        self.pos = 0

    def take(self, n: int) -> bytes:
        if self.pos + n > len(self.data):
            raise ValueError("container truncated")
        out = self.data[self.pos:self.pos + n]
        self.pos += n
        return out

    def unpack(self, fmt: str):
        return struct.unpack(fmt, self.take(struct.calcsize(fmt)))

    def complex64(self, shape, order="C") -> np.ndarray:
        count = int(np.prod(shape))
        flat = np.frombuffer(self.take(8 * count), dtype="<c8")
        return flat.reshape(shape, order=order).astype(complex)


def read_container(path) -> tuple[ReducedBasis, list, dict]:
    """Read offline artifacts; returns (basis, models, metadata)."""
    path = Path(path)
    rd = _Reader(path.read_bytes())
    if rd.take(len(MAGIC)) != MAGIC:
        raise ValueError(f"{path} is not a reduced-model container")
    version, n_models = rd.unpack("<II")
    if version != _VERSION:
        raise ValueError(f"unsupported container version {version}")
    rows, r, eps_svd, n_sigma = rd.unpack("<IIdI")
    v = rd.complex64((rows, r), order="F")
    sigma = np.frombuffer(rd.take(8 * n_sigma), dtype="<f8").copy()
    basis = ReducedBasis(v=v, singular_values=sigma, eps_svd=eps_svd, r=r)
    models = []
    for _ in range(n_models):
        kind_code, p, q_entry, _pad, q, n_c, eps_eim = rd.unpack("<BBBBIId")
        magic = np.frombuffer(rd.take(4 * q), dtype="<u4").astype(np.int64)
        interp = rd.complex64((q, q))
        mats_f = rd.complex64((q, r, r))
        mats_r = rd.complex64((q, r, r))
        (n_traj,) = rd.unpack("<I")
        traj = np.frombuffer(rd.take(8 * n_traj), dtype="<f8").copy()
        models.append(EimModel(
            kind=_KIND_NAMES[kind_code],
            entry=(p, q_entry),
            magic_indices=magic,
            interp_square=interp,
            reduced_mats=mats_f,
            reduced_mats_rev=mats_r,
            q=q,
            eps_eim=eps_eim,
            n_c=n_c,
            error_trajectory=traj,
            sample_set_meta={},
        ))
    if rd.pos != len(rd.data):
        raise ValueError("container has trailing bytes")
    meta_path = Path(str(path) + ".meta.json")
    meta = json.loads(meta_path.read_text()) if meta_path.exists() else {}
    return basis, models, meta
