"""Point cloud ingestion, synthetic frame generators, and dataset manifests.

Supported file formats: ASCII XYZ (three or more whitespace-separated
decimal fields per line, extras become features) and a strict subset of
binary little-endian PLY. Manifests are line-oriented text files listing one
frame source per line; a source is either a file path or a synthetic
generator spec.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import EmptyFile, InvalidSpec, ParseError, UnsupportedFormat
from .points import PointBatch, validate_batch

SYNTH_KINDS = ("uniform_cube", "gaussian_clusters", "radial_lidar")

_PLY_SCALARS = {
    "char": "i1", "int8": "i1",
    "uchar": "u1", "uint8": "u1",
    "short": "i2", "int16": "i2",
    "ushort": "u2", "uint16": "u2",
    "int": "i4", "int32": "i4",
    "uint": "u4", "uint32": "u4",
    "float": "f4", "float32": "f4",
    "double": "f8", "float64": "f8",
}


def load_xyz(path) -> PointBatch:
    """Load one frame from an ASCII XYZ file.

    Blank lines and `#` comments are skipped. Extra numeric columns beyond
    xyz become feature columns.

    Raises:
        ParseError: a data line has fewer than 3 fields or a non-numeric one.
        EmptyFile: no data lines.
    """
    records = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            if len(parts) < 3:
                raise ParseError(lineno, f"expected >= 3 fields, got {len(parts)}")
            try:
                values = [float(p) for p in parts]
            except ValueError:
                raise ParseError(lineno, "non-numeric field") from None
            extra = values[3:] if len(values) > 3 else None
            records.append((0, values[:3], extra))
    if not records:
        raise EmptyFile(str(path))
    return validate_batch(records)


def write_xyz(path, batch: PointBatch, include_features: bool = True) -> None:
    """Write points as ASCII XYZ at 9 significant digits, LF line endings.

    Frame labels are not representable in this format; multi-frame batches
    are written as one concatenated cloud.
    """
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for i in range(batch.count):
            fields = [f"{v:.9g}" for v in batch.coords[i]]
            if include_features and batch.features is not None:
                fields += [f"{v:.9g}" for v in batch.features[i]]
            fh.write(" ".join(fields) + "\n")


def _parse_ply_header(fh):
    magic = fh.readline().strip()
    if magic != b"ply":
        raise UnsupportedFormat("missing ply magic")
    fmt = None
    elements = []  # (name, count, [(prop_name, dtype_code)]), in file order
    while True:
        raw = fh.readline()
        if not raw:
            raise UnsupportedFormat("truncated header")
        line = raw.decode("ascii", errors="replace").strip()
        if not line or line.startswith("comment"):
            continue
        if line == "end_header":
            break
        parts = line.split()
        if parts[0] == "format":
            fmt = parts[1]
        elif parts[0] == "element":
            elements.append((parts[1], int(parts[2]), []))
        elif parts[0] == "property":
            if not elements:
                raise UnsupportedFormat("property before element")
            name, _, props = elements[-1]
            if parts[1] == "list":
                props.append((parts[-1], "list"))
            else:
                code = _PLY_SCALARS.get(parts[1])
                if code is None:
                    raise UnsupportedFormat(f"unknown property type {parts[1]}")
                props.append((parts[-1], code))
    if fmt != "binary_little_endian":
        raise UnsupportedFormat(f"only binary_little_endian supported, got {fmt}")
    return elements


def load_ply(path) -> PointBatch:
    """Load one frame from a binary little-endian PLY file.

    The vertex element must carry float x, y, z; additional float scalar
    properties become features, non-float scalars are ignored. Elements other
    than vertex are skipped with a warning.

    Raises:
        UnsupportedFormat: ascii or big-endian files, list properties on the
        vertex element, or a list-typed element preceding vertex (its size
        cannot be computed to skip it).
    """
    with open(path, "rb") as fh:
        elements = _parse_ply_header(fh)
        names = [e[0] for e in elements]
        if "vertex" not in names:
            raise UnsupportedFormat("no vertex element")

        for name, count, props in elements:
            if name == "vertex":
                if any(code == "list" for _, code in props):
                    raise UnsupportedFormat("list property on vertex element")
                dtype = np.dtype([(pname, "<" + code) for pname, code in props])
                data = np.frombuffer(fh.read(dtype.itemsize * count), dtype=dtype, count=count)
                break
            # an element ahead of vertex: skip its payload if its stride is fixed
            warnings.warn(f"skipping PLY element {name!r}", stacklevel=2)
            if any(code == "list" for _, code in props):
                raise UnsupportedFormat(f"cannot skip list-typed element {name!r}")
            stride = sum(np.dtype(code).itemsize for _, code in props)
            fh.seek(stride * count, 1)
        else:
            raise UnsupportedFormat("no vertex element")

        trailing = [name for name, _, _ in elements[names.index("vertex") + 1 :]]
        if trailing:
            warnings.warn(f"skipping PLY elements {trailing}", stacklevel=2)

    prop_names = [p for p, _ in elements[names.index("vertex")][2]]
    for axis in ("x", "y", "z"):
        if axis not in prop_names:
            raise UnsupportedFormat(f"vertex element lacks {axis}")
    if data.shape[0] == 0:
        raise EmptyFile(str(path))

    coords = np.stack([data["x"], data["y"], data["z"]], axis=1).astype(np.float64)
    feat_cols = [
        data[p].astype(np.float64)
        for p, code in elements[names.index("vertex")][2]
        if p not in ("x", "y", "z") and code in ("f4", "f8")
    ]
    features = np.stack(feat_cols, axis=1) if feat_cols else None
    batch_id = np.zeros(coords.shape[0], dtype=np.int64)
    return PointBatch(batch_id=batch_id, coords=coords, features=features)


def _generate_frame(kind: str, points: int, seed: int, params: dict) -> PointBatch:
    rng = np.random.default_rng(seed)
    if kind == "uniform_cube":
        coords = rng.random((points, 3))
    elif kind == "gaussian_clusters":
        clusters = int(params.get("clusters", 4))
        std = float(params.get("std", 0.05))
        if clusters < 1:
            raise InvalidSpec("clusters must be >= 1")
        centers = rng.random((clusters, 3))
        assign = rng.integers(0, clusters, size=points)
        coords = centers[assign] + rng.normal(0.0, std, size=(points, 3))
    elif kind == "radial_lidar":
        rmin = float(params.get("rmin", 1.0))
        rmax = float(params.get("rmax", 30.0))
        if not 0 < rmin < rmax:
            raise InvalidSpec("need 0 < rmin < rmax")
        radius = rng.uniform(rmin, rmax, size=points)
        dirs = rng.normal(size=(points, 3))
        norms = np.linalg.norm(dirs, axis=1)
        norms[norms == 0] = 1.0
        coords = dirs / norms[:, None] * radius[:, None]
    else:
        raise InvalidSpec(f"unknown generator kind {kind!r}")
    return PointBatch(batch_id=np.zeros(points, dtype=np.int64), coords=coords)


def _parse_synth_spec(spec: str):
    parts = spec.split(":")
    if len(parts) < 2 or parts[0] != "synth":
        raise InvalidSpec(f"bad generator spec {spec!r}")
    kind = parts[1]
    if kind not in SYNTH_KINDS:
        raise InvalidSpec(f"unknown generator kind {kind!r}")
    params: dict = {}
    for item in parts[2:]:
        if "=" not in item:
            raise InvalidSpec(f"bad generator field {item!r} in {spec!r}")
        key, value = item.split("=", 1)
        params[key] = value
    try:
        points = int(params.pop("points"))
        seed = int(params.pop("seed"))
    except KeyError as missing:
        raise InvalidSpec(f"generator spec missing {missing}") from None
    if points < 1:
        raise InvalidSpec("points must be >= 1")
    return kind, points, seed, params


@dataclass(frozen=True)
class DatasetManifest:
    """An ordered list of frame sources, iterable one frame at a time.

    Sources are file paths (xyz/ply, resolved against base_dir) or
    `synth:<kind>:points=N:seed=S[:key=value...]` generator specs. Iteration
    streams frames in manifest order; repeated iteration replays the same
    frames.
    """

    sources: tuple[str, ...]
    base_dir: Path = field(default_factory=Path)
    feature_names: tuple[str, ...] | None = None

    def __post_init__(self):
        if len(self.sources) < 1:
            raise InvalidSpec("manifest needs at least one frame source")
        object.__setattr__(self, "base_dir", Path(self.base_dir))

    @property
    def frame_count(self) -> int:
        return len(self.sources)

    def _load_source(self, source: str) -> PointBatch:
        if source.startswith("synth:"):
            kind, points, seed, params = _parse_synth_spec(source)
            return _generate_frame(kind, points, seed, params)
        path = self.base_dir / source
        if path.suffix.lower() == ".ply":
            return load_ply(path)
        return load_xyz(path)

    def __iter__(self):
        for source in self.sources:
            yield self._load_source(source)

    def __len__(self) -> int:
        return len(self.sources)

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            for source in self.sources:
                fh.write(source + "\n")


def load_manifest(path) -> DatasetManifest:
    """Read a manifest file and check that every source is resolvable."""
    path = Path(path)
    sources = []
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            sources.append(line)
    manifest = DatasetManifest(sources=tuple(sources), base_dir=path.parent)
    for source in sources:
        if source.startswith("synth:"):
            _parse_synth_spec(source)
        elif not (manifest.base_dir / source).exists():
            raise InvalidSpec(f"missing frame source {source!r}")
    return manifest


def synth_dataset(kind: str, frames: int, points_per_frame: int, rng_seed: int, **params) -> DatasetManifest:
    """Build a manifest of synthetic frames, one generator spec per frame.

    Per-frame seeds derive deterministically from rng_seed, so the manifest
    (and every frame) is a pure function of its arguments.
    """
    if kind not in SYNTH_KINDS:
        raise InvalidSpec(f"unknown generator kind {kind!r}")
    if frames < 1 or points_per_frame < 1:
        raise InvalidSpec("frames and points_per_frame must be >= 1")
    child_seeds = np.random.SeedSequence(rng_seed).generate_state(frames)
    extras = "".join(f":{k}={v}" for k, v in sorted(params.items()))
    sources = tuple(
        f"synth:{kind}:points={points_per_frame}:seed={int(s)}{extras}" for s in child_seeds
    )
    return DatasetManifest(sources=sources)
