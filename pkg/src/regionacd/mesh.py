"""Triangle-mesh representation, validation, I/O and surface sampling.

Meshes are plain indexed triangle soups held in numpy arrays.  All functions
here are pure; a :class:`TriangleMesh` is immutable after construction and
safe to share across threads.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import EmptyMesh, IoError, NotWatertight, ParseError

WELD_TOL = 1e-9
DEGENERATE_AREA_FACTOR = 1e-12


@dataclass(frozen=True)
class Aabb:
    """Axis-aligned box, ``min <= max`` componentwise."""

    min: np.ndarray
    max: np.ndarray

    def __post_init__(self):
        lo = np.asarray(self.min, dtype=float).reshape(3)
        hi = np.asarray(self.max, dtype=float).reshape(3)
        if not np.all(lo <= hi):
            raise ValueError(f"invalid Aabb: min {lo} > max {hi}")
        object.__setattr__(self, "min", lo)
        object.__setattr__(self, "max", hi)

    @property
    def diagonal(self) -> float:
        return float(np.linalg.norm(self.max - self.min))

    @property
    def volume(self) -> float:
        return float(np.prod(self.max - self.min))

    @property
    def center(self) -> np.ndarray:
        return 0.5 * (self.min + self.max)

    def expanded(self, margin: float) -> "Aabb":
        return Aabb(self.min - margin, self.max + margin)

    def contains_points(self, points: np.ndarray, slack: float = 0.0) -> np.ndarray:
        pts = np.atleast_2d(points)
        return np.all((pts >= self.min - slack) & (pts <= self.max + slack), axis=1)

    def overlaps(self, other: "Aabb", margin: float = 0.0) -> bool:
        return bool(
            np.all(self.min - margin <= other.max) and np.all(other.min - margin <= self.max)
        )

    def interior_overlaps(self, other: "Aabb", tol: float = 0.0) -> bool:
        """True when the open interiors intersect (face contact does not count)."""
        return bool(np.all(self.min < other.max - tol) and np.all(other.min < self.max - tol))


class TriangleMesh:
    """Indexed triangle surface.

    Faces are index triples, counter-clockwise when viewed from outside.
    """

    __slots__ = ("vertices", "faces", "_watertight", "_boundary_edges", "_nonmanifold_edges")

    def __init__(self, vertices, faces):
        v = np.ascontiguousarray(np.asarray(vertices, dtype=float).reshape(-1, 3))
        f = np.ascontiguousarray(np.asarray(faces, dtype=np.int64).reshape(-1, 3))
        if len(f) and (f.min() < 0 or f.max() >= len(v)):
            raise ParseError(
                f"face index out of range: max index {f.max() if len(f) else 0}, "
                f"{len(v)} vertices"
            )
        v.setflags(write=False)
        f.setflags(write=False)
        self.vertices = v
        self.faces = f
        self._watertight = None
        self._boundary_edges = None
        self._nonmanifold_edges = None

    def __repr__(self):
        return f"TriangleMesh({len(self.vertices)} vertices, {len(self.faces)} faces)"

    @property
    def triangles(self) -> np.ndarray:
        """(m, 3, 3) triangle corner coordinates."""
        return self.vertices[self.faces]

    def face_areas(self) -> np.ndarray:
        t = self.triangles
        cross = np.cross(t[:, 1] - t[:, 0], t[:, 2] - t[:, 0])
        return 0.5 * np.linalg.norm(cross, axis=1)

    def area(self) -> float:
        return float(self.face_areas().sum())

    def _edge_census(self):
        if self._watertight is not None:
            return
        if len(self.faces) == 0:
            self._watertight = False
            self._boundary_edges = np.zeros((0, 2), dtype=np.int64)
            self._nonmanifold_edges = np.zeros((0, 2), dtype=np.int64)
            return
        f = self.faces
        directed = np.concatenate([f[:, [0, 1]], f[:, [1, 2]], f[:, [2, 0]]])
        und = np.sort(directed, axis=1)
        order = np.lexsort((und[:, 1], und[:, 0]))
        und_s = und[order]
        dir_s = directed[order]
        # run-length encode undirected edges
        new = np.ones(len(und_s), dtype=bool)
        new[1:] = np.any(und_s[1:] != und_s[:-1], axis=1)
        starts = np.flatnonzero(new)
        counts = np.diff(np.append(starts, len(und_s)))
        boundary = []
        nonmanifold = []
        watertight = True
        for s, c in zip(starts, counts):
            if c == 1:
                boundary.append(dir_s[s])
                watertight = False
            elif c == 2:
                # must be opposite orientations
                if dir_s[s][0] == dir_s[s + 1][0]:
                    nonmanifold.append(und_s[s])
                    watertight = False
            else:
                nonmanifold.append(und_s[s])
                watertight = False
        self._watertight = watertight
        self._boundary_edges = np.array(boundary, dtype=np.int64).reshape(-1, 2)
        self._nonmanifold_edges = np.array(nonmanifold, dtype=np.int64).reshape(-1, 2)

    @property
    def watertight(self) -> bool:
        self._edge_census()
        return self._watertight

    @property
    def boundary_edges(self) -> np.ndarray:
        self._edge_census()
        return self._boundary_edges

    @property
    def nonmanifold_edges(self) -> np.ndarray:
        self._edge_census()
        return self._nonmanifold_edges


@dataclass(frozen=True)
class SurfaceSampleCloud:
    """Area-uniform surface samples with their source faces."""

    points: np.ndarray
    source_face: np.ndarray
    density: float


@dataclass
class ValidationReport:
    watertight: bool = False
    empty: bool = False
    n_vertices: int = 0
    n_faces: int = 0
    n_boundary_edges: int = 0
    n_nonmanifold_edges: int = 0
    degenerate_faces: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.watertight and not self.empty and not self.degenerate_faces

    def to_dict(self) -> dict:
        return {
            "watertight": self.watertight,
            "empty": self.empty,
            "n_vertices": self.n_vertices,
            "n_faces": self.n_faces,
            "n_boundary_edges": self.n_boundary_edges,
            "n_nonmanifold_edges": self.n_nonmanifold_edges,
            "degenerate_faces": list(map(int, self.degenerate_faces)),
        }


def validate(mesh: TriangleMesh) -> ValidationReport:
    """Inspect watertightness, degenerate faces and non-manifold edges."""
    report = ValidationReport(n_vertices=len(mesh.vertices), n_faces=len(mesh.faces))
    if len(mesh.faces) == 0:
        report.empty = True
        return report
    aabb = mesh_aabb(mesh)
    threshold = DEGENERATE_AREA_FACTOR * aabb.diagonal ** 2
    areas = mesh.face_areas()
    report.degenerate_faces = np.flatnonzero(areas <= threshold).tolist()
    report.watertight = mesh.watertight
    report.n_boundary_edges = len(mesh.boundary_edges)
    report.n_nonmanifold_edges = len(mesh.nonmanifold_edges)
    return report


def mesh_aabb(mesh: TriangleMesh) -> Aabb:
    if len(mesh.vertices) == 0:
        return Aabb(np.zeros(3), np.zeros(3))
    return Aabb(mesh.vertices.min(axis=0), mesh.vertices.max(axis=0))


def mesh_volume(mesh: TriangleMesh) -> float:
    """Signed divergence-theorem volume; positive for outward orientation."""
    if not mesh.watertight:
        raise NotWatertight("volume requires a watertight mesh")
    t = mesh.triangles
    return float(np.einsum("ij,ij->i", t[:, 0], np.cross(t[:, 1], t[:, 2])).sum() / 6.0)


def sample_surface(mesh: TriangleMesh, n: int, seed: int) -> SurfaceSampleCloud:
    """Draw ``n`` area-uniform samples; deterministic for a fixed seed."""
    if n < 1:
        raise ValueError("n must be >= 1")
    areas = mesh.face_areas() if len(mesh.faces) else np.zeros(0)
    total = areas.sum()
    if total <= 0.0:
        raise EmptyMesh("mesh has no positive-area faces to sample")
    rng = np.random.default_rng(seed)
    face_idx = rng.choice(len(areas), size=n, p=areas / total)
    u = rng.random(n)
    v = rng.random(n)
    flip = u + v > 1.0
    u[flip] = 1.0 - u[flip]
    v[flip] = 1.0 - v[flip]
    t = mesh.triangles[face_idx]
    points = t[:, 0] + u[:, None] * (t[:, 1] - t[:, 0]) + v[:, None] * (t[:, 2] - t[:, 0])
    return SurfaceSampleCloud(points=points, source_face=face_idx, density=n / total)


def weld_vertices(vertices: np.ndarray, faces: np.ndarray, tol: float = WELD_TOL):
    """Merge vertices that coincide within ``tol`` (snap-to-grid dedup)."""
    if len(vertices) == 0:
        return vertices, faces
    keys = np.round(vertices / tol).astype(np.int64)
    _, first, inverse = np.unique(keys, axis=0, return_index=True, return_inverse=True)
    new_vertices = vertices[first]
    new_faces = inverse[faces]
    return new_vertices, new_faces


def _drop_degenerate_faces(vertices: np.ndarray, faces: np.ndarray) -> np.ndarray:
    if len(faces) == 0:
        return faces
    # identical indices within a face, or zero area
    same = (
        (faces[:, 0] == faces[:, 1])
        | (faces[:, 1] == faces[:, 2])
        | (faces[:, 0] == faces[:, 2])
    )
    t = vertices[faces]
    areas = 0.5 * np.linalg.norm(np.cross(t[:, 1] - t[:, 0], t[:, 2] - t[:, 0]), axis=1)
    return faces[~same & (areas > 0.0)]


def combine_meshes(meshes: list[TriangleMesh]) -> TriangleMesh:
    """Concatenate meshes without welding across components."""
    if not meshes:
        return TriangleMesh(np.zeros((0, 3)), np.zeros((0, 3), dtype=np.int64))
    verts = []
    faces = []
    offset = 0
    for m in meshes:
        verts.append(m.vertices)
        faces.append(m.faces + offset)
        offset += len(m.vertices)
    return TriangleMesh(np.vstack(verts), np.vstack(faces))


# ---------------------------------------------------------------------------
# File formats: OBJ (ASCII v/f records) and STL (binary)
# ---------------------------------------------------------------------------


def _parse_obj(text: str) -> tuple[np.ndarray, np.ndarray]:
    verts = []
    faces = []
    for ln, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        tokens = line.split()
        if tokens[0] == "v":
            if len(tokens) < 4:
                raise ParseError(f"line {ln}: vertex needs 3 coordinates")
            try:
                verts.append([float(tokens[1]), float(tokens[2]), float(tokens[3])])
            except ValueError as exc:
                raise ParseError(f"line {ln}: bad vertex coordinate") from exc
        elif tokens[0] == "f":
            if len(tokens) < 4:
                raise ParseError(f"line {ln}: face needs at least 3 indices")
            try:
                idx = [int(tok.split("/")[0]) for tok in tokens[1:]]
            except ValueError as exc:
                raise ParseError(f"line {ln}: bad face index") from exc
            idx = [i - 1 if i > 0 else len(verts) + i for i in idx]
            for k in range(1, len(idx) - 1):  # fan-triangulate polygons
                faces.append([idx[0], idx[k], idx[k + 1]])
        # ignore vn/vt/usemtl/etc.
    if not verts:
        raise ParseError("no vertices in OBJ")
    v = np.array(verts, dtype=float)
    f = np.array(faces, dtype=np.int64).reshape(-1, 3)
    if len(f) and (f.min() < 0 or f.max() >= len(v)):
        raise ParseError(f"OBJ face references vertex {f.max() + 1} of {len(v)}")
    return v, f


def _parse_stl(data: bytes) -> tuple[np.ndarray, np.ndarray]:
    if len(data) >= 5 and data[:5] == b"solid" and b"facet" in data[:1024]:
        return _parse_stl_ascii(data.decode("ascii", errors="replace"))
    if len(data) < 84:
        raise ParseError("binary STL shorter than header")
    (count,) = struct.unpack_from("<I", data, 80)
    expected = 84 + 50 * count
    if len(data) < expected:
        raise ParseError(f"binary STL truncated: {len(data)} < {expected} bytes")
    raw = np.frombuffer(data, dtype=np.uint8, count=50 * count, offset=84)
    tris = raw.reshape(count, 50)[:, 12:48].copy().view("<f4").reshape(count, 3, 3)
    verts = tris.reshape(-1, 3).astype(float)
    faces = np.arange(len(verts), dtype=np.int64).reshape(-1, 3)
    return verts, faces


def _parse_stl_ascii(text: str) -> tuple[np.ndarray, np.ndarray]:
    verts = []
    for ln, line in enumerate(text.splitlines(), start=1):
        tokens = line.split()
        if tokens[:1] == ["vertex"]:
            if len(tokens) != 4:
                raise ParseError(f"line {ln}: bad STL vertex")
            verts.append([float(t) for t in tokens[1:]])
    if not verts or len(verts) % 3:
        raise ParseError("ASCII STL vertex count not a multiple of 3")
    v = np.array(verts, dtype=float)
    f = np.arange(len(v), dtype=np.int64).reshape(-1, 3)
    return v, f


def _detect_format(path: Path, format: str) -> str:
    if format != "auto":
        return format
    suffix = path.suffix.lower()
    if suffix == ".obj":
        return "obj"
    if suffix == ".stl":
        return "stl"
    raise ParseError(f"cannot infer format from {path.name!r}; pass format explicitly")


def load_mesh(path, format: str = "auto", force: bool = False) -> TriangleMesh:
    """Load an OBJ or STL file and validate it.

    STL vertices are welded at 1e-9; OBJ indexing is taken as authored.
    Non-watertight input raises :class:`NotWatertight` unless ``force``.
    """
    path = Path(path)
    fmt = _detect_format(path, format)
    try:
        data = path.read_bytes()
    except OSError as exc:
        raise IoError(str(exc)) from exc
    if fmt == "obj":
        v, f = _parse_obj(data.decode("utf-8", errors="replace"))
    elif fmt == "stl":
        v, f = _parse_stl(data)
        v, f = weld_vertices(v, f)
    else:
        raise ParseError(f"unknown format {fmt!r}")
    f = _drop_degenerate_faces(v, f)
    mesh = TriangleMesh(v, f)
    if not mesh.watertight and not force:
        report = validate(mesh)
        raise NotWatertight(
            f"{path.name}: {report.n_boundary_edges} boundary edges, "
            f"{report.n_nonmanifold_edges} non-manifold edges (use force to accept)"
        )
    return mesh


def save_mesh(mesh: TriangleMesh, path, format: str = "auto") -> None:
    """Write OBJ (ASCII) or binary STL; round-trips vertices within 1e-6."""
    path = Path(path)
    fmt = _detect_format(path, format)
    try:
        if fmt == "obj":
            lines = []
            for v in mesh.vertices:
                lines.append(f"v {v[0]:.17g} {v[1]:.17g} {v[2]:.17g}")
            for f in mesh.faces:
                lines.append(f"f {f[0] + 1} {f[1] + 1} {f[2] + 1}")
            path.write_text("\n".join(lines) + "\n")
        elif fmt == "stl":
            tris = mesh.triangles.astype("<f4")
            normals = np.cross(
                tris[:, 1] - tris[:, 0], tris[:, 2] - tris[:, 0]
            ).astype("<f4")
            norms = np.linalg.norm(normals, axis=1, keepdims=True)
            normals = np.divide(normals, norms, out=np.zeros_like(normals), where=norms > 0)
            buf = bytearray()
            buf += b"\0" * 80
            buf += struct.pack("<I", len(tris))
            record = np.zeros((len(tris), 50), dtype=np.uint8)
            payload = np.concatenate(
                [normals.reshape(-1, 3), tris.reshape(len(tris), 9)], axis=1
            ).astype("<f4")
            record[:, :48] = payload.view(np.uint8).reshape(len(tris), 48)
            buf += record.tobytes()
            path.write_bytes(bytes(buf))
        else:
            raise ParseError(f"unknown format {fmt!r}")
    except OSError as exc:
        raise IoError(str(exc)) from exc


def save_parts(meshes: list[TriangleMesh], directory, manifest_extra: dict | None = None,
               format: str = "obj", prefix: str = "part") -> Path:
    """Write one file per mesh plus a JSON manifest listing them."""
    directory = Path(directory)
    try:
        directory.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise IoError(str(exc)) from exc
    entries = []
    for i, m in enumerate(meshes):
        name = f"{prefix}_{i:05d}.{format}"
        save_mesh(m, directory / name, format)
        entries.append({"file": name, "n_vertices": len(m.vertices), "n_faces": len(m.faces)})
    manifest = {"files": entries}
    if manifest_extra:
        manifest.update(manifest_extra)
    manifest_path = directory / "manifest.json"
    try:
        manifest_path.write_text(json.dumps(manifest, indent=2))
    except OSError as exc:
        raise IoError(str(exc)) from exc
    return manifest_path
