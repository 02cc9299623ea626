"""Synthetic watertight fixtures used by tests, benchmarks and docs.

All fixtures are built from explicit vertex/face lists or from extruded 2D
polygons, so their volumes and feature dimensions are known analytically.
"""

from __future__ import annotations

import numpy as np

from ._triangulate import polygon_area, triangulate_simple, triangulate_with_holes
from .mesh import TriangleMesh, combine_meshes


def box_mesh(lo=(0.0, 0.0, 0.0), hi=(1.0, 1.0, 1.0)) -> TriangleMesh:
    """Axis-aligned box as 8 vertices / 12 triangles, outward CCW."""
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    x0, y0, z0 = lo
    x1, y1, z1 = hi
    v = np.array(
        [
            [x0, y0, z0], [x1, y0, z0], [x1, y1, z0], [x0, y1, z0],
            [x0, y0, z1], [x1, y0, z1], [x1, y1, z1], [x0, y1, z1],
        ]
    )
    f = np.array(
        [
            [0, 2, 1], [0, 3, 2],  # bottom (-z)
            [4, 5, 6], [4, 6, 7],  # top (+z)
            [0, 1, 5], [0, 5, 4],  # front (-y)
            [2, 3, 7], [2, 7, 6],  # back (+y)
            [1, 2, 6], [1, 6, 5],  # right (+x)
            [3, 0, 4], [3, 4, 7],  # left (-x)
        ],
        dtype=np.int64,
    )
    return TriangleMesh(v, f)


def extrude_polygon(outer, z0: float, z1: float, holes=()) -> TriangleMesh:
    """Extrude a CCW polygon (optionally with CW holes) along +z."""
    outer = np.asarray(outer, dtype=float)
    if polygon_area(outer) < 0:
        outer = outer[::-1]
    hole_list = []
    for h in holes:
        h = np.asarray(h, dtype=float)
        if polygon_area(h) > 0:
            h = h[::-1]
        hole_list.append(h)

    loops = [outer] + hole_list
    counts = [len(p) for p in loops]
    offsets = np.concatenate([[0], np.cumsum(counts)])
    n2d = int(offsets[-1])
    pts2d = np.vstack(loops)
    bottom = np.column_stack([pts2d, np.full(n2d, z0)])
    top = np.column_stack([pts2d, np.full(n2d, z1)])
    vertices = np.vstack([bottom, top])

    if hole_list:
        cap = triangulate_with_holes(
            outer,
            list(range(len(outer))),
            [
                (hole_list[i], list(range(offsets[i + 1], offsets[i + 2])))
                for i in range(len(hole_list))
            ],
        )
    else:
        cap = triangulate_simple(outer)
    faces = []
    for a, b, c in cap:
        faces.append([n2d + a, n2d + b, n2d + c])  # top, +z
        faces.append([c, b, a])  # bottom, -z
    for li, loop in enumerate(loops):
        base = offsets[li]
        m = len(loop)
        for i in range(m):
            b0 = base + i
            b1 = base + (i + 1) % m
            faces.append([b0, b1, n2d + b1])
            faces.append([b0, n2d + b1, n2d + b0])
    return TriangleMesh(vertices, np.array(faces, dtype=np.int64))


def permute_axes(mesh: TriangleMesh, perm: tuple[int, int, int]) -> TriangleMesh:
    """Reorder coordinate axes; flips face winding when the perm is odd."""
    v = mesh.vertices[:, list(perm)]
    p = list(perm)
    even = (p[0], p[1], p[2]) in {(0, 1, 2), (1, 2, 0), (2, 0, 1)}
    f = mesh.faces if even else mesh.faces[:, ::-1]
    return TriangleMesh(v, f)


def translate(mesh: TriangleMesh, offset) -> TriangleMesh:
    return TriangleMesh(mesh.vertices + np.asarray(offset, dtype=float), mesh.faces)


def l_prism() -> TriangleMesh:
    """2x2x1 block minus a 1x1x1 corner block; volume 3, hull volume 3.5."""
    poly = np.array(
        [[0, 0], [2, 0], [2, 1], [1, 1], [1, 2], [0, 2]], dtype=float
    )
    return extrude_polygon(poly, 0.0, 1.0)


def dimpled_cube(depth: float = 0.2, inner: float = 0.25) -> TriangleMesh:
    """Unit cube with a square pyramidal dimple of the given depth in the top."""
    a, b = inner, 1.0 - inner
    v = np.array(
        [
            [0, 0, 0], [1, 0, 0], [1, 1, 0], [0, 1, 0],      # bottom ring
            [0, 0, 1], [1, 0, 1], [1, 1, 1], [0, 1, 1],      # top outer ring
            [a, a, 1], [b, a, 1], [b, b, 1], [a, b, 1],      # top inner ring
            [0.5, 0.5, 1.0 - depth],                          # dimple apex
        ]
    )
    faces = [
        [0, 2, 1], [0, 3, 2],                                 # bottom
        [0, 1, 5], [0, 5, 4], [2, 3, 7], [2, 7, 6],           # -y / +y walls
        [1, 2, 6], [1, 6, 5], [3, 0, 4], [3, 4, 7],           # +x / -x walls
    ]
    outer = [4, 5, 6, 7]
    inner_ring = [8, 9, 10, 11]
    for i in range(4):
        o0, o1 = outer[i], outer[(i + 1) % 4]
        i0, i1 = inner_ring[i], inner_ring[(i + 1) % 4]
        faces += [[o0, o1, i1], [o0, i1, i0]]                 # top annulus
        faces += [[i0, i1, 12]]                               # dimple wall
    return TriangleMesh(v, np.array(faces, dtype=np.int64))


def dumbbell(neck: float = 0.2) -> TriangleMesh:
    """Two unit-cube lobes joined by a thin square neck along x."""
    lo = 0.5 - neck / 2
    hi = 0.5 + neck / 2
    poly = np.array(
        [
            [0, 0], [1, 0], [1, lo], [2, lo], [2, 0], [3, 0],
            [3, 1], [2, 1], [2, hi], [1, hi], [1, 1], [0, 1],
        ],
        dtype=float,
    )
    profile = extrude_polygon(poly, 0.0, 1.0)   # footprint in x-y, z in [0,1]
    return profile


def square_torus() -> TriangleMesh:
    """Square-section torus (extruded annulus): outer 2x2, hole 1x1 square."""
    outer = np.array([[-1, -1], [1, -1], [1, 1], [-1, 1]], dtype=float)
    hole = np.array([[-0.5, -0.5], [0.5, -0.5], [0.5, 0.5], [-0.5, 0.5]], dtype=float)
    return extrude_polygon(outer, 0.0, 0.5, holes=[hole])


def shell_with_cavity() -> TriangleMesh:
    """Unit cube with an empty cubic cavity (inverted inner box)."""
    outer = box_mesh((0, 0, 0), (1, 1, 1))
    inner = box_mesh((0.25, 0.25, 0.25), (0.75, 0.75, 0.75))
    inner_flipped = TriangleMesh(inner.vertices, inner.faces[:, ::-1])
    return combine_meshes([outer, inner_flipped])


def icosphere(subdivisions: int = 3, radius: float = 1.0) -> TriangleMesh:
    """Subdivided icosahedron with vertices projected onto the sphere."""
    t = (1.0 + np.sqrt(5.0)) / 2.0
    v = np.array(
        [
            [-1, t, 0], [1, t, 0], [-1, -t, 0], [1, -t, 0],
            [0, -1, t], [0, 1, t], [0, -1, -t], [0, 1, -t],
            [t, 0, -1], [t, 0, 1], [-t, 0, -1], [-t, 0, 1],
        ],
        dtype=float,
    )
    v /= np.linalg.norm(v[0])
    f = np.array(
        [
            [0, 11, 5], [0, 5, 1], [0, 1, 7], [0, 7, 10], [0, 10, 11],
            [1, 5, 9], [5, 11, 4], [11, 10, 2], [10, 7, 6], [7, 1, 8],
            [3, 9, 4], [3, 4, 2], [3, 2, 6], [3, 6, 8], [3, 8, 9],
            [4, 9, 5], [2, 4, 11], [6, 2, 10], [8, 6, 7], [9, 8, 1],
        ],
        dtype=np.int64,
    )
    for _ in range(subdivisions):
        edge_mid: dict[tuple[int, int], int] = {}
        verts = list(v)

        def midpoint(i, j):
            key = (min(i, j), max(i, j))
            if key not in edge_mid:
                m = verts[i] + verts[j]
                m /= np.linalg.norm(m)
                edge_mid[key] = len(verts)
                verts.append(m)
            return edge_mid[key]

        new_faces = []
        for a, b, c in f:
            ab, bc, ca = midpoint(a, b), midpoint(b, c), midpoint(c, a)
            new_faces += [[a, ab, ca], [b, bc, ab], [c, ca, bc], [ab, bc, ca]]
        v = np.array(verts)
        f = np.array(new_faces, dtype=np.int64)
    return TriangleMesh(v * radius, f)


def _u_block(width: float, depth: float, height: float, slot_w: float,
             slot_d: float) -> TriangleMesh:
    """Block with a slot cut down from the top: U-shaped x-z profile, y extent."""
    w2, s2 = width / 2, slot_w / 2
    profile = np.array(
        [
            [-w2, 0], [w2, 0], [w2, height], [s2, height],
            [s2, height - slot_d], [-s2, height - slot_d], [-s2, height], [-w2, height],
        ],
        dtype=float,
    )
    prism = extrude_polygon(profile, -depth / 2, depth / 2)  # built in (x, z, y)
    return permute_axes(prism, (0, 2, 1))


def corrugated_cylinder(radius: float = 1.0, amplitude: float = 0.03,
                        lobes: int = 16, segments: int = 128,
                        z0: float = 0.0, z1: float = 1.0) -> TriangleMesh:
    theta = np.linspace(0.0, 2 * np.pi, segments, endpoint=False)
    r = radius + amplitude * np.sin(lobes * theta)
    poly = np.column_stack([r * np.cos(theta), r * np.sin(theta)])
    return extrude_polygon(poly, z0, z1)


def motor_like() -> TriangleMesh:
    """Corrugated cylinder body with a slotted lifting eye on top and four
    slotted bosses underneath.  Components touch face-to-face only, so the
    combined mesh is watertight with disjoint interiors."""
    body = corrugated_cylinder()
    eye = translate(_u_block(0.6, 0.3, 0.35, 0.24, 0.2), (0, 0, 1.0))
    parts = [body, eye]
    for sx in (-1, 1):
        for sy in (-1, 1):
            boss = _u_block(0.3, 0.3, 0.25, 0.12, 0.15)
            # slot opens downward: mirror in z, then sit the block under z=0
            boss = TriangleMesh(boss.vertices * np.array([1.0, 1.0, -1.0]),
                                boss.faces[:, ::-1])
            parts.append(translate(boss, (0.5 * sx, 0.5 * sy, 0.0)))
    return combine_meshes(parts)


def motor_like_regions():
    """Default feature regions for the motor-like fixture: eye + four bosses."""
    from .mesh import Aabb

    regions = [("eye", Aabb((-0.35, -0.2, 1.0), (0.35, 0.2, 1.4)))]
    for i, (sx, sy) in enumerate([(-1, -1), (-1, 1), (1, -1), (1, 1)]):
        lo = np.array([0.5 * sx - 0.2, 0.5 * sy - 0.2, -0.3])
        hi = np.array([0.5 * sx + 0.2, 0.5 * sy + 0.2, 0.0])
        regions.append((f"boss{i}", Aabb(lo, hi)))
    return regions
