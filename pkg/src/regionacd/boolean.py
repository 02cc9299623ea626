"""Mesh-box booleans built from capped plane clips.

``clip_mesh_by_plane`` keeps one side of a plane and closes the cross
section with ear-clipped cap polygons (multiple loops and holes supported).
Box intersection is six successive inside-clips; box difference peels the
complement of the box into watertight pieces.
"""

from __future__ import annotations

import numpy as np

from ._triangulate import polygon_area, point_in_polygon, triangulate_simple, triangulate_with_holes
from .convex import ConvexPart, Plane, fully_inside_box, split_by_plane
from .errors import CapFailure
from .mesh import Aabb, TriangleMesh, combine_meshes, mesh_aabb
from .merging import merge_neighbors

ON_PLANE_TOL = 1e-9   # |n.x - d| below this counts as inside, avoiding slivers


def box_planes(box: Aabb) -> list[Plane]:
    """Six outward planes of a box, in the fixed order -x,+x,-y,+y,-z,+z."""
    planes = []
    for axis in range(3):
        planes.append(Plane.axis(axis, box.min[axis], positive=False))
        planes.append(Plane.axis(axis, box.max[axis], positive=True))
    return planes


def _connected_face_components(faces: np.ndarray) -> np.ndarray:
    """Label faces by edge-connected component (union-find)."""
    parent = np.arange(len(faces))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    edge_owner: dict[tuple[int, int], int] = {}
    for fi, (a, b, c) in enumerate(faces):
        for u, v in ((a, b), (b, c), (c, a)):
            key = (u, v) if u < v else (v, u)
            if key in edge_owner:
                ra, rb = find(edge_owner[key]), find(fi)
                if ra != rb:
                    parent[rb] = ra
            else:
                edge_owner[key] = fi
    return np.array([find(i) for i in range(len(faces))])


def _prune_flat_components(vertices: np.ndarray, faces: np.ndarray) -> np.ndarray:
    """Drop connected components whose enclosed volume is negligible.

    Clipping a surface that touches the plane face-on leaves closed
    zero-volume slabs; they are artifacts, not geometry.
    """
    if len(faces) == 0:
        return faces
    labels = _connected_face_components(faces)
    t = vertices[faces]
    tet = np.einsum("ij,ij->i", t[:, 0], np.cross(t[:, 1], t[:, 2])) / 6.0
    diag = float(np.linalg.norm(vertices.max(axis=0) - vertices.min(axis=0)))
    tol = 1e-10 * max(diag, 1e-30) ** 3
    keep = np.ones(len(faces), dtype=bool)
    for lab in np.unique(labels):
        mask = labels == lab
        if abs(tet[mask].sum()) < tol:
            keep[mask] = False
    return faces[keep]


def _plane_basis(normal: np.ndarray):
    axis = int(np.argmin(np.abs(normal)))
    u = np.zeros(3)
    u[axis] = 1.0
    u = np.cross(normal, u)
    u /= np.linalg.norm(u)
    v = np.cross(normal, u)
    return u, v


def _chain_loops(boundary_edges: list[tuple[int, int]]) -> list[list[int]]:
    succ: dict[int, int] = {}
    for a, b in boundary_edges:
        if a in succ:
            raise CapFailure(f"non-manifold section: vertex {a} has two outgoing rim edges")
        succ[a] = b
    loops = []
    remaining = dict(succ)
    while remaining:
        start, cur = next(iter(remaining.items()))
        loop = [start]
        nxt = cur
        del remaining[start]
        while nxt != start:
            loop.append(nxt)
            if nxt not in remaining:
                raise CapFailure("open section loop; input mesh not watertight?")
            nxt2 = remaining.pop(nxt)
            nxt = nxt2
        loops.append(loop)
    return loops


def _cap_loops(vertices: np.ndarray, loops: list[list[int]], normal: np.ndarray):
    """Triangulate cap loops so cap normals equal ``normal``."""
    u, v = _plane_basis(normal)
    # rim edges of the kept surface run clockwise seen from +normal; the cap
    # itself must traverse them reversed
    loops = [loop[::-1] for loop in loops]
    loops_2d = [np.column_stack([vertices[loop] @ u, vertices[loop] @ v]) for loop in loops]
    areas = [polygon_area(p) for p in loops_2d]
    outers = [i for i, a in enumerate(areas) if a > 0]
    holes = [i for i, a in enumerate(areas) if a <= 0]
    groups: dict[int, list[int]] = {i: [] for i in outers}
    for h in holes:
        candidates = [
            i for i in outers if point_in_polygon(loops_2d[h][0], loops_2d[i])
        ]
        if not candidates:
            raise CapFailure("cap hole not contained in any outer loop")
        owner = min(candidates, key=lambda i: areas[i])
        groups[owner].append(h)
    triangles = []
    for i, hole_ids in groups.items():
        if hole_ids:
            tris = triangulate_with_holes(
                loops_2d[i], loops[i], [(loops_2d[h], loops[h]) for h in hole_ids]
            )
        else:
            tris = triangulate_simple(loops_2d[i], loops[i])
        triangles.extend(tris)
    return triangles


def simplify_coplanar_patches(mesh: TriangleMesh) -> TriangleMesh:
    """Retriangulate connected coplanar face patches of a watertight mesh.

    Repeated plane clips subdivide earlier cap faces, so planar regions
    accumulate interior vertices and sliver triangles that later clips
    multiply further.  This pass rebuilds each planar patch from its
    boundary loops alone, which drops interior vertices while keeping every
    boundary vertex (so the result still welds to the neighbouring faces).

    Opportunistic: a patch that cannot be rebuilt cleanly is kept verbatim,
    and the original mesh is returned whenever the rebuilt mesh is not
    watertight or changes the enclosed volume.
    """
    faces = mesh.faces
    if len(faces) < 64:
        return mesh
    vertices = mesh.vertices
    tri = vertices[faces]
    normal = np.cross(tri[:, 1] - tri[:, 0], tri[:, 2] - tri[:, 0])
    norms = np.linalg.norm(normal, axis=1)
    scale = float(np.abs(vertices).max()) or 1.0
    planar = norms > 1e-12 * scale * scale   # degenerate faces stay singletons
    unit = normal / np.maximum(norms, 1e-300)[:, None]
    offset = np.einsum("ij,ij->i", unit, tri[:, 0])

    parent = np.arange(len(faces))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    edge_owner: dict[tuple[int, int], int] = {}
    for fi, (a, b, c) in enumerate(faces):
        for u, v in ((a, b), (b, c), (c, a)):
            key = (u, v) if u < v else (v, u)
            fj = edge_owner.pop(key, None)
            if fj is None:
                edge_owner[key] = fi
            elif (planar[fi] and planar[fj]
                  and unit[fi] @ unit[fj] > 1.0 - 1e-10
                  and abs(offset[fi] - offset[fj]) < 1e-9 * scale):
                ri, rj = find(fi), find(fj)
                if ri != rj:
                    parent[rj] = ri
    groups: dict[int, list[int]] = {}
    for fi in range(len(faces)):
        groups.setdefault(find(fi), []).append(fi)

    # vertices whose incident faces span exactly two planar patches sit on a
    # crease; the collinear ones among them are clip subdivisions that both
    # patches can drop together without breaking the weld
    vertex_patches: dict[int, set[int]] = {}
    for fi, tri_f in enumerate(faces):
        root = find(fi)
        for vv in tri_f:
            vertex_patches.setdefault(int(vv), set()).add(root)

    patch_loops: dict[int, list[list[int]]] = {}
    bad_patches: set[int] = set()
    for root, members in groups.items():
        if len(members) == 1:
            continue
        try:
            directed = set()
            for a, b, c in faces[members]:
                directed.update(((int(a), int(b)), (int(b), int(c)),
                                 (int(c), int(a))))
            boundary = [(a, b) for a, b in directed if (b, a) not in directed]
            patch_loops[root] = _chain_loops(boundary)
        except CapFailure:
            bad_patches.add(root)

    # neighbour pairs along each patch boundary, to test crease collinearity
    neighbors: dict[int, list[tuple[int, int]]] = {}
    for loops in patch_loops.values():
        for loop in loops:
            ln = len(loop)
            for i, vv in enumerate(loop):
                neighbors.setdefault(vv, []).append(
                    (loop[i - 1], loop[(i + 1) % ln]))

    area_tol = 1e-12 * scale * scale
    removable: set[int] = set()
    for vv, patches in vertex_patches.items():
        if len(patches) != 2 or patches & bad_patches:
            continue
        if any(p not in patch_loops for p in patches):
            continue
        pairs = neighbors.get(vv, [])
        if len(pairs) != 2:
            continue
        # the two patches must walk the same crease in opposite directions
        if set(pairs[0]) != set(pairs[1]):
            continue
        pa = vertices[pairs[0][0]] - vertices[vv]
        pb = vertices[pairs[0][1]] - vertices[vv]
        if np.linalg.norm(np.cross(pa, pb)) > area_tol:
            continue
        removable.add(vv)
    if not removable:
        return mesh

    new_faces: list[tuple[int, int, int]] = []
    changed = False
    for root, members in groups.items():
        patch = faces[members]
        loops = patch_loops.get(root)
        reduced = None
        if loops is not None:
            reduced = [[vv for vv in loop if vv not in removable]
                       for loop in loops]
            if any(len(lp) < 3 for lp in reduced):
                return mesh   # neighbours would still drop the shared vertex
            if sum(map(len, reduced)) == sum(map(len, loops)):
                reduced = None
        if reduced is None:
            new_faces.extend(map(tuple, patch))
            continue
        try:
            # project onto the patch plane; boundary runs interior-left, so
            # the outer loop is CCW and holes are CW as the triangulator wants
            pn = unit[members[int(np.argmax(norms[members]))]]
            u, v = _plane_basis(pn)
            loops_2d = [np.column_stack([vertices[lp] @ u, vertices[lp] @ v])
                        for lp in reduced]
            areas = [polygon_area(p) for p in loops_2d]
            outers = [i for i, a in enumerate(areas) if a > 0]
            if len(outers) != 1:
                raise CapFailure("patch boundary has no unique outer loop")
            outer = outers[0]
            holes = [(loops_2d[i], reduced[i])
                     for i in range(len(reduced)) if i != outer]
            if holes:
                tris = triangulate_with_holes(loops_2d[outer], reduced[outer],
                                              holes)
            else:
                tris = triangulate_simple(loops_2d[outer], reduced[outer])
        except CapFailure:
            # a failed patch must keep its crease subdivisions, and so must
            # the patch on the other side: give up on the whole mesh
            return mesh
        new_faces.extend(tris)
        changed = True
    if not changed:
        return mesh

    out = np.array(new_faces, dtype=np.int64)
    used = np.unique(out)
    remap = np.full(len(vertices), -1, dtype=np.int64)
    remap[used] = np.arange(len(used))
    simplified = TriangleMesh(vertices[used], remap[out])
    if not simplified.watertight:
        return mesh
    t = simplified.triangles
    new_vol = float(np.einsum("ij,ij->i", t[:, 0],
                              np.cross(t[:, 1], t[:, 2])).sum() / 6.0)
    t = mesh.triangles
    old_vol = float(np.einsum("ij,ij->i", t[:, 0],
                              np.cross(t[:, 1], t[:, 2])).sum() / 6.0)
    if abs(new_vol - old_vol) > 1e-9 * max(abs(old_vol), scale ** 3 * 1e-9):
        return mesh
    return simplified


def clip_mesh_by_plane(mesh: TriangleMesh, plane: Plane, keep: str = "inside"):
    """Keep one side of a plane and cap the cross section; None if empty.

    Vertices within :data:`ON_PLANE_TOL` of the plane are classified inside.
    The result is watertight when the input is.
    """
    if keep == "outside":
        return clip_mesh_by_plane(mesh, plane.flipped(), "inside")
    if keep != "inside":
        raise ValueError(f"keep must be 'inside' or 'outside', got {keep!r}")
    s = plane.signed_distance(mesh.vertices).ravel()
    cls = np.zeros(len(s), dtype=np.int8)
    cls[s > ON_PLANE_TOL] = 1
    cls[s < -ON_PLANE_TOL] = -1
    if not np.any(cls == 1):
        return mesh  # nothing clipped away
    if not np.any(cls == -1):
        return None  # at most a zero-volume sheet on the plane

    n_base = len(mesh.vertices)
    cut_cache: dict[tuple[int, int], int] = {}
    extra_points: list[np.ndarray] = []

    def cut_vertex(a: int, b: int) -> int:
        key = (a, b) if a < b else (b, a)
        idx = cut_cache.get(key)
        if idx is None:
            t = s[a] / (s[a] - s[b])
            p = mesh.vertices[a] + t * (mesh.vertices[b] - mesh.vertices[a])
            idx = n_base + len(extra_points)
            extra_points.append(p)
            cut_cache[key] = idx
        return idx

    face_cls = cls[mesh.faces]
    kept_whole = np.all(face_cls <= 0, axis=1) & ~np.all(face_cls == 0, axis=1)
    straddling = np.any(face_cls == -1, axis=1) & np.any(face_cls == 1, axis=1)

    out_faces: list[tuple[int, int, int]] = [
        tuple(tri) for tri in mesh.faces[kept_whole]
    ]
    for tri in mesh.faces[straddling]:
        poly: list[int] = []
        for k in range(3):
            a, b = int(tri[k]), int(tri[(k + 1) % 3])
            if cls[a] <= 0:
                poly.append(a)
            if cls[a] * cls[b] == -1:
                poly.append(cut_vertex(a, b))
        if len(poly) < 3:
            continue
        for k in range(1, len(poly) - 1):
            out_faces.append((poly[0], poly[k], poly[k + 1]))

    if not out_faces:
        return None
    all_vertices = np.vstack([mesh.vertices] + [np.array(extra_points).reshape(-1, 3)])
    faces = np.array(out_faces, dtype=np.int64)

    # unmatched directed edges form the section rim
    n_all = len(all_vertices)
    directed = np.concatenate([faces[:, [0, 1]], faces[:, [1, 2]], faces[:, [2, 0]]])
    codes = directed[:, 0] * n_all + directed[:, 1]
    reverse = directed[:, 1] * n_all + directed[:, 0]
    unmatched = ~np.isin(codes, reverse)
    if len(np.unique(codes[unmatched])) != int(unmatched.sum()):
        raise CapFailure("duplicate directed edge in clipped surface")
    boundary = [(int(a), int(b)) for a, b in directed[unmatched]]
    if boundary:
        rim_dev = np.abs(plane.signed_distance(all_vertices[[a for a, _ in boundary]]))
        if rim_dev.max() > 10 * ON_PLANE_TOL:
            raise CapFailure("section rim is not on the clip plane; input not watertight?")
        loops = _chain_loops(boundary)
        cap = _cap_loops(all_vertices, loops, plane.normal)
        faces = np.vstack([faces, np.array(cap, dtype=np.int64)])

    faces = _prune_flat_components(all_vertices, faces)
    if len(faces) == 0:
        return None
    used = np.unique(faces)
    remap = np.full(len(all_vertices), -1, dtype=np.int64)
    remap[used] = np.arange(len(used))
    return TriangleMesh(all_vertices[used], remap[faces])


def boolean_intersect_box(mesh: TriangleMesh, box: Aabb):
    """Watertight mesh ∩ box via six successive inside-clips; None if empty."""
    if not mesh_aabb(mesh).overlaps(box):
        return None
    result = mesh
    for plane in box_planes(box):
        result = clip_mesh_by_plane(result, plane, "inside")
        if result is None:
            return None
    return result


def _peel_axis_order(mesh: TriangleMesh, box: Aabb) -> list[int]:
    """Axis order that cuts the least: fewest vertices strictly inside each slab."""
    counts = []
    for axis in range(3):
        x = mesh.vertices[:, axis]
        counts.append(int(np.count_nonzero(
            (x > box.min[axis] + ON_PLANE_TOL) & (x < box.max[axis] - ON_PLANE_TOL)
        )))
    return sorted(range(3), key=lambda a: counts[a])


def _peel_box(mesh: TriangleMesh, box: Aabb) -> list[TriangleMesh]:
    """Peel the part of ``mesh`` outside ``box`` into watertight pieces."""
    pieces: list[TriangleMesh] = []
    core = mesh
    for axis in _peel_axis_order(mesh, box):
        if core is None:
            break
        low_plane = Plane.axis(axis, box.min[axis], positive=True)
        low = clip_mesh_by_plane(core, low_plane, "inside")
        core = clip_mesh_by_plane(core, low_plane, "outside")
        if low is not None:
            pieces.append(low)
        if core is None:
            break
        high_plane = Plane.axis(axis, box.max[axis], positive=True)
        high = clip_mesh_by_plane(core, high_plane, "outside")
        core = clip_mesh_by_plane(core, high_plane, "inside")
        if high is not None:
            pieces.append(high)
    # core is now mesh ∩ box: discarded
    return pieces


def boolean_difference_boxes(mesh: TriangleMesh, boxes: list[Aabb]):
    """Mesh minus all box interiors, as a watertight multi-piece mesh.

    Each box is peeled off by six plane clips; the kept complement pieces
    keep their cap walls, so the result can contain several closed
    components that share cut planes.  Pieces whose bounds miss a box pass
    through untouched.  None when nothing remains.
    """
    pieces = [mesh]
    for box in boxes:
        next_pieces: list[TriangleMesh] = []
        for piece in pieces:
            if not mesh_aabb(piece).overlaps(box):
                next_pieces.append(piece)
            else:
                next_pieces.extend(_peel_box(piece, box))
        pieces = [p for p in next_pieces if len(p.faces) > 0]
    if not pieces:
        return None
    return combine_meshes(pieces)


def bool_difference_convex(parts: list[ConvexPart], box: Aabb,
                           slack: float = ON_PLANE_TOL) -> list[ConvexPart]:
    """Subtract a box from convex parts while keeping every output convex.

    Parts disjoint from the box pass through unchanged (same objects);
    intersecting parts are split by the six box planes, pieces fully inside
    the box are dropped, and the surviving pieces are re-merged at tau = 0.
    """
    result: list[ConvexPart] = []
    for part in parts:
        if not part.aabb.interior_overlaps(box, tol=slack):
            result.append(part)
            continue
        pieces = [part]
        for plane in box_planes(box):
            next_pieces: list[ConvexPart] = []
            for piece in pieces:
                if not piece.aabb.interior_overlaps(box, tol=slack):
                    next_pieces.append(piece)
                    continue
                inside, outside = split_by_plane(piece, plane)
                if inside is not None:
                    next_pieces.append(inside)
                if outside is not None:
                    next_pieces.append(outside)
            pieces = [p for p in next_pieces if not fully_inside_box(p, box, slack)]
        merged = merge_neighbors(pieces, tau=0.0)
        for piece in merged:
            piece.provenance = part.provenance
            if piece.source_volume is None:
                piece.source_volume = piece.volume
        result.extend(merged)
    return result
