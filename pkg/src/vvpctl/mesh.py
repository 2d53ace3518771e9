"""Conforming triangulations with uniform and newest-vertex refinement.

Cells are stored counterclockwise.  Every cell carries a refinement edge,
identified by the local index of the vertex opposite to it.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

DOMAINS = ("unit_square", "unit_triangle", "l_shape", "t_shape")

DOMAIN_AREA = {
    "unit_square": 1.0,
    "unit_triangle": 0.5,
    "l_shape": 3.0,
    "t_shape": 5.0,
}


@dataclass(frozen=True, eq=False)
class Mesh:
    """Immutable triangulation.

    vertices : (nv, 2) float array
    cells : (nc, 3) int array, counterclockwise
    refedge : (nc,) int array, local index of the vertex opposite the
        refinement edge
    parent_map : (nc,) int array or None, parent cell in the previous mesh
    """

    vertices: np.ndarray
    cells: np.ndarray
    refedge: np.ndarray
    parent_map: np.ndarray | None = None
    domain_id: str = field(default="custom")

    def __post_init__(self):
        for name in ("vertices", "cells", "refedge", "parent_map"):
            arr = getattr(self, name)
            if arr is not None:
                arr = np.array(arr)
                arr.setflags(write=False)
                object.__setattr__(self, name, arr)

    @property
    def nverts(self) -> int:
        return len(self.vertices)

    @property
    def ncells(self) -> int:
        return len(self.cells)

    @cached_property
    def signed_areas(self) -> np.ndarray:
        p = self.vertices[self.cells]
        d1 = p[:, 1] - p[:, 0]
        d2 = p[:, 2] - p[:, 0]
        return 0.5 * (d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0])

    @property
    def areas(self) -> np.ndarray:
        return np.abs(self.signed_areas)

    @cached_property
    def _topology(self):
        # local edge i is opposite local vertex i
        c = self.cells
        loc = np.stack([c[:, [1, 2]], c[:, [2, 0]], c[:, [0, 1]]], axis=1)
        flat = np.sort(loc.reshape(-1, 2), axis=1)
        edges, inv = np.unique(flat, axis=0, return_inverse=True)
        inv = inv.reshape(-1)
        cell_edges = inv.reshape(-1, 3)
        ne = len(edges)
        edge_cells = -np.ones((ne, 2), dtype=np.int64)
        edge_local = -np.ones((ne, 2), dtype=np.int64)
        owner = np.repeat(np.arange(self.ncells), 3)
        local = np.tile(np.arange(3), self.ncells)
        order = np.argsort(inv, kind="stable")
        inv_s = inv[order]
        first = np.ones(len(inv_s), dtype=bool)
        first[1:] = inv_s[1:] != inv_s[:-1]
        counts = np.bincount(inv, minlength=ne)
        if counts.max() > 2:
            raise ValueError("non-manifold triangulation: an edge has more than two cells")
        e0 = inv_s[first]
        edge_cells[e0, 0] = owner[order][first]
        edge_local[e0, 0] = local[order][first]
        second = ~first
        e1 = inv_s[second]
        edge_cells[e1, 1] = owner[order][second]
        edge_local[e1, 1] = local[order][second]
        return edges, cell_edges, edge_cells, edge_local

    @property
    def edges(self) -> np.ndarray:
        """(ne, 2) sorted vertex pairs."""
        return self._topology[0]

    @property
    def cell_edges(self) -> np.ndarray:
        """(nc, 3) edge index of local edge i (opposite vertex i)."""
        return self._topology[1]

    @property
    def edge_cells(self) -> np.ndarray:
        """(ne, 2) adjacent cells; second entry is -1 on the boundary."""
        return self._topology[2]

    @property
    def edge_local(self) -> np.ndarray:
        """(ne, 2) local edge index of the edge inside each adjacent cell."""
        return self._topology[3]

    @property
    def boundary_edges(self) -> np.ndarray:
        return self.edge_cells[:, 1] < 0

    @cached_property
    def edge_lengths(self) -> np.ndarray:
        p = self.vertices[self.edges]
        return np.linalg.norm(p[:, 1] - p[:, 0], axis=1)

    @cached_property
    def cell_diameters(self) -> np.ndarray:
        return self.edge_lengths[self.cell_edges].max(axis=1)

    @cached_property
    def centroids(self) -> np.ndarray:
        return self.vertices[self.cells].mean(axis=1)

    @cached_property
    def boundary_vertices(self) -> np.ndarray:
        flag = np.zeros(self.nverts, dtype=bool)
        flag[self.edges[self.boundary_edges].ravel()] = True
        return flag

    def min_angle(self) -> float:
        p = self.vertices[self.cells]
        angles = []
        for i in range(3):
            a = p[:, (i + 1) % 3] - p[:, i]
            b = p[:, (i + 2) % 3] - p[:, i]
            cosang = (a * b).sum(1) / (np.linalg.norm(a, axis=1) * np.linalg.norm(b, axis=1))
            angles.append(np.arccos(np.clip(cosang, -1.0, 1.0)))
        return float(np.min(angles))

    def dump(self) -> str:
        lines = ["vvpmesh 1"]
        lines += [f"v {x!r} {y!r}" for x, y in self.vertices.tolist()]
        lines += [f"c {a} {b} {c} {r}" for (a, b, c), r in zip(self.cells.tolist(), self.refedge.tolist())]
        bnd = self.boundary_edges.tolist()
        lines += [f"e {a} {b} {int(f)}" for (a, b), f in zip(self.edges.tolist(), bnd)]
        return "\n".join(lines) + "\n"


def mesh_size(m: Mesh) -> float:
    """Largest cell diameter (longest edge)."""
    return float(m.cell_diameters.max())


def _longest_edge_local(vertices, cells):
    p = vertices[cells]
    lens = np.stack([
        np.linalg.norm(p[:, 2] - p[:, 1], axis=1),
        np.linalg.norm(p[:, 0] - p[:, 2], axis=1),
        np.linalg.norm(p[:, 1] - p[:, 0], axis=1),
    ], axis=1)
    return np.argmax(lens, axis=1)


def _grid(x0, y0, nx, ny, hstep, keep, diagonal="/"):
    """Square grid of cells of side hstep; keep(i, j, cx, cy) selects squares."""
    idx = {}
    verts = []
    cells = []

    def vid(i, j):
        key = (i, j)
        if key not in idx:
            idx[key] = len(verts)
            verts.append((x0 + i * hstep, y0 + j * hstep))
        return idx[key]

    for j in range(ny):
        for i in range(nx):
            kind = keep(i, j, x0 + (i + 0.5) * hstep, y0 + (j + 0.5) * hstep)
            if not kind:
                continue
            a, b, c, d = (i, j), (i + 1, j), (i + 1, j + 1), (i, j + 1)
            if diagonal == "/":
                tris = [(a, b, c), (a, c, d)]
            else:
                tris = [(a, b, d), (b, c, d)]
            if kind == "lower":
                tris = tris[:1]
            for t in tris:
                cells.append([vid(*v) for v in t])
    return np.array(verts, dtype=float), np.array(cells, dtype=np.int64)


def generate(domain_id: str, n: int) -> Mesh:
    """Structured mesh of a named domain.

    Level n uses squares of side 2**(1-n) of the domain's unit length, so
    unit_square at level n is a 2**(n-1) by 2**(n-1) grid of split squares.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if domain_id not in DOMAINS:
        raise ValueError(f"unknown domain {domain_id!r}")
    m = 2 ** (n - 1)
    hs = 1.0 / m
    if domain_id == "unit_square":
        v, c = _grid(0.0, 0.0, m, m, hs, lambda i, j, x, y: True)
    elif domain_id == "unit_triangle":
        def keep(i, j, x, y):
            if i + j < m - 1:
                return True
            if i + j == m - 1:
                return "lower"
            return False
        v, c = _grid(0.0, 0.0, m, m, hs, keep, diagonal="\\")
    elif domain_id == "l_shape":
        v, c = _grid(-1.0, -1.0, 2 * m, 2 * m, hs, lambda i, j, x, y: not (x > 0 and y > 0))
    else:
        def keep(i, j, x, y):
            return (y > 0) or (-0.5 < x < 0.5)
        v, c = _grid(-1.5, -2.0, 3 * m, 3 * m, hs, keep)
    return Mesh(v, c, _longest_edge_local(v, c), None, domain_id)


def uniform_refine(m: Mesh) -> Mesh:
    """Red refinement: every cell into four similar cells."""
    mids = 0.5 * (m.vertices[m.edges[:, 0]] + m.vertices[m.edges[:, 1]])
    verts = np.vstack([m.vertices, mids])
    ce = m.cell_edges + m.nverts  # midpoint of edge opposite vertex i
    v0, v1, v2 = m.cells.T
    m0, m1, m2 = ce.T
    children = np.stack([
        np.stack([v0, m2, m1], 1),
        np.stack([m2, v1, m0], 1),
        np.stack([m1, m0, v2], 1),
        np.stack([m0, m1, m2], 1),
    ], axis=1)
    # corner children keep the parent's local numbering, so the edge
    # parallel to the parent's refinement edge keeps the same local index;
    # the middle child (m0, m1, m2) is the parent rotated by a half turn,
    # whose edge opposite m_i is parallel to the parent's edge i
    r = m.refedge
    refs = np.stack([r, r, r, r], axis=1)
    cells = children.reshape(-1, 3)
    parent = np.repeat(np.arange(m.ncells), 4)
    return Mesh(verts, cells, refs.reshape(-1), parent, m.domain_id)


def bisect_refine(m: Mesh, marked) -> Mesh:
    """Newest-vertex bisection of the marked cells plus conforming closure."""
    marked = np.unique(np.asarray(list(marked), dtype=np.int64))
    if marked.size == 0:
        return m
    cell_edges = m.cell_edges
    ref_edge = cell_edges[np.arange(m.ncells), m.refedge]
    flag = np.zeros(len(m.edges), dtype=bool)
    flag[ref_edge[marked]] = True
    # closure: any cell with a flagged edge must also split its refinement edge
    while True:
        has = flag[cell_edges].any(axis=1)
        need = has & ~flag[ref_edge]
        if not need.any():
            break
        flag[ref_edge[need]] = True

    edge_ids = np.flatnonzero(flag)
    mid_index = -np.ones(len(m.edges), dtype=np.int64)
    mid_index[edge_ids] = m.nverts + np.arange(len(edge_ids))
    mids = 0.5 * (m.vertices[m.edges[edge_ids, 0]] + m.vertices[m.edges[edge_ids, 1]])
    verts = np.vstack([m.vertices, mids])

    edge_lookup = {}
    for e, (a, b) in enumerate(m.edges.tolist()):
        if flag[e]:
            edge_lookup[(a, b)] = int(mid_index[e])

    def midpoint(a, b):
        return edge_lookup.get((a, b) if a < b else (b, a), -1)

    out_cells = []
    out_ref = []
    out_parent = []

    def split(tri, r, parent):
        # rotate so the newest vertex (opposite the refinement edge) is first
        a, b, c = tri[r], tri[(r + 1) % 3], tri[(r + 2) % 3]
        mid = midpoint(b, c)
        if mid < 0:
            out_cells.append(tri)
            out_ref.append(r)
            out_parent.append(parent)
            return
        # children (a, b, mid) and (a, mid, c): newest vertex is mid
        split((a, b, mid), 2, parent)
        split((a, mid, c), 1, parent)

    cells = m.cells.tolist()
    refs = m.refedge.tolist()
    for k in range(m.ncells):
        split(tuple(cells[k]), refs[k], k)
    return Mesh(
        verts,
        np.array(out_cells, dtype=np.int64),
        np.array(out_ref, dtype=np.int64),
        np.array(out_parent, dtype=np.int64),
        m.domain_id,
    )
