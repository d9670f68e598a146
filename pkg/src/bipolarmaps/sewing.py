"""Sewing construction of marked bipolar maps and its inverse.

State of a marked map during the construction::

    west boundary   west_below (missing edges) | start | west_top ... top
    east boundary   east_chain: bottom ... active (real edges)
                    above: vertices over the active vertex joined by missing
                    edges, stored as a stack whose last entry is nearest

Every move creates exactly one edge, so edge ids follow the order in which
the Peano curve visits them.  An edge move fills the nearest missing edge
above the active vertex (or grows a new top vertex when there is none).  A
face move ``m_{i,j}`` glues the west side of a new face onto the ``i+1``
boundary edges below the active vertex; when fewer exist, the remainder of
the west side hangs below the start vertex as missing edges.

Per vertex the half-edges are kept as two lists ordered west to east:
outgoing (``out_edges``) and incoming (``in_edges``).  The counterclockwise
rotation starting east is ``reversed(out) + in``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .stepdist import EDGE, EdgeMove, FaceMove, Move

__all__ = [
    "SewingError",
    "Face",
    "MarkedBipolarMap",
    "LatticePath",
    "initial_map",
    "apply_move",
    "build_map",
    "decode_map",
    "nw_tree",
    "se_tree",
    "peano_order",
    "contour_path",
    "validate_bipolar",
    "structure_key",
    "moves_to_increments",
    "increments_to_moves",
]


class SewingError(RuntimeError):
    """Internal corruption or a map that violates the marked-map invariants."""


@dataclass
class Face:
    west: list  # edge ids south -> north, None where missing
    east: list
    west_vertices: list[int]
    east_vertices: list[int]

    @property
    def degree(self) -> int:
        return len(self.west) + len(self.east)

    @property
    def south(self) -> int:
        return self.west_vertices[0]

    @property
    def north(self) -> int:
        return self.west_vertices[-1]


@dataclass
class MarkedBipolarMap:
    n_vertices: int
    edges: list[tuple[int, int]]
    out_edges: list[list[int]]
    in_edges: list[list[int]]
    faces: list[Face]
    start: int
    west_top: list[int]
    west_top_edges: list[int]
    west_below: list[int]
    west_below_slots: list[tuple[int, int]]
    east_chain: list[int]
    east_chain_edges: list[int]
    above: list[int]
    above_slots: list[tuple[int, int]]
    n_moves: int = 0

    @property
    def active(self) -> int:
        return self.east_chain[-1]

    @property
    def top(self) -> int:
        return self.west_top[-1]

    @property
    def bottom(self) -> int:
        return self.east_chain[0]

    @property
    def missing_west(self) -> int:
        return len(self.west_below)

    @property
    def missing_east(self) -> int:
        return len(self.above)

    @property
    def is_completed(self) -> bool:
        return not self.west_below and not self.above

    @property
    def source(self) -> int:
        return self.start

    @property
    def sink(self) -> int:
        return self.top

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    def west_boundary(self) -> list[int]:
        return self.west_below + self.west_top

    def east_boundary(self) -> list[int]:
        return self.east_chain + self.above[::-1]

    def rotation(self, v: int) -> list[int]:
        return self.out_edges[v][::-1] + self.in_edges[v]

    def face_degrees(self) -> list[int]:
        return [f.degree for f in self.faces]

    def copy(self) -> "MarkedBipolarMap":
        return MarkedBipolarMap(
            n_vertices=self.n_vertices,
            edges=list(self.edges),
            out_edges=[list(x) for x in self.out_edges],
            in_edges=[list(x) for x in self.in_edges],
            faces=[Face(list(f.west), list(f.east), list(f.west_vertices), list(f.east_vertices))
                   for f in self.faces],
            start=self.start,
            west_top=list(self.west_top),
            west_top_edges=list(self.west_top_edges),
            west_below=list(self.west_below),
            west_below_slots=list(self.west_below_slots),
            east_chain=list(self.east_chain),
            east_chain_edges=list(self.east_chain_edges),
            above=list(self.above),
            above_slots=list(self.above_slots),
            n_moves=self.n_moves,
        )


def initial_map() -> MarkedBipolarMap:
    """A single edge from the start vertex 0 to the active vertex 1."""
    return MarkedBipolarMap(
        n_vertices=2,
        edges=[(0, 1)],
        out_edges=[[0], []],
        in_edges=[[], [0]],
        faces=[],
        start=0,
        west_top=[0, 1],
        west_top_edges=[0],
        west_below=[],
        west_below_slots=[],
        east_chain=[0, 1],
        east_chain_edges=[0],
        above=[],
        above_slots=[],
    )


def _new_vertex(m: MarkedBipolarMap) -> int:
    v = m.n_vertices
    m.n_vertices += 1
    m.out_edges.append([])
    m.in_edges.append([])
    return v


def _new_edge(m: MarkedBipolarMap, tail: int, head: int) -> int:
    e = len(m.edges)
    m.edges.append((tail, head))
    m.out_edges[tail].append(e)  # always the eastmost outgoing edge at the tail
    m.in_edges[head].append(e)  # and the eastmost incoming edge at the head
    return e


def _apply_edge(m: MarkedBipolarMap) -> None:
    a = m.active
    if m.above:
        b = m.above.pop()
        f, pos = m.above_slots.pop()
        e = _new_edge(m, a, b)
        m.faces[f].east[pos] = e
    else:
        b = _new_vertex(m)
        e = _new_edge(m, a, b)
        m.west_top.append(b)
        m.west_top_edges.append(e)
    m.east_chain.append(b)
    m.east_chain_edges.append(e)


def _apply_face(m: MarkedBipolarMap, i: int, j: int) -> None:
    a = m.active
    f = len(m.faces)
    n_real = len(m.east_chain_edges)
    glue = min(i + 1, n_real)
    deficit = i + 1 - glue
    glued_edges = m.east_chain_edges[n_real - glue:]
    glued_vertices = m.east_chain[len(m.east_chain) - glue - 1:]
    del m.east_chain_edges[n_real - glue:]
    del m.east_chain[len(m.east_chain) - glue:]
    if deficit:
        hanging = [_new_vertex(m) for _ in range(deficit)]
        west_vertices = hanging + glued_vertices
        m.west_below[:0] = hanging
        m.west_below_slots[:0] = [(f, t) for t in range(deficit)]
        m.east_chain[:] = [hanging[0]]
        m.east_chain_edges[:] = []
    else:
        west_vertices = glued_vertices
    s = west_vertices[0]
    corners = [_new_vertex(m) for _ in range(j)]
    east_vertices = [s] + corners + [a]
    face = Face(
        west=[None] * deficit + glued_edges,
        east=[None] * (j + 1),
        west_vertices=west_vertices,
        east_vertices=east_vertices,
    )
    m.faces.append(face)
    target = east_vertices[1]
    e = _new_edge(m, s, target)
    face.east[0] = e
    m.east_chain.append(target)
    m.east_chain_edges.append(e)
    # missing east edges above the new active vertex, farthest pushed first
    for pos in range(j, 0, -1):
        m.above.append(east_vertices[pos + 1])
        m.above_slots.append((f, pos))


def apply_move(m: MarkedBipolarMap, move: Move) -> MarkedBipolarMap:
    """Sew one move onto ``m`` in place and return it."""
    if isinstance(move, EdgeMove):
        _apply_edge(m)
    elif isinstance(move, FaceMove):
        _apply_face(m, move.i, move.j)
    else:
        raise TypeError(f"not a move: {move!r}")
    m.n_moves += 1
    return m


def build_map(moves: Iterable[Move]) -> MarkedBipolarMap:
    m = initial_map()
    for mv in moves:
        apply_move(m, mv)
    return m


def _face_lookup(m: MarkedBipolarMap) -> dict[int, tuple[int, int]]:
    east_of = {}
    for fi, face in enumerate(m.faces):
        for pos, e in enumerate(face.east):
            if e is not None:
                east_of[e] = (fi, pos)
    return east_of


def decode_map(m: MarkedBipolarMap) -> list[Move]:
    """Recover the move sequence by peeling moves off from the active vertex."""
    problems = validate_bipolar(m, structural_only=True)
    if problems:
        raise SewingError("invalid marked map: " + "; ".join(problems[:5]))
    m = m.copy()
    east_of = _face_lookup(m)
    moves: list[Move] = []
    while len(m.edges) > 1:
        if not m.east_chain_edges:
            raise SewingError("no edge below the active vertex")
        e = m.east_chain_edges[-1]
        if e != len(m.edges) - 1:
            raise SewingError(f"edge {e} below the active vertex is not the newest edge")
        slot = east_of.get(e)
        tail, head = m.edges[e]
        if m.out_edges[tail][-1] != e or m.in_edges[head][-1] != e:
            raise SewingError(f"edge {e} is not eastmost at its endpoints")
        if slot is not None and slot[1] == 0:
            moves.append(_undo_face(m, slot[0], east_of))
        else:
            _undo_edge(m, e, slot)
            moves.append(EDGE)
        east_of.pop(e, None)
    if m.n_vertices != 2 or m.faces or m.above or m.west_below:
        raise SewingError("map does not peel down to the initial edge")
    moves.reverse()
    return moves


def _drop_edge(m: MarkedBipolarMap, e: int) -> None:
    tail, head = m.edges.pop()
    m.out_edges[tail].pop()
    m.in_edges[head].pop()


def _drop_vertices(m: MarkedBipolarMap, vs: Sequence[int]) -> None:
    for v in sorted(vs, reverse=True):
        if v != m.n_vertices - 1 or m.out_edges[v] or m.in_edges[v]:
            raise SewingError(f"vertex {v} cannot be removed")
        m.n_vertices -= 1
        m.out_edges.pop()
        m.in_edges.pop()


def _undo_edge(m: MarkedBipolarMap, e: int, slot) -> None:
    b = m.east_chain.pop()
    m.east_chain_edges.pop()
    _drop_edge(m, e)
    if slot is not None:
        f, pos = slot
        m.faces[f].east[pos] = None
        m.above.append(b)
        m.above_slots.append((f, pos))
    elif b == m.top and len(m.west_top) > 2 and m.west_top_edges[-1] == e:
        m.west_top.pop()
        m.west_top_edges.pop()
        _drop_vertices(m, [b])
    else:
        raise SewingError(f"edge {e} is neither a face edge nor a top edge")


def _undo_face(m: MarkedBipolarMap, fi: int, east_of) -> Move:
    if fi != len(m.faces) - 1:
        raise SewingError(f"face {fi} is not the newest face")
    face = m.faces[fi]
    i, j = len(face.west) - 1, len(face.east) - 1
    if any(x is not None for x in face.east[1:]):
        raise SewingError(f"face {fi} has filled east edges above its lowest")
    for pos in range(1, j + 1):
        if m.above_slots.pop() != (fi, pos) or m.above.pop() != face.east_vertices[pos + 1]:
            raise SewingError(f"missing edges of face {fi} are not above the active vertex")
    e = face.east[0]
    m.east_chain.pop()
    m.east_chain_edges.pop()
    _drop_edge(m, e)
    deficit = 0
    while deficit < len(face.west) and face.west[deficit] is None:
        deficit += 1
    if deficit:
        hanging = face.west_vertices[:deficit]
        if m.west_below[:deficit] != hanging or m.east_chain != [hanging[0]]:
            raise SewingError(f"hanging west side of face {fi} is inconsistent")
        del m.west_below[:deficit]
        del m.west_below_slots[:deficit]
        m.east_chain[:] = face.west_vertices[deficit:]
        m.east_chain_edges[:] = face.west[deficit:]
        _drop_vertices(m, face.east_vertices[1:-1] + hanging)
    else:
        if m.east_chain[-1] != face.south:
            raise SewingError(f"face {fi} south is not on the east boundary")
        m.east_chain.extend(face.west_vertices[1:])
        m.east_chain_edges.extend(face.west)
        _drop_vertices(m, face.east_vertices[1:-1])
    m.faces.pop()
    return FaceMove(i, j)


# ---------------------------------------------------------------- trees, paths


@dataclass(frozen=True)
class LatticePath:
    start: tuple[int, int]
    increments: np.ndarray  # shape (n, 2)

    @property
    def positions(self) -> np.ndarray:
        pos = np.empty((len(self.increments) + 1, 2), dtype=np.int64)
        pos[0] = self.start
        if len(self.increments):
            pos[1:] = np.asarray(self.start) + np.cumsum(self.increments, axis=0)
        return pos

    @property
    def end(self) -> tuple[int, int]:
        p = self.positions[-1]
        return int(p[0]), int(p[1])

    def __len__(self) -> int:
        return len(self.increments)

    def in_quadrant(self) -> bool:
        return bool((self.positions >= 0).all())

    def moves(self) -> list[Move]:
        return increments_to_moves(self.increments)


def moves_to_increments(moves: Sequence[Move]) -> np.ndarray:
    inc = np.empty((len(moves), 2), dtype=np.int64)
    for t, mv in enumerate(moves):
        inc[t] = mv.increment
    return inc


def increments_to_moves(increments) -> list[Move]:
    out: list[Move] = []
    for dx, dy in np.asarray(increments).reshape(-1, 2).tolist():
        if (dx, dy) == (1, -1):
            out.append(EDGE)
        elif dx <= 0 and dy >= 0:
            out.append(FaceMove(-dx, dy))
        else:
            raise ValueError(f"increment ({dx}, {dy}) is not a step")
    return out


def _require_completed(m: MarkedBipolarMap) -> None:
    if not m.is_completed:
        raise SewingError("operation needs a completed bipolar map")


def nw_tree(m: MarkedBipolarMap) -> list[int | None]:
    """Parent of each edge: the westmost outgoing edge at its upper vertex."""
    _require_completed(m)
    sink = m.sink
    return [None if h == sink else m.out_edges[h][0] for _, h in m.edges]


def se_tree(m: MarkedBipolarMap) -> list[int | None]:
    """Parent of each edge: the eastmost incoming edge at its lower vertex."""
    _require_completed(m)
    src = m.source
    return [None if t == src else m.in_edges[t][-1] for t, _ in m.edges]


def peano_order(m: MarkedBipolarMap) -> list[int]:
    """Edges in the order visited by the curve winding between the trees.

    This is the post-order of the NW tree with siblings taken west to east;
    it is computed from the rotation system alone.
    """
    _require_completed(m)
    order: list[int] = []
    stack: list[tuple[int, bool]] = [(e, False) for e in reversed(m.in_edges[m.sink])]
    while stack:
        e, expanded = stack.pop()
        if expanded:
            order.append(e)
            continue
        stack.append((e, True))
        t = m.edges[e][0]
        if m.out_edges[t][0] == e:
            stack.extend((c, False) for c in reversed(m.in_edges[t]))
    return order


def _depths(parent_vertex, roots_ok, nv: int) -> list[int]:
    depth = [-1] * nv
    for v0 in range(nv):
        path = []
        v = v0
        while depth[v] < 0 and not roots_ok(v):
            path.append(v)
            v = parent_vertex(v)
            if len(path) > nv:
                raise SewingError("tree walk does not terminate")
        base = 0 if depth[v] < 0 else depth[v]
        if depth[v] < 0:
            depth[v] = 0
        for u in reversed(path):
            base += 1
            depth[u] = base
    return depth


def contour_path(m: MarkedBipolarMap) -> LatticePath:
    """Lattice path of SE-tree and NW-tree distances along the Peano order.

    ``X`` is the SE distance from the source to the lower endpoint of each edge
    and ``Y`` the NW distance from the upper endpoint to the sink.
    """
    _require_completed(m)
    order = peano_order(m)
    src, sink = m.source, m.sink
    se_depth = _depths(lambda v: m.edges[m.in_edges[v][-1]][0], lambda v: v == src, m.n_vertices)
    nw_depth = _depths(lambda v: m.edges[m.out_edges[v][0]][1], lambda v: v == sink, m.n_vertices)
    xs = np.array([se_depth[m.edges[e][0]] for e in order], dtype=np.int64)
    ys = np.array([nw_depth[m.edges[e][1]] for e in order], dtype=np.int64)
    inc = np.stack([np.diff(xs), np.diff(ys)], axis=1) if len(order) > 1 else np.zeros((0, 2), np.int64)
    return LatticePath(start=(int(xs[0]), int(ys[0])), increments=inc)


# ----------------------------------------------------------------- validation


def validate_bipolar(m: MarkedBipolarMap, structural_only: bool = False) -> list[str]:
    """Report invariant violations; an empty list means the map is sound."""
    bad: list[str] = []
    nv, ne = m.n_vertices, len(m.edges)
    if len(m.out_edges) != nv or len(m.in_edges) != nv:
        return [f"incidence lists sized {len(m.out_edges)}/{len(m.in_edges)} for {nv} vertices"]
    for e, (t, h) in enumerate(m.edges):
        if not (0 <= t < nv and 0 <= h < nv):
            bad.append(f"edge {e} has endpoint outside 0..{nv - 1}")
        elif t == h:
            bad.append(f"edge {e} is a self-loop")
    if bad:
        return bad
    seen_out = [0] * ne
    seen_in = [0] * ne
    for v in range(nv):
        for e in m.out_edges[v]:
            if not 0 <= e < ne:
                bad.append(f"vertex {v} lists dangling edge {e}")
                continue
            seen_out[e] += 1
            if m.edges[e][0] != v:
                bad.append(f"edge {e} listed outgoing at {v} but its tail is {m.edges[e][0]}")
        for e in m.in_edges[v]:
            if not 0 <= e < ne:
                bad.append(f"vertex {v} lists dangling edge {e}")
                continue
            seen_in[e] += 1
            if m.edges[e][1] != v:
                bad.append(f"edge {e} listed incoming at {v} but its head is {m.edges[e][1]}")
    for e in range(ne):
        if seen_out[e] != 1 or seen_in[e] != 1:
            bad.append(f"edge {e} appears {seen_out[e]}x outgoing, {seen_in[e]}x incoming")

    # acyclicity (Kahn)
    indeg = [0] * nv
    for _, h in m.edges:
        indeg[h] += 1
    queue = [v for v in range(nv) if indeg[v] == 0]
    done = 0
    while queue:
        v = queue.pop()
        done += 1
        for e in m.out_edges[v]:
            if 0 <= e < ne:
                h = m.edges[e][1]
                indeg[h] -= 1
                if indeg[h] == 0:
                    queue.append(h)
    if done != nv:
        bad.append("orientation has a directed cycle")

    # face bookkeeping
    as_west = [0] * ne
    as_east = [0] * ne
    for fi, face in enumerate(m.faces):
        if not face.west or not face.east:
            bad.append(f"face {fi} lacks a west or east edge")
            continue
        if len(face.west_vertices) != len(face.west) + 1 or len(face.east_vertices) != len(face.east) + 1:
            bad.append(f"face {fi} vertex chains do not match its edge lists")
            continue
        if face.west_vertices[0] != face.east_vertices[0] or face.west_vertices[-1] != face.east_vertices[-1]:
            bad.append(f"face {fi} sides do not share south and north")
        for side, edges_, verts, counter in (("west", face.west, face.west_vertices, as_west),
                                             ("east", face.east, face.east_vertices, as_east)):
            for k, e in enumerate(edges_):
                if e is None:
                    continue
                if not 0 <= e < ne:
                    bad.append(f"face {fi} {side} side references dangling edge {e}")
                    continue
                counter[e] += 1
                if m.edges[e] != (verts[k], verts[k + 1]):
                    bad.append(f"face {fi} {side} edge {e} does not join {verts[k]}->{verts[k + 1]}")
    for e in range(ne):
        if as_west[e] > 1 or as_east[e] > 1:
            bad.append(f"edge {e} borders more than one face on one side")

    # boundaries
    chain = m.east_chain
    if len(m.east_chain_edges) != len(chain) - 1:
        bad.append("east chain edge count mismatch")
    else:
        for k, e in enumerate(m.east_chain_edges):
            if not (0 <= e < ne) or m.edges[e] != (chain[k], chain[k + 1]):
                bad.append(f"east boundary edge {e} does not join {chain[k]}->{chain[k + 1]}")
    wt = m.west_top
    if len(m.west_top_edges) != len(wt) - 1:
        bad.append("west boundary edge count mismatch")
    else:
        for k, e in enumerate(m.west_top_edges):
            if not (0 <= e < ne) or m.edges[e] != (wt[k], wt[k + 1]):
                bad.append(f"west boundary edge {e} does not join {wt[k]}->{wt[k + 1]}")
    if wt and wt[0] != m.start:
        bad.append("west boundary does not pass through the start vertex")
    if len(m.above) != len(m.above_slots) or len(m.west_below) != len(m.west_below_slots):
        bad.append("missing-edge records are inconsistent")
    if structural_only or bad:
        return bad

    if m.is_completed:
        sources = [v for v in range(nv) if not m.in_edges[v]]
        sinks = [v for v in range(nv) if not m.out_edges[v]]
        if sources != [m.source]:
            bad.append(f"sources {sources[:5]} differ from the start vertex {m.source}")
        if sinks != [m.sink]:
            bad.append(f"sinks {sinks[:5]} differ from the active vertex {m.sink}")
        if nv - ne + len(m.faces) + 1 != 2:
            bad.append(f"Euler characteristic V-E+F = {nv - ne + len(m.faces) + 1}")
        for fi, face in enumerate(m.faces):
            if None in face.west or None in face.east:
                bad.append(f"completed map has missing edges on face {fi}")
        west_set = set(m.west_top_edges)
        east_set = set(m.east_chain_edges)
        for e in range(ne):
            want_w = 0 if e in east_set else 1
            want_e = 0 if e in west_set else 1
            if as_west[e] != want_w or as_east[e] != want_e:
                bad.append(f"edge {e} borders {as_west[e]}/{as_east[e]} faces west/east")
    return bad


def structure_key(m: MarkedBipolarMap) -> tuple:
    """Identifier-free description of a marked map.

    Vertices and edges are relabelled by a breadth-first traversal from the
    bottom vertex that follows each rotation; two maps have equal keys exactly
    when they are the same marked map up to renaming.
    """
    vlab: dict[int, int] = {}
    elab: dict[int, int] = {}
    roots = [m.bottom] + m.west_below + [m.start]
    queue: list[int] = []
    for r in roots:
        if r not in vlab:
            vlab[r] = len(vlab)
            queue.append(r)
        while queue:
            v = queue.pop(0)
            for e in m.rotation(v):
                if e not in elab:
                    elab[e] = len(elab)
                t, h = m.edges[e]
                u = h if t == v else t
                if u not in vlab:
                    vlab[u] = len(vlab)
                    queue.append(u)
    for v in range(m.n_vertices):
        if v not in vlab:
            vlab[v] = len(vlab)

    def E(x):
        return None if x is None else elab[x]

    rot = tuple(sorted((vlab[v], tuple(E(e) for e in m.rotation(v))) for v in range(m.n_vertices)))
    edges = tuple(sorted((elab[e], vlab[t], vlab[h]) for e, (t, h) in enumerate(m.edges)))
    faces = tuple(sorted(
        (tuple(map(E, f.west)), tuple(map(E, f.east)),
         tuple(vlab[v] for v in f.west_vertices), tuple(vlab[v] for v in f.east_vertices))
        for f in m.faces))
    marks = (vlab[m.start], vlab[m.active], tuple(vlab[v] for v in m.west_boundary()),
             tuple(vlab[v] for v in m.east_boundary()))
    return (m.n_vertices, edges, rot, faces, marks)
