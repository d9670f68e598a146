"""Text formats: move lists, map documents, CSV tables and ball documents."""

from __future__ import annotations

import io
import json

import numpy as np

from .sewing import Face, MarkedBipolarMap, validate_bipolar
from .stepdist import EDGE, EdgeMove, FaceMove, Move

__all__ = [
    "FormatError",
    "moves_text_encode",
    "moves_text_decode",
    "map_to_document",
    "map_json_encode",
    "map_json_decode",
    "path_csv",
    "jumps_csv",
    "grid_csv",
    "ball_document",
    "dumps",
]

MAP_FORMAT = "bipolar-map/1"


class FormatError(ValueError):
    def __init__(self, msg: str, line: int | None = None):
        self.line = line
        super().__init__(msg if line is None else f"line {line}: {msg}")


def moves_text_encode(moves) -> str:
    out = []
    for mv in moves:
        if isinstance(mv, EdgeMove):
            out.append("E\n")
        elif isinstance(mv, FaceMove):
            out.append(f"F {mv.i} {mv.j}\n")
        else:
            raise TypeError(f"not a move: {mv!r}")
    return "".join(out)


def moves_text_decode(text: str) -> list[Move]:
    moves: list[Move] = []
    for ln, raw in enumerate(text.splitlines(), start=1):
        tok = raw.split()
        if not tok:
            continue
        if tok[0] == "E" and len(tok) == 1:
            moves.append(EDGE)
        elif tok[0] == "F" and len(tok) == 3:
            try:
                i, j = int(tok[1]), int(tok[2])
            except ValueError:
                raise FormatError(f"face move needs two integers, got {raw.strip()!r}", ln) from None
            if i < 0 or j < 0:
                raise FormatError("face move indices must be non-negative", ln)
            moves.append(FaceMove(i, j))
        else:
            raise FormatError(f"expected 'E' or 'F <i> <j>', got {raw.strip()!r}", ln)
    return moves


def map_to_document(m: MarkedBipolarMap) -> dict:
    done = m.is_completed
    return {
        "format": MAP_FORMAT,
        "n_vertices": m.n_vertices,
        "n_moves": m.n_moves,
        "edges": [list(e) for e in m.edges],
        "rotation": [m.rotation(v) for v in range(m.n_vertices)],
        "faces": [
            {"west": f.west, "east": f.east,
             "west_vertices": f.west_vertices, "east_vertices": f.east_vertices}
            for f in m.faces
        ],
        "completed": done,
        "source": m.source if done else None,
        "sink": m.sink if done else None,
        "west_boundary": m.west_boundary(),
        "east_boundary": m.east_boundary(),
        "start": m.start,
        "active": m.active,
        "missing_west": m.missing_west,
        "missing_east": m.missing_east,
        "state": {
            "west_top": m.west_top,
            "west_top_edges": m.west_top_edges,
            "west_below": m.west_below,
            "west_below_slots": [list(s) for s in m.west_below_slots],
            "east_chain": m.east_chain,
            "east_chain_edges": m.east_chain_edges,
            "above": m.above,
            "above_slots": [list(s) for s in m.above_slots],
        },
    }


def dumps(doc) -> str:
    return json.dumps(doc, sort_keys=True, separators=(",", ":")) + "\n"


def map_json_encode(m: MarkedBipolarMap) -> str:
    return dumps(map_to_document(m))


def _int_list(x, what: str, allow_none: bool = False) -> list:
    if not isinstance(x, list):
        raise FormatError(f"{what} must be a list")
    for v in x:
        if v is None and allow_none:
            continue
        if not isinstance(v, int) or isinstance(v, bool):
            raise FormatError(f"{what} holds a non-integer entry {v!r}")
    return list(x)


def _pairs(x, what: str) -> list[tuple[int, int]]:
    if not isinstance(x, list):
        raise FormatError(f"{what} must be a list")
    out = []
    for k, p in enumerate(x):
        p = _int_list(p, f"{what}[{k}]")
        if len(p) != 2:
            raise FormatError(f"{what}[{k}] must have two entries")
        out.append((p[0], p[1]))
    return out


def map_json_decode(text: str) -> MarkedBipolarMap:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise FormatError(f"not JSON: {exc}") from None
    if not isinstance(doc, dict) or doc.get("format") != MAP_FORMAT:
        raise FormatError(f"document is not a {MAP_FORMAT} map")
    required = ["n_vertices", "n_moves", "edges", "rotation", "faces", "state", "start", "active"]
    for key in required:
        if key not in doc:
            raise FormatError(f"missing field {key!r}")
    nv = doc["n_vertices"]
    if not isinstance(nv, int) or nv < 2:
        raise FormatError("n_vertices must be an integer >= 2")
    edges = _pairs(doc["edges"], "edges")
    ne = len(edges)
    rot = doc["rotation"]
    if not isinstance(rot, list) or len(rot) != nv:
        raise FormatError("rotation must list every vertex")
    out_edges, in_edges = [], []
    for v, r in enumerate(rot):
        r = _int_list(r, f"rotation[{v}]")
        for e in r:
            if not 0 <= e < ne:
                raise FormatError(f"rotation of vertex {v} references dangling edge index {e}")
        k = 0
        while k < len(r) and edges[r[k]][0] == v:
            k += 1
        out_edges.append(r[:k][::-1])
        in_edges.append(r[k:])
    faces = []
    if not isinstance(doc["faces"], list):
        raise FormatError("faces must be a list")
    for fi, f in enumerate(doc["faces"]):
        if not isinstance(f, dict):
            raise FormatError(f"face {fi} must be an object")
        try:
            face = Face(
                _int_list(f["west"], f"face {fi} west", allow_none=True),
                _int_list(f["east"], f"face {fi} east", allow_none=True),
                _int_list(f["west_vertices"], f"face {fi} west_vertices"),
                _int_list(f["east_vertices"], f"face {fi} east_vertices"),
            )
        except KeyError as exc:
            raise FormatError(f"face {fi} lacks field {exc.args[0]!r}") from None
        for e in face.west + face.east:
            if e is not None and not 0 <= e < ne:
                raise FormatError(f"face {fi} references dangling edge index {e}")
        faces.append(face)
    st = doc["state"]
    if not isinstance(st, dict):
        raise FormatError("state must be an object")
    try:
        m = MarkedBipolarMap(
            n_vertices=nv,
            edges=edges,
            out_edges=out_edges,
            in_edges=in_edges,
            faces=faces,
            start=doc["start"],
            west_top=_int_list(st["west_top"], "west_top"),
            west_top_edges=_int_list(st["west_top_edges"], "west_top_edges"),
            west_below=_int_list(st["west_below"], "west_below"),
            west_below_slots=_pairs(st["west_below_slots"], "west_below_slots"),
            east_chain=_int_list(st["east_chain"], "east_chain"),
            east_chain_edges=_int_list(st["east_chain_edges"], "east_chain_edges"),
            above=_int_list(st["above"], "above"),
            above_slots=_pairs(st["above_slots"], "above_slots"),
            n_moves=doc["n_moves"],
        )
    except KeyError as exc:
        raise FormatError(f"state lacks field {exc.args[0]!r}") from None
    for name in ("west_top", "east_chain"):
        if not getattr(m, name):
            raise FormatError(f"{name} must be nonempty")
    for name in ("west_top", "west_below", "east_chain", "above"):
        for v in getattr(m, name):
            if not 0 <= v < nv:
                raise FormatError(f"{name} references vertex {v} outside 0..{nv - 1}")
    problems = validate_bipolar(m)
    if problems:
        raise FormatError("invalid map: " + "; ".join(problems[:5]))
    # descriptive fields must agree with the state
    if doc != map_to_document(m):
        raise FormatError("descriptive fields disagree with the map state")
    return m


def _g(x: float) -> str:
    return format(float(x), ".17g")


def path_csv(path) -> str:
    """Rows ``step,dX,dY,X,Y``; step 0 is the start with a zero increment."""
    pos = np.asarray(path.positions)
    inc = np.asarray(path.increments).reshape(-1, 2)
    buf = io.StringIO()
    buf.write("step,dX,dY,X,Y\n")
    buf.write(f"0,0,0,{pos[0, 0]},{pos[0, 1]}\n")
    for k in range(len(inc)):
        buf.write(f"{k + 1},{inc[k, 0]},{inc[k, 1]},{pos[k + 1, 0]},{pos[k + 1, 1]}\n")
    return buf.getvalue()


def jumps_csv(jumps) -> str:
    buf = io.StringIO()
    buf.write("t,j,U\n")
    for t, j, u in zip(jumps.t.tolist(), jumps.j.tolist(), jumps.U.tolist()):
        buf.write(f"{_g(t)},{_g(j)},{_g(u)}\n")
    return buf.getvalue()


def grid_csv(pair, grid) -> str:
    w1 = pair.W1(grid)
    w2 = pair.W2(grid)
    buf = io.StringIO()
    buf.write("t,W1,W2\n")
    for t, a, b in zip(np.asarray(grid).tolist(), w1.tolist(), w2.tolist()):
        buf.write(f"{_g(t)},{_g(a)},{_g(b)}\n")
    return buf.getvalue()


def ball_document(ball, code: str | None = None) -> dict:
    verts = sorted(ball.adjacency)
    lab = {v: k for k, v in enumerate(verts)}
    edges = sorted(
        (lab[v], lab[u]) for v in verts for u in ball.adjacency[v] if lab[v] <= lab[u]
    )
    # each non-loop edge appears once per endpoint; keep one copy
    return {
        "root": lab[ball.root],
        "radius": ball.radius,
        "certified": ball.certified,
        "m": ball.m,
        "n_vertices": len(verts),
        "edges": [list(e) for e in edges],
        "code": code if code is not None else ball.code(),
    }
