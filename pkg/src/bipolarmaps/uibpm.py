"""The infinite-volume bipolar map built from a bi-infinite move sequence.

Both half-planes start from the integer line.  Positive line vertices are
joined by real edges ``p+1 -> p``; negative ones carry no edges yet.  Moves
``w_0, w_1, ...`` sew the upper half-plane and ``w_-1, w_-2, ...`` undo moves
below it in reverse.  Each half keeps two stacks, nearest vertex last:

* ``right``: boundary vertices joined to the active vertex by real edges,
* ``left``: boundary vertices joined by edges still missing.

A vertex can only gain neighbours while it sits on some boundary, so once it
has left both boundaries (or never was on one) its neighbourhood is final.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

import numpy as np

from .canon import canonical_code
from .rng import block_rng
from .stepdist import EDGE, FaceMove, Move, StepDistribution, sample_move_arrays

__all__ = [
    "BLOCK",
    "MoveWindow",
    "generate_window",
    "window_moves",
    "HalfPlaneComplex",
    "build_infinite",
    "RootedBall",
    "extract_ball",
    "CertificationFailed",
    "grow_until_certified",
]

BLOCK = 1024
FORWARD, REVERSE = 0, 1


class CertificationFailed(RuntimeError):
    def __init__(self, m_max: int):
        super().__init__(f"ball not certified within m_max = {m_max}")
        self.m_max = m_max


def _block(seed: int, direction: int, b: int, dist: StepDistribution):
    return sample_move_arrays(dist, block_rng(seed, direction, b), BLOCK)


def window_moves(seed: int, dist: StepDistribution, indices) -> tuple[np.ndarray, np.ndarray]:
    """Arrays ``(i, j)`` of the moves at the given integer indices.

    Index ``k >= 0`` is entry ``k % BLOCK`` of forward block ``k // BLOCK``;
    ``k < 0`` is entry ``(-k-1) % BLOCK`` of reverse block ``(-k-1) // BLOCK``.
    """
    idx = np.asarray(indices, dtype=np.int64)
    di = np.where(idx >= 0, FORWARD, REVERSE)
    pos = np.where(idx >= 0, idx, -idx - 1)
    out_i = np.empty(idx.shape, np.int64)
    out_j = np.empty(idx.shape, np.int64)
    cache = {}
    for d, b in set(zip(di.ravel().tolist(), (pos // BLOCK).ravel().tolist())):
        cache[d, b] = _block(seed, d, b, dist)
    for n, (d, p) in enumerate(zip(di.ravel().tolist(), pos.ravel().tolist())):
        bi, bj = cache[d, p // BLOCK]
        out_i.flat[n] = bi[p % BLOCK]
        out_j.flat[n] = bj[p % BLOCK]
    return out_i, out_j


@dataclass(frozen=True)
class MoveWindow:
    seed: int
    m: int
    i: np.ndarray  # indexed by k + m for k in [-m, m]
    j: np.ndarray
    offset: int = 0

    def move(self, k: int) -> Move:
        a, b = int(self.i[k + self.m]), int(self.j[k + self.m])
        return EDGE if a < 0 else FaceMove(a, b)

    def moves(self) -> list[Move]:
        return [self.move(k) for k in range(-self.m, self.m + 1)]


def generate_window(seed: int, m: int, dist: StepDistribution, offset: int = 0) -> MoveWindow:
    """Moves ``w_k`` for ``|k| <= m`` (shifted by ``offset``)."""
    if m < 0:
        raise ValueError("m must be non-negative")
    i, j = window_moves(seed, dist, np.arange(-m, m + 1) + offset)
    return MoveWindow(seed, m, i, j, offset)


class _MoveStream:
    """Sequential access to ``w_offset, w_offset+1, ...`` or the reverse run."""

    def __init__(self, seed, dist, direction, offset):
        self.seed, self.dist, self.direction, self.offset = seed, dist, direction, offset
        self._cache: dict = {}

    def get(self, n: int) -> tuple[int, int]:
        # n-th move applied by this half, n = 0, 1, ...
        k = self.offset + n if self.direction == FORWARD else self.offset - 1 - n
        d, p = (FORWARD, k) if k >= 0 else (REVERSE, -k - 1)
        b = p // BLOCK
        arr = self._cache.get((d, b))
        if arr is None:
            if len(self._cache) > 8:
                self._cache.clear()
            arr = self._cache[(d, b)] = tuple(a.tolist() for a in _block(self.seed, d, b, self.dist))
        return arr[0][p % BLOCK], arr[1][p % BLOCK]


@dataclass
class _Half:
    right: list = field(default_factory=list)
    left: list = field(default_factory=list)
    r_next: int = 1
    l_next: int = -1
    active: int = 0
    steps: int = 0
    absorbed: dict = field(default_factory=dict)
    X: int = 0
    Y: int = 0


class HalfPlaneComplex:
    """Upper and lower constructions glued along the integer line."""

    def __init__(self, seed: int, dist: StepDistribution, offset: int = 0):
        self.seed, self.dist, self.offset = seed, dist, offset
        self.adj: list[list[int]] = []
        self.n_edges = 0
        self.owner: list[int] = []  # -1 line, FORWARD, REVERSE
        self.line: dict[int, int] = {}
        self.line_pos: dict[int, int] = {}
        self._line_max = -1
        self.root = self._line(0)
        self.halves = (_Half(active=self.root), _Half(active=self.root))
        self._streams = (_MoveStream(seed, dist, FORWARD, offset),
                         _MoveStream(seed, dist, REVERSE, offset))

    # vertices and edges

    def _vertex(self, owner: int) -> int:
        self.adj.append([])
        self.owner.append(owner)
        return len(self.adj) - 1

    def _edge(self, tail: int, head: int) -> None:
        self.n_edges += 1
        self.adj[tail].append(head)
        self.adj[head].append(tail)

    def _line(self, p: int) -> int:
        v = self.line.get(p)
        if v is not None:
            return v
        if p >= 0:
            while self._line_max < p:
                q = self._line_max + 1
                v = self._vertex(-1)
                self.line[q], self.line_pos[v] = v, q
                if q > 0:
                    self._edge(v, self.line[q - 1])
                self._line_max = q
            return self.line[p]
        v = self._vertex(-1)
        self.line[p], self.line_pos[v] = v, p
        return v

    def _pop_right(self, h: _Half) -> int:
        if h.right:
            return h.right.pop()
        h.r_next += 1
        return self._line(h.r_next - 1)

    def _pop_left(self, h: _Half) -> int:
        if h.left:
            return h.left.pop()
        h.l_next -= 1
        return self._line(h.l_next + 1)

    # moves

    def _forward(self, i: int, j: int) -> None:
        h = self.halves[FORWARD]
        adj, owner = self.adj, self.owner
        a = h.active
        if i < 0:
            b = h.left.pop() if h.left else self._pop_left(h)
            adj[a].append(b)
            adj[b].append(a)
            h.right.append(a)
            h.active = b
            h.X += 1
            h.Y -= 1
        else:
            right = h.right
            t = h.steps
            absorbed = h.absorbed
            for _ in range(i):
                absorbed[right.pop() if right else self._pop_right(h)] = t
            s = right.pop() if right else self._pop_right(h)
            if j:
                c1 = len(adj)
                adj.extend([] for _ in range(j))
                owner.extend([FORWARD] * j)
                adj[s].append(c1)
                adj[c1].append(s)
                h.left.append(a)
                h.left.extend(range(c1 + j - 1, c1, -1))
                h.active = c1
            else:
                adj[s].append(a)
                adj[a].append(s)
            right.append(s)
            h.X -= i
            h.Y += j
        self.n_edges += 1
        h.steps += 1

    def _reverse(self, i: int, j: int) -> None:
        h = self.halves[REVERSE]
        adj, owner = self.adj, self.owner
        a = h.active
        right = h.right
        if i < 0:
            x = right.pop() if right else self._pop_right(h)
            h.left.append(a)
            h.active = x
            h.X -= 1
            h.Y += 1
        else:
            s = right.pop() if right else self._pop_right(h)
            top = a
            if j:
                t = h.steps
                absorbed = h.absorbed
                left = h.left
                absorbed[a] = t
                for _ in range(j - 1):
                    absorbed[left.pop() if left else self._pop_left(h)] = t
                top = left.pop() if left else self._pop_left(h)
            # west side s -> w_i -> ... -> w_1 -> top, with w_1 nearest top
            w0 = len(adj)
            adj.extend([] for _ in range(i))
            owner.extend([REVERSE] * i)
            lo = s
            for w in range(w0 + i - 1, w0 - 1, -1):
                adj[lo].append(w)
                adj[w].append(lo)
                lo = w
            adj[lo].append(top)
            adj[top].append(lo)
            right.append(s)
            right.extend(range(w0 + i - 1, w0 - 1, -1))
            h.active = top
            h.X += i
            h.Y -= j
            self.n_edges += i + 1
        h.steps += 1

    @staticmethod
    def _pair(move: Move) -> tuple[int, int]:
        return (-1, -1) if move == EDGE else (move.i, move.j)

    def apply_forward(self, move: Move) -> None:
        """Apply one move to the upper half outside the seeded stream."""
        self._forward(*self._pair(move))

    def apply_reverse(self, move: Move) -> None:
        """Undo one move below the line outside the seeded stream."""
        self._reverse(*self._pair(move))

    def extend_to(self, m: int) -> None:
        """Apply forward moves up to ``w_m`` and reverse moves down to ``w_-m``."""
        fw, rv = self.halves
        sf, sr = self._streams
        while fw.steps <= m:
            self._forward(*sf.get(fw.steps))
        while rv.steps < m:
            self._reverse(*sr.get(rv.steps))
        self.m = m

    # finality

    def is_final(self, v: int) -> bool:
        o = self.owner[v]
        fw = o == REVERSE or v in self.halves[FORWARD].absorbed
        rv = o == FORWARD or v in self.halves[REVERSE].absorbed
        return fw and rv

    def neighbours(self, v: int) -> list[int]:
        p = self.line_pos.get(v)
        if p is not None and p >= 0:
            self._line(p + 1)
        return self.adj[v]


def build_infinite(window: MoveWindow, dist: StepDistribution) -> HalfPlaneComplex:
    c = HalfPlaneComplex(window.seed, dist, window.offset)
    c.extend_to(window.m)
    return c


@dataclass(frozen=True)
class RootedBall:
    root: int
    radius: int
    adjacency: dict
    certified: bool
    m: int

    @property
    def n_vertices(self) -> int:
        return len(self.adjacency)

    def code(self) -> str:
        return canonical_code(self.adjacency, self.root)


def extract_ball(c: HalfPlaneComplex, r: int) -> RootedBall:
    dist = {c.root: 0}
    q = deque([c.root])
    while q:
        v = q.popleft()
        if dist[v] == r:
            continue
        for u in c.neighbours(v):
            if u not in dist:
                dist[u] = dist[v] + 1
                q.append(u)
    for v in dist:
        c.neighbours(v)
    adj = {v: [u for u in c.adj[v] if u in dist] for v in dist}
    certified = all(c.is_final(v) for v in dist)
    return RootedBall(c.root, r, adj, certified, getattr(c, "m", 0))


def grow_until_certified(seed: int, r: int, dist: StepDistribution, m0: int = 64,
                         m_max: int = 2**20, offset: int = 0) -> tuple[RootedBall, int]:
    if m0 < 1 or m_max < m0:
        raise ValueError("need 1 <= m0 <= m_max")
    if m0 & (m0 - 1) or m_max & (m_max - 1):
        raise ValueError("m0 and m_max must be powers of two")
    c = HalfPlaneComplex(seed, dist, offset)
    m = m0
    while m <= m_max:
        c.extend_to(m)
        ball = extract_ball(c, r)
        if ball.certified:
            return ball, m
        m *= 2
    raise CertificationFailed(m_max)
