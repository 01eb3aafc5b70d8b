"""Markov coding of K, the Parry measure, and cylinder masses.

Vertices are the level-N balls of a cover whose level-(N-1) balls avoid
the critical branches.  There is an edge v -> v' when B_{v'} lies inside
f_rond(B_v); since f_rond(B_v) is a level-(N-1) ball, this just compares the
image of v with the container of v'.

The Parry vector M solves A M = c M with sum 1, and

    mass(v_0 ... v_n) = c^(-n) * A[v_0,v_1] ... A[v_{n-1},v_n] * M[v_n].
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .berk import BerkPoint
from .cover import BallCover, choose_markov_level
from .errors import DegenerateEigenspace, NoCover, NotAdmissible, UnknownVertex
from .series import PuiseuxSeries, fmt_exponent
from .skew import SkewMap

OVER_L = "OverL"
OVER_LAURENT = "OverLaurent"


@dataclass
class MarkovGraph:
    f: SkewMap
    cover: BallCover
    level: int
    vertices: list
    adjacency: list
    view: str = OVER_L

    @property
    def size(self) -> int:
        return len(self.vertices)

    def edges(self) -> list:
        return [[i, j] for i, row in enumerate(self.adjacency) for j, a in enumerate(row) if a]

    def column_sums(self) -> list:
        n = self.size
        return [sum(self.adjacency[i][j] for i in range(n)) for j in range(n)]

    def is_admissible(self, word) -> bool:
        try:
            self.check_word(word)
        except (UnknownVertex, NotAdmissible):
            return False
        return True

    def check_word(self, word):
        for v in word:
            if not 0 <= v < self.size:
                raise UnknownVertex(v)
        for a, b in zip(word, word[1:]):
            if not self.adjacency[a][b]:
                raise NotAdmissible(f"no edge {a} -> {b}")

    def is_primitive(self) -> bool:
        n = self.size
        A = np.array(self.adjacency, dtype=np.int64) > 0
        P = A.copy()
        # Wielandt: a primitive matrix has A^k > 0 for k = n^2 - 2n + 2
        for _ in range(max(1, n * n - 2 * n + 2)):
            if P.all():
                return True
            P = (P.astype(np.int64) @ A.astype(np.int64)) > 0
        return bool(P.all())

    def to_json(self, parry: "ParryData | None" = None) -> dict:
        out = {
            "level": self.level,
            "view": self.view,
            "vertices": [v.to_json() for v in self.vertices],
            "edges": self.edges(),
        }
        if parry is not None:
            out["parry"] = [fmt_exponent(m) for m in parry.M]
        return out


@dataclass(frozen=True)
class ParryData:
    graph: MarkovGraph
    M: tuple
    c: int

    def mass(self, v: int) -> Fraction:
        return self.M[v]


def build_graph(f: SkewMap, cover: BallCover | None = None, N: int | None = None) -> MarkovGraph:
    if f.is_product():
        raise NoCover("product map: no Markov coding")
    cover = cover or BallCover.build(f, 0)
    if N is None:
        N = choose_markov_level(f, cover)
    verts = cover.level(N)
    if len(verts) < 2:
        raise NoCover("a single-ball graph carries no coding")
    n = len(verts)
    A = [[1 if verts[j].container_index == verts[i].image_index else 0 for j in range(n)] for i in range(n)]
    return MarkovGraph(f, cover, N, verts, A)


def _nullspace(rows: list) -> list:
    """Basis of the right nullspace of a Fraction matrix (reduced row echelon)."""
    m = [list(r) for r in rows]
    nrows, ncols = len(m), len(m[0])
    pivots = []
    r = 0
    for col in range(ncols):
        piv = next((i for i in range(r, nrows) if m[i][col] != 0), None)
        if piv is None:
            continue
        m[r], m[piv] = m[piv], m[r]
        inv = 1 / m[r][col]
        m[r] = [x * inv for x in m[r]]
        for i in range(nrows):
            if i != r and m[i][col] != 0:
                fac = m[i][col]
                m[i] = [a - fac * b for a, b in zip(m[i], m[r])]
        pivots.append(col)
        r += 1
        if r == nrows:
            break
    free = [c for c in range(ncols) if c not in pivots]
    basis = []
    for fc in free:
        v = [Fraction(0)] * ncols
        v[fc] = Fraction(1)
        for i, pc in enumerate(pivots):
            v[pc] = -m[i][fc]
        basis.append(v)
    return basis


def parry(graph: MarkovGraph) -> ParryData:
    """Exact positive solution of A M = c M, normalized to total mass 1."""
    c = graph.f.c
    n = graph.size
    rows = [[Fraction(graph.adjacency[i][j]) - (c if i == j else 0) for j in range(n)] for i in range(n)]
    basis = _nullspace(rows)
    if len(basis) != 1:
        raise DegenerateEigenspace(f"eigenspace for {c} has dimension {len(basis)}")
    v = basis[0]
    total = sum(v)
    M = tuple(x / total for x in v)
    if any(x <= 0 for x in M):
        raise DegenerateEigenspace("Parry vector is not positive")
    for i in range(n):
        if sum(graph.adjacency[i][j] * M[j] for j in range(n)) != c * M[i]:
            raise DegenerateEigenspace("eigen-residual is not zero")
    return ParryData(graph, M, c)


def cylinder_mass(p: ParryData, word) -> Fraction:
    word = list(word)
    if not word:
        raise ValueError("cylinder words are nonempty")
    g = p.graph
    for v in word:
        if not 0 <= v < g.size:
            raise UnknownVertex(v)
    prod = 1
    for a, b in zip(word, word[1:]):
        prod *= g.adjacency[a][b]
        if not prod:
            return Fraction(0)
    return Fraction(prod, p.c ** (len(word) - 1)) * p.M[word[-1]]


def transition_matrix(p: ParryData) -> list:
    g = p.graph
    n = g.size
    return [[Fraction(g.adjacency[i][j]) * p.M[j] / (p.c * p.M[i]) for j in range(n)] for i in range(n)]


def sample_itinerary(p: ParryData, length: int, seed: int) -> list:
    """Markov chain draw with initial law M; RNG is numpy PCG64(seed)."""
    if length <= 0:
        return []
    rng = np.random.Generator(np.random.PCG64(seed))
    n = p.graph.size
    P = transition_matrix(p)
    probs0 = np.array([float(m) for m in p.M])
    v = int(rng.choice(n, p=probs0 / probs0.sum()))
    word = [v]
    for _ in range(length - 1):
        row = np.array([float(x) for x in P[v]])
        v = int(rng.choice(n, p=row / row.sum()))
        word.append(v)
    return word


@dataclass
class EquidistributionReport:
    n: int
    counts: list
    total: int
    unbinned: int
    weights: list
    masses: list
    deviations: list

    @property
    def max_deviation(self) -> Fraction:
        return max((abs(d) for d in self.deviations), default=Fraction(0))

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "counts": self.counts,
            "total": self.total,
            "unbinned": self.unbinned,
            "weights": [fmt_exponent(w) for w in self.weights],
            "parry": [fmt_exponent(m) for m in self.masses],
            "deviations": [fmt_exponent(d) for d in self.deviations],
        }


def iterated_preimages(f: SkewMap, x0: PuiseuxSeries, n: int, precision) -> list:
    """All n-th rigid preimages of x0 over the Puiseux field, as (root, multiplicity)."""
    layer = [(PuiseuxSeries._wrap(x0), 1)]
    for _ in range(n):
        nxt = []
        for psi, mult in layer:
            for r in f._solve_preimage(psi, precision):
                nxt.append((r.root, mult * r.multiplicity))
        layer = nxt
    return layer


def equidistribution_check(f: SkewMap, graph: MarkovGraph, p: ParryData, x0, n: int, precision=None) -> EquidistributionReport:
    """Bin the n-th preimages of x0 by level-N ball and compare c^-n counts with M."""
    if precision is None:
        precision = 2 * max(b.t for b in graph.vertices) + 2
    pts = iterated_preimages(f, x0, n, precision)
    counts = [0] * graph.size
    unbinned = 0
    for root, mult in pts:
        x = BerkPoint.rigid(root)
        for i, b in enumerate(graph.vertices):
            if b.contains_point(x):
                counts[i] += mult
                break
        else:
            unbinned += mult
    total = sum(counts) + unbinned
    scale = Fraction(1, f.c**n)
    weights = [k * scale for k in counts]
    devs = [w - m for w, m in zip(weights, p.M)]
    return EquidistributionReport(n, counts, total, unbinned, weights, list(p.M), devs)


def galois_quotient(graph: MarkovGraph) -> MarkovGraph:
    """Vertices grouped by Galois conjugacy of their directions (Laurent view)."""
    classes: list[list[int]] = []
    for i, b in enumerate(graph.vertices):
        for cl in classes:
            ref = graph.vertices[cl[0]]
            if ref.t == b.t and ref.direction.is_conjugate(b.direction):
                cl.append(i)
                break
        else:
            classes.append([i])
    k = len(classes)
    A = [[0] * k for _ in range(k)]
    for a, ca in enumerate(classes):
        for bb, cb in enumerate(classes):
            if any(graph.adjacency[i][j] for i in ca for j in cb):
                A[a][bb] = 1
    verts = [graph.vertices[cl[0]] for cl in classes]
    q = MarkovGraph(graph.f, graph.cover, graph.level, verts, A, OVER_LAURENT)
    q.classes = classes
    return q
