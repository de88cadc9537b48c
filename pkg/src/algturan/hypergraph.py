"""Layered r-uniform multi-hypergraphs and the ``HGR v1`` text format.

An edge is a pair ``(layer, vertices)`` with ``vertices`` a sorted r-tuple.
Parallel edges from different layers stay distinct; the multiplicity of a
vertex set is the number of layers holding it.

File format::

    HGR v1
    n=<int> r=<int> layers=<int> partite=<int>
    e <layer> v1 ... vr        # vertices ascending, lines sorted
"""
from __future__ import annotations

from collections import Counter, defaultdict
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable

Edge = tuple[int, tuple[int, ...]]


class ShapeMismatch(ValueError):
    pass


class ParseError(ValueError):
    def __init__(self, lineno: int, msg: str):
        super().__init__(f"line {lineno}: {msg}")
        self.lineno = lineno


@dataclass(frozen=True, eq=False)
class MultiHypergraph:
    n: int
    r: int
    layers: int = 1
    partite: int = 0
    edges: frozenset = field(default_factory=frozenset)
    # new id -> original id, set by ``delete``; not serialized
    labels: tuple[int, ...] | None = None

    def __post_init__(self):
        if self.partite not in (0, self.r):
            raise ShapeMismatch(f"partite must be 0 or r={self.r}")
        if self.partite and self.n % self.r:
            raise ShapeMismatch("partite mode needs r equal parts")
        if self.layers < 1:
            raise ShapeMismatch("need at least one layer")
        canon = frozenset((int(k), tuple(sorted(int(v) for v in vs))) for k, vs in self.edges)
        object.__setattr__(self, "edges", canon)
        for k, vs in canon:
            self._check_edge(k, vs)

    def _check_edge(self, layer: int, vs: tuple[int, ...]) -> None:
        if not 0 <= layer < self.layers:
            raise ShapeMismatch(f"layer {layer} outside [0, {self.layers})")
        if len(vs) != self.r or len(set(vs)) != self.r:
            raise ShapeMismatch(f"edge {vs} is not {self.r} distinct vertices")
        if vs[0] < 0 or vs[-1] >= self.n:
            raise ShapeMismatch(f"edge {vs} has a vertex outside [0, {self.n})")
        if self.partite:
            size = self.n // self.r
            if sorted(v // size for v in vs) != list(range(self.r)):
                raise ShapeMismatch(f"edge {vs} is not transversal to the parts")

    def __eq__(self, other) -> bool:
        if not isinstance(other, MultiHypergraph):
            return NotImplemented
        return (self.n, self.r, self.layers, self.partite, self.edges) == (
            other.n,
            other.r,
            other.layers,
            other.partite,
            other.edges,
        )

    def __hash__(self):
        return hash((self.n, self.r, self.layers, self.partite, self.edges))

    @property
    def part_size(self) -> int:
        return self.n // self.r if self.partite else self.n

    def part_of(self, v: int) -> int:
        return v // self.part_size if self.partite else 0

    @cached_property
    def multiplicity(self) -> Counter:
        return Counter(vs for _, vs in self.edges)

    @cached_property
    def sorted_edges(self) -> list[Edge]:
        return sorted(self.edges, key=lambda e: (e[0], e[1]))

    @cached_property
    def incidence(self) -> dict[int, list[Edge]]:
        inc: dict[int, list[Edge]] = defaultdict(list)
        for e in self.sorted_edges:
            for v in e[1]:
                inc[v].append(e)
        return dict(inc)

    @cached_property
    def links(self) -> dict[tuple[int, ...], Counter]:
        """(r-1)-set -> Counter of completing vertices weighted by multiplicity."""
        out: dict[tuple[int, ...], Counter] = defaultdict(Counter)
        for vs, m in self.multiplicity.items():
            for i, u in enumerate(vs):
                out[vs[:i] + vs[i + 1 :]][u] += m
        return dict(out)

    def edge_count(self) -> int:
        return len(self.edges)

    def vertex_sets(self) -> set[tuple[int, ...]]:
        return set(self.multiplicity)

    def mult(self, vs: Iterable[int]) -> int:
        return self.multiplicity.get(tuple(sorted(vs)), 0)

    def is_simple(self) -> bool:
        return all(m == 1 for m in self.multiplicity.values())


class SimpleHypergraph(MultiHypergraph):
    """A single-layer hypergraph; parallel edges are impossible."""

    def __init__(self, n: int, r: int, sets: Iterable[Iterable[int]] = (), partite: int = 0, labels=None):
        edges = frozenset((0, tuple(sorted(int(v) for v in s))) for s in sets)
        super().__init__(n, r, 1, partite, edges, labels)

    def edge_sets(self) -> list[tuple[int, ...]]:
        return sorted(vs for _, vs in self.edges)


def union(layers: list[MultiHypergraph]) -> MultiHypergraph:
    """Layer-labelled union; input i becomes layer i."""
    if not layers:
        raise ShapeMismatch("need at least one layer")
    head = layers[0]
    for g in layers:
        if (g.n, g.r, g.partite) != (head.n, head.r, head.partite):
            raise ShapeMismatch("layers differ in n, r or partite structure")
        if g.layers != 1:
            raise ShapeMismatch("union takes single-layer hypergraphs")
    edges = frozenset((i, vs) for i, g in enumerate(layers) for _, vs in g.edges)
    return MultiHypergraph(head.n, head.r, len(layers), head.partite, edges)


def multi_edges(g: MultiHypergraph) -> list[tuple[int, ...]]:
    return sorted(vs for vs, m in g.multiplicity.items() if m >= 2)


def delete(g: MultiHypergraph, vertices: Iterable[int], drop_multi: bool = True) -> SimpleHypergraph:
    """Remove vertices and either drop or collapse parallel edges.

    Survivors are relabelled 0..n'-1 in increasing order; ``labels`` maps
    new ids back to ``g``'s ids.  Partite structure is kept only when no
    vertex is removed.
    """
    gone = {int(v) for v in vertices}
    if any(not 0 <= v < g.n for v in gone):
        raise ShapeMismatch("deleted vertex outside the vertex range")
    keep = [v for v in range(g.n) if v not in gone]
    new_id = {v: i for i, v in enumerate(keep)}
    sets = []
    for vs, m in sorted(g.multiplicity.items()):
        if m >= 2 and drop_multi:
            continue
        if any(v in gone for v in vs):
            continue
        sets.append(tuple(new_id[v] for v in vs))
    base = g.labels
    labels = tuple(base[v] if base else v for v in keep)
    partite = g.partite if not gone else 0
    return SimpleHypergraph(len(keep), g.r, sets, partite, labels)


def serialize(g: MultiHypergraph) -> str:
    lines = ["HGR v1", f"n={g.n} r={g.r} layers={g.layers} partite={g.partite}"]
    body = sorted((k,) + vs for k, vs in g.edges)
    lines.extend("e " + " ".join(str(x) for x in row) for row in body)
    return "\n".join(lines) + "\n"


def parse(text: str) -> MultiHypergraph:
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    if not lines or lines[0] != "HGR v1":
        raise ParseError(1, "missing 'HGR v1' header")
    if len(lines) < 2:
        raise ParseError(2, "missing parameter line")
    try:
        kv = dict(tok.split("=", 1) for tok in lines[1].split(" "))
        n, r, layers, partite = (int(kv[k]) for k in ("n", "r", "layers", "partite"))
    except (ValueError, KeyError) as exc:
        raise ParseError(2, f"bad parameter line: {exc}") from None
    if set(kv) != {"n", "r", "layers", "partite"}:
        raise ParseError(2, "unexpected parameter keys")
    try:
        shell = MultiHypergraph(n, r, layers, partite)
    except ShapeMismatch as exc:
        raise ParseError(2, str(exc)) from None
    edges = set()
    for i, line in enumerate(lines[2:], start=3):
        tok = line.split(" ")
        if tok[0] != "e" or len(tok) != r + 2:
            raise ParseError(i, f"expected 'e <layer>' and {r} vertices")
        try:
            layer, *vs = (int(x) for x in tok[1:])
        except ValueError:
            raise ParseError(i, "non-integer field") from None
        if vs != sorted(vs):
            raise ParseError(i, "vertices must be ascending")
        try:
            shell._check_edge(layer, tuple(vs))
        except ShapeMismatch as exc:
            raise ParseError(i, str(exc)) from None
        if (layer, tuple(vs)) in edges:
            raise ParseError(i, "duplicate edge")
        edges.add((layer, tuple(vs)))
    if layers == 1:
        return SimpleHypergraph(n, r, [vs for _, vs in edges], partite)
    return MultiHypergraph(n, r, layers, partite, frozenset(edges))


def write_hgr(g: MultiHypergraph, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(serialize(g))


def read_hgr(path) -> MultiHypergraph:
    with open(path, encoding="utf-8") as fh:
        return parse(fh.read())
