"""Labeled game graphs, positional strategies, plays, and counterexample arenas.

Nodes carry dense ids 0..n-1 and an owner tag ("max" or "min"); edges are
(source, letter, target) triples over the arena's alphabet.  Every node must
have at least one outgoing edge.  Parallel identical edges are deduplicated.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Iterable, NamedTuple, Sequence

from .words import Alphabet, UPWord, WordError

MAX = "max"
MIN = "min"


class GraphError(ValueError):
    """Structurally invalid game graph or strategy."""


@dataclass(frozen=True)
class Edge:
    src: int
    letter: int
    dst: int


@dataclass(frozen=True)
class GameReport:
    errors: tuple

    @property
    def ok(self) -> bool:
        return not self.errors

    @property
    def first(self) -> str | None:
        return self.errors[0] if self.errors else None


def validate_game(alphabet: Alphabet, owners: Sequence[str],
                  edges: Sequence) -> GameReport:
    """Check arena invariants on raw data; reports all violations, never raises."""
    errors = []
    n = len(owners)
    if n == 0:
        errors.append("graph has no nodes")
    for u, owner in enumerate(owners):
        if owner not in (MAX, MIN):
            errors.append(f"node {u}: owner must be '{MAX}' or '{MIN}', got {owner!r}")
    has_out = [False] * n
    for i, e in enumerate(edges):
        try:
            src, letter, dst = e.src, e.letter, e.dst
        except AttributeError:
            try:
                src, letter, dst = e
            except (TypeError, ValueError):
                errors.append(f"edge {i}: not a (source, letter, target) triple")
                continue
        bad = False
        for tag, v in (("source", src), ("target", dst)):
            if not (isinstance(v, int) and 0 <= v < n):
                errors.append(f"edge {i}: {tag} node {v!r} out of range 0..{n - 1}")
                bad = True
        if not (isinstance(letter, int) and 0 <= letter < alphabet.size):
            errors.append(f"edge {i}: unknown label id {letter!r}")
            bad = True
        if not bad:
            has_out[src] = True
    for u in range(n):
        if not has_out[u]:
            errors.append(f"node {u}: sink node (out-degree must be positive)")
    return GameReport(tuple(errors))


class GameGraph:
    """Immutable arena.  Construction raises GraphError on any invariant breach."""

    __slots__ = ("alphabet", "owners", "edges", "out")

    def __init__(self, alphabet: Alphabet, owners: Sequence[str],
                 edges: Iterable):
        owners = tuple(owners)
        normalized = []
        seen = set()
        for e in edges:
            if not isinstance(e, Edge):
                e = Edge(*e)
            if (e.src, e.letter, e.dst) in seen:
                continue  # parallel identical edges collapse
            seen.add((e.src, e.letter, e.dst))
            normalized.append(e)
        report = validate_game(alphabet, owners, normalized)
        if not report.ok:
            raise GraphError(report.first)
        self.alphabet = alphabet
        self.owners = owners
        self.edges = tuple(normalized)
        out = [[] for _ in owners]
        for i, e in enumerate(self.edges):
            out[e.src].append(i)
        self.out = tuple(tuple(o) for o in out)

    @property
    def node_count(self) -> int:
        return len(self.owners)

    def nodes_of(self, owner: str) -> tuple:
        return tuple(u for u, o in enumerate(self.owners) if o == owner)

    def __repr__(self) -> str:
        return (f"GameGraph({self.node_count} nodes, {len(self.edges)} edges, "
                f"labels {self.alphabet.names})")


def validate(g: GameGraph) -> GameReport:
    """Re-check a built graph (always ok for graphs from the constructor)."""
    return validate_game(g.alphabet, g.owners, g.edges)


@dataclass(frozen=True)
class PositionalStrategy:
    """One fixed outgoing edge per owned node."""

    owner: str
    choice: tuple  # sorted ((node, edge_index), ...) pairs

    @classmethod
    def of(cls, owner: str, picks: dict) -> "PositionalStrategy":
        return cls(owner, tuple(sorted(picks.items())))

    def as_dict(self) -> dict:
        return dict(self.choice)

    def edge_at(self, node: int) -> int:
        for u, e in self.choice:
            if u == node:
                return e
        raise GraphError(f"strategy has no choice at node {node}")

    def check(self, g: GameGraph) -> None:
        picks = self.as_dict()
        owned = set(g.nodes_of(self.owner))
        if set(picks) != owned:
            raise GraphError(
                f"{self.owner} strategy must choose at exactly the owned nodes "
                f"{sorted(owned)}, got {sorted(picks)}"
            )
        for u, ei in picks.items():
            if not 0 <= ei < len(g.edges) or g.edges[ei].src != u:
                raise GraphError(f"strategy picks edge {ei} which does not leave node {u}")


def first_edge_strategy(g: GameGraph, owner: str) -> PositionalStrategy:
    """Lowest-index outgoing edge at every owned node (a deterministic default)."""
    return PositionalStrategy.of(owner, {u: g.out[u][0] for u in g.nodes_of(owner)})


def all_strategies(g: GameGraph, owner: str):
    """Iterate every positional strategy of the owner, in product order."""
    import itertools

    nodes = g.nodes_of(owner)
    for combo in itertools.product(*(g.out[u] for u in nodes)):
        yield PositionalStrategy.of(owner, dict(zip(nodes, combo)))


@dataclass(frozen=True)
class Lasso:
    """Edge-index stem followed by a non-empty edge-index cycle."""

    stem: tuple
    cycle: tuple

    def word(self, g: GameGraph) -> UPWord:
        return UPWord(
            tuple(g.edges[i].letter for i in self.stem),
            tuple(g.edges[i].letter for i in self.cycle),
        )

    def check(self, g: GameGraph) -> None:
        seq = self.stem + self.cycle
        if not self.cycle:
            raise GraphError("lasso cycle must be non-empty")
        for a, b in zip(seq, seq[1:]):
            if g.edges[a].dst != g.edges[b].src:
                raise GraphError("lasso edges do not chain")
        if g.edges[self.cycle[-1]].dst != g.edges[self.cycle[0]].src:
            raise GraphError("lasso cycle does not close")


def play(g: GameGraph, sigma: PositionalStrategy, tau: PositionalStrategy,
         start: int) -> Lasso:
    """The unique play of two positional strategies from a node, as a lasso.

    Follows sigma on Max nodes and tau on Min nodes until a node repeats,
    which happens within node_count + 1 steps.
    """
    pick = {}
    for strat, owner in ((sigma, MAX), (tau, MIN)):
        if strat.owner != owner:
            raise GraphError(f"expected a {owner} strategy, got {strat.owner}")
        pick.update(strat.as_dict())
    where = {start: 0}
    trail = []
    node = start
    while True:
        ei = pick[node]
        trail.append(ei)
        node = g.edges[ei].dst
        if node in where:
            k = where[node]
            return Lasso(tuple(trail[:k]), tuple(trail[k:]))
        where[node] = len(trail)


def consistent_edges(g: GameGraph, strategy: PositionalStrategy) -> tuple:
    """Edges the strategy can ever use: all opponent edges plus its own picks."""
    picks = set(strategy.as_dict().values())
    own = strategy.owner
    return tuple(
        i for i, e in enumerate(g.edges)
        if g.owners[e.src] != own or i in picks
    )


# -- counterexample arenas -------------------------------------------------------

class ChoiceArena(NamedTuple):
    graph: GameGraph
    entry_a: int
    entry_b: int
    choice: int
    first_edge: int   # edge at the choice node entering the p(q)-lasso
    second_edge: int  # edge at the choice node entering the w(r)-lasso


def _extend_path(edges, owners, start: int, letters: Sequence[int]) -> int:
    node = start
    for a in letters:
        owners.append(MAX)
        nxt = len(owners) - 1
        edges.append(Edge(node, a, nxt))
        node = nxt
    return node


def _close_cycle(edges, owners, entry: int, letters: Sequence[int]) -> None:
    node = entry
    for a in letters[:-1]:
        owners.append(MAX)
        nxt = len(owners) - 1
        edges.append(Edge(node, a, nxt))
        node = nxt
    edges.append(Edge(node, letters[-1], entry))


def build_two_entry_choice_game(alphabet: Alphabet, p: Sequence[int], q: Sequence[int],
                                w: Sequence[int], r: Sequence[int],
                                entry_u: Sequence[int] = (), entry_v: Sequence[int] = ()
                                ) -> ChoiceArena:
    """Max-only arena with one binary choice feeding two disjoint lassos.

    From the choice node c, one branch walks p into a q-cycle and the other
    walks w into an r-cycle, so the two positional strategies from c produce
    the label words p(q)^omega and w(r)^omega.  Entry nodes a and b reach c
    along paths labeled entry_u and entry_v; an empty entry word makes that
    entry node c itself.
    """
    q = alphabet.check_word(q)
    r = alphabet.check_word(r)
    p = alphabet.check_word(p)
    w = alphabet.check_word(w)
    entry_u = alphabet.check_word(entry_u)
    entry_v = alphabet.check_word(entry_v)
    if not q or not r:
        raise GraphError("cycle words of the choice arena must be non-empty")

    owners = [MAX]  # node 0 = choice node c
    edges: list[Edge] = []
    c = 0

    # Whether or not p is empty, the first edge appended below leaves c.
    first_edge = len(edges)
    tail = _extend_path(edges, owners, c, p)
    _close_cycle(edges, owners, tail, q)

    second_edge = len(edges)
    tail = _extend_path(edges, owners, c, w)
    _close_cycle(edges, owners, tail, r)

    if entry_u:
        owners.append(MAX)
        a = len(owners) - 1
        node = a
        for letter in entry_u[:-1]:
            owners.append(MAX)
            nxt = len(owners) - 1
            edges.append(Edge(node, letter, nxt))
            node = nxt
        edges.append(Edge(node, entry_u[-1], c))
    else:
        a = c
    if entry_v:
        owners.append(MAX)
        b = len(owners) - 1
        node = b
        for letter in entry_v[:-1]:
            owners.append(MAX)
            nxt = len(owners) - 1
            edges.append(Edge(node, letter, nxt))
            node = nxt
        edges.append(Edge(node, entry_v[-1], c))
    else:
        b = c

    return ChoiceArena(GameGraph(alphabet, owners, edges), a, b, c,
                       first_edge, second_edge)


class LassoChoiceArena(NamedTuple):
    graph: GameGraph
    choice_nodes: tuple
    left_edges: tuple   # edge index at each choice node entering its left lasso
    right_edges: tuple


def build_lasso_choice_game(alphabet: Alphabet,
                            pairs: Sequence[tuple]) -> LassoChoiceArena:
    """Max-only arena: one choice node per pair, each with two disjoint lassos.

    Pair i supplies two ultimately periodic words (alpha_i, beta_i); the play
    under the go-left strategy from choice node i spells alpha_i and under
    go-right spells beta_i.  Lassos never share nodes apart from their choice
    node, so Max has exactly two positional choices per node.
    """
    owners: list[str] = []
    edges: list[Edge] = []
    choice_nodes = []
    left_edges = []
    right_edges = []
    for left, right in pairs:
        if not isinstance(left, UPWord) or not isinstance(right, UPWord):
            raise WordError("each pair must consist of two ultimately periodic words")
        owners.append(MAX)
        v = len(owners) - 1
        choice_nodes.append(v)
        for word, edge_list in ((left, left_edges), (right, right_edges)):
            edge_list.append(len(edges))
            if word.prefix:
                tail = _extend_path(edges, owners, v, word.prefix)
                _close_cycle(edges, owners, tail, word.cycle)
            else:
                _close_cycle(edges, owners, v, word.cycle)
    return LassoChoiceArena(GameGraph(alphabet, owners, edges),
                            tuple(choice_nodes), tuple(left_edges), tuple(right_edges))


# -- JSON format ------------------------------------------------------------------

class GameFormatError(ValueError):
    """Malformed game JSON."""


def game_to_json(g: GameGraph) -> dict:
    return {
        "labels": list(g.alphabet.names),
        "nodes": [{"id": u, "owner": g.owners[u]} for u in range(g.node_count)],
        "edges": [
            {"src": e.src, "label": g.alphabet.name(e.letter), "dst": e.dst}
            for e in g.edges
        ],
    }


def game_from_json(obj: dict) -> GameGraph:
    try:
        alphabet = Alphabet(tuple(obj["labels"]))
        nodes = obj["nodes"]
        raw_edges = obj["edges"]
    except (KeyError, TypeError, WordError) as exc:
        raise GameFormatError(f"malformed game object: {exc}") from None
    owners = [None] * len(nodes)
    for item in nodes:
        try:
            uid = item["id"]
            owners[uid] = item["owner"]
        except (KeyError, TypeError, IndexError):
            raise GameFormatError(f"malformed node entry {item!r}") from None
    if any(o is None for o in owners):
        raise GameFormatError("node ids must be dense 0..n-1")
    edges = []
    for item in raw_edges:
        try:
            edges.append(Edge(item["src"], alphabet.index(item["label"]), item["dst"]))
        except (KeyError, TypeError, WordError) as exc:
            raise GameFormatError(f"malformed edge entry {item!r}: {exc}") from None
    report = validate_game(alphabet, owners, edges)
    if not report.ok:
        raise GameFormatError(report.first)
    return GameGraph(alphabet, owners, edges)


def game_to_json_str(g: GameGraph) -> str:
    return json.dumps(game_to_json(g), separators=(", ", ": "))
