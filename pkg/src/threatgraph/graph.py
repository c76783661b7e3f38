"""In-memory layered graph of threat/vulnerability entries.

Layers form a chain (tactic down to product configuration). Edges connect
consecutive layers, with one exception: technique-to-technique edges record
sub-technique parenthood (parent is the "up" endpoint). Every edge is indexed
in both directions, so traversal up or down the chain is symmetric.
"""

from __future__ import annotations

import enum
from collections import deque
from dataclasses import dataclass, field

from .errors import (
    DuplicateNode,
    GraphFrozen,
    InvalidNode,
    LayerViolation,
    UnknownNode,
)


class Layer(enum.IntEnum):
    """Graph layers, ordered top (abstract threat) to bottom (concrete target)."""

    TACTIC = 0
    TECHNIQUE = 1
    ATTACK_PATTERN = 2
    WEAKNESS = 3
    VULNERABILITY = 4
    PRODUCT_CONFIG = 5

    @property
    def token(self) -> str:
        """Lowercase token used in the canonical interchange format."""
        return self.name.lower()

    @classmethod
    def from_token(cls, token: str) -> "Layer":
        try:
            return cls[token.upper()]
        except KeyError:
            raise ValueError(f"unknown layer token: {token!r}") from None


@dataclass(frozen=True, order=True)
class NodeId:
    """Identifier of a node: layer plus a local id unique within the layer."""

    layer: Layer
    local_id: str

    def __str__(self):
        return f"{self.layer.token}:{self.local_id}"


@dataclass(frozen=True)
class ThreatNode:
    """One entry from any source layer."""

    id: NodeId
    name: str
    description: str = ""
    cvss: float | None = None

    def validate(self):
        """Raise InvalidNode if a field invariant is violated."""
        if not self.id.local_id:
            raise InvalidNode("local_id must be non-empty")
        if self.cvss is not None:
            if self.id.layer is not Layer.VULNERABILITY:
                raise InvalidNode(f"cvss only allowed on vulnerability nodes: {self.id}")
            if not 0.0 <= self.cvss <= 10.0:
                raise InvalidNode(f"cvss out of range [0, 10]: {self.cvss}")
        named_layers = (
            Layer.TACTIC,
            Layer.TECHNIQUE,
            Layer.ATTACK_PATTERN,
            Layer.WEAKNESS,
        )
        if self.id.layer in named_layers and not self.name:
            raise InvalidNode(f"name required for {self.id.layer.token} nodes: {self.id}")


class Direction(enum.Enum):
    UP = "up"
    DOWN = "down"


def _is_permitted_pair(a: Layer, b: Layer) -> bool:
    """True when (a, b) may be joined by an edge, in either orientation."""
    if a is Layer.TECHNIQUE and b is Layer.TECHNIQUE:
        return True  # sub-technique parenthood
    return abs(int(a) - int(b)) == 1


@dataclass
class ThreatGraph:
    """Layered node store with bidirectional adjacency indices.

    Construction is single-writer; call freeze() when loading is complete.
    After freeze the graph is immutable and all queries are read-only.
    """

    _nodes: dict = field(default_factory=dict)
    _down: dict = field(default_factory=dict)
    _up: dict = field(default_factory=dict)
    _frozen: bool = False

    # -- construction -----------------------------------------------------

    def add_node(self, node: ThreatNode):
        if self._frozen:
            raise GraphFrozen("graph is frozen")
        node.validate()
        if node.id in self._nodes:
            raise DuplicateNode(str(node.id))
        self._nodes[node.id] = node
        self._down[node.id] = set()
        self._up[node.id] = set()

    def add_edge(self, a: NodeId, b: NodeId):
        """Add an undirected edge, oriented internally as upper -> lower.

        For technique-technique edges the first argument is the parent.
        Re-adding an existing edge is a no-op.
        """
        if self._frozen:
            raise GraphFrozen("graph is frozen")
        for nid in (a, b):
            if nid not in self._nodes:
                raise UnknownNode(str(nid))
        if not _is_permitted_pair(a.layer, b.layer):
            raise LayerViolation(f"{a.layer.token} -- {b.layer.token}")
        if a.layer > b.layer:
            a, b = b, a
        self._down[a].add(b)
        self._up[b].add(a)

    def freeze(self):
        self._frozen = True

    @property
    def frozen(self) -> bool:
        return self._frozen

    # -- queries ----------------------------------------------------------

    def __contains__(self, nid: NodeId) -> bool:
        return nid in self._nodes

    def __len__(self):
        return len(self._nodes)

    def get(self, nid: NodeId) -> ThreatNode:
        try:
            return self._nodes[nid]
        except KeyError:
            raise UnknownNode(str(nid)) from None

    def node_ids(self, layer: Layer | None = None):
        """All node ids, optionally restricted to one layer, sorted."""
        ids = self._nodes.keys()
        if layer is not None:
            ids = (nid for nid in ids if nid.layer is layer)
        return sorted(ids)

    def neighbors(self, nid: NodeId, direction: Direction):
        """Adjacent node ids in deterministic (layer, local_id) order."""
        if nid not in self._nodes:
            raise UnknownNode(str(nid))
        index = self._down if direction is Direction.DOWN else self._up
        return sorted(index[nid])

    def neighbors_down(self, nid: NodeId):
        return self.neighbors(nid, Direction.DOWN)

    def neighbors_up(self, nid: NodeId):
        return self.neighbors(nid, Direction.UP)

    def edges(self):
        """All stored edges as (upper, lower) pairs, sorted."""
        return sorted((a, b) for a, adj in self._down.items() for b in adj)

    def edge_index_entries(self) -> int:
        """Total directed entries across both adjacency indices."""
        return sum(len(s) for s in self._down.values()) + sum(
            len(s) for s in self._up.values()
        )

    def reachable(self, nid: NodeId, target_layer: Layer) -> set:
        """Nodes of target_layer reachable by monotone traversal from nid.

        Traversal moves strictly toward the target layer (all-up or
        all-down), except that same-layer technique hops are followed in the
        direction of travel so sub-technique parent edges compose.
        """
        if nid not in self._nodes:
            raise UnknownNode(str(nid))
        if target_layer == nid.layer:
            # Only technique-technique edges can stay within a layer.
            if nid.layer is not Layer.TECHNIQUE:
                return set()
            index = self._down
        else:
            index = self._down if target_layer > nid.layer else self._up

        going_down = index is self._down
        found = set()
        seen = {nid}
        queue = deque([nid])
        while queue:
            cur = queue.popleft()
            for nxt in index[cur]:
                if nxt in seen:
                    continue
                if going_down:
                    if nxt.layer > target_layer:
                        continue
                else:
                    if nxt.layer < target_layer:
                        continue
                seen.add(nxt)
                if nxt.layer == target_layer:
                    found.add(nxt)
                if nxt.layer != target_layer or nxt.layer is Layer.TECHNIQUE:
                    queue.append(nxt)
        found.discard(nid)
        return found

    # -- invariants -------------------------------------------------------

    def check_invariants(self):
        """Full-scan structural check; raises AssertionError on violation."""
        for a, adj in self._down.items():
            for b in adj:
                assert a in self._up[b], f"asymmetric edge {a} -> {b}"
                assert a in self._nodes and b in self._nodes
                assert _is_permitted_pair(a.layer, b.layer)
                assert a.layer <= b.layer, "down edge stored upward"
        for b, adj in self._up.items():
            for a in adj:
                assert b in self._down[a], f"asymmetric edge {b} <- {a}"
