"""
Model surfaces described by labelled trees, their invariants, and the
towers of tight triangulations that exhaust them.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction

from SurfaceScope.models.mesh import SurfaceMesh
from SurfaceScope.models.moves import MoveLog, disjoint_union, join, self_join
from SurfaceScope.models.seeds import REDUCED_GENUS, build_named_mesh, disc, sphere_pants
from SurfaceScope.utils.errors import SpecError
from SurfaceScope.utils.logger import get_logger

logger = get_logger(__name__)

FORMAT = "tree-spec/1"
LABELS = {"S0": "sphere", "S1": "torus", "P": "projective"}


def reduced_genus(label):
    return REDUCED_GENUS[LABELS[label]]


@dataclass(frozen=True)
class Ray:
    word: tuple
    kind = "ray"

    def unrolled(self):
        return self.word[0], Ray(self.word[1:] + self.word[:1])


@dataclass(frozen=True)
class FullBinary:
    word: tuple = ()
    kind = "full-binary"


@dataclass(frozen=True)
class Comb:
    """A spine of S0 branch nodes, each with a planar tooth, between word labels."""

    word: tuple
    kind = "comb"

    def unrolled(self):
        return self.word[0], Comb(self.word[1:] + self.word[:1])


TAILS = {"ray": Ray, "full-binary": FullBinary, "comb": Comb}


@dataclass(frozen=True)
class TreeNode:
    id: int
    label: str
    children: tuple = ()


@dataclass(frozen=True)
class TreeSpec:
    nodes: dict
    root: int
    tails: dict = field(default_factory=dict)

    def children(self, node_id):
        return self.nodes[node_id].children

    def leaves(self):
        return sorted(node.id for node in self.nodes.values() if not node.children)

    def to_dict(self):
        return {
            "format": FORMAT,
            "root": self.root,
            "nodes": [
                {"id": node.id, "label": node.label, "children": list(node.children)}
                for node in sorted(self.nodes.values(), key=lambda node: node.id)
            ],
            "tails": {
                str(leaf): {"kind": tail.kind, "word": list(tail.word)}
                for leaf, tail in sorted(self.tails.items())
            },
        }


def parse_spec(document):
    """Validate a ``tree-spec/1`` document and return the spec."""
    if not isinstance(document, dict) or document.get("format") != FORMAT:
        raise SpecError(f"expected format {FORMAT}")
    try:
        nodes = {}
        for record in document["nodes"]:
            node = TreeNode(
                int(record["id"]),
                str(record["label"]),
                tuple(int(child) for child in record.get("children", [])),
            )
            if node.id in nodes:
                raise SpecError(f"duplicate node id {node.id}")
            nodes[node.id] = node
        root = int(document["root"])
        tails = {}
        for leaf, record in document.get("tails", {}).items():
            kind = record["kind"]
            if kind not in TAILS:
                raise SpecError(f"unknown tail kind {kind} at leaf {leaf}")
            tails[int(leaf)] = TAILS[kind](tuple(str(label) for label in record.get("word", [])))
    except (KeyError, TypeError, ValueError) as error:
        if isinstance(error, SpecError):
            raise
        raise SpecError(f"malformed tree spec: {error}") from error
    spec = TreeSpec(nodes, root, tails)
    check_spec(spec)
    return spec


def check_spec(spec):
    """Raise :class:`SpecError` naming the first broken constraint."""
    nodes = spec.nodes
    if spec.root not in nodes:
        raise SpecError(f"root {spec.root} is not a node")
    for node in nodes.values():
        if node.label not in LABELS:
            raise SpecError(f"node {node.id} has unknown label {node.label}")
        if len(node.children) > 2:
            raise SpecError(f"node {node.id} has more than two children")
        for child in node.children:
            if child not in nodes:
                raise SpecError(f"node {node.id} names missing child {child}")
        if len(node.children) == 2 and node.label != "S0":
            raise SpecError(f"branching node {node.id} must be labelled S0")
    if nodes[spec.root].label != "S0":
        raise SpecError("root must be labelled S0")
    parents = {}
    for node in nodes.values():
        for child in node.children:
            if child in parents or child == spec.root:
                raise SpecError(f"node {child} has more than one parent")
            parents[child] = node.id
    seen = {spec.root}
    queue = deque([spec.root])
    while queue:
        for child in nodes[queue.popleft()].children:
            seen.add(child)
            queue.append(child)
    if seen != set(nodes):
        raise SpecError(f"nodes {sorted(set(nodes) - seen)} are not reachable from the root")
    for leaf in spec.leaves():
        if leaf not in spec.tails:
            raise SpecError(f"leaf {leaf} has no tail")
    for leaf, tail in spec.tails.items():
        if leaf not in nodes or nodes[leaf].children:
            raise SpecError(f"tail attached to non-leaf {leaf}")
        if isinstance(tail, FullBinary):
            if nodes[leaf].label != "S0" or tail.word:
                raise SpecError(f"full-binary tail at {leaf} must continue an S0 leaf")
            continue
        if not tail.word:
            raise SpecError(f"{tail.kind} tail at {leaf} has an empty word")
        for label in tail.word:
            if label not in LABELS:
                raise SpecError(f"tail at {leaf} has unknown label {label}")


@dataclass(frozen=True)
class EndFlags:
    kind: str
    planar: bool
    orientable: bool

    def as_dict(self):
        return {"kind": self.kind, "planar": self.planar, "orientable": self.orientable}


@dataclass(frozen=True)
class SpecInvariants:
    genus: object  # Fraction or "infinite"
    orientability: str
    ends: object  # int, "Cantor" or "countable"
    end_flags: tuple

    def as_dict(self):
        return {
            "genus": str(self.genus),
            "orientability": self.orientability,
            "ends": self.ends,
            "end_flags": [flag.as_dict() for flag in self.end_flags],
        }


def classify(spec):
    """Genus, orientability type and ends of the model surface."""
    core = [node.label for node in spec.nodes.values()]
    periodic = [tail.word for tail in spec.tails.values() if not isinstance(tail, FullBinary)]
    if any(label in ("S1", "P") for word in periodic for label in word):
        genus = "infinite"
    else:
        genus = sum((reduced_genus(label) for label in core), Fraction(0))
    if not any("P" in word for word in periodic) and "P" not in core:
        orientability = "orientable"
    elif any("P" in word for word in periodic):
        orientability = "infinitely-nonorientable"
    elif core.count("P") % 2:
        orientability = "finitely-nonorientable-odd"
    else:
        orientability = "finitely-nonorientable-even"

    kinds = {tail.kind for tail in spec.tails.values()}
    if "full-binary" in kinds:
        ends = "Cantor"
    elif "comb" in kinds:
        ends = "countable"
    else:
        ends = len(spec.leaves())
    flags = []
    for tail in spec.tails.values():
        flags.append(
            EndFlags(
                tail.kind,
                planar=all(label == "S0" for label in tail.word),
                orientable="P" not in tail.word,
            )
        )
        if isinstance(tail, Comb):
            flags.append(EndFlags("ray", True, True))
    # one entry per distinct kind of end
    end_flags = tuple(sorted(set(flags), key=lambda flag: (flag.kind, flag.planar, flag.orientable)))
    return SpecInvariants(genus, orientability, ends, end_flags)


class _Expander:
    """Working copy of a spec whose tails are unrolled on demand."""

    def __init__(self, spec):
        self.nodes = dict(spec.nodes)
        self.tails = dict(spec.tails)
        self.root = spec.root
        self._next = max(self.nodes) + 1

    def _add(self, label, children=()):
        node = TreeNode(self._next, label, tuple(children))
        self.nodes[node.id] = node
        self._next += 1
        return node.id

    def _attach(self, parent, children):
        node = self.nodes[parent]
        self.nodes[parent] = TreeNode(node.id, node.label, tuple(children))

    def unroll_leaf(self, leaf):
        tail = self.tails.pop(leaf)
        if isinstance(tail, Ray):
            label, rest = tail.unrolled()
            child = self._add(label)
            self.tails[child] = rest
            self._attach(leaf, [child])
        elif isinstance(tail, FullBinary):
            left, right = self._add("S0"), self._add("S0")
            self.tails[left] = FullBinary()
            self.tails[right] = FullBinary()
            self._attach(leaf, [left, right])
        else:
            label, rest = tail.unrolled()
            tooth = self._add("S0")
            self.tails[tooth] = Ray(("S0",))
            spine = self._add(label)
            self.tails[spine] = rest
            branch = self._add("S0", [tooth, spine])
            self._attach(leaf, [branch])

    def children(self, node_id):
        if node_id in self.tails:
            self.unroll_leaf(node_id)
        return self.nodes[node_id].children

    def label(self, node_id):
        return self.nodes[node_id].label

    def spec(self):
        return TreeSpec(dict(self.nodes), self.root, dict(self.tails))


def unroll(spec):
    """The same surface with every tail unrolled by one step."""
    expander = _Expander(spec)
    for leaf in sorted(spec.tails):
        expander.unroll_leaf(leaf)
    return expander.spec()


def _ray_spec(word):
    return TreeSpec({0: TreeNode(0, "S0")}, 0, {0: Ray(tuple(word))})


def named_spec(name):
    """Catalogue of standard model surfaces."""
    if name == "plane":
        return _ray_spec(["S0"])
    if name == "loch-ness":
        return _ray_spec(["S1"])
    if name == "mixed":
        return _ray_spec(["P", "S0"])
    if name == "cantor-tree":
        return TreeSpec({0: TreeNode(0, "S0")}, 0, {0: FullBinary()})
    if name == "clustering-handles":
        return TreeSpec({0: TreeNode(0, "S0")}, 0, {0: Comb(("S1",))})
    if name == "jacobs-ladder":
        nodes = {0: TreeNode(0, "S0", (1, 2)), 1: TreeNode(1, "S0"), 2: TreeNode(2, "S0")}
        return TreeSpec(nodes, 0, {1: Ray(("S1",)), 2: Ray(("S1",))})
    if name.startswith("punctured-sphere-"):
        count = int(name.rsplit("-", 1)[1])
        if count < 1:
            raise SpecError("a punctured sphere needs at least one puncture")
        if count == 1:
            return _ray_spec(["S0"])
        # caterpillar: each spine node carries one puncture, the last carries two
        nodes, tails = {}, {}
        spine = list(range(count - 1))
        for position, node_id in enumerate(spine):
            leaf = count - 1 + position
            nodes[leaf] = TreeNode(leaf, "S0")
            tails[leaf] = Ray(("S0",))
            following = spine[position + 1] if position + 1 < len(spine) else 2 * count - 2
            nodes[node_id] = TreeNode(node_id, "S0", (leaf, following))
        last = 2 * count - 2
        nodes[last] = TreeNode(last, "S0")
        tails[last] = Ray(("S0",))
        return TreeSpec(nodes, 0, tails)
    raise SpecError(f"unknown named spec {name}")


NAMED_SPECS = (
    "plane",
    "punctured-sphere-3",
    "cantor-tree",
    "loch-ness",
    "mixed",
    "jacobs-ladder",
    "clustering-handles",
)


def pants_exits(entrance):
    """Exit lengths for a branching node: as even as possible, larger on the left."""
    total = entrance + 3
    return (total + 1) // 2, total // 2


@dataclass
class Tower:
    stages: list
    log: MoveLog
    frontier: list

    def as_dict(self):
        return {
            "stages": len(self.stages),
            "frontier": [
                {"hole": list(hole), "length": self.stages[-1].hole_length(hole), "node": node}
                for hole, node in self.frontier
            ],
            "invariants": [
                {"V": len(stage.vertices), "E": len(stage.edges), "holes": len(stage.holes)}
                for stage in self.stages
            ],
        }


def _attach(mesh, hole, builder, args, log):
    other = build_named_mesh(builder, args)
    edge_offset = mesh.next_edge_id
    entrance = tuple(other.meta["piece"]["entrance"])
    result = join(mesh, hole, other, entrance)
    log.record("join", hole=hole, other={"builder": builder, "args": args})
    exits = [(exit_hole[0] + edge_offset, exit_hole[1]) for exit_hole in other.meta["piece"]["exits"]]
    return result, exits


def build_tower(spec, depth):
    """Stages ``G_0 .. G_depth`` of tight triangulations exhausting the surface."""
    if depth < 0:
        raise ValueError("depth must be non-negative")
    tree = _Expander(spec)
    log = MoveLog()
    mesh = disc()
    (hole,) = mesh.holes
    children = tree.children(tree.root)
    frontier = [(hole, children[0])] if len(children) == 1 else [(hole, tree.root)]
    stages = [mesh]
    for stage in range(depth):
        pending = []
        for hole, node in frontier:
            children = tree.children(node)
            length = mesh.hole_length(hole)
            if len(children) == 2:
                lb, lc = pants_exits(length)
                mesh, exits = _attach(mesh, hole, "sphere_pants", {"lb": lb, "lc": lc}, log)
                pending.extend(zip(exits, children))
            else:
                surface = LABELS[tree.label(node)]
                args = {"kind": surface, "delta": length}
                mesh, exits = _attach(mesh, hole, "piece", args, log)
                pending.append((exits[0], children[0]))
        frontier = pending
        stages.append(mesh)
        logger.info(
            "tower stage %d: V=%d E=%d open holes=%d",
            stage + 1,
            len(mesh.vertices),
            len(mesh.edges),
            len(frontier),
        )
    return Tower(stages, log, frontier)


def is_nested(inner, outer):
    """Whether ``inner`` is a labelled subgraph of ``outer``."""
    if not set(inner.vertices) <= set(outer.vertices):
        return False
    for edge_id, edge in inner.edges.items():
        other = outer.edges.get(edge_id)
        if other is None or {other.u, other.v} != {edge.u, edge.v}:
            return False
    return True


DIRECTIONS = ("-x", "+x", "-y", "+y", "-z", "+z")


def schwarz_unit():
    """A sphere with six vertex-disjoint holes of length 3, from four pants."""
    mesh = sphere_pants(3, 3)
    entrance = tuple(mesh.meta["piece"]["entrance"])
    open_holes = [tuple(hole) for hole in mesh.meta["piece"]["exits"]]
    for _ in range(3):
        hole = open_holes.pop(0)
        other = sphere_pants(3, 3)
        edge_offset = mesh.next_edge_id
        mesh = join(mesh, hole, other, tuple(other.meta["piece"]["entrance"]))
        open_holes.extend((h[0] + edge_offset, h[1]) for h in other.meta["piece"]["exits"])
    holes = [entrance] + open_holes
    meta = {"faces": dict(zip(DIRECTIONS, [list(hole) for hole in holes]))}
    return SurfaceMesh(mesh.vertices, dict(mesh.edges), dict(mesh.rotation), mesh.holes, meta)


def schwarz_block_join(m):
    """An m x m x m cube of units glued face to face."""
    if m < 1:
        raise ValueError("m must be at least 1")
    unit = schwarz_unit()
    unit_faces = {name: tuple(hole) for name, hole in unit.meta["faces"].items()}
    mesh = unit
    placed = {(0, 0, 0): dict(unit_faces)}
    cells = [(i, j, k) for i in range(m) for j in range(m) for k in range(m)][1:]
    for cell in cells:
        mesh, _, edge_offset = disjoint_union(mesh, unit)
        faces = {name: (hole[0] + edge_offset, hole[1]) for name, hole in unit_faces.items()}
        for axis, (low, high) in enumerate((("-x", "+x"), ("-y", "+y"), ("-z", "+z"))):
            neighbour = list(cell)
            neighbour[axis] -= 1
            neighbour = tuple(neighbour)
            if neighbour in placed:
                mesh = self_join(mesh, placed[neighbour][high], faces[low])
                placed[neighbour].pop(high)
                faces.pop(low)
        placed[cell] = faces
    outer = sum(len(faces) for faces in placed.values())
    logger.info("schwarz block m=%d: V=%d E=%d f=%d", m, len(mesh.vertices), len(mesh.edges), mesh.maxwell_count)
    meta = {"schwarz": {"m": m, "outer_holes": outer}}
    return SurfaceMesh(mesh.vertices, dict(mesh.edges), dict(mesh.rotation), mesh.holes, meta)


def schwarz_maxwell(m):
    """Maxwell count of the m-cube predicted by the join formula."""
    return 6 * m**3 - 18 * m * m * (m - 1)
