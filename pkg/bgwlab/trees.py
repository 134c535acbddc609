"""
Plane trees, Lukasiewicz coding, the two reduced-tree decompositions and the
exhaustive enumeration oracles.

Vertices are indexed 0..n-1 in lexicographic (depth-first, left-to-right)
order and the root is vertex 0. A tree is determined by its outdegree
sequence in that order, so the step sequence ``c_u - 1`` rendered as
comma-separated integers is the canonical key used everywhere else.
"""

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

from .config import Settings
from .exceptions import (
    BoundExceeded,
    InfeasibleProfile,
    InvalidPath,
    NoInternalNode,
    ShapeMismatch,
)


def _children_from_outdegrees(degrees: Sequence[int]) -> Tuple[Tuple[int, ...], ...]:
    n = len(degrees)
    if n == 0:
        raise InvalidPath("Empty step sequence")
    children: List[List[int]] = [[] for _ in range(n)]
    pending: List[int] = []
    for v, deg in enumerate(degrees):
        if deg < 0:
            raise InvalidPath(f"Step {deg - 1} at position {v} is below -1")
        if v:
            if not pending:
                raise InvalidPath(f"Path hits -1 at position {v} before its end")
            parent = pending[-1]
            children[parent].append(v)
            if len(children[parent]) == degrees[parent]:
                pending.pop()
        if deg:
            pending.append(v)
    if pending:
        raise InvalidPath("Path does not end at -1")
    return tuple(tuple(ch) for ch in children)


@dataclass(frozen=True)
class PlaneTree:
    """Rooted plane tree given by per-vertex ordered children lists."""

    children: Tuple[Tuple[int, ...], ...]

    def __post_init__(self) -> None:
        """Validate the tree after initialization."""
        n = len(self.children)
        if n == 0:
            raise ValueError("A plane tree has at least one vertex")
        order: List[int] = []
        stack = [0]
        while stack:
            v = stack.pop()
            order.append(v)
            if len(order) > n:
                raise ValueError("Children lists contain a cycle")
            kids = self.children[v]
            if any(c <= 0 or c >= n for c in kids):
                raise ValueError(f"Vertex {v} has an out-of-range child")
            stack.extend(reversed(kids))
        if order != list(range(n)):
            raise ValueError(
                "Vertex indices are not the lexicographic order of the tree"
            )

    @classmethod
    def from_outdegrees(cls, degrees: Sequence[int]) -> "PlaneTree":
        """Build the tree whose lexicographic outdegree sequence is ``degrees``."""
        return cls(_children_from_outdegrees(degrees))

    @classmethod
    def from_key(cls, key: str) -> "PlaneTree":
        """Parse a canonical step CSV such as ``"1,-1,-1"``."""
        try:
            steps = [int(part) for part in key.split(",")]
        except ValueError as exc:
            raise InvalidPath(f"Malformed step sequence {key!r}") from exc
        return luka_decode(LukasiewiczPath(tuple(steps)))

    @classmethod
    def single(cls) -> "PlaneTree":
        return cls(((),))

    @classmethod
    def star(cls, leaves: int) -> "PlaneTree":
        """Root with ``leaves`` leaf children."""
        return cls.from_outdegrees([leaves] + [0] * leaves)

    @classmethod
    def path(cls, n: int) -> "PlaneTree":
        """Unary chain with n vertices."""
        return cls.from_outdegrees([1] * (n - 1) + [0])

    def __len__(self) -> int:
        return len(self.children)

    @cached_property
    def outdegrees(self) -> Tuple[int, ...]:
        return tuple(len(ch) for ch in self.children)

    @cached_property
    def key(self) -> str:
        return ",".join(str(c - 1) for c in self.outdegrees)

    @cached_property
    def parents(self) -> Tuple[int, ...]:
        parent = [-1] * len(self)
        for v, kids in enumerate(self.children):
            for c in kids:
                parent[c] = v
        return tuple(parent)

    @property
    def leaves(self) -> int:
        return sum(1 for c in self.outdegrees if c == 0)

    @property
    def internal(self) -> int:
        return len(self) - self.leaves

    @cached_property
    def profile(self) -> Dict[int, int]:
        """phi: outdegree -> number of vertices with that outdegree."""
        counts: Dict[int, int] = {}
        for c in self.outdegrees:
            counts[c] = counts.get(c, 0) + 1
        return dict(sorted(counts.items()))

    def phi(self, i: int) -> int:
        return self.profile.get(i, 0)

    @property
    def internal_outdegrees(self) -> Tuple[int, ...]:
        """Outdegrees of the internal nodes in lexicographic order."""
        return tuple(c for c in self.outdegrees if c)

    def sorted_excess(self, k: Optional[int] = None) -> Tuple[int, ...]:
        """Largest ``k`` entries of (c_u - 1), in decreasing order."""
        excess = sorted((c - 1 for c in self.outdegrees), reverse=True)
        return tuple(excess[: len(excess) if k is None else k])

    @property
    def has_unary(self) -> bool:
        return 1 in self.profile

    def __repr__(self) -> str:
        return f"PlaneTree({self.key!r})"


@dataclass(frozen=True)
class LukasiewiczPath:
    """Step sequence of a walk; valid paths first hit -1 at their last step."""

    steps: Tuple[int, ...]

    @property
    def partial_sums(self) -> Tuple[int, ...]:
        sums = [0]
        for s in self.steps:
            sums.append(sums[-1] + s)
        return tuple(sums)

    @property
    def is_valid(self) -> bool:
        if not self.steps or any(s < -1 for s in self.steps):
            return False
        return first_hitting_time(self.steps, -1) == len(self.steps)


@dataclass(frozen=True)
class LeafAncestorDecomp:
    """Tree without unary vertices plus per-vertex unary-chain lengths."""

    reduced: PlaneTree
    ancestors: Tuple[int, ...]

    def __post_init__(self) -> None:
        """Validate the decomposition after initialization."""
        if len(self.ancestors) != len(self.reduced):
            raise ShapeMismatch(
                f"Expected {len(self.reduced)} ancestor counts, "
                f"got {len(self.ancestors)}"
            )
        if any(a < 0 for a in self.ancestors):
            raise ShapeMismatch("Ancestor counts must be nonnegative")
        if self.reduced.has_unary:
            raise ShapeMismatch("Reduced tree must not contain unary vertices")

    @property
    def size(self) -> int:
        return len(self.reduced) + sum(self.ancestors)


@dataclass(frozen=True)
class CoreLeafDecomp:
    """Tree of internal nodes plus per-corner grafted leaf counts."""

    core: PlaneTree
    leaf_seq: Tuple[int, ...] = field(default=())

    def __post_init__(self) -> None:
        """Validate the decomposition after initialization."""
        expected = 2 * len(self.core) - 1
        if len(self.leaf_seq) != expected:
            raise ShapeMismatch(
                f"Expected {expected} corner counts, got {len(self.leaf_seq)}"
            )
        if any(q < 0 for q in self.leaf_seq):
            raise ShapeMismatch("Corner counts must be nonnegative")

    @property
    def size(self) -> int:
        return len(self.core) + self.core.leaves + sum(self.leaf_seq)


def luka_encode(t: PlaneTree) -> LukasiewiczPath:
    """Lukasiewicz path of a tree: steps c_u - 1 in lexicographic order."""
    return LukasiewiczPath(tuple(c - 1 for c in t.outdegrees))


def luka_decode(p: LukasiewiczPath) -> PlaneTree:
    """
    Inverse of :func:`luka_encode`.

    Raises:
        InvalidPath: If the steps do not form a first-passage path to -1
    """
    if any(s < -1 for s in p.steps):
        raise InvalidPath(f"Steps below -1 in {p.steps}")
    return PlaneTree.from_outdegrees([s + 1 for s in p.steps])


def first_hitting_time(steps: Sequence[int], level: int) -> Optional[int]:
    """Smallest i with W_i = level (W_0 = 0), or None."""
    total = 0
    if level == 0:
        return 0
    for i, s in enumerate(steps, start=1):
        total += s
        if total == level:
            return i
    return None


def cyclic_shift(steps: Sequence[int], r: int) -> Tuple[int, ...]:
    """Rotation starting at position r."""
    r %= len(steps)
    return tuple(steps[r:]) + tuple(steps[:r])


def good_rotation(steps: Sequence[int]) -> int:
    """
    Index of the unique rotation of a sum -1 sequence that is a valid path.

    The rotation starts right after the first position where the partial sums
    reach their overall minimum.

    Raises:
        InvalidPath: If the steps do not sum to -1 or contain a step below -1
    """
    if any(s < -1 for s in steps) or sum(steps) != -1:
        raise InvalidPath("Cyclic rotation needs steps >= -1 summing to -1")
    best, best_at, total = 1, 0, 0
    for i, s in enumerate(steps, start=1):
        total += s
        if total < best:
            best, best_at = total, i
    return best_at % len(steps)


def count_good_shifts(steps: Sequence[int]) -> int:
    """Number of cyclic shifts that first hit sum(steps) at time n."""
    n = len(steps)
    level = sum(steps)
    return sum(
        1 for r in range(n) if first_hitting_time(cyclic_shift(steps, r), level) == n
    )


def decompose_unary(t: PlaneTree) -> LeafAncestorDecomp:
    """
    Remove unary vertices, recording each kept vertex's unary chain.

    The chain between a kept vertex and its nearest kept ancestor belongs to
    the vertex; for the kept root it runs up to the original root.
    """
    deg = t.outdegrees
    parent = t.parents
    n = len(t)
    run = [0] * n
    for v in range(1, n):
        p = parent[v]
        run[v] = run[p] + 1 if deg[p] == 1 else 0
    kept = [v for v in range(n) if deg[v] != 1]
    reduced = PlaneTree.from_outdegrees([deg[v] for v in kept])
    return LeafAncestorDecomp(reduced, tuple(run[v] for v in kept))


def recompose_unary(d: LeafAncestorDecomp) -> PlaneTree:
    """Insert each vertex's unary chain above it."""
    degrees: List[int] = []
    for chain, deg in zip(d.ancestors, d.reduced.outdegrees):
        degrees.extend([1] * chain)
        degrees.append(deg)
    return PlaneTree.from_outdegrees(degrees)


def decompose_leaves(t: PlaneTree) -> CoreLeafDecomp:
    """
    Remove all leaves, recording the leaves grafted in every internal corner.

    Corners of an internal node are visited from the parent edge onwards: the
    corner before its first internal child, then between consecutive internal
    children, then after the last one. A core leaf has a single corner whose
    count excludes its forced leaf.

    Raises:
        NoInternalNode: If t is a single vertex
    """
    if len(t) == 1:
        raise NoInternalNode("A single vertex has no internal node to keep")
    deg = t.outdegrees
    core_degrees: List[int] = []
    seq: List[int] = []
    for u, kids in enumerate(t.children):
        if not deg[u]:
            continue
        internal_kids = 0
        run = 0
        for c in kids:
            if deg[c]:
                seq.append(run)
                run = 0
                internal_kids += 1
            else:
                run += 1
        seq.append(run - 1 if internal_kids == 0 else run)
        core_degrees.append(internal_kids)
    return CoreLeafDecomp(PlaneTree.from_outdegrees(core_degrees), tuple(seq))


def recompose_leaves(d: CoreLeafDecomp) -> PlaneTree:
    """Graft the corner leaves (plus one forced leaf per core leaf) back."""
    cdeg = d.core.outdegrees
    corners: List[Sequence[int]] = []
    offset = 0
    for c in cdeg:
        corners.append(d.leaf_seq[offset : offset + c + 1])
        offset += c + 1
    degrees: List[int] = []
    # (is_vertex, payload): payload is a core vertex or a leaf count
    stack: List[Tuple[bool, int]] = [(True, 0)]
    while stack:
        is_vertex, x = stack.pop()
        if not is_vertex:
            degrees.extend([0] * x)
            continue
        q = corners[x]
        forced = 1 if cdeg[x] == 0 else 0
        degrees.append(cdeg[x] + sum(q) + forced)
        items: List[Tuple[bool, int]] = []
        for j, child in enumerate(d.core.children[x]):
            items.append((False, q[j]))
            items.append((True, child))
        items.append((False, q[-1] + forced))
        stack.extend(reversed(items))
    return PlaneTree.from_outdegrees(degrees)


@dataclass(frozen=True)
class TreeFilter:
    """Restriction of an enumeration: leaf count, internal count, no unary."""

    leaves: Optional[int] = None
    internal: Optional[int] = None
    no_unary: bool = False

    @classmethod
    def parse(cls, text: str) -> "TreeFilter":
        """Parse ``none``, ``leaves=k``, ``internal=k``, ``no_unary`` or a list."""
        leaves: Optional[int] = None
        internal: Optional[int] = None
        no_unary = False
        for part in (p.strip() for p in text.split(",")):
            if part in ("", "none"):
                continue
            if part == "no_unary":
                no_unary = True
                continue
            name, sep, value = part.partition("=")
            if not sep or name not in ("leaves", "internal") or not value.isdigit():
                raise ValueError(f"Unknown tree filter {part!r}")
            if name == "leaves":
                leaves = int(value)
            else:
                internal = int(value)
        return cls(leaves, internal, no_unary)

    def accepts(self, t: PlaneTree) -> bool:
        if self.leaves is not None and t.leaves != self.leaves:
            return False
        if self.internal is not None and t.internal != self.internal:
            return False
        return not (self.no_unary and t.has_unary)


def iter_outdegree_sequences(
    n: int, flt: Optional[TreeFilter] = None
) -> List[Tuple[int, ...]]:
    """All valid outdegree sequences of length n, lexicographically ordered."""
    flt = flt or TreeFilter()
    max_leaves = n if flt.leaves is None else flt.leaves
    if flt.internal is not None:
        max_leaves = min(max_leaves, n - flt.internal)
    max_internal = n - (flt.leaves or 0)
    if flt.internal is not None:
        max_internal = min(max_internal, flt.internal)
    out: List[Tuple[int, ...]] = []
    seq = [0] * n

    def walk(pos: int, open_slots: int, zeros: int) -> None:
        remaining = n - pos
        if remaining == 0:
            if (flt.leaves is None or zeros == flt.leaves) and (
                flt.internal is None or n - zeros == flt.internal
            ):
                out.append(tuple(seq))
            return
        for d in range(remaining):
            new_open = open_slots - 1 + d
            if new_open > remaining - 1:
                break
            if new_open == 0 and remaining > 1:
                continue
            if d == 0:
                if zeros + 1 > max_leaves:
                    continue
            elif pos + 1 - zeros > max_internal or (d == 1 and flt.no_unary):
                continue
            seq[pos] = d
            walk(pos + 1, new_open, zeros + (d == 0))

    walk(0, 1, 0)
    return out


def enumerate_trees(
    n: int, flt: Optional[TreeFilter] = None, bound: Optional[int] = None
) -> List[PlaneTree]:
    """
    Exhaustive, duplicate-free list of plane trees with n vertices.

    Args:
        n: Number of vertices
        flt: Optional restriction (leaf count, internal count, no unary)
        bound: Largest n allowed; defaults to ``BGWLAB_MAX_ENUM``

    Returns:
        Trees in lexicographic order of their outdegree sequences

    Raises:
        BoundExceeded: If n is larger than the bound
    """
    limit = Settings.from_env().max_enum if bound is None else bound
    if n > limit:
        raise BoundExceeded(n, limit)
    if n < 1:
        return []
    return [PlaneTree.from_outdegrees(s) for s in iter_outdegree_sequences(n, flt)]


def _check_profile(profile: Mapping[int, int]) -> int:
    if any(j < 0 or c < 0 for j, c in profile.items()):
        raise InfeasibleProfile("Outdegrees and counts must be nonnegative")
    v = sum(profile.values())
    if v == 0 or sum(j * c for j, c in profile.items()) != v - 1:
        raise InfeasibleProfile(
            f"Profile {dict(profile)} has {v} vertices but "
            f"{sum(j * c for j, c in profile.items())} edges"
        )
    return v


def count_prescribed_degrees(profile: Mapping[int, int]) -> int:
    """
    Number of plane trees with exactly ``profile[j]`` vertices of outdegree j.

    Raises:
        InfeasibleProfile: If the profile cannot describe a tree
    """
    v = _check_profile(profile)
    multinomial = math.factorial(v)
    for count in profile.values():
        multinomial //= math.factorial(count)
    return multinomial // v


def enumerate_profile(profile: Mapping[int, int]) -> List[PlaneTree]:
    """All plane trees with the given outdegree profile, lexicographically."""
    v = _check_profile(profile)
    remaining = {j: c for j, c in sorted(profile.items()) if c}
    seq = [0] * v
    out: List[PlaneTree] = []

    def walk(pos: int, open_slots: int) -> None:
        if pos == v:
            out.append(PlaneTree.from_outdegrees(seq))
            return
        for d in list(remaining):
            if not remaining[d]:
                continue
            new_open = open_slots - 1 + d
            if new_open == 0 and pos + 1 < v:
                continue
            remaining[d] -= 1
            seq[pos] = d
            walk(pos + 1, new_open)
            remaining[d] += 1

    walk(0, 1)
    return out
