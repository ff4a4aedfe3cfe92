"""Integer lattice geometry: points, nearest-neighbor paths, point sets.

Everything here is exact integer arithmetic on Z^d.  Points are plain
tuples of ints so they hash and compare coordinate-wise for free; paths
and sets are thin immutable wrappers that enforce the structural
invariants (unit L1 steps, uniform dimension).

Coordinates are assumed to stay well inside 64-bit range (all shipped
experiments keep |coord| < 2^40).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

Point = tuple[int, ...]


def l1_norm(p: Point) -> int:
    """Sum of absolute coordinate values."""
    return sum(abs(c) for c in p)


def origin(d: int) -> Point:
    return (0,) * d


def unit(d: int, axis: int, sign: int = 1) -> Point:
    """The point sign * e_{axis+1} in Z^d (axis is 0-based)."""
    p = [0] * d
    p[axis] = sign
    return tuple(p)


def add(p: Point, q: Point) -> Point:
    return tuple(a + b for a, b in zip(p, q))


@dataclass(frozen=True)
class NNPath:
    """A nearest-neighbor path: consecutive points at L1 distance exactly 1.

    Construct through :func:`validate_nn_path` (or the path builders below,
    which produce valid paths by construction).
    """

    points: tuple[Point, ...]

    @property
    def dimension(self) -> int:
        return len(self.points[0])

    def __len__(self) -> int:
        return len(self.points)

    def __getitem__(self, i):
        return self.points[i]

    def __iter__(self):
        return iter(self.points)

    def trace(self) -> "PointSet":
        """The set of sites the path visits."""
        return PointSet(frozenset(self.points))


@dataclass(frozen=True)
class PointSet:
    """A finite set of equal-dimension lattice points with O(1) membership."""

    members: frozenset

    @property
    def dimension(self) -> int:
        return len(next(iter(self.members)))

    def __len__(self) -> int:
        return len(self.members)

    def __contains__(self, p: Point) -> bool:
        return p in self.members

    def __iter__(self):
        return iter(self.members)

    def sorted_points(self) -> list[Point]:
        return sorted(self.members)


def point_set(points: Iterable[Point]) -> PointSet:
    """Build a PointSet, checking that all points share one dimension."""
    members = frozenset(tuple(p) for p in points)
    dims = {len(p) for p in members}
    if len(dims) > 1:
        raise ValueError(f"mixed dimensions in point set: {sorted(dims)}")
    return PointSet(members)


def validate_nn_path(points: Sequence[Point]) -> NNPath:
    """Check a point sequence is a nearest-neighbor path and wrap it.

    Raises ValueError naming the first offending index on a dimension
    mismatch or a non-unit step.
    """
    pts = tuple(tuple(p) for p in points)
    if not pts:
        raise ValueError("path must be non-empty")
    d = len(pts[0])
    for i, p in enumerate(pts):
        if len(p) != d:
            raise ValueError(f"dimension mismatch at index {i}: {len(p)} != {d}")
    for i in range(1, len(pts)):
        if l1_norm(tuple(a - b for a, b in zip(pts[i], pts[i - 1]))) != 1:
            raise ValueError(f"non-unit step at index {i}")
    return NNPath(pts)


def staircase_path(d: int, N: int) -> NNPath:
    """The covering-probability-maximizing staircase from 0 to the L1 sphere
    of radius N: repeat unit steps e_1, e_2, ..., e_d cyclically.

    The path has N+1 points, stays within max-minus-min coordinate spread 1
    of the diagonal, and its endpoint has L1 norm exactly N.
    """
    if d < 2:
        raise ValueError(f"staircase path needs d >= 2, got {d}")
    if N < 1:
        raise ValueError(f"staircase path needs N >= 1, got {N}")
    pos = [0] * d
    pts = [tuple(pos)]
    for step in range(N):
        pos[step % d] += 1
        pts.append(tuple(pos))
    return NNPath(tuple(pts))


def axis_path(d: int, N: int) -> NNPath:
    """The straight path (0, e_1, 2 e_1, ..., N e_1); comparison baseline."""
    if d < 1:
        raise ValueError(f"axis path needs d >= 1, got {d}")
    if N < 1:
        raise ValueError(f"axis path needs N >= 1, got {N}")
    pts = [unit(d, 0, m) if m else origin(d) for m in range(N + 1)]
    return NNPath(tuple(pts))


def diagonal_points(d: int, M: int) -> PointSet:
    """The diagonal segment {(m, ..., m) : 0 <= m <= M} in Z^d."""
    if d < 2:
        raise ValueError(f"diagonal needs d >= 2, got {d}")
    if M < 0:
        raise ValueError(f"diagonal needs M >= 0, got {M}")
    return PointSet(frozenset((m,) * d for m in range(M + 1)))


def dump_points(points: Iterable[Point]) -> str:
    """Serialize points to newline-delimited text, coordinates space-separated."""
    return "\n".join(" ".join(str(c) for c in p) for p in points) + "\n"


def load_points(text: str) -> list[Point]:
    return [tuple(int(tok) for tok in line.split()) for line in text.splitlines() if line.strip()]
