"""Streaming simple random walk on Z^d and the trajectory transforms.

The walker here is the reference implementation of the same splitmix64
counter stream the numba kernels use, so a trajectory materialized in
Python is bit-for-bit the walk a kernel simulates for the same
(master seed, trial) pair.  The heavy estimators never materialize
trajectories; this module serves construction, transforms, and
cross-checks.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

from .lattice import NNPath, Point, PointSet, origin

_MASK = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15


def _mix64(z: int) -> int:
    z &= _MASK
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
    return z ^ (z >> 31)


def child_seed(master_seed: int, trial: int) -> int:
    """Deterministic per-trial stream state, independent of execution order."""
    return _mix64((master_seed & _MASK) ^ _mix64(trial + 1))


class WalkStream:
    """A single-owner simple-random-walk stream on Z^d.

    Each advance moves to one of the 2d neighbors uniformly: a 64-bit
    counter output r maps to direction u = floor(high32(r) * 2d / 2^32),
    and u to sign * e_{u//2 + 1} with even u positive.
    """

    def __init__(self, d: int, master_seed: int, trial: int = 0,
                 start: Optional[Point] = None):
        if d < 1:
            raise ValueError(f"dimension must be >= 1, got {d}")
        start = origin(d) if start is None else tuple(start)
        if len(start) != d:
            raise ValueError(f"start has dimension {len(start)}, expected {d}")
        self.d = d
        self.position = start
        self.steps = 0
        self._state = child_seed(master_seed, trial)

    def advance(self) -> Point:
        self._state = (self._state + _GOLDEN) & _MASK
        r = _mix64(self._state)
        u = ((r >> 32) * 2 * self.d) >> 32
        axis, sign = u >> 1, 1 - 2 * (u & 1)
        pos = list(self.position)
        pos[axis] += sign
        self.position = tuple(pos)
        self.steps += 1
        return self.position


def sample_trajectory(d: int, steps: int, seed: int, start: Optional[Point] = None,
                      trial: int = 0) -> NNPath:
    """Materialize a walk of `steps` steps; deterministic in (d, steps, seed, start)."""
    if steps < 0:
        raise ValueError(f"steps must be >= 0, got {steps}")
    stream = WalkStream(d, seed, trial=trial, start=start)
    pts = [stream.position]
    for _ in range(steps):
        pts.append(stream.advance())
    return NNPath(tuple(pts))


def hit_time(path: NNPath, target: PointSet) -> Optional[int]:
    """Smallest index n >= 0 with path[n] in target, or None."""
    if len(target) == 0:
        return None
    for n, p in enumerate(path):
        if p in target:
            return n
    return None


def first_return_time(path: NNPath, target: PointSet) -> Optional[int]:
    """Smallest index n >= 1 with path[n] in target, or None."""
    if len(target) == 0:
        return None
    for n in range(1, len(path)):
        if path[n] in target:
            return n
    return None


@dataclass
class CoverTracker:
    """Shrinking set of uncovered targets; records the completing step."""

    remaining: set
    completed_at: Optional[int] = None

    def visit(self, p: Point, step: int) -> None:
        if self.completed_at is not None:
            return
        self.remaining.discard(p)
        if not self.remaining:
            self.completed_at = step

    @property
    def done(self) -> bool:
        return self.completed_at is not None


def cover_completion(stream: WalkStream, target: PointSet, horizon: int) -> Optional[int]:
    """Advance the stream until the target is covered or the horizon hits.

    The stream's current position counts as visited at step 0.  Returns the
    first step index at which the last target point is visited, or None.
    """
    if horizon < 0:
        raise ValueError(f"horizon must be >= 0, got {horizon}")
    if len(target) and stream.d != target.dimension:
        raise ValueError("stream and target dimensions differ")
    tracker = CoverTracker(set(target.members))
    tracker.visit(stream.position, stream.steps)
    start_steps = stream.steps
    while not tracker.done and stream.steps - start_steps < horizon:
        p = stream.advance()
        tracker.visit(p, stream.steps - start_steps)
    return tracker.completed_at


def difference_walk(path: Sequence[Point]) -> tuple[Point, ...]:
    """Consecutive-coordinate differences: (x1-x2, ..., x^{d-1}-x^d) per point.

    Maps a d-dim trajectory to the (d-1)-dim non-simple walk that sits at
    the zero vector exactly when the trajectory is on the diagonal.
    """
    first = path[0]
    if len(first) < 2:
        raise ValueError("difference walk needs dimension >= 2")
    return tuple(
        tuple(p[i] - p[i + 1] for i in range(len(p) - 1)) for p in path
    )


def z_walk(path: Sequence[Point]) -> tuple[int, ...]:
    """Common coordinate recorded at every diagonal visit of a Z^3 path.

    The path must start on the diagonal; the emitted sequence starts with
    that common coordinate.  (A sum-of-coordinates convention would emit
    3x this sequence; recording the common coordinate instead makes the
    interval {0..floor(N/3)} the natural cover target.)
    """
    first = path[0]
    if len(set(first)) != 1:
        raise ValueError(f"path must start on the diagonal, got {first}")
    out = []
    for p in path:
        it = iter(p)
        v = next(it)
        if all(c == v for c in it):
            out.append(v)
    return tuple(out)
