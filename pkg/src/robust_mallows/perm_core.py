"""Permutation arithmetic.

Permutations are stored in one-line notation with 1-based element labels:
``mapping[p]`` is the element ranked ``p + 1``-th. The inverse (element -> rank,
also 1-based) is cached on construction, since both directions are used
constantly.

Batches of permutations are plain ``(s, n)`` integer arrays whose rows are
one-line permutations; the ``batch_*`` helpers operate on those directly.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np


class DimensionError(ValueError):
    """Raised when two objects that must share a length do not."""


class Permutation:
    """Immutable permutation of ``{1..n}`` in one-line notation."""

    __slots__ = ("_mapping", "_inverse", "_hash")

    def __init__(self, mapping: Iterable[int]):
        arr = np.array(list(mapping) if not isinstance(mapping, np.ndarray) else mapping, dtype=np.int64)
        if arr.ndim != 1:
            raise ValueError("permutation must be one-dimensional")
        n = arr.size
        if n and (arr.min() != 1 or arr.max() != n or np.unique(arr).size != n):
            raise ValueError(f"not a permutation of 1..{n}: {arr.tolist()}")
        inv = np.empty(n, dtype=np.int64)
        inv[arr - 1] = np.arange(1, n + 1)
        arr.flags.writeable = False
        inv.flags.writeable = False
        self._mapping = arr
        self._inverse = inv
        self._hash = None

    @classmethod
    def identity(cls, n: int) -> "Permutation":
        return cls(np.arange(1, n + 1))

    @classmethod
    def from_ranks(cls, ranks: Sequence[int]) -> "Permutation":
        """Build from a position vector (entry ``i`` = rank of element ``i + 1``)."""
        ranks = np.asarray(ranks, dtype=np.int64)
        mapping = np.empty_like(ranks)
        mapping[ranks - 1] = np.arange(1, ranks.size + 1)
        return cls(mapping)

    @property
    def mapping(self) -> np.ndarray:
        return self._mapping

    @property
    def inverse(self) -> np.ndarray:
        return self._inverse

    @property
    def n(self) -> int:
        return int(self._mapping.size)

    def __len__(self) -> int:
        return self.n

    def reversed(self) -> "Permutation":
        return Permutation(self._mapping[::-1].copy())

    def to_list(self) -> list[int]:
        return [int(x) for x in self._mapping]

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Permutation):
            return NotImplemented
        return self.n == other.n and bool(np.array_equal(self._mapping, other._mapping))

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash(self._mapping.tobytes())
        return self._hash

    def __repr__(self) -> str:
        body = ",".join(str(int(x)) for x in self._mapping[:12])
        if self.n > 12:
            body += ",..."
        return f"Permutation({body})"


def _check_same_length(a: Permutation, b: Permutation) -> None:
    if a.n != b.n:
        raise DimensionError(f"length mismatch: {a.n} vs {b.n}")


def _count_inversions(seq: np.ndarray) -> int:
    """Merge-sort inversion count, O(n log n)."""
    a = [int(x) for x in seq]
    buf = [0] * len(a)
    total = 0
    width = 1
    n = len(a)
    while width < n:
        for lo in range(0, n - width, 2 * width):
            mid = lo + width
            hi = min(lo + 2 * width, n)
            i, j, k = lo, mid, lo
            while i < mid and j < hi:
                if a[i] <= a[j]:
                    buf[k] = a[i]
                    i += 1
                else:
                    buf[k] = a[j]
                    total += mid - i
                    j += 1
                k += 1
            buf[k:k + mid - i] = a[i:mid]
            k += mid - i
            buf[k:k + hi - j] = a[j:hi]
            a[lo:hi] = buf[lo:hi]
        width *= 2
    return total


def kendall_tau(a: Permutation, b: Permutation) -> int:
    """Number of element pairs ordered differently by ``a`` and ``b``."""
    _check_same_length(a, b)
    # ranks under b of a's elements, in a's order
    return _count_inversions(b.inverse[a.mapping - 1])


def kendall_tau_naive(a: Permutation, b: Permutation) -> int:
    """O(n^2) reference count, kept as a test oracle."""
    _check_same_length(a, b)
    ra, rb = a.inverse, b.inverse
    n = a.n
    count = 0
    for x in range(n):
        for y in range(x + 1, n):
            if (ra[x] - ra[y]) * (rb[x] - rb[y]) < 0:
                count += 1
    return count


def position_vector(p: Permutation) -> np.ndarray:
    """Entry ``i`` (0-based) is the rank of element ``i + 1``."""
    return p.inverse.copy()


def l2_distance(u: Sequence[float], v: Sequence[float]) -> float:
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    if u.shape != v.shape:
        raise DimensionError(f"shape mismatch: {u.shape} vs {v.shape}")
    return float(np.linalg.norm(u - v))


def restrict(p: Permutation, elements: Iterable[int]) -> Permutation:
    """Order induced by ``p`` on ``elements``, relabeled onto ``1..k``.

    Relabeling is stable: the smallest element of the set becomes 1, the next 2,
    and so on.
    """
    elems = sorted(set(int(e) for e in elements))
    if elems and (elems[0] < 1 or elems[-1] > p.n):
        raise ValueError(f"elements out of range 1..{p.n}")
    label = {e: i + 1 for i, e in enumerate(elems)}
    ordered = sorted(elems, key=lambda e: p.inverse[e - 1])
    return Permutation([label[e] for e in ordered])


def difference_set(p: Permutation, s: Permutation) -> list[tuple[int, int]]:
    """Ordered pairs ``(x, y)`` with x before y in ``p`` and y before x in ``s``."""
    _check_same_length(p, s)
    out = []
    m = p.mapping
    rs = s.inverse
    for i in range(p.n):
        x = int(m[i])
        for j in range(i + 1, p.n):
            y = int(m[j])
            if rs[y - 1] < rs[x - 1]:
                out.append((x, y))
    return out


def weighted_inversion_sum(p: Permutation, s: Permutation) -> int:
    """Sum of rank gaps in ``p`` over the difference set of ``(p, s)``."""
    _check_same_length(p, s)
    a = s.inverse[p.mapping - 1]  # ranks in s, read in p's order
    pos = np.arange(p.n)
    inverted = np.triu(a[None, :] < a[:, None], 1)
    return int(((pos[None, :] - pos[:, None]) * inverted).sum())


@dataclass(frozen=True)
class AdjustmentVectors:
    """Front and back adjustments of a permutation relative to a reference.

    ``front[i]``: elements ranked before ``i + 1`` in the reference but after it
    in the permutation. ``back[i]``: elements ranked after it in the reference
    but before it in the permutation.
    """

    front: np.ndarray
    back: np.ndarray


def adjustment_vectors(p: Permutation, ref: Permutation) -> AdjustmentVectors:
    _check_same_length(p, ref)
    front, back = batch_adjustment(p.mapping[None, :], ref)
    return AdjustmentVectors(front=front[0], back=back[0])


def sort_to_permutation(v: Sequence[float], locked_prefix: int = 0, locked_suffix: int = 0) -> Permutation:
    """Rank entries of ``v`` ascending; ties go to the smaller element index.

    With locks, the output lives on ``locked_prefix + len(v) + locked_suffix``
    elements: the prefix ``1..locked_prefix`` and the suffix block are kept in
    identity order and entry ``i`` of ``v`` drives element ``locked_prefix + i + 1``.
    """
    v = np.asarray(v, dtype=float)
    order = np.argsort(v, kind="stable") + 1
    if locked_prefix == 0 and locked_suffix == 0:
        return Permutation(order)
    n = v.size
    head = np.arange(1, locked_prefix + 1)
    tail = np.arange(locked_prefix + n + 1, locked_prefix + n + locked_suffix + 1)
    return Permutation(np.concatenate([head, order + locked_prefix, tail]))


# ---------------------------------------------------------------------------
# batch helpers on (s, n) arrays of one-line rows


def as_batch(samples) -> np.ndarray:
    """Coerce a list of Permutations / sequences into an ``(s, n)`` int array."""
    if isinstance(samples, np.ndarray):
        arr = samples
    else:
        rows = [p.mapping if isinstance(p, Permutation) else np.asarray(p) for p in samples]
        if not rows:
            return np.zeros((0, 0), dtype=np.int64)
        arr = np.stack(rows)
    return np.asarray(arr, dtype=np.int64)


def batch_ranks(samples: np.ndarray) -> np.ndarray:
    """Position vectors of each row: ``out[k, e - 1]`` is the rank of ``e`` in row k."""
    s, n = samples.shape
    out = np.empty_like(samples)
    rows = np.arange(s)[:, None]
    out[rows, samples - 1] = np.arange(1, n + 1)[None, :]
    return out


def _chunk_rows(s: int, n: int, budget: int = 4_000_000) -> int:
    return max(1, budget // max(1, n * n))


def batch_kendall_tau(samples: np.ndarray, ref: Permutation) -> np.ndarray:
    """Kendall-tau distance of every row to ``ref``."""
    s, n = samples.shape
    if n != ref.n:
        raise DimensionError(f"length mismatch: {n} vs {ref.n}")
    # rank in sample of ref's k-th element
    seq = batch_ranks(samples)[:, ref.mapping - 1]
    out = np.zeros(s, dtype=np.int64)
    for k in range(1, n):
        out += (seq[:, :k] > seq[:, k:k + 1]).sum(axis=1)
    return out


def batch_adjustment(samples: np.ndarray, ref: Permutation) -> tuple[np.ndarray, np.ndarray]:
    """Front/back adjustment vectors of every row relative to ``ref``.

    Both outputs are ``(s, n)`` and indexed by element (column ``e - 1``).
    """
    s, n = samples.shape
    if n != ref.n:
        raise DimensionError(f"length mismatch: {n} vs {ref.n}")
    seq = batch_ranks(samples)[:, ref.mapping - 1]
    if s * n * n <= 4_000_000:
        # small batches: one broadcast comparison, [row, j, k] = seq_j vs seq_k
        j, k = np.arange(n)[:, None], np.arange(n)[None, :]
        front_r = ((seq[:, :, None] > seq[:, None, :]) & (j < k)).sum(axis=1)
        back_r = ((seq[:, :, None] < seq[:, None, :]) & (j > k)).sum(axis=1)
    else:
        front_r = np.zeros((s, n), dtype=np.int64)
        back_r = np.zeros((s, n), dtype=np.int64)
        for k in range(n):
            col = seq[:, k:k + 1]
            if k:
                front_r[:, k] = (seq[:, :k] > col).sum(axis=1)
            if k < n - 1:
                back_r[:, k] = (seq[:, k + 1:] < col).sum(axis=1)
    front = np.empty_like(front_r)
    back = np.empty_like(back_r)
    front[:, ref.mapping - 1] = front_r
    back[:, ref.mapping - 1] = back_r
    return front, back


def pairwise_preferences(samples: np.ndarray) -> np.ndarray:
    """``W[x, y]`` = fraction of rows placing element ``x + 1`` before ``y + 1``."""
    s, n = samples.shape
    ranks = batch_ranks(samples)
    w = np.zeros((n, n), dtype=float)
    step = _chunk_rows(s, n)
    for lo in range(0, s, step):
        r = ranks[lo:lo + step]
        w += (r[:, :, None] < r[:, None, :]).sum(axis=0)
    return w / max(s, 1)


def mean_rank_order(samples: np.ndarray) -> Permutation:
    """Sort the coordinate-wise mean of the rows' position vectors."""
    samples = as_batch(samples)
    if samples.shape[0] == 0:
        raise ValueError("need at least one sample")
    return sort_to_permutation(batch_ranks(samples).mean(axis=0))
