"""Padding samples with dummy elements, and truncating position vectors back.

The padded central ranking is ``1..theta`` (dummy prefix), the original
central relabeled to ``theta+1..theta+n``, then ``n+theta+1..n+2theta`` (dummy
suffix). The true central is unknown, but the dummies are extreme in every
padded central, so they can be added to an existing sample by continuing the
insertion procedure outwards: prefix dummies ``theta, theta-1, .., 1`` are
inserted with ``j ~ D_{a+1}`` elements *before* them, suffix dummies with
``j ~ D_{a+1}`` elements *after* them (``a`` = current length). Each dummy's
inversions with the elements already present are exactly ``j``, so the result
is distributed as a Mallows sample around the padded central.

The estimator never needs the full padded rows. For a middle element ``i`` it
needs ``A_i`` (prefix dummies landing after ``i``) and ``B_i`` (suffix dummies
landing before ``i``):

* truncated padded rank of ``i`` = ``rank_i + (theta - A_i) + B_i``;
* with a reference that is the identity on the dummies, the padded front and
  back adjustments of ``i`` are ``A_i + front_i`` and ``B_i + back_i``.

:func:`pad` tracks only those counts. Most dummies land before every middle
element (prefix) or after all of them (suffix), which only shifts a per-row
offset; the few rows where a dummy lands inside the middle block are updated
element-wise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .mallows import draw_displacements
from .perm_core import Permutation, as_batch, batch_adjustment, batch_ranks

THETA_CAP = 5000


def default_theta(n: int, phi: float, eps: float, coeff: float = 10.0, cap: int = THETA_CAP) -> int:
    """``ceil(coeff * log(n / eps) / (1 - phi))``, capped at ``cap``."""
    if phi >= 1.0:
        raise ValueError("padding needs phi < 1")
    if phi == 0.0:
        return 0
    eps = max(eps, 1e-12)
    return int(min(cap, math.ceil(coeff * math.log(max(n / eps, 1.0 + 1e-12)) / (1.0 - phi))))


@dataclass
class PaddedInstance:
    theta: int
    inner_n: int
    phi: float
    middle: np.ndarray  # original samples, (s, n)
    prefix_after: np.ndarray  # A: prefix dummies after each middle element, indexed by element
    suffix_before: np.ndarray  # B: suffix dummies before each middle element
    full: np.ndarray | None = field(default=None, repr=False)

    @property
    def size(self) -> int:
        return self.middle.shape[0]

    @property
    def samples(self) -> np.ndarray:
        """The padded rows on ``n + 2 theta`` elements (only kept when materialized)."""
        if self.full is None:
            raise ValueError("instance was built without materialize=True")
        return self.full

    def trunc_ranks(self) -> np.ndarray:
        """Truncated padded position vectors, one row per sample."""
        return batch_ranks(self.middle) + (self.theta - self.prefix_after) + self.suffix_before

    def adjustments(self, current: Permutation) -> tuple[np.ndarray, np.ndarray]:
        """Truncated padded front/back adjustment vectors w.r.t. ``current`` (middle order)."""
        front, back = batch_adjustment(self.middle, current)
        return front + self.prefix_after, back + self.suffix_before


def trunc(v, theta: int) -> np.ndarray:
    """Drop the first and last ``theta`` entries."""
    v = np.asarray(v)
    if theta < 0 or v.shape[-1] < 2 * theta:
        raise ValueError(f"cannot truncate length {v.shape[-1]} by theta={theta}")
    return v[..., theta:v.shape[-1] - theta]


def pad(
    samples,
    phi: float,
    eps: float,
    rng: np.random.Generator,
    theta_override: int | None = None,
    theta_coeff: float = 10.0,
    theta_cap: int = THETA_CAP,
    materialize: bool = False,
) -> PaddedInstance:
    if phi >= 1.0:
        raise ValueError("padding needs phi < 1")
    middle = as_batch(samples)
    s, n = middle.shape
    theta = theta_override if theta_override is not None else default_theta(n, phi, eps, theta_coeff, theta_cap)
    ranks = batch_ranks(middle)
    a_cnt = np.zeros((s, n), dtype=np.int64)
    b_cnt = np.zeros((s, n), dtype=np.int64)
    rows = [list(r + theta) for r in middle] if materialize else None

    # prefix phase. ahead[k, i] + off[k] = elements currently before middle element i
    ahead = ranks - 1
    off = np.zeros(s, dtype=np.int64)
    low = ahead.min(axis=1) if n else off.copy()
    size = n
    for t in range(theta, 0, -1):
        j = draw_displacements(size + 1, phi, s, rng)
        hit = np.flatnonzero(j > low + off)
        if hit.size:
            # the dummy lands behind some middle elements of these rows
            sub = ahead[hit]
            after = (sub + off[hit, None]) < j[hit, None]
            a_cnt[hit] += after
            sub -= after
            ahead[hit] = sub
            low[hit] = sub.min(axis=1)
        off += 1
        if rows is not None:
            for k in range(s):
                rows[k].insert(int(j[k]), t)
        size += 1

    # suffix phase. behind[k, i] + off[k] = elements currently after middle element i
    behind = (n - ranks) + a_cnt
    off = np.zeros(s, dtype=np.int64)
    low = behind.min(axis=1) if n else off.copy()
    for t in range(n + theta + 1, n + 2 * theta + 1):
        j = draw_displacements(size + 1, phi, s, rng)
        hit = np.flatnonzero(j > low + off)
        if hit.size:
            sub = behind[hit]
            before = (sub + off[hit, None]) < j[hit, None]
            b_cnt[hit] += before
            sub -= before
            behind[hit] = sub
            low[hit] = sub.min(axis=1)
        off += 1
        if rows is not None:
            for k in range(s):
                rows[k].insert(len(rows[k]) - int(j[k]), t)
        size += 1

    full = np.array(rows, dtype=np.int64).reshape(s, n + 2 * theta) if rows is not None else None
    return PaddedInstance(theta, n, phi, middle, a_cnt, b_cnt, full)
