"""Strong contamination: an adversary sees every honest sample, replaces a
fixed fraction of them, and shuffles the result."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from .mallows import MallowsModel, sample_many
from .perm_core import DimensionError, Permutation, as_batch, mean_rank_order, position_vector

KINDS = ("uniform_junk", "reversal", "targeted_shift", "mean_attack", "coalition")


@dataclass(frozen=True)
class CorruptedDataset:
    samples: np.ndarray
    eps: float
    # evaluation-only ground truth; estimators must receive ``samples`` alone
    mask: np.ndarray = field(repr=False)

    @property
    def n_corrupted(self) -> int:
        return int(self.mask.sum())


@dataclass(frozen=True)
class AdversaryStrategy:
    """A named attack plus its parameters.

    * ``uniform_junk``: independent uniformly random permutations.
    * ``reversal``: the reverse of ``central`` (default: the honest mean-rank consensus).
    * ``targeted_shift``: the consensus with ``element`` moved to the front or back.
    * ``mean_attack``: the permutation maximising ``<v_p, direction>``. Default
      direction points from the consensus towards the consensus rotated by n // 2.
    * ``coalition``: copies of ``preferred``.
    """

    kind: str
    params: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown strategy {self.kind!r}; expected one of {KINDS}")

    @classmethod
    def from_dict(cls, d: dict) -> "AdversaryStrategy":
        return cls(d["kind"], dict(d.get("params", {})))

    def to_dict(self) -> dict:
        return {"kind": self.kind, "params": self.params}


def maximizing_permutation(direction) -> Permutation:
    """The permutation whose position vector has the largest inner product with ``direction``.

    By the rearrangement inequality the largest ranks go to the largest
    coordinates; ties are broken towards the smaller element.
    """
    return Permutation(np.argsort(np.asarray(direction, dtype=float), kind="stable") + 1)


def rotated(p: Permutation, k: int) -> Permutation:
    return Permutation(np.roll(p.mapping, -k))


def _central_param(params: dict, honest: np.ndarray, key: str = "central") -> Permutation:
    if params.get(key) is not None:
        c = Permutation(params[key])
        if c.n != honest.shape[1]:
            raise DimensionError(f"{key} has length {c.n}, samples have {honest.shape[1]}")
        return c
    return mean_rank_order(honest)


def _replacements(honest: np.ndarray, k: int, strategy: AdversaryStrategy, rng: np.random.Generator) -> np.ndarray:
    s, n = honest.shape
    p = strategy.params
    if strategy.kind == "uniform_junk":
        return np.argsort(rng.random((k, n)), axis=1) + 1
    if strategy.kind == "reversal":
        target = _central_param(p, honest).reversed()
    elif strategy.kind == "targeted_shift":
        base = _central_param(p, honest)
        e = int(p["element"])
        rest = [x for x in base.to_list() if x != e]
        direction = p.get("direction", "front")
        if direction not in ("front", "back"):
            raise ValueError(f"direction must be 'front' or 'back', got {direction!r}")
        target = Permutation([e] + rest if direction == "front" else rest + [e])
    elif strategy.kind == "mean_attack":
        if p.get("direction") is not None:
            u = np.asarray(p["direction"], dtype=float)
            if u.size != n:
                raise DimensionError(f"direction has length {u.size}, samples have {n}")
        else:
            base = _central_param(p, honest)
            u = position_vector(rotated(base, n // 2)) - position_vector(base)
        target = maximizing_permutation(u)
    else:  # coalition
        target = Permutation(p["preferred"])
        if target.n != n:
            raise DimensionError(f"preferred has length {target.n}, samples have {n}")
    return np.tile(target.mapping, (k, 1))


def corrupt(honest, eps: float, strategy: AdversaryStrategy, rng: np.random.Generator) -> CorruptedDataset:
    """Replace exactly ``floor(eps * s)`` uniformly chosen samples, then shuffle."""
    if not 0.0 <= eps < 0.5:
        raise ValueError(f"eps must lie in [0, 0.5), got {eps}")
    honest = as_batch(honest)
    s = honest.shape[0]
    if s == 0:
        raise ValueError("need at least one honest sample")
    k = int(math.floor(eps * s))
    out = honest.copy()
    mask = np.zeros(s, dtype=bool)
    if k:
        idx = rng.choice(s, size=k, replace=False)
        out[idx] = _replacements(honest, k, strategy, rng)
        mask[idx] = True
    order = rng.permutation(s)
    return CorruptedDataset(out[order], eps, mask[order])


def coalition_scenario(
    m: int,
    c: int,
    model: MallowsModel,
    preferred: Permutation,
    rng: np.random.Generator,
    mode: str = "copies",
) -> CorruptedDataset:
    """``m - c`` honest Mallows voters and ``c`` colluders.

    ``mode="copies"``: colluders all submit ``preferred``. ``mode="mean_attack"``:
    they submit the permutation pushing the mean-rank consensus towards
    ``preferred``.
    """
    if c < 0 or c > 0.1 * m:
        raise ValueError(f"need 0 <= c <= 0.1 m, got c={c}, m={m}")
    honest = sample_many(model, m - c, rng)
    if mode == "copies":
        bad = preferred
    elif mode == "mean_attack":
        base = mean_rank_order(honest) if m > c else model.central
        bad = maximizing_permutation(position_vector(preferred) - position_vector(base))
    else:
        raise ValueError(f"unknown coalition mode {mode!r}")
    data = np.concatenate([honest, np.tile(bad.mapping, (c, 1))])
    mask = np.concatenate([np.zeros(m - c, dtype=bool), np.ones(c, dtype=bool)])
    order = rng.permutation(m)
    return CorruptedDataset(data[order], c / m if m else 0.0, mask[order])
