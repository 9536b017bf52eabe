"""Instance generators, arrival-order models and instance file IO.

The public/private construction places the public agent last (index
``n - 1``): private agent ``i < n - 1`` owns ``k`` items valued only by ``i``,
and ``k`` public items are valued 1 by everyone. All randomness flows through
:func:`santalab.seeding.make_rng`, so every generator is a pure function of its
seed.
"""

from __future__ import annotations

import logging
from collections.abc import Sequence
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Final

import numpy as np
from numpy.typing import ArrayLike

from santalab.core import (
    SIMPLEX_TOLERANCE,
    ArrivalOrder,
    FloatArray,
    Instance,
    InstanceFamily,
    InstanceMetadata,
    as_vector,
)
from santalab.errors import ConfigError
from santalab.seeding import derive_seed, make_rng, validate_seed
from santalab.services import FileService

logger = logging.getLogger(__name__)

DEFAULT_SEED: Final = 0


class OrderKind(Enum):
    """How the arrival order of an instance is chosen."""

    UNIFORM_RANDOM = "uniform_random"
    EXPLICIT = "explicit"
    PUBLIC_FIRST = "public_first"


@dataclass(frozen=True, slots=True)
class OrderModel:
    """Arrival-order model plus the parameters it needs."""

    kind: OrderKind = OrderKind.UNIFORM_RANDOM
    seed: int | None = None
    permutation: tuple[int, ...] | None = None

    def __post_init__(self) -> None:
        if self.kind is OrderKind.EXPLICIT and self.permutation is None:
            msg = "An explicit order model requires a permutation."
            raise ConfigError(msg)
        if self.seed is not None:
            validate_seed(self.seed)


@dataclass(frozen=True, slots=True)
class IidDistribution:
    """Finite-support distribution over item value vectors.

    ``support`` lists ``(probability, value_vector)`` pairs.
    """

    support: tuple[tuple[float, tuple[float, ...]], ...]

    def __post_init__(self) -> None:
        if not self.support:
            msg = "An IID distribution needs at least one support point."
            raise ConfigError(msg)
        probabilities = np.asarray([point[0] for point in self.support], dtype=float)
        if not np.isfinite(probabilities).all() or (probabilities < 0.0).any():
            msg = "Support probabilities must be finite and non-negative."
            raise ConfigError(msg)
        if abs(float(probabilities.sum()) - 1.0) > SIMPLEX_TOLERANCE:
            msg = f"Support probabilities sum to {probabilities.sum()!r}, not 1."
            raise ConfigError(msg)
        widths = {len(point[1]) for point in self.support}
        if len(widths) != 1 or 0 in widths:
            msg = "Every support vector must have the same non-zero length."
            raise ConfigError(msg)
        vectors = self.vectors
        if not np.isfinite(vectors).all() or (vectors < 0).any() or (vectors > 1).any():
            msg = "Support vectors must lie in [0, 1]^n."
            raise ConfigError(msg)

    @classmethod
    def from_pairs(
        cls, pairs: Sequence[tuple[float, Sequence[float]]]
    ) -> IidDistribution:
        return cls(
            tuple(
                (float(prob), tuple(float(v) for v in vector)) for prob, vector in pairs
            )
        )

    @property
    def n_agents(self) -> int:
        return len(self.support[0][1])

    @property
    def probabilities(self) -> FloatArray:
        return np.asarray([point[0] for point in self.support], dtype=np.float64)

    @property
    def vectors(self) -> FloatArray:
        return np.asarray([point[1] for point in self.support], dtype=np.float64)


def _require_counts(n: int, k: int) -> None:
    if n < 2:
        msg = f"The construction needs at least two agents, got n={n}."
        raise ConfigError(msg)
    if k < 1:
        msg = f"k must be at least 1, got {k}."
        raise ConfigError(msg)


def _require_probability(p: float, name: str = "p") -> float:
    value = float(p)
    if not 0.0 <= value <= 1.0:
        msg = f"{name} must lie in [0, 1], got {p!r}."
        raise ConfigError(msg)
    return value


# ----------------------------------------------------------------------
# Generators
# ----------------------------------------------------------------------
def gen_public_private(n: int, k: int) -> Instance:
    """Return the deterministic public/private instance with ``m = n k``.

    Items ``i k .. (i + 1) k - 1`` are private to agent ``i`` for
    ``i < n - 1``; the last ``k`` items are public.
    """

    _require_counts(n, k)
    private_rows = np.repeat(np.eye(n)[: n - 1], k, axis=0)
    public_rows = np.ones((k, n))
    values = np.vstack([private_rows, public_rows])
    flags = (False,) * ((n - 1) * k) + (True,) * k
    metadata = InstanceMetadata(
        family=InstanceFamily.PUBLIC_PRIVATE,
        k=k,
        public_item_flags=flags,
        private_counts=(k,) * (n - 1) + (0,),
    )
    return Instance(values, metadata)


def gen_binomial_public_private(n: int, k: int, p: float, seed: int) -> Instance:
    """Return the randomised construction with ``s_i ~ Binom(k, p)``.

    Agent ``i`` owns ``s_i`` private items and contributes ``k - s_i`` public
    items. Each ``s_i`` is the count of ``k`` seeded Bernoulli draws. Private
    items come first grouped by owner, public items last.
    """

    _require_counts(n, k)
    probability = _require_probability(p)
    rng = make_rng(seed)
    counts = (rng.random((n, k)) < probability).sum(axis=1).astype(int)

    private_rows = np.repeat(np.eye(n), counts, axis=0)
    n_public = int(n * k - counts.sum())
    public_rows = np.ones((n_public, n))
    values = np.vstack([private_rows, public_rows])
    flags = (False,) * int(counts.sum()) + (True,) * n_public
    metadata = InstanceMetadata(
        family=InstanceFamily.BINOMIAL,
        k=k,
        p=probability,
        seed=validate_seed(seed),
        public_item_flags=flags,
        private_counts=tuple(int(c) for c in counts),
    )
    logger.debug("binomial instance n=%d k=%d p=%s counts=%s", n, k, p, counts)
    return Instance(values, metadata)


def gen_iid(n: int, m: int, dist: IidDistribution, seed: int) -> Instance:
    """Sample ``m`` item rows independently from ``dist`` by inverse CDF."""

    if dist.n_agents != n:
        msg = f"Distribution vectors have length {dist.n_agents}, expected {n}."
        raise ConfigError(msg)
    if m < 1:
        msg = f"m must be at least 1, got {m}."
        raise ConfigError(msg)
    rng = make_rng(seed)
    cdf = np.cumsum(dist.probabilities)
    picks = np.searchsorted(cdf, rng.random(m), side="right")
    picks = np.minimum(picks, len(dist.support) - 1)
    metadata = InstanceMetadata(family=InstanceFamily.IID, seed=validate_seed(seed))
    return Instance(dist.vectors[picks], metadata)


def gen_iid_bernoulli(n: int, m: int, probs: ArrayLike, seed: int) -> Instance:
    """Unit-valued IID items: agent ``i`` values each item with prob ``probs[i]``."""

    probabilities = as_vector(probs, name="probs")
    if probabilities.shape[0] != n:
        msg = f"Expected {n} probabilities, got {probabilities.shape[0]}."
        raise ConfigError(msg)
    for value in probabilities:
        _require_probability(float(value), "probs")
    if m < 1:
        msg = f"m must be at least 1, got {m}."
        raise ConfigError(msg)
    rng = make_rng(seed)
    values = (rng.random((m, n)) < probabilities).astype(np.float64)
    metadata = InstanceMetadata(
        family=InstanceFamily.IID_BERNOULLI, seed=validate_seed(seed)
    )
    return Instance(values, metadata)


# ----------------------------------------------------------------------
# Orders
# ----------------------------------------------------------------------
def make_order(instance: Instance, model: OrderModel) -> ArrivalOrder:
    """Return the arrival order ``model`` prescribes for ``instance``."""

    m = instance.n_items
    if model.kind is OrderKind.EXPLICIT:
        assert model.permutation is not None
        if len(model.permutation) != m:
            msg = f"Explicit order has {len(model.permutation)} items, expected {m}."
            raise ConfigError(msg)
        return ArrivalOrder(model.permutation)

    if model.kind is OrderKind.PUBLIC_FIRST:
        mask = instance.public_mask
        if mask is None:
            msg = "public_first ordering needs public_item_flags on the instance."
            raise ConfigError(msg)
        indices = np.arange(m)
        return ArrivalOrder(tuple(np.concatenate([indices[mask], indices[~mask]])))

    seed = DEFAULT_SEED if model.seed is None else model.seed
    return ArrivalOrder(tuple(make_rng(seed).permutation(m)))


# ----------------------------------------------------------------------
# File IO
# ----------------------------------------------------------------------
def read_instance(path: Path) -> Instance:
    """Load an instance from its JSON file."""

    return FileService().read_instance(path)


def write_instance(instance: Instance, path: Path) -> None:
    """Persist ``instance`` to ``path`` in the canonical JSON format."""

    FileService().write_instance(path, instance)


def read_order(path: Path) -> ArrivalOrder:
    """Load an explicit arrival order stored as a JSON list."""

    return FileService().read_order(path)


def write_order(order: ArrivalOrder, path: Path) -> None:
    FileService().write_order(path, order)


__all__ = [
    "DEFAULT_SEED",
    "IidDistribution",
    "OrderKind",
    "OrderModel",
    "derive_seed",
    "gen_binomial_public_private",
    "gen_iid",
    "gen_iid_bernoulli",
    "gen_public_private",
    "make_order",
    "make_rng",
    "read_instance",
    "read_order",
    "write_instance",
    "write_order",
]
