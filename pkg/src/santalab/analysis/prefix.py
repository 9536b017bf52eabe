"""Statistics of the first ``floor(eps m)`` arrivals of a public/private run."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from santalab.core import ArrivalOrder, Instance
from santalab.errors import DimensionError, DomainError


@dataclass(frozen=True, slots=True)
class PrefixStats:
    """Counts observed in the prefix.

    ``missing_private_types`` lists the agents that own at least one private
    item but received none of them inside the prefix.
    """

    eps_fraction: float
    prefix_len: int
    public_count: int
    public_fraction_of_k: float
    missing_private_types: tuple[int, ...]

    @property
    def all_private_types_seen(self) -> bool:
        return not self.missing_private_types


def prefix_stats(instance: Instance, order: ArrivalOrder, eps: float) -> PrefixStats:
    """Inspect the first ``floor(eps m)`` items of ``order``.

    Raises
    ------
    DomainError
        When ``eps`` is outside ``(0, 1]`` or the instance does not say which
        items are public.
    """

    if not 0.0 < eps <= 1.0:
        msg = f"Prefix fraction must lie in (0, 1], got {eps!r}."
        raise DomainError(msg)
    mask = instance.public_mask
    k = instance.metadata.k
    if mask is None or k is None:
        msg = "Prefix statistics need public item flags and k on the instance."
        raise DomainError(msg)
    if len(order) != instance.n_items:
        msg = f"Order has {len(order)} items, instance has {instance.n_items}."
        raise DimensionError(msg)

    m = instance.n_items
    length = math.floor(eps * m)
    prefix = order.as_array()[:length]
    private_owner = np.argmax(instance.values, axis=1)
    owners = set(private_owner[~mask].tolist())
    seen = set(private_owner[prefix[~mask[prefix]]].tolist())
    public_count = int(mask[prefix].sum())
    return PrefixStats(
        eps_fraction=float(eps),
        prefix_len=length,
        public_count=public_count,
        public_fraction_of_k=public_count / k,
        missing_private_types=tuple(sorted(owners - seen)),
    )


__all__ = ["PrefixStats", "prefix_stats"]
