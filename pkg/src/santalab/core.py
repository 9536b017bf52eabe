"""Domain types shared by all santalab modules.

The records here describe one run of the online max-min allocation game: an
:class:`Instance` (``m`` items valued in ``[0, 1]`` by ``n`` agents), the
:class:`ArrivalOrder` in which the items are revealed, the per-step
:class:`FractionalAssignment` chosen by a policy, the accumulated
:class:`LoadVector` and the resulting :class:`Trace`. :class:`OptResult` carries
offline optima computed by :mod:`santalab.oracles`.

Value matrices are dense ``float64`` arrays stored row-major by item. Every
record is immutable after construction; arrays are copied and flagged
read-only so instances can be shared across parallel trials.
"""

from __future__ import annotations

from collections.abc import Mapping
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Final

import numpy as np
from numpy.typing import ArrayLike, NDArray

from santalab.errors import ConfigError, DataError, DimensionError, DomainError

FloatArray = NDArray[np.float64]
IntArray = NDArray[np.int64]

SIMPLEX_TOLERANCE: Final = 1e-12
REPLAY_TOLERANCE: Final = 1e-9
CERTIFICATE_TOLERANCE: Final = 1e-9


class InstanceFamily(Enum):
    """Generator that produced an instance."""

    PUBLIC_PRIVATE = "public_private"
    BINOMIAL = "binomial"
    IID = "iid"
    IID_BERNOULLI = "iid_bernoulli"
    ADVERSARIAL_TRAP = "adversarial_trap"
    CUSTOM = "custom"


class AssignmentMode(Enum):
    """Whether items may be split between agents."""

    FRACTIONAL = "fractional"
    INTEGRAL = "integral"


# ----------------------------------------------------------------------
# Array helpers
# ----------------------------------------------------------------------
def as_vector(values: ArrayLike, *, name: str = "vector") -> FloatArray:
    """Return ``values`` as a non-empty one dimensional ``float64`` array."""

    array = np.asarray(values, dtype=np.float64)
    if array.ndim != 1:
        msg = f"{name} must be one dimensional, got shape {array.shape}."
        raise DimensionError(msg)
    if array.size == 0:
        msg = f"{name} must not be empty."
        raise DimensionError(msg)
    return array


def require_finite(array: NDArray[Any], *, name: str = "vector") -> None:
    """Raise :class:`DomainError` when ``array`` holds NaN or infinity."""

    if not np.isfinite(array).all():
        msg = f"{name} contains non-finite entries."
        raise DomainError(msg)


def _readonly(array: NDArray[Any]) -> NDArray[Any]:
    array.setflags(write=False)
    return array


# ----------------------------------------------------------------------
# Instances
# ----------------------------------------------------------------------
@dataclass(frozen=True, slots=True)
class InstanceMetadata:
    """Generator provenance attached to an :class:`Instance`."""

    family: InstanceFamily = InstanceFamily.CUSTOM
    k: int | None = None
    p: float | None = None
    seed: int | None = None
    public_item_flags: tuple[bool, ...] | None = None
    private_counts: tuple[int, ...] | None = None

    def to_payload(self) -> dict[str, object]:
        """Return a JSON compatible mapping in canonical field order."""

        return {
            "family": self.family.value,
            "k": self.k,
            "p": self.p,
            "seed": self.seed,
            "public_item_flags": (
                None if self.public_item_flags is None else list(self.public_item_flags)
            ),
            "private_counts": (
                None if self.private_counts is None else list(self.private_counts)
            ),
        }

    @classmethod
    def from_payload(cls, payload: Mapping[str, Any]) -> InstanceMetadata:
        """Rebuild metadata from :meth:`to_payload` output."""

        try:
            family = InstanceFamily(payload.get("family", "custom"))
        except ValueError as exc:
            msg = f"Unknown instance family: {payload.get('family')!r}"
            raise DataError(msg) from exc

        flags = payload.get("public_item_flags")
        counts = payload.get("private_counts")
        k = payload.get("k")
        p = payload.get("p")
        seed = payload.get("seed")
        if flags is not None and not (
            isinstance(flags, list) and all(isinstance(flag, bool) for flag in flags)
        ):
            msg = "'public_item_flags' must be a list of booleans."
            raise DataError(msg)
        if counts is not None and not (
            isinstance(counts, list) and all(isinstance(c, int) for c in counts)
        ):
            msg = "'private_counts' must be a list of integers."
            raise DataError(msg)
        for key, value in (("k", k), ("seed", seed)):
            if value is not None and (
                isinstance(value, bool) or not isinstance(value, int)
            ):
                msg = f"'{key}' must be an integer."
                raise DataError(msg)
        if p is not None and (isinstance(p, bool) or not isinstance(p, (int, float))):
            msg = "'p' must be a number."
            raise DataError(msg)

        return cls(
            family=family,
            k=k,
            p=None if p is None else float(p),
            seed=seed,
            public_item_flags=None if flags is None else tuple(flags),
            private_counts=None if counts is None else tuple(counts),
        )


@dataclass(frozen=True, slots=True, eq=False)
class Instance:
    """``m`` items valued in ``[0, 1]`` by ``n`` agents.

    Entry ``values[t, i]`` is the value agent ``i`` has for item ``t``.
    """

    values: FloatArray
    metadata: InstanceMetadata = field(default_factory=InstanceMetadata)

    def __post_init__(self) -> None:
        matrix = np.array(self.values, dtype=np.float64)
        if matrix.ndim != 2:
            msg = f"Value matrix must be two dimensional, got shape {matrix.shape}."
            raise DimensionError(msg)
        n_items, n_agents = matrix.shape
        if n_items < 1 or n_agents < 1:
            msg = "An instance needs at least one agent and one item."
            raise DimensionError(msg)
        require_finite(matrix, name="Value matrix")
        if (matrix < 0.0).any() or (matrix > 1.0).any():
            msg = "Every value must lie in [0, 1]."
            raise DomainError(msg)

        flags = self.metadata.public_item_flags
        if flags is not None:
            if len(flags) != n_items:
                msg = (
                    f"public_item_flags has length {len(flags)}, "
                    f"expected {n_items}."
                )
                raise DimensionError(msg)
            flagged = np.asarray(flags, dtype=bool)
            if not (matrix[flagged] == 1.0).all():
                msg = "Items flagged public must have all-ones value rows."
                raise DomainError(msg)

        object.__setattr__(self, "values", _readonly(matrix))

    @property
    def n_agents(self) -> int:
        return int(self.values.shape[1])

    @property
    def n_items(self) -> int:
        return int(self.values.shape[0])

    @property
    def public_mask(self) -> NDArray[np.bool_] | None:
        """Boolean mask of public items, or ``None`` when not recorded."""

        flags = self.metadata.public_item_flags
        if flags is None:
            return None
        return np.asarray(flags, dtype=bool)

    def is_unit_valued(self) -> bool:
        """Return ``True`` when every value is exactly 0 or 1."""

        return bool(np.isin(self.values, (0.0, 1.0)).all())

    def to_payload(self) -> dict[str, object]:
        """Return the canonical JSON mapping ``{n, m, values, metadata}``."""

        return {
            "n": self.n_agents,
            "m": self.n_items,
            "values": self.values.tolist(),
            "metadata": self.metadata.to_payload(),
        }

    @classmethod
    def from_payload(cls, payload: Mapping[str, Any]) -> Instance:
        """Validate and rebuild an instance from its JSON mapping."""

        for key in ("n", "m", "values"):
            if key not in payload:
                msg = f"Instance payload is missing the '{key}' field."
                raise DataError(msg)
        raw_metadata = payload.get("metadata") or {}
        if not isinstance(raw_metadata, Mapping):
            msg = "'metadata' must be a JSON object."
            raise DataError(msg)
        metadata = InstanceMetadata.from_payload(raw_metadata)

        try:
            matrix = np.asarray(payload["values"], dtype=np.float64)
            instance = cls(values=matrix, metadata=metadata)
        except (TypeError, ValueError) as exc:
            msg = f"Invalid value matrix: {exc}"
            raise DataError(msg) from exc

        if instance.n_agents != payload["n"] or instance.n_items != payload["m"]:
            msg = (
                f"Declared shape ({payload['m']} items, {payload['n']} agents) does "
                f"not match the value matrix {instance.values.shape}."
            )
            raise DataError(msg)
        return instance

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Instance):
            return NotImplemented
        return self.metadata == other.metadata and bool(
            np.array_equal(self.values, other.values)
        )


# ----------------------------------------------------------------------
# Orders, loads and assignments
# ----------------------------------------------------------------------
@dataclass(frozen=True, slots=True)
class ArrivalOrder:
    """A permutation of item indices giving the online presentation order."""

    permutation: tuple[int, ...]

    def __post_init__(self) -> None:
        permutation = tuple(int(index) for index in self.permutation)
        if not permutation:
            msg = "An arrival order must contain at least one item."
            raise ConfigError(msg)
        if sorted(permutation) != list(range(len(permutation))):
            msg = "Arrival order is not a permutation of 0..m-1."
            raise ConfigError(msg)
        object.__setattr__(self, "permutation", permutation)

    @classmethod
    def identity(cls, n_items: int) -> ArrivalOrder:
        return cls(tuple(range(n_items)))

    def as_array(self) -> IntArray:
        return np.asarray(self.permutation, dtype=np.int64)

    def __len__(self) -> int:
        return len(self.permutation)


@dataclass(frozen=True, slots=True, eq=False)
class LoadVector:
    """Accumulated value per agent."""

    loads: FloatArray

    def __post_init__(self) -> None:
        loads = np.array(as_vector(self.loads, name="Load vector"), dtype=np.float64)
        require_finite(loads, name="Load vector")
        if (loads < 0.0).any():
            msg = "Loads must be non-negative."
            raise DomainError(msg)
        object.__setattr__(self, "loads", _readonly(loads))

    @classmethod
    def zeros(cls, n_agents: int) -> LoadVector:
        return cls(np.zeros(n_agents))

    @property
    def n_agents(self) -> int:
        return int(self.loads.shape[0])

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, LoadVector):
            return NotImplemented
        return bool(np.array_equal(self.loads, other.loads))


@dataclass(frozen=True, slots=True, eq=False)
class FractionalAssignment:
    """One point of the probability simplex: the split of a single item.

    ``degenerate`` marks steps where no agent valued the item and the split
    was fixed by convention rather than by the objective.
    """

    weights: FloatArray
    degenerate: bool = False

    def __post_init__(self) -> None:
        weights = np.array(as_vector(self.weights, name="Assignment"), dtype=np.float64)
        require_finite(weights, name="Assignment")
        if (weights < 0.0).any():
            msg = "Assignment weights must be non-negative."
            raise DomainError(msg)
        if abs(float(weights.sum()) - 1.0) > SIMPLEX_TOLERANCE:
            msg = f"Assignment weights sum to {weights.sum()!r}, expected 1."
            raise DomainError(msg)
        object.__setattr__(self, "weights", _readonly(weights))

    @classmethod
    def vertex(
        cls, n_agents: int, agent: int, *, degenerate: bool = False
    ) -> FractionalAssignment:
        """Return the assignment giving the whole item to ``agent``."""

        if not 0 <= agent < n_agents:
            msg = f"Agent {agent} out of range for {n_agents} agents."
            raise DimensionError(msg)
        weights = np.zeros(n_agents)
        weights[agent] = 1.0
        return cls(weights, degenerate=degenerate)

    @property
    def agent(self) -> int | None:
        """Index of the receiving agent when the assignment is a vertex."""

        nonzero = np.flatnonzero(self.weights)
        if nonzero.size == 1:
            return int(nonzero[0])
        return None


# ----------------------------------------------------------------------
# Run records
# ----------------------------------------------------------------------
@dataclass(frozen=True, slots=True, eq=False)
class Trace:
    """Complete record of one online run.

    ``assignments`` is an ``(m, n)`` matrix of simplex points for fractional
    runs and a length ``m`` vector of agent indices for integral runs; rows
    follow the arrival order, not the item index.
    """

    assignments: NDArray[Any]
    final_loads: LoadVector
    min_load: float
    policy_tag: str
    seed: int
    mode: AssignmentMode = AssignmentMode.FRACTIONAL
    degenerate_steps: int = 0

    def __post_init__(self) -> None:
        n_agents = self.final_loads.n_agents
        if self.mode is AssignmentMode.FRACTIONAL:
            assignments = np.array(self.assignments, dtype=np.float64)
            if assignments.ndim != 2 or assignments.shape[1] != n_agents:
                msg = (
                    f"Fractional assignments must have shape (m, {n_agents}), "
                    f"got {assignments.shape}."
                )
                raise DimensionError(msg)
        else:
            assignments = np.array(self.assignments, dtype=np.int64)
            if assignments.ndim != 1:
                msg = "Integral assignments must be a vector of agent indices."
                raise DimensionError(msg)
            if assignments.size and (
                assignments.min() < 0 or assignments.max() >= n_agents
            ):
                msg = "Integral assignment refers to an unknown agent."
                raise DimensionError(msg)
        if float(self.min_load) != float(self.final_loads.loads.min()):
            msg = "Trace min_load must equal the minimum of final_loads."
            raise DataError(msg)
        object.__setattr__(self, "assignments", _readonly(assignments))
        object.__setattr__(self, "min_load", float(self.min_load))

    @property
    def n_steps(self) -> int:
        return int(self.assignments.shape[0])

    def fractional_matrix(self) -> FloatArray:
        """Return the assignments as an ``(m, n)`` matrix in arrival order."""

        if self.mode is AssignmentMode.FRACTIONAL:
            return np.array(self.assignments, dtype=np.float64)
        matrix = np.zeros((self.n_steps, self.final_loads.n_agents))
        matrix[np.arange(self.n_steps), self.assignments] = 1.0
        return matrix

    def to_payload(self) -> dict[str, object]:
        return {
            "policy": self.policy_tag,
            "mode": self.mode.value,
            "seed": self.seed,
            "min_load": self.min_load,
            "final_loads": self.final_loads.loads.tolist(),
            "degenerate_steps": self.degenerate_steps,
            "assignments": self.assignments.tolist(),
        }

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Trace):
            return NotImplemented
        return (
            self.policy_tag == other.policy_tag
            and self.seed == other.seed
            and self.mode is other.mode
            and self.min_load == other.min_load
            and self.degenerate_steps == other.degenerate_steps
            and self.final_loads == other.final_loads
            and bool(np.array_equal(self.assignments, other.assignments))
        )


@dataclass(frozen=True, slots=True, eq=False)
class OptResult:
    """Offline optimum with the solver that produced it.

    ``certificate`` is indexed by item (not arrival position): entry
    ``[t, i]`` is the share of item ``t`` given to agent ``i``.
    """

    value: float
    kind: AssignmentMode
    solver: str
    certificate: FloatArray | None = None

    def __post_init__(self) -> None:
        if not np.isfinite(self.value) or self.value < 0.0:
            msg = f"Optimum must be a finite non-negative number, got {self.value!r}."
            raise DataError(msg)
        object.__setattr__(self, "value", float(self.value))
        if self.certificate is not None:
            certificate = np.array(self.certificate, dtype=np.float64)
            object.__setattr__(self, "certificate", _readonly(certificate))

    def to_payload(self) -> dict[str, object]:
        return {"value": self.value, "kind": self.kind.value, "solver": self.solver}


# ----------------------------------------------------------------------
# Operations
# ----------------------------------------------------------------------
def apply_step(
    loads: LoadVector,
    item_values: ArrayLike,
    x: FractionalAssignment | ArrayLike,
) -> LoadVector:
    """Return ``loads`` increased by ``item_values * x`` coordinate-wise.

    Parameters
    ----------
    loads:
        Current loads; left untouched.
    item_values:
        Value of the arriving item for every agent.
    x:
        Split of the item across agents.
    """

    values = as_vector(item_values, name="Item values")
    weights = x.weights if isinstance(x, FractionalAssignment) else as_vector(x)
    if not (values.shape == weights.shape == loads.loads.shape):
        msg = (
            f"Length mismatch: loads {loads.loads.shape[0]}, values "
            f"{values.shape[0]}, assignment {weights.shape[0]}."
        )
        raise DimensionError(msg)
    return LoadVector(loads.loads + values * weights)


def min_load(loads: LoadVector | ArrayLike) -> float:
    """Return the smallest entry of ``loads``."""

    array = loads.loads if isinstance(loads, LoadVector) else as_vector(loads)
    return float(array.min())


def replay(
    instance: Instance, order: ArrivalOrder, assignments: NDArray[Any]
) -> LoadVector:
    """Recompute final loads from a recorded sequence of decisions."""

    if len(order) != instance.n_items:
        msg = f"Order has {len(order)} items, instance has {instance.n_items}."
        raise DimensionError(msg)
    rows = instance.values[order.as_array()]
    decisions = np.asarray(assignments)
    if decisions.ndim == 1:
        agents = decisions.astype(np.int64)
        if agents.shape[0] != instance.n_items:
            msg = "One agent index per item is required."
            raise DimensionError(msg)
        gained = rows[np.arange(instance.n_items), agents]
        return LoadVector(
            np.bincount(agents, weights=gained, minlength=instance.n_agents)
        )
    if decisions.shape != rows.shape:
        msg = f"Assignment matrix shape {decisions.shape} != {rows.shape}."
        raise DimensionError(msg)
    return LoadVector((rows * decisions).sum(axis=0))


def certificate_min_load(instance: Instance, certificate: ArrayLike) -> float:
    """Validate an item-indexed assignment matrix and return its minimum load."""

    matrix = np.asarray(certificate, dtype=np.float64)
    if matrix.shape != instance.values.shape:
        msg = f"Certificate shape {matrix.shape} != {instance.values.shape}."
        raise DimensionError(msg)
    if (matrix < -CERTIFICATE_TOLERANCE).any():
        msg = "Certificate has negative entries."
        raise DataError(msg)
    if (matrix.sum(axis=1) > 1.0 + CERTIFICATE_TOLERANCE).any():
        msg = "Certificate assigns more than one unit of some item."
        raise DataError(msg)
    return float((instance.values * matrix).sum(axis=0).min())


__all__ = [
    "CERTIFICATE_TOLERANCE",
    "REPLAY_TOLERANCE",
    "SIMPLEX_TOLERANCE",
    "ArrivalOrder",
    "AssignmentMode",
    "FloatArray",
    "FractionalAssignment",
    "Instance",
    "InstanceFamily",
    "InstanceMetadata",
    "IntArray",
    "LoadVector",
    "OptResult",
    "Trace",
    "apply_step",
    "as_vector",
    "certificate_min_load",
    "min_load",
    "replay",
    "require_finite",
]
