"""Closed-form optimum of the public/private construction."""

from __future__ import annotations

import numpy as np

from santalab.core import AssignmentMode, OptResult
from santalab.errors import ConfigError


def opt_public_private_closed_form(n: int, k: int) -> OptResult:
    """Return ``OPT = k`` with its canonical certificate.

    Private items go to their owners and every public item to the public agent
    (index ``n - 1``), matching the item layout of
    :func:`santalab.instances.gen_public_private`.
    """

    if n < 2 or k < 1:
        msg = f"The construction needs n >= 2 and k >= 1, got n={n}, k={k}."
        raise ConfigError(msg)
    owners = np.repeat(np.arange(n), k)
    certificate = np.zeros((n * k, n))
    certificate[np.arange(n * k), owners] = 1.0
    return OptResult(float(k), AssignmentMode.INTEGRAL, "closed_form", certificate)


__all__ = ["opt_public_private_closed_form"]
