"""Online max-min fair allocation lab.

The package simulates online policies for the Santa Claus objective, computes
offline optima on small instances and validates the probabilistic bounds behind
the policies by seeded Monte Carlo. Subpackages are imported on first use.
"""

__all__ = ["__version__", "main"]

__version__ = "0.1.0"


def __getattr__(name: str) -> object:
    if name == "main":
        from .cli import main

        return main
    msg = f"module 'santalab' has no attribute '{name}'"
    raise AttributeError(msg)
