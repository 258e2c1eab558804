"""Sign-flip injection used by the verification mutation sentinel.

The verify command can rebuild the fixed matrices and polarization vectors
with a single deliberate sign error to prove the suites catch it.  Normal
library use never touches this; the active set is empty unless the context
manager below is entered.
"""

from __future__ import annotations

from contextlib import contextmanager

# Tokens understood by the constructors:
#   tau1, tau2, tau3      flip the whole spin-1 matrix
#   beta0                 flip the block signature matrix
#   beta1, beta2, beta3   flip one first-order matrix (chi follows)
#   eps-y                 flip the imaginary frequency term in the first two
#                         circular polarization components
#   eps-z                 flip the third circular polarization component
CATALOG = (
    "tau1",
    "tau2",
    "tau3",
    "beta0",
    "beta1",
    "beta2",
    "beta3",
    "eps-y",
    "eps-z",
)

_active: set[str] = set()


def is_active(token: str) -> bool:
    return token in _active


@contextmanager
def mutated(token: str):
    """Temporarily enable one sign flip; raises on unknown tokens."""
    if token not in CATALOG:
        raise ValueError(f"unknown mutation {token!r}; choose from {CATALOG}")
    _active.add(token)
    try:
        yield
    finally:
        _active.discard(token)
