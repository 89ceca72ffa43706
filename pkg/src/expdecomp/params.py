"""Parameter sets for the cut-matching game and the flow routines.

Two modes exist.  ``paper`` keeps the literal constants of the analysis
(capacity above 1000, height ``1000 c log m``) and therefore only admits
tiny ``phi``.  ``desk`` keeps the functional shape of every choice but with
constants that make moderate graphs tractable.  Logarithms are base 2.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, replace

from .errors import InputError

MODES = ("desk", "paper")


def log2m(m: int) -> float:
    return math.log2(m) if m > 1 else 0.0


def next_power_of_two(x: float, floor: int = 2) -> int:
    p = floor
    while p < x:
        p *= 2
    return p


@dataclass(frozen=True)
class Params:
    """Resolved parameters for one game on a graph with ``m`` edges.

    ``guard`` is the divisor in the balance test ``vol(R) <= m / (guard * Z)``
    and ``rst_min`` the smallest active set the source/target-set routine
    accepts.
    """

    phi: float
    T: int
    Z: float
    c: int
    d: int
    h: int
    mode: str = "desk"
    seed: int = 0
    guard: float = 1500.0
    rst_min: int = 16

    def validate(self, m: int | None = None) -> "Params":
        if self.mode not in MODES:
            raise InputError(f"mode must be one of {MODES}")
        if not 0 < self.phi < 1:
            raise InputError("phi must lie in (0, 1)")
        if not isinstance(self.c, int) or self.c < 2:
            raise InputError("c must be an integer >= 2")
        if not isinstance(self.d, int) or self.d < 2 or self.d & (self.d - 1):
            raise InputError("d must be a power of two >= 2")
        if not isinstance(self.h, int) or self.h < 1:
            raise InputError("h must be an integer >= 1")
        if not isinstance(self.T, int) or self.T < 1:
            raise InputError("T must be an integer >= 1")
        if self.Z <= 0:
            raise InputError("Z must be positive")
        if self.rst_min < 8:
            raise InputError("rst_min must be at least 8")
        if self.mode == "paper":
            if self.c <= 1000:
                raise InputError("paper mode needs c > 1000; choose a smaller phi")
            if m is not None and m > 1:
                if self.phi >= 1 / log2m(m):
                    raise InputError("paper mode needs phi < 1/log m")
                if self.h < math.ceil(1000 * self.c * log2m(m)):
                    raise InputError("paper mode needs h = 1000 c log m")
        return self

    def as_dict(self):
        return asdict(self)


def make_params(phi: float, m: int, mode: str = "desk", seed: int = 0,
                cz: float = 1.0, ct: float = 1.0, **overrides) -> Params:
    """Resolve parameters for a graph with ``m`` edges.

    Desk mode: ``T = ceil(log2(m)^2)``, ``Z = ceil(log2 m)``,
    ``c = max(2, floor(1/(phi Z)))``, ``d`` the smallest power of two that is
    at least ``log2 m`` and ``h = ceil(10 c log2 m)``.

    Paper mode: ``Z`` is chosen near ``cz log2 m`` such that ``c = 1/(phi Z)``
    is an integer, ``T = ceil(ct log2(m)^2)`` and ``h = ceil(1000 c log2 m)``.
    ``overrides`` replace individual fields and are validated afterwards.
    """
    if mode not in MODES:
        raise InputError(f"mode must be one of {MODES}")
    if not 0 < phi < 1:
        raise InputError("phi must lie in (0, 1)")
    L = max(log2m(m), 1.0)
    if mode == "desk":
        Z = float(math.ceil(L))
        c = max(2, int(math.floor(1.0 / (phi * Z))))
        T = max(1, math.ceil(L * L))
        d = next_power_of_two(L)
        h = max(1, math.ceil(10 * c * L))
    else:
        if phi >= 1 / L:
            raise InputError("paper mode needs phi < 1/log m")
        c = max(1, round(1.0 / (phi * cz * L)))
        Z = 1.0 / (phi * c)
        T = max(1, math.ceil(ct * L * L))
        d = next_power_of_two(L)
        h = math.ceil(1000 * c * L)
    fields = dict(phi=phi, T=T, Z=Z, c=c, d=d, h=h, mode=mode, seed=seed)
    unknown = set(overrides) - set(Params.__dataclass_fields__)
    if unknown:
        raise InputError(f"unknown parameter override(s): {sorted(unknown)}")
    p = Params(**fields)
    clean = {k: v for k, v in overrides.items() if v is not None}
    if clean:
        p = replace(p, **clean)
    return p.validate(m)
