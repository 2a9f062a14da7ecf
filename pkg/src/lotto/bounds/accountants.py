"""Privacy accountants plugged into the epsilon minimization.

An accountant is any callable ``E(s, k, r, sigma, delta) -> epsilon`` that is
non-increasing in ``delta`` and non-decreasing in ``k`` and ``r``. None of the
shipped ones is the discrete-Skellam accountant used by deployed distributed
DP systems; :class:`GaussianRdpAccountant` is a clearly simplified stand-in.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Protocol


class PrivacyAccountant(Protocol):
    def __call__(self, s: int, k: int, r: int, sigma: float, delta: float) -> float: ...


@dataclass(frozen=True)
class ConstantAccountant:
    value: float

    def __call__(self, s: int, k: int, r: int, sigma: float, delta: float) -> float:
        return self.value


@dataclass(frozen=True)
class MockAccountant:
    """E = k + r; exercises the grid search without any privacy meaning."""

    def __call__(self, s: int, k: int, r: int, sigma: float, delta: float) -> float:
        return float(k + r)


@dataclass(frozen=True)
class GaussianRdpAccountant:
    """Stand-in: r-fold composition of a unit-sensitivity Gaussian mechanism.

    Only the ``s - k`` honest participants add noise, so the effective noise
    multiplier is ``sigma * sqrt((s - k) / s)``. RDP of order a is
    ``r * a / (2 sigma_eff**2)``; converting with ``eps = rdp + log(1/delta) /
    (a - 1)`` and optimizing a in closed form gives
    ``r / (2 sigma_eff**2) + sqrt(2 r log(1/delta)) / sigma_eff``.
    """

    def __call__(self, s: int, k: int, r: int, sigma: float, delta: float) -> float:
        if not 0.0 < delta < 1.0:
            raise ValueError("delta must lie in (0, 1)")
        if r == 0:
            return 0.0
        if k >= s or sigma <= 0.0:
            return math.inf
        var = sigma * sigma * (s - k) / s
        return r / (2.0 * var) + math.sqrt(2.0 * r * math.log(1.0 / delta) / var)


ACCOUNTANTS = {
    "mock": MockAccountant,
    "gaussian-rdp": GaussianRdpAccountant,
}


def make_accountant(name: str, constant: float | None = None) -> PrivacyAccountant:
    if name == "constant":
        if constant is None:
            raise ValueError("constant accountant needs a value")
        return ConstantAccountant(constant)
    try:
        return ACCOUNTANTS[name]()
    except KeyError:
        raise ValueError(f"unknown accountant {name!r}") from None
