"""Channel triplets (k1, k2, k3) whose FWM products land on a channel of interest."""

from __future__ import annotations

from dataclasses import dataclass

from ..core import ChannelPlan

CLASSES = ("SCI", "X1", "X2", "X3", "X4", "M0", "M1M2", "M3")
GROUPS = {"SCI": "SCI", "X1": "XCI", "X2": "XCI", "X3": "XCI", "X4": "XCI", "M0": "MCI", "M1M2": "MCI", "M3": "MCI"}


@dataclass(frozen=True)
class Triplet:
    k1: int
    k2: int
    k3: int
    omega: float
    b_hat: float
    cls: str

    @property
    def indices(self) -> tuple[int, int, int]:
        return (self.k1, self.k2, self.k3)


def classify_triplet(k1: int, k2: int, k3: int, kappa: int) -> str:
    """Interference class of (k1, k2, k3) seen from channel ``kappa``.

    The named patterns are closed under the f1 <-> f2 swap, so (k, a, a) is X1
    like (a, k, a). Three-channel patterns with no named island, such as
    (kappa, a, b) with b not in {kappa, a}, fall into M0.
    """
    distinct = len({k1, k2, k3, kappa})
    if distinct == 1:
        return "SCI"
    if distinct == 2:
        if k1 == k2 == k3:
            return "X4"
        if k1 == k2:
            return "X3"
        # k1 != k2, so {k1, k2} = {kappa, other}
        return "X2" if k3 == kappa else "X1"
    if distinct == 3:
        if k1 != k2 and k3 in (k1, k2):
            return "M1M2"
        if k1 == k2:
            return "M3"
    return "M0"


BOUNDS = ("paper", "support")


def in_triplet_set(plan: ChannelPlan, kappa: int, k1: int, k2: int, k3: int, bound: str = "support") -> bool:
    """Membership test for the triplet set of channel ``kappa``.

    ``support`` (default): |Omega - nu_kappa| < (B_hat + B_kappa) / 2, every
    triplet whose FWM products overlap the channel band with positive volume,
    including the triangular islands next to the lozenges.
    ``paper``: |Omega - nu_kappa| <= |B_hat - B_kappa| / 2, boundary included.
    It drops the islands, which for closely packed channels removes a large
    part of the NLI.
    """
    c1, c2, c3, ck = plan[k1], plan[k2], plan[k3], plan[kappa]
    omega = c1.center_freq + c2.center_freq - c3.center_freq
    b_hat = c1.bandwidth + c2.bandwidth + c3.bandwidth
    offset = abs(omega - ck.center_freq)
    if bound == "paper":
        return offset <= abs(b_hat - ck.bandwidth) / 2
    if bound == "support":
        return offset < (b_hat + ck.bandwidth) / 2
    raise ValueError(f"unknown triplet bound {bound!r}")


def enumerate_triplets(plan: ChannelPlan, kappa: int, bound: str = "support") -> list[Triplet]:
    """All triplets of the plan in lexicographic (k1, k2, k3) order."""
    n = len(plan)
    plan[kappa]  # range check
    out = []
    for k1 in range(1, n + 1):
        for k2 in range(1, n + 1):
            for k3 in range(1, n + 1):
                if in_triplet_set(plan, kappa, k1, k2, k3, bound):
                    c1, c2, c3 = plan[k1], plan[k2], plan[k3]
                    out.append(Triplet(k1, k2, k3,
                                       c1.center_freq + c2.center_freq - c3.center_freq,
                                       c1.bandwidth + c2.bandwidth + c3.bandwidth,
                                       classify_triplet(k1, k2, k3, kappa)))
    return out
