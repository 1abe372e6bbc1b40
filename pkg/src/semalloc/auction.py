"""Single-item energy auctions run by the access point.

Two mechanisms share one outcome type:

* ``second_price`` -- highest bid wins, pays the second-highest bid.
* ``learned_auction`` -- every bidder has a strictly increasing transform
  phi_i (a min over groups of a max over positive-slope linear units).
  The highest transformed bid wins if it beats a zero reserve and pays the
  smallest bid that would still have won, ``phi_w^-1(max(0, best rival))``.

Threshold payments on monotone transforms make both mechanisms truthful
(DSIC) and individually rational. Ties go to the lowest bidder id. A bid of
0 never wins either mechanism.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

NO_SALE = -1
NET_FORMAT = "semalloc-monotone-net"
NET_FORMAT_VERSION = 1


class AuctionInputError(ValueError):
    pass


@dataclass(frozen=True)
class Bid:
    bidder_id: int
    amount: float

    def __post_init__(self):
        if not (np.isfinite(self.amount) and self.amount >= 0):
            raise AuctionInputError(f"bid must be finite and non-negative, got {self.amount}")


@dataclass(frozen=True)
class AuctionOutcome:
    winner: Optional[int]  # None = no sale
    payment: float

    @property
    def revenue(self) -> float:
        return self.payment


def _amounts(bids) -> np.ndarray:
    vals = [b.amount if isinstance(b, Bid) else float(b) for b in bids]
    if not vals:
        raise AuctionInputError("no bids")
    arr = np.asarray(vals, dtype=float)
    if not np.all(np.isfinite(arr)) or np.any(arr < 0):
        raise AuctionInputError("bids must be finite and non-negative")
    return arr


def second_price(bids: Sequence) -> AuctionOutcome:
    """Vickrey auction over bids given as :class:`Bid` or plain floats.

    Winner and payment refer to positions in ``bids``. A lone bidder pays 0.
    """
    amounts = _amounts(bids)
    winner = int(np.argmax(amounts))
    if amounts[winner] <= 0:
        return AuctionOutcome(None, 0.0)
    rivals = np.delete(amounts, winner)
    return AuctionOutcome(winner, float(rivals.max()) if rivals.size else 0.0)


def second_price_batch(bids: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Vectorised :func:`second_price` over rows; winner ``NO_SALE`` when none."""
    bids = np.asarray(bids, dtype=float)
    winners = np.argmax(bids, axis=1)
    top = bids[np.arange(len(bids)), winners]
    if bids.shape[1] > 1:
        second = np.sort(bids, axis=1)[:, -2]
    else:
        second = np.zeros(len(bids))
    sold = top > 0
    return np.where(sold, winners, NO_SALE), np.where(sold, second, 0.0)


# -- monotone transforms ------------------------------------------------------


@dataclass
class MonotoneNet:
    """phi(b) = min_k max_j (exp(log_weight[k, j]) * b + bias[k, j])."""

    log_weights: np.ndarray
    biases: np.ndarray

    def __post_init__(self):
        self.log_weights = np.array(self.log_weights, dtype=float)
        self.biases = np.array(self.biases, dtype=float)
        if self.log_weights.ndim != 2 or self.log_weights.shape != self.biases.shape:
            raise ValueError("log_weights and biases must be equal-shape (K, J) arrays")
        if self.log_weights.size == 0:
            raise ValueError("net needs at least one unit")

    @property
    def shape(self) -> tuple[int, int]:
        return self.log_weights.shape

    @classmethod
    def linear(cls, weight: float = 1.0, bias: float = 0.0) -> "MonotoneNet":
        return cls([[np.log(weight)]], [[bias]])

    @classmethod
    def identity(cls, groups: int = 1, units: int = 1, rng: Optional[np.random.Generator] = None,
                 noise: float = 0.0, margin: float = 1.0) -> "MonotoneNet":
        """A K x J net that computes phi(b) = b exactly.

        Unit (0, 0) is the identity line. Every other unit is parallel to it
        and offset by ``margin`` plus random jitter, so it never attains the
        max/min: the other units of group 0 sit below the identity line, and
        every other group is lifted above it by its unit 0.
        """
        w = np.zeros((groups, units))
        jitter = np.zeros((groups, units))
        if noise > 0 and rng is not None:
            jitter = noise * np.abs(rng.standard_normal((groups, units)))
        b = -(margin + jitter)
        b[0, 0] = 0.0
        b[1:, 0] = margin + jitter[1:, 0]
        return cls(w, b)

    def copy(self) -> "MonotoneNet":
        return MonotoneNet(self.log_weights.copy(), self.biases.copy())


def transform(net: MonotoneNet, b):
    """phi(b) = min_k max_j (exp(log_weight[k, j]) * b + bias[k, j]); elementwise on arrays."""
    b = np.asarray(b, dtype=float)
    flat = np.ascontiguousarray(b).reshape(-1)
    scale = np.exp(net.log_weights)
    # unit by unit on flat arrays: far less memory traffic than one (S, K, J) temporary
    out = None
    for k in range(scale.shape[0]):
        acc = flat * scale[k, 0] + net.biases[k, 0]
        for j in range(1, scale.shape[1]):
            np.maximum(acc, flat * scale[k, j] + net.biases[k, j], out=acc)
        out = acc if out is None else np.minimum(out, acc)
    return float(out[0]) if b.ndim == 0 else out.reshape(b.shape)


def transform_inverse(net: MonotoneNet, y):
    """phi^-1(y) = max_k min_j ((y - bias[k, j]) * exp(-log_weight[k, j]))."""
    y = np.asarray(y, dtype=float)
    flat = np.ascontiguousarray(y).reshape(-1)
    scale = np.exp(-net.log_weights)
    out = None
    for k in range(scale.shape[0]):
        acc = (flat - net.biases[k, 0]) * scale[k, 0]
        for j in range(1, scale.shape[1]):
            np.minimum(acc, (flat - net.biases[k, j]) * scale[k, j], out=acc)
        out = acc if out is None else np.maximum(out, acc)
    return float(out[0]) if y.ndim == 0 else out.reshape(y.shape)


def learned_auction(nets: Sequence[MonotoneNet], bids: Sequence) -> AuctionOutcome:
    amounts = _amounts(bids)
    if len(nets) != len(amounts):
        raise AuctionInputError(f"{len(nets)} nets for {len(amounts)} bids")
    t = [transform(net, a) for net, a in zip(nets, amounts)]
    winner = int(np.argmax(t))
    if t[winner] <= 0:
        return AuctionOutcome(None, 0.0)
    rival = max([0.0] + [x for i, x in enumerate(t) if i != winner])
    price = transform_inverse(nets[winner], rival)
    # clamp absorbs round-off only: the threshold never exceeds the winning bid
    return AuctionOutcome(winner, float(min(max(price, 0.0), amounts[winner])))


def learned_auction_batch(nets: Sequence[MonotoneNet], bids: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Vectorised :func:`learned_auction` over rows of ``bids``."""
    bids = np.asarray(bids, dtype=float)
    if bids.ndim != 2 or bids.shape[1] != len(nets):
        raise AuctionInputError(f"bids of shape {bids.shape} do not match {len(nets)} nets")
    t = np.stack([transform(net, bids[:, i]) for i, net in enumerate(nets)], axis=1)
    rows = np.arange(len(bids))
    winners = np.argmax(t, axis=1)
    sold = t[rows, winners] > 0
    masked = t.copy()
    masked[rows, winners] = -np.inf
    rival = np.maximum(masked.max(axis=1), 0.0)
    price = np.zeros(len(bids))
    for i, net in enumerate(nets):
        sel = sold & (winners == i)
        if np.any(sel):
            price[sel] = transform_inverse(net, rival[sel])
    price = np.minimum(np.maximum(price, 0.0), bids[rows, winners])
    return np.where(sold, winners, NO_SALE), np.where(sold, price, 0.0)


Sampler = Callable[[np.random.Generator, int], np.ndarray]


def _as_sampler(dist) -> Sampler:
    if callable(dist):
        return dist
    from .wpcn import value_sampler

    return value_sampler(dist)


def expected_revenue(nets: Sequence[MonotoneNet], dist, num_samples: int,
                     rng: np.random.Generator) -> float:
    """Monte-Carlo mean payment of the learned auction.

    ``dist`` is a ``NetworkConfig`` or a sampler ``f(rng, size) -> (size, N)``.
    """
    if num_samples < 1:
        raise ValueError("num_samples must be >= 1")
    profiles = _as_sampler(dist)(rng, num_samples)
    return float(learned_auction_batch(nets, profiles)[1].mean())


def spa_expected_revenue(dist, num_samples: int, rng: np.random.Generator) -> float:
    if num_samples < 1:
        raise ValueError("num_samples must be >= 1")
    profiles = _as_sampler(dist)(rng, num_samples)
    return float(second_price_batch(profiles)[1].mean())


def uniform_values(num_bidders: int, low: float = 0.0, high: float = 1.0) -> Sampler:
    def sample(rng: np.random.Generator, size: int) -> np.ndarray:
        return rng.uniform(low, high, (size, num_bidders))

    sample.num_bidders = num_bidders
    return sample


# -- serialisation ------------------------------------------------------------


def dump_nets(nets: Sequence[MonotoneNet]) -> str:
    k, j = nets[0].shape
    lines = [
        f"format = {NET_FORMAT}",
        f"version = {NET_FORMAT_VERSION}",
        f"bidders = {len(nets)}",
        f"groups = {k}",
        f"units = {j}",
    ]
    for i, net in enumerate(nets):
        if net.shape != (k, j):
            raise ValueError("all nets must share one shape")
        lines.append(f"bidder.{i}.log_weights = " + " ".join(repr(float(x)) for x in net.log_weights.ravel()))
        lines.append(f"bidder.{i}.biases = " + " ".join(repr(float(x)) for x in net.biases.ravel()))
    return "\n".join(lines) + "\n"


def load_nets(text: str) -> list[MonotoneNet]:
    fields = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise ValueError(f"line {lineno}: expected 'key = value'")
        fields[key.strip()] = value.strip()
    if fields.get("format") != NET_FORMAT:
        raise ValueError("not a monotone-net parameter file")
    if int(fields.get("version", -1)) != NET_FORMAT_VERSION:
        raise ValueError(f"unsupported parameter file version {fields.get('version')}")
    n, k, j = (int(fields[f]) for f in ("bidders", "groups", "units"))
    nets = []
    for i in range(n):
        w = np.array([float(x) for x in fields[f"bidder.{i}.log_weights"].split()]).reshape(k, j)
        b = np.array([float(x) for x in fields[f"bidder.{i}.biases"].split()]).reshape(k, j)
        nets.append(MonotoneNet(w, b))
    return nets
