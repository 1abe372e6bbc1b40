"""Revenue training for the learned auction.

The hard mechanism is piecewise constant in the parameters, so training
maximises a relaxation: the winner is chosen by ``softmax(lam * [t, 0])``
(the trailing 0 is the reserve) and bidder i pays its threshold
``max(0, phi_i^-1(max(0, best rival)))``. The temperature ``lam`` rises
linearly over training. Payments stay threshold payments of monotone
transforms throughout, so every iterate is truthful and IR; only revenue
is learned.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import grad as G
from .auction import MonotoneNet, Sampler, learned_auction_batch, second_price_batch


class TrainingDiverged(RuntimeError):
    def __init__(self, iteration: int, value: float):
        super().__init__(f"non-finite training objective ({value}) at iteration {iteration}")
        self.iteration = iteration


@dataclass(frozen=True)
class TrainConfig:
    iterations: int = 2000
    batch_size: int = 128
    learning_rate: float = 0.003
    final_lr_fraction: float = 0.01
    temp_start: float = 10.0
    temp_end: float = 100.0
    groups: int = 5
    units: int = 10
    init_noise: float = 0.01
    smoothing: float = 0.05
    eval_size: int = 4096
    seed: int = 0

    def errors(self) -> list[str]:
        errs = []
        for name in ("iterations", "batch_size", "groups", "units", "eval_size"):
            v = getattr(self, name)
            if not isinstance(v, int) or v < 1:
                errs.append(f"{name}: must be a positive integer")
        for name in ("learning_rate", "temp_start", "temp_end"):
            if not getattr(self, name) > 0:
                errs.append(f"{name}: must be > 0")
        if not 0 < self.final_lr_fraction <= 1:
            errs.append("final_lr_fraction: must lie in (0, 1]")
        if self.init_noise < 0:
            errs.append("init_noise: must be >= 0")
        if self.smoothing < 0:
            errs.append("smoothing: must be >= 0")
        return errs

    def step_size(self, iteration: int) -> float:
        """Learning rate, decayed linearly to ``final_lr_fraction`` of the start."""
        frac = iteration / max(self.iterations - 1, 1)
        return self.learning_rate * (1 - (1 - self.final_lr_fraction) * frac)

    def temperature(self, iteration: int) -> float:
        if self.iterations == 1:
            return self.temp_end
        frac = iteration / (self.iterations - 1)
        return self.temp_start + (self.temp_end - self.temp_start) * frac


@dataclass
class RevenueObjective:
    """Relaxed revenue as a computation graph, reusable across batches."""

    bids: G.Node
    temperature: G.Node
    log_weights: list
    biases: list
    root: G.Node

    @property
    def params(self) -> list:
        return [p for pair in zip(self.log_weights, self.biases) for p in pair]

    def load(self, nets) -> None:
        for w, b, net in zip(self.log_weights, self.biases, nets):
            w.set_value(net.log_weights)
            b.set_value(net.biases)

    def nets(self) -> list[MonotoneNet]:
        return [MonotoneNet(w.value.copy(), b.value.copy()) for w, b in zip(self.log_weights, self.biases)]

    def evaluate(self, bids, temperature: float) -> float:
        self.bids.set_value(bids)
        self.temperature.set_value(temperature)
        return G.forward(self.root)


def build_objective(nets, batch_size: int) -> RevenueObjective:
    n = len(nets)
    bids = G.constant(np.zeros((batch_size, n)), name="bids")
    lam = G.constant(1.0, name="temperature")
    zero = G.constant(np.zeros(batch_size), name="reserve")
    ws = [G.parameter(net.log_weights, name=f"w{i}") for i, net in enumerate(nets)]
    bs = [G.parameter(net.biases, name=f"b{i}") for i, net in enumerate(nets)]

    t = []
    for i in range(n):
        b_i = G.reshape(G.take(bids, i, axis=1), (-1, 1, 1))
        units = G.exp(ws[i]) * b_i + bs[i]
        t.append(G.reduce_min(G.reduce_max(units, axis=2), axis=1))
    alloc = G.softmax(lam * G.stack(t + [zero], axis=1), axis=1)

    revenue_terms = []
    for i in range(n):
        rivals = [t[j] for j in range(n) if j != i] + [zero]
        rival = G.reduce_max(G.stack(rivals, axis=1), axis=1)
        units = (G.reshape(rival, (-1, 1, 1)) - bs[i]) * G.exp(-ws[i])
        price = G.maximum(G.reduce_max(G.reduce_min(units, axis=2), axis=1), zero)
        revenue_terms.append(G.take(alloc, i, axis=1) * price)
    total = revenue_terms[0]
    for term in revenue_terms[1:]:
        total = total + term
    return RevenueObjective(bids, lam, ws, bs, G.mean(total))


@dataclass
class TrainResult:
    nets: list
    trace: list = field(default_factory=list)  # (iteration, dl_revenue, spa_revenue)
    eval_profiles: np.ndarray = None

    @property
    def final_revenue(self) -> float:
        return float(learned_auction_batch(self.nets, self.eval_profiles)[1].mean())


class _Adam:
    def __init__(self, b1: float = 0.9, b2: float = 0.999, eps: float = 1e-8):
        self.b1, self.b2, self.eps = b1, b2, eps
        self.m: dict = {}
        self.v: dict = {}
        self.t = 0

    def ascend(self, grads: dict, lr: float) -> None:
        self.t += 1
        for node, g in grads.items():
            m = self.m.get(node, 0.0) * self.b1 + (1 - self.b1) * g
            v = self.v.get(node, 0.0) * self.b2 + (1 - self.b2) * g * g
            self.m[node], self.v[node] = m, v
            m_hat = m / (1 - self.b1 ** self.t)
            v_hat = v / (1 - self.b2 ** self.t)
            node.set_value(node.value + lr * m_hat / (np.sqrt(v_hat) + self.eps))


def train(config: TrainConfig, value_distribution: Sampler, num_bidders: int = None,
          rng: np.random.Generator = None) -> TrainResult:
    """Gradient ascent on relaxed revenue.

    ``value_distribution(rng, size)`` returns a ``(size, N)`` array of
    valuations. The revenue trace is measured with hard allocation on a
    fixed evaluation set drawn once up front; iteration 0 is the identity
    initialisation, i.e. exactly the second-price auction.
    """
    errs = config.errors()
    if errs:
        raise ValueError("; ".join(errs))
    if num_bidders is None:
        num_bidders = value_distribution.num_bidders
    if rng is None:
        rng = np.random.default_rng(config.seed)
    init_rng, batch_rng, eval_rng, noise_rng = rng.spawn(4)

    nets = [MonotoneNet.identity(config.groups, config.units, init_rng, config.init_noise)
            for _ in range(num_bidders)]
    eval_profiles = value_distribution(eval_rng, config.eval_size)
    spa = float(second_price_batch(eval_profiles)[1].mean())

    objective = build_objective(nets, config.batch_size)
    params = objective.params
    opt = _Adam()
    result = TrainResult(nets, eval_profiles=eval_profiles)
    for it in range(config.iterations):
        current = objective.nets()
        dl = float(learned_auction_batch(current, eval_profiles)[1].mean())
        result.trace.append((it, dl, spa))
        batch = value_distribution(batch_rng, config.batch_size)
        # gradient taken at a randomly perturbed point (randomised smoothing);
        # the step is applied to the unperturbed parameters
        base = [p.value for p in params]
        sigma = config.smoothing * (1 - it / config.iterations)
        if sigma > 0:
            for p in params:
                p.set_value(p.value + sigma * noise_rng.standard_normal(p.value.shape))
        value = objective.evaluate(batch, config.temperature(it))
        if not np.isfinite(value):
            raise TrainingDiverged(it, value)
        grads = G.backward(objective.root)
        for p, v in zip(params, base):
            p.set_value(v)
        if not all(np.all(np.isfinite(grads[p])) for p in params):
            raise TrainingDiverged(it, value)
        opt.ascend({p: grads[p] for p in params}, config.step_size(it))
    result.nets = objective.nets()
    return result


def soft_revenue(nets, bids: np.ndarray, temperature: float) -> float:
    """Plain-numpy evaluation of the relaxed objective (no graph)."""
    from .auction import transform, transform_inverse

    bids = np.asarray(bids, dtype=float)
    n = len(nets)
    t = np.stack([transform(net, bids[:, i]) for i, net in enumerate(nets)], axis=1)
    z = temperature * np.concatenate([t, np.zeros((len(bids), 1))], axis=1)
    z = np.exp(z - z.max(axis=1, keepdims=True))
    alloc = z / z.sum(axis=1, keepdims=True)
    total = np.zeros(len(bids))
    for i, net in enumerate(nets):
        others = np.delete(t, i, axis=1)
        rival = np.maximum(others.max(axis=1), 0.0) if n > 1 else np.zeros(len(bids))
        total += alloc[:, i] * np.maximum(transform_inverse(net, rival), 0.0)
    return float(total.mean())
