"""Influence kernels: the competing micro-assumption families.

Each kernel maps a (holder opinion, source opinion) pair to the signed
response coefficient l of the update rule

    x_i' = x_i + l * (x_src - x_i)

so the sign of l selects assimilative vs. repulsive movement and |l| <= 1
keeps positive-family updates inside the segment between the two opinions
(no skips). All kernels are immutable value objects; ``value`` accepts
scalars or numpy arrays and broadcasts.

Stubborn agents and Friedkin-Johnsen prejudices ride along as kernel flags:
stubbornness is applied by the engine as a veto (l forced to 0 and the
opinion held), prejudice blends every update toward a fixed per-agent
anchor with susceptibility lambda.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class Prejudice:
    """Per-agent fixed anchors g and susceptibilities lambda in [0, 1]."""

    anchors: np.ndarray
    susceptibility: np.ndarray

    def __post_init__(self):
        g = np.asarray(self.anchors, dtype=np.float64)
        lam = np.asarray(self.susceptibility, dtype=np.float64)
        object.__setattr__(self, "anchors", g)
        object.__setattr__(self, "susceptibility", lam)
        if g.shape != lam.shape:
            raise ValueError("anchors and susceptibility must align")
        if g.size and (g.min() < 0 or g.max() > 1):
            raise ValueError("anchors must lie in [0, 1]")
        if lam.size and (lam.min() < 0 or lam.max() > 1):
            raise ValueError("susceptibility must lie in [0, 1]")


@dataclass(frozen=True)
class InfluenceKernel:
    """Base kernel; subclasses implement ``value``.

    ``value_scalar`` is the float-only twin used by the asynchronous
    engine's inner loop; overrides must agree with ``value`` exactly.
    """

    stubborn_set: frozenset = field(default=frozenset(), kw_only=True)
    prejudice: Prejudice | None = field(default=None, kw_only=True)

    def value(self, xi, x_src):
        raise NotImplementedError

    def value_scalar(self, xi: float, x_src: float) -> float:
        return float(self.value(xi, x_src))


@dataclass(frozen=True)
class LinearPositive(InfluenceKernel):
    """Constant positive response: l = l0, 0 < l0 <= 1 (no skips)."""

    l0: float = 0.5

    def __post_init__(self):
        if not 0.0 < self.l0 <= 1.0:
            raise ValueError(f"l0 must be in (0, 1], got {self.l0}")

    def value(self, xi, x_src):
        d = np.abs(np.asarray(x_src, dtype=np.float64) - xi)
        return np.full_like(d, self.l0)

    def value_scalar(self, xi: float, x_src: float) -> float:
        return self.l0


@dataclass(frozen=True)
class LinearNegative(InfluenceKernel):
    """Constant negative response: l = l0 < 0."""

    l0: float = -0.5

    def __post_init__(self):
        if not self.l0 < 0.0:
            raise ValueError(f"l0 must be negative, got {self.l0}")

    def value(self, xi, x_src):
        d = np.abs(np.asarray(x_src, dtype=np.float64) - xi)
        return np.full_like(d, self.l0)

    def value_scalar(self, xi: float, x_src: float) -> float:
        return self.l0


def _bump(d, left, peak, right, gain):
    """Quadratic bump: 0 at the lobe edges, `gain` at `peak`, smooth there.

    Two half-parabola arcs joined at the peak so the peak location is free
    (a single parabola would pin it to the lobe midpoint).
    """
    d = np.asarray(d, dtype=np.float64)
    rise = gain * (1.0 - ((d - peak) / (peak - left)) ** 2)
    fall = gain * (1.0 - ((d - peak) / (right - peak)) ** 2)
    out = np.where(d <= peak, rise, fall)
    inside = (d >= left) & (d <= right)
    return np.where(inside, out, 0.0)


@dataclass(frozen=True)
class ModeratedPositive(InfluenceKernel):
    """Inverted-U response in distance: zero at 0 and 2*d_peak, peak g at d_peak."""

    peak_distance: float = 0.3
    peak_gain: float = 0.5

    def __post_init__(self):
        if not 0.0 < self.peak_distance <= 0.5:
            raise ValueError("peak_distance must be in (0, 0.5]")
        if not 0.0 < self.peak_gain <= 1.0:
            raise ValueError("peak_gain must be in (0, 1]")

    def value(self, xi, x_src):
        d = np.abs(np.asarray(x_src, dtype=np.float64) - xi)
        return _bump(d, 0.0, self.peak_distance, 2.0 * self.peak_distance,
                     self.peak_gain)

    def value_scalar(self, xi: float, x_src: float) -> float:
        d = abs(x_src - xi)
        if d > 2.0 * self.peak_distance:
            return 0.0
        return self.peak_gain * (1.0 - ((d - self.peak_distance)
                                        / self.peak_distance) ** 2)


@dataclass(frozen=True)
class ModeratedNegative(InfluenceKernel):
    """Reflection of ModeratedPositive below the axis (peak_gain < 0)."""

    peak_distance: float = 0.3
    peak_gain: float = -0.5

    def __post_init__(self):
        if not 0.0 < self.peak_distance <= 0.5:
            raise ValueError("peak_distance must be in (0, 0.5]")
        if not self.peak_gain < 0.0:
            raise ValueError("peak_gain must be negative")

    def value(self, xi, x_src):
        d = np.abs(np.asarray(x_src, dtype=np.float64) - xi)
        return _bump(d, 0.0, self.peak_distance, 2.0 * self.peak_distance,
                     self.peak_gain)

    def value_scalar(self, xi: float, x_src: float) -> float:
        d = abs(x_src - xi)
        if d > 2.0 * self.peak_distance:
            return 0.0
        return self.peak_gain * (1.0 - ((d - self.peak_distance)
                                        / self.peak_distance) ** 2)


@dataclass(frozen=True)
class BoundedConfidence(InfluenceKernel):
    """Influence active only inside the confidence interval: l = mu iff d <= eps."""

    epsilon: float = 0.25
    mu: float = 0.5

    def __post_init__(self):
        if not 0.0 < self.epsilon <= 1.0:
            raise ValueError("epsilon must be in (0, 1]")
        if not 0.0 < self.mu <= 1.0:
            raise ValueError("mu must be in (0, 1]")

    def value(self, xi, x_src):
        d = np.abs(np.asarray(x_src, dtype=np.float64) - xi)
        return np.where(d <= self.epsilon, self.mu, 0.0)

    def value_scalar(self, xi: float, x_src: float) -> float:
        return self.mu if abs(x_src - xi) <= self.epsilon else 0.0


@dataclass(frozen=True)
class RelaxedBoundedConfidence(InfluenceKernel):
    """Bounded confidence with a residual response mu_out beyond the interval."""

    epsilon: float = 0.25
    mu_in: float = 0.5
    mu_out: float = 0.05

    def __post_init__(self):
        if not 0.0 < self.epsilon <= 1.0:
            raise ValueError("epsilon must be in (0, 1]")
        if not 0.0 < self.mu_in <= 1.0:
            raise ValueError("mu_in must be in (0, 1]")
        if self.mu_out == 0.0:
            raise ValueError("mu_out must be nonzero (use BoundedConfidence)")

    def value(self, xi, x_src):
        d = np.abs(np.asarray(x_src, dtype=np.float64) - xi)
        return np.where(d <= self.epsilon, self.mu_in, self.mu_out)

    def value_scalar(self, xi: float, x_src: float) -> float:
        return self.mu_in if abs(x_src - xi) <= self.epsilon else self.mu_out


@dataclass(frozen=True)
class CombinedPositiveNegative(InfluenceKernel):
    """Positive lobe up to the crossover distance, negative lobe up to the
    cutoff, hard zero beyond (no chance for interaction).

    Value is >= 0 for d < crossover, <= 0 for crossover <= d < cutoff,
    exactly 0 at the crossover and at/after the cutoff.
    """

    crossover: float = 0.4
    pos_peak_at: float = 0.2
    pos_gain: float = 0.5
    neg_peak_at: float = 0.6
    neg_gain: float = -0.3
    cutoff: float = 0.9

    def __post_init__(self):
        if not 0.0 < self.crossover < self.cutoff <= 1.0:
            raise ValueError("need 0 < crossover < cutoff <= 1")
        if not 0.0 < self.pos_peak_at < self.crossover:
            raise ValueError("pos_peak_at must lie inside (0, crossover)")
        if not self.crossover < self.neg_peak_at < self.cutoff:
            raise ValueError("neg_peak_at must lie inside (crossover, cutoff)")
        if not 0.0 < self.pos_gain <= 1.0:
            raise ValueError("pos_gain must be in (0, 1]")
        if not self.neg_gain < 0.0:
            raise ValueError("neg_gain must be negative")

    def value(self, xi, x_src):
        d = np.abs(np.asarray(x_src, dtype=np.float64) - xi)
        pos = _bump(d, 0.0, self.pos_peak_at, self.crossover, self.pos_gain)
        neg = _bump(d, self.crossover, self.neg_peak_at, self.cutoff,
                    self.neg_gain)
        return np.where(d < self.crossover, pos,
                        np.where(d < self.cutoff, neg, 0.0))


def kernel_value(kernel: InfluenceKernel, xi, x_src):
    """Signed response coefficient l for the update x' = x + l*(x_src - x)."""
    return kernel.value(xi, x_src)


def fj_update(xi, x_src, l, anchor, susceptibility):
    """Friedkin-Johnsen blend of the kernel update with a fixed anchor.

    x' = lambda * (x + l*(x_src - x)) + (1 - lambda) * g. lambda = 1 is the
    plain update; lambda = 0 pins the agent at its anchor.
    """
    xi = np.asarray(xi, dtype=np.float64)
    moved = xi + l * (np.asarray(x_src, dtype=np.float64) - xi)
    return susceptibility * moved + (1.0 - np.asarray(susceptibility)) * anchor


@dataclass(frozen=True)
class ActivationModel:
    """Base activation model; subclasses implement ``probability``.

    ``probability_scalar`` mirrors ``value_scalar`` on kernels: a float-only
    twin for the asynchronous inner loop, given the precomputed l.
    """

    def probability(self, kernel, xi, x_src, agents=None):
        raise NotImplementedError

    def probability_scalar(self, l: float, xi: float, x_src: float,
                           agent: int) -> float:
        raise NotImplementedError


@dataclass(frozen=True)
class AlwaysActive(ActivationModel):
    def probability(self, kernel, xi, x_src, agents=None):
        return np.ones_like(np.asarray(xi, dtype=np.float64))

    def probability_scalar(self, l, xi, x_src, agent):
        return 1.0


@dataclass(frozen=True)
class AbsKernelProportional(ActivationModel):
    """Activation chance proportional to the displacement the kernel prescribes.

    The curves being scaled plot the opinion shift against distance, so the
    relevant magnitude is |l * (x_src - x_i)|, clamped into [0, 1].
    """

    scale: float = 1.0

    def __post_init__(self):
        if self.scale <= 0:
            raise ValueError("scale must be positive")

    def scaled(self, magnitude):
        return np.minimum(1.0, self.scale * np.abs(magnitude))

    def probability(self, kernel, xi, x_src, agents=None):
        xi = np.asarray(xi, dtype=np.float64)
        l = kernel.value(xi, x_src)
        return self.scaled(l * (np.asarray(x_src, dtype=np.float64) - xi))

    def probability_scalar(self, l, xi, x_src, agent):
        return min(1.0, self.scale * abs(l * (x_src - xi)))


@dataclass(frozen=True)
class ConfidenceWeighted(ActivationModel):
    """Scales a base model's probability by (1 - c_i): confident agents
    are hardly influenced."""

    confidence: np.ndarray
    base: ActivationModel = field(default_factory=AlwaysActive)

    def __post_init__(self):
        c = np.asarray(self.confidence, dtype=np.float64)
        object.__setattr__(self, "confidence", c)
        if c.size and (c.min() < 0 or c.max() > 1):
            raise ValueError("confidence must lie in [0, 1]")

    def probability(self, kernel, xi, x_src, agents=None):
        p = self.base.probability(kernel, xi, x_src, agents)
        c = self.confidence if agents is None else self.confidence[agents]
        return (1.0 - c) * p

    def probability_scalar(self, l, xi, x_src, agent):
        base = self.base.probability_scalar(l, xi, x_src, agent)
        return (1.0 - float(self.confidence[agent])) * base


def activation_probability(model: ActivationModel, kernel: InfluenceKernel,
                           xi, x_src, agents=None):
    """Probability in [0, 1] that the holder updates at all this step."""
    return model.probability(kernel, xi, x_src, agents)
