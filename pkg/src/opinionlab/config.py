"""Run configuration: sectioned key=value files, strictly validated.

Sections map onto the model surfaces (kernel, activation, schedule,
population, homophily, observer, analysis). Unknown sections or keys are
rejected; numeric parameters are validated by constructing the actual model
objects so every invariant is enforced at load time. Seeds are mandatory:
no run may fall back to wall-clock entropy.
"""

from __future__ import annotations

import configparser
import hashlib
import json
from dataclasses import dataclass, field

import numpy as np

from . import dynamics, kernels
from .generator import HomophilySpec, PopulationSpec
from .observer import LatentDrive, ObserverSpec, SubscriptionParams, default_source_grid


class ConfigError(ValueError):
    """Invalid or incomplete run configuration."""


MODES = ("simulate", "generate", "observe", "analyze", "report")

_KERNEL_KEYS = {
    "linear_positive": {"l0"},
    "linear_negative": {"l0"},
    "moderated_positive": {"peak_distance", "peak_gain"},
    "moderated_negative": {"peak_distance", "peak_gain"},
    "bounded_confidence": {"epsilon", "mu"},
    "relaxed_bounded_confidence": {"epsilon", "mu_in", "mu_out"},
    "combined": {"crossover", "pos_peak_at", "pos_gain", "neg_peak_at",
                 "neg_gain", "cutoff"},
}

_SECTION_KEYS = {
    "run": {"mode", "seed", "out", "dataset"},
    "kernel": {"variant", "stubborn"} | set().union(*_KERNEL_KEYS.values()),
    "activation": {"model", "scale", "confidence"},
    "schedule": {"kind", "steps_per_observation", "observations", "source",
                 "clamp"},
    "population": {"n", "fractions", "mean_degree", "mean_degrees"},
    "homophily": {"h", "target"},
    "observer": {"eta", "source_spacing", "biases", "alpha", "beta",
                 "threshold", "subs_steps", "init_subs_steps", "min_follows",
                 "max_follows", "bias_drift", "moderation_rho", "moderation_m"},
    "analysis": {"bin_width", "neighbor_stability_filter", "sigma_edges",
                 "low_support_floor"},
}

_MODE_SECTIONS = {
    "simulate": {"kernel", "schedule"},
    "generate": {"population"},
    "observe": {"kernel", "schedule", "population", "observer"},
    "analyze": set(),
    "report": set(),
}


def _float_list(text: str) -> tuple:
    return tuple(float(v.strip()) for v in text.split(","))


def _bool(text: str) -> bool:
    t = text.strip().lower()
    if t in ("true", "1", "yes", "on"):
        return True
    if t in ("false", "0", "no", "off"):
        return False
    raise ConfigError(f"not a boolean: {text!r}")


@dataclass
class RunConfig:
    """Validated run configuration plus the resolved-parameter dict."""

    mode: str
    seed: int
    out: str
    dataset: str | None
    kernel: kernels.InfluenceKernel | None
    activation: kernels.ActivationModel | None
    schedule: dynamics.Schedule | None
    observations: int
    population: PopulationSpec | None
    homophily: HomophilySpec | None
    subscription: SubscriptionParams | None
    observer: ObserverSpec | None
    drive: LatentDrive | None
    source_biases: np.ndarray | None
    observer_extras: dict
    bin_width: float
    neighbor_stability_filter: bool
    sigma_edges: tuple | None
    low_support_floor: int
    resolved: dict = field(default_factory=dict)

    def config_hash(self) -> str:
        payload = json.dumps(self.resolved, sort_keys=True)
        return hashlib.sha256(payload.encode()).hexdigest()[:16]


def _build_kernel(sec) -> kernels.InfluenceKernel:
    variant = sec.get("variant")
    if variant not in _KERNEL_KEYS:
        raise ConfigError(f"unknown kernel variant {variant!r}")
    allowed = _KERNEL_KEYS[variant] | {"variant", "stubborn"}
    for key in sec:
        if key not in allowed:
            raise ConfigError(f"key {key!r} not valid for kernel {variant!r}")
    stubborn = frozenset(int(v) for v in sec["stubborn"].split(",")) \
        if "stubborn" in sec else frozenset()
    params = {k: float(sec[k]) for k in sec
              if k in _KERNEL_KEYS[variant]}
    ctor = {
        "linear_positive": kernels.LinearPositive,
        "linear_negative": kernels.LinearNegative,
        "moderated_positive": kernels.ModeratedPositive,
        "moderated_negative": kernels.ModeratedNegative,
        "bounded_confidence": kernels.BoundedConfidence,
        "relaxed_bounded_confidence": kernels.RelaxedBoundedConfidence,
        "combined": kernels.CombinedPositiveNegative,
    }[variant]
    try:
        return ctor(**params, stubborn_set=stubborn)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"kernel {variant}: {exc}") from exc


def _build_activation(sec, n_agents_hint=None) -> kernels.ActivationModel:
    model = sec.get("model", "always")
    try:
        if model == "always":
            return kernels.AlwaysActive()
        if model == "abs_kernel":
            return kernels.AbsKernelProportional(scale=float(sec.get("scale", 1.0)))
        if model == "confidence":
            c = float(sec["confidence"])
            n = n_agents_hint or 1
            return kernels.ConfidenceWeighted(confidence=np.full(n, c))
    except (KeyError, ValueError) as exc:
        raise ConfigError(f"activation {model}: {exc}") from exc
    raise ConfigError(f"unknown activation model {model!r}")


def load_config(path, overrides: dict | None = None) -> RunConfig:
    """Parse, validate, and resolve a config file.

    overrides (from CLI flags) replace [run] values before validation.
    """
    parser = configparser.ConfigParser(interpolation=None)
    read = parser.read(path)
    if not read:
        raise ConfigError(f"cannot read config file {path}")

    sections = {s: dict(parser.items(s)) for s in parser.sections()}
    for name, keys in sections.items():
        if name not in _SECTION_KEYS:
            raise ConfigError(f"unknown section [{name}]")
        for key in keys:
            if key not in _SECTION_KEYS[name]:
                raise ConfigError(f"unknown key {key!r} in section [{name}]")

    run = sections.get("run", {})
    if overrides:
        run.update({k: str(v) for k, v in overrides.items() if v is not None})

    mode = run.get("mode")
    if mode not in MODES:
        raise ConfigError(f"mode must be one of {MODES}, got {mode!r}")
    if "seed" not in run:
        raise ConfigError("seed is mandatory (no wall-clock default)")
    try:
        seed = int(run["seed"])
    except ValueError as exc:
        raise ConfigError(f"seed: {exc}") from exc
    out = run.get("out", "out")
    dataset = run.get("dataset")

    needed = _MODE_SECTIONS[mode]
    for name in needed:
        if name not in sections:
            raise ConfigError(f"mode {mode!r} requires section [{name}]")
    if mode in ("analyze", "report") and not dataset:
        raise ConfigError(f"mode {mode!r} requires a dataset directory")
    if mode == "simulate" and not dataset and "population" not in sections:
        raise ConfigError("simulate needs either a dataset or a [population] section")

    kernel = _build_kernel(sections["kernel"]) if "kernel" in sections else None

    schedule = None
    observations = 1
    if "schedule" in sections:
        sec = sections["schedule"]
        try:
            schedule = dynamics.Schedule(
                kind=sec.get("kind", dynamics.SYNCHRONOUS),
                steps_per_observation=int(sec.get("steps_per_observation", 1)),
                rng_seed=seed,
                source=sec.get("source", dynamics.SOURCE_MEAN),
                clamp=_bool(sec.get("clamp", "true")),
            )
            observations = int(sec.get("observations", 1))
        except ValueError as exc:
            raise ConfigError(f"schedule: {exc}") from exc
        if observations < 1:
            raise ConfigError("observations must be >= 1")

    population = None
    if "population" in sections:
        sec = sections["population"]
        if "mean_degree" in sec and "mean_degrees" in sec:
            raise ConfigError("give mean_degree or mean_degrees, not both")
        try:
            md = (_float_list(sec["mean_degrees"]) if "mean_degrees" in sec
                  else float(sec.get("mean_degree", 16.0)))
            population = PopulationSpec(
                n=int(sec["n"]),
                group_fractions=_float_list(
                    sec.get("fractions", "0.08,0.19,0.53,0.16,0.04")),
                mean_degrees=md,
            )
        except (KeyError, ValueError) as exc:
            raise ConfigError(f"population: {exc}") from exc

    homophily = None
    if "homophily" in sections:
        sec = sections["homophily"]
        try:
            homophily = HomophilySpec(
                h=float(sec.get("h", 0.0)),
                target_assortativity=(float(sec["target"])
                                      if "target" in sec else None),
            )
        except ValueError as exc:
            raise ConfigError(f"homophily: {exc}") from exc
    elif population is not None:
        homophily = HomophilySpec(h=0.0)

    subscription = observer = drive = None
    source_biases = None
    observer_extras = {}
    if "observer" in sections:
        sec = sections["observer"]
        if "biases" in sec and "source_spacing" in sec:
            raise ConfigError("give biases or source_spacing, not both")
        try:
            subscription = SubscriptionParams(
                alpha=float(sec.get("alpha", 8.0)),
                beta=float(sec.get("beta", 4.0)),
                threshold=float(sec.get("threshold", 0.2)),
            )
            observer = ObserverSpec(eta=float(sec.get("eta", 0.0)))
            drive = LatentDrive(rho=float(sec.get("moderation_rho", 0.3)),
                                m=float(sec.get("moderation_m", 0.0)))
            source_biases = (np.asarray(_float_list(sec["biases"]))
                             if "biases" in sec
                             else default_source_grid(
                                 float(sec.get("source_spacing", 0.05))))
            observer_extras = {
                "subs_steps_per_observation": int(sec.get("subs_steps", 1)),
                "init_subs_steps": int(sec.get("init_subs_steps", 3)),
                "min_follows": int(sec.get("min_follows", 1)),
                "max_follows": int(sec.get("max_follows", 200)),
                "bias_drift": float(sec.get("bias_drift", 0.0)),
            }
        except (KeyError, ValueError) as exc:
            raise ConfigError(f"observer: {exc}") from exc

    ana = sections.get("analysis", {})
    try:
        bin_width = float(ana.get("bin_width", 0.05))
        stability = _bool(ana.get("neighbor_stability_filter", "true"))
        sigma_edges = (_float_list(ana["sigma_edges"])
                       if "sigma_edges" in ana else None)
        floor = int(ana.get("low_support_floor", 20))
    except ValueError as exc:
        raise ConfigError(f"analysis: {exc}") from exc
    if not (0 < bin_width <= 1) or abs(round(1 / bin_width) * bin_width - 1) > 1e-9:
        raise ConfigError("bin_width must divide 1 evenly")

    activation = None
    if "activation" in sections:
        hint = population.n if population is not None else None
        activation = _build_activation(sections["activation"], hint)
    elif kernel is not None:
        activation = kernels.AlwaysActive()

    resolved = {
        "mode": mode, "seed": seed, "dataset": dataset,
        "kernel": repr(kernel), "activation": repr(activation),
        "schedule": repr(schedule), "observations": observations,
        "population": repr(population), "homophily": repr(homophily),
        "subscription": repr(subscription), "observer": repr(observer),
        "drive": repr(drive),
        "source_biases": (source_biases.tolist()
                          if source_biases is not None else None),
        "observer_extras": observer_extras,
        "bin_width": bin_width, "neighbor_stability_filter": stability,
        "sigma_edges": sigma_edges, "low_support_floor": floor,
    }

    return RunConfig(
        mode=mode, seed=seed, out=out, dataset=dataset,
        kernel=kernel, activation=activation, schedule=schedule,
        observations=observations, population=population, homophily=homophily,
        subscription=subscription, observer=observer, drive=drive,
        source_biases=source_biases, observer_extras=observer_extras,
        bin_width=bin_width, neighbor_stability_filter=stability,
        sigma_edges=sigma_edges, low_support_floor=floor, resolved=resolved,
    )
