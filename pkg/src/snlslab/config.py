"""Experiment configuration: flat dotted key-value text, strictly validated.

Config files are plain text: one ``section.key = value`` per line, ``#``
starts a comment, blank lines ignored. Every key is typed and belongs
to a fixed schema; unknown keys are rejected (with the offending key
path) rather than ignored, and keys from sections an experiment kind
does not consume are rejected too, so a typo can never silently steer a
run.

Experiment kinds and the sections they read:

===========  ============================================================
kind         sections
===========  ============================================================
simulate     grid, sim, initial, output [, noise when sim.equation=snls]
ensemble     grid, sim, initial, noise, ensemble, output
tail-decay   noise, tail, ensemble, output
scatter-test grid, sim, initial, scatter, output [, noise]
growth-fit   grid, sim, initial, noise, ensemble, growth, output
regimes      regimes, output
selftest     selftest, output
===========  ============================================================

Defaults are materialized at load time and echoed back through
``ExperimentConfig.echo()``; the SHA-256 of that canonical echo is the
config hash recorded in report manifests, so the hash changes exactly
when the effective configuration changes.

Experiments that reference an asymptotic statement by name check its
hypotheses at load time: a scatter test naming a scattering class whose
window or noise-decay requirement fails gets a warning (or a hard
refusal under ``strict=True``), and a tail study whose envelope has a
divergent tail integral is always refused.
"""
from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .analysis import classify_regime
from .dynamics import EQUATION_KINDS, SimConfig
from .grids import Field, GridSpec
from .noise import NoiseSpec, g_sq_tail_bound

__all__ = [
    "ConfigError",
    "InitialSpec",
    "ScatterSpec",
    "GrowthSpec",
    "TailSpec",
    "RegimeQuery",
    "ExperimentConfig",
    "load_config",
    "parse_config_text",
    "make_initial",
]

EXPERIMENT_KINDS = (
    "simulate",
    "ensemble",
    "tail-decay",
    "scatter-test",
    "growth-fit",
    "regimes",
    "selftest",
)

_INITIAL_KINDS = ("gaussian", "zero")
_NORM_KINDS = ("L2", "H1", "Sigma")
_THEOREM_NAMES = ("short_range_L2", "sigma_scattering", "h1_scattering")


class ConfigError(ValueError):
    """Configuration rejected; the message carries the key path."""


@dataclass(frozen=True)
class InitialSpec:
    """Initial condition family: a centered complex Gaussian or zero."""

    kind: str = "gaussian"
    amplitude: float = 1.0
    width: float = 1.0

    def __post_init__(self) -> None:
        if self.kind not in _INITIAL_KINDS:
            raise ConfigError(
                f"initial.kind: must be one of {_INITIAL_KINDS}, got {self.kind!r}"
            )
        if not (self.width > 0 and math.isfinite(self.width)):
            raise ConfigError(f"initial.width: must be positive, got {self.width}")
        if not math.isfinite(self.amplitude):
            raise ConfigError("initial.amplitude: must be finite")


def make_initial(spec: InitialSpec, grid: GridSpec) -> Field:
    """Sample the configured initial condition on a grid."""
    if spec.kind == "zero":
        return Field.zeros(grid)
    r2 = grid.radius_squared()
    vals = spec.amplitude * np.exp(-r2 / (2.0 * spec.width**2))
    return Field(grid, vals.astype(complex))


@dataclass(frozen=True)
class ScatterSpec:
    """Scatter-test controls: checkpoints, norm, referenced statement."""

    checkpoints: tuple[float, ...]
    norm_kind: str = "Sigma"
    theorem: str | None = None


@dataclass(frozen=True)
class GrowthSpec:
    """Growth-fit controls: geometric horizon grid and one-sided slack."""

    tau_grid: tuple[float, ...]
    bound_slack: float = 0.25


@dataclass(frozen=True)
class TailSpec:
    """Tail-study controls: horizon, partition, ensemble size, norm."""

    t_inf: float
    dt: float = 1e-3
    paths: int = 100
    p_space: float = 2.0
    window_lo: float | None = None
    window_hi: float | None = None


@dataclass(frozen=True)
class RegimeQuery:
    """Triple fed to the regime classifier."""

    dim: int
    two_sigma: float
    alpha: float


@dataclass(frozen=True)
class ExperimentConfig:
    """One fully validated experiment; every default materialized."""

    kind: str
    grid: GridSpec | None = None
    sim: SimConfig | None = None
    initial: InitialSpec | None = None
    noise: NoiseSpec | None = None
    ensemble_size: int = 1
    workers: int = 1
    base_seed: int = 0
    out_dir: str = "runs"
    scatter: ScatterSpec | None = None
    growth: GrowthSpec | None = None
    tail: TailSpec | None = None
    regimes: RegimeQuery | None = None
    selftest_points: int = 64
    strict: bool = False
    warnings: tuple[str, ...] = ()
    resolved: tuple[tuple[str, str], ...] = field(default=(), repr=False)

    def echo(self) -> str:
        """Canonical key = value text of the effective configuration."""
        return "\n".join(f"{k} = {v}" for k, v in self.resolved) + "\n"

    @property
    def config_hash(self) -> str:
        return hashlib.sha256(self.echo().encode()).hexdigest()


# ---------------------------------------------------------------------------
# Schema
# ---------------------------------------------------------------------------

_SCHEMA: dict[str, tuple] = {
    # key: (type tag, default or None=required-when-section-used)
    "experiment.kind": ("str", None),
    "grid.dim": ("int", 1),
    "grid.points": ("int", 256),
    "grid.box_length": ("float", 24.0),
    "sim.sigma": ("float", None),
    "sim.dt": ("float", 1e-3),
    "sim.t_end": ("float", None),
    "sim.equation": ("str", "deterministic"),
    "sim.snapshot_stride": ("int", 10),
    "sim.record": ("str", "full"),
    "initial.kind": ("str", "gaussian"),
    "initial.amplitude": ("float", 1.0),
    "initial.width": ("float", 1.0),
    "noise.phi_kind": ("str", "gaussian"),
    "noise.phi_width": ("float", 1.0),
    "noise.phi_center": ("float", 0.0),
    "noise.phi_amplitude": ("float", 1.0),
    "noise.g_kind": ("str", "constant"),
    "noise.g_alpha": ("float", 3.0),
    "noise.g_t0": ("float", 0.0),
    "noise.g_t1": ("float", 1.0),
    "noise.g_constant": ("float", 1.0),
    "noise.seed": ("int", 0),
    "ensemble.size": ("int", 1),
    "ensemble.workers": ("int", 1),
    "output.dir": ("str", "runs"),
    "scatter.checkpoints": ("float_list", None),
    "scatter.norm": ("str", "Sigma"),
    "scatter.theorem": ("str", ""),
    "growth.tau_grid": ("float_list", None),
    "growth.bound_slack": ("float", 0.25),
    "tail.t_inf": ("float", None),
    "tail.dt": ("float", 1e-3),
    "tail.paths": ("int", 100),
    "tail.p_space": ("float", 2.0),
    "tail.window_lo": ("float", math.nan),
    "tail.window_hi": ("float", math.nan),
    "regimes.dim": ("int", None),
    "regimes.two_sigma": ("float", None),
    "regimes.alpha": ("float", None),
    "selftest.points": ("int", 64),
}

_SECTIONS_BY_KIND: dict[str, tuple[str, ...]] = {
    "simulate": ("experiment", "grid", "sim", "initial", "noise", "output"),
    "ensemble": ("experiment", "grid", "sim", "initial", "noise", "ensemble", "output"),
    "tail-decay": ("experiment", "grid", "noise", "tail", "ensemble", "output"),
    "scatter-test": ("experiment", "grid", "sim", "initial", "noise", "scatter", "output"),
    "growth-fit": ("experiment", "grid", "sim", "initial", "noise", "ensemble", "growth", "output"),
    "regimes": ("experiment", "regimes", "output"),
    "selftest": ("experiment", "selftest", "output"),
}

_REQUIRED_BY_KIND: dict[str, tuple[str, ...]] = {
    "simulate": ("sim.sigma", "sim.t_end"),
    "ensemble": ("sim.sigma", "sim.t_end"),
    "tail-decay": ("tail.t_inf",),
    "scatter-test": ("sim.sigma", "sim.t_end", "scatter.checkpoints"),
    "growth-fit": ("sim.sigma", "sim.t_end", "growth.tau_grid"),
    "regimes": ("regimes.dim", "regimes.two_sigma", "regimes.alpha"),
    "selftest": (),
}


def _convert(key: str, raw: str):
    tag, _ = _SCHEMA[key]
    raw = raw.strip()
    try:
        if tag == "int":
            return int(raw)
        if tag == "float":
            return float(raw)
        if tag == "float_list":
            parts = [p for p in raw.split(",") if p.strip()]
            if not parts:
                raise ValueError("empty list")
            return tuple(float(p) for p in parts)
        return raw
    except ValueError as exc:
        raise ConfigError(f"{key}: cannot parse {raw!r} as {tag} ({exc})") from None


def parse_config_text(text: str) -> dict[str, object]:
    """Parse raw config text into a typed key -> value mapping.

    Rejects unknown keys, duplicate keys, and malformed lines, naming
    the key (or line) in the error.
    """
    values: dict[str, object] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        if "=" not in body:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {line!r}")
        key, raw = body.split("=", 1)
        key = key.strip()
        if key not in _SCHEMA:
            raise ConfigError(f"{key}: unknown key (line {lineno})")
        if key in values:
            raise ConfigError(f"{key}: duplicate key (line {lineno})")
        values[key] = _convert(key, raw)
    return values


def _effective_alpha(noise: NoiseSpec | None) -> float:
    """Decay exponent to test hypotheses against.

    Power-law envelopes use their own alpha. Compactly supported or
    absent noise decays faster than any power (alpha = inf); a nonzero
    constant envelope never decays (alpha = 0).
    """
    if noise is None or noise.phi_kind == "zero" or noise.g_kind == "zero":
        return math.inf
    if noise.g_kind == "indicator":
        return math.inf
    if noise.g_kind == "constant":
        return math.inf if noise.g_constant == 0.0 else 0.0
    return noise.g_alpha


def _check_scatter_hypotheses(
    kind: str,
    scatter: ScatterSpec,
    grid: GridSpec,
    sim: SimConfig,
    noise: NoiseSpec | None,
) -> list[str]:
    if not scatter.theorem:
        return []
    report = classify_regime(grid.dim, 2.0 * sim.sigma, _effective_alpha(noise))
    check = {c.name: c for c in report.checks}[scatter.theorem]
    if check.applies:
        return []
    reasons = []
    if not check.window_ok:
        reasons.append(
            f"nonlinearity window fails (2*sigma = {2.0 * sim.sigma:g}, "
            f"class = {report.regime_class})"
        )
    if not check.decay_ok:
        reasons.append(
            f"noise decay fails (effective alpha = {_effective_alpha(noise):g}, "
            f"needs > {check.required_alpha:g})"
        )
    return [
        f"{kind} references {scatter.theorem} but its hypotheses are unmet: "
        + "; ".join(reasons)
    ]


def load_config(
    path: str | Path | None = None,
    *,
    text: str | None = None,
    strict: bool = False,
    overrides: dict[str, object] | None = None,
) -> ExperimentConfig:
    """Load, validate, and materialize an experiment configuration.

    Exactly one of ``path`` or ``text`` must be given. ``overrides``
    maps schema keys to replacement values (the CLI routes --seed,
    --workers, --out through it); overridden values participate in the
    canonical echo and therefore in the config hash. With ``strict``
    any hypothesis warning becomes a hard error.
    """
    if (path is None) == (text is None):
        raise ConfigError("exactly one of path or text must be given")
    if path is not None:
        p = Path(path)
        if not p.is_file():
            raise ConfigError(f"config file not found: {p}")
        text = p.read_text()
    values = parse_config_text(text)
    for key, val in (overrides or {}).items():
        if key not in _SCHEMA:
            raise ConfigError(f"{key}: unknown override key")
        values[key] = val

    kind = values.get("experiment.kind")
    if kind is None:
        raise ConfigError("experiment.kind: missing required key")
    if kind not in EXPERIMENT_KINDS:
        raise ConfigError(
            f"experiment.kind: must be one of {EXPERIMENT_KINDS}, got {kind!r}"
        )

    sections = _SECTIONS_BY_KIND[kind]
    for key in values:
        if key.split(".", 1)[0] not in sections:
            raise ConfigError(f"{key}: not used by experiment kind {kind!r}")
    for key in _REQUIRED_BY_KIND[kind]:
        if key not in values:
            raise ConfigError(f"{key}: missing required key for kind {kind!r}")

    def get(key: str):
        if key in values:
            return values[key]
        _, default = _SCHEMA[key]
        if default is None:
            raise ConfigError(f"{key}: missing required key")
        return default

    warnings: list[str] = []

    uses_pde = kind in ("simulate", "ensemble", "scatter-test", "growth-fit")
    uses_noise_section = any(k.startswith("noise.") for k in values)

    grid = sim = initial = noise = None
    if uses_pde:
        try:
            grid = GridSpec(get("grid.dim"), get("grid.points"), get("grid.box_length"))
        except ValueError as exc:
            raise ConfigError(f"grid: {exc}") from None
        equation = get("sim.equation")
        if equation not in EQUATION_KINDS:
            raise ConfigError(
                f"sim.equation: must be one of {EQUATION_KINDS}, got {equation!r}"
            )
        needs_noise = equation == "snls" or kind in ("ensemble", "growth-fit")
        if needs_noise:
            if kind in ("ensemble", "growth-fit") and equation == "deterministic":
                raise ConfigError(
                    f"sim.equation: kind {kind!r} runs noise ensembles; "
                    "set sim.equation = snls"
                )
            try:
                noise = NoiseSpec(
                    phi_kind=get("noise.phi_kind"),
                    phi_width=get("noise.phi_width"),
                    phi_center=get("noise.phi_center"),
                    phi_amplitude=get("noise.phi_amplitude"),
                    g_kind=get("noise.g_kind"),
                    g_alpha=get("noise.g_alpha"),
                    g_t0=get("noise.g_t0"),
                    g_t1=get("noise.g_t1"),
                    g_constant=get("noise.g_constant"),
                    seed=get("noise.seed"),
                )
            except ValueError as exc:
                raise ConfigError(f"noise: {exc}") from None
        elif uses_noise_section:
            raise ConfigError(
                "noise.*: noise keys are set but sim.equation = "
                f"{equation!r} does not consume them"
            )
        record = get("sim.record")
        if record not in ("full", "light"):
            raise ConfigError(f"sim.record: must be 'full' or 'light', got {record!r}")
        try:
            sim = SimConfig(
                grid=grid,
                sigma=get("sim.sigma"),
                dt=get("sim.dt"),
                t_end=get("sim.t_end"),
                equation=equation,
                noise=noise,
                snapshot_stride=get("sim.snapshot_stride"),
                record=record,
            )
        except ValueError as exc:
            raise ConfigError(f"sim: {exc}") from None
        initial = InitialSpec(
            kind=get("initial.kind"),
            amplitude=get("initial.amplitude"),
            width=get("initial.width"),
        )

    scatter = growth = tail = regimes = None
    if kind == "scatter-test":
        norm_kind = get("scatter.norm")
        if norm_kind not in _NORM_KINDS:
            raise ConfigError(
                f"scatter.norm: must be one of {_NORM_KINDS}, got {norm_kind!r}"
            )
        theorem = get("scatter.theorem") or None
        if theorem is not None and theorem not in _THEOREM_NAMES:
            raise ConfigError(
                f"scatter.theorem: must be one of {_THEOREM_NAMES}, got {theorem!r}"
            )
        checkpoints = get("scatter.checkpoints")
        if len(checkpoints) < 3:
            raise ConfigError(
                f"scatter.checkpoints: need at least 3 checkpoints, got {len(checkpoints)}"
            )
        if any(b <= a for a, b in zip(checkpoints, checkpoints[1:])):
            raise ConfigError("scatter.checkpoints: must be strictly increasing")
        if checkpoints[-1] > sim.t_end + 1e-9:
            raise ConfigError(
                f"scatter.checkpoints: last checkpoint {checkpoints[-1]:g} exceeds "
                f"sim.t_end = {sim.t_end:g}"
            )
        stride_dt = sim.snapshot_stride * sim.dt
        for c in checkpoints:
            on_grid = abs(c - round(c / stride_dt) * stride_dt) <= 1e-9
            if not on_grid and abs(c - sim.t_end) > 1e-9:
                raise ConfigError(
                    f"scatter.checkpoints: {c:g} is not a recorded snapshot time "
                    f"(multiples of snapshot_stride*dt = {stride_dt:g}, or t_end)"
                )
        scatter = ScatterSpec(checkpoints=checkpoints, norm_kind=norm_kind, theorem=theorem)
        warnings.extend(_check_scatter_hypotheses(kind, scatter, grid, sim, noise))

    if kind == "growth-fit":
        tau_grid = get("growth.tau_grid")
        if tau_grid[-1] > sim.t_end + 1e-9:
            raise ConfigError(
                f"growth.tau_grid: last horizon {tau_grid[-1]:g} exceeds "
                f"sim.t_end = {sim.t_end:g}"
            )
        if sim.record != "full":
            raise ConfigError("sim.record: growth-fit needs record = full")
        growth = GrowthSpec(tau_grid=tau_grid, bound_slack=get("growth.bound_slack"))

    if kind == "tail-decay":
        try:
            grid = GridSpec(get("grid.dim"), get("grid.points"), get("grid.box_length"))
        except ValueError as exc:
            raise ConfigError(f"grid: {exc}") from None
        noise = NoiseSpec(
            phi_kind=get("noise.phi_kind"),
            phi_width=get("noise.phi_width"),
            phi_center=get("noise.phi_center"),
            phi_amplitude=get("noise.phi_amplitude"),
            g_kind=get("noise.g_kind"),
            g_alpha=get("noise.g_alpha"),
            g_t0=get("noise.g_t0"),
            g_t1=get("noise.g_t1"),
            g_constant=get("noise.g_constant"),
            seed=get("noise.seed"),
        )
        t_inf = get("tail.t_inf")
        if not t_inf > 0:
            raise ConfigError(f"tail.t_inf: must be positive, got {t_inf}")
        if not math.isfinite(g_sq_tail_bound(noise, max(t_inf / 8.0, 1e-9))):
            raise ConfigError(
                "tail.t_inf: the envelope's truncated tail integral diverges "
                "(needs a power law with alpha > 1/2, an indicator, or zero); "
                "the tail study's decay hypothesis cannot be met"
            )
        lo, hi = get("tail.window_lo"), get("tail.window_hi")
        if math.isnan(lo) != math.isnan(hi):
            raise ConfigError("tail.window_lo/window_hi: set both or neither")
        paths = get("tail.paths")
        if paths < 2:
            raise ConfigError(f"tail.paths: need at least 2 paths, got {paths}")
        tail = TailSpec(
            t_inf=t_inf,
            dt=get("tail.dt"),
            paths=paths,
            p_space=get("tail.p_space"),
            window_lo=None if math.isnan(lo) else lo,
            window_hi=None if math.isnan(hi) else hi,
        )

    if kind == "regimes":
        regimes = RegimeQuery(
            dim=get("regimes.dim"),
            two_sigma=get("regimes.two_sigma"),
            alpha=get("regimes.alpha"),
        )

    ensemble_size = get("ensemble.size")
    if ensemble_size < 1:
        raise ConfigError(f"ensemble.size: must be >= 1, got {ensemble_size}")
    workers = get("ensemble.workers")
    if workers < 1:
        raise ConfigError(f"ensemble.workers: must be >= 1, got {workers}")
    if kind == "growth-fit" and ensemble_size < 200:
        warnings.append(
            f"ensemble.size = {ensemble_size}: growth-exponent fits want at "
            "least 200 paths for a stable ensemble mean"
        )

    selftest_points = get("selftest.points")

    if strict and warnings:
        raise ConfigError(
            "strict mode: " + " | ".join(warnings)
        )

    # Canonical echo: every key the kind consumes, with its effective
    # value. Execution topology (ensemble.workers) and artifact location
    # (output.dir) are excluded: they cannot affect results, so they must
    # not affect the config hash.
    resolved: list[tuple[str, str]] = []
    for key in sorted(_SCHEMA):
        if key in ("ensemble.workers", "output.dir"):
            continue
        if key.split(".", 1)[0] not in sections:
            continue
        if key.startswith("noise.") and noise is None:
            continue
        try:
            val = get(key)
        except ConfigError:
            continue  # unused optional requirement of another kind
        if isinstance(val, tuple):
            rendered = ",".join(repr(v) for v in val)
        else:
            rendered = repr(val) if isinstance(val, float) else str(val)
        resolved.append((key, rendered))

    return ExperimentConfig(
        kind=kind,
        grid=grid,
        sim=sim,
        initial=initial,
        noise=noise,
        ensemble_size=ensemble_size,
        workers=workers,
        base_seed=noise.seed if noise is not None else 0,
        out_dir=str(get("output.dir")),
        scatter=scatter,
        growth=growth,
        tail=tail,
        regimes=regimes,
        selftest_points=selftest_points,
        strict=strict,
        warnings=tuple(warnings),
        resolved=tuple(resolved),
    )


def with_path_seed(config: ExperimentConfig, index: int) -> SimConfig:
    """Per-path simulation config: the base noise spec reseeded for one path."""
    from .noise import path_seed

    if config.sim is None or config.noise is None:
        raise ConfigError(f"kind {config.kind!r} does not run seeded paths")
    reseeded = replace(config.noise, seed=path_seed(config.base_seed, index))
    return replace(config.sim, noise=reseeded)
