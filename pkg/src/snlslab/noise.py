"""Additive noise: profiles, envelopes, Brownian paths, and the
stochastic convolution with its far-tail.

The driving increment over [t_k, t_k+dt) is phi(x) * g(t_k) * dB_k with
dB_k ~ N(0, dt). All Fourier work exploits that the free propagator is
unimodular, so L2/H1 norms of convolutions never need an inverse FFT.

Seeding: one 64-bit seed per path feeds a counter-based Philox
generator. Ensemble path seeds derive from a base seed through
SplitMix64 (seed_i = splitmix64(base + i * golden)), so ensembles can be
extended without touching existing paths and results cannot depend on
scheduling.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .grids import Field, GridSpec

__all__ = [
    "NoiseSpec",
    "NoisePath",
    "splitmix64",
    "path_seed",
    "make_phi",
    "g_value",
    "g_sq_tail_bound",
    "sample_path",
    "coarsen_path",
    "path_manifest",
    "path_from_manifest",
    "stochastic_convolution",
    "tail_convolution",
    "convolution_series",
    "tail_sup_norms",
    "tail_decay_fit",
    "TailFitResult",
]

_PHI_KINDS = ("gaussian", "gaussian_times_poly", "zero")
_G_KINDS = ("power_law", "indicator", "constant", "zero")
_GOLDEN = 0x9E3779B97F4A7C15
_MASK64 = (1 << 64) - 1


def splitmix64(x: int) -> int:
    """SplitMix64 finalizer; the documented seed-mixing primitive."""
    x = (x + _GOLDEN) & _MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & _MASK64
    return (x ^ (x >> 31)) & _MASK64


def path_seed(base_seed: int, index: int) -> int:
    """Per-path seed: splitmix64(base + index * golden), stateless in index."""
    if index < 0:
        raise ValueError(f"path index must be non-negative, got {index}")
    return splitmix64((int(base_seed) + index * _GOLDEN) & _MASK64)


@dataclass(frozen=True)
class NoiseSpec:
    """Spatial profile, temporal envelope and seed of one noise path.

    phi kinds: gaussian  amplitude * exp(-|x-c|^2 / (2 width^2));
    gaussian_times_poly multiplies that by (x_1-c)/width (odd profile,
    exercises the x.grad(phi) couplings); zero.

    g kinds: power_law  <t>^{-alpha} = (1+t^2)^{-alpha/2}; indicator of
    [t0, t1); constant; zero.
    """

    phi_kind: str = "gaussian"
    phi_width: float = 1.0
    phi_center: float = 0.0
    phi_amplitude: float = 1.0
    g_kind: str = "constant"
    g_alpha: float = 3.0
    g_t0: float = 0.0
    g_t1: float = 1.0
    g_constant: float = 1.0
    seed: int = 0

    def __post_init__(self) -> None:
        if self.phi_kind not in _PHI_KINDS:
            raise ValueError(f"phi_kind must be one of {_PHI_KINDS}, got {self.phi_kind!r}")
        if self.g_kind not in _G_KINDS:
            raise ValueError(f"g_kind must be one of {_G_KINDS}, got {self.g_kind!r}")
        if not (self.phi_width > 0 and math.isfinite(self.phi_width)):
            raise ValueError(f"phi_width must be positive, got {self.phi_width}")
        for name in ("phi_center", "phi_amplitude", "g_alpha", "g_t0", "g_t1", "g_constant"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")
        if self.g_kind == "power_law" and self.g_alpha < 0:
            raise ValueError(f"g_alpha must be non-negative, got {self.g_alpha}")
        if self.g_kind == "indicator" and not (0 <= self.g_t0 < self.g_t1):
            raise ValueError(f"indicator support needs 0 <= t0 < t1, got [{self.g_t0}, {self.g_t1})")
        if not (0 <= int(self.seed) < (1 << 64)):
            raise ValueError(f"seed must be a 64-bit non-negative integer, got {self.seed}")
        object.__setattr__(self, "seed", int(self.seed))


def make_phi(spec: NoiseSpec, grid: GridSpec) -> Field:
    """Sample the spatial profile on a grid."""
    if spec.phi_kind == "zero":
        return Field.zeros(grid)
    r2 = np.zeros(grid.shape)
    for x in grid.coords():
        r2 = r2 + (x - spec.phi_center) ** 2
    vals = spec.phi_amplitude * np.exp(-r2 / (2.0 * spec.phi_width**2))
    if spec.phi_kind == "gaussian_times_poly":
        vals = vals * (grid.coords()[0] - spec.phi_center) / spec.phi_width
    return Field(grid, np.broadcast_to(vals, grid.shape))


def g_value(spec: NoiseSpec, t: float) -> float:
    """Envelope g(t) for t >= 0."""
    t = float(t)
    if not (math.isfinite(t) and t >= 0):
        raise ValueError(f"envelope time must satisfy t >= 0, got {t}")
    if spec.g_kind == "power_law":
        return float((1.0 + t * t) ** (-0.5 * spec.g_alpha))
    if spec.g_kind == "indicator":
        return 1.0 if spec.g_t0 <= t < spec.g_t1 else 0.0
    if spec.g_kind == "constant":
        return float(spec.g_constant)
    return 0.0


def _g_values(spec: NoiseSpec, times: np.ndarray) -> np.ndarray:
    if spec.g_kind == "power_law":
        return (1.0 + times * times) ** (-0.5 * spec.g_alpha)
    if spec.g_kind == "indicator":
        return ((times >= spec.g_t0) & (times < spec.g_t1)).astype(float)
    if spec.g_kind == "constant":
        return np.full_like(times, float(spec.g_constant))
    return np.zeros_like(times)


def g_sq_tail_bound(spec: NoiseSpec, t_inf: float) -> float:
    """Upper bound for the truncated energy integral int_{T}^{inf} g(t)^2 dt.

    power_law uses the elementary bound int_T^inf t^{-2a} dt =
    T^{1-2a}/(2a-1) (infinite for a <= 1/2); indicator and zero are
    exact; a nonzero constant envelope has an infinite tail.
    """
    if t_inf <= 0:
        raise ValueError(f"t_inf must be positive, got {t_inf}")
    if spec.g_kind == "power_law":
        if spec.g_alpha <= 0.5:
            return math.inf
        return t_inf ** (1.0 - 2.0 * spec.g_alpha) / (2.0 * spec.g_alpha - 1.0)
    if spec.g_kind == "indicator":
        return max(0.0, spec.g_t1 - max(t_inf, spec.g_t0))
    if spec.g_kind == "constant":
        return math.inf if spec.g_constant != 0.0 else 0.0
    return 0.0


@dataclass(frozen=True)
class NoisePath:
    """Brownian increments on the uniform partition of [0, t_inf].

    increments[k] is dB over [k dt, (k+1) dt); there are round(t_inf/dt)
    of them. coarsen_factor records the integer ratio between dt and the
    step the path was originally seeded at, so a manifest can rebuild a
    coarsened path bit-exactly (sample fine, then group-sum).
    """

    spec: NoiseSpec
    t_inf: float
    dt: float
    increments: np.ndarray
    coarsen_factor: int = 1

    def __post_init__(self) -> None:
        if not (self.dt > 0 and math.isfinite(self.dt)):
            raise ValueError(f"dt must be positive, got {self.dt}")
        if not (self.t_inf > 0 and math.isfinite(self.t_inf)):
            raise ValueError(f"t_inf must be positive, got {self.t_inf}")
        inc = np.asarray(self.increments, dtype=np.float64)
        steps = int(round(self.t_inf / self.dt))
        if steps < 1 or abs(steps * self.dt - self.t_inf) > 1e-9 * max(1.0, self.t_inf):
            raise ValueError(f"dt {self.dt} does not evenly partition [0, {self.t_inf}]")
        if inc.ndim != 1 or len(inc) != steps:
            raise ValueError(f"expected {steps} increments, got shape {inc.shape}")
        if not np.all(np.isfinite(inc)):
            raise ValueError("increments contain non-finite entries")
        inc = inc.copy()
        inc.flags.writeable = False
        object.__setattr__(self, "increments", inc)

    @property
    def steps(self) -> int:
        return len(self.increments)

    def times(self) -> np.ndarray:
        """Partition points t_0=0 .. t_steps = t_inf."""
        return self.dt * np.arange(self.steps + 1)

    def left_times(self) -> np.ndarray:
        return self.dt * np.arange(self.steps)

    def g_at_left(self) -> np.ndarray:
        """Envelope at the left partition points (the Ito evaluation points)."""
        return _g_values(self.spec, self.left_times())

    def index_of(self, t: float) -> int:
        """Partition index of an on-partition time."""
        m = int(round(t / self.dt))
        if not (0 <= m <= self.steps) or abs(m * self.dt - t) > 1e-9 * max(1.0, self.t_inf):
            raise ValueError(f"time {t} is not on the partition of [0, {self.t_inf}] with dt {self.dt}")
        return m


def sample_path(spec: NoiseSpec, t_inf: float, dt: float) -> NoisePath:
    """Draw the path determined by spec.seed (bitwise reproducible)."""
    steps = int(round(t_inf / dt))
    if steps < 1 or abs(steps * dt - t_inf) > 1e-9 * max(1.0, t_inf):
        raise ValueError(f"dt {dt} does not evenly partition [0, {t_inf}]")
    rng = np.random.Generator(np.random.Philox(key=spec.seed))
    increments = rng.normal(0.0, math.sqrt(dt), steps)
    return NoisePath(spec, float(t_inf), float(dt), increments)


def coarsen_path(path: NoisePath, factor: int) -> NoisePath:
    """Group-sum refinement inverse: the same Brownian path on a grid
    coarser by an integer factor.

    Sums are always regrouped from the originally seeded fine path, so
    coarsening twice is bit-identical to coarsening once by the product
    of the factors — which is what a rebuilt manifest does.
    """
    factor = int(factor)
    if factor < 1 or path.steps % factor != 0:
        raise ValueError(f"coarsening factor {factor} does not divide {path.steps} steps")
    if factor == 1:
        return path
    if path.coarsen_factor != 1:
        fine = sample_path(path.spec, path.t_inf, path.dt / path.coarsen_factor)
        return coarsen_path(fine, path.coarsen_factor * factor)
    summed = path.increments.reshape(-1, factor).sum(axis=1)
    return NoisePath(path.spec, path.t_inf, path.dt * factor, summed,
                     coarsen_factor=path.coarsen_factor * factor)


def path_manifest(path: NoisePath) -> str:
    """JSON text from which the path regenerates bit-exactly."""
    spec = path.spec
    doc = {
        "phi_kind": spec.phi_kind,
        "phi_width": spec.phi_width,
        "phi_center": spec.phi_center,
        "phi_amplitude": spec.phi_amplitude,
        "g_kind": spec.g_kind,
        "g_alpha": spec.g_alpha,
        "g_t0": spec.g_t0,
        "g_t1": spec.g_t1,
        "g_constant": spec.g_constant,
        "seed": spec.seed,
        "t_inf": path.t_inf,
        "dt": path.dt,
        "coarsen_factor": path.coarsen_factor,
    }
    return json.dumps(doc, sort_keys=True)


def path_from_manifest(text: str) -> NoisePath:
    """Rebuild a path from its manifest (inverse of path_manifest)."""
    doc = json.loads(text)
    factor = int(doc.pop("coarsen_factor"))
    t_inf = float(doc.pop("t_inf"))
    dt = float(doc.pop("dt"))
    spec = NoiseSpec(**doc)
    fine = sample_path(spec, t_inf, dt / factor)
    return coarsen_path(fine, factor)


# -- stochastic convolution ----------------------------------------------
#
# z(t)      =  i sum_{t_k <  t} S(t - t_k) phi g(t_k) dB_k
# z_tail(t) = -i sum_{t_k >= t} S(t - t_k) phi g(t_k) dB_k
#
# Both factor through S(t) applied to prefix/suffix sums of
# S(-t_k) phi g(t_k) dB_k, accumulated directly in Fourier space.


def _phi_hat(phi: Field) -> np.ndarray:
    return phi.spectrum()


def _conv_accumulator(path: NoisePath, phi: Field, m: int, suffix: bool) -> np.ndarray:
    """Fourier-space sum of exp(-i t_k |k|^2) phi_hat g_k dB_k over
    k < m (prefix) or k >= m (suffix)."""
    k2 = phi.grid.k_squared()
    hat = _phi_hat(phi)
    g = path.g_at_left()
    weights = g * path.increments
    idx = range(m, path.steps) if suffix else range(m)
    acc = np.zeros(phi.grid.shape, dtype=np.complex128)
    for k in idx:
        w = weights[k]
        if w != 0.0:
            acc += np.exp(-1j * (k * path.dt) * k2) * w
    return acc * hat


def stochastic_convolution(path: NoisePath, phi: Field, t: float) -> Field:
    """z(t) at an on-partition time t (left-point Ito sum)."""
    m = path.index_of(t)
    acc = _conv_accumulator(path, phi, m, suffix=False)
    vals = 1j * np.fft.ifftn(np.exp(1j * t * phi.grid.k_squared()) * acc)
    return Field(phi.grid, vals)


def tail_convolution(path: NoisePath, phi: Field, t: float) -> Field:
    """Far-tail z_tail(t): the increments not yet seen at time t."""
    m = path.index_of(t)
    acc = _conv_accumulator(path, phi, m, suffix=True)
    vals = -1j * np.fft.ifftn(np.exp(1j * t * phi.grid.k_squared()) * acc)
    return Field(phi.grid, vals)


def convolution_series(path: NoisePath, phi: Field, through: float | None = None) -> list[Field]:
    """z at every partition point up to `through` (default t_inf).

    One running Fourier accumulator; cost is one inverse FFT per output.
    """
    stop = path.steps if through is None else path.index_of(through)
    grid = phi.grid
    k2 = grid.k_squared()
    hat = _phi_hat(phi)
    g = path.g_at_left()
    acc = np.zeros(grid.shape, dtype=np.complex128)
    out = [Field.zeros(grid)]
    for m in range(1, stop + 1):
        k = m - 1
        w = g[k] * path.increments[k]
        if w != 0.0:
            acc += np.exp(-1j * (k * path.dt) * k2) * w
        t = m * path.dt
        out.append(Field(grid, 1j * np.fft.ifftn(np.exp(1j * t * k2) * (acc * hat))))
    return out


def tail_sup_norms(path: NoisePath, phi: Field, p_space: float = 2.0) -> np.ndarray:
    """sup_{s >= t, s on the partition} of the W^{1,p} norm of the tail,
    for every partition point t.

    For p = 2 the norm is read off the Fourier accumulator (the free
    propagator is unimodular); other p evaluate the tail field per point.
    """
    from .norms import sobolev_norm

    grid = phi.grid
    k2 = grid.k_squared()
    hat = _phi_hat(phi)
    g = path.g_at_left()
    scale = grid.cell_volume / grid.num_cells
    weight = 1.0 + k2
    norms = np.zeros(path.steps + 1)
    acc = np.zeros(grid.shape, dtype=np.complex128)
    # build the suffix from the right; norms[m] is the tail seen from t_m
    for m in range(path.steps - 1, -1, -1):
        w = g[m] * path.increments[m]
        if w != 0.0:
            acc += np.exp(-1j * (m * path.dt) * k2) * w
        z_hat = acc * hat
        if p_space == 2.0:
            norms[m] = math.sqrt(float(((z_hat.real**2 + z_hat.imag**2) * weight).sum()) * scale)
        else:
            vals = -1j * np.fft.ifftn(np.exp(1j * (m * path.dt) * k2) * z_hat)
            norms[m] = sobolev_norm(Field(grid, vals), p_space, 1)
    return np.maximum.accumulate(norms[::-1])[::-1]


@dataclass(frozen=True)
class TailFitResult:
    """Per-path log-log decay slopes of the tail sup-norm, with summary."""

    t_grid: np.ndarray
    slopes: np.ndarray
    median: float
    iqr: tuple[float, float]
    truncation_bound: float


def tail_decay_fit(
    paths: Sequence[NoisePath],
    phi: Field,
    fit_window: tuple[float, float] | None = None,
    p_space: float = 2.0,
) -> TailFitResult:
    """Least-squares decay exponent of sup_{s>=t} ||tail(s)||_{W^{1,p}}.

    The fit runs over a geometric grid (ratio sqrt(2)) spanning the fit
    window, against log<t>; the window must sit inside
    [t_inf/8, t_inf/2], where the truncation of the upper limit is still
    negligible for decaying envelopes. Returns per-path slopes plus the
    ensemble median and interquartile range, and the closed-form bound
    on the truncated envelope energy.
    """
    if not paths:
        raise ValueError("need at least one path")
    spec = paths[0].spec
    if spec.g_kind == "zero":
        raise ValueError("zero envelope has no decay exponent to fit")
    t_inf, dt = paths[0].t_inf, paths[0].dt
    for p in paths:
        if (p.t_inf, p.dt) != (t_inf, dt):
            raise ValueError("all paths must share the same partition")
    lo, hi = fit_window if fit_window is not None else (t_inf / 8.0, t_inf / 2.0)
    if not (t_inf / 8.0 - 1e-12 <= lo < hi <= t_inf / 2.0 + 1e-12):
        raise ValueError(f"fit window [{lo}, {hi}] must sit inside [{t_inf / 8}, {t_inf / 2}]")
    # geometric grid with ratio sqrt(2) anchored at the window ends
    n_pts = max(2, int(round(math.log(hi / lo) / math.log(math.sqrt(2.0)))) + 1)
    t_grid = lo * (hi / lo) ** (np.arange(n_pts) / (n_pts - 1))
    log_t = np.log(np.sqrt(1.0 + t_grid**2))
    slopes = np.empty(len(paths))
    for i, path in enumerate(paths):
        sup = tail_sup_norms(path, phi, p_space)
        idx = np.rint(t_grid / dt).astype(int)
        vals = sup[idx]
        if np.any(vals <= 0.0):
            raise ValueError("tail sup-norm vanished inside the fit window")
        slopes[i] = np.polyfit(log_t, np.log(vals), 1)[0]
    q25, q75 = np.percentile(slopes, [25.0, 75.0])
    from .norms import lp_norm

    bound = lp_norm(phi, 2.0) ** 2 * g_sq_tail_bound(spec, t_inf)
    return TailFitResult(
        t_grid=t_grid,
        slopes=slopes,
        median=float(np.median(slopes)),
        iqr=(float(q25), float(q75)),
        truncation_bound=float(bound),
    )
