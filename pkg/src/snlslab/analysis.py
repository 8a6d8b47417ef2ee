"""Regime classification, scattering diagnostics, growth fits, space-time monitors.

The classifier is pure arithmetic on (dimension, nonlinearity order,
noise-decay exponent). Everything else consumes simulated trajectories:
scattering diagnostics undo the free flow at checkpoints and measure
Cauchy differences, growth fits regress ensemble means of running
suprema on a geometric horizon grid, and the space-time monitor
accumulates mixed norms over a configurable pair list.

Conventions used throughout:

* ``two_sigma`` is the power in the nonlinearity |u|^{2 sigma} u, i.e.
  twice the ``sigma`` carried by simulation configs.
* A mixed-norm pair is written (space exponent p, time exponent q),
  so (2, inf) is the sup-in-time L^2 norm. Admissibility means
  2/q = n(1/2 - 1/p) with the single forbidden triple (p, q, n) =
  (inf, 2, 2).
* Decay envelopes are the power-law family (1+t)^{-alpha}; the
  little-o hypotheses of the scattering statements translate to the
  strict thresholds alpha > 5/2 (L^2 and weighted-space scattering)
  and alpha > 1 (H^1 scattering).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .grids import Field
from .norms import lp_norm, sigma_norm, sobolev_norm
from .operators import propagate

__all__ = [
    "ALPHA_H1",
    "ALPHA_WEIGHTED",
    "TheoremCheck",
    "RegimeReport",
    "strauss_exponent",
    "classify_regime",
    "is_admissible",
    "ScatteringReport",
    "scattering_cauchy",
    "GrowthFitResult",
    "growth_fit",
    "MonitorPair",
    "default_monitor_pairs",
    "PairSeries",
    "StrichartzReport",
    "strichartz_monitor",
]

ALPHA_WEIGHTED = 2.5
ALPHA_H1 = 1.0

_NORM_KINDS = ("L2", "H1", "Sigma")


def strauss_exponent(n: int) -> float:
    """Positive threshold exponent (2-n+sqrt(n^2+12n+4))/(2n).

    Evaluates to exactly 1.0 for n=3 (the discriminant is 49) and to
    sqrt(2) for n=2.
    """
    if int(n) != n or n < 1:
        raise ValueError(f"dimension must be a positive integer, got {n}")
    n = int(n)
    return (2.0 - n + math.sqrt(n * n + 12.0 * n + 4.0)) / (2.0 * n)


@dataclass(frozen=True)
class TheoremCheck:
    """Applicability record for one scattering statement.

    ``window_ok`` is the nonlinearity-window test alone, ``decay_ok``
    the noise-decay test alone; ``applies`` is their conjunction. When
    ``small_data_required`` is set the window test passed only through
    the mass-critical boundary case, which carries a smallness
    condition on the data that cannot be checked from exponents.
    """

    name: str
    window_ok: bool
    decay_ok: bool
    required_alpha: float
    applies: bool
    small_data_required: bool = False


@dataclass(frozen=True)
class RegimeReport:
    """Full classification of one (n, 2*sigma, alpha) triple."""

    dim: int
    two_sigma: float
    alpha: float
    strauss: float
    mass_criticality: str  # sub | critical | super
    energy_subcritical_sup: float  # 4/(n-2) for n >= 3, inf otherwise
    regime_class: str
    required_alpha: float | None
    small_data_flag: bool
    checks: tuple[TheoremCheck, ...]

    def as_dict(self) -> dict:
        doc = {
            "dim": self.dim,
            "two_sigma": self.two_sigma,
            "alpha": self.alpha,
            "strauss": self.strauss,
            "mass_criticality": self.mass_criticality,
            "energy_subcritical_sup": self.energy_subcritical_sup,
            "regime_class": self.regime_class,
            "required_alpha": self.required_alpha,
            "small_data_flag": self.small_data_flag,
            "checks": [
                {
                    "name": c.name,
                    "window_ok": c.window_ok,
                    "decay_ok": c.decay_ok,
                    "required_alpha": c.required_alpha,
                    "applies": c.applies,
                    "small_data_required": c.small_data_required,
                }
                for c in self.checks
            ],
        }
        return doc


_CRIT_TOL = 1e-12


def classify_regime(dim: int, two_sigma: float, alpha: float) -> RegimeReport:
    """Classify the scattering regime of a defocusing power nonlinearity.

    The class label resolves in this order:

    1. ``energy_critical_excluded`` when n >= 3 and 2*sigma >= 4/(n-2);
    2. ``long_range`` when 2*sigma <= 2/n (no scattering even in L^2,
       regardless of alpha);
    3. otherwise the strongest statement whose window AND decay
       hypothesis both hold: weighted-space scattering, then L^2
       scattering, then H^1 scattering;
    4. if no statement fully applies (alpha too small), the label
       falls back to window membership alone in the same order, and
       the per-statement checks show which hypothesis failed.

    The weighted-space window at the mass-critical boundary
    2*sigma = 4/n (n = 1, 2) is admitted with ``small_data_flag`` set:
    the statement there carries a data-smallness condition that cannot
    be decided from exponents.
    """
    if int(dim) != dim or dim < 1:
        raise ValueError(f"dimension must be a positive integer, got {dim}")
    dim = int(dim)
    two_sigma = float(two_sigma)
    alpha = float(alpha)
    if not two_sigma > 0.0:
        raise ValueError(f"two_sigma must be positive, got {two_sigma}")

    strauss = strauss_exponent(dim)
    mass_line = 4.0 / dim
    sup = 4.0 / (dim - 2) if dim >= 3 else math.inf

    if abs(two_sigma - mass_line) <= _CRIT_TOL:
        criticality = "critical"
    elif two_sigma < mass_line:
        criticality = "sub"
    else:
        criticality = "super"

    mass_critical = criticality == "critical"
    decay_weighted = alpha > ALPHA_WEIGHTED
    decay_h1 = alpha > ALPHA_H1

    # L^2 scattering: 2/n < 2*sigma < 4/n, decay stronger than t^{-5/2}.
    l2_window = (2.0 / dim < two_sigma < mass_line) and not mass_critical
    l2_check = TheoremCheck(
        name="short_range_L2",
        window_ok=l2_window,
        decay_ok=decay_weighted,
        required_alpha=ALPHA_WEIGHTED,
        applies=l2_window and decay_weighted,
    )

    # Weighted-space scattering: strauss < 2*sigma < sup, the
    # mass-critical point removed for n <= 2 unless the data is small.
    if dim >= 3:
        sigma_window = strauss < two_sigma < sup
        sigma_small = False
    else:
        sigma_window = strauss < two_sigma and not mass_critical
        sigma_small = strauss < two_sigma and mass_critical
    sigma_check = TheoremCheck(
        name="sigma_scattering",
        window_ok=sigma_window or sigma_small,
        decay_ok=decay_weighted,
        required_alpha=ALPHA_WEIGHTED,
        applies=(sigma_window or sigma_small) and decay_weighted,
        small_data_required=sigma_small,
    )

    # H^1 scattering: mass-critical through energy-subcritical,
    # decay stronger than t^{-1}.
    h1_window = (
        two_sigma > mass_line - _CRIT_TOL and two_sigma < sup
    )
    h1_check = TheoremCheck(
        name="h1_scattering",
        window_ok=h1_window,
        decay_ok=decay_h1,
        required_alpha=ALPHA_H1,
        applies=h1_window and decay_h1,
    )

    checks = (sigma_check, l2_check, h1_check)

    if dim >= 3 and two_sigma >= sup - _CRIT_TOL:
        regime_class = "energy_critical_excluded"
        required: float | None = None
    elif two_sigma <= 2.0 / dim + _CRIT_TOL:
        regime_class = "long_range"
        required = None
    else:
        for check, label in (
            (sigma_check, "sigma_scattering"),
            (l2_check, "short_range_L2"),
            (h1_check, "h1_scattering"),
        ):
            if check.applies:
                regime_class = label
                required = check.required_alpha
                break
        else:
            for check, label in (
                (sigma_check, "sigma_scattering"),
                (l2_check, "short_range_L2"),
                (h1_check, "h1_scattering"),
            ):
                if check.window_ok:
                    regime_class = label
                    required = check.required_alpha
                    break
            else:  # pragma: no cover - windows tile (2/n, sup)
                raise AssertionError("classification windows failed to tile")

    return RegimeReport(
        dim=dim,
        two_sigma=two_sigma,
        alpha=alpha,
        strauss=strauss,
        mass_criticality=criticality,
        energy_subcritical_sup=sup,
        regime_class=regime_class,
        required_alpha=required,
        small_data_flag=sigma_check.small_data_required,
        checks=checks,
    )


def is_admissible(p: float, q: float, n: int) -> bool:
    """Whether (space p, time q) is an admissible mixed-norm pair.

    True iff 2/q = n(1/2 - 1/p), with the single forbidden endpoint
    (p, q, n) = (inf, 2, 2). Exponents below 2 are never admissible.
    """
    p = float(p)
    q = float(q)
    if int(n) != n or n < 1:
        raise ValueError(f"dimension must be a positive integer, got {n}")
    if p < 2.0 or q < 2.0:
        return False
    if math.isinf(p) and q == 2.0 and n == 2:
        return False
    lhs = 0.0 if math.isinf(q) else 2.0 / q
    rhs = n * (0.5 - (0.0 if math.isinf(p) else 1.0 / p))
    return abs(lhs - rhs) <= 1e-12


# ---------------------------------------------------------------------------
# Scattering diagnostics
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ScatteringReport:
    """Cauchy diagnostics for the free-flow-compensated field.

    ``differences[i, j]`` is the chosen norm of w(t_i) - w(t_j) where
    w(t) undoes the free propagator at time t. ``consecutive`` is its
    first superdiagonal; ``monotone_decay`` states whether consecutive
    differences are non-increasing. ``limit_candidate`` is w at the
    last checkpoint.
    """

    checkpoint_times: tuple[float, ...]
    norm_kind: str
    differences: np.ndarray
    consecutive: np.ndarray
    monotone_decay: bool
    limit_candidate: Field


def _norm_of(field: Field, kind: str) -> float:
    if kind == "L2":
        return lp_norm(field, 2.0)
    if kind == "H1":
        return sobolev_norm(field, 2.0, 1)
    return sigma_norm(field)


def scattering_cauchy(
    trajectory,
    norm_kind: str,
    checkpoint_times: Sequence[float],
) -> ScatteringReport:
    """Measure whether the free-flow-compensated field is Cauchy.

    At each checkpoint t the stored snapshot is propagated backward,
    w(t) = S(-t) u(t); for a purely linear evolution w is constant to
    rounding, so all differences vanish. Scattering shows up as
    consecutive differences decaying toward zero; its absence (the
    long-range regime) as a floor the differences do not go below.
    """
    if norm_kind not in _NORM_KINDS:
        raise ValueError(f"norm_kind must be one of {_NORM_KINDS}, got {norm_kind!r}")
    times = [float(t) for t in checkpoint_times]
    if len(times) < 3:
        raise ValueError(f"need at least 3 checkpoints, got {len(times)}")
    if any(b <= a for a, b in zip(times, times[1:])):
        raise ValueError("checkpoint times must be strictly increasing")
    compensated = [propagate(trajectory.snapshot_at(t), -t) for t in times]

    m = len(times)
    differences = np.zeros((m, m))
    for i in range(m):
        for j in range(i + 1, m):
            diff = Field(
                compensated[i].grid,
                compensated[i].values - compensated[j].values,
            )
            differences[i, j] = differences[j, i] = _norm_of(diff, norm_kind)
    consecutive = np.array([differences[k, k + 1] for k in range(m - 1)])
    # Tolerate rounding-level wiggle when differences sit at machine zero.
    slack = 1e-12 * max(_norm_of(w, norm_kind) for w in compensated)
    monotone = bool(
        np.all(consecutive[1:] <= consecutive[:-1] + slack)
    )
    return ScatteringReport(
        checkpoint_times=tuple(times),
        norm_kind=norm_kind,
        differences=differences,
        consecutive=consecutive,
        monotone_decay=monotone,
        limit_candidate=compensated[-1],
    )


# ---------------------------------------------------------------------------
# Growth-rate fitting
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class GrowthFitResult:
    """Power-law fit of an ensemble mean of running suprema."""

    tau_grid: tuple[float, ...]
    mean_running_sup: np.ndarray
    slope: float
    intercept: float


def _check_geometric(tau_grid: Sequence[float]) -> list[float]:
    taus = [float(t) for t in tau_grid]
    if len(taus) < 3:
        raise ValueError(f"horizon grid needs at least 3 points, got {len(taus)}")
    if any(t <= 0.0 for t in taus):
        raise ValueError("horizon grid entries must be positive")
    ratios = [b / a for a, b in zip(taus, taus[1:])]
    if any(r <= 1.0 for r in ratios):
        raise ValueError("horizon grid must be strictly increasing")
    base = ratios[0]
    if any(abs(r / base - 1.0) > 1e-6 for r in ratios):
        raise ValueError("horizon grid must be geometric (constant ratio)")
    return taus


def growth_fit(
    trajectories: Sequence,
    tau_grid: Sequence[float],
    min_paths: int = 200,
) -> GrowthFitResult:
    """Fit the growth exponent of the quadratic-weight energy.

    For each path the running supremum of the pseudo-conformal energy
    up to horizon tau is taken on the recorded grid; the ensemble mean
    of that supremum is regressed as log(mean) against log(1 + tau)
    over a geometric horizon grid. The returned slope estimates the
    exponent beta in mean-sup ~ (1+tau)^beta. Upper-bound statements
    are one-sided, so callers should only reject slopes that exceed the
    predicted exponent plus a tolerance.
    """
    taus = _check_geometric(tau_grid)
    if len(trajectories) < min_paths:
        raise ValueError(
            f"growth fit needs at least {min_paths} paths, got {len(trajectories)}"
        )
    means = np.zeros(len(taus))
    for traj in trajectories:
        series = np.asarray(traj.series["pc_energy"], dtype=float)
        if np.any(~np.isfinite(series)):
            raise ValueError(
                "pc_energy series contains non-finite entries; growth fits "
                "need physical-frame trajectories recorded in full mode"
            )
        times = np.asarray(traj.times, dtype=float)
        if times[-1] < taus[-1] - 1e-9:
            raise ValueError(
                f"trajectory horizon {times[-1]} is shorter than the last "
                f"grid point {taus[-1]}"
            )
        running = np.maximum.accumulate(series)
        idx = np.searchsorted(times, np.asarray(taus) + 1e-12, side="right") - 1
        means += running[idx]
    means /= len(trajectories)
    slope, intercept = np.polyfit(np.log1p(taus), np.log(means), 1)
    return GrowthFitResult(
        tau_grid=tuple(taus),
        mean_running_sup=means,
        slope=float(slope),
        intercept=float(intercept),
    )


# ---------------------------------------------------------------------------
# Space-time norm monitor
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class MonitorPair:
    """One mixed-norm channel: L^q in time of W^{order,p} in space."""

    space_exponent: float
    time_exponent: float
    derivative_order: int = 1
    admissible_required: bool = True
    label: str = ""


def default_monitor_pairs(dim: int) -> tuple[MonitorPair, ...]:
    """Representative pair list for the given dimension.

    The sup-in-time L^2-gradient channel and the symmetric diagonal
    pair exist in every dimension; the dual-endpoint pair needs
    n >= 3. The interaction channel (time exponent n+1, space exponent
    2(n+1)/(n-1), derivative order 0) is not an admissible pair and is
    carried exempt from the admissibility gate; it is undefined for
    n = 1 and therefore omitted there.
    """
    if int(dim) != dim or dim < 1:
        raise ValueError(f"dimension must be a positive integer, got {dim}")
    dim = int(dim)
    pairs = [
        MonitorPair(2.0, math.inf, 1, True, "sup_L2"),
        MonitorPair(2.0 + 4.0 / dim, 2.0 + 4.0 / dim, 1, True, "diagonal"),
    ]
    if dim >= 3:
        pairs.append(MonitorPair(2.0 * dim / (dim - 2), 2.0, 1, True, "endpoint"))
    if dim >= 2:
        pairs.append(
            MonitorPair(
                2.0 * (dim + 1) / (dim - 1),
                dim + 1.0,
                0,
                False,
                "interaction",
            )
        )
    return tuple(pairs)


@dataclass(frozen=True)
class PairSeries:
    """Cumulative mixed norm of one channel as a function of horizon."""

    pair: MonitorPair
    times: np.ndarray
    values: np.ndarray
    plateau: bool


@dataclass(frozen=True)
class StrichartzReport:
    """Cumulative space-time norms over the configured channels.

    ``s1_proxy`` is the max of the final cumulative norms over the
    derivative-order-1 channels — a finite-pair stand-in (hence a
    lower bound) for the sup over all admissible pairs.
    """

    channels: tuple[PairSeries, ...]
    s1_proxy: float

    def channel(self, label: str) -> PairSeries:
        for ch in self.channels:
            if ch.pair.label == label:
                return ch
        raise KeyError(f"no channel labeled {label!r}")


def _cumulative_mixed(
    times: np.ndarray, spatial: np.ndarray, q: float
) -> np.ndarray:
    """Cumulative mixed norms over snapshot prefixes.

    Follows the same quadrature as the one-shot mixed norm: snapshots
    are left endpoints of contiguous cells and each prefix's final
    cell reuses the preceding spacing.
    """
    if math.isinf(q):
        return np.maximum.accumulate(spatial)
    out = np.full(len(times), np.nan)
    widths = np.diff(times)
    powers = spatial**q
    # partial[m] = sum_{j<m} widths[j] * powers[j]
    partial = np.concatenate([[0.0], np.cumsum(widths * powers[:-1])])
    for m in range(1, len(times)):
        out[m] = (partial[m] + widths[m - 1] * powers[m]) ** (1.0 / q)
    return out


def strichartz_monitor(
    trajectory,
    pairs: Sequence[MonitorPair] | None = None,
) -> StrichartzReport:
    """Track cumulative mixed space-time norms along a trajectory.

    Norms are evaluated on the stored snapshot grid. Each channel gets
    a plateau verdict: the relative increase of the cumulative norm
    over the last dyadic window (from horizon T/2 to T) is below 2%.
    Dispersive evolutions plateau; a constant-in-time field grows like
    T^{1/q} and does not.
    """
    grid_dim = trajectory.config.grid.dim
    if pairs is None:
        pairs = default_monitor_pairs(grid_dim)
    times = np.asarray([t for t, _ in trajectory.snapshots], dtype=float)
    fields = [f for _, f in trajectory.snapshots]
    if len(times) < 2:
        raise ValueError("need at least 2 snapshots to accumulate time norms")

    channels = []
    finals = []
    for pair in pairs:
        if pair.admissible_required and not is_admissible(
            pair.space_exponent, pair.time_exponent, grid_dim
        ):
            raise ValueError(
                f"pair (p={pair.space_exponent}, q={pair.time_exponent}) is "
                f"not admissible in dimension {grid_dim}"
            )
        spatial = np.array(
            [
                sobolev_norm(f, pair.space_exponent, pair.derivative_order)
                for f in fields
            ]
        )
        values = _cumulative_mixed(times, spatial, pair.time_exponent)
        half_idx = int(np.searchsorted(times, times[-1] / 2.0))
        half_idx = min(max(half_idx, 1), len(times) - 1)
        final = values[-1]
        half = values[half_idx]
        if half > 0.0:
            plateau = bool((final - half) / half < 0.02)
        else:
            # Identically zero history plateaus; norm born after T/2 does not.
            plateau = bool(final == 0.0)
        channels.append(PairSeries(pair, times, values, plateau))
        if pair.derivative_order == 1:
            finals.append(final)
    return StrichartzReport(
        channels=tuple(channels),
        s1_proxy=float(max(finals)) if finals else math.nan,
    )
