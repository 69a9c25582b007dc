"""Fock-state distributions and dispersive qubit spectra.

A resonator holding ``n`` photons pulls the qubit line by ``n * spacing``
(towards negative detuning here).  A measured spectrum is modelled as a
baseline plus one unit-height Lorentzian per Fock state scaled by its
probability.  Peak weights are recovered by non-negative linear least
squares; the mean photon number is then fitted for a thermal or Poisson
family.
"""

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import lsq_linear
from scipy.special import gammainc, gammaln

from .errors import GridTooCoarse, PeaksNotResolved, ValidationError
from .estimation import nls_minimize

FAMILIES = ("thermal", "poisson")
DEFAULT_SPACING_HZ = 4.4e6  # 2 * chi_R / 2pi
DEFAULT_LINEWIDTH_HZ = 0.5e6


@dataclass(frozen=True)
class FockDistribution:
    """Truncated photon-number distribution ``p(0..n_max)``.

    ``tail`` is the probability mass beyond ``n_max``, known analytically
    for the thermal and Poisson families.
    """

    probs: np.ndarray
    family: str
    mean: float
    tail: float = 0.0

    @property
    def n_max(self):
        return len(self.probs) - 1

    @property
    def deficit(self):
        return 1.0 - float(np.sum(self.probs))


def thermal_distribution(n_bar, n_max=9):
    """Geometric distribution ``p(n) = n_bar^n / (n_bar + 1)^(n + 1)``."""
    if not n_bar >= 0:
        raise ValidationError("n_bar must be non-negative")
    return FockDistribution(_thermal_probs(n_bar, n_max), "thermal", float(n_bar),
                            (n_bar / (n_bar + 1.0)) ** (n_max + 1))


def poisson_distribution(n_bar, n_max=9):
    """Poisson distribution ``p(n) = exp(-n_bar) n_bar^n / n!``."""
    if not n_bar >= 0:
        raise ValidationError("n_bar must be non-negative")
    # P(N > n_max) is the regularized lower incomplete gamma P(n_max + 1, n_bar)
    tail = 0.0 if n_bar == 0 else float(gammainc(n_max + 1, n_bar))
    return FockDistribution(_poisson_probs(n_bar, n_max), "poisson", float(n_bar), tail)


def empirical_distribution(weights):
    """Distribution given directly by (non-negative) weights, normalized to one."""
    w = np.asarray(weights, dtype=float)
    if w.ndim != 1 or w.size == 0 or np.any(w < 0) or not w.sum() > 0:
        raise ValidationError("weights must be a non-empty, non-negative, non-zero vector")
    p = w / w.sum()
    return FockDistribution(p, "empirical", float(np.arange(p.size) @ p), 0.0)


def _thermal_probs(n_bar, n_max):
    n = np.arange(n_max + 1)
    q = n_bar / (n_bar + 1.0)
    return q**n / (n_bar + 1.0)


def _poisson_probs(n_bar, n_max):
    n = np.arange(n_max + 1)
    if n_bar == 0:
        return (n == 0).astype(float)
    return np.exp(n * math.log(n_bar) - n_bar - gammaln(n + 1))


def _family_probs(family, n_bar, n_max):
    if family == "thermal":
        return _thermal_probs(n_bar, n_max)
    if family == "poisson":
        return _poisson_probs(n_bar, n_max)
    raise ValidationError(f"unknown family {family!r}; expected one of {FAMILIES}")


def distribution(family, n_bar, n_max=9):
    if family == "thermal":
        return thermal_distribution(n_bar, n_max)
    if family == "poisson":
        return poisson_distribution(n_bar, n_max)
    raise ValidationError(f"unknown family {family!r}; expected one of {FAMILIES}")


@dataclass(frozen=True)
class SpectrumTrace:
    """Qubit spectrum: probe detuning (Hz, increasing) and magnitude."""

    detuning: np.ndarray
    magnitude: np.ndarray

    def __post_init__(self):
        d = np.asarray(self.detuning, dtype=float)
        m = np.asarray(self.magnitude, dtype=float)
        if d.ndim != 1 or d.shape != m.shape:
            raise ValidationError("detuning and magnitude must be 1-D arrays of equal length")
        if len(d) < 16:
            raise ValidationError("a spectrum needs at least 16 points")
        if np.any(np.diff(d) <= 0):
            raise ValidationError("detuning must be strictly increasing")
        object.__setattr__(self, "detuning", d)
        object.__setattr__(self, "magnitude", m)


@dataclass(frozen=True)
class PeakModel:
    """Equidistant Lorentzian comb.

    ``linewidths`` are full widths at half maximum in Hz, one per Fock state
    (a scalar is broadcast).
    """

    spacing: float = DEFAULT_SPACING_HZ
    linewidths: np.ndarray = field(default_factory=lambda: np.array([DEFAULT_LINEWIDTH_HZ]))
    baseline: float = 0.0

    def __post_init__(self):
        w = np.atleast_1d(np.asarray(self.linewidths, dtype=float))
        if not self.spacing > 0:
            raise ValidationError("peak spacing must be positive")
        if np.any(w <= 0):
            raise ValidationError("linewidths must be positive")
        object.__setattr__(self, "linewidths", w)

    def widths(self, n_max):
        w = self.linewidths
        if w.size == 1:
            return np.full(n_max + 1, w[0])
        if w.size < n_max + 1:
            raise ValidationError(f"need {n_max + 1} linewidths, got {w.size}")
        return w[: n_max + 1]

    def centers(self, n_max):
        return -self.spacing * np.arange(n_max + 1)

    def design_matrix(self, detuning, n_max):
        """Columns: unit-height Lorentzian of each Fock peak on ``detuning``."""
        x = (np.asarray(detuning)[:, None] - self.centers(n_max)) / (0.5 * self.widths(n_max))
        return 1.0 / (1.0 + x * x)

    def check_resolved(self, n_max):
        if self.spacing < 2.0 * self.widths(n_max).max():
            raise PeaksNotResolved(
                f"spacing {self.spacing:g} Hz is below twice the widest line "
                f"({self.widths(n_max).max():g} Hz)"
            )


def default_grid(peaks, n_max, points_per_width=5):
    """Uniform detuning grid covering every peak with the required resolution."""
    step = peaks.widths(n_max).min() / points_per_width
    lo = -(n_max + 0.5) * peaks.spacing
    hi = 0.5 * peaks.spacing
    n = int(math.ceil((hi - lo) / step)) + 1
    return np.linspace(lo, hi, n)


def synthesize_spectrum(dist, peaks, grid):
    """Noiseless spectrum of ``dist`` on the detuning ``grid`` (Hz)."""
    grid = np.asarray(grid, dtype=float)
    n_max = dist.n_max
    lo = -(n_max + 0.5) * peaks.spacing
    hi = 0.5 * peaks.spacing
    span = hi - lo
    if grid[0] > lo + 1e-9 * span or grid[-1] < hi - 1e-9 * span:
        raise ValidationError(f"grid must cover [{lo:g}, {hi:g}] Hz")
    step = np.max(np.diff(grid))
    if step > peaks.widths(n_max).min() / 4.0 * (1 + 1e-9):
        raise GridTooCoarse(
            f"grid step {step:g} Hz exceeds a quarter of the narrowest line"
        )
    mag = peaks.baseline + peaks.design_matrix(grid, n_max) @ dist.probs
    return SpectrumTrace(grid, mag)


@dataclass(frozen=True)
class PeakWeights:
    """Non-negative peak amplitudes recovered from a spectrum."""

    weights: np.ndarray  # normalized to unit sum
    amplitudes: np.ndarray  # raw fitted heights
    baseline: float
    residual_norm: float

    @property
    def mean(self):
        return float(np.arange(len(self.weights)) @ self.weights)


def extract_peak_weights(trace, peaks, n_max=9):
    """Fock-peak weights from a spectrum by bounded linear least squares.

    Heights are constrained non-negative; the baseline is free.  The
    returned ``weights`` sum to one.

    Raises
    ------
    PeaksNotResolved
        If the comb is not resolvable or the trace carries no peak weight.
    """
    peaks.check_resolved(n_max)
    A = np.column_stack([peaks.design_matrix(trace.detuning, n_max),
                         np.ones_like(trace.detuning)])
    lower = np.r_[np.zeros(n_max + 1), -np.inf]
    upper = np.full(n_max + 2, np.inf)
    sol = lsq_linear(A, trace.magnitude, bounds=(lower, upper), method="bvls",
                     tol=1e-14, lsmr_tol="auto")
    amps = np.clip(sol.x[:-1], 0.0, None)
    total = amps.sum()
    scale = max(np.abs(trace.magnitude).max(), np.finfo(float).tiny)
    if total <= 1e-12 * scale:
        raise PeaksNotResolved("trace carries no peak weight (degenerate input)")
    resid = A @ sol.x - trace.magnitude
    return PeakWeights(amps / total, amps, float(sol.x[-1]), float(np.linalg.norm(resid)))


def fit_population(data, family, peaks=None, init=None, n_max=9):
    """Fit the mean photon number of a thermal or Poisson distribution.

    ``data`` is either a :class:`SpectrumTrace` (fitted directly with the
    comb model, free amplitude and baseline; initialized from
    :func:`extract_peak_weights`) or an array of peak weights (fitted as a
    normalized distribution).  Returns a :class:`~qcrlab.estimation.FitResult`
    whose ``params["n_bar"]`` carries a 1-sigma uncertainty from the
    residual Jacobian.
    """
    if family not in FAMILIES:
        raise ValidationError(f"unknown family {family!r}; expected one of {FAMILIES}")
    if init is not None and not init > 0:
        raise ValidationError("initial n_bar must be positive")

    if isinstance(data, SpectrumTrace):
        if peaks is None:
            peaks = PeakModel()
        extracted = extract_peak_weights(data, peaks, n_max)
        if init is None:
            init = max(extracted.mean, 1e-3)
        L = peaks.design_matrix(data.detuning, n_max)
        y = data.magnitude

        def residual(p):
            n_bar, amp, base = p
            return base + amp * (L @ _family_probs(family, n_bar, n_max)) - y

        amp0 = extracted.amplitudes.sum() / _family_probs(family, init, n_max).sum()
        return nls_minimize(
            residual,
            x0=[init, amp0, extracted.baseline],
            bounds=([0.0, 0.0, -np.inf], [np.inf, np.inf, np.inf]),
            names=("n_bar", "amplitude", "baseline"),
        )

    w = np.asarray(data, dtype=float)
    n_max = len(w) - 1
    w = w / w.sum()
    if init is None:
        init = max(float(np.arange(n_max + 1) @ w), 1e-3)

    def residual(p):
        probs = _family_probs(family, p[0], n_max)
        return probs / probs.sum() - w

    return nls_minimize(residual, x0=[init], bounds=([0.0], [np.inf]), names=("n_bar",))
