"""Exponentially-modified Gaussian components and photon-number mixtures.

The single-event arrival-time density of a nanowire detector is modeled as an
EMG: a Gaussian timing core of width ``sigma`` convolved with an exponential
delay tail of scale ``tau``, offset by ``mu``.  Pulsed illumination with
Poissonian photon statistics produces a weighted sum of EMG components indexed
by photon number, conditioned on at least one photon because only events that
produce a click enter an arrival-time histogram.

All times are picoseconds; densities are per picosecond.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.special import erfc, erfcx, log_ndtr, ndtr
from scipy.stats import poisson

_SQRT2 = math.sqrt(2.0)

# Beyond this erfc argument the naive exp * erfc product underflows to 0 * inf;
# switch to pdf = erfcx(z) * exp(-(t - mu)^2 / (2 sigma^2)) / (2 tau), which is
# algebraically identical and stable for large positive z.
_ERFCX_THRESHOLD = 5.0


@dataclass(frozen=True)
class EmgParams:
    """One EMG component: location ``mu``, Gaussian width ``sigma``, tail ``tau`` (ps)."""

    mu: float
    sigma: float
    tau: float

    def __post_init__(self) -> None:
        for name in ("mu", "sigma", "tau"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")
        if self.sigma <= 0.0:
            raise ValueError("sigma must be positive")
        if self.tau <= 0.0:
            raise ValueError("tau must be positive")

    @property
    def mean(self) -> float:
        """First moment, mu + tau."""
        return self.mu + self.tau

    @property
    def std(self) -> float:
        """Square root of the second central moment, sqrt(sigma^2 + tau^2)."""
        return math.hypot(self.sigma, self.tau)


def _as_times(t) -> tuple[np.ndarray, bool]:
    scalar = np.ndim(t) == 0
    arr = np.atleast_1d(np.asarray(t, dtype=np.float64))
    if not np.all(np.isfinite(arr)):
        raise ValueError("t must be finite")
    return arr, scalar


def emg_pdf(p: EmgParams, t):
    """Arrival-time density at ``t`` (scalar or array-like), in 1/ps.

    Evaluates

        (1 / 2 tau) * exp((sigma^2/tau - 2 t + 2 mu) / (2 tau))
                    * erfc((sigma^2/tau - t + mu) / (sigma sqrt(2)))

    switching to the scaled complementary error function once the erfc
    argument exceeds 5.
    """
    arr, scalar = _as_times(t)
    u = (arr - p.mu) / p.sigma
    r = p.sigma / p.tau
    z = (r - u) / _SQRT2
    out = np.empty_like(u)
    deep = z > _ERFCX_THRESHOLD
    if deep.any():
        ud = u[deep]
        out[deep] = erfcx(z[deep]) * np.exp(-0.5 * ud * ud)
    rest = ~deep
    if rest.any():
        ur = u[rest]
        out[rest] = np.exp(0.5 * r * r - ur * r) * erfc(z[rest])
    out /= 2.0 * p.tau
    return float(out[0]) if scalar else out


def _cdf_sf_grid(mu, sigma, tau, t):
    """Broadcastable EMG CDF and survival function, stable in both tails.

    The exp * Phi cross term is evaluated in log space; it equals
    Phi(u) - F(t) and is therefore bounded by 1, so the exponential never
    overflows.
    """
    u = (t - mu) / sigma
    r = sigma / tau
    k = 0.5 * r * r - u * r
    tail = np.exp(k + log_ndtr(u - r))
    cdf = ndtr(u) - tail
    sf = ndtr(-u) + tail
    return np.clip(cdf, 0.0, 1.0), np.clip(sf, 0.0, 1.0)


def emg_cdf(p: EmgParams, t):
    """Cumulative probability of arrival before ``t``."""
    arr, scalar = _as_times(t)
    cdf, _ = _cdf_sf_grid(p.mu, p.sigma, p.tau, arr)
    return float(cdf[0]) if scalar else cdf


def emg_sf(p: EmgParams, t):
    """Survival function 1 - CDF, computed without cancellation."""
    arr, scalar = _as_times(t)
    _, sf = _cdf_sf_grid(p.mu, p.sigma, p.tau, arr)
    return float(sf[0]) if scalar else sf


def emg_sample(p: EmgParams, rng: np.random.Generator, count: int) -> np.ndarray:
    """Draw ``count`` arrival times as Gaussian(mu, sigma) + Exponential(tau)."""
    if count < 1:
        raise ValueError("count must be >= 1")
    return rng.normal(p.mu, p.sigma, size=count) + rng.exponential(p.tau, size=count)


@dataclass(frozen=True)
class PhotonSource:
    """Poissonian source: mean photon number and mixture truncation tail mass."""

    mean_photon_number: float
    truncation_tail_mass: float = 1e-9

    def __post_init__(self) -> None:
        if not (math.isfinite(self.mean_photon_number) and self.mean_photon_number >= 0.0):
            raise ValueError("mean_photon_number must be finite and >= 0")
        if not (0.0 < self.truncation_tail_mass <= 1e-6):
            raise ValueError("truncation_tail_mass must be in (0, 1e-6]")


def conditioned_poisson_weights(source: PhotonSource) -> tuple[int, np.ndarray]:
    """Photon-number weights conditioned on detecting at least one photon.

    Returns ``(n_max, weights)`` where ``weights[i]`` is the probability of
    ``n = i + 1`` photons given ``n >= 1``.  ``n_max`` is the smallest cutoff
    whose conditioned tail mass falls below the source's truncation setting;
    the retained weights are renormalized to sum to exactly 1.
    """
    nbar = source.mean_photon_number
    if nbar <= 0.0:
        raise ValueError("no detectable events: mean photon number is zero")
    click_mass = -math.expm1(-nbar)
    hi = int(math.ceil(nbar + 12.0 * math.sqrt(nbar) + 40.0))
    while True:
        ns = np.arange(1, hi + 1)
        tail = poisson.sf(ns, nbar) / click_mass
        below = tail < source.truncation_tail_mass
        if below.any():
            n_max = int(ns[np.argmax(below)])
            break
        hi *= 2
    w = poisson.pmf(np.arange(1, n_max + 1), nbar) / click_mass
    return n_max, w / w.sum()


@dataclass(frozen=True)
class MixtureModel:
    """Poisson-weighted EMG mixture over photon numbers 1..n_max."""

    source: PhotonSource
    component_params: tuple[EmgParams, ...]
    weights: np.ndarray

    def __post_init__(self) -> None:
        w = np.asarray(self.weights, dtype=np.float64)
        object.__setattr__(self, "weights", w)
        if len(self.component_params) != w.size:
            raise ValueError("one weight per component required")
        if w.size == 0:
            raise ValueError("mixture needs at least one component")
        if np.any(w < 0.0):
            raise ValueError("weights must be non-negative")
        if abs(float(w.sum()) - 1.0) > 1e-12:
            raise ValueError("weights must sum to 1 within 1e-12")

    @property
    def n_max(self) -> int:
        return len(self.component_params)


def build_mixture(source: PhotonSource, make_component: Callable[[int], EmgParams]) -> MixtureModel:
    """Assemble a mixture by calling ``make_component(n)`` for n = 1..n_max."""
    n_max, weights = conditioned_poisson_weights(source)
    components = tuple(make_component(n) for n in range(1, n_max + 1))
    return MixtureModel(source, components, weights)


def _component_arrays(m: MixtureModel) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    mu = np.array([c.mu for c in m.component_params])
    sigma = np.array([c.sigma for c in m.component_params])
    tau = np.array([c.tau for c in m.component_params])
    return mu, sigma, tau


def mixture_pdf(m: MixtureModel, t):
    """Weighted sum of component densities at ``t``."""
    arr, scalar = _as_times(t)
    out = np.zeros_like(arr)
    for w, p in zip(m.weights, m.component_params):
        out += w * emg_pdf(p, arr)
    return float(out[0]) if scalar else out


def mixture_cdf(m: MixtureModel, t):
    """Weighted sum of component CDFs at ``t``."""
    arr, scalar = _as_times(t)
    mu, sigma, tau = _component_arrays(m)
    cdf, _ = _cdf_sf_grid(mu[:, None], sigma[:, None], tau[:, None], arr[None, :])
    out = m.weights @ cdf
    return float(out[0]) if scalar else out


def mixture_bin_masses(m: MixtureModel, edges) -> np.ndarray:
    """Probability mass per bin via CDF differences on ``edges``.

    Uses survival-function differences on the right half of the distribution
    so deep-tail bins do not lose precision to cancellation.
    """
    arr = np.asarray(edges, dtype=np.float64)
    if arr.ndim != 1 or arr.size < 2:
        raise ValueError("edges must be a 1-d array with at least two entries")
    mu, sigma, tau = _component_arrays(m)
    cdf, sf = _cdf_sf_grid(mu[:, None], sigma[:, None], tau[:, None], arr[None, :])
    F = m.weights @ cdf
    S = m.weights @ sf
    mass = np.where(F[:-1] < 0.5, F[1:] - F[:-1], S[:-1] - S[1:])
    return np.clip(mass, 0.0, None)


def mixture_moments(m: MixtureModel) -> tuple[float, float]:
    """Mixture mean and standard deviation by the law of total variance.

    mean = sum w_n (mu_n + tau_n)
    var  = sum w_n (sigma_n^2 + tau_n^2) + sum w_n (mu_n + tau_n - mean)^2
    """
    mu, sigma, tau = _component_arrays(m)
    comp_mean = mu + tau
    mean = float(m.weights @ comp_mean)
    within = float(m.weights @ (sigma**2 + tau**2))
    between = float(m.weights @ (comp_mean - mean) ** 2)
    return mean, math.sqrt(within + between)
