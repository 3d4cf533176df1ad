"""Three-parameter mixture fits to arrival-time histograms.

The model histogram is a Poisson-weighted EMG mixture whose per-component
location and width follow the jitter-budget scaling laws.  Everything except
(delta_mu, sigma_int, tau) is held fixed at independently measured values;
those three are recovered by minimizing the per-bin Poisson negative
log-likelihood  sum_i (m_i - c_i ln m_i)  with a derivative-free simplex,
restarted from multiplicatively perturbed starting points.  Bin masses come
from analytic CDF differences, never midpoint sampling.

Also provides windowed single-EMG fits, event-weighted histogram width with
bootstrap errors, and time-tag ingestion.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize
from scipy.signal import find_peaks

from .budget import JitterBudget, mu_scaling, sigma_total, tau_at
from .dist import (
    EmgParams,
    MixtureModel,
    PhotonSource,
    _cdf_sf_grid,
    conditioned_poisson_weights,
    mixture_bin_masses,
)
from .histogram import ArrivalHistogram
from .io import read_time_tags

_RESTART_FACTORS = ((1.2, 0.8, 1.2), (0.8, 1.2, 0.8), (1.2, 1.2, 0.8))
_XATOL = 1e-9
_PEAK_SPACING_FACTOR = 1.0 / (1.0 - 2.0**-0.5)  # mode spacing -> delta_mu


@dataclass(frozen=True)
class FixedParams:
    """Constants held fixed during the three-parameter fit.

    Widths in ps, noise amplitude in mV, slew rate in mV/ps; ``n_bar`` is the
    mean photon number of the source feeding the histogram.
    """

    sigma_inst: float
    sigma_opt: float
    sigma_elec: float
    slew_rate_1: float
    sigma_geom_1: float
    mu_infinity: float
    n_bar: float
    geom_exponent: float = 0.75
    rise_scaling_exponent: float = 0.5
    truncation_tail_mass: float = 1e-9

    def __post_init__(self) -> None:
        if not (math.isfinite(self.n_bar) and self.n_bar > 0.0):
            raise ValueError("n_bar must be positive")
        if not math.isfinite(self.mu_infinity):
            raise ValueError("mu_infinity must be finite")
        # remaining range checks are delegated to JitterBudget
        self.jitter_budget(1.0, 1.0)

    def jitter_budget(self, sigma_int: float, tau: float) -> JitterBudget:
        return JitterBudget(
            sigma_inst=self.sigma_inst,
            sigma_opt=self.sigma_opt,
            sigma_int=sigma_int,
            tau=tau,
            sigma_elec=self.sigma_elec,
            slew_rate_1=self.slew_rate_1,
            sigma_geom_1=self.sigma_geom_1,
            geom_exponent=self.geom_exponent,
            rise_scaling_exponent=self.rise_scaling_exponent,
        )


@dataclass(frozen=True)
class FitResult:
    """Fitted (delta_mu, sigma_int, tau) with diagnostics.

    ``bootstrap_errors`` follows the parameter order (and includes a fourth
    entry when mu_infinity was fitted); ``covariance_proxy`` is the
    pseudo-inverse of a finite-difference Hessian of the objective, a
    conditioning diagnostic rather than a calibrated covariance.
    """

    delta_mu: float
    sigma_int: float
    tau: float
    negative_log_likelihood: float
    converged: bool
    iterations: int
    bootstrap_errors: tuple[float, ...] | None
    covariance_proxy: np.ndarray
    mu_infinity: float | None = None

    def __post_init__(self) -> None:
        if self.sigma_int < 0.0:
            raise ValueError("sigma_int must be >= 0")
        if self.tau <= 0.0:
            raise ValueError("tau must be positive")
        if self.bootstrap_errors is not None and any(e < 0.0 for e in self.bootstrap_errors):
            raise ValueError("bootstrap errors must be >= 0")


def _make_components(
    fp: FixedParams, delta_mu: float, sigma_int: float, tau: float, mu_infinity: float, n_max: int
) -> tuple[EmgParams, ...]:
    b = fp.jitter_budget(sigma_int, tau)
    return tuple(
        EmgParams(
            mu_scaling(mu_infinity, delta_mu, n, fp.rise_scaling_exponent),
            sigma_total(b, n),
            tau_at(b, n),
        )
        for n in range(1, n_max + 1)
    )


def mixture_from_params(fp: FixedParams, theta, mu_infinity: float | None = None) -> MixtureModel:
    """Build the photon-number mixture for theta = (delta_mu, sigma_int, tau)."""
    delta_mu, sigma_int, tau = (float(v) for v in theta)
    source = PhotonSource(fp.n_bar, fp.truncation_tail_mass)
    n_max, weights = conditioned_poisson_weights(source)
    mu_inf = fp.mu_infinity if mu_infinity is None else mu_infinity
    components = _make_components(fp, delta_mu, sigma_int, tau, mu_inf, n_max)
    return MixtureModel(source, components, weights)


def predict_histogram(fp: FixedParams, theta, hist: ArrivalHistogram) -> np.ndarray:
    """Expected counts per bin of ``hist`` for the given parameters."""
    mix = mixture_from_params(fp, theta)
    return hist.total_events * mixture_bin_masses(mix, hist.bin_edges)


def poisson_nll(counts, expected) -> float:
    """Per-bin Poisson negative log-likelihood, sum(m - c ln m) up to constants."""
    c = np.asarray(counts, dtype=np.float64)
    m = np.asarray(expected, dtype=np.float64)
    pos = c > 0.0
    m_pos = m[pos]
    if np.any(m_pos <= 0.0):
        return math.inf
    return float(m.sum() - np.dot(c[pos], np.log(m_pos)))


def initial_guess(hist: ArrivalHistogram, fp: FixedParams) -> tuple[float, float, float]:
    """Heuristic starting point from histogram peak structure.

    delta_mu from the spacing of the two rightmost modes scaled by
    1/(1 - 1/sqrt(2)); sigma_int and tau from the rightmost-peak width after
    removing the fixed one-photon budget terms, split evenly.
    """
    counts = hist.counts.astype(np.float64)
    centers = hist.bin_centers
    bw = hist.bin_width
    window = max(3, int(round(6.0 / bw)) | 1)
    kernel = np.ones(window) / window
    smooth = np.convolve(counts, kernel, mode="same")
    distance = max(1, int(round(6.0 / bw)))
    peaks, _ = find_peaks(smooth, prominence=0.02 * float(smooth.max()), distance=distance)
    if peaks.size >= 2:
        right, left = centers[peaks[-1]], centers[peaks[-2]]
        delta_mu0 = (right - left) * _PEAK_SPACING_FACTOR
        top = peaks[-1]
    elif peaks.size == 1:
        top = peaks[0]
        n_mode = max(1, int(fp.n_bar))
        delta_mu0 = max((centers[top] - fp.mu_infinity) * math.sqrt(n_mode), 5.0 * bw)
    else:
        top = int(np.argmax(smooth))
        delta_mu0 = max(centers[top] - fp.mu_infinity, 5.0 * bw)
    half = smooth[top] / 2.0
    i_left = top
    while i_left > 0 and smooth[i_left] > half:
        i_left -= 1
    i_right = top
    while i_right < smooth.size - 1 and smooth[i_right] > half:
        i_right += 1
    fwhm = max(i_right - i_left, 1) * bw
    peak_sd = fwhm / 2.355
    b = fp.jitter_budget(1.0, 1.0)
    fixed_var = (
        (fp.sigma_elec / fp.slew_rate_1) ** 2 + b.sigma_inst**2 + b.sigma_opt**2 + b.sigma_geom_1**2
    )
    leftover = max(peak_sd**2 - fixed_var, bw**2)
    s0 = t0 = math.sqrt(leftover / 2.0)
    return float(delta_mu0), float(s0), float(t0)


def _simplex(fun, z0, xatol, fatol, maxiter=20_000):
    return minimize(
        fun,
        np.asarray(z0, dtype=np.float64),
        method="Nelder-Mead",
        options={"xatol": xatol, "fatol": fatol, "maxiter": maxiter, "maxfev": maxiter},
    )


def _fd_hessian(fun, x, rel_step=1e-4):
    x = np.asarray(x, dtype=np.float64)
    k = x.size
    h = rel_step * np.maximum(np.abs(x), 1.0)
    H = np.empty((k, k))
    f0 = fun(x)
    for i in range(k):
        ei = np.zeros(k)
        ei[i] = h[i]
        H[i, i] = (fun(x + ei) - 2.0 * f0 + fun(x - ei)) / h[i] ** 2
        for j in range(i + 1, k):
            ej = np.zeros(k)
            ej[j] = h[j]
            fpp = fun(x + ei + ej)
            fpm = fun(x + ei - ej)
            fmp = fun(x - ei + ej)
            fmm = fun(x - ei - ej)
            H[i, j] = H[j, i] = (fpp - fpm - fmp + fmm) / (4.0 * h[i] * h[j])
    return H


def fit_histogram(
    hist: ArrivalHistogram,
    fp: FixedParams,
    theta0: tuple[float, float, float] | None = None,
    *,
    fit_mu_infinity: bool = False,
    n_bootstrap: int = 0,
    bootstrap_seed: int = 0,
) -> FitResult:
    """Maximum-likelihood fit of (delta_mu, sigma_int, tau) to a histogram.

    sigma_int and tau are optimized in log space to enforce positivity;
    delta_mu (and mu_infinity in the optional four-parameter mode) is
    unconstrained.  The simplex is restarted from three +/-20% multiplicative
    perturbations of the starting point and the best optimum wins.
    Deterministic for fixed inputs; bootstrap resampling is seeded.
    """
    if hist.total_events == 0:
        raise ValueError("empty histogram")
    if hist.total_events < 1000:
        raise ValueError(f"need at least 1000 events to fit, histogram has {hist.total_events}")
    counts = hist.counts.astype(np.float64)
    edges = hist.bin_edges
    total = int(hist.total_events)

    source = PhotonSource(fp.n_bar, fp.truncation_tail_mass)
    n_max, weights = conditioned_poisson_weights(source)

    if theta0 is None:
        theta0 = initial_guess(hist, fp)
    dmu0, s0, t0 = (float(v) for v in theta0)
    if s0 <= 0.0 or t0 <= 0.0:
        raise ValueError("theta0 sigma_int and tau must be positive")

    def expected_counts(delta_mu, sigma_int, tau, mu_inf):
        comps = _make_components(fp, delta_mu, sigma_int, tau, mu_inf, n_max)
        mix = MixtureModel(source, comps, weights)
        return total * mixture_bin_masses(mix, edges)

    def nll_z(z):
        if abs(z[1]) > 50.0 or abs(z[2]) > 50.0 or abs(z[0]) > 1e7:
            return math.inf
        mu_inf = z[3] if fit_mu_infinity else fp.mu_infinity
        m = expected_counts(z[0], math.exp(z[1]), math.exp(z[2]), mu_inf)
        return poisson_nll(counts, m)

    z0 = [dmu0, math.log(s0), math.log(t0)]
    if fit_mu_infinity:
        z0.append(fp.mu_infinity)
    starts = [np.array(z0)]
    for fa, fb, fc in _RESTART_FACTORS:
        z = [dmu0 * fa, math.log(s0 * fb), math.log(t0 * fc)]
        if fit_mu_infinity:
            z.append(fp.mu_infinity + (1.0 - fa) * dmu0)
        starts.append(np.array(z))

    f_ref = nll_z(starts[0])
    fatol = 1e-10 * max(1.0, abs(f_ref) if math.isfinite(f_ref) else 1.0)
    runs = [_simplex(nll_z, z, _XATOL, fatol) for z in starts]
    finite = [r for r in runs if math.isfinite(r.fun)]
    if not finite:
        raise ValueError("fit objective is not finite anywhere near theta0")
    best = min(finite, key=lambda r: r.fun)
    iterations = int(sum(r.nit for r in runs))
    converged = bool(best.success)

    z_hat = best.x
    delta_mu = float(z_hat[0])
    sigma_int = float(math.exp(z_hat[1]))
    tau = float(math.exp(z_hat[2]))
    mu_inf_hat = float(z_hat[3]) if fit_mu_infinity else None

    def nll_theta(theta):
        mu_inf = theta[3] if fit_mu_infinity else fp.mu_infinity
        if theta[1] <= 0.0 or theta[2] <= 0.0:
            return math.inf
        m = expected_counts(theta[0], theta[1], theta[2], mu_inf)
        return poisson_nll(counts, m)

    theta_hat = [delta_mu, sigma_int, tau] + ([mu_inf_hat] if fit_mu_infinity else [])
    try:
        H = _fd_hessian(nll_theta, theta_hat)
        cov = np.linalg.pinv(H)
    except np.linalg.LinAlgError:
        cov = np.full((len(theta_hat), len(theta_hat)), np.nan)

    boot_errors = None
    if n_bootstrap > 0:
        rng = np.random.default_rng(bootstrap_seed)
        p = counts / counts.sum()
        draws = np.empty((n_bootstrap, len(theta_hat)))
        for b in range(n_bootstrap):
            c_b = rng.multinomial(total, p).astype(np.float64)

            def nll_b(z, _c=c_b):
                if abs(z[1]) > 50.0 or abs(z[2]) > 50.0 or abs(z[0]) > 1e7:
                    return math.inf
                mu_inf = z[3] if fit_mu_infinity else fp.mu_infinity
                m = expected_counts(z[0], math.exp(z[1]), math.exp(z[2]), mu_inf)
                return poisson_nll(_c, m)

            rb = _simplex(nll_b, z_hat, 1e-6, 1e-8 * max(1.0, abs(best.fun)), maxiter=2000)
            row = [rb.x[0], math.exp(rb.x[1]), math.exp(rb.x[2])]
            if fit_mu_infinity:
                row.append(rb.x[3])
            draws[b] = row
        boot_errors = tuple(float(v) for v in draws.std(axis=0, ddof=1))

    return FitResult(
        delta_mu=delta_mu,
        sigma_int=sigma_int,
        tau=tau,
        negative_log_likelihood=float(best.fun),
        converged=converged,
        iterations=iterations,
        bootstrap_errors=boot_errors,
        covariance_proxy=cov,
        mu_infinity=mu_inf_hat,
    )


@dataclass(frozen=True)
class SinglePeakFit:
    """Windowed single-EMG fit: parameters, per-parameter errors, and goodness of fit."""

    params: EmgParams
    errors: tuple[float, float, float]
    events: int
    deviance: float
    dof: int
    converged: bool

    @property
    def total_jitter(self) -> float:
        return self.params.std


def fit_single_peak(hist: ArrivalHistogram, window: tuple[float, float]) -> SinglePeakFit:
    """Maximum-likelihood EMG fit restricted to bins inside ``window``.

    The amplitude is profiled out analytically, leaving (mu, sigma, tau).
    ``deviance`` is the likelihood-ratio statistic against the saturated
    model; compare to chi-square with ``dof`` degrees of freedom to detect a
    window that does not contain a single clean peak.
    """
    lo, hi = float(window[0]), float(window[1])
    if hi <= lo:
        raise ValueError("window must satisfy lo < hi")
    centers = hist.bin_centers
    sel = (centers >= lo) & (centers < hi)
    if not sel.any():
        raise ValueError("window contains no bins")
    idx = np.nonzero(sel)[0]
    c = hist.counts[idx].astype(np.float64)
    events = int(c.sum())
    if events < 100:
        raise ValueError(f"window too sparse: need at least 100 events, found {events}")
    sub_edges = hist.bin_edges[idx[0] : idx[-1] + 2]
    sub_centers = centers[idx]

    mean0 = float(np.dot(c, sub_centers) / events)
    var0 = float(np.dot(c, (sub_centers - mean0) ** 2) / events)
    width0 = math.sqrt(max(var0, hist.bin_width**2))
    t0 = s0 = width0 / math.sqrt(2.0)
    mu0 = mean0 - t0

    def nll_z(z):
        if abs(z[1]) > 50.0 or abs(z[2]) > 50.0:
            return math.inf
        cdf, sf = _cdf_sf_grid(z[0], math.exp(z[1]), math.exp(z[2]), sub_edges)
        mass = np.clip(np.where(cdf[:-1] < 0.5, cdf[1:] - cdf[:-1], sf[:-1] - sf[1:]), 0.0, None)
        mass_sum = mass.sum()
        if mass_sum <= 0.0:
            return math.inf
        m = events * mass / mass_sum
        pos = c > 0.0
        if np.any(m[pos] <= 0.0):
            return math.inf
        return float(events - np.dot(c[pos], np.log(m[pos])))

    z0 = np.array([mu0, math.log(s0), math.log(t0)])
    z_alt = np.array([mu0 + width0 / 2.0, math.log(s0 * 1.3), math.log(t0 * 0.7)])
    f_ref = nll_z(z0)
    fatol = 1e-10 * max(1.0, abs(f_ref) if math.isfinite(f_ref) else 1.0)
    runs = [_simplex(nll_z, z, 1e-8, fatol, maxiter=8000) for z in (z0, z_alt)]
    finite = [r for r in runs if math.isfinite(r.fun)]
    if not finite:
        raise ValueError("single-peak objective is not finite near the moment start")
    best = min(finite, key=lambda r: r.fun)
    mu, sigma, tau = float(best.x[0]), float(math.exp(best.x[1])), float(math.exp(best.x[2]))

    def nll_theta(theta):
        if theta[1] <= 0.0 or theta[2] <= 0.0:
            return math.inf
        return nll_z([theta[0], math.log(theta[1]), math.log(theta[2])])

    try:
        H = _fd_hessian(nll_theta, [mu, sigma, tau])
        cov = np.linalg.pinv(H)
        errors = tuple(float(math.sqrt(max(v, 0.0))) for v in np.diag(cov))
    except np.linalg.LinAlgError:
        errors = (math.nan, math.nan, math.nan)

    cdf, sf = _cdf_sf_grid(mu, sigma, tau, sub_edges)
    mass = np.clip(np.where(cdf[:-1] < 0.5, cdf[1:] - cdf[:-1], sf[:-1] - sf[1:]), 0.0, None)
    m = events * mass / mass.sum()
    pos = c > 0.0
    deviance = float(2.0 * np.dot(c[pos], np.log(c[pos] / m[pos])))
    dof = max(int(c.size - 4), 1)
    return SinglePeakFit(
        params=EmgParams(mu, sigma, tau),
        errors=errors,
        events=events,
        deviance=deviance,
        dof=dof,
        converged=bool(best.success),
    )


def total_width(
    hist: ArrivalHistogram, *, n_bootstrap: int = 200, rng: np.random.Generator | None = None
) -> tuple[float, float]:
    """Event-weighted standard deviation of bin centers with a bootstrap error.

    The bootstrap resamples event-to-bin assignments multinomially; with the
    default generator (seed 0) the result is reproducible bit for bit.
    """
    if hist.total_events < 1:
        raise ValueError("empty histogram")
    centers = hist.bin_centers
    w = hist.counts / hist.total_events
    mean = float(np.dot(w, centers))
    std = float(math.sqrt(np.dot(w, (centers - mean) ** 2)))
    if n_bootstrap <= 0:
        return std, 0.0
    if rng is None:
        rng = np.random.default_rng(0)
    stds = np.empty(n_bootstrap)
    for i in range(n_bootstrap):
        cb = rng.multinomial(hist.total_events, w)
        wb = cb / hist.total_events
        mb = float(np.dot(wb, centers))
        stds[i] = math.sqrt(np.dot(wb, (centers - mb) ** 2))
    return std, float(stds.std(ddof=1))


def ingest_time_tags(source, bin_width: float = 2.0) -> ArrivalHistogram:
    """Read a time-tag CSV and bin trigger-to-edge deltas at ``bin_width`` ps."""
    table = read_time_tags(source)
    return ArrivalHistogram.from_events(table.delta_ps, bin_width, table.n_bar)
