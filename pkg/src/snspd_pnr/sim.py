"""Synthetic time-tag generation for swept mean photon numbers.

Each event draws a photon number from the click-conditioned Poisson
distribution, optionally collapses it to the number of distinct detector
elements hit (domain-merge model), and draws an arrival time from the EMG
component of that effective photon number.  Triggers sit on a fixed 9.5 kHz
comb; the canonical event time is (trigger + arrival) - trigger evaluated in
float64, so CSV round-trips reproduce in-memory results bit for bit.

Generation is chunked, and every chunk seeds its own generator from
(seed, bits(n_bar), chunk_index), so results are identical for any worker
count and duplicated n_bar entries yield identical tag streams.  The
SNSPD_PNR_THREADS environment variable caps the worker count.
"""

from __future__ import annotations

import enum
import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ._version import __version__
from .budget import JitterBudget, mu_n, sigma_total, tau_at
from .dist import EmgParams, PhotonSource, conditioned_poisson_weights, emg_sample, mixture_moments
from .fit import FixedParams, mixture_from_params, total_width
from .histogram import ArrivalHistogram
from .io import TimeTagTable, write_time_tags
from .overlap import occupied_element_counts
from .pulse import DetectorConfig

TRIGGER_PERIOD_PS = 1e12 / 9500.0  # 9.5 kHz pulse comb
_CHUNK_EVENTS = 200_000
_SWEEP_STREAM = 0xFFFFFFFF  # chunk-index slot reserved for bootstrap streams


class MergeModel(str, enum.Enum):
    OFF = "off"
    OCCUPIED_ELEMENTS = "occupied_elements"


@dataclass(frozen=True)
class SimPlan:
    detector: DetectorConfig
    budget: JitterBudget
    n_bar_values: tuple[float, ...]
    events_per_source: int
    merge_model: MergeModel = MergeModel.OFF
    seed: int = 0

    def __post_init__(self) -> None:
        object.__setattr__(self, "n_bar_values", tuple(float(v) for v in self.n_bar_values))
        object.__setattr__(self, "merge_model", MergeModel(self.merge_model))
        if not self.n_bar_values:
            raise ValueError("n_bar_values must not be empty")
        if any(not (math.isfinite(v) and v > 0.0) for v in self.n_bar_values):
            raise ValueError("n_bar values must be positive")
        if self.events_per_source < 1:
            raise ValueError("events_per_source must be >= 1")
        if not (0 <= self.seed < 2**64):
            raise ValueError("seed must be a 64-bit unsigned integer")
        if self.merge_model is MergeModel.OCCUPIED_ELEMENTS and self.detector.grid is None:
            raise ValueError("merge model needs detector.grid")


@dataclass(frozen=True)
class SourceTags:
    """Per-source synthetic tags plus the generating photon numbers."""

    n_bar: float
    trigger_ps: np.ndarray
    edge_ps: np.ndarray
    photon_number: np.ndarray   # drawn photon number n per event
    component: np.ndarray       # effective photon number after merging

    @property
    def delta_ps(self) -> np.ndarray:
        return self.edge_ps - self.trigger_ps

    def to_table(self) -> TimeTagTable:
        return TimeTagTable(self.trigger_ps, self.edge_ps, self.n_bar)


def _nbar_entropy(n_bar: float) -> int:
    return int(np.float64(n_bar).view(np.uint64))


def _thread_count() -> int:
    raw = os.environ.get("SNSPD_PNR_THREADS", "1")
    try:
        n = int(raw)
    except ValueError as exc:
        raise ValueError(f"SNSPD_PNR_THREADS must be an integer, got {raw!r}") from exc
    return max(1, n)


def _component_params(plan: SimPlan, k: int) -> EmgParams:
    return EmgParams(
        mu_n(plan.detector, k), sigma_total(plan.budget, k), tau_at(plan.budget, k)
    )


def _generate_chunk(plan: SimPlan, n_bar: float, ns_values, weights, chunk_index: int, start: int, count: int):
    seed_seq = np.random.SeedSequence((plan.seed, _nbar_entropy(n_bar), chunk_index))
    rng = np.random.default_rng(seed_seq)
    ns = rng.choice(ns_values, size=count, p=weights)
    if plan.merge_model is MergeModel.OCCUPIED_ELEMENTS:
        ks = occupied_element_counts(plan.detector.grid, ns, rng)
    else:
        ks = ns.copy()
    arrivals = np.empty(count)
    for k in np.unique(ks):
        idx = np.nonzero(ks == k)[0]
        arrivals[idx] = emg_sample(_component_params(plan, int(k)), rng, idx.size)
    trigger = (start + np.arange(count, dtype=np.float64)) * TRIGGER_PERIOD_PS
    edge = trigger + arrivals
    return ns, ks, trigger, edge


def simulate_tags(plan: SimPlan) -> list[SourceTags]:
    """Generate one tag table per n_bar value, deterministically from the plan seed."""
    threads = _thread_count()
    out: list[SourceTags] = []
    for n_bar in plan.n_bar_values:
        source = PhotonSource(n_bar)
        n_max, weights = conditioned_poisson_weights(source)
        ns_values = np.arange(1, n_max + 1)
        total = plan.events_per_source
        chunks = []
        start = 0
        index = 0
        while start < total:
            count = min(_CHUNK_EVENTS, total - start)
            chunks.append((index, start, count))
            index += 1
            start += count

        def run(chunk, _n_bar=n_bar, _ns=ns_values, _w=weights):
            ci, st, m = chunk
            return _generate_chunk(plan, _n_bar, _ns, _w, ci, st, m)

        if threads > 1 and len(chunks) > 1:
            with ThreadPoolExecutor(max_workers=threads) as pool:
                pieces = list(pool.map(run, chunks))
        else:
            pieces = [run(c) for c in chunks]
        ns = np.concatenate([p[0] for p in pieces])
        ks = np.concatenate([p[1] for p in pieces])
        trigger = np.concatenate([p[2] for p in pieces])
        edge = np.concatenate([p[3] for p in pieces])
        out.append(SourceTags(n_bar, trigger, edge, ns, ks))
    return out


def write_source_files(tags: list[SourceTags], out_dir, plan: SimPlan) -> dict:
    """Write one tag CSV per source plus a manifest JSON; returns the manifest."""
    out_path = Path(out_dir)
    out_path.mkdir(parents=True, exist_ok=True)
    entries = []
    for i, st in enumerate(tags):
        name = f"tags_{i:03d}.csv"
        write_time_tags(out_path / name, st.to_table())
        entries.append({"file": name, "n_bar": st.n_bar, "events": int(st.trigger_ps.size)})
    manifest = {
        "version": __version__,
        "seed": plan.seed,
        "merge_model": plan.merge_model.value,
        "events_per_source": plan.events_per_source,
        "trigger_period_ps": TRIGGER_PERIOD_PS,
        "sources": entries,
    }
    with open(out_path / "manifest.json", "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return manifest


@dataclass(frozen=True)
class SweepRow:
    n_bar: float
    sigma_hist: float
    sigma_error: float
    sigma_model: float


def sweep_total_width(plan: SimPlan, bin_width: float = 2.0, n_bootstrap: int = 200) -> list[SweepRow]:
    """Simulated histogram width vs n_bar alongside the analytic mixture width.

    The analytic column evaluates the law of total variance for the mixture
    built from the plan's budget (sigma_int, tau) and detector (delta_mu)
    without merging, so it is the merge-off reference curve.
    """
    tags = simulate_tags(plan)
    rows = []
    for st in tags:
        hist = ArrivalHistogram.from_events(st.delta_ps, bin_width, st.n_bar)
        rng = np.random.default_rng(
            np.random.SeedSequence((plan.seed, _nbar_entropy(st.n_bar), _SWEEP_STREAM))
        )
        sigma_hist, sigma_err = total_width(hist, n_bootstrap=n_bootstrap, rng=rng)
        fp = FixedParams(
            sigma_inst=plan.budget.sigma_inst,
            sigma_opt=plan.budget.sigma_opt,
            sigma_elec=plan.budget.sigma_elec,
            slew_rate_1=plan.budget.slew_rate_1,
            sigma_geom_1=plan.budget.sigma_geom_1,
            mu_infinity=plan.detector.mu_infinity,
            n_bar=st.n_bar,
            geom_exponent=plan.budget.geom_exponent,
            rise_scaling_exponent=plan.budget.rise_scaling_exponent,
        )
        mix = mixture_from_params(fp, (plan.detector.delta_mu, plan.budget.sigma_int, plan.budget.tau))
        _, sigma_model = mixture_moments(mix)
        rows.append(SweepRow(st.n_bar, sigma_hist, sigma_err, sigma_model))
    return rows
