"""Shared fixtures: the reference detector and jitter budget used across tests."""

import pytest

from snspd_pnr import DetectorConfig, ElementGrid, FixedParams, JitterBudget, WireGeometry


@pytest.fixture
def ref_budget() -> JitterBudget:
    return JitterBudget(
        sigma_inst=3.0,
        sigma_opt=1.0,
        sigma_int=6.0,
        tau=6.0,
        sigma_elec=4.9,
        slew_rate_1=1.08,
        sigma_geom_1=9.0,
    )


@pytest.fixture
def ref_wire() -> WireGeometry:
    return WireGeometry(length=200.0, signal_velocity=6.0, ground_velocity=140.0)


@pytest.fixture
def ref_detector(ref_wire) -> DetectorConfig:
    return DetectorConfig(
        kinetic_inductance=500.0,
        amplitude=100.0,
        noise_floor=10.0,
        delta_mu=289.0,
        mu_infinity=144.0,
        rise_time_1=300.0,
        wire=ref_wire,
        grid=ElementGrid(24),
    )


@pytest.fixture
def make_fixed_params():
    def make(n_bar: float, **overrides) -> FixedParams:
        kwargs = dict(
            sigma_inst=3.0,
            sigma_opt=1.0,
            sigma_elec=4.9,
            slew_rate_1=1.08,
            sigma_geom_1=9.0,
            mu_infinity=144.0,
            n_bar=n_bar,
        )
        kwargs.update(overrides)
        return FixedParams(**kwargs)

    return make
