"""hits-GAM components, forward passes, loss, gradients, and serialization."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gridcast.errors import ModelError
from gridcast.model import (
    COMPONENT_NAMES,
    HitsGamConfig,
    HitsGamParams,
    ar_forward,
    batch_loss,
    events_at,
    forecast,
    pinball_loss,
    seasonality_at,
    temperature_forward,
    trend_at,
)
from gridcast.model.components import fourier_features
from gridcast.model.network import MLP
from gridcast.series import (
    HolidayCalendar,
    Level,
    LoadSeries,
    SeriesId,
    date_of,
    parse_hour,
)
from gridcast.training import build_samples

T0 = parse_hour("2019-01-01T00:00:00")
SID = SeriesId("b1", Level.BUS)
CAL = HolidayCalendar.us_federal(2018, 2022)


def tiny_config(**overrides) -> HitsGamConfig:
    base = dict(
        n_lags=48,
        horizon=33,
        quantiles=(0.01, 0.5, 0.99),
        yearly_order=2,
        weekly_order=2,
        daily_order=2,
        ar_layers=(8, 6),
        lagged_reg_layers=(6,),
        batch_size=16,
        epochs=2,
    )
    base.update(overrides)
    return HitsGamConfig(**base)


def zero_params(cfg=None, series_ids=(SID,), seed=0, mean=0.0, std=1.0) -> HitsGamParams:
    cfg = cfg or tiny_config()
    n = len(series_ids)
    params = HitsGamParams.initialize(
        cfg=cfg,
        seed=seed,
        series_ids=list(series_ids),
        load_mean=np.full(n, mean),
        load_std=np.full(n, std),
        train_start=np.full(n, T0),
        train_len=np.full(n, 1000),
        temp_mean=60.0,
        temp_std=10.0,
        calendar=CAL,
    )
    for net in (params.ar_net, params.temp_net):
        net.weights = [np.zeros_like(w) for w in net.weights]
        net.biases = [np.zeros_like(b) for b in net.biases]
    return params


def make_history(n=200, start=T0, load=None, temp=None):
    load = np.full(n, 5.0) if load is None else np.asarray(load, dtype=float)
    temp = np.full(len(load), 60.0) if temp is None else np.asarray(temp, dtype=float)
    return LoadSeries(SID, start, load, temp)


# ------------------------------------------------------------------- config


def test_config_validation():
    with pytest.raises(ModelError):
        HitsGamConfig(quantiles=(0.1, 0.9))  # no median
    with pytest.raises(ModelError):
        HitsGamConfig(quantiles=(0.5, 0.5))
    with pytest.raises(ModelError):
        HitsGamConfig(horizon=0)
    with pytest.raises(ModelError):
        HitsGamConfig(ar_layers=())
    cfg = HitsGamConfig()
    assert cfg.n_lags == 360 and cfg.horizon == 33
    assert cfg.n_seasonal_coefs == 2 * (10 + 3 + 12)
    assert HitsGamConfig.from_dict(cfg.to_dict()) == cfg


# ------------------------------------------------------------------ fourier


def test_fourier_phase_zero():
    vec = fourier_features(0, 24.0, 3)
    np.testing.assert_allclose(vec[0::2], 0.0, atol=1e-12)  # sines
    np.testing.assert_allclose(vec[1::2], 1.0, atol=1e-12)  # cosines


def test_fourier_quarter_period():
    vec = fourier_features(6, 24.0, 1)
    np.testing.assert_allclose(vec, [1.0, 0.0], atol=1e-12)


@given(st.integers(min_value=0, max_value=10_000), st.integers(min_value=1, max_value=8))
def test_fourier_periodicity(tau, order):
    period = 168.0
    a = fourier_features(tau, period, order)
    b = fourier_features(tau + period, period, order)
    np.testing.assert_allclose(a, b, atol=1e-9)


# ------------------------------------------------------- component operations


def test_trend_zero_case():
    params = zero_params()
    for t in (0, 100, 999):
        assert trend_at(params, SID, t) == 0.0


def test_trend_hand_value():
    params = zero_params()
    row = params.row(SID)
    params.trend_m[row] = 1.0
    params.trend_k[row] = 2.0
    t = 0.5 * params.train_len[row]
    assert trend_at(params, SID, t) == pytest.approx(2.0)
    assert trend_at(params, SID, 0) == pytest.approx(1.0)


def test_trend_unknown_series():
    params = zero_params()
    with pytest.raises(ModelError):
        trend_at(params, SeriesId("nope", Level.BUS), 0)


def test_seasonality_zero_and_cos_coef():
    params = zero_params()
    assert seasonality_at(params, SID, T0 + 5) == 0.0
    # single yearly cosine coefficient c read back at tau = 0
    hour = 8766 * 6  # multiple of the yearly period, so tau = 0
    params.seas_coef[params.row(SID), 1] = 0.7  # first yearly cosine slot
    assert seasonality_at(params, SID, hour) == pytest.approx(0.7)


def test_seasonality_winter_block_zero_in_july():
    cfg = tiny_config()
    params = zero_params(cfg)
    row = params.row(SID)
    n_yearly, n_weekly, n_daily = 2 * cfg.yearly_order, 2 * cfg.weekly_order, 2 * cfg.daily_order
    winter_block = slice(n_yearly + n_weekly + n_daily, None)
    params.seas_coef[row, winter_block] = 3.0
    july_hour = parse_hour("2019-07-10T12:00:00")
    assert seasonality_at(params, SID, july_hour) == 0.0
    jan_hour = parse_hour("2019-01-10T12:00:00")
    assert seasonality_at(params, SID, jan_hour) != 0.0


def test_events_zero_on_plain_day_and_offset_on_holiday():
    params = zero_params()
    row = params.row(SID)
    idx = params.holiday_names.index("independence_day")
    params.event_coef[row, idx] = -0.3
    plain = parse_hour("2019-07-02T10:00:00")
    assert events_at(params, SID, plain) == 0.0
    for hour_of_day in (0, 11, 23):
        h = parse_hour("2019-07-04T00:00:00") + hour_of_day
        assert events_at(params, SID, h) == pytest.approx(-0.3)


def test_events_two_holidays_same_date_sum():
    import datetime as dt

    cal = HolidayCalendar(((dt.date(2019, 7, 4), "a"), (dt.date(2019, 7, 4), "b")))
    cfg = tiny_config()
    params = HitsGamParams.initialize(
        cfg=cfg,
        seed=0,
        series_ids=[SID],
        load_mean=np.zeros(1),
        load_std=np.ones(1),
        train_start=np.full(1, T0),
        train_len=np.full(1, 1000),
        temp_mean=60.0,
        temp_std=10.0,
        calendar=cal,
    )
    params.event_coef[0] = [-0.2, 0.05]
    h = parse_hour("2019-07-04T08:00:00")
    assert events_at(params, SID, h) == pytest.approx(-0.15)


# ----------------------------------------------------------------- networks


def test_zero_networks_produce_zero():
    params = zero_params()
    cfg = params.config
    out = ar_forward(params, np.random.default_rng(0).normal(size=cfg.n_lags))
    np.testing.assert_array_equal(out, 0.0)
    out = temperature_forward(params, np.full(cfg.horizon, 75.0))
    np.testing.assert_array_equal(out, 0.0)


def test_forward_shapes_and_length_checks():
    cfg = tiny_config()
    params = zero_params(cfg)
    assert ar_forward(params, np.zeros(cfg.n_lags)).shape == (3, cfg.horizon)
    assert temperature_forward(params, np.zeros(cfg.horizon)).shape == (3, cfg.horizon)
    with pytest.raises(ModelError):
        ar_forward(params, np.zeros(cfg.n_lags + 1))
    with pytest.raises(ModelError):
        temperature_forward(params, np.zeros(cfg.horizon - 1))


def test_temperature_net_is_dense_across_hours():
    # perturbing one future hour may move outputs at all hours
    cfg = tiny_config()
    rng = np.random.default_rng(3)
    params = zero_params(cfg)
    params.temp_net = MLP((cfg.horizon, *cfg.lagged_reg_layers, cfg.horizon * 3), rng)
    base = np.full(cfg.horizon, 60.0)
    bumped = base.copy()
    bumped[7] += 5.0
    diff = temperature_forward(params, bumped) - temperature_forward(params, base)
    assert np.count_nonzero(np.abs(diff) > 1e-12) > cfg.horizon


def central_difference(fn, tensor, idx, step=1e-5):
    orig = tensor[idx]
    tensor[idx] = orig + step
    up = fn()
    tensor[idx] = orig - step
    down = fn()
    tensor[idx] = orig
    return (up - down) / (2 * step)


def test_mlp_gradient_matches_finite_differences():
    rng = np.random.default_rng(42)
    net = MLP((7, 5, 4), rng)
    x = rng.normal(size=(3, 7))
    probe = rng.normal(size=(3, 4))  # random linear functional of the output

    def value():
        out, _ = net.forward(x)
        return float((probe * out).sum())

    out, cache = net.forward(x)
    dx, dw, db = net.backward(cache, probe)
    for tensor, grad in zip(net.weights + net.biases, dw + db):
        flat_idx = [(i,) if tensor.ndim == 1 else (i // tensor.shape[1], i % tensor.shape[1]) for i in range(tensor.size)]
        for idx in flat_idx[:: max(1, tensor.size // 5)]:
            fd = central_difference(value, tensor, idx)
            assert fd == pytest.approx(grad[idx], rel=1e-4, abs=1e-9)
    # input gradient too
    for i in range(3):
        for j in range(0, 7, 3):
            fd = central_difference(value, x, (i, j))
            assert fd == pytest.approx(dx[i, j], rel=1e-4, abs=1e-9)


# ------------------------------------------------------------------- pinball


def test_pinball_values():
    assert pinball_loss(5.0, 5.0, 0.3) == 0.0
    assert pinball_loss(10.0, 6.0, 0.5) == pytest.approx(2.0)
    assert pinball_loss(6.0, 10.0, 0.9) == pytest.approx(0.4)


@given(
    st.floats(-100, 100),
    st.floats(-100, 100),
    st.floats(0.01, 0.99),
)
def test_pinball_nonnegative(a, p, q):
    assert pinball_loss(a, p, q) >= 0.0


# ---------------------------------------------------------------- batch loss


def training_series(n=160, seed=0, sid=SID):
    rng = np.random.default_rng(seed)
    t = np.arange(n)
    load = 20 + 3 * np.sin(2 * np.pi * t / 24) + rng.normal(0, 0.5, n)
    temp = 60 + 15 * np.sin(2 * np.pi * t / 8766) + rng.normal(0, 2, n)
    return LoadSeries(sid, T0, load, temp)


def test_batch_loss_perfect_predictions_zero():
    cfg = tiny_config(quantiles=(0.5,))
    s = training_series()
    samples = build_samples(s, cfg)[:4]
    params = zero_params(cfg, mean=float(s.load.mean()), std=float(s.load.std()))
    # force targets to equal the model output (zero everything)
    for smp in samples:
        smp.targets[:] = 0.0
    assert batch_loss(params, samples) == 0.0


def test_batch_loss_uniform_weights_equal_unweighted():
    cfg = tiny_config()
    s = training_series()
    samples = build_samples(s, cfg)[:6]
    params = zero_params(cfg, mean=float(s.load.mean()), std=float(s.load.std()))
    ones = np.ones(len(samples))
    assert batch_loss(params, samples, ones) == pytest.approx(
        batch_loss(params, samples, ones * 1.0), rel=1e-12
    )
    # hand check: doubling all weights doubles the loss (count normalization)
    base = batch_loss(params, samples, ones)
    assert batch_loss(params, samples, 2 * ones) == pytest.approx(2 * base, rel=1e-12)


def test_batch_loss_two_sample_hand_computation():
    cfg = tiny_config(quantiles=(0.5,))
    s = training_series()
    samples = build_samples(s, cfg)[:2]
    params = zero_params(cfg, mean=float(s.load.mean()), std=float(s.load.std()))
    # zero params predict 0 in scaled space: loss is mean of 0.5*|target|
    w = np.array([1.0, 3.0])
    expected = float(
        np.mean(
            [wi * 0.5 * np.abs(smp.targets) for wi, smp in zip(w, samples)]
        )
    )
    assert batch_loss(params, samples, w) == pytest.approx(expected, rel=1e-12)


def test_batch_loss_empty_batch_errors():
    params = zero_params()
    with pytest.raises(ModelError):
        batch_loss(params, [])


# ----------------------------------------------------------------- forecast


def test_zero_bank_forecast_is_series_mean():
    cfg = tiny_config()
    params = zero_params(cfg, mean=17.0, std=4.0)
    history = make_history(n=100, load=np.full(100, 17.0))
    bundle = forecast(params, SID, T0 + 99, history, np.full(cfg.horizon, 60.0))
    np.testing.assert_allclose(bundle.forecast, 17.0, atol=1e-12)
    total = np.sum([bundle.components[k] for k in COMPONENT_NAMES], axis=0)
    np.testing.assert_allclose(total, bundle.median(), atol=1e-9)


def test_forecast_requires_history():
    cfg = tiny_config()
    params = zero_params(cfg)
    history = make_history(n=30)  # < n_lags
    with pytest.raises(ModelError):
        forecast(params, SID, T0 + 29, history, np.full(cfg.horizon, 60.0))


def test_forecast_unknown_series():
    cfg = tiny_config()
    params = zero_params(cfg)
    other = SeriesId("zz", Level.BUS)
    history = LoadSeries(other, T0, np.full(100, 3.0), np.full(100, 60.0))
    with pytest.raises(ModelError):
        forecast(params, other, T0 + 99, history, np.full(cfg.horizon, 60.0))


@settings(max_examples=100, deadline=None)
@given(st.integers(min_value=0, max_value=100_000))
def test_quantile_monotonicity_after_repair_random_banks(seed):
    cfg = tiny_config()
    rng = np.random.default_rng(seed)
    params = zero_params(cfg, mean=10.0, std=2.0)
    params.ar_net = MLP((cfg.n_lags, *cfg.ar_layers, cfg.horizon * 3), rng)
    params.temp_net = MLP((cfg.horizon, *cfg.lagged_reg_layers, cfg.horizon * 3), rng)
    for net in (params.ar_net, params.temp_net):
        net.biases = [rng.normal(0, 0.5, b.shape) for b in net.biases]
    params.trend_m[0], params.trend_k[0] = rng.normal(0, 1, 2)
    params.seas_coef[0] = rng.normal(0, 0.3, params.seas_coef.shape[1])
    history = make_history(n=120, load=10 + rng.normal(0, 2, 120))
    bundle = forecast(params, SID, T0 + 119, history, 60 + rng.normal(0, 8, cfg.horizon))
    assert np.all(np.diff(bundle.forecast, axis=0) >= 0)
    total = np.sum([bundle.components[k] for k in COMPONENT_NAMES], axis=0)
    np.testing.assert_allclose(total, bundle.median(), atol=1e-6)


def test_bundle_round_trip():
    cfg = tiny_config()
    rng = np.random.default_rng(1)
    params = zero_params(cfg, mean=10.0, std=2.0)
    params.ar_net = MLP((cfg.n_lags, *cfg.ar_layers, cfg.horizon * 3), rng)
    history = make_history(n=120, load=10 + rng.normal(0, 2, 120))
    bundle = forecast(params, SID, T0 + 119, history, np.full(cfg.horizon, 55.0))
    from gridcast.model.forecast import ForecastBundle

    back = ForecastBundle.from_json_dict(bundle.to_json_dict())
    assert back == bundle
    np.testing.assert_array_equal(back.forecast, bundle.forecast)


# ------------------------------------------------------------- serialization


def test_params_artifact_round_trip_bit_identical_forecasts(tmp_path):
    cfg = tiny_config()
    rng = np.random.default_rng(7)
    params = zero_params(cfg, mean=12.0, std=3.0)
    params.ar_net = MLP((cfg.n_lags, *cfg.ar_layers, cfg.horizon * 3), rng)
    params.temp_net = MLP((cfg.horizon, *cfg.lagged_reg_layers, cfg.horizon * 3), rng)
    params.seas_coef[0] = rng.normal(0, 0.2, params.seas_coef.shape[1])
    params.trend_m[0] = 0.3
    path = tmp_path / "model.json"
    params.save(path)
    loaded = HitsGamParams.load(path)

    history = make_history(n=120, load=12 + rng.normal(0, 3, 120))
    temps = 60 + rng.normal(0, 5, cfg.horizon)
    a = forecast(params, SID, T0 + 119, history, temps)
    b = forecast(loaded, SID, T0 + 119, history, temps)
    np.testing.assert_array_equal(a.forecast, b.forecast)
    for k in COMPONENT_NAMES:
        np.testing.assert_array_equal(a.components[k], b.components[k])


def test_holiday_date_lookup_consistency():
    assert date_of(parse_hour("2019-11-28T13:00:00")) in [d for d, n in CAL.holidays if n == "thanksgiving"]
