//! Deterministic synthetic market panel with the `ic27` covariate schema.
//!
//! Drivers (load, wind, solar, weather, thermal capacity) follow daily
//! seasonality plus AR(1) levels; the published day-ahead columns are noisy
//! versions of the realized drivers. The day-ahead price is
//!
//! ```text
//! p = fuel + a·load_norm − b·renewable_ratio + spike·softplus(−z)·J + σ·ε
//! ```
//!
//! with `fuel` a daily level (Markov regime plus AR(1) wiggle) published
//! only after the fact as the historical `fuel_cost_index` column,
//! `z` the standardized thermal headroom, `J` a Poisson-started spike episode
//! indicator and `ε` Student-t. Each component draws from its own ChaCha8
//! stream (`seed`, stream id), so switching a term off leaves the others
//! unchanged.

use crate::data::{Availability, Column, TimeSeriesTable, DAY_AHEAD_PRICE, REAL_TIME_PRICE};
use crate::error::{Error, Result};
use chrono::{Datelike, NaiveDate, Weekday};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Geometric, Poisson, StandardNormal, StudentT};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::f64::consts::{PI, TAU};
use std::path::Path;

pub const SYSTEM_LOAD: &str = "system_load";
pub const WIND_POWER: &str = "wind_power";
pub const SOLAR_POWER: &str = "solar_power";
pub const FUEL_INDEX: &str = "fuel_cost_index";
pub const THERMAL_CAPACITY: &str = "thermal_capacity";
pub const COMMITTED_THERMAL: &str = "committed_thermal_plan";
pub const COMMITTED_THERMAL_ST: &str = "committed_thermal_st";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DriverSpec {
    pub load_base: f64,
    /// Relative amplitude of the intra-day load shape.
    pub load_daily_amplitude: f64,
    /// Per-step AR(1) coefficient and innovation of the relative load level.
    pub load_level_phi: f64,
    pub load_level_sigma: f64,
    /// MW per squared °C away from 18 °C.
    pub load_temp_coef: f64,
    /// Published load forecast error, as a fraction of load.
    pub load_forecast_error: f64,
    pub wind_capacity: f64,
    pub wind_phi: f64,
    pub wind_sigma: f64,
    /// Published wind forecast error, as a fraction of capacity.
    pub wind_forecast_error: f64,
    pub solar_capacity: f64,
    /// Standard deviation of the cloud-cover forecast error, in percent.
    pub cloud_forecast_error: f64,
    pub thermal_capacity: f64,
    pub outage_sigma: f64,
    pub interconnection_base: f64,
    pub non_market_base: f64,
}

impl Default for DriverSpec {
    fn default() -> Self {
        DriverSpec {
            load_base: 25_000.0,
            load_daily_amplitude: 0.12,
            load_level_phi: 0.998,
            load_level_sigma: 0.002,
            load_temp_coef: 3.0,
            load_forecast_error: 0.015,
            wind_capacity: 9_000.0,
            wind_phi: 0.995,
            wind_sigma: 0.12,
            wind_forecast_error: 0.05,
            solar_capacity: 8_000.0,
            cloud_forecast_error: 8.0,
            thermal_capacity: 24_000.0,
            outage_sigma: 0.01,
            interconnection_base: 3_000.0,
            non_market_base: 2_000.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PriceSpec {
    /// Reference fuel level.
    pub base: f64,
    /// Fuel regime offsets from `base`; the active regime switches with
    /// probability `regime_switch_prob` per day to a uniformly drawn other one.
    pub fuel_regimes: Vec<f64>,
    pub regime_switch_prob: f64,
    /// Daily AR(1) coefficient and innovation of the fuel level around the
    /// active regime.
    pub fuel_phi: f64,
    pub fuel_sigma: f64,
    /// `a`: price per unit of `(load − load_base) / (0.1·load_base)`.
    pub load_coef: f64,
    /// `b`: price per unit of `(wind + solar) / load`.
    pub renewable_coef: f64,
    pub spike_size: f64,
    pub headroom_ref: f64,
    pub headroom_scale: f64,
    /// Expected spike episodes started per step.
    pub jump_intensity: f64,
    pub jump_mean_duration: f64,
    pub noise_scale: f64,
    /// Student-t degrees of freedom.
    pub nu: f64,
    pub rt_noise_scale: f64,
    pub rt_jump_intensity: f64,
}

impl Default for PriceSpec {
    fn default() -> Self {
        PriceSpec {
            base: 320.0,
            fuel_regimes: vec![-80.0, 0.0, 80.0],
            regime_switch_prob: 0.04,
            fuel_phi: 0.9,
            fuel_sigma: 5.0,
            load_coef: 90.0,
            renewable_coef: 900.0,
            spike_size: 600.0,
            headroom_ref: 0.25,
            headroom_scale: 0.1,
            jump_intensity: 0.016,
            jump_mean_duration: 3.0,
            noise_scale: 15.0,
            nu: 4.0,
            rt_noise_scale: 35.0,
            rt_jump_intensity: 0.006,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioSpec {
    pub seed: u64,
    pub start: NaiveDate,
    pub days: usize,
    pub resolution_minutes: u32,
    pub drivers: DriverSpec,
    pub price: PriceSpec,
}

impl Default for ScenarioSpec {
    fn default() -> Self {
        ScenarioSpec {
            seed: 42,
            start: NaiveDate::from_ymd_opt(2025, 1, 1).expect("valid date"),
            days: 365,
            resolution_minutes: 15,
            drivers: DriverSpec::default(),
            price: PriceSpec::default(),
        }
    }
}

impl ScenarioSpec {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?)
    }

    pub fn validate(&self) -> Result<()> {
        let p = &self.price;
        let d = &self.drivers;
        let problems = [
            (self.days == 0, "days must be at least 1"),
            (self.resolution_minutes == 0 || 1440 % self.resolution_minutes != 0, "resolution must divide a day"),
            (!(p.nu > 0.0), "nu must be positive"),
            (p.jump_intensity < 0.0, "negative jump intensity"),
            (p.rt_jump_intensity < 0.0, "negative real-time jump intensity"),
            (!(p.jump_mean_duration >= 1.0), "jump duration below one step"),
            (!(p.headroom_scale > 0.0), "headroom scale must be positive"),
            (p.noise_scale < 0.0 || p.rt_noise_scale < 0.0, "negative noise scale"),
            (!(p.fuel_phi.abs() < 1.0), "fuel phi outside (−1, 1)"),
            (p.fuel_regimes.is_empty(), "at least one fuel regime"),
            (!(0.0..=1.0).contains(&p.regime_switch_prob), "regime switch probability outside [0, 1]"),
            (!(d.load_level_phi.abs() < 1.0 && d.wind_phi.abs() < 1.0), "driver phi outside (−1, 1)"),
            (!(d.load_base > 0.0), "load base must be positive"),
        ];
        match problems.iter().find(|(bad, _)| *bad) {
            Some((_, msg)) => Err(Error::InvalidSpec(format!("scenario: {msg}"))),
            None => Ok(()),
        }
    }
}

/// Additive terms of the day-ahead price; `Σ terms + noise = price` exactly.
#[derive(Debug, Clone, PartialEq)]
pub struct Decomposition {
    pub base: Vec<f64>,
    pub load: Vec<f64>,
    pub renewable: Vec<f64>,
    pub spike: Vec<f64>,
    pub noise: Vec<f64>,
}

impl Decomposition {
    pub fn terms(&self) -> BTreeMap<&'static str, &[f64]> {
        [("base", self.base.as_slice()), ("load", &self.load), ("renewable", &self.renewable), ("spike", &self.spike)]
            .into_iter()
            .collect()
    }

    /// Reassembles the price in the generator's summation order.
    pub fn price(&self, i: usize) -> f64 {
        self.base[i] + self.load[i] + self.renewable[i] + self.spike[i] + self.noise[i]
    }
}

fn softplus(x: f64) -> f64 {
    if x > 30.0 {
        x
    } else {
        x.exp().ln_1p()
    }
}

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

struct Streams {
    daily: ChaCha8Rng,
    load: ChaCha8Rng,
    wind: ChaCha8Rng,
    forecast: ChaCha8Rng,
    plan: ChaCha8Rng,
    jumps: ChaCha8Rng,
    noise: ChaCha8Rng,
    rt: ChaCha8Rng,
    regime: ChaCha8Rng,
}

impl Streams {
    fn new(seed: u64) -> Self {
        let stream = |k: u64| {
            let mut r = ChaCha8Rng::seed_from_u64(seed);
            r.set_stream(k);
            r
        };
        Streams {
            daily: stream(1),
            load: stream(2),
            wind: stream(3),
            forecast: stream(4),
            plan: stream(5),
            jumps: stream(6),
            noise: stream(7),
            rt: stream(8),
            regime: stream(9),
        }
    }
}

fn normal(r: &mut ChaCha8Rng) -> f64 {
    StandardNormal.sample(r)
}

/// Spike-episode indicator driven by Poisson episode starts and geometric
/// durations.
struct Episodes {
    starts: Option<Poisson<f64>>,
    duration: Geometric,
    remaining: u64,
}

impl Episodes {
    fn new(intensity: f64, mean_duration: f64) -> Self {
        Episodes {
            starts: (intensity > 0.0).then(|| Poisson::new(intensity).expect("positive intensity")),
            duration: Geometric::new(1.0 / mean_duration).expect("duration ≥ 1"),
            remaining: 0,
        }
    }

    fn step(&mut self, r: &mut ChaCha8Rng) -> f64 {
        let started = self.starts.as_ref().map(|p| p.sample(r)).unwrap_or(0.0) > 0.0;
        if started && self.remaining == 0 {
            self.remaining = 1 + self.duration.sample(r);
        }
        if self.remaining > 0 {
            self.remaining -= 1;
            1.0
        } else {
            0.0
        }
    }
}

struct Panel {
    columns: Vec<Column>,
    decomposition: Decomposition,
}

fn build(spec: &ScenarioSpec) -> Result<Panel> {
    spec.validate()?;
    let d = &spec.drivers;
    let p = &spec.price;
    let h = (1440 / spec.resolution_minutes) as usize;
    let n = spec.days * h;
    let mut s = Streams::new(spec.seed);
    let student = StudentT::new(p.nu).map_err(|e| Error::InvalidSpec(e.to_string()))?;
    let mut spikes = Episodes::new(p.jump_intensity, p.jump_mean_duration);
    let mut rt_spikes = Episodes::new(p.rt_jump_intensity, p.jump_mean_duration);

    let mut cols: BTreeMap<&'static str, Vec<f64>> = BTreeMap::new();
    let mut put = |name: &'static str, v: f64| cols.entry(name).or_insert_with(|| Vec::with_capacity(n)).push(v);
    let mut dec = Decomposition {
        base: Vec::with_capacity(n),
        load: Vec::with_capacity(n),
        renewable: Vec::with_capacity(n),
        spike: Vec::with_capacity(n),
        noise: Vec::with_capacity(n),
    };

    let (mut temp_anom, mut cloud_anom, mut pressure_anom, mut outage) = (0.0, 0.0, 0.0, 0.0);
    let mut regime = p.fuel_regimes.len() / 2;
    let mut fuel_dev = 0.0;
    let (mut level, mut wind_z, mut load_err, mut wind_err) = (0.0, 0.0, 0.0, 0.0);
    let mut tx_anom = 0.0;
    let err_phi: f64 = 0.95;
    let err_scale = (1.0 - err_phi * err_phi).sqrt();

    for day in 0..spec.days {
        let date = spec.start + chrono::Duration::days(day as i64);
        let doy = date.ordinal() as f64;
        // Daily draws, always in the same order.
        temp_anom = 0.8 * temp_anom + 2.0 * normal(&mut s.daily);
        cloud_anom = 0.7 * cloud_anom + 25.0 * normal(&mut s.daily);
        pressure_anom = 0.8 * pressure_anom + 4.0 * normal(&mut s.daily);
        outage = 0.9 * outage + d.outage_sigma * normal(&mut s.daily);
        let fuel_shock = normal(&mut s.daily);
        let switch: f64 = s.regime.random();
        let pick: f64 = s.regime.random();
        if day > 0 {
            fuel_dev = p.fuel_phi * fuel_dev + p.fuel_sigma * fuel_shock;
            let k = p.fuel_regimes.len();
            if k > 1 && switch < p.regime_switch_prob {
                regime = (regime + 1 + (pick * (k - 1) as f64) as usize % (k - 1)) % k;
            }
        }
        let fuel = p.base + p.fuel_regimes[regime] + fuel_dev;
        let ic_day = d.interconnection_base * (1.0 + 0.1 * normal(&mut s.daily));
        let nm_day = d.non_market_base * (1.0 + 0.05 * normal(&mut s.daily));
        let cloud_fc_err = d.cloud_forecast_error * normal(&mut s.daily);
        let dew_noise = normal(&mut s.daily);
        let hum_noise = normal(&mut s.daily);

        let temp_mean = 12.0 - 14.0 * (TAU * (doy - 15.0) / 365.0).cos() + temp_anom;
        let cloud = (50.0 + cloud_anom).clamp(0.0, 100.0);
        let cloud_fc = (cloud + cloud_fc_err).clamp(0.0, 100.0);
        let capacity = d.thermal_capacity * (1.0 - 0.03 - outage.abs());
        let weekend = matches!(date.weekday(), Weekday::Sat | Weekday::Sun);
        let week_factor = if weekend { 0.94 } else { 1.0 };
        let solar_season = 0.85 + 0.15 * (TAU * (doy - 80.0) / 365.0).sin();
        let daily = [
            temp_mean - 6.0 + dew_noise,
            temp_mean - 2.0 + dew_noise,
            temp_mean - 10.0 + dew_noise,
            temp_mean,
            temp_mean + 5.0,
            (60.0 + 0.3 * (cloud - 50.0) + 5.0 * hum_noise).clamp(0.0, 100.0),
            (cloud + 10.0).clamp(0.0, 100.0),
            (cloud - 30.0).clamp(0.0, 100.0),
            250.0 + 150.0 * (TAU * (doy - 80.0) / 365.0).sin(),
            900.0 + pressure_anom,
            1013.0 + pressure_anom,
            1010.0 + pressure_anom,
        ];

        for step in 0..h {
            let tau = step as f64 / h as f64;
            let temp = temp_mean + 5.0 * (TAU * (tau - 0.375)).sin();
            let shape = 0.6 * (TAU * (tau - 0.3)).sin() + 0.4 * (2.0 * TAU * (tau - 0.1)).sin();
            level = d.load_level_phi * level + d.load_level_sigma * normal(&mut s.load);
            let load = d.load_base * (1.0 + d.load_daily_amplitude * shape) * (1.0 + level) * week_factor
                + d.load_temp_coef * (temp - 18.0).powi(2);
            load_err = err_phi * load_err + err_scale * normal(&mut s.forecast);
            let load_fc = load * (1.0 + d.load_forecast_error * load_err);

            wind_z = d.wind_phi * wind_z + d.wind_sigma * normal(&mut s.wind);
            let wind = d.wind_capacity * sigmoid(wind_z - 0.5);
            wind_err = err_phi * wind_err + err_scale * normal(&mut s.forecast);
            let wind_fc = (wind + d.wind_capacity * d.wind_forecast_error * wind_err).max(0.0);

            let sun = if (0.25..0.75).contains(&tau) { (PI * (tau - 0.25) / 0.5).sin() } else { 0.0 };
            let solar = d.solar_capacity * solar_season * sun * (1.0 - 0.75 * cloud / 100.0);
            let solar_fc = d.solar_capacity * solar_season * sun * (1.0 - 0.75 * cloud_fc / 100.0);

            let interconnection = ic_day * (1.0 + 0.1 * shape);
            let net_load = load - wind - solar - interconnection - nm_day;
            let headroom = (capacity - net_load) / capacity;
            let planned = load_fc - wind_fc - solar_fc - interconnection - nm_day;
            let committed = planned * (1.0 + 0.01 * normal(&mut s.plan));
            let committed_st = committed * (1.0 + 0.005 * normal(&mut s.plan));
            tx_anom = 0.99 * tx_anom + 30.0 * normal(&mut s.plan);

            let jump = spikes.step(&mut s.jumps);
            let rt_jump = rt_spikes.step(&mut s.jumps);
            let eps: f64 = student.sample(&mut s.noise);
            let rt_eps: f64 = student.sample(&mut s.rt);

            let base_term = fuel;
            let load_term = p.load_coef * (load - d.load_base) / (0.1 * d.load_base);
            let renewable_term = -p.renewable_coef * (wind + solar) / load;
            let tightness = softplus(-(headroom - p.headroom_ref) / p.headroom_scale);
            let spike_term = p.spike_size * tightness * jump;
            let noise_term = p.noise_scale * eps;
            let price = base_term + load_term + renewable_term + spike_term + noise_term;
            let rt_price = price + p.rt_noise_scale * rt_eps + p.spike_size * tightness * rt_jump;

            dec.base.push(base_term);
            dec.load.push(load_term);
            dec.renewable.push(renewable_term);
            dec.spike.push(spike_term);
            dec.noise.push(noise_term);

            put(DAY_AHEAD_PRICE, price);
            put(REAL_TIME_PRICE, rt_price);
            put(SYSTEM_LOAD, load);
            put(WIND_POWER, wind);
            put(SOLAR_POWER, solar);
            put(FUEL_INDEX, fuel);
            put(THERMAL_CAPACITY, capacity);
            put(COMMITTED_THERMAL, committed);
            put(COMMITTED_THERMAL_ST, committed_st);
            put("system_load_forecast", load_fc);
            put("day_ahead_interconnection_plan_total", interconnection);
            put("non_market_unit_output", nm_day);
            put("transmission_available_capacity_yanhuai", 5000.0 + tx_anom);
            put("forecast_total_power", load_fc - interconnection);
            put("forecast_wind_power", wind_fc);
            put("forecast_pv_power", solar_fc);
            put("forecast_new_energy_total", wind_fc + solar_fc);
            for (name, v) in WEATHER.iter().zip(daily) {
                put(name, v);
            }
        }
    }

    let mut columns = Vec::new();
    let mut take = |name: &str, availability: Availability, unit: &str| {
        let v = cols.remove(name).expect("generated column");
        columns.push(Column::dense(name, availability, &v).with_unit(unit));
    };
    take(DAY_AHEAD_PRICE, Availability::Target, "CNY/MWh");
    take(REAL_TIME_PRICE, Availability::Target, "CNY/MWh");
    for c in [SYSTEM_LOAD, WIND_POWER, SOLAR_POWER] {
        take(c, Availability::HistoricalExogenous, "MW");
    }
    take(FUEL_INDEX, Availability::HistoricalExogenous, "CNY/MWh");
    for c in [THERMAL_CAPACITY, COMMITTED_THERMAL, COMMITTED_THERMAL_ST] {
        take(c, Availability::FutureAvailableExogenous, "MW");
    }
    for c in PLANNED {
        take(c, Availability::FutureAvailableExogenous, "MW");
    }
    for (c, unit) in WEATHER.iter().zip(WEATHER_UNITS) {
        take(c, Availability::FutureAvailableExogenous, unit);
    }
    Ok(Panel { columns, decomposition: dec })
}

const PLANNED: [&str; 8] = [
    "system_load_forecast",
    "day_ahead_interconnection_plan_total",
    "non_market_unit_output",
    "transmission_available_capacity_yanhuai",
    "forecast_total_power",
    "forecast_wind_power",
    "forecast_pv_power",
    "forecast_new_energy_total",
];

const WEATHER: [&str; 12] = [
    "dew_point_2m_mean",
    "dew_point_2m_max",
    "dew_point_2m_min",
    "temperature_2m_mean",
    "temperature_2m_max",
    "relative_humidity_2m_mean",
    "cloud_cover_low_max",
    "precipitation_probability_mean",
    "extraterrestrial_ghi_mean",
    "surface_pressure_mean",
    "pressure_msl_mean",
    "pressure_msl_min",
];

const WEATHER_UNITS: [&str; 12] = ["C", "C", "C", "C", "C", "%", "%", "%", "W/m2", "hPa", "hPa", "hPa"];

/// Future-available covariates written by the generator, excluding the
/// inputs of the constructed factors.
pub fn raw_future_columns() -> Vec<&'static str> {
    PLANNED.iter().chain(WEATHER.iter()).copied().collect()
}

pub fn generate(spec: &ScenarioSpec) -> Result<TimeSeriesTable> {
    let panel = build(spec)?;
    let start = spec.start.and_hms_opt(0, 0, 0).expect("midnight");
    let n = panel.decomposition.base.len();
    let step = chrono::Duration::minutes(spec.resolution_minutes as i64);
    let index = (0..n).map(|i| start + step * i as i32).collect();
    TimeSeriesTable::new(spec.resolution_minutes, index, panel.columns)
}

/// Regenerates the price terms for `spec` and checks them against `table`.
pub fn oracle_decomposition(spec: &ScenarioSpec, table: &TimeSeriesTable) -> Result<Decomposition> {
    let panel = build(spec)?;
    let price = table.column(DAY_AHEAD_PRICE)?;
    let dec = panel.decomposition;
    let matches = price.values.len() == dec.base.len()
        && table.resolution_minutes() == spec.resolution_minutes
        && table.first_date() == Some(spec.start)
        && price.values.iter().enumerate().all(|(i, v)| *v == Some(dec.price(i)));
    if !matches {
        return Err(Error::InvalidSpec("table was not generated from this scenario".into()));
    }
    Ok(dec)
}
