//! Multi-slot simulation: random geometry, path loss with LOS/NLOS exponents,
//! Jakes fading, Shannon rates and the exponentially smoothed PF weights.
//!
//! Rates and capacities are in bit/s; an [`Instance`] built from a slot uses
//! them directly as capacity units.

mod episode;
pub mod fading;

pub use episode::{run_episode, run_episode_with, EpisodeOutput, SlotRecord, UserRecord};

use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Allocation, Capacity, Instance};
use crate::par::{self, Exec};
use fading::JakesBank;

/// Speed of light, m/s.
const LIGHT: f64 = 299_792_458.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimConfig {
    pub area_side_m: f64,
    pub ru_count: usize,
    pub user_count: usize,
    pub rb_per_ru: usize,
    pub bandwidth_hz: f64,
    pub tx_power_dbm: f64,
    pub alpha_los: f64,
    pub alpha_nlos: f64,
    pub p_los: f64,
    pub los_cutoff_m: f64,
    pub doppler_hz: f64,
    pub slot_s: f64,
    pub total_capacity_bps: f64,
    pub ru_capacity_bps: Capacity,
    pub beta: f64,
    pub r_floor: f64,
    pub warmup_slots: usize,
    pub measure_slots: usize,
    pub carrier_hz: f64,
    pub noise_dbm_per_hz: f64,
    pub noise_figure_db: f64,
    pub seed: u64,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            area_side_m: 1000.0,
            ru_count: 100,
            user_count: 1000,
            rb_per_ru: 25,
            bandwidth_hz: 2e7,
            tx_power_dbm: 24.0,
            alpha_los: 2.09,
            alpha_nlos: 3.75,
            p_los: 0.12,
            los_cutoff_m: 200.0,
            doppler_hz: 10.0,
            slot_s: 1e-3,
            total_capacity_bps: 1e9,
            ru_capacity_bps: Capacity(f64::INFINITY),
            beta: 0.05,
            r_floor: 1e3,
            warmup_slots: 200,
            measure_slots: 100,
            carrier_hz: 2e9,
            noise_dbm_per_hz: -174.0,
            noise_figure_db: 9.0,
            seed: 1,
        }
    }
}

impl SimConfig {
    /// Full-size network: 100 RUs, 1000 users over 1 km².
    pub fn full() -> Self {
        Self::default()
    }

    /// 10 RUs and 100 users at the same density, κ = 10, 50 measured slots.
    pub fn desk() -> Self {
        SimConfig {
            area_side_m: 1000.0 / 10f64.sqrt(),
            ru_count: 10,
            user_count: 100,
            rb_per_ru: 10,
            measure_slots: 50,
            total_capacity_bps: 1e12,
            ..Self::default()
        }
    }

    pub fn profile(name: &str) -> Result<Self> {
        match name {
            "desk" => Ok(Self::desk()),
            "full" => Ok(Self::full()),
            other => Err(Error::Config(format!("unknown profile '{other}' (desk, full)"))),
        }
    }

    /// Parses a JSON config. An optional `"profile"` key selects the base
    /// values that the remaining keys override.
    pub fn from_json(text: &str) -> Result<Self> {
        let mut value: serde_json::Value = serde_json::from_str(text)?;
        let obj = value
            .as_object_mut()
            .ok_or_else(|| Error::Config("config must be a JSON object".into()))?;
        let base = match obj.remove("profile") {
            None => Self::default(),
            Some(serde_json::Value::String(p)) => Self::profile(&p)?,
            Some(other) => return Err(Error::Config(format!("profile must be a string, got {other}"))),
        };
        let mut merged = serde_json::to_value(&base)?;
        let target = merged.as_object_mut().expect("config serializes to an object");
        for (k, v) in obj.iter() {
            if !target.contains_key(k) {
                return Err(Error::Config(format!("unknown config field '{k}'")));
            }
            target.insert(k.clone(), v.clone());
        }
        let cfg: SimConfig = serde_json::from_value(merged).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path.as_ref())
            .map_err(|e| Error::Io(format!("{}: {e}", path.as_ref().display())))?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::Config(what.to_string()));
        if self.ru_count == 0 || self.user_count == 0 || self.rb_per_ru == 0 {
            return bad("ru_count, user_count and rb_per_ru must be positive");
        }
        let positive = [
            ("area_side_m", self.area_side_m),
            ("bandwidth_hz", self.bandwidth_hz),
            ("slot_s", self.slot_s),
            ("carrier_hz", self.carrier_hz),
            ("r_floor", self.r_floor),
            ("alpha_los", self.alpha_los),
            ("alpha_nlos", self.alpha_nlos),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::Config(format!("{name} must be positive and finite, got {v}")));
            }
        }
        if !(0.0..=1.0).contains(&self.p_los) {
            return bad("p_los must lie in [0, 1]");
        }
        if !(self.beta > 0.0 && self.beta <= 1.0) {
            return bad("beta must lie in (0, 1]");
        }
        if !(self.doppler_hz >= 0.0 && self.los_cutoff_m >= 0.0) {
            return bad("doppler_hz and los_cutoff_m must be nonnegative");
        }
        if !(self.total_capacity_bps.is_finite() && self.total_capacity_bps >= 0.0) {
            return bad("total_capacity_bps must be finite and nonnegative");
        }
        if !(self.ru_capacity_bps.0 >= 0.0) {
            return bad("ru_capacity_bps must be nonnegative");
        }
        if ![self.tx_power_dbm, self.noise_dbm_per_hz, self.noise_figure_db].iter().all(|v| v.is_finite()) {
            return bad("power and noise levels must be finite");
        }
        Ok(())
    }

    /// Bandwidth of one RB.
    pub fn rb_bandwidth_hz(&self) -> f64 {
        self.bandwidth_hz / self.rb_per_ru as f64
    }

    /// Thermal noise plus noise figure over one RB, in mW.
    pub fn noise_mw(&self) -> f64 {
        db_to_linear(self.noise_dbm_per_hz + 10.0 * self.rb_bandwidth_hz().log10() + self.noise_figure_db)
    }

    /// Linear power gain at distance `d`: free-space loss at 1 m, then `d^-α`.
    pub fn path_gain(&self, d: f64, los: bool) -> f64 {
        let lambda = LIGHT / self.carrier_hz;
        let reference = (lambda / (4.0 * std::f64::consts::PI)).powi(2);
        let alpha = if los { self.alpha_los } else { self.alpha_nlos };
        reference * d.max(1.0).powf(-alpha)
    }

    /// Mean SNR (unit fading power).
    pub fn mean_snr(&self, d: f64, los: bool) -> f64 {
        db_to_linear(self.tx_power_dbm) * self.path_gain(d, los) / self.noise_mw()
    }

    pub fn rate_bps(&self, snr: f64) -> f64 {
        self.rb_bandwidth_hz() * (1.0 + snr).log2()
    }
}

fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// LOS with probability `p_los` when closer than the cutoff, otherwise NLOS.
/// Always consumes one draw so the stream does not depend on geometry.
pub fn draw_los<R: Rng + ?Sized>(rng: &mut R, distance: f64, cfg: &SimConfig) -> bool {
    let u: f64 = rng.gen();
    distance < cfg.los_cutoff_m && u < cfg.p_los
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimState {
    config: SimConfig,
    ru_positions: Vec<[f64; 2]>,
    user_positions: Vec<[f64; 2]>,
    association: Vec<usize>,
    /// Users of each RU in increasing global index; local index `j` is the
    /// position in this list.
    ru_users: Vec<Vec<usize>>,
    distance: Vec<f64>,
    los: Vec<bool>,
    mean_snr: Vec<f64>,
    /// Per user, one bank per RB of its RU.
    fading: Vec<Vec<JakesBank>>,
    smoothed: Vec<f64>,
    slot: u64,
}

/// Places RUs and users uniformly over the square, associates users to the
/// nearest RU (lowest index on ties), draws LOS flags and fading banks.
pub fn build_network(config: &SimConfig) -> Result<SimState> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let side = config.area_side_m;
    let point = |rng: &mut ChaCha8Rng| [rng.gen::<f64>() * side, rng.gen::<f64>() * side];
    let ru_positions: Vec<[f64; 2]> = (0..config.ru_count).map(|_| point(&mut rng)).collect();
    let user_positions: Vec<[f64; 2]> = (0..config.user_count).map(|_| point(&mut rng)).collect();
    let dist = |a: [f64; 2], b: [f64; 2]| (a[0] - b[0]).hypot(a[1] - b[1]);

    let mut association = Vec::with_capacity(config.user_count);
    let mut distance = Vec::with_capacity(config.user_count);
    for &u in &user_positions {
        let (best, d) = ru_positions
            .iter()
            .enumerate()
            .map(|(i, &r)| (i, dist(u, r)))
            .fold((0, f64::INFINITY), |acc, (i, d)| if d < acc.1 { (i, d) } else { acc });
        association.push(best);
        distance.push(d);
    }
    let los: Vec<bool> = distance.iter().map(|&d| draw_los(&mut rng, d, config)).collect();
    let fading = (0..config.user_count)
        .map(|_| (0..config.rb_per_ru).map(|_| JakesBank::random(&mut rng)).collect())
        .collect();
    let mut ru_users = vec![Vec::new(); config.ru_count];
    for (u, &i) in association.iter().enumerate() {
        ru_users[i].push(u);
    }
    let mean_snr = distance.iter().zip(&los).map(|(&d, &l)| config.mean_snr(d, l)).collect();
    Ok(SimState {
        config: config.clone(),
        ru_positions,
        user_positions,
        association,
        ru_users,
        distance,
        los,
        mean_snr,
        fading,
        smoothed: vec![0.0; config.user_count],
        slot: 0,
    })
}

impl SimState {
    pub fn config(&self) -> &SimConfig {
        &self.config
    }

    pub fn ru_positions(&self) -> &[[f64; 2]] {
        &self.ru_positions
    }

    pub fn user_positions(&self) -> &[[f64; 2]] {
        &self.user_positions
    }

    /// RU serving each user.
    pub fn association(&self) -> &[usize] {
        &self.association
    }

    pub fn ru_users(&self, i: usize) -> &[usize] {
        &self.ru_users[i]
    }

    pub fn distance(&self, u: usize) -> f64 {
        self.distance[u]
    }

    pub fn los(&self, u: usize) -> bool {
        self.los[u]
    }

    pub fn fading(&self, u: usize, k: usize) -> &JakesBank {
        &self.fading[u][k]
    }

    /// Smoothed service rate `R` per user, bit/s.
    pub fn smoothed(&self) -> &[f64] {
        &self.smoothed
    }

    pub fn slot(&self) -> u64 {
        self.slot
    }

    /// Rate of user `u` on RB `k` of its RU at slot `t`, bit/s.
    pub fn rate(&self, u: usize, k: usize, t: u64) -> f64 {
        let time = t as f64 * self.config.slot_s;
        let snr = self.mean_snr[u] * self.fading[u][k].power(self.config.doppler_hz, time);
        self.config.rate_bps(snr)
    }

    /// `γ` per user (global index) and RB at slot `t`; users only have rates
    /// toward their own RU.
    pub fn channel_snapshot(&self, t: u64, exec: Exec) -> Vec<Vec<f64>> {
        let kappa = self.config.rb_per_ru;
        par::map_range(exec, self.config.user_count, |u| (0..kappa).map(|k| self.rate(u, k, t)).collect())
    }

    /// PF weights `1 / max(R, r_floor)`.
    pub fn weights(&self) -> Vec<f64> {
        self.smoothed.iter().map(|&r| 1.0 / r.max(self.config.r_floor)).collect()
    }

    /// The single-slot problem at the current slot.
    pub fn instance(&self, exec: Exec) -> Result<Instance> {
        let rates = self.channel_snapshot(self.slot, exec);
        let w = self.weights();
        let cfg = &self.config;
        let weight = self.ru_users.iter().map(|us| us.iter().map(|&u| w[u]).collect()).collect();
        let gamma = self.ru_users.iter().map(|us| us.iter().map(|&u| rates[u].clone()).collect()).collect();
        Instance::new(
            cfg.rb_per_ru,
            vec![cfg.ru_capacity_bps.0; cfg.ru_count],
            cfg.total_capacity_bps,
            weight,
            gamma,
        )
    }

    /// Per-user delivered rate `Σ_k y` of an allocation on [`Self::instance`].
    pub fn delivered(&self, inst: &Instance, alloc: &Allocation) -> Vec<f64> {
        let mut out = vec![0.0; self.config.user_count];
        for (i, users) in self.ru_users.iter().enumerate() {
            for (j, &u) in users.iter().enumerate() {
                out[u] = alloc.user_total(inst, inst.user_index(i, j));
            }
        }
        out
    }

    /// `R ← (1−β) R + β·delivered`, then moves to the next slot.
    pub fn advance(&mut self, delivered: &[f64]) {
        let beta = self.config.beta;
        for (r, &d) in self.smoothed.iter_mut().zip(delivered) {
            *r = if beta == 1.0 { d } else { (1.0 - beta) * *r + beta * d };
        }
        self.slot += 1;
    }
}
