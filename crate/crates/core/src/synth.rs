//! Synthetic flight fleets with a component-style power oracle.
//!
//! Each flight is a sequence of maneuver segments (hover, cruise, climb,
//! descent, turn). Velocity is steered toward each segment's target under
//! acceleration limits; acceleration, attitude and body rates are derived
//! from it, and power comes from [`OraclePcm`] plus Gaussian noise.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;
use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

#[cfg(not(feature = "std"))]
use num_traits::Float;

use crate::aircraft::AircraftKind;
use crate::channel::{ChannelKind, Quantity, RawChannel};
use crate::error::{Error, Result};
use crate::preprocess::{differentiate, unwrap_angles, wrap_angle};
use crate::sample::FlightSample;
use crate::{par, rng};

pub const GRAVITY: f64 = 9.81;

/// `P = c0 + c1 * T^1.5 / sqrt(2 rho A) + c2 * |v - w|^3` with thrust
/// `T = m * |a - g|` in the NED frame (gravity `+9.81` along down).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OraclePcm {
    pub c0: f64,
    pub c1: f64,
    pub c2: f64,
    pub rho: f64,
    pub disk_area: f64,
}

impl Default for OraclePcm {
    fn default() -> Self {
        Self {
            c0: 40.0,
            c1: 1.6,
            c2: 0.08,
            rho: 1.225,
            disk_area: 0.35,
        }
    }
}

impl OraclePcm {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("c0", self.c0),
            ("c1", self.c1),
            ("c2", self.c2),
            ("rho", self.rho),
            ("disk_area", self.disk_area),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidParameter(format!("oracle coefficient {name} must be positive")));
            }
        }
        Ok(())
    }

    pub fn thrust(mass: f64, a: [f64; 3]) -> f64 {
        let (x, y, z) = (a[0], a[1], a[2] - GRAVITY);
        mass * (x * x + y * y + z * z).sqrt()
    }

    pub fn power_from(&self, mass: f64, v: [f64; 3], a: [f64; 3], wind: [f64; 2]) -> f64 {
        let t = Self::thrust(mass, a);
        let induced = self.c1 * t * t.sqrt() / (2.0 * self.rho * self.disk_area).sqrt();
        let (dn, de, dd) = (v[0] - wind[0], v[1] - wind[1], v[2]);
        let air = (dn * dn + de * de + dd * dd).sqrt();
        self.c0 + induced + self.c2 * air * air * air
    }

    /// Noise-free power for a sample's kinematics.
    pub fn power(&self, s: &FlightSample) -> f64 {
        self.power_from(s.mass, s.v, s.a, s.wind)
    }
}

/// Relative frequency of each maneuver type when drawing segments.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ManeuverMix {
    pub hover: f64,
    pub cruise: f64,
    pub climb: f64,
    pub descent: f64,
    pub turn: f64,
}

impl Default for ManeuverMix {
    fn default() -> Self {
        Self {
            hover: 0.15,
            cruise: 0.35,
            climb: 0.15,
            descent: 0.15,
            turn: 0.2,
        }
    }
}

impl ManeuverMix {
    fn weights(&self) -> [f64; 5] {
        [self.hover, self.cruise, self.climb, self.descent, self.turn]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Maneuver {
    Hover,
    Cruise,
    Climb,
    Descent,
    Turn,
}

/// An airframe and the take-off masses it flies with.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthAircraft {
    pub kind: AircraftKind,
    pub masses_kg: Vec<f64>,
    pub max_speed_mps: f64,
    pub max_ascent_mps: f64,
    pub max_descent_mps: f64,
}

impl SynthAircraft {
    /// Masses from the empty weight plus each payload option.
    pub fn builtin(kind: AircraftKind) -> Option<Self> {
        let spec = kind.spec()?;
        Some(Self {
            kind,
            masses_kg: spec.payload_options_g.iter().map(|&p| spec.mass_kg(p)).collect(),
            max_speed_mps: spec.max_speed_mps,
            max_ascent_mps: spec.max_ascent_mps,
            max_descent_mps: spec.max_descent_mps,
        })
    }
}

fn default_fleet() -> Vec<SynthAircraft> {
    AircraftKind::KNOWN.iter().filter_map(|&k| SynthAircraft::builtin(k)).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SynthConfig {
    pub n_flights: usize,
    /// Inclusive flight-duration range in seconds.
    pub duration_s: (u32, u32),
    pub aircraft: Vec<SynthAircraft>,
    pub wind_speed_mps: (f64, f64),
    pub segment_s: (u32, u32),
    pub maneuver_mix: ManeuverMix,
    pub noise_std_w: f64,
    /// Noisy power is redrawn until it exceeds this value.
    pub power_floor_w: f64,
    pub oracle: OraclePcm,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            n_flights: 20,
            duration_s: (180, 600),
            aircraft: default_fleet(),
            wind_speed_mps: (0.5, 8.0),
            segment_s: (10, 40),
            maneuver_mix: ManeuverMix::default(),
            noise_std_w: 15.0,
            power_floor_w: 20.0,
            oracle: OraclePcm::default(),
            seed: 0,
        }
    }
}

impl SynthConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidParameter(m.into()));
        if self.n_flights == 0 {
            return bad("n_flights must be >= 1");
        }
        if self.duration_s.0 < 3 || self.duration_s.1 < self.duration_s.0 {
            return bad("duration range must satisfy 3 <= min <= max");
        }
        if self.segment_s.0 == 0 || self.segment_s.1 < self.segment_s.0 {
            return bad("segment range must satisfy 1 <= min <= max");
        }
        if !(self.wind_speed_mps.0 >= 0.0 && self.wind_speed_mps.1 >= self.wind_speed_mps.0) {
            return bad("wind range must satisfy 0 <= min <= max");
        }
        if self.aircraft.is_empty() {
            return bad("at least one aircraft required");
        }
        for a in &self.aircraft {
            if a.masses_kg.is_empty() || a.masses_kg.iter().any(|m| !(*m > 0.0)) {
                return bad("aircraft masses must be positive and non-empty");
            }
            if !(a.max_speed_mps > 0.0 && a.max_ascent_mps > 0.0 && a.max_descent_mps > 0.0) {
                return bad("aircraft speed limits must be positive");
            }
        }
        let w = self.maneuver_mix.weights();
        if w.iter().any(|v| !(*v >= 0.0)) || (w.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
            return bad("maneuver mix must be non-negative and sum to 1");
        }
        if !(self.noise_std_w >= 0.0 && self.noise_std_w.is_finite()) {
            return bad("noise std must be >= 0");
        }
        self.oracle.validate()
    }
}

/// A generated flight; `samples` are at whole seconds starting at 0.
#[derive(Debug, Clone, PartialEq)]
pub struct SynthFlight {
    pub flight_id: String,
    pub aircraft: AircraftKind,
    pub mass_kg: f64,
    pub samples: Vec<FlightSample>,
}

pub fn generate_fleet(cfg: &SynthConfig) -> Result<Vec<SynthFlight>> {
    cfg.validate()?;
    let ids: Vec<usize> = (0..cfg.n_flights).collect();
    par::map(ids, |i| generate_flight(cfg, i)).into_iter().collect()
}

/// Samples of all flights, in flight order.
pub fn fleet_samples(fleet: &[SynthFlight]) -> Vec<FlightSample> {
    fleet.iter().flat_map(|f| f.samples.iter().cloned()).collect()
}

fn pick_maneuver(r: &mut rng::PcmRng, mix: &ManeuverMix) -> Maneuver {
    let w = mix.weights();
    let u: f64 = r.random::<f64>();
    let mut acc = 0.0;
    let kinds = [
        Maneuver::Hover,
        Maneuver::Cruise,
        Maneuver::Climb,
        Maneuver::Descent,
        Maneuver::Turn,
    ];
    for (k, wk) in kinds.iter().zip(w) {
        acc += wk;
        if u < acc {
            return *k;
        }
    }
    *kinds.iter().zip(w).rev().find(|(_, wk)| *wk > 0.0).map(|(k, _)| k).unwrap_or(&Maneuver::Hover)
}

fn uniform(r: &mut rng::PcmRng, lo: f64, hi: f64) -> f64 {
    if hi > lo {
        r.random_range(lo..hi)
    } else {
        lo
    }
}

/// Moves `cur` toward `target` by at most `limit`.
fn approach(cur: f64, target: f64, limit: f64) -> f64 {
    cur + (target - cur).clamp(-limit, limit)
}

const MAX_HORIZONTAL_ACCEL: f64 = 2.5;
const MAX_VERTICAL_ACCEL: f64 = 1.5;
const MAX_YAW_RATE: f64 = 0.6;
const DRAG_PER_MASS: f64 = 0.04;

fn generate_flight(cfg: &SynthConfig, index: usize) -> Result<SynthFlight> {
    let mut r = rng::rng_from_seed(rng::derive_seed(cfg.seed, &[0x5F, index as u64]));
    let craft = &cfg.aircraft[r.random_range(0..cfg.aircraft.len())];
    let mass = craft.masses_kg[r.random_range(0..craft.masses_kg.len())];
    let duration = r.random_range(cfg.duration_s.0..=cfg.duration_s.1) as usize;

    let wind_speed = uniform(&mut r, cfg.wind_speed_mps.0, cfg.wind_speed_mps.1);
    let wind_heading = uniform(&mut r, 0.0, 2.0 * PI);
    let gust_amp = 0.15 * wind_speed;
    let gust_period = uniform(&mut r, 30.0, 120.0);
    let gust_phase = uniform(&mut r, 0.0, 2.0 * PI);

    // velocity at whole seconds
    let mut v = vec![[0.0f64; 3]; duration];
    let mut cur = [0.0f64; 3];
    let mut t = 0usize;
    while t < duration {
        let seg = r.random_range(cfg.segment_s.0..=cfg.segment_s.1) as usize;
        let kind = pick_maneuver(&mut r, &cfg.maneuver_mix);
        let heading = uniform(&mut r, 0.0, 2.0 * PI);
        let (speed, vd, turn_rate) = match kind {
            Maneuver::Hover => (0.0, 0.0, 0.0),
            Maneuver::Cruise => (uniform(&mut r, 3.0, 0.8 * craft.max_speed_mps), 0.0, 0.0),
            Maneuver::Climb => (uniform(&mut r, 0.0, 4.0), -uniform(&mut r, 1.0, craft.max_ascent_mps), 0.0),
            Maneuver::Descent => (uniform(&mut r, 0.0, 4.0), uniform(&mut r, 1.0, craft.max_descent_mps), 0.0),
            Maneuver::Turn => {
                let rate = uniform(&mut r, 0.08, 0.35);
                let sign = if r.random::<bool>() { 1.0 } else { -1.0 };
                (uniform(&mut r, 3.0, 0.5 * craft.max_speed_mps), 0.0, sign * rate)
            }
        };
        for k in 0..seg.min(duration - t) {
            let h = heading + turn_rate * k as f64;
            let target = [speed * h.cos(), speed * h.sin(), vd];
            cur[0] = approach(cur[0], target[0], MAX_HORIZONTAL_ACCEL);
            cur[1] = approach(cur[1], target[1], MAX_HORIZONTAL_ACCEL);
            cur[2] = approach(cur[2], target[2], MAX_VERTICAL_ACCEL);
            v[t] = cur;
            t += 1;
        }
    }
    // land: decay the final seconds toward rest
    let tail = duration.min(4);
    for k in 0..tail {
        let i = duration - tail + k;
        let f = (tail - 1 - k) as f64 / tail as f64;
        for c in 0..3 {
            v[i][c] *= f;
        }
    }

    let ts: Vec<f64> = (0..duration).map(|i| i as f64).collect();
    let comp = |c: usize| -> Vec<f64> { v.iter().map(|x| x[c]).collect() };
    let acc: Vec<Vec<f64>> = (0..3)
        .map(|c| differentiate(&ts, &comp(c)))
        .collect::<Result<_>>()?;

    let wind: Vec<[f64; 2]> = ts
        .iter()
        .map(|&tt| {
            let s = wind_speed + gust_amp * (2.0 * PI * tt / gust_period + gust_phase).sin();
            [s * wind_heading.cos(), s * wind_heading.sin()]
        })
        .collect();

    // yaw follows the ground track when moving, held otherwise
    let mut yaw_unwrapped = vec![0.0; duration];
    let mut psi = uniform(&mut r, -PI, PI);
    for i in 0..duration {
        let speed = (v[i][0] * v[i][0] + v[i][1] * v[i][1]).sqrt();
        if speed > 1.0 {
            let desired = v[i][1].atan2(v[i][0]);
            let diff = wrap_angle(desired - psi);
            psi += diff.clamp(-MAX_YAW_RATE, MAX_YAW_RATE);
        }
        yaw_unwrapped[i] = psi;
    }

    let mut roll = vec![0.0; duration];
    let mut pitch = vec![0.0; duration];
    for i in 0..duration {
        let air_n = v[i][0] - wind[i][0];
        let air_e = v[i][1] - wind[i][1];
        let fn_ = acc[0][i] + DRAG_PER_MASS * air_n;
        let fe = acc[1][i] + DRAG_PER_MASS * air_e;
        let fd = acc[2][i] - GRAVITY;
        let (s, c) = (yaw_unwrapped[i].sin(), yaw_unwrapped[i].cos());
        let fwd = fn_ * c + fe * s;
        let right = -fn_ * s + fe * c;
        pitch[i] = -fwd.atan2(-fd);
        roll[i] = right.atan2((fwd * fwd + fd * fd).sqrt());
    }
    let rates: Vec<Vec<f64>> = [&roll, &pitch, &yaw_unwrapped]
        .iter()
        .map(|a| differentiate(&ts, &unwrap_angles(a)))
        .collect::<Result<_>>()?;

    let noise = if cfg.noise_std_w > 0.0 {
        Some(Normal::new(0.0, cfg.noise_std_w).map_err(|_| Error::InvalidParameter("noise std".into()))?)
    } else {
        None
    };
    let flight_id = format!("synth-{:04}", index);
    let mut samples = Vec::with_capacity(duration);
    for i in 0..duration {
        let a = [acc[0][i], acc[1][i], acc[2][i]];
        let clean = cfg.oracle.power_from(mass, v[i], a, wind[i]);
        let mut power = clean;
        if let Some(n) = &noise {
            let mut tries = 0;
            loop {
                power = clean + n.sample(&mut r);
                tries += 1;
                if power > cfg.power_floor_w || tries >= 64 {
                    break;
                }
            }
        }
        if power <= cfg.power_floor_w {
            power = clean.max(cfg.power_floor_w + 1.0);
        }
        samples.push(FlightSample {
            t: ts[i],
            mass,
            v: v[i],
            a,
            euler: [wrap_angle(roll[i]), wrap_angle(pitch[i]), wrap_angle(yaw_unwrapped[i])],
            euler_rate: [rates[0][i], rates[1][i], rates[2][i]],
            wind: wind[i],
            power,
            flight_id: flight_id.clone(),
            aircraft: craft.kind,
        });
    }
    Ok(SynthFlight {
        flight_id,
        aircraft: craft.kind,
        mass_kg: mass,
        samples,
    })
}

/// Nominal pack voltage falling linearly over the flight.
fn pack_voltage(t: f64, duration: f64) -> f64 {
    25.2 - 3.0 * (t / duration.max(1.0))
}

/// Matrice-100 style raw streams for a flight: kinematic state and wind at
/// 10 Hz, battery at 5 Hz, each step-held within its second. Wind is given
/// as speed and the direction it blows from, in degrees.
pub fn raw_channels(flight: &SynthFlight) -> Result<Vec<RawChannel>> {
    let s = &flight.samples;
    let duration = s.len() as f64;
    let held = |rate: usize| -> (Vec<f64>, Vec<usize>) {
        let mut ts = Vec::with_capacity(s.len() * rate);
        let mut src = Vec::with_capacity(s.len() * rate);
        for (i, smp) in s.iter().enumerate() {
            for j in 0..rate {
                ts.push(smp.t + j as f64 / rate as f64);
                src.push(i);
            }
        }
        (ts, src)
    };
    let (t10, src10) = held(10);
    let col = |f: &dyn Fn(&FlightSample) -> f64| -> Vec<f64> { src10.iter().map(|&i| f(&s[i])).collect() };
    let kin = RawChannel::new(
        ChannelKind::KinematicState,
        t10.clone(),
        vec![
            (Quantity::VelN, col(&|x| x.v[0])),
            (Quantity::VelE, col(&|x| x.v[1])),
            (Quantity::VelD, col(&|x| x.v[2])),
            (Quantity::AccN, col(&|x| x.a[0])),
            (Quantity::AccE, col(&|x| x.a[1])),
            (Quantity::AccD, col(&|x| x.a[2])),
            (Quantity::Roll, col(&|x| x.euler[0])),
            (Quantity::Pitch, col(&|x| x.euler[1])),
            (Quantity::Yaw, col(&|x| x.euler[2])),
            (Quantity::RollRate, col(&|x| x.euler_rate[0])),
            (Quantity::PitchRate, col(&|x| x.euler_rate[1])),
            (Quantity::YawRate, col(&|x| x.euler_rate[2])),
        ],
    )?;
    let wind = RawChannel::new(
        ChannelKind::Wind,
        t10,
        vec![
            (Quantity::WindSpeed, col(&|x| (x.wind[0] * x.wind[0] + x.wind[1] * x.wind[1]).sqrt())),
            (
                Quantity::WindDir,
                col(&|x| {
                    let d = (-x.wind[1]).atan2(-x.wind[0]).to_degrees();
                    if d < 0.0 {
                        d + 360.0
                    } else {
                        d
                    }
                }),
            ),
        ],
    )?;
    let (t5, src5) = held(5);
    let volts: Vec<f64> = src5.iter().map(|&i| pack_voltage(s[i].t, duration)).collect();
    let amps: Vec<f64> = src5.iter().zip(&volts).map(|(&i, v)| s[i].power / v).collect();
    let battery = RawChannel::new(
        ChannelKind::Battery,
        t5,
        vec![(Quantity::Voltage, volts), (Quantity::Current, amps)],
    )?;
    Ok(vec![kin, wind, battery])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::preprocess::{align_1hz, apply_power_floor, process_flight, samples_to_channel, FilterConfig, FlightMeta};

    fn small() -> SynthConfig {
        SynthConfig {
            n_flights: 4,
            duration_s: (60, 120),
            seed: 9,
            ..SynthConfig::default()
        }
    }

    #[test]
    fn hover_closed_form() {
        let o = OraclePcm::default();
        let m = 3.68;
        let p = o.power_from(m, [0.0; 3], [0.0; 3], [0.0; 2]);
        let expect = o.c0 + o.c1 * (m * GRAVITY).powf(1.5) / (2.0 * o.rho * o.disk_area).sqrt();
        assert!((p - expect).abs() < 1e-9 * expect);
        assert!(p > 200.0 && p < 900.0);
    }

    #[test]
    fn cubic_airspeed_and_mass_monotone() {
        let o = OraclePcm::default();
        let hover = o.power_from(2.0, [0.0; 3], [0.0; 3], [0.0; 2]);
        let p1 = o.power_from(2.0, [5.0, 0.0, 0.0], [0.0; 3], [0.0; 2]) - hover;
        let p2 = o.power_from(2.0, [10.0, 0.0, 0.0], [0.0; 3], [0.0; 2]) - hover;
        assert!((p2 / p1 - 8.0).abs() < 1e-9);
        assert!(o.power_from(2.1, [3.0, 1.0, 0.5], [0.2, 0.0, 0.4], [1.0, 2.0]) > o.power_from(2.0, [3.0, 1.0, 0.5], [0.2, 0.0, 0.4], [1.0, 2.0]));
    }

    #[test]
    fn downward_acceleration_lowers_power() {
        let o = OraclePcm::default();
        assert!(o.power_from(2.0, [0.0; 3], [0.0, 0.0, 1.0], [0.0; 2]) < o.power_from(2.0, [0.0; 3], [0.0; 3], [0.0; 2]));
    }

    #[test]
    fn deterministic_and_consistent() {
        let a = generate_fleet(&small()).unwrap();
        let b = generate_fleet(&small()).unwrap();
        assert_eq!(a, b);
        for f in &a {
            let ts: Vec<f64> = f.samples.iter().map(|s| s.t).collect();
            for c in 0..3 {
                let v: Vec<f64> = f.samples.iter().map(|s| s.v[c]).collect();
                let d = differentiate(&ts, &v).unwrap();
                for (s, dv) in f.samples.iter().zip(d) {
                    assert!((s.a[c] - dv).abs() <= 1e-6);
                }
            }
            assert!(f.samples.iter().all(|s| s.power > 20.0 && s.non_finite_field().is_none()));
        }
    }

    #[test]
    fn survives_alignment_and_floor_unchanged() {
        for f in generate_fleet(&small()).unwrap() {
            let meta = FlightMeta {
                flight_id: f.flight_id.clone(),
                aircraft: f.aircraft,
                mass: f.mass_kg,
            };
            let ch = samples_to_channel(&f.samples).unwrap();
            let aligned = align_1hz(&[ch], &meta).unwrap();
            let out = apply_power_floor(aligned, 20.0);
            assert_eq!(out.removed, 0);
            assert_eq!(out.samples, f.samples);
        }
    }

    #[test]
    fn raw_streams_reprocess_to_the_same_samples() {
        let fleet = generate_fleet(&small()).unwrap();
        let f = &fleet[0];
        let meta = FlightMeta {
            flight_id: f.flight_id.clone(),
            aircraft: f.aircraft,
            mass: f.mass_kg,
        };
        let out = process_flight(&raw_channels(f).unwrap(), &meta, &FilterConfig::default()).unwrap();
        assert_eq!(out.samples.len(), f.samples.len());
        for (a, b) in out.samples.iter().zip(&f.samples) {
            let (fa, fb) = (a.features(), b.features());
            for k in 0..fa.len() {
                assert!((fa[k] - fb[k]).abs() < 1e-9, "feature {k}: {} vs {}", fa[k], fb[k]);
            }
            assert!((a.power - b.power).abs() < 1e-9);
        }
    }

    #[test]
    fn invalid_mix_rejected() {
        let mut c = small();
        c.maneuver_mix.hover = 0.5;
        assert!(generate_fleet(&c).is_err());
    }
}
