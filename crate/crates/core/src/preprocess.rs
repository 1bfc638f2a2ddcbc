//! Raw channels to clean 1 Hz flight samples.
//!
//! Per flight the steps run in this order: median filter at the native
//! rate, time differentiation (positions to velocity to acceleration,
//! attitude to angular rate), alignment to whole seconds by bin averaging,
//! and finally the power floor that drops ground-idle samples.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;
#[cfg(not(feature = "std"))]
use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::aircraft::AircraftKind;
use crate::channel::{ChannelKind, Quantity, RawChannel};
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::sample::{FeatureMatrix, FlightSample, TargetVector, FEATURE_NAMES, N_FEATURES};

/// Mean Earth radius used for the local flat-earth GPS conversion.
const EARTH_RADIUS_M: f64 = 6_371_000.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WindConvention {
    /// Direction is the bearing the wind blows from (meteorological).
    From,
    /// Direction is the bearing the wind blows toward.
    To,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FilterConfig {
    pub median_window: usize,
    pub power_floor: f64,
    pub wind_convention: WindConvention,
}

impl FilterConfig {
    /// Alignment bin width in seconds.
    pub const ALIGN_STEP: f64 = 1.0;

    pub fn validate(&self) -> Result<()> {
        if self.median_window < 3 || self.median_window.is_multiple_of(2) {
            return Err(Error::InvalidParameter(alloc::format!(
                "median window must be odd and >= 3, got {}",
                self.median_window
            )));
        }
        if !(self.power_floor >= 0.0) {
            return Err(Error::InvalidParameter(alloc::format!(
                "power floor must be >= 0, got {}",
                self.power_floor
            )));
        }
        Ok(())
    }
}

impl Default for FilterConfig {
    fn default() -> Self {
        Self {
            median_window: 5,
            power_floor: 20.0,
            wind_convention: WindConvention::From,
        }
    }
}

/// Identity and mass of the flight a set of channels belongs to.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlightMeta {
    pub flight_id: String,
    pub aircraft: AircraftKind,
    pub mass: f64,
}

/// Centered running median. Near the ends the window shrinks symmetrically
/// so that it stays centered on the element.
pub fn median_filter(series: &[f64], window: usize) -> Result<Vec<f64>> {
    if window.is_multiple_of(2) {
        return Err(Error::InvalidParameter(alloc::format!("median window {window} is even")));
    }
    if window > series.len() {
        return Err(Error::InvalidParameter(alloc::format!(
            "median window {window} longer than series ({})",
            series.len()
        )));
    }
    let n = series.len();
    let half = window / 2;
    let mut buf = Vec::with_capacity(window);
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let h = half.min(i).min(n - 1 - i);
        buf.clear();
        buf.extend_from_slice(&series[i - h..=i + h]);
        let (_, m, _) = buf.select_nth_unstable_by(h, f64::total_cmp);
        out.push(*m);
    }
    Ok(out)
}

/// Time derivative by central differences inside, one-sided at the ends.
pub fn differentiate(t: &[f64], x: &[f64]) -> Result<Vec<f64>> {
    if t.len() != x.len() {
        return Err(Error::LengthMismatch {
            left: t.len(),
            right: x.len(),
        });
    }
    let n = t.len();
    if n < 2 {
        return Err(Error::InsufficientData { needed: 2, have: n });
    }
    if let Some(i) = t.windows(2).position(|w| !(w[1] > w[0])) {
        return Err(Error::NonMonotone(i + 1));
    }
    let mut d = Vec::with_capacity(n);
    d.push((x[1] - x[0]) / (t[1] - t[0]));
    for i in 1..n - 1 {
        d.push((x[i + 1] - x[i - 1]) / (t[i + 1] - t[i - 1]));
    }
    d.push((x[n - 1] - x[n - 2]) / (t[n - 1] - t[n - 2]));
    Ok(d)
}

/// Removes jumps larger than pi so the angle is continuous.
pub fn unwrap_angles(x: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(x.len());
    let mut offset = 0.0;
    for (i, &v) in x.iter().enumerate() {
        if i > 0 {
            let d = v - x[i - 1];
            if d > PI {
                offset -= 2.0 * PI * ((d + PI) / (2.0 * PI)).floor();
            } else if d < -PI {
                offset += 2.0 * PI * ((-d + PI) / (2.0 * PI)).floor();
            }
        }
        out.push(v + offset);
    }
    out
}

/// Maps an angle into (-pi, pi]; values already in range are returned as is.
pub fn wrap_angle(x: f64) -> f64 {
    if x > -PI && x <= PI {
        return x;
    }
    let mut y = x - 2.0 * PI * ((x + PI) / (2.0 * PI)).floor();
    if y <= -PI {
        y += 2.0 * PI;
    }
    y
}

/// Wind speed and direction (degrees) to north/east velocity components.
pub fn wind_components(speed: f64, dir_deg: f64, convention: WindConvention) -> (f64, f64) {
    let rad = dir_deg.to_radians();
    let sign = match convention {
        WindConvention::From => -1.0,
        WindConvention::To => 1.0,
    };
    (sign * speed * rad.cos(), sign * speed * rad.sin())
}

/// Local north/east/down offsets of a GPS fix from `origin` (lat, lon, alt).
pub fn geodetic_to_ned(lat: f64, lon: f64, alt: f64, origin: (f64, f64, f64)) -> (f64, f64, f64) {
    let n = (lat - origin.0).to_radians() * EARTH_RADIUS_M;
    let e = (lon - origin.1).to_radians() * EARTH_RADIUS_M * origin.0.to_radians().cos();
    (n, e, -(alt - origin.2))
}

fn filter_column(values: &[f64], window: usize) -> Result<Vec<f64>> {
    let n = values.len();
    if n == 0 {
        return Ok(Vec::new());
    }
    let mut w = window.min(n);
    if w.is_multiple_of(2) {
        w -= 1;
    }
    median_filter(values, w)
}

/// Filters one channel at its native rate and derives the quantities a
/// flight sample needs (velocity, acceleration, rates, wind components,
/// power). The returned channel carries only derived sample quantities.
pub fn condition_channel(ch: &RawChannel, cfg: &FilterConfig) -> Result<RawChannel> {
    let t = &ch.timestamps;
    let mut out = RawChannel {
        kind: ch.kind,
        rate_hz: ch.rate_hz,
        timestamps: t.clone(),
        columns: Vec::new(),
    };
    let filt = |v: &[f64]| filter_column(v, cfg.median_window);

    // Positions: from geodetic fixes or already-local offsets.
    let positions = if let (Some(lat), Some(lon), Some(alt)) =
        (ch.column(Quantity::Lat), ch.column(Quantity::Lon), ch.column(Quantity::Alt))
    {
        let origin = (lat[0], lon[0], alt[0]);
        let mut pn = Vec::with_capacity(t.len());
        let mut pe = Vec::with_capacity(t.len());
        let mut pd = Vec::with_capacity(t.len());
        for i in 0..t.len() {
            let (n, e, d) = geodetic_to_ned(lat[i], lon[i], alt[i], origin);
            pn.push(n);
            pe.push(e);
            pd.push(d);
        }
        Some([pn, pe, pd])
    } else if let (Some(n), Some(e), Some(d)) =
        (ch.column(Quantity::PosN), ch.column(Quantity::PosE), ch.column(Quantity::PosD))
    {
        Some([n.to_vec(), e.to_vec(), d.to_vec()])
    } else {
        None
    };
    let vel_q = [Quantity::VelN, Quantity::VelE, Quantity::VelD];
    let acc_q = [Quantity::AccN, Quantity::AccE, Quantity::AccD];
    if let Some(pos) = positions {
        for (axis, p) in pos.iter().enumerate() {
            let v = differentiate(t, &filt(p)?)?;
            let a = differentiate(t, &v)?;
            out.set_column(vel_q[axis], v);
            out.set_column(acc_q[axis], a);
        }
    }
    for axis in 0..3 {
        if let Some(v) = ch.column(vel_q[axis]) {
            let v = filt(v)?;
            if !ch.has(acc_q[axis]) {
                out.set_column(acc_q[axis], differentiate(t, &v)?);
            }
            out.set_column(vel_q[axis], v);
        }
        if let Some(a) = ch.column(acc_q[axis]) {
            out.set_column(acc_q[axis], filt(a)?);
        }
    }

    let ang_q = [Quantity::Roll, Quantity::Pitch, Quantity::Yaw];
    let rate_q = [Quantity::RollRate, Quantity::PitchRate, Quantity::YawRate];
    for axis in 0..3 {
        if let Some(ang) = ch.column(ang_q[axis]) {
            let ang = filt(&unwrap_angles(ang))?;
            if !ch.has(rate_q[axis]) {
                out.set_column(rate_q[axis], differentiate(t, &ang)?);
            }
            out.set_column(ang_q[axis], ang);
        }
        if let Some(r) = ch.column(rate_q[axis]) {
            out.set_column(rate_q[axis], filt(r)?);
        }
    }

    if let (Some(speed), Some(dir)) = (ch.column(Quantity::WindSpeed), ch.column(Quantity::WindDir)) {
        let (wn, we): (Vec<f64>, Vec<f64>) = speed
            .iter()
            .zip(dir)
            .map(|(&s, &d)| wind_components(s, d, cfg.wind_convention))
            .unzip();
        out.set_column(Quantity::WindN, filt(&wn)?);
        out.set_column(Quantity::WindE, filt(&we)?);
    }
    for q in [Quantity::WindN, Quantity::WindE] {
        if let Some(w) = ch.column(q) {
            out.set_column(q, filt(w)?);
        }
    }

    let power = match (ch.column(Quantity::Power), ch.column(Quantity::Voltage), ch.column(Quantity::Current)) {
        (Some(p), _, _) => Some(p.to_vec()),
        (None, Some(v), Some(c)) => Some(v.iter().zip(c).map(|(v, c)| v * c).collect()),
        _ => None,
    };
    if let Some(p) = power {
        out.set_column(Quantity::Power, filt(&p)?);
    }
    Ok(out)
}

/// Averages every channel into whole-second bins `[k, k+1)` over the span
/// all channels cover and assembles one sample per second. Seconds where
/// any channel has no raw value are dropped.
pub fn align_1hz(channels: &[RawChannel], meta: &FlightMeta) -> Result<Vec<FlightSample>> {
    if channels.is_empty() || channels.iter().any(RawChannel::is_empty) {
        return Err(Error::NoCommonSpan);
    }
    let start = channels.iter().map(|c| c.timestamps[0]).fold(f64::NEG_INFINITY, f64::max);
    let end = channels
        .iter()
        .map(|c| *c.timestamps.last().unwrap())
        .fold(f64::INFINITY, f64::min);
    let k0 = start.ceil();
    let k1 = end.floor();
    if !(k1 >= k0) {
        return Err(Error::NoCommonSpan);
    }
    let n_bins = (k1 - k0) as usize + 1;

    // Resolve which channel column supplies each sample quantity.
    let mut source: Vec<(usize, usize)> = Vec::with_capacity(Quantity::SAMPLE_FIELDS.len());
    for q in Quantity::SAMPLE_FIELDS {
        let found = channels
            .iter()
            .enumerate()
            .find_map(|(ci, c)| c.columns.iter().position(|(k, _)| *k == q).map(|col| (ci, col)));
        match found {
            Some(s) => source.push(s),
            None => return Err(Error::MissingQuantity(q.name())),
        }
    }

    // Per channel: bin sums per column and bin counts.
    let mut sums: Vec<Vec<Vec<f64>>> = Vec::with_capacity(channels.len());
    let mut counts: Vec<Vec<usize>> = Vec::with_capacity(channels.len());
    for c in channels {
        let mut s = vec![vec![0.0; n_bins]; c.columns.len()];
        let mut cnt = vec![0usize; n_bins];
        for (i, &ts) in c.timestamps.iter().enumerate() {
            let k = ts.floor();
            if k < k0 || k > k1 {
                continue;
            }
            let b = (k - k0) as usize;
            cnt[b] += 1;
            for (col, (_, vals)) in c.columns.iter().enumerate() {
                s[col][b] += vals[i];
            }
        }
        sums.push(s);
        counts.push(cnt);
    }

    let mut out = Vec::new();
    let mut fields = [0.0; 15];
    for b in 0..n_bins {
        if counts.iter().any(|c| c[b] == 0) {
            continue;
        }
        for (f, &(ci, col)) in fields.iter_mut().zip(&source) {
            *f = sums[ci][col][b] / counts[ci][b] as f64;
        }
        out.push(FlightSample {
            t: k0 + b as f64,
            mass: meta.mass,
            v: [fields[0], fields[1], fields[2]],
            a: [fields[3], fields[4], fields[5]],
            euler: [wrap_angle(fields[6]), wrap_angle(fields[7]), wrap_angle(fields[8])],
            euler_rate: [fields[9], fields[10], fields[11]],
            wind: [fields[12], fields[13]],
            power: fields[14],
            flight_id: meta.flight_id.clone(),
            aircraft: meta.aircraft,
        });
    }
    Ok(out)
}

/// Packs already-aligned samples into one channel carrying every sample
/// quantity, so they can be fed back through [`align_1hz`].
pub fn samples_to_channel(samples: &[FlightSample]) -> Result<RawChannel> {
    let mut cols: Vec<(Quantity, Vec<f64>)> = Quantity::SAMPLE_FIELDS
        .iter()
        .map(|&q| (q, Vec::with_capacity(samples.len())))
        .collect();
    for s in samples {
        let f = s.features();
        for (k, (_, c)) in cols.iter_mut().enumerate() {
            c.push(if k < 14 { f[k + 1] } else { s.power });
        }
    }
    RawChannel::new(
        ChannelKind::KinematicState,
        samples.iter().map(|s| s.t).collect(),
        cols,
    )
}

/// Result of the power floor: kept samples plus how many were dropped.
#[derive(Debug, Clone, PartialEq)]
pub struct FloorOutcome {
    pub samples: Vec<FlightSample>,
    pub removed: usize,
}

/// Keeps samples whose power is strictly above `floor`, preserving order.
pub fn apply_power_floor(samples: Vec<FlightSample>, floor: f64) -> FloorOutcome {
    let before = samples.len();
    let kept: Vec<FlightSample> = samples.into_iter().filter(|s| s.power > floor).collect();
    FloorOutcome {
        removed: before - kept.len(),
        samples: kept,
    }
}

/// The full per-flight pipeline on raw channels.
pub fn process_flight(channels: &[RawChannel], meta: &FlightMeta, cfg: &FilterConfig) -> Result<FloorOutcome> {
    cfg.validate()?;
    let conditioned = channels
        .iter()
        .map(|c| condition_channel(c, cfg))
        .collect::<Result<Vec<_>>>()?;
    let aligned = align_1hz(&conditioned, meta)?;
    Ok(apply_power_floor(aligned, cfg.power_floor))
}

pub fn to_feature_matrix(samples: &[FlightSample]) -> Result<(FeatureMatrix, TargetVector)> {
    if samples.is_empty() {
        return Err(Error::Empty("samples"));
    }
    let mut data = Vec::with_capacity(samples.len() * N_FEATURES);
    let mut y = Vec::with_capacity(samples.len());
    for (i, s) in samples.iter().enumerate() {
        if let Some(field) = s.non_finite_field() {
            return Err(Error::NonFinite { index: i, field });
        }
        data.extend_from_slice(&s.features());
        y.push(s.power);
    }
    let m = Matrix::new(samples.len(), N_FEATURES, data)?;
    Ok((FeatureMatrix::new(m)?, TargetVector::new(y)?))
}

/// Names of the correlation-matrix axes: the features followed by power.
pub fn correlation_labels() -> [&'static str; N_FEATURES + 1] {
    let mut l = [""; N_FEATURES + 1];
    l[..N_FEATURES].copy_from_slice(&FEATURE_NAMES);
    l[N_FEATURES] = "power";
    l
}

/// Pairwise Pearson coefficients over the 15 features and power. Entries
/// involving a constant column are `None`.
pub fn correlation_heatmap(x: &FeatureMatrix, y: &TargetVector) -> Result<Vec<Vec<Option<f64>>>> {
    let m = x.rows();
    if m != y.len() {
        return Err(Error::LengthMismatch { left: m, right: y.len() });
    }
    if m < 3 {
        return Err(Error::InsufficientData { needed: 3, have: m });
    }
    let mut cols: Vec<Vec<f64>> = (0..N_FEATURES).map(|j| x.as_matrix().column(j)).collect();
    cols.push(y.as_slice().to_vec());
    let centered: Vec<(Vec<f64>, f64)> = cols
        .into_iter()
        .map(|c| {
            let mean = c.iter().sum::<f64>() / m as f64;
            let d: Vec<f64> = c.iter().map(|v| v - mean).collect();
            let constant = c.iter().all(|v| *v == c[0]);
            let ss = if constant { 0.0 } else { d.iter().map(|v| v * v).sum::<f64>() };
            (d, ss)
        })
        .collect();
    let k = centered.len();
    let mut out = vec![vec![None; k]; k];
    for i in 0..k {
        for j in i..k {
            let (di, si) = &centered[i];
            let (dj, sj) = &centered[j];
            if *si <= 0.0 || *sj <= 0.0 {
                continue;
            }
            let r = if i == j {
                1.0
            } else {
                let cov: f64 = di.iter().zip(dj).map(|(a, b)| a * b).sum();
                (cov / (si.sqrt() * sj.sqrt())).clamp(-1.0, 1.0)
            };
            out[i][j] = Some(r);
            out[j][i] = Some(r);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn sample(t: f64, power: f64) -> FlightSample {
        FlightSample {
            t,
            mass: 3.68,
            v: [1.0, 2.0, 3.0],
            a: [0.1, 0.2, 0.3],
            euler: [0.01, 0.02, 0.03],
            euler_rate: [0.0; 3],
            wind: [0.5, -0.5],
            power,
            flight_id: "f".into(),
            aircraft: AircraftKind::Matrice100,
        }
    }

    #[test]
    fn median_removes_single_spike() {
        let out = median_filter(&[1.0, 100.0, 1.0, 1.0, 1.0], 3).unwrap();
        assert_eq!(&out[1..4], &[1.0, 1.0, 1.0]);
    }

    #[test]
    fn median_constant_and_center() {
        assert_eq!(median_filter(&[4.0; 6], 5).unwrap(), vec![4.0; 6]);
        let out = median_filter(&[1.0, 2.0, 3.0, 4.0, 5.0], 5).unwrap();
        assert_eq!(out[2], 3.0);
        // shrunken windows at the ends
        assert_eq!(out[0], 1.0);
        assert_eq!(out[1], 2.0);
    }

    #[test]
    fn median_rejects_even_window() {
        assert!(median_filter(&[1.0, 2.0, 3.0, 4.0], 2).is_err());
        assert!(median_filter(&[1.0, 2.0], 3).is_err());
    }

    #[test]
    fn differentiate_examples() {
        let t = [0.0, 1.0, 2.0];
        assert_eq!(differentiate(&t, &[0.0, 1.0, 2.0]).unwrap(), vec![1.0, 1.0, 1.0]);
        assert_eq!(differentiate(&t, &[0.0, 0.0, 0.0]).unwrap(), vec![0.0, 0.0, 0.0]);
        assert_eq!(differentiate(&t, &[0.0, 1.0, 4.0]).unwrap()[1], 2.0);
        assert_eq!(differentiate(&[0.0, 1.0, 1.0], &[0.0; 3]), Err(Error::NonMonotone(2)));
    }

    #[test]
    fn unwrap_and_wrap() {
        let raw = [3.0, -3.0, -2.9];
        let u = unwrap_angles(&raw);
        assert!((u[1] - (2.0 * PI - 3.0)).abs() < 1e-12);
        assert!(u.windows(2).all(|w| (w[1] - w[0]).abs() < PI));
        for (w, r) in u.iter().zip(raw) {
            assert!((wrap_angle(*w) - r).abs() < 1e-12);
        }
        assert_eq!(wrap_angle(0.3), 0.3);
        assert_eq!(wrap_angle(PI), PI);
    }

    #[test]
    fn wind_from_north_blows_south() {
        let (n, e) = wind_components(5.0, 0.0, WindConvention::From);
        assert!((n + 5.0).abs() < 1e-12 && e.abs() < 1e-12);
        let (n, e) = wind_components(5.0, 90.0, WindConvention::To);
        assert!(n.abs() < 1e-12 && (e - 5.0).abs() < 1e-12);
    }

    #[test]
    fn align_averages_ten_hz_bins() {
        let ts: Vec<f64> = (0..50).map(|i| i as f64 / 10.0).collect();
        let ramp: Vec<f64> = (0..50).map(|i| i as f64).collect();
        let mut cols: Vec<(Quantity, Vec<f64>)> =
            Quantity::SAMPLE_FIELDS.iter().map(|&q| (q, vec![0.0; 50])).collect();
        cols[0].1 = ramp.clone();
        let ch = RawChannel::new(ChannelKind::KinematicState, ts, cols).unwrap();
        let meta = FlightMeta {
            flight_id: "a".into(),
            aircraft: AircraftKind::Matrice100,
            mass: 3.68,
        };
        let out = align_1hz(&[ch], &meta).unwrap();
        assert_eq!(out.len(), 5);
        for (k, s) in out.iter().enumerate() {
            assert_eq!(s.t, k as f64);
            let expect: f64 = ramp[k * 10..k * 10 + 10].iter().sum::<f64>() / 10.0;
            assert_eq!(s.v[0], expect);
        }
    }

    #[test]
    fn align_drops_gap_seconds() {
        let ts: Vec<f64> = vec![0.0, 1.0, 4.0, 5.0];
        let cols: Vec<(Quantity, Vec<f64>)> =
            Quantity::SAMPLE_FIELDS.iter().map(|&q| (q, vec![1.0; 4])).collect();
        let ch = RawChannel::new(ChannelKind::KinematicState, ts, cols).unwrap();
        let meta = FlightMeta {
            flight_id: "a".into(),
            aircraft: AircraftKind::Matrice100,
            mass: 1.0,
        };
        let out = align_1hz(&[ch], &meta).unwrap();
        let t: Vec<f64> = out.iter().map(|s| s.t).collect();
        assert_eq!(t, vec![0.0, 1.0, 4.0, 5.0]);
    }

    #[test]
    fn align_without_overlap_fails() {
        let a = RawChannel::new(ChannelKind::Wind, vec![0.0, 0.5], vec![]).unwrap();
        let b = RawChannel::new(ChannelKind::Battery, vec![2.0, 3.0], vec![]).unwrap();
        let meta = FlightMeta {
            flight_id: "a".into(),
            aircraft: AircraftKind::Unknown,
            mass: 1.0,
        };
        assert_eq!(align_1hz(&[a, b], &meta), Err(Error::NoCommonSpan));
    }

    #[test]
    fn align_is_idempotent_on_aligned_samples() {
        let samples: Vec<FlightSample> = (0..6).map(|k| sample(k as f64, 100.0 + k as f64)).collect();
        let ch = samples_to_channel(&samples).unwrap();
        let meta = FlightMeta {
            flight_id: "f".into(),
            aircraft: AircraftKind::Matrice100,
            mass: 3.68,
        };
        assert_eq!(align_1hz(&[ch], &meta).unwrap(), samples);
    }

    #[test]
    fn power_floor_examples() {
        let s: Vec<FlightSample> = [5.0, 25.0, 19.9, 300.0]
            .iter()
            .enumerate()
            .map(|(i, &p)| sample(i as f64, p))
            .collect();
        let out = apply_power_floor(s, 20.0);
        let p: Vec<f64> = out.samples.iter().map(|s| s.power).collect();
        assert_eq!(p, vec![25.0, 300.0]);
        assert_eq!(out.removed, 2);

        let idle: Vec<FlightSample> = (0..4).map(|i| sample(i as f64, 3.0)).collect();
        let out = apply_power_floor(idle, 20.0);
        assert!(out.samples.is_empty());
        assert_eq!(out.removed, 4);
    }

    #[test]
    fn feature_matrix_rows() {
        let mut hover = sample(0.0, 300.0);
        hover.v = [0.0; 3];
        hover.a = [0.0; 3];
        hover.euler = [0.0; 3];
        hover.wind = [0.0; 2];
        let samples = vec![hover, sample(1.0, 310.0), sample(2.0, 320.0)];
        let (x, y) = to_feature_matrix(&samples).unwrap();
        assert_eq!(x.rows(), 3);
        assert_eq!(y.len(), 3);
        let mut expect = [0.0; 15];
        expect[0] = 3.68;
        assert_eq!(x.as_matrix().row(0), &expect);
        let r = x.as_matrix().row(1);
        assert_eq!((r[0], r[3], r[6], r[9], r[14]), (3.68, 3.0, 0.3, 0.03, -0.5));

        let mut bad = sample(0.0, 1.0);
        bad.a[2] = f64::INFINITY;
        assert_eq!(
            to_feature_matrix(&[sample(0.0, 1.0), bad]).unwrap_err(),
            Error::NonFinite { index: 1, field: "a_d" }
        );
    }

    #[test]
    fn correlation_properties() {
        let samples: Vec<FlightSample> = (0..20)
            .map(|i| {
                let mut s = sample(i as f64, 0.0);
                let f = i as f64;
                s.v = [f, -f, (f * 0.7).sin()];
                s.a = [(f * 1.3).cos(), f * f, 0.5 * f];
                s.euler = [(f * 0.2).sin(), (f * 0.9).cos(), f.sqrt()];
                s.euler_rate = [f % 3.0, f % 5.0, f % 7.0];
                s.wind = [(f * 0.4).sin(), (f * 0.3).cos()];
                s.power = 400.0 - 10.0 * s.a[2];
                s
            })
            .collect();
        let (x, y) = to_feature_matrix(&samples).unwrap();
        let c = correlation_heatmap(&x, &y).unwrap();
        assert_eq!(c.len(), 16);
        // mass is constant
        assert!(c[0].iter().all(Option::is_none));
        assert_eq!(c[1][1], Some(1.0));
        assert!((c[1][2].unwrap() + 1.0).abs() < 1e-12);
        assert!((c[6][15].unwrap() + 1.0).abs() < 1e-12);
        for i in 1..16 {
            for j in 1..16 {
                let v = c[i][j].unwrap();
                assert_eq!(Some(v), c[j][i]);
                assert!((-1.0..=1.0).contains(&v));
            }
        }
    }
}
