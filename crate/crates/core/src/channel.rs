//! Raw multi-rate sensor channels as they come out of a flight log.

use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

use crate::aircraft::AircraftKind;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChannelKind {
    GpsPosition,
    Imu,
    Wind,
    Battery,
    KinematicState,
}

impl ChannelKind {
    pub const ALL: [ChannelKind; 5] = [
        ChannelKind::GpsPosition,
        ChannelKind::Imu,
        ChannelKind::Wind,
        ChannelKind::Battery,
        ChannelKind::KinematicState,
    ];

    pub fn tag(self) -> &'static str {
        match self {
            ChannelKind::GpsPosition => "gps_position",
            ChannelKind::Imu => "imu",
            ChannelKind::Wind => "wind",
            ChannelKind::Battery => "battery",
            ChannelKind::KinematicState => "kinematic_state",
        }
    }

    pub fn from_tag(tag: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.tag() == tag)
    }

    /// Nominal sensor output rate per aircraft type.
    pub fn nominal_rate_hz(self, aircraft: AircraftKind) -> Option<f64> {
        match (aircraft, self) {
            (AircraftKind::MavicPro | AircraftKind::Inspire, ChannelKind::Imu) => Some(200.0),
            (AircraftKind::MavicPro | AircraftKind::Inspire, ChannelKind::GpsPosition) => Some(5.0),
            (AircraftKind::MavicPro | AircraftKind::Inspire, ChannelKind::Wind) => Some(5.0),
            (AircraftKind::MavicPro | AircraftKind::Inspire, ChannelKind::Battery) => Some(1.0),
            (AircraftKind::Matrice100, ChannelKind::KinematicState) => Some(10.0),
            (AircraftKind::Matrice100, ChannelKind::Wind) => Some(10.0),
            (AircraftKind::Matrice100, ChannelKind::Battery) => Some(5.0),
            _ => None,
        }
    }
}

/// Physical quantity carried by one channel column. Angles are in rad,
/// except latitude/longitude and wind direction which are in degrees.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Quantity {
    Lat,
    Lon,
    Alt,
    PosN,
    PosE,
    PosD,
    VelN,
    VelE,
    VelD,
    AccN,
    AccE,
    AccD,
    Roll,
    Pitch,
    Yaw,
    RollRate,
    PitchRate,
    YawRate,
    WindSpeed,
    WindDir,
    WindN,
    WindE,
    Voltage,
    Current,
    Power,
}

impl Quantity {
    pub const ALL: [Quantity; 25] = [
        Quantity::Lat,
        Quantity::Lon,
        Quantity::Alt,
        Quantity::PosN,
        Quantity::PosE,
        Quantity::PosD,
        Quantity::VelN,
        Quantity::VelE,
        Quantity::VelD,
        Quantity::AccN,
        Quantity::AccE,
        Quantity::AccD,
        Quantity::Roll,
        Quantity::Pitch,
        Quantity::Yaw,
        Quantity::RollRate,
        Quantity::PitchRate,
        Quantity::YawRate,
        Quantity::WindSpeed,
        Quantity::WindDir,
        Quantity::WindN,
        Quantity::WindE,
        Quantity::Voltage,
        Quantity::Current,
        Quantity::Power,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Quantity::Lat => "lat",
            Quantity::Lon => "lon",
            Quantity::Alt => "alt",
            Quantity::PosN => "pos_n",
            Quantity::PosE => "pos_e",
            Quantity::PosD => "pos_d",
            Quantity::VelN => "v_n",
            Quantity::VelE => "v_e",
            Quantity::VelD => "v_d",
            Quantity::AccN => "a_n",
            Quantity::AccE => "a_e",
            Quantity::AccD => "a_d",
            Quantity::Roll => "roll",
            Quantity::Pitch => "pitch",
            Quantity::Yaw => "yaw",
            Quantity::RollRate => "roll_rate",
            Quantity::PitchRate => "pitch_rate",
            Quantity::YawRate => "yaw_rate",
            Quantity::WindSpeed => "wind_speed",
            Quantity::WindDir => "wind_dir",
            Quantity::WindN => "w_n",
            Quantity::WindE => "w_e",
            Quantity::Voltage => "voltage",
            Quantity::Current => "current",
            Quantity::Power => "power",
        }
    }

    pub fn is_euler_angle(self) -> bool {
        matches!(self, Quantity::Roll | Quantity::Pitch | Quantity::Yaw)
    }

    /// The per-second quantities of a flight sample: the features after
    /// mass, in feature order, followed by power.
    pub const SAMPLE_FIELDS: [Quantity; 15] = [
        Quantity::VelN,
        Quantity::VelE,
        Quantity::VelD,
        Quantity::AccN,
        Quantity::AccE,
        Quantity::AccD,
        Quantity::Roll,
        Quantity::Pitch,
        Quantity::Yaw,
        Quantity::RollRate,
        Quantity::PitchRate,
        Quantity::YawRate,
        Quantity::WindN,
        Quantity::WindE,
        Quantity::Power,
    ];
}

/// One sensor stream at its native rate. Values are stored per column.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RawChannel {
    pub kind: ChannelKind,
    pub rate_hz: f64,
    pub timestamps: Vec<f64>,
    pub columns: Vec<(Quantity, Vec<f64>)>,
}

impl RawChannel {
    /// Builds a channel, checking column lengths and non-decreasing time.
    /// The rate is estimated from the timestamps.
    pub fn new(kind: ChannelKind, timestamps: Vec<f64>, columns: Vec<(Quantity, Vec<f64>)>) -> Result<Self> {
        for (_, c) in &columns {
            if c.len() != timestamps.len() {
                return Err(Error::LengthMismatch {
                    left: c.len(),
                    right: timestamps.len(),
                });
            }
        }
        if let Some(i) = timestamps.windows(2).position(|w| !(w[1] >= w[0])) {
            return Err(Error::NonMonotone(i + 1));
        }
        let rate_hz = estimate_rate(&timestamps);
        Ok(Self {
            kind,
            rate_hz,
            timestamps,
            columns,
        })
    }

    pub fn len(&self) -> usize {
        self.timestamps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.timestamps.is_empty()
    }

    pub fn column(&self, q: Quantity) -> Option<&[f64]> {
        self.columns.iter().find(|(k, _)| *k == q).map(|(_, v)| v.as_slice())
    }

    pub fn has(&self, q: Quantity) -> bool {
        self.columns.iter().any(|(k, _)| *k == q)
    }

    pub fn set_column(&mut self, q: Quantity, values: Vec<f64>) {
        match self.columns.iter_mut().find(|(k, _)| *k == q) {
            Some(slot) => slot.1 = values,
            None => self.columns.push((q, values)),
        }
    }

    pub fn remove_column(&mut self, q: Quantity) -> Option<Vec<f64>> {
        let pos = self.columns.iter().position(|(k, _)| *k == q)?;
        Some(self.columns.remove(pos).1)
    }
}

/// Samples per second over the covered span; 0 for fewer than two samples.
pub fn estimate_rate(timestamps: &[f64]) -> f64 {
    match (timestamps.first(), timestamps.last()) {
        (Some(a), Some(b)) if timestamps.len() >= 2 && b > a => (timestamps.len() - 1) as f64 / (b - a),
        _ => 0.0,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn rate_from_timestamps() {
        let ts: Vec<f64> = (0..50).map(|i| i as f64 * 0.1).collect();
        let c = RawChannel::new(ChannelKind::KinematicState, ts, vec![]).unwrap();
        assert!((c.rate_hz - 10.0).abs() < 1e-9);
    }

    #[test]
    fn rejects_decreasing_time() {
        let err = RawChannel::new(ChannelKind::Wind, vec![0.0, 1.0, 0.5], vec![]).unwrap_err();
        assert_eq!(err, Error::NonMonotone(2));
    }

    #[test]
    fn nominal_rates() {
        assert_eq!(ChannelKind::Battery.nominal_rate_hz(AircraftKind::Matrice100), Some(5.0));
        assert_eq!(ChannelKind::Imu.nominal_rate_hz(AircraftKind::Inspire), Some(200.0));
        assert_eq!(ChannelKind::Imu.nominal_rate_hz(AircraftKind::Matrice100), None);
    }
}
