//! Aircraft type tags and the built-in aircraft table.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;
use serde::{Deserialize, Serialize};

use crate::error::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AircraftKind {
    MavicPro,
    Inspire,
    Matrice100,
    Unknown,
}

impl AircraftKind {
    pub const KNOWN: [AircraftKind; 3] = [AircraftKind::MavicPro, AircraftKind::Inspire, AircraftKind::Matrice100];

    pub fn tag(self) -> &'static str {
        match self {
            AircraftKind::MavicPro => "mavic_pro",
            AircraftKind::Inspire => "inspire",
            AircraftKind::Matrice100 => "matrice_100",
            AircraftKind::Unknown => "unknown",
        }
    }

    pub fn display_name(self) -> &'static str {
        match self {
            AircraftKind::MavicPro => "Mavic Pro",
            AircraftKind::Inspire => "Inspire",
            AircraftKind::Matrice100 => "Matrice 100",
            AircraftKind::Unknown => "Unknown",
        }
    }

    pub fn spec(self) -> Option<AircraftSpec> {
        builtin_aircraft().into_iter().find(|s| s.kind == self)
    }
}

impl fmt::Display for AircraftKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for AircraftKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let norm: String = s
            .chars()
            .filter(|c| c.is_ascii_alphanumeric())
            .map(|c| c.to_ascii_lowercase())
            .collect();
        match norm.as_str() {
            "mavicpro" | "djimavicpro" | "mavic" => Ok(AircraftKind::MavicPro),
            "inspire" | "djiinspire" => Ok(AircraftKind::Inspire),
            "matrice100" | "djimatrice100" | "m100" => Ok(AircraftKind::Matrice100),
            "unknown" | "" => Ok(AircraftKind::Unknown),
            _ => Err(Error::InvalidParameter(alloc::format!("unknown aircraft type `{s}`"))),
        }
    }
}

/// Manufacturer figures for one aircraft type.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AircraftSpec {
    pub kind: AircraftKind,
    pub name: String,
    pub empty_weight_g: f64,
    /// Selectable payloads; `[0]` for aircraft without a payload option.
    pub payload_options_g: Vec<f64>,
    pub max_speed_mps: f64,
    pub max_ascent_mps: f64,
    pub max_descent_mps: f64,
    pub max_flight_time_min: f64,
}

impl AircraftSpec {
    /// Take-off mass in kg for a payload in grams.
    pub fn mass_kg(&self, payload_g: f64) -> f64 {
        (self.empty_weight_g + payload_g) / 1000.0
    }

    pub fn accepts_payload(&self, payload_g: f64) -> bool {
        self.payload_options_g.contains(&payload_g)
    }
}

/// The three supported aircraft types.
pub fn builtin_aircraft() -> Vec<AircraftSpec> {
    vec![
        AircraftSpec {
            kind: AircraftKind::MavicPro,
            name: "Mavic Pro".into(),
            empty_weight_g: 734.0,
            payload_options_g: vec![0.0],
            max_speed_mps: 18.0,
            max_ascent_mps: 5.0,
            max_descent_mps: 3.0,
            max_flight_time_min: 27.0,
        },
        AircraftSpec {
            kind: AircraftKind::Inspire,
            name: "Inspire".into(),
            empty_weight_g: 2845.0,
            payload_options_g: vec![0.0],
            max_speed_mps: 22.0,
            max_ascent_mps: 5.0,
            max_descent_mps: 4.0,
            max_flight_time_min: 18.0,
        },
        AircraftSpec {
            kind: AircraftKind::Matrice100,
            name: "Matrice 100".into(),
            empty_weight_g: 3680.0,
            payload_options_g: vec![0.0, 250.0, 500.0, 750.0],
            max_speed_mps: 22.0,
            max_ascent_mps: 5.0,
            max_descent_mps: 4.0,
            max_flight_time_min: 22.0,
        },
    ]
}

/// Looks a spec up by display name or tag, case- and punctuation-insensitive.
pub fn lookup(name: &str) -> Option<AircraftSpec> {
    let kind: AircraftKind = name.parse().ok()?;
    kind.spec()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_values() {
        let all = builtin_aircraft();
        assert_eq!(all.len(), 3);
        let mavic = lookup("Mavic Pro").unwrap();
        assert_eq!(mavic.empty_weight_g, 734.0);
        assert_eq!(mavic.max_speed_mps, 18.0);
        assert_eq!(mavic.max_flight_time_min, 27.0);
        let m100 = lookup("Matrice 100").unwrap();
        assert_eq!(m100.payload_options_g, vec![0.0, 250.0, 500.0, 750.0]);
        assert_eq!(lookup("Inspire").unwrap().empty_weight_g, 2845.0);
        for s in &all {
            assert!(s.empty_weight_g > 0.0 && s.max_speed_mps > 0.0);
            assert!(s.max_ascent_mps > 0.0 && s.max_descent_mps > 0.0);
            assert!(s.payload_options_g.iter().all(|&p| p >= 0.0));
        }
    }

    #[test]
    fn mass_from_payload() {
        let m100 = AircraftKind::Matrice100.spec().unwrap();
        assert!((m100.mass_kg(250.0) - 3.93).abs() < 1e-12);
        assert!(m100.accepts_payload(500.0));
        assert!(!m100.accepts_payload(100.0));
    }

    #[test]
    fn parse_names() {
        assert_eq!("matrice_100".parse::<AircraftKind>().unwrap(), AircraftKind::Matrice100);
        assert_eq!("DJI Mavic Pro".parse::<AircraftKind>().unwrap(), AircraftKind::MavicPro);
        assert!("phantom".parse::<AircraftKind>().is_err());
    }
}
