//! Flight-log dialects.
//!
//! A log is a comma-separated text file made of a metadata header and one
//! section per sensor channel:
//!
//! ```text
//! # pcmkit-log 1
//! # schema = m100
//! # flight_id = f0001
//! # payload_g = 250
//! [kinematic_state rate=10]
//! t,v_n,v_e,v_d,roll,pitch,yaw
//! 0,0.1,0,0,0.01,0.02,1.5
//! ...
//! [battery rate=5]
//! t,voltage,current
//! 0,25.2,20.1
//! ```
//!
//! Metadata keys: `schema` (required: `mavic-pro`, `inspire` or `m100`),
//! `flight_id` (defaults to the file stem), `payload_g` (default 0, must be
//! one of the aircraft's payload options) and `aircraft` (defaults to the
//! schema's aircraft). A section header may declare `rate=<Hz>`; the rate
//! measured from the timestamps must then agree within 20%. Column names
//! are [`Quantity::name`] values plus the leading `t` (seconds).
//!
//! Column dictionary, mandatory columns first, optional ones in brackets:
//!
//! | schema | channel | columns |
//! |---|---|---|
//! | m100 | `kinematic_state` | v_n v_e v_d roll pitch yaw [a_n a_e a_d roll_rate pitch_rate yaw_rate pos_n pos_e pos_d] |
//! | m100 | `wind` | wind_speed wind_dir |
//! | m100 | `battery` | voltage current |
//! | mavic-pro, inspire | `gps_position` | lat lon alt [v_n v_e v_d] |
//! | mavic-pro, inspire | `imu` | roll pitch yaw [roll_rate pitch_rate yaw_rate] |
//! | mavic-pro, inspire | `wind` | wind_speed wind_dir |
//! | mavic-pro, inspire | `battery` | voltage current |
//!
//! Units: m/s, m/s², rad, rad/s, degrees for lat/lon and wind direction
//! (the bearing the wind blows from), m for altitude, V and A. Battery
//! power is `voltage * current`.

use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use pcmkit_core::aircraft::{AircraftKind, AircraftSpec};
use pcmkit_core::channel::{ChannelKind, Quantity, RawChannel};
use pcmkit_core::preprocess::FlightMeta;

use crate::error::{Error, Result};

pub const LOG_MAGIC: &str = "# pcmkit-log 1";
/// Allowed relative deviation between a declared and a measured rate.
pub const RATE_TOLERANCE: f64 = 0.2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Schema {
    MavicPro,
    Inspire,
    Matrice100,
}

struct ChannelDef {
    kind: ChannelKind,
    mandatory: &'static [Quantity],
    optional: &'static [Quantity],
}

use Quantity as Q;

const M100: &[ChannelDef] = &[
    ChannelDef {
        kind: ChannelKind::KinematicState,
        mandatory: &[Q::VelN, Q::VelE, Q::VelD, Q::Roll, Q::Pitch, Q::Yaw],
        optional: &[
            Q::AccN,
            Q::AccE,
            Q::AccD,
            Q::RollRate,
            Q::PitchRate,
            Q::YawRate,
            Q::PosN,
            Q::PosE,
            Q::PosD,
        ],
    },
    ChannelDef {
        kind: ChannelKind::Wind,
        mandatory: &[Q::WindSpeed, Q::WindDir],
        optional: &[],
    },
    ChannelDef {
        kind: ChannelKind::Battery,
        mandatory: &[Q::Voltage, Q::Current],
        optional: &[],
    },
];

const DJI_CONSUMER: &[ChannelDef] = &[
    ChannelDef {
        kind: ChannelKind::GpsPosition,
        mandatory: &[Q::Lat, Q::Lon, Q::Alt],
        optional: &[Q::VelN, Q::VelE, Q::VelD],
    },
    ChannelDef {
        kind: ChannelKind::Imu,
        mandatory: &[Q::Roll, Q::Pitch, Q::Yaw],
        optional: &[Q::RollRate, Q::PitchRate, Q::YawRate],
    },
    ChannelDef {
        kind: ChannelKind::Wind,
        mandatory: &[Q::WindSpeed, Q::WindDir],
        optional: &[],
    },
    ChannelDef {
        kind: ChannelKind::Battery,
        mandatory: &[Q::Voltage, Q::Current],
        optional: &[],
    },
];

impl Schema {
    pub const ALL: [Schema; 3] = [Schema::MavicPro, Schema::Inspire, Schema::Matrice100];

    pub fn tag(self) -> &'static str {
        match self {
            Schema::MavicPro => "mavic-pro",
            Schema::Inspire => "inspire",
            Schema::Matrice100 => "m100",
        }
    }

    pub fn aircraft(self) -> AircraftKind {
        match self {
            Schema::MavicPro => AircraftKind::MavicPro,
            Schema::Inspire => AircraftKind::Inspire,
            Schema::Matrice100 => AircraftKind::Matrice100,
        }
    }

    fn channels(self) -> &'static [ChannelDef] {
        match self {
            Schema::Matrice100 => M100,
            Schema::MavicPro | Schema::Inspire => DJI_CONSUMER,
        }
    }

    fn def(self, kind: ChannelKind) -> Option<&'static ChannelDef> {
        self.channels().iter().find(|d| d.kind == kind)
    }
}

impl FromStr for Schema {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "mavic-pro" | "mavic" | "mavic_pro" => Ok(Schema::MavicPro),
            "inspire" => Ok(Schema::Inspire),
            "m100" | "matrice-100" | "matrice100" | "matrice_100" => Ok(Schema::Matrice100),
            other => Err(Error::Usage(format!(
                "unknown log schema `{other}` (expected mavic-pro, inspire or m100)"
            ))),
        }
    }
}

impl std::fmt::Display for Schema {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.tag())
    }
}

/// A parsed log: flight identity, aircraft and its channels in file order.
#[derive(Debug, Clone, PartialEq)]
pub struct FlightLog {
    pub schema: Schema,
    pub flight_id: String,
    pub aircraft: AircraftSpec,
    pub payload_g: f64,
    pub channels: Vec<RawChannel>,
}

impl FlightLog {
    pub fn meta(&self) -> FlightMeta {
        FlightMeta {
            flight_id: self.flight_id.clone(),
            aircraft: self.aircraft.kind,
            mass: self.aircraft.mass_kg(self.payload_g),
        }
    }
}

fn parse_f64(path: &Path, line: usize, s: &str, what: &str) -> Result<f64> {
    let v: f64 = s
        .trim()
        .parse()
        .map_err(|_| Error::parse(path, line, format!("cannot parse {what} `{}`", s.trim())))?;
    if !v.is_finite() {
        return Err(Error::parse(path, line, format!("non-finite {what}")));
    }
    Ok(v)
}

struct Section {
    kind: ChannelKind,
    declared_rate: Option<f64>,
    header_line: usize,
    columns: Vec<Quantity>,
    first_row_line: usize,
    rows: Vec<(usize, Vec<f64>)>,
}

fn parse_section_header(path: &Path, line: usize, s: &str) -> Result<(ChannelKind, Option<f64>)> {
    let inner = s
        .strip_prefix('[')
        .and_then(|r| r.strip_suffix(']'))
        .ok_or_else(|| Error::parse(path, line, "malformed section header"))?;
    let mut parts = inner.split_whitespace();
    let name = parts.next().unwrap_or("");
    let kind =
        ChannelKind::from_tag(name).ok_or_else(|| Error::parse(path, line, format!("unknown channel `{name}`")))?;
    let mut rate = None;
    for p in parts {
        match p.split_once('=') {
            Some(("rate", v)) => {
                let r = parse_f64(path, line, v, "rate")?;
                if r <= 0.0 {
                    return Err(Error::parse(path, line, "rate must be positive"));
                }
                rate = Some(r);
            }
            _ => return Err(Error::parse(path, line, format!("unknown section attribute `{p}`"))),
        }
    }
    Ok((kind, rate))
}

/// Parses a log from text; `path` is used for messages and the default
/// flight id. `expected` rejects logs declaring another schema.
pub fn parse_log_str(text: &str, path: &Path, expected: Option<Schema>) -> Result<FlightLog> {
    if text.trim().is_empty() {
        return Err(Error::format(path, "empty log file"));
    }
    let mut meta: Vec<(String, String, usize)> = Vec::new();
    let mut sections: Vec<Section> = Vec::new();
    let mut saw_magic = false;
    for (i, raw) in text.lines().enumerate() {
        let ln = i + 1;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('#') {
            if sections.is_empty() {
                if line == LOG_MAGIC {
                    saw_magic = true;
                } else if let Some((k, v)) = rest.split_once('=') {
                    meta.push((k.trim().to_string(), v.trim().to_string(), ln));
                }
            }
            continue;
        }
        if line.starts_with('[') {
            let (kind, declared_rate) = parse_section_header(path, ln, line)?;
            if sections.iter().any(|s| s.kind == kind) {
                return Err(Error::parse(path, ln, format!("duplicate channel `{}`", kind.tag())));
            }
            sections.push(Section {
                kind,
                declared_rate,
                header_line: ln,
                columns: Vec::new(),
                first_row_line: 0,
                rows: Vec::new(),
            });
            continue;
        }
        let sec = sections
            .last_mut()
            .ok_or_else(|| Error::parse(path, ln, "data before the first channel section"))?;
        let fields: Vec<&str> = line.split(',').collect();
        if sec.first_row_line == 0 {
            sec.first_row_line = ln;
            if fields.first().map(|f| f.trim()) != Some("t") {
                return Err(Error::parse(path, ln, "column header must start with `t`"));
            }
            for f in &fields[1..] {
                let name = f.trim();
                let q = Quantity::ALL
                    .into_iter()
                    .find(|q| q.name() == name)
                    .ok_or_else(|| Error::parse(path, ln, format!("unknown column `{name}`")))?;
                if sec.columns.contains(&q) {
                    return Err(Error::parse(path, ln, format!("duplicate column `{name}`")));
                }
                sec.columns.push(q);
            }
            continue;
        }
        if fields.len() != sec.columns.len() + 1 {
            return Err(Error::parse(
                path,
                ln,
                format!("expected {} fields, found {}", sec.columns.len() + 1, fields.len()),
            ));
        }
        let mut vals = Vec::with_capacity(fields.len());
        for (j, f) in fields.iter().enumerate() {
            let what = if j == 0 { "t" } else { sec.columns[j - 1].name() };
            vals.push(parse_f64(path, ln, f, what)?);
        }
        sec.rows.push((ln, vals));
    }
    if !saw_magic {
        return Err(Error::format(path, format!("missing `{LOG_MAGIC}` header line")));
    }

    let get = |key: &str| meta.iter().find(|(k, _, _)| k == key);
    for (k, _, ln) in &meta {
        if !["schema", "flight_id", "payload_g", "aircraft"].contains(&k.as_str()) {
            return Err(Error::parse(path, *ln, format!("unknown metadata key `{k}`")));
        }
    }
    let schema: Schema = match get("schema") {
        Some((_, v, _)) => v.parse().map_err(|e: Error| Error::format(path, e.to_string()))?,
        None => return Err(Error::format(path, "log declares no schema")),
    };
    if let Some(want) = expected {
        if want != schema {
            return Err(Error::format(path, format!("log schema is `{schema}`, expected `{want}`")));
        }
    }
    let kind = match get("aircraft") {
        Some((_, v, ln)) => v
            .parse::<AircraftKind>()
            .ok()
            .filter(|k| k.spec().is_some())
            .ok_or_else(|| Error::parse(path, *ln, format!("unknown aircraft `{v}`")))?,
        None => schema.aircraft(),
    };
    let aircraft = kind.spec().expect("known aircraft have specs");
    let payload_g = match get("payload_g") {
        Some((_, v, ln)) => parse_f64(path, *ln, v, "payload_g")?,
        None => 0.0,
    };
    if !aircraft.accepts_payload(payload_g) {
        return Err(Error::format(
            path,
            format!("payload {payload_g} g is not an option for {} ({:?})", aircraft.name, aircraft.payload_options_g),
        ));
    }
    let flight_id = match get("flight_id") {
        Some((_, v, _)) if !v.is_empty() => v.clone(),
        _ => path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "flight".into()),
    };

    let mut channels = Vec::new();
    for sec in &sections {
        let def = schema.def(sec.kind).ok_or_else(|| {
            Error::parse(
                path,
                sec.header_line,
                format!("channel `{}` is not part of schema `{schema}`", sec.kind.tag()),
            )
        })?;
        for q in &sec.columns {
            if !def.mandatory.contains(q) && !def.optional.contains(q) {
                return Err(Error::parse(
                    path,
                    sec.first_row_line,
                    format!("column `{}` not allowed in channel `{}`", q.name(), sec.kind.tag()),
                ));
            }
        }
        if let Some(q) = def.mandatory.iter().find(|q| !sec.columns.contains(q)) {
            return Err(Error::format(
                path,
                format!("channel `{}` is missing mandatory column `{}`", sec.kind.tag(), q.name()),
            ));
        }
        if sec.rows.is_empty() {
            return Err(Error::format(path, format!("channel `{}` has no rows", sec.kind.tag())));
        }
        if let Some(w) = sec.rows.windows(2).find(|w| w[1].1[0] < w[0].1[0]) {
            return Err(Error::parse(path, w[1].0, "timestamp decreases"));
        }
        let ts: Vec<f64> = sec.rows.iter().map(|r| r.1[0]).collect();
        let cols = sec
            .columns
            .iter()
            .enumerate()
            .map(|(j, &q)| (q, sec.rows.iter().map(|r| r.1[j + 1]).collect()))
            .collect();
        let mut ch = RawChannel::new(sec.kind, ts, cols)?;
        if let Some(r) = sec.declared_rate {
            if ch.len() >= 2 && (ch.rate_hz - r).abs() > RATE_TOLERANCE * r {
                return Err(Error::parse(
                    path,
                    sec.header_line,
                    format!(
                        "channel `{}` declares {r} Hz but its timestamps give {:.3} Hz",
                        sec.kind.tag(),
                        ch.rate_hz
                    ),
                ));
            }
            ch.rate_hz = r;
        }
        channels.push(ch);
    }
    if let Some(d) = schema.channels().iter().find(|d| !sections.iter().any(|s| s.kind == d.kind)) {
        return Err(Error::format(path, format!("missing channel `{}`", d.kind.tag())));
    }
    Ok(FlightLog {
        schema,
        flight_id,
        aircraft,
        payload_g,
        channels,
    })
}

pub fn parse_log(path: &Path, expected: Option<Schema>) -> Result<FlightLog> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_log_str(&text, path, expected)
}

/// Serializes a log in its dialect. Parsing the output gives back an equal
/// [`FlightLog`].
pub fn write_log(log: &FlightLog) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "{LOG_MAGIC}");
    let _ = writeln!(s, "# schema = {}", log.schema.tag());
    let _ = writeln!(s, "# flight_id = {}", log.flight_id);
    if log.aircraft.kind != log.schema.aircraft() {
        let _ = writeln!(s, "# aircraft = {}", log.aircraft.kind.tag());
    }
    let _ = writeln!(s, "# payload_g = {}", log.payload_g);
    for ch in &log.channels {
        let _ = writeln!(s, "[{} rate={}]", ch.kind.tag(), ch.rate_hz);
        s.push('t');
        for (q, _) in &ch.columns {
            s.push(',');
            s.push_str(q.name());
        }
        s.push('\n');
        for i in 0..ch.len() {
            let _ = write!(s, "{}", ch.timestamps[i]);
            for (_, v) in &ch.columns {
                let _ = write!(s, ",{}", v[i]);
            }
            s.push('\n');
        }
    }
    s
}

/// Power series of a battery channel in W.
pub fn battery_power(ch: &RawChannel) -> Option<Vec<f64>> {
    let v = ch.column(Quantity::Voltage)?;
    let c = ch.column(Quantity::Current)?;
    Some(v.iter().zip(c).map(|(v, c)| v * c).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    const M100_LOG: &str = "# pcmkit-log 1\n# schema = m100\n# flight_id = f1\n# payload_g = 250\n\
[kinematic_state rate=10]\nt,v_n,v_e,v_d,roll,pitch,yaw\n0,1,0,0,0,0,0\n0.1,1,0,0,0,0,0\n0.2,1,0,0,0,0,0\n\
[wind rate=10]\nt,wind_speed,wind_dir\n0,1,90\n0.1,1,90\n0.2,1,90\n\
[battery rate=5]\nt,voltage,current\n0,22.2,10.0\n0.2,22.2,10.0\n";

    #[test]
    fn parses_m100() {
        let log = parse_log_str(M100_LOG, Path::new("x.log"), None).unwrap();
        assert_eq!(log.schema, Schema::Matrice100);
        assert_eq!(log.channels.len(), 3);
        assert_eq!(log.channels[0].rate_hz, 10.0);
        assert_eq!(log.channels[2].rate_hz, 5.0);
        assert_eq!(battery_power(&log.channels[2]).unwrap(), vec![222.0, 222.0]);
        assert!((log.meta().mass - 3.93).abs() < 1e-12);
    }

    #[test]
    fn missing_column_named() {
        let bad = M100_LOG.replace("t,voltage,current\n0,22.2,10.0\n0.2,22.2,10.0", "t,voltage\n0,22.2\n0.2,22.2");
        let e = parse_log_str(&bad, Path::new("x.log"), None).unwrap_err().to_string();
        assert!(e.contains("`current`"), "{e}");
    }

    #[test]
    fn non_monotone_row_reported() {
        let bad = M100_LOG.replace("0.2,1,0,0,0,0,0", "0.05,1,0,0,0,0,0");
        match parse_log_str(&bad, Path::new("x.log"), None).unwrap_err() {
            Error::Parse { line, .. } => assert_eq!(line, 9),
            e => panic!("{e}"),
        }
    }

    #[test]
    fn rejects_empty_and_unknown_schema() {
        assert!(parse_log_str("", Path::new("e.log"), None).is_err());
        let bad = M100_LOG.replace("schema = m100", "schema = phantom");
        assert!(parse_log_str(&bad, Path::new("x.log"), None).is_err());
        assert!(parse_log_str(M100_LOG, Path::new("x.log"), Some(Schema::Inspire)).is_err());
    }

    #[test]
    fn declared_rate_checked() {
        let bad = M100_LOG.replace("[battery rate=5]", "[battery rate=1]");
        assert!(parse_log_str(&bad, Path::new("x.log"), None).is_err());
    }

    #[test]
    fn write_parse_round_trip() {
        let log = parse_log_str(M100_LOG, Path::new("x.log"), None).unwrap();
        let again = parse_log_str(&write_log(&log), Path::new("y.log"), None).unwrap();
        assert_eq!(log, again);
    }
}
