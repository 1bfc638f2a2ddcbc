//! Tabular 1 Hz dataset files.
//!
//! Comma-separated with one header row:
//!
//! `flight_id,aircraft,t,mass,v_n,v_e,v_d,a_n,a_e,a_d,roll,pitch,yaw,roll_rate,pitch_rate,yaw_rate,w_n,w_e,power`
//!
//! `aircraft` is an aircraft tag (`mavic_pro`, `inspire`, `matrice_100`,
//! `unknown`); `t` is seconds since flight start, `mass` kg, velocities m/s,
//! accelerations m/s², angles rad, rates rad/s, wind m/s (NED), power W.
//! Floats are written in shortest round-trip form, so a write/read cycle is
//! lossless.

use std::io::Write;
use std::path::Path;

use pcmkit_core::aircraft::AircraftKind;
use pcmkit_core::sample::{FEATURE_NAMES, N_FEATURES};
use pcmkit_core::{Dataset, FlightSample};

use crate::error::{Error, Result};

pub fn header() -> Vec<&'static str> {
    let mut h = vec!["flight_id", "aircraft", "t"];
    h.extend(FEATURE_NAMES);
    h.push("power");
    h
}

pub fn write_samples<W: Write>(out: W, samples: &[FlightSample]) -> std::io::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(header())?;
    let mut rec: Vec<String> = Vec::with_capacity(N_FEATURES + 4);
    for s in samples {
        rec.clear();
        rec.push(s.flight_id.clone());
        rec.push(s.aircraft.tag().into());
        rec.push(s.t.to_string());
        rec.extend(s.features().iter().map(f64::to_string));
        rec.push(s.power.to_string());
        w.write_record(&rec)?;
    }
    w.flush()
}

pub fn write_dataset_file(path: &Path, samples: &[FlightSample]) -> Result<()> {
    let f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let buf = std::io::BufWriter::new(f);
    write_samples(buf, samples).map_err(|e| Error::io(path, e))
}

pub fn read_samples(text: &[u8], path: &Path) -> Result<Vec<FlightSample>> {
    let mut r = csv::ReaderBuilder::new().has_headers(true).from_reader(text);
    let hdr = r.headers().map_err(|e| Error::format(path, e.to_string()))?.clone();
    let want = header();
    if hdr.len() != want.len() || hdr.iter().zip(&want).any(|(a, b)| a.trim() != *b) {
        let missing = want.iter().find(|w| !hdr.iter().any(|h| h.trim() == **w));
        let msg = match missing {
            Some(m) => format!("dataset header lacks column `{m}`"),
            None => format!("dataset header must be `{}`", want.join(",")),
        };
        return Err(Error::format(path, msg));
    }
    let mut out = Vec::new();
    let mut feats = [0.0; N_FEATURES];
    for (i, rec) in r.records().enumerate() {
        let line = i + 2;
        let rec = rec.map_err(|e| Error::parse(path, line, e.to_string()))?;
        let num = |j: usize| -> Result<f64> {
            let s = rec[j].trim();
            let v: f64 = s
                .parse()
                .map_err(|_| Error::parse(path, line, format!("cannot parse {} `{s}`", want[j])))?;
            if v.is_finite() {
                Ok(v)
            } else {
                Err(Error::parse(path, line, format!("non-finite {}", want[j])))
            }
        };
        let aircraft: AircraftKind = rec[1]
            .parse()
            .map_err(|_| Error::parse(path, line, format!("unknown aircraft `{}`", &rec[1])))?;
        let t = num(2)?;
        for (k, f) in feats.iter_mut().enumerate() {
            *f = num(3 + k)?;
        }
        let power = num(3 + N_FEATURES)?;
        out.push(FlightSample::from_features(t, &feats, power, rec[0].to_string(), aircraft)?);
    }
    if out.is_empty() {
        return Err(Error::format(path, "dataset has no rows"));
    }
    Ok(out)
}

pub fn read_dataset_file(path: &Path) -> Result<Vec<FlightSample>> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    read_samples(&bytes, path)
}

/// Reads a dataset file straight into a [`Dataset`].
pub fn load_dataset(path: &Path) -> Result<Dataset> {
    Ok(Dataset::from_samples(&read_dataset_file(path)?)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_is_lossless() {
        let s: Vec<FlightSample> = (0..5)
            .map(|i| {
                let f: Vec<f64> = (0..N_FEATURES).map(|k| (i * 7 + k) as f64 * 0.1 + 1.0 / 3.0).collect();
                FlightSample::from_features(i as f64, &f, 100.0 + 1e-13 * i as f64, "a,b", AircraftKind::Inspire)
                    .unwrap()
            })
            .collect();
        let mut buf = Vec::new();
        write_samples(&mut buf, &s).unwrap();
        assert_eq!(read_samples(&buf, Path::new("m")).unwrap(), s);
    }

    #[test]
    fn missing_column_named() {
        let text = "flight_id,aircraft,t\nx,inspire,0\n";
        let e = read_samples(text.as_bytes(), Path::new("d.csv")).unwrap_err().to_string();
        assert!(e.contains("`mass`"), "{e}");
    }
}
