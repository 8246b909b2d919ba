//! CSV and JSON artifacts.
//!
//! Floats are written with 17 significant digits so every file round-trips bit for bit.
//! Tables carry a JSON sidecar next to them: `profile.csv` pairs with `profile.json`.

use crate::error::{Error, Result};
use crate::glevitan::Kernel2D;
use crate::medium::{PotentialGrid, ShearProfile};
use crate::spectrum::SpectrumData;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::ser::{Formatter, PrettyFormatter};
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> Error + '_ {
    move |source| Error::Io {
        path: path.display().to_string(),
        source,
    }
}

fn parse_err(path: &Path, message: impl ToString) -> Error {
    Error::Parse {
        path: path.display().to_string(),
        message: message.to_string(),
    }
}

/// Pretty JSON with every float in `%.16e` form and non-finite values as `null`.
struct ExactFormatter(PrettyFormatter<'static>);

impl Formatter for ExactFormatter {
    fn write_f64<W: ?Sized + Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        if value.is_finite() {
            write!(w, "{value:.16e}")
        } else {
            w.write_all(b"null")
        }
    }

    fn write_f32<W: ?Sized + Write>(&mut self, w: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(w, value as f64)
    }

    fn begin_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_array(w)
    }
    fn end_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array(w)
    }
    fn begin_array_value<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_array_value(w, first)
    }
    fn end_array_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array_value(w)
    }
    fn begin_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object(w)
    }
    fn end_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object(w)
    }
    fn begin_object_key<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_object_key(w, first)
    }
    fn end_object_key<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object_key(w)
    }
    fn begin_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object_value(w)
    }
    fn end_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object_value(w)
    }
}

/// Serializes `value` as exact pretty JSON.
pub fn to_json_string<T: Serialize + ?Sized>(value: &T) -> Result<String> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, ExactFormatter(PrettyFormatter::new()));
    value
        .serialize(&mut ser)
        .map_err(|e| Error::InvalidInput(format!("serialization failed: {e}")))?;
    buf.push(b'\n');
    Ok(String::from_utf8(buf).expect("JSON output is UTF-8"))
}

pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    std::fs::write(path, to_json_string(value)?).map_err(io_err(path))
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(io_err(path))?;
    serde_json::from_str(&text).map_err(|e| parse_err(path, e))
}

/// `data.csv` → `data.json`.
pub fn sidecar_path(csv: &Path) -> PathBuf {
    csv.with_extension("json")
}

fn write_csv(path: &Path, header: &[&str], rows: impl Iterator<Item = Vec<f64>>) -> Result<()> {
    let file = File::create(path).map_err(io_err(path))?;
    let mut w = csv::Writer::from_writer(BufWriter::new(file));
    let csv_err = |e: csv::Error| parse_err(path, e);
    w.write_record(header).map_err(csv_err)?;
    for row in rows {
        w.write_record(row.iter().map(|v| format!("{v:.16e}"))).map_err(csv_err)?;
    }
    w.flush().map_err(io_err(path))
}

/// Reads a numeric CSV; returns the header and the columns.
fn read_csv(path: &Path) -> Result<(Vec<String>, Vec<Vec<f64>>)> {
    let mut r = csv::Reader::from_path(path).map_err(|e| parse_err(path, e))?;
    let header: Vec<String> = r
        .headers()
        .map_err(|e| parse_err(path, e))?
        .iter()
        .map(|h| h.trim().to_string())
        .collect();
    let mut cols = vec![Vec::new(); header.len()];
    for (line, rec) in r.records().enumerate() {
        let rec = rec.map_err(|e| parse_err(path, e))?;
        for (c, field) in rec.iter().enumerate() {
            let v: f64 = field
                .trim()
                .parse()
                .map_err(|_| parse_err(path, format!("row {}: `{field}` is not a number", line + 2)))?;
            cols[c].push(v);
        }
    }
    Ok((header, cols))
}

fn column<'a>(path: &Path, header: &[String], cols: &'a [Vec<f64>], name: &str) -> Result<&'a [f64]> {
    header
        .iter()
        .position(|h| h == name)
        .map(|i| cols[i].as_slice())
        .ok_or_else(|| parse_err(path, format!("missing column `{name}`")))
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ProfileSidecar {
    mu_hat_tail: f64,
    x_support: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PotentialSidecar {
    h: f64,
    x_support: f64,
}

/// Writes `x,mu_hat` plus the `{mu_hat_tail, x_support}` sidecar.
pub fn write_profile(path: &Path, p: &ShearProfile) -> Result<()> {
    write_csv(
        path,
        &["x", "mu_hat"],
        p.grid_x.iter().zip(&p.mu_hat).map(|(x, m)| vec![*x, *m]),
    )?;
    write_json(
        &sidecar_path(path),
        &ProfileSidecar {
            mu_hat_tail: p.mu_hat_tail,
            x_support: p.x_support,
        },
    )
}

/// Reads a profile. A `z,mu_hat` header is taken as vertical coordinates (`x = −z`).
pub fn read_profile(path: &Path) -> Result<ShearProfile> {
    let side: ProfileSidecar = read_json(&sidecar_path(path))?;
    let (header, cols) = read_csv(path)?;
    let mu = column(path, &header, &cols, "mu_hat")?;
    if header.iter().any(|h| h == "z") {
        let z = column(path, &header, &cols, "z")?;
        ShearProfile::from_vertical(z, mu, side.mu_hat_tail, side.x_support)
    } else {
        let x = column(path, &header, &cols, "x")?;
        ShearProfile::new(x.to_vec(), mu.to_vec(), side.mu_hat_tail, side.x_support)
    }
}

/// Writes `x,v,v_prime` plus the `{h, x_support}` sidecar.
pub fn write_potential(path: &Path, p: &PotentialGrid, h: f64) -> Result<()> {
    write_csv(
        path,
        &["x", "v", "v_prime"],
        (0..p.grid_x.len()).map(|i| vec![p.grid_x[i], p.v[i], p.v_prime[i]]),
    )?;
    write_json(
        &sidecar_path(path),
        &PotentialSidecar {
            h,
            x_support: p.x_support,
        },
    )
}

/// Reads a potential and its Robin coefficient; `v_prime` is recomputed when absent.
pub fn read_potential(path: &Path) -> Result<(PotentialGrid, f64)> {
    let side: PotentialSidecar = read_json(&sidecar_path(path))?;
    let (header, cols) = read_csv(path)?;
    let x = column(path, &header, &cols, "x")?;
    let v = column(path, &header, &cols, "v")?;
    let mut pot = PotentialGrid::from_samples(x.to_vec(), v.to_vec(), side.x_support)?;
    if let Ok(vp) = column(path, &header, &cols, "v_prime") {
        pot.v_prime = vp.to_vec();
        pot.validate()?;
    }
    Ok((pot, side.h))
}

pub fn write_spectrum(path: &Path, s: &SpectrumData) -> Result<()> {
    write_json(path, s)
}

pub fn read_spectrum(path: &Path) -> Result<SpectrumData> {
    read_json(path)
}

/// Kernel dump as `x,y,value` triples over the lower triangle.
pub fn write_kernel(path: &Path, k: &Kernel2D) -> Result<()> {
    let rows = (0..k.len()).flat_map(|i| (0..=i).map(move |j| vec![k.grid_x[i], k.grid_x[j], k.get(i, j)]));
    write_csv(path, &["x", "y", "value"], rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::uniform_grid;

    #[test]
    fn floats_keep_seventeen_digits() {
        let s = to_json_string(&vec![0.1, 1.0 / 3.0, f64::NAN, 1e-300]).unwrap();
        let back: Vec<Option<f64>> = serde_json::from_str(&s).unwrap();
        assert_eq!(back, vec![Some(0.1), Some(1.0 / 3.0), None, Some(1e-300)]);
        assert!(s.contains("3.3333333333333331e-1"));
    }

    #[test]
    fn profile_round_trip_and_missing_field() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("profile.csv");
        let x = uniform_grid(11, 1.0);
        let mu: Vec<f64> = x.iter().map(|x| 1.0 + 0.1 * (1.0 - x)).collect();
        let p = ShearProfile::new(x, mu, 1.0, 1.0).unwrap();
        write_profile(&path, &p).unwrap();
        let q = read_profile(&path).unwrap();
        assert_eq!(p.mu_hat, q.mu_hat);
        assert_eq!(p.grid_x, q.grid_x);
        std::fs::write(sidecar_path(&path), r#"{"x_support": 1.0}"#).unwrap();
        match read_profile(&path) {
            Err(Error::Parse { message, .. }) => assert!(message.contains("mu_hat_tail"), "{message}"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn vertical_profiles_are_flipped() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("p.csv");
        std::fs::write(&path, "z,mu_hat\n0,3\n-0.25,2.5\n-0.5,2\n-0.75,2\n-1,2\n").unwrap();
        std::fs::write(sidecar_path(&path), r#"{"mu_hat_tail": 2.0, "x_support": 0.5}"#).unwrap();
        let p = read_profile(&path).unwrap();
        assert_eq!(p.grid_x, vec![0.0, 0.25, 0.5, 0.75, 1.0]);
        assert_eq!(p.mu_hat[0], 3.0);
    }

    #[test]
    fn potential_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("v.csv");
        let p = PotentialGrid::from_fn(21, 1.0, 0.5, |x| -x * x).unwrap();
        write_potential(&path, &p, -0.7).unwrap();
        let (q, h) = read_potential(&path).unwrap();
        assert_eq!(h, -0.7);
        assert_eq!(p.v, q.v);
        assert_eq!(p.v_prime, q.v_prime);
    }

    #[test]
    fn bad_numbers_name_the_row() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("v.csv");
        std::fs::write(&path, "x,v\n0,1\n0.5,oops\n").unwrap();
        std::fs::write(sidecar_path(&path), r#"{"h": 0.0, "x_support": 1.0}"#).unwrap();
        match read_potential(&path) {
            Err(Error::Parse { message, .. }) => assert!(message.contains("row 3")),
            other => panic!("{other:?}"),
        }
    }
}
