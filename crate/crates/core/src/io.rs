//! File formats: matrix JSON, dense CSV import and report tables.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lab::{DecayProfile, InvarianceReport};
use crate::lattice::{LatticeIndex, LatticeMatrix};

#[derive(Serialize, Deserialize)]
struct DiagonalRecord {
    offset: Vec<i64>,
    re: Vec<f64>,
    im: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct MatrixRecord {
    dim: usize,
    window: usize,
    diagonals: Vec<DiagonalRecord>,
}

fn record_of(a: &LatticeMatrix) -> Result<MatrixRecord> {
    let mut diagonals = Vec::with_capacity(a.num_diagonals());
    for (m, d) in a.diagonals() {
        if d.entries().iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidParameter(format!("diagonal {m} holds a non-finite entry")));
        }
        diagonals.push(DiagonalRecord {
            offset: m.coords().to_vec(),
            re: d.entries().iter().map(|z| z.re).collect(),
            im: d.entries().iter().map(|z| z.im).collect(),
        });
    }
    Ok(MatrixRecord { dim: a.dim(), window: a.half_width(), diagonals })
}

fn matrix_of(rec: MatrixRecord) -> Result<LatticeMatrix> {
    let mut diags = Vec::with_capacity(rec.diagonals.len());
    for d in rec.diagonals {
        if d.offset.len() != rec.dim {
            return Err(Error::Parse(format!("offset {:?} does not have {} coordinates", d.offset, rec.dim)));
        }
        if d.re.len() != d.im.len() {
            return Err(Error::Parse(format!("diagonal {:?}: re and im lengths differ", d.offset)));
        }
        let m = LatticeIndex::new(&d.offset)?;
        diags.push((m, d.re.into_iter().zip(d.im).map(|(re, im)| Complex64::new(re, im)).collect()));
    }
    LatticeMatrix::from_diagonals(rec.dim, rec.window, diags)
}

/// `{ "dim": d, "window": W, "diagonals": [{ "offset": [..], "re": [..], "im": [..] }] }`.
pub fn matrix_to_json(a: &LatticeMatrix) -> Result<String> {
    Ok(serde_json::to_string(&record_of(a)?)?)
}

pub fn matrix_from_json(s: &str) -> Result<LatticeMatrix> {
    matrix_of(serde_json::from_str(s)?)
}

pub fn write_matrix(path: &Path, a: &LatticeMatrix) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    serde_json::to_writer(&mut w, &record_of(a)?)?;
    w.flush()?;
    Ok(())
}

pub fn read_matrix(path: &Path) -> Result<LatticeMatrix> {
    matrix_of(serde_json::from_reader(BufReader::new(File::open(path)?))?)
}

/// Reads `row, col, re, im` triplets with lattice indices (d = 1). A header
/// line is skipped if present. Missing entries are zero; `W` defaults to the
/// largest index magnitude.
pub fn read_dense_csv(reader: impl Read, half: Option<usize>) -> Result<LatticeMatrix> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(reader);
    let mut triplets = Vec::new();
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| Error::Parse(e.to_string()))?;
        if rec.len() != 4 {
            return Err(Error::Parse(format!("record {}: expected 4 fields, got {}", line + 1, rec.len())));
        }
        let parsed = (rec[0].parse::<i64>(), rec[1].parse::<i64>(), rec[2].parse::<f64>(), rec[3].parse::<f64>());
        match parsed {
            (Ok(k), Ok(l), Ok(re), Ok(im)) => triplets.push((k, l, Complex64::new(re, im))),
            _ if line == 0 => continue,
            _ => return Err(Error::Parse(format!("record {}: cannot parse `{}`", line + 1, rec.iter().collect::<Vec<_>>().join(",")))),
        }
    }
    let extent = triplets.iter().map(|(k, l, _)| k.unsigned_abs().max(l.unsigned_abs())).max().unwrap_or(0) as usize;
    let half = half.unwrap_or(extent);
    if extent > half {
        return Err(Error::IndexOutOfRange { offset: format!("{extent}"), max: half });
    }
    let mut dense = nalgebra::DMatrix::<Complex64>::zeros(2 * half + 1, 2 * half + 1);
    for (k, l, z) in triplets {
        dense[((k + half as i64) as usize, (l + half as i64) as usize)] = z;
    }
    LatticeMatrix::from_dense(1, half, &dense)
}

pub fn read_dense_csv_file(path: &Path, half: Option<usize>) -> Result<LatticeMatrix> {
    read_dense_csv(BufReader::new(File::open(path)?), half)
}

/// Columns of the flat invariance report.
pub const REPORT_CSV_HEADER: [&str; 14] = [
    "seed",
    "kind",
    "r",
    "c",
    "lambda",
    "W",
    "exponent_B",
    "exponent_Binv",
    "residual_B",
    "residual_Binv",
    "super_polynomial_Binv",
    "norm",
    "value_B",
    "value_Binv",
];

/// Flat CSV with one row per `(model, W, norm)` cell.
pub fn write_report_csv(w: impl Write, reports: &[InvarianceReport]) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(REPORT_CSV_HEADER).map_err(csv_err)?;
    for rep in reports {
        for cell in &rep.cells {
            let common = [
                rep.model.seed.to_string(),
                rep.model.kind.to_string(),
                rep.model.r.to_string(),
                rep.model.c.to_string(),
                rep.lambda.to_string(),
                cell.half_width.to_string(),
                cell.profile_b.exponent.to_string(),
                cell.profile_b_inv.exponent.to_string(),
                cell.profile_b.loglog.residual.to_string(),
                cell.profile_b_inv.loglog.residual.to_string(),
                cell.profile_b_inv.super_polynomial.to_string(),
            ];
            if cell.norms.is_empty() {
                out.write_record(common.iter().map(String::as_str).chain(["", "", ""])).map_err(csv_err)?;
            }
            for n in &cell.norms {
                let tail = [n.norm.clone(), n.b.to_string(), n.b_inv.to_string()];
                out.write_record(common.iter().chain(tail.iter())).map_err(csv_err)?;
            }
        }
    }
    out.flush()?;
    Ok(())
}

pub const PLOT_CSV_HEADER: [&str; 4] = ["matrix", "W", "m", "d"];

/// Envelope rows `(matrix, W, m, d(m))`.
pub fn write_plot_csv(w: impl Write, profiles: &[(String, usize, &DecayProfile)]) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(PLOT_CSV_HEADER).map_err(csv_err)?;
    for (name, half, p) in profiles {
        for (m, d) in &p.envelope {
            out.write_record([name.clone(), half.to_string(), m.to_string(), d.to_string()]).map_err(csv_err)?;
        }
    }
    out.flush()?;
    Ok(())
}

pub const APPROX_CSV_HEADER: [&str; 4] = ["W", "spec", "N", "E"];

/// Approximation-error rows `(W, spec, N, E_N)`.
pub fn write_approx_csv(w: impl Write, half: usize, spec: &str, errors: &[f64]) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(APPROX_CSV_HEADER).map_err(csv_err)?;
    for (n, e) in errors.iter().enumerate() {
        out.write_record([half.to_string(), spec.to_string(), n.to_string(), e.to_string()]).map_err(csv_err)?;
    }
    out.flush()?;
    Ok(())
}

pub const MULTIPLIER_CSV_HEADER: [&str; 4] = ["m", "eps", "re", "im"];

/// Hypersingular multiplier rows `(m, eps, Re mu, Im mu)`.
pub fn write_multiplier_csv(w: impl Write, rows: &[(LatticeIndex, f64, f64)]) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(MULTIPLIER_CSV_HEADER).map_err(csv_err)?;
    for (m, eps, mu) in rows {
        out.write_record([m.to_string(), eps.to_string(), mu.to_string(), "0".to_string()]).map_err(csv_err)?;
    }
    out.flush()?;
    Ok(())
}

fn csv_err(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_round_trip_bit_exact() {
        let a = LatticeMatrix::from_fn(2, 2, |k, l| {
            let x = (k.coords()[0] * 7 - l.coords()[1] * 3) as f64;
            Complex64::new(x / 3.0, std::f64::consts::PI * x.sin() * 1e-300)
        })
        .unwrap();
        let back = matrix_from_json(&matrix_to_json(&a).unwrap()).unwrap();
        assert_eq!(back, a);
        for (m, d) in a.diagonals() {
            let e = back.diagonal(m).unwrap().entries();
            for (x, y) in d.entries().iter().zip(e) {
                assert_eq!(x.re.to_bits(), y.re.to_bits());
                assert_eq!(x.im.to_bits(), y.im.to_bits());
            }
        }
    }

    #[test]
    fn json_layout() {
        let a = LatticeMatrix::single_diagonal(1, 1, LatticeIndex::d1(1), Complex64::new(2.0, -1.0)).unwrap();
        let v: serde_json::Value = serde_json::from_str(&matrix_to_json(&a).unwrap()).unwrap();
        assert_eq!(v["dim"], 1);
        assert_eq!(v["window"], 1);
        assert_eq!(v["diagonals"][0]["offset"], serde_json::json!([1]));
        assert_eq!(v["diagonals"][0]["re"], serde_json::json!([2.0, 2.0]));
        assert_eq!(v["diagonals"][0]["im"], serde_json::json!([-1.0, -1.0]));
    }

    #[test]
    fn json_rejects_bad_input() {
        assert!(matrix_from_json(r#"{"dim":1,"window":1,"diagonals":[{"offset":[3],"re":[1],"im":[0]}]}"#).is_err());
        assert!(matrix_from_json(r#"{"dim":1,"window":1,"diagonals":[{"offset":[0],"re":[1,1],"im":[0,0]}]}"#).is_err());
        assert!(matrix_from_json(r#"{"dim":1,"window":1,"diagonals":[{"offset":[0,0],"re":[1,1,1],"im":[0,0,0]}]}"#).is_err());
        assert!(matrix_from_json("not json").is_err());
        let bad = LatticeMatrix::identity(1, 1).unwrap().scale(Complex64::new(f64::NAN, 0.0));
        assert!(matrix_to_json(&bad).is_err());
    }

    #[test]
    fn dense_csv_import() {
        let text = "row,col,re,im\n-1,-1,1,0\n0,0,2,0\n1,1,3,0.5\n1,0,4,0\n";
        let a = read_dense_csv(text.as_bytes(), None).unwrap();
        assert_eq!(a.half_width(), 1);
        assert_eq!(a.get(&LatticeIndex::d1(1), &LatticeIndex::d1(0)), Complex64::new(4.0, 0.0));
        assert_eq!(a.get(&LatticeIndex::d1(1), &LatticeIndex::d1(1)), Complex64::new(3.0, 0.5));
        assert_eq!(a.num_diagonals(), 2);
        let b = read_dense_csv(text.as_bytes(), Some(3)).unwrap();
        assert_eq!(b.half_width(), 3);
        assert!(read_dense_csv(text.as_bytes(), Some(0)).is_err());
        assert!(read_dense_csv("0,0,1\n".as_bytes(), None).is_err());
        assert!(read_dense_csv("0,0,1,0\nx,0,1,0\n".as_bytes(), None).is_err());
    }

    #[test]
    fn csv_headers() {
        let mut buf = Vec::new();
        write_report_csv(&mut buf, &[]).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap().trim_end(), REPORT_CSV_HEADER.join(","));
        let mut buf = Vec::new();
        write_multiplier_csv(&mut buf, &[(LatticeIndex::d2(1, -2), 0.5, -3.0)]).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "m,eps,re,im\n\"(1,-2)\",0.5,-3,0\n");
    }
}
