//! JSON and CSV files. Every float is written with 17 significant digits, which round-trips `f64`
//! exactly.

use std::fs;
use std::io::{self, Write};
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::ser::{Formatter, PrettyFormatter, Serializer};

use crate::covering::{CubeKind, Generation};
use crate::cubes::DoublingParams;
use crate::error::{Error, Result};
use crate::mainlemma::MainParams;
use crate::measure::DiscreteMeasure;
use crate::scalar::Scalar;
use crate::spaces::SampledFunction;

/// `x` with 17 significant digits; non-finite values become `null` in JSON and `NaN`/`inf` in CSV.
pub fn fmt17(x: f64) -> String {
    if x == 0.0 {
        // Keeps the sign of -0.0 out of the files.
        return "0.0000000000000000e0".to_string();
    }
    format!("{x:.16e}")
}

/// Pretty JSON whose floats carry 17 significant digits.
struct Digits17<'a>(PrettyFormatter<'a>);

impl Formatter for Digits17<'_> {
    fn write_f64<W: ?Sized + Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        if value.is_finite() {
            w.write_all(fmt17(value).as_bytes())
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
    fn begin_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object_value(w)
    }
    fn end_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object_value(w)
    }
}

pub fn to_json<S: Serialize>(value: &S) -> Result<String> {
    let mut buf = Vec::new();
    let mut ser = Serializer::with_formatter(&mut buf, Digits17(PrettyFormatter::new()));
    value.serialize(&mut ser).map_err(|e| Error::Schema(e.to_string()))?;
    buf.push(b'\n');
    String::from_utf8(buf).map_err(|e| Error::Schema(e.to_string()))
}

pub fn write_json<S: Serialize>(path: &Path, value: &S) -> Result<()> {
    let text = to_json(value)?;
    fs::write(path, text).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

pub fn read_json<D: DeserializeOwned>(path: &Path) -> Result<D> {
    let text = fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Error::Schema(format!("{}: {e}", path.display())))
}

/// On-disk measure.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeasureFile {
    pub dim: usize,
    pub n: f64,
    pub points: Vec<Vec<f64>>,
    pub weights: Vec<f64>,
}

impl MeasureFile {
    pub fn from_measure<T: Scalar>(mu: &DiscreteMeasure<T>) -> Self {
        Self {
            dim: mu.dim(),
            n: mu.growth_exponent().as_f64(),
            points: mu.points().iter().map(|p| p.iter().map(|x| x.as_f64()).collect()).collect(),
            weights: mu.weights().iter().map(|w| w.as_f64()).collect(),
        }
    }

    /// Validates through [`DiscreteMeasure::new`]; any rejection is a schema error.
    pub fn to_measure<T: Scalar>(&self) -> Result<DiscreteMeasure<T>> {
        let points = self.points.iter().map(|p| p.iter().map(|&x| T::lit(x)).collect()).collect();
        let weights = self.weights.iter().map(|&w| T::lit(w)).collect();
        DiscreteMeasure::new(self.dim, T::lit(self.n), points, weights).map_err(|e| Error::Schema(e.to_string()))
    }
}

/// On-disk function, aligned with the atoms of its measure file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FunctionFile {
    pub values: Vec<f64>,
}

pub fn load_measure<T: Scalar>(path: &Path) -> Result<DiscreteMeasure<T>> {
    read_json::<MeasureFile>(path)?.to_measure()
}

pub fn save_measure<T: Scalar>(path: &Path, mu: &DiscreteMeasure<T>) -> Result<()> {
    write_json(path, &MeasureFile::from_measure(mu))
}

/// Loads values and checks them against `mu`.
pub fn load_function<T: Scalar>(path: &Path, mu: &DiscreteMeasure<T>) -> Result<SampledFunction<T>> {
    let file: FunctionFile = read_json(path)?;
    SampledFunction::new(mu, file.values.iter().map(|&v| T::lit(v)).collect()).map_err(|e| Error::Schema(e.to_string()))
}

pub fn save_function<T: Scalar>(path: &Path, f: &SampledFunction<T>) -> Result<()> {
    write_json(path, &FunctionFile { values: f.values.iter().map(|v| v.as_f64()).collect() })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerationCubeRecord {
    pub center: Vec<f64>,
    pub side: f64,
    pub kind: String,
    pub delta_to_2r0: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerationRecordFile {
    pub m: usize,
    pub cubes: Vec<GenerationCubeRecord>,
}

pub fn generation_record<T: Scalar>(g: &Generation<T>) -> GenerationRecordFile {
    GenerationRecordFile {
        m: g.m,
        cubes: g
            .cubes
            .iter()
            .map(|c| GenerationCubeRecord {
                center: c.cube.center.iter().map(|x| x.as_f64()).collect(),
                side: c.cube.side.as_f64(),
                kind: match c.kind {
                    CubeKind::Volume => "volume".into(),
                    CubeKind::Point => "point".into(),
                },
                delta_to_2r0: c.delta.as_f64(),
            })
            .collect(),
    }
}

/// Overrides for the main-lemma parameters; absent fields keep the derived value.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsFile {
    pub a: Option<f64>,
    pub alpha1: Option<f64>,
    pub alpha2: Option<f64>,
    pub alpha3: Option<f64>,
    pub sigma: Option<f64>,
    pub eps3: Option<f64>,
    pub cap_const: Option<f64>,
    pub doubling_alpha: Option<f64>,
    pub doubling_beta: Option<f64>,
    pub checked: Option<bool>,
}

impl ParamsFile {
    pub fn apply<T: Scalar>(&self, p: &MainParams<T>) -> MainParams<T> {
        let pick = |o: Option<f64>, v: T| o.map_or(v, T::lit);
        MainParams {
            a: pick(self.a, p.a),
            alpha1: pick(self.alpha1, p.alpha1),
            alpha2: pick(self.alpha2, p.alpha2),
            alpha3: pick(self.alpha3, p.alpha3),
            sigma: pick(self.sigma, p.sigma),
            eps3: pick(self.eps3, p.eps3),
            cap_const: pick(self.cap_const, p.cap_const),
            doubling: DoublingParams {
                alpha: pick(self.doubling_alpha, p.doubling.alpha),
                beta: pick(self.doubling_beta, p.doubling.beta),
            },
            checked: self.checked.unwrap_or(p.checked),
        }
    }

    /// Every field set from `p`.
    pub fn from_params<T: Scalar>(p: &MainParams<T>) -> Self {
        Self {
            a: Some(p.a.as_f64()),
            alpha1: Some(p.alpha1.as_f64()),
            alpha2: Some(p.alpha2.as_f64()),
            alpha3: Some(p.alpha3.as_f64()),
            sigma: Some(p.sigma.as_f64()),
            eps3: Some(p.eps3.as_f64()),
            cap_const: Some(p.cap_const.as_f64()),
            doubling_alpha: Some(p.doubling.alpha.as_f64()),
            doubling_beta: Some(p.doubling.beta.as_f64()),
            checked: Some(p.checked),
        }
    }
}

/// Writes a header and rows of 17-digit numbers.
pub fn write_csv(path: &Path, header: &[&str], rows: impl IntoIterator<Item = Vec<f64>>) -> Result<()> {
    let io_err = |e: csv::Error| Error::Io(format!("{}: {e}", path.display()));
    let mut w = csv::Writer::from_path(path).map_err(io_err)?;
    w.write_record(header).map_err(io_err)?;
    for r in rows {
        w.write_record(r.iter().map(|&v| fmt17(v))).map_err(io_err)?;
    }
    w.flush().map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

/// Reads a file written by [`write_csv`].
pub fn read_csv(path: &Path) -> Result<(Vec<String>, Vec<Vec<f64>>)> {
    let mut r = csv::Reader::from_path(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    let header = r.headers().map_err(|e| Error::Schema(e.to_string()))?.iter().map(String::from).collect();
    let mut rows = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(|e| Error::Schema(e.to_string()))?;
        let row = rec
            .iter()
            .map(|s| s.parse::<f64>().map_err(|e| Error::Schema(format!("{s}: {e}"))))
            .collect::<Result<Vec<f64>>>()?;
        rows.push(row);
    }
    Ok((header, rows))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_digits_round_trip() {
        for x in [0.1, 1.0 / 3.0, -2.5e-300, 123456789.12345679, f64::MAX, f64::MIN_POSITIVE] {
            let s = fmt17(x);
            assert_eq!(s.parse::<f64>().unwrap(), x);
            let mant = s.split('e').next().unwrap().replace(['-', '.'], "");
            assert_eq!(mant.len(), 17, "{s}");
        }
        assert_eq!(fmt17(-0.0), fmt17(0.0));
    }

    #[test]
    fn json_uses_digit_formatter() {
        let f = FunctionFile { values: vec![0.1, f64::NAN] };
        let s = to_json(&f).unwrap();
        assert!(s.contains("1.0000000000000001e-1"), "{s}");
        assert!(s.contains("null"));
    }

    #[test]
    fn measure_round_trip_is_exact() {
        let mu = DiscreteMeasure::new(2, 1.5, vec![vec![0.1, 1.0 / 3.0], vec![-7.0, 2e-12]], vec![0.7, 1e-9]).unwrap();
        let text = to_json(&MeasureFile::from_measure(&mu)).unwrap();
        let back: MeasureFile = serde_json::from_str(&text).unwrap();
        assert_eq!(back.to_measure::<f64>().unwrap(), mu);
    }

    #[test]
    fn schema_errors_are_reported() {
        let bad = MeasureFile { dim: 1, n: 1.0, points: vec![vec![0.0], vec![0.0]], weights: vec![1.0, 1.0] };
        assert!(matches!(bad.to_measure::<f64>(), Err(Error::Schema(_))));
        assert!(serde_json::from_str::<MeasureFile>(r#"{"dim":1}"#).is_err());
    }

    #[test]
    fn csv_round_trip_is_exact() {
        let dir = std::env::temp_dir().join(format!("czkit-io-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("t.csv");
        let rows = vec![vec![0.1, -1.0 / 3.0], vec![1e-300, 7.0]];
        write_csv(&path, &["a", "b"], rows.clone()).unwrap();
        let (h, back) = read_csv(&path).unwrap();
        assert_eq!(h, vec!["a", "b"]);
        assert_eq!(back, rows);
        std::fs::remove_dir_all(&dir).unwrap();
    }

    #[test]
    fn params_overrides_keep_unset_fields() {
        let d = DoublingParams::standard(1);
        let p = MainParams::custom(100.0, 1.0, 2.0, 30.0, 0.5, 0.1, 1.0, d);
        let o = ParamsFile { a: Some(200.0), checked: Some(false), ..Default::default() };
        let q = o.apply(&p);
        assert_eq!((q.a, q.alpha2, q.checked), (200.0, 2.0, false));
        assert_eq!(ParamsFile::from_params(&p).apply(&p.with_a(5.0)), p);
    }
}
