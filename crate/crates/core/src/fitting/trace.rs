use std::io::{Read, Write};
use std::path::Path;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Minimum number of samples; the reflection model has seven parameters.
pub const MIN_SAMPLES: usize = 7;

/// A complex reflection trace sampled on a frequency grid in Hz.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComplexTrace {
    pub f_hz: Vec<f64>,
    pub re: Vec<f64>,
    pub im: Vec<f64>,
    pub meta: String,
}

impl ComplexTrace {
    pub fn new(f_hz: Vec<f64>, re: Vec<f64>, im: Vec<f64>, meta: impl Into<String>) -> Result<Self> {
        let t = Self {
            f_hz,
            re,
            im,
            meta: meta.into(),
        };
        t.validate()?;
        Ok(t)
    }

    pub fn from_complex(f_hz: Vec<f64>, values: &[Complex64], meta: impl Into<String>) -> Result<Self> {
        let re = values.iter().map(|z| z.re).collect();
        let im = values.iter().map(|z| z.im).collect();
        Self::new(f_hz, re, im, meta)
    }

    pub fn len(&self) -> usize {
        self.f_hz.len()
    }

    pub fn is_empty(&self) -> bool {
        self.f_hz.is_empty()
    }

    pub fn value(&self, k: usize) -> Complex64 {
        Complex64::new(self.re[k], self.im[k])
    }

    pub fn values(&self) -> Vec<Complex64> {
        (0..self.len()).map(|k| self.value(k)).collect()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.f_hz.len();
        if self.re.len() != n || self.im.len() != n {
            return Err(Error::domain(format!(
                "trace columns differ in length ({n}, {}, {})",
                self.re.len(),
                self.im.len()
            )));
        }
        if n < MIN_SAMPLES {
            return Err(Error::domain(format!(
                "trace needs at least {MIN_SAMPLES} samples, got {n}"
            )));
        }
        for k in 0..n {
            if !self.f_hz[k].is_finite() || !self.re[k].is_finite() || !self.im[k].is_finite() {
                return Err(Error::domain(format!("sample {k} is not finite")));
            }
            if k > 0 && !(self.f_hz[k] > self.f_hz[k - 1]) {
                return Err(Error::domain(format!(
                    "frequency not strictly increasing at sample {k}"
                )));
            }
        }
        Ok(())
    }

    /// Multiplies every sample by `z`.
    pub fn scaled(&self, z: Complex64) -> Self {
        let v: Vec<_> = self.values().into_iter().map(|s| s * z).collect();
        Self {
            f_hz: self.f_hz.clone(),
            re: v.iter().map(|s| s.re).collect(),
            im: v.iter().map(|s| s.im).collect(),
            meta: self.meta.clone(),
        }
    }
}

/// Column layout of a trace file.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TraceFormat {
    /// `f_hz, re, im`.
    #[default]
    ReIm,
    /// `f_hz, mag_db, phase_rad` with `z = 10^(mag_db/20) e^{i phase}`.
    DbPhase,
}

impl TraceFormat {
    fn header(self) -> [&'static str; 3] {
        match self {
            TraceFormat::ReIm => ["f_hz", "re", "im"],
            TraceFormat::DbPhase => ["f_hz", "mag_db", "phase_rad"],
        }
    }
}

pub fn load_trace(path: &Path, format: TraceFormat) -> Result<ComplexTrace> {
    let file = std::fs::File::open(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    read_trace(file, format, &path.display().to_string())
}

/// Parses CSV with a header row. Lines starting with `#` are skipped.
pub fn read_trace<R: Read>(reader: R, format: TraceFormat, meta: &str) -> Result<ComplexTrace> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(reader);
    let header_line = |pos: Option<&csv::Position>| pos.map_or(1, |p| p.line() as usize);
    let headers = rdr
        .headers()
        .map_err(|e| Error::Load {
            line: 1,
            msg: e.to_string(),
        })?
        .clone();
    let want = format.header();
    let found: Vec<&str> = headers.iter().collect();
    if found != want {
        return Err(Error::Load {
            line: header_line(headers.position()),
            msg: format!("expected header `{}`, found `{}`", want.join(","), found.join(",")),
        });
    }
    let (mut f, mut re, mut im) = (Vec::new(), Vec::new(), Vec::new());
    for rec in rdr.records() {
        let rec = rec.map_err(|e| Error::Load {
            line: e.position().map_or(0, |p| p.line() as usize),
            msg: e.to_string(),
        })?;
        let line = rec.position().map_or(0, |p| p.line() as usize);
        if rec.len() != 3 {
            return Err(Error::Load {
                line,
                msg: format!("expected 3 fields, found {}", rec.len()),
            });
        }
        let mut vals = [0.0; 3];
        for (k, field) in rec.iter().enumerate() {
            let v: f64 = field.parse().map_err(|_| Error::Load {
                line,
                msg: format!("`{field}` is not a number"),
            })?;
            if !v.is_finite() {
                return Err(Error::Load {
                    line,
                    msg: format!("non-finite value `{field}`"),
                });
            }
            vals[k] = v;
        }
        if let Some(prev) = f.last() {
            if !(vals[0] > *prev) {
                return Err(Error::Load {
                    line,
                    msg: "frequency not strictly increasing".into(),
                });
            }
        }
        let z = match format {
            TraceFormat::ReIm => Complex64::new(vals[1], vals[2]),
            TraceFormat::DbPhase => Complex64::from_polar(10f64.powf(vals[1] / 20.0), vals[2]),
        };
        f.push(vals[0]);
        re.push(z.re);
        im.push(z.im);
    }
    let trace = ComplexTrace {
        f_hz: f,
        re,
        im,
        meta: meta.to_string(),
    };
    trace.validate().map_err(|e| Error::Load {
        line: 0,
        msg: e.to_string(),
    })?;
    Ok(trace)
}

pub fn save_trace(path: &Path, trace: &ComplexTrace, format: TraceFormat) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    write_trace(std::io::BufWriter::new(file), trace, format)
}

/// Writes 17 significant digits so `re_im` files round-trip bit-exactly.
pub fn write_trace<W: Write>(writer: W, trace: &ComplexTrace, format: TraceFormat) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let io = |e: csv::Error| Error::Io(e.to_string());
    w.write_record(format.header()).map_err(io)?;
    for k in 0..trace.len() {
        let (a, b) = match format {
            TraceFormat::ReIm => (trace.re[k], trace.im[k]),
            TraceFormat::DbPhase => {
                let z = trace.value(k);
                (20.0 * z.norm().log10(), z.arg())
            }
        };
        w.write_record([fmt(trace.f_hz[k]), fmt(a), fmt(b)]).map_err(io)?;
    }
    w.flush().map_err(Error::from)
}

pub(crate) fn fmt(v: f64) -> String {
    format!("{v:.16e}")
}

/// Samples `model` on `f_hz` and adds circular complex Gaussian noise with
/// total standard deviation `|R|_rms 10^(-snr_db / 20)` (each quadrature
/// gets `1/sqrt 2` of it). `snr_db = None` gives a noiseless trace.
pub fn synthesize_trace<F: Fn(f64) -> Complex64>(
    f_hz: &[f64],
    model: F,
    snr_db: Option<f64>,
    seed: u64,
) -> Result<ComplexTrace> {
    let mut values: Vec<Complex64> = f_hz.iter().map(|&f| model(f)).collect();
    if let Some(snr) = snr_db {
        if !snr.is_finite() {
            return Err(Error::domain(format!("snr_db must be finite, got {snr}")));
        }
        let rms = (values.iter().map(|z| z.norm_sqr()).sum::<f64>() / values.len().max(1) as f64).sqrt();
        let sigma = rms * 10f64.powf(-snr / 20.0) * std::f64::consts::FRAC_1_SQRT_2;
        let normal = Normal::new(0.0, sigma).map_err(|e| Error::domain(e.to_string()))?;
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        for z in &mut values {
            let (a, b) = (normal.sample(&mut rng), normal.sample(&mut rng));
            *z += Complex64::new(a, b);
        }
    }
    let meta = match snr_db {
        Some(s) => format!("synthetic, snr_db = {s}, seed = {seed}"),
        None => "synthetic, noiseless".to_string(),
    };
    ComplexTrace::from_complex(f_hz.to_vec(), &values, meta)
}

/// `n` evenly spaced points from `start` to `stop` inclusive.
pub fn linear_grid(start: f64, stop: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![start];
    }
    (0..n)
        .map(|k| start + (stop - start) * (k as f64) / ((n - 1) as f64))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> ComplexTrace {
        let f = linear_grid(1e9, 1.001e9, 11);
        synthesize_trace(&f, |x| Complex64::from_polar(0.3, x * 1e-8), Some(30.0), 4).unwrap()
    }

    #[test]
    fn re_im_round_trip_is_exact() {
        let t = sample();
        let mut buf = Vec::new();
        write_trace(&mut buf, &t, TraceFormat::ReIm).unwrap();
        let back = read_trace(buf.as_slice(), TraceFormat::ReIm, &t.meta).unwrap();
        assert_eq!(back, t);
    }

    #[test]
    fn db_phase_round_trip() {
        let t = sample();
        let mut buf = Vec::new();
        write_trace(&mut buf, &t, TraceFormat::DbPhase).unwrap();
        let back = read_trace(buf.as_slice(), TraceFormat::DbPhase, "").unwrap();
        for k in 0..t.len() {
            assert!((back.value(k) - t.value(k)).norm() <= 1e-12 * t.value(k).norm());
        }
    }

    #[test]
    fn synthesis_is_deterministic() {
        assert_eq!(sample(), sample());
        let f = linear_grid(0.0, 1.0, 8);
        let a = synthesize_trace(&f, |_| Complex64::new(1.0, 0.0), Some(20.0), 1).unwrap();
        let b = synthesize_trace(&f, |_| Complex64::new(1.0, 0.0), Some(20.0), 2).unwrap();
        assert_ne!(a, b);
    }

    #[test]
    fn load_errors_carry_line_numbers() {
        let bad = "f_hz,re,im\n1,0,0\n2,0,0\n3,x,0\n";
        match read_trace(bad.as_bytes(), TraceFormat::ReIm, "") {
            Err(Error::Load { line, .. }) => assert_eq!(line, 4),
            other => panic!("{other:?}"),
        }
        let nonmono = "f_hz,re,im\n1,0,0\n3,0,0\n2,0,0\n";
        match read_trace(nonmono.as_bytes(), TraceFormat::ReIm, "") {
            Err(Error::Load { line, .. }) => assert_eq!(line, 4),
            other => panic!("{other:?}"),
        }
        let nan = "f_hz,re,im\n1,NaN,0\n";
        assert!(matches!(
            read_trace(nan.as_bytes(), TraceFormat::ReIm, ""),
            Err(Error::Load { line: 2, .. })
        ));
        let header = "freq,re,im\n1,0,0\n";
        assert!(matches!(
            read_trace(header.as_bytes(), TraceFormat::ReIm, ""),
            Err(Error::Load { line: 1, .. })
        ));
    }
}
