//! Real coefficient sequences, definite-parity series and Fourier-conjugate
//! pairs.
//!
//! Every sequence starts at `k = 1`; the zero mode is identically zero.

use std::f64::consts::PI;
use std::io::{Read, Write};
use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::sum::CompensatedSum;

/// Default evaluation cutoff for rule-backed sources.
pub const DEFAULT_RULE_CUTOFF: usize = 2_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Parity {
    /// Even in theta: sum of `a_k cos(k theta)`.
    Cosine,
    /// Odd in theta: sum of `a_k sin(k theta)`.
    Sine,
}

impl Parity {
    pub fn flipped(self) -> Self {
        match self {
            Parity::Cosine => Parity::Sine,
            Parity::Sine => Parity::Cosine,
        }
    }

    /// `+1` for cosine series, `-1` for sine series.
    pub fn reflection_sign(self) -> f64 {
        match self {
            Parity::Cosine => 1.0,
            Parity::Sine => -1.0,
        }
    }
}

impl std::str::FromStr for Parity {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "cosine" | "cos" | "even" => Ok(Parity::Cosine),
            "sine" | "sin" | "odd" => Ok(Parity::Sine),
            other => Err(Error::InvalidArgument(format!("unknown parity `{other}`"))),
        }
    }
}

/// Closed-form coefficient rules.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Rule {
    /// `-(2/pi) (-1)^k / k`.
    SawtoothOne,
    /// `4/(pi k)` for odd `k`.
    Square,
    /// `-(4/pi)/k` for even `k`.
    SawtoothTwo,
    /// `-(8/pi^2)/k^2` for odd `k`.
    Triangular,
    /// `1/j^2` at `k = j^2`.
    Riemann,
    /// `1/pi` for every `k`, measured from the angle `theta1`.
    Delta { theta1: f64 },
    /// `amplitude * k^exponent`.
    PowerLaw { amplitude: f64, exponent: f64 },
    /// `amplitude * ratio^k`.
    Geometric { amplitude: f64, ratio: f64 },
}

fn perfect_square_root(k: usize) -> Option<usize> {
    let r = (k as f64).sqrt().round() as usize;
    (r * r == k).then_some(r)
}

impl Rule {
    pub fn coeff(&self, k: usize) -> f64 {
        if k == 0 {
            return 0.0;
        }
        let kf = k as f64;
        match *self {
            Rule::SawtoothOne => {
                let sign = if k.is_multiple_of(2) { -1.0 } else { 1.0 };
                sign * 2.0 / (PI * kf)
            }
            Rule::Square => {
                if k % 2 == 1 {
                    4.0 / (PI * kf)
                } else {
                    0.0
                }
            }
            Rule::SawtoothTwo => {
                if k.is_multiple_of(2) {
                    -4.0 / (PI * kf)
                } else {
                    0.0
                }
            }
            Rule::Triangular => {
                if k % 2 == 1 {
                    -8.0 / (PI * PI * kf * kf)
                } else {
                    0.0
                }
            }
            Rule::Riemann => match perfect_square_root(k) {
                Some(j) => 1.0 / (j as f64 * j as f64),
                None => 0.0,
            },
            Rule::Delta { .. } => 1.0 / PI,
            Rule::PowerLaw {
                amplitude,
                exponent,
            } => amplitude * kf.powf(exponent),
            Rule::Geometric { amplitude, ratio } => {
                let sign = if ratio < 0.0 && k % 2 == 1 { -1.0 } else { 1.0 };
                sign * amplitude.signum() * self.ln_abs(k).exp()
            }
        }
    }

    /// `ln |a_k|`, evaluated without forming `a_k` where that could overflow.
    pub fn ln_abs(&self, k: usize) -> f64 {
        match *self {
            Rule::PowerLaw {
                amplitude,
                exponent,
            } if k > 0 => amplitude.abs().ln() + exponent * (k as f64).ln(),
            Rule::Geometric { amplitude, ratio } if k > 0 => {
                amplitude.abs().ln() + k as f64 * ratio.abs().ln()
            }
            _ => self.coeff(k).abs().ln(),
        }
    }

    /// Smallest `k' >= k` that can carry a nonzero coefficient.
    fn next_candidate(&self, k: usize) -> usize {
        let k = k.max(1);
        match self {
            Rule::Square | Rule::Triangular => k | 1,
            Rule::SawtoothTwo => k + (k & 1),
            Rule::Riemann => {
                let mut j = (k as f64).sqrt().floor() as usize;
                while j * j < k {
                    j += 1;
                }
                j * j
            }
            _ => k,
        }
    }

    pub fn rotation(&self) -> f64 {
        match self {
            Rule::Delta { theta1 } => *theta1,
            _ => 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SourceKind {
    /// `values[k - 1] = a_k`.
    Table(Vec<f64>),
    Rule(Rule),
}

/// A real coefficient sequence with an evaluation cutoff.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientSource {
    kind: SourceKind,
    cutoff: usize,
}

impl CoefficientSource {
    pub fn table(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidTable("table is empty".into()));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidTable(format!(
                "coefficient a_{} is not finite",
                i + 1
            )));
        }
        let cutoff = values.len();
        Ok(CoefficientSource {
            kind: SourceKind::Table(values),
            cutoff,
        })
    }

    pub fn rule(rule: Rule) -> Self {
        CoefficientSource {
            kind: SourceKind::Rule(rule),
            cutoff: DEFAULT_RULE_CUTOFF,
        }
    }

    pub fn with_cutoff(mut self, cutoff: usize) -> Self {
        self.cutoff = cutoff.max(1);
        self
    }

    pub fn kind(&self) -> &SourceKind {
        &self.kind
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    pub fn coeff(&self, k: usize) -> f64 {
        if k == 0 {
            return 0.0;
        }
        match &self.kind {
            SourceKind::Table(values) => values.get(k - 1).copied().unwrap_or(0.0),
            SourceKind::Rule(rule) => rule.coeff(k),
        }
    }

    pub fn ln_abs(&self, k: usize) -> f64 {
        match &self.kind {
            SourceKind::Table(_) => self.coeff(k).abs().ln(),
            SourceKind::Rule(rule) => rule.ln_abs(k),
        }
    }

    /// Angle the series is centred on; zero except for the delta rule.
    pub fn rotation(&self) -> f64 {
        match &self.kind {
            SourceKind::Table(_) => 0.0,
            SourceKind::Rule(rule) => rule.rotation(),
        }
    }

    /// The first `k_max` coefficients as a table.
    pub fn materialize(&self, k_max: usize) -> Result<CoefficientSource> {
        CoefficientSource::table((1..=k_max).map(|k| self.coeff(k)).collect())
    }

    /// Nonzero coefficients with `k <= k_max`, in ascending `k`.
    pub fn support(&self, k_max: usize) -> Support<'_> {
        Support {
            source: self,
            next: 1,
            k_max,
        }
    }
}

/// Iterator over `(k, a_k)` pairs with `a_k != 0`.
pub struct Support<'a> {
    source: &'a CoefficientSource,
    next: usize,
    k_max: usize,
}

impl Iterator for Support<'_> {
    type Item = (usize, f64);

    fn next(&mut self) -> Option<(usize, f64)> {
        match &self.source.kind {
            SourceKind::Table(values) => {
                let end = self.k_max.min(values.len());
                while self.next <= end {
                    let k = self.next;
                    self.next += 1;
                    let a = values[k - 1];
                    if a != 0.0 {
                        return Some((k, a));
                    }
                }
                None
            }
            SourceKind::Rule(rule) => loop {
                let k = rule.next_candidate(self.next);
                if k > self.k_max {
                    self.next = self.k_max + 1;
                    return None;
                }
                self.next = k + 1;
                let a = rule.coeff(k);
                if a != 0.0 {
                    return Some((k, a));
                }
            },
        }
    }
}

/// A definite-parity trigonometric series.
#[derive(Debug, Clone, PartialEq)]
pub struct DpSeries {
    pub coeffs: Arc<CoefficientSource>,
    pub parity: Parity,
}

impl DpSeries {
    pub fn new(coeffs: impl Into<Arc<CoefficientSource>>, parity: Parity) -> Self {
        DpSeries {
            coeffs: coeffs.into(),
            parity,
        }
    }
}

/// The series with the same coefficients and the opposite parity.
pub fn fc_conjugate(s: &DpSeries) -> DpSeries {
    DpSeries {
        coeffs: Arc::clone(&s.coeffs),
        parity: s.parity.flipped(),
    }
}

/// A cosine series and its Fourier conjugate sharing one coefficient source.
#[derive(Debug, Clone, PartialEq)]
pub struct FcPair {
    pub cosine: DpSeries,
    pub sine: DpSeries,
}

impl FcPair {
    pub fn new(coeffs: impl Into<Arc<CoefficientSource>>) -> Self {
        let coeffs = coeffs.into();
        FcPair {
            cosine: DpSeries::new(Arc::clone(&coeffs), Parity::Cosine),
            sine: DpSeries::new(coeffs, Parity::Sine),
        }
    }

    pub fn from_series(s: &DpSeries) -> Self {
        FcPair::new(Arc::clone(&s.coeffs))
    }

    pub fn source(&self) -> &CoefficientSource {
        &self.cosine.coeffs
    }
}

/// `sum_{k<=K} a_k cos(k theta)` or the sine analogue, ascending in `k` with
/// compensated accumulation. Angles are measured from the source rotation.
pub fn partial_sum(s: &DpSeries, theta: f64, k_trunc: usize) -> f64 {
    weighted_partial_sum(s, 1.0, theta, k_trunc)
}

/// `sum_{k<=K} a_k rho^k cos(k theta)` or the sine analogue.
pub fn weighted_partial_sum(s: &DpSeries, rho: f64, theta: f64, k_trunc: usize) -> f64 {
    let phi = theta - s.coeffs.rotation();
    let ln_rho = rho.ln();
    let mut acc = CompensatedSum::new();
    for (k, a) in s.coeffs.support(k_trunc) {
        let angle = k as f64 * phi;
        let trig = match s.parity {
            Parity::Cosine => angle.cos(),
            Parity::Sine => angle.sin(),
        };
        let weight = if rho == 1.0 {
            a
        } else if rho < 1.0 {
            a * rho.powi(k as i32)
        } else {
            // log form keeps a_k rho^k finite when a_k or rho^k alone is not
            a.signum() * (s.coeffs.ln_abs(k) + k as f64 * ln_rho).exp()
        };
        acc.add(weight * trig);
    }
    acc.value()
}

#[derive(serde::Deserialize)]
struct TableRow {
    k: usize,
    a_k: f64,
}

/// Reads a `k,a_k` CSV table. Indices must run 1, 2, 3, ... without gaps.
pub fn read_table_csv<R: Read>(reader: R) -> Result<CoefficientSource> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers = rdr
        .headers()
        .map_err(|e| Error::InvalidTable(e.to_string()))?
        .clone();
    if headers.len() != 2 || &headers[0] != "k" || &headers[1] != "a_k" {
        return Err(Error::InvalidTable(
            "expected the header `k,a_k`".to_string(),
        ));
    }
    let mut values = Vec::new();
    for (i, row) in rdr.deserialize::<TableRow>().enumerate() {
        let row = row.map_err(|e| Error::InvalidTable(e.to_string()))?;
        if row.k != i + 1 {
            return Err(Error::InvalidTable(format!(
                "row {} has k = {}, expected {}",
                i + 1,
                row.k,
                i + 1
            )));
        }
        values.push(row.a_k);
    }
    CoefficientSource::table(values)
}

/// Writes `a_1..a_{k_max}` as a `k,a_k` CSV table.
pub fn write_table_csv<W: Write>(
    mut writer: W,
    source: &CoefficientSource,
    k_max: usize,
) -> std::io::Result<()> {
    writeln!(writer, "k,a_k")?;
    for k in 1..=k_max {
        writeln!(writer, "{},{:.16e}", k, source.coeff(k))?;
    }
    Ok(())
}
