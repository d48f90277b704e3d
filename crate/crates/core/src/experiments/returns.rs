//! Log-return series, realized-volatility pairs and a synthetic
//! heteroscedastic return generator.

use std::f64::consts::PI;
use std::io::Read;
use std::path::Path;

use chrono::{DateTime, NaiveDate, NaiveDateTime};
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::rng::seeded;
use crate::stat_kernels::{empirical_quantile, t_sample};

/// Bars dropped at each end of a trading session.
pub const SESSION_TRIM_BARS: usize = 5;

#[derive(Debug, Clone, PartialEq)]
pub struct ReturnsSeries {
    timestamps: Option<Vec<NaiveDateTime>>,
    returns: Vec<f64>,
    pub symbol: Option<String>,
    pub bar_interval: Option<String>,
}

impl ReturnsSeries {
    /// A series without timestamps, so no session trimming applies.
    pub fn new(returns: Vec<f64>) -> Result<Self> {
        check_finite(&returns)?;
        Ok(Self { timestamps: None, returns, symbol: None, bar_interval: None })
    }

    pub fn with_timestamps(timestamps: Vec<NaiveDateTime>, returns: Vec<f64>) -> Result<Self> {
        if timestamps.len() != returns.len() {
            return Err(Error::Data(format!("{} timestamps for {} returns", timestamps.len(), returns.len())));
        }
        if let Some(w) = timestamps.windows(2).find(|w| w[0] >= w[1]) {
            return Err(Error::Data(format!("timestamps not strictly increasing at {}", w[1])));
        }
        check_finite(&returns)?;
        Ok(Self { timestamps: Some(timestamps), returns, symbol: None, bar_interval: None })
    }

    /// Log-returns of a price path, stamped with the later price's time.
    pub fn from_prices(timestamps: Vec<NaiveDateTime>, prices: &[f64]) -> Result<Self> {
        if timestamps.len() != prices.len() {
            return Err(Error::Data(format!("{} timestamps for {} prices", timestamps.len(), prices.len())));
        }
        if let Some(p) = prices.iter().find(|p| !(**p > 0.0 && p.is_finite())) {
            return Err(Error::Data(format!("prices must be positive and finite, got {p}")));
        }
        let returns = prices.windows(2).map(|w| (w[1] / w[0]).ln()).collect();
        Self::with_timestamps(timestamps.into_iter().skip(1).collect(), returns)
    }

    /// Reads `timestamp,price` or `timestamp,log_return` CSV.
    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let headers = rdr.headers()?.clone();
        let cols: Vec<&str> = headers.iter().collect();
        let prices = match cols.as_slice() {
            ["timestamp", "price"] => true,
            ["timestamp", "log_return"] => false,
            _ => {
                return Err(Error::Data(format!(
                    "expected header timestamp,price or timestamp,log_return, got {}",
                    cols.join(",")
                )))
            }
        };
        let mut ts = Vec::new();
        let mut values = Vec::new();
        for (i, rec) in rdr.records().enumerate() {
            let rec = rec?;
            let line = i + 2;
            ts.push(parse_timestamp(&rec[0]).ok_or_else(|| Error::Data(format!("line {line}: bad timestamp {:?}", &rec[0])))?);
            let v: f64 = rec[1].parse().map_err(|_| Error::Data(format!("line {line}: bad number {:?}", &rec[1])))?;
            values.push(v);
        }
        if prices {
            if ts.is_empty() {
                return Self::with_timestamps(ts, values);
            }
            Self::from_prices(ts, &values)
        } else {
            Self::with_timestamps(ts, values)
        }
    }

    pub fn load_csv(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let mut s = Self::read_csv(std::fs::File::open(path)?)?;
        s.symbol = path.file_stem().map(|s| s.to_string_lossy().into_owned());
        Ok(s)
    }

    pub fn returns(&self) -> &[f64] {
        &self.returns
    }

    pub fn timestamps(&self) -> Option<&[NaiveDateTime]> {
        self.timestamps.as_deref()
    }

    pub fn len(&self) -> usize {
        self.returns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.returns.is_empty()
    }

    pub fn has_sessions(&self) -> bool {
        self.timestamps.is_some()
    }

    /// Drops the first and last `bars` returns of every calendar day.
    /// Series without timestamps come back unchanged.
    pub fn trim_sessions(&self, bars: usize) -> Self {
        let Some(ts) = &self.timestamps else { return self.clone() };
        let mut keep_ts = Vec::new();
        let mut keep = Vec::new();
        let mut start = 0;
        while start < ts.len() {
            let day = ts[start].date();
            let end = start + ts[start..].iter().take_while(|t| t.date() == day).count();
            if end - start > 2 * bars {
                keep_ts.extend_from_slice(&ts[start + bars..end - bars]);
                keep.extend_from_slice(&self.returns[start + bars..end - bars]);
            }
            start = end;
        }
        Self { timestamps: Some(keep_ts), returns: keep, symbol: self.symbol.clone(), bar_interval: self.bar_interval.clone() }
    }
}

fn check_finite(returns: &[f64]) -> Result<()> {
    match returns.iter().position(|r| !r.is_finite()) {
        Some(i) => Err(Error::Data(format!("non-finite return at position {i}"))),
        None => Ok(()),
    }
}

fn parse_timestamp(s: &str) -> Option<NaiveDateTime> {
    if let Ok(t) = DateTime::parse_from_rfc3339(s) {
        return Some(t.naive_local());
    }
    for fmt in ["%Y-%m-%dT%H:%M:%S%.f", "%Y-%m-%d %H:%M:%S%.f", "%Y-%m-%dT%H:%M", "%Y-%m-%d %H:%M"] {
        if let Ok(t) = NaiveDateTime::parse_from_str(s, fmt) {
            return Some(t);
        }
    }
    NaiveDate::parse_from_str(s, "%Y-%m-%d").ok().and_then(|d| d.and_hms_opt(0, 0, 0))
}

/// Sum of squared returns.
pub fn realized_volatility(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum()
}

/// Smallest partial sum `x_1 + ... + x_j`, `j >= 1`.
pub fn worst_cumulative_return(x: &[f64]) -> f64 {
    let mut acc = 0.0;
    let mut worst = f64::INFINITY;
    for v in x {
        acc += v;
        worst = worst.min(acc);
    }
    worst
}

/// Trailing volatility `v` and the worst cumulative return `t` that
/// follows it. Returns `start..end` (end exclusive) are the indices used.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VarPair {
    pub v: f64,
    pub t: f64,
    pub k: usize,
    pub start: usize,
    pub end: usize,
}

impl VarPair {
    /// Index of the last bar feeding `v`; `t` starts right after it.
    pub fn anchor(&self, m: usize) -> usize {
        self.start + m - 1
    }
}

/// Pairs anchored at `(2k+1)m` (1-based) for `k >= 1`, each built from
/// `2m` consecutive returns of the session-trimmed series. Blocks do not
/// overlap.
pub fn build_var_pairs(series: &ReturnsSeries, m: usize) -> Result<Vec<VarPair>> {
    if m < 2 {
        return domain(format!("m must be at least 2, got {m}"));
    }
    let trimmed = series.trim_sessions(SESSION_TRIM_BARS);
    let x = trimmed.returns();
    if x.len() < 4 * m {
        return domain(format!(
            "return series too short: {} returns after trimming, need at least 4m = {} for m = {m}",
            x.len(),
            4 * m
        ));
    }
    let pairs = (1..)
        .map(|k| (k, (2 * k + 1) * m))
        .take_while(|&(_, t)| t + m <= x.len())
        .map(|(k, t)| VarPair {
            v: realized_volatility(&x[t - m..t]),
            t: worst_cumulative_return(&x[t..t + m]),
            k,
            start: t - m,
            end: t + m,
        })
        .collect();
    Ok(pairs)
}

/// `X_t = s_t Z_t` with `s_t = base (1 + amp sin(2πt/period))` and `Z_t` a
/// unit-variance t₅ draw.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HeteroReturns {
    pub base: f64,
    pub amp: f64,
    pub period: f64,
}

impl Default for HeteroReturns {
    fn default() -> Self {
        Self { base: 0.002, amp: 0.8, period: 600.0 }
    }
}

const T5_UNIT: f64 = 0.774_596_669_241_483_4; // sqrt(3/5)

impl HeteroReturns {
    pub fn scale(&self, t: usize) -> f64 {
        self.base * (1.0 + self.amp * (2.0 * PI * t as f64 / self.period).sin())
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.base > 0.0 && self.base.is_finite() && (0.0..1.0).contains(&self.amp) && self.period > 0.0) {
            return domain(format!("invalid generator parameters {self:?}"));
        }
        Ok(())
    }

    pub fn generate(&self, n: usize, seed: u64) -> Result<ReturnsSeries> {
        self.validate()?;
        let mut rng = seeded(seed);
        let x = (0..n).map(|t| Ok(self.scale(t) * T5_UNIT * t_sample(&mut rng, 5)?)).collect::<Result<_>>()?;
        ReturnsSeries::new(x)
    }

    /// Scales of the bars that make up the `t` of `pair`.
    pub fn future_scales(&self, pair: &VarPair, m: usize) -> Vec<f64> {
        (pair.start + m..pair.end).map(|i| self.scale(i)).collect()
    }
}

/// Fixed bank of unit-variance t₅ paths, used to read off the exact
/// conditional law of a worst cumulative return by simulation.
#[derive(Debug, Clone)]
pub struct UnitPathBank {
    m: usize,
    z: Vec<f64>,
}

impl UnitPathBank {
    pub fn new(paths: usize, m: usize, seed: u64) -> Result<Self> {
        if paths == 0 || m == 0 {
            return domain("path bank needs at least one path of positive length");
        }
        let mut rng = seeded(seed);
        let z = (0..paths * m).map(|_| Ok(T5_UNIT * t_sample(&mut rng, 5)?)).collect::<Result<_>>()?;
        Ok(Self { m, z })
    }

    /// Lower `p` quantile of the worst cumulative return of `s_i Z_i`.
    pub fn worst_return_quantile(&self, scales: &[f64], p: f64) -> Result<f64> {
        if scales.len() != self.m {
            return domain(format!("bank paths have length {}, got {} scales", self.m, scales.len()));
        }
        let worst: Vec<f64> = self
            .z
            .chunks(self.m)
            .map(|z| {
                let mut acc = 0.0;
                let mut w = f64::INFINITY;
                for (s, z) in scales.iter().zip(z) {
                    acc += s * z;
                    w = w.min(acc);
                }
                w
            })
            .collect();
        empirical_quantile(&worst, p)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn volatility_and_worst_return() {
        let x = [0.01, -0.02, 0.03];
        assert_abs_diff_eq!(realized_volatility(&x), 0.0014, epsilon = 1e-15);
        assert_abs_diff_eq!(worst_cumulative_return(&x), -0.01, epsilon = 1e-15);
        assert_abs_diff_eq!(worst_cumulative_return(&[0.02, 0.01]), 0.02, epsilon = 1e-15);
    }

    #[test]
    fn pair_grid() {
        let m = 3;
        let s = ReturnsSeries::new((0..4 * m).map(|i| i as f64 * 0.001).collect()).unwrap();
        let pairs = build_var_pairs(&s, m).unwrap();
        assert_eq!(pairs.len(), 1);
        assert_eq!((pairs[0].start, pairs[0].end, pairs[0].k), (6, 12, 1));
        assert_eq!(pairs[0].anchor(m), 8);
        let x = s.returns();
        assert_abs_diff_eq!(pairs[0].v, realized_volatility(&x[6..9]));
        assert_abs_diff_eq!(pairs[0].t, x[9]);

        let long = ReturnsSeries::new(vec![0.0; 4 * m + 2 * m - 1]).unwrap();
        assert_eq!(build_var_pairs(&long, m).unwrap().len(), 1);
        let long = ReturnsSeries::new(vec![0.0; 6 * m]).unwrap();
        assert_eq!(build_var_pairs(&long, m).unwrap().len(), 2);
    }

    #[test]
    fn pairs_are_disjoint() {
        let s = HeteroReturns::default().generate(1000, 1).unwrap();
        let pairs = build_var_pairs(&s, 7).unwrap();
        assert!(pairs.windows(2).all(|w| w[0].end <= w[1].start));
        assert!(pairs.iter().all(|p| p.v >= 0.0 && p.end - p.start == 14));
    }

    #[test]
    fn short_series_message() {
        let s = ReturnsSeries::new(vec![0.01; 3]).unwrap();
        let e = build_var_pairs(&s, 30).unwrap_err().to_string();
        assert!(e.contains("at least 4m = 120"), "{e}");
        assert!(build_var_pairs(&s, 1).is_err());
    }

    #[test]
    fn csv_prices_become_log_returns() {
        let text = "timestamp,price\n2024-01-02T09:31:00,100\n2024-01-02T09:32:00,110\n2024-01-02T09:33:00,99\n";
        let s = ReturnsSeries::read_csv(text.as_bytes()).unwrap();
        assert_eq!(s.len(), 2);
        assert_abs_diff_eq!(s.returns()[0], (1.1f64).ln(), epsilon = 1e-15);
        assert_eq!(s.timestamps().unwrap()[0].to_string(), "2024-01-02 09:32:00");

        let text = "timestamp,log_return\n2024-01-02 09:31:00,0.01\n2024-01-02T09:32:00Z,-0.02\n";
        assert_eq!(ReturnsSeries::read_csv(text.as_bytes()).unwrap().returns(), &[0.01, -0.02]);
        assert!(ReturnsSeries::read_csv("time,price\n".as_bytes()).is_err());
        let unordered = "timestamp,log_return\n2024-01-02 09:32:00,0.01\n2024-01-02 09:31:00,0.01\n";
        assert!(ReturnsSeries::read_csv(unordered.as_bytes()).is_err());
        assert!(ReturnsSeries::new(vec![f64::NAN]).is_err());
    }

    #[test]
    fn trims_each_session() {
        let day = |d: u32, i: u32| NaiveDate::from_ymd_opt(2024, 1, d).unwrap().and_hms_opt(9, 30 + i, 0).unwrap();
        let mut ts = Vec::new();
        let mut x = Vec::new();
        for d in [2, 3] {
            for i in 0..20 {
                ts.push(day(d, i));
                x.push(i as f64);
            }
        }
        // A short day vanishes entirely.
        for i in 0..8 {
            ts.push(day(4, i));
            x.push(0.0);
        }
        let s = ReturnsSeries::with_timestamps(ts, x).unwrap().trim_sessions(SESSION_TRIM_BARS);
        assert_eq!(s.len(), 20);
        assert_eq!(s.returns()[0], 5.0);
        assert_eq!(s.returns()[9], 14.0);
        assert_eq!(s.returns()[10], 5.0);
    }

    #[test]
    fn generator_scale_and_determinism() {
        let g = HeteroReturns::default();
        assert_eq!(g.generate(100, 4).unwrap(), g.generate(100, 4).unwrap());
        let bank = UnitPathBank::new(200_000, 1, 3).unwrap();
        // One-step worst return is s Z, whose 5% quantile is s sqrt(3/5) t₅(0.05).
        let q = bank.worst_return_quantile(&[2.0], 0.05).unwrap();
        let want = 2.0 * T5_UNIT * crate::stat_kernels::t_quantile(0.05, 5).unwrap();
        assert!((q - want).abs() < 0.02, "{q} vs {want}");
        assert!(HeteroReturns { amp: 1.5, ..g }.generate(10, 0).is_err());
    }
}
