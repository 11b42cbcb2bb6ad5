//! Herald-relative coincidence histograms and their CSV representation.
//!
//! ```text
//! # atomscatter histogram
//! # label=reference
//! # n_heralds=10000000
//! # t_start_s=-0.00000001
//! # bin_width_s=0.000000001
//! # seed=7
//! # t_ns,counts
//! -9.5,0
//! -8.5,0
//! ```
//!
//! Times in the data column are bin centers in nanoseconds; the header carries
//! the exact SI binning so a write-then-read is lossless.

use std::fmt::Write as _;
use std::ops::Range;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io;

/// Closed time interval `[t_min, t_max]` in seconds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeWindow {
    pub t_min: f64,
    pub t_max: f64,
}

impl TimeWindow {
    /// Summation window for extinction and normalization, −10 ns to 100 ns.
    pub const SUMMATION: TimeWindow = TimeWindow {
        t_min: -10e-9,
        t_max: 100e-9,
    };

    /// Bandwidth fit window, 2 ns to 100 ns.
    pub const FIT: TimeWindow = TimeWindow {
        t_min: 2e-9,
        t_max: 100e-9,
    };

    pub fn new(t_min: f64, t_max: f64) -> Result<Self> {
        if !(t_min.is_finite() && t_max.is_finite() && t_min < t_max) {
            return Err(Error::domain(
                "window",
                format!("need finite t_min < t_max, got [{t_min}, {t_max}]"),
            ));
        }
        Ok(TimeWindow { t_min, t_max })
    }

    pub fn len(&self) -> f64 {
        self.t_max - self.t_min
    }

    pub fn contains(&self, t: f64) -> bool {
        t >= self.t_min && t <= self.t_max
    }
}

/// Indices of the bins (of a grid starting at `t_start`) whose centers fall
/// inside `window`.
pub fn bin_range(
    t_start: f64,
    bin_width: f64,
    len: usize,
    window: &TimeWindow,
) -> Result<Range<usize>> {
    let first = ((window.t_min - t_start) / bin_width - 0.5).ceil().max(0.0) as usize;
    let last = ((window.t_max - t_start) / bin_width - 0.5).floor();
    let end = if last < 0.0 {
        0
    } else {
        (last as usize + 1).min(len)
    };
    if first >= end {
        return Err(Error::EmptyWindow {
            t_min: window.t_min,
            t_max: window.t_max,
            reason: format!(
                "no bin centers inside [{:e}, {:e}] s",
                t_start,
                t_start + len as f64 * bin_width
            ),
        });
    }
    Ok(first..end)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Label {
    Reference,
    WithAtom,
}

impl Label {
    pub fn as_str(self) -> &'static str {
        match self {
            Label::Reference => "reference",
            Label::WithAtom => "with_atom",
        }
    }

    fn parse(s: &str) -> Option<Self> {
        match s {
            "reference" => Some(Label::Reference),
            "with_atom" => Some(Label::WithAtom),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    /// Left edge of the first bin (s).
    pub t_start: f64,
    pub bin_width: f64,
    pub counts: Vec<u64>,
    pub n_heralds: u64,
    pub label: Label,
    /// Seed of the simulation that produced the histogram, if any.
    #[serde(default)]
    pub seed: Option<u64>,
}

impl Histogram {
    pub fn new(
        t_start: f64,
        bin_width: f64,
        counts: Vec<u64>,
        n_heralds: u64,
        label: Label,
    ) -> Result<Self> {
        let h = Histogram {
            t_start,
            bin_width,
            counts,
            n_heralds,
            label,
            seed: None,
        };
        h.validate()?;
        Ok(h)
    }

    pub fn validate(&self) -> Result<()> {
        if self.counts.is_empty() {
            return Err(Error::domain("counts", "histogram needs at least one bin"));
        }
        if !(self.bin_width.is_finite() && self.bin_width > 0.0) {
            return Err(Error::domain(
                "bin_width",
                format!("must be > 0, got {}", self.bin_width),
            ));
        }
        if !self.t_start.is_finite() {
            return Err(Error::domain("t_start", "must be finite"));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    pub fn bin_center(&self, i: usize) -> f64 {
        self.t_start + (i as f64 + 0.5) * self.bin_width
    }

    pub fn bin_centers(&self) -> Vec<f64> {
        (0..self.len()).map(|i| self.bin_center(i)).collect()
    }

    pub fn t_end(&self) -> f64 {
        self.t_start + self.len() as f64 * self.bin_width
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// Indices of the bins whose centers fall inside `window`.
    pub fn window_range(&self, window: &TimeWindow) -> Result<Range<usize>> {
        bin_range(self.t_start, self.bin_width, self.len(), window)
    }

    pub fn window_sum(&self, window: &TimeWindow) -> Result<u64> {
        Ok(self.counts[self.window_range(window)?].iter().sum())
    }

    pub fn check_same_binning(&self, other: &Histogram) -> Result<()> {
        let tol = 1e-9 * self.bin_width;
        if self.len() != other.len() {
            return Err(Error::BinningMismatch(format!(
                "{} bins vs {} bins",
                self.len(),
                other.len()
            )));
        }
        if (self.bin_width - other.bin_width).abs() > tol {
            return Err(Error::BinningMismatch(format!(
                "bin width {:e} s vs {:e} s",
                self.bin_width, other.bin_width
            )));
        }
        if (self.t_start - other.t_start).abs() > tol {
            return Err(Error::BinningMismatch(format!(
                "start {:e} s vs {:e} s",
                self.t_start, other.t_start
            )));
        }
        Ok(())
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        out.push_str("# atomscatter histogram\n");
        let _ = writeln!(out, "# label={}", self.label.as_str());
        let _ = writeln!(out, "# n_heralds={}", self.n_heralds);
        let _ = writeln!(out, "# t_start_s={}", self.t_start);
        let _ = writeln!(out, "# bin_width_s={}", self.bin_width);
        if let Some(seed) = self.seed {
            let _ = writeln!(out, "# seed={seed}");
        }
        out.push_str("# t_ns,counts\n");
        for (i, c) in self.counts.iter().enumerate() {
            let _ = writeln!(out, "{},{}", self.bin_center(i) * 1e9, c);
        }
        out
    }

    /// Parse the CSV format. `origin` is only used in error messages.
    pub fn from_csv(text: &str, origin: &Path) -> Result<Self> {
        let fail = |line: usize, reason: String| Error::HistogramFormat {
            path: origin.to_path_buf(),
            line,
            reason,
        };
        let mut label = None;
        let mut n_heralds = None;
        let mut t_start = None;
        let mut bin_width = None;
        let mut seed = None;
        let mut rows: Vec<(usize, f64, u64)> = Vec::new();

        for (idx, raw) in text.lines().enumerate() {
            let lineno = idx + 1;
            let line = raw.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(meta) = line.strip_prefix('#') {
                let meta = meta.trim();
                let Some((key, value)) = meta.split_once('=') else {
                    continue;
                };
                let value = value.trim();
                match key.trim() {
                    "label" => {
                        label = Some(
                            Label::parse(value)
                                .ok_or_else(|| fail(lineno, format!("unknown label `{value}`")))?,
                        )
                    }
                    "n_heralds" => {
                        n_heralds = Some(
                            value
                                .parse::<u64>()
                                .map_err(|e| fail(lineno, format!("n_heralds: {e}")))?,
                        )
                    }
                    "t_start_s" => {
                        t_start = Some(
                            value
                                .parse::<f64>()
                                .map_err(|e| fail(lineno, format!("t_start_s: {e}")))?,
                        )
                    }
                    "bin_width_s" => {
                        bin_width = Some(
                            value
                                .parse::<f64>()
                                .map_err(|e| fail(lineno, format!("bin_width_s: {e}")))?,
                        )
                    }
                    "seed" => {
                        seed = Some(
                            value
                                .parse::<u64>()
                                .map_err(|e| fail(lineno, format!("seed: {e}")))?,
                        )
                    }
                    _ => {}
                }
                continue;
            }
            let (t, c) = line
                .split_once(',')
                .ok_or_else(|| fail(lineno, "expected `t_ns,counts`".into()))?;
            let t: f64 = t
                .trim()
                .parse()
                .map_err(|e| fail(lineno, format!("time: {e}")))?;
            let c: u64 = c.trim().parse().map_err(|e| {
                fail(
                    lineno,
                    format!("counts must be a non-negative integer: {e}"),
                )
            })?;
            rows.push((lineno, t, c));
        }

        if rows.is_empty() {
            return Err(fail(0, "no data rows".into()));
        }
        let n_heralds = n_heralds.ok_or_else(|| fail(0, "missing `# n_heralds=` header".into()))?;
        let bin_width = match bin_width {
            Some(w) => w,
            None if rows.len() >= 2 => (rows[1].1 - rows[0].1) * 1e-9,
            None => return Err(fail(0, "missing `# bin_width_s=` header".into())),
        };
        let t_start = t_start.unwrap_or(rows[0].1 * 1e-9 - 0.5 * bin_width);

        let hist = Histogram {
            t_start,
            bin_width,
            counts: rows.iter().map(|r| r.2).collect(),
            n_heralds,
            label: label.unwrap_or(Label::Reference),
            seed,
        };
        hist.validate().map_err(|e| fail(0, e.to_string()))?;
        let tol_ns = 1e-6 * bin_width * 1e9;
        for (i, &(lineno, t, _)) in rows.iter().enumerate() {
            if (t - hist.bin_center(i) * 1e9).abs() > tol_ns {
                return Err(fail(
                    lineno,
                    format!(
                        "time {t} ns does not match bin center {} ns",
                        hist.bin_center(i) * 1e9
                    ),
                ));
            }
        }
        Ok(hist)
    }

    pub fn read_csv(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_csv(&text, path)
    }

    /// Write atomically; returns the SHA-256 of the written bytes.
    pub fn write_csv(&self, path: &Path) -> Result<String> {
        io::write_atomic(path, self.to_csv().as_bytes())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn hist(counts: Vec<u64>) -> Histogram {
        Histogram::new(-10e-9, 1e-9, counts, 100, Label::Reference).unwrap()
    }

    #[test]
    fn window_range_uses_bin_centers() {
        let h = hist(vec![1; 120]);
        let r = h.window_range(&TimeWindow::SUMMATION).unwrap();
        assert_eq!(r, 0..110);
        let r = h.window_range(&TimeWindow::FIT).unwrap();
        assert_eq!(r, 12..110);
        assert!(h.window_range(&TimeWindow::new(1.0, 2.0).unwrap()).is_err());
    }

    #[test]
    fn mismatched_binning_detected() {
        let a = hist(vec![0; 10]);
        let mut b = hist(vec![0; 10]);
        b.bin_width = 2e-9;
        assert!(matches!(
            a.check_same_binning(&b),
            Err(Error::BinningMismatch(_))
        ));
        assert!(a.check_same_binning(&hist(vec![0; 11])).is_err());
        assert!(a.check_same_binning(&hist(vec![5; 10])).is_ok());
    }

    #[test]
    fn csv_without_binning_headers_is_inferred() {
        let text = "# n_heralds=10\n# t_ns,counts\n0.5,1\n1.5,2\n2.5,3\n";
        let h = Histogram::from_csv(text, Path::new("x.csv")).unwrap();
        assert_eq!(h.counts, vec![1, 2, 3]);
        assert!((h.bin_width - 1e-9).abs() < 1e-20);
        assert!(h.t_start.abs() < 1e-20);
    }

    #[test]
    fn csv_rejects_garbage() {
        let p = Path::new("bad.csv");
        assert!(Histogram::from_csv("# n_heralds=1\n0.5,-3\n", p).is_err());
        assert!(Histogram::from_csv("0.5,3\n", p).is_err());
        assert!(Histogram::from_csv("# n_heralds=1\n", p).is_err());
        let off = "# n_heralds=1\n# t_start_s=0\n# bin_width_s=1e-9\n0.5,1\n7.5,1\n";
        assert!(Histogram::from_csv(off, p).is_err());
    }
}
