//! Autocorrelation time series and their CSV form.
//!
//! ```text
//! # seed: 7
//! # n_trajectories: 100000
//! t,re_c,im_c
//! 0e0,1e0,0e0
//! ```

use std::io::{BufRead, Write};

use num_complex::Complex64;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationSeries {
    pub times: Vec<f64>,
    pub values: Vec<Complex64>,
    /// Monte-Carlo standard error per sample (zero for deterministic series).
    pub std_error: Vec<f64>,
    pub n_trajectories: usize,
    pub n_used: usize,
    pub n_discarded: usize,
    pub seed: u64,
    /// Extra `key: value` lines written into the CSV header.
    pub metadata: Vec<(String, String)>,
}

impl CorrelationSeries {
    /// A deterministic series (no sampling) on `t_k = k·dt`.
    pub fn deterministic(dt: f64, values: Vec<Complex64>) -> Self {
        let times = (0..values.len()).map(|k| k as f64 * dt).collect();
        let n = values.len();
        CorrelationSeries {
            times,
            values,
            std_error: vec![0.0; n],
            n_trajectories: 0,
            n_used: 0,
            n_discarded: 0,
            seed: 0,
            metadata: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn discard_fraction(&self) -> f64 {
        if self.n_trajectories == 0 {
            0.0
        } else {
            self.n_discarded as f64 / self.n_trajectories as f64
        }
    }

    /// Sample spacing, after checking that the grid is uniform.
    pub fn spacing(&self) -> Result<f64> {
        if self.times.len() < 2 || self.times.len() != self.values.len() {
            return Err(Error::InvalidParameter("series needs at least two samples".into()));
        }
        let dt = self.times[1] - self.times[0];
        if !(dt > 0.0) {
            return Err(Error::NonUniformGrid(1));
        }
        for (k, w) in self.times.windows(2).enumerate() {
            if ((w[1] - w[0]) - dt).abs() > 1e-9 * dt.max(w[1].abs()) {
                return Err(Error::NonUniformGrid(k + 1));
            }
        }
        Ok(dt)
    }

    /// Truncates the series to samples with `t <= t_max`.
    pub fn truncated(&self, t_max: f64) -> Self {
        let keep = self.times.iter().take_while(|&&t| t <= t_max * (1.0 + 1e-12)).count();
        let mut out = self.clone();
        out.times.truncate(keep);
        out.values.truncate(keep);
        out.std_error.truncate(keep);
        out
    }

    pub fn push_metadata(&mut self, key: impl Into<String>, value: impl ToString) {
        self.metadata.push((key.into(), value.to_string()));
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "# seed: {}", self.seed)?;
        writeln!(out, "# n_trajectories: {}", self.n_trajectories)?;
        writeln!(out, "# n_used: {}", self.n_used)?;
        writeln!(out, "# discard_fraction: {}", self.discard_fraction())?;
        for (k, v) in &self.metadata {
            writeln!(out, "# {}: {}", k, v.replace('\n', " "))?;
        }
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["t", "re_c", "im_c"]).map_err(csv_error)?;
        for (t, c) in self.times.iter().zip(&self.values) {
            w.write_record([t.to_string(), c.re.to_string(), c.im.to_string()])
                .map_err(csv_error)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv<R: BufRead>(input: R) -> Result<Self> {
        let mut header = Vec::new();
        let mut body = String::new();
        for line in input.lines() {
            let line = line?;
            match line.strip_prefix('#') {
                Some(rest) => {
                    if let Some((k, v)) = rest.split_once(':') {
                        header.push((k.trim().to_string(), v.trim().to_string()));
                    }
                }
                None => {
                    body.push_str(&line);
                    body.push('\n');
                }
            }
        }
        let mut reader = csv::Reader::from_reader(body.as_bytes());
        let mut times = Vec::new();
        let mut values = Vec::new();
        for row in reader.records() {
            let row = row.map_err(csv_error)?;
            let field = |i: usize| -> Result<f64> {
                row.get(i)
                    .ok_or_else(|| Error::Config("correlation row has fewer than 3 columns".into()))?
                    .trim()
                    .parse::<f64>()
                    .map_err(|e| Error::Config(format!("bad number in correlation CSV: {e}")))
            };
            times.push(field(0)?);
            values.push(Complex64::new(field(1)?, field(2)?));
        }
        let take = |key: &str| header.iter().find(|(k, _)| k == key).map(|(_, v)| v.clone());
        let parse_usize = |key: &str| take(key).and_then(|v| v.parse().ok()).unwrap_or(0);
        let n_trajectories = parse_usize("n_trajectories");
        let n_used = parse_usize("n_used");
        let seed = take("seed").and_then(|v| v.parse().ok()).unwrap_or(0);
        let known = ["seed", "n_trajectories", "n_used", "discard_fraction"];
        let metadata = header.into_iter().filter(|(k, _)| !known.contains(&k.as_str())).collect();
        let n = values.len();
        Ok(CorrelationSeries {
            times,
            values,
            std_error: vec![0.0; n],
            n_trajectories,
            n_used,
            n_discarded: n_trajectories.saturating_sub(n_used),
            seed,
            metadata,
        })
    }
}

fn csv_error(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn detects_non_uniform_grid() {
        let mut s = CorrelationSeries::deterministic(0.1, vec![Complex64::new(1.0, 0.0); 5]);
        assert!((s.spacing().unwrap() - 0.1).abs() < 1e-15);
        s.times[3] += 0.01;
        assert!(matches!(s.spacing(), Err(Error::NonUniformGrid(_))));
    }

    #[test]
    fn truncation_keeps_endpoint() {
        let s = CorrelationSeries::deterministic(0.5, vec![Complex64::new(1.0, 0.0); 11]);
        assert_eq!(s.truncated(2.0).len(), 5);
    }

    proptest! {
        #[test]
        fn csv_round_trip(values in prop::collection::vec((-1e3f64..1e3, -1e3f64..1e3), 2..40),
                          seed in any::<u64>()) {
            let mut s = CorrelationSeries::deterministic(
                0.01,
                values.iter().map(|&(a, b)| Complex64::new(a, b)).collect(),
            );
            s.seed = seed;
            s.n_trajectories = 10;
            s.n_used = 9;
            s.n_discarded = 1;
            s.push_metadata("source", "test");
            let mut buf = Vec::new();
            s.write_csv(&mut buf).unwrap();
            let back = CorrelationSeries::read_csv(buf.as_slice()).unwrap();
            prop_assert_eq!(back.values, s.values);
            prop_assert_eq!(back.times, s.times);
            prop_assert_eq!(back.seed, seed);
            prop_assert_eq!(back.n_discarded, 1);
            prop_assert_eq!(back.metadata, s.metadata);
        }
    }
}
