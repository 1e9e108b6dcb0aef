//! Uniform time grids, amplitude traces and their CSV form.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{norm_sqr, Vector};

/// Uniform grid of `n >= 2` points from `t_start` to `t_end` inclusive.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    pub t_start: f64,
    pub t_end: f64,
    pub n: usize,
}

impl TimeGrid {
    pub fn new(t_start: f64, t_end: f64, n: usize) -> Result<Self> {
        let g = Self { t_start, t_end, n };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::Validation(format!("time grid needs at least 2 points, got {}", self.n)));
        }
        if !self.t_start.is_finite() || !self.t_end.is_finite() || self.t_end <= self.t_start {
            return Err(Error::Validation(format!(
                "time grid needs finite t_start < t_end, got [{}, {}]",
                self.t_start, self.t_end
            )));
        }
        Ok(())
    }

    pub fn step(&self) -> f64 {
        (self.t_end - self.t_start) / (self.n - 1) as f64
    }

    pub fn points(&self) -> Vec<f64> {
        let dt = self.step();
        (0..self.n).map(|i| self.t_start + dt * i as f64).collect()
    }
}

/// Complex amplitudes sampled at a list of times.
#[derive(Clone, Debug, PartialEq)]
pub struct AmplitudeTrace<const N: usize> {
    pub times: Vec<f64>,
    pub amplitudes: Vec<Vector<N>>,
}

impl<const N: usize> AmplitudeTrace<N> {
    pub fn from_fn(grid: &TimeGrid, f: impl Fn(f64) -> Vector<N>) -> Self {
        let times = grid.points();
        let amplitudes = times.iter().map(|&t| f(t)).collect();
        Self { times, amplitudes }
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Samples of one amplitude component.
    pub fn component(&self, i: usize) -> Vec<crate::C64> {
        self.amplitudes.iter().map(|a| a[i]).collect()
    }

    pub fn populations(&self) -> Vec<[f64; N]> {
        self.amplitudes.iter().map(|a| a.map(|c| c.norm_sqr())).collect()
    }

    /// max over samples of | |C|² − 1 |.
    pub fn max_norm_drift(&self) -> f64 {
        self.amplitudes.iter().map(|a| (norm_sqr(a) - 1.0).abs()).fold(0.0, f64::max)
    }

    /// The common sample spacing, or a usage error if the grid is not uniform.
    pub fn uniform_step(&self) -> Result<f64> {
        if self.times.len() < 2 {
            return Err(Error::Usage("trace needs at least two samples".into()));
        }
        let dt = (self.times[self.times.len() - 1] - self.times[0]) / (self.times.len() - 1) as f64;
        let tol = 1e-9 * dt.abs().max(self.times[0].abs() * 1e-7);
        let uniform = self.times.windows(2).all(|w| ((w[1] - w[0]) - dt).abs() <= tol);
        if !uniform || dt <= 0.0 {
            return Err(Error::Usage("trace time grid is not uniform".into()));
        }
        Ok(dt)
    }

    /// `t, re_c1, im_c1, re_c2, im_c2[, re_c3, im_c3]`
    pub fn to_csv(&self) -> String {
        let mut header = vec!["t".to_string()];
        for i in 1..=N {
            header.push(format!("re_c{i}"));
            header.push(format!("im_c{i}"));
        }
        let mut rows = vec![header];
        for (t, a) in self.times.iter().zip(&self.amplitudes) {
            let mut row = vec![fmt_num(*t)];
            for c in a {
                row.push(fmt_num(c.re));
                row.push(fmt_num(c.im));
            }
            rows.push(row);
        }
        csv_string(&rows)
    }
}

/// Fixed 17-significant-digit scientific form used for every CSV number.
pub fn fmt_num(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn csv_string(rows: &[Vec<String>]) -> String {
    let mut out = String::new();
    for row in rows {
        let _ = writeln!(out, "{}", row.join(","));
    }
    out
}

pub fn write_file(path: &Path, contents: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
        }
    }
    std::fs::write(path, contents).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{ONE, ZERO};

    #[test]
    fn grid_points_and_validation() {
        let g = TimeGrid::new(0.0, 1.0, 5).unwrap();
        assert_eq!(g.points(), vec![0.0, 0.25, 0.5, 0.75, 1.0]);
        assert!(TimeGrid::new(0.0, 1.0, 1).is_err());
        assert!(TimeGrid::new(1.0, 1.0, 3).is_err());
    }

    #[test]
    fn csv_layout() {
        let g = TimeGrid::new(0.0, 1.0, 2).unwrap();
        let tr = AmplitudeTrace::<2>::from_fn(&g, |_| [ONE, ZERO]);
        let csv = tr.to_csv();
        let mut lines = csv.lines();
        assert_eq!(lines.next().unwrap(), "t,re_c1,im_c1,re_c2,im_c2");
        assert_eq!(
            lines.next().unwrap(),
            "0.0000000000000000e0,1.0000000000000000e0,0.0000000000000000e0,0.0000000000000000e0,0.0000000000000000e0"
        );
        assert_eq!(tr.max_norm_drift(), 0.0);
    }

    #[test]
    fn non_uniform_grid_detected() {
        let tr = AmplitudeTrace::<2> { times: vec![0.0, 1.0, 3.0], amplitudes: vec![[ONE, ZERO]; 3] };
        assert!(matches!(tr.uniform_step(), Err(Error::Usage(_))));
    }
}
