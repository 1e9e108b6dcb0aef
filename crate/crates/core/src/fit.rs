//! Lorentzian line fitting by Nelder-Mead least squares.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const MAX_ITER: usize = 20_000;

/// amplitude · Q² / (Q² + (x − center)²)
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LorentzianFit {
    pub center: f64,
    #[serde(rename = "Q")]
    pub q: f64,
    pub amplitude: f64,
    pub residual_rms: f64,
}

impl LorentzianFit {
    pub fn eval(&self, x: f64) -> f64 {
        lorentzian(self.center, self.q, self.amplitude, x)
    }
}

pub fn lorentzian(center: f64, q: f64, amplitude: f64, x: f64) -> f64 {
    let d = x - center;
    amplitude * q * q / (q * q + d * d)
}

struct Minimum {
    x: Vec<f64>,
    f: f64,
    iterations: usize,
    converged: bool,
}

/// Plain Nelder-Mead with the usual coefficients.
fn nelder_mead(f: &dyn Fn(&[f64]) -> f64, x0: &[f64], step: f64, max_iter: usize) -> Minimum {
    let n = x0.len();
    let mut simplex: Vec<Vec<f64>> = vec![x0.to_vec()];
    for i in 0..n {
        let mut v = x0.to_vec();
        v[i] += if v[i] == 0.0 { step } else { step * v[i].abs().max(1.0) };
        simplex.push(v);
    }
    let mut values: Vec<f64> = simplex.iter().map(|v| f(v)).collect();
    let mut iterations = 0;
    let mut converged = false;
    while iterations < max_iter {
        let mut order: Vec<usize> = (0..=n).collect();
        order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
        simplex = order.iter().map(|&i| simplex[i].clone()).collect();
        values = order.iter().map(|&i| values[i]).collect();

        let f_spread = values[n] - values[0];
        let x_spread = simplex[1..]
            .iter()
            .flat_map(|v| v.iter().zip(&simplex[0]).map(|(a, b)| (a - b).abs()))
            .fold(0.0, f64::max);
        if x_spread <= 1e-8 && f_spread <= 1e-6 * values[0].abs() + 1e-30 {
            converged = true;
            break;
        }
        iterations += 1;

        let centroid: Vec<f64> =
            (0..n).map(|j| simplex[..n].iter().map(|v| v[j]).sum::<f64>() / n as f64).collect();
        let along = |t: f64| -> Vec<f64> {
            centroid.iter().zip(&simplex[n]).map(|(c, w)| c + t * (w - c)).collect()
        };
        let xr = along(-1.0);
        let fr = f(&xr);
        if fr < values[0] {
            let xe = along(-2.0);
            let fe = f(&xe);
            if fe < fr {
                simplex[n] = xe;
                values[n] = fe;
            } else {
                simplex[n] = xr;
                values[n] = fr;
            }
        } else if fr < values[n - 1] {
            simplex[n] = xr;
            values[n] = fr;
        } else {
            let (xc, fc) = if fr < values[n] {
                let xc = along(-0.5);
                let fc = f(&xc);
                (xc, fc)
            } else {
                let xc = along(0.5);
                let fc = f(&xc);
                (xc, fc)
            };
            if fc < values[n].min(fr) {
                simplex[n] = xc;
                values[n] = fc;
            } else {
                for i in 1..=n {
                    simplex[i] = simplex[i].iter().zip(&simplex[0]).map(|(a, b)| b + 0.5 * (a - b)).collect();
                    values[i] = f(&simplex[i]);
                }
            }
        }
    }
    let best = (0..=n).min_by(|&a, &b| values[a].total_cmp(&values[b])).unwrap();
    Minimum { x: simplex[best].clone(), f: values[best], iterations, converged }
}

/// Initial guess: (argmax, half width at half maximum, peak height).
pub fn seed(xs: &[f64], ys: &[f64]) -> Result<(f64, f64, f64)> {
    if xs.len() != ys.len() || xs.len() < 4 {
        return Err(Error::Validation("lorentzian fit needs at least 4 matching samples".into()));
    }
    let (imax, &ymax) = ys
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .expect("non-empty");
    if !(ymax > 0.0) {
        return Err(Error::Validation("lorentzian fit needs a positive peak".into()));
    }
    let half = 0.5 * ymax;
    let crossing = |range: &mut dyn Iterator<Item = usize>| -> Option<f64> {
        let mut prev = imax;
        for i in range {
            if ys[i] <= half {
                let frac = (ys[prev] - half) / (ys[prev] - ys[i]);
                return Some(xs[prev] + frac * (xs[i] - xs[prev]));
            }
            prev = i;
        }
        None
    };
    let left = crossing(&mut (0..imax).rev());
    let right = crossing(&mut (imax + 1..xs.len()));
    let span = (xs[xs.len() - 1] - xs[0]).abs();
    let q = match (left, right) {
        (Some(l), Some(r)) => 0.5 * (r - l),
        (Some(l), None) => xs[imax] - l,
        (None, Some(r)) => r - xs[imax],
        (None, None) => 0.25 * span,
    }
    .abs()
    .max(1e-3 * span / xs.len() as f64);
    Ok((xs[imax], q, ymax))
}

/// Least-squares Lorentzian fit of samples containing one dominant peak.
pub fn fit_lorentzian(xs: &[f64], ys: &[f64]) -> Result<LorentzianFit> {
    let (c0, q0, a0) = seed(xs, ys)?;
    // work in units of the seed so all three parameters are O(1)
    let cost = |p: &[f64]| -> f64 {
        let (c, q, a) = (c0 + p[0] * q0, p[1].abs() * q0, p[2] * a0);
        xs.iter()
            .zip(ys)
            .map(|(&x, &y)| {
                let r = (lorentzian(c, q, a, x) - y) / a0;
                r * r
            })
            .sum()
    };
    let mut start = vec![0.0, 1.0, 1.0];
    let mut total = 0;
    let mut result = None;
    // restart from the best point to shake off a collapsed simplex
    for step in [0.2, 0.02, 0.002] {
        let m = nelder_mead(&cost, &start, step, MAX_ITER);
        total += m.iterations;
        start = m.x.clone();
        result = Some(m);
    }
    let m = result.expect("ran at least once");
    let fit = LorentzianFit {
        center: c0 + m.x[0] * q0,
        q: m.x[1].abs() * q0,
        amplitude: m.x[2] * a0,
        residual_rms: (m.f / xs.len() as f64).sqrt() * a0,
    };
    if !m.converged || !fit.center.is_finite() || !fit.q.is_finite() {
        return Err(Error::Fit { iterations: total, center: fit.center, q: fit.q, amplitude: fit.amplitude });
    }
    Ok(fit)
}
