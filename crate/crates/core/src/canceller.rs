//! Digital-domain residual cancellation: NLMS and RLS transversal adaptive
//! filters driven by the known transmitted waveform, plus a Wiener
//! normal-equations solver used as a test oracle.
//!
//! The filter models the residual direct-path and multipath interference that
//! survives the analog stage; components uncorrelated with the reference
//! (the SOI) pass through to the error output.

use crate::error::{Error, Result};
use crate::signal::SampledSignal;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    Nlms,
    Rls,
}

/// Adaptive-filter settings; field ranges are enforced before a run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdaptiveConfig {
    pub algorithm: Algorithm,
    pub filter_length: usize,
    /// NLMS step size in (0, 2).
    pub mu: f64,
    /// NLMS normalization regularizer.
    pub eps: f64,
    /// RLS exponential forgetting factor in (0, 1].
    pub lambda: f64,
    /// RLS inverse-correlation initializer: P(0) = I / delta.
    pub delta: f64,
}

impl Default for AdaptiveConfig {
    fn default() -> Self {
        Self {
            algorithm: Algorithm::Nlms,
            filter_length: 64,
            mu: 0.5,
            eps: 1e-8,
            lambda: 0.9999,
            delta: 0.01,
        }
    }
}

impl AdaptiveConfig {
    pub fn validate(&self) -> Result<()> {
        if self.filter_length == 0 {
            return Err(Error::Config("filter_length must be at least 1".into()));
        }
        if !(self.mu > 0.0 && self.mu < 2.0) {
            return Err(Error::Config(format!("mu must lie in (0, 2), got {}", self.mu)));
        }
        if !(self.eps > 0.0) {
            return Err(Error::Config(format!("eps must be positive, got {}", self.eps)));
        }
        if !(self.lambda > 0.0 && self.lambda <= 1.0) {
            return Err(Error::Config(format!(
                "lambda must lie in (0, 1], got {}",
                self.lambda
            )));
        }
        if !(self.delta > 0.0) {
            return Err(Error::Config(format!(
                "delta must be positive, got {}",
                self.delta
            )));
        }
        Ok(())
    }
}

/// Output of one adaptive run: the residual, final taps, and the per-sample
/// squared-error learning curve.
#[derive(Debug, Clone)]
pub struct CancellerResult {
    pub output: SampledSignal,
    pub weights: Vec<f64>,
    pub learning_curve: Vec<f64>,
}

/// Dispatch on `cfg.algorithm`.
pub fn cancel(
    desired: &SampledSignal,
    reference: &SampledSignal,
    cfg: &AdaptiveConfig,
) -> Result<CancellerResult> {
    match cfg.algorithm {
        Algorithm::Nlms => nlms_cancel(desired, reference, cfg),
        Algorithm::Rls => rls_cancel(desired, reference, cfg),
    }
}

/// Normalized LMS: w <- w + mu/(eps + ||u||^2) * e * u. The output is the
/// error sequence e(n) = d(n) - w'u(n).
pub fn nlms_cancel(
    desired: &SampledSignal,
    reference: &SampledSignal,
    cfg: &AdaptiveConfig,
) -> Result<CancellerResult> {
    cfg.validate()?;
    if cfg.algorithm != Algorithm::Nlms {
        return Err(Error::Config("nlms_cancel requires algorithm = nlms".into()));
    }
    desired.check_same_grid(reference)?;
    let l = cfg.filter_length;
    let d = desired.samples();
    let u = reference.samples();
    let n = d.len();
    let mut w = vec![0.0f64; l];
    let mut output = Vec::with_capacity(n);
    let mut curve = Vec::with_capacity(n);
    let mut taps = TapLine::new(u, l);
    for i in 0..n {
        taps.advance(i);
        let y = taps.dot(&w);
        let e = d[i] - y;
        output.push(e);
        curve.push(e * e);
        let norm = cfg.mu / (cfg.eps + taps.energy());
        taps.axpy(&mut w, norm * e);
    }
    Ok(CancellerResult {
        output: SampledSignal::new(output, desired.sample_rate())?,
        weights: w,
        learning_curve: curve,
    })
}

/// Exponentially weighted RLS with P(0) = I/delta. The output is the a
/// priori error sequence.
pub fn rls_cancel(
    desired: &SampledSignal,
    reference: &SampledSignal,
    cfg: &AdaptiveConfig,
) -> Result<CancellerResult> {
    cfg.validate()?;
    if cfg.algorithm != Algorithm::Rls {
        return Err(Error::Config("rls_cancel requires algorithm = rls".into()));
    }
    desired.check_same_grid(reference)?;
    let l = cfg.filter_length;
    let d = desired.samples();
    let u = reference.samples();
    let n = d.len();
    let mut w = vec![0.0f64; l];
    // P stored row-major; initialized to I/delta.
    let mut p = vec![0.0f64; l * l];
    for i in 0..l {
        p[i * l + i] = 1.0 / cfg.delta;
    }
    let mut pu = vec![0.0f64; l];
    let mut k = vec![0.0f64; l];
    let mut output = Vec::with_capacity(n);
    let mut curve = Vec::with_capacity(n);
    let mut taps = TapLine::new(u, l);
    let inv_lambda = 1.0 / cfg.lambda;
    for i in 0..n {
        taps.advance(i);
        // pu = P u
        for (r, pu_r) in pu.iter_mut().enumerate() {
            *pu_r = taps.dot(&p[r * l..(r + 1) * l]);
        }
        let upu = taps.dot(&pu);
        let denom = cfg.lambda + upu;
        for j in 0..l {
            k[j] = pu[j] / denom;
        }
        let y = taps.dot(&w);
        let e = d[i] - y;
        output.push(e);
        curve.push(e * e);
        for j in 0..l {
            w[j] += k[j] * e;
        }
        // P <- (P - k (P u)') / lambda; with symmetric P, u'P = (P u)'.
        for r in 0..l {
            let kr = k[r];
            let row = &mut p[r * l..(r + 1) * l];
            for (c, row_c) in row.iter_mut().enumerate() {
                *row_c = (*row_c - kr * pu[c]) * inv_lambda;
            }
        }
    }
    Ok(CancellerResult {
        output: SampledSignal::new(output, desired.sample_rate())?,
        weights: w,
        learning_curve: curve,
    })
}

/// Solve the time-averaged normal equations R w = p directly: the MMSE taps
/// the adaptive filters converge toward on stationary inputs.
#[derive(Debug, Clone)]
pub struct WienerSolution {
    pub weights: Vec<f64>,
    /// Set when R needed a ridge to factor.
    pub regularized: bool,
}

pub fn wiener_oracle(
    desired: &SampledSignal,
    reference: &SampledSignal,
    filter_length: usize,
) -> Result<WienerSolution> {
    if filter_length == 0 {
        return Err(Error::Config("filter_length must be at least 1".into()));
    }
    desired.check_same_grid(reference)?;
    let n = desired.len();
    if n < 10 * filter_length {
        return Err(Error::TooShort {
            needed: 10 * filter_length,
            len: n,
        });
    }
    let l = filter_length;
    let d = desired.samples();
    let u = reference.samples();
    let mut r = vec![0.0f64; l * l];
    let mut p = vec![0.0f64; l];
    let count = (n - l + 1) as f64;
    for i in (l - 1)..n {
        for a in 0..l {
            let ua = u[i - a];
            p[a] += ua * d[i];
            for b in a..l {
                r[a * l + b] += ua * u[i - b];
            }
        }
    }
    for a in 0..l {
        for b in a..l {
            let v = r[a * l + b] / count;
            r[a * l + b] = v;
            r[b * l + a] = v;
        }
        p[a] /= count;
    }
    let trace: f64 = (0..l).map(|i| r[i * l + i]).sum();
    match cholesky_solve(&r, &p, l) {
        Some(weights) => Ok(WienerSolution {
            weights,
            regularized: false,
        }),
        None => {
            let ridge = 1e-10 * trace / l as f64;
            let mut r2 = r;
            for i in 0..l {
                r2[i * l + i] += ridge;
            }
            let weights = cholesky_solve(&r2, &p, l).ok_or_else(|| {
                Error::Config("normal equations singular even after ridge".into())
            })?;
            Ok(WienerSolution {
                weights,
                regularized: true,
            })
        }
    }
}

/// Cholesky factorization + solve for a symmetric positive-definite system.
fn cholesky_solve(a: &[f64], b: &[f64], n: usize) -> Option<Vec<f64>> {
    let mut l = vec![0.0f64; n * n];
    for i in 0..n {
        for j in 0..=i {
            let mut sum = a[i * n + j];
            for k in 0..j {
                sum -= l[i * n + k] * l[j * n + k];
            }
            if i == j {
                if sum <= 0.0 {
                    return None;
                }
                l[i * n + i] = sum.sqrt();
            } else {
                l[i * n + j] = sum / l[j * n + j];
            }
        }
    }
    // Forward then back substitution.
    let mut y = vec![0.0f64; n];
    for i in 0..n {
        let mut sum = b[i];
        for k in 0..i {
            sum -= l[i * n + k] * y[k];
        }
        y[i] = sum / l[i * n + i];
    }
    let mut x = vec![0.0f64; n];
    for i in (0..n).rev() {
        let mut sum = y[i];
        for k in (i + 1)..n {
            sum -= l[k * n + i] * x[k];
        }
        x[i] = sum / l[i * n + i];
    }
    Some(x)
}

/// Sliding reference tap vector u(n) = [u(n), u(n-1), ..., u(n-L+1)] with an
/// implicit zero history before the first sample.
struct TapLine<'a> {
    u: &'a [f64],
    buf: Vec<f64>,
    energy: f64,
}

impl<'a> TapLine<'a> {
    fn new(u: &'a [f64], l: usize) -> Self {
        Self {
            u,
            buf: vec![0.0; l],
            energy: 0.0,
        }
    }

    fn advance(&mut self, i: usize) {
        let l = self.buf.len();
        let leaving = self.buf[l - 1];
        self.energy -= leaving * leaving;
        for j in (1..l).rev() {
            self.buf[j] = self.buf[j - 1];
        }
        self.buf[0] = self.u[i];
        self.energy += self.u[i] * self.u[i];
        // Guard against drift in the running sum.
        if self.energy < 0.0 {
            self.energy = self.buf.iter().map(|v| v * v).sum();
        }
    }

    fn dot(&self, w: &[f64]) -> f64 {
        self.buf.iter().zip(w).map(|(a, b)| a * b).sum()
    }

    fn axpy(&self, w: &mut [f64], scale: f64) {
        for (wj, uj) in w.iter_mut().zip(&self.buf) {
            *wj += scale * uj;
        }
    }

    fn energy(&self) -> f64 {
        self.energy.max(0.0)
    }
}
