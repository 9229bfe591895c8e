//! Two traces `ν` and `μ = ν(h·)` on `ℓ∞` whose weighted Orlicz norms
//! `‖·‖_{Φ,1}^{μ,ν}` and `‖·‖_{Φ,1}^{μ,μ}` are not equivalent on finite
//! sequences, for `Φ(t) = |t|^β(ln|t| + 1)`.
//!
//! The sequences involve magnitudes like `e^{2βi²}`, far outside `f64` for
//! moderate `i`, so everything here is evaluated in the log domain and the
//! large exponents cancel before exponentiation.

use std::ops::{Add, Mul};

use serde::Serialize;

use crate::{Error, Result};

/// A real number stored as sign and natural log of its magnitude.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LogScalar {
    /// −1, 0 or +1.
    pub sign: i8,
    /// `ln |value|`; meaningless when `sign == 0`.
    pub logmag: f64,
}

impl LogScalar {
    pub const ZERO: LogScalar = LogScalar {
        sign: 0,
        logmag: f64::NEG_INFINITY,
    };

    pub const ONE: LogScalar = LogScalar { sign: 1, logmag: 0.0 };

    /// Positive number `e^{logmag}`.
    pub fn exp(logmag: f64) -> Self {
        LogScalar { sign: 1, logmag }
    }

    pub fn from_f64(v: f64) -> Self {
        if v == 0.0 {
            Self::ZERO
        } else {
            LogScalar {
                sign: if v > 0.0 { 1 } else { -1 },
                logmag: v.abs().ln(),
            }
        }
    }

    pub fn to_f64(self) -> f64 {
        match self.sign {
            0 => 0.0,
            s => s as f64 * self.logmag.exp(),
        }
    }

    pub fn is_zero(self) -> bool {
        self.sign == 0
    }

    pub fn abs(self) -> Self {
        LogScalar {
            sign: self.sign.abs(),
            logmag: self.logmag,
        }
    }

    pub fn recip(self) -> Self {
        assert!(self.sign != 0, "reciprocal of zero");
        LogScalar {
            sign: self.sign,
            logmag: -self.logmag,
        }
    }

    pub fn sum<I: IntoIterator<Item = LogScalar>>(items: I) -> Self {
        items.into_iter().fold(Self::ZERO, Self::add)
    }
}

impl Mul for LogScalar {
    type Output = Self;

    fn mul(self, other: Self) -> Self {
        if self.sign == 0 || other.sign == 0 {
            return Self::ZERO;
        }
        LogScalar {
            sign: self.sign * other.sign,
            logmag: self.logmag + other.logmag,
        }
    }
}

impl Add for LogScalar {
    type Output = Self;

    /// Stable addition: `ln(e^a ± e^b) = max + ln(1 ± e^{−|a−b|})`.
    fn add(self, other: Self) -> Self {
        if self.sign == 0 {
            return other;
        }
        if other.sign == 0 {
            return self;
        }
        let (big, small) = if self.logmag >= other.logmag { (self, other) } else { (other, self) };
        let d = small.logmag - big.logmag;
        if big.sign == small.sign {
            LogScalar {
                sign: big.sign,
                logmag: big.logmag + d.exp().ln_1p(),
            }
        } else if d == 0.0 {
            Self::ZERO
        } else {
            LogScalar {
                sign: big.sign,
                logmag: big.logmag + (-d.exp()).ln_1p(),
            }
        }
    }
}

/// `ln Φ(e^L)` for `Φ(t) = t^β(ln t + 1)` on `t ≥ 1`, joined to `t^{β+1}`
/// below 1 (the same N-function as the log-power density kind).
pub fn ln_phi_of_exp(beta: f64, log_t: f64) -> f64 {
    if log_t >= 0.0 {
        beta * log_t + log_t.ln_1p()
    } else {
        (beta + 1.0) * log_t
    }
}

/// `Φ` applied to a log-domain argument.
pub fn phi_log(beta: f64, t: LogScalar) -> LogScalar {
    if t.is_zero() {
        LogScalar::ZERO
    } else {
        LogScalar::exp(ln_phi_of_exp(beta, t.logmag))
    }
}

/// Per-index data of the construction, all in the log domain.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct ExampleRecord {
    pub i: usize,
    /// `ν(fᵢ) = (1/i²)·(e^{2βi²}(2i² + 1))^{−1}`.
    pub nu: LogScalar,
    /// `hᵢ = Φ(e^{i²}) = e^{βi²}(i² + 1)`.
    pub h: LogScalar,
    /// `Φ⁻¹(hᵢ) = e^{i²}`.
    pub f: LogScalar,
}

#[derive(Clone, Debug, Serialize)]
pub struct ExampleData {
    pub beta: f64,
    pub n_max: usize,
    /// Records for `i = 1..=n_max`.
    pub records: Vec<ExampleRecord>,
}

pub const DEFAULT_BETA: f64 = 2.0;
pub const DEFAULT_N_MAX: usize = 10;
pub const MAX_N_MAX: usize = 64;

/// Notes on how the construction's printed formulas are read.
pub const NOTES: [&str; 2] = [
    "h_i is taken as Phi(e^{i^2}) = e^{beta i^2}(i^2+1) (product), so that Phi^{-1}(h) = {e^{i^2}} holds exactly; a sum e^{beta i^2}+(i^2+1) would not invert to e^{i^2}",
    "the lower bound for the mu,mu modular of x_n is the harmonic partial sum sum_{i=2}^n 1/i, matching the per-term bound 1/i",
];

pub fn build_example(beta: f64, n_max: usize) -> Result<ExampleData> {
    if !(beta > 1.0 && beta.is_finite()) {
        return Err(Error::Domain(format!("β must exceed 1, got {beta}")));
    }
    if !(2..=MAX_N_MAX).contains(&n_max) {
        return Err(Error::Domain(format!("n_max must lie in 2..={MAX_N_MAX}, got {n_max}")));
    }
    let records = (1..=n_max)
        .map(|i| {
            let i2 = (i * i) as f64;
            let li = (i as f64).ln();
            ExampleRecord {
                i,
                nu: LogScalar::exp(-2.0 * li - 2.0 * beta * i2 - (2.0 * i2 + 1.0).ln()),
                h: LogScalar::exp(beta * i2 + (i2 + 1.0).ln()),
                f: LogScalar::exp(i2),
            }
        })
        .collect();
    Ok(ExampleData { beta, n_max, records })
}

impl ExampleData {
    fn check_n(&self, n: usize) -> Result<()> {
        if !(2..=self.n_max).contains(&n) {
            return Err(Error::Domain(format!("n must lie in 2..={}, got {n}", self.n_max)));
        }
        Ok(())
    }

    pub fn record(&self, i: usize) -> &ExampleRecord {
        &self.records[i - 1]
    }

    /// `(x_n)ᵢ`: `e^{i²}` for `2 ≤ i ≤ n`, zero otherwise.
    pub fn x_n(&self, n: usize, i: usize) -> LogScalar {
        if (2..=n).contains(&i) {
            LogScalar::exp((i * i) as f64)
        } else {
            LogScalar::ZERO
        }
    }

    /// Terms `νᵢ Φ(fᵢ (x_n)ᵢ / λ)` of `O^{μ,ν}(x_n/λ)`, given `ln λ`.
    fn mu_nu_terms(&self, n: usize, log_lambda: f64) -> impl Iterator<Item = LogScalar> + '_ {
        (2..=n).map(move |i| {
            let r = self.record(i);
            let arg = r.f.mul(self.x_n(n, i)).mul(LogScalar::exp(-log_lambda));
            phi_log(self.beta, arg).mul(r.nu)
        })
    }

    /// Terms `νᵢ hᵢ Φ((x_n)ᵢ / λ)` of `O^{μ,μ}(x_n/λ) = μ(Φ(|x_n|/λ))`.
    fn mu_mu_terms(&self, n: usize, log_lambda: f64) -> impl Iterator<Item = LogScalar> + '_ {
        (2..=n).map(move |i| {
            let r = self.record(i);
            let arg = self.x_n(n, i).mul(LogScalar::exp(-log_lambda));
            phi_log(self.beta, arg).mul(r.h).mul(r.nu)
        })
    }

    /// Per-term values `νᵢ Φ(fᵢ (x_n)ᵢ)`, each equal to `1/i²`.
    pub fn mu_nu_term_values(&self, n: usize) -> Result<Vec<f64>> {
        self.check_n(n)?;
        Ok(self.mu_nu_terms(n, 0.0).map(LogScalar::to_f64).collect())
    }

    /// Per-term values of the `μ,μ` modular: `(i² + 1)²/(i²(2i² + 1))`.
    pub fn mu_mu_term_values(&self, n: usize) -> Result<Vec<f64>> {
        self.check_n(n)?;
        Ok(self.mu_mu_terms(n, 0.0).map(LogScalar::to_f64).collect())
    }

    /// `O_{Φ,1}^{μ,ν}(x_n) = Σ_{i=2}^n 1/i²`.
    pub fn modular_mu_nu(&self, n: usize) -> Result<f64> {
        self.check_n(n)?;
        Ok(self.mu_nu_terms(n, 0.0).map(LogScalar::to_f64).sum())
    }

    /// `O_{Φ,1}^{μ,μ}(x_n)`.
    pub fn modular_mu_mu(&self, n: usize) -> Result<f64> {
        self.check_n(n)?;
        Ok(self.mu_mu_terms(n, 0.0).map(LogScalar::to_f64).sum())
    }

    /// `‖x_n‖_{Φ,1}^{μ,ν}`.
    pub fn norm_mu_nu(&self, n: usize) -> Result<f64> {
        self.check_n(n)?;
        log_domain_norm(|ll| LogScalar::sum(self.mu_nu_terms(n, ll)))
    }

    /// `‖x_n‖_{Φ,1}^{μ,μ}`.
    pub fn norm_mu_mu(&self, n: usize) -> Result<f64> {
        self.check_n(n)?;
        log_domain_norm(|ll| LogScalar::sum(self.mu_mu_terms(n, ll)))
    }

    /// `‖x_n‖^{μ,μ} / ‖x_n‖^{μ,ν}`.
    pub fn norm_ratio(&self, n: usize) -> Result<f64> {
        Ok(self.norm_mu_mu(n)? / self.norm_mu_nu(n)?)
    }

    pub fn table(&self) -> Result<Vec<ExampleRow>> {
        (2..=self.n_max)
            .map(|n| {
                let norm_mu_nu = self.norm_mu_nu(n)?;
                let norm_mu_mu = self.norm_mu_mu(n)?;
                Ok(ExampleRow {
                    n,
                    modular_mu_nu: self.modular_mu_nu(n)?,
                    modular_mu_mu: self.modular_mu_mu(n)?,
                    modular_mu_mu_lower: harmonic_tail(n),
                    norm_mu_nu,
                    norm_mu_mu,
                    ratio: norm_mu_mu / norm_mu_nu,
                })
            })
            .collect()
    }
}

/// `Σ_{i=2}^n 1/i`.
pub fn harmonic_tail(n: usize) -> f64 {
    (2..=n).map(|i| 1.0 / i as f64).sum()
}

/// `Σ_{i=2}^n 1/i²`.
pub fn inverse_square_tail(n: usize) -> f64 {
    (2..=n).map(|i| 1.0 / (i * i) as f64).sum()
}

/// Minkowski functional from a log-domain modular `λ ↦ O(x/λ)` given as a
/// function of `ln λ`; bisection on `ln λ`.
fn log_domain_norm<F: Fn(f64) -> LogScalar>(modular: F) -> Result<f64> {
    let outside = |ll: f64| {
        let m = modular(ll);
        !m.is_zero() && m.logmag > 0.0
    };
    let (mut lo, mut hi) = (0.0_f64, 0.0_f64);
    let mut steps = 0;
    while outside(hi) {
        hi += 1.0;
        steps += 1;
        if steps > 10_000 {
            return Err(Error::NoConvergence("log-domain upper bracket".into()));
        }
    }
    while !outside(lo) {
        lo -= 1.0;
        steps += 1;
        if steps > 10_000 {
            return Err(Error::NoConvergence("log-domain lower bracket".into()));
        }
    }
    for _ in 0..crate::roots::MAX_ITER {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if outside(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(hi.exp())
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct ExampleRow {
    pub n: usize,
    pub modular_mu_nu: f64,
    pub modular_mu_mu: f64,
    pub modular_mu_mu_lower: f64,
    pub norm_mu_nu: f64,
    pub norm_mu_mu: f64,
    pub ratio: f64,
}
