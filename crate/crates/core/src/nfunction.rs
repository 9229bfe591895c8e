//! N-functions `Φ(t) = ∫₀^{|t|} p(s) ds` given by a nondecreasing density `p`,
//! together with inverses, complementary functions and growth checks.

use serde::{Deserialize, Serialize};

use crate::roots::{invert_increasing, sup_below};
use crate::{Error, Result};

/// Right-continuous nondecreasing density `p` of an N-function.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", try_from = "DensitySpec")]
pub enum Density {
    /// `p(s) = s^{p-1}`, so `Φ(t) = |t|^p / p`.
    Power { p: f64 },
    /// `Φ(t) = |t|^β (ln|t| + 1)` for `|t| ≥ 1`, joined to `|t|^{β+1}` on
    /// `[0, 1]` so that the density stays nondecreasing down to zero.
    #[serde(rename = "logpower")]
    LogPower { beta: f64 },
    /// Piecewise-linear density through `(s, p(s))` breakpoints. A repeated
    /// abscissa encodes a jump; the last value at that abscissa wins.
    /// Beyond the last breakpoint the final segment is extended linearly.
    Table { points: Vec<[f64; 2]> },
    /// Generalized inverse `q(s) = sup{t ≥ 0 : p(t) ≤ s}` of another density.
    Inverse { of: Box<Density> },
}

#[derive(Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
enum DensitySpec {
    Power { p: f64 },
    #[serde(rename = "logpower")]
    LogPower { beta: f64 },
    Table { points: Vec<[f64; 2]> },
    Inverse { of: Box<Density> },
}

impl TryFrom<DensitySpec> for Density {
    type Error = Error;

    fn try_from(spec: DensitySpec) -> Result<Self> {
        match spec {
            DensitySpec::Power { p } => Density::power(p),
            DensitySpec::LogPower { beta } => Density::log_power(beta),
            DensitySpec::Table { points } => Density::table(points),
            DensitySpec::Inverse { of } => Ok(Density::Inverse { of }),
        }
    }
}

impl Density {
    pub fn power(p: f64) -> Result<Self> {
        if !(p > 1.0 && p.is_finite()) {
            return Err(Error::InvalidNFunction(format!("power exponent must exceed 1, got {p}")));
        }
        Ok(Density::Power { p })
    }

    pub fn log_power(beta: f64) -> Result<Self> {
        if !(beta > 1.0 && beta.is_finite()) {
            return Err(Error::InvalidNFunction(format!("log-power exponent must exceed 1, got {beta}")));
        }
        Ok(Density::LogPower { beta })
    }

    /// Validates a breakpoint table. The first point must be `(0, 0)`, the
    /// density must leave zero immediately, and the final segment must be
    /// strictly increasing in both coordinates so that `p → ∞` and the
    /// swapped (complementary) table is valid as well.
    pub fn table(points: Vec<[f64; 2]>) -> Result<Self> {
        let bad = |msg: &str| Err(Error::InvalidNFunction(format!("table: {msg}")));
        if points.len() < 2 {
            return bad("need at least two breakpoints");
        }
        if points.iter().flatten().any(|v| !v.is_finite()) {
            return bad("non-finite breakpoint");
        }
        if points[0] != [0.0, 0.0] {
            return bad("first breakpoint must be (0, 0)");
        }
        if !(points[1][0] > 0.0 && points[1][1] > 0.0) {
            return bad("density must be positive right after 0 without a jump at 0");
        }
        for w in points.windows(2) {
            let ([s0, p0], [s1, p1]) = (w[0], w[1]);
            if s1 < s0 || p1 < p0 {
                return bad("breakpoints must be nondecreasing in s and p");
            }
            if s1 == s0 && p1 == p0 {
                return bad("duplicate breakpoint");
            }
        }
        let n = points.len();
        let ([s0, p0], [s1, p1]) = (points[n - 2], points[n - 1]);
        if !(s1 > s0 && p1 > p0) {
            return bad("last segment must be strictly increasing");
        }
        Ok(Density::Table { points })
    }

    /// `p(s)` for `s ≥ 0` (right-continuous).
    pub fn value(&self, s: f64) -> f64 {
        let s = s.abs();
        match self {
            Density::Power { p } => s.powf(p - 1.0),
            Density::LogPower { beta } => {
                if s <= 1.0 {
                    (beta + 1.0) * s.powf(*beta)
                } else {
                    s.powf(beta - 1.0) * (beta * s.ln() + beta + 1.0)
                }
            }
            Density::Table { points } => table_value(points, s),
            Density::Inverse { of } => of.generalized_inverse(s),
        }
    }

    /// `Φ(t) = ∫₀^{|t|} p`.
    pub fn integral(&self, t: f64) -> f64 {
        let t = t.abs();
        match self {
            Density::Power { p } => t.powf(*p) / p,
            Density::LogPower { beta } => {
                if t <= 1.0 {
                    t.powf(beta + 1.0)
                } else {
                    t.powf(*beta) * (t.ln() + 1.0)
                }
            }
            Density::Table { points } => table_integral(points, t),
            Density::Inverse { of } => {
                // equality case of Young's inequality at q(t)
                let q = of.generalized_inverse(t);
                if q == 0.0 {
                    0.0
                } else {
                    t * q - of.integral(q)
                }
            }
        }
    }

    /// `sup{t ≥ 0 : p(t) ≤ s}`.
    pub fn generalized_inverse(&self, s: f64) -> f64 {
        match self {
            Density::Power { p } => {
                if s <= 0.0 {
                    0.0
                } else {
                    s.powf(1.0 / (p - 1.0))
                }
            }
            Density::Table { points } => {
                if s <= 0.0 {
                    0.0
                } else {
                    let swapped: Vec<[f64; 2]> = points.iter().map(|&[a, b]| [b, a]).collect();
                    table_value(&swapped, s)
                }
            }
            Density::LogPower { .. } | Density::Inverse { .. } => sup_below(|t| self.value(t), s),
        }
    }

    /// Density of the complementary N-function.
    pub fn conjugate(&self) -> Density {
        match self {
            Density::Power { p } => Density::Power { p: p / (p - 1.0) },
            Density::Table { points } => Density::Table {
                points: points.iter().map(|&[a, b]| [b, a]).collect(),
            },
            other => Density::Inverse {
                of: Box::new(other.clone()),
            },
        }
    }

    fn label(&self) -> String {
        match self {
            Density::Power { p } => format!("power({p})"),
            Density::LogPower { beta } => format!("logpower({beta})"),
            Density::Table { points } => format!("table[{}]", points.len()),
            Density::Inverse { of } => format!("conj({})", of.label()),
        }
    }
}

/// Right-continuous piecewise-linear evaluation with linear extrapolation
/// past the last breakpoint.
fn table_value(points: &[[f64; 2]], s: f64) -> f64 {
    // last index with abscissa <= s
    let j = points.partition_point(|pt| pt[0] <= s).saturating_sub(1);
    let (a, b) = if j + 1 < points.len() {
        (points[j], points[j + 1])
    } else {
        (points[points.len() - 2], points[points.len() - 1])
    };
    let [s0, p0] = a;
    let [s1, p1] = b;
    p0 + (p1 - p0) * (s - s0) / (s1 - s0)
}

fn table_integral(points: &[[f64; 2]], t: f64) -> f64 {
    let mut acc = 0.0;
    for w in points.windows(2) {
        let ([s0, p0], [s1, _]) = (w[0], w[1]);
        if s1 == s0 {
            continue;
        }
        if t <= s0 {
            return acc;
        }
        let end = t.min(s1);
        acc += 0.5 * (p0 + table_value_on(w, end)) * (end - s0);
        if t <= s1 {
            return acc;
        }
    }
    let n = points.len();
    let seg = &points[n - 2..];
    let [s_last, p_last] = points[n - 1];
    acc + 0.5 * (p_last + table_value_on(seg, t)) * (t - s_last)
}

fn table_value_on(seg: &[[f64; 2]], s: f64) -> f64 {
    let ([s0, p0], [s1, p1]) = (seg[0], seg[1]);
    p0 + (p1 - p0) * (s - s0) / (s1 - s0)
}

/// An N-function `Φ` with its label.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NFunction {
    pub density: Density,
    pub name: String,
}

/// Outcome of the sampled `(δ₂, Δ₂)` check.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Delta2Report {
    pub satisfied: bool,
    pub r_estimate: f64,
}

impl NFunction {
    pub fn new(density: Density) -> Self {
        let name = density.label();
        NFunction { density, name }
    }

    /// `Φ(t) = |t|^p / p`.
    pub fn power(p: f64) -> Result<Self> {
        Ok(Self::new(Density::power(p)?))
    }

    pub fn log_power(beta: f64) -> Result<Self> {
        Ok(Self::new(Density::log_power(beta)?))
    }

    pub fn table(points: Vec<[f64; 2]>) -> Result<Self> {
        Ok(Self::new(Density::table(points)?))
    }

    /// `Φ(t)`; NaN in, NaN out. See [`NFunction::eval`] for the checked form.
    #[inline]
    pub fn phi(&self, t: f64) -> f64 {
        self.density.integral(t)
    }

    pub fn eval(&self, t: f64) -> Result<f64> {
        if !t.is_finite() {
            return Err(Error::Domain(format!("Φ evaluated at non-finite {t}")));
        }
        Ok(self.phi(t))
    }

    /// `p(t)`, the right derivative of `Φ` on `[0, ∞)`.
    pub fn density_at(&self, t: f64) -> f64 {
        self.density.value(t)
    }

    /// The unique `t ≥ 0` with `Φ(t) = y`.
    pub fn inverse(&self, y: f64) -> Result<f64> {
        if !(y >= 0.0) {
            return Err(Error::Domain(format!("Φ⁻¹ evaluated at {y}")));
        }
        match &self.density {
            Density::Power { p } => Ok((p * y).powf(1.0 / p)),
            d => invert_increasing(|t| d.integral(t), |t| d.value(t), y).map(|(t, _)| t),
        }
    }

    /// The complementary N-function `Ψ`.
    pub fn conjugate(&self) -> NFunction {
        NFunction::new(self.density.conjugate())
    }

    /// `Φ(t) + Ψ(s) − ts`; nonnegative by Young's inequality.
    pub fn young_gap(&self, t: f64, s: f64) -> f64 {
        let psi = self.density.conjugate();
        self.phi(t) + psi.integral(s) - t * s
    }

    /// Sampled `(δ₂, Δ₂)` heuristic: `r_estimate = max Φ(kt)/Φ(t)` over the
    /// grid; the flag says the ratio shows no growth over the top decade
    /// (top-decade max ≤ 1.05 × previous-decade max). Finite samples cannot
    /// prove the condition, so the flag is advisory.
    pub fn check_delta2(&self, k: f64, grid: &[f64]) -> Result<Delta2Report> {
        if grid.is_empty() {
            return Err(Error::Domain("empty grid".into()));
        }
        if !(k > 0.0 && k.is_finite()) {
            return Err(Error::Domain(format!("k must be positive, got {k}")));
        }
        if grid.iter().any(|&t| !(t > 0.0 && t.is_finite())) {
            return Err(Error::Domain("grid points must be positive".into()));
        }
        let lo = grid.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = grid.iter().copied().fold(0.0, f64::max);
        if (hi / lo).log10() < 8.0 - 1e-9 {
            return Err(Error::Domain(format!("grid spans {:.2} decades, need 8", (hi / lo).log10())));
        }
        let ratio = |t: f64| self.phi(k * t) / self.phi(t);
        let mut r_estimate: f64 = 0.0;
        let (mut top, mut prev) = (0.0_f64, 0.0_f64);
        for &t in grid {
            let r = ratio(t);
            let r = if r.is_nan() { f64::INFINITY } else { r };
            r_estimate = r_estimate.max(r);
            if t >= hi / 10.0 {
                top = top.max(r);
            } else if t >= hi / 100.0 {
                prev = prev.max(r);
            }
        }
        let satisfied = r_estimate.is_finite() && top <= 1.05 * prev;
        Ok(Delta2Report {
            satisfied,
            r_estimate,
        })
    }
}

/// `n` logarithmically spaced points in `[lo, hi]`.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    assert!(n >= 2 && lo > 0.0 && hi > lo);
    let (a, b) = (lo.ln(), hi.ln());
    (0..n)
        .map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp())
        .collect()
}
