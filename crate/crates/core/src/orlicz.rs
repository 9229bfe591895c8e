//! Trace modular `τ(Φ(|x|))`, the Luxemburg norm, the Amemiya (Orlicz) norm
//! and the noncommutative `L_p` norm.

use serde::Serialize;

use crate::algebra::{BlockElement, TraceSpec};
use crate::nfunction::NFunction;
use crate::roots::{bracket_minimum, golden_section, MAX_ITER};
use crate::{Error, Result};

/// Relative bracket width at which the Minkowski bisection stops.
pub const NORM_REL_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ModularValue {
    pub value: f64,
    /// Set when the sum left the range of `f64`; `value` is then `+∞`.
    pub overflow: bool,
}

impl ModularValue {
    fn from_sum(value: f64) -> Self {
        ModularValue {
            value,
            overflow: value.is_infinite(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct NormResult {
    #[serde(rename = "norm")]
    pub value: f64,
    /// Modular of `x / value`; 1 up to the bisection tolerance.
    pub modular_at_norm: f64,
    pub iterations: usize,
}

impl NormResult {
    fn zero() -> Self {
        NormResult {
            value: 0.0,
            modular_at_norm: 0.0,
            iterations: 0,
        }
    }
}

/// Weighted singular values `(wₖ, sⱼ⁽ᵏ⁾)` of an element; everything the
/// unitarily invariant quantities here need.
#[derive(Clone, Debug)]
pub struct Spectrum {
    parts: Vec<(f64, Vec<f64>)>,
}

impl Spectrum {
    pub fn of(tau: &TraceSpec, x: &BlockElement) -> Result<Self> {
        tau.check_shape(x)?;
        if x.blocks().iter().flat_map(|b| b.iter()).any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite("element entries".into()));
        }
        Ok(Spectrum {
            parts: tau.weights().iter().copied().zip(x.singular_values()).collect(),
        })
    }

    /// Commutative spectrum from coordinate masses and absolute values.
    pub fn from_parts(parts: Vec<(f64, Vec<f64>)>) -> Self {
        Spectrum { parts }
    }

    pub fn max(&self) -> f64 {
        self.parts.iter().flat_map(|(_, s)| s.iter().copied()).fold(0.0, f64::max)
    }

    /// `Σₖ wₖ Σⱼ Φ(c·sⱼ)`.
    pub fn modular(&self, nf: &NFunction, c: f64) -> f64 {
        self.parts
            .iter()
            .map(|(w, s)| w * s.iter().map(|&v| nf.phi(c * v)).sum::<f64>())
            .sum()
    }

    pub fn power_sum(&self, p: f64, c: f64) -> f64 {
        self.parts
            .iter()
            .map(|(w, s)| w * s.iter().map(|&v| (c * v).powf(p)).sum::<f64>())
            .sum()
    }
}

/// `τ(Φ(|x|))` from the singular values of each block.
pub fn modular(nf: &NFunction, tau: &TraceSpec, x: &BlockElement) -> Result<ModularValue> {
    Ok(ModularValue::from_sum(Spectrum::of(tau, x)?.modular(nf, 1.0)))
}

/// `inf{λ > 0 : modular(x/λ) ≤ 1}`.
pub fn luxemburg_norm(nf: &NFunction, tau: &TraceSpec, x: &BlockElement) -> Result<NormResult> {
    let spec = Spectrum::of(tau, x)?;
    let top = spec.max();
    if top == 0.0 {
        return Ok(NormResult::zero());
    }
    minkowski_bisect(nf, tau.total_mass(), top, |lambda| spec.modular(nf, 1.0 / lambda))
}

/// Bisection for the Minkowski functional of `{modular ≤ 1}`, where
/// `modular_at(λ)` evaluates the modular of `x/λ` (continuous and strictly
/// decreasing in `λ` for `x ≠ 0`). `op_bound` must bound the operator norm
/// of the element the modular sees; with `mass = τ(1)` it seeds the upper
/// bracket at `op_bound / Φ⁻¹(1/τ(1))`, which already has modular ≤ 1.
pub(crate) fn minkowski_bisect<F: FnMut(f64) -> f64>(
    nf: &NFunction,
    mass: f64,
    op_bound: f64,
    mut modular_at: F,
) -> Result<NormResult> {
    // overflow (inf) and NaN both count as "outside the unit ball"
    let inside = |m: f64| m <= 1.0;
    let mut iterations = 0;
    let mut hi = op_bound / nf.inverse(1.0 / mass)?;
    if !(hi > 0.0 && hi.is_finite()) {
        return Err(Error::NonFinite(format!("initial bracket {hi}")));
    }
    let mut m_hi = modular_at(hi);
    while !inside(m_hi) {
        hi *= 2.0;
        m_hi = modular_at(hi);
        iterations += 1;
        if iterations > MAX_ITER || !hi.is_finite() {
            return Err(Error::NoConvergence("upper bracket for the norm".into()));
        }
    }
    if m_hi == 1.0 {
        return Ok(NormResult {
            value: hi,
            modular_at_norm: m_hi,
            iterations,
        });
    }
    let mut lo = 0.5 * hi;
    loop {
        let m_lo = modular_at(lo);
        iterations += 1;
        if !inside(m_lo) || m_lo == 1.0 {
            if m_lo == 1.0 {
                return Ok(NormResult {
                    value: lo,
                    modular_at_norm: m_lo,
                    iterations,
                });
            }
            break;
        }
        hi = lo;
        m_hi = m_lo;
        lo *= 0.5;
        if lo < f64::MIN_POSITIVE || iterations > 4 * MAX_ITER {
            return Err(Error::NoConvergence("lower bracket for the norm".into()));
        }
    }
    while hi - lo > NORM_REL_TOL * hi && iterations < 4 * MAX_ITER {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let m = modular_at(mid);
        iterations += 1;
        if m == 1.0 {
            return Ok(NormResult {
                value: mid,
                modular_at_norm: m,
                iterations,
            });
        }
        if inside(m) {
            hi = mid;
            m_hi = m;
        } else {
            lo = mid;
        }
    }
    Ok(NormResult {
        value: hi,
        modular_at_norm: m_hi,
        iterations,
    })
}

/// `(τ(|x|^p))^{1/p}`.
pub fn lp_norm(tau: &TraceSpec, x: &BlockElement, p: f64) -> Result<f64> {
    if !(p >= 1.0 && p.is_finite()) {
        return Err(Error::Domain(format!("L_p norm needs p ≥ 1, got {p}")));
    }
    let spec = Spectrum::of(tau, x)?;
    let top = spec.max();
    if top == 0.0 {
        return Ok(0.0);
    }
    Ok(top * spec.power_sum(p, 1.0 / top).powf(1.0 / p))
}

/// Amemiya norm `inf_{k>0} (1 + τ(Φ(k|y|)))/k`, minimized over `ln k` by
/// golden-section search.
pub fn amemiya_norm(nf: &NFunction, tau: &TraceSpec, y: &BlockElement) -> Result<f64> {
    let spec = Spectrum::of(tau, y)?;
    let top = spec.max();
    if top == 0.0 {
        return Ok(0.0);
    }
    let lux = minkowski_bisect(nf, tau.total_mass(), top, |lambda| spec.modular(nf, 1.0 / lambda))?;
    Ok(amemiya_from(|k| spec.modular(nf, k), lux.value))
}

/// Minimizes `(1 + M(k))/k` given a modular `M` and the Luxemburg norm
/// (which places the minimizer within a factor of a few of `1/lux`).
pub(crate) fn amemiya_from<M: Fn(f64) -> f64>(modular: M, lux: f64) -> f64 {
    let g = |u: f64| {
        let k = u.exp();
        let v = (1.0 + modular(k)) / k;
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    };
    let (a, b) = bracket_minimum(&g, -lux.ln(), 0.25);
    golden_section(g, a, b, 1e-11).1
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{BlockShape, C64};
    use crate::random::{self, rng_for};
    use approx::assert_relative_eq;
    use nalgebra::DMatrix;

    fn c(v: f64) -> C64 {
        C64::new(v, 0.0)
    }

    /// Modular recomputed from eigenvalues of x*x instead of the SVD.
    fn eigen_modular(nf: &NFunction, tau: &TraceSpec, x: &BlockElement) -> f64 {
        let xx = x.adjoint().mul(x).unwrap();
        let eig = xx.hermitian_eigen().unwrap();
        tau.weights()
            .iter()
            .zip(&eig.values)
            .map(|(w, ev)| w * ev.iter().map(|&l| nf.phi(l.max(0.0).sqrt())).sum::<f64>())
            .sum()
    }

    #[test]
    fn modular_examples() {
        let p2 = NFunction::power(2.0).unwrap();
        let shape = BlockShape::new(vec![2]).unwrap();
        let tau = TraceSpec::standard(&shape);
        assert_eq!(modular(&p2, &tau, &BlockElement::zeros(&shape)).unwrap().value, 0.0);
        let one = BlockElement::identity(&shape);
        assert_relative_eq!(modular(&p2, &tau, &one).unwrap().value, 1.0, max_relative = 1e-15);

        let mut rng = rng_for(11, "modular", 0);
        let shape = BlockShape::new(vec![4]).unwrap();
        let tau = random::trace(&mut rng, &shape);
        for nf in random::nfunction_family() {
            let x = random::element(&mut rng, &shape);
            let a = modular(&nf, &tau, &x).unwrap().value;
            let b = eigen_modular(&nf, &tau, &x);
            assert_relative_eq!(a, b, max_relative = 1e-10);
        }
    }

    #[test]
    fn modular_flags_overflow() {
        let p3 = NFunction::power(3.0).unwrap();
        let x = BlockElement::real_diagonal(&[1e200]).unwrap();
        let tau = TraceSpec::standard(x.shape());
        let m = modular(&p3, &tau, &x).unwrap();
        assert!(m.overflow);
        // the norm still comes out fine
        let n = luxemburg_norm(&p3, &tau, &x).unwrap();
        assert_relative_eq!(n.value, 1e200 / 3f64.powf(1.0 / 3.0), max_relative = 1e-11);
    }

    #[test]
    fn luxemburg_examples() {
        let shape = BlockShape::new(vec![3]).unwrap();
        let tau = TraceSpec::standard(&shape);
        for nf in random::nfunction_family() {
            assert_eq!(luxemburg_norm(&nf, &tau, &BlockElement::zeros(&shape)).unwrap().value, 0.0);
            // n·Φ(c/λ) = 1  ⇒  λ = c / Φ⁻¹(1/n)
            let cval = 2.7;
            let x = BlockElement::identity(&shape).scale(c(cval));
            let n = luxemburg_norm(&nf, &tau, &x).unwrap();
            let expect = cval / nf.inverse(1.0 / 3.0).unwrap();
            assert_relative_eq!(n.value, expect, max_relative = 1e-11);
            assert!((n.modular_at_norm - 1.0).abs() <= 1e-9);
        }
        // power case: ‖x‖_Φp = p^{-1/p} ‖x‖_p
        let mut rng = rng_for(12, "lux", 0);
        let shape = BlockShape::new(vec![3, 2]).unwrap();
        let tau = random::trace(&mut rng, &shape);
        for p in [1.5, 2.0, 3.0] {
            let nf = NFunction::power(p).unwrap();
            let x = random::hermitian_element(&mut rng, &shape);
            let lux = luxemburg_norm(&nf, &tau, &x).unwrap().value;
            let lp = lp_norm(&tau, &x, p).unwrap();
            assert_relative_eq!(lux, p.powf(-1.0 / p) * lp, max_relative = 1e-11);
        }
        let bad = BlockElement::from_blocks(vec![DMatrix::from_element(1, 1, c(f64::NAN))]);
        assert!(bad.is_err());
    }

    #[test]
    fn boundary_of_unit_ball_has_norm_one() {
        let p2 = NFunction::power(2.0).unwrap();
        let shape = BlockShape::new(vec![2]).unwrap();
        let tau = TraceSpec::standard(&shape);
        let n = luxemburg_norm(&p2, &tau, &BlockElement::identity(&shape)).unwrap();
        assert_eq!(n.value, 1.0);
        assert_eq!(n.modular_at_norm, 1.0);
    }

    #[test]
    fn lp_examples() {
        let x = BlockElement::real_diagonal(&[3.0, 4.0]).unwrap();
        let tau = TraceSpec::standard(x.shape());
        assert_relative_eq!(lp_norm(&tau, &x, 2.0).unwrap(), 5.0, max_relative = 1e-15);
        assert!(lp_norm(&tau, &x, 0.5).is_err());

        let mut rng = rng_for(13, "lp", 0);
        let shape = BlockShape::new(vec![3, 2, 1]).unwrap();
        let tau = random::trace(&mut rng, &shape);
        let pos = random::positive_element(&mut rng, &shape);
        assert_relative_eq!(lp_norm(&tau, &pos, 1.0).unwrap(), tau.trace(&pos).unwrap().re, max_relative = 1e-12);
        let x = random::element(&mut rng, &shape);
        for p in [1.0, 1.7, 2.0, 4.0] {
            let brute: f64 = tau
                .weights()
                .iter()
                .zip(x.singular_values())
                .map(|(w, s)| w * s.iter().map(|v| v.powf(p)).sum::<f64>())
                .sum::<f64>()
                .powf(1.0 / p);
            assert_relative_eq!(lp_norm(&tau, &x, p).unwrap(), brute, max_relative = 1e-12);
        }
    }

    #[test]
    fn amemiya_examples() {
        let p2 = NFunction::power(2.0).unwrap();
        let y = BlockElement::real_diagonal(&[1.0]).unwrap();
        let tau = TraceSpec::standard(y.shape());
        // min_k (1 + k²/2)/k = √2 at k = √2
        assert_relative_eq!(amemiya_norm(&p2, &tau, &y).unwrap(), 2f64.sqrt(), max_relative = 1e-12);
        assert_eq!(amemiya_norm(&p2, &tau, &BlockElement::zeros(y.shape())).unwrap(), 0.0);

        let mut rng = rng_for(14, "amemiya", 0);
        for i in 0..20 {
            let shape = random::small_shape(&mut rng);
            let tau = random::trace(&mut rng, &shape);
            let nf = random::pick(&mut rng, &random::nfunction_family()).clone();
            let y = random::element(&mut rng, &shape).scale_real(10f64.powi(i % 5 - 2));
            let am = amemiya_norm(&nf, &tau, &y).unwrap();
            let lux = luxemburg_norm(&nf, &tau, &y).unwrap().value;
            assert!(lux <= am * (1.0 + 1e-9) && am <= 2.0 * lux * (1.0 + 1e-9), "{lux} {am}");
        }
    }
}
