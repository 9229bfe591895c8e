//! Weighted Orlicz spaces `L_{Φ,α}(M, φ, τ)` for weights `φ = τ(h·)`.
//!
//! Everything goes through the map
//! `U(x) = (Φ⁻¹(h))^α x (Φ⁻¹(h))^{1−α}`; the weighted modular is
//! `τ(Φ(|U(x)|))` and the weighted norm is the Minkowski functional of its
//! unit ball.

use serde::Serialize;

use crate::algebra::{BlockElement, HermitianEigen, TraceSpec, C64};
use crate::nfunction::NFunction;
use crate::orlicz::{self, minkowski_bisect, NormResult};
use crate::{Error, Result};

/// Default cap on `λ_max(h) / λ_min(h)`.
pub const DEFAULT_MAX_CONDITION: f64 = 1e8;

/// Smallest admissible `λ_min(h) / λ_max(h)`.
pub const NONSINGULAR_RATIO: f64 = 1e-12;

/// A weight `φ = τ(h·)` with positive definite `h`, plus the interpolation
/// parameter `α ∈ [0, 1]`.
#[derive(Clone, Debug)]
pub struct WeightSpec {
    h: BlockElement,
    alpha: f64,
    eigen: HermitianEigen,
    condition: f64,
}

impl WeightSpec {
    pub fn new(h: BlockElement, alpha: f64) -> Result<Self> {
        Self::with_max_condition(h, alpha, DEFAULT_MAX_CONDITION)
    }

    pub fn with_max_condition(h: BlockElement, alpha: f64, max_condition: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&alpha) {
            return Err(Error::Domain(format!("α must lie in [0, 1], got {alpha}")));
        }
        let eigen = h.hermitian_eigen()?;
        let (lo, hi) = (eigen.min_value(), eigen.max_value());
        if !(lo > NONSINGULAR_RATIO * hi) || !(hi > 0.0) {
            return Err(Error::IllConditioned(format!("eigenvalues of h span [{lo:.3e}, {hi:.3e}]")));
        }
        let condition = hi / lo;
        if condition > max_condition {
            return Err(Error::IllConditioned(format!(
                "condition {condition:.3e} exceeds cap {max_condition:.3e}"
            )));
        }
        Ok(WeightSpec {
            h,
            alpha,
            eigen,
            condition,
        })
    }

    /// Same density, different `α`.
    pub fn with_alpha(&self, alpha: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&alpha) {
            return Err(Error::Domain(format!("α must lie in [0, 1], got {alpha}")));
        }
        Ok(WeightSpec { alpha, ..self.clone() })
    }

    /// `h = 1`: the weight is the trace itself.
    pub fn trivial(shape: &crate::BlockShape, alpha: f64) -> Result<Self> {
        Self::new(BlockElement::identity(shape), alpha)
    }

    pub fn h(&self) -> &BlockElement {
        &self.h
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn condition_bound(&self) -> f64 {
        self.condition
    }

    pub fn eigen(&self) -> &HermitianEigen {
        &self.eigen
    }

    /// `φ(x) = τ(h x)` for positive `x`.
    pub fn value(&self, tau: &TraceSpec, x: &BlockElement) -> Result<f64> {
        let hx = self.h.mul(x)?;
        Ok(tau.trace(&hx)?.re.max(0.0))
    }
}

/// `Φ` and a weight combined: caches `g^α`, `g^{1−α}` and their inverses for
/// `g = Φ⁻¹(h)`.
#[derive(Clone, Debug)]
pub struct WeightedOrlicz {
    nf: NFunction,
    left: BlockElement,
    right: BlockElement,
    left_inv: BlockElement,
    right_inv: BlockElement,
    /// `‖g^α‖_op · ‖g^{1−α}‖_op = ‖g‖_op`, bounds `U` on `(M, ‖·‖_op)`.
    u_bound: f64,
    condition: f64,
}

impl WeightedOrlicz {
    pub fn new(nf: &NFunction, weight: &WeightSpec) -> Result<Self> {
        // g = Φ⁻¹(h) shares the eigenbasis of h; invert Φ on the spectrum once
        let g_eig = weight.eigen().try_map_values(|t| nf.inverse(t))?;
        let a = weight.alpha();
        let (gmin, gmax) = (g_eig.min_value(), g_eig.max_value());
        if !(gmin > 0.0) {
            return Err(Error::IllConditioned("Φ⁻¹(h) is singular".into()));
        }
        Ok(WeightedOrlicz {
            nf: nf.clone(),
            left: g_eig.apply(|t| t.powf(a)),
            right: g_eig.apply(|t| t.powf(1.0 - a)),
            left_inv: g_eig.apply(|t| t.powf(-a)),
            right_inv: g_eig.apply(|t| t.powf(a - 1.0)),
            u_bound: gmax,
            condition: gmax / gmin,
        })
    }

    pub fn nfunction(&self) -> &NFunction {
        &self.nf
    }

    /// `λ_max(g)/λ_min(g)` for `g = Φ⁻¹(h)`.
    pub fn condition_bound(&self) -> f64 {
        self.condition
    }

    /// `U(x) = g^α x g^{1−α}`.
    pub fn u_map(&self, x: &BlockElement) -> Result<BlockElement> {
        self.left.mul(x)?.mul(&self.right)
    }

    /// `U⁻¹(y) = g^{−α} y g^{α−1}`.
    pub fn u_inverse(&self, y: &BlockElement) -> Result<BlockElement> {
        self.left_inv.mul(y)?.mul(&self.right_inv)
    }

    /// `O_{Φ,α}^{φ,τ}(x) = τ(Φ(|U(x)|))`.
    pub fn modular(&self, tau: &TraceSpec, x: &BlockElement) -> Result<f64> {
        Ok(orlicz::modular(&self.nf, tau, &self.u_map(x)?)?.value)
    }

    /// `inf{λ > 0 : O(x/λ) ≤ 1}`, with the weighted modular re-evaluated
    /// from scratch at every trial `λ`.
    pub fn norm(&self, tau: &TraceSpec, x: &BlockElement) -> Result<NormResult> {
        tau.check_shape(x)?;
        let x_op = x.op_norm();
        if x_op == 0.0 {
            return Ok(NormResult {
                value: 0.0,
                modular_at_norm: 0.0,
                iterations: 0,
            });
        }
        let mut failure = None;
        let result = minkowski_bisect(&self.nf, tau.total_mass(), self.u_bound * x_op, |lambda| {
            match self.modular(tau, &x.scale_real(1.0 / lambda)) {
                Ok(m) => m,
                Err(e) => {
                    failure.get_or_insert(e);
                    f64::NAN
                }
            }
        });
        match failure {
            Some(e) => Err(e),
            None => result,
        }
    }

    /// `λ·O(x) − O(λx)`; nonnegative for `λ ∈ [0, 1]`.
    pub fn split_gap(&self, tau: &TraceSpec, x: &BlockElement, lambda: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&lambda) {
            return Err(Error::Domain(format!("λ must lie in [0, 1], got {lambda}")));
        }
        Ok(lambda * self.modular(tau, x)? - self.modular(tau, &x.scale_real(lambda))?)
    }
}

/// `‖h^{α/p} x h^{(1−α)/p}‖_p`, the `L_p(M, φ)` norm of a weight `τ(h·)`.
pub fn trunov_lp_norm(tau: &TraceSpec, weight: &WeightSpec, x: &BlockElement, p: f64) -> Result<f64> {
    if !(p >= 1.0 && p.is_finite()) {
        return Err(Error::Domain(format!("p must be ≥ 1, got {p}")));
    }
    let a = weight.alpha();
    let eig = weight.eigen();
    let left = eig.apply(|t| t.powf(a / p));
    let right = eig.apply(|t| t.powf((1.0 - a) / p));
    orlicz::lp_norm(tau, &left.mul(x)?.mul(&right)?, p)
}

/// Report of a weighted-vs-unweighted norm comparison.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct IsometryCheck {
    pub weighted: NormResult,
    pub luxemburg_of_u: NormResult,
    pub relative_difference: f64,
}

/// Computes `‖x‖_{Φ,α}` and `‖U(x)‖_Φ` independently.
pub fn isometry_check(w: &WeightedOrlicz, tau: &TraceSpec, x: &BlockElement) -> Result<IsometryCheck> {
    let weighted = w.norm(tau, x)?;
    let ux = w.u_map(x)?;
    let luxemburg_of_u = orlicz::luxemburg_norm(w.nfunction(), tau, &ux)?;
    let scale = weighted.value.max(luxemburg_of_u.value);
    let relative_difference = if scale == 0.0 {
        0.0
    } else {
        (weighted.value - luxemburg_of_u.value).abs() / scale
    };
    Ok(IsometryCheck {
        weighted,
        luxemburg_of_u,
        relative_difference,
    })
}

/// `a x + b y` helper for real coefficients.
pub fn real_comb(a: f64, x: &BlockElement, b: f64, y: &BlockElement) -> Result<BlockElement> {
    BlockElement::lin_comb(C64::new(a, 0.0), x, C64::new(b, 0.0), y)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::BlockShape;
    use crate::random::{self, rng_for};
    use approx::assert_relative_eq;

    fn p2() -> NFunction {
        NFunction::power(2.0).unwrap()
    }

    #[test]
    fn weight_spec_validation() {
        let shape = BlockShape::new(vec![2]).unwrap();
        let one = BlockElement::identity(&shape);
        assert!(WeightSpec::new(one.clone(), 1.5).is_err());
        assert!(WeightSpec::new(one.clone(), -0.1).is_err());
        let singular = BlockElement::real_diagonal(&[1.0, 0.0]).unwrap();
        assert!(matches!(WeightSpec::new(singular, 0.5), Err(Error::IllConditioned(_))));
        let bad = BlockElement::real_diagonal(&[1.0, 1e-9]).unwrap();
        assert!(WeightSpec::new(bad.clone(), 0.5).is_err());
        assert!(WeightSpec::with_max_condition(bad, 0.5, 1e10).is_ok());
        let w = WeightSpec::new(BlockElement::real_diagonal(&[4.0, 1.0]).unwrap(), 0.5).unwrap();
        assert_relative_eq!(w.condition_bound(), 4.0, max_relative = 1e-14);
    }

    #[test]
    fn weight_value_examples() {
        let mut rng = rng_for(21, "phi", 0);
        let shape = BlockShape::new(vec![3, 2]).unwrap();
        let tau = random::trace(&mut rng, &shape);
        let x = random::positive_element(&mut rng, &shape);
        let trivial = WeightSpec::trivial(&shape, 0.5).unwrap();
        assert_relative_eq!(trivial.value(&tau, &x).unwrap(), tau.trace(&x).unwrap().re, max_relative = 1e-13);
        assert_eq!(trivial.value(&tau, &BlockElement::zeros(&shape)).unwrap(), 0.0);

        let nu = [0.3, 1.7, 5.0];
        let h = [2.0, 0.5, 9.0];
        let tau = TraceSpec::new(BlockShape::commutative(3).unwrap(), nu.to_vec()).unwrap();
        let w = WeightSpec::new(BlockElement::real_diagonal(&h).unwrap(), 1.0).unwrap();
        for i in 0..3 {
            let mut e = [0.0; 3];
            e[i] = 1.0;
            let f = BlockElement::real_diagonal(&e).unwrap();
            assert_relative_eq!(w.value(&tau, &f).unwrap(), nu[i] * h[i], max_relative = 1e-14);
        }
    }

    #[test]
    fn u_map_examples() {
        let mut rng = rng_for(22, "u", 0);
        let shape = BlockShape::new(vec![3, 1]).unwrap();
        let x = random::element(&mut rng, &shape);
        for alpha in [0.0, 0.3, 1.0] {
            let w = WeightedOrlicz::new(&p2(), &WeightSpec::trivial(&shape, alpha).unwrap()).unwrap();
            let ux = w.u_map(&x).unwrap();
            let expect = x.scale_real(2f64.sqrt());
            assert!(ux.sub(&expect).unwrap().frobenius_norm() <= 1e-14 * x.frobenius_norm());
            assert!(w.u_map(&BlockElement::zeros(&shape)).unwrap().is_zero());
            let back = w.u_inverse(&x).unwrap();
            assert!(back.sub(&x.scale_real(1.0 / 2f64.sqrt())).unwrap().frobenius_norm() <= 1e-14 * x.frobenius_norm());
            assert!(w.u_inverse(&BlockElement::zeros(&shape)).unwrap().is_zero());
        }
    }

    #[test]
    fn u_map_on_example_data_multiplies_by_f() {
        // commutative, α = 1, h_i = Φ(e^{i²}) for the log-power Φ with β = 1.1
        let beta = 1.1;
        let nf = NFunction::log_power(beta).unwrap();
        let f: Vec<f64> = (1..=2).map(|i: i32| ((i * i) as f64).exp()).collect();
        let h: Vec<f64> = f.iter().map(|&v| nf.phi(v)).collect();
        let w = WeightSpec::new(BlockElement::real_diagonal(&h).unwrap(), 1.0).unwrap();
        let wo = WeightedOrlicz::new(&nf, &w).unwrap();
        let x = BlockElement::real_diagonal(&[0.7, -2.0]).unwrap();
        let ux = wo.u_map(&x).unwrap();
        for (i, fi) in f.iter().enumerate() {
            assert_relative_eq!(ux.block(i)[(0, 0)].re, fi * x.block(i)[(0, 0)].re, max_relative = 1e-12);
        }
    }

    #[test]
    fn u_inverse_round_trip() {
        let mut rng = rng_for(23, "uinv", 0);
        for i in 0..20 {
            let shape = random::small_shape(&mut rng);
            let h = random::weight_density(&mut rng, &shape, 1e3);
            let nf = random::pick(&mut rng, &random::nfunction_family()).clone();
            let w = WeightSpec::new(h, [0.0, 0.3, 0.5, 1.0][i % 4]).unwrap();
            let wo = WeightedOrlicz::new(&nf, &w).unwrap();
            let x = random::element(&mut rng, &shape);
            let back = wo.u_inverse(&wo.u_map(&x).unwrap()).unwrap();
            let err = back.sub(&x).unwrap().frobenius_norm() / x.frobenius_norm();
            assert!(err <= 1e-9 * wo.condition_bound(), "{err}");
        }
    }

    #[test]
    fn weighted_modular_examples() {
        let shape = BlockShape::new(vec![1]).unwrap();
        let tau = TraceSpec::new(shape.clone(), vec![3.5]).unwrap();
        let w = WeightedOrlicz::new(&p2(), &WeightSpec::trivial(&shape, 0.5).unwrap()).unwrap();
        assert_eq!(w.modular(&tau, &BlockElement::zeros(&shape)).unwrap(), 0.0);
        // Φ(√2)·τ(1) = τ(1)
        let x = BlockElement::identity(&shape);
        assert_relative_eq!(w.modular(&tau, &x).unwrap(), 3.5, max_relative = 1e-14);

        // commutative α = 1: O(x) = Σ νᵢ Φ(fᵢ xᵢ) with fᵢ = Φ⁻¹(hᵢ)
        let nf = NFunction::log_power(2.0).unwrap();
        let nu = [0.2, 1.3, 0.05];
        let h = [0.5, 3.0, 40.0];
        let tau = TraceSpec::new(BlockShape::commutative(3).unwrap(), nu.to_vec()).unwrap();
        let wo = WeightedOrlicz::new(&nf, &WeightSpec::new(BlockElement::real_diagonal(&h).unwrap(), 1.0).unwrap()).unwrap();
        let xs = [1.5, -0.4, 2.0];
        let x = BlockElement::real_diagonal(&xs).unwrap();
        let expect: f64 = (0..3).map(|i| nu[i] * nf.phi(nf.inverse(h[i]).unwrap() * xs[i])).sum();
        assert_relative_eq!(wo.modular(&tau, &x).unwrap(), expect, max_relative = 1e-12);
    }

    #[test]
    fn weighted_norm_examples() {
        let mut rng = rng_for(24, "wnorm", 0);
        let shape = BlockShape::new(vec![3, 2]).unwrap();
        let tau = random::trace(&mut rng, &shape);
        let h = random::weight_density(&mut rng, &shape, 1e2);
        for nf in random::nfunction_family() {
            let wo = WeightedOrlicz::new(&nf, &WeightSpec::new(h.clone(), 0.3).unwrap()).unwrap();
            assert_eq!(wo.norm(&tau, &BlockElement::zeros(&shape)).unwrap().value, 0.0);
            let x = random::element(&mut rng, &shape);
            let chk = isometry_check(&wo, &tau, &x).unwrap();
            assert!(chk.relative_difference <= 1e-10, "{chk:?}");
            assert!((chk.weighted.modular_at_norm - 1.0).abs() <= 1e-9);
        }
        let wrong = random::element(&mut rng, &BlockShape::new(vec![2]).unwrap());
        let wo = WeightedOrlicz::new(&p2(), &WeightSpec::new(h, 0.3).unwrap()).unwrap();
        assert!(matches!(wo.norm(&tau, &wrong), Err(Error::ShapeMismatch { .. })));
    }

    #[test]
    fn trunov_examples() {
        let mut rng = rng_for(25, "trunov", 0);
        let shape = BlockShape::new(vec![3]).unwrap();
        let tau = random::trace(&mut rng, &shape);
        let x = random::element(&mut rng, &shape);
        let one = WeightSpec::trivial(&shape, 0.4).unwrap();
        for p in [1.0, 2.0, 3.5] {
            assert_relative_eq!(
                trunov_lp_norm(&tau, &one, &x, p).unwrap(),
                orlicz::lp_norm(&tau, &x, p).unwrap(),
                max_relative = 1e-13
            );
        }
        // commuting h and x: α drops out
        let h = BlockElement::real_diagonal(&[2.0, 0.5, 7.0]).unwrap();
        let d = BlockElement::real_diagonal(&[1.0, -3.0, 0.25]).unwrap();
        let tau_c = TraceSpec::standard(h.shape());
        let a0 = trunov_lp_norm(&tau_c, &WeightSpec::new(h.clone(), 0.0).unwrap(), &d, 2.5).unwrap();
        let a1 = trunov_lp_norm(&tau_c, &WeightSpec::new(h.clone(), 1.0).unwrap(), &d, 2.5).unwrap();
        assert_relative_eq!(a0, a1, max_relative = 1e-13);
        // p = 2, h = diag(4, 1), α = 1, x = 1: ‖diag(2, 1)‖₂ = √5
        let w = WeightSpec::new(BlockElement::real_diagonal(&[4.0, 1.0]).unwrap(), 1.0).unwrap();
        let x = BlockElement::real_diagonal(&[1.0, 1.0]).unwrap();
        let tau = TraceSpec::standard(x.shape());
        assert_relative_eq!(trunov_lp_norm(&tau, &w, &x, 2.0).unwrap(), 5f64.sqrt(), max_relative = 1e-14);
        assert!(trunov_lp_norm(&tau, &w, &x, 0.9).is_err());
    }

    #[test]
    fn split_gap_examples() {
        let mut rng = rng_for(26, "split_gap", 0);
        let shape = BlockShape::new(vec![2, 2]).unwrap();
        let tau = random::trace(&mut rng, &shape);
        let h = random::weight_density(&mut rng, &shape, 10.0);
        let wo = WeightedOrlicz::new(&p2(), &WeightSpec::new(h, 0.5).unwrap()).unwrap();
        let x = random::element(&mut rng, &shape);
        let o = wo.modular(&tau, &x).unwrap();
        assert!(wo.split_gap(&tau, &x, 1.0).unwrap().abs() <= 1e-14 * o);
        assert_eq!(wo.split_gap(&tau, &x, 0.0).unwrap(), 0.0);
        assert_relative_eq!(wo.split_gap(&tau, &x, 0.5).unwrap(), 0.25 * o, max_relative = 1e-12);
        assert!(wo.split_gap(&tau, &x, 1.5).is_err());
        assert!(wo.split_gap(&tau, &x, -0.5).is_err());
    }
}
