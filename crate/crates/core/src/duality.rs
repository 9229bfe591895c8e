//! The pairing `f_y(x) = τ(xy)` and the norm of `f_y` on `(L_Φ, ‖·‖_Φ)`.
//!
//! The functional norm `sup{|τ(xy)| : ‖x‖_Φ ≤ 1}` coincides with the Amemiya
//! norm of `y` under the complementary function `Ψ`, and is sandwiched
//! between `‖y‖_Ψ` and `2‖y‖_Ψ` in Luxemburg terms. In the commutative case
//! the supremum is attained at an explicit stationary point; for matrices a
//! projected ascent gives a certified lower bound.

use nalgebra::{DMatrix, SVD};
use rand::SeedableRng;
use serde::Serialize;

use crate::algebra::{BlockElement, TraceSpec, C64};
use crate::nfunction::NFunction;
use crate::orlicz::{amemiya_norm, luxemburg_norm};
use crate::random::{self, SuiteRng};
use crate::roots::MAX_ITER;
use crate::{Error, Result};

/// `τ(x y)`.
pub fn pairing(tau: &TraceSpec, x: &BlockElement, y: &BlockElement) -> Result<C64> {
    tau.trace(&x.mul(y)?)
}

#[derive(Clone, Debug)]
pub struct DualNormEstimate {
    /// `|τ(witness·y)|` with `‖witness‖_Φ ≤ 1`.
    pub lower: f64,
    pub upper: f64,
    pub witness: BlockElement,
}

/// Serializable summary of a dual-norm computation.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct DualReport {
    pub lower: f64,
    pub upper: f64,
    /// `‖y‖_Ψ` (Luxemburg).
    pub luxemburg: f64,
    /// Amemiya norm of `y` under `Ψ`.
    pub amemiya: f64,
}

fn coordinates(y: &BlockElement) -> Result<Vec<C64>> {
    if !y.shape().is_commutative() {
        return Err(Error::Domain("diagonal dual norm needs the commutative algebra".into()));
    }
    Ok(y.blocks().iter().map(|b| b[(0, 0)]).collect())
}

/// Exact functional norm of `f_y` in the commutative algebra.
///
/// The maximizer has `xᵢ = q(|yᵢ|/c)·ȳᵢ/|yᵢ|` with `q` the complementary
/// density and `c > 0` fixed by `Σ νᵢ Φ(|xᵢ|) = 1`.
pub fn dual_norm_diag(nf: &NFunction, tau: &TraceSpec, y: &BlockElement) -> Result<DualNormEstimate> {
    tau.check_shape(y)?;
    let ys = coordinates(y)?;
    let nu = tau.weights();
    let abs: Vec<f64> = ys.iter().map(|z| z.norm()).collect();
    let top = abs.iter().copied().fold(0.0, f64::max);
    if top == 0.0 {
        return Ok(DualNormEstimate {
            lower: 0.0,
            upper: 0.0,
            witness: BlockElement::zeros(y.shape()),
        });
    }
    let q = |s: f64| nf.density.generalized_inverse(s);
    let modular = |log_c: f64| -> f64 {
        let c = log_c.exp();
        nu.iter().zip(&abs).map(|(w, &a)| w * nf.phi(q(a / c))).sum()
    };
    // modular is nonincreasing in c: bracket log c so that m(lo) >= 1 >= m(hi)
    let (mut lo, mut hi) = (top.ln(), top.ln());
    let mut steps = 0;
    while modular(hi) > 1.0 {
        hi += std::f64::consts::LN_2;
        steps += 1;
        if steps > 4 * MAX_ITER {
            return Err(Error::NoConvergence("dual multiplier upper bracket".into()));
        }
    }
    while modular(lo) < 1.0 {
        lo -= std::f64::consts::LN_2;
        steps += 1;
        if steps > 8 * MAX_ITER {
            return Err(Error::NoConvergence("dual multiplier lower bracket".into()));
        }
    }
    for _ in 0..MAX_ITER {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if modular(mid) > 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let residual = (modular(hi) - 1.0).abs();
    if residual > 1e-6 {
        // q jumps across the boundary: no stationary point on the unit sphere
        return Err(Error::NoConvergence(format!("boundary not attained, residual {residual:.3e}")));
    }
    let c = hi.exp();
    let mut value = 0.0;
    let mut witness = Vec::with_capacity(ys.len());
    for ((&z, &a), &w) in ys.iter().zip(&abs).zip(nu) {
        let t = q(a / c);
        value += w * t * a;
        witness.push(if a > 0.0 { z.conj() / a * t } else { C64::new(0.0, 0.0) });
    }
    Ok(DualNormEstimate {
        lower: value,
        upper: value,
        witness: BlockElement::diagonal(&witness)?,
    })
}

/// Bidual norm of `x` in the commutative algebra: `sup |⟨x, y⟩| / ‖f_y‖`
/// over the candidate `yᵢ = p(|xᵢ|/‖x‖_Φ)·x̄ᵢ/|xᵢ|` and any extra candidates.
pub fn bidual_norm_diag(nf: &NFunction, tau: &TraceSpec, x: &BlockElement, extra: &[BlockElement]) -> Result<f64> {
    let xs = coordinates(x)?;
    let lux = luxemburg_norm(nf, tau, x)?.value;
    if lux == 0.0 {
        return Ok(0.0);
    }
    let y0: Vec<C64> = xs
        .iter()
        .map(|z| {
            let a = z.norm();
            if a > 0.0 {
                z.conj() / a * nf.density_at(a / lux)
            } else {
                C64::new(0.0, 0.0)
            }
        })
        .collect();
    let mut best: f64 = 0.0;
    for y in std::iter::once(BlockElement::diagonal(&y0)?).chain(extra.iter().cloned()) {
        let dual = dual_norm_diag(nf, tau, &y)?.lower;
        if dual > 0.0 {
            best = best.max(pairing(tau, x, &y)?.norm() / dual);
        }
    }
    Ok(best)
}

#[derive(Clone, Copy, Debug)]
pub struct SearchOptions {
    pub restarts: usize,
    pub iterations: usize,
    pub seed: u64,
}

impl Default for SearchOptions {
    fn default() -> Self {
        SearchOptions {
            restarts: 16,
            iterations: 200,
            seed: 0,
        }
    }
}

/// `Re Σₖ tr(aₖ* bₖ)`.
fn real_inner(a: &BlockElement, b: &BlockElement) -> f64 {
    a.blocks().iter().zip(b.blocks()).map(|(u, v)| u.dotc(v).re).sum()
}

/// Gradient of `x ↦ τ(Φ(|x|))` in the real Frobenius geometry:
/// `⊕ wₖ Uₖ p(Σₖ) Vₖ*` for `xₖ = Uₖ Σₖ Vₖ*`.
fn modular_gradient(nf: &NFunction, tau: &TraceSpec, x: &BlockElement) -> BlockElement {
    let blocks = x
        .blocks()
        .iter()
        .zip(tau.weights())
        .map(|(b, &w)| {
            let svd = SVD::new(b.clone(), true, true);
            let (u, vt) = (svd.u.unwrap(), svd.v_t.unwrap());
            let d = DMatrix::from_diagonal(&svd.singular_values.map(|s| C64::new(w * nf.density_at(s), 0.0)));
            u * d * vt
        })
        .collect();
    BlockElement::from_blocks(blocks).expect("finite gradient")
}

/// Lower bound for `‖f_y‖` by projected ascent on the unit sphere of
/// `‖·‖_Φ`, with the Amemiya norm of `y` under `Ψ` as upper bound.
///
/// The first restart starts from `y*` (the gradient of `x ↦ Re τ(xy)`), the
/// others from Gaussian elements.
pub fn dual_norm_search(nf: &NFunction, tau: &TraceSpec, y: &BlockElement, opts: SearchOptions) -> Result<DualNormEstimate> {
    tau.check_shape(y)?;
    let upper = amemiya_norm(&nf.conjugate(), tau, y)?;
    let shape = y.shape().clone();
    if y.is_zero() {
        return Ok(DualNormEstimate {
            lower: 0.0,
            upper,
            witness: BlockElement::zeros(&shape),
        });
    }
    let normalize = |x: &BlockElement| -> Result<Option<BlockElement>> {
        let n = luxemburg_norm(nf, tau, x)?.value;
        Ok((n > 0.0).then(|| x.scale_real(1.0 / n)))
    };
    let y_star = y.adjoint();
    let weighted_y_star = BlockElement::from_blocks(
        y_star
            .blocks()
            .iter()
            .zip(tau.weights())
            .map(|(b, &w)| b * C64::new(w, 0.0))
            .collect(),
    )?;
    let mut rng = SuiteRng::seed_from_u64(opts.seed);
    let mut best = (0.0, BlockElement::zeros(&shape));
    for restart in 0..opts.restarts.max(1) {
        let start = if restart == 0 {
            y_star.clone()
        } else {
            random::element(&mut rng, &shape)
        };
        let Some(mut x) = normalize(&start)? else { continue };
        let mut value = pairing(tau, &x, y)?.norm();
        let mut eta = 0.5;
        for _ in 0..opts.iterations {
            let z = pairing(tau, &x, y)?;
            let phase = if z.norm() > 0.0 { z / z.norm() } else { C64::new(1.0, 0.0) };
            let grad_a = weighted_y_star.scale(phase);
            let grad_m = modular_gradient(nf, tau, &x);
            let denom = real_inner(&grad_m, &x);
            if !(denom > 0.0) {
                break;
            }
            let dir = BlockElement::lin_comb(C64::new(1.0, 0.0), &grad_a, C64::new(-value / denom, 0.0), &grad_m)?;
            let dnorm = dir.frobenius_norm();
            if dnorm <= 1e-15 * weighted_y_star.frobenius_norm() {
                break;
            }
            let base = x.frobenius_norm() / dnorm;
            let mut improved = false;
            while eta > 1e-12 {
                let trial = BlockElement::lin_comb(C64::new(1.0, 0.0), &x, C64::new(eta * base, 0.0), &dir)?;
                if let Some(cand) = normalize(&trial)? {
                    let v = pairing(tau, &cand, y)?.norm();
                    if v > value {
                        x = cand;
                        value = v;
                        eta = (eta * 1.5).min(1.0);
                        improved = true;
                        break;
                    }
                }
                eta *= 0.5;
            }
            if !improved {
                break;
            }
        }
        if value > best.0 {
            best = (value, x);
        }
    }
    Ok(DualNormEstimate {
        lower: best.0,
        upper,
        witness: best.1,
    })
}

/// Dual norm of `f_y` with both bracketing quantities under `Ψ`. Uses the
/// exact diagonal solution in the commutative algebra and ascent otherwise.
pub fn dual_report(nf: &NFunction, tau: &TraceSpec, y: &BlockElement, opts: SearchOptions) -> Result<DualReport> {
    let psi = nf.conjugate();
    let est = if y.shape().is_commutative() {
        dual_norm_diag(nf, tau, y)?
    } else {
        dual_norm_search(nf, tau, y, opts)?
    };
    Ok(DualReport {
        lower: est.lower,
        upper: est.upper,
        luxemburg: luxemburg_norm(&psi, tau, y)?.value,
        amemiya: amemiya_norm(&psi, tau, y)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::BlockShape;
    use crate::orlicz::lp_norm;
    use crate::random::rng_for;
    use approx::assert_relative_eq;
    use rand::Rng;

    #[test]
    fn pairing_examples() {
        let mut rng = rng_for(31, "pair", 0);
        let shape = BlockShape::new(vec![3, 2]).unwrap();
        let tau = random::trace(&mut rng, &shape);
        let y = random::element(&mut rng, &shape);
        let one = BlockElement::identity(&shape);
        assert_eq!(pairing(&tau, &one, &y).unwrap(), tau.trace(&y).unwrap());
        assert_eq!(pairing(&tau, &y, &BlockElement::zeros(&shape)).unwrap(), C64::new(0.0, 0.0));
        for _ in 0..20 {
            let x = random::element(&mut rng, &shape);
            let y = random::element(&mut rng, &shape);
            let bound = lp_norm(&tau, &x, 2.0).unwrap() * lp_norm(&tau, &y, 2.0).unwrap();
            assert!(pairing(&tau, &x, &y).unwrap().norm() <= bound * (1.0 + 1e-12));
        }
        assert!(pairing(&tau, &one, &BlockElement::identity(&BlockShape::new(vec![5]).unwrap())).is_err());
    }

    #[test]
    fn diag_examples() {
        let p2 = NFunction::power(2.0).unwrap();
        let y = BlockElement::real_diagonal(&[1.0]).unwrap();
        let tau = TraceSpec::standard(y.shape());
        let est = dual_norm_diag(&p2, &tau, &y).unwrap();
        assert_relative_eq!(est.lower, 2f64.sqrt(), max_relative = 1e-12);
        assert_relative_eq!(est.witness.block(0)[(0, 0)].re, 2f64.sqrt(), max_relative = 1e-12);
        let zero = dual_norm_diag(&p2, &tau, &BlockElement::zeros(y.shape())).unwrap();
        assert_eq!((zero.lower, zero.upper), (0.0, 0.0));
        let full = BlockElement::identity(&BlockShape::new(vec![2]).unwrap());
        assert!(dual_norm_diag(&p2, &TraceSpec::standard(full.shape()), &full).is_err());
    }

    #[test]
    fn diag_matches_amemiya_and_witness_is_feasible() {
        let mut rng = rng_for(32, "diag", 0);
        for nf in random::nfunction_family() {
            for _ in 0..5 {
                let n = rng.random_range(1..=6);
                let shape = BlockShape::commutative(n).unwrap();
                let tau = random::trace(&mut rng, &shape);
                let ys: Vec<f64> = (0..n).map(|_| rng.random_range(-3.0..3.0)).collect();
                let y = BlockElement::real_diagonal(&ys).unwrap();
                let est = dual_norm_diag(&nf, &tau, &y).unwrap();
                let am = amemiya_norm(&nf.conjugate(), &tau, &y).unwrap();
                assert_relative_eq!(est.lower, am, max_relative = 1e-6);
                let wn = luxemburg_norm(&nf, &tau, &est.witness).unwrap().value;
                assert!(wn <= 1.0 + 1e-9, "{wn}");
                assert_relative_eq!(pairing(&tau, &est.witness, &y).unwrap().re, est.lower, max_relative = 1e-12);
            }
        }
    }

    #[test]
    fn search_on_commuting_family_matches_diag() {
        // y = V diag(d) V* in one block; the problem reduces to ν = w on d
        let mut rng = rng_for(33, "commuting", 0);
        for nf in [NFunction::power(2.0).unwrap(), NFunction::power(3.0).unwrap(), NFunction::log_power(2.0).unwrap()] {
            let n = 3;
            let w = 1.7;
            let v = random::unitary(&mut rng, n);
            let d: Vec<f64> = (0..n).map(|_| rng.random_range(-2.0..2.0)).collect();
            let dm = DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(n, d.iter().map(|&t| C64::new(t, 0.0))));
            let y = BlockElement::single(&v * dm * v.adjoint()).unwrap();
            let tau = TraceSpec::new(y.shape().clone(), vec![w]).unwrap();
            let est = dual_norm_search(&nf, &tau, &y, SearchOptions::default()).unwrap();
            let tau_d = TraceSpec::new(BlockShape::commutative(n).unwrap(), vec![w; n]).unwrap();
            let diag = dual_norm_diag(&nf, &tau_d, &BlockElement::real_diagonal(&d).unwrap()).unwrap();
            assert!((est.lower - diag.lower).abs() <= 1e-4 * diag.lower, "{} vs {}", est.lower, diag.lower);
            assert!(est.lower <= est.upper * (1.0 + 1e-9));
        }
    }

    #[test]
    fn search_phi2_closed_form() {
        // Φ₂ is self-conjugate and ‖f_y‖ = √2 ‖y‖₂
        let mut rng = rng_for(34, "phi2", 0);
        let p2 = NFunction::power(2.0).unwrap();
        let shape = BlockShape::new(vec![3, 2]).unwrap();
        let tau = random::trace(&mut rng, &shape);
        let u = random::unitary_element(&mut rng, &shape);
        let y = u.mul(&random::positive_element(&mut rng, &shape)).unwrap();
        let est = dual_norm_search(&p2, &tau, &y, SearchOptions::default()).unwrap();
        let closed = 2f64.sqrt() * lp_norm(&tau, &y, 2.0).unwrap();
        assert_relative_eq!(est.lower, closed, max_relative = 1e-8);
        assert_relative_eq!(est.upper, closed, max_relative = 1e-8);
    }

    #[test]
    fn bidual_recovers_norm_for_powers() {
        let mut rng = rng_for(35, "bidual", 0);
        for p in [1.5, 2.0, 3.0] {
            let nf = NFunction::power(p).unwrap();
            let shape = BlockShape::commutative(4).unwrap();
            let tau = random::trace(&mut rng, &shape);
            let x = BlockElement::real_diagonal(&[0.3, -1.2, 2.0, 0.05]).unwrap();
            let extra: Vec<BlockElement> = (0..5)
                .map(|_| BlockElement::real_diagonal(&(0..4).map(|_| rng.random_range(-1.0..1.0)).collect::<Vec<_>>()).unwrap())
                .collect();
            let bi = bidual_norm_diag(&nf, &tau, &x, &extra).unwrap();
            let lux = luxemburg_norm(&nf, &tau, &x).unwrap().value;
            assert!((bi - lux).abs() <= 1e-4 * lux, "{bi} vs {lux}");
        }
    }
}
