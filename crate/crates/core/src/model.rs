//! Potential representation on the complexified torus and the derived
//! constants of the localization scheme.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::scalar::{Cplx, Real};

/// Even analytic potential given as a finite cosine series
/// `v(theta) = c_0 + sum_k c_k * 2 cos(2 pi k theta)`,
/// analytic on the strip `|Im theta| <= eps0`.
///
/// Trig polynomials are entire, so any positive `eps0` is admissible; it
/// records the strip the rest of the toolkit is allowed to use.
#[derive(Debug, Clone, Serialize)]
pub struct Potential<R: Real> {
    coeffs: Vec<R>,
    eps0: R,
    sup_bound: R,
}

impl<R: Real> Potential<R> {
    pub fn new(coeffs: Vec<R>, eps0: R) -> Result<Self> {
        if eps0 <= R::zero() {
            return Err(Error::invalid("model", "eps0 must be positive"));
        }
        // sup over the strip of |v|: attained bound |c_0| + sum 2|c_k| cosh(2 pi k eps0)
        let mut sup = R::zero();
        for (k, &c) in coeffs.iter().enumerate() {
            if k == 0 {
                sup += c.abs();
            } else {
                let arg = R::tau() * R::of_usize(k) * eps0;
                sup += R::of(2.0) * c.abs() * arg.cosh();
            }
        }
        Ok(Self {
            coeffs,
            eps0,
            sup_bound: sup,
        })
    }

    /// The almost Mathieu potential `2 lambda cos(2 pi theta)`, default strip.
    pub fn amo(lambda: R) -> Self {
        Self::new(vec![R::zero(), lambda], R::of(0.05)).expect("valid eps0")
    }

    /// The zero potential (free cocycle), default strip.
    pub fn zero() -> Self {
        Self::new(vec![], R::of(0.05)).expect("valid eps0")
    }

    pub fn with_eps0(mut self, eps0: R) -> Result<Self> {
        if eps0 <= R::zero() {
            return Err(Error::invalid("model", "eps0 must be positive"));
        }
        self.eps0 = eps0;
        Ok(Self::new(self.coeffs, eps0).expect("checked"))
    }

    pub fn coeffs(&self) -> &[R] {
        &self.coeffs
    }

    pub fn eps0(&self) -> R {
        self.eps0
    }

    pub fn sup_bound(&self) -> R {
        self.sup_bound
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| *c == R::zero())
    }

    /// Analytic extension at `phase = theta + i eps`; errors outside the strip.
    pub fn eval(&self, phase: Cplx<R>) -> Result<Cplx<R>> {
        if phase.im.abs() > self.eps0 {
            return Err(Error::OutOfStrip {
                im_abs: phase.im.abs().to_f64().unwrap_or(f64::NAN),
                eps0: self.eps0.to_f64().unwrap_or(f64::NAN),
            });
        }
        Ok(self.eval_unchecked(phase))
    }

    /// Same as [`Potential::eval`] without the strip check; used by inner
    /// loops whose callers validated the strip once.
    #[inline]
    pub fn eval_unchecked(&self, phase: Cplx<R>) -> Cplx<R> {
        let mut acc = Cplx::new(R::zero(), R::zero());
        for (k, &c) in self.coeffs.iter().enumerate() {
            if k == 0 {
                acc += Cplx::new(c, R::zero());
            } else {
                let arg = phase * R::tau() * R::of_usize(k);
                acc += arg.cos() * R::of(2.0) * c;
            }
        }
        acc
    }

    /// Evaluation at a real phase.
    #[inline]
    pub fn eval_real(&self, theta: R) -> R {
        let mut acc = R::zero();
        for (k, &c) in self.coeffs.iter().enumerate() {
            if k == 0 {
                acc += c;
            } else {
                acc += R::of(2.0) * c * (R::tau() * R::of_usize(k) * theta).cos();
            }
        }
        acc
    }
}

/// Which formula produced `delta1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Delta1Source {
    /// `delta1^{1/4} = min(eps0, 1, L - beta) / (1e5 C_v max(1, L))`.
    Paper,
    /// User-supplied working value for desk-scale experiments.
    Working,
}

/// The scheme constants `(C_v, L, beta, delta1, c0, eta)`.
///
/// `in_regime` is `eta < 1/100` (strict); out-of-regime constants are still
/// returned so desk-scale runs can proceed with the flag visible.
#[derive(Debug, Clone, Serialize)]
pub struct PaperConstants {
    pub c_v: f64,
    pub lyapunov: f64,
    pub beta: f64,
    pub delta1: f64,
    pub c0: f64,
    pub eta: f64,
    pub in_regime: bool,
    pub delta1_source: Delta1Source,
}

fn finish_constants(
    delta1: f64,
    source: Delta1Source,
    lyapunov: f64,
    beta: f64,
    c_v: f64,
    eps0: f64,
) -> PaperConstants {
    let root4 = delta1.powf(0.25);
    let c0 = 10.0 * root4 / (1.0 + beta);
    let eta = 1000.0 * c_v * root4 / eps0;
    PaperConstants {
        c_v,
        lyapunov,
        beta,
        delta1,
        c0,
        eta,
        in_regime: eta < 0.01,
        delta1_source: source,
    }
}

/// Derive the constants by the defining formulas.
///
/// Errors when `L <= beta` (outside the localization regime). A result with
/// `eta >= 1/100` is flagged out-of-regime rather than rejected.
pub fn derive_constants<R: Real>(
    v: &Potential<R>,
    lyapunov: f64,
    beta: f64,
    c_v: f64,
) -> Result<PaperConstants> {
    if c_v < 1.0 {
        return Err(Error::invalid("model", "C_v must be >= 1"));
    }
    if beta < 0.0 {
        return Err(Error::invalid("model", "beta must be >= 0"));
    }
    if lyapunov <= beta {
        return Err(Error::NotInLocalizationRegime { lyapunov, beta });
    }
    let eps0 = v.eps0().to_f64().expect("eps0 finite");
    let root4 = eps0.min(1.0).min(lyapunov - beta) / (1e5 * c_v * lyapunov.max(1.0));
    let delta1 = root4.powi(4);
    Ok(finish_constants(
        delta1,
        Delta1Source::Paper,
        lyapunov,
        beta,
        c_v,
        eps0,
    ))
}

/// Same derived quantities but with a user-supplied working `delta1`.
pub fn derive_constants_working<R: Real>(
    v: &Potential<R>,
    delta1: f64,
    lyapunov: f64,
    beta: f64,
    c_v: f64,
) -> Result<PaperConstants> {
    if delta1 <= 0.0 {
        return Err(Error::invalid("model", "working delta1 must be positive"));
    }
    if lyapunov <= beta {
        return Err(Error::NotInLocalizationRegime { lyapunov, beta });
    }
    let eps0 = v.eps0().to_f64().expect("eps0 finite");
    Ok(finish_constants(
        delta1,
        Delta1Source::Working,
        lyapunov,
        beta,
        c_v,
        eps0,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn amo_values() {
        let v = Potential::<f64>::amo(2.0);
        assert_relative_eq!(v.eval_real(0.0), 4.0);
        let z = v.eval(Cplx::new(0.0, 0.03)).unwrap();
        // 2 lambda cosh(2 pi eps) at theta = 0
        assert_relative_eq!(z.re, 4.0 * (0.03 * std::f64::consts::TAU).cosh(), max_relative = 1e-14);
        assert!(z.im.abs() < 1e-14);
    }

    #[test]
    fn zero_potential_everywhere_zero() {
        let v = Potential::<f64>::zero();
        assert_eq!(v.eval_real(0.37), 0.0);
        assert_eq!(v.eval(Cplx::new(0.2, 0.01)).unwrap(), Cplx::new(0.0, 0.0));
    }

    #[test]
    fn out_of_strip_rejected() {
        let v = Potential::<f64>::amo(1.0);
        assert!(matches!(
            v.eval(Cplx::new(0.1, 0.06)),
            Err(Error::OutOfStrip { .. })
        ));
    }

    #[test]
    fn evenness_and_conjugate_symmetry() {
        let v = Potential::new(vec![0.3, 1.0, -0.25, 0.05], 0.05).unwrap();
        for i in 0..40 {
            let th = i as f64 / 40.0 - 0.5;
            assert_relative_eq!(v.eval_real(th), v.eval_real(-th), max_relative = 1e-12, epsilon = 1e-14);
            let z = Cplx::new(th, 0.02);
            let a = v.eval(z.conj()).unwrap();
            let b = v.eval(z).unwrap().conj();
            assert_relative_eq!(a.re, b.re, max_relative = 1e-12, epsilon = 1e-14);
            assert_relative_eq!(a.im, b.im, max_relative = 1e-12, epsilon = 1e-14);
        }
    }

    #[test]
    fn sup_bound_dominates_grid() {
        let v = Potential::new(vec![0.1, 0.7, 0.2], 0.04).unwrap();
        let mut grid_max: f64 = 0.0;
        for i in 0..512 {
            let th = i as f64 / 512.0;
            let z = v.eval(Cplx::new(th, 0.04)).unwrap();
            grid_max = grid_max.max(z.norm());
        }
        assert!(v.sup_bound() >= grid_max);
    }

    #[test]
    fn constants_unit_example() {
        // eps0 = 1, C_v = 1, L = 1, beta = 0
        let v = Potential::<f64>::new(vec![0.0, 1.0], 1.0).unwrap();
        let c = derive_constants(&v, 1.0, 0.0, 1.0).unwrap();
        assert_relative_eq!(c.delta1, 1e-20, max_relative = 1e-10);
        assert_relative_eq!(c.c0, 1e-4, max_relative = 1e-10);
        assert_relative_eq!(c.eta, 1e-2, max_relative = 1e-10);
        // eta == 1/100 exactly fails the strict requirement
        assert!(!c.in_regime);
    }

    #[test]
    fn constants_identities_hold() {
        let v = Potential::<f64>::amo(2.0);
        let c = derive_constants(&v, 0.69, 0.007, 2.5).unwrap();
        let root4 = c.delta1.powf(0.25);
        assert_relative_eq!(
            root4,
            (0.05f64).min(1.0).min(0.69 - 0.007) / (1e5 * 2.5 * 1.0),
            max_relative = 1e-12
        );
        assert_relative_eq!(c.c0, 10.0 * root4 / (1.0 + 0.007), max_relative = 1e-12);
        assert_relative_eq!(c.eta, 1000.0 * 2.5 * root4 / 0.05, max_relative = 1e-12);
    }

    #[test]
    fn degenerate_regime_rejected() {
        let v = Potential::<f64>::amo(2.0);
        assert!(matches!(
            derive_constants(&v, 0.5, 0.5, 1.0),
            Err(Error::NotInLocalizationRegime { .. })
        ));
    }
}
