//! Complexified Lyapunov profiles, the quantized acceleration of
//! `eps -> L(omega, E, eps)`, and first-supercritical stratum classification.

use serde::Serialize;

use crate::arithmetic::ContinuedFraction;
use crate::cocycle::{lyapunov_finite, lyapunov_rational};
use crate::error::{Error, Result};
use crate::model::{PaperConstants, Potential};
use crate::scalar::{Cplx, Real};

/// Finite-scale Lyapunov exponent sampled on a grid of imaginary phases.
#[derive(Debug, Clone, Serialize)]
pub struct LyapunovProfile<R: Real> {
    pub eps_grid: Vec<R>,
    pub values: Vec<R>,
    pub n: usize,
    pub grid_size: usize,
}

/// Least-squares slope of `L(eps)` against `2 pi eps` on a window.
#[derive(Debug, Clone, Serialize)]
pub struct AccelEstimate<R: Real> {
    pub kappa_raw: R,
    pub kappa_int: i64,
    pub residual: R,
}

/// Stratum membership report. `first_supercritical` is `None` when the
/// quantization residual exceeds the acceptance threshold (unresolved), not
/// an error.
#[derive(Debug, Clone, Serialize)]
pub struct StratumReport<R: Real> {
    pub energy: R,
    pub n: usize,
    pub lyapunov: R,
    pub beta_proxy: R,
    pub kappa_raw: R,
    pub kappa_int: i64,
    pub residual: R,
    pub first_supercritical: Option<bool>,
}

/// Deviation of the rational Lyapunov exponent from the finite-scale one.
#[derive(Debug, Clone, Serialize)]
pub struct UniformityReport<R: Real> {
    pub p: u64,
    pub q: u64,
    pub eps: R,
    pub max_dev: R,
}

/// Sample `L_n(omega, E, eps)` on `eps_points` evenly spaced values spanning
/// `[0, eps0]`.
pub fn compute_profile<R: Real>(
    energy: R,
    v: &Potential<R>,
    omega: R,
    eps_points: usize,
    n: usize,
    grid_size: usize,
) -> Result<LyapunovProfile<R>> {
    if eps_points < 2 {
        return Err(Error::invalid("acceleration", "need at least 2 eps points"));
    }
    let eps0 = v.eps0();
    let mut eps_grid = Vec::with_capacity(eps_points);
    let mut values = Vec::with_capacity(eps_points);
    for i in 0..eps_points {
        let eps = eps0 * R::of_usize(i) / R::of_usize(eps_points - 1);
        eps_grid.push(eps);
        values.push(lyapunov_finite(energy, v, omega, eps, n, grid_size)?);
    }
    Ok(LyapunovProfile {
        eps_grid,
        values,
        n,
        grid_size,
    })
}

/// Profile on an explicit list of `eps` values.
pub fn compute_profile_at<R: Real>(
    energy: R,
    v: &Potential<R>,
    omega: R,
    eps_values: &[R],
    n: usize,
    grid_size: usize,
) -> Result<LyapunovProfile<R>> {
    let mut values = Vec::with_capacity(eps_values.len());
    for &eps in eps_values {
        values.push(lyapunov_finite(energy, v, omega, eps, n, grid_size)?);
    }
    Ok(LyapunovProfile {
        eps_grid: eps_values.to_vec(),
        values,
        n,
        grid_size,
    })
}

/// Estimate the acceleration as the least-squares slope of `L(eps)` versus
/// `2 pi eps` over the points of the profile falling inside `window`.
pub fn acceleration_estimate<R: Real>(
    profile: &LyapunovProfile<R>,
    window: (R, R),
) -> Result<AccelEstimate<R>> {
    let pts: Vec<(R, R)> = profile
        .eps_grid
        .iter()
        .zip(profile.values.iter())
        .filter(|(e, _)| **e >= window.0 && **e <= window.1)
        .map(|(e, v)| (R::tau() * *e, *v))
        .collect();
    if pts.len() < 4 {
        return Err(Error::WindowTooNarrow { points: pts.len() });
    }
    let n = R::of_usize(pts.len());
    let sx: R = pts.iter().map(|p| p.0).sum();
    let sy: R = pts.iter().map(|p| p.1).sum();
    let sxx: R = pts.iter().map(|p| p.0 * p.0).sum();
    let sxy: R = pts.iter().map(|p| p.0 * p.1).sum();
    let denom = n * sxx - sx * sx;
    if denom == R::zero() {
        return Err(Error::invalid("acceleration", "degenerate eps window"));
    }
    let slope = (n * sxy - sx * sy) / denom;
    let kappa_int = slope.round().to_f64().unwrap_or(0.0) as i64;
    let residual = (slope - R::of(kappa_int as f64)).abs();
    Ok(AccelEstimate {
        kappa_raw: slope,
        kappa_int,
        residual,
    })
}

/// Default estimation window `[0.01, 0.03]`: wide enough to escape the
/// finite-`n` rounding of the kink at `eps = 0`, inside the first linear
/// piece for the shipped examples.
pub fn default_window<R: Real>() -> (R, R) {
    (R::of(0.01), R::of(0.03))
}

/// Number of profile points used by the default drivers.
pub const DEFAULT_EPS_POINTS: usize = 5;

/// Membership test for the first supercritical stratum:
/// `kappa = 1` and `L_n > beta` (finite-depth proxy).
pub fn stratum_classify<R: Real>(
    energy: R,
    v: &Potential<R>,
    cf: &ContinuedFraction,
    _constants: &PaperConstants,
    n: usize,
    grid_size: usize,
) -> Result<StratumReport<R>> {
    let omega = R::of(cf.omega_f64());
    let window = default_window::<R>();
    let eps_values: Vec<R> = (0..DEFAULT_EPS_POINTS)
        .map(|i| {
            window.0
                + (window.1 - window.0) * R::of_usize(i) / R::of_usize(DEFAULT_EPS_POINTS - 1)
        })
        .collect();
    let profile = compute_profile_at(energy, v, omega, &eps_values, n, grid_size)?;
    let est = acceleration_estimate(&profile, window)?;
    let lyap = lyapunov_finite(energy, v, omega, R::zero(), n, grid_size)?;
    let beta = R::of(cf.beta_proxy());
    let first_supercritical = if est.residual < R::of(0.1) {
        Some(est.kappa_int == 1 && lyap > beta)
    } else {
        None
    };
    Ok(StratumReport {
        energy,
        n,
        lyapunov: lyap,
        beta_proxy: beta,
        kappa_raw: est.kappa_raw,
        kappa_int: est.kappa_int,
        residual: est.residual,
        first_supercritical,
    })
}

/// Max over a phase grid of `|L(p_n/q_n, theta + i eps) - L_m(omega, eps)|`
/// at the matched scale `m = q_n`.
pub fn rational_uniformity<R: Real>(
    energy: R,
    v: &Potential<R>,
    cf: &ContinuedFraction,
    n_conv: usize,
    eps: R,
    grid: usize,
) -> Result<UniformityReport<R>> {
    let (p, q) = cf.p_over_q_f64(n_conv)?;
    let p = u64::try_from(p)
        .map_err(|_| Error::invalid("acceleration", "negative numerator"))?;
    let omega = R::of(cf.omega_f64());
    let l_irr = lyapunov_finite(energy, v, omega, eps, q as usize, grid)?;
    let mut max_dev = R::zero();
    for i in 0..grid {
        let theta = (R::of_usize(i) + R::of(0.5)) / R::of_usize(grid);
        let l_rat = lyapunov_rational(energy, v, p, q, Cplx::new(theta, eps))?;
        max_dev = max_dev.max((l_rat - l_irr).abs());
    }
    Ok(UniformityReport {
        p,
        q,
        eps,
        max_dev,
    })
}

/// Max deviation of the profile from its chord on `[0, eps0]`, relative to
/// the chord midpoint value; small for first-supercritical examples where
/// `L(eps)` is linear on the strip.
pub fn chord_deviation<R: Real>(profile: &LyapunovProfile<R>) -> R {
    let k = profile.eps_grid.len();
    if k < 3 {
        return R::zero();
    }
    let (e0, l0) = (profile.eps_grid[0], profile.values[0]);
    let (e1, l1) = (profile.eps_grid[k - 1], profile.values[k - 1]);
    let mut worst = R::zero();
    for i in 1..k - 1 {
        let t = (profile.eps_grid[i] - e0) / (e1 - e0);
        let chord = l0 + (l1 - l0) * t;
        worst = worst.max((profile.values[i] - chord).abs());
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;

    const GOLDEN: f64 = 0.618033988749894848;

    #[test]
    fn free_cocycle_kappa_zero() {
        let v = Potential::<f64>::zero();
        let eps: Vec<f64> = (0..5).map(|i| 0.01 + 0.005 * i as f64).collect();
        let profile = compute_profile_at(1.0, &v, GOLDEN, &eps, 500, 64).unwrap();
        let est = acceleration_estimate(&profile, (0.01, 0.03)).unwrap();
        assert_eq!(est.kappa_int, 0);
        assert!(est.residual < 0.01, "residual {}", est.residual);
    }

    #[test]
    fn narrow_window_rejected() {
        let v = Potential::<f64>::zero();
        let eps: Vec<f64> = vec![0.01, 0.02, 0.03, 0.04, 0.05];
        let profile = compute_profile_at(1.0, &v, GOLDEN, &eps, 100, 64).unwrap();
        assert!(matches!(
            acceleration_estimate(&profile, (0.01, 0.02)),
            Err(Error::WindowTooNarrow { points: 2 })
        ));
    }

    #[test]
    fn supercritical_amo_slope_one() {
        // lambda = 2 has L(eps) = log 2 + 2 pi eps on the spectrum; a modest
        // n already resolves the slope
        let v = Potential::<f64>::amo(2.0);
        let eps: Vec<f64> = (0..5).map(|i| 0.01 + 0.005 * i as f64).collect();
        let profile = compute_profile_at(0.1, &v, GOLDEN, &eps, 2000, 64).unwrap();
        let est = acceleration_estimate(&profile, (0.01, 0.03)).unwrap();
        assert_eq!(est.kappa_int, 1);
        assert!(est.residual < 0.05, "residual {}", est.residual);
        // linearity of the profile over the window
        assert!(chord_deviation(&profile) < 0.02 * profile.values[0]);
    }

    #[test]
    fn stratum_labels() {
        use crate::arithmetic::cf_expand_quotients;
        use crate::model::derive_constants_working;

        let cf = cf_expand_quotients(&[1; 20]).unwrap();
        let v = Potential::<f64>::amo(2.0);
        let constants = derive_constants_working(&v, 1e-20, 0.69, 0.01, 2.5).unwrap();
        let rep = stratum_classify(0.1, &v, &cf, &constants, 2000, 64).unwrap();
        assert_eq!(rep.first_supercritical, Some(true));

        let vz = Potential::<f64>::zero();
        let cz = derive_constants_working(&vz, 1e-20, 0.69, 0.0, 1.0).unwrap();
        let rep0 = stratum_classify(1.0, &vz, &cf, &cz, 1000, 64).unwrap();
        assert_eq!(rep0.first_supercritical, Some(false));
    }

    #[test]
    fn strong_liouville_beta_beats_l() {
        // beta_n proxy > log 2 forces first_supercritical = false even for
        // lambda = 2
        use crate::arithmetic::cf_expand_quotients;
        use crate::model::derive_constants_working;

        let cf = cf_expand_quotients(&[1, 1, 1, 1, 1, 1, 1, 10_000_000]).unwrap();
        assert!(cf.beta_proxy() > std::f64::consts::LN_2);
        let v = Potential::<f64>::amo(2.0);
        let constants = derive_constants_working(&v, 1e-20, 0.69, 0.01, 2.5).unwrap();
        let rep = stratum_classify(0.1, &v, &cf, &constants, 2000, 64).unwrap();
        assert_eq!(rep.first_supercritical, Some(false));
    }

    #[test]
    fn uniformity_free_cocycle() {
        use crate::arithmetic::cf_expand_quotients;
        // the rational exponent is exactly 0 (elliptic); the finite-scale
        // m = q_n average decays like 1/q_n, so the deviation shrinks along
        // the convergents
        let cf = cf_expand_quotients(&[1; 14]).unwrap();
        let v = Potential::<f64>::zero();
        let d13 = rational_uniformity(1.0, &v, &cf, 6, 0.0, 64).unwrap();
        let d233 = rational_uniformity(1.0, &v, &cf, 12, 0.0, 64).unwrap();
        assert_eq!((d13.q, d233.q), (13, 233));
        assert!(d233.max_dev < d13.max_dev / 4.0, "{} vs {}", d233.max_dev, d13.max_dev);
        assert!(d233.max_dev < 5e-3, "dev {}", d233.max_dev);
    }

    #[test]
    fn uniformity_decreases_along_convergents() {
        use crate::arithmetic::cf_expand_quotients;
        let cf = cf_expand_quotients(&[1; 12]).unwrap();
        let v = Potential::<f64>::amo(2.0);
        let d13 = rational_uniformity(0.1, &v, &cf, 6, 0.0, 96).unwrap();
        let d21 = rational_uniformity(0.1, &v, &cf, 7, 0.0, 96).unwrap();
        assert_eq!((d13.q, d21.q), (13, 21));
        assert!(
            d21.max_dev < d13.max_dev,
            "expected decrease: {} -> {}",
            d13.max_dev,
            d21.max_dev
        );
        // both strips report finite deviations
        let d_eps = rational_uniformity(0.1, &v, &cf, 7, 0.025, 96).unwrap();
        assert!(d_eps.max_dev.is_finite());
    }
}
