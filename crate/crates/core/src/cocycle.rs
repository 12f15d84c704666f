//! Log-scaled transfer-matrix products, Dirichlet determinants, the trace
//! function `f_n = 2 - tr M_n`, the norm-square function `g_m`, and
//! finite-scale Lyapunov exponents.
//!
//! Everything that grows like `e^{nL}` is carried in renormalized form:
//! a matrix (or scalar pair) of unit magnitude plus an accumulated natural
//! log. Doubles overflow near `n ~ 700/L` otherwise.

use num_integer::Integer;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::Potential;
use crate::scalar::{Cplx, Real};

/// Minimal complex 2x2 matrix.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Mat2<R: Real> {
    pub a: Cplx<R>,
    pub b: Cplx<R>,
    pub c: Cplx<R>,
    pub d: Cplx<R>,
}

impl<R: Real> Mat2<R> {
    pub fn identity() -> Self {
        let one = Cplx::new(R::one(), R::zero());
        let zero = Cplx::new(R::zero(), R::zero());
        Mat2 {
            a: one,
            b: zero,
            c: zero,
            d: one,
        }
    }

    #[inline]
    pub fn mul(&self, rhs: &Self) -> Self {
        Mat2 {
            a: self.a * rhs.a + self.b * rhs.c,
            b: self.a * rhs.b + self.b * rhs.d,
            c: self.c * rhs.a + self.d * rhs.c,
            d: self.c * rhs.b + self.d * rhs.d,
        }
    }

    pub fn det(&self) -> Cplx<R> {
        self.a * self.d - self.b * self.c
    }

    pub fn trace(&self) -> Cplx<R> {
        self.a + self.d
    }

    pub fn max_entry_norm(&self) -> R {
        self.a
            .norm()
            .max(self.b.norm())
            .max(self.c.norm())
            .max(self.d.norm())
    }

    pub fn frobenius_sq(&self) -> R {
        self.a.norm_sqr() + self.b.norm_sqr() + self.c.norm_sqr() + self.d.norm_sqr()
    }

    /// Largest singular value, from the closed form for 2x2 matrices.
    pub fn op_norm(&self) -> R {
        let f = self.frobenius_sq();
        let det = self.det().norm_sqr();
        let disc = (f * f - R::of(4.0) * det).max(R::zero());
        ((f + disc.sqrt()) / R::of(2.0)).sqrt()
    }
}

/// SL(2) transfer product in renormalized form: `M_n = mat * e^{log_scale}`
/// with `mat` kept at unit max-entry magnitude.
///
/// `det_drift` tracks `det(mat) e^{2 log_scale}` along the product. The tiny
/// determinant of the normalized late-time matrix is swamped by the rounding
/// noise of the entries (hyperbolic products collapse toward rank one in
/// floats), so the drift is accumulated over short windows where the window
/// determinant is still resolvable, then folded multiplicatively.
#[derive(Debug, Clone, Serialize)]
pub struct ScaledTransfer<R: Real> {
    pub mat: Mat2<R>,
    pub log_scale: R,
    pub len: usize,
    pub energy: R,
    pub omega: R,
    pub phase: Cplx<R>,
    det_drift_log: R,
    det_drift_arg: R,
}

impl<R: Real> ScaledTransfer<R> {
    /// `|det(mat) e^{2 log_scale} - 1|`; zero in exact arithmetic.
    pub fn det_residual(&self) -> R {
        let val = Cplx::from_polar(self.det_drift_log.exp(), self.det_drift_arg);
        (val - Cplx::new(R::one(), R::zero())).norm()
    }

    /// `log ||M_n||` (operator norm).
    pub fn log_norm(&self) -> R {
        self.log_scale + self.mat.op_norm().ln()
    }

    /// `log ||M_n||_HS`.
    pub fn log_hs_norm(&self) -> R {
        self.log_scale + self.mat.frobenius_sq().sqrt().ln()
    }

    /// Trace as a log-scaled value.
    pub fn trace_log(&self) -> LogValue<R> {
        LogValue::from_scaled(self.mat.trace(), self.log_scale)
    }
}

/// A complex value stored as `phase * e^{log_abs}` with `|phase| = 1`.
/// Needed because `P_n`, `f_n` and `g_m` grow like `e^{nL}`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct LogValue<R: Real> {
    pub log_abs: R,
    pub phase: Cplx<R>,
}

impl<R: Real> LogValue<R> {
    pub fn zero() -> Self {
        LogValue {
            log_abs: R::neg_infinity(),
            phase: Cplx::new(R::one(), R::zero()),
        }
    }

    /// Represent `z * e^{scale}`.
    pub fn from_scaled(z: Cplx<R>, scale: R) -> Self {
        let n = z.norm();
        if n == R::zero() {
            return Self::zero();
        }
        LogValue {
            log_abs: n.ln() + scale,
            phase: z / n,
        }
    }

    pub fn from_real(x: R) -> Self {
        Self::from_scaled(Cplx::new(x, R::zero()), R::zero())
    }

    /// Reconstruct the value; may overflow to infinity for huge `log_abs`.
    pub fn value(&self) -> Cplx<R> {
        self.phase * self.log_abs.exp()
    }

    /// Real part sign for values known to be real (phase +-1).
    pub fn sign(&self) -> R {
        if self.phase.re >= R::zero() {
            R::one()
        } else {
            -R::one()
        }
    }
}

#[inline]
fn one_step<R: Real>(energy: R, v: &Potential<R>, phase: Cplx<R>) -> Mat2<R> {
    let vv = v.eval_unchecked(phase);
    Mat2 {
        a: Cplx::new(energy, R::zero()) - vv,
        b: Cplx::new(-R::one(), R::zero()),
        c: Cplx::new(R::one(), R::zero()),
        d: Cplx::new(R::zero(), R::zero()),
    }
}

fn check_strip<R: Real>(v: &Potential<R>, phase: Cplx<R>) -> Result<()> {
    if phase.im.abs() > v.eps0() {
        return Err(Error::OutOfStrip {
            im_abs: phase.im.abs().to_f64().unwrap_or(f64::NAN),
            eps0: v.eps0().to_f64().unwrap_or(f64::NAN),
        });
    }
    Ok(())
}

#[inline]
fn normalize<R: Real>(mat: &mut Mat2<R>, log_scale: &mut R) {
    let m = mat.max_entry_norm();
    if m > R::zero() {
        let inv = m.recip();
        mat.a = mat.a * inv;
        mat.b = mat.b * inv;
        mat.c = mat.c * inv;
        mat.d = mat.d * inv;
        *log_scale += m.ln();
    }
}

// Window length for determinant-drift tracking: short enough that the window
// determinant e^{-2 w L} stays far above the entry rounding noise.
const DET_WINDOW: usize = 4;

/// `M_{n,E}(phase) = M(phase + (n-1) omega) ... M(phase)`, renormalized to
/// unit max-entry magnitude every step.
pub fn transfer_product<R: Real>(
    energy: R,
    v: &Potential<R>,
    omega: R,
    phase: Cplx<R>,
    n: usize,
) -> Result<ScaledTransfer<R>> {
    if n == 0 {
        return Err(Error::invalid("cocycle", "transfer product needs n >= 1"));
    }
    check_strip(v, phase)?;
    let mut mat = Mat2::identity();
    let mut log_scale = R::zero();
    // windowed determinant tracking
    let mut win = Mat2::identity();
    let mut win_scale = R::zero();
    let mut drift_log = R::zero();
    let mut drift_arg = R::zero();
    let mut in_window = 0usize;
    for k in 0..n {
        let ph = Cplx::new(phase.re + omega * R::of_usize(k), phase.im);
        let step = one_step(energy, v, ph);
        mat = step.mul(&mat);
        normalize(&mut mat, &mut log_scale);
        win = step.mul(&win);
        normalize(&mut win, &mut win_scale);
        in_window += 1;
        if in_window == DET_WINDOW || k + 1 == n {
            let d = win.det();
            drift_log += d.norm().ln() + R::of(2.0) * win_scale;
            drift_arg += d.arg();
            win = Mat2::identity();
            win_scale = R::zero();
            in_window = 0;
        }
    }
    Ok(ScaledTransfer {
        mat,
        log_scale,
        len: n,
        energy,
        omega,
        phase,
        det_drift_log: drift_log,
        det_drift_arg: drift_arg,
    })
}

/// Scaled pair `(P_n, P_{n-1}) * e^{scale}` from the three-term recursion
/// `P_k = (E - v(phase + (k-1) omega)) P_{k-1} - P_{k-2}`, `P_0 = 1`,
/// `P_{-1} = 0`.
fn dirichlet_pair<R: Real>(
    energy: R,
    v: &Potential<R>,
    omega: R,
    phase: Cplx<R>,
    n: usize,
) -> (Cplx<R>, Cplx<R>, R) {
    let one = Cplx::new(R::one(), R::zero());
    let zero = Cplx::new(R::zero(), R::zero());
    let mut prev = zero; // P_{k-2}
    let mut cur = one; // P_{k-1}
    let mut scale = R::zero();
    for k in 1..=n {
        let ph = Cplx::new(phase.re + omega * R::of_usize(k - 1), phase.im);
        let vv = v.eval_unchecked(ph);
        let next = (Cplx::new(energy, R::zero()) - vv) * cur - prev;
        prev = cur;
        cur = next;
        let m = cur.norm().max(prev.norm());
        if m > R::of(1e30) || (m < R::of(1e-30) && m > R::zero()) {
            let inv = m.recip();
            cur = cur * inv;
            prev = prev * inv;
            scale += m.ln();
        }
    }
    (cur, prev, scale)
}

/// Dirichlet determinant `P_n` in log-scaled form.
pub fn dirichlet_det<R: Real>(
    energy: R,
    v: &Potential<R>,
    omega: R,
    phase: Cplx<R>,
    n: usize,
) -> Result<LogValue<R>> {
    check_strip(v, phase)?;
    let (p_n, _, scale) = dirichlet_pair(energy, v, omega, phase, n);
    Ok(LogValue::from_scaled(p_n, scale))
}

/// `f_n = 2 - tr M_n = 2 - P_n(phase) + P_{n-2}(phase + omega)`, log-scaled.
pub fn trace_f<R: Real>(
    energy: R,
    v: &Potential<R>,
    omega: R,
    phase: Cplx<R>,
    n: usize,
) -> Result<LogValue<R>> {
    if n == 0 {
        return Err(Error::invalid("cocycle", "trace function needs n >= 1"));
    }
    check_strip(v, phase)?;
    Ok(trace_f_entire(energy, v, omega, phase, n))
}

/// [`trace_f`] without the strip guard. The potentials here are trig
/// polynomials, hence entire; zero-search excursions slightly past the
/// declared strip are legitimate.
pub fn trace_f_entire<R: Real>(
    energy: R,
    v: &Potential<R>,
    omega: R,
    phase: Cplx<R>,
    n: usize,
) -> LogValue<R> {
    let (p_n, _, s1) = dirichlet_pair(energy, v, omega, phase, n);
    let (p_n2, s2) = if n >= 2 {
        let shifted = Cplx::new(phase.re + omega, phase.im);
        let (p, _, s) = dirichlet_pair(energy, v, omega, shifted, n - 2);
        (p, s)
    } else {
        // P_{-1} = 0
        (Cplx::new(R::zero(), R::zero()), R::zero())
    };
    let m = s1.max(s2).max(R::zero());
    let two = Cplx::new(R::of(2.0) * (-m).exp(), R::zero());
    let val = two - p_n * (s1 - m).exp() + p_n2 * (s2 - m).exp();
    LogValue::from_scaled(val, m)
}

/// Convert a point `z` of the complex plane to the phase `theta` with
/// `z = e^{2 pi i theta}`; `Im theta = -log|z| / (2 pi)`.
pub fn phase_of_z<R: Real>(z: Cplx<R>) -> Cplx<R> {
    let theta_re = z.arg() / R::tau();
    let theta_im = -z.norm().ln() / R::tau();
    Cplx::new(theta_re, theta_im)
}

/// `g_m(z) = P_m(z)^2 + P_{m-1}(z)^2 + P_{m-1}(z e^{2 pi i omega})^2
///         + P_{m-2}(z e^{2 pi i omega})^2`, log-scaled.
///
/// On the unit circle this equals `||M_m(theta)||_HS^2`.
pub fn g_value<R: Real>(
    energy: R,
    v: &Potential<R>,
    omega: R,
    z: Cplx<R>,
    m: usize,
) -> Result<LogValue<R>> {
    if m < 2 {
        return Err(Error::invalid("cocycle", "g_m needs m >= 2"));
    }
    let phase = phase_of_z(z);
    check_strip(v, phase)?;
    let shifted = Cplx::new(phase.re + omega, phase.im);
    let (p_m, p_m1, s1) = dirichlet_pair(energy, v, omega, phase, m);
    let (q_m1, q_m2, s2) = dirichlet_pair(energy, v, omega, shifted, m - 1);
    let top = (s1.max(s2)) * R::of(2.0);
    let w1 = (R::of(2.0) * s1 - top).exp();
    let w2 = (R::of(2.0) * s2 - top).exp();
    let val = (p_m * p_m + p_m1 * p_m1) * w1 + (q_m1 * q_m1 + q_m2 * q_m2) * w2;
    Ok(LogValue::from_scaled(val, top))
}

/// `(g_m(z) - e^{level_log}) * e^{-level_log}` as a plain complex number;
/// the scaling keeps level-line winding computations inside double range.
pub fn g_rel_level<R: Real>(
    energy: R,
    v: &Potential<R>,
    omega: R,
    z: Cplx<R>,
    m: usize,
    level_log: R,
) -> Result<Cplx<R>> {
    let g = g_value(energy, v, omega, z, m)?;
    let one = Cplx::new(R::one(), R::zero());
    Ok(g.phase * (g.log_abs - level_log).exp() - one)
}

/// Finite-scale Lyapunov exponent
/// `L_n(omega, E, eps) = grid average of n^{-1} log ||M_n(theta + i eps)||`.
pub fn lyapunov_finite<R: Real>(
    energy: R,
    v: &Potential<R>,
    omega: R,
    eps: R,
    n: usize,
    grid_size: usize,
) -> Result<R> {
    Ok(lyapunov_finite_detailed(energy, v, omega, eps, n, grid_size)?.0)
}

/// As [`lyapunov_finite`] but also returns the grid-doubling error estimate.
/// The returned value is the doubled-grid average.
pub fn lyapunov_finite_detailed<R: Real>(
    energy: R,
    v: &Potential<R>,
    omega: R,
    eps: R,
    n: usize,
    grid_size: usize,
) -> Result<(R, R)> {
    if grid_size < 64 {
        return Err(Error::invalid("cocycle", "grid_size must be >= 64"));
    }
    let coarse = lyapunov_grid(energy, v, omega, eps, n, grid_size)?;
    let fine = lyapunov_grid(energy, v, omega, eps, n, grid_size * 2)?;
    Ok((fine, (fine - coarse).abs()))
}

fn lyapunov_grid<R: Real>(
    energy: R,
    v: &Potential<R>,
    omega: R,
    eps: R,
    n: usize,
    grid: usize,
) -> Result<R> {
    let mut acc = R::zero();
    for i in 0..grid {
        let theta = (R::of_usize(i) + R::of(0.5)) / R::of_usize(grid);
        let t = transfer_product(energy, v, omega, Cplx::new(theta, eps), n)?;
        acc += t.log_norm() / R::of_usize(n);
    }
    Ok(acc / R::of_usize(grid))
}

/// `q^{-1} log rho(M_q^{p/q}(phase))` with the spectral radius taken from the
/// trace: for real phase, `rho = |t|/2 + sqrt(t^2/4 - 1)` when `|t| > 2` and
/// `rho = 1` otherwise.
pub fn lyapunov_rational<R: Real>(
    energy: R,
    v: &Potential<R>,
    p: u64,
    q: u64,
    phase: Cplx<R>,
) -> Result<R> {
    if q == 0 || p.gcd(&q) != 1 {
        return Err(Error::invalid("cocycle", "need gcd(p, q) = 1, q >= 1"));
    }
    let omega = R::of(p as f64) / R::of(q as f64);
    let t = transfer_product(energy, v, omega, phase, q as usize)?;
    let tr = t.trace_log();
    Ok(log_spectral_radius(tr) / R::of(q as f64))
}

/// `log rho` of an SL(2) matrix from its log-scaled trace.
fn log_spectral_radius<R: Real>(tr: LogValue<R>) -> R {
    if tr.log_abs == R::neg_infinity() {
        return R::zero(); // trace 0: eigenvalues +-i, rho = 1
    }
    if tr.log_abs > R::of(30.0) {
        // rho = |t|/2 (1 + sqrt(1 - 4/t^2)) ~ |t| to double precision
        return tr.log_abs;
    }
    let t = tr.value();
    if t.im.abs() < R::of(1e-9) * t.re.abs().max(R::one()) {
        // real trace
        let tt = t.re.abs();
        if tt <= R::of(2.0) {
            return R::zero();
        }
        let half = tt / R::of(2.0);
        return (half + (half * half - R::one()).sqrt()).ln();
    }
    // complex trace: eigenvalues t/2 +- sqrt(t^2/4 - 1)
    let half = t / R::of(2.0);
    let disc = (half * half - Cplx::new(R::one(), R::zero())).sqrt();
    let r = (half + disc).norm().max((half - disc).norm());
    r.max(R::one()).ln()
}

/// Average of [`lyapunov_rational`] over a uniform phase grid at height `eps`.
pub fn lyapunov_rational_avg<R: Real>(
    energy: R,
    v: &Potential<R>,
    p: u64,
    q: u64,
    eps: R,
    grid: usize,
) -> Result<R> {
    let mut acc = R::zero();
    for i in 0..grid {
        let theta = (R::of_usize(i) + R::of(0.5)) / R::of_usize(grid);
        acc += lyapunov_rational(energy, v, p, q, Cplx::new(theta, eps))?;
    }
    Ok(acc / R::of_usize(grid))
}

/// `v_m(theta) = m^{-1} log ||M_m(theta)||_HS` on a real phase; the function
/// whose sublevel sets the deviation module scans.
pub fn v_m_hs<R: Real>(
    energy: R,
    v: &Potential<R>,
    omega: R,
    theta: R,
    m: usize,
) -> Result<R> {
    let t = transfer_product(energy, v, omega, Cplx::new(theta, R::zero()), m)?;
    Ok(t.log_hs_norm() / R::of_usize(m))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    const GOLDEN: f64 = 0.618033988749894848;
    const R2_LOG_SCALE: f64 = 2.0;

    #[test]
    fn free_cocycle_rotation_of_order_four() {
        // v = 0, E = 0: M = [[0,-1],[1,0]], M^4 = I
        let v = Potential::<f64>::zero();
        let t = transfer_product(0.0, &v, GOLDEN, Cplx::new(0.3, 0.0), 4).unwrap();
        let s = t.log_scale.exp();
        assert_relative_eq!(t.mat.a.re * s, 1.0, epsilon = 1e-12);
        assert_relative_eq!(t.mat.d.re * s, 1.0, epsilon = 1e-12);
        assert!(t.mat.b.norm() * s < 1e-12 && t.mat.c.norm() * s < 1e-12);
    }

    #[test]
    fn free_cocycle_trace_oracle() {
        // E = 2 cos rho: tr M_n = 2 cos(n rho)
        let v = Potential::<f64>::zero();
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for _ in 0..20 {
            let rho: f64 = rng.gen_range(0.2..std::f64::consts::PI - 0.2);
            let n = rng.gen_range(2..1000usize);
            let t = transfer_product(2.0 * rho.cos(), &v, GOLDEN, Cplx::new(0.11, 0.0), n).unwrap();
            let tr = t.trace_log().value().re;
            assert_relative_eq!(tr, 2.0 * (n as f64 * rho).cos(), epsilon = 1e-9);
        }
    }

    #[test]
    fn dirichlet_base_cases() {
        let v = Potential::<f64>::amo(1.3);
        let p0 = dirichlet_det(0.7, &v, GOLDEN, Cplx::new(0.2, 0.0), 0).unwrap();
        assert_relative_eq!(p0.value().re, 1.0);
        let p1 = dirichlet_det(0.7, &v, GOLDEN, Cplx::new(0.2, 0.0), 1).unwrap();
        assert_relative_eq!(p1.value().re, 0.7 - v.eval_real(0.2), epsilon = 1e-14);
        // v = 0, E = 0: P_2 = -1
        let vz = Potential::<f64>::zero();
        let p2 = dirichlet_det(0.0, &vz, GOLDEN, Cplx::new(0.0, 0.0), 2).unwrap();
        assert_relative_eq!(p2.value().re, -1.0, epsilon = 1e-14);
    }

    #[test]
    fn dirichlet_matches_transfer_entries() {
        // M_n entries are (P_n, -P_{n-1}(.+omega); P_{n-1}, -P_{n-2}(.+omega))
        let v = Potential::<f64>::amo(0.8);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..6 {
            let e: f64 = rng.gen_range(-2.0..2.0);
            let th: f64 = rng.gen_range(0.0..1.0);
            let n = 50;
            let t = transfer_product(e, &v, GOLDEN, Cplx::new(th, 0.0), n).unwrap();
            let p_n = dirichlet_det(e, &v, GOLDEN, Cplx::new(th, 0.0), n).unwrap();
            let a_log = LogValue::from_scaled(t.mat.a, t.log_scale);
            assert_relative_eq!(a_log.log_abs, p_n.log_abs, epsilon = 1e-9);
            assert_relative_eq!(
                (a_log.phase - p_n.phase).norm(),
                0.0,
                epsilon = 1e-9
            );
            let p_n1 = dirichlet_det(e, &v, GOLDEN, Cplx::new(th, 0.0), n - 1).unwrap();
            let c_log = LogValue::from_scaled(t.mat.c, t.log_scale);
            assert_relative_eq!(c_log.log_abs, p_n1.log_abs, epsilon = 1e-9);
            let p_n2s = dirichlet_det(e, &v, GOLDEN, Cplx::new(th + GOLDEN, 0.0), n - 2).unwrap();
            let d_log = LogValue::from_scaled(-t.mat.d, t.log_scale);
            assert_relative_eq!(d_log.log_abs, p_n2s.log_abs, epsilon = 1e-9);
        }
    }

    #[test]
    fn trace_f_free_oracle() {
        let v = Potential::<f64>::zero();
        // rho = pi/3, n = 6: f = 2 - 2 cos(6 rho) = 2 - 2 cos(2 pi) = 0
        let f = trace_f(2.0 * (std::f64::consts::PI / 3.0).cos(), &v, GOLDEN, Cplx::new(0.4, 0.0), 6)
            .unwrap();
        assert!(f.value().norm() < 1e-12, "f = {:?}", f.value());
        // E = 0, n = 3: tr(M^3) = 0, f = 2
        let f2 = trace_f(0.0, &v, GOLDEN, Cplx::new(0.4, 0.0), 3).unwrap();
        assert_relative_eq!(f2.value().re, 2.0, epsilon = 1e-12);
    }

    #[test]
    fn trace_f_sandwich() {
        // ||M^2||/||M|| - 3 <= |f| <= ||M|| + 3 at random real phases
        let v = Potential::<f64>::amo(2.0);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..8 {
            let e: f64 = rng.gen_range(-3.0..3.0);
            let th: f64 = rng.gen_range(0.0..1.0);
            let n = 18;
            let m_n = transfer_product(e, &v, GOLDEN, Cplx::new(th, 0.0), n).unwrap();
            let sq = m_n.mat.mul(&m_n.mat);
            let log_norm_sq = R2_LOG_SCALE * m_n.log_scale + sq.op_norm().ln();
            let f = trace_f(e, &v, GOLDEN, Cplx::new(th, 0.0), n).unwrap();
            let f_abs = f.log_abs.exp();
            let norm_n = m_n.log_norm().exp();
            let ratio = (log_norm_sq - m_n.log_norm()).exp();
            assert!(f_abs >= ratio - 3.0 - 1e-8 * norm_n);
            assert!(f_abs <= norm_n + 3.0 + 1e-8 * norm_n);
        }
    }

    #[test]
    fn f_matrix_identity() {
        // 2I - M - M^{-1} = f I, checked at moderate n in plain arithmetic
        let v = Potential::<f64>::amo(1.1);
        let t = transfer_product(0.9, &v, GOLDEN, Cplx::new(0.23, 0.0), 16).unwrap();
        let s = t.log_scale.exp();
        let (a, b, c, d) = (t.mat.a * s, t.mat.b * s, t.mat.c * s, t.mat.d * s);
        let f = trace_f(0.9, &v, GOLDEN, Cplx::new(0.23, 0.0), 16)
            .unwrap()
            .value();
        // M^{-1} = [[d, -b], [-c, a]] since det = 1
        let r11 = Cplx::new(2.0, 0.0) - a - d - f;
        let r22 = Cplx::new(2.0, 0.0) - d - a - f;
        let r12 = -b + b;
        let r21 = -c + c;
        let scale = f.norm().max(1.0);
        assert!(r11.norm() < 1e-8 * scale);
        assert!(r22.norm() < 1e-8 * scale);
        assert!(r12.norm() < 1e-8 * scale && r21.norm() < 1e-8 * scale);
    }

    #[test]
    fn g_hand_value_and_hs_norm() {
        // v = 0, E = 0, m = 2: M_2 = -I, g = ||M_2||_HS^2 = 2
        let v = Potential::<f64>::zero();
        let g = g_value(0.0, &v, GOLDEN, Cplx::new(1.0, 0.0), 2).unwrap();
        assert_relative_eq!(g.value().re, 2.0, epsilon = 1e-12);

        // real theta: g = ||M_m||_HS^2 for a nontrivial potential
        let va = Potential::<f64>::amo(2.0);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..5 {
            let e: f64 = rng.gen_range(-2.0..2.0);
            let th: f64 = rng.gen_range(0.0..1.0);
            let m = 40;
            let z = Cplx::from_polar(1.0, std::f64::consts::TAU * th);
            let g = g_value(e, &va, GOLDEN, z, m).unwrap();
            let t = transfer_product(e, &va, GOLDEN, Cplx::new(th, 0.0), m).unwrap();
            assert_relative_eq!(g.log_abs, 2.0 * t.log_hs_norm(), epsilon = 1e-9);
            assert!(g.phase.im.abs() < 1e-9);
        }
    }

    #[test]
    fn g_conjugation_symmetry() {
        // g(1/conj(z)) = conj(g(z))
        let v = Potential::<f64>::amo(1.7);
        let z = Cplx::from_polar(1.013, 2.1);
        let g1 = g_value(0.4, &v, GOLDEN, z, 24).unwrap();
        let g2 = g_value(0.4, &v, GOLDEN, z.conj().inv(), 24).unwrap();
        assert_relative_eq!(g1.log_abs, g2.log_abs, epsilon = 1e-10);
        assert_relative_eq!(g1.phase.re, g2.phase.re, epsilon = 1e-9);
        assert_relative_eq!(g1.phase.im, -g2.phase.im, epsilon = 1e-9);
    }

    #[test]
    fn sl2_preservation_long_product() {
        let v = Potential::<f64>::amo(2.0);
        let t = transfer_product(0.5, &v, GOLDEN, Cplx::new(0.1, 0.0), 100_000).unwrap();
        assert!(t.det_residual() < 1e-6, "det residual {}", t.det_residual());
    }

    #[test]
    fn free_lyapunov_vanishes() {
        let v = Potential::<f64>::zero();
        let l = lyapunov_finite(1.0, &v, GOLDEN, 0.0, 1000, 64).unwrap();
        assert!(l.abs() < 1e-3, "L = {l}");
    }

    #[test]
    fn lyapunov_rational_free_cases() {
        let v = Potential::<f64>::zero();
        // E = 0, p/q = 1/4: M_4 = I, rho = 1
        let l = lyapunov_rational(0.0, &v, 1, 4, Cplx::new(0.2, 0.0)).unwrap();
        assert_relative_eq!(l, 0.0, epsilon = 1e-12);
        // elliptic: |tr| <= 2 gives 0
        let l2 = lyapunov_rational(1.0, &v, 1, 3, Cplx::new(0.0, 0.0)).unwrap();
        assert_relative_eq!(l2, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn lyapunov_even_and_convex_in_eps() {
        let v = Potential::<f64>::amo(2.0);
        let e = 0.4;
        let eps = [-0.02, -0.01, 0.0, 0.01, 0.02];
        let ls: Vec<f64> = eps
            .iter()
            .map(|&x| lyapunov_finite(e, &v, GOLDEN, x, 300, 64).unwrap())
            .collect();
        assert_relative_eq!(ls[0], ls[4], epsilon = 1e-3);
        assert_relative_eq!(ls[1], ls[3], epsilon = 1e-3);
        for w in ls.windows(3) {
            assert!(w[0] + w[2] - 2.0 * w[1] > -1e-3, "convexity violated: {w:?}");
        }
    }

    #[test]
    fn uniform_upper_bound_trend() {
        // sup_theta n^{-1} log||M_n|| <= L_{n/2} + tau for large n
        let v = Potential::<f64>::amo(2.0);
        let e = 0.3;
        for &n in &[200usize, 400] {
            let l_half = lyapunov_finite(e, &v, GOLDEN, 0.0, n / 2, 64).unwrap();
            let mut sup = f64::NEG_INFINITY;
            for i in 0..128 {
                let th = i as f64 / 128.0;
                let t = transfer_product(e, &v, GOLDEN, Cplx::new(th, 0.0), n).unwrap();
                sup = sup.max(t.log_norm() / n as f64);
            }
            assert!(
                sup <= l_half + 0.05,
                "n = {n}: sup rate {sup} vs L_half {l_half}"
            );
        }
    }

    #[test]
    fn almost_shift_invariance() {
        // |v_m(theta) - v_m(theta + omega)| <= C/m; report the fitted C
        let v = Potential::<f64>::amo(2.0);
        let e = 0.25;
        for &m in &[64usize, 128] {
            let mut worst = 0.0f64;
            for i in 0..256 {
                let th = i as f64 / 256.0;
                let a = v_m_hs(e, &v, GOLDEN, th, m).unwrap();
                let b = v_m_hs(e, &v, GOLDEN, th + GOLDEN, m).unwrap();
                worst = worst.max(m as f64 * (a - b).abs());
            }
            // C_{v,1}-type constant stays O(1) as m doubles
            assert!(worst < 20.0, "m = {m}: fitted C = {worst}");
        }
    }

    #[test]
    fn generic_over_f32() {
        let v = Potential::<f32>::zero();
        let t = transfer_product(0.0f32, &v, 0.618f32, Cplx::new(0.1, 0.0), 4).unwrap();
        assert!((t.mat.a.re * t.log_scale.exp() - 1.0).abs() < 1e-5);
    }
}
