//! Exact Green's function of the annulus `A_R = {1/R < |z| < R}`, its circle
//! integrals, Jensen averages, and the decomposition of `q^{-1} log |f|`
//! into a Green's potential plus a harmonic part.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::scalar::{Cplx, Real};
use crate::zeros::ZeroInventory;

/// Annulus `1/R < |z| < R` with the truncation order of the image products.
#[derive(Debug, Clone, Serialize)]
pub struct AnnulusSpec<R: Real> {
    pub radius: R,
    pub truncation_k0: usize,
    pub tail_bound: R,
}

impl<R: Real> AnnulusSpec<R> {
    /// Truncate where the product tail contributes less than `tail_bound`
    /// (default `1e-12`) to the log-magnitude; the factors decay like
    /// `R^{-4k}`.
    pub fn new(radius: R) -> Result<Self> {
        Self::with_tail(radius, R::of(1e-12))
    }

    pub fn with_tail(radius: R, tail_bound: R) -> Result<Self> {
        if radius <= R::one() {
            return Err(Error::BadAnnulusInput("outer radius must exceed 1".into()));
        }
        if tail_bound <= R::zero() {
            return Err(Error::BadAnnulusInput("tail bound must be positive".into()));
        }
        // worst-case |u| in the factors log|1 - u| is R^{4 - 4k} (both points
        // on the boundary); sum the geometric tail
        let mut k0 = 1usize;
        loop {
            let next = radius.powi(4 - 4 * (k0 as i32 + 1)) * R::of(8.0)
                / (R::one() - radius.powi(-4));
            if next < tail_bound * R::tau() || k0 > 10_000 {
                break;
            }
            k0 += 1;
        }
        Ok(AnnulusSpec {
            radius,
            truncation_k0: k0,
            tail_bound,
        })
    }

    /// Annulus `e^{-2 pi eps} < |z| < e^{2 pi eps}`.
    pub fn from_eps(eps: R) -> Result<Self> {
        Self::new((R::tau() * eps).exp())
    }

    fn contains_closed(&self, z: Cplx<R>) -> bool {
        let m = z.norm();
        let tol = R::of(1.0 + 1e-12);
        m * tol >= self.radius.recip() && m <= self.radius * tol
    }
}

/// Regular part `Gamma_R(z, w)` of the annulus Green's function, from the
/// truncated image products.
pub fn gamma_value<R: Real>(z: Cplx<R>, w: Cplx<R>, spec: &AnnulusSpec<R>) -> R {
    let r = spec.radius;
    let log_r = r.ln();
    let lead = (z.norm().ln() - log_r) * (w.norm().ln() - log_r)
        / (R::of(4.0) * R::PI() * log_r);
    let mut log_num = R::zero();
    let mut log_den = log_r;
    let zw = z / w;
    let wz = w / z;
    let w_zbar = w * z.conj();
    let inv_zbar_w = (z.conj() * w).inv();
    let one = Cplx::new(R::one(), R::zero());
    for k in 1..=spec.truncation_k0 {
        let r4k = r.powi(-4 * k as i32);
        let r4k2 = r.powi(2 - 4 * k as i32);
        log_num += (one - zw * r4k).norm().ln() + (one - wz * r4k).norm().ln();
        log_den += (one - w_zbar * r4k2).norm().ln() + (one - inv_zbar_w * r4k2).norm().ln();
    }
    lead + (log_num - log_den) / R::tau()
}

/// `G_R(z, w) = (2 pi)^{-1} log|z - w| + Gamma_R(z, w)`.
///
/// Returns negative infinity at `z = w`; errors when either point leaves the
/// closed annulus.
pub fn green_value<R: Real>(z: Cplx<R>, w: Cplx<R>, spec: &AnnulusSpec<R>) -> Result<R> {
    for p in [z, w] {
        if !spec.contains_closed(p) {
            return Err(Error::OutsideAnnulus {
                modulus: p.norm().to_f64().unwrap_or(f64::NAN),
                radius: spec.radius.to_f64().unwrap_or(f64::NAN),
            });
        }
    }
    if z == w {
        return Ok(R::neg_infinity());
    }
    Ok((z - w).norm().ln() / R::tau() + gamma_value(z, w, spec))
}

/// Quadrature and closed form for the circle integral of `Gamma_R`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct CircleIntegral<R: Real> {
    pub quadrature: R,
    pub closed_form: R,
    pub nodes_used: usize,
}

/// `int_0^1 Gamma_R(r e^{2 pi i theta}, w) d theta` against the closed form
/// `log(r/R) log(|w|/R) / (4 pi log R) - log R / (2 pi)`.
///
/// Composite trapezoid (spectrally accurate for periodic integrands), nodes
/// doubled until two successive results agree to `1e-9`.
pub fn gamma_circle_integral<R: Real>(
    r: R,
    w: Cplx<R>,
    spec: &AnnulusSpec<R>,
) -> Result<CircleIntegral<R>> {
    if r <= spec.radius.recip() || r >= spec.radius {
        return Err(Error::BadAnnulusInput(format!(
            "circle radius {r} outside the open annulus"
        )));
    }
    let log_r_big = spec.radius.ln();
    let closed_form = (r.ln() - log_r_big) * (w.norm().ln() - log_r_big)
        / (R::of(4.0) * R::PI() * log_r_big)
        - log_r_big / R::tau();

    let average = |nodes: usize| -> R {
        let mut acc = R::zero();
        for i in 0..nodes {
            let theta = R::tau() * R::of_usize(i) / R::of_usize(nodes);
            acc += gamma_value(Cplx::from_polar(r, theta), w, spec);
        }
        acc / R::of_usize(nodes)
    };
    let mut nodes = 256usize;
    let mut prev = average(nodes);
    loop {
        nodes *= 2;
        let cur = average(nodes);
        if (cur - prev).abs() < R::of(1e-9) || nodes >= 1 << 20 {
            return Ok(CircleIntegral {
                quadrature: cur,
                closed_form,
                nodes_used: nodes,
            });
        }
        prev = cur;
    }
}

/// Jensen average `sum_s int log|z - r_s e^{2 pi i theta}| d theta` for a
/// reciprocal pair of radii `r1 r2 = 1`, `r2 <= r1`:
/// `0` below `r2`, `log(r1 |z|)` between, `2 log |z|` above `r1`.
pub fn jensen_average<R: Real>(z: Cplx<R>, r1: R, r2: R) -> Result<R> {
    if (r1 * r2 - R::one()).abs() > R::of(1e-9) {
        return Err(Error::BadAnnulusInput(format!(
            "need r1 r2 = 1, got {}",
            r1 * r2
        )));
    }
    if r2 > r1 {
        return Err(Error::BadAnnulusInput("need r2 <= r1".into()));
    }
    let m = z.norm();
    Ok(if m < r2 {
        R::zero()
    } else if m <= r1 {
        (r1 * m).ln()
    } else {
        R::of(2.0) * m.ln()
    })
}

/// Harmonic part of a sampled potential after subtracting the Green's sum.
#[derive(Debug, Clone, Serialize)]
pub struct Decomposition<R: Real> {
    pub harmonic: Vec<R>,
    /// `max - min` of the harmonic part over the grid.
    pub flatness: R,
}

/// `h = v - (2 pi / q) sum_k G_R(., w_k)` on the sample points, where `v`
/// holds samples of `q^{-1} log |f|`.
///
/// The inventory must be complete: its located multiplicity has to match its
/// argument-principle count.
pub fn potential_decomposition<R: Real>(
    points: &[Cplx<R>],
    v_samples: &[R],
    q: usize,
    zeros: &ZeroInventory<R>,
    spec: &AnnulusSpec<R>,
) -> Result<Decomposition<R>> {
    if points.len() != v_samples.len() {
        return Err(Error::invalid("annulus", "points/samples length mismatch"));
    }
    if zeros.total_multiplicity() != zeros.count {
        return Err(Error::InventoryIntegrity {
            count: zeros.count,
            located: zeros.total_multiplicity() as usize,
        });
    }
    let mut harmonic = Vec::with_capacity(points.len());
    let mut lo = R::infinity();
    let mut hi = R::neg_infinity();
    for (&z, &v) in points.iter().zip(v_samples.iter()) {
        let mut g_sum = R::zero();
        for rec in &zeros.zeros {
            g_sum += green_value(z, rec.position, spec)? * R::of(rec.multiplicity as f64);
        }
        let h = v - R::tau() * g_sum / R::of_usize(q);
        lo = lo.min(h);
        hi = hi.max(h);
        harmonic.push(h);
    }
    Ok(Decomposition {
        harmonic,
        flatness: hi - lo,
    })
}

/// Comparison of the full logarithmic-potential sum against its minimum term
/// plus the Jensen average.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct MinTermReport<R: Real> {
    pub full_sum: R,
    pub min_plus_jensen: R,
    pub gap: R,
    pub families: usize,
}

/// For zeros arranged in one or two almost-periodic families of size `q`,
/// compare `q^{-1} sum log|z - w|` against
/// `q^{-1} sum_s min_j log|z - w_{s,j}|` plus the Jensen average of the
/// family radii.
pub fn min_term_approximation<R: Real>(
    z: Cplx<R>,
    zeros: &ZeroInventory<R>,
    q: usize,
) -> Result<MinTermReport<R>> {
    let pos = zeros.positions();
    if pos.is_empty() || q == 0 {
        return Err(Error::FamilyStructure("empty inventory".into()));
    }
    // split by radius: one family, or two separated by the largest gap
    let mut radii: Vec<(R, usize)> = pos
        .iter()
        .enumerate()
        .map(|(i, z)| (z.norm(), i))
        .collect();
    radii.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap_or(std::cmp::Ordering::Equal));
    let n = radii.len();
    let spread = radii[n - 1].0 - radii[0].0;
    let mut split_at = None;
    if n > 1 {
        let mut best_gap = R::zero();
        let mut best_i = 0;
        for i in 0..n - 1 {
            let gap = radii[i + 1].0 - radii[i].0;
            if gap > best_gap {
                best_gap = gap;
                best_i = i;
            }
        }
        if best_gap > R::of(0.5) * spread && best_gap > R::of(1e-6) {
            split_at = Some(best_i);
        }
    }
    let families: Vec<Vec<usize>> = match split_at {
        Some(i) => vec![
            radii[..=i].iter().map(|r| r.1).collect(),
            radii[i + 1..].iter().map(|r| r.1).collect(),
        ],
        None => vec![radii.iter().map(|r| r.1).collect()],
    };
    for fam in &families {
        if fam.len() != q {
            return Err(Error::FamilyStructure(format!(
                "family of size {} does not match period {q}",
                fam.len()
            )));
        }
    }

    let qf = R::of_usize(q);
    let mut full_sum = R::zero();
    for w in &pos {
        full_sum += (z - *w).norm().ln();
    }
    full_sum /= qf;

    let mut min_terms = R::zero();
    let mut jensen = R::zero();
    for fam in &families {
        let mut min = R::infinity();
        let mut log_r = R::zero();
        for &i in fam {
            min = min.min((z - pos[i]).norm().ln());
            log_r += pos[i].norm().ln();
        }
        min_terms += min / qf;
        let r_fam = (log_r / qf).exp();
        jensen += z.norm().max(r_fam).ln();
    }
    let min_plus_jensen = min_terms + jensen;
    Ok(MinTermReport {
        full_sum,
        min_plus_jensen,
        gap: (full_sum - min_plus_jensen).abs(),
        families: families.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::zeros::{locate_zeros, ZeroRecord};
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn default_spec() -> AnnulusSpec<f64> {
        AnnulusSpec::new((std::f64::consts::TAU * 0.05f64).exp()).unwrap()
    }

    #[test]
    fn truncation_order_matches_decay() {
        let spec = default_spec();
        // R = e^{2 pi 0.05}: the design point is k0 around 30
        assert!(
            (20..=45).contains(&spec.truncation_k0),
            "k0 = {}",
            spec.truncation_k0
        );
        // doubling k0 changes values by less than the tail bound
        let fine = AnnulusSpec {
            radius: spec.radius,
            truncation_k0: spec.truncation_k0 * 2,
            tail_bound: spec.tail_bound,
        };
        let z = Cplx::from_polar(1.12, 0.7);
        let w = Cplx::from_polar(0.93, 2.9);
        let a = green_value(z, w, &spec).unwrap();
        let b = green_value(z, w, &fine).unwrap();
        assert!((a - b).abs() < 1e-12);
    }

    #[test]
    fn boundary_vanishing() {
        let spec = default_spec();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..10 {
            let zb = Cplx::from_polar(spec.radius, rng.gen_range(0.0..std::f64::consts::TAU));
            let zb_in = Cplx::from_polar(
                1.0 / spec.radius,
                rng.gen_range(0.0..std::f64::consts::TAU),
            );
            let w = Cplx::from_polar(
                rng.gen_range(0.9..1.1),
                rng.gen_range(0.0..std::f64::consts::TAU),
            );
            assert!(green_value(zb, w, &spec).unwrap().abs() < 1e-10);
            assert!(green_value(zb_in, w, &spec).unwrap().abs() < 1e-10);
        }
    }

    #[test]
    fn symmetry_rotation_reflection() {
        let spec = default_spec();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..10 {
            let z = Cplx::from_polar(
                rng.gen_range(0.85..1.15),
                rng.gen_range(0.0..std::f64::consts::TAU),
            );
            let w = Cplx::from_polar(
                rng.gen_range(0.85..1.15),
                rng.gen_range(0.0..std::f64::consts::TAU),
            );
            if (z - w).norm() < 1e-3 {
                continue;
            }
            let g = green_value(z, w, &spec).unwrap();
            assert_relative_eq!(g, green_value(w, z, &spec).unwrap(), epsilon = 1e-12);
            let rot = Cplx::from_polar(1.0, rng.gen_range(0.0..std::f64::consts::TAU));
            assert_relative_eq!(
                g,
                green_value(z * rot, w * rot, &spec).unwrap(),
                epsilon = 1e-12
            );
            assert_relative_eq!(
                g,
                green_value(z.conj().inv(), w.conj().inv(), &spec).unwrap(),
                epsilon = 1e-12
            );
        }
    }

    #[test]
    fn diagonal_sentinel_and_domain() {
        let spec = default_spec();
        let z = Cplx::from_polar(1.02, 0.3);
        assert_eq!(green_value(z, z, &spec).unwrap(), f64::NEG_INFINITY);
        assert!(matches!(
            green_value(Cplx::new(2.0, 0.0), z, &spec),
            Err(Error::OutsideAnnulus { .. })
        ));
    }

    #[test]
    fn circle_integral_matches_closed_form() {
        let spec = default_spec();
        let w = Cplx::from_polar(1.02, 1.1);
        let ci = gamma_circle_integral(1.0, w, &spec).unwrap();
        assert!(
            (ci.quadrature - ci.closed_form).abs() < 1e-8,
            "quad {} closed {}",
            ci.quadrature,
            ci.closed_form
        );
        // r = R is excluded (boundary), but near the boundary the closed form
        // tends to -log R / (2 pi)
        let near = gamma_circle_integral(spec.radius * 0.999, w, &spec).unwrap();
        let limit = -spec.radius.ln() / std::f64::consts::TAU;
        assert!((near.closed_form - limit).abs() < 1e-3);
        // w on the integration circle: Gamma_R stays regular there
        let w_on = Cplx::from_polar(1.0, 2.2);
        let ci2 = gamma_circle_integral(1.0, w_on, &spec).unwrap();
        assert!((ci2.quadrature - ci2.closed_form).abs() < 1e-8);
    }

    #[test]
    fn jensen_branches() {
        // |z| = 0.5 inside: 0
        assert_relative_eq!(
            jensen_average(Cplx::new(0.5, 0.0), 1.0, 1.0).unwrap(),
            0.0
        );
        // |z| = 2 outside: 2 log 2
        assert_relative_eq!(
            jensen_average(Cplx::new(0.0, 2.0), 1.0, 1.0).unwrap(),
            2.0 * (2.0f64).ln()
        );
        // middle branch
        let r1 = (0.01f64).exp();
        assert_relative_eq!(
            jensen_average(Cplx::new(1.0, 0.0), r1, 1.0 / r1).unwrap(),
            0.01,
            epsilon = 1e-12
        );
    }

    #[test]
    fn jensen_matches_quadrature() {
        // oracle: direct trapezoid of log|z - r e^{2 pi i t}| summed over the
        // reciprocal pair
        let r1 = (0.03f64).exp();
        let r2 = 1.0 / r1;
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..6 {
            let z = Cplx::from_polar(
                rng.gen_range(0.8..1.25),
                rng.gen_range(0.0..std::f64::consts::TAU),
            );
            if (z.norm() - r1).abs() < 5e-3 || (z.norm() - r2).abs() < 5e-3 {
                continue; // quadrature degrades on the singular circles
            }
            let nodes = 1 << 14;
            let mut acc = 0.0;
            for &r in &[r1, r2] {
                for i in 0..nodes {
                    let t = std::f64::consts::TAU * i as f64 / nodes as f64;
                    acc += (z - Cplx::from_polar(r, t)).norm().ln();
                }
            }
            acc /= nodes as f64;
            assert_relative_eq!(
                acc,
                jensen_average(z, r1, r2).unwrap(),
                epsilon = 1e-8
            );
        }
    }

    #[test]
    fn decomposition_constant_function() {
        // zero-free f = c: h = q^{-1} log|c| with flatness 0
        let spec = default_spec();
        let inv = ZeroInventory::<f64> {
            function_tag: "const".into(),
            eps: 0.05,
            count: 0,
            zeros: vec![],
            real_pairs: None,
            rotation_orbits: None,
            unresolved_cells: 0,
            nudged_eps: None,
        };
        let points: Vec<Cplx<f64>> = (0..32)
            .map(|i| Cplx::from_polar(1.01, std::f64::consts::TAU * i as f64 / 32.0))
            .collect();
        let c: f64 = 7.5;
        let q = 5usize;
        let samples: Vec<f64> = points.iter().map(|_| c.ln() / q as f64).collect();
        let d = potential_decomposition(&points, &samples, q, &inv, &spec).unwrap();
        assert!(d.flatness < 1e-14);
        assert_relative_eq!(d.harmonic[0], c.ln() / q as f64);
    }

    #[test]
    fn decomposition_left_inverse_and_cofactor() {
        // f = (z - z0) e^{p(z)} with p(z) = 0.3 z: the harmonic part is
        // q^{-1}(Re p - 2 pi Gamma_R(., z0)); subtracting the Green's sum
        // from q^{-1} log |f| must reproduce it to quadrature accuracy
        let spec = default_spec();
        let z0 = Cplx::from_polar(1.015, 2.0);
        let q = 3usize;
        let f = |z: Cplx<f64>| (z - z0) * (z * 0.3).exp();
        let inv = ZeroInventory::<f64> {
            function_tag: "synthetic".into(),
            eps: 0.05,
            count: 1,
            zeros: vec![ZeroRecord {
                position: z0,
                residual: 0.0,
                multiplicity: 1,
            }],
            real_pairs: None,
            rotation_orbits: None,
            unresolved_cells: 0,
            nudged_eps: None,
        };
        let points: Vec<Cplx<f64>> = (0..64)
            .map(|i| Cplx::from_polar(0.97, std::f64::consts::TAU * i as f64 / 64.0))
            .collect();
        let samples: Vec<f64> = points
            .iter()
            .map(|&z| f(z).norm().ln() / q as f64)
            .collect();
        let d = potential_decomposition(&points, &samples, q, &inv, &spec).unwrap();
        for (h, &z) in d.harmonic.iter().zip(points.iter()) {
            let expect =
                ((z * 0.3).re - std::f64::consts::TAU * gamma_value(z, z0, &spec)) / q as f64;
            assert_relative_eq!(*h, expect, epsilon = 1e-6);
        }
        // left inverse: synthesize v from (h, zeros), decompose, recover h
        let synth: Vec<f64> = points
            .iter()
            .zip(d.harmonic.iter())
            .map(|(&z, &h)| {
                h + std::f64::consts::TAU * green_value(z, z0, &spec).unwrap() / q as f64
            })
            .collect();
        let d2 = potential_decomposition(&points, &synth, q, &inv, &spec).unwrap();
        for (a, b) in d2.harmonic.iter().zip(d.harmonic.iter()) {
            assert_relative_eq!(*a, *b, epsilon = 1e-8);
        }
    }

    #[test]
    fn decomposition_integrity_check() {
        let spec = default_spec();
        let inv = ZeroInventory::<f64> {
            function_tag: "broken".into(),
            eps: 0.05,
            count: 2,
            zeros: vec![ZeroRecord {
                position: Cplx::new(1.0, 0.01),
                residual: 0.0,
                multiplicity: 1,
            }],
            real_pairs: None,
            rotation_orbits: None,
            unresolved_cells: 0,
            nudged_eps: None,
        };
        let pts = [Cplx::new(1.01, 0.0)];
        let smp = [0.0];
        assert!(matches!(
            potential_decomposition(&pts, &smp, 2, &inv, &spec),
            Err(Error::InventoryIntegrity { .. })
        ));
    }

    #[test]
    fn min_term_periodic_family() {
        // exactly periodic family w_j = e^{2 pi i j/q}, z = 1.1: the gap is
        // dominated by the min term itself, log(0.1)/q
        let q = 64usize;
        let f = |z: Cplx<f64>| z.powi(q as i32) - 1.0;
        let inv = locate_zeros(&f, "roots64", 0.002, Some(q as u64)).unwrap();
        assert_eq!(inv.total_multiplicity(), q as i64);
        let z = Cplx::new(1.1, 0.0);
        let rep = min_term_approximation(z, &inv, q).unwrap();
        assert_eq!(rep.families, 1);
        // oracle values: full = log(1.1^64 - 1)/64, min = log 0.1,
        // jensen = log 1.1
        let full = (1.1f64.powi(64) - 1.0).ln() / 64.0;
        assert_relative_eq!(rep.full_sum, full, epsilon = 1e-9);
        assert_relative_eq!(
            rep.min_plus_jensen,
            (0.1f64).ln() / 64.0 + 1.1f64.ln(),
            epsilon = 1e-9
        );
        assert!(rep.gap < 0.04, "gap {}", rep.gap);

        // doubling q roughly halves the gap
        let q2 = 128usize;
        let f2 = |z: Cplx<f64>| z.powi(q2 as i32) - 1.0;
        let inv2 = locate_zeros(&f2, "roots128", 0.002, Some(q2 as u64)).unwrap();
        let rep2 = min_term_approximation(z, &inv2, q2).unwrap();
        let ratio = rep.gap / rep2.gap;
        assert!((1.6..=2.4).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn min_term_far_point() {
        // |z| = R: every distance is comparable, the min term contributes
        // only ~ log(|z| - 1)/q and the sum approaches the Jensen value
        let q = 64usize;
        let f = |z: Cplx<f64>| z.powi(q as i32) - 1.0;
        let inv = locate_zeros(&f, "roots64far", 0.002, Some(q as u64)).unwrap();
        let z = Cplx::new(1.369, 0.0);
        let rep = min_term_approximation(z, &inv, q).unwrap();
        assert!(rep.gap < 0.02, "gap {}", rep.gap);
    }

    #[test]
    fn min_term_family_mismatch() {
        let q = 16usize;
        let f = |z: Cplx<f64>| z.powi(q as i32) - 1.0;
        let inv = locate_zeros(&f, "roots16", 0.002, Some(q as u64)).unwrap();
        assert!(matches!(
            min_term_approximation(Cplx::new(1.05, 0.0), &inv, 8),
            Err(Error::FamilyStructure(_))
        ));
    }
}
