//! Strong-Liouville scale diagnostics: zero transfer at q = 21 for a
//! frequency with an enormous next quotient, the reflection structure of the
//! irrational trace function, the resonance probe tied to the zero
//! inventory, and peak profiles across the resonant partition.

use qplab_core::arithmetic::cf_expand_quotients;
use qplab_core::cocycle::lyapunov_finite;
use qplab_core::localization::{
    best_center_pair, eigen_solve_box, peak_profile, resonant_partition, trace_resonance_probe,
    SchrodingerBox,
};
use qplab_core::model::{derive_constants_working, Potential};
use qplab_core::zeros::{reflection_pairing, rouche_transfer, scaled_trace_closure};

fn liouville_setup() -> (
    qplab_core::arithmetic::ContinuedFraction,
    Potential<f64>,
    SchrodingerBox<f64>,
    Vec<qplab_core::localization::EigenPair<f64>>,
) {
    let cf = cf_expand_quotients(&[1, 1, 1, 1, 1, 1, 1, 10_000_000]).unwrap();
    let v = Potential::<f64>::amo(2.0);
    let bx = SchrodingerBox::new(v.clone(), cf.omega_f64(), 0.1, 500).unwrap();
    let pairs = eigen_solve_box(&bx, (-0.5, 0.5)).unwrap();
    (cf, v, bx, pairs)
}

#[test]
fn rouche_structure_at_scale_21() {
    let (cf, v, _bx, pairs) = liouville_setup();
    let e = pairs
        .iter()
        .map(|p| p.energy)
        .min_by(|a, b| a.abs().partial_cmp(&b.abs()).unwrap())
        .unwrap();
    let rep = rouche_transfer(e, &v, &cf, 7, 0.05).unwrap();
    assert_eq!(rep.q, 21);
    // every irrational zero pairs inside the e^{-delta q} ball, and the
    // displacements are in fact tiny compared to the ball
    assert_eq!(rep.unpaired, 0);
    assert!(rep.max_displacement < 1e-6, "disp {}", rep.max_displacement);
    assert!(rep.max_displacement <= rep.ball_radius);
    // the zeros stay almost 1/q-periodic within each orbit
    assert!(
        rep.periodicity_dev < 1e-6,
        "periodicity {}",
        rep.periodicity_dev
    );
    // rational generators have reciprocal radii (here both on the circle)
    assert!(rep.rational.radius_product_residual < 1e-8);
    // the sufficient condition ||q omega|| <= e^{-30 delta q} is NOT met at
    // this desk scale; the report must say so rather than hide it
    assert!(!rep.precondition_ok);
    assert!(rep.norm_q_omega > 0.0 && rep.norm_q_omega < 5e-9);
    // the telescoping premise was measured on the annulus grid and on the
    // unit circle; at this scale only the circle restriction holds
    assert!(rep.premise_sup_unit_circle <= rep.premise_bound);
    assert!(rep.premise_sup > 0.0);

    // degenerate control: with v = 0 the trace function is constant in the
    // phase, so both routes coincide and the premise gap is exactly zero
    let vz = Potential::<f64>::zero();
    let (fa, ra) = scaled_trace_closure(0.3, &vz, cf.omega_f64(), 21);
    let (fb, rb) = scaled_trace_closure(0.3, &vz, 13.0 / 21.0, 21);
    let z = qplab_core::Cplx::from_polar(1.01, 0.37);
    let diff = (fa(z) * ra.exp() - fb(z) * rb.exp()).norm();
    assert!(diff < 1e-9, "free-cocycle transfer gap {diff}");
}

#[test]
fn reflection_structure_of_irrational_inventory() {
    let (cf, v, _bx, pairs) = liouville_setup();
    let e = pairs
        .iter()
        .map(|p| p.energy)
        .min_by(|a, b| a.abs().partial_cmp(&b.abs()).unwrap())
        .unwrap();
    let rep = rouche_transfer(e, &v, &cf, 7, 0.05).unwrap();
    let omega = cf.omega_f64();
    let (f, _) = scaled_trace_closure(e, &v, omega, 21);
    let refl = reflection_pairing(&f, &rep.irrational_inventory, omega, 21, 1000).unwrap();
    assert!(refl.identity_residual < 1e-8, "residual {}", refl.identity_residual);
    assert!(refl.paired, "closure gap {}", refl.closure_gap);
    // the two reflection families are separated; the asymptotic comparison
    // scale e^{-delta q/25} = 0.96 exceeds any torus distance at q = 21, so
    // only positivity is meaningful here
    assert!(refl.min_gap > 1e-3, "min gap {}", refl.min_gap);
}

#[test]
fn resonance_probe_ties_to_zero_inventory() {
    let (cf, v, bx, pairs) = liouville_setup();
    let pair = best_center_pair(&pairs).unwrap();
    let l = lyapunov_finite(pair.energy, &v, cf.omega_f64(), 0.0, 2000, 64).unwrap();
    let rep = rouche_transfer(pair.energy, &v, &cf, 7, 0.05).unwrap();
    let probe = trace_resonance_probe(
        &bx,
        pair,
        &cf,
        7,
        0.05,
        l,
        Some(&rep.irrational_inventory),
    )
    .unwrap();
    // the probe phase point sits within the e^{-delta q} ball of a zero
    assert!(
        probe.zero_proximity < probe.proximity_scale,
        "proximity {} vs {}",
        probe.zero_proximity,
        probe.proximity_scale
    );
    assert!(probe.zero_proximity < 1e-5);
    // beta_7 = log(2.1e8)/21 = 0.91 exceeds L at this scale, so the
    // threshold L - beta_n - 12 delta is negative and the sublevel claim is
    // vacuous; the probe must report that honestly
    assert!(probe.threshold < 0.0);
    assert!(!probe.below_threshold);
    // ladder points k = +-1..3 all clear their (vacuous) growth bounds
    assert_eq!(probe.ladder.len(), 6);
    for (k, value, bound) in &probe.ladder {
        assert!(value > bound, "ladder k = {k}: {value} <= {bound}");
    }
    // missing inventory is an explicit error
    assert!(trace_resonance_probe(&bx, pair, &cf, 7, 0.05, l, None).is_err());
}

#[test]
fn golden_peak_profile_decays_at_resonances() {
    let cf = cf_expand_quotients(&[1; 20]).unwrap();
    let v = Potential::<f64>::amo(2.0);
    let bx = SchrodingerBox::new(v.clone(), cf.omega_f64(), 0.1, 500).unwrap();
    let pairs = eigen_solve_box(&bx, (-0.5, 0.5)).unwrap();
    let pair = best_center_pair(&pairs).unwrap();
    let l = lyapunov_finite(pair.energy, &v, cf.omega_f64(), 0.0, 2000, 64).unwrap();
    let constants = derive_constants_working(&v, 1e-8, l, cf.beta_proxy(), 2.5).unwrap();
    // scale 6: q = 13, beta_6 = log(21)/13
    let part = resonant_partition::<f64>(&cf, 6, &constants, 100).unwrap();
    assert_eq!(part.q_n, 13);
    let beta6 = cf.beta_seq()[5];
    let profile = peak_profile(pair, &part, l, beta6);
    assert!(!profile.ratios.is_empty());
    // conservative finite-n check: every peak at |k| >= 2 decays at least at
    // half the Lyapunov rate; the full -(1 - 1/50)(L - beta_6) bound holds
    // for all but the nearest peak
    let half_l = -0.5 * std::f64::consts::LN_2;
    let mut full_bound_failures = 0;
    for &(k, ratio, pass) in &profile.ratios {
        if k.abs() >= 2 {
            assert!(ratio <= half_l, "k = {k}: ratio {ratio} above half rate");
        }
        if !pass {
            full_bound_failures += 1;
        }
    }
    assert!(
        full_bound_failures <= 1,
        "{full_bound_failures} peaks violated the full bound"
    );

    // weak-regime domination: between adjacent regimes the eigenfunction is
    // bounded by the larger neighbouring peak
    for w in part.regimes.windows(2) {
        let (_, _, hi_left) = w[0];
        let (_, lo_right, _) = w[1];
        if hi_left + 1 > lo_right - 1 || hi_left < -480 || lo_right > 480 {
            continue;
        }
        let peak_left: f64 = (w[0].1..=w[0].2)
            .map(|y| SchrodingerBox::phi_at(pair, y).abs())
            .fold(0.0, f64::max);
        let peak_right: f64 = (w[1].1..=w[1].2)
            .map(|y| SchrodingerBox::phi_at(pair, y).abs())
            .fold(0.0, f64::max);
        for y in (hi_left + 1)..(lo_right - 1) {
            let val = SchrodingerBox::phi_at(pair, y).abs();
            assert!(
                val <= peak_left.max(peak_right) * (1.0 + 1e-9),
                "weak-regime site {y} above both adjacent peaks"
            );
        }
    }
}
