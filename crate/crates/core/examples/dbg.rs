use qplab_core::arithmetic::cf_expand_quotients;
use qplab_core::localization::*;
use qplab_core::model::*;
use qplab_core::zeros::*;
use qplab_core::cocycle::lyapunov_finite;

fn main() {
    // strong-Liouville setup
    let cf = cf_expand_quotients(&[1, 1, 1, 1, 1, 1, 1, 10_000_000]).unwrap();
    let v = Potential::<f64>::amo(2.0);
    let omega = cf.omega_f64();
    let bx = SchrodingerBox::new(v.clone(), omega, 0.1, 500).unwrap();
    let pairs = eigen_solve_box(&bx, (-0.5, 0.5)).unwrap();
    let e = pairs.iter().map(|p| p.energy).min_by(|a, b| a.abs().partial_cmp(&b.abs()).unwrap()).unwrap();
    println!("E = {e}");
    let rep = rouche_transfer(e, &v, &cf, 7, 0.05).unwrap();
    println!("periodicity_dev = {:.3e} max_disp = {:.3e} multi_occ = {} unpaired = {}",
        rep.periodicity_dev, rep.max_displacement, rep.multi_occupancy, rep.unpaired);
    println!("premise sup = {:.4e} bound = {:.4e} unit-circle sup = {:.4e}", rep.premise_sup, rep.premise_bound, rep.premise_sup_unit_circle);
    println!("rational r1 = {} r2 = {} |r1r2-1| = {:.2e}", rep.rational.r1, rep.rational.r2, rep.rational.radius_product_residual);

    // reflection pairing of the irrational inventory
    let (f, _) = scaled_trace_closure(e, &v, omega, 21);
    let refl = reflection_pairing(&f, &rep.irrational_inventory, omega, 21, 1000).unwrap();
    println!("reflection: identity residual = {:.3e} closed = {} closure_gap = {:.3e} min_gap = {:.4}", refl.identity_residual, refl.paired, refl.closure_gap, refl.min_gap);

    // resonance probe: pick the best center pair
    let pair = best_center_pair(&pairs).unwrap();
    println!("probe pair E = {} cw = {:.3}", pair.energy, pair.center_weight);
    let l = lyapunov_finite(pair.energy, &v, omega, 0.0, 2000, 64).unwrap();
    let rep2 = rouche_transfer(pair.energy, &v, &cf, 7, 0.05).unwrap();
    let probe = trace_resonance_probe(&bx, pair, &cf, 7, 0.05, l, Some(&rep2.irrational_inventory)).unwrap();
    println!("probe: v_center = {:.4} threshold = {:.4} below = {} proximity = {:.3e} scale = {:.3e}",
        probe.v_at_center, probe.threshold, probe.below_threshold, probe.zero_proximity, probe.proximity_scale);
    for (k, vv, b) in &probe.ladder {
        println!("  ladder k={k}: v = {vv:.4} bound = {b:.4} above = {}", vv > b);
    }

    // peak profile on the golden box at scale 6 (q = 13)
    let gcf = cf_expand_quotients(&[1; 20]).unwrap();
    let gv = Potential::<f64>::amo(2.0);
    let gbx = SchrodingerBox::new(gv.clone(), gcf.omega_f64(), 0.1, 500).unwrap();
    let gpairs = eigen_solve_box(&gbx, (-0.5, 0.5)).unwrap();
    let gp = best_center_pair(&gpairs).unwrap();
    let gl = lyapunov_finite(gp.energy, &gv, gcf.omega_f64(), 0.0, 2000, 64).unwrap();
    let constants = derive_constants_working(&gv, 1e-8, gl, gcf.beta_proxy(), 2.5).unwrap();
    let part = resonant_partition::<f64>(&gcf, 6, &constants, 100).unwrap();
    let beta6 = gcf.beta_seq()[5];
    let profile = peak_profile(gp, &part, gl, beta6);
    println!("golden pair E = {} cw = {:.3} L = {gl:.4} beta6 = {beta6:.4} bound_rate = {:.4}", gp.energy, gp.center_weight, profile.bound_rate);
    for (k, ratio, pass) in &profile.ratios {
        println!("  k={k}: ratio = {ratio:.4} pass = {pass}");
    }
}
