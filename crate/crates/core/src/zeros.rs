//! Argument-principle zero counting and localization on annuli around the
//! unit circle, plus the structural checks tied to the trace function:
//! rotation orbits for rational frequencies, real-symmetry closure,
//! reflection closure for even potentials, and rational-to-irrational zero
//! transfer.
//!
//! Windings are computed by adaptive phase tracking: a step is accepted only
//! when the phase increment stays below pi/2, which guarantees correct
//! unwrapping without evaluating derivatives. Localization subdivides the
//! annulus (in angle / log-radius coordinates) by the argument principle per
//! cell and polishes with Newton on a centered finite difference.

use serde::Serialize;

use crate::arithmetic::ContinuedFraction;
use crate::cocycle::{g_rel_level, lyapunov_finite, lyapunov_rational_avg, phase_of_z, trace_f, trace_f_entire};
use crate::error::{Error, Result};
use crate::model::Potential;
use crate::scalar::{torus_norm, Cplx, Real};

/// A located zero.
#[derive(Debug, Clone, Serialize)]
pub struct ZeroRecord<R: Real> {
    pub position: Cplx<R>,
    /// `|f|` at the located point (of the scaled function handed in).
    pub residual: R,
    pub multiplicity: u32,
}

/// Counted and located zeros of an analytic function on a sub-annulus
/// `e^{-2 pi eps} < |z| < e^{2 pi eps}`.
#[derive(Debug, Clone, Serialize)]
pub struct ZeroInventory<R: Real> {
    pub function_tag: String,
    /// Sub-annulus half-width in imaginary-phase units.
    pub eps: R,
    /// Argument-principle count (winding difference of the two circles).
    pub count: i64,
    pub zeros: Vec<ZeroRecord<R>>,
    /// Index of the `1/conj(z)` partner per zero, when computed.
    pub real_pairs: Option<Vec<Option<usize>>>,
    /// `(orbit, j)` rotation labels per zero, when computed.
    pub rotation_orbits: Option<Vec<(usize, usize)>>,
    pub unresolved_cells: usize,
    pub nudged_eps: Option<R>,
}

impl<R: Real> ZeroInventory<R> {
    pub fn positions(&self) -> Vec<Cplx<R>> {
        self.zeros.iter().map(|z| z.position).collect()
    }

    pub fn total_multiplicity(&self) -> i64 {
        self.zeros.iter().map(|z| z.multiplicity as i64).sum()
    }

    /// Max over zeros of the distance to the nearest `1/conj(z)` image of a
    /// zero; fills `real_pairs`.
    pub fn real_symmetry_closure(&mut self) -> R {
        let pos = self.positions();
        let mut worst = R::zero();
        let mut pairs = Vec::with_capacity(pos.len());
        for z in &pos {
            let target = z.conj().inv();
            let mut best = R::infinity();
            let mut best_j = None;
            for (j, w) in pos.iter().enumerate() {
                let d = (*w - target).norm();
                if d < best {
                    best = d;
                    best_j = Some(j);
                }
            }
            worst = worst.max(best);
            pairs.push(best_j);
        }
        self.real_pairs = Some(pairs);
        worst
    }

    /// Max over zeros of the distance to the nearest zero after rotation by
    /// `e^{2 pi i p/q}`.
    pub fn rotation_closure(&self, p: u64, q: u64) -> R {
        let pos = self.positions();
        let rot = Cplx::from_polar(R::one(), R::tau() * R::of(p as f64) / R::of(q as f64));
        let mut worst = R::zero();
        for z in &pos {
            let target = *z * rot;
            let mut best = R::infinity();
            for w in &pos {
                best = best.min((*w - target).norm());
            }
            worst = worst.max(best);
        }
        worst
    }
}

/// Result of [`count_zeros`].
#[derive(Debug, Clone, Copy, Serialize)]
pub struct CountResult<R: Real> {
    pub count: i64,
    pub eps_used: R,
    pub nudged: bool,
}

const PHASE_DEPTH: u32 = 26;

fn segment_phase<R: Real, F>(
    f: &F,
    path: &impl Fn(R) -> Cplx<R>,
    t0: R,
    t1: R,
    f0: Cplx<R>,
    f1: Cplx<R>,
    depth: u32,
) -> Result<R>
where
    F: Fn(Cplx<R>) -> Cplx<R>,
{
    if f0.norm() == R::zero() || f1.norm() == R::zero() {
        return Err(Error::ZeroOnContour);
    }
    let d = (f1 / f0).arg();
    if d.abs() < R::FRAC_PI_2() {
        return Ok(d);
    }
    if depth == 0 {
        return Err(Error::PhaseTracking);
    }
    let tm = (t0 + t1) / R::of(2.0);
    let fm = f(path(tm));
    Ok(segment_phase(f, path, t0, tm, f0, fm, depth - 1)?
        + segment_phase(f, path, tm, t1, fm, f1, depth - 1)?)
}

/// Winding number (in turns) of `f` along the closed path `t -> path(t)`,
/// `t` in `[0, 1]`, by adaptive phase tracking.
pub fn winding_closed<R: Real, F, P>(f: &F, path: &P, base_nodes: usize) -> Result<R>
where
    F: Fn(Cplx<R>) -> Cplx<R>,
    P: Fn(R) -> Cplx<R>,
{
    let n = base_nodes.max(16);
    let ts: Vec<R> = (0..=n).map(|i| R::of_usize(i) / R::of_usize(n)).collect();
    let vals: Vec<Cplx<R>> = ts.iter().map(|&t| f(path(t))).collect();
    let mut total = R::zero();
    for i in 0..n {
        total += segment_phase(f, path, ts[i], ts[i + 1], vals[i], vals[i + 1], PHASE_DEPTH)?;
    }
    Ok(total / R::tau())
}

fn winding_circle<R: Real, F>(f: &F, radius: R, base_nodes: usize) -> Result<i64>
where
    F: Fn(Cplx<R>) -> Cplx<R>,
{
    let path = |t: R| Cplx::from_polar(radius, R::tau() * t);
    let w = winding_closed(f, &path, base_nodes)?;
    let rounded = w.round();
    if (w - rounded).abs() > R::of(1e-3) {
        return Err(Error::NonIntegerWinding {
            winding: w.to_f64().unwrap_or(f64::NAN),
        });
    }
    Ok(rounded.to_f64().unwrap_or(0.0) as i64)
}

fn circle_min_max<R: Real, F>(f: &F, radius: R, nodes: usize) -> (R, R)
where
    F: Fn(Cplx<R>) -> Cplx<R>,
{
    let mut min = R::infinity();
    let mut max = R::zero();
    for i in 0..nodes {
        let z = Cplx::from_polar(radius, R::tau() * R::of_usize(i) / R::of_usize(nodes));
        let n = f(z).norm();
        min = min.min(n);
        max = max.max(n);
    }
    (min, max)
}

/// Count zeros of `f` in the sub-annulus `e^{-2 pi eps} < |z| < e^{2 pi eps}`
/// by the winding difference of the bounding circles.
///
/// If the function dips toward zero on a bounding circle, `eps` is nudged by
/// less than 1% (a few attempts) and the nudge is reported.
pub fn count_zeros<R: Real, F>(f: &F, eps: R) -> Result<CountResult<R>>
where
    F: Fn(Cplx<R>) -> Cplx<R>,
{
    count_zeros_with_nodes(f, eps, 256)
}

/// Count with node doubling until two consecutive node budgets agree.
pub fn count_zeros_stable<R: Real, F>(f: &F, eps: R) -> Result<CountResult<R>>
where
    F: Fn(Cplx<R>) -> Cplx<R>,
{
    let mut prev: Option<CountResult<R>> = None;
    let mut nodes = 256usize;
    while nodes <= 8192 {
        let cur = count_zeros_with_nodes(f, eps, nodes)?;
        if let Some(p) = prev {
            if p.count == cur.count {
                return Ok(cur);
            }
        }
        prev = Some(cur);
        nodes *= 2;
    }
    Err(Error::PhaseTracking)
}

pub fn count_zeros_with_nodes<R: Real, F>(
    f: &F,
    eps: R,
    base_nodes: usize,
) -> Result<CountResult<R>>
where
    F: Fn(Cplx<R>) -> Cplx<R>,
{
    if eps <= R::zero() {
        return Err(Error::invalid("zeros", "eps must be positive"));
    }
    let nudges = [0.0, 0.003, -0.003, 0.006, -0.006, 0.009, -0.009];
    for (i, &nudge) in nudges.iter().enumerate() {
        let eps_used = eps * R::of(1.0 + nudge);
        let r_out = (R::tau() * eps_used).exp();
        let r_in = r_out.recip();
        let (min_o, max_o) = circle_min_max(f, r_out, base_nodes);
        let (min_i, max_i) = circle_min_max(f, r_in, base_nodes);
        let floor = R::of(1e-12) * max_o.max(max_i);
        if min_o <= floor || min_i <= floor {
            continue;
        }
        let w_out = winding_circle(f, r_out, base_nodes)?;
        let w_in = winding_circle(f, r_in, base_nodes)?;
        return Ok(CountResult {
            count: w_out - w_in,
            eps_used,
            nudged: i > 0,
        });
    }
    Err(Error::ZeroOnContour)
}

// --- localization ---------------------------------------------------------

#[derive(Debug, Clone, Copy)]
struct Cell<R: Real> {
    t0: R,
    t1: R,
    s0: R,
    s1: R,
}

impl<R: Real> Cell<R> {
    fn z(&self, t: R, s: R) -> Cplx<R> {
        Cplx::from_polar(s.exp(), R::tau() * t)
    }

    fn center(&self) -> Cplx<R> {
        self.z(
            (self.t0 + self.t1) / R::of(2.0),
            (self.s0 + self.s1) / R::of(2.0),
        )
    }

    /// Diameter in the z metric (angle span is scaled by 2 pi).
    fn diameter(&self) -> R {
        let dt = (self.t1 - self.t0) * R::tau();
        let ds = self.s1 - self.s0;
        (dt * dt + ds * ds).sqrt()
    }

    /// Whether `z` lies in the cell (tight margin); guards Newton against
    /// wandering to a root outside the cell.
    fn contains_loosely(&self, z: Cplx<R>) -> bool {
        let t_mid = (self.t0 + self.t1) / R::of(2.0);
        let s_mid = (self.s0 + self.s1) / R::of(2.0);
        let t_half = (self.t1 - self.t0) / R::of(2.0);
        let s_half = (self.s1 - self.s0) / R::of(2.0);
        let tz = z.arg() / R::tau();
        let dt = {
            let d = tz - t_mid;
            (d - d.round()).abs()
        };
        let ds = (z.norm().ln() - s_mid).abs();
        dt <= t_half + R::of(1e-7) && ds <= s_half + R::of(1e-7)
    }

    fn winding<R2, F>(&self, f: &F, nodes: usize) -> Result<i64>
    where
        R2: Real,
        F: Fn(Cplx<R>) -> Cplx<R>,
    {
        // counterclockwise in the conformal coordinate s + 2 pi i t:
        // (t0,s0)->(t0,s1)->(t1,s1)->(t1,s0)->(t0,s0)
        let c = *self;
        let path = move |u: R| {
            let four = R::of(4.0);
            let seg = (u * four).floor().min(R::of(3.0));
            let frac = u * four - seg;
            let seg = seg.to_f64().unwrap_or(0.0) as i32;
            match seg {
                0 => c.z(c.t0, c.s0 + (c.s1 - c.s0) * frac),
                1 => c.z(c.t0 + (c.t1 - c.t0) * frac, c.s1),
                2 => c.z(c.t1, c.s1 - (c.s1 - c.s0) * frac),
                _ => c.z(c.t1 - (c.t1 - c.t0) * frac, c.s0),
            }
        };
        let w = winding_closed(f, &path, nodes)?;
        let rounded = w.round();
        if (w - rounded).abs() > R::of(1e-3) {
            return Err(Error::NonIntegerWinding {
                winding: w.to_f64().unwrap_or(f64::NAN),
            });
        }
        Ok(rounded.to_f64().unwrap_or(0.0) as i64)
    }
}

fn newton_polish<R: Real, F>(f: &F, start: Cplx<R>) -> (Cplx<R>, R)
where
    F: Fn(Cplx<R>) -> Cplx<R>,
{
    let mut z = start;
    for _ in 0..80 {
        let h = R::of(1e-7) * z.norm().max(R::of(0.1));
        let hc = Cplx::new(h, R::zero());
        let df = (f(z + hc) - f(z - hc)) / (hc * R::of(2.0));
        if df.norm() == R::zero() {
            break;
        }
        let step = f(z) / df;
        z -= step;
        if step.norm() < R::of(1e-14) * z.norm().max(R::of(1e-3)) {
            break;
        }
    }
    (z, f(z).norm())
}

/// Split fractions tried when a zero sits on a proposed cell boundary.
const SPLIT_FRACTIONS: [f64; 4] = [0.5, 0.47, 0.55, 0.41];

/// Locate all zeros of `f` in the sub-annulus of half-width `eps` by
/// recursive subdivision (argument principle per cell) and Newton polish.
///
/// With `rotation_hint = Some(q)` only one fundamental sector of angle `1/q`
/// is searched; the orbit is completed by exact rotations and each replica
/// re-polished.
pub fn locate_zeros<R: Real, F>(
    f: &F,
    tag: &str,
    eps: R,
    rotation_hint: Option<u64>,
) -> Result<ZeroInventory<R>>
where
    F: Fn(Cplx<R>) -> Cplx<R>,
{
    let counted = count_zeros_stable(f, eps)?;
    let h = R::tau() * counted.eps_used;
    let mut unresolved = 0usize;
    let mut found: Vec<(Cplx<R>, R, u32)> = Vec::new();

    // angle origin chosen off any lattice the zeros are likely to sit on
    let t_origin = R::of(-0.02718281828);
    let (span, expected) = match rotation_hint {
        Some(q) if counted.count % (q as i64) == 0 && q > 1 => {
            (R::one() / R::of(q as f64), counted.count / q as i64)
        }
        _ => (R::one(), counted.count),
    };
    let hint_q = if span < R::one() { rotation_hint } else { None };

    if expected > 0 {
        let root = Cell {
            t0: t_origin,
            t1: t_origin + span,
            s0: -h,
            s1: h,
        };
        let mut stack = vec![(root, expected)];
        let mut budget = 40_000i64;
        while let Some((cell, w)) = stack.pop() {
            budget -= 1;
            if budget < 0 {
                unresolved += stack.len() + 1;
                break;
            }
            if w == 0 {
                continue;
            }
            let tiny = cell.diameter() < R::of(1e-9);
            if w == 1 || tiny {
                let (z, res) = newton_polish(f, cell.center());
                if cell.contains_loosely(z) {
                    found.push((z, res, w as u32));
                    continue;
                }
                if tiny {
                    // polish left a tiny cell: the center is the zero to
                    // within the cell tolerance
                    let c = cell.center();
                    found.push((c, f(c).norm(), w as u32));
                    continue;
                }
                // wandered: fall through and split the cell instead
            }
            // split the longer side; jitter if a zero sits on the cut,
            // and retry with denser sampling when the phase tracking
            // aliases (sub-windings must be in [0, w] and sum to w)
            let split_t = (cell.t1 - cell.t0) * R::tau() >= cell.s1 - cell.s0;
            let base_nodes = (8 * w.unsigned_abs() as usize).max(32);
            let mut done = false;
            'fracs: for &frac in &SPLIT_FRACTIONS {
                let frac = R::of(frac);
                let (a, b) = if split_t {
                    let tm = cell.t0 + (cell.t1 - cell.t0) * frac;
                    (
                        Cell { t1: tm, ..cell },
                        Cell { t0: tm, ..cell },
                    )
                } else {
                    let sm = cell.s0 + (cell.s1 - cell.s0) * frac;
                    (
                        Cell { s1: sm, ..cell },
                        Cell { s0: sm, ..cell },
                    )
                };
                for attempt in 0..3u32 {
                    let nodes = base_nodes << attempt;
                    let wa = match a.winding::<R, F>(f, nodes) {
                        Ok(x) => x,
                        Err(_) => continue,
                    };
                    let wb = match b.winding::<R, F>(f, nodes) {
                        Ok(x) => x,
                        Err(_) => continue,
                    };
                    if wa < 0 || wb < 0 || wa + wb != w {
                        continue;
                    }
                    stack.push((a, wa));
                    stack.push((b, wb));
                    done = true;
                    break 'fracs;
                }
            }
            if !done {
                unresolved += 1;
            }
        }
    }

    // complete rotation orbits from the fundamental sector
    if let Some(q) = hint_q {
        let mut all = Vec::new();
        for &(z, _res, m) in &found {
            for j in 0..q {
                let ang = R::tau() * R::of(j as f64) / R::of(q as f64);
                let zr = z * Cplx::from_polar(R::one(), ang);
                let (zp, res) = newton_polish(f, zr);
                // the replica is an exact zero in exact arithmetic; keep the
                // unpolished point if the polish jumped away
                if (zp - zr).norm() < R::of(1e-4) * zr.norm().max(R::of(0.1)) {
                    all.push((zp, res, m));
                } else {
                    all.push((zr, f(zr).norm(), m));
                }
            }
        }
        found = all;
    }

    // merge zeros closer than the cluster tolerance; sources are disjoint
    // cells (or distinct rotation replicas), so multiplicities add
    found.sort_by(|a, b| {
        (a.0.re, a.0.im)
            .partial_cmp(&(b.0.re, b.0.im))
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let mut zeros: Vec<ZeroRecord<R>> = Vec::new();
    for (z, res, m) in found {
        if let Some(last) = zeros.iter_mut().find(|r| (r.position - z).norm() < R::of(1e-8)) {
            if last.residual > res {
                last.position = z;
                last.residual = res;
            }
            last.multiplicity += m;
        } else {
            zeros.push(ZeroRecord {
                position: z,
                residual: res,
                multiplicity: m,
            });
        }
    }

    Ok(ZeroInventory {
        function_tag: tag.to_string(),
        eps: counted.eps_used,
        count: counted.count,
        zeros,
        real_pairs: None,
        rotation_orbits: None,
        unresolved_cells: unresolved,
        nudged_eps: counted.nudged.then_some(counted.eps_used),
    })
}

// --- trace-function closures ----------------------------------------------

/// Scaled closure `z -> f_{n,E}(z) e^{-ref_log}`; the reference scale keeps
/// values representable. Returns the closure and `ref_log`.
pub fn scaled_trace_closure<'a, R: Real>(
    energy: R,
    v: &'a Potential<R>,
    omega: R,
    n: usize,
) -> (impl Fn(Cplx<R>) -> Cplx<R> + 'a, R) {
    let probe = trace_f(energy, v, omega, Cplx::new(R::of(0.123), R::zero()), n)
        .map(|lv| lv.log_abs)
        .unwrap_or(R::zero());
    let ref_log = probe.max(R::zero());
    // trig-polynomial potentials are entire: the closure may be evaluated a
    // little outside the declared strip (Newton excursions)
    let f = move |z: Cplx<R>| {
        let lv = trace_f_entire(energy, v, omega, phase_of_z(z), n);
        lv.phase * (lv.log_abs - ref_log).exp()
    };
    (f, ref_log)
}

// --- rational zero structure ------------------------------------------------

/// Generators and orbit certification for the zeros of `f^{p_n/q_n}_{q_n}`.
#[derive(Debug, Clone, Serialize)]
pub struct RationalZeroStructure<R: Real> {
    pub p: u64,
    pub q: u64,
    pub z1: Cplx<R>,
    pub z2: Cplx<R>,
    pub r1: R,
    pub r2: R,
    /// `|r1 r2 - 1|`.
    pub radius_product_residual: R,
    pub count: i64,
    pub count_is_2q: bool,
    pub rotation_closure_error: R,
    pub inventory: ZeroInventory<R>,
}

/// Extract the two rotation-orbit generators of the `2 q_n` zeros of the
/// rational trace function on the sub-annulus of half-width `eps`.
///
/// Errors with the actual count if the argument principle does not give
/// `2 q_n` (a finite-`n` effect worth surfacing, not hiding).
pub fn rational_zero_structure<R: Real>(
    energy: R,
    v: &Potential<R>,
    cf: &ContinuedFraction,
    n_conv: usize,
    eps: R,
) -> Result<RationalZeroStructure<R>> {
    let (p, q) = cf.p_over_q_f64(n_conv)?;
    let p = u64::try_from(p).map_err(|_| Error::invalid("zeros", "negative numerator"))?;
    let omega = R::of(p as f64) / R::of(q as f64);
    let (f, _) = scaled_trace_closure(energy, v, omega, q as usize);
    let counted = count_zeros_stable(&f, eps)?;
    if counted.count != 2 * q as i64 {
        return Err(Error::UnexpectedZeroCount {
            expected: 2 * q as i64,
            actual: counted.count,
        });
    }
    let mut inventory = locate_zeros(&f, &format!("f^{p}/{q}_{q}"), eps, Some(q))?;

    // group by angle residue mod 1/q
    let qf = R::of(q as f64);
    let mut residues: Vec<(R, usize)> = inventory
        .zeros
        .iter()
        .enumerate()
        .map(|(i, z)| {
            let ang = z.position.arg() / R::tau(); // in turns
            let res = (ang * qf).fract();
            let res = if res < R::zero() { res + R::one() } else { res };
            (res, i)
        })
        .collect();
    residues.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap_or(std::cmp::Ordering::Equal));

    // two groups separated by the two largest circular gaps
    let m = residues.len();
    let mut gaps: Vec<(R, usize)> = (0..m)
        .map(|i| {
            let next = (i + 1) % m;
            let mut d = residues[next].0 - residues[i].0;
            if d < R::zero() {
                d += R::one();
            }
            (d, i)
        })
        .collect();
    gaps.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap_or(std::cmp::Ordering::Equal));
    let (cut1, cut2) = (gaps[0].1, gaps[1].1);
    let (lo, hi) = if cut1 < cut2 { (cut1, cut2) } else { (cut2, cut1) };
    let group_a: Vec<usize> = residues[lo + 1..=hi].iter().map(|r| r.1).collect();
    let group_b: Vec<usize> = residues[hi + 1..]
        .iter()
        .chain(residues[..=lo].iter())
        .map(|r| r.1)
        .collect();

    let mut orbits = vec![(0usize, 0usize); inventory.zeros.len()];
    for (s, group) in [(0usize, &group_a), (1usize, &group_b)] {
        for (j, &i) in group.iter().enumerate() {
            orbits[i] = (s, j);
        }
    }
    inventory.rotation_orbits = Some(orbits);

    let geo_mean = |group: &[usize]| -> R {
        let sum: R = group
            .iter()
            .map(|&i| inventory.zeros[i].position.norm().ln())
            .sum();
        (sum / R::of_usize(group.len().max(1))).exp()
    };
    let (ra, rb) = (geo_mean(&group_a), geo_mean(&group_b));
    let pick = |group: &[usize]| -> Cplx<R> {
        // representative with angle residue in [0, 1/q)
        let mut best = inventory.zeros[group[0]].position;
        let mut best_ang = R::infinity();
        for &i in group {
            let ang = inventory.zeros[i].position.arg() / R::tau();
            let ang = if ang < R::zero() { ang + R::one() } else { ang };
            if ang < best_ang && ang < R::one() / qf {
                best_ang = ang;
                best = inventory.zeros[i].position;
            }
        }
        best
    };
    let (z1, z2, r1, r2) = if ra >= rb {
        (pick(&group_a), pick(&group_b), ra, rb)
    } else {
        (pick(&group_b), pick(&group_a), rb, ra)
    };
    let rotation_closure_error = inventory.rotation_closure(p, q);
    Ok(RationalZeroStructure {
        p,
        q,
        z1,
        z2,
        r1,
        r2,
        radius_product_residual: (r1 * r2 - R::one()).abs(),
        count: counted.count,
        count_is_2q: true,
        rotation_closure_error,
        inventory,
    })
}

// --- Rouché transfer ---------------------------------------------------------

/// Pairing of the zeros of `f^{omega}_{q_n}` with the rational zeros, plus
/// the telescoping premise measured on the annulus grid.
#[derive(Debug, Clone, Serialize)]
pub struct RoucheReport<R: Real> {
    pub p: u64,
    pub q: u64,
    pub delta: R,
    pub norm_q_omega: f64,
    /// `||q omega|| <= e^{-30 delta q}` (the sufficient condition for the
    /// ball argument); reported, the transfer is attempted either way.
    pub precondition_ok: bool,
    pub ball_radius: R,
    pub max_displacement: R,
    pub unpaired: usize,
    /// Rational zeros receiving two or more partners (allowed, recorded).
    pub multi_occupancy: usize,
    /// `sup |f^omega - f^{p/q}|` over the annulus grid.
    pub premise_sup: R,
    /// `e^{(L + 2 pi delta + delta) q} ||q omega||`.
    pub premise_bound: R,
    pub premise_ok: bool,
    /// Same premise restricted to the unit circle.
    pub premise_sup_unit_circle: R,
    pub premise_ok_unit_circle: bool,
    pub lyapunov_used: R,
    /// Max deviation in `theta^{omega}_{j,s} - theta^{omega}_{k,s} -
    /// (j-k) p/q` over same-orbit pairs.
    pub periodicity_dev: R,
    pub irrational_inventory: ZeroInventory<R>,
    pub rational: RationalZeroStructure<R>,
}

/// Locate the zeros of the irrational-frequency trace function at scale
/// `q_n` and pair them with the rational structure inside
/// `e^{-delta q}`-balls.
pub fn rouche_transfer<R: Real>(
    energy: R,
    v: &Potential<R>,
    cf: &ContinuedFraction,
    n_conv: usize,
    delta: R,
) -> Result<RoucheReport<R>> {
    let rational = rational_zero_structure(energy, v, cf, n_conv, delta)?;
    let (p, q) = (rational.p, rational.q);
    let omega = R::of(cf.omega_f64());
    let norm_q_omega = cf.norm_q_omega_f64(n_conv)?;
    let qf = R::of(q as f64);
    let precondition_ok = norm_q_omega <= (-30.0 * delta.to_f64().unwrap_or(0.0) * q as f64).exp();

    let (f_irr, _) = scaled_trace_closure(energy, v, omega, q as usize);
    let irr = locate_zeros(&f_irr, &format!("f^omega_{q}"), delta, None)?;

    let ball_radius = (-delta * qf).exp();
    let rat_pos = rational.inventory.positions();
    let mut max_disp = R::zero();
    let mut unpaired = 0usize;
    let mut occupancy = vec![0usize; rat_pos.len()];
    let mut partner: Vec<Option<usize>> = Vec::new();
    for z in irr.positions() {
        let mut best = R::infinity();
        let mut best_j = None;
        for (j, w) in rat_pos.iter().enumerate() {
            let d = (*w - z).norm();
            if d < best {
                best = d;
                best_j = Some(j);
            }
        }
        if best <= ball_radius {
            occupancy[best_j.expect("nonempty")] += 1;
            partner.push(best_j);
            max_disp = max_disp.max(best);
        } else {
            unpaired += 1;
            partner.push(None);
        }
    }
    let multi_occupancy = occupancy.iter().filter(|&&c| c >= 2).count();

    // telescoping premise on the annulus grid
    let l_used = lyapunov_rational_avg(energy, v, p, q, R::zero(), 64)?;
    let bound =
        ((l_used + R::tau() * delta + delta) * qf).exp() * R::of(norm_q_omega);
    let omega_rat = R::of(p as f64) / R::of(q as f64);
    let (f_rat, rat_ref) = scaled_trace_closure(energy, v, omega_rat, q as usize);
    let (f_irr2, irr_ref) = scaled_trace_closure(energy, v, omega, q as usize);
    let mut sup = R::zero();
    let mut sup_unit = R::zero();
    let radii = 9usize;
    let angles = 64 * q as usize;
    for i in 0..radii {
        let s = delta * (R::of(2.0) * R::of_usize(i) / R::of_usize(radii - 1) - R::one());
        let r = (R::tau() * s).exp();
        for a in 0..angles {
            let z = Cplx::from_polar(r, R::tau() * R::of_usize(a) / R::of_usize(angles));
            let fr = f_rat(z) * rat_ref.exp();
            let fi = f_irr2(z) * irr_ref.exp();
            let d = (fr - fi).norm();
            sup = sup.max(d);
            if i == radii / 2 {
                sup_unit = sup_unit.max(d);
            }
        }
    }

    // almost 1/q-periodicity of the irrational zeros: within an orbit the
    // angle differences are multiples of p/q (equivalently of 1/q since
    // gcd(p, q) = 1) up to the transfer error
    let orbit_of = rational
        .inventory
        .rotation_orbits
        .as_ref()
        .expect("rational structure labels orbits");
    let mut by_orbit: [Vec<R>; 2] = [Vec::new(), Vec::new()];
    for (i, pt) in irr.positions().iter().enumerate() {
        if let Some(Some(j)) = partner.get(i) {
            let (s, _) = orbit_of[*j];
            by_orbit[s].push(pt.arg() / R::tau());
        }
    }
    let mut periodicity_dev = R::zero();
    for orbit in &by_orbit {
        for a in 0..orbit.len() {
            for b in (a + 1)..orbit.len() {
                let dev = torus_norm(qf * (orbit[a] - orbit[b])) / qf;
                periodicity_dev = periodicity_dev.max(dev);
            }
        }
    }

    Ok(RoucheReport {
        p,
        q,
        delta,
        norm_q_omega,
        precondition_ok,
        ball_radius,
        max_displacement: max_disp,
        unpaired,
        multi_occupancy,
        premise_sup: sup,
        premise_bound: bound,
        premise_ok: sup <= bound,
        premise_sup_unit_circle: sup_unit,
        premise_ok_unit_circle: sup_unit <= bound,
        lyapunov_used: l_used,
        periodicity_dev,
        irrational_inventory: irr,
        rational,
    })
}

// --- reflection pairing -------------------------------------------------------

/// Reflection-closure report for even potentials:
/// `f(z) = f(e^{-2 pi i (n-1) omega} / z)`.
#[derive(Debug, Clone, Serialize)]
pub struct ReflectionReport<R: Real> {
    /// Max over a circle grid of `|f(z) - f(rot/z)| / max |f|`.
    pub identity_residual: R,
    /// Max distance from a reflected zero to the nearest zero.
    pub closure_gap: R,
    pub paired: bool,
    /// Min angular distance between one reflection family and the image of
    /// the other; compares with `e^{-delta q_n / 25}`.
    pub min_gap: R,
}

/// Verify the reflection identity on a circle grid and the closure of the
/// inventory under `z -> e^{-2 pi i (n-1) omega} / z`.
pub fn reflection_pairing<R: Real, F>(
    f: &F,
    inventory: &ZeroInventory<R>,
    omega: R,
    n: usize,
    circle_points: usize,
) -> Result<ReflectionReport<R>>
where
    F: Fn(Cplx<R>) -> Cplx<R>,
{
    let rot = Cplx::from_polar(R::one(), -R::tau() * R::of_usize(n - 1) * omega);
    let mut max_diff = R::zero();
    let mut max_f = R::zero();
    for i in 0..circle_points {
        let z = Cplx::from_polar(R::one(), R::tau() * R::of_usize(i) / R::of_usize(circle_points));
        let a = f(z);
        let b = f(rot / z);
        max_diff = max_diff.max((a - b).norm());
        max_f = max_f.max(a.norm());
    }
    if max_f == R::zero() {
        return Err(Error::invalid("zeros", "function vanishes on the circle grid"));
    }
    let identity_residual = max_diff / max_f;

    let pos = inventory.positions();
    let mut closure_gap = R::zero();
    let mut partner = Vec::with_capacity(pos.len());
    for z in &pos {
        let target = rot / *z;
        let mut best = R::infinity();
        let mut best_j = 0usize;
        for (j, w) in pos.iter().enumerate() {
            let d = (*w - target).norm();
            if d < best {
                best = d;
                best_j = j;
            }
        }
        closure_gap = closure_gap.max(best);
        partner.push(best_j);
    }

    // split into a family and its reflected image; min gap between the
    // family angles and the reflected family angles
    let mut family = Vec::new();
    let mut seen = vec![false; pos.len()];
    for i in 0..pos.len() {
        if !seen[i] {
            seen[i] = true;
            seen[partner[i]] = true;
            family.push(i);
        }
    }
    let shift = R::of_usize(n - 1) * omega;
    let mut min_gap = R::infinity();
    for &i in &family {
        for &j in &family {
            let ti = pos[i].arg() / R::tau();
            let tj = pos[j].arg() / R::tau();
            min_gap = min_gap.min(torus_norm(ti + tj + shift));
        }
    }

    Ok(ReflectionReport {
        identity_residual,
        closure_gap,
        paired: closure_gap < R::of(1e-6),
        min_gap,
    })
}

// --- level sets of g ----------------------------------------------------------

/// Zero count of `g_m - e^{2m(L_m - delta)}` on the sub-annulus of
/// half-width `eps1`.
#[derive(Debug, Clone, Serialize)]
pub struct GLevelCount<R: Real> {
    pub m: usize,
    pub delta: R,
    pub l_m: R,
    pub level_log: R,
    pub count: i64,
    pub eps_used: R,
    pub nudged: bool,
}

pub fn g_level_zero_count<R: Real>(
    energy: R,
    v: &Potential<R>,
    omega: R,
    m: usize,
    delta: R,
    eps1: R,
    grid: usize,
) -> Result<GLevelCount<R>> {
    let l_m = lyapunov_finite(energy, v, omega, R::zero(), m, grid)?;
    let level_log = R::of(2.0) * R::of_usize(m) * (l_m - delta);
    let f = |z: Cplx<R>| g_rel_level(energy, v, omega, z, m, level_log).expect("inside strip");
    let base = 256.max(8 * m);
    let counted = count_zeros_with_nodes(&f, eps1, base)?;
    Ok(GLevelCount {
        m,
        delta,
        l_m,
        level_log,
        count: counted.count,
        eps_used: counted.eps_used,
        nudged: counted.nudged,
    })
}
