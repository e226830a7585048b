//! Literal checks of the generation properties, the claims and the kernel bounds on a built
//! decomposition.

use serde::{Deserialize, Serialize};

use super::{piece_mass, CompanionSet, MainDecomposition};
use crate::covering::CubeKind;
use crate::maximal::TestFunctionClass;
use crate::scalar::{dist2, norm2, Scalar};

/// Tags whose failure is repaired by enlarging `α₂` rather than `A`.
pub const KERNEL_MASS_TAGS: [&str; 4] = ["convo1", "convo2", "convo_dual", "propor"];

/// Frozen thresholds for the constants left existential.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClaimThresholds {
    pub c8: f64,
    pub c9: f64,
    pub c11: f64,
    pub c12: f64,
    pub c_pack: f64,
    pub c_budget: f64,
    pub eps2: f64,
    pub phi_b: f64,
    pub phi_d: f64,
}

impl ClaimThresholds {
    /// No bound on any existential constant; the fixed fractions still apply.
    pub fn permissive() -> Self {
        let inf = f64::INFINITY;
        Self { c8: inf, c9: inf, c11: inf, c12: inf, c_pack: inf, c_budget: inf, eps2: inf, phi_b: inf, phi_d: inf }
    }
}

/// Outcome of one property over all its instances.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClaimCheck {
    pub tag: String,
    pub pass: bool,
    /// Worst observed value; the check passes when it is at most `threshold`.
    pub achieved: f64,
    pub threshold: f64,
    /// Number of non-vacuous instances examined.
    pub instances: usize,
    /// Where the worst value occurred.
    pub location: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct ClaimReport {
    pub checks: Vec<ClaimCheck>,
}

impl ClaimReport {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn first_failure(&self) -> Option<&ClaimCheck> {
        self.checks.iter().find(|c| !c.pass)
    }

    pub fn failures(&self) -> Vec<&ClaimCheck> {
        self.checks.iter().filter(|c| !c.pass).collect()
    }

    pub fn get(&self, tag: &str) -> Option<&ClaimCheck> {
        self.checks.iter().find(|c| c.tag == tag)
    }

    /// Total non-vacuous instances over the checks with the given tags.
    pub fn instances(&self, tags: &[&str]) -> usize {
        self.checks.iter().filter(|c| tags.contains(&c.tag.as_str())).map(|c| c.instances).sum()
    }
}

/// Running maximum for one tag.
struct Acc {
    tag: &'static str,
    threshold: f64,
    worst: f64,
    instances: usize,
    location: Option<String>,
    broken: bool,
}

impl Acc {
    fn new(tag: &'static str, threshold: f64) -> Self {
        Self { tag, threshold, worst: 0.0, instances: 0, location: None, broken: false }
    }

    fn see(&mut self, value: f64, loc: impl FnOnce() -> String) {
        self.instances += 1;
        if value.is_nan() {
            self.broken = true;
            self.location.get_or_insert_with(loc);
            return;
        }
        if value > self.worst || (self.location.is_none() && value > self.threshold) {
            self.worst = value;
            self.location = Some(loc());
        }
    }

    fn fail(&mut self, loc: String) {
        self.instances += 1;
        self.broken = true;
        self.worst = self.worst.max(1.0);
        self.location.get_or_insert(loc);
    }

    fn finish(self, tol: f64) -> ClaimCheck {
        let slack = tol * self.threshold.abs().max(1.0);
        ClaimCheck {
            tag: self.tag.to_string(),
            pass: !self.broken && self.worst <= self.threshold + slack,
            achieved: self.worst,
            threshold: self.threshold,
            instances: self.instances,
            location: self.location,
        }
    }
}

fn at(m: usize, what: &str, i: usize) -> String {
    format!("m={m} {what} {i}")
}

/// Checks every property on `dec`. Vacuous checks pass with zero instances.
pub fn verify_claims<T: Scalar>(dec: &MainDecomposition<T>, thr: &ClaimThresholds) -> ClaimReport {
    let mut checks = Vec::new();
    checks.extend(generation_properties(dec, thr));
    checks.extend(kernel_properties(dec, thr));
    ClaimReport { checks }
}

fn generation_properties<T: Scalar>(dec: &MainDecomposition<T>, thr: &ClaimThresholds) -> Vec<ClaimCheck> {
    let mu = &dec.measure;
    let len = mu.len();
    let p = &dec.params;
    let tol = T::tolerance().as_f64();
    let an = (p.a * dec.fnorm).as_f64();
    let nz = |v: f64| if an > 0.0 { v / an } else if v == 0.0 { 0.0 } else { f64::INFINITY };
    let gens = &dec.generations;

    let mut a = Acc::new("a", thr.c8);
    let mut b = Acc::new("b", 1.0);
    let mut c = Acc::new("c", 7.0 / 20.0);
    let mut d = Acc::new("d", tol);
    let mut e = Acc::new("e", tol);
    let mut f = Acc::new("f", thr.c9);
    let mut g1 = Acc::new("g.1", tol);
    let mut g2 = Acc::new("g.2", 2.0 * thr.c8);
    let mut g3 = Acc::new("g.3", 0.0);
    let mut h = Acc::new("h", thr.c_pack);
    let mut cl1 = Acc::new("cl1", 0.01);
    let mut cl15 = Acc::new("cl1.5", 0.0);
    let mut cl45 = Acc::new("cl4.5", thr.c9);
    let mut cl2 = Acc::new("cl2", 7.0 / 20.0);
    let mut cl4 = Acc::new("cl4", tol);
    let mut cor1 = Acc::new("cor1", tol);
    let mut gmatch = Acc::new("u_match", tol);
    let mut cor2 = Acc::new("cor2", thr.c11);
    let mut recon = Acc::new("reconstruction", 1e-8);
    let mut recon_c = Acc::new("reconstruction_corrected", 1e-8);
    let mut budget = Acc::new("budget", thr.c_budget);

    let mut g_support_owner: Vec<Option<usize>> = vec![None; len];
    let mut v_total = vec![0.0f64; len];
    for (k, rec) in gens.iter().enumerate() {
        let m = rec.m();
        let gen = &rec.generation;
        let next = rec.f.minus(&rec.u);
        let activity = |y: usize| (rec.u.values[y].abs() + rec.g.values[y].abs() + rec.b.values[y].abs()).as_f64();
        for y in 0..len {
            let gb = rec.g.values[y].abs().max(rec.b.values[y].abs()).as_f64();
            if gb > 0.0 {
                a.see(nz(gb), || at(m, "atom", y));
            }
        }
        let four_s: Vec<_> = rec.s_cubes.iter().map(|(_, s)| s.scale(T::lit(4.0))).collect();
        for (i, q) in gen.cubes.iter().enumerate() {
            let atoms = super::cube_atoms(mu, gen, i);
            let mean_next = if q.kind == CubeKind::Point {
                next.values[q.anchor]
            } else {
                let mass: T = atoms.iter().map(|&j| mu.weight(j)).sum();
                atoms.iter().map(|&j| mu.weight(j) * next.values[j]).sum::<T>() / mass
            };
            let mn = nz(mean_next.abs().as_f64());
            let act = atoms.iter().map(|&j| activity(j)).fold(0.0, f64::max);
            if q.kind == CubeKind::Volume {
                b.see(mn, || at(m, "cube", i));
                if rec.good[i] {
                    cl2.see(mn, || at(m, "cube", i));
                    if atoms.iter().any(|&j| rec.g.values[j] != T::zero()) {
                        c.see(mn, || at(m, "cube", i));
                    }
                }
            } else {
                f.see(nz(next.values[q.anchor].abs().as_f64()), || at(m, "point", q.anchor));
            }
            let mean_m = nz(rec.means[i].abs().as_f64());
            if mean_m <= 8.0 / 20.0 {
                d.see(nz(act), || at(m, "cube", i));
            }
            if q.delta <= (T::of(m) - T::lit(0.1)) * p.a {
                if rec.good[i] || rec.bad[i] {
                    e.fail(at(m, "classified cube", i));
                } else {
                    e.see(nz(act), || at(m, "cube", i));
                }
            }
            if rec.good[i] || rec.bad[i] {
                cl45.see(mean_m, || at(m, "cube", i));
            }
            if act > 0.0 {
                let comp = rec.companions[q.anchor].as_ref().expect("anchors lie in R0");
                let inside = four_s
                    .iter()
                    .any(|s| s.contains_cube(&comp.q3hat) || (comp.q3hat.is_point() && s.contains_point(&comp.q3hat.center)));
                cl15.see(if inside { 0.0 } else { 1.0 }, || at(m, "cube", i));
            }
            let want_b = rec.b_mass[i].as_f64();
            let got_b = piece_mass(mu, &rec.b_side[i]).as_f64();
            if want_b != 0.0 || got_b != 0.0 {
                cor1.see(nz((want_b - got_b).abs()), || at(m, "cube", i));
            }
            let want_g = rec.g_mass[i].as_f64();
            let got_g = piece_mass(mu, &rec.g_side[i]).as_f64();
            if want_g != 0.0 || got_g != 0.0 {
                gmatch.see(nz((want_g - got_g).abs()), || at(m, "cube", i));
            }
            // Later cubes meeting Z stay inactive.
            if let Some(z) = &rec.z_sets[i] {
                for later in &gens[k + 1..] {
                    for (pi, pc) in later.generation.cubes.iter().enumerate() {
                        if !z.iter().any(|&j| pc.cube.contains_point(mu.point(j))) {
                            continue;
                        }
                        if later.good[pi] || later.bad[pi] {
                            cl4.fail(format!("m={m} cube {i} meets classified m={} cube {pi}", later.m()));
                            continue;
                        }
                        let p_atoms = super::cube_atoms(mu, &later.generation, pi);
                        let v = p_atoms
                            .iter()
                            .map(|&j| (later.g.values[j].abs() + later.b.values[j].abs()).as_f64())
                            .fold(0.0, f64::max);
                        cl4.see(nz(v), || format!("m={m} cube {i}, m={} cube {pi}", later.m()));
                    }
                }
            }
        }
        // Potentials through the corrected pieces.
        let masses: Vec<T> = (0..gen.cubes.len()).map(|i| piece_mass(mu, &rec.g_side[i])).collect();
        let ug = super::apply_kernels(&rec.kernels, &masses, len);
        let masses: Vec<T> = (0..gen.cubes.len()).map(|i| piece_mass(mu, &rec.b_side[i])).collect();
        let ub = super::apply_kernels(&rec.kernels, &masses, len);
        for y in 0..len {
            let dg = (ug.values[y] - rec.u_good.values[y]).abs().as_f64();
            let db = (ub.values[y] - rec.u_bad.values[y]).abs().as_f64();
            if rec.u_good.values[y] != T::zero() || rec.u_bad.values[y] != T::zero() || dg > 0.0 || db > 0.0 {
                g1.see(nz(dg.max(db)), || at(m, "atom", y));
            }
        }
        for gp in &rec.g_family {
            for y in 0..len {
                if gp.values[y] != T::zero() {
                    g2.see(nz(gp.values[y].abs().as_f64()), || at(m, "atom", y));
                }
            }
        }
        for y in 0..len {
            if rec.g_family.iter().any(|gp| gp.values[y] != T::zero()) {
                match g_support_owner[y] {
                    Some(prev) => g3.see(1.0, || format!("atom {y} in m={prev} and m={m}")),
                    None => {
                        g3.see(0.0, String::new);
                        g_support_owner[y] = Some(m);
                    }
                }
            }
        }
        for piece in &rec.b_side {
            for &(j, v) in piece {
                v_total[j] += v.abs().as_f64();
            }
        }
        // Sums of potential differences over pairs in a common doubled cube.
        for i in gen.volume_indices() {
            let two_q = gen.cubes[i].cube.scale(T::lit(2.0));
            let atoms = mu.atoms_in(&two_q);
            for (ai, &x) in atoms.iter().enumerate() {
                for &y in &atoms[ai + 1..] {
                    let s: f64 = gens[..=k].iter().map(|r| (r.u.values[x] - r.u.values[y]).abs().as_f64()).sum();
                    cl1.see(nz(s), || format!("m={m} cube {i} atoms {x},{y}"));
                }
            }
        }
    }
    for y in 0..len {
        if v_total[y] > 0.0 {
            cor2.see(nz(v_total[y]), || format!("atom {y}"));
        }
    }
    for y in 0..len {
        f.see(nz(dec.h0.values[y].abs().as_f64()), || format!("h0 atom {y}"));
    }
    let (pack, loc) = super::packing_constant(dec);
    let bad_total: usize = gens.iter().map(|g| g.bad.iter().filter(|&&x| x).count()).sum();
    if bad_total > 0 {
        h.see(pack, || loc.map_or_else(String::new, |(m, r)| at(m, "cube", r)));
    }
    let fl1 = dec.f.l1(mu).as_f64();
    let scale = if fl1 > 0.0 { fl1 } else { 1.0 };
    recon.see(dec.residual().as_f64() / scale, || "L1".into());
    recon_c.see(dec.corrected_residual().as_f64() / scale, || "L1".into());
    for (y, v) in dec.budget().into_iter().enumerate() {
        budget.see(nz(v.as_f64()), || format!("atom {y}"));
    }
    let mut out: Vec<ClaimCheck> =
        [a, b, c, d, e, f, g1, g2, g3, h].into_iter().map(|x| x.finish(tol)).collect();
    let mut cl3 = out[1].clone();
    cl3.tag = "cl3".into();
    let mut cle = out[4].clone();
    cle.tag = "claime".into();
    let mut cl5 = out[9].clone();
    cl5.tag = "cl5".into();
    out.push(cl1.finish(tol));
    out.push(cl15.finish(tol));
    out.push(cle);
    out.push(cl45.finish(tol));
    out.push(cl2.finish(tol));
    out.push(cl3);
    out.push(cl4.finish(tol));
    out.push(cl5);
    out.extend([cor1, cor2, gmatch, recon, recon_c, budget].into_iter().map(|x| x.finish(tol)));
    out
}

fn kernel_properties<T: Scalar>(dec: &MainDecomposition<T>, thr: &ClaimThresholds) -> Vec<ClaimCheck> {
    let mu = &dec.measure;
    let len = mu.len();
    let p = &dec.params;
    let n = mu.growth_exponent();
    let n1 = n + T::one();
    let tol = T::tolerance().as_f64();
    let eps3 = p.eps3.as_f64();
    let a2 = p.alpha2.as_f64();

    let mut nesting = Acc::new("nesting", 0.0);
    let mut psi1 = Acc::new("psi1", 0.0);
    let mut psi2 = Acc::new("psi2", 0.0);
    let mut psi3 = Acc::new("psi3", 0.0);
    let mut psi4 = Acc::new("psi4", thr.c12);
    let mut propor = Acc::new("propor", thr.eps2);
    let mut convo1 = Acc::new("convo1", eps3);
    let mut convo2 = Acc::new("convo2", eps3);
    let mut convo_dual = Acc::new("convo_dual", eps3);
    let mut phi_a = Acc::new("phi_a", 0.0);
    let mut phi_b = Acc::new("phi_b", thr.phi_b);
    let mut phi_cu = Acc::new("phi_c_upper", eps3 / 2.0);
    let mut phi_cl = Acc::new("phi_c_lower", eps3 / 2.0);
    let mut phi_d = Acc::new("phi_d", thr.phi_d);
    let mut regu1 = Acc::new("regu1", 0.0);
    let mut regu2 = Acc::new("regu2", 0.0);
    let mut bridge = Acc::new("bridge", 0.0);

    for rec in &dec.generations {
        let m = rec.m();
        let gen = &rec.generation;
        let comps: Vec<Option<&CompanionSet<T>>> = rec.companions.iter().map(|c| c.as_ref()).collect();
        for (y, c) in comps.iter().enumerate() {
            let Some(c) = c else { continue };
            if c.is_degenerate() {
                continue;
            }
            match c.nesting_violation() {
                Some((s, l)) => nesting.fail(format!("m={m} atom {y}: {s} not in {l}")),
                None => nesting.see(0.0, String::new),
            }
            let eval = rec.psi[y].as_ref().expect("companions and kernels share atoms");
            match super::check_psi(mu, c, p.cap_const, eval) {
                Ok(chk) => {
                    psi1.see(0.0, String::new);
                    psi2.see(0.0, String::new);
                    psi3.see(0.0, String::new);
                    psi4.see(chk.c12.as_f64(), || at(m, "atom", y));
                    let l1 = chk.l1.as_f64();
                    let e2 = (l1 - a2).abs().max((l1 - chk.annulus.as_f64()).abs());
                    propor.see(e2, || at(m, "atom", y));
                }
                Err(crate::Error::ConditionViolated { which, location }) => {
                    let loc = format!("m={m} kernel {y} at atom {location}");
                    match which.as_str() {
                        "psi1" => psi1.fail(loc),
                        "psi2" => psi2.fail(loc),
                        _ => psi3.fail(loc),
                    }
                }
                Err(other) => psi3.fail(format!("m={m} kernel {y}: {other}")),
            }
        }
        // φ[y][x] and its gradient in x.
        let inv = T::one() / p.alpha2;
        let mut phi = vec![vec![T::zero(); len]; len];
        let mut dphi = vec![vec![vec![T::zero(); mu.dim()]; len]; len];
        for y in 0..len {
            for &(i, w) in &gen.weights[y] {
                let anchor = gen.cubes[i].anchor;
                let ev = rec.psi[anchor].as_ref().expect("anchors lie in R0");
                for x in 0..len {
                    phi[y][x] = phi[y][x] + w * inv * ev.values[x];
                    for (dst, &gk) in dphi[y][x].iter_mut().zip(&ev.grads[x]) {
                        *dst = *dst + w * inv * gk;
                    }
                }
            }
        }
        let in_volume: Vec<bool> =
            (0..len).map(|x| gen.weights[x].iter().any(|&(i, _)| gen.cubes[i].kind == CubeKind::Volume)).collect();
        for x in 0..len {
            let mass: f64 = (0..len).map(|y| (mu.weight(y) * phi[y][x]).as_f64()).sum();
            if mass > 0.0 || in_volume[x] {
                convo1.see(mass - 1.0, || at(m, "atom", x));
            }
            if in_volume[x] {
                convo2.see(1.0 - mass, || at(m, "atom", x));
                let dual: f64 = (0..len).map(|z| (mu.weight(z) * phi[x][z]).as_f64()).sum();
                convo_dual.see((dual - 1.0).abs(), || at(m, "atom", x));
            }
        }
        for x in 0..len {
            let Some(cx) = comps[x] else { continue };
            let xp = mu.point(x);
            for y in 0..len {
                let yp = mu.point(y);
                let v = phi[y][x].as_f64();
                let r = dist2(xp, yp);
                // (a): φ vanishes off the Q̂³ of every cube containing x.
                for &(i, _) in &gen.weights[x] {
                    let c0 = comps[gen.cubes[i].anchor].expect("anchors lie in R0");
                    let q3h = &c0.q3hat;
                    let out = if q3h.is_point() { q3h.center.as_slice() != yp } else { !q3h.contains_point(yp) };
                    if out {
                        phi_a.see(if v == 0.0 { 0.0 } else { v.abs().max(1.0) }, || format!("m={m} x={x} y={y}"));
                    }
                }
                let in_check = !cx.q1check.is_point() && cx.q1check.contains_point(yp);
                if in_check {
                    let l = cx.q1check.side.powf(n).as_f64();
                    phi_b.see(v * a2 * l, || format!("m={m} x={x} y={y}"));
                } else if y != x && r > T::zero() {
                    let kr = r.powf(n).as_f64();
                    phi_cu.see(v * a2 * kr - 1.0, || format!("m={m} x={x} y={y}"));
                }
                if r > T::zero() && !cx.q2.is_point() && cx.q2.contains_point(yp) && !cx.q1hat.contains_point(yp) {
                    let kr = r.powf(n).as_f64();
                    phi_cl.see(1.0 - v * a2 * kr, || format!("m={m} x={x} y={y}"));
                }
                let gnorm = norm2(&dphi[y][x]).as_f64();
                if gnorm > 0.0 {
                    for &(i, _) in &gen.weights[x] {
                        let c0 = comps[gen.cubes[i].anchor].expect("anchors lie in R0");
                        let lc = if c0.q1check.is_point() { T::infinity() } else { c0.q1check.side.powf(-n1) };
                        let rc = if r == T::zero() { T::infinity() } else { r.powf(-n1) };
                        let bound = (lc.min(rc) * inv).as_f64();
                        if bound.is_finite() {
                            phi_d.see(gnorm / bound, || format!("m={m} x={x} y={y}"));
                        }
                    }
                }
            }
        }
        for x in 0..len {
            let Some(cx) = comps[x] else { continue };
            for y in 0..len {
                let Some(cy) = comps[y] else { continue };
                if cx.q1.intersects(&cy.q1) {
                    let ok = cy.q1hat.contains_cube(&cx.q1) || (cy.q1hat.is_point() && cx.q1.is_point() && x == y);
                    regu1.see(if ok { 0.0 } else { 1.0 }, || format!("m={m} x={x} y={y}"));
                }
                if cx.q2.intersects(&cy.q2) {
                    let ok = cy.q2hat.contains_cube(&cx.q2) || (cy.q2hat.is_point() && cx.q2.is_point() && x == y);
                    regu2.see(if ok { 0.0 } else { 1.0 }, || format!("m={m} x={x} y={y}"));
                }
            }
        }
        // Admissibility: the largest c with c·φ_{y,m} inside the test class anchored at y.
        for y in 0..len {
            if phi[y].iter().all(|&v| v == T::zero()) {
                continue;
            }
            let c = bridge_constant(mu, &phi[y], y);
            bridge.see(if c > 0.0 { 0.0 } else { 1.0 }, || format!("m={m} y={y} c={c}"));
        }
    }
    let bridge_min = dec
        .generations
        .iter()
        .flat_map(|rec| {
            let gen = &rec.generation;
            (0..len).filter_map(move |y| {
                let v = super::phi_kernel(gen, &rec.kernels, y);
                if v.is_zero() {
                    None
                } else {
                    Some(bridge_constant(mu, &v.values, y))
                }
            })
        })
        .fold(f64::INFINITY, f64::min);
    let mut out: Vec<ClaimCheck> = [
        nesting, psi1, psi2, psi3, psi4, propor, convo1, convo2, convo_dual, phi_a, phi_b, phi_cu, phi_cl, phi_d,
        regu1, regu2,
    ]
    .into_iter()
    .map(|x| x.finish(tol))
    .collect();
    let mut b = bridge.finish(tol);
    if bridge_min.is_finite() {
        b.location = Some(format!("{} min c={bridge_min}", b.location.unwrap_or_default()));
    }
    out.push(b);
    out
}

/// `min` over the L¹, pointwise and pair caps of `cap / |value|` for `φ` anchored at atom `y`.
pub fn bridge_constant<T: Scalar>(mu: &crate::measure::DiscreteMeasure<T>, phi: &[T], y: usize) -> f64 {
    let class = TestFunctionClass::new(mu.point(y).to_vec(), mu.growth_exponent());
    let l1: f64 = phi.iter().zip(mu.weights()).map(|(&v, &w)| (v.abs() * w).as_f64()).sum();
    let mut c = if l1 > 0.0 { 1.0 / l1 } else { f64::INFINITY };
    for (i, &v) in phi.iter().enumerate() {
        if v != T::zero() {
            c = c.min((class.pointwise_cap(mu.point(i)) / v.abs()).as_f64());
        }
    }
    for i in 0..phi.len() {
        for j in 0..i {
            let dv = (phi[i] - phi[j]).abs();
            if dv > T::zero() {
                c = c.min((class.pair_cap(mu.point(i), mu.point(j)) / dv).as_f64());
            }
        }
    }
    c
}
