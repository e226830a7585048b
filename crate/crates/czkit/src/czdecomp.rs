//! Calderón–Zygmund decomposition for possibly non-doubling measures, and the truncation sequence.

use crate::covering::{whitney_decompose, BoxUnion, WhitneyDecomposition, WHITNEY_BETA, WHITNEY_INNER};
use crate::cubes::{is_doubling, Cube, DoublingParams};
use crate::error::{Error, Result};
use crate::maximal::hl_field_with_witness;
use crate::measure::DiscreteMeasure;
use crate::scalar::{box_bump, dist_inf, norm2, Scalar};
use crate::spaces::SampledFunction;

/// `α_i = c_i χ_{A_i}`.
#[derive(Debug, Clone, PartialEq)]
pub struct AlphaPiece<T> {
    /// Atoms of `A_i ⊂ R_i`.
    pub support: Vec<usize>,
    pub coeff: T,
}

impl<T: Scalar> AlphaPiece<T> {
    pub fn function(&self, len: usize) -> SampledFunction<T> {
        let mut v = vec![T::zero(); len];
        for &i in &self.support {
            v[i] = self.coeff;
        }
        SampledFunction::from_values(v)
    }
}

/// Instance constants of one decomposition.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct CzConstants<T> {
    /// `max_k Σ_{earlier j, R_j ∩ R_k ≠ ∅} ∫|f w_j| / (λ μ(R_k))`.
    pub c14: T,
    /// `max_k |c_k| / λ`.
    pub c15: T,
    /// `2 c14 + c15`.
    pub b: T,
    /// `max(2^{d+1}, b)`.
    pub c_g: T,
    /// `max_i μ(R_i)/μ(A_i)`; the concentration constant for `α_i`.
    pub concentration: T,
    /// `min_k μ(A_k)/μ(R_k)`.
    pub half_mass: T,
    /// `max_i ℓ(Q_i) |∇w_i|` at atoms.
    pub partition_gradient: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CZDecomposition<T> {
    pub lambda: T,
    /// `M_(2) f` at every atom.
    pub maximal: Vec<T>,
    /// Atoms with `M_(2) f > λ`.
    pub superlevel: Vec<usize>,
    /// Open region standing for `Ω_λ`: interiors of `(3/2)Q` over witnessing cubes.
    pub region: BoxUnion<T>,
    /// Atoms inside the region (`Ω_λ ∩ supp μ`).
    pub omega: Vec<usize>,
    pub whitney: WhitneyDecomposition<T>,
    /// Per Whitney cube, `(atom, w_i(atom))` with `w_i > 0`.
    pub partition_weights: Vec<Vec<(usize, T)>>,
    pub hosts: Vec<Cube<T>>,
    pub host_steps: Vec<u32>,
    pub alphas: Vec<AlphaPiece<T>>,
    /// Processing order of the cubes.
    pub order: Vec<usize>,
    pub g: SampledFunction<T>,
    pub b: SampledFunction<T>,
    pub constants: CzConstants<T>,
}

/// Outcome of re-checking every decomposition property.
#[derive(Debug, Clone, PartialEq)]
pub struct CzReport<T> {
    pub checks: Vec<(&'static str, bool, T)>,
}

impl<T: Scalar> CzReport<T> {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.1)
    }

    pub fn failures(&self) -> Vec<&'static str> {
        self.checks.iter().filter(|c| !c.1).map(|c| c.0).collect()
    }
}

fn host_params<T: Scalar>(n: T) -> DoublingParams<T> {
    DoublingParams { alpha: T::lit(6.0), beta: T::lit(6.0).powf(n + T::one()) }
}

/// Smallest `(6, 6^{n+1})`-doubling `6^k Q`, `k ≥ 1`, not contained in the region.
fn host_cube<T: Scalar>(mu: &DiscreteMeasure<T>, q: &Cube<T>, region: &BoxUnion<T>) -> (Cube<T>, u32) {
    let p = host_params(mu.growth_exponent());
    let mut k = 1;
    let mut r = q.scale(T::lit(6.0));
    loop {
        if is_doubling(mu, &r, &p) && !region.contains_cube(&r) {
            return (r, k);
        }
        k += 1;
        r = r.scale(T::lit(6.0));
    }
}

/// Half the smallest positive sup-distance between atoms (1 for a single atom).
pub(crate) fn separation<T: Scalar>(mu: &DiscreteMeasure<T>) -> T {
    let mut best = T::infinity();
    for i in 0..mu.len() {
        for j in 0..i {
            let d = dist_inf(mu.point(i), mu.point(j));
            if d > T::zero() && d < best {
                best = d;
            }
        }
    }
    if best.is_finite() {
        best * T::lit(0.5)
    } else {
        T::one()
    }
}

pub fn cz_decompose<T: Scalar>(
    mu: &DiscreteMeasure<T>,
    f: &SampledFunction<T>,
    lambda: T,
) -> Result<CZDecomposition<T>> {
    if f.len() != mu.len() {
        return Err(Error::InvalidParams("function length does not match measure".into()));
    }
    let field = hl_field_with_witness(mu, f, T::lit(2.0), false, mu.points())?;
    cz_decompose_with_field(mu, f, lambda, &field)
}

pub(crate) fn cz_decompose_with_field<T: Scalar>(
    mu: &DiscreteMeasure<T>,
    f: &SampledFunction<T>,
    lambda: T,
    field: &[(T, Option<Cube<T>>)],
) -> Result<CZDecomposition<T>> {
    if !(lambda > T::zero()) {
        return Err(Error::LambdaNonpositive);
    }
    let nv = mu.len();
    let nu = separation(mu);
    let maximal: Vec<T> = field.iter().map(|w| w.0).collect();
    let superlevel: Vec<usize> = (0..nv).filter(|&i| maximal[i] > lambda).collect();
    let mut witnesses: Vec<Cube<T>> = Vec::new();
    for &i in &superlevel {
        let w = field[i].1.clone().expect("positive maximal value has a witness");
        let w = if w.is_point() { Cube::new(w.center, nu) } else { w };
        let fat = w.scale(T::lit(1.5));
        if !witnesses.contains(&fat) {
            witnesses.push(fat);
        }
    }
    let region = BoxUnion::from_cubes(&witnesses, false);
    let omega: Vec<usize> = (0..nv).filter(|&i| region.contains(mu.point(i))).collect();
    let whitney = if omega.is_empty() {
        WhitneyDecomposition {
            cubes: Vec::new(),
            levels: Vec::new(),
            beta: T::lit(WHITNEY_BETA),
            overlap_bound: 0,
            uncovered: Vec::new(),
        }
    } else {
        let bounding = enclosing_cube(mu, &witnesses);
        // A dyadic cube around an atom at sup-distance `r` from the complement passes the
        // `20Q ⊂ Ω` test once its side is below `r / 10.5`.
        let clearance = omega.iter().map(|&a| region_clearance(&region, mu.point(a))).fold(T::infinity(), T::min);
        let depth = (T::lit(0.05) * nu).min(clearance / T::lit(24.0));
        // Two extra levels for the dyadic snap of the bounding cube, which can quadruple it.
        let min_level = (bounding.side / depth).log2().ceil().to_u32().unwrap_or(60).clamp(1, 200) + 2;
        let targets: Vec<Vec<T>> = omega.iter().map(|&i| mu.point(i).to_vec()).collect();
        let mut w = whitney_decompose(&region, &bounding, min_level, Some(&targets))?;
        w.uncovered = w.uncovered.iter().map(|&t| omega[t]).collect();
        w
    };
    let nq = whitney.cubes.len();
    // Raw bumps φ_i and their gradients at atoms of (3/2)Q_i.
    let mut raw: Vec<Vec<(usize, T, Vec<T>)>> = vec![Vec::new(); nq];
    let mut total = vec![T::zero(); nv];
    let mut total_grad = vec![vec![T::zero(); mu.dim()]; nv];
    for (i, q) in whitney.cubes.iter().enumerate() {
        let (inner, outer) = (q.half(), q.half() * T::lit(1.5));
        for &a in &omega {
            let (v, g) = box_bump(mu.point(a), &q.center, inner, outer);
            if v > T::zero() {
                total[a] = total[a] + v;
                for (t, gk) in total_grad[a].iter_mut().zip(&g) {
                    *t = *t + *gk;
                }
                raw[i].push((a, v, g));
            }
        }
    }
    let mut partition_gradient = T::zero();
    let partition_weights: Vec<Vec<(usize, T)>> = raw
        .iter()
        .enumerate()
        .map(|(i, list)| {
            list.iter()
                .map(|(a, v, g)| {
                    let s = total[*a];
                    let grad: Vec<T> =
                        g.iter().zip(&total_grad[*a]).map(|(&gi, &ti)| gi / s - *v * ti / (s * s)).collect();
                    partition_gradient = partition_gradient.max(norm2(&grad) * whitney.cubes[i].side);
                    (*a, *v / s)
                })
                .collect()
        })
        .collect();
    let mut hosts = Vec::with_capacity(nq);
    let mut host_steps = Vec::with_capacity(nq);
    for q in &whitney.cubes {
        let (r, k) = host_cube(mu, q, &region);
        hosts.push(r);
        host_steps.push(k);
    }
    let mut order: Vec<usize> = (0..nq).collect();
    order.sort_by(|&a, &b| hosts[a].side.partial_cmp(&hosts[b].side).unwrap().then(a.cmp(&b)));
    let fw_int: Vec<T> =
        partition_weights.iter().map(|l| l.iter().map(|&(a, w)| f.values[a] * w * mu.weight(a)).sum()).collect();
    let fw_abs: Vec<T> = partition_weights
        .iter()
        .map(|l| l.iter().map(|&(a, w)| (f.values[a] * w).abs() * mu.weight(a)).sum())
        .collect();
    let host_mass: Vec<T> = hosts.iter().map(|r| mu.mass_cube_unchecked(r)).collect();
    let mut c14 = T::zero();
    for (pos, &k) in order.iter().enumerate() {
        let s: T = order[..pos].iter().filter(|&&j| hosts[j].intersects(&hosts[k])).map(|&j| fw_abs[j]).sum();
        c14 = c14.max(s / (lambda * host_mass[k]));
    }
    let threshold = T::lit(2.0) * c14 * lambda;
    let mut in_region = vec![false; nv];
    for &a in &omega {
        in_region[a] = true;
    }
    let mut load = vec![T::zero(); nv];
    let mut alphas = vec![AlphaPiece { support: Vec::new(), coeff: T::zero() }; nq];
    let mut c15 = T::zero();
    let mut concentration = T::zero();
    let mut half_mass = T::one();
    for &k in &order {
        let atoms = mu.atoms_in(&hosts[k]);
        let light: Vec<usize> = atoms.iter().copied().filter(|&a| load[a] <= threshold).collect();
        // Prefer A_k inside the region, which keeps supp b there, when it still has half the mass.
        let inner: Vec<usize> = light.iter().copied().filter(|&a| in_region[a]).collect();
        let inner_mass: T = inner.iter().map(|&a| mu.weight(a)).sum();
        let support = if inner_mass + inner_mass >= host_mass[k] { inner } else { light };
        let mass_a: T = support.iter().map(|&a| mu.weight(a)).sum();
        half_mass = half_mass.min(mass_a / host_mass[k]);
        let coeff = if mass_a > T::zero() { fw_int[k] / mass_a } else { T::zero() };
        for &a in &support {
            load[a] = load[a] + coeff.abs();
        }
        c15 = c15.max(coeff.abs() / lambda);
        if mass_a > T::zero() {
            concentration = concentration.max(host_mass[k] / mass_a);
        }
        alphas[k] = AlphaPiece { support, coeff };
    }
    let mut b = vec![T::zero(); nv];
    for i in 0..nq {
        for &(a, w) in &partition_weights[i] {
            b[a] = b[a] + f.values[a] * w;
        }
        for &a in &alphas[i].support {
            b[a] = b[a] - alphas[i].coeff;
        }
    }
    let g: Vec<T> = f.values.iter().zip(&b).map(|(&fv, &bv)| fv - bv).collect();
    let bconst = T::lit(2.0) * c14 + c15;
    let constants = CzConstants {
        c14,
        c15,
        b: bconst,
        c_g: T::lit(2f64.powi(mu.dim() as i32 + 1)).max(bconst),
        concentration,
        half_mass,
        partition_gradient,
    };
    Ok(CZDecomposition {
        lambda,
        maximal,
        superlevel,
        region,
        omega,
        whitney,
        partition_weights,
        hosts,
        host_steps,
        alphas,
        order,
        g: SampledFunction::from_values(g),
        b: SampledFunction::from_values(b),
        constants,
    })
}

/// Lower bound for the sup-distance from `p` to the complement of the region.
fn region_clearance<T: Scalar>(region: &BoxUnion<T>, p: &[T]) -> T {
    region
        .boxes
        .iter()
        .map(|(lo, hi)| (0..p.len()).map(|k| (p[k] - lo[k]).min(hi[k] - p[k])).fold(T::infinity(), T::min))
        .fold(T::zero(), T::max)
}

fn enclosing_cube<T: Scalar>(mu: &DiscreteMeasure<T>, cubes: &[Cube<T>]) -> Cube<T> {
    let d = mu.dim();
    let mut lo = vec![T::infinity(); d];
    let mut hi = vec![T::neg_infinity(); d];
    for p in mu.points() {
        for k in 0..d {
            lo[k] = lo[k].min(p[k]);
            hi[k] = hi[k].max(p[k]);
        }
    }
    for q in cubes {
        for k in 0..d {
            lo[k] = lo[k].min(q.lo(k));
            hi[k] = hi[k].max(q.hi(k));
        }
    }
    let center: Vec<T> = lo.iter().zip(&hi).map(|(&a, &b)| (a + b) * T::lit(0.5)).collect();
    let side = lo.iter().zip(&hi).map(|(&a, &b)| b - a).fold(T::zero(), T::max);
    Cube::new(center, side * T::lit(1.01))
}

impl<T: Scalar> CZDecomposition<T> {
    pub fn alpha_function(&self, i: usize, len: usize) -> SampledFunction<T> {
        self.alphas[i].function(len)
    }

    /// `f w_i − α_i`.
    pub fn piece(&self, f: &SampledFunction<T>, i: usize) -> SampledFunction<T> {
        let mut v = self.alpha_function(i, f.len()).scaled(-T::one()).values;
        for &(a, w) in &self.partition_weights[i] {
            v[a] = v[a] + f.values[a] * w;
        }
        SampledFunction::from_values(v)
    }

    /// Re-checks every property by direct summation.
    pub fn check(&self, mu: &DiscreteMeasure<T>, f: &SampledFunction<T>) -> CzReport<T> {
        let nv = mu.len();
        let tol = T::lit(1e3) * T::epsilon();
        let scale = T::one() + f.sup();
        let lam = self.lambda;
        let mut checks = Vec::new();
        let mut push = |name, ok, val| checks.push((name, ok, val));

        let rec = (0..nv).map(|i| (f.values[i] - self.g.values[i] - self.b.values[i]).abs()).fold(T::zero(), T::max);
        push("f = g + b", rec <= tol * scale * T::of(nv.max(1)), rec);

        let gsup = self.g.sup();
        push("|g| <= C_g lambda", gsup <= self.constants.c_g * lam * (T::one() + tol) + tol * scale, gsup / lam);

        let in_omega: Vec<bool> = (0..nv).map(|i| self.omega.contains(&i)).collect();
        let stray = (0..nv).filter(|&i| !in_omega[i]).map(|i| self.b.values[i].abs()).fold(T::zero(), T::max);
        push("supp b in Omega", stray == T::zero(), stray);

        let off = (0..nv).filter(|&i| !in_omega[i]).map(|i| f.values[i].abs()).fold(T::zero(), T::max);
        let cap = T::lit(2f64.powi(mu.dim() as i32 + 1)) * lam;
        push("|f| <= 2^(d+1) lambda off Omega", off <= cap, off / lam);

        let mut integral_gap = T::zero();
        let mut conc = T::zero();
        for (i, a) in self.alphas.iter().enumerate() {
            let fw: T = self.partition_weights[i].iter().map(|&(x, w)| f.values[x] * w * mu.weight(x)).sum();
            let ai = a.function(nv);
            integral_gap = integral_gap.max((ai.integral(mu) - fw).abs());
            let l1 = ai.l1(mu);
            if l1 > T::zero() {
                conc = conc.max(ai.sup() * mu.mass_cube_unchecked(&self.hosts[i]) / l1);
            }
        }
        push("int alpha_i = int f w_i", integral_gap <= tol * scale * (T::one() + mu.total_mass()), integral_gap);
        push("|alpha_i| mu(R_i) <= 2 |alpha_i|_1", conc <= T::lit(2.0) * (T::one() + tol), conc);

        let mut sum = vec![T::zero(); nv];
        for a in &self.alphas {
            for &x in &a.support {
                sum[x] = sum[x] + a.coeff.abs();
            }
        }
        let smax = sum.iter().copied().fold(T::zero(), T::max);
        push("sum |alpha_i| <= B lambda", smax <= self.constants.b * lam * (T::one() + tol) + tol * scale, smax / lam);

        let p = host_params(mu.growth_exponent());
        let mut hosts_ok = true;
        for (i, q) in self.whitney.cubes.iter().enumerate() {
            let k = self.host_steps[i];
            let expect = q.scale(T::lit(6.0).powi(k as i32));
            hosts_ok &= expect == self.hosts[i] || (expect.side - self.hosts[i].side).abs() <= tol * expect.side;
            hosts_ok &= is_doubling(mu, &self.hosts[i], &p) && !self.region.contains_cube(&self.hosts[i]);
            for j in 1..k {
                let c = q.scale(T::lit(6.0).powi(j as i32));
                hosts_ok &= !(is_doubling(mu, &c, &p) && !self.region.contains_cube(&c));
            }
            hosts_ok &= self.alphas[i].support.iter().all(|&x| self.hosts[i].contains_point(mu.point(x)));
        }
        push("R_i smallest admissible 6^k Q_i", hosts_ok, T::zero());

        push("mu(A_k) >= mu(R_k)/2", self.constants.half_mass >= T::lit(0.5), self.constants.half_mass);
        let cmax = self.alphas.iter().map(|a| a.coeff.abs()).fold(T::zero(), T::max);
        push("|c_k| <= C15 lambda", cmax <= self.constants.c15 * lam * (T::one() + tol), cmax / lam);

        let mut part_ok = true;
        let mut sums = vec![T::zero(); nv];
        for (i, list) in self.partition_weights.iter().enumerate() {
            let fat = self.whitney.cubes[i].scale(T::lit(1.5));
            for &(x, w) in list {
                part_ok &= w >= T::zero() && w <= T::one() + tol && fat.contains_point(mu.point(x));
                sums[x] = sums[x] + w;
            }
        }
        let sum_gap = self.omega.iter().map(|&x| (sums[x] - T::one()).abs()).fold(T::zero(), T::max);
        push("partition of unity on Omega", part_ok && sum_gap <= tol, sum_gap);

        let mut whit_ok = self.whitney.uncovered.is_empty();
        for (i, q) in self.whitney.cubes.iter().enumerate() {
            whit_ok &= self.region.contains_cube(&q.scale(T::lit(WHITNEY_INNER)));
            whit_ok &= !self.region.contains_cube(&q.scale(T::lit(WHITNEY_BETA)));
            for r in &self.whitney.cubes[..i] {
                whit_ok &= q.interiors_disjoint(r);
            }
        }
        push("Whitney selection", whit_ok, T::of(self.whitney.cubes.len()));
        let above = self.superlevel.iter().all(|i| self.omega.contains(i));
        push("superlevel set inside Omega", above, T::of(self.superlevel.len()));
        CzReport { checks }
    }
}

/// `f_k = w_k f − χ_{Q_k} μ(Q_k)^{-1} ∫ w_k f` on the `k`-th doubling cube `4^N [−1,1]^d`.
#[derive(Debug, Clone, PartialEq)]
pub struct Truncation<T> {
    pub values: SampledFunction<T>,
    pub cube: Cube<T>,
    pub level: i32,
    pub correction: T,
}

const MAX_SCALES: usize = 4096;

pub fn truncate_sequence<T: Scalar>(
    mu: &DiscreteMeasure<T>,
    f: &SampledFunction<T>,
    k: usize,
) -> Result<Truncation<T>> {
    if k == 0 || mu.is_empty() {
        return Err(Error::NotEnoughScales);
    }
    let origin = vec![T::zero(); mu.dim()];
    let nearest = mu.points().iter().map(|p| dist_inf(p, &origin)).fold(T::infinity(), T::min);
    let positive = mu
        .points()
        .iter()
        .map(|p| dist_inf(p, &origin))
        .filter(|&d| d > T::zero())
        .fold(T::infinity(), T::min);
    let start = if nearest > T::zero() {
        nearest.log(T::lit(4.0)).ceil()
    } else if positive.is_finite() {
        positive.log(T::lit(4.0)).floor() - T::one()
    } else {
        T::zero()
    };
    let p = DoublingParams { alpha: T::lit(4.0), beta: T::lit(4.0).powf(mu.growth_exponent() + T::one()) };
    let mut found = 0;
    for level in (start.to_i32().unwrap_or(0)..).take(MAX_SCALES) {
        let q = Cube::new(origin.clone(), T::lit(2.0) * T::lit(4.0).powi(level));
        let m = mu.mass_cube_unchecked(&q);
        if m > T::zero() && is_doubling(mu, &q, &p) {
            found += 1;
            if found == k {
                let a = q.half();
                let w: Vec<T> = mu.points().iter().map(|x| box_bump(x, &origin, a, a + a).0).collect();
                let integral: T = (0..mu.len()).map(|i| w[i] * f.values[i] * mu.weight(i)).sum();
                let correction = integral / m;
                let values = (0..mu.len())
                    .map(|i| {
                        let base = w[i] * f.values[i];
                        if q.contains_point(mu.point(i)) {
                            base - correction
                        } else {
                            base
                        }
                    })
                    .collect();
                return Ok(Truncation { values: SampledFunction::from_values(values), cube: q, level, correction });
            }
        }
    }
    Err(Error::NotEnoughScales)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(n: usize) -> DiscreteMeasure<f64> {
        let pts = (0..n).map(|i| vec![i as f64]).collect();
        DiscreteMeasure::new(1, 1.0, pts, vec![1.0; n]).unwrap()
    }

    #[test]
    fn empty_superlevel_is_trivial() {
        let mu = grid(4);
        let f = SampledFunction::from_values(vec![1.0, -1.0, 0.5, 0.0]);
        let cz = cz_decompose(&mu, &f, 10.0).unwrap();
        assert!(cz.omega.is_empty());
        assert_eq!(cz.g, f);
        assert!(cz.b.is_zero());
        assert!(cz.check(&mu, &f).all_pass());
        assert_eq!(cz_decompose(&mu, &f, 0.0).unwrap_err(), Error::LambdaNonpositive);
    }

    #[test]
    fn spike_on_four_atoms() {
        let mu = grid(4);
        let f = SampledFunction::from_values(vec![8.0, 0.0, 0.0, 0.0]);
        let cz = cz_decompose(&mu, &f, 1.0).unwrap();
        assert!(!cz.omega.is_empty());
        let report = cz.check(&mu, &f);
        assert!(report.all_pass(), "{:?}", report.failures());
    }

    #[test]
    fn mean_zero_f_gives_mean_zero_b() {
        let mu = grid(16);
        let vals: Vec<f64> = (0..16).map(|i| ((i * 7 % 5) as f64) - 2.0).collect();
        let m = vals.iter().sum::<f64>() / 16.0;
        let f = SampledFunction::from_values(vals.iter().map(|v| v - m).collect());
        for lam in [0.25, 0.5, 1.0] {
            let cz = cz_decompose(&mu, &f, lam).unwrap();
            assert!(cz.b.integral(&mu).abs() < 1e-10);
            let r = cz.check(&mu, &f);
            assert!(r.all_pass(), "{:?}", r.failures());
        }
    }

    #[test]
    fn truncation_stabilizes() {
        let mu = grid(4);
        let f = SampledFunction::from_values(vec![1.0, -1.0, 2.0, -2.0]);
        assert_eq!(truncate_sequence(&mu, &f, 0).unwrap_err(), Error::NotEnoughScales);
        for k in 1..6 {
            let t = truncate_sequence(&mu, &f, k).unwrap();
            assert!(t.values.integral(&mu).abs() < 1e-12);
        }
        let t = truncate_sequence(&mu, &f, 5).unwrap();
        assert_eq!(t.values, f);
    }
}
