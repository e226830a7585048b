//! Grand maximal operator as an upper/lower sandwich, and Hardy–Littlewood variants.

pub mod lp;

use rayon::prelude::*;

use crate::cubes::Cube;
use crate::error::{Error, Result};
use crate::measure::DiscreteMeasure;
use crate::scalar::{dist2, dist_inf, dist_to_segment, smoothstep, smoothstep_prime, Scalar};
use crate::spaces::SampledFunction;
use lp::Simplex;

/// Caps defining the test functions `φ ∼ x`.
#[derive(Debug, Clone, PartialEq)]
pub struct TestFunctionClass<T> {
    pub anchor: Vec<T>,
    pub n: T,
}

impl<T: Scalar> TestFunctionClass<T> {
    pub fn new(anchor: Vec<T>, n: T) -> Self {
        Self { anchor, n }
    }

    /// `‖y − x‖^{-n}`; infinite at the anchor.
    pub fn pointwise_cap(&self, y: &[T]) -> T {
        let r = dist2(y, &self.anchor);
        if r == T::zero() {
            T::infinity()
        } else {
            r.powf(-self.n)
        }
    }

    /// `‖y − x‖^{-(n+1)}`.
    pub fn gradient_cap(&self, y: &[T]) -> T {
        let r = dist2(y, &self.anchor);
        if r == T::zero() {
            T::infinity()
        } else {
            r.powf(-(self.n + T::one()))
        }
    }

    /// Bound on `|φ(a) − φ(b)|` from the gradient cap along `[a, b]`; infinite if the anchor lies on it.
    pub fn pair_cap(&self, a: &[T], b: &[T]) -> T {
        let d = dist_to_segment(&self.anchor, a, b);
        if d == T::zero() {
            T::infinity()
        } else {
            dist2(a, b) / d.powf(self.n + T::one())
        }
    }
}

/// Two-sided bound for `M_Φ f(x)`.
#[derive(Debug, Clone, PartialEq)]
pub struct MaximalResult<T> {
    pub upper: T,
    pub lower: T,
    pub witness_upper: Vec<T>,
    pub witness_lower: T,
}

/// Linear program whose optimum bounds `M_Φ f(x)` from above; reusable across functions.
#[derive(Debug, Clone)]
pub struct GrandUpperSolver<T> {
    lp: Simplex<T>,
    weights: Vec<T>,
    /// Pair constraints kept after removing implied ones.
    pub pair_rows: usize,
}

impl<T: Scalar> GrandUpperSolver<T> {
    pub fn new(mu: &DiscreteMeasure<T>, x: &[T]) -> Result<Self> {
        mu.check_dim(x.len())?;
        let class = TestFunctionClass::new(x.to_vec(), mu.growth_exponent());
        let nv = mu.len();
        let caps: Vec<T> = (0..nv)
            .map(|i| class.pointwise_cap(mu.point(i)).min(T::one() / mu.weight(i)))
            .collect();
        let mut lcap = vec![T::infinity(); nv * nv];
        for i in 0..nv {
            for j in 0..i {
                let l = class.pair_cap(mu.point(i), mu.point(j));
                lcap[i * nv + j] = l;
                lcap[j * nv + i] = l;
            }
        }
        // Shortest-path closure; an edge no shorter than a two-step detour is implied.
        let mut dist = lcap.clone();
        for k in 0..nv {
            for i in 0..nv {
                let dik = dist[i * nv + k];
                if !dik.is_finite() {
                    continue;
                }
                for j in 0..nv {
                    let via = dik + dist[k * nv + j];
                    if via < dist[i * nv + j] {
                        dist[i * nv + j] = via;
                    }
                }
            }
        }
        let mut rows: Vec<Vec<T>> = Vec::new();
        let mut rhs: Vec<T> = Vec::new();
        rows.push(mu.weights().to_vec());
        rhs.push(T::one());
        for i in 0..nv {
            let mut r = vec![T::zero(); nv];
            r[i] = T::one();
            rows.push(r);
            rhs.push(caps[i]);
        }
        let mut pair_rows = 0;
        for i in 0..nv {
            for j in 0..i {
                let l = lcap[i * nv + j];
                if !l.is_finite() || (l >= caps[i] && l >= caps[j]) {
                    continue;
                }
                let implied = (0..nv)
                    .any(|k| k != i && k != j && dist[i * nv + k] + dist[k * nv + j] <= l);
                if implied {
                    continue;
                }
                for sign in [T::one(), -T::one()] {
                    let mut r = vec![T::zero(); nv];
                    r[i] = sign;
                    r[j] = -sign;
                    rows.push(r);
                    rhs.push(l);
                }
                pair_rows += 2;
            }
        }
        Ok(Self { lp: Simplex::new(nv, &rows, &rhs)?, weights: mu.weights().to_vec(), pair_rows })
    }

    /// `max |Σ w_i f_i φ_i|` over the feasible set, with the maximizing vector.
    pub fn evaluate(&mut self, f: &SampledFunction<T>) -> Result<(T, Vec<T>)> {
        let c: Vec<T> = self.weights.iter().zip(&f.values).map(|(&w, &v)| w * v).collect();
        if c.iter().all(|&v| v == T::zero()) {
            return Ok((T::zero(), vec![T::zero(); c.len()]));
        }
        let plus = self.lp.maximize(&c)?;
        let neg: Vec<T> = c.iter().map(|&v| -v).collect();
        let minus = self.lp.maximize(&neg)?;
        Ok(if minus.value > plus.value { (minus.value, minus.x) } else { (plus.value, plus.x) })
    }
}

pub fn grand_maximal_upper<T: Scalar>(
    mu: &DiscreteMeasure<T>,
    f: &SampledFunction<T>,
    x: &[T],
) -> Result<(T, Vec<T>)> {
    check_fn(mu, f)?;
    GrandUpperSolver::new(mu, x)?.evaluate(f)
}

fn check_fn<T: Scalar>(mu: &DiscreteMeasure<T>, f: &SampledFunction<T>) -> Result<()> {
    if f.len() != mu.len() {
        return Err(Error::InvalidParams(format!("function has {} values for {} atoms", f.len(), mu.len())));
    }
    Ok(())
}

const BLEND_LO: f64 = 0.9;
const BLEND_HI: f64 = 1.1;

/// Unscaled radial profile `min(r^{-n}, t^{-n})` with a cubic blend on `[0.9r, 1.1r]`, and its derivative.
fn radial_profile<T: Scalar>(t: T, r: T, n: T) -> (T, T) {
    let (lo, hi) = (T::lit(BLEND_LO) * r, T::lit(BLEND_HI) * r);
    let flat = r.powf(-n);
    if t <= lo {
        (flat, T::zero())
    } else if t >= hi {
        (t.powf(-n), -n * t.powf(-n - T::one()))
    } else {
        let width = hi - lo;
        let u = (t - lo) / width;
        let (s, ds) = (smoothstep(u), smoothstep_prime(u) / width);
        let tail = t.powf(-n);
        let v = (T::one() - s) * flat + s * tail;
        let dv = ds * (tail - flat) - s * n * t.powf(-n - T::one());
        (v, dv)
    }
}

/// Normalization `c_n` making `c_n·profile` obey both the pointwise and the gradient cap.
///
/// The profile is scale invariant, so the suprema are computed once at `r = 1`.
pub fn radial_constant<T: Scalar>(n: T) -> T {
    let mut worst = (n + T::one()).max(T::one());
    let steps = 4000;
    for k in 0..=steps {
        let t = T::lit(BLEND_LO + (BLEND_HI - BLEND_LO) * k as f64 / steps as f64);
        let (v, dv) = radial_profile(t, T::one(), n);
        worst = worst.max(v * t.powf(n)).max(dv.abs() * t.powf(n + T::one()));
    }
    // Guard against the grid missing the peak between samples.
    T::one() / (worst * T::lit(1.001))
}

/// Default radius grid `{|y−x|/1.1, |y−x|, |y−x|/0.9}` over the support.
pub fn default_radii<T: Scalar>(mu: &DiscreteMeasure<T>, x: &[T]) -> Vec<T> {
    let mut r: Vec<T> = Vec::new();
    for p in mu.points() {
        let t = dist2(p, x);
        if t > T::zero() {
            r.extend([t / T::lit(BLEND_HI), t, t / T::lit(BLEND_LO)]);
        }
    }
    if r.is_empty() {
        r.push(T::one());
    }
    r.sort_by(|a, b| a.partial_cmp(b).unwrap());
    r.dedup();
    r
}

/// Values at the support of the explicit admissible function with radius `r`, after checking
/// the caps at every atom.
pub fn lower_test_function<T: Scalar>(mu: &DiscreteMeasure<T>, x: &[T], r: T, cn: T) -> Result<Vec<T>> {
    let n = mu.growth_exponent();
    let mut vals = Vec::with_capacity(mu.len());
    let mut grads = Vec::with_capacity(mu.len());
    for p in mu.points() {
        let (v, dv) = radial_profile(dist2(p, x), r, n);
        vals.push(cn * v);
        grads.push(cn * dv.abs());
    }
    let l1: T = vals.iter().zip(mu.weights()).map(|(&v, &w)| v * w).sum();
    let s = if l1 > T::one() { T::one() / l1 } else { T::one() };
    for v in vals.iter_mut() {
        *v = *v * s;
    }
    let tol = T::one() + T::lit(1e3) * T::epsilon();
    let l1: T = vals.iter().zip(mu.weights()).map(|(&v, &w)| v * w).sum();
    if l1 > tol {
        return Err(Error::AdmissibilityViolation(format!("L1 norm {l1} exceeds 1")));
    }
    let class = TestFunctionClass::new(x.to_vec(), n);
    for (i, p) in mu.points().iter().enumerate() {
        if vals[i] > class.pointwise_cap(p) * tol {
            return Err(Error::AdmissibilityViolation(format!("pointwise cap at atom {i}")));
        }
        if grads[i] * s > class.gradient_cap(p) * tol {
            return Err(Error::AdmissibilityViolation(format!("gradient cap at atom {i}")));
        }
    }
    Ok(vals)
}

/// `max_r |Σ w f φ_r|` over the explicit radial family; returns the value and the best radius.
pub fn grand_maximal_lower<T: Scalar>(
    mu: &DiscreteMeasure<T>,
    f: &SampledFunction<T>,
    x: &[T],
    radii: &[T],
) -> Result<(T, T)> {
    check_fn(mu, f)?;
    mu.check_dim(x.len())?;
    if radii.is_empty() {
        return Err(Error::InvalidParams("radius grid is empty".into()));
    }
    let cn = radial_constant(mu.growth_exponent());
    let mut best = (T::zero(), radii[0]);
    for &r in radii {
        let phi = lower_test_function(mu, x, r, cn)?;
        let v: T = phi.iter().zip(mu.weights()).zip(&f.values).map(|((&p, &w), &fv)| p * w * fv).sum();
        if v.abs() > best.0 {
            best = (v.abs(), r);
        }
    }
    Ok(best)
}

/// Both bounds at one point.
pub fn grand_maximal<T: Scalar>(
    mu: &DiscreteMeasure<T>,
    f: &SampledFunction<T>,
    x: &[T],
) -> Result<MaximalResult<T>> {
    let (upper, witness_upper) = grand_maximal_upper(mu, f, x)?;
    let (lower, witness_lower) = grand_maximal_lower(mu, f, x, &default_radii(mu, x))?;
    Ok(MaximalResult { upper, lower, witness_upper, witness_lower })
}

/// Canonical cubes: centers at atoms, sides `{0} ∪ {2‖y − x‖∞}`, with prefix sums for masses.
#[derive(Debug, Clone)]
pub struct CanonicalFamily<T> {
    /// Per center, atoms sorted by sup-distance.
    pub order: Vec<Vec<usize>>,
    pub dist: Vec<Vec<T>>,
    prefix_w: Vec<Vec<T>>,
}

impl<T: Scalar> CanonicalFamily<T> {
    pub fn new(mu: &DiscreteMeasure<T>) -> Self {
        let nv = mu.len();
        let (order, dist): (Vec<Vec<usize>>, Vec<Vec<T>>) = (0..nv)
            .into_par_iter()
            .map(|c| {
                let mut idx: Vec<usize> = (0..nv).collect();
                let d: Vec<T> = (0..nv).map(|j| dist_inf(mu.point(c), mu.point(j))).collect();
                idx.sort_by(|&a, &b| d[a].partial_cmp(&d[b]).unwrap().then(a.cmp(&b)));
                let ds = idx.iter().map(|&j| d[j]).collect();
                (idx, ds)
            })
            .unzip();
        let prefix_w = order.iter().map(|o| prefix(o.iter().map(|&j| mu.weight(j)))).collect();
        Self { order, dist, prefix_w }
    }

    pub fn num_centers(&self) -> usize {
        self.order.len()
    }

    /// Distinct canonical sides at `center`, increasing, starting with 0.
    pub fn sides(&self, center: usize) -> Vec<T> {
        let mut s: Vec<T> = self.dist[center].iter().map(|&d| d + d).collect();
        s.dedup();
        s
    }

    /// Number of atoms of the closed cube of the given side around `center`.
    pub fn count_within(&self, center: usize, side: T) -> usize {
        let h = side * T::lit(0.5);
        self.dist[center].partition_point(|&d| d <= h)
    }

    pub fn mass(&self, center: usize, side: T) -> T {
        self.prefix_w[center][self.count_within(center, side)]
    }

    /// Prefix sums of `values[j]·w_j` in the order of `center`.
    pub fn prefix_of(&self, mu: &DiscreteMeasure<T>, center: usize, values: &[T]) -> Vec<T> {
        prefix(self.order[center].iter().map(|&j| values[j] * mu.weight(j)))
    }

    /// Prefix sums of `w_j / ‖y_j − x_c‖₂^n` in the order of `center`, the center itself counting 0.
    pub fn kernel_prefix(&self, mu: &DiscreteMeasure<T>, center: usize) -> Vec<T> {
        let n = mu.growth_exponent();
        let c = mu.point(center);
        prefix(self.order[center].iter().map(|&j| {
            let r = dist2(mu.point(j), c);
            if r == T::zero() {
                T::zero()
            } else {
                mu.weight(j) / r.powf(n)
            }
        }))
    }

    /// `Σ w_j / ‖y_j − x_c‖₂^n` over the atoms of `hull \ inner`, both centered at `center`.
    pub fn annulus_sum(&self, kernel_prefix: &[T], center: usize, inner: T, hull: T) -> T {
        let a = self.count_within(center, inner);
        let b = self.count_within(center, hull);
        if b > a {
            kernel_prefix[b] - kernel_prefix[a]
        } else {
            T::zero()
        }
    }

    pub fn cube(&self, mu: &DiscreteMeasure<T>, center: usize, side: T) -> Cube<T> {
        Cube::new(mu.point(center).to_vec(), side)
    }
}

fn prefix<T: Scalar>(it: impl Iterator<Item = T>) -> Vec<T> {
    let mut out = vec![T::zero()];
    let mut acc = T::zero();
    for v in it {
        acc = acc + v;
        out.push(acc);
    }
    out
}

/// Which maximal operator to evaluate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MaximalKind<T> {
    /// `sup_{Q ∋ x} μ(ρQ)^{-1} ∫_Q |f|`.
    HlLower { rho: T },
    /// `sup_{Q ∋ x} μ(ρQ)^{-1} ∫_{ρQ} |f|`, the larger variant.
    HlUpper { rho: T },
    GrandUpper,
    GrandLower,
}

/// Per center, the suffix maxima (over decreasing sides) of the cube ratios.
struct HlTable<T> {
    sides: Vec<Vec<T>>,
    best: Vec<Vec<(T, T)>>,
}

fn hl_table<T: Scalar>(
    mu: &DiscreteMeasure<T>,
    fam: &CanonicalFamily<T>,
    f: &SampledFunction<T>,
    rho: T,
    upper: bool,
) -> HlTable<T> {
    let absf: Vec<T> = f.values.iter().map(|v| v.abs()).collect();
    let (sides, best): (Vec<Vec<T>>, Vec<Vec<(T, T)>>) = (0..mu.len())
        .into_par_iter()
        .map(|c| {
            let pf = fam.prefix_of(mu, c, &absf);
            let sides = fam.sides(c);
            let mut best = vec![(T::zero(), T::zero()); sides.len()];
            let mut run = (T::zero(), T::zero());
            for k in (0..sides.len()).rev() {
                let s = sides[k];
                let outer = fam.mass(c, s * rho);
                let inner = pf[fam.count_within(c, if upper { s * rho } else { s })];
                if outer > T::zero() {
                    let v = inner / outer;
                    if v > run.0 {
                        run = (v, s);
                    }
                }
                best[k] = run;
            }
            (sides, best)
        })
        .unzip();
    HlTable { sides, best }
}

impl<T: Scalar> HlTable<T> {
    /// Best ratio over canonical cubes containing `q`, with the witness center and side.
    fn query(&self, mu: &DiscreteMeasure<T>, q: &[T]) -> (T, usize, T) {
        let mut out = (T::zero(), usize::MAX, T::zero());
        for c in 0..self.sides.len() {
            let need = dist_inf(q, mu.point(c));
            let k = self.sides[c].partition_point(|&s| s * T::lit(0.5) < need);
            if k < self.sides[c].len() {
                let (v, s) = self.best[c][k];
                if v > out.0 || (v == out.0 && out.1 != usize::MAX && v > T::zero() && s > out.2) {
                    out = (v, c, s);
                }
            }
        }
        out
    }
}

pub fn hl_maximal<T: Scalar>(
    mu: &DiscreteMeasure<T>,
    f: &SampledFunction<T>,
    x: &[T],
    rho: T,
    centered_variant: bool,
) -> Result<T> {
    Ok(hl_field(mu, f, rho, centered_variant, &[x.to_vec()])?[0])
}

/// Hardy–Littlewood maximal values at many points.
pub fn hl_field<T: Scalar>(
    mu: &DiscreteMeasure<T>,
    f: &SampledFunction<T>,
    rho: T,
    upper: bool,
    queries: &[Vec<T>],
) -> Result<Vec<T>> {
    Ok(hl_field_with_witness(mu, f, rho, upper, queries)?.into_iter().map(|(v, _)| v).collect())
}

/// Values with the witnessing canonical cube (`None` when the value is 0).
pub fn hl_field_with_witness<T: Scalar>(
    mu: &DiscreteMeasure<T>,
    f: &SampledFunction<T>,
    rho: T,
    upper: bool,
    queries: &[Vec<T>],
) -> Result<Vec<(T, Option<Cube<T>>)>> {
    check_fn(mu, f)?;
    if !(rho > T::one()) {
        return Err(Error::InvalidParams("rho must exceed 1".into()));
    }
    for q in queries {
        mu.check_dim(q.len())?;
    }
    let fam = CanonicalFamily::new(mu);
    let table = hl_table(mu, &fam, f, rho, upper);
    Ok(queries
        .par_iter()
        .map(|q| {
            let (v, c, s) = table.query(mu, q);
            if c == usize::MAX || v == T::zero() {
                (T::zero(), None)
            } else {
                (v, Some(Cube::new(mu.point(c).to_vec(), s)))
            }
        })
        .collect())
}

/// Batch evaluation in query order.
pub fn maximal_field<T: Scalar>(
    mu: &DiscreteMeasure<T>,
    f: &SampledFunction<T>,
    kind: MaximalKind<T>,
    queries: &[Vec<T>],
) -> Result<Vec<T>> {
    match kind {
        MaximalKind::HlLower { rho } => hl_field(mu, f, rho, false, queries),
        MaximalKind::HlUpper { rho } => hl_field(mu, f, rho, true, queries),
        MaximalKind::GrandUpper => {
            check_fn(mu, f)?;
            queries.par_iter().map(|q| grand_maximal_upper(mu, f, q).map(|r| r.0)).collect()
        }
        MaximalKind::GrandLower => {
            check_fn(mu, f)?;
            queries
                .par_iter()
                .map(|q| grand_maximal_lower(mu, f, q, &default_radii(mu, q)).map(|r| r.0))
                .collect()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line(ws: &[f64]) -> DiscreteMeasure<f64> {
        let pts = (0..ws.len()).map(|i| vec![i as f64]).collect();
        DiscreteMeasure::new(1, 1.0, pts, ws.to_vec()).unwrap()
    }

    fn sf(v: &[f64]) -> SampledFunction<f64> {
        SampledFunction::from_values(v.to_vec())
    }

    #[test]
    fn single_atom_upper_closed_form() {
        let mu = line(&[1.0]);
        let (v, w) = grand_maximal_upper(&mu, &sf(&[2.0]), &[0.5]).unwrap();
        assert_eq!(v, 2.0);
        assert_eq!(w, vec![1.0]);
        assert_eq!(grand_maximal_upper(&mu, &sf(&[0.0]), &[0.5]).unwrap().0, 0.0);
    }

    #[test]
    fn single_atom_lower_reaches_one() {
        let mu = line(&[1.0]);
        let radii: Vec<f64> = (1..200).map(|k| k as f64 * 0.02).collect();
        let (v, _) = grand_maximal_lower(&mu, &sf(&[2.0]), &[0.5], &radii).unwrap();
        let cn = radial_constant(1.0);
        assert!(v >= 2.0 * cn * 1.0 - 1e-12);
        assert!(v <= 2.0);
        assert_eq!(grand_maximal_lower(&mu, &sf(&[0.0]), &[0.5], &radii).unwrap().0, 0.0);
    }

    #[test]
    fn radial_constant_enforces_caps() {
        for n in [0.5, 1.0, 1.5, 2.0] {
            let cn = radial_constant(n);
            assert!(cn <= 1.0 / (n + 1.0));
            for k in 1..2000 {
                let t = k as f64 * 0.001;
                let (v, dv) = radial_profile(t, 1.0, n);
                assert!(cn * v <= t.powf(-n) * (1.0 + 1e-12));
                assert!(cn * dv.abs() <= t.powf(-n - 1.0) * (1.0 + 1e-12));
            }
        }
    }

    #[test]
    fn hl_two_atoms() {
        let mu = line(&[1.0, 1.0]);
        let f = sf(&[1.0, 1.0]);
        assert_eq!(hl_maximal(&mu, &f, &[0.0], 2.0, false).unwrap(), 1.0);
        assert_eq!(hl_maximal(&mu, &sf(&[0.0, 0.0]), &[0.0], 2.0, false).unwrap(), 0.0);
        assert!(hl_maximal(&mu, &f, &[0.0], 2.0, true).unwrap() >= 1.0);
    }

    #[test]
    fn hl_matches_brute_force() {
        let mu = line(&[1.0, 3.0, 0.5, 2.0, 1.0]);
        let f = sf(&[1.0, -2.0, 4.0, 0.0, 1.5]);
        let fam = CanonicalFamily::new(&mu);
        for x in 0..5 {
            let xp = mu.point(x).to_vec();
            let mut lo: f64 = 0.0;
            let mut hi: f64 = 0.0;
            for c in 0..5 {
                for s in fam.sides(c) {
                    let q = Cube::new(mu.point(c).to_vec(), s);
                    if !q.contains_point(&xp) {
                        continue;
                    }
                    let big = q.scale(2.0);
                    let int = |cube: &Cube<f64>| -> f64 {
                        (0..5).filter(|&j| cube.contains_point(mu.point(j))).map(|j| f.values[j].abs() * mu.weight(j)).sum()
                    };
                    let m = mu.mass_cube(&big).unwrap();
                    lo = lo.max(int(&q) / m);
                    hi = hi.max(int(&big) / m);
                }
            }
            assert!((hl_maximal(&mu, &f, &xp, 2.0, false).unwrap() - lo).abs() < 1e-12);
            assert!((hl_maximal(&mu, &f, &xp, 2.0, true).unwrap() - hi).abs() < 1e-12);
        }
    }

    #[test]
    fn sandwich_and_homogeneity() {
        let mu = line(&[1.0, 0.5, 2.0, 1.0, 0.25, 1.0]);
        let f = sf(&[1.0, -1.0, 0.5, -0.25, 2.0, -1.0]);
        for x in [vec![0.0], vec![2.5], vec![7.0]] {
            let r = grand_maximal(&mu, &f, &x).unwrap();
            assert!(r.lower <= r.upper * (1.0 + 1e-9), "{r:?}");
            let (u3, _) = grand_maximal_upper(&mu, &f.scaled(-3.0), &x).unwrap();
            assert!((u3 - 3.0 * r.upper).abs() <= 1e-9 * u3.max(1.0));
        }
    }

    #[test]
    fn upper_witness_is_feasible() {
        let mu = line(&[1.0, 0.5, 2.0, 1.0]);
        let f = sf(&[1.0, -1.0, 0.5, -0.25]);
        let x = [1.5];
        let (_, phi) = grand_maximal_upper(&mu, &f, &x).unwrap();
        let class = TestFunctionClass::new(x.to_vec(), 1.0);
        let l1: f64 = phi.iter().zip(mu.weights()).map(|(a, b)| a * b).sum();
        assert!(l1 <= 1.0 + 1e-9);
        for i in 0..4 {
            assert!(phi[i] >= -1e-12 && phi[i] <= class.pointwise_cap(mu.point(i)) + 1e-9);
            for j in 0..4 {
                assert!((phi[i] - phi[j]).abs() <= class.pair_cap(mu.point(i), mu.point(j)) + 1e-9);
            }
        }
    }
}
