//! Sampled functions, RBMO norms, atomic blocks, H¹ bounds, John–Nirenberg profiles and Z-sets.

use rayon::prelude::*;

use crate::cubes::{delta_unchecked, Cube, DoublingParams};
use crate::error::{Error, Result};
use crate::czdecomp::{cz_decompose_with_field, CZDecomposition};
use crate::maximal::{hl_field_with_witness, CanonicalFamily};
use crate::measure::DiscreteMeasure;
use crate::scalar::{dist_inf, Scalar};

/// Real values aligned with the support of a measure.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SampledFunction<T> {
    pub values: Vec<T>,
}

impl<T: Scalar> SampledFunction<T> {
    pub fn new(mu: &DiscreteMeasure<T>, values: Vec<T>) -> Result<Self> {
        if values.len() != mu.len() {
            return Err(Error::InvalidParams(format!(
                "function has {} values for {} atoms",
                values.len(),
                mu.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParams("function values must be finite".into()));
        }
        Ok(Self { values })
    }

    pub fn from_values(values: Vec<T>) -> Self {
        Self { values }
    }

    pub fn zeros(len: usize) -> Self {
        Self { values: vec![T::zero(); len] }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn integral(&self, mu: &DiscreteMeasure<T>) -> T {
        self.values.iter().zip(mu.weights()).map(|(&v, &w)| v * w).sum()
    }

    pub fn l1(&self, mu: &DiscreteMeasure<T>) -> T {
        self.values.iter().zip(mu.weights()).map(|(&v, &w)| v.abs() * w).sum()
    }

    pub fn sup(&self) -> T {
        self.values.iter().fold(T::zero(), |a, &v| a.max(v.abs()))
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|&v| v == T::zero())
    }

    pub fn scaled(&self, c: T) -> Self {
        Self { values: self.values.iter().map(|&v| v * c).collect() }
    }

    pub fn plus(&self, other: &Self) -> Self {
        Self { values: self.values.iter().zip(&other.values).map(|(&a, &b)| a + b).collect() }
    }

    pub fn minus(&self, other: &Self) -> Self {
        Self { values: self.values.iter().zip(&other.values).map(|(&a, &b)| a - b).collect() }
    }

    pub fn shifted(&self, c: T) -> Self {
        Self { values: self.values.iter().map(|&v| v + c).collect() }
    }
}

/// `m_Q f`.
pub fn mean<T: Scalar>(mu: &DiscreteMeasure<T>, f: &SampledFunction<T>, q: &Cube<T>) -> Result<T> {
    mu.check_dim(q.dim())?;
    let mut m = T::zero();
    let mut s = T::zero();
    for (i, p) in mu.points().iter().enumerate() {
        if q.contains_point(p) {
            m = m + mu.weight(i);
            s = s + mu.weight(i) * f.values[i];
        }
    }
    if m == T::zero() {
        return Err(Error::ZeroMassCube);
    }
    Ok(s / m)
}

/// A doubling cube of the canonical family used for suprema over "all doubling cubes".
#[derive(Debug, Clone, PartialEq)]
pub struct FamilyCube<T> {
    pub center: usize,
    pub side: T,
    /// Atoms in the cube: the first `count` entries of the center's distance order.
    pub count: usize,
    pub mass: T,
}

/// Doubling cubes centered at atoms with sides in `{0} ∪ {2‖y − x‖∞} ∪ {‖y − x‖∞}`.
pub fn doubling_family<T: Scalar>(
    mu: &DiscreteMeasure<T>,
    fam: &CanonicalFamily<T>,
    p: &DoublingParams<T>,
) -> Vec<FamilyCube<T>> {
    let mut out = Vec::new();
    for c in 0..mu.len() {
        let mut sides: Vec<T> = fam.dist[c].iter().flat_map(|&d| [d, d + d]).collect();
        sides.sort_by(|a, b| a.partial_cmp(b).unwrap());
        sides.dedup();
        for s in sides {
            let count = fam.count_within(c, s);
            let mass = fam.mass(c, s);
            if s == T::zero() || fam.mass(c, s * p.alpha) <= p.beta * mass {
                out.push(FamilyCube { center: c, side: s, count, mass });
            }
        }
    }
    out
}

/// Estimate of `‖f‖_*` with the cubes attaining it.
#[derive(Debug, Clone, PartialEq)]
pub struct RbmoEstimate<T> {
    pub value: T,
    pub oscillation: T,
    pub coherence: T,
    pub oscillation_witness: Option<Cube<T>>,
    pub coherence_witness: Option<(Cube<T>, Cube<T>)>,
    pub cube_family_size: usize,
}

pub fn rbmo_norm<T: Scalar>(
    mu: &DiscreteMeasure<T>,
    f: &SampledFunction<T>,
    p: &DoublingParams<T>,
) -> Result<RbmoEstimate<T>> {
    if mu.is_empty() {
        return Err(Error::EmptyFamily);
    }
    if f.len() != mu.len() {
        return Err(Error::InvalidParams("function length does not match measure".into()));
    }
    let fam = CanonicalFamily::new(mu);
    let family = doubling_family(mu, &fam, p);
    if family.is_empty() {
        return Err(Error::EmptyFamily);
    }
    let means: Vec<T> = family
        .iter()
        .map(|q| {
            let s: T = fam.order[q.center][..q.count].iter().map(|&j| f.values[j] * mu.weight(j)).sum();
            s / q.mass
        })
        .collect();
    let cube = |q: &FamilyCube<T>| Cube::new(mu.point(q.center).to_vec(), q.side);
    let osc: Vec<T> = family
        .par_iter()
        .zip(&means)
        .map(|(q, &m)| {
            let s: T =
                fam.order[q.center][..q.count].iter().map(|&j| (f.values[j] - m).abs() * mu.weight(j)).sum();
            s / q.mass
        })
        .collect();
    let mut oscillation = T::zero();
    let mut osc_w = None;
    for (k, &v) in osc.iter().enumerate() {
        if v > oscillation {
            oscillation = v;
            osc_w = Some(k);
        }
    }
    let cubes: Vec<Cube<T>> = family.iter().map(cube).collect();
    let kernel: Vec<Vec<T>> = (0..mu.len()).into_par_iter().map(|c| fam.kernel_prefix(mu, c)).collect();
    // For Q ⊂ R the hull of R is R itself, so δ(Q, R) is the annulus around Q alone.
    let nested_delta = |a: usize, b: usize| {
        let (q, r) = (&cubes[a], &cubes[b]);
        let mut reach = q.half();
        for k in 0..q.dim() {
            reach = reach.max((r.lo(k) - q.center[k]).abs()).max((r.hi(k) - q.center[k]).abs());
        }
        let c = family[a].center;
        fam.annulus_sum(&kernel[c], c, q.side, reach + reach)
    };
    // The family lists each center's cubes by increasing side, so the cubes of one center that
    // contain Q form a suffix along which δ(Q, ·) is nondecreasing. Suffix extremes of the means
    // bound what the rest of a suffix can contribute.
    let mut ranges = vec![(0usize, 0usize); mu.len()];
    let mut start = 0;
    while start < family.len() {
        let c = family[start].center;
        let mut end = start;
        while end < family.len() && family[end].center == c {
            end += 1;
        }
        ranges[c] = (start, end);
        start = end;
    }
    let mut suf_max = means.clone();
    let mut suf_min = means.clone();
    for &(s0, e0) in &ranges {
        for k in (s0..e0.saturating_sub(1)).rev() {
            suf_max[k] = suf_max[k].max(suf_max[k + 1]);
            suf_min[k] = suf_min[k].min(suf_min[k + 1]);
        }
    }
    let per_q: Vec<(T, Option<usize>)> = (0..family.len())
        .into_par_iter()
        .map(|qi| {
            let mut best = (T::zero(), None);
            // Same center and atoms as the previous, smaller cube: same ratios, fewer hosts.
            if qi > 0 && family[qi - 1].center == family[qi].center && family[qi - 1].count == family[qi].count {
                return best;
            }
            let q = &cubes[qi];
            let mq = means[qi];
            for (c, &(s0, e0)) in ranges.iter().enumerate() {
                let need = (dist_inf(mu.point(c), &q.center) + q.half()) * (T::one() - T::tolerance());
                let first = s0 + family[s0..e0].partition_point(|r| r.side * T::lit(0.5) < need);
                for ri in first..e0 {
                    let spread = (suf_max[ri] - mq).max(mq - suf_min[ri]);
                    if spread <= best.0 {
                        break;
                    }
                    if ri > first && family[ri - 1].count == family[ri].count || !cubes[ri].contains_cube(q) {
                        continue;
                    }
                    let d = T::one() + nested_delta(qi, ri);
                    if spread / d <= best.0 {
                        break;
                    }
                    let v = (mq - means[ri]).abs() / d;
                    if v > best.0 {
                        best = (v, Some(ri));
                    }
                }
            }
            best
        })
        .collect();
    let mut coherence = T::zero();
    let mut coh_w = None;
    for (qi, &(v, ri)) in per_q.iter().enumerate() {
        if v > coherence {
            coherence = v;
            coh_w = ri.map(|r| (qi, r));
        }
    }
    Ok(RbmoEstimate {
        value: oscillation.max(coherence),
        oscillation,
        coherence,
        oscillation_witness: osc_w.map(|k| cubes[k].clone()),
        coherence_witness: coh_w.map(|(a, b)| (cubes[a].clone(), cubes[b].clone())),
        cube_family_size: family.len(),
    })
}

/// One `λ_j a_j` of a block.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockAtom<T> {
    pub cube: Cube<T>,
    pub values: SampledFunction<T>,
    pub lambda: T,
}

/// `b = Σ λ_j a_j` on a host cube `R`.
#[derive(Debug, Clone, PartialEq)]
pub struct AtomicBlock<T> {
    pub host: Cube<T>,
    pub atoms: Vec<BlockAtom<T>>,
}

impl<T: Scalar> AtomicBlock<T> {
    pub fn function(&self, len: usize) -> SampledFunction<T> {
        let mut v = vec![T::zero(); len];
        for a in &self.atoms {
            for (i, &x) in a.values.values.iter().enumerate() {
                v[i] = v[i] + a.lambda * x;
            }
        }
        SampledFunction::from_values(v)
    }

    pub fn norm(&self) -> T {
        self.atoms.iter().map(|a| a.lambda.abs()).sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ViolationKind {
    SupportNesting,
    AtomSupport,
    BlockSupport,
    Cancellation,
    SizeCondition,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BlockViolation<T> {
    pub kind: ViolationKind,
    pub atom: Option<usize>,
    pub magnitude: T,
}

impl ViolationKind {
    pub fn label(self) -> &'static str {
        match self {
            ViolationKind::SupportNesting => "support nesting",
            ViolationKind::AtomSupport => "atom support",
            ViolationKind::BlockSupport => "block support",
            ViolationKind::Cancellation => "cancellation",
            ViolationKind::SizeCondition => "size condition",
        }
    }
}

/// Checks every block condition and returns `Σ|λ_j|`.
pub fn validate_atomic_block<T: Scalar>(
    mu: &DiscreteMeasure<T>,
    block: &AtomicBlock<T>,
) -> std::result::Result<T, BlockViolation<T>> {
    let viol = |kind, atom, magnitude| Err(BlockViolation { kind, atom, magnitude });
    for (j, a) in block.atoms.iter().enumerate() {
        if !block.host.contains_cube(&a.cube) {
            return viol(ViolationKind::SupportNesting, Some(j), T::one());
        }
        for (i, &v) in a.values.values.iter().enumerate() {
            if v != T::zero() && !a.cube.contains_point(mu.point(i)) {
                return viol(ViolationKind::AtomSupport, Some(j), v.abs());
            }
        }
    }
    let b = block.function(mu.len());
    for (i, &v) in b.values.iter().enumerate() {
        if v != T::zero() && !block.host.contains_point(mu.point(i)) {
            return viol(ViolationKind::BlockSupport, None, v.abs());
        }
    }
    let total = b.integral(mu);
    if total.abs() > T::tolerance() * (T::one() + b.l1(mu)) {
        return viol(ViolationKind::Cancellation, None, total.abs());
    }
    for (j, a) in block.atoms.iter().enumerate() {
        let cap = mu.mass_cube_unchecked(&a.cube.scale(T::lit(2.0))) * (T::one() + delta_unchecked(mu, &a.cube, &block.host));
        let load = a.values.sup() * cap;
        if load > T::one() + T::tolerance() {
            return viol(ViolationKind::SizeCondition, Some(j), load - T::one());
        }
    }
    Ok(block.norm())
}

/// Single-atom block `b = λ a` on `host` with the cheapest admissible `λ`.
pub fn single_atom_block<T: Scalar>(mu: &DiscreteMeasure<T>, b: &SampledFunction<T>, host: &Cube<T>) -> AtomicBlock<T> {
    let sup = b.sup();
    let lambda = sup * mu.mass_cube_unchecked(&host.scale(T::lit(2.0)));
    let values = if sup > T::zero() { b.scaled(T::one() / lambda) } else { b.clone() };
    AtomicBlock { host: host.clone(), atoms: vec![BlockAtom { cube: host.clone(), values, lambda }] }
}

/// `(λ, μ{x ∈ Q : |f − m_Q f| > λ} / μ(Q))`.
pub fn jn_profile<T: Scalar>(
    mu: &DiscreteMeasure<T>,
    f: &SampledFunction<T>,
    q: &Cube<T>,
    lambdas: &[T],
) -> Result<Vec<(T, T)>> {
    let m = mean(mu, f, q)?;
    let inside = mu.atoms_in(q);
    let total: T = inside.iter().map(|&i| mu.weight(i)).sum();
    Ok(lambdas
        .iter()
        .map(|&l| {
            let s: T = inside.iter().filter(|&&i| (f.values[i] - m).abs() > l).map(|&i| mu.weight(i)).sum();
            (l, s / total)
        })
        .collect())
}

/// For each atom of `Q`, `sup |m_P f − m_Q f|` over canonical doubling `P ∋ x` with `ℓ(P) ≤ ℓ(Q)/4`.
pub fn z_deviation<T: Scalar>(
    mu: &DiscreteMeasure<T>,
    fam: &CanonicalFamily<T>,
    family: &[FamilyCube<T>],
    f: &SampledFunction<T>,
    q: &Cube<T>,
) -> Result<Vec<(usize, T)>> {
    let mq = mean(mu, f, q)?;
    let cap = q.side * T::lit(0.25);
    let mut dev = vec![T::zero(); mu.len()];
    for p in family.iter().filter(|p| p.side <= cap) {
        let atoms = &fam.order[p.center][..p.count];
        let s: T = atoms.iter().map(|&j| f.values[j] * mu.weight(j)).sum();
        let gap = (s / p.mass - mq).abs();
        for &j in atoms {
            if gap > dev[j] {
                dev[j] = gap;
            }
        }
    }
    Ok(mu.atoms_in(q).into_iter().map(|i| (i, dev[i])).collect())
}

/// `Z(Q, λ)` as atom indices.
pub fn z_set<T: Scalar>(
    mu: &DiscreteMeasure<T>,
    f: &SampledFunction<T>,
    q: &Cube<T>,
    lambda: T,
    p: &DoublingParams<T>,
) -> Result<Vec<usize>> {
    let fam = CanonicalFamily::new(mu);
    let family = doubling_family(mu, &fam, p);
    Ok(z_deviation(mu, &fam, &family, f, q)?.into_iter().filter(|&(_, d)| d <= lambda).map(|(i, _)| i).collect())
}

/// Upper bound for the atomic H¹ norm together with the blocks realizing it.
#[derive(Debug, Clone, PartialEq)]
pub struct H1Bound<T> {
    pub bound: T,
    pub blocks: Vec<AtomicBlock<T>>,
    /// Exponent `k` of the level `λ = 2^k` used, or `None` for the single-block fallback.
    pub level: Option<i32>,
}

/// `f w_i − α_i` as one block on `R_i`: either two atoms (`(3/2)Q_i` and `R_i`) or one atom on `R_i`.
fn cz_piece_block<T: Scalar>(
    mu: &DiscreteMeasure<T>,
    f: &SampledFunction<T>,
    cz: &CZDecomposition<T>,
    i: usize,
) -> Option<AtomicBlock<T>> {
    let piece = cz.piece(f, i);
    if piece.is_zero() {
        return None;
    }
    let host = &cz.hosts[i];
    let single = single_atom_block(mu, &piece, host);
    let mut fw = vec![T::zero(); mu.len()];
    for &(a, w) in &cz.partition_weights[i] {
        fw[a] = f.values[a] * w;
    }
    let fw = SampledFunction::from_values(fw);
    let alpha = cz.alpha_function(i, mu.len());
    let inner = cz.whitney.cubes[i].scale(T::lit(1.5));
    let mut atoms = Vec::new();
    if !fw.is_zero() {
        let lambda = fw.sup()
            * mu.mass_cube_unchecked(&inner.scale(T::lit(2.0)))
            * (T::one() + delta_unchecked(mu, &inner, host));
        atoms.push(BlockAtom { cube: inner, values: fw.scaled(T::one() / lambda), lambda });
    }
    if !alpha.is_zero() {
        let lambda = alpha.sup() * mu.mass_cube_unchecked(&host.scale(T::lit(2.0)));
        atoms.push(BlockAtom { cube: host.clone(), values: alpha.scaled(-T::one() / lambda), lambda });
    }
    let split = AtomicBlock { host: host.clone(), atoms };
    Some(if split.norm() < single.norm() { split } else { single })
}

/// Multiscale CZ packaging of a mean-zero `f` into validated atomic blocks.
pub fn h1_upper_bound<T: Scalar>(mu: &DiscreteMeasure<T>, f: &SampledFunction<T>) -> Result<H1Bound<T>> {
    if f.len() != mu.len() {
        return Err(Error::InvalidParams("function length does not match measure".into()));
    }
    let total = f.integral(mu);
    if total.abs() > T::tolerance() * (T::one() + f.l1(mu)) {
        return Err(Error::NotMeanZero(total.as_f64()));
    }
    if f.is_zero() {
        return Ok(H1Bound { bound: T::zero(), blocks: Vec::new(), level: None });
    }
    let hull = mu.bounding_cube();
    let fallback = single_atom_block(mu, f, &hull);
    let mut best = H1Bound { bound: fallback.norm(), blocks: vec![fallback], level: None };
    let field = hl_field_with_witness(mu, f, T::lit(2.0), false, mu.points())?;
    let positive: Vec<T> = field.iter().map(|w| w.0).filter(|&v| v > T::zero()).collect();
    let lo = positive.iter().copied().fold(T::infinity(), T::min).log2().floor().to_i32().unwrap_or(0);
    let hi = positive.iter().copied().fold(T::zero(), T::max).log2().ceil().to_i32().unwrap_or(0);
    for k in lo..=hi {
        let cz = cz_decompose_with_field(mu, f, T::lit(2.0).powi(k), &field)?;
        if cz.whitney.cubes.is_empty() {
            continue;
        }
        let mut blocks: Vec<AtomicBlock<T>> =
            (0..cz.whitney.cubes.len()).filter_map(|i| cz_piece_block(mu, f, &cz, i)).collect();
        if !cz.g.is_zero() {
            blocks.push(single_atom_block(mu, &cz.g, &hull));
        }
        let bound: T = blocks.iter().map(|b| b.norm()).sum();
        if bound < best.bound {
            best = H1Bound { bound, blocks, level: Some(k) };
        }
    }
    for (j, b) in best.blocks.iter().enumerate() {
        if let Err(v) = validate_atomic_block(mu, b) {
            return Err(Error::PropertyViolated {
                tag: format!("atomic block: {}", v.kind.label()),
                location: format!("block {j}"),
            });
        }
    }
    Ok(best)
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
    fn means() {
        let mu = line(&[1.0, 1.0]);
        let q = Cube::new(vec![0.5], 2.0);
        assert_eq!(mean(&mu, &sf(&[3.0, 3.0]), &q).unwrap(), 3.0);
        assert_eq!(mean(&mu, &sf(&[1.0, -1.0]), &q).unwrap(), 0.0);
        assert_eq!(mean(&mu, &sf(&[1.0, -1.0]), &Cube::point(vec![1.0])).unwrap(), -1.0);
        assert_eq!(mean(&mu, &sf(&[1.0, -1.0]), &Cube::point(vec![0.5])), Err(Error::ZeroMassCube));
    }

    #[test]
    fn rbmo_two_atoms() {
        let mu = line(&[1.0, 1.0]);
        let p = DoublingParams::standard(1);
        assert_eq!(rbmo_norm(&mu, &sf(&[1.0, -1.0]), &p).unwrap().value, 1.0);
        assert_eq!(rbmo_norm(&mu, &sf(&[2.0, 2.0]), &p).unwrap().value, 0.0);
        assert_eq!(rbmo_norm(&mu, &sf(&[6.0, 4.0]), &p).unwrap().value, 1.0);
    }

    #[test]
    fn rbmo_is_a_seminorm() {
        let mu = line(&[1.0, 0.5, 2.0, 1.0, 3.0]);
        let p = DoublingParams::standard(1);
        let f = sf(&[1.0, -2.0, 0.5, 3.0, 0.0]);
        let g = sf(&[0.0, 1.0, 1.0, -1.0, 2.0]);
        let nf = rbmo_norm(&mu, &f, &p).unwrap().value;
        let ng = rbmo_norm(&mu, &g, &p).unwrap().value;
        let nfg = rbmo_norm(&mu, &f.plus(&g), &p).unwrap().value;
        assert!(nfg <= nf + ng + 1e-12);
        assert!((rbmo_norm(&mu, &f.scaled(-2.5), &p).unwrap().value - 2.5 * nf).abs() < 1e-12);
    }

    #[test]
    fn block_validation() {
        let mu = line(&[1.0, 1.0, 1.0]);
        let host = Cube::new(vec![1.0], 2.0);
        let f = sf(&[1.0, -2.0, 1.0]);
        let b = single_atom_block(&mu, &f, &host);
        assert_eq!(validate_atomic_block(&mu, &b), Ok(2.0 * 3.0));
        let mut skew = b.clone();
        skew.atoms[0].values.values[0] += 1e-3;
        let v = validate_atomic_block(&mu, &skew).unwrap_err();
        assert_eq!(v.kind, ViolationKind::Cancellation);
        assert!((v.magnitude - 1e-3 * b.atoms[0].lambda).abs() < 1e-12);
        let mut big = b.clone();
        big.atoms[0].values = big.atoms[0].values.scaled(2.0);
        big.atoms[0].lambda *= 0.5;
        assert_eq!(validate_atomic_block(&mu, &big).unwrap_err().kind, ViolationKind::SizeCondition);
        let mut outside = b;
        outside.atoms[0].cube = Cube::new(vec![0.5], 1.0);
        assert_eq!(validate_atomic_block(&mu, &outside).unwrap_err().kind, ViolationKind::AtomSupport);
    }

    #[test]
    fn h1_bound_basics() {
        let mu = line(&[1.0; 8]);
        assert_eq!(h1_upper_bound(&mu, &SampledFunction::zeros(8)).unwrap().bound, 0.0);
        assert!(matches!(h1_upper_bound(&mu, &sf(&[1.0; 8])), Err(Error::NotMeanZero(_))));
        let f = sf(&[1.0, -1.0, 0.0, 0.0, 0.0, 0.0, 2.0, -2.0]);
        let h = h1_upper_bound(&mu, &f).unwrap();
        assert!(h.bound <= f.sup() * mu.mass_cube(&mu.bounding_cube().scale(2.0)).unwrap());
        assert!(h.bound >= f.l1(&mu) - 1e-9);
        let sum = h.blocks.iter().fold(SampledFunction::zeros(8), |acc, b| acc.plus(&b.function(8)));
        for i in 0..8 {
            assert!((sum.values[i] - f.values[i]).abs() < 1e-9);
        }
    }

    #[test]
    fn jn_and_z_sets() {
        let mu = line(&[1.0; 6]);
        let p = DoublingParams::standard(1);
        let f = sf(&[0.0, 0.0, 5.0, 0.0, 0.0, 1.0]);
        let q = mu.bounding_cube();
        let prof = jn_profile(&mu, &f, &q, &[0.0, 0.5, 1.0, 10.0]).unwrap();
        assert!(prof.windows(2).all(|w| w[1].1 <= w[0].1));
        assert_eq!(prof[3].1, 0.0);
        let all = z_set(&mu, &f, &q, 2.0 * f.sup(), &p).unwrap();
        assert_eq!(all, (0..6).collect::<Vec<_>>());
        assert_eq!(z_set(&mu, &sf(&[1.0; 6]), &q, 0.0, &p).unwrap().len(), 6);
        let tight = z_set(&mu, &f, &q, 0.5, &p).unwrap();
        assert!(!tight.contains(&2));
    }
}
