//! Greedy Besicovitch coverings, Whitney decompositions of box unions and the generation families.

use rayon::prelude::*;

use crate::cubes::{delta_unchecked, find_cube_at_delta, Cube, DoublingParams};
use crate::error::{Error, Result};
use crate::measure::DiscreteMeasure;
use crate::scalar::Scalar;

/// Bounded-overlap subfamily of a cube cover, split into pairwise-disjoint families.
#[derive(Debug, Clone, PartialEq)]
pub struct BesicovichCover<T> {
    /// `(caller id, cube)` in selection order.
    pub selected: Vec<(usize, Cube<T>)>,
    /// Indices into `selected`; cubes within one family are pairwise disjoint.
    pub families: Vec<Vec<usize>>,
    pub overlap_achieved: usize,
    /// Proven bound `2^d` for the greedy rule.
    pub overlap_bound: usize,
}

/// Greedy selection by decreasing side (ties by id); a cube is kept iff its center is not yet covered.
pub fn besicovich_cover<T: Scalar>(items: &[(usize, Cube<T>)]) -> Result<BesicovichCover<T>> {
    if items.iter().any(|(_, q)| q.is_point()) {
        return Err(Error::ZeroSideCube);
    }
    let dim = items.first().map_or(1, |(_, q)| q.dim());
    let mut order: Vec<usize> = (0..items.len()).collect();
    order.sort_by(|&a, &b| {
        items[b].1.side.partial_cmp(&items[a].1.side).unwrap().then(items[a].0.cmp(&items[b].0))
    });
    let mut selected: Vec<(usize, Cube<T>)> = Vec::new();
    for &i in &order {
        let (id, q) = &items[i];
        if !selected.iter().any(|(_, s)| s.contains_point(&q.center)) {
            selected.push((*id, q.clone()));
        }
    }
    let families = color_disjoint(selected.iter().map(|(_, q)| q));
    let cubes: Vec<Cube<T>> = selected.iter().map(|(_, q)| q.clone()).collect();
    Ok(BesicovichCover {
        overlap_achieved: max_overlap(&cubes),
        selected,
        families,
        overlap_bound: 1 << dim,
    })
}

/// Greedy coloring of the closed-intersection graph.
fn color_disjoint<'a, T: Scalar>(cubes: impl Iterator<Item = &'a Cube<T>>) -> Vec<Vec<usize>> {
    let cubes: Vec<&Cube<T>> = cubes.collect();
    let mut families: Vec<Vec<usize>> = Vec::new();
    for (i, q) in cubes.iter().enumerate() {
        match families.iter().position(|f| f.iter().all(|&j| !cubes[j].intersects(q))) {
            Some(k) => families[k].push(i),
            None => families.push(vec![i]),
        }
    }
    families
}

/// Exact maximum number of closed cubes sharing a point.
pub fn max_overlap<T: Scalar>(cubes: &[Cube<T>]) -> usize {
    if cubes.is_empty() {
        return 0;
    }
    let all: Vec<usize> = (0..cubes.len()).collect();
    overlap_rec(cubes, 0, &all)
}

// A deepest point can be taken with each coordinate equal to some lower edge.
fn overlap_rec<T: Scalar>(cubes: &[Cube<T>], axis: usize, active: &[usize]) -> usize {
    if axis == cubes[0].dim() || active.len() <= 1 {
        return active.len();
    }
    let mut cands: Vec<T> = active.iter().map(|&i| cubes[i].lo(axis)).collect();
    cands.sort_by(|a, b| a.partial_cmp(b).unwrap());
    cands.dedup();
    let mut best = 0;
    for c in cands {
        let sub: Vec<usize> =
            active.iter().copied().filter(|&i| cubes[i].lo(axis) <= c && c <= cubes[i].hi(axis)).collect();
        if sub.len() > best {
            best = best.max(overlap_rec(cubes, axis + 1, &sub));
        }
    }
    best
}

/// Finite union of axis-parallel boxes, read either as open or as closed sets.
#[derive(Debug, Clone, PartialEq)]
pub struct BoxUnion<T> {
    pub boxes: Vec<(Vec<T>, Vec<T>)>,
    pub closed: bool,
}

impl<T: Scalar> BoxUnion<T> {
    pub fn empty(closed: bool) -> Self {
        Self { boxes: Vec::new(), closed }
    }

    /// Union of cube interiors (`closed = false`) or of the closed cubes.
    pub fn from_cubes<'a>(cubes: impl IntoIterator<Item = &'a Cube<T>>, closed: bool) -> Self {
        let boxes = cubes
            .into_iter()
            .filter(|q| closed || !q.is_point())
            .map(|q| ((0..q.dim()).map(|k| q.lo(k)).collect(), (0..q.dim()).map(|k| q.hi(k)).collect()))
            .collect();
        Self { boxes, closed }
    }

    pub fn is_empty(&self) -> bool {
        self.boxes.is_empty()
    }

    fn in_box(&self, b: &(Vec<T>, Vec<T>), p: &[T]) -> bool {
        if self.closed {
            p.iter().enumerate().all(|(k, &x)| b.0[k] <= x && x <= b.1[k])
        } else {
            p.iter().enumerate().all(|(k, &x)| b.0[k] < x && x < b.1[k])
        }
    }

    pub fn contains(&self, p: &[T]) -> bool {
        self.boxes.iter().any(|b| self.in_box(b, p))
    }

    /// Whether the closed cube `q` meets the union.
    pub fn meets_cube(&self, q: &Cube<T>) -> bool {
        self.boxes.iter().any(|b| self.box_meets(b, q))
    }

    fn box_meets(&self, b: &(Vec<T>, Vec<T>), q: &Cube<T>) -> bool {
        (0..q.dim()).all(|k| {
            if self.closed {
                b.0[k] <= q.hi(k) && q.lo(k) <= b.1[k]
            } else {
                b.0[k] < q.hi(k) && q.lo(k) < b.1[k]
            }
        })
    }

    /// Exact test of `q ⊂ union` by coordinate compression.
    pub fn contains_cube(&self, q: &Cube<T>) -> bool {
        let rel: Vec<&(Vec<T>, Vec<T>)> = self.boxes.iter().filter(|b| self.box_meets(b, q)).collect();
        if rel.is_empty() {
            return false;
        }
        let d = q.dim();
        let mut last = 0usize;
        let mut covered = |p: &[T]| -> bool {
            if self.in_box(rel[last], p) {
                return true;
            }
            match rel.iter().position(|b| self.in_box(b, p)) {
                Some(i) => {
                    last = i;
                    true
                }
                None => false,
            }
        };
        if !covered(&q.center) {
            return false;
        }
        for mask in 0..(1usize << d) {
            let corner: Vec<T> = (0..d).map(|k| if mask >> k & 1 == 1 { q.hi(k) } else { q.lo(k) }).collect();
            if !covered(&corner) {
                return false;
            }
        }
        let reps: Vec<Vec<T>> = (0..d)
            .map(|k| {
                let (lo, hi) = (q.lo(k), q.hi(k));
                let mut br = vec![lo, hi];
                for b in &rel {
                    for e in [b.0[k], b.1[k]] {
                        if e > lo && e < hi {
                            br.push(e);
                        }
                    }
                }
                br.sort_by(|a, b| a.partial_cmp(b).unwrap());
                br.dedup();
                let mut out = br.clone();
                for w in br.windows(2) {
                    out.push((w[0] + w[1]) * T::lit(0.5));
                }
                out
            })
            .collect();
        let mut idx = vec![0usize; d];
        let mut p: Vec<T> = (0..d).map(|k| reps[k][0]).collect();
        loop {
            if !covered(&p) {
                return false;
            }
            let mut k = 0;
            loop {
                if k == d {
                    return true;
                }
                idx[k] += 1;
                if idx[k] < reps[k].len() {
                    p[k] = reps[k][idx[k]];
                    break;
                }
                idx[k] = 0;
                p[k] = reps[k][0];
                k += 1;
            }
        }
    }
}

/// Dyadic cubes with disjoint interiors covering (part of) an open set.
#[derive(Debug, Clone, PartialEq)]
pub struct WhitneyDecomposition<T> {
    pub cubes: Vec<Cube<T>>,
    pub levels: Vec<u32>,
    pub beta: T,
    /// Largest number of `10Q_i` met by a single `10Q_k`.
    pub overlap_bound: usize,
    /// Target points left uncovered because `min_level` was reached.
    pub uncovered: Vec<usize>,
}

/// Dilation with `20Q ⊂ Ω` required for selection.
pub const WHITNEY_INNER: f64 = 20.0;
/// Dilation with `βQ ∩ Ωᶜ ≠ ∅` guaranteed for every selected cube.
pub const WHITNEY_BETA: f64 = 60.0;

/// Dyadic selection in the lattice of `bounding`, levels `0..=min_level`.
///
/// With `targets`, only cubes containing uncovered target points are refined, so the result
/// covers `Ω ∩ targets`; without, every cube meeting `Ω` is refined.
pub fn whitney_decompose<T: Scalar>(
    omega: &BoxUnion<T>,
    bounding: &Cube<T>,
    min_level: u32,
    targets: Option<&[Vec<T>]>,
) -> Result<WhitneyDecomposition<T>> {
    let beta = T::lit(WHITNEY_BETA);
    let mut out = WhitneyDecomposition {
        cubes: Vec::new(),
        levels: Vec::new(),
        beta,
        overlap_bound: 0,
        uncovered: Vec::new(),
    };
    if omega.is_empty() {
        if let Some(t) = targets {
            out.uncovered = (0..t.len()).filter(|&i| omega.contains(&t[i])).collect();
        }
        return Ok(out);
    }
    if omega.contains_cube(&bounding.scale(beta)) {
        return Err(Error::OmegaIsEverything);
    }
    let bounding = &dyadic_snap(bounding);
    let pending: Option<Vec<usize>> =
        targets.map(|t| (0..t.len()).filter(|&i| omega.contains(&t[i])).collect());
    let mut state = Walk { omega, targets, min_level, out: &mut out };
    state.visit(bounding.clone(), 0, pending);
    let tenfold: Vec<Cube<T>> = out.cubes.iter().map(|q| q.scale(T::lit(10.0))).collect();
    out.overlap_bound =
        tenfold.iter().map(|a| tenfold.iter().filter(|b| a.intersects(b)).count()).max().unwrap_or(0);
    if let Some(t) = targets {
        out.uncovered = (0..t.len())
            .filter(|&i| omega.contains(&t[i]) && !out.cubes.iter().any(|q| q.contains_point(&t[i])))
            .collect();
    }
    Ok(out)
}

/// Cube with power-of-two side and edges on its own lattice containing `q`, so that every
/// descendant edge is exactly representable.
fn dyadic_snap<T: Scalar>(q: &Cube<T>) -> Cube<T> {
    let side = if q.side > T::zero() { T::lit(2.0).powf(q.side.log2().ceil()) } else { T::one() };
    let d = q.dim();
    let aligned = (0..d).all(|k| (q.lo(k) / side).fract() == T::zero() && q.side == side);
    if aligned {
        return q.clone();
    }
    let center = (0..d).map(|k| (q.lo(k) / side).floor() * side + side).collect();
    Cube::new(center, side + side)
}

struct Walk<'a, T> {
    omega: &'a BoxUnion<T>,
    targets: Option<&'a [Vec<T>]>,
    min_level: u32,
    out: &'a mut WhitneyDecomposition<T>,
}

impl<T: Scalar> Walk<'_, T> {
    /// Returns the targets of `q` it covered.
    fn visit(&mut self, q: Cube<T>, level: u32, pending: Option<Vec<usize>>) -> Vec<usize> {
        let inside: Option<Vec<usize>> = match (&pending, self.targets) {
            (Some(p), Some(t)) => Some(p.iter().copied().filter(|&i| q.contains_point(&t[i])).collect()),
            _ => None,
        };
        match &inside {
            Some(v) if v.is_empty() => return Vec::new(),
            None if !self.omega.meets_cube(&q) => return Vec::new(),
            _ => {}
        }
        if self.omega.contains_cube(&q.scale(T::lit(WHITNEY_INNER))) {
            self.out.cubes.push(q);
            self.out.levels.push(level);
            return inside.unwrap_or_default();
        }
        if level >= self.min_level {
            return Vec::new();
        }
        let d = q.dim();
        let quarter = q.side * T::lit(0.25);
        let mut remaining = inside;
        let mut covered = Vec::new();
        for mask in 0..(1usize << d) {
            let center: Vec<T> = (0..d)
                .map(|k| if mask >> k & 1 == 1 { q.center[k] + quarter } else { q.center[k] - quarter })
                .collect();
            let child = Cube::new(center, q.side * T::lit(0.5));
            let got = self.visit(child, level + 1, remaining.clone());
            if let Some(r) = remaining.as_mut() {
                r.retain(|i| !got.contains(i));
            }
            covered.extend(got);
        }
        covered
    }
}

/// Volume cube or degenerate point-cube of a generation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CubeKind {
    Volume,
    Point,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GenCube<T> {
    pub cube: Cube<T>,
    pub kind: CubeKind,
    /// Support index of the center.
    pub anchor: usize,
    /// `δ(Q, 2R₀)`.
    pub delta: T,
}

/// Generation `m`: volume cubes at δ-depth `≈ mA` plus residual point-cubes.
#[derive(Debug, Clone, PartialEq)]
pub struct Generation<T> {
    pub m: usize,
    pub r0: Cube<T>,
    pub a: T,
    pub cubes: Vec<GenCube<T>>,
    /// Pairwise-disjoint families of cube indices; point-cubes join the first family.
    pub families: Vec<Vec<usize>>,
    /// Per support point, `(cube index, w_i(y))` with `Σ w_i(y) = 1` on covered points.
    pub weights: Vec<Vec<(usize, T)>>,
    pub overlap: usize,
    /// Max `|δ(Q, 2R₀) − mA|` over volume cubes.
    pub eps1_achieved: T,
    /// Max doubling-ancestor steps used by the volume searches.
    pub max_ancestor_steps: usize,
    /// Points with `δ(x, 2R₀) > mA` whose search failed; they are kept as point-cubes.
    pub unreachable: Vec<usize>,
}

impl<T: Scalar> Generation<T> {
    pub fn volume_indices(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.cubes.len()).filter(|&i| self.cubes[i].kind == CubeKind::Volume)
    }

    pub fn has_volume(&self) -> bool {
        self.cubes.iter().any(|c| c.kind == CubeKind::Volume)
    }

    /// Family index of each cube.
    pub fn family_of(&self) -> Vec<usize> {
        let mut f = vec![0; self.cubes.len()];
        for (p, fam) in self.families.iter().enumerate() {
            for &i in fam {
                f[i] = p;
            }
        }
        f
    }
}

/// `δ({x}, 2R₀)` for every atom.
pub fn point_depths<T: Scalar>(mu: &DiscreteMeasure<T>, r0: &Cube<T>) -> Vec<T> {
    let two = r0.scale(T::lit(2.0));
    (0..mu.len())
        .into_par_iter()
        .map(|i| delta_unchecked(mu, &Cube::point(mu.point(i).to_vec()), &two))
        .collect()
}

pub fn build_generation<T: Scalar>(
    mu: &DiscreteMeasure<T>,
    r0: &Cube<T>,
    m: usize,
    a: T,
    p: &DoublingParams<T>,
) -> Result<Generation<T>> {
    let depths = point_depths(mu, r0);
    build_generation_with_depths(mu, r0, m, a, p, &depths)
}

pub(crate) fn build_generation_with_depths<T: Scalar>(
    mu: &DiscreteMeasure<T>,
    r0: &Cube<T>,
    m: usize,
    a: T,
    p: &DoublingParams<T>,
    depths: &[T],
) -> Result<Generation<T>> {
    mu.check_dim(r0.dim())?;
    if m == 0 || !(a > T::zero()) {
        return Err(Error::InvalidParams("generation needs m >= 1 and A > 0".into()));
    }
    let target = T::of(m) * a;
    let in_r0: Vec<usize> = (0..mu.len()).filter(|&i| r0.contains_point(mu.point(i))).collect();
    let deep: Vec<usize> = in_r0.iter().copied().filter(|&i| depths[i] > target).collect();
    let searches: Vec<(usize, Result<crate::cubes::DeltaSearch<T>>)> =
        deep.par_iter().map(|&i| (i, find_cube_at_delta(mu, i, r0, target, p))).collect();
    let mut items = Vec::new();
    let mut unreachable = Vec::new();
    let mut max_steps = 0;
    for (i, s) in searches {
        match s {
            Ok(s) if !s.cube.is_point() => {
                max_steps = max_steps.max(s.ancestor_steps);
                items.push((i, s.cube));
            }
            Ok(_) | Err(Error::NotReachable) => unreachable.push(i),
            Err(e) => return Err(e),
        }
    }
    let cover = besicovich_cover(&items)?;
    let two_r0 = r0.scale(T::lit(2.0));
    let mut cubes: Vec<GenCube<T>> = cover
        .selected
        .iter()
        .map(|(i, q)| GenCube {
            cube: q.clone(),
            kind: CubeKind::Volume,
            anchor: *i,
            delta: delta_unchecked(mu, q, &two_r0),
        })
        .collect();
    let mut families = cover.families.clone();
    let eps1 = cubes.iter().map(|c| (c.delta - target).abs()).fold(T::zero(), T::max);
    let nvol = cubes.len();
    for &i in &in_r0 {
        let x = mu.point(i);
        if !cubes[..nvol].iter().any(|c| c.cube.contains_point(x)) {
            cubes.push(GenCube { cube: Cube::point(x.to_vec()), kind: CubeKind::Point, anchor: i, delta: depths[i] });
        }
    }
    if cubes.len() > nvol {
        if families.is_empty() {
            families.push(Vec::new());
        }
        families[0].extend(nvol..cubes.len());
    }
    let mut weights = vec![Vec::new(); mu.len()];
    for (y, wy) in weights.iter_mut().enumerate() {
        let pt = mu.point(y);
        let hits: Vec<usize> = (0..nvol).filter(|&i| cubes[i].cube.contains_point(pt)).collect();
        if !hits.is_empty() {
            let w = T::one() / T::of(hits.len());
            *wy = hits.into_iter().map(|i| (i, w)).collect();
        }
    }
    for (i, c) in cubes.iter().enumerate().skip(nvol) {
        weights[c.anchor] = vec![(i, T::one())];
    }
    unreachable.sort_unstable();
    Ok(Generation {
        m,
        r0: r0.clone(),
        a,
        cubes,
        families,
        weights,
        overlap: cover.overlap_achieved,
        eps1_achieved: eps1,
        max_ancestor_steps: max_steps,
        unreachable,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cubes::is_doubling;

    fn c(x: f64, s: f64) -> Cube<f64> {
        Cube::new(vec![x], s)
    }

    #[test]
    fn singleton_cover() {
        let b = besicovich_cover(&[(0, c(0.0, 1.0))]).unwrap();
        assert_eq!(b.selected.len(), 1);
        assert_eq!(b.families.len(), 1);
        assert_eq!(b.overlap_achieved, 1);
    }

    #[test]
    fn three_points_side_three() {
        let items: Vec<_> = (0..3).map(|i| (i, c(i as f64, 3.0))).collect();
        let b = besicovich_cover(&items).unwrap();
        assert_eq!(b.selected.len(), 2);
        assert!(b.overlap_achieved <= 2);
        assert!(besicovich_cover(&[(0, c(0.0, 0.0))]).is_err());
    }

    #[test]
    fn overlap_counts_closed_contacts() {
        assert_eq!(max_overlap(&[c(0.0, 2.0), c(2.0, 2.0), c(4.0, 2.0)]), 2);
        assert_eq!(max_overlap(&[c(0.0, 2.0), c(0.5, 2.0), c(0.2, 0.2)]), 3);
        let sq = |x: f64, y: f64| Cube::new(vec![x, y], 2.0);
        assert_eq!(max_overlap(&[sq(0.0, 0.0), sq(1.5, 0.0), sq(0.0, 1.5), sq(1.5, 1.5)]), 4);
        assert_eq!(max_overlap(&[sq(0.0, 0.0), sq(2.5, 0.0), sq(0.0, 2.5)]), 1);
    }

    #[test]
    fn box_union_containment_is_exact() {
        let u = BoxUnion::from_cubes([&c(0.0, 2.0), &c(1.5, 2.0)], false);
        assert!(u.contains_cube(&c(0.5, 1.0)));
        assert!(!u.contains_cube(&c(0.0, 2.0)));
        assert!(u.contains_cube(&c(1.0, 2.9)));
        let closed = BoxUnion::from_cubes([&c(0.0, 2.0), &c(2.0, 2.0)], true);
        assert!(closed.contains_cube(&c(1.0, 2.0)));
        let open = BoxUnion::from_cubes([&c(0.0, 2.0), &c(2.0, 2.0)], false);
        assert!(!open.contains_cube(&c(1.0, 0.5)));
        let sq = |x: f64, y: f64, s: f64| Cube::new(vec![x, y], s);
        let l = BoxUnion::from_cubes([&sq(0.0, 0.0, 2.0), &sq(2.0, 0.0, 2.0), &sq(0.0, 2.0, 2.0)], true);
        assert!(!l.contains_cube(&sq(1.0, 1.0, 2.0)));
        assert!(l.contains_cube(&sq(0.5, 0.5, 1.0)));
    }

    #[test]
    fn whitney_empty_and_interval() {
        let none = BoxUnion::<f64>::empty(false);
        assert!(whitney_decompose(&none, &c(0.0, 2.0), 8, None).unwrap().cubes.is_empty());
        let omega = BoxUnion::from_cubes([&c(0.0, 2.0)], false);
        let w = whitney_decompose(&omega, &c(0.0, 2.0), 9, None).unwrap();
        assert!(!w.cubes.is_empty());
        for q in &w.cubes {
            assert!(omega.contains_cube(&q.scale(20.0)));
            assert!(!omega.contains_cube(&q.scale(60.0)));
        }
        for i in 0..w.cubes.len() {
            for j in 0..i {
                assert!(w.cubes[i].interiors_disjoint(&w.cubes[j]));
            }
        }
        assert!(w.cubes.iter().any(|q| q.contains_point(&[0.0])));
        let everything = BoxUnion::from_cubes([&c(0.0, 1000.0)], false);
        assert_eq!(whitney_decompose(&everything, &c(0.0, 2.0), 4, None), Err(Error::OmegaIsEverything));
    }

    #[test]
    fn whitney_targets_are_covered() {
        let omega = BoxUnion::from_cubes([&c(0.0, 2.0), &c(3.0, 1.0)], false);
        let targets = vec![vec![0.0], vec![0.9], vec![3.1], vec![10.0]];
        let w = whitney_decompose(&omega, &c(2.0, 8.0), 14, Some(&targets)).unwrap();
        assert!(w.uncovered.is_empty());
        for t in &targets[..3] {
            assert!(w.cubes.iter().any(|q| q.contains_point(t)));
        }
        assert!(!w.cubes.iter().any(|q| q.contains_point(&[10.0])));
    }

    fn grid(n: usize) -> DiscreteMeasure<f64> {
        let pts = (0..n).map(|i| vec![i as f64]).collect();
        DiscreteMeasure::new(1, 1.0, pts, vec![1.0; n]).unwrap()
    }

    #[test]
    fn shallow_generation_is_all_points() {
        let mu = grid(8);
        let r0 = mu.bounding_cube();
        let depths = point_depths(&mu, &r0);
        let top = depths.iter().cloned().fold(0.0, f64::max);
        let g = build_generation(&mu, &r0, 1, top, &DoublingParams::standard(1)).unwrap();
        assert!(!g.has_volume());
        assert_eq!(g.cubes.len(), 8);
        for y in 0..8 {
            assert_eq!(g.weights[y].len(), 1);
        }
    }

    #[test]
    fn deep_generation_covers_deep_points() {
        let mu = grid(32);
        let r0 = mu.bounding_cube();
        let depths = point_depths(&mu, &r0);
        let top = depths.iter().cloned().fold(0.0, f64::max);
        let p = DoublingParams::standard(1);
        let g = build_generation(&mu, &r0, 1, top / 3.0, &p).unwrap();
        assert!(g.has_volume());
        for (y, &d) in depths.iter().enumerate() {
            let s: f64 = g.weights[y].iter().map(|&(_, w)| w).sum();
            assert!((s - 1.0).abs() < 1e-12);
            if d > top / 3.0 && !g.unreachable.contains(&y) {
                assert!(g.volume_indices().any(|i| g.cubes[i].cube.contains_point(mu.point(y))));
            }
        }
        for i in g.volume_indices() {
            assert!(is_doubling(&mu, &g.cubes[i].cube, &p));
        }
        for fam in &g.families {
            for (a, &i) in fam.iter().enumerate() {
                for &j in &fam[..a] {
                    assert!(!g.cubes[i].cube.intersects(&g.cubes[j].cube));
                }
            }
        }
    }
}
