//! Finitely supported measures, growth constants and test-corpus generators.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::cubes::Cube;
use crate::error::{Error, Result};
use crate::scalar::{dist2, dist_inf, Scalar};

/// Weighted point cloud in `R^d` together with its growth exponent `n`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteMeasure<T> {
    dim: usize,
    n: T,
    points: Vec<Vec<T>>,
    weights: Vec<T>,
}

impl<T: Scalar> DiscreteMeasure<T> {
    /// Validates every invariant: positive finite weights, distinct finite points,
    /// `dim >= 1` and `0 < n <= dim`.
    pub fn new(dim: usize, n: T, points: Vec<Vec<T>>, weights: Vec<T>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidMeasure("dimension must be at least 1".into()));
        }
        if !(n > T::zero()) || n > T::of(dim) || !n.is_finite() {
            return Err(Error::InvalidMeasure(format!("growth exponent {n} outside (0, {dim}]")));
        }
        if points.len() != weights.len() {
            return Err(Error::InvalidMeasure(format!(
                "{} points but {} weights",
                points.len(),
                weights.len()
            )));
        }
        for (i, p) in points.iter().enumerate() {
            if p.len() != dim {
                return Err(Error::DimensionMismatch { expected: dim, got: p.len() });
            }
            if p.iter().any(|c| !c.is_finite()) {
                return Err(Error::InvalidMeasure(format!("point {i} is not finite")));
            }
        }
        for (i, w) in weights.iter().enumerate() {
            if !w.is_finite() || !(*w > T::zero()) {
                return Err(Error::InvalidMeasure(format!("weight {i} is not a positive finite number")));
            }
        }
        let mut order: Vec<usize> = (0..points.len()).collect();
        order.sort_by(|&a, &b| lex_cmp(&points[a], &points[b]));
        for pair in order.windows(2) {
            if points[pair[0]] == points[pair[1]] {
                return Err(Error::InvalidMeasure(format!(
                    "duplicate points at indices {} and {}",
                    pair[0], pair[1]
                )));
            }
        }
        Ok(Self { dim, n, points, weights })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn growth_exponent(&self) -> T {
        self.n
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[Vec<T>] {
        &self.points
    }

    pub fn point(&self, i: usize) -> &[T] {
        &self.points[i]
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    pub fn weight(&self, i: usize) -> T {
        self.weights[i]
    }

    pub fn total_mass(&self) -> T {
        self.weights.iter().copied().sum()
    }

    /// Index of the atom located exactly at `p`.
    pub fn index_of(&self, p: &[T]) -> Option<usize> {
        self.points.iter().position(|q| q.as_slice() == p)
    }

    /// `μ(Q)` for the closed cube `Q`.
    pub fn mass_cube(&self, q: &Cube<T>) -> Result<T> {
        self.check_dim(q.dim())?;
        Ok(self.mass_cube_unchecked(q))
    }

    pub(crate) fn mass_cube_unchecked(&self, q: &Cube<T>) -> T {
        self.points
            .iter()
            .zip(&self.weights)
            .filter(|(p, _)| q.contains_point(p))
            .map(|(_, &w)| w)
            .sum()
    }

    /// Indices of atoms inside the closed cube `Q`.
    pub fn atoms_in(&self, q: &Cube<T>) -> Vec<usize> {
        (0..self.len()).filter(|&i| q.contains_point(&self.points[i])).collect()
    }

    pub(crate) fn check_dim(&self, d: usize) -> Result<()> {
        if d != self.dim {
            Err(Error::DimensionMismatch { expected: self.dim, got: d })
        } else {
            Ok(())
        }
    }

    /// Smallest cube containing the support, centered at the middle of its bounding box.
    pub fn bounding_cube(&self) -> Cube<T> {
        let mut lo = vec![T::infinity(); self.dim];
        let mut hi = vec![T::neg_infinity(); self.dim];
        for p in &self.points {
            for k in 0..self.dim {
                lo[k] = lo[k].min(p[k]);
                hi[k] = hi[k].max(p[k]);
            }
        }
        let half = T::lit(0.5);
        let center: Vec<T> = lo.iter().zip(&hi).map(|(&a, &b)| (a + b) * half).collect();
        let side = lo.iter().zip(&hi).map(|(&a, &b)| b - a).fold(T::zero(), T::max);
        Cube::new(center, side)
    }

    /// Same measure with every point shifted by `v`.
    pub fn translated(&self, v: &[T]) -> Self {
        let points = self
            .points
            .iter()
            .map(|p| p.iter().zip(v).map(|(&a, &b)| a + b).collect())
            .collect();
        Self { points, ..self.clone() }
    }

    /// Same support with weights multiplied by `c > 0`.
    pub fn scaled_weights(&self, c: T) -> Self {
        Self { weights: self.weights.iter().map(|&w| w * c).collect(), ..self.clone() }
    }

    /// Converts to another scalar type.
    pub fn cast<U: Scalar>(&self) -> DiscreteMeasure<U> {
        let cv = |x: T| U::lit(x.as_f64());
        DiscreteMeasure {
            dim: self.dim,
            n: cv(self.n),
            points: self.points.iter().map(|p| p.iter().map(|&x| cv(x)).collect()).collect(),
            weights: self.weights.iter().map(|&w| cv(w)).collect(),
        }
    }
}

fn lex_cmp<T: Scalar>(a: &[T], b: &[T]) -> std::cmp::Ordering {
    for (x, y) in a.iter().zip(b) {
        match x.partial_cmp(y) {
            Some(std::cmp::Ordering::Equal) | None => continue,
            Some(o) => return o,
        }
    }
    std::cmp::Ordering::Equal
}

/// Center atom and radius (or side) where a growth ratio is attained.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Witness<T> {
    pub center: usize,
    pub scale: T,
}

/// Minimal growth constants over closed balls and closed cubes centered on the support.
#[derive(Debug, Clone, PartialEq)]
pub struct GrowthReport<T> {
    pub ball_constant: T,
    pub cube_constant: T,
    pub ball_witness: Witness<T>,
    pub cube_witness: Witness<T>,
    /// Set for single-atom measures, where both constants are the atom weight at scale 1.
    pub degenerate: bool,
}

/// Growth constants via the critical-radius enumeration.
pub fn growth_constant<T: Scalar>(mu: &DiscreteMeasure<T>) -> Result<GrowthReport<T>> {
    if mu.is_empty() {
        return Err(Error::EmptyMeasure);
    }
    if mu.len() == 1 {
        let w = mu.weight(0);
        let wit = Witness { center: 0, scale: T::one() };
        return Ok(GrowthReport {
            ball_constant: w,
            cube_constant: w,
            ball_witness: wit,
            cube_witness: wit,
            degenerate: true,
        });
    }
    let n = mu.growth_exponent();
    let mut ball = (T::zero(), Witness { center: 0, scale: T::one() });
    let mut cube = ball;
    for i in 0..mu.len() {
        let x = mu.point(i);
        for (euclid, best, factor) in [(true, &mut ball, T::one()), (false, &mut cube, T::lit(2.0))] {
            let mut rows: Vec<(T, T)> = (0..mu.len())
                .map(|j| {
                    let d = if euclid { dist2(x, mu.point(j)) } else { dist_inf(x, mu.point(j)) };
                    (d, mu.weight(j))
                })
                .collect();
            rows.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
            let mut acc = T::zero();
            let mut k = 0;
            while k < rows.len() {
                let r = rows[k].0;
                while k < rows.len() && rows[k].0 == r {
                    acc = acc + rows[k].1;
                    k += 1;
                }
                if r > T::zero() {
                    let scale = factor * r;
                    let ratio = acc / scale.powf(n);
                    if ratio > best.0 {
                        *best = (ratio, Witness { center: i, scale });
                    }
                }
            }
        }
    }
    Ok(GrowthReport {
        ball_constant: ball.0,
        cube_constant: cube.0,
        ball_witness: ball.1,
        cube_witness: cube.1,
        degenerate: false,
    })
}

/// Settings for [`generate_measure`].
#[derive(Debug, Clone, PartialEq)]
pub enum Generator {
    /// `per_axis^dim` unit atoms on the integer lattice `{0, .., per_axis-1}^dim`, with `n = dim`.
    Grid { dim: usize, per_axis: usize },
    /// Product Cantor set of the given depth and contraction ratio; atom weights `ratio^(depth*n)`.
    Cantor { dim: usize, depth: usize, ratio: f64, n: f64 },
    /// `clusters` groups of `per_cluster` atoms; group `j` has radius `spread^(j+1)` and mass `radius^n`.
    Clustered { dim: usize, clusters: usize, per_cluster: usize, spread: f64, n: f64 },
}

/// Deterministic corpus generator.
pub fn generate_measure<T: Scalar>(kind: &Generator, seed: u64) -> Result<DiscreteMeasure<T>> {
    let bad = |s: &str| Err(Error::InvalidParams(s.to_string()));
    match *kind {
        Generator::Grid { dim, per_axis } => {
            if dim == 0 || per_axis == 0 {
                return bad("grid needs dim >= 1 and per_axis >= 1");
            }
            let total = per_axis.pow(dim as u32);
            let points = (0..total)
                .map(|mut idx| {
                    let mut p = vec![T::zero(); dim];
                    for c in p.iter_mut() {
                        *c = T::of(idx % per_axis);
                        idx /= per_axis;
                    }
                    p
                })
                .collect();
            DiscreteMeasure::new(dim, T::of(dim), points, vec![T::one(); total])
        }
        Generator::Cantor { dim, depth, ratio, n } => {
            if dim == 0 || !(ratio > 0.0 && ratio < 0.5) || !(n > 0.0 && n <= dim as f64) {
                return bad("cantor needs dim >= 1, ratio in (0, 1/2) and n in (0, dim]");
            }
            let mut axis = vec![0.0_f64];
            for level in 0..depth {
                let step = (1.0 - ratio) * ratio.powi(level as i32);
                axis = axis.iter().flat_map(|&a| [a, a + step]).collect();
            }
            let per_axis = axis.len();
            let total = per_axis.pow(dim as u32);
            let points = (0..total)
                .map(|mut idx| {
                    let mut p = vec![T::zero(); dim];
                    for c in p.iter_mut() {
                        *c = T::lit(axis[idx % per_axis]);
                        idx /= per_axis;
                    }
                    p
                })
                .collect();
            let w = T::lit(ratio.powf(depth as f64 * n));
            DiscreteMeasure::new(dim, T::lit(n), points, vec![w; total])
        }
        Generator::Clustered { dim, clusters, per_cluster, spread, n } => {
            if dim == 0 || clusters == 0 || per_cluster == 0 || !(spread > 0.0 && spread < 1.0) {
                return bad("clustered needs positive counts and spread in (0, 1)");
            }
            if !(n > 0.0 && n <= dim as f64) {
                return bad("clustered needs n in (0, dim]");
            }
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut points: Vec<Vec<T>> = Vec::with_capacity(clusters * per_cluster);
            let mut weights = Vec::with_capacity(clusters * per_cluster);
            for j in 0..clusters {
                let center: Vec<f64> = (0..dim).map(|_| rng.gen_range(0.0..1.0)).collect();
                let radius = spread.powi(j as i32 + 1);
                let w = radius.powf(n) / per_cluster as f64;
                let mut made = 0;
                while made < per_cluster {
                    let p: Vec<T> =
                        center.iter().map(|&c| T::lit(c + radius * rng.gen_range(-1.0..1.0))).collect();
                    if points.contains(&p) {
                        continue;
                    }
                    points.push(p);
                    weights.push(T::lit(w));
                    made += 1;
                }
            }
            DiscreteMeasure::new(dim, T::lit(n), points, weights)
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

    #[test]
    fn rejects_bad_inputs() {
        assert!(DiscreteMeasure::new(1, 1.0, vec![vec![0.0]], vec![0.0]).is_err());
        assert!(DiscreteMeasure::new(1, 1.0, vec![vec![0.0], vec![0.0]], vec![1.0, 1.0]).is_err());
        assert!(DiscreteMeasure::new(1, 2.0, vec![vec![0.0]], vec![1.0]).is_err());
        assert!(DiscreteMeasure::new(1, 1.0, vec![vec![f64::NAN]], vec![1.0]).is_err());
        assert!(DiscreteMeasure::new(2, 1.0, vec![vec![0.0]], vec![1.0]).is_err());
    }

    #[test]
    fn four_unit_atoms_have_ball_constant_three() {
        let g = growth_constant(&line(&[1.0; 4])).unwrap();
        assert_eq!(g.ball_constant, 3.0);
        assert_eq!(g.ball_witness.scale, 1.0);
        assert!(!g.degenerate);
    }

    #[test]
    fn single_atom_is_degenerate() {
        let g = growth_constant(&line(&[1.0])).unwrap();
        assert!(g.degenerate);
        assert_eq!(g.ball_constant, 1.0);
    }

    #[test]
    fn empty_measure_has_no_growth_constant() {
        let mu = DiscreteMeasure::<f64>::new(1, 1.0, vec![], vec![]).unwrap();
        assert_eq!(growth_constant(&mu), Err(Error::EmptyMeasure));
    }

    #[test]
    fn closed_cube_mass() {
        let mu = line(&[1.0, 1.0]);
        assert_eq!(mu.mass_cube(&Cube::new(vec![0.0], 1.0)).unwrap(), 1.0);
        assert_eq!(mu.mass_cube(&Cube::new(vec![0.0], 2.0)).unwrap(), 2.0);
        assert_eq!(mu.mass_cube(&Cube::point(vec![0.5])).unwrap(), 0.0);
        assert_eq!(mu.mass_cube(&Cube::point(vec![1.0])).unwrap(), 1.0);
        assert!(mu.mass_cube(&Cube::new(vec![0.0, 0.0], 1.0)).is_err());
    }

    #[test]
    fn grid_generator_matches_lattice() {
        let mu: DiscreteMeasure<f64> = generate_measure(&Generator::Grid { dim: 1, per_axis: 4 }, 0).unwrap();
        assert_eq!(mu.points(), &[vec![0.0], vec![1.0], vec![2.0], vec![3.0]]);
        assert_eq!(mu.weights(), &[1.0; 4]);
    }

    #[test]
    fn clustered_generator_is_deterministic() {
        let g = Generator::Clustered { dim: 2, clusters: 3, per_cluster: 5, spread: 0.3, n: 1.0 };
        let a: DiscreteMeasure<f64> = generate_measure(&g, 11).unwrap();
        let b: DiscreteMeasure<f64> = generate_measure(&g, 11).unwrap();
        let c: DiscreteMeasure<f64> = generate_measure(&g, 12).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn cantor_depth_five_growth_near_unit_normalization() {
        let n = 2f64.ln() / 3f64.ln();
        let mu: DiscreteMeasure<f64> =
            generate_measure(&Generator::Cantor { dim: 1, depth: 5, ratio: 1.0 / 3.0, n }, 0).unwrap();
        assert_eq!(mu.len(), 32);
        assert!((mu.total_mass() - 1.0).abs() < 1e-12);
        // μ(B(0,1)) / 1^n = 1 is the reference value of the limiting measure.
        let g = growth_constant(&mu).unwrap();
        assert!(g.ball_constant.is_finite());
        assert!(g.ball_constant >= 0.25 && g.ball_constant <= 4.0, "{}", g.ball_constant);
    }

    #[test]
    fn weight_scaling_scales_constants() {
        let mu = line(&[1.0, 3.0, 2.0]);
        let a = growth_constant(&mu).unwrap();
        let b = growth_constant(&mu.scaled_weights(2.5)).unwrap();
        assert!((b.ball_constant - 2.5 * a.ball_constant).abs() < 1e-12);
        assert!((b.cube_constant - 2.5 * a.cube_constant).abs() < 1e-12);
    }
}
