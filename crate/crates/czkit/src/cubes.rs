//! Closed axis-parallel cubes, the δ coefficient and doubling-cube searches.

use crate::error::{Error, Result};
use crate::measure::DiscreteMeasure;
use crate::scalar::{dist2, dist_inf, Scalar};

/// Closed cube `{y : ‖y − center‖∞ ≤ side/2}`. Side 0 is the point-cube `{center}`.
#[derive(Debug, Clone, PartialEq)]
pub struct Cube<T> {
    pub center: Vec<T>,
    pub side: T,
}

impl<T: Scalar> Cube<T> {
    pub fn new(center: Vec<T>, side: T) -> Self {
        assert!(side >= T::zero(), "cube side must be nonnegative");
        Self { center, side }
    }

    pub fn point(center: Vec<T>) -> Self {
        Self { center, side: T::zero() }
    }

    pub fn dim(&self) -> usize {
        self.center.len()
    }

    pub fn is_point(&self) -> bool {
        self.side == T::zero()
    }

    pub fn half(&self) -> T {
        self.side * T::lit(0.5)
    }

    pub fn lo(&self, k: usize) -> T {
        self.center[k] - self.half()
    }

    pub fn hi(&self, k: usize) -> T {
        self.center[k] + self.half()
    }

    /// Closed membership, measured from the center so it agrees with `dist_inf`.
    pub fn contains_point(&self, p: &[T]) -> bool {
        let h = self.half();
        self.center.iter().zip(p).all(|(&c, &x)| (x - c).abs() <= h)
    }

    /// Closed containment `other ⊂ self`.
    pub fn contains_cube(&self, other: &Cube<T>) -> bool {
        (0..self.dim()).all(|k| other.lo(k) >= self.lo(k) && other.hi(k) <= self.hi(k))
    }

    /// Closed intersection.
    pub fn intersects(&self, other: &Cube<T>) -> bool {
        (0..self.dim()).all(|k| other.lo(k) <= self.hi(k) && self.lo(k) <= other.hi(k))
    }

    /// True when the interiors are disjoint (always for a point-cube).
    pub fn interiors_disjoint(&self, other: &Cube<T>) -> bool {
        self.is_point()
            || other.is_point()
            || (0..self.dim()).any(|k| other.lo(k) >= self.hi(k) || self.lo(k) >= other.hi(k))
    }

    pub fn is_concentric(&self, other: &Cube<T>) -> bool {
        self.center == other.center
    }

    /// `ρQ`.
    pub fn scale(&self, rho: T) -> Cube<T> {
        Cube { center: self.center.clone(), side: self.side * rho }
    }

    /// Smallest cube concentric with `self` containing `self` and `r`.
    pub fn concentric_hull(&self, r: &Cube<T>) -> Cube<T> {
        let h = self.hull_half(r);
        Cube { center: self.center.clone(), side: h + h }
    }

    /// Half-side of [`Cube::concentric_hull`], computed without the rounding of `center ± half`.
    pub fn hull_half(&self, r: &Cube<T>) -> T {
        if self.is_concentric(r) {
            return self.half().max(r.half());
        }
        let mut reach = self.half();
        for k in 0..self.dim() {
            reach = reach.max((r.lo(k) - self.center[k]).abs()).max((r.hi(k) - self.center[k]).abs());
        }
        reach
    }

    pub fn cast<U: Scalar>(&self) -> Cube<U> {
        Cube {
            center: self.center.iter().map(|&x| U::lit(x.as_f64())).collect(),
            side: U::lit(self.side.as_f64()),
        }
    }
}

fn check_same_dim<T: Scalar>(mu: &DiscreteMeasure<T>, cubes: &[&Cube<T>]) -> Result<()> {
    for q in cubes {
        mu.check_dim(q.dim())?;
    }
    Ok(())
}

/// `Σ_{y ∈ Q_R \ Q} w_y / ‖y − z_Q‖₂^n`.
fn one_sided<T: Scalar>(mu: &DiscreteMeasure<T>, q: &Cube<T>, r: &Cube<T>) -> T {
    let reach = q.hull_half(r);
    let n = mu.growth_exponent();
    let mut s = T::zero();
    for (y, &w) in mu.points().iter().zip(mu.weights()) {
        if dist_inf(y, &q.center) <= reach && !q.contains_point(y) {
            s = s + w / dist2(y, &q.center).powf(n);
        }
    }
    s
}

/// Symmetrized δ(Q, R).
pub fn delta<T: Scalar>(mu: &DiscreteMeasure<T>, q: &Cube<T>, r: &Cube<T>) -> Result<T> {
    check_same_dim(mu, &[q, r])?;
    Ok(delta_unchecked(mu, q, r))
}

pub(crate) fn delta_unchecked<T: Scalar>(mu: &DiscreteMeasure<T>, q: &Cube<T>, r: &Cube<T>) -> T {
    one_sided(mu, q, r).max(one_sided(mu, r, q))
}

/// `K_{Q,R} = 1 + δ(Q,R)` for `Q ⊂ R`.
pub fn k_coeff<T: Scalar>(mu: &DiscreteMeasure<T>, q: &Cube<T>, r: &Cube<T>) -> Result<T> {
    check_same_dim(mu, &[q, r])?;
    if !r.contains_cube(q) {
        return Err(Error::NotNested);
    }
    Ok(T::one() + delta_unchecked(mu, q, r))
}

/// `(α, β)` for the doubling test `μ(αQ) ≤ β μ(Q)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DoublingParams<T> {
    pub alpha: T,
    pub beta: T,
}

impl<T: Scalar> DoublingParams<T> {
    pub fn new(alpha: T, beta: T, n: T) -> Result<Self> {
        if !(alpha > T::one()) || !(beta > alpha.powf(n)) {
            return Err(Error::InvalidParams(format!("need alpha > 1 and beta > alpha^n, got ({alpha}, {beta})")));
        }
        Ok(Self { alpha, beta })
    }

    /// `(2, 2^{d+1})`.
    pub fn standard(dim: usize) -> Self {
        Self { alpha: T::lit(2.0), beta: T::lit(2f64.powi(dim as i32 + 1)) }
    }
}

pub fn is_doubling<T: Scalar>(mu: &DiscreteMeasure<T>, q: &Cube<T>, p: &DoublingParams<T>) -> bool {
    if q.is_point() {
        return true;
    }
    mu.mass_cube_unchecked(&q.scale(p.alpha)) <= p.beta * mu.mass_cube_unchecked(q)
}

/// Smallest doubling `2^k Q`, `k ≥ 0`, with the number of steps `k`.
pub fn smallest_doubling_ancestor<T: Scalar>(
    mu: &DiscreteMeasure<T>,
    q: &Cube<T>,
    p: &DoublingParams<T>,
) -> (Cube<T>, usize) {
    let total = mu.total_mass();
    let mut cur = q.clone();
    let mut k = 0;
    loop {
        if is_doubling(mu, &cur, p) {
            return (cur, k);
        }
        let m = mu.mass_cube_unchecked(&cur);
        // Once a cube holds all the mass it is doubling; the guard covers float overflow.
        if m >= total || !cur.side.is_finite() {
            return (cur, k);
        }
        cur = cur.scale(T::lit(2.0));
        k += 1;
    }
}

/// Outcome of [`find_cube_at_delta`].
#[derive(Debug, Clone, PartialEq)]
pub struct DeltaSearch<T> {
    /// The doubling cube `Q`.
    pub cube: Cube<T>,
    /// The dyadic cube `Q₁` before taking its doubling ancestor.
    pub dyadic: Cube<T>,
    pub dyadic_level: u32,
    pub ancestor_steps: usize,
    /// `δ(Q, 2R₀)`.
    pub delta: T,
    /// `|δ(Q, 2R₀) − α|`.
    pub eps1_achieved: T,
}

impl<T: Scalar> DeltaSearch<T> {
    /// `cube_constant · 4^n · (1 + k)` bounding `δ(Q₁, Q)`.
    pub fn c3_bound(&self, cube_constant: T, n: T) -> T {
        cube_constant * T::lit(4.0).powf(n) * T::of(1 + self.ancestor_steps)
    }
}

/// Deepest-level cap for the dyadic scan.
const MAX_DYADIC_LEVEL: u32 = 120;

/// Doubling cube centered at atom `x`, inside `2R₀`, with `δ(Q, 2R₀)` close to `alpha`.
///
/// Scans `Q₁ = 2^{-k} ℓ(R₀)` for `k = 1, 2, ..` until `δ(Q₁, 2R₀) ≥ alpha`, then takes the
/// smallest doubling ancestor. Returns `NotReachable` when `δ(x, 2R₀) ≤ alpha` or when the
/// ancestor leaves `2R₀`.
pub fn find_cube_at_delta<T: Scalar>(
    mu: &DiscreteMeasure<T>,
    x: usize,
    r0: &Cube<T>,
    alpha: T,
    p: &DoublingParams<T>,
) -> Result<DeltaSearch<T>> {
    if x >= mu.len() {
        return Err(Error::NotInSupport);
    }
    mu.check_dim(r0.dim())?;
    if !(alpha > T::zero()) {
        return Err(Error::InvalidParams("delta target must be positive".into()));
    }
    let xp = mu.point(x).to_vec();
    if !r0.contains_point(&xp) {
        return Err(Error::NotInSupport);
    }
    let two_r0 = r0.scale(T::lit(2.0));
    if delta_unchecked(mu, &Cube::point(xp.clone()), &two_r0) <= alpha {
        return Err(Error::NotReachable);
    }
    let mut side = r0.side;
    let mut level = 0;
    let dyadic = loop {
        level += 1;
        side = side * T::lit(0.5);
        let q1 = Cube::new(xp.clone(), side);
        if delta_unchecked(mu, &q1, &two_r0) >= alpha {
            break q1;
        }
        if level >= MAX_DYADIC_LEVEL || side == T::zero() {
            return Err(Error::NotReachable);
        }
    };
    let (cube, steps) = smallest_doubling_ancestor(mu, &dyadic, p);
    if !two_r0.contains_cube(&cube) {
        return Err(Error::NotReachable);
    }
    let d = delta_unchecked(mu, &cube, &two_r0);
    Ok(DeltaSearch {
        cube,
        dyadic,
        dyadic_level: level,
        ancestor_steps: steps,
        delta: d,
        eps1_achieved: (d - alpha).abs(),
    })
}

/// `|δ(P,R) − δ(P,Q) − δ(Q,R)|` for `P ⊂ Q ⊂ R`.
pub fn additivity_defect<T: Scalar>(mu: &DiscreteMeasure<T>, p: &Cube<T>, q: &Cube<T>, r: &Cube<T>) -> T {
    (delta_unchecked(mu, p, r) - delta_unchecked(mu, p, q) - delta_unchecked(mu, q, r)).abs()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line(ws: &[f64]) -> DiscreteMeasure<f64> {
        let pts = (0..ws.len()).map(|i| vec![i as f64]).collect();
        DiscreteMeasure::new(1, 1.0, pts, ws.to_vec()).unwrap()
    }

    fn c(x: f64, s: f64) -> Cube<f64> {
        Cube::new(vec![x], s)
    }

    #[test]
    fn scale_identities() {
        let q = c(0.3, 1.7);
        assert_eq!(q.scale(1.0), q);
        assert_eq!(q.scale(2.0).scale(0.5), q);
        assert_eq!(Cube::point(vec![1.0]).scale(7.0), Cube::point(vec![1.0]));
    }

    #[test]
    fn hull_by_corners() {
        let h = c(0.0, 0.5).concentric_hull(&c(1.0, 0.5));
        assert_eq!(h, c(0.0, 2.5));
        assert_eq!(c(0.0, 1.0).concentric_hull(&c(0.0, 3.0)), c(0.0, 3.0));
    }

    #[test]
    fn delta_two_atoms() {
        let mu = line(&[1.0, 1.0]);
        let q = c(0.0, 0.5);
        let r = c(0.0, 4.0);
        assert_eq!(delta(&mu, &q, &r).unwrap(), 1.0);
        assert_eq!(delta(&mu, &r, &q).unwrap(), 1.0);
        assert_eq!(k_coeff(&mu, &q, &r).unwrap(), 2.0);
        assert_eq!(k_coeff(&mu, &r, &r).unwrap(), 1.0);
        assert_eq!(k_coeff(&mu, &r, &q), Err(Error::NotNested));
    }

    #[test]
    fn delta_single_atom_vanishes() {
        let mu = line(&[1.0]);
        let q = c(0.0, 1.0);
        assert_eq!(delta(&mu, &q, &q.scale(3.0)).unwrap(), 0.0);
        assert_eq!(delta(&mu, &Cube::point(vec![0.0]), &q).unwrap(), 0.0);
    }

    #[test]
    fn doubling_examples() {
        let mu = line(&[1.0, 1.0]);
        let p = DoublingParams::standard(1);
        assert!(is_doubling(&mu, &c(0.0, 1.0), &p));
        assert!(is_doubling(&mu, &Cube::point(vec![0.0]), &p));
        let heavy = line(&[1.0, 100.0]);
        let (q, k) = smallest_doubling_ancestor(&heavy, &c(0.0, 0.5), &p);
        assert_eq!((q, k), (c(0.0, 0.5), 0));
        let (q, k) = smallest_doubling_ancestor(&heavy, &c(0.0, 1.0), &p);
        assert_eq!(k, 1);
        assert_eq!(q, c(0.0, 2.0));
    }

    #[test]
    fn doubling_params_validation() {
        assert!(DoublingParams::new(2.0, 4.0, 1.0).is_ok());
        assert!(DoublingParams::new(2.0, 2.0, 1.0).is_err());
        assert!(DoublingParams::new(1.0, 4.0, 1.0).is_err());
    }

    #[test]
    fn search_reports_unreachable_targets() {
        let mu = line(&[1.0; 8]);
        let r0 = mu.bounding_cube();
        let d0 = delta(&mu, &Cube::point(vec![0.0]), &r0.scale(2.0)).unwrap();
        let p = DoublingParams::standard(1);
        assert_eq!(find_cube_at_delta(&mu, 0, &r0, d0, &p), Err(Error::NotReachable));
        let s = find_cube_at_delta(&mu, 0, &r0, d0 / 2.0, &p).unwrap();
        assert!(is_doubling(&mu, &s.cube, &p));
        assert!(r0.scale(2.0).contains_cube(&s.cube));
        assert_eq!(s.cube.center, vec![0.0]);
    }

    #[test]
    fn concentric_additivity_on_grid() {
        let mu = line(&[1.0, 2.0, 0.5, 1.0, 3.0]);
        let (p, q, r) = (c(2.0, 0.5), c(2.0, 2.5), c(2.0, 9.0));
        assert!(additivity_defect(&mu, &p, &q, &r) < 1e-12);
    }
}
