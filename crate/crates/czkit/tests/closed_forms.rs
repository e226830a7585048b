//! Values known in closed form, checked against the library.

use approx::assert_relative_eq;
use czkit::corpus;
use czkit::cubes::{delta, Cube};
use czkit::measure::{generate_measure, growth_constant, DiscreteMeasure, Generator};

fn grid(dim: usize, per_axis: usize) -> DiscreteMeasure<f64> {
    generate_measure(&Generator::Grid { dim, per_axis }, 0).unwrap()
}

#[test]
fn lattice_growth_is_attained_by_the_side_two_cube() {
    // An interior cube of side 2 holds 3^dim unit atoms.
    assert_relative_eq!(growth_constant(&grid(1, 32)).unwrap().cube_constant, 1.5, max_relative = 1e-15);
    assert_relative_eq!(growth_constant(&grid(2, 8)).unwrap().cube_constant, 2.25, max_relative = 1e-15);
}

#[test]
fn cantor_growth_is_at_least_the_closest_pair() {
    // A cube centered at one atom of the closest pair with the other on its boundary holds both.
    let mu: DiscreteMeasure<f64> = corpus::corpus().unwrap().into_iter().find(|i| i.id == "cantor1d_d5").unwrap().measure;
    let pts = mu.points();
    let closest = pts.windows(2).map(|w| (w[1][0] - w[0][0]).abs()).fold(f64::INFINITY, f64::min);
    let pair = 2.0 * mu.weight(0) / (2.0 * closest).powf(mu.growth_exponent());
    assert!(growth_constant(&mu).unwrap().cube_constant >= pair * (1.0 - 1e-12));
}

#[test]
fn delta_of_lattice_annulus_is_a_harmonic_sum() {
    // Atoms at distance 1..=k from the origin, weight 1, exponent 1: two per distance.
    let mu = grid(1, 41).translated(&[-20.0]);
    for k in [1usize, 3, 7] {
        let q = Cube::point(vec![0.0]);
        let r = Cube::new(vec![0.0], 2.0 * k as f64);
        let expected: f64 = (1..=k).map(|j| 2.0 / j as f64).sum();
        assert_relative_eq!(delta(&mu, &q, &r).unwrap(), expected, max_relative = 1e-14);
    }
}
