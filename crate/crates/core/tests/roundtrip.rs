use ballspec::decomposition::{analyze, synthesize, Part, SpectralCoeffs};
use ballspec::eigenbasis::Basis;
use ballspec::fieldgrid::{BallGrid, DEFAULT_NPHI, DEFAULT_NR, DEFAULT_NTHETA};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_coeffs(basis: &Basis, seed: u64) -> SpectralCoeffs {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut c = SpectralCoeffs::zeros(basis);
    c.a.iter_mut().for_each(|x| *x = rng.gen_range(-1.0..1.0));
    c.b.iter_mut().for_each(|x| *x = rng.gen_range(-1.0..1.0));
    c
}

#[test]
fn synthesize_then_analyze_is_identity() {
    let radius = 1.3;
    let basis = Basis::new(radius, 9.0).unwrap();
    let grid = BallGrid::new(radius, DEFAULT_NR, DEFAULT_NTHETA, DEFAULT_NPHI).unwrap();
    let c = random_coeffs(&basis, 7);
    let f = synthesize(&c, &grid, Part::Both).unwrap();
    let back = analyze(&f, &basis).unwrap();
    let worst = c
        .a
        .iter()
        .zip(&back.a)
        .chain(c.b.iter().zip(&back.b))
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max);
    assert!(worst < 1e-10, "max coefficient error {worst}");
}

#[test]
fn parts_are_orthogonal_on_the_grid() {
    let basis = Basis::new(1.0, 8.0).unwrap();
    let grid = BallGrid::new(1.0, DEFAULT_NR, DEFAULT_NTHETA, DEFAULT_NPHI).unwrap();
    let c = random_coeffs(&basis, 11);
    let p = synthesize(&c, &grid, Part::Potential).unwrap();
    let s = synthesize(&c, &grid, Part::Solenoidal).unwrap();
    let cross = p.inner_product(&s).unwrap();
    assert!(cross.abs() < 1e-10 * c.energy(), "{cross}");
    let pe = p.inner_product(&p).unwrap();
    assert!((pe - c.potential_energy()).abs() < 1e-10 * pe);
}

#[test]
fn coefficient_json_round_trips_exactly() {
    let basis = Basis::new(2.0, 7.0).unwrap();
    let c = random_coeffs(&basis, 3);
    let back = SpectralCoeffs::from_json(&c.to_json().unwrap()).unwrap();
    assert_eq!(back.a, c.a);
    assert_eq!(back.b, c.b);
    assert_eq!(back.radius(), 2.0);
}
