use approx::assert_abs_diff_eq;
use invot_core::measures::{affine_pushforward, discretize, jordan_decompose};
use invot_core::numeric::optimize::bisect;
use invot_core::{Error, LocationScaleFamily, Measure1D};
use statrs::distribution::{ContinuousCDF, Normal};

fn grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
}

#[test]
fn uniform_unit_interval_is_identity() {
    let m = Measure1D::uniform(0.0, 1.0, 201).unwrap();
    for &x in &[0.0, 0.13, 0.5, 0.77, 1.0] {
        assert_abs_diff_eq!(m.cdf_at(x), x, epsilon = 1e-12);
        assert_abs_diff_eq!(m.quantile(x), x, epsilon = 1e-12);
    }
    m.check_invariants().unwrap();
}

#[test]
fn triangular_median_is_zero() {
    let x = grid(-1.0, 1.0, 401);
    let d = x.iter().map(|v| 1.0 - v.abs()).collect();
    let m = Measure1D::from_density(x, d).unwrap();
    assert_abs_diff_eq!(m.quantile(0.5), 0.0, epsilon = 1e-12);
}

#[test]
fn exponential_median_matches_bisection() {
    let x = grid(0.0, 20.0, 4001);
    let d = x.iter().map(|v| (-v).exp()).collect();
    let m = Measure1D::from_density(x, d).unwrap();
    // Oracle: root of the analytic CDF, renormalized to [0, 20].
    let z = 1.0 - (-20.0f64).exp();
    let oracle = bisect(|t| (1.0 - (-t).exp()) / z - 0.5, 0.0, 20.0, 1e-14).unwrap();
    // Closed form of the same root: -ln(1 - z / 2), a hair below ln 2.
    assert_abs_diff_eq!(oracle, -(1.0 - 0.5 * z).ln(), epsilon = 1e-12);
    assert_abs_diff_eq!(m.quantile(0.5), oracle, epsilon = 1e-4);
}

#[test]
fn family_identity_member() {
    let fam = LocationScaleFamily::Normal;
    let m = fam.member(0.0, 1.0).unwrap();
    for &u in &[0.1, 0.5, 0.9] {
        assert_abs_diff_eq!(m.quantile(u), fam.generator_quantile(u), epsilon = 1e-15);
    }
}

#[test]
fn normal_member_quantiles() {
    let m = LocationScaleFamily::Normal.member(1.0, 2.0).unwrap();
    let phi = Normal::new(0.0, 1.0).unwrap();
    assert_abs_diff_eq!(m.quantile(0.5), 1.0, epsilon = 1e-12);
    for &u in &[0.25, 0.75] {
        assert_abs_diff_eq!(m.quantile(u) - 1.0, 2.0 * phi.inverse_cdf(u), epsilon = 1e-9);
    }
}

#[test]
fn nonpositive_scale_rejected() {
    for b in [0.0, -1.0] {
        assert!(matches!(
            LocationScaleFamily::Normal.member(0.0, b),
            Err(Error::NonPositiveScale(_))
        ));
    }
}

#[test]
fn all_zero_density_rejected() {
    let r = Measure1D::from_density(grid(0.0, 1.0, 11), vec![0.0; 11]);
    assert!(matches!(r, Err(Error::AllZeroDensity { .. })));
}

#[test]
fn jordan_of_identical_measures_is_empty() {
    let m = Measure1D::uniform(0.0, 1.0, 101).unwrap();
    let j = jordan_decompose(&m, &m).unwrap();
    assert!(j.plus.iter().chain(&j.minus).all(|&v| v == 0.0));
    assert_eq!(j.common_mass, 1.0);
}

/// Trapezoid mass of `m`'s density sampled on `grid`. A jump at a support
/// edge becomes a half-cell ramp, so this exceeds 1 by about `step * d / 2`.
fn shared_grid_mass(m: &Measure1D, grid: &[f64]) -> f64 {
    grid.windows(2)
        .map(|w| 0.5 * (w[1] - w[0]) * (m.density_at(w[0]) + m.density_at(w[1])))
        .sum()
}

#[test]
fn jordan_of_disjoint_uniforms_keeps_both() {
    let mu = Measure1D::uniform(0.0, 1.0, 101).unwrap();
    let nu = Measure1D::uniform(3.0, 4.0, 101).unwrap();
    let j = jordan_decompose(&mu, &nu).unwrap();
    assert_eq!(j.grid.len(), 401);
    assert_abs_diff_eq!(j.common_mass, 0.0, epsilon = 1e-9);
    let (zm, zn) = (shared_grid_mass(&mu, &j.grid), shared_grid_mass(&nu, &j.grid));
    assert_abs_diff_eq!(zm, 1.005, epsilon = 1e-12);
    for (k, &x) in j.grid.iter().enumerate() {
        assert_abs_diff_eq!(j.plus[k], mu.density_at(x) / zm, epsilon = 1e-9);
        assert_abs_diff_eq!(j.minus[k], nu.density_at(x) / zn, epsilon = 1e-9);
    }
}

#[test]
fn jordan_of_overlapping_uniforms() {
    let mu = Measure1D::uniform(0.0, 2.0, 201).unwrap();
    let nu = Measure1D::uniform(1.0, 3.0, 201).unwrap();
    let j = jordan_decompose(&mu, &nu).unwrap();
    // Oracle: pointwise subtraction of the two indicator densities, up to the
    // edge ramps of the shared-grid resampling (a few tenths of a percent).
    let mut level = None;
    for (k, &x) in j.grid.iter().enumerate() {
        let (p, m) = match x {
            x if x < 0.99 => (0.5, 0.0),
            x if x > 1.01 && x < 1.99 => (0.0, 0.0),
            x if x > 2.01 => (0.0, 0.5),
            _ => continue,
        };
        assert_abs_diff_eq!(j.plus[k], p, epsilon = 5e-3);
        assert_abs_diff_eq!(j.minus[k], m, epsilon = 5e-3);
        if p > 0.0 {
            // Constant on the plateau.
            assert_abs_diff_eq!(j.plus[k], *level.get_or_insert(j.plus[k]), epsilon = 1e-12);
        }
    }
    assert_abs_diff_eq!(j.common_mass, 0.5, epsilon = 1e-2);
}

#[test]
fn discretize_uniform_two_atoms() {
    let m = Measure1D::uniform(0.0, 1.0, 101).unwrap();
    let d = discretize(&m, 2).unwrap();
    assert_abs_diff_eq!(d.atoms()[0], 0.25, epsilon = 1e-12);
    assert_abs_diff_eq!(d.atoms()[1], 0.75, epsilon = 1e-12);
    assert_eq!(d.weights(), &[0.5, 0.5]);
}

#[test]
fn discretize_single_atom_is_median() {
    let m = LocationScaleFamily::Laplace.member(0.3, 1.7).unwrap();
    let d = discretize(&m, 1).unwrap();
    assert_abs_diff_eq!(d.atoms()[0], 0.3, epsilon = 1e-12);
    assert_eq!(d.weights(), &[1.0]);
}

#[test]
fn affine_pushforward_examples() {
    let m = Measure1D::uniform(0.0, 1.0, 101).unwrap();
    let e1 = affine_pushforward(&m, &[1.0, 0.0, 0.0], &[0.0; 3], 4).unwrap();
    let line = discretize(&m, 4).unwrap();
    for i in 0..4 {
        assert_eq!(e1.atom(i), &[line.atoms()[i], 0.0, 0.0]);
    }

    // One atom at x = 1 (median of U[0.5, 1.5]).
    let at_one = Measure1D::uniform(0.5, 1.5, 101).unwrap();
    let s = 0.5f64.sqrt();
    let p = affine_pushforward(&at_one, &[s, s], &[0.0, 1.0], 1).unwrap();
    assert_abs_diff_eq!(p.atom(0)[0], s, epsilon = 1e-12);
    assert_abs_diff_eq!(p.atom(0)[1], 1.0 + s, epsilon = 1e-12);

    assert!(matches!(
        affine_pushforward(&m, &[1.0, 1.0], &[0.0, 0.0], 3),
        Err(Error::NonUnitDirection { .. })
    ));
}
