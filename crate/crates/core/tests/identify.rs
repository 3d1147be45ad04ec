use approx::assert_abs_diff_eq;
use invot_core::forward::{ot_cost_quantile, ot_lp};
use invot_core::identify::{
    affine_reduction_check, default_lattice, first_variation_check, plans_only_nonidentifiability,
    values_equal_on_family, DENSE_SUBSET_NOTE,
};
use invot_core::measures::affine_pushforward;
use invot_core::{CostSpec, GridFunction, LocationScaleFamily, Measure1D};

fn power(p: f64) -> CostSpec {
    CostSpec::convex_power(p).unwrap()
}

fn grid_3x2() -> Vec<(f64, f64)> {
    [-1.0, 0.0, 1.0]
        .iter()
        .flat_map(|&a| [1.5, 2.0].into_iter().map(move |b| (a, b)))
        .collect()
}

#[test]
fn default_lattice_shape() {
    let l = default_lattice();
    assert_eq!(l.len(), 81);
    assert_eq!(l[0], (-2.0, 1.1));
    assert_eq!(l[80], (2.0, 3.0));
    // a-major: b varies fastest.
    assert_eq!(l[1].0, -2.0);
}

#[test]
fn identical_costs_are_indistinguishable() {
    let r = values_equal_on_family(&power(3.0), &power(3.0), &LocationScaleFamily::Normal, &grid_3x2(), 1e-8).unwrap();
    assert!(!r.distinguishable);
    assert!(r.max_value_gap <= 1e-10);
    assert_eq!(r.witness, None);
    assert!(r.notes.iter().any(|n| n == DENSE_SUBSET_NOTE));
}

#[test]
fn square_and_quartic_differ() {
    let fam = LocationScaleFamily::Normal;
    let r = values_equal_on_family(&power(2.0), &power(4.0), &fam, &grid_3x2(), 1e-8).unwrap();
    assert!(r.distinguishable);
    assert!(r.witness.is_some());
    // Gaussian moments at (0, 2): E Z^2 = 1, E Z^4 = 3.
    let mu = fam.member(0.0, 2.0).unwrap();
    let nu = fam.member(0.0, 1.0).unwrap();
    assert_abs_diff_eq!(ot_cost_quantile(&power(2.0), &mu, &nu).unwrap(), 1.0, epsilon = 1e-8);
    assert_abs_diff_eq!(ot_cost_quantile(&power(4.0), &mu, &nu).unwrap(), 3.0, epsilon = 1e-7);
    let refined = r.refined.unwrap();
    assert!(refined.gap >= r.max_value_gap);
}

#[test]
fn constant_shift_gap_everywhere() {
    let h = power(2.0);
    let r = values_equal_on_family(&h, &h.clone().with_offset(0.5), &LocationScaleFamily::Normal, &grid_3x2(), 1e-8)
        .unwrap();
    assert_eq!(r.witness, Some(grid_3x2()[0]));
    assert_abs_diff_eq!(r.max_value_gap, 0.5, epsilon = 1e-9);
}

#[test]
fn plan_only_demonstration() {
    let mu = Measure1D::uniform(0.0, 1.0, 401).unwrap();
    let nu = Measure1D::uniform(2.0, 3.0, 401).unwrap();
    let r = plans_only_nonidentifiability(&[power(2.0), power(4.0)], &mu, &nu, 50).unwrap();
    assert!(r.plans_agree);
    assert!(r.instances.iter().all(|i| i.monotone));
    assert!(r.certificates.iter().all(|&g| g <= 1e-9));
    assert!(r.max_value_gap > 0.1);
    // Value gap against the quantile formula.
    let q2 = ot_cost_quantile(&power(2.0), &mu, &nu).unwrap();
    let q4 = ot_cost_quantile(&power(4.0), &mu, &nu).unwrap();
    assert!((q4 - q2).abs() > 0.1);
}

#[test]
fn plan_only_single_and_shifted_costs() {
    let mu = Measure1D::uniform(0.0, 1.0, 401).unwrap();
    let nu = Measure1D::uniform(2.0, 3.0, 401).unwrap();
    let single = plans_only_nonidentifiability(&[power(3.0)], &mu, &nu, 20).unwrap();
    assert!(single.plans_agree);
    assert_eq!(single.max_value_gap, 0.0);

    let h = power(2.0);
    let k = 0.75;
    let r = plans_only_nonidentifiability(&[h.clone(), h.with_offset(k)], &mu, &nu, 30).unwrap();
    assert!(r.plans_agree);
    assert_eq!(r.instances[0].lp.coupling.plan, r.instances[1].lp.coupling.plan);
    assert_abs_diff_eq!(r.max_value_gap, k, epsilon = 1e-12);
}

fn truncated_normal(m: f64) -> Measure1D {
    let x: Vec<f64> = (0..1201).map(|i| m - 6.0 + 12.0 * i as f64 / 1200.0).collect();
    let d = x.iter().map(|v| (-(v - m) * (v - m) / 2.0).exp()).collect();
    Measure1D::from_density(x, d).unwrap()
}

/// Zero-mean pair of bumps, positive left of 0 and negative right of it.
fn bump_pair(x: &[f64]) -> GridFunction {
    let bump = |c: f64, t: f64| (1.0 - ((t - c) / 0.5).powi(2)).max(0.0).powi(2);
    GridFunction::sample(x.to_vec(), |t| bump(-0.75, t) - bump(0.75, t)).unwrap()
}

#[test]
fn first_variation_zero_perturbation() {
    let mu = truncated_normal(0.0);
    let nu = truncated_normal(1.0);
    let phi = GridFunction::new(mu.grid().to_vec(), vec![0.0; mu.grid().len()]).unwrap();
    let fv = first_variation_check(&power(2.0), &mu, &nu, &phi, 1e-3).unwrap();
    assert_eq!(fv.inner_product, 0.0);
    assert!(fv.difference_quotient.abs() <= 1e-6);
}

#[test]
fn first_variation_matches_potential() {
    let mu = truncated_normal(0.0);
    let nu = truncated_normal(1.0);
    let phi = bump_pair(mu.grid());
    let h = power(2.0);
    let coarse = first_variation_check(&h, &mu, &nu, &phi, 1e-3).unwrap();
    assert!(coarse.relative_discrepancy() <= 1e-2, "{coarse:?}");
    let fine = first_variation_check(&h, &mu, &nu, &phi, 5e-4).unwrap();
    assert!(fine.discrepancy < coarse.discrepancy, "{fine:?} vs {coarse:?}");
}

#[test]
fn first_variation_inner_product_is_linear() {
    let mu = truncated_normal(0.0);
    let nu = truncated_normal(1.0);
    let h = power(2.0);
    let phi = bump_pair(mu.grid());
    let twice = phi.map_values(|_, v| 2.0 * v);
    let one = first_variation_check(&h, &mu, &nu, &phi, 1e-3).unwrap();
    let two = first_variation_check(&h, &mu, &nu, &twice, 1e-3).unwrap();
    assert_abs_diff_eq!(two.inner_product, 2.0 * one.inner_product, epsilon = 1e-12);
}

#[test]
fn affine_reduction_examples() {
    let mu = Measure1D::uniform(0.0, 1.0, 401).unwrap();
    let nu = Measure1D::uniform(2.0, 3.0, 401).unwrap();
    let h = power(2.0);
    let s = 0.5f64.sqrt();
    let r = affine_reduction_check(&h, &mu, &nu, &[s, s], &[0.3, -1.0], 100).unwrap();
    assert!(r.gap <= 1e-9, "{r:?}");

    let axis = affine_reduction_check(&h, &mu, &nu, &[1.0, 0.0, 0.0], &[0.0; 3], 40).unwrap();
    assert_eq!(axis.gap, 0.0);

    // Translating both marginals leaves the d-dimensional value alone.
    let value = |r: &[f64]| {
        let x = affine_pushforward(&mu, &[s, s], r, 30).unwrap();
        let y = affine_pushforward(&nu, &[s, s], r, 30).unwrap();
        ot_lp(&x, &y, &h).unwrap().coupling.value
    };
    assert_abs_diff_eq!(value(&[0.0, 0.0]), value(&[5.0, -2.0]), epsilon = 1e-9);
}
