use approx::assert_abs_diff_eq;
use invot_core::forward::{concave_ot_1d, monotone_map, ot_cost_quantile, potential_derivative_1d};
use invot_core::numeric::grid::linspace;
use invot_core::recovery::{
    assemble_convex_cost, conjugate_graph_from_map, recover_concave, recover_from_values_locscale, ConjugateGraph,
    CostSurface, GraphKind, KMethod, ValueAnchor, ValueMethod,
};
use invot_core::transforms::{a_grid, value_surface_locscale, SpectralRegularization};
use invot_core::{CostSpec, Error, LocationScaleFamily, Measure1D};

fn convex_graph(cost: &CostSpec, mu: &Measure1D, nu: &Measure1D) -> ConjugateGraph {
    let map = monotone_map(mu, nu).unwrap();
    let fprime = potential_derivative_1d(cost, mu, nu).unwrap();
    conjugate_graph_from_map(&map, &fprime, GraphKind::Convex).unwrap()
}

fn normal_pair(a: f64, b: f64, points: usize) -> (Measure1D, Measure1D) {
    let fam = LocationScaleFamily::Normal;
    (
        fam.member_with(a, b, points, 1e-8).unwrap(),
        fam.member_with(0.0, 1.0, points, 1e-8).unwrap(),
    )
}

#[test]
fn identity_map_gives_degenerate_domain() {
    let m = Measure1D::uniform(0.0, 1.0, 101).unwrap();
    let g = convex_graph(&CostSpec::convex_power(2.0).unwrap(), &m, &m);
    assert!(g.points.iter().all(|&(y, z)| y.abs() < 1e-9 && z.abs() < 1e-9));
    let (lo, hi) = g.identified_domain().unwrap();
    assert!(hi - lo < 1e-9);
    assert!(matches!(assemble_convex_cost(&g, None), Err(Error::DegenerateGraph(_))));
}

#[test]
fn uniform_doubling_graph() {
    let mu = Measure1D::uniform(0.0, 1.0, 201).unwrap();
    let nu = Measure1D::uniform(0.0, 2.0, 201).unwrap();
    let g = convex_graph(&CostSpec::convex_power(2.0).unwrap(), &mu, &nu);
    // f'(x) = -2x and x - T(x) = -x: the graph of y -> y / 2.
    for &(y, z) in &g.points {
        assert_abs_diff_eq!(z, y / 2.0, epsilon = 1e-8);
    }
}

#[test]
fn location_scale_graph_traces_inverse_derivative() {
    let (mu, nu) = normal_pair(0.0, 2.0, 401);
    let h = CostSpec::convex_power(2.0).unwrap();
    let g = convex_graph(&h, &mu, &nu);
    for &(y, z) in &g.points {
        // With T(x) = x / 2 the difference is x / 2 and y = h'(x / 2).
        assert_abs_diff_eq!(y, h.derivative(z), epsilon = 1e-6 * (1.0 + y.abs()));
    }
}

#[test]
fn origin_pinned_square() {
    let points = linspace(-2.0, 0.0, 81).into_iter().map(|y| (y, y / 2.0)).collect();
    let g = ConjugateGraph::new(GraphKind::Convex, points).unwrap();
    let r = assemble_convex_cost(&g, None).unwrap();
    assert_eq!(r.k_method, KMethod::OriginPin);
    assert_eq!(r.identified_domain, (-2.0, 0.0));
    for &x in &[-1.0, -0.6, -0.25, 0.0] {
        assert_abs_diff_eq!(r.hprime_at(x).unwrap(), 2.0 * x, epsilon = 1e-12);
        assert_abs_diff_eq!(r.h_at(x).unwrap(), x * x, epsilon = 1e-3);
    }
    assert_eq!(r.h_at(0.5), None);
    assert_eq!(r.hprime_at(-1.5), None);
}

#[test]
fn round_trip_power_costs() {
    let (mu, nu) = normal_pair(0.0, 2.0, 401);
    for p in [2.0, 3.0] {
        let h = CostSpec::convex_power(p).unwrap();
        let r = assemble_convex_cost(&convex_graph(&h, &mu, &nu), None).unwrap();
        let (lo, hi) = r.hprime.domain();
        let (lo, hi) = (lo + 0.1 * (hi - lo), hi - 0.1 * (hi - lo));
        let worst = r
            .hprime
            .x()
            .iter()
            .zip(r.hprime.y())
            .filter(|(&x, _)| x >= lo && x <= hi)
            .map(|(&x, &v)| (v - p * x.abs().powf(p - 1.0) * x.signum()).abs())
            .fold(0.0, f64::max);
        assert!(worst <= 5e-2, "p = {p}: {worst}");
        assert_eq!(r.k_method, KMethod::OriginPin);
    }
}

#[test]
fn value_anchor_recovers_zero_offset() {
    let (mu, nu) = normal_pair(0.0, 2.0, 401);
    let h = CostSpec::convex_power(2.0).unwrap();
    let alpha = ot_cost_quantile(&h, &mu, &nu).unwrap();
    let anchor = ValueAnchor { mu: mu.clone(), nu: nu.clone(), alpha };
    let r = assemble_convex_cost(&convex_graph(&h, &mu, &nu), Some(&anchor)).unwrap();
    assert_eq!(r.k_method, KMethod::ValueMatch);
    assert!(r.k.abs() <= 1e-3, "k = {}", r.k);
    assert!(r.diagnostics.anchor_residual.unwrap().abs() <= 1e-10);
}

#[test]
fn constant_shift_invisible_without_anchor() {
    // x - T(x) = x / 3 + 10 / 3 stays positive over the tabulated support,
    // so neither representative is pinned at the origin.
    let (mu, nu) = normal_pair(5.0, 1.5, 201);
    let h1 = CostSpec::convex_power(2.0).unwrap();
    let h2 = CostSpec::convex_power(2.0).unwrap().with_offset(5.0);
    let g1 = convex_graph(&h1, &mu, &nu);
    let g2 = convex_graph(&h2, &mu, &nu);
    assert_eq!(g1, g2);
    let r = assemble_convex_cost(&g2, None).unwrap();
    assert_eq!(r.hprime, assemble_convex_cost(&g1, None).unwrap().hprime);
    assert_eq!(r.k_method, KMethod::Unresolved);
}

#[test]
fn noisy_graph_is_projected() {
    let points: Vec<(f64, f64)> = linspace(-1.0, 1.0, 101)
        .into_iter()
        .enumerate()
        .map(|(i, y)| (y, 1e-9 * i as f64 + if i % 2 == 0 { 1e-8 } else { -1e-8 }))
        .collect();
    let r = assemble_convex_cost(&ConjugateGraph::new(GraphKind::Convex, points).unwrap(), None).unwrap();
    assert!(r.hprime.y().windows(2).all(|w| w[1] >= w[0]));
    assert!(r.diagnostics.isotonic_projection_distance > 0.0);
    assert!(r.diagnostics.isotonic_projection_distance <= 2e-8);

    let bad = vec![(0.0, 0.0), (1.0, 1.0), (2.0, 0.5), (3.0, 2.0)];
    let r = assemble_convex_cost(&ConjugateGraph::new(GraphKind::Convex, bad).unwrap(), None);
    assert!(matches!(r, Err(Error::NonMonotoneGraph { index: 2, .. })));
}

#[test]
fn merged_graphs_average_overlaps() {
    let a = ConjugateGraph::new(GraphKind::Convex, vec![(0.0, 0.0), (1.0, 0.5)]).unwrap();
    let b = ConjugateGraph::new(GraphKind::Convex, vec![(1.0, 0.52), (2.0, 1.0)]).unwrap();
    let r = assemble_convex_cost(&ConjugateGraph::merge(&[a, b]).unwrap(), None).unwrap();
    assert_abs_diff_eq!(r.diagnostics.merged_spread, 0.02, epsilon = 1e-15);
    assert_abs_diff_eq!(r.hprime.x()[1], 0.51, epsilon = 1e-15);
}

#[test]
fn concave_square_root_slope() {
    // l(t) = sqrt(t): l'(t) = 1 / (2 sqrt t), (l')^{-1}(s) = 1 / (4 s^2).
    let l = CostSpec::concave_power(0.5).unwrap();
    let t = 4.0;
    let s = l.derivative(t);
    assert_abs_diff_eq!(s, 0.25, epsilon = 1e-15);
    assert_abs_diff_eq!(1.0 / (4.0 * s * s), t, epsilon = 1e-12);
}

fn concave_graph(l: &CostSpec) -> ConjugateGraph {
    let mu = Measure1D::uniform(0.0, 1.0, 401).unwrap();
    let nu = Measure1D::uniform(3.0, 4.0, 401).unwrap();
    let ot = concave_ot_1d(l, &mu, &nu, 100).unwrap();
    let map = ot.leftover_map().unwrap();
    let fprime = ot.leftover_fprime(l).unwrap();
    let points = map
        .x()
        .iter()
        .zip(map.y())
        .zip(fprime.y())
        .map(|((&x, &t), &y)| (y, x - t))
        .collect();
    ConjugateGraph::new(GraphKind::Concave, points).unwrap()
}

#[test]
fn concave_round_trip_disjoint_uniforms() {
    let l = CostSpec::concave_power(0.5).unwrap();
    let g = concave_graph(&l);
    for &(y, z) in &g.points {
        let want = 1.0 / (4.0 * y * y);
        assert!((z.abs() - want).abs() <= 5e-2 * want, "s = {y}: {} vs {want}", z.abs());
    }
    let r = recover_concave(&g).unwrap();
    assert!(r.hprime.y().windows(2).all(|w| w[1] < w[0]));
    // The visited distances stay away from zero, so l(0) stays unresolved.
    assert_eq!(r.k_method, KMethod::Unresolved);
}

#[test]
fn concave_offset_leaves_graph_unchanged() {
    let l = CostSpec::concave_power(0.5).unwrap();
    assert_eq!(concave_graph(&l), concave_graph(&l.clone().with_offset(3.0)));
}

#[test]
fn concave_origin_pin_when_distances_reach_zero() {
    let points = linspace(0.001, 2.0, 200)
        .into_iter()
        .map(|t| (0.5 / t.sqrt(), t))
        .collect();
    let r = recover_concave(&ConjugateGraph::new(GraphKind::Concave, points).unwrap()).unwrap();
    assert_eq!(r.k_method, KMethod::OriginPin);
    for &t in &[0.5, 1.0, 2.0] {
        assert!((r.h_at(t).unwrap() - t.sqrt()).abs() <= 1e-2, "l({t}) = {}", r.h_at(t).unwrap());
    }
}

#[test]
fn concave_sign_inconsistency() {
    let g = ConjugateGraph::new(GraphKind::Concave, vec![(0.5, 1.0), (-0.4, 2.0)]).unwrap();
    assert!(matches!(recover_concave(&g), Err(Error::SignInconsistent { .. })));
}

#[test]
fn fourier_recovery_of_square() {
    let fam = LocationScaleFamily::Normal;
    let h = CostSpec::convex_power(2.0).unwrap();
    // At spacing 0.1 about an eighth of the unit-scale Gaussian spectrum
    // stays above the cutoff.
    let a = linspace(-8.0, 8.0, 161);
    let surface = value_surface_locscale(&h, &fam, &a_grid(-8.0, 8.0, 161, 2.0)).unwrap();
    let method = ValueMethod::Fourier {
        b: 2.0,
        a,
        reg: SpectralRegularization {
            poly_degree: Some(2),
            ..SpectralRegularization::default()
        },
    };
    let r = recover_from_values_locscale(&surface, &fam, &method).unwrap();
    let (mut num, mut den) = (0.0, 0.0);
    for (&x, &v) in r.h.x().iter().zip(r.h.y()) {
        if x.abs() <= 3.0 {
            num += (v - x * x).powi(2);
            den += (x * x).powi(2);
        }
    }
    let err = (num / den).sqrt();
    assert!(err <= 0.1, "relative L2 error {err}");
}

#[test]
fn identical_costs_give_zero_difference() {
    let fam = LocationScaleFamily::Normal;
    let a = linspace(-4.0, 4.0, 81);
    let entries = a.iter().map(|&ai| (ai, 2.0, 0.0)).collect();
    let zero = invot_core::transforms::GTransformSamples::new(fam.clone(), entries).unwrap();
    let method = ValueMethod::Fourier { b: 2.0, a, reg: SpectralRegularization::default() };
    let r = recover_from_values_locscale(&zero, &fam, &method).unwrap();
    assert!(r.h.y().iter().all(|&v| v == 0.0));
}

#[test]
fn exponential_scale_section_is_a_laplace_transform() {
    // alpha(0, 1 + 1/s) = (1/s) ∫ e^{-t} h(t / s) dt = s ∫ e^{-s x} h(x) dx.
    let fam = LocationScaleFamily::ExponentialScale;
    let h = CostSpec::convex_power(2.0).unwrap();
    let surface = CostSurface { cost: h, family: fam.clone() };
    use invot_core::recovery::ValueSurface;
    for &s in &[0.5, 2.0, 7.0] {
        let alpha = surface.alpha(0.0, 1.0 + 1.0 / s).unwrap();
        // Laplace transform of x^2 is 2 / s^3.
        assert_abs_diff_eq!(alpha / s, 2.0 / (s * s * s), epsilon = 1e-9 * (2.0 / (s * s * s)));
    }
    let method = ValueMethod::Post { x: vec![0.5, 1.0, 2.0], order: 6 };
    let r = recover_from_values_locscale(&surface, &fam, &method).unwrap();
    for (&x, &v) in r.h.x().iter().zip(r.h.y()) {
        // Post at order n gives x^2 (n + 1)(n + 2) / n^2 for this pair.
        let post = x * x * 7.0 * 8.0 / 36.0;
        assert!((v - post).abs() <= 1e-3 * post, "x = {x}: {v} vs {post}");
    }
}

#[test]
fn method_family_mismatch() {
    let surface = CostSurface {
        cost: CostSpec::convex_power(2.0).unwrap(),
        family: LocationScaleFamily::Normal,
    };
    let post = ValueMethod::Post { x: vec![1.0], order: 10 };
    assert!(matches!(
        recover_from_values_locscale(&surface, &LocationScaleFamily::Normal, &post),
        Err(Error::MethodFamilyMismatch { .. })
    ));
    let fourier = ValueMethod::Fourier { b: 2.0, a: linspace(-1.0, 1.0, 11), reg: SpectralRegularization::default() };
    for fam in [LocationScaleFamily::Cauchy, LocationScaleFamily::ExponentialScale] {
        assert!(matches!(
            recover_from_values_locscale(&surface, &fam, &fourier),
            Err(Error::MethodFamilyMismatch { .. })
        ));
    }
}
