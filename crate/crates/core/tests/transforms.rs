use approx::assert_abs_diff_eq;
use invot_core::numeric::grid::linspace;
use invot_core::numeric::quadrature::adaptive;
use invot_core::transforms::{
    alpha_density_form, deconvolve_location, g_transform, g_transform_fn, post_laplace_invert,
    post_laplace_invert_analytic, value_surface_locscale, SpectralRegularization, Taper,
};
use invot_core::{CostSpec, Error, GridFunction, LocationScaleFamily};
use num_complex::Complex64;

fn bump(x: f64) -> f64 {
    (1.0 - x * x).max(0.0).powi(2)
}

fn rel_l2(x: &[f64], got: &[f64], want: impl Fn(f64) -> f64, window: (f64, f64)) -> f64 {
    let (mut num, mut den) = (0.0, 0.0);
    for (&xi, &gi) in x.iter().zip(got) {
        if xi >= window.0 && xi <= window.1 {
            num += (gi - want(xi)).powi(2);
            den += want(xi).powi(2);
        }
    }
    (num / den).sqrt()
}

#[test]
fn zero_function_transforms_to_zero() {
    let h = GridFunction::new(linspace(-5.0, 5.0, 11), vec![0.0; 11]).unwrap();
    for &(a, b) in &[(0.0, 1.0), (2.0, 0.3), (-1.0, 4.0)] {
        assert_eq!(g_transform(&h, &LocationScaleFamily::Normal, a, b).unwrap(), 0.0);
    }
}

#[test]
fn normal_square_transform() {
    // Substituting x = a + b u: b E[(a + b U)^2] = b (a^2 + b^2).
    let x = linspace(-30.0, 30.0, 6001);
    let h = GridFunction::sample(x, |v| v * v).unwrap();
    for &(a, b) in &[(0.0, 1.0), (1.0, 2.0), (-0.5, 0.7)] {
        let v = g_transform(&h, &LocationScaleFamily::Normal, a, b).unwrap();
        let want = b * (a * a + b * b);
        assert!((v - want).abs() <= 1e-4 * want, "({a},{b}): {v} vs {want}");
    }
}

#[test]
fn g_transform_is_linear() {
    let x = linspace(-6.0, 6.0, 601);
    let h1 = GridFunction::sample(x.clone(), |v| v.cos()).unwrap();
    let h2 = GridFunction::sample(x.clone(), |v| v * v * v).unwrap();
    let mix = GridFunction::sample(x, |v| 2.0 * v.cos() + 3.0 * v * v * v).unwrap();
    for fam in [LocationScaleFamily::Normal, LocationScaleFamily::Laplace, LocationScaleFamily::Cauchy] {
        for &(a, b) in &[(0.3, 0.8), (-1.0, 1.5)] {
            let lhs = g_transform(&mix, &fam, a, b).unwrap();
            let rhs = 2.0 * g_transform(&h1, &fam, a, b).unwrap() + 3.0 * g_transform(&h2, &fam, a, b).unwrap();
            assert_abs_diff_eq!(lhs, rhs, epsilon = 1e-10);
        }
    }
}

#[test]
fn value_surface_examples() {
    let h = CostSpec::convex_power(2.0).unwrap();
    let fam = LocationScaleFamily::Normal;
    let params = [(-1.5, 1.0), (0.0, 1.0), (0.7, 1.0), (-1.0, 2.0), (0.0, 2.0), (1.0, 2.0), (0.5, 0.4)];
    let s = value_surface_locscale(&h, &fam, &params).unwrap();
    for &(a, b, v) in s.entries() {
        let want = a * a + (b - 1.0) * (b - 1.0);
        assert_abs_diff_eq!(v, want, epsilon = 1e-8);
        if b == 1.0 {
            assert_abs_diff_eq!(v, h.value(a), epsilon = 1e-8);
        }
    }
    // Density form at scale b - 1 = 1, a = 0: both sides are 1.
    let quantile_side = s.get(0.0, 2.0).unwrap();
    let density_side = alpha_density_form(|t| t * t, &fam, 0.0, 2.0, (-40.0, 40.0)).unwrap();
    assert_abs_diff_eq!(quantile_side, 1.0, epsilon = 1e-6);
    assert_abs_diff_eq!(density_side, 1.0, epsilon = 1e-6);
}

#[test]
fn nonpositive_scale_in_transform() {
    let h = GridFunction::new(vec![0.0, 1.0], vec![1.0, 1.0]).unwrap();
    assert!(matches!(
        g_transform(&h, &LocationScaleFamily::Normal, 0.0, 0.0),
        Err(Error::NonPositiveScale(_))
    ));
}

#[test]
fn deconvolving_zero_gives_zero() {
    let values = GridFunction::new(linspace(-5.0, 5.0, 101), vec![0.0; 101]).unwrap();
    let d = deconvolve_location(&values, &LocationScaleFamily::Normal, 1.0, &SpectralRegularization::default()).unwrap();
    assert!(d.h.y().iter().all(|&v| v == 0.0));
}

#[test]
fn bump_round_trip_at_half_scale() {
    let fam = LocationScaleFamily::Normal;
    let b0 = 0.5;
    let a = linspace(-8.0, 8.0, 321);
    let data: Vec<f64> = a
        .iter()
        .map(|&ai| g_transform_fn(bump, &fam, ai, b0, (-1.0, 1.0)).unwrap())
        .collect();
    let values = GridFunction::new(a, data).unwrap();
    let d = deconvolve_location(&values, &fam, b0, &SpectralRegularization::default()).unwrap();
    let err = rel_l2(d.h.x(), d.h.y(), bump, (-3.0, 3.0));
    assert!(err <= 0.1, "relative L2 error {err}");
}

#[test]
fn normal_kernel_at_root_two_is_scaled_weierstrass() {
    // W[h](a) = (4 pi)^{-1/2} ∫ exp(-(a - x)^2 / 4) h(x) dx.
    let fam = LocationScaleFamily::Normal;
    for &a in &[-1.0, 0.0, 0.4, 2.0] {
        let i = g_transform_fn(bump, &fam, a, 2f64.sqrt(), (-1.0, 1.0)).unwrap();
        let w = adaptive(
            |x| (-(a - x) * (a - x) / 4.0).exp() * bump(x),
            -1.0,
            1.0,
            1e-15,
            1e-13,
        ) / (4.0 * core::f64::consts::PI).sqrt();
        assert_abs_diff_eq!(i, 2f64.sqrt() * w, epsilon = 1e-12);
    }
}

#[test]
fn deconvolution_inverts_its_own_model() {
    // Data built from the discrete convolution model is inverted to rounding
    // on the retained band; a smooth compact h keeps the band effectively full.
    let fam = LocationScaleFamily::Normal;
    let (b0, step, n) = (0.3, 0.05, 241);
    let a = linspace(-6.0, 6.0, n);
    let h: Vec<f64> = a.iter().map(|&x| bump(x / 2.0)).collect();
    let reach = (9.0 * b0 / step) as i64;
    let data: Vec<f64> = (0..n as i64)
        .map(|k| {
            (-reach..=reach)
                .filter(|m| (0..n as i64).contains(&(k + m)))
                .map(|m| step * fam.generator_density(m as f64 * step / b0) * h[(k + m) as usize])
                .sum()
        })
        .collect();
    let reg = SpectralRegularization {
        eps: 1e-6,
        taper: Taper::None,
        ..SpectralRegularization::default()
    };
    let d = deconvolve_location(&GridFunction::new(a.clone(), data).unwrap(), &fam, b0, &reg).unwrap();
    let err = rel_l2(&a, d.h.y(), |x| bump(x / 2.0), (-6.0, 6.0));
    assert!(err <= 1e-3, "relative L2 error {err}");
}

#[test]
fn spectrum_degenerate_when_kernel_too_wide() {
    let fam = LocationScaleFamily::Normal;
    let a = linspace(-5.0, 5.0, 201);
    let values = GridFunction::sample(a, bump).unwrap();
    let r = deconvolve_location(&values, &fam, 5.0, &SpectralRegularization::default());
    assert!(matches!(r, Err(Error::KernelSpectrumDegenerate { .. })));
}

#[test]
fn post_reciprocal_is_exact_on_the_contour() {
    // (-1)^n / n! s^{n+1} d^n/ds^n (1/s) = 1 for every n.
    for &x in &[0.3, 1.0, 2.5] {
        for n in [2, 6, 10, 16] {
            let e = post_laplace_invert_analytic(|s: Complex64| s.inv(), x, n).unwrap();
            assert!((e.value - 1.0).abs() <= 1e-9, "x={x} n={n}: {}", e.value);
        }
    }
}

#[test]
fn post_reciprocal_by_real_differences() {
    // Differences keep about three digits at order 10 and more below it.
    for &x in &[0.3, 1.0, 2.5] {
        for (n, tol) in [(2, 1e-4), (6, 1e-4), (10, 5e-3)] {
            let e = post_laplace_invert(|s| 1.0 / s, x, n).unwrap();
            assert!((e.value - 1.0).abs() <= tol, "x={x} n={n}: {}", e.value);
        }
    }
}

#[test]
fn post_exponential_pair() {
    let e = post_laplace_invert(|s| 1.0 / (s + 1.0), 1.0, 10).unwrap();
    let want = (-1.0f64).exp();
    assert!((e.value - want).abs() / want <= 0.1, "{}", e.value);

    let c = post_laplace_invert_analytic(|s: Complex64| (s + 1.0).inv(), 1.0, 10).unwrap();
    // Post's formula at order n gives (1 + x/n)^{-(n+1)} for this pair.
    assert_abs_diff_eq!(c.value, 1.1f64.powi(-11), epsilon = 1e-12);
}

#[test]
fn post_is_linear_in_transform() {
    // Exact in real arithmetic; in floating point the differences amplify
    // rounding by roughly (4 s / h)^n, about 1e7 at order 4.
    let (x, n) = (0.8, 4);
    let l1 = |s: f64| 1.0 / (s + 1.0);
    let l2 = |s: f64| 1.0 / (s * s);
    let combo = post_laplace_invert(|s| 2.0 * l1(s) - 0.5 * l2(s), x, n).unwrap().value;
    let parts = 2.0 * post_laplace_invert(l1, x, n).unwrap().value - 0.5 * post_laplace_invert(l2, x, n).unwrap().value;
    assert_abs_diff_eq!(combo, parts, epsilon = 1e-7 * parts.abs().max(1.0));
}

#[test]
fn post_rejects_bad_inputs() {
    assert!(matches!(post_laplace_invert(|s| 1.0 / s, 0.0, 10), Err(Error::InvalidInput(_))));
    assert!(matches!(post_laplace_invert(|s| 1.0 / s, 1.0, 1), Err(Error::InvalidInput(_))));
}
