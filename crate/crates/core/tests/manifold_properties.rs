use proptest::prelude::*;
use wml_core::manifold::preset_manifold;

const PRESETS: [&str; 6] = [
    "euclidean-3",
    "hyperbolic-2",
    "hyperbolic-3",
    "exp-alpha-2-2",
    "gaussian-shrinker-3-0.5",
    "flat-steady-2",
];

fn poly(c: &[f64; 4], r: f64) -> (f64, f64, f64) {
    let v = c[0] + r * (c[1] + r * (c[2] + r * c[3]));
    let d1 = c[1] + r * (2.0 * c[2] + 3.0 * r * c[3]);
    let d2 = 2.0 * c[2] + 6.0 * r * c[3];
    (v, d1, d2)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn drift_matches_divergence_form(
        which in 0..PRESETS.len(),
        c in prop::array::uniform4(-2.0f64..2.0),
        r in 0.5f64..10.0,
    ) {
        let m = preset_manifold(PRESETS[which]).unwrap();
        let l0 = m.log_area_density(r).unwrap();
        // (a u')'/a by central differences of a(s)/a(r) · u'(s), Richardson over h and h/2
        let flux = |s: f64| (m.log_area_density(s).unwrap() - l0).exp() * poly(&c, s).1;
        let diff = |h: f64| (flux(r + h) - flux(r - h)) / (2.0 * h);
        let h = 1e-3 * r.min(1.0);
        let numeric = (4.0 * diff(h / 2.0) - diff(h)) / 3.0;
        let (_, d1, d2) = poly(&c, r);
        let b = m.drift(r).unwrap();
        let exact = d2 + b * d1;
        let scale = d2.abs() + (b * d1).abs();
        prop_assert!((numeric - exact).abs() <= 1e-8 * scale.max(1e-3), "{}: {numeric} vs {exact}", PRESETS[which]);
    }

    #[test]
    fn weighted_volume_increases(which in 0..PRESETS.len(), r1 in 0.05f64..8.0, dr in 0.01f64..4.0) {
        let m = preset_manifold(PRESETS[which]).unwrap();
        let r2 = r1 + dr;
        let v1 = m.weighted_ball_volume(r1).unwrap();
        let v2 = m.weighted_ball_volume(r2).unwrap();
        // independent Simpson value of ω ∫_{r1}^{r2} a
        let n = 400;
        let h = dr / n as f64;
        let simpson: f64 = (0..=n)
            .map(|i| {
                let w = if i == 0 || i == n { 1.0 } else if i % 2 == 1 { 4.0 } else { 2.0 };
                w * m.area_density(r1 + i as f64 * h).unwrap()
            })
            .sum::<f64>()
            * h
            / 3.0
            * m.sphere_area();
        // the volumes carry a relative quadrature error of about 1e-11
        if simpson > 1e-10 * v2 {
            prop_assert!(v2 > v1, "{}: V({r1}) = {v1}, V({r2}) = {v2}", PRESETS[which]);
            prop_assert!(((v2 - v1) - simpson).abs() <= 1e-6 * simpson + 1e-10 * v2);
        } else {
            prop_assert!(v2 >= v1 * (1.0 - 1e-10), "{}: V({r1}) = {v1}, V({r2}) = {v2}", PRESETS[which]);
        }
    }
}
