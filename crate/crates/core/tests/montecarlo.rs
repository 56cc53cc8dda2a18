use wml_core::manifold::preset_manifold;
use wml_core::montecarlo::{hitting_laplace, simulate_explosion, SimConfig};
use wml_core::ode::{heat_mass, minimal_exterior_solution, MinimalOptions};

fn cfg(n_paths: usize, t_max: f64, outer: f64, seed: u64) -> SimConfig {
    SimConfig {
        n_paths,
        t_max,
        dt_base: 1e-3,
        r_absorb_outer: outer,
        r_reflect_inner: 1e-4,
        seed,
    }
}

#[test]
fn complete_models_do_not_explode() {
    for name in ["euclidean-3", "hyperbolic-2"] {
        let m = preset_manifold(name).unwrap();
        let near = simulate_explosion(&m, 1.0, &cfg(2000, 1.0, 50.0, 7)).unwrap();
        let far = simulate_explosion(&m, 1.0, &cfg(2000, 1.0, 100.0, 7)).unwrap();
        assert!(near.explosion_fraction < 0.005, "{name}: {near:?}");
        assert!(
            (near.explosion_fraction - far.explosion_fraction).abs() <= near.ci95_halfwidth.max(far.ci95_halfwidth),
            "{name}"
        );
        assert!(near.halving.ok, "{name}: {:?}", near.halving);
    }
}

#[test]
fn growth_model_explodes_with_a_stable_fraction() {
    let m = preset_manifold("exp-growth-2").unwrap();
    let near = simulate_explosion(&m, 1.0, &cfg(2000, 1.0, 50.0, 11)).unwrap();
    let far = simulate_explosion(&m, 1.0, &cfg(2000, 1.0, 100.0, 11)).unwrap();
    assert!(near.explosion_fraction > 0.1, "{near:?}");
    let both = near.ci95_halfwidth.hypot(far.ci95_halfwidth);
    assert!(
        (near.explosion_fraction - far.explosion_fraction).abs() <= 2.0 * both,
        "{near:?} {far:?}"
    );
    assert!(near.halving.ok, "{:?}", near.halving);
}

#[test]
fn explosion_fraction_matches_heat_mass_defect() {
    let m = preset_manifold("exp-growth-2").unwrap();
    let sim = simulate_explosion(&m, 1.0, &cfg(4000, 1.0, 8.0, 3)).unwrap();
    let d8 = heat_mass(&m, 1.0, 1.0, 8.0, 4000, 1000).unwrap().defect();
    let d16 = heat_mass(&m, 1.0, 1.0, 16.0, 8000, 1000).unwrap().defect();
    let tol = 2.0 * sim.ci95_halfwidth + (d8 - d16).abs();
    assert!(
        (sim.explosion_fraction - d8).abs() <= tol,
        "MC {} vs PDE {d8} (R=16: {d16}), tol {tol}",
        sim.explosion_fraction
    );
}

#[test]
fn flat_hitting_transform_matches_closed_form() {
    // h(r) = (R0/r) e^{-√λ (r-R0)} solves h'' + 2h'/r = λh in ℝ³
    let m = preset_manifold("euclidean-3").unwrap();
    let rep = hitting_laplace(&m, 2.0, 1.0, 1.0, &cfg(4000, 10.0, 50.0, 5)).unwrap();
    let est = rep.hitting_estimates[0];
    let exact = (-1f64).exp() / 2.0;
    assert!(
        (est.estimate - exact).abs() <= (2.0 * est.ci95_halfwidth).max(0.01),
        "{est:?} vs {exact}"
    );
    assert!(est.remainder_bound < 0.01, "{est:?}");
}

#[test]
fn hitting_transform_matches_minimal_solutions() {
    // non-Feller e^{-r³} keeps mass near the sphere; Feller e^{-r²} lets it decay
    let cases = [("exp-alpha-2-3", [5.0, 10.0, 20.0]), ("exp-alpha-2-2", [2.0, 3.0, 4.0])];
    for (name, starts) in cases {
        let m = preset_manifold(name).unwrap();
        let h = minimal_exterior_solution(&m, 1.0, 1.0, 25.0, MinimalOptions::default()).unwrap();
        let mut prev = f64::INFINITY;
        for r0 in starts {
            let rep = hitting_laplace(&m, r0, 1.0, 1.0, &cfg(2000, 10.0, 50.0, 9)).unwrap();
            let est = rep.hitting_estimates[0];
            let oracle = h.eval(r0).unwrap();
            let tol = (2.0 * est.ci95_halfwidth).max(0.01);
            assert!(
                (est.estimate - oracle).abs() <= tol,
                "{name} r0={r0}: MC {} vs ODE {oracle}",
                est.estimate
            );
            if name == "exp-alpha-2-3" {
                assert!(est.estimate > 0.05, "{name} r0={r0}: {est:?}");
            } else {
                assert!(est.estimate < prev, "{name} r0={r0}: {} after {prev}", est.estimate);
            }
            prev = est.estimate;
        }
    }
}

#[test]
fn reports_do_not_depend_on_the_worker_count() {
    let m = preset_manifold("exp-growth-2").unwrap();
    let c = cfg(300, 0.5, 20.0, 42);
    let one = rayon::ThreadPoolBuilder::new()
        .num_threads(1)
        .build()
        .unwrap()
        .install(|| simulate_explosion(&m, 1.0, &c).unwrap());
    let four = rayon::ThreadPoolBuilder::new()
        .num_threads(4)
        .build()
        .unwrap()
        .install(|| simulate_explosion(&m, 1.0, &c).unwrap());
    assert_eq!(one, four);
    let again = simulate_explosion(&m, 1.0, &c).unwrap();
    assert_eq!(one, again);
    let other = simulate_explosion(&m, 1.0, &SimConfig { seed: 43, ..c }).unwrap();
    assert_ne!(one, other);
}
