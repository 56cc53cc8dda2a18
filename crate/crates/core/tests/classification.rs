use wml_core::integrability::{feller, stochastic_completeness, volume_growth_sc_test, IntegralState, Verdict};
use wml_core::manifold::preset_manifold;

#[test]
fn feller_alpha_sweep() {
    for m in [2, 3] {
        for alpha in [0.5, 1.0, 1.5, 2.0, 2.5, 3.0] {
            let man = preset_manifold(&format!("exp-alpha-{m}-{alpha}")).unwrap();
            let rep = feller(&man);
            let want = if alpha <= 2.0 { Verdict::Yes } else { Verdict::No };
            assert_eq!(rep.verdict, want, "m={m} alpha={alpha}: {:#?}", rep.criteria_evidence);
        }
    }
}

#[test]
fn volume_test_never_contradicts_main_verdict() {
    for name in [
        "euclidean-2",
        "euclidean-3",
        "hyperbolic-2",
        "hyperbolic-3",
        "exp-alpha-2-1",
        "exp-alpha-3-3",
        "exp-growth-2",
        "exp-growth-3",
        "gaussian-shrinker-2-0.5",
        "flat-steady-3",
    ] {
        let m = preset_manifold(name).unwrap();
        let vol = volume_growth_sc_test(&m);
        let sc = stochastic_completeness(&m);
        assert_ne!(sc.verdict, Verdict::Unknown, "{name}");
        if vol.state == IntegralState::Divergent {
            assert_eq!(sc.verdict, Verdict::Yes, "{name}");
        }
    }
}

#[test]
fn feller_trichotomy_is_exclusive() {
    for name in [
        "euclidean-2",
        "hyperbolic-3",
        "exp-alpha-2-2.5",
        "gaussian-shrinker-3-1",
        "exp-growth-2",
    ] {
        let rep = feller(&preset_manifold(name).unwrap());
        assert!(
            ["model1", "model2", "negation"].contains(&rep.rule_fired.as_str()),
            "{name}: {}",
            rep.rule_fired
        );
        let yes = rep.rule_fired != "negation";
        assert_eq!(rep.verdict == Verdict::Yes, yes);
    }
}
