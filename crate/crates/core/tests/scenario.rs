use std::f64::consts::TAU;

use nodesel::scenario::{
    apply_shadowing, gaussian_like_prior, generate_paper_scenario, load_scenario, perturb_anchor_knowledge,
    save_scenario, GeneratorParams, Mode, ShadowingParams,
};
use nodesel::{Error, Point, Scenario};

fn paper(seed: u64) -> Scenario {
    generate_paper_scenario(&GeneratorParams::paper().with_seed(seed)).unwrap()
}

#[test]
fn paper_grid_has_121_uniform_targets() {
    let s = paper(1);
    assert_eq!(s.num_targets(), 121);
    assert_eq!(s.num_anchors(), 10);
    assert_eq!(s.num_candidates(), 100);
    assert!(s.prior.iter().all(|w| *w == 1.0 / 121.0));
    for x in &s.targets {
        let (m, n) = (x.x / 2.0, x.y / 2.0);
        assert!(m.fract() == 0.0 && n.fract() == 0.0 && m.abs() <= 5.0 && n.abs() <= 5.0);
    }
}

#[test]
fn anchors_on_circle() {
    let s = paper(1);
    for (j, y) in s.anchors.iter().enumerate() {
        let psi = TAU * j as f64 / 10.0;
        assert!((y.x - 18.0 * psi.cos()).abs() < 1e-12);
        assert!((y.y - 18.0 * psi.sin()).abs() < 1e-12);
    }
}

#[test]
fn intensities_are_inverse_square() {
    let s = paper(2);
    for (i, links) in s.eav_links.iter().enumerate() {
        assert_eq!(links.len(), 10 * 100);
        for l in links {
            let d2 = s.targets[i].distance_sq(&s.candidates[l.candidate]);
            assert!((l.intensity * d2 * 0.1 - 1.0).abs() < 1e-12);
        }
    }
    // sigma^2 = 0.1 at squared distance 100 gives 0.1
    assert!((1.0 / (100.0 * 0.1) - 0.1f64).abs() < 1e-15);
    for (i, links) in s.anchor_los.iter().enumerate() {
        for l in links {
            let d2 = s.targets[i].distance_sq(&s.anchors[l.anchor]);
            assert!((l.intensity * d2 - 1.0).abs() < 1e-12);
        }
    }
    for (k, row) in s.jam_channel_gain.iter().enumerate() {
        for (j, g) in row.iter().enumerate() {
            assert!((g * s.candidates[k].distance_sq(&s.anchors[j]) - 1.0).abs() < 1e-12);
        }
    }
}

#[test]
fn generator_is_deterministic() {
    assert_eq!(paper(5), paper(5));
    assert_ne!(paper(5).candidates, paper(6).candidates);
}

#[test]
fn candidates_stay_in_region() {
    let p = GeneratorParams::paper().with_seed(11);
    let s = generate_paper_scenario(&p).unwrap();
    assert!(s.candidates.iter().all(|c| p.region.contains(c)));
}

#[test]
fn degenerate_shadowing_is_exp_mean() {
    let s = paper(3);
    let p = ShadowingParams { eav_mean: -2.0, eav_var: 0.0, gain_mean: 0.5, gain_var: 0.0 };
    let t = apply_shadowing(&s, 9, &p).unwrap();
    let (fe, fg) = ((-2.0f64).exp(), 0.5f64.exp());
    for (a, b) in s.eav_links.iter().flatten().zip(t.eav_links.iter().flatten()) {
        assert_eq!(b.intensity, a.intensity * fe);
    }
    for (a, b) in s.anchor_los.iter().flatten().zip(t.anchor_los.iter().flatten()) {
        assert_eq!(b.intensity, a.intensity * fe);
    }
    for (a, b) in s.jam_channel_gain.iter().flatten().zip(t.jam_channel_gain.iter().flatten()) {
        assert_eq!(*b, a * fg);
    }
}

#[test]
fn shadowing_is_deterministic() {
    let s = paper(3);
    let p = ShadowingParams::default();
    assert_eq!(apply_shadowing(&s, 4, &p).unwrap(), apply_shadowing(&s, 4, &p).unwrap());
    assert_ne!(apply_shadowing(&s, 4, &p).unwrap(), apply_shadowing(&s, 5, &p).unwrap());
}

#[test]
fn negative_shadowing_variance_rejected() {
    let p = ShadowingParams { eav_var: -1.0, ..ShadowingParams::default() };
    assert!(matches!(apply_shadowing(&paper(1), 0, &p), Err(Error::Domain(_))));
}

#[test]
fn flat_prior_limit() {
    let s = paper(1);
    let w = gaussian_like_prior(&s.targets, Point::new(0.0, 0.0), 1e6).unwrap();
    assert!(w.iter().all(|v| (v - 1.0 / 121.0).abs() < 1e-6));
}

#[test]
fn prior_examples() {
    let w = gaussian_like_prior(&[Point::new(3.0, 4.0)], Point::new(0.0, 0.0), 0.1).unwrap();
    assert_eq!(w, vec![1.0]);
    let (d, nu) = (3.0, 2.0);
    let w = gaussian_like_prior(&[Point::new(1.0, 1.0), Point::new(1.0 + d, 1.0)], Point::new(1.0, 1.0), nu).unwrap();
    let expected = (d * d / (2.0 * nu * nu)).exp();
    assert!((w[0] / w[1] - expected).abs() <= 1e-12 * expected);
    assert!(matches!(gaussian_like_prior(&[Point::new(0.0, 0.0)], Point::new(0.0, 0.0), 0.0), Err(Error::Domain(_))));
}

#[test]
fn anchor_perturbation() {
    let s = apply_shadowing(&paper(4), 4, &ShadowingParams::default()).unwrap();
    assert_eq!(perturb_anchor_knowledge(&s, 0.0, 1).unwrap(), s);
    let t = perturb_anchor_knowledge(&s, 1.0, 1).unwrap();
    for (a, b) in s.anchors.iter().zip(&t.anchors) {
        assert!((a.x - b.x).abs() <= 1.0 && (a.y - b.y).abs() <= 1.0);
        assert!(a != b);
    }
    assert_eq!(t, perturb_anchor_knowledge(&s, 1.0, 1).unwrap());
    assert_eq!(s.eav_links, t.eav_links);
}

#[test]
fn perturbation_recomputes_free_space_values() {
    let s = paper(4);
    let t = perturb_anchor_knowledge(&s, 2.0, 8).unwrap();
    for (i, links) in t.anchor_los.iter().enumerate() {
        for l in links {
            let d2 = t.targets[i].distance_sq(&t.anchors[l.anchor]);
            assert!((l.intensity * d2 - 1.0).abs() < 1e-12);
        }
    }
}

#[test]
fn paper_preset_round_trips_through_file() {
    let s = apply_shadowing(&paper(7), 7, &ShadowingParams::default()).unwrap();
    let path = std::env::temp_dir().join(format!("nodesel-roundtrip-{}.json", std::process::id()));
    save_scenario(&s, &path).unwrap();
    let back = load_scenario(&path).unwrap();
    std::fs::remove_file(&path).ok();
    assert_eq!(back, s);
}

#[test]
fn missing_jammer_data_fails_jam_validation() {
    let s = paper(1);
    let mut v: serde_json::Value = serde_json::from_str(&s.to_json()).unwrap();
    let obj = v.as_object_mut().unwrap();
    obj.remove("jam_powers");
    obj.remove("jam_channel_gain");
    obj.remove("jam_noise");
    let loaded = Scenario::from_json(&v.to_string()).unwrap();
    loaded.validate_for(Mode::Eav).unwrap();
    assert!(matches!(loaded.validate_for(Mode::Jam), Err(Error::Validation { .. })));
}

#[test]
fn coincident_target_and_anchor_rejected() {
    let p = GeneratorParams { anchor_radius: 2.0, anchor_count: 4, ..GeneratorParams::desk() };
    match generate_paper_scenario(&p) {
        Err(Error::Construction(msg)) => assert!(msg.contains("anchor"), "{msg}"),
        other => panic!("expected construction error, got {other:?}"),
    }
}
