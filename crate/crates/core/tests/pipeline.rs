use fluidsense::ao::{check_feasible, run_ao};
use fluidsense::baselines::{run_scheme, SchemeId};
use fluidsense::crb::evaluate;
use fluidsense::fa_pso::ArrayLayout;
use fluidsense::output::save_results;
use fluidsense::scenario::{load_scenario, Scenario};

fn small() -> Scenario {
    load_scenario(concat!(env!("CARGO_MANIFEST_DIR"), "/tests/data/small.toml")).unwrap()
}

#[test]
fn every_scheme_is_feasible_and_monotone() {
    let s = small();
    for scheme in SchemeId::ALL {
        let sol = run_scheme(scheme, &s).unwrap();
        check_feasible(&s, &sol.path, &sol.covariances, &sol.layouts).unwrap();
        let obj = sol.objectives();
        assert!(obj.windows(2).all(|w| w[1] >= w[0] - 1e-9 * w[0].abs()), "{scheme}: {obj:?}");
        assert_eq!(sol.trace.len(), sol.iterations_used + 1);
        let again = evaluate(&s, &sol.path, &sol.covariances, &sol.layouts).unwrap();
        assert_eq!(again, sol.report);
    }
}

#[test]
fn baselines_keep_their_fixed_arrays() {
    let s = small();
    let sula = ArrayLayout::sula(&s).unwrap();
    let dula = ArrayLayout::dula(&s).unwrap();
    let fixed = |scheme, layout: &ArrayLayout| {
        let sol = run_scheme(scheme, &s).unwrap();
        assert!(sol.layouts.iter().all(|l| l == layout), "{scheme}");
    };
    fixed(SchemeId::Sula, &sula);
    fixed(SchemeId::Dula, &dula);
    let tfao = run_scheme(SchemeId::Tfao, &s).unwrap();
    assert!(tfao.layouts.iter().all(|l| l.rx == sula.rx));
}

#[test]
fn movable_arrays_never_lose_to_their_starting_layout() {
    // The proposed scheme starts from the dense arrays and only accepts improvements.
    let s = small();
    let proposed = run_scheme(SchemeId::Proposed, &s).unwrap();
    let dula = run_scheme(SchemeId::Dula, &s).unwrap();
    assert!(proposed.report.reciprocal_objective >= dula.trace[0].objective);
    assert!(proposed.report.avg_crb < dula.trace[0].avg_crb);
}

#[test]
fn results_are_written_and_reproducible() {
    let s = small();
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    save_results(&run_ao(&s).unwrap(), a.path()).unwrap();
    save_results(&run_ao(&s).unwrap(), b.path()).unwrap();
    for f in ["solution.json", "crb_per_target.csv", "convergence.csv", "path.csv"] {
        let x = std::fs::read(a.path().join(f)).unwrap();
        assert_eq!(x, std::fs::read(b.path().join(f)).unwrap(), "{f}");
    }
    let json: serde_json::Value = serde_json::from_slice(&std::fs::read(a.path().join("solution.json")).unwrap()).unwrap();
    assert_eq!(json["slots"].as_array().unwrap().len(), s.slots);
    let crb = std::fs::read_to_string(a.path().join("crb_per_target.csv")).unwrap();
    assert_eq!(crb.lines().count(), 1 + s.slots * s.target_count());
}

#[test]
fn target_directly_below_gives_an_infinite_entry() {
    let mut s = small();
    let path = fluidsense::trajectory::Path::straight_line(&s);
    s.targets[0].position = path.points[2];
    let covs = vec![fluidsense::beamform::BeamCovariance::isotropic(s.tx_antennas, s.max_power_w); s.slots];
    let layouts = vec![ArrayLayout::sula(&s).unwrap(); s.slots];
    let report = evaluate(&s, &path, &covs, &layouts).unwrap();
    assert!(report.per_slot_per_target[2][0].is_infinite());
    assert_eq!(report.infinite_count, 1);
    assert!(report.avg_crb.is_finite());
    assert_eq!(fluidsense::output::num(report.per_slot_per_target[2][0]), "inf");
}

#[test]
fn quadrupling_power_only_rescales_the_solution() {
    // Every decision in the loop is invariant to a common power scale, and
    // multiplying by 4 is exact in floating point, so paths and layouts must
    // match bit for bit and every CRB must shrink by exactly 4.
    let s = small();
    let mut hot = s.clone();
    hot.max_power_w *= 4.0;
    for scheme in [SchemeId::Sula, SchemeId::Proposed] {
        let a = run_scheme(scheme, &s).unwrap();
        let b = run_scheme(scheme, &hot).unwrap();
        assert_eq!(a.path.points, b.path.points, "{scheme}");
        assert_eq!(a.layouts, b.layouts, "{scheme}");
        for (ra, rb) in a.report.per_slot_per_target.iter().flatten().zip(b.report.per_slot_per_target.iter().flatten()) {
            assert_eq!(*ra, 4.0 * rb);
        }
    }
}

#[test]
#[ignore = "does not hold on the reference scenario: the shared beam often serves a target best away from closest approach"]
fn lowest_crb_slot_is_near_closest_approach() {
    let s = fluidsense::scenario::default_scenario();
    let sol = run_ao(&s).unwrap();
    for k in 0..s.target_count() {
        let d = |n: usize| fluidsense::geometry::distance(sol.path.points[n], s.targets[k].position, s.altitude);
        let crb = |n: usize| sol.report.per_slot_per_target[n][k];
        let best = (0..s.slots).min_by(|&a, &b| crb(a).total_cmp(&crb(b))).unwrap();
        let closest = (0..s.slots).map(d).fold(f64::INFINITY, f64::min);
        assert!(d(best) <= 1.1 * closest, "target {}: {} m vs {} m", k + 1, d(best), closest);
    }
}
