use frame_pbo::abc::{AbcConfig, DesignSearch};
use frame_pbo::constraints::{AllowableTables, Evaluator, EvaluatorConfig, LevelOutcome, PerformanceLevel};
use frame_pbo::frame::{build_case, build_frame, CaseId, DesignVector, FrameLayout, GeometryConfig, Grouping};
use frame_pbo::sections::{Detailing, Materials, SectionCatalogs, SectionLibrary};

fn library() -> SectionLibrary {
    let m = Materials::default();
    SectionLibrary::new(&SectionCatalogs::builtin(&m), &m, &Detailing::default(), 5000.0).unwrap()
}

fn evaluator(model: frame_pbo::frame::FrameModel, levels: Vec<PerformanceLevel>) -> Evaluator {
    Evaluator::new(model, library(), AllowableTables::builtin(), EvaluatorConfig::default(), levels).unwrap()
}

fn extreme(ev: &Evaluator, max: bool) -> DesignVector {
    let flat: Vec<u32> = ev.bounds().iter().map(|&(lo, hi)| if max { hi } else { lo }).collect();
    DesignVector::from_flat(ev.model(), &flat).unwrap()
}

#[test]
fn case_studies_bracket_the_feasible_region() {
    for case in CaseId::ALL {
        let ev = evaluator(build_case(case, &GeometryConfig::default()).unwrap(), PerformanceLevel::ALL.to_vec());
        let heavy = ev.evaluate_detailed(&extreme(&ev, true)).unwrap();
        assert!(heavy.report.feasible(), "{case}: {:?}", heavy.report.active());
        for l in &heavy.levels {
            let LevelOutcome::Reached { state, .. } = &l.outcome else { panic!("{case} {}: {:?}", l.level, l.failure) };
            assert!(state.drifts.iter().all(|d| *d <= ev.tables().drift_limit(l.level)));
            let t = l.target.unwrap();
            assert!(t.t_e >= t.t_i * 0.999 && t.delta_t > 0.0);
        }
        let light = ev.evaluate(&extreme(&ev, false)).unwrap();
        assert!(light.total > 0.0, "{case}");
        assert!(light.weight < heavy.report.weight);
    }
}

#[test]
fn targets_grow_with_level() {
    let ev = evaluator(build_case(CaseId::Story8, &GeometryConfig::default()).unwrap(), PerformanceLevel::ALL.to_vec());
    let e = ev.evaluate_detailed(&extreme(&ev, true)).unwrap();
    let d: Vec<f64> = e.levels.iter().map(|l| l.target.unwrap().delta_t).collect();
    assert!(d[0] < d[1] && d[1] < d[2], "{d:?}");
}

#[test]
fn design_search_reports_what_it_found() {
    let layout = FrameLayout { stories: 2, bays: 2, wall_bays: vec![], grouping: Grouping::PerKind };
    let model = build_frame(&layout, &GeometryConfig::default()).unwrap();
    let ev = evaluator(model, vec![PerformanceLevel::LS]);
    let search = DesignSearch::new(&ev);
    let cfg = AbcConfig { colony_size: 8, max_iterations: 10, runs: 2, seed: 5, ..Default::default() };
    let heavy = extreme(&ev, true);
    let res = search.optimize(&cfg, std::slice::from_ref(&heavy)).unwrap();
    assert_eq!(res.best_report, ev.evaluate(&res.best_design).unwrap());
    assert!(res.best_report.phi <= ev.evaluate(&heavy).unwrap().phi);
    assert_eq!(res.runs.runs.len(), 2);
    for r in &res.runs.runs {
        assert!(r.history.windows(2).all(|w| w[1].best_phi <= w[0].best_phi));
        assert_eq!(r.history.len(), 11);
    }
    assert!(res.distinct_designs <= res.runs.runs.iter().map(|r| r.evaluations).sum());

    let again = DesignSearch::new(&ev).optimize(&cfg, std::slice::from_ref(&heavy)).unwrap();
    assert_eq!(again.best_design, res.best_design);
    assert_eq!(again.runs, res.runs);
}
