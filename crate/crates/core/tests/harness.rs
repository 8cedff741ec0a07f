use knnrate::bounds;
use knnrate::harness::experiments::{setup, trial_data};
use knnrate::harness::{
    fit_rate, parse_csv, run_experiment, to_csv, ExperimentConfig, ExperimentKind, KRule,
};
use knnrate::{Error, Regressor};

const SMALL: &str = "\
experiment = regress
master_seed = 7
seeds = 3
n.ladder = 256, 512, 1024, 2048
k.rule = power
k.exponent = 2/3
density.kind = uniform-box
density.dim = 1
noise.kind = gaussian
noise.scale = 0.1
field.kind = tent
field.slope = 2
probes.resolution = 129
";

fn small() -> ExperimentConfig {
    ExperimentConfig::parse(SMALL, "small.cfg").unwrap()
}

#[test]
fn recorded_bounds_are_recomputable() {
    let cfg = small();
    let out = run_experiment(&cfg, ExperimentKind::Regress).unwrap();
    let s = setup(&cfg, ExperimentKind::Regress).unwrap();
    assert_eq!(out.records.len(), 12);
    for r in parse_csv(&to_csv(&out.records).unwrap(), "r.csv").unwrap() {
        assert_eq!(
            r.bound,
            bounds::holder_bound(&s.params, r.n, r.k, false).unwrap()
        );
        assert_eq!(r.k, (r.n as f64).powf(2.0 / 3.0).ceil() as usize);
        let reg = Regressor::new(trial_data(&cfg, &s, r.n, r.seed).unwrap(), r.k).unwrap();
        assert_eq!(r.value, reg.sup_error(&s.field, &s.probes).unwrap().sup);
    }
    let fit = fit_rate(&out.records, "sup_error").unwrap();
    assert_eq!(fit.rungs(), 4);
    assert!(fit.slope < 0.0);
}

#[test]
fn reruns_are_identical_and_seeds_matter() {
    let mut cfg = small();
    let a = to_csv(
        &run_experiment(&cfg, ExperimentKind::Regress)
            .unwrap()
            .records,
    )
    .unwrap();
    let b = to_csv(
        &run_experiment(&cfg, ExperimentKind::Regress)
            .unwrap()
            .records,
    )
    .unwrap();
    assert_eq!(a, b);
    cfg.master_seed = 8;
    let c = to_csv(
        &run_experiment(&cfg, ExperimentKind::Regress)
            .unwrap()
            .records,
    )
    .unwrap();
    assert_ne!(a, c);
}

#[test]
fn config_errors_carry_locations() {
    let bad = format!("{SMALL}bogus.key = 1\n");
    match ExperimentConfig::parse(&bad, "bad.cfg") {
        Err(Error::Parse { path, line, .. }) => assert_eq!((path.as_str(), line), ("bad.cfg", 14)),
        other => panic!("{other:?}"),
    }
    let dup = format!("{SMALL}seeds = 4\n");
    assert!(matches!(
        ExperimentConfig::parse(&dup, "dup.cfg"),
        Err(Error::Parse { line: 14, .. })
    ));
    let unsorted = SMALL.replace("256, 512, 1024, 2048", "512, 256, 1024, 2048");
    assert!(ExperimentConfig::parse(&unsorted, "u.cfg").is_err());
}

#[test]
fn kind_mismatch_is_rejected() {
    let cfg = small();
    assert!(matches!(
        run_experiment(&cfg, ExperimentKind::Maxima),
        Err(Error::Config(_))
    ));
}

#[test]
fn k_rules() {
    let cfg = small();
    assert_eq!(cfg.k_values(1000, Some(1.0), 1).unwrap(), vec![100]);
    let fixed = ExperimentConfig::parse(
        &SMALL.replace(
            "k.rule = power\nk.exponent = 2/3",
            "k.rule = fixed\nk.values = 3, 5",
        ),
        "f.cfg",
    )
    .unwrap();
    assert_eq!(fixed.k_rule, KRule::Fixed(vec![3, 5]));
    let opt = ExperimentConfig::parse(
        &SMALL.replace("k.rule = power\nk.exponent = 2/3", "k.rule = optimal"),
        "o.cfg",
    )
    .unwrap();
    assert_eq!(opt.k_values(4096, Some(1.0), 1).unwrap(), vec![256]);
}
