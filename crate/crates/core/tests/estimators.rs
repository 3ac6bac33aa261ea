//! Interval calibration on synthetic coins and report reproducibility.

use msplab::experiments::{
    broom_attack_experiment, hat_failure_experiment, run_estimate, ExperimentConfig, MeanEstimate, OutputFormat,
    Proportion, SeedSource,
};
use msplab::greedy::PolicyKind;
use msplab::partition::DistributionKind;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn intervals_cover_a_known_bias() {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    for (bias, trials) in [(0.5, 400u64), (0.3679, 1000), (0.05, 2000), (0.9, 300)] {
        let reps = 1000;
        let (mut wilson, mut hoeffding) = (0, 0);
        for _ in 0..reps {
            let flips: Vec<bool> = (0..trials).map(|_| rng.gen_bool(bias)).collect();
            let hits = flips.iter().filter(|&&f| f).count() as u64;
            let p = Proportion::new(hits, trials);
            wilson += usize::from(p.lo <= bias && bias <= p.hi);
            let m = MeanEstimate::from_values(flips.iter().map(|&f| f64::from(u8::from(f))));
            let [lo, hi] = m.ci99();
            hoeffding += usize::from(lo <= bias && bias <= hi);
        }
        assert!(wilson as f64 >= 0.98 * reps as f64, "wilson at {bias}: {wilson}/{reps}");
        assert!(hoeffding as f64 >= 0.98 * reps as f64, "hoeffding at {bias}: {hoeffding}/{reps}");
    }
}

fn config(instance: &str, algorithm: &str, trials: u64, seed: u64) -> ExperimentConfig {
    ExperimentConfig {
        instance: instance.into(),
        algorithm: algorithm.into(),
        weights: None,
        trials,
        seed,
        seed_source: SeedSource::Flag,
        emit: OutputFormat::Json,
        output: None,
    }
}

fn on_threads<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> T {
    rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap().install(f)
}

#[test]
fn reports_do_not_depend_on_thread_count() {
    for (instance, algorithm) in [("complete:6", "korula-pal"), ("hat:12:5", "supergreedy"), ("uniform:3:12", "optimistic")] {
        let cfg = config(instance, algorithm, 400, 21);
        let one = on_threads(1, || serde_json::to_vec(&run_estimate(&cfg).unwrap().report).unwrap());
        let four = on_threads(4, || serde_json::to_vec(&run_estimate(&cfg).unwrap().report).unwrap());
        assert_eq!(one, four, "{instance} {algorithm}");
    }
    let hat = |t| on_threads(t, || hat_failure_experiment(&[10, 20], (5, 1), PolicyKind::Supergreedy, 100, 4, None).unwrap());
    assert_eq!(serde_json::to_vec(&hat(1)).unwrap(), serde_json::to_vec(&hat(3)).unwrap());
    let broom = |t| on_threads(t, || broom_attack_experiment(12, DistributionKind::KorulaPal, 300, 4).unwrap());
    assert_eq!(serde_json::to_vec(&broom(1)).unwrap(), serde_json::to_vec(&broom(3)).unwrap());
}

#[test]
fn csv_records_line_up_with_the_report() {
    let run = run_estimate(&config("uniform:2:6", "pessimistic", 200, 5)).unwrap();
    assert_eq!(run.records.len(), 200);
    for (i, e) in run.report.per_element.iter().enumerate() {
        let hits = run.records.iter().filter(|r| r.indicators[i]).count() as u64;
        assert_eq!(hits, e.hits);
    }
    let mean = run.records.iter().map(|r| r.ratio).sum::<f64>() / 200.0;
    assert!((mean - run.report.mean).abs() < 1e-12);
}
