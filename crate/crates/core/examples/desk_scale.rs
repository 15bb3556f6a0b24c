//! Trains TransE on a small synthetic benchmark and prints the ablation table.
//!
//! cargo run --release -p invkge-core --example desk_scale -- [seed] [steps]

use std::time::Instant;

use invkge::eval::{ablate, AblationVariant, EvalConfig, EvalReport, Weighting};
use invkge::synthetic::generate_synthetic_splits;
use invkge::train::{train, TrainConfig};

fn main() -> invkge::Result<()> {
    let mut args = std::env::args().skip(1);
    let seed: u64 = args.next().and_then(|s| s.parse().ok()).unwrap_or(0);
    let steps: usize = args.next().and_then(|s| s.parse().ok()).unwrap_or(5000);

    let splits = generate_synthetic_splits(seed, 500, 10, 5000, 0.1)?;
    let config = TrainConfig {
        dim: 32,
        gamma: 6.0,
        negatives: 32,
        batch_size: 256,
        learning_rate: 0.01,
        steps,
        seed,
        ..TrainConfig::default()
    };
    let t0 = Instant::now();
    let out = train(&splits, &config)?;
    println!("trained {steps} steps in {:.1?}", t0.elapsed());

    let n = splits.ikg_entities().len();
    let baseline = (1..=n).map(|k| 1.0 / k as f64).sum::<f64>() / n as f64;
    println!("random-ranking MRR {baseline:.4}");

    let degree = EvalConfig::new(Weighting::Degree { delta: 0.1 });
    let mut reports = ablate(&out.tables, &splits, &degree, &AblationVariant::STANDARD_SET)?;
    let mut corr = ablate(&out.tables, &splits, &EvalConfig::new(Weighting::Correlation), &[AblationVariant::Full])?;
    corr[0].name = "correlation".into();
    reports.append(&mut corr);
    print!("{}", EvalReport::to_csv(&reports));
    Ok(())
}
