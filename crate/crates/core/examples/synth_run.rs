//! Trains on the synthetic corpus with the default configuration and prints
//! the learning curve every 25 epochs.
//!
//! cargo run --release -p ecg-phase --example synth_run -- [seed] [duration_s] [epochs]

use std::collections::BTreeMap;
use std::time::Instant;

use ecg_phase::neuralnet::init_weights;
use ecg_phase::pipeline::*;
use ecg_phase::record_io::load_labels;

fn arg<T: std::str::FromStr>(i: usize, default: T) -> T {
    std::env::args().nth(i).and_then(|s| s.parse().ok()).unwrap_or(default)
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let seed: u64 = arg(1, 0);
    let duration: f64 = arg(2, 10.0);
    let epochs: usize = arg(3, 175);

    let labels = load_labels();
    let mut images = BTreeMap::new();
    for signal in synth_corpus(&labels, duration, 360.0, seed)? {
        images.insert(signal.record_id.clone(), render_signal(&signal, &RenderConfig::default())?);
    }
    let (train_set, test_set) = build_dataset(&images, &labels, &DatasetSplit::default())?;

    let config = TrainConfig { seed, epochs, ..TrainConfig::default() };
    let start = Instant::now();
    let model = init_weights(config.model, derive_seed(seed, Stream::Init));
    let (model, metrics) = train(model, &train_set, &test_set, &config)?;
    println!("epoch  train_loss  train_acc  test_loss  test_acc");
    for m in metrics.iter().filter(|m| m.epoch == 1 || m.epoch % 25 == 0) {
        println!(
            "{:>5}  {:>10.4}  {:>9.3}  {:>9.4}  {:>8.3}",
            m.epoch,
            m.train_loss,
            m.train_accuracy,
            m.test_loss.unwrap_or(f64::NAN),
            m.test_accuracy.unwrap_or(f64::NAN)
        );
    }
    let report = evaluate_split(&model, &train_set, &test_set, seed, serde_json::Value::Null)?;
    println!("{:#?}\n{:.0?}", report.summary, start.elapsed());
    Ok(())
}
