use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use ecg_phase::neuralnet::{init_weights, read_checkpoint, write_checkpoint};
use ecg_phase::pipeline::{
    build_dataset, derive_seed, emit_curves, evaluate_split, render_signal, synth_corpus, train, RunReport, Stream,
};
use ecg_phase::rasterizer::{read_ppm, write_ppm, ImageRGB};
use ecg_phase::record_io::{
    encode_format212, load_csv, load_labels, load_record, synth_ecg, write_csv, ChannelSpec, RecordError,
    RecordHeader, Signal, EXCLUDED_RECORDS,
};
use serde::Serialize;

use crate::config::RunConfig;
use crate::error::CliError;

pub const CONFIG_FILE: &str = "config.json";
pub const SIGNALS_DIR: &str = "signals";
pub const IMAGES_DIR: &str = "images";
pub const INGEST_SKIPPED: &str = "ingest_skipped.json";
pub const RENDER_SKIPPED: &str = "render_skipped.json";
pub const CHECKPOINT: &str = "model.ckpt";
pub const METRICS: &str = "metrics.csv";
pub const REPORT: &str = "report.json";
pub const EVAL_REPORT: &str = "eval_report.json";

#[derive(Debug, Serialize)]
struct Skipped {
    record_id: String,
    reason: String,
}

fn write_file(path: &Path, bytes: impl AsRef<[u8]>) -> Result<(), CliError> {
    fs::write(path, bytes).map_err(|source| CliError::Write {
        path: path.to_path_buf(),
        source,
    })
}

fn create_dir(path: &Path) -> Result<(), CliError> {
    fs::create_dir_all(path).map_err(|source| CliError::Write {
        path: path.to_path_buf(),
        source,
    })
}

/// Files in `dir` with extension `ext`, sorted by name.
fn files_with_extension(dir: &Path, ext: &str) -> Result<Vec<PathBuf>, CliError> {
    let entries = fs::read_dir(dir).map_err(|source| CliError::Read {
        path: dir.to_path_buf(),
        source,
    })?;
    let mut files: Vec<PathBuf> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_file() && p.extension().is_some_and(|e| e == ext))
        .collect();
    files.sort();
    Ok(files)
}

fn stem(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default()
}

/// Empties (or creates) a stage's output directory so reruns leave no stale files.
fn reset_dir(dir: &Path) -> Result<(), CliError> {
    if dir.exists() {
        fs::remove_dir_all(dir).map_err(|source| CliError::Write {
            path: dir.to_path_buf(),
            source,
        })?;
    }
    create_dir(dir)
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    write_file(path, serde_json::to_string_pretty(value).expect("serializable") + "\n")
}

pub fn write_config(config: &RunConfig) -> Result<(), CliError> {
    create_dir(&config.output_dir)?;
    write_file(&config.output_dir.join(CONFIG_FILE), config.to_json())
}

fn read_signals(config: &RunConfig) -> Result<(Vec<Signal>, Vec<Skipped>), CliError> {
    if config.synth {
        let signals = synth_corpus(
            &load_labels(),
            config.synth_duration_s,
            config.synth_sampling_rate,
            config.seed,
        )
        .map_err(|source| CliError::Record {
            record_id: "synthetic corpus".into(),
            source,
        })?;
        return Ok((signals, Vec::new()));
    }

    let dir = &config.data_dir;
    let mut signals = Vec::new();
    let mut skipped = Vec::new();
    for path in files_with_extension(dir, "hea")? {
        let record_id = stem(&path);
        match load_record(dir, &record_id, &config.channel) {
            Ok(signal) => signals.push(signal),
            Err(e @ RecordError::ChannelAbsent(_)) => skipped.push(Skipped {
                record_id,
                reason: e.to_string(),
            }),
            Err(source) => return Err(CliError::Record { record_id, source }),
        }
    }
    for path in files_with_extension(dir, "csv")? {
        let signal = load_csv(&path, config.csv_sampling_rate).map_err(|source| CliError::Record {
            record_id: stem(&path),
            source,
        })?;
        signals.push(signal);
    }
    if signals.is_empty() && skipped.is_empty() {
        return Err(CliError::NoRecords(dir.clone()));
    }
    Ok((signals, skipped))
}

/// Reads the raw records and caches one CSV signal per usable record.
pub fn ingest(config: &RunConfig) -> Result<usize, CliError> {
    write_config(config)?;
    let (signals, skipped) = read_signals(config)?;
    let out = config.output_dir.join(SIGNALS_DIR);
    reset_dir(&out)?;
    for signal in &signals {
        let mut buf = Vec::new();
        write_csv(signal, &mut buf).expect("writing to memory");
        write_file(&out.join(format!("{}.csv", signal.record_id)), buf)?;
    }
    write_json(&config.output_dir.join(INGEST_SKIPPED), &skipped)?;
    println!("ingest: {} signals, {} skipped", signals.len(), skipped.len());
    Ok(signals.len())
}

/// Renders every cached signal to `<record_id>.ppm`.
pub fn render(config: &RunConfig) -> Result<usize, CliError> {
    write_config(config)?;
    let signals_dir = config.output_dir.join(SIGNALS_DIR);
    let out = config.output_dir.join(IMAGES_DIR);
    reset_dir(&out)?;
    let render_config = config.render();
    let mut skipped = Vec::new();
    let mut count = 0;
    for path in files_with_extension(&signals_dir, "csv")? {
        let record_id = stem(&path);
        let signal = load_csv(&path, None).map_err(|source| CliError::Record {
            record_id: record_id.clone(),
            source,
        })?;
        match render_signal(&signal, &render_config) {
            Ok(image) => {
                write_file(&out.join(format!("{record_id}.ppm")), write_ppm(&image))?;
                count += 1;
            }
            Err(e) => skipped.push(Skipped {
                record_id,
                reason: e.to_string(),
            }),
        }
    }
    write_json(&config.output_dir.join(RENDER_SKIPPED), &skipped)?;
    println!("render: {count} images, {} skipped", skipped.len());
    Ok(count)
}

fn load_images(config: &RunConfig, ids: &[&String]) -> Result<BTreeMap<String, ImageRGB>, CliError> {
    let dir = config.output_dir.join(IMAGES_DIR);
    let mut images = BTreeMap::new();
    for id in ids {
        let path = dir.join(format!("{id}.ppm"));
        // Absent images are reported by the dataset builder.
        let Ok(bytes) = fs::read(&path) else { continue };
        let image = read_ppm(&bytes).map_err(|source| CliError::Image { path, source })?;
        images.insert(id.to_string(), image);
    }
    Ok(images)
}

/// Trains from the rendered images and writes checkpoint, curves and report.
pub fn train_cmd(config: &RunConfig) -> Result<RunReport, CliError> {
    write_config(config)?;
    let split = &config.split;
    let ids: Vec<&String> = split.train.iter().chain(&split.test).collect();
    let images = load_images(config, &ids)?;
    let (train_set, test_set) = build_dataset(&images, &load_labels(), split)?;

    let train_config = config.train();
    let model = init_weights(config.model, derive_seed(config.seed, Stream::Init));
    let (model, metrics) = train(model, &train_set, &test_set, &train_config)?;

    let snapshot = config.snapshot();
    write_file(&config.output_dir.join(CHECKPOINT), write_checkpoint(&model, &snapshot))?;
    emit_curves(&metrics, &config.output_dir.join(METRICS))?;
    let report = evaluate_split(&model, &train_set, &test_set, config.seed, snapshot)?;
    write_file(&config.output_dir.join(REPORT), report.to_json())?;
    print_summary("train", &report);
    Ok(report)
}

/// Scores a checkpoint on the split, optionally keeping only `records`.
pub fn eval(
    config: &RunConfig,
    checkpoint: &Path,
    records: Option<&[String]>,
    report_path: &Path,
) -> Result<RunReport, CliError> {
    write_config(config)?;
    let bytes = fs::read(checkpoint).map_err(|source| CliError::Read {
        path: checkpoint.to_path_buf(),
        source,
    })?;
    let (model, _) = read_checkpoint(&bytes).map_err(|source| CliError::Checkpoint {
        path: checkpoint.to_path_buf(),
        source,
    })?;

    let mut split = config.split.clone();
    if let Some(keep) = records {
        for id in keep {
            if !split.train.contains(id) && !split.test.contains(id) {
                return Err(CliError::Usage(format!("record {id} is not in the split")));
            }
        }
        split.train.retain(|id| keep.contains(id));
        split.test.retain(|id| keep.contains(id));
    }
    let ids: Vec<&String> = split.train.iter().chain(&split.test).collect();
    let images = load_images(config, &ids)?;
    let (train_set, test_set) = build_dataset(&images, &load_labels(), &split)?;
    let report = evaluate_split(&model, &train_set, &test_set, config.seed, config.snapshot())?;
    write_file(report_path, report.to_json())?;
    print_summary("eval", &report);
    Ok(report)
}

pub fn run_all(config: &RunConfig) -> Result<RunReport, CliError> {
    ingest(config)?;
    render(config)?;
    train_cmd(config)
}

fn print_summary(stage: &str, report: &RunReport) {
    let pct = |v: Option<f64>| v.map_or("-".to_string(), |a| format!("{:.2}%", a * 100.0));
    let s = &report.summary;
    println!(
        "{stage}: train {} test {} healthy-test {} disease-test {}",
        pct(s.train),
        pct(s.test),
        pct(s.healthy_test),
        pct(s.disease_test)
    );
}

const SYNTH_GAIN: f64 = 200.0;
const SYNTH_BASELINE: i32 = 1024;

fn to_adu(mv: f64) -> i32 {
    ((mv * SYNTH_GAIN).round() as i32 + SYNTH_BASELINE).clamp(-2048, 2047)
}

/// Writes the synthetic corpus as two-channel format-212 records in
/// `dir`, plus the four excluded records without an MLII lead.
pub fn synth(config: &RunConfig, dir: &Path) -> Result<usize, CliError> {
    create_dir(dir)?;
    let labeled = synth_corpus(
        &load_labels(),
        config.synth_duration_s,
        config.synth_sampling_rate,
        config.seed,
    )
    .map_err(|source| CliError::Record {
        record_id: "synthetic corpus".into(),
        source,
    })?;
    let mut records: Vec<(Signal, [&str; 2])> = labeled.into_iter().map(|s| (s, ["MLII", "V5"])).collect();
    for (i, id) in EXCLUDED_RECORDS.iter().enumerate() {
        let mut signal = synth_ecg(
            config.synth_duration_s,
            config.synth_sampling_rate,
            70.0,
            0.02,
            derive_seed(config.seed, Stream::Synth) ^ i as u64,
        )
        .map_err(|source| CliError::Record {
            record_id: id.to_string(),
            source,
        })?;
        signal.record_id = id.to_string();
        records.push((signal, ["V5", "V2"]));
    }

    for (signal, names) in &records {
        let id = &signal.record_id;
        let frames: Vec<Vec<i32>> = signal
            .samples
            .iter()
            .map(|&v| vec![to_adu(v), to_adu(0.6 * v)])
            .collect();
        let bytes = encode_format212(&frames).map_err(|source| CliError::Record {
            record_id: id.clone(),
            source,
        })?;
        let file_name = format!("{id}.dat");
        let header = RecordHeader {
            record_id: id.clone(),
            n_channels: 2,
            sampling_rate: signal.sampling_rate,
            n_samples: signal.len(),
            channels: names
                .iter()
                .map(|name| ChannelSpec {
                    file_name: file_name.clone(),
                    name: name.to_string(),
                    format_code: 212,
                    gain: SYNTH_GAIN,
                    baseline: SYNTH_BASELINE,
                })
                .collect(),
        };
        write_file(&dir.join(&file_name), bytes)?;
        write_file(&dir.join(format!("{id}.hea")), header.to_text())?;
    }
    println!("synth: wrote {} records to {}", records.len(), dir.display());
    Ok(records.len())
}
