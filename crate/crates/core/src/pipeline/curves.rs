use std::io::{Read, Write};
use std::path::Path;

use super::{EpochMetrics, PipelineError, Result};

const HEADER: &str = "epoch,train_loss,train_acc,test_loss,test_acc";

fn fixed(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.6}")).unwrap_or_default()
}

/// One CSV row per epoch with six decimals; missing test metrics are empty.
pub fn write_curves<W: Write>(metrics: &[EpochMetrics], mut out: W) -> std::io::Result<()> {
    writeln!(out, "{HEADER}")?;
    for m in metrics {
        writeln!(
            out,
            "{},{:.6},{:.6},{},{}",
            m.epoch,
            m.train_loss,
            m.train_accuracy,
            fixed(m.test_loss),
            fixed(m.test_accuracy)
        )?;
    }
    Ok(())
}

pub fn emit_curves(metrics: &[EpochMetrics], path: &Path) -> Result<()> {
    let mut buf = Vec::new();
    write_curves(metrics, &mut buf).expect("writing to memory");
    std::fs::write(path, buf).map_err(|source| PipelineError::Io {
        path: path.display().to_string(),
        source,
    })
}

pub fn read_curves<R: Read>(reader: R) -> Result<Vec<EpochMetrics>> {
    let mut rdr = csv::Reader::from_reader(reader);
    let bad = |e: String| PipelineError::MalformedCurves(e);
    let num = |s: &str| s.parse::<f64>().map_err(|e| bad(format!("{s:?}: {e}")));
    let opt = |s: &str| if s.is_empty() { Ok(None) } else { num(s).map(Some) };
    rdr.records()
        .map(|rec| {
            let rec = rec.map_err(|e| bad(e.to_string()))?;
            if rec.len() != 5 {
                return Err(bad(format!("expected 5 fields, got {}", rec.len())));
            }
            Ok(EpochMetrics {
                epoch: rec[0].parse().map_err(|e| bad(format!("epoch: {e}")))?,
                train_loss: num(&rec[1])?,
                train_accuracy: num(&rec[2])?,
                test_loss: opt(&rec[3])?,
                test_accuracy: opt(&rec[4])?,
            })
        })
        .collect()
}
