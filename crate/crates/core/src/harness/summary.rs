use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::trial::TrialRecord;
use crate::engine::Technique;
use crate::synth::Expertise;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ConditionKey {
    pub technique: Technique,
    pub breadth: usize,
    pub depth: usize,
    /// d3 in hundredths of a degree so the key is totally ordered.
    pub size_centideg: i64,
}

impl ConditionKey {
    pub fn of(r: &TrialRecord) -> Self {
        Self { technique: r.technique, breadth: r.breadth, depth: r.depth, size_centideg: (r.size * 100.0).round() as i64 }
    }

    pub fn new(technique: Technique, breadth: usize, depth: usize, size: f64) -> Self {
        Self { technique, breadth, depth, size_centideg: (size * 100.0).round() as i64 }
    }

    pub fn size(&self) -> f64 {
        self.size_centideg as f64 / 100.0
    }

    pub fn structure(&self) -> String {
        vec![self.breadth.to_string(); self.depth].join("x")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub technique: Technique,
    pub structure: String,
    pub size: f64,
    pub expertise: Expertise,
    pub trials: usize,
    pub errors: usize,
    /// Fraction of trials that did not end in the target leaf; absent when
    /// the condition has no trials.
    pub er: Option<f64>,
    pub ct_trials: usize,
    pub mean_ct_ms: Option<f64>,
    pub sd_ct_ms: Option<f64>,
}

#[derive(Debug, Clone, Default)]
struct Acc {
    trials: usize,
    errors: usize,
    cts: Vec<f64>,
}

/// Per-condition CT and ER for Novice and Experienced trials. Training trials
/// are excluded; CT averages correct trials only.
pub fn summarize(records: &[TrialRecord]) -> Vec<SummaryRow> {
    let mut groups: BTreeMap<ConditionKey, BTreeMap<Expertise, Acc>> = BTreeMap::new();
    for r in by_index(records) {
        let per = groups.entry(ConditionKey::of(r)).or_insert_with(|| {
            [Expertise::Novice, Expertise::Experienced].into_iter().map(|e| (e, Acc::default())).collect()
        });
        let Some(acc) = per.get_mut(&r.expertise) else { continue };
        acc.trials += 1;
        if r.correct {
            if let Some(ct) = r.ct_ms {
                acc.cts.push(ct);
            }
        } else {
            acc.errors += 1;
        }
    }
    let mut rows = Vec::new();
    for (key, per) in groups {
        for (expertise, acc) in per {
            let (mean, sd) = mean_sd(&acc.cts);
            rows.push(SummaryRow {
                technique: key.technique,
                structure: key.structure(),
                size: key.size(),
                expertise,
                trials: acc.trials,
                errors: acc.errors,
                er: (acc.trials > 0).then(|| acc.errors as f64 / acc.trials as f64),
                ct_trials: acc.cts.len(),
                mean_ct_ms: mean,
                sd_ct_ms: sd,
            });
        }
    }
    rows
}

/// Records in index order, so floating-point sums do not depend on the order
/// trials finished in.
pub(crate) fn by_index(records: &[TrialRecord]) -> Vec<&TrialRecord> {
    let mut sorted: Vec<&TrialRecord> = records.iter().collect();
    sorted.sort_by_key(|r| r.index);
    sorted
}

pub(crate) fn mean_sd(xs: &[f64]) -> (Option<f64>, Option<f64>) {
    if xs.is_empty() {
        return (None, None);
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let sd = (xs.len() > 1).then(|| (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt());
    (Some(mean), sd)
}

pub fn write_csv<W: std::io::Write, R: Serialize>(w: W, rows: &[R]) -> Result<(), csv::Error> {
    let mut out = csv::Writer::from_writer(w);
    for row in rows {
        out.serialize(row)?;
    }
    out.flush()?;
    Ok(())
}

pub fn to_csv_string<R: Serialize>(rows: &[R]) -> String {
    let mut buf = Vec::new();
    write_csv(&mut buf, rows).expect("in-memory CSV");
    String::from_utf8(buf).expect("CSV is UTF-8")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::trial::Outcome;

    fn record(technique: Technique, expertise: Expertise, correct: bool, ct: f64) -> TrialRecord {
        TrialRecord {
            index: 0,
            technique,
            breadth: 4,
            depth: 3,
            size: 10.0,
            unit: 0,
            slot: 0,
            repetition: 1,
            expertise,
            seed: 0,
            target: vec![0, 0, 0],
            bent_class: 0,
            selected: None,
            outcome: Outcome::Leaf,
            correct,
            ct_ms: Some(ct),
            open_time_ms: Some(1000.0),
            events: vec![],
            saccade_landings: vec![],
            error: None,
        }
    }

    #[test]
    fn er_counts_errors_and_ct_uses_correct_trials() {
        let rows = summarize(&[
            record(Technique::Lattice, Expertise::Experienced, true, 1000.0),
            record(Technique::Lattice, Expertise::Experienced, true, 2000.0),
            record(Technique::Lattice, Expertise::Experienced, false, 9000.0),
            record(Technique::Lattice, Expertise::Training, false, 9000.0),
        ]);
        assert_eq!(rows.len(), 2);
        let novice = &rows[0];
        assert_eq!((novice.expertise, novice.trials, novice.er), (Expertise::Novice, 0, None));
        let exp = &rows[1];
        assert_eq!(exp.trials, 3);
        assert!((exp.er.unwrap() - 1.0 / 3.0).abs() < 1e-12);
        assert_eq!(exp.mean_ct_ms, Some(1500.0));
    }

    #[test]
    fn all_correct_condition_has_zero_er() {
        let rows = summarize(&[record(Technique::BorderPie, Expertise::Novice, true, 1.0)]);
        assert_eq!(rows[0].er, Some(0.0));
        let csv = to_csv_string(&rows);
        assert!(csv.starts_with("technique,structure,size,expertise,trials,errors,er,ct_trials,mean_ct_ms,sd_ct_ms\n"));
        assert!(csv.contains("border_pie,4x4x4,10.0,novice,1,0,0.0,1,1.0,\n"), "{csv}");
        assert!(csv.contains("border_pie,4x4x4,10.0,experienced,0,0,,0,,\n"), "{csv}");
    }
}
