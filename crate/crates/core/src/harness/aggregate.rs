use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use super::montecarlo::TrialRecord;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GroupKey {
    Omega1,
    PMaxDbm,
    NTx,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Stat {
    pub mean: f64,
    /// Sample standard deviation; zero for a single value.
    pub std: f64,
}

impl Stat {
    fn of(values: &[f64]) -> Option<Stat> {
        if values.is_empty() {
            return None;
        }
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let std = if values.len() < 2 {
            0.0
        } else {
            (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
        };
        Some(Stat { mean, std })
    }
}

/// Statistics of the successful records sharing the same group values.
/// Coordinates that are not grouped on are left empty.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub omega1: Option<f64>,
    pub p_max_dbm: Option<f64>,
    pub n_tx: Option<usize>,
    pub count: usize,
    pub sum_rate: Stat,
    pub mse_extracted: Stat,
    pub mse_relaxed: Stat,
    pub iters: Stat,
}

type Key = (Option<f64>, Option<f64>, Option<usize>);

fn key_of(r: &TrialRecord, keys: &[GroupKey]) -> Key {
    (
        keys.contains(&GroupKey::Omega1).then_some(r.omega1),
        keys.contains(&GroupKey::PMaxDbm).then_some(r.p_max_dbm),
        keys.contains(&GroupKey::NTx).then_some(r.n_tx),
    )
}

fn cmp_key(a: &Key, b: &Key) -> Ordering {
    let f = |x: &Option<f64>, y: &Option<f64>| x.unwrap_or(0.0).total_cmp(&y.unwrap_or(0.0));
    f(&a.0, &b.0).then(f(&a.1, &b.1)).then(a.2.cmp(&b.2))
}

/// Mean and standard deviation of the sum rate, MSE and iteration count per
/// group, sorted by the group values. Failed records are skipped; a group
/// without any usable record is omitted with a warning.
pub fn aggregate(records: &[TrialRecord], keys: &[GroupKey]) -> Vec<SummaryRow> {
    let mut groups: Vec<(Key, Vec<&TrialRecord>)> = Vec::new();
    for r in records {
        let k = key_of(r, keys);
        match groups.iter_mut().find(|(g, _)| cmp_key(g, &k) == Ordering::Equal) {
            Some((_, members)) => members.push(r),
            None => groups.push((k, vec![r])),
        }
    }
    groups.sort_by(|a, b| cmp_key(&a.0, &b.0));
    let mut rows = Vec::new();
    for (key, members) in groups {
        let ok: Vec<&TrialRecord> = members
            .into_iter()
            .filter(|r| r.status.is_success() && r.sum_rate.is_some() && r.mse_extracted.is_some())
            .collect();
        let column = |f: &dyn Fn(&TrialRecord) -> Option<f64>| ok.iter().filter_map(|r| f(r)).collect::<Vec<f64>>();
        let stats = (
            Stat::of(&column(&|r| r.sum_rate)),
            Stat::of(&column(&|r| r.mse_extracted)),
            Stat::of(&column(&|r| r.mse_relaxed.or(r.mse_extracted))),
            Stat::of(&column(&|r| Some(r.iters as f64))),
        );
        match stats {
            (Some(sum_rate), Some(mse_extracted), Some(mse_relaxed), Some(iters)) => rows.push(SummaryRow {
                omega1: key.0,
                p_max_dbm: key.1,
                n_tx: key.2,
                count: ok.len(),
                sum_rate,
                mse_extracted,
                mse_relaxed,
                iters,
            }),
            _ => log::warn!("group {key:?} has no successful records; omitted"),
        }
    }
    rows
}
