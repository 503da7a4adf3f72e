use super::DynamicsError;
use crate::scalar::Real;
use serde::{Deserialize, Serialize};
use std::io::Write;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairStats {
    pub pair: (usize, usize),
    pub proposals: u64,
    pub acceptances: u64,
    /// Sum of acceptance probabilities over proposals.
    pub probability_sum: f64,
}

impl PairStats {
    pub fn acceptance_rate(&self) -> f64 {
        if self.proposals == 0 {
            0.0
        } else {
            self.acceptances as f64 / self.proposals as f64
        }
    }

    /// Mean acceptance probability, a lower-variance version of the rate.
    pub fn mean_probability(&self) -> f64 {
        if self.proposals == 0 {
            0.0
        } else {
            self.probability_sum / self.proposals as f64
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SwapStats {
    pub pairs: Vec<PairStats>,
}

impl SwapStats {
    pub fn new(levels: usize) -> Self {
        Self {
            pairs: (0..levels.saturating_sub(1))
                .map(|k| PairStats { pair: (k, k + 1), proposals: 0, acceptances: 0, probability_sum: 0.0 })
                .collect(),
        }
    }

    pub fn total_proposals(&self) -> u64 {
        self.pairs.iter().map(|p| p.proposals).sum()
    }

    /// `[{pair, proposals, acceptances, acceptance_rate}, ...]`
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::Value::Array(
            self.pairs
                .iter()
                .map(|p| {
                    serde_json::json!({
                        "pair": [p.pair.0, p.pair.1],
                        "proposals": p.proposals,
                        "acceptances": p.acceptances,
                        "acceptance_rate": p.acceptance_rate(),
                    })
                })
                .collect(),
        )
    }
}

/// Acceptance probability a direct `(0, 2)` exchange would have had at each
/// pair-0 event, next to the adjacent `(0, 1)` probability.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ShadowStats {
    pub events: u64,
    pub adjacent_probability_sum: f64,
    pub direct_probability_sum: f64,
}

impl ShadowStats {
    pub fn mean_adjacent(&self) -> f64 {
        self.adjacent_probability_sum / self.events.max(1) as f64
    }

    pub fn mean_direct(&self) -> f64 {
        self.direct_probability_sum / self.events.max(1) as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RecordPolicy {
    /// Only replica 0, which targets `π`.
    #[default]
    BaseOnly,
    All,
}

/// Recorded samples, stored flat: sample `i`, replica `r`, coordinate `j`
/// lives at `(i * replicas + r) * dim + j`.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory<T> {
    pub dim: usize,
    pub replicas: usize,
    pub times: Vec<T>,
    pub samples: Vec<T>,
    /// Replica took part in an accepted swap since the previous record.
    pub swapped: Vec<bool>,
    pub swap_stats: SwapStats,
    pub shadow: Option<ShadowStats>,
    pub config_echo: serde_json::Value,
}

impl<T: Real> Trajectory<T> {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn sample(&self, i: usize, replica: usize) -> &[T] {
        let at = (i * self.replicas + replica) * self.dim;
        &self.samples[at..at + self.dim]
    }

    pub fn coordinate(&self, replica: usize, j: usize) -> Vec<T> {
        (0..self.len()).map(|i| self.sample(i, replica)[j]).collect()
    }

    pub fn points(&self, replica: usize) -> Vec<Vec<T>> {
        (0..self.len()).map(|i| self.sample(i, replica).to_vec()).collect()
    }

    /// Keeps samples whose index is a multiple of `every`, from `start` on.
    pub fn thinned_points(&self, replica: usize, start: usize, every: usize) -> Vec<Vec<T>> {
        (start..self.len()).step_by(every.max(1)).map(|i| self.sample(i, replica).to_vec()).collect()
    }

    /// `t,replica,x_1..x_d,swapped_flag`
    pub fn write_csv<W: Write>(&self, out: W) -> Result<(), DynamicsError> {
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["t".to_string(), "replica".to_string()];
        header.extend((1..=self.dim).map(|j| format!("x_{j}")));
        header.push("swapped_flag".into());
        w.write_record(&header).map_err(io)?;
        let mut row = Vec::with_capacity(self.dim + 3);
        for i in 0..self.len() {
            for r in 0..self.replicas {
                row.clear();
                row.push(self.times[i].as_f64().to_string());
                row.push(r.to_string());
                row.extend(self.sample(i, r).iter().map(|v| v.as_f64().to_string()));
                row.push(u8::from(self.swapped[i * self.replicas + r]).to_string());
                w.write_record(&row).map_err(io)?;
            }
        }
        w.flush().map_err(|e| DynamicsError::Io(e.to_string()))?;
        Ok(())
    }
}

fn io(e: csv::Error) -> DynamicsError {
    DynamicsError::Io(e.to_string())
}
