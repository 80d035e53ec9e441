use serde::{Deserialize, Serialize};

use super::{ShiftError, ShiftManifest};

/// One leave-one-out run: train on every cluster's train split except `held_out`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Experiment {
    pub name: String,
    pub held_out: String,
    /// Sorted.
    pub train_ids: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EvalSet {
    pub name: String,
    pub query_ids: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExperimentPlan {
    pub experiments: Vec<Experiment>,
    pub eval_sets: Vec<EvalSet>,
}

impl ExperimentPlan {
    pub fn experiment(&self, name: &str) -> Option<&Experiment> {
        self.experiments.iter().find(|e| e.name == name)
    }
}

/// Name of the training set that holds out `cluster`.
pub fn experiment_name(cluster: &str) -> String {
    format!("not_{cluster}")
}

pub fn leave_one_out_plan(manifest: &ShiftManifest) -> Result<ExperimentPlan, ShiftError> {
    let trainable = manifest
        .clusters
        .iter()
        .filter(|c| !c.train.is_empty())
        .count();
    if manifest.clusters.len() < 2 || trainable < 2 {
        return Err(ShiftError::TooFewClusters(trainable));
    }
    let experiments = manifest
        .clusters
        .iter()
        .enumerate()
        .map(|(i, held)| {
            let mut train_ids: Vec<String> = manifest
                .clusters
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .flat_map(|(_, c)| c.train.iter().cloned())
                .collect();
            train_ids.sort_unstable();
            Experiment {
                name: experiment_name(&held.name),
                held_out: held.name.clone(),
                train_ids,
            }
        })
        .collect();
    let eval_sets = manifest
        .clusters
        .iter()
        .map(|c| EvalSet {
            name: c.name.clone(),
            query_ids: c.test.clone(),
        })
        .collect();
    Ok(ExperimentPlan {
        experiments,
        eval_sets,
    })
}
