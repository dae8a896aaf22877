//! Fitted Q-iteration on fixed datasets. The multi-task variant fits one
//! shared-representation network to all tasks' Bellman targets at once;
//! single-task FQI is the same routine with one task.

use rand::Rng;

use super::{bellman_targets, AlgoError};
use crate::envs::{Action, EnvSpec, Transition};
use crate::mtnet::{ArchitecturePreset, MultiTaskNetwork, Sample, Signal, TaskShape, UpdateOpts};
use crate::nn::LossSpec;
use crate::snapshot::MtSnapshot;

#[derive(Debug, Clone)]
pub struct FqiConfig {
    /// Bellman iterations K.
    pub iterations: usize,
    /// Full-batch Adam passes fitting each iteration's targets.
    pub adam_epochs: usize,
    pub lr: f64,
    /// Record a network snapshot every this many iterations (the initial
    /// and final nets are always recorded).
    pub snapshot_every: usize,
    pub preset: ArchitecturePreset,
}

impl Default for FqiConfig {
    fn default() -> Self {
        FqiConfig {
            iterations: 50,
            adam_epochs: 20,
            lr: 1e-3,
            snapshot_every: 1,
            preset: ArchitecturePreset::mfqi(),
        }
    }
}

/// Trained network plus the per-iteration snapshots `(k, Q_k)`.
pub struct FqiRun {
    pub net: MultiTaskNetwork,
    pub snapshots: Vec<(usize, MtSnapshot)>,
    /// Per-iteration mean regression loss (diagnostic).
    pub fit_losses: Vec<f64>,
}

pub fn fqi_task_shapes(specs: &[EnvSpec]) -> Vec<TaskShape> {
    specs
        .iter()
        .map(|s| TaskShape {
            obs_dim: s.obs_dim(),
            output_dim: s.actions().n_discrete(),
            action_dim: 0,
        })
        .collect()
}

/// Runs (M)FQI: at each iteration, freeze the Bellman targets under the
/// current network, then fit with `adam_epochs` full-dataset Adam steps.
/// Datasets are immutable; unequal task datasets are truncated to the
/// smallest so every task contributes equally.
pub fn fqi_run<R: Rng>(
    specs: &[EnvSpec],
    datasets: &[Vec<Transition>],
    cfg: &FqiConfig,
    rng: &mut R,
) -> Result<FqiRun, AlgoError> {
    assert_eq!(specs.len(), datasets.len());
    for (t, d) in datasets.iter().enumerate() {
        if d.is_empty() {
            return Err(AlgoError::EmptyDataset(t));
        }
    }
    let n = datasets.iter().map(Vec::len).min().unwrap();
    let mut net = MultiTaskNetwork::new(cfg.preset.clone(), &fqi_task_shapes(specs), rng)?;

    // Observations and action slots never change; precompute once.
    let obs: Vec<Vec<Vec<f64>>> = datasets
        .iter()
        .enumerate()
        .map(|(t, d)| d[..n].iter().map(|tr| specs[t].observe(&tr.state)).collect())
        .collect();
    let mut slots: Vec<Vec<usize>> = Vec::with_capacity(datasets.len());
    for d in datasets {
        let mut task_slots = Vec::with_capacity(n);
        for tr in &d[..n] {
            match &tr.action {
                Action::Discrete(i) => task_slots.push(*i),
                Action::Continuous(_) => {
                    return Err(AlgoError::Config("fqi needs discrete actions".into()))
                }
            }
        }
        slots.push(task_slots);
    }
    let refs: Vec<Vec<&Transition>> =
        datasets.iter().map(|d| d[..n].iter().collect()).collect();

    let mut snapshots = vec![(0, MtSnapshot::of(&net))];
    let mut fit_losses = Vec::with_capacity(cfg.iterations);
    let opts = UpdateOpts { loss: LossSpec::mse(), lr: cfg.lr, l2: 0.0 };
    for k in 0..cfg.iterations {
        let targets = bellman_targets(&net, &refs, specs);
        let mut last_loss = 0.0;
        for _ in 0..cfg.adam_epochs {
            let batch: Vec<Vec<Sample>> = (0..specs.len())
                .map(|t| {
                    (0..n)
                        .map(|i| Sample {
                            x: &obs[t][i],
                            extra: None,
                            signal: Signal::Target { slot: slots[t][i], value: targets[t][i] },
                        })
                        .collect()
                })
                .collect();
            last_loss = net.mt_update(&batch, &opts)?;
        }
        fit_losses.push(last_loss);
        let iteration = k + 1;
        if iteration % cfg.snapshot_every == 0 || iteration == cfg.iterations {
            snapshots.push((iteration, MtSnapshot::of(&net)));
        }
    }
    Ok(FqiRun { net, snapshots, fit_losses })
}
