//! The shared-representation network: per-task input blocks `w_t`, one
//! shared trunk `h`, per-task heads `f_t`, computing `y_t = f_t(h(w_t(x)))`.
//!
//! Gradients from every task accumulate into the trunk while each task's
//! gradients reach only its own input block and head. The trunk can be
//! frozen (transfer learning), hard/soft-synced into a target copy, and
//! transplanted between networks with different task counts.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::nn::{adam_step, AdamState, Activation, Cache, DenseNet, LossSpec, NetGrads, NnError};

#[derive(Debug, thiserror::Error)]
pub enum MtNetError {
    #[error("unknown task id {task} (network has {tasks} tasks)")]
    UnknownTask { task: usize, tasks: usize },
    #[error("task {task} observation has dimension {got}, expected {expected}")]
    ObsShape { task: usize, expected: usize, got: usize },
    #[error("action input: {0}")]
    ActionInput(String),
    #[error("unequal per-task batch sizes: task {a} has {na}, task {b} has {nb}")]
    UnequalBatch { a: usize, na: usize, b: usize, nb: usize },
    #[error("batch is empty")]
    EmptyBatch,
    #[error("input blocks must share one output width, got {0:?}")]
    MixedBlockWidths(Vec<usize>),
    #[error("architecture mismatch: {0}")]
    ArchMismatch(String),
    #[error(transparent)]
    Nn(#[from] NnError),
}

/// Named architecture family, matching the experiments each one serves.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PresetKind {
    Mfqi,
    MdqnQ,
    MddpgActor,
    MddpgCritic,
}

/// Widths and activations for each network section.
///
/// The named constructors carry the published sizes; `with_widths` rescales
/// them for desk-sized runs while keeping the activation pattern.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArchitecturePreset {
    pub kind: PresetKind,
    /// Per-task input block layers; empty means the block is the identity.
    pub input_block: Vec<(usize, Activation)>,
    pub shared: Vec<(usize, Activation)>,
    pub head_activation: Activation,
}

impl ArchitecturePreset {
    /// FQI net: two shared sigmoid layers of 30 units, linear heads,
    /// pass-through input blocks.
    pub fn mfqi() -> Self {
        ArchitecturePreset {
            kind: PresetKind::Mfqi,
            input_block: vec![],
            shared: vec![(30, Activation::Sigmoid), (30, Activation::Sigmoid)],
            head_activation: Activation::Linear,
        }
    }

    /// DQN net: 80 relu per input block; trunk 80 relu then 80 sigmoid;
    /// one linear head output per discrete action.
    pub fn mdqn_q() -> Self {
        ArchitecturePreset {
            kind: PresetKind::MdqnQ,
            input_block: vec![(80, Activation::Relu)],
            shared: vec![(80, Activation::Relu), (80, Activation::Sigmoid)],
            head_activation: Activation::Linear,
        }
    }

    /// DDPG actor: 600 relu per input block, 500 relu trunk, tanh heads
    /// sized to the action dimension.
    pub fn mddpg_actor() -> Self {
        ArchitecturePreset {
            kind: PresetKind::MddpgActor,
            input_block: vec![(600, Activation::Relu)],
            shared: vec![(500, Activation::Relu)],
            head_activation: Activation::Tanh,
        }
    }

    /// DDPG critic: like the actor's input blocks, sigmoid trunk that also
    /// receives the action, single linear output unit.
    pub fn mddpg_critic() -> Self {
        ArchitecturePreset {
            kind: PresetKind::MddpgCritic,
            input_block: vec![(600, Activation::Relu)],
            shared: vec![(500, Activation::Sigmoid)],
            head_activation: Activation::Linear,
        }
    }

    /// Rescales every layer width, keeping the activation pattern. Used by
    /// desk-scale configs where the published widths exceed the CPU budget.
    pub fn with_widths(mut self, input_width: usize, shared_width: usize) -> Self {
        for l in &mut self.input_block {
            l.0 = input_width;
        }
        for l in &mut self.shared {
            l.0 = shared_width;
        }
        self
    }

    pub fn takes_action_input(&self) -> bool {
        self.kind == PresetKind::MddpgCritic
    }
}

/// Per-task shape information needed to instantiate a preset.
#[derive(Debug, Clone, Copy)]
pub struct TaskShape {
    /// Width of the task's observation vector.
    pub obs_dim: usize,
    /// Head output width (e.g. number of discrete actions, or 1 for a critic).
    pub output_dim: usize,
    /// Action-vector width fed to the trunk; only used by critic presets.
    pub action_dim: usize,
}

/// Per-sample training signal: either a regression target on one output
/// slot, or a raw upstream gradient on the whole output vector.
#[derive(Debug, Clone)]
pub enum Signal {
    Target { slot: usize, value: f64 },
    Upstream(Vec<f64>),
}

/// One training sample routed to a task.
#[derive(Debug)]
pub struct Sample<'a> {
    pub x: &'a [f64],
    /// Action vector for critic presets; `None` otherwise.
    pub extra: Option<&'a [f64]>,
    pub signal: Signal,
}

/// Gradient buffers for every section of a [`MultiTaskNetwork`].
#[derive(Debug)]
pub struct SectionGrads {
    pub blocks: Vec<NetGrads>,
    pub shared: NetGrads,
    pub heads: Vec<NetGrads>,
}

impl SectionGrads {
    pub fn zeros_like(net: &MultiTaskNetwork) -> Self {
        SectionGrads {
            blocks: net.input_blocks.iter().map(NetGrads::zeros_like).collect(),
            shared: NetGrads::zeros_like(&net.shared),
            heads: net.heads.iter().map(NetGrads::zeros_like).collect(),
        }
    }

    pub fn zero(&mut self) {
        for b in &mut self.blocks {
            b.zero();
        }
        self.shared.zero();
        for h in &mut self.heads {
            h.zero();
        }
    }
}

/// Hard or soft target synchronization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SyncMode {
    Hard,
    Soft(f64),
}

/// Update hyperparameters for [`MultiTaskNetwork::mt_update`].
#[derive(Debug, Clone, Copy)]
pub struct UpdateOpts {
    pub loss: LossSpec,
    pub lr: f64,
    /// Weight-decay coefficient added to weight gradients (biases exempt).
    pub l2: f64,
}

/// The multi-task network with per-section Adam state.
#[derive(Debug, Clone)]
pub struct MultiTaskNetwork {
    preset: ArchitecturePreset,
    input_blocks: Vec<DenseNet>,
    shared: DenseNet,
    heads: Vec<DenseNet>,
    shared_frozen: bool,
    action_dim: usize,
    adam_blocks: Vec<AdamState>,
    adam_shared: AdamState,
    adam_heads: Vec<AdamState>,
}

impl MultiTaskNetwork {
    pub fn new<R: Rng>(
        preset: ArchitecturePreset,
        tasks: &[TaskShape],
        rng: &mut R,
    ) -> Result<Self, MtNetError> {
        assert!(!tasks.is_empty(), "need at least one task");
        let input_blocks: Vec<DenseNet> = tasks
            .iter()
            .map(|t| {
                if preset.input_block.is_empty() {
                    DenseNet::identity(t.obs_dim)
                } else {
                    DenseNet::new(t.obs_dim, &preset.input_block, rng)
                }
            })
            .collect();
        let widths: Vec<usize> = input_blocks.iter().map(|b| b.output_dim()).collect();
        if widths.windows(2).any(|w| w[0] != w[1]) {
            return Err(MtNetError::MixedBlockWidths(widths));
        }
        let feature_width = widths[0];
        let action_dim = if preset.takes_action_input() {
            let dims: Vec<usize> = tasks.iter().map(|t| t.action_dim).collect();
            if dims.windows(2).any(|w| w[0] != w[1]) || dims[0] == 0 {
                return Err(MtNetError::ActionInput(format!(
                    "critic needs one nonzero action width shared by all tasks, got {dims:?}"
                )));
            }
            dims[0]
        } else {
            0
        };
        let shared = DenseNet::new(feature_width + action_dim, &preset.shared, rng);
        let trunk_out = shared.output_dim();
        let heads: Vec<DenseNet> = tasks
            .iter()
            .map(|t| DenseNet::new(trunk_out, &[(t.output_dim, preset.head_activation)], rng))
            .collect();
        let adam_blocks = input_blocks.iter().map(AdamState::new).collect();
        let adam_shared = AdamState::new(&shared);
        let adam_heads = heads.iter().map(AdamState::new).collect();
        Ok(MultiTaskNetwork {
            preset,
            input_blocks,
            shared,
            heads,
            shared_frozen: false,
            action_dim,
            adam_blocks,
            adam_shared,
            adam_heads,
        })
    }

    pub fn task_count(&self) -> usize {
        self.heads.len()
    }

    pub fn preset(&self) -> &ArchitecturePreset {
        &self.preset
    }

    pub fn shared_frozen(&self) -> bool {
        self.shared_frozen
    }

    pub fn set_shared_frozen(&mut self, frozen: bool) {
        self.shared_frozen = frozen;
    }

    pub fn input_block(&self, task: usize) -> &DenseNet {
        &self.input_blocks[task]
    }

    pub fn shared(&self) -> &DenseNet {
        &self.shared
    }

    pub fn head(&self, task: usize) -> &DenseNet {
        &self.heads[task]
    }

    /// Mutable section access for tests and snapshot loading.
    pub fn sections_mut(&mut self) -> (&mut [DenseNet], &mut DenseNet, &mut [DenseNet]) {
        (&mut self.input_blocks, &mut self.shared, &mut self.heads)
    }

    pub fn param_count(&self) -> usize {
        self.input_blocks.iter().map(DenseNet::param_count).sum::<usize>()
            + self.shared.param_count()
            + self.heads.iter().map(DenseNet::param_count).sum::<usize>()
    }

    fn check_task(&self, task: usize) -> Result<(), MtNetError> {
        if task >= self.task_count() {
            return Err(MtNetError::UnknownTask { task, tasks: self.task_count() });
        }
        Ok(())
    }

    fn check_input(&self, task: usize, x: &[f64], extra: Option<&[f64]>) -> Result<(), MtNetError> {
        self.check_task(task)?;
        let expected = self.input_blocks[task].input_dim();
        if x.len() != expected {
            return Err(MtNetError::ObsShape { task, expected, got: x.len() });
        }
        match (self.action_dim, extra) {
            (0, None) => Ok(()),
            (0, Some(_)) => {
                Err(MtNetError::ActionInput("preset takes no action input".into()))
            }
            (d, Some(a)) if a.len() == d => Ok(()),
            (d, Some(a)) => Err(MtNetError::ActionInput(format!(
                "action has dimension {}, expected {d}",
                a.len()
            ))),
            (_, None) => Err(MtNetError::ActionInput("critic preset requires an action".into())),
        }
    }

    /// Task-routed forward pass: `f_t(h(w_t(x)))`, with the action vector
    /// concatenated at the trunk input for critic presets. Only the routed
    /// task's block and head are evaluated.
    pub fn mt_forward(
        &self,
        task: usize,
        x: &[f64],
        extra: Option<&[f64]>,
    ) -> Result<Vec<f64>, MtNetError> {
        self.check_input(task, x, extra)?;
        let z = self.input_blocks[task].forward(x)?;
        let feat = match extra {
            None => self.shared.forward(&z)?,
            Some(a) => {
                let mut trunk_in = z;
                trunk_in.extend_from_slice(a);
                self.shared.forward(&trunk_in)?
            }
        };
        Ok(self.heads[task].forward(&feat)?)
    }

    /// Forward pass reading the shared features (trunk output) for a task's
    /// input; used by tests probing the representation.
    pub fn shared_features(
        &self,
        task: usize,
        x: &[f64],
        extra: Option<&[f64]>,
    ) -> Result<Vec<f64>, MtNetError> {
        self.check_input(task, x, extra)?;
        let mut z = self.input_blocks[task].forward(x)?;
        if let Some(a) = extra {
            z.extend_from_slice(a);
        }
        Ok(self.shared.forward(&z)?)
    }

    fn batch_sizes_ok(&self, batch: &[Vec<Sample>]) -> Result<usize, MtNetError> {
        if batch.len() != self.task_count() {
            return Err(MtNetError::ArchMismatch(format!(
                "batch covers {} tasks, network has {}",
                batch.len(),
                self.task_count()
            )));
        }
        let mut sizes = batch.iter().enumerate().filter(|(_, b)| !b.is_empty());
        let first = sizes.next().ok_or(MtNetError::EmptyBatch)?;
        for (t, b) in sizes {
            if b.len() != first.1.len() {
                return Err(MtNetError::UnequalBatch {
                    a: first.0,
                    na: first.1.len(),
                    b: t,
                    nb: b.len(),
                });
            }
        }
        Ok(batch.iter().map(Vec::len).sum())
    }

    /// Accumulates raw (unscaled) gradient sums over the batch into `grads`.
    /// Returns `(total samples, summed loss over Target samples, target count)`.
    ///
    /// When `skip_shared_params` is set the trunk still propagates
    /// gradients to the input blocks but accumulates none of its own.
    pub fn accumulate_gradients(
        &self,
        batch: &[Vec<Sample>],
        loss: &LossSpec,
        grads: &mut SectionGrads,
        skip_shared_params: bool,
    ) -> Result<(usize, f64, usize), MtNetError> {
        let total = self.batch_sizes_ok(batch)?;
        let mut w_cache = Cache::default();
        let mut h_cache = Cache::default();
        let mut f_cache = Cache::default();
        let mut trunk_in: Vec<f64> = Vec::new();
        let mut dl_dy: Vec<f64> = Vec::new();
        let mut loss_sum = 0.0;
        let mut target_count = 0usize;
        for (t, samples) in batch.iter().enumerate() {
            for s in samples {
                self.check_input(t, s.x, s.extra)?;
                let z = self.input_blocks[t].forward_cached(s.x, &mut w_cache)?;
                trunk_in.clear();
                trunk_in.extend_from_slice(z);
                if let Some(a) = s.extra {
                    trunk_in.extend_from_slice(a);
                }
                let feat = self.shared.forward_cached(&trunk_in, &mut h_cache)?;
                let y = self.heads[t].forward_cached(feat, &mut f_cache)?;
                dl_dy.clear();
                match &s.signal {
                    Signal::Target { slot, value } => {
                        let (lv, dv) = crate::nn::loss_eval(loss, y[*slot], *value);
                        dl_dy.resize(y.len(), 0.0);
                        dl_dy[*slot] = dv;
                        loss_sum += lv;
                        target_count += 1;
                    }
                    Signal::Upstream(g) => {
                        dl_dy.extend_from_slice(g);
                    }
                }
                let d_feat = self.heads[t].backward(feat, &f_cache, &dl_dy, &mut grads.heads[t])?;
                let d_trunk_in = if skip_shared_params {
                    self.shared.backward_input_only(&h_cache, &d_feat)?
                } else {
                    self.shared.backward(&trunk_in, &h_cache, &d_feat, &mut grads.shared)?
                };
                let feature_width = self.input_blocks[t].output_dim();
                self.input_blocks[t].backward(
                    s.x,
                    &w_cache,
                    &d_trunk_in[..feature_width],
                    &mut grads.blocks[t],
                )?;
            }
        }
        Ok((total, loss_sum, target_count))
    }

    /// One multi-task gradient step: per-task gradients reach only their
    /// own sections, trunk gradients accumulate across tasks, everything is
    /// scaled by 1/(total samples), and one Adam step is applied per
    /// touched section. Returns the mean loss over Target samples.
    pub fn mt_update(&mut self, batch: &[Vec<Sample>], opts: &UpdateOpts) -> Result<f64, MtNetError> {
        let mut grads = SectionGrads::zeros_like(self);
        let frozen = self.shared_frozen;
        let (total, loss_sum, target_count) =
            self.accumulate_gradients(batch, &opts.loss, &mut grads, frozen)?;
        let scale = 1.0 / total as f64;
        for t in 0..self.task_count() {
            if batch[t].is_empty() {
                continue;
            }
            grads.blocks[t].scale(scale);
            grads.heads[t].scale(scale);
            if opts.l2 > 0.0 {
                apply_l2(&self.input_blocks[t], &mut grads.blocks[t], opts.l2);
                apply_l2(&self.heads[t], &mut grads.heads[t], opts.l2);
            }
            adam_step(&mut self.input_blocks[t], &grads.blocks[t], &mut self.adam_blocks[t], opts.lr)?;
            adam_step(&mut self.heads[t], &grads.heads[t], &mut self.adam_heads[t], opts.lr)?;
        }
        if !frozen {
            grads.shared.scale(scale);
            if opts.l2 > 0.0 {
                apply_l2(&self.shared, &mut grads.shared, opts.l2);
            }
            adam_step(&mut self.shared, &grads.shared, &mut self.adam_shared, opts.lr)?;
        }
        Ok(if target_count == 0 { 0.0 } else { loss_sum / target_count as f64 })
    }

    /// Raw gradient sums plus sample count; diagnostic/test path that never
    /// touches parameters or Adam state.
    pub fn mt_gradients(
        &self,
        batch: &[Vec<Sample>],
        loss: &LossSpec,
    ) -> Result<(SectionGrads, usize), MtNetError> {
        let mut grads = SectionGrads::zeros_like(self);
        let (total, _, _) = self.accumulate_gradients(batch, loss, &mut grads, false)?;
        Ok((grads, total))
    }

    /// Gradient of the summed head outputs w.r.t. the trunk input's action
    /// slice, without touching any parameter gradient. Serves the
    /// deterministic policy gradient: callers pass dL/dy on the critic
    /// output and receive dL/da.
    pub fn input_gradient(
        &self,
        task: usize,
        x: &[f64],
        extra: Option<&[f64]>,
        dl_dy: &[f64],
    ) -> Result<(Vec<f64>, Vec<f64>), MtNetError> {
        self.check_input(task, x, extra)?;
        let mut w_cache = Cache::default();
        let mut h_cache = Cache::default();
        let mut f_cache = Cache::default();
        let z = self.input_blocks[task].forward_cached(x, &mut w_cache)?;
        let mut trunk_in = z.to_vec();
        if let Some(a) = extra {
            trunk_in.extend_from_slice(a);
        }
        let feat = self.shared.forward_cached(&trunk_in, &mut h_cache)?.to_vec();
        self.heads[task].forward_cached(&feat, &mut f_cache)?;
        let d_feat = self.heads[task].backward_input_only(&f_cache, dl_dy)?;
        let d_trunk_in = self.shared.backward_input_only(&h_cache, &d_feat)?;
        let feature_width = self.input_blocks[task].output_dim();
        let d_z = &d_trunk_in[..feature_width];
        let d_x = self.input_blocks[task].backward_input_only(&w_cache, d_z)?;
        Ok((d_x, d_trunk_in[feature_width..].to_vec()))
    }

    fn same_architecture(&self, other: &MultiTaskNetwork) -> bool {
        self.task_count() == other.task_count()
            && self.shared.same_architecture(&other.shared)
            && self
                .input_blocks
                .iter()
                .zip(&other.input_blocks)
                .all(|(a, b)| a.same_architecture(b))
            && self.heads.iter().zip(&other.heads).all(|(a, b)| a.same_architecture(b))
    }
}

fn apply_l2(net: &DenseNet, grads: &mut NetGrads, l2: f64) {
    for (layer, gw) in net.layers().iter().zip(grads.weights.iter_mut()) {
        for (g, w) in gw.iter_mut().zip(&layer.weights) {
            *g += l2 * w;
        }
    }
}

/// Copies (`Hard`) or τ-blends (`Soft`) every parameter of `src` into `dst`.
pub fn sync_target(
    src: &MultiTaskNetwork,
    dst: &mut MultiTaskNetwork,
    mode: SyncMode,
) -> Result<(), MtNetError> {
    if !src.same_architecture(dst) {
        return Err(MtNetError::ArchMismatch("sync_target between different architectures".into()));
    }
    match mode {
        SyncMode::Hard => {
            for (d, s) in dst.input_blocks.iter_mut().zip(&src.input_blocks) {
                d.copy_params_from(s);
            }
            dst.shared.copy_params_from(&src.shared);
            for (d, s) in dst.heads.iter_mut().zip(&src.heads) {
                d.copy_params_from(s);
            }
        }
        SyncMode::Soft(tau) => {
            for (d, s) in dst.input_blocks.iter_mut().zip(&src.input_blocks) {
                d.blend_params_from(s, tau);
            }
            dst.shared.blend_params_from(&src.shared, tau);
            for (d, s) in dst.heads.iter_mut().zip(&src.heads) {
                d.blend_params_from(s, tau);
            }
        }
    }
    Ok(())
}

/// Copies only the shared trunk from `src` into `dst`; input blocks and
/// heads keep their (randomly initialized) parameters. Task counts may
/// differ, trunk architectures may not.
pub fn transplant_shared(
    src: &MultiTaskNetwork,
    dst: &mut MultiTaskNetwork,
) -> Result<(), MtNetError> {
    transplant_shared_net(&src.shared, dst)
}

/// Trunk transplant from a bare [`DenseNet`] (e.g. one section of a
/// snapshot file).
pub fn transplant_shared_net(src: &DenseNet, dst: &mut MultiTaskNetwork) -> Result<(), MtNetError> {
    if !src.same_architecture(&dst.shared) {
        return Err(MtNetError::ArchMismatch("trunk shapes differ".into()));
    }
    dst.shared.copy_params_from(src);
    Ok(())
}
