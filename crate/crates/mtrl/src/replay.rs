//! Per-task FIFO replay memories and the equal-share multi-task batch
//! assembler: every update batch carries exactly the same number of
//! samples from each task's memory.

use std::collections::VecDeque;
use std::io::Write;
use std::path::Path;

use rand::Rng;

use crate::envs::{Action, Transition};

#[derive(Debug, thiserror::Error)]
pub enum ReplayError {
    #[error("transition for task {got} pushed into memory of task {expected}")]
    TaskMismatch { expected: usize, got: usize },
    #[error("memory for task {task} not ready: {size} of {warmup} warm-up transitions")]
    NotReady { task: usize, size: usize, warmup: usize },
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

/// FIFO transition store for one task.
#[derive(Debug, Clone)]
pub struct ReplayMemory {
    task: usize,
    buffer: VecDeque<Transition>,
    capacity: usize,
    warmup: usize,
}

impl ReplayMemory {
    pub fn new(task: usize, capacity: usize, warmup: usize) -> Self {
        assert!(capacity >= 1 && warmup <= capacity);
        ReplayMemory { task, buffer: VecDeque::with_capacity(capacity), capacity, warmup }
    }

    pub fn task(&self) -> usize {
        self.task
    }

    pub fn len(&self) -> usize {
        self.buffer.len()
    }

    pub fn is_empty(&self) -> bool {
        self.buffer.is_empty()
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn warmup(&self) -> usize {
        self.warmup
    }

    pub fn is_ready(&self) -> bool {
        self.len() >= self.warmup.max(1)
    }

    /// Appends a transition, evicting the oldest when full.
    pub fn push(&mut self, t: Transition) -> Result<(), ReplayError> {
        if t.task != self.task {
            return Err(ReplayError::TaskMismatch { expected: self.task, got: t.task });
        }
        if self.buffer.len() == self.capacity {
            self.buffer.pop_front();
        }
        self.buffer.push_back(t);
        Ok(())
    }

    pub fn get(&self, i: usize) -> &Transition {
        &self.buffer[i]
    }

    /// Uniform sample of `n` transitions with replacement.
    pub fn sample<'a, R: Rng>(
        &'a self,
        n: usize,
        rng: &mut R,
    ) -> Result<Vec<&'a Transition>, ReplayError> {
        if !self.is_ready() {
            return Err(ReplayError::NotReady {
                task: self.task,
                size: self.len(),
                warmup: self.warmup,
            });
        }
        Ok((0..n).map(|_| &self.buffer[rng.gen_range(0..self.buffer.len())]).collect())
    }

    /// Writes one flat record per transition for offline dataset reuse.
    pub fn dump(&self, path: &Path) -> Result<(), ReplayError> {
        let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
        for t in &self.buffer {
            let action = match &t.action {
                Action::Discrete(i) => format!("{i}"),
                Action::Continuous(v) => {
                    v.iter().map(f64::to_string).collect::<Vec<_>>().join(",")
                }
            };
            writeln!(
                out,
                "{}\t{}\t{}\t{}\t{}\t{}\t{}",
                t.task,
                join(&t.state),
                action,
                t.reward,
                join(&t.next_state),
                t.absorbing as u8,
                t.truncated as u8,
            )?;
        }
        Ok(())
    }
}

fn join(v: &[f64]) -> String {
    v.iter().map(f64::to_string).collect::<Vec<_>>().join(",")
}

/// Samples exactly `per_task` transitions from every memory (uniform, with
/// replacement). Any memory below warm-up refuses the whole batch so the
/// caller can skip the update step.
pub fn sample_multitask<'a, R: Rng>(
    memories: &'a [ReplayMemory],
    per_task: usize,
    rng: &mut R,
) -> Result<Vec<Vec<&'a Transition>>, ReplayError> {
    for m in memories {
        if !m.is_ready() {
            return Err(ReplayError::NotReady { task: m.task, size: m.len(), warmup: m.warmup });
        }
    }
    memories.iter().map(|m| m.sample(per_task, rng)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn transition(task: usize, tag: f64) -> Transition {
        Transition {
            task,
            state: vec![tag],
            action: Action::Discrete(0),
            reward: 0.0,
            next_state: vec![tag + 0.5],
            absorbing: false,
            truncated: false,
        }
    }

    #[test]
    fn push_grows_to_one() {
        let mut mem = ReplayMemory::new(0, 10, 1);
        mem.push(transition(0, 0.0)).unwrap();
        assert_eq!(mem.len(), 1);
    }

    #[test]
    fn fifo_eviction_drops_oldest() {
        let capacity = 5;
        let mut mem = ReplayMemory::new(0, capacity, 1);
        for i in 0..=capacity {
            mem.push(transition(0, i as f64)).unwrap();
        }
        assert_eq!(mem.len(), capacity);
        assert_eq!(mem.get(0).state, vec![1.0], "first pushed item must be gone");
        assert_eq!(mem.get(capacity - 1).state, vec![capacity as f64]);
    }

    #[test]
    fn task_mismatch_is_rejected() {
        let mut mem = ReplayMemory::new(2, 4, 1);
        assert!(matches!(
            mem.push(transition(3, 0.0)),
            Err(ReplayError::TaskMismatch { expected: 2, got: 3 })
        ));
    }

    #[test]
    fn mdqn_memory_configuration() {
        let mem = ReplayMemory::new(0, 5000, 100);
        assert_eq!(mem.capacity(), 5000);
        assert_eq!(mem.warmup(), 100);
    }

    #[test]
    fn sampling_refused_below_warmup() {
        let mut mem = ReplayMemory::new(0, 100, 3);
        mem.push(transition(0, 0.0)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(matches!(mem.sample(1, &mut rng), Err(ReplayError::NotReady { .. })));
    }

    #[test]
    fn multitask_batch_is_exactly_uniform() {
        let mut memories: Vec<ReplayMemory> =
            (0..5).map(|t| ReplayMemory::new(t, 500, 10)).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for (t, mem) in memories.iter_mut().enumerate() {
            for i in 0..50 {
                mem.push(transition(t, i as f64)).unwrap();
            }
        }
        let batch = sample_multitask(&memories, 100, &mut rng).unwrap();
        assert_eq!(batch.len(), 5);
        assert!(batch.iter().all(|b| b.len() == 100));
        assert_eq!(batch.iter().map(Vec::len).sum::<usize>(), 500);
        for (t, b) in batch.iter().enumerate() {
            assert!(b.iter().all(|tr| tr.task == t));
        }
    }

    #[test]
    fn multitask_refuses_when_any_memory_cold() {
        let mut memories: Vec<ReplayMemory> =
            (0..2).map(|t| ReplayMemory::new(t, 100, 5)).collect();
        for i in 0..10 {
            memories[0].push(transition(0, i as f64)).unwrap();
        }
        memories[1].push(transition(1, 0.0)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        assert!(matches!(
            sample_multitask(&memories, 4, &mut rng),
            Err(ReplayError::NotReady { task: 1, .. })
        ));
    }

    #[test]
    fn single_task_degenerates_to_plain_sampling() {
        let mut mem = ReplayMemory::new(0, 100, 1);
        for i in 0..10 {
            mem.push(transition(0, i as f64)).unwrap();
        }
        let memories = vec![mem];
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let batch = sample_multitask(&memories, 7, &mut rng).unwrap();
        assert_eq!(batch.len(), 1);
        assert_eq!(batch[0].len(), 7);
    }

    #[test]
    fn fixed_rng_repeats_the_batch() {
        let mut mem = ReplayMemory::new(0, 100, 1);
        for i in 0..20 {
            mem.push(transition(0, i as f64)).unwrap();
        }
        let memories = vec![mem];
        let pick = |seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            sample_multitask(&memories, 12, &mut rng)
                .unwrap()[0]
                .iter()
                .map(|t| t.state[0])
                .collect::<Vec<_>>()
        };
        assert_eq!(pick(4), pick(4));
    }

    #[test]
    fn sampling_is_uniform_within_three_sigma() {
        let mut mem = ReplayMemory::new(0, 10, 1);
        for i in 0..10 {
            mem.push(transition(0, i as f64)).unwrap();
        }
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let draws = 100_000;
        let mut counts = [0usize; 10];
        for t in mem.sample(draws, &mut rng).unwrap() {
            counts[t.state[0] as usize] += 1;
        }
        let p = 0.1;
        let sigma = (draws as f64 * p * (1.0 - p)).sqrt();
        for c in counts {
            assert!(
                (c as f64 - draws as f64 * p).abs() < 3.0 * sigma,
                "count {c} outside 3σ of uniform"
            );
        }
    }

    #[test]
    fn dump_writes_one_record_per_transition() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("transitions.tsv");
        let mut mem = ReplayMemory::new(1, 10, 1);
        for i in 0..3 {
            mem.push(transition(1, i as f64)).unwrap();
        }
        mem.dump(&path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(text.lines().count(), 3);
        assert!(text.lines().all(|l| l.starts_with("1\t")));
    }
}
