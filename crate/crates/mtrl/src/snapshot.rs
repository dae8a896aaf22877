//! Network snapshot files: a flat, self-describing text format holding
//! layer dimensions, activations, and row-major weights.
//!
//! Values are written with Rust's shortest round-trip float formatting, so
//! write→read is bit-exact for finite parameters (and the engine never
//! produces non-finite ones). Multi-task snapshots tag each section
//! (`input_block[t]`, `shared`, `head[t]`) so a trunk can be transplanted
//! into a network trained with a different task count.

use std::fmt::Write as _;
use std::path::Path;

use crate::mtnet::MultiTaskNetwork;
use crate::nn::{Activation, DenseNet, Layer};

#[derive(Debug, thiserror::Error)]
pub enum SnapshotError {
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("snapshot has {got} sections, expected {expected}")]
    SectionCount { expected: usize, got: usize },
    #[error("section {0} missing from snapshot")]
    MissingSection(String),
}

const NET_MAGIC: &str = "mtrl-net v1";
const MTNET_MAGIC: &str = "mtrl-mtnet v1";

fn write_dense(out: &mut String, net: &DenseNet) {
    writeln!(out, "input_dim {}", net.input_dim()).unwrap();
    writeln!(out, "layers {}", net.layers().len()).unwrap();
    for layer in net.layers() {
        writeln!(out, "layer {} {} {}", layer.activation.name(), layer.output_dim, layer.input_dim)
            .unwrap();
        out.push('w');
        for v in &layer.weights {
            write!(out, " {v}").unwrap();
        }
        out.push('\n');
        out.push('b');
        for v in &layer.bias {
            write!(out, " {v}").unwrap();
        }
        out.push('\n');
    }
}

struct LineReader<'a> {
    lines: std::iter::Enumerate<std::str::Lines<'a>>,
}

impl<'a> LineReader<'a> {
    fn new(text: &'a str) -> Self {
        LineReader { lines: text.lines().enumerate() }
    }

    fn next(&mut self) -> Result<(usize, &'a str), SnapshotError> {
        self.lines
            .next()
            .map(|(i, l)| (i + 1, l))
            .ok_or(SnapshotError::Parse { line: 0, msg: "unexpected end of file".into() })
    }

    fn expect_tagged(&mut self, tag: &str) -> Result<(usize, &'a str), SnapshotError> {
        let (n, line) = self.next()?;
        line.strip_prefix(tag)
            .map(|rest| (n, rest.trim()))
            .ok_or_else(|| SnapshotError::Parse { line: n, msg: format!("expected `{tag}`") })
    }
}

fn parse_values(line: usize, text: &str, expected: usize) -> Result<Vec<f64>, SnapshotError> {
    let values: Result<Vec<f64>, _> = text.split_whitespace().map(str::parse::<f64>).collect();
    let values =
        values.map_err(|e| SnapshotError::Parse { line, msg: format!("bad float: {e}") })?;
    if values.len() != expected {
        return Err(SnapshotError::Parse {
            line,
            msg: format!("expected {expected} values, got {}", values.len()),
        });
    }
    Ok(values)
}

fn read_dense(reader: &mut LineReader) -> Result<DenseNet, SnapshotError> {
    let (n, rest) = reader.expect_tagged("input_dim ")?;
    let input_dim: usize = rest
        .parse()
        .map_err(|_| SnapshotError::Parse { line: n, msg: "bad input_dim".into() })?;
    let (n, rest) = reader.expect_tagged("layers ")?;
    let layer_count: usize =
        rest.parse().map_err(|_| SnapshotError::Parse { line: n, msg: "bad layer count".into() })?;
    let mut layers = Vec::with_capacity(layer_count);
    for _ in 0..layer_count {
        let (n, rest) = reader.expect_tagged("layer ")?;
        let mut parts = rest.split_whitespace();
        let (act, out_dim, in_dim) = (|| {
            let act = Activation::from_name(parts.next()?)?;
            let out_dim: usize = parts.next()?.parse().ok()?;
            let in_dim: usize = parts.next()?.parse().ok()?;
            Some((act, out_dim, in_dim))
        })()
        .ok_or_else(|| SnapshotError::Parse { line: n, msg: "bad layer header".into() })?;
        let (n, rest) = reader.expect_tagged("w")?;
        let weights = parse_values(n, rest, out_dim * in_dim)?;
        let (n, rest) = reader.expect_tagged("b")?;
        let bias = parse_values(n, rest, out_dim)?;
        layers.push(Layer { weights, bias, input_dim: in_dim, output_dim: out_dim, activation: act });
    }
    DenseNet::from_layers(layers, input_dim)
        .map_err(|e| SnapshotError::Parse { line: 0, msg: e.to_string() })
}

/// Serializes one dense network.
pub fn write_net_string(net: &DenseNet) -> String {
    let mut out = String::new();
    out.push_str(NET_MAGIC);
    out.push('\n');
    write_dense(&mut out, net);
    out.push_str("end\n");
    out
}

pub fn read_net_string(text: &str) -> Result<DenseNet, SnapshotError> {
    let mut reader = LineReader::new(text);
    let (n, line) = reader.next()?;
    if line != NET_MAGIC {
        return Err(SnapshotError::Parse { line: n, msg: format!("bad magic `{line}`") });
    }
    read_dense(&mut reader)
}

pub fn save_net(net: &DenseNet, path: &Path) -> Result<(), SnapshotError> {
    Ok(std::fs::write(path, write_net_string(net))?)
}

pub fn load_net(path: &Path) -> Result<DenseNet, SnapshotError> {
    read_net_string(&std::fs::read_to_string(path)?)
}

/// A parsed multi-task snapshot: every section as a bare network.
#[derive(Debug, Clone)]
pub struct MtSnapshot {
    pub input_blocks: Vec<DenseNet>,
    pub shared: DenseNet,
    pub heads: Vec<DenseNet>,
}

impl MtSnapshot {
    pub fn of(net: &MultiTaskNetwork) -> Self {
        MtSnapshot {
            input_blocks: (0..net.task_count()).map(|t| net.input_block(t).clone()).collect(),
            shared: net.shared().clone(),
            heads: (0..net.task_count()).map(|t| net.head(t).clone()).collect(),
        }
    }

    pub fn task_count(&self) -> usize {
        self.heads.len()
    }

    /// Writes every section back into `net` (architectures must match).
    pub fn restore_into(&self, net: &mut MultiTaskNetwork) -> Result<(), SnapshotError> {
        if self.task_count() != net.task_count() {
            return Err(SnapshotError::SectionCount {
                expected: net.task_count(),
                got: self.task_count(),
            });
        }
        let (blocks, shared, heads) = net.sections_mut();
        for (dst, src) in blocks.iter_mut().zip(&self.input_blocks) {
            dst.copy_params_from(src);
        }
        shared.copy_params_from(&self.shared);
        for (dst, src) in heads.iter_mut().zip(&self.heads) {
            dst.copy_params_from(src);
        }
        Ok(())
    }
}

/// Serializes a multi-task network with tagged sections.
pub fn write_mtnet_string(net: &MultiTaskNetwork) -> String {
    let mut out = String::new();
    out.push_str(MTNET_MAGIC);
    out.push('\n');
    writeln!(out, "tasks {}", net.task_count()).unwrap();
    for t in 0..net.task_count() {
        writeln!(out, "section input_block[{t}]").unwrap();
        write_dense(&mut out, net.input_block(t));
    }
    out.push_str("section shared\n");
    write_dense(&mut out, net.shared());
    for t in 0..net.task_count() {
        writeln!(out, "section head[{t}]").unwrap();
        write_dense(&mut out, net.head(t));
    }
    out.push_str("end\n");
    out
}

pub fn read_mtnet_string(text: &str) -> Result<MtSnapshot, SnapshotError> {
    let mut reader = LineReader::new(text);
    let (n, line) = reader.next()?;
    if line != MTNET_MAGIC {
        return Err(SnapshotError::Parse { line: n, msg: format!("bad magic `{line}`") });
    }
    let (n, rest) = reader.expect_tagged("tasks ")?;
    let tasks: usize =
        rest.parse().map_err(|_| SnapshotError::Parse { line: n, msg: "bad task count".into() })?;
    let mut input_blocks = Vec::with_capacity(tasks);
    for t in 0..tasks {
        reader.expect_tagged(&format!("section input_block[{t}]"))?;
        input_blocks.push(read_dense(&mut reader)?);
    }
    reader.expect_tagged("section shared")?;
    let shared = read_dense(&mut reader)?;
    let mut heads = Vec::with_capacity(tasks);
    for t in 0..tasks {
        reader.expect_tagged(&format!("section head[{t}]"))?;
        heads.push(read_dense(&mut reader)?);
    }
    Ok(MtSnapshot { input_blocks, shared, heads })
}

pub fn save_mtnet(net: &MultiTaskNetwork, path: &Path) -> Result<(), SnapshotError> {
    Ok(std::fs::write(path, write_mtnet_string(net))?)
}

pub fn load_mtnet(path: &Path) -> Result<MtSnapshot, SnapshotError> {
    read_mtnet_string(&std::fs::read_to_string(path)?)
}
