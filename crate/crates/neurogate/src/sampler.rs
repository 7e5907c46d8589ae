//! Seeded dataset generation.
//!
//! Randomness is counter-based: sample `i` of a dataset draws from
//! `ChaCha8Rng::seed_from_u64(seed)` with the ChaCha stream id set to `i`.
//! Sample content is therefore a pure function of `(seed, index)`, samples
//! can be generated in parallel in any order, and shrinking or growing
//! `count` never changes the samples that are kept. Degenerate draws (raw
//! matrices whose quantumness image cannot be normalized) are re-drawn from
//! the same per-index stream and counted.
//!
//! Entries of raw inputs are i.i.d. uniform on [-1, 1] via
//! `rand::Rng::gen_range(-1.0..=1.0)`.

use std::fs;
use std::io::{self, Write};
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::exec;
use crate::net::Dataset;
use crate::quantum::{self, Density4, GateId};
use crate::realrep::RealRep8;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DatasetKind {
    /// Raw uniform matrix in, its normalized density image out.
    Quantumness,
    /// Density matrix in, gate-evolved density matrix out.
    Gate(GateId),
}

impl DatasetKind {
    pub fn label(&self) -> String {
        match self {
            DatasetKind::Quantumness => "quantumness".to_string(),
            DatasetKind::Gate(g) => format!("gate:{g}"),
        }
    }
}

/// Everything that determines dataset content. The held-out fraction and
/// the implied training fraction sum to one by construction.
#[derive(Clone, Debug)]
pub struct DatasetSpec {
    pub kind: DatasetKind,
    pub count: usize,
    pub seed: u64,
    pub heldout_frac: f64,
}

impl DatasetSpec {
    pub fn heldout_count(&self) -> usize {
        ((self.count as f64 * self.heldout_frac).round() as usize).min(self.count)
    }
}

/// Disjoint, exhaustive split: the first samples train, the tail is held
/// out for probing.
#[derive(Clone, Debug)]
pub struct SplitDataset {
    pub train: Dataset,
    pub heldout: Dataset,
    pub resampled: u64,
}

fn stream_rng(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng
}

fn draw_raw(rng: &mut ChaCha8Rng) -> RealRep8 {
    RealRep8::from_fn(|_, _| rng.gen_range(-1.0..=1.0))
}

/// Raw uniform 8x8 matrices, one per index.
pub fn sample_raw(seed: u64, count: usize) -> Vec<RealRep8> {
    assert!(count >= 1);
    exec::map_items(count, |i| draw_raw(&mut stream_rng(seed, i)))
}

/// Densities, one per index, drawn with the same per-index resampling the
/// dataset builders use.
pub fn sample_densities(seed: u64, count: usize) -> Vec<Density4> {
    assert!(count >= 1);
    exec::map_items(count, |i| density_at(seed, i).1)
}

/// Draws from the index's stream until the quantumness map accepts,
/// returning the accepted raw matrix, its density image and the number of
/// rejected draws.
fn density_at(seed: u64, index: usize) -> (RealRep8, Density4, u64) {
    let mut rng = stream_rng(seed, index);
    let mut resamples = 0;
    loop {
        let raw = draw_raw(&mut rng);
        match quantum::quantumness_map(&raw) {
            Ok(rho) => return (raw, rho, resamples),
            Err(_) => resamples += 1,
        }
    }
}

/// (raw uniform, embedded density) pairs for state-normalization training.
pub fn make_quantumness_dataset(spec: &DatasetSpec) -> SplitDataset {
    assert_eq!(spec.kind, DatasetKind::Quantumness);
    let rows = exec::map_items(spec.count, |i| {
        let (raw, rho, resamples) = density_at(spec.seed, i);
        (raw, rho.to_real(), resamples)
    });
    collect_split(spec, rows)
}

/// (embedded density, embedded evolved density) pairs for one gate.
pub fn make_gate_dataset(spec: &DatasetSpec) -> SplitDataset {
    let DatasetKind::Gate(gate_id) = spec.kind else {
        panic!("make_gate_dataset needs a gate dataset spec");
    };
    let gate = gate_id.unitary();
    let rows = exec::map_items(spec.count, |i| {
        let (_, rho, resamples) = density_at(spec.seed, i);
        let evolved = quantum::evolve(&rho, &gate);
        (rho.to_real(), evolved.to_real(), resamples)
    });
    collect_split(spec, rows)
}

fn collect_split(spec: &DatasetSpec, rows: Vec<(RealRep8, RealRep8, u64)>) -> SplitDataset {
    let heldout_n = spec.heldout_count();
    let train_n = spec.count - heldout_n;
    let mut train = Dataset::with_capacity(64, 64, train_n);
    let mut heldout = Dataset::with_capacity(64, 64, heldout_n);
    let mut resampled = 0;
    for (i, (input, target, r)) in rows.into_iter().enumerate() {
        resampled += r;
        let dest = if i < train_n { &mut train } else { &mut heldout };
        dest.push(input.as_slice(), target.as_slice());
    }
    SplitDataset {
        train,
        heldout,
        resampled,
    }
}

/// Writes the full dataset (training rows first, then held-out rows) as one
/// CSV file: a commented spec header, a column-name row, then one row per
/// sample with 64 input and 64 target values at full precision.
pub fn export_csv(path: &Path, spec: &DatasetSpec, split: &SplitDataset) -> io::Result<()> {
    let mut buf = Vec::new();
    writeln!(buf, "# neurogate dataset v1")?;
    writeln!(buf, "# kind = {}", spec.kind.label())?;
    writeln!(buf, "# count = {}", spec.count)?;
    writeln!(buf, "# seed = {}", spec.seed)?;
    writeln!(buf, "# heldout_frac = {}", spec.heldout_frac)?;
    writeln!(buf, "# heldout_rows = {}", spec.heldout_count())?;
    writeln!(buf, "# resampled = {}", split.resampled)?;
    let mut header = Vec::with_capacity(128);
    for i in 0..64 {
        header.push(format!("in{i}"));
    }
    for i in 0..64 {
        header.push(format!("tgt{i}"));
    }
    writeln!(buf, "{}", header.join(","))?;
    let mut write_rows = |data: &Dataset| -> io::Result<()> {
        for i in 0..data.len() {
            let mut row = String::with_capacity(128 * 24);
            for (k, v) in data.input(i).iter().chain(data.target(i)).enumerate() {
                if k > 0 {
                    row.push(',');
                }
                row.push_str(&format!("{v:.16e}"));
            }
            writeln!(buf, "{row}")?;
        }
        Ok(())
    };
    write_rows(&split.train)?;
    write_rows(&split.heldout)?;
    fs::write(path, buf)
}
