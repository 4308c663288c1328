//! Wall-clock benchmark of the two piecewise-linear signature algorithms.
//!
//! Each grid cell `(k, d, m, algorithm)` is timed over `samples` runs, each on
//! a freshly drawn `d x m` matrix with integer entries uniform in `[-20, 20]`
//! (stored as floats). Only the signature call is timed. Both algorithms of a
//! cell see the same sequence of matrices.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::algebra::TensorAlgebraSpace;
use crate::error::{Error, Result};
use crate::matrix::CoefMatrix;
use crate::signatures::{sig_pwln, Algorithm};

pub const ENTRY_BOUND: i64 = 20;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BenchConfig {
    pub dimensions: Vec<usize>,
    pub segments: Vec<usize>,
    pub levels: Vec<usize>,
    pub algorithms: Vec<Algorithm>,
    pub samples: usize,
    pub rng_seed: u64,
}

impl Default for BenchConfig {
    fn default() -> Self {
        Self {
            dimensions: vec![10, 20, 30, 40, 50, 60],
            segments: vec![10, 20, 30, 40, 50, 60],
            levels: vec![3, 4],
            algorithms: vec![Algorithm::Chen, Algorithm::Congruence],
            samples: 100,
            rng_seed: 0,
        }
    }
}

impl BenchConfig {
    pub fn validate(&self) -> Result<()> {
        let lists = [
            ("dimensions", &self.dimensions),
            ("segments", &self.segments),
            ("levels", &self.levels),
        ];
        for (name, values) in lists {
            if values.is_empty() {
                return Err(Error::InvalidArgument(format!("empty {name} grid")));
            }
            if values.contains(&0) {
                return Err(Error::InvalidArgument(format!("{name} must be at least 1")));
            }
        }
        if self.algorithms.is_empty() {
            return Err(Error::InvalidArgument("no algorithms selected".into()));
        }
        if self.samples == 0 {
            return Err(Error::InvalidArgument("samples must be at least 1".into()));
        }
        Ok(())
    }

    /// Grid cells in emission order: lexicographic in `(k, d, m, algorithm)`.
    pub fn cells(&self) -> Vec<(usize, usize, usize, Algorithm)> {
        let sorted = |v: &[usize]| {
            let mut v = v.to_vec();
            v.sort_unstable();
            v.dedup();
            v
        };
        let mut algorithms = self.algorithms.clone();
        algorithms.sort_by_key(|a| *a as u8);
        algorithms.dedup();
        let mut out = Vec::new();
        for &k in &sorted(&self.levels) {
            for &d in &sorted(&self.dimensions) {
                for &m in &sorted(&self.segments) {
                    out.extend(algorithms.iter().map(|&a| (k, d, m, a)));
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchRow {
    pub k: usize,
    pub d: usize,
    pub m: usize,
    pub algorithm: Algorithm,
    pub median_ms: f64,
    pub samples: usize,
    /// Faster algorithm for this `(k, d, m)`: "chen", "congruence" or "tie".
    pub winner: String,
}

/// Time `run` on `samples` inputs from `generate`; generation is not timed.
pub fn time_samples<I, O>(
    samples: usize,
    mut generate: impl FnMut() -> I,
    mut run: impl FnMut(&I) -> O,
) -> Vec<Duration> {
    (0..samples)
        .map(|_| {
            let input = generate();
            let start = Instant::now();
            let output = run(&input);
            let elapsed = start.elapsed();
            drop(std::hint::black_box(output));
            elapsed
        })
        .collect()
}

pub fn median(values: &mut [f64]) -> f64 {
    assert!(!values.is_empty(), "median of an empty sample");
    values.sort_by(f64::total_cmp);
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

fn cell_seed(seed: u64, k: usize, d: usize, m: usize) -> u64 {
    // splitmix64 over the cell coordinates
    let mut z = seed;
    for v in [k, d, m] {
        z = z.wrapping_add(0x9E37_79B9_7F4A_7C15).wrapping_add(v as u64);
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^= z >> 31;
    }
    z
}

/// Random `d x m` matrix with integer entries in `[-20, 20]`.
pub fn random_integer_matrix(rng: &mut impl Rng, d: usize, m: usize) -> CoefMatrix<f64> {
    let data = (0..d * m)
        .map(|_| rng.random_range(-ENTRY_BOUND..=ENTRY_BOUND) as f64)
        .collect();
    CoefMatrix::new(d, m, data).expect("shape is consistent")
}

/// Median time of one grid cell in milliseconds.
pub fn bench_cell(
    k: usize,
    d: usize,
    m: usize,
    algorithm: Algorithm,
    samples: usize,
    seed: u64,
) -> Result<f64> {
    let space = TensorAlgebraSpace::of::<f64>(d, k)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cell_seed(seed, k, d, m));
    let mut failure = None;
    let times = time_samples(
        samples,
        || random_integer_matrix(&mut rng, d, m),
        |a| {
            if let Err(e) = sig_pwln(space, a, algorithm) {
                failure.get_or_insert(e);
            }
        },
    );
    if let Some(e) = failure {
        return Err(e);
    }
    let mut ms: Vec<f64> = times.iter().map(|t| t.as_secs_f64() * 1e3).collect();
    Ok(median(&mut ms))
}

/// Run every cell sequentially and attach the per-`(k, d, m)` winner.
pub fn run_bench(config: &BenchConfig) -> Result<Vec<BenchRow>> {
    config.validate()?;
    let mut rows = Vec::new();
    for (k, d, m, algorithm) in config.cells() {
        let median_ms = bench_cell(k, d, m, algorithm, config.samples, config.rng_seed)?;
        rows.push(BenchRow {
            k,
            d,
            m,
            algorithm,
            median_ms,
            samples: config.samples,
            winner: String::new(),
        });
    }
    assign_winners(&mut rows);
    Ok(rows)
}

fn assign_winners(rows: &mut [BenchRow]) {
    let mut best: BTreeMap<(usize, usize, usize), (f64, Vec<Algorithm>)> = BTreeMap::new();
    for r in rows.iter() {
        let entry = best
            .entry((r.k, r.d, r.m))
            .or_insert((f64::INFINITY, Vec::new()));
        if r.median_ms < entry.0 {
            *entry = (r.median_ms, vec![r.algorithm]);
        } else if r.median_ms == entry.0 {
            entry.1.push(r.algorithm);
        }
    }
    for r in rows.iter_mut() {
        let (_, winners) = &best[&(r.k, r.d, r.m)];
        r.winner = match winners.as_slice() {
            [only] => only.as_str().to_string(),
            _ => "tie".to_string(),
        };
    }
}

pub const CSV_HEADER: &str = "k,d,m,algorithm,median_ms,samples,winner";

pub fn render_csv(rows: &[BenchRow]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{:.6},{},{}",
            r.k, r.d, r.m, r.algorithm, r.median_ms, r.samples, r.winner
        );
    }
    out
}

/// One block per `k`: rows are `d`, columns are `m`, each cell lists the
/// medians in algorithm order with `*` after the faster one.
pub fn render_table(rows: &[BenchRow]) -> String {
    let mut by_k: BTreeMap<usize, BTreeMap<(usize, usize), Vec<&BenchRow>>> = BTreeMap::new();
    for r in rows {
        by_k.entry(r.k).or_default().entry((r.d, r.m)).or_default().push(r);
    }
    let mut out = String::new();
    for (k, cells) in &by_k {
        let mut ds: Vec<usize> = cells.keys().map(|c| c.0).collect();
        let mut ms: Vec<usize> = cells.keys().map(|c| c.1).collect();
        ds.dedup();
        ms.sort_unstable();
        ms.dedup();
        let algos: Vec<&str> = cells
            .values()
            .next()
            .map(|v| v.iter().map(|r| r.algorithm.as_str()).collect())
            .unwrap_or_default();
        let text = |d: usize, m: usize| -> String {
            cells
                .get(&(d, m))
                .map(|rs| {
                    rs.iter()
                        .map(|r| {
                            let mark = if rs.len() > 1 && r.winner == r.algorithm.as_str() {
                                "*"
                            } else {
                                ""
                            };
                            format!("{:.3}{mark}", r.median_ms)
                        })
                        .collect::<Vec<_>>()
                        .join(", ")
                })
                .unwrap_or_default()
        };
        let width = ds
            .iter()
            .flat_map(|&d| ms.iter().map(move |&m| (d, m)))
            .map(|(d, m)| text(d, m).len())
            .chain(ms.iter().map(|m| m.to_string().len()))
            .max()
            .unwrap_or(1);
        let _ = writeln!(out, "k = {k}  (ms; {}; * = faster)", algos.join(", "));
        let _ = write!(out, "{:>5} |", "d\\m");
        for m in &ms {
            let _ = write!(out, " {m:>width$} |");
        }
        out.push('\n');
        for &d in &ds {
            let _ = write!(out, "{d:>5} |");
            for &m in &ms {
                let _ = write!(out, " {:>width$} |", text(d, m));
            }
            out.push('\n');
        }
        out.push('\n');
    }
    out
}
