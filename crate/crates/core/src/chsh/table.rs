use std::collections::BTreeMap;
use std::fmt::Write as _;

use super::MeasurementSet;
use crate::numfmt;
use crate::qmath::DensityMatrix;
use crate::{Error, Result};

/// Outcome `±1` to table index: `+1 -> 0`, `-1 -> 1`.
#[inline]
pub(crate) fn outcome_index(v: i8) -> usize {
    usize::from(v < 0)
}

const OUTCOMES: [i8; 2] = [1, -1];

/// Joint outcome distribution for one setting pair `(X, Y)`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PairStats {
    /// `probs[i][j] = P(a, b | X, Y)` with index 0 for `+1` and 1 for `-1`.
    pub probs: [[f64; 2]; 2],
    /// Observed counts; all zero for exact tables.
    pub counts: [[u64; 2]; 2],
}

impl PairStats {
    pub fn from_counts(counts: [[u64; 2]; 2]) -> Self {
        let n = Self::total_of(&counts);
        let probs = if n == 0 { [[0.0; 2]; 2] } else { counts.map(|r| r.map(|k| k as f64 / n as f64)) };
        PairStats { probs, counts }
    }

    fn total_of(counts: &[[u64; 2]; 2]) -> u64 {
        counts.iter().flatten().sum()
    }

    pub fn total(&self) -> u64 {
        Self::total_of(&self.counts)
    }

    /// `P(a = b) - P(a ≠ b)`
    pub fn correlator(&self) -> f64 {
        self.agree() - self.disagree()
    }

    pub fn agree(&self) -> f64 {
        self.probs[0][0] + self.probs[1][1]
    }

    pub fn disagree(&self) -> f64 {
        self.probs[0][1] + self.probs[1][0]
    }

    /// `(⟨a⟩, ⟨b⟩)` for this pair.
    pub fn marginals(&self) -> (f64, f64) {
        let p = &self.probs;
        (p[0][0] + p[0][1] - p[1][0] - p[1][1], p[0][0] + p[1][0] - p[0][1] - p[1][1])
    }
}

/// `P(a, b | X, Y)` for every measured setting pair.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct CorrelationTable {
    pairs: BTreeMap<(u8, u8), PairStats>,
}

/// Normalization slack for exact tables.
const NORM_TOL: f64 = 1e-9;

impl CorrelationTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, x: u8, y: u8, stats: PairStats) -> Result<()> {
        if stats.probs.iter().flatten().any(|p| p.is_nan() || *p < 0.0) {
            return Err(Error::domain(format!("negative probability for setting pair ({x}, {y})")));
        }
        let sum: f64 = stats.probs.iter().flatten().sum();
        if (sum - 1.0).abs() > NORM_TOL {
            return Err(Error::domain(format!("distribution for ({x}, {y}) sums to {sum}")));
        }
        self.pairs.insert((x, y), stats);
        Ok(())
    }

    pub fn pair(&self, x: u8, y: u8) -> Option<&PairStats> {
        self.pairs.get(&(x, y))
    }

    pub fn require(&self, x: u8, y: u8) -> Result<&PairStats> {
        self.pair(x, y).ok_or_else(|| Error::domain(format!("setting pair ({x}, {y}) missing from table")))
    }

    pub fn pairs(&self) -> impl Iterator<Item = (&(u8, u8), &PairStats)> {
        self.pairs.iter()
    }

    pub fn is_exact(&self) -> bool {
        self.pairs.values().all(|s| s.total() == 0)
    }

    /// Largest total-variation distance between matching pairs of two tables.
    pub fn max_tv_distance(&self, other: &CorrelationTable) -> Result<f64> {
        let mut worst: f64 = 0.0;
        for (&(x, y), s) in &self.pairs {
            let o = other.require(x, y)?;
            let tv: f64 =
                s.probs.iter().flatten().zip(o.probs.iter().flatten()).map(|(a, b)| (a - b).abs()).sum::<f64>() / 2.0;
            worst = worst.max(tv);
        }
        Ok(worst)
    }

    /// CSV with header `X,Y,a,b,p,count`, one row per `(X, Y, a, b)`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("X,Y,a,b,p,count\n");
        for (&(x, y), s) in &self.pairs {
            for a in OUTCOMES {
                for b in OUTCOMES {
                    let (i, j) = (outcome_index(a), outcome_index(b));
                    let _ = writeln!(out, "{x},{y},{a},{b},{},{}", numfmt::sig(s.probs[i][j], 15), s.counts[i][j]);
                }
            }
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        match lines.next() {
            Some(h) if h.trim() == "X,Y,a,b,p,count" => {}
            other => return Err(Error::domain(format!("unexpected table header {other:?}"))),
        }
        let mut raw: BTreeMap<(u8, u8), PairStats> = BTreeMap::new();
        for (n, line) in lines.enumerate() {
            let f: Vec<&str> = line.split(',').map(str::trim).collect();
            let bad = || Error::domain(format!("malformed table row {}: {line:?}", n + 2));
            if f.len() != 6 {
                return Err(bad());
            }
            let x: u8 = f[0].parse().map_err(|_| bad())?;
            let y: u8 = f[1].parse().map_err(|_| bad())?;
            let a: i8 = f[2].parse().map_err(|_| bad())?;
            let b: i8 = f[3].parse().map_err(|_| bad())?;
            if a.abs() != 1 || b.abs() != 1 {
                return Err(bad());
            }
            let p: f64 = f[4].parse().map_err(|_| bad())?;
            let k: u64 = f[5].parse().map_err(|_| bad())?;
            let e = raw.entry((x, y)).or_default();
            e.probs[outcome_index(a)][outcome_index(b)] = p;
            e.counts[outcome_index(a)][outcome_index(b)] = k;
        }
        let mut t = CorrelationTable::new();
        for ((x, y), s) in raw {
            t.insert(x, y, s)?;
        }
        Ok(t)
    }
}

/// Born-rule table `P(ab|XY) = Tr[ρ (Π_a^X ⊗ Π_b^Y)]` over every setting pair.
pub fn table_from_state(rho: &DensityMatrix, m: &MeasurementSet) -> Result<CorrelationTable> {
    let (da, db) = m.local_dims();
    if da * db != rho.dim() {
        return Err(Error::domain(format!("measurements act on {da}x{db}, state has dimension {}", rho.dim())));
    }
    let mut table = CorrelationTable::new();
    for x in m.alice_labels() {
        let ax = m.alice(x).expect("label from iterator");
        for y in m.bob_labels() {
            let by = m.bob(y).expect("label from iterator");
            let mut probs = [[0.0; 2]; 2];
            for a in OUTCOMES {
                for b in OUTCOMES {
                    let proj = ax.projector(a > 0).kron(&by.projector(b > 0));
                    // clamp rounding below zero
                    probs[outcome_index(a)][outcome_index(b)] = rho.expectation(&proj).max(0.0);
                }
            }
            table.insert(x, y, PairStats { probs, counts: [[0; 2]; 2] })?;
        }
    }
    Ok(table)
}

/// Observed protocol parameters of a correlation table.
#[derive(Debug, Clone, PartialEq)]
pub struct TableStatistics {
    /// `P(a ≠ b | A0, B1)`
    pub q: f64,
    pub s: f64,
    /// `(X, ⟨a_X⟩)`, pooled over every pair in which `X` appears.
    pub alice_marginals: Vec<(u8, f64)>,
    /// `(Y, ⟨b_Y⟩)`, pooled likewise.
    pub bob_marginals: Vec<(u8, f64)>,
}

/// Setting pairs the protocol estimates: the key pair then the four CHSH pairs.
pub const PROTOCOL_PAIRS: [(u8, u8); 5] = [(0, 1), (1, 1), (1, 2), (2, 1), (2, 2)];

/// Evaluates the CHSH polynomial on the correlators of a table for the given
/// role assignment `(A1, A2, B1, B2)` of its setting labels.
pub fn chsh_from_table(t: &CorrelationTable, roles: (u8, u8, u8, u8)) -> Result<f64> {
    let (a1, a2, b1, b2) = roles;
    let e = |x, y| t.require(x, y).map(PairStats::correlator);
    Ok(e(a1, b1)? + e(a1, b2)? + e(a2, b1)? - e(a2, b2)?)
}

pub fn table_statistics(t: &CorrelationTable) -> Result<TableStatistics> {
    for (x, y) in PROTOCOL_PAIRS {
        t.require(x, y)?;
    }
    let q = t.require(0, 1)?.disagree();
    let s = chsh_from_table(t, (1, 2, 1, 2))?;

    // weights: counts for empirical tables, uniform for exact ones
    let weight = |s: &PairStats| if s.total() > 0 { s.total() as f64 } else { 1.0 };
    let mut alice: BTreeMap<u8, (f64, f64)> = BTreeMap::new();
    let mut bob: BTreeMap<u8, (f64, f64)> = BTreeMap::new();
    for (&(x, y), st) in t.pairs() {
        let (ma, mb) = st.marginals();
        let w = weight(st);
        let ea = alice.entry(x).or_default();
        ea.0 += w * ma;
        ea.1 += w;
        let eb = bob.entry(y).or_default();
        eb.0 += w * mb;
        eb.1 += w;
    }
    let avg = |m: BTreeMap<u8, (f64, f64)>| m.into_iter().map(|(k, (s, w))| (k, s / w)).collect();
    Ok(TableStatistics { q, s, alice_marginals: avg(alice), bob_marginals: avg(bob) })
}
