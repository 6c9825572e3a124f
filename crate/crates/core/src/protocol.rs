//! Monte-Carlo simulation of protocol rounds under a collective attack: the
//! same state and measurements every round, outcomes drawn from the Born rule.
//!
//! Round `i` draws all of its randomness from [`indexed_rng`]`(seed, i)` in a
//! fixed order, so a log is bit-identical for any number of threads.

use std::fmt::Write as _;
use std::io::{self, Write};

use rand::Rng;
use rayon::prelude::*;

use crate::bounds::{holevo_bound_di, keyrate, Provenance, RateReport, Scenario};
use crate::chsh::{
    table::outcome_index, table_from_state, table_statistics, CorrelationTable, MeasurementSet, PairStats,
    TableStatistics, PROTOCOL_PAIRS,
};
use crate::eve::{build_attack, AttackSpec};
use crate::qmath::DensityMatrix;
use crate::sampling::indexed_rng;
use crate::{Error, Result, TSIRELSON};

#[derive(Debug, Clone, PartialEq)]
pub struct ProtocolConfig {
    pub n_rounds: u64,
    /// Share of rounds using the key pair `(A0, B1)`.
    pub key_fraction: f64,
    /// Shares of `(A1,B1), (A1,B2), (A2,B1), (A2,B2)`.
    pub chsh_fractions: [f64; 4],
    /// Click probability of each detector.
    pub eta: f64,
    pub seed: u64,
    /// Flip both outcomes on a shared public coin.
    pub symmetrize_marginals: bool,
}

impl ProtocolConfig {
    /// Half the rounds for the key, the rest split evenly over the CHSH pairs,
    /// perfect detectors, symmetrization on.
    pub fn new(n_rounds: u64, seed: u64) -> Self {
        ProtocolConfig {
            n_rounds,
            key_fraction: 0.5,
            chsh_fractions: [0.125; 4],
            eta: 1.0,
            seed,
            symmetrize_marginals: true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_rounds == 0 {
            return Err(Error::domain("protocol needs at least one round"));
        }
        let fractions = self.fractions();
        if fractions.iter().any(|f| !(f.is_finite() && *f >= 0.0)) {
            return Err(Error::domain(format!("setting fractions {fractions:?} must be non-negative")));
        }
        let total: f64 = fractions.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::domain(format!("setting fractions sum to {total}, not 1")));
        }
        if !(0.0..=1.0).contains(&self.eta) {
            return Err(Error::domain(format!("detection efficiency {} outside [0, 1]", self.eta)));
        }
        Ok(())
    }

    /// Fractions in [`PROTOCOL_PAIRS`] order.
    fn fractions(&self) -> [f64; 5] {
        let [c1, c2, c3, c4] = self.chsh_fractions;
        [self.key_fraction, c1, c2, c3, c4]
    }
}

/// Source state, measurements, and the classical channel on `A0`.
#[derive(Debug, Clone)]
pub struct Devices {
    pub state: DensityMatrix,
    pub measurements: MeasurementSet,
    /// Probability that `A0` outputs a fresh uniform bit instead of its outcome.
    pub a0_random_prob: f64,
}

impl Devices {
    pub fn honest(state: DensityMatrix, measurements: MeasurementSet) -> Self {
        Devices { state, measurements, a0_random_prob: 0.0 }
    }

    pub fn from_attack(spec: &AttackSpec) -> Self {
        Devices { state: spec.state.clone(), measurements: spec.measurements.clone(), a0_random_prob: spec.prob_random }
    }

    /// Exact distribution of the mapped outcomes `(a', b')` per protocol pair,
    /// after the `A0` channel, detector losses and (optionally) the joint flip.
    pub fn expected_table(&self, eta: f64, symmetrize: bool) -> Result<CorrelationTable> {
        let born = table_from_state(&self.state, &self.measurements)?;
        let mut out = CorrelationTable::new();
        for (x, y) in PROTOCOL_PAIRS {
            let mut p = born.require(x, y)?.probs;
            if x == 0 {
                p = randomize_alice(p, self.a0_random_prob);
            }
            p = lose_alice(p, eta);
            p = transpose(lose_alice(transpose(p), eta));
            if symmetrize {
                p = [
                    [0.5 * (p[0][0] + p[1][1]), 0.5 * (p[0][1] + p[1][0])],
                    [0.5 * (p[1][0] + p[0][1]), 0.5 * (p[1][1] + p[0][0])],
                ];
            }
            out.insert(x, y, PairStats { probs: p, counts: [[0; 2]; 2] })?;
        }
        Ok(out)
    }
}

fn bob_marginal(p: [[f64; 2]; 2]) -> [f64; 2] {
    [p[0][0] + p[1][0], p[0][1] + p[1][1]]
}

fn randomize_alice(p: [[f64; 2]; 2], r: f64) -> [[f64; 2]; 2] {
    let mb = bob_marginal(p);
    [0, 1].map(|i| [0, 1].map(|j| (1.0 - r) * p[i][j] + r * 0.5 * mb[j]))
}

/// Alice's detector misses with probability `1 - η`; a miss reads `-1`.
fn lose_alice(p: [[f64; 2]; 2], eta: f64) -> [[f64; 2]; 2] {
    let mb = bob_marginal(p);
    let minus = outcome_index(-1);
    [0, 1].map(|i| [0, 1].map(|j| eta * p[i][j] + if i == minus { (1.0 - eta) * mb[j] } else { 0.0 }))
}

fn transpose(p: [[f64; 2]; 2]) -> [[f64; 2]; 2] {
    [[p[0][0], p[1][0]], [p[0][1], p[1][1]]]
}

/// One protocol round. Raw outcomes use `0` for a missing click.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RoundRecord {
    pub x: u8,
    pub y: u8,
    pub a_raw: i8,
    pub b_raw: i8,
    pub a: i8,
    pub b: i8,
    /// Whether both outcomes were flipped.
    pub flip: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct RoundLog {
    pub rounds: Vec<RoundRecord>,
}

impl RoundLog {
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "round,X,Y,a_raw,b_raw,a,b,flip")?;
        for (i, r) in self.rounds.iter().enumerate() {
            writeln!(w, "{i},{},{},{},{},{},{},{}", r.x, r.y, r.a_raw, r.b_raw, r.a, r.b, u8::from(r.flip))?;
        }
        Ok(())
    }

    pub fn to_csv(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("write to memory");
        String::from_utf8(buf).expect("ascii")
    }

    /// Counts of mapped outcomes per setting pair.
    pub fn table(&self) -> Result<CorrelationTable> {
        let mut counts = [[[0u64; 2]; 2]; 5];
        for r in &self.rounds {
            let slot = PROTOCOL_PAIRS.iter().position(|&p| p == (r.x, r.y)).expect("protocol pair");
            counts[slot][outcome_index(r.a)][outcome_index(r.b)] += 1;
        }
        let mut t = CorrelationTable::new();
        for (slot, (x, y)) in PROTOCOL_PAIRS.into_iter().enumerate() {
            if counts[slot].iter().flatten().sum::<u64>() == 0 {
                return Err(Error::Estimation(format!("no rounds used the setting pair (A{x}, B{y})")));
            }
            t.insert(x, y, PairStats::from_counts(counts[slot]))?;
        }
        Ok(t)
    }
}

fn pick(cumulative: &[f64], u: f64) -> usize {
    cumulative.iter().position(|&c| u < c).unwrap_or(cumulative.len() - 1)
}

fn cumulative<const N: usize>(p: [f64; N]) -> [f64; N] {
    let mut acc = 0.0;
    p.map(|x| {
        acc += x;
        acc
    })
}

/// Everything a run produces.
#[derive(Debug, Clone)]
pub struct ProtocolRun {
    pub log: RoundLog,
    pub table: CorrelationTable,
    pub stats: TableStatistics,
    /// Binomial standard error of `Q̂`.
    pub sigma_q: f64,
    /// Standard error of `Ŝ` from the four correlators in quadrature.
    pub sigma_s: f64,
    /// `Ŝ` exceeded `2√2` and was clamped before evaluating the bound.
    pub s_clamped: bool,
    pub report: RateReport,
}

impl ProtocolRun {
    pub fn q_hat(&self) -> f64 {
        self.stats.q
    }

    pub fn s_hat(&self) -> f64 {
        self.stats.s
    }

    /// Largest `|⟨a_X⟩|` or `|⟨b_Y⟩|`.
    pub fn max_marginal_bias(&self) -> f64 {
        self.stats.alice_marginals.iter().chain(&self.stats.bob_marginals).map(|(_, m)| m.abs()).fold(0.0, f64::max)
    }

    pub fn to_text(&self) -> String {
        let mut out = self.report.to_text();
        writeln!(out, "S_hat={}", crate::numfmt::sig(self.s_hat(), 12)).expect("write to string");
        writeln!(out, "S_clamped={}", self.s_clamped).expect("write to string");
        out
    }
}

fn simulate_round(
    devices: &Devices,
    born: &[[f64; 4]; 5],
    pair_cdf: &[f64; 5],
    cfg: &ProtocolConfig,
    i: u64,
) -> RoundRecord {
    let mut rng = indexed_rng(cfg.seed, i);
    // fixed draw order: pair, outcome, A0 channel, A0 coin, clicks, flip
    let slot = pick(pair_cdf, rng.random::<f64>());
    let (x, y) = PROTOCOL_PAIRS[slot];
    let k = pick(&born[slot], rng.random::<f64>());
    let (mut a, b) = (if k < 2 { 1 } else { -1 }, if k.is_multiple_of(2) { 1 } else { -1 });
    let randomize = rng.random_bool(devices.a0_random_prob);
    let coin = if rng.random_bool(0.5) { 1 } else { -1 };
    if x == 0 && randomize {
        a = coin;
    }
    let a_raw = if rng.random::<f64>() < cfg.eta { a } else { 0 };
    let b_raw = if rng.random::<f64>() < cfg.eta { b } else { 0 };
    let flip = rng.random_bool(0.5) && cfg.symmetrize_marginals;
    let map = |v: i8| {
        let v = if v == 0 { -1 } else { v };
        if flip {
            -v
        } else {
            v
        }
    };
    RoundRecord { x, y, a_raw, b_raw, a: map(a_raw), b: map(b_raw), flip }
}

pub fn run_devices(devices: &Devices, cfg: &ProtocolConfig) -> Result<ProtocolRun> {
    cfg.validate()?;
    if !(0.0..=1.0).contains(&devices.a0_random_prob) {
        return Err(Error::domain(format!("A0 randomization probability {} outside [0, 1]", devices.a0_random_prob)));
    }
    let exact = table_from_state(&devices.state, &devices.measurements)?;
    let mut born = [[0.0; 4]; 5];
    for (slot, (x, y)) in PROTOCOL_PAIRS.into_iter().enumerate() {
        let p = exact.require(x, y)?.probs;
        born[slot] = cumulative([p[0][0], p[0][1], p[1][0], p[1][1]]);
    }
    let pair_cdf = cumulative(cfg.fractions());

    let rounds: Vec<RoundRecord> =
        (0..cfg.n_rounds).into_par_iter().map(|i| simulate_round(devices, &born, &pair_cdf, cfg, i)).collect();
    let log = RoundLog { rounds };
    let table = log.table()?;
    let stats = table_statistics(&table)?;

    let key = table.require(0, 1)?;
    let sigma_q = (stats.q * (1.0 - stats.q) / key.total() as f64).sqrt();
    let sigma_s = PROTOCOL_PAIRS[1..]
        .iter()
        .map(|&(x, y)| {
            let st = table.require(x, y).expect("checked by table_statistics");
            let p = st.agree();
            4.0 * p * (1.0 - p) / st.total() as f64
        })
        .sum::<f64>()
        .sqrt();

    let s_clamped = stats.s > TSIRELSON;
    let mut report = keyrate(stats.q, stats.s.min(TSIRELSON), Scenario::DeviceIndependent)?;
    report.provenance = Provenance::Estimated { n: cfg.n_rounds, sigma_q, sigma_s, seed: cfg.seed };
    Ok(ProtocolRun { log, table, stats, sigma_q, sigma_s, s_clamped, report })
}

/// Runs honest devices holding `source` and measuring `m`.
pub fn run_protocol(source: &DensityMatrix, m: &MeasurementSet, cfg: &ProtocolConfig) -> Result<ProtocolRun> {
    run_devices(&Devices::honest(source.clone(), m.clone()), cfg)
}

/// Paired runs with the same seed, symmetrization on and off.
#[derive(Debug, Clone)]
pub struct SymmetrizationCheck {
    pub on: ProtocolRun,
    pub off: ProtocolRun,
}

impl SymmetrizationCheck {
    pub fn delta_q(&self) -> f64 {
        (self.on.q_hat() - self.off.q_hat()).abs()
    }

    pub fn delta_s(&self) -> f64 {
        (self.on.s_hat() - self.off.s_hat()).abs()
    }

    /// Both differences within `k` combined standard errors.
    pub fn consistent(&self, k: f64) -> bool {
        let sq = self.on.sigma_q.hypot(self.off.sigma_q);
        let ss = self.on.sigma_s.hypot(self.off.sigma_s);
        self.delta_q() <= k * sq && self.delta_s() <= k * ss
    }
}

pub fn symmetrization_effect_check(devices: &Devices, cfg: &ProtocolConfig) -> Result<SymmetrizationCheck> {
    let on = run_devices(devices, &ProtocolConfig { symmetrize_marginals: true, ..cfg.clone() })?;
    let off = run_devices(devices, &ProtocolConfig { symmetrize_marginals: false, ..cfg.clone() })?;
    Ok(SymmetrizationCheck { on, off })
}

/// A simulated run of the optimal attack and how it compares with its targets.
#[derive(Debug, Clone)]
pub struct AttackRun {
    pub spec: AttackSpec,
    pub run: ProtocolRun,
    /// `F(S_target)`
    pub chi_target: f64,
    /// `F(min(Ŝ, 2√2))`
    pub chi_hat: f64,
    /// `|F'(Ŝ)| σ_S`, linear propagation.
    pub chi_sigma: f64,
}

impl AttackRun {
    /// `(Q̂ - Q)/σ_Q`, infinite if `σ_Q = 0` and the estimate is off.
    pub fn z_q(&self) -> f64 {
        z(self.run.q_hat() - self.spec.q_target, self.run.sigma_q)
    }

    pub fn z_s(&self) -> f64 {
        z(self.run.s_hat() - self.spec.s_target, self.run.sigma_s)
    }

    pub fn z_chi(&self) -> f64 {
        z(self.chi_hat - self.chi_target, self.chi_sigma)
    }
}

fn z(diff: f64, sigma: f64) -> f64 {
    if diff == 0.0 {
        0.0
    } else {
        diff.abs() / sigma
    }
}

/// Slope of `F` by central differences, one-sided at the ends of `[2, 2√2]`.
fn f_slope(s: f64) -> Result<f64> {
    let h = 1e-6;
    let lo = (s - h).max(2.0);
    let hi = (s + h).min(TSIRELSON);
    if hi <= lo {
        return Ok(0.0);
    }
    Ok((holevo_bound_di(hi)? - holevo_bound_di(lo)?) / (hi - lo))
}

pub fn attack_end_to_end(s_target: f64, q_target: f64, cfg: &ProtocolConfig) -> Result<AttackRun> {
    let spec = build_attack(s_target, q_target)?;
    let run = run_devices(&Devices::from_attack(&spec), cfg)?;
    let chi_target = holevo_bound_di(spec.s_target)?;
    let s_hat = run.s_hat().min(TSIRELSON);
    let chi_hat = holevo_bound_di(s_hat)?;
    let chi_sigma = f_slope(s_hat)?.abs() * run.sigma_s;
    Ok(AttackRun { spec, run, chi_target, chi_hat, chi_sigma })
}

/// `(Q, S)` of `p|Φ+⟩⟨Φ+| + (1-p) I/4` with the standard settings.
pub fn werner_statistics(p: f64) -> (f64, f64) {
    ((1.0 - p) / 2.0, TSIRELSON * p)
}
