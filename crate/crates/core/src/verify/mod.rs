//! Numerical checks of each step of the security proof.
//!
//! Every sweep takes an explicit seed; sample `i` draws from
//! [`indexed_rng`]`(seed, i)` so the sampled points do not depend on the
//! number of worker threads. Results come back as a [`Report`] whose CSV lists
//! failures only.

mod blocks;
mod lemma5;
mod reduction;
mod report;
mod theorem1;

pub use blocks::{decompose_observable_pair, random_block_pair, Block, BlockDecomposition, BlockForm, ObservablePair};
pub use lemma5::{
    delta_star_maximality_check, lemma5_bound, lemma5_f, lemma5_inequality_sweep, r_squared, DeltaStarCheck,
};
pub use reduction::{local_rotation, population_drift, ry, symmetrize_to_belldiag, ReductionTrace, Relabel};
pub use report::{Report, Violation};
pub use theorem1::{attack_family_gap, theorem1_sweep};

use rand::Rng;
use rayon::prelude::*;
use serde_json::json;

use crate::sampling::{indexed_rng, random_density_matrix};
use crate::{Error, Result};

/// Tolerance for block reconstructions and reduced-state defects.
pub const RECONSTRUCTION_TOL: f64 = 1e-10;

fn par_sweep(suite: &str, samples: usize, f: impl Fn(&mut Report, u64) -> Result<()> + Sync) -> Result<Report> {
    if samples == 0 {
        return Err(Error::domain("sweep needs at least one sample"));
    }
    let mut report = (0..samples)
        .into_par_iter()
        .try_fold(
            || Report::new(suite),
            |mut r, i| {
                f(&mut r, i as u64)?;
                Ok::<_, Error>(r)
            },
        )
        .try_reduce(
            || Report::new(suite),
            |mut a, b| {
                a.merge(b);
                Ok(a)
            },
        )?;
    lemma5::sort_violations(&mut report);
    Ok(report)
}

/// Random dimension-8 pairs with 0 to 4 qubit blocks (the rest scalar);
/// checks reconstruction and the block count.
pub fn blocks_sweep(samples: usize, seed: u64) -> Result<Report> {
    par_sweep("blocks", samples, |r, i| {
        let mut rng = indexed_rng(seed, i);
        let two = rng.random_range(0..=4);
        let (pair, expected) = random_block_pair(two, 8 - 2 * two, &mut rng);
        let d = decompose_observable_pair(&pair)?;
        let params = || json!({ "index": i, "qubit_blocks": two });
        r.check("blocks_residual", params, d.residual(&pair), RECONSTRUCTION_TOL);
        r.check("blocks_count", params, (d.block_count() as f64 - expected as f64).abs(), 0.0);
        r.check("blocks_rank", params, (d.total_rank() as f64 - 8.0).abs(), 0.0);
        Ok(())
    })
}

/// Random two-qubit states of every rank; checks that the reduction ends
/// diagonal and ordered and that both averages keep the Bell populations.
pub fn reduction_sweep(samples: usize, seed: u64) -> Result<Report> {
    par_sweep("reduction", samples, |r, i| {
        let mut rng = indexed_rng(seed, i);
        let rank = rng.random_range(1..=4);
        let rho = random_density_matrix(4, rank, &mut rng);
        let t = symmetrize_to_belldiag(&rho)?;
        let params = || json!({ "index": i, "rank": rank });
        r.check("reduction_diagonal", params, t.off_diagonal_defect(), RECONSTRUCTION_TOL);
        r.check("reduction_populations", params, population_drift(&t), 1e-12);
        let [pp, sm, pm, sp] = t.lambda.lambda();
        r.check("reduction_order_phi_plus", params, sm - pp, 1e-12);
        r.check("reduction_order_phi_minus", params, sp - pm, 1e-12);
        Ok(())
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn block_and_reduction_sweeps_are_clean() {
        let b = blocks_sweep(200, 1).unwrap();
        assert!(b.is_clean(), "{}", b.to_csv());
        assert_eq!(b.checks, 600);
        let r = reduction_sweep(500, 2).unwrap();
        assert!(r.is_clean(), "{}", r.to_csv());
    }

    #[test]
    fn zero_samples_rejected() {
        assert!(blocks_sweep(0, 1).is_err());
        assert!(theorem1_sweep(0, 4, 1).is_err());
        assert!(lemma5_inequality_sweep(0, 1).is_err());
    }
}
