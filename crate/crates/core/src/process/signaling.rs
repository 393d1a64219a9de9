//! Detecting whether one party's choice of operation can shift another
//! party's outcome statistics.

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};

use crate::channels::{random_cptp, random_instrument};
use crate::error::{Error, Result};
use crate::linalg::CMatrix;
use crate::tensor::LabeledOperator;

use super::operations::{probability, LocalOperationTuple, TupleBuilder};
use super::structure::ProcessMatrix;

/// Outcome of a signaling probe between two parties.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SignalingReport {
    pub from: String,
    pub to: String,
    /// Largest observed `|P(outcome | op) - P(outcome | op')|` over probed
    /// operation pairs at `from` and outcomes at `to`.
    pub max_difference: f64,
    pub signaling: bool,
    pub tol: f64,
    /// Number of probability evaluations behind `max_difference`.
    pub evaluations: usize,
}

fn neutral_elsewhere(
    w: &ProcessMatrix,
    from: &str,
    to: &str,
) -> Result<TupleBuilder> {
    let mut builder = LocalOperationTuple::builder(w.parties());
    for p in w.parties() {
        if p.name() != from && p.name() != to {
            builder = builder.neutral(p.name())?;
        }
    }
    Ok(builder)
}

/// Probes whether `from` can signal to `to` in the process `w`.
///
/// Deterministic probes prepare each output basis state at `from` and
/// measure each input basis outcome at `to` (repreparing a fixed state on
/// `to`'s output, if any), with every other party applying a neutral
/// channel. `random_probes` additional rounds draw Haar-random channel pairs
/// at `from` and a random binary instrument at `to`.
pub fn can_signal(
    w: &ProcessMatrix,
    from: &str,
    to: &str,
    random_probes: usize,
    seed: u64,
    tol: f64,
) -> Result<SignalingReport> {
    if from == to {
        return Err(Error::InvalidArgument("signaling needs two distinct parties".into()));
    }
    let pf = w
        .party(from)
        .ok_or_else(|| Error::UnknownLabel(from.to_string()))?
        .clone();
    let pt = w.party(to).ok_or_else(|| Error::UnknownLabel(to.to_string()))?.clone();

    let mut max_difference = 0.0f64;
    let mut evaluations = 0usize;

    // Deterministic probes: basis preparations against basis outcomes.
    let d_prep = pf.d_out();
    let d_meas = pt.d_in();
    if d_prep > 1 && d_meas > 1 {
        let mut table = vec![vec![0.0f64; d_meas]; d_prep];
        for (a, row) in table.iter_mut().enumerate() {
            let prep = basis_preparation(pf.d_in(), pf.d_out(), a);
            for (o, slot) in row.iter_mut().enumerate() {
                let meas = basis_outcome(pt.d_in(), pt.d_out(), o);
                let ops = neutral_elsewhere(w, from, to)?
                    .with_operator(from, prep.clone())?
                    .with_operator(to, meas)?
                    .build()?;
                *slot = probability(w, &ops)?;
                evaluations += 1;
            }
        }
        for a in 0..d_prep {
            for b in (a + 1)..d_prep {
                for o in 0..d_meas {
                    max_difference = max_difference.max((table[a][o] - table[b][o]).abs());
                }
            }
        }
    }

    // Randomized probes.
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    if pf.block_dim() > 1 && pt.block_dim() > 1 {
        for _ in 0..random_probes {
            let op1 = random_cptp(pf.d_in(), pf.d_out(), &mut rng);
            let op2 = random_cptp(pf.d_in(), pf.d_out(), &mut rng);
            let outcomes = 2.min(pt.d_in() * pt.d_out());
            let instrument = random_instrument(pt.d_in(), pt.d_out(), outcomes, &mut rng)?;
            for branch in &instrument.outcomes {
                let p1 = probability(
                    w,
                    &neutral_elsewhere(w, from, to)?
                        .with_choi(from, &op1)?
                        .with_choi(to, branch)?
                        .build()?,
                )?;
                let p2 = probability(
                    w,
                    &neutral_elsewhere(w, from, to)?
                        .with_choi(from, &op2)?
                        .with_choi(to, branch)?
                        .build()?,
                )?;
                max_difference = max_difference.max((p1 - p2).abs());
                evaluations += 2;
            }
        }
    }

    Ok(SignalingReport {
        from: from.to_string(),
        to: to.to_string(),
        max_difference,
        signaling: max_difference > tol,
        tol,
        evaluations,
    })
}

/// `1_in (x) |a><a|_out`: trace the input, prepare basis state `a`.
fn basis_preparation(d_in: usize, d_out: usize, a: usize) -> LabeledOperator {
    let mut e = CMatrix::zeros(d_out, d_out);
    e[(a, a)] = 1.0.into();
    LabeledOperator::gate(CMatrix::identity(d_in, d_in).kronecker(&e)).expect("square")
}

/// `|o><o|_in (x) |0><0|_out`: basis outcome `o`, fixed repreparation.
fn basis_outcome(d_in: usize, d_out: usize, o: usize) -> LabeledOperator {
    let mut e = CMatrix::zeros(d_in, d_in);
    e[(o, o)] = 1.0.into();
    let mut r = CMatrix::zeros(d_out, d_out);
    r[(0, 0)] = 1.0.into();
    LabeledOperator::gate(e.kronecker(&r)).expect("square")
}
