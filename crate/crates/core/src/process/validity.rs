//! Process-matrix validity: positivity, normalization, and unit probability
//! for every tuple of deterministic local operations.
//!
//! Unit probability is a linear constraint, so checking it on a finite
//! family of channels whose affine hull is the full channel space settles it
//! for every CPTP tuple. An independent randomized route over Haar-sampled
//! channels cross-checks the same property.

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};

use crate::channels::{cptp_affine_spanning_set, random_cptp};
use crate::error::Result;
use crate::linalg::CMatrix;

use super::operations::{contract_leading, expectation, LocalOperationTuple};
use super::structure::{ProcessMatrix, ProcessVector};

/// Tolerances and sampling effort for [`is_valid_process`].
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ValidityOptions {
    /// Permitted negative slack on the smallest eigenvalue.
    pub psd_tol: f64,
    /// Permitted deviation of any deterministic-tuple probability from 1,
    /// and of the trace from its required value (relative to it).
    pub norm_tol: f64,
    /// Permitted Hermiticity residual (max-norm of `W - W†`).
    pub hermiticity_tol: f64,
    /// Number of Haar-random CPTP tuples for the sampled cross-check.
    pub random_tuples: usize,
    /// Seed for the sampled route.
    pub seed: u64,
}

impl Default for ValidityOptions {
    fn default() -> Self {
        Self {
            psd_tol: 1e-10,
            norm_tol: 1e-9,
            hermiticity_tol: 1e-10,
            random_tuples: 100,
            seed: 0,
        }
    }
}

/// Diagnostics of a validity check.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ValidityReport {
    pub hermiticity_residual: f64,
    pub min_eigenvalue: f64,
    pub trace_value: f64,
    pub expected_trace: f64,
    /// Worst `|P - 1|` over the spanning family of deterministic tuples.
    pub spanning_deviation: f64,
    /// Worst `|P - 1|` over the Haar-sampled tuples.
    pub sampled_deviation: f64,
    pub hermitian: bool,
    pub positive: bool,
    pub normalized: bool,
    pub is_valid: bool,
    /// The deterministic tuple realizing `spanning_deviation`, when that
    /// deviation breaks the tolerance.
    pub violating_tuple: Option<LocalOperationTuple>,
}

struct SpanScan<'a> {
    sets: &'a [Vec<CMatrix>],
    rest_dims: Vec<usize>,
    current: Vec<usize>,
    best_deviation: f64,
    best_indices: Vec<usize>,
}

impl SpanScan<'_> {
    fn run(&mut self, level: usize, w: &CMatrix) {
        if level == self.sets.len() {
            let dev = (w[(0, 0)] - 1.0).norm();
            if dev > self.best_deviation {
                self.best_deviation = dev;
                self.best_indices = self.current.clone();
            }
            return;
        }
        for (k, m) in self.sets[level].iter().enumerate() {
            self.current.push(k);
            let next = contract_leading(w, m, self.rest_dims[level]);
            self.run(level + 1, &next);
            self.current.pop();
        }
    }
}

/// Checks whether `w` is a valid process matrix: Hermitian, positive
/// semidefinite, trace equal to the product of output dimensions, and unit
/// probability for every tuple of deterministic operations (spanning route
/// plus sampled cross-check).
pub fn is_valid_process(w: &ProcessMatrix, options: &ValidityOptions) -> Result<ValidityReport> {
    let hermiticity_residual = w.operator().hermiticity_residual()?;
    let min_eigenvalue = w.operator().min_eigenvalue()?;
    let trace = w.operator().trace()?;
    let trace_value = trace.re;
    let expected_trace = w.expected_trace();

    // Spanning route over the affine channel bases of every party.
    let spans: Vec<Vec<crate::channels::ChoiOperator>> = w
        .parties()
        .iter()
        .map(|p| cptp_affine_spanning_set(p.d_in(), p.d_out()))
        .collect();
    let sets: Vec<Vec<CMatrix>> = spans
        .iter()
        .map(|set| set.iter().map(|c| c.op().matrix().clone()).collect())
        .collect();
    let mut rest: usize = w.parties().iter().map(|p| p.block_dim()).product();
    let rest_dims: Vec<usize> = w
        .parties()
        .iter()
        .map(|p| {
            rest /= p.block_dim();
            rest
        })
        .collect();
    let mut scan = SpanScan {
        sets: &sets,
        rest_dims,
        current: Vec::new(),
        best_deviation: 0.0,
        best_indices: vec![0; sets.len()],
    };
    scan.run(0, w.operator().matrix());
    let spanning_deviation = scan.best_deviation;

    // Sampled route: identical statement, independent channels.
    let mut rng = ChaCha12Rng::seed_from_u64(options.seed);
    let mut sampled_deviation = 0.0f64;
    for _ in 0..options.random_tuples {
        let mut builder = LocalOperationTuple::builder(w.parties());
        for p in w.parties() {
            let choi = random_cptp(p.d_in(), p.d_out(), &mut rng);
            builder = builder.with_choi(p.name(), &choi)?;
        }
        let p = expectation(w, &builder.build()?)?;
        sampled_deviation = sampled_deviation.max((p - 1.0).norm());
    }

    let hermitian = hermiticity_residual <= options.hermiticity_tol;
    let positive = min_eigenvalue >= -options.psd_tol;
    let trace_ok = (trace_value - expected_trace).abs()
        <= options.norm_tol * expected_trace.max(1.0)
        && trace.im.abs() <= options.norm_tol * expected_trace.max(1.0);
    let spanning_ok = spanning_deviation <= options.norm_tol;
    let sampled_ok = sampled_deviation <= options.norm_tol;
    let normalized = trace_ok && spanning_ok && sampled_ok;

    let violating_tuple = if spanning_ok {
        None
    } else {
        let mut builder = LocalOperationTuple::builder(w.parties());
        for (p, (set, &k)) in
            w.parties().iter().zip(spans.iter().zip(&scan.best_indices))
        {
            builder = builder.with_choi(p.name(), &set[k])?;
        }
        Some(builder.build()?)
    };

    Ok(ValidityReport {
        hermiticity_residual,
        min_eigenvalue,
        trace_value,
        expected_trace,
        spanning_deviation,
        sampled_deviation,
        hermitian,
        positive,
        normalized,
        is_valid: hermitian && positive && normalized,
        violating_tuple,
    })
}

/// Validity of the rank-one process `|w><w|`.
pub fn is_valid_process_vector(
    w: &ProcessVector,
    options: &ValidityOptions,
) -> Result<ValidityReport> {
    is_valid_process(&w.to_matrix(), options)
}
