//! Witness search showing that superpositions of oppositely ordered unitary
//! chains are not valid processes.
//!
//! Two chains over a shared source, two intermediate parties and a sink, one
//! routing the signal through `A` before `B` with unitaries `U_1, U_2, U_3`
//! and the other through `B` before `A` with `V_1, V_2, V_3`, are each valid
//! process vectors. Their linear combination `alpha w_1 + beta w_2` is not:
//! for any nonzero amplitudes some tuple of deterministic local operations
//! (a pure preparation, two unitary channels, a discard) has total
//! probability different from one. This module locates such a tuple in
//! closed form and verifies it against the full tensor contraction.
//!
//! With preparation `psi` and unitary channels `R` at `A` and `S` at `B`,
//! each chain alone gives probability one, so
//!
//! ```text
//! P = |alpha|^2 + |beta|^2 + 2 Re[conj(alpha) beta X(R, S, psi)]
//! ```
//!
//! where `X` is the cross term between the two branches. A fixed invertible
//! substitution `(R, S) -> (R', S')` built from the six chain unitaries
//! collapses the cross term to `<psi| V T |psi>` with `V` one effective
//! unitary and `T = R^adj S^adj R S`, reducing the search space to group
//! commutators: `T = 1` sweeps the numerical range of `V`, and embedded
//! qubit gadgets reach `T = +/- i sigma` on any eigenplane of `V`. Whichever
//! candidate moves `Re <psi| V T |psi>` farthest from the amplitude-fixed
//! target makes `P` deviate from one.

use num_complex::Complex64 as C64;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};

use crate::channels::{random_pure_state, random_unitary, ChoiOperator};
use crate::error::{Error, Result};
use crate::linalg::{hermitian_eigen, unitary_eigen, CMatrix, CVector};
use crate::process::{
    default_chain_parties, markovian_factors, markovian_unitary_process, probability_on_vector,
    reduce_with_identity, superpose, CausalOrder, LocalOperationTuple, PartySpace, ProcessVector,
};
use crate::tensor::{complex_pair, pauli, LabeledOperator, LabeledVector};

/// Minimum probability deviation accepted as a genuine violation.
pub const DEVIATION_THRESHOLD: f64 = 1e-6;

const UNITARY_TOL: f64 = 1e-10;
const CPTP_TOL: f64 = 1e-12;
const CROSS_CHECK_TOL: f64 = 1e-10;
const FACTOR_TOL: f64 = 1e-8;
const FALLBACK_DRAWS: usize = 1000;
/// Fixed stream for the randomized fallback so reruns are reproducible.
const FALLBACK_SEED: u64 = 0x7072_6f63_6d61_7431;

/// Two oppositely ordered three-unitary chains over one wire dimension,
/// plus the superposition amplitudes.
#[derive(Debug, Clone)]
pub struct NoGoContext {
    u: Vec<LabeledOperator>,
    v: Vec<LabeledOperator>,
    alpha: C64,
    beta: C64,
    dim: usize,
    phase: f64,
    target: f64,
    coupling: f64,
}

impl NoGoContext {
    /// `u` realizes the first intermediate party before the second, `v` the
    /// reverse; each chain needs exactly three unitaries of one dimension
    /// `>= 2`, and both amplitudes must be nonzero.
    pub fn new(
        u: &[LabeledOperator],
        v: &[LabeledOperator],
        alpha: C64,
        beta: C64,
    ) -> Result<Self> {
        if u.len() != 3 || v.len() != 3 {
            return Err(Error::InvalidArgument(format!(
                "each chain needs exactly 3 unitaries, got {} and {}",
                u.len(),
                v.len()
            )));
        }
        if alpha.norm() == 0.0 || beta.norm() == 0.0 {
            return Err(Error::ZeroAmplitude);
        }
        let dim = u[0].matrix().nrows();
        if dim < 2 {
            return Err(Error::InvalidArgument(
                "the chain wire dimension must be at least 2".into(),
            ));
        }
        for g in u.iter().chain(v.iter()) {
            if g.matrix().nrows() != dim || g.matrix().ncols() != dim {
                return Err(Error::DimMismatch {
                    context: "chain unitary dimensions",
                    expected: dim,
                    got: g.matrix().nrows(),
                });
            }
            if !g.is_unitary(UNITARY_TOL) {
                return Err(Error::NotUnitary(format!(
                    "residual {:.3e}",
                    g.unitarity_residual().unwrap_or(f64::INFINITY)
                )));
            }
        }
        let cross = alpha.conj() * beta;
        Ok(Self {
            u: u.to_vec(),
            v: v.to_vec(),
            alpha,
            beta,
            dim,
            phase: cross.arg(),
            target: (1.0 - alpha.norm_sqr() - beta.norm_sqr()) / (2.0 * cross.norm()),
            coupling: 2.0 * cross.norm(),
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn alpha(&self) -> C64 {
        self.alpha
    }

    pub fn beta(&self) -> C64 {
        self.beta
    }

    /// Phase of `conj(alpha) beta`.
    pub fn phase(&self) -> f64 {
        self.phase
    }

    /// The value of `Re <psi| V T |psi>` at which the probability stays one:
    /// `(1 - |alpha|^2 - |beta|^2) / (2 |conj(alpha) beta|)`.
    pub fn target(&self) -> f64 {
        self.target
    }

    /// Weight `2 |conj(alpha) beta|` of the cross term in the probability.
    pub fn coupling(&self) -> f64 {
        self.coupling
    }

    /// Chain party list: source `P`, intermediates `A` and `B`, sink `F`.
    pub fn parties(&self) -> Result<Vec<PartySpace>> {
        default_chain_parties(2, self.dim)
    }

    /// Process vector of the chain routing through `A` first.
    pub fn first_chain(&self) -> Result<ProcessVector> {
        markovian_unitary_process(&self.parties()?, &CausalOrder::sequential(2), &self.u)
    }

    /// Process vector of the chain routing through `B` first.
    pub fn second_chain(&self) -> Result<ProcessVector> {
        markovian_unitary_process(&self.parties()?, &CausalOrder::reversed(2), &self.v)
    }

    /// `alpha`-weighted first chain plus `beta`-weighted second chain.
    pub fn superposed(&self) -> Result<ProcessVector> {
        superpose(self.alpha, &self.first_chain()?, self.beta, &self.second_chain()?)
    }

    /// Cross term `<w_1| chi |w_2>` of the tuple that prepares `psi`,
    /// applies unitary channels `r` at `A` and `s` at `B` and discards at
    /// `F`, evaluated directly as
    /// `<psi| (U_3 s U_2 r U_1)^adj (V_3 r V_2 s V_1) |psi>`.
    pub fn cross_term(&self, r: &CMatrix, s: &CMatrix, psi: &CVector) -> Result<C64> {
        self.check_square(r, "cross-term operation at the first party")?;
        self.check_square(s, "cross-term operation at the second party")?;
        if psi.len() != self.dim {
            return Err(Error::DimMismatch {
                context: "prepared state vs chain wire",
                expected: self.dim,
                got: psi.len(),
            });
        }
        let fwd1 = self.u[2].matrix() * s * self.u[1].matrix() * r * self.u[0].matrix();
        let fwd2 = self.v[2].matrix() * r * self.v[1].matrix() * s * self.v[0].matrix();
        Ok((psi.adjoint() * fwd1.adjoint() * fwd2 * psi)[(0, 0)])
    }

    /// The single unitary governing the substituted cross term,
    /// `V = e^{i phase} U_1^adj V_2 U_3^adj V_3 U_2^adj V_1`, so that
    /// `e^{i phase} X(r', s', psi) = <psi| V (r^adj s^adj r s) |psi>`
    /// whenever `(r', s')` comes from [`Self::substituted_pair`].
    pub fn effective_unitary(&self) -> CMatrix {
        let u = |k: usize| self.u[k].matrix();
        let v = |k: usize| self.v[k].matrix();
        let m = u(0).adjoint() * v(1) * u(2).adjoint() * v(2) * u(1).adjoint() * v(0);
        m * C64::from_polar(1.0, self.phase)
    }

    /// Substitution collapsing the cross term to commutator form:
    /// `r' = U_2^adj V_1 r V_1^adj U_2 V_3^adj U_3 V_2^adj` and
    /// `s' = U_3^adj V_3 U_2^adj V_1 s V_1^adj`. Both are unitary whenever
    /// `r` and `s` are.
    pub fn substituted_pair(&self, r: &CMatrix, s: &CMatrix) -> Result<(CMatrix, CMatrix)> {
        self.check_square(r, "substituted operation at the first party")?;
        self.check_square(s, "substituted operation at the second party")?;
        let u = |k: usize| self.u[k].matrix();
        let v = |k: usize| self.v[k].matrix();
        let r_sub = u(1).adjoint()
            * v(0)
            * r
            * v(0).adjoint()
            * u(1)
            * v(2).adjoint()
            * u(2)
            * v(1).adjoint();
        let s_sub = u(2).adjoint() * v(2) * u(1).adjoint() * v(0) * s * v(0).adjoint();
        Ok((r_sub, s_sub))
    }

    fn check_square(&self, m: &CMatrix, context: &'static str) -> Result<()> {
        if m.nrows() != self.dim || m.ncols() != self.dim {
            return Err(Error::DimMismatch { context, expected: self.dim, got: m.nrows() });
        }
        Ok(())
    }
}

/// Pauli axis reached by a commutator gadget.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CommutatorAxis {
    X,
    Y,
    Z,
}

/// Sign of the commutator value `+/- i sigma`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CommutatorSign {
    Plus,
    Minus,
}

impl CommutatorSign {
    fn factor(self) -> f64 {
        match self {
            CommutatorSign::Plus => 1.0,
            CommutatorSign::Minus => -1.0,
        }
    }
}

/// Qubit pair `(r, s)` whose group commutator `r^adj s^adj r s` equals
/// `t = +/- i sigma_axis` exactly: `r` is the cyclically next Pauli and
/// `s = (1 +/- i sigma_axis) / sqrt(2)`.
pub fn commutator_gadget(axis: CommutatorAxis, sign: CommutatorSign) -> (CMatrix, CMatrix, CMatrix) {
    let sigma = |a: CommutatorAxis| match a {
        CommutatorAxis::X => pauli::x().into_matrix(),
        CommutatorAxis::Y => pauli::y().into_matrix(),
        CommutatorAxis::Z => pauli::z().into_matrix(),
    };
    let next = match axis {
        CommutatorAxis::X => CommutatorAxis::Y,
        CommutatorAxis::Y => CommutatorAxis::Z,
        CommutatorAxis::Z => CommutatorAxis::X,
    };
    let t = sigma(axis) * C64::new(0.0, sign.factor());
    let r = sigma(next);
    let s = (CMatrix::identity(2, 2) + &t).unscale(2f64.sqrt());
    (r, s, t)
}

/// How the violating tuple was found.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ViolationBranch {
    /// Commuting operations (`T = 1`); `psi` is an extremal eigenvector of
    /// the Hermitian part of the effective unitary.
    Commuting,
    /// Commutator gadget embedded in the plane spanned by eigenvectors `i`
    /// and `j` of the effective unitary.
    Eigenplane { i: usize, j: usize, axis: CommutatorAxis, sign: CommutatorSign },
    /// Haar-random fallback; `draw` is the winning draw index.
    Randomized { draw: usize },
}

/// A deterministic local-operation tuple whose total probability on the
/// superposed process deviates from one, along with the quantities that
/// produced it. `rho` is the preparation inserted at the source, `xi` and
/// `eta` the channel Chois at the two intermediate parties (over their
/// `_I`/`_O` subsystems), and `psi` the prepared state.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WitnessReport {
    pub party_a: String,
    pub party_b: String,
    #[serde(with = "complex_pair")]
    pub alpha: C64,
    #[serde(with = "complex_pair")]
    pub beta: C64,
    /// Phase of `conj(alpha) beta`.
    pub phi: f64,
    /// Cross-term value that would keep the probability at one,
    /// `(1 - |alpha|^2 - |beta|^2) / (2 |conj(alpha) beta|)`.
    pub lambda: f64,
    /// Cross-term value attained by the witness tuple.
    pub attained: f64,
    /// Total probability of the witness tuple on the superposition.
    pub expectation: f64,
    /// `|expectation - 1|`.
    pub deviation: f64,
    pub branch: ViolationBranch,
    pub psi: LabeledVector,
    pub rho: LabeledOperator,
    pub xi: LabeledOperator,
    pub eta: LabeledOperator,
}

struct Candidate {
    gap: f64,
    psi: CVector,
    r: CMatrix,
    s: CMatrix,
    branch: ViolationBranch,
}

/// Searches for a deterministic tuple whose probability on the superposed
/// process differs from one by more than [`DEVIATION_THRESHOLD`].
///
/// Closed-form candidates come first: commuting operations with `psi` an
/// extremal eigenvector of the Hermitian part of the effective unitary,
/// then commutator gadgets on each of its eigenplanes. A Haar-random search
/// backs them up; if nothing clears the threshold the search fails with
/// [`Error::NoViolationFound`].
///
/// The winning tuple is rebuilt as explicit operators, its channels are
/// CPTP-checked, and its probability is recomputed through the full tensor
/// contraction and matched against the scalar identity
/// `|alpha|^2 + |beta|^2 + coupling * attained` before reporting.
pub fn find_violation(ctx: &NoGoContext) -> Result<WitnessReport> {
    let d = ctx.dim;
    let v_eff = ctx.effective_unitary();
    let gap_of = |mu: f64| (mu - ctx.target).abs();
    let better = |best: &Option<Candidate>, gap: f64| best.as_ref().map_or(true, |b| gap > b.gap);
    let mut best: Option<Candidate> = None;

    // Commuting candidates: mu sweeps the eigenvalues of the Hermitian part
    // of V, and the extremes maximize the distance to the target.
    let herm = (&v_eff + v_eff.adjoint()).scale(0.5);
    let (hvals, hvecs) = hermitian_eigen(&herm);
    let id = CMatrix::identity(d, d);
    for k in [0, d - 1] {
        let gap = gap_of(hvals[k]);
        if better(&best, gap) {
            best = Some(Candidate {
                gap,
                psi: hvecs.column(k).into_owned(),
                r: id.clone(),
                s: id.clone(),
                branch: ViolationBranch::Commuting,
            });
        }
    }

    // Eigenplane gadgets: T acts as +/- i sigma on a two-dimensional
    // invariant subspace of V, so mu sweeps the eigenvalues of the
    // Hermitian part of diag(lambda_i, lambda_j) * t.
    let (phases, evecs) = unitary_eigen(&v_eff)?;
    for i in 0..d {
        for j in (i + 1)..d {
            let diag = CMatrix::from_diagonal(&CVector::from_vec(vec![
                C64::from_polar(1.0, phases[i]),
                C64::from_polar(1.0, phases[j]),
            ]));
            for axis in [CommutatorAxis::X, CommutatorAxis::Y, CommutatorAxis::Z] {
                for sign in [CommutatorSign::Plus, CommutatorSign::Minus] {
                    let (r2, s2, t2) = commutator_gadget(axis, sign);
                    let vt = &diag * &t2;
                    let h2 = (&vt + vt.adjoint()).scale(0.5);
                    let (vals2, vecs2) = hermitian_eigen(&h2);
                    for k in 0..2 {
                        let gap = gap_of(vals2[k]);
                        if better(&best, gap) {
                            let w = vecs2.column(k);
                            best = Some(Candidate {
                                gap,
                                psi: evecs.column(i) * w[0] + evecs.column(j) * w[1],
                                r: embed_pair(&evecs, i, j, &r2),
                                s: embed_pair(&evecs, i, j, &s2),
                                branch: ViolationBranch::Eigenplane { i, j, axis, sign },
                            });
                        }
                    }
                }
            }
        }
    }

    // Randomized fallback in case the closed forms sit below threshold.
    if best.as_ref().map_or(true, |b| ctx.coupling * b.gap <= DEVIATION_THRESHOLD) {
        let mut rng = ChaCha12Rng::seed_from_u64(FALLBACK_SEED);
        for draw in 0..FALLBACK_DRAWS {
            let r = random_unitary(d, &mut rng).into_matrix();
            let s = random_unitary(d, &mut rng).into_matrix();
            let psi = random_pure_state(d, &mut rng).vector().clone();
            let t = r.adjoint() * s.adjoint() * &r * &s;
            let mu = (psi.adjoint() * &v_eff * t * &psi)[(0, 0)].re;
            let gap = gap_of(mu);
            if better(&best, gap) {
                best = Some(Candidate { gap, psi, r, s, branch: ViolationBranch::Randomized { draw } });
            }
        }
    }

    let cand = best.expect("the commuting candidate set is nonempty");
    if ctx.coupling * cand.gap <= DEVIATION_THRESHOLD {
        return Err(Error::NoViolationFound(DEVIATION_THRESHOLD));
    }

    // Recompute the attained cross-term value from the winning operators.
    let t = cand.r.adjoint() * cand.s.adjoint() * &cand.r * &cand.s;
    let attained = (cand.psi.adjoint() * &v_eff * t * &cand.psi)[(0, 0)].re;
    let predicted = ctx.alpha.norm_sqr() + ctx.beta.norm_sqr() + ctx.coupling * attained;

    // Materialize the tuple: the substituted unitary channels at A and B.
    let (r_sub, s_sub) = ctx.substituted_pair(&cand.r, &cand.s)?;
    let parties = ctx.parties()?;
    let psi =
        LabeledVector::ket(parties[0].output_label()?, cand.psi.iter().copied().collect())?;
    let xi = ChoiOperator::of_unitary(&LabeledOperator::gate(r_sub)?)?;
    let eta = ChoiOperator::of_unitary(&LabeledOperator::gate(s_sub)?)?;
    for (where_, choi) in [("first", &xi), ("second", &eta)] {
        let check = choi.is_cptp(CPTP_TOL);
        if !check.pass() {
            return Err(Error::NumericalInconsistency(format!(
                "witness channel at the {where_} party failed its CPTP check \
                 (min eigenvalue {:.3e}, TP residual {:.3e})",
                check.min_eigenvalue, check.tp_residual
            )));
        }
    }
    let tuple = LocalOperationTuple::builder(&parties)
        .prepare("P", &psi)?
        .with_choi("A", &xi)?
        .with_choi("B", &eta)?
        .discard("F")?
        .build()?;

    let expectation = probability_on_vector(&ctx.superposed()?, &tuple)?;
    if (expectation - predicted).abs() > CROSS_CHECK_TOL * predicted.abs().max(1.0) {
        return Err(Error::NumericalInconsistency(format!(
            "tensor contraction gives probability {expectation:.12}, the scalar identity {predicted:.12}"
        )));
    }
    let deviation = (expectation - 1.0).abs();
    if deviation <= DEVIATION_THRESHOLD {
        return Err(Error::NoViolationFound(DEVIATION_THRESHOLD));
    }

    Ok(WitnessReport {
        party_a: parties[1].name().to_string(),
        party_b: parties[2].name().to_string(),
        alpha: ctx.alpha,
        beta: ctx.beta,
        phi: ctx.phase,
        lambda: ctx.target,
        attained,
        expectation,
        deviation,
        branch: cand.branch,
        psi,
        rho: tuple.op_for("P").expect("assigned").clone(),
        xi: tuple.op_for("A").expect("assigned").clone(),
        eta: tuple.op_for("B").expect("assigned").clone(),
    })
}

/// Extends a 2x2 gate on the span of eigenvector columns `i` and `j` by the
/// identity on the orthogonal complement.
fn embed_pair(evecs: &CMatrix, i: usize, j: usize, g2: &CMatrix) -> CMatrix {
    let cols = [evecs.column(i), evecs.column(j)];
    let mut g = CMatrix::identity(evecs.nrows(), evecs.nrows());
    for a in 0..2 {
        for b in 0..2 {
            let delta = if a == b { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) };
            g += &cols[a] * cols[b].adjoint() * (g2[(a, b)] - delta);
        }
    }
    g
}

/// One randomized context inside a batch run, with the full witness so the
/// record stands alone as a regression fixture.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrialRecord {
    pub trial: usize,
    pub seed: u64,
    pub witness: WitnessReport,
}

/// Outcome of [`batch_witnesses`] over independently seeded random contexts.
/// The deviation statistics run over the successful trials; an empty batch
/// reports zeroed statistics and counts as all-violating vacuously.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BatchReport {
    pub dim: usize,
    pub trials: usize,
    pub seed: u64,
    pub threshold: f64,
    pub failures: usize,
    pub min_deviation: f64,
    pub median_deviation: f64,
    pub max_deviation: f64,
    pub mean_deviation: f64,
    pub all_violate: bool,
    pub records: Vec<TrialRecord>,
}

/// Runs [`find_violation`] on `trials` random contexts: six Haar unitaries
/// of dimension `dim` and amplitudes with moduli in `[0.2, 1]` and uniform
/// phases. Each trial draws from its own sub-seed (recorded per trial), so
/// batches are reproducible and individual trials replayable. Trials whose
/// search errors out are counted in `failures` rather than aborting the
/// batch, and only successes contribute records and statistics.
pub fn batch_witnesses(dim: usize, trials: usize, seed: u64) -> Result<BatchReport> {
    let mut master = ChaCha12Rng::seed_from_u64(seed);
    let sub_seeds: Vec<u64> = (0..trials).map(|_| master.gen()).collect();
    let mut records = Vec::with_capacity(trials);
    let mut failures = 0;
    for (trial, &trial_seed) in sub_seeds.iter().enumerate() {
        let mut rng = ChaCha12Rng::seed_from_u64(trial_seed);
        let u: Vec<LabeledOperator> = (0..3).map(|_| random_unitary(dim, &mut rng)).collect();
        let v: Vec<LabeledOperator> = (0..3).map(|_| random_unitary(dim, &mut rng)).collect();
        let alpha = random_amplitude(&mut rng);
        let beta = random_amplitude(&mut rng);
        let report = NoGoContext::new(&u, &v, alpha, beta).and_then(|ctx| find_violation(&ctx));
        match report {
            Ok(witness) => records.push(TrialRecord { trial, seed: trial_seed, witness }),
            Err(_) => failures += 1,
        }
    }
    let deviations: Vec<f64> = records.iter().map(|r| r.witness.deviation).collect();
    let (min_dev, median_dev, max_dev, mean_dev) = deviation_stats(deviations);
    let all_violate =
        failures == 0 && records.iter().all(|r| r.witness.deviation > DEVIATION_THRESHOLD);
    Ok(BatchReport {
        dim,
        trials,
        seed,
        threshold: DEVIATION_THRESHOLD,
        failures,
        min_deviation: min_dev,
        median_deviation: median_dev,
        max_deviation: max_dev,
        mean_deviation: mean_dev,
        all_violate,
        records,
    })
}

fn random_amplitude(rng: &mut impl Rng) -> C64 {
    let modulus = 0.2 + 0.8 * rng.gen::<f64>();
    C64::from_polar(modulus, std::f64::consts::TAU * rng.gen::<f64>())
}

/// `(min, median, max, mean)`, all zero for an empty slice.
fn deviation_stats(mut deviations: Vec<f64>) -> (f64, f64, f64, f64) {
    if deviations.is_empty() {
        return (0.0, 0.0, 0.0, 0.0);
    }
    deviations.sort_by(f64::total_cmp);
    let n = deviations.len();
    let median = if n % 2 == 1 {
        deviations[n / 2]
    } else {
        0.5 * (deviations[n / 2 - 1] + deviations[n / 2])
    };
    let mean = deviations.iter().sum::<f64>() / n as f64;
    (deviations[0], median, deviations[n - 1], mean)
}

/// Violation witness for a superposition of two full chains. `reduced` is
/// the two-party witness on the chain obtained by plugging identity
/// channels into every other intermediate party; `tuple` extends it back to
/// all parties and `expectation` is its probability on the full
/// superposition.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ChainViolation {
    pub party_a: String,
    pub party_b: String,
    pub expectation: f64,
    pub deviation: f64,
    pub reduced: WitnessReport,
    pub tuple: LocalOperationTuple,
}

/// Builds a violation witness for `alpha w1 + beta w2`, where the unitary
/// chains `w1` and `w2` share their party list but rank at least one pair
/// of intermediate parties oppositely.
///
/// The first oppositely ranked pair is kept; every other intermediate party
/// is contracted with an identity channel, the three effective chain
/// unitaries are re-extracted from each reduced vector, and the two-party
/// search provides the witness operations. These lift back with identity
/// channels at the contracted parties, and the reported probability,
/// evaluated on the full superposition, must match the reduced value.
pub fn find_chain_violation(
    w1: &ProcessVector,
    order1: &CausalOrder,
    w2: &ProcessVector,
    order2: &CausalOrder,
    alpha: C64,
    beta: C64,
) -> Result<ChainViolation> {
    if w1.parties() != w2.parties() {
        return Err(Error::LayoutMismatch(
            "superposed chains must share their party list".into(),
        ));
    }
    let parties = w1.parties();
    if parties.len() < 4 {
        return Err(Error::InvalidArgument(
            "opposite orders need at least two intermediate parties".into(),
        ));
    }
    let m = parties.len() - 2;
    for order in [order1, order2] {
        if order.len() != m {
            return Err(Error::DimMismatch {
                context: "causal order length vs intermediate party count",
                expected: m,
                got: order.len(),
            });
        }
    }

    // First pair of intermediate parties ranked oppositely by the orders.
    let rank = |o: &CausalOrder, k: usize| o.rank_of(k).expect("orders are permutations");
    let mut pair = None;
    'outer: for i in 0..m {
        for j in (i + 1)..m {
            if (rank(order1, i) < rank(order1, j)) != (rank(order2, i) < rank(order2, j)) {
                pair = Some((i, j));
                break 'outer;
            }
        }
    }
    let (i, j) = pair.ok_or(Error::SameCausalOrder)?;

    let name_i = parties[i + 1].name().to_string();
    let name_j = parties[j + 1].name().to_string();
    let keep = [name_i.as_str(), name_j.as_str()];
    let r1 = reduce_with_identity(w1, &keep)?;
    let r2 = reduce_with_identity(w2, &keep)?;

    // The kept parties stay in list order inside the reduced chains.
    let forward1 = rank(order1, i) < rank(order1, j);
    let red_order = |forward: bool| {
        if forward {
            CausalOrder::sequential(2)
        } else {
            CausalOrder::reversed(2)
        }
    };
    let gates1 = markovian_factors(&r1, &red_order(forward1), FACTOR_TOL)?;
    let gates2 = markovian_factors(&r2, &red_order(!forward1), FACTOR_TOL)?;

    // The context runs its first chain through `A` before `B`, so `A` is
    // whichever kept party `w1` visits first.
    let (party_a, party_b) =
        if forward1 { (name_i, name_j) } else { (name_j, name_i) };

    let ctx = NoGoContext::new(&gates1, &gates2, alpha, beta)?;
    let reduced = find_violation(&ctx)?;

    // Lift: the same preparation and channels, with identity channels at
    // the contracted parties.
    let source = &parties[0];
    let sink = parties.last().expect("nonempty");
    let psi = LabeledVector::ket(
        source.output_label()?,
        reduced.psi.vector().iter().copied().collect(),
    )?;
    let xi = ChoiOperator::new(reduced.xi.clone())?;
    let eta = ChoiOperator::new(reduced.eta.clone())?;
    let mut builder = LocalOperationTuple::builder(parties)
        .prepare(source.name(), &psi)?
        .with_choi(&party_a, &xi)?
        .with_choi(&party_b, &eta)?
        .discard(sink.name())?;
    for p in &parties[1..parties.len() - 1] {
        if p.name() != party_a && p.name() != party_b {
            builder = builder.neutral(p.name())?;
        }
    }
    let tuple = builder.build()?;

    let expectation = probability_on_vector(&superpose(alpha, w1, beta, w2)?, &tuple)?;
    if (expectation - reduced.expectation).abs()
        > CROSS_CHECK_TOL * reduced.expectation.abs().max(1.0)
    {
        return Err(Error::NumericalInconsistency(format!(
            "full-chain probability {expectation:.12} disagrees with the reduced value {:.12}",
            reduced.expectation
        )));
    }
    let deviation = (expectation - 1.0).abs();

    Ok(ChainViolation { party_a, party_b, expectation, deviation, reduced, tuple })
}

/// One randomized pair of oppositely usable chains inside a batch run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ChainTrialRecord {
    pub trial: usize,
    pub seed: u64,
    pub order1: CausalOrder,
    pub order2: CausalOrder,
    #[serde(with = "complex_pair")]
    pub alpha: C64,
    #[serde(with = "complex_pair")]
    pub beta: C64,
    pub violation: ChainViolation,
}

/// Outcome of [`batch_chain_witnesses`]; statistics as in [`BatchReport`].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ChainBatchReport {
    pub middles: usize,
    pub dim: usize,
    pub trials: usize,
    pub seed: u64,
    pub threshold: f64,
    pub failures: usize,
    pub min_deviation: f64,
    pub median_deviation: f64,
    pub max_deviation: f64,
    pub mean_deviation: f64,
    pub all_violate: bool,
    pub records: Vec<ChainTrialRecord>,
}

/// Runs [`find_chain_violation`] on `trials` random pairs of Markovian
/// unitary chains over `middles` intermediate parties of wire dimension
/// `dim`. Each trial draws two distinct uniformly random causal orders, one
/// Haar chain per order, and random amplitudes; seeding and failure
/// accounting follow [`batch_witnesses`].
pub fn batch_chain_witnesses(
    middles: usize,
    dim: usize,
    trials: usize,
    seed: u64,
) -> Result<ChainBatchReport> {
    if middles < 2 {
        return Err(Error::InvalidArgument(
            "opposite orders need at least two intermediate parties".into(),
        ));
    }
    let parties = default_chain_parties(middles, dim)?;
    let mut master = ChaCha12Rng::seed_from_u64(seed);
    let sub_seeds: Vec<u64> = (0..trials).map(|_| master.gen()).collect();
    let mut records = Vec::with_capacity(trials);
    let mut failures = 0;
    for (trial, &trial_seed) in sub_seeds.iter().enumerate() {
        let mut rng = ChaCha12Rng::seed_from_u64(trial_seed);
        let order1 = random_order(middles, &mut rng);
        let mut order2 = random_order(middles, &mut rng);
        while order2 == order1 {
            order2 = random_order(middles, &mut rng);
        }
        let g1: Vec<LabeledOperator> =
            (0..=middles).map(|_| random_unitary(dim, &mut rng)).collect();
        let g2: Vec<LabeledOperator> =
            (0..=middles).map(|_| random_unitary(dim, &mut rng)).collect();
        let alpha = random_amplitude(&mut rng);
        let beta = random_amplitude(&mut rng);
        let w1 = markovian_unitary_process(&parties, &order1, &g1)?;
        let w2 = markovian_unitary_process(&parties, &order2, &g2)?;
        match find_chain_violation(&w1, &order1, &w2, &order2, alpha, beta) {
            Ok(violation) => records.push(ChainTrialRecord {
                trial,
                seed: trial_seed,
                order1,
                order2,
                alpha,
                beta,
                violation,
            }),
            Err(_) => failures += 1,
        }
    }
    let deviations: Vec<f64> = records.iter().map(|r| r.violation.deviation).collect();
    let (min_dev, median_dev, max_dev, mean_dev) = deviation_stats(deviations);
    let all_violate =
        failures == 0 && records.iter().all(|r| r.violation.deviation > DEVIATION_THRESHOLD);
    Ok(ChainBatchReport {
        middles,
        dim,
        trials,
        seed,
        threshold: DEVIATION_THRESHOLD,
        failures,
        min_deviation: min_dev,
        median_deviation: median_dev,
        max_deviation: max_dev,
        mean_deviation: mean_dev,
        all_violate,
        records,
    })
}

fn random_order(n: usize, rng: &mut impl Rng) -> CausalOrder {
    let mut slots: Vec<usize> = (0..n).collect();
    slots.shuffle(rng);
    CausalOrder::new(slots).expect("shuffled range is a permutation")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{max_norm, unitarity_residual};
    use crate::process::{expectation_on_vector, switch4};

    fn identity_context(alpha: C64, beta: C64) -> NoGoContext {
        let id = pauli::id();
        let chain = vec![id.clone(), id.clone(), id];
        NoGoContext::new(&chain, &chain, alpha, beta).unwrap()
    }

    fn random_context(dim: usize, seed: u64) -> NoGoContext {
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        let u: Vec<LabeledOperator> = (0..3).map(|_| random_unitary(dim, &mut rng)).collect();
        let v: Vec<LabeledOperator> = (0..3).map(|_| random_unitary(dim, &mut rng)).collect();
        NoGoContext::new(&u, &v, C64::new(0.6, 0.15), C64::new(-0.3, 0.45)).unwrap()
    }

    #[test]
    fn identity_chains_at_equal_half_weights_reach_probability_two() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let report =
            find_violation(&identity_context(C64::new(s, 0.0), C64::new(s, 0.0))).unwrap();
        assert_eq!(report.branch, ViolationBranch::Commuting);
        assert!((report.expectation - 2.0).abs() < 1e-12, "got {}", report.expectation);
        assert!((report.deviation - 1.0).abs() < 1e-12);
    }

    #[test]
    fn identity_chains_at_unit_weights_reach_probability_four() {
        let report =
            find_violation(&identity_context(C64::new(1.0, 0.0), C64::new(1.0, 0.0))).unwrap();
        assert!((report.expectation - 4.0).abs() < 1e-12, "got {}", report.expectation);
    }

    #[test]
    fn gadget_commutators_are_exact() {
        for axis in [CommutatorAxis::X, CommutatorAxis::Y, CommutatorAxis::Z] {
            for sign in [CommutatorSign::Plus, CommutatorSign::Minus] {
                let (r, s, t) = commutator_gadget(axis, sign);
                assert!(unitarity_residual(&r) < 1e-15);
                assert!(unitarity_residual(&s) < 1e-15);
                let got = r.adjoint() * s.adjoint() * &r * &s;
                assert!(max_norm(&(got - &t)) < 1e-15);
            }
        }
    }

    #[test]
    fn cross_term_matches_the_tensor_route() {
        for dim in [2usize, 3] {
            for seed in 0..4u64 {
                let ctx = random_context(dim, 100 + seed);
                let mut rng = ChaCha12Rng::seed_from_u64(900 + seed);
                let r = random_unitary(dim, &mut rng);
                let s = random_unitary(dim, &mut rng);
                let psi = random_pure_state(dim, &mut rng);

                let parties = ctx.parties().unwrap();
                let tuple = LocalOperationTuple::builder(&parties)
                    .prepare("P", &psi)
                    .unwrap()
                    .with_unitary("A", &r)
                    .unwrap()
                    .with_unitary("B", &s)
                    .unwrap()
                    .discard("F")
                    .unwrap()
                    .build()
                    .unwrap();
                let w1 = ctx.first_chain().unwrap();
                let w2 = ctx.second_chain().unwrap();
                let one = C64::new(1.0, 0.0);
                let p_plus = expectation_on_vector(
                    &superpose(one, &w1, one, &w2).unwrap(),
                    &tuple,
                )
                .unwrap();
                let p_imag = expectation_on_vector(
                    &superpose(one, &w1, C64::new(0.0, 1.0), &w2).unwrap(),
                    &tuple,
                )
                .unwrap();
                // Polarization: both diagonal terms are exactly one.
                let x_tensor =
                    C64::new((p_plus.re - 2.0) / 2.0, (2.0 - p_imag.re) / 2.0);
                let x_direct = ctx
                    .cross_term(r.matrix(), s.matrix(), psi.vector())
                    .unwrap();
                assert!(
                    (x_tensor - x_direct).norm() < 1e-12,
                    "dim {dim} seed {seed}: {x_tensor} vs {x_direct}"
                );
            }
        }
    }

    #[test]
    fn substitution_collapses_the_cross_term_to_commutator_form() {
        for dim in [2usize, 3] {
            for seed in 0..4u64 {
                let ctx = random_context(dim, 200 + seed);
                let mut rng = ChaCha12Rng::seed_from_u64(700 + seed);
                let r = random_unitary(dim, &mut rng).into_matrix();
                let s = random_unitary(dim, &mut rng).into_matrix();
                let psi = random_pure_state(dim, &mut rng).vector().clone();

                let (r_sub, s_sub) = ctx.substituted_pair(&r, &s).unwrap();
                let lhs = ctx.cross_term(&r_sub, &s_sub, &psi).unwrap()
                    * C64::from_polar(1.0, ctx.phase());
                let t = r.adjoint() * s.adjoint() * &r * &s;
                let rhs = (psi.adjoint() * ctx.effective_unitary() * t * &psi)[(0, 0)];
                assert!(
                    (lhs - rhs).norm() < 1e-12,
                    "dim {dim} seed {seed}: {lhs} vs {rhs}"
                );
            }
        }
    }

    #[test]
    fn effective_unitary_is_unitary() {
        for dim in [2usize, 3] {
            let ctx = random_context(dim, 31);
            assert!(unitarity_residual(&ctx.effective_unitary()) < 1e-12);
        }
    }

    #[test]
    fn random_contexts_yield_verified_violations_deterministically() {
        let batch = batch_witnesses(2, 8, 11).unwrap();
        assert_eq!(batch.records.len(), 8);
        assert_eq!(batch.failures, 0);
        assert!(batch.all_violate);
        assert!(batch.min_deviation > DEVIATION_THRESHOLD);
        assert!(batch.min_deviation <= batch.median_deviation);
        assert!(batch.median_deviation <= batch.max_deviation);
        let again = batch_witnesses(2, 8, 11).unwrap();
        assert_eq!(batch.min_deviation.to_bits(), again.min_deviation.to_bits());
        assert_eq!(batch.max_deviation.to_bits(), again.max_deviation.to_bits());
    }

    #[test]
    fn chain_batches_flag_every_random_pair() {
        let batch = batch_chain_witnesses(3, 2, 4, 17).unwrap();
        assert_eq!(batch.records.len(), 4);
        assert_eq!(batch.failures, 0);
        assert!(batch.all_violate);
        for r in &batch.records {
            assert_ne!(r.order1, r.order2);
            assert!(r.violation.deviation > DEVIATION_THRESHOLD);
        }
    }

    #[test]
    fn empty_batches_summarize_to_zero() {
        let batch = batch_witnesses(2, 0, 9).unwrap();
        assert_eq!(batch.records.len(), 0);
        assert_eq!(batch.failures, 0);
        assert!(batch.all_violate);
        assert_eq!(batch.min_deviation, 0.0);
        assert_eq!(batch.median_deviation, 0.0);
        assert_eq!(batch.mean_deviation, 0.0);
    }

    #[test]
    fn flipping_the_sign_of_beta_shifts_the_phase_by_pi() {
        let mut rng = ChaCha12Rng::seed_from_u64(513);
        let u: Vec<LabeledOperator> = (0..3).map(|_| random_unitary(2, &mut rng)).collect();
        let v: Vec<LabeledOperator> = (0..3).map(|_| random_unitary(2, &mut rng)).collect();
        let alpha = C64::new(0.55, 0.1);
        let beta = C64::new(-0.3, 0.45);
        let plus = NoGoContext::new(&u, &v, alpha, beta).unwrap();
        let minus = NoGoContext::new(&u, &v, alpha, -beta).unwrap();
        assert!((plus.target() - minus.target()).abs() < 1e-15);
        let shift = (minus.phase() - plus.phase()).rem_euclid(std::f64::consts::TAU);
        assert!((shift - std::f64::consts::PI).abs() < 1e-12, "shift {shift}");
        let a = find_violation(&plus).unwrap();
        let b = find_violation(&minus).unwrap();
        assert!(a.deviation > DEVIATION_THRESHOLD);
        assert!(b.deviation > DEVIATION_THRESHOLD);
    }

    #[test]
    fn two_intermediate_chain_search_matches_the_raw_context() {
        let parties = default_chain_parties(2, 2).unwrap();
        let mut rng = ChaCha12Rng::seed_from_u64(29);
        let us: Vec<LabeledOperator> = (0..3).map(|_| random_unitary(2, &mut rng)).collect();
        let vs: Vec<LabeledOperator> = (0..3).map(|_| random_unitary(2, &mut rng)).collect();
        let o1 = CausalOrder::sequential(2);
        let o2 = CausalOrder::reversed(2);
        let w1 = markovian_unitary_process(&parties, &o1, &us).unwrap();
        let w2 = markovian_unitary_process(&parties, &o2, &vs).unwrap();
        let alpha = C64::new(0.6, -0.1);
        let beta = C64::new(0.2, 0.5);
        let chain = find_chain_violation(&w1, &o1, &w2, &o2, alpha, beta).unwrap();
        let raw = find_violation(&NoGoContext::new(&us, &vs, alpha, beta).unwrap()).unwrap();
        // With no party contracted, both searches scan the same candidates.
        assert_eq!(chain.reduced.branch, raw.branch);
        assert!((chain.expectation - raw.expectation).abs() < 1e-8);
    }

    #[test]
    fn witness_channels_give_probability_one_on_the_controlled_switch() {
        let report = find_violation(&random_context(2, 5)).unwrap();
        let w = switch4();
        let half = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        let zero = C64::new(0.0, 0.0);
        let entangled = LabeledVector::ket("P", vec![half, zero, zero, half]).unwrap();
        let tuple = LocalOperationTuple::builder(w.parties())
            .prepare("P", &entangled)
            .unwrap()
            .with_choi("A", &ChoiOperator::new(report.xi.clone()).unwrap())
            .unwrap()
            .with_choi("B", &ChoiOperator::new(report.eta.clone()).unwrap())
            .unwrap()
            .discard("F")
            .unwrap()
            .build()
            .unwrap();
        // A valid process returns every deterministic tuple to certainty,
        // so the witness channels cannot fire once the control is present.
        let p = probability_on_vector(&w, &tuple).unwrap();
        assert!((p - 1.0).abs() < 1e-10, "probability {p}");
    }

    #[test]
    fn zero_amplitudes_are_rejected() {
        let id = pauli::id();
        let chain = vec![id.clone(), id.clone(), id];
        let err = NoGoContext::new(&chain, &chain, C64::new(0.0, 0.0), C64::new(1.0, 0.0));
        assert!(matches!(err, Err(Error::ZeroAmplitude)));
    }

    #[test]
    fn witness_report_survives_json() {
        let report =
            find_violation(&random_context(2, 5)).unwrap();
        let text = serde_json::to_string(&report).unwrap();
        let back: WitnessReport = serde_json::from_str(&text).unwrap();
        assert_eq!(report.expectation.to_bits(), back.expectation.to_bits());
        assert_eq!(report.branch, back.branch);
        assert_eq!(report.xi.matrix(), back.xi.matrix());
    }

    #[test]
    fn chain_violation_on_three_intermediates() {
        let parties = default_chain_parties(3, 2).unwrap();
        let mut rng = ChaCha12Rng::seed_from_u64(77);
        let us: Vec<LabeledOperator> = (0..4).map(|_| random_unitary(2, &mut rng)).collect();
        let vs: Vec<LabeledOperator> = (0..4).map(|_| random_unitary(2, &mut rng)).collect();
        let o1 = CausalOrder::sequential(3);
        let o2 = CausalOrder::reversed(3);
        let w1 = markovian_unitary_process(&parties, &o1, &us).unwrap();
        let w2 = markovian_unitary_process(&parties, &o2, &vs).unwrap();
        let violation = find_chain_violation(
            &w1,
            &o1,
            &w2,
            &o2,
            C64::new(0.5, 0.2),
            C64::new(0.4, -0.3),
        )
        .unwrap();
        assert_eq!(violation.party_a, "A");
        assert_eq!(violation.party_b, "B");
        assert!(violation.deviation > DEVIATION_THRESHOLD);
        assert!((violation.expectation - violation.reduced.expectation).abs() < 1e-9);
        // The bypassed party C holds the identity channel.
        let at_c = violation.tuple.op_for("C").unwrap();
        let id_choi = ChoiOperator::identity_channel(2);
        assert!(max_norm(&(at_c.matrix() - id_choi.op().matrix())) < 1e-15);
    }

    #[test]
    fn identical_orders_are_rejected() {
        let parties = default_chain_parties(2, 2).unwrap();
        let mut rng = ChaCha12Rng::seed_from_u64(3);
        let us: Vec<LabeledOperator> = (0..3).map(|_| random_unitary(2, &mut rng)).collect();
        let o = CausalOrder::sequential(2);
        let w = markovian_unitary_process(&parties, &o, &us).unwrap();
        let err = find_chain_violation(&w, &o, &w, &o, C64::new(1.0, 0.0), C64::new(1.0, 0.0));
        assert!(matches!(err, Err(Error::SameCausalOrder)));
    }
}
