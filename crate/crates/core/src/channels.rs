//! Quantum channels in the Choi representation: CPTP verification, Haar
//! sampling, an affine spanning family of channels, and unitarity scans of
//! two-operator linear combinations.

use num_complex::Complex64 as C64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix, CVector};
use crate::tensor::{choi_of_kraus, LabeledOperator, LabeledVector, MatrixJson, SpaceLayout};

/// Choi matrix of a completely positive map, over `(in, out)` labels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChoiOperator {
    op: LabeledOperator,
    in_dim: usize,
    out_dim: usize,
}

impl ChoiOperator {
    /// Wraps a square operator over exactly two subsystems, the first read as
    /// the channel input, the second as the output.
    pub fn new(op: LabeledOperator) -> Result<Self> {
        let subs = op.row_layout().subsystems();
        if subs.len() != 2 || op.row_layout() != op.col_layout() {
            return Err(Error::LayoutMismatch(
                "a Choi operator lives on (in, out) with equal row/column layouts".into(),
            ));
        }
        let (in_dim, out_dim) = (subs[0].dim, subs[1].dim);
        Ok(Self { op, in_dim, out_dim })
    }

    pub fn from_kraus(kraus: &[LabeledOperator]) -> Result<Self> {
        Self::new(choi_of_kraus(kraus, "in", "out")?)
    }

    pub fn of_unitary(u: &LabeledOperator) -> Result<Self> {
        Self::from_kraus(std::slice::from_ref(u))
    }

    pub fn identity_channel(d: usize) -> Self {
        let gate = LabeledOperator::gate(CMatrix::identity(d, d)).expect("square");
        Self::of_unitary(&gate).expect("identity channel")
    }

    pub fn op(&self) -> &LabeledOperator {
        &self.op
    }

    pub fn in_dim(&self) -> usize {
        self.in_dim
    }

    pub fn out_dim(&self) -> usize {
        self.out_dim
    }

    pub fn in_label(&self) -> &str {
        &self.op.row_layout().subsystems()[0].label
    }

    pub fn out_label(&self) -> &str {
        &self.op.row_layout().subsystems()[1].label
    }

    /// Complete positivity and trace preservation diagnostics.
    ///
    /// CP holds when the smallest eigenvalue is at least `-tol`; TP when the
    /// partial trace over the output differs from the input identity by at
    /// most `tol` in max-norm.
    pub fn is_cptp(&self, tol: f64) -> CptpCheck {
        let min_eigenvalue = self.op.min_eigenvalue().expect("choi is square");
        let reduced = self.op.partial_trace(&[self.out_label()]).expect("out label exists");
        let identity = LabeledOperator::identity(reduced.row_layout().clone());
        let tp_residual = reduced.sub(&identity).expect("same layout").max_norm();
        CptpCheck {
            cp: min_eigenvalue >= -tol,
            tp: tp_residual <= tol,
            min_eigenvalue,
            tp_residual,
            tol,
        }
    }

    pub fn linear_combination(&self, other: &Self, a: C64, b: C64) -> Result<Self> {
        Self::new(self.op.scale(a).add(&other.op.scale(b))?)
    }
}

/// Outcome of a CPTP check.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct CptpCheck {
    pub cp: bool,
    pub tp: bool,
    pub min_eigenvalue: f64,
    pub tp_residual: f64,
    pub tol: f64,
}

impl CptpCheck {
    pub fn pass(&self) -> bool {
        self.cp && self.tp
    }
}

/// A finite list of completely positive outcome branches summing to a
/// trace-preserving map.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Instrument {
    pub outcomes: Vec<ChoiOperator>,
}

impl Instrument {
    pub fn validate(&self, tol: f64) -> Result<()> {
        let (first, rest) = self.outcomes.split_first().ok_or_else(|| {
            Error::InvalidArgument("an instrument needs at least one outcome".into())
        })?;
        let mut total = first.op().clone();
        for outcome in rest {
            total = total.add(outcome.op())?;
        }
        for outcome in &self.outcomes {
            let min = outcome.op().min_eigenvalue()?;
            if min < -tol {
                return Err(Error::NumericalInconsistency(format!(
                    "instrument outcome not completely positive (min eigenvalue {min:.3e})"
                )));
            }
        }
        let check = ChoiOperator::new(total)?.is_cptp(tol);
        if !check.pass() {
            return Err(Error::NumericalInconsistency(format!(
                "instrument outcomes do not sum to a CPTP map (tp residual {:.3e})",
                check.tp_residual
            )));
        }
        Ok(())
    }
}

fn standard_complex(rng: &mut impl Rng) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(re, im)
}

/// Haar-distributed `d x d` unitary: QR of a complex Ginibre matrix with the
/// R diagonal phases folded back in.
pub fn random_unitary(d: usize, rng: &mut impl Rng) -> LabeledOperator {
    assert!(d >= 1, "dimension must be positive");
    let g = CMatrix::from_fn(d, d, |_, _| standard_complex(rng));
    let qr = g.qr();
    let r = qr.r();
    let mut q = qr.q();
    for i in 0..d {
        let rii = r[(i, i)];
        let phase = if rii.norm() > 0.0 { rii / rii.norm() } else { C64::new(1.0, 0.0) };
        for k in 0..d {
            q[(k, i)] *= phase;
        }
    }
    LabeledOperator::gate(q).expect("square")
}

/// Haar-random pure state on a single subsystem labeled `q`.
pub fn random_pure_state(d: usize, rng: &mut impl Rng) -> LabeledVector {
    let mut v = CVector::from_fn(d, |_, _| standard_complex(rng));
    v /= C64::new(v.norm(), 0.0);
    LabeledVector::new(SpaceLayout::single("q", d).unwrap(), v).expect("length matches")
}

/// Kraus operators of a random channel: a Haar isometry from the input into
/// output (x) environment with environment dimension `d_in * d_out`, sliced
/// along the environment index.
pub fn random_kraus_set(d_in: usize, d_out: usize, rng: &mut impl Rng) -> Vec<LabeledOperator> {
    let d_env = d_in * d_out;
    let big = random_unitary(d_out * d_env, rng);
    let big = big.matrix();
    let mut kraus = Vec::with_capacity(d_env);
    for e in 0..d_env {
        let mut k = CMatrix::zeros(d_out, d_in);
        for o in 0..d_out {
            for i in 0..d_in {
                k[(o, i)] = big[(o * d_env + e, i)];
            }
        }
        kraus.push(
            LabeledOperator::new(
                SpaceLayout::single("out", d_out).unwrap(),
                SpaceLayout::single("in", d_in).unwrap(),
                k,
            )
            .expect("dims match"),
        );
    }
    kraus
}

/// Random CPTP map in the Choi representation (full-rank Stinespring model).
pub fn random_cptp(d_in: usize, d_out: usize, rng: &mut impl Rng) -> ChoiOperator {
    ChoiOperator::from_kraus(&random_kraus_set(d_in, d_out, rng)).expect("kraus nonempty")
}

/// Random density matrix on a single subsystem labeled `q` (induced measure,
/// environment of equal dimension).
pub fn random_density(d: usize, rng: &mut impl Rng) -> LabeledOperator {
    let choi = random_cptp(1, d, rng);
    let layout = SpaceLayout::single("q", d).unwrap();
    choi.op().reshaped(layout.clone(), layout).expect("total dims equal")
}

/// Random instrument: the Kraus set of a random channel dealt round-robin
/// into `outcomes` completely positive branches.
pub fn random_instrument(
    d_in: usize,
    d_out: usize,
    outcomes: usize,
    rng: &mut impl Rng,
) -> Result<Instrument> {
    if outcomes == 0 {
        return Err(Error::InvalidArgument("instrument needs at least one outcome".into()));
    }
    let kraus = random_kraus_set(d_in, d_out, rng);
    if outcomes > kraus.len() {
        return Err(Error::InvalidArgument(format!(
            "cannot split {} Kraus operators into {} outcomes",
            kraus.len(),
            outcomes
        )));
    }
    let mut groups: Vec<Vec<LabeledOperator>> = vec![Vec::new(); outcomes];
    for (i, k) in kraus.into_iter().enumerate() {
        groups[i % outcomes].push(k);
    }
    let branches = groups
        .into_iter()
        .map(|g| ChoiOperator::from_kraus(&g))
        .collect::<Result<Vec<_>>>()?;
    Ok(Instrument { outcomes: branches })
}

/// Hermitian operator basis of `d x d` matrices: the identity first, then
/// traceless elements with operator norm 1 (off-diagonal symmetric and
/// antisymmetric pairs, then diagonal ladder elements).
pub fn hermitian_basis(d: usize) -> Vec<CMatrix> {
    let mut basis = vec![CMatrix::identity(d, d)];
    for j in 0..d {
        for k in (j + 1)..d {
            let mut x = CMatrix::zeros(d, d);
            x[(j, k)] = C64::new(1.0, 0.0);
            x[(k, j)] = C64::new(1.0, 0.0);
            basis.push(x);
            let mut y = CMatrix::zeros(d, d);
            y[(j, k)] = C64::new(0.0, -1.0);
            y[(k, j)] = C64::new(0.0, 1.0);
            basis.push(y);
        }
    }
    for l in 1..d {
        let mut m = CMatrix::zeros(d, d);
        for j in 0..l {
            m[(j, j)] = C64::new(1.0 / l as f64, 0.0);
        }
        m[(l, l)] = C64::new(-1.0, 0.0);
        basis.push(m);
    }
    basis
}

/// A finite family of CPTP Choi operators whose affine hull is the whole
/// affine space of Hermitian operators with identity partial trace over the
/// output. Its size is `d_in^2 * d_out^2 - d_in^2 + 1` (13 for qubit-to-qubit
/// channels), one more than the affine dimension.
///
/// Every element is a measure-and-prepare channel mixed 1/2 with the
/// completely depolarizing channel, so all elements are strictly positive
/// Choi matrices of valid channels.
pub fn cptp_affine_spanning_set(d_in: usize, d_out: usize) -> Vec<ChoiOperator> {
    let g = hermitian_basis(d_in);
    let f = hermitian_basis(d_out);
    let one_in = CMatrix::identity(d_in, d_in);
    let one_out = CMatrix::identity(d_out, d_out);
    let layout = SpaceLayout::new(vec![("in", d_in), ("out", d_out)]).unwrap();
    let dof = d_out as f64;

    // Depolarizing Choi: 1_in (x) 1_out / d_out.
    let m0 = one_in.kronecker(&one_out.scale(1.0 / dof));

    let mut set = Vec::with_capacity(d_in * d_in * (d_out * d_out - 1) + 1);
    let wrap = |m: CMatrix| {
        ChoiOperator::new(LabeledOperator::square(layout.clone(), m).expect("dims"))
            .expect("two factors")
    };
    set.push(wrap(m0.clone()));

    // Prepare-state channels rho -> Tr(rho) s_q, mixed with depolarizing:
    // Choi = 1_in (x) (s_q^T / 2 + 1 / (2 d_out)).
    for fq in f.iter().skip(1) {
        let sq_t = (&one_out + fq).scale(1.0 / dof).transpose();
        let out_part = sq_t.scale(0.5) + one_out.scale(0.5 / dof);
        set.push(wrap(one_in.kronecker(&out_part)));
    }

    // Measure the effect (1 + G_p)/2, prepare s_q on success and the
    // maximally mixed state otherwise, then mix 1/2 with depolarizing:
    // Choi = M0 + (1 + G_p) (x) F_q^T / (4 d_out).
    for gp in g.iter().skip(1) {
        for fq in f.iter().skip(1) {
            let effect = &one_in + gp;
            let bump = effect.kronecker(&fq.transpose().scale(1.0 / (4.0 * dof)));
            set.push(wrap(&m0 + bump));
        }
    }
    set
}

/// Grid of complex amplitude pairs scanned by
/// [`linear_combination_unitarity`].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AmplitudeGrid {
    pub alphas: Vec<(f64, f64)>,
    pub betas: Vec<(f64, f64)>,
}

impl AmplitudeGrid {
    pub fn new(alphas: Vec<C64>, betas: Vec<C64>) -> Result<Self> {
        if alphas.is_empty() || betas.is_empty() {
            return Err(Error::InvalidArgument("amplitude grid must be nonempty".into()));
        }
        Ok(Self {
            alphas: alphas.iter().map(|z| (z.re, z.im)).collect(),
            betas: betas.iter().map(|z| (z.re, z.im)).collect(),
        })
    }

    /// Default 41-value axis: zero plus both signs of 20 moduli equally
    /// spaced in `[0.2, 1.0]`. Small nonzero moduli are deliberately absent;
    /// close to an axis every combination degenerates toward a multiple of a
    /// single input and residuals stop being informative.
    pub fn default_real() -> Self {
        let mut axis = Vec::with_capacity(41);
        for k in (0..20).rev() {
            axis.push((-(0.2 + 0.04 * k as f64), 0.0));
        }
        axis.push((0.0, 0.0));
        for k in 0..20 {
            axis.push((0.2 + 0.04 * k as f64, 0.0));
        }
        Self { alphas: axis.clone(), betas: axis }
    }

    pub fn singleton(alpha: C64, beta: C64) -> Self {
        Self { alphas: vec![(alpha.re, alpha.im)], betas: vec![(beta.re, beta.im)] }
    }
}

/// One scanned amplitude pair.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScanPoint {
    #[serde(with = "crate::tensor::complex_pair")]
    pub alpha: C64,
    #[serde(with = "crate::tensor::complex_pair")]
    pub beta: C64,
    /// Max-norm of `(a u1 + b u2)† (a u1 + b u2) - 1`.
    pub residual: f64,
    pub unitary: bool,
}

/// Result of scanning `a u1 + b u2` over an amplitude grid.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SuperpositionScan {
    pub tol: f64,
    pub points: Vec<ScanPoint>,
    /// Number of grid points flagged unitary within `tol`.
    pub unitary_count: usize,
    /// Smallest residual among points with both amplitudes nonzero.
    pub min_residual_nonzero: Option<f64>,
}

/// Scans the amplitude grid and reports, per point, how far `a u1 + b u2` is
/// from being unitary. The inputs only need to be square and of equal size;
/// they are not themselves required to be unitary.
pub fn linear_combination_unitarity(
    u1: &LabeledOperator,
    u2: &LabeledOperator,
    grid: &AmplitudeGrid,
    tol: f64,
) -> Result<SuperpositionScan> {
    let (m1, m2) = (u1.matrix(), u2.matrix());
    if m1.nrows() != m1.ncols() || m2.nrows() != m2.ncols() {
        return Err(Error::NotSquare);
    }
    if m1.nrows() != m2.nrows() {
        return Err(Error::DimMismatch {
            context: "superposed operators must act on one space",
            expected: m1.nrows(),
            got: m2.nrows(),
        });
    }
    let mut points = Vec::with_capacity(grid.alphas.len() * grid.betas.len());
    let mut unitary_count = 0usize;
    let mut min_nonzero: Option<f64> = None;
    for &(are, aim) in &grid.alphas {
        let alpha = C64::new(are, aim);
        for &(bre, bim) in &grid.betas {
            let beta = C64::new(bre, bim);
            let combo = m1 * alpha + m2 * beta;
            let residual = linalg::max_norm_from_identity(&(combo.adjoint() * &combo));
            let unitary = residual <= tol;
            if unitary {
                unitary_count += 1;
            }
            if alpha.norm() > 0.0 && beta.norm() > 0.0 {
                min_nonzero = Some(min_nonzero.map_or(residual, |m: f64| m.min(residual)));
            }
            points.push(ScanPoint { alpha, beta, residual, unitary });
        }
    }
    Ok(SuperpositionScan { tol, points, unitary_count, min_residual_nonzero: min_nonzero })
}

impl From<&ChoiOperator> for MatrixJson {
    fn from(choi: &ChoiOperator) -> Self {
        MatrixJson::from(choi.op())
    }
}
