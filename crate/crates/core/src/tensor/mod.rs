//! Labeled dense complex tensor algebra.
//!
//! Operators and kets carry explicit subsystem labels so that party wirings
//! (partial traces, permutations, double-ket contractions) are checked at run
//! time instead of by positional convention. The leftmost label is always the
//! slowest-varying index.

mod jsonfmt;
mod layout;
mod operator;
pub mod pauli;
mod vector;

pub use jsonfmt::{complex_pair, MatrixJson};
pub use layout::{SpaceLayout, Subsystem};
pub use operator::LabeledOperator;
pub use vector::LabeledVector;


use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::linalg::CMatrix;

/// Kronecker product of a slice of operators, left to right.
pub fn tensor_all(ops: &[&LabeledOperator]) -> Result<LabeledOperator> {
    let (first, rest) = ops.split_first().ok_or_else(|| {
        Error::InvalidArgument("tensor_all needs at least one operator".into())
    })?;
    let mut acc = (*first).clone();
    for op in rest {
        acc = acc.tensor(op)?;
    }
    Ok(acc)
}

/// Double-ket of a square matrix: `sum_j |j>^{from} (u|j>)^{to}`.
///
/// For unitary `u` the squared norm is the dimension of `u`. The labels of
/// `u` itself are ignored; only its entries matter.
pub fn double_ket(u: &LabeledOperator, from_label: &str, to_label: &str) -> Result<LabeledVector> {
    let m = u.matrix();
    if m.nrows() != m.ncols() {
        return Err(Error::NotSquare);
    }
    let d = m.nrows();
    let layout = SpaceLayout::new(vec![(from_label, d), (to_label, d)])?;
    let mut entries = Vec::with_capacity(d * d);
    for j in 0..d {
        for k in 0..d {
            entries.push(m[(k, j)]);
        }
    }
    LabeledVector::from_entries(layout, entries)
}

/// Inverse of [`double_ket`]: recovers the matrix from a vector over exactly
/// two equal-dimension subsystems.
pub fn double_ket_to_matrix(v: &LabeledVector) -> Result<LabeledOperator> {
    let subs = v.layout().subsystems();
    if subs.len() != 2 || subs[0].dim != subs[1].dim {
        return Err(Error::LayoutMismatch(
            "double-ket inversion needs two equal-dimension subsystems".into(),
        ));
    }
    let d = subs[0].dim;
    let mut m = CMatrix::zeros(d, d);
    for j in 0..d {
        for k in 0..d {
            m[(k, j)] = v.vector()[j * d + k];
        }
    }
    LabeledOperator::gate(m)
}

/// Choi matrix of the completely positive map with the given Kraus operators,
/// in the transposed convention: `M = [sum_{jk} |j><k| (x) K(|j><k|)]^T` over
/// `(in_label, out_label)`. Written out, `M[(a,b),(c,d)] = sum_i K_i[d,c] *
/// conj(K_i[b,a])`.
///
/// For a single unitary Kraus operator `U` this equals the double-ket
/// projector of the conjugated matrix, `|U*>><<U*|`, and the map is
/// trace-preserving iff `sum_i K_i† K_i = 1`, in which case the partial trace
/// of `M` over `out_label` is the identity on `in_label`.
pub fn choi_of_kraus(
    kraus: &[LabeledOperator],
    in_label: &str,
    out_label: &str,
) -> Result<LabeledOperator> {
    let (first, _) = kraus.split_first().ok_or_else(|| {
        Error::InvalidArgument("at least one Kraus operator required".into())
    })?;
    let d_out = first.matrix().nrows();
    let d_in = first.matrix().ncols();
    for k in kraus {
        if k.matrix().nrows() != d_out || k.matrix().ncols() != d_in {
            return Err(Error::DimMismatch {
                context: "Kraus operators must share one shape",
                expected: d_out * d_in,
                got: k.matrix().nrows() * k.matrix().ncols(),
            });
        }
    }
    let layout = SpaceLayout::new(vec![(in_label, d_in), (out_label, d_out)])?;
    let total = d_in * d_out;
    let mut m = CMatrix::zeros(total, total);
    for k in kraus {
        let km = k.matrix();
        for a in 0..d_in {
            for b in 0..d_out {
                for c in 0..d_in {
                    for e in 0..d_out {
                        m[(a * d_out + b, c * d_out + e)] += km[(e, c)] * km[(b, a)].conj();
                    }
                }
            }
        }
    }
    LabeledOperator::square(layout, m)
}

/// Sesquilinear sandwich `<x| m |y>`. Layouts must match exactly.
pub fn sandwich(x: &LabeledVector, m: &LabeledOperator, y: &LabeledVector) -> Result<C64> {
    if m.row_layout() != x.layout() || m.col_layout() != y.layout() {
        return Err(Error::LayoutMismatch("sandwich requires aligned layouts".into()));
    }
    let applied = m.apply(y)?;
    x.inner(&applied)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha12Rng;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn ket0_projector(label: &str) -> LabeledOperator {
        let v = LabeledVector::basis(label, 2, 0).unwrap();
        v.outer(&v)
    }

    fn relabeled_pauli_x(label: &str) -> LabeledOperator {
        let layout = SpaceLayout::single(label, 2).unwrap();
        pauli::x().reshaped(layout.clone(), layout).unwrap()
    }

    #[test]
    fn tensor_of_projector_and_pauli_is_top_left_block() {
        let op = ket0_projector("a").tensor(&relabeled_pauli_x("b")).unwrap();
        // |0><0| (x) sigma_x embeds sigma_x in the upper-left 2x2 block.
        let expected = [
            [0.0, 1.0, 0.0, 0.0],
            [1.0, 0.0, 0.0, 0.0],
            [0.0, 0.0, 0.0, 0.0],
            [0.0, 0.0, 0.0, 0.0],
        ];
        for i in 0..4 {
            for j in 0..4 {
                assert!((op.matrix()[(i, j)] - c(expected[i][j], 0.0)).norm() < 1e-15);
            }
        }
        assert_eq!(op.row_layout().labels().collect::<Vec<_>>(), vec!["a", "b"]);
    }

    #[test]
    fn tensor_rejects_label_collision() {
        let p = ket0_projector("a");
        assert!(p.tensor(&p).is_err());
    }

    #[test]
    fn partial_trace_of_max_entangled_projector_is_identity() {
        let one = LabeledOperator::gate(CMatrix::identity(2, 2)).unwrap();
        let dk = double_ket(&one, "a", "b").unwrap();
        assert!((dk.norm().powi(2) - 2.0).abs() < 1e-12);
        let proj = dk.outer(&dk);
        let reduced = proj.partial_trace(&["a"]).unwrap();
        assert_eq!(reduced.row_layout().labels().collect::<Vec<_>>(), vec!["b"]);
        assert!(reduced
            .sub(&LabeledOperator::identity(SpaceLayout::single("b", 2).unwrap()))
            .unwrap()
            .max_norm()
            < 1e-12);
    }

    #[test]
    fn partial_trace_contracts_factors_independently() {
        // Tr_b[a (x) b] = Tr(b) * a, frozen here for one concrete pair.
        let a = relabeled_pauli_x("a");
        let layout_b = SpaceLayout::single("b", 2).unwrap();
        let b = LabeledOperator::square(
            layout_b,
            CMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(0.5, 0.25), c(0.5, -0.25), c(3.0, 0.0)]),
        )
        .unwrap();
        let traced = a.tensor(&b).unwrap().partial_trace(&["b"]).unwrap();
        assert!(traced.sub(&a.scale(c(4.0, 0.0))).unwrap().max_norm() < 1e-14);
    }

    #[test]
    fn partial_trace_requires_label_on_both_sides() {
        let v0 = LabeledVector::basis("a", 2, 0).unwrap();
        let v1 = LabeledVector::basis("b", 2, 1).unwrap();
        let rect = v0.outer(&v1);
        assert!(rect.partial_trace(&["a"]).is_err());
    }

    #[test]
    fn permute_swaps_kronecker_factors() {
        let a = ket0_projector("a");
        let b = relabeled_pauli_x("b");
        let ab = a.tensor(&b).unwrap();
        let ba = b.tensor(&a).unwrap();
        let swapped = ab.permute_subsystems(&["b", "a"]).unwrap();
        assert_eq!(swapped, ba);
    }

    #[test]
    fn permute_rejects_bad_orders() {
        let ab = ket0_projector("a").tensor(&relabeled_pauli_x("b")).unwrap();
        assert!(ab.permute_subsystems(&["a"]).is_err());
        assert!(ab.permute_subsystems(&["a", "a"]).is_err());
        assert!(ab.permute_subsystems(&["a", "z"]).is_err());
    }

    #[test]
    fn double_ket_of_identity_is_sum_of_pairs() {
        let one = LabeledOperator::gate(CMatrix::identity(3, 3)).unwrap();
        let dk = double_ket(&one, "x", "y").unwrap();
        for j in 0..3 {
            for k in 0..3 {
                let expected = if j == k { 1.0 } else { 0.0 };
                assert!((dk.vector()[j * 3 + k] - c(expected, 0.0)).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn double_ket_inverts() {
        let mut rng = ChaCha12Rng::seed_from_u64(11);
        let u = crate::channels::random_unitary(3, &mut rng);
        let dk = double_ket(&u, "x", "y").unwrap();
        assert!((dk.norm().powi(2) - 3.0).abs() < 1e-10);
        let back = double_ket_to_matrix(&dk).unwrap();
        assert!(back.sub(&u).unwrap().max_norm() < 1e-14);
    }

    #[test]
    fn choi_of_unitary_is_conjugated_double_ket_projector() {
        let mut rng = ChaCha12Rng::seed_from_u64(5);
        for d in [2usize, 3] {
            let u = crate::channels::random_unitary(d, &mut rng);
            let choi = choi_of_kraus(std::slice::from_ref(&u), "in", "out").unwrap();
            let dk = double_ket(&u.conjugate(), "in", "out").unwrap();
            let expected = dk.outer(&dk);
            assert!(choi.sub(&expected).unwrap().max_norm() < 1e-12);
        }
    }

    #[test]
    fn choi_of_depolarizing_kraus_set_is_half_identity() {
        let half = c(0.5, 0.0);
        let kraus: Vec<LabeledOperator> =
            [pauli::id(), pauli::x(), pauli::y(), pauli::z()].iter().map(|p| p.scale(half)).collect();
        let choi = choi_of_kraus(&kraus, "in", "out").unwrap();
        let expected = LabeledOperator::identity(
            SpaceLayout::new(vec![("in", 2), ("out", 2)]).unwrap(),
        )
        .scale(half);
        assert!(choi.sub(&expected).unwrap().max_norm() < 1e-15);
    }

    #[test]
    fn choi_partial_trace_detects_trace_preservation() {
        // Trace-preserving iff Tr_out M = 1_in.
        let mut rng = ChaCha12Rng::seed_from_u64(17);
        let u = crate::channels::random_unitary(2, &mut rng);
        let choi = choi_of_kraus(std::slice::from_ref(&u), "in", "out").unwrap();
        let reduced = choi.partial_trace(&["out"]).unwrap();
        let one = LabeledOperator::identity(SpaceLayout::single("in", 2).unwrap());
        assert!(reduced.sub(&one).unwrap().max_norm() < 1e-12);

        let leaky = u.scale(c(0.9, 0.0));
        let leaky_choi = choi_of_kraus(std::slice::from_ref(&leaky), "in", "out").unwrap();
        let leaky_reduced = leaky_choi.partial_trace(&["out"]).unwrap();
        assert!(leaky_reduced.sub(&one).unwrap().max_norm() > 0.1);
    }

    #[test]
    fn sandwich_matches_manual_contraction() {
        let v0 = LabeledVector::basis("a", 2, 0).unwrap();
        let v1 = LabeledVector::basis("a", 2, 1).unwrap();
        let sx = relabeled_pauli_x("a");
        let got = sandwich(&v0, &sx, &v1).unwrap();
        assert!((got - c(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn project_basis_selects_branch() {
        let v0 = LabeledVector::basis("c", 2, 0).unwrap();
        let v1 = LabeledVector::basis("c", 2, 1).unwrap();
        let t0 = LabeledVector::ket("t", vec![c(0.6, 0.0), c(0.8, 0.0)]).unwrap();
        let t1 = LabeledVector::ket("t", vec![c(0.0, 1.0), c(0.0, 0.0)]).unwrap();
        let sum = v0.tensor(&t0).unwrap().add(&v1.tensor(&t1).unwrap()).unwrap();
        let picked = sum.project_basis("c", 1).unwrap();
        assert!((picked.vector()[0] - c(0.0, 1.0)).norm() < 1e-15);
        assert!(picked.vector()[1].norm() < 1e-15);
    }

    #[test]
    fn contract_pair_merges_chained_double_kets() {
        // <<1|^{m_I m_O} |U>>^{x m_I} |V>>^{m_O y} = |VU>>^{x y}.
        let mut rng = ChaCha12Rng::seed_from_u64(23);
        let u = crate::channels::random_unitary(2, &mut rng);
        let v = crate::channels::random_unitary(2, &mut rng);
        let chain = double_ket(&u, "x", "m_i")
            .unwrap()
            .tensor(&double_ket(&v, "m_o", "y").unwrap())
            .unwrap();
        let merged = chain.contract_pair("m_i", "m_o").unwrap();
        let expected = double_ket(&v.mul(&u).unwrap(), "x", "y").unwrap();
        let diff = merged.add(&expected.scale(c(-1.0, 0.0))).unwrap();
        assert!(diff.norm() < 1e-12);
    }

    #[test]
    fn contract_bra_double_ket_peels_a_factor() {
        let mut rng = ChaCha12Rng::seed_from_u64(29);
        let u = crate::channels::random_unitary(2, &mut rng);
        let w = crate::channels::random_unitary(2, &mut rng);
        let prod = double_ket(&u, "a", "b").unwrap().tensor(&double_ket(&w, "c", "d").unwrap()).unwrap();
        // <<u| over (a, b) leaves d * |w>> behind.
        let peeled = prod.contract_bra_double_ket(&u, "a", "b").unwrap();
        let expected = double_ket(&w, "c", "d").unwrap().scale(c(2.0, 0.0));
        let diff = peeled.add(&expected.scale(c(-1.0, 0.0))).unwrap();
        assert!(diff.norm() < 1e-12);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]

        #[test]
        fn prop_partial_trace_splits_tensor_products(seed in 0u64..1_000_000) {
            let mut rng = ChaCha12Rng::seed_from_u64(seed);
            let a = crate::channels::random_unitary(2, &mut rng);
            let b = crate::channels::random_unitary(3, &mut rng);
            let la = SpaceLayout::single("a", 2).unwrap();
            let lb = SpaceLayout::single("b", 3).unwrap();
            let a = a.reshaped(la.clone(), la).unwrap();
            let b = b.reshaped(lb.clone(), lb).unwrap();
            let joint = a.tensor(&b).unwrap();
            let tb = joint.partial_trace(&["b"]).unwrap();
            let expected = a.scale(b.trace().unwrap());
            prop_assert!(tb.sub(&expected).unwrap().max_norm() < 1e-12);
            let ta = joint.partial_trace(&["a"]).unwrap();
            let expected = b.scale(a.trace().unwrap());
            prop_assert!(ta.sub(&expected).unwrap().max_norm() < 1e-12);
        }

        #[test]
        fn prop_permutation_preserves_trace_and_norm(seed in 0u64..1_000_000) {
            let mut rng = ChaCha12Rng::seed_from_u64(seed);
            let a = crate::channels::random_unitary(2, &mut rng);
            let b = crate::channels::random_unitary(2, &mut rng);
            let c_ = crate::channels::random_unitary(3, &mut rng);
            let la = SpaceLayout::single("a", 2).unwrap();
            let lb = SpaceLayout::single("b", 2).unwrap();
            let lc = SpaceLayout::single("c", 3).unwrap();
            let joint = a.reshaped(la.clone(), la).unwrap()
                .tensor(&b.reshaped(lb.clone(), lb).unwrap()).unwrap()
                .tensor(&c_.reshaped(lc.clone(), lc).unwrap()).unwrap();
            let permuted = joint.permute_subsystems(&["c", "a", "b"]).unwrap();
            prop_assert!((joint.trace().unwrap() - permuted.trace().unwrap()).norm() < 1e-12);
            prop_assert!((joint.max_norm() - permuted.max_norm()).abs() < 1e-12);
            let back = permuted.permute_subsystems(&["a", "b", "c"]).unwrap();
            prop_assert!(back.sub(&joint).unwrap().max_norm() == 0.0);
        }

        #[test]
        fn prop_json_round_trip_is_bit_exact(seed in 0u64..1_000_000) {
            let mut rng = ChaCha12Rng::seed_from_u64(seed);
            let u = crate::channels::random_unitary(3, &mut rng);
            let choi = choi_of_kraus(std::slice::from_ref(&u), "in", "out").unwrap();
            let text = serde_json::to_string(&choi).unwrap();
            let back: LabeledOperator = serde_json::from_str(&text).unwrap();
            prop_assert!(back == choi);
            let dk = double_ket(&u, "x", "y").unwrap();
            let text = serde_json::to_string(&dk).unwrap();
            let back: LabeledVector = serde_json::from_str(&text).unwrap();
            prop_assert!(back == dk);
        }
    }
}
