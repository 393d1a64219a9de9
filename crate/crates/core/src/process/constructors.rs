//! Concrete process families: unitary chains with a definite causal order,
//! the coherently controlled order switches, and the inverse operations
//! (plugging identity channels, re-extracting chain factors).

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::linalg::CVector;
use crate::tensor::{double_ket, double_ket_to_matrix, LabeledOperator, LabeledVector, SpaceLayout};

use super::party::{canonical_layout, CausalOrder, PartySpace};
use super::structure::ProcessVector;

/// Standard chain party list: an output-only `P`, the named intermediate
/// parties with equal input and output dimension `d`, and an input-only `F`.
pub fn chain_parties(middle_names: &[&str], d: usize) -> Result<Vec<PartySpace>> {
    let mut parties = vec![PartySpace::source("P", d)?];
    for name in middle_names {
        parties.push(PartySpace::node(name, d, d)?);
    }
    parties.push(PartySpace::sink("F", d)?);
    Ok(parties)
}

/// Chain party list with alphabetic intermediate names `A, B, C, ...`.
pub fn default_chain_parties(middles: usize, d: usize) -> Result<Vec<PartySpace>> {
    if middles == 0 || middles > 24 {
        return Err(Error::InvalidArgument(format!(
            "supported intermediate party counts are 1..=24, got {middles}"
        )));
    }
    let names: Vec<String> =
        (0..middles).map(|i| char::from(b'A' + i as u8).to_string()).collect();
    let refs: Vec<&str> = names.iter().map(String::as_str).collect();
    chain_parties(&refs, d)
}

fn chain_shape<'a>(
    parties: &'a [PartySpace],
    order: &CausalOrder,
) -> Result<(&'a PartySpace, &'a [PartySpace], &'a PartySpace)> {
    if parties.len() < 3 {
        return Err(Error::InvalidArgument(
            "a chain needs a source, at least one intermediate party, and a sink".into(),
        ));
    }
    let (source, rest) = parties.split_first().expect("len checked");
    let (sink, middles) = rest.split_last().expect("len checked");
    if source.d_in() != 1 {
        return Err(Error::LayoutMismatch(format!(
            "first party `{}` must be output-only",
            source.name()
        )));
    }
    if sink.d_out() != 1 {
        return Err(Error::LayoutMismatch(format!(
            "last party `{}` must be input-only",
            sink.name()
        )));
    }
    if order.len() != middles.len() {
        return Err(Error::DimMismatch {
            context: "causal order length vs intermediate party count",
            expected: middles.len(),
            got: order.len(),
        });
    }
    Ok((source, middles, sink))
}

/// Process vector of a unitary circuit fragment chain: the source's output
/// enters `U_1`, each intermediate party acts between consecutive unitaries
/// in the given causal order, and `U_{n+1}` feeds the sink.
///
/// The result is `(x)_k |U_k>>` over consecutive wire pairs, reordered to the
/// canonical party layout.
pub fn markovian_unitary_process(
    parties: &[PartySpace],
    order: &CausalOrder,
    unitaries: &[LabeledOperator],
) -> Result<ProcessVector> {
    let (source, middles, sink) = chain_shape(parties, order)?;
    if unitaries.len() != middles.len() + 1 {
        return Err(Error::DimMismatch {
            context: "unitary count vs chain length",
            expected: middles.len() + 1,
            got: unitaries.len(),
        });
    }
    for u in unitaries {
        if !u.is_unitary(1e-10) {
            return Err(Error::NotUnitary(format!(
                "residual {:.3e}",
                u.unitarity_residual().unwrap_or(f64::INFINITY)
            )));
        }
    }

    let mut from_label = source.output_label()?;
    let mut from_dim = source.d_out();
    let mut v: Option<LabeledVector> = None;
    for (k, u) in unitaries.iter().enumerate() {
        let (to_label, to_dim) = if k < middles.len() {
            let p = &middles[order.slots()[k]];
            (p.input_label()?, p.d_in())
        } else {
            (sink.input_label()?, sink.d_in())
        };
        let d = u.matrix().nrows();
        if d != from_dim || d != to_dim {
            return Err(Error::DimMismatch {
                context: "chain wire dimensions around a unitary",
                expected: from_dim,
                got: d,
            });
        }
        let factor = double_ket(u, from_label, to_label)?;
        v = Some(match v {
            None => factor,
            Some(prev) => prev.tensor(&factor)?,
        });
        if k < middles.len() {
            let p = &middles[order.slots()[k]];
            from_label = p.output_label()?;
            from_dim = p.d_out();
        }
    }

    let canonical = canonical_layout(parties)?;
    let order_labels: Vec<&str> = canonical.labels().collect();
    let v = v.expect("at least one unitary").permute_subsystems(&order_labels)?;
    ProcessVector::new(parties.to_vec(), v)
}

/// Coherent order switch on three parties: the target state `psi` traverses
/// `A` then `B` on the control's 0 branch and `B` then `A` on the 1 branch;
/// the sink `F` receives the control wire `F_c` and the target wire `F_t`.
/// Normalized with an overall `1/sqrt(2)` so the trace of the projector is
/// `d^2`, the required process normalization.
pub fn switch3(psi: &LabeledVector) -> Result<ProcessVector> {
    if psi.layout().len() != 1 {
        return Err(Error::LayoutMismatch("target state must be a single subsystem".into()));
    }
    if (psi.norm() - 1.0).abs() > 1e-10 {
        return Err(Error::UnnormalizedState((psi.norm() - 1.0).abs()));
    }
    let d = psi.len();
    if d < 2 {
        return Err(Error::InvalidArgument("target dimension must be at least 2".into()));
    }
    let parties = vec![
        PartySpace::node("A", d, d)?,
        PartySpace::node("B", d, d)?,
        PartySpace::custom("F", vec![("F_c", 2), ("F_t", d)], vec![])?,
    ];
    let one = LabeledOperator::gate(crate::linalg::CMatrix::identity(d, d))?;
    let branch = |first: &str, second: &str, ctrl: usize| -> Result<LabeledVector> {
        let state = LabeledVector::new(
            SpaceLayout::single(format!("{first}_I"), d)?,
            psi.vector().clone(),
        )?;
        let hop = double_ket(&one, &format!("{first}_O"), &format!("{second}_I"))?;
        let out = double_ket(&one, &format!("{second}_O"), "F_t")?;
        let control = LabeledVector::basis("F_c", 2, ctrl)?;
        state.tensor(&hop)?.tensor(&out)?.tensor(&control)
    };
    let b0 = branch("A", "B", 0)?;
    let b1 = branch("B", "A", 1)?;
    let sum = b0.add(&b1.permute_subsystems(
        &b0.layout().labels().collect::<Vec<_>>(),
    )?)?;
    let w = sum.scale(C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0));

    let canonical = canonical_layout(&parties)?;
    let order_labels: Vec<&str> = canonical.labels().collect();
    ProcessVector::new(parties, w.permute_subsystems(&order_labels)?)
}

/// Coherent order switch on four qubit parties: the source `P` emits the
/// control wire `P_c` and the target wire `P_t`, the target traverses `A`
/// and `B` in a control-dependent order, and the sink `F` receives both
/// wires back. Carries no overall prefactor; the branches are orthogonal on
/// the control and the projector trace is 16, the required normalization.
pub fn switch4() -> ProcessVector {
    let parties = vec![
        PartySpace::custom("P", vec![], vec![("P_c", 2), ("P_t", 2)]).expect("valid party"),
        PartySpace::node("A", 2, 2).expect("valid party"),
        PartySpace::node("B", 2, 2).expect("valid party"),
        PartySpace::custom("F", vec![("F_c", 2), ("F_t", 2)], vec![]).expect("valid party"),
    ];
    let one = crate::tensor::pauli::id();
    let branch = |first: &str, second: &str, ctrl: usize| -> LabeledVector {
        let pc = LabeledVector::basis("P_c", 2, ctrl).expect("basis");
        let entry = double_ket(&one, "P_t", &format!("{first}_I")).expect("wire");
        let hop = double_ket(&one, &format!("{first}_O"), &format!("{second}_I")).expect("wire");
        let out = double_ket(&one, &format!("{second}_O"), "F_t").expect("wire");
        let fc = LabeledVector::basis("F_c", 2, ctrl).expect("basis");
        pc.tensor(&entry)
            .and_then(|v| v.tensor(&hop))
            .and_then(|v| v.tensor(&out))
            .and_then(|v| v.tensor(&fc))
            .expect("disjoint labels")
    };
    let b0 = branch("A", "B", 0);
    let b1 = branch("B", "A", 1);
    let b1 = b1
        .permute_subsystems(&b0.layout().labels().collect::<Vec<_>>())
        .expect("same label set");
    let sum = b0.add(&b1).expect("same layout");

    let canonical = canonical_layout(&parties).expect("unique names");
    let order_labels: Vec<&str> = canonical.labels().collect();
    let w = sum.permute_subsystems(&order_labels).expect("same label set");
    ProcessVector::new(parties, w).expect("canonical layout")
}

/// Plugs the identity channel into every intermediate party NOT listed in
/// `keep`, contracting its wires away. For a chain this composes the
/// adjacent unitaries: `... |U>>^{X_O, j_I} |V>>^{j_O, Y_I} ...` contracted
/// over `j` becomes `|VU>>^{X_O, Y_I}`, with no scale factor.
pub fn reduce_with_identity(w: &ProcessVector, keep: &[&str]) -> Result<ProcessVector> {
    let parties = w.parties();
    if parties.len() < 3 {
        return Err(Error::InvalidArgument("reduction needs intermediate parties".into()));
    }
    let middles = &parties[1..parties.len() - 1];
    for name in keep {
        if !middles.iter().any(|p| p.name() == *name) {
            return Err(Error::UnknownLabel((*name).to_string()));
        }
    }
    let mut new_parties = vec![parties[0].clone()];
    let mut v = w.vector().clone();
    for p in middles {
        if keep.contains(&p.name()) {
            new_parties.push(p.clone());
            continue;
        }
        let (a, b) = (p.input_label()?, p.output_label()?);
        if p.d_in() != p.d_out() {
            return Err(Error::DimMismatch {
                context: "identity channel needs equal input and output dimensions",
                expected: p.d_in(),
                got: p.d_out(),
            });
        }
        v = v.contract_pair(a, b)?;
    }
    new_parties.push(parties[parties.len() - 1].clone());
    ProcessVector::new(new_parties, v)
}

/// Recovers the chain unitaries of a process vector that is an exact unitary
/// chain in the given causal order (up to numerical noise `tol`).
///
/// Factors are peeled left to right: the reduced projector on each wire pair
/// is rank one, its largest column recovers the factor up to a phase, and
/// contracting the phase-fixed factor out passes the residual phase down the
/// chain, so the returned factors reproduce the vector exactly (the final
/// factor absorbs the accumulated phase). Fails with `NotMarkovian` when the
/// vector is not of product form.
pub fn markovian_factors(
    w: &ProcessVector,
    order: &CausalOrder,
    tol: f64,
) -> Result<Vec<LabeledOperator>> {
    let (source, middles, sink) = chain_shape(w.parties(), order)?;
    let mut pairs: Vec<(String, String)> = Vec::with_capacity(middles.len() + 1);
    let mut from = source.output_label()?.to_string();
    for &slot in order.slots() {
        let p = &middles[slot];
        pairs.push((from.clone(), p.input_label()?.to_string()));
        from = p.output_label()?.to_string();
    }
    pairs.push((from, sink.input_label()?.to_string()));

    let mut v = w.vector().clone();
    let mut gates = Vec::with_capacity(pairs.len());
    for (a, b) in &pairs[..pairs.len() - 1] {
        let d = v.layout().dim_of(a)?;
        if v.layout().dim_of(b)? != d {
            return Err(Error::DimMismatch {
                context: "wire pair dimensions",
                expected: d,
                got: v.layout().dim_of(b)?,
            });
        }
        let rho = pair_density(&v, a, b)?;
        let m = rho.matrix();
        let best = (0..m.ncols())
            .max_by(|&i, &j| m.column(i).norm().total_cmp(&m.column(j).norm()))
            .expect("nonempty");
        let col = m.column(best);
        let norm = col.norm();
        if norm < tol {
            return Err(Error::NotMarkovian(format!(
                "no rank-one factor on wires ({a}, {b})"
            )));
        }
        let mut dk: CVector = col.into_owned() * C64::new((d as f64).sqrt() / norm, 0.0);
        gauge_fix(&mut dk);
        let dk = LabeledVector::new(rho.row_layout().clone(), dk)?;
        let gate = double_ket_to_matrix(&dk)?;
        let residual = gate.unitarity_residual()?;
        if residual > tol {
            return Err(Error::NotMarkovian(format!(
                "factor on wires ({a}, {b}) is not unitary (residual {residual:.3e})"
            )));
        }
        v = v.contract_bra_double_ket(&gate, a, b)?.scale(C64::new(1.0 / d as f64, 0.0));
        gates.push(gate);
    }

    // What remains is the last factor itself, accumulated phase included.
    let (a, b) = &pairs[pairs.len() - 1];
    let remaining: Vec<&str> = v.layout().labels().collect();
    if remaining != [a.as_str(), b.as_str()] {
        return Err(Error::NotMarkovian(format!(
            "unexpected residual wires {remaining:?}"
        )));
    }
    let last = double_ket_to_matrix(&v)?;
    let residual = last.unitarity_residual()?;
    if residual > tol {
        return Err(Error::NotMarkovian(format!(
            "final factor is not unitary (residual {residual:.3e})"
        )));
    }
    gates.push(last);

    // Exactness: the factorization must reproduce the vector.
    let mut rebuilt: Option<LabeledVector> = None;
    for (gate, (a, b)) in gates.iter().zip(&pairs) {
        let factor = double_ket(gate, a, b)?;
        rebuilt = Some(match rebuilt {
            None => factor,
            Some(prev) => prev.tensor(&factor)?,
        });
    }
    let rebuilt = rebuilt
        .expect("at least one factor")
        .permute_subsystems(&w.vector().layout().labels().collect::<Vec<_>>())?;
    let scale = w.vector().norm().max(1.0);
    let diff = rebuilt.add(&w.vector().scale(C64::new(-1.0, 0.0)))?.norm();
    if diff > tol * scale {
        return Err(Error::NotMarkovian(format!(
            "factorization residual {diff:.3e} exceeds tolerance"
        )));
    }
    Ok(gates)
}

/// Reduced projector of `v` on the ordered wire pair `(a, b)`.
fn pair_density(v: &LabeledVector, a: &str, b: &str) -> Result<LabeledOperator> {
    let outer = v.outer(v);
    let others: Vec<&str> =
        v.layout().labels().filter(|l| *l != a && *l != b).collect();
    let rho = outer.partial_trace(&others)?;
    let labels: Vec<&str> = rho.row_layout().labels().collect();
    if labels == [a, b] {
        Ok(rho)
    } else {
        rho.permute_subsystems(&[a, b])
    }
}

/// Rotates the global phase so the largest-magnitude entry is real positive.
fn gauge_fix(v: &mut CVector) {
    let mut best = 0usize;
    for i in 1..v.len() {
        if v[i].norm_sqr() > v[best].norm_sqr() {
            best = i;
        }
    }
    let z = v[best];
    if z.norm() > 0.0 {
        let phase = z.conj() / z.norm();
        *v *= phase;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::random_unitary;
    use rand::SeedableRng;
    use rand_chacha::ChaCha12Rng;

    #[test]
    fn markovian_process_matches_explicit_tensor_for_sequential_order() {
        let mut rng = ChaCha12Rng::seed_from_u64(1);
        let d = 2;
        let parties = default_chain_parties(2, d).unwrap();
        let us: Vec<_> = (0..3).map(|_| random_unitary(d, &mut rng)).collect();
        let w =
            markovian_unitary_process(&parties, &CausalOrder::sequential(2), &us).unwrap();

        let expected = double_ket(&us[0], "P_O", "A_I")
            .unwrap()
            .tensor(&double_ket(&us[1], "A_O", "B_I").unwrap())
            .unwrap()
            .tensor(&double_ket(&us[2], "B_O", "F_I").unwrap())
            .unwrap();
        let diff = w.vector().add(&expected.scale(C64::new(-1.0, 0.0))).unwrap().norm();
        assert!(diff < 1e-15);
        assert!((w.norm() - (d as f64).powf(1.5)).abs() < 1e-12);
    }

    #[test]
    fn reversed_order_wires_through_b_first() {
        let mut rng = ChaCha12Rng::seed_from_u64(2);
        let d = 3;
        let parties = default_chain_parties(2, d).unwrap();
        let us: Vec<_> = (0..3).map(|_| random_unitary(d, &mut rng)).collect();
        let w = markovian_unitary_process(&parties, &CausalOrder::reversed(2), &us).unwrap();

        let expected = double_ket(&us[0], "P_O", "B_I")
            .unwrap()
            .tensor(&double_ket(&us[1], "B_O", "A_I").unwrap())
            .unwrap()
            .tensor(&double_ket(&us[2], "A_O", "F_I").unwrap())
            .unwrap()
            .permute_subsystems(&["P_O", "A_I", "A_O", "B_I", "B_O", "F_I"])
            .unwrap();
        let diff = w.vector().add(&expected.scale(C64::new(-1.0, 0.0))).unwrap().norm();
        assert!(diff < 1e-15);
    }

    #[test]
    fn switch3_has_trace_d_squared_and_control_marginal_mixes_orders() {
        for d in [2usize, 3] {
            let psi = LabeledVector::basis("t", d, 0).unwrap();
            let w = switch3(&psi).unwrap();
            assert!((w.norm().powi(2) - (d * d) as f64).abs() < 1e-12);

            // Tracing the control out of |w><w| leaves the equal classical
            // mixture of the two fixed-order projectors.
            let proj = w.vector().outer(w.vector());
            let reduced = proj.partial_trace(&["F_c"]).unwrap();

            let one = LabeledOperator::gate(crate::linalg::CMatrix::identity(d, d)).unwrap();
            let fixed = |first: &str, second: &str| -> LabeledVector {
                LabeledVector::new(
                    SpaceLayout::single(format!("{first}_I"), d).unwrap(),
                    psi.vector().clone(),
                )
                .unwrap()
                .tensor(&double_ket(&one, &format!("{first}_O"), &format!("{second}_I")).unwrap())
                .unwrap()
                .tensor(&double_ket(&one, &format!("{second}_O"), "F_t").unwrap())
                .unwrap()
                .permute_subsystems(&["A_I", "A_O", "B_I", "B_O", "F_t"])
                .unwrap()
            };
            let ab = fixed("A", "B");
            let ba = fixed("B", "A");
            let mixture = ab
                .outer(&ab)
                .scale(C64::new(0.5, 0.0))
                .add(&ba.outer(&ba).scale(C64::new(0.5, 0.0)))
                .unwrap();
            assert!(reduced.sub(&mixture).unwrap().max_norm() < 1e-14);
        }
    }

    #[test]
    fn switch4_trace_and_branch_norms() {
        let w = switch4();
        assert!((w.norm().powi(2) - 16.0).abs() < 1e-12);
        assert_eq!(w.vector().layout().total_dim(), 256);
        let labels: Vec<&str> = w.vector().layout().labels().collect();
        assert_eq!(labels, ["P_c", "P_t", "A_I", "A_O", "B_I", "B_O", "F_c", "F_t"]);

        // Projecting the control onto 0 or 1 recovers one branch of squared
        // norm 8 = 2^3 (three identity wires).
        for ctrl in 0..2 {
            let b = w
                .vector()
                .project_basis("P_c", ctrl)
                .unwrap()
                .project_basis("F_c", ctrl)
                .unwrap();
            assert!((b.norm().powi(2) - 8.0).abs() < 1e-12);
            let cross = w
                .vector()
                .project_basis("P_c", ctrl)
                .unwrap()
                .project_basis("F_c", 1 - ctrl)
                .unwrap();
            assert!(cross.norm() < 1e-15);
        }
    }

    #[test]
    fn identity_reduction_composes_adjacent_unitaries() {
        let mut rng = ChaCha12Rng::seed_from_u64(3);
        let d = 2;
        let parties = default_chain_parties(3, d).unwrap();
        let us: Vec<_> = (0..4).map(|_| random_unitary(d, &mut rng)).collect();
        // Order A, B, C; contract B away.
        let w = markovian_unitary_process(&parties, &CausalOrder::sequential(3), &us).unwrap();
        let reduced = reduce_with_identity(&w, &["A", "C"]).unwrap();

        let merged = us[2].mul(&us[1]).unwrap();
        let two = chain_parties(&["A", "C"], d).unwrap();
        let expected = markovian_unitary_process(
            &two,
            &CausalOrder::sequential(2),
            &[us[0].clone(), merged, us[3].clone()],
        )
        .unwrap();
        let diff = reduced
            .vector()
            .add(&expected.vector().scale(C64::new(-1.0, 0.0)))
            .unwrap()
            .norm();
        assert!(diff < 1e-12, "diff {diff:.3e}");
    }

    #[test]
    fn factor_extraction_reproduces_the_chain() {
        let mut rng = ChaCha12Rng::seed_from_u64(4);
        for d in [2usize, 3] {
            for order in [CausalOrder::sequential(2), CausalOrder::reversed(2)] {
                let parties = default_chain_parties(2, d).unwrap();
                let us: Vec<_> = (0..3).map(|_| random_unitary(d, &mut rng)).collect();
                let w = markovian_unitary_process(&parties, &order, &us).unwrap();
                let gates = markovian_factors(&w, &order, 1e-8).unwrap();
                assert_eq!(gates.len(), 3);
                // Each factor matches the original up to a global phase.
                for (g, u) in gates.iter().zip(&us) {
                    let overlap = g.adjoint().mul(u).unwrap().trace().unwrap();
                    assert!(
                        (overlap.norm() - d as f64).abs() < 1e-8,
                        "overlap {overlap} for d {d}"
                    );
                }
                // And the total phase telescopes away.
                let rebuilt = markovian_unitary_process(&parties, &order, &gates).unwrap();
                let diff = rebuilt
                    .vector()
                    .add(&w.vector().scale(C64::new(-1.0, 0.0)))
                    .unwrap()
                    .norm();
                assert!(diff < 1e-8, "diff {diff:.3e}");
            }
        }
    }

    #[test]
    fn factor_extraction_rejects_entangled_processes() {
        // A GHZ-like vector over the chain layout is not a product of wire
        // factors, so no rank-one unitary can be peeled off.
        let chain = default_chain_parties(1, 2).unwrap();
        let layout = canonical_layout(&chain).unwrap();
        let mut entries = vec![C64::new(0.0, 0.0); layout.total_dim()];
        entries[0] = C64::new(1.0, 0.0);
        entries[layout.total_dim() - 1] = C64::new(1.0, 0.0);
        let ghz = LabeledVector::from_entries(layout, entries).unwrap();
        let wv = ProcessVector::new(chain, ghz).unwrap();
        let err = markovian_factors(&wv, &CausalOrder::sequential(1), 1e-8);
        assert!(matches!(err, Err(Error::NotMarkovian(_))), "{err:?}");
    }
}
