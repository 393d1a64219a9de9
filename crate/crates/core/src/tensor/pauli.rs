//! The qubit Pauli matrices and the Hadamard gate as labeled operators.

use num_complex::Complex64 as C64;

use crate::linalg::CMatrix;

use super::operator::LabeledOperator;

fn qubit_gate(entries: [C64; 4]) -> LabeledOperator {
    LabeledOperator::gate(CMatrix::from_row_slice(2, 2, &entries)).expect("2x2 gate")
}

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn id() -> LabeledOperator {
    qubit_gate([c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)])
}

pub fn x() -> LabeledOperator {
    qubit_gate([c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)])
}

pub fn y() -> LabeledOperator {
    qubit_gate([c(0.0, 0.0), c(0.0, -1.0), c(0.0, 1.0), c(0.0, 0.0)])
}

pub fn z() -> LabeledOperator {
    qubit_gate([c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(-1.0, 0.0)])
}

pub fn hadamard() -> LabeledOperator {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    qubit_gate([c(s, 0.0), c(s, 0.0), c(s, 0.0), c(-s, 0.0)])
}

/// Pauli matrix along the given axis: 0 -> x, 1 -> y, 2 -> z.
pub fn along(axis: usize) -> LabeledOperator {
    match axis {
        0 => x(),
        1 => y(),
        2 => z(),
        _ => panic!("Pauli axis must be 0, 1 or 2"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn paulis_are_unitary_hermitian_involutions() {
        for p in [id(), x(), y(), z(), hadamard()] {
            assert!(p.is_unitary(1e-15));
            assert!(p.is_hermitian(1e-15));
            let sq = p.mul(&p).unwrap();
            assert!(sq.sub(&id()).unwrap().max_norm() < 1e-15);
        }
    }

    #[test]
    fn pauli_algebra_xy_equals_iz() {
        let xy = x().mul(&y()).unwrap();
        let iz = z().scale(C64::new(0.0, 1.0));
        assert!(xy.sub(&iz).unwrap().max_norm() < 1e-15);
    }

    #[test]
    fn hadamard_is_normalized_x_plus_z() {
        let s = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        let combo = x().scale(s).add(&z().scale(s)).unwrap();
        assert!(combo.sub(&hadamard()).unwrap().max_norm() < 1e-15);
    }
}
