use crate::error::{Error, Result};
use crate::qcore::linalg::*;

fn magic_basis() -> ComplexOperator {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let (o, z, i) = (c(s, 0.0), ZERO, c(0.0, s));
    from_rows(4, &[o, z, z, i, z, i, o, z, z, i, -o, z, o, z, z, -i])
}

/// Makhlin local invariants (G1, G2) of a two-qubit unitary; local gates give (1, 3).
pub fn makhlin_invariants(u: &ComplexOperator) -> Result<(C64, f64)> {
    if u.shape() != (4, 4) {
        return Err(Error::Dimension(format!("two-qubit gate must be 4×4, got {:?}", u.shape())));
    }
    let q = magic_basis();
    let ub = q.adjoint() * u * &q;
    let m = ub.transpose() * &ub;
    let det = u.determinant();
    let tr = m.trace();
    let tr2 = (&m * &m).trace();
    let g1 = tr * tr / (det * c(16.0, 0.0));
    let g2 = (tr * tr - tr2) / (det * c(4.0, 0.0));
    Ok((g1, g2.re))
}

/// True when the gate cannot be written as a tensor product of single-qubit gates.
pub fn is_entangling(u: &ComplexOperator, tol: f64) -> Result<bool> {
    let (g1, g2) = makhlin_invariants(u)?;
    Ok((g1 - ONE).norm() > tol || (g2 - 3.0).abs() > tol)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn local_and_entangling_references() {
        let local = kron(&hadamard(), &su2_rotation(0.4, [0.0, 0.6, 0.8]));
        assert!(!is_entangling(&local, 1e-10).unwrap());
        let cz = diag(&[ONE, ONE, ONE, -ONE]);
        assert!(is_entangling(&cz, 1e-10).unwrap());
        let (g1, g2) = makhlin_invariants(&cz).unwrap();
        assert!(g1.norm() < 1e-12 && (g2 - 1.0).abs() < 1e-12);
    }
}
