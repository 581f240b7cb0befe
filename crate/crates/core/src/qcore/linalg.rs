use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::qcore::tolerance::ToleranceConfig;

pub type C64 = Complex64;

/// Dense square complex matrix. Carries H(t), U(t), projectors and Pauli operators alike.
pub type ComplexOperator = DMatrix<C64>;

/// Column state vector.
pub type Ket = DVector<C64>;

/// What an operator is supposed to be; checked by [`check_role`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Role {
    General,
    Hermitian,
    Unitary,
}

pub const I: C64 = C64 { re: 0.0, im: 1.0 };
pub const ONE: C64 = C64 { re: 1.0, im: 0.0 };
pub const ZERO: C64 = C64 { re: 0.0, im: 0.0 };

#[inline]
pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// e^{iφ}
#[inline]
pub fn cis(phi: f64) -> C64 {
    C64::from_polar(1.0, phi)
}

pub fn identity(n: usize) -> ComplexOperator {
    DMatrix::identity(n, n)
}

pub fn zeros(n: usize) -> ComplexOperator {
    DMatrix::zeros(n, n)
}

pub fn from_rows(n: usize, entries: &[C64]) -> ComplexOperator {
    assert_eq!(entries.len(), n * n, "from_rows needs n² entries");
    DMatrix::from_row_slice(n, n, entries)
}

pub fn from_real_rows(n: usize, entries: &[f64]) -> ComplexOperator {
    let v: Vec<C64> = entries.iter().map(|&x| c(x, 0.0)).collect();
    from_rows(n, &v)
}

pub fn diag(entries: &[C64]) -> ComplexOperator {
    DMatrix::from_diagonal(&DVector::from_column_slice(entries))
}

pub fn pauli_x() -> ComplexOperator {
    from_real_rows(2, &[0.0, 1.0, 1.0, 0.0])
}

pub fn pauli_y() -> ComplexOperator {
    from_rows(2, &[ZERO, -I, I, ZERO])
}

pub fn pauli_z() -> ComplexOperator {
    from_real_rows(2, &[1.0, 0.0, 0.0, -1.0])
}

pub fn hadamard() -> ComplexOperator {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    from_real_rows(2, &[s, s, s, -s])
}

/// n·σ for a (not necessarily unit) real vector.
pub fn n_dot_sigma(n: [f64; 3]) -> ComplexOperator {
    pauli_x() * c(n[0], 0.0) + pauli_y() * c(n[1], 0.0) + pauli_z() * c(n[2], 0.0)
}

/// e^{iα n·σ} for unit n.
pub fn su2_rotation(alpha: f64, n: [f64; 3]) -> ComplexOperator {
    identity(2) * c(alpha.cos(), 0.0) + n_dot_sigma(n) * c(0.0, alpha.sin())
}

/// |i⟩⟨j| in dimension n.
pub fn outer_basis(n: usize, i: usize, j: usize) -> ComplexOperator {
    let mut m = zeros(n);
    m[(i, j)] = ONE;
    m
}

pub fn outer(a: &Ket, b: &Ket) -> ComplexOperator {
    a * b.adjoint()
}

pub fn basis_ket(dim: usize, k: usize) -> Ket {
    let mut v = DVector::zeros(dim);
    v[k] = ONE;
    v
}

pub fn ket(amplitudes: &[C64]) -> Ket {
    DVector::from_column_slice(amplitudes)
}

pub fn normalized(v: &Ket) -> Ket {
    v / c(v.norm(), 0.0)
}

pub fn kron(a: &ComplexOperator, b: &ComplexOperator) -> ComplexOperator {
    a.kronecker(b)
}

pub fn kron_all(ops: &[ComplexOperator]) -> ComplexOperator {
    let mut out = identity(1);
    for op in ops {
        out = out.kronecker(op);
    }
    out
}

pub fn kron_ket(a: &Ket, b: &Ket) -> Ket {
    a.kronecker(b)
}

/// ⟨ψ|O|ψ⟩
pub fn expectation(psi: &Ket, op: &ComplexOperator) -> Result<C64> {
    if op.nrows() != psi.len() || op.ncols() != psi.len() {
        return Err(Error::Dimension(format!(
            "ket has dimension {}, operator is {}×{}",
            psi.len(),
            op.nrows(),
            op.ncols()
        )));
    }
    Ok(psi.dotc(&(op * psi)))
}

pub fn commutator(a: &ComplexOperator, b: &ComplexOperator) -> ComplexOperator {
    a * b - b * a
}

pub fn trace(m: &ComplexOperator) -> C64 {
    m.trace()
}

pub fn hermiticity_residual(h: &ComplexOperator) -> f64 {
    (h - h.adjoint()).norm()
}

pub fn unitarity_residual(u: &ComplexOperator) -> f64 {
    (u.adjoint() * u - identity(u.nrows())).norm()
}

pub fn check_square(m: &ComplexOperator) -> Result<usize> {
    if m.nrows() != m.ncols() {
        return Err(Error::Dimension(format!("operator is {}×{}, not square", m.nrows(), m.ncols())));
    }
    Ok(m.nrows())
}

pub fn check_hermitian(h: &ComplexOperator, rel_tol: f64) -> Result<()> {
    check_square(h)?;
    let r = hermiticity_residual(h);
    if r > rel_tol * h.norm().max(f64::MIN_POSITIVE) && r > 0.0 {
        return Err(Error::Hermiticity { residual: r, tolerance: rel_tol });
    }
    Ok(())
}

pub fn check_unitary(u: &ComplexOperator, tol: f64) -> Result<()> {
    check_square(u)?;
    let r = unitarity_residual(u);
    if r > tol {
        return Err(Error::Unitarity { residual: r, tolerance: tol });
    }
    Ok(())
}

pub fn check_role(op: &ComplexOperator, role: Role, tol: &ToleranceConfig) -> Result<()> {
    if op.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::InvalidArgument("operator has non-finite entries".into()));
    }
    match role {
        Role::General => check_square(op).map(|_| ()),
        Role::Hermitian => check_hermitian(op, tol.hermiticity),
        Role::Unitary => check_unitary(op, tol.unitarity),
    }
}

/// (H + H†)/2
pub fn hermitian_part(h: &ComplexOperator) -> ComplexOperator {
    (h + h.adjoint()) * c(0.5, 0.0)
}

/// Eigen-decomposition of a Hermitian matrix, eigenvalues ascending, eigenvectors as columns.
pub fn herm_eigen(h: &ComplexOperator) -> (Vec<f64>, ComplexOperator) {
    let n = h.nrows();
    if n == 1 {
        return (vec![h[(0, 0)].re], identity(1));
    }
    let eig = SymmetricEigen::new(hermitian_part(h));
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let mut vectors = zeros(n);
    for (col, &k) in order.iter().enumerate() {
        vectors.set_column(col, &eig.eigenvectors.column(k));
    }
    (values, vectors)
}

/// V f(Λ) V† for a Hermitian H = VΛV†.
pub fn herm_apply(values: &[f64], vectors: &ComplexOperator, f: impl Fn(f64) -> C64) -> ComplexOperator {
    let mut scaled = vectors.clone();
    for (k, &lam) in values.iter().enumerate() {
        let fk = f(lam);
        for r in 0..scaled.nrows() {
            scaled[(r, k)] *= fk;
        }
    }
    scaled * vectors.adjoint()
}

/// e^{−iHt} via the Hermitian eigen-decomposition; rejects non-Hermitian input.
pub fn herm_expm(h: &ComplexOperator, t: f64) -> Result<ComplexOperator> {
    check_hermitian(h, ToleranceConfig::default().hermiticity)?;
    Ok(herm_expm_unchecked(h, t))
}

/// e^{−iHt} without the Hermiticity check (the Hermitian part is used).
pub fn herm_expm_unchecked(h: &ComplexOperator, t: f64) -> ComplexOperator {
    let (values, vectors) = herm_eigen(h);
    herm_apply(&values, &vectors, |lam| cis(-lam * t))
}

/// Validates a projector and returns its rank.
pub fn projector_rank(p: &ComplexOperator, tol: f64) -> Result<usize> {
    check_square(p)?;
    let herm = hermiticity_residual(p);
    let idem = (p * p - p).norm();
    let tr = p.trace();
    let rank = tr.re.round();
    if herm > tol || idem > tol || (tr.re - rank).abs() > tol || tr.im.abs() > tol || rank < 1.0 {
        return Err(Error::Projector(format!(
            "‖P−P†‖={herm:.2e}, ‖P²−P‖={idem:.2e}, Tr P={:.6}{:+.2e}i",
            tr.re, tr.im
        )));
    }
    Ok(rank as usize)
}

/// |Tr[V†UP]|²/L² with L = Tr P.
pub fn gate_fidelity(u: &ComplexOperator, v: &ComplexOperator, p: &ComplexOperator) -> Result<f64> {
    let n = check_square(u)?;
    if v.shape() != (n, n) || p.shape() != (n, n) {
        return Err(Error::Dimension(format!(
            "U is {n}×{n}, V is {:?}, P is {:?}",
            v.shape(),
            p.shape()
        )));
    }
    let l = projector_rank(p, 1e-9)? as f64;
    let z = (v.adjoint() * u * p).trace();
    Ok((z.norm_sqr() / (l * l)).min(1.0))
}

/// min over χ of ‖A − e^{iχ}B‖_F.
pub fn phase_aligned_distance(a: &ComplexOperator, b: &ComplexOperator) -> f64 {
    let z = (b.adjoint() * a).trace();
    let phase = if z.norm() > 0.0 { z / z.norm() } else { ONE };
    (a - b * phase).norm()
}

/// Unitary factor W V† of the polar decomposition M = (W V†)(V Σ V†).
pub fn polar_unitary(m: &ComplexOperator) -> ComplexOperator {
    let svd = m.clone().svd(true, true);
    let u = svd.u.expect("svd u");
    let vt = svd.v_t.expect("svd v_t");
    u * vt
}

/// Principal value in (−π, π].
pub fn wrap_angle(x: f64) -> f64 {
    use std::f64::consts::PI;
    let mut y = x.rem_euclid(2.0 * PI);
    if y > PI {
        y -= 2.0 * PI;
    }
    y
}

/// |a − b| measured on the circle.
pub fn angle_distance(a: f64, b: f64) -> f64 {
    wrap_angle(a - b).abs()
}

/// Restriction ⟨i|M|j⟩ over the given index set.
pub fn sub_block(m: &ComplexOperator, rows: &[usize], cols: &[usize]) -> DMatrix<C64> {
    DMatrix::from_fn(rows.len(), cols.len(), |i, j| m[(rows[i], cols[j])])
}

/// Embed a small operator acting on `indices` into dimension n, identity elsewhere.
pub fn embed(small: &ComplexOperator, n: usize, indices: &[usize]) -> ComplexOperator {
    let mut out = identity(n);
    for &i in indices {
        out[(i, i)] = ZERO;
    }
    for (a, &i) in indices.iter().enumerate() {
        for (b, &j) in indices.iter().enumerate() {
            out[(i, j)] = small[(a, b)];
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn pauli_algebra() {
        let (x, y, z) = (pauli_x(), pauli_y(), pauli_z());
        assert!((commutator(&x, &y) - &z * c(0.0, 2.0)).norm() < 1e-15);
        assert!((&x * &x - identity(2)).norm() < 1e-15);
    }

    #[test]
    fn expm_zero_generator_is_identity() {
        let u = herm_expm(&zeros(2), 5.0).unwrap();
        assert!((u - identity(2)).norm() < 1e-15);
    }

    #[test]
    fn expm_sigma_z_quarter_turn() {
        let u = herm_expm(&pauli_z(), PI / 2.0).unwrap();
        let expect = diag(&[cis(-PI / 2.0), cis(PI / 2.0)]);
        assert!((u - expect).norm() < 1e-14);
    }

    #[test]
    fn expm_sigma_x_against_taylor_series() {
        // 40-term Taylor series of e^{-iXt} as an independent reference
        let t = PI / 2.0;
        let a = pauli_x() * c(0.0, -t);
        let mut term = identity(2);
        let mut sum = identity(2);
        for k in 1..40 {
            term = &term * &a * c(1.0 / k as f64, 0.0);
            sum += &term;
        }
        let u = herm_expm(&pauli_x(), t).unwrap();
        assert!((&u - &sum).norm() < 1e-12);
        assert!((u - pauli_x() * c(0.0, -1.0)).norm() < 1e-12);
    }

    #[test]
    fn expm_rejects_non_hermitian() {
        let m = from_real_rows(2, &[0.0, 1.0, 0.0, 0.0]);
        assert!(matches!(herm_expm(&m, 1.0), Err(Error::Hermiticity { .. })));
    }

    #[test]
    fn kron_and_expectation() {
        let zi = kron(&pauli_z(), &identity(2));
        let k10 = basis_ket(4, 2);
        assert!((expectation(&k10, &zi).unwrap() - c(-1.0, 0.0)).norm() < 1e-15);
        assert!((expectation(&basis_ket(2, 0), &pauli_z()).unwrap() - ONE).norm() < 1e-15);
        let plus = normalized(&ket(&[ONE, ONE]));
        assert!((expectation(&plus, &pauli_x()).unwrap() - ONE).norm() < 1e-15);
        assert!(expectation(&plus, &zi).is_err());
    }

    #[test]
    fn fidelity_examples() {
        let p = identity(2);
        assert!((gate_fidelity(&hadamard(), &hadamard(), &p).unwrap() - 1.0).abs() < 1e-15);
        assert!(gate_fidelity(&pauli_x(), &pauli_z(), &p).unwrap().abs() < 1e-15);
        let u = herm_expm(&pauli_z(), PI / 8.0).unwrap();
        let f = gate_fidelity(&u, &identity(2), &p).unwrap();
        assert!((f - (PI / 8.0).cos().powi(2)).abs() < 1e-14);
    }

    #[test]
    fn fidelity_rejects_non_projector() {
        let p = identity(2) * c(0.5, 0.0);
        assert!(matches!(gate_fidelity(&identity(2), &identity(2), &p), Err(Error::Projector(_))));
    }

    #[test]
    fn polar_of_scaled_unitary() {
        let u = su2_rotation(0.3, [0.0, 0.6, 0.8]);
        let w = polar_unitary(&(&u * c(2.5, 0.0)));
        assert!((w - u).norm() < 1e-13);
    }

    #[test]
    fn wrap_angle_range() {
        assert!((wrap_angle(3.0 * PI) - PI).abs() < 1e-12);
        assert!((wrap_angle(-PI) - PI).abs() < 1e-12);
        assert!(wrap_angle(0.1) == 0.1);
    }
}
