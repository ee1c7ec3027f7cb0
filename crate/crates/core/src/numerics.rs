//! Dense complex linear algebra used throughout the crate.
//!
//! Matrices are `nalgebra::DMatrix<Complex64>`. The helpers here wrap the
//! decompositions we rely on (SVD, Hermitian eigendecomposition, QR) so that
//! convergence failures surface as [`Error::SvdFailed`] instead of garbage.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};

pub type ComplexMatrix = DMatrix<Complex64>;
pub type ComplexVector = DVector<Complex64>;

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);
pub const I: Complex64 = Complex64::new(0.0, 1.0);

const SVD_EPS: f64 = 1e-15;
const SVD_MAX_ITERS: usize = 10_000;

/// Thin SVD `m = u * diag(s) * v^H` with singular values sorted descending.
#[derive(Debug, Clone)]
pub struct Svd {
    pub u: ComplexMatrix,
    pub s: Vec<f64>,
    pub v: ComplexMatrix,
}

impl Svd {
    pub fn reconstruct(&self) -> ComplexMatrix {
        let mut us = self.u.clone();
        for (j, &sj) in self.s.iter().enumerate() {
            us.column_mut(j).scale_mut(sj);
        }
        us * self.v.adjoint()
    }
}

pub fn svd(m: &ComplexMatrix) -> Result<Svd> {
    ensure_finite(m, "svd input")?;
    let (rows, cols) = m.shape();
    let dec = m
        .clone()
        .try_svd(true, true, SVD_EPS, SVD_MAX_ITERS)
        .ok_or(Error::SvdFailed { rows, cols })?;
    let u = dec.u.ok_or(Error::SvdFailed { rows, cols })?;
    let v_t = dec.v_t.ok_or(Error::SvdFailed { rows, cols })?;
    Ok(Svd {
        u,
        s: dec.singular_values.iter().copied().collect(),
        v: v_t.adjoint(),
    })
}

/// Singular values only, sorted descending.
pub fn singular_values(m: &ComplexMatrix) -> Result<Vec<f64>> {
    let (rows, cols) = m.shape();
    let dec = m
        .clone()
        .try_svd(false, false, SVD_EPS, SVD_MAX_ITERS)
        .ok_or(Error::SvdFailed { rows, cols })?;
    let mut s: Vec<f64> = dec.singular_values.iter().copied().collect();
    if s.iter().any(|x| !x.is_finite()) {
        return Err(Error::SvdFailed { rows, cols });
    }
    s.sort_by(|a, b| b.total_cmp(a));
    Ok(s)
}

/// Largest singular value, i.e. the induced 2-norm.
pub fn spectral_norm(m: &ComplexMatrix) -> Result<f64> {
    if m.is_empty() {
        return Ok(0.0);
    }
    ensure_finite(m, "spectral_norm input")?;
    Ok(singular_values(m)?.first().copied().unwrap_or(0.0))
}

pub fn frobenius_norm_sq(m: &ComplexMatrix) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum()
}

/// `Tr[a^H b]` without forming the product.
pub fn trace_inner(a: &ComplexMatrix, b: &ComplexMatrix) -> Complex64 {
    debug_assert_eq!(a.shape(), b.shape());
    a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum()
}

pub fn identity(n: usize) -> ComplexMatrix {
    ComplexMatrix::identity(n, n)
}

pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    a.kronecker(b)
}

pub fn ensure_finite(m: &ComplexMatrix, what: &str) -> Result<()> {
    if m.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite(what.to_string()))
    }
}

/// `‖m^H m − 1‖_F`; zero for matrices with orthonormal columns.
pub fn isometry_defect(m: &ComplexMatrix) -> f64 {
    let g = m.adjoint() * m;
    let n = g.nrows();
    frobenius_norm_sq(&(g - identity(n))).sqrt()
}

pub fn is_unitary(m: &ComplexMatrix, tol: f64) -> bool {
    m.is_square() && isometry_defect(m) < tol
}

/// Orthonormal generator basis of `u(D)`: identity first, then the `D²−1`
/// traceless Hermitian generalized Gell-Mann matrices normalized to
/// `Tr(g_i g_j) = 2 δ_ij`.
#[derive(Debug, Clone)]
pub struct GeneratorBasis {
    dim: usize,
    elements: Vec<ComplexMatrix>,
}

impl GeneratorBasis {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn elements(&self) -> &[ComplexMatrix] {
        &self.elements
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }
}

/// Identity plus the generalized Gell-Mann matrices in the conventional order
/// (for `D = 3`: λ1 … λ8). `D = 2` yields `{1, σx, σy, σz}`.
pub fn generalized_gell_mann(d: usize) -> Result<GeneratorBasis> {
    if d < 2 {
        return Err(Error::Invalid(format!(
            "generator basis needs dimension >= 2, got {d}"
        )));
    }
    let mut elements = Vec::with_capacity(d * d);
    elements.push(identity(d));
    for k in 1..d {
        for j in 0..k {
            let mut sym = ComplexMatrix::zeros(d, d);
            sym[(j, k)] = ONE;
            sym[(k, j)] = ONE;
            elements.push(sym);

            let mut anti = ComplexMatrix::zeros(d, d);
            anti[(j, k)] = -I;
            anti[(k, j)] = I;
            elements.push(anti);
        }
        let scale = (2.0 / (k * (k + 1)) as f64).sqrt();
        let mut diag = ComplexMatrix::zeros(d, d);
        for j in 0..k {
            diag[(j, j)] = Complex64::new(scale, 0.0);
        }
        diag[(k, k)] = Complex64::new(-(k as f64) * scale, 0.0);
        elements.push(diag);
    }
    Ok(GeneratorBasis { dim: d, elements })
}

/// `Σ h[l·|b| + l'] a_l ⊗ b_l'`.
pub fn hermitian_generator(
    h: &[f64],
    basis_a: &GeneratorBasis,
    basis_b: &GeneratorBasis,
) -> Result<ComplexMatrix> {
    let (na, nb) = (basis_a.len(), basis_b.len());
    if h.len() != na * nb {
        return Err(Error::dim(
            format!("{} generator coefficients", na * nb),
            h.len(),
        ));
    }
    if h.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite("generator coefficients".into()));
    }
    let dim = basis_a.dim() * basis_b.dim();
    let mut gen = ComplexMatrix::zeros(dim, dim);
    for (l, a) in basis_a.elements().iter().enumerate() {
        for (lp, b) in basis_b.elements().iter().enumerate() {
            let c = h[l * nb + lp];
            if c != 0.0 {
                gen += kron(a, b) * Complex64::new(c, 0.0);
            }
        }
    }
    Ok(gen)
}

/// `exp(−i H)` for Hermitian `H`, through its eigendecomposition.
pub fn exp_minus_i_hermitian(h: &ComplexMatrix) -> ComplexMatrix {
    let n = h.nrows();
    // symmetrize to absorb rounding in the generator sum
    let herm = (h + h.adjoint()) * Complex64::new(0.5, 0.0);
    let eig = herm.symmetric_eigen();
    let mut phased = eig.eigenvectors.clone();
    for (j, &lambda) in eig.eigenvalues.iter().enumerate() {
        let phase = Complex64::from_polar(1.0, -lambda);
        {
            let mut col = phased.column_mut(j);
            col *= phase;
        }
    }
    let out = phased * eig.eigenvectors.adjoint();
    debug_assert_eq!(out.nrows(), n);
    out
}

/// `exp(−i Σ h_{l,l'} a_l ⊗ b_l')`.
pub fn matrix_exp_hermitian_generator(
    h: &[f64],
    basis_a: &GeneratorBasis,
    basis_b: &GeneratorBasis,
) -> Result<ComplexMatrix> {
    let gen = hermitian_generator(h, basis_a, basis_b)?;
    Ok(exp_minus_i_hermitian(&gen))
}

/// Hermitian `H` with `exp(−i H) = w` and spectrum in `(−π, π]`, from the
/// (diagonal) Schur form of the unitary `w`.
pub fn log_unitary(w: &ComplexMatrix) -> Result<ComplexMatrix> {
    let (rows, cols) = w.shape();
    let schur = w
        .clone()
        .try_schur(1e-15, 10_000)
        .ok_or(Error::SvdFailed { rows, cols })?;
    let (q, t) = schur.unpack();
    let mut scaled = q.clone();
    for j in 0..rows {
        {
            let mut col = scaled.column_mut(j);
            col *= Complex64::new(-t[(j, j)].arg(), 0.0);
        }
    }
    let h = scaled * q.adjoint();
    Ok((&h + h.adjoint()) * Complex64::new(0.5, 0.0))
}

/// Real coordinates of a Hermitian `h` in the product basis `a_l ⊗ b_l'`,
/// the inverse of [`hermitian_generator`].
pub fn generator_coordinates(
    h: &ComplexMatrix,
    basis_a: &GeneratorBasis,
    basis_b: &GeneratorBasis,
) -> Vec<f64> {
    let mut out = Vec::with_capacity(basis_a.len() * basis_b.len());
    for a in basis_a.elements() {
        for b in basis_b.elements() {
            let g = kron(a, b);
            out.push(trace_inner(&g, h).re / frobenius_norm_sq(&g));
        }
    }
    out
}

/// Haar-distributed unitary from the QR decomposition of a complex Gaussian
/// matrix, with the phases of `R`'s diagonal folded back into `Q`.
pub fn haar_random_unitary(dim: usize, seed: u64) -> ComplexMatrix {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    haar_random_unitary_with(dim, &mut rng)
}

pub fn haar_random_unitary_with<R: rand::Rng + ?Sized>(dim: usize, rng: &mut R) -> ComplexMatrix {
    assert!(dim >= 1, "unitary dimension must be positive");
    let scale = std::f64::consts::FRAC_1_SQRT_2;
    let g = ComplexMatrix::from_fn(dim, dim, |_, _| {
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        Complex64::new(re * scale, im * scale)
    });
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..dim {
        let rjj = r[(j, j)];
        let norm = rjj.norm();
        let phase = if norm > 0.0 { rjj / norm } else { ONE };
        {
            let mut col = q.column_mut(j);
            col *= phase;
        }
    }
    q
}

/// Matrix from nested `[re, im]` rows.
pub fn matrix_from_pairs(rows: &[Vec<[f64; 2]>]) -> Result<ComplexMatrix> {
    let nrows = rows.len();
    if nrows == 0 {
        return Err(Error::Invalid("empty matrix".into()));
    }
    let ncols = rows[0].len();
    if ncols == 0 || rows.iter().any(|r| r.len() != ncols) {
        return Err(Error::Invalid("ragged or empty matrix rows".into()));
    }
    let m = ComplexMatrix::from_fn(nrows, ncols, |i, j| {
        let [re, im] = rows[i][j];
        Complex64::new(re, im)
    });
    ensure_finite(&m, "matrix entries")?;
    Ok(m)
}

pub fn matrix_to_pairs(m: &ComplexMatrix) -> Vec<Vec<[f64; 2]>> {
    (0..m.nrows())
        .map(|i| {
            (0..m.ncols())
                .map(|j| [m[(i, j)].re, m[(i, j)].im])
                .collect()
        })
        .collect()
}

pub fn vector_from_pairs(v: &[[f64; 2]]) -> Result<ComplexVector> {
    let out =
        ComplexVector::from_iterator(v.len(), v.iter().map(|&[re, im]| Complex64::new(re, im)));
    if out.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::NonFinite("vector entries".into()));
    }
    Ok(out)
}

pub fn vector_to_pairs(v: &ComplexVector) -> Vec<[f64; 2]> {
    v.iter().map(|z| [z.re, z.im]).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn diag(entries: &[Complex64]) -> ComplexMatrix {
        ComplexMatrix::from_diagonal(&ComplexVector::from_column_slice(entries))
    }

    fn max_abs_diff(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
        (a - b).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    #[test]
    fn svd_identity() {
        let s = svd(&identity(4)).unwrap();
        assert_eq!(s.s.len(), 4);
        for x in &s.s {
            assert!((x - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn svd_diagonal_with_zero() {
        let m = diag(&[c(3.0, 0.0), ZERO]);
        let s = svd(&m).unwrap();
        assert!((s.s[0] - 3.0).abs() < 1e-14 && s.s[1].abs() < 1e-14);
        assert!(max_abs_diff(&s.reconstruct(), &m) < 1e-14);
        // columns of U and V are signed unit vectors
        for j in 0..2 {
            let uj: f64 = s.u.column(j).iter().map(|z| z.norm()).fold(0.0, f64::max);
            assert!((uj - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn svd_reconstructs_random() {
        let m = haar_random_unitary(6, 3) * c(0.4, 0.0) + haar_random_unitary(6, 4);
        let s = svd(&m).unwrap();
        let err = frobenius_norm_sq(&(s.reconstruct() - &m)).sqrt() / frobenius_norm_sq(&m).sqrt();
        assert!(err < 1e-12, "{err}");
        assert!(s.s.windows(2).all(|w| w[0] >= w[1]));
        assert!(isometry_defect(&s.u) < 1e-12 && isometry_defect(&s.v) < 1e-12);
    }

    #[test]
    fn svd_rejects_nan() {
        let mut m = identity(2);
        m[(0, 1)] = c(f64::NAN, 0.0);
        assert!(svd(&m).is_err());
    }

    #[test]
    fn haar_unitary_has_unit_singular_values() {
        let u = haar_random_unitary(8, 11);
        assert!(is_unitary(&u, 1e-12));
        for x in singular_values(&u).unwrap() {
            assert!((x - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn haar_dim_one_is_phase() {
        let u = haar_random_unitary(1, 5);
        assert!((u[(0, 0)].norm() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn haar_is_deterministic() {
        let a = haar_random_unitary(5, 42);
        let b = haar_random_unitary(5, 42);
        assert_eq!(a, b);
        assert_ne!(a, haar_random_unitary(5, 43));
    }

    #[test]
    fn spectral_norm_cases() {
        assert!((spectral_norm(&haar_random_unitary(4, 1)).unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(spectral_norm(&ComplexMatrix::zeros(3, 3)).unwrap(), 0.0);
        let m = diag(&[c(2.0, 0.0), c(-5.0, 0.0)]);
        assert!((spectral_norm(&m).unwrap() - 5.0).abs() < 1e-14);
    }

    #[test]
    fn spectral_norm_matches_dense_unit_vector_scan() {
        // brute force max ‖Ax‖/‖x‖ over a dense grid of real unit vectors;
        // diag(2,−5) is real so the maximum is attained on real vectors
        let m = diag(&[c(2.0, 0.0), c(-5.0, 0.0)]);
        let mut best: f64 = 0.0;
        for step in 0..100_000 {
            let t = 2.0 * PI * step as f64 / 100_000.0;
            let x = ComplexVector::from_column_slice(&[c(t.cos(), 0.0), c(t.sin(), 0.0)]);
            best = best.max((&m * x).norm());
        }
        assert!((best - 5.0).abs() < 1e-8);
        assert!((spectral_norm(&m).unwrap() - best).abs() < 1e-8);
    }

    #[test]
    fn frobenius_cases() {
        assert_eq!(frobenius_norm_sq(&identity(8)), 8.0);
        assert_eq!(frobenius_norm_sq(&diag(&[ONE, c(0.0, 2.0)])), 5.0);
    }

    #[test]
    fn gell_mann_pauli() {
        let b = generalized_gell_mann(2).unwrap();
        let e = b.elements();
        assert_eq!(e.len(), 4);
        assert_eq!(e[0], identity(2));
        assert_eq!(
            e[1],
            ComplexMatrix::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO])
        );
        assert_eq!(
            e[2],
            ComplexMatrix::from_row_slice(2, 2, &[ZERO, -I, I, ZERO])
        );
        assert_eq!(e[3], diag(&[ONE, -ONE]));
    }

    #[test]
    fn gell_mann_orthogonality() {
        for d in 2..=5 {
            let b = generalized_gell_mann(d).unwrap();
            assert_eq!(b.len(), d * d);
            for (i, gi) in b.elements().iter().enumerate() {
                assert!(max_abs_diff(gi, &gi.adjoint()) < 1e-15);
                if i > 0 {
                    assert!(gi.trace().norm() < 1e-12);
                }
                for (j, gj) in b.elements().iter().enumerate() {
                    let t = (gi * gj).trace();
                    if i != j {
                        assert!(t.norm() < 1e-12, "d={d} ({i},{j}) {t}");
                    } else if i > 0 {
                        assert!((t.re - 2.0).abs() < 1e-12);
                    }
                }
            }
        }
        assert_eq!(generalized_gell_mann(3).unwrap().elements()[1..].len(), 8);
        assert_eq!(generalized_gell_mann(4).unwrap().len(), 16);
        assert!(generalized_gell_mann(1).is_err());
    }

    #[test]
    fn exp_zero_and_global_phase() {
        let p = generalized_gell_mann(2).unwrap();
        let w = matrix_exp_hermitian_generator(&[0.0; 16], &p, &p).unwrap();
        assert!(max_abs_diff(&w, &identity(4)) < 1e-15);

        let mut h = [0.0; 16];
        h[0] = PI;
        let w = matrix_exp_hermitian_generator(&h, &p, &p).unwrap();
        assert!(max_abs_diff(&w, &(-identity(4))) < 1e-14);
    }

    #[test]
    fn exp_pauli_x_matches_closed_form_and_pade() {
        let p = generalized_gell_mann(2).unwrap();
        let mut h = [0.0; 16];
        h[4] = PI / 2.0; // (l=1, l'=0)
        let w = matrix_exp_hermitian_generator(&h, &p, &p).unwrap();
        let expected = kron(&p.elements()[1], &identity(2)) * (-I);
        assert!(max_abs_diff(&w, &expected) < 1e-14);
        // independent route: nalgebra's scaling-and-squaring Padé exponential
        let gen = hermitian_generator(&h, &p, &p).unwrap() * (-I);
        assert!(max_abs_diff(&w, &gen.exp()) < 1e-12);
    }

    #[test]
    fn exp_length_mismatch() {
        let p = generalized_gell_mann(2).unwrap();
        assert!(matrix_exp_hermitian_generator(&[0.0; 3], &p, &p).is_err());
    }

    #[test]
    fn log_unitary_inverts_exp() {
        let p = generalized_gell_mann(2).unwrap();
        let t = generalized_gell_mann(3).unwrap();
        for seed in 0..5 {
            let w = haar_random_unitary(6, seed);
            let h = log_unitary(&w).unwrap();
            assert!(max_abs_diff(&exp_minus_i_hermitian(&h), &w) < 1e-11);
            let coords = generator_coordinates(&h, &p, &t);
            let back = matrix_exp_hermitian_generator(&coords, &p, &t).unwrap();
            assert!(max_abs_diff(&back, &w) < 1e-10);
        }
    }

    #[test]
    fn pairs_roundtrip() {
        let m = haar_random_unitary(3, 9);
        assert_eq!(matrix_from_pairs(&matrix_to_pairs(&m)).unwrap(), m);
        assert!(matrix_from_pairs(&[vec![[0.0, 0.0]], vec![]]).is_err());
    }
}
