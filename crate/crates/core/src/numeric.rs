//! Dense complex linear algebra helpers: tolerances, numeric rank, kernels,
//! and subspaces that are orthonormal with respect to a Hermitian gram form.

use nalgebra::{DMatrix, DVector, Matrix2, Vector2};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type CMat = DMatrix<C64>;
pub type CVec = DVector<C64>;
pub type M2 = Matrix2<C64>;
pub type V2 = Vector2<C64>;
pub type RM2 = Matrix2<f64>;

pub const I: C64 = C64::new(0.0, 1.0);

pub fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

/// The symplectic unit `J = [[0, -1], [1, 0]]`.
pub fn jmat() -> M2 {
    M2::new(c(0.0), c(-1.0), c(1.0), c(0.0))
}

pub fn to_complex(m: &RM2) -> M2 {
    m.map(c)
}

/// Numerical tolerances shared by all modules.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub rank_rel: f64,
    pub residual_abs: f64,
    pub quad_abs: f64,
    pub root_abs: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            rank_rel: 1e-9,
            residual_abs: 1e-8,
            quad_abs: 1e-10,
            root_abs: 1e-10,
        }
    }
}

impl Tolerances {
    /// Defaults overridden by `MDS_TOL_RANK` and `MDS_TOL_RESID` when set.
    pub fn from_env() -> Self {
        let mut t = Tolerances::default();
        if let Some(v) = env_f64("MDS_TOL_RANK") {
            t.rank_rel = v;
        }
        if let Some(v) = env_f64("MDS_TOL_RESID") {
            t.residual_abs = v;
        }
        t
    }

    /// Singular values at or below this cutoff count as zero.
    pub fn rank_cutoff(&self, sigma_max: f64) -> f64 {
        self.rank_rel * sigma_max.max(1.0)
    }
}

fn env_f64(key: &str) -> Option<f64> {
    std::env::var(key)
        .ok()
        .and_then(|s| s.trim().parse::<f64>().ok())
        .filter(|v| v.is_finite() && *v > 0.0)
}

fn check_finite(m: &CMat) -> Result<()> {
    if m.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        Ok(())
    } else {
        Err(Error::InvalidInput("matrix has non-finite entries".into()))
    }
}

/// Full SVD data: singular values (descending) with complete singular bases.
struct FullSvd {
    sigma: Vec<f64>,
    /// Right singular vectors as columns, `cols x cols`.
    v: CMat,
    /// Left singular vectors as columns, `rows x rows`.
    u: CMat,
}

fn to_faer(m: &CMat) -> faer::Mat<C64> {
    faer::Mat::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
}

fn full_svd(m: &CMat) -> FullSvd {
    let (rows, cols) = m.shape();
    let svd = to_faer(m).svd().expect("svd did not converge");
    let sigma = (0..rows.min(cols)).map(|k| svd.S()[k].re).collect();
    let u = CMat::from_fn(rows, rows, |i, j| svd.U()[(i, j)]);
    let v = CMat::from_fn(cols, cols, |i, j| svd.V()[(i, j)]);
    FullSvd { sigma, v, u }
}

/// Eigenvalues of a general square matrix, unordered.
pub fn eigenvalues(m: &CMat) -> Vec<C64> {
    if m.nrows() == 0 {
        return Vec::new();
    }
    to_faer(m).eigenvalues().expect("eigenvalues did not converge")
}

/// Eigenvalues (ascending) and orthonormal eigenvectors of the Hermitian part of `m`.
pub fn hermitian_eigen(m: &CMat) -> (Vec<f64>, CMat) {
    let n = m.nrows();
    if n == 0 {
        return (Vec::new(), CMat::zeros(0, 0));
    }
    let h = (m + m.adjoint()) * c(0.5);
    let e = to_faer(&h)
        .self_adjoint_eigen(faer::Side::Lower)
        .expect("eigendecomposition did not converge");
    let vals = (0..n).map(|k| e.S()[k].re).collect();
    (vals, CMat::from_fn(n, n, |i, j| e.U()[(i, j)]))
}

pub fn singular_values(m: &CMat) -> Vec<f64> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Vec::new();
    }
    full_svd(m).sigma
}

pub fn numeric_rank(m: &CMat, tol: &Tolerances) -> Result<usize> {
    check_finite(m)?;
    if m.nrows() == 0 || m.ncols() == 0 {
        return Ok(0);
    }
    let s = full_svd(m).sigma;
    let cut = tol.rank_cutoff(s[0]);
    Ok(s.iter().filter(|&&x| x > cut).count())
}

/// Orthonormal basis of the numerical kernel, as columns.
pub fn kernel_basis(m: &CMat, tol: &Tolerances) -> Result<CMat> {
    check_finite(m)?;
    let cols = m.ncols();
    if m.nrows() == 0 || cols == 0 {
        return Ok(CMat::identity(cols, cols));
    }
    let svd = full_svd(m);
    let cut = tol.rank_cutoff(svd.sigma[0]);
    let rank = svd.sigma.iter().filter(|&&x| x > cut).count();
    Ok(svd.v.columns(rank, cols - rank).into_owned())
}

/// Orthonormal basis of the numerical column space.
pub fn range_basis(m: &CMat, tol: &Tolerances) -> Result<CMat> {
    check_finite(m)?;
    if m.nrows() == 0 || m.ncols() == 0 {
        return Ok(CMat::zeros(m.nrows(), 0));
    }
    let svd = full_svd(m);
    let cut = tol.rank_cutoff(svd.sigma[0]);
    let rank = svd.sigma.iter().filter(|&&x| x > cut).count();
    Ok(svd.u.columns(0, rank).into_owned())
}

/// Minimum-norm least-squares solution of `m x = b` and its residual norm.
pub fn least_squares(m: &CMat, b: &CVec, tol: &Tolerances) -> (CVec, f64) {
    let cols = m.ncols();
    if m.nrows() == 0 || cols == 0 {
        return (CVec::zeros(cols), b.norm());
    }
    let svd = full_svd(m);
    let cut = tol.rank_cutoff(svd.sigma[0]);
    let mut x = CVec::zeros(cols);
    for (k, &s) in svd.sigma.iter().enumerate() {
        if s > cut {
            let coef = svd.u.column(k).dotc(b) / s;
            x += svd.v.column(k) * coef;
        }
    }
    let r = (m * &x - b).norm();
    (x, r)
}

/// Hermitian positive definite gram form, stored with its Cholesky factor.
#[derive(Debug, Clone, PartialEq)]
pub struct Gram {
    pub matrix: CMat,
    /// Lower factor `L` with `G = L L*`.
    lower: CMat,
    lower_adj_inv: CMat,
}

impl Gram {
    pub fn identity(n: usize) -> Gram {
        Gram {
            matrix: CMat::identity(n, n),
            lower: CMat::identity(n, n),
            lower_adj_inv: CMat::identity(n, n),
        }
    }

    pub fn new(matrix: CMat) -> Result<Gram> {
        check_finite(&matrix)?;
        let n = matrix.nrows();
        if matrix.ncols() != n {
            return Err(Error::InvalidInput("gram matrix is not square".into()));
        }
        let herm = (&matrix - matrix.adjoint()).norm();
        if herm > 1e-10 * matrix.norm().max(1.0) {
            return Err(Error::InvalidInput("gram matrix is not Hermitian".into()));
        }
        let (ev, _) = hermitian_eigen(&matrix);
        if ev.iter().any(|&l| l <= 0.0) {
            return Err(Error::InvalidInput("gram matrix is not positive definite".into()));
        }
        let chol = matrix
            .clone()
            .cholesky()
            .ok_or_else(|| Error::InvalidInput("gram matrix is not positive definite".into()))?;
        let lower = chol.l();
        let lower_adj_inv = lower
            .adjoint()
            .try_inverse()
            .ok_or_else(|| Error::InvalidInput("gram matrix is not positive definite".into()))?;
        Ok(Gram {
            matrix,
            lower,
            lower_adj_inv,
        })
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// Coordinates in which the form becomes the Euclidean inner product.
    pub fn to_euclid(&self, m: &CMat) -> CMat {
        self.lower.adjoint() * m
    }

    pub fn from_euclid(&self, m: &CMat) -> CMat {
        &self.lower_adj_inv * m
    }

    pub fn inner(&self, x: &CVec, y: &CVec) -> C64 {
        (x.adjoint() * &self.matrix * y)[(0, 0)]
    }

    /// Block-diagonal gram `diag(G, G)`.
    pub fn doubled(&self) -> Gram {
        let n = self.dim();
        let mut m = CMat::zeros(2 * n, 2 * n);
        m.view_mut((0, 0), (n, n)).copy_from(&self.matrix);
        m.view_mut((n, n), (n, n)).copy_from(&self.matrix);
        let mut l = CMat::zeros(2 * n, 2 * n);
        l.view_mut((0, 0), (n, n)).copy_from(&self.lower);
        l.view_mut((n, n), (n, n)).copy_from(&self.lower);
        let mut li = CMat::zeros(2 * n, 2 * n);
        li.view_mut((0, 0), (n, n)).copy_from(&self.lower_adj_inv);
        li.view_mut((n, n), (n, n)).copy_from(&self.lower_adj_inv);
        Gram {
            matrix: m,
            lower: l,
            lower_adj_inv: li,
        }
    }
}

/// Subspace of `C^n`; `basis` columns are orthonormal under the gram it was built with.
#[derive(Debug, Clone, PartialEq)]
pub struct Subspace {
    pub ambient: usize,
    pub basis: CMat,
}

impl Subspace {
    pub fn zero(ambient: usize) -> Subspace {
        Subspace {
            ambient,
            basis: CMat::zeros(ambient, 0),
        }
    }

    pub fn full(ambient: usize, gram: &Gram) -> Subspace {
        Subspace {
            ambient,
            basis: gram.from_euclid(&CMat::identity(ambient, ambient)),
        }
    }

    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }

    /// Span of the columns of `vectors`.
    pub fn span(vectors: &CMat, gram: &Gram, tol: &Tolerances) -> Result<Subspace> {
        let n = vectors.nrows();
        if n != gram.dim() {
            return Err(Error::InvalidInput(format!(
                "vectors of length {n} do not match gram of size {}",
                gram.dim()
            )));
        }
        let e = gram.to_euclid(vectors);
        let r = range_basis(&e, tol)?;
        Ok(Subspace {
            ambient: n,
            basis: gram.from_euclid(&r),
        })
    }

    /// Orthogonal projection of `v` onto the subspace.
    pub fn project(&self, v: &CMat, gram: &Gram) -> CMat {
        let coeffs = self.basis.adjoint() * &gram.matrix * v;
        &self.basis * coeffs
    }

    /// Largest distance of a column of `v` from the subspace.
    pub fn distance(&self, v: &CMat, gram: &Gram) -> f64 {
        let r = v - self.project(v, gram);
        let e = gram.to_euclid(&r);
        (0..e.ncols())
            .map(|k| e.column(k).norm())
            .fold(0.0, f64::max)
    }

    pub fn contains(&self, v: &CMat, gram: &Gram, tol: &Tolerances) -> bool {
        let scale = gram
            .to_euclid(v)
            .column_iter()
            .map(|c| c.norm())
            .fold(0.0, f64::max)
            .max(1.0);
        self.distance(v, gram) <= tol.residual_abs * scale
    }

    pub fn sum(&self, other: &Subspace, gram: &Gram, tol: &Tolerances) -> Result<Subspace> {
        check_ambient(self, other)?;
        let mut m = CMat::zeros(self.ambient, self.dim() + other.dim());
        m.view_mut((0, 0), (self.ambient, self.dim()))
            .copy_from(&self.basis);
        m.view_mut((0, self.dim()), (self.ambient, other.dim()))
            .copy_from(&other.basis);
        Subspace::span(&m, gram, tol)
    }

    pub fn intersection(
        &self,
        other: &Subspace,
        gram: &Gram,
        tol: &Tolerances,
    ) -> Result<Subspace> {
        check_ambient(self, other)?;
        let (k1, k2) = (self.dim(), other.dim());
        if k1 == 0 || k2 == 0 {
            return Ok(Subspace::zero(self.ambient));
        }
        let e1 = gram.to_euclid(&self.basis);
        let e2 = gram.to_euclid(&other.basis);
        let mut m = CMat::zeros(self.ambient, k1 + k2);
        m.view_mut((0, 0), (self.ambient, k1)).copy_from(&e1);
        m.view_mut((0, k1), (self.ambient, k2)).copy_from(&(-e2));
        let ker = kernel_basis(&m, tol)?;
        let vecs = &self.basis * ker.rows(0, k1);
        Subspace::span(&vecs, gram, tol)
    }
}

fn check_ambient(a: &Subspace, b: &Subspace) -> Result<()> {
    if a.ambient != b.ambient {
        return Err(Error::InvalidInput(format!(
            "ambient dimension mismatch: {} vs {}",
            a.ambient, b.ambient
        )));
    }
    Ok(())
}

pub fn ortho_complement(s: &Subspace, gram: &Gram, tol: &Tolerances) -> Result<Subspace> {
    if s.ambient != gram.dim() {
        return Err(Error::InvalidInput("gram does not match subspace".into()));
    }
    if s.dim() == 0 {
        return Ok(Subspace::full(s.ambient, gram));
    }
    let e = gram.to_euclid(&s.basis);
    let ker = kernel_basis(&e.adjoint(), tol)?;
    Ok(Subspace {
        ambient: s.ambient,
        basis: gram.from_euclid(&ker),
    })
}

pub fn subspace_equal(a: &Subspace, b: &Subspace, gram: &Gram, tol: &Tolerances) -> Result<bool> {
    check_ambient(a, b)?;
    Ok(subspace_distance(a, b, gram)? <= tol.residual_abs)
}

/// Largest distance between unit vectors of one subspace and the other, or
/// infinity when the dimensions differ.
pub fn subspace_distance(a: &Subspace, b: &Subspace, gram: &Gram) -> Result<f64> {
    check_ambient(a, b)?;
    if a.dim() != b.dim() {
        return Ok(f64::INFINITY);
    }
    Ok(a.distance(&b.basis, gram).max(b.distance(&a.basis, gram)))
}

/// Solution set `offset + direction` of a linear system, or infeasible.
#[derive(Debug, Clone, PartialEq)]
pub struct AffineSet {
    pub offset: CVec,
    pub direction: CMat,
    pub feasible: bool,
}

/// Solution set of `m x = b`.
pub fn solve_affine(m: &CMat, b: &CVec, tol: &Tolerances) -> Result<AffineSet> {
    check_finite(m)?;
    let (x, r) = least_squares(m, b, tol);
    let scale = 1.0 + m.norm() * x.norm() + b.norm();
    Ok(AffineSet {
        offset: x,
        direction: kernel_basis(m, tol)?,
        feasible: r <= tol.residual_abs * scale,
    })
}

pub fn m2_to_dyn(m: &M2) -> CMat {
    CMat::from_fn(2, 2, |i, j| m[(i, j)])
}

pub fn v2_to_dyn(v: &V2) -> CVec {
    CVec::from_fn(2, |i, _| v[i])
}

pub fn dyn_to_v2(v: &CVec) -> V2 {
    V2::new(v[0], v[1])
}

/// Spectral norm of a 2x2 matrix.
pub fn norm2(m: &M2) -> f64 {
    singular_values(&m2_to_dyn(m)).first().copied().unwrap_or(0.0)
}

pub fn rnorm2(m: &RM2) -> f64 {
    norm2(&to_complex(m))
}

/// Hermitian square root of a positive semidefinite real 2x2 matrix, keeping only
/// the positive eigendirections: rows `sqrt(s_k) v_k^T` for eigenpairs with `s_k > cut`.
pub fn psd_root_rows(m: &RM2, tol: &Tolerances) -> Vec<[f64; 2]> {
    let eig = m.symmetric_eigen();
    let smax = eig.eigenvalues.iter().cloned().fold(0.0, f64::max);
    let cut = tol.rank_cutoff(smax);
    let mut rows = Vec::new();
    for k in 0..2 {
        let s = eig.eigenvalues[k];
        if s > cut {
            let v = eig.eigenvectors.column(k);
            rows.push([s.sqrt() * v[0], s.sqrt() * v[1]]);
        }
    }
    rows
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rm(rows: &[&[f64]]) -> CMat {
        CMat::from_fn(rows.len(), rows[0].len(), |i, j| c(rows[i][j]))
    }

    #[test]
    fn rank_examples() {
        let t = Tolerances::default();
        assert_eq!(numeric_rank(&CMat::identity(2, 2), &t).unwrap(), 2);
        assert_eq!(numeric_rank(&rm(&[&[0.0, 0.0], &[2.0, 0.0]]), &t).unwrap(), 1);
        assert_eq!(numeric_rank(&CMat::zeros(2, 2), &t).unwrap(), 0);
        let mut bad = CMat::identity(2, 2);
        bad[(0, 1)] = c(f64::NAN);
        assert!(matches!(numeric_rank(&bad, &t), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn kernel_of_nilpotent() {
        let t = Tolerances::default();
        let k = kernel_basis(&rm(&[&[0.0, 0.0], &[2.0, 0.0]]), &t).unwrap();
        assert_eq!(k.ncols(), 1);
        assert!(k[(0, 0)].norm() < 1e-14);
        assert!((k[(1, 0)].norm() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn kernel_of_wide_matrix() {
        let t = Tolerances::default();
        let m = rm(&[&[1.0, 1.0, 0.0]]);
        let k = kernel_basis(&m, &t).unwrap();
        assert_eq!(k.ncols(), 2);
        assert!((&m * &k).norm() < 1e-14);
    }

    #[test]
    fn complement_example() {
        let t = Tolerances::default();
        let g = Gram::identity(2);
        let s = Subspace::span(&rm(&[&[1.0], &[1.0]]), &g, &t).unwrap();
        let comp = ortho_complement(&s, &g, &t).unwrap();
        let expected = Subspace::span(&rm(&[&[1.0], &[-1.0]]), &g, &t).unwrap();
        assert!(subspace_equal(&comp, &expected, &g, &t).unwrap());
    }

    #[test]
    fn non_pd_gram_rejected() {
        assert!(matches!(
            Gram::new(rm(&[&[1.0, 0.0], &[0.0, -1.0]])),
            Err(Error::InvalidInput(_))
        ));
    }

    #[test]
    fn ambient_mismatch_rejected() {
        let t = Tolerances::default();
        let a = Subspace::zero(2);
        let b = Subspace::zero(3);
        assert!(subspace_equal(&a, &b, &Gram::identity(2), &t).is_err());
    }

    #[test]
    fn intersection_and_sum() {
        let t = Tolerances::default();
        let g = Gram::identity(3);
        let a = Subspace::span(&rm(&[&[1.0, 0.0], &[0.0, 1.0], &[0.0, 0.0]]), &g, &t).unwrap();
        let b = Subspace::span(&rm(&[&[0.0, 0.0], &[1.0, 0.0], &[0.0, 1.0]]), &g, &t).unwrap();
        let i = a.intersection(&b, &g, &t).unwrap();
        assert_eq!(i.dim(), 1);
        assert!(i.contains(&rm(&[&[0.0], &[1.0], &[0.0]]), &g, &t));
        assert_eq!(a.sum(&b, &g, &t).unwrap().dim(), 3);
    }

    #[test]
    fn weighted_complement() {
        let t = Tolerances::default();
        let g = Gram::new(rm(&[&[2.0, 0.0], &[0.0, 1.0]])).unwrap();
        let s = Subspace::span(&rm(&[&[1.0], &[1.0]]), &g, &t).unwrap();
        let comp = ortho_complement(&s, &g, &t).unwrap();
        let ip = (s.basis.adjoint() * &g.matrix * &comp.basis)[(0, 0)];
        assert!(ip.norm() < 1e-14);
        let n = (comp.basis.adjoint() * &g.matrix * &comp.basis)[(0, 0)];
        assert!((n.re - 1.0).abs() < 1e-13);
    }

    #[test]
    fn affine_solutions() {
        let t = Tolerances::default();
        let m = rm(&[&[0.0, 0.0], &[2.0, 0.0]]);
        let ok = solve_affine(&m, &CVec::from_vec(vec![c(0.0), c(4.0)]), &t).unwrap();
        assert!(ok.feasible);
        assert!((ok.offset[0] - c(2.0)).norm() < 1e-13);
        assert_eq!(ok.direction.ncols(), 1);
        let bad = solve_affine(&m, &CVec::from_vec(vec![c(1.0), c(0.0)]), &t).unwrap();
        assert!(!bad.feasible);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn cmat(rows: usize, cols: usize) -> impl Strategy<Value = CMat> {
            proptest::collection::vec((-3.0f64..3.0, -3.0f64..3.0), rows * cols)
                .prop_map(move |v| CMat::from_fn(rows, cols, |i, j| {
                    let (a, b) = v[i * cols + j];
                    C64::new(a, b)
                }))
        }

        fn low_rank() -> impl Strategy<Value = CMat> {
            (1usize..5, 1usize..5, 0usize..4).prop_flat_map(|(r, cdim, k)| {
                (cmat(r, k.max(1)), cmat(k.max(1), cdim), Just(k))
                    .prop_map(|(a, b, k)| if k == 0 { CMat::zeros(a.nrows(), b.ncols()) } else { a * b })
            })
        }

        proptest! {
            #[test]
            fn rank_plus_nullity(m in low_rank()) {
                let t = Tolerances::default();
                let r = numeric_rank(&m, &t).unwrap();
                let k = kernel_basis(&m, &t).unwrap();
                prop_assert_eq!(r + k.ncols(), m.ncols());
                prop_assert!((&m * &k).norm() <= t.residual_abs * m.norm().max(1.0));
            }

            #[test]
            fn range_contains_columns(m in low_rank()) {
                let t = Tolerances::default();
                let r = range_basis(&m, &t).unwrap();
                prop_assert_eq!(r.ncols(), numeric_rank(&m, &t).unwrap());
                let resid = &m - &r * (r.adjoint() * &m);
                prop_assert!(resid.norm() <= 1e-9 * m.norm().max(1.0), "residual {}", resid.norm());
            }

            #[test]
            fn complement_is_involution(m in cmat(4, 2)) {
                let t = Tolerances::default();
                let g = Gram::identity(4);
                let s = Subspace::span(&m, &g, &t).unwrap();
                let cc = ortho_complement(&ortho_complement(&s, &g, &t).unwrap(), &g, &t).unwrap();
                prop_assert!(subspace_equal(&s, &cc, &g, &t).unwrap());
            }
        }
    }
}
