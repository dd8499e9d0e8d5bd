//! Eigenvalues of self-adjoint extensions via characteristic functions of
//! boundary data.

use crate::boundary::{BCMatrix, QuasiMap};
use crate::classification::{compute_l0, solution_family};
use crate::error::{Error, Result};
use crate::numeric::{
    c, eigenvalues, hermitian_eigen, jmat, kernel_basis, least_squares, range_basis, CMat, CVec, Tolerances, C64, V2,
};
use crate::problem::{atom_jumps, really_bad_atoms, spectrum_of_atom, Problem, RootSet};
use crate::propagation::{fundamental_matrix, PiecewiseFunction, Side};
use crate::relations::{build_atomic, is_self_adjoint, LinearRelation};

/// A restriction of the maximal relation.
#[derive(Debug, Clone, PartialEq)]
pub enum Extension {
    /// Rows acting on the actual boundary values `(u(a), u(b))`.
    Conditions(CMat),
    Maximal,
    /// `u(a) = 0 = u(b)` for some representative.
    Minimal,
}

impl Extension {
    pub fn from_bc(bc: &BCMatrix, frame: &dyn QuasiMap) -> Extension {
        Extension::Conditions(bc.full_rows() * frame.trace_matrix())
    }

    pub fn rows(&self) -> CMat {
        match self {
            Extension::Conditions(r) => r.clone(),
            Extension::Maximal => CMat::zeros(0, 4),
            Extension::Minimal => CMat::identity(4, 4),
        }
    }

    /// The extension as a relation on a purely atomic problem.
    pub fn relation(&self, p: &Problem, tol: &Tolerances) -> Result<LinearRelation> {
        let am = build_atomic(p, tol)?;
        match self {
            Extension::Maximal => Ok(am.t_max),
            Extension::Minimal => Ok(am.t_min),
            Extension::Conditions(r) => am.restrict_by_traces(r, tol),
        }
    }
}

fn traces(u: &PiecewiseFunction) -> [V2; 2] {
    [u.trace(u.a(), Side::Plus), u.trace(u.b(), Side::Minus)]
}

/// Product of `det B_+(x_k, lambda)` over all atoms.
pub fn atom_det_product(p: &Problem, lambda: C64) -> C64 {
    p.atoms
        .iter()
        .map(|t| atom_jumps(&t.dq, &t.dw, lambda).1.determinant())
        .product()
}

/// Evaluation data for `d(lambda)`, fixed once per problem and extension.
#[derive(Debug, Clone, PartialEq)]
pub struct CharFunction {
    /// Independent conditions left after removing the zero-norm redundancy.
    pub rows: CMat,
    /// Coefficients, in the fundamental system with `U(a) = J`, spanning a
    /// complement of the zero-norm solutions.
    pub complement: CMat,
}

impl CharFunction {
    pub fn new(p: &Problem, ext: &Extension, tol: &Tolerances) -> Result<CharFunction> {
        let Extension::Conditions(r) = ext else {
            return Err(Error::InvalidInput("characteristic function needs boundary conditions".into()));
        };
        if !really_bad_atoms(p, tol).is_empty() {
            return Err(Error::InvalidInput("characteristic function cannot cross a really bad point".into()));
        }
        let l0 = compute_l0(p, tol)?;
        let j = jmat();
        let (rows, complement) = match l0.dim() {
            0 => (r.clone(), CMat::identity(2, 2)),
            1 => {
                let [pa, pb] = traces(&l0.elements[0]);
                let na = (pa.adjoint() * j) * c(-1.0);
                let nb = pb.adjoint() * j;
                let n = CMat::from_row_slice(1, 4, &[na[0], na[1], nb[0], nb[1]]);
                let nn = (&n * n.adjoint())[(0, 0)];
                let proj = CMat::identity(4, 4) - n.adjoint() * &n / nn;
                let l = (j * pa) * c(-1.0);
                let l = l / c(l.norm());
                (r * proj, CMat::from_column_slice(2, 1, &[-l[1].conj(), l[0].conj()]))
            }
            _ => (CMat::zeros(0, 4), CMat::zeros(2, 0)),
        };
        let basis = range_basis(&rows.adjoint(), tol)?;
        if basis.ncols() != complement.ncols() {
            return Err(Error::InvalidInput(format!(
                "boundary condition imposes {} independent conditions, {} expected",
                basis.ncols(),
                complement.ncols()
            )));
        }
        Ok(CharFunction { rows: basis.adjoint(), complement })
    }

    /// `det B_+` product times `det(rows [U(a); U(b)] complement)`.
    pub fn eval(&self, p: &Problem, lambda: C64, tol: &Tolerances) -> Result<C64> {
        let fm = fundamental_matrix(p, lambda, p.a, &jmat(), tol)?;
        let mut s = CMat::zeros(4, 2);
        for (k, col) in fm.columns.iter().enumerate() {
            let [ua, ub] = traces(col);
            for i in 0..2 {
                s[(i, k)] = ua[i];
                s[(2 + i, k)] = ub[i];
            }
        }
        let m = &self.rows * s * &self.complement;
        Ok(m.determinant() * atom_det_product(p, lambda))
    }
}

/// `d(lambda)`; `Blocked` when `lambda` is singular at some atom.
pub fn char_function(p: &Problem, ext: &Extension, lambda: C64, tol: &Tolerances) -> Result<C64> {
    CharFunction::new(p, ext, tol)?.eval(p, lambda, tol)
}

/// Eigenfunctions at `lambda` satisfying the extension, orthonormal in the
/// w-inner product, with zero-norm solutions factored out.
pub fn eigenspace(p: &Problem, ext: &Extension, lambda: f64, tol: &Tolerances) -> Result<Vec<PiecewiseFunction>> {
    let fam = solution_family(p, c(lambda), tol)?;
    let k = fam.dim();
    let g = fam.norm_gram(p, tol);
    let (vals, vecs) = hermitian_eigen(&g);
    let scale = vals.iter().cloned().fold(0.0, f64::max).max(1.0);
    let cut = tol.rank_rel * scale;
    let rows = ext.rows();
    let mut s = CMat::zeros(4, k);
    for (j, f) in fam.basis.iter().enumerate() {
        let [ua, ub] = traces(f);
        for i in 0..2 {
            s[(i, j)] = ua[i];
            s[(2 + i, j)] = ub[i];
        }
    }
    let kern = if rows.nrows() == 0 { CMat::identity(k, k) } else { kernel_basis(&(&rows * &s), tol)? };
    let null: Vec<usize> = (0..k).filter(|&i| vals[i] <= cut).collect();
    let mut span = CMat::zeros(k, kern.ncols() + null.len());
    span.view_mut((0, 0), (k, kern.ncols())).copy_from(&kern);
    for (j, &i) in null.iter().enumerate() {
        span.set_column(kern.ncols() + j, &vecs.column(i));
    }
    let v = range_basis(&span, tol)?;
    let gv = v.adjoint() * &g * &v;
    let (ev, ew) = hermitian_eigen(&gv);
    Ok((0..ev.len())
        .filter(|&i| ev[i] > cut)
        .map(|i| {
            let coeffs: CVec = &v * ew.column(i) / c(ev[i].sqrt());
            fam.combine(&coeffs)
        })
        .collect())
}

/// Spectrum of a self-adjoint relation in a finite-dimensional model, with
/// repetition.
pub fn relation_spectrum(s: &LinearRelation, tol: &Tolerances) -> Result<Vec<f64>> {
    let g = &s.model.gram;
    let u = g.to_euclid(&s.u_part());
    let f = g.to_euclid(&s.f_part());
    let w = range_basis(&u, tol)?;
    let mut cm = CMat::zeros(u.ncols(), w.ncols());
    for j in 0..w.ncols() {
        let (x, _) = least_squares(&u, &w.column(j).into_owned(), tol);
        cm.set_column(j, &x);
    }
    let a = w.adjoint() * f * cm;
    Ok(hermitian_eigen(&a).0)
}

fn polish(coeffs: &[C64], mut z: C64) -> C64 {
    for _ in 0..4 {
        let (mut v, mut d) = (c(0.0), c(0.0));
        for &a in coeffs.iter().rev() {
            d = d * z + v;
            v = v * z + a;
        }
        if d.norm() == 0.0 {
            break;
        }
        let step = v / d;
        if !step.re.is_finite() || !step.im.is_finite() {
            break;
        }
        z -= step;
    }
    z
}

/// Coefficients of `t -> d(center + radius t)` from samples on the unit circle,
/// with negligible leading terms dropped.
fn circle_polynomial(
    p: &Problem,
    cf: &CharFunction,
    center: f64,
    radius: f64,
    tol: &Tolerances,
) -> Result<Option<Vec<C64>>> {
    let n = 2 + 2 * p.atoms.len();
    let mut attempt = 0;
    let (values, nodes) = loop {
        let offset = 0.3 + 0.17 * attempt as f64;
        let nodes: Vec<C64> = (0..n)
            .map(|j| C64::from_polar(1.0, 2.0 * std::f64::consts::PI * j as f64 / n as f64 + offset))
            .collect();
        let vals: Result<Vec<C64>> = nodes.iter().map(|z| cf.eval(p, c(center) + z * radius, tol)).collect();
        match vals {
            Ok(v) => break (v, nodes),
            Err(Error::Blocked { .. }) if attempt < 8 => attempt += 1,
            Err(e) => return Err(e),
        }
    };
    let top = values.iter().map(|v| v.norm()).fold(0.0, f64::max);
    if top == 0.0 {
        return Ok(None);
    }
    let mut coeffs: Vec<C64> = (0..n)
        .map(|m| nodes.iter().zip(&values).map(|(z, v)| v * z.powi(-(m as i32))).sum::<C64>() / c(n as f64))
        .collect();
    let probe = C64::new(0.31, 0.77);
    if let Ok(d) = cf.eval(p, c(center) + probe * radius, tol) {
        let poly: C64 = coeffs.iter().rev().fold(c(0.0), |acc, a| acc * probe + a);
        if (poly - d).norm() > 1e-6 * top.max(d.norm()) {
            return Err(Error::Consistency("characteristic function is not a polynomial of the expected degree".into()));
        }
    }
    let cmax = coeffs.iter().map(|a| a.norm()).fold(0.0, f64::max);
    while coeffs.len() > 1 && coeffs[coeffs.len() - 1].norm() <= 1e-11 * cmax {
        coeffs.pop();
    }
    Ok(Some(coeffs))
}

fn poly_roots(coeffs: &[C64]) -> Vec<C64> {
    let deg = coeffs.len() - 1;
    if deg == 0 {
        return Vec::new();
    }
    let lead = coeffs[deg];
    let comp = CMat::from_fn(deg, deg, |i, j| {
        if i == 0 {
            -coeffs[deg - 1 - j] / lead
        } else if i == j + 1 {
            c(1.0)
        } else {
            c(0.0)
        }
    });
    eigenvalues(&comp).into_iter().map(|t| polish(coeffs, t)).collect()
}

fn poly_derivative(coeffs: &[C64], z: C64) -> C64 {
    coeffs.iter().enumerate().skip(1).rev().fold(c(0.0), |acc, (k, a)| acc * z + a * c(k as f64))
}

/// Candidate real zeros of the polynomial `d` on an atomic problem.
///
/// Circles of doubling radius about the midpoint; each keeps the roots in its
/// outer half, which it resolves well.
fn polynomial_candidates(p: &Problem, cf: &CharFunction, lo: f64, hi: f64, tol: &Tolerances) -> Result<Vec<f64>> {
    let center = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);
    let mut radius = 1.0;
    let mut out = Vec::new();
    let mut any = false;
    loop {
        if let Some(coeffs) = circle_polynomial(p, cf, center, radius, tol)? {
            any = true;
            let inner = if radius == 1.0 { 0.0 } else { 0.4 * radius };
            for t in poly_roots(&coeffs) {
                if t.norm() > 1.0 + 1e-9 || t.norm() < inner / radius {
                    continue;
                }
                let mut z = c(center) + t * radius;
                for _ in 0..3 {
                    let Ok(d) = cf.eval(p, z, tol) else { break };
                    let dp = poly_derivative(&coeffs, (z - c(center)) / radius) / radius;
                    if dp.norm() == 0.0 {
                        break;
                    }
                    let step = d / dp;
                    if !(step.norm() < 1e-3 * radius) {
                        break;
                    }
                    z -= step;
                }
                if z.im.abs() <= 1e-6 * (1.0 + z.norm()) {
                    out.push(z.re);
                }
            }
        }
        if radius >= half {
            break;
        }
        radius *= 2.0;
    }
    if !any {
        return Err(Error::NotSelfAdjoint("characteristic function vanishes identically".into()));
    }
    Ok(out)
}

/// Candidate zeros of `d` from a 512-node grid: sign changes of the phase-aligned
/// real part, refined by bisection, and small local minima of `|d|`.
fn grid_candidates(p: &Problem, cf: &CharFunction, lo: f64, hi: f64, tol: &Tolerances) -> Result<Vec<f64>> {
    const NODES: usize = 512;
    let xs: Vec<f64> = (0..NODES).map(|j| lo + (hi - lo) * j as f64 / (NODES - 1) as f64).collect();
    let vals: Vec<Option<C64>> = xs
        .iter()
        .map(|&x| match cf.eval(p, c(x), tol) {
            Ok(v) => Ok(Some(v)),
            Err(Error::Blocked { .. }) => Ok(None),
            Err(e) => Err(e),
        })
        .collect::<Result<_>>()?;
    let top = vals.iter().flatten().map(|v| v.norm()).fold(0.0, f64::max);
    if top == 0.0 {
        return Err(Error::NotSelfAdjoint("characteristic function vanishes identically".into()));
    }
    let peak = vals.iter().flatten().fold(c(0.0), |m, v| if v.norm() > m.norm() { *v } else { m });
    let phase = peak.conj() / c(peak.norm());
    let real = |x: f64| cf.eval(p, c(x), tol).map(|v| (v * phase).re);
    let mut out = Vec::new();
    for j in 0..NODES {
        let Some(v) = vals[j] else { continue };
        if v.norm() == 0.0 {
            out.push(xs[j]);
            continue;
        }
        if j + 1 < NODES {
            if let Some(w) = vals[j + 1] {
                let (ra, rb) = ((v * phase).re, (w * phase).re);
                if ra * rb < 0.0 {
                    let (mut a, mut b, mut fa) = (xs[j], xs[j + 1], ra);
                    while b - a > tol.root_abs * (1.0 + a.abs()) {
                        let m = 0.5 * (a + b);
                        let fm = real(m)?;
                        if fm == 0.0 {
                            a = m;
                            b = m;
                            break;
                        }
                        if (fm < 0.0) == (fa < 0.0) {
                            a = m;
                            fa = fm;
                        } else {
                            b = m;
                        }
                    }
                    out.push(0.5 * (a + b));
                }
            }
        }
        if j > 0 && j + 1 < NODES {
            if let (Some(l), Some(r)) = (vals[j - 1], vals[j + 1]) {
                if v.norm() < l.norm() && v.norm() < r.norm() && v.norm() < 1e-2 * top {
                    let x = golden_min(&|x| cf.eval(p, c(x), tol).map(|v| v.norm()).unwrap_or(f64::INFINITY), xs[j - 1], xs[j + 1], tol);
                    let dv = cf.eval(p, c(x), tol).map(|v| v.norm()).unwrap_or(f64::INFINITY);
                    if dv <= 1e-8 * top {
                        out.push(x);
                    }
                }
            }
        }
    }
    Ok(out)
}

fn golden_min(f: &dyn Fn(f64) -> f64, mut a: f64, mut b: f64, tol: &Tolerances) -> f64 {
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let (mut x1, mut x2) = (b - g * (b - a), a + g * (b - a));
    let (mut f1, mut f2) = (f(x1), f(x2));
    while b - a > tol.root_abs * (1.0 + a.abs()) {
        if f1 < f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - g * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + g * (b - a);
            f2 = f(x2);
        }
    }
    0.5 * (a + b)
}

/// Real points in `[lo, hi]` where some atom is singular.
fn blocked_points(p: &Problem, lo: f64, hi: f64, tol: &Tolerances) -> Vec<f64> {
    let mut out = Vec::new();
    for t in &p.atoms {
        if let RootSet::Finite(r) = spectrum_of_atom(t, tol).roots {
            out.extend(r.iter().filter(|z| z.im.abs() <= tol.root_abs * (1.0 + z.norm())).map(|z| z.re));
        }
    }
    out.retain(|x| *x >= lo && *x <= hi);
    out
}

fn cluster(mut xs: Vec<f64>) -> Vec<f64> {
    xs.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    let mut groups: Vec<Vec<f64>> = Vec::new();
    for x in xs {
        match groups.last_mut() {
            Some(g) if (x - g[g.len() - 1]).abs() <= 1e-6 * (1.0 + x.abs()) => g.push(x),
            _ => groups.push(vec![x]),
        }
    }
    groups.into_iter().map(|g| g.iter().sum::<f64>() / g.len() as f64).collect()
}

/// Eigenvalues in `[lo, hi]` with multiplicity, the dimension of the eigenspace.
pub fn eigenvalues_in(p: &Problem, ext: &Extension, lo: f64, hi: f64, tol: &Tolerances) -> Result<Vec<(f64, usize)>> {
    if !(lo <= hi) {
        return Err(Error::InvalidInput(format!("empty range [{lo}, {hi}]")));
    }
    crate::problem::require_valid(p)?;
    let direct = !matches!(ext, Extension::Conditions(_)) || !really_bad_atoms(p, tol).is_empty();
    if direct {
        if p.has_w_density() {
            return Err(Error::InvalidInput(
                "this extension is only supported on purely atomic problems".into(),
            ));
        }
        let rel = ext.relation(p, tol)?;
        if !is_self_adjoint(&rel, tol)? {
            return Err(Error::NotSelfAdjoint("extension is not self-adjoint".into()));
        }
        let vals: Vec<f64> = relation_spectrum(&rel, tol)?.into_iter().filter(|x| *x >= lo && *x <= hi).collect();
        let mut out: Vec<(f64, usize)> = Vec::new();
        for x in vals {
            match out.last_mut() {
                Some((y, m)) if (x - *y).abs() <= 1e-7 * (1.0 + x.abs()) => *m += 1,
                _ => out.push((x, 1)),
            }
        }
        return Ok(out);
    }
    let cf = CharFunction::new(p, ext, tol)?;
    let mut cands = if p.has_w_density() {
        grid_candidates(p, &cf, lo, hi, tol)?
    } else {
        polynomial_candidates(p, &cf, lo, hi, tol)?
    };
    cands.retain(|x| *x >= lo - 1e-9 && *x <= hi + 1e-9);
    cands.extend(blocked_points(p, lo, hi, tol));
    let loose = Tolerances { rank_rel: tol.rank_rel.max(1e-7), ..*tol };
    let mut out = Vec::new();
    for x in cluster(cands) {
        let m = eigenspace(p, ext, x, &loose)?.len();
        if m > 0 {
            out.push((x.clamp(lo, hi), m));
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::RM2;
    use crate::problem::{Atom, DensitySpec};
    use crate::propagation::w_norm_sq;
    use rand::{Rng, SeedableRng};

    fn periodic() -> Extension {
        Extension::Conditions(CMat::from_fn(2, 4, |i, j| {
            if j == i {
                c(1.0)
            } else if j == i + 2 {
                c(-1.0)
            } else {
                c(0.0)
            }
        }))
    }

    fn dirichlet() -> Extension {
        let mut r = CMat::zeros(2, 4);
        r[(0, 0)] = c(1.0);
        r[(1, 2)] = c(1.0);
        Extension::Conditions(r)
    }

    fn single_mass() -> Problem {
        Problem::atomic(-2.0, 2.0, vec![Atom { x: 0.0, dq: RM2::zeros(), dw: RM2::identity() * 2.0 }])
    }

    fn free_dirac(len: f64) -> Problem {
        Problem::new(0.0, len, vec![], &[], &[DensitySpec { from: 0.0, to: len, m: RM2::identity() }])
    }

    #[test]
    fn periodic_single_mass_has_double_zero() {
        let t = Tolerances::default();
        let p = single_mass();
        assert!(char_function(&p, &periodic(), c(0.0), &t).unwrap().norm() < 1e-12);
        assert!(char_function(&p, &periodic(), c(0.7), &t).unwrap().norm() > 1e-3);
        let ev = eigenvalues_in(&p, &periodic(), -5.0, 5.0, &t).unwrap();
        assert_eq!(ev.len(), 1);
        assert!(ev[0].0.abs() < 1e-10);
        assert_eq!(ev[0].1, 2);
        let es = eigenspace(&p, &periodic(), 0.0, &t).unwrap();
        assert_eq!(es.len(), 2);
        for u in &es {
            let [ua, ub] = traces(u);
            assert!((ua - ub).norm() < 1e-10);
            assert!((w_norm_sq(&p, u, &t) - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn dirichlet_dirac_gives_integers() {
        let t = Tolerances::default();
        let p = free_dirac(std::f64::consts::PI);
        let ev = eigenvalues_in(&p, &dirichlet(), -3.5, 3.5, &t).unwrap();
        let got: Vec<f64> = ev.iter().map(|e| e.0).collect();
        assert_eq!(got.len(), 7, "{got:?}");
        for (k, (x, m)) in ev.iter().enumerate() {
            assert!((x - (k as f64 - 3.0)).abs() < 1e-9, "{x}");
            assert_eq!(*m, 1);
        }
        assert!(eigenvalues_in(&p, &dirichlet(), 0.2, 0.2 + 1e-6, &t).unwrap().is_empty());
        assert!(eigenspace(&p, &dirichlet(), 0.5, &t).unwrap().is_empty());
        // |d(conj z)| = |d(z)|
        for z in [C64::new(0.3, 0.8), C64::new(-1.4, 2.1)] {
            let a = char_function(&p, &dirichlet(), z, &t).unwrap().norm();
            let b = char_function(&p, &dirichlet(), z.conj(), &t).unwrap().norm();
            assert!((a - b).abs() <= 1e-9 * a.max(1.0));
        }
    }

    #[test]
    fn blocked_lambda_is_reported() {
        let t = Tolerances::default();
        let p = Problem::atomic(0.0, 2.0, vec![Atom { x: 1.0, dq: RM2::zeros(), dw: RM2::identity() }]);
        // det B_+ = 1 + lambda^2 / 4 never vanishes on the reals; use a singular complex point
        let z = C64::new(0.0, 2.0);
        assert!(matches!(char_function(&p, &dirichlet(), z, &t), Err(Error::Blocked { .. })));
    }

    fn random_atomic(rng: &mut rand_chacha::ChaCha8Rng) -> Problem {
        let n = rng.gen_range(1..=4);
        let mut atoms = Vec::new();
        for k in 0..n {
            let s = rng.gen_range(-1.0..1.0);
            let dq = RM2::new(rng.gen_range(-1.0..1.0), s, s, rng.gen_range(-1.0..1.0));
            let m = RM2::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            let mut dw = m * m.transpose();
            if k == 0 {
                dw += RM2::identity() * 0.5;
            }
            atoms.push(Atom { x: (k + 1) as f64, dq, dw });
        }
        Problem::atomic(0.0, (n + 1) as f64, atoms)
    }

    #[test]
    fn atomic_eigenvalues_match_oracle() {
        let t = Tolerances::default();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..25 {
            let p = random_atomic(&mut rng);
            let (al, be): (f64, f64) = (rng.gen_range(0.0..3.1), rng.gen_range(0.0..3.1));
            let mut r = CMat::zeros(2, 4);
            r[(0, 0)] = c(al.cos());
            r[(0, 1)] = c(al.sin());
            r[(1, 2)] = c(be.cos());
            r[(1, 3)] = c(be.sin());
            let ext = Extension::Conditions(r);
            let rel = ext.relation(&p, &t).unwrap();
            assert!(is_self_adjoint(&rel, &t).unwrap());
            let oracle = relation_spectrum(&rel, &t).unwrap();
            let bound = oracle.iter().fold(1.0f64, |m, x| m.max(x.abs())) + 1.0;
            let ev = eigenvalues_in(&p, &ext, -bound, bound, &t).unwrap();
            let flat: Vec<f64> = ev.iter().flat_map(|(x, m)| std::iter::repeat(*x).take(*m)).collect();
            assert_eq!(flat.len(), oracle.len(), "{flat:?} vs {oracle:?}");
            for (x, y) in flat.iter().zip(&oracle) {
                assert!((x - y).abs() < 1e-10 * (1.0 + y.abs()), "{x} vs {y}");
            }
        }
    }
}
