//! Solution spaces at a given `lambda`, the zero-norm space `L0`, endpoint
//! classification and deficiency indices, and compactly supported modifications
//! of maximal-relation elements.

use crate::error::{Error, Result};
use crate::numeric::{c, hermitian_eigen, jmat, kernel_basis, least_squares, m2_to_dyn, numeric_rank, to_complex, v2_to_dyn, CMat, CVec, Tolerances, C64, I, M2, V2};
use crate::problem::{atom_jumps, really_bad_atoms, xi_set, Problem, SourceTerm};
use crate::propagation::{fundamental_matrix, integrate, solve_ivp, w_inner, AtomTrace, PiecewiseFunction, Side};

/// Basis of all balanced solutions of the homogeneous equation at `lambda`.
#[derive(Debug, Clone, PartialEq)]
pub struct SolutionFamily {
    pub lambda: C64,
    pub basis: Vec<PiecewiseFunction>,
}

impl SolutionFamily {
    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    /// Gram matrix of the basis in the w-inner product.
    pub fn norm_gram(&self, p: &Problem, tol: &Tolerances) -> CMat {
        gram_of(p, &self.basis, tol)
    }

    pub fn combine(&self, coeffs: &CVec) -> PiecewiseFunction {
        let cs: Vec<C64> = coeffs.iter().cloned().collect();
        PiecewiseFunction::combination(&self.basis, &cs)
    }
}

pub fn gram_of(p: &Problem, fs: &[PiecewiseFunction], tol: &Tolerances) -> CMat {
    let n = fs.len();
    let mut g = CMat::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let v = w_inner(p, &fs[i], &fs[j], p.a, p.b, tol);
            g[(i, j)] = v;
            g[(j, i)] = v.conj();
        }
    }
    g
}

fn columns_of(m: &CMat) -> Vec<CVec> {
    (0..m.ncols()).map(|k| m.column(k).into_owned()).collect()
}

/// Kernel basis of `[-B_- U^- | B_+]`, ordered so that solutions ending at the atom
/// come first, then solutions starting at the atom, then the rest.
fn structured_kernel(m: &CMat, old: usize, tol: &Tolerances) -> Result<Vec<CVec>> {
    let k = kernel_basis(m, tol)?;
    let r = k.ncols();
    if r == 0 {
        return Ok(Vec::new());
    }
    let plus_rows = k.rows(old, 2).into_owned();
    let coef_rows = k.rows(0, old).into_owned();
    let ending = &k * kernel_basis(&plus_rows, tol)?;
    let starting = &k * kernel_basis(&coef_rows, tol)?;
    let mut chosen: Vec<CVec> = Vec::new();
    let mut span = CMat::zeros(old + 2, 0);
    for v in columns_of(&ending).into_iter().chain(columns_of(&starting)).chain(columns_of(&k)) {
        let mut trial = CMat::zeros(old + 2, span.ncols() + 1);
        trial.view_mut((0, 0), (old + 2, span.ncols())).copy_from(&span);
        trial.set_column(span.ncols(), &v);
        if numeric_rank(&trial, tol)? > span.ncols() {
            span = trial;
            chosen.push(v);
        }
        if chosen.len() == r {
            break;
        }
    }
    Ok(chosen)
}

/// All solutions at `lambda`, propagated left to right through every atom,
/// including atoms where `B_+` is singular.
pub fn solution_family(p: &Problem, lambda: C64, tol: &Tolerances) -> Result<SolutionFamily> {
    let zero = PiecewiseFunction::zero(p, lambda);
    let mut fams: Vec<PiecewiseFunction> = (0..2)
        .map(|k| {
            let mut f = zero.clone();
            f.segments[0].start = if k == 0 { V2::new(c(1.0), c(0.0)) } else { V2::new(c(0.0), c(1.0)) };
            f
        })
        .collect();
    for k in 0..p.pieces.len() - 1 {
        let x = p.pieces[k].to;
        let ends: Vec<V2> = fams.iter().map(|f| f.segments[k].end()).collect();
        let Some(ai) = p.atom_index(x) else {
            for (f, e) in fams.iter_mut().zip(&ends) {
                f.segments[k + 1].start = *e;
            }
            continue;
        };
        let atom = &p.atoms[ai];
        let (bm, bp) = atom_jumps(&atom.dq, &atom.dw, lambda);
        let m = fams.len();
        let mut sys = CMat::zeros(2, m + 2);
        for (j, e) in ends.iter().enumerate() {
            let col = -(bm * e);
            sys[(0, j)] = col[0];
            sys[(1, j)] = col[1];
        }
        sys.view_mut((0, m), (2, 2)).copy_from(&m2_to_dyn(&bp));
        let kernel = structured_kernel(&sys, m, tol)?;
        let mut next = Vec::with_capacity(kernel.len());
        for v in kernel {
            let coeffs: Vec<C64> = v.rows(0, m).iter().cloned().collect();
            let mut f = if coeffs.iter().any(|z| z.norm() > 0.0) {
                PiecewiseFunction::combination(&fams, &coeffs)
            } else {
                zero.clone()
            };
            let minus = ends.iter().zip(&coeffs).fold(V2::zeros(), |acc, (e, s)| acc + e * *s);
            let plus = V2::new(v[m], v[m + 1]);
            f.atoms[ai] = AtomTrace { x, minus, plus };
            f.segments[k + 1].start = plus;
            next.push(f);
        }
        fams = next;
    }
    Ok(SolutionFamily { lambda, basis: fams })
}

/// Candidates that are linearly independent modulo zero-norm functions, chosen
/// greedily in the given order. Returns the indices of the chosen candidates.
pub fn select_positive_norm(gram: &CMat, candidates: &[CVec], tol: &Tolerances) -> Vec<usize> {
    let scale = (0..gram.nrows()).map(|i| gram[(i, i)].re).fold(0.0, f64::max).max(1.0);
    let thr = tol.rank_rel.sqrt() * 1e-2 * scale;
    let mut q: Vec<CVec> = Vec::new();
    let mut chosen = Vec::new();
    for (idx, cand) in candidates.iter().enumerate() {
        let mut r = cand.clone();
        for qq in &q {
            let proj = (qq.adjoint() * gram * &r)[(0, 0)];
            r -= qq * proj;
        }
        let n = (r.adjoint() * gram * &r)[(0, 0)].re;
        let base = (cand.adjoint() * gram * cand)[(0, 0)].re.max(0.0);
        if n > thr && n > 1e-8 * base {
            q.push(r / C64::new(n.sqrt(), 0.0));
            chosen.push(idx);
        }
    }
    chosen
}

/// Solutions at `lambda = 0` with zero w-norm, as an orthonormal coefficient basis
/// over the solution family.
#[derive(Debug, Clone, PartialEq)]
pub struct NonDefiniteFrame {
    pub family: SolutionFamily,
    pub coefficients: CMat,
    pub elements: Vec<PiecewiseFunction>,
}

impl NonDefiniteFrame {
    pub fn dim(&self) -> usize {
        self.elements.len()
    }
}

/// Zero-norm solutions among the solutions at `lambda`.
pub fn zero_norm_solutions(p: &Problem, lambda: C64, tol: &Tolerances) -> Result<NonDefiniteFrame> {
    let family = solution_family(p, lambda, tol)?;
    let g = family.norm_gram(p, tol);
    let h = hermitian_eigen(&g);
    let scale = h.0.iter().cloned().fold(0.0, f64::max).max(1.0);
    let cut = tol.rank_rel * scale;
    let idx: Vec<usize> = (0..h.0.len()).filter(|&k| h.0[k] <= cut).collect();
    let mut coeffs = CMat::zeros(family.dim(), idx.len());
    for (j, &k) in idx.iter().enumerate() {
        coeffs.set_column(j, &h.1.column(k));
    }
    let elements = (0..coeffs.ncols())
        .map(|j| family.combine(&coeffs.column(j).into_owned()))
        .collect();
    Ok(NonDefiniteFrame { family, coefficients: coeffs, elements })
}

pub fn compute_l0(p: &Problem, tol: &Tolerances) -> Result<NonDefiniteFrame> {
    zero_norm_solutions(p, c(0.0), tol)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum Endpoint {
    A,
    B,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum EndpointType {
    LimitCircle,
    LimitPointSuspected,
}

/// Endpoints of a bounded interval with finite measures are regular.
pub fn classify_endpoint(_p: &Problem, _end: Endpoint) -> EndpointType {
    EndpointType::LimitCircle
}

/// Heuristic verdict for an endpoint approached by a sequence of truncations.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct TruncationDiagnostic {
    pub norms: Vec<f64>,
    pub verdict: EndpointType,
}

/// Sums `|f|_w^2 / |f(s)|^2` over the solution family of each truncation, where
/// `s` is the left end of the support of `f`, and flags `LimitPointSuspected` when
/// the sums increase strictly over at least eight truncations without their
/// increments decaying. This is a heuristic only.
pub fn truncation_diagnostic(problems: &[Problem], lambda: C64, tol: &Tolerances) -> Result<TruncationDiagnostic> {
    let mut norms = Vec::with_capacity(problems.len());
    for p in problems {
        let basis = match fundamental_matrix(p, lambda, p.a, &M2::identity(), tol) {
            Ok(u) => u.columns.to_vec(),
            Err(_) => solution_family(p, lambda, tol)?.basis,
        };
        let mut s = 0.0;
        for f in &basis {
            let lead = f.segments.iter().map(|g| g.start.norm()).find(|&n| n > 0.0);
            if let Some(lead) = lead {
                s += w_inner(p, f, f, p.a, p.b, tol).re / (lead * lead);
            }
        }
        norms.push(s);
    }
    let incs: Vec<f64> = norms.windows(2).map(|w| w[1] - w[0]).collect();
    let diverging = norms.len() >= 8
        && incs.iter().all(|&d| d > tol.residual_abs)
        && incs.last().copied().unwrap_or(0.0) >= 0.5 * incs.iter().sum::<f64>() / incs.len() as f64;
    Ok(TruncationDiagnostic {
        norms,
        verdict: if diverging { EndpointType::LimitPointSuspected } else { EndpointType::LimitCircle },
    })
}

/// Deficiency indices with witnesses.
#[derive(Debug, Clone, PartialEq)]
pub struct DeficiencyReport {
    pub n_plus: usize,
    pub n_minus: usize,
    pub dim_l0: usize,
    pub really_bad: Vec<usize>,
    /// Non-real point used for the really bad construction.
    pub lambda_used: Option<C64>,
    pub v0: Option<PiecewiseFunction>,
    pub vn: Option<PiecewiseFunction>,
    pub v0_norm_sq: f64,
    pub vn_norm_sq: f64,
    /// Positive-norm solutions at `i` and `-i`, independent modulo zero-norm ones.
    pub d_plus: Vec<PiecewiseFunction>,
    pub d_minus: Vec<PiecewiseFunction>,
}

/// Representatives of `D_lambda` modulo zero-norm solutions.
pub fn deficiency_space(p: &Problem, lambda: C64, tol: &Tolerances) -> Result<Vec<PiecewiseFunction>> {
    let fam = solution_family(p, lambda, tol)?;
    let g = fam.norm_gram(p, tol);
    let (vals, vecs) = hermitian_eigen(&g);
    let cands: Vec<CVec> = (0..vals.len()).rev().map(|k| vecs.column(k).into_owned()).collect();
    let chosen = select_positive_norm(&g, &cands, tol);
    Ok(chosen.into_iter().map(|k| fam.combine(&cands[k])).collect())
}

fn lambda_for_cutoffs(p: &Problem, lo: usize, hi: usize, tol: &Tolerances) -> C64 {
    let outer: Vec<usize> = (0..p.atoms.len()).filter(|&k| k < lo || k > hi).collect();
    for k in 0..=20 {
        let lambda = I * (1.0 + k as f64 / 7.0);
        let bad = xi_set(p, lambda, tol);
        let badc = xi_set(p, lambda.conj(), tol);
        if outer.iter().all(|o| !bad.contains(o) && !badc.contains(o)) {
            return lambda;
        }
    }
    I * (1.0 + 3.0 / 7.0)
}

/// Solution at `lambda` supported on `(a, x_lo]` whose left trace at atom `lo`
/// is annihilated by `B_-`.
pub fn left_cutoff_solution(p: &Problem, lo: usize, lambda: C64, tol: &Tolerances) -> Result<PiecewiseFunction> {
    let x1 = p.atoms[lo].x;
    let sub = p.restricted(p.a, x1);
    let u = fundamental_matrix(&sub, lambda, p.a, &M2::identity(), tol)?;
    let end = u.trace(x1, Side::Minus);
    let (bm, _) = atom_jumps(&p.atoms[lo].dq, &p.atoms[lo].dw, lambda);
    let k = kernel_basis(&m2_to_dyn(&(bm * end)), tol)?;
    if k.ncols() == 0 {
        return Err(Error::Consistency(format!("no cutoff solution at atom {lo}")));
    }
    let coeff = V2::new(k[(0, 0)], k[(1, 0)]);
    let local = u.apply(&coeff);
    let mut out = PiecewiseFunction::zero(p, lambda);
    for (s, ls) in out.segments.iter_mut().zip(&local.segments) {
        s.start = ls.start;
    }
    for (t, lt) in out.atoms.iter_mut().zip(&local.atoms) {
        *t = lt.clone();
    }
    out.atoms[lo] = AtomTrace { x: x1, minus: local.trace(x1, Side::Minus), plus: V2::zeros() };
    Ok(out)
}

/// Mirror image of [`left_cutoff_solution`] on `[x_hi, b)`.
pub fn right_cutoff_solution(p: &Problem, hi: usize, lambda: C64, tol: &Tolerances) -> Result<PiecewiseFunction> {
    let xn = p.atoms[hi].x;
    let sub = p.restricted(xn, p.b);
    let u = fundamental_matrix(&sub, lambda, p.b, &M2::identity(), tol)?;
    let start = u.trace(xn, Side::Plus);
    let (_, bp) = atom_jumps(&p.atoms[hi].dq, &p.atoms[hi].dw, lambda);
    let k = kernel_basis(&m2_to_dyn(&(bp * start)), tol)?;
    if k.ncols() == 0 {
        return Err(Error::Consistency(format!("no cutoff solution at atom {hi}")));
    }
    let coeff = V2::new(k[(0, 0)], k[(1, 0)]);
    let local = u.apply(&coeff);
    let mut out = PiecewiseFunction::zero(p, lambda);
    let off = p.pieces.len() - sub.pieces.len();
    for (s, ls) in out.segments.iter_mut().skip(off).zip(&local.segments) {
        s.start = ls.start;
    }
    let aoff = hi + 1;
    for (t, lt) in out.atoms.iter_mut().skip(aoff).zip(&local.atoms) {
        *t = lt.clone();
    }
    out.atoms[hi] = AtomTrace { x: xn, minus: V2::zeros(), plus: start * coeff };
    Ok(out)
}

fn positive_norm(n: f64, f: &PiecewiseFunction, tol: &Tolerances) -> bool {
    let sup = f.sup_norm().max(1e-300);
    n > tol.rank_rel * sup * sup
}

pub fn deficiency_indices(p: &Problem, tol: &Tolerances) -> Result<DeficiencyReport> {
    let l0 = compute_l0(p, tol)?;
    let dim_l0 = l0.dim();
    let rb = really_bad_atoms(p, tol);
    let d_plus = deficiency_space(p, I, tol)?;
    let d_minus = deficiency_space(p, -I, tol)?;
    if rb.is_empty() {
        let n = 2usize.saturating_sub(dim_l0);
        return Ok(DeficiencyReport {
            n_plus: n,
            n_minus: n,
            dim_l0,
            really_bad: rb,
            lambda_used: None,
            v0: None,
            vn: None,
            v0_norm_sq: 0.0,
            vn_norm_sq: 0.0,
            d_plus,
            d_minus,
        });
    }
    let (lo, hi) = (rb[0], rb[rb.len() - 1]);
    let lambda = lambda_for_cutoffs(p, lo, hi, tol);
    let v0 = left_cutoff_solution(p, lo, lambda, tol)?;
    let vn = right_cutoff_solution(p, hi, lambda, tol)?;
    let n0 = w_inner(p, &v0, &v0, p.a, p.b, tol).re;
    let nn = w_inner(p, &vn, &vn, p.a, p.b, tol).re;
    let n = positive_norm(n0, &v0, tol) as usize + positive_norm(nn, &vn, tol) as usize;
    Ok(DeficiencyReport {
        n_plus: n,
        n_minus: n,
        dim_l0,
        really_bad: rb,
        lambda_used: Some(lambda),
        v0: Some(v0),
        vn: Some(vn),
        v0_norm_sq: n0,
        vn_norm_sq: nn,
        d_plus,
        d_minus,
    })
}

/// Element `(v, lambda v + g)` of the maximal relation agreeing with a given
/// solution near `a` and vanishing (or, when `L0` is one-dimensional, lying in
/// `span{U(., lambda) e}`) near `b`. Lives on a refined partition.
#[derive(Debug, Clone, PartialEq)]
pub struct CutoffElement {
    pub problem: Problem,
    pub v: PiecewiseFunction,
    pub c: f64,
    pub d: f64,
    /// Residual of the moment equations.
    pub residual: f64,
}

fn transfer_source(p: &Problem, pr: &Problem, f: &SourceTerm) -> SourceTerm {
    let mut out = SourceTerm::zero(pr);
    for (k, piece) in pr.pieces.iter().enumerate() {
        let mid = 0.5 * (piece.from + piece.to);
        if let Some(j) = p.piece_index(mid) {
            out.piece_values[k] = f.piece_values[j];
        }
    }
    out.atom_values = f.atom_values.clone();
    out
}

pub fn cutoff_element(p: &Problem, u: &PiecewiseFunction, tol: &Tolerances) -> Result<CutoffElement> {
    let lambda = u.lambda;
    if !xi_set(p, lambda, tol).is_empty() || !xi_set(p, lambda.conj(), tol).is_empty() {
        return Err(Error::InvalidInput("lambda lies in the singular set of an atom".into()));
    }
    let dim_l0 = compute_l0(p, tol)?.dim();
    if dim_l0 >= 2 {
        return Err(Error::MomentUnsolvable("w vanishes identically".into()));
    }
    let first = &p.pieces[0];
    let last = &p.pieces[p.pieces.len() - 1];
    let cpt = 0.5 * (first.from + first.to);
    let dpt = 0.5 * (last.from + last.to);
    let pr = p.refined(&[cpt, dpt]);
    let f = transfer_source(p, &pr, &u.source);
    let ur = solve_ivp(&pr, lambda, pr.a, &u.trace(p.a, Side::Plus), &f, tol)?;
    let ubar = fundamental_matrix(&pr, lambda.conj(), cpt, &M2::identity(), tol)?;
    let mut blocks: Vec<(Slot, M2)> = Vec::new();
    for (k, t) in pr.atoms.iter().enumerate() {
        if t.x > cpt && t.x < dpt && t.dw.norm() > 0.0 {
            blocks.push((Slot::Atom(k), ubar.at(t.x).adjoint() * to_complex(&t.dw)));
        }
    }
    for (k, piece) in pr.pieces.iter().enumerate() {
        if piece.from >= cpt && piece.to <= dpt && piece.wd.norm() > 0.0 {
            let wd = to_complex(&piece.wd);
            let (s0, s1) = (&ubar.columns[0].segments[k], &ubar.columns[1].segments[k]);
            let m = integrate(
                &|x| {
                    let uu = M2::new(s0.value(x)[0], s1.value(x)[0], s0.value(x)[1], s1.value(x)[1]);
                    uu.adjoint() * wd
                },
                piece.from,
                piece.to,
                tol.quad_abs,
                M2::zeros(),
            );
            blocks.push((Slot::Piece(k), m));
        }
    }
    let mut mm = CMat::zeros(2, 2 * blocks.len());
    for (j, (_, b)) in blocks.iter().enumerate() {
        mm.view_mut((0, 2 * j), (2, 2)).copy_from(&m2_to_dyn(b));
    }
    let rank = numeric_rank(&mm, tol)?;
    if rank + dim_l0 < 2 {
        return Err(Error::MomentUnsolvable(format!(
            "moment space has dimension {rank}, need {}",
            2 - dim_l0
        )));
    }
    let target = -(jmat() * ur.trace(cpt, Side::Plus));
    let (h, residual) = least_squares(&mm, &v2_to_dyn(&target), tol);
    let mut g = f.clone();
    for (k, piece) in pr.pieces.iter().enumerate() {
        if piece.from >= cpt {
            g.piece_values[k] = V2::zeros();
        }
    }
    for (k, t) in pr.atoms.iter().enumerate() {
        if t.x > cpt {
            g.atom_values[k] = V2::zeros();
        }
    }
    for (j, (slot, _)) in blocks.iter().enumerate() {
        let hv = V2::new(h[2 * j], h[2 * j + 1]);
        match slot {
            Slot::Atom(k) => g.atom_values[*k] = hv,
            Slot::Piece(k) => g.piece_values[*k] = hv,
        }
    }
    let mut v = solve_ivp(&pr, lambda, pr.a, &u.trace(p.a, Side::Plus), &g, tol)?;
    if dim_l0 == 0 {
        let klast = pr.pieces.len() - 1;
        let tail = v.segments[klast].start.norm();
        let scale = 1.0 + ur.sup_norm();
        if tail > tol.residual_abs * scale * 1e2 {
            return Err(Error::MomentUnsolvable(format!("tail of size {tail:e} remains")));
        }
        v.segments[klast].start = V2::zeros();
    }
    let residual = residual.max(0.0);
    Ok(CutoffElement { problem: pr, v, c: cpt, d: dpt, residual })
}

enum Slot {
    Atom(usize),
    Piece(usize),
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::RM2;
    use crate::problem::Atom;

    fn mass(x: f64, dw: RM2) -> Atom {
        Atom { x, dq: RM2::zeros(), dw }
    }

    #[test]
    fn l0_examples() {
        let t = Tolerances::default();
        let e3 = Problem::atomic(-2.0, 2.0, vec![mass(0.0, RM2::identity() * 2.0)]);
        assert_eq!(compute_l0(&e3, &t).unwrap().dim(), 0);
        let half = Problem::atomic(-1.0, 1.0, vec![mass(0.0, RM2::new(2.0, 0.0, 0.0, 0.0))]);
        let l0 = compute_l0(&half, &t).unwrap();
        assert_eq!(l0.dim(), 1);
        let phi = &l0.elements[0];
        let v = phi.value(-0.5);
        assert!(v[0].norm() < 1e-12 && v[1].norm() > 0.1);
        assert!((phi.value(0.5) - v).norm() < 1e-12);
        let free = Problem::atomic(0.0, 1.0, vec![]);
        assert_eq!(compute_l0(&free, &t).unwrap().dim(), 2);
    }

    #[test]
    fn family_through_singular_atom() {
        let t = Tolerances::default();
        let p = Problem::atomic(-1.0, 1.0, vec![Atom { x: 0.0, dq: RM2::new(0.0, 2.0, 2.0, 0.0), dw: RM2::identity() * 2.0 }]);
        let fam = solution_family(&p, c(0.0), &t).unwrap();
        assert_eq!(fam.dim(), 2);
        for f in &fam.basis {
            assert!(f.atom_residual(&p) < 1e-12);
            assert!(f.continuity_residual() < 1e-12);
        }
        let left = fam.basis.iter().filter(|f| f.trace(1.0, Side::Minus).norm() < 1e-14).count();
        let right = fam.basis.iter().filter(|f| f.trace(-1.0, Side::Plus).norm() < 1e-14).count();
        assert_eq!((left, right), (1, 1));
    }

    #[test]
    fn delta_coupling_deficiency() {
        let t = Tolerances::default();
        let p = Problem::atomic(-1.0, 1.0, vec![Atom { x: 0.0, dq: RM2::new(0.0, 2.0, 2.0, 0.0), dw: RM2::identity() * 2.0 }]);
        let r = deficiency_indices(&p, &t).unwrap();
        assert_eq!((r.n_plus, r.n_minus, r.dim_l0), (2, 2, 0));
        assert_eq!(r.d_plus.len(), 2);
    }

    #[test]
    fn cutoff_two_masses() {
        let t = Tolerances::default();
        let p = Problem::atomic(-2.0, 2.0, vec![mass(0.0, RM2::identity() * 2.0), mass(1.0, RM2::identity() * 2.0)]);
        let u = solve_ivp(&p, c(0.0), -2.0, &V2::new(c(1.0), c(0.0)), &SourceTerm::zero(&p), &t).unwrap();
        let e = cutoff_element(&p, &u, &t).unwrap();
        assert!((e.v.value(-1.5) - V2::new(c(1.0), c(0.0))).norm() < 1e-12);
        assert!(e.v.value(1.9).norm() < 1e-12);
        assert!(e.v.atom_residual(&e.problem) < 1e-12);
        let h0 = e.v.source.atom_values[0];
        assert!((h0 - V2::new(c(0.0), c(-0.25))).norm() < 1e-12);
    }

    #[test]
    fn cutoff_with_one_dimensional_l0() {
        let t = Tolerances::default();
        let p = Problem::atomic(-1.0, 1.0, vec![mass(0.0, RM2::new(2.0, 0.0, 0.0, 0.0))]);
        let lambda = c(0.5);
        let u = solve_ivp(&p, lambda, -1.0, &V2::new(c(0.7), c(0.2)), &SourceTerm::zero(&p), &t).unwrap();
        let e = cutoff_element(&p, &u, &t).unwrap();
        let tail = e.v.value(0.9);
        let ubar = fundamental_matrix(&p, lambda, e.c, &M2::identity(), &t).unwrap();
        let dir = ubar.trace(0.9, Side::Plus) * V2::new(c(1.0), c(0.0));
        let cross = tail[0] * dir[1] - tail[1] * dir[0];
        assert!(cross.norm() < 1e-12, "{tail:?} vs {dir:?}");
        assert!(tail.norm() > 1e-3);
    }

    #[test]
    fn truncations_of_growing_masses_flagged() {
        let t = Tolerances::default();
        let gens: Vec<Problem> = (1..=9)
            .map(|m| Problem::atomic(0.0, m as f64 + 0.5, (1..=m).map(|k| mass(k as f64, RM2::identity())).collect()))
            .collect();
        let d = truncation_diagnostic(&gens, I, &t).unwrap();
        assert_eq!(d.verdict, EndpointType::LimitPointSuspected, "{:?}", d.norms);
        let zero: Vec<Problem> = (1..=9).map(|m| Problem::atomic(0.0, m as f64, vec![])).collect();
        let d = truncation_diagnostic(&zero, I, &t).unwrap();
        assert_eq!(d.verdict, EndpointType::LimitCircle);
    }
}
