//! Boundary conditions of the Krein-von Neumann extension, the
//! Dirichlet-to-Neumann matrix, and cross-validation against the relation oracle.

use serde::Serialize;

use crate::boundary::{extension_membership, make_global_frame, BCMatrix, QuasiFrame, QuasiMap};
use crate::classification::{left_cutoff_solution, right_cutoff_solution, Endpoint};
use crate::error::{Error, Result};
use crate::numeric::{c, jmat, numeric_rank, to_complex, CMat, Tolerances, M2, V2};
use crate::problem::{xi_set, Problem};
use crate::propagation::{fundamental_matrix, integrate, w_inner, w_norm_sq, PiecewiseFunction, Side};
use crate::relations::{build_atomic, friedrichs, is_nonnegative, is_self_adjoint, krein_von_neumann, LinearRelation};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum KvnForm {
    /// `u_check(b) = u_check(a)` in a global frame at `0`.
    Periodic,
    /// `v0_check(a)* J u_check(a) = 0 = v_N(b)* J u_vec(b)`.
    Separated,
}

#[derive(Debug, Clone, PartialEq)]
pub struct KvnResult {
    pub form: KvnForm,
    /// `None` when every condition is vacuous.
    pub bc: Option<BCMatrix>,
    pub frame: QuasiFrame,
    pub v0: Option<PiecewiseFunction>,
    pub vn: Option<PiecewiseFunction>,
    pub v0_norm_sq: f64,
    pub vn_norm_sq: f64,
    /// Nonnegativity of `T_min` was asserted by the caller, not verified.
    pub hypothesis_unverified: bool,
}

impl KvnResult {
    /// True when `(u, lambda u + f)` lies in the extension.
    pub fn contains(&self, p: &Problem, u: &PiecewiseFunction, tol: &Tolerances) -> Result<bool> {
        match &self.bc {
            Some(bc) => extension_membership(p, &self.frame, bc, u, tol),
            None => {
                let r = u.atom_residual(p).max(u.continuity_residual());
                if r > tol.residual_abs * u.sup_norm().max(1.0) {
                    return Err(Error::NotInTmax { residual: r });
                }
                Ok(true)
            }
        }
    }

    /// Rows acting on the actual boundary values `(u(a), u(b))`.
    pub fn trace_rows(&self) -> CMat {
        match &self.bc {
            Some(bc) => bc.full_rows() * self.frame.trace_matrix(),
            None => CMat::zeros(0, 4),
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "kvn_form": self.form,
            "bc": self.bc.as_ref().map(|b| b.to_json()),
            "mu": self.frame.mu,
            "v0_norm_sq": self.v0.as_ref().map(|_| self.v0_norm_sq),
            "vn_norm_sq": self.vn.as_ref().map(|_| self.vn_norm_sq),
            "hypothesis_unverified": self.hypothesis_unverified,
        })
    }
}

fn check_nonnegative(p: &Problem, assume_nonnegative: bool, tol: &Tolerances) -> Result<bool> {
    if p.has_w_density() {
        if !assume_nonnegative {
            return Err(Error::NonnegativityUnasserted);
        }
        return Ok(true);
    }
    let am = build_atomic(p, tol)?;
    if !is_nonnegative(&am.t_min, tol)? {
        let bound = crate::relations::lower_bound(&am.t_min, tol)?.unwrap_or(0.0);
        return Err(Error::NotNonnegative { bound });
    }
    Ok(false)
}

/// Frames `U_l(a) = J` on `(a, x_1)` and `U_r(b) = J` on `(x_N, b)` at `lambda = 0`.
fn separated_frame(p: &Problem, x1: f64, xn: f64, tol: &Tolerances) -> Result<QuasiFrame> {
    let j = jmat();
    let left = fundamental_matrix(&p.restricted(p.a, x1), c(0.0), p.a, &j, tol)?;
    let right = fundamental_matrix(&p.restricted(xn, p.b), c(0.0), p.b, &j, tol)?;
    Ok(QuasiFrame { mu: 0.0, left, left_end: x1, right, right_start: xn, global: false })
}

fn normalized(p: &Problem, v: PiecewiseFunction, tol: &Tolerances) -> (PiecewiseFunction, f64) {
    let n = w_norm_sq(p, &v, tol);
    let sup = v.sup_norm();
    if n > tol.rank_rel * sup * sup {
        (v.scaled(c(1.0 / n.sqrt())), 1.0)
    } else {
        (v.scaled(c(1.0 / sup)), 0.0)
    }
}

/// Boundary condition of the Krein-von Neumann extension of `T_min`.
///
/// Nonnegativity of `T_min` is verified exactly for purely atomic weights; with
/// densities the caller must assert it and the result is tagged unverified.
pub fn kvn_boundary_condition(p: &Problem, assume_nonnegative: bool, tol: &Tolerances) -> Result<KvnResult> {
    crate::problem::require_valid(p)?;
    let unverified = check_nonnegative(p, assume_nonnegative, tol)?;
    let xi = xi_set(p, c(0.0), tol);
    if xi.is_empty() {
        let frame = make_global_frame(p, 0.0, tol)?;
        if frame.mu != 0.0 {
            return Err(Error::Consistency("0 is not admissible for the frame".into()));
        }
        let bc = BCMatrix::from_real(&[&[1.0, 0.0, -1.0, 0.0], &[0.0, 1.0, 0.0, -1.0]]);
        return Ok(KvnResult {
            form: KvnForm::Periodic,
            bc: Some(bc),
            frame,
            v0: None,
            vn: None,
            v0_norm_sq: 0.0,
            vn_norm_sq: 0.0,
            hypothesis_unverified: unverified,
        });
    }
    let (lo, hi) = (xi[0], xi[xi.len() - 1]);
    let (x1, xn) = (p.atoms[lo].x, p.atoms[hi].x);
    let frame = separated_frame(p, x1, xn, tol)?;
    let (v0, n0) = normalized(p, left_cutoff_solution(p, lo, c(0.0), tol)?, tol);
    let (vn, nn) = normalized(p, right_cutoff_solution(p, hi, c(0.0), tol)?, tol);
    let (ma, mb) = frame.endpoint_maps();
    let j = jmat();
    let ra = (ma * v0.trace(p.a, Side::Plus)).adjoint() * j;
    let rb = (mb * vn.trace(p.b, Side::Minus)).adjoint() * j;
    let keep_a = n0 > 0.0;
    let mut keep_b = nn > 0.0;
    if keep_a && keep_b {
        let g = CMat::from_fn(2, 2, |i, k| {
            let f = [&v0, &vn];
            w_inner(p, f[i], f[k], p.a, p.b, tol)
        });
        if numeric_rank(&g, tol)? < 2 {
            keep_b = false;
        }
    }
    let bc = match (keep_a, keep_b) {
        (true, true) => {
            let mut a = CMat::zeros(2, 4);
            a[(0, 0)] = ra[0];
            a[(0, 1)] = ra[1];
            a[(1, 2)] = rb[0];
            a[(1, 3)] = rb[1];
            Some(BCMatrix::new(a))
        }
        (true, false) => Some(BCMatrix::separated([ra[0], ra[1]], Endpoint::A)),
        (false, true) => Some(BCMatrix::separated([rb[0], rb[1]], Endpoint::B)),
        (false, false) => None,
    };
    Ok(KvnResult {
        form: KvnForm::Separated,
        bc,
        frame,
        v0: Some(v0),
        vn: Some(vn),
        v0_norm_sq: n0,
        vn_norm_sq: nn,
        hypothesis_unverified: unverified,
    })
}

/// `integral U(., 0)* w F` for the right-hand side `F = lambda u + f` of `u`.
pub fn kvn_moment(p: &Problem, frame: &QuasiFrame, u: &PiecewiseFunction, tol: &Tolerances) -> V2 {
    let uf = &frame.left;
    let mut s = V2::zeros();
    for (k, t) in p.atoms.iter().enumerate() {
        s += uf.at(t.x).adjoint() * to_complex(&t.dw) * u.rhs_at_atom(k);
    }
    for (k, piece) in p.pieces.iter().enumerate() {
        if piece.wd.norm() == 0.0 {
            continue;
        }
        let wd = to_complex(&piece.wd);
        let (s0, s1) = (&uf.columns[0].segments[k], &uf.columns[1].segments[k]);
        s += integrate(
            &|x| {
                let m = M2::new(s0.value(x)[0], s1.value(x)[0], s0.value(x)[1], s1.value(x)[1]);
                m.adjoint() * wd * u.rhs_on_segment(k, x)
            },
            piece.from,
            piece.to,
            tol.quad_abs,
            V2::zeros(),
        );
    }
    s
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DtnStatus {
    Matrix([[f64; 2]; 2]),
    DirichletZeroEigenvalue,
}

/// Dirichlet data `D = (u_1(a), u_1(b))`, Neumann data `N = (-u_2(a), u_2(b))`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DtnResult {
    pub status: DtnStatus,
    /// `U(a)` for the real fundamental matrix with `U(b) = J` at `lambda = 0`.
    pub u_at_a: [[f64; 2]; 2],
    pub det_defect: f64,
}

pub fn dirichlet_to_neumann(p: &Problem, tol: &Tolerances) -> Result<DtnResult> {
    crate::problem::require_valid(p)?;
    let u = fundamental_matrix(p, c(0.0), p.b, &jmat(), tol)?;
    let ua = u.trace(p.a, Side::Plus);
    let r = |i: usize, j: usize| ua[(i, j)].re;
    let u_at_a = [[r(0, 0), r(0, 1)], [r(1, 0), r(1, 1)]];
    let det_defect = (ua.determinant() - c(1.0)).norm();
    let status = if r(0, 0).abs() <= tol.residual_abs {
        DtnStatus::DirichletZeroEigenvalue
    } else {
        let s = 1.0 / r(0, 0);
        DtnStatus::Matrix([[-r(1, 0) * s, s], [s, r(0, 1) * s]])
    };
    Ok(DtnResult { status, u_at_a, det_defect })
}

pub fn dirichlet_data(u: &PiecewiseFunction) -> V2 {
    V2::new(u.trace(u.a(), Side::Plus)[0], u.trace(u.b(), Side::Minus)[0])
}

pub fn neumann_data(u: &PiecewiseFunction) -> V2 {
    V2::new(-u.trace(u.a(), Side::Plus)[1], u.trace(u.b(), Side::Minus)[1])
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KvnDims {
    pub h: usize,
    pub t_min: usize,
    pub t_max: usize,
    pub oracle: usize,
    pub boundary: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct KvnReport {
    pub result: KvnResult,
    pub oracle: LinearRelation,
    pub boundary: LinearRelation,
    pub friedrichs: LinearRelation,
    pub oracle_match: bool,
    pub distance: f64,
    pub kernel_contained: bool,
    pub self_adjoint: bool,
    pub equals_friedrichs: bool,
    pub dims: KvnDims,
}

impl KvnReport {
    pub fn to_json(&self) -> serde_json::Value {
        let mut v = serde_json::json!({
            "kvn_form": self.result.form,
            "bc": self.result.bc.as_ref().map(|b| b.to_json()),
            "oracle_match": self.oracle_match,
            "distance": if self.distance.is_finite() { Some(self.distance) } else { None },
            "kernel_contained": self.kernel_contained,
            "self_adjoint": self.self_adjoint,
            "equals_friedrichs": self.equals_friedrichs,
            "dims": self.dims,
        });
        if !self.oracle_match {
            v["oracle"] = self.oracle.to_json();
            v["boundary"] = self.boundary.to_json();
        }
        v
    }
}

/// Compares the boundary-condition description with the abstract construction
/// on a purely atomic problem.
pub fn kvn_cross_validate(p: &Problem, tol: &Tolerances) -> Result<KvnReport> {
    let am = build_atomic(p, tol)?;
    let result = kvn_boundary_condition(p, false, tol)?;
    let oracle = krein_von_neumann(&am.t_min, tol)?;
    let boundary = am.restrict_by_traces(&result.trace_rows(), tol)?;
    let distance = oracle.distance(&boundary)?;
    let ker = am.t_max.kernel(tol)?;
    let zero = CMat::zeros(am.model.dim(), ker.dim());
    let kernel_rel = LinearRelation::from_pairs(&am.model, &ker.basis, &zero, tol)?;
    let fr = friedrichs(&am.t_min, tol)?;
    Ok(KvnReport {
        dims: KvnDims {
            h: am.model.dim(),
            t_min: am.t_min.dim(),
            t_max: am.t_max.dim(),
            oracle: oracle.dim(),
            boundary: boundary.dim(),
        },
        oracle_match: distance <= tol.residual_abs,
        distance,
        kernel_contained: oracle.includes(&kernel_rel, tol),
        self_adjoint: is_self_adjoint(&oracle, tol)?,
        equals_friedrichs: fr.equals(&oracle, tol)?,
        friedrichs: fr,
        result,
        oracle,
        boundary,
    })
}
