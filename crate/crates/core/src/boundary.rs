//! Quasi-boundary values, boundary-condition matrices, their canonical forms,
//! and membership in the self-adjoint restrictions they define.

use serde::{Deserialize, Serialize};

use crate::classification::{compute_l0, deficiency_space, Endpoint};
use crate::error::{Error, Result};
use crate::numeric::{c, jmat, kernel_basis, least_squares, m2_to_dyn, numeric_rank, CMat, CVec, Tolerances, C64, I, M2, V2};
use crate::problem::{really_bad_atoms, spectrum_of_atom, Problem, RootSet};
use crate::propagation::{fundamental_matrix, solve_ivp, FundamentalMatrix, PiecewiseFunction, Side};

/// Linear maps `u(a) -> u_check(a)` and `u(b) -> u_vec(b)`.
pub trait QuasiMap {
    fn endpoint_maps(&self) -> (M2, M2);

    fn quasi_values(&self, u: &PiecewiseFunction) -> BoundaryValues {
        let (ma, mb) = self.endpoint_maps();
        BoundaryValues { at_a: ma * u.trace(u.a(), Side::Plus), at_b: mb * u.trace(u.b(), Side::Minus) }
    }

    /// `4 x 4` map from `(u(a), u(b))` to quasi-boundary values.
    fn trace_matrix(&self) -> CMat {
        let (ma, mb) = self.endpoint_maps();
        let mut m = CMat::zeros(4, 4);
        m.view_mut((0, 0), (2, 2)).copy_from(&m2_to_dyn(&ma));
        m.view_mut((2, 2), (2, 2)).copy_from(&m2_to_dyn(&mb));
        m
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryValues {
    pub at_a: V2,
    pub at_b: V2,
}

impl BoundaryValues {
    pub fn stacked(&self) -> CVec {
        CVec::from_vec(vec![self.at_a[0], self.at_a[1], self.at_b[0], self.at_b[1]])
    }
}

/// Fundamental matrices at a real `mu`: `left` on `(a, left_end)` with `U(a) = J`,
/// `right` on `(right_start, b)` with `U(b) = J`. A global frame uses one matrix
/// on all of `(a, b)` normalized at `b`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuasiFrame {
    pub mu: f64,
    pub left: FundamentalMatrix,
    pub left_end: f64,
    pub right: FundamentalMatrix,
    pub right_start: f64,
    pub global: bool,
}

impl QuasiMap for QuasiFrame {
    fn endpoint_maps(&self) -> (M2, M2) {
        let j = jmat();
        let a = self.left.columns[0].a();
        let b = self.right.columns[0].b();
        (self.left.trace(a, Side::Plus).adjoint() * j, self.right.trace(b, Side::Minus).adjoint() * j)
    }
}

impl QuasiFrame {
    /// `U_l(x)* J u(x)` for `x` in the left frame interval.
    pub fn check_at(&self, u: &PiecewiseFunction, x: f64, side: Side) -> V2 {
        self.left.trace(x, side).adjoint() * jmat() * u.trace(x, side)
    }

    /// `U_r(x)* J u(x)` for `x` in the right frame interval.
    pub fn vec_at(&self, u: &PiecewiseFunction, x: f64, side: Side) -> V2 {
        self.right.trace(x, side).adjoint() * jmat() * u.trace(x, side)
    }
}

fn mu_admissible(p: &Problem, mu: f64, tol: &Tolerances) -> bool {
    p.atoms.iter().all(|t| match spectrum_of_atom(t, tol).roots {
        RootSet::All => true,
        RootSet::Finite(r) => r.iter().all(|z| (z - c(mu)).norm() > tol.root_abs.max(1e-8) * (1.0 + z.norm())),
    })
}

fn pick_mu(p: &Problem, hint: f64, tol: &Tolerances) -> Result<f64> {
    for k in 0..100 {
        let step = ((k + 1) / 2) as f64 / 3.0;
        let mu = if k % 2 == 1 { hint + step } else { hint - step };
        if mu_admissible(p, mu, tol) {
            return Ok(mu);
        }
    }
    Err(Error::NoAdmissibleMu { tried: 100 })
}

/// Canonical frames for regular endpoints. Each frame stops at the nearest
/// really bad point; `global` is set when there is none.
pub fn make_frame(p: &Problem, mu_hint: f64, tol: &Tolerances) -> Result<QuasiFrame> {
    crate::problem::require_valid(p)?;
    let mu = pick_mu(p, mu_hint, tol)?;
    let rb = really_bad_atoms(p, tol);
    let left_end = rb.first().map(|&k| p.atoms[k].x).unwrap_or(p.b);
    let right_start = rb.last().map(|&k| p.atoms[k].x).unwrap_or(p.a);
    let j = jmat();
    let left = fundamental_matrix(&p.restricted(p.a, left_end), c(mu), p.a, &j, tol)?;
    let right = fundamental_matrix(&p.restricted(right_start, p.b), c(mu), p.b, &j, tol)?;
    Ok(QuasiFrame { mu, left, left_end, right, right_start, global: rb.is_empty() })
}

/// A single frame on `(a, b)` with `U(b, mu) = J`; needs no really bad points.
pub fn make_global_frame(p: &Problem, mu_hint: f64, tol: &Tolerances) -> Result<QuasiFrame> {
    crate::problem::require_valid(p)?;
    if !really_bad_atoms(p, tol).is_empty() {
        return Err(Error::InvalidInput("a global frame cannot cross a really bad point".into()));
    }
    let mu = pick_mu(p, mu_hint, tol)?;
    let u = fundamental_matrix(p, c(mu), p.b, &jmat(), tol)?;
    Ok(QuasiFrame { mu, left: u.clone(), left_end: p.b, right: u, right_start: p.a, global: true })
}

/// Frame `Phi = (phi, psi)` for a problem with one-dimensional `L0`.
#[derive(Debug, Clone, PartialEq)]
pub struct CoupledFrame {
    pub mu: f64,
    pub x0: f64,
    pub phi: PiecewiseFunction,
    pub psi: PiecewiseFunction,
    /// Spans `D_i` with quasi-values `(-1, 0)` at `a` and `(-1, p)` at `b`.
    pub v_plus: PiecewiseFunction,
    pub p: C64,
}

impl CoupledFrame {
    pub fn phi_at(&self, x: f64, side: Side) -> M2 {
        let u = self.phi.trace(x, side);
        let v = self.psi.trace(x, side);
        M2::new(u[0], v[0], u[1], v[1])
    }

    /// `Phi(x)* J u(x)`.
    pub fn check_at(&self, u: &PiecewiseFunction, x: f64, side: Side) -> V2 {
        self.phi_at(x, side).adjoint() * jmat() * u.trace(x, side)
    }
}

impl QuasiMap for CoupledFrame {
    fn endpoint_maps(&self) -> (M2, M2) {
        let j = jmat();
        (
            self.phi_at(self.phi.a(), Side::Plus).adjoint() * j,
            self.phi_at(self.phi.b(), Side::Minus).adjoint() * j,
        )
    }
}

/// Midpoint of `(a, b)` moved off the atoms.
fn point_of_continuity(p: &Problem) -> f64 {
    let mid = 0.5 * (p.a + p.b);
    if p.atom_index(mid).is_none() {
        return mid;
    }
    let k = p.piece_index(mid + 1e-12 * (p.b - p.a)).unwrap_or(0);
    0.5 * (p.pieces[k].from + p.pieces[k].to)
}

pub fn make_coupled_frame(p: &Problem, mu_hint: f64, tol: &Tolerances) -> Result<CoupledFrame> {
    crate::problem::require_valid(p)?;
    if !really_bad_atoms(p, tol).is_empty() {
        return Err(Error::InvalidInput("coupled frames need a problem without really bad points".into()));
    }
    let l0 = compute_l0(p, tol)?;
    if l0.dim() != 1 {
        return Err(Error::InvalidInput(format!("L0 has dimension {}, expected 1", l0.dim())));
    }
    let mu = pick_mu(p, mu_hint, tol)?;
    let x0 = point_of_continuity(p);
    let raw = &l0.elements[0];
    let at = raw.value(x0);
    let k = if at[0].norm() >= at[1].norm() { 0 } else { 1 };
    let phase = at[k] / at[k].norm();
    let phi0 = raw.scaled(c(1.0 / at.norm()) / phase);
    let mut phi = phi0.clone();
    phi.lambda = c(mu);
    let start = phi0.value(x0);
    let psi = solve_ivp(p, c(mu), x0, &(jmat() * start), &crate::problem::SourceTerm::zero(p), tol)?;
    let mut frame = CoupledFrame { mu, x0, phi, psi, v_plus: PiecewiseFunction::zero(p, I), p: c(0.0) };
    let d = deficiency_space(p, I, tol)?;
    let u = d
        .first()
        .ok_or_else(|| Error::Consistency("D_i is trivial".into()))?;
    let ua = frame.check_at(u, p.a, Side::Plus);
    let ub = frame.check_at(u, p.b, Side::Minus);
    let beta = -ua[0];
    if beta.norm() <= tol.residual_abs * (1.0 + ua.norm()) {
        return Err(Error::Consistency("deficiency element has no psi component".into()));
    }
    let alpha_a = ua[1];
    let phi_i = {
        let mut f = frame.phi.clone();
        f.lambda = I;
        for s in f.segments.iter_mut() {
            let piece = &p.pieces[p.piece_index(0.5 * (s.from + s.to)).unwrap_or(0)];
            s.generator = crate::propagation::piece_generator(&piece.qd, &piece.wd, I);
        }
        f
    };
    frame.v_plus = u.add(&phi_i.scaled(-alpha_a)).scaled(c(1.0) / beta);
    frame.p = (ub[1] - alpha_a) / beta;
    Ok(frame)
}

/// Shape of a boundary-condition matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BcShape {
    #[serde(rename = "2x4")]
    TwoByFour,
    #[serde(rename = "1x4")]
    OneByFour,
    #[serde(rename = "1x2")]
    OneByTwo,
}

/// Boundary condition `A (u_check(a); u_vec(b)) = 0`, or `A u_check(end) = 0` for
/// a `1 x 2` matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct BCMatrix {
    pub a: CMat,
    pub endpoint: Option<Endpoint>,
}

impl BCMatrix {
    pub fn new(a: CMat) -> BCMatrix {
        BCMatrix { a, endpoint: None }
    }

    pub fn separated(row: [C64; 2], end: Endpoint) -> BCMatrix {
        BCMatrix { a: CMat::from_row_slice(1, 2, &row), endpoint: Some(end) }
    }

    pub fn from_real(rows: &[&[f64]]) -> BCMatrix {
        BCMatrix::new(CMat::from_fn(rows.len(), rows[0].len(), |i, j| c(rows[i][j])))
    }

    pub fn shape(&self) -> Option<BcShape> {
        match self.a.shape() {
            (2, 4) => Some(BcShape::TwoByFour),
            (1, 4) => Some(BcShape::OneByFour),
            (1, 2) => Some(BcShape::OneByTwo),
            _ => None,
        }
    }

    /// Rows acting on `(u_check(a), u_vec(b))`, padding a separated row with zeros.
    pub fn full_rows(&self) -> CMat {
        if self.a.ncols() == 4 {
            return self.a.clone();
        }
        let mut m = CMat::zeros(self.a.nrows(), 4);
        let off = if self.endpoint == Some(Endpoint::B) { 2 } else { 0 };
        m.view_mut((0, off), (self.a.nrows(), 2)).copy_from(&self.a);
        m
    }

    pub fn to_json(&self) -> serde_json::Value {
        let rows: Vec<Vec<[f64; 2]>> = (0..self.a.nrows())
            .map(|i| (0..self.a.ncols()).map(|j| [self.a[(i, j)].re, self.a[(i, j)].im]).collect())
            .collect();
        serde_json::json!({
            "A": rows,
            "shape": self.shape(),
            "endpoint": self.endpoint.map(|e| match e { Endpoint::A => "a", Endpoint::B => "b" }),
        })
    }

    pub fn from_json(v: &serde_json::Value) -> Result<BCMatrix> {
        let bad = |m: &str| Error::InvalidInput(format!("boundary condition JSON: {m}"));
        let rows = v.get("A").and_then(|a| a.as_array()).ok_or_else(|| bad("missing A"))?;
        let mut data: Vec<Vec<C64>> = Vec::new();
        for r in rows {
            let r = r.as_array().ok_or_else(|| bad("row is not an array"))?;
            let mut row = Vec::new();
            for e in r {
                let z = match e {
                    serde_json::Value::Number(n) => c(n.as_f64().ok_or_else(|| bad("bad number"))?),
                    serde_json::Value::Array(p) if p.len() == 2 => C64::new(
                        p[0].as_f64().ok_or_else(|| bad("bad number"))?,
                        p[1].as_f64().ok_or_else(|| bad("bad number"))?,
                    ),
                    _ => return Err(bad("entries must be numbers or [re, im] pairs")),
                };
                row.push(z);
            }
            data.push(row);
        }
        if data.is_empty() || data.iter().any(|r| r.len() != data[0].len()) {
            return Err(bad("ragged matrix"));
        }
        let a = CMat::from_fn(data.len(), data[0].len(), |i, j| data[i][j]);
        let endpoint = match v.get("endpoint").and_then(|e| e.as_str()) {
            Some("a") => Some(Endpoint::A),
            Some("b") => Some(Endpoint::B),
            Some(other) => return Err(bad(&format!("unknown endpoint {other}"))),
            None => None,
        };
        let m = BCMatrix { a, endpoint };
        if let Some(s) = v.get("shape").and_then(|s| s.as_str()) {
            let expected = serde_json::to_value(m.shape()).ok();
            if expected.as_ref().and_then(|e| e.as_str()) != Some(s) {
                return Err(bad("shape does not match A"));
            }
        }
        Ok(m)
    }
}

/// `diag(-J, J)`.
pub fn form_matrix() -> CMat {
    let j = m2_to_dyn(&jmat());
    let mut m = CMat::zeros(4, 4);
    m.view_mut((0, 0), (2, 2)).copy_from(&(-&j));
    m.view_mut((2, 2), (2, 2)).copy_from(&j);
    m
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BcReport {
    pub violations: Vec<String>,
    pub rank: usize,
    pub form_defect: f64,
    /// Invertibility of the two blocks of a `2 x 4` matrix.
    pub blocks_invertible: Option<(bool, bool)>,
}

impl BcReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

pub fn validate_bc(bc: &BCMatrix, tol: &Tolerances) -> BcReport {
    let mut violations = Vec::new();
    let a = &bc.a;
    let Some(shape) = bc.shape() else {
        return BcReport {
            violations: vec![format!("unsupported shape {}x{}", a.nrows(), a.ncols())],
            rank: 0,
            form_defect: f64::INFINITY,
            blocks_invertible: None,
        };
    };
    let rank = numeric_rank(a, tol).unwrap_or(0);
    if rank != a.nrows() {
        violations.push(format!("rank {rank} is less than the row count {}", a.nrows()));
    }
    if shape == BcShape::OneByTwo && bc.endpoint.is_none() {
        violations.push("a 1x2 condition needs an endpoint".into());
    }
    let form = if shape == BcShape::OneByTwo { m2_to_dyn(&jmat()) } else { form_matrix() };
    let defect = (a * form * a.adjoint()).norm();
    let scale = 1.0 + a.norm_squared();
    if defect > tol.residual_abs * scale {
        violations.push(format!("A JJ A* = {defect:.3e} is not zero"));
    }
    let blocks_invertible = if shape == BcShape::TwoByFour {
        let r1 = numeric_rank(&a.columns(0, 2).into_owned(), tol).unwrap_or(0) == 2;
        let r2 = numeric_rank(&a.columns(2, 2).into_owned(), tol).unwrap_or(0) == 2;
        if r1 != r2 {
            violations.push("exactly one of A1, A2 is invertible".into());
        }
        Some((r1, r2))
    } else {
        None
    };
    BcReport { violations, rank, form_defect: defect, blocks_invertible }
}

/// Canonical form of a self-adjoint boundary condition.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum CanonicalBC {
    SeparatedPair { alpha: f64, beta: f64 },
    /// `S u_check(a) + u_vec(b) = 0`.
    Coupled { s: [[[f64; 2]; 2]; 2] },
    CoupledRank1 { alpha: f64 },
    SeparatedSingle { endpoint: Endpoint, alpha: f64 },
}

fn pack(m: &M2) -> [[[f64; 2]; 2]; 2] {
    let e = |i, j| [m[(i, j)].re, m[(i, j)].im];
    [[e(0, 0), e(0, 1)], [e(1, 0), e(1, 1)]]
}

fn unpack(s: &[[[f64; 2]; 2]; 2]) -> M2 {
    let e = |i: usize, j: usize| C64::new(s[i][j][0], s[i][j][1]);
    M2::new(e(0, 0), e(0, 1), e(1, 0), e(1, 1))
}

impl CanonicalBC {
    pub fn coupled(s: &M2) -> CanonicalBC {
        CanonicalBC::Coupled { s: pack(s) }
    }

    pub fn coupled_matrix(&self) -> Option<M2> {
        match self {
            CanonicalBC::Coupled { s } => Some(unpack(s)),
            _ => None,
        }
    }

    pub fn to_matrix(&self) -> BCMatrix {
        match self {
            CanonicalBC::SeparatedPair { alpha, beta } => BCMatrix::from_real(&[
                &[alpha.cos(), alpha.sin(), 0.0, 0.0],
                &[0.0, 0.0, beta.cos(), beta.sin()],
            ]),
            CanonicalBC::Coupled { s } => {
                let s = unpack(s);
                let mut a = CMat::zeros(2, 4);
                a.view_mut((0, 0), (2, 2)).copy_from(&m2_to_dyn(&s));
                a.view_mut((0, 2), (2, 2)).copy_from(&CMat::identity(2, 2));
                BCMatrix::new(a)
            }
            CanonicalBC::CoupledRank1 { alpha } => {
                BCMatrix::from_real(&[&[0.0, -alpha.sin(), alpha.cos(), alpha.sin()]])
            }
            CanonicalBC::SeparatedSingle { endpoint, alpha } => {
                BCMatrix::separated([c(alpha.cos()), c(alpha.sin())], *endpoint)
            }
        }
    }
}

/// Angle `theta in [0, pi)` with `row ~ (cos theta, sin theta)` up to a complex factor.
fn row_angle(r0: C64, r1: C64, tol: &Tolerances) -> Result<f64> {
    let big = if r0.norm() >= r1.norm() { r0 } else { r1 };
    if big.norm() == 0.0 {
        return Err(Error::InvalidInput("zero row in boundary condition".into()));
    }
    let phase = big / big.norm();
    let (x, y) = (r0 / phase, r1 / phase);
    if x.im.abs() + y.im.abs() > tol.residual_abs.sqrt() * big.norm() {
        return Err(Error::InvalidInput("separated row is not a real direction".into()));
    }
    let mut t = y.re.atan2(x.re);
    if t < 0.0 {
        t += std::f64::consts::PI;
    }
    if t >= std::f64::consts::PI - 1e-14 {
        t = 0.0;
    }
    Ok(t)
}

pub fn canonicalize_bc(bc: &BCMatrix, tol: &Tolerances) -> Result<CanonicalBC> {
    let report = validate_bc(bc, tol);
    if !report.is_valid() {
        return Err(Error::InvalidInput(report.violations.join("; ")));
    }
    let a = &bc.a;
    match bc.shape().expect("validated") {
        BcShape::TwoByFour => {
            let a1 = a.columns(0, 2).into_owned();
            let a2 = a.columns(2, 2).into_owned();
            if let Some((true, true)) = report.blocks_invertible {
                let inv = a2.try_inverse().ok_or_else(|| Error::Consistency("A2 not invertible".into()))?;
                let s = inv * a1;
                Ok(CanonicalBC::coupled(&M2::new(s[(0, 0)], s[(0, 1)], s[(1, 0)], s[(1, 1)])))
            } else {
                let ca = kernel_basis(&a2.transpose(), tol)?;
                let cb = kernel_basis(&a1.transpose(), tol)?;
                if ca.ncols() != 1 || cb.ncols() != 1 {
                    return Err(Error::Consistency("separated blocks have unexpected rank".into()));
                }
                let ra = ca.transpose() * a1;
                let rb = cb.transpose() * a2;
                Ok(CanonicalBC::SeparatedPair {
                    alpha: row_angle(ra[(0, 0)], ra[(0, 1)], tol)?,
                    beta: row_angle(rb[(0, 0)], rb[(0, 1)], tol)?,
                })
            }
        }
        BcShape::OneByFour => {
            let r = a.row(0);
            let scale = r.norm();
            if r[0].norm() > tol.residual_abs * scale || (r[1] + r[3]).norm() > tol.residual_abs * scale {
                return Err(Error::InvalidInput("rank-one coupled condition is not of the form (0, -s, t, s)".into()));
            }
            Ok(CanonicalBC::CoupledRank1 { alpha: row_angle(r[2], r[3], tol)? })
        }
        BcShape::OneByTwo => Ok(CanonicalBC::SeparatedSingle {
            endpoint: bc.endpoint.expect("validated"),
            alpha: row_angle(a[(0, 0)], a[(0, 1)], tol)?,
        }),
    }
}

/// An element `(v, g)` of `D_i + D_{-i}`: `v = plus + minus`, `g = i (plus - minus)`.
#[derive(Debug, Clone, PartialEq)]
pub struct DeficiencyElement {
    pub plus: PiecewiseFunction,
    pub minus: PiecewiseFunction,
}

impl DeficiencyElement {
    /// `g` at `x` on the given side.
    pub fn g_trace(&self, x: f64, side: Side) -> V2 {
        (self.plus.trace(x, side) - self.minus.trace(x, side)) * I
    }

    fn g_quasi(&self, frame: &dyn QuasiMap) -> BoundaryValues {
        let (ma, mb) = frame.endpoint_maps();
        let a = self.plus.a();
        let b = self.plus.b();
        BoundaryValues { at_a: ma * self.g_trace(a, Side::Plus), at_b: mb * self.g_trace(b, Side::Minus) }
    }
}

/// `G_lk = (g_l* J g_k)^-(b) - (g_l* J g_k)^+(a)`.
pub fn g_matrix(elements: &[DeficiencyElement]) -> CMat {
    let j = jmat();
    let n = elements.len();
    CMat::from_fn(n, n, |l, k| {
        let (el, ek) = (&elements[l], &elements[k]);
        let (a, b) = (el.plus.a(), el.plus.b());
        let at_b = (el.g_trace(b, Side::Minus).adjoint() * j * ek.g_trace(b, Side::Minus))[(0, 0)];
        let at_a = (el.g_trace(a, Side::Plus).adjoint() * j * ek.g_trace(a, Side::Plus))[(0, 0)];
        at_b - at_a
    })
}

/// Boundary-condition matrix `(g_check_j(a)*, g_vec_j(b)*) diag(-J, J)` of the
/// restriction defined by the given elements.
pub fn bc_from_deficiency(frame: &dyn QuasiMap, elements: &[DeficiencyElement], tol: &Tolerances) -> Result<BCMatrix> {
    if elements.is_empty() || elements.len() > 2 {
        return Err(Error::InvalidInput(format!("expected one or two elements, got {}", elements.len())));
    }
    let g = g_matrix(elements);
    let scale = elements
        .iter()
        .map(|e| e.plus.sup_norm() + e.minus.sup_norm())
        .fold(1.0, f64::max);
    let defect = g.norm();
    if defect > tol.residual_abs * scale * scale {
        return Err(Error::GNotZero { defect });
    }
    let mut vals = CMat::zeros(4, elements.len());
    for (k, e) in elements.iter().enumerate() {
        vals.set_column(k, &e.g_quasi(frame).stacked());
    }
    if numeric_rank(&vals, tol)? < elements.len() {
        return Err(Error::InvalidInput("deficiency elements are linearly dependent".into()));
    }
    let a = vals.adjoint() * form_matrix();
    if elements.len() == 2 {
        return Ok(BCMatrix::new(a));
    }
    let row_scale = a.norm();
    let left = a.columns(0, 2).norm();
    let right = a.columns(2, 2).norm();
    let single = |cols: usize, end: Endpoint| -> Result<BCMatrix> {
        let r = a.columns(cols, 2);
        let raw = BCMatrix::separated([r[(0, 0)], r[(0, 1)]], end);
        canonicalize_bc(&raw, tol).map(|cb| cb.to_matrix())
    };
    if right <= tol.residual_abs * row_scale {
        single(0, Endpoint::A)
    } else if left <= tol.residual_abs * row_scale {
        single(2, Endpoint::B)
    } else {
        Ok(BCMatrix::new(a))
    }
}

/// True when `(u, lambda u + f)` satisfies the boundary condition, allowing any
/// representative `u + l` with `l` in `L0`.
pub fn extension_membership(
    p: &Problem,
    frame: &dyn QuasiMap,
    bc: &BCMatrix,
    u: &PiecewiseFunction,
    tol: &Tolerances,
) -> Result<bool> {
    let sup = u.sup_norm().max(1.0);
    let residual = u.atom_residual(p).max(u.continuity_residual());
    if u.atoms.len() != p.atoms.len() || u.segments.len() != p.pieces.len() || residual > tol.residual_abs * sup {
        return Err(Error::NotInTmax { residual });
    }
    let rows = bc.full_rows();
    let y = frame.quasi_values(u).stacked();
    let target = &rows * &y;
    let l0 = compute_l0(p, tol)?;
    let resid = if l0.dim() == 0 {
        target.norm()
    } else {
        let mut m = CMat::zeros(rows.nrows(), l0.dim());
        for (k, l) in l0.elements.iter().enumerate() {
            m.set_column(k, &(&rows * frame.quasi_values(l).stacked()));
        }
        least_squares(&m, &(-target), tol).1
    };
    Ok(resid <= tol.residual_abs * sup * (1.0 + rows.norm()))
}
