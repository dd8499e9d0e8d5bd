//! Linear relations on a finite-dimensional Hilbert space: adjoints, inverses,
//! shifts, semibounded checks, the Friedrichs and Krein-von Neumann extensions,
//! the von Neumann decomposition, and the exact relations of a problem whose
//! weight is purely atomic.

use crate::error::{Error, Result};
use crate::numeric::{c, kernel_basis, least_squares, m2_to_dyn, psd_root_rows, subspace_distance, CMat, CVec, Gram, Subspace, Tolerances, C64, I};
use crate::problem::{atom_jumps, Problem};
use crate::propagation::{expm2, piece_generator};

/// `C^n` with inner product `<x, y> = x* G y`.
#[derive(Debug, Clone, PartialEq)]
pub struct HilbertModel {
    pub gram: Gram,
}

impl HilbertModel {
    pub fn euclidean(n: usize) -> HilbertModel {
        HilbertModel { gram: Gram::identity(n) }
    }

    pub fn dim(&self) -> usize {
        self.gram.dim()
    }
}

/// Subspace of `H x H`, stored as a basis orthonormal under `diag(G, G)`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearRelation {
    pub model: HilbertModel,
    pub graph: Subspace,
}

fn stack(u: &CMat, f: &CMat) -> CMat {
    let n = u.nrows();
    let k = u.ncols();
    let mut m = CMat::zeros(2 * n, k);
    m.view_mut((0, 0), (n, k)).copy_from(u);
    m.view_mut((n, 0), (n, k)).copy_from(f);
    m
}

impl LinearRelation {
    /// Span of the pairs `(u_k, f_k)` given as columns.
    pub fn from_pairs(model: &HilbertModel, u: &CMat, f: &CMat, tol: &Tolerances) -> Result<LinearRelation> {
        if u.nrows() != model.dim() || f.nrows() != model.dim() || u.ncols() != f.ncols() {
            return Err(Error::InvalidInput("pair matrices do not match the model".into()));
        }
        let graph = Subspace::span(&stack(u, f), &model.gram.doubled(), tol)?;
        Ok(LinearRelation { model: model.clone(), graph })
    }

    pub fn zero(model: &HilbertModel) -> LinearRelation {
        LinearRelation { model: model.clone(), graph: Subspace::zero(2 * model.dim()) }
    }

    /// `{0} x H`.
    pub fn multivalued_all(model: &HilbertModel, tol: &Tolerances) -> Result<LinearRelation> {
        let n = model.dim();
        LinearRelation::from_pairs(model, &CMat::zeros(n, n), &CMat::identity(n, n), tol)
    }

    /// `H x {0}`.
    pub fn zero_operator(model: &HilbertModel, tol: &Tolerances) -> Result<LinearRelation> {
        let n = model.dim();
        LinearRelation::from_pairs(model, &CMat::identity(n, n), &CMat::zeros(n, n), tol)
    }

    /// Graph of a matrix.
    pub fn graph_of(model: &HilbertModel, m: &CMat, tol: &Tolerances) -> Result<LinearRelation> {
        let n = model.dim();
        LinearRelation::from_pairs(model, &CMat::identity(n, n), m, tol)
    }

    pub fn n(&self) -> usize {
        self.model.dim()
    }

    pub fn dim(&self) -> usize {
        self.graph.dim()
    }

    pub fn u_part(&self) -> CMat {
        self.graph.basis.rows(0, self.n()).into_owned()
    }

    pub fn f_part(&self) -> CMat {
        self.graph.basis.rows(self.n(), self.n()).into_owned()
    }

    pub fn doubled_gram(&self) -> Gram {
        self.model.gram.doubled()
    }

    pub fn contains_pair(&self, u: &CVec, f: &CVec, tol: &Tolerances) -> bool {
        let v = stack(&CMat::from_column_slice(u.len(), 1, u.as_slice()), &CMat::from_column_slice(f.len(), 1, f.as_slice()));
        self.graph.contains(&v, &self.doubled_gram(), tol)
    }

    pub fn domain(&self, tol: &Tolerances) -> Result<Subspace> {
        Subspace::span(&self.u_part(), &self.model.gram, tol)
    }

    /// `{f : (0, f) in S}`.
    pub fn multivalued_part(&self, tol: &Tolerances) -> Result<Subspace> {
        let k = kernel_basis(&self.model.gram.to_euclid(&self.u_part()), tol)?;
        Subspace::span(&(self.f_part() * k), &self.model.gram, tol)
    }

    /// `{u : (u, 0) in S}`.
    pub fn kernel(&self, tol: &Tolerances) -> Result<Subspace> {
        let k = kernel_basis(&self.model.gram.to_euclid(&self.f_part()), tol)?;
        Subspace::span(&(self.u_part() * k), &self.model.gram, tol)
    }

    /// Graph basis as `{"dim", "n", "basis": [{"u", "f"}]}` with `[re, im]` entries.
    pub fn to_json(&self) -> serde_json::Value {
        let n = self.n();
        let cols: Vec<serde_json::Value> = (0..self.dim())
            .map(|k| {
                let col = self.graph.basis.column(k);
                let part = |off: usize| -> Vec<[f64; 2]> { (0..n).map(|i| [col[off + i].re, col[off + i].im]).collect() };
                serde_json::json!({"u": part(0), "f": part(n)})
            })
            .collect();
        serde_json::json!({"dim": self.dim(), "n": n, "basis": cols})
    }

    pub fn equals(&self, other: &LinearRelation, tol: &Tolerances) -> Result<bool> {
        Ok(self.distance(other)? <= tol.residual_abs)
    }

    /// Gap between the two graphs; infinite when dimensions differ.
    pub fn distance(&self, other: &LinearRelation) -> Result<f64> {
        subspace_distance(&self.graph, &other.graph, &self.doubled_gram())
    }

    pub fn includes(&self, other: &LinearRelation, tol: &Tolerances) -> bool {
        other.graph.dim() == 0 || self.graph.contains(&other.graph.basis, &self.doubled_gram(), tol)
    }

    pub fn sum(&self, other: &LinearRelation, tol: &Tolerances) -> Result<LinearRelation> {
        Ok(LinearRelation {
            model: self.model.clone(),
            graph: self.graph.sum(&other.graph, &self.doubled_gram(), tol)?,
        })
    }

    pub fn intersection(&self, other: &LinearRelation, tol: &Tolerances) -> Result<LinearRelation> {
        Ok(LinearRelation {
            model: self.model.clone(),
            graph: self.graph.intersection(&other.graph, &self.doubled_gram(), tol)?,
        })
    }
}

/// `S* = {(v, g) : <g, u> = <v, f> for all (u, f) in S}`.
pub fn adjoint(s: &LinearRelation, tol: &Tolerances) -> Result<LinearRelation> {
    let rotated = stack(&s.f_part(), &(-s.u_part()));
    let g2 = s.doubled_gram();
    let r = Subspace::span(&rotated, &g2, tol)?;
    Ok(LinearRelation { model: s.model.clone(), graph: crate::numeric::ortho_complement(&r, &g2, tol)? })
}

pub fn inverse(s: &LinearRelation, tol: &Tolerances) -> Result<LinearRelation> {
    LinearRelation::from_pairs(&s.model, &s.f_part(), &s.u_part(), tol)
}

/// `{(u, f - mu u) : (u, f) in S}`.
pub fn shift(s: &LinearRelation, mu: C64, tol: &Tolerances) -> Result<LinearRelation> {
    let u = s.u_part();
    LinearRelation::from_pairs(&s.model, &u, &(s.f_part() - &u * mu), tol)
}

/// Largest distance of a basis vector of `S` from `S*`.
pub fn symmetry_defect(s: &LinearRelation, tol: &Tolerances) -> Result<f64> {
    let a = adjoint(s, tol)?;
    Ok(if s.dim() == 0 { 0.0 } else { a.graph.distance(&s.graph.basis, &s.doubled_gram()) })
}

pub fn is_symmetric(s: &LinearRelation, tol: &Tolerances) -> Result<bool> {
    Ok(symmetry_defect(s, tol)? <= tol.residual_abs)
}

pub fn is_self_adjoint(s: &LinearRelation, tol: &Tolerances) -> Result<bool> {
    adjoint(s, tol)?.equals(s, tol)
}

/// Orthonormal domain basis `W` (Euclidean coordinates) with matching images `F_W`.
struct DomainData {
    w: CMat,
    fw: CMat,
}

fn domain_data(s: &LinearRelation, tol: &Tolerances) -> Result<DomainData> {
    let g = &s.model.gram;
    let ue = g.to_euclid(&s.u_part());
    let fe = g.to_euclid(&s.f_part());
    let w = crate::numeric::range_basis(&ue, tol)?;
    let mut fw = CMat::zeros(s.n(), w.ncols());
    for j in 0..w.ncols() {
        let (coef, _) = least_squares(&ue, &w.column(j).into_owned(), tol);
        fw.set_column(j, &(&fe * coef));
    }
    Ok(DomainData { w, fw })
}

/// Greatest lower bound of `Re <f, u> / |u|^2` over `(u, f) in S`, `u != 0`;
/// `None` when the domain is trivial.
pub fn lower_bound(s: &LinearRelation, tol: &Tolerances) -> Result<Option<f64>> {
    let d = domain_data(s, tol)?;
    if d.w.ncols() == 0 {
        return Ok(None);
    }
    let q = d.fw.adjoint() * &d.w;
    let (vals, _) = crate::numeric::hermitian_eigen(&q);
    Ok(Some(vals[0]))
}

pub fn is_nonnegative(s: &LinearRelation, tol: &Tolerances) -> Result<bool> {
    Ok(lower_bound(s, tol)?.map(|b| b >= -tol.residual_abs).unwrap_or(true))
}

/// Summary of the structural checks on a relation.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct RelationChecks {
    pub symmetric: bool,
    pub self_adjoint: bool,
    pub nonnegative: bool,
    pub lower_bound: Option<f64>,
}

pub fn checks(s: &LinearRelation, tol: &Tolerances) -> Result<RelationChecks> {
    let symmetric = is_symmetric(s, tol)?;
    Ok(RelationChecks {
        symmetric,
        self_adjoint: symmetric && is_self_adjoint(s, tol)?,
        nonnegative: symmetric && is_nonnegative(s, tol)?,
        lower_bound: if symmetric { lower_bound(s, tol)? } else { None },
    })
}

/// Friedrichs extension of a semibounded symmetric relation.
pub fn friedrichs(s: &LinearRelation, tol: &Tolerances) -> Result<LinearRelation> {
    let defect = symmetry_defect(s, tol)?;
    if defect > tol.residual_abs {
        return Err(Error::NotSymmetric { defect });
    }
    let n = s.n();
    let g = &s.model.gram;
    let d = domain_data(s, tol)?;
    let r = d.w.ncols();
    let q = d.fw.adjoint() * &d.w;
    let alpha = if r == 0 { 0.0 } else { crate::numeric::hermitian_eigen(&q).0[0] };
    let k = (&q + q.adjoint()) * c(0.5) + CMat::identity(r, r) * c(1.0 - alpha);
    let kinv = k
        .try_inverse()
        .ok_or_else(|| Error::Consistency("form matrix is singular".into()))?;
    let rmat = &d.w * kinv * d.w.adjoint();
    let u = rmat.clone();
    let f = CMat::identity(n, n) + rmat * c(alpha - 1.0);
    let t = LinearRelation::from_pairs(&s.model, &g.from_euclid(&u), &g.from_euclid(&f), tol)?;
    check_friedrichs_values(s, &t, &d, tol)?;
    Ok(t)
}

/// Every `(x, y)` in the extension has `x in dom S` and `<y, x> = <f, x>` for `(x, f) in S`.
fn check_friedrichs_values(s: &LinearRelation, t: &LinearRelation, d: &DomainData, tol: &Tolerances) -> Result<()> {
    let g = &s.model.gram;
    let xe = g.to_euclid(&t.u_part());
    let ye = g.to_euclid(&t.f_part());
    for j in 0..t.dim() {
        let x = xe.column(j).into_owned();
        let y = ye.column(j).into_owned();
        let (coef, res) = least_squares(&d.w, &x, tol);
        if res > tol.residual_abs * (1.0 + x.norm()) {
            return Err(Error::Consistency("Friedrichs domain leaves the closure of dom S".into()));
        }
        let fx = &d.fw * coef;
        let lhs = y.dotc(&x);
        let rhs = fx.dotc(&x);
        if (lhs - rhs).norm() > tol.residual_abs * (1.0 + y.norm() * x.norm()) {
            return Err(Error::Consistency("Friedrichs form values disagree".into()));
        }
    }
    Ok(())
}

/// Krein-von Neumann extension `((S^{-1})_F)^{-1}` of a nonnegative relation.
pub fn krein_von_neumann(s: &LinearRelation, tol: &Tolerances) -> Result<LinearRelation> {
    let defect = symmetry_defect(s, tol)?;
    if defect > tol.residual_abs {
        return Err(Error::NotSymmetric { defect });
    }
    if let Some(b) = lower_bound(s, tol)? {
        if b < -tol.residual_abs {
            return Err(Error::NotNonnegative { bound: b });
        }
    }
    inverse(&friedrichs(&inverse(s, tol)?, tol)?, tol)
}

/// `{(u, lambda u) in S}`.
pub fn eigen_relation(s: &LinearRelation, lambda: C64, tol: &Tolerances) -> Result<LinearRelation> {
    let g = &s.model.gram;
    let u = s.u_part();
    let f = s.f_part();
    let k = kernel_basis(&g.to_euclid(&(&f - &u * lambda)), tol)?;
    LinearRelation::from_pairs(&s.model, &(&u * &k), &(&f * &k), tol)
}

/// `T_max = T_min + D_i + D_{-i}` with orthogonality data.
#[derive(Debug, Clone, PartialEq)]
pub struct VonNeumann {
    pub d_plus: LinearRelation,
    pub d_minus: LinearRelation,
    pub dim_min: usize,
    pub dim_max: usize,
    /// Largest `|<x, y>|` between unit vectors of different summands.
    pub orthogonality_defect: f64,
    /// Gap between `T_max` and the sum of the three summands.
    pub sum_defect: f64,
}

pub fn von_neumann_decomposition(tmin: &LinearRelation, tmax: &LinearRelation, tol: &Tolerances) -> Result<VonNeumann> {
    if !adjoint(tmin, tol)?.equals(tmax, tol)? {
        return Err(Error::AdjointMismatch);
    }
    let d_plus = eigen_relation(tmax, I, tol)?;
    let d_minus = eigen_relation(tmax, -I, tol)?;
    let g2 = tmax.doubled_gram();
    let parts = [&tmin.graph, &d_plus.graph, &d_minus.graph];
    let mut defect: f64 = 0.0;
    for i in 0..3 {
        for j in (i + 1)..3 {
            if parts[i].dim() > 0 && parts[j].dim() > 0 {
                let m = parts[i].basis.adjoint() * &g2.matrix * &parts[j].basis;
                defect = defect.max(m.iter().map(|z| z.norm()).fold(0.0, f64::max));
            }
        }
    }
    let sum = tmin.sum(&d_plus, tol)?.sum(&d_minus, tol)?;
    let sum_defect = sum.distance(tmax)?;
    Ok(VonNeumann {
        dim_min: tmin.dim(),
        dim_max: tmax.dim(),
        d_plus,
        d_minus,
        orthogonality_defect: defect,
        sum_defect,
    })
}

/// Exact model of a problem whose weight is purely atomic.
///
/// The unknowns `z` are `u^+(a)`, then `(u^+(x_k), f(x_k))` for every atom. The
/// columns of `kernel` span the solutions of the atom equations at `lambda = 0`,
/// i.e. every element of the maximal relation together with its representative.
#[derive(Debug, Clone, PartialEq)]
pub struct AtomicModel {
    pub problem: Problem,
    pub model: HilbertModel,
    pub t_max: LinearRelation,
    pub t_min: LinearRelation,
    pub kernel: CMat,
    /// Class coordinates of `u` and `f` as maps on `z`.
    pub class_u: CMat,
    pub class_f: CMat,
    /// `u^+(a)` and `u^-(b)`.
    pub trace_a: CMat,
    pub trace_b: CMat,
    /// Per atom: balanced value and value of `f`.
    pub atom_u: Vec<CMat>,
    pub atom_f: Vec<CMat>,
}

impl AtomicModel {
    /// Image of `{z in kernel : constraint z = 0}` in `H x H`.
    pub fn restrict(&self, constraint: &CMat, tol: &Tolerances) -> Result<LinearRelation> {
        let m = constraint * &self.kernel;
        let k = if m.nrows() == 0 { CMat::identity(self.kernel.ncols(), self.kernel.ncols()) } else { kernel_basis(&m, tol)? };
        let z = &self.kernel * k;
        LinearRelation::from_pairs(&self.model, &(&self.class_u * &z), &(&self.class_f * &z), tol)
    }

    /// Restriction by rows acting on `(u(a), u(b))`.
    pub fn restrict_by_traces(&self, rows: &CMat, tol: &Tolerances) -> Result<LinearRelation> {
        let mut t = CMat::zeros(4, self.kernel.nrows());
        t.view_mut((0, 0), (2, t.ncols())).copy_from(&self.trace_a);
        t.view_mut((2, 0), (2, t.ncols())).copy_from(&self.trace_b);
        self.restrict(&(rows * t), tol)
    }

    /// Elements whose representatives annihilate the boundary form against every
    /// element of the maximal relation at both ends.
    pub fn closure_by_boundary(&self, tol: &Tolerances) -> Result<LinearRelation> {
        let j = m2_to_dyn(&crate::numeric::jmat());
        let va = crate::numeric::range_basis(&(&self.trace_a * &self.kernel), tol)?;
        let vb = crate::numeric::range_basis(&(&self.trace_b * &self.kernel), tol)?;
        let ra = va.adjoint() * &j * &self.trace_a;
        let rb = vb.adjoint() * &j * &self.trace_b;
        let mut rows = CMat::zeros(ra.nrows() + rb.nrows(), self.kernel.nrows());
        rows.view_mut((0, 0), (ra.nrows(), rows.ncols())).copy_from(&ra);
        rows.view_mut((ra.nrows(), 0), (rb.nrows(), rows.ncols())).copy_from(&rb);
        self.restrict(&rows, tol)
    }
}

/// Builds the maximal and minimal relations of a purely atomic problem in the
/// coordinates `dw^{1/2} u(x_k)` restricted to `ran dw(x_k)`, with unit gram.
pub fn build_atomic(p: &Problem, tol: &Tolerances) -> Result<AtomicModel> {
    crate::problem::require_valid(p)?;
    if p.has_w_density() {
        return Err(Error::HasDensity);
    }
    let na = p.atoms.len();
    let nz = 2 + 4 * na;
    let roots: Vec<Vec<[f64; 2]>> = p.atoms.iter().map(|t| psd_root_rows(&t.dw, tol)).collect();
    let n: usize = roots.iter().map(|r| r.len()).sum();
    let sel = |offset: usize| {
        let mut m = CMat::zeros(2, nz);
        m[(0, offset)] = c(1.0);
        m[(1, offset + 1)] = c(1.0);
        m
    };
    let mut current = sel(0);
    let mut constraints = CMat::zeros(2 * na, nz);
    let mut atom_u = Vec::with_capacity(na);
    let mut atom_f = Vec::with_capacity(na);
    let mut last_unknown = sel(0);
    for piece in &p.pieces {
        let t = m2_to_dyn(&expm2(&piece_generator(&piece.qd, &piece.wd, c(0.0)), piece.to - piece.from));
        current = t * current;
        if let Some(k) = p.atom_index(piece.to) {
            let atom = &p.atoms[k];
            let (bm, bp) = atom_jumps(&atom.dq, &atom.dw, c(0.0));
            let plus = sel(2 + 4 * k);
            let f = sel(4 + 4 * k);
            let row = m2_to_dyn(&bp) * &plus - m2_to_dyn(&bm) * &current - m2_to_dyn(&crate::numeric::to_complex(&atom.dw)) * &f;
            constraints.view_mut((2 * k, 0), (2, nz)).copy_from(&row);
            atom_u.push((&current + &plus) * c(0.5));
            atom_f.push(f);
            current = plus.clone();
            last_unknown = plus;
        }
    }
    let trace_b = current;
    let trace_a = sel(0);
    let mut class_u = CMat::zeros(n, nz);
    let mut class_f = CMat::zeros(n, nz);
    let mut row = 0;
    for (k, rs) in roots.iter().enumerate() {
        for r in rs {
            let w = CMat::from_row_slice(1, 2, &[c(r[0]), c(r[1])]);
            class_u.set_row(row, &(&w * &atom_u[k]).row(0));
            class_f.set_row(row, &(&w * &atom_f[k]).row(0));
            row += 1;
        }
    }
    let kernel = if na == 0 { CMat::identity(nz, nz) } else { kernel_basis(&constraints, tol)? };
    let model = HilbertModel::euclidean(n);
    let mut am = AtomicModel {
        problem: p.clone(),
        t_max: LinearRelation::zero(&model),
        t_min: LinearRelation::zero(&model),
        model,
        kernel,
        class_u,
        class_f,
        trace_a,
        trace_b,
        atom_u,
        atom_f,
    };
    am.t_max = am.restrict(&CMat::zeros(0, nz), tol)?;
    let mut compact = CMat::zeros(4, nz);
    compact.view_mut((0, 0), (2, nz)).copy_from(&am.trace_a);
    compact.view_mut((2, 0), (2, nz)).copy_from(&last_unknown);
    am.t_min = am.restrict(&compact, tol)?;
    Ok(am)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::RM2;
    use crate::problem::Atom;

    fn rel(n: usize, u: &[&[f64]], f: &[&[f64]]) -> LinearRelation {
        let m = HilbertModel::euclidean(n);
        let k = u.len();
        let um = CMat::from_fn(n, k, |i, j| c(u[j][i]));
        let fm = CMat::from_fn(n, k, |i, j| c(f[j][i]));
        LinearRelation::from_pairs(&m, &um, &fm, &Tolerances::default()).unwrap()
    }

    #[test]
    fn friedrichs_examples() {
        let t = Tolerances::default();
        let m = HilbertModel::euclidean(2);
        let s0 = LinearRelation::zero(&m);
        let f0 = friedrichs(&s0, &t).unwrap();
        assert!(f0.equals(&LinearRelation::multivalued_all(&m, &t).unwrap(), &t).unwrap());
        let s1 = rel(2, &[&[1.0, 0.0]], &[&[1.0, 0.0]]);
        let f1 = friedrichs(&s1, &t).unwrap();
        let expected = rel(2, &[&[1.0, 0.0], &[0.0, 0.0]], &[&[1.0, 0.0], &[0.0, 1.0]]);
        assert!(f1.equals(&expected, &t).unwrap());
    }

    #[test]
    fn kvn_examples() {
        let t = Tolerances::default();
        let m = HilbertModel::euclidean(2);
        let k0 = krein_von_neumann(&LinearRelation::zero(&m), &t).unwrap();
        assert!(k0.equals(&LinearRelation::zero_operator(&m, &t).unwrap(), &t).unwrap());
        let s1 = rel(2, &[&[1.0, 0.0]], &[&[1.0, 0.0]]);
        let k1 = krein_von_neumann(&s1, &t).unwrap();
        let diag = CMat::from_diagonal(&CVec::from_vec(vec![c(1.0), c(0.0)]));
        assert!(k1.equals(&LinearRelation::graph_of(&m, &diag, &t).unwrap(), &t).unwrap());
    }

    #[test]
    fn negative_relation_rejected() {
        let t = Tolerances::default();
        let s = rel(2, &[&[1.0, 0.0]], &[&[-1.0, 0.0]]);
        assert!(matches!(krein_von_neumann(&s, &t), Err(Error::NotNonnegative { .. })));
        let m = HilbertModel::euclidean(2);
        let e1 = CMat::from_column_slice(2, 1, &[c(1.0), c(0.0)]);
        let ns = LinearRelation::from_pairs(&m, &e1, &(&e1 * I), &t).unwrap();
        assert!(matches!(friedrichs(&ns, &t), Err(Error::NotSymmetric { .. })));
    }

    #[test]
    fn adjoint_dimension_and_involution() {
        let t = Tolerances::default();
        let s = rel(3, &[&[1.0, 0.0, 2.0], &[0.0, 1.0, 0.0]], &[&[0.0, 1.0, 0.0], &[1.0, 1.0, 1.0]]);
        let a = adjoint(&s, &t).unwrap();
        assert_eq!(s.dim() + a.dim(), 6);
        assert!(adjoint(&a, &t).unwrap().equals(&s, &t).unwrap());
    }

    #[test]
    fn weighted_model_adjoint() {
        let t = Tolerances::default();
        let g = Gram::new(CMat::from_fn(2, 2, |i, j| c(if i == j { 2.0 + i as f64 } else { 0.5 }))).unwrap();
        let m = HilbertModel { gram: g.clone() };
        let a = CMat::from_fn(2, 2, |i, j| c((i + 2 * j) as f64));
        let s = LinearRelation::graph_of(&m, &a, &t).unwrap();
        let adj = adjoint(&s, &t).unwrap();
        // adjoint of a matrix in the weighted product is G^{-1} A* G
        let ginv = g.matrix.clone().try_inverse().unwrap();
        let expected = LinearRelation::graph_of(&m, &(ginv * a.adjoint() * &g.matrix), &t).unwrap();
        assert!(adj.equals(&expected, &t).unwrap());
    }

    #[test]
    fn single_mass_relations() {
        let t = Tolerances::default();
        let p = Problem::atomic(-2.0, 2.0, vec![Atom { x: 0.0, dq: RM2::zeros(), dw: RM2::identity() * 2.0 }]);
        let am = build_atomic(&p, &t).unwrap();
        assert_eq!(am.model.dim(), 2);
        assert_eq!(am.t_max.dim(), 4);
        assert_eq!(am.t_min.dim(), 0);
        let f = friedrichs(&am.t_min, &t).unwrap();
        assert!(f.equals(&LinearRelation::multivalued_all(&am.model, &t).unwrap(), &t).unwrap());
    }

    #[test]
    fn two_mass_minimal_relation() {
        let t = Tolerances::default();
        let p = Problem::atomic(
            -2.0,
            2.0,
            vec![
                Atom { x: 0.0, dq: RM2::zeros(), dw: RM2::identity() * 2.0 },
                Atom { x: 1.0, dq: RM2::zeros(), dw: RM2::identity() * 2.0 },
            ],
        );
        let am = build_atomic(&p, &t).unwrap();
        assert_eq!(am.t_min.dim(), 2);
        let j = crate::numeric::jmat();
        let s2 = c(2f64.sqrt());
        let mut u = CMat::zeros(4, 2);
        let mut f = CMat::zeros(4, 2);
        for k in 0..2 {
            let mut um = crate::numeric::V2::zeros();
            um[k] = c(1.0);
            let ju = j * um;
            for r in 0..2 {
                u[(r, k)] = um[r] * s2 * 0.5;
                u[(2 + r, k)] = um[r] * s2 * 0.5;
                f[(r, k)] = ju[r] * s2 * 0.5;
                f[(2 + r, k)] = -ju[r] * s2 * 0.5;
            }
        }
        let expected = LinearRelation::from_pairs(&am.model, &u, &f, &t).unwrap();
        assert!(am.t_min.equals(&expected, &t).unwrap());
        assert!(adjoint(&am.t_min, &t).unwrap().equals(&am.t_max, &t).unwrap());
        assert!(am.closure_by_boundary(&t).unwrap().equals(&am.t_min, &t).unwrap());
    }

    #[test]
    fn density_rejected() {
        let t = Tolerances::default();
        let p = Problem::new(0.0, 1.0, vec![], &[], &[crate::problem::DensitySpec { from: 0.0, to: 1.0, m: RM2::identity() }]);
        assert_eq!(build_atomic(&p, &t).unwrap_err(), Error::HasDensity);
    }

    #[test]
    fn von_neumann_on_single_mass() {
        let t = Tolerances::default();
        let p = Problem::atomic(-2.0, 2.0, vec![Atom { x: 0.0, dq: RM2::zeros(), dw: RM2::identity() * 2.0 }]);
        let am = build_atomic(&p, &t).unwrap();
        let vn = von_neumann_decomposition(&am.t_min, &am.t_max, &t).unwrap();
        assert_eq!((vn.d_plus.dim(), vn.d_minus.dim()), (2, 2));
        assert!(vn.orthogonality_defect < 1e-12);
        assert!(vn.sum_defect < 1e-12);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn cmat(rows: usize, cols: usize) -> impl Strategy<Value = CMat> {
            proptest::collection::vec((-2.0f64..2.0, -2.0f64..2.0), rows * cols)
                .prop_map(move |v| CMat::from_fn(rows, cols, |i, j| C64::new(v[i * cols + j].0, v[i * cols + j].1)))
        }

        fn relation() -> impl Strategy<Value = LinearRelation> {
            (0usize..=4).prop_flat_map(|k| (cmat(3, k), cmat(3, k))).prop_map(|(u, f)| {
                LinearRelation::from_pairs(&HilbertModel::euclidean(3), &u, &f, &Tolerances::default()).unwrap()
            })
        }

        /// `{(u, P u)}` on a random subspace with `P` positive semidefinite.
        fn nonnegative() -> impl Strategy<Value = LinearRelation> {
            (0usize..=3, cmat(3, 3)).prop_flat_map(|(k, a)| (cmat(3, k), Just(a))).prop_map(|(u, a)| {
                let pmat = &a * a.adjoint();
                LinearRelation::from_pairs(&HilbertModel::euclidean(3), &u, &(pmat * &u), &Tolerances::default()).unwrap()
            })
        }

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(64))]

            #[test]
            fn adjoint_is_involution(s in relation()) {
                let t = Tolerances::default();
                let a = adjoint(&s, &t).unwrap();
                prop_assert_eq!(a.dim() + s.dim(), 6);
                prop_assert!(adjoint(&a, &t).unwrap().equals(&s, &t).unwrap());
            }

            #[test]
            fn real_shift_commutes_with_adjoint(s in relation(), mu in -3.0f64..3.0) {
                let t = Tolerances::default();
                let lhs = adjoint(&shift(&s, c(mu), &t).unwrap(), &t).unwrap();
                let rhs = shift(&adjoint(&s, &t).unwrap(), c(mu), &t).unwrap();
                prop_assert!(lhs.equals(&rhs, &t).unwrap());
            }

            #[test]
            fn extensions_of_nonnegative_relations(s in nonnegative()) {
                let t = Tolerances::default();
                let fr = friedrichs(&s, &t).unwrap();
                let kvn = krein_von_neumann(&s, &t).unwrap();
                for e in [&fr, &kvn] {
                    prop_assert!(is_self_adjoint(e, &t).unwrap());
                    prop_assert!(e.includes(&s, &t));
                }
                let sa = adjoint(&s, &t).unwrap();
                let ker = sa.kernel(&t).unwrap();
                for j in 0..ker.basis.ncols() {
                    let u = ker.basis.column(j).into_owned();
                    prop_assert!(kvn.contains_pair(&u, &CVec::zeros(3), &t));
                }
            }
        }
    }
}
