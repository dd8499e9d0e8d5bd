//! Problem description: interval, point masses and piecewise-constant densities,
//! jump matrices at atoms, and the singular set of each atom.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::{c, jmat, kernel_basis, m2_to_dyn, numeric_rank, range_basis, rnorm2, to_complex, CMat, Tolerances, C64, M2, RM2};

/// Point mass of `q` and `w` at `x`.
#[derive(Debug, Clone, PartialEq)]
pub struct Atom {
    pub x: f64,
    pub dq: RM2,
    pub dw: RM2,
}

/// Constant densities `qd`, `wd` on `(from, to)`.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityPiece {
    pub from: f64,
    pub to: f64,
    pub qd: RM2,
    pub wd: RM2,
}

/// Canonical system `J u' + (q - lambda w) u = w f` on `(a, b)`.
///
/// Pieces tile `(a, b)` in order and every atom sits on a piece boundary.
#[derive(Debug, Clone, PartialEq)]
pub struct Problem {
    pub a: f64,
    pub b: f64,
    pub atoms: Vec<Atom>,
    pub pieces: Vec<DensityPiece>,
}

/// Density given on a subinterval, added to whatever else covers it.
#[derive(Debug, Clone, PartialEq)]
pub struct DensitySpec {
    pub from: f64,
    pub to: f64,
    pub m: RM2,
}

impl Problem {
    /// Builds the piece partition from atoms and density supports.
    pub fn new(
        a: f64,
        b: f64,
        atoms: Vec<Atom>,
        q_density: &[DensitySpec],
        w_density: &[DensitySpec],
    ) -> Problem {
        let mut atoms = atoms;
        atoms.sort_by(|u, v| u.x.partial_cmp(&v.x).unwrap_or(std::cmp::Ordering::Equal));
        let mut cuts = vec![a, b];
        cuts.extend(atoms.iter().map(|t| t.x));
        for d in q_density.iter().chain(w_density) {
            cuts.push(d.from);
            cuts.push(d.to);
        }
        cuts.retain(|x| x.is_finite() && *x >= a && *x <= b);
        cuts.sort_by(|u, v| u.partial_cmp(v).unwrap());
        cuts.dedup();
        let mut pieces = Vec::new();
        for w in cuts.windows(2) {
            let mid = 0.5 * (w[0] + w[1]);
            let sum = |ds: &[DensitySpec]| {
                ds.iter()
                    .filter(|d| d.from <= mid && mid <= d.to)
                    .fold(RM2::zeros(), |acc, d| acc + d.m)
            };
            pieces.push(DensityPiece {
                from: w[0],
                to: w[1],
                qd: sum(q_density),
                wd: sum(w_density),
            });
        }
        Problem { a, b, atoms, pieces }
    }

    pub fn atomic(a: f64, b: f64, atoms: Vec<Atom>) -> Problem {
        Problem::new(a, b, atoms, &[], &[])
    }

    pub fn has_w_density(&self) -> bool {
        self.pieces.iter().any(|p| p.wd.norm() > 0.0)
    }

    /// Index of the piece containing `x` in its closure, preferring the one to the right.
    pub fn piece_index(&self, x: f64) -> Option<usize> {
        self.pieces
            .iter()
            .position(|p| p.from <= x && x < p.to)
            .or_else(|| {
                if x == self.b {
                    Some(self.pieces.len() - 1)
                } else {
                    None
                }
            })
    }

    pub fn atom_index(&self, x: f64) -> Option<usize> {
        self.atoms.iter().position(|t| t.x == x)
    }

    /// Same problem with extra piece boundaries inserted.
    pub fn refined(&self, points: &[f64]) -> Problem {
        let mut pieces = Vec::new();
        for p in &self.pieces {
            let mut cuts: Vec<f64> = points
                .iter()
                .cloned()
                .filter(|x| *x > p.from && *x < p.to)
                .collect();
            cuts.sort_by(|u, v| u.partial_cmp(v).unwrap());
            cuts.dedup();
            let mut start = p.from;
            for x in cuts.into_iter().chain(std::iter::once(p.to)) {
                pieces.push(DensityPiece {
                    from: start,
                    to: x,
                    qd: p.qd,
                    wd: p.wd,
                });
                start = x;
            }
        }
        Problem {
            a: self.a,
            b: self.b,
            atoms: self.atoms.clone(),
            pieces,
        }
    }

    /// Restriction to `(lo, hi)`; atoms at `lo` or `hi` are dropped.
    pub fn restricted(&self, lo: f64, hi: f64) -> Problem {
        let atoms = self
            .atoms
            .iter()
            .filter(|t| t.x > lo && t.x < hi)
            .cloned()
            .collect();
        let pieces = self
            .pieces
            .iter()
            .filter(|p| p.to > lo && p.from < hi)
            .map(|p| DensityPiece {
                from: p.from.max(lo),
                to: p.to.min(hi),
                qd: p.qd,
                wd: p.wd,
            })
            .collect();
        Problem {
            a: lo,
            b: hi,
            atoms,
            pieces,
        }
    }
}

/// Report of everything wrong with a problem; empty when valid.
#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct ValidationReport {
    pub violations: Vec<String>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

fn check_sym_psd(m: &RM2, what: &str, psd: bool, out: &mut Vec<String>) {
    if m.iter().any(|v| !v.is_finite()) {
        out.push(format!("{what} has non-finite entries"));
        return;
    }
    let scale = 1.0 + m.norm();
    if (m[(0, 1)] - m[(1, 0)]).abs() > 1e-12 * scale {
        out.push(format!("{what} is not symmetric"));
        return;
    }
    if psd {
        let ev = m.symmetric_eigen().eigenvalues;
        if ev.iter().any(|&l| l < -1e-12 * scale) {
            out.push(format!("{what} is not positive semidefinite"));
        }
    }
}

pub fn validate_problem(p: &Problem) -> ValidationReport {
    let mut v = Vec::new();
    if !(p.a.is_finite() && p.b.is_finite()) {
        v.push("interval endpoints must be finite".to_string());
    } else if p.a >= p.b {
        v.push(format!("empty interval ({}, {})", p.a, p.b));
    }
    for (k, t) in p.atoms.iter().enumerate() {
        if !(t.x > p.a && t.x < p.b) {
            v.push(format!("atom {k} at {} is not inside ({}, {})", t.x, p.a, p.b));
        }
        if k > 0 && p.atoms[k - 1].x >= t.x {
            v.push(format!("atoms {} and {k} are not strictly increasing", k - 1));
        }
        check_sym_psd(&t.dq, &format!("dq of atom {k}"), false, &mut v);
        check_sym_psd(&t.dw, &format!("dw of atom {k}"), true, &mut v);
    }
    if p.pieces.is_empty() {
        v.push("no density pieces".to_string());
    } else {
        if p.pieces[0].from != p.a || p.pieces[p.pieces.len() - 1].to != p.b {
            v.push("pieces do not cover the interval".to_string());
        }
        for (k, piece) in p.pieces.iter().enumerate() {
            if !(piece.from < piece.to) {
                v.push(format!("piece {k} is empty"));
            }
            if k > 0 && p.pieces[k - 1].to != piece.from {
                v.push(format!("pieces {} and {k} are not contiguous", k - 1));
            }
            check_sym_psd(&piece.qd, &format!("qd of piece {k}"), false, &mut v);
            check_sym_psd(&piece.wd, &format!("wd of piece {k}"), true, &mut v);
        }
        for (k, t) in p.atoms.iter().enumerate() {
            if !p.pieces.iter().any(|piece| piece.to == t.x) {
                v.push(format!("atom {k} is not on a piece boundary"));
            }
        }
    }
    ValidationReport { violations: v }
}

/// Validation as a `Result`.
pub fn require_valid(p: &Problem) -> Result<()> {
    let r = validate_problem(p);
    if r.is_valid() {
        Ok(())
    } else {
        Err(Error::InvalidProblem(r.violations.join("; ")))
    }
}

/// `(B_-, B_+)` for given point masses.
pub fn atom_jumps(dq: &RM2, dw: &RM2, lambda: C64) -> (M2, M2) {
    let half = (to_complex(dq) - to_complex(dw) * lambda) * c(0.5);
    (jmat() - half, jmat() + half)
}

/// `(B_-(x, lambda), B_+(x, lambda))`; zero masses away from atoms.
pub fn jump_matrices(p: &Problem, x: f64, lambda: C64) -> Result<(M2, M2)> {
    if !(x > p.a && x < p.b) {
        return Err(Error::InvalidInput(format!(
            "point {x} is not inside ({}, {})",
            p.a, p.b
        )));
    }
    Ok(match p.atom_index(x) {
        Some(k) => atom_jumps(&p.atoms[k].dq, &p.atoms[k].dw, lambda),
        None => (jmat(), jmat()),
    })
}

/// Which side of a really bad point carries the boundary condition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Branch {
    PlusSide,
    MinusSide,
    Either,
}

#[derive(Debug, Clone, PartialEq)]
pub enum RootSet {
    Finite(Vec<C64>),
    All,
}

/// Zeros of `lambda -> det B_+(x, lambda)`.
#[derive(Debug, Clone, PartialEq)]
pub struct AtomSpectrum {
    pub x: f64,
    pub roots: RootSet,
    pub really_bad: bool,
    pub branch: Option<Branch>,
}

impl AtomSpectrum {
    pub fn contains(&self, lambda: C64, tol: &Tolerances) -> bool {
        match &self.roots {
            RootSet::All => true,
            RootSet::Finite(r) => r.iter().any(|z| (z - lambda).norm() <= tol.root_abs * (1.0 + z.norm())),
        }
    }
}

fn det_real(m: &RM2) -> f64 {
    m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)]
}

/// Coefficients `(c0, c1, c2)` of `det B_+(x, lambda)`.
pub fn det_coefficients(atom: &Atom) -> [f64; 3] {
    let j = RM2::new(0.0, -1.0, 1.0, 0.0);
    let d = |l: f64| det_real(&(j + (atom.dq - atom.dw * l) * 0.5));
    let (d0, d1, dm) = (d(0.0), d(1.0), d(-1.0));
    [d0, 0.5 * (d1 - dm), 0.5 * (d1 + dm) - d0]
}

fn ran_subset(sub: &CMat, sup: &CMat, tol: &Tolerances) -> bool {
    let basis = range_basis(sup, tol).unwrap_or_else(|_| CMat::zeros(2, 0));
    let proj = &basis * (basis.adjoint() * sub);
    (sub - proj).norm() <= tol.residual_abs * (1.0 + sub.norm())
}

pub fn spectrum_of_atom(atom: &Atom, tol: &Tolerances) -> AtomSpectrum {
    let [c0, c1, c2] = det_coefficients(atom);
    let scale = tol.residual_abs * (1.0 + rnorm2(&atom.dq) + rnorm2(&atom.dw));
    let (roots, really_bad) = if c0.abs() <= scale && c1.abs() <= scale && c2.abs() <= scale {
        (RootSet::All, true)
    } else if c2.abs() > scale {
        let disc = C64::new(c1 * c1 - 4.0 * c2 * c0, 0.0).sqrt();
        let sign = if c1 >= 0.0 { 1.0 } else { -1.0 };
        let qq = (c(c1) + disc * sign) * -0.5;
        let r1 = qq / c2;
        let r2 = if qq.norm() > 0.0 { c(c0) / qq } else { r1 };
        (RootSet::Finite(vec![r1, r2]), false)
    } else if c1.abs() > scale {
        (RootSet::Finite(vec![c(-c0 / c1)]), false)
    } else {
        (RootSet::Finite(Vec::new()), false)
    };
    let branch = if really_bad {
        let dw = m2_to_dyn(&to_complex(&atom.dw));
        if atom.dw.norm() <= tol.residual_abs {
            Some(Branch::Either)
        } else {
            let (bm, bp) = atom_jumps(&atom.dq, &atom.dw, c(0.0));
            if ran_subset(&dw, &m2_to_dyn(&bp), tol) {
                Some(Branch::PlusSide)
            } else if ran_subset(&dw, &m2_to_dyn(&bm), tol) {
                Some(Branch::MinusSide)
            } else {
                None
            }
        }
    } else {
        None
    };
    AtomSpectrum {
        x: atom.x,
        roots,
        really_bad,
        branch,
    }
}

pub fn atom_spectrum(p: &Problem, x: f64, tol: &Tolerances) -> Result<AtomSpectrum> {
    let k = p
        .atom_index(x)
        .ok_or_else(|| Error::InvalidInput(format!("no atom at {x}")))?;
    Ok(spectrum_of_atom(&p.atoms[k], tol))
}

/// True when `B_+(x, lambda)` fails to be invertible.
pub fn atom_singular_at(atom: &Atom, lambda: C64, tol: &Tolerances) -> bool {
    let s = spectrum_of_atom(atom, tol);
    if s.contains(lambda, tol) {
        return true;
    }
    let (_, bp) = atom_jumps(&atom.dq, &atom.dw, lambda);
    numeric_rank(&m2_to_dyn(&bp), tol).map(|r| r < 2).unwrap_or(true)
}

/// Indices of atoms where `lambda` lies in the singular set.
pub fn xi_set(p: &Problem, lambda: C64, tol: &Tolerances) -> Vec<usize> {
    (0..p.atoms.len())
        .filter(|&k| atom_singular_at(&p.atoms[k], lambda, tol))
        .collect()
}

pub fn really_bad_atoms(p: &Problem, tol: &Tolerances) -> Vec<usize> {
    (0..p.atoms.len())
        .filter(|&k| spectrum_of_atom(&p.atoms[k], tol).really_bad)
        .collect()
}

/// Which trace at the split point is constrained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Trace {
    Minus,
    Plus,
}

/// `u^trace(x)` must lie in `span{kernel}`.
#[derive(Debug, Clone, PartialEq)]
pub struct EndpointCondition {
    pub x: f64,
    pub trace: Trace,
    pub kernel: [C64; 2],
}

/// One side of a split problem.
#[derive(Debug, Clone, PartialEq)]
pub struct SubProblem {
    pub problem: Problem,
    pub condition: Option<EndpointCondition>,
    /// Point mass at the split point, when it belongs to this side.
    pub endpoint_atom: Option<Atom>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Split {
    pub left: SubProblem,
    pub right: SubProblem,
    pub side: Branch,
}

fn kernel_vector(m: &M2, tol: &Tolerances) -> [C64; 2] {
    let k = kernel_basis(&m2_to_dyn(m), tol).expect("finite matrix");
    [k[(0, 0)], k[(1, 0)]]
}

/// Decomposes the problem at a really bad point.
pub fn split_at_really_bad(p: &Problem, x1: f64, tol: &Tolerances) -> Result<Split> {
    let k = p
        .atom_index(x1)
        .ok_or(Error::NotReallyBad { x: x1 })?;
    let atom = &p.atoms[k];
    let spec = spectrum_of_atom(atom, tol);
    if !spec.really_bad {
        return Err(Error::NotReallyBad { x: x1 });
    }
    let side = spec.branch.ok_or_else(|| {
        Error::Consistency(format!("really bad point {x1} has no range inclusion"))
    })?;
    let (bm, bp) = atom_jumps(&atom.dq, &atom.dw, c(0.0));
    let minus_cond = EndpointCondition {
        x: x1,
        trace: Trace::Minus,
        kernel: kernel_vector(&bm, tol),
    };
    let plus_cond = EndpointCondition {
        x: x1,
        trace: Trace::Plus,
        kernel: kernel_vector(&bp, tol),
    };
    let lp = p.restricted(p.a, x1);
    let rp = p.restricted(x1, p.b);
    let (left, right) = match side {
        Branch::PlusSide => (
            SubProblem { problem: lp, condition: Some(minus_cond), endpoint_atom: None },
            SubProblem { problem: rp, condition: None, endpoint_atom: Some(atom.clone()) },
        ),
        Branch::MinusSide => (
            SubProblem { problem: lp, condition: None, endpoint_atom: Some(atom.clone()) },
            SubProblem { problem: rp, condition: Some(plus_cond), endpoint_atom: None },
        ),
        Branch::Either => (
            SubProblem { problem: lp, condition: Some(minus_cond), endpoint_atom: None },
            SubProblem { problem: rp, condition: Some(plus_cond), endpoint_atom: None },
        ),
    };
    Ok(Split { left, right, side })
}

/// Right-hand side `f`: one value per piece and one per atom.
#[derive(Debug, Clone, PartialEq)]
pub struct SourceTerm {
    pub piece_values: Vec<crate::numeric::V2>,
    pub atom_values: Vec<crate::numeric::V2>,
}

impl SourceTerm {
    pub fn zero(p: &Problem) -> SourceTerm {
        SourceTerm {
            piece_values: vec![crate::numeric::V2::zeros(); p.pieces.len()],
            atom_values: vec![crate::numeric::V2::zeros(); p.atoms.len()],
        }
    }

    pub fn is_zero(&self) -> bool {
        self.piece_values.iter().chain(&self.atom_values).all(|v| v.norm() == 0.0)
    }

    pub fn scaled(&self, s: C64) -> SourceTerm {
        SourceTerm {
            piece_values: self.piece_values.iter().map(|v| v * s).collect(),
            atom_values: self.atom_values.iter().map(|v| v * s).collect(),
        }
    }

    pub fn add(&self, other: &SourceTerm) -> SourceTerm {
        SourceTerm {
            piece_values: self.piece_values.iter().zip(&other.piece_values).map(|(a, b)| a + b).collect(),
            atom_values: self.atom_values.iter().zip(&other.atom_values).map(|(a, b)| a + b).collect(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct AtomJson {
    x: f64,
    dq: [[f64; 2]; 2],
    dw: [[f64; 2]; 2],
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct DensityJson {
    from: f64,
    to: f64,
    m: [[f64; 2]; 2],
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct ProblemJson {
    interval: [f64; 2],
    #[serde(default)]
    atoms: Vec<AtomJson>,
    #[serde(default)]
    q_density: Vec<DensityJson>,
    #[serde(default)]
    w_density: Vec<DensityJson>,
}

fn from_rows(r: &[[f64; 2]; 2]) -> RM2 {
    RM2::new(r[0][0], r[0][1], r[1][0], r[1][1])
}

fn to_rows(m: &RM2) -> [[f64; 2]; 2] {
    [[m[(0, 0)], m[(0, 1)]], [m[(1, 0)], m[(1, 1)]]]
}

/// Parses the JSON problem format. Validation is left to the caller.
pub fn problem_from_json(s: &str) -> Result<Problem> {
    let j: ProblemJson =
        serde_json::from_str(s).map_err(|e| Error::InvalidInput(format!("problem JSON: {e}")))?;
    let atoms = j
        .atoms
        .iter()
        .map(|t| Atom { x: t.x, dq: from_rows(&t.dq), dw: from_rows(&t.dw) })
        .collect();
    let conv = |v: &[DensityJson]| -> Vec<DensitySpec> {
        v.iter()
            .map(|d| DensitySpec { from: d.from, to: d.to, m: from_rows(&d.m) })
            .collect()
    };
    Ok(Problem::new(
        j.interval[0],
        j.interval[1],
        atoms,
        &conv(&j.q_density),
        &conv(&j.w_density),
    ))
}

pub fn problem_to_json(p: &Problem) -> serde_json::Value {
    let dens = |f: &dyn Fn(&DensityPiece) -> RM2| -> Vec<DensityJson> {
        p.pieces
            .iter()
            .filter(|d| f(d).norm() > 0.0)
            .map(|d| DensityJson { from: d.from, to: d.to, m: to_rows(&f(d)) })
            .collect()
    };
    let j = ProblemJson {
        interval: [p.a, p.b],
        atoms: p
            .atoms
            .iter()
            .map(|t| AtomJson { x: t.x, dq: to_rows(&t.dq), dw: to_rows(&t.dw) })
            .collect(),
        q_density: dens(&|d| d.qd),
        w_density: dens(&|d| d.wd),
    };
    serde_json::to_value(j).expect("serializable")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::I;

    fn delta_atom(dw: RM2) -> Atom {
        Atom { x: 0.0, dq: RM2::new(0.0, 2.0, 2.0, 0.0), dw }
    }

    fn close(a: &M2, b: [[f64; 2]; 2]) -> bool {
        let m = M2::new(c(b[0][0]), c(b[0][1]), c(b[1][0]), c(b[1][1]));
        (a - m).norm() < 1e-14
    }

    #[test]
    fn jumps_of_delta_coupling() {
        let p = Problem::atomic(-1.0, 1.0, vec![delta_atom(RM2::identity() * 2.0)]);
        let (bm, bp) = jump_matrices(&p, 0.0, c(0.0)).unwrap();
        assert!(close(&bp, [[0.0, 0.0], [2.0, 0.0]]));
        assert!(close(&bm, [[0.0, -2.0], [0.0, 0.0]]));
        let (_, bp1) = jump_matrices(&p, 0.0, c(1.0)).unwrap();
        assert!(close(&bp1, [[-1.0, 0.0], [2.0, -1.0]]));
        assert!(matches!(jump_matrices(&p, 1.0, c(0.0)), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn spectra_examples() {
        let t = Tolerances::default();
        let s = spectrum_of_atom(&delta_atom(RM2::identity() * 2.0), &t);
        match s.roots {
            RootSet::Finite(r) => {
                assert_eq!(r.len(), 2);
                assert!(r.iter().all(|z| z.norm() < 1e-12));
            }
            RootSet::All => panic!("not really bad"),
        }
        let s = spectrum_of_atom(&delta_atom(RM2::new(0.0, 0.0, 0.0, 1.0)), &t);
        assert!(s.really_bad);
        assert_eq!(s.roots, RootSet::All);
        assert_eq!(s.branch, Some(Branch::PlusSide));
        let s = spectrum_of_atom(
            &Atom { x: 0.0, dq: RM2::zeros(), dw: RM2::identity() * 2.0 },
            &t,
        );
        match s.roots {
            RootSet::Finite(r) => {
                assert_eq!(r.len(), 2);
                assert!(r.iter().any(|z| (z - I).norm() < 1e-12));
                assert!(r.iter().any(|z| (z + I).norm() < 1e-12));
            }
            RootSet::All => panic!(),
        }
    }

    #[test]
    fn partition_from_densities() {
        let p = Problem::new(
            0.0,
            3.0,
            vec![Atom { x: 1.0, dq: RM2::zeros(), dw: RM2::identity() }],
            &[DensitySpec { from: 0.5, to: 2.0, m: RM2::identity() }],
            &[],
        );
        let cuts: Vec<f64> = p.pieces.iter().map(|d| d.from).collect();
        assert_eq!(cuts, vec![0.0, 0.5, 1.0, 2.0]);
        assert_eq!(p.pieces[0].qd, RM2::zeros());
        assert_eq!(p.pieces[2].qd, RM2::identity());
        assert!(validate_problem(&p).is_valid());
    }

    #[test]
    fn validation_lists_violations() {
        let mut p = Problem::atomic(0.0, 1.0, vec![Atom { x: 0.5, dq: RM2::zeros(), dw: RM2::new(1.0, 0.0, 0.0, -1.0) }]);
        p.atoms.push(Atom { x: 2.0, dq: RM2::new(0.0, 1.0, 0.0, 0.0), dw: RM2::zeros() });
        let r = validate_problem(&p);
        assert!(r.violations.len() >= 3, "{:?}", r.violations);
    }

    #[test]
    fn json_round_trip() {
        let s = r#"{"interval":[0,1],"q_density":[{"from":0,"to":1,"m":[[0,0],[0,-1]]}]}"#;
        let p = problem_from_json(s).unwrap();
        assert_eq!(p.pieces.len(), 1);
        assert_eq!(p.pieces[0].qd[(1, 1)], -1.0);
        assert_eq!(p.pieces[0].wd, RM2::zeros());
        let back = problem_from_json(&problem_to_json(&p).to_string()).unwrap();
        assert_eq!(back, p);
    }

    #[test]
    fn split_sides() {
        let t = Tolerances::default();
        let p = Problem::atomic(-1.0, 1.0, vec![delta_atom(RM2::new(0.0, 0.0, 0.0, 1.0))]);
        let s = split_at_really_bad(&p, 0.0, &t).unwrap();
        assert_eq!(s.side, Branch::PlusSide);
        let cond = s.left.condition.unwrap();
        assert_eq!(cond.trace, Trace::Minus);
        assert!(cond.kernel[1].norm() < 1e-14);
        assert!(s.right.endpoint_atom.is_some());
        assert_eq!(s.left.problem.b, 0.0);
        let q = Problem::atomic(-1.0, 1.0, vec![delta_atom(RM2::identity() * 2.0)]);
        assert_eq!(split_at_really_bad(&q, 0.0, &t), Err(Error::NotReallyBad { x: 0.0 }));
    }
}
