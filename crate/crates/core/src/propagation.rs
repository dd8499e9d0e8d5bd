//! Piecewise solutions: exact propagation on density pieces, atom crossings,
//! fundamental matrices, variation of constants, the w-inner product and the
//! Lagrange identity.

use crate::error::{Error, Result};
use crate::numeric::{c, jmat, m2_to_dyn, numeric_rank, solve_affine, to_complex, v2_to_dyn, Tolerances, C64, M2, V2};
use crate::problem::{atom_jumps, Atom, Problem, SourceTerm};

/// `exp(g t)` for a 2x2 matrix in closed form.
pub fn expm2(g: &M2, t: f64) -> M2 {
    let a = g * c(t);
    let sigma = (a[(0, 0)] + a[(1, 1)]) * 0.5;
    let n = a - M2::identity() * sigma;
    let delta = -(n[(0, 0)] * n[(1, 1)] - n[(0, 1)] * n[(1, 0)]);
    let (ch, sh) = if delta.norm() < 1e-2 {
        let mut ch = c(0.0);
        let mut sh = c(0.0);
        let mut term = c(1.0);
        for k in 0..12 {
            let k2 = 2 * k as u32;
            ch += term / factorial(k2);
            sh += term / factorial(k2 + 1);
            term *= delta;
        }
        (ch, sh)
    } else {
        let r = delta.sqrt();
        (r.cosh(), r.sinh() / r)
    };
    (M2::identity() * ch + n * sh) * sigma.exp()
}

fn factorial(n: u32) -> f64 {
    (1..=n).fold(1.0, |acc, k| acc * k as f64)
}

/// `integral_0^t exp(g s) ds`, by a Taylor series on a short step followed by doubling.
pub fn phi1(g: &M2, t: f64) -> M2 {
    let norm = g.norm() * t.abs();
    let mut m = 0;
    while norm / f64::powi(2.0, m) > 0.5 {
        m += 1;
    }
    let h = t / f64::powi(2.0, m);
    let gh = g * c(h);
    let mut e = M2::identity();
    let mut phi = M2::identity();
    let mut term = M2::identity();
    for k in 1..20u32 {
        term = term * gh / c(k as f64);
        e += term;
        phi += term / c((k + 1) as f64);
    }
    phi *= c(h);
    for _ in 0..m {
        phi += e * phi;
        e = e * e;
    }
    phi
}

/// Generator `J (qd - lambda wd)` of the homogeneous piece equation.
pub fn piece_generator(qd: &crate::numeric::RM2, wd: &crate::numeric::RM2, lambda: C64) -> M2 {
    jmat() * (to_complex(qd) - to_complex(wd) * lambda)
}

/// Solution on one piece: `u(x) = exp(G (x - from)) start + phi1(x - from) forcing`.
#[derive(Debug, Clone, PartialEq)]
pub struct Segment {
    pub from: f64,
    pub to: f64,
    pub generator: M2,
    pub forcing: V2,
    pub start: V2,
}

impl Segment {
    pub fn value(&self, x: f64) -> V2 {
        let t = x - self.from;
        if t == 0.0 {
            return self.start;
        }
        let mut u = expm2(&self.generator, t) * self.start;
        if self.forcing.norm() > 0.0 {
            u += phi1(&self.generator, t) * self.forcing;
        }
        u
    }

    pub fn end(&self) -> V2 {
        self.value(self.to)
    }
}

/// Left and right limits at an atom.
#[derive(Debug, Clone, PartialEq)]
pub struct AtomTrace {
    pub x: f64,
    pub minus: V2,
    pub plus: V2,
}

impl AtomTrace {
    pub fn balanced(&self) -> V2 {
        (self.minus + self.plus) * c(0.5)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Minus,
    Plus,
}

/// Balanced solution of `J u' + (q - lambda w) u = w f` with its right-hand side data.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseFunction {
    pub lambda: C64,
    pub segments: Vec<Segment>,
    pub atoms: Vec<AtomTrace>,
    pub source: SourceTerm,
}

impl PiecewiseFunction {
    /// The zero solution at `lambda`.
    pub fn zero(p: &Problem, lambda: C64) -> PiecewiseFunction {
        PiecewiseFunction {
            lambda,
            segments: p
                .pieces
                .iter()
                .map(|d| Segment {
                    from: d.from,
                    to: d.to,
                    generator: piece_generator(&d.qd, &d.wd, lambda),
                    forcing: V2::zeros(),
                    start: V2::zeros(),
                })
                .collect(),
            atoms: p
                .atoms
                .iter()
                .map(|t| AtomTrace { x: t.x, minus: V2::zeros(), plus: V2::zeros() })
                .collect(),
            source: SourceTerm::zero(p),
        }
    }

    pub fn a(&self) -> f64 {
        self.segments[0].from
    }

    pub fn b(&self) -> f64 {
        self.segments[self.segments.len() - 1].to
    }

    fn segment_at(&self, x: f64, side: Side) -> usize {
        let n = self.segments.len();
        match side {
            Side::Plus => self
                .segments
                .iter()
                .position(|s| s.from <= x && x < s.to)
                .unwrap_or(n - 1),
            Side::Minus => self
                .segments
                .iter()
                .position(|s| s.from < x && x <= s.to)
                .unwrap_or(0),
        }
    }

    /// One-sided limit at `x`; at `a` and `b` the only available limit.
    pub fn trace(&self, x: f64, side: Side) -> V2 {
        if let Some(t) = self.atoms.iter().find(|t| t.x == x) {
            return match side {
                Side::Minus => t.minus,
                Side::Plus => t.plus,
            };
        }
        let side = if x <= self.a() {
            Side::Plus
        } else if x >= self.b() {
            Side::Minus
        } else {
            side
        };
        let k = self.segment_at(x, side);
        self.segments[k].value(x)
    }

    /// Balanced value `(u^- + u^+) / 2`.
    pub fn value(&self, x: f64) -> V2 {
        (self.trace(x, Side::Minus) + self.trace(x, Side::Plus)) * c(0.5)
    }

    /// Right-hand side `lambda u + f` on segment `k` at `x`.
    pub fn rhs_on_segment(&self, k: usize, x: f64) -> V2 {
        self.segments[k].value(x) * self.lambda + self.source.piece_values[k]
    }

    pub fn rhs_at_atom(&self, k: usize) -> V2 {
        self.atoms[k].balanced() * self.lambda + self.source.atom_values[k]
    }

    pub fn scaled(&self, s: C64) -> PiecewiseFunction {
        PiecewiseFunction {
            lambda: self.lambda,
            segments: self
                .segments
                .iter()
                .map(|g| Segment { start: g.start * s, forcing: g.forcing * s, ..g.clone() })
                .collect(),
            atoms: self
                .atoms
                .iter()
                .map(|t| AtomTrace { x: t.x, minus: t.minus * s, plus: t.plus * s })
                .collect(),
            source: self.source.scaled(s),
        }
    }

    /// Sum of two functions on the same partition and at the same `lambda`.
    pub fn add(&self, other: &PiecewiseFunction) -> PiecewiseFunction {
        PiecewiseFunction {
            lambda: self.lambda,
            segments: self
                .segments
                .iter()
                .zip(&other.segments)
                .map(|(g, h)| Segment {
                    start: g.start + h.start,
                    forcing: g.forcing + h.forcing,
                    ..g.clone()
                })
                .collect(),
            atoms: self
                .atoms
                .iter()
                .zip(&other.atoms)
                .map(|(t, s)| AtomTrace { x: t.x, minus: t.minus + s.minus, plus: t.plus + s.plus })
                .collect(),
            source: self.source.add(&other.source),
        }
    }

    /// Linear combination `sum coeffs[k] fs[k]`.
    pub fn combination(fs: &[PiecewiseFunction], coeffs: &[C64]) -> PiecewiseFunction {
        let mut acc = fs[0].scaled(coeffs[0]);
        for (f, &s) in fs.iter().zip(coeffs).skip(1) {
            acc = acc.add(&f.scaled(s));
        }
        acc
    }

    /// Largest one-sided value over piece boundaries.
    pub fn sup_norm(&self) -> f64 {
        let mut m: f64 = 0.0;
        for s in &self.segments {
            m = m.max(s.start.norm()).max(s.end().norm());
        }
        for t in &self.atoms {
            m = m.max(t.minus.norm()).max(t.plus.norm());
        }
        m
    }

    /// Largest residual of the atom equations `B_+ u^+ - B_- u^- = dw f`.
    pub fn atom_residual(&self, p: &Problem) -> f64 {
        let mut r: f64 = 0.0;
        for (k, t) in self.atoms.iter().enumerate() {
            let atom = &p.atoms[k];
            let (bm, bp) = atom_jumps(&atom.dq, &atom.dw, self.lambda);
            let lhs = bp * t.plus - bm * t.minus - to_complex(&atom.dw) * self.source.atom_values[k];
            r = r.max(lhs.norm());
        }
        r
    }

    /// Largest mismatch between consecutive segments at non-atom boundaries
    /// and between segments and atom traces.
    pub fn continuity_residual(&self) -> f64 {
        let mut r: f64 = 0.0;
        for k in 0..self.segments.len().saturating_sub(1) {
            let x = self.segments[k].to;
            let left = self.segments[k].end();
            let right = self.segments[k + 1].start;
            match self.atoms.iter().find(|t| t.x == x) {
                Some(t) => {
                    r = r.max((left - t.minus).norm()).max((right - t.plus).norm());
                }
                None => r = r.max((left - right).norm()),
            }
        }
        r
    }
}

/// Outcome of solving the atom equation for `u^+` (or `u^-`).
#[derive(Debug, Clone, PartialEq)]
pub enum AtomCrossing {
    Unique(V2),
    Affine { offset: V2, direction: Vec<V2> },
    Infeasible,
}

fn solve_2x2(m: &M2, rhs: &V2, tol: &Tolerances) -> AtomCrossing {
    let md = m2_to_dyn(m);
    let rank = numeric_rank(&md, tol).unwrap_or(0);
    if rank == 2 {
        if let Some(inv) = m.try_inverse() {
            return AtomCrossing::Unique(inv * rhs);
        }
    }
    let aff = match solve_affine(&md, &v2_to_dyn(rhs), tol) {
        Ok(a) => a,
        Err(_) => return AtomCrossing::Infeasible,
    };
    if !aff.feasible {
        return AtomCrossing::Infeasible;
    }
    AtomCrossing::Affine {
        offset: V2::new(aff.offset[0], aff.offset[1]),
        direction: (0..aff.direction.ncols())
            .map(|k| V2::new(aff.direction[(0, k)], aff.direction[(1, k)]))
            .collect(),
    }
}

/// Solves `B_+ u^+ = B_- u^- + dw f` for `u^+`.
pub fn cross_atom(atom: &Atom, lambda: C64, u_minus: &V2, f_at: &V2, tol: &Tolerances) -> AtomCrossing {
    let (bm, bp) = atom_jumps(&atom.dq, &atom.dw, lambda);
    let rhs = bm * u_minus + to_complex(&atom.dw) * f_at;
    solve_2x2(&bp, &rhs, tol)
}

/// Solves `B_- u^- = B_+ u^+ - dw f` for `u^-`.
pub fn cross_atom_backward(atom: &Atom, lambda: C64, u_plus: &V2, f_at: &V2, tol: &Tolerances) -> AtomCrossing {
    let (bm, bp) = atom_jumps(&atom.dq, &atom.dw, lambda);
    let rhs = bp * u_plus - to_complex(&atom.dw) * f_at;
    solve_2x2(&bm, &rhs, tol)
}

fn check_source(p: &Problem, f: &SourceTerm) -> Result<()> {
    if f.piece_values.len() != p.pieces.len() || f.atom_values.len() != p.atoms.len() {
        return Err(Error::InvalidInput("source term does not match the problem layout".into()));
    }
    Ok(())
}

/// Initial value problem with `u(x0) = u0`; `x0` must not be an atom.
pub fn solve_ivp(
    p: &Problem,
    lambda: C64,
    x0: f64,
    u0: &V2,
    f: &SourceTerm,
    tol: &Tolerances,
) -> Result<PiecewiseFunction> {
    check_source(p, f)?;
    if !(x0 >= p.a && x0 <= p.b) {
        return Err(Error::InvalidInput(format!("x0 = {x0} is outside [{}, {}]", p.a, p.b)));
    }
    if p.atom_index(x0).is_some() {
        return Err(Error::InvalidInput(format!("x0 = {x0} is an atom")));
    }
    let mut out = PiecewiseFunction::zero(p, lambda);
    out.source = f.clone();
    for (k, seg) in out.segments.iter_mut().enumerate() {
        seg.forcing = -(jmat() * to_complex(&p.pieces[k].wd)) * f.piece_values[k];
    }
    let k0 = p.piece_index(x0).expect("x0 inside");
    {
        let seg = &mut out.segments[k0];
        let t = seg.from - x0;
        let mut s = expm2(&seg.generator, t) * u0;
        if seg.forcing.norm() > 0.0 {
            s += phi1(&seg.generator, t) * seg.forcing;
        }
        seg.start = s;
    }
    for k in k0..p.pieces.len() - 1 {
        let x = out.segments[k].to;
        let end = out.segments[k].end();
        let next = match p.atom_index(x) {
            Some(ai) => match cross_atom(&p.atoms[ai], lambda, &end, &f.atom_values[ai], tol) {
                AtomCrossing::Unique(v) => {
                    out.atoms[ai].minus = end;
                    out.atoms[ai].plus = v;
                    v
                }
                other => {
                    return Err(Error::Blocked { index: ai, x, crossing: Box::new(other) });
                }
            },
            None => end,
        };
        out.segments[k + 1].start = next;
    }
    for k in (0..k0).rev() {
        let x = out.segments[k].to;
        let plus = out.segments[k + 1].start;
        let minus = match p.atom_index(x) {
            Some(ai) => match cross_atom_backward(&p.atoms[ai], lambda, &plus, &f.atom_values[ai], tol) {
                AtomCrossing::Unique(v) => {
                    out.atoms[ai].minus = v;
                    out.atoms[ai].plus = plus;
                    v
                }
                other => {
                    return Err(Error::Blocked { index: ai, x, crossing: Box::new(other) });
                }
            },
            None => plus,
        };
        let seg = &mut out.segments[k];
        let t = seg.from - seg.to;
        let mut s = expm2(&seg.generator, t) * minus;
        if seg.forcing.norm() > 0.0 {
            s += phi1(&seg.generator, t) * seg.forcing;
        }
        seg.start = s;
    }
    Ok(out)
}

/// Defect of `S* J S = J`.
pub fn symplectic_defect(s: &M2) -> f64 {
    (s.adjoint() * jmat() * s - jmat()).norm()
}

/// Two solutions at `lambda` with `U(x0) = base`.
#[derive(Debug, Clone, PartialEq)]
pub struct FundamentalMatrix {
    pub lambda: C64,
    pub x0: f64,
    pub base: M2,
    pub columns: [PiecewiseFunction; 2],
}

impl FundamentalMatrix {
    pub fn trace(&self, x: f64, side: Side) -> M2 {
        let u = self.columns[0].trace(x, side);
        let v = self.columns[1].trace(x, side);
        M2::new(u[0], v[0], u[1], v[1])
    }

    pub fn at(&self, x: f64) -> M2 {
        (self.trace(x, Side::Minus) + self.trace(x, Side::Plus)) * c(0.5)
    }

    /// The solution `U(., lambda) coeffs`.
    pub fn apply(&self, coeffs: &V2) -> PiecewiseFunction {
        self.columns[0].scaled(coeffs[0]).add(&self.columns[1].scaled(coeffs[1]))
    }
}

pub fn fundamental_matrix(
    p: &Problem,
    lambda: C64,
    x0: f64,
    base: &M2,
    tol: &Tolerances,
) -> Result<FundamentalMatrix> {
    let defect = symplectic_defect(base);
    if defect > tol.residual_abs * (1.0 + base.norm_squared()) {
        return Err(Error::NonSymplectic { defect });
    }
    let f = SourceTerm::zero(p);
    let c0 = solve_ivp(p, lambda, x0, &base.column(0).into_owned(), &f, tol)?;
    let c1 = solve_ivp(p, lambda, x0, &base.column(1).into_owned(), &f, tol)?;
    Ok(FundamentalMatrix { lambda, x0, base: *base, columns: [c0, c1] })
}

const GK_NODES: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
];
const GK_WEIGHTS: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
const G7_WEIGHTS: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

fn gk15<T, F>(f: &F, lo: f64, hi: f64, zero: T) -> (T, f64)
where
    T: Copy + std::ops::Add<Output = T> + std::ops::Sub<Output = T> + std::ops::Mul<C64, Output = T>,
    F: Fn(f64) -> T,
    T: Normed,
{
    let mid = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);
    let mut kron = zero;
    let mut gauss = zero;
    for i in 0..8 {
        let xs = if GK_NODES[i] == 0.0 {
            vec![mid]
        } else {
            vec![mid - half * GK_NODES[i], mid + half * GK_NODES[i]]
        };
        for x in xs {
            let v = f(x);
            kron = kron + v * c(GK_WEIGHTS[i]);
            if i % 2 == 1 {
                gauss = gauss + v * c(G7_WEIGHTS[i / 2]);
            }
        }
    }
    let k = kron * c(half);
    let g = gauss * c(half);
    (k, (k - g).size())
}

pub trait Normed {
    fn size(&self) -> f64;
}

impl Normed for C64 {
    fn size(&self) -> f64 {
        self.norm()
    }
}

impl Normed for V2 {
    fn size(&self) -> f64 {
        self.norm()
    }
}

impl Normed for M2 {
    fn size(&self) -> f64 {
        self.norm()
    }
}

/// Adaptive Gauss-Kronrod quadrature to absolute accuracy `abs`.
pub fn integrate<T, F>(f: &F, lo: f64, hi: f64, abs: f64, zero: T) -> T
where
    T: Copy + std::ops::Add<Output = T> + std::ops::Sub<Output = T> + std::ops::Mul<C64, Output = T> + Normed,
    F: Fn(f64) -> T,
{
    fn rec<T, F>(f: &F, lo: f64, hi: f64, abs: f64, zero: T, depth: u32) -> T
    where
        T: Copy + std::ops::Add<Output = T> + std::ops::Sub<Output = T> + std::ops::Mul<C64, Output = T> + Normed,
        F: Fn(f64) -> T,
    {
        let (v, err) = gk15(f, lo, hi, zero);
        if err <= abs || depth >= 30 {
            return v;
        }
        let mid = 0.5 * (lo + hi);
        rec(f, lo, mid, 0.5 * abs, zero, depth + 1) + rec(f, mid, hi, 0.5 * abs, zero, depth + 1)
    }
    if hi <= lo {
        return zero;
    }
    rec(f, lo, hi, abs, zero, 0)
}

/// `sum_{x_k in (c,d)} u(x_k)* dw v(x_k) + integral_c^d u* wd v`.
pub fn w_inner(p: &Problem, u: &PiecewiseFunction, v: &PiecewiseFunction, lo: f64, hi: f64, tol: &Tolerances) -> C64 {
    let mut s = c(0.0);
    for (k, t) in p.atoms.iter().enumerate() {
        if t.x > lo && t.x < hi {
            let uu = u.atoms[k].balanced();
            let vv = v.atoms[k].balanced();
            s += (uu.adjoint() * to_complex(&t.dw) * vv)[(0, 0)];
        }
    }
    for (k, piece) in p.pieces.iter().enumerate() {
        if piece.wd.norm() == 0.0 {
            continue;
        }
        let (l, h) = (piece.from.max(lo), piece.to.min(hi));
        if h <= l {
            continue;
        }
        let wd = to_complex(&piece.wd);
        let (su, sv) = (&u.segments[k], &v.segments[k]);
        s += integrate(&|x| (su.value(x).adjoint() * wd * sv.value(x))[(0, 0)], l, h, tol.quad_abs, c(0.0));
    }
    s
}

pub fn w_norm_sq(p: &Problem, u: &PiecewiseFunction, tol: &Tolerances) -> f64 {
    w_inner(p, u, u, p.a, p.b, tol).re.max(0.0)
}

/// `(v* J u)^-(d) - (v* J u)^+(c) - integral_(c,d) (v* w F_u - F_v* w u)`
/// where `F = lambda u + f` is each function's right-hand side.
pub fn lagrange_defect(
    p: &Problem,
    v: &PiecewiseFunction,
    u: &PiecewiseFunction,
    lo: f64,
    hi: f64,
    tol: &Tolerances,
) -> C64 {
    let j = jmat();
    let form = |x: f64, side: Side| (v.trace(x, side).adjoint() * j * u.trace(x, side))[(0, 0)];
    let boundary = form(hi, Side::Minus) - form(lo, Side::Plus);
    let mut integral = c(0.0);
    for (k, t) in p.atoms.iter().enumerate() {
        if t.x > lo && t.x < hi {
            let dw = to_complex(&t.dw);
            let (vv, uu) = (v.atoms[k].balanced(), u.atoms[k].balanced());
            integral += (vv.adjoint() * dw * u.rhs_at_atom(k))[(0, 0)]
                - (v.rhs_at_atom(k).adjoint() * dw * uu)[(0, 0)];
        }
    }
    for (k, piece) in p.pieces.iter().enumerate() {
        if piece.wd.norm() == 0.0 {
            continue;
        }
        let (l, h) = (piece.from.max(lo), piece.to.min(hi));
        if h <= l {
            continue;
        }
        let wd = to_complex(&piece.wd);
        let g = |x: f64| {
            let vv = v.segments[k].value(x);
            let uu = u.segments[k].value(x);
            (vv.adjoint() * wd * u.rhs_on_segment(k, x))[(0, 0)]
                - (v.rhs_on_segment(k, x).adjoint() * wd * uu)[(0, 0)]
        };
        integral += integrate(&g, l, h, tol.quad_abs, c(0.0));
    }
    boundary - integral
}

/// `integral_I U(., conj lambda)* w f` over the pieces and atoms selected by the closures.
fn moment_integral(
    p: &Problem,
    ubar: &FundamentalMatrix,
    f: &SourceTerm,
    piece_range: (f64, f64),
    include_atom: &dyn Fn(f64) -> bool,
    tol: &Tolerances,
) -> V2 {
    let mut s = V2::zeros();
    for (k, t) in p.atoms.iter().enumerate() {
        if include_atom(t.x) {
            s += ubar.at(t.x).adjoint() * to_complex(&t.dw) * f.atom_values[k];
        }
    }
    let (lo, hi) = piece_range;
    for (k, piece) in p.pieces.iter().enumerate() {
        if piece.wd.norm() == 0.0 || f.piece_values[k].norm() == 0.0 {
            continue;
        }
        let (l, h) = (piece.from.max(lo), piece.to.min(hi));
        if h <= l {
            continue;
        }
        let wf = to_complex(&piece.wd) * f.piece_values[k];
        let seg0 = &ubar.columns[0].segments[k];
        let seg1 = &ubar.columns[1].segments[k];
        let g = |x: f64| {
            let a = seg0.value(x);
            let b = seg1.value(x);
            V2::new((a.adjoint() * wf)[(0, 0)], (b.adjoint() * wf)[(0, 0)])
        };
        s += integrate(&g, l, h, tol.quad_abs, V2::zeros());
    }
    s
}

/// Solution of the inhomogeneous problem with `u(x0) = base u0`, built from the
/// variation of constants formula with `U(x0, lambda) = U(x0, conj lambda) = base`.
pub fn variation_of_constants(
    p: &Problem,
    lambda: C64,
    x0: f64,
    base: &M2,
    u0: &V2,
    f: &SourceTerm,
    tol: &Tolerances,
) -> Result<PiecewiseFunction> {
    check_source(p, f)?;
    let u = fundamental_matrix(p, lambda, x0, base, tol)?;
    let ubar = fundamental_matrix(p, lambda.conj(), x0, base, tol)?;
    let jinv = -jmat();
    let right = |x: f64, closed: bool| -> V2 {
        let m = moment_integral(p, &ubar, f, (x0, x), &|t| t >= x0 && (t < x || (closed && t == x)), tol);
        u0 + jinv * m
    };
    let left = |x: f64, closed: bool| -> V2 {
        let m = moment_integral(p, &ubar, f, (x, x0), &|t| t <= x0 && (t > x || (closed && t == x)), tol);
        u0 - jinv * m
    };
    let mut out = PiecewiseFunction::zero(p, lambda);
    out.source = f.clone();
    for (k, seg) in out.segments.iter_mut().enumerate() {
        seg.forcing = -(jmat() * to_complex(&p.pieces[k].wd)) * f.piece_values[k];
        let x = seg.from;
        seg.start = if x >= x0 {
            u.trace(x, Side::Plus) * right(x, true)
        } else {
            u.trace(x, Side::Plus) * left(x, false)
        };
    }
    for (k, t) in p.atoms.iter().enumerate() {
        let x = t.x;
        let (minus, plus) = if x >= x0 {
            (u.trace(x, Side::Minus) * right(x, false), u.trace(x, Side::Plus) * right(x, true))
        } else {
            (u.trace(x, Side::Minus) * left(x, true), u.trace(x, Side::Plus) * left(x, false))
        };
        out.atoms[k] = AtomTrace { x, minus, plus };
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::{RM2, I};
    use crate::problem::DensitySpec;

    fn v(a: f64, b: f64) -> V2 {
        V2::new(c(a), c(b))
    }

    fn delta_problem() -> Problem {
        Problem::atomic(
            -1.0,
            1.0,
            vec![Atom { x: 0.0, dq: RM2::new(0.0, 2.0, 2.0, 0.0), dw: RM2::identity() * 2.0 }],
        )
    }

    #[test]
    fn expm_matches_rotation() {
        let j = jmat();
        for &t in &[0.0, 1e-9, 0.3, 2.0, -1.7] {
            let e = expm2(&j, t);
            let exact = M2::new(c(t.cos()), c(-t.sin()), c(t.sin()), c(t.cos()));
            assert!((e - exact).norm() < 1e-14, "t = {t}");
        }
        let n = M2::new(c(0.0), c(1.0), c(0.0), c(0.0));
        let e = expm2(&n, 3.0);
        assert!((e - M2::new(c(1.0), c(3.0), c(0.0), c(1.0))).norm() < 1e-14);
        let d = M2::new(c(1.0), c(0.0), c(0.0), c(-2.0));
        let e = expm2(&d, 0.5);
        assert!((e[(0, 0)] - c(0.5f64.exp())).norm() < 1e-14);
        assert!((e[(1, 1)] - c((-1.0f64).exp())).norm() < 1e-14);
    }

    #[test]
    fn phi1_matches_quadrature() {
        let g = M2::new(C64::new(0.3, 1.0), c(-2.0), c(0.5), C64::new(-0.1, 0.2));
        for &t in &[0.4f64, -1.3, 3.0] {
            let q = integrate(&|s| expm2(&g, s), t.min(0.0), t.max(0.0), 1e-13, M2::zeros());
            let q = if t < 0.0 { -q } else { q };
            assert!((phi1(&g, t) - q).norm() < 1e-11, "t = {t}");
        }
    }

    #[test]
    fn crossing_delta_atom() {
        let t = Tolerances::default();
        let atom = &delta_problem().atoms[0];
        match cross_atom(atom, c(0.0), &v(3.0, 0.0), &V2::zeros(), &t) {
            AtomCrossing::Affine { direction, .. } => {
                assert_eq!(direction.len(), 1);
                assert!(direction[0][0].norm() < 1e-14);
            }
            other => panic!("{other:?}"),
        }
        assert_eq!(cross_atom(atom, c(0.0), &v(3.0, 1.0), &V2::zeros(), &t), AtomCrossing::Infeasible);
    }

    #[test]
    fn ivp_rotation_and_jump() {
        let t = Tolerances::default();
        let p = Problem::new(0.0, 2.0, vec![], &[], &[DensitySpec { from: 0.0, to: 2.0, m: RM2::identity() }]);
        let u0 = v(1.0, 0.5);
        let u = solve_ivp(&p, c(1.0), 0.7, &u0, &SourceTerm::zero(&p), &t).unwrap();
        for &x in &[0.0, 0.7, 1.3, 2.0] {
            let exact = expm2(&(-jmat()), x - 0.7) * u0;
            assert!((u.value(x) - exact).norm() < 1e-13);
        }
        let p = Problem::atomic(-2.0, 2.0, vec![Atom { x: 0.0, dq: RM2::zeros(), dw: RM2::identity() * 2.0 }]);
        let mut f = SourceTerm::zero(&p);
        f.atom_values[0] = v(0.3, -0.4);
        let u = solve_ivp(&p, c(0.0), -1.0, &v(1.0, 2.0), &f, &t).unwrap();
        let jump = u.atoms[0].plus - u.atoms[0].minus;
        assert!((jump - (jmat() * f.atom_values[0]) * c(-2.0)).norm() < 1e-14);
    }

    #[test]
    fn blocked_at_singular_atom() {
        let t = Tolerances::default();
        let p = delta_problem();
        let r = solve_ivp(&p, c(0.0), -0.5, &v(1.0, 1.0), &SourceTerm::zero(&p), &t);
        assert!(matches!(r, Err(Error::Blocked { index: 0, .. })));
    }

    #[test]
    fn non_symplectic_base() {
        let t = Tolerances::default();
        let p = delta_problem();
        let r = fundamental_matrix(&p, c(1.0), -0.5, &(M2::identity() * c(2.0)), &t);
        assert!(matches!(r, Err(Error::NonSymplectic { .. })));
    }

    #[test]
    fn free_sturm_liouville_matrix() {
        let t = Tolerances::default();
        let p = Problem::new(0.0, 1.0, vec![], &[DensitySpec { from: 0.0, to: 1.0, m: RM2::new(0.0, 0.0, 0.0, -1.0) }], &[]);
        let u = fundamental_matrix(&p, c(0.0), 1.0, &jmat(), &t).unwrap();
        let ua = u.at(0.0);
        let exact = M2::new(c(-1.0), c(-1.0), c(1.0), c(0.0));
        assert!((ua - exact).norm() < 1e-14);
    }

    #[test]
    fn quadrature_exact_for_polynomials() {
        let r = integrate(&|x: f64| c(x.powi(9) - 3.0 * x.powi(4)), -1.0, 2.0, 1e-14, c(0.0));
        let exact = (2f64.powi(10) - 1.0) / 10.0 - 3.0 * (2f64.powi(5) + 1.0) / 5.0;
        assert!((r.re - exact).abs() < 1e-12);
        let r = integrate(&|x: f64| c(x.exp()), 0.0, 3.0, 1e-13, c(0.0));
        assert!((r.re - (3f64.exp() - 1.0)).abs() < 1e-12);
    }

    #[test]
    fn lagrange_on_simple_pair() {
        let t = Tolerances::default();
        let p = Problem::new(
            0.0,
            2.0,
            vec![Atom { x: 1.0, dq: RM2::new(1.0, 0.5, 0.5, -1.0), dw: RM2::new(1.0, 0.0, 0.0, 0.5) }],
            &[DensitySpec { from: 0.0, to: 2.0, m: RM2::new(0.3, 0.1, 0.1, 0.2) }],
            &[DensitySpec { from: 0.5, to: 2.0, m: RM2::new(1.0, 0.2, 0.2, 0.7) }],
        );
        let mut f = SourceTerm::zero(&p);
        f.piece_values[1] = v(1.0, -1.0);
        f.atom_values[0] = v(0.2, 0.3);
        let u = solve_ivp(&p, C64::new(0.4, 0.9), 0.0, &v(1.0, 0.0), &f, &t).unwrap();
        let w = solve_ivp(&p, C64::new(-1.0, 0.2), 2.0, &v(0.0, 1.0), &SourceTerm::zero(&p), &t).unwrap();
        for &(lo, hi) in &[(0.0, 2.0), (0.2, 1.0), (1.0, 1.7), (0.0, 0.5)] {
            assert!(lagrange_defect(&p, &w, &u, lo, hi, &t).norm() < 1e-10);
        }
        let _ = I;
    }
}
