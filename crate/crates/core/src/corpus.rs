//! Named example problems and seeded random generators.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::boundary::{form_matrix, BCMatrix};
use crate::numeric::{c, CMat, C64, RM2};
use crate::problem::{Atom, DensitySpec, Problem};

fn atom(x: f64, dq: RM2, dw: RM2) -> Atom {
    Atom { x, dq, dw }
}

/// `q = (0 2; 2 0) delta_0`, `w = 2 I delta_0` on `(-1, 1)`.
pub fn delta_coupling() -> Problem {
    Problem::atomic(-1.0, 1.0, vec![atom(0.0, RM2::new(0.0, 2.0, 2.0, 0.0), RM2::identity() * 2.0)])
}

/// `q = 0`, `w = 2 I delta_0` on `(-2, 2)`.
pub fn single_mass() -> Problem {
    Problem::atomic(-2.0, 2.0, vec![atom(0.0, RM2::zeros(), RM2::identity() * 2.0)])
}

/// `q = 0`, `w = 2 I (delta_0 + delta_1)` on `(-2, 2)`.
pub fn double_mass() -> Problem {
    Problem::atomic(
        -2.0,
        2.0,
        vec![atom(0.0, RM2::zeros(), RM2::identity() * 2.0), atom(1.0, RM2::zeros(), RM2::identity() * 2.0)],
    )
}

/// `-y'' = lambda r y` written as a system: `qd = diag(0, -1)`, `wd = diag(r, 0)` on `(0, 1)`.
pub fn free_sl(r: f64) -> Problem {
    Problem::new(
        0.0,
        1.0,
        vec![],
        &[DensitySpec { from: 0.0, to: 1.0, m: RM2::new(0.0, 0.0, 0.0, -1.0) }],
        &[DensitySpec { from: 0.0, to: 1.0, m: RM2::new(r, 0.0, 0.0, 0.0) }],
    )
}

/// `q = 0`, `w = I` on `(0, len)`.
pub fn free_dirac(len: f64) -> Problem {
    Problem::new(0.0, len, vec![], &[], &[DensitySpec { from: 0.0, to: len, m: RM2::identity() }])
}

/// Two masses `dw = diag(1, 0)` at 1 and 2 on `(0, 3)`; `L0` is spanned by `(0, 1)`.
pub fn half_weight() -> Problem {
    let dw = RM2::new(1.0, 0.0, 0.0, 0.0);
    Problem::atomic(0.0, 3.0, vec![atom(1.0, RM2::zeros(), dw), atom(2.0, RM2::zeros(), dw)])
}

pub fn lattice_odd_atom(x: f64) -> Atom {
    atom(x, RM2::new(2.0, 2.0, 2.0, 2.0), RM2::new(2.0, 0.0, 0.0, 0.0))
}

pub fn lattice_even_atom(x: f64) -> Atom {
    atom(x, RM2::new(0.0, -2.0, -2.0, -2.0), RM2::zeros())
}

/// Alternating lattice on `(0, 2m + 1)` with atoms at `1, ..., 2m`; every
/// interval `(n, n + 1)` carries a solution at `lambda = 1`.
pub fn lattice(m: usize) -> Problem {
    let atoms = (1..=2 * m)
        .map(|n| if n % 2 == 1 { lattice_odd_atom(n as f64) } else { lattice_even_atom(n as f64) })
        .collect();
    Problem::atomic(0.0, (2 * m + 1) as f64, atoms)
}

/// Really bad atom whose weight attaches to the right: `ker B_-` is constant.
pub fn plus_side_atom(x: f64) -> Atom {
    atom(x, RM2::new(0.0, 2.0, 2.0, 0.0), RM2::new(0.0, 0.0, 0.0, 1.0))
}

/// Mirror of [`plus_side_atom`]: `ker B_+` is constant.
pub fn minus_side_atom(x: f64) -> Atom {
    atom(x, RM2::new(0.0, -2.0, -2.0, 0.0), RM2::new(0.0, 0.0, 0.0, 1.0))
}

/// Problems on `(0, 3)` with really bad points and deficiency index `n`.
pub fn trichotomy(n: usize) -> Problem {
    let atoms = match n {
        0 => vec![plus_side_atom(1.0), minus_side_atom(2.0)],
        1 => vec![plus_side_atom(1.5)],
        2 => vec![atom(0.5, RM2::zeros(), RM2::identity()), plus_side_atom(1.5)],
        _ => panic!("deficiency index is at most 2"),
    };
    Problem::atomic(0.0, 3.0, atoms)
}

/// Every named problem, keyed by the name used for the shipped JSON files.
pub fn named() -> Vec<(&'static str, Problem)> {
    vec![
        ("delta_coupling", delta_coupling()),
        ("single_mass", single_mass()),
        ("double_mass", double_mass()),
        ("free_sl", free_sl(1.0)),
        ("free_dirac", free_dirac(std::f64::consts::PI)),
        ("half_weight", half_weight()),
        ("lattice3", lattice(3)),
        ("trichotomy0", trichotomy(0)),
        ("trichotomy1", trichotomy(1)),
        ("trichotomy2", trichotomy(2)),
    ]
}

fn sym(rng: &mut ChaCha8Rng, s: f64) -> RM2 {
    let o = rng.gen_range(-s..s);
    RM2::new(rng.gen_range(-s..s), o, o, rng.gen_range(-s..s))
}

/// Random positive semidefinite matrix of rank 0, 1 or 2.
fn psd(rng: &mut ChaCha8Rng) -> RM2 {
    match rng.gen_range(0..4) {
        0 => RM2::zeros(),
        1 => {
            let t: f64 = rng.gen_range(0.0..std::f64::consts::PI);
            let v = nalgebra::Vector2::new(t.cos(), t.sin()) * rng.gen_range(0.3..1.5);
            v * v.transpose()
        }
        _ => {
            let m = RM2::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            m * m.transpose() + RM2::identity() * 0.1
        }
    }
}

/// Random element of `SL(2, R)`, which preserves the jump structure under congruence.
fn random_sl2(rng: &mut ChaCha8Rng) -> RM2 {
    let t: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
    let r = RM2::new(t.cos(), -t.sin(), t.sin(), t.cos());
    let s = rng.gen_range(0.5..2.0);
    let shear = rng.gen_range(-1.0..1.0);
    r * RM2::new(s, shear, 0.0, 1.0 / s)
}

/// A really bad atom: one of the two sided examples under a random congruence.
pub fn random_really_bad_atom(rng: &mut ChaCha8Rng, x: f64) -> Atom {
    let base = if rng.gen_bool(0.5) { plus_side_atom(x) } else { minus_side_atom(x) };
    let s = random_sl2(rng);
    let k = rng.gen_range(0.5..2.0);
    atom(x, s.transpose() * base.dq * s, s.transpose() * base.dw * s * k)
}

/// Purely atomic problem with at most `max_atoms` atoms, mixing weights of
/// every rank and occasionally a really bad atom.
pub fn random_atomic(rng: &mut ChaCha8Rng, max_atoms: usize) -> Problem {
    let n = rng.gen_range(1..=max_atoms);
    let atoms = (1..=n)
        .map(|k| {
            let x = k as f64;
            if rng.gen_range(0..6) == 0 {
                random_really_bad_atom(rng, x)
            } else {
                atom(x, sym(rng, 1.0), psd(rng))
            }
        })
        .collect();
    Problem::atomic(0.0, (n + 1) as f64, atoms)
}

/// Problem with atoms and piecewise-constant densities and no really bad atoms.
pub fn random_mixed(rng: &mut ChaCha8Rng) -> Problem {
    let n = rng.gen_range(0..=3);
    let b = (n + 1) as f64;
    let atoms = (1..=n).map(|k| atom(k as f64 - rng.gen_range(0.0..0.4), sym(rng, 1.0), psd(rng))).collect();
    let mut qd = Vec::new();
    let mut wd = Vec::new();
    for _ in 0..rng.gen_range(1..=3) {
        let lo = rng.gen_range(0.0..b - 0.2);
        let hi = rng.gen_range(lo + 0.1..b);
        qd.push(DensitySpec { from: lo, to: hi, m: sym(rng, 1.0) });
    }
    for _ in 0..rng.gen_range(1..=2) {
        let lo = rng.gen_range(0.0..b - 0.2);
        let hi = rng.gen_range(lo + 0.1..b);
        wd.push(DensitySpec { from: lo, to: hi, m: psd(rng) });
    }
    Problem::new(0.0, b, atoms, &qd, &wd)
}

/// Random complex number with parts in `(-1, 1)`.
pub fn random_c64(rng: &mut ChaCha8Rng) -> C64 {
    C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
}

/// Random point of the disk of radius `r`.
pub fn random_in_disk(rng: &mut ChaCha8Rng, r: f64) -> C64 {
    let rho = r * rng.gen_range(0.0f64..1.0).sqrt();
    C64::from_polar(rho, rng.gen_range(0.0..std::f64::consts::TAU))
}

/// Random `2 x 4` matrix satisfying the self-adjointness form condition:
/// a separated pair, or a periodic condition moved by `exp(K form)` with `K` Hermitian.
pub fn random_valid_bc(rng: &mut ChaCha8Rng, separated: bool) -> BCMatrix {
    let base = if separated {
        let (al, be): (f64, f64) = (rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0));
        BCMatrix::from_real(&[&[al.cos(), al.sin(), 0.0, 0.0], &[0.0, 0.0, be.cos(), be.sin()]]).a
    } else {
        BCMatrix::from_real(&[&[1.0, 0.0, -1.0, 0.0], &[0.0, 1.0, 0.0, -1.0]]).a
    };
    let r = CMat::from_fn(2, 2, |_, _| random_c64(rng)) + CMat::identity(2, 2) * c(2.0);
    if separated {
        return BCMatrix::new(r * base);
    }
    let k = CMat::from_fn(4, 4, |_, _| random_c64(rng));
    let herm = (&k + k.adjoint()) * c(0.5);
    BCMatrix::new(r * base * (herm * form_matrix()).exp())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::{really_bad_atoms, spectrum_of_atom, validate_problem, Branch};
    use crate::numeric::Tolerances;
    use rand::SeedableRng;

    #[test]
    fn named_problems_are_valid() {
        for (name, p) in named() {
            assert!(validate_problem(&p).is_valid(), "{name}");
        }
    }

    #[test]
    fn sided_atoms() {
        let t = Tolerances::default();
        assert_eq!(spectrum_of_atom(&plus_side_atom(0.0), &t).branch, Some(Branch::PlusSide));
        assert_eq!(spectrum_of_atom(&minus_side_atom(0.0), &t).branch, Some(Branch::MinusSide));
        assert_eq!(really_bad_atoms(&lattice(3), &t), vec![1, 3, 5]);
    }

    #[test]
    fn random_problems_are_valid() {
        let t = Tolerances::default();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..50 {
            assert!(validate_problem(&random_atomic(&mut rng, 4)).is_valid());
            let p = random_mixed(&mut rng);
            assert!(validate_problem(&p).is_valid());
            assert!(really_bad_atoms(&p, &t).is_empty());
            let a = random_really_bad_atom(&mut rng, 0.0);
            assert!(spectrum_of_atom(&a, &t).really_bad);
        }
    }
}
