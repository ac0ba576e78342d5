//! Exact certificates that a splitting's fixed points encode solutions.
//!
//! A linear equality `c^T v = 0` holds for every solution of `M v = 0` iff `c`
//! is in the row space of `M`. The builders below write one evaluation of a
//! splitting, plus the fixed-point condition, as such a system over the
//! rationals; [`verify_encoding`] then checks consensus of the resolvent
//! outputs, the solution map and the zero sum of operator outputs.

mod probe;
mod rational;
mod system;

pub use probe::{impossibility_probe, random_no_lifting_candidate, ProbeReport};
pub use rational::{dot, int, parse_rational, rat, rowspace_implies, violating_null_vector, RatMatrix, Rational};
pub use system::{
    verify_encoding, ColumnRole, Counterexample, EncodingReport, EncodingTargets, OperatorTag, ResolventDescription,
    ResolventTag, ScalarBlockSystem, SystemDescription, Target, TargetCheck,
};

use num_traits::{One, Signed, Zero};

use crate::error::{invalid, Result};
use system::SystemBuilder;
use ColumnRole::*;

fn require_positive(name: &str, v: &Rational) -> Result<()> {
    if v.is_positive() {
        Ok(())
    } else {
        Err(invalid(format!("{name} must be positive, got {v}")))
    }
}

/// Coefficients `theta_1..theta_8` of the two-step family with steps
/// `alpha`, `beta`, relaxation `theta` and solution weight `eta`.
pub fn family_coefficients(alpha: &Rational, beta: &Rational, theta: &Rational, eta: &Rational) -> [Rational; 8] {
    let ratio = beta / alpha;
    [
        ratio.clone(),
        -Rational::one() - ratio,
        -Rational::one(),
        theta.clone(),
        -theta.clone(),
        Rational::zero(),
        eta - Rational::one(),
        -eta.clone(),
    ]
}

/// Evaluation of a general frugal two-operator splitting without lifting,
/// with the fixed-point row `T z0 = z0`.
///
/// Columns `z0, z1, x1, z2, x2, Tz0, A~, B~, Sz0`; rows
/// `z1 = z0`, `z2 = -t1 z0 - t2 x1`, `Tz0 = -t3 z0 - t4 x1 - t5 x2`,
/// `Tz0 = z0`, the two resolvent rows, and `Sz0 = -t6 z0 - t7 x1 - t8 x2`.
pub fn build_family_system(alpha: &Rational, beta: &Rational, t: &[Rational; 8]) -> Result<ScalarBlockSystem> {
    require_positive("alpha", alpha)?;
    require_positive("beta", beta)?;
    let one = Rational::one;
    let mut b = SystemBuilder::new(&[
        ("z0", Input),
        ("z1", ResolventInput),
        ("x1", ResolventOutput),
        ("z2", ResolventInput),
        ("x2", ResolventOutput),
        ("Tz0", Image),
        ("A~", OperatorOutput),
        ("B~", OperatorOutput),
        ("Sz0", Solution),
    ]);
    b.row(&[("z0", -one()), ("z1", one())])
        .row(&[("z0", t[0].clone()), ("x1", t[1].clone()), ("z2", one())])
        .row(&[("z0", t[2].clone()), ("x1", t[3].clone()), ("x2", t[4].clone()), ("Tz0", one())])
        .row(&[("z0", -one()), ("Tz0", one())])
        .resolvent("z1", "x1", "A~", OperatorTag::A, alpha.clone())
        .resolvent("z2", "x2", "B~", OperatorTag::B, beta.clone())
        .row(&[("z0", t[5].clone()), ("x1", t[6].clone()), ("x2", t[7].clone()), ("Sz0", one())]);
    b.build()
}

/// Fixed-point system of the three-operator splitting with 2-fold lifting:
/// `x1 = J(z1)`, `x2 = J(x1 + z2)`, `x3 = J(x1 - z1 + x2 - z2)`,
/// `T = z + theta (x3 - x1, x3 - x2)`, `S = (x1 + x2 + x3) / 3`.
pub fn build_ryu3_system(alpha: &Rational, theta: &Rational) -> Result<ScalarBlockSystem> {
    require_positive("alpha", alpha)?;
    if theta.is_zero() {
        return Err(invalid("theta must be nonzero"));
    }
    let one = Rational::one;
    let third = rat(1, 3);
    let mut b = SystemBuilder::new(&[
        ("z1", Input),
        ("z2", Input),
        ("r1", ResolventInput),
        ("x1", ResolventOutput),
        ("r2", ResolventInput),
        ("x2", ResolventOutput),
        ("r3", ResolventInput),
        ("x3", ResolventOutput),
        ("T1", Image),
        ("T2", Image),
        ("A~", OperatorOutput),
        ("B~", OperatorOutput),
        ("C~", OperatorOutput),
        ("S", Solution),
    ]);
    b.row(&[("r1", one()), ("z1", -one())])
        .resolvent("r1", "x1", "A~", OperatorTag::A, alpha.clone())
        .row(&[("r2", one()), ("x1", -one()), ("z2", -one())])
        .resolvent("r2", "x2", "B~", OperatorTag::B, alpha.clone())
        .row(&[("r3", one()), ("x1", -one()), ("z1", one()), ("x2", -one()), ("z2", one())])
        .resolvent("r3", "x3", "C~", OperatorTag::C, alpha.clone())
        .row(&[("T1", one()), ("z1", -one()), ("x3", -theta.clone()), ("x1", theta.clone())])
        .row(&[("T2", one()), ("z2", -one()), ("x3", -theta.clone()), ("x2", theta.clone())])
        .row(&[("T1", one()), ("z1", -one())])
        .row(&[("T2", one()), ("z2", -one())])
        .row(&[("S", one()), ("x1", -third.clone()), ("x2", -third.clone()), ("x3", -third)]);
    b.build()
}

/// Fixed-point system of PPXA on three copies: `x_i = J_{(gamma/w_i) O_i}(z_i)`,
/// `T_i = z_i + theta (2 xbar - zbar - x_i)` with weighted means, `S = x_1`.
pub fn build_ppxa_system(gamma: &Rational, weights: &[Rational; 3], theta: &Rational) -> Result<ScalarBlockSystem> {
    require_positive("gamma", gamma)?;
    for w in weights {
        require_positive("weight", w)?;
    }
    if weights.iter().fold(Rational::zero(), |a, w| a + w) != Rational::one() {
        return Err(invalid("weights must sum to 1"));
    }
    if theta.is_zero() {
        return Err(invalid("theta must be nonzero"));
    }
    let one = Rational::one;
    let ops = [OperatorTag::A, OperatorTag::B, OperatorTag::C];
    let z = ["z1", "z2", "z3"];
    let r = ["r1", "r2", "r3"];
    let x = ["x1", "x2", "x3"];
    let t = ["T1", "T2", "T3"];
    let o = ["A~", "B~", "C~"];
    let mut columns = Vec::new();
    columns.extend(z.iter().map(|l| (*l, Input)));
    for i in 0..3 {
        columns.push((r[i], ResolventInput));
        columns.push((x[i], ResolventOutput));
    }
    columns.extend(t.iter().map(|l| (*l, Image)));
    columns.extend(o.iter().map(|l| (*l, OperatorOutput)));
    columns.push(("S", Solution));

    let mut b = SystemBuilder::new(&columns);
    for i in 0..3 {
        b.row(&[(r[i], one()), (z[i], -one())]);
        b.resolvent(r[i], x[i], o[i], ops[i], gamma / &weights[i]);
    }
    for i in 0..3 {
        // T_i - z_i - theta (2 sum w_j x_j - sum w_j z_j - x_i) = 0
        let mut terms = vec![(t[i], one()), (z[i], -one()), (x[i], theta.clone())];
        for j in 0..3 {
            terms.push((x[j], -theta * int(2) * &weights[j]));
            terms.push((z[j], theta * &weights[j]));
        }
        b.row(&terms);
    }
    for i in 0..3 {
        b.row(&[(t[i], one()), (z[i], -one())]);
    }
    b.row(&[("S", one()), ("x1", -one())]);
    b.build()
}
