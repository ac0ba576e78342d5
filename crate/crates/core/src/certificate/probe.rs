//! Rank-level check that a splitting without lifting cannot encode a
//! three-operator inclusion.
//!
//! The fixed-point system `M` is stacked with rows equating the outputs of
//! repeated resolvents of the same operator. A working encoding would have to
//! force the first outputs of `A`, `B` and `C` to agree; the probe reports
//! which of those two equalities the stacked system implies, together with
//! the rank of all constraints it places on the resolvent outputs alone.

use rand::seq::SliceRandom;
use rand::Rng;
use serde::Serialize;

use super::rational::{int, rat, rowspace_implies, RatMatrix, Rational};
use super::system::{ColumnRole, OperatorTag, ScalarBlockSystem, SystemBuilder};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ProbeReport {
    /// Number of resolvent evaluations.
    pub resolvents: usize,
    /// Number of input columns.
    pub lifting: usize,
    pub within_consensus: bool,
    /// `x_{A,1} = x_{B,1}` is implied.
    pub a_equals_b: bool,
    /// `x_{B,1} = x_{C,1}` is implied.
    pub b_equals_c: bool,
    /// Dimension of the linear constraints implied on the resolvent outputs alone.
    pub output_constraint_rank: usize,
    /// Constraints needed to make every output equal, `resolvents - 1`.
    pub needed_rank: usize,
    /// Constraints contributed by the within-operator rows, `resolvents - 3`.
    pub within_rank: usize,
}

impl ProbeReport {
    pub fn both(&self) -> bool {
        self.a_equals_b && self.b_equals_c
    }
}

/// Probes `sys`. With `within_consensus` the rows `x_{O,1} = x_{O,k}` are
/// appended for every operator `O` evaluated more than once.
pub fn impossibility_probe(sys: &ScalarBlockSystem, within_consensus: bool) -> Result<ProbeReport> {
    let ops = [OperatorTag::A, OperatorTag::B, OperatorTag::C];
    let groups: Vec<Vec<usize>> = ops
        .iter()
        .map(|&op| sys.resolvents_of(op).iter().map(|t| t.output).collect())
        .collect();
    if let Some(i) = groups.iter().position(Vec::is_empty) {
        return Err(Error::MalformedSystem(format!("no resolvent tagged with operator {}", ops[i])));
    }
    let n = sys.ncols();
    let unit_diff = |a: usize, b: usize| {
        let mut row = vec![Rational::default(); n];
        row[a] += int(1);
        row[b] -= int(1);
        row
    };

    let mut within = Vec::new();
    if within_consensus {
        for g in &groups {
            for &other in &g[1..] {
                within.push(unit_diff(g[0], other));
            }
        }
    }
    let within_rows = within.len();
    let l = sys.matrix().stack(&RatMatrix::from_rows(within)?)?;

    let outputs: Vec<usize> = sys.resolvents().iter().map(|t| t.output).collect();
    let others: Vec<usize> = (0..n).filter(|j| !outputs.contains(j)).collect();
    let output_constraint_rank = l.rank() - l.select_columns(&others).rank();

    Ok(ProbeReport {
        resolvents: outputs.len(),
        lifting: sys.columns_with_role(ColumnRole::Input).len(),
        within_consensus,
        a_equals_b: rowspace_implies(&l, &unit_diff(groups[0][0], groups[1][0])),
        b_equals_c: rowspace_implies(&l, &unit_diff(groups[1][0], groups[2][0])),
        output_constraint_rank,
        needed_rank: outputs.len() - 1,
        within_rank: within_rows,
    })
}

fn small_rational<R: Rng + ?Sized>(rng: &mut R) -> Rational {
    rat(rng.random_range(-4..=4), rng.random_range(1..=3))
}

fn positive_rational<R: Rng + ?Sized>(rng: &mut R) -> Rational {
    rat(rng.random_range(1..=4), rng.random_range(1..=3))
}

/// Random frugal splitting of `A + B + C` without lifting.
///
/// Each operator is evaluated `per_operator` times in a random order. Every
/// resolvent input is a random rational combination of `z0` and the earlier
/// inputs and outputs, steps are positive, and `T z0` combines `z0` with all
/// outputs. The fixed-point row `T z0 = z0` is included.
pub fn random_no_lifting_candidate<R: Rng + ?Sized>(rng: &mut R, per_operator: usize) -> Result<ScalarBlockSystem> {
    if per_operator == 0 {
        return Err(Error::MalformedSystem("each operator needs at least one resolvent".into()));
    }
    let mut order: Vec<OperatorTag> = [OperatorTag::A, OperatorTag::B, OperatorTag::C]
        .iter()
        .flat_map(|&op| std::iter::repeat_n(op, per_operator))
        .collect();
    order.shuffle(rng);
    let k = order.len();

    let z: Vec<String> = (1..=k).map(|i| format!("z{i}")).collect();
    let x: Vec<String> = (1..=k).map(|i| format!("x{i}")).collect();
    let o: Vec<String> = order.iter().enumerate().map(|(i, op)| format!("{op}{}~", i + 1)).collect();
    let mut columns: Vec<(&str, ColumnRole)> = vec![("z0", ColumnRole::Input)];
    for i in 0..k {
        columns.push((&z[i], ColumnRole::ResolventInput));
        columns.push((&x[i], ColumnRole::ResolventOutput));
    }
    columns.push(("Tz0", ColumnRole::Image));
    for label in &o {
        columns.push((label, ColumnRole::OperatorOutput));
    }

    let mut b = SystemBuilder::new(&columns);
    for i in 0..k {
        let mut terms = vec![(z[i].as_str(), int(1)), ("z0", -small_rational(rng))];
        for j in 0..i {
            terms.push((z[j].as_str(), -small_rational(rng)));
            terms.push((x[j].as_str(), -small_rational(rng)));
        }
        b.row(&terms);
        b.resolvent(&z[i], &x[i], &o[i], order[i], positive_rational(rng));
    }
    let mut terms = vec![("Tz0", int(1)), ("z0", -small_rational(rng))];
    for xi in &x {
        terms.push((xi.as_str(), -small_rational(rng)));
    }
    b.row(&terms);
    b.row(&[("Tz0", int(1)), ("z0", -int(1))]);
    b.build()
}
