//! Scalar-block linear systems describing one evaluation of a splitting.
//!
//! Each column stands for a `d`-dimensional quantity and each coefficient for
//! that multiple of the `d x d` identity. A resolvent evaluation
//! `x = J_{sO} r` appears as the row `-r + x + s O~ = 0`, where `O~` is the
//! operator output column.

use std::collections::HashSet;
use std::fmt;

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use super::rational::{dot, int, parse_rational, rowspace_implies, violating_null_vector, RatMatrix, Rational};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ColumnRole {
    /// Lifted input coordinate `z`.
    Input,
    ResolventInput,
    ResolventOutput,
    /// Coordinate of `T z`.
    Image,
    OperatorOutput,
    /// `S z`
    Solution,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum OperatorTag {
    A,
    B,
    C,
}

impl fmt::Display for OperatorTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self:?}")
    }
}

/// Which operator and step produced a resolvent output column.
#[derive(Debug, Clone, PartialEq)]
pub struct ResolventTag {
    pub input: usize,
    pub output: usize,
    pub operator_output: usize,
    pub operator: OperatorTag,
    pub step: Rational,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScalarBlockSystem {
    matrix: RatMatrix,
    labels: Vec<String>,
    roles: Vec<ColumnRole>,
    resolvents: Vec<ResolventTag>,
}

/// Wire format: rationals as `"p/q"` strings, columns referenced by label.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemDescription {
    pub labels: Vec<String>,
    pub roles: Vec<ColumnRole>,
    pub rows: Vec<Vec<String>>,
    pub resolvents: Vec<ResolventDescription>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResolventDescription {
    pub input: String,
    pub output: String,
    pub operator_output: String,
    pub operator: OperatorTag,
    pub step: String,
}

impl ScalarBlockSystem {
    /// Checks label uniqueness, tag consistency and that each tagged
    /// resolvent row `-r + x + s O~` is actually present.
    pub fn new(
        matrix: RatMatrix,
        labels: Vec<String>,
        roles: Vec<ColumnRole>,
        resolvents: Vec<ResolventTag>,
    ) -> Result<Self> {
        let malformed = |m: String| Err(Error::MalformedSystem(m));
        if labels.len() != roles.len() {
            return malformed(format!("{} labels but {} roles", labels.len(), roles.len()));
        }
        if matrix.nrows() > 0 && matrix.ncols() != labels.len() {
            return malformed(format!("{} columns but {} labels", matrix.ncols(), labels.len()));
        }
        let mut seen = HashSet::new();
        if let Some(dup) = labels.iter().find(|l| !seen.insert(l.as_str())) {
            return malformed(format!("duplicate column label {dup:?}"));
        }
        for t in &resolvents {
            let cols = [t.input, t.output, t.operator_output];
            if cols.iter().any(|&c| c >= labels.len()) {
                return malformed("resolvent tag refers to a missing column".into());
            }
            if roles[t.output] != ColumnRole::ResolventOutput || roles[t.operator_output] != ColumnRole::OperatorOutput {
                return malformed(format!("resolvent tag for {} has wrong column roles", labels[t.output]));
            }
            if !t.step.is_positive() {
                return malformed(format!("resolvent step for {} must be positive", labels[t.output]));
            }
            let mut expected = vec![Rational::zero(); labels.len()];
            expected[t.input] = -Rational::one();
            expected[t.output] = Rational::one();
            expected[t.operator_output] = t.step.clone();
            if !(0..matrix.nrows()).any(|i| matrix.row(i) == expected.as_slice()) {
                return malformed(format!("no resolvent row for {}", labels[t.output]));
            }
        }
        Ok(ScalarBlockSystem { matrix, labels, roles, resolvents })
    }

    pub fn matrix(&self) -> &RatMatrix {
        &self.matrix
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn roles(&self) -> &[ColumnRole] {
        &self.roles
    }

    pub fn resolvents(&self) -> &[ResolventTag] {
        &self.resolvents
    }

    pub fn ncols(&self) -> usize {
        self.labels.len()
    }

    pub fn column(&self, label: &str) -> Result<usize> {
        self.labels
            .iter()
            .position(|l| l == label)
            .ok_or_else(|| Error::MalformedSystem(format!("no column labelled {label:?}")))
    }

    pub fn columns_with_role(&self, role: ColumnRole) -> Vec<usize> {
        (0..self.ncols()).filter(|&j| self.roles[j] == role).collect()
    }

    /// Row vector `sum coeff * column` over labelled columns.
    pub fn combination(&self, terms: &[(&str, Rational)]) -> Result<Vec<Rational>> {
        let mut row = vec![Rational::zero(); self.ncols()];
        for (label, coeff) in terms {
            let j = self.column(label)?;
            row[j] += coeff;
        }
        Ok(row)
    }

    /// Resolvent tags of one operator, in column order.
    pub fn resolvents_of(&self, op: OperatorTag) -> Vec<&ResolventTag> {
        let mut tags: Vec<&ResolventTag> = self.resolvents.iter().filter(|t| t.operator == op).collect();
        tags.sort_by_key(|t| t.output);
        tags
    }

    pub fn operators(&self) -> Vec<OperatorTag> {
        let mut ops: Vec<OperatorTag> = self.resolvents.iter().map(|t| t.operator).collect();
        ops.sort();
        ops.dedup();
        ops
    }

    pub fn from_description(desc: &SystemDescription) -> Result<Self> {
        let rows = desc
            .rows
            .iter()
            .map(|r| r.iter().map(|s| parse_rational(s)).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()?;
        let matrix = RatMatrix::from_rows(rows)?;
        let find = |l: &str| {
            desc.labels
                .iter()
                .position(|x| x == l)
                .ok_or_else(|| Error::MalformedSystem(format!("no column labelled {l:?}")))
        };
        let resolvents = desc
            .resolvents
            .iter()
            .map(|r| {
                Ok(ResolventTag {
                    input: find(&r.input)?,
                    output: find(&r.output)?,
                    operator_output: find(&r.operator_output)?,
                    operator: r.operator,
                    step: parse_rational(&r.step)?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(matrix, desc.labels.clone(), desc.roles.clone(), resolvents)
    }

    pub fn to_description(&self) -> SystemDescription {
        SystemDescription {
            labels: self.labels.clone(),
            roles: self.roles.clone(),
            rows: (0..self.matrix.nrows())
                .map(|i| self.matrix.row(i).iter().map(|v| v.to_string()).collect())
                .collect(),
            resolvents: self
                .resolvents
                .iter()
                .map(|t| ResolventDescription {
                    input: self.labels[t.input].clone(),
                    output: self.labels[t.output].clone(),
                    operator_output: self.labels[t.operator_output].clone(),
                    operator: t.operator,
                    step: t.step.to_string(),
                })
                .collect(),
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Self::from_description(&serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_description()).expect("description is serializable")
    }
}

/// Incremental construction by column label.
pub(crate) struct SystemBuilder {
    labels: Vec<String>,
    roles: Vec<ColumnRole>,
    rows: Vec<Vec<Rational>>,
    resolvents: Vec<(String, String, String, OperatorTag, Rational)>,
}

impl SystemBuilder {
    pub(crate) fn new(columns: &[(&str, ColumnRole)]) -> Self {
        SystemBuilder {
            labels: columns.iter().map(|(l, _)| l.to_string()).collect(),
            roles: columns.iter().map(|(_, r)| *r).collect(),
            rows: Vec::new(),
            resolvents: Vec::new(),
        }
    }

    fn index(&self, label: &str) -> usize {
        self.labels.iter().position(|l| l == label).unwrap_or_else(|| panic!("unknown column {label}"))
    }

    pub(crate) fn row(&mut self, terms: &[(&str, Rational)]) -> &mut Self {
        let mut row = vec![Rational::zero(); self.labels.len()];
        for (label, coeff) in terms {
            row[self.index(label)] += coeff;
        }
        self.rows.push(row);
        self
    }

    /// `-input + output + step * op_output = 0`
    pub(crate) fn resolvent(&mut self, input: &str, output: &str, op_output: &str, op: OperatorTag, step: Rational) -> &mut Self {
        self.row(&[(input, -int(1)), (output, int(1)), (op_output, step.clone())]);
        self.resolvents.push((input.into(), output.into(), op_output.into(), op, step));
        self
    }

    pub(crate) fn build(&self) -> Result<ScalarBlockSystem> {
        let resolvents = self
            .resolvents
            .iter()
            .map(|(i, o, a, op, s)| ResolventTag {
                input: self.index(i),
                output: self.index(o),
                operator_output: self.index(a),
                operator: *op,
                step: s.clone(),
            })
            .collect();
        ScalarBlockSystem::new(RatMatrix::from_rows(self.rows.clone())?, self.labels.clone(), self.roles.clone(), resolvents)
    }
}

/// A linear equality `row^T v = 0` the system should force.
#[derive(Debug, Clone, PartialEq)]
pub struct Target {
    pub name: String,
    pub row: Vec<Rational>,
}

/// The equalities a fixed-point encoding must imply: consensus of the
/// resolvent outputs across operators, `S z = x`, and a zero sum of the
/// operator outputs.
#[derive(Debug, Clone, PartialEq)]
pub struct EncodingTargets {
    pub consensus: Vec<Target>,
    pub solution: Option<Target>,
    pub zero_sum: Target,
}

impl EncodingTargets {
    /// Targets built from the first resolvent of each operator: consecutive
    /// outputs equal, the solution column equal to the first output, and the
    /// operator outputs summing to zero.
    pub fn standard(sys: &ScalarBlockSystem) -> Result<Self> {
        let firsts: Vec<&ResolventTag> = sys
            .operators()
            .into_iter()
            .map(|op| sys.resolvents_of(op)[0])
            .collect();
        if firsts.len() < 2 {
            return Err(Error::MalformedSystem("need resolvents of at least two operators".into()));
        }
        let n = sys.ncols();
        let labels = sys.labels();
        let consensus = firsts
            .windows(2)
            .map(|w| {
                let mut row = vec![Rational::zero(); n];
                row[w[0].output] += int(1);
                row[w[1].output] -= int(1);
                Target { name: format!("{} = {}", labels[w[0].output], labels[w[1].output]), row }
            })
            .collect();
        let solution = match sys.columns_with_role(ColumnRole::Solution).as_slice() {
            [] => None,
            [s] => {
                let mut row = vec![Rational::zero(); n];
                row[*s] += int(1);
                row[firsts[0].output] -= int(1);
                Some(Target { name: format!("{} = {}", labels[*s], labels[firsts[0].output]), row })
            }
            _ => return Err(Error::MalformedSystem("more than one solution column".into())),
        };
        let mut row = vec![Rational::zero(); n];
        for t in &firsts {
            row[t.operator_output] += int(1);
        }
        let names: Vec<&str> = firsts.iter().map(|t| labels[t.operator_output].as_str()).collect();
        let zero_sum = Target { name: format!("{} = 0", names.join(" + ")), row };
        Ok(EncodingTargets { consensus, solution, zero_sum })
    }

    fn all(&self) -> Vec<&Target> {
        let mut v: Vec<&Target> = self.consensus.iter().collect();
        v.extend(self.solution.as_ref());
        v.push(&self.zero_sum);
        v
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TargetCheck {
    pub name: String,
    pub implied: bool,
}

/// Null vector of the system violating one target.
#[derive(Debug, Clone, PartialEq)]
pub struct Counterexample {
    pub target: String,
    pub vector: Vec<Rational>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EncodingReport {
    pub consensus: Vec<TargetCheck>,
    pub solution_map: Option<TargetCheck>,
    pub zero_sum: TargetCheck,
    pub counterexample: Option<Counterexample>,
}

impl EncodingReport {
    pub fn implies_consensus(&self) -> bool {
        self.consensus.iter().all(|c| c.implied)
    }

    pub fn implies_solution_map(&self) -> bool {
        self.solution_map.as_ref().is_none_or(|c| c.implied)
    }

    pub fn implies_zero_sum(&self) -> bool {
        self.zero_sum.implied
    }

    pub fn all_hold(&self) -> bool {
        self.implies_consensus() && self.implies_solution_map() && self.implies_zero_sum()
    }

    fn checks(&self) -> Vec<&TargetCheck> {
        let mut v: Vec<&TargetCheck> = self.consensus.iter().collect();
        v.extend(self.solution_map.as_ref());
        v.push(&self.zero_sum);
        v
    }

    pub fn to_json(&self, sys: &ScalarBlockSystem) -> serde_json::Value {
        let check = |c: &TargetCheck| serde_json::json!({"target": c.name, "implied": c.implied});
        serde_json::json!({
            "implies_consensus": self.implies_consensus(),
            "implies_solution_map": self.implies_solution_map(),
            "implies_zero_sum": self.implies_zero_sum(),
            "checks": self.checks().into_iter().map(check).collect::<Vec<_>>(),
            "counterexample": self.counterexample.as_ref().map(|c| serde_json::json!({
                "target": c.target,
                "vector": sys.labels().iter().zip(&c.vector)
                    .map(|(l, v)| (l.clone(), serde_json::Value::String(v.to_string())))
                    .collect::<serde_json::Map<_, _>>(),
            })),
        })
    }

    pub fn to_text(&self, sys: &ScalarBlockSystem) -> String {
        let mut out = String::new();
        for c in self.checks() {
            out += &format!("{:<28} {}\n", c.name, if c.implied { "implied" } else { "NOT implied" });
        }
        if let Some(cx) = &self.counterexample {
            out += &format!("counterexample violating {}:\n", cx.target);
            for (l, v) in sys.labels().iter().zip(&cx.vector) {
                out += &format!("  {l:<8} {v}\n");
            }
        }
        out
    }
}

/// Runs the row-space test for every target and extracts a null vector for
/// the first failing one.
pub fn verify_encoding(sys: &ScalarBlockSystem, targets: &EncodingTargets) -> Result<EncodingReport> {
    for t in targets.all() {
        if t.row.len() != sys.ncols() {
            return Err(Error::MalformedSystem(format!("target {} has wrong length", t.name)));
        }
    }
    let m = sys.matrix();
    let check = |t: &Target| TargetCheck { name: t.name.clone(), implied: rowspace_implies(m, &t.row) };
    let consensus: Vec<TargetCheck> = targets.consensus.iter().map(check).collect();
    let solution_map = targets.solution.as_ref().map(check);
    let zero_sum = check(&targets.zero_sum);

    let failing = targets
        .all()
        .into_iter()
        .find(|t| !rowspace_implies(m, &t.row));
    let counterexample = failing.map(|t| {
        let vector = violating_null_vector(m, &t.row).expect("non-implied target has a violating null vector");
        debug_assert!(m.mul_vec(&vector).iter().all(Zero::is_zero));
        debug_assert!(!dot(&t.row, &vector).is_zero());
        Counterexample { target: t.name.clone(), vector }
    });
    Ok(EncodingReport { consensus, solution_map, zero_sum, counterexample })
}
