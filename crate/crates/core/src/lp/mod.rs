//! Exact rational linear programming.

mod simplex;
mod vertices;

use std::fmt;

use num::{Signed, Zero};

use crate::rational::{fmt_q, Q};

pub use simplex::lp_solve;
pub use vertices::{enumerate_vertices, Polytope, DEFAULT_DIM_CAP};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Relation {
    Le,
    Eq,
    Ge,
}

impl Relation {
    fn symbol(self) -> &'static str {
        match self {
            Relation::Le => "<=",
            Relation::Eq => "=",
            Relation::Ge => ">=",
        }
    }
}

/// A sparse linear constraint `sum coeffs[i].1 * x[coeffs[i].0] REL rhs`.
#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub coeffs: Vec<(usize, Q)>,
    pub rel: Relation,
    pub rhs: Q,
}

impl Constraint {
    pub fn new(coeffs: Vec<(usize, Q)>, rel: Relation, rhs: Q) -> Self {
        Constraint { coeffs, rel, rhs }
    }

    pub fn lhs(&self, x: &[Q]) -> Q {
        self.coeffs
            .iter()
            .fold(Q::zero(), |acc, (j, a)| acc + a * &x[*j])
    }

    pub fn holds(&self, x: &[Q]) -> bool {
        let l = self.lhs(x);
        match self.rel {
            Relation::Le => l <= self.rhs,
            Relation::Eq => l == self.rhs,
            Relation::Ge => l >= self.rhs,
        }
    }

    fn dense(&self, n: usize) -> Vec<Q> {
        let mut row = vec![Q::zero(); n];
        for (j, a) in &self.coeffs {
            row[*j] += a;
        }
        row
    }
}

/// A maximization problem over named variables.
///
/// Variables created with [`LinearProgram::add_var`] are nonnegative; a
/// variable's lower bound may be changed or removed with
/// [`LinearProgram::set_lower`].
#[derive(Debug, Clone, Default, PartialEq)]
pub struct LinearProgram {
    pub names: Vec<String>,
    pub lower: Vec<Option<Q>>,
    pub objective: Vec<Q>,
    pub constraints: Vec<Constraint>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum LpOutcome {
    Optimal { value: Q, x: Vec<Q> },
    Infeasible,
    Unbounded,
}

impl LpOutcome {
    pub fn value(&self) -> Option<&Q> {
        match self {
            LpOutcome::Optimal { value, .. } => Some(value),
            _ => None,
        }
    }
}

impl LinearProgram {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn num_vars(&self) -> usize {
        self.names.len()
    }

    pub fn add_var(&mut self, name: impl Into<String>) -> usize {
        self.names.push(name.into());
        self.lower.push(Some(Q::zero()));
        self.objective.push(Q::zero());
        self.names.len() - 1
    }

    pub fn add_free_var(&mut self, name: impl Into<String>) -> usize {
        let j = self.add_var(name);
        self.lower[j] = None;
        j
    }

    pub fn set_lower(&mut self, j: usize, lower: Option<Q>) {
        self.lower[j] = lower;
    }

    pub fn set_objective(&mut self, j: usize, c: Q) {
        self.objective[j] = c;
    }

    pub fn add_constraint(&mut self, coeffs: Vec<(usize, Q)>, rel: Relation, rhs: Q) {
        let n = self.num_vars();
        assert!(
            coeffs.iter().all(|(j, _)| *j < n),
            "constraint references an undeclared variable"
        );
        self.constraints.push(Constraint::new(coeffs, rel, rhs));
    }

    pub fn objective_at(&self, x: &[Q]) -> Q {
        self.objective
            .iter()
            .zip(x)
            .fold(Q::zero(), |acc, (c, v)| acc + c * v)
    }

    pub fn is_feasible_point(&self, x: &[Q]) -> bool {
        x.len() == self.num_vars()
            && self
                .lower
                .iter()
                .zip(x)
                .all(|(l, v)| l.as_ref().is_none_or(|l| v >= l))
            && self.constraints.iter().all(|c| c.holds(x))
    }

    /// The feasible region with lower bounds turned into explicit rows.
    pub fn feasible_region(&self) -> Polytope {
        let mut constraints = self.constraints.clone();
        for (j, l) in self.lower.iter().enumerate() {
            if let Some(l) = l {
                constraints.push(Constraint::new(vec![(j, Q::from_integer(1.into()))], Relation::Ge, l.clone()));
            }
        }
        Polytope {
            names: self.names.clone(),
            constraints,
        }
    }
}

fn fmt_linear(f: &mut fmt::Formatter<'_>, names: &[String], terms: &[(usize, Q)]) -> fmt::Result {
    let mut first = true;
    for (j, a) in terms {
        if a.is_zero() {
            continue;
        }
        let mag = a.abs();
        let sign = if a.is_negative() { "-" } else { "+" };
        if first {
            if a.is_negative() {
                write!(f, "-")?;
            }
        } else {
            write!(f, " {sign} ")?;
        }
        if mag == Q::from_integer(1.into()) {
            write!(f, "{}", names[*j])?;
        } else {
            write!(f, "{} {}", fmt_q(&mag), names[*j])?;
        }
        first = false;
    }
    if first {
        write!(f, "0")?;
    }
    Ok(())
}

/// Plain-text dump, one constraint per line.
impl fmt::Display for LinearProgram {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let obj: Vec<(usize, Q)> = self.objective.iter().cloned().enumerate().collect();
        write!(f, "max: ")?;
        fmt_linear(f, &self.names, &obj)?;
        writeln!(f)?;
        for (i, c) in self.constraints.iter().enumerate() {
            write!(f, "c{i}: ")?;
            fmt_linear(f, &self.names, &c.coeffs)?;
            writeln!(f, " {} {}", c.rel.symbol(), fmt_q(&c.rhs))?;
        }
        for (name, l) in self.names.iter().zip(&self.lower) {
            match l {
                Some(l) => writeln!(f, "{name} >= {}", fmt_q(l))?,
                None => writeln!(f, "{name} free")?,
            }
        }
        Ok(())
    }
}

impl fmt::Display for Polytope {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, c) in self.constraints.iter().enumerate() {
            write!(f, "c{i}: ")?;
            fmt_linear(f, &self.names, &c.coeffs)?;
            writeln!(f, " {} {}", c.rel.symbol(), fmt_q(&c.rhs))?;
        }
        Ok(())
    }
}
