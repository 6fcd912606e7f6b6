//! Two-phase tableau simplex with Bland's rule.

use num::{One, Signed, Zero};

use super::{LinearProgram, LpOutcome, Relation};
use crate::rational::Q;

/// How an original variable maps onto nonnegative tableau columns.
enum ColMap {
    Shifted { col: usize, lower: Q },
    Split { pos: usize, neg: usize },
}

struct Tableau {
    rows: Vec<Vec<Q>>,
    basis: Vec<usize>,
    /// Reduced costs, with the negated objective value in the last slot.
    obj: Vec<Q>,
    ncols: usize,
}

enum Step {
    Optimal,
    Unbounded,
}

impl Tableau {
    fn pivot(&mut self, r: usize, c: usize) {
        let inv = Q::one() / &self.rows[r][c];
        for v in self.rows[r].iter_mut() {
            if !v.is_zero() {
                *v *= &inv;
            }
        }
        let nz: Vec<usize> = (0..=self.ncols)
            .filter(|&j| !self.rows[r][j].is_zero())
            .collect();
        let prow = std::mem::take(&mut self.rows[r]);
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i == r || row[c].is_zero() {
                continue;
            }
            let f = row[c].clone();
            for &j in &nz {
                row[j] -= &f * &prow[j];
            }
        }
        if !self.obj[c].is_zero() {
            let f = self.obj[c].clone();
            for &j in &nz {
                self.obj[j] -= &f * &prow[j];
            }
        }
        self.rows[r] = prow;
        self.basis[r] = c;
    }

    fn set_objective(&mut self, c: &[Q]) {
        let mut obj: Vec<Q> = c.to_vec();
        obj.push(Q::zero());
        for (i, &b) in self.basis.iter().enumerate() {
            if c[b].is_zero() {
                continue;
            }
            let cb = c[b].clone();
            for (o, t) in obj.iter_mut().zip(&self.rows[i]) {
                if !t.is_zero() {
                    *o -= &cb * t;
                }
            }
        }
        self.obj = obj;
    }

    fn run(&mut self, allowed: &[bool]) -> Step {
        loop {
            let Some(c) = (0..self.ncols).find(|&j| allowed[j] && self.obj[j].is_positive()) else {
                return Step::Optimal;
            };
            let mut best: Option<(usize, Q)> = None;
            for (i, row) in self.rows.iter().enumerate() {
                if !row[c].is_positive() {
                    continue;
                }
                let ratio = &row[self.ncols] / &row[c];
                let better = match &best {
                    None => true,
                    Some((bi, br)) => ratio < *br || (ratio == *br && self.basis[i] < self.basis[*bi]),
                };
                if better {
                    best = Some((i, ratio));
                }
            }
            match best {
                None => return Step::Unbounded,
                Some((r, _)) => self.pivot(r, c),
            }
        }
    }
}

/// Solves `lp` exactly. The returned assignment is a basic feasible solution.
pub fn lp_solve(lp: &LinearProgram) -> LpOutcome {
    let n = lp.num_vars();
    let mut maps = Vec::with_capacity(n);
    let mut ncols = 0;
    for l in &lp.lower {
        match l {
            Some(l) => {
                maps.push(ColMap::Shifted { col: ncols, lower: l.clone() });
                ncols += 1;
            }
            None => {
                maps.push(ColMap::Split { pos: ncols, neg: ncols + 1 });
                ncols += 2;
            }
        }
    }
    let structural = ncols;

    // Rows over structural columns with nonnegative right-hand sides.
    let mut rows: Vec<(Vec<Q>, Relation, Q)> = Vec::with_capacity(lp.constraints.len());
    for con in &lp.constraints {
        let mut row = vec![Q::zero(); structural];
        let mut rhs = con.rhs.clone();
        for (j, a) in &con.coeffs {
            match &maps[*j] {
                ColMap::Shifted { col, lower } => {
                    row[*col] += a;
                    rhs -= a * lower;
                }
                ColMap::Split { pos, neg } => {
                    row[*pos] += a;
                    row[*neg] -= a;
                }
            }
        }
        let mut rel = con.rel;
        if rhs.is_negative() {
            for v in row.iter_mut() {
                *v = -v.clone();
            }
            rhs = -rhs;
            rel = match rel {
                Relation::Le => Relation::Ge,
                Relation::Ge => Relation::Le,
                Relation::Eq => Relation::Eq,
            };
        }
        rows.push((row, rel, rhs));
    }

    let n_slack = rows.iter().filter(|r| r.1 != Relation::Eq).count();
    let n_art = rows.iter().filter(|r| r.1 != Relation::Le).count();
    let total = structural + n_slack + n_art;
    let mut tab = Tableau {
        rows: Vec::with_capacity(rows.len()),
        basis: Vec::with_capacity(rows.len()),
        obj: Vec::new(),
        ncols: total,
    };
    let mut is_art = vec![false; total];
    let mut next_slack = structural;
    let mut next_art = structural + n_slack;
    for (row, rel, rhs) in rows {
        let mut full = row;
        full.resize(total + 1, Q::zero());
        full[total] = rhs;
        match rel {
            Relation::Le => {
                full[next_slack] = Q::one();
                tab.basis.push(next_slack);
                next_slack += 1;
            }
            Relation::Ge => {
                full[next_slack] = -Q::one();
                next_slack += 1;
                full[next_art] = Q::one();
                is_art[next_art] = true;
                tab.basis.push(next_art);
                next_art += 1;
            }
            Relation::Eq => {
                full[next_art] = Q::one();
                is_art[next_art] = true;
                tab.basis.push(next_art);
                next_art += 1;
            }
        }
        tab.rows.push(full);
    }

    if n_art > 0 {
        let c1: Vec<Q> = is_art
            .iter()
            .map(|&a| if a { -Q::one() } else { Q::zero() })
            .collect();
        tab.set_objective(&c1);
        let all = vec![true; total];
        tab.run(&all);
        if !tab.obj[total].is_zero() {
            return LpOutcome::Infeasible;
        }
        // Drive remaining artificial variables out of the basis.
        let mut i = 0;
        while i < tab.rows.len() {
            if is_art[tab.basis[i]] {
                match (0..total).find(|&j| !is_art[j] && !tab.rows[i][j].is_zero()) {
                    Some(j) => {
                        tab.pivot(i, j);
                        i += 1;
                    }
                    None => {
                        tab.rows.remove(i);
                        tab.basis.remove(i);
                    }
                }
            } else {
                i += 1;
            }
        }
    }

    let mut c2 = vec![Q::zero(); total];
    for (j, m) in maps.iter().enumerate() {
        let c = &lp.objective[j];
        match m {
            ColMap::Shifted { col, .. } => c2[*col] = c.clone(),
            ColMap::Split { pos, neg } => {
                c2[*pos] = c.clone();
                c2[*neg] = -c.clone();
            }
        }
    }
    tab.set_objective(&c2);
    let allowed: Vec<bool> = is_art.iter().map(|a| !a).collect();
    if let Step::Unbounded = tab.run(&allowed) {
        return LpOutcome::Unbounded;
    }

    let mut col_val = vec![Q::zero(); total];
    for (i, &b) in tab.basis.iter().enumerate() {
        col_val[b] = tab.rows[i][total].clone();
    }
    let x: Vec<Q> = maps
        .iter()
        .map(|m| match m {
            ColMap::Shifted { col, lower } => &col_val[*col] + lower,
            ColMap::Split { pos, neg } => &col_val[*pos] - &col_val[*neg],
        })
        .collect();
    let value = lp.objective_at(&x);
    LpOutcome::Optimal { value, x }
}
