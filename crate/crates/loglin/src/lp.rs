//! Exact two-phase simplex over the rationals.
//!
//! Dense tableau, Bland's rule. Arithmetic first runs on `Ratio<i128>` with
//! checked operations and restarts on `BigRational` if anything overflows.

use std::cmp::Ordering;
use std::fmt::Debug;

use num_bigint::BigInt;
use num_rational::{BigRational, Ratio};
use num_traits::{CheckedAdd, CheckedDiv, CheckedMul, CheckedSub, One, Signed, Zero};

use crate::error::{Error, Result};

/// Exact field arithmetic whose operations may refuse (overflow).
pub trait Exact: Clone + Debug + PartialEq {
    fn zero() -> Self;
    fn one() -> Self;
    fn from_i64(v: i64) -> Self;
    fn is_zero(&self) -> bool;
    fn is_positive(&self) -> bool;
    fn is_negative(&self) -> bool;
    fn add(&self, o: &Self) -> Option<Self>;
    fn sub(&self, o: &Self) -> Option<Self>;
    fn mul(&self, o: &Self) -> Option<Self>;
    fn div(&self, o: &Self) -> Option<Self>;
    fn cmp_exact(&self, o: &Self) -> Ordering;
    fn to_big(&self) -> BigRational;
}

impl Exact for Ratio<i128> {
    fn zero() -> Self {
        Zero::zero()
    }
    fn one() -> Self {
        One::one()
    }
    fn from_i64(v: i64) -> Self {
        Ratio::from_integer(v as i128)
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn is_positive(&self) -> bool {
        Signed::is_positive(self)
    }
    fn is_negative(&self) -> bool {
        Signed::is_negative(self)
    }
    fn add(&self, o: &Self) -> Option<Self> {
        self.checked_add(o)
    }
    fn sub(&self, o: &Self) -> Option<Self> {
        self.checked_sub(o)
    }
    fn mul(&self, o: &Self) -> Option<Self> {
        self.checked_mul(o)
    }
    fn div(&self, o: &Self) -> Option<Self> {
        self.checked_div(o)
    }
    fn cmp_exact(&self, o: &Self) -> Ordering {
        // `Ratio::cmp` avoids overflow by comparing continued fractions.
        self.cmp(o)
    }
    fn to_big(&self) -> BigRational {
        BigRational::new(BigInt::from(*self.numer()), BigInt::from(*self.denom()))
    }
}

impl Exact for BigRational {
    fn zero() -> Self {
        Zero::zero()
    }
    fn one() -> Self {
        One::one()
    }
    fn from_i64(v: i64) -> Self {
        BigRational::from_integer(BigInt::from(v))
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn is_positive(&self) -> bool {
        Signed::is_positive(self)
    }
    fn is_negative(&self) -> bool {
        Signed::is_negative(self)
    }
    fn add(&self, o: &Self) -> Option<Self> {
        Some(self + o)
    }
    fn sub(&self, o: &Self) -> Option<Self> {
        Some(self - o)
    }
    fn mul(&self, o: &Self) -> Option<Self> {
        Some(self * o)
    }
    fn div(&self, o: &Self) -> Option<Self> {
        if Zero::is_zero(o) {
            None
        } else {
            Some(self / o)
        }
    }
    fn cmp_exact(&self, o: &Self) -> Ordering {
        self.cmp(o)
    }
    fn to_big(&self) -> BigRational {
        self.clone()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Cmp {
    Le,
    Ge,
    Eq,
}

/// `maximize cᵀx  s.t.  a_r x (≤|≥|=) b_r,  x ≥ 0`, integer data.
#[derive(Debug, Clone, Default)]
pub struct Lp {
    pub objective: Vec<i64>,
    pub rows: Vec<(Vec<(usize, i64)>, Cmp, i64)>,
}

impl Lp {
    pub fn new(objective: Vec<i64>) -> Lp {
        Lp { objective, rows: Vec::new() }
    }

    /// Add a sparse constraint row.
    pub fn constrain(&mut self, coeffs: Vec<(usize, i64)>, cmp: Cmp, rhs: i64) {
        self.rows.push((coeffs, cmp, rhs));
    }

    pub fn vars(&self) -> usize {
        self.objective.len()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum LpOutcome {
    Optimal { value: BigRational, x: Vec<BigRational> },
    Infeasible,
    Unbounded,
}

struct Overflow;

type Step<T> = std::result::Result<T, Overflow>;

fn ok<T>(v: Option<T>) -> Step<T> {
    v.ok_or(Overflow)
}

pub fn solve(lp: &Lp) -> Result<LpOutcome> {
    for (coeffs, _, _) in &lp.rows {
        if let Some(&(c, _)) = coeffs.iter().find(|(c, _)| *c >= lp.vars()) {
            return Err(Error::Lp(format!("column {c} out of range")));
        }
    }
    match Tableau::<Ratio<i128>>::run(lp) {
        Ok(out) => Ok(out),
        Err(Overflow) => {
            log::debug!("i128 rationals overflowed; retrying with big rationals");
            Tableau::<BigRational>::run(lp).map_err(|_| Error::Lp("arithmetic failure".into()))
        }
    }
}

struct Tableau<T> {
    /// Constraint rows followed by the objective row; last column is the rhs.
    t: Vec<Vec<T>>,
    basis: Vec<usize>,
    ncols: usize,
    /// Columns barred from entering the basis.
    banned: Vec<bool>,
}

impl<T: Exact> Tableau<T> {
    fn run(lp: &Lp) -> Step<LpOutcome> {
        let n = lp.vars();
        let m = lp.rows.len();
        let mut slack = 0;
        let mut art = 0;
        let mut rows = Vec::with_capacity(m);
        for (coeffs, cmp, b) in &lp.rows {
            let (sign, cmp) = if *b < 0 {
                let flipped = match cmp {
                    Cmp::Le => Cmp::Ge,
                    Cmp::Ge => Cmp::Le,
                    Cmp::Eq => Cmp::Eq,
                };
                (-1i64, flipped)
            } else {
                (1, *cmp)
            };
            match cmp {
                Cmp::Le => slack += 1,
                Cmp::Ge => {
                    slack += 1;
                    art += 1
                }
                Cmp::Eq => art += 1,
            }
            rows.push((coeffs, cmp, sign));
        }
        let ncols = n + slack + art;
        let art_start = n + slack;
        let mut t = vec![vec![T::zero(); ncols + 1]; m + 1];
        let mut basis = vec![0; m];
        let (mut s_next, mut a_next) = (n, art_start);
        for (r, (coeffs, cmp, sign)) in rows.iter().enumerate() {
            for &(c, v) in coeffs.iter() {
                t[r][c] = ok(t[r][c].add(&T::from_i64(v * sign)))?;
            }
            t[r][ncols] = T::from_i64(lp.rows[r].2 * sign);
            match cmp {
                Cmp::Le => {
                    t[r][s_next] = T::one();
                    basis[r] = s_next;
                    s_next += 1;
                }
                Cmp::Ge => {
                    t[r][s_next] = T::from_i64(-1);
                    s_next += 1;
                    t[r][a_next] = T::one();
                    basis[r] = a_next;
                    a_next += 1;
                }
                Cmp::Eq => {
                    t[r][a_next] = T::one();
                    basis[r] = a_next;
                    a_next += 1;
                }
            }
        }
        let mut tab = Tableau { t, basis, ncols, banned: vec![false; ncols] };

        if art > 0 {
            // phase 1: maximize −Σ artificials
            let obj = m;
            for c in art_start..ncols {
                tab.t[obj][c] = T::one();
            }
            for r in 0..m {
                if tab.basis[r] >= art_start {
                    tab.sub_row_from_obj(r, &T::one())?;
                }
            }
            if !tab.optimize()? {
                return Err(Overflow); // unreachable: phase 1 is bounded
            }
            // objective row rhs holds the optimal value of −Σ a
            if !tab.t[obj][ncols].is_zero() {
                return Ok(LpOutcome::Infeasible);
            }
            tab.expel_artificials(art_start)?;
            for c in art_start..ncols {
                tab.banned[c] = true;
            }
        }

        // phase 2
        let obj = tab.t.len() - 1;
        for v in tab.t[obj].iter_mut() {
            *v = T::zero();
        }
        for (c, &v) in lp.objective.iter().enumerate() {
            tab.t[obj][c] = T::from_i64(-v);
        }
        for r in 0..tab.basis.len() {
            let b = tab.basis[r];
            if b < n && lp.objective[b] != 0 {
                let f = T::from_i64(-lp.objective[b]);
                tab.sub_row_from_obj(r, &f)?;
            }
        }
        if !tab.optimize()? {
            return Ok(LpOutcome::Unbounded);
        }
        let mut x = vec![<BigRational as Zero>::zero(); n];
        for (r, &b) in tab.basis.iter().enumerate() {
            if b < n {
                x[b] = tab.t[r][ncols].to_big();
            }
        }
        Ok(LpOutcome::Optimal { value: tab.t[obj][ncols].to_big(), x })
    }

    /// obj ← obj − f · row r
    fn sub_row_from_obj(&mut self, r: usize, f: &T) -> Step<()> {
        let obj = self.t.len() - 1;
        for c in 0..=self.ncols {
            if !self.t[r][c].is_zero() {
                let d = ok(f.mul(&self.t[r][c]))?;
                self.t[obj][c] = ok(self.t[obj][c].sub(&d))?;
            }
        }
        Ok(())
    }

    /// Bland's-rule iterations; `false` if unbounded.
    fn optimize(&mut self) -> Step<bool> {
        let obj = self.t.len() - 1;
        loop {
            let Some(e) = (0..self.ncols)
                .find(|&c| !self.banned[c] && self.t[obj][c].is_negative())
            else {
                return Ok(true);
            };
            let mut best: Option<(usize, T)> = None;
            for r in 0..obj {
                let a = &self.t[r][e];
                if !a.is_positive() {
                    continue;
                }
                let ratio = ok(self.t[r][self.ncols].div(a))?;
                let better = match &best {
                    None => true,
                    Some((br, bv)) => match ratio.cmp_exact(bv) {
                        Ordering::Less => true,
                        Ordering::Equal => self.basis[r] < self.basis[*br],
                        Ordering::Greater => false,
                    },
                };
                if better {
                    best = Some((r, ratio));
                }
            }
            let Some((r, _)) = best else {
                return Ok(false);
            };
            self.pivot(r, e)?;
        }
    }

    fn pivot(&mut self, r: usize, e: usize) -> Step<()> {
        let piv = self.t[r][e].clone();
        let nz: Vec<usize> = (0..=self.ncols).filter(|&c| !self.t[r][c].is_zero()).collect();
        for &c in &nz {
            self.t[r][c] = ok(self.t[r][c].div(&piv))?;
        }
        let prow: Vec<(usize, T)> = nz.iter().map(|&c| (c, self.t[r][c].clone())).collect();
        for k in 0..self.t.len() {
            if k == r || self.t[k][e].is_zero() {
                continue;
            }
            let f = self.t[k][e].clone();
            let row = &mut self.t[k];
            for (c, v) in &prow {
                let d = ok(f.mul(v))?;
                row[*c] = ok(row[*c].sub(&d))?;
            }
        }
        self.basis[r] = e;
        Ok(())
    }

    /// After a feasible phase 1, pivot remaining zero-level artificials out of the basis
    /// and drop rows that turn out to be redundant.
    fn expel_artificials(&mut self, art_start: usize) -> Step<()> {
        let mut r = 0;
        while r < self.basis.len() {
            if self.basis[r] >= art_start {
                match (0..art_start).find(|&c| !self.t[r][c].is_zero()) {
                    Some(c) => {
                        self.pivot(r, c)?;
                        r += 1;
                    }
                    None => {
                        self.t.remove(r);
                        self.basis.remove(r);
                    }
                }
            } else {
                r += 1;
            }
        }
        Ok(())
    }
}
