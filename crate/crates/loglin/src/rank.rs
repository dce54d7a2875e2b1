//! Exact rank of 0/1 row sets.
//!
//! Rows arrive as sparse column lists. We keep an integer basis of the
//! orthogonal complement of the span seen so far: a row lies in the span iff
//! it is orthogonal to every complement vector, which costs only additions.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, Zero};

trait Int: Clone + PartialEq + std::fmt::Debug {
    fn zero() -> Self;
    fn one() -> Self;
    fn is_zero(&self) -> bool;
    fn add(&self, o: &Self) -> Option<Self>;
    fn mul(&self, o: &Self) -> Option<Self>;
    fn sub(&self, o: &Self) -> Option<Self>;
    fn gcd(&self, o: &Self) -> Self;
    fn div_exact(&self, o: &Self) -> Self;
    fn abs(&self) -> Self;
}

impl Int for i128 {
    fn zero() -> Self {
        0
    }
    fn one() -> Self {
        1
    }
    fn is_zero(&self) -> bool {
        *self == 0
    }
    fn add(&self, o: &Self) -> Option<Self> {
        self.checked_add(*o)
    }
    fn mul(&self, o: &Self) -> Option<Self> {
        self.checked_mul(*o)
    }
    fn sub(&self, o: &Self) -> Option<Self> {
        self.checked_sub(*o)
    }
    fn gcd(&self, o: &Self) -> Self {
        Integer::gcd(self, o)
    }
    fn div_exact(&self, o: &Self) -> Self {
        self / o
    }
    fn abs(&self) -> Self {
        i128::abs(*self)
    }
}

impl Int for BigInt {
    fn zero() -> Self {
        Zero::zero()
    }
    fn one() -> Self {
        BigInt::from(1)
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn add(&self, o: &Self) -> Option<Self> {
        Some(self + o)
    }
    fn mul(&self, o: &Self) -> Option<Self> {
        Some(self * o)
    }
    fn sub(&self, o: &Self) -> Option<Self> {
        Some(self - o)
    }
    fn gcd(&self, o: &Self) -> Self {
        Integer::gcd(self, o)
    }
    fn div_exact(&self, o: &Self) -> Self {
        self / o
    }
    fn abs(&self) -> Self {
        Signed::abs(self)
    }
}

/// Rank of the given sparse 0/1 rows in dimension `dim`.
pub fn rank_sparse<'a, I>(rows: I, dim: usize) -> usize
where
    I: IntoIterator<Item = &'a [usize]> + Clone,
{
    match complement_rank::<i128, _>(rows.clone(), dim) {
        Some(r) => r,
        None => complement_rank::<BigInt, _>(rows, dim).expect("big integers cannot overflow"),
    }
}

/// Rank of dense 0/1 rows.
pub fn rank_dense(rows: &[Vec<u8>]) -> usize {
    let dim = rows.first().map_or(0, |r| r.len());
    let sparse: Vec<Vec<usize>> = rows
        .iter()
        .map(|r| r.iter().enumerate().filter(|(_, &x)| x != 0).map(|(c, _)| c).collect())
        .collect();
    rank_sparse(sparse.iter().map(|r| r.as_slice()), dim)
}

fn complement_rank<'a, T: Int, I>(rows: I, dim: usize) -> Option<usize>
where
    I: IntoIterator<Item = &'a [usize]>,
{
    // start from the standard basis: nothing spanned yet
    let mut null: Vec<Vec<T>> = (0..dim)
        .map(|k| {
            let mut e = vec![T::zero(); dim];
            e[k] = T::one();
            e
        })
        .collect();
    let mut rank = 0;
    for row in rows {
        if null.is_empty() {
            break;
        }
        let mut dots = Vec::with_capacity(null.len());
        for n in &null {
            let mut s = T::zero();
            for &c in row {
                s = s.add(&n[c])?;
            }
            dots.push(s);
        }
        let Some(p) = dots.iter().position(|d| !d.is_zero()) else {
            continue;
        };
        rank += 1;
        let pivot = null.swap_remove(p);
        let cp = dots.swap_remove(p);
        for (n, ck) in null.iter_mut().zip(&dots) {
            if ck.is_zero() {
                continue;
            }
            // n ← cp·n − ck·pivot keeps n orthogonal to old rows and makes it orthogonal to `row`
            let mut g = T::zero();
            for (x, y) in n.iter_mut().zip(&pivot) {
                *x = x.mul(&cp)?.sub(&ck.mul(y)?)?;
                g = g.gcd(x);
            }
            if !g.is_zero() && g != T::one() {
                for x in n.iter_mut() {
                    *x = x.div_exact(&g.abs());
                }
            }
        }
    }
    Some(rank)
}
