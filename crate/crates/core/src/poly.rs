//! Dense univariate polynomials over the integers and the exact linear
//! algebra used for resultants, Bézout identities and root isolation.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

/// Integer polynomial, coefficients in ascending degree order.
///
/// Trailing zero coefficients are always trimmed, so the zero polynomial
/// has an empty coefficient list.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct IntPoly {
    coeffs: Vec<BigInt>,
}

impl IntPoly {
    pub fn new(mut coeffs: Vec<BigInt>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        IntPoly { coeffs }
    }

    pub fn from_i64s(coeffs: &[i64]) -> Self {
        Self::new(coeffs.iter().map(|&c| BigInt::from(c)).collect())
    }

    pub fn zero() -> Self {
        IntPoly { coeffs: Vec::new() }
    }

    pub fn constant(c: BigInt) -> Self {
        Self::new(vec![c])
    }

    /// The monomial `c * t^k`.
    pub fn monomial(c: BigInt, k: usize) -> Self {
        let mut coeffs = vec![BigInt::zero(); k + 1];
        coeffs[k] = c;
        Self::new(coeffs)
    }

    pub fn coeffs(&self) -> &[BigInt] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn lc(&self) -> Option<&BigInt> {
        self.coeffs.last()
    }

    pub fn coeff(&self, k: usize) -> BigInt {
        self.coeffs.get(k).cloned().unwrap_or_default()
    }

    pub fn derivative(&self) -> Self {
        Self::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, c)| c * BigInt::from(k))
                .collect(),
        )
    }

    /// Non-negative gcd of the coefficients; zero for the zero polynomial.
    pub fn content(&self) -> BigInt {
        self.coeffs
            .iter()
            .fold(BigInt::zero(), |acc, c| acc.gcd(c))
    }

    /// Divides out the content and makes the leading coefficient positive.
    pub fn primitive_part(&self) -> Self {
        if self.is_zero() {
            return Self::zero();
        }
        let mut g = self.content();
        if self.lc().is_some_and(|c| c.is_negative()) {
            g = -g;
        }
        Self::new(self.coeffs.iter().map(|c| c / &g).collect())
    }

    pub fn scale(&self, k: &BigInt) -> Self {
        Self::new(self.coeffs.iter().map(|c| c * k).collect())
    }

    pub fn eval(&self, t: &BigInt) -> BigInt {
        self.coeffs
            .iter()
            .rev()
            .fold(BigInt::zero(), |acc, c| acc * t + c)
    }

    pub fn eval_rat(&self, t: &BigRational) -> BigRational {
        self.coeffs.iter().rev().fold(BigRational::zero(), |acc, c| {
            acc * t + BigRational::from_integer(c.clone())
        })
    }

    /// Sign of the value at `t`, from the integer `den^deg * p(num / den)`.
    pub fn sign_at(&self, t: &BigRational) -> i8 {
        let (num, den) = (t.numer(), t.denom());
        let mut acc = BigInt::zero();
        let mut den_pow = BigInt::one();
        for c in self.coeffs.iter().rev() {
            acc = acc * num + c * &den_pow;
            den_pow *= den;
        }
        if acc.is_zero() {
            0
        } else if acc.is_positive() {
            1
        } else {
            -1
        }
    }

    /// Sparse pseudo-remainder: some `lc(d)^k * self = q * d + r` with
    /// `deg r < deg d`. Only the associate class of `r` is meaningful.
    pub fn pseudo_rem(&self, d: &IntPoly) -> IntPoly {
        let dd = d.degree().expect("pseudo-remainder by zero polynomial");
        let ld = d.lc().unwrap().clone();
        let mut r = self.clone();
        while let Some(dr) = r.degree() {
            if dr < dd {
                break;
            }
            let lr = r.lc().unwrap().clone();
            let shifted = IntPoly::monomial(lr, dr - dd) * d;
            r = r.scale(&ld) - shifted;
        }
        r
    }

    /// Exact quotient `self / d` over the integers, or `None` when `d`
    /// does not divide `self`.
    pub fn div_exact(&self, d: &IntPoly) -> Option<IntPoly> {
        let dd = d.degree()?;
        let ld = d.lc().unwrap();
        let mut r = self.clone();
        let mut q = vec![BigInt::zero(); self.coeffs.len().saturating_sub(dd).max(1)];
        while let Some(dr) = r.degree() {
            if dr < dd {
                return None;
            }
            let (quo, rem) = r.lc().unwrap().div_rem(ld);
            if !rem.is_zero() {
                return None;
            }
            q[dr - dd] = quo.clone();
            r = r - IntPoly::monomial(quo, dr - dd) * d;
        }
        Some(IntPoly::new(q))
    }

    /// Primitive gcd (content discarded, positive leading coefficient),
    /// via the primitive polynomial remainder sequence.
    pub fn primitive_gcd(&self, other: &IntPoly) -> IntPoly {
        let mut a = self.primitive_part();
        let mut b = other.primitive_part();
        if a.degree() < b.degree() {
            std::mem::swap(&mut a, &mut b);
        }
        while !b.is_zero() {
            let r = a.pseudo_rem(&b).primitive_part();
            a = b;
            b = r;
        }
        a.primitive_part()
    }

    /// True when no repeated factor of positive degree exists. The zero
    /// polynomial is not squarefree.
    pub fn is_squarefree(&self) -> bool {
        match self.degree() {
            None => false,
            Some(0) => true,
            Some(_) => self.primitive_gcd(&self.derivative()).degree() == Some(0),
        }
    }

    /// Primitive squarefree part: product of the distinct irreducible
    /// factors of positive degree (times nothing else).
    pub fn squarefree_part(&self) -> IntPoly {
        let p = self.primitive_part();
        match p.degree() {
            None | Some(0) => p,
            Some(_) => {
                let g = p.primitive_gcd(&p.derivative());
                p.div_exact(&g)
                    .expect("gcd divides its argument")
                    .primitive_part()
            }
        }
    }
}

impl IntPoly {
    /// Renders the polynomial with `var` as the indeterminate.
    pub fn to_string_in(&self, var: &str) -> String {
        if self.is_zero() {
            return "0".to_string();
        }
        let mut out = String::new();
        for (k, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            let neg = c.is_negative();
            let a = c.abs();
            if out.is_empty() {
                if neg {
                    out.push('-');
                }
            } else {
                out.push_str(if neg { " - " } else { " + " });
            }
            let term = match (k, a.is_one()) {
                (0, _) => a.to_string(),
                (1, true) => var.to_string(),
                (1, false) => format!("{a}*{var}"),
                (_, true) => format!("{var}^{k}"),
                (_, false) => format!("{a}*{var}^{k}"),
            };
            out.push_str(&term);
        }
        out
    }
}

impl fmt::Display for IntPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_string_in("t"))
    }
}

fn add_vecs(a: &[BigInt], b: &[BigInt], negate_b: bool) -> Vec<BigInt> {
    let n = a.len().max(b.len());
    (0..n)
        .map(|k| {
            let x = a.get(k).cloned().unwrap_or_default();
            let y = b.get(k).cloned().unwrap_or_default();
            if negate_b {
                x - y
            } else {
                x + y
            }
        })
        .collect()
}

pub(crate) fn mul_vecs(a: &[BigInt], b: &[BigInt]) -> Vec<BigInt> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![BigInt::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

impl Add for IntPoly {
    type Output = IntPoly;
    fn add(self, rhs: IntPoly) -> IntPoly {
        IntPoly::new(add_vecs(&self.coeffs, &rhs.coeffs, false))
    }
}

impl Sub for IntPoly {
    type Output = IntPoly;
    fn sub(self, rhs: IntPoly) -> IntPoly {
        IntPoly::new(add_vecs(&self.coeffs, &rhs.coeffs, true))
    }
}

impl Mul<&IntPoly> for IntPoly {
    type Output = IntPoly;
    fn mul(self, rhs: &IntPoly) -> IntPoly {
        IntPoly::new(mul_vecs(&self.coeffs, &rhs.coeffs))
    }
}

impl Mul for &IntPoly {
    type Output = IntPoly;
    fn mul(self, rhs: &IntPoly) -> IntPoly {
        IntPoly::new(mul_vecs(&self.coeffs, &rhs.coeffs))
    }
}

impl Neg for IntPoly {
    type Output = IntPoly;
    fn neg(self) -> IntPoly {
        IntPoly::new(self.coeffs.into_iter().map(|c| -c).collect())
    }
}

/// Fraction-free (Bareiss) determinant of a square integer matrix.
pub fn det_bareiss(mut m: Vec<Vec<BigInt>>) -> BigInt {
    let n = m.len();
    if n == 0 {
        return BigInt::one();
    }
    let mut negate = false;
    let mut prev = BigInt::one();
    for k in 0..n - 1 {
        if m[k][k].is_zero() {
            match (k + 1..n).find(|&i| !m[i][k].is_zero()) {
                Some(i) => {
                    m.swap(k, i);
                    negate = !negate;
                }
                None => return BigInt::zero(),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let v = &m[i][j] * &m[k][k] - &m[i][k] * &m[k][j];
                m[i][j] = v / &prev;
            }
        }
        prev = m[k][k].clone();
    }
    let d = m[n - 1][n - 1].clone();
    if negate {
        -d
    } else {
        d
    }
}

/// Sylvester matrix of two coefficient vectors taken at their formal
/// degrees `f.len() - 1` and `g.len() - 1` (leading zeros are kept, so the
/// determinant is the resultant of the corresponding binary forms).
pub fn sylvester_matrix(f: &[BigInt], g: &[BigInt]) -> Vec<Vec<BigInt>> {
    let m = f.len() - 1;
    let n = g.len() - 1;
    let size = m + n;
    let mut rows = Vec::with_capacity(size);
    for i in 0..n {
        let mut row = vec![BigInt::zero(); size];
        for (k, c) in f.iter().enumerate() {
            row[i + k] = c.clone();
        }
        rows.push(row);
    }
    for i in 0..m {
        let mut row = vec![BigInt::zero(); size];
        for (k, c) in g.iter().enumerate() {
            row[i + k] = c.clone();
        }
        rows.push(row);
    }
    rows
}

/// Resultant of two formal-degree coefficient vectors, up to a sign that
/// depends only on the two formal degrees.
pub fn resultant(f: &[BigInt], g: &[BigInt]) -> BigInt {
    assert!(!f.is_empty() && !g.is_empty(), "empty coefficient vector");
    det_bareiss(sylvester_matrix(f, g))
}

/// Solves `m * x = rhs` over the rationals. `None` when singular.
pub fn solve_rational(m: &[Vec<BigInt>], rhs: &[BigInt]) -> Option<Vec<BigRational>> {
    let n = m.len();
    let mut a: Vec<Vec<BigRational>> = m
        .iter()
        .zip(rhs)
        .map(|(row, b)| {
            row.iter()
                .chain(std::iter::once(b))
                .map(|c| BigRational::from_integer(c.clone()))
                .collect()
        })
        .collect();
    for col in 0..n {
        let piv = (col..n).find(|&i| !a[i][col].is_zero())?;
        a.swap(col, piv);
        let inv = a[col][col].recip();
        for j in col..=n {
            a[col][j] = &a[col][j] * &inv;
        }
        for i in 0..n {
            if i == col || a[i][col].is_zero() {
                continue;
            }
            let factor = a[i][col].clone();
            for j in col..=n {
                let delta = &factor * &a[col][j];
                a[i][j] = &a[i][j] - delta;
            }
        }
    }
    Some(a.into_iter().map(|row| row[n].clone()).collect())
}

/// Newton interpolation through integer nodes; `None` if the interpolant
/// does not have integer coefficients.
pub fn interpolate(nodes: &[(BigInt, BigInt)]) -> Option<IntPoly> {
    let n = nodes.len();
    let xs: Vec<BigRational> = nodes
        .iter()
        .map(|(x, _)| BigRational::from_integer(x.clone()))
        .collect();
    let mut dd: Vec<BigRational> = nodes
        .iter()
        .map(|(_, y)| BigRational::from_integer(y.clone()))
        .collect();
    for level in 1..n {
        for i in (level..n).rev() {
            dd[i] = (&dd[i] - &dd[i - 1]) / (&xs[i] - &xs[i - level]);
        }
    }
    // Horner expansion of the Newton form into the monomial basis.
    let mut acc: Vec<BigRational> = Vec::new();
    for i in (0..n).rev() {
        let mut next = vec![BigRational::zero(); acc.len() + 1];
        for (k, c) in acc.iter().enumerate() {
            next[k + 1] += c;
            next[k] -= c * &xs[i];
        }
        next[0] += &dd[i];
        acc = next;
    }
    let mut coeffs = Vec::with_capacity(acc.len());
    for c in acc {
        if !c.is_integer() {
            return None;
        }
        coeffs.push(c.to_integer());
    }
    Some(IntPoly::new(coeffs))
}

// ---------------------------------------------------------------------------
// Real root isolation (Sturm) and exact rational root recovery.

type RatPoly = Vec<BigRational>;

fn rat_trim(mut p: RatPoly) -> RatPoly {
    while p.last().is_some_and(|c| c.is_zero()) {
        p.pop();
    }
    p
}

fn rat_rem(a: &RatPoly, b: &RatPoly) -> RatPoly {
    let mut r = a.clone();
    let db = b.len() - 1;
    let lb = b.last().unwrap().clone();
    loop {
        r = rat_trim(r);
        if r.len() < b.len() {
            return r;
        }
        let shift = r.len() - 1 - db;
        let q = r.last().unwrap() / &lb;
        for (k, c) in b.iter().enumerate() {
            r[shift + k] = &r[shift + k] - &q * c;
        }
        r.pop();
    }
}

/// Positive multiple of `p` with coprime integer coefficients.
fn rat_to_int(p: &RatPoly) -> IntPoly {
    let lcm = p.iter().fold(BigInt::one(), |l, c| l.lcm(c.denom()));
    let ints: Vec<BigInt> = p.iter().map(|c| (c * BigRational::from_integer(lcm.clone())).to_integer()).collect();
    let g = ints.iter().fold(BigInt::zero(), |g, c| g.gcd(c));
    IntPoly::new(ints.into_iter().map(|c| c / &g).collect())
}

/// Sturm chain, each member rescaled by a positive constant to keep the
/// coefficients small.
struct Sturm {
    chain: Vec<IntPoly>,
}

impl Sturm {
    fn new(p: &IntPoly) -> Self {
        let to_rat = |q: &IntPoly| -> RatPoly {
            q.coeffs()
                .iter()
                .map(|c| BigRational::from_integer(c.clone()))
                .collect()
        };
        let mut chain = vec![p.clone(), p.derivative()];
        while !chain[chain.len() - 1].is_zero() {
            let n = chain.len();
            let r: RatPoly = rat_rem(&to_rat(&chain[n - 2]), &to_rat(&chain[n - 1]))
                .into_iter()
                .map(|c| -c)
                .collect();
            if r.is_empty() {
                break;
            }
            chain.push(rat_to_int(&r));
        }
        chain.retain(|q| !q.is_zero());
        Sturm { chain }
    }

    fn variations(&self, t: &BigRational) -> usize {
        let mut count = 0;
        let mut last = 0i8;
        for p in &self.chain {
            let v = p.sign_at(t);
            if v == 0 {
                continue;
            }
            if last != 0 && last != v {
                count += 1;
            }
            last = v;
        }
        count
    }

    /// Number of distinct real roots in `(a, b]`.
    fn count(&self, a: &BigRational, b: &BigRational) -> usize {
        self.variations(a).saturating_sub(self.variations(b))
    }
}

/// The fraction with the smallest denominator strictly inside `(a, b)`.
pub fn simplest_between(a: &BigRational, b: &BigRational) -> BigRational {
    assert!(a < b);
    let fl = a.floor();
    let next = &fl + BigRational::one();
    if &next < b {
        // Some integer lies inside; pick the one of least magnitude.
        if a.is_negative() && b.is_positive() {
            return BigRational::zero();
        }
        if b.is_positive() {
            return next;
        }
        let c = b.ceil() - BigRational::one();
        return if &c > a { c } else { next };
    }
    // No integer in (a, b): continued-fraction step.
    let lo = a - &fl;
    let hi = b - &fl;
    let inner_lo = hi.recip();
    let inner = if lo.is_zero() {
        inner_lo.floor() + BigRational::one()
    } else {
        simplest_between(&inner_lo, &lo.recip())
    };
    fl + inner.recip()
}

/// All rational roots of a nonzero integer polynomial, ascending and
/// without repetition.
pub fn rational_roots(p: &IntPoly) -> Vec<BigRational> {
    let q = p.squarefree_part();
    let deg = match q.degree() {
        None | Some(0) => return Vec::new(),
        Some(d) => d,
    };
    let lc = q.lc().unwrap().abs();
    let lc_rat = BigRational::from_integer(lc.clone());
    let bound = BigRational::one()
        + q.coeffs()[..deg]
            .iter()
            .map(|c| BigRational::from_integer(c.abs()) / &lc_rat)
            .max()
            .unwrap_or_default();
    let sturm = Sturm::new(&q);
    // Two fractions with denominators at most |lc| differ by at least
    // 1/lc^2, so an isolating interval narrower than that holds at most one.
    let resolution = BigRational::new(BigInt::one(), &lc * &lc);
    let two = BigRational::from_integer(BigInt::from(2));

    let mut roots = Vec::new();
    let mut stack = vec![(-bound.clone(), bound)];
    while let Some((a, b)) = stack.pop() {
        let n = sturm.count(&a, &b);
        if n == 0 {
            continue;
        }
        let mid = (&a + &b) / &two;
        if n == 1 && &b - &a < resolution {
            let s = simplest_between(&a, &b);
            if q.sign_at(&s) == 0 {
                roots.push(s);
            }
            continue;
        }
        if q.sign_at(&mid) == 0 {
            roots.push(mid.clone());
            // Step off the root on both sides until only it is enclosed.
            let mut delta = (&b - &a) / BigRational::from_integer(BigInt::from(4));
            loop {
                let l = &mid - &delta;
                let r = &mid + &delta;
                if q.sign_at(&l) != 0
                    && q.sign_at(&r) != 0
                    && sturm.count(&l, &r) == 1
                {
                    stack.push((a.clone(), l));
                    stack.push((r, b.clone()));
                    break;
                }
                delta /= &two;
            }
            continue;
        }
        stack.push((a, mid.clone()));
        stack.push((mid, b));
    }
    roots.sort();
    roots
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(c: &[i64]) -> IntPoly {
        IntPoly::from_i64s(c)
    }

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn gcd_and_squarefree() {
        // (t-1)^2 (t+2)
        let f = p(&[2, -3, 0, 1]);
        assert!(!f.is_squarefree());
        assert_eq!(f.squarefree_part(), p(&[-2, 1, 1]));
        let g = p(&[-1, 0, 1]);
        assert_eq!(f.primitive_gcd(&g), p(&[-1, 1]));
        assert!(p(&[1, 0, 1]).is_squarefree());
        assert!(!IntPoly::zero().is_squarefree());
    }

    #[test]
    fn exact_division() {
        let f = p(&[-6, 1, 1]); // (t+3)(t-2)
        assert_eq!(f.div_exact(&p(&[3, 1])), Some(p(&[-2, 1])));
        assert_eq!(f.div_exact(&p(&[1, 1])), None);
    }

    #[test]
    fn bareiss_matches_cofactor_expansion() {
        let m = vec![
            vec![2, -1, 0, 3],
            vec![1, 4, 2, -2],
            vec![0, 5, -3, 1],
            vec![7, 0, 1, 1],
        ];
        let big: Vec<Vec<BigInt>> = m
            .iter()
            .map(|r| r.iter().map(|&x| BigInt::from(x)).collect())
            .collect();
        fn cofactor(m: &[Vec<i64>]) -> i64 {
            if m.len() == 1 {
                return m[0][0];
            }
            (0..m.len())
                .map(|j| {
                    let minor: Vec<Vec<i64>> = m[1..]
                        .iter()
                        .map(|r| {
                            r.iter()
                                .enumerate()
                                .filter(|&(k, _)| k != j)
                                .map(|(_, &x)| x)
                                .collect()
                        })
                        .collect();
                    let s = if j % 2 == 0 { 1 } else { -1 };
                    s * m[0][j] * cofactor(&minor)
                })
                .sum()
        }
        assert_eq!(det_bareiss(big), BigInt::from(cofactor(&m)));
    }

    #[test]
    fn resultant_detects_common_roots() {
        // (t-1)(t-2) and (t-2)(t+5)
        let f = [2, -3, 1].map(BigInt::from);
        let g = [-10, 3, 1].map(BigInt::from);
        assert!(resultant(&f, &g).is_zero());
        // t^2 + 1 and t - 3: resultant = (3^2 + 1) up to sign
        let f = [1, 0, 1].map(BigInt::from);
        let g = [-3, 1].map(BigInt::from);
        assert_eq!(resultant(&f, &g).abs(), BigInt::from(10));
    }

    #[test]
    fn interpolation_recovers_polynomial() {
        let f = p(&[3, -1, 0, 2]);
        let nodes: Vec<_> = (0..4)
            .map(|x| (BigInt::from(x), f.eval(&BigInt::from(x))))
            .collect();
        assert_eq!(interpolate(&nodes), Some(f));
    }

    #[test]
    fn rational_roots_found() {
        // (2t - 1)(3t + 4)(t^2 - 2)
        let f = &(&p(&[-1, 2]) * &p(&[4, 3])) * &p(&[-2, 0, 1]);
        assert_eq!(rational_roots(&f), vec![q(-4, 3), q(1, 2)]);
        assert_eq!(rational_roots(&p(&[0, 0, 1])), vec![q(0, 1)]);
        assert!(rational_roots(&p(&[1, 0, 1])).is_empty());
        // root exactly at the first bisection midpoint
        assert_eq!(rational_roots(&p(&[0, 1, 1])), vec![q(-1, 1), q(0, 1)]);
    }

    #[test]
    fn simplest_fraction() {
        assert_eq!(simplest_between(&q(1, 3), &q(1, 2)), q(2, 5));
        assert_eq!(simplest_between(&q(-1, 2), &q(1, 2)), q(0, 1));
        assert_eq!(simplest_between(&q(7, 2), &q(9, 2)), q(4, 1));
        assert_eq!(simplest_between(&q(-9, 2), &q(-7, 2)), q(-4, 1));
        assert_eq!(simplest_between(&q(3, 1), &q(7, 2)), q(10, 3));
        assert_eq!(simplest_between(&q(-1, 2), &q(-1, 3)), q(-2, 5));
    }
}
