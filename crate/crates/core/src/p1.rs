//! Points, binary forms and rational maps on the projective line over Q,
//! with the arithmetic needed for heights and critical values.

use crate::error::{invalid, Error, Result};
use crate::poly::{interpolate, rational_roots, resultant, solve_rational, IntPoly};
use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use std::fmt;

/// A point `(x : y)` of P^1(Q) with coprime integer coordinates, `y > 0`,
/// or the point at infinity `(1 : 0)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ProjPointQ {
    x: BigInt,
    y: BigInt,
}

impl ProjPointQ {
    pub fn new(x: BigInt, y: BigInt) -> Result<Self> {
        if x.is_zero() && y.is_zero() {
            return Err(invalid("(0 : 0) is not a point"));
        }
        let g = x.gcd(&y);
        Ok(Self::from_coprime(x / &g, y / g))
    }

    pub fn from_i64(x: i64, y: i64) -> Result<Self> {
        Self::new(BigInt::from(x), BigInt::from(y))
    }

    pub fn from_rational(q: &BigRational) -> Self {
        Self::from_coprime(q.numer().clone(), q.denom().clone())
    }

    pub fn infinity() -> Self {
        ProjPointQ {
            x: BigInt::one(),
            y: BigInt::zero(),
        }
    }

    /// Sign normalization for coordinates already known to be coprime.
    fn from_coprime(x: BigInt, y: BigInt) -> Self {
        if y.is_negative() || (y.is_zero() && x.is_negative()) {
            ProjPointQ { x: -x, y: -y }
        } else {
            ProjPointQ { x, y }
        }
    }

    pub fn x(&self) -> &BigInt {
        &self.x
    }

    pub fn y(&self) -> &BigInt {
        &self.y
    }

    pub fn is_infinity(&self) -> bool {
        self.y.is_zero()
    }

    /// `max(|x|, |y|)`, whose logarithm is the height.
    pub fn size(&self) -> BigUint {
        self.x.magnitude().max(self.y.magnitude()).clone()
    }

    /// Logarithmic Weil height `ln max(|x|, |y|)` in nats.
    pub fn height(&self) -> f64 {
        ln_big(&self.size())
    }
}

impl fmt::Display for ProjPointQ {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}:{})", self.x, self.y)
    }
}

/// Natural log of a big unsigned integer from its top 64 bits plus a
/// binary exponent.
pub fn ln_big(m: &BigUint) -> f64 {
    let bits = m.bits();
    if bits == 0 {
        return f64::NEG_INFINITY;
    }
    if bits <= 64 {
        return (m.to_u64().unwrap() as f64).ln();
    }
    let shift = bits - 64;
    let top = (m >> shift).to_u64().unwrap() as f64;
    top.ln() + shift as f64 * std::f64::consts::LN_2
}

/// Binary form `sum_k coeffs[k] X^k Y^(d-k)` of formal degree
/// `d = coeffs.len() - 1`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct BinaryForm {
    coeffs: Vec<BigInt>,
}

impl BinaryForm {
    pub fn new(coeffs: Vec<BigInt>) -> Self {
        assert!(!coeffs.is_empty(), "a form needs at least one coefficient");
        BinaryForm { coeffs }
    }

    pub fn from_i64s(coeffs: &[i64]) -> Self {
        Self::new(coeffs.iter().map(|&c| BigInt::from(c)).collect())
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// `coeffs()[k]` multiplies `X^k Y^(d-k)`.
    pub fn coeffs(&self) -> &[BigInt] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero())
    }

    pub fn eval(&self, x: &BigInt, y: &BigInt) -> BigInt {
        let d = self.degree();
        let mut acc = self.coeffs[d].clone();
        let mut ypow = BigInt::one();
        for k in (0..d).rev() {
            ypow *= y;
            acc = acc * x + &self.coeffs[k] * &ypow;
        }
        acc
    }

    pub fn eval_f64(&self, x: f64, y: f64) -> f64 {
        let d = self.degree();
        let mut acc = self.coeffs[d].to_f64().unwrap_or(f64::NAN);
        let mut ypow = 1.0;
        for k in (0..d).rev() {
            ypow *= y;
            acc = acc * x + self.coeffs[k].to_f64().unwrap_or(f64::NAN) * ypow;
        }
        acc
    }

    pub fn partial_x(&self) -> BinaryForm {
        if self.degree() == 0 {
            return Self::new(vec![BigInt::zero()]);
        }
        Self::new(
            (1..self.coeffs.len())
                .map(|k| &self.coeffs[k] * BigInt::from(k))
                .collect(),
        )
    }

    pub fn partial_y(&self) -> BinaryForm {
        let d = self.degree();
        if d == 0 {
            return Self::new(vec![BigInt::zero()]);
        }
        Self::new((0..d).map(|k| &self.coeffs[k] * BigInt::from(d - k)).collect())
    }

    pub fn mul(&self, other: &BinaryForm) -> BinaryForm {
        let mut out = vec![BigInt::zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Self::new(out)
    }

    /// Coefficientwise `self - other`; both forms must share a degree.
    pub fn sub(&self, other: &BinaryForm) -> BinaryForm {
        assert_eq!(self.degree(), other.degree());
        Self::new(self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a - b).collect())
    }

    pub fn scale(&self, k: &BigInt) -> BinaryForm {
        Self::new(self.coeffs.iter().map(|c| c * k).collect())
    }

    pub fn content(&self) -> BigInt {
        self.coeffs.iter().fold(BigInt::zero(), |g, c| g.gcd(c))
    }

    /// Sum of absolute values of the coefficients.
    pub fn l1_norm(&self) -> BigInt {
        self.coeffs.iter().map(|c| c.abs()).sum()
    }

    /// The polynomial `F(x, 1)`.
    pub fn dehomogenize(&self) -> IntPoly {
        IntPoly::new(self.coeffs.clone())
    }

    /// Multiplicity of `(1 : 0)` as a root: the number of vanishing top
    /// coefficients. A zero form reports its full degree plus one.
    pub fn multiplicity_at_infinity(&self) -> usize {
        self.coeffs.iter().rev().take_while(|c| c.is_zero()).count()
    }

    /// No repeated linear factor over the algebraic closure.
    pub fn is_squarefree(&self) -> bool {
        if self.is_zero() {
            return false;
        }
        self.multiplicity_at_infinity() <= 1 && self.dehomogenize().is_squarefree()
    }

    /// Number of distinct roots in P^1 over the algebraic closure.
    pub fn distinct_root_count(&self) -> usize {
        let finite = self.dehomogenize().squarefree_part().degree().unwrap_or(0);
        finite + usize::from(self.multiplicity_at_infinity() > 0)
    }

    /// `sum_k c_k P^k Q^(d-k)`: substitution of the forms `(P, Q)` for
    /// `(X, Y)`. `P` and `Q` must share a degree.
    pub fn substitute(&self, p: &BinaryForm, q: &BinaryForm) -> BinaryForm {
        assert_eq!(p.degree(), q.degree());
        let d = self.degree();
        let mut p_pows = vec![Self::new(vec![BigInt::one()])];
        let mut q_pows = vec![Self::new(vec![BigInt::one()])];
        for k in 1..=d {
            p_pows.push(p_pows[k - 1].mul(p));
            q_pows.push(q_pows[k - 1].mul(q));
        }
        let mut out = vec![BigInt::zero(); d * p.degree() + 1];
        for (k, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let term = p_pows[k].mul(&q_pows[d - k]);
            for (slot, t) in out.iter_mut().zip(term.coeffs) {
                *slot += c * t;
            }
        }
        Self::new(out)
    }
}

/// Homogeneous resultant of two forms at their formal degrees (sign
/// ignored; only vanishing and absolute value are used).
pub fn form_resultant(f: &BinaryForm, g: &BinaryForm) -> BigInt {
    resultant(f.coeffs(), g.coeffs()).abs()
}

/// `A F + B G = r X^(2d-1)` (when `at_infinity`) or `r Y^(2d-1)`, with
/// `gcd(content(A), content(B), r) = 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct BezoutIdentity {
    pub a: BinaryForm,
    pub b: BinaryForm,
    pub r: BigInt,
    pub at_infinity: bool,
}

/// Additive constants in `|h(phi(P)) - d h(P)| <= C`.
#[derive(Clone, Debug, PartialEq)]
pub struct HeightOffset {
    /// `h(phi(P)) - d h(P) <= upper`.
    pub upper: f64,
    /// `d h(P) - h(phi(P)) <= lower`.
    pub lower: f64,
}

impl HeightOffset {
    pub fn bound(&self) -> f64 {
        self.upper.max(self.lower).max(0.0)
    }
}

/// A rational map `(X : Y) -> (F(X,Y) : G(X,Y))` of degree `d >= 2` with
/// integer coefficients and `Res(F, G) != 0`.
///
/// Stored primitive (joint content 1) with the top nonzero coefficient of
/// `G` positive, so equal maps have equal representations.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct RationalMapQ {
    f: BinaryForm,
    g: BinaryForm,
    res: BigInt,
}

impl RationalMapQ {
    pub fn new(f: BinaryForm, g: BinaryForm) -> Result<Self> {
        if f.degree() != g.degree() {
            return Err(invalid("numerator and denominator forms differ in degree"));
        }
        if f.degree() < 2 {
            return Err(invalid(format!("map degree {} is below 2", f.degree())));
        }
        let res = form_resultant(&f, &g);
        if res.is_zero() {
            return Err(invalid(
                "numerator and denominator have a common root (resultant is zero)",
            ));
        }
        let content = f.content().gcd(&g.content());
        let mut f = BinaryForm::new(f.coeffs.iter().map(|c| c / &content).collect());
        let mut g = BinaryForm::new(g.coeffs.iter().map(|c| c / &content).collect());
        let lead = g.coeffs.iter().rev().find(|c| !c.is_zero()).unwrap();
        if lead.is_negative() {
            f = f.scale(&BigInt::from(-1));
            g = g.scale(&BigInt::from(-1));
        }
        let res = form_resultant(&f, &g);
        Ok(RationalMapQ { f, g, res })
    }

    /// From numerator and denominator coefficient lists, highest degree
    /// first, as in `x -> (2x^2 + 1) / (x)` given by `[2,0,1]` and `[1,0]`.
    pub fn from_coefficients(numerator: &[BigInt], denominator: &[BigInt]) -> Result<Self> {
        let trim = |v: &[BigInt]| -> Vec<BigInt> {
            let mut asc: Vec<BigInt> = v.iter().rev().cloned().collect();
            while asc.last().is_some_and(|c| c.is_zero()) {
                asc.pop();
            }
            asc
        };
        let mut num = trim(numerator);
        let mut den = trim(denominator);
        if num.is_empty() {
            return Err(invalid("numerator is zero"));
        }
        if den.is_empty() {
            return Err(invalid("denominator is zero"));
        }
        let d = num.len().max(den.len()) - 1;
        num.resize(d + 1, BigInt::zero());
        den.resize(d + 1, BigInt::zero());
        Self::new(BinaryForm::new(num), BinaryForm::new(den))
    }

    pub fn from_i64(numerator: &[i64], denominator: &[i64]) -> Result<Self> {
        let conv = |v: &[i64]| v.iter().map(|&c| BigInt::from(c)).collect::<Vec<_>>();
        Self::from_coefficients(&conv(numerator), &conv(denominator))
    }

    /// Inverse of [`RationalMapQ::from_coefficients`]: both lists highest
    /// degree first, padded to the map degree.
    pub fn to_coefficients(&self) -> (Vec<BigInt>, Vec<BigInt>) {
        let strip = |f: &BinaryForm| -> Vec<BigInt> {
            let mut v: Vec<BigInt> = f.coeffs.iter().rev().cloned().collect();
            while v.len() > 1 && v[0].is_zero() {
                v.remove(0);
            }
            v
        };
        (strip(&self.f), strip(&self.g))
    }

    pub fn degree(&self) -> usize {
        self.f.degree()
    }

    pub fn numerator(&self) -> &BinaryForm {
        &self.f
    }

    pub fn denominator(&self) -> &BinaryForm {
        &self.g
    }

    /// `|Res(F, G)|`.
    pub fn resultant(&self) -> &BigInt {
        &self.res
    }

    /// The image point. Uses `gcd(F(x,y), G(x,y)) | Res(F, G)` to keep the
    /// gcd computation small.
    pub fn evaluate(&self, p: &ProjPointQ) -> ProjPointQ {
        let (fx, gx) = self.evaluate_raw(p);
        let g = if self.res.is_one() {
            BigInt::one()
        } else {
            fx.mod_floor(&self.res).gcd(&gx.mod_floor(&self.res)).gcd(&self.res)
        };
        assert!(
            !(fx.is_zero() && gx.is_zero()),
            "invariant broken: image of {p} under a map with nonzero resultant vanished"
        );
        if g.is_one() {
            ProjPointQ::from_coprime(fx, gx)
        } else {
            ProjPointQ::from_coprime(fx / &g, gx / g)
        }
    }

    /// `(F(x, y), G(x, y))` before reduction.
    pub fn evaluate_raw(&self, p: &ProjPointQ) -> (BigInt, BigInt) {
        (self.f.eval(&p.x, &p.y), self.g.eval(&p.x, &p.y))
    }

    /// `self ∘ inner`, i.e. `P -> self(inner(P))`.
    pub fn compose(&self, inner: &RationalMapQ) -> RationalMapQ {
        let f = self.f.substitute(&inner.f, &inner.g);
        let g = self.g.substitute(&inner.f, &inner.g);
        Self::new(f, g).expect("composition of maps with nonzero resultant is a map")
    }

    /// The Bézout identities for `X^(2d-1)` and `Y^(2d-1)`, each reduced
    /// by its content.
    pub fn bezout_identities(&self) -> Result<[BezoutIdentity; 2]> {
        let d = self.degree();
        let n = 2 * d;
        // column j < d: X^j Y^(d-1-j) F; column d + j: X^j Y^(d-1-j) G
        let mut m = vec![vec![BigInt::zero(); n]; n];
        for j in 0..d {
            for (k, c) in self.f.coeffs.iter().enumerate() {
                m[j + k][j] = c.clone();
            }
            for (k, c) in self.g.coeffs.iter().enumerate() {
                m[j + k][d + j] = c.clone();
            }
        }
        let solve = |target: usize, at_infinity: bool| -> Result<BezoutIdentity> {
            let mut rhs = vec![BigInt::zero(); n];
            rhs[target] = BigInt::one();
            let sol = solve_rational(&m, &rhs).ok_or_else(|| {
                Error::InvariantBroken("Bézout system singular despite nonzero resultant".into())
            })?;
            let denom = sol.iter().fold(BigInt::one(), |l, q| l.lcm(q.denom()));
            let ints: Vec<BigInt> = sol.iter().map(|q| q.numer() * (&denom / q.denom())).collect();
            let mut id = BezoutIdentity {
                a: BinaryForm::new(ints[..d].to_vec()),
                b: BinaryForm::new(ints[d..].to_vec()),
                r: denom,
                at_infinity,
            };
            let lhs = id.a.mul(&self.f);
            let rhs_form = id.b.mul(&self.g);
            let check: Vec<BigInt> = lhs.coeffs.iter().zip(&rhs_form.coeffs).map(|(a, b)| a + b).collect();
            let ok = check
                .iter()
                .enumerate()
                .all(|(k, c)| if k == target { *c == id.r } else { c.is_zero() });
            if !ok {
                return Err(Error::InvariantBroken("Bézout identity failed to verify".into()));
            }
            // the common denominator already makes gcd(content, r) = 1
            if id.r.is_negative() {
                id.r = -id.r;
                id.a = id.a.scale(&BigInt::from(-1));
                id.b = id.b.scale(&BigInt::from(-1));
            }
            Ok(id)
        };
        Ok([solve(n - 1, true)?, solve(0, false)?])
    }

    /// Upper and lower height offsets from coefficient norms and the
    /// Bézout identities.
    pub fn height_offset(&self) -> Result<HeightOffset> {
        let upper = ln_big(self.f.l1_norm().max(self.g.l1_norm()).magnitude());
        let ids = self.bezout_identities()?;
        let l = ids[0].r.lcm(&ids[1].r);
        let lower = ids
            .iter()
            .map(|id| {
                let num = (id.a.l1_norm() + id.b.l1_norm()) * &l;
                ln_big(num.magnitude()) - ln_big(id.r.magnitude())
            })
            .fold(f64::NEG_INFINITY, f64::max);
        Ok(HeightOffset { upper, lower })
    }

    /// A constant `C` with `|h(phi(P)) - d h(P)| <= C` for every `P`.
    pub fn height_offset_bound(&self) -> Result<f64> {
        Ok(self.height_offset()?.bound())
    }

    /// `W = F_X G_Y - F_Y G_X`, of degree `2d - 2`; its roots are the
    /// critical points.
    pub fn wronskian(&self) -> BinaryForm {
        let a = self.f.partial_x().mul(&self.g.partial_y());
        let b = self.f.partial_y().mul(&self.g.partial_x());
        a.sub(&b)
    }

    /// Critical values: a polynomial whose roots are the finite critical
    /// values, plus a flag for infinity.
    pub fn critical_values(&self) -> Result<CriticalData> {
        let d = self.degree();
        let w = self.wronskian();
        if w.is_zero() {
            return Err(Error::InvariantBroken(
                "Wronskian vanishes identically (inseparable map)".into(),
            ));
        }
        let top = 2 * d - 2;
        let nodes: Vec<(BigInt, BigInt)> = (0..=top)
            .map(|t| {
                let t = BigInt::from(t);
                let ft = self.f.sub(&self.g.scale(&t));
                (t, resultant(ft.coeffs(), w.coeffs()))
            })
            .collect();
        let poly = interpolate(&nodes)
            .ok_or_else(|| Error::InvariantBroken("critical value polynomial is not integral".into()))?
            .primitive_part();
        let infinity = form_resultant(&self.g, &w).is_zero();
        let finite_degree = poly.degree().unwrap_or(0);
        let simple = w.is_squarefree() && poly.is_squarefree() && top - finite_degree <= 1;
        let rational = rational_roots(&poly);
        let mut rest = poly.squarefree_part();
        for r in &rational {
            let lin = IntPoly::new(vec![-r.numer().clone(), r.denom().clone()]);
            rest = rest
                .div_exact(&lin)
                .ok_or_else(|| Error::InvariantBroken("rational root does not divide".into()))?;
        }
        let irrational_part = match rest.degree() {
            Some(k) if k > 0 => Some(rest.primitive_part()),
            _ => None,
        };
        Ok(CriticalData {
            wronskian: w,
            value_poly: poly,
            infinity_is_critical_value: infinity,
            simple,
            rational_values: rational,
            irrational_part,
        })
    }
}

impl fmt::Display for RationalMapQ {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let num = self.f.dehomogenize().to_string_in("x");
        let den = self.g.dehomogenize().to_string_in("x");
        if den == "1" {
            write!(f, "{num}")
        } else {
            write!(f, "({num})/({den})")
        }
    }
}

/// Critical-value data of one map.
#[derive(Clone, Debug, PartialEq)]
pub struct CriticalData {
    /// `F_X G_Y - F_Y G_X`, not content-reduced.
    pub wronskian: BinaryForm,
    /// Primitive polynomial in `t` whose roots, with multiplicity, are the
    /// finite critical values. Its degree falls short of `2d - 2` by the
    /// number of critical points mapping to infinity.
    pub value_poly: IntPoly,
    pub infinity_is_critical_value: bool,
    /// Distinct critical points, each of ramification index 2, with
    /// distinct images.
    pub simple: bool,
    /// Rational finite critical values, ascending.
    pub rational_values: Vec<BigRational>,
    /// Primitive squarefree cofactor holding the irrational critical
    /// values; not split into irreducible factors.
    pub irrational_part: Option<IntPoly>,
}

impl CriticalData {
    /// Short human-readable list: rational values, `inf`, and the
    /// defining polynomial of the remaining ones.
    pub fn describe(&self) -> String {
        let mut parts: Vec<String> = self.rational_values.iter().map(|q| q.to_string()).collect();
        if self.infinity_is_critical_value {
            parts.push("inf".into());
        }
        if let Some(p) = &self.irrational_part {
            parts.push(format!("roots of {p}"));
        }
        parts.join("; ")
    }
}

/// True when the two maps share no critical value (infinity included).
pub fn are_critically_separate(a: &CriticalData, b: &CriticalData) -> bool {
    if a.infinity_is_critical_value && b.infinity_is_critical_value {
        return false;
    }
    a.value_poly.primitive_gcd(&b.value_poly).degree() == Some(0)
}

/// Per-map row of a [`GenericSetReport`].
#[derive(Clone, Debug, PartialEq)]
pub struct MapCheck {
    pub index: usize,
    pub degree: usize,
    pub simple: bool,
    pub degree_at_least_4: bool,
    pub critical: CriticalData,
}

/// Per-pair row of a [`GenericSetReport`].
#[derive(Clone, Debug, PartialEq)]
pub struct PairCheck {
    pub i: usize,
    pub j: usize,
    pub separate: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GenericSetReport {
    pub maps: Vec<MapCheck>,
    pub pairs: Vec<PairCheck>,
}

impl GenericSetReport {
    pub fn all_simple(&self) -> bool {
        self.maps.iter().all(|m| m.simple)
    }

    pub fn all_separate(&self) -> bool {
        self.pairs.iter().all(|p| p.separate)
    }

    pub fn all_degree_at_least_4(&self) -> bool {
        self.maps.iter().all(|m| m.degree_at_least_4)
    }

    /// Degrees at least 4, every map simple, every pair separate.
    pub fn generic(&self) -> bool {
        self.all_simple() && self.all_separate() && self.all_degree_at_least_4()
    }
}

/// Checks degree, simplicity and pairwise critical separation for a set of
/// at least two maps.
pub fn check_generic_set(maps: &[RationalMapQ]) -> Result<GenericSetReport> {
    if maps.len() < 2 {
        return Err(invalid("a generic-set check needs at least two maps"));
    }
    let mut checks = Vec::with_capacity(maps.len());
    for (index, m) in maps.iter().enumerate() {
        let critical = m.critical_values()?;
        checks.push(MapCheck {
            index,
            degree: m.degree(),
            simple: critical.simple,
            degree_at_least_4: m.degree() >= 4,
            critical,
        });
    }
    let mut pairs = Vec::new();
    for i in 0..checks.len() {
        for j in i + 1..checks.len() {
            pairs.push(PairCheck {
                i,
                j,
                separate: are_critically_separate(&checks[i].critical, &checks[j].critical),
            });
        }
    }
    Ok(GenericSetReport { maps: checks, pairs })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pt(x: i64, y: i64) -> ProjPointQ {
        ProjPointQ::from_i64(x, y).unwrap()
    }

    #[test]
    fn point_normalization() {
        assert_eq!(pt(4, -6), pt(-2, 3));
        assert_eq!(pt(-2, 3).x(), &BigInt::from(-2));
        assert_eq!(pt(-5, 0), ProjPointQ::infinity());
        assert!(ProjPointQ::from_i64(0, 0).is_err());
        assert_eq!(pt(0, 7), pt(0, 1));
        assert!((pt(3, 7).height() - 7f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn big_log_accuracy() {
        let m = BigUint::from(3u32).pow(400);
        let expect = 400.0 * 3f64.ln();
        assert!((ln_big(&m) - expect).abs() < 1e-12 * expect);
    }

    #[test]
    fn form_evaluation_and_infinity() {
        // X^2 + 3XY - Y^2
        let f = BinaryForm::from_i64s(&[-1, 3, 1]);
        assert_eq!(f.eval(&BigInt::from(2), &BigInt::from(1)), BigInt::from(9));
        assert_eq!(f.eval(&BigInt::from(1), &BigInt::from(0)), BigInt::from(1));
        assert_eq!(BinaryForm::from_i64s(&[0, 1, 0]).multiplicity_at_infinity(), 1);
        assert!(!BinaryForm::from_i64s(&[1, 0, 0]).is_squarefree());
        assert!(BinaryForm::from_i64s(&[0, 1, 0]).is_squarefree());
    }

    #[test]
    fn map_ingestion_and_evaluation() {
        let m = RationalMapQ::from_i64(&[2, 0, 1], &[1, 0]).unwrap();
        assert_eq!(m.degree(), 2);
        assert_eq!(m.evaluate(&pt(1, 1)), pt(3, 1));
        assert_eq!(m.evaluate(&pt(0, 1)), ProjPointQ::infinity());
        assert_eq!(m.evaluate(&ProjPointQ::infinity()), ProjPointQ::infinity());
        let sq = RationalMapQ::from_i64(&[1, 0, 0], &[1]).unwrap();
        assert_eq!(sq.evaluate(&pt(2, 3)), pt(4, 9));
        assert!(RationalMapQ::from_i64(&[1, -1, 0], &[1, 0]).is_err());
        assert!(RationalMapQ::from_i64(&[1, 0], &[1]).is_err());
        assert!(RationalMapQ::from_i64(&[0], &[1]).is_err());
    }

    #[test]
    fn maps_are_canonical() {
        let a = RationalMapQ::from_i64(&[2, 0, 2], &[-4, 0]).unwrap();
        let b = RationalMapQ::from_i64(&[-1, 0, -1], &[2, 0]).unwrap();
        assert_eq!(a, b);
        let (n, d) = a.to_coefficients();
        assert_eq!(RationalMapQ::from_coefficients(&n, &d).unwrap(), a);
    }

    #[test]
    fn evaluation_reduces_common_factors() {
        // (x^2 + 1)/(x^2 - 1) at x = 3: (10 : 8) -> (5 : 4)
        let m = RationalMapQ::from_i64(&[1, 0, 1], &[1, 0, -1]).unwrap();
        assert_eq!(m.evaluate(&pt(3, 1)), pt(5, 4));
    }

    #[test]
    fn composition_matches_evaluation() {
        let a = RationalMapQ::from_i64(&[1, 0, 1], &[1, 0]).unwrap();
        let b = RationalMapQ::from_i64(&[1, -2, 0], &[3]).unwrap();
        let ab = a.compose(&b);
        assert_eq!(ab.degree(), 4);
        for (x, y) in [(1, 1), (2, 5), (-3, 7), (1, 0), (0, 1)] {
            let p = pt(x, y);
            assert_eq!(ab.evaluate(&p), a.evaluate(&b.evaluate(&p)));
        }
    }

    #[test]
    fn height_offsets() {
        let m = RationalMapQ::from_i64(&[2, 0, 0, 0, 0, 0, 0, 0, 0], &[1]).unwrap();
        assert!((m.height_offset_bound().unwrap() - 2f64.ln()).abs() < 1e-12);
        let p = RationalMapQ::from_i64(&[1, 0, 0, 0], &[1]).unwrap();
        assert_eq!(p.height_offset_bound().unwrap(), 0.0);
    }

    #[test]
    fn bezout_identities_verify() {
        let m = RationalMapQ::from_i64(&[3, 1, -2], &[1, 0, 5]).unwrap();
        let ids = m.bezout_identities().unwrap();
        for id in &ids {
            assert!(id.r.is_positive());
            let g = id.a.content().gcd(&id.b.content()).gcd(&id.r);
            assert!(g.is_one());
        }
    }

    #[test]
    fn wronskian_of_power_map() {
        let m = RationalMapQ::from_i64(&[1, 0, 0], &[1]).unwrap();
        assert_eq!(m.wronskian(), BinaryForm::from_i64s(&[0, 4, 0]));
        let cd = m.critical_values().unwrap();
        assert!(cd.infinity_is_critical_value);
        assert_eq!(cd.rational_values, vec![BigRational::zero()]);
        assert!(cd.simple);
    }

    #[test]
    fn critical_data_examples() {
        let sq = RationalMapQ::from_i64(&[1, 0, 0], &[1]).unwrap();
        let j = RationalMapQ::from_i64(&[1, 0, 1], &[1, 0]).unwrap();
        let a = sq.critical_values().unwrap();
        let b = j.critical_values().unwrap();
        let two = BigRational::from_integer(BigInt::from(2));
        assert_eq!(b.rational_values, vec![-two.clone(), two]);
        assert!(!b.infinity_is_critical_value);
        assert!(are_critically_separate(&a, &b));
        assert!(!are_critically_separate(&a, &a));
        let c = RationalMapQ::from_i64(&[1, 0, 0, 0], &[1]).unwrap().critical_values().unwrap();
        assert!(!c.simple);
    }

    #[test]
    fn generic_check_needs_two_maps() {
        let sq = RationalMapQ::from_i64(&[1, 0, 0], &[1]).unwrap();
        assert!(check_generic_set(std::slice::from_ref(&sq)).is_err());
        let r = check_generic_set(&[sq.clone(), sq]).unwrap();
        assert!(!r.all_separate());
        assert!(!r.generic());
    }
}
