//! Multivariate polynomials over the rationals, in the canonical form the
//! symbolic recorder needs: terms keyed by monomials under graded
//! lexicographic order, with no zero coefficients stored.
//!
//! Variables are split into input variables `x<i>` and constant variables
//! `c<j>`; the order puts every input variable before every constant
//! variable, each family ordered by index.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use super::rational::Rational;

/// A named polynomial variable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Var {
    /// Input variable `x<i>`.
    Input(u32),
    /// Constant variable `c<j>`.
    Constant(u32),
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Var::Input(i) => write!(f, "x{i}"),
            Var::Constant(j) => write!(f, "c{j}"),
        }
    }
}

/// A power product, stored sparsely as `(variable, exponent)` pairs in
/// ascending variable order with all exponents positive.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Monomial(Vec<(Var, u32)>);

impl Monomial {
    pub fn one() -> Self {
        Monomial(Vec::new())
    }

    pub fn var(v: Var) -> Self {
        Monomial(vec![(v, 1)])
    }

    fn from_pairs(mut pairs: Vec<(Var, u32)>) -> Self {
        pairs.retain(|&(_, e)| e > 0);
        pairs.sort_by_key(|&(v, _)| v);
        Monomial(pairs)
    }

    pub fn is_one(&self) -> bool {
        self.0.is_empty()
    }

    pub fn total_degree(&self) -> u64 {
        self.0.iter().map(|&(_, e)| e as u64).sum()
    }

    pub fn exponent(&self, v: Var) -> u32 {
        self.0
            .iter()
            .find(|&&(w, _)| w == v)
            .map(|&(_, e)| e)
            .unwrap_or(0)
    }

    pub fn vars(&self) -> impl Iterator<Item = Var> + '_ {
        self.0.iter().map(|&(v, _)| v)
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        let mut map: BTreeMap<Var, u32> = BTreeMap::new();
        for &(v, e) in self.0.iter().chain(other.0.iter()) {
            *map.entry(v).or_insert(0) += e;
        }
        Monomial(map.into_iter().collect())
    }

    /// Componentwise quotient, if `other` divides `self`.
    pub fn div(&self, other: &Monomial) -> Option<Monomial> {
        let mut map: BTreeMap<Var, u32> = self.0.iter().copied().collect();
        for &(v, e) in &other.0 {
            let have = map.get_mut(&v)?;
            if *have < e {
                return None;
            }
            *have -= e;
        }
        Some(Monomial(map.into_iter().filter(|&(_, e)| e > 0).collect()))
    }

    /// Drops `v` from the monomial, returning its exponent.
    fn without(&self, v: Var) -> (u32, Monomial) {
        let e = self.exponent(v);
        let rest: Vec<_> = self.0.iter().copied().filter(|&(w, _)| w != v).collect();
        (e, Monomial(rest))
    }
}

/// Graded lexicographic: compare total degree first, then compare exponents
/// variable by variable; the monomial with the higher power of the earliest
/// differing variable is the larger one.
impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        use std::cmp::Ordering;
        match self.total_degree().cmp(&other.total_degree()) {
            Ordering::Equal => {}
            ord => return ord,
        }
        let mut a = self.0.iter().peekable();
        let mut b = other.0.iter().peekable();
        loop {
            match (a.peek(), b.peek()) {
                (None, None) => return Ordering::Equal,
                (Some(&&(va, ea)), Some(&&(vb, eb))) => {
                    if va == vb {
                        match ea.cmp(&eb) {
                            Ordering::Equal => {
                                a.next();
                                b.next();
                            }
                            ord => return ord,
                        }
                    } else if va < vb {
                        // `self` has a positive power of an earlier variable.
                        return Ordering::Greater;
                    } else {
                        return Ordering::Less;
                    }
                }
                (Some(_), None) => return Ordering::Greater,
                (None, Some(_)) => return Ordering::Less,
            }
        }
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "1");
        }
        let mut first = true;
        for &(v, e) in &self.0 {
            if !first {
                write!(f, "*")?;
            }
            first = false;
            if e == 1 {
                write!(f, "{v}")?;
            } else {
                write!(f, "{v}^{e}")?;
            }
        }
        Ok(())
    }
}

/// Multivariate polynomial with rational coefficients. The zero polynomial
/// has no terms.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Polynomial {
    terms: BTreeMap<Monomial, Rational>,
}

impl Polynomial {
    pub fn zero() -> Self {
        Polynomial { terms: BTreeMap::new() }
    }

    pub fn constant(q: Rational) -> Self {
        let mut terms = BTreeMap::new();
        if !q.is_zero() {
            terms.insert(Monomial::one(), q);
        }
        Polynomial { terms }
    }

    pub fn var(v: Var) -> Self {
        let mut terms = BTreeMap::new();
        terms.insert(Monomial::var(v), Rational::one());
        Polynomial { terms }
    }

    pub fn term(m: Monomial, c: Rational) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(m, c);
        }
        Polynomial { terms }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// The constant value, if the polynomial has no variables.
    pub fn as_constant(&self) -> Option<Rational> {
        match self.terms.len() {
            0 => Some(Rational::zero()),
            1 => {
                let (m, c) = self.terms.iter().next().unwrap();
                m.is_one().then(|| c.clone())
            }
            _ => None,
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &Rational)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn vars(&self) -> Vec<Var> {
        let mut set = std::collections::BTreeSet::new();
        for m in self.terms.keys() {
            set.extend(m.vars());
        }
        set.into_iter().collect()
    }

    /// Leading term under graded lex.
    pub fn leading(&self) -> Option<(&Monomial, &Rational)> {
        self.terms.iter().next_back()
    }

    fn insert_term(&mut self, m: Monomial, c: Rational) {
        if c.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(m) {
            Entry::Vacant(e) => {
                e.insert(c);
            }
            Entry::Occupied(mut e) => {
                let sum = &*e.get() + &c;
                if sum.is_zero() {
                    e.remove();
                } else {
                    *e.get_mut() = sum;
                }
            }
        }
    }

    pub fn add(&self, other: &Polynomial) -> Polynomial {
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.insert_term(m.clone(), c.clone());
        }
        out
    }

    pub fn neg(&self) -> Polynomial {
        Polynomial {
            terms: self.terms.iter().map(|(m, c)| (m.clone(), -c)).collect(),
        }
    }

    pub fn sub(&self, other: &Polynomial) -> Polynomial {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Polynomial) -> Polynomial {
        let mut out = Polynomial::zero();
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                out.insert_term(ma.mul(mb), ca * cb);
            }
        }
        out
    }

    pub fn mul_scalar(&self, q: &Rational) -> Polynomial {
        if q.is_zero() {
            return Polynomial::zero();
        }
        Polynomial {
            terms: self.terms.iter().map(|(m, c)| (m.clone(), c * q)).collect(),
        }
    }

    pub fn mul_term(&self, m: &Monomial, q: &Rational) -> Polynomial {
        if q.is_zero() {
            return Polynomial::zero();
        }
        Polynomial {
            terms: self
                .terms
                .iter()
                .map(|(mm, c)| (mm.mul(m), c * q))
                .collect(),
        }
    }

    /// Evaluates with every variable bound; unbound variables are an error
    /// caught by the caller (`None`).
    pub fn eval(&self, assign: &dyn Fn(Var) -> Option<Rational>) -> Option<Rational> {
        let mut acc = Rational::zero();
        for (m, c) in &self.terms {
            let mut t = c.clone();
            for &(v, e) in &m.0 {
                let base = assign(v)?;
                for _ in 0..e {
                    t = &t * &base;
                }
            }
            acc = &acc + &t;
        }
        Some(acc)
    }

    /// Substitutes values for some variables, leaving the rest symbolic.
    pub fn substitute(&self, assign: &dyn Fn(Var) -> Option<Rational>) -> Polynomial {
        let mut out = Polynomial::zero();
        for (m, c) in &self.terms {
            let mut coeff = c.clone();
            let mut residual: Vec<(Var, u32)> = Vec::new();
            for &(v, e) in &m.0 {
                match assign(v) {
                    Some(val) => {
                        for _ in 0..e {
                            coeff = &coeff * &val;
                        }
                    }
                    None => residual.push((v, e)),
                }
            }
            out.insert_term(Monomial::from_pairs(residual), coeff);
        }
        out
    }

    /// Bounds the polynomial over boxes for its variables by evaluating each
    /// term in interval arithmetic.
    pub fn eval_interval(
        &self,
        assign: &dyn Fn(Var) -> Option<super::dyadic::RatInterval>,
    ) -> Option<super::dyadic::RatInterval> {
        use super::dyadic::RatInterval;
        let mut acc = RatInterval::zero();
        for (m, c) in &self.terms {
            let mut t = RatInterval::point(Rational::one());
            for &(v, e) in &m.0 {
                let base = assign(v)?;
                t = t.mul(&base.pow(e));
            }
            acc = acc.add(&t.scale(c));
        }
        Some(acc)
    }

    /// Content: the positive rational `g` such that `self / g` has integer
    /// coefficients with collective gcd 1. Zero for the zero polynomial.
    pub fn content(&self) -> Rational {
        if self.is_zero() {
            return Rational::zero();
        }
        let mut num_gcd = BigInt::zero();
        let mut den_lcm = BigInt::one();
        for c in self.terms.values() {
            num_gcd = num_gcd.gcd(&c.numer().abs());
            den_lcm = den_lcm.lcm(c.denom());
        }
        Rational::new(num_gcd, den_lcm).expect("lcm of denominators is nonzero")
    }

    /// Sign of the leading coefficient.
    pub fn leading_sign(&self) -> i8 {
        self.leading().map(|(_, c)| c.signum()).unwrap_or(0)
    }

    /// View as a univariate polynomial in `v` with polynomial coefficients.
    fn as_univariate(&self, v: Var) -> BTreeMap<u32, Polynomial> {
        let mut out: BTreeMap<u32, Polynomial> = BTreeMap::new();
        for (m, c) in &self.terms {
            let (e, rest) = m.without(v);
            out.entry(e)
                .or_insert_with(Polynomial::zero)
                .insert_term(rest, c.clone());
        }
        out.retain(|_, p| !p.is_zero());
        out
    }

    fn degree_in(&self, v: Var) -> u32 {
        self.terms.keys().map(|m| m.exponent(v)).max().unwrap_or(0)
    }

    /// Exact division: `Some(q)` with `self = q * d` when `d` divides `self`.
    pub fn divide_exact(&self, d: &Polynomial) -> Option<Polynomial> {
        assert!(!d.is_zero(), "division by the zero polynomial");
        let mut rem = self.clone();
        let mut quot = Polynomial::zero();
        let (dm, dc) = d.leading().unwrap();
        let dm = dm.clone();
        let dc = dc.clone();
        while !rem.is_zero() {
            let (rm, rc) = rem.leading().unwrap();
            let qm = rm.div(&dm)?;
            let qc = rc.checked_div(&dc).ok()?;
            let t = Polynomial::term(qm, qc);
            quot = quot.add(&t);
            rem = rem.sub(&t.mul(d));
        }
        Some(quot)
    }

    /// Pseudo-remainder of `self` by `d` in the variable `v`: some power of
    /// `lc_v(d)` times `self`, reduced modulo `d` to `deg_v < deg_v d`.
    /// Requires `deg_v d >= 1`; each round cancels the leading `v`-power.
    fn pseudo_rem(&self, d: &Polynomial, v: Var) -> Polynomial {
        let db = d.degree_in(v);
        debug_assert!(db >= 1, "pseudo_rem needs a divisor containing {v}");
        let d_uni = d.as_univariate(v);
        let lead_d = d_uni.get(&db).cloned().expect("leading coefficient exists");
        let mut r = self.clone();
        while !r.is_zero() {
            let da = r.degree_in(v);
            if da < db {
                break;
            }
            let r_uni = r.as_univariate(v);
            let lead_r = r_uni.get(&da).cloned().expect("leading coefficient exists");
            // r := lc(d)*r - lc(r)*v^(da-db)*d
            let shift = Monomial::from_pairs(vec![(v, da - db)]);
            let subtrahend = d.mul(&lead_r).mul_term(&shift, &Rational::one());
            r = r.mul(&lead_d).sub(&subtrahend);
        }
        r
    }

    /// Primitive part with respect to recursive polynomial content in `v`.
    fn primitive_in(&self, v: Var) -> Polynomial {
        let uni = self.as_univariate(v);
        let mut cont: Option<Polynomial> = None;
        for p in uni.values() {
            cont = Some(match cont {
                None => p.clone(),
                Some(c) => poly_gcd(&c, p),
            });
        }
        match cont {
            None => Polynomial::zero(),
            Some(c) => self
                .divide_exact(&c)
                .expect("content divides the polynomial"),
        }
    }

    fn content_in(&self, v: Var) -> Polynomial {
        let uni = self.as_univariate(v);
        let mut cont: Option<Polynomial> = None;
        for p in uni.values() {
            cont = Some(match cont {
                None => p.clone(),
                Some(c) => poly_gcd(&c, p),
            });
        }
        cont.unwrap_or_else(Polynomial::zero)
    }

    /// Scales so that the content is 1 and the leading coefficient positive;
    /// the zero polynomial stays zero.
    pub fn normalized_primitive(&self) -> Polynomial {
        if self.is_zero() {
            return Polynomial::zero();
        }
        let c = self.content();
        let mut out = self
            .mul_scalar(&c.recip().expect("content of a nonzero polynomial is nonzero"));
        if out.leading_sign() < 0 {
            out = out.neg();
        }
        out
    }
}

/// Gcd of multivariate polynomials, primitive with positive leading
/// coefficient; `gcd(0, 0) = 0`. Uses the primitive pseudo-remainder
/// sequence, recursing on the variable set.
pub fn poly_gcd(a: &Polynomial, b: &Polynomial) -> Polynomial {
    if a.is_zero() {
        return b.normalized_primitive();
    }
    if b.is_zero() {
        return a.normalized_primitive();
    }
    let vars_a = a.vars();
    let vars_b = b.vars();
    if vars_a.is_empty() || vars_b.is_empty() {
        // A nonzero constant is a unit in Q[x..]; the gcd is trivial.
        return Polynomial::constant(Rational::one());
    }
    // Main variable: the smallest variable occurring in either.
    let v = std::cmp::min(vars_a[0], vars_b[0]);
    if !vars_a.contains(&v) || !vars_b.contains(&v) {
        // One side is free of v: gcd(a, b) = gcd(cont_v(side with v), other).
        let (with_v, without_v) = if vars_a.contains(&v) { (a, b) } else { (b, a) };
        return poly_gcd(&with_v.content_in(v), without_v).normalized_primitive();
    }
    let ca = a.content_in(v);
    let cb = b.content_in(v);
    let cont_gcd = poly_gcd(&ca, &cb);
    let mut p = a.primitive_in(v);
    let mut q = b.primitive_in(v);
    if p.degree_in(v) < q.degree_in(v) {
        std::mem::swap(&mut p, &mut q);
    }
    loop {
        let r = p.pseudo_rem(&q, v);
        if r.is_zero() {
            break;
        }
        if r.degree_in(v) == 0 {
            // Nontrivial constant (in v) remainder: the primitive parts are coprime.
            q = Polynomial::constant(Rational::one());
            break;
        }
        p = q;
        q = r.primitive_in(v);
    }
    cont_gcd.mul(&q.primitive_in(v)).normalized_primitive()
}

// Rendering is only used in diagnostics and trace dumps; ordered from the
// leading term down.
impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (m, c) in self.terms.iter().rev() {
            if first {
                first = false;
                if m.is_one() {
                    write!(f, "{c}")?;
                } else if c == &Rational::one() {
                    write!(f, "{m}")?;
                } else {
                    write!(f, "{c}*{m}")?;
                }
            } else {
                let (sign, mag) = if c.is_negative() {
                    ("-", -c)
                } else {
                    ("+", c.clone())
                };
                if m.is_one() {
                    write!(f, " {sign} {mag}")?;
                } else if mag == Rational::one() {
                    write!(f, " {sign} {m}")?;
                } else {
                    write!(f, " {sign} {mag}*{m}")?;
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn x(i: u32) -> Polynomial {
        Polynomial::var(Var::Input(i))
    }

    fn c(j: u32) -> Polynomial {
        Polynomial::var(Var::Constant(j))
    }

    fn k(s: &str) -> Polynomial {
        Polynomial::constant(s.parse().unwrap())
    }

    #[test]
    fn grlex_ordering() {
        // x0^2 > x0*x1 > x1^2 > x0 > x1 > 1
        let m = |pairs: &[(Var, u32)]| Monomial::from_pairs(pairs.to_vec());
        let x0 = Var::Input(0);
        let x1 = Var::Input(1);
        let seq = [
            m(&[(x0, 2)]),
            m(&[(x0, 1), (x1, 1)]),
            m(&[(x1, 2)]),
            m(&[(x0, 1)]),
            m(&[(x1, 1)]),
            m(&[]),
        ];
        for w in seq.windows(2) {
            assert!(w[0] > w[1], "{} should exceed {}", w[0], w[1]);
        }
    }

    #[test]
    fn self_cancellation() {
        assert!(x(1).sub(&x(1)).is_zero());
    }

    #[test]
    fn arithmetic_matches_evaluation() {
        // (x0 + c0)^2 evaluated at x0=2, c0=3 is 25.
        let p = x(0).add(&c(0));
        let sq = p.mul(&p);
        let val = sq
            .eval(&|v| match v {
                Var::Input(0) => Some("2".parse().unwrap()),
                Var::Constant(0) => Some("3".parse().unwrap()),
                _ => None,
            })
            .unwrap();
        assert_eq!(val, "25".parse().unwrap());
    }

    #[test]
    fn exact_division() {
        // (x0^2 - 1) / (x0 - 1) = x0 + 1
        let p = x(0).mul(&x(0)).sub(&k("1"));
        let d = x(0).sub(&k("1"));
        let q = p.divide_exact(&d).unwrap();
        assert_eq!(q, x(0).add(&k("1")));
        assert!(p.divide_exact(&x(0).add(&k("2"))).is_none());
    }

    #[test]
    fn gcd_univariate() {
        // gcd(x^2-1, x^2-2x+1) = x - 1
        let a = x(0).mul(&x(0)).sub(&k("1"));
        let b = x(0).mul(&x(0)).sub(&x(0).mul_scalar(&"2".parse().unwrap())).add(&k("1"));
        let g = poly_gcd(&a, &b);
        assert_eq!(g, x(0).sub(&k("1")));
    }

    #[test]
    fn gcd_multivariate() {
        // gcd((x0+c0)*x1, (x0+c0)*c0) = x0 + c0
        let common = x(0).add(&c(0));
        let a = common.mul(&x(1));
        let b = common.mul(&c(0));
        let g = poly_gcd(&a, &b);
        assert_eq!(g, common);
    }

    #[test]
    fn gcd_coprime() {
        let g = poly_gcd(&x(0).add(&k("1")), &x(1).add(&k("2")));
        assert_eq!(g, k("1"));
    }

    #[test]
    fn content_and_primitive() {
        let p = x(0).mul_scalar(&"4/3".parse().unwrap()).add(&k("2/3"));
        assert_eq!(p.content(), "2/3".parse().unwrap());
        let prim = p.normalized_primitive();
        assert_eq!(prim, x(0).mul_scalar(&"2".parse().unwrap()).add(&k("1")));
    }

    #[test]
    fn interval_evaluation_bounds() {
        use crate::exact::dyadic::RatInterval;
        // x0^2 - x0 over [0, 1] is inside [-1, 1].
        let p = x(0).mul(&x(0)).sub(&x(0));
        let iv = p
            .eval_interval(&|v| match v {
                Var::Input(0) => Some(RatInterval::new("0".parse().unwrap(), "1".parse().unwrap())),
                _ => None,
            })
            .unwrap();
        assert!(iv.lo >= "-1".parse().unwrap());
        assert!(iv.hi <= "1".parse().unwrap());
    }
}
