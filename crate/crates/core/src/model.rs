//! Cohomology rings of products of projective spaces in the two model
//! theories, the Chow ring `CH` (additive law) and `K` (multiplicative law).
//!
//! Both rings are presented as `Coefficient[y_1, ..., y_k] / (y_i^{d_i + 1})`
//! with `y_i = c_1(O(e_i))` the hyperplane class of factor `i`. In `K`,
//! `[O(-e_i)] = 1 - y_i`, so every line class is a product of powers of
//! `(1 - y_i)` and the monomials `y^e` are one basis, the line classes
//! `O(-e)` with `0 <= e_i <= d_i` another.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::{Arc, Mutex, OnceLock};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::coeff::{CoeffError, Coefficient};
use crate::render::{join_terms, power};
use crate::series::{binomial, SeriesError, UnivariateSeries};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ModelError {
    #[error("ring mismatch: {0}")]
    RingMismatch(String),
    #[error("operation needs the {expected} model, got {got}")]
    WrongTheory { expected: Theory, got: Theory },
    #[error("{0} is not a linear immersion")]
    NotImmersion(String),
    #[error("{0} is not a unit")]
    NonUnit(String),
    #[error("series of order {order} cannot be evaluated on a ring with nilpotency degree {needed}")]
    SeriesTooShort { order: usize, needed: usize },
    #[error("invalid morphism: {0}")]
    BadMorphism(String),
    #[error("malformed element: {0}")]
    Malformed(String),
    #[error(transparent)]
    Coeff(#[from] CoeffError),
    #[error(transparent)]
    Series(#[from] SeriesError),
}

/// `P^{d_1} x ... x P^{d_k}`; the empty product is the point.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Space {
    dims: Vec<u32>,
}

impl Space {
    pub fn new(dims: impl Into<Vec<u32>>) -> Self {
        Space { dims: dims.into() }
    }

    pub fn point() -> Self {
        Space { dims: Vec::new() }
    }

    pub fn projective(d: u32) -> Self {
        Space { dims: vec![d] }
    }

    pub fn dims(&self) -> &[u32] {
        &self.dims
    }

    pub fn factors(&self) -> usize {
        self.dims.len()
    }

    /// Total dimension, which is also the top nonvanishing degree.
    pub fn dim(&self) -> usize {
        self.dims.iter().map(|&d| d as usize).sum()
    }

    pub fn basis_len(&self) -> usize {
        self.dims.iter().map(|&d| d as usize + 1).product()
    }

    /// Exponent vectors of the monomial basis, in lexicographic order.
    pub fn basis(&self) -> Vec<Vec<u32>> {
        let mut out = vec![Vec::with_capacity(self.factors())];
        for &d in &self.dims {
            out = out
                .into_iter()
                .flat_map(|prefix| {
                    (0..=d).map(move |e| {
                        let mut v = prefix.clone();
                        v.push(e);
                        v
                    })
                })
                .collect();
        }
        out
    }

    /// Spaces with every `d_i >= 1` and `sum d_i <= max_dim`, including the point.
    pub fn all_up_to(max_dim: u32) -> Vec<Space> {
        fn rec(left: u32, prefix: &mut Vec<u32>, out: &mut Vec<Space>) {
            out.push(Space::new(prefix.clone()));
            for d in 1..=left {
                prefix.push(d);
                rec(left - d, prefix, out);
                prefix.pop();
            }
        }
        let mut out = Vec::new();
        rec(max_dim, &mut Vec::new(), &mut out);
        out
    }
}

impl fmt::Display for Space {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.dims.is_empty() {
            return f.write_str("pt");
        }
        let parts: Vec<String> = self.dims.iter().map(|d| format!("P{d}")).collect();
        f.write_str(&parts.join("x"))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Theory {
    /// Chow ring, additive group law.
    #[serde(rename = "CH")]
    Chow,
    /// Grothendieck K-theory, multiplicative group law.
    K,
}

impl fmt::Display for Theory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Theory::Chow => "CH",
            Theory::K => "K",
        })
    }
}

#[derive(Debug)]
struct Layout {
    strides: Vec<usize>,
    exps: Vec<Vec<u32>>,
}

/// Strides and exponent table of a space, built once per process.
fn layout(space: &Space) -> Arc<Layout> {
    static CACHE: OnceLock<Mutex<HashMap<Space, Arc<Layout>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    let mut cache = cache.lock().unwrap_or_else(|e| e.into_inner());
    cache
        .entry(space.clone())
        .or_insert_with(|| {
            let k = space.factors();
            let mut strides = vec![1usize; k];
            for i in (0..k.saturating_sub(1)).rev() {
                strides[i] = strides[i + 1] * (space.dims[i + 1] as usize + 1);
            }
            Arc::new(Layout { strides, exps: space.basis() })
        })
        .clone()
}

#[derive(Debug)]
struct RingData {
    space: Space,
    theory: Theory,
    p: usize,
    layout: Arc<Layout>,
}

/// `A(X)` for one space, theory and coefficient order. Cheap to clone.
#[derive(Clone, Debug)]
pub struct TheoryRing(Arc<RingData>);

impl PartialEq for TheoryRing {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0)
            || (self.0.theory == other.0.theory && self.0.p == other.0.p && self.0.space == other.0.space)
    }
}

impl Eq for TheoryRing {}

impl TheoryRing {
    pub fn new(space: Space, theory: Theory, p: usize) -> Self {
        assert!(p >= 1, "nilpotency order must be at least 1");
        let layout = layout(&space);
        TheoryRing(Arc::new(RingData { space, theory, p, layout }))
    }

    pub fn chow(space: Space) -> Self {
        Self::new(space, Theory::Chow, 1)
    }

    pub fn k(space: Space) -> Self {
        Self::new(space, Theory::K, 1)
    }

    pub fn space(&self) -> &Space {
        &self.0.space
    }

    pub fn theory(&self) -> Theory {
        self.0.theory
    }

    /// Nilpotency order of the coefficients.
    pub fn p(&self) -> usize {
        self.0.p
    }

    pub fn basis_len(&self) -> usize {
        self.0.layout.exps.len()
    }

    /// Same space and theory, coefficients of order `p`.
    pub fn with_p(&self, p: usize) -> Self {
        Self::new(self.space().clone(), self.theory(), p)
    }

    pub fn with_theory(&self, theory: Theory, p: usize) -> Self {
        Self::new(self.space().clone(), theory, p)
    }

    fn index(&self, exp: &[u32]) -> usize {
        exp.iter().zip(&self.0.layout.strides).map(|(&e, &s)| e as usize * s).sum()
    }

    fn exp(&self, index: usize) -> &[u32] {
        &self.0.layout.exps[index]
    }

    fn in_caps(&self, exp: &[u32]) -> bool {
        exp.len() == self.space().factors() && exp.iter().zip(self.space().dims()).all(|(e, d)| e <= d)
    }

    /// The monomial basis `y^e` in lexicographic order.
    pub fn basis(&self) -> Vec<TruncatedPolynomial> {
        (0..self.basis_len())
            .map(|i| {
                let mut a = TruncatedPolynomial::zero(self);
                a.coeffs[i] = Coefficient::one(self.p());
                a
            })
            .collect()
    }

    fn require(&self, theory: Theory) -> Result<(), ModelError> {
        if self.theory() == theory {
            Ok(())
        } else {
            Err(ModelError::WrongTheory { expected: theory, got: self.theory() })
        }
    }
}

impl fmt::Display for TheoryRing {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}({})", self.theory(), self.space())?;
        if self.p() > 1 {
            write!(f, "[e]/(e^{})", self.p())?;
        }
        Ok(())
    }
}

/// A class in a [`TheoryRing`], stored densely over the monomial basis.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TruncatedPolynomial {
    ring: TheoryRing,
    coeffs: Vec<Coefficient>,
}

impl TruncatedPolynomial {
    pub fn zero(ring: &TheoryRing) -> Self {
        TruncatedPolynomial { ring: ring.clone(), coeffs: vec![Coefficient::zero(ring.p()); ring.basis_len()] }
    }

    pub fn constant(ring: &TheoryRing, c: Coefficient) -> Self {
        assert_eq!(c.order(), ring.p(), "coefficient order mismatch");
        let mut a = Self::zero(ring);
        a.coeffs[0] = c;
        a
    }

    pub fn one(ring: &TheoryRing) -> Self {
        Self::constant(ring, Coefficient::one(ring.p()))
    }

    pub fn from_int(ring: &TheoryRing, n: i64) -> Self {
        Self::constant(ring, Coefficient::from_int(n, ring.p()))
    }

    /// `y_i` (0-based factor index).
    pub fn variable(ring: &TheoryRing, i: usize) -> Self {
        let mut e = vec![0; ring.space().factors()];
        e[i] = 1;
        Self::monomial(ring, &e, Coefficient::one(ring.p()))
    }

    /// `c * y^exp`; zero when `exp` exceeds a cap.
    pub fn monomial(ring: &TheoryRing, exp: &[u32], c: Coefficient) -> Self {
        assert_eq!(exp.len(), ring.space().factors(), "exponent length mismatch");
        let mut a = Self::zero(ring);
        if ring.in_caps(exp) {
            a.coeffs[ring.index(exp)] = c;
        }
        a
    }

    pub fn from_terms<'a, I>(ring: &TheoryRing, terms: I) -> Result<Self, ModelError>
    where
        I: IntoIterator<Item = (&'a [u32], Coefficient)>,
    {
        let mut a = Self::zero(ring);
        for (exp, c) in terms {
            if exp.len() != ring.space().factors() {
                return Err(ModelError::Malformed(format!("exponent {exp:?} for {}", ring.space())));
            }
            if c.order() != ring.p() {
                return Err(CoeffError::OrderMismatch(c.order(), ring.p()).into());
            }
            if ring.in_caps(exp) {
                a.coeffs[ring.index(exp)] += &c;
            }
        }
        Ok(a)
    }

    /// Builds `prod_i f_i(y_i)` from one coefficient list per factor.
    pub(crate) fn tensor(ring: &TheoryRing, factors: &[Vec<Coefficient>]) -> Self {
        assert_eq!(factors.len(), ring.space().factors());
        let mut a = Self::zero(ring);
        for idx in 0..ring.basis_len() {
            let mut c = Coefficient::one(ring.p());
            for (f, &e) in factors.iter().zip(ring.exp(idx)) {
                match f.get(e as usize) {
                    Some(x) if !x.is_zero() => c = &c * x,
                    _ => {
                        c = Coefficient::zero(ring.p());
                        break;
                    }
                }
            }
            a.coeffs[idx] = c;
        }
        a
    }

    pub fn ring(&self) -> &TheoryRing {
        &self.ring
    }

    pub fn coeff(&self, exp: &[u32]) -> Coefficient {
        if self.ring.in_caps(exp) {
            self.coeffs[self.ring.index(exp)].clone()
        } else {
            Coefficient::zero(self.ring.p())
        }
    }

    /// Nonzero terms in lexicographic order of exponents.
    pub fn terms(&self) -> impl Iterator<Item = (&[u32], &Coefficient)> {
        self.coeffs.iter().enumerate().filter(|(_, c)| !c.is_zero()).map(|(i, c)| (self.ring.exp(i), c))
    }

    /// Dense coefficients indexed like [`TheoryRing::basis`].
    pub fn coefficients(&self) -> &[Coefficient] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Coefficient::is_zero)
    }

    pub fn constant_term(&self) -> &Coefficient {
        &self.coeffs[0]
    }

    pub fn is_unit(&self) -> bool {
        self.coeffs[0].is_unit()
    }

    fn check_ring(&self, other: &Self) -> Result<(), ModelError> {
        if self.ring == other.ring {
            Ok(())
        } else {
            Err(ModelError::RingMismatch(format!("{} vs {}", self.ring, other.ring)))
        }
    }

    pub fn checked_add(&self, other: &Self) -> Result<Self, ModelError> {
        self.check_ring(other)?;
        let coeffs = self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a + b).collect();
        Ok(TruncatedPolynomial { ring: self.ring.clone(), coeffs })
    }

    pub fn checked_sub(&self, other: &Self) -> Result<Self, ModelError> {
        self.check_ring(other)?;
        let coeffs = self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a - b).collect();
        Ok(TruncatedPolynomial { ring: self.ring.clone(), coeffs })
    }

    pub fn checked_mul(&self, other: &Self) -> Result<Self, ModelError> {
        self.check_ring(other)?;
        let ring = &self.ring;
        let dims = ring.space().dims();
        let mut out = Self::zero(ring);
        let rhs: Vec<(usize, &Coefficient)> = other.coeffs.iter().enumerate().filter(|(_, c)| !c.is_zero()).collect();
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            let ea = ring.exp(i);
            for &(j, b) in &rhs {
                let eb = ring.exp(j);
                if ea.iter().zip(eb).zip(dims).all(|((x, y), d)| x + y <= *d) {
                    // mixed-radix indices add without carries inside the caps
                    out.coeffs[i + j] += &(a * b);
                }
            }
        }
        Ok(out)
    }

    /// `self += c * other` in place; both on the same ring.
    pub(crate) fn add_scaled(&mut self, other: &Self, c: &Coefficient) {
        debug_assert_eq!(self.ring, other.ring);
        let unit = c.is_one();
        for (a, b) in self.coeffs.iter_mut().zip(&other.coeffs) {
            if b.is_zero() {
                continue;
            }
            if unit {
                *a += b;
            } else {
                *a += &(b * c);
            }
        }
    }

    pub fn scale(&self, c: &Coefficient) -> Self {
        TruncatedPolynomial { ring: self.ring.clone(), coeffs: self.coeffs.iter().map(|x| x * c).collect() }
    }

    pub fn scale_int(&self, n: i64) -> Self {
        self.scale(&Coefficient::from_int(n, self.ring.p()))
    }

    pub fn pow(&self, n: u32) -> Self {
        let mut acc = Self::one(&self.ring);
        for _ in 0..n {
            acc = &acc * self;
        }
        acc
    }

    /// Inverse through the geometric series of the nilpotent part.
    pub fn invert(&self) -> Result<Self, ModelError> {
        let c0 = self.coeffs[0].invert().map_err(|_| ModelError::NonUnit(self.to_string()))?;
        let normalized = self.scale(&c0);
        let mut nil = normalized.clone();
        nil.coeffs[0] = Coefficient::zero(self.ring.p());
        let minus = -&nil;
        let mut sum = Self::one(&self.ring);
        let mut term = Self::one(&self.ring);
        loop {
            term = &term * &minus;
            if term.is_zero() {
                break;
            }
            sum = &sum + &term;
        }
        Ok(sum.scale(&c0))
    }

    /// Integer power, negative exponents through [`Self::invert`].
    pub fn powi(&self, n: i64) -> Result<Self, ModelError> {
        if n >= 0 {
            Ok(self.pow(n as u32))
        } else {
            Ok(self.invert()?.pow(n.unsigned_abs() as u32))
        }
    }

    /// `F(self)` for an element with zero constant term.
    ///
    /// `F` must be known at least up to the top degree of the ring, past
    /// which every power of `self` vanishes.
    pub fn apply_series(&self, f: &UnivariateSeries) -> Result<Self, ModelError> {
        if !self.coeffs[0].is_zero() {
            return Err(SeriesError::CompositionConstantTerm(self.coeffs[0].to_string()).into());
        }
        let needed = self.ring.space().dim();
        if f.order() < needed {
            return Err(ModelError::SeriesTooShort { order: f.order(), needed });
        }
        if f.nilpotency() != self.ring.p() {
            return Err(CoeffError::OrderMismatch(f.nilpotency(), self.ring.p()).into());
        }
        let mut acc = Self::constant(&self.ring, f.coeff(needed).clone());
        for n in (0..needed).rev() {
            acc = &acc * self;
            acc.coeffs[0] += f.coeff(n);
        }
        Ok(acc)
    }

    /// Homogeneous part of total degree `n`.
    pub fn degree_part(&self, n: usize) -> Self {
        let mut out = Self::zero(&self.ring);
        for (i, c) in self.coeffs.iter().enumerate() {
            if self.ring.exp(i).iter().map(|&e| e as usize).sum::<usize>() == n {
                out.coeffs[i] = c.clone();
            }
        }
        out
    }

    /// Same coefficients in a ring that differs only in theory.
    pub fn reinterpret(&self, ring: &TheoryRing) -> Result<Self, ModelError> {
        if ring.space() != self.ring.space() || ring.p() != self.ring.p() {
            return Err(ModelError::RingMismatch(format!("{} vs {}", self.ring, ring)));
        }
        Ok(TruncatedPolynomial { ring: ring.clone(), coeffs: self.coeffs.clone() })
    }

    /// Coefficients embedded into order `p` (the ring changes accordingly).
    pub fn embed(&self, p: usize) -> Result<Self, ModelError> {
        if p == self.ring.p() {
            return Ok(self.clone());
        }
        let ring = self.ring.with_p(p);
        let coeffs = self.coeffs.iter().map(|c| c.embed(p)).collect::<Result<_, _>>()?;
        Ok(TruncatedPolynomial { ring, coeffs })
    }

    /// The element of a single-factor ring as a series in `t = y`.
    pub fn to_series(&self) -> Result<UnivariateSeries, ModelError> {
        if self.ring.space().factors() != 1 {
            return Err(ModelError::Malformed(format!("{} is not a single projective space", self.ring.space())));
        }
        Ok(UnivariateSeries::from_coeffs(self.coeffs.clone()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&PolynomialJson::from(self)).expect("polynomial serializes")
    }

    pub fn from_json(s: &str) -> Result<Self, ModelError> {
        let doc: PolynomialJson = serde_json::from_str(s).map_err(|e| ModelError::Malformed(e.to_string()))?;
        doc.into_polynomial()
    }
}

/// Wire form `{"space":[..],"law":"CH|K","p":p,"terms":[{"exp":[..],"coeff":".."}]}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PolynomialJson {
    pub space: Vec<u32>,
    pub law: Theory,
    pub p: usize,
    pub terms: Vec<TermJson>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TermJson {
    pub exp: Vec<u32>,
    pub coeff: String,
}

impl From<&TruncatedPolynomial> for PolynomialJson {
    fn from(a: &TruncatedPolynomial) -> Self {
        PolynomialJson {
            space: a.ring.space().dims().to_vec(),
            law: a.ring.theory(),
            p: a.ring.p(),
            terms: a.terms().map(|(e, c)| TermJson { exp: e.to_vec(), coeff: c.to_string() }).collect(),
        }
    }
}

impl PolynomialJson {
    pub fn into_polynomial(self) -> Result<TruncatedPolynomial, ModelError> {
        if self.p == 0 {
            return Err(CoeffError::ZeroOrder.into());
        }
        let ring = TheoryRing::new(Space::new(self.space), self.law, self.p);
        let mut terms = Vec::with_capacity(self.terms.len());
        for t in &self.terms {
            if !ring.in_caps(&t.exp) {
                return Err(ModelError::Malformed(format!("exponent {:?} outside {}", t.exp, ring.space())));
            }
            terms.push((t.exp.as_slice(), Coefficient::parse(&t.coeff, ring.p())?));
        }
        TruncatedPolynomial::from_terms(&ring, terms)
    }
}

impl fmt::Display for TruncatedPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let k = self.ring.space().factors();
        let terms = self.terms().map(|(e, c)| {
            let mono: Vec<String> = e
                .iter()
                .enumerate()
                .filter(|(_, &x)| x > 0)
                .map(|(i, &x)| if k == 1 { power("y", x) } else { power(&format!("y{}", i + 1), x) })
                .collect();
            (c, mono.join(" "))
        });
        f.write_str(&join_terms(terms, " * "))
    }
}

macro_rules! poly_binop {
    ($tr:ident, $method:ident, $checked:ident) => {
        impl $tr<&TruncatedPolynomial> for &TruncatedPolynomial {
            type Output = TruncatedPolynomial;
            fn $method(self, rhs: &TruncatedPolynomial) -> TruncatedPolynomial {
                self.$checked(rhs).expect("ring mismatch")
            }
        }
        impl $tr<TruncatedPolynomial> for TruncatedPolynomial {
            type Output = TruncatedPolynomial;
            fn $method(self, rhs: TruncatedPolynomial) -> TruncatedPolynomial {
                (&self).$method(&rhs)
            }
        }
    };
}

poly_binop!(Add, add, checked_add);
poly_binop!(Sub, sub, checked_sub);
poly_binop!(Mul, mul, checked_mul);

impl Neg for &TruncatedPolynomial {
    type Output = TruncatedPolynomial;
    fn neg(self) -> TruncatedPolynomial {
        TruncatedPolynomial { ring: self.ring.clone(), coeffs: self.coeffs.iter().map(|c| -c).collect() }
    }
}

/// The line bundle `O(a_1, ..., a_k)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LineClass(pub Vec<i64>);

impl LineClass {
    pub fn trivial(k: usize) -> Self {
        LineClass(vec![0; k])
    }

    /// `O(e_i)`, the hyperplane bundle of factor `i`.
    pub fn hyperplane(k: usize, i: usize) -> Self {
        let mut a = vec![0; k];
        a[i] = 1;
        LineClass(a)
    }

    pub fn degrees(&self) -> &[i64] {
        &self.0
    }

    pub fn dual(&self) -> Self {
        LineClass(self.0.iter().map(|a| -a).collect())
    }

    pub fn tensor(&self, other: &Self) -> Self {
        LineClass(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn power(&self, j: i64) -> Self {
        LineClass(self.0.iter().map(|a| a * j).collect())
    }
}

impl fmt::Display for LineClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(i64::to_string).collect();
        write!(f, "O({})", parts.join(","))
    }
}

/// Integer combination of line classes; zero multiplicities are not stored.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct VirtualBundle {
    terms: BTreeMap<LineClass, i64>,
}

impl VirtualBundle {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn line(l: LineClass, mult: i64) -> Self {
        let mut b = Self::new();
        b.add_line(l, mult);
        b
    }

    pub fn add_line(&mut self, l: LineClass, mult: i64) {
        let entry = self.terms.entry(l.clone()).or_insert(0);
        *entry += mult;
        if *entry == 0 {
            self.terms.remove(&l);
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&LineClass, i64)> {
        self.terms.iter().map(|(l, &m)| (l, m))
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn rank(&self) -> i64 {
        self.terms.values().sum()
    }

    pub fn dual(&self) -> Self {
        let mut b = Self::new();
        for (l, m) in self.terms() {
            b.add_line(l.dual(), m);
        }
        b
    }

    pub fn neg(&self) -> Self {
        self.scale(-1)
    }

    pub fn scale(&self, n: i64) -> Self {
        let mut b = Self::new();
        for (l, m) in self.terms() {
            b.add_line(l.clone(), m * n);
        }
        b
    }

    pub fn sum(&self, other: &Self) -> Self {
        let mut b = self.clone();
        for (l, m) in other.terms() {
            b.add_line(l.clone(), m);
        }
        b
    }

    pub fn difference(&self, other: &Self) -> Self {
        self.sum(&other.neg())
    }

    pub fn has_negative(&self) -> bool {
        self.terms.values().any(|&m| m < 0)
    }

    /// `f^* self` for a bundle on the target of `f`.
    pub fn pullback(&self, f: &MorphismDesc) -> Self {
        let mut b = Self::new();
        for (l, m) in self.terms() {
            b.add_line(f.pullback_line(l), m);
        }
        b
    }
}

impl fmt::Display for VirtualBundle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        let mut first = true;
        for (l, m) in self.terms() {
            let (sign, abs) = if m < 0 { ("-", -m) } else { ("+", m) };
            if first {
                if m < 0 {
                    f.write_str("-")?;
                }
            } else {
                write!(f, " {sign} ")?;
            }
            first = false;
            if abs == 1 {
                write!(f, "{l}")?;
            } else {
                write!(f, "{abs}*{l}")?;
            }
        }
        Ok(())
    }
}

/// A `K`-class written in line classes, with exact coefficients.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LineCombination {
    p: usize,
    terms: BTreeMap<LineClass, Coefficient>,
}

impl LineCombination {
    pub fn new(p: usize) -> Self {
        LineCombination { p, terms: BTreeMap::new() }
    }

    pub fn add_line(&mut self, l: LineClass, c: &Coefficient) {
        if c.is_zero() {
            return;
        }
        let entry = self.terms.entry(l.clone()).or_insert_with(|| Coefficient::zero(self.p));
        *entry += c;
        if entry.is_zero() {
            self.terms.remove(&l);
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&LineClass, &Coefficient)> {
        self.terms.iter()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn p(&self) -> usize {
        self.p
    }
}

impl From<&VirtualBundle> for LineCombination {
    fn from(b: &VirtualBundle) -> Self {
        let mut out = LineCombination::new(1);
        for (l, m) in b.terms() {
            out.add_line(l.clone(), &Coefficient::from_int(m, 1));
        }
        out
    }
}

impl fmt::Display for LineCombination {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let terms = self.terms.iter().map(|(l, c)| (c, format!("[{l}]")));
        f.write_str(&join_terms(terms, "*"))
    }
}

/// Coefficients of `(1 - t)^{-a}` up to degree `d`.
pub(crate) fn one_minus_t_pow(a: i64, d: u32, p: usize) -> Vec<Coefficient> {
    (0..=d as usize)
        .map(|n| {
            let c = binomial(-a, n);
            let c = if n % 2 == 1 { -c } else { c };
            Coefficient::from_rational(c, p)
        })
        .collect()
}

fn check_line(ring: &TheoryRing, l: &LineClass) -> Result<(), ModelError> {
    if l.0.len() != ring.space().factors() {
        return Err(ModelError::RingMismatch(format!("{l} on {}", ring.space())));
    }
    Ok(())
}

/// First Chern class: `sum a_i y_i` in `CH`, `1 - [O(-a)]` in `K`.
pub fn c1(ring: &TheoryRing, l: &LineClass) -> Result<TruncatedPolynomial, ModelError> {
    check_line(ring, l)?;
    match ring.theory() {
        Theory::Chow => {
            let mut a = TruncatedPolynomial::zero(ring);
            for (i, &deg) in l.0.iter().enumerate() {
                if ring.space().dims()[i] > 0 {
                    a = &a + &TruncatedPolynomial::variable(ring, i).scale_int(deg);
                }
            }
            Ok(a)
        }
        Theory::K => Ok(&TruncatedPolynomial::one(ring) - &line_element(ring, &l.dual())?),
    }
}

/// `[O(a)] = prod_i (1 - y_i)^{-a_i}` in the `K` model.
pub fn line_element(ring: &TheoryRing, l: &LineClass) -> Result<TruncatedPolynomial, ModelError> {
    ring.require(Theory::K)?;
    check_line(ring, l)?;
    let factors: Vec<Vec<Coefficient>> =
        l.0.iter().zip(ring.space().dims()).map(|(&a, &d)| one_minus_t_pow(a, d, ring.p())).collect();
    Ok(TruncatedPolynomial::tensor(ring, &factors))
}

/// Rewrites a `K`-class over the line basis `{O(-e) : 0 <= e_i <= d_i}`,
/// using `y^e = prod_i (1 - [O(-e_i)])^{e_i}`.
pub fn to_lines(a: &TruncatedPolynomial) -> Result<LineCombination, ModelError> {
    let ring = a.ring();
    ring.require(Theory::K)?;
    let mut out = LineCombination::new(ring.p());
    let k = ring.space().factors();
    for (exp, c) in a.terms() {
        // expand prod_i (1 - L_i)^{e_i} with L_i = O(-e_i)
        let mut partial: Vec<(Vec<i64>, i64)> = vec![(Vec::with_capacity(k), 1)];
        for &e in exp {
            let mut next = Vec::with_capacity(partial.len() * (e as usize + 1));
            for (degs, sign) in &partial {
                for j in 0..=e {
                    let binom = binomial(e as i64, j as usize).to_integer();
                    let binom: i64 = binom.try_into().expect("small binomial");
                    let mut d = degs.clone();
                    d.push(-(j as i64));
                    let s = if j % 2 == 0 { 1 } else { -1 };
                    next.push((d, sign * s * binom));
                }
            }
            partial = next;
        }
        for (degs, m) in partial {
            out.add_line(LineClass(degs), &c.scale_int(m));
        }
    }
    Ok(out)
}

/// Evaluates a line combination in the `K` ring.
pub fn from_lines(ring: &TheoryRing, combo: &LineCombination) -> Result<TruncatedPolynomial, ModelError> {
    ring.require(Theory::K)?;
    if combo.p() != ring.p() {
        return Err(CoeffError::OrderMismatch(combo.p(), ring.p()).into());
    }
    let mut a = TruncatedPolynomial::zero(ring);
    for (l, c) in combo.terms() {
        a = &a + &line_element(ring, l)?.scale(c);
    }
    Ok(a)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BasisDirection {
    ToLines,
    ToMonomials,
}

/// Result of [`change_basis`]: whichever representation was requested.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum KClass {
    Lines(LineCombination),
    Monomials(TruncatedPolynomial),
}

/// Converts between the monomial basis and the line basis of a `K` ring.
pub fn change_basis(ring: &TheoryRing, element: &KClass, direction: BasisDirection) -> Result<KClass, ModelError> {
    ring.require(Theory::K)?;
    match (element, direction) {
        (KClass::Monomials(a), BasisDirection::ToLines) => {
            if a.ring() != ring {
                return Err(ModelError::RingMismatch(format!("{} vs {}", a.ring(), ring)));
            }
            Ok(KClass::Lines(to_lines(a)?))
        }
        (KClass::Lines(c), BasisDirection::ToMonomials) => Ok(KClass::Monomials(from_lines(ring, c)?)),
        (KClass::Lines(_), BasisDirection::ToLines) | (KClass::Monomials(_), BasisDirection::ToMonomials) => {
            Ok(element.clone())
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum MorphismKind {
    /// Keeps the listed factors (0-based, increasing) and forgets the rest.
    Projection { keep: Vec<usize> },
    /// `P^{d-c}` embedded linearly into the `factor`-th `P^d`.
    LinearImmersion { factor: usize, codim: u32 },
}

/// A projection or linear immersion between products of projective spaces.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct MorphismDesc {
    kind: MorphismKind,
    source: Space,
    target: Space,
}

impl MorphismDesc {
    /// Projection from `source` forgetting the factors in `drop` (0-based).
    pub fn projection(source: Space, drop: &[usize]) -> Result<Self, ModelError> {
        let k = source.factors();
        if let Some(&bad) = drop.iter().find(|&&i| i >= k) {
            return Err(ModelError::BadMorphism(format!("{source} has no factor {}", bad + 1)));
        }
        let keep: Vec<usize> = (0..k).filter(|i| !drop.contains(i)).collect();
        let target = Space::new(keep.iter().map(|&i| source.dims()[i]).collect::<Vec<_>>());
        Ok(MorphismDesc { kind: MorphismKind::Projection { keep }, source, target })
    }

    pub fn identity(space: Space) -> Self {
        Self::projection(space, &[]).expect("identity is a valid projection")
    }

    /// Linear subspace of codimension `codim` in factor `factor` (0-based) of `target`.
    pub fn linear_immersion(target: Space, factor: usize, codim: u32) -> Result<Self, ModelError> {
        let d = *target
            .dims()
            .get(factor)
            .ok_or_else(|| ModelError::BadMorphism(format!("{target} has no factor {}", factor + 1)))?;
        if codim > d {
            return Err(ModelError::BadMorphism(format!("codimension {codim} exceeds dimension {d}")));
        }
        let mut dims = target.dims().to_vec();
        dims[factor] = d - codim;
        Ok(MorphismDesc { kind: MorphismKind::LinearImmersion { factor, codim }, source: Space::new(dims), target })
    }

    /// Every projection forgetting a nonempty set of factors of `space`, and
    /// every linear immersion of positive codimension into `space`.
    pub fn all_on(space: &Space) -> Vec<MorphismDesc> {
        let k = space.factors();
        let mut out = Vec::new();
        for mask in 1u32..(1 << k) {
            let drop: Vec<usize> = (0..k).filter(|i| mask & (1 << i) != 0).collect();
            out.push(Self::projection(space.clone(), &drop).expect("valid factors"));
        }
        for (i, &d) in space.dims().iter().enumerate() {
            for c in 1..=d {
                out.push(Self::linear_immersion(space.clone(), i, c).expect("valid codimension"));
            }
        }
        out
    }

    pub fn kind(&self) -> &MorphismKind {
        &self.kind
    }

    pub fn source(&self) -> &Space {
        &self.source
    }

    pub fn target(&self) -> &Space {
        &self.target
    }

    pub fn is_immersion(&self) -> bool {
        matches!(self.kind, MorphismKind::LinearImmersion { .. })
    }

    /// Factors forgotten by a projection (empty for immersions).
    pub fn dropped(&self) -> Vec<usize> {
        match &self.kind {
            MorphismKind::Projection { keep } => (0..self.source.factors()).filter(|i| !keep.contains(i)).collect(),
            MorphismKind::LinearImmersion { .. } => Vec::new(),
        }
    }

    fn pullback_line(&self, l: &LineClass) -> LineClass {
        match &self.kind {
            MorphismKind::Projection { keep } => {
                let mut a = vec![0; self.source.factors()];
                for (j, &i) in keep.iter().enumerate() {
                    a[i] = l.0[j];
                }
                LineClass(a)
            }
            MorphismKind::LinearImmersion { .. } => l.clone(),
        }
    }

    fn source_ring(&self, a: &TruncatedPolynomial) -> TheoryRing {
        a.ring().with_space(self.source.clone())
    }

    fn target_ring(&self, a: &TruncatedPolynomial) -> TheoryRing {
        a.ring().with_space(self.target.clone())
    }
}

impl TheoryRing {
    pub fn with_space(&self, space: Space) -> Self {
        Self::new(space, self.theory(), self.p())
    }
}

impl fmt::Display for MorphismDesc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            MorphismKind::Projection { .. } => {
                let drop: Vec<String> = self.dropped().iter().map(|i| (i + 1).to_string()).collect();
                write!(f, "pi[drop {}]: {} -> {}", drop.join(","), self.source, self.target)
            }
            MorphismKind::LinearImmersion { factor, codim } => {
                write!(f, "i[factor {}, codim {}]: {} -> {}", factor + 1, codim, self.source, self.target)
            }
        }
    }
}

/// `f^* a` for `a` on the target of `f`.
pub fn pullback(m: &MorphismDesc, a: &TruncatedPolynomial) -> Result<TruncatedPolynomial, ModelError> {
    if a.ring().space() != m.target() {
        return Err(ModelError::RingMismatch(format!("pullback along {m} of a class on {}", a.ring().space())));
    }
    let ring = m.source_ring(a);
    let mut out = TruncatedPolynomial::zero(&ring);
    for (exp, c) in a.terms() {
        let e: Vec<u32> = match &m.kind {
            MorphismKind::Projection { keep } => {
                let mut e = vec![0; m.source.factors()];
                for (j, &i) in keep.iter().enumerate() {
                    e[i] = exp[j];
                }
                e
            }
            MorphismKind::LinearImmersion { .. } => exp.to_vec(),
        };
        if ring.in_caps(&e) {
            out.coeffs[ring.index(&e)] = c.clone();
        }
    }
    Ok(out)
}

/// `f_* a` for `a` on the source of `f`.
///
/// Projections integrate the forgotten factors: in `CH` by reading off the
/// coefficient of the top class `y_i^{d_i}`, in `K` by the Euler
/// characteristic, which on the monomial basis is `y_i := 1`. A linear
/// immersion of codimension `c` multiplies the verbatim lift by `y_i^c`.
pub fn pushforward(m: &MorphismDesc, a: &TruncatedPolynomial) -> Result<TruncatedPolynomial, ModelError> {
    if a.ring().space() != m.source() {
        return Err(ModelError::RingMismatch(format!("pushforward along {m} of a class on {}", a.ring().space())));
    }
    let ring = m.target_ring(a);
    let mut out = TruncatedPolynomial::zero(&ring);
    match &m.kind {
        MorphismKind::Projection { keep } => {
            let dims = m.source.dims();
            let dropped = m.dropped();
            for (exp, c) in a.terms() {
                if ring.theory() == Theory::Chow && dropped.iter().any(|&i| exp[i] != dims[i]) {
                    continue;
                }
                let e: Vec<u32> = keep.iter().map(|&i| exp[i]).collect();
                out.coeffs[ring.index(&e)] += c;
            }
        }
        MorphismKind::LinearImmersion { factor, codim } => {
            for (exp, c) in a.terms() {
                let mut e = exp.to_vec();
                e[*factor] += codim;
                out.coeffs[ring.index(&e)] = c.clone();
            }
        }
    }
    Ok(out)
}

/// `T_X = sum_i ((d_i + 1) O(e_i) - O)` from the Euler sequences.
pub fn tangent_bundle(space: &Space) -> VirtualBundle {
    let k = space.factors();
    let mut b = VirtualBundle::new();
    for (i, &d) in space.dims().iter().enumerate() {
        b.add_line(LineClass::hyperplane(k, i), d as i64 + 1);
        b.add_line(LineClass::trivial(k), -1);
    }
    b
}

/// Relative tangent bundle `T_f` as a class on the source.
pub fn relative_tangent(m: &MorphismDesc) -> VirtualBundle {
    match &m.kind {
        MorphismKind::Projection { .. } => {
            let k = m.source.factors();
            let mut b = VirtualBundle::new();
            for i in m.dropped() {
                b.add_line(LineClass::hyperplane(k, i), m.source.dims()[i] as i64 + 1);
                b.add_line(LineClass::trivial(k), -1);
            }
            b
        }
        MorphismKind::LinearImmersion { .. } => normal_bundle(m).expect("immersion").neg(),
    }
}

/// Normal bundle `c * O(e_i)` of a linear immersion, on the source.
pub fn normal_bundle(m: &MorphismDesc) -> Result<VirtualBundle, ModelError> {
    match &m.kind {
        MorphismKind::LinearImmersion { factor, codim } => {
            Ok(VirtualBundle::line(LineClass::hyperplane(m.source.factors(), *factor), *codim as i64))
        }
        MorphismKind::Projection { .. } => Err(ModelError::NotImmersion(m.to_string())),
    }
}
