//! Order-truncated power series, formal group laws and the named series
//! that drive the characteristic-class calculus.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use thiserror::Error;

use crate::coeff::{CoeffError, Coefficient};
use crate::render::{join_terms, power};
use crate::report::VerificationReport;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SeriesError {
    #[error("series with constant term {0} is not invertible")]
    NonUnit(String),
    #[error("inner series of a composition must have zero constant term, found {0}")]
    CompositionConstantTerm(String),
    #[error("bad parameter: {0}")]
    BadParam(String),
    #[error("no solution: {0}")]
    NoSolution(String),
    #[error("not a formal group law: {0}")]
    InvalidGroupLaw(String),
    #[error(transparent)]
    Coeff(#[from] CoeffError),
}

/// `c_0 + c_1 t + ... + c_D t^D`, exact up to and including degree `D`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct UnivariateSeries {
    coeffs: Vec<Coefficient>,
}

impl UnivariateSeries {
    /// Panics on an empty coefficient list or mixed nilpotency orders.
    pub fn from_coeffs(coeffs: Vec<Coefficient>) -> Self {
        assert!(!coeffs.is_empty(), "a series needs at least its constant term");
        let p = coeffs[0].order();
        assert!(coeffs.iter().all(|c| c.order() == p), "mixed coefficient orders");
        UnivariateSeries { coeffs }
    }

    pub fn from_ints(values: &[i64], p: usize) -> Self {
        Self::from_coeffs(values.iter().map(|&v| Coefficient::from_int(v, p)).collect())
    }

    pub fn zero(order: usize, p: usize) -> Self {
        UnivariateSeries { coeffs: vec![Coefficient::zero(p); order + 1] }
    }

    pub fn constant(c: Coefficient, order: usize) -> Self {
        let mut s = Self::zero(order, c.order());
        s.coeffs[0] = c;
        s
    }

    pub fn one(order: usize, p: usize) -> Self {
        Self::constant(Coefficient::one(p), order)
    }

    /// The series `t`.
    pub fn variable(order: usize, p: usize) -> Self {
        let mut s = Self::zero(order, p);
        if order >= 1 {
            s.coeffs[1] = Coefficient::one(p);
        }
        s
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// Nilpotency order of the coefficients.
    pub fn nilpotency(&self) -> usize {
        self.coeffs[0].order()
    }

    pub fn coeff(&self, n: usize) -> &Coefficient {
        &self.coeffs[n]
    }

    pub fn coeffs(&self) -> &[Coefficient] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Coefficient::is_zero)
    }

    pub fn truncate(&self, order: usize) -> Self {
        assert!(order <= self.order(), "cannot extend a truncated series");
        UnivariateSeries { coeffs: self.coeffs[..=order].to_vec() }
    }

    pub fn embed(&self, p: usize) -> Result<Self, SeriesError> {
        Ok(UnivariateSeries { coeffs: self.coeffs.iter().map(|c| c.embed(p)).collect::<Result<_, _>>()? })
    }

    pub fn add(&self, other: &Self) -> Self {
        let n = self.order().min(other.order());
        UnivariateSeries { coeffs: (0..=n).map(|i| &self.coeffs[i] + &other.coeffs[i]).collect() }
    }

    pub fn sub(&self, other: &Self) -> Self {
        let n = self.order().min(other.order());
        UnivariateSeries { coeffs: (0..=n).map(|i| &self.coeffs[i] - &other.coeffs[i]).collect() }
    }

    pub fn neg(&self) -> Self {
        UnivariateSeries { coeffs: self.coeffs.iter().map(|c| -c).collect() }
    }

    pub fn scale(&self, c: &Coefficient) -> Self {
        UnivariateSeries { coeffs: self.coeffs.iter().map(|x| x * c).collect() }
    }

    /// Cauchy product truncated to the smaller order.
    pub fn multiply(&self, other: &Self) -> Self {
        let n = self.order().min(other.order());
        let mut out = Self::zero(n, self.nilpotency());
        for (i, a) in self.coeffs[..=n].iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs[..=n - i].iter().enumerate() {
                if !b.is_zero() {
                    out.coeffs[i + j] += &(a * b);
                }
            }
        }
        out
    }

    /// `self(g(t))`, truncated to the smaller order.
    pub fn compose(&self, g: &Self) -> Result<Self, SeriesError> {
        if !g.coeffs[0].is_zero() {
            return Err(SeriesError::CompositionConstantTerm(g.coeffs[0].to_string()));
        }
        let n = self.order().min(g.order());
        let g = g.truncate(n);
        let mut acc = Self::constant(self.coeffs[n].clone(), n);
        for c in self.coeffs[..n].iter().rev() {
            acc = acc.multiply(&g);
            acc.coeffs[0] += c;
        }
        Ok(acc)
    }

    /// Multiplicative inverse; the constant term must be a unit.
    pub fn invert(&self) -> Result<Self, SeriesError> {
        let a0 = &self.coeffs[0];
        let inv0 = a0.invert().map_err(|_| SeriesError::NonUnit(a0.to_string()))?;
        let n = self.order();
        let mut out = Self::zero(n, self.nilpotency());
        out.coeffs[0] = inv0.clone();
        for k in 1..=n {
            let mut acc = Coefficient::zero(self.nilpotency());
            for i in 1..=k {
                acc += &(&self.coeffs[i] * &out.coeffs[k - i]);
            }
            out.coeffs[k] = -(&acc * &inv0);
        }
        Ok(out)
    }

    pub fn pow(&self, exp: i64) -> Result<Self, SeriesError> {
        let base = if exp < 0 { self.invert()? } else { self.clone() };
        let mut acc = Self::one(self.order(), self.nilpotency());
        for _ in 0..exp.unsigned_abs() {
            acc = acc.multiply(&base);
        }
        Ok(acc)
    }

    /// Compositional inverse `h` with `self(h(t)) = t`.
    pub fn reversion(&self) -> Result<Self, SeriesError> {
        if !self.coeffs[0].is_zero() {
            return Err(SeriesError::CompositionConstantTerm(self.coeffs[0].to_string()));
        }
        let n = self.order();
        let p = self.nilpotency();
        if n == 0 {
            return Ok(Self::zero(0, p));
        }
        let inv1 = self.coeffs[1]
            .invert()
            .map_err(|_| SeriesError::NoSolution(format!("linear coefficient {} is not a unit", self.coeffs[1])))?;
        let mut h = Self::zero(n, p);
        h.coeffs[1] = inv1.clone();
        for k in 2..=n {
            let err = self.compose(&h)?.coeffs[k].clone();
            h.coeffs[k] = -(&err * &inv1);
        }
        Ok(h)
    }

    /// `self / t` for a series with zero constant term; order drops by one.
    pub fn divide_by_t(&self) -> Result<Self, SeriesError> {
        if !self.coeffs[0].is_zero() || self.order() == 0 {
            return Err(SeriesError::NoSolution(format!("{self} is not divisible by t")));
        }
        Ok(UnivariateSeries { coeffs: self.coeffs[1..].to_vec() })
    }

    fn to_multi<const N: usize>(&self, var: usize) -> Multi<N> {
        let mut m = Multi::zero(self.order(), self.nilpotency());
        for (n, c) in self.coeffs.iter().enumerate() {
            let mut e = [0u32; N];
            e[var] = n as u32;
            m.insert(e, c.clone());
        }
        m
    }

    /// `self(f(u, v))` as a bivariate series.
    pub fn compose_bivariate(&self, f: &BivariateSeries) -> Result<BivariateSeries, SeriesError> {
        if !f.coeff(0, 0).is_zero() {
            return Err(SeriesError::CompositionConstantTerm(f.coeff(0, 0).to_string()));
        }
        let outer: Multi<1> = self.to_multi(0);
        Ok(BivariateSeries(outer.substitute(&[&f.0], self.order().min(f.order()))))
    }
}

impl UnivariateSeries {
    /// Canonical text form with `var` as the variable name.
    pub fn render_in(&self, var: &str) -> String {
        let terms = self.coeffs.iter().enumerate().map(|(n, c)| (c, power(var, n as u32)));
        join_terms(terms, "*")
    }
}

impl fmt::Display for UnivariateSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render_in("t"))
    }
}

/// Sparse truncated series in `N` variables; zero coefficients are never stored.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
struct Multi<const N: usize> {
    order: usize,
    p: usize,
    terms: BTreeMap<[u32; N], Coefficient>,
}

impl<const N: usize> Multi<N> {
    fn zero(order: usize, p: usize) -> Self {
        Multi { order, p, terms: BTreeMap::new() }
    }

    fn one(order: usize, p: usize) -> Self {
        let mut m = Self::zero(order, p);
        m.insert([0; N], Coefficient::one(p));
        m
    }

    fn variable(i: usize, order: usize, p: usize) -> Self {
        let mut m = Self::zero(order, p);
        let mut e = [0; N];
        e[i] = 1;
        m.insert(e, Coefficient::one(p));
        m
    }

    fn degree(e: &[u32; N]) -> usize {
        e.iter().map(|&x| x as usize).sum()
    }

    fn insert(&mut self, e: [u32; N], c: Coefficient) {
        if Self::degree(&e) <= self.order && !c.is_zero() {
            self.terms.insert(e, c);
        }
    }

    fn accumulate(&mut self, e: [u32; N], c: &Coefficient) {
        if Self::degree(&e) > self.order || c.is_zero() {
            return;
        }
        let entry = self.terms.entry(e).or_insert_with(|| Coefficient::zero(c.order()));
        *entry += c;
        if entry.is_zero() {
            self.terms.remove(&e);
        }
    }

    fn coeff(&self, e: &[u32; N]) -> Coefficient {
        self.terms.get(e).cloned().unwrap_or_else(|| Coefficient::zero(self.p))
    }

    fn with_order(&self, order: usize) -> Self {
        let terms = self.terms.iter().filter(|(e, _)| Self::degree(e) <= order).map(|(e, c)| (*e, c.clone())).collect();
        Multi { order, p: self.p, terms }
    }

    fn sub(&self, other: &Self) -> Self {
        let mut out = self.with_order(self.order.min(other.order));
        for (e, c) in &other.terms {
            out.accumulate(*e, &-c);
        }
        out
    }

    fn mul(&self, other: &Self) -> Self {
        let mut out = Self::zero(self.order.min(other.order), self.p);
        for (ea, a) in &self.terms {
            for (eb, b) in &other.terms {
                let mut e = [0; N];
                for i in 0..N {
                    e[i] = ea[i] + eb[i];
                }
                if Self::degree(&e) <= out.order {
                    out.accumulate(e, &(a * b));
                }
            }
        }
        out
    }

    /// `self(args[0], ..., args[N-1])`; every argument has zero constant term.
    fn substitute<const M: usize>(&self, args: &[&Multi<M>; N], order: usize) -> Multi<M> {
        let order = args.iter().fold(order.min(self.order), |o, a| o.min(a.order));
        let mut powers: Vec<Vec<Multi<M>>> = Vec::with_capacity(N);
        for (i, arg) in args.iter().enumerate() {
            let max = self.terms.keys().map(|e| e[i]).max().unwrap_or(0) as usize;
            let arg = arg.with_order(order);
            let mut list = vec![Multi::one(order, self.p)];
            for k in 1..=max {
                let next = list[k - 1].mul(&arg);
                list.push(next);
            }
            powers.push(list);
        }
        let mut out = Multi::zero(order, self.p);
        for (e, c) in &self.terms {
            let mut term = Multi::one(order, self.p);
            for i in 0..N {
                if e[i] > 0 {
                    term = term.mul(&powers[i][e[i] as usize]);
                }
            }
            for (te, tc) in &term.terms {
                out.accumulate(*te, &(tc * c));
            }
        }
        out
    }

    fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    fn lowest_degree(&self) -> Option<usize> {
        self.terms.keys().map(Self::degree).min()
    }

    fn render(&self, vars: &[&str; N]) -> String {
        let mut sorted: Vec<_> = self.terms.iter().collect();
        sorted.sort_by_key(|(e, _)| (Self::degree(e), std::cmp::Reverse(**e)));
        let terms = sorted.into_iter().map(|(e, c)| {
            let mono: Vec<String> = e.iter().zip(vars).filter(|(x, _)| **x > 0).map(|(x, v)| power(v, *x)).collect();
            (c, mono.join("*"))
        });
        join_terms(terms, "*")
    }
}

/// Truncated series in `u`, `v` with total degree at most `order`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct BivariateSeries(Multi<2>);

impl BivariateSeries {
    pub fn zero(order: usize, p: usize) -> Self {
        BivariateSeries(Multi::zero(order, p))
    }

    pub fn from_terms<I>(order: usize, p: usize, terms: I) -> Self
    where
        I: IntoIterator<Item = ((u32, u32), Coefficient)>,
    {
        let mut m = Multi::zero(order, p);
        for ((a, b), c) in terms {
            assert_eq!(c.order(), p, "mixed coefficient orders");
            m.accumulate([a, b], &c);
        }
        BivariateSeries(m)
    }

    pub fn from_int_terms(order: usize, p: usize, terms: &[((u32, u32), i64)]) -> Self {
        Self::from_terms(order, p, terms.iter().map(|&(e, c)| (e, Coefficient::from_int(c, p))))
    }

    /// `u + v`.
    pub fn additive(order: usize, p: usize) -> Self {
        Self::from_int_terms(order, p, &[((1, 0), 1), ((0, 1), 1)])
    }

    /// `u + v - uv`.
    pub fn multiplicative(order: usize, p: usize) -> Self {
        Self::from_int_terms(order, p, &[((1, 0), 1), ((0, 1), 1), ((1, 1), -1)])
    }

    pub fn order(&self) -> usize {
        self.0.order
    }

    pub fn nilpotency(&self) -> usize {
        self.0.p
    }

    pub fn coeff(&self, m: u32, n: u32) -> Coefficient {
        self.0.coeff(&[m, n])
    }

    pub fn terms(&self) -> impl Iterator<Item = ((u32, u32), &Coefficient)> {
        self.0.terms.iter().map(|(e, c)| ((e[0], e[1]), c))
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    /// Lowest total degree carrying a nonzero coefficient.
    pub fn lowest_degree(&self) -> Option<usize> {
        self.0.lowest_degree()
    }

    pub fn embed(&self, p: usize) -> Result<Self, SeriesError> {
        let mut m = Multi::zero(self.order(), p);
        for (e, c) in &self.0.terms {
            m.insert(*e, c.embed(p)?);
        }
        Ok(BivariateSeries(m))
    }

    pub fn sub(&self, other: &Self) -> Self {
        BivariateSeries(self.0.sub(&other.0))
    }

    pub fn mul(&self, other: &Self) -> Self {
        BivariateSeries(self.0.mul(&other.0))
    }

    /// `f(v, u)`.
    pub fn swap(&self) -> Self {
        let terms = self.terms().map(|((a, b), c)| ((b, a), c.clone()));
        Self::from_terms(self.order(), self.nilpotency(), terms)
    }

    /// `f(a(t), b(t))`; both arguments need zero constant term.
    pub fn compose_diagonal(
        &self,
        a: &UnivariateSeries,
        b: &UnivariateSeries,
    ) -> Result<UnivariateSeries, SeriesError> {
        for s in [a, b] {
            if !s.coeff(0).is_zero() {
                return Err(SeriesError::CompositionConstantTerm(s.coeff(0).to_string()));
            }
        }
        let order = self.order().min(a.order()).min(b.order());
        let args: [&Multi<1>; 2] = [&a.to_multi(0), &b.to_multi(0)];
        let m = self.0.substitute(&args, order);
        Ok(UnivariateSeries::from_coeffs((0..=order).map(|n| m.coeff(&[n as u32])).collect()))
    }
}

impl fmt::Display for BivariateSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0.render(&["u", "v"]))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum GroupLawKind {
    Additive,
    Multiplicative,
    Custom(BivariateSeries),
}

/// A commutative formal group law truncated at `order`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GroupLaw {
    kind: GroupLawKind,
    order: usize,
}

impl GroupLaw {
    pub fn additive(order: usize) -> Self {
        GroupLaw { kind: GroupLawKind::Additive, order }
    }

    pub fn multiplicative(order: usize) -> Self {
        GroupLaw { kind: GroupLawKind::Multiplicative, order }
    }

    /// Accepts `f` only if it passes [`check_group_law`].
    pub fn custom(f: BivariateSeries) -> Result<Self, SeriesError> {
        let report = check_group_law(&f);
        if !report.pass {
            let failed: Vec<String> = report.failures().map(|c| c.input.clone()).collect();
            return Err(SeriesError::InvalidGroupLaw(failed.join(", ")));
        }
        let order = f.order();
        Ok(GroupLaw { kind: GroupLawKind::Custom(f), order })
    }

    pub fn kind(&self) -> &GroupLawKind {
        &self.kind
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// The law as a bivariate series with coefficients of order `p`.
    pub fn series(&self, p: usize) -> Result<BivariateSeries, SeriesError> {
        match &self.kind {
            GroupLawKind::Additive => Ok(BivariateSeries::additive(self.order, p)),
            GroupLawKind::Multiplicative => Ok(BivariateSeries::multiplicative(self.order, p)),
            GroupLawKind::Custom(f) => f.embed(p),
        }
    }

    fn natural_p(&self) -> usize {
        match &self.kind {
            GroupLawKind::Custom(f) => f.nilpotency(),
            _ => 1,
        }
    }
}

impl fmt::Display for GroupLaw {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            GroupLawKind::Additive => f.write_str("additive"),
            GroupLawKind::Multiplicative => f.write_str("multiplicative"),
            GroupLawKind::Custom(s) => write!(f, "custom({s})"),
        }
    }
}

/// Solves `f(u, opp(u)) = 0` degree by degree.
fn solve_opp(f: &BivariateSeries) -> Result<UnivariateSeries, SeriesError> {
    let order = f.order();
    let p = f.nilpotency();
    let lead = f.coeff(0, 1);
    let inv = lead.invert().map_err(|_| SeriesError::NoSolution(format!("coefficient of v is {lead}, not a unit")))?;
    let u = UnivariateSeries::variable(order, p);
    let mut opp = UnivariateSeries::zero(order, p);
    for n in 1..=order {
        let value = f.compose_diagonal(&u, &opp)?;
        opp.coeffs[n] = -(value.coeff(n) * &inv);
    }
    let check = f.compose_diagonal(&u, &opp)?;
    if !check.is_zero() {
        return Err(SeriesError::NoSolution(format!("residual {check}")));
    }
    Ok(opp)
}

/// The inverse series `opp(u)` with `f(u, opp(u)) = 0`.
pub fn opp_series(law: &GroupLaw) -> Result<UnivariateSeries, SeriesError> {
    match law.kind {
        GroupLawKind::Additive => Ok(UnivariateSeries::variable(law.order, 1).neg()),
        _ => solve_opp(&law.series(law.natural_p())?),
    }
}

/// Checks commutativity, unit, associativity and inverse of `f` up to its order.
pub fn check_group_law(f: &BivariateSeries) -> VerificationReport {
    let order = f.order();
    let p = f.nilpotency();
    let mut report = VerificationReport::new("group-law").param("order", order).param("f", f);

    let swapped = f.swap();
    let diff = f.sub(&swapped);
    report.push(None, "(a) f(u,v) = f(v,u)", f, &swapped, &diff, diff.is_zero());

    let u = UnivariateSeries::variable(order, p);
    let zero = UnivariateSeries::zero(order, p);
    match f.compose_diagonal(&u, &zero) {
        Ok(fu0) => {
            let diff = fu0.sub(&u);
            report.push(
                None,
                "(b) f(u,0) = u",
                fu0.render_in("u"),
                u.render_in("u"),
                diff.render_in("u"),
                diff.is_zero(),
            );
        }
        Err(e) => report.push(None, "(b) f(u,0) = u", e, "u", "undefined", false),
    }

    let uu = Multi::<3>::variable(0, order, p);
    let vv = Multi::<3>::variable(1, order, p);
    let ww = Multi::<3>::variable(2, order, p);
    if f.coeff(0, 0).is_zero() {
        let fvw = f.0.substitute(&[&vv, &ww], order);
        let fuv = f.0.substitute(&[&uu, &vv], order);
        let left = f.0.substitute(&[&uu, &fvw], order);
        let right = f.0.substitute(&[&fuv, &ww], order);
        let diff = left.sub(&right);
        let vars = ["u", "v", "w"];
        report.push(
            None,
            "(c) f(u,f(v,w)) = f(f(u,v),w)",
            left.render(&vars),
            right.render(&vars),
            diff.render(&vars),
            diff.is_zero(),
        );
    } else {
        report.push(None, "(c) f(u,f(v,w)) = f(f(u,v),w)", "undefined", "undefined", f.coeff(0, 0), false);
    }

    match solve_opp(f) {
        Ok(opp) => {
            let value = f.compose_diagonal(&u, &opp).expect("opp has zero constant term");
            let check_zero = value.is_zero();
            let value = value.render_in("u");
            report.push(
                None,
                format!("(d) f(u,opp(u)) = 0, opp = {}", opp.render_in("u")),
                &value,
                0,
                &value,
                check_zero,
            );
        }
        Err(e) => report.push(None, "(d) f(u,opp(u)) = 0", e, 0, "no solution", false),
    }
    report
}

/// Checks `F(f(u,v)) = F(u) F(v)` up to the smaller order.
pub fn check_multiplicativity(series: &UnivariateSeries, law: &GroupLaw) -> VerificationReport {
    let p = series.nilpotency();
    let order = series.order().min(law.order());
    let mut report =
        VerificationReport::new("multiplicativity").param("F", series).param("law", law).param("order", order);
    let f = match law.series(p) {
        Ok(f) => f,
        Err(e) => {
            report.push(None, "F(f(u,v)) = F(u)F(v)", e, "", "incompatible coefficients", false);
            return report;
        }
    };
    let series = series.truncate(order);
    let lhs = match series.compose_bivariate(&f) {
        Ok(l) => l,
        Err(e) => {
            report.push(None, "F(f(u,v)) = F(u)F(v)", e, "", "undefined", false);
            return report;
        }
    };
    let fu = BivariateSeries(series.to_multi::<2>(0));
    let fv = BivariateSeries(series.to_multi::<2>(1));
    let rhs = fu.mul(&fv);
    let diff = lhs.sub(&rhs);
    report.push(None, "F(f(u,v)) = F(u)F(v)", &lhs, &rhs, &diff, diff.is_zero());
    report
}

/// The named series used throughout.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BuiltinSeries {
    /// `(1 - (1-t)^j) / t`, the Adams correction.
    Bj(i64),
    /// `(1 - e^{-t}) / t`, inverse of the Todd series.
    T,
    /// `(1 - e^{-jt}) / t`.
    Sj(i64),
    /// `(1 - t)^{-j}`; its additive extension is `psi^j`.
    OneMinusTPow(i64),
    Exp,
    /// `exp(e t)`.
    ExpEps,
    /// `(-t)^{m-1}`.
    Monomial(u32),
    /// `(1 - exp(-e t)) / t`.
    TwistedT,
    /// `t / (1 - e^{-t})`.
    Todd,
}

/// Generalised binomial coefficient `C(j, n)` for any integer `j`.
pub fn binomial(j: i64, n: usize) -> BigRational {
    let mut num = BigInt::one();
    let mut den = BigInt::one();
    for i in 0..n {
        num *= BigInt::from(j) - BigInt::from(i);
        den *= BigInt::from(i + 1);
    }
    BigRational::new(num, den)
}

fn factorial(n: usize) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, i| acc * BigInt::from(i))
}

fn sign(n: usize) -> BigRational {
    if n.is_multiple_of(2) {
        BigRational::one()
    } else {
        -BigRational::one()
    }
}

/// Exact coefficients of a named series up to degree `order`, over `Q[e]/(e^p)`.
pub fn builtin_series(name: BuiltinSeries, order: usize, p: usize) -> Result<UnivariateSeries, SeriesError> {
    if p == 0 {
        return Err(SeriesError::BadParam("nilpotency order must be at least 1".into()));
    }
    let scalar = |r: BigRational| Coefficient::from_rational(r, p);
    let coeffs: Vec<Coefficient> = match name {
        BuiltinSeries::Bj(0) | BuiltinSeries::Sj(0) => {
            return Err(SeriesError::BadParam("j must be nonzero".into()));
        }
        BuiltinSeries::Bj(j) => (0..=order).map(|n| scalar(sign(n) * binomial(j, n + 1))).collect(),
        BuiltinSeries::OneMinusTPow(j) => (0..=order).map(|n| scalar(sign(n) * binomial(-j, n))).collect(),
        BuiltinSeries::T => {
            (0..=order).map(|n| scalar(sign(n) / BigRational::from_integer(factorial(n + 1)))).collect()
        }
        BuiltinSeries::Sj(j) => (0..=order)
            .map(|n| {
                let jp = BigRational::from_integer(BigInt::from(j).pow(n as u32 + 1));
                scalar(sign(n) * jp / BigRational::from_integer(factorial(n + 1)))
            })
            .collect(),
        BuiltinSeries::Exp => (0..=order).map(|n| scalar(BigRational::new(BigInt::one(), factorial(n)))).collect(),
        BuiltinSeries::ExpEps | BuiltinSeries::TwistedT if p < 2 => {
            return Err(SeriesError::BadParam("twisted series need p >= 2".into()));
        }
        BuiltinSeries::ExpEps => {
            (0..=order).map(|n| epsilon_power(n, p).scale(&BigRational::new(BigInt::one(), factorial(n)))).collect()
        }
        BuiltinSeries::TwistedT => (0..=order)
            .map(|n| epsilon_power(n + 1, p).scale(&(sign(n) / BigRational::from_integer(factorial(n + 1)))))
            .collect(),
        BuiltinSeries::Monomial(0) => {
            return Err(SeriesError::BadParam("monomial (-t)^(m-1) needs m >= 1".into()));
        }
        BuiltinSeries::Monomial(m) => {
            let deg = m as usize - 1;
            (0..=order).map(|n| if n == deg { scalar(sign(deg)) } else { Coefficient::zero(p) }).collect()
        }
        BuiltinSeries::Todd => return builtin_series(BuiltinSeries::T, order, p)?.invert(),
    };
    Ok(UnivariateSeries::from_coeffs(coeffs))
}

fn epsilon_power(n: usize, p: usize) -> Coefficient {
    let mut parts = vec![BigRational::zero(); p];
    if n < p {
        parts[n] = BigRational::one();
    }
    Coefficient::from_parts(parts).expect("p >= 1")
}

impl fmt::Display for BuiltinSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BuiltinSeries::Bj(j) => write!(f, "bj:{j}"),
            BuiltinSeries::T => f.write_str("t"),
            BuiltinSeries::Sj(j) => write!(f, "sj:{j}"),
            BuiltinSeries::OneMinusTPow(j) => write!(f, "one-minus-t-pow:{j}"),
            BuiltinSeries::Exp => f.write_str("exp"),
            BuiltinSeries::ExpEps => f.write_str("exp-eps"),
            BuiltinSeries::Monomial(m) => write!(f, "monomial:{m}"),
            BuiltinSeries::TwistedT => f.write_str("twisted"),
            BuiltinSeries::Todd => f.write_str("todd"),
        }
    }
}

impl FromStr for BuiltinSeries {
    type Err = SeriesError;

    /// Accepts `bj:J`, `t`, `sj:J`, `one-minus-t-pow:J`, `exp`, `exp-eps`,
    /// `monomial:M`, `twisted`, `todd` (case-insensitive).
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let lower = s.to_ascii_lowercase();
        let (name, arg) = match lower.split_once(':') {
            Some((n, a)) => (n, Some(a)),
            None => (lower.as_str(), None),
        };
        let int = |what: &str| -> Result<i64, SeriesError> {
            arg.ok_or_else(|| SeriesError::BadParam(format!("{what} needs a parameter, e.g. {what}:2")))?
                .parse()
                .map_err(|_| SeriesError::BadParam(format!("bad parameter in {s:?}")))
        };
        let no_arg = |v: BuiltinSeries| {
            if arg.is_some() {
                Err(SeriesError::BadParam(format!("{name} takes no parameter")))
            } else {
                Ok(v)
            }
        };
        match name {
            "bj" => Ok(BuiltinSeries::Bj(int("bj")?)),
            "sj" => Ok(BuiltinSeries::Sj(int("sj")?)),
            "one-minus-t-pow" => Ok(BuiltinSeries::OneMinusTPow(int("one-minus-t-pow")?)),
            "monomial" => {
                let m = int("monomial")?;
                u32::try_from(m)
                    .map(BuiltinSeries::Monomial)
                    .map_err(|_| SeriesError::BadParam("monomial degree must be nonnegative".into()))
            }
            "t" => no_arg(BuiltinSeries::T),
            "exp" => no_arg(BuiltinSeries::Exp),
            "exp-eps" => no_arg(BuiltinSeries::ExpEps),
            "twisted" => no_arg(BuiltinSeries::TwistedT),
            "todd" => no_arg(BuiltinSeries::Todd),
            _ => Err(SeriesError::BadParam(format!("unknown series {s:?}"))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> Coefficient {
        Coefficient::from_ratio(n, d, 1)
    }

    fn series(values: &[(i64, i64)]) -> UnivariateSeries {
        UnivariateSeries::from_coeffs(values.iter().map(|&(n, d)| q(n, d)).collect())
    }

    #[test]
    fn multiply_examples() {
        let a = UnivariateSeries::from_ints(&[1, 1, 0, 0], 1);
        let b = UnivariateSeries::from_ints(&[1, -1, 0, 0], 1);
        assert_eq!(a.multiply(&b), UnivariateSeries::from_ints(&[1, 0, -1, 0], 1));
        let c = UnivariateSeries::from_ints(&[2, -1, 0], 1);
        assert_eq!(c.multiply(&c), UnivariateSeries::from_ints(&[4, -4, 1], 1));
        let t = builtin_series(BuiltinSeries::T, 4, 1).unwrap();
        let todd = t.invert().unwrap();
        assert_eq!(t.multiply(&todd), UnivariateSeries::one(4, 1));
    }

    #[test]
    fn compose_examples() {
        let f = UnivariateSeries::from_ints(&[1, 1, 0], 1);
        let g = UnivariateSeries::from_ints(&[0, 0, 1], 1);
        assert_eq!(f.compose(&g).unwrap(), UnivariateSeries::from_ints(&[1, 0, 1], 1));
        let exp = builtin_series(BuiltinSeries::Exp, 3, 1).unwrap();
        let minus_t = UnivariateSeries::from_ints(&[0, -1, 0, 0], 1);
        assert_eq!(exp.compose(&minus_t).unwrap(), series(&[(1, 1), (-1, 1), (1, 2), (-1, 6)]));
        let bad = UnivariateSeries::from_ints(&[1, 1], 1);
        assert!(matches!(f.compose(&bad), Err(SeriesError::CompositionConstantTerm(_))));
    }

    #[test]
    fn invert_examples() {
        let f = UnivariateSeries::from_ints(&[1, -1, 0, 0], 1);
        assert_eq!(f.invert().unwrap(), UnivariateSeries::from_ints(&[1, 1, 1, 1], 1));
        let t = series(&[(1, 1), (-1, 2), (1, 6), (-1, 24)]);
        assert_eq!(t.invert().unwrap(), series(&[(1, 1), (1, 2), (1, 12), (0, 1)]));
        let x = UnivariateSeries::variable(3, 1);
        assert!(matches!(x.invert(), Err(SeriesError::NonUnit(_))));
    }

    #[test]
    fn builtin_examples() {
        assert_eq!(builtin_series(BuiltinSeries::Bj(2), 3, 1).unwrap(), UnivariateSeries::from_ints(&[2, -1, 0, 0], 1));
        assert_eq!(builtin_series(BuiltinSeries::Bj(3), 3, 1).unwrap(), UnivariateSeries::from_ints(&[3, -3, 1, 0], 1));
        assert_eq!(builtin_series(BuiltinSeries::T, 3, 1).unwrap(), series(&[(1, 1), (-1, 2), (1, 6), (-1, 24)]));
        let tw = builtin_series(BuiltinSeries::TwistedT, 2, 3).unwrap();
        assert_eq!(tw.to_string(), "e - 1/2*e^2*t");
        assert!(tw.coeff(2).is_zero());
        assert!(builtin_series(BuiltinSeries::Bj(0), 3, 1).is_err());
        assert!(builtin_series(BuiltinSeries::ExpEps, 3, 1).is_err());
        assert!(builtin_series(BuiltinSeries::Monomial(0), 3, 1).is_err());
        assert_eq!(builtin_series(BuiltinSeries::OneMinusTPow(0), 2, 1).unwrap(), UnivariateSeries::one(2, 1));
    }

    #[test]
    fn rendering() {
        assert_eq!(UnivariateSeries::from_ints(&[2, -1, 0, 0], 1).to_string(), "2 - t");
        assert_eq!(UnivariateSeries::zero(3, 1).to_string(), "0");
        assert_eq!(series(&[(0, 1), (1, 2), (-3, 1)]).to_string(), "1/2*t - 3*t^2");
        assert_eq!(BivariateSeries::multiplicative(3, 1).to_string(), "u + v - u*v");
    }

    #[test]
    fn opp_examples() {
        assert_eq!(opp_series(&GroupLaw::additive(3)).unwrap(), UnivariateSeries::from_ints(&[0, -1, 0, 0], 1));
        assert_eq!(opp_series(&GroupLaw::multiplicative(3)).unwrap(), UnivariateSeries::from_ints(&[0, -1, -1, -1], 1));
        let custom = GroupLaw::custom(BivariateSeries::additive(4, 1)).unwrap();
        assert_eq!(opp_series(&custom).unwrap(), UnivariateSeries::from_ints(&[0, -1, 0, 0, 0], 1));
    }

    #[test]
    fn opp_of_multiplicative_matches_closed_form() {
        for d in 1..=12 {
            let opp = opp_series(&GroupLaw::multiplicative(d)).unwrap();
            // -t/(1-t)
            let t = UnivariateSeries::variable(d, 1);
            let geom = UnivariateSeries::from_ints(&[1, -1], 1);
            let geom = UnivariateSeries::from_coeffs(
                (0..=d).map(|n| geom.coeffs.get(n).cloned().unwrap_or(q(0, 1))).collect(),
            );
            let expected = t.multiply(&geom.invert().unwrap()).neg();
            assert_eq!(opp, expected, "order {d}");
        }
    }

    #[test]
    fn group_law_checks() {
        assert!(check_group_law(&BivariateSeries::multiplicative(8, 1)).pass);
        assert!(check_group_law(&BivariateSeries::additive(8, 1)).pass);

        let f = BivariateSeries::from_int_terms(4, 1, &[((1, 0), 1), ((0, 1), 1), ((2, 0), 1)]);
        let r = check_group_law(&f);
        assert!(!r.pass);
        let b = r.cases.iter().find(|c| c.input.starts_with("(b)")).unwrap();
        assert!(!b.pass);
        assert_eq!(b.residual, "u^2");

        let g = BivariateSeries::from_int_terms(4, 1, &[((1, 0), 1), ((0, 1), 1), ((1, 2), 1)]);
        let r = check_group_law(&g);
        let c = r.cases.iter().find(|c| c.input.starts_with("(c)")).unwrap();
        assert!(!c.pass);
        assert!(GroupLaw::custom(g).is_err());
    }

    #[test]
    fn multiplicativity_examples() {
        let f = builtin_series(BuiltinSeries::OneMinusTPow(2), 6, 1).unwrap();
        assert!(check_multiplicativity(&f, &GroupLaw::multiplicative(6)).pass);
        let exp = builtin_series(BuiltinSeries::Exp, 6, 1).unwrap();
        assert!(check_multiplicativity(&exp, &GroupLaw::additive(6)).pass);
        let lin = UnivariateSeries::from_ints(&[1, 1, 0, 0], 1);
        let r = check_multiplicativity(&lin, &GroupLaw::multiplicative(3));
        assert!(!r.pass);
        assert_eq!(r.cases[0].residual, "-2*u*v");
    }

    #[test]
    fn reversion_inverts_composition() {
        let g = series(&[(0, 1), (-1, 1), (-1, 1), (-1, 1), (-1, 1)]);
        let h = g.reversion().unwrap();
        assert_eq!(g.compose(&h).unwrap(), UnivariateSeries::variable(4, 1));
        assert_eq!(h.compose(&g).unwrap(), UnivariateSeries::variable(4, 1));
    }

    #[test]
    fn parse_names() {
        assert_eq!("Bj:3".parse::<BuiltinSeries>().unwrap(), BuiltinSeries::Bj(3));
        assert_eq!("todd".parse::<BuiltinSeries>().unwrap(), BuiltinSeries::Todd);
        assert!("bj".parse::<BuiltinSeries>().is_err());
        assert!("exp:3".parse::<BuiltinSeries>().is_err());
        for s in ["bj:-2", "t", "sj:5", "one-minus-t-pow:-1", "exp", "exp-eps", "monomial:3", "twisted", "todd"] {
            assert_eq!(s.parse::<BuiltinSeries>().unwrap().to_string(), s);
        }
    }
}
