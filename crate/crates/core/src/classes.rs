//! Characteristic classes and natural transformations out of `K`.
//!
//! Every `K`-class of the model spaces is an integer combination of line
//! classes, so additive and multiplicative extensions of a series are
//! evaluated line by line: `F_+([L]) = F(c_1(L))`, `F_x(L) = F(c_1(L))`.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::coeff::Coefficient;
use crate::model::{
    c1, line_element, to_lines, LineClass, LineCombination, ModelError, Theory, TheoryRing, TruncatedPolynomial,
    VirtualBundle,
};
use crate::series::{builtin_series, BuiltinSeries, SeriesError, UnivariateSeries};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ClassError {
    #[error("{op} needs the {expected} model, got {got}")]
    WrongTheory { op: String, expected: Theory, got: Theory },
    #[error("negative power of the non-unit {0}")]
    NonUnitFactor(String),
    #[error("bad parameter: {0}")]
    BadParam(String),
    #[error("Newton identities disagree for s_{m}: direct {direct}, via Chern classes {newton}")]
    NewtonMismatch { m: usize, direct: String, newton: String },
    #[error("multiplicative extension needs integer multiplicities, got {0}")]
    NonIntegerMultiplicity(String),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Series(#[from] SeriesError),
}

fn require(ring: &TheoryRing, theory: Theory, op: &str) -> Result<(), ClassError> {
    if ring.theory() == theory {
        Ok(())
    } else {
        Err(ClassError::WrongTheory { op: op.to_string(), expected: theory, got: ring.theory() })
    }
}

/// A series given by name (expanded to whatever order a ring needs) or explicitly.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ExtSeries {
    Builtin(BuiltinSeries),
    Explicit(UnivariateSeries),
}

impl ExtSeries {
    /// Coefficients up to `order` over `Q[e]/(e^p)`.
    pub fn at_order(&self, order: usize, p: usize) -> Result<UnivariateSeries, ClassError> {
        match self {
            ExtSeries::Builtin(b) => Ok(builtin_series(*b, order, p)?),
            ExtSeries::Explicit(s) => {
                if s.order() < order {
                    return Err(ModelError::SeriesTooShort { order: s.order(), needed: order }.into());
                }
                Ok(s.truncate(order).embed(p)?)
            }
        }
    }
}

impl fmt::Display for ExtSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtSeries::Builtin(b) => write!(f, "{b}"),
            ExtSeries::Explicit(s) => write!(f, "[{s}]"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TransformationKind {
    /// `psi^j`, `[L] -> [L^j]`.
    Adams(i64),
    ChernCharacter,
    /// `[L] -> exp(e c_1(L))` with coefficients of order `p`.
    TwistedChernCharacter(usize),
    AdditiveExt(ExtSeries),
    MultiplicativeExt(ExtSeries),
    Identity,
    /// `Phi^j` on the Chow ring: degree `n` scaled by `j^n`.
    Grading(i64),
}

/// A map out of `K` (or, for the identity and the grading, out of `CH`).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Transformation {
    kind: TransformationKind,
    source: Theory,
    target: Theory,
    p: usize,
}

impl Transformation {
    pub fn adams(j: i64) -> Self {
        Transformation { kind: TransformationKind::Adams(j), source: Theory::K, target: Theory::K, p: 1 }
    }

    pub fn chern_character() -> Self {
        Transformation { kind: TransformationKind::ChernCharacter, source: Theory::K, target: Theory::Chow, p: 1 }
    }

    pub fn twisted_chern_character(p: usize) -> Result<Self, ClassError> {
        if p < 2 {
            return Err(ClassError::BadParam(format!("twisted Chern character needs p >= 2, got {p}")));
        }
        Ok(Transformation {
            kind: TransformationKind::TwistedChernCharacter(p),
            source: Theory::K,
            target: Theory::Chow,
            p,
        })
    }

    pub fn additive_ext(f: ExtSeries, target: Theory, p: usize) -> Self {
        Transformation { kind: TransformationKind::AdditiveExt(f), source: Theory::K, target, p }
    }

    pub fn multiplicative_ext(f: ExtSeries, target: Theory, p: usize) -> Self {
        Transformation { kind: TransformationKind::MultiplicativeExt(f), source: Theory::K, target, p }
    }

    pub fn identity(theory: Theory) -> Self {
        Transformation { kind: TransformationKind::Identity, source: theory, target: theory, p: 1 }
    }

    pub fn grading(j: i64) -> Self {
        Transformation { kind: TransformationKind::Grading(j), source: Theory::Chow, target: Theory::Chow, p: 1 }
    }

    /// Parses `psi:J`, `ch`, `ch-eps:P`, `add-ext:NAME[@ch|@k]`,
    /// `mult-ext:NAME[@ch|@k]`, `id`, `id@ch`, `phi:J`. `p` is the
    /// coefficient order used by the extensions.
    pub fn parse(s: &str, p: usize) -> Result<Self, ClassError> {
        let lower = s.trim().to_ascii_lowercase();
        let (head, arg) = match lower.split_once(':') {
            Some((h, a)) => (h, Some(a)),
            None => (lower.as_str(), None),
        };
        let int_arg = || -> Result<i64, ClassError> {
            arg.and_then(|a| a.parse().ok())
                .ok_or_else(|| ClassError::BadParam(format!("{head} needs an integer parameter, got {s:?}")))
        };
        let ext = |arg: Option<&str>| -> Result<(ExtSeries, Theory), ClassError> {
            let arg = arg.ok_or_else(|| ClassError::BadParam(format!("{head} needs a series name")))?;
            let (name, target) = match arg.rsplit_once('@') {
                Some((n, "ch")) => (n, Theory::Chow),
                Some((n, "k")) => (n, Theory::K),
                Some((_, t)) => return Err(ClassError::BadParam(format!("unknown target theory {t:?}"))),
                None => (arg, Theory::K),
            };
            Ok((ExtSeries::Builtin(name.parse()?), target))
        };
        match head {
            "psi" => Ok(Self::adams(int_arg()?)),
            "ch" if arg.is_none() => Ok(Self::chern_character()),
            "ch-eps" => Self::twisted_chern_character(int_arg()?.max(0) as usize),
            "add-ext" => {
                let (f, t) = ext(arg)?;
                Ok(Self::additive_ext(f, t, p))
            }
            "mult-ext" => {
                let (f, t) = ext(arg)?;
                Ok(Self::multiplicative_ext(f, t, p))
            }
            "id" if arg.is_none() => Ok(Self::identity(Theory::K)),
            "id@ch" if arg.is_none() => Ok(Self::identity(Theory::Chow)),
            "phi" => Ok(Self::grading(int_arg()?)),
            _ => Err(ClassError::BadParam(format!("unknown transformation {s:?}"))),
        }
    }

    pub fn kind(&self) -> &TransformationKind {
        &self.kind
    }

    pub fn source(&self) -> Theory {
        self.source
    }

    pub fn target(&self) -> Theory {
        self.target
    }

    /// Coefficient order of the images.
    pub fn p(&self) -> usize {
        self.p
    }

    /// Everything but multiplicative extensions is additive.
    pub fn is_additive(&self) -> bool {
        !matches!(self.kind, TransformationKind::MultiplicativeExt(_))
    }

    /// Ring holding `phi(a)` for `a` in `ring`.
    pub fn target_ring(&self, ring: &TheoryRing) -> TheoryRing {
        TheoryRing::new(ring.space().clone(), self.target, self.p.max(ring.p()))
    }

    fn check_source(&self, ring: &TheoryRing) -> Result<(), ClassError> {
        require(ring, self.source, &self.to_string())
    }

    /// Image of one line class in `out`, for transformations out of `K`.
    pub fn line_image(&self, l: &LineClass, out: &TheoryRing) -> Result<TruncatedPolynomial, ClassError> {
        let dim = out.space().dim();
        match &self.kind {
            TransformationKind::Adams(j) => Ok(line_element(out, &l.power(*j))?),
            TransformationKind::ChernCharacter => Ok(ch_line(out, l, false)),
            TransformationKind::TwistedChernCharacter(_) => Ok(ch_line(out, l, true)),
            TransformationKind::AdditiveExt(f) | TransformationKind::MultiplicativeExt(f) => {
                Ok(c1(out, l)?.apply_series(&f.at_order(dim, out.p())?)?)
            }
            TransformationKind::Identity if self.source == Theory::K => Ok(line_element(out, l)?),
            TransformationKind::Identity | TransformationKind::Grading(_) => {
                Err(ClassError::BadParam(format!("{self} is not defined on line classes")))
            }
        }
    }

    /// Additive image of a line combination, without passing through the ring.
    pub fn apply_lines(&self, combo: &LineCombination, out: &TheoryRing) -> Result<TruncatedPolynomial, ClassError> {
        if !self.is_additive() {
            return Err(ClassError::BadParam(format!("{self} is not additive")));
        }
        let mut acc = TruncatedPolynomial::zero(out);
        for (l, c) in combo.terms() {
            acc = &acc + &self.line_image(l, out)?.scale(&c.embed(out.p()).map_err(ModelError::from)?);
        }
        Ok(acc)
    }

    /// `phi(a)` by the defining formula of each kind.
    pub fn apply(&self, a: &TruncatedPolynomial) -> Result<TruncatedPolynomial, ClassError> {
        self.check_source(a.ring())?;
        let out = self.target_ring(a.ring());
        let a = a.embed(out.p())?;
        match &self.kind {
            TransformationKind::Identity => Ok(a.reinterpret(&out)?),
            TransformationKind::Grading(j) => phi_grading(*j, &a),
            TransformationKind::MultiplicativeExt(f) => {
                let f = f.at_order(out.space().dim(), out.p())?;
                multiplicative_extension(&f, &integer_bundle(&to_lines(&a)?)?, &out)
            }
            _ => self.apply_lines(&to_lines(&a)?, &out),
        }
    }

    /// `phi(a)` through the generating series of `phi`: the additive
    /// extension of `(1-t)^{-j}` for `psi^j`, of `exp` or `exp(e t)` for the
    /// Chern characters, of `1/(1-t)` for the identity of `K`. On the Chow
    /// side the generators are substituted, `y_i -> j y_i`.
    pub fn apply_generic(&self, a: &TruncatedPolynomial) -> Result<TruncatedPolynomial, ClassError> {
        self.check_source(a.ring())?;
        let out = self.target_ring(a.ring());
        let dim = out.space().dim();
        let series = |b: BuiltinSeries| ExtSeries::Builtin(b).at_order(dim, out.p());
        match &self.kind {
            TransformationKind::Adams(j) => additive_extension(&series(BuiltinSeries::OneMinusTPow(*j))?, a, &out),
            TransformationKind::ChernCharacter => additive_extension(&series(BuiltinSeries::Exp)?, a, &out),
            TransformationKind::TwistedChernCharacter(_) => {
                additive_extension(&series(BuiltinSeries::ExpEps)?, a, &out)
            }
            TransformationKind::Identity if self.source == Theory::K => {
                additive_extension(&series(BuiltinSeries::OneMinusTPow(1))?, a, &out)
            }
            TransformationKind::AdditiveExt(f) => additive_extension(&f.at_order(dim, out.p())?, a, &out),
            TransformationKind::MultiplicativeExt(_) => self.apply(a),
            TransformationKind::Identity => substitute_scaled(1, a, &out),
            TransformationKind::Grading(j) => substitute_scaled(*j, a, &out),
        }
    }

    /// Images of the monomial basis of `ring`, for repeated evaluation.
    pub fn basis_images(&self, ring: &TheoryRing) -> Result<BasisImages, ClassError> {
        if !self.is_additive() {
            return Err(ClassError::BadParam(format!("{self} is not additive")));
        }
        let images = ring.basis().iter().map(|b| self.apply(b)).collect::<Result<Vec<_>, _>>()?;
        Ok(BasisImages { source: ring.clone(), target: self.target_ring(ring), images })
    }
}

impl fmt::Display for Transformation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let at = |t: Theory| if t == Theory::Chow { "@ch" } else { "" };
        match &self.kind {
            TransformationKind::Adams(j) => write!(f, "psi:{j}"),
            TransformationKind::ChernCharacter => f.write_str("ch"),
            TransformationKind::TwistedChernCharacter(p) => write!(f, "ch-eps:{p}"),
            TransformationKind::AdditiveExt(s) => write!(f, "add-ext:{s}{}", at(self.target)),
            TransformationKind::MultiplicativeExt(s) => write!(f, "mult-ext:{s}{}", at(self.target)),
            TransformationKind::Identity => write!(f, "id{}", at(self.source)),
            TransformationKind::Grading(j) => write!(f, "phi:{j}"),
        }
    }
}

impl FromStr for Transformation {
    type Err = ClassError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::parse(s, 1)
    }
}

/// Cached images `phi(y^e)`; `apply` is then linear algebra only.
#[derive(Clone, Debug)]
pub struct BasisImages {
    source: TheoryRing,
    target: TheoryRing,
    images: Vec<TruncatedPolynomial>,
}

impl BasisImages {
    pub fn source(&self) -> &TheoryRing {
        &self.source
    }

    pub fn target(&self) -> &TheoryRing {
        &self.target
    }

    pub fn apply(&self, a: &TruncatedPolynomial) -> Result<TruncatedPolynomial, ClassError> {
        if a.ring().space() != self.source.space() || a.ring().theory() != self.source.theory() {
            return Err(ModelError::RingMismatch(format!("{} vs {}", a.ring(), self.source)).into());
        }
        let p = self.target.p();
        let mut acc = TruncatedPolynomial::zero(&self.target);
        let embedded;
        let a = if a.ring().p() == p {
            a
        } else {
            embedded = a.embed(p)?;
            &embedded
        };
        for (img, c) in self.images.iter().zip(a.coefficients()) {
            if !c.is_zero() {
                acc.add_scaled(img, c);
            }
        }
        Ok(acc)
    }
}

fn integer_bundle(combo: &LineCombination) -> Result<VirtualBundle, ClassError> {
    let mut e = VirtualBundle::new();
    for (l, c) in combo.terms() {
        let r = c.part(0);
        if !c.is_scalar() || !r.is_integer() {
            return Err(ClassError::NonIntegerMultiplicity(format!("{c} * [{l}]")));
        }
        let m: i64 = r.to_integer().try_into().map_err(|_| ClassError::BadParam(format!("multiplicity {c}")))?;
        e.add_line(l.clone(), m);
    }
    Ok(e)
}

fn substitute_scaled(j: i64, a: &TruncatedPolynomial, out: &TheoryRing) -> Result<TruncatedPolynomial, ClassError> {
    let k = out.space().factors();
    let gens: Vec<TruncatedPolynomial> = (0..k).map(|i| TruncatedPolynomial::variable(out, i).scale_int(j)).collect();
    let mut acc = TruncatedPolynomial::zero(out);
    for (exp, c) in a.terms() {
        let mut term = TruncatedPolynomial::constant(out, c.embed(out.p()).map_err(ModelError::from)?);
        for (g, &e) in gens.iter().zip(exp) {
            term = &term * &g.pow(e);
        }
        acc = &acc + &term;
    }
    Ok(acc)
}

/// `prod_i exp(a_i y_i)`, or `prod_i exp(e a_i y_i)` when `twisted`.
fn ch_line(ring: &TheoryRing, l: &LineClass, twisted: bool) -> TruncatedPolynomial {
    let p = ring.p();
    let factors: Vec<Vec<Coefficient>> = l
        .degrees()
        .iter()
        .zip(ring.space().dims())
        .map(|(&a, &d)| {
            let base = if twisted { Coefficient::epsilon(p).scale_int(a) } else { Coefficient::from_int(a, p) };
            let mut out = Vec::with_capacity(d as usize + 1);
            let mut term = Coefficient::one(p);
            for n in 0..=d as i64 {
                if n > 0 {
                    term = (&term * &base).scale(&num_rational::BigRational::new(1.into(), n.into()));
                }
                out.push(term.clone());
            }
            out
        })
        .collect();
    TruncatedPolynomial::tensor(ring, &factors)
}

fn fit_series(f: &UnivariateSeries, ring: &TheoryRing) -> Result<UnivariateSeries, ClassError> {
    if f.nilpotency() == ring.p() {
        Ok(f.clone())
    } else {
        Ok(f.embed(ring.p())?)
    }
}

/// `F_x(E) = prod_L F(c_1(L))^{mult(L)}`; negative multiplicities invert.
pub fn multiplicative_extension(
    f: &UnivariateSeries,
    e: &VirtualBundle,
    ring: &TheoryRing,
) -> Result<TruncatedPolynomial, ClassError> {
    let f = fit_series(f, ring)?;
    let mut acc = TruncatedPolynomial::one(ring);
    for (l, m) in e.terms() {
        let value = c1(ring, l)?.apply_series(&f)?;
        let factor = if m < 0 {
            value.invert().map_err(|_| ClassError::NonUnitFactor(format!("{f} at c1({l})")))?
        } else {
            value
        };
        acc = &acc * &factor.pow(m.unsigned_abs() as u32);
    }
    Ok(acc)
}

/// `F_+(a) = sum_L mult(L) F(c_1^target(L))` for a `K`-class `a`.
pub fn additive_extension(
    f: &UnivariateSeries,
    a: &TruncatedPolynomial,
    target: &TheoryRing,
) -> Result<TruncatedPolynomial, ClassError> {
    require(a.ring(), Theory::K, "additive extension")?;
    if a.ring().space() != target.space() {
        return Err(ModelError::RingMismatch(format!("{} vs {}", a.ring(), target)).into());
    }
    let f = fit_series(f, target)?;
    let mut acc = TruncatedPolynomial::zero(target);
    for (l, c) in to_lines(&a.embed(target.p())?)?.terms() {
        acc = &acc + &c1(target, l)?.apply_series(&f)?.scale(c);
    }
    Ok(acc)
}

/// `psi^j(a)`; `psi^0` is the rank.
pub fn adams(j: i64, a: &TruncatedPolynomial) -> Result<TruncatedPolynomial, ClassError> {
    Transformation::adams(j).apply(a)
}

/// `ch(a)` in `ch_ring`; twisted by `e` when `ch_ring` has `p >= 2`.
pub fn chern_character(a: &TruncatedPolynomial, ch_ring: &TheoryRing) -> Result<TruncatedPolynomial, ClassError> {
    require(ch_ring, Theory::Chow, "Chern character")?;
    if ch_ring.space() != a.ring().space() || a.ring().p() > ch_ring.p() {
        return Err(ModelError::RingMismatch(format!("{} vs {}", a.ring(), ch_ring)).into());
    }
    let phi = if ch_ring.p() == 1 {
        Transformation::chern_character()
    } else {
        Transformation::twisted_chern_character(ch_ring.p())?
    };
    phi.apply(a)
}

/// `theta^j(E^*) = B^j_x(E)`.
pub fn theta(j: i64, e: &VirtualBundle, ring: &TheoryRing) -> Result<TruncatedPolynomial, ClassError> {
    require(ring, Theory::K, "Bott class")?;
    if j == 0 {
        return Err(ClassError::BadParam("theta^0 is not defined".into()));
    }
    let b = builtin_series(BuiltinSeries::Bj(j), ring.space().dim(), ring.p())?;
    multiplicative_extension(&b, e, ring)
}

/// `theta^j(E)` from line classes: `theta^j(L) = 1 + L + ... + L^{j-1}` for
/// `j > 0` and `-(L^j + ... + L^{-1})` for `j < 0`, extended multiplicatively.
pub fn bott_class_literal(j: i64, e: &VirtualBundle, ring: &TheoryRing) -> Result<TruncatedPolynomial, ClassError> {
    require(ring, Theory::K, "Bott class")?;
    if j == 0 {
        return Err(ClassError::BadParam("theta^0 is not defined".into()));
    }
    let mut acc = TruncatedPolynomial::one(ring);
    for (l, m) in e.terms() {
        let mut value = TruncatedPolynomial::zero(ring);
        let (range, sign) = if j > 0 { (0..j, 1) } else { (j..0, -1) };
        for k in range {
            value = &value + &line_element(ring, &l.power(k))?;
        }
        let value = value.scale_int(sign);
        let factor = if m < 0 { value.invert()? } else { value };
        acc = &acc * &factor.pow(m.unsigned_abs() as u32);
    }
    Ok(acc)
}

/// Chern classes `c_0, ..., c_n` (`n` the dimension) of the total class
/// `prod_L (1 + c_1(L) t)^{mult(L)}`; higher ones vanish.
pub fn chern_classes(e: &VirtualBundle, ring: &TheoryRing) -> Result<Vec<TruncatedPolynomial>, ClassError> {
    let n = ring.space().dim();
    let mut total = vec![TruncatedPolynomial::zero(ring); n + 1];
    total[0] = TruncatedPolynomial::one(ring);
    let mul = |a: &[TruncatedPolynomial], b: &[TruncatedPolynomial]| {
        let mut out = vec![TruncatedPolynomial::zero(ring); n + 1];
        for (i, x) in a.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            for (k, y) in b.iter().enumerate().take(n + 1 - i) {
                out[i + k] = &out[i + k] + &(x * y);
            }
        }
        out
    };
    for (l, m) in e.terms() {
        let x = c1(ring, l)?;
        // (1 + x t)^{-1} = sum (-x)^k t^k
        let factor: Vec<TruncatedPolynomial> = if m > 0 {
            let mut f = vec![TruncatedPolynomial::zero(ring); n + 1];
            f[0] = TruncatedPolynomial::one(ring);
            if n >= 1 {
                f[1] = x.clone();
            }
            f
        } else {
            let minus = -&x;
            (0..=n).map(|k| minus.pow(k as u32)).collect()
        };
        for _ in 0..m.unsigned_abs() {
            total = mul(&total, &factor);
        }
    }
    Ok(total)
}

/// Power sum `s_m(E) = sum_L mult(L) c_1(L)^m`, computed directly and from
/// the Chern classes by Newton's identities; the two must agree.
pub fn newton_s(m: usize, e: &VirtualBundle, ring: &TheoryRing) -> Result<TruncatedPolynomial, ClassError> {
    let mut direct = TruncatedPolynomial::zero(ring);
    for (l, mult) in e.terms() {
        direct = &direct + &c1(ring, l)?.pow(m as u32).scale_int(mult);
    }
    let c = chern_classes(e, ring)?;
    let class = |i: usize| c.get(i).cloned().unwrap_or_else(|| TruncatedPolynomial::zero(ring));
    let mut s = vec![TruncatedPolynomial::from_int(ring, e.rank())];
    for k in 1..=m {
        let mut acc = class(k).scale_int(if k % 2 == 1 { k as i64 } else { -(k as i64) });
        for i in 1..k {
            let term = &class(i) * &s[k - i];
            acc = if i % 2 == 1 { &acc + &term } else { &acc - &term };
        }
        s.push(acc);
    }
    let newton = s.pop().expect("nonempty");
    if newton != direct {
        return Err(ClassError::NewtonMismatch { m, direct: direct.to_string(), newton: newton.to_string() });
    }
    Ok(direct)
}

/// `Phi^j`: the degree-`n` part scaled by `j^n`.
pub fn phi_grading(j: i64, a: &TruncatedPolynomial) -> Result<TruncatedPolynomial, ClassError> {
    require(a.ring(), Theory::Chow, "grading")?;
    let mut acc = TruncatedPolynomial::zero(a.ring());
    for n in 0..=a.ring().space().dim() {
        let scale = num_bigint::BigInt::from(j).pow(n as u32);
        acc = &acc + &a.degree_part(n).scale(&Coefficient::from_rational(scale.into(), a.ring().p()));
    }
    Ok(acc)
}
