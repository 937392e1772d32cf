//! Associated series, modified direct images and the verifiers of the
//! Riemann-Roch squares.
//!
//! A square for `phi: A -> B`, a morphism `f: Y -> X` and correction series
//! `S_A`, `S_B` is the identity `phi(f^{S_A}_* a) = f^{S_B}_*(phi(a))` with
//! `f^S_* a = f_*(S_x(-T_f) a)`. Every verifier checks it on the full
//! monomial basis of `A(Y)` unless a sample limit is given.

use std::collections::HashMap;
use std::rc::Rc;

use thiserror::Error;

use crate::classes::{
    bott_class_literal, multiplicative_extension, phi_grading, BasisImages, ClassError, Transformation,
    TransformationKind,
};
use crate::coeff::{integrality_profile, Coefficient, IntegralityVerdict};
use crate::model::{
    c1, normal_bundle, pullback, pushforward, relative_tangent, tangent_bundle, LineClass, ModelError, MorphismDesc,
    Space, Theory, TheoryRing, TruncatedPolynomial,
};
use crate::report::{IntegralityEntry, VerificationReport};
use crate::series::{builtin_series, BuiltinSeries, SeriesError, UnivariateSeries};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RrError {
    #[error("probe dimension must be at least 1, got {0}")]
    BadOrder(usize),
    #[error("could not solve for the associated series: {0}")]
    SolveFailure(String),
    #[error("correction series {0} is not invertible")]
    NonUnit(String),
    #[error("bad parameter: {0}")]
    BadParam(String),
    #[error("one-sided and two-sided modified pushforwards differ: {one_sided} vs {two_sided}")]
    Mismatch { one_sided: String, two_sided: String },
    #[error(transparent)]
    Class(#[from] ClassError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Series(#[from] SeriesError),
}

/// The series `S` with `phi(x) = S(xbar) xbar`, where `x` and `xbar` are the
/// first Chern classes of `O(-1)` on `P^d` in the source and target theory.
/// Returned to order `d - 1`.
pub fn associated_series(phi: &Transformation, d: usize) -> Result<UnivariateSeries, RrError> {
    if d == 0 {
        return Err(RrError::BadOrder(d));
    }
    let space = Space::projective(d as u32);
    let src = TheoryRing::new(space.clone(), phi.source(), phi.p());
    let tgt = phi.target_ring(&src);
    let tautological = LineClass(vec![-1]);
    let image = phi.apply(&c1(&src, &tautological)?)?.to_series()?;
    // xbar = -y * unit, so y is a series in xbar
    let y_of_xbar = c1(&tgt, &tautological)?.to_series()?.reversion()?;
    let in_xbar = image.compose(&y_of_xbar)?;
    in_xbar.divide_by_t().map_err(|e| RrError::SolveFailure(format!("{phi}: {e}")))
}

/// `S_x(-T_f)` on the source of `f`, in `ring`.
pub fn correction_class(
    s: &UnivariateSeries,
    f: &MorphismDesc,
    ring: &TheoryRing,
) -> Result<TruncatedPolynomial, RrError> {
    Ok(multiplicative_extension(s, &relative_tangent(f).neg(), ring)?)
}

fn fit(s: &UnivariateSeries, f: &MorphismDesc) -> Result<UnivariateSeries, RrError> {
    let needed = f.source().dim().max(f.target().dim());
    if s.order() < needed {
        return Err(ModelError::SeriesTooShort { order: s.order(), needed }.into());
    }
    if !s.coeff(0).is_unit() {
        return Err(RrError::NonUnit(s.to_string()));
    }
    Ok(s.truncate(needed))
}

/// `f^S_* a = f_*(S_x(-T_f) a)`, checked against the two-sided form
/// `S_x(T_X) f_*(S_x(T_Y)^{-1} a)`.
pub fn modified_pushforward(
    s: &UnivariateSeries,
    f: &MorphismDesc,
    a: &TruncatedPolynomial,
) -> Result<TruncatedPolynomial, RrError> {
    let ring = a.ring();
    let s = fit(s, f)?;
    let one_sided = pushforward(f, &(&correction_class(&s, f, ring)? * a))?;
    let target_ring = ring.with_space(f.target().clone());
    let on_y = multiplicative_extension(&s, &tangent_bundle(f.source()), ring)?.invert()?;
    let on_x = multiplicative_extension(&s, &tangent_bundle(f.target()), &target_ring)?;
    let two_sided = &on_x * &pushforward(f, &(&on_y * a))?;
    if one_sided != two_sided {
        return Err(RrError::Mismatch { one_sided: one_sided.to_string(), two_sided: two_sided.to_string() });
    }
    Ok(one_sided)
}

/// The series a verifier expects for `phi`, from its closed form.
fn closed_form_series(phi: &Transformation, order: usize) -> Result<Option<UnivariateSeries>, RrError> {
    let s = match phi.kind() {
        TransformationKind::Adams(0) => UnivariateSeries::zero(order, 1),
        TransformationKind::Adams(j) => builtin_series(BuiltinSeries::Bj(*j), order, 1)?,
        TransformationKind::ChernCharacter => builtin_series(BuiltinSeries::T, order, 1)?,
        TransformationKind::TwistedChernCharacter(p) => builtin_series(BuiltinSeries::TwistedT, order, *p)?,
        TransformationKind::Identity => UnivariateSeries::one(order, 1),
        TransformationKind::Grading(j) => UnivariateSeries::constant(Coefficient::from_int(*j, 1), order),
        TransformationKind::AdditiveExt(_) | TransformationKind::MultiplicativeExt(_) => return Ok(None),
    };
    Ok(Some(s))
}

fn take_samples(ring: &TheoryRing, samples: Option<usize>) -> Vec<TruncatedPolynomial> {
    let basis = ring.basis();
    match samples {
        Some(n) => basis.into_iter().take(n).collect(),
        None => basis,
    }
}

#[cfg(feature = "parallel")]
fn map_cases<T: Sync, R: Send>(items: &[T], f: impl Fn(&T) -> R + Sync + Send) -> Vec<R> {
    use rayon::prelude::*;
    items.par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
fn map_cases<T: Sync, R: Send>(items: &[T], f: impl Fn(&T) -> R + Sync + Send) -> Vec<R> {
    items.iter().map(f).collect()
}

type CaseResult = Result<(String, TruncatedPolynomial, TruncatedPolynomial), RrError>;

fn push_cases(report: &mut VerificationReport, group: Option<&str>, results: Vec<CaseResult>) -> Result<(), RrError> {
    for r in results {
        let (input, lhs, rhs) = r?;
        push_eq(report, group, input, &lhs, &rhs)?;
    }
    Ok(())
}

fn push_eq(
    report: &mut VerificationReport,
    group: Option<&str>,
    input: impl std::fmt::Display,
    lhs: &TruncatedPolynomial,
    rhs: &TruncatedPolynomial,
) -> Result<(), RrError> {
    let residual = lhs.checked_sub(rhs)?;
    report.push(group, input, lhs, rhs, &residual, residual.is_zero());
    Ok(())
}

fn push_series(
    report: &mut VerificationReport,
    group: &str,
    input: &str,
    got: &UnivariateSeries,
    want: &UnivariateSeries,
) {
    let residual = got.sub(want);
    report.push(Some(group), input, got, want, &residual, residual.is_zero());
}

/// Checks `phi(f_*(c_src a)) = f_*(c_tgt phi(a))` on samples of the source.
struct Square<'a> {
    f: &'a MorphismDesc,
    on_source: &'a BasisImages,
    on_target: &'a BasisImages,
    corr_src: Option<&'a TruncatedPolynomial>,
    corr_tgt: Option<&'a TruncatedPolynomial>,
}

impl Square<'_> {
    fn run(&self, report: &mut VerificationReport, group: Option<&str>, samples: Option<usize>) -> Result<(), RrError> {
        let inputs = take_samples(self.on_source.source(), samples);
        let results = map_cases(&inputs, |a| -> CaseResult {
            let twisted = match self.corr_src {
                Some(c) => c * a,
                None => a.clone(),
            };
            let lhs = self.on_target.apply(&pushforward(self.f, &twisted)?)?;
            let image = self.on_source.apply(a)?;
            let twisted = match self.corr_tgt {
                Some(c) => c * &image,
                None => image,
            };
            let rhs = pushforward(self.f, &twisted)?;
            Ok((format!("{}: a = {a}", self.f), lhs, rhs))
        });
        push_cases(report, group, results)
    }
}

/// Reusable state for one transformation: associated series by order and
/// basis images by space.
pub struct Verifier {
    phi: Transformation,
    series: HashMap<usize, UnivariateSeries>,
    images: HashMap<Space, BasisImages>,
    tangent: HashMap<Space, (TruncatedPolynomial, TruncatedPolynomial)>,
}

impl Verifier {
    pub fn new(phi: Transformation) -> Self {
        Verifier { phi, series: HashMap::new(), images: HashMap::new(), tangent: HashMap::new() }
    }

    pub fn phi(&self) -> &Transformation {
        &self.phi
    }

    /// Associated series to order `order` (probing `P^{order+1}`).
    pub fn series(&mut self, order: usize) -> Result<UnivariateSeries, RrError> {
        if let Some(s) = self.series.get(&order) {
            return Ok(s.clone());
        }
        let s = associated_series(&self.phi, order + 1)?;
        self.series.insert(order, s.clone());
        Ok(s)
    }

    fn source_ring(&self, space: &Space) -> TheoryRing {
        TheoryRing::new(space.clone(), self.phi.source(), 1)
    }

    fn images(&mut self, space: &Space) -> Result<&BasisImages, RrError> {
        if !self.images.contains_key(space) {
            let images = self.phi.basis_images(&self.source_ring(space))?;
            self.images.insert(space.clone(), images);
        }
        Ok(&self.images[space])
    }

    /// `S_x(T_X)` and its inverse on `ring`, cached per space; they only
    /// depend on `s` below the dimension of the space.
    fn tangent_class(
        &mut self,
        s: &UnivariateSeries,
        ring: &TheoryRing,
    ) -> Result<&(TruncatedPolynomial, TruncatedPolynomial), RrError> {
        let space = ring.space();
        if !self.tangent.contains_key(space) {
            let fwd = multiplicative_extension(s, &tangent_bundle(space), ring)?;
            let inv = fwd.invert()?;
            self.tangent.insert(space.clone(), (fwd, inv));
        }
        Ok(&self.tangent[space])
    }

    fn series_cases(&mut self, report: &mut VerificationReport, order: usize) -> Result<UnivariateSeries, RrError> {
        let s = self.series(order)?;
        if let Some(want) = closed_form_series(&self.phi, order)? {
            push_series(report, "series", &format!("associated series of {}", self.phi), &s, &want);
        }
        Ok(s)
    }

    /// `phi(i_* a) = i_*(S_x(N_i) phi(a))`. No series is inverted.
    pub fn immersion(&mut self, i: &MorphismDesc, samples: Option<usize>) -> Result<VerificationReport, RrError> {
        let n = normal_bundle(i)?;
        let z = i.source().clone();
        let x = i.target().clone();
        let mut report =
            VerificationReport::new("immersion-rr").param("phi", &self.phi).param("morphism", i).param("normal", &n);
        let s = self.series_cases(&mut report, z.dim())?;
        report = report.param("S", &s);
        self.images(&x)?;
        self.images(&z)?;
        let on_target = &self.images[&x];
        let on_source = &self.images[&z];
        let correction = multiplicative_extension(&s, &n, on_source.target())?;
        let square = Square { f: i, on_source, on_target, corr_src: None, corr_tgt: Some(&correction) };
        square.run(&mut report, None, samples)?;

        if let TransformationKind::Adams(j) = self.phi.kind() {
            if *j != 0 {
                let literal = bott_class_literal(*j, &n.dual(), on_source.target())?;
                push_eq(&mut report, Some("theta"), format!("S_x(N) = theta^{j}(N*) on {z}"), &correction, &literal)?;
            }
        }
        Ok(report)
    }

    /// `phi(f_* a) = f_*(S_x(-T_f) phi(a))` for an invertible associated series.
    pub fn projective(&mut self, f: &MorphismDesc, samples: Option<usize>) -> Result<VerificationReport, RrError> {
        if let TransformationKind::Adams(0) = self.phi.kind() {
            return Err(RrError::BadParam("psi^0 has a non-invertible associated series".into()));
        }
        let y = f.source().clone();
        let x = f.target().clone();
        let mut report = VerificationReport::new("projective-rr").param("phi", &self.phi).param("morphism", f);
        let s = self.series_cases(&mut report, y.dim().max(x.dim()))?;
        if !s.coeff(0).is_unit() {
            return Err(RrError::NonUnit(s.to_string()));
        }
        report = report.param("S", &s);

        // relative tangent from the Euler sequences of source and target
        let euler = tangent_bundle(&y).difference(&tangent_bundle(&x).pullback(f));
        let stored = relative_tangent(f);
        let diff = euler.difference(&stored);
        report.push(Some("tangent"), format!("T_Y - f^*T_X for {f}"), &euler, &stored, &diff, diff.is_empty());

        self.images(&x)?;
        self.images(&y)?;
        let ring_y = self.images[&y].target().clone();
        let correction = multiplicative_extension(&s, &euler.neg(), &ring_y)?;

        let ring_x = ring_y.with_space(x.clone());
        let on_y = self.tangent_class(&s, &ring_y)?.1.clone();
        let on_x = pullback(f, &self.tangent_class(&s, &ring_x)?.0)?;
        let two_sided = &on_y * &on_x;
        let on_target = &self.images[&x];
        let on_source = &self.images[&y];
        push_eq(&mut report, Some("two-sided"), "S_x(-T_f) = S_x(T_Y)^-1 f^*S_x(T_X)", &correction, &two_sided)?;

        match self.phi.kind() {
            TransformationKind::Adams(j) => {
                let j = *j;
                let omega = euler.dual();
                let classical = bott_class_literal(j, &omega, &ring_y)?.invert()?;
                push_eq(
                    &mut report,
                    Some("classical"),
                    format!("theta^{j}(Omega_f)^-1 on {y}"),
                    &correction,
                    &classical,
                )?;
                let mut worst = IntegralityVerdict::Integer;
                for (_, c) in correction.terms() {
                    let profile = integrality_profile(c, j);
                    worst = worst.max(profile.verdict);
                    report.integrality.push(IntegralityEntry {
                        coeff: c.to_string(),
                        verdict: profile.verdict,
                        denominator: profile.denominator.to_string(),
                    });
                }
                let ok = worst != IntegralityVerdict::Rational;
                report.push(
                    Some("integrality"),
                    format!("correction coefficients in Z[1/{j}]"),
                    worst,
                    "J_LOCAL",
                    if ok { "0" } else { "RATIONAL" },
                    ok,
                );
            }
            TransformationKind::ChernCharacter => {
                let todd = builtin_series(BuiltinSeries::Todd, y.dim(), 1)?;
                let via_todd = multiplicative_extension(&todd, &euler, &ring_y)?;
                push_eq(&mut report, Some("todd"), format!("T_x(-T_f) = Td(T_f) on {y}"), &correction, &via_todd)?;
            }
            _ => {}
        }

        let square = Square { f, on_source, on_target, corr_src: None, corr_tgt: Some(&correction) };
        square.run(&mut report, None, samples)?;
        Ok(report)
    }
}

pub fn verify_immersion_rr(
    phi: &Transformation,
    i: &MorphismDesc,
    samples: Option<usize>,
) -> Result<VerificationReport, RrError> {
    Verifier::new(phi.clone()).immersion(i, samples)
}

pub fn verify_projective_rr(
    phi: &Transformation,
    f: &MorphismDesc,
    samples: Option<usize>,
) -> Result<VerificationReport, RrError> {
    Verifier::new(phi.clone()).projective(f, samples)
}

fn corrections(series: BuiltinSeries, f: &MorphismDesc, theory: Theory) -> Result<TruncatedPolynomial, RrError> {
    let ring = TheoryRing::new(f.source().clone(), theory, 1);
    let s = builtin_series(series, f.source().dim(), 1)?;
    correction_class(&s, f, &ring)
}

/// The five faces of the cube for `psi^j`, `ch` and `Phi^j` on every
/// projection from and linear immersion into `space`:
/// (1) `ch psi^j = Phi^j ch`, (2) top: Adams-RR with `B^j`, (3) back: GRR
/// with `T`, (4) front: `ch` from `(K, B^j)` to `(CH, S^j)`, (5) bottom:
/// `Phi^j` from `(CH, T)` to `(CH, S^j)`.
pub fn verify_cube(space: &Space, j: i64, samples: Option<usize>) -> Result<VerificationReport, RrError> {
    if j == 0 {
        return Err(RrError::BadParam("the cube needs j != 0".into()));
    }
    let mut report = VerificationReport::new("cube").param("space", space).param("j", j);
    let adams = Transformation::adams(j);
    let ch = Transformation::chern_character();
    let grading = Transformation::grading(j);
    let mut cache: HashMap<(Space, u8), Rc<BasisImages>> = HashMap::new();
    let mut images = |space: &Space, which: u8| -> Result<Rc<BasisImages>, RrError> {
        if let Some(b) = cache.get(&(space.clone(), which)) {
            return Ok(b.clone());
        }
        let (phi, theory) = match which {
            0 => (&adams, Theory::K),
            1 => (&ch, Theory::K),
            _ => (&grading, Theory::Chow),
        };
        let b = Rc::new(phi.basis_images(&TheoryRing::new(space.clone(), theory, 1))?);
        cache.insert((space.clone(), which), b.clone());
        Ok(b)
    };

    let k_ring = TheoryRing::k(space.clone());
    let ch_x = images(space, 1)?;
    let psi_x = images(space, 0)?;
    let phi_x = images(space, 2)?;
    for b in take_samples(&k_ring, samples) {
        let lhs = ch_x.apply(&psi_x.apply(&b)?)?;
        let ch_b = ch_x.apply(&b)?;
        let rhs = phi_x.apply(&ch_b)?;
        push_eq(&mut report, Some("1-ch-adams"), format!("a = {b}"), &lhs, &rhs)?;
        for n in 0..=space.dim() {
            let scale = Coefficient::from_rational(num_bigint::BigInt::from(j).pow(n as u32).into(), 1);
            let graded = ch_b.degree_part(n).scale(&scale);
            push_eq(&mut report, Some("1-ch-adams-graded"), format!("ch_{n}, a = {b}"), &lhs.degree_part(n), &graded)?;
        }
        push_eq(
            &mut report,
            Some("1-grading"),
            format!("Phi^{j} vs degree scaling, ch(a) for a = {b}"),
            &rhs,
            &phi_grading(j, &ch_b)?,
        )?;
    }

    for f in MorphismDesc::all_on(space) {
        let (y, x) = (f.source().clone(), f.target().clone());
        let b_k = corrections(BuiltinSeries::Bj(j), &f, Theory::K)?;
        let t_ch = corrections(BuiltinSeries::T, &f, Theory::Chow)?;
        let s_ch = corrections(BuiltinSeries::Sj(j), &f, Theory::Chow)?;
        let (psi_y, psi_x) = (images(&y, 0)?, images(&x, 0)?);
        let (ch_y, ch_x) = (images(&y, 1)?, images(&x, 1)?);
        let (phi_y, phi_x) = (images(&y, 2)?, images(&x, 2)?);
        let faces = [
            ("2-top", &*psi_y, &*psi_x, None, &b_k),
            ("3-back", &*ch_y, &*ch_x, None, &t_ch),
            ("4-front", &*ch_y, &*ch_x, Some(&b_k), &s_ch),
            ("5-bottom", &*phi_y, &*phi_x, Some(&t_ch), &s_ch),
        ];
        for (group, on_source, on_target, corr_src, corr_tgt) in faces {
            let square = Square { f: &f, on_source, on_target, corr_src, corr_tgt: Some(corr_tgt) };
            square.run(&mut report, Some(group), samples)?;
        }
    }
    Ok(report)
}

/// The additive extension of `1/(1-t)` into `K` is the identity, has
/// associated series 1, and commutes with every pushforward as is.
pub fn verify_unique_k_morphism(space: &Space) -> Result<VerificationReport, RrError> {
    let phi =
        Transformation::additive_ext(crate::classes::ExtSeries::Builtin(BuiltinSeries::OneMinusTPow(1)), Theory::K, 1);
    let mut report = VerificationReport::new("unique-k").param("space", space).param("phi", &phi);
    let ring = TheoryRing::k(space.clone());
    for b in ring.basis() {
        push_eq(&mut report, Some("identity"), format!("a = {b}"), &phi.apply(&b)?, &b)?;
    }
    for e in space.basis() {
        let l = LineClass(e.iter().map(|&x| -(x as i64)).collect());
        let line = crate::model::line_element(&ring, &l)?;
        push_eq(&mut report, Some("lines"), format!("[{l}]"), &phi.apply(&line)?, &line)?;
    }
    let order = space.dim();
    let s = associated_series(&phi, order + 1)?;
    push_series(&mut report, "series", "associated series", &s, &UnivariateSeries::one(order, 1));
    let mut verifier = Verifier::new(phi);
    for f in MorphismDesc::all_on(space) {
        verifier.images(f.source())?;
        verifier.images(f.target())?;
        let square = Square {
            f: &f,
            on_source: &verifier.images[f.source()],
            on_target: &verifier.images[f.target()],
            corr_src: None,
            corr_tgt: None,
        };
        square.run(&mut report, Some("pushforward"), None)?;
    }
    Ok(report)
}

/// `chi(P^d, O(n))` by the `K` pushforward to the point.
pub fn euler_characteristic(d: u32, n: i64) -> Result<Coefficient, RrError> {
    let ring = TheoryRing::k(Space::projective(d));
    let pi = MorphismDesc::projection(ring.space().clone(), &[0])?;
    let chi = pushforward(&pi, &crate::model::line_element(&ring, &LineClass(vec![n]))?)?;
    Ok(chi.constant_term().clone())
}

/// `chi(P^d, O(n)) = pi_*(Td(T) ch(O(n)))` in the Chow ring.
pub fn euler_characteristic_grr(d: u32, n: i64) -> Result<Coefficient, RrError> {
    let space = Space::projective(d);
    let ring = TheoryRing::chow(space.clone());
    let pi = MorphismDesc::projection(space.clone(), &[0])?;
    let todd = builtin_series(BuiltinSeries::Todd, d as usize, 1)?;
    let td = multiplicative_extension(&todd, &tangent_bundle(&space), &ring)?;
    let k = TheoryRing::k(space);
    let ch = Transformation::chern_character().apply(&crate::model::line_element(&k, &LineClass(vec![n]))?)?;
    Ok(pushforward(&pi, &(&td * &ch))?.constant_term().clone())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn int_series(values: &[i64]) -> UnivariateSeries {
        UnivariateSeries::from_ints(values, 1)
    }

    fn ratio(a: i64, b: i64) -> Coefficient {
        Coefficient::from_ratio(a, b, 1)
    }

    #[test]
    fn associated_series_examples() {
        let s = associated_series(&Transformation::adams(2), 4).unwrap();
        assert_eq!(s, int_series(&[2, -1, 0, 0]));
        assert_eq!(s.to_string(), "2 - t");
        assert_eq!(associated_series(&Transformation::identity(Theory::K), 4).unwrap(), UnivariateSeries::one(3, 1));
        let ch = associated_series(&Transformation::chern_character(), 4).unwrap();
        let expected = [ratio(1, 1), ratio(-1, 2), ratio(1, 6), ratio(-1, 24)];
        assert_eq!(ch.coeffs(), &expected);
        let tw = associated_series(&Transformation::twisted_chern_character(3).unwrap(), 3).unwrap();
        assert_eq!(tw.to_string(), "e - 1/2*e^2*t");
        assert!(matches!(associated_series(&Transformation::adams(2), 0), Err(RrError::BadOrder(0))));
    }

    #[test]
    fn associated_series_is_independent_of_probe_dimension() {
        let phis = [
            Transformation::adams(3),
            Transformation::adams(-2),
            Transformation::chern_character(),
            Transformation::twisted_chern_character(3).unwrap(),
            Transformation::grading(2),
            Transformation::identity(Theory::Chow),
        ];
        for phi in &phis {
            for d in 1..6 {
                let small = associated_series(phi, d).unwrap();
                let big = associated_series(phi, d + 1).unwrap();
                assert_eq!(big.truncate(d - 1), small, "{phi} d={d}");
            }
        }
    }

    #[test]
    fn associated_series_of_adams_is_bott_series() {
        for j in (-3..=5).filter(|&j| j != 0) {
            let s = associated_series(&Transformation::adams(j), 7).unwrap();
            assert_eq!(s, builtin_series(BuiltinSeries::Bj(j), 6, 1).unwrap());
        }
    }

    #[test]
    fn modified_pushforward_examples() {
        let p1 = Space::projective(1);
        let pi = MorphismDesc::projection(p1.clone(), &[0]).unwrap();
        let t = builtin_series(BuiltinSeries::T, 1, 1).unwrap();
        let one = TruncatedPolynomial::one(&TheoryRing::chow(p1.clone()));
        let chi = modified_pushforward(&t, &pi, &one).unwrap();
        assert_eq!(chi, TruncatedPolynomial::one(&TheoryRing::chow(Space::point())));

        let ring = TheoryRing::k(Space::new(vec![2, 1]));
        for f in MorphismDesc::all_on(ring.space()) {
            let ring = ring.with_space(f.source().clone());
            let a = &TruncatedPolynomial::variable(&ring, 0) + &TruncatedPolynomial::from_int(&ring, 3);
            let plain = pushforward(&f, &a).unwrap();
            assert_eq!(modified_pushforward(&UnivariateSeries::one(3, 1), &f, &a).unwrap(), plain);
        }

        let b2 = builtin_series(BuiltinSeries::Bj(2), 1, 1).unwrap();
        let one_k = TruncatedPolynomial::one(&TheoryRing::k(p1));
        assert_eq!(
            modified_pushforward(&b2, &pi, &one_k).unwrap(),
            TruncatedPolynomial::one(&TheoryRing::k(Space::point()))
        );

        let not_unit = UnivariateSeries::variable(2, 1);
        assert!(matches!(modified_pushforward(&not_unit, &pi, &one_k), Err(RrError::NonUnit(_))));
    }

    #[test]
    fn modified_pushforwards_are_functorial_and_satisfy_projection_formula() {
        let s = builtin_series(BuiltinSeries::Bj(3), 5, 1).unwrap();
        let space = Space::new(vec![2, 1, 2]);
        let ring = TheoryRing::k(space.clone());
        let first = MorphismDesc::projection(space.clone(), &[1]).unwrap();
        let second = MorphismDesc::projection(first.target().clone(), &[0]).unwrap();
        let both = MorphismDesc::projection(space.clone(), &[0, 1]).unwrap();
        for a in ring.basis() {
            let step = modified_pushforward(&s, &second, &modified_pushforward(&s, &first, &a).unwrap()).unwrap();
            assert_eq!(step, modified_pushforward(&s, &both, &a).unwrap());
        }
        let big = Space::projective(5);
        let outer = MorphismDesc::linear_immersion(big.clone(), 0, 2).unwrap();
        let inner = MorphismDesc::linear_immersion(outer.source().clone(), 0, 1).unwrap();
        let direct = MorphismDesc::linear_immersion(big, 0, 3).unwrap();
        for a in TheoryRing::k(direct.source().clone()).basis() {
            let step = modified_pushforward(&s, &outer, &modified_pushforward(&s, &inner, &a).unwrap()).unwrap();
            assert_eq!(step, modified_pushforward(&s, &direct, &a).unwrap());
        }
        for f in MorphismDesc::all_on(&Space::new(vec![2, 1])) {
            let src = TheoryRing::k(f.source().clone());
            let tgt = TheoryRing::k(f.target().clone());
            for a in src.basis() {
                for b in tgt.basis() {
                    let lhs = modified_pushforward(&s, &f, &(&pullback(&f, &b).unwrap() * &a)).unwrap();
                    let rhs = &b * &modified_pushforward(&s, &f, &a).unwrap();
                    assert_eq!(lhs, rhs, "{f}");
                }
            }
        }
    }

    #[test]
    fn immersion_examples() {
        let line = MorphismDesc::linear_immersion(Space::projective(2), 0, 1).unwrap();
        let r = verify_immersion_rr(&Transformation::adams(2), &line, None).unwrap();
        assert!(r.pass, "{r}");
        let first = &r.cases.iter().find(|c| c.group.is_none()).unwrap();
        assert_eq!(first.lhs, "2 * y - y^2");
        assert_eq!(first.rhs, "2 * y - y^2");
        assert!(verify_immersion_rr(&Transformation::chern_character(), &line, None).unwrap().pass);
        assert!(verify_immersion_rr(&Transformation::identity(Theory::K), &line, None).unwrap().pass);
        for p in [2, 3] {
            let phi = Transformation::twisted_chern_character(p).unwrap();
            assert!(verify_immersion_rr(&phi, &line, None).unwrap().pass);
        }
        let pi = MorphismDesc::projection(Space::projective(2), &[0]).unwrap();
        assert!(verify_immersion_rr(&Transformation::adams(2), &pi, None).is_err());
    }

    #[test]
    fn projective_examples() {
        let pi2 = MorphismDesc::projection(Space::projective(2), &[0]).unwrap();
        let r = verify_projective_rr(&Transformation::chern_character(), &pi2, None).unwrap();
        assert!(r.pass, "{r}");

        let pi1 = MorphismDesc::projection(Space::projective(1), &[0]).unwrap();
        let r = verify_projective_rr(&Transformation::adams(2), &pi1, None).unwrap();
        assert!(r.pass, "{r}");
        assert!(r.integrality.iter().any(|e| e.verdict == IntegralityVerdict::JLocal));
        assert!(r.integrality.iter().all(|e| e.verdict != IntegralityVerdict::Rational));

        let line = MorphismDesc::linear_immersion(Space::projective(2), 0, 1).unwrap();
        let proj = verify_projective_rr(&Transformation::adams(3), &line, None).unwrap();
        let imm = verify_immersion_rr(&Transformation::adams(3), &line, None).unwrap();
        assert!(proj.pass && imm.pass);
        let main = |r: &VerificationReport| -> Vec<(String, String)> {
            r.cases.iter().filter(|c| c.group.is_none()).map(|c| (c.lhs.clone(), c.rhs.clone())).collect()
        };
        assert_eq!(main(&proj), main(&imm));

        assert!(matches!(
            verify_projective_rr(&Transformation::twisted_chern_character(2).unwrap(), &pi1, None),
            Err(RrError::NonUnit(_))
        ));
        assert!(matches!(verify_projective_rr(&Transformation::adams(0), &pi1, None), Err(RrError::BadParam(_))));
    }

    #[test]
    fn hirzebruch_example() {
        assert_eq!(euler_characteristic(2, 3).unwrap(), Coefficient::from_int(10, 1));
        assert_eq!(euler_characteristic_grr(2, 3).unwrap(), Coefficient::from_int(10, 1));
    }

    #[test]
    fn cube_examples() {
        let r = verify_cube(&Space::projective(2), 2, None).unwrap();
        assert!(r.pass, "{r}");
        for face in ["1-ch-adams", "2-top", "3-back", "4-front", "5-bottom"] {
            assert!(r.cases.iter().any(|c| c.group.as_deref() == Some(face)), "{face}");
        }
        assert!(verify_cube(&Space::projective(2), 1, None).unwrap().pass);
        assert!(verify_cube(&Space::new(vec![1, 1]), 3, None).unwrap().pass);
        assert!(verify_cube(&Space::projective(2), 0, None).is_err());
    }

    #[test]
    fn unique_k_examples() {
        for d in 0..=2 {
            let r = verify_unique_k_morphism(&Space::projective(d)).unwrap();
            assert!(r.pass, "{r}");
        }
        assert!(verify_unique_k_morphism(&Space::point()).unwrap().pass);
    }

    #[test]
    fn broken_corrections_are_reported() {
        // the square with the wrong correction must fail with a nonzero residual
        let pi = MorphismDesc::projection(Space::projective(2), &[0]).unwrap();
        let phi = Transformation::adams(2);
        let mut v = Verifier::new(phi.clone());
        let on_source = phi.basis_images(&TheoryRing::k(Space::projective(2))).unwrap();
        let on_target = phi.basis_images(&TheoryRing::k(Space::point())).unwrap();
        let wrong = corrections(BuiltinSeries::Bj(3), &pi, Theory::K).unwrap();
        let mut r = VerificationReport::new("wrong");
        Square { f: &pi, on_source: &on_source, on_target: &on_target, corr_src: None, corr_tgt: Some(&wrong) }
            .run(&mut r, None, None)
            .unwrap();
        assert!(!r.pass);
        assert!(v.projective(&pi, None).unwrap().pass);
    }
}
