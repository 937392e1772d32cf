//! Acceptance suite: one PASS/FAIL line per criterion, exact equality only.
//!
//! Expected values come from closed-form oracles written here with plain
//! integer arithmetic, independent of the library's series code.

use std::process::ExitCode;
use std::time::Instant;

use num_rational::BigRational;
use num_traits::Zero;

use oriented_rr::classes::{adams, multiplicative_extension, newton_s, Transformation};
use oriented_rr::cli::run_cli;
use oriented_rr::coeff::{Coefficient, IntegralityVerdict};
use oriented_rr::model::{
    from_lines, pullback, pushforward, LineClass, LineCombination, MorphismDesc, Space, Theory, TheoryRing,
    TruncatedPolynomial, VirtualBundle,
};
use oriented_rr::report::VerificationReport;
use oriented_rr::rr::{
    associated_series, euler_characteristic, euler_characteristic_grr, verify_cube, verify_unique_k_morphism, Verifier,
};
use oriented_rr::series::{
    builtin_series, check_group_law, check_multiplicativity, BivariateSeries, BuiltinSeries, GroupLaw, UnivariateSeries,
};

type Outcome = Result<String, String>;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn passed(r: &VerificationReport) -> Result<(), String> {
    ensure(r.pass, || r.render_text())
}

fn binom(n: i64, k: i64) -> i128 {
    // C(n, k) for integer n, k >= 0
    let mut num: i128 = 1;
    let mut den: i128 = 1;
    for i in 0..k {
        num *= (n - i) as i128;
        den *= (i + 1) as i128;
    }
    num / den
}

fn factorial(n: i64) -> i128 {
    (1..=n as i128).product()
}

fn int(n: i128) -> Coefficient {
    Coefficient::from_int(n as i64, 1)
}

fn chi_oracle(d: i64, n: i64) -> i128 {
    if n >= 0 {
        binom(n + d, d)
    } else if n >= -d {
        0
    } else {
        let sign = if d % 2 == 0 { 1 } else { -1 };
        sign * binom(-n - 1, d)
    }
}

fn group_laws() -> Outcome {
    for law in [BivariateSeries::additive(8, 1), BivariateSeries::multiplicative(8, 1)] {
        let r = check_group_law(&law);
        passed(&r)?;
        ensure(r.cases.len() == 4, || format!("expected four axioms, got {}", r.cases.len()))?;
    }
    let bad = BivariateSeries::from_int_terms(8, 1, &[((1, 0), 1), ((0, 1), 1), ((1, 2), 1)]);
    let r = check_group_law(&bad);
    let assoc = r.cases.iter().find(|c| c.input.starts_with("(c)")).ok_or("no associativity case")?;
    ensure(!assoc.pass && assoc.residual != "0", || format!("u+v+uv^2 passed associativity: {}", r.render_text()))?;
    Ok("additive and multiplicative laws at D=8; u+v+uv^2 fails (c)".into())
}

fn multiplicativity() -> Outcome {
    let mult = GroupLaw::multiplicative(8);
    let add = GroupLaw::additive(8);
    for j in (-3..=5).filter(|&j| j != 0) {
        passed(&check_multiplicativity(&builtin_series(BuiltinSeries::OneMinusTPow(j), 8, 1).unwrap(), &mult))?;
    }
    passed(&check_multiplicativity(&builtin_series(BuiltinSeries::Exp, 8, 1).unwrap(), &add))?;
    for p in [2, 3, 5] {
        passed(&check_multiplicativity(&builtin_series(BuiltinSeries::ExpEps, 8, p).unwrap(), &add))?;
    }
    let r = check_multiplicativity(&UnivariateSeries::from_ints(&[1, 1, 0, 0, 0, 0, 0, 0, 0], 1), &mult);
    ensure(!r.pass, || "1+t passed under the multiplicative law".into())?;
    Ok("(1-t)^-j for j in -3..5, exp, exp_e for p in {2,3,5}; 1+t rejected".into())
}

fn associated() -> Outcome {
    for j in 2..=5i64 {
        let d = j as usize + 2;
        let s = associated_series(&Transformation::adams(j), d).map_err(|e| e.to_string())?;
        let want: Vec<Coefficient> =
            (0..d as i64).map(|n| int(if n % 2 == 0 { 1 } else { -1 } * binom(j, n + 1))).collect();
        ensure(s.coeffs() == want.as_slice(), || format!("psi^{j}: got {s}"))?;
    }
    let s = associated_series(&Transformation::chern_character(), 7).map_err(|e| e.to_string())?;
    let want: Vec<Coefficient> =
        (0..=6).map(|n| Coefficient::from_ratio(if n % 2 == 0 { 1 } else { -1 }, factorial(n + 1) as i64, 1)).collect();
    ensure(s.coeffs() == want.as_slice(), || format!("ch: got {s}"))?;
    let s = associated_series(&Transformation::identity(Theory::K), 6).map_err(|e| e.to_string())?;
    ensure(s == UnivariateSeries::one(5, 1), || format!("id: got {s}"))?;
    for p in [3usize, 5] {
        let phi = Transformation::twisted_chern_character(p).unwrap();
        let s = associated_series(&phi, 6).map_err(|e| e.to_string())?;
        for n in 0..=5usize {
            let mut parts = vec![BigRational::zero(); p];
            if n + 1 < p {
                let sign = if n % 2 == 0 { 1 } else { -1 };
                parts[n + 1] = BigRational::new(sign.into(), factorial(n as i64 + 1).into());
            }
            let want = Coefficient::from_parts(parts).unwrap();
            ensure(s.coeff(n) == &want, || format!("ch_e p={p}: coefficient {n} of {s}"))?;
        }
        ensure(s.to_string().starts_with("e - 1/2*e^2*t"), || format!("ch_e p={p}: {s}"))?;
    }
    Ok("B^j for j=2..5, (1-e^-t)/t to order 6, S=1 for id, twisted for p in {3,5}".into())
}

fn hirzebruch() -> Outcome {
    let mut count = 0;
    for d in 0..=6i64 {
        for n in (-d - 3)..=6 {
            let want = int(chi_oracle(d, n));
            let direct = euler_characteristic(d as u32, n).map_err(|e| e.to_string())?;
            let grr = euler_characteristic_grr(d as u32, n).map_err(|e| e.to_string())?;
            ensure(direct == want, || format!("chi(P^{d}, O({n})) = {direct}, oracle {want}"))?;
            ensure(grr == want, || format!("GRR chi(P^{d}, O({n})) = {grr}, oracle {want}"))?;
            count += 1;
        }
    }
    let mut out = Vec::new();
    let mut err = Vec::new();
    let code = run_cli(["rrcheck", "table", "chi", "--d", "6", "--n-min", "-9", "--n-max", "6"], &mut out, &mut err);
    ensure(code == 0, || format!("table chi exited {code}: {}", String::from_utf8_lossy(&err)))?;
    Ok(format!("{count} values for d <= 6, both routes and the CLI table"))
}

fn theorem_main() -> Outcome {
    let mut phis: Vec<Transformation> = (-3..=5).filter(|&j| j != 0).map(Transformation::adams).collect();
    for p in [2, 3, 5] {
        phis.push(Transformation::twisted_chern_character(p).unwrap());
    }
    let mut cases = 0;
    for phi in phis {
        let theta_expected = matches!(phi.kind(), oriented_rr::classes::TransformationKind::Adams(_));
        let mut verifier = Verifier::new(phi.clone());
        for d in 1..=5u32 {
            for c in 0..=d {
                let i = MorphismDesc::linear_immersion(Space::projective(d), 0, c).unwrap();
                let r = verifier.immersion(&i, None).map_err(|e| format!("{phi} {i}: {e}"))?;
                passed(&r)?;
                let has_theta = r.cases.iter().any(|c| c.group.as_deref() == Some("theta"));
                ensure(has_theta == theta_expected, || format!("{phi} {i}: theta cross-check missing"))?;
                cases += r.cases.len();
            }
        }
    }
    Ok(format!("{cases} cases, psi^j for j in -3..5 and ch_e for p in {{2,3,5}}"))
}

fn theorem_rr() -> Outcome {
    let mut phis: Vec<Transformation> = (-3..=5).filter(|&j| j != 0).map(Transformation::adams).collect();
    phis.push(Transformation::chern_character());
    let spaces = Space::all_up_to(6);
    let mut cases = 0;
    for phi in phis {
        let is_ch = phi == Transformation::chern_character();
        let mut verifier = Verifier::new(phi.clone());
        for space in &spaces {
            for f in MorphismDesc::all_on(space) {
                let r = verifier.projective(&f, None).map_err(|e| format!("{phi} {f}: {e}"))?;
                passed(&r)?;
                let has = |g: &str| r.cases.iter().any(|c| c.group.as_deref() == Some(g));
                if is_ch {
                    ensure(has("todd"), || format!("{f}: no Todd comparison"))?;
                } else {
                    ensure(has("integrality") && has("classical"), || format!("{phi} {f}: no integrality"))?;
                    let bad = r.integrality.iter().find(|e| e.verdict == IntegralityVerdict::Rational);
                    ensure(bad.is_none(), || format!("{phi} {f}: coefficient {bad:?} not in Z[1/j]"))?;
                }
                cases += r.cases.len();
            }
        }
    }
    Ok(format!("{cases} cases on {} spaces with dim <= 6", spaces.len()))
}

fn magic_cube() -> Outcome {
    let spaces = [Space::projective(2), Space::projective(3), Space::new(vec![1, 1]), Space::new(vec![2, 1])];
    let mut cases = 0;
    for space in &spaces {
        for j in [2, 3, 5] {
            let r = verify_cube(space, j, None).map_err(|e| e.to_string())?;
            passed(&r)?;
            for face in ["1-ch-adams", "1-ch-adams-graded", "2-top", "3-back", "4-front", "5-bottom"] {
                ensure(r.cases.iter().any(|c| c.group.as_deref() == Some(face)), || format!("{space}: no {face}"))?;
            }
            cases += r.cases.len();
        }
    }
    Ok(format!("{cases} cases, five faces on P2, P3, P1xP1, P2xP1 for j in {{2,3,5}}"))
}

fn uniqueness() -> Outcome {
    for d in 0..=4 {
        passed(&verify_unique_k_morphism(&Space::projective(d)).map_err(|e| e.to_string())?)?;
    }
    Ok("P^d for d <= 4".into())
}

fn sample(ring: &TheoryRing, seed: i64) -> TruncatedPolynomial {
    let mut a = TruncatedPolynomial::zero(ring);
    for (i, b) in ring.basis().into_iter().enumerate() {
        a = &a + &b.scale_int(((seed * 31 + i as i64 * 17) % 13) - 6);
    }
    a
}

fn structural() -> Outcome {
    let mut checks = 0usize;
    // projection formula on basis pairs
    for theory in [Theory::Chow, Theory::K] {
        for space in Space::all_up_to(4) {
            for f in MorphismDesc::all_on(&space) {
                let src = TheoryRing::new(f.source().clone(), theory, 1);
                let tgt = TheoryRing::new(f.target().clone(), theory, 1);
                for a in src.basis() {
                    let pushed = pushforward(&f, &a).unwrap();
                    for b in tgt.basis() {
                        let lhs = pushforward(&f, &(&pullback(&f, &b).unwrap() * &a)).unwrap();
                        ensure(lhs == &b * &pushed, || format!("projection formula {theory} {f}"))?;
                        checks += 1;
                    }
                }
            }
        }
    }
    // functoriality of pushforwards and pullbacks
    for theory in [Theory::Chow, Theory::K] {
        for d in 1..=5u32 {
            for c2 in 1..=d {
                for c1 in 0..c2 {
                    let outer = MorphismDesc::linear_immersion(Space::projective(d), 0, c1).unwrap();
                    let inner = MorphismDesc::linear_immersion(outer.source().clone(), 0, c2 - c1).unwrap();
                    let direct = MorphismDesc::linear_immersion(Space::projective(d), 0, c2).unwrap();
                    for a in TheoryRing::new(direct.source().clone(), theory, 1).basis() {
                        let step = pushforward(&outer, &pushforward(&inner, &a).unwrap()).unwrap();
                        ensure(step == pushforward(&direct, &a).unwrap(), || format!("immersions {d} {c1} {c2}"))?;
                        checks += 1;
                    }
                }
            }
        }
        let space = Space::new(vec![2, 1, 2]);
        for first_drop in 0..3usize {
            let first = MorphismDesc::projection(space.clone(), &[first_drop]).unwrap();
            for second_drop in 0..2usize {
                let second = MorphismDesc::projection(first.target().clone(), &[second_drop]).unwrap();
                let kept: Vec<usize> = (0..3).filter(|&i| i != first_drop).collect();
                let both = MorphismDesc::projection(space.clone(), &[first_drop, kept[second_drop]]).unwrap();
                for a in TheoryRing::new(space.clone(), theory, 1).basis() {
                    let step = pushforward(&second, &pushforward(&first, &a).unwrap()).unwrap();
                    ensure(step == pushforward(&both, &a).unwrap(), || format!("projections {first} {second}"))?;
                    checks += 1;
                }
            }
        }
    }
    // base change: P^d x P^m -> P^m against a linear P^(m-c) in P^m
    for theory in [Theory::Chow, Theory::K] {
        for d in 0..=3u32 {
            for m in 1..=3u32 {
                for c in 1..=m {
                    let total = Space::new(vec![d, m]);
                    let pi = MorphismDesc::projection(total.clone(), &[0]).unwrap();
                    let i = MorphismDesc::linear_immersion(Space::projective(m), 0, c).unwrap();
                    let i_total = MorphismDesc::linear_immersion(total.clone(), 1, c).unwrap();
                    let pi_sub = MorphismDesc::projection(i_total.source().clone(), &[0]).unwrap();
                    for a in TheoryRing::new(total, theory, 1).basis() {
                        let lhs = pullback(&i, &pushforward(&pi, &a).unwrap()).unwrap();
                        let rhs = pushforward(&pi_sub, &pullback(&i_total, &a).unwrap()).unwrap();
                        ensure(lhs == rhs, || format!("base change {theory} d={d} m={m} c={c}"))?;
                        checks += 1;
                    }
                }
            }
        }
    }
    // relation killing
    for space in Space::all_up_to(4) {
        let ring = TheoryRing::k(space.clone());
        for (i, &d) in space.dims().iter().enumerate() {
            let mut combo = LineCombination::new(1);
            for j in 0..=(d as i64 + 1) {
                let mut deg = vec![0; space.factors()];
                deg[i] = -j;
                combo.add_line(LineClass(deg), &int(if j % 2 == 0 { 1 } else { -1 } * binom(d as i64 + 1, j)));
            }
            ensure(from_lines(&ring, &combo).unwrap().is_zero(), || format!("relation {i} on {space}"))?;
            for phi in [Transformation::adams(3), Transformation::adams(-2), Transformation::chern_character()] {
                let out = phi.target_ring(&ring);
                ensure(phi.apply_lines(&combo, &out).unwrap().is_zero(), || format!("{phi} relation on {space}"))?;
            }
            checks += 1;
        }
    }
    // psi^j psi^k = psi^jk on K(P2 x P1)
    let ring = TheoryRing::k(Space::new(vec![2, 1]));
    for b in ring.basis() {
        ensure(adams(1, &b).unwrap() == b, || format!("psi^1 on {b}"))?;
        for j in -2..=3 {
            for k in -2..=3 {
                let lhs = adams(j, &adams(k, &b).unwrap()).unwrap();
                ensure(lhs == adams(j * k, &b).unwrap(), || format!("psi^{j} psi^{k} on {b}"))?;
                checks += 1;
            }
        }
    }
    // psi^j and ch are ring maps on dense elements
    let ch = Transformation::chern_character();
    for seed in 0..6 {
        let a = sample(&ring, seed);
        let b = sample(&ring, seed + 7);
        for j in [-2, 2, 3] {
            let lhs = adams(j, &(&a * &b)).unwrap();
            ensure(lhs == &adams(j, &a).unwrap() * &adams(j, &b).unwrap(), || format!("psi^{j}(ab) for seed {seed}"))?;
            checks += 1;
        }
        let lhs = ch.apply(&(&a * &b)).unwrap();
        ensure(lhs == &ch.apply(&a).unwrap() * &ch.apply(&b).unwrap(), || format!("ch(ab) for seed {seed}"))?;
        checks += 1;
    }
    // Newton identities and inverse multiplicative extensions
    for ring in [TheoryRing::chow(Space::new(vec![2, 2])), TheoryRing::k(Space::new(vec![2, 2]))] {
        for a in -2..=2i64 {
            for b in -2..=2i64 {
                for m in [-2i64, -1, 1, 2] {
                    let e = VirtualBundle::line(LineClass(vec![a, b]), m)
                        .sum(&VirtualBundle::line(LineClass(vec![1, -1]), 1));
                    for s in 0..=5 {
                        newton_s(s, &e, &ring).map_err(|err| err.to_string())?;
                        checks += 1;
                    }
                    for name in [BuiltinSeries::T, BuiltinSeries::Todd, BuiltinSeries::Bj(3), BuiltinSeries::Bj(-2)] {
                        let f = builtin_series(name, 4, 1).unwrap();
                        let pos = multiplicative_extension(&f, &e, &ring).unwrap();
                        let neg = multiplicative_extension(&f, &e.neg(), &ring).unwrap();
                        ensure(neg == pos.invert().unwrap(), || format!("F_x(-E) for {name} on {e}"))?;
                        checks += 1;
                    }
                }
            }
        }
    }
    Ok(format!("{checks} exact checks"))
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() -> ExitCode {
    let criteria: [Criterion; 9] = [
        ("group-law suite", group_laws),
        ("multiplicativity criterion", multiplicativity),
        ("associated series", associated),
        ("Hirzebruch numbers", hirzebruch),
        ("immersion theorem", theorem_main),
        ("Riemann-Roch theorem", theorem_rr),
        ("magic cube", magic_cube),
        ("uniqueness instance", uniqueness),
        ("structural properties", structural),
    ];
    let start = Instant::now();
    let mut all = true;
    for (n, (name, run)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let outcome = run();
        let secs = t.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {}: PASS {name}: {detail} ({secs:.2}s)", n + 1),
            Err(why) => {
                all = false;
                println!("criterion {}: FAIL {name} ({secs:.2}s)\n{why}", n + 1);
            }
        }
    }
    let total = start.elapsed().as_secs_f64();
    let in_time = total < 60.0;
    println!("total: {total:.2}s{}", if in_time { "" } else { " (over the 60s budget)" });
    if all && in_time {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
