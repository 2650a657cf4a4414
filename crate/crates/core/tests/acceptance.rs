//! Acceptance run: one PASS/FAIL line per criterion, non-zero exit on any
//! failure. Tolerances and time budgets are fixed below.

mod common;

use std::time::{Duration, Instant};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use onestep::ensemble::ensemble_stats;
use onestep::fock::{
    apply, inner_product, matrix_representation, BasisState, NormalOrderedPoly, StateExpansion,
};
use onestep::langevin::{
    diffusion_factor, euler_maruyama, euler_maruyama_replicate, langevin_ensemble, DiffusionPolicy,
    LangevinError, SdeModel,
};
use onestep::liouville::{build_liouville, verify_equivalence};
use onestep::master_equation::{
    build_generator, evolve_through, max_stable_dt, ssa_ensemble, ProbabilityDistribution,
};
use onestep::stochastization::{drift_diffusion, exact_propensities_in};
use onestep::{parse_scheme, Convention, StateVector, TruncatedLattice};

const EQUIVALENCE_BUDGET: Duration = Duration::from_secs(5);
const SWEEP_BUDGET: Duration = Duration::from_secs(60);
const SWEEP_SCHEMES: usize = 128;
const ALGEBRA_BUDGET: Duration = Duration::from_secs(10);
const MASS_TOLERANCE: f64 = 1e-10;
const STATS_BUDGET: Duration = Duration::from_secs(120);
const SSA_REPLICAS: usize = 10_000;
const SSA_SIGMAS: f64 = 3.0;
const LANGEVIN_REPLICAS: usize = 4_000;
const LANGEVIN_DT: f64 = 1e-3;
const LANGEVIN_RELATIVE: f64 = 0.05;
const EULER_STEPS: usize = 10_000;
const FLOAT_TOLERANCE: f64 = 1e-12;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn q(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

fn tenth() -> BigRational {
    BigRational::new(BigInt::from(1), BigInt::from(10))
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(elapsed: Duration, budget: Duration) -> Result<(), String> {
    ensure(elapsed <= budget, || {
        format!("took {elapsed:.2?}, budget {budget:?}")
    })
}

fn verhulst_equivalence() -> Outcome {
    let scheme = common::verhulst();
    let start = Instant::now();
    let mut compared = 0;
    for cap in [2u64, 3, 4, 8, 16, 32, 64, 128, 256] {
        let report = verify_equivalence(&scheme, &TruncatedLattice::uniform(1, cap).unwrap())
            .map_err(|e| e.to_string())?;
        ensure(report.equal && report.max_discrepancy == "0", || {
            format!("cap {cap}: first mismatch {:?}", report.first_mismatch)
        })?;
        compared += report.compared_entries;
    }
    within(start.elapsed(), EQUIVALENCE_BUDGET)?;
    Ok(format!(
        "caps 2..256, {compared} exact entries, discrepancy 0, {:.2?}",
        start.elapsed()
    ))
}

fn random_sweep() -> Outcome {
    let mut rng = ChaCha20Rng::seed_from_u64(20240601);
    let start = Instant::now();
    for i in 0..SWEEP_SCHEMES {
        let scheme = common::random_scheme(&mut rng, 2, 3, 2);
        let lattice = TruncatedLattice::uniform(scheme.order(), 16).unwrap();
        let report = verify_equivalence(&scheme, &lattice).map_err(|e| format!("#{i}: {e}"))?;
        ensure(report.equal, || {
            format!(
                "#{i} {}: {:?}",
                scheme.to_source().replace('\n', "; "),
                report.first_mismatch
            )
        })?;
    }
    within(start.elapsed(), SWEEP_BUDGET)?;
    Ok(format!(
        "{SWEEP_SCHEMES} schemes at cap 16 all exact, {:.2?}",
        start.elapsed()
    ))
}

fn verhulst_symbolic() -> Outcome {
    let scheme = common::verhulst();
    let (lambda, gamma, beta) = (q(2), tenth(), q(1));

    for phi in 0..=60u64 {
        let f = q(phi as i64);
        let p = exact_propensities_in::<BigRational>(&scheme, &[phi]);
        let expected = [
            (&lambda * &f, &gamma * &f * (&f - q(1))),
            (&beta * &f, BigRational::zero()),
        ];
        for (got, (fwd, bwd)) in p.iter().zip(&expected) {
            ensure(&got.forward == fwd && &got.backward == bwd, || {
                format!("propensities at {phi}: {got:?}")
            })?;
        }
    }

    for k in 0..=400 {
        let phi = k as f64 * 0.125;
        let dd = drift_diffusion(&scheme, &[phi], Convention::Paper).map_err(|e| e.to_string())?;
        let a = 2.0 * phi - phi - 0.1 * phi * phi;
        let b = 2.0 * phi + phi - 0.1 * phi * phi;
        let scale = 1.0 + phi * phi;
        ensure(
            (dd.drift[0] - a).abs() <= FLOAT_TOLERANCE * scale
                && (dd.diffusion[(0, 0)] - b).abs() <= FLOAT_TOLERANCE * scale,
            || format!("A/B at {phi}: {} {}", dd.drift[0], dd.diffusion[(0, 0)]),
        )?;
    }

    let cap = 64u64;
    let lattice = TruncatedLattice::uniform(1, cap).unwrap();
    let g = build_generator::<BigRational>(&scheme, &lattice).map_err(|e| e.to_string())?;
    for n in 1..cap as usize {
        let f = q(n as i64);
        let diag = -(&lambda * &f + &beta * &f + &gamma * &f * (&f - q(1)));
        let from_above = &beta * (&f + q(1)) + &gamma * (&f + q(1)) * &f;
        let from_below = &lambda * (&f - q(1));
        ensure(
            g.get(n, n) == diag && g.get(n, n + 1) == from_above && g.get(n, n - 1) == from_below,
            || format!("master equation row {n}"),
        )?;
    }

    // L = −[λπa + βπa + γππaa] + [βa + γπaa] + λππa
    let m = |c, d| NormalOrderedPoly::monomial(1, 0, c, d);
    let hand = [
        (m(1, 1), -(&lambda + &beta)),
        (m(2, 2), -gamma.clone()),
        (m(0, 1), beta.clone()),
        (m(1, 2), gamma.clone()),
        (m(2, 1), lambda.clone()),
    ]
    .iter()
    .fold(NormalOrderedPoly::zero(1), |acc, (p, k)| {
        acc.try_add(&p.scale(k)).unwrap()
    });
    let op = build_liouville(&scheme);
    ensure(op.poly() == &hand, || format!("operator {}", op.pretty()))?;
    let symbolic = "lambda·(−π·a + π^2·a) + gamma·(π·a^2 − π^2·a^2) + beta·(a − π·a)";
    ensure(op.pretty_symbolic() == symbolic, || op.pretty_symbolic())?;
    Ok(format!(
        "propensities φ≤60, A/B on 401 points, ME rows 1..{cap}, L = {}",
        op.pretty()
    ))
}

fn random_poly(rng: &mut ChaCha20Rng) -> NormalOrderedPoly {
    (0..rng.random_range(1..=3)).fold(NormalOrderedPoly::zero(1), |acc, _| {
        let m = NormalOrderedPoly::monomial(1, 0, rng.random_range(0..=3), rng.random_range(0..=3));
        acc.try_add(&m.scale(&q(rng.random_range(-4..=4)))).unwrap()
    })
}

fn max_creation(p: &NormalOrderedPoly) -> u64 {
    p.terms()
        .map(|(m, _)| u64::from(m.creation[0]))
        .max()
        .unwrap_or(0)
}

fn operator_algebra() -> Outcome {
    let start = Instant::now();
    let pi = NormalOrderedPoly::creation(1, 0);
    let a = NormalOrderedPoly::annihilation(1, 0);
    ensure(
        a.commutator(&pi).unwrap() == NormalOrderedPoly::one(1),
        || "[a, π] ≠ 1".into(),
    )?;

    for n in 0..=50u64 {
        let ket = StateExpansion::basis(&BasisState(vec![n]));
        let diff = apply(&a, &apply(&pi, &ket)).plus(&apply(&pi, &apply(&a, &ket)).scale(&q(-1)));
        ensure(diff == ket, || format!("(aπ − πa)|{n}⟩ ≠ |{n}⟩"))?;
    }

    let mut factorial = BigInt::one();
    for n in 0..=20u64 {
        if n > 0 {
            factorial *= BigInt::from(n);
        }
        for m in 0..=20u64 {
            let v = inner_product(
                &BasisState(vec![n]),
                &StateExpansion::basis(&BasisState(vec![m])),
            )
            .unwrap();
            let expected = if n == m {
                BigRational::from_integer(factorial.clone())
            } else {
                BigRational::zero()
            };
            ensure(v == expected, || format!("⟨{n}|{m}⟩ = {v}"))?;
        }
    }

    let mut rng = ChaCha20Rng::seed_from_u64(7);
    let cap = 12u64;
    let mut checked = 0;
    for pair in 0..200 {
        let (p, r) = (random_poly(&mut rng), random_poly(&mut rng));
        let product = matrix_representation(&p, cap)
            .unwrap()
            .matmul(&matrix_representation(&r, cap).unwrap());
        let direct = matrix_representation(&p.multiply(&r).unwrap(), cap).unwrap();
        let reach = max_creation(&p) + max_creation(&r);
        for col in (0..=cap).filter(|c| c + reach <= cap) {
            for row in 0..=cap as usize {
                ensure(
                    product.get(row, col as usize) == direct.get(row, col as usize),
                    || format!("pair {pair}: ({row},{col}) for p = {p}, q = {r}"),
                )?;
                checked += 1;
            }
        }
    }
    within(start.elapsed(), ALGEBRA_BUDGET)?;
    Ok(format!(
        "n≤50, ⟨n|m⟩ n,m≤20, 200 pairs ({checked} block entries), {:.2?}",
        start.elapsed()
    ))
}

fn conservation() -> Outcome {
    let mut schemes = vec![
        common::verhulst(),
        parse_scheme(&std::fs::read_to_string(common::scheme_path("predation.scheme")).unwrap())
            .unwrap(),
    ];
    let mut rng = ChaCha20Rng::seed_from_u64(5);
    schemes.extend((0..100).map(|_| common::random_scheme(&mut rng, 2, 3, 2)));
    let mut columns = 0;
    for (i, s) in schemes.iter().enumerate() {
        let lattice = TruncatedLattice::uniform(s.order(), 12).unwrap();
        let g = build_generator::<BigRational>(s, &lattice).map_err(|e| e.to_string())?;
        for m in lattice.interior(s) {
            ensure(g.column_sum(m).is_zero(), || {
                format!("scheme #{i}, column {m}")
            })?;
            columns += 1;
        }
    }

    let mut worst: f64 = 0.0;
    for (scheme, cap, x0) in [
        (common::verhulst(), vec![128u64], vec![10u64]),
        (common::verhulst(), vec![20], vec![15]),
        (schemes[1].clone(), vec![40, 40], vec![10, 5]),
    ] {
        let lattice = TruncatedLattice::new(cap).unwrap();
        let g = build_generator::<f64>(&scheme, &lattice).map_err(|e| e.to_string())?;
        let p0 = ProbabilityDistribution::point_mass(&lattice, &x0).map_err(|e| e.to_string())?;
        for e in evolve_through(&p0, &g, &[1.0, 2.0, 5.0], max_stable_dt(&g))
            .map_err(|e| e.to_string())?
        {
            // Unnormalized mass is 1 − leakage; the reported distribution is renormalized.
            let retained = 1.0 - e.leakage;
            let err = (e.distribution.total() - 1.0).abs();
            ensure(
                err <= MASS_TOLERANCE && (0.0..=1.0).contains(&retained),
                || format!("Σp off by {err:e} at t={}", e.distribution.t),
            )?;
            worst = worst.max(err);
        }
    }
    Ok(format!(
        "{columns} interior columns sum to 0 over {} schemes; |Σp − 1| ≤ {worst:.1e}",
        schemes.len()
    ))
}

fn cross_oracle() -> Outcome {
    let start = Instant::now();
    let scheme = common::verhulst();
    let lattice = TruncatedLattice::uniform(1, 128).unwrap();
    let g = build_generator::<f64>(&scheme, &lattice).map_err(|e| e.to_string())?;
    let p0 = ProbabilityDistribution::point_mass(&lattice, &[10]).unwrap();
    let times = [0.0, 1.0, 2.0, 5.0];
    let cme: Vec<f64> = evolve_through(&p0, &g, &times, max_stable_dt(&g))
        .map_err(|e| e.to_string())?
        .iter()
        .map(|e| e.distribution.mean(&lattice)[0])
        .collect();

    let runs = ssa_ensemble(
        &scheme,
        &StateVector(vec![10]),
        &times,
        1,
        SSA_REPLICAS,
        None,
    )
    .map_err(|e| e.to_string())?;
    let stats = ensemble_stats(&runs).map_err(|e| e.to_string())?;
    let mut zs = Vec::new();
    for i in 1..times.len() {
        let z = (stats.mean[i][0] - cme[i]) / stats.std_error[i][0];
        ensure(z.abs() <= SSA_SIGMAS, || {
            format!(
                "t={}: ssa {} vs cme {} (z = {z:.2})",
                times[i], stats.mean[i][0], cme[i]
            )
        })?;
        zs.push(format!("{z:+.2}"));
    }

    let model = SdeModel::new(&scheme, Convention::Paper).with_policy(DiffusionPolicy::Clamp);
    let steps = (2.0 / LANGEVIN_DT).round() as usize;
    let paths = langevin_ensemble(
        &model,
        &[10.0],
        LANGEVIN_DT,
        steps,
        1,
        LANGEVIN_REPLICAS,
        None,
        steps,
    )
    .map_err(|e| e.to_string())?;
    let series: Vec<_> = paths.into_iter().map(|p| p.series).collect();
    let lstats = ensemble_stats(&series).map_err(|e| e.to_string())?;
    let langevin = lstats.mean.last().unwrap()[0];
    let rel = (langevin - cme[2]).abs() / cme[2];
    ensure(rel <= LANGEVIN_RELATIVE, || {
        format!("langevin {langevin} vs cme {} at t=2", cme[2])
    })?;
    within(start.elapsed(), STATS_BUDGET)?;
    Ok(format!(
        "SSA z at t=1,2,5: {}; Langevin t=2 {langevin:.3} vs CME {:.3} ({:.1}%), {:.2?}",
        zs.join(" "),
        cme[2],
        100.0 * rel,
        start.elapsed()
    ))
}

fn zero_noise_euler() -> Outcome {
    let scheme = common::verhulst();
    let dt = 1e-3;
    let model = SdeModel::new(&scheme, Convention::Paper).without_noise();
    let path = euler_maruyama(&model, &[1.0], dt, EULER_STEPS, 0).map_err(|e| e.to_string())?;
    let mut x: f64 = 1.0;
    for (k, v) in path.series.values.iter().enumerate().skip(1) {
        x += (2.0 * x - 1.0 * x - 0.1 * x.powi(2)) * dt;
        ensure(v[0].to_bits() == x.to_bits(), || {
            format!("step {k}: {} vs {x}", v[0])
        })?;
    }
    ensure(path.series.values.len() == EULER_STEPS + 1, || {
        "wrong length".into()
    })?;
    Ok(format!("{EULER_STEPS} steps bitwise equal, x = {x}"))
}

fn non_psd_detection() -> Outcome {
    let scheme = common::verhulst();
    let threshold = (2.0 + 1.0) / 0.1;
    let strict = SdeModel::new(&scheme, Convention::Paper);
    match euler_maruyama(&strict, &[threshold + 0.5], 0.01, 10, 0) {
        Err(LangevinError::StrictAbort { step: 0, .. }) => {}
        other => return Err(format!("no abort above threshold: {other:?}")),
    }

    // λ=3, β=γ=1/2: carrying capacity 5, threshold 7, stationary spread about 1,
    // B vanishes at the threshold, so crossings happen by overshoot within one
    // coarse step.
    let half = BigRational::new(BigInt::from(1), BigInt::from(2));
    let crossing = scheme
        .with_param("lambda", q(3))
        .and_then(|s| s.with_param("beta", half.clone()))
        .and_then(|s| s.with_param("gamma", half))
        .map_err(|e| e.to_string())?;
    let threshold = (3.0 + 0.5) / 0.5;
    let strict = SdeModel::new(&crossing, Convention::Paper);
    let clamp = SdeModel::new(&crossing, Convention::Paper).with_policy(DiffusionPolicy::Clamp);
    let replicas = 400;
    let mut aborts = 0;
    for replicate in 0..replicas {
        match euler_maruyama_replicate(&strict, &[5.0], 0.1, 300, 3, replicate, 1) {
            Ok(path) => {
                // B is only consulted to leave a state, so the terminal state is exempt.
                let values = &path.series.values[..path.series.values.len() - 1];
                let top = values.iter().map(|v| v[0]).fold(0.0, f64::max);
                ensure(top <= threshold, || {
                    format!("replicate {replicate} passed through {top}")
                })?;
            }
            Err(LangevinError::StrictAbort { step, state, .. }) => {
                aborts += 1;
                ensure(state[0] > threshold, || {
                    format!("abort at {} ≤ {threshold}", state[0])
                })?;
                // Same stream under clamp: identical up to the abort, every earlier state valid.
                let earlier = euler_maruyama_replicate(&clamp, &[5.0], 0.1, step, 3, replicate, 1)
                    .map_err(|e| e.to_string())?;
                ensure(earlier.events.is_empty(), || {
                    format!("replicate {replicate}: earlier clamp events")
                })?;
                ensure(earlier.series.values.last().unwrap()[0] == state[0], || {
                    "streams diverge".into()
                })?;
                ensure(
                    earlier
                        .series
                        .values
                        .iter()
                        .rev()
                        .skip(1)
                        .all(|v| v[0] <= threshold),
                    || format!("replicate {replicate}: earlier state above threshold"),
                )?;
            }
            Err(e) => return Err(e.to_string()),
        }
    }
    ensure(aborts > 0, || "no replicate reached the threshold".into())?;

    for s in [&scheme, &crossing] {
        let km = SdeModel::new(s, Convention::KramersMoyal);
        for phi in (0..=4000).map(|k| k as f64 * 0.25) {
            let dd =
                drift_diffusion(s, &[phi], Convention::KramersMoyal).map_err(|e| e.to_string())?;
            diffusion_factor(&dd.diffusion).map_err(|e| format!("km at {phi}: {e}"))?;
        }
        for x0 in [0.0, 5.0, 10.0, 35.0, 200.0] {
            langevin_ensemble(&km, &[x0], 0.01, 300, 9, 50, None, 100)
                .map_err(|e| format!("km from {x0}: {e}"))?;
        }
    }
    Ok(format!(
        "abort at step 0 above 30; {aborts}/{replicas} strict paths stopped at their first state above {threshold}; km never raised"
    ))
}

fn cli_determinism() -> Outcome {
    let v = common::scheme_path("verhulst.scheme");
    let p = common::scheme_path("predation.scheme");
    let runs: Vec<Vec<&str>> = vec![
        vec!["parse", &v],
        vec!["derive", &p, "--at", "4,7"],
        vec!["cme", &v, "--cap", "64", "--x0", "10", "--t-end", "1"],
        vec![
            "--format",
            "csv",
            "ssa",
            &p,
            "--x0",
            "20,10",
            "--t-end",
            "3",
            "--replicas",
            "200",
            "--grid",
            "12",
        ],
        vec!["ssa", &v, "--x0", "10", "--t-end", "2"],
        vec![
            "--convention",
            "km",
            "langevin",
            &p,
            "--x0",
            "20,10",
            "--dt",
            "0.01",
            "--steps",
            "300",
            "--replicas",
            "100",
            "--record-every",
            "30",
        ],
        vec![
            "--format", "csv", "langevin", &v, "--x0", "10", "--dt", "0.01", "--steps", "200",
            "--policy", "clamp",
        ],
        vec!["liouville", &p],
        vec!["verify", &v, "--cap", "32"],
    ];
    std::env::set_var("ONESTEP_COLOR", "0");
    let mut bytes = 0;
    for args in &runs {
        let mut reference: Option<String> = None;
        for threads in ["1", "2", "8", "1"] {
            let argv = ["onestep", "--seed", "42", "--threads", threads]
                .into_iter()
                .chain(args.iter().copied());
            let out = onestep::cli::run(argv);
            ensure(out.code == 0, || format!("{args:?}: {}", out.stderr))?;
            match &reference {
                None => reference = Some(out.stdout),
                Some(r) => ensure(*r == out.stdout, || {
                    format!("{args:?} differs with --threads {threads}")
                })?,
            }
        }
        bytes += reference.map_or(0, |r| r.len());
    }
    Ok(format!(
        "{} invocations × threads 1/2/8 identical ({bytes} bytes)",
        runs.len()
    ))
}

fn main() {
    let criteria: [Criterion; 9] = [
        ("verhulst exact equivalence", verhulst_equivalence),
        ("random scheme equivalence sweep", random_sweep),
        ("verhulst symbolic derivations", verhulst_symbolic),
        ("operator algebra invariants", operator_algebra),
        ("probability conservation", conservation),
        ("SSA / CME / Langevin cross-check", cross_oracle),
        ("zero-noise Langevin = Euler", zero_noise_euler),
        ("non-PSD diffusion detection", non_psd_detection),
        ("CLI determinism across threads", cli_determinism),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        match check() {
            Ok(detail) => println!("PASS {} {name}: {detail}", i + 1),
            Err(reason) => {
                failed += 1;
                println!("FAIL {} {name}: {reason}", i + 1);
            }
        }
    }
    println!(
        "{} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
