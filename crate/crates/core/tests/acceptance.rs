//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
//! failure.

use fracext::extend::{
    cs_operator_residual, hyp_harmonic_residual, random_ball_point, BoundaryFunction, ExtensionField, DEFAULT_FD_STEP,
};
use fracext::geom::{norm2, psi_raw, BallPoint};
use fracext::identities;
use fracext::infunc::{
    boundary_check, hyp_laplace_residual_in, i_n, induction_residual, mass_bounds, mass_h, zonal_power,
    zonal_power_closed, Method, RadialProfile, ZonalPower,
};
use fracext::msphere::{critical_lambda, HalfData, MovingSphereConfig};
use fracext::report::{run, Command, RunConfig, MASS_RADII};
use fracext::specfun::Params;
use fracext::vars::{
    c_n, c_star, carleman, check_limit, check_subcrit, el_residual, extremal, random_boundary, seeded_unit,
    sharp_limit_with, sharp_subcrit_with, CarlemanField, VarsConfig, SHARP_NODES,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;
use std::time::Instant;

type Outcome = fracext::Result<Vec<String>>;
type Criterion = (&'static str, fn() -> Outcome);

/// Collects failures of one criterion.
struct Check {
    failures: Vec<String>,
}

impl Check {
    fn new() -> Self {
        Self { failures: Vec::new() }
    }

    fn expect(&mut self, ok: bool, what: impl FnOnce() -> String) {
        if !ok {
            self.failures.push(what());
        }
    }

    fn done(self) -> Outcome {
        Ok(self.failures)
    }
}

fn c1_mass() -> Outcome {
    let mut c = Check::new();
    for n in 2..=6 {
        for a in [2.0 - n as f64, 0.0] {
            let p = Params::new(n, a)?;
            for &r in &MASS_RADII {
                let h = mass_h(&p, r)?;
                c.expect((h - 1.0).abs() < 1e-9, || format!("n={n} alpha={a} r={r}: h={h:.17}"));
            }
        }
    }
    c.done()
}

fn c2_bounds() -> Outcome {
    let mut c = Check::new();
    let mut count = 0;
    for n in 2..=6 {
        let lo = 2.0 - n as f64;
        for j in 0..4 {
            let a = lo + (j as f64 + 0.5) / 4.0 * (1.0 - lo);
            let p = Params::new(n, a)?;
            for k in 0..10 {
                let r = 0.1 * k as f64;
                let h = mass_h(&p, r)?;
                let (low, up) = mass_bounds(&p, r);
                let margin = (h - low).min(up - h).min(1.0 - r.powi(n as i32 - 1) * h);
                count += 1;
                c.expect(margin >= -1e-10, || format!("n={n} alpha={a} r={r}: margin {margin:e}"));
            }
        }
    }
    c.expect(count == 200, || format!("{count} lattice points"));
    c.done()
}

fn c3_zonal() -> Outcome {
    let mut c = Check::new();
    for k in 2..=6 {
        for j in 1..=9 {
            let r = 0.1 * j as f64;
            for v in [ZonalPower::PowerK, ZonalPower::PowerKPlus1] {
                let q = zonal_power(k, r, v)?.value;
                let e = zonal_power_closed(k, r, v);
                // absolute below magnitude one, relative above it (values reach 1e6)
                c.expect((q - e).abs() < 1e-10 * e.abs().max(1.0), || format!("k={k} r={r} {v:?}: {q} vs {e}"));
            }
        }
    }
    let spot = zonal_power(2, 0.5, ZonalPower::PowerK)?.value;
    c.expect((spot - 32.0 / 9.0).abs() < 1e-10, || format!("spot value {spot}"));
    c.done()
}

fn c4_in_consistency() -> Outcome {
    let mut c = Check::new();
    for n in [3, 4, 6] {
        let closed = if n == 3 { Method::ClosedN3 } else { Method::ClosedEven };
        for j in 0..=18 {
            let r = 0.05 + 0.05 * j as f64;
            let (a, b) = (i_n(n, r, Method::Integral)?, i_n(n, r, closed)?);
            c.expect((a - b).abs() < 1e-8, || format!("n={n} r={r}: {a} vs {b}"));
        }
    }
    for n in 4..=6 {
        for j in 1..=9 {
            let r = 0.1 * j as f64;
            let res = induction_residual(n, r)?;
            c.expect(res.abs() < 1e-6, || format!("induction n={n} r={r}: {res:e}"));
        }
    }
    for n in 3..=6 {
        let b = boundary_check(n)?;
        c.expect(b.value.abs() < 1e-6, || format!("boundary value n={n}: {:e}", b.value));
        c.expect((b.slope + 1.0).abs() < 1e-4, || format!("boundary slope n={n}: {}", b.slope));
    }
    c.done()
}

fn c5_hyperbolic() -> Outcome {
    let mut c = Check::new();
    for n in [3, 4, 6] {
        let m = RadialProfile::best(n)?.method();
        for j in 0..=17 {
            let r = 0.05 + 0.05 * j as f64;
            let res = hyp_laplace_residual_in(n, r, m)?;
            c.expect(res.abs() < 1e-5, || format!("n={n} r={r}: {res:e}"));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for i in 0..50 {
        let n = 3 + i % 4;
        let prof = RadialProfile::best(n)?;
        let u = |y: &[f64]| -> fracext::Result<f64> {
            Ok(prof.value(norm2(y).sqrt())? + ((1.0 - 2.0 * y[n - 1] + norm2(y)) / 2.0).ln())
        };
        let x = random_ball_point(n, 0.9, &mut rng);
        let res = hyp_harmonic_residual(u, &x, DEFAULT_FD_STEP)?;
        c.expect(res.abs() < 1e-5, || format!("combined field n={n} at {x:?}: {res:e}"));
    }
    c.done()
}

fn c6_covariance() -> Outcome {
    let mut c = Check::new();
    let sweeps = [
        ("half-space map", identities::psi_kernel_covariance(61, 200)),
        ("Mobius kernel", identities::mobius_kernel_covariance(62, 200)),
        ("inversion kernel", identities::inversion_kernel_covariance(63, 200)),
        ("Mobius factor", identities::mobius_factor_identity(64, 200)),
        ("Mobius distance", identities::mobius_distance_identity(65, 200)),
        ("inversion Jacobian", identities::inversion_jacobian_duality(66, 200)),
    ];
    for (name, s) in sweeps {
        c.expect(s.samples >= 100 && s.max_rel_error < 1e-12, || format!("{name}: {s:?}"));
    }
    c.done()
}

fn c7_sharp() -> Outcome {
    let mut c = Check::new();
    let m = SHARP_NODES;
    let s2 = sharp_limit_with(2, m)?.value;
    c.expect((s2 - 1.0 / (2.0 * PI.sqrt())).abs() < 1e-8, || format!("S2 = {s2}"));
    let s4 = sharp_limit_with(4, m)?.value;
    let s4_exact = (PI * PI * (2f64.exp() - 3.0) / 4.0).powf(0.25) / (2.0 * PI * PI).powf(1.0 / 3.0);
    c.expect((s4 - s4_exact).abs() < 1e-8, || format!("S4 = {s4} vs {s4_exact}"));
    for n in [3, 5] {
        let (a, b) = (sharp_limit_with(n, m)?.value, sharp_limit_with(n, 2 * m)?.value);
        c.expect((a - b).abs() < 1e-6, || format!("S{n}: {a} vs {b} under doubling"));
    }
    let s30 = sharp_subcrit_with(&Params::new(3, 0.0)?, m)?.value;
    let s30_exact = (4.0 * PI / 3.0).powf(1.0 / 6.0) / (4.0 * PI).powf(0.25);
    c.expect((s30 - s30_exact).abs() < 1e-8, || format!("S(3,0) = {s30} vs {s30_exact}"));
    c.done()
}

fn c8_inequalities() -> Outcome {
    let mut c = Check::new();
    for n in [2, 3, 4] {
        let cfg = VarsConfig::for_dim(n);
        for (i, f) in random_boundary(n, 800 + n as u64, 50)?.iter().enumerate() {
            let r = check_limit(n, f, &cfg)?;
            c.expect(r.slack >= -r.error_bound(), || {
                format!("n={n} F{i}: slack {:e}, bound {:e}", r.slack, r.error_bound())
            });
        }
        for z in [0.0, 0.25, 0.5] {
            let zeta: Vec<f64> = seeded_unit(n, 17).iter().map(|v| v * z).collect();
            let r = check_limit(n, &extremal(n, &zeta)?, &cfg)?;
            c.expect(r.relative_slack.abs() < 1e-4, || format!("extremal n={n} |zeta|={z}: {:e}", r.relative_slack));
        }
    }
    for n in [3, 4] {
        for a in [-0.5, 0.0, 0.5] {
            let r = check_subcrit(&Params::new(n, a)?, &BoundaryFunction::constant(n, 1.0)?, &VarsConfig::for_dim(n))?;
            c.expect(r.relative_slack.abs() < 1e-6, || format!("subcritical n={n} alpha={a}: {:e}", r.relative_slack));
        }
    }
    let r = carleman(&CarlemanField::LogFamily { x0: [1.5, 0.0], c: 0.2 }, &VarsConfig::for_dim(2))?;
    c.expect(r.relative_slack.abs() < 1e-5, || format!("Carleman log family: {:e}", r.relative_slack));
    c.done()
}

fn c9_pde() -> Outcome {
    let mut c = Check::new();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for (n, a) in [(3, 0.5), (3, -0.5), (4, 0.0), (3, -1.0), (4, -2.0)] {
        let p = Params::new(n, a)?;
        let f = BoundaryFunction::random_smooth(n, &mut rng, 3, 3, 1.0)?;
        let field = ExtensionField::new(p, f)?;
        for _ in 0..50 {
            let x = random_ball_point(n, 0.9, &mut rng);
            let u = field.value(&x)?;
            let res = cs_operator_residual(&p, &field, &BallPoint::interior(x.clone())?)?;
            c.expect(res.abs() < 1e-4 * (1.0 + u.abs()), || format!("operator n={n} alpha={a} at {x:?}: {res:e}"));
            if p.is_limit() {
                let h = hyp_harmonic_residual(|y| field.value(y), &x, DEFAULT_FD_STEP)?;
                c.expect(h.abs() < 1e-4, || format!("hyperbolic n={n} at {x:?}: {h:e}"));
            }
        }
    }
    c.done()
}

fn c10_moving_spheres() -> Outcome {
    let mut c = Check::new();
    let s = identities::k_sign_identity(101, 10_000)?;
    c.expect(s.samples == 10_000 && s.violations == 0, || format!("K sign: {s:?}"));
    let g = identities::k_gradient_fd(102, 100)?;
    c.expect(g.samples == 100 && g.max_rel_error < 1e-6, || format!("K gradient: {g:?}"));
    for n in [2, 3] {
        let f = HalfData::new(extremal(n, &vec![0.0; n])?);
        let r = critical_lambda(&f, &MovingSphereConfig::new(vec![0.0; n - 1]))?;
        c.expect(!r.unbounded, || format!("extremal(0) n={n}: unbounded"));
        c.expect((r.lambda_bar - 1.0).abs() < 1e-3, || format!("extremal(0) n={n}: lambda {}", r.lambda_bar));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(103);
    for i in 0..4 {
        let n = 2 + i % 2;
        let w0: Vec<f64> = (0..n - 1).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let d: f64 = rng.gen_range(0.2..2.0);
        let v0: Vec<f64> = (0..n - 1).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let mut y = w0.clone();
        y.push(d.sqrt());
        let mut zeta = vec![0.0; n];
        psi_raw(&y, &mut zeta);
        let f = HalfData::new(extremal(n, &zeta)?);
        let r = critical_lambda(&f, &MovingSphereConfig::new(v0.clone()))?;
        let expect = w0.iter().zip(&v0).map(|(a, b)| (a - b).powi(2)).sum::<f64>() + d;
        c.expect(!r.unbounded, || format!("log family {i}: unbounded"));
        let got = r.lambda_bar * r.lambda_bar;
        c.expect((got - expect).abs() < 2e-3 * expect, || format!("log family {i} n={n}: {got} vs {expect}"));
    }
    c.done()
}

fn c11_euler_lagrange() -> Outcome {
    let mut c = Check::new();
    let xi = seeded_unit(2, 11);
    let r = el_residual(2, &BoundaryFunction::constant(2, 2f64.ln())?, &xi, &VarsConfig::for_dim(2))?;
    c.expect(r.value.abs() < 1e-6, || format!("residual of ln 2: {:e}", r.value));
    println!("  C*(n) versus Cn (reported, no verdict on which normalization is intended):");
    for n in [2, 3, 4] {
        let (a, b) = (c_star(n, SHARP_NODES)?, c_star(n, 2 * SHARP_NODES)?);
        c.expect((a - b).abs() < 1e-6, || format!("C*({n}) under doubling: {a} vs {b}"));
        println!("    n={n}  C*={a:.12}  Cn={:.12}  difference={:.3e}", c_n(n), a - c_n(n));
    }
    c.done()
}

fn c12_determinism() -> Outcome {
    let mut c = Check::new();
    let cfg = RunConfig { seed: 12, ..RunConfig::default() };
    let a = run(Command::ReportAll, &cfg)?;
    let b = run(Command::ReportAll, &cfg)?;
    c.expect(a.body_json() == b.body_json(), || "report-all bodies differ".into());
    c.expect(a.pass, || {
        let bad: Vec<&str> = a.records.iter().filter(|r| !r.pass).map(|r| r.name.as_str()).collect();
        format!("report-all has failing records: {bad:?}")
    });
    c.done()
}

fn main() {
    let criteria: [Criterion; 12] = [
        ("1 mass identities", c1_mass),
        ("2 kernel mass bounds", c2_bounds),
        ("3 zonal closed forms", c3_zonal),
        ("4 In triple consistency", c4_in_consistency),
        ("5 hyperbolic harmonicity", c5_hyperbolic),
        ("6 conformal covariance", c6_covariance),
        ("7 sharp constants", c7_sharp),
        ("8 inequalities", c8_inequalities),
        ("9 extension PDE residuals", c9_pde),
        ("10 moving spheres", c10_moving_spheres),
        ("11 Euler-Lagrange", c11_euler_lagrange),
        ("12 determinism", c12_determinism),
    ];
    let total = Instant::now();
    let mut failed = 0;
    for (name, f) in criteria {
        let t = Instant::now();
        let outcome = f();
        let secs = t.elapsed().as_secs_f64();
        match outcome {
            Ok(v) if v.is_empty() => println!("PASS criterion {name} ({secs:.1} s)"),
            Ok(v) => {
                failed += 1;
                println!("FAIL criterion {name} ({secs:.1} s)");
                for line in v.iter().take(10) {
                    println!("    {line}");
                }
            }
            Err(e) => {
                failed += 1;
                println!("FAIL criterion {name} ({secs:.1} s): error {e}");
            }
        }
    }
    println!("acceptance: {} of 12 criteria passed in {:.1} s", 12 - failed, total.elapsed().as_secs_f64());
    if failed > 0 {
        std::process::exit(1);
    }
}
