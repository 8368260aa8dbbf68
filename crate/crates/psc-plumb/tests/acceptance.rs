//! Acceptance suite. Runs without the test harness so that every criterion
//! prints one PASS/FAIL line; the process fails if any criterion fails.

use std::collections::BTreeSet;
use std::f64::consts::{FRAC_PI_4, PI};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use num_rational::BigRational;
use num_traits::One;
use psc_plumb::cap::{cap_boundary_form, cap_from_angular, perelman_form_check};
use psc_plumb::curvature::{
    doubly_warped_ricci, numeric_curvature, sphere_sample_point, unit_diagonal_ricci, MetricPatch, WarpedJet, DEFAULT_STEP,
};
use psc_plumb::mean_curvature::interface_checks;
use psc_plumb::par::Exec;
use psc_plumb::pipeline::{load_step, run_construction, verify, verify_step, write_outputs, PipelineConfig};
use psc_plumb::plumbing::{
    arf_invariant, boundary_sphere_test, eta_ledger, eta_local_contribution, eta_rp, milnor_ahat_difference, CountConvention,
    EtaLedger, MilnorPairInput, PlumbingTree,
};
use psc_plumb::profile::{
    check_bc, default_ladder, inject_bc_fault, integrate_base, search_parameters, ProfileConfig, SearchBudget,
    BC_CLAUSES,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: String) -> Outcome {
    Outcome { passed, detail }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}

fn oracle_spheres() -> Outcome {
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    for n in [3, 5, 7] {
        for r in [0.5, 1.0, 2.0] {
            let patch = MetricPatch::round_sphere_polar(n, r);
            let rep = numeric_curvature(&patch, &sphere_sample_point(n), DEFAULT_STEP).unwrap();
            worst = worst.max(rel(rep.scalar, (n * (n - 1)) as f64 / (r * r)));
        }
    }
    let flat = numeric_curvature(&MetricPatch::euclidean(5), &[0.1, -0.2, 0.3, 0.0, 0.5], DEFAULT_STEP).unwrap();
    let flat_max = flat.ricci.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()));
    let el = start.elapsed();
    outcome(
        worst <= 1e-6 && flat_max <= 1e-8 && el < Duration::from_secs(10),
        format!("sphere scalar rel err {worst:.2e}, flat |Ric| {flat_max:.2e}, {:.2}s", el.as_secs_f64()),
    )
}

fn closed_form_vs_oracle() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let p = rng.gen_range(2..=4);
        let q = rng.gen_range(2..=4);
        let fc = [rng.gen_range(0.8..2.0), rng.gen_range(-0.5..0.5), rng.gen_range(-0.3..0.3)];
        let hc = [rng.gen_range(0.8..2.0), rng.gen_range(-0.5..0.5), rng.gen_range(-0.3..0.3)];
        let t = rng.gen_range(0.3..0.7);
        let poly = |c: [f64; 3]| move |t: f64| c[0] + c[1] * t + c[2] * t * t;
        let patch = MetricPatch::doubly_warped(p, q, (0.0, 1.0), poly(fc), poly(hc));
        let mut x = vec![t];
        x.extend(sphere_sample_point(q - 1));
        x.extend(sphere_sample_point(p - 1));
        let rep = numeric_curvature(&patch, &x, DEFAULT_STEP).unwrap();
        let diag = unit_diagonal_ricci(&rep, &patch.metric(&x));
        let jet = WarpedJet {
            t,
            f: poly(fc)(t),
            f1: fc[1] + 2.0 * fc[2] * t,
            f2: 2.0 * fc[2],
            h: poly(hc)(t),
            h1: hc[1] + 2.0 * hc[2] * t,
            h2: 2.0 * hc[2],
        };
        let ric = doubly_warped_ricci(&jet, p, q);
        for (got, want) in [(diag[0], ric.t), (diag[1], ric.h), (diag[q], ric.f)] {
            worst = worst.max(rel(got, want));
        }
    }
    let el = start.elapsed();
    outcome(
        worst <= 1e-5 && el < Duration::from_secs(60),
        format!("100 jets, worst componentwise rel err {worst:.2e}, {:.2}s", el.as_secs_f64()),
    )
}

fn ode_properties() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let (mut init_err, mut ratio_lo, mut ratio_hi): (f64, f64, f64) = (0.0, f64::INFINITY, f64::NEG_INFINITY);
    let mut decays = true;
    let times: Vec<f64> = (0..=500).map(|i| i as f64 * 0.1).collect();
    for _ in 0..20 {
        let lambda = rng.gen_range(0.01..0.45);
        let c = rng.gen_range(0.05..1.0);
        let jets = integrate_base(lambda, c, &times).unwrap();
        init_err = init_err.max((jets[0].h0[1] - lambda).abs()).max((jets[0].fc[2] - c * lambda * lambda).abs());
        for j in &jets {
            let ratio = j.fc[1] / (j.fc[0] * j.h0[0] * j.h0[1]);
            ratio_lo = ratio_lo.min(ratio);
            ratio_hi = ratio_hi.max(ratio);
        }
        decays &= jets[500].fc[0] * jets[500].h0[1] < jets[10].fc[0] * jets[10].h0[1];
    }
    outcome(
        init_err <= 1e-8 && ratio_lo >= -1e-9 && ratio_hi <= 1.0 + 1e-9 && decays,
        format!("init err {init_err:.1e}, ratio in [{ratio_lo:.3e}, {ratio_hi:.6}], decay {decays}"),
    )
}

fn end_to_end(p: usize, q: usize) -> Outcome {
    let start = Instant::now();
    let cfg = ProfileConfig { p, q, r_over_n: FRAC_PI_4, lambda: 0.1, grid: 2048, ..Default::default() };
    let out = search_parameters(&cfg, &default_ladder(), &SearchBudget::default(), 1e-8, Exec::Parallel).unwrap();
    let c = out.construction;
    let bc = check_bc(&c.pair, &c.eps, 1e-8);
    let glue = interface_checks(&c.pair).unwrap();
    let el = start.elapsed();
    let ok = c.margins.ricci_min > 0.0
        && c.margins.ab_min >= -1e-9
        && c.pair.jets.len() >= 2048
        && bc.clauses.len() == 9
        && bc.passed()
        && glue.iter().all(|g| g.passed)
        && el < Duration::from_secs(300);
    let detail = format!(
        "({p},{q}): min Ric {:.3e}, min(A-B) {:.3e}, {} grid points, bc {}/9, interfaces {}, {:.1}s",
        c.margins.ricci_min,
        c.margins.ab_min,
        c.pair.jets.len(),
        bc.clauses.iter().filter(|c| c.passed).count(),
        glue.iter().map(|g| if g.passed { "ok" } else { "FAIL" }).collect::<Vec<_>>().join("/"),
        el.as_secs_f64()
    );
    outcome(ok, detail)
}

fn cap_gluing() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut agree = 0;
    let mut glued = 0;
    for _ in 0..1000 {
        let p = rng.gen_range(2..=6);
        let rho = rng.gen_range(0.1..3.0);
        let (e1, e2) = (rng.gen_range(0.01..PI - 0.01), rng.gen_range(0.01..PI - 0.01));
        let a = cap_boundary_form(&cap_from_angular(e1, rho, p).unwrap());
        let b = cap_boundary_form(&cap_from_angular(e2, rho, p).unwrap());
        let check = perelman_form_check(&a, &b).unwrap();
        let criterion = e1.cos() + e2.cos() >= 0.0;
        agree += (check == criterion) as usize;
        glued += criterion as usize;
    }
    outcome(agree == 1000, format!("{agree}/1000 agree ({glued} admissible)"))
}

fn arf_ledger() -> Outcome {
    let start = Instant::now();
    let mut ok = true;
    for len in 2..=20 {
        let det = boundary_sphere_test(&PlumbingTree::tangent_chain(len, 1)).unwrap().det;
        ok &= if len % 2 == 1 { det == 0 } else { det.abs() == 1 };
    }
    for l in 1..=4 {
        ok &= arf_invariant(&PlumbingTree::tangent_chain(8 * l, 1)).unwrap() == 0;
    }
    ok &= arf_invariant(&PlumbingTree::tangent_chain(2, 1)).unwrap() == 1;
    let el = start.elapsed();
    outcome(ok && el < Duration::from_secs(1), format!("dets and Arf values as expected: {ok}, {:.3}s", el.as_secs_f64()))
}

fn eta_ledger_check() -> Outcome {
    let start = Instant::now();
    let mut ok = true;
    for n in 2..=10u32 {
        let unit = BigRational::one() / BigRational::from_integer(2.into()).pow(n as i32);
        ok &= eta_local_contribution(n).unwrap() == unit;
        ok &= eta_rp(n).unwrap() == -unit * BigRational::from_integer(2.into());
    }
    let mut distinct = vec![];
    for conv in [CountConvention::Paper, CountConvention::Chain] {
        let ledger = EtaLedger::for_lengths(1, 1..=100, conv).unwrap();
        let rep = eta_ledger(&ledger).unwrap();
        let values: BTreeSet<_> = rep.values.values().map(|v| v.rational.clone()).collect();
        distinct.push(rep.distinct && values.len() == 100);
    }
    let el = start.elapsed();
    ok &= distinct.iter().all(|d| *d);
    outcome(ok && el < Duration::from_secs(1), format!("exact values, distinct {distinct:?}, {:.3}s", el.as_secs_f64()))
}

fn milnor_ledger() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let (mut bilinear, mut zero_iff, mut gate) = (true, true, true);
    for _ in 0..1000 {
        let s = rng.gen_range(1..50);
        let t = rng.gen_range(s..2 * s);
        let mut v = || rng.gen_range(-1000i64..1000);
        let (x1, x2, y1, y2, u, w) = (v(), v(), v(), v(), v(), v());
        let d = |ps1, pt1, ps2, pt2| milnor_ahat_difference(&MilnorPairInput { s, t, ps1, pt1, ps2, pt2 }).unwrap();
        bilinear &= d(x1 + x2, y1, u, w) - d(x1, y1, u, w) == d(x2, y1, 0, 0);
        bilinear &= d(x1, y1 + y2, u, w) - d(x1, y1, u, w) == d(x1, y2, 0, 0);
        bilinear &= d(3 * x1, y1, 0, 0) == 3 * d(x1, y1, 0, 0);
        zero_iff &= (d(x1, y1, u, w) == 0) == (x1 as i128 * y1 as i128 == u as i128 * w as i128);
        zero_iff &= d(x1, y1, x1, y1) == 0 && d(x1, y1, y1, x1) == 0;
        let bad_t = rng.gen_range(2 * s..4 * s + 1);
        gate &= milnor_ahat_difference(&MilnorPairInput { s, t: bad_t, ps1: 1, pt1: 1, ps2: 0, pt2: 0 }).is_err();
    }
    outcome(bilinear && zero_iff && gate, format!("bilinear {bilinear}, zero iff equal {zero_iff}, gate {gate}"))
}

fn determinism_and_faults() -> Outcome {
    let cfg = PipelineConfig::default();
    let run = run_construction(&PlumbingTree::trivial_vertex(4, 4), &cfg.v_spec, &cfg, 11, Exec::Parallel).unwrap();
    let dir = tempfile::tempdir().unwrap();
    write_outputs(dir.path(), &run).unwrap();
    let (csv, js) = (dir.path().join("profiles/step-0.csv"), dir.path().join("profiles/step-0.json"));
    let a = verify(&csv, &js, 11, Exec::Parallel).unwrap();
    let b = verify(&csv, &js, 11, Exec::Sequential).unwrap();
    let identical = a.to_json().unwrap() == b.to_json().unwrap();
    let same_verdicts = a.steps[0].checks.iter().map(|c| (&c.id, c.passed)).eq(run.certificate.steps[0].checks.iter().map(|c| (&c.id, c.passed)));
    let baseline_bc_ok = check_bc(&run.stored[0].pair, &run.stored[0].eps, cfg.bc_tol).passed();

    let base = load_step(&std::fs::read_to_string(&js).unwrap(), &std::fs::read(&csv).unwrap()).unwrap();
    let mut exact = 0;
    let mut collateral = BTreeSet::new();
    for clause in BC_CLAUSES {
        let mut step = base.clone();
        inject_bc_fault(&mut step.pair, &mut step.eps, clause).unwrap();
        let direct = check_bc(&step.pair, &step.eps, cfg.bc_tol);
        let cert = verify_step(&step, 11, Exec::Sequential).unwrap();
        let named: Vec<&str> = cert.steps[0]
            .checks
            .iter()
            .filter(|c| !c.passed && BC_CLAUSES.contains(&c.id.as_str()))
            .map(|c| c.id.as_str())
            .collect();
        for c in cert.steps[0].checks.iter().filter(|c| !c.passed && !BC_CLAUSES.contains(&c.id.as_str())) {
            collateral.insert(c.id.clone());
        }
        exact += (direct.failing() == [clause] && named == [clause]) as usize;
    }
    outcome(
        identical && same_verdicts && baseline_bc_ok && exact == 9,
        format!(
            "verify byte-identical {identical}, matches construct {same_verdicts}, {exact}/9 faults name exactly their clause \
             (other failing checks: {collateral:?})"
        ),
    )
}

fn main() -> ExitCode {
    let mut results: Vec<(usize, &str, Outcome)> = vec![];
    let mut report = |n: usize, name: &'static str, o: Outcome| {
        println!("{} criterion {n} {name}: {}", if o.passed { "PASS" } else { "FAIL" }, o.detail);
        results.push((n, name, o));
    };
    report(1, "curvature oracle", oracle_spheres());
    report(2, "closed form vs oracle", closed_form_vs_oracle());
    report(3, "ODE properties", ode_properties());
    let (o33, o44) = (end_to_end(3, 3), end_to_end(4, 4));
    report(4, "end-to-end construction", outcome(o33.passed && o44.passed, format!("{}; {}", o33.detail, o44.detail)));
    report(5, "cap gluing arithmetic", cap_gluing());
    report(6, "Arf/determinant ledger", arf_ledger());
    report(7, "eta ledger", eta_ledger_check());
    report(8, "Milnor ledger", milnor_ledger());
    report(9, "determinism and fault injection", determinism_and_faults());
    let failed = results.iter().filter(|r| !r.2.passed).count();
    println!("{} of {} acceptance criteria passed", results.len() - failed, results.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
