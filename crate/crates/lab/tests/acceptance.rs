//! Acceptance criteria, one PASS/FAIL line each. Exits nonzero when any
//! criterion fails.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};
use std::time::Instant;

use nevlab::runner::{run_path, RunOptions};
use nevlab_core::elliptic::complete_k;
use nevlab_core::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn konst(v: f64) -> FunctionHandle {
    make_constant(c(v, 0.0))
}

fn check(ok: bool, msg: String) -> Outcome {
    if ok {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn err<E: std::fmt::Display>(what: &str) -> impl FnOnce(E) -> String + '_ {
    move |e| format!("{what}: {e}")
}

/// Points at least `gap` apart with moduli in `[0.2, radius]`.
fn separated(rng: &mut ChaCha8Rng, n: usize, radius: f64, gap: f64) -> Vec<C64> {
    let mut pts: Vec<C64> = Vec::new();
    while pts.len() < n {
        let z = C64::from_polar(rng.gen_range(0.2..radius), rng.gen_range(0.0..2.0 * PI));
        if pts.iter().all(|p| (p - z).norm() > gap) {
            pts.push(z);
        }
    }
    pts
}

fn random_rational(rng: &mut ChaCha8Rng) -> FunctionHandle {
    let nz = rng.gen_range(1..=4);
    let np = rng.gen_range(0..=3);
    let pts = separated(rng, nz + np, 3.0, 0.3);
    let mult = |rng: &mut ChaCha8Rng| if rng.gen_bool(0.25) { 2 } else { 1 };
    let zeros: Vec<(C64, u32)> = pts[..nz].iter().map(|&z| (z, mult(rng))).collect();
    let poles: Vec<(C64, u32)> = pts[nz..].iter().map(|&z| (z, mult(rng))).collect();
    let lead = C64::from_polar(rng.gen_range(0.5..2.0), rng.gen_range(0.0..2.0 * PI));
    make_rational_from_roots(lead, &zeros, &poles).expect("valid rational")
}

fn random_exp_poly(rng: &mut ChaCha8Rng) -> FunctionHandle {
    let n = rng.gen_range(1..=3);
    let mut terms = Vec::new();
    for j in 0..n {
        let coef = C64::from_polar(rng.gen_range(0.5..2.0), rng.gen_range(0.0..2.0 * PI));
        let freq = if j == 0 { c(0.0, 0.0) } else { C64::from_polar(rng.gen_range(0.2..0.6), rng.gen_range(0.0..2.0 * PI)) };
        terms.push((coef, freq));
    }
    make_exp_poly(&terms).expect("valid exp-poly")
}

fn jensen_identity() -> Outcome {
    let quad = QuadratureConfig::default();
    let opts = EngineOptions::default();
    let mut rng = ChaCha8Rng::seed_from_u64(0x6a65_6e73);
    let mut handles: Vec<FunctionHandle> = (0..14).map(|_| random_rational(&mut rng)).collect();
    handles.extend((0..6).map(|_| random_exp_poly(&mut rng)));
    let radii = RadiusSchedule::spanning(1.1, 50.0, 7).map_err(err("schedule"))?;
    let mut worst: f64 = 0.0;
    for (i, h) in handles.iter().enumerate() {
        for &r in radii.radii() {
            let j = jensen_check(h, r, &quad, &opts).map_err(err(&format!("handle {i} at r = {r}")))?;
            if !j.certified {
                return Err(format!("handle {i} uncertified at r = {r}"));
            }
            worst = worst.max(j.residual);
        }
    }
    let sn = make_jacobi_sn(0.5).map_err(err("sn"))?;
    let mut worst_sn: f64 = 0.0;
    for &r in RadiusSchedule::spanning(2.0, 10.0, 9).map_err(err("schedule"))?.radii() {
        let j = jensen_check(&sn, r, &quad, &opts).map_err(err(&format!("sn at r = {r}")))?;
        if !j.certified {
            return Err(format!("sn uncertified at r = {r}"));
        }
        worst_sn = worst_sn.max(j.residual);
    }
    check(
        worst < 1e-8 && worst_sn < 1e-5,
        format!("{} handles, max residual {worst:.2e}; sn max residual {worst_sn:.2e}", handles.len()),
    )
}

struct Member {
    name: &'static str,
    f: FunctionHandle,
    g: FunctionHandle,
    targets: Vec<FunctionHandle>,
    schedule: RadiusSchedule,
}

fn degree_three() -> FunctionHandle {
    make_rational_from_roots(
        c(1.0, 0.0),
        &[(c(0.5, 0.0), 1), (c(-0.7, 1.3), 1), (c(2.2, -0.4), 1)],
        &[(c(1.1, 0.9), 1)],
    )
    .expect("valid rational")
}

fn suite() -> Result<Vec<Member>, String> {
    let apply_opts = ApplyOptions::default();
    let sn = make_jacobi_sn(0.5).map_err(err("sn"))?;
    let sn2 = apply(&OperatorExpr::derivative(2), &sn, &apply_opts).map_err(err("sn''"))?;
    let e = make_exp_poly(&[(c(1.0, 0.0), c(1.0, 0.0))]).map_err(err("exp"))?;
    let de = e.derivative().ok_or("exp derivative")?;
    let r3 = degree_three();
    let dr3 = apply(&OperatorExpr::difference(), &r3, &apply_opts).map_err(err("difference"))?;
    let s = 1.581_138_830_084_189_8;
    let sched = |r0, r1, n| RadiusSchedule::spanning(r0, r1, n).map_err(err("schedule"));
    Ok(vec![
        Member { name: "z", f: identity(), g: konst(1.0), targets: vec![konst(0.0)], schedule: sched(1.5, 20.0, 8)? },
        Member { name: "exp", f: e, g: de, targets: vec![konst(0.0), konst(1.0)], schedule: sched(1.5, 12.0, 8)? },
        Member { name: "sn", f: sn, g: sn2, targets: vec![konst(0.0), konst(s), konst(-s)], schedule: sched(2.0, 12.0, 8)? },
        Member {
            name: "rational",
            f: r3,
            g: dr3,
            targets: vec![konst(0.0), konst(1.0), konst(-1.0)],
            schedule: sched(1.25, 30.0, 8)?,
        },
    ])
}

fn second_main_theorem() -> Outcome {
    let quad = QuadratureConfig::default();
    let opts = EngineOptions::default();
    let mut notes = Vec::new();
    for m in suite()? {
        let rows = verify_thm21(&m.f, &m.g, &m.targets, &m.schedule, &quad, &opts).map_err(err(m.name))?;
        if let Some(bad) = rows.iter().find(|r| !r.holds()) {
            return Err(format!("{}: r = {} slack {} margin {}", m.name, bad.r, bad.slack, bad.margin));
        }
        if rows.iter().any(|r| !r.certified) {
            return Err(format!("{}: uncertified rows", m.name));
        }
        let min = rows.iter().map(|r| r.slack).fold(f64::INFINITY, f64::min);
        if m.name == "z" {
            let eq = rows.iter().map(|r| r.slack.abs()).fold(0.0, f64::max);
            if eq >= 1e-8 {
                return Err(format!("equality case |slack| {eq:.2e}"));
            }
            notes.push(format!("z |slack| <= {eq:.1e}"));
        } else {
            notes.push(format!("{} min slack {min:.3}", m.name));
        }
    }
    Ok(notes.join(", "))
}

fn sn_deficiencies() -> Outcome {
    let sn = make_jacobi_sn(0.5).map_err(err("sn"))?;
    let s = 1.581_138_830_084_189_8;
    let targets = [konst(0.0), konst(s), konst(-s)];
    let k = complete_k(0.5);
    let schedule = RadiusSchedule::spanning(2.0, 8.0 * k, 12).map_err(err("schedule"))?;
    let est = deficiencies(
        &sn,
        &OperatorExpr::derivative(2),
        &targets,
        &schedule,
        &QuadratureConfig::default(),
        &EngineOptions::default(),
        &ApplyOptions::default(),
        DeficiencyWindow::default(),
    )
    .map_err(err("deficiencies"))?;
    let sum = deficiency_sum(&est);
    let finite: Vec<f64> = est.iter().filter(|e| matches!(e.target, DeficiencyTarget::Finite(..))).map(|e| e.theta).collect();
    let inf = est.iter().find(|e| matches!(e.target, DeficiencyTarget::Infinity)).map(|e| e.theta).ok_or("no infinity row")?;
    let theta_sum: f64 = finite.iter().sum();
    let ok = finite.iter().all(|t| (0.85..=1.15).contains(t))
        && (-1.15..=-0.85).contains(&inf)
        && (1.8..=2.2).contains(&sum.total)
        && theta_sum >= 2.8
        && est.iter().all(|e| e.certified);
    check(
        ok,
        format!(
            "theta {}, theta(inf) {inf:.4}, total {:.4}, finite theta sum {theta_sum:.4}",
            finite.iter().map(|t| format!("{t:.4}")).collect::<Vec<_>>().join(" "),
            sum.total
        ),
    )
}

fn growth_laws() -> Outcome {
    let quad = QuadratureConfig::default();
    let opts = EngineOptions::default();
    let e = make_exp_poly(&[(c(1.0, 0.0), c(1.0, 0.0))]).map_err(err("exp"))?;
    let sched = RadiusSchedule::explicit(vec![10.0, 20.0, 50.0]).map_err(err("schedule"))?;
    let tab = characteristic(&e, &[], &sched, &quad, &opts).map_err(err("exp T"))?;
    let worst_exp = tab.samples.iter().map(|s| (s.t / (s.r_eff / PI) - 1.0).abs()).fold(0.0, f64::max);
    let r = RadiusSchedule::explicit(vec![1e3]).map_err(err("schedule"))?;
    let mut worst_rat: f64 = 0.0;
    let mut rng = ChaCha8Rng::seed_from_u64(0x6772_6f77);
    for d in 1..=4u32 {
        let pts = separated(&mut rng, d as usize, 0.9, 0.2);
        let zeros: Vec<(C64, u32)> = pts.iter().map(|&z| (z, 1)).collect();
        let f = make_rational_from_roots(c(1.0, 0.0), &zeros, &[]).map_err(err("rational"))?;
        let t = characteristic(&f, &[], &r, &quad, &opts).map_err(err("rational T"))?;
        let s = &t.samples[0];
        worst_rat = worst_rat.max((s.t / s.r_eff.ln() / d as f64 - 1.0).abs());
    }
    check(
        worst_exp < 0.01 && worst_rat < 0.02,
        format!("T(e^z) vs r/pi rel err {worst_exp:.2e}; T/log r vs degree rel err {worst_rat:.2e}"),
    )
}

fn engine_vs_oracle() -> Outcome {
    let forced = EngineOptions { force_subdivision: true, ..EngineOptions::default() };
    let mut rng = ChaCha8Rng::seed_from_u64(0x6f72_6163);
    let mut total = 0;
    let mut good = 0;
    let mut failures = Vec::new();
    for i in 0..50 {
        let f = random_rational(&mut rng);
        // Radius kept away from every point of the divisor.
        let r = 3.5;
        let oracle = count_in_disc(&f, r, &EngineOptions::default()).map_err(err("oracle"))?;
        total += 1;
        match count_in_disc(&f, r, &forced) {
            Ok(d) if d.certified && d.matches(&oracle, 1e-6) => good += 1,
            Ok(_) => failures.push(format!("rational {i} mismatch")),
            Err(e) => failures.push(format!("rational {i}: {e}")),
        }
    }
    let sn = make_jacobi_sn(0.5).map_err(err("sn"))?;
    for (cx, cy, rad) in [(0.0, 0.0, 3.0), (0.0, 0.0, 6.5), (1.9, 0.4, 2.5), (-3.1, 2.2, 1.7)] {
        let region = Region::disc(c(cx, cy), rad).map_err(err("region"))?;
        let oracle = sn.divisor(region).ok_or("sn oracle")?;
        let shifted = compose_affine(&sn, c(1.0, 0.0), c(cx, cy)).map_err(err("shift"))?.opaque();
        total += 1;
        match count_in_disc(&shifted, rad, &forced) {
            Ok(d) => {
                let moved: Vec<(C64, i64)> = d.points.iter().map(|p| (p.location + c(cx, cy), p.signed())).collect();
                let back = Divisor::from_signed(region, moved, d.certified);
                if d.certified && back.matches(&oracle, 1e-6) {
                    good += 1;
                } else {
                    failures.push(format!("sn disc ({cx}, {cy}; {rad}) mismatch"));
                }
            }
            Err(e) => failures.push(format!("sn disc ({cx}, {cy}; {rad}): {e}")),
        }
    }
    check(good == total, format!("{good}/{total} certified and matching{}", failures.iter().map(|f| format!("; {f}")).collect::<String>()))
}

fn pointwise() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x706f_696e);
    let mut notes = Vec::new();
    for m in suite()? {
        let radii = m.schedule.radii();
        let pts: Vec<C64> = (0..100)
            .map(|_| C64::from_polar(radii[rng.gen_range(0..radii.len())], rng.gen_range(0.0..2.0 * PI)))
            .collect();
        let rep = pointwise_check(&m.f, &m.g, &m.targets, &pts);
        if rep.sum_violations + rep.proximity_violations > 0 || rep.samples < 100 {
            return Err(format!(
                "{}: {} samples, {} + {} violations",
                m.name, rep.samples, rep.sum_violations, rep.proximity_violations
            ));
        }
        notes.push(format!("{} gap {:.2e}", m.name, rep.min_sum_gap.min(rep.min_proximity_gap)));
    }
    Ok(format!("100 points per member, no violations ({})", notes.join(", ")))
}

fn picard() -> Outcome {
    let opts = EngineOptions::default();
    let ap = ApplyOptions::default();
    let sched = RadiusSchedule::spanning(2.0, 12.0, 6).map_err(err("schedule"))?;
    let e = make_exp_poly(&[(c(1.0, 0.0), c(1.0, 0.0))]).map_err(err("exp"))?;
    let d_minus_i = OperatorExpr::linear(vec![(c(1.0, 0.0), OperatorExpr::derivative(1)), (c(-1.0, 0.0), OperatorExpr::identity())]);
    let a = picard_check(&e, &d_minus_i, &[konst(0.0)], &sched, &opts, &ap).map_err(err("exp"))?;
    let sn = make_jacobi_sn(0.5).map_err(err("sn"))?;
    let s = 1.581_138_830_084_189_8;
    let cands = [konst(0.0), konst(s), konst(-s), konst(1.0), konst(-1.0)];
    let b = picard_check(&sn, &OperatorExpr::derivative(2), &cands, &sched, &opts, &ap).map_err(err("sn"))?;
    let z = picard_check(&identity(), &OperatorExpr::derivative(1), &[konst(0.0)], &sched, &opts, &ap).map_err(err("z"))?;
    let z_status = z.candidates.first().map(|c| c.status.to_string()).unwrap_or_default();
    let ok = a.verdict == PicardVerdict::InKernel
        && a.f_residual < 1e-9
        && b.verdict.to_string() == "threshold 4 not met, no contradiction"
        && z_status == "not exceptional";
    check(ok, format!("exp: {} ({:.1e}); sn: {}; z: {z_status}", a.verdict, a.f_residual, b.verdict))
}

fn valiron() -> Outcome {
    let radii: Vec<f64> = (0..16).map(|j| 10.0 * 2f64.powi(j)).collect();
    let mut got = Vec::new();
    for (p, expect) in [(2u32, (0u32, 1u32)), (3, (1, 3)), (4, (1, 2))] {
        let m = SyntheticDivisorModel::from_valiron(p, 0.6, &radii).map_err(err("model"))?;
        let v = synthetic_valiron(&m).map_err(err("valiron"))?;
        let exact = expect.0 as f64 / expect.1 as f64;
        if v.bound_fraction != expect || (v.bound - exact).abs() > 1e-15 || !v.consistent {
            return Err(format!("p = {p}: bound {:?} consistent {}", v.bound_fraction, v.consistent));
        }
        got.push(format!("{}/{}", v.bound_fraction.0, v.bound_fraction.1));
    }
    let m = SyntheticDivisorModel::from_valiron(4, 0.3, &radii).map_err(err("model"))?;
    let v = synthetic_valiron(&m).map_err(err("valiron"))?;
    check(!v.consistent, format!("bounds {}; p = 4, Delta = 0.3 consistent = {}", got.join(" "), v.consistent))
}

fn scenarios_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios")
}

fn csv_files(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut out: Vec<(String, Vec<u8>)> = std::fs::read_dir(dir)
        .map(|it| {
            it.filter_map(|e| e.ok())
                .filter(|e| e.path().extension().is_some_and(|x| x == "csv"))
                .map(|e| (e.file_name().to_string_lossy().into_owned(), std::fs::read(e.path()).unwrap_or_default()))
                .collect()
        })
        .unwrap_or_default();
    out.sort();
    out
}

fn reproducible() -> Outcome {
    let mut names: Vec<PathBuf> = std::fs::read_dir(scenarios_dir())
        .map_err(err("scenarios"))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "json") && !p.to_string_lossy().contains("invalid"))
        .collect();
    names.sort();
    let mut files = 0;
    for path in &names {
        let mut runs = Vec::new();
        for threads in [1, 4] {
            let dir = tempfile::tempdir().map_err(err("tempdir"))?;
            let opts = RunOptions { out: Some(dir.path().to_path_buf()), threads: Some(threads), strict: false };
            run_path(path, &opts).map_err(err(&path.display().to_string()))?;
            runs.push(csv_files(dir.path()));
        }
        if runs[0].is_empty() || runs[0] != runs[1] {
            return Err(format!("{}: tables differ between runs", path.display()));
        }
        files += runs[0].len();
    }
    Ok(format!("{} scenarios, {files} tables byte-identical across runs with 1 and 4 threads", names.len()))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("Jensen identity", jensen_identity),
        ("second main theorem suite", second_main_theorem),
        ("sn deficiencies", sn_deficiencies),
        ("growth laws", growth_laws),
        ("divisor engine vs closed form", engine_vs_oracle),
        ("pointwise inequalities", pointwise),
        ("Picard-type checks", picard),
        ("Valiron bounds", valiron),
        ("reproducible tables", reproducible),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let res = f();
        let secs = start.elapsed().as_secs_f64();
        match res {
            Ok(msg) => println!("PASS criterion {}: {name}: {msg} [{secs:.1}s]", i + 1),
            Err(msg) => {
                failed += 1;
                println!("FAIL criterion {}: {name}: {msg} [{secs:.1}s]", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
