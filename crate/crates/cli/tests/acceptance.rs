//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any
//! failure. Run with `cargo test -p calplan-cli --test acceptance`.

use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::Instant;

use calplan::analytic::{comparison_row, cov_2r, rho0_2r, rho0_min, TwoLinkCase};
use calplan::identification::{covariance, write_measurements_csv, IdentifySettings};
use calplan::kinematics::KinematicModel;
use calplan::metrics::rho0_squared;
use calplan::models::{six_r, two_link, TwoLinkParameters};
use calplan::montecarlo::{
    random_plan_baseline, run_campaign, simulate_measurements, CampaignSpec, Perturbation, Truth,
};
use calplan::optimizer::{
    optimize_plan, replicate_plan, sample_plan, stream_rng, DesignProblem, OptimizerSettings,
};
use calplan::plan::read_plan_csv;
use calplan::{Plan, TestPose};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
}

fn load_plan(name: &str) -> Plan {
    let p = fixture(name);
    read_plan_csv(&std::fs::read_to_string(&p).unwrap(), name).unwrap()
}

fn deg(v: &[f64]) -> TestPose {
    TestPose::new(v.iter().map(|d| d.to_radians()).collect())
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn rms_of(
    model: &KinematicModel,
    plan: &Plan,
    q0: &TestPose,
    sigma: f64,
    trials: usize,
    seed: u64,
) -> (f64, f64) {
    let nominal = model.nominal_parameters();
    let campaign = run_campaign(&CampaignSpec {
        model,
        nominal: &nominal,
        truth: Truth::Perturbed(Perturbation::default()),
        plan,
        test_pose: q0,
        sigma,
        n_trials: trials,
        seed,
        identify: IdentifySettings::default(),
    })
    .unwrap();
    let predicted = rho0_squared(model, &nominal, plan, q0, sigma)
        .unwrap()
        .sqrt();
    (campaign.stats.rms_error, predicted)
}

fn reduction(better: f64, other: f64) -> f64 {
    100.0 * (1.0 - better / other)
}

fn two_link_table() -> Outcome {
    let mut worst_pct: f64 = 0.0;
    let mut notes = Vec::new();
    for (q, want_sq, want_gain) in [
        (0.0, 0.5, 41.0),
        (30.0, 0.75, 15.0),
        (90.0, 1.0, 0.0),
        (150.0, 0.75, 15.0),
        (180.0, 0.5, 41.0),
    ] {
        let r = comparison_row(f64::to_radians(q), 2, 1.0).map_err(|e| e.to_string())?;
        if (r.rho0_sq - want_sq).abs() > 1e-12 || r.discrepancy {
            return Err(format!("q20={q}: rho0^2={} expected {want_sq}", r.rho0_sq));
        }
        worst_pct = worst_pct.max((r.gain_percent - want_gain).abs());
    }
    for q in [60.0, 120.0] {
        let r = comparison_row(f64::to_radians(q), 2, 1.0).map_err(|e| e.to_string())?;
        let closed = 0.5 * (1.0 + f64::to_radians(q).sin());
        if (r.rho0_sq - closed).abs() > 1e-12
            || !r.discrepancy
            || r.reference.map(|p| p.rho0_sq) != Some(0.83)
        {
            return Err(format!(
                "q20={q}: rho0^2={} discrepancy={}",
                r.rho0_sq, r.discrepancy
            ));
        }
        notes.push(format!(
            "{q}deg {:.3} (reference 0.83 flagged as discrepancy)",
            r.rho0_sq
        ));
    }
    check(
        worst_pct <= 0.5,
        format!(
            "worst gain deviation {worst_pct:.2} points; {}",
            notes.join(", ")
        ),
    )
}

fn optimizer_vs_closed_form() -> Outcome {
    let model = two_link(1.0, 0.8, TwoLinkParameters::LinkLengths);
    let mut worst: f64 = 0.0;
    for m in 2..=4 {
        for k in 0..18 {
            let q20 = f64::from(10 * k).to_radians();
            let problem =
                DesignProblem::new(model.clone(), TestPose::new(vec![0.3, q20]), m, 1.0).unwrap();
            let got = optimize_plan(&problem, &OptimizerSettings::default())
                .unwrap()
                .rho0_sq;
            let want = rho0_min(
                &TwoLinkCase::new(1.0, 0.8, TwoLinkParameters::LinkLengths, 1.0, m, q20).unwrap(),
            );
            worst = worst.max(rel(got, want));
        }
    }
    check(
        worst <= 1e-6,
        format!("worst relative error {worst:.2e} over 54 cases"),
    )
}

fn monte_carlo_two_link() -> Outcome {
    let model = two_link(1.0, 0.8, TwoLinkParameters::LinkLengths);
    let q0 = deg(&[-45.0, 20.0]);
    let mut rms = Vec::new();
    let mut worst: f64 = 0.0;
    for (i, name) in [
        "lengths_narrow.csv",
        "lengths_d_optimal.csv",
        "lengths_optimal.csv",
    ]
    .iter()
    .enumerate()
    {
        let (r, p) = rms_of(&model, &load_plan(name), &q0, 1e-3, 10_000, 10 + i as u64);
        worst = worst.max(rel(r, p));
        rms.push(r);
    }
    let vs_d = reduction(rms[2], rms[1]);
    let vs_narrow = reduction(rms[2], rms[0]);
    check(
        worst <= 0.05 && (vs_d - 18.0).abs() <= 8.0 && (vs_narrow - 48.0).abs() <= 8.0,
        format!("rms vs predicted worst {:.2}%; reduction {vs_d:.1}% vs D-optimal, {vs_narrow:.1}% vs +-10deg", 100.0 * worst),
    )
}

fn four_parameter_case() -> Outcome {
    let full = two_link(1.0, 0.8, TwoLinkParameters::Both);
    let q0 = deg(&[-45.0, 20.0]);
    let mut rms = Vec::new();
    for (i, name) in ["full_narrow.csv", "full_d_optimal.csv", "full_optimal.csv"]
        .iter()
        .enumerate()
    {
        rms.push(rms_of(&full, &load_plan(name), &q0, 1e-3, 10_000, 20 + i as u64).0);
    }
    let vs_d = reduction(rms[2], rms[1]);
    let vs_narrow = reduction(rms[2], rms[0]);

    // joint-offset parameterization against its closed forms on random plans
    let offsets = two_link(1.0, 0.8, TwoLinkParameters::JointOffsets);
    let nominal = offsets.nominal_parameters();
    let mut worst: f64 = 0.0;
    for k in 0..200u64 {
        let m = 2 + (k % 4) as usize;
        let q20 = -3.0 + 6.0 * (k as f64) / 200.0;
        let problem =
            DesignProblem::new(offsets.clone(), TestPose::new(vec![0.7, q20]), m, 1e-3).unwrap();
        let plan = sample_plan(&problem, &mut stream_rng(99, k)).unwrap();
        let q2s: Vec<f64> = plan.expanded().map(|q| q[1]).collect();
        let case =
            TwoLinkCase::new(1.0, 0.8, TwoLinkParameters::JointOffsets, 1e-3, m, q20).unwrap();
        let want = rho0_2r(&case, &q2s).unwrap();
        let got = rho0_squared(&offsets, &nominal, &plan, problem.test_pose(), 1e-3).unwrap();
        worst = worst.max(rel(got, want));
        let cov = covariance(&offsets, &nominal, &plan, 1e-3).unwrap();
        let closed = cov_2r(&case, &q2s).unwrap();
        let scale = closed.abs().max();
        for (r, c) in [(0, 0), (0, 1), (1, 1)] {
            worst = worst.max((cov[(r, c)] - closed[(r, c)]).abs() / scale);
        }
    }
    check(
        (vs_d - 18.0).abs() <= 8.0 && (vs_narrow - 56.0).abs() <= 8.0 && worst <= 1e-9,
        format!("reduction {vs_d:.1}% vs D-optimal, {vs_narrow:.1}% vs narrow; offset closed forms worst {worst:.1e}"),
    )
}

fn covariance_law() -> Outcome {
    let model = two_link(1.0, 0.8, TwoLinkParameters::LinkLengths);
    let nominal = model.nominal_parameters();
    let plan = load_plan("lengths_optimal.csv");
    let q0 = deg(&[-45.0, 20.0]);
    let n = 100_000;
    let campaign = run_campaign(&CampaignSpec {
        model: &model,
        nominal: &nominal,
        truth: Truth::Fixed(nominal.clone()),
        plan: &plan,
        test_pose: &q0,
        sigma: 1e-3,
        n_trials: n,
        seed: 5,
        identify: IdentifySettings::default(),
    })
    .map_err(|e| e.to_string())?;
    let (mean, cov) = campaign.parameter_error_moments(&model);
    let want = covariance(&model, &nominal, &plan, 1e-3).unwrap();
    let mut worst: f64 = 0.0;
    let mut worst_z: f64 = 0.0;
    for r in 0..2 {
        for c in 0..2 {
            worst = worst.max(rel(cov[(r, c)], want[(r, c)]));
        }
        worst_z = worst_z.max(mean[r].abs() / (want[(r, r)] / n as f64).sqrt());
    }
    check(
        worst <= 0.05 && worst_z <= 3.0,
        format!(
            "worst entry deviation {:.2}%; largest bias {worst_z:.2} standard errors",
            100.0 * worst
        ),
    )
}

fn replication_law() -> Outcome {
    let mut worst: f64 = 0.0;
    let cases = [
        (
            two_link(1.0, 0.8, TwoLinkParameters::LinkLengths),
            deg(&[-45.0, 20.0]),
            3,
        ),
        (six_r(), deg(&[0.0, -30.0, 30.0, 0.0, 45.0, 0.0]), 4),
    ];
    for (model, q0, m) in cases {
        let problem = DesignProblem::new(model.clone(), q0.clone(), m, 1e-3).unwrap();
        let nominal = model.nominal_parameters();
        for s in 0..5 {
            let plan = sample_plan(&problem, &mut stream_rng(7, s)).unwrap();
            let base = rho0_squared(&model, &nominal, &plan, &q0, 1e-3).unwrap();
            for k in 2..=4u32 {
                let rep = replicate_plan(&plan, k).unwrap();
                let got = rho0_squared(&model, &nominal, &rep, &q0, 1e-3).unwrap();
                worst = worst.max(rel(got, base / f64::from(k)));
            }
        }
    }
    check(worst <= 1e-12, format!("worst relative error {worst:.1e}"))
}

fn six_r_property() -> Outcome {
    let q0 = deg(&[0.0, -30.0, 30.0, 0.0, 45.0, 0.0]);
    let problem = DesignProblem::new(six_r(), q0, 4, 1e-3).unwrap();
    let start = Instant::now();
    let best = optimize_plan(
        &problem,
        &OptimizerSettings {
            rng_seed: 1,
            ..Default::default()
        },
    )
    .unwrap();
    let base = random_plan_baseline(&problem, 20_000, 2).unwrap();
    let improvement = reduction(best.rho0, base.mean);
    check(
        best.rho0 < base.min && improvement >= 40.0,
        format!(
            "optimum {:.3e} m, baseline min {:.3e} m, mean {:.3e} m ({improvement:.1}% below mean), {:.1} s",
            best.rho0,
            base.min,
            base.mean,
            start.elapsed().as_secs_f64()
        ),
    )
}

fn run_cli(dir: &Path, args: &[&str], threads: &str) -> Result<(), String> {
    let out = Command::new(env!("CARGO_BIN_EXE_calplan"))
        .current_dir(dir)
        .env("RAYON_NUM_THREADS", threads)
        .args(args)
        .output()
        .map_err(|e| e.to_string())?;
    if !out.status.success() {
        return Err(format!(
            "{args:?}: {}",
            String::from_utf8_lossy(&out.stderr)
        ));
    }
    std::fs::write(dir.join("stdout.txt"), &out.stdout).map_err(|e| e.to_string())
}

fn determinism() -> Outcome {
    let model = two_link(1.0, 0.8, TwoLinkParameters::Both);
    let plan = load_plan("full_optimal.csv");
    let mut truth = model.nominal_parameters();
    truth[0] += 2e-3;
    truth[3] += 0.01;
    let data = simulate_measurements(
        &model,
        &truth,
        &plan.replicate(4).unwrap(),
        1e-4,
        &mut stream_rng(3, 0),
    )
    .unwrap();
    let meas = write_measurements_csv(&data);

    let a = fixture("lengths_narrow.csv");
    let c = fixture("lengths_optimal.csv");
    let (a, c) = (a.to_str().unwrap(), c.to_str().unwrap());
    let plan_a = format!("a={a}");
    let plan_c = format!("c={c}");
    let pose = ["--test-pose=-45deg,20deg"];
    let runs: Vec<Vec<&str>> = vec![
        [
            &[
                "design",
                "--model",
                "builtin:two_link",
                "--m",
                "3",
                "--seed",
                "4",
                "--out-plan",
                "plan.csv",
                "--report",
                "r.toml",
            ][..],
            &pose[..],
        ]
        .concat(),
        [&[
            "design",
            "--model",
            "builtin:six_r",
            "--m",
            "4",
            "--starts",
            "16",
            "--baseline",
            "200",
            "--max-local-iters",
            "50",
            "--out-plan",
            "plan.csv",
            "--report",
            "r.toml",
            "--test-pose=0,-30deg,30deg,0,45deg,0",
        ][..]]
        .concat(),
        [
            &[
                "evaluate",
                "--model",
                "builtin:two_link",
                "--plan",
                c,
                "--report",
                "r.toml",
            ][..],
            &pose[..],
        ]
        .concat(),
        [
            &[
                "simulate",
                "--model",
                "builtin:two_link_full",
                "--plan",
                c,
                "--trials",
                "500",
                "--seed",
                "9",
                "--out-csv",
                "t.csv",
                "--plot",
                "t.svg",
                "--report",
                "r.toml",
            ][..],
            &pose[..],
        ]
        .concat(),
        [
            &[
                "baseline",
                "--model",
                "builtin:two_link",
                "--m",
                "2",
                "--plans",
                "500",
                "--seed",
                "9",
                "--report",
                "r.toml",
            ][..],
            &pose[..],
        ]
        .concat(),
        [
            &[
                "compare",
                "--model",
                "builtin:two_link",
                "--plan",
                &plan_a,
                "--plan",
                &plan_c,
                "--report",
                "r.toml",
            ][..],
            &pose[..],
        ]
        .concat(),
        vec!["analytic-2r", "--m", "3", "--report", "r.toml"],
        vec![
            "identify",
            "--model",
            "builtin:two_link_full",
            "--measurements",
            "meas.csv",
            "--report",
            "r.toml",
        ],
        vec![
            "screen",
            "--model",
            "builtin:six_r",
            "--seed",
            "9",
            "--report",
            "r.toml",
        ],
    ];
    let outputs = ["plan.csv", "r.toml", "t.csv", "t.svg", "stdout.txt"];
    for args in &runs {
        let mut snapshots = Vec::new();
        for threads in ["1", "4"] {
            let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
            std::fs::write(dir.path().join("meas.csv"), &meas).map_err(|e| e.to_string())?;
            run_cli(dir.path(), args, threads)?;
            snapshots.push(outputs.map(|f| std::fs::read(dir.path().join(f)).ok()));
        }
        if snapshots[0] != snapshots[1] {
            return Err(format!("`{}` outputs differ between runs", args[0]));
        }
    }
    Ok(format!(
        "{} command runs byte-identical across reruns and thread counts",
        runs.len()
    ))
}

fn main() {
    let criteria: [Criterion; 8] = [
        ("1 two-link closed-form table", two_link_table),
        (
            "2 optimizer vs closed-form optimum",
            optimizer_vs_closed_form,
        ),
        (
            "3 Monte Carlo rms and gains (link lengths)",
            monte_carlo_two_link,
        ),
        (
            "4 four-parameter gains and offset closed forms",
            four_parameter_case,
        ),
        ("5 covariance law and unbiasedness", covariance_law),
        ("6 replication law", replication_law),
        ("7 six-axis optimum vs random baseline", six_r_property),
        ("8 CLI determinism", determinism),
    ];
    let mut failed = 0;
    for (name, f) in criteria {
        let t = Instant::now();
        let outcome = std::panic::catch_unwind(f).unwrap_or_else(|_| Err("panicked".into()));
        let secs = t.elapsed().as_secs_f64();
        match outcome {
            Ok(d) => println!("PASS [{name}] {d} ({secs:.1} s)"),
            Err(d) => {
                failed += 1;
                println!("FAIL [{name}] {d} ({secs:.1} s)");
            }
        }
    }
    if failed > 0 {
        eprintln!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
