use std::path::Path;

use calplan::analytic::comparison_row;
use calplan::identification::{
    covariance, identify as run_identify, read_measurements_csv, IdentifySettings,
};
use calplan::kinematics::{parse_model, KinematicModel};
use calplan::metrics::{a_criterion, d_criterion, d_star, rho0_squared, screen_parameters};
use calplan::models::SHIPPED;
use calplan::montecarlo::{
    random_plan_baseline, run_campaign, BaselineSummary, CampaignSpec, Perturbation, Truth,
};
use calplan::optimizer::{
    compare_plans, optimize_plan, sample_plan, stream_rng, DesignProblem, OptimizerSettings,
    WorkspaceBox,
};
use calplan::plan::{read_plan_csv, write_plan_csv};
use calplan::{Plan, TestPose};

use crate::report::*;
use crate::{
    AnalyticArgs, BaselineArgs, CliError, CliResult, CompareArgs, DesignArgs, EvaluateArgs,
    IdentifyArgs, ScreenArgs, SimulateArgs,
};

fn read_text(path: &Path) -> CliResult<String> {
    std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })
}

fn load_model(spec: &str) -> CliResult<KinematicModel> {
    if let Some(name) = spec.strip_prefix("builtin:") {
        let file = format!("{name}.model");
        let (_, text) = SHIPPED
            .iter()
            .find(|(f, _)| *f == file)
            .ok_or_else(|| CliError::Usage(format!("unknown built-in model `{name}`")))?;
        return Ok(parse_model(text, &file)?);
    }
    let text = read_text(Path::new(spec))?;
    Ok(parse_model(&text, spec)?)
}

fn load_plan(path: &Path) -> CliResult<Plan> {
    let text = read_text(path)?;
    Ok(read_plan_csv(&text, &path.display().to_string())?)
}

fn workspace_box(w: &[f64; 6]) -> CliResult<WorkspaceBox> {
    Ok(WorkspaceBox::new([w[0], w[1], w[2]], [w[3], w[4], w[5]])?)
}

fn path_str(p: &Path) -> String {
    p.display().to_string()
}

fn baseline_section(b: &BaselineSummary, optimum: Option<f64>) -> BaselineSection {
    BaselineSection {
        n_plans: b.n_plans,
        n_singular: b.n_singular,
        min_rho0: b.min,
        mean_rho0: b.mean,
        max_rho0: b.max,
        improvement_vs_min_percent: optimum.map(|r| 100.0 * (1.0 - r / b.min)),
        improvement_vs_mean_percent: optimum.map(|r| 100.0 * (1.0 - r / b.mean)),
    }
}

pub fn design(a: &DesignArgs) -> CliResult<()> {
    let model = load_model(&a.model.model)?;
    let mut problem = DesignProblem::new(
        model,
        TestPose::new(a.pose.test_pose.0.clone()),
        a.m,
        a.sigma,
    )?;
    if let Some(limits) = &a.joint_limits {
        problem = problem.with_joint_limits(limits.0.clone())?;
    }
    if let Some(w) = &a.workspace {
        problem = problem.with_workspace(workspace_box(w)?);
    }
    let settings = OptimizerSettings {
        n_starts: a.starts,
        filter_quantile: a.filter_quantile,
        local_tol: a.local_tol,
        max_local_iters: a.max_local_iters,
        rng_seed: a.seed,
    };
    let result = optimize_plan(&problem, &settings)?;
    eprintln!(
        "design: {} starts, {} local evaluations, {:.3} s",
        result.starts.n_starts,
        result.starts.local_evaluations,
        result.elapsed.as_secs_f64()
    );
    let baseline = if a.baseline > 0 {
        // a separate stream family from the optimizer starts
        let b = random_plan_baseline(&problem, a.baseline, a.seed ^ 0x5eed_ba5e)?;
        Some(baseline_section(&b, Some(result.rho0)))
    } else {
        None
    };
    write_file(&a.out_plan, &write_plan_csv(&result.plan))?;

    let mut manifest = Manifest::new("design", Some(a.seed));
    manifest.inputs.push(a.model.model.clone());
    manifest.outputs.push(path_str(&a.out_plan));
    if let Some(r) = &a.report {
        manifest.outputs.push(path_str(r));
    }
    let rep = DesignReport {
        manifest,
        design: DesignSection {
            m: a.m,
            sigma: a.sigma,
            test_pose: a.pose.test_pose.0.clone(),
            rho0: result.rho0,
            rho0_sq: result.rho0_sq,
            d_criterion: result.d_criterion,
            a_criterion: result.a_criterion,
            n_starts: result.starts.n_starts,
            n_singular_starts: result.starts.n_singular,
            n_refined: result.starts.n_refined,
            best_start_rho0: result.starts.best_start_rho0_sq.sqrt(),
            median_start_rho0: result.starts.median_start_rho0_sq.sqrt(),
            local_evaluations: result.starts.local_evaluations,
        },
        baseline,
        plan: plan_rows(&result.plan),
    };
    emit(a.report.as_deref(), &to_toml(&rep)?)
}

pub fn evaluate(a: &EvaluateArgs) -> CliResult<()> {
    let model = load_model(&a.model.model)?;
    let plan = load_plan(&a.plan)?;
    plan.check_against(&model)?;
    let params = model.nominal_parameters();
    let q0 = TestPose::new(a.pose.test_pose.0.clone());
    let rho0_sq = rho0_squared(&model, &params, &plan, &q0, a.sigma)?;
    let ds = d_star(&model, &params, &plan)?;
    let singular = !rho0_sq.is_finite();
    let parameter = if singular {
        Vec::new()
    } else {
        let cov = covariance(&model, &params, &plan, a.sigma)?;
        model
            .identifiable_names()
            .into_iter()
            .enumerate()
            .map(|(k, name)| ParameterStd {
                name,
                std: cov[(k, k)].sqrt(),
            })
            .collect()
    };
    let mut manifest = Manifest::new("evaluate", None);
    manifest.inputs = vec![a.model.model.clone(), path_str(&a.plan)];
    if let Some(r) = &a.report {
        manifest.outputs.push(path_str(r));
    }
    let rep = EvaluateReport {
        manifest,
        evaluation: EvaluationSection {
            total_measurements: plan.total_measurements(),
            sigma: a.sigma,
            test_pose: q0.q0.clone(),
            rho0: rho0_sq.sqrt(),
            rho0_sq,
            d_criterion: d_criterion(&model, &params, &plan)?,
            a_criterion: a_criterion(&model, &params, &plan)?,
            correlation_penalty: ds.correlation_penalty,
            information_det: ds.information_det,
            singular,
        },
        parameter,
    };
    emit(a.report.as_deref(), &to_toml(&rep)?)
}

pub fn simulate(a: &SimulateArgs) -> CliResult<()> {
    if a.trials == 0 {
        return Err(CliError::Usage("--trials must be at least 1".into()));
    }
    let model = load_model(&a.model.model)?;
    let plan = load_plan(&a.plan)?;
    plan.check_against(&model)?;
    let nominal = model.nominal_parameters();
    let q0 = TestPose::new(a.pose.test_pose.0.clone());
    let truth = if a.nominal_truth {
        Truth::Fixed(nominal.clone())
    } else {
        Truth::Perturbed(Perturbation::default())
    };
    let spec = CampaignSpec {
        model: &model,
        nominal: &nominal,
        truth,
        plan: &plan,
        test_pose: &q0,
        sigma: a.sigma,
        n_trials: a.trials,
        seed: a.seed,
        identify: IdentifySettings {
            max_iter: a.max_iter,
            ..Default::default()
        },
    };
    let campaign = run_campaign(&spec)?;
    let predicted = rho0_squared(&model, &nominal, &plan, &q0, a.sigma)?.sqrt();
    let st = campaign.stats;

    let mut manifest = Manifest::new("simulate", Some(a.seed));
    manifest.inputs = vec![a.model.model.clone(), path_str(&a.plan)];
    if let Some(p) = &a.out_csv {
        let mut csv = String::from("trial,test_pose_error,dx,dy,dz\n");
        for t in &campaign.trials {
            let d = t.displacement;
            csv.push_str(&format!(
                "{},{},{},{},{}\n",
                t.index, t.test_pose_error, d.x, d.y, d.z
            ));
        }
        write_file(p, &csv)?;
        manifest.outputs.push(path_str(p));
    }
    if let Some(p) = &a.plot {
        let title = format!("{} ({} trials)", path_str(&a.plan), st.n_trials);
        write_file(p, &crate::svg::scatter(&campaign, &title, predicted))?;
        manifest.outputs.push(path_str(p));
    }
    if let Some(r) = &a.report {
        manifest.outputs.push(path_str(r));
    }
    let rep = SimulateReport {
        manifest,
        campaign: CampaignSection {
            sigma: a.sigma,
            test_pose: q0.q0.clone(),
            truth: if a.nominal_truth {
                "nominal"
            } else {
                "perturbed"
            },
            n_trials: st.n_trials,
            n_failed: st.n_failed,
            mean_error: st.mean_error,
            std_error: st.std_error,
            rms_error: st.rms_error,
            p5_error: st.percentiles.p5,
            p50_error: st.percentiles.p50,
            p95_error: st.percentiles.p95,
            predicted_rho0: predicted,
            rms_over_predicted: if predicted > 0.0 {
                st.rms_error / predicted
            } else {
                f64::NAN
            },
        },
    };
    emit(a.report.as_deref(), &to_toml(&rep)?)
}

pub fn baseline(a: &BaselineArgs) -> CliResult<()> {
    let model = load_model(&a.model.model)?;
    let mut problem = DesignProblem::new(
        model,
        TestPose::new(a.pose.test_pose.0.clone()),
        a.m,
        a.sigma,
    )?;
    if let Some(w) = &a.workspace {
        problem = problem.with_workspace(workspace_box(w)?);
    }
    let b = random_plan_baseline(&problem, a.plans, a.seed)?;
    let mut manifest = Manifest::new("baseline", Some(a.seed));
    manifest.inputs.push(a.model.model.clone());
    if let Some(r) = &a.report {
        manifest.outputs.push(path_str(r));
    }
    let rep = BaselineReport {
        manifest,
        baseline: baseline_section(&b, None),
    };
    emit(a.report.as_deref(), &to_toml(&rep)?)
}

pub fn compare(a: &CompareArgs) -> CliResult<()> {
    let model = load_model(&a.model.model)?;
    let mut plans = Vec::new();
    for (name, path) in &a.plans {
        let plan = load_plan(Path::new(path))?;
        plan.check_against(&model)?;
        plans.push((name.clone(), plan));
    }
    let q0 = TestPose::new(a.pose.test_pose.0.clone());
    let cmp = compare_plans(&model, &model.nominal_parameters(), &plans, &q0, a.sigma)?;
    let mut manifest = Manifest::new("compare", None);
    manifest.inputs.push(a.model.model.clone());
    manifest
        .inputs
        .extend(a.plans.iter().map(|(_, p)| p.clone()));
    if let Some(r) = &a.report {
        manifest.outputs.push(path_str(r));
    }
    let rep = CompareReport {
        manifest,
        plan: cmp
            .scores
            .iter()
            .map(|s| ScoreRow {
                name: s.name.clone(),
                rho0: s.rho0,
                rho0_sq: s.rho0_sq,
                d_criterion: s.d_criterion,
                a_criterion: s.a_criterion,
            })
            .collect(),
        pair: cmp
            .pairs
            .iter()
            .map(|p| PairRow {
                from: p.from.clone(),
                to: p.to.clone(),
                gain_percent: p.gain_percent,
                reduction_percent: p.reduction_percent,
            })
            .collect(),
    };
    emit(a.report.as_deref(), &to_toml(&rep)?)
}

pub fn analytic_2r(a: &AnalyticArgs) -> CliResult<()> {
    let angles = match &a.q20 {
        Some(list) => list.0.clone(),
        None => (0..=6).map(|k| f64::from(30 * k).to_radians()).collect(),
    };
    let mut rows = Vec::new();
    for q20 in angles {
        let r = comparison_row(q20, a.m, a.sigma)?;
        rows.push(AnalyticRow {
            q20: r.q20,
            q20_deg: r.q20.to_degrees(),
            m: r.m,
            sigma: r.sigma,
            s_star: r.s_star,
            plan_q2_deg: r.plan.iter().map(|v| v.to_degrees()).collect(),
            plan_q2: r.plan,
            rho0_sq: r.rho0_sq,
            rho_d_sq: r.rho_d_sq,
            gain_percent: r.gain_percent,
            reference_rho0_sq: r.reference.map(|p| p.rho0_sq),
            reference_gain_percent: r.reference.map(|p| p.gain_percent),
            discrepancy: r.discrepancy,
        });
    }
    let mut manifest = Manifest::new("analytic-2r", None);
    if let Some(r) = &a.report {
        manifest.outputs.push(path_str(r));
    }
    emit(
        a.report.as_deref(),
        &to_toml(&AnalyticReport {
            manifest,
            row: rows,
        })?,
    )
}

pub fn identify(a: &IdentifyArgs) -> CliResult<()> {
    let model = load_model(&a.model.model)?;
    let data = read_measurements_csv(&read_text(&a.measurements)?, &path_str(&a.measurements))?;
    let nominal = model.nominal_parameters();
    let id = run_identify(
        &model,
        &nominal,
        &data,
        IdentifySettings {
            tol: a.tol,
            max_iter: a.max_iter,
        },
    )?;
    let mut manifest = Manifest::new("identify", None);
    manifest.inputs = vec![a.model.model.clone(), path_str(&a.measurements)];
    if let Some(r) = &a.report {
        manifest.outputs.push(path_str(r));
    }
    let rep = IdentifyReport {
        manifest,
        identification: IdentificationSection {
            records: data.len(),
            iterations: id.iterations,
            final_residual_norm: id.final_residual_norm,
            correction_history: id.correction_history.clone(),
        },
        parameter: model
            .parameters()
            .iter()
            .enumerate()
            .map(|(i, p)| IdentifiedParameter {
                name: p.name.clone(),
                identifiable: p.identifiable,
                nominal: nominal[i],
                identified: id.params[i],
                delta: id.params[i] - nominal[i],
            })
            .collect(),
    };
    emit(a.report.as_deref(), &to_toml(&rep)?)
}

pub fn screen(a: &ScreenArgs) -> CliResult<()> {
    let model = load_model(&a.model.model)?;
    // only the joint limits matter for sampling probes
    let any_pose = TestPose::new(
        model
            .joint_limits()
            .iter()
            .map(|l| 0.5 * (l.min + l.max))
            .collect(),
    );
    let problem = DesignProblem::new(model.clone(), any_pose, a.probes.max(1), 1.0)?;
    let plan = sample_plan(&problem, &mut stream_rng(a.seed, 0))?;
    let probes: Vec<_> = plan.expanded().cloned().collect();
    let s = screen_parameters(&model, &model.nominal_parameters(), &probes)?;
    let mut manifest = Manifest::new("screen", Some(a.seed));
    manifest.inputs.push(a.model.model.clone());
    if let Some(r) = &a.report {
        manifest.outputs.push(path_str(r));
    }
    let rep = ScreenReport {
        manifest,
        parameter: model
            .parameters()
            .iter()
            .zip(s.keep.iter().zip(&s.max_column_norm))
            .map(|(p, (k, n))| ScreenedParameter {
                name: p.name.clone(),
                keep: *k,
                max_column_norm: *n,
            })
            .collect(),
        null_combination: s
            .null_combinations
            .iter()
            .map(|d| NullCombination {
                relative_singular_value: d.relative_singular_value,
                combination: d
                    .components
                    .iter()
                    .map(|(n, c)| format!("{c:+.6}*{n}"))
                    .collect::<Vec<_>>()
                    .join(" "),
            })
            .collect(),
    };
    emit(a.report.as_deref(), &to_toml(&rep)?)
}
