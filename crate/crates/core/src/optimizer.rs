//! Design of calibration plans that minimize the expected position error
//! at a test pose.
//!
//! The search is a multi-start pattern search. Random plans are drawn inside
//! the joint limits (and an optional workspace box), scored, and the best
//! fraction of them is refined by Hooke-Jeeves pattern search (coordinate
//! sweeps plus extrapolation moves) over all `m * n_joints` joint values. Trial steps are projected onto the joint box.
//!
//! Randomness: start `k` draws from `ChaCha8Rng::seed_from_u64(seed)` switched
//! to stream `k`, so every start is reproducible on its own and the result
//! does not depend on thread scheduling.

use std::cmp::Ordering;
use std::time::{Duration, Instant};

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::identification::pairwise_sum;
use crate::kinematics::jacobian::jacobian_unchecked;
use crate::kinematics::{
    forward_position_unchecked, Configuration, JointLimit, KinematicModel, Position,
};
use crate::metrics::{a_criterion, d_criterion, rho0_squared, weighted_trace};
use crate::plan::{Plan, TestPose};

/// Axis-aligned box the measured point must stay in (m).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WorkspaceBox {
    pub min: [f64; 3],
    pub max: [f64; 3],
}

impl WorkspaceBox {
    pub fn new(min: [f64; 3], max: [f64; 3]) -> Result<Self> {
        if (0..3).any(|k| !(min[k].is_finite() && max[k].is_finite() && min[k] < max[k])) {
            return Err(Error::input(
                "workspace box needs finite min < max on every axis",
            ));
        }
        Ok(Self { min, max })
    }

    pub fn contains(&self, p: &Position) -> bool {
        (0..3).all(|k| p[k] >= self.min[k] && p[k] <= self.max[k])
    }
}

/// Smallest plan size that can possibly identify `n_identifiable`
/// parameters from three coordinates per measurement.
pub fn identifiability_floor(n_identifiable: usize) -> usize {
    n_identifiable.div_ceil(3)
}

#[derive(Debug, Clone, PartialEq)]
pub struct DesignProblem {
    model: KinematicModel,
    params: DVector<f64>,
    test_pose: TestPose,
    m: usize,
    workspace: Option<WorkspaceBox>,
    sigma: f64,
}

impl DesignProblem {
    /// Plan of `m` configurations for `model` at its nominal parameters,
    /// within the model's joint limits.
    pub fn new(model: KinematicModel, test_pose: TestPose, m: usize, sigma: f64) -> Result<Self> {
        let floor = identifiability_floor(model.n_identifiable());
        if model.n_identifiable() == 0 {
            return Err(Error::input("model has no identifiable parameters"));
        }
        if m < floor {
            return Err(Error::input(format!(
                "m = {m} is below the identifiability floor: {} parameters need at least {floor} measurements of 3 coordinates",
                model.n_identifiable()
            )));
        }
        if !(sigma.is_finite() && sigma >= 0.0) {
            return Err(Error::input("sigma must be finite and non-negative"));
        }
        model.check_configuration(&test_pose.q0)?;
        if !model.within_limits(&test_pose.q0) {
            return Err(Error::input("test pose violates joint limits"));
        }
        let params = model.nominal_parameters();
        Ok(Self {
            model,
            params,
            test_pose,
            m,
            workspace: None,
            sigma,
        })
    }

    pub fn with_joint_limits(mut self, limits: Vec<JointLimit>) -> Result<Self> {
        self.model = self.model.with_joint_limits(limits)?;
        if !self.model.within_limits(&self.test_pose.q0) {
            return Err(Error::input("test pose violates joint limits"));
        }
        Ok(self)
    }

    pub fn with_workspace(mut self, workspace: WorkspaceBox) -> Self {
        self.workspace = Some(workspace);
        self
    }

    pub fn with_params(mut self, params: DVector<f64>) -> Result<Self> {
        self.model.check_params(&params)?;
        self.params = params;
        Ok(self)
    }

    pub fn model(&self) -> &KinematicModel {
        &self.model
    }

    pub fn params(&self) -> &DVector<f64> {
        &self.params
    }

    pub fn test_pose(&self) -> &TestPose {
        &self.test_pose
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn workspace(&self) -> Option<&WorkspaceBox> {
        self.workspace.as_ref()
    }

    fn config_feasible(&self, q: &[f64]) -> bool {
        self.model.within_limits(q)
            && self.workspace.as_ref().is_none_or(|w| {
                w.contains(&forward_position_unchecked(
                    &self.model,
                    self.params.as_slice(),
                    q,
                ))
            })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimizerSettings {
    pub n_starts: usize,
    /// Fraction of the best-scoring starts refined by local search.
    pub filter_quantile: f64,
    /// Pattern-search step at which refinement stops (rad).
    pub local_tol: f64,
    /// Cap on pattern-search iterations (exploratory sweeps plus pattern
    /// moves) per start.
    pub max_local_iters: usize,
    pub rng_seed: u64,
}

impl Default for OptimizerSettings {
    fn default() -> Self {
        Self {
            n_starts: 512,
            filter_quantile: 0.1,
            local_tol: 1e-8,
            max_local_iters: 1_000,
            rng_seed: 0,
        }
    }
}

impl OptimizerSettings {
    pub fn validate(&self) -> Result<()> {
        if self.n_starts == 0 {
            return Err(Error::input("n_starts must be at least 1"));
        }
        if !(self.filter_quantile > 0.0 && self.filter_quantile <= 1.0) {
            return Err(Error::input("filter_quantile must lie in (0, 1]"));
        }
        if !(self.local_tol > 0.0 && self.local_tol.is_finite()) {
            return Err(Error::input("local_tol must be positive"));
        }
        Ok(())
    }

    fn survivors(&self, n: usize) -> usize {
        ((self.filter_quantile * n as f64).ceil() as usize).clamp(1, n)
    }
}

/// Attempts per configuration before sampling gives up on the workspace box.
const MAX_REJECTIONS: usize = 10_000;

/// RNG for start (or trial) `index` under `seed`.
pub fn stream_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Draws a plan of `problem.m()` configurations uniformly within the joint
/// limits, redrawing any configuration outside the workspace box.
pub fn sample_plan<R: Rng + ?Sized>(problem: &DesignProblem, rng: &mut R) -> Result<Plan> {
    let limits = problem.model.joint_limits();
    let mut configs = Vec::with_capacity(problem.m);
    for _ in 0..problem.m {
        let mut attempts = 0;
        let q = loop {
            let q: Configuration = limits
                .iter()
                .map(|l| rng.random_range(l.min..=l.max))
                .collect();
            if problem.config_feasible(&q) {
                break q;
            }
            attempts += 1;
            if attempts >= MAX_REJECTIONS {
                return Err(Error::Infeasible(format!(
                    "no configuration inside the workspace box after {MAX_REJECTIONS} draws"
                )));
            }
        };
        configs.push(q);
    }
    Plan::from_configurations(configs)
}

#[derive(Debug, Clone, PartialEq)]
pub struct StartStats {
    pub n_starts: usize,
    /// Starts whose information matrix was singular.
    pub n_singular: usize,
    /// Starts refined by local search.
    pub n_refined: usize,
    /// Best, median and worst finite start scores (m^2).
    pub best_start_rho0_sq: f64,
    pub median_start_rho0_sq: f64,
    pub worst_start_rho0_sq: f64,
    /// Objective evaluations spent in local search.
    pub local_evaluations: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DesignReport {
    pub plan: Plan,
    pub rho0_sq: f64,
    pub rho0: f64,
    pub d_criterion: f64,
    pub a_criterion: f64,
    pub starts: StartStats,
    /// Wall-clock time of the whole run. Not deterministic; keep it out of
    /// reproducible outputs.
    pub elapsed: Duration,
}

/// Caches per-configuration `J^T J` blocks so one coordinate move costs
/// a single Jacobian.
struct Evaluator<'a> {
    problem: &'a DesignProblem,
    j0: DMatrix<f64>,
}

impl<'a> Evaluator<'a> {
    fn new(problem: &'a DesignProblem) -> Self {
        let j0 = jacobian_unchecked(
            &problem.model,
            problem.params.as_slice(),
            &problem.test_pose.q0,
        );
        Self { problem, j0 }
    }

    fn block(&self, q: &[f64]) -> DMatrix<f64> {
        let j = jacobian_unchecked(&self.problem.model, self.problem.params.as_slice(), q);
        j.transpose() * j
    }

    /// Unscaled objective `trace(J0 M^-1 J0^T)`.
    fn objective(&self, blocks: &[DMatrix<f64>]) -> f64 {
        // same summation as `information_matrix`, so the final rescoring agrees bit for bit
        weighted_trace(&pairwise_sum(blocks), &self.j0)
    }

    fn score(&self, plan: &[Configuration]) -> f64 {
        let blocks: Vec<_> = plan.iter().map(|q| self.block(q)).collect();
        self.objective(&blocks)
    }

    /// One exploratory sweep: each coordinate tries `+step`, then `-step`,
    /// and keeps the first strict improvement.
    fn explore(&self, pt: &mut Point, step: f64, evals: &mut u64) -> bool {
        let limits = self.problem.model.joint_limits();
        let mut improved = false;
        for i in 0..pt.q.len() {
            for (j, limit) in limits.iter().enumerate() {
                for dir in [1.0, -1.0] {
                    let old = pt.q[i][j];
                    let new = limit.clamp(old + dir * step);
                    if new == old {
                        continue;
                    }
                    pt.q[i][j] = new;
                    if !self.problem.config_feasible(&pt.q[i]) {
                        pt.q[i][j] = old;
                        continue;
                    }
                    let saved = std::mem::replace(&mut pt.blocks[i], self.block(&pt.q[i]));
                    let trial = self.objective(&pt.blocks);
                    *evals += 1;
                    if trial < pt.f {
                        pt.f = trial;
                        improved = true;
                        break;
                    }
                    pt.q[i][j] = old;
                    pt.blocks[i] = saved;
                }
            }
        }
        improved
    }

    /// `x + (x - base)` projected onto the joint box; configurations that
    /// would leave the workspace keep their value from `x`.
    fn pattern_point(&self, base: &Point, x: &Point, evals: &mut u64) -> Point {
        let limits = self.problem.model.joint_limits();
        let mut q = x.q.clone();
        let mut blocks = x.blocks.clone();
        for i in 0..q.len() {
            let cand: Configuration = (0..limits.len())
                .map(|j| limits[j].clamp(2.0 * x.q[i][j] - base.q[i][j]))
                .collect();
            if cand != q[i] && self.problem.config_feasible(&cand) {
                blocks[i] = self.block(&cand);
                q[i] = cand;
            }
        }
        *evals += 1;
        let f = self.objective(&blocks);
        Point { q, blocks, f }
    }

    /// Hooke-Jeeves pattern search from `q`; returns the refined plan, its
    /// objective and the number of evaluations.
    fn refine(
        &self,
        q: Vec<Configuration>,
        settings: &OptimizerSettings,
    ) -> (Vec<Configuration>, f64, u64) {
        let blocks: Vec<_> = q.iter().map(|c| self.block(c)).collect();
        let f = self.objective(&blocks);
        let mut base = Point { q, blocks, f };
        let mut evals = 1u64;
        let mut step = std::f64::consts::PI / 8.0;
        let mut iters = 0;
        while step >= settings.local_tol && iters < settings.max_local_iters {
            iters += 1;
            let mut x = base.clone();
            if !self.explore(&mut x, step, &mut evals) {
                step /= 2.0;
                continue;
            }
            // x is strictly better than base throughout
            loop {
                if iters >= settings.max_local_iters {
                    base = x;
                    break;
                }
                iters += 1;
                let mut y = self.pattern_point(&base, &x, &mut evals);
                self.explore(&mut y, step, &mut evals);
                base = x;
                if y.f < base.f {
                    x = y;
                } else {
                    break;
                }
            }
        }
        (base.q, base.f, evals)
    }
}

#[derive(Clone)]
struct Point {
    q: Vec<Configuration>,
    blocks: Vec<DMatrix<f64>>,
    f: f64,
}

fn configs_of(plan: &Plan) -> Vec<Configuration> {
    plan.expanded().cloned().collect()
}

/// Orders by score, then lexicographically by joint values, so the winner
/// does not depend on the order in which candidates were supplied.
fn rank(a: &(f64, Vec<Configuration>), b: &(f64, Vec<Configuration>)) -> Ordering {
    a.0.total_cmp(&b.0).then_with(|| {
        a.1.iter()
            .flatten()
            .zip(b.1.iter().flatten())
            .map(|(x, y)| x.total_cmp(y))
            .find(|o| o.is_ne())
            .unwrap_or(Ordering::Equal)
    })
}

/// Runs the full multi-start search.
pub fn optimize_plan(
    problem: &DesignProblem,
    settings: &OptimizerSettings,
) -> Result<DesignReport> {
    settings.validate()?;
    let started = Instant::now();
    let starts = (0..settings.n_starts)
        .into_par_iter()
        .map(|k| sample_plan(problem, &mut stream_rng(settings.rng_seed, k as u64)))
        .collect::<Result<Vec<_>>>()?;
    let mut report = optimize_from_starts(problem, &starts, settings)?;
    report.elapsed = started.elapsed();
    Ok(report)
}

/// Filters and refines a given set of starting plans.
pub fn optimize_from_starts(
    problem: &DesignProblem,
    starts: &[Plan],
    settings: &OptimizerSettings,
) -> Result<DesignReport> {
    settings.validate()?;
    let started = Instant::now();
    for s in starts {
        s.check_against(&problem.model)?;
        if s.total_measurements() != problem.m as u64 {
            return Err(Error::input(format!(
                "start plan has {} measurements, the problem asks for {}",
                s.total_measurements(),
                problem.m
            )));
        }
    }
    let ev = Evaluator::new(problem);
    let mut scored: Vec<(f64, Vec<Configuration>)> = starts
        .par_iter()
        .map(|p| {
            let q = configs_of(p);
            (ev.score(&q), q)
        })
        .collect();
    let n_singular = scored.iter().filter(|(s, _)| !s.is_finite()).count();
    if n_singular == scored.len() {
        return Err(Error::Infeasible(format!(
            "all {} starting plans have a singular information matrix; some parameters may not affect the \
             position at all, try screening the parameter set",
            scored.len()
        )));
    }
    scored.sort_by(rank);
    let finite: Vec<f64> = scored
        .iter()
        .map(|(s, _)| *s)
        .filter(|s| s.is_finite())
        .collect();
    let survivors = settings.survivors(scored.len()).min(finite.len());

    let refined: Vec<(f64, Vec<Configuration>, u64)> = scored[..survivors]
        .par_iter()
        .map(|(_, q)| {
            let (q, s, e) = ev.refine(q.clone(), settings);
            (s, q, e)
        })
        .collect();
    let local_evaluations = refined.iter().map(|r| r.2).sum();
    let (best_obj, best_q) = refined
        .into_iter()
        .map(|(s, q, _)| (s, q))
        .min_by(rank)
        .expect("at least one survivor");

    let plan = Plan::from_configurations(best_q)?;
    let s2 = problem.sigma * problem.sigma;
    let rho0_sq = rho0_squared(
        &problem.model,
        &problem.params,
        &plan,
        &problem.test_pose,
        problem.sigma,
    )?;
    debug_assert!((rho0_sq - s2 * best_obj).abs() <= 1e-9 * rho0_sq.max(f64::MIN_POSITIVE));
    Ok(DesignReport {
        rho0: rho0_sq.sqrt(),
        rho0_sq,
        d_criterion: d_criterion(&problem.model, &problem.params, &plan)?,
        a_criterion: a_criterion(&problem.model, &problem.params, &plan)?,
        plan,
        starts: StartStats {
            n_starts: starts.len(),
            n_singular,
            n_refined: survivors,
            best_start_rho0_sq: s2 * finite[0],
            median_start_rho0_sq: s2 * finite[finite.len() / 2],
            worst_start_rho0_sq: s2 * finite[finite.len() - 1],
            local_evaluations,
        },
        elapsed: started.elapsed(),
    })
}

/// Repeats every configuration of `plan` `k` times.
pub fn replicate_plan(plan: &Plan, k: u32) -> Result<Plan> {
    plan.replicate(k)
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlanScore {
    pub name: String,
    pub rho0: f64,
    pub rho0_sq: f64,
    pub d_criterion: f64,
    pub a_criterion: f64,
}

/// Accuracy of plan `to` relative to plan `from`.
#[derive(Debug, Clone, PartialEq)]
pub struct PairwiseGain {
    pub from: String,
    pub to: String,
    /// `100 (rho_from / rho_to - 1)`: how much more accurate `to` is.
    pub gain_percent: f64,
    /// `100 (1 - rho_to / rho_from)`: relative error reduction of `to`.
    pub reduction_percent: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Comparison {
    pub scores: Vec<PlanScore>,
    /// Every ordered pair of distinct plans.
    pub pairs: Vec<PairwiseGain>,
}

impl Comparison {
    pub fn pair(&self, from: &str, to: &str) -> Option<&PairwiseGain> {
        self.pairs.iter().find(|p| p.from == from && p.to == to)
    }
}

pub fn compare_plans(
    model: &KinematicModel,
    params: &DVector<f64>,
    plans: &[(String, Plan)],
    test_pose: &TestPose,
    sigma: f64,
) -> Result<Comparison> {
    let scores = plans
        .iter()
        .map(|(name, plan)| {
            let rho0_sq = rho0_squared(model, params, plan, test_pose, sigma)?;
            Ok(PlanScore {
                name: name.clone(),
                rho0: rho0_sq.sqrt(),
                rho0_sq,
                d_criterion: d_criterion(model, params, plan)?,
                a_criterion: a_criterion(model, params, plan)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let mut pairs = Vec::new();
    for a in &scores {
        for b in &scores {
            if std::ptr::eq(a, b) {
                continue;
            }
            pairs.push(PairwiseGain {
                from: a.name.clone(),
                to: b.name.clone(),
                gain_percent: 100.0 * (a.rho0 / b.rho0 - 1.0),
                reduction_percent: 100.0 * (1.0 - b.rho0 / a.rho0),
            });
        }
    }
    Ok(Comparison { scores, pairs })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::{rho0_min, TwoLinkCase};
    use crate::models::{six_r, two_link, TwoLinkParameters};
    use std::f64::consts::{FRAC_PI_2, PI};

    fn two_link_problem(set: TwoLinkParameters, m: usize, q20_deg: f64) -> DesignProblem {
        let q0 = TestPose::new(vec![-45f64.to_radians(), q20_deg.to_radians()]);
        DesignProblem::new(two_link(1.0, 0.8, set), q0, m, 1e-3).unwrap()
    }

    fn quick(seed: u64) -> OptimizerSettings {
        OptimizerSettings {
            n_starts: 64,
            filter_quantile: 0.1,
            rng_seed: seed,
            ..OptimizerSettings::default()
        }
    }

    #[test]
    fn two_link_reaches_closed_form_optimum() {
        let problem = two_link_problem(TwoLinkParameters::LinkLengths, 2, 20.0);
        let report = optimize_plan(&problem, &quick(1)).unwrap();
        let case = TwoLinkCase::new(
            1.0,
            0.8,
            TwoLinkParameters::LinkLengths,
            1e-3,
            2,
            20f64.to_radians(),
        )
        .unwrap();
        let want = rho0_min(&case);
        assert!(
            (report.rho0_sq - want).abs() <= 1e-6 * want,
            "{} vs {want}",
            report.rho0_sq
        );
        let s: f64 = report.plan.entries().iter().map(|e| e.q[1].cos()).sum();
        assert!((s - crate::analytic::optimal_s(&case)).abs() < 1e-3);
        assert!(report.rho0_sq <= report.starts.best_start_rho0_sq);
    }

    #[test]
    fn deterministic_for_a_seed() {
        let problem = two_link_problem(TwoLinkParameters::Both, 3, 20.0);
        let a = optimize_plan(&problem, &quick(7)).unwrap();
        let b = optimize_plan(&problem, &quick(7)).unwrap();
        assert_eq!(a.plan, b.plan);
        assert_eq!(a.rho0_sq.to_bits(), b.rho0_sq.to_bits());
        assert_eq!(a.starts, b.starts);
    }

    #[test]
    fn start_order_does_not_matter() {
        let problem = two_link_problem(TwoLinkParameters::Both, 3, 50.0);
        let s = quick(3);
        let mut starts: Vec<Plan> = (0..40)
            .map(|k| sample_plan(&problem, &mut stream_rng(3, k)).unwrap())
            .collect();
        let a = optimize_from_starts(&problem, &starts, &s).unwrap();
        starts.reverse();
        starts.swap(3, 17);
        let b = optimize_from_starts(&problem, &starts, &s).unwrap();
        assert_eq!(a.plan, b.plan);
        assert_eq!(a.rho0_sq, b.rho0_sq);
    }

    #[test]
    fn four_parameter_plan_beats_symmetric_reference() {
        let problem = two_link_problem(TwoLinkParameters::Both, 3, 20.0);
        let report = optimize_plan(&problem, &quick(5)).unwrap();
        let a = 57f64.to_radians();
        let reference =
            Plan::from_configurations(vec![vec![0.0, -a], vec![0.0, 0.0], vec![0.0, a]]).unwrap();
        let r = rho0_squared(
            problem.model(),
            problem.params(),
            &reference,
            problem.test_pose(),
            1e-3,
        )
        .unwrap();
        assert!(
            report.rho0_sq <= r * (1.0 + 1e-9),
            "{} vs {r}",
            report.rho0_sq
        );
    }

    #[test]
    fn never_worse_than_best_refined_start() {
        let problem = DesignProblem::new(
            six_r(),
            TestPose::new(vec![0.2, -0.4, 0.6, 0.1, 0.8, 0.0]),
            4,
            1e-3,
        )
        .unwrap();
        let s = OptimizerSettings {
            n_starts: 32,
            filter_quantile: 0.1,
            local_tol: 1e-4,
            rng_seed: 9,
            ..OptimizerSettings::default()
        };
        let report = optimize_plan(&problem, &s).unwrap();
        assert!(report.rho0_sq <= report.starts.best_start_rho0_sq);
        assert!(problem.model().within_limits(&report.plan.entries()[0].q));
        assert_eq!(report.starts.n_refined, 4);
    }

    #[test]
    fn workspace_box_is_respected() {
        let problem = two_link_problem(TwoLinkParameters::LinkLengths, 2, 20.0)
            .with_workspace(WorkspaceBox::new([0.0, -2.0, -1.0], [2.0, 2.0, 1.0]).unwrap());
        let report = optimize_plan(&problem, &quick(2)).unwrap();
        for e in report.plan.entries() {
            let p = crate::kinematics::forward_position(problem.model(), problem.params(), &e.q)
                .unwrap();
            assert!(p.x >= 0.0);
        }
        let impossible = two_link_problem(TwoLinkParameters::LinkLengths, 2, 20.0)
            .with_workspace(WorkspaceBox::new([5.0, 5.0, 5.0], [6.0, 6.0, 6.0]).unwrap());
        assert!(matches!(
            optimize_plan(&impossible, &quick(2)),
            Err(Error::Infeasible(_))
        ));
    }

    #[test]
    fn refuses_too_few_measurements() {
        let q0 = TestPose::new(vec![0.0; 6]);
        let err = DesignProblem::new(six_r(), q0, 3, 1e-3).unwrap_err();
        assert!(err.to_string().contains("identifiability floor"));
        assert_eq!(identifiability_floor(11), 4);
        assert_eq!(identifiability_floor(2), 1);
    }

    #[test]
    fn all_singular_starts_are_infeasible() {
        // with the elbow frozen straight both link lengths act along the same line
        let q0 = TestPose::new(vec![0.0, 0.0]);
        let problem = DesignProblem::new(
            two_link(1.0, 0.8, TwoLinkParameters::LinkLengths),
            q0,
            2,
            1e-3,
        )
        .unwrap()
        .with_joint_limits(vec![
            JointLimit::new(-PI, PI),
            JointLimit::new(-1e-12, 1e-12),
        ])
        .unwrap();
        let err = optimize_plan(&problem, &quick(1)).unwrap_err();
        assert!(matches!(err, Error::Infeasible(ref m) if m.contains("screening")));
    }

    #[test]
    fn replication_divides_accuracy() {
        let problem = two_link_problem(TwoLinkParameters::LinkLengths, 2, 20.0);
        let plan = sample_plan(&problem, &mut stream_rng(1, 0)).unwrap();
        let r = rho0_squared(
            problem.model(),
            problem.params(),
            &plan,
            problem.test_pose(),
            1e-3,
        )
        .unwrap();
        for k in 1..=4 {
            let rk = rho0_squared(
                problem.model(),
                problem.params(),
                &replicate_plan(&plan, k).unwrap(),
                problem.test_pose(),
                1e-3,
            )
            .unwrap();
            assert!((rk - r / f64::from(k)).abs() <= 1e-12 * r);
        }
        assert!(replicate_plan(&plan, 0).is_err());
    }

    #[test]
    fn comparison_gains() {
        let model = two_link(1.0, 0.8, TwoLinkParameters::LinkLengths);
        let p = model.nominal_parameters();
        let q0 = TestPose::new(vec![-0.3, 0.0]);
        let d_opt =
            Plan::from_configurations(vec![vec![0.0, -FRAC_PI_2], vec![0.0, FRAC_PI_2]]).unwrap();
        let near = Plan::from_configurations(vec![vec![0.0, -1e-4], vec![0.0, 1e-4]]).unwrap();
        let cmp = compare_plans(
            &model,
            &p,
            &[("D".into(), d_opt), ("opt".into(), near)],
            &q0,
            1.0,
        )
        .unwrap();
        let g = cmp.pair("D", "opt").unwrap();
        assert!((g.gain_percent - 100.0 * (2f64.sqrt() - 1.0)).abs() < 1e-4);
        assert!((g.reduction_percent - 100.0 * (1.0 - 1.0 / 2f64.sqrt())).abs() < 1e-4);
        assert_eq!(cmp.pairs.len(), 2);
        let same = compare_plans(
            &model,
            &p,
            &[("a".into(), cmp_plan()), ("b".into(), cmp_plan())],
            &q0,
            1.0,
        )
        .unwrap();
        assert_eq!(same.pair("a", "b").unwrap().gain_percent, 0.0);
    }

    fn cmp_plan() -> Plan {
        Plan::from_configurations(vec![vec![0.1, 0.7], vec![0.2, -1.7]]).unwrap()
    }
}
