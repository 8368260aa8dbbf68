//! End-to-end construction over a plumbing tree, re-verification of stored
//! profiles, and the topological reports behind the command line tool.

use std::collections::BTreeMap;
use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use thiserror::Error;

use crate::mean_curvature::{bulk_check, interface_checks, z2_mean_curvature, z2_threshold, z3_mean_curvature, KProfile};
use crate::par::Exec;
use crate::plumbing::{
    arf_invariant, boundary_sphere_test, clutching_word, eta_ledger, eta_report_json, intersection_matrix, CountConvention,
    EtaLedger, PlumbingError, PlumbingTree, Symmetry,
};
use crate::profile::{
    check_bc, default_ladder, profile_margins, search_parameters, Candidate, EpsilonProfile, LeftParams, ProfileConfig,
    ProfileError, ProfilePair, SearchBudget,
};
use crate::CHECK_TOL;

pub const CERTIFICATE_SCHEMA: &str = "psc-plumb/certificate";
pub const STEP_SCHEMA: &str = "psc-plumb/step";
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("invalid coordinate spec: {0}")]
    Spec(String),
    #[error("invalid config: {0}")]
    Config(String),
    #[error(transparent)]
    Plumbing(#[from] PlumbingError),
    #[error(transparent)]
    Profile(#[from] ProfileError),
    #[error("check failed to run: {0}")]
    Check(String),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum SpecOrigin {
    Initial,
    Derived { from_step: usize },
}

/// An embedded `D^p_R(N) × B^q_{π/2}(ρ)` chart with the bound `ρ ≤ κ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NiceCoordinateSpec {
    pub p: usize,
    pub q: usize,
    #[serde(rename = "R")]
    pub big_r: f64,
    #[serde(rename = "N")]
    pub n: f64,
    pub kappa: f64,
    #[serde(default = "initial_origin")]
    pub origin: SpecOrigin,
}

fn initial_origin() -> SpecOrigin {
    SpecOrigin::Initial
}

impl NiceCoordinateSpec {
    pub fn new(p: usize, q: usize, r_over_n: f64, kappa: f64) -> Self {
        Self { p, q, big_r: r_over_n, n: 1.0, kappa, origin: SpecOrigin::Initial }
    }

    pub fn r_over_n(&self) -> f64 {
        self.big_r / self.n
    }

    pub fn validate(&self) -> Result<(), PipelineError> {
        let x = self.r_over_n();
        if !(self.n > 0.0 && x > 0.0 && x < FRAC_PI_2) {
            return Err(PipelineError::Spec(format!("R/N = {x} outside (0, pi/2)")));
        }
        if !(self.kappa > 0.0) {
            return Err(PipelineError::Spec(format!("kappa = {} must be positive", self.kappa)));
        }
        if self.p < 3 || self.q < 3 {
            return Err(PipelineError::Spec(format!("dimensions p = {}, q = {} must be at least 3", self.p, self.q)));
        }
        Ok(())
    }
}

/// Chart for the next plumbing: factors swapped, `R/N = ε`, `κ = α r`.
pub fn derive_next_spec(spec: &NiceCoordinateSpec, left: &LeftParams, next_epsilon: f64, from_step: usize) -> NiceCoordinateSpec {
    NiceCoordinateSpec {
        p: spec.q,
        q: spec.p,
        big_r: next_epsilon,
        n: 1.0,
        kappa: left.alpha * left.r,
        origin: SpecOrigin::Derived { from_step },
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PipelineConfig {
    pub v_spec: NiceCoordinateSpec,
    pub lambda: f64,
    pub grid: usize,
    pub delta_frac: f64,
    pub window_frac: f64,
    pub t1_max: f64,
    pub bc_tol: f64,
    pub next_epsilon: f64,
    pub z2_length: f64,
    pub z2_mu: f64,
    pub z2_samples: usize,
    pub oracle_samples: usize,
    /// Vertex plumbed to the ambient manifold.
    pub root: usize,
    pub budget: SearchBudget,
    pub ladder: Vec<Candidate>,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        let pc = ProfileConfig::default();
        Self {
            v_spec: NiceCoordinateSpec::new(4, 4, FRAC_PI_4, 0.5),
            lambda: pc.lambda,
            grid: pc.grid,
            delta_frac: pc.delta_frac,
            window_frac: pc.window_frac,
            t1_max: pc.t1_max,
            bc_tol: 1e-8,
            next_epsilon: FRAC_PI_4,
            z2_length: pc.z2_length,
            z2_mu: 1e-3,
            z2_samples: 65,
            oracle_samples: 64,
            root: 0,
            budget: SearchBudget::default(),
            ladder: default_ladder(),
        }
    }
}

impl PipelineConfig {
    pub fn from_json(s: &str) -> Result<Self, PipelineError> {
        let cfg: Self = serde_json::from_str(s)?;
        if cfg.ladder.is_empty() || cfg.z2_samples < 2 || cfg.oracle_samples == 0 {
            return Err(PipelineError::Config("ladder, z2_samples and oracle_samples must be non-empty".into()));
        }
        Ok(cfg)
    }

    pub fn profile_config(&self, spec: &NiceCoordinateSpec) -> ProfileConfig {
        ProfileConfig {
            p: spec.p,
            q: spec.q,
            r_over_n: spec.r_over_n(),
            lambda: self.lambda,
            n: spec.n,
            grid: self.grid,
            delta_frac: self.delta_frac,
            window_frac: self.window_frac,
            t1_max: self.t1_max,
            z2_length: self.z2_length,
        }
    }
}

/// One named verdict: `value` compared against `bound` by `relation`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckItem {
    pub id: String,
    pub value: f64,
    pub bound: f64,
    pub relation: String,
    pub passed: bool,
}

impl CheckItem {
    fn new(id: &str, value: f64, relation: &str, bound: f64) -> Self {
        let passed = match relation {
            ">" => value > bound,
            ">=" => value >= bound,
            "<" => value < bound,
            "<=" => value <= bound,
            _ => value == bound,
        };
        Self { id: id.into(), value, bound, relation: relation.into(), passed }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepSummary {
    pub ricci_min: f64,
    pub ricci_min_t: f64,
    pub mean_margin_min: f64,
    pub mean_margin_min_t: f64,
    pub mean_margin_scale_free_min: f64,
    pub bulk_scalar_min: f64,
    pub oracle_relative_gap: f64,
    pub display_sign_mismatches: usize,
    pub z2_r: f64,
    pub z2_min_mean: f64,
    pub z2_threshold: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepParameters {
    pub candidate: Candidate,
    pub doublings: u32,
    pub beta_n: f64,
    pub left: LeftParams,
    pub right: crate::profile::RightParams,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepCertificate {
    pub index: usize,
    pub vertex: usize,
    pub spare_coordinates: usize,
    pub spec_in: NiceCoordinateSpec,
    pub parameters: Option<StepParameters>,
    pub summary: Option<StepSummary>,
    pub checks: Vec<CheckItem>,
    pub spec_out: Option<NiceCoordinateSpec>,
    pub error: Option<String>,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstructionCertificate {
    pub schema: String,
    pub schema_version: u32,
    pub seed: u64,
    pub config: PipelineConfig,
    pub steps: Vec<StepCertificate>,
    /// `step<i>/<check id>` for every failing check.
    pub failed_checks: Vec<String>,
    pub passed: bool,
}

impl ConstructionCertificate {
    fn new(seed: u64, config: PipelineConfig, steps: Vec<StepCertificate>) -> Self {
        let mut failed = vec![];
        for s in &steps {
            if let Some(e) = &s.error {
                failed.push(format!("step{}/error: {e}", s.index));
            }
            failed.extend(s.checks.iter().filter(|c| !c.passed).map(|c| format!("step{}/{}", s.index, c.id)));
        }
        Self {
            schema: CERTIFICATE_SCHEMA.into(),
            schema_version: SCHEMA_VERSION,
            seed,
            config,
            passed: !steps.is_empty() && steps.iter().all(|s| s.passed),
            steps,
            failed_checks: failed,
        }
    }

    pub fn to_json(&self) -> Result<String, PipelineError> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }
}

/// Everything needed to re-check a step without reconstructing it; the
/// jets travel separately as CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StoredStep {
    pub schema: String,
    pub schema_version: u32,
    pub index: usize,
    pub vertex: usize,
    pub spare_coordinates: usize,
    pub spec_in: NiceCoordinateSpec,
    pub config: PipelineConfig,
    pub candidate: Candidate,
    pub doublings: u32,
    pub eps: EpsilonProfile,
    pub pair: ProfilePair,
}

/// Per-point data written under `plots-data/`.
#[derive(Debug, Clone, PartialEq)]
pub struct PlotData {
    pub margins: Vec<[f64; 5]>,
    pub z2: Vec<[f64; 3]>,
}

/// Result of running every check on one profile. Checks that could not be
/// evaluated fail with a `NaN` value and their reason in `errors`.
#[derive(Debug, Clone, PartialEq)]
pub struct StepChecks {
    pub checks: Vec<CheckItem>,
    pub summary: StepSummary,
    pub plots: PlotData,
    pub errors: Vec<String>,
}

fn checked(id: &str, value: Result<f64, String>, relation: &str, bound: f64, errors: &mut Vec<String>) -> CheckItem {
    match value {
        Ok(v) => CheckItem::new(id, v, relation, bound),
        Err(e) => {
            errors.push(format!("{id}: {e}"));
            CheckItem { id: id.into(), value: f64::NAN, bound, relation: relation.into(), passed: false }
        }
    }
}

pub fn step_checks(pair: &ProfilePair, eps: &EpsilonProfile, spec: &NiceCoordinateSpec, cfg: &PipelineConfig, exec: Exec) -> StepChecks {
    let s = |e: &dyn std::fmt::Display| e.to_string();
    let margins = profile_margins(pair, exec).map_err(|e| s(&e));
    let z3 = z3_mean_curvature(pair, exec).map_err(|e| s(&e));
    let bc = check_bc(pair, eps, cfg.bc_tol);
    let glue = interface_checks(pair).map_err(|e| s(&e));
    let bulk = bulk_check(pair, cfg.oracle_samples, exec).map_err(|e| s(&e));
    let k = KProfile { lambda: pair.left.lambda, mu: cfg.z2_mu };
    let r = pair.left.r;
    let z2 = z2_mean_curvature(eps, k, r, pair.p, pair.q, cfg.z2_samples, exec).map_err(|e| s(&e));
    let thr = z2_threshold(eps, k, pair.p, pair.q, 1e-2 * r, r, cfg.z2_samples, exec).ok().flatten();

    let mut errors = vec![];
    let e = &mut errors;
    let rp = &pair.right;
    let at_t1 = pair.eval(rp.t1);
    let mut checks = vec![
        checked("profile.ricci_positive", margins.as_ref().map(|m| m.ricci_min).map_err(Clone::clone), ">", 0.0, e),
        checked("profile.mean_curvature_margin", z3.as_ref().map(|m| m.min_margin).map_err(Clone::clone), ">=", -CHECK_TOL, e),
        checked(
            "profile.window_f2_bounds",
            margins.as_ref().map(|m| m.window_f2_within_bounds as u8 as f64).map_err(Clone::clone),
            "==",
            1.0,
            e,
        ),
    ];
    checks.extend(bc.clauses.iter().map(|c| CheckItem {
        id: c.name.clone(),
        value: c.value,
        bound: c.target,
        relation: if c.upper_bound { "<=" } else { "==" }.into(),
        passed: c.passed,
    }));
    for name in ["a3", "b3"] {
        let min = glue.clone().and_then(|g| {
            g.iter()
                .find(|c| c.name == name)
                .map(|c| c.sums.iter().cloned().fold(f64::INFINITY, f64::min))
                .ok_or_else(|| "missing interface".to_string())
        });
        checks.push(checked(&format!("gluing.{name}"), min, ">=", -CHECK_TOL, e));
    }
    let scal = bulk.as_ref().map(|b| b.min_scalar).map_err(Clone::clone);
    let hyp = match (&bulk, &z3) {
        (Ok(b), Ok(z)) => Ok((b.scalar_positive && z.passed) as u8 as f64),
        (Err(x), _) | (_, Err(x)) => Err(x.clone()),
    };
    checks.extend([
        CheckItem::new("right.beta_dominates", rp.beta - at_t1.h / rp.rho, ">", 0.0),
        CheckItem::new("right.fiber_ratio", at_t1.f / at_t1.h * rp.rho / rp.n, "<", 0.9 * spec.r_over_n().sin()),
        CheckItem::new("spec.rho_le_kappa", rp.rho, "<=", spec.kappa),
        checked("oracle.sign_agreement", bulk.as_ref().map(|b| b.sign_mismatches as f64).map_err(Clone::clone), "==", 0.0, e),
        checked("collar.scalar_positive", scal, ">", 0.0, e),
        checked("collar.attachment_hypothesis", hyp, "==", 1.0, e),
        checked("z2.mean_curvature", z2.as_ref().map(|z| z.min_mean).map_err(Clone::clone), ">=", -CHECK_TOL, e),
    ]);
    let nan = f64::NAN;
    let summary = StepSummary {
        ricci_min: margins.as_ref().map_or(nan, |m| m.ricci_min),
        ricci_min_t: margins.as_ref().map_or(nan, |m| m.ricci_min_t),
        mean_margin_min: z3.as_ref().map_or(nan, |z| z.min_margin),
        mean_margin_min_t: z3.as_ref().map_or(nan, |z| z.min_margin_t),
        mean_margin_scale_free_min: z3.as_ref().map_or(nan, |z| z.min_scale_free_margin),
        bulk_scalar_min: bulk.as_ref().map_or(nan, |b| b.min_scalar),
        oracle_relative_gap: bulk.as_ref().map_or(nan, |b| b.max_relative_gap),
        display_sign_mismatches: z3.as_ref().map_or(0, |z| z.sign_mismatch_published),
        z2_r: r,
        z2_min_mean: z2.as_ref().map_or(nan, |z| z.min_mean),
        z2_threshold: thr,
    };
    let (p, q) = (pair.p, pair.q);
    let plots = PlotData {
        margins: match &z3 {
            Ok(z) => pair
                .jets
                .iter()
                .zip(&z.rows)
                .map(|(j, row)| {
                    let ric = crate::curvature::doubly_warped_ricci(j, p, q).min();
                    [j.t, ric, row.margin, row.mean.unwrap_or(nan), row.mean_geometric.unwrap_or(nan)]
                })
                .collect(),
            Err(_) => vec![],
        },
        z2: z2.as_ref().map_or(vec![], |z| z.points.iter().map(|pt| [pt.t, pt.eps, pt.mean]).collect()),
    };
    StepChecks { checks, summary, plots, errors }
}

/// Output of a full run: the certificate plus the stored per-step artifacts.
#[derive(Debug, Clone)]
pub struct ConstructionRun {
    pub certificate: ConstructionCertificate,
    pub stored: Vec<StoredStep>,
    pub plots: Vec<PlotData>,
}

/// One construction step per vertex, root first, depth first; each child
/// uses the chart derived from its parent's step.
pub fn run_construction(
    tree: &PlumbingTree,
    v_spec: &NiceCoordinateSpec,
    cfg: &PipelineConfig,
    seed: u64,
    exec: Exec,
) -> Result<ConstructionRun, PipelineError> {
    tree.validate()?;
    v_spec.validate()?;
    if cfg.root >= tree.vertices.len() {
        return Err(PipelineError::Config(format!("root {} out of range", cfg.root)));
    }
    let order = tree.dfs_order(cfg.root);
    let parents = tree.parents(cfg.root);
    let mut spec_of: BTreeMap<usize, NiceCoordinateSpec> = BTreeMap::new();
    spec_of.insert(cfg.root, *v_spec);
    let (mut steps, mut stored, mut plots) = (vec![], vec![], vec![]);
    for (index, &v) in order.iter().enumerate() {
        let spare = tree.degree(v) - parents[v].is_some() as usize;
        let Some(spec) = spec_of.get(&v).copied() else {
            let parent = parents[v].unwrap();
            steps.push(StepCertificate {
                index,
                vertex: v,
                spare_coordinates: spare,
                spec_in: spec_of[&cfg.root],
                parameters: None,
                summary: None,
                checks: vec![],
                spec_out: None,
                error: Some(format!("skipped: parent vertex {parent} has no chart")),
                passed: false,
            });
            continue;
        };
        let vx = &tree.vertices[v];
        if !((vx.base_dim, vx.rank) == (spec.p, spec.q) || (vx.base_dim, vx.rank) == (spec.q, spec.p)) {
            return Err(PipelineError::Spec(format!(
                "vertex {v} is a D^{}-bundle over S^{}, chart has p = {}, q = {}",
                vx.rank, vx.base_dim, spec.p, spec.q
            )));
        }
        let pcfg = cfg.profile_config(&spec);
        let mut cert = StepCertificate {
            index,
            vertex: v,
            spare_coordinates: spare,
            spec_in: spec,
            parameters: None,
            summary: None,
            checks: vec![],
            spec_out: None,
            error: None,
            passed: false,
        };
        match search_parameters(&pcfg, &cfg.ladder, &cfg.budget, cfg.bc_tol, exec) {
            Err(e) => cert.error = Some(e.to_string()),
            Ok(out) => {
                let c = out.construction;
                let StepChecks { checks, summary, plots: plot, errors } = step_checks(&c.pair, &c.eps, &spec, cfg, exec);
                if !errors.is_empty() {
                    cert.error = Some(errors.join("; "));
                }
                let next = derive_next_spec(&spec, &c.pair.left, cfg.next_epsilon, index);
                for w in tree.dfs_order(cfg.root) {
                    if parents[w] == Some(v) {
                        spec_of.insert(w, next);
                    }
                }
                cert.passed = cert.error.is_none() && checks.iter().all(|c| c.passed);
                cert.checks = checks;
                cert.summary = Some(summary);
                cert.spec_out = Some(next);
                cert.parameters = Some(StepParameters {
                    candidate: c.candidate,
                    doublings: c.doublings,
                    beta_n: c.pair.beta_n(),
                    left: c.pair.left,
                    right: c.pair.right,
                });
                stored.push(StoredStep {
                    schema: STEP_SCHEMA.into(),
                    schema_version: SCHEMA_VERSION,
                    index,
                    vertex: v,
                    spare_coordinates: spare,
                    spec_in: spec,
                    config: cfg.clone(),
                    candidate: c.candidate,
                    doublings: c.doublings,
                    eps: c.eps,
                    pair: c.pair,
                });
                plots.push(plot);
            }
        }
        steps.push(cert);
    }
    Ok(ConstructionRun { certificate: ConstructionCertificate::new(seed, cfg.clone(), steps), stored, plots })
}

/// Re-run every check on a stored step.
pub fn verify_step(step: &StoredStep, seed: u64, exec: Exec) -> Result<ConstructionCertificate, PipelineError> {
    if step.schema != STEP_SCHEMA || step.schema_version != SCHEMA_VERSION {
        return Err(PipelineError::Config(format!("unsupported step schema {} v{}", step.schema, step.schema_version)));
    }
    step.spec_in.validate()?;
    let StepChecks { checks, summary, errors, .. } = step_checks(&step.pair, &step.eps, &step.spec_in, &step.config, exec);
    let cert = StepCertificate {
        index: step.index,
        vertex: step.vertex,
        spare_coordinates: step.spare_coordinates,
        spec_in: step.spec_in,
        parameters: Some(StepParameters {
            candidate: step.candidate,
            doublings: step.doublings,
            beta_n: step.pair.beta_n(),
            left: step.pair.left,
            right: step.pair.right,
        }),
        summary: Some(summary),
        spec_out: Some(derive_next_spec(&step.spec_in, &step.pair.left, step.config.next_epsilon, step.index)),
        passed: errors.is_empty() && checks.iter().all(|c| c.passed),
        checks,
        error: (!errors.is_empty()).then(|| errors.join("; ")),
    };
    Ok(ConstructionCertificate::new(seed, step.config.clone(), vec![cert]))
}

/// Parse a stored step from its parameter JSON and profile CSV.
pub fn load_step(params_json: &str, profile_csv: &[u8]) -> Result<StoredStep, PipelineError> {
    let mut step: StoredStep = serde_json::from_str(params_json)?;
    step.pair.read_csv(profile_csv)?;
    Ok(step)
}

pub fn verify(profile_file: &Path, params_file: &Path, seed: u64, exec: Exec) -> Result<ConstructionCertificate, PipelineError> {
    let step = load_step(&fs::read_to_string(params_file)?, &fs::read(profile_file)?)?;
    verify_step(&step, seed, exec)
}

fn write_rows<const N: usize>(path: &Path, header: [&str; N], rows: &[[f64; N]]) -> Result<(), PipelineError> {
    let mut w = csv::Writer::from_path(path).map_err(|e| PipelineError::Check(e.to_string()))?;
    let io = |e: csv::Error| PipelineError::Check(e.to_string());
    w.write_record(header).map_err(io)?;
    for r in rows {
        w.write_record(r.iter().map(|v| format!("{v:e}"))).map_err(io)?;
    }
    w.flush()?;
    Ok(())
}

/// Writes `certificate.json`, `profiles/step-<i>.{csv,json}` and
/// `plots-data/step-<i>-{margins,z2}.csv` under `dir`.
pub fn write_outputs(dir: &Path, run: &ConstructionRun) -> Result<(), PipelineError> {
    fs::create_dir_all(dir.join("profiles"))?;
    fs::create_dir_all(dir.join("plots-data"))?;
    fs::write(dir.join("certificate.json"), run.certificate.to_json()?)?;
    for (s, plot) in run.stored.iter().zip(&run.plots) {
        let mut buf = vec![];
        s.pair.write_csv(&mut buf).map_err(|e| PipelineError::Check(e.to_string()))?;
        fs::write(dir.join(format!("profiles/step-{}.csv", s.index)), buf)?;
        fs::write(dir.join(format!("profiles/step-{}.json", s.index)), serde_json::to_string_pretty(s)? + "\n")?;
        write_rows(
            &dir.join(format!("plots-data/step-{}-margins.csv", s.index)),
            ["t", "ricci_min", "a_minus_b", "mean_displayed", "mean_geometric"],
            &plot.margins,
        )?;
        write_rows(&dir.join(format!("plots-data/step-{}-z2.csv", s.index)), ["t", "eps", "mean"], &plot.z2)?;
    }
    Ok(())
}

/// Determinant, sphere verdict, Arf invariant, clutching word and, for
/// equivariant chains of length divisible by 8, the eta ledger.
pub fn topo_report(tree: &PlumbingTree) -> Result<Value, PipelineError> {
    tree.validate()?;
    let form = intersection_matrix(tree)?;
    let sphere = boundary_sphere_test(tree)?;
    let arf = match form.symmetry {
        Symmetry::Skew => Some(arf_invariant(tree)?),
        Symmetry::Symmetric => None,
    };
    let mut out = json!({
        "vertices": tree.vertices.len(),
        "symmetry": match form.symmetry { Symmetry::Skew => "skew", Symmetry::Symmetric => "symmetric" },
        "intersection_matrix": form.matrix,
        "det": sphere.det,
        "sphere": sphere.is_homotopy_sphere,
        "arf": arf,
        "clutching_word": clutching_word(tree)?,
    });
    if tree.equivariant {
        tree.path_order()?;
        let m = tree.vertices.len() as u64;
        let d = tree.vertices[0].base_dim;
        out["fixed_points"] = json!({
            "paper": crate::plumbing::fixed_point_count(m, CountConvention::Paper).ok(),
            "chain": crate::plumbing::fixed_point_count(m, CountConvention::Chain)?,
        });
        out["eta"] = if m.is_multiple_of(8) && d % 2 == 1 {
            let ledger = EtaLedger::for_lengths(((d - 1) / 2) as u32, [m / 8], CountConvention::Paper)?;
            eta_report_json(&ledger, &eta_ledger(&ledger)?)
        } else {
            Value::Null
        };
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EtaConfig {
    pub k: u32,
    pub lengths: Vec<u64>,
    pub convention: CountConvention,
}

impl Default for EtaConfig {
    fn default() -> Self {
        Self { k: 1, lengths: (1..=10).collect(), convention: CountConvention::Paper }
    }
}

pub fn eta_report(cfg: &EtaConfig) -> Result<Value, PipelineError> {
    let ledger = EtaLedger::for_lengths(cfg.k, cfg.lengths.iter().copied(), cfg.convention)?;
    Ok(eta_report_json(&ledger, &eta_ledger(&ledger)?))
}

/// One `PASS`/`FAIL` line per check of a certificate.
pub fn report_lines(cert: &Value) -> Result<Vec<String>, PipelineError> {
    if cert["schema"] != CERTIFICATE_SCHEMA {
        return Err(PipelineError::Config("not a certificate".into()));
    }
    let mut out = vec![];
    for s in cert["steps"].as_array().into_iter().flatten() {
        let i = &s["index"];
        if let Some(e) = s["error"].as_str() {
            out.push(format!("FAIL step{i} {e}"));
        }
        for c in s["checks"].as_array().into_iter().flatten() {
            let verdict = if c["passed"].as_bool() == Some(true) { "PASS" } else { "FAIL" };
            out.push(format!("{verdict} step{i}/{} {} {} {}", c["id"].as_str().unwrap_or("?"), c["value"], c["relation"].as_str().unwrap_or("?"), c["bound"]));
        }
    }
    let overall = if cert["passed"].as_bool() == Some(true) { "PASS" } else { "FAIL" };
    out.push(format!("{overall} certificate"));
    Ok(out)
}
