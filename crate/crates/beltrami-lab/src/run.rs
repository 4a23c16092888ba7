//! Executes the operations listed in a `RunConfig` and collects a
//! deterministic JSON report. Wall-clock timings go to a separate sidecar so
//! the report itself is byte-stable across reruns.

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

use serde::Serialize;
use serde_json::{json, Value};

use crate::asymptotics::{
    belinskij_test, default_scales, default_zeta_set, distortion_bound_check, homogeneity_profile,
    lavrentiev_ratio, log_ratio_profile, theorem1_suite, EvaluableMapping, ScaleDirection,
    ScaleProfile,
};
use crate::config::RunConfig;
use crate::criteria::{
    infinity_tail_checks, lehto_check, parse_psi_key, phi_divergence_check, psi_infinity_check,
    remark11_equivalences,
};
use crate::error::{Error, Result};
use crate::field::{parse_field_key, GridSpec, MuField, MuKind};
use crate::oscillation::fmo_bound_check;
use crate::phi::parse_phi_key;
use crate::scalar::parse_scalar_key;
use crate::solver::{
    ring_inequality_check, save_mapping, save_mapping_csv, solve_degenerate, solve_qc, Mapping,
};
use crate::spherical::SphericalNormalization;

#[derive(Debug, Clone, Serialize)]
pub struct OpOutcome {
    pub op: String,
    pub ok: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub summary: Value,
    /// File names relative to the output directory.
    pub files: Vec<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub version: String,
    /// Config with defaults filled in; output-dir is cleared because paths
    /// are machine-specific and the report must be reproducible bytewise.
    pub config: RunConfig,
    pub ops: Vec<OpOutcome>,
    /// Times |μ| was clamped below 1 during evaluation.
    pub clamp_count: u64,
    /// Times a dilatation hit the cap.
    pub cap_count: u64,
}

/// Per-op wall time in milliseconds; written next to the report, never in it.
#[derive(Debug, Clone, Serialize)]
pub struct Timings {
    pub ops: Vec<(String, u128)>,
}

struct Ctx {
    cfg: RunConfig,
    field: MuField<f64>,
    mapping: Option<Arc<Mapping<f64>>>,
    files: Vec<String>,
}

impl Ctx {
    fn grid(&self) -> Result<GridSpec<f64>> {
        GridSpec::new(self.cfg.center(), self.cfg.half_width, self.cfg.grid_n)
    }

    /// Solves once and caches; later ops reuse the same mapping.
    fn mapping(&mut self) -> Result<Arc<Mapping<f64>>> {
        if let Some(m) = &self.mapping {
            return Ok(m.clone());
        }
        let grid = self.grid()?;
        let m = if self.cfg.schedule.is_empty() {
            solve_qc(&self.field, &grid, self.cfg.tol)?
        } else {
            let run = solve_degenerate(&self.field, &self.cfg.schedule, &grid, self.cfg.tol)?;
            run.mappings.into_iter().last().ok_or_else(|| {
                Error::Convergence(run.failure.unwrap_or_else(|| "no mapping produced".into()))
            })?
        };
        let m = Arc::new(m);
        self.mapping = Some(m.clone());
        Ok(m)
    }

    /// Closed-form mapping when the coefficient has one, else the solved grid.
    fn evaluable(&mut self) -> Result<EvaluableMapping<f64>> {
        match self.field.kind() {
            MuKind::Zero => Ok(EvaluableMapping::Identity),
            // μ = ((k−1)/(k+1))·z/z̄ integrates to z·|z|^{k−1}.
            MuKind::RadialStretch { k } => Ok(EvaluableMapping::RadialStretch { k: *k }),
            MuKind::Shabat => Ok(EvaluableMapping::Shabat),
            MuKind::LogSpiral => Ok(EvaluableMapping::LogSpiral),
            _ => Ok(EvaluableMapping::Grid(self.mapping()?)),
        }
    }

    fn direction(&self) -> ScaleDirection {
        match self.cfg.direction.as_str() {
            "to-infinity" => ScaleDirection::ToInfinity,
            _ => ScaleDirection::ToZero,
        }
    }

    fn normalization(&self) -> SphericalNormalization {
        match self.cfg.normalization.as_str() {
            "full-area" => SphericalNormalization::FullArea,
            _ => SphericalNormalization::Unit,
        }
    }

    fn emit(&mut self, name: &str, text: &str) -> Result<()> {
        if let Some(dir) = &self.cfg.output_dir {
            fs::write(dir.join(name), text)?;
            self.files.push(name.to_string());
        }
        Ok(())
    }

    fn emit_profile(&mut self, name: &str, profile: &ScaleProfile<f64>) -> Result<()> {
        self.emit(name, &profile.csv())
    }
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("report value serializes")
}

fn run_op(ctx: &mut Ctx, op: &str) -> Result<Value> {
    let cfg = ctx.cfg.clone();
    match op {
        "solve" => {
            if cfg.schedule.is_empty() {
                let m = ctx.mapping()?;
                if let Some(dir) = cfg.output_dir.clone() {
                    save_mapping(&m, &dir.join("mapping.qcm"))?;
                    save_mapping_csv(&m, &dir.join("mapping.csv"))?;
                    ctx.files.push("mapping.qcm".into());
                    ctx.files.push("mapping.csv".into());
                }
                Ok(json!({
                    "residual": m.residual,
                    "jacobian-positive-fraction": m.jacobian_positive_fraction,
                    "truncation-level": m.truncation_level,
                }))
            } else {
                let grid = ctx.grid()?;
                let run = solve_degenerate(&ctx.field, &cfg.schedule, &grid, cfg.tol)?;
                let summary = json!({
                    "schedule": run.schedule,
                    "distances": run.distances,
                    "converged": run.converged,
                    "failure": run.failure,
                    "residuals": run.mappings.iter().map(|m| m.residual).collect::<Vec<_>>(),
                });
                if let (Some(dir), Some(last)) = (cfg.output_dir.clone(), run.mappings.last()) {
                    save_mapping(last, &dir.join("mapping.qcm"))?;
                    save_mapping_csv(last, &dir.join("mapping.csv"))?;
                    ctx.files.push("mapping.qcm".into());
                    ctx.files.push("mapping.csv".into());
                }
                if let Some(last) = run.mappings.into_iter().last() {
                    ctx.mapping = Some(Arc::new(last));
                }
                Ok(summary)
            }
        }
        "oracle-compare" => {
            let support = ctx.field.support_radius().unwrap_or(1.0);
            let oracle: Box<dyn Fn(num_complex::Complex<f64>) -> num_complex::Complex<f64>> =
                match ctx.field.kind() {
                    MuKind::Zero => Box::new(|z| z),
                    // z·(|z|/s)^{k−1} inside the support, identity outside
                    MuKind::RadialStretch { k } if (support - 1.0).abs() < 1e-12 => {
                        let k = *k;
                        Box::new(move |z| {
                            if z.norm() <= 1.0 {
                                z * z.norm().powf(k - 1.0)
                            } else {
                                z
                            }
                        })
                    }
                    _ => {
                        return Err(Error::Domain(format!(
                            "no closed-form oracle for field `{}`",
                            cfg.field
                        )))
                    }
                };
            let m = ctx.mapping()?;
            let n = m.grid.n;
            let mut sup = 0.0f64;
            for iy in 0..n {
                for ix in 0..n {
                    let z = m.grid.node(ix, iy);
                    if (z - m.grid.center).norm() > m.grid.half_width * 0.5 {
                        continue;
                    }
                    sup = sup.max((m.values[iy * n + ix] - oracle(z)).norm());
                }
            }
            Ok(json!({ "sup-error": sup }))
        }
        "homogeneity" => {
            let ev = ctx.evaluable()?;
            let profile = homogeneity_profile(
                &ev,
                &default_zeta_set(),
                ctx.direction(),
                &default_scales(ctx.direction()),
            )?;
            ctx.emit_profile("homogeneity.csv", &profile)?;
            Ok(to_value(&profile))
        }
        "lavrentiev" => {
            let ev = ctx.evaluable()?;
            let profile =
                lavrentiev_ratio(&ev, ctx.direction(), &default_scales(ctx.direction()))?;
            ctx.emit_profile("lavrentiev.csv", &profile)?;
            Ok(to_value(&profile))
        }
        "log-ratio" => {
            let ev = ctx.evaluable()?;
            let profile =
                log_ratio_profile(&ev, ctx.direction(), &default_scales(ctx.direction()))?;
            ctx.emit_profile("log-ratio.csv", &profile)?;
            Ok(to_value(&profile))
        }
        "theorem1" => {
            let ev = ctx.evaluable()?;
            let rep = theorem1_suite(&ev, &default_scales(ScaleDirection::ToZero))?;
            ctx.emit_profile("theorem1-ray.csv", &rep.ray)?;
            ctx.emit_profile("theorem1-two-point.csv", &rep.two_point)?;
            ctx.emit_profile("theorem1-full.csv", &rep.full)?;
            ctx.emit_profile("theorem1-uniform.csv", &rep.uniform)?;
            Ok(to_value(&rep))
        }
        "belinskij" => {
            let ev = ctx.evaluable()?;
            let mu0 = ctx.field.eval_mu(cfg.z0());
            let rep = belinskij_test(
                &ev,
                mu0,
                crate::point::ComplexPoint::Finite(cfg.z0()),
                &default_scales(ScaleDirection::ToZero),
                &[0.5, 2.0],
            )?;
            ctx.emit_profile("belinskij-homogeneity.csv", &rep.homogeneity)?;
            ctx.emit_profile("belinskij-a-ratio.csv", &rep.a_ratio)?;
            Ok(to_value(&rep))
        }
        "lehto" => Ok(to_value(&lehto_check(&ctx.field, cfg.z0(), cfg.eps0)?)),
        "phi-divergence" => {
            let phi = parse_phi_key::<f64>(&cfg.phi)?;
            Ok(to_value(&phi_divergence_check(&phi, cfg.delta)?))
        }
        "remark11" => {
            let phi = parse_phi_key::<f64>(&cfg.phi)?;
            Ok(to_value(&remark11_equivalences(&phi)?))
        }
        "fmo-bound" => {
            let q = parse_scalar_key::<f64>(&cfg.scalar)?;
            let ladder: Vec<f64> = (1..=8).map(|j| 0.25 * 0.5f64.powi(j)).collect();
            Ok(to_value(&fmo_bound_check(&q, &ladder, cfg.samples)?))
        }
        "psi-infinity" => {
            let psi = parse_psi_key::<f64>(&cfg.psi)?;
            Ok(to_value(&psi_infinity_check(&ctx.field, &psi, cfg.r0)?))
        }
        "infinity-tail" => {
            let rep = infinity_tail_checks(&ctx.field, ctx.normalization(), cfg.r0, cfg.depth)?;
            Ok(to_value(&rep))
        }
        "ring" => {
            let q = parse_scalar_key::<f64>(&cfg.scalar)?;
            let m = ctx.mapping()?;
            Ok(to_value(&ring_inequality_check(&m, cfg.z0(), cfg.r1, cfg.r2, &q)?))
        }
        "distortion" => {
            let q = parse_scalar_key::<f64>(&cfg.scalar)?;
            let ev = ctx.evaluable()?;
            let rep =
                distortion_bound_check(&ev, &q, cfg.z0(), cfg.eps0, cfg.distortion_delta)?;
            Ok(json!({
                "q0": rep.q0,
                "d0": rep.d0,
                "alpha0": rep.alpha0,
                "holds": rep.holds,
                "violation-count": rep.violations.len(),
            }))
        }
        other => Err(Error::Domain(format!("unknown op `{other}`"))),
    }
}

pub fn run(cfg: &RunConfig) -> Result<(RunReport, Timings)> {
    cfg.validate()?;
    let field = parse_field_key::<f64>(&cfg.field)?;
    if let Some(dir) = &cfg.output_dir {
        fs::create_dir_all(dir)?;
    }
    let mut ctx = Ctx { cfg: cfg.clone(), field, mapping: None, files: Vec::new() };
    let mut ops = Vec::new();
    let mut timings = Vec::new();
    for op in &cfg.ops {
        let t0 = Instant::now();
        let result = run_op(&mut ctx, op);
        timings.push((op.clone(), t0.elapsed().as_millis()));
        let files = std::mem::take(&mut ctx.files);
        match result {
            Ok(summary) => {
                ops.push(OpOutcome { op: op.clone(), ok: true, error: None, summary, files })
            }
            Err(e) => ops.push(OpOutcome {
                op: op.clone(),
                ok: false,
                error: Some(e.to_string()),
                summary: Value::Null,
                files,
            }),
        }
    }
    let mut echoed = cfg.clone();
    echoed.output_dir = None;
    let report = RunReport {
        version: env!("CARGO_PKG_VERSION").to_string(),
        config: echoed,
        ops,
        clamp_count: ctx.field.clamp_count(),
        cap_count: ctx.field.cap_count(),
    };
    if let Some(dir) = &cfg.output_dir {
        write_report(&report, &Timings { ops: timings.clone() }, dir)?;
    }
    Ok((report, Timings { ops: timings }))
}

pub fn report_json(report: &RunReport) -> String {
    let mut text = serde_json::to_string_pretty(report).expect("report serializes");
    text.push('\n');
    text
}

pub fn write_report(report: &RunReport, timings: &Timings, dir: &Path) -> Result<()> {
    fs::write(dir.join("report.json"), report_json(report))?;
    let mut t = serde_json::to_string_pretty(timings).expect("timings serialize");
    t.push('\n');
    fs::write(dir.join("timings.json"), t)?;
    Ok(())
}

/// Output directory from config, overridable by the environment.
pub fn resolve_output_dir(cfg: &mut RunConfig) {
    if let Ok(dir) = std::env::var("BELTRAMI_OUTPUT_DIR") {
        if !dir.is_empty() {
            cfg.output_dir = Some(PathBuf::from(dir));
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::parse_config;

    #[test]
    fn identity_pipeline_report() {
        let mut cfg = parse_config("field = zero\ngrid-n = 64\nops = solve,oracle-compare\n")
            .unwrap();
        cfg.tol = 1e-10;
        let (report, _) = run(&cfg).unwrap();
        assert_eq!(report.ops.len(), 2);
        assert!(report.ops.iter().all(|o| o.ok), "{:?}", report.ops);
        let sup = report.ops[1].summary["sup-error"].as_f64().unwrap();
        assert!(sup <= 1e-10, "sup error {sup}");
    }

    #[test]
    fn op_failure_is_recorded_not_fatal() {
        // shabat has no oracle; the op fails but the run completes.
        let cfg = parse_config("field = shabat:support=1\ngrid-n = 64\nops = oracle-compare\n")
            .unwrap();
        let (report, _) = run(&cfg).unwrap();
        assert!(!report.ops[0].ok);
        assert!(report.ops[0].error.as_deref().unwrap().contains("oracle"));
    }

    #[test]
    fn report_bytes_deterministic() {
        let cfg = parse_config(
            "field = radial-stretch:k=2,support=1\ngrid-n = 64\nops = solve,homogeneity,lehto\n",
        )
        .unwrap();
        let (a, _) = run(&cfg).unwrap();
        let (b, _) = run(&cfg).unwrap();
        assert_eq!(report_json(&a), report_json(&b));
    }

    #[test]
    fn criteria_ops_run_without_solver() {
        let cfg = parse_config(
            "field = kprofile:kind=log-inv,mode=radial\nphi = exp:alpha=1\n\
             ops = lehto,phi-divergence,remark11,infinity-tail\n",
        )
        .unwrap();
        let (report, _) = run(&cfg).unwrap();
        assert!(report.ops.iter().all(|o| o.ok), "{:?}", report.ops);
        assert!(report.clamp_count + report.cap_count < u64::MAX);
    }

    #[test]
    fn files_land_in_output_dir() {
        let dir = tempfile::tempdir().unwrap();
        let mut cfg =
            parse_config("field = zero\ngrid-n = 64\nops = solve,homogeneity\n").unwrap();
        cfg.output_dir = Some(dir.path().to_path_buf());
        let (report, _) = run(&cfg).unwrap();
        assert!(dir.path().join("mapping.qcm").is_file());
        assert!(dir.path().join("mapping.csv").is_file());
        assert!(dir.path().join("homogeneity.csv").is_file());
        assert!(dir.path().join("report.json").is_file());
        assert!(dir.path().join("timings.json").is_file());
        assert_eq!(report.ops[0].files, vec!["mapping.qcm", "mapping.csv"]);
        // echoed config never leaks the machine-specific path
        assert!(report.config.output_dir.is_none());
    }
}
