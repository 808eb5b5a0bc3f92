//! Batch front end: subcommands, artifact files and exit codes.
//!
//! Exit codes: 0 success, 2 configuration error, 3 numerical failure.
//! A numerical failure still writes `summary.json` with status `failed`.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use crate::bands::{bracketing_batch, gap_report, sweep_path, MeshProvenance};
use crate::bessel::{delta_tilde, disc_spectrum};
use crate::config::{RunConfig, StudyKind};
use crate::dirac::{branch_sample, dirac_report, transition_scan, vd_scaling_study};
use crate::error::{Error, Result};
use crate::lattice::{kpath_mgkm, scale, add, LatticeBasis, Vec2};
use crate::mesh::{build_mesh, compose_action, Mesh};
use crate::output::{schema, ArtifactWriter, Cell, Header, RunSummary, TOOL_VERSION};
use crate::par::prelude::*;
use crate::symmetry::Label;

/// omega = c sqrt(lambda / g): TE frequency of a spectral value of the
/// scaled operator.
pub fn te_frequency(lambda: f64, g: f64, c: f64) -> Result<f64> {
    if !(lambda >= 0.0) {
        return Err(Error::Invalid(format!("lambda must be >= 0, got {lambda}")));
    }
    if !(g > 0.0) || !(c > 0.0) {
        return Err(Error::Invalid(format!("g and c must be > 0, got g = {g}, c = {c}")));
    }
    Ok(c * (lambda / g).sqrt())
}

#[derive(Debug, Parser)]
#[command(name = "dirac-fem", version, about = "Bloch bands and Dirac points of high-contrast honeycomb crystals")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args, Default)]
pub struct Overrides {
    /// Config file; command-line flags override its values.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, allow_negative_numbers = true)]
    pub r0: Option<f64>,
    #[arg(long)]
    pub refine: Option<usize>,
    #[arg(long)]
    pub order: Option<usize>,
    #[arg(long, allow_negative_numbers = true)]
    pub g: Option<f64>,
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub g_list: Option<Vec<f64>>,
    #[arg(long)]
    pub nbands: Option<usize>,
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long, allow_negative_numbers = true)]
    pub g_lo: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub g_hi: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build the cell mesh and export it as text.
    Mesh(Overrides),
    /// Disc Dirichlet spectrum from Bessel zeros.
    Oracle(Overrides),
    /// Dispersion along M -> Gamma -> K -> M.
    Bands(Overrides),
    /// Neumann / Bloch / Dirichlet bracketing at random k.
    Bracketing(Overrides),
    /// Dirac point report at K, or with --scan the transition in g.
    Dirac {
        #[command(flatten)]
        o: Overrides,
        #[arg(long)]
        scan: bool,
    },
    /// Dirac velocity over physics.g_list.
    ScanG(Overrides),
    /// High-contrast expansion study over physics.g_list.
    Asymptotics(Overrides),
    /// Convert a spectral value to a TE frequency.
    Te {
        #[arg(long, allow_negative_numbers = true)]
        lambda: f64,
        #[arg(long, allow_negative_numbers = true)]
        g: f64,
        #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
        c: f64,
    },
    /// Run the study named in the config file.
    Run {
        #[arg(long)]
        config: PathBuf,
    },
}

/// Config from file (or defaults) with flag overrides, validated.
pub fn resolve(o: &Overrides, kind: Option<StudyKind>) -> Result<RunConfig> {
    let mut c = match &o.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if let Some(k) = kind {
        c.study.kind = k;
    }
    if let Some(v) = &o.out {
        c.output.dir = v.clone();
    }
    if let Some(v) = o.r0 {
        c.geometry.r0 = v;
    }
    if let Some(v) = o.refine {
        c.mesh.refine = v;
    }
    if let Some(v) = o.order {
        c.mesh.order = v;
    }
    if let Some(v) = o.g {
        c.physics.g = v;
    }
    if let Some(v) = &o.g_list {
        c.physics.g_list = v.clone();
    }
    if let Some(v) = o.nbands {
        c.spectral.nbands = v;
    }
    if let Some(v) = o.samples {
        c.spectral.samples_per_segment = v;
    }
    if let Some(v) = o.g_lo {
        c.study.g_lo = v;
    }
    if let Some(v) = o.g_hi {
        c.study.g_hi = v;
    }
    if let Some(v) = o.seed {
        c.study.seed = v;
    }
    c.validate()?;
    Ok(c)
}

struct Run<'a> {
    cfg: &'a RunConfig,
    w: ArtifactWriter,
    checks: Vec<(String, bool)>,
    provenance: Option<MeshProvenance>,
}

impl Run<'_> {
    fn header(&self, schema: &str) -> Header {
        Header {
            schema: schema.into(),
            config_hash: self.cfg.hash(),
            provenance: self.provenance,
        }
    }

    fn mesh(&mut self) -> Result<Mesh> {
        let m = build_mesh(&self.cfg.cell_geometry(), self.cfg.mesh.refine, self.cfg.mesh.order)?;
        self.provenance = Some(MeshProvenance::of(&m));
        Ok(m)
    }

    fn check(&mut self, name: &str, ok: bool) {
        self.checks.push((name.into(), ok));
    }
}

/// Random quasimomenta in the reduced zone t1 k1 + t2 k2, t in [-1/2, 1/2).
pub fn random_ks(seed: u64, count: usize) -> Vec<Vec2> {
    let b = LatticeBasis::honeycomb();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let t1: f64 = rng.random::<f64>() - 0.5;
            let t2: f64 = rng.random::<f64>() - 0.5;
            add(scale(t1, b.k1), scale(t2, b.k2))
        })
        .collect()
}

fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect()
}

fn study_name(k: StudyKind, scan: bool) -> &'static str {
    match k {
        StudyKind::Mesh => "mesh",
        StudyKind::Oracle => "oracle",
        StudyKind::Bands => "bands",
        StudyKind::Bracketing => "bracketing",
        StudyKind::Dirac if scan => "dirac-scan",
        StudyKind::Dirac => "dirac",
        StudyKind::ScanG => "scan-g",
        StudyKind::Asymptotics => "asymptotics",
    }
}

fn study(r: &mut Run, scan: bool) -> Result<serde_json::Value> {
    let cfg = r.cfg;
    match cfg.study.kind {
        StudyKind::Mesh => {
            let m = r.mesh()?;
            r.w.text("mesh.txt", &crate::mesh_io::mesh_to_string(&m))?;
            let rot3 = compose_action(&m.rot_action, 3);
            let inv2 = compose_action(&m.inv_action, 2);
            r.check("rotation_cubes_to_identity", rot3.iter().enumerate().all(|(d, x)| x.target == d));
            r.check("inversion_squares_to_identity", inv2.iter().enumerate().all(|(d, x)| x.target == d));
            Ok(json!({
                "n_nodes": m.nodes.len(),
                "n_elements": m.n_elements(),
                "n_dofs": m.n_dofs(),
                "h_max": m.max_diameter(),
                "area": m.total_area(),
            }))
        }
        StudyKind::Oracle => {
            let spec = disc_spectrum(cfg.geometry.r0, cfg.study.oracle_count)?;
            let rows: Vec<Vec<Cell>> = spec
                .iter()
                .map(|e| vec![e.value.into(), e.p.into(), e.q.into(), e.multiplicity.into(), e.satisfies_s.into()])
                .collect();
            let h = r.header(schema::ORACLE);
            r.w.csv("oracle.csv", &h, schema::ORACLE_COLUMNS, &rows)?;
            r.check("ascending", spec.windows(2).all(|w| w[0].value < w[1].value));
            Ok(json!({ "entries": spec.len() }))
        }
        StudyKind::Bands => {
            let m = r.mesh()?;
            let path = kpath_mgkm(cfg.spectral.samples_per_segment)?;
            let t = sweep_path(&m, cfg.physics.g, &path, cfg.spectral.nbands)?;
            let rows: Vec<Vec<Cell>> = t
                .k_samples
                .iter()
                .zip(&t.bands)
                .map(|(s, b)| {
                    let mut row: Vec<Cell> = vec![s.arclength.into(), s.k.k[0].into(), s.k.k[1].into()];
                    row.extend(b.iter().map(|&x| Cell::F(x)));
                    row
                })
                .collect();
            let h = r.header(schema::BANDS);
            r.w.csv("bands.csv", &h, &schema::bands_columns(t.nbands), &rows)?;
            let d1 = delta_tilde(cfg.geometry.r0, 1)?.value;
            let mut details = json!({ "g": t.g, "delta_tilde_1": d1, "ticks": path.ticks() });
            if t.nbands >= 2 {
                let max2 = t.band(2).into_iter().fold(f64::NEG_INFINITY, f64::max);
                r.check("lambda2_below_delta_tilde_1", max2 < d1);
                details["lambda2_max"] = json!(max2);
            }
            if t.nbands >= 3 {
                let gap = gap_report(&t, 2)?;
                r.check("gap_between_bands_2_and_3", gap.gap_exists);
                details["gap_2_3"] = json!(gap);
            }
            Ok(details)
        }
        StudyKind::Bracketing => {
            let m = r.mesh()?;
            let ks = random_ks(cfg.study.seed, cfg.study.n_random_k);
            let res = bracketing_batch(&m, cfg.physics.g, cfg.spectral.nbands, &ks)?;
            let rows: Vec<Vec<Cell>> = res
                .iter()
                .map(|b| {
                    vec![b.k[0].into(), b.k[1].into(), b.n.into(), b.neumann.into(), b.bloch.into(), b.dirichlet.into(), b.holds.into()]
                })
                .collect();
            let h = r.header(schema::BRACKETING);
            r.w.csv("bracketing.csv", &h, schema::BRACKETING_COLUMNS, &rows)?;
            r.check("bracketing_holds", res.iter().all(|b| b.holds));
            Ok(json!({ "g": cfg.physics.g, "samples": res.len() }))
        }
        StudyKind::Dirac if scan => {
            let m = r.mesh()?;
            let gs = linspace(cfg.study.g_lo, cfg.study.g_hi, cfg.study.scan_points);
            let samples = gs.par_iter().map(|&g| branch_sample(&m, g)).collect::<Result<Vec<_>>>()?;
            let rows: Vec<Vec<Cell>> = samples
                .iter()
                .map(|s| {
                    vec![s.g.into(), s.lambdas[0].into(), s.lambdas[1].into(), s.lambdas[2].into(), s.simple_label.as_str().into()]
                })
                .collect();
            let h = r.header(schema::DIRAC_SCAN);
            r.w.csv("dirac_scan.csv", &h, schema::DIRAC_SCAN_COLUMNS, &rows)?;
            let tr = transition_scan(&m, cfg.study.g_lo, cfg.study.g_hi, 1e-4)?;
            let labels_ok = samples
                .iter()
                .chain(&tr.samples)
                .all(|s| s.simple_label == Label::One && s.pair_labels == [Label::Tau, Label::TauBar]);
            r.check("transition_bracketed", tr.g_c > cfg.study.g_lo && tr.g_c < cfg.study.g_hi);
            r.check("branch_labels", labels_ok);
            Ok(json!({ "g_c": tr.g_c, "lambda_c": tr.lambda_c, "triple_spread": tr.triple_spread }))
        }
        StudyKind::Dirac => {
            let m = r.mesh()?;
            let rep = dirac_report(&m, cfg.physics.g, cfg.spectral.nbands.max(3), None, cfg.study.cone_directions.max(1))?;
            r.w.json("dirac.json", &rep)?;
            r.check("degenerate_pair", rep.degeneracy_gap < crate::dirac::DEGENERACY_TOL);
            r.check("labels_tau_tau_bar", rep.labels == [Label::Tau, Label::TauBar]);
            r.check("nondegenerate_velocity", rep.passed_nondegeneracy);
            Ok(json!({ "lambda_d": rep.lambda_d, "v_formula": rep.v_formula, "v_cone_mean": rep.v_cone_mean }))
        }
        StudyKind::ScanG => {
            let m = r.mesh()?;
            let s = vd_scaling_study(&m, &cfg.physics.g_list, cfg.study.cone_directions)?;
            let rows: Vec<Vec<Cell>> = s
                .rows
                .iter()
                .map(|v| vec![v.g.into(), v.v_formula.into(), v.v_cone.unwrap_or(f64::NAN).into(), v.g_times_v.into()])
                .collect();
            let h = r.header(schema::VELOCITY);
            r.w.csv("velocity.csv", &h, schema::VELOCITY_COLUMNS, &rows)?;
            r.check("slope_near_minus_one", (-1.05..=-0.95).contains(&s.slope));
            r.check("g_times_v_flat", s.spread < 0.05);
            Ok(json!({ "slope": s.slope, "plateau": s.plateau, "spread": s.spread }))
        }
        StudyKind::Asymptotics => {
            let m = r.mesh()?;
            let a = crate::asymptotics::asymptotics_study(&m, cfg.study.q, &cfg.physics.g_list)?;
            let rows: Vec<Vec<Cell>> = a
                .rows
                .iter()
                .map(|x| {
                    [x.g, x.lambda_d, x.prediction_m0, x.prediction_m1, x.residual_m0, x.residual_m1, x.eta_m0, x.eta_m1, x.l2_dev, x.h1_dev]
                        .into_iter()
                        .map(Cell::F)
                        .collect()
                })
                .collect();
            let h = r.header(schema::ASYMPTOTICS);
            r.w.csv("asymptotics.csv", &h, schema::ASYMPTOTICS_COLUMNS, &rows)?;
            r.check("lambda1_negative", a.lambda1 < 0.0);
            r.check("first_order_closure", (-2.2..=-1.8).contains(&a.slope_residual_m1));
            Ok(json!({
                "delta": a.delta,
                "delta_exact": a.delta_exact,
                "lambda1": a.lambda1,
                "slope_residual_m0": a.slope_residual_m0,
                "slope_residual_m1": a.slope_residual_m1,
                "slope_eta_m0": a.slope_eta_m0,
                "slope_eta_m1": a.slope_eta_m1,
                "slope_l2": a.slope_l2,
                "slope_h1": a.slope_h1,
            }))
        }
    }
}

/// Runs one study and writes its artifacts plus `summary.json`.
/// Numerical failures are reported in the summary and returned as errors.
pub fn run(cfg: &RunConfig, scan: bool) -> Result<RunSummary> {
    let scan = scan || cfg.study.scan;
    let w = ArtifactWriter::new(&cfg.output.dir)?;
    let mut r = Run {
        cfg,
        w,
        checks: Vec::new(),
        provenance: None,
    };
    let out = study(&mut r, scan);
    let (status, error, details) = match &out {
        Ok(d) if r.checks.iter().all(|c| c.1) => ("ok", None, d.clone()),
        Ok(d) => ("partial", None, d.clone()),
        Err(e) => ("failed", Some(e.to_string()), serde_json::Value::Null),
    };
    let mut summary = RunSummary {
        tool: TOOL_VERSION.into(),
        study: study_name(cfg.study.kind, scan).into(),
        config_sha256: cfg.hash(),
        provenance: r.provenance,
        status: status.into(),
        error,
        checks: r.checks.clone(),
        artifacts: r.w.written.iter().map(|p| p.display().to_string()).collect(),
        details,
    };
    summary.artifacts.push(cfg.output.dir.join("summary.json").display().to_string());
    r.w.json("summary.json", &summary)?;
    out.map(|_| summary)
}

/// Parse and execute; returns the process exit code.
pub fn execute(cli: Cli) -> i32 {
    let res = match cli.command {
        Command::Te { lambda, g, c } => match te_frequency(lambda, g, c) {
            Ok(w) => {
                println!("{w:.16e}");
                return 0;
            }
            Err(e) => Err(e),
        },
        Command::Run { config } => RunConfig::load(&config).and_then(|c| run(&c, false)),
        Command::Mesh(o) => resolve(&o, Some(StudyKind::Mesh)).and_then(|c| run(&c, false)),
        Command::Oracle(o) => resolve(&o, Some(StudyKind::Oracle)).and_then(|c| run(&c, false)),
        Command::Bands(o) => resolve(&o, Some(StudyKind::Bands)).and_then(|c| run(&c, false)),
        Command::Bracketing(o) => resolve(&o, Some(StudyKind::Bracketing)).and_then(|c| run(&c, false)),
        Command::Dirac { o, scan } => resolve(&o, Some(StudyKind::Dirac)).and_then(|c| run(&c, scan)),
        Command::ScanG(o) => resolve(&o, Some(StudyKind::ScanG)).and_then(|c| run(&c, false)),
        Command::Asymptotics(o) => resolve(&o, Some(StudyKind::Asymptotics)).and_then(|c| run(&c, false)),
    };
    match res {
        Ok(s) => {
            for a in &s.artifacts {
                println!("{a}");
            }
            for (name, ok) in &s.checks {
                println!("{} {name}", if *ok { "ok  " } else { "FAIL" });
            }
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
