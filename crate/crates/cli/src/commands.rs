//! Subcommands: run an experiment, then write CSV/JSON outputs and a
//! provenance record into the output directory.

use std::path::{Path, PathBuf};

use ndarray::Array2;
use serde::Serialize;

use maternact::activations::ActivationKind;
use maternact::io::{write_csv_rows, write_json, write_matrix_csv};
use maternact::kernels::{gram_matrix, EnvelopeParams, MatNnKernel, MaternParams};
use maternact::mc_kernel::{sample_features, BiasPrior, RandomFeatureConfig, WeightPrior};
use maternact::rbf_eigen::{eigenfunctions_upto, eigenvalue, EigenParams};
use maternact::{Error, Result};

use crate::experiments::{
    classify_2d, kernel_check, linspace, regress_1d, tabular, ActivationChoice, Classify2dConfig, KernelCheckConfig,
    Regress1dConfig, TabularConfig, REGRESSION_PROBES,
};

#[derive(Serialize)]
struct Provenance<'a, C: Serialize> {
    tool: &'static str,
    version: &'static str,
    command: &'a str,
    config: &'a C,
    outputs: &'a [&'a str],
}

/// Writes `<command>.provenance.json` listing the config and output files.
fn provenance<C: Serialize>(out_dir: &Path, command: &str, config: &C, outputs: &[&str]) -> Result<()> {
    let p = Provenance {
        tool: "maternact",
        version: env!("CARGO_PKG_VERSION"),
        command,
        config,
        outputs,
    };
    write_json(&out_dir.join(format!("{command}.provenance.json")), &p)
}

pub fn run_kernel_check(cfg: &KernelCheckConfig, out_dir: &Path) -> Result<()> {
    let r = kernel_check(cfg)?;
    let rows = (0..r.x.len()).map(|i| [r.x[i], r.exact[i], r.mc_binary[i], r.mc_gaussian[i]]);
    write_csv_rows(
        &out_dir.join("kernel_check.csv"),
        &["x", "exact", "mc_binary", "mc_gaussian"],
        rows,
    )?;
    #[derive(Serialize)]
    struct KernelSummary {
        scale: f64,
        threshold: f64,
        n_compared: usize,
        max_rel_dev: f64,
        max_rel_dev_gaussian: f64,
    }
    write_json(
        &out_dir.join("kernel_check_summary.json"),
        &KernelSummary {
            scale: r.scale,
            threshold: crate::experiments::KERNEL_CHECK_THRESHOLD,
            n_compared: r.n_compared,
            max_rel_dev: r.max_rel_dev,
            max_rel_dev_gaussian: r.max_rel_dev_gaussian,
        },
    )?;
    log::info!("max relative deviation {:.4}", r.max_rel_dev);
    provenance(out_dir, "kernel-check", cfg, &["kernel_check.csv", "kernel_check_summary.json"])
}

pub fn run_regress_1d(cfg: &Regress1dConfig, out_dir: &Path) -> Result<()> {
    let r = regress_1d(cfg)?;
    for (name, c) in [("regress_1d_gp.csv", &r.gp), ("regress_1d_mlp.csv", &r.mlp)] {
        let rows = (0..c.x.len()).map(|i| [c.x[i], c.mean[i], c.std[i]]);
        write_csv_rows(&out_dir.join(name), &["x", "mean", "std"], rows)?;
    }
    #[derive(Serialize)]
    struct RegressSummary<'a> {
        probes: &'a [f64],
        gp_probe_std: &'a [f64],
        mlp_probe_std: &'a [f64],
        repeats_ok: usize,
        repeats_diverged: usize,
    }
    write_json(
        &out_dir.join("regress_1d_summary.json"),
        &RegressSummary {
            probes: &REGRESSION_PROBES,
            gp_probe_std: &r.gp_probe_std,
            mlp_probe_std: &r.mlp_probe_std,
            repeats_ok: r.repeats_ok,
            repeats_diverged: r.repeats_diverged,
        },
    )?;
    if r.repeats_diverged > 0 {
        log::warn!("{} of {} repeats diverged and were excluded", r.repeats_diverged, cfg.repeats);
    }
    provenance(
        out_dir,
        "regress-1d",
        cfg,
        &["regress_1d_gp.csv", "regress_1d_mlp.csv", "regress_1d_summary.json"],
    )
}

pub fn run_classify_2d(cfg: &Classify2dConfig, out_dir: &Path) -> Result<()> {
    let r = classify_2d(cfg)?;
    let rows = (0..r.grid.nrows()).map(|i| [r.grid[[i, 0]], r.grid[[i, 1]], r.p_class1[i], r.bernoulli_std[i]]);
    write_csv_rows(
        &out_dir.join("classify_2d_grid.csv"),
        &["x1", "x2", "p_class1", "bernoulli_std"],
        rows,
    )?;
    write_json(&out_dir.join("classify_2d_summary.json"), &r)?;
    log::info!(
        "test accuracy {:.4}, locality ratio {:.3}",
        r.test_accuracy,
        r.locality_ratio
    );
    provenance(
        out_dir,
        "classify-2d",
        cfg,
        &["classify_2d_grid.csv", "classify_2d_summary.json"],
    )
}

pub fn run_tabular(cfg: &TabularConfig, out_dir: &Path) -> Result<()> {
    let r = tabular(cfg)?;
    write_json(&out_dir.join("tabular_report.json"), &r)?;
    log::info!(
        "accuracy {:.3} ± {:.3}, NLPD {:.3} ± {:.3}",
        r.accuracy.mean,
        r.accuracy.std,
        r.nlpd.mean,
        r.nlpd.std
    );
    provenance(out_dir, "tabular", cfg, &["tabular_report.json"])
}

#[derive(Debug, Clone, Serialize)]
pub struct ActivationDumpConfig {
    pub activation: ActivationChoice,
    pub nu: Option<f64>,
    pub ell: f64,
    pub x_min: f64,
    pub x_max: f64,
    pub points: usize,
}

pub fn run_activation_dump(cfg: &ActivationDumpConfig, out_dir: &Path) -> Result<()> {
    let act = cfg.activation.build(cfg.nu, cfg.ell)?;
    let rows = grid(cfg.x_min, cfg.x_max, cfg.points)?
        .into_iter()
        .map(|x| [x, act.apply(x), act.derivative(x)]);
    write_csv_rows(&out_dir.join("activation.csv"), &["x", "value", "derivative"], rows)?;
    provenance(out_dir, "activation-dump", cfg, &["activation.csv"])
}

#[derive(Debug, Clone, Serialize)]
pub struct EigenbasisConfig {
    pub alpha: f64,
    pub beta: f64,
    pub terms: usize,
    pub x_min: f64,
    pub x_max: f64,
    pub points: usize,
}

pub fn run_eigenbasis(cfg: &EigenbasisConfig, out_dir: &Path) -> Result<()> {
    let p = EigenParams::new(cfg.alpha, cfg.beta)?;
    if cfg.terms == 0 {
        return Err(Error::Domain("need at least one term".into()));
    }
    let j_max = cfg.terms - 1;
    let values = (0..cfg.terms)
        .map(|j| Ok([j as f64, eigenvalue(&p, j)?]))
        .collect::<Result<Vec<_>>>()?;
    write_csv_rows(&out_dir.join("eigenvalues.csv"), &["j", "gamma"], values)?;
    let names: Vec<String> = std::iter::once("x".to_string())
        .chain((0..=j_max).map(|j| format!("phi_{j}")))
        .collect();
    let header: Vec<&str> = names.iter().map(String::as_str).collect();
    let rows = grid(cfg.x_min, cfg.x_max, cfg.points)?
        .into_iter()
        .map(|x| {
            let mut row = vec![x];
            row.extend(eigenfunctions_upto(&p, j_max, x)?);
            Ok(row)
        })
        .collect::<Result<Vec<_>>>()?;
    write_csv_rows(&out_dir.join("eigenfunctions.csv"), &header, rows)?;
    provenance(out_dir, "eigenbasis", cfg, &["eigenvalues.csv", "eigenfunctions.csv"])
}

#[derive(Debug, Clone, Serialize)]
pub struct GramConfig {
    pub nu: f64,
    pub ell: f64,
    pub sigma_b2: f64,
    pub x_min: f64,
    pub x_max: f64,
    pub points: usize,
    /// When set, also writes a Monte Carlo Gram matrix from this many features.
    pub k: Option<usize>,
    pub seed: u64,
}

pub fn run_gram(cfg: &GramConfig, out_dir: &Path) -> Result<()> {
    let xs = grid(cfg.x_min, cfg.x_max, cfg.points)?;
    let x = Array2::from_shape_vec((xs.len(), 1), xs.clone()).expect("column shape");
    let kernel = MatNnKernel {
        matern: MaternParams::new(cfg.nu, cfg.ell)?,
        envelope: EnvelopeParams::new(cfg.sigma_b2, cfg.ell)?,
        scale: 1.0,
    };
    write_csv_rows(&out_dir.join("gram_inputs.csv"), &["x"], xs.iter().map(|&v| [v]))?;
    write_matrix_csv(&out_dir.join("gram.csv"), gram_matrix(&kernel, x.view(), 0.0).view())?;
    let mut outputs = vec!["gram_inputs.csv", "gram.csv"];
    if let Some(k) = cfg.k {
        let rf = RandomFeatureConfig::new(WeightPrior::BinaryWhite, BiasPrior::new(cfg.sigma_b2)?, k, cfg.seed)?;
        let act = ActivationKind::matern(cfg.nu, cfg.ell)?;
        let g = sample_features(&rf, 1)?.gram(&act, x.view())?;
        write_matrix_csv(&out_dir.join("gram_mc.csv"), g.view())?;
        outputs.push("gram_mc.csv");
    }
    provenance(out_dir, "gram", cfg, &outputs)
}

fn grid(a: f64, b: f64, n: usize) -> Result<Vec<f64>> {
    if n < 2 || !(b > a) || !a.is_finite() || !b.is_finite() {
        return Err(Error::Domain(format!("invalid grid [{a}, {b}] with {n} points")));
    }
    Ok(linspace(a, b, n))
}

/// Process exit status for each error category.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Domain(_) | Error::Dimension { .. } | Error::Usage(_) => 2,
        Error::Io { .. } | Error::Csv(_) | Error::Json(_) | Error::Load { .. } => 3,
        Error::Numerical(_) => 4,
        Error::Training { .. } => 5,
    }
}

pub fn ensure_dir(out_dir: &Path) -> Result<PathBuf> {
    std::fs::create_dir_all(out_dir).map_err(|e| Error::Io {
        path: out_dir.to_path_buf(),
        source: e,
    })?;
    Ok(out_dir.to_path_buf())
}
