//! Tidy CSV tables for each figure panel.

use std::fmt;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use super::envelope::{alpha_key, ResultEnvelope, TaskStatus};
use crate::error::{Error, Result};
use crate::hamiltonian::ModelKind;
use crate::numfmt::f64_17;
use crate::spectrum::{FitResult, Histogram};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FigureId {
    /// Ground-state connected histograms and fit parameters.
    Fig1,
    /// `M_α` and `M̃_α` against `α`.
    Fig2a,
    /// `M₂` against `N`.
    Fig2b,
    /// `M̃_α` against `N` for SYK₂.
    Fig2c,
    /// `M̃_α` against `N` for SYK.
    Fig2d,
    /// Quench snapshot histograms and fits.
    Fig3,
    /// Disorder-averaged `M₂(t)`.
    Fig4,
    /// Long-time `M₂` against `N`.
    Fig4d,
}

impl FigureId {
    pub const ALL: [FigureId; 8] = [
        FigureId::Fig1,
        FigureId::Fig2a,
        FigureId::Fig2b,
        FigureId::Fig2c,
        FigureId::Fig2d,
        FigureId::Fig3,
        FigureId::Fig4,
        FigureId::Fig4d,
    ];

    pub fn name(self) -> &'static str {
        match self {
            FigureId::Fig1 => "fig1",
            FigureId::Fig2a => "fig2a",
            FigureId::Fig2b => "fig2b",
            FigureId::Fig2c => "fig2c",
            FigureId::Fig2d => "fig2d",
            FigureId::Fig3 => "fig3",
            FigureId::Fig4 => "fig4",
            FigureId::Fig4d => "fig4d",
        }
    }
}

impl fmt::Display for FigureId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FigureId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        FigureId::ALL
            .into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| Error::Parse(format!("unknown figure {s:?}")))
    }
}

/// CSV rows collected in memory and written in one go.
struct Table {
    header: &'static str,
    rows: Vec<String>,
}

impl Table {
    fn new(header: &'static str) -> Self {
        Table { header, rows: Vec::new() }
    }

    fn require(self, what: &str) -> Result<Self> {
        if self.rows.is_empty() {
            return Err(Error::MissingObservable(what.to_string()));
        }
        Ok(self)
    }

    fn write(&self, path: &Path) -> Result<()> {
        let mut f = std::io::BufWriter::new(fs::File::create(path)?);
        writeln!(f, "{}", self.header)?;
        for r in &self.rows {
            writeln!(f, "{r}")?;
        }
        f.flush()?;
        Ok(())
    }
}

fn histogram_rows(table: &mut Table, prefix: &str, h: &Histogram) {
    for (c, p) in h.centers().iter().zip(&h.density) {
        table.rows.push(format!("{prefix},{},{}", f64_17(*c), f64_17(*p)));
    }
}

fn fit_rows(table: &mut Table, prefix: &str, fits: [&FitResult; 2]) {
    for f in fits {
        table.rows.push(format!(
            "{prefix},{},{},{},{},{},{}",
            f.family.name(),
            f64_17(f.b_fitted),
            f64_17(f.b_constrained),
            f64_17(f.log_likelihood),
            f64_17(f.d0_model),
            f.sample_count
        ));
    }
}

fn ok_tasks(env: &ResultEnvelope) -> impl Iterator<Item = &super::envelope::TaskRecord> {
    env.tasks.iter().filter(|t| t.status == TaskStatus::Ok)
}

/// `(N, mean, std, model)` for one summary statistic.
fn scaling(env: &ResultEnvelope, key: &str, header: &'static str) -> Table {
    let mut t = Table::new(header);
    for g in &env.summary {
        if let Some(s) = g.stats.get(key) {
            t.rows.push(format!("{},{},{},{}", g.n, f64_17(s.mean), f64_17(s.std), g.model));
        }
    }
    t
}

fn filtered_by_alpha(env: &ResultEnvelope, model: ModelKind) -> Table {
    let mut t = Table::new("N,alpha,M_filtered_mean,M_filtered_std,model");
    for g in env.summary.iter().filter(|g| g.model == model) {
        for &alpha in &env.config.alphas {
            if let Some(s) = g.stats.get(&(alpha_key("M", alpha) + "_filtered")) {
                t.rows.push(format!("{},{},{},{},{}", g.n, f64_17(alpha), f64_17(s.mean), f64_17(s.std), g.model));
            }
        }
    }
    t
}

/// Write the tables behind `figure` into `out_dir`; returns the files written.
pub fn export_figure_data(env: &ResultEnvelope, figure: FigureId, out_dir: &Path) -> Result<Vec<PathBuf>> {
    let mut tables: Vec<(String, Table)> = Vec::new();
    match figure {
        FigureId::Fig1 => {
            let mut hist = Table::new("model,N,realization,bin_center,density");
            let mut fits = Table::new("model,N,realization,family,b_fitted,b_constrained,log_likelihood,d0_model,sample_count");
            for t in ok_tasks(env) {
                let prefix = format!("{},{},{}", t.model, t.n, t.realization);
                if let Some(h) = &t.histogram {
                    histogram_rows(&mut hist, &prefix, h);
                }
                if let (Some(f), Some(_)) = (&t.fits, &t.histogram) {
                    fit_rows(&mut fits, &prefix, [&f.gaussian, &f.laplace]);
                }
            }
            tables.push(("fig1_histograms.csv".into(), hist.require("ground-state histograms")?));
            tables.push(("fig1_fits.csv".into(), fits));
        }
        FigureId::Fig2a => {
            let mut t = Table::new("model,N,alpha,M_mean,M_std,M_filtered_mean,M_filtered_std");
            for g in &env.summary {
                for &alpha in &env.config.alphas {
                    let key = alpha_key("M", alpha);
                    if let (Some(m), Some(f)) = (g.stats.get(&key), g.stats.get(&(key.clone() + "_filtered"))) {
                        t.rows.push(format!(
                            "{},{},{},{},{},{},{}",
                            g.model,
                            g.n,
                            f64_17(alpha),
                            f64_17(m.mean),
                            f64_17(m.std),
                            f64_17(f.mean),
                            f64_17(f.std)
                        ));
                    }
                }
            }
            tables.push(("fig2a.csv".into(), t.require("M_alpha")?));
        }
        FigureId::Fig2b => {
            let t = scaling(env, "M2", "N,M2_mean,M2_std,model");
            tables.push(("fig2b.csv".into(), t.require("M2")?));
        }
        FigureId::Fig2c => {
            tables.push(("fig2c.csv".into(), filtered_by_alpha(env, ModelKind::Syk2).require("SYK2 filtered SRE")?));
        }
        FigureId::Fig2d => {
            tables.push(("fig2d.csv".into(), filtered_by_alpha(env, ModelKind::Syk4).require("SYK filtered SRE")?));
        }
        FigureId::Fig3 => {
            let mut hist = Table::new("model,N,realization,t,bin_center,density");
            let mut fits =
                Table::new("model,N,realization,t,family,b_fitted,b_constrained,log_likelihood,d0_model,sample_count");
            for task in ok_tasks(env) {
                for s in task.snapshots.iter().flatten() {
                    let prefix = format!("{},{},{},{}", task.model, task.n, task.realization, f64_17(s.t));
                    if let Some(h) = &s.histogram {
                        histogram_rows(&mut hist, &prefix, h);
                    }
                    if let Some(f) = &s.fits {
                        fit_rows(&mut fits, &prefix, [&f.gaussian, &f.laplace]);
                    }
                }
            }
            tables.push(("fig3_histograms.csv".into(), hist.require("quench snapshots")?));
            tables.push(("fig3_fits.csv".into(), fits));
        }
        FigureId::Fig4 => {
            let mut t = Table::new("t,M2,stderr,model,N");
            for g in &env.summary {
                for p in g.series.iter().flatten() {
                    t.rows.push(format!("{},{},{},{},{}", f64_17(p.t), f64_17(p.m2.mean), f64_17(p.m2.sem()), g.model, g.n));
                }
            }
            tables.push(("fig4.csv".into(), t.require("quench series")?));
        }
        FigureId::Fig4d => {
            let t = scaling(env, "M2_saturation", "N,M2_saturation_mean,std,model");
            tables.push(("fig4d.csv".into(), t.require("M2_saturation")?));
        }
    }
    fs::create_dir_all(out_dir)?;
    let mut written = Vec::new();
    for (name, table) in tables {
        let path = out_dir.join(name);
        table.write(&path)?;
        written.push(path);
    }
    Ok(written)
}
