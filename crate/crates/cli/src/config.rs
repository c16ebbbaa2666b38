use anyhow::{bail, Context, Result};
use qhgeo::maps::{PropertyAConfig, PropertyBConfig};
use qhgeo::{Domain, GridParams, MetricGraph, Stencil};
use serde::Deserialize;
use std::path::{Path, PathBuf};

/// Partial grid settings; unset fields keep the library defaults.
#[derive(Debug, Default, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub h_coarse: Option<f64>,
    pub whitney_c: Option<f64>,
    pub max_nodes: Option<usize>,
    pub stencil: Option<Stencil>,
    pub max_depth: Option<u8>,
}

/// Experiment settings read from `--config`. Command-line flags win over
/// anything set here; relative paths resolve against the config file.
#[derive(Debug, Default, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub domain: Option<PathBuf>,
    pub target: Option<PathBuf>,
    pub map: Option<PathBuf>,
    #[serde(default)]
    pub grid: GridConfig,
    pub seed: Option<u64>,
    pub pairs: Option<usize>,
    pub mode: Option<String>,
    pub threshold: Option<f64>,
    pub tol: Option<f64>,
    pub quadruples: Option<usize>,
    pub pool: Option<usize>,
    pub tau: Option<f64>,
    pub anchors: Option<usize>,
    pub approach_depth: Option<u32>,
    pub triples: Option<usize>,
    pub bins: Option<usize>,
    pub property_a: Option<PropertyAConfig>,
    pub property_b: Option<PropertyBConfig>,
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        let mut cfg: ExperimentConfig = serde_json::from_str(&text)
            .with_context(|| format!("parsing config {}", path.display()))?;
        let dir = path.parent().unwrap_or(Path::new("."));
        for p in [&mut cfg.domain, &mut cfg.target, &mut cfg.map]
            .into_iter()
            .flatten()
        {
            if p.is_relative() {
                *p = dir.join(&*p);
            }
            if !p.exists() {
                bail!(
                    "config {} references missing file {}",
                    path.display(),
                    p.display()
                );
            }
        }
        Ok(cfg)
    }
}

/// Grid flags given on the command line.
#[derive(Debug, Default, Clone, Copy)]
pub struct GridFlags {
    pub h: Option<f64>,
    pub whitney_c: Option<f64>,
    pub max_depth: Option<u8>,
    pub max_nodes: Option<usize>,
    pub stencil: Option<Stencil>,
}

pub fn grid_params(flags: GridFlags, cfg: &GridConfig) -> Result<GridParams> {
    let d = GridParams::default();
    let p = GridParams {
        h_coarse: flags.h.or(cfg.h_coarse).unwrap_or(d.h_coarse),
        whitney_c: flags.whitney_c.or(cfg.whitney_c).unwrap_or(d.whitney_c),
        max_nodes: flags.max_nodes.or(cfg.max_nodes).unwrap_or(d.max_nodes),
        stencil: flags.stencil.or(cfg.stencil).unwrap_or(d.stencil),
        max_depth: flags.max_depth.or(cfg.max_depth).unwrap_or(d.max_depth),
    };
    p.validate().context("grid parameters")?;
    Ok(p)
}

pub fn load_domain(path: &Path) -> Result<Domain> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading domain {}", path.display()))?;
    Domain::from_json(&text).with_context(|| format!("loading domain {}", path.display()))
}

pub fn build_graph(domain: &Domain, params: GridParams, label: &Path) -> Result<MetricGraph> {
    MetricGraph::build(domain, params).with_context(|| format!("discretizing {}", label.display()))
}
