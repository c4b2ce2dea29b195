//! Resolution of flags, config file and per-demo defaults into the values a
//! demo runs with, recorded for the report header.

use std::fs;
use std::path::{Path, PathBuf};

use setconv::demos::DemoConfig;
use setconv::{GridSpec, NormSpec};

use crate::args::{GlobalArgs, NormArg};
use crate::error::CliError;

#[derive(Debug)]
pub struct Context {
    pub demo: &'static str,
    rho: Option<f64>,
    pub norm: NormSpec,
    grid: Option<Vec<String>>,
    schedule: Option<Vec<f64>>,
    tolerance: Option<f64>,
    pub out: Option<PathBuf>,
    pub seed: u64,
    pub svg: bool,
    header: Vec<(String, String)>,
}

pub fn read_file(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

impl Context {
    pub fn new(demo: &'static str, flags: &GlobalArgs) -> Result<Self, CliError> {
        let mut ctx = Context {
            demo,
            rho: flags.rho,
            norm: match flags.norm {
                Some(NormArg::Max) => NormSpec::Max,
                _ => NormSpec::Euclidean,
            },
            grid: (!flags.grid.is_empty()).then(|| flags.grid.clone()),
            schedule: flags.schedule.clone(),
            tolerance: flags.tolerance,
            out: flags.out.clone(),
            seed: flags.seed.unwrap_or(0),
            svg: flags.svg,
            header: Vec::new(),
        };
        if let Some(path) = &flags.config {
            let config = DemoConfig::from_json(&read_file(path)?)?;
            if config.demo != demo {
                return Err(CliError::Usage(format!(
                    "config is for demo {:?} but the command is {demo:?}",
                    config.demo
                )));
            }
            ctx.apply(config);
        }
        if let Some(s) = &ctx.schedule {
            if s.is_empty() || s.iter().any(|v| !v.is_finite()) {
                return Err(CliError::Usage("schedule must be a nonempty list of finite numbers".into()));
            }
        }
        if ctx.svg && ctx.out.is_none() {
            return Err(CliError::Usage("--svg needs --out".into()));
        }
        ctx.record("demo", demo);
        ctx.record("seed", ctx.seed);
        ctx.record("norm", serde_json::to_string(&ctx.norm).expect("norm serializes"));
        Ok(ctx)
    }

    fn apply(&mut self, c: DemoConfig) {
        self.rho = c.rho.or(self.rho);
        self.norm = c.norm.unwrap_or(self.norm.clone());
        self.grid = c.grid.or(self.grid.take());
        self.schedule = c.schedule.or(self.schedule.take());
        self.tolerance = c.tolerance.or(self.tolerance);
        self.out = c.out.or(self.out.take());
        self.seed = c.seed.unwrap_or(self.seed);
        self.svg = c.svg.unwrap_or(self.svg);
    }

    pub fn record(&mut self, key: &str, value: impl ToString) {
        self.header.push((key.to_string(), value.to_string()));
    }

    pub fn header(&self) -> &[(String, String)] {
        &self.header
    }

    pub fn rho(&mut self, default: f64) -> Result<f64, CliError> {
        let rho = self.rho.unwrap_or(default);
        if !(rho >= 0.0 && rho.is_finite()) {
            return Err(CliError::Usage(format!("rho must be finite and >= 0, got {rho}")));
        }
        self.record("rho", rho);
        Ok(rho)
    }

    pub fn grid(&mut self, default: &[&str]) -> Result<GridSpec, CliError> {
        let args: Vec<String> = match &self.grid {
            Some(g) => g.clone(),
            None => default.iter().map(|s| s.to_string()).collect(),
        };
        let grid = GridSpec::from_args(&args)?;
        let shown: Vec<String> = grid.axes().iter().map(ToString::to_string).collect();
        self.record("grid", shown.join(" "));
        Ok(grid)
    }

    pub fn schedule(&mut self, default: &[f64]) -> Vec<f64> {
        let s = self.schedule.clone().unwrap_or_else(|| default.to_vec());
        self.record("schedule", join(&s));
        s
    }

    /// A schedule of positive integers.
    pub fn counts(&mut self, default: &[usize]) -> Result<Vec<usize>, CliError> {
        let raw = self.schedule(&default.iter().map(|&v| v as f64).collect::<Vec<_>>());
        raw.iter()
            .map(|&v| {
                if v >= 1.0 && v.fract() == 0.0 && v <= 1e9 {
                    Ok(v as usize)
                } else {
                    Err(CliError::Usage(format!("schedule entries must be positive integers, got {v}")))
                }
            })
            .collect()
    }

    pub fn tolerance(&mut self, default: f64) -> Result<f64, CliError> {
        let t = self.tolerance.unwrap_or(default);
        if !(t > 0.0 && t.is_finite()) {
            return Err(CliError::Usage(format!("tolerance must be positive, got {t}")));
        }
        self.record("tolerance", t);
        Ok(t)
    }
}

pub fn join(v: &[f64]) -> String {
    v.iter().map(ToString::to_string).collect::<Vec<_>>().join(" ")
}
