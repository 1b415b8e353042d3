//! Study configuration: defaults, the flat `key = value` file format, and
//! command-line flags. Every file key has a flag of the same name; flags
//! win.

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StudyMode {
    /// One run per mesh size, tau tied to h; errors and orders per size.
    Convergence,
    /// Fixed mesh, one run per time-step multiplier k.
    Stability,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProblemKind {
    /// The manufactured plane-wave benchmark.
    Example1,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TauRule {
    /// tau = h.
    H,
    /// tau = k * h with the configured k.
    Kh,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StudyConfig {
    pub mode: StudyMode,
    pub problem: ProblemKind,
    pub sizes: Vec<usize>,
    pub tau_rule: TauRule,
    /// Time-step multipliers: the single k for `tau-rule = kh`, the k list
    /// for stability studies.
    pub k: Vec<u32>,
    pub t_final: f64,
    pub snapshots: Vec<f64>,
    pub out: Option<String>,
    pub solver_tol: f64,
    /// Gauss points per axis for quadrature-based integrals.
    pub quad: usize,
}

impl Default for StudyConfig {
    fn default() -> Self {
        StudyConfig {
            mode: StudyMode::Convergence,
            problem: ProblemKind::Example1,
            sizes: vec![10, 20, 40, 80],
            tau_rule: TauRule::H,
            k: vec![1, 5, 10, 20],
            t_final: 1.0,
            snapshots: vec![0.25, 0.5, 0.75, 1.0],
            out: None,
            solver_tol: 1e-10,
            quad: 3,
        }
    }
}

fn bad(key: &str, value: &str, hint: &str) -> CliError {
    CliError::Config(format!("invalid value '{value}' for {key}: {hint}"))
}

fn parse_list<T: std::str::FromStr>(
    key: &str,
    value: &str,
    hint: &str,
) -> Result<Vec<T>, CliError> {
    value
        .split(',')
        .map(|s| s.trim().parse::<T>().map_err(|_| bad(key, value, hint)))
        .collect()
}

impl StudyConfig {
    /// Apply one key/value pair (from the config file or a flag).
    pub fn apply(&mut self, key: &str, value: &str) -> Result<(), CliError> {
        let key = key.replace('_', "-");
        match key.as_str() {
            "mode" => {
                self.mode = match value {
                    "convergence" => StudyMode::Convergence,
                    "stability" => StudyMode::Stability,
                    _ => return Err(bad("mode", value, "expected convergence or stability")),
                }
            }
            "problem" => {
                self.problem = match value {
                    "example1" | "plane-wave" => ProblemKind::Example1,
                    _ => return Err(bad("problem", value, "expected example1")),
                }
            }
            "sizes" => {
                self.sizes = parse_list("sizes", value, "expected integers like 10,20,40,80")?
            }
            "tau-rule" => {
                self.tau_rule = match value {
                    "h" => TauRule::H,
                    "kh" => TauRule::Kh,
                    _ => return Err(bad("tau-rule", value, "expected h or kh")),
                }
            }
            "k" => self.k = parse_list("k", value, "expected integers like 1,5,10,20")?,
            "t-final" => {
                self.t_final = value
                    .parse()
                    .map_err(|_| bad("t-final", value, "expected a number"))?
            }
            "snapshots" => {
                self.snapshots = parse_list("snapshots", value, "expected numbers like 0.25,0.5")?
            }
            "out" => self.out = Some(value.to_string()),
            "solver-tol" => {
                self.solver_tol = value
                    .parse()
                    .map_err(|_| bad("solver-tol", value, "expected a number"))?
            }
            "quad" => {
                self.quad = value
                    .parse()
                    .map_err(|_| bad("quad", value, "expected an integer"))?
            }
            _ => return Err(CliError::Config(format!("unknown key '{key}'"))),
        }
        Ok(())
    }

    /// Parse a flat config file: `key = value` lines, `#` comments.
    pub fn apply_file(&mut self, text: &str) -> Result<(), CliError> {
        for (lineno, raw) in text.lines().enumerate() {
            let line = match raw.find('#') {
                Some(pos) => &raw[..pos],
                None => raw,
            }
            .trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(CliError::Config(format!(
                    "line {}: expected 'key = value', got '{line}'",
                    lineno + 1
                )));
            };
            self.apply(key.trim(), value.trim())?;
        }
        Ok(())
    }

    /// Check cross-field invariants after all sources are merged.
    pub fn validate(&self) -> Result<(), CliError> {
        if self.sizes.is_empty() {
            return Err(CliError::Config("need at least one mesh size".into()));
        }
        for &m in &self.sizes {
            if m < 2 || m % 2 != 0 {
                return Err(CliError::Config(format!(
                    "mesh size {m} is not an even integer >= 2; postprocessing needs 2x2 element patches"
                )));
            }
        }
        if !(self.t_final > 0.0) {
            return Err(CliError::Config(format!(
                "t-final must be positive, got {}",
                self.t_final
            )));
        }
        if self.snapshots.is_empty() {
            return Err(CliError::Config("need at least one snapshot time".into()));
        }
        for &t in &self.snapshots {
            if !(t > 0.0) || t > self.t_final + 1e-12 {
                return Err(CliError::Config(format!(
                    "snapshot time {t} is outside (0, {}]",
                    self.t_final
                )));
            }
        }
        if !(self.solver_tol > 0.0) {
            return Err(CliError::Config("solver-tol must be positive".into()));
        }
        if !(2..=6).contains(&self.quad) {
            return Err(CliError::Config(format!(
                "quad must be between 2 and 6 Gauss points per axis, got {}",
                self.quad
            )));
        }
        if self.k.is_empty() {
            return Err(CliError::Config("need at least one k".into()));
        }
        match self.mode {
            StudyMode::Convergence => {
                if self.tau_rule == TauRule::Kh && self.k.len() != 1 {
                    return Err(CliError::Config(
                        "tau-rule kh needs exactly one k in a convergence study".into(),
                    ));
                }
            }
            StudyMode::Stability => {
                if self.sizes.len() != 1 {
                    return Err(CliError::Config(
                        "a stability study fixes the mesh: give exactly one size".into(),
                    ));
                }
            }
        }
        Ok(())
    }
}

/// Parse the full command line (`--config FILE` first, then flag
/// overrides in order).
pub fn parse_args<I, S>(args: I) -> Result<StudyConfig, CliError>
where
    I: IntoIterator<Item = S>,
    S: AsRef<str>,
{
    let args: Vec<String> = args.into_iter().map(|s| s.as_ref().to_string()).collect();
    let mut pairs: Vec<(String, String)> = Vec::new();
    let mut config_path: Option<String> = None;
    let mut i = 0;
    while i < args.len() {
        let arg = &args[i];
        let Some(stripped) = arg.strip_prefix("--") else {
            return Err(CliError::Config(format!("unexpected argument '{arg}'")));
        };
        let (key, value) = match stripped.split_once('=') {
            Some((k, v)) => (k.to_string(), v.to_string()),
            None => {
                i += 1;
                let Some(v) = args.get(i) else {
                    return Err(CliError::Config(format!("flag --{stripped} needs a value")));
                };
                (stripped.to_string(), v.clone())
            }
        };
        if key == "config" {
            config_path = Some(value);
        } else {
            pairs.push((key, value));
        }
        i += 1;
    }

    let mut config = StudyConfig::default();
    if let Some(path) = config_path {
        let text = std::fs::read_to_string(&path)
            .map_err(|e| CliError::Config(format!("cannot read config file {path}: {e}")))?;
        config.apply_file(&text)?;
    }
    for (key, value) in &pairs {
        config.apply(key, value)?;
    }
    config.validate()?;
    Ok(config)
}

pub const USAGE: &str = "\
glfem - convergence and stability studies for a Ginzburg-Landau FEM solver

Usage: glfem [--config FILE] [flags]

Flags (each overrides the config-file key of the same name):
  --mode convergence|stability   study type            [convergence]
  --problem example1             problem selector      [example1]
  --sizes 10,20,40,80            mesh subdivisions     [10,20,40,80]
  --tau-rule h|kh                time-step rule        [h]
  --k 1,5,10,20                  step multiplier(s)    [1,5,10,20]
  --t-final 1.0                  final time            [1.0]
  --snapshots 0.25,0.5,0.75,1.0  report times          [0.25,0.5,0.75,1.0]
  --out path.csv                 CSV output (stdout if omitted)
  --solver-tol 1e-10             residual tolerance    [1e-10]
  --quad 3                       Gauss points per axis [3]

Config file: flat `key = value` lines, `#` starts a comment.
Exit codes: 0 success, 2 configuration error, 3 solver failure, 4 I/O error.
";
