//! Command-line front end: domain files in, line-oriented reports and SVG out.

pub mod domain_file;
pub mod error;
pub mod report;
pub mod svg;

use std::fs;
use std::path::PathBuf;

use billiard_core::domain::BilliardDomain;
use clap::ValueEnum;

pub use domain_file::DomainFile;
pub use error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Command {
    Validate,
    Simulate,
    Diagram,
    Fiber,
    Atom,
    Render,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub domain_path: PathBuf,
    pub lambda: Option<f64>,
    pub steps: Option<usize>,
    pub seed: u64,
    pub out_path: Option<PathBuf>,
    pub oracle_resolution: Option<usize>,
}

impl RunConfig {
    pub fn new(command: Command, domain_path: impl Into<PathBuf>) -> Self {
        Self {
            command,
            domain_path: domain_path.into(),
            lambda: None,
            steps: None,
            seed: 0,
            out_path: None,
            oracle_resolution: None,
        }
    }
}

/// What a successful run prints.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub stdout: String,
    /// Nonzero for a completed `validate` of an invalid domain.
    pub exit_code: i32,
}

pub fn load_domain(path: &std::path::Path) -> Result<BilliardDomain, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))?;
    DomainFile::parse(&text)?.build()
}

fn require_valid(d: &BilliardDomain) -> Result<(), CliError> {
    let rep = d.validate();
    if rep.is_valid() {
        return Ok(());
    }
    let msgs: Vec<String> = rep.violations.iter().map(|v| v.to_string()).collect();
    Err(CliError::Validation(msgs.join("; ")))
}

fn write_out(path: &std::path::Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

pub fn run(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let d = load_domain(&cfg.domain_path)?;
    if cfg.command == Command::Validate {
        let (text, ok) = report::validate(&d);
        return Ok(Outcome { stdout: text, exit_code: if ok { 0 } else { 3 } });
    }
    require_valid(&d)?;
    let subdiv = cfg.oracle_resolution.unwrap_or(billiard_core::topology::DEFAULT_SUBDIV);
    if subdiv == 0 {
        return Err(CliError::Parse("--resolution must be at least 1".into()));
    }
    let stdout = match cfg.command {
        Command::Validate => unreachable!(),
        Command::Simulate => {
            let steps = cfg.steps.ok_or_else(|| CliError::Parse("simulate needs --steps".into()))?;
            report::simulate(&d, steps, cfg.lambda, cfg.seed)?
        }
        Command::Diagram => report::diagram(&d),
        Command::Fiber => {
            let l = cfg.lambda.ok_or_else(|| CliError::Parse("fiber needs --lambda".into()))?;
            report::fiber(&d, l, subdiv)?
        }
        Command::Atom => {
            let (text, json) = report::atom(&d, cfg.lambda)?;
            if let Some(p) = &cfg.out_path {
                write_out(p, &json)?;
            }
            text
        }
        Command::Render => {
            let doc = svg::render(&d, &svg::Overlays { caustic: cfg.lambda, steps: cfg.steps, seed: cfg.seed })?;
            match &cfg.out_path {
                Some(p) => {
                    write_out(p, &doc)?;
                    format!("wrote: {}\n", p.display())
                }
                None => doc,
            }
        }
    };
    Ok(Outcome { stdout, exit_code: 0 })
}

/// Fixed-precision decimal with trailing zeros removed.
pub fn num(x: f64) -> String {
    let s = format!("{x:.6}");
    let s = if s.contains('.') { s.trim_end_matches('0').trim_end_matches('.') } else { &s };
    if s == "-0" {
        "0".to_string()
    } else {
        s.to_string()
    }
}

#[cfg(test)]
mod tests {
    use super::num;

    #[test]
    fn number_format() {
        assert_eq!(num(0.0), "0");
        assert_eq!(num(-0.0), "0");
        assert_eq!(num(2.0), "2");
        assert_eq!(num(0.30000000000000004), "0.3");
        assert_eq!(num(-1.25), "-1.25");
    }
}
