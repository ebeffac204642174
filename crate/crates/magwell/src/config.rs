//! Sectioned key-value run configuration.
//!
//! Grammar: `[section]` headers, `key = values` with whitespace-separated
//! values, `#` starts a comment (whole-line or trailing), blank lines are
//! ignored. Repeated `mode` keys accumulate. Unknown sections or keys are
//! errors, so typos surface instead of silently falling back to defaults.
//!
//! ```text
//! [torus]
//! l1 = 1.0
//! l2 = 1.0
//!
//! [field]
//! degree = 1
//! mode = 1 0 0.5 0.0    # k1 k2 re im; conjugate pair implied
//! mode = 0 1 0.5 0.0
//!
//! [solver]
//! tol = 1e-9            # residual tolerance floor
//! max_iter = 40000000   # matvec budget per solve
//! seed = 7
//!
//! [sweep]
//! p_list = 16 32 64 128 256
//! grids = 128 256 512
//! levels = 3
//! out = report.json
//!
//! [model]
//! cutoffs = 16 24 32 48 64
//! tolerance = 1e-9
//! ```

use crate::error::{Error, Result};
use crate::field::{FourierMode, TorusSpec};
use crate::pipeline::SolverParams;
use std::path::{Path, PathBuf};

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub torus: TorusSpec,
    pub degree: u32,
    pub modes: Vec<FourierMode>,
    pub solver: SolverParams,
    pub p_list: Vec<u32>,
    pub grids: Vec<usize>,
    pub levels: usize,
    pub out: Option<PathBuf>,
    pub cutoffs: Vec<i64>,
    pub model_tol: f64,
}

impl RunConfig {
    pub fn field(&self) -> Result<crate::field::FieldSpec> {
        crate::field::build_field(self.torus, self.degree, &self.modes)
    }
}

pub fn load_config(path: &Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("cannot read config {}: {e}", path.display())))?;
    parse_config(&text)
}

pub fn parse_config(text: &str) -> Result<RunConfig> {
    let mut l1 = None;
    let mut l2 = None;
    let mut degree = None;
    let mut modes = Vec::new();
    let mut solver = SolverParams::default();
    let mut p_list = vec![16u32, 32, 64, 128, 256];
    let mut grids = vec![128usize, 256, 512];
    let mut levels = 3usize;
    let mut out = None;
    let mut cutoffs: Vec<i64> = crate::pipeline::DEFAULT_CUTOFFS.to_vec();
    let mut model_tol = 1e-9;

    let mut section = String::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = match raw.find('#') {
            Some(pos) => &raw[..pos],
            None => raw,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        let err = |msg: String| Error::Config(format!("config line {}: {msg}", lineno + 1));
        if line.starts_with('[') {
            if !line.ends_with(']') {
                return Err(err("malformed section header".into()));
            }
            section = line[1..line.len() - 1].trim().to_string();
            match section.as_str() {
                "torus" | "field" | "solver" | "sweep" | "model" => {}
                other => return Err(err(format!("unknown section [{other}]"))),
            }
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| err("expected `key = value`".into()))?;
        let key = key.trim();
        let vals: Vec<&str> = value.split_whitespace().collect();
        let one = || -> Result<&str> {
            if vals.len() == 1 {
                Ok(vals[0])
            } else {
                Err(err(format!("key `{key}` takes one value")))
            }
        };
        let parse_f64 = |s: &str| -> Result<f64> {
            s.parse().map_err(|_| err(format!("bad number `{s}`")))
        };
        match (section.as_str(), key) {
            ("torus", "l1") => l1 = Some(parse_f64(one()?)?),
            ("torus", "l2") => l2 = Some(parse_f64(one()?)?),
            ("field", "degree") => {
                degree = Some(
                    one()?
                        .parse::<u32>()
                        .map_err(|_| err("bad degree".into()))?,
                )
            }
            ("field", "mode") => {
                if vals.len() != 4 {
                    return Err(err("mode takes `k1 k2 re im`".into()));
                }
                let k1: i32 = vals[0].parse().map_err(|_| err("bad k1".into()))?;
                let k2: i32 = vals[1].parse().map_err(|_| err("bad k2".into()))?;
                let re = parse_f64(vals[2])?;
                let im = parse_f64(vals[3])?;
                modes.push(FourierMode::new(k1, k2, re, im));
            }
            ("solver", "tol") => solver.tol_floor = parse_f64(one()?)?,
            ("solver", "max_iter") => {
                solver.max_matvecs = one()?
                    .parse()
                    .map_err(|_| err("bad max_iter".into()))?
            }
            ("solver", "seed") => {
                solver.seed = one()?.parse().map_err(|_| err("bad seed".into()))?
            }
            ("sweep", "p_list") => {
                p_list = vals
                    .iter()
                    .map(|s| s.parse().map_err(|_| err(format!("bad p `{s}`"))))
                    .collect::<Result<_>>()?
            }
            ("sweep", "grids") => {
                grids = vals
                    .iter()
                    .map(|s| s.parse().map_err(|_| err(format!("bad grid `{s}`"))))
                    .collect::<Result<_>>()?
            }
            ("sweep", "levels") => {
                levels = one()?.parse().map_err(|_| err("bad levels".into()))?
            }
            ("sweep", "out") => out = Some(PathBuf::from(one()?)),
            ("model", "cutoffs") => {
                cutoffs = vals
                    .iter()
                    .map(|s| s.parse().map_err(|_| err(format!("bad cutoff `{s}`"))))
                    .collect::<Result<_>>()?
            }
            ("model", "tolerance") => model_tol = parse_f64(one()?)?,
            ("", k) => return Err(err(format!("key `{k}` before any section"))),
            (s, k) => return Err(err(format!("unknown key `{k}` in section [{s}]"))),
        }
    }

    let l1 = l1.ok_or_else(|| Error::Config("missing [torus] l1".into()))?;
    let l2 = l2.ok_or_else(|| Error::Config("missing [torus] l2".into()))?;
    let degree = degree.ok_or_else(|| Error::Config("missing [field] degree".into()))?;
    Ok(RunConfig {
        torus: TorusSpec::new(l1, l2)?,
        degree,
        modes,
        solver,
        p_list,
        grids,
        levels,
        out,
        cutoffs,
        model_tol,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = "\
# the two-mode testbed field
[torus]
l1 = 1.0
l2 = 1.0

[field]
degree = 1
mode = 1 0 0.5 0.0
mode = 0 1 0.5 0.0   # conjugate pair implied

[solver]
tol = 1e-8
seed = 11

[sweep]
p_list = 4 8 16 32
grids = 32 64
levels = 2

[model]
cutoffs = 16 24 32
tolerance = 1e-8
";

    #[test]
    fn parses_sample() {
        let cfg = parse_config(SAMPLE).unwrap();
        assert_eq!(cfg.degree, 1);
        assert_eq!(cfg.modes.len(), 2);
        assert_eq!(cfg.solver.seed, 11);
        assert_eq!(cfg.p_list, vec![4, 8, 16, 32]);
        assert_eq!(cfg.grids, vec![32, 64]);
        assert_eq!(cfg.levels, 2);
        assert_eq!(cfg.cutoffs, vec![16, 24, 32]);
        assert!(cfg.field().is_ok());
    }

    #[test]
    fn rejects_unknown_key() {
        let bad = "[torus]\nl1 = 1\nl2 = 1\nl3 = 2\n";
        let err = parse_config(bad).unwrap_err().to_string();
        assert!(err.contains("unknown key `l3`"), "{err}");
    }

    #[test]
    fn rejects_missing_sections() {
        let err = parse_config("[torus]\nl1 = 1\nl2 = 1\n").unwrap_err().to_string();
        assert!(err.contains("degree"), "{err}");
    }

    #[test]
    fn rejects_malformed_mode() {
        let bad = "[torus]\nl1 = 1\nl2 = 1\n[field]\ndegree = 1\nmode = 1 0 0.5\n";
        assert!(parse_config(bad).is_err());
    }
}
