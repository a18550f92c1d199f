//! INI-style run configuration: `key = value` lines under `[grid]`, `[ans]`,
//! `[run]`, `[initial]`, `[tracker]` headers. Unknown sections or keys are
//! errors (typos should not silently fall back to defaults), as are
//! duplicate keys and values that fail to parse. A file may carry more
//! sections than one subcommand needs; each command pulls only its own.

use std::collections::BTreeMap;
use std::path::Path;

use crate::ans::BandParams;
use crate::grid::Grid;
use crate::{Error, Result};

/// `[grid]`: nx, ny required; lx defaults to 2π.
#[derive(Debug, Clone, Copy)]
pub struct GridSection {
    pub nx: usize,
    pub ny: usize,
    pub lx: f64,
}

/// `[ans]`: single-ε anisotropic run parameters.
#[derive(Debug, Clone, Copy)]
pub struct AnsSection {
    pub eps: f64,
    pub dt: f64,
    pub t_end: f64,
    pub divergence_tol: f64,
}

/// `[run]`: sweep/limit-run parameters. `eps_list` is only required by the
/// `converge` subcommand.
#[derive(Debug, Clone)]
pub struct RunSection {
    pub dt: f64,
    pub t_end: f64,
    pub eps_list: Option<Vec<f64>>,
    pub divergence_tol: f64,
    pub sample_every: usize,
    pub out_dir: Option<String>,
}

/// `[initial]`: `u₀ = delta·cos(k0·2πx/lx)·sin(2πy)` and the analytic band.
#[derive(Debug, Clone, Copy)]
pub struct InitialSection {
    pub delta: f64,
    pub k0: i64,
    pub a: f64,
}

/// `[tracker]`: band-consumption multipliers, `λ` and `μ ≥ λ`.
#[derive(Debug, Clone, Copy)]
pub struct TrackerSection {
    pub lambda: f64,
    pub mu: f64,
}

impl Default for TrackerSection {
    fn default() -> TrackerSection {
        TrackerSection { lambda: 4.0, mu: 16.0 }
    }
}

/// A parsed configuration file. Sections a command needs are pulled with the
/// `require_*` accessors so the error names what is missing.
#[derive(Debug, Clone, Default)]
pub struct FileConfig {
    pub grid: Option<GridSection>,
    pub ans: Option<AnsSection>,
    pub run: Option<RunSection>,
    pub initial: Option<InitialSection>,
    pub tracker: Option<TrackerSection>,
}

const KNOWN: &[(&str, &[&str])] = &[
    ("grid", &["nx", "ny", "lx"]),
    ("ans", &["eps", "dt", "t_end", "divergence_tol"]),
    ("run", &["dt", "t_end", "eps_list", "divergence_tol", "sample_every", "out_dir"]),
    ("initial", &["delta", "k0", "a"]),
    ("tracker", &["lambda", "mu"]),
];

const DEFAULT_DIVERGENCE_TOL: f64 = 1e-8;
const DEFAULT_SAMPLE_EVERY: usize = 10;

type Sections = BTreeMap<String, BTreeMap<String, String>>;

fn parse_sections(text: &str) -> Result<Sections> {
    let mut out: Sections = BTreeMap::new();
    let mut current: Option<String> = None;
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        let lineno = idx + 1;
        if line.is_empty() || line.starts_with('#') || line.starts_with(';') {
            continue;
        }
        if let Some(name) = line.strip_prefix('[').and_then(|s| s.strip_suffix(']')) {
            let name = name.trim();
            if !KNOWN.iter().any(|(s, _)| *s == name) {
                return Err(Error::Invalid(format!(
                    "line {lineno}: unknown section [{name}]"
                )));
            }
            out.entry(name.to_string()).or_default();
            current = Some(name.to_string());
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(Error::Invalid(format!(
                "line {lineno}: expected `key = value` or a [section] header, got `{line}`"
            )));
        };
        let key = key.trim();
        let value = value.trim();
        let Some(section) = &current else {
            return Err(Error::Invalid(format!(
                "line {lineno}: key `{key}` appears before any [section] header"
            )));
        };
        let allowed = KNOWN.iter().find(|(s, _)| s == section).map(|(_, k)| *k).unwrap();
        if !allowed.contains(&key) {
            return Err(Error::Invalid(format!(
                "line {lineno}: unknown key `{key}` in [{section}] (allowed: {})",
                allowed.join(", ")
            )));
        }
        let sec = out.get_mut(section).unwrap();
        if sec.insert(key.to_string(), value.to_string()).is_some() {
            return Err(Error::Invalid(format!(
                "line {lineno}: duplicate key `{key}` in [{section}]"
            )));
        }
    }
    Ok(out)
}

fn parse_value<T: std::str::FromStr>(section: &str, key: &str, raw: &str) -> Result<T> {
    raw.parse().map_err(|_| {
        Error::Invalid(format!("[{section}] {key}: cannot parse `{raw}`"))
    })
}

fn required<T: std::str::FromStr>(
    sec: &BTreeMap<String, String>,
    section: &str,
    key: &str,
) -> Result<T> {
    let raw = sec.get(key).ok_or_else(|| {
        Error::Invalid(format!("[{section}] is missing required key `{key}`"))
    })?;
    parse_value(section, key, raw)
}

fn optional<T: std::str::FromStr>(
    sec: &BTreeMap<String, String>,
    section: &str,
    key: &str,
) -> Result<Option<T>> {
    match sec.get(key) {
        Some(raw) => parse_value(section, key, raw).map(Some),
        None => Ok(None),
    }
}

fn parse_eps_list(raw: &str) -> Result<Vec<f64>> {
    raw.split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| Error::Invalid(format!("[run] eps_list: cannot parse `{}`", s.trim())))
        })
        .collect()
}

impl FileConfig {
    pub fn parse_str(text: &str) -> Result<FileConfig> {
        let sections = parse_sections(text)?;
        let mut cfg = FileConfig::default();
        if let Some(sec) = sections.get("grid") {
            cfg.grid = Some(GridSection {
                nx: required(sec, "grid", "nx")?,
                ny: required(sec, "grid", "ny")?,
                lx: optional(sec, "grid", "lx")?.unwrap_or(std::f64::consts::TAU),
            });
        }
        if let Some(sec) = sections.get("ans") {
            cfg.ans = Some(AnsSection {
                eps: required(sec, "ans", "eps")?,
                dt: required(sec, "ans", "dt")?,
                t_end: required(sec, "ans", "t_end")?,
                divergence_tol: optional(sec, "ans", "divergence_tol")?
                    .unwrap_or(DEFAULT_DIVERGENCE_TOL),
            });
        }
        if let Some(sec) = sections.get("run") {
            cfg.run = Some(RunSection {
                dt: required(sec, "run", "dt")?,
                t_end: required(sec, "run", "t_end")?,
                eps_list: match sec.get("eps_list") {
                    Some(raw) => Some(parse_eps_list(raw)?),
                    None => None,
                },
                divergence_tol: optional(sec, "run", "divergence_tol")?
                    .unwrap_or(DEFAULT_DIVERGENCE_TOL),
                sample_every: optional(sec, "run", "sample_every")?
                    .unwrap_or(DEFAULT_SAMPLE_EVERY),
                out_dir: sec.get("out_dir").cloned(),
            });
        }
        if let Some(sec) = sections.get("initial") {
            cfg.initial = Some(InitialSection {
                delta: required(sec, "initial", "delta")?,
                k0: required(sec, "initial", "k0")?,
                a: required(sec, "initial", "a")?,
            });
        }
        if let Some(sec) = sections.get("tracker") {
            let d = TrackerSection::default();
            cfg.tracker = Some(TrackerSection {
                lambda: optional(sec, "tracker", "lambda")?.unwrap_or(d.lambda),
                mu: optional(sec, "tracker", "mu")?.unwrap_or(d.mu),
            });
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<FileConfig> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            Error::Invalid(format!("cannot read config {}: {e}", path.display()))
        })?;
        FileConfig::parse_str(&text)
    }

    pub fn require_grid(&self) -> Result<Grid> {
        let g = self.grid.ok_or_else(|| Error::Invalid("config needs a [grid] section".into()))?;
        Grid::new(g.nx, g.ny, g.lx)
    }

    pub fn require_ans(&self) -> Result<&AnsSection> {
        self.ans.as_ref().ok_or_else(|| Error::Invalid("config needs an [ans] section".into()))
    }

    pub fn require_run(&self) -> Result<&RunSection> {
        self.run.as_ref().ok_or_else(|| Error::Invalid("config needs a [run] section".into()))
    }

    pub fn require_initial(&self) -> Result<&InitialSection> {
        self.initial
            .as_ref()
            .ok_or_else(|| Error::Invalid("config needs an [initial] section".into()))
    }

    /// Band parameters: amplitude from `[initial]`, multipliers from
    /// `[tracker]` (or their defaults).
    pub fn band_params(&self) -> Result<BandParams> {
        let init = self.require_initial()?;
        let tr = self.tracker.unwrap_or_default();
        Ok(BandParams { a: init.a, lambda: tr.lambda, mu: tr.mu })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const FULL: &str = "\
# reference sweep
[grid]
nx = 64
ny = 129

[ans]
eps = 0.1
dt = 5e-4
t_end = 1.0

[run]
dt = 5e-4
t_end = 1.0
eps_list = 0.2, 0.1, 0.05, 0.025
sample_every = 20
out_dir = out

[initial]
delta = 1e-2
k0 = 1
a = 0.5

[tracker]
lambda = 4
";

    #[test]
    fn full_file_parses_with_defaults_filled() {
        let cfg = FileConfig::parse_str(FULL).unwrap();
        let grid = cfg.require_grid().unwrap();
        assert_eq!((grid.nx, grid.ny), (64, 129));
        assert!((grid.lx - std::f64::consts::TAU).abs() < 1e-15);
        let ans = cfg.require_ans().unwrap();
        assert_eq!(ans.divergence_tol, 1e-8);
        let run = cfg.require_run().unwrap();
        assert_eq!(run.eps_list.as_deref(), Some(&[0.2, 0.1, 0.05, 0.025][..]));
        assert_eq!(run.sample_every, 20);
        assert_eq!(run.out_dir.as_deref(), Some("out"));
        let band = cfg.band_params().unwrap();
        assert_eq!((band.a, band.lambda, band.mu), (0.5, 4.0, 16.0));
    }

    #[test]
    fn unknown_names_are_rejected_with_their_names() {
        let err = FileConfig::parse_str("[grid]\nnx = 8\nny = 9\nnz = 4\n").unwrap_err();
        assert!(err.to_string().contains("nz"), "{err}");
        let err = FileConfig::parse_str("[grids]\nnx = 8\n").unwrap_err();
        assert!(err.to_string().contains("grids"), "{err}");
    }

    #[test]
    fn duplicate_and_orphan_keys_are_rejected() {
        let err = FileConfig::parse_str("[grid]\nnx = 8\nnx = 16\nny = 9\n").unwrap_err();
        assert!(err.to_string().contains("duplicate"), "{err}");
        let err = FileConfig::parse_str("nx = 8\n[grid]\nny = 9\n").unwrap_err();
        assert!(err.to_string().contains("before any"), "{err}");
    }

    #[test]
    fn missing_required_keys_and_bad_numbers_are_named() {
        let err = FileConfig::parse_str("[grid]\nnx = 8\n").unwrap_err();
        assert!(err.to_string().contains("ny"), "{err}");
        let err = FileConfig::parse_str("[grid]\nnx = eight\nny = 9\n").unwrap_err();
        assert!(err.to_string().contains("eight"), "{err}");
        let err = FileConfig::parse_str("[run]\ndt = 1e-3\nt_end = 1\neps_list = 0.2;0.1\n")
            .unwrap_err();
        assert!(err.to_string().contains("eps_list"), "{err}");
    }

    #[test]
    fn missing_sections_surface_through_the_accessors() {
        let cfg = FileConfig::parse_str("[grid]\nnx = 8\nny = 9\n").unwrap();
        assert!(cfg.require_ans().is_err());
        assert!(cfg.require_run().is_err());
        assert!(cfg.band_params().is_err());
    }

    #[test]
    fn comments_blank_lines_and_whitespace_are_tolerated() {
        let text = "  ; note\n\n[grid]\n  nx=16  \nny =  17\n# done\n";
        let cfg = FileConfig::parse_str(text).unwrap();
        let g = cfg.grid.unwrap();
        assert_eq!((g.nx, g.ny), (16, 17));
    }
}
