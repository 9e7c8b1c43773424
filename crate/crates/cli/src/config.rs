//! TOML run configuration. Every numeric field is checked before any
//! computation starts; errors name the offending field.

use std::fmt;
use std::path::{Path, PathBuf};

use serde::Deserialize;
use varosc::{PolynomialPotential, Potential, Sign, TraceSpan};

#[derive(Debug)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

fn field(name: &str, msg: impl fmt::Display) -> ConfigError {
    ConfigError(format!("{name}: {msg}"))
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub potential: Option<PotentialSpec>,
    #[serde(default)]
    pub solver: SolverSpec,
    pub scan: Option<ScanSpec>,
    pub evolution: Option<EvolutionSpec>,
    #[serde(default)]
    pub output: OutputSpec,
}

/// `kind` is one of `quartic`, `double_well`, `asym_demo`, `coefficients`.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PotentialSpec {
    pub kind: Option<String>,
    pub m2: Option<f64>,
    pub g: Option<f64>,
    pub sign: Option<i32>,
    pub lambda: Option<f64>,
    pub a: Option<f64>,
    pub coeffs: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSpec {
    pub dim: Option<usize>,
    #[serde(default)]
    pub optimize_sigma: bool,
    /// `dimension` or `dimension_plus_one`.
    pub trace_span: Option<String>,
    /// Target level for a centred block.
    pub center_level: Option<usize>,
    pub n_ref: Option<usize>,
    /// Block sizes for `convergence`.
    pub dims: Option<Vec<usize>>,
    /// Half-open level range [a, b).
    pub levels: Option<[usize; 2]>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanSpec {
    pub omega_min: Option<f64>,
    pub omega_max: Option<f64>,
    pub points: Option<usize>,
    pub dims: Option<Vec<usize>>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvolutionSpec {
    /// `centered` or `shifted`.
    pub kind: Option<String>,
    pub width: Option<f64>,
    /// Widths in units of m = √(2|κ₂|).
    pub width_factors: Option<Vec<f64>>,
    pub x0: Option<f64>,
    pub t_max: Option<f64>,
    pub t_step: Option<f64>,
    #[serde(default)]
    pub snapshots: Vec<f64>,
    pub snapshot_range: Option<[f64; 2]>,
    pub snapshot_points: Option<usize>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    pub dir: Option<PathBuf>,
    /// Any of `csv`, `json`.
    pub formats: Option<Vec<String>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Formats {
    pub csv: bool,
    pub json: bool,
}

#[derive(Debug, Clone)]
pub struct Solver {
    pub dim: usize,
    pub optimize_sigma: bool,
    pub span: TraceSpan,
    pub center_level: Option<usize>,
    pub n_ref: Option<usize>,
    pub dims: Vec<usize>,
    pub levels: Option<std::ops::Range<usize>>,
}

#[derive(Debug, Clone)]
pub struct Scan {
    pub omega_min: f64,
    pub omega_max: f64,
    pub points: usize,
    pub dims: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PacketKind {
    Centered,
    Shifted,
}

#[derive(Debug, Clone)]
pub struct Evolution {
    pub kind: PacketKind,
    pub widths: Vec<f64>,
    pub x0: f64,
    pub t_max: f64,
    pub t_step: f64,
    pub snapshots: Vec<f64>,
    pub snapshot_range: (f64, f64),
    pub snapshot_points: usize,
}

/// Validated form of [`RunConfig`].
#[derive(Debug, Clone)]
pub struct Run {
    pub potential: Potential,
    pub solver: Solver,
    pub scan: Option<Scan>,
    pub evolution: Option<Evolution>,
    pub out_dir: PathBuf,
    pub formats: Formats,
}

pub fn load(path: &Path) -> Result<RunConfig, ConfigError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| ConfigError(format!("cannot read {}: {e}", path.display())))?;
    parse(&text)
}

pub fn parse(text: &str) -> Result<RunConfig, ConfigError> {
    toml::from_str(text).map_err(|e| ConfigError(format!("config: {e}")))
}

fn positive(name: &str, v: Option<f64>) -> Result<f64, ConfigError> {
    match v {
        None => Err(field(name, "missing")),
        Some(x) if x.is_finite() && x > 0.0 => Ok(x),
        Some(x) => Err(field(name, format!("must be finite and > 0 (got {x})"))),
    }
}

fn finite(name: &str, v: Option<f64>) -> Result<f64, ConfigError> {
    match v {
        None => Err(field(name, "missing")),
        Some(x) if x.is_finite() => Ok(x),
        Some(x) => Err(field(name, format!("must be finite (got {x})"))),
    }
}

fn dims_ok(name: &str, dims: &[usize]) -> Result<(), ConfigError> {
    if dims.is_empty() {
        return Err(field(name, "must not be empty"));
    }
    if dims.contains(&0) {
        return Err(field(name, "entries must be >= 1"));
    }
    Ok(())
}

impl PotentialSpec {
    pub fn build(&self) -> Result<Potential, ConfigError> {
        let kind = self
            .kind
            .as_deref()
            .ok_or_else(|| field("potential.kind", "missing"))?;
        let allowed: &[&str] = match kind {
            "quartic" => &["m2", "g", "sign"],
            "double_well" => &["lambda", "a"],
            "asym_demo" => &[],
            "coefficients" => &["coeffs"],
            other => {
                return Err(field(
                    "potential.kind",
                    format!("unknown kind `{other}` (expected quartic, double_well, asym_demo or coefficients)"),
                ))
            }
        };
        let present = [
            ("m2", self.m2.is_some()),
            ("g", self.g.is_some()),
            ("sign", self.sign.is_some()),
            ("lambda", self.lambda.is_some()),
            ("a", self.a.is_some()),
            ("coeffs", self.coeffs.is_some()),
        ];
        if let Some((name, _)) = present.iter().find(|(n, p)| *p && !allowed.contains(n)) {
            return Err(field(&format!("potential.{name}"), format!("not used by kind `{kind}`")));
        }
        let invalid = |e: varosc::Error| ConfigError(format!("potential: {e}"));
        match kind {
            "quartic" => {
                let m2 = finite("potential.m2", self.m2)?;
                let g = positive("potential.g", self.g)?;
                let sign = match self.sign {
                    None => Sign::Plus,
                    Some(s) => Sign::from_i32(s)
                        .ok_or_else(|| field("potential.sign", format!("must be 1 or -1 (got {s})")))?,
                };
                PolynomialPotential::quartic(m2, g, sign).map_err(invalid)
            }
            "double_well" => {
                let lambda = positive("potential.lambda", self.lambda)?;
                let a = finite("potential.a", self.a)?;
                PolynomialPotential::double_well(lambda, a).map_err(invalid)
            }
            "asym_demo" => Ok(PolynomialPotential::asymmetric_quartic()),
            _ => {
                let c = self
                    .coeffs
                    .clone()
                    .ok_or_else(|| field("potential.coeffs", "missing"))?;
                PolynomialPotential::new(c).map_err(|e| ConfigError(format!("potential.coeffs: {e}")))
            }
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<Run, ConfigError> {
        let potential = self
            .potential
            .as_ref()
            .ok_or_else(|| field("potential", "missing section"))?
            .build()?;
        let solver = self.solver.validate()?;
        let scan = self.scan.as_ref().map(|s| s.validate(solver.dim)).transpose()?;
        let evolution = self
            .evolution
            .as_ref()
            .map(|e| e.validate(&potential))
            .transpose()?;
        let formats = match &self.output.formats {
            None => Formats { csv: true, json: false },
            Some(list) => {
                let mut f = Formats { csv: false, json: false };
                for s in list {
                    match s.as_str() {
                        "csv" => f.csv = true,
                        "json" => f.json = true,
                        other => return Err(field("output.formats", format!("unknown format `{other}`"))),
                    }
                }
                if !f.csv && !f.json {
                    return Err(field("output.formats", "must not be empty"));
                }
                f
            }
        };
        Ok(Run {
            potential,
            solver,
            scan,
            evolution,
            out_dir: self.output.dir.clone().unwrap_or_else(|| PathBuf::from("out")),
            formats,
        })
    }
}

impl SolverSpec {
    fn validate(&self) -> Result<Solver, ConfigError> {
        let dim = self.dim.ok_or_else(|| field("solver.dim", "missing"))?;
        if dim == 0 {
            return Err(field("solver.dim", "must be >= 1"));
        }
        let span = match self.trace_span.as_deref() {
            None | Some("dimension") => TraceSpan::Dimension,
            Some("dimension_plus_one") => TraceSpan::DimensionPlusOne,
            Some(other) => {
                return Err(field(
                    "solver.trace_span",
                    format!("unknown value `{other}` (expected dimension or dimension_plus_one)"),
                ))
            }
        };
        let dims = self.dims.clone().unwrap_or_else(|| vec![dim]);
        dims_ok("solver.dims", &dims)?;
        if let Some(r) = self.n_ref {
            let max = dims.iter().copied().max().unwrap_or(dim);
            if r < max {
                return Err(field("solver.n_ref", format!("must be >= the largest dimension {max} (got {r})")));
            }
        }
        let levels = match self.levels {
            None => None,
            Some([a, b]) if a < b => Some(a..b),
            Some([a, b]) => return Err(field("solver.levels", format!("empty range [{a}, {b})"))),
        };
        Ok(Solver {
            dim,
            optimize_sigma: self.optimize_sigma,
            span,
            center_level: self.center_level,
            n_ref: self.n_ref,
            dims,
            levels,
        })
    }
}

impl ScanSpec {
    fn validate(&self, dim: usize) -> Result<Scan, ConfigError> {
        let omega_min = positive("scan.omega_min", self.omega_min)?;
        let omega_max = positive("scan.omega_max", self.omega_max)?;
        if omega_max <= omega_min {
            return Err(field("scan.omega_max", format!("must exceed omega_min = {omega_min}")));
        }
        let points = self.points.unwrap_or(200);
        if points < 2 {
            return Err(field("scan.points", "must be >= 2"));
        }
        let dims = self.dims.clone().unwrap_or_else(|| vec![dim]);
        dims_ok("scan.dims", &dims)?;
        Ok(Scan {
            omega_min,
            omega_max,
            points,
            dims,
        })
    }
}

impl EvolutionSpec {
    fn validate(&self, pot: &Potential) -> Result<Evolution, ConfigError> {
        let kind = match self.kind.as_deref() {
            Some("centered") => PacketKind::Centered,
            Some("shifted") => PacketKind::Shifted,
            Some(other) => {
                return Err(field(
                    "evolution.kind",
                    format!("unknown kind `{other}` (expected centered or shifted)"),
                ))
            }
            None => return Err(field("evolution.kind", "missing")),
        };
        let widths = match (self.width, &self.width_factors) {
            (Some(_), Some(_)) => {
                return Err(field("evolution.width_factors", "give either width or width_factors, not both"))
            }
            (Some(w), None) => vec![positive("evolution.width", Some(w))?],
            (None, Some(f)) => {
                if f.is_empty() {
                    return Err(field("evolution.width_factors", "must not be empty"));
                }
                let m = (2.0 * pot.coeff(2).abs()).sqrt();
                if m == 0.0 {
                    return Err(field("evolution.width_factors", "potential has no quadratic term to set m"));
                }
                f.iter()
                    .map(|&k| positive("evolution.width_factors", Some(k)).map(|k| k * m))
                    .collect::<Result<_, _>>()?
            }
            (None, None) => return Err(field("evolution.width", "missing")),
        };
        let x0 = match kind {
            PacketKind::Centered => match self.x0 {
                None => 0.0,
                Some(x) if x == 0.0 => 0.0,
                Some(x) => return Err(field("evolution.x0", format!("must be 0 for a centered packet (got {x})"))),
            },
            PacketKind::Shifted => finite("evolution.x0", self.x0)?,
        };
        let t_max = finite("evolution.t_max", self.t_max)?;
        if t_max < 0.0 {
            return Err(field("evolution.t_max", format!("must be >= 0 (got {t_max})")));
        }
        let t_step = positive("evolution.t_step", self.t_step.or(Some(0.1)))?;
        if let Some(&t) = self.snapshots.iter().find(|t| !t.is_finite()) {
            return Err(field("evolution.snapshots", format!("must be finite (got {t})")));
        }
        let snapshot_range = match self.snapshot_range {
            None => (-15.0, 15.0),
            Some([a, b]) if a.is_finite() && b.is_finite() && a < b => (a, b),
            Some([a, b]) => return Err(field("evolution.snapshot_range", format!("invalid interval [{a}, {b}]"))),
        };
        let snapshot_points = self.snapshot_points.unwrap_or(601);
        if snapshot_points < 2 {
            return Err(field("evolution.snapshot_points", "must be >= 2"));
        }
        Ok(Evolution {
            kind,
            widths,
            x0,
            t_max,
            t_step,
            snapshots: self.snapshots.clone(),
            snapshot_range,
            snapshot_points,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run(text: &str) -> Result<Run, ConfigError> {
        parse(text)?.validate()
    }

    #[test]
    fn quartic_recipe_parses() {
        let r = run("[potential]\nkind = \"quartic\"\nm2 = 1.0\ng = 1000.0\n[solver]\ndim = 100\n").unwrap();
        assert_eq!(r.potential.coeffs(), &[0.0, 0.0, 0.5, 0.0, 1000.0]);
        assert_eq!(r.solver.dims, vec![100]);
        assert_eq!(r.formats, Formats { csv: true, json: false });
    }

    #[test]
    fn unknown_field_is_rejected() {
        let e = run("[potential]\nkind = \"asym_demo\"\nfoo = 1\n[solver]\ndim = 4\n").unwrap_err();
        assert!(e.0.contains("foo"), "{e}");
    }

    #[test]
    fn missing_potential_names_field() {
        let e = run("[potential]\n[solver]\ndim = 4\n").unwrap_err();
        assert!(e.0.starts_with("potential.kind"), "{e}");
        let e = run("[solver]\ndim = 4\n").unwrap_err();
        assert!(e.0.starts_with("potential"), "{e}");
    }

    #[test]
    fn field_errors() {
        let base = "[potential]\nkind = \"quartic\"\nm2 = 1.0\n";
        assert!(run(&format!("{base}g = -1.0\n[solver]\ndim = 4\n")).unwrap_err().0.starts_with("potential.g"));
        assert!(run(&format!("{base}g = 1.0\nsign = 3\n[solver]\ndim = 4\n")).unwrap_err().0.starts_with("potential.sign"));
        assert!(run(&format!("{base}g = 1.0\nlambda = 1.0\n[solver]\ndim = 4\n")).unwrap_err().0.starts_with("potential.lambda"));
        assert!(run(&format!("{base}g = 1.0\n[solver]\ndim = 0\n")).unwrap_err().0.starts_with("solver.dim"));
        assert!(run(&format!("{base}g = 1.0\n[solver]\ndim = 4\nn_ref = 2\n")).unwrap_err().0.starts_with("solver.n_ref"));
        assert!(run(&format!("{base}g = 1.0\n[solver]\ndim = 4\n[scan]\nomega_min = 2.0\nomega_max = 1.0\n"))
            .unwrap_err()
            .0
            .starts_with("scan.omega_max"));
        assert!(run(&format!(
            "{base}g = 1.0\n[solver]\ndim = 4\n[evolution]\nkind = \"centered\"\nwidth = 1.0\nx0 = 2.0\nt_max = 1.0\n"
        ))
        .unwrap_err()
        .0
        .starts_with("evolution.x0"));
    }

    #[test]
    fn width_factors_use_quadratic_mass() {
        let r = run(
            "[potential]\nkind = \"double_well\"\nlambda = 0.01\na = 5.0\n[solver]\ndim = 10\n\
             [evolution]\nkind = \"shifted\"\nwidth_factors = [0.5, 1.0]\nx0 = 5.0\nt_max = 10.0\n",
        )
        .unwrap();
        let m = (0.01f64 * 25.0 / 6.0).sqrt();
        let w = &r.evolution.unwrap().widths;
        assert!((w[0] - 0.5 * m).abs() < 1e-15 && (w[1] - m).abs() < 1e-15);
    }
}
