//! Run configuration: flat `dotted.key = value` lines, `#` starts a comment.
//!
//! ```text
//! problem.kind = fig1            # fig1 | quadratic | random_qp | mlr | ct
//! solver.method = pnkhb          # pnkhb | projected_gradient | pncg_two_metric
//! solver.max_rank = 2
//! ipm.tol = 1e-10
//! compare.solvers = pnkhb, projected_gradient, pnkhb:augmented
//! seed = 0
//! output = fig1.csv
//! ```
//!
//! Problem keys by kind:
//!
//! * `quadratic`: `problem.hessian`, `problem.linear`, `problem.lower`,
//!   `problem.upper`, optional `problem.x0`. Each is a path to a dense text
//!   matrix whose first line is `rows cols`; vectors are `n 1`. `inf` and
//!   `-inf` are accepted. Relative paths resolve against the config file.
//! * `random_qp`: `problem.n`.
//! * `mlr`: `problem.n_classes`, `problem.n_f`, `problem.m_f`,
//!   `problem.n_samples`, `problem.bound`, `problem.separation`.
//! * `ct`: `problem.image_side`, `problem.n_materials`, `problem.n_energies`,
//!   `problem.n_windows`, `problem.n_angles`, `problem.noise`, `problem.upper`,
//!   `problem.gamma1`, `problem.gamma2`.
//!
//! Solver keys are the fields of [`SolverConfig`] under `solver.` and of
//! [`IpmConfig`](crate::ipm::IpmConfig) under `ipm.`; `check.points` sets the
//! number of random points for the `check` subcommand.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::active_set::ActiveSetMode;
use crate::bounds::BoxBounds;
use crate::operators::ObjectiveProblem;
use crate::problems::{make_fig1_problem, make_synthetic_mlr, make_toy_ct, random_convex_qp, CtConfig, MlrConfig, QuadraticBoxProblem};
use crate::solver::{Method, SolverConfig};
use crate::{Matrix, Vector};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },

    #[error("missing required key '{0}'")]
    Missing(String),

    #[error("line {line}: invalid value for '{key}': {message}")]
    Invalid { line: usize, key: String, message: String },

    #[error("{message}")]
    Problem { message: String },

    #[error("cannot read {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl ConfigError {
    pub fn is_io(&self) -> bool {
        matches!(self, ConfigError::Io { .. })
    }
}

#[derive(Debug, Clone)]
pub enum ProblemSpec {
    Fig1,
    Quadratic {
        hessian: Matrix,
        linear: Vector,
        lower: Vector,
        upper: Vector,
        x0: Option<Vector>,
    },
    RandomQp {
        n: usize,
    },
    Mlr(MlrConfig),
    Ct(CtConfig),
}

impl ProblemSpec {
    pub fn kind(&self) -> &'static str {
        match self {
            ProblemSpec::Fig1 => "fig1",
            ProblemSpec::Quadratic { .. } => "quadratic",
            ProblemSpec::RandomQp { .. } => "random_qp",
            ProblemSpec::Mlr(_) => "mlr",
            ProblemSpec::Ct(_) => "ct",
        }
    }

    /// The problem and its starting point. `seed` drives every random choice.
    pub fn build(&self, seed: u64) -> crate::Result<(Box<dyn ObjectiveProblem>, Vector)> {
        Ok(match self {
            ProblemSpec::Fig1 => {
                let p = make_fig1_problem();
                let x0 = p.x0().clone();
                (Box::new(p), x0)
            }
            ProblemSpec::Quadratic {
                hessian,
                linear,
                lower,
                upper,
                x0,
            } => {
                let bounds = BoxBounds::new(lower.clone(), upper.clone())?;
                let p = QuadraticBoxProblem::new(hessian.clone(), linear.clone(), bounds, x0.clone())?;
                let x0 = p.x0().clone();
                (Box::new(p), x0)
            }
            ProblemSpec::RandomQp { n } => {
                let p = random_convex_qp(*n, seed);
                let x0 = p.x0().clone();
                (Box::new(p), x0)
            }
            ProblemSpec::Mlr(cfg) => {
                let p = make_synthetic_mlr(&MlrConfig { seed, ..cfg.clone() })?;
                let x0 = Vector::zeros(p.dim());
                (Box::new(p), x0)
            }
            ProblemSpec::Ct(cfg) => {
                let p = make_toy_ct(&CtConfig { seed, ..cfg.clone() })?;
                let x0 = Vector::zeros(p.dim());
                (Box::new(p), x0)
            }
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverSpec {
    pub label: String,
    pub method: Method,
    pub config: SolverConfig,
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub problem: ProblemSpec,
    /// The `solver.*` configuration.
    pub solver: SolverSpec,
    /// Entries of `compare.solvers`; defaults to `[solver]`.
    pub compare: Vec<SolverSpec>,
    pub seed: u64,
    pub output: Option<PathBuf>,
    pub check_points: usize,
}

/// Sets one `solver.*` or `ipm.*` field from its textual value.
pub fn apply_solver_key(cfg: &mut SolverConfig, key: &str, value: &str) -> Result<(), String> {
    fn num<T: FromStr>(v: &str) -> Result<T, String> {
        v.parse().map_err(|_| format!("cannot parse '{v}'"))
    }
    fn flag(v: &str) -> Result<bool, String> {
        match v {
            "true" | "1" | "yes" => Ok(true),
            "false" | "0" | "no" => Ok(false),
            _ => Err(format!("expected true or false, got '{v}'")),
        }
    }
    match key {
        "solver.max_outer" => cfg.max_outer = num(value)?,
        "solver.max_linesearch" => cfg.max_linesearch = num(value)?,
        "solver.alpha" => cfg.alpha = num(value)?,
        "solver.xtol" => cfg.xtol = num(value)?,
        "solver.gtol" => cfg.gtol = num(value)?,
        "solver.max_rank" => cfg.max_rank = num(value)?,
        "solver.shift" => cfg.shift = num(value)?,
        "solver.breakdown_tol" => cfg.breakdown_tol = num(value)?,
        "solver.active_set" => cfg.active_set = value.parse::<ActiveSetMode>().map_err(|e| e.to_string())?,
        "solver.epsilon" => cfg.epsilon = if value == "auto" { None } else { Some(num(value)?) },
        "solver.strict_reset" => cfg.strict_reset = flag(value)?,
        "solver.gradient_fallback" => cfg.gradient_fallback = flag(value)?,
        "solver.diagnostics" => cfg.diagnostics = flag(value)?,
        "ipm.sigma" => cfg.ipm.sigma = num(value)?,
        "ipm.tau" => cfg.ipm.tau = num(value)?,
        "ipm.tol" => cfg.ipm.tol = num(value)?,
        "ipm.max_iter" => cfg.ipm.max_iter = num(value)?,
        "ipm.warm_start" => cfg.ipm.warm_start = flag(value)?,
        _ => return Err(format!("unknown key '{key}'")),
    }
    Ok(())
}

struct Entries {
    map: BTreeMap<String, (usize, String)>,
}

impl Entries {
    fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut map = BTreeMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (key, value) = content.split_once('=').ok_or_else(|| ConfigError::Syntax {
                line,
                message: format!("expected 'key = value', got '{content}'"),
            })?;
            let (key, value) = (key.trim(), value.trim());
            if key.is_empty() || key.contains(char::is_whitespace) {
                return Err(ConfigError::Syntax {
                    line,
                    message: format!("invalid key '{key}'"),
                });
            }
            if let Some((first, _)) = map.insert(key.to_string(), (line, value.to_string())) {
                return Err(ConfigError::Syntax {
                    line,
                    message: format!("duplicate key '{key}' (first set on line {first})"),
                });
            }
        }
        Ok(Self { map })
    }

    fn take(&mut self, key: &str) -> Option<(usize, String)> {
        self.map.remove(key)
    }

    fn take_parsed<T: FromStr>(&mut self, key: &str) -> Result<Option<T>, ConfigError> {
        match self.take(key) {
            None => Ok(None),
            Some((line, v)) => v.parse().map(Some).map_err(|_| ConfigError::Invalid {
                line,
                key: key.into(),
                message: format!("cannot parse '{v}'"),
            }),
        }
    }

    fn set<T: FromStr>(&mut self, key: &str, target: &mut T) -> Result<(), ConfigError> {
        if let Some(v) = self.take_parsed(key)? {
            *target = v;
        }
        Ok(())
    }
}

/// Reads a dense text matrix: a `rows cols` header, then `rows·cols` values in row-major order.
pub fn read_matrix(path: &Path) -> Result<Matrix, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_matrix(&text).map_err(|message| ConfigError::Problem {
        message: format!("{}: {message}", path.display()),
    })
}

pub fn parse_matrix(text: &str) -> Result<Matrix, String> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty() && !l.trim_start().starts_with('#'));
    let header = lines.next().ok_or("empty matrix file")?;
    let dims: Vec<usize> = header
        .split_whitespace()
        .map(|t| t.parse().map_err(|_| format!("bad header '{header}'")))
        .collect::<Result<_, _>>()?;
    let [rows, cols] = dims[..] else {
        return Err(format!("header must be 'rows cols', got '{header}'"));
    };
    let values: Vec<f64> = lines
        .flat_map(str::split_whitespace)
        .map(|t| t.parse().map_err(|_| format!("bad number '{t}'")))
        .collect::<Result<_, _>>()?;
    if values.len() != rows * cols {
        return Err(format!("expected {} values, found {}", rows * cols, values.len()));
    }
    Ok(Matrix::from_row_slice(rows, cols, &values))
}

fn read_vector(entries: &mut Entries, key: &str, base: &Path, required: bool) -> Result<Option<Vector>, ConfigError> {
    let Some((line, path)) = entries.take(key) else {
        return if required { Err(ConfigError::Missing(key.into())) } else { Ok(None) };
    };
    let m = read_matrix(&base.join(&path))?;
    if m.ncols() != 1 {
        return Err(ConfigError::Invalid {
            line,
            key: key.into(),
            message: format!("expected an n×1 matrix, got {}×{}", m.nrows(), m.ncols()),
        });
    }
    Ok(Some(m.column(0).into_owned()))
}

fn parse_problem(entries: &mut Entries, base: &Path) -> Result<ProblemSpec, ConfigError> {
    let (line, kind) = entries.take("problem.kind").ok_or_else(|| ConfigError::Missing("problem.kind".into()))?;
    Ok(match kind.as_str() {
        "fig1" => ProblemSpec::Fig1,
        "quadratic" => {
            let (_, hpath) = entries.take("problem.hessian").ok_or_else(|| ConfigError::Missing("problem.hessian".into()))?;
            let hessian = read_matrix(&base.join(hpath))?;
            ProblemSpec::Quadratic {
                hessian,
                linear: read_vector(entries, "problem.linear", base, true)?.unwrap(),
                lower: read_vector(entries, "problem.lower", base, true)?.unwrap(),
                upper: read_vector(entries, "problem.upper", base, true)?.unwrap(),
                x0: read_vector(entries, "problem.x0", base, false)?,
            }
        }
        "random_qp" => ProblemSpec::RandomQp {
            n: entries.take_parsed("problem.n")?.unwrap_or(30),
        },
        "mlr" => {
            let mut c = MlrConfig::default();
            entries.set("problem.n_classes", &mut c.n_classes)?;
            entries.set("problem.n_f", &mut c.n_f)?;
            entries.set("problem.m_f", &mut c.m_f)?;
            entries.set("problem.n_samples", &mut c.n_samples)?;
            entries.set("problem.bound", &mut c.bound)?;
            entries.set("problem.separation", &mut c.separation)?;
            ProblemSpec::Mlr(c)
        }
        "ct" => {
            let mut c = CtConfig::default();
            entries.set("problem.image_side", &mut c.image_side)?;
            entries.set("problem.n_materials", &mut c.n_materials)?;
            entries.set("problem.n_energies", &mut c.n_energies)?;
            entries.set("problem.n_windows", &mut c.n_windows)?;
            entries.set("problem.n_angles", &mut c.n_angles)?;
            entries.set("problem.noise", &mut c.noise)?;
            entries.set("problem.upper", &mut c.upper)?;
            entries.set("problem.gamma1", &mut c.gamma1)?;
            entries.set("problem.gamma2", &mut c.gamma2)?;
            ProblemSpec::Ct(c)
        }
        other => {
            return Err(ConfigError::Invalid {
                line,
                key: "problem.kind".into(),
                message: format!("unknown problem kind '{other}'"),
            })
        }
    })
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::parse(&text, path.parent().unwrap_or(Path::new(".")))
    }

    /// `base` resolves relative data-file paths.
    pub fn parse(text: &str, base: &Path) -> Result<Self, ConfigError> {
        let mut entries = Entries::parse(text)?;
        let problem = parse_problem(&mut entries, base)?;

        let method_line = entries.map.get("solver.method").map(|(l, _)| *l).unwrap_or(0);
        let method: Method = match entries.take("solver.method") {
            None => Method::Pnkhb,
            Some((line, v)) => v.parse().map_err(|e: crate::Error| ConfigError::Invalid {
                line,
                key: "solver.method".into(),
                message: e.to_string(),
            })?,
        };
        let mut config = SolverConfig::default();
        let keys: Vec<String> = entries
            .map
            .keys()
            .filter(|k| k.starts_with("solver.") || k.starts_with("ipm."))
            .cloned()
            .collect();
        for key in keys {
            let (line, value) = entries.take(&key).unwrap();
            apply_solver_key(&mut config, &key, &value).map_err(|message| ConfigError::Invalid { line, key, message })?;
        }
        config.validate().map_err(|e| ConfigError::Invalid {
            line: method_line,
            key: "solver".into(),
            message: e.to_string(),
        })?;
        let solver = SolverSpec {
            label: method.as_str().into(),
            method,
            config,
        };

        let compare = match entries.take("compare.solvers") {
            None => vec![solver.clone()],
            Some((line, list)) => parse_compare(&list, &solver).map_err(|message| ConfigError::Invalid {
                line,
                key: "compare.solvers".into(),
                message,
            })?,
        };
        let seed = entries.take_parsed("seed")?.unwrap_or(0);
        let output = entries.take("output").map(|(_, v)| PathBuf::from(v));
        let check_points = entries.take_parsed("check.points")?.unwrap_or(5);

        if let Some((key, (line, _))) = entries.map.iter().next() {
            return Err(ConfigError::Syntax {
                line: *line,
                message: format!("unknown key '{key}'"),
            });
        }
        Ok(Self {
            problem,
            solver,
            compare,
            seed,
            output,
            check_points,
        })
    }
}

/// `method[:active_set]` entries separated by commas; labels must be unique.
fn parse_compare(list: &str, base: &SolverSpec) -> Result<Vec<SolverSpec>, String> {
    let mut out: Vec<SolverSpec> = Vec::new();
    for item in list.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let (m, mode) = match item.split_once(':') {
            Some((m, a)) => (m, Some(a)),
            None => (item, None),
        };
        let method: Method = m.parse().map_err(|e: crate::Error| e.to_string())?;
        let mut config = base.config.clone();
        if let Some(a) = mode {
            config.active_set = a.parse().map_err(|e: crate::Error| e.to_string())?;
        }
        let label = match mode {
            Some(a) => format!("{}_{a}", method.as_str()),
            None => method.as_str().to_string(),
        };
        if out.iter().any(|s| s.label == label) {
            return Err(format!("solver '{item}' listed twice"));
        }
        out.push(SolverSpec { label, method, config });
    }
    if out.is_empty() {
        return Err("empty solver list".into());
    }
    Ok(out)
}

/// `count` points drawn uniformly from the box, with infinite sides replaced by `x0 ± 1`.
pub fn random_feasible_points(bounds: &BoxBounds, x0: &Vector, count: usize, seed: u64) -> Vec<Vector> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            Vector::from_fn(bounds.dim(), |i, _| {
                let l = if bounds.lower()[i].is_finite() { bounds.lower()[i] } else { x0[i] - 1.0 };
                let u = if bounds.upper()[i].is_finite() { bounds.upper()[i] } else { x0[i] + 1.0 };
                if u > l {
                    rng.random_range(l..u)
                } else {
                    l
                }
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_fig1_with_overrides() {
        let text = "# demo\nproblem.kind = fig1\nsolver.max_rank = 2   # full rank\nipm.tol=1e-12\nseed = 4\n";
        let cfg = RunConfig::parse(text, Path::new(".")).unwrap();
        assert!(matches!(cfg.problem, ProblemSpec::Fig1));
        assert_eq!(cfg.solver.config.max_rank, 2);
        assert_eq!(cfg.solver.config.ipm.tol, 1e-12);
        assert_eq!(cfg.seed, 4);
        assert_eq!(cfg.compare.len(), 1);
    }

    #[test]
    fn missing_problem_names_the_key() {
        let err = RunConfig::parse("solver.max_rank = 2\n", Path::new(".")).unwrap_err();
        assert!(err.to_string().contains("problem"));
        assert!(matches!(err, ConfigError::Missing(_)));
    }

    #[test]
    fn errors_are_line_anchored() {
        let err = RunConfig::parse("problem.kind = fig1\n\nsolver.alpha = abc\n", Path::new(".")).unwrap_err();
        assert!(err.to_string().starts_with("line 3:"), "{err}");
        let err = RunConfig::parse("problem.kind = fig1\nbogus\n", Path::new(".")).unwrap_err();
        assert!(err.to_string().starts_with("line 2:"), "{err}");
        let err = RunConfig::parse("problem.kind = fig1\nsolver.nope = 1\n", Path::new(".")).unwrap_err();
        assert!(err.to_string().contains("line 2"), "{err}");
    }

    #[test]
    fn compare_list() {
        let cfg = RunConfig::parse(
            "problem.kind = fig1\ncompare.solvers = pnkhb, projected_gradient, pnkhb:augmented\n",
            Path::new("."),
        )
        .unwrap();
        let labels: Vec<_> = cfg.compare.iter().map(|s| s.label.as_str()).collect();
        assert_eq!(labels, ["pnkhb", "projected_gradient", "pnkhb_augmented"]);
        assert_eq!(cfg.compare[2].config.active_set, ActiveSetMode::Augmented);
    }

    #[test]
    fn matrix_text_format() {
        let m = parse_matrix("2 2\n1 1\n1 2\n").unwrap();
        assert_eq!(m, Matrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 2.0]));
        let v = parse_matrix("2 1\n-inf\n3\n").unwrap();
        assert_eq!(v[(0, 0)], f64::NEG_INFINITY);
        assert!(parse_matrix("2 2\n1 2 3\n").is_err());
    }
}
