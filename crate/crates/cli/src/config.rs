//! Run configuration: a TOML file with strict schemas. Unknown keys are
//! rejected and every value is validated before any solver runs.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use plaplace::graph::{ball, generators, load_edge_list, MeasureSource};
use plaplace::{
    Coefficient, Function, Graph, LambdaConfig, Model, MpaConfig, Nonlinearity, PowerTerm,
    SolveConfig, Well,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;

use crate::CliError;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub graph: GraphSection,
    pub model: ModelSection,
    #[serde(default)]
    pub solver: SolverSection,
    #[serde(default)]
    pub mountain_pass: MountainPassSection,
    pub well: Option<WellSection>,
    #[serde(default)]
    pub lambda: LambdaSection,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphSection {
    /// Edge-list file, `u v w` per line.
    pub edges: Option<PathBuf>,
    /// Measure for an edge-list graph: a constant or a `label value` file.
    pub measure: Option<Values>,
    pub generator: Option<Generator>,
    /// Truncate to the hop ball around `center`.
    pub ball: Option<BallSection>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BallSection {
    pub center: Label,
    pub radius: usize,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Generator {
    Path {
        n: usize,
        #[serde(default = "one")]
        weight: f64,
        #[serde(default = "one")]
        measure: f64,
    },
    Cycle {
        n: usize,
        #[serde(default = "one")]
        weight: f64,
        #[serde(default = "one")]
        measure: f64,
    },
    Complete {
        n: usize,
        #[serde(default = "one")]
        weight: f64,
        #[serde(default = "one")]
        measure: f64,
    },
    Star {
        leaves: usize,
        #[serde(default = "one")]
        weight: f64,
        #[serde(default = "one")]
        measure: f64,
    },
    Grid {
        rows: usize,
        cols: usize,
        #[serde(default = "one")]
        weight: f64,
        #[serde(default = "one")]
        measure: f64,
    },
    Random {
        n: usize,
        extra_edges: usize,
        weight: [f64; 2],
        measure: [f64; 2],
        seed: u64,
    },
}

fn one() -> f64 {
    1.0
}

/// Vertex label written either as an integer or a string.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum Label {
    Index(u64),
    Name(String),
}

impl Label {
    pub fn resolve(&self, g: &Graph) -> Result<usize, CliError> {
        let name = match self {
            Label::Index(i) => i.to_string(),
            Label::Name(s) => s.clone(),
        };
        g.index_of(&name)
            .map_err(|_| CliError::Config(format!("unknown vertex `{name}`")))
    }
}

/// Per-vertex values: a constant, an explicit list in vertex order, a
/// `label value` file, or (for `rho` only) the formula `theta*a+b`.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum Values {
    Constant(f64),
    List(Vec<f64>),
    File(FileValues),
    Formula(String),
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileValues {
    pub file: PathBuf,
    #[serde(default)]
    pub default: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    pub p: f64,
    #[serde(default = "default_rho")]
    pub rho: Values,
    /// Parameter used when `rho = "theta*a+b"`.
    pub theta: Option<f64>,
    pub nonlinearity: NonlinearityConfig,
}

fn default_rho() -> Values {
    Values::Constant(1.0)
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum NonlinearityConfig {
    PurePower { q: f64 },
    WeightedPower { q: f64, coefficients: Values },
    SumOfPowers { terms: Vec<PowerTermConfig> },
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PowerTermConfig {
    pub q: f64,
    #[serde(default = "one")]
    pub c: f64,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSection {
    pub random_seeds: Option<usize>,
    pub max_spike_seeds: Option<usize>,
    pub max_iterations: Option<usize>,
    pub tol_eq: Option<f64>,
    pub tol_n: Option<f64>,
    pub projection_tol: Option<f64>,
    pub trace: Option<bool>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MountainPassSection {
    pub segments: Option<usize>,
    pub max_iterations: Option<usize>,
    pub tol_eq: Option<f64>,
    pub endpoint: Option<Values>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WellSection {
    pub a: Option<Values>,
    /// Explicit well; `a` then defaults to the hop distance to it.
    pub omega: Option<Vec<Label>>,
    #[serde(default = "default_rho")]
    pub b: Values,
    pub schedule: Vec<f64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LambdaSection {
    pub restarts: Option<usize>,
    pub tol: Option<f64>,
    pub max_iterations: Option<usize>,
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<(Self, PathBuf), CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok((Self::parse(&text)?, base))
    }
}

/// Everything a command needs, built and validated from a [`RunConfig`].
#[derive(Debug, Clone)]
pub struct Prepared {
    pub graph: Arc<Graph>,
    pub model: Model,
    /// True when `rho` is the well formula and no `theta` was given.
    pub rho_needs_theta: bool,
    pub well: Option<Well>,
    pub solve: SolveConfig<f64>,
    pub mountain_pass: MpaConfig<f64>,
    pub lambda: LambdaConfig<f64>,
    pub seed: u64,
}

fn resolve_path(base: &Path, p: &Path) -> PathBuf {
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.join(p)
    }
}

fn vertex_values(g: &Graph, v: &Values, base: &Path, what: &str) -> Result<Function, CliError> {
    let n = g.n_vertices();
    match v {
        Values::Constant(c) => Ok(Function::constant(n, *c)?),
        Values::List(list) => {
            if list.len() != n {
                return Err(CliError::Config(format!(
                    "{what} lists {} values for {n} vertices",
                    list.len()
                )));
            }
            Ok(Function::new(list.clone())?)
        }
        Values::File(f) => {
            let path = resolve_path(base, &f.file);
            let text = std::fs::read_to_string(&path)
                .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
            Function::from_text(g, &text, f.default)
                .map_err(|e| CliError::Config(format!("{what} ({}): {e}", path.display())))
        }
        Values::Formula(s) => Err(CliError::Config(format!(
            "{what} does not accept the formula `{s}`"
        ))),
    }
}

fn build_graph(sec: &GraphSection, base: &Path) -> Result<Graph, CliError> {
    let g = match (&sec.edges, &sec.generator) {
        (Some(_), Some(_)) => {
            return Err(CliError::Config(
                "graph: give either `edges` or `generator`, not both".into(),
            ))
        }
        (None, None) => {
            return Err(CliError::Config(
                "graph: `edges` or `generator` is required".into(),
            ))
        }
        (Some(path), None) => {
            let path = resolve_path(base, path);
            let measure = match &sec.measure {
                None => MeasureSource::Constant(1.0),
                Some(Values::Constant(c)) => MeasureSource::Constant(*c),
                Some(Values::File(f)) => MeasureSource::File {
                    path: resolve_path(base, &f.file),
                    default: f.default,
                },
                Some(_) => {
                    return Err(CliError::Config(
                        "graph.measure must be a constant or a file".into(),
                    ))
                }
            };
            load_edge_list(&path, &measure).map_err(|e| match e {
                plaplace::Error::Io(m) => CliError::Io(m),
                other => CliError::Config(format!("{}: {other}", path.display())),
            })?
        }
        (None, Some(gen)) => {
            if sec.measure.is_some() {
                return Err(CliError::Config(
                    "graph.measure applies to edge lists; set it on the generator".into(),
                ));
            }
            match gen {
                Generator::Path { n, weight, measure } => generators::path(*n, *weight, *measure)?,
                Generator::Cycle { n, weight, measure } => {
                    generators::cycle(*n, *weight, *measure)?
                }
                Generator::Complete { n, weight, measure } => {
                    generators::complete(*n, *weight, *measure)?
                }
                Generator::Star {
                    leaves,
                    weight,
                    measure,
                } => generators::star(*leaves, *weight, *measure)?,
                Generator::Grid {
                    rows,
                    cols,
                    weight,
                    measure,
                } => generators::grid(*rows, *cols, *weight, *measure)?,
                Generator::Random {
                    n,
                    extra_edges,
                    weight,
                    measure,
                    seed,
                } => {
                    let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                    generators::random_connected(
                        *n,
                        *extra_edges,
                        (weight[0], weight[1]),
                        (measure[0], measure[1]),
                        &mut rng,
                    )?
                }
            }
        }
    };
    match &sec.ball {
        None => Ok(g),
        Some(b) => {
            let center = b.center.resolve(&g)?;
            let dom = ball(&g, center, b.radius)?;
            let (sub, _) = g.induced_subgraph(dom.members())?;
            Ok(sub)
        }
    }
}

fn build_nonlinearity(
    nl_cfg: &NonlinearityConfig,
    g: &Graph,
    base: &Path,
) -> Result<Nonlinearity<f64>, CliError> {
    Ok(match nl_cfg {
        NonlinearityConfig::PurePower { q } => Nonlinearity::pure_power(*q)?,
        NonlinearityConfig::WeightedPower { q, coefficients } => {
            let c = vertex_values(g, coefficients, base, "nonlinearity.coefficients")?;
            Nonlinearity::weighted_power(*q, c.into_vec())?
        }
        NonlinearityConfig::SumOfPowers { terms } => Nonlinearity::sum_of_powers(
            terms
                .iter()
                .map(|t| PowerTerm {
                    exponent: t.q,
                    coefficient: Coefficient::Uniform(t.c),
                })
                .collect(),
        )?,
    })
}

fn build_well(sec: &WellSection, g: &Graph, base: &Path) -> Result<Well, CliError> {
    let b = vertex_values(g, &sec.b, base, "well.b")?;
    let schedule = sec.schedule.clone();
    match (&sec.a, &sec.omega) {
        (None, None) => Err(CliError::Config("well: `a` or `omega` is required".into())),
        (Some(a), omega) => {
            let a = vertex_values(g, a, base, "well.a")?;
            let well = Well::new(g, a, b, schedule)?;
            if let Some(labels) = omega {
                let mut given = labels
                    .iter()
                    .map(|l| l.resolve(g))
                    .collect::<Result<Vec<_>, _>>()?;
                given.sort_unstable();
                given.dedup();
                if given != well.omega().members() {
                    return Err(CliError::Config(
                        "well.omega disagrees with the zero set of well.a".into(),
                    ));
                }
            }
            Ok(well)
        }
        (None, Some(labels)) => {
            let members = labels
                .iter()
                .map(|l| l.resolve(g))
                .collect::<Result<Vec<_>, _>>()?;
            Ok(Well::from_omega(g, &members, b, schedule)?)
        }
    }
}

fn is_well_formula(s: &str) -> bool {
    s.chars().filter(|c| !c.is_whitespace()).collect::<String>() == "theta*a+b"
}

impl RunConfig {
    /// Builds the graph, model and solver settings. `seed` overrides the
    /// configured seed.
    pub fn prepare(&self, base: &Path, seed: Option<u64>) -> Result<Prepared, CliError> {
        let graph = Arc::new(build_graph(&self.graph, base)?);
        let g = &*graph;
        let well = self
            .well
            .as_ref()
            .map(|w| build_well(w, g, base))
            .transpose()?;
        let mut rho_needs_theta = false;
        let rho = match &self.model.rho {
            Values::Formula(s) => {
                if !is_well_formula(s) {
                    return Err(CliError::Config(format!(
                        "unsupported rho formula `{s}` (only `theta*a+b`)"
                    )));
                }
                let w = well.as_ref().ok_or_else(|| {
                    CliError::Config("rho = \"theta*a+b\" needs a [well] section".into())
                })?;
                match self.model.theta {
                    Some(t) if t > 0.0 => w.potential(t)?,
                    Some(t) => {
                        return Err(CliError::Config(format!(
                            "model.theta must be positive (got {t})"
                        )))
                    }
                    None => {
                        rho_needs_theta = true;
                        w.b().clone()
                    }
                }
            }
            other => {
                if self.model.theta.is_some() {
                    return Err(CliError::Config(
                        "model.theta is only used with rho = \"theta*a+b\"".into(),
                    ));
                }
                vertex_values(g, other, base, "model.rho")?
            }
        };
        let nl = build_nonlinearity(&self.model.nonlinearity, g, base)?;
        let model = Model::new(graph.clone(), self.model.p, rho, nl)?;
        let seed = seed.or(self.seed).unwrap_or(0);

        let d = SolveConfig::<f64>::default();
        let s = &self.solver;
        let solve = SolveConfig {
            random_seeds: s.random_seeds.unwrap_or(d.random_seeds),
            max_spike_seeds: s.max_spike_seeds.unwrap_or(d.max_spike_seeds),
            max_iterations: s.max_iterations.unwrap_or(d.max_iterations),
            tol_eq: positive(s.tol_eq, d.tol_eq, "solver.tol_eq")?,
            tol_n: positive(s.tol_n, d.tol_n, "solver.tol_n")?,
            projection_tol: positive(s.projection_tol, d.projection_tol, "solver.projection_tol")?,
            rng_seed: seed,
            record_trace: s.trace.unwrap_or(true),
        };
        if solve.random_seeds + solve.max_spike_seeds == 0 {
            return Err(CliError::Config(
                "solver needs at least one random or spike seed".into(),
            ));
        }

        let d = MpaConfig::<f64>::default();
        let m = &self.mountain_pass;
        let mountain_pass = MpaConfig {
            segments: m.segments.unwrap_or(d.segments),
            max_iterations: m.max_iterations.unwrap_or(d.max_iterations),
            tol_eq: positive(m.tol_eq, d.tol_eq, "mountain_pass.tol_eq")?,
            endpoint: m
                .endpoint
                .as_ref()
                .map(|v| vertex_values(g, v, base, "mountain_pass.endpoint"))
                .transpose()?,
            record_trace: solve.record_trace,
        };
        if mountain_pass.segments < 8 {
            return Err(CliError::Config(format!(
                "mountain_pass.segments must be at least 8 (got {})",
                mountain_pass.segments
            )));
        }

        let d = LambdaConfig::<f64>::default();
        let l = &self.lambda;
        let lambda = LambdaConfig {
            restarts: l.restarts.unwrap_or(d.restarts),
            tol: positive(l.tol, d.tol, "lambda.tol")?,
            max_iterations: l.max_iterations.unwrap_or(d.max_iterations),
            rng_seed: seed,
        };
        if lambda.restarts == 0 {
            return Err(CliError::Config(
                "lambda.restarts must be at least 1".into(),
            ));
        }
        Ok(Prepared {
            graph,
            model,
            rho_needs_theta,
            well,
            solve,
            mountain_pass,
            lambda,
            seed,
        })
    }
}

fn positive(v: Option<f64>, default: f64, what: &str) -> Result<f64, CliError> {
    match v {
        None => Ok(default),
        Some(x) if x > 0.0 && x.is_finite() => Ok(x),
        Some(x) => Err(CliError::Config(format!(
            "{what} must be positive (got {x})"
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const K2: &str = r#"
[graph]
generator = { kind = "complete", n = 2 }

[model]
p = 2.0
nonlinearity = { family = "pure_power", q = 4.0 }
"#;

    #[test]
    fn minimal_config() {
        let cfg = RunConfig::parse(K2).unwrap();
        let prep = cfg.prepare(Path::new("."), Some(9)).unwrap();
        assert_eq!(prep.graph.n_vertices(), 2);
        assert_eq!(prep.model.potential().as_slice(), &[1.0, 1.0]);
        assert_eq!(prep.solve.rng_seed, 9);
        assert_eq!(prep.mountain_pass.segments, 32);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let typo = K2.replace("p = 2.0", "p = 2.0\ntol_eqq = 1e-8");
        assert!(matches!(RunConfig::parse(&typo), Err(CliError::Config(_))));
        let typo = format!("{K2}\n[solver]\ntol_eqq = 1e-8\n");
        assert!(RunConfig::parse(&typo).is_err());
        let typo = K2.replace("n = 2 }", "n = 2, wieght = 1.0 }");
        assert!(RunConfig::parse(&typo).is_err());
    }

    #[test]
    fn p_one_is_rejected_with_message() {
        let cfg = RunConfig::parse(&K2.replace("p = 2.0", "p = 1.0")).unwrap();
        let err = cfg.prepare(Path::new("."), None).unwrap_err();
        assert!(err.to_string().contains("p must exceed 1"), "{err}");
    }

    #[test]
    fn well_formula() {
        let text = r#"
[graph]
generator = { kind = "complete", n = 2 }
[model]
p = 2.0
rho = "theta * a + b"
theta = 3.0
nonlinearity = { family = "pure_power", q = 4.0 }
[well]
a = [0.0, 1.0]
b = 1.0
schedule = [1.0, 10.0]
"#;
        let prep = RunConfig::parse(text)
            .unwrap()
            .prepare(Path::new("."), None)
            .unwrap();
        assert_eq!(prep.model.potential().as_slice(), &[1.0, 4.0]);
        let bad = text.replace("schedule = [1.0, 10.0]", "schedule = [10.0, 1.0]");
        assert!(RunConfig::parse(&bad)
            .unwrap()
            .prepare(Path::new("."), None)
            .is_err());
    }

    #[test]
    fn omega_override_must_match_a() {
        let text = r#"
[graph]
generator = { kind = "path", n = 3 }
[model]
p = 2.0
nonlinearity = { family = "pure_power", q = 4.0 }
[well]
a = [0.0, 1.0, 2.0]
omega = [1]
schedule = [1.0]
"#;
        assert!(RunConfig::parse(text)
            .unwrap()
            .prepare(Path::new("."), None)
            .is_err());
        let ok = text.replace("omega = [1]", "omega = [0]");
        assert!(RunConfig::parse(&ok)
            .unwrap()
            .prepare(Path::new("."), None)
            .is_ok());
    }
}
