//! Self-check suite run by `plaplace verify`.
//!
//! Every check draws its inputs from a fixed-seed generator. The Laplacian is
//! injectable so that a deliberately broken operator can be shown to fail.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::calculus::{integration_by_parts_with, p_laplacian};
use crate::energy::EnergyModel;
use crate::error::Result;
use crate::function::VertexFunction;
use crate::graph::generators::{complete, path, random_connected};
use crate::graph::{GraphBuilder, WeightedGraph};
use crate::lambda::{dense_lambda_p2, estimate_lambda_p, LambdaConfig};
use crate::nehari::{
    brute_force_ground_state, gamma, nehari_project, verify_positivity, BruteForceGrid,
};
use crate::nonlinearity::{Coefficient, Nonlinearity, PowerTerm};
use crate::scalar::signed_pow;
use crate::solver::{ground_state_solve, SolveConfig};

pub type Laplacian =
    fn(&WeightedGraph<f64>, &VertexFunction<f64>, f64) -> Result<VertexFunction<f64>>;

#[derive(Debug, Clone, PartialEq)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct VerifyReport {
    pub checks: Vec<CheckOutcome>,
}

impl VerifyReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckOutcome> {
        self.checks.iter().filter(|c| !c.passed)
    }

    /// One aligned `PASS`/`FAIL` line per check.
    pub fn table(&self) -> String {
        let width = self.checks.iter().map(|c| c.name.len()).max().unwrap_or(0);
        self.checks
            .iter()
            .map(|c| {
                format!(
                    "{:<width$}  {}  {}\n",
                    c.name,
                    if c.passed { "PASS" } else { "FAIL" },
                    c.detail
                )
            })
            .collect()
    }
}

pub const IBP_EXPONENTS: [f64; 5] = [1.5, 2.0, 2.5, 3.0, 4.0];

fn random_graph(rng: &mut ChaCha8Rng, max_n: usize) -> WeightedGraph<f64> {
    let n = rng.gen_range(2..=max_n);
    let extra = rng.gen_range(0..=n);
    random_connected(n, extra, (0.1, 3.0), (0.2, 4.0), rng).expect("generator output is valid")
}

fn random_function(rng: &mut ChaCha8Rng, n: usize, lo: f64, hi: f64) -> VertexFunction<f64> {
    VertexFunction::from_fn(n, |_| rng.gen_range(lo..hi)).expect("finite")
}

fn random_model(rng: &mut ChaCha8Rng, g: WeightedGraph<f64>, p: f64) -> EnergyModel<f64> {
    let n = g.n_vertices();
    let rho = random_function(rng, n, 0.1, 2.0);
    let nl = match rng.gen_range(0..3) {
        0 => Nonlinearity::pure_power(p + rng.gen_range(0.5..2.0)),
        1 => {
            Nonlinearity::weighted_power(p + 1.0, (0..n).map(|_| rng.gen_range(0.5..2.0)).collect())
        }
        _ => Nonlinearity::sum_of_powers(vec![
            PowerTerm {
                exponent: p + 0.5,
                coefficient: Coefficient::Uniform(0.7),
            },
            PowerTerm {
                exponent: p + 2.0,
                coefficient: Coefficient::Uniform(0.3),
            },
        ]),
    }
    .expect("exponents exceed p");
    EnergyModel::new(Arc::new(g), p, rho, nl).expect("valid model")
}

/// Largest relative residual of the integration-by-parts identity.
pub fn integration_by_parts_residual(
    seed: u64,
    graphs: usize,
    max_n: usize,
    laplacian: Laplacian,
) -> Result<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0_f64;
    for _ in 0..graphs {
        let g = random_graph(&mut rng, max_n);
        let n = g.n_vertices();
        for p in IBP_EXPONENTS {
            let u = random_function(&mut rng, n, -2.0, 2.0);
            let v = random_function(&mut rng, n, -2.0, 2.0);
            let r = integration_by_parts_with(&g, &u, &v, p, laplacian)?;
            worst = worst.max(r.relative_residual());
        }
    }
    Ok(worst)
}

/// `G = −L(u) + ρ|u|^{p−2}u − ψ(x, u⁺)` with `L` the injected Laplacian.
fn gradient_with(
    model: &EnergyModel<f64>,
    u: &VertexFunction<f64>,
    laplacian: Laplacian,
) -> Result<Vec<f64>> {
    let lap = laplacian(model.graph(), u, model.p())?;
    let p = model.p();
    Ok((0..u.len())
        .map(|x| {
            -lap[x] + model.potential()[x] * signed_pow(u[x], p - 1.0)
                - model.nonlinearity().psi(x, u[x])
        })
        .collect())
}

/// Relative error between `⟨J′(u), φ⟩` and the central difference
/// `(J(u + hφ) − J(u − hφ)) / 2h`, `h = 1e−5 · max(1, ‖u‖∞)`.
pub fn gradient_fd_error(
    model: &EnergyModel<f64>,
    u: &VertexFunction<f64>,
    phi: &VertexFunction<f64>,
    laplacian: Laplacian,
) -> Result<f64> {
    let g = model.graph();
    let h = 1e-5 * u.max_abs().max(1.0);
    let jp = model.energy(&u.axpy(h, phi)?)?;
    let jm = model.energy(&u.axpy(-h, phi)?)?;
    let fd = (jp - jm) / (2.0 * h);
    let grad = gradient_with(model, u, laplacian)?;
    let an: f64 = (0..u.len()).map(|x| g.measure(x) * grad[x] * phi[x]).sum();
    Ok((fd - an).abs() / fd.abs().max(an.abs()).max(1e-300))
}

/// Function with every edge difference at least `gap` in magnitude.
pub fn separated_function(
    g: &WeightedGraph<f64>,
    rng: &mut ChaCha8Rng,
    gap: f64,
) -> VertexFunction<f64> {
    loop {
        let u = random_function(rng, g.n_vertices(), -2.0, 2.0);
        if g.edges().all(|(x, y, _)| (u[x] - u[y]).abs() >= gap) {
            return u;
        }
    }
}

pub fn gradient_consistency(seed: u64, pairs: usize, laplacian: Laplacian) -> Result<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0_f64;
    for k in 0..pairs {
        let p = [2.0, 2.5, 3.0, 4.0][k % 4];
        let g = random_graph(&mut rng, 25);
        let m = random_model(&mut rng, g, p);
        let u = random_function(&mut rng, m.n_vertices(), -1.5, 1.5);
        let phi = random_function(&mut rng, m.n_vertices(), -1.0, 1.0);
        worst = worst.max(gradient_fd_error(&m, &u, &phi, laplacian)?);
    }
    for p in [1.2, 1.5] {
        let g = random_graph(&mut rng, 8);
        let m = random_model(&mut rng, g, p);
        let u = separated_function(m.graph(), &mut rng, 0.05);
        let phi = random_function(&mut rng, m.n_vertices(), -1.0, 1.0);
        worst = worst.max(gradient_fd_error(&m, &u, &phi, laplacian)?);
    }
    Ok(worst)
}

fn check(name: &'static str, passed: bool, detail: String) -> CheckOutcome {
    CheckOutcome {
        name,
        passed,
        detail,
    }
}

fn guarded(name: &'static str, f: impl FnOnce() -> Result<(bool, String)>) -> CheckOutcome {
    match f() {
        Ok((passed, detail)) => check(name, passed, detail),
        Err(e) => check(name, false, format!("error: {e}")),
    }
}

pub fn run_suite(seed: u64) -> VerifyReport {
    run_suite_with(seed, p_laplacian)
}

pub fn run_suite_with(seed: u64, laplacian: Laplacian) -> VerifyReport {
    let mut checks = Vec::new();
    checks.push(guarded("integration_by_parts", || {
        let r = integration_by_parts_residual(seed, 10, 60, laplacian)?;
        Ok((r <= 1e-10, format!("max relative residual {r:.3e}")))
    }));
    checks.push(guarded("gradient_consistency", || {
        let r = gradient_consistency(seed ^ 0x9e37, 8, laplacian)?;
        Ok((r <= 1e-6, format!("max relative error {r:.3e}")))
    }));
    checks.push(guarded("residual_is_gradient_sup", || {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x51);
        let g = random_graph(&mut rng, 20);
        let m = random_model(&mut rng, g, 2.5);
        let u = random_function(&mut rng, m.n_vertices(), -1.0, 1.0);
        let exact = m.equation_residual(&u)? == m.energy_gradient(&u)?.max_abs();
        Ok((exact, "exact equality".into()))
    }));
    checks.push(guarded("gamma_monotone", || {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x77);
        let mut ok = true;
        for _ in 0..10 {
            let g = random_graph(&mut rng, 15);
            let p = rng.gen_range(1.5..3.5);
            let m = random_model(&mut rng, g, p);
            let u = random_function(&mut rng, m.n_vertices(), -0.5, 1.0);
            if u.positive_part().is_zero() {
                continue;
            }
            let mut prev = f64::NEG_INFINITY;
            for k in -12..=12 {
                let gv = gamma(&m, &u, 2f64.powi(k))?;
                ok &= gv > prev;
                prev = gv;
            }
        }
        Ok((ok, "geometric grid t = 2^-12 .. 2^12".into()))
    }));
    checks.push(guarded("projection_closed_form", || {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x33);
        let mut worst = 0.0_f64;
        let mut unique = true;
        for _ in 0..20 {
            let g = random_graph(&mut rng, 20);
            let n = g.n_vertices();
            let p = rng.gen_range(1.5..4.0);
            let q = p + rng.gen_range(0.3..3.0);
            let m = EnergyModel::new(
                Arc::new(g),
                p,
                random_function(&mut rng, n, 0.1, 2.0),
                Nonlinearity::pure_power(q)?,
            )?;
            let u = random_function(&mut rng, n, 0.01, 3.0);
            let pr = nehari_project(&m, &u, 1e-14)?;
            let den: f64 = (0..n).map(|x| m.graph().measure(x) * u[x].powf(q)).sum();
            let t0 = (m.norm_pow(&u)? / den).powf(1.0 / (q - p));
            worst = worst.max((pr.t0 - t0).abs() / t0);
            unique &= pr.sign_changes() == 1;
        }
        Ok((
            worst <= 1e-10 && unique,
            format!("max relative error {worst:.3e}"),
        ))
    }));
    checks.push(guarded("fibering_maximum", || {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x44);
        let mut ok = true;
        for _ in 0..10 {
            let g = random_graph(&mut rng, 15);
            let m = random_model(&mut rng, g, 2.0);
            let u = random_function(&mut rng, m.n_vertices(), 0.0, 1.0);
            let pr = nehari_project(&m, &u, 1e-14)?;
            for f in [0.25, 0.5, 0.75, 1.5, 2.0, 4.0] {
                ok &= pr.fiber_energy >= m.energy(&u.scaled(f * pr.t0)?)? - 1e-10;
            }
        }
        Ok((ok, "t in t0 * {1/4, 1/2, 3/4, 3/2, 2, 4}".into()))
    }));
    checks.push(guarded("oracle_equivalence", || {
        let mut worst = 0.0_f64;
        for m in tiny_models()? {
            let bf = brute_force_ground_state(
                &m,
                BruteForceGrid {
                    max: 2.0,
                    step: 0.02,
                    refine_levels: 2,
                },
            )?;
            let gs = ground_state_solve(&m, &SolveConfig::default())?.require_converged()?;
            worst = worst.max((gs.energy - bf.m).abs());
        }
        Ok((
            worst <= 1e-4,
            format!("max |m_solver - m_grid| {worst:.3e}"),
        ))
    }));
    checks.push(guarded("positivity_dichotomy", || {
        let mut ok = true;
        for m in tiny_models()? {
            let gs = ground_state_solve(&m, &SolveConfig::default())?.require_converged()?;
            ok &= gs.energy >= 1e-12
                && matches!(
                    verify_positivity(m.graph(), &gs.u, 1e-12)?,
                    crate::nehari::Positivity::StrictlyPositive { .. }
                );
        }
        Ok((ok, "strictly positive ground states with m > 0".into()))
    }));
    checks.push(guarded("eigen_oracle_p2", || {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x22);
        let mut worst = 0.0_f64;
        for _ in 0..3 {
            let g = random_graph(&mut rng, 80);
            let m = random_model(&mut rng, g, 2.0);
            let dense = dense_lambda_p2(&m)?;
            let est = estimate_lambda_p(&m, &LambdaConfig::default())?;
            worst = worst.max((est.lambda - dense).abs() / dense);
        }
        Ok((worst <= 1e-6, format!("max relative error {worst:.3e}")))
    }));
    VerifyReport { checks }
}

/// Models on at most three vertices used by the grid oracle.
pub fn tiny_models() -> Result<Vec<EnergyModel<f64>>> {
    let mut models = Vec::new();
    let k2 = complete(2, 1.0, 1.0)?;
    models.push(EnergyModel::new(
        Arc::new(k2),
        2.0,
        VertexFunction::constant(2, 1.0)?,
        Nonlinearity::pure_power(4.0)?,
    )?);
    let p3 = path(3, 1.0, 1.0)?;
    models.push(EnergyModel::new(
        Arc::new(p3),
        2.0,
        VertexFunction::constant(3, 1.0)?,
        Nonlinearity::pure_power(4.0)?,
    )?);
    let mut b = GraphBuilder::new(3);
    b.add_edge(0, 1, 2.0)?;
    b.add_edge(1, 2, 0.5)?;
    b.add_edge(0, 2, 1.0)?;
    models.push(EnergyModel::new(
        Arc::new(b.build(vec![1.0, 3.0, 0.5])?),
        3.0,
        VertexFunction::new(vec![1.0, 0.5, 2.0])?,
        Nonlinearity::pure_power(4.5)?,
    )?);
    let mut b = GraphBuilder::new(2);
    b.add_edge(0, 1, 1.0)?;
    models.push(EnergyModel::new(
        Arc::new(b.build(vec![1.0, 10.0])?),
        2.0,
        VertexFunction::constant(2, 1.0)?,
        Nonlinearity::pure_power(3.0)?,
    )?);
    Ok(models)
}

/// Mutation fixture: `Δ_p` with its sign flipped.
pub fn sign_flipped_laplacian(
    g: &WeightedGraph<f64>,
    u: &VertexFunction<f64>,
    p: f64,
) -> Result<VertexFunction<f64>> {
    let lap = p_laplacian(g, u, p)?;
    lap.scaled(-1.0)
}
