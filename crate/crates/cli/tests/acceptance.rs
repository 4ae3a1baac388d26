use std::path::{Path, PathBuf};
use std::process::{Command, ExitCode};
use std::sync::Arc;
use std::time::{Duration, Instant};

use plaplace::graph::generators::{complete, random_connected};
use plaplace::verify::{gradient_consistency, integration_by_parts_residual};
use plaplace::{
    brute_force_ground_state, dense_lambda_p2, dirichlet_ground_state, estimate_lambda_p,
    ground_state_solve, mpa_solve, nehari_project, p_laplacian, theta_sweep, BruteForceGrid,
    EnergyModel, LambdaConfig, MpaConfig, Nonlinearity, SolveConfig, VertexFunction, WellConfig,
};
use plaplace_cli::config::{Prepared, RunConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

struct Energies(Vec<(String, f64)>);

impl Energies {
    fn push(&mut self, name: impl Into<String>, e: f64) {
        self.0.push((name.into(), e));
    }
}

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("configs")
}

fn prepare(path: &Path) -> Result<Prepared, String> {
    let (cfg, base) = RunConfig::load(path).map_err(|e| e.to_string())?;
    cfg.prepare(&base, None).map_err(|e| e.to_string())
}

fn within(elapsed: Duration, limit_secs: u64) -> Result<(), String> {
    if elapsed <= Duration::from_secs(limit_secs) {
        Ok(())
    } else {
        Err(format!(
            "runtime {:.1}s exceeds {limit_secs}s",
            elapsed.as_secs_f64()
        ))
    }
}

fn integration_by_parts() -> Outcome {
    let start = Instant::now();
    let r = integration_by_parts_residual(1, 50, 200, p_laplacian).map_err(|e| e.to_string())?;
    within(start.elapsed(), 10)?;
    let msg = format!("max relative residual {r:.2e}");
    if r <= 1e-10 {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn gradient() -> Outcome {
    let start = Instant::now();
    let r = gradient_consistency(2, 20, p_laplacian).map_err(|e| e.to_string())?;
    within(start.elapsed(), 30)?;
    let msg = format!("max relative error {r:.2e}");
    if r <= 1e-6 {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn closed_form() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst = 0.0_f64;
    for _ in 0..100 {
        let n = rng.gen_range(2..=40);
        let g: plaplace::Graph =
            random_connected(n, rng.gen_range(0..=n), (0.1, 3.0), (0.2, 4.0), &mut rng)
                .map_err(|e| e.to_string())?;
        let p = rng.gen_range(1.3..4.0);
        let q = p + rng.gen_range(0.2..3.0);
        let rho: Vec<f64> = (0..n).map(|_| rng.gen_range(0.1..2.0)).collect();
        let mut u: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..2.0)).collect();
        u[0] = u[0].abs() + 0.1;

        let mut norm = 0.0;
        for x in 0..n {
            let s: f64 = g.neighbors(x).map(|(y, w)| w * (u[y] - u[x]).powi(2)).sum();
            let grad = (s / (2.0 * g.measure(x))).sqrt();
            norm += g.measure(x) * (grad.powf(p) + rho[x] * u[x].abs().powf(p));
        }
        let den: f64 = (0..n).map(|x| g.measure(x) * u[x].max(0.0).powf(q)).sum();
        let expect = (norm / den).powf(1.0 / (q - p));

        let model = EnergyModel::new(
            Arc::new(g),
            p,
            VertexFunction::new(rho).map_err(|e| e.to_string())?,
            Nonlinearity::pure_power(q).map_err(|e| e.to_string())?,
        )
        .map_err(|e| e.to_string())?;
        let pr = nehari_project(
            &model,
            &VertexFunction::new(u).map_err(|e| e.to_string())?,
            1e-15,
        )
        .map_err(|e| e.to_string())?;
        worst = worst.max((pr.t0 - expect).abs() / expect);
    }
    within(start.elapsed(), 5)?;
    let msg = format!("max relative error {worst:.2e} over 100 inputs");
    if worst <= 1e-10 {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn k2_anchor(energies: &mut Energies) -> Outcome {
    let start = Instant::now();
    let g = complete(2, 1.0, 1.0).map_err(|e| e.to_string())?;
    let model = EnergyModel::new(
        Arc::new(g),
        2.0,
        VertexFunction::constant(2, 1.0).map_err(|e| e.to_string())?,
        Nonlinearity::pure_power(4.0).map_err(|e| e.to_string())?,
    )
    .map_err(|e| e.to_string())?;
    let gs = ground_state_solve(&model, &SolveConfig::default()).map_err(|e| e.to_string())?;
    let mp = mpa_solve(&model, &MpaConfig::default()).map_err(|e| e.to_string())?;
    let bf = brute_force_ground_state(
        &model,
        BruteForceGrid {
            max: 2.0,
            step: 1e-3,
            refine_levels: 0,
        },
    )
    .map_err(|e| e.to_string())?;
    within(start.elapsed(), 5)?;
    if gs.converged {
        energies.push("k2 ground state", gs.energy);
    }
    if mp.result.converged {
        energies.push("k2 mountain pass", mp.result.energy);
    }
    let msg = format!(
        "m = {:.12}, c = {:.12}, grid = {:.8}, u = ({:.6}, {:.6})",
        gs.energy, mp.result.energy, bf.m, gs.u[0], gs.u[1]
    );
    let ok = gs.converged
        && mp.result.converged
        && (gs.energy - 0.5).abs() <= 1e-6
        && (mp.result.energy - gs.energy).abs() <= 1e-6
        && (bf.m - gs.energy).abs() <= 1e-4;
    if ok {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn positivity(energies: &mut Energies) -> Outcome {
    let start = Instant::now();
    let mut paths: Vec<PathBuf> = std::fs::read_dir(configs().join("models"))
        .map_err(|e| e.to_string())?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "toml"))
        .collect();
    paths.sort();
    if paths.len() != 10 {
        return Err(format!("expected 10 bundled models, found {}", paths.len()));
    }
    let mut worst = f64::INFINITY;
    for path in &paths {
        let name = path.file_stem().unwrap().to_string_lossy().into_owned();
        let prep = prepare(path)?;
        let r = ground_state_solve(&prep.model, &prep.solve).map_err(|e| format!("{name}: {e}"))?;
        if !r.converged {
            return Err(format!("{name}: not converged"));
        }
        energies.push(name.clone(), r.energy);
        let ratio = r.u.min_value() / r.u.max_value();
        if ratio <= 1e-8 {
            return Err(format!("{name}: min/max = {ratio:.3e}"));
        }
        worst = worst.min(ratio);
    }
    within(start.elapsed(), 120)?;
    Ok(format!("10 models, smallest min/max ratio {worst:.3e}"))
}

fn energies_positive(energies: &Energies) -> Outcome {
    if energies.0.is_empty() {
        return Err("no converged energies collected".into());
    }
    let (name, low) = energies
        .0
        .iter()
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .cloned()
        .unwrap();
    let msg = format!("{} energies, smallest {low:.6e} ({name})", energies.0.len());
    if low >= 1e-12 {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn lambda_oracle() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst = 0.0_f64;
    for n in [12, 40, 90, 150, 200] {
        let g: plaplace::Graph = random_connected(n, n / 2, (0.2, 3.0), (0.3, 3.0), &mut rng)
            .map_err(|e| e.to_string())?;
        let rho: Vec<f64> = (0..n).map(|_| rng.gen_range(0.05..2.0)).collect();
        let model = EnergyModel::new(
            Arc::new(g),
            2.0,
            VertexFunction::new(rho).map_err(|e| e.to_string())?,
            Nonlinearity::pure_power(4.0).map_err(|e| e.to_string())?,
        )
        .map_err(|e| e.to_string())?;
        let dense = dense_lambda_p2(&model).map_err(|e| e.to_string())?;
        let est = estimate_lambda_p(&model, &LambdaConfig::default()).map_err(|e| e.to_string())?;
        if !est.converged {
            return Err(format!("n = {n}: estimate not converged"));
        }
        worst = worst.max((est.lambda - dense).abs() / dense);
    }
    within(start.elapsed(), 30)?;
    let msg = format!("5 graphs up to 200 vertices, max relative error {worst:.2e}");
    if worst <= 1e-6 {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn well_sweep(energies: &mut Energies) -> Outcome {
    let start = Instant::now();
    let prep = prepare(&configs().join("well_5x5.toml"))?;
    let well = prep
        .well
        .as_ref()
        .ok_or("bundled well config has no [well] section")?;
    let sweep = theta_sweep(well, &prep.model, &prep.solve).map_err(|e| e.to_string())?;
    within(start.elapsed(), 300)?;
    if let Some(reason) = &sweep.aborted {
        return Err(format!("sweep aborted: {reason}"));
    }
    let rows = &sweep.rows;
    if rows.len() != 5 {
        return Err(format!("expected 5 rows, got {}", rows.len()));
    }
    for r in rows {
        energies.push(format!("m_theta({})", r.theta), r.m_theta);
    }
    energies.push("m_omega", sweep.limit.energy);
    let m_omega = sweep.limit.energy;
    let mut problems = Vec::new();
    for w in rows.windows(2) {
        if w[1].m_theta < w[0].m_theta - 1e-10 {
            problems.push(format!("m decreases at theta = {}", w[1].theta));
        }
        if w[1].w1p_gap >= w[0].w1p_gap {
            problems.push(format!("w1p_gap not decreasing at theta = {}", w[1].theta));
        }
    }
    for r in rows {
        if r.m_theta > m_omega + 1e-8 {
            problems.push(format!("m_theta({}) exceeds m_omega", r.theta));
        }
    }
    let (first, last) = (&rows[0], &rows[rows.len() - 1]);
    if last.tail_mass > 0.1 * first.tail_mass {
        problems.push("tail mass did not drop tenfold".into());
    }
    let msg = format!(
        "m_1 = {:.6}, m_1e4 = {:.6}, m_omega = {:.6}, tail {:.2e} -> {:.2e}, gap {:.2e} -> {:.2e}",
        first.m_theta,
        last.m_theta,
        m_omega,
        first.tail_mass,
        last.tail_mass,
        first.w1p_gap,
        last.w1p_gap
    );
    if problems.is_empty() {
        Ok(msg)
    } else {
        Err(format!("{msg}; {}", problems.join("; ")))
    }
}

fn dirichlet_anchor(energies: &mut Energies) -> Outcome {
    let start = Instant::now();
    let g = complete(2, 1.0, 1.0).map_err(|e| e.to_string())?;
    let base = EnergyModel::new(
        Arc::new(g.clone()),
        2.0,
        VertexFunction::constant(2, 1.0).map_err(|e| e.to_string())?,
        Nonlinearity::pure_power(4.0).map_err(|e| e.to_string())?,
    )
    .map_err(|e| e.to_string())?;
    let well = WellConfig::from_omega(&g, &[0], VertexFunction::zeros(2), vec![1.0])
        .map_err(|e| e.to_string())?;
    let r =
        dirichlet_ground_state(&well, &base, &SolveConfig::default()).map_err(|e| e.to_string())?;
    within(start.elapsed(), 1)?;
    if r.converged {
        energies.push("dirichlet k2", r.energy);
    }
    let msg = format!(
        "m_omega = {:.12}, u = ({:.6}, {:.6})",
        r.energy, r.u[0], r.u[1]
    );
    if r.converged && (r.energy - 0.25).abs() <= 1e-8 && r.u[1] == 0.0 {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn determinism() -> Outcome {
    let cfg = configs().join("well_5x5.toml");
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut tables = Vec::new();
    for workers in ["1", "8"] {
        let out = dir.path().join(format!("w{workers}"));
        let status = Command::new(env!("CARGO_BIN_EXE_plaplace"))
            .args(["well-sweep", "--config"])
            .arg(&cfg)
            .arg("--out")
            .arg(&out)
            .args(["--workers", workers, "--quiet"])
            .status()
            .map_err(|e| e.to_string())?;
        if !status.success() {
            return Err(format!("--workers {workers} exited with {status}"));
        }
        tables.push(std::fs::read(out.join("sweep.csv")).map_err(|e| e.to_string())?);
    }
    if tables[0] == tables[1] {
        Ok(format!("sweep.csv identical ({} bytes)", tables[0].len()))
    } else {
        Err("sweep.csv differs between --workers 1 and --workers 8".into())
    }
}

fn main() -> ExitCode {
    let mut energies = Energies(Vec::new());
    let mut results: Vec<(&str, Outcome)> = vec![
        ("1 integration by parts", integration_by_parts()),
        ("2 gradient consistency", gradient()),
        ("3 projection closed form", closed_form()),
        ("4 two-vertex anchor", k2_anchor(&mut energies)),
        ("5 positivity", positivity(&mut energies)),
    ];
    let lambda = lambda_oracle();
    let sweep = well_sweep(&mut energies);
    let dirichlet = dirichlet_anchor(&mut energies);
    results.push(("6 positive energies", energies_positive(&energies)));
    results.push(("7 lambda oracle", lambda));
    results.push(("8 well sweep", sweep));
    results.push(("9 dirichlet anchor", dirichlet));
    results.push(("10 determinism", determinism()));

    let mut failed = 0;
    for (name, outcome) in &results {
        match outcome {
            Ok(detail) => println!("PASS  {name:<26} {detail}"),
            Err(detail) => {
                failed += 1;
                println!("FAIL  {name:<26} {detail}");
            }
        }
    }
    println!(
        "{} of {} criteria passed",
        results.len() - failed,
        results.len()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
