use std::sync::Arc;

use plaplace::graph::generators::grid;
use plaplace::{theta_sweep, Function, Model, Nonlinearity, SolveConfig, Well};

fn grid_well() -> (Well, Model) {
    let g = grid::<f64>(5, 5, 1.0, 1.0).unwrap();
    let centre: Vec<usize> = (1..4)
        .flat_map(|i| (1..4).map(move |j| i * 5 + j))
        .collect();
    let well = Well::from_omega(
        &g,
        &centre,
        Function::constant(25, 1.0).unwrap(),
        vec![1.0, 10.0, 100.0, 1000.0, 10000.0],
    )
    .unwrap();
    let base = Model::new(
        Arc::new(g),
        2.0,
        Function::constant(25, 1.0).unwrap(),
        Nonlinearity::pure_power(4.0).unwrap(),
    )
    .unwrap();
    (well, base)
}

#[test]
fn grid_well_sweep_converges_to_the_limit() {
    let (well, base) = grid_well();
    let sweep = theta_sweep(&well, &base, &SolveConfig::default()).unwrap();
    let rows = &sweep.rows;
    assert!(sweep.caveats.is_empty() && sweep.aborted.is_none());
    assert!(rows
        .windows(2)
        .all(|w| w[1].m_theta >= w[0].m_theta - 1e-10));
    assert!(rows.iter().all(|r| r.m_theta <= sweep.limit.energy + 1e-8));
    assert!(rows[4].tail_mass <= 0.1 * rows[0].tail_mass);
    assert!(rows
        .windows(2)
        .all(|w| w[1].tail_mass <= w[0].tail_mass * 1.05));
    assert!(rows.windows(2).all(|w| w[1].w1p_gap < w[0].w1p_gap));
    assert!(rows[2].off_omega_mass < rows[0].off_omega_mass);
    let lim = &sweep.limit.u;
    for x in 0..25 {
        if well.omega().contains(x) {
            assert!(lim[x] > 0.0);
        } else {
            assert_eq!(lim[x], 0.0);
        }
    }
}

#[test]
fn capped_sweep_keeps_partial_table() {
    let (well, base) = grid_well();
    // enough for the limit solve, not for theta = 1
    let capped = SolveConfig {
        max_iterations: 18,
        ..SolveConfig::default()
    };
    let sweep = theta_sweep(&well, &base, &capped).unwrap();
    assert!(sweep.limit.converged);
    assert!(sweep.aborted.as_deref().unwrap().starts_with("theta = 1:"));
    assert!(sweep.rows.is_empty());
}
