use std::sync::Arc;

use plaplace::graph::generators::random_connected;
use plaplace::{
    gamma, integration_by_parts_with, nehari_project, p_laplacian, EnergyModel, Nonlinearity,
    VertexFunction,
};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn model(seed: u64, n: usize, p: f64, q: f64) -> EnergyModel<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g = random_connected(n, n, (0.1, 3.0), (0.2, 3.0), &mut rng).unwrap();
    let rho = VertexFunction::constant(n, 0.7).unwrap();
    EnergyModel::new(Arc::new(g), p, rho, Nonlinearity::pure_power(q).unwrap()).unwrap()
}

fn function(values: &[f64], n: usize) -> VertexFunction<f64> {
    let mut v: Vec<f64> = values.iter().copied().cycle().take(n).collect();
    v[0] = v[0].abs() + 0.05;
    VertexFunction::new(v).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn gamma_increases(
        seed in 0u64..1000,
        n in 2usize..12,
        p in 1.3f64..4.0,
        dq in 0.2f64..3.0,
        values in prop::collection::vec(-1.0f64..2.0, 12),
        t in 0.01f64..20.0,
        ratio in 1.001f64..3.0,
    ) {
        let m = model(seed, n, p, p + dq);
        let u = function(&values, n);
        prop_assert!(gamma(&m, &u, t * ratio).unwrap() > gamma(&m, &u, t).unwrap());
    }

    #[test]
    fn projection_scales_inversely(
        seed in 0u64..1000,
        n in 2usize..12,
        p in 1.3f64..4.0,
        dq in 0.2f64..3.0,
        values in prop::collection::vec(-1.0f64..2.0, 12),
        c in 0.1f64..10.0,
    ) {
        let m = model(seed, n, p, p + dq);
        let u = function(&values, n);
        let t = nehari_project(&m, &u, 1e-15).unwrap().t0;
        let tc = nehari_project(&m, &u.scaled(c).unwrap(), 1e-15).unwrap().t0;
        prop_assert!((tc * c - t).abs() <= 1e-9 * t);
    }

    #[test]
    fn projection_is_fiber_maximum(
        seed in 0u64..1000,
        n in 2usize..12,
        p in 1.3f64..4.0,
        dq in 0.2f64..3.0,
        values in prop::collection::vec(-1.0f64..2.0, 12),
        s in 0.05f64..5.0,
    ) {
        let m = model(seed, n, p, p + dq);
        let u = function(&values, n);
        let pr = nehari_project(&m, &u, 1e-15).unwrap();
        prop_assert!(pr.fiber_energy > 0.0);
        let other = m.energy(&u.scaled(s * pr.t0).unwrap()).unwrap();
        prop_assert!(other <= pr.fiber_energy + 1e-10 * pr.fiber_energy.abs().max(1.0));
    }

    #[test]
    fn integration_by_parts_holds(
        seed in 0u64..1000,
        n in 2usize..30,
        p in 1.5f64..4.0,
        a in prop::collection::vec(-2.0f64..2.0, 30),
        b in prop::collection::vec(-2.0f64..2.0, 30),
    ) {
        let m = model(seed, n, p, p + 1.0);
        let u = VertexFunction::new(a[..n].to_vec()).unwrap();
        let v = VertexFunction::new(b[..n].to_vec()).unwrap();
        let r = integration_by_parts_with(m.graph(), &u, &v, p, p_laplacian).unwrap();
        prop_assert!(r.relative_residual() <= 1e-10);
    }
}
