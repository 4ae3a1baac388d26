//! Potential wells `ρ = θa + b` and the Dirichlet limit on `Ω = {a = 0}`.

use crate::calculus::{omega_norm, w1p_norm};
use crate::energy::EnergyModel;
use crate::error::{Error, Result};
use crate::function::VertexFunction;
use crate::graph::{boundary, set_distances, DomainSubset, WeightedGraph};
use crate::par::sum_indices;
use crate::scalar::Scalar;
use crate::solver::{ground_state_solve_with, SolveConfig, SolveResult};

#[derive(Debug, Clone, PartialEq)]
pub struct WellConfig<T> {
    a: VertexFunction<T>,
    b: VertexFunction<T>,
    schedule: Vec<T>,
    omega: DomainSubset,
}

impl<T: Scalar> WellConfig<T> {
    /// Validates `a ≥ 0` with `Ω = {a = 0}` nonempty and connected, `a ≥ 1`
    /// off `Ω`, `b ≥ 0`, and a strictly increasing schedule starting at `θ₁ ≥ 1`.
    pub fn new(
        g: &WeightedGraph<T>,
        a: VertexFunction<T>,
        b: VertexFunction<T>,
        schedule: Vec<T>,
    ) -> Result<Self> {
        let n = g.n_vertices();
        a.check_len(n)?;
        b.check_len(n)?;
        if let Some(x) = (0..n).find(|&x| a[x] < T::zero() || (a[x] > T::zero() && a[x] < T::one()))
        {
            return Err(Error::InvalidWell(format!(
                "a must vanish or be at least 1 (vertex {x} has {})",
                a[x]
            )));
        }
        if let Some(x) = (0..n).find(|&x| b[x] < T::zero()) {
            return Err(Error::NegativePotential(x));
        }
        let members: Vec<usize> = (0..n).filter(|&x| a[x] == T::zero()).collect();
        if members.is_empty() {
            return Err(Error::InvalidWell(
                "a has no zeros, so the well is empty".into(),
            ));
        }
        let omega = boundary(g, &members)?;
        if !omega.is_connected(g) {
            return Err(Error::InvalidWell("the well is not connected".into()));
        }
        check_schedule(&schedule)?;
        Ok(WellConfig {
            a,
            b,
            schedule,
            omega,
        })
    }

    /// Well with `Ω` given explicitly and `a` set to the hop distance to `Ω`.
    pub fn from_omega(
        g: &WeightedGraph<T>,
        omega: &[usize],
        b: VertexFunction<T>,
        schedule: Vec<T>,
    ) -> Result<Self> {
        if omega.is_empty() {
            return Err(Error::EmptyVertexSet);
        }
        let dist = set_distances(g, omega)?;
        let a = VertexFunction::new(dist.iter().map(|d| T::from_count(d.unwrap_or(0))).collect())?;
        Self::new(g, a, b, schedule)
    }

    pub fn a(&self) -> &VertexFunction<T> {
        &self.a
    }

    pub fn b(&self) -> &VertexFunction<T> {
        &self.b
    }

    pub fn schedule(&self) -> &[T] {
        &self.schedule
    }

    pub fn omega(&self) -> &DomainSubset {
        &self.omega
    }

    /// `θa + b`.
    pub fn potential(&self, theta: T) -> Result<VertexFunction<T>> {
        VertexFunction::from_fn(self.a.len(), |x| theta * self.a[x] + self.b[x])
    }
}

fn check_schedule<T: Scalar>(schedule: &[T]) -> Result<()> {
    let first = *schedule
        .first()
        .ok_or_else(|| Error::InvalidWell("theta schedule is empty".into()))?;
    if !(first >= T::one()) {
        return Err(Error::InvalidWell(format!(
            "theta schedule must start at 1 or above (got {first})"
        )));
    }
    if let Some(w) = schedule.windows(2).find(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidWell(format!(
            "theta schedule must be strictly increasing ({} then {})",
            w[0], w[1]
        )));
    }
    Ok(())
}

pub fn theta_model<T: Scalar>(
    well: &WellConfig<T>,
    base: &EnergyModel<T>,
    theta: T,
) -> Result<EnergyModel<T>> {
    if !(theta > T::zero()) {
        return Err(Error::InvalidWell(format!(
            "theta must be positive (got {theta})"
        )));
    }
    base.with_potential(well.potential(theta)?)
}

/// Ground state of the `θ` problem; `warm` seeds are tried before the
/// standard seeds.
pub fn theta_ground_state<T: Scalar>(
    well: &WellConfig<T>,
    base: &EnergyModel<T>,
    theta: T,
    cfg: &SolveConfig<T>,
    warm: &[VertexFunction<T>],
) -> Result<SolveResult<T>> {
    let model = theta_model(well, base, theta)?;
    ground_state_solve_with(&model, cfg, warm, None)
}

/// Model whose energy coincides with `J_Ω` on functions supported in `Ω`.
pub fn dirichlet_model<T: Scalar>(
    well: &WellConfig<T>,
    base: &EnergyModel<T>,
) -> Result<EnergyModel<T>> {
    base.with_potential(well.b.clone())
}

/// `J_Ω(u) = (1/p)‖u‖_Ω^p − ∫_Ω Ψ(x, u⁺) dσ`; `u` must vanish off `Ω`.
pub fn dirichlet_energy<T: Scalar>(
    well: &WellConfig<T>,
    base: &EnergyModel<T>,
    u: &VertexFunction<T>,
) -> Result<T> {
    let g = base.graph();
    let p = base.p();
    let norm = omega_norm(g, &well.omega, u, &well.b, p)?;
    let nl = base.nonlinearity();
    let pot = well.omega.members().iter().fold(T::zero(), |acc, &x| {
        acc + g.measure(x) * nl.primitive(x, u[x])
    });
    Ok(norm.powf(p) / p - pot)
}

/// Limit problem: the unknowns live on `Ω`, everything else is pinned to 0.
pub fn dirichlet_ground_state<T: Scalar>(
    well: &WellConfig<T>,
    base: &EnergyModel<T>,
    cfg: &SolveConfig<T>,
) -> Result<SolveResult<T>> {
    let model = dirichlet_model(well, base)?;
    ground_state_solve_with(&model, cfg, &[], Some(well.omega.mask()))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow<T> {
    pub theta: T,
    pub m_theta: T,
    /// `∫ θa|u_θ|^p dσ`.
    pub tail_mass: T,
    /// `‖u_θ − u_0‖_{W^{1,p}}`.
    pub w1p_gap: T,
    /// `∫_{V∖Ω} |u_θ|^p dσ`.
    pub off_omega_mass: T,
    pub residual: T,
    pub iterations: usize,
}

impl<T> SweepRow<T> {
    pub const COLUMNS: [&'static str; 7] = [
        "theta",
        "m_theta",
        "tail_mass",
        "w1p_gap",
        "off_omega_mass",
        "residual",
        "iterations",
    ];
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sweep<T> {
    pub rows: Vec<SweepRow<T>>,
    pub solutions: Vec<SolveResult<T>>,
    pub limit: SolveResult<T>,
    /// Diagnostics, e.g. a non-monotone energy column hinting at a branch switch.
    pub caveats: Vec<String>,
    /// Set when a `θ` solve failed; `rows` then holds the partial table.
    pub aborted: Option<String>,
}

pub const MONOTONE_SLACK: f64 = 1e-10;

/// Warm-started sweep over the schedule. Each `θ` solve is seeded with the
/// previous solution and with the Dirichlet limit `u_0`, whose projection
/// already achieves `J_θ = J_Ω ≤ m_Ω`.
pub fn theta_sweep<T: Scalar>(
    well: &WellConfig<T>,
    base: &EnergyModel<T>,
    cfg: &SolveConfig<T>,
) -> Result<Sweep<T>> {
    let g = base.graph();
    let p = base.p();
    let limit = dirichlet_ground_state(well, base, cfg)?.require_converged()?;
    let mut rows = Vec::new();
    let mut solutions: Vec<SolveResult<T>> = Vec::new();
    let mut aborted = None;
    for &theta in &well.schedule {
        let mut warm = Vec::new();
        if let Some(prev) = solutions.last() {
            warm.push(prev.u.clone());
        }
        warm.push(limit.u.clone());
        let r = match theta_ground_state(well, base, theta, cfg, &warm)
            .and_then(SolveResult::require_converged)
        {
            Ok(r) => r,
            Err(e) => {
                aborted = Some(format!("theta = {theta}: {e}"));
                break;
            }
        };
        let u = &r.u;
        let tail_mass = sum_indices(u.len(), |x| {
            g.measure(x) * theta * well.a[x] * u[x].abs().powf(p)
        });
        let off_omega_mass = sum_indices(u.len(), |x| {
            if well.omega.contains(x) {
                T::zero()
            } else {
                g.measure(x) * u[x].abs().powf(p)
            }
        });
        let diff = u.axpy(-T::one(), &limit.u)?;
        rows.push(SweepRow {
            theta,
            m_theta: r.energy,
            tail_mass,
            w1p_gap: w1p_norm(g, &diff, p)?,
            off_omega_mass,
            residual: r.equation_residual,
            iterations: r.iterations,
        });
        solutions.push(r);
    }
    let mut caveats = Vec::new();
    let slack = T::lit(MONOTONE_SLACK);
    if let Some(i) = (1..rows.len()).find(|&i| rows[i].m_theta < rows[i - 1].m_theta - slack) {
        caveats.push(format!(
            "m_theta decreases between theta = {} and {}; the branch may have switched",
            rows[i - 1].theta,
            rows[i].theta
        ));
    }
    Ok(Sweep {
        rows,
        solutions,
        limit,
        caveats,
        aborted,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::generators::{complete, grid};
    use crate::nonlinearity::Nonlinearity;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::sync::Arc;

    fn base(g: WeightedGraph<f64>, p: f64, q: f64) -> EnergyModel<f64> {
        let n = g.n_vertices();
        EnergyModel::new(
            Arc::new(g),
            p,
            VertexFunction::constant(n, 1.0).unwrap(),
            Nonlinearity::pure_power(q).unwrap(),
        )
        .unwrap()
    }

    fn vf(v: &[f64]) -> VertexFunction<f64> {
        VertexFunction::new(v.to_vec()).unwrap()
    }

    #[test]
    fn validation() {
        let g = complete::<f64>(3, 1.0, 1.0).unwrap();
        let b = VertexFunction::constant(3, 1.0).unwrap();
        assert!(WellConfig::new(&g, vf(&[0.0, 1.0, 2.0]), b.clone(), vec![1.0, 10.0]).is_ok());
        assert!(WellConfig::new(&g, vf(&[0.0, 0.5, 2.0]), b.clone(), vec![1.0]).is_err());
        assert!(WellConfig::new(&g, vf(&[1.0, 1.0, 2.0]), b.clone(), vec![1.0]).is_err());
        assert!(WellConfig::new(&g, vf(&[0.0, 1.0, 2.0]), b.clone(), vec![10.0, 1.0]).is_err());
        assert!(WellConfig::new(&g, vf(&[0.0, 1.0, 2.0]), b.clone(), vec![0.5, 1.0]).is_err());
        assert!(WellConfig::new(&g, vf(&[0.0, 1.0, 2.0]), b, vec![]).is_err());
        let path = crate::graph::generators::path::<f64>(3, 1.0, 1.0).unwrap();
        let b = VertexFunction::constant(3, 1.0).unwrap();
        assert!(matches!(
            WellConfig::new(&path, vf(&[0.0, 1.0, 0.0]), b, vec![1.0]),
            Err(Error::InvalidWell(_))
        ));
    }

    #[test]
    fn omega_override_uses_hop_distance() {
        let g = grid::<f64>(5, 5, 1.0, 1.0).unwrap();
        let centre: Vec<usize> = (1..4)
            .flat_map(|i| (1..4).map(move |j| i * 5 + j))
            .collect();
        let w = WellConfig::from_omega(
            &g,
            &centre,
            VertexFunction::constant(25, 1.0).unwrap(),
            vec![1.0],
        )
        .unwrap();
        assert_eq!(w.omega().members(), centre.as_slice());
        assert_eq!(w.a()[0], 2.0);
        assert_eq!(w.a()[1], 1.0);
        assert_eq!(w.a()[12], 0.0);
        assert_eq!(w.omega().boundary().len(), 12);
    }

    #[test]
    fn theta_potential_composition() {
        let g = complete::<f64>(2, 1.0, 1.0).unwrap();
        let w = WellConfig::new(
            &g,
            vf(&[0.0, 1.0]),
            VertexFunction::constant(2, 1.0).unwrap(),
            vec![1.0],
        )
        .unwrap();
        let m = theta_model(&w, &base(g, 2.0, 4.0), 1.0).unwrap();
        assert_eq!(m.potential().as_slice(), &[1.0, 2.0]);
    }

    #[test]
    fn dirichlet_k2_anchor() {
        let g = complete::<f64>(2, 1.0, 1.0).unwrap();
        let w = WellConfig::new(&g, vf(&[0.0, 1.0]), VertexFunction::zeros(2), vec![1.0]).unwrap();
        let b = base(g, 2.0, 4.0);
        let r = dirichlet_ground_state(&w, &b, &SolveConfig::default()).unwrap();
        assert!(r.converged);
        assert_relative_eq!(r.energy, 0.25, epsilon = 1e-12);
        assert_relative_eq!(r.u[0], 1.0, epsilon = 1e-8);
        assert_eq!(r.u[1], 0.0);
        assert_relative_eq!(
            dirichlet_energy(&w, &b, &r.u).unwrap(),
            0.25,
            epsilon = 1e-12
        );
    }

    #[test]
    fn whole_graph_well_is_plain_solve() {
        let g = complete::<f64>(3, 1.0, 1.0).unwrap();
        let w = WellConfig::new(
            &g,
            VertexFunction::zeros(3),
            VertexFunction::constant(3, 1.0).unwrap(),
            vec![1.0],
        )
        .unwrap();
        let b = base(g, 2.0, 4.0);
        let lim = dirichlet_ground_state(&w, &b, &SolveConfig::default()).unwrap();
        let plain = crate::solver::ground_state_solve(&b, &SolveConfig::default()).unwrap();
        assert_relative_eq!(lim.energy, plain.energy, epsilon = 1e-12);
    }

    #[test]
    fn theta_energy_matches_dirichlet_energy_on_well_functions() {
        let g = grid::<f64>(4, 4, 1.0, 1.0).unwrap();
        let w = WellConfig::from_omega(
            &g,
            &[5, 6, 9, 10],
            VertexFunction::constant(16, 0.5).unwrap(),
            vec![1.0],
        )
        .unwrap();
        let b = base(g, 3.0, 4.5);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let u = VertexFunction::from_fn(16, |x| {
                if w.omega().contains(x) {
                    rng.gen_range(-1.0..2.0)
                } else {
                    0.0
                }
            })
            .unwrap();
            let jo = dirichlet_energy(&w, &b, &u).unwrap();
            for theta in [1.0, 37.0, 1e4] {
                let jt = theta_model(&w, &b, theta).unwrap().energy(&u).unwrap();
                assert!((jt - jo).abs() <= 1e-12 * (1.0 + jo.abs()));
            }
        }
    }

    #[test]
    fn k2_sweep_is_monotone_and_bounded() {
        let g = complete::<f64>(2, 1.0, 1.0).unwrap();
        let w = WellConfig::new(
            &g,
            vf(&[0.0, 1.0]),
            VertexFunction::constant(2, 1.0).unwrap(),
            vec![1.0, 10.0, 100.0, 1000.0],
        )
        .unwrap();
        let b = base(g, 2.0, 4.0);
        let s = theta_sweep(&w, &b, &SolveConfig::default()).unwrap();
        assert!(s.caveats.is_empty() && s.aborted.is_none());
        for r in &s.rows {
            assert!(r.m_theta <= s.limit.energy + 1e-8);
        }
        assert!(s
            .rows
            .windows(2)
            .all(|w| w[1].m_theta >= w[0].m_theta - 1e-10));
        assert!(s.rows.windows(2).all(|w| w[1].w1p_gap < w[0].w1p_gap));
    }
}
