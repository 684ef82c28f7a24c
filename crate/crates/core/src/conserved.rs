//! Hamiltonians, mass, momentum, and finite-difference gradient checks.

use rand::Rng;

use crate::models::{
    apply_dit, apply_i, rhs_fdgn1, rhs_wb, solve_i, Dispersion, Model, ModelError, ModelKind, Ops,
    WaveStatePsi, WaveStateV,
};
use crate::multipliers::SymbolKind;
use crate::spectral::{Grid1D, RealField};
use crate::strip::{dtn_from_potential, StripError, StripSolver, SurfaceData};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Diagnostics {
    pub time: f64,
    pub mass: f64,
    /// `∫ζ∂xψ`; only defined for ψ-form models.
    pub momentum: Option<f64>,
    pub energy: f64,
}

impl Diagnostics {
    pub fn is_finite(&self) -> bool {
        self.time.is_finite()
            && self.mass.is_finite()
            && self.energy.is_finite()
            && self.momentum.is_none_or(f64::is_finite)
    }
}

pub fn mass(zeta: &RealField) -> f64 {
    zeta.integrate()
}

pub fn momentum(s: &WaveStatePsi) -> f64 {
    s.zeta.dot(&s.psi.derivative(1))
}

/// `½∫ζ² + (1/(2μ))∫ψ𝒢^μψ`.
pub fn hamiltonian_ww(
    data: &SurfaceData,
    solver: &StripSolver,
    tol: f64,
    max_iter: usize,
) -> Result<f64, StripError> {
    let (phi, _) = solver.solve(data, tol, max_iter)?;
    let g = dtn_from_potential(&phi, data);
    let mu = data.params().mu();
    Ok(0.5 * data.zeta().dot(data.zeta()) + data.psi().dot(&g) / (2.0 * mu))
}

/// `½∫ζ² + ½∫h ψx² + (μ/6)∫∂x(h³F2[ψxx]) ψx`.
pub fn hamiltonian_app1(ops: &Ops, s: &WaveStatePsi, d: Dispersion) -> f64 {
    let mu = ops.params().mu();
    let h = ops.depth(&s.zeta);
    let psi_x = s.psi.derivative(1);
    let psi_xx = s.psi.derivative(2);
    let f2 = match d {
        Dispersion::Full => psi_xx.apply_table(&SymbolKind::F2.table(ops.grid(), ops.params())),
        Dispersion::Classical => psi_xx,
    };
    let h3 = h.map(|v| v * v * v);
    0.5 * s.zeta.dot(&s.zeta)
        + 0.5 * (&h * &psi_x).dot(&psi_x)
        + mu / 6.0 * (&h3 * &f2).derivative(1).dot(&psi_x)
}

/// `½∫ζ² + ½∫h I[h]⁻¹[h∂xψ] ∂xψ`.
pub fn hamiltonian_app2(ops: &Ops, s: &WaveStatePsi, d: Dispersion) -> Result<f64, ModelError> {
    let h = ops.depth(&s.zeta);
    let psi_x = s.psi.derivative(1);
    let v = solve_i(ops, &h, &psi_x, d)?;
    Ok(0.5 * s.zeta.dot(&s.zeta) + 0.5 * (&h * &v).dot(&psi_x))
}

/// `½∫ζ² + ⟨h∂xψ, V⟩ - ½⟨V, I[h]V⟩`, stationary in `V` at `V = I[h]⁻¹[h∂xψ]`
/// where it equals [`hamiltonian_app2`].
fn app2_functional(ops: &Ops, s: &WaveStatePsi, v: &RealField, d: Dispersion) -> f64 {
    let h = ops.depth(&s.zeta);
    let g = &h * &s.psi.derivative(1);
    0.5 * s.zeta.dot(&s.zeta) + g.dot(v) - 0.5 * v.dot(&apply_i(ops, &h, v, d))
}

/// `½∫ζ² + ½∫ψx F1ψx + (ε/2)∫ζ(F1ψx)²`.
pub fn hamiltonian_wb(ops: &Ops, s: &WaveStatePsi, d: Dispersion) -> f64 {
    let eps = ops.params().eps();
    let psi_x = s.psi.derivative(1);
    let f1 = match d {
        Dispersion::Full => psi_x.apply_table(&SymbolKind::F1.table(ops.grid(), ops.params())),
        Dispersion::Classical => psi_x.clone(),
    };
    0.5 * s.zeta.dot(&s.zeta) + 0.5 * psi_x.dot(&f1) + 0.5 * eps * s.zeta.dot(&(&f1 * &f1))
}

/// `½∫ζ² + ½∫h V̄ W` for the V-form systems.
pub fn energy_v(model: &Model, s: &WaveStateV) -> Result<f64, ModelError> {
    let v = model.recover_v(s)?;
    let h = model.ops().depth(&s.zeta);
    Ok(0.5 * s.zeta.dot(&s.zeta) + 0.5 * (&h * &v).dot(&s.w))
}

/// `(δH/δζ, δH/δψ)` of [`hamiltonian_app1`].
pub fn grad_app1(ops: &Ops, s: &WaveStatePsi, d: Dispersion) -> (RealField, RealField) {
    let r = rhs_fdgn1(ops, s, d);
    (r.psi.scale(-1.0), r.zeta)
}

/// `(δH/δζ, δH/δψ)` of [`hamiltonian_app2`].
pub fn grad_app2(
    ops: &Ops,
    s: &WaveStatePsi,
    d: Dispersion,
) -> Result<(RealField, RealField), ModelError> {
    let (mu, eps) = (ops.params().mu(), ops.params().eps());
    let h = ops.depth(&s.zeta);
    let psi_x = s.psi.derivative(1);
    let v = solve_i(ops, &h, &psi_x, d)?;
    let vx = v.derivative(1);
    let f3_vx = match d {
        Dispersion::Full => vx.apply_table(&SymbolKind::F3.table(ops.grid(), ops.params())),
        Dispersion::Classical => vx.clone(),
    };
    let d_zeta = s
        .zeta
        .axpy(eps, &(&psi_x * &v))
        .axpy(-eps / 2.0, &(&v * &v))
        .axpy(-mu * eps / 2.0, &(&(&h * &h) * &(&vx * &f3_vx)));
    let d_psi = (&h * &v).derivative(1).scale(-1.0);
    Ok((d_zeta, d_psi))
}

/// `(δH/δζ, δH/δψ)` of [`hamiltonian_wb`].
pub fn grad_wb(ops: &Ops, s: &WaveStatePsi, d: Dispersion) -> (RealField, RealField) {
    let r = rhs_wb(ops, s, d);
    (r.psi.scale(-1.0), r.zeta)
}

/// Energy of a ψ-form state under the Hamiltonian matching `model`.
pub fn energy_psi(model: &Model, s: &WaveStatePsi) -> Result<f64, ModelError> {
    let ops = model.ops();
    let d = model.kind().dispersion();
    match model.kind() {
        ModelKind::Fdgn1 | ModelKind::Gn1Classical => Ok(hamiltonian_app1(ops, s, d)),
        ModelKind::Wb | ModelKind::WbClassical => Ok(hamiltonian_wb(ops, s, d)),
        ModelKind::WwRef => {
            let solver = model.strip_solver().expect("strip solver for WW-ref");
            let st = model.strip_settings().unwrap_or_default();
            let data = SurfaceData::new(s.zeta.clone(), s.psi.clone(), *ops.params())?;
            Ok(hamiltonian_ww(&data, solver, st.tol, st.max_iter)?)
        }
        kind => Err(ModelError::WrongForm {
            kind,
            form: crate::models::StateForm::Psi,
        }),
    }
}

pub fn diagnostics_psi(model: &Model, s: &WaveStatePsi, time: f64) -> Result<Diagnostics, ModelError> {
    Ok(Diagnostics {
        time,
        mass: mass(&s.zeta),
        momentum: Some(momentum(s)),
        energy: energy_psi(model, s)?,
    })
}

pub fn diagnostics_v(model: &Model, s: &WaveStateV, time: f64) -> Result<Diagnostics, ModelError> {
    Ok(Diagnostics {
        time,
        mass: mass(&s.zeta),
        momentum: None,
        energy: energy_v(model, s)?,
    })
}

/// Direction in state space for gradient checks.
#[derive(Debug, Clone)]
pub struct Direction {
    pub zeta: RealField,
    pub psi: RealField,
}

/// Random smooth field with modes `1 ≤ |k| ≤ kmax` and amplitudes decaying like `1/(1+k²)`.
pub fn random_smooth(grid: Grid1D, kmax: usize, rng: &mut impl Rng) -> RealField {
    let coeffs: Vec<(f64, f64, f64)> = (1..=kmax)
        .map(|k| {
            let w = 1.0 / (1.0 + (k * k) as f64);
            (k as f64, w * rng.gen_range(-1.0..1.0), w * rng.gen_range(-1.0..1.0))
        })
        .collect();
    let xi0 = 2.0 * std::f64::consts::PI / grid.length();
    RealField::from_fn(grid, |x| {
        coeffs
            .iter()
            .map(|&(k, a, b)| a * (k * xi0 * x).cos() + b * (k * xi0 * x).sin())
            .sum()
    })
}

/// Directions perturbing `ζ` only and `ψ` only, `count` of each, band-limited to `|k| ≤ n/4`.
pub fn random_directions(grid: Grid1D, count: usize, rng: &mut impl Rng) -> Vec<Direction> {
    let kmax = grid.n() / 4;
    let mut out = Vec::with_capacity(2 * count);
    for _ in 0..count {
        out.push(Direction {
            zeta: random_smooth(grid, kmax, rng),
            psi: RealField::zeros(grid),
        });
        out.push(Direction {
            zeta: RealField::zeros(grid),
            psi: random_smooth(grid, kmax, rng),
        });
    }
    out
}

/// Worst relative error between `⟨δH, v⟩` and the centered difference
/// `(H(u + h v) - H(u - h v)) / 2h` over `directions`.
pub fn variational_check<E>(
    functional: impl Fn(&WaveStatePsi) -> Result<f64, E>,
    gradient: &(RealField, RealField),
    state: &WaveStatePsi,
    directions: &[Direction],
    h_fd: f64,
) -> Result<f64, E> {
    let mut worst: f64 = 0.0;
    for d in directions {
        let moved = |s: f64| WaveStatePsi {
            zeta: state.zeta.axpy(s * h_fd, &d.zeta),
            psi: state.psi.axpy(s * h_fd, &d.psi),
        };
        let fd = (functional(&moved(1.0))? - functional(&moved(-1.0))?) / (2.0 * h_fd);
        let exact = gradient.0.dot(&d.zeta) + gradient.1.dot(&d.psi);
        let scale = exact.abs().max(fd.abs()).max(f64::MIN_POSITIVE);
        worst = worst.max((fd - exact).abs() / scale);
    }
    Ok(worst)
}

/// Checks the gradient of the `H_app2` functional at a state using its stationary form.
pub fn app2_stationary_value(ops: &Ops, s: &WaveStatePsi, d: Dispersion) -> Result<f64, ModelError> {
    let h = ops.depth(&s.zeta);
    let v = solve_i(ops, &h, &s.psi.derivative(1), d)?;
    Ok(app2_functional(ops, s, &v, d))
}

/// `⟨V, (apply_dit V)⟩ / ‖V‖²`.
pub fn dit_rayleigh_quotient(ops: &Ops, h: &RealField, v: &RealField) -> f64 {
    v.dot(&apply_dit(ops, h, v)) / v.dot(v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::StripSettings;
    use crate::multipliers::{eval_f1, Params};
    use crate::strip::StripGrid;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn setup(mu: f64, eps: f64) -> (Ops, WaveStatePsi) {
        let g = Grid1D::periodic(64).unwrap();
        let ops = Ops::new(g, Params::new(mu, eps, 0.1).unwrap()).with_dealias(false);
        let s = WaveStatePsi {
            zeta: RealField::from_fn(g, |x| 0.5 * x.cos() + 0.1 * (2.0 * x).sin()),
            psi: RealField::from_fn(g, |x| x.sin() + 0.2 * (3.0 * x).cos()),
        };
        (ops, s)
    }

    #[test]
    fn rest_state_has_zero_energy() {
        let (ops, s) = setup(0.3, 0.2);
        let g = *ops.grid();
        let z = WaveStatePsi {
            zeta: RealField::zeros(g),
            psi: RealField::zeros(g),
        };
        assert_eq!(hamiltonian_app1(&ops, &z, Dispersion::Full), 0.0);
        assert_eq!(hamiltonian_app2(&ops, &z, Dispersion::Full).unwrap(), 0.0);
        assert_eq!(hamiltonian_wb(&ops, &z, Dispersion::Full), 0.0);
        assert!(hamiltonian_app1(&ops, &s, Dispersion::Full) > 0.0);
    }

    #[test]
    fn flat_energies_match_closed_form() {
        let g = Grid1D::periodic(32).unwrap();
        let p = Params::new(0.7, 0.0, 0.1).unwrap();
        let ops = Ops::new(g, p);
        let (a, b, xi) = (0.3, 0.8, 2.0);
        let s = WaveStatePsi {
            zeta: RealField::from_fn(g, |x| a * (xi * x).cos()),
            psi: RealField::from_fn(g, |x| b * (xi * x).sin()),
        };
        let l = g.length();
        let exact = 0.5 * l * a * a / 2.0 + 0.5 * l * b * b / 2.0 * xi * xi * eval_f1(xi, &p);
        let solver = StripSolver::new(StripGrid::new(g, 24).unwrap(), p.mu());
        let data = SurfaceData::new(s.zeta.clone(), s.psi.clone(), p).unwrap();
        let ww = hamiltonian_ww(&data, &solver, 1e-13, 100).unwrap();
        assert!((ww - exact).abs() < 1e-12 * exact);
        for e in [
            hamiltonian_app1(&ops, &s, Dispersion::Full),
            hamiltonian_app2(&ops, &s, Dispersion::Full).unwrap(),
            hamiltonian_wb(&ops, &s, Dispersion::Full),
        ] {
            assert!((e - exact).abs() < 1e-12 * exact, "{e} vs {exact}");
        }
    }

    #[test]
    fn gradients_match_finite_differences() {
        let (ops, s) = setup(0.3, 0.2);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let dirs = random_directions(*ops.grid(), 5, &mut rng);
        let d = Dispersion::Full;
        let e1 = variational_check(
            |u| Ok::<_, ModelError>(hamiltonian_app1(&ops, u, d)),
            &grad_app1(&ops, &s, d),
            &s,
            &dirs,
            1e-5,
        )
        .unwrap();
        assert!(e1 < 1e-6, "{e1}");
        let e2 = variational_check(
            |u| hamiltonian_app2(&ops, u, d),
            &grad_app2(&ops, &s, d).unwrap(),
            &s,
            &dirs,
            1e-5,
        )
        .unwrap();
        assert!(e2 < 1e-6, "{e2}");
        let e3 = variational_check(
            |u| Ok::<_, ModelError>(hamiltonian_wb(&ops, u, d)),
            &grad_wb(&ops, &s, d),
            &s,
            &dirs,
            1e-5,
        )
        .unwrap();
        assert!(e3 < 1e-6, "{e3}");
    }

    #[test]
    fn mass_and_momentum_gradients() {
        let (ops, s) = setup(0.3, 0.2);
        let g = *ops.grid();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let dirs = random_directions(g, 5, &mut rng);
        let shifted = Direction {
            zeta: dirs[0].zeta.map(|v| v + 0.5),
            psi: RealField::zeros(g),
        };
        let e = variational_check(
            |u| Ok::<_, ()>(mass(&u.zeta)),
            &(RealField::constant(g, 1.0), RealField::zeros(g)),
            &s,
            &[shifted],
            1e-5,
        )
        .unwrap();
        assert!(e < 1e-10);
        let e = variational_check(
            |u| Ok::<_, ()>(momentum(u)),
            &(s.psi.derivative(1), s.zeta.derivative(1).scale(-1.0)),
            &s,
            &dirs,
            1e-5,
        )
        .unwrap();
        assert!(e < 1e-9, "{e}");
    }

    #[test]
    fn app2_stationary_form_agrees() {
        let (ops, s) = setup(0.3, 0.2);
        let a = hamiltonian_app2(&ops, &s, Dispersion::Full).unwrap();
        let b = app2_stationary_value(&ops, &s, Dispersion::Full).unwrap();
        assert!((a - b).abs() < 1e-11 * a);
    }

    #[test]
    fn energies_are_translation_invariant() {
        let (ops, s) = setup(0.3, 0.2);
        let t = WaveStatePsi {
            zeta: s.zeta.shifted(1),
            psi: s.psi.shifted(1),
        };
        for (a, b) in [
            (hamiltonian_app1(&ops, &s, Dispersion::Full), hamiltonian_app1(&ops, &t, Dispersion::Full)),
            (
                hamiltonian_app2(&ops, &s, Dispersion::Full).unwrap(),
                hamiltonian_app2(&ops, &t, Dispersion::Full).unwrap(),
            ),
            (hamiltonian_wb(&ops, &s, Dispersion::Full), hamiltonian_wb(&ops, &t, Dispersion::Full)),
        ] {
            assert!((a - b).abs() < 1e-12 * a.abs());
        }
        let m = Model::new(ModelKind::WwRef, ops.clone(), StripSettings::default()).unwrap();
        let a = energy_psi(&m, &s).unwrap();
        let b = energy_psi(&m, &t).unwrap();
        assert!((a - b).abs() < 1e-12 * a.abs());
    }
}
