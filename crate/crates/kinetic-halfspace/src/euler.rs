//! Planar compressible Euler flow on `x_3 in [0, X]` with slip walls.
//!
//! Conservative variables `(rho, rho u_1, rho u_2, rho u_3, E)` with
//! `p = rho T`, `E = rho (3T/2 + |u|^2/2)` (monatomic, `gamma = 5/3`).
//! Finite volumes with limited linear reconstruction, a Rusanov flux and
//! third-order SSP Runge-Kutta; mirror ghost cells realize `u_3 = 0` at both ends.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const GAMMA: f64 = 5.0 / 3.0;

/// Analytic initial profile shape.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Profile {
    Zero,
    /// `amplitude exp(-((x - center)/width)^2)`.
    Gaussian {
        amplitude: f64,
        center: f64,
        width: f64,
    },
    /// `amplitude sin(pi wavenumber x / X)`; vanishes at both walls.
    Sine {
        amplitude: f64,
        wavenumber: f64,
    },
    /// `amplitude cos(pi wavenumber x / X)`.
    Cosine {
        amplitude: f64,
        wavenumber: f64,
    },
}

impl Profile {
    pub fn eval(&self, x: f64, length: f64) -> f64 {
        match *self {
            Profile::Zero => 0.0,
            Profile::Gaussian {
                amplitude,
                center,
                width,
            } => amplitude * (-((x - center) / width).powi(2)).exp(),
            Profile::Sine {
                amplitude,
                wavenumber,
            } => amplitude * (std::f64::consts::PI * wavenumber * x / length).sin(),
            Profile::Cosine {
                amplitude,
                wavenumber,
            } => amplitude * (std::f64::consts::PI * wavenumber * x / length).cos(),
        }
    }
}

/// Initial data `(1 + delta phi_0, delta Phi_0, 1 + delta theta_0)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EulerInit {
    pub delta: f64,
    pub phi0: Profile,
    pub big_phi0: [Profile; 3],
    pub theta0: Profile,
}

impl EulerInit {
    pub fn constant() -> Self {
        EulerInit {
            delta: 0.0,
            phi0: Profile::Zero,
            big_phi0: [Profile::Zero; 3],
            theta0: Profile::Zero,
        }
    }

    /// Isentropic density pulse at rest: `theta_0 = (gamma - 1) phi_0`.
    pub fn acoustic_pulse(delta: f64, center: f64, width: f64) -> Self {
        let phi0 = Profile::Gaussian {
            amplitude: 1.0,
            center,
            width,
        };
        let theta0 = Profile::Gaussian {
            amplitude: GAMMA - 1.0,
            center,
            width,
        };
        EulerInit {
            delta,
            phi0,
            big_phi0: [Profile::Zero; 3],
            theta0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EulerParams {
    pub cells: usize,
    pub length: f64,
    pub cfl: f64,
    /// Halt when the largest gradient exceeds this multiple of its initial value.
    pub blowup_factor: f64,
}

impl Default for EulerParams {
    fn default() -> Self {
        EulerParams {
            cells: 400,
            length: 1.0,
            cfl: 0.4,
            blowup_factor: 50.0,
        }
    }
}

/// Primitive state of one cell.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Primitive {
    pub rho: f64,
    pub u: [f64; 3],
    pub temp: f64,
}

type Cons = [f64; 5];

fn to_cons(p: &Primitive) -> Cons {
    let ke = 0.5 * (p.u[0] * p.u[0] + p.u[1] * p.u[1] + p.u[2] * p.u[2]);
    [
        p.rho,
        p.rho * p.u[0],
        p.rho * p.u[1],
        p.rho * p.u[2],
        p.rho * (1.5 * p.temp + ke),
    ]
}

fn to_prim(c: &Cons) -> Primitive {
    let rho = c[0];
    let u = [c[1] / rho, c[2] / rho, c[3] / rho];
    let ke = 0.5 * (u[0] * u[0] + u[1] * u[1] + u[2] * u[2]);
    Primitive {
        rho,
        u,
        temp: (c[4] / rho - ke) / 1.5,
    }
}

fn flux(p: &Primitive) -> Cons {
    let c = to_cons(p);
    let pr = p.rho * p.temp;
    let w = p.u[2];
    [c[3], c[1] * w, c[2] * w, c[3] * w + pr, (c[4] + pr) * w]
}

fn sound_speed(p: &Primitive) -> f64 {
    (GAMMA * p.temp).sqrt()
}

fn mirror(p: &Primitive) -> Primitive {
    Primitive {
        rho: p.rho,
        u: [p.u[0], p.u[1], -p.u[2]],
        temp: p.temp,
    }
}

/// Van Albada slope with `eps = dx^3`: jumps of `O(dx^2)` near smooth extrema
/// are left unlimited, so the scheme stays second order there.
fn limited_slope(a: f64, b: f64, eps: f64) -> f64 {
    (a * (b * b + eps) + b * (a * a + eps)) / (a * a + b * b + 2.0 * eps)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EulerField {
    pub t: f64,
    pub delta: f64,
    pub length: f64,
    pub cells: Vec<Primitive>,
    pub params: EulerParams,
    initial_gradient: f64,
    pub steps: usize,
}

/// Builds the initial field; requires `Phi_0,3(0) = 0` and positivity.
pub fn init_euler(init: &EulerInit, params: EulerParams) -> Result<EulerField> {
    if params.cells < 4 || !(params.length > 0.0) || !(params.cfl > 0.0 && params.cfl <= 1.0) {
        return Err(Error::InvalidParameter(
            "euler mesh needs >= 4 cells, X > 0 and cfl in (0, 1]".into(),
        ));
    }
    if init.big_phi0[2].eval(0.0, params.length) != 0.0 {
        return Err(Error::InvalidParameter(
            "normal velocity must vanish at the wall".into(),
        ));
    }
    let dx = params.length / params.cells as f64;
    let mut cells = Vec::with_capacity(params.cells);
    for k in 0..params.cells {
        let x = (k as f64 + 0.5) * dx;
        let d = init.delta;
        let p = Primitive {
            rho: 1.0 + d * init.phi0.eval(x, params.length),
            u: [
                d * init.big_phi0[0].eval(x, params.length),
                d * init.big_phi0[1].eval(x, params.length),
                d * init.big_phi0[2].eval(x, params.length),
            ],
            temp: 1.0 + d * init.theta0.eval(x, params.length),
        };
        if !(p.rho > 0.0 && p.temp > 0.0) {
            return Err(Error::Positivity(format!(
                "initial state at x = {x:.4}: rho = {}, T = {}",
                p.rho, p.temp
            )));
        }
        cells.push(p);
    }
    let mut field = EulerField {
        t: 0.0,
        delta: init.delta,
        length: params.length,
        cells,
        params,
        initial_gradient: 0.0,
        steps: 0,
    };
    field.initial_gradient = field.max_gradient();
    Ok(field)
}

impl EulerField {
    pub fn dx(&self) -> f64 {
        self.length / self.cells.len() as f64
    }

    pub fn centers(&self) -> Vec<f64> {
        let dx = self.dx();
        (0..self.cells.len())
            .map(|k| (k as f64 + 0.5) * dx)
            .collect()
    }

    /// `(sum rho dx, sum E dx)`.
    pub fn mass_energy(&self) -> (f64, f64) {
        let dx = self.dx();
        let mut m = 0.0;
        let mut e = 0.0;
        for p in &self.cells {
            let c = to_cons(p);
            m += c[0] * dx;
            e += c[4] * dx;
        }
        (m, e)
    }

    /// Largest one-sided difference quotient of `rho`, `u_3` and `p`.
    pub fn max_gradient(&self) -> f64 {
        let dx = self.dx();
        self.cells
            .windows(2)
            .map(|w| {
                let dr = (w[1].rho - w[0].rho).abs();
                let du = (w[1].u[2] - w[0].u[2]).abs();
                let dp = (w[1].rho * w[1].temp - w[0].rho * w[0].temp).abs();
                dr.max(du).max(dp) / dx
            })
            .fold(0.0, f64::max)
    }

    pub fn stable_dt(&self) -> f64 {
        let smax = self
            .cells
            .iter()
            .map(|p| p.u[2].abs() + sound_speed(p))
            .fold(0.0, f64::max);
        self.params.cfl * self.dx() / smax
    }

    /// Semi-discrete right-hand side `-dF/dx` in conservative variables.
    pub fn rhs(&self) -> Vec<Cons> {
        rhs_of(&self.cells, self.dx())
    }

    /// One SSP-RK3 step of size `dt`.
    pub fn step(&mut self, dt: f64) -> Result<()> {
        let dx = self.dx();
        let u0: Vec<Cons> = self.cells.iter().map(to_cons).collect();
        let stage = |u: &[Cons]| -> Result<Vec<Primitive>> {
            u.iter()
                .map(|c| {
                    let p = to_prim(c);
                    if p.rho > 0.0 && p.temp > 0.0 && p.rho.is_finite() && p.temp.is_finite() {
                        Ok(p)
                    } else {
                        Err(Error::LifeSpan {
                            t: self.t,
                            detail: "positivity lost".into(),
                        })
                    }
                })
                .collect()
        };
        let l0 = rhs_of(&self.cells, dx);
        let u1: Vec<Cons> = (0..u0.len()).map(|k| add(&u0[k], &l0[k], dt)).collect();
        let p1 = stage(&u1)?;
        let l1 = rhs_of(&p1, dx);
        let u2: Vec<Cons> = (0..u0.len())
            .map(|k| {
                let a = add(&u1[k], &l1[k], dt);
                lin(&u0[k], 0.75, &a, 0.25)
            })
            .collect();
        let p2 = stage(&u2)?;
        let l2 = rhs_of(&p2, dx);
        let u3: Vec<Cons> = (0..u0.len())
            .map(|k| {
                let a = add(&u2[k], &l2[k], dt);
                lin(&u0[k], 1.0 / 3.0, &a, 2.0 / 3.0)
            })
            .collect();
        self.cells = stage(&u3)?;
        self.t += dt;
        self.steps += 1;
        let g = self.max_gradient();
        let g0 = self.initial_gradient.max(1e-12 * self.params.blowup_factor);
        if g > self.params.blowup_factor * g0 {
            return Err(Error::LifeSpan {
                t: self.t,
                detail: format!("gradient grew from {g0:.3e} to {g:.3e} (heuristic monitor)"),
            });
        }
        Ok(())
    }

    /// Advances to `t_end` with CFL-limited steps, the last one shortened.
    pub fn solve_to(&mut self, t_end: f64) -> Result<()> {
        while self.t < t_end - 1e-14 {
            let dt = self.stable_dt().min(t_end - self.t);
            self.step(dt)?;
        }
        Ok(())
    }
}

fn add(a: &Cons, b: &Cons, s: f64) -> Cons {
    [
        a[0] + s * b[0],
        a[1] + s * b[1],
        a[2] + s * b[2],
        a[3] + s * b[3],
        a[4] + s * b[4],
    ]
}

fn lin(a: &Cons, sa: f64, b: &Cons, sb: f64) -> Cons {
    [
        sa * a[0] + sb * b[0],
        sa * a[1] + sb * b[1],
        sa * a[2] + sb * b[2],
        sa * a[3] + sb * b[3],
        sa * a[4] + sb * b[4],
    ]
}

fn prim_vec(p: &Primitive) -> [f64; 5] {
    [p.rho, p.u[0], p.u[1], p.u[2], p.temp]
}

fn vec_prim(v: &[f64; 5]) -> Primitive {
    Primitive {
        rho: v[0],
        u: [v[1], v[2], v[3]],
        temp: v[4],
    }
}

fn rhs_of(cells: &[Primitive], dx: f64) -> Vec<Cons> {
    let n = cells.len();
    // Two mirror ghosts on each side.
    let mut ext = Vec::with_capacity(n + 4);
    ext.push(mirror(&cells[1]));
    ext.push(mirror(&cells[0]));
    ext.extend_from_slice(cells);
    ext.push(mirror(&cells[n - 1]));
    ext.push(mirror(&cells[n - 2]));
    let pv: Vec<[f64; 5]> = ext.iter().map(prim_vec).collect();
    // Limited slopes for cells 1..n+3 of the extended array.
    let mut slope = vec![[0.0; 5]; n + 4];
    let eps = dx.powi(3);
    for k in 1..n + 3 {
        for c in 0..5 {
            slope[k][c] = limited_slope(pv[k][c] - pv[k - 1][c], pv[k + 1][c] - pv[k][c], eps);
        }
    }
    // Faces between extended cells k and k+1 for k = 1..=n+1 (physical faces 0..=n).
    let mut face = vec![[0.0; 5]; n + 1];
    for (f, k) in (1..=n + 1).enumerate() {
        let mut l = [0.0; 5];
        let mut r = [0.0; 5];
        for c in 0..5 {
            l[c] = pv[k][c] + 0.5 * slope[k][c];
            r[c] = pv[k + 1][c] - 0.5 * slope[k + 1][c];
        }
        let (pl, pr) = (vec_prim(&l), vec_prim(&r));
        let (fl, fr) = (flux(&pl), flux(&pr));
        let (ul, ur) = (to_cons(&pl), to_cons(&pr));
        let a = (pl.u[2].abs() + sound_speed(&pl)).max(pr.u[2].abs() + sound_speed(&pr));
        for c in 0..5 {
            face[f][c] = 0.5 * (fl[c] + fr[c]) - 0.5 * a * (ur[c] - ul[c]);
        }
    }
    (0..n)
        .map(|k| {
            let mut r = [0.0; 5];
            for c in 0..5 {
                r[c] = -(face[k + 1][c] - face[k][c]) / dx;
            }
            r
        })
        .collect()
}

/// Linear acoustics about `(1, 0, 1)` for an isentropic pulse at rest,
/// reflected at `x = 0`: returns `(rho, u_3, T)` at `x`, `t` (valid before the
/// pulse reaches `x = X`).
pub fn acoustic_reference(delta: f64, center: f64, width: f64, x: f64, t: f64) -> (f64, f64, f64) {
    let c = GAMMA.sqrt();
    let g =
        |s: f64| (-((s - center) / width).powi(2)).exp() + (-((s + center) / width).powi(2)).exp();
    let (a, b) = (g(x - c * t), g(x + c * t));
    let rho = 1.0 + delta * 0.5 * (a + b);
    let u3 = delta * c * 0.5 * (a - b);
    let temp = 1.0 + delta * (GAMMA - 1.0) * 0.5 * (a + b);
    (rho, u3, temp)
}

/// Writes `t, x, rho, u1, u2, u3, T` rows.
pub fn write_profiles_csv<W: std::io::Write>(snapshots: &[EulerField], w: W) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    wr.write_record(["t", "x", "rho", "u1", "u2", "u3", "T"])?;
    for s in snapshots {
        for (x, p) in s.centers().iter().zip(&s.cells) {
            wr.write_record(&[
                format!("{:.17e}", s.t),
                format!("{x:.17e}"),
                format!("{:.17e}", p.rho),
                format!("{:.17e}", p.u[0]),
                format!("{:.17e}", p.u[1]),
                format!("{:.17e}", p.u[2]),
                format!("{:.17e}", p.temp),
            ])?;
        }
    }
    wr.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_state_is_exact() {
        let mut f = init_euler(
            &EulerInit::constant(),
            EulerParams {
                cells: 32,
                ..Default::default()
            },
        )
        .unwrap();
        for _ in 0..20 {
            let dt = f.stable_dt();
            f.step(dt).unwrap();
        }
        assert!(f.cells.iter().all(|p| *p
            == Primitive {
                rho: 1.0,
                u: [0.0; 3],
                temp: 1.0
            }));
    }

    #[test]
    fn gaussian_amplitude_bound() {
        let init = EulerInit {
            delta: 0.01,
            phi0: Profile::Gaussian {
                amplitude: 1.0,
                center: 0.5,
                width: 0.1,
            },
            big_phi0: [Profile::Zero; 3],
            theta0: Profile::Zero,
        };
        let f = init_euler(&init, EulerParams::default()).unwrap();
        assert!(f.cells.iter().all(|p| (0.99..=1.01).contains(&p.rho)));
    }

    #[test]
    fn wall_velocity_must_vanish() {
        let mut init = EulerInit::constant();
        init.delta = 0.1;
        init.big_phi0[2] = Profile::Cosine {
            amplitude: 1.0,
            wavenumber: 1.0,
        };
        assert!(init_euler(&init, EulerParams::default()).is_err());
    }

    #[test]
    fn acoustic_pulse_matches_linear_acoustics() {
        let init = EulerInit::acoustic_pulse(1e-3, 0.15, 0.05);
        let mut f = init_euler(&init, EulerParams::default()).unwrap();
        f.solve_to(0.2).unwrap();
        let dx = f.dx();
        let mut e = 0.0;
        for (x, p) in f.centers().iter().zip(&f.cells) {
            let (r, _, _) = acoustic_reference(1e-3, 0.15, 0.05, *x, 0.2);
            e += dx * (p.rho - r).powi(2);
        }
        assert!(e.sqrt() <= 1e-4, "{}", e.sqrt());
    }

    #[test]
    fn conservation_per_step() {
        let init = EulerInit {
            delta: 0.05,
            phi0: Profile::Gaussian {
                amplitude: 1.0,
                center: 0.3,
                width: 0.1,
            },
            big_phi0: [
                Profile::Sine {
                    amplitude: 0.3,
                    wavenumber: 2.0,
                },
                Profile::Zero,
                Profile::Sine {
                    amplitude: 1.0,
                    wavenumber: 1.0,
                },
            ],
            theta0: Profile::Cosine {
                amplitude: 0.5,
                wavenumber: 3.0,
            },
        };
        let mut f = init_euler(
            &init,
            EulerParams {
                cells: 100,
                ..Default::default()
            },
        )
        .unwrap();
        for _ in 0..50 {
            let (m0, e0) = f.mass_energy();
            let dt = f.stable_dt();
            f.step(dt).unwrap();
            let (m1, e1) = f.mass_energy();
            assert!((m1 - m0).abs() <= 1e-12 && (e1 - e0).abs() <= 1e-12);
        }
    }
}
