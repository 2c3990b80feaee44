//! Sparse direct solve of the same discrete system as the sweep backend.

use faer::linalg::solvers::Solve;
use faer::sparse::{SparseColMat, Triplet};
use faer::Mat;

use super::transport::Transport;
use crate::error::{Error, Result};

/// Nodal values solving the cell equations and damped specular rows.
///
/// Rows are the `cells * nv` cell equations followed by one reflection row per
/// velocity (wall `eta = 0` for `v_3 > 0`, `eta = d` for `v_3 < 0`). The
/// undamped `delta = 0` system is singular; use `delta > 0` or finite `n`.
pub fn solve_direct(tr: &Transport<'_>, gbar: &[f64]) -> Result<Vec<f64>> {
    let nv = tr.nv;
    let cells = tr.cells();
    let grid = &tr.op.grid;
    let k = &tr.op.k;
    let dim = (cells + 1) * nv;
    let rho = tr.penalty.reflectivity();
    let up = |c: usize, j: usize| if grid.nodes[j][2] > 0.0 { c } else { c + 1 };
    let mut trip = Vec::new();
    for c in 0..cells {
        let dk = tr.mesh.width(c);
        for i in 0..nv {
            let row = c * nv + i;
            let v3 = grid.nodes[i][2];
            for j in 0..nv {
                let mut a = -k[(i, j)];
                if i == j {
                    a += tr.sigma(i);
                }
                if a == 0.0 && i != j {
                    continue;
                }
                let th = tr.theta(c, j);
                let (nu_, nd) = (up(c, j), 2 * c + 1 - up(c, j));
                let mut cu = a * th;
                let mut cd = a * (1.0 - th);
                if i == j {
                    // Transport part: v_3 (f_{c+1} - f_c) / dk.
                    if nu_ == c + 1 {
                        cu += v3 / dk;
                        cd -= v3 / dk;
                    } else {
                        cu -= v3 / dk;
                        cd += v3 / dk;
                    }
                }
                trip.push(Triplet::new(row, nu_ * nv + j, cu));
                trip.push(Triplet::new(row, nd * nv + j, cd));
            }
        }
    }
    for i in 0..nv {
        let row = cells * nv + i;
        let node = if grid.nodes[i][2] > 0.0 { 0 } else { cells };
        trip.push(Triplet::new(row, node * nv + i, 1.0));
        trip.push(Triplet::new(row, node * nv + grid.reflect_map[i], -rho));
    }
    let a = SparseColMat::<usize, f64>::try_new_from_triplets(dim, dim, &trip)
        .map_err(|e| Error::Singular(format!("sparse assembly: {e:?}")))?;
    drop(trip);
    let lu = a
        .sp_lu()
        .map_err(|e| Error::Singular(format!("sparse LU: {e:?}")))?;
    let mut rhs = Mat::<f64>::zeros(dim, 1);
    for (x, g) in gbar.iter().enumerate() {
        rhs[(x, 0)] = *g;
    }
    lu.solve_in_place(rhs.as_mut());
    let sol: Vec<f64> = (0..dim).map(|x| rhs[(x, 0)]).collect();
    if sol.iter().any(|x| !x.is_finite()) {
        return Err(Error::Singular(
            "direct transport solve produced non-finite values".into(),
        ));
    }
    Ok(sol)
}
