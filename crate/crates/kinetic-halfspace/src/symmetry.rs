//! Signed axis permutations of the velocity lattice.
//!
//! The midpoint lattice is invariant under the 48 symmetries of the cube.
//! Those fixing the bulk velocity leave the Maxwellian, and hence the
//! collision operator, invariant; rows of the operator need only be computed
//! for one node per orbit.

use crate::grid::VelocityGrid;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SignedPerm {
    pub perm: [usize; 3],
    pub flip: [bool; 3],
}

impl SignedPerm {
    /// `(g v)_k = ±v_{perm[k]}`.
    pub fn apply(&self, v: &[f64; 3]) -> [f64; 3] {
        let mut out = [0.0; 3];
        for k in 0..3 {
            let x = v[self.perm[k]];
            out[k] = if self.flip[k] { -x } else { x };
        }
        out
    }

    fn apply_index(&self, ax: &[usize; 3], n: usize) -> [usize; 3] {
        let mut out = [0; 3];
        for k in 0..3 {
            let x = ax[self.perm[k]];
            out[k] = if self.flip[k] { n - 1 - x } else { x };
        }
        out
    }
}

pub fn cube_group() -> Vec<SignedPerm> {
    const PERMS: [[usize; 3]; 6] = [
        [0, 1, 2],
        [0, 2, 1],
        [1, 0, 2],
        [1, 2, 0],
        [2, 0, 1],
        [2, 1, 0],
    ];
    let mut g = Vec::with_capacity(48);
    for perm in PERMS {
        for bits in 0..8u8 {
            g.push(SignedPerm {
                perm,
                flip: [bits & 1 != 0, bits & 2 != 0, bits & 4 != 0],
            });
        }
    }
    g
}

/// Subgroup of cube symmetries fixing `u` exactly.
pub fn stabilizer(u: &[f64; 3]) -> Vec<SignedPerm> {
    cube_group()
        .into_iter()
        .filter(|g| g.apply(u) == *u)
        .collect()
}

/// Node permutations of a symmetry group and an orbit decomposition.
#[derive(Debug, Clone)]
pub struct Orbits {
    /// `perms[g][j]` = index of the node `g v_j`.
    pub perms: Vec<Vec<usize>>,
    /// One representative per orbit (the smallest index).
    pub reps: Vec<usize>,
}

pub fn orbits(grid: &VelocityGrid, group: &[SignedPerm]) -> Orbits {
    let n = grid.n_axis;
    let perms: Vec<Vec<usize>> = group
        .iter()
        .map(|g| {
            (0..grid.len())
                .map(|j| {
                    let a = g.apply_index(&grid.axis_indices(j), n);
                    grid.index(a[0], a[1], a[2])
                })
                .collect()
        })
        .collect();
    let reps = (0..grid.len())
        .filter(|&i| perms.iter().all(|p| p[i] >= i))
        .collect();
    Orbits { perms, reps }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::build_grid;

    #[test]
    fn group_sizes() {
        assert_eq!(cube_group().len(), 48);
        assert_eq!(stabilizer(&[0.0; 3]).len(), 48);
        assert_eq!(stabilizer(&[0.0, 0.0, 0.3]).len(), 8);
        assert_eq!(stabilizer(&[0.1, 0.2, 0.3]).len(), 1);
    }

    #[test]
    fn orbit_count_full_group() {
        let g = build_grid(1.0, 8).unwrap();
        let o = orbits(&g, &cube_group());
        // Octant nodes with i1 <= i2 <= i3 among 4 per axis: C(6, 3).
        assert_eq!(o.reps.len(), 20);
        for p in &o.perms {
            for (j, &pj) in p.iter().enumerate() {
                let a = g.nodes[j];
                let b = g.nodes[pj];
                assert!(
                    (a.iter().map(|x| x * x).sum::<f64>() - b.iter().map(|x| x * x).sum::<f64>())
                        .abs()
                        < 1e-12
                );
            }
        }
    }
}
