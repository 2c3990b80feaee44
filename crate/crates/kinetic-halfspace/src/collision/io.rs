//! Binary and CSV export of assembled operators.
//!
//! Binary layout (little endian): the 8-byte magic `KHSOPv01`, `n: u64`, the
//! `n` node velocities as `3n` f64, `nu` as `n` f64, then `K` row-major as
//! `n^2` f64.

use std::io::{Read, Write};

use faer::Mat;

use super::CollisionOperator;
use crate::error::{Error, Result};

const MAGIC: &[u8; 8] = b"KHSOPv01";

impl CollisionOperator {
    pub fn write_bin<W: Write>(&self, mut w: W) -> Result<()> {
        let n = self.len();
        w.write_all(MAGIC)?;
        w.write_all(&(n as u64).to_le_bytes())?;
        let mut buf = Vec::with_capacity(8 * n * 4);
        for v in &self.grid.nodes {
            for x in v {
                buf.extend_from_slice(&x.to_le_bytes());
            }
        }
        for x in &self.nu {
            buf.extend_from_slice(&x.to_le_bytes());
        }
        w.write_all(&buf)?;
        let mut row = Vec::with_capacity(8 * n);
        for i in 0..n {
            row.clear();
            for j in 0..n {
                row.extend_from_slice(&self.k[(i, j)].to_le_bytes());
            }
            w.write_all(&row)?;
        }
        w.flush()?;
        Ok(())
    }

    /// Per-node table: `index, v1, v2, v3, nu, k_diag, k_row_abs_sum`.
    pub fn write_nodes_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record(["index", "v1", "v2", "v3", "nu", "k_diag", "k_row_abs_sum"])?;
        let n = self.len();
        for i in 0..n {
            let v = self.grid.nodes[i];
            let rs: f64 = (0..n).map(|j| self.k[(i, j)].abs()).sum();
            wr.write_record(&[
                i.to_string(),
                format!("{:.17e}", v[0]),
                format!("{:.17e}", v[1]),
                format!("{:.17e}", v[2]),
                format!("{:.17e}", self.nu[i]),
                format!("{:.17e}", self.k[(i, i)]),
                format!("{:.17e}", rs),
            ])?;
        }
        wr.flush()?;
        Ok(())
    }

    /// Dense matrix as `i, j, k_ij` triples (nonzero entries only).
    pub fn write_matrix_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record(["i", "j", "k_ij"])?;
        let n = self.len();
        for i in 0..n {
            for j in 0..n {
                let x = self.k[(i, j)];
                if x != 0.0 {
                    wr.write_record(&[i.to_string(), j.to_string(), format!("{:.17e}", x)])?;
                }
            }
        }
        wr.flush()?;
        Ok(())
    }
}

/// Reads `(nodes, nu, K)` back from [`CollisionOperator::write_bin`] output.
pub fn read_operator_bin<R: Read>(mut r: R) -> Result<(Vec<[f64; 3]>, Vec<f64>, Mat<f64>)> {
    let mut magic = [0u8; 8];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(Error::InvalidParameter("not an operator file".into()));
    }
    let mut b8 = [0u8; 8];
    r.read_exact(&mut b8)?;
    let n = u64::from_le_bytes(b8) as usize;
    let mut next = || -> Result<f64> {
        r.read_exact(&mut b8)?;
        Ok(f64::from_le_bytes(b8))
    };
    let mut nodes = Vec::with_capacity(n);
    for _ in 0..n {
        nodes.push([next()?, next()?, next()?]);
    }
    let nu = (0..n).map(|_| next()).collect::<Result<Vec<f64>>>()?;
    let mut k = Mat::<f64>::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            k[(i, j)] = next()?;
        }
    }
    Ok((nodes, nu, k))
}
