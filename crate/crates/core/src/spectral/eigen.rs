//! Implicit-shift QL on a symmetric tridiagonal matrix.
//!
//! Only the first row of the accumulated rotation product is tracked, which
//! is all the Moser solution needs.

use crate::error::{Error, Result};

use super::{SpectralData, SymTridiagonal};

const MAX_SWEEPS: usize = 60;

pub fn eigen_full(t: &SymTridiagonal) -> Result<SpectralData> {
    let n = t.diag.len();
    if t.offdiag.len() + 1 != n.max(1) {
        return Err(Error::Parameter(format!(
            "tridiagonal with {} diagonal entries needs {} off-diagonal entries, got {}",
            n,
            n.saturating_sub(1),
            t.offdiag.len()
        )));
    }
    if n == 0 {
        return Err(Error::Parameter("empty matrix".into()));
    }

    let mut d = t.diag.clone();
    let mut e = t.offdiag.clone();
    e.push(0.0);
    let mut z = vec![0.0; n];
    z[0] = 1.0;
    // Deflation is judged against the whole matrix as well as locally, so
    // blocks of roundoff-sized entries do not stall the sweep.
    let scale = (0..n).map(|i| d[i].abs() + e[i].abs()).fold(0.0, f64::max);

    for l in 0..n {
        let mut sweeps = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd || e[m].abs() <= 0.5 * f64::EPSILON * scale {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            sweeps += 1;
            if sweeps > MAX_SWEEPS {
                return Err(Error::NonConvergence { index: l });
            }

            // Wilkinson shift from the leading 2x2 block
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut deflated_early = false;
            let mut i = m;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    deflated_early = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;

                let zf = z[i + 1];
                z[i + 1] = s * z[i] + c * zf;
                z[i] = c * z[i] - s * zf;
            }
            if deflated_early {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| d[a].total_cmp(&d[b]));
    Ok(SpectralData {
        eigenvalues: order.iter().map(|&i| d[i]).collect(),
        first_components: order.iter().map(|&i| z[i].abs()).collect(),
    })
}
