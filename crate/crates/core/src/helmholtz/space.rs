use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::helmholtz_tensors;
use crate::error::ModelError;
use crate::model::SecondOrderField;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProbeSettings {
    /// Number of random elements of the solution space tried.
    pub probes: usize,
    /// Singular values below `svd_cut · σ_max` span the solution space.
    pub svd_cut: f64,
    /// A probe with `|det| > singular_tol` (after Frobenius normalisation)
    /// counts as non-singular.
    pub singular_tol: f64,
    pub seed: u64,
}

impl Default for ProbeSettings {
    fn default() -> Self {
        ProbeSettings {
            probes: 200,
            svd_cut: 1e-10,
            singular_tol: 1e-8,
            seed: 0,
        }
    }
}

/// Symmetric matrices `g` satisfying the algebraic conditions at one point:
/// `gΦ` symmetric (depth 1), plus `g∇Φ` symmetric (depth 2), plus the cyclic
/// `R` condition (depth 3).
#[derive(Debug, Clone)]
pub struct MultiplierSpace {
    pub depth: u8,
    /// Orthonormal basis in the coordinates `(g_ij)_{i ≤ j}`.
    pub coordinates: Vec<DVector<f64>>,
    pub basis: Vec<DMatrix<f64>>,
    pub max_normalized_det: f64,
    pub nonsingular_found: bool,
    pub witness: Option<DMatrix<f64>>,
}

fn symmetric_index(n: usize) -> Vec<(usize, usize)> {
    (0..n).flat_map(|i| (i..n).map(move |j| (i, j))).collect()
}

fn from_coordinates(n: usize, c: &DVector<f64>) -> DMatrix<f64> {
    let mut g = DMatrix::zeros(n, n);
    for (u, (i, j)) in symmetric_index(n).into_iter().enumerate() {
        g[(i, j)] = c[u];
        g[(j, i)] = c[u];
    }
    g
}

fn to_coordinates(g: &DMatrix<f64>) -> DVector<f64> {
    let idx = symmetric_index(g.nrows());
    DVector::from_iterator(idx.len(), idx.into_iter().map(|(i, j)| 0.5 * (g[(i, j)] + g[(j, i)])))
}

fn normalized(m: &DMatrix<f64>) -> DMatrix<f64> {
    let scale = m.amax();
    if scale > 0.0 {
        m / scale
    } else {
        m.clone()
    }
}

impl MultiplierSpace {
    pub fn dimension(&self) -> usize {
        self.basis.len()
    }

    /// Relative distance of the symmetric part of `g` from the space.
    pub fn projection_residual(&self, g: &DMatrix<f64>) -> f64 {
        let c = to_coordinates(g);
        let norm = c.norm();
        if norm == 0.0 {
            return 0.0;
        }
        let mut rest = c.clone();
        for b in &self.coordinates {
            rest -= b * b.dot(&c);
        }
        rest.norm() / norm
    }
}

/// Solves the linear algebraic conditions for symmetric `g` at `(q, q̇)` and
/// probes the solution space for a non-singular element.
pub fn algebraic_multiplier_space<F: SecondOrderField>(
    field: &F,
    q: &[f64],
    v: &[f64],
    depth: u8,
    settings: &ProbeSettings,
) -> Result<MultiplierSpace, ModelError> {
    if !(1..=3).contains(&depth) {
        return Err(ModelError::InvalidSpec(format!("depth must be 1, 2 or 3, got {depth}")));
    }
    let n = field.dim();
    let tensors = helmholtz_tensors(field, q, v)?;
    let idx = symmetric_index(n);
    let unknowns = idx.len();
    let units: Vec<DMatrix<f64>> = (0..unknowns)
        .map(|u| from_coordinates(n, &DVector::from_fn(unknowns, |k, _| if k == u { 1.0 } else { 0.0 })))
        .collect();

    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut symmetry_rows = |t: &DMatrix<f64>| {
        let t = normalized(t);
        let products: Vec<DMatrix<f64>> = units.iter().map(|e| e * &t).collect();
        for i in 0..n {
            for j in i + 1..n {
                rows.push(products.iter().map(|p| p[(i, j)] - p[(j, i)]).collect());
            }
        }
    };
    symmetry_rows(&tensors.phi);
    if depth >= 2 {
        symmetry_rows(&tensors.nabla_phi);
    }
    if depth >= 3 {
        let scale = tensors.r.iter().map(|m| m.amax()).fold(0.0, f64::max);
        let r: Vec<DMatrix<f64>> = tensors
            .r
            .iter()
            .map(|m| if scale > 0.0 { m / scale } else { m.clone() })
            .collect();
        for i in 0..n {
            for k in 0..n {
                for l in 0..n {
                    rows.push(
                        units
                            .iter()
                            .map(|g| {
                                (0..n)
                                    .map(|j| g[(i, j)] * r[j][(k, l)] + g[(l, j)] * r[j][(i, k)] + g[(k, j)] * r[j][(l, i)])
                                    .sum()
                            })
                            .collect(),
                    );
                }
            }
        }
    }
    while rows.len() < unknowns {
        rows.push(vec![0.0; unknowns]);
    }
    let system = DMatrix::from_fn(rows.len(), unknowns, |r, c| rows[r][c]);
    let svd = system.svd(false, true);
    let v_t = svd.v_t.ok_or_else(|| ModelError::InvalidSpec("singular value decomposition failed".into()))?;
    let sigma_max = svd.singular_values.max();
    let coordinates: Vec<DVector<f64>> = svd
        .singular_values
        .iter()
        .enumerate()
        .filter(|&(_, &s)| s <= settings.svd_cut * sigma_max)
        .map(|(k, _)| v_t.row(k).transpose())
        .collect();
    let basis: Vec<DMatrix<f64>> = coordinates.iter().map(|c| from_coordinates(n, c)).collect();

    let mut rng = ChaCha8Rng::seed_from_u64(settings.seed);
    let mut best = 0.0;
    let mut witness = None;
    if !basis.is_empty() {
        for _ in 0..settings.probes {
            let mut g = DMatrix::zeros(n, n);
            for b in &basis {
                g += b * rng.gen_range(-1.0..1.0);
            }
            let norm = g.norm();
            if norm == 0.0 {
                continue;
            }
            g /= norm;
            let det = g.determinant().abs();
            if det > best {
                best = det;
                witness = Some(g);
            }
        }
    }
    Ok(MultiplierSpace {
        depth,
        coordinates,
        basis,
        max_normalized_det: best,
        nonsingular_found: best > settings.singular_tol,
        witness,
    })
}
