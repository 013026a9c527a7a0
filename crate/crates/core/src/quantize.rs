//! The uniform quantizer, the cell geometry it induces, and the set-valued
//! regularization of the vector field on the discontinuity set.
//!
//! The quantizer `q(s) = ⌊s + 1/2⌋` is constant on each half-open cell
//! `S_k = {x : k_i - 1/2 <= x_i < k_i + 1/2}`, so the dynamics are affine
//! per cell and jump across cell boundaries. At a boundary point the field
//! has one limit value per orthant ("sector") of the components sitting on
//! a half-integer; the convex hull of those limits is the Krasowskii
//! set-valued field, and a sector whose limit field points back into it is
//! an admissible entry direction for a solution.

use thiserror::Error;

use crate::dynamics;
use crate::graph::Graph;

/// Integer cell index `k`; doubles as the value of the vector quantizer,
/// since `x ∈ S_k` exactly when `q_vec(x) = k`.
pub type CellIndex = Vec<i64>;

/// Hard cap on the number of components allowed on the discontinuity at
/// once: sector enumeration is exhaustive over `2^M` orthants.
pub const SECTOR_CAP: usize = 16;

/// Default tolerance for detecting half-integer components.
pub const HALF_TOL: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum QuantizeError {
    #[error("{count} components sit on the discontinuity, cap is {cap}")]
    TooManyBoundaryComponents { count: usize, cap: usize },
    #[error("sector mask does not match the boundary set of the point: {0}")]
    MaskMismatch(String),
}

/// Uniform quantizer `⌊s + 1/2⌋`; half-integers round up.
pub fn q_scalar(s: f64) -> i64 {
    assert!(s.is_finite(), "quantizer input must be finite");
    (s + 0.5).floor() as i64
}

/// Componentwise quantizer; the result is also the index of the cell
/// containing `x`.
pub fn q_vec(x: &[f64]) -> CellIndex {
    x.iter().map(|&s| q_scalar(s)).collect()
}

/// Indices whose component lies within `tol` of the half-integer lattice
/// `Z + 1/2`, i.e. the components on which the field is discontinuous.
pub fn boundary_set(x: &[f64], tol: f64) -> Vec<usize> {
    assert!(tol > 0.0 && tol < 0.25, "tolerance must lie in (0, 1/4)");
    x.iter()
        .enumerate()
        .filter(|(_, &xi)| {
            assert!(xi.is_finite(), "state must be finite");
            let frac = xi - xi.floor();
            (frac - 0.5).abs() <= tol
        })
        .map(|(i, _)| i)
        .collect()
}

/// One orthant around a discontinuity point: `bits[i]` picks the upper
/// (`true`) or lower (`false`) quantizer limit for each active component,
/// and is `false` everywhere off the active set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SectorMask {
    bits: Vec<bool>,
    active: Vec<usize>,
}

impl SectorMask {
    /// Builds a mask of length `n`; `active_bits` aligns with `active`.
    pub fn new(n: usize, active: Vec<usize>, active_bits: &[bool]) -> Self {
        assert_eq!(active.len(), active_bits.len());
        let mut bits = vec![false; n];
        for (&i, &b) in active.iter().zip(active_bits) {
            assert!(i < n, "active index out of range");
            bits[i] = b;
        }
        SectorMask { bits, active }
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn active(&self) -> &[usize] {
        &self.active
    }

    pub fn bit(&self, i: usize) -> bool {
        self.bits[i]
    }
}

/// Finite vertex set of the Krasowskii set-valued field at a point: one
/// sector limit per orthant of the active components. The set-valued field
/// itself is the convex hull of these vertices, exactly, because the field
/// is piecewise affine and takes precisely these limit values near the
/// base point.
#[derive(Debug, Clone, PartialEq)]
pub struct KrasowskiiHull {
    pub base_point: Vec<f64>,
    pub vertices: Vec<Vec<f64>>,
}

fn levels_for_mask(x: &[f64], mask: &SectorMask) -> Vec<i64> {
    x.iter()
        .enumerate()
        .map(|(j, &xj)| {
            if mask.active.contains(&j) {
                // x_j = k_j + 1/2 within tolerance; the two one-sided limits
                // of q at that point are k_j and k_j + 1.
                xj.floor() as i64 + mask.bits[j] as i64
            } else {
                q_scalar(xj)
            }
        })
        .collect()
}

/// Limit of the field at `x` approached from the sector selected by `mask`:
/// component `i` is `Σ_j a_ij·level_j - d_i·x_i`, where active components
/// contribute their selected one-sided quantizer limit.
///
/// `tol` is the half-integer detection tolerance that produced the mask;
/// the mask must cover exactly `boundary_set(x, tol)`.
pub fn sector_field_limit(
    g: &Graph,
    x: &[f64],
    mask: &SectorMask,
    tol: f64,
) -> Result<Vec<f64>, QuantizeError> {
    let expected = boundary_set(x, tol);
    if mask.active != expected {
        return Err(QuantizeError::MaskMismatch(format!(
            "mask active set {:?}, boundary set {:?}",
            mask.active, expected
        )));
    }
    if mask.bits.len() != x.len() || x.len() != g.n() {
        return Err(QuantizeError::MaskMismatch("length mismatch".into()));
    }
    let levels = levels_for_mask(x, mask);
    Ok(dynamics::field_cell(g, x, &levels))
}

fn enumerate_masks(n: usize, active: &[usize]) -> Vec<SectorMask> {
    let m = active.len();
    (0..1usize << m)
        .map(|c| {
            let bits: Vec<bool> = (0..m).map(|b| (c >> b) & 1 == 1).collect();
            SectorMask::new(n, active.to_vec(), &bits)
        })
        .collect()
}

/// All `2^M` sector limits of the field at `x`, with `M` the number of
/// components within `tol` of a half-integer.
pub fn krasowskii_vertices(
    g: &Graph,
    x: &[f64],
    tol: f64,
) -> Result<KrasowskiiHull, QuantizeError> {
    let active = boundary_set(x, tol);
    if active.len() > SECTOR_CAP {
        return Err(QuantizeError::TooManyBoundaryComponents {
            count: active.len(),
            cap: SECTOR_CAP,
        });
    }
    let vertices = enumerate_masks(x.len(), &active)
        .iter()
        .map(|mask| {
            let levels = levels_for_mask(x, mask);
            dynamics::field_cell(g, x, &levels)
        })
        .collect();
    Ok(KrasowskiiHull { base_point: x.to_vec(), vertices })
}

fn heaviside(t: f64) -> bool {
    t >= 0.0
}

fn mask_is_feasible(g: &Graph, x: &[f64], mask: &SectorMask) -> bool {
    let levels = levels_for_mask(x, mask);
    let f = dynamics::field_cell(g, x, &levels);
    mask.active.iter().all(|&i| heaviside(f[i]) == mask.bits[i])
}

/// Every sector whose limit field points into it: masks `B` with
/// `H((f_B)_i) = B_i` for all active `i`, `H` the right-continuous
/// Heaviside step. The list is never empty, and it has more than one
/// entry exactly at points with multiple admissible entry directions.
pub fn feasible_entry_sectors(
    g: &Graph,
    x: &[f64],
    tol: f64,
) -> Result<Vec<SectorMask>, QuantizeError> {
    let active = boundary_set(x, tol);
    if active.len() > SECTOR_CAP {
        return Err(QuantizeError::TooManyBoundaryComponents {
            count: active.len(),
            cap: SECTOR_CAP,
        });
    }
    Ok(enumerate_masks(x.len(), &active)
        .into_iter()
        .filter(|mask| mask_is_feasible(g, x, mask))
        .collect())
}

/// Constructive search for one feasible entry sector: start from the
/// all-lower sector and repeatedly pin to 1 every active component whose
/// limit field is nonnegative. Because the weights are nonnegative, a
/// component pinned to 1 keeps a nonnegative limit under any later pin, so
/// the loop settles in at most `M` passes on a member of
/// [`feasible_entry_sectors`].
pub fn feasible_entry_sector_fast(
    g: &Graph,
    x: &[f64],
    tol: f64,
) -> Result<SectorMask, QuantizeError> {
    let active = boundary_set(x, tol);
    if active.len() > SECTOR_CAP {
        return Err(QuantizeError::TooManyBoundaryComponents {
            count: active.len(),
            cap: SECTOR_CAP,
        });
    }
    let mut bits = vec![false; active.len()];
    for _ in 0..=active.len() {
        let mask = SectorMask::new(x.len(), active.clone(), &bits);
        let levels = levels_for_mask(x, &mask);
        let f = dynamics::field_cell(g, x, &levels);
        let mut pinned_any = false;
        for (b, &i) in active.iter().enumerate() {
            if !bits[b] && heaviside(f[i]) {
                bits[b] = true;
                pinned_any = true;
            }
        }
        if !pinned_any {
            debug_assert!(mask_is_feasible(g, x, &mask));
            return Ok(mask);
        }
    }
    // All components pinned to 1 on the last pass.
    let mask = SectorMask::new(x.len(), active, &bits);
    debug_assert!(mask_is_feasible(g, x, &mask));
    Ok(mask)
}
