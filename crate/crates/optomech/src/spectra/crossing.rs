use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{eigensolve, eigenvalues_real, eigensolve_real, state_composition, Component};
use crate::error::{Error, Result};
use crate::fockspace::OperatorMatrix;
use crate::models::{HamiltonianTerms, ModelParams, Param, MECH_MODE};
use crate::scalar::Real;

/// Number of grid points in the coarse scan that certifies a single gap minimum.
pub const PRESCAN_POINTS: usize = 101;
/// Final bracket width of the golden-section search.
const AXIS_TOL: f64 = 1e-10;
/// Overlaps closer than this are treated as a tie.
const OVERLAP_TIE: f64 = 1e-6;

/// Energy levels `E_i - E_0` followed continuously across a parameter grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumSweep {
    pub axis_name: String,
    pub axis_values: Vec<f64>,
    /// `tracked_levels[level][point]`.
    pub tracked_levels: Vec<Vec<f64>>,
    /// Smallest winning overlap at each point (1 at the first point).
    pub overlap_continuity: Vec<f64>,
}

/// Location and character of the minimum gap between two adjacent levels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossingReport {
    pub axis_name: String,
    pub level_pair: (usize, usize),
    pub axis_value_at_min: f64,
    pub splitting: f64,
    /// Bare components of the lower and upper eigenstate at the minimum.
    pub state_composition: [Vec<Component>; 2],
    /// Phonon-number difference between the two dominant components of the
    /// lower state.
    pub resonance_order: usize,
}

struct Point<T: Real> {
    values: DVector<T>,
    vectors: DMatrix<T>,
}

fn check_grid<T: Real>(grid: &[T]) -> Result<()> {
    if grid.len() < 2 {
        return Err(Error::InvalidParameter("a sweep needs at least two grid points".into()));
    }
    if grid.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::InvalidParameter("sweep grid must be strictly increasing".into()));
    }
    Ok(())
}

/// Diagonalizes the model at every grid point and follows the lowest
/// `n_levels` levels by maximal eigenvector overlap with the previous point.
pub fn sweep<T: Real>(p: &ModelParams<T>, axis: Param, grid: &[T], n_levels: usize) -> Result<SpectrumSweep> {
    check_grid(grid)?;
    p.validate()?;
    let terms = HamiltonianTerms::for_params(p)?;
    let dim = terms.space().dim();
    if n_levels == 0 || n_levels > dim {
        return Err(Error::IndexOutOfRange { what: "level count", index: n_levels, len: dim });
    }
    let window = (n_levels + 4).min(dim);
    let points: Vec<Point<T>> = grid
        .par_iter()
        .map(|&x| {
            let system = p.system.with(axis, x)?;
            let (values, vectors) = eigensolve_real(terms.assemble(&system)?)?;
            Ok(Point { values: values.rows(0, window).into_owned(), vectors: vectors.columns(0, window).into_owned() })
        })
        .collect::<Result<_>>()?;

    let mut assign: Vec<usize> = (0..n_levels).collect();
    let mut tracked = vec![Vec::with_capacity(grid.len()); n_levels];
    let mut continuity = Vec::with_capacity(grid.len());
    for (j, pt) in points.iter().enumerate() {
        if j > 0 {
            let prev = &points[j - 1];
            let overlaps = prev.vectors.transpose() * &pt.vectors;
            let mut candidates = Vec::with_capacity(n_levels * window);
            for (slot, &from) in assign.iter().enumerate() {
                for to in 0..window {
                    let o = overlaps[(from, to)].abs().as_f64();
                    let de = (pt.values[to] - prev.values[from]).abs().as_f64();
                    candidates.push((slot, to, o, de));
                }
            }
            // Overlaps equal to within OVERLAP_TIE fall into one bucket, ordered by energy jump.
            let bucket = |o: f64| (o / OVERLAP_TIE).round() as i64;
            candidates.sort_by(|a, b| bucket(b.2).cmp(&bucket(a.2)).then(a.3.total_cmp(&b.3)));
            let mut next = vec![usize::MAX; n_levels];
            let mut taken = vec![false; window];
            let mut worst = 1.0f64;
            for (slot, to, o, _) in candidates {
                if next[slot] == usize::MAX && !taken[to] {
                    next[slot] = to;
                    taken[to] = true;
                    worst = worst.min(o);
                }
            }
            assign = next;
            continuity.push(worst);
        } else {
            continuity.push(1.0);
        }
        let e0 = pt.values[0];
        for (slot, &k) in assign.iter().enumerate() {
            tracked[slot].push((pt.values[k] - e0).as_f64());
        }
    }
    Ok(SpectrumSweep {
        axis_name: axis.name().to_string(),
        axis_values: grid.iter().map(|x| x.as_f64()).collect(),
        tracked_levels: tracked,
        overlap_continuity: continuity,
    })
}

fn gap_at<T: Real>(terms: &HamiltonianTerms<T>, p: &ModelParams<T>, axis: Param, x: T, lower: usize) -> Result<T> {
    let e = eigenvalues_real(terms.assemble(&p.system.with(axis, x)?)?);
    if lower + 1 >= e.len() {
        return Err(Error::IndexOutOfRange { what: "level", index: lower + 1, len: e.len() });
    }
    Ok(e[lower + 1] - e[lower])
}

/// Gap `E_{lower+1} - E_lower` on `points` evenly spaced values of `axis`.
pub fn gap_scan<T: Real>(
    p: &ModelParams<T>,
    axis: Param,
    bracket: (T, T),
    lower: usize,
    points: usize,
) -> Result<Vec<(T, T)>> {
    let terms = HamiltonianTerms::for_params(p)?;
    let (lo, hi) = bracket;
    let step = (hi - lo) / T::from_count(points.max(2) - 1);
    (0..points.max(2))
        .into_par_iter()
        .map(|i| {
            let x = lo + step * T::from_count(i);
            Ok((x, gap_at(&terms, p, axis, x, lower)?))
        })
        .collect()
}

/// Finds the minimum of `E_{i+1} - E_i` inside `bracket`.
///
/// A coarse scan must show exactly one interior local minimum; the minimum is
/// then refined by golden-section search.
pub fn find_min_splitting<T: Real>(
    p: &ModelParams<T>,
    axis: Param,
    bracket: (T, T),
    level_pair: (usize, usize),
) -> Result<CrossingReport> {
    let (lo, hi) = bracket;
    let fail = |reason: String| Error::NoBracketedMinimum { lo: lo.as_f64(), hi: hi.as_f64(), reason };
    if level_pair.1 != level_pair.0 + 1 {
        return Err(Error::InvalidParameter("level pair must be adjacent (i, i+1)".into()));
    }
    if !(lo < hi) {
        return Err(fail("empty bracket".into()));
    }
    p.validate()?;
    let lower = level_pair.0;
    let scan = gap_scan(p, axis, bracket, lower, PRESCAN_POINTS)?;
    let minima: Vec<usize> = (1..scan.len() - 1)
        .filter(|&j| scan[j].1 < scan[j - 1].1 && scan[j].1 <= scan[j + 1].1)
        .collect();
    let j = match minima.as_slice() {
        [j] => *j,
        [] => return Err(fail("gap is monotonic or minimal at an edge".into())),
        many => return Err(fail(format!("{} local minima in the coarse scan", many.len()))),
    };

    let terms = HamiltonianTerms::for_params(p)?;
    let f = |x: T| gap_at(&terms, p, axis, x, lower);
    let (mut a, mut b) = (scan[j - 1].0, scan[j + 1].0);
    let inv_phi = T::lit((5f64.sqrt() - 1.0) / 2.0);
    let mut c = b - (b - a) * inv_phi;
    let mut d = a + (b - a) * inv_phi;
    let (mut fc, mut fd) = (f(c)?, f(d)?);
    let (mut best_x, mut best_f) = (scan[j].0, scan[j].1);
    while (b - a).as_f64() > AXIS_TOL {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - (b - a) * inv_phi;
            fc = f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + (b - a) * inv_phi;
            fd = f(d)?;
        }
        for (x, g) in [(c, fc), (d, fd)] {
            if g < best_f {
                best_x = x;
                best_f = g;
            }
        }
    }

    let h = OperatorMatrix::from_real(terms.space().clone(), &terms.assemble(&p.system.with(axis, best_x)?)?)?;
    let sol = eigensolve(&h)?;
    let lower_state = state_composition(&sol, lower, None)?;
    let upper_state = state_composition(&sol, lower + 1, None)?;
    let space = &sol.space;
    let mech = space.qubit_count() + MECH_MODE;
    let col = sol.vectors.column(lower);
    let mut idx: Vec<usize> = (0..sol.dim()).collect();
    idx.sort_by(|&x, &y| col[y].norm_sqr().as_f64().total_cmp(&col[x].norm_sqr().as_f64()));
    let k0 = space.occupations(idx[0])?[mech];
    let k1 = space.occupations(idx[1])?[mech];
    Ok(CrossingReport {
        axis_name: axis.name().to_string(),
        level_pair,
        axis_value_at_min: best_x.as_f64(),
        splitting: (sol.values[lower + 1] - sol.values[lower]).as_f64(),
        state_composition: [lower_state, upper_state],
        resonance_order: k0.abs_diff(k1),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::System;

    fn detuned_single(lambda: f64) -> ModelParams<f64> {
        ModelParams::new(System::SingleAtomSingleMode { omega_c: 0.6, omega_a: 0.4, g: 0.03, lambda })
    }

    fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
        (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
    }

    #[test]
    fn free_levels_are_straight_lines() {
        let p = ModelParams::new(System::SingleAtomSingleMode { omega_c: 0.6, omega_a: 0.4, g: 0.0, lambda: 0.0 });
        let grid = linspace(0.55, 0.65, 21);
        let s = sweep(&p, Param::OmegaC, &grid, 8).unwrap();
        for level in &s.tracked_levels {
            let slope = (level[1] - level[0]) / (grid[1] - grid[0]);
            for (j, e) in level.iter().enumerate() {
                assert!((e - level[0] - slope * (grid[j] - grid[0])).abs() < 1e-12);
            }
            assert!((slope - slope.round()).abs() < 1e-9);
        }
        assert!(s.overlap_continuity.iter().all(|&o| (o - 1.0).abs() < 1e-12));
    }

    #[test]
    fn single_crossing_in_window() {
        let p = detuned_single(0.005);
        let r = find_min_splitting(&p, Param::OmegaC, (0.55, 0.65), (3, 4)).unwrap();
        assert!((r.splitting - 1.83e-3).abs() < 0.05 * 1.83e-3, "{}", r.splitting);
        assert!((r.axis_value_at_min - 0.599).abs() < 2e-3);
        assert_eq!(r.resonance_order, 1);
        for state in &r.state_composition {
            let w: f64 = state.iter().map(Component::weight).sum();
            assert!((w - 1.0).abs() < 1e-8);
        }
    }

    #[test]
    fn stronger_atom_coupling_doubles_gap() {
        let r = find_min_splitting(&detuned_single(0.01), Param::OmegaC, (0.55, 0.65), (3, 4)).unwrap();
        assert!((r.splitting - 3.64e-3).abs() < 0.05 * 3.64e-3, "{}", r.splitting);
    }

    #[test]
    fn decoupled_atom_crosses_exactly() {
        let r = find_min_splitting(&detuned_single(0.0), Param::OmegaC, (0.55, 0.65), (3, 4)).unwrap();
        assert!(r.splitting < 1e-9, "{}", r.splitting);
    }

    #[test]
    fn monotonic_gap_is_rejected() {
        let e = find_min_splitting(&detuned_single(0.005), Param::OmegaC, (0.61, 0.65), (3, 4));
        assert!(matches!(e, Err(Error::NoBracketedMinimum { .. })));
    }

    #[test]
    fn golden_section_matches_refined_grid() {
        let p = detuned_single(0.005);
        let r = find_min_splitting(&p, Param::OmegaC, (0.55, 0.65), (3, 4)).unwrap();
        let x = r.axis_value_at_min;
        let grid = linspace(x - 2e-4, x + 2e-4, 401);
        let scan_min = grid
            .iter()
            .map(|&w| {
                let q = ModelParams::new(p.system.with(Param::OmegaC, w).unwrap());
                let e = eigenvalues_real(HamiltonianTerms::for_params(&q).unwrap().assemble(&q.system).unwrap());
                e[4] - e[3]
            })
            .fold(f64::INFINITY, f64::min);
        assert!((scan_min - r.splitting).abs() < 1e-6);
        assert!(r.splitting <= scan_min + 1e-12);
    }

    #[test]
    fn two_atom_crossing_near_sum_resonance() {
        let p = ModelParams::new(System::TwoAtomsSingleMode {
            omega_c: 0.7,
            omega_a1: 0.45,
            omega_a2: 0.55,
            g: 0.01,
            lambda1: 0.01,
            lambda2: 0.01,
        });
        let r = find_min_splitting(&p, Param::OmegaA2, (0.52, 0.58), (4, 5)).unwrap();
        assert!((r.axis_value_at_min - 0.55).abs() < 0.01, "{}", r.axis_value_at_min);
        assert_eq!(r.resonance_order, 1);
    }
}
