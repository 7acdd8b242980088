//! Boundary sweeps of two rate axes and their upper hull.

use super::model::RegionModel;
use super::optimize::{maximize, MaximizeOptions};
use super::params::{Axis, CovertParams, RateKeyTuple, RegionQuery};
use crate::error::{Error, Result};
use crate::units::{fmt_sig, Unit};
use serde::Serialize;
use std::collections::BTreeMap;
use std::f64::consts::FRAC_PI_2;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

const TIE_WEIGHT: f64 = 1e-7;

#[derive(Debug, Clone)]
pub struct SweepOptions {
    /// Number of weight directions spread over the quarter circle.
    pub angles: usize,
    /// Random starts at the first angle.
    pub first_starts: usize,
    /// Random starts at later angles, next to the warm start.
    pub starts_per_angle: usize,
    pub phases: Option<usize>,
    pub seed: u64,
}

impl Default for SweepOptions {
    fn default() -> Self {
        Self { angles: 181, first_starts: 64, starts_per_angle: 8, phases: None, seed: 0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundaryPoint {
    pub axis1: f64,
    pub axis2: f64,
    pub tuple: RateKeyTuple,
    pub params: CovertParams,
}

/// Maximises `cos θ·axis1 + sin θ·axis2` for θ over [0, π/2] and returns the
/// upper hull of the maximisers, ordered by increasing `axis1`.
///
/// `base` supplies key budgets and fixed-rate constraints; its weights are
/// replaced at each angle.
pub fn boundary_sweep<M: RegionModel>(
    model: &M,
    axes: [Axis; 2],
    base: &RegionQuery,
    opts: &SweepOptions,
) -> Result<Vec<BoundaryPoint>> {
    let lc = model.covert_users();
    let n_axes = lc + model.nc_sizes().len();
    let idx = [axes[0].weight_index(lc), axes[1].weight_index(lc)];
    if idx.iter().any(|&i| i >= n_axes) || idx[0] == idx[1] {
        return Err(Error::InvalidParams("sweep needs two distinct rate axes of the model".into()));
    }
    let n = opts.angles.max(2);
    let mut points = Vec::with_capacity(n);
    let mut hint: Option<CovertParams> = None;
    let mut last_err = None;
    for i in 0..n {
        let th = FRAC_PI_2 * i as f64 / (n - 1) as f64;
        let mut weights = vec![0.0; n_axes];
        weights[idx[0]] = th.cos() + TIE_WEIGHT;
        weights[idx[1]] = th.sin() + TIE_WEIGHT;
        let q = RegionQuery { weights, ..base.clone() };
        let mopts = MaximizeOptions {
            starts: if hint.is_some() { opts.starts_per_angle } else { opts.first_starts },
            phases: opts.phases,
            seed: opts.seed.wrapping_add(i as u64),
            hints: hint.iter().cloned().collect(),
            refine: 2,
        };
        match maximize(model, &q, &mopts) {
            Ok(m) => {
                hint = Some(m.params.clone());
                points.push(BoundaryPoint {
                    axis1: m.tuple.get(axes[0]),
                    axis2: m.tuple.get(axes[1]),
                    tuple: m.tuple,
                    params: m.params,
                });
            }
            Err(e @ Error::Infeasible(_)) => last_err = Some(e),
            Err(e) => return Err(e),
        }
    }
    if points.is_empty() {
        return Err(last_err.unwrap_or_else(|| Error::Infeasible("no boundary point found".into())));
    }
    let keep = upper_hull(&points.iter().map(|p| (p.axis1, p.axis2)).collect::<Vec<_>>());
    Ok(keep.into_iter().map(|i| points[i].clone()).collect())
}

fn cross(o: (f64, f64), a: (f64, f64), b: (f64, f64)) -> f64 {
    (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0)
}

/// Indices of the north-east upper hull of `pts`, from the highest point to
/// the rightmost one, ordered by increasing first coordinate.
pub fn upper_hull(pts: &[(f64, f64)]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..pts.len()).filter(|&i| pts[i].0.is_finite() && pts[i].1.is_finite()).collect();
    order.sort_by(|&a, &b| pts[a].0.total_cmp(&pts[b].0).then(pts[a].1.total_cmp(&pts[b].1)));
    let mut hull: Vec<usize> = Vec::new();
    for &i in &order {
        // drop points with equal x below the new one
        while let Some(&j) = hull.last() {
            if pts[j].0 == pts[i].0 {
                hull.pop();
            } else {
                break;
            }
        }
        while hull.len() >= 2 && cross(pts[hull[hull.len() - 2]], pts[hull[hull.len() - 1]], pts[i]) >= 0.0 {
            hull.pop();
        }
        hull.push(i);
    }
    let Some(top) = (0..hull.len()).max_by(|&a, &b| pts[hull[a]].1.total_cmp(&pts[hull[b]].1).then(b.cmp(&a)))
    else {
        return hull;
    };
    hull.split_off(top)
}

/// Writes the boundary CSV (rates and keys in `unit`) and a companion
/// `<stem>.params.json` with the witness of each row. Returns the JSON path.
pub fn write_boundary_csv(path: &Path, points: &[BoundaryPoint], unit: Unit) -> Result<PathBuf> {
    let (lc, lnc) = points.first().map_or((2, 1), |p| (p.tuple.r.len(), p.tuple.r_nc.len()));
    let mut out = String::from("axis1,axis2");
    for l in 0..lc {
        write!(out, ",r{}", l + 1).unwrap();
    }
    for j in 0..lnc {
        write!(out, ",R{}", lc + j + 1).unwrap();
    }
    for l in 0..lc {
        write!(out, ",k{}", l + 1).unwrap();
    }
    out.push_str(",params_id\n");
    let mut params = BTreeMap::new();
    for (i, p) in points.iter().enumerate() {
        let id = format!("p{i:04}");
        let t = &p.tuple;
        let cells: Vec<String> = [p.axis1, p.axis2]
            .iter()
            .chain(&t.r)
            .chain(&t.r_nc)
            .chain(&t.k)
            .map(|v| fmt_sig(unit.from_nats(*v), 12))
            .collect();
        writeln!(out, "{},{id}", cells.join(",")).unwrap();
        params.insert(id, &p.params);
    }
    std::fs::write(path, out).map_err(|e| Error::io(path, e))?;
    let json_path = path.with_extension("params.json");
    let text = serde_json::to_string_pretty(&params)? + "\n";
    std::fs::write(&json_path, text).map_err(|e| Error::io(&json_path, e))?;
    Ok(json_path)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hull_of_square_with_interior_points() {
        let pts = [(0.0, 1.0), (0.5, 0.5), (1.0, 0.0), (0.9, 0.9), (0.2, 0.99), (1.0, 0.3)];
        let h = upper_hull(&pts);
        assert_eq!(h, vec![0, 4, 3, 5]);
    }

    #[test]
    fn hull_drops_dominated_and_collinear() {
        let pts = [(0.0, 2.0), (1.0, 1.0), (2.0, 0.0), (0.5, 1.0)];
        assert_eq!(upper_hull(&pts), vec![0, 2]);
    }
}
