use crate::error::{Error, Result};
use crate::geometry::{lp, Action, ActionSet};
use crate::tol;

/// Reduces a point cloud to the extreme points of its convex hull.
///
/// Two-state inputs use a monotone-chain hull; higher dimensions drop points
/// one at a time when an LP finds them inside the hull of the survivors.
pub fn hull_reduce(points: Vec<Action>) -> Result<ActionSet> {
    let dim = points.first().ok_or(Error::EmptyInput)?.dim();
    if let Some(bad) = points.iter().find(|a| a.dim() != dim) {
        return Err(Error::DimensionMismatch {
            expected: dim,
            found: bad.dim(),
        });
    }
    let scale = points
        .iter()
        .flat_map(|a| a.payoffs().iter())
        .fold(1.0f64, |m, x| m.max(x.abs()));
    let points = dedup(points);
    let vertices = if points.len() <= 1 {
        points
    } else if dim == 2 {
        planar_hull(points)
    } else {
        lp_reduce(points, scale)?
    };
    Ok(ActionSet::reduced_unchecked(vertices))
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= tol::FEAS * (1.0 + a.abs().max(b.abs()))
}

/// Drops near-duplicates, keeping input order. Candidates are scanned in
/// order of the first coordinate, so each point only meets the kept points
/// whose first coordinate is within tolerance.
fn dedup(points: Vec<Action>) -> Vec<Action> {
    let mut order: Vec<usize> = (0..points.len()).collect();
    order.sort_by(|&i, &j| {
        points[i].payoffs()[0]
            .total_cmp(&points[j].payoffs()[0])
            .then(i.cmp(&j))
    });
    let mut kept: Vec<usize> = Vec::with_capacity(points.len());
    let mut keep = vec![false; points.len()];
    for i in order {
        let p = points[i].payoffs();
        let dup = kept
            .iter()
            .rev()
            .take_while(|&&j| close(points[j].payoffs()[0], p[0]))
            .any(|&j| points[j].payoffs().iter().zip(p).all(|(a, b)| close(*a, *b)));
        if !dup {
            kept.push(i);
            keep[i] = true;
        }
    }
    points
        .into_iter()
        .zip(keep)
        .filter_map(|(a, k)| k.then_some(a))
        .collect()
}

fn lp_reduce(mut points: Vec<Action>, scale: f64) -> Result<Vec<Action>> {
    let mut i = 0;
    while i < points.len() && points.len() > 1 {
        let others: Vec<&[f64]> = points
            .iter()
            .enumerate()
            .filter(|(j, _)| *j != i)
            .map(|(_, a)| a.payoffs())
            .collect();
        let residual = lp::hull_residual(&others, points[i].payoffs())?;
        if residual <= tol::FEAS * scale {
            points.remove(i);
        } else {
            i += 1;
        }
    }
    Ok(points)
}

fn cross(o: &[f64], a: &[f64], b: &[f64]) -> f64 {
    (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
}

fn length(o: &[f64], a: &[f64]) -> f64 {
    (a[0] - o[0]).hypot(a[1] - o[1])
}

/// Andrew's monotone chain. A middle point is dropped when the turn it makes
/// has sine at most `FEAS`, so payoffs of very different magnitudes do not
/// swamp each other.
fn planar_hull(mut points: Vec<Action>) -> Vec<Action> {
    points.sort_by(|a, b| {
        let (a, b) = (a.payoffs(), b.payoffs());
        a[0].partial_cmp(&b[0])
            .unwrap()
            .then(a[1].partial_cmp(&b[1]).unwrap())
    });
    let n = points.len();
    let mut hull: Vec<usize> = Vec::with_capacity(2 * n);
    for pass in 0..2 {
        let start = hull.len();
        let order: Box<dyn Iterator<Item = usize>> = if pass == 0 {
            Box::new(0..n)
        } else {
            Box::new((0..n).rev())
        };
        for i in order {
            while hull.len() >= start + 2 {
                let a = points[hull[hull.len() - 2]].payoffs();
                let b = points[hull[hull.len() - 1]].payoffs();
                let c = points[i].payoffs();
                if cross(a, b, c) <= tol::FEAS * length(a, b) * length(b, c) {
                    hull.pop();
                } else {
                    break;
                }
            }
            hull.push(i);
        }
        hull.pop();
    }
    let mut keep: Vec<usize> = hull;
    keep.sort_unstable();
    keep.dedup();
    points
        .into_iter()
        .enumerate()
        .filter(|(i, _)| keep.binary_search(i).is_ok())
        .map(|(_, a)| a)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn acts(rows: &[[f64; 2]]) -> Vec<Action> {
        rows.iter().map(|r| Action::new(r.to_vec()).unwrap()).collect()
    }

    fn sorted(set: &ActionSet) -> Vec<Vec<f64>> {
        let mut v: Vec<Vec<f64>> = set.vertices().iter().map(|a| a.payoffs().to_vec()).collect();
        v.sort_by(|a, b| a.partial_cmp(b).unwrap());
        v
    }

    #[test]
    fn dedup_keeps_first_of_each_cluster_in_input_order() {
        let pts = acts(&[
            [3.0, 1.0],
            [-1.0, 2.0],
            [3.0 + 1e-12, 1.0],
            [0.0, 0.0],
            [-1.0, 2.0 - 1e-12],
            [3.0, 1.5],
        ]);
        let out: Vec<Vec<f64>> = dedup(pts).iter().map(|a| a.payoffs().to_vec()).collect();
        assert_eq!(out, vec![vec![3.0, 1.0], vec![-1.0, 2.0], vec![0.0, 0.0], vec![3.0, 1.5]]);
    }

    #[test]
    fn example_points_are_all_extreme() {
        let set = hull_reduce(acts(&[[3.0, 0.0], [2.0, 2.0], [0.0, 2.5], [0.0, 0.0]])).unwrap();
        assert_eq!(set.len(), 4);
        assert!(set.is_reduced());
    }

    #[test]
    fn duplicates_collapse() {
        let set = hull_reduce(acts(&[[1.0, 1.0], [1.0, 1.0]])).unwrap();
        assert_eq!(sorted(&set), vec![vec![1.0, 1.0]]);
    }

    #[test]
    fn midpoint_is_dropped() {
        let set = hull_reduce(acts(&[[0.0, 0.0], [2.0, 2.0], [1.0, 1.0]])).unwrap();
        assert_eq!(sorted(&set), vec![vec![0.0, 0.0], vec![2.0, 2.0]]);
    }

    #[test]
    fn lp_path_drops_interior_points() {
        let pts = vec![
            Action::new(vec![0.0, 0.0, 0.0]).unwrap(),
            Action::new(vec![1.0, 0.0, 0.0]).unwrap(),
            Action::new(vec![0.0, 1.0, 0.0]).unwrap(),
            Action::new(vec![0.0, 0.0, 1.0]).unwrap(),
            Action::new(vec![0.2, 0.2, 0.2]).unwrap(),
            Action::new(vec![0.5, 0.5, 0.0]).unwrap(),
        ];
        let set = hull_reduce(pts).unwrap();
        assert_eq!(set.len(), 4);
    }

    #[test]
    fn errors() {
        assert_eq!(hull_reduce(vec![]).unwrap_err(), Error::EmptyInput);
        let mixed = vec![
            Action::new(vec![0.0, 0.0]).unwrap(),
            Action::new(vec![0.0, 0.0, 1.0]).unwrap(),
        ];
        assert!(matches!(hull_reduce(mixed), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn planar_hull_keeps_small_vertices_next_to_huge_ones() {
        let set = hull_reduce(acts(&[
            [1.0, -2.7e43],
            [1.0 - 1e-6, 1.0 - 1e-6],
            [1.0 - 1e-3, 1.0 - 1e-9],
            [0.5, 0.5],
        ]))
        .unwrap();
        let support = set.support(&[0.5, 0.5]);
        assert_eq!(support.argmax[0].payoffs(), &[1.0 - 1e-6, 1.0 - 1e-6]);
        assert_eq!(set.len(), 4);
    }
}
