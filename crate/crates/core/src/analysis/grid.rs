use crate::error::{Error, Result};

/// Number of subdivisions per edge for a grid of the given pitch.
pub fn grid_subdivisions(pitch: f64) -> Result<usize> {
    if !(pitch > 0.0 && pitch <= 1.0) {
        return Err(Error::InvalidInput(format!("grid pitch {pitch} outside (0, 1]")));
    }
    Ok((1.0 / pitch - 1e-9).ceil() as usize)
}

/// Visits every point of the simplex grid `{i / n : i in N^dim, sum i = n}`.
pub fn for_each_grid_point(dim: usize, n: usize, mut f: impl FnMut(&[f64])) {
    let mut counts = vec![0usize; dim];
    let mut point = vec![0.0; dim];
    visit(&mut counts, &mut point, 0, n, n, &mut f);
}

fn visit(
    counts: &mut [usize],
    point: &mut [f64],
    k: usize,
    left: usize,
    n: usize,
    f: &mut impl FnMut(&[f64]),
) {
    let last = counts.len() - 1;
    if k == last {
        counts[k] = left;
        point[k] = left as f64 / n as f64;
        f(point);
        return;
    }
    for i in 0..=left {
        counts[k] = i;
        point[k] = i as f64 / n as f64;
        visit(counts, point, k + 1, left - i, n, f);
    }
}
