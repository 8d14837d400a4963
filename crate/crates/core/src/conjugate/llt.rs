use crate::grid::{Grid, GridFn};
use crate::{Error, Result};

/// Reusable buffers for the 1-D transform.
#[derive(Default)]
pub(crate) struct Scratch {
    hx: Vec<f64>,
    hv: Vec<f64>,
}

/// Discrete conjugate of a sampled 1-D function: `max_x { y·x − h(x) }` for
/// every `y` in `ys`.
///
/// `+∞` samples are ignored. Runs in `O(X + Y)`.
pub fn llt_1d(xs: &[f64], vals: &[f64], ys: &[f64]) -> Result<Vec<f64>> {
    if xs.len() != vals.len() {
        return Err(Error::DimensionMismatch { expected: xs.len(), got: vals.len() });
    }
    if xs.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::Unsorted("primal abscissae"));
    }
    if ys.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::Unsorted("dual abscissae"));
    }
    if vals.iter().any(|v| v.is_nan() || *v == f64::NEG_INFINITY) {
        return Err(Error::InvalidGridFn("values must be real or +inf".into()));
    }
    if !vals.iter().any(|v| v.is_finite()) {
        return Err(Error::EmptyDomain);
    }
    let mut out = vec![0.0; ys.len()];
    conj_1d_into(xs, vals, ys, &mut out, &mut Scratch::default());
    Ok(out)
}

/// Unchecked kernel. Writes `−∞` everywhere when no value is finite.
pub(crate) fn conj_1d_into(xs: &[f64], vals: &[f64], ys: &[f64], out: &mut [f64], s: &mut Scratch) {
    lower_hull(xs, vals, &mut s.hx, &mut s.hv);
    let (hx, hv) = (&s.hx, &s.hv);
    let k = hx.len();
    if k == 0 {
        out.iter_mut().for_each(|o| *o = f64::NEG_INFINITY);
        return;
    }
    let eval = |j: usize, y: f64| y * hx[j] - hv[j];
    let mut j = 0;
    for (o, &y) in out.iter_mut().zip(ys) {
        // optimal vertex j satisfies slope(j-1, j) <= y <= slope(j, j+1)
        while j + 1 < k && (hv[j + 1] - hv[j]) < y * (hx[j + 1] - hx[j]) {
            j += 1;
        }
        let mut best = eval(j, y);
        if j + 1 < k {
            best = best.max(eval(j + 1, y));
        }
        if j > 0 {
            best = best.max(eval(j - 1, y));
        }
        *o = best;
    }
}

/// Lower convex hull of the finite points, by a monotone chain over the
/// already sorted abscissae. Collinear middle points are dropped.
fn lower_hull(xs: &[f64], vals: &[f64], hx: &mut Vec<f64>, hv: &mut Vec<f64>) {
    hx.clear();
    hv.clear();
    for (&x, &v) in xs.iter().zip(vals) {
        if !v.is_finite() {
            continue;
        }
        while hx.len() >= 2 {
            let n = hx.len();
            let (x0, v0, x1, v1) = (hx[n - 2], hv[n - 2], hx[n - 1], hv[n - 1]);
            // pop (x1, v1) unless the slope strictly increases
            if (v1 - v0) * (x - x1) >= (v - v1) * (x1 - x0) {
                hx.pop();
                hv.pop();
            } else {
                break;
            }
        }
        hx.push(x);
        hv.push(v);
    }
}

/// Factorized n-D discrete conjugate on `dual`, one dimension at a time in
/// ascending order. Returns the values in row-major order on `dual`.
///
/// Slices whose values are all `+∞` have conjugate `−∞`; the intermediate
/// tensor carries the negated partial conjugate so those become `+∞` and are
/// skipped by the next pass.
pub(crate) fn llt_values(primal: &Grid, values: &[f64], dual: &Grid) -> Vec<f64> {
    let n = primal.dims();
    let mut shape = primal.shape();
    let mut data = values.to_vec();
    let mut scratch = Scratch::default();
    for d in 0..n {
        let xs = primal.axis(d);
        let ys = dual.axis(d);
        let outer: usize = shape[..d].iter().product();
        let inner: usize = shape[d + 1..].iter().product();
        let (nx, ny) = (xs.len(), ys.len());
        let mut next = vec![0.0; outer * ny * inner];
        let mut slice = vec![0.0; nx];
        let mut res = vec![0.0; ny];
        for o in 0..outer {
            for i in 0..inner {
                for k in 0..nx {
                    slice[k] = data[(o * nx + k) * inner + i];
                }
                conj_1d_into(xs, &slice, ys, &mut res, &mut scratch);
                for k in 0..ny {
                    next[(o * ny + k) * inner + i] = -res[k];
                }
            }
        }
        data = next;
        shape[d] = ny;
    }
    data.iter_mut().for_each(|v| *v = -*v);
    data
}

/// Discrete conjugate of `f` at every point of `dual`.
pub fn llt_nd(f: &GridFn, dual: &Grid) -> Result<super::ConjugateResult> {
    if f.grid().dims() != dual.dims() {
        return Err(Error::DimensionMismatch { expected: f.grid().dims(), got: dual.dims() });
    }
    if !f.has_finite_support() {
        return Err(Error::EmptyDomain);
    }
    let values = llt_values(f.grid(), f.values(), dual);
    Ok(super::ConjugateResult {
        dual_grid: dual.clone(),
        values: GridFn::from_parts_unchecked(dual.clone(), values),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_dimensional_examples() {
        let r = llt_1d(&[-1.0, 0.0, 1.0], &[1.0, 0.0, 1.0], &[-2.0, -1.0, 0.0, 1.0, 2.0]).unwrap();
        assert_eq!(r, vec![1.0, 0.0, 0.0, 0.0, 1.0]);
        let r = llt_1d(&[0.0], &[0.0], &[-3.0, 1.0, 5.0]).unwrap();
        assert_eq!(r, vec![0.0; 3]);
        let r = llt_1d(&[-1.0, 0.0, 1.0], &[-2.0, 0.0, 2.0], &[0.0, 2.0, 3.0]).unwrap();
        assert_eq!(r, vec![2.0, 0.0, 1.0]);
    }

    #[test]
    fn skips_infinite_and_rejects_bad_input() {
        let inf = f64::INFINITY;
        let r = llt_1d(&[-1.0, 0.0, 1.0], &[inf, 0.0, inf], &[-1.0, 2.0]).unwrap();
        assert_eq!(r, vec![0.0, 0.0]);
        assert!(matches!(llt_1d(&[0.0, 1.0], &[inf, inf], &[0.0]), Err(Error::EmptyDomain)));
        assert!(llt_1d(&[1.0, 0.0], &[0.0, 0.0], &[0.0]).is_err());
        assert!(llt_1d(&[0.0, 1.0], &[0.0, 0.0], &[1.0, 1.0]).is_err());
    }

    #[test]
    fn nonconvex_input_uses_hull() {
        let xs = [0.0, 1.0, 2.0, 3.0];
        let vals = [0.0, 5.0, -1.0, 4.0];
        let ys: Vec<f64> = (-20..=20).map(|k| k as f64 * 0.37).collect();
        let r = llt_1d(&xs, &vals, &ys).unwrap();
        for (y, v) in ys.iter().zip(r) {
            let b = xs.iter().zip(&vals).map(|(x, h)| y * x - h).fold(f64::NEG_INFINITY, f64::max);
            assert!((v - b).abs() < 1e-12);
        }
    }

    #[test]
    fn nd_examples() {
        let g = Grid::uniform(&[-1.0, -1.0], &[1.0, 1.0], &[3, 3]).unwrap();
        let f = GridFn::from_fn(g, |x| x[0] * x[0] + x[1] * x[1]).unwrap();
        let dual = Grid::uniform(&[-2.0, -2.0], &[2.0, 2.0], &[3, 3]).unwrap();
        let c = llt_nd(&f, &dual).unwrap();
        assert_eq!(c.values.lerp(&[0.0, 0.0]), 0.0);

        let g = Grid::uniform(&[0.0, 0.0], &[1.0, 2.0], &[2, 3]).unwrap();
        let mut vals = vec![f64::INFINITY; 6];
        vals[4] = 0.5; // x0 = (1, 1)
        let f = GridFn::new(g, vals).unwrap();
        let c = llt_nd(&f, &dual).unwrap();
        for (i, y) in dual.points().enumerate() {
            assert_eq!(c.values.values()[i], y[0] + y[1] - 0.5);
        }
    }
}
