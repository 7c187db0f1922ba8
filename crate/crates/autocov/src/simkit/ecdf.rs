use crate::error::{Error, Result};

/// Empirical distribution of a finite sample: right-continuous step
/// function with jumps 1/n at the sorted values.
#[derive(Clone, Debug, PartialEq)]
pub struct Ecdf {
    xs: Vec<f64>,
}

impl Ecdf {
    pub fn from_values(mut xs: Vec<f64>) -> Result<Self> {
        if xs.is_empty() {
            return Err(Error::Domain("ECDF needs a nonempty sample".into()));
        }
        if xs.iter().any(|v| !v.is_finite()) {
            return Err(Error::Domain("ECDF sample must be finite".into()));
        }
        xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        Ok(Ecdf { xs })
    }

    pub fn len(&self) -> usize {
        self.xs.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn values(&self) -> &[f64] {
        &self.xs
    }

    /// F(x) = fraction of sample points <= x.
    pub fn eval(&self, x: f64) -> f64 {
        let k = self.xs.partition_point(|&v| v <= x);
        k as f64 / self.xs.len() as f64
    }
}

/// Exact sup-distance between two ECDFs, evaluated at the jump points of
/// both (where the supremum of a difference of right-continuous step
/// functions is attained).
pub fn ks_distance(f: &Ecdf, g: &Ecdf) -> f64 {
    let (a, b) = (&f.xs, &g.xs);
    let (n, m) = (a.len() as f64, b.len() as f64);
    let mut i = 0usize;
    let mut j = 0usize;
    let mut best = 0.0f64;
    while i < a.len() || j < b.len() {
        // next distinct jump value across both samples
        let x = match (a.get(i), b.get(j)) {
            (Some(&ai), Some(&bj)) => ai.min(bj),
            (Some(&ai), None) => ai,
            (None, Some(&bj)) => bj,
            (None, None) => break,
        };
        while i < a.len() && a[i] == x {
            i += 1;
        }
        while j < b.len() && b[j] == x {
            j += 1;
        }
        best = best.max((i as f64 / n - j as f64 / m).abs());
    }
    best
}
