//! Samples of a function on the uniform grid `x_j = j h`.

use std::ops::Range;

use crate::error::{domain, Error, Result};

/// Values `u[i]` at `x = (j0 + i) h`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridField {
    h: f64,
    j0: i64,
    u: Vec<f64>,
}

impl GridField {
    pub fn new(h: f64, j0: i64, u: Vec<f64>) -> Result<Self> {
        if !(h > 0.0) || !h.is_finite() {
            return domain(format!("grid spacing must be positive, got {h}"));
        }
        if u.is_empty() {
            return domain("grid field must not be empty");
        }
        Ok(GridField { h, j0, u })
    }

    /// Sample `f` at `x_j`, `j = j0 .. j0 + n`.
    pub fn from_fn(h: f64, j0: i64, n: usize, f: impl Fn(f64) -> f64) -> Result<Self> {
        let u = (0..n).map(|i| f((j0 + i as i64) as f64 * h)).collect();
        Self::new(h, j0, u)
    }

    /// Sample `f` on the symmetric window `j = -n ..= n`.
    pub fn symmetric(h: f64, n: usize, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::from_fn(h, -(n as i64), 2 * n + 1, f)
    }

    /// Same grid, new values.
    pub fn with_values(&self, u: Vec<f64>) -> Result<Self> {
        if u.len() != self.u.len() {
            return domain(format!(
                "expected {} values, got {}",
                self.u.len(),
                u.len()
            ));
        }
        Ok(GridField { h: self.h, j0: self.j0, u })
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn j0(&self) -> i64 {
        self.j0
    }

    pub fn len(&self) -> usize {
        self.u.len()
    }

    pub fn is_empty(&self) -> bool {
        self.u.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.u
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.u
    }

    pub fn into_values(self) -> Vec<f64> {
        self.u
    }

    /// Grid indices covered by the window.
    pub fn indices(&self) -> Range<i64> {
        self.j0..self.j0 + self.u.len() as i64
    }

    /// Coordinate of the `i`-th sample.
    pub fn x(&self, i: usize) -> f64 {
        (self.j0 + i as i64) as f64 * self.h
    }

    pub fn xs(&self) -> Vec<f64> {
        (0..self.u.len()).map(|i| self.x(i)).collect()
    }

    /// Value at grid index `j`, if inside the window.
    pub fn at(&self, j: i64) -> Option<f64> {
        let i = j - self.j0;
        if i < 0 {
            return None;
        }
        self.u.get(i as usize).copied()
    }

    /// Half-width `n` if the window is `-n ..= n`.
    pub fn half_width(&self) -> Option<usize> {
        let n = self.u.len();
        (n % 2 == 1 && self.j0 == -((n / 2) as i64)).then_some(n / 2)
    }

    /// `h sum u_j`.
    pub fn mass(&self) -> f64 {
        self.h * self.u.iter().sum::<f64>()
    }

    pub fn sup_norm(&self) -> f64 {
        self.u.iter().fold(0.0f64, |a, v| a.max(v.abs()))
    }

    /// Checks that `range` lies inside the window and returns it as local
    /// offsets.
    pub fn local_range(&self, range: &Range<i64>) -> Result<Range<usize>> {
        let w = self.indices();
        if range.start < w.start || range.end > w.end || range.start > range.end {
            return Err(Error::OutOfBounds {
                start: range.start,
                end: range.end,
                len: self.u.len(),
            });
        }
        Ok((range.start - w.start) as usize..(range.end - w.start) as usize)
    }
}

/// Largest absolute difference between two equally long slices.
pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .fold(0.0f64, |m, (x, y)| m.max((x - y).abs()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn coordinates_and_ranges() {
        let f = GridField::symmetric(0.5, 4, |x| x).unwrap();
        assert_eq!(f.len(), 9);
        assert_eq!(f.x(0), -2.0);
        assert_eq!(f.values()[8], 2.0);
        assert_eq!(f.half_width(), Some(4));
        assert_eq!(f.at(-4), Some(-2.0));
        assert_eq!(f.at(5), None);
        assert_eq!(f.local_range(&(-1..2)).unwrap(), 3..6);
        assert!(f.local_range(&(-5..0)).is_err());
        assert!(GridField::new(0.1, 0, vec![]).is_err());
        assert!(GridField::new(-0.1, 0, vec![1.0]).is_err());
    }
}
