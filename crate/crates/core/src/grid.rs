use crate::error::{Error, Result};

/// Uniform cell-centered grid on the cube [-L, L]^3 (L = `half_width`).
/// Cell (i, j, k) has center `origin + (i h0, j h1, k h2)`; the origin is the
/// center of the corner cell, so h[a] * n[a] spans the full 2L per axis.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    pub n: [usize; 3],
    pub h: [f64; 3],
    pub origin: [f64; 3],
    pub half_width: f64,
}

impl Grid {
    pub fn cube(n: usize, half_width: f64) -> Result<Grid> {
        if n < 5 {
            return Err(Error::GridTooSmall { needed: 5, got: n });
        }
        if !(half_width.is_finite() && half_width > 0.0) {
            return Err(Error::InvalidParams {
                field: "half_width",
                message: format!("must be positive and finite, got {half_width}"),
            });
        }
        let h = 2.0 * half_width / n as f64;
        Ok(Grid {
            n: [n; 3],
            h: [h; 3],
            origin: [-half_width + 0.5 * h; 3],
            half_width,
        })
    }

    #[inline]
    pub fn coord(&self, i: usize, j: usize, k: usize) -> [f64; 3] {
        [
            self.origin[0] + i as f64 * self.h[0],
            self.origin[1] + j as f64 * self.h[1],
            self.origin[2] + k as f64 * self.h[2],
        ]
    }

    /// Cell whose center is nearest to x; None outside the box.
    pub fn index_of(&self, x: [f64; 3]) -> Option<[usize; 3]> {
        let mut idx = [0usize; 3];
        for a in 0..3 {
            let t = (x[a] - self.origin[a]) / self.h[a];
            let i = t.round();
            if i < 0.0 || i >= self.n[a] as f64 {
                return None;
            }
            idx[a] = i as usize;
        }
        Some(idx)
    }

    #[inline]
    pub fn cell_volume(&self) -> f64 {
        self.h[0] * self.h[1] * self.h[2]
    }

    #[inline]
    pub fn cell_count(&self) -> usize {
        self.n[0] * self.n[1] * self.n[2]
    }

    pub fn min_h(&self) -> f64 {
        self.h[0].min(self.h[1]).min(self.h[2])
    }

    pub fn dim(&self) -> (usize, usize, usize) {
        (self.n[0], self.n[1], self.n[2])
    }
}
