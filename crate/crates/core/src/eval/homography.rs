use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Smallest `|det|` (after scaling the largest entry to 1) accepted as invertible.
pub const SINGULAR_DET: f64 = 1e-12;

/// Smallest `|w|` accepted when dehomogenizing a projected point.
pub const INFINITY_W: f64 = 1e-12;

/// Planar projective map, applied as `H * (x, y, 1)^T`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Homography {
    m: [[f64; 3]; 3],
}

fn det3(m: &[[f64; 3]; 3]) -> f64 {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
        - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

impl Homography {
    /// Wraps a row-major matrix, rejecting singular ones.
    pub fn new(m: [[f64; 3]; 3]) -> Result<Self> {
        if m.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::SingularHomography);
        }
        let scale = m.iter().flatten().fold(0.0f64, |a, v| a.max(v.abs()));
        if scale == 0.0 {
            return Err(Error::SingularHomography);
        }
        let normalized = m.map(|row| row.map(|v| v / scale));
        if det3(&normalized).abs() < SINGULAR_DET {
            return Err(Error::SingularHomography);
        }
        Ok(Self { m })
    }

    pub fn identity() -> Self {
        Self {
            m: [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]],
        }
    }

    pub fn translation(tx: f64, ty: f64) -> Self {
        Self {
            m: [[1.0, 0.0, tx], [0.0, 1.0, ty], [0.0, 0.0, 1.0]],
        }
    }

    pub fn matrix(&self) -> &[[f64; 3]; 3] {
        &self.m
    }

    pub fn determinant(&self) -> f64 {
        det3(&self.m)
    }

    /// Parses nine whitespace-separated reals in row-major order.
    pub fn parse(text: &str) -> Result<Self> {
        let tokens: Vec<&str> = text.split_whitespace().collect();
        if tokens.len() != 9 {
            return Err(Error::format(
                "homography",
                format!("expected 9 values, found {}", tokens.len()),
            ));
        }
        let mut m = [[0.0; 3]; 3];
        for (i, tok) in tokens.iter().enumerate() {
            m[i / 3][i % 3] = tok
                .parse::<f64>()
                .map_err(|_| Error::format("homography", format!("not a number: {tok:?}")))?;
        }
        Self::new(m)
    }

    /// Maps `(x, y)`; fails when the point lands on the line at infinity.
    #[inline]
    pub fn project(&self, x: f64, y: f64) -> Result<(f64, f64)> {
        let m = &self.m;
        let w = m[2][0] * x + m[2][1] * y + m[2][2];
        if w.abs() < INFINITY_W {
            return Err(Error::PointAtInfinity { x, y });
        }
        Ok((
            (m[0][0] * x + m[0][1] * y + m[0][2]) / w,
            (m[1][0] * x + m[1][1] * y + m[1][2]) / w,
        ))
    }

    /// Homogeneous denominator at `(x, y)`.
    #[inline]
    pub fn w(&self, x: f64, y: f64) -> f64 {
        self.m[2][0] * x + self.m[2][1] * y + self.m[2][2]
    }

    pub fn inverse(&self) -> Self {
        let m = &self.m;
        let det = det3(m);
        let cof = |r0: usize, r1: usize, c0: usize, c1: usize| {
            m[r0][c0] * m[r1][c1] - m[r0][c1] * m[r1][c0]
        };
        let adj = [
            [cof(1, 2, 1, 2), -cof(0, 2, 1, 2), cof(0, 1, 1, 2)],
            [-cof(1, 2, 0, 2), cof(0, 2, 0, 2), -cof(0, 1, 0, 2)],
            [cof(1, 2, 0, 1), -cof(0, 2, 0, 1), cof(0, 1, 0, 1)],
        ];
        Self {
            m: adj.map(|row| row.map(|v| v / det)),
        }
    }

    /// `self` applied after `first`.
    pub fn compose(&self, first: &Homography) -> Self {
        let (a, b) = (&self.m, &first.m);
        let mut m = [[0.0; 3]; 3];
        for (i, row) in m.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                *v = (0..3).map(|k| a[i][k] * b[k][j]).sum();
            }
        }
        Self { m }
    }

    /// Nine values, one row per line.
    pub fn to_text(&self) -> String {
        self.m
            .iter()
            .map(|r| format!("{} {} {}\n", r[0], r[1], r[2]))
            .collect()
    }
}

/// Reads a homography file: nine whitespace-separated reals, row-major.
pub fn load_homography(path: impl AsRef<Path>) -> Result<Homography> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Homography::parse(&text)
}

/// Maps `(x, y)` through `h`.
pub fn project(h: &Homography, x: f64, y: f64) -> Result<(f64, f64)> {
    h.project(x, y)
}
