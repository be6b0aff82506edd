use std::collections::VecDeque;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::BasisError;

/// A point in the plane. One-dimensional domains use the first coordinate
/// only and keep the second at zero.
pub type Point = [f64; 2];

/// Nodal raster for finite-difference domains.
///
/// Row 0 of the raster is the top row. Node `(row, col)` sits at
/// `origin + (col·h, (rows-1-row)·h)`. A `true` node is an interior unknown;
/// every `false` node carries the homogeneous Dirichlet value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridMask {
    pub h: f64,
    pub rows: usize,
    pub cols: usize,
    pub origin: Point,
    cells: Vec<bool>,
}

impl GridMask {
    pub fn new(h: f64, rows: usize, cols: usize, cells: Vec<bool>) -> Result<Self, BasisError> {
        if !(h > 0.0 && h.is_finite()) {
            return Err(BasisError::InvalidDomain(format!(
                "grid spacing must be positive, got {h}"
            )));
        }
        if cells.len() != rows * cols {
            return Err(BasisError::MaskParse(format!(
                "expected {} cells for a {rows}x{cols} raster, got {}",
                rows * cols,
                cells.len()
            )));
        }
        let mask = Self {
            h,
            rows,
            cols,
            origin: [0.0, 0.0],
            cells,
        };
        mask.validate()?;
        Ok(mask)
    }

    /// Parses the plain-text raster format: a header line `h=<spacing>`
    /// followed by rows of `0`/`1` characters of equal length.
    pub fn from_raster(text: &str) -> Result<Self, BasisError> {
        let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty());
        let header = lines
            .next()
            .ok_or_else(|| BasisError::MaskParse("empty raster".into()))?;
        let h = header
            .strip_prefix("h=")
            .ok_or_else(|| {
                BasisError::MaskParse(format!("expected header `h=<spacing>`, got `{header}`"))
            })?
            .trim()
            .parse::<f64>()
            .map_err(|e| BasisError::MaskParse(format!("bad spacing in header: {e}")))?;
        let mut cells = Vec::new();
        let mut rows = 0;
        let mut cols = None;
        for line in lines {
            let row: Vec<bool> = line
                .chars()
                .map(|c| match c {
                    '0' => Ok(false),
                    '1' => Ok(true),
                    other => Err(BasisError::MaskParse(format!(
                        "unexpected character `{other}` in raster"
                    ))),
                })
                .collect::<Result<_, _>>()?;
            match cols {
                None => cols = Some(row.len()),
                Some(c) if c != row.len() => {
                    return Err(BasisError::MaskParse(format!(
                        "ragged raster: row {rows} has {} columns, expected {c}",
                        row.len()
                    )))
                }
                _ => {}
            }
            cells.extend(row);
            rows += 1;
        }
        Self::new(h, rows, cols.unwrap_or(0), cells)
    }

    pub fn to_raster(&self) -> String {
        let mut out = format!("h={}\n", self.h);
        for r in 0..self.rows {
            for c in 0..self.cols {
                out.push(if self.is_interior(r, c) { '1' } else { '0' });
            }
            out.push('\n');
        }
        out
    }

    /// Unit square `(0,1)²` with spacing `1/m`.
    pub fn unit_square(m: usize) -> Result<Self, BasisError> {
        Self::from_predicate(m, |x, y| x > 0.0 && x < 1.0 && y > 0.0 && y < 1.0)
    }

    /// L-shaped domain `(0,1)² \ [1/2,1)²` with spacing `1/m` (`m` even).
    /// Star-shaped about `(1/4, 1/4)`.
    pub fn l_shape(m: usize) -> Result<Self, BasisError> {
        if !m.is_multiple_of(2) {
            return Err(BasisError::InvalidDomain(
                "L-shape needs an even number of intervals".into(),
            ));
        }
        let eps = 0.25 / m as f64;
        Self::from_predicate(m, move |x, y| {
            x > 0.0 && x < 1.0 && y > 0.0 && y < 1.0 && !(x > 0.5 - eps && y > 0.5 - eps)
        })
    }

    fn from_predicate<F: Fn(f64, f64) -> bool>(m: usize, inside: F) -> Result<Self, BasisError> {
        if m < 2 {
            return Err(BasisError::InvalidDomain(
                "grid needs at least two intervals per side".into(),
            ));
        }
        let h = 1.0 / m as f64;
        let n = m + 1;
        let mut cells = vec![false; n * n];
        for r in 0..n {
            for c in 0..n {
                let x = c as f64 * h;
                let y = (n - 1 - r) as f64 * h;
                cells[r * n + c] = inside(x, y);
            }
        }
        Self::new(h, n, n, cells)
    }

    pub fn is_interior(&self, row: usize, col: usize) -> bool {
        self.cells[row * self.cols + col]
    }

    /// Interior flag with out-of-raster positions treated as exterior.
    pub fn is_interior_signed(&self, row: isize, col: isize) -> bool {
        row >= 0
            && col >= 0
            && (row as usize) < self.rows
            && (col as usize) < self.cols
            && self.is_interior(row as usize, col as usize)
    }

    pub fn position(&self, row: usize, col: usize) -> Point {
        self.position_signed(row as isize, col as isize)
    }

    pub fn position_signed(&self, row: isize, col: isize) -> Point {
        [
            self.origin[0] + col as f64 * self.h,
            self.origin[1] + (self.rows as isize - 1 - row) as f64 * self.h,
        ]
    }

    pub fn interior_count(&self) -> usize {
        self.cells.iter().filter(|&&c| c).count()
    }

    fn validate(&self) -> Result<(), BasisError> {
        let total = self.interior_count();
        if total == 0 {
            return Err(BasisError::InvalidDomain(
                "grid mask has no interior nodes".into(),
            ));
        }
        let start = self.cells.iter().position(|&c| c).unwrap_or(0);
        let mut seen = vec![false; self.cells.len()];
        let mut queue = VecDeque::from([start]);
        seen[start] = true;
        let mut reached = 0;
        while let Some(idx) = queue.pop_front() {
            reached += 1;
            let (r, c) = ((idx / self.cols) as isize, (idx % self.cols) as isize);
            for (dr, dc) in [(-1, 0), (1, 0), (0, -1), (0, 1)] {
                let (nr, nc) = (r + dr, c + dc);
                if self.is_interior_signed(nr, nc) {
                    let j = nr as usize * self.cols + nc as usize;
                    if !seen[j] {
                        seen[j] = true;
                        queue.push_back(j);
                    }
                }
            }
        }
        if reached != total {
            return Err(BasisError::DisconnectedMask { reached, total });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum DomainKind {
    Interval { a: f64, b: f64 },
    Rectangle { a: f64, b: f64, c: f64, d: f64 },
    Disk { radius: f64, center: Point },
    Grid(GridMask),
}

/// A bounded domain together with the point about which `x·ν` and `x·∇`
/// are measured.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Domain {
    pub kind: DomainKind,
    pub star_center: Point,
}

impl Domain {
    pub fn interval(a: f64, b: f64) -> Result<Self, BasisError> {
        if !(a < b) || !a.is_finite() || !b.is_finite() {
            return Err(BasisError::InvalidDomain(format!(
                "interval needs a < b, got ({a}, {b})"
            )));
        }
        Ok(Self {
            kind: DomainKind::Interval { a, b },
            star_center: [0.0, 0.0],
        })
    }

    pub fn rectangle(a: f64, b: f64, c: f64, d: f64) -> Result<Self, BasisError> {
        if !(a < b && c < d) || ![a, b, c, d].iter().all(|v| v.is_finite()) {
            return Err(BasisError::InvalidDomain(format!(
                "rectangle needs a < b and c < d, got ({a}, {b}) x ({c}, {d})"
            )));
        }
        Ok(Self {
            kind: DomainKind::Rectangle { a, b, c, d },
            star_center: [0.0, 0.0],
        })
    }

    pub fn disk(radius: f64, center: Point) -> Result<Self, BasisError> {
        if !(radius > 0.0) || !radius.is_finite() {
            return Err(BasisError::InvalidDomain(format!(
                "disk radius must be positive, got {radius}"
            )));
        }
        Ok(Self {
            kind: DomainKind::Disk { radius, center },
            star_center: [0.0, 0.0],
        })
    }

    pub fn grid(mask: GridMask) -> Self {
        Self {
            kind: DomainKind::Grid(mask),
            star_center: [0.0, 0.0],
        }
    }

    pub fn with_star_center(mut self, center: Point) -> Self {
        if self.dimension() == 1 {
            self.star_center = [center[0], 0.0];
        } else {
            self.star_center = center;
        }
        self
    }

    pub fn dimension(&self) -> usize {
        match self.kind {
            DomainKind::Interval { .. } => 1,
            _ => 2,
        }
    }

    /// Closure membership with a relative slack of `1e-12` of the domain size.
    pub fn contains(&self, p: Point) -> bool {
        match &self.kind {
            DomainKind::Interval { a, b } => {
                let eps = 1e-12 * (b - a);
                p[0] >= a - eps && p[0] <= b + eps
            }
            DomainKind::Rectangle { a, b, c, d } => {
                let eps = 1e-12 * (b - a).max(d - c);
                p[0] >= a - eps && p[0] <= b + eps && p[1] >= c - eps && p[1] <= d + eps
            }
            DomainKind::Disk { radius, center } => {
                let dx = p[0] - center[0];
                let dy = p[1] - center[1];
                (dx * dx + dy * dy).sqrt() <= radius * (1.0 + 1e-12)
            }
            DomainKind::Grid(mask) => grid_cell_of(mask, p).is_some(),
        }
    }

    /// Canonical text used for fingerprints and reports.
    pub fn describe(&self) -> String {
        let c = self.star_center;
        match &self.kind {
            DomainKind::Interval { a, b } => format!("interval({a:e},{b:e})@{:e}", c[0]),
            DomainKind::Rectangle { a, b, c: lo, d } => {
                format!(
                    "rectangle({a:e},{b:e},{lo:e},{d:e})@({:e},{:e})",
                    c[0], c[1]
                )
            }
            DomainKind::Disk { radius, center } => format!(
                "disk({radius:e},{:e},{:e})@({:e},{:e})",
                center[0], center[1], c[0], c[1]
            ),
            DomainKind::Grid(mask) => format!(
                "grid({:e},{}x{},{} interior)@({:e},{:e})",
                mask.h,
                mask.rows,
                mask.cols,
                mask.interior_count(),
                c[0],
                c[1]
            ),
        }
    }
}

impl fmt::Display for Domain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.describe())
    }
}

/// Lattice cell `(row of the lower-left node, col of the lower-left node)`
/// containing `p`, provided at least one of its four corners is interior.
pub(crate) fn grid_cell_of(mask: &GridMask, p: Point) -> Option<(isize, isize, f64, f64)> {
    let fx = (p[0] - mask.origin[0]) / mask.h;
    let fy = (p[1] - mask.origin[1]) / mask.h;
    let eps = 1e-9;
    if fx < -eps
        || fy < -eps
        || fx > (mask.cols - 1) as f64 + eps
        || fy > (mask.rows - 1) as f64 + eps
    {
        return None;
    }
    let col = (fx.floor() as isize).clamp(0, mask.cols as isize - 2);
    let ylev = (fy.floor() as isize).clamp(0, mask.rows as isize - 2);
    let row = mask.rows as isize - 1 - ylev;
    let tx = fx - col as f64;
    let ty = fy - ylev as f64;
    let corners = [
        (row, col),
        (row, col + 1),
        (row - 1, col),
        (row - 1, col + 1),
    ];
    if corners.iter().any(|&(r, c)| mask.is_interior_signed(r, c)) {
        Some((row, col, tx, ty))
    } else {
        None
    }
}
