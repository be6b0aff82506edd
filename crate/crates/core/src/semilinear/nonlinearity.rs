use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::eigenbasis::Point;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NonlinearityKind {
    Power { p: f64, scale: f64 },
    Polynomial { coeffs: Vec<f64> },
    Spatial,
}

/// A right-hand side `f(x, t)` with primitive `F(x, t) = ∫₀ᵗ f(x, τ) dτ`.
pub trait Nonlinearity: Send + Sync {
    fn f(&self, x: Point, t: f64) -> f64;
    /// `∂f/∂t`.
    fn f_t(&self, x: Point, t: f64) -> f64;
    fn primitive(&self, x: Point, t: f64) -> f64;
    /// `∇_x F(x, t)`.
    fn primitive_x(&self, x: Point, t: f64) -> [f64; 2];
    fn kind(&self) -> NonlinearityKind;
}

/// `scale · |t|^{p-1} t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerLaw {
    pub p: f64,
    pub scale: f64,
}

impl PowerLaw {
    pub fn new(p: f64) -> Self {
        Self { p, scale: 1.0 }
    }
}

impl Nonlinearity for PowerLaw {
    fn f(&self, _: Point, t: f64) -> f64 {
        self.scale * t.abs().powf(self.p - 1.0) * t
    }

    fn f_t(&self, _: Point, t: f64) -> f64 {
        self.scale * self.p * t.abs().powf(self.p - 1.0)
    }

    fn primitive(&self, _: Point, t: f64) -> f64 {
        self.scale * t.abs().powf(self.p + 1.0) / (self.p + 1.0)
    }

    fn primitive_x(&self, _: Point, _: f64) -> [f64; 2] {
        [0.0, 0.0]
    }

    fn kind(&self) -> NonlinearityKind {
        NonlinearityKind::Power {
            p: self.p,
            scale: self.scale,
        }
    }
}

/// `Σ c_i t^i`.
#[derive(Debug, Clone, PartialEq)]
pub struct Polynomial {
    pub coeffs: Vec<f64>,
}

impl Polynomial {
    pub fn new(coeffs: Vec<f64>) -> Self {
        Self { coeffs }
    }
}

impl Nonlinearity for Polynomial {
    fn f(&self, _: Point, t: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, c| acc * t + c)
    }

    fn f_t(&self, _: Point, t: f64) -> f64 {
        self.coeffs
            .iter()
            .enumerate()
            .skip(1)
            .rev()
            .fold(0.0, |acc, (i, c)| acc * t + i as f64 * c)
    }

    fn primitive(&self, _: Point, t: f64) -> f64 {
        t * self
            .coeffs
            .iter()
            .enumerate()
            .rev()
            .fold(0.0, |acc, (i, c)| acc * t + c / (i + 1) as f64)
    }

    fn primitive_x(&self, _: Point, _: f64) -> [f64; 2] {
        [0.0, 0.0]
    }

    fn kind(&self) -> NonlinearityKind {
        NonlinearityKind::Polynomial {
            coeffs: self.coeffs.clone(),
        }
    }
}

type Field = Arc<dyn Fn(Point) -> f64 + Send + Sync>;
type FieldGradient = Arc<dyn Fn(Point) -> [f64; 2] + Send + Sync>;

/// A source `f(x, t) = g(x)` independent of `u`.
#[derive(Clone)]
pub struct SpatialSource {
    value: Field,
    gradient: FieldGradient,
}

impl SpatialSource {
    pub fn new<G, D>(value: G, gradient: D) -> Self
    where
        G: Fn(Point) -> f64 + Send + Sync + 'static,
        D: Fn(Point) -> [f64; 2] + Send + Sync + 'static,
    {
        Self {
            value: Arc::new(value),
            gradient: Arc::new(gradient),
        }
    }
}

impl fmt::Debug for SpatialSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("SpatialSource")
    }
}

impl Nonlinearity for SpatialSource {
    fn f(&self, x: Point, _: f64) -> f64 {
        (self.value)(x)
    }

    fn f_t(&self, _: Point, _: f64) -> f64 {
        0.0
    }

    fn primitive(&self, x: Point, t: f64) -> f64 {
        (self.value)(x) * t
    }

    fn primitive_x(&self, x: Point, t: f64) -> [f64; 2] {
        let g = (self.gradient)(x);
        [g[0] * t, g[1] * t]
    }

    fn kind(&self) -> NonlinearityKind {
        NonlinearityKind::Spatial
    }
}
