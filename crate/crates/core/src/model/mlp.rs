use crate::error::{Error, Result};
use crate::seeding;
use rand::Rng;

pub const DEFAULT_HIDDEN: usize = 128;

/// Single-hidden-layer head: `affine → ReLU → affine`.
///
/// Weight matrices are row-major with one row per output unit.
#[derive(Debug, Clone, PartialEq)]
pub struct HeadParams {
    pub input_dim: usize,
    pub hidden: usize,
    pub output_dim: usize,
    pub w1: Vec<f64>,
    pub b1: Vec<f64>,
    pub w2: Vec<f64>,
    pub b2: Vec<f64>,
}

/// Gradients with the same layout as [`HeadParams`].
#[derive(Debug, Clone, PartialEq)]
pub struct HeadGrads {
    pub w1: Vec<f64>,
    pub b1: Vec<f64>,
    pub w2: Vec<f64>,
    pub b2: Vec<f64>,
}

/// Hidden activations kept from the forward pass for backpropagation.
#[derive(Debug, Clone)]
pub struct Activations {
    pub hidden: Vec<f64>,
    pub output: Vec<f64>,
}

impl HeadParams {
    pub fn zeros(input_dim: usize, hidden: usize, output_dim: usize) -> Self {
        HeadParams {
            input_dim,
            hidden,
            output_dim,
            w1: vec![0.0; hidden * input_dim],
            b1: vec![0.0; hidden],
            w2: vec![0.0; output_dim * hidden],
            b2: vec![0.0; output_dim],
        }
    }

    /// Glorot-uniform weights in `±sqrt(6 / (fan_in + fan_out))`, zero biases.
    pub fn init(input_dim: usize, hidden: usize, output_dim: usize, seed: u64) -> Result<Self> {
        if input_dim == 0 || hidden == 0 || output_dim == 0 {
            return Err(Error::InvalidParameter("layer sizes must be positive".into()));
        }
        let mut p = Self::zeros(input_dim, hidden, output_dim);
        let mut rng = seeding::rng(seed, seeding::TAG_INIT, 0);
        let a1 = (6.0 / (input_dim + hidden) as f64).sqrt();
        p.w1.iter_mut().for_each(|w| *w = rng.random_range(-a1..a1));
        let a2 = (6.0 / (hidden + output_dim) as f64).sqrt();
        p.w2.iter_mut().for_each(|w| *w = rng.random_range(-a2..a2));
        Ok(p)
    }

    pub fn num_params(&self) -> usize {
        self.w1.len() + self.b1.len() + self.w2.len() + self.b2.len()
    }

    pub fn is_finite(&self) -> bool {
        self.tensors().iter().all(|t| t.iter().all(|v| v.is_finite()))
    }

    pub fn tensors(&self) -> [&[f64]; 4] {
        [&self.w1, &self.b1, &self.w2, &self.b2]
    }

    pub fn tensors_mut(&mut self) -> [&mut Vec<f64>; 4] {
        [&mut self.w1, &mut self.b1, &mut self.w2, &mut self.b2]
    }

    /// `(rows, cols)` of each tensor in [`HeadParams::tensors`] order.
    pub fn shapes(&self) -> [(usize, usize); 4] {
        [
            (self.hidden, self.input_dim),
            (self.hidden, 1),
            (self.output_dim, self.hidden),
            (self.output_dim, 1),
        ]
    }

    pub fn forward(&self, features: &[f64]) -> Result<Vec<f64>> {
        Ok(self.forward_full(features)?.output)
    }

    pub fn forward_full(&self, features: &[f64]) -> Result<Activations> {
        if features.len() != self.input_dim {
            return Err(Error::shape("head input", self.input_dim, features.len()));
        }
        let hidden: Vec<f64> = self
            .w1
            .chunks_exact(self.input_dim)
            .zip(&self.b1)
            .map(|(row, b)| (dot(row, features) + b).max(0.0))
            .collect();
        let output = self
            .w2
            .chunks_exact(self.hidden)
            .zip(&self.b2)
            .map(|(row, b)| dot(row, &hidden) + b)
            .collect();
        Ok(Activations { hidden, output })
    }

    /// Parameter gradients for one sample given `∂loss/∂output`.
    pub fn backward(&self, features: &[f64], upstream: &[f64]) -> Result<HeadGrads> {
        let acts = self.forward_full(features)?;
        let mut grads = HeadGrads::zeros_like(self);
        self.accumulate_grads(features, &acts, upstream, 1.0, &mut grads)?;
        Ok(grads)
    }

    /// Adds `scale · ∂loss/∂θ` into `grads`, reusing a cached forward pass.
    pub fn accumulate_grads(
        &self,
        features: &[f64],
        acts: &Activations,
        upstream: &[f64],
        scale: f64,
        grads: &mut HeadGrads,
    ) -> Result<()> {
        if upstream.len() != self.output_dim {
            return Err(Error::shape("upstream gradient", self.output_dim, upstream.len()));
        }
        if features.len() != self.input_dim {
            return Err(Error::shape("head input", self.input_dim, features.len()));
        }
        let mut d_hidden = vec![0.0; self.hidden];
        for (o, &g) in upstream.iter().enumerate() {
            if g == 0.0 {
                continue;
            }
            let g = g * scale;
            grads.b2[o] += g;
            let span = o * self.hidden..(o + 1) * self.hidden;
            let (gw, w) = (&mut grads.w2[span.clone()], &self.w2[span]);
            for (((gw, w), h), dh) in gw.iter_mut().zip(w).zip(&acts.hidden).zip(&mut d_hidden) {
                *gw += g * h;
                *dh += g * w;
            }
        }
        for (j, dh) in d_hidden.iter().enumerate() {
            // ReLU passes gradient only where the unit was active.
            if acts.hidden[j] <= 0.0 || *dh == 0.0 {
                continue;
            }
            grads.b1[j] += dh;
            let row = &mut grads.w1[j * self.input_dim..(j + 1) * self.input_dim];
            for (w, x) in row.iter_mut().zip(features) {
                *w += dh * x;
            }
        }
        Ok(())
    }
}

impl HeadGrads {
    pub fn zeros_like(p: &HeadParams) -> Self {
        HeadGrads {
            w1: vec![0.0; p.w1.len()],
            b1: vec![0.0; p.b1.len()],
            w2: vec![0.0; p.w2.len()],
            b2: vec![0.0; p.b2.len()],
        }
    }

    pub fn tensors(&self) -> [&[f64]; 4] {
        [&self.w1, &self.b1, &self.w2, &self.b2]
    }

    pub fn clear(&mut self) {
        for t in [&mut self.w1, &mut self.b1, &mut self.w2, &mut self.b2] {
            t.iter_mut().for_each(|v| *v = 0.0);
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_params_give_zero_output() {
        let p = HeadParams::zeros(3, 4, 2);
        assert_eq!(p.forward(&[1.0, -2.0, 3.0]).unwrap(), vec![0.0, 0.0]);
    }

    #[test]
    fn two_by_two_worked_example() {
        // h = relu([[1, 0], [0, -1]]·x + [0, 0.5]); y = [2, 3]·h + 1
        let p = HeadParams {
            input_dim: 2,
            hidden: 2,
            output_dim: 1,
            w1: vec![1.0, 0.0, 0.0, -1.0],
            b1: vec![0.0, 0.5],
            w2: vec![2.0, 3.0],
            b2: vec![1.0],
        };
        // x = (0.75, 0.25): h = (0.75, 0.25), y = 1.5 + 0.75 + 1
        assert_eq!(p.forward(&[0.75, 0.25]).unwrap(), vec![3.25]);
        // x = (-1, 1): h = (0, 0), y = 1
        assert_eq!(p.forward(&[-1.0, 1.0]).unwrap(), vec![1.0]);
        // Gradients for upstream 1 at x = (0.75, 0.25).
        let g = p.backward(&[0.75, 0.25], &[1.0]).unwrap();
        assert_eq!(g.b2, vec![1.0]);
        assert_eq!(g.w2, vec![0.75, 0.25]);
        assert_eq!(g.b1, vec![2.0, 3.0]);
        assert_eq!(g.w1, vec![1.5, 0.5, 2.25, 0.75]);
    }

    #[test]
    fn scaling_last_layer_scales_output() {
        let mut p = HeadParams::init(5, 7, 3, 1).unwrap();
        p.b2 = vec![0.1, -0.2, 0.3];
        let x = [0.3, -0.1, 0.8, 0.5, -0.4];
        let y = p.forward(&x).unwrap();
        p.w2.iter_mut().for_each(|w| *w *= 2.0);
        p.b2.iter_mut().for_each(|b| *b *= 2.0);
        let y2 = p.forward(&x).unwrap();
        for (a, b) in y.iter().zip(&y2) {
            assert!((2.0 * a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_upstream_gives_zero_grads() {
        let p = HeadParams::init(4, 6, 2, 3).unwrap();
        let g = p.backward(&[0.1, 0.2, 0.3, 0.4], &[0.0, 0.0]).unwrap();
        assert!(g.tensors().iter().all(|t| t.iter().all(|&v| v == 0.0)));
    }

    #[test]
    fn last_layer_grad_is_outer_product() {
        let p = HeadParams::init(3, 5, 2, 9).unwrap();
        let x = [0.5, -0.25, 1.0];
        let up = [0.7, -1.3];
        let acts = p.forward_full(&x).unwrap();
        let g = p.backward(&x, &up).unwrap();
        for (o, u) in up.iter().enumerate() {
            for (j, h) in acts.hidden.iter().enumerate() {
                assert_eq!(g.w2[o * 5 + j], u * h);
            }
        }
    }

    #[test]
    fn init_is_seeded_and_bounded() {
        let a = HeadParams::init(10, 8, 3, 42).unwrap();
        assert_eq!(a, HeadParams::init(10, 8, 3, 42).unwrap());
        assert_ne!(a, HeadParams::init(10, 8, 3, 43).unwrap());
        let bound = (6.0f64 / 18.0).sqrt();
        assert!(a.w1.iter().all(|w| w.abs() <= bound));
        assert!(a.b1.iter().all(|&b| b == 0.0));
    }

    #[test]
    fn shape_errors() {
        let p = HeadParams::init(3, 4, 2, 0).unwrap();
        assert!(p.forward(&[1.0]).is_err());
        assert!(p.backward(&[1.0, 2.0, 3.0], &[1.0]).is_err());
        assert!(HeadParams::init(0, 4, 2, 0).is_err());
    }
}
