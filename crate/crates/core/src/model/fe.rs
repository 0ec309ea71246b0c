//! Finite-element model updating: modal residual rows from stiffness and mass data.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::{normalize_box, BbpInstance, BilinearForm, BilinearRow, ScalingRecord};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FeMode {
    /// Squared angular frequency.
    pub lambda: f64,
    /// One flag per DOF; `true` where the shape is measured.
    pub mask: Vec<bool>,
    /// Measured shape values, in DOF order over the masked entries.
    pub shape: Vec<f64>,
}

fn default_x_box() -> [f64; 2] {
    [-1.0, 1.0]
}

fn default_y_box() -> [f64; 2] {
    [-2.0, 2.0]
}

/// All matrices are dense `m × m`, row-major.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FeInput {
    pub m: usize,
    pub n1: usize,
    pub n3: usize,
    #[serde(rename = "M")]
    pub mass: Vec<f64>,
    #[serde(rename = "K0")]
    pub k0: Vec<f64>,
    #[serde(rename = "K")]
    pub k: Vec<Vec<f64>>,
    pub modes: Vec<FeMode>,
    #[serde(rename = "xBox", default = "default_x_box")]
    pub x_box: [f64; 2],
    #[serde(rename = "yBox", default = "default_y_box")]
    pub y_box: [f64; 2],
}

impl FeInput {
    pub fn check(&self) -> Result<()> {
        let mm = self.m * self.m;
        let dim = |what: String| Err(Error::Dimension(what));
        if self.mass.len() != mm || self.k0.len() != mm {
            return dim(format!("M and K0 must hold {mm} entries"));
        }
        if self.k.len() != self.n1 {
            return dim(format!("expected {} stiffness matrices, got {}", self.n1, self.k.len()));
        }
        if self.modes.len() != self.n3 {
            return dim(format!("expected {} modes, got {}", self.n3, self.modes.len()));
        }
        for (i, ki) in self.k.iter().enumerate() {
            if ki.len() != mm {
                return dim(format!("K{} must hold {mm} entries", i + 1));
            }
        }
        let mats = std::iter::once(("M".to_string(), &self.mass))
            .chain(std::iter::once(("K0".to_string(), &self.k0)))
            .chain(self.k.iter().enumerate().map(|(i, k)| (format!("K{}", i + 1), k)));
        for (name, a) in mats {
            let scale = a.iter().fold(1.0f64, |s, v| s.max(v.abs()));
            for r in 0..self.m {
                for c in 0..r {
                    if (a[r * self.m + c] - a[c * self.m + r]).abs() > 1e-9 * scale {
                        return Err(Error::InvalidInstance(format!("{name} is not symmetric at ({r}, {c})")));
                    }
                }
            }
            if a.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidInstance(format!("{name} has a non-finite entry")));
            }
        }
        for (l, mode) in self.modes.iter().enumerate() {
            if mode.mask.len() != self.m {
                return dim(format!("mode {l}: mask has length {}, expected {}", mode.mask.len(), self.m));
            }
            let measured = mode.mask.iter().filter(|&&b| b).count();
            if mode.shape.len() != measured {
                return dim(format!("mode {l}: {} shape values for {measured} measured DOFs", mode.shape.len()));
            }
            if !(mode.lambda > 0.0) {
                return Err(Error::InvalidInstance(format!("mode {l}: lambda must be positive")));
            }
        }
        if !(self.x_box[0] < self.x_box[1]) || !(self.y_box[0] < self.y_box[1]) {
            return Err(Error::InvalidInstance("empty variable box".into()));
        }
        Ok(())
    }

    /// Perturb every eigenvalue and measured shape entry `v` by a normal draw
    /// with mean zero and variance `noise * |v|`.
    pub fn with_noise(&self, noise: f64, seed: u64) -> FeInput {
        let mut out = self.clone();
        if noise <= 0.0 {
            return out;
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut perturb = |v: &mut f64| {
            let sd = (noise * v.abs()).sqrt();
            if sd > 0.0 {
                *v += Normal::new(0.0, sd).expect("finite sd").sample(&mut rng);
            }
        };
        for mode in &mut out.modes {
            perturb(&mut mode.lambda);
            mode.shape.iter_mut().for_each(&mut perturb);
        }
        out
    }
}

/// Build the elastic residual instance: one row per mode and DOF, measured
/// shape entries as data, unmeasured ones as `y`, all rescaled to the unit box.
pub fn from_fe(fe: &FeInput) -> Result<(BbpInstance, ScalingRecord)> {
    fe.check()?;
    let m = fe.m;
    let mut n2 = 0;
    let mut y_index: Vec<Vec<Option<usize>>> = Vec::with_capacity(fe.n3);
    for mode in &fe.modes {
        y_index.push(
            mode.mask
                .iter()
                .map(|&measured| {
                    if measured {
                        None
                    } else {
                        n2 += 1;
                        Some(n2 - 1)
                    }
                })
                .collect(),
        );
    }
    let mut rows = Vec::with_capacity(m * fe.n3);
    for (l, mode) in fe.modes.iter().enumerate() {
        let mut measured = vec![0.0; m];
        let mut it = mode.shape.iter();
        for c in 0..m {
            if mode.mask[c] {
                measured[c] = *it.next().expect("checked length");
            }
        }
        for r in 0..m {
            let mut form = BilinearForm::default();
            for c in 0..m {
                let base = fe.k0[r * m + c] - mode.lambda * fe.mass[r * m + c];
                match y_index[l][c] {
                    None => {
                        let phi = measured[c];
                        form.constant += base * phi;
                        for (i, ki) in fe.k.iter().enumerate() {
                            form.a.push((i, ki[r * m + c] * phi));
                        }
                    }
                    Some(j) => {
                        form.b.push((j, base));
                        for (i, ki) in fe.k.iter().enumerate() {
                            form.q.push((i, j, ki[r * m + c]));
                        }
                    }
                }
            }
            rows.push(BilinearRow { form: form.canonical(), elastic: true });
        }
    }
    let mut lower = vec![fe.x_box[0]; fe.n1];
    let mut upper = vec![fe.x_box[1]; fe.n1];
    lower.extend(std::iter::repeat_n(fe.y_box[0], n2));
    upper.extend(std::iter::repeat_n(fe.y_box[1], n2));
    let inst = BbpInstance { n1: fe.n1, n2, objective: BilinearForm::default(), rows, lower, upper };
    normalize_box(&inst)
}
