//! The event classifier and the source regressor.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::layers::{dropout_mask, hadamard_in_place, sigmoid, Dense, Lstm};
use super::tensor::Tensor2;
use crate::acoustics::NODES_PER_AREA;
use crate::error::{Error, Result};
use crate::rng;

/// Input and target scaling stored alongside the weights.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Normalization {
    pub delta_laeq_db: f64,
    pub foreground_db: f64,
    pub position_m: f64,
    pub level_db: f64,
}

impl Default for Normalization {
    fn default() -> Self {
        Self { delta_laeq_db: 20.0, foreground_db: 60.0, position_m: 250.0, level_db: 100.0 }
    }
}

/// A fixed architecture with an explicit loss gradient.
pub trait Network: Clone {
    fn params(&self) -> Vec<&Tensor2>;
    fn params_mut(&mut self) -> Vec<&mut Tensor2>;
    fn learning_rate(&self) -> f64;

    /// Mean batch loss on raw features `x` and raw targets `y`. Dropout is
    /// applied only when `dropout` is given. When `grads` is given (shaped
    /// like `params`), gradients are accumulated into it.
    fn loss_grad(&self, x: &Tensor2, y: &Tensor2, dropout: Option<&mut rng::Rng>, grads: Option<&mut [Tensor2]>) -> Result<f64>;

    fn zero_grads(&self) -> Vec<Tensor2> {
        self.params().iter().map(|p| Tensor2::zeros(p.rows(), p.cols())).collect()
    }

    fn parameter_count(&self) -> usize {
        self.params().iter().map(|p| p.len()).sum()
    }
}

fn check_batch(x: &Tensor2, y: &Tensor2, x_cols: usize, y_cols: usize) -> Result<()> {
    if x.cols() != x_cols || y.cols() != y_cols || x.rows() != y.rows() {
        return Err(Error::ShapeMismatch(format!(
            "expected x: n x {x_cols}, y: n x {y_cols}; got {:?} and {:?}",
            x.shape(),
            y.shape()
        )));
    }
    if x.rows() == 0 {
        return Err(Error::Empty("batch"));
    }
    if !x.all_finite() || !y.all_finite() {
        return Err(Error::NonFinite("batch"));
    }
    Ok(())
}

fn softplus(x: f64) -> f64 {
    x.max(0.0) + (-x.abs()).exp().ln_1p()
}

/// LSTM over the nodes' ΔL_Aeq values (node order = time order), dropout,
/// then a sigmoid unit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EventClassifier {
    pub lstm: Lstm,
    pub head: Dense,
    pub dropout: f64,
    pub learning_rate: f64,
    /// Weight of positive samples in the cross-entropy.
    pub pos_weight: f64,
    pub norm: Normalization,
}

impl EventClassifier {
    pub const UNITS: usize = 100;

    pub fn new(seed: u64) -> Self {
        Self::with_units(Self::UNITS, seed)
    }

    pub fn with_units(units: usize, seed: u64) -> Self {
        let mut r = rng::stream(seed, 0);
        Self {
            lstm: Lstm::new(1, units, &mut r),
            head: Dense::new(units, 1, &mut r),
            dropout: 0.5,
            learning_rate: 1e-4,
            pos_weight: 1.0,
            norm: Normalization::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let u = self.lstm.units();
        let ok = self.lstm.inputs() == 1
            && self.lstm.wx.cols() == 4 * u
            && self.lstm.wh.cols() == 4 * u
            && self.lstm.b.shape() == (1, 4 * u)
            && self.head.w.shape() == (u, 1)
            && self.head.b.shape() == (1, 1);
        if !ok {
            return Err(Error::ShapeMismatch("classifier layer shapes are inconsistent".into()));
        }
        if !(0.0..1.0).contains(&self.dropout) || !(self.pos_weight > 0.0) {
            return Err(Error::invalid("classifier needs dropout in [0, 1) and a positive class weight"));
        }
        Ok(())
    }

    fn steps(&self, x: &Tensor2) -> Vec<Tensor2> {
        (0..x.cols())
            .map(|t| {
                let mut s = Tensor2::zeros(x.rows(), 1);
                for r in 0..x.rows() {
                    s.data_mut()[r] = x.get(r, t) / self.norm.delta_laeq_db;
                }
                s
            })
            .collect()
    }

    fn logits(&self, x: &Tensor2) -> Tensor2 {
        let cache = self.lstm.forward(&self.steps(x));
        self.head.forward(cache.last_hidden())
    }

    /// Event probabilities for a batch of raw ΔL_Aeq rows.
    pub fn predict_batch(&self, x: &Tensor2) -> Result<Vec<f64>> {
        if x.cols() != NODES_PER_AREA {
            return Err(Error::ShapeMismatch(format!("expected {NODES_PER_AREA} ΔL_Aeq values per row")));
        }
        if !x.all_finite() {
            return Err(Error::NonFinite("ΔL_Aeq"));
        }
        Ok(self.logits(x).data().iter().map(|z| sigmoid(*z)).collect())
    }

    pub fn predict_event(&self, delta_laeq: &[f64]) -> Result<f64> {
        let x = Tensor2::from_vec(1, delta_laeq.len(), delta_laeq.to_vec())?;
        Ok(self.predict_batch(&x)?[0])
    }
}

impl Network for EventClassifier {
    fn params(&self) -> Vec<&Tensor2> {
        vec![&self.lstm.wx, &self.lstm.wh, &self.lstm.b, &self.head.w, &self.head.b]
    }

    fn params_mut(&mut self) -> Vec<&mut Tensor2> {
        vec![&mut self.lstm.wx, &mut self.lstm.wh, &mut self.lstm.b, &mut self.head.w, &mut self.head.b]
    }

    fn learning_rate(&self) -> f64 {
        self.learning_rate
    }

    fn loss_grad(&self, x: &Tensor2, y: &Tensor2, dropout: Option<&mut rng::Rng>, grads: Option<&mut [Tensor2]>) -> Result<f64> {
        check_batch(x, y, x.cols().max(1), 1)?;
        let n = x.rows() as f64;
        let cache = self.lstm.forward(&self.steps(x));
        let mut h = cache.last_hidden().clone();
        let mask = dropout.map(|r| dropout_mask(h.rows(), h.cols(), self.dropout, r));
        if let Some(m) = &mask {
            hadamard_in_place(&mut h, m);
        }
        let z = self.head.forward(&h);
        let mut loss = 0.0;
        let mut dz = Tensor2::zeros(z.rows(), 1);
        for r in 0..z.rows() {
            let (zr, t) = (z.get(r, 0), y.get(r, 0));
            loss += self.pos_weight * t * softplus(-zr) + (1.0 - t) * softplus(zr);
            let p = sigmoid(zr);
            dz.data_mut()[r] = (self.pos_weight * t * (p - 1.0) + (1.0 - t) * p) / n;
        }
        if let Some(g) = grads {
            let [gwx, gwh, gb, ghw, ghb] = g else {
                return Err(Error::ShapeMismatch("classifier has 5 parameter groups".into()));
            };
            let mut dh = self.head.backward(&h, &dz, ghw, ghb);
            if let Some(m) = &mask {
                hadamard_in_place(&mut dh, m);
            }
            self.lstm.backward(&cache, &dh, gwx, gwh, gb);
        }
        Ok(loss / n)
    }
}

/// Predicted source properties in scene-local coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SourceEstimate {
    pub x: f64,
    pub y: f64,
    pub level: f64,
}

/// Two dense branches (foreground levels, mask bits), concatenated, one
/// hidden layer, linear output `(x, y, level)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SourceRegressor {
    pub branch_fg: Dense,
    pub branch_mask: Dense,
    pub hidden: Dense,
    pub out: Dense,
    pub dropout: f64,
    pub learning_rate: f64,
    pub norm: Normalization,
    pub extent_m: f64,
}

struct RegressorPass {
    xf: Tensor2,
    xm: Tensor2,
    a: Tensor2,
    b: Tensor2,
    cat: Tensor2,
    mask1: Option<Tensor2>,
    h: Tensor2,
    mask2: Option<Tensor2>,
    out: Tensor2,
}

impl SourceRegressor {
    pub const BRANCH: usize = 320;
    pub const HIDDEN: usize = 100;

    pub fn new(seed: u64) -> Self {
        Self::with_sizes(Self::BRANCH, Self::HIDDEN, seed)
    }

    pub fn with_sizes(branch: usize, hidden: usize, seed: u64) -> Self {
        let mut r = rng::stream(seed, 1);
        let n = NODES_PER_AREA;
        Self {
            branch_fg: Dense::new(n, branch, &mut r),
            branch_mask: Dense::new(n, branch, &mut r),
            hidden: Dense::new(2 * branch, hidden, &mut r),
            out: Dense::new(hidden, 3, &mut r),
            dropout: 0.2,
            learning_rate: 1e-3,
            norm: Normalization::default(),
            extent_m: 250.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let n = NODES_PER_AREA;
        let bw = self.branch_fg.outputs();
        let hw = self.hidden.outputs();
        let ok = self.branch_fg.w.shape() == (n, bw)
            && self.branch_mask.w.shape() == (n, bw)
            && self.branch_fg.b.shape() == (1, bw)
            && self.branch_mask.b.shape() == (1, bw)
            && self.hidden.w.shape() == (2 * bw, hw)
            && self.hidden.b.shape() == (1, hw)
            && self.out.w.shape() == (hw, 3)
            && self.out.b.shape() == (1, 3);
        if !ok {
            return Err(Error::ShapeMismatch("regressor layer shapes are inconsistent".into()));
        }
        if !(0.0..1.0).contains(&self.dropout) {
            return Err(Error::invalid("regressor dropout must lie in [0, 1)"));
        }
        Ok(())
    }

    fn pass(&self, x: &Tensor2, mut dropout: Option<&mut rng::Rng>) -> RegressorPass {
        let n = NODES_PER_AREA;
        let rows = x.rows();
        let mut xf = Tensor2::zeros(rows, n);
        let mut xm = Tensor2::zeros(rows, n);
        for r in 0..rows {
            let src = x.row(r);
            for j in 0..n {
                xf.row_mut(r)[j] = src[j] / self.norm.foreground_db;
                xm.row_mut(r)[j] = src[n + j];
            }
        }
        let a = self.branch_fg.forward(&xf).map(f64::tanh);
        let b = self.branch_mask.forward(&xm).map(f64::tanh);
        let bw = a.cols();
        let mut cat = Tensor2::zeros(rows, 2 * bw);
        for r in 0..rows {
            cat.row_mut(r)[..bw].copy_from_slice(a.row(r));
            cat.row_mut(r)[bw..].copy_from_slice(b.row(r));
        }
        let mask1 = dropout.as_deref_mut().map(|g| dropout_mask(rows, 2 * bw, self.dropout, g));
        if let Some(m) = &mask1 {
            hadamard_in_place(&mut cat, m);
        }
        let mut h = self.hidden.forward(&cat).map(f64::tanh);
        let hmask = dropout.map(|g| dropout_mask(rows, h.cols(), self.dropout, g));
        // Keep the pre-dropout activation for the tanh derivative.
        let h_act = h.clone();
        if let Some(m) = &hmask {
            hadamard_in_place(&mut h, m);
        }
        let out = self.out.forward(&h);
        RegressorPass { xf, xm, a, b, cat, mask1, h: h_act, mask2: hmask, out }
    }

    fn target_row(&self, y: &[f64]) -> [f64; 3] {
        [y[0] / self.norm.position_m, y[1] / self.norm.position_m, y[2] / self.norm.level_db]
    }

    pub fn predict_batch(&self, x: &Tensor2) -> Result<Vec<SourceEstimate>> {
        if x.cols() != 2 * NODES_PER_AREA {
            return Err(Error::ShapeMismatch(format!("expected {} features per row", 2 * NODES_PER_AREA)));
        }
        if !x.all_finite() {
            return Err(Error::NonFinite("regressor features"));
        }
        let out = self.pass(x, None).out;
        Ok((0..out.rows())
            .map(|r| SourceEstimate {
                x: (out.get(r, 0) * self.norm.position_m).clamp(0.0, self.extent_m),
                y: (out.get(r, 1) * self.norm.position_m).clamp(0.0, self.extent_m),
                level: out.get(r, 2) * self.norm.level_db,
            })
            .collect())
    }

    /// `fused_fg` is zeroed wherever `mask` is false.
    pub fn predict_source(&self, fused_fg: &[f64], mask: &[bool]) -> Result<SourceEstimate> {
        let x = features(fused_fg, mask)?;
        Ok(self.predict_batch(&Tensor2::from_vec(1, x.len(), x)?)?[0])
    }
}

/// Regressor feature row: masked foreground levels followed by mask bits.
pub fn features(fused_fg: &[f64], mask: &[bool]) -> Result<Vec<f64>> {
    let n = NODES_PER_AREA;
    if fused_fg.len() != n || mask.len() != n {
        return Err(Error::ShapeMismatch(format!("expected {n} foreground values and {n} mask bits")));
    }
    if !mask.iter().any(|m| *m) {
        return Err(Error::invalid("mask selects no sensors"));
    }
    let mut row: Vec<f64> = fused_fg.iter().zip(mask).map(|(v, m)| if *m { *v } else { 0.0 }).collect();
    row.extend(mask.iter().map(|m| f64::from(u8::from(*m))));
    Ok(row)
}

impl Network for SourceRegressor {
    fn params(&self) -> Vec<&Tensor2> {
        vec![
            &self.branch_fg.w,
            &self.branch_fg.b,
            &self.branch_mask.w,
            &self.branch_mask.b,
            &self.hidden.w,
            &self.hidden.b,
            &self.out.w,
            &self.out.b,
        ]
    }

    fn params_mut(&mut self) -> Vec<&mut Tensor2> {
        vec![
            &mut self.branch_fg.w,
            &mut self.branch_fg.b,
            &mut self.branch_mask.w,
            &mut self.branch_mask.b,
            &mut self.hidden.w,
            &mut self.hidden.b,
            &mut self.out.w,
            &mut self.out.b,
        ]
    }

    fn learning_rate(&self) -> f64 {
        self.learning_rate
    }

    fn loss_grad(&self, x: &Tensor2, y: &Tensor2, dropout: Option<&mut rng::Rng>, grads: Option<&mut [Tensor2]>) -> Result<f64> {
        check_batch(x, y, 2 * NODES_PER_AREA, 3)?;
        let p = self.pass(x, dropout);
        let rows = x.rows();
        let scale = 1.0 / (rows * 3) as f64;
        let mut loss = 0.0;
        let mut dout = Tensor2::zeros(rows, 3);
        for r in 0..rows {
            let t = self.target_row(y.row(r));
            for (k, tk) in t.iter().enumerate() {
                let e = p.out.get(r, k) - tk;
                loss += e * e;
                dout.row_mut(r)[k] = 2.0 * e * scale;
            }
        }
        if let Some(g) = grads {
            let [gfw, gfb, gmw, gmb, ghw, ghb, gow, gob] = g else {
                return Err(Error::ShapeMismatch("regressor has 8 parameter groups".into()));
            };
            let mut h_in = p.h.clone();
            if let Some(m) = &p.mask2 {
                hadamard_in_place(&mut h_in, m);
            }
            let mut dh = self.out.backward(&h_in, &dout, gow, gob);
            if let Some(m) = &p.mask2 {
                hadamard_in_place(&mut dh, m);
            }
            for (d, a) in dh.data_mut().iter_mut().zip(p.h.data()) {
                *d *= 1.0 - a * a;
            }
            let mut dcat = self.hidden.backward(&p.cat, &dh, ghw, ghb);
            if let Some(m) = &p.mask1 {
                hadamard_in_place(&mut dcat, m);
            }
            let (a, b) = (&p.a, &p.b);
            let bw = a.cols();
            let mut da = Tensor2::zeros(rows, bw);
            let mut db = Tensor2::zeros(rows, bw);
            for r in 0..rows {
                for j in 0..bw {
                    let (va, vb) = (a.get(r, j), b.get(r, j));
                    da.row_mut(r)[j] = dcat.get(r, j) * (1.0 - va * va);
                    db.row_mut(r)[j] = dcat.get(r, bw + j) * (1.0 - vb * vb);
                }
            }
            self.branch_fg.backward(&p.xf, &da, gfw, gfb);
            self.branch_mask.backward(&p.xm, &db, gmw, gmb);
        }
        Ok(loss * scale)
    }
}

/// Random initial weights drawn like [`Dense::new`]; exposed for tests that
/// need a perturbed model.
pub fn jitter<N: Network, R: Rng + ?Sized>(model: &mut N, scale: f64, rng: &mut R) {
    for p in model.params_mut() {
        for v in p.data_mut() {
            *v += rng.random_range(-scale..=scale);
        }
    }
}
