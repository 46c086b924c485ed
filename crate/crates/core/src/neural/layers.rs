//! Dense and LSTM layers with explicit backward passes.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::tensor::{add_col_sums, add_row, gemm, Tensor2};

pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

fn uniform<R: Rng + ?Sized>(rows: usize, cols: usize, limit: f64, rng: &mut R) -> Tensor2 {
    let mut t = Tensor2::zeros(rows, cols);
    for v in t.data_mut() {
        *v = rng.random_range(-limit..=limit);
    }
    t
}

/// Inverted-dropout mask: entries are 0 or `1 / (1 - rate)`.
pub fn dropout_mask<R: Rng + ?Sized>(rows: usize, cols: usize, rate: f64, rng: &mut R) -> Tensor2 {
    let keep = 1.0 - rate;
    let mut t = Tensor2::zeros(rows, cols);
    for v in t.data_mut() {
        *v = if rng.random::<f64>() < keep { 1.0 / keep } else { 0.0 };
    }
    t
}

pub fn hadamard_in_place(x: &mut Tensor2, m: &Tensor2) {
    for (a, b) in x.data_mut().iter_mut().zip(m.data()) {
        *a *= b;
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dense {
    /// `inputs x outputs`.
    pub w: Tensor2,
    /// `1 x outputs`.
    pub b: Tensor2,
}

impl Dense {
    pub fn new<R: Rng + ?Sized>(inputs: usize, outputs: usize, rng: &mut R) -> Self {
        let limit = 1.0 / (inputs as f64).sqrt();
        Self { w: uniform(inputs, outputs, limit, rng), b: uniform(1, outputs, limit, rng) }
    }

    pub fn inputs(&self) -> usize {
        self.w.rows()
    }

    pub fn outputs(&self) -> usize {
        self.w.cols()
    }

    pub fn forward(&self, x: &Tensor2) -> Tensor2 {
        let mut y = Tensor2::zeros(x.rows(), self.outputs());
        gemm(1.0, x, false, &self.w, false, 0.0, &mut y);
        add_row(&mut y, &self.b);
        y
    }

    /// Accumulates parameter gradients and returns `dL/dx`.
    pub fn backward(&self, x: &Tensor2, dy: &Tensor2, gw: &mut Tensor2, gb: &mut Tensor2) -> Tensor2 {
        gemm(1.0, x, true, dy, false, 1.0, gw);
        add_col_sums(gb, dy);
        let mut dx = Tensor2::zeros(x.rows(), self.inputs());
        gemm(1.0, dy, false, &self.w, true, 0.0, &mut dx);
        dx
    }
}

/// Single LSTM layer. Gate columns are ordered input, forget, cell, output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Lstm {
    /// `inputs x 4*units`.
    pub wx: Tensor2,
    /// `units x 4*units`.
    pub wh: Tensor2,
    /// `1 x 4*units`.
    pub b: Tensor2,
}

/// Activations kept from the forward pass.
pub struct LstmCache {
    xs: Vec<Tensor2>,
    /// Post-activation gates per step, `batch x 4*units`.
    gates: Vec<Tensor2>,
    /// Cell states, index 0 is the initial zero state.
    cs: Vec<Tensor2>,
    /// Hidden states, index 0 is the initial zero state.
    hs: Vec<Tensor2>,
}

impl LstmCache {
    pub fn last_hidden(&self) -> &Tensor2 {
        self.hs.last().expect("at least the initial state")
    }
}

impl Lstm {
    pub fn new<R: Rng + ?Sized>(inputs: usize, units: usize, rng: &mut R) -> Self {
        let limit = 1.0 / ((inputs + units) as f64).sqrt();
        let mut b = Tensor2::zeros(1, 4 * units);
        b.data_mut()[units..2 * units].fill(1.0);
        Self { wx: uniform(inputs, 4 * units, limit, rng), wh: uniform(units, 4 * units, limit, rng), b }
    }

    pub fn units(&self) -> usize {
        self.wh.rows()
    }

    pub fn inputs(&self) -> usize {
        self.wx.rows()
    }

    /// Runs the recurrence over `xs` (one `batch x inputs` tensor per step).
    pub fn forward(&self, xs: &[Tensor2]) -> LstmCache {
        let u = self.units();
        let batch = xs.first().map_or(0, Tensor2::rows);
        let mut cache = LstmCache {
            xs: xs.to_vec(),
            gates: Vec::with_capacity(xs.len()),
            cs: vec![Tensor2::zeros(batch, u)],
            hs: vec![Tensor2::zeros(batch, u)],
        };
        for x in xs {
            let h_prev = cache.hs.last().expect("state");
            let c_prev = cache.cs.last().expect("state");
            let mut a = Tensor2::zeros(batch, 4 * u);
            gemm(1.0, x, false, &self.wx, false, 0.0, &mut a);
            gemm(1.0, h_prev, false, &self.wh, false, 1.0, &mut a);
            add_row(&mut a, &self.b);
            let mut c = Tensor2::zeros(batch, u);
            let mut h = Tensor2::zeros(batch, u);
            for r in 0..batch {
                let g = a.row_mut(r);
                for j in 0..u {
                    g[j] = sigmoid(g[j]);
                    g[u + j] = sigmoid(g[u + j]);
                    g[2 * u + j] = g[2 * u + j].tanh();
                    g[3 * u + j] = sigmoid(g[3 * u + j]);
                }
                let cp = c_prev.row(r);
                let cr = c.row_mut(r);
                for j in 0..u {
                    cr[j] = g[u + j] * cp[j] + g[j] * g[2 * u + j];
                }
                let hr = h.row_mut(r);
                for j in 0..u {
                    hr[j] = g[3 * u + j] * cr[j].tanh();
                }
            }
            cache.gates.push(a);
            cache.cs.push(c);
            cache.hs.push(h);
        }
        cache
    }

    /// Backpropagates `dh_last` (gradient at the final hidden state) through
    /// time, accumulating into `gwx`, `gwh`, `gb`.
    pub fn backward(&self, cache: &LstmCache, dh_last: &Tensor2, gwx: &mut Tensor2, gwh: &mut Tensor2, gb: &mut Tensor2) {
        let u = self.units();
        let batch = dh_last.rows();
        let mut dh = dh_last.clone();
        let mut dc = Tensor2::zeros(batch, u);
        let mut da = Tensor2::zeros(batch, 4 * u);
        for t in (0..cache.gates.len()).rev() {
            let g = &cache.gates[t];
            let c = &cache.cs[t + 1];
            let c_prev = &cache.cs[t];
            for r in 0..batch {
                let (gr, cr, cpr) = (g.row(r), c.row(r), c_prev.row(r));
                let dhr = dh.row(r);
                let dcr = dc.row_mut(r);
                let dar = da.row_mut(r);
                for j in 0..u {
                    let (i, f, gg, o) = (gr[j], gr[u + j], gr[2 * u + j], gr[3 * u + j]);
                    let tc = cr[j].tanh();
                    let dct = dcr[j] + dhr[j] * o * (1.0 - tc * tc);
                    dar[j] = dct * gg * i * (1.0 - i);
                    dar[u + j] = dct * cpr[j] * f * (1.0 - f);
                    dar[2 * u + j] = dct * i * (1.0 - gg * gg);
                    dar[3 * u + j] = dhr[j] * tc * o * (1.0 - o);
                    dcr[j] = dct * f;
                }
            }
            gemm(1.0, &cache.xs[t], true, &da, false, 1.0, gwx);
            gemm(1.0, &cache.hs[t], true, &da, false, 1.0, gwh);
            add_col_sums(gb, &da);
            gemm(1.0, &da, false, &self.wh, true, 0.0, &mut dh);
        }
    }
}
