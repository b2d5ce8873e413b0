//! Feedforward multilayer perceptron trained by batched backpropagation
//! with momentum. Hidden layers are tanh, the output layer is a logistic
//! sigmoid over one-hot targets.

use std::fmt;

use crate::harness::SplitMix64;

#[derive(Debug)]
pub enum MlpError {
    BadConfig { reason: String },
    DimensionMismatch { expected: usize, got: usize },
    EmptyDataset,
    Parse { line: usize, reason: String },
}

impl fmt::Display for MlpError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MlpError::BadConfig { reason } => write!(f, "invalid configuration: {reason}"),
            MlpError::DimensionMismatch { expected, got } => {
                write!(f, "input has {got} values, network expects {expected}")
            }
            MlpError::EmptyDataset => write!(f, "training set is empty"),
            MlpError::Parse { line, reason } => {
                write!(f, "model file parse error at line {line}: {reason}")
            }
        }
    }
}

impl std::error::Error for MlpError {}

#[derive(Debug, Clone, PartialEq)]
pub struct MlpConfig {
    /// Input, hidden..., output sizes. At least three layers.
    pub layer_sizes: Vec<usize>,
    pub learning_rate: f64,
    pub momentum: f64,
    pub epochs: usize,
    pub seed: u64,
    /// Initial weights are uniform in `[-init_scale, init_scale]`.
    pub init_scale: f64,
}

impl Default for MlpConfig {
    fn default() -> Self {
        Self {
            layer_sizes: vec![324, 90, 90, 3],
            learning_rate: 0.05,
            momentum: 0.1,
            epochs: 5000,
            seed: 1,
            init_scale: 0.1,
        }
    }
}

impl MlpConfig {
    pub fn validate(&self) -> Result<(), MlpError> {
        let fail = |reason: String| Err(MlpError::BadConfig { reason });
        if self.layer_sizes.len() < 3 {
            return fail(format!("need at least 3 layers, got {}", self.layer_sizes.len()));
        }
        if self.layer_sizes.contains(&0) {
            return fail("every layer needs at least 1 unit".into());
        }
        if !(self.learning_rate >= 0.0 && self.learning_rate.is_finite()) {
            return fail(format!("learning rate must be finite and >= 0, got {}", self.learning_rate));
        }
        if !(self.momentum >= 0.0 && self.momentum < 1.0) {
            return fail(format!("momentum must be in [0,1), got {}", self.momentum));
        }
        if !(self.init_scale >= 0.0 && self.init_scale.is_finite()) {
            return fail(format!("init_scale must be finite and >= 0, got {}", self.init_scale));
        }
        Ok(())
    }
}

/// Dense weight matrix with the bias as a trailing column.
#[derive(Debug, Clone, PartialEq)]
struct WeightMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl WeightMatrix {
    fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![0.0; rows * cols] }
    }

    fn at(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MlpModel {
    config: MlpConfig,
    weights: Vec<WeightMatrix>,
    prev_deltas: Vec<WeightMatrix>,
}

fn sigmoid(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

impl MlpModel {
    /// Seeded uniform initialization; identical seeds give identical weights.
    pub fn init(config: MlpConfig) -> Result<Self, MlpError> {
        config.validate()?;
        let mut rng = SplitMix64::new(config.seed);
        let mut weights = Vec::new();
        let mut prev_deltas = Vec::new();
        for pair in config.layer_sizes.windows(2) {
            let (fan_in, fan_out) = (pair[0], pair[1]);
            let mut w = WeightMatrix::zeros(fan_out, fan_in + 1);
            for v in &mut w.data {
                *v = (rng.next_f64() * 2.0 - 1.0) * config.init_scale;
            }
            prev_deltas.push(WeightMatrix::zeros(fan_out, fan_in + 1));
            weights.push(w);
        }
        Ok(Self { config, weights, prev_deltas })
    }

    pub fn config(&self) -> &MlpConfig {
        &self.config
    }

    pub fn input_size(&self) -> usize {
        self.config.layer_sizes[0]
    }

    pub fn output_size(&self) -> usize {
        *self.config.layer_sizes.last().unwrap()
    }

    pub fn weight_count(&self) -> usize {
        self.weights.iter().map(|w| w.data.len()).sum()
    }

    /// Activations of every layer (input first, output last).
    pub fn forward(&self, x: &[f64]) -> Result<Vec<Vec<f64>>, MlpError> {
        if x.len() != self.input_size() {
            return Err(MlpError::DimensionMismatch { expected: self.input_size(), got: x.len() });
        }
        let last = self.weights.len() - 1;
        let mut layers = Vec::with_capacity(self.weights.len() + 1);
        layers.push(x.to_vec());
        for (l, w) in self.weights.iter().enumerate() {
            let prev = layers.last().unwrap();
            let mut out = Vec::with_capacity(w.rows);
            for r in 0..w.rows {
                let mut z = w.at(r, w.cols - 1); // bias input is always 1
                for (c, &a) in prev.iter().enumerate() {
                    z += w.at(r, c) * a;
                }
                out.push(if l == last { sigmoid(z) } else { z.tanh() });
            }
            layers.push(out);
        }
        Ok(layers)
    }

    pub fn output(&self, x: &[f64]) -> Result<Vec<f64>, MlpError> {
        Ok(self.forward(x)?.pop().unwrap())
    }

    /// Winning class by output argmax; ties go to the lowest index.
    pub fn predict(&self, x: &[f64]) -> Result<usize, MlpError> {
        let out = self.output(x)?;
        let mut best = 0;
        for (i, &v) in out.iter().enumerate().skip(1) {
            if v > out[best] {
                best = i;
            }
        }
        Ok(best)
    }

    /// Gradient of the batch error `E = 1/(2P) * sum (output - target)^2`
    /// over all `P` examples, plus the pre-update RMSE over all examples
    /// and outputs.
    pub fn batch_gradient(
        &self,
        inputs: &[Vec<f64>],
        targets: &[Vec<f64>],
    ) -> Result<(Vec<Vec<f64>>, f64), MlpError> {
        if inputs.is_empty() {
            return Err(MlpError::EmptyDataset);
        }
        if inputs.len() != targets.len() {
            return Err(MlpError::DimensionMismatch {
                expected: inputs.len(),
                got: targets.len(),
            });
        }
        let out_size = self.output_size();
        let mut grads: Vec<Vec<f64>> =
            self.weights.iter().map(|w| vec![0.0; w.data.len()]).collect();
        let mut sq_err = 0.0;
        for (x, t) in inputs.iter().zip(targets) {
            if t.len() != out_size {
                return Err(MlpError::DimensionMismatch { expected: out_size, got: t.len() });
            }
            let layers = self.forward(x)?;
            let output = layers.last().unwrap();

            // output delta: (o - t) * o * (1 - o)
            let mut delta: Vec<f64> = output
                .iter()
                .zip(t)
                .map(|(&o, &tv)| {
                    let e = o - tv;
                    sq_err += e * e;
                    e * o * (1.0 - o)
                })
                .collect();

            for l in (0..self.weights.len()).rev() {
                let prev = &layers[l];
                let w = &self.weights[l];
                let g = &mut grads[l];
                for (r, &d) in delta.iter().enumerate() {
                    let row = r * w.cols;
                    for (c, &a) in prev.iter().enumerate() {
                        g[row + c] += d * a;
                    }
                    g[row + w.cols - 1] += d; // bias input
                }
                if l > 0 {
                    // back through the weights, then the tanh derivative
                    let mut next = vec![0.0; prev.len()];
                    for (c, n) in next.iter_mut().enumerate() {
                        let mut acc = 0.0;
                        for (r, &d) in delta.iter().enumerate() {
                            acc += d * w.at(r, c);
                        }
                        *n = acc * (1.0 - prev[c] * prev[c]);
                    }
                    delta = next;
                }
            }
        }
        let scale = 1.0 / inputs.len() as f64;
        for g in &mut grads {
            for v in g {
                *v *= scale;
            }
        }
        let rmse = (sq_err / (inputs.len() * out_size) as f64).sqrt();
        Ok((grads, rmse))
    }

    /// One batched epoch: `delta_w = -lr * grad + momentum * prev_delta`.
    /// Returns the RMSE measured before the update.
    pub fn train_epoch(
        &mut self,
        inputs: &[Vec<f64>],
        targets: &[Vec<f64>],
    ) -> Result<f64, MlpError> {
        let (grads, rmse) = self.batch_gradient(inputs, targets)?;
        let lr = self.config.learning_rate;
        let momentum = self.config.momentum;
        for ((w, prev), g) in self.weights.iter_mut().zip(&mut self.prev_deltas).zip(&grads) {
            for ((wv, pv), &gv) in w.data.iter_mut().zip(&mut prev.data).zip(g) {
                let delta = -lr * gv + momentum * *pv;
                *wv += delta;
                *pv = delta;
            }
        }
        Ok(rmse)
    }

    /// Compare the analytic gradient against central finite differences on a
    /// single example; returns the worst relative error over all weights.
    pub fn gradient_check(&self, x: &[f64], target: &[f64]) -> Result<f64, MlpError> {
        let step = 1e-6;
        let inputs = vec![x.to_vec()];
        let targets = vec![target.to_vec()];
        let (analytic, _) = self.batch_gradient(&inputs, &targets)?;
        let mut worst: f64 = 0.0;
        let mut probe = self.clone();
        for (l, layer) in analytic.iter().enumerate() {
            for (i, &a) in layer.iter().enumerate() {
                let original = self.weights[l].data[i];
                probe.weights[l].data[i] = original + step;
                let up = probe.loss(x, target)?;
                probe.weights[l].data[i] = original - step;
                let down = probe.loss(x, target)?;
                probe.weights[l].data[i] = original;
                let numeric = (up - down) / (2.0 * step);
                let rel = (a - numeric).abs() / a.abs().max(numeric.abs()).max(1e-12);
                worst = worst.max(rel);
            }
        }
        Ok(worst)
    }

    fn loss(&self, x: &[f64], target: &[f64]) -> Result<f64, MlpError> {
        let out = self.output(x)?;
        Ok(0.5 * out.iter().zip(target).map(|(o, t)| (o - t) * (o - t)).sum::<f64>())
    }

    /// Deterministic line-oriented text form; `from_text` restores it
    /// bit-exactly.
    pub fn to_text(&self) -> String {
        let c = &self.config;
        let mut out = String::new();
        out.push_str("texclass-mlp 1\n");
        out.push_str("layers");
        for s in &c.layer_sizes {
            out.push_str(&format!(" {s}"));
        }
        out.push('\n');
        out.push_str(&format!("learning_rate {}\n", c.learning_rate));
        out.push_str(&format!("momentum {}\n", c.momentum));
        out.push_str(&format!("epochs {}\n", c.epochs));
        out.push_str(&format!("seed {}\n", c.seed));
        out.push_str(&format!("init_scale {}\n", c.init_scale));
        for (section, matrices) in
            [("weights", &self.weights), ("prev_deltas", &self.prev_deltas)]
        {
            for (l, w) in matrices.iter().enumerate() {
                out.push_str(&format!("{section} {l} {} {}\n", w.rows, w.cols));
                for r in 0..w.rows {
                    out.push_str("row");
                    for v in &w.data[r * w.cols..(r + 1) * w.cols] {
                        out.push_str(&format!(" {v}"));
                    }
                    out.push('\n');
                }
            }
        }
        out.push_str("end\n");
        out
    }

    pub fn from_text(text: &str) -> Result<Self, MlpError> {
        let mut reader = Reader { lines: text.lines(), line_no: 0 };
        reader.expect_exact("texclass-mlp 1")?;

        let layers_raw = reader.kv_str("layers")?;
        let layer_sizes: Vec<usize> = layers_raw
            .split(' ')
            .map(|t| t.parse::<usize>())
            .collect::<Result<_, _>>()
            .map_err(|_| reader.error("bad layer size"))?;
        let learning_rate = reader.kv_float("learning_rate")?;
        let momentum = reader.kv_float("momentum")?;
        let epochs: usize = reader
            .kv_str("epochs")?
            .parse()
            .map_err(|_| reader.error("bad epochs"))?;
        let seed: u64 =
            reader.kv_str("seed")?.parse().map_err(|_| reader.error("bad seed"))?;
        let init_scale = reader.kv_float("init_scale")?;
        let config =
            MlpConfig { layer_sizes, learning_rate, momentum, epochs, seed, init_scale };
        config
            .validate()
            .map_err(|e| MlpError::Parse { line: 0, reason: e.to_string() })?;

        let layer_count = config.layer_sizes.len() - 1;
        let mut sections: Vec<Vec<WeightMatrix>> = Vec::new();
        for section in ["weights", "prev_deltas"] {
            let mut matrices = Vec::new();
            for l in 0..layer_count {
                let head = reader.next_line()?;
                let parts: Vec<&str> = head.split(' ').collect();
                if parts.len() != 4 || parts[0] != section {
                    return Err(reader.error(&format!("expected `{section} {l} <rows> <cols>`")));
                }
                let index: usize =
                    parts[1].parse().map_err(|_| reader.error("bad layer index"))?;
                if index != l {
                    return Err(reader.error(&format!("expected layer {l}, got {index}")));
                }
                let rows: usize =
                    parts[2].parse().map_err(|_| reader.error("bad row count"))?;
                let cols: usize =
                    parts[3].parse().map_err(|_| reader.error("bad column count"))?;
                if rows != config.layer_sizes[l + 1] || cols != config.layer_sizes[l] + 1 {
                    return Err(reader.error("matrix shape does not match layers"));
                }
                let mut data = Vec::new();
                for _ in 0..rows {
                    let line = reader.next_line()?;
                    let rest = line
                        .strip_prefix("row ")
                        .ok_or_else(|| reader.error("expected `row <values>`"))?;
                    let mut count = 0;
                    for tok in rest.split(' ') {
                        let v = tok
                            .parse::<f64>()
                            .ok()
                            .filter(|v| v.is_finite())
                            .ok_or_else(|| reader.error(&format!("bad weight {tok:?}")))?;
                        data.push(v);
                        count += 1;
                    }
                    if count != cols {
                        return Err(
                            reader.error(&format!("row has {count} values, expected {cols}"))
                        );
                    }
                }
                matrices.push(WeightMatrix { rows, cols, data });
            }
            sections.push(matrices);
        }
        reader.expect_exact("end")?;
        if reader.lines.next().is_some() {
            return Err(MlpError::Parse {
                line: reader.line_no + 1,
                reason: "trailing data after end marker".to_string(),
            });
        }
        let prev_deltas = sections.pop().unwrap();
        let weights = sections.pop().unwrap();
        Ok(Self { config, weights, prev_deltas })
    }
}

struct Reader<'a> {
    lines: std::str::Lines<'a>,
    line_no: usize,
}

impl<'a> Reader<'a> {
    fn error(&self, reason: &str) -> MlpError {
        MlpError::Parse { line: self.line_no, reason: reason.to_string() }
    }

    fn next_line(&mut self) -> Result<&'a str, MlpError> {
        self.line_no += 1;
        self.lines.next().ok_or(MlpError::Parse {
            line: self.line_no,
            reason: "unexpected end of file".to_string(),
        })
    }

    fn expect_exact(&mut self, expected: &str) -> Result<(), MlpError> {
        let line = self.next_line()?;
        if line != expected {
            return Err(self.error(&format!("expected {expected:?}, got {line:?}")));
        }
        Ok(())
    }

    fn kv_str(&mut self, key: &str) -> Result<&'a str, MlpError> {
        let line = self.next_line()?;
        line.strip_prefix(key)
            .and_then(|rest| rest.strip_prefix(' '))
            .ok_or_else(|| self.error(&format!("expected `{key} <value>`, got {line:?}")))
    }

    fn kv_float(&mut self, key: &str) -> Result<f64, MlpError> {
        let raw = self.kv_str(key)?;
        raw.parse::<f64>()
            .ok()
            .filter(|v| v.is_finite())
            .ok_or_else(|| self.error(&format!("bad value {raw:?} for {key}")))
    }
}
