use ndarray::{s, Array1, Array2, ArrayView2, Axis, Zip};
use rand::distr::{Distribution, Uniform};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{BetaSchedule, ModelConfig, Variant};
use crate::error::{Error, Result};
use crate::graph::AdjustedTransition;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DecayGroup {
    Hidden,
    FullyConnected,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Tensor {
    pub name: String,
    pub group: DecayGroup,
    pub value: Array2<f64>,
}

/// All trainable tensors in a fixed order. Biases are stored as `1 × k`.
///
/// Shallow: `conv1 … convL, out.weight, out.bias`.
/// Deep: `in.weight, in.bias, conv1 … convL, out.weight, out.bias`.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParameters {
    pub variant: Variant,
    pub tensors: Vec<Tensor>,
    pub init_scheme: String,
    pub init_seed: u64,
}

fn glorot(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> Array2<f64> {
    let limit = (6.0 / (rows + cols) as f64).sqrt();
    let dist = Uniform::new_inclusive(-limit, limit).expect("finite bounds");
    Array2::from_shape_simple_fn((rows, cols), || dist.sample(rng))
}

impl ModelParameters {
    /// Glorot-uniform weights and zero biases, seeded from `cfg.seed`.
    pub fn init(cfg: &ModelConfig, in_features: usize) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let h = cfg.hidden_dim;
        let mut tensors = Vec::new();
        let mut push = |name: String, group, value| tensors.push(Tensor { name, group, value });
        match cfg.variant {
            Variant::Shallow => {
                for l in 0..cfg.hidden_layers {
                    let rows = if l == 0 { in_features } else { h };
                    push(format!("conv{}", l + 1), DecayGroup::Hidden, glorot(rows, h, &mut rng));
                }
            }
            Variant::Deep => {
                push("in.weight".into(), DecayGroup::FullyConnected, glorot(in_features, h, &mut rng));
                push("in.bias".into(), DecayGroup::FullyConnected, Array2::zeros((1, h)));
                for l in 0..cfg.hidden_layers {
                    push(format!("conv{}", l + 1), DecayGroup::Hidden, glorot(h, h, &mut rng));
                }
            }
        }
        push("out.weight".into(), DecayGroup::FullyConnected, glorot(h, 2, &mut rng));
        push("out.bias".into(), DecayGroup::FullyConnected, Array2::zeros((1, 2)));
        Self { variant: cfg.variant, tensors, init_scheme: "glorot-uniform".into(), init_seed: cfg.seed }
    }

    pub fn in_features(&self) -> usize {
        self.tensors[0].value.nrows()
    }

    pub fn conv_count(&self) -> usize {
        self.tensors.iter().filter(|t| t.group == DecayGroup::Hidden).count()
    }

    fn conv_offset(&self) -> usize {
        match self.variant {
            Variant::Shallow => 0,
            Variant::Deep => 2,
        }
    }

    fn conv(&self, l: usize) -> &Array2<f64> {
        &self.tensors[self.conv_offset() + l].value
    }

    fn out(&self) -> (&Array2<f64>, &Array2<f64>) {
        let k = self.tensors.len();
        (&self.tensors[k - 2].value, &self.tensors[k - 1].value)
    }

    pub fn is_finite(&self) -> bool {
        self.tensors.iter().all(|t| t.value.iter().all(|x| x.is_finite()))
    }

    /// Checks that the tensor shapes match `cfg` and `in_features`.
    pub fn check_shapes(&self, cfg: &ModelConfig, in_features: usize) -> Result<()> {
        let expected = Self::init(&ModelConfig { seed: 0, ..*cfg }, in_features);
        let same = self.variant == cfg.variant
            && self.tensors.len() == expected.tensors.len()
            && self.tensors.iter().zip(&expected.tensors).all(|(a, b)| a.value.dim() == b.value.dim() && a.name == b.name);
        if same {
            Ok(())
        } else {
            Err(Error::DimensionMismatch(format!(
                "parameters do not fit a {:?} model with {} layers, width {}, and {} input features",
                cfg.variant, cfg.hidden_layers, cfg.hidden_dim, in_features
            )))
        }
    }
}

/// `β_ℓ` for layer `ℓ ≥ 1`.
pub fn beta_for_layer(layer: usize, lambda: f64, schedule: BetaSchedule) -> f64 {
    let ratio = lambda / layer as f64;
    match schedule {
        BetaSchedule::Log => ratio.ln_1p(),
        BetaSchedule::Linear => ratio,
    }
}

fn relu(z: &Array2<f64>) -> Array2<f64> {
    z.mapv(|x| x.max(0.0))
}

fn check_inner(left: (usize, usize), right: (usize, usize), what: &str) -> Result<()> {
    if left.1 != right.0 {
        return Err(Error::DimensionMismatch(format!(
            "{what}: cannot multiply {}x{} by {}x{}",
            left.0, left.1, right.0, right.1
        )));
    }
    Ok(())
}

/// `relu(P̃ H W)`.
pub fn shallow_layer(p: &AdjustedTransition, h: ArrayView2<'_, f64>, w: ArrayView2<'_, f64>) -> Result<Array2<f64>> {
    check_inner(h.dim(), w.dim(), "graph convolution")?;
    Ok(relu(&p.apply(h)?.dot(&w)))
}

/// `relu(((1-α) P̃ H + α H0) ((1-β) I + β W))` with an explicit `β`.
pub fn gcnii_layer_with_beta(
    p: &AdjustedTransition,
    h: ArrayView2<'_, f64>,
    h0: ArrayView2<'_, f64>,
    w: ArrayView2<'_, f64>,
    alpha: f64,
    beta: f64,
) -> Result<Array2<f64>> {
    if h.dim() != h0.dim() {
        return Err(Error::DimensionMismatch(format!(
            "layer input is {:?} but initial representation is {:?}",
            h.dim(),
            h0.dim()
        )));
    }
    check_inner(h.dim(), w.dim(), "residual convolution")?;
    if w.nrows() != w.ncols() {
        return Err(Error::DimensionMismatch(format!("residual weight must be square, got {:?}", w.dim())));
    }
    let mut support = p.apply(h)?;
    support *= 1.0 - alpha;
    support.scaled_add(alpha, &h0);
    let mut z = support.dot(&w) * beta;
    z.scaled_add(1.0 - beta, &support);
    Ok(relu(&z))
}

/// Residual convolution at layer `ℓ ≥ 1` with the log schedule for `β_ℓ`.
pub fn gcnii_layer(
    p: &AdjustedTransition,
    h: ArrayView2<'_, f64>,
    h0: ArrayView2<'_, f64>,
    w: ArrayView2<'_, f64>,
    layer: usize,
    alpha: f64,
    lambda: f64,
) -> Result<Array2<f64>> {
    if layer == 0 {
        return Err(Error::InvalidConfig("residual layers are numbered from 1".into()));
    }
    gcnii_layer_with_beta(p, h, h0, w, alpha, beta_for_layer(layer, lambda, BetaSchedule::Log))
}

/// Row-wise log-softmax with max subtraction.
pub fn log_softmax(logits: &Array2<f64>) -> Array2<f64> {
    let mut out = logits.clone();
    for mut row in out.rows_mut() {
        let m = row.fold(f64::NEG_INFINITY, |a, &b| a.max(b));
        let lse = m + row.iter().map(|x| (x - m).exp()).sum::<f64>().ln();
        row.mapv_inplace(|x| x - lse);
    }
    out
}

/// Mean negative log-probability of the true class over `mask`.
pub fn loss(log_probs: &Array2<f64>, labels: &[u8], mask: &[usize]) -> Result<f64> {
    if mask.is_empty() {
        return Err(Error::EmptyMask);
    }
    if labels.len() != log_probs.nrows() {
        return Err(Error::LengthMismatch { left: labels.len(), right: log_probs.nrows() });
    }
    let total: f64 = mask.iter().map(|&u| -log_probs[[u, labels[u] as usize]]).sum();
    Ok(total / mask.len() as f64)
}

struct ConvCache {
    /// Dropout mask applied to this layer's input, if any.
    keep: Option<Array2<f64>>,
    /// Shallow: `P̃ H`. Deep: the mixed support `(1-α) P̃ H + α H0`.
    support: Array2<f64>,
    pre: Array2<f64>,
    beta: f64,
}

/// Activations retained for the backward pass.
pub struct ForwardPass {
    pub log_probs: Array2<f64>,
    input_pre: Option<Array2<f64>>,
    convs: Vec<ConvCache>,
    out_keep: Option<Array2<f64>>,
    out_input: Array2<f64>,
}

fn dropout(h: &Array2<f64>, rate: f64, rng: Option<&mut ChaCha8Rng>) -> (Array2<f64>, Option<Array2<f64>>) {
    match rng {
        Some(rng) if rate > 0.0 => {
            let scale = 1.0 / (1.0 - rate);
            let keep = Array2::from_shape_simple_fn(h.dim(), || if rng.random::<f64>() < rate { 0.0 } else { scale });
            (h * &keep, Some(keep))
        }
        _ => (h.clone(), None),
    }
}

/// Full forward pass. Dropout is applied to every hidden representation
/// fed into a convolution or the output map when `rng` is given; raw input
/// features are never dropped.
pub fn forward(
    params: &ModelParameters,
    cfg: &ModelConfig,
    p: &AdjustedTransition,
    x: ArrayView2<'_, f64>,
    mut rng: Option<&mut ChaCha8Rng>,
) -> Result<ForwardPass> {
    if x.ncols() != params.in_features() {
        return Err(Error::DimensionMismatch(format!(
            "model expects {} features, got {}",
            params.in_features(),
            x.ncols()
        )));
    }
    if x.nrows() != p.dim() {
        return Err(Error::DimensionMismatch(format!("{} feature rows for {} nodes", x.nrows(), p.dim())));
    }
    let mut convs = Vec::with_capacity(params.conv_count());
    let mut input_pre = None;
    let mut h;
    match params.variant {
        Variant::Shallow => {
            h = x.to_owned();
            for l in 0..params.conv_count() {
                let (input, keep) = if l == 0 { (h, None) } else { dropout(&h, cfg.dropout, rng.as_deref_mut()) };
                let support = p.apply(input.view())?;
                let pre = support.dot(params.conv(l));
                h = relu(&pre);
                convs.push(ConvCache { keep, support, pre, beta: 1.0 });
            }
        }
        Variant::Deep => {
            let pre0 = x.dot(&params.tensors[0].value) + &params.tensors[1].value;
            let h0 = relu(&pre0);
            input_pre = Some(pre0);
            h = h0.clone();
            for l in 0..params.conv_count() {
                let (input, keep) = dropout(&h, cfg.dropout, rng.as_deref_mut());
                let mut support = p.apply(input.view())?;
                support *= 1.0 - cfg.alpha;
                support.scaled_add(cfg.alpha, &h0);
                let beta = beta_for_layer(l + 1, cfg.lambda, cfg.beta_schedule);
                let mut pre = support.dot(params.conv(l)) * beta;
                pre.scaled_add(1.0 - beta, &support);
                h = relu(&pre);
                convs.push(ConvCache { keep, support, pre, beta });
            }
        }
    }
    let (out_input, out_keep) = dropout(&h, cfg.dropout, rng.as_deref_mut());
    let (w, b) = params.out();
    let logits = out_input.dot(w) + b;
    if logits.iter().any(|v| !v.is_finite()) {
        return Err(Error::Divergence { epoch: 0, trace: Box::default() });
    }
    let log_probs = log_softmax(&logits);
    Ok(ForwardPass { log_probs, input_pre, convs, out_keep, out_input })
}

fn relu_grad(grad: &mut Array2<f64>, pre: &Array2<f64>) {
    Zip::from(grad).and(pre).for_each(|g, &z| {
        if z <= 0.0 {
            *g = 0.0;
        }
    });
}

fn apply_keep(grad: &mut Array2<f64>, keep: &Option<Array2<f64>>) {
    if let Some(k) = keep {
        *grad *= k;
    }
}

fn column_sums(m: &Array2<f64>) -> Array2<f64> {
    let sums: Array1<f64> = m.sum_axis(Axis(0));
    sums.insert_axis(Axis(0))
}

/// Masked mean loss and its gradient with respect to every tensor (weight
/// decay excluded), in `params.tensors` order.
pub fn loss_and_gradients(
    params: &ModelParameters,
    cfg: &ModelConfig,
    p: &AdjustedTransition,
    x: ArrayView2<'_, f64>,
    labels: &[u8],
    mask: &[usize],
    rng: Option<&mut ChaCha8Rng>,
) -> Result<(f64, Vec<Array2<f64>>)> {
    let fp = forward(params, cfg, p, x, rng)?;
    let value = loss(&fp.log_probs, labels, mask)?;
    let n = x.nrows();
    let scale = 1.0 / mask.len() as f64;
    let mut dlogits = Array2::<f64>::zeros((n, 2));
    for &u in mask {
        let row = fp.log_probs.slice(s![u, ..]);
        for c in 0..2 {
            dlogits[[u, c]] += row[c].exp() * scale;
        }
        dlogits[[u, labels[u] as usize]] -= scale;
    }

    let mut grads: Vec<Array2<f64>> = params.tensors.iter().map(|t| Array2::zeros(t.value.dim())).collect();
    let k = grads.len();
    let (w_out, _) = params.out();
    grads[k - 2] = fp.out_input.t().dot(&dlogits);
    grads[k - 1] = column_sums(&dlogits);
    let mut dh = dlogits.dot(&w_out.t());
    apply_keep(&mut dh, &fp.out_keep);

    let off = params.conv_offset();
    match params.variant {
        Variant::Shallow => {
            for l in (0..fp.convs.len()).rev() {
                let c = &fp.convs[l];
                relu_grad(&mut dh, &c.pre);
                let w = params.conv(l);
                grads[off + l] = c.support.t().dot(&dh);
                if l > 0 {
                    dh = p.apply(dh.dot(&w.t()).view())?;
                    apply_keep(&mut dh, &c.keep);
                }
            }
        }
        Variant::Deep => {
            let mut dh0 = Array2::<f64>::zeros(dh.dim());
            for l in (0..fp.convs.len()).rev() {
                let c = &fp.convs[l];
                relu_grad(&mut dh, &c.pre);
                let w = params.conv(l);
                grads[off + l] = c.support.t().dot(&dh) * c.beta;
                let mut ds = dh.dot(&w.t()) * c.beta;
                ds.scaled_add(1.0 - c.beta, &dh);
                dh0.scaled_add(cfg.alpha, &ds);
                dh = p.apply(ds.view())? * (1.0 - cfg.alpha);
                apply_keep(&mut dh, &c.keep);
            }
            dh += &dh0;
            relu_grad(&mut dh, fp.input_pre.as_ref().expect("deep pass stores the input map"));
            grads[0] = x.t().dot(&dh);
            grads[1] = column_sums(&dh);
        }
    }
    Ok((value, grads))
}
