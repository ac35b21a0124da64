//! Multi-layer networks without biases: `f(W_H · … f(W_1 · X))`.
//!
//! Gradients of the squared loss `½‖output − Y‖_F²` are available three
//! ways: the closed form for linear networks, backpropagation for any
//! elementwise activation, and central finite differences as an oracle.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::linalg::{numerical_rank, row_space_basis, DenseMatrix, RankTolerance};

/// Layer widths `d_0 = d_x, d_1, …, d_H = d_y`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct LayerDims(Vec<usize>);

impl LayerDims {
    pub fn new(dims: Vec<usize>) -> Result<Self> {
        if dims.len() < 2 {
            return Err(Error::invalid("a network needs at least two layer widths"));
        }
        if dims.contains(&0) {
            return Err(Error::invalid("layer widths must be positive"));
        }
        Ok(Self(dims))
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn input(&self) -> usize {
        self.0[0]
    }

    pub fn output(&self) -> usize {
        self.0[self.0.len() - 1]
    }

    /// Number of weight matrices `H`.
    pub fn depth(&self) -> usize {
        self.0.len() - 1
    }

    /// `(d_i, d_{i-1})`, the shape of weight matrix `i` (0-based).
    pub fn layer_shape(&self, i: usize) -> (usize, usize) {
        (self.0[i + 1], self.0[i])
    }

    pub fn parameter_count(&self) -> usize {
        self.0.windows(2).map(|w| w[0] * w[1]).sum()
    }
}

impl fmt::Display for LayerDims {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|d| d.to_string()).collect();
        write!(f, "{}", parts.join("x"))
    }
}

impl FromStr for LayerDims {
    type Err = Error;

    /// Accepts `1000x500x250` or `1000,500,250`.
    fn from_str(s: &str) -> Result<Self> {
        let dims = s
            .split(['x', 'X', ',', '×'])
            .map(|p| {
                p.trim()
                    .parse::<usize>()
                    .map_err(|_| Error::invalid(format!("bad layer width {p:?} in {s:?}")))
            })
            .collect::<Result<Vec<_>>>()?;
        LayerDims::new(dims)
    }
}

/// Weight matrices `W_1 … W_H`, `W_i` of shape `d_i × d_{i-1}`.
#[derive(Clone, Debug, PartialEq)]
pub struct NetworkWeights {
    layers: Vec<DenseMatrix>,
}

impl NetworkWeights {
    pub fn new(layers: Vec<DenseMatrix>) -> Result<Self> {
        if layers.is_empty() {
            return Err(Error::invalid("a network needs at least one layer"));
        }
        for (i, pair) in layers.windows(2).enumerate() {
            if pair[1].cols() != pair[0].rows() {
                return Err(Error::invalid(format!(
                    "layer {} has {} inputs but layer {} produces {} outputs",
                    i + 2,
                    pair[1].cols(),
                    i + 1,
                    pair[0].rows()
                )));
            }
        }
        if layers.iter().any(|w| !w.is_finite()) {
            return Err(Error::invalid("non-finite weight"));
        }
        Ok(Self { layers })
    }

    pub fn layers(&self) -> &[DenseMatrix] {
        &self.layers
    }

    pub fn layer(&self, i: usize) -> &DenseMatrix {
        &self.layers[i]
    }

    pub(crate) fn layers_mut(&mut self) -> &mut [DenseMatrix] {
        &mut self.layers
    }

    pub fn depth(&self) -> usize {
        self.layers.len()
    }

    pub fn dims(&self) -> LayerDims {
        let mut dims = vec![self.layers[0].cols()];
        dims.extend(self.layers.iter().map(|w| w.rows()));
        LayerDims(dims)
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].cols()
    }

    pub fn output_dim(&self) -> usize {
        self.layers[self.layers.len() - 1].rows()
    }

    pub fn into_layers(self) -> Vec<DenseMatrix> {
        self.layers
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ActivationKind {
    Linear,
    Sigmoid,
    Tanh,
}

impl ActivationKind {
    fn apply(self, z: f64) -> f64 {
        match self {
            ActivationKind::Linear => z,
            ActivationKind::Sigmoid => 1.0 / (1.0 + (-z).exp()),
            ActivationKind::Tanh => z.tanh(),
        }
    }

    /// Derivative expressed through the activation's output.
    fn derivative_from_output(self, a: f64) -> f64 {
        match self {
            ActivationKind::Linear => 1.0,
            ActivationKind::Sigmoid => a * (1.0 - a),
            ActivationKind::Tanh => 1.0 - a * a,
        }
    }
}

impl fmt::Display for ActivationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ActivationKind::Linear => "linear",
            ActivationKind::Sigmoid => "sigmoid",
            ActivationKind::Tanh => "tanh",
        })
    }
}

impl FromStr for ActivationKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "linear" | "identity" => Ok(ActivationKind::Linear),
            "sigmoid" => Ok(ActivationKind::Sigmoid),
            "tanh" => Ok(ActivationKind::Tanh),
            other => Err(Error::invalid(format!("unknown activation {other:?}"))),
        }
    }
}

/// Elementwise activation and where it is applied. Hidden layers always
/// use it; the output layer only when `at_output` is set.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Activation {
    pub kind: ActivationKind,
    pub at_output: bool,
}

impl Activation {
    pub const LINEAR: Activation = Activation {
        kind: ActivationKind::Linear,
        at_output: false,
    };

    pub fn hidden(kind: ActivationKind) -> Self {
        Self {
            kind,
            at_output: false,
        }
    }

    pub fn hidden_and_output(kind: ActivationKind) -> Self {
        Self {
            kind,
            at_output: true,
        }
    }

    pub fn is_linear(self) -> bool {
        self.kind == ActivationKind::Linear
    }

    fn applies_at(self, layer: usize, depth: usize) -> bool {
        layer + 1 < depth || self.at_output
    }
}

/// Inputs `X: d_x × m` and targets `Y: d_y × m`, one sample per column.
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    pub x: DenseMatrix,
    pub y: DenseMatrix,
}

impl Dataset {
    pub fn new(x: DenseMatrix, y: DenseMatrix) -> Result<Self> {
        if x.cols() != y.cols() {
            return Err(Error::invalid(format!(
                "X has {} samples but Y has {}",
                x.cols(),
                y.cols()
            )));
        }
        Ok(Self { x, y })
    }

    pub fn input_dim(&self) -> usize {
        self.x.rows()
    }

    pub fn output_dim(&self) -> usize {
        self.y.rows()
    }

    pub fn samples(&self) -> usize {
        self.x.cols()
    }

    /// Restriction to the listed sample columns.
    pub fn subset(&self, columns: &[usize]) -> Dataset {
        Dataset {
            x: self.x.select_columns(columns),
            y: self.y.select_columns(columns),
        }
    }
}

pub(crate) fn check_compatible(w: &NetworkWeights, d: &Dataset) -> Result<()> {
    if w.input_dim() != d.input_dim() || w.output_dim() != d.output_dim() {
        return Err(Error::invalid(format!(
            "network {} does not fit data {}→{}",
            w.dims(),
            d.input_dim(),
            d.output_dim()
        )));
    }
    Ok(())
}

/// `W_H · W_{H-1} · … · W_1`.
pub fn product_matrix(w: &NetworkWeights) -> DenseMatrix {
    let mut layers = w.layers().iter();
    let first = layers.next().expect("non-empty network").clone();
    layers.fold(first, |acc, wi| wi.matmul(&acc))
}

/// `W_{hi} · … · W_{lo}` over the 0-based inclusive range, or `None` when
/// the range is empty.
pub(crate) fn partial_product(w: &NetworkWeights, lo: usize, hi: usize) -> Option<DenseMatrix> {
    if lo > hi || hi >= w.depth() {
        return None;
    }
    let mut acc = w.layer(lo).clone();
    for i in lo + 1..=hi {
        acc = w.layer(i).matmul(&acc);
    }
    Some(acc)
}

/// Per-layer record of a forward pass. `inputs[i]` is what layer `i`
/// multiplied (after any mask); `outputs[i]` is its activated output.
pub(crate) struct ForwardTrace {
    pub inputs: Vec<DenseMatrix>,
    pub outputs: Vec<DenseMatrix>,
}

/// Forward pass with optional multiplicative masks on the inputs of layers
/// `1..H` (the hidden activations). `masks[i]` applies to the input of
/// layer `i`; `masks[0]` must be `None`.
pub(crate) fn forward_trace(
    w: &NetworkWeights,
    act: Activation,
    x: &DenseMatrix,
    masks: Option<&[Option<DenseMatrix>]>,
) -> ForwardTrace {
    let depth = w.depth();
    let mut inputs = Vec::with_capacity(depth);
    let mut outputs: Vec<DenseMatrix> = Vec::with_capacity(depth);
    for (i, wi) in w.layers().iter().enumerate() {
        let mut input = if i == 0 {
            x.clone()
        } else {
            outputs[i - 1].clone()
        };
        if let Some(mask) = masks.and_then(|m| m[i].as_ref()) {
            input = input.hadamard(mask);
        }
        let mut out = wi.matmul(&input);
        if act.applies_at(i, depth) && !act.is_linear() {
            let kind = act.kind;
            out = out.map(|z| kind.apply(z));
        }
        inputs.push(input);
        outputs.push(out);
    }
    ForwardTrace { inputs, outputs }
}

pub fn forward(w: &NetworkWeights, act: Activation, x: &DenseMatrix) -> DenseMatrix {
    forward_trace(w, act, x, None)
        .outputs
        .pop()
        .expect("non-empty network")
}

/// `½‖network(X) − Y‖_F²` for any activation.
pub fn network_loss(w: &NetworkWeights, act: Activation, d: &Dataset) -> Result<f64> {
    check_compatible(w, d)?;
    let out = forward(w, act, &d.x);
    Ok(0.5 * (&out - &d.y).frobenius_norm_sq())
}

/// `½‖R·X − Y‖_F²` with `R` the product matrix.
pub fn squared_loss(w: &NetworkWeights, d: &Dataset) -> Result<f64> {
    network_loss(w, Activation::LINEAR, d)
}

/// `∂L/∂W_i = W_{i+1}ᵀ⋯W_Hᵀ (R·X − Y) Xᵀ W_1ᵀ⋯W_{i-1}ᵀ` for a linear
/// network; `layer` is 0-based.
pub fn closed_form_gradient(
    w: &NetworkWeights,
    act: Activation,
    d: &Dataset,
    layer: usize,
) -> Result<DenseMatrix> {
    if !act.is_linear() {
        return Err(Error::UnsupportedActivation);
    }
    check_compatible(w, d)?;
    if layer >= w.depth() {
        return Err(Error::invalid(format!(
            "layer {layer} out of range for depth {}",
            w.depth()
        )));
    }
    let residual = &product_matrix(w).matmul(&d.x) - &d.y;
    let depth = w.depth();
    // left factor: (W_H⋯W_{i+1})ᵀ; right: (W_{i-1}⋯W_1 X)ᵀ
    let upstream = match partial_product(w, layer + 1, depth - 1) {
        Some(left) => left.t_matmul(&residual),
        None => residual,
    };
    let features = match layer
        .checked_sub(1)
        .and_then(|hi| partial_product(w, 0, hi))
    {
        Some(right) => right.matmul(&d.x),
        None => d.x.clone(),
    };
    Ok(upstream.matmul_t(&features))
}

pub(crate) fn backprop_with_masks(
    w: &NetworkWeights,
    act: Activation,
    x: &DenseMatrix,
    y: &DenseMatrix,
    masks: Option<&[Option<DenseMatrix>]>,
) -> Vec<DenseMatrix> {
    let depth = w.depth();
    let trace = forward_trace(w, act, x, masks);
    let mut grads = vec![None; depth];
    let mut delta = &trace.outputs[depth - 1] - y;
    for i in (0..depth).rev() {
        if act.applies_at(i, depth) && !act.is_linear() {
            let kind = act.kind;
            delta = delta.zip_map(&trace.outputs[i], |g, a| g * kind.derivative_from_output(a));
        }
        grads[i] = Some(delta.matmul_t(&trace.inputs[i]));
        if i > 0 {
            delta = w.layer(i).t_matmul(&delta);
            if let Some(mask) = masks.and_then(|m| m[i].as_ref()) {
                delta = delta.hadamard(mask);
            }
        }
    }
    grads
        .into_iter()
        .map(|g| g.expect("every layer visited"))
        .collect()
}

/// Gradients of `½‖network(X) − Y‖_F²` for every layer by reverse-mode
/// differentiation.
pub fn backprop_gradients(
    w: &NetworkWeights,
    act: Activation,
    d: &Dataset,
) -> Result<Vec<DenseMatrix>> {
    check_compatible(w, d)?;
    Ok(backprop_with_masks(w, act, &d.x, &d.y, None))
}

pub const FINITE_DIFFERENCE_STEP: f64 = 1e-6;

/// Central differences of the loss with respect to each entry of layer
/// `layer` (0-based), step [`FINITE_DIFFERENCE_STEP`].
pub fn finite_difference_gradient(
    w: &NetworkWeights,
    act: Activation,
    d: &Dataset,
    layer: usize,
) -> Result<DenseMatrix> {
    check_compatible(w, d)?;
    if layer >= w.depth() {
        return Err(Error::invalid(format!("layer {layer} out of range")));
    }
    let h = FINITE_DIFFERENCE_STEP;
    let mut probe = w.clone();
    let (rows, cols) = w.layer(layer).shape();
    let mut grad = DenseMatrix::zeros(rows, cols);
    for r in 0..rows {
        for c in 0..cols {
            let orig = w.layer(layer).get(r, c);
            probe.layers_mut()[layer].set(r, c, orig + h);
            let plus = network_loss(&probe, act, d)?;
            probe.layers_mut()[layer].set(r, c, orig - h);
            let minus = network_loss(&probe, act, d)?;
            probe.layers_mut()[layer].set(r, c, orig);
            grad.set(r, c, (plus - minus) / (2.0 * h));
        }
    }
    Ok(grad)
}

/// Least-squares floor `½‖Y − Y·Xᵀ(X·Xᵀ)⁻¹·X‖_F²`, the smallest squared
/// loss any linear network on this data can reach.
pub fn optimal_loss(d: &Dataset) -> Result<f64> {
    let dx = d.input_dim();
    if numerical_rank(&d.x, RankTolerance::DEFAULT)? < dx {
        return Err(Error::AssumptionViolated(
            "X·Xᵀ is singular (X lacks full row rank)".into(),
        ));
    }
    let q = row_space_basis(&d.x)?;
    let projected = d.y.matmul(&q).matmul_t(&q);
    Ok(0.5 * (&d.y - &projected).frobenius_norm_sq())
}
