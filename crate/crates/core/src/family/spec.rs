use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::algebra::{enumerate_monomials, MonomialBasis};
use crate::error::{Error, Result};

/// Unary non-rational functions available as base functions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BaseKind {
    Sin,
    Cos,
    Exp,
    Sqrt,
    Log,
}

impl BaseKind {
    pub const ALL: [BaseKind; 5] = [
        BaseKind::Sin,
        BaseKind::Cos,
        BaseKind::Exp,
        BaseKind::Sqrt,
        BaseKind::Log,
    ];

    pub fn name(self) -> &'static str {
        match self {
            BaseKind::Sin => "sin",
            BaseKind::Cos => "cos",
            BaseKind::Exp => "exp",
            BaseKind::Sqrt => "sqrt",
            BaseKind::Log => "log",
        }
    }
}

impl fmt::Display for BaseKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for BaseKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        BaseKind::ALL
            .into_iter()
            .find(|k| k.name() == s.trim())
            .ok_or_else(|| Error::InvalidConfig(format!("unknown base function `{s}`")))
    }
}

/// A base function together with the highest power of its output allowed
/// inside the output rational.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct BaseFunction {
    pub kind: BaseKind,
    pub power_cap: u32,
}

impl BaseFunction {
    pub fn new(kind: BaseKind) -> Self {
        Self { kind, power_cap: 1 }
    }
}

/// Discrete choices that define one parametric family.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ModelSpec {
    pub n_vars: usize,
    pub base_functions: Vec<BaseFunction>,
    pub deg_input_num: u32,
    pub deg_input_den: u32,
    pub deg_output_num: u32,
    pub deg_output_den: u32,
    pub max_var_power: u32,
}

impl ModelSpec {
    /// A plain polynomial of the given degree.
    pub fn polynomial(n_vars: usize, degree: u32, max_var_power: u32) -> Self {
        Self {
            n_vars,
            base_functions: Vec::new(),
            deg_input_num: 0,
            deg_input_den: 0,
            deg_output_num: degree,
            deg_output_den: 0,
            max_var_power,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_vars == 0 {
            return Err(Error::InvalidSpec("n_vars must be at least 1".into()));
        }
        if self.deg_output_num == 0 {
            return Err(Error::InvalidSpec(
                "output numerator degree must be at least 1".into(),
            ));
        }
        if let Some(bf) = self.base_functions.iter().find(|b| b.power_cap == 0) {
            return Err(Error::InvalidSpec(format!(
                "power cap of {} must be at least 1",
                bf.kind
            )));
        }
        Ok(())
    }

    pub fn n_base(&self) -> usize {
        self.base_functions.len()
    }

    /// Whether the output rational carries a denominator block.
    pub fn has_output_den(&self) -> bool {
        self.deg_output_den >= 1
    }

    pub fn input_num_basis(&self) -> MonomialBasis {
        enumerate_monomials(
            self.n_vars,
            self.deg_input_num,
            &vec![self.max_var_power; self.n_vars],
        )
    }

    pub fn input_den_basis(&self) -> MonomialBasis {
        enumerate_monomials(
            self.n_vars,
            self.deg_input_den,
            &vec![self.max_var_power; self.n_vars],
        )
    }

    fn output_caps(&self) -> Vec<u32> {
        let mut caps = vec![self.max_var_power; self.n_vars];
        caps.extend(self.base_functions.iter().map(|b| b.power_cap));
        caps
    }

    /// Basis over the raw variables followed by the base-function outputs.
    pub fn output_num_basis(&self) -> MonomialBasis {
        let caps = self.output_caps();
        enumerate_monomials(caps.len(), self.deg_output_num, &caps)
    }

    pub fn output_den_basis(&self) -> Option<MonomialBasis> {
        self.has_output_den().then(|| {
            let caps = self.output_caps();
            enumerate_monomials(caps.len(), self.deg_output_den, &caps)
        })
    }

    pub fn layout(&self) -> Layout {
        Layout::new(self)
    }

    /// One-line human-readable description.
    pub fn summary(&self) -> String {
        let names: Vec<&str> = self.base_functions.iter().map(|b| b.kind.name()).collect();
        format!(
            "vars={} in={}/{} out={}/{} base=[{}] cap={}",
            self.n_vars,
            self.deg_input_num,
            self.deg_input_den,
            self.deg_output_num,
            self.deg_output_den,
            names.join(","),
            self.max_var_power
        )
    }
}

/// Total coefficient count across all rationals of the family.
pub fn count_params(spec: &ModelSpec) -> usize {
    spec.layout().len()
}

/// Which polynomial of a rational a block holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Part {
    Numerator,
    Denominator,
}

/// A contiguous coefficient block of one polynomial.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Block {
    /// `0..k` are the input rationals, `k` is the output rational.
    pub rational: usize,
    pub part: Part,
    pub offset: usize,
    pub len: usize,
}

impl Block {
    pub fn range(&self) -> std::ops::Range<usize> {
        self.offset..self.offset + self.len
    }
}

/// Offsets of every coefficient block. Input rationals come first in
/// base-function order (numerator then denominator), the output rational last.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Layout {
    blocks: Vec<Block>,
    len: usize,
}

impl Layout {
    fn new(spec: &ModelSpec) -> Self {
        let k = spec.n_base();
        let in_num = spec.input_num_basis().len();
        let in_den = spec.input_den_basis().len();
        let mut blocks = Vec::with_capacity(2 * k + 2);
        let mut offset = 0;
        let mut push = |rational, part, len| {
            blocks.push(Block {
                rational,
                part,
                offset,
                len,
            });
            offset += len;
        };
        for j in 0..k {
            push(j, Part::Numerator, in_num);
            push(j, Part::Denominator, in_den);
        }
        push(k, Part::Numerator, spec.output_num_basis().len());
        if let Some(b) = spec.output_den_basis() {
            push(k, Part::Denominator, b.len());
        }
        Layout { blocks, len: offset }
    }

    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn block(&self, rational: usize, part: Part) -> Option<&Block> {
        self.blocks
            .iter()
            .find(|b| b.rational == rational && b.part == part)
    }

    pub fn denominators(&self) -> impl Iterator<Item = &Block> {
        self.blocks.iter().filter(|b| b.part == Part::Denominator)
    }
}

/// Coefficients of one family instance, tagged with their block layout.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamVector {
    pub values: Vec<f64>,
    layout: Layout,
}

impl ParamVector {
    pub fn new(spec: &ModelSpec, values: Vec<f64>) -> Result<Self> {
        let layout = spec.layout();
        if values.len() != layout.len() {
            return Err(Error::DimensionMismatch {
                what: "parameter vector",
                expected: layout.len(),
                got: values.len(),
            });
        }
        Ok(Self { values, layout })
    }

    pub fn zeros(spec: &ModelSpec) -> Self {
        let layout = spec.layout();
        Self {
            values: vec![0.0; layout.len()],
            layout,
        }
    }

    pub fn layout(&self) -> &Layout {
        &self.layout
    }

    pub fn block(&self, b: &Block) -> &[f64] {
        &self.values[b.range()]
    }

    pub fn n_nonzero(&self) -> usize {
        self.values.iter().filter(|v| **v != 0.0).count()
    }
}
