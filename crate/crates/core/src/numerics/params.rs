use indexmap::IndexMap;

use super::Tensor;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
struct Slot {
    value: Tensor,
    grad: Tensor,
}

/// Named learnable tensors with matching gradient accumulators.
///
/// Insertion order is preserved; checkpoints and optimizer state rely on it.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ParamSet {
    slots: IndexMap<String, Slot>,
    grads_ready: bool,
}

impl ParamSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, name: impl Into<String>, value: Tensor) -> Result<()> {
        let name = name.into();
        if self.slots.contains_key(&name) {
            return Err(Error::contract(format!("duplicate parameter `{name}`")));
        }
        let grad = Tensor::zeros(value.shape());
        self.slots.insert(name, Slot { value, grad });
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.slots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.slots.is_empty()
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.slots.keys().map(String::as_str)
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.slots.get_index_of(name)
    }

    pub fn get(&self, name: &str) -> Option<&Tensor> {
        self.slots.get(name).map(|s| &s.value)
    }

    pub fn get_mut(&mut self, name: &str) -> Option<&mut Tensor> {
        self.slots.get_mut(name).map(|s| &mut s.value)
    }

    pub fn grad(&self, name: &str) -> Option<&Tensor> {
        self.slots.get(name).map(|s| &s.grad)
    }

    pub fn value_at(&self, idx: usize) -> &Tensor {
        &self.slots[idx].value
    }

    pub(crate) fn value_at_mut(&mut self, idx: usize) -> &mut Tensor {
        &mut self.slots[idx].value
    }

    pub(crate) fn grad_at(&self, idx: usize) -> &Tensor {
        &self.slots[idx].grad
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &Tensor)> {
        self.slots.iter().map(|(k, s)| (k.as_str(), &s.value))
    }

    pub(crate) fn accumulate_grad(&mut self, idx: usize, g: &Tensor) {
        self.slots[idx].grad.add_assign(g);
        self.grads_ready = true;
    }

    /// True once a backward pass has written gradients since the last reset.
    pub fn has_grads(&self) -> bool {
        self.grads_ready
    }

    pub fn zero_grad(&mut self) {
        for s in self.slots.values_mut() {
            s.grad.fill(0.0);
        }
        self.grads_ready = false;
    }

    /// Checks that `other` has the same names in the same order with the same shapes.
    pub fn same_layout(&self, other: &ParamSet) -> bool {
        self.slots.len() == other.slots.len()
            && self
                .slots
                .iter()
                .zip(other.slots.iter())
                .all(|((a, sa), (b, sb))| a == b && sa.value.shape() == sb.value.shape())
    }

    /// Total number of scalar parameters.
    pub fn numel(&self) -> usize {
        self.slots.values().map(|s| s.value.len()).sum()
    }
}
