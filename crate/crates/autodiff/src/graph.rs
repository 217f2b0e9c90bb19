//! Define-by-run tape and reverse traversal.

use crate::tensor::{Scalar, Tensor};
use crate::{AdError, Result};

/// Handle to a node on the tape.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct NodeId(pub(crate) usize);

pub(crate) trait BackwardRule<T: Scalar>: Send {
    /// Given the gradient flowing into this node, return one gradient tensor
    /// per parent (None for parents that do not need gradients).
    fn backward(
        &self,
        grad_out: &Tensor<T>,
        parents: &[&Tensor<T>],
        value: &Tensor<T>,
    ) -> Vec<Option<Tensor<T>>>;
}

pub(crate) struct Node<T: Scalar> {
    pub value: Tensor<T>,
    pub grad: Option<Tensor<T>>,
    pub requires_grad: bool,
    pub parents: Vec<NodeId>,
    pub rule: Option<Box<dyn BackwardRule<T>>>,
}

/// Append-only computation tape. Parents always precede children, so reverse
/// insertion order is a valid reverse-topological order.
pub struct Graph<T: Scalar> {
    nodes: Vec<Node<T>>,
}

impl<T: Scalar> Default for Graph<T> {
    fn default() -> Self {
        Self::new()
    }
}

impl<T: Scalar> Graph<T> {
    pub fn new() -> Self {
        Graph { nodes: Vec::new() }
    }

    /// Constant input: gradients are not tracked through it.
    pub fn leaf(&mut self, value: Tensor<T>) -> NodeId {
        self.push(value, false, vec![], None)
    }

    /// Trainable input: a gradient buffer is populated by `backward`.
    pub fn param(&mut self, value: Tensor<T>) -> NodeId {
        self.push(value, true, vec![], None)
    }

    pub(crate) fn push(
        &mut self,
        value: Tensor<T>,
        requires_grad: bool,
        parents: Vec<NodeId>,
        rule: Option<Box<dyn BackwardRule<T>>>,
    ) -> NodeId {
        let id = NodeId(self.nodes.len());
        self.nodes.push(Node {
            value,
            grad: None,
            requires_grad,
            parents,
            rule,
        });
        id
    }

    pub fn value(&self, id: NodeId) -> &Tensor<T> {
        &self.nodes[id.0].value
    }

    /// Gradient of `id` after `backward`. None if the node does not require
    /// gradients or no gradient reached it.
    pub fn grad(&self, id: NodeId) -> Option<&Tensor<T>> {
        self.nodes[id.0].grad.as_ref()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub(crate) fn any_parent_tracked(&self, parents: &[NodeId]) -> bool {
        parents.iter().any(|p| self.nodes[p.0].requires_grad)
    }

    /// Reverse sweep from `loss`, accumulating gradients into every node that
    /// requires them. `loss` must be scalar.
    pub fn backward(&mut self, loss: NodeId) -> Result<()> {
        if loss.0 >= self.nodes.len() {
            return Err(AdError::BackwardBeforeForward(loss.0));
        }
        let loss_shape = self.nodes[loss.0].value.shape().to_vec();
        if self.nodes[loss.0].value.numel() != 1 {
            return Err(AdError::NonScalarLoss(loss_shape));
        }
        self.nodes[loss.0].grad = Some(Tensor::filled(&loss_shape, T::one()));

        for i in (0..=loss.0).rev() {
            let Some(grad_out) = self.nodes[i].grad.take() else {
                continue;
            };
            let rule = self.nodes[i].rule.take();
            if let Some(rule) = &rule {
                let parents = self.nodes[i].parents.clone();
                let parent_values: Vec<&Tensor<T>> =
                    parents.iter().map(|p| &self.nodes[p.0].value).collect();
                let contributions = rule.backward(&grad_out, &parent_values, &self.nodes[i].value);
                debug_assert_eq!(contributions.len(), parents.len());
                for (p, contrib) in parents.iter().zip(contributions) {
                    if let Some(c) = contrib {
                        if self.nodes[p.0].requires_grad {
                            self.accumulate(*p, c);
                        }
                    }
                }
            }
            self.nodes[i].rule = rule;
            // Leaf gradients are kept for the caller; interior gradients were
            // consumed by take() above. Restore leaves and tracked params.
            if self.nodes[i].parents.is_empty() && self.nodes[i].requires_grad {
                self.nodes[i].grad = Some(grad_out);
            }
        }
        Ok(())
    }

    fn accumulate(&mut self, id: NodeId, contribution: Tensor<T>) {
        let node = &mut self.nodes[id.0];
        match &mut node.grad {
            Some(g) => g.add_assign(&contribution),
            None => node.grad = Some(contribution),
        }
    }
}
