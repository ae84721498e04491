use super::Tensor;
use crate::Real;

/// Plain gradient descent: `theta -= lr * grad` for every tensor holding a
/// gradient, then clears the gradients.
pub fn sgd_step<'a, T: Real>(params: impl IntoIterator<Item = &'a mut Tensor<T>>, lr: T) {
    for p in params {
        if let Some(g) = p.grad.take() {
            for (v, g) in p.values_mut().iter_mut().zip(g) {
                *v -= lr * g;
            }
        }
    }
}
