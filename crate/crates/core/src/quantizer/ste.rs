/// Straight-through estimator: the forward pass emits the quantized value
/// untouched, the backward pass hands the upstream gradient to the
/// pre-quantization input as if quantization were the identity.
#[derive(Debug, Clone, Copy, Default)]
pub struct StraightThrough;

impl StraightThrough {
    pub fn forward(z: &[f64], z_q: &[f64]) -> Vec<f64> {
        assert_eq!(z.len(), z_q.len(), "straight-through operands differ in length");
        z_q.to_vec()
    }

    pub fn backward(grad_out: &[f64]) -> Vec<f64> {
        grad_out.to_vec()
    }
}

/// Forward value of the straight-through estimator.
pub fn straight_through(z: &[f64], z_q: &[f64]) -> Vec<f64> {
    StraightThrough::forward(z, z_q)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixed_point_and_identity_gradient() {
        let z = [0.25, -1.5];
        assert_eq!(straight_through(&z, &z), z);
        assert_eq!(StraightThrough::backward(&[3.0, -2.0]), [3.0, -2.0]);
    }

    #[test]
    fn forward_is_bit_exact_quantized_value() {
        let z = [0.1, 0.2, 0.3];
        let q = [1.0 / 3.0, -0.7, 1e-300];
        let a = straight_through(&z, &q);
        let b = straight_through(&z, &q);
        assert_eq!(a, q);
        assert_eq!(
            a.iter().map(|v| v.to_bits()).collect::<Vec<_>>(),
            b.iter().map(|v| v.to_bits()).collect::<Vec<_>>()
        );
    }
}
