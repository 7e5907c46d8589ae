//! Closed-form gate networks.
//!
//! A density matrix is an affine combination `rho = 1/4 + sum_k c_k G_k`
//! over the 15 traceless hermitian directions, and conjugation by a gate
//! acts linearly on the coefficients. That makes a 64-15-64 linear network
//! with hand-set weights an *exact* emulator of any two-qubit gate:
//!
//! * hidden unit k reads off `sqrt(2) * c_k` via the orthonormal frame
//!   `embed(G_k) / sqrt(2)`,
//! * output column k re-emits `embed(U G_k U^dagger) / sqrt(2)`,
//! * the output bias restores the fixed `embed(identity / 4)` component.
//!
//! The construction certifies that 15 hidden units suffice; it is also the
//! reference used by the chain-emulation oracle. On inputs that are not
//! embedded densities the network still lands on the trace-one hermitian
//! subspace, because that is all its output map can express.

use super::{dot, Activation, Layer, Network};
use crate::quantum::Unitary4;
use crate::realrep::{self, ComplexMat4};
use num_complex::Complex64;

/// Builds the exact 64-15-64 linear emulator of `gate`.
pub fn exact_gate_net(gate: &Unitary4) -> Network {
    let basis = realrep::traceless_hermitian_basis();
    let x0 = realrep::embed(&ComplexMat4::identity().scale(Complex64::new(0.25, 0.0)));
    let inv_sqrt2 = 1.0 / 2.0_f64.sqrt();

    let mut hidden = Layer::zeros(64, 15, Activation::Linear);
    for (k, g) in basis.iter().enumerate() {
        let frame = realrep::embed(g).scale(inv_sqrt2);
        hidden.weights_mut()[k * 64..(k + 1) * 64].copy_from_slice(frame.as_slice());
        hidden.bias_mut()[k] = -dot(frame.as_slice(), x0.as_slice());
    }

    let mut output = Layer::zeros(15, 64, Activation::Linear);
    for (k, g) in basis.iter().enumerate() {
        let conjugated = gate.mat().mul(g).mul(&gate.mat().adjoint());
        let column = realrep::embed(&conjugated).scale(inv_sqrt2);
        for i in 0..64 {
            output.weights_mut()[i * 15 + k] = column.as_slice()[i];
        }
    }
    output.bias_mut().copy_from_slice(x0.as_slice());

    Network::from_layers(vec![hidden, output]).expect("64-15-64 chain")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::{
        evolve, quantum_metrics, quantumness_map, Density4, GateId,
    };
    use crate::realrep::RealRep8;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_density(rng: &mut impl Rng) -> Density4 {
        loop {
            let raw = RealRep8::from_fn(|_, _| rng.gen_range(-1.0..=1.0));
            if let Ok(rho) = quantumness_map(&raw) {
                return rho;
            }
        }
    }

    #[test]
    fn emulates_every_gate_exactly() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for gate_id in GateId::ALL {
            let gate = gate_id.unitary();
            let net = exact_gate_net(&gate);
            assert_eq!(net.dims(), vec![64, 15, 64]);
            for _ in 0..100 {
                let rho = random_density(&mut rng);
                let out = net.forward(rho.to_real().as_slice());
                let want = evolve(&rho, &gate).to_real();
                let err = RealRep8::from_slice(&out).dist(&want);
                assert!(err <= 1e-13, "{gate_id}: {err:e}");
            }
        }
    }

    #[test]
    fn exact_nets_compose_like_the_gates() {
        let mut rng = ChaCha8Rng::seed_from_u64(32);
        let hr = GateId::Hr.unitary();
        let cnot = GateId::Cnot.unitary();
        let net_hr = exact_gate_net(&hr);
        let net_cnot = exact_gate_net(&cnot);
        for _ in 0..50 {
            let rho = random_density(&mut rng);
            let stepped = net_cnot.forward(&net_hr.forward(rho.to_real().as_slice()));
            let want = evolve(&evolve(&rho, &hr), &cnot).to_real();
            assert!(RealRep8::from_slice(&stepped).dist(&want) <= 1e-12);
        }
    }

    #[test]
    fn output_always_lands_on_the_trace_one_hermitian_subspace() {
        // Even garbage inputs are mapped into the affine span of the
        // construction, so trace and hermiticity residuals stay at rounding
        // level (positivity of course does not).
        let mut rng = ChaCha8Rng::seed_from_u64(33);
        let net = exact_gate_net(&GateId::Cnot.unitary());
        for _ in 0..50 {
            let raw: Vec<f64> = (0..64).map(|_| rng.gen_range(-5.0..=5.0)).collect();
            let metrics = quantum_metrics(&RealRep8::from_slice(&net.forward(&raw)));
            assert!(metrics.trace_residual <= 1e-12);
            assert!(metrics.antiherm_norm <= 1e-12);
            assert!(metrics.complex_residual <= 1e-12);
        }
    }
}
