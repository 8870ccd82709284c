//! Closed-form rates against the Fock-space oracle on random states.

use num_complex::Complex;
use proptest::prelude::*;
use qlitho::deposition::{fixed_m_rate_by_order, fixed_n_superposition_rate, superposition_2d_rate};
use qlitho::fock::{deposition_bilinear, fixed_n_ket, proto_ket_1d, superposition_2d_ket, MODES_1D, MODES_2D};
use qlitho::states::{FixedMTerm, Superposition2D, SuperpositionFixedM, SuperpositionFixedN, Term1D, Term2D};
use qlitho::synth::fourier::{fourier_coefficients, to_fourier_program};
use qlitho::synth::Trench;

fn amp() -> impl Strategy<Value = Complex<f64>> {
    (-1.0f64..1.0, -1.0f64..1.0).prop_map(|(re, im)| Complex::new(re, im))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn fixed_n_rate_matches_oracle(
        n in 1u32..=9,
        amps in prop::collection::vec(amp(), 5),
        thetas in prop::collection::vec(0.0f64..3.0, 5),
        phi in 0.0f64..std::f64::consts::TAU,
    ) {
        let terms: Vec<_> = (0..=n / 2)
            .map(|m| Term1D { m, theta: thetas[m as usize], amplitude: amps[m as usize] })
            .collect();
        prop_assume!(terms.iter().any(|t| t.amplitude.norm() > 1e-3));
        let s = SuperpositionFixedN::normalized(n, terms).unwrap();
        let ket = fixed_n_ket(&s, phi).unwrap();
        let oracle = deposition_bilinear(&ket, &ket, &MODES_1D, n).unwrap();
        let closed = fixed_n_superposition_rate(&s, phi).unwrap();
        prop_assert!((oracle.re - closed).abs() <= 1e-12 * closed.max(2f64.powi(-(n as i32))));
        prop_assert!(oracle.im.abs() <= 1e-13);
    }

    #[test]
    fn two_d_rate_matches_oracle(
        n in 1u32..=5,
        amps in prop::collection::vec(amp(), 9),
        phases in prop::collection::vec(0.0f64..3.0, 6),
        phi in 0.0f64..std::f64::consts::TAU,
        chi in 0.0f64..std::f64::consts::TAU,
    ) {
        let side = n / 2 + 1;
        let mut terms = Vec::new();
        for m in 0..side {
            for k in 0..side {
                terms.push(Term2D {
                    m,
                    k,
                    zeta: phases[m as usize],
                    zeta_bar: phases[3 + k as usize],
                    amplitude: amps[(m * side + k) as usize],
                });
            }
        }
        prop_assume!(terms.iter().any(|t| t.amplitude.norm() > 1e-3));
        let s = Superposition2D::normalized(n, terms).unwrap();
        let ket = superposition_2d_ket(&s, phi, chi).unwrap();
        let oracle = deposition_bilinear(&ket, &ket, &MODES_2D, n).unwrap().re;
        let closed = superposition_2d_rate(&s, phi, chi).unwrap();
        prop_assert!((oracle - closed).abs() <= 1e-12 * closed.max(4f64.powi(-(n as i32))));
    }

    #[test]
    fn fixed_m_orders_match_oracle(
        m in 0u32..=2,
        amps in prop::collection::vec(amp(), 4),
        thetas in prop::collection::vec(0.0f64..3.0, 4),
        phi in 0.0f64..std::f64::consts::TAU,
    ) {
        let terms: Vec<_> = (0..4u32)
            .map(|i| FixedMTerm { n: 2 * m + 1 + i, theta: thetas[i as usize], amplitude: amps[i as usize] })
            .collect();
        prop_assume!(terms.iter().any(|t| t.amplitude.norm() > 1e-3));
        let s = SuperpositionFixedM::normalized(m, terms).unwrap();
        for (i, (n, rate)) in fixed_m_rate_by_order(&s, phi).unwrap().into_iter().enumerate() {
            let ket = proto_ket_1d(&s.proto(i), phi).unwrap();
            let oracle = deposition_bilinear(&ket, &ket, &MODES_1D, n).unwrap().re * s.terms[i].amplitude.norm_sqr();
            prop_assert!((oracle - rate).abs() <= 1e-13);
        }
    }
}

#[test]
fn trench_program_realized_by_noon_branches() {
    let program = to_fourier_program(&fourier_coefficients(&Trench::new(2.0).unwrap(), 10).unwrap(), 0.7).unwrap();
    let (state, t) = program.to_fixed_m_state().unwrap();
    for j in 0..32 {
        let phi = std::f64::consts::TAU * f64::from(j) / 32.0;
        let oracle: f64 = (0..state.terms.len())
            .map(|i| {
                let ket = proto_ket_1d(&state.proto(i), phi).unwrap();
                deposition_bilinear(&ket, &ket, &MODES_1D, state.terms[i].n).unwrap().re
                    * state.terms[i].amplitude.norm_sqr()
            })
            .sum();
        assert!((oracle * t - program.exposure(phi)).abs() < 1e-12);
    }
}
