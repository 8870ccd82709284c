//! Sweeps comparing closed-form matrix elements against the Fock-space oracle.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::deposition::{matrix_element_1d, matrix_element_2d};
use crate::error::{Error, Result};
use crate::fock::{deposition_bilinear, proto_ket_1d, proto_ket_2d, MODES_1D, MODES_2D};
use crate::scalar::binomial;
use crate::states::{ProtoState1D, ProtoState2D};

/// Relative deviation accepted by [`OracleReport::passed`].
pub const ORACLE_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleReport {
    pub max_n_1d: u32,
    pub max_n_2d: u32,
    pub draws: usize,
    pub seed: u64,
    pub comparisons: usize,
    pub max_relative_deviation: f64,
    /// Where the largest deviation occurred.
    pub worst_case: String,
    pub tolerance: f64,
}

impl OracleReport {
    pub fn passed(&self) -> bool {
        self.max_relative_deviation <= self.tolerance
    }
}

fn draw_phase(rng: &mut ChaCha8Rng) -> f64 {
    rng.random_range(0.0..std::f64::consts::TAU)
}

/// Every index pair for `N ≤ max_n_1d` (1D) and every index quadruple for
/// `N ≤ max_n_2d` (2D), each with `draws` random phase sets.
///
/// Deviations are relative to `max(|oracle|, s)` where `s` is the natural
/// magnitude of the element, so elements that vanish at a draw do not blow
/// up the ratio.
pub fn verify_oracle(max_n_1d: u32, max_n_2d: u32, draws: usize, seed: u64) -> Result<OracleReport> {
    if draws == 0 {
        return Err(Error::usage("draws must be at least 1"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = (0.0f64, String::from("none"));
    let mut comparisons = 0;
    let mut record = |dev: f64, what: &dyn Fn() -> String| {
        if !(dev <= worst.0) {
            worst = (dev, what());
        }
    };

    for n in 1..=max_n_1d {
        let pow = 2f64.powi(n as i32);
        for m in 0..=n / 2 {
            for mp in 0..=n / 2 {
                for _ in 0..draws {
                    let (phi, th, thp) = (draw_phase(&mut rng), draw_phase(&mut rng), draw_phase(&mut rng));
                    let closed = matrix_element_1d(n, m, mp, th, thp, phi)?;
                    let bra = proto_ket_1d(&ProtoState1D::new(n, m, th)?, phi)?;
                    let ket = proto_ket_1d(&ProtoState1D::new(n, mp, thp)?, phi)?;
                    let oracle = deposition_bilinear(&bra, &ket, &MODES_1D, n)?;
                    let scale = (binomial::<f64>(n, m) * binomial::<f64>(n, mp)).sqrt() / pow;
                    let dev = (closed - oracle).norm() / oracle.norm().max(scale);
                    comparisons += 1;
                    record(dev, &|| format!("1D N={n} m={m} m'={mp} phi={phi} theta={th} theta'={thp}"));
                }
            }
        }
    }

    for n in 1..=max_n_2d {
        let pow = 4f64.powi(n as i32);
        let side = n / 2 + 1;
        for idx in 0..side.pow(4) {
            let (m, k, mp, kp) = (idx % side, idx / side % side, idx / side.pow(2) % side, idx / side.pow(3));
            for _ in 0..draws {
                let (phi, chi) = (draw_phase(&mut rng), draw_phase(&mut rng));
                let bra = ProtoState2D::new(n, m, k, draw_phase(&mut rng), draw_phase(&mut rng))?;
                let ket = ProtoState2D::new(n, mp, kp, draw_phase(&mut rng), draw_phase(&mut rng))?;
                let closed = matrix_element_2d(&bra, &ket, phi, chi)?;
                let oracle = deposition_bilinear(
                    &proto_ket_2d(&bra, phi, chi)?,
                    &proto_ket_2d(&ket, phi, chi)?,
                    &MODES_2D,
                    n,
                )?;
                let weight = |a: u32, b: u32| binomial::<f64>(n, a) + binomial::<f64>(n, b);
                let scale = (weight(m, k) * weight(mp, kp)).sqrt() / pow;
                let dev = (closed - oracle).norm() / oracle.norm().max(scale);
                comparisons += 1;
                record(dev, &|| format!("2D N={n} (m,k)=({m},{k}) (m',k')=({mp},{kp}) phi={phi} chi={chi}"));
            }
        }
    }

    Ok(OracleReport {
        max_n_1d,
        max_n_2d,
        draws,
        seed,
        comparisons,
        max_relative_deviation: worst.0,
        worst_case: worst.1,
        tolerance: ORACLE_TOLERANCE,
    })
}
