//! Two-beam classical interference on the substrate and coordinate helpers.

use crate::error::{Error, Result};
use crate::scalar::Real;

fn check_beam<T: Real>(wavelength: T, theta: T) -> Result<()> {
    if !(wavelength > T::zero()) || !wavelength.is_finite() {
        return Err(Error::usage(format!("wavelength must be positive, got {wavelength}")));
    }
    if !(theta > T::zero() && theta <= T::FRAC_PI_2()) {
        return Err(Error::usage(format!("beam angle must lie in (0, π/2], got {theta}")));
    }
    Ok(())
}

/// `cos²(k x sin θ)` with `k = 2π/λ`.
pub fn classical_intensity<T: Real>(x: T, wavelength: T, theta: T) -> Result<T> {
    check_beam(wavelength, theta)?;
    let k = T::two_pi() / wavelength;
    let c = (k * x * theta.sin()).cos();
    Ok(c * c)
}

/// Distance from an intensity maximum to the adjacent zero, `λ / (4 sin θ)`.
pub fn rayleigh_resolution<T: Real>(wavelength: T, theta: T) -> Result<T> {
    if theta == T::zero() {
        return Err(Error::usage("resolution is undefined at θ = 0"));
    }
    check_beam(wavelength, theta)?;
    Ok(wavelength / (T::lit(4.0) * theta.sin()))
}

/// Effective resolution of an `N`-photon N00N exposure in the grazing limit.
pub fn noon_resolution<T: Real>(wavelength: T, n: u32) -> Result<T> {
    if n == 0 {
        return Err(Error::usage("photon number must be at least 1"));
    }
    if !(wavelength > T::zero()) || !wavelength.is_finite() {
        return Err(Error::usage(format!("wavelength must be positive, got {wavelength}")));
    }
    Ok(wavelength / (T::lit(4.0) * T::from_u32(n).unwrap()))
}

/// Grazing-limit phase `φ = kx/2 = πx/λ`.
pub fn phase_from_position<T: Real>(x: T, wavelength: T) -> T {
    T::PI() * x / wavelength
}

pub fn position_from_phase<T: Real>(phi: T, wavelength: T) -> T {
    phi * wavelength / T::PI()
}
