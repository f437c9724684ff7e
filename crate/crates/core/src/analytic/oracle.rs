//! Brute-force evaluation of `g^(N)` by expanding the normally ordered field
//! product over every source-to-detector assignment.
//!
//! Each term of `prod_j E^+(r_j)` picks one source per detector. Terms are
//! grouped by how often each source is used, and the expectation of the
//! creation/annihilation monomials is taken source by source with the moment
//! rule of the source statistics. No permanent is evaluated on this path.

use num_complex::Complex64;
use std::collections::BTreeMap;

use crate::error::{domain, Error, Result};
use crate::source::SourceArray;

/// Largest order accepted by [`oracle_spe`].
pub const SPE_ORACLE_MAX: usize = 7;
/// Largest order accepted by [`oracle_tls`].
pub const TLS_ORACLE_MAX: usize = 6;

/// `<1| a^dag^created a^annihilated |1>` for a single-photon Fock state.
fn fock_one_moment(annihilated: usize, created: usize) -> f64 {
    if annihilated == created && annihilated <= 1 {
        1.0
    } else {
        0.0
    }
}

/// Average of `exp(i m phi)` over a uniform phase.
fn phase_average(m: i64) -> f64 {
    if m == 0 {
        1.0
    } else {
        0.0
    }
}

/// `<|g|^(2m)>` for a unit-variance circular Gaussian modulus: `m!`.
fn modulus_moment(m: usize) -> f64 {
    (1..=m).map(|k| k as f64).product()
}

/// `<a^annihilated a*^created>` for `a = g e^{i phi}` with circular Gaussian
/// `g` and independent uniform `phi`.
fn thermal_moment(annihilated: usize, created: usize) -> f64 {
    let pa = phase_average(annihilated as i64 - created as i64);
    if pa == 0.0 {
        return 0.0;
    }
    pa * modulus_moment(annihilated)
}

fn check_inputs(src: &SourceArray, phases: &[f64], max: usize) -> Result<()> {
    let n = src.n_sources();
    if n > max {
        return Err(Error::Capacity {
            what: "brute-force oracle",
            order: n,
            limit: max,
        });
    }
    if phases.len() != n {
        return Err(domain(format!("{} phases for {} sources", phases.len(), n)));
    }
    if src.slit_width() != 0.0 {
        return Err(domain("brute-force oracles model point sources only"));
    }
    Ok(())
}

/// Amplitude sums `A_m = sum_{f with occupation m} prod_j exp(i f(j) delta_j)`.
fn occupation_amplitudes(n_sources: usize, phases: &[f64]) -> BTreeMap<Vec<u8>, Complex64> {
    let n_det = phases.len();
    let mut out: BTreeMap<Vec<u8>, Complex64> = BTreeMap::new();
    let mut assign = vec![0usize; n_det];
    loop {
        let mut occupation = vec![0u8; n_sources];
        let mut amp = Complex64::new(1.0, 0.0);
        for (j, &alpha) in assign.iter().enumerate() {
            occupation[alpha] += 1;
            amp *= Complex64::from_polar(1.0, alpha as f64 * phases[j]);
        }
        *out.entry(occupation).or_insert(Complex64::new(0.0, 0.0)) += amp;

        // odometer increment over all n_sources^n_det assignments
        let mut pos = 0;
        loop {
            if pos == n_det {
                return out;
            }
            assign[pos] += 1;
            if assign[pos] < n_sources {
                break;
            }
            assign[pos] = 0;
            pos += 1;
        }
    }
}

fn expand(src: &SourceArray, phases: &[f64], moment: fn(usize, usize) -> f64) -> f64 {
    let n = src.n_sources();
    let amplitudes: Vec<(Vec<u8>, Complex64)> =
        occupation_amplitudes(n, phases).into_iter().collect();
    let mut total = Complex64::new(0.0, 0.0);
    for (annihilated, amp) in &amplitudes {
        for (created, amp_dag) in &amplitudes {
            let weight: f64 = annihilated
                .iter()
                .zip(created)
                .map(|(&m, &c)| moment(m as usize, c as usize))
                .product();
            if weight != 0.0 {
                total += amp_dag.conj() * amp * weight;
            }
        }
    }
    // each detector's mean intensity: sum over sources of <a^dag a>
    let singles = n as f64 * moment(1, 1);
    total.re / singles.powi(phases.len() as i32)
}

/// Independent evaluation of `g^(N)` for single-photon emitters.
pub fn oracle_spe(src: &SourceArray, phases: &[f64]) -> Result<f64> {
    check_inputs(src, phases, SPE_ORACLE_MAX)?;
    Ok(expand(src, phases, fock_one_moment))
}

/// Independent evaluation of `g^(N)` for thermal sources.
pub fn oracle_tls(src: &SourceArray, phases: &[f64]) -> Result<f64> {
    check_inputs(src, phases, TLS_ORACLE_MAX)?;
    Ok(expand(src, phases, thermal_moment))
}
