//! Closed-form continuum scattering at the junction.
//!
//! On each ray the field obeys `phi_tt = phi_qq - m^2 phi`. A monochromatic
//! wave enters on ray 0 and leaves with amplitude `R` on ray 0 and `T = 1 + R`
//! on every other ray (continuity at the vertex). Junction conditions that
//! conserve energy give the alpha family of phases, those that conserve charge
//! the beta family; only Kirchhoff (`R = (2 - s)/s`) and the decoupled
//! junction (`R = -1`) lie in both.
//!
//! Every `s`-dependent expression reduces to the Y-junction form at `s = 3`.
//! The junction factor that multiplies the outward derivative sum is
//! `s R + s - 2`, which is `1 + 3R` for three rays.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{normalize_phase, JunctionFamily, ScatteringAmplitudes, StarGraphSpec};

/// Continuum dispersion `omega = sqrt(k^2 + m^2)`.
pub fn dispersion_omega(k: f64, m: f64) -> f64 {
    k.hypot(m)
}

/// Kirchhoff reflection `(2 - s)/s`; the transmission is `2/s`.
pub fn kirchhoff_reflection(ray_count: usize) -> Complex64 {
    let s = ray_count as f64;
    Complex64::new((2.0 - s) / s, 0.0)
}

/// `R = e^{i theta}/s - (s - 1)/s`.
pub fn phase_to_amplitudes(theta: f64, k: f64, ray_count: usize) -> ScatteringAmplitudes {
    let s = ray_count as f64;
    let reflection = Complex64::from_polar(1.0 / s, theta) - (s - 1.0) / s;
    ScatteringAmplitudes {
        k,
        reflection,
        transmission: reflection + 1.0,
        phase: normalize_phase(theta),
    }
}

/// `|R|^2 + (s - 1)|1 + R|^2 - 1`, zero for flux-conserving amplitudes.
pub fn unitarity_residual(reflection: Complex64, ray_count: usize) -> f64 {
    let s = ray_count as f64;
    reflection.norm_sqr() + (s - 1.0) * (reflection + 1.0).norm_sqr() - 1.0
}

fn check_wavenumber(k: f64) -> Result<()> {
    if !(k.is_finite() && k > 0.0) {
        return Err(Error::Domain(format!("wavenumber must be > 0, got {k}")));
    }
    Ok(())
}

/// Energy-conserving phase `(k + i a w)/(k - i a w)` with `w = sqrt(k^2 + m^2)`.
pub fn alpha_family_phase(k: f64, m: f64, alpha: f64) -> Result<Complex64> {
    check_wavenumber(k)?;
    if alpha.is_infinite() {
        return Ok(Complex64::new(-1.0, 0.0));
    }
    let num = Complex64::new(k, alpha * dispersion_omega(k, m));
    Ok(num / num.conj())
}

/// Charge-conserving phase `(k + i b)/(k - i b)`.
pub fn beta_family_phase(k: f64, beta: f64) -> Result<Complex64> {
    check_wavenumber(k)?;
    if beta.is_infinite() {
        return Ok(Complex64::new(-1.0, 0.0));
    }
    let num = Complex64::new(k, beta);
    Ok(num / num.conj())
}

/// Scattering amplitudes of `family` at wavenumber `k`.
pub fn family_amplitudes(
    family: JunctionFamily,
    k: f64,
    graph: &StarGraphSpec,
) -> Result<ScatteringAmplitudes> {
    check_wavenumber(k)?;
    graph.validate()?;
    let s = graph.ray_count;
    let phase = match family.canonical() {
        JunctionFamily::Kirchhoff => {
            let reflection = kirchhoff_reflection(s);
            return Ok(ScatteringAmplitudes {
                k,
                reflection,
                transmission: Complex64::new(2.0 / s as f64, 0.0),
                phase: 0.0,
            });
        }
        JunctionFamily::Decoupled => {
            return Ok(ScatteringAmplitudes {
                k,
                reflection: Complex64::new(-1.0, 0.0),
                transmission: Complex64::new(0.0, 0.0),
                phase: std::f64::consts::PI,
            });
        }
        JunctionFamily::Alpha(a) => alpha_family_phase(k, graph.mass, a)?,
        JunctionFamily::Beta(b) => beta_family_phase(k, b)?,
    };
    let s_f = s as f64;
    let reflection = (phase - (s_f - 1.0)) / s_f;
    Ok(ScatteringAmplitudes {
        k,
        reflection,
        transmission: reflection + 1.0,
        phase: normalize_phase(phase.arg()),
    })
}

/// Field of the monochromatic scattering solution at distance `q` on `ray`.
///
/// The incoming ray carries `e^{-i(wt + kq)} + R e^{-i(wt - kq)}`, every other
/// ray `(1 + R) e^{-i(wt - kq)}`.
pub fn monochromatic_field(
    k: f64,
    m: f64,
    reflection: Complex64,
    ray: usize,
    q: f64,
    t: f64,
    incoming_ray: usize,
) -> Complex64 {
    let omega = dispersion_omega(k, m);
    let temporal = Complex64::from_polar(1.0, -omega * t);
    let outgoing = Complex64::from_polar(1.0, k * q);
    if ray == incoming_ray {
        temporal * (outgoing.conj() + reflection * outgoing)
    } else {
        temporal * (reflection + 1.0) * outgoing
    }
}

/// `d/dq` of [`monochromatic_field`], the outward derivative along `ray`.
pub fn monochromatic_field_derivative(
    k: f64,
    m: f64,
    reflection: Complex64,
    ray: usize,
    q: f64,
    t: f64,
    incoming_ray: usize,
) -> Complex64 {
    let omega = dispersion_omega(k, m);
    let i_k = Complex64::new(0.0, k);
    let temporal = Complex64::from_polar(1.0, -omega * t);
    let outgoing = Complex64::from_polar(1.0, k * q);
    if ray == incoming_ray {
        temporal * i_k * (reflection * outgoing - outgoing.conj())
    } else {
        temporal * i_k * (reflection + 1.0) * outgoing
    }
}

/// Two superposed monochromatic solutions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoModeSpec {
    pub k1: f64,
    pub k2: f64,
    pub r1: Complex64,
    pub r2: Complex64,
}

impl TwoModeSpec {
    pub fn new(k1: f64, k2: f64, r1: Complex64, r2: Complex64) -> Result<Self> {
        check_wavenumber(k1)?;
        check_wavenumber(k2)?;
        if k1 == k2 {
            return Err(Error::Domain(
                "two-mode spec needs distinct wavenumbers".into(),
            ));
        }
        Ok(Self { k1, k2, r1, r2 })
    }
}

fn junction_factor(reflection: Complex64, ray_count: usize) -> Complex64 {
    let s = ray_count as f64;
    reflection * s + (s - 2.0)
}

/// Coefficient of `e^{i(w1 - w2)t}` in the junction energy-flux balance:
/// `w1 k2 (1 + conj R1)(s R2 + s - 2) + w2 k1 (s conj R1 + s - 2)(1 + R2)`.
pub fn energy_cross_residual(spec: &TwoModeSpec, m: f64, ray_count: usize) -> Complex64 {
    let w1 = dispersion_omega(spec.k1, m);
    let w2 = dispersion_omega(spec.k2, m);
    let r1c = spec.r1.conj();
    (r1c + 1.0) * junction_factor(spec.r2, ray_count) * (w1 * spec.k2)
        + junction_factor(r1c, ray_count) * (spec.r2 + 1.0) * (w2 * spec.k1)
}

/// Coefficient of the cross term in the junction charge-current balance:
/// `k2 (1 + conj R1)(s R2 + s - 2) + k1 (s conj R1 + s - 2)(1 + R2)`.
pub fn charge_cross_residual(spec: &TwoModeSpec, ray_count: usize) -> Complex64 {
    let r1c = spec.r1.conj();
    (r1c + 1.0) * junction_factor(spec.r2, ray_count) * spec.k2
        + junction_factor(r1c, ray_count) * (spec.r2 + 1.0) * spec.k1
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FamilyKind {
    Alpha,
    Beta,
}

impl FamilyKind {
    fn name(self) -> &'static str {
        match self {
            FamilyKind::Alpha => "alpha",
            FamilyKind::Beta => "beta",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FamilyFit {
    /// Fitted constant; `f64::INFINITY` when every phase is `-1` (decoupled).
    pub constant: f64,
    /// Largest deviation of a single sample's constant from the fit.
    pub fit_residual: f64,
    /// Largest normalised cross residual over all sample pairs.
    pub max_cross_residual: f64,
}

/// Largest accepted normalised cross residual in [`solve_family_from_residuals`].
pub const FAMILY_FIT_TOLERANCE: f64 = 1e-9;

/// Recovers the alpha or beta constant that makes the two-mode cross residuals
/// vanish for every pair of `(k, e^{i theta})` samples.
///
/// Dividing the pair residual by `(1 + conj u1)(1 + u2)` turns it into
/// `w1 k2 tan(theta2/2) - w2 k1 tan(theta1/2)` (energy) or
/// `k2 tan(theta2/2) - k1 tan(theta1/2)` (charge), so each sample determines
/// the constant `k tan(theta/2)/w` (alpha) or `k tan(theta/2)` (beta). The
/// fitted constant is their mean; the cross residuals of the input phases are
/// then checked pairwise.
pub fn solve_family_from_residuals(
    samples: &[(f64, Complex64)],
    m: f64,
    kind: FamilyKind,
) -> Result<FamilyFit> {
    if samples.len() < 2 {
        return Err(Error::Domain("need at least two (k, phase) samples".into()));
    }
    for (i, &(k, u)) in samples.iter().enumerate() {
        check_wavenumber(k)?;
        if (u.norm() - 1.0).abs() > 1e-9 {
            return Err(Error::Domain(format!(
                "sample {i}: phase {u} is not on the unit circle"
            )));
        }
        if samples[..i].iter().any(|&(k0, _)| k0 == k) {
            return Err(Error::Domain(format!("duplicate wavenumber {k}")));
        }
    }

    // Any ray count works: the phase form of the residual is s-independent up
    // to an overall 1/s^2.
    const S: usize = 3;
    let to_r = |u: Complex64| (u - (S as f64 - 1.0)) / S as f64;
    let mut max_cross: f64 = 0.0;
    for (i, &(k1, u1)) in samples.iter().enumerate() {
        for &(k2, u2) in &samples[i + 1..] {
            let spec = TwoModeSpec {
                k1,
                k2,
                r1: to_r(u1),
                r2: to_r(u2),
            };
            let (res, scale) = match kind {
                FamilyKind::Alpha => {
                    let w1 = dispersion_omega(k1, m);
                    let w2 = dispersion_omega(k2, m);
                    (energy_cross_residual(&spec, m, S), w1 * k2 + w2 * k1)
                }
                FamilyKind::Beta => (charge_cross_residual(&spec, S), k1 + k2),
            };
            // |1 + R| <= 2/s and |s R + s - 2| <= 2 bound each product by 4/s.
            max_cross = max_cross.max(res.norm() / (scale * 4.0 / S as f64));
        }
    }
    if max_cross > FAMILY_FIT_TOLERANCE {
        return Err(Error::InconsistentFamily {
            kind: kind.name(),
            max_residual: max_cross,
        });
    }

    let decoupled = samples.iter().all(|&(_, u)| (u + 1.0).norm() < 1e-12);
    if decoupled {
        return Ok(FamilyFit {
            constant: f64::INFINITY,
            fit_residual: 0.0,
            max_cross_residual: max_cross,
        });
    }
    let per_sample: Vec<f64> = samples
        .iter()
        .map(|&(k, u)| {
            let half_tan = u.im / (1.0 + u.re);
            match kind {
                FamilyKind::Alpha => k * half_tan / dispersion_omega(k, m),
                FamilyKind::Beta => k * half_tan,
            }
        })
        .collect();
    let constant = per_sample.iter().sum::<f64>() / per_sample.len() as f64;
    let fit_residual = per_sample
        .iter()
        .map(|c| (c - constant).abs())
        .fold(0.0, f64::max);
    Ok(FamilyFit {
        constant,
        fit_residual,
        max_cross_residual: max_cross,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    const C0: Complex64 = Complex64::new(0.0, 0.0);

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn dispersion_examples() {
        assert_eq!(dispersion_omega(0.0, 1.0), 1.0);
        assert_eq!(dispersion_omega(3.0, 4.0), 5.0);
        assert_eq!(dispersion_omega(1.0, 0.0), 1.0);
        assert_eq!(dispersion_omega(-3.0, 4.0), 5.0);
    }

    #[test]
    fn kirchhoff_examples() {
        assert_abs_diff_eq!(kirchhoff_reflection(3).re, -1.0 / 3.0, epsilon = 1e-16);
        assert_abs_diff_eq!(
            (kirchhoff_reflection(3) + 1.0).re,
            2.0 / 3.0,
            epsilon = 1e-15
        );
        assert_eq!(kirchhoff_reflection(2), C0);
        assert_eq!(kirchhoff_reflection(1), c(1.0, 0.0));
        assert_eq!(kirchhoff_reflection(3).im, 0.0);
    }

    #[test]
    fn single_ray_kirchhoff_is_neumann() {
        // One ray: d/dq [e^{-ikq} + R e^{ikq}] at q = 0 is ik(R - 1) = 0.
        let r = kirchhoff_reflection(1);
        let d = monochromatic_field_derivative(1.7, 0.3, r, 0, 0.0, 0.4, 0);
        assert!(d.norm() < 1e-15);
    }

    #[test]
    fn phase_examples() {
        let a = phase_to_amplitudes(0.0, 1.0, 3);
        assert_abs_diff_eq!(a.reflection.re, -1.0 / 3.0, epsilon = 1e-15);
        let b = phase_to_amplitudes(PI, 1.0, 3);
        assert_abs_diff_eq!(b.reflection.re, -1.0, epsilon = 1e-15);
        assert!(b.transmission.norm() < 1e-15);
        let h = phase_to_amplitudes(PI / 2.0, 1.0, 3);
        assert!((h.reflection - c(-2.0 / 3.0, 1.0 / 3.0)).norm() < 1e-15);
        assert_eq!(phase_to_amplitudes(-PI, 1.0, 3).phase, PI);
    }

    #[test]
    fn unitarity_examples() {
        assert!(unitarity_residual(kirchhoff_reflection(3), 3).abs() < 1e-15);
        assert!(unitarity_residual(c(-1.0, 0.0), 3).abs() < 1e-15);
        assert_eq!(unitarity_residual(C0, 3), 1.0);
    }

    #[test]
    fn alpha_examples() {
        assert_eq!(alpha_family_phase(0.3, 1.0, 0.0).unwrap(), c(1.0, 0.0));
        assert_eq!(
            alpha_family_phase(0.3, 1.0, f64::INFINITY).unwrap(),
            c(-1.0, 0.0)
        );
        let u = alpha_family_phase(1.0, 1.0, 1.0).unwrap();
        let oracle = c(1.0, 2f64.sqrt()) / c(1.0, -(2f64.sqrt()));
        assert!((u - oracle).norm() < 1e-15);
        assert!((u - c(-1.0, 2.0 * 2f64.sqrt()) / 3.0).norm() < 1e-15);
        assert!(matches!(
            alpha_family_phase(0.0, 1.0, 1.0),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            alpha_family_phase(-1.0, 1.0, 1.0),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn beta_examples() {
        assert_eq!(beta_family_phase(2.0, 0.0).unwrap(), c(1.0, 0.0));
        assert!((beta_family_phase(1.0, 1.0).unwrap() - c(0.0, 1.0)).norm() < 1e-15);
        assert_eq!(
            beta_family_phase(1.0, f64::NEG_INFINITY).unwrap(),
            c(-1.0, 0.0)
        );
        assert!(beta_family_phase(0.0, 1.0).is_err());
    }

    #[test]
    fn family_dispatch() {
        let g = StarGraphSpec::new(3, 1.0).unwrap();
        let a = family_amplitudes(JunctionFamily::Kirchhoff, 0.5, &g).unwrap();
        let b = family_amplitudes(JunctionFamily::Kirchhoff, 7.0, &g).unwrap();
        assert_eq!(a.reflection, b.reflection);
        assert_abs_diff_eq!(a.reflection.re, -1.0 / 3.0, epsilon = 1e-16);
        let d = family_amplitudes(JunctionFamily::Decoupled, 3.0, &g).unwrap();
        assert_eq!(d.reflection, c(-1.0, 0.0));
        assert_eq!(d.transmission, C0);
        let al = family_amplitudes(JunctionFamily::Alpha(1.0), 1.0, &g).unwrap();
        let u = c(-1.0, 2.0 * 2f64.sqrt()) / 3.0;
        assert!((al.reflection - (u - 2.0) / 3.0).norm() < 1e-15);
        assert_eq!(
            family_amplitudes(JunctionFamily::Beta(0.0), 4.0, &g)
                .unwrap()
                .reflection,
            a.reflection
        );
    }

    #[test]
    fn monochromatic_field_examples() {
        let (k, m, t) = (1.3, 0.8, 0.45);
        let r = c(0.2, -0.4);
        let w = dispersion_omega(k, m);
        let at_junction = (r + 1.0) * Complex64::from_polar(1.0, -w * t);
        for ray in 0..3 {
            let v = monochromatic_field(k, m, r, ray, 0.0, t, 0);
            assert!((v - at_junction).norm() < 1e-15);
        }
        let kr = kirchhoff_reflection(3);
        let sum: Complex64 = (0..3)
            .map(|ray| monochromatic_field_derivative(k, m, kr, ray, 0.0, t, 0))
            .sum();
        assert!(sum.norm() < 1e-15);
        let q = 2.7;
        let free = monochromatic_field(k, m, C0, 0, q, 0.0, 0);
        assert!((free - Complex64::from_polar(1.0, -k * q)).norm() < 1e-15);
    }

    #[test]
    fn derivative_matches_finite_difference() {
        let (k, m, t, q) = (0.9, 1.1, 0.3, 1.7);
        let r = c(-0.5, 0.2);
        let h = 1e-6;
        for ray in 0..3 {
            let fd = (monochromatic_field(k, m, r, ray, q + h, t, 0)
                - monochromatic_field(k, m, r, ray, q - h, t, 0))
                / (2.0 * h);
            let d = monochromatic_field_derivative(k, m, r, ray, q, t, 0);
            assert!((fd - d).norm() < 1e-8);
        }
    }

    #[test]
    fn cross_residual_examples() {
        let kr = kirchhoff_reflection(3);
        let dec = c(-1.0, 0.0);
        let k = TwoModeSpec::new(0.7, 2.1, kr, kr).unwrap();
        assert!(energy_cross_residual(&k, 1.0, 3).norm() < 1e-15);
        assert!(charge_cross_residual(&k, 3).norm() < 1e-15);
        let d = TwoModeSpec::new(0.7, 2.1, dec, dec).unwrap();
        assert!(energy_cross_residual(&d, 1.0, 3).norm() < 1e-15);
        assert!(charge_cross_residual(&d, 3).norm() < 1e-15);
        let z = TwoModeSpec::new(1.0, 2.0, C0, C0).unwrap();
        assert_abs_diff_eq!(energy_cross_residual(&z, 0.0, 3).re, 4.0, epsilon = 1e-15);
        assert_abs_diff_eq!(charge_cross_residual(&z, 3).re, 3.0, epsilon = 1e-15);
        assert!(TwoModeSpec::new(1.0, 1.0, C0, C0).is_err());
    }

    /// Projects the junction energy-flux balance onto `e^{i(w1 - w2)t}` by
    /// direct time quadrature of the two-mode field; independent of the
    /// closed-form residual.
    fn energy_cross_by_quadrature(spec: &TwoModeSpec, m: f64, s: usize) -> Complex64 {
        let w1 = dispersion_omega(spec.k1, m);
        let w2 = dispersion_omega(spec.k2, m);
        let period = 2.0 * PI / (w1 - w2).abs();
        let n = 4096;
        let mut acc = C0;
        for j in 0..n {
            let t = period * j as f64 / n as f64;
            let phi_t = monochromatic_field(spec.k1, m, spec.r1, 0, 0.0, t, 0) * c(0.0, -w1)
                + monochromatic_field(spec.k2, m, spec.r2, 0, 0.0, t, 0) * c(0.0, -w2);
            let dsum: Complex64 = (0..s)
                .map(|ray| {
                    monochromatic_field_derivative(spec.k1, m, spec.r1, ray, 0.0, t, 0)
                        + monochromatic_field_derivative(spec.k2, m, spec.r2, ray, 0.0, t, 0)
                })
                .sum();
            let balance = phi_t.conj() * dsum + dsum.conj() * phi_t;
            acc += balance * Complex64::from_polar(1.0, -(w1 - w2) * t);
        }
        acc / n as f64
    }

    #[test]
    fn energy_cross_residual_matches_quadrature() {
        // Flux balance phi_t* sum(phi_q) + c.c. has cross coefficient
        // -(closed form) at e^{i(w1 - w2)t}.
        for s in [1usize, 2, 3, 5] {
            let spec = TwoModeSpec::new(0.8, 1.9, c(0.1, -0.3), c(-0.6, 0.25)).unwrap();
            let quad = energy_cross_by_quadrature(&spec, 0.7, s);
            let closed = energy_cross_residual(&spec, 0.7, s);
            assert!((quad + closed).norm() < 1e-10, "s={s}: {quad} vs {closed}");
        }
    }

    #[test]
    fn degenerate_limit_is_unitarity() {
        let (k, m) = (1.4, 0.6);
        let w = dispersion_omega(k, m);
        for s in 1..=5 {
            for r in [c(0.3, 0.1), c(-0.2, -0.7), kirchhoff_reflection(s)] {
                let spec = TwoModeSpec {
                    k1: k,
                    k2: k,
                    r1: r,
                    r2: r,
                };
                let e = energy_cross_residual(&spec, m, s) / (2.0 * w * k);
                let u = unitarity_residual(r, s);
                // Re[(1 + conj R)(sR + s - 2)] = s|R|^2 + 2(s-1)Re R + s - 2
                assert!((e.re - u).abs() < 1e-13, "s={s} r={r}");
                assert!(e.im.abs() < 1e-13);
            }
        }
    }

    #[test]
    fn alpha_family_zeroes_energy_cross_terms() {
        let g = StarGraphSpec::new(3, 1.0).unwrap();
        for alpha in [-2.0, 0.3, 1.0, 5.0] {
            let a1 = family_amplitudes(JunctionFamily::Alpha(alpha), 0.6, &g).unwrap();
            let a2 = family_amplitudes(JunctionFamily::Alpha(alpha), 2.3, &g).unwrap();
            let spec = TwoModeSpec::new(0.6, 2.3, a1.reflection, a2.reflection).unwrap();
            assert!(energy_cross_residual(&spec, 1.0, 3).norm() < 1e-13);
            assert!(charge_cross_residual(&spec, 3).norm() > 1e-6);
        }
    }

    #[test]
    fn fit_recovers_alpha() {
        let samples: Vec<_> = [0.5, 1.0, 2.0]
            .iter()
            .map(|&k| (k, alpha_family_phase(k, 1.0, 0.7).unwrap()))
            .collect();
        let fit = solve_family_from_residuals(&samples, 1.0, FamilyKind::Alpha).unwrap();
        assert!((fit.constant - 0.7).abs() < 1e-8);
    }

    #[test]
    fn fit_recovers_beta_and_kirchhoff() {
        let samples: Vec<_> = [1.0, 3.0]
            .iter()
            .map(|&k| (k, beta_family_phase(k, 2.0).unwrap()))
            .collect();
        let fit = solve_family_from_residuals(&samples, 1.0, FamilyKind::Beta).unwrap();
        assert!((fit.constant - 2.0).abs() < 1e-8);

        let kirchhoff: Vec<_> = [0.5, 1.5, 4.0].iter().map(|&k| (k, c(1.0, 0.0))).collect();
        for kind in [FamilyKind::Alpha, FamilyKind::Beta] {
            let fit = solve_family_from_residuals(&kirchhoff, 1.0, kind).unwrap();
            assert_eq!(fit.constant, 0.0);
        }
        let decoupled: Vec<_> = [0.5, 1.5].iter().map(|&k| (k, c(-1.0, 0.0))).collect();
        let fit = solve_family_from_residuals(&decoupled, 1.0, FamilyKind::Alpha).unwrap();
        assert!(fit.constant.is_infinite());
    }

    #[test]
    fn fit_rejects_inconsistent_phases() {
        // beta-family phases are not an alpha family when m > 0
        let samples: Vec<_> = [0.5, 1.0, 2.0]
            .iter()
            .map(|&k| (k, beta_family_phase(k, 1.0).unwrap()))
            .collect();
        match solve_family_from_residuals(&samples, 1.0, FamilyKind::Alpha) {
            Err(Error::InconsistentFamily { max_residual, .. }) => assert!(max_residual > 1e-6),
            other => panic!("expected inconsistency, got {other:?}"),
        }
        assert!(solve_family_from_residuals(&samples[..1], 1.0, FamilyKind::Beta).is_err());
    }
}
