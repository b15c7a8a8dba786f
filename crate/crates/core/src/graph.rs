//! Physical and lattice specifications plus the field-state container.
//!
//! Rays are numbered `0..s`; an incoming wave always enters on ray 0. Site
//! `n` of a ray (`n = 1..=N`) sits at distance `n * delta` from the junction,
//! which is its own degree of freedom at distance zero.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::discrete::discrete_dispersion;
use crate::error::{Error, Result};

/// Number of rays and field mass (natural units, `hbar = c = 1`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StarGraphSpec {
    pub ray_count: usize,
    pub mass: f64,
}

impl StarGraphSpec {
    pub fn new(ray_count: usize, mass: f64) -> Result<Self> {
        let spec = Self { ray_count, mass };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.ray_count < 1 {
            return Err(Error::InvalidGraph("ray_count must be >= 1".into()));
        }
        if !self.mass.is_finite() || self.mass < 0.0 {
            return Err(Error::InvalidGraph(format!(
                "mass must be finite and >= 0, got {}",
                self.mass
            )));
        }
        Ok(())
    }
}

/// Lattice constant, sites per ray and integrator time step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LatticeSpec {
    pub delta: f64,
    pub sites_per_ray: usize,
    pub dt: f64,
}

impl LatticeSpec {
    /// Checks the lattice-only invariants. The CFL bound needs the mass, see
    /// [`LatticeSpec::validate_for`].
    pub fn new(delta: f64, sites_per_ray: usize, dt: f64) -> Result<Self> {
        let spec = Self {
            delta,
            sites_per_ray,
            dt,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.delta.is_finite() && self.delta > 0.0) {
            return Err(Error::InvalidLattice(format!(
                "delta must be finite and > 0, got {}",
                self.delta
            )));
        }
        if self.sites_per_ray < 2 {
            return Err(Error::InvalidLattice(format!(
                "sites_per_ray must be >= 2, got {}",
                self.sites_per_ray
            )));
        }
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(Error::InvalidLattice(format!(
                "dt must be finite and > 0, got {}",
                self.dt
            )));
        }
        Ok(())
    }

    /// Highest normal frequency of the chain, `sqrt(4/delta^2 + m^2)`.
    pub fn omega_max(&self, mass: f64) -> f64 {
        (4.0 / (self.delta * self.delta) + mass * mass).sqrt()
    }

    /// Full validation including the leapfrog stability bound for `graph`.
    pub fn validate_for(&self, graph: &StarGraphSpec) -> Result<()> {
        self.validate()?;
        graph.validate()?;
        let omega_max = self.omega_max(graph.mass);
        let product = self.dt * omega_max;
        if product >= 2.0 {
            return Err(Error::Cfl {
                dt: self.dt,
                omega_max,
                product,
            });
        }
        Ok(())
    }

    /// Length of one ray, `N * delta`.
    pub fn ray_length(&self) -> f64 {
        self.sites_per_ray as f64 * self.delta
    }
}

/// Complex field and velocity on every site at time `time`.
///
/// `ray_values[q][n - 1]` is the field at site `n` of ray `q`.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldState {
    pub junction_value: Complex64,
    pub junction_velocity: Complex64,
    pub ray_values: Vec<Vec<Complex64>>,
    pub ray_velocities: Vec<Vec<Complex64>>,
    pub time: f64,
}

impl FieldState {
    pub fn ray_count(&self) -> usize {
        self.ray_values.len()
    }

    pub fn sites_per_ray(&self) -> usize {
        self.ray_values.first().map_or(0, Vec::len)
    }

    /// Field at site `n` of `ray`, where `n = 0` is the junction.
    pub fn value(&self, ray: usize, n: usize) -> Complex64 {
        if n == 0 {
            self.junction_value
        } else {
            self.ray_values[ray][n - 1]
        }
    }

    pub fn velocity(&self, ray: usize, n: usize) -> Complex64 {
        if n == 0 {
            self.junction_velocity
        } else {
            self.ray_velocities[ray][n - 1]
        }
    }

    pub fn validate(&self, graph: &StarGraphSpec, lattice: &LatticeSpec) -> Result<()> {
        if self.ray_values.len() != graph.ray_count || self.ray_velocities.len() != graph.ray_count
        {
            return Err(Error::Shape(format!(
                "expected {} rays, got {} values / {} velocities",
                graph.ray_count,
                self.ray_values.len(),
                self.ray_velocities.len()
            )));
        }
        for (q, (v, w)) in self.ray_values.iter().zip(&self.ray_velocities).enumerate() {
            if v.len() != lattice.sites_per_ray || w.len() != lattice.sites_per_ray {
                return Err(Error::Shape(format!(
                    "ray {q}: expected {} sites, got {} values / {} velocities",
                    lattice.sites_per_ray,
                    v.len(),
                    w.len()
                )));
            }
        }
        if !self.is_finite() {
            return Err(Error::NonFinite(format!("state at t = {}", self.time)));
        }
        Ok(())
    }

    pub fn is_finite(&self) -> bool {
        let ok = |z: &Complex64| z.re.is_finite() && z.im.is_finite();
        ok(&self.junction_value)
            && ok(&self.junction_velocity)
            && self.ray_values.iter().flatten().all(ok)
            && self.ray_velocities.iter().flatten().all(ok)
            && self.time.is_finite()
    }

    /// Largest `|phi|` over all sites.
    pub fn max_abs(&self) -> f64 {
        self.ray_values
            .iter()
            .flatten()
            .map(|z| z.norm())
            .fold(self.junction_value.norm(), f64::max)
    }

    /// Euclidean norm of all values and velocities together.
    pub fn norm(&self) -> f64 {
        let sq = self.junction_value.norm_sqr()
            + self.junction_velocity.norm_sqr()
            + self
                .ray_values
                .iter()
                .chain(&self.ray_velocities)
                .flatten()
                .map(|z| z.norm_sqr())
                .sum::<f64>();
        sq.sqrt()
    }

    /// Euclidean norm of `self - other` over values and velocities.
    pub fn distance(&self, other: &FieldState) -> f64 {
        let mut sq = (self.junction_value - other.junction_value).norm_sqr()
            + (self.junction_velocity - other.junction_velocity).norm_sqr();
        for (a, b) in self
            .ray_values
            .iter()
            .chain(&self.ray_velocities)
            .zip(other.ray_values.iter().chain(&other.ray_velocities))
        {
            sq += a
                .iter()
                .zip(b)
                .map(|(x, y)| (x - y).norm_sqr())
                .sum::<f64>();
        }
        sq.sqrt()
    }

    /// Multiplies every value and velocity by `factor`.
    pub fn scale(&mut self, factor: Complex64) {
        self.junction_value *= factor;
        self.junction_velocity *= factor;
        for z in self
            .ray_values
            .iter_mut()
            .chain(self.ray_velocities.iter_mut())
            .flatten()
        {
            *z *= factor;
        }
    }

    /// Flips the sign of every velocity (time reversal of a real-time system).
    pub fn negate_velocities(&mut self) {
        self.junction_velocity = -self.junction_velocity;
        for z in self.ray_velocities.iter_mut().flatten() {
            *z = -*z;
        }
    }
}

/// Reflection, transmission and phase at wavenumber `k`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScatteringAmplitudes {
    pub k: f64,
    pub reflection: Complex64,
    pub transmission: Complex64,
    /// `theta` in `R = e^{i theta}/s - (s-1)/s`, normalised to `(-pi, pi]`.
    pub phase: f64,
}

impl ScatteringAmplitudes {
    /// Builds amplitudes from `R`, deriving `T = 1 + R` and the phase
    /// `theta = arg(s R + s - 1)`.
    pub fn from_reflection(k: f64, reflection: Complex64, ray_count: usize) -> Self {
        let s = ray_count as f64;
        let phase = normalize_phase((reflection * s + (s - 1.0)).arg());
        Self {
            k,
            reflection,
            transmission: reflection + 1.0,
            phase,
        }
    }
}

/// Maps an angle into `(-pi, pi]`.
pub fn normalize_phase(theta: f64) -> f64 {
    let mut t = theta % (2.0 * PI);
    if t <= -PI {
        t += 2.0 * PI;
    } else if t > PI {
        t -= 2.0 * PI;
    }
    t
}

/// Junction condition in force.
///
/// `Alpha(0)` and `Beta(0)` mean the same as `Kirchhoff`; infinite parameters
/// mean the same as `Decoupled`. Use [`JunctionFamily::canonical`] to fold them.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum JunctionFamily {
    Kirchhoff,
    Decoupled,
    Alpha(f64),
    Beta(f64),
}

impl JunctionFamily {
    pub fn canonical(self) -> Self {
        match self {
            JunctionFamily::Alpha(c) | JunctionFamily::Beta(c) if c == 0.0 => {
                JunctionFamily::Kirchhoff
            }
            JunctionFamily::Alpha(c) | JunctionFamily::Beta(c) if c.is_infinite() => {
                JunctionFamily::Decoupled
            }
            other => other,
        }
    }
}

impl fmt::Display for JunctionFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            JunctionFamily::Kirchhoff => f.write_str("kirchhoff"),
            JunctionFamily::Decoupled => f.write_str("decoupled"),
            JunctionFamily::Alpha(a) => write!(f, "alpha:{a}"),
            JunctionFamily::Beta(b) => write!(f, "beta:{b}"),
        }
    }
}

impl FromStr for JunctionFamily {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        let lower = s.trim().to_ascii_lowercase();
        let parse_param = |v: &str| {
            v.parse::<f64>()
                .ok()
                .filter(|x| !x.is_nan())
                .ok_or_else(|| format!("bad family parameter {v:?}"))
        };
        match lower.split_once(':') {
            None => match lower.as_str() {
                "kirchhoff" => Ok(JunctionFamily::Kirchhoff),
                "decoupled" => Ok(JunctionFamily::Decoupled),
                _ => Err(format!(
                    "unknown junction family {s:?} (expected kirchhoff, decoupled, alpha:<x>, beta:<x>)"
                )),
            },
            Some(("alpha", v)) => parse_param(v).map(JunctionFamily::Alpha),
            Some(("beta", v)) => parse_param(v).map(JunctionFamily::Beta),
            Some(_) => Err(format!("unknown junction family {s:?}")),
        }
    }
}

impl TryFrom<String> for JunctionFamily {
    type Error = String;
    fn try_from(s: String) -> std::result::Result<Self, Self::Error> {
        s.parse()
    }
}

impl From<JunctionFamily> for String {
    fn from(f: JunctionFamily) -> String {
        f.to_string()
    }
}

/// Which rays are linked to the junction oscillator.
///
/// The lattice realises the Kirchhoff junction with every ray linked and the
/// decoupled junction by removing the links of every ray except the incoming
/// one. The alpha and beta families have no lattice counterpart.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct JunctionCoupling {
    coupled: Vec<bool>,
}

impl JunctionCoupling {
    pub fn full(ray_count: usize) -> Self {
        Self {
            coupled: vec![true; ray_count],
        }
    }

    /// Only ray 0 stays linked to the junction.
    pub fn incoming_only(ray_count: usize) -> Self {
        let mut coupled = vec![false; ray_count];
        if let Some(first) = coupled.first_mut() {
            *first = true;
        }
        Self { coupled }
    }

    pub fn for_family(family: JunctionFamily, ray_count: usize) -> Result<Self> {
        match family.canonical() {
            JunctionFamily::Kirchhoff => Ok(Self::full(ray_count)),
            JunctionFamily::Decoupled => Ok(Self::incoming_only(ray_count)),
            other => Err(Error::UnsupportedFamily(other.to_string())),
        }
    }

    pub fn is_coupled(&self, ray: usize) -> bool {
        self.coupled.get(ray).copied().unwrap_or(false)
    }

    pub fn coupled_count(&self) -> usize {
        self.coupled.iter().filter(|&&c| c).count()
    }

    pub fn ray_count(&self) -> usize {
        self.coupled.len()
    }

    pub fn check(&self, graph: &StarGraphSpec) -> Result<()> {
        if self.coupled.len() != graph.ray_count {
            return Err(Error::Shape(format!(
                "coupling covers {} rays, graph has {}",
                self.coupled.len(),
                graph.ray_count
            )));
        }
        Ok(())
    }
}

/// `e^{i kd n}` with the rounding error of the product `kd * n` folded back
/// in, so distant sites keep the phase relation their neighbours see.
fn lattice_phase(kd: f64, n: usize) -> Complex64 {
    let n = n as f64;
    let x = kd * n;
    let err = kd.mul_add(n, -x);
    Complex64::from_polar(1.0, x) * Complex64::new(1.0 - 0.5 * err * err, err)
}

/// Zero field at time 0 with shapes taken from the specs.
pub fn make_field_state(graph: &StarGraphSpec, lattice: &LatticeSpec) -> Result<FieldState> {
    lattice.validate_for(graph)?;
    let zeros = vec![vec![Complex64::new(0.0, 0.0); lattice.sites_per_ray]; graph.ray_count];
    Ok(FieldState {
        junction_value: Complex64::new(0.0, 0.0),
        junction_velocity: Complex64::new(0.0, 0.0),
        ray_values: zeros.clone(),
        ray_velocities: zeros,
        time: 0.0,
    })
}

/// Samples the stationary lattice mode with reflection `reflection` at time `t`.
///
/// Ray 0 carries `e^{-i(wt + k d n)} + R e^{-i(wt - k d n)}`, every other ray
/// `(1 + R) e^{-i(wt - k d n)}` and the junction `(1 + R) e^{-iwt}`, with `w`
/// from the lattice dispersion. Velocities are the exact time derivative.
pub fn sample_discrete_mode(
    graph: &StarGraphSpec,
    lattice: &LatticeSpec,
    k: f64,
    reflection: Complex64,
    t: f64,
) -> Result<FieldState> {
    graph.validate()?;
    lattice.validate()?;
    let omega = discrete_dispersion(k, graph.mass, lattice.delta)?;
    let time_factor = Complex64::from_polar(1.0, -omega * t);
    let dv = Complex64::new(0.0, -omega);
    let transmitted = reflection + 1.0;

    let kd = k * lattice.delta;
    let mut ray_values = Vec::with_capacity(graph.ray_count);
    for q in 0..graph.ray_count {
        let ray: Vec<Complex64> = (1..=lattice.sites_per_ray)
            .map(|n| {
                let outgoing = lattice_phase(kd, n);
                let spatial = if q == 0 {
                    outgoing.conj() + reflection * outgoing
                } else {
                    transmitted * outgoing
                };
                spatial * time_factor
            })
            .collect();
        ray_values.push(ray);
    }
    let ray_velocities = ray_values
        .iter()
        .map(|ray| ray.iter().map(|z| dv * z).collect())
        .collect();
    let junction_value = transmitted * time_factor;
    Ok(FieldState {
        junction_value,
        junction_velocity: dv * junction_value,
        ray_values,
        ray_velocities,
        time: t,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discrete::discrete_reflection;

    fn y_junction() -> StarGraphSpec {
        StarGraphSpec::new(3, 1.0).unwrap()
    }

    #[test]
    fn zero_state_has_expected_shape() {
        let lattice = LatticeSpec::new(0.1, 100, 0.04).unwrap();
        let state = make_field_state(&y_junction(), &lattice).unwrap();
        assert_eq!(state.ray_count(), 3);
        assert!(state.ray_values.iter().all(|r| r.len() == 100));
        assert_eq!(state.junction_value, Complex64::new(0.0, 0.0));
        assert_eq!(state.time, 0.0);
        state.validate(&y_junction(), &lattice).unwrap();
    }

    #[test]
    fn cfl_violation_is_rejected() {
        // 0.2 * sqrt(400 + 1) = 4.005 >= 2
        let lattice = LatticeSpec::new(0.1, 100, 0.2).unwrap();
        match make_field_state(&y_junction(), &lattice) {
            Err(Error::Cfl { product, .. }) => {
                assert!((product - 0.2 * 401f64.sqrt()).abs() < 1e-12)
            }
            other => panic!("expected CFL error, got {other:?}"),
        }
    }

    #[test]
    fn minimal_single_ray() {
        let graph = StarGraphSpec::new(1, 0.0).unwrap();
        let lattice = LatticeSpec::new(1.0, 2, 0.5).unwrap();
        let state = make_field_state(&graph, &lattice).unwrap();
        assert_eq!(state.ray_count(), 1);
        assert_eq!(state.sites_per_ray(), 2);
    }

    #[test]
    fn invalid_specs_name_the_invariant() {
        assert!(matches!(
            StarGraphSpec::new(0, 1.0),
            Err(Error::InvalidGraph(_))
        ));
        assert!(matches!(
            StarGraphSpec::new(3, -1.0),
            Err(Error::InvalidGraph(_))
        ));
        assert!(matches!(
            StarGraphSpec::new(3, f64::NAN),
            Err(Error::InvalidGraph(_))
        ));
        assert!(matches!(
            LatticeSpec::new(0.0, 10, 0.1),
            Err(Error::InvalidLattice(_))
        ));
        assert!(matches!(
            LatticeSpec::new(0.1, 1, 0.01),
            Err(Error::InvalidLattice(_))
        ));
        assert!(matches!(
            LatticeSpec::new(0.1, 10, -0.01),
            Err(Error::InvalidLattice(_))
        ));
    }

    #[test]
    fn shape_mismatch_detected() {
        let graph = y_junction();
        let lattice = LatticeSpec::new(0.1, 10, 0.01).unwrap();
        let mut state = make_field_state(&graph, &lattice).unwrap();
        state.ray_values[1].pop();
        assert!(matches!(
            state.validate(&graph, &lattice),
            Err(Error::Shape(_))
        ));
        let mut state = make_field_state(&graph, &lattice).unwrap();
        state.ray_velocities[2][3] = Complex64::new(f64::NAN, 0.0);
        assert!(matches!(
            state.validate(&graph, &lattice),
            Err(Error::NonFinite(_))
        ));
    }

    #[test]
    fn junction_entry_of_mode_is_one_plus_r() {
        let lattice = LatticeSpec::new(0.1, 20, 0.01).unwrap();
        let r = Complex64::new(-0.3, 0.1);
        let state = sample_discrete_mode(&y_junction(), &lattice, 1.0, r, 0.0).unwrap();
        assert_eq!(state.junction_value, r + 1.0);
    }

    #[test]
    fn full_reflection_leaves_other_rays_at_rest() {
        let lattice = LatticeSpec::new(0.1, 20, 0.01).unwrap();
        let state =
            sample_discrete_mode(&y_junction(), &lattice, 1.0, Complex64::new(-1.0, 0.0), 0.7)
                .unwrap();
        assert_eq!(state.junction_value.norm(), 0.0);
        for q in 1..3 {
            assert!(state.ray_values[q].iter().all(|z| z.norm() == 0.0));
        }
    }

    #[test]
    fn mode_is_stationary_up_to_a_global_phase() {
        let graph = y_junction();
        let lattice = LatticeSpec::new(0.1, 30, 0.01).unwrap();
        let (k, t0, t1) = (1.3, 0.4, 2.9);
        let r = discrete_reflection(k, lattice.delta, 3)
            .unwrap()
            .amplitudes
            .reflection;
        let a = sample_discrete_mode(&graph, &lattice, k, r, t0).unwrap();
        let b = sample_discrete_mode(&graph, &lattice, k, r, t1).unwrap();
        let omega = discrete_dispersion(k, graph.mass, lattice.delta).unwrap();
        let mut rotated = a.clone();
        rotated.scale(Complex64::from_polar(1.0, -omega * (t1 - t0)));
        rotated.time = t1;
        assert!(rotated.distance(&b) < 1e-12 * b.norm());
    }

    #[test]
    fn family_string_round_trip() {
        for f in [
            JunctionFamily::Kirchhoff,
            JunctionFamily::Decoupled,
            JunctionFamily::Alpha(0.7),
            JunctionFamily::Beta(-2.0),
        ] {
            assert_eq!(f.to_string().parse::<JunctionFamily>().unwrap(), f);
        }
        assert!("gamma:1".parse::<JunctionFamily>().is_err());
        assert_eq!(
            JunctionFamily::Alpha(0.0).canonical(),
            JunctionFamily::Kirchhoff
        );
        assert_eq!(
            "beta:inf".parse::<JunctionFamily>().unwrap().canonical(),
            JunctionFamily::Decoupled
        );
    }

    #[test]
    fn normalize_phase_range() {
        assert_eq!(normalize_phase(-PI), PI);
        assert!((normalize_phase(3.0 * PI) - PI).abs() < 1e-15);
        assert!((normalize_phase(0.5 - 4.0 * PI) - 0.5).abs() < 1e-14);
    }
}
