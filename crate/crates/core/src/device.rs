//! Design integrals over sampled field solutions: effective mass,
//! capacitance, participation ratio, LC frequency and the moving-boundary
//! coupling rate.
//!
//! Samples carry their own quadrature weights, so any field solver that can
//! export point values with volumes (or areas) can feed these routines.
//! Conductors are ordinary dielectrics with a very large `eps_rel`
//! ([`CONDUCTOR_EPS_REL`]).
//!
//! Surface normals point from material 1 into material 2. A positive
//! `Q . n` therefore grows material 1.

use std::io::Read;
use std::path::Path;

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Vacuum permittivity, F/m.
pub use crate::physics::EPSILON_0;

/// Relative permittivity standing in for a perfect conductor.
pub const CONDUCTOR_EPS_REL: f64 = 1e12;

pub const VOLUME_HEADER: [&str; 12] = [
    "x_m",
    "y_m",
    "z_m",
    "w_m3",
    "eps_rel",
    "ex_vpm",
    "ey_vpm",
    "ez_vpm",
    "rho_kgpm3",
    "qx_m",
    "qy_m",
    "qz_m",
];

pub const SURFACE_HEADER: [&str; 18] = [
    "x_m", "y_m", "z_m", "a_m2", "nx", "ny", "nz", "qx_m", "qy_m", "qz_m", "ex_vpm", "ey_vpm", "ez_vpm", "dx_cpm2",
    "dy_cpm2", "dz_cpm2", "eps1_rel", "eps2_rel",
];

/// Neumaier's compensated sum.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

impl FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut s = CompensatedSum::default();
        for x in iter {
            s.add(x);
        }
        s
    }
}

fn csum<I: IntoIterator<Item = f64>>(iter: I) -> f64 {
    iter.into_iter().collect::<CompensatedSum>().value()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VolumeSample {
    pub position: Vector3<f64>,
    /// Quadrature volume, m^3.
    pub weight: f64,
    pub eps_rel: f64,
    /// Electric field, V/m.
    pub e: Vector3<f64>,
    /// Mass density, kg/m^3.
    pub rho: f64,
    /// Mode displacement, m.
    pub q: Vector3<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VolumeSampleSet {
    samples: Vec<VolumeSample>,
}

impl VolumeSampleSet {
    pub fn new(samples: Vec<VolumeSample>) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::domain("volume sample set is empty"));
        }
        for (k, s) in samples.iter().enumerate() {
            if !(s.weight > 0.0) || !s.weight.is_finite() {
                return Err(Error::domain(format!("sample {k}: weight must be positive")));
            }
            let finite = s.position.iter().chain(&s.e).chain(&s.q).all(|v| v.is_finite())
                && s.eps_rel.is_finite()
                && s.rho.is_finite();
            if !finite {
                return Err(Error::domain(format!("sample {k}: non-finite value")));
            }
        }
        Ok(Self { samples })
    }

    pub fn samples(&self) -> &[VolumeSample] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Returns a copy with every displacement multiplied by `c`.
    pub fn with_scaled_mode(&self, c: f64) -> Self {
        let samples = self.samples.iter().map(|s| VolumeSample { q: s.q * c, ..*s }).collect();
        Self { samples }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SurfaceSample {
    pub position: Vector3<f64>,
    /// Quadrature area, m^2.
    pub area: f64,
    /// Unit normal from material 1 into material 2.
    pub normal: Vector3<f64>,
    pub q: Vector3<f64>,
    /// Electric field on the material 1 side, V/m.
    pub e: Vector3<f64>,
    /// Displacement field, C/m^2.
    pub d: Vector3<f64>,
    pub eps1_rel: f64,
    pub eps2_rel: f64,
}

impl SurfaceSample {
    /// `Q . n` and the bracket `de |E_par|^2 - d(1/e) |D_perp|^2` in
    /// absolute permittivities.
    fn integrand(&self) -> (f64, f64) {
        let n = self.normal;
        let e_par = self.e - n * self.e.dot(&n);
        let d_perp = self.d.dot(&n);
        let (e1, e2) = (EPSILON_0 * self.eps1_rel, EPSILON_0 * self.eps2_rel);
        let bracket = (e1 - e2) * e_par.norm_squared() - (1.0 / e1 - 1.0 / e2) * d_perp * d_perp;
        (self.q.dot(&n), bracket)
    }

    /// The same sample described from the other side of the interface.
    pub fn flipped(&self) -> Self {
        Self {
            normal: -self.normal,
            eps1_rel: self.eps2_rel,
            eps2_rel: self.eps1_rel,
            ..*self
        }
    }
}

/// Samples on one material interface.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurfaceSampleSet {
    pub label: String,
    samples: Vec<SurfaceSample>,
}

impl SurfaceSampleSet {
    pub fn new(label: impl Into<String>, samples: Vec<SurfaceSample>) -> Result<Self> {
        for (k, s) in samples.iter().enumerate() {
            if !(s.area > 0.0) || !s.area.is_finite() {
                return Err(Error::domain(format!("surface sample {k}: area must be positive")));
            }
            if (s.normal.norm() - 1.0).abs() > 1e-9 {
                return Err(Error::domain(format!(
                    "surface sample {k}: normal is not a unit vector"
                )));
            }
            if !(s.eps1_rel > 0.0 && s.eps2_rel > 0.0) {
                return Err(Error::domain(format!(
                    "surface sample {k}: permittivities must be positive"
                )));
            }
            let finite = s
                .position
                .iter()
                .chain(&s.q)
                .chain(&s.e)
                .chain(&s.d)
                .all(|v| v.is_finite())
                && s.eps1_rel.is_finite()
                && s.eps2_rel.is_finite();
            if !finite {
                return Err(Error::domain(format!("surface sample {k}: non-finite value")));
            }
        }
        Ok(Self {
            label: label.into(),
            samples,
        })
    }

    pub fn samples(&self) -> &[SurfaceSample] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn flipped(&self) -> Self {
        Self {
            label: self.label.clone(),
            samples: self.samples.iter().map(SurfaceSample::flipped).collect(),
        }
    }

    pub fn with_scaled_mode(&self, c: f64) -> Self {
        let samples = self
            .samples
            .iter()
            .map(|s| SurfaceSample { q: s.q * c, ..*s })
            .collect();
        Self {
            label: self.label.clone(),
            samples,
        }
    }
}

/// Lumped LC resonator around the mechanical capacitor.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResonatorLumped {
    /// Henry.
    #[serde(rename = "inductance_h")]
    pub inductance: f64,
    /// Farad.
    #[serde(rename = "stray_capacitance_f")]
    pub stray_capacitance: f64,
}

impl ResonatorLumped {
    pub fn new(inductance: f64, stray_capacitance: f64) -> Result<Self> {
        let r = Self {
            inductance,
            stray_capacitance,
        };
        r.validate()?;
        Ok(r)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.inductance > 0.0) || !self.inductance.is_finite() {
            return Err(Error::domain("inductance must be positive"));
        }
        if !(self.stray_capacitance >= 0.0) || !self.stray_capacitance.is_finite() {
            return Err(Error::domain("stray capacitance must be non-negative"));
        }
        Ok(())
    }

    /// Inductance that puts the resonance at `omega_c` given `c_m`.
    pub fn inductance_for(omega_c: f64, stray_capacitance: f64, c_m: f64) -> Result<f64> {
        if !(omega_c > 0.0) || !(stray_capacitance + c_m > 0.0) {
            return Err(Error::domain("need positive frequency and total capacitance"));
        }
        Ok(1.0 / (omega_c * omega_c * (stray_capacitance + c_m)))
    }
}

/// `alpha = max |Q|`.
pub fn max_displacement(v: &VolumeSampleSet) -> Result<f64> {
    let alpha = v.samples.iter().map(|s| s.q.norm()).fold(0.0, f64::max);
    if !(alpha > 0.0) {
        return Err(Error::Degenerate("mode displacement is zero everywhere".into()));
    }
    Ok(alpha)
}

/// `sum w rho |Q / alpha|^2`.
pub fn effective_mass(v: &VolumeSampleSet) -> Result<f64> {
    let alpha = max_displacement(v)?;
    Ok(csum(
        v.samples
            .iter()
            .map(|s| s.weight * s.rho * (s.q / alpha).norm_squared()),
    ))
}

/// `sum w eps |E|^2`: twice the stored electric energy, J.
pub fn field_energy_integral(v: &VolumeSampleSet) -> f64 {
    csum(
        v.samples
            .iter()
            .map(|s| s.weight * EPSILON_0 * s.eps_rel * s.e.norm_squared()),
    )
}

/// `C = sum w eps |E|^2 / V^2`.
pub fn capacitance_from_energy(v: &VolumeSampleSet, applied_voltage: f64) -> Result<f64> {
    if !(applied_voltage > 0.0) || !applied_voltage.is_finite() {
        return Err(Error::domain("applied voltage must be positive"));
    }
    Ok(field_energy_integral(v) / (applied_voltage * applied_voltage))
}

/// `eta = C_m / (C_s + C_m)`.
pub fn participation_ratio(c_m: f64, c_s: f64) -> Result<f64> {
    if !(c_m > 0.0) || !(c_s >= 0.0) || !(c_m + c_s).is_finite() {
        return Err(Error::domain("need C_m > 0 and C_s >= 0"));
    }
    Ok(c_m / (c_s + c_m))
}

/// `omega_c = 1 / sqrt(L (C_s + C_m))`, rad/s.
pub fn lc_frequency(r: &ResonatorLumped, c_m: f64) -> Result<f64> {
    r.validate()?;
    let c = r.stray_capacitance + c_m;
    if !(c > 0.0) || !c.is_finite() {
        return Err(Error::domain("total capacitance must be positive"));
    }
    Ok(1.0 / (r.inductance * c).sqrt())
}

/// `sum_surfaces sum_i a_i (Q_i . n_i / alpha) (de |E_par|^2 - d(1/e) |D_perp|^2)`.
pub fn moving_boundary_integral(surfaces: &[SurfaceSampleSet], alpha: f64) -> f64 {
    csum(surfaces.iter().flat_map(|set| set.samples.iter()).map(|s| {
        let (qn, bracket) = s.integrand();
        s.area * (qn / alpha) * bracket
    }))
}

/// `(1/C) dC/d alpha` from the boundary perturbation: the surface integral
/// over the volume field energy, 1/m.
pub fn relative_capacitance_derivative(surfaces: &[SurfaceSampleSet], volume: &VolumeSampleSet) -> Result<f64> {
    let alpha = max_displacement(volume)?;
    let den = field_energy_integral(volume);
    if !(den > 0.0) || !den.is_finite() {
        return Err(Error::Degenerate("electric field energy is zero".into()));
    }
    Ok(moving_boundary_integral(surfaces, alpha) / den)
}

/// Single-phonon coupling rate
/// `g0 = -x_zpf eta (omega_c / 2) (1/C) dC/d alpha` with the derivative
/// from [`relative_capacitance_derivative`], rad/s.
pub fn coupling_rate_moving_boundary(
    surfaces: &[SurfaceSampleSet],
    volume: &VolumeSampleSet,
    eta: f64,
    omega_c: f64,
    x_zpf: f64,
) -> Result<f64> {
    let rel = relative_capacitance_derivative(surfaces, volume)?;
    Ok(-x_zpf * eta * 0.5 * omega_c * rel)
}

/// `d omega_c / d alpha = -(omega_c / 2) eta (1/C_m) dC_m/d alpha`.
pub fn dwda_lumped(eta: f64, omega_c: f64, c_m: f64, dc_da: f64) -> Result<f64> {
    if !(c_m > 0.0) {
        return Err(Error::domain("C_m must be positive"));
    }
    Ok(-0.5 * omega_c * eta * dc_da / c_m)
}

fn read_rows<R: Read>(reader: R, header: &[&str]) -> Result<Vec<(usize, Vec<f64>)>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers = rdr
        .headers()
        .map_err(|e| Error::Load {
            line: 1,
            msg: e.to_string(),
        })?
        .clone();
    let found: Vec<&str> = headers.iter().collect();
    if found != header {
        return Err(Error::Load {
            line: headers.position().map_or(1, |p| p.line() as usize),
            msg: format!("expected header `{}`, found `{}`", header.join(","), found.join(",")),
        });
    }
    let mut rows = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| Error::Load {
            line: e.position().map_or(0, |p| p.line() as usize),
            msg: e.to_string(),
        })?;
        let line = rec.position().map_or(0, |p| p.line() as usize);
        if rec.len() != header.len() {
            return Err(Error::Load {
                line,
                msg: format!("expected {} fields, found {}", header.len(), rec.len()),
            });
        }
        let mut vals = Vec::with_capacity(header.len());
        for field in rec.iter() {
            let v: f64 = field.parse().map_err(|_| Error::Load {
                line,
                msg: format!("`{field}` is not a number"),
            })?;
            if !v.is_finite() {
                return Err(Error::Load {
                    line,
                    msg: format!("non-finite value `{field}`"),
                });
            }
            vals.push(v);
        }
        rows.push((line, vals));
    }
    Ok(rows)
}

fn open(path: &Path) -> Result<std::fs::File> {
    std::fs::File::open(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

fn v3(r: &[f64], k: usize) -> Vector3<f64> {
    Vector3::new(r[k], r[k + 1], r[k + 2])
}

pub fn read_volume_samples<R: Read>(reader: R) -> Result<VolumeSampleSet> {
    let rows = read_rows(reader, &VOLUME_HEADER)?;
    let mut samples = Vec::with_capacity(rows.len());
    for (line, r) in rows {
        if !(r[3] > 0.0) {
            return Err(Error::Load {
                line,
                msg: "weight must be positive".into(),
            });
        }
        samples.push(VolumeSample {
            position: v3(&r, 0),
            weight: r[3],
            eps_rel: r[4],
            e: v3(&r, 5),
            rho: r[8],
            q: v3(&r, 9),
        });
    }
    if samples.is_empty() {
        return Err(Error::Load {
            line: 1,
            msg: "no samples".into(),
        });
    }
    VolumeSampleSet::new(samples)
}

pub fn load_volume_samples(path: &Path) -> Result<VolumeSampleSet> {
    read_volume_samples(open(path)?)
}

pub fn read_surface_samples<R: Read>(reader: R, label: &str) -> Result<SurfaceSampleSet> {
    let rows = read_rows(reader, &SURFACE_HEADER)?;
    let mut samples = Vec::with_capacity(rows.len());
    for (line, r) in rows {
        let s = SurfaceSample {
            position: v3(&r, 0),
            area: r[3],
            normal: v3(&r, 4),
            q: v3(&r, 7),
            e: v3(&r, 10),
            d: v3(&r, 13),
            eps1_rel: r[16],
            eps2_rel: r[17],
        };
        SurfaceSampleSet::new(label, vec![s]).map_err(|e| Error::Load {
            line,
            msg: e.to_string(),
        })?;
        samples.push(s);
    }
    SurfaceSampleSet::new(label, samples)
}

pub fn load_surface_samples(path: &Path) -> Result<SurfaceSampleSet> {
    read_surface_samples(open(path)?, &path.display().to_string())
}

fn write_rows<W: std::io::Write>(writer: W, header: &[&str], rows: impl Iterator<Item = Vec<f64>>) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let io = |e: csv::Error| Error::Io(e.to_string());
    w.write_record(header).map_err(io)?;
    for r in rows {
        w.write_record(r.iter().map(|v| format!("{v:.16e}"))).map_err(io)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_volume_samples<W: std::io::Write>(writer: W, v: &VolumeSampleSet) -> Result<()> {
    write_rows(
        writer,
        &VOLUME_HEADER,
        v.samples.iter().map(|s| {
            let mut r = Vec::with_capacity(12);
            r.extend(s.position.iter());
            r.extend([s.weight, s.eps_rel]);
            r.extend(s.e.iter());
            r.push(s.rho);
            r.extend(s.q.iter());
            r
        }),
    )
}

pub fn write_surface_samples<W: std::io::Write>(writer: W, set: &SurfaceSampleSet) -> Result<()> {
    write_rows(
        writer,
        &SURFACE_HEADER,
        set.samples.iter().map(|s| {
            let mut r = Vec::with_capacity(18);
            r.extend(s.position.iter());
            r.push(s.area);
            for v in [s.normal, s.q, s.e, s.d] {
                r.extend(v.iter());
            }
            r.extend([s.eps1_rel, s.eps2_rel]);
            r
        }),
    )
}

/// Synthetic parallel-plate capacitor with analytic fields.
///
/// Two square plates of side `side` and thickness `thickness` face each
/// other across a gap along z. The lower plate sits in `[-thickness, 0]`
/// and the upper one in `[gap, gap + thickness]`; the upper plate moves
/// rigidly into the gap by `amplitude`. Fringing fields are ignored.
pub mod toy {
    use super::*;

    #[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
    pub struct ParallelPlate {
        pub side: f64,
        pub gap: f64,
        pub thickness: f64,
        pub voltage: f64,
        /// Kg/m^3 of the plates.
        pub density: f64,
        pub amplitude: f64,
        /// Samples per edge in x and y, and through each layer in z.
        pub resolution: usize,
        /// Optional dielectric slab on the lower plate: thickness and
        /// relative permittivity.
        pub slab: Option<(f64, f64)>,
    }

    impl Default for ParallelPlate {
        fn default() -> Self {
            Self {
                side: 10e-6,
                gap: 70e-9,
                thickness: 100e-9,
                voltage: 1.0,
                density: 2700.0,
                amplitude: 1e-9,
                resolution: 8,
                slab: None,
            }
        }
    }

    impl ParallelPlate {
        pub fn area(&self) -> f64 {
            self.side * self.side
        }

        /// Uniform displacement field in the gap, C/m^2.
        pub fn displacement_field(&self) -> f64 {
            let (t, er) = self.slab.unwrap_or((0.0, 1.0));
            self.voltage / ((self.gap - t) / EPSILON_0 + t / (EPSILON_0 * er))
        }

        /// Series-capacitor closed form.
        pub fn analytic_capacitance(&self) -> f64 {
            self.area() * self.displacement_field() / self.voltage
        }

        pub fn with_gap(&self, gap: f64) -> Self {
            Self { gap, ..*self }
        }

        #[allow(clippy::too_many_arguments)]
        fn layer(&self, z0: f64, z1: f64, eps_rel: f64, ez: f64, rho: f64, qz: f64, out: &mut Vec<VolumeSample>) {
            let n = self.resolution;
            let (dx, dz) = (self.side / n as f64, (z1 - z0) / n as f64);
            for i in 0..n {
                for j in 0..n {
                    for k in 0..n {
                        out.push(VolumeSample {
                            position: Vector3::new(
                                (i as f64 + 0.5) * dx,
                                (j as f64 + 0.5) * dx,
                                z0 + (k as f64 + 0.5) * dz,
                            ),
                            weight: dx * dx * dz,
                            eps_rel,
                            e: Vector3::new(0.0, 0.0, ez),
                            rho,
                            q: Vector3::new(0.0, 0.0, qz),
                        });
                    }
                }
            }
        }

        pub fn volume(&self) -> Result<VolumeSampleSet> {
            if !(self.gap > 0.0 && self.side > 0.0 && self.thickness > 0.0 && self.resolution > 0) {
                return Err(Error::domain("plate geometry must be positive"));
            }
            let d = self.displacement_field();
            let (t, er) = self.slab.unwrap_or((0.0, 1.0));
            if !(t >= 0.0 && t < self.gap) {
                return Err(Error::domain("slab must be thinner than the gap"));
            }
            let mut s = Vec::new();
            // Field points from the upper (positive) plate down.
            self.layer(-self.thickness, 0.0, CONDUCTOR_EPS_REL, 0.0, self.density, 0.0, &mut s);
            if t > 0.0 {
                self.layer(0.0, t, er, -d / (EPSILON_0 * er), 0.0, 0.0, &mut s);
            }
            self.layer(t, self.gap, 1.0, -d / EPSILON_0, 0.0, 0.0, &mut s);
            self.layer(
                self.gap,
                self.gap + self.thickness,
                CONDUCTOR_EPS_REL,
                0.0,
                self.density,
                -self.amplitude,
                &mut s,
            );
            VolumeSampleSet::new(s)
        }

        /// Plate faces bordering the gap, each with the plate as material 1.
        pub fn surfaces(&self) -> Result<Vec<SurfaceSampleSet>> {
            let n = self.resolution;
            let dx = self.side / n as f64;
            let d = self.displacement_field();
            let (t, er) = self.slab.unwrap_or((0.0, 1.0));
            let face = |z: f64, nz: f64, qz: f64, eps2: f64| {
                (0..n * n)
                    .map(|k| SurfaceSample {
                        position: Vector3::new((k / n) as f64 * dx + 0.5 * dx, (k % n) as f64 * dx + 0.5 * dx, z),
                        area: dx * dx,
                        normal: Vector3::new(0.0, 0.0, nz),
                        q: Vector3::new(0.0, 0.0, qz),
                        e: Vector3::zeros(),
                        d: Vector3::new(0.0, 0.0, -d),
                        eps1_rel: CONDUCTOR_EPS_REL,
                        eps2_rel: eps2,
                    })
                    .collect::<Vec<_>>()
            };
            let lower_eps = if t > 0.0 { er } else { 1.0 };
            Ok(vec![
                SurfaceSampleSet::new("lower plate", face(0.0, 1.0, 0.0, lower_eps))?,
                SurfaceSampleSet::new("upper plate", face(self.gap, -1.0, -self.amplitude, 1.0))?,
            ])
        }

        /// Total plate mass, kg.
        pub fn plate_mass(&self) -> f64 {
            self.density * self.area() * self.thickness
        }

        /// `dC/d alpha` by a one-sided difference in the gap, closing it by
        /// `rel_step * gap`.
        pub fn finite_difference_dc_da(&self, rel_step: f64) -> Result<f64> {
            let h = rel_step * self.gap;
            let c0 = capacitance_from_energy(&self.volume()?, self.voltage)?;
            let c1 = capacitance_from_energy(&self.with_gap(self.gap - h).volume()?, self.voltage)?;
            Ok((c1 - c0) / h)
        }
    }
}
