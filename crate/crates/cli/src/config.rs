//! Run configuration: a JSON document with `"schema": 1`. Omitted keys take
//! nominal defaults and every default applied is recorded in the provenance
//! log. Keys named `_comment` are accepted everywhere and ignored.

use std::fmt;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::Deserialize;
use softfoot::harness::{terrain_catalog, FootModel, RigidFootParams, TerrainKind, TerrainProfile};
use softfoot::planar::{AdaptiveArchParams, CompliantLumpedParams, RigidFootScenario};
use softfoot::softfoot::{ComplianceModel, SoftFootParams, GRAVITY};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Units {
    #[value(name = "m")]
    M,
    #[value(name = "mm")]
    Mm,
}

impl Units {
    /// Factor taking a configured length to metres.
    pub fn to_metres(self) -> f64 {
        match self {
            Units::M => 1.0,
            Units::Mm => 1e-3,
        }
    }
}

impl fmt::Display for Units {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Units::M => "m",
            Units::Mm => "mm",
        })
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawConfig {
    #[serde(default)]
    pub _comment: Option<serde::de::IgnoredAny>,
    pub schema: Option<u32>,
    pub units: Option<Units>,
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    pub load_kg: Option<f64>,
    #[serde(default)]
    pub foot: RawFoot,
    #[serde(default)]
    pub rigid: RawRigid,
    #[serde(default)]
    pub compliant: RawCompliant,
    #[serde(default)]
    pub sweep: RawSweep,
    #[serde(default)]
    pub terrains: Vec<RawTerrain>,
    #[serde(default)]
    pub compliance_map: RawComplianceMap,
    #[serde(default)]
    pub gallery: RawGallery,
    #[serde(default)]
    pub planar: RawPlanar,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
pub enum ScalarOrList {
    Scalar(f64),
    List(Vec<f64>),
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawFoot {
    #[serde(default)]
    pub _comment: Option<serde::de::IgnoredAny>,
    pub n: Option<usize>,
    pub phalanx_length: Option<f64>,
    pub arch_a: Option<f64>,
    pub arch_b: Option<f64>,
    pub alpha_bar: Option<f64>,
    pub beta_bar: Option<f64>,
    pub arch_stiffness: Option<f64>,
    pub joint_stiffness: Option<ScalarOrList>,
    pub pulley_radii: Option<ScalarOrList>,
    pub tendon_length: Option<f64>,
    pub terrain_height: Option<f64>,
    pub pretension_angle: Option<f64>,
    pub load_arm: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawRigid {
    #[serde(default)]
    pub _comment: Option<serde::de::IgnoredAny>,
    pub sole_length: Option<f64>,
    pub leg_height: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawCompliant {
    #[serde(default)]
    pub _comment: Option<serde::de::IgnoredAny>,
    /// Spring stiffness, always in N/m.
    pub spring_stiffness: Option<f64>,
    pub sole_length: Option<f64>,
    pub mass_kg: Option<f64>,
    pub leg_height: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawSweep {
    #[serde(default)]
    pub _comment: Option<serde::de::IgnoredAny>,
    pub models: Option<Vec<FootModel>>,
    pub terrains: Option<Vec<String>>,
    pub load_kg: Option<f64>,
    pub ankle_limit: Option<f64>,
    pub step: Option<f64>,
    pub rigid_range: Option<[f64; 2]>,
    pub compliant_range: Option<[f64; 2]>,
    pub softfoot_range: Option<[f64; 2]>,
    pub softfoot_pretension_angle: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawTerrain {
    #[serde(default)]
    pub _comment: Option<serde::de::IgnoredAny>,
    pub name: String,
    pub kind: TerrainKind,
    pub positions: Vec<f64>,
    pub heights: Vec<f64>,
    pub softfoot_delta: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Spacing {
    Log,
    Linear,
}

#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub min: f64,
    pub max: f64,
    pub count: usize,
    #[serde(default = "default_spacing")]
    pub spacing: Spacing,
}

fn default_spacing() -> Spacing {
    Spacing::Log
}

impl GridSpec {
    pub fn values(&self) -> Vec<f64> {
        match self.spacing {
            Spacing::Log => softfoot::harness::log_grid(self.min, self.max, self.count),
            Spacing::Linear if self.count == 1 => vec![self.min],
            Spacing::Linear => (0..self.count)
                .map(|i| self.min + (self.max - self.min) * i as f64 / (self.count - 1) as f64)
                .collect(),
        }
    }

    fn validate(&self, key: &str) -> Result<()> {
        if self.count == 0 || !(self.min > 0.0 && self.max >= self.min && self.max.is_finite()) {
            bail!("{key}: needs count >= 1 and 0 < min <= max");
        }
        Ok(())
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawComplianceMap {
    #[serde(default)]
    pub _comment: Option<serde::de::IgnoredAny>,
    pub e_bar: Option<GridSpec>,
    pub e0: Option<GridSpec>,
    pub loads_kg: Option<Vec<f64>>,
    pub model: Option<ComplianceModel>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawGallery {
    #[serde(default)]
    pub _comment: Option<serde::de::IgnoredAny>,
    pub loads_kg: Option<Vec<f64>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawRigidScenario {
    pub sole_length: f64,
    pub leg_height: f64,
    pub obstacle_position: f64,
    pub obstacle_height: f64,
    pub ankle_limit: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawCompliantScenario {
    pub spring_stiffness: f64,
    pub sole_length: f64,
    pub mass_kg: f64,
    pub leg_height: f64,
    pub ankle_limit: f64,
    pub com_offset: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawAdaptiveScenario {
    pub sole_length: f64,
    pub load: f64,
    pub com_position: f64,
    pub alpha_1: f64,
    pub alpha_2: f64,
    pub alpha_h: f64,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawPlanar {
    #[serde(default)]
    pub _comment: Option<serde::de::IgnoredAny>,
    pub rigid: Option<Vec<RawRigidScenario>>,
    pub compliant: Option<Vec<RawCompliantScenario>>,
    pub adaptive: Option<Vec<RawAdaptiveScenario>>,
}

#[derive(Clone, Debug)]
pub struct CompliantScenario {
    pub params: CompliantLumpedParams,
    pub ankle_limit: f64,
    pub com_offset: f64,
}

#[derive(Clone, Debug)]
pub struct SweepConfig {
    pub models: Vec<FootModel>,
    pub terrains: Vec<TerrainProfile>,
    pub load: f64,
    pub ankle_limit: f64,
    pub step: f64,
    pub rigid_range: [f64; 2],
    pub compliant_range: [f64; 2],
    pub softfoot_range: [f64; 2],
    pub softfoot_pretension_angle: f64,
}

/// Fully resolved configuration, lengths in metres.
#[derive(Clone, Debug)]
pub struct RunConfig {
    pub out: PathBuf,
    pub load_kg: f64,
    pub foot: SoftFootParams,
    pub rigid: RigidFootParams,
    pub compliant: CompliantLumpedParams,
    pub sweep: SweepConfig,
    pub map_e_bar: Vec<f64>,
    pub map_e0: Vec<f64>,
    pub map_loads_kg: Vec<f64>,
    pub map_model: ComplianceModel,
    pub gallery_loads_kg: Vec<f64>,
    pub rigid_scenarios: Vec<RigidFootScenario>,
    pub compliant_scenarios: Vec<CompliantScenario>,
    pub adaptive_scenarios: Vec<AdaptiveArchParams>,
}

/// Command-line values that take precedence over the file.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub units: Option<Units>,
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    pub load_kg: Option<f64>,
}

/// Records which values came from defaults.
#[derive(Clone, Debug, Default)]
pub struct Provenance {
    pub lines: Vec<String>,
}

impl Provenance {
    fn default_used(&mut self, key: &str, value: impl fmt::Display) {
        let line = format!("default {key} = {value}");
        log::info!("{line}");
        self.lines.push(line);
    }

    fn set(&mut self, key: &str, value: impl fmt::Display, source: &str) {
        let line = format!("{source} {key} = {value}");
        log::debug!("{line}");
        self.lines.push(line);
    }

    pub fn text(&self) -> String {
        let mut s = self.lines.join("\n");
        s.push('\n');
        s
    }
}

fn list(v: &[f64]) -> String {
    let items: Vec<String> = v.iter().map(|x| format!("{x}")).collect();
    format!("[{}]", items.join(", "))
}

pub fn read_raw(path: &Path) -> Result<RawConfig> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading config {}", path.display()))?;
    parse_raw(&text).with_context(|| format!("parsing config {}", path.display()))
}

pub fn parse_raw(text: &str) -> Result<RawConfig> {
    Ok(serde_json::from_str(text)?)
}

struct Resolver<'a> {
    prov: &'a mut Provenance,
    scale: f64,
}

impl Resolver<'_> {
    fn value(&mut self, key: &str, given: Option<f64>, default: f64) -> f64 {
        match given {
            Some(v) => {
                self.prov.set(key, v, "config");
                v
            }
            None => {
                self.prov.default_used(key, default);
                default
            }
        }
    }

    /// A length read in configured units; the default is already in metres.
    fn length(&mut self, key: &str, given: Option<f64>, default_m: f64) -> f64 {
        match given {
            Some(v) => {
                let m = v * self.scale;
                self.prov.set(key, format!("{m} m"), "config");
                m
            }
            None => {
                self.prov.default_used(key, format!("{default_m} m"));
                default_m
            }
        }
    }
}

fn expand(
    key: &str,
    given: Option<&ScalarOrList>,
    len: usize,
    scale: f64,
) -> Result<Option<Vec<f64>>> {
    Ok(match given {
        None => None,
        Some(ScalarOrList::Scalar(v)) => Some(vec![v * scale; len]),
        Some(ScalarOrList::List(v)) => {
            if v.len() != len {
                bail!("{key}: expected {len} entries, found {}", v.len());
            }
            Some(v.iter().map(|x| x * scale).collect())
        }
    })
}

/// Validates `raw` and applies defaults and overrides.
pub fn resolve(raw: RawConfig, overrides: &Overrides) -> Result<(RunConfig, Provenance)> {
    let mut prov = Provenance::default();
    match raw.schema {
        Some(SCHEMA_VERSION) => prov.set("schema", SCHEMA_VERSION, "config"),
        Some(other) => bail!("schema: unsupported version {other} (expected {SCHEMA_VERSION})"),
        None => prov.default_used("schema", SCHEMA_VERSION),
    }
    let units = match (raw.units, overrides.units) {
        (Some(file), Some(flag)) if file != flag => {
            bail!("units: config declares {file} but --units asks for {flag}")
        }
        (Some(u), _) => {
            prov.set("units", u, "config");
            u
        }
        (None, Some(u)) => {
            prov.set("units", u, "flag");
            u
        }
        (None, None) => {
            prov.default_used("units", Units::M);
            Units::M
        }
    };
    let out = match (&overrides.out, raw.out) {
        (Some(p), _) => {
            prov.set("out", p.display(), "flag");
            p.clone()
        }
        (None, Some(p)) => {
            prov.set("out", p.display(), "config");
            p
        }
        (None, None) => {
            prov.default_used("out", "out");
            PathBuf::from("out")
        }
    };
    let seed = overrides.seed.or(raw.seed);
    if let Some(s) = seed {
        prov.set(
            "seed",
            s,
            if overrides.seed.is_some() {
                "flag"
            } else {
                "config"
            },
        );
    }
    let mut r = Resolver {
        prov: &mut prov,
        scale: units.to_metres(),
    };
    let load_kg = match overrides.load_kg {
        Some(v) => {
            r.prov.set("load_kg", v, "flag");
            v
        }
        None => r.value("load_kg", raw.load_kg, 1.5),
    };
    if !(load_kg >= 0.0 && load_kg.is_finite()) {
        bail!("load_kg: must be finite and >= 0");
    }

    let foot = resolve_foot(&mut r, &raw.foot)?;

    let rigid = RigidFootParams {
        sole_length: r.length("rigid.sole_length", raw.rigid.sole_length, 0.219),
        leg_height: r.length("rigid.leg_height", raw.rigid.leg_height, 0.8),
    };
    if !(rigid.sole_length > 0.0 && rigid.leg_height > 0.0) {
        bail!("rigid: sole_length and leg_height must be > 0");
    }

    let compliant_mass = r.value("compliant.mass_kg", raw.compliant.mass_kg, 1.5);
    let compliant = CompliantLumpedParams {
        spring_stiffness: r.value(
            "compliant.spring_stiffness",
            raw.compliant.spring_stiffness,
            500.0,
        ),
        sole_length: r.length("compliant.sole_length", raw.compliant.sole_length, 0.219),
        load: compliant_mass * GRAVITY,
        mass: compliant_mass,
        gravity: GRAVITY,
        leg_height: r.length("compliant.leg_height", raw.compliant.leg_height, 0.8),
    };
    compliant.validate().context("compliant")?;

    let sweep = resolve_sweep(&mut r, &raw.sweep, &raw.terrains, &foot, &rigid, &compliant)?;

    let e_bar = raw.compliance_map.e_bar.clone().unwrap_or_else(|| {
        r.prov
            .default_used("compliance_map.e_bar", "log grid 0.5..16, 20 points");
        GridSpec {
            min: 0.5,
            max: 16.0,
            count: 20,
            spacing: Spacing::Log,
        }
    });
    e_bar.validate("compliance_map.e_bar")?;
    let e0 = raw.compliance_map.e0.clone().unwrap_or_else(|| {
        r.prov
            .default_used("compliance_map.e0", "log grid 0.5..16, 20 points");
        GridSpec {
            min: 0.5,
            max: 16.0,
            count: 20,
            spacing: Spacing::Log,
        }
    });
    e0.validate("compliance_map.e0")?;
    let map_loads_kg = raw.compliance_map.loads_kg.clone().unwrap_or_else(|| {
        r.prov.default_used("compliance_map.loads_kg", "[0, 1.5]");
        vec![0.0, 1.5]
    });
    if map_loads_kg.is_empty() || map_loads_kg.iter().any(|v| !(*v >= 0.0 && v.is_finite())) {
        bail!("compliance_map.loads_kg: needs at least one finite load >= 0");
    }
    let map_model = raw.compliance_map.model.unwrap_or_else(|| {
        r.prov.default_used("compliance_map.model", "nonlinear");
        ComplianceModel::Nonlinear
    });

    let gallery_loads_kg = raw.gallery.loads_kg.clone().unwrap_or_else(|| {
        let v = vec![0.0, 5.0, 10.0, 15.0, 20.0, 25.0, 30.0, 40.0, 50.0, 60.0];
        r.prov.default_used("gallery.loads_kg", list(&v));
        v
    });

    let (rigid_scenarios, compliant_scenarios, adaptive_scenarios) =
        resolve_planar(&mut r, &raw.planar)?;

    Ok((
        RunConfig {
            out,
            load_kg,
            foot,
            rigid,
            compliant,
            sweep,
            map_e_bar: e_bar.values(),
            map_e0: e0.values(),
            map_loads_kg,
            map_model,
            gallery_loads_kg,
            rigid_scenarios,
            compliant_scenarios,
            adaptive_scenarios,
        },
        prov,
    ))
}

fn resolve_foot(r: &mut Resolver<'_>, raw: &RawFoot) -> Result<SoftFootParams> {
    let nominal = SoftFootParams::nominal();
    let n = match raw.n {
        Some(n) => {
            r.prov.set("foot.n", n, "config");
            n
        }
        None => {
            r.prov.default_used("foot.n", nominal.n);
            nominal.n
        }
    };
    if n < 1 {
        bail!("foot.n: n ≥ 1");
    }
    let mut p = nominal.clone();
    p.phalanx_length = r.length(
        "foot.phalanx_length",
        raw.phalanx_length,
        nominal.phalanx_length,
    );
    p.alpha_bar = r.value("foot.alpha_bar", raw.alpha_bar, nominal.alpha_bar);
    p.beta_bar = r.value("foot.beta_bar", raw.beta_bar, nominal.beta_bar);
    // re-close the arch over the configured chain before explicit overrides
    let e_bar = nominal.joint_stiffness[0];
    p = p.with_links(n, e_bar);
    p.arch_a = r.length("foot.arch_a", raw.arch_a, p.arch_a);
    p.arch_b = r.length("foot.arch_b", raw.arch_b, p.arch_b);
    p.load_arm = r.length("foot.load_arm", raw.load_arm, p.arch_b);
    p.arch_stiffness = r.value(
        "foot.arch_stiffness",
        raw.arch_stiffness,
        nominal.arch_stiffness,
    );
    match expand(
        "foot.joint_stiffness",
        raw.joint_stiffness.as_ref(),
        n + 2,
        1.0,
    )? {
        Some(v) => {
            r.prov.set("foot.joint_stiffness", list(&v), "config");
            p.joint_stiffness = v;
        }
        None => r
            .prov
            .default_used("foot.joint_stiffness", format!("{e_bar} x {}", n + 2)),
    }
    match expand(
        "foot.pulley_radii",
        raw.pulley_radii.as_ref(),
        n + 3,
        r.scale,
    )? {
        Some(v) => {
            r.prov
                .set("foot.pulley_radii", format!("{} m", list(&v)), "config");
            p.pulley_radii = v;
        }
        None => r.prov.default_used(
            "foot.pulley_radii",
            format!("{} m x {}", p.pulley_radii[0], n + 3),
        ),
    }
    p.tendon_length = r.length("foot.tendon_length", raw.tendon_length, 0.0);
    p.terrain_height = r.length("foot.terrain_height", raw.terrain_height, 0.0);
    p.pretension_angle = r.value("foot.pretension_angle", raw.pretension_angle, p.beta_bar);
    p.validate().map_err(|e| anyhow::anyhow!("foot: {e}"))?;
    Ok(p)
}

fn resolve_sweep(
    r: &mut Resolver<'_>,
    raw: &RawSweep,
    custom: &[RawTerrain],
    foot: &SoftFootParams,
    rigid: &RigidFootParams,
    compliant: &CompliantLumpedParams,
) -> Result<SweepConfig> {
    let models = raw.models.clone().unwrap_or_else(|| {
        r.prov
            .default_used("sweep.models", "[rigid, compliant, softfoot]");
        vec![FootModel::Rigid, FootModel::Compliant, FootModel::Softfoot]
    });
    let toe = foot.joints() as f64 * foot.phalanx_length;
    let mut available = terrain_catalog();
    for (i, t) in available.iter_mut().enumerate() {
        if i > 0 {
            // δ under the configured toe tip
            t.softfoot_delta = t.height_at(toe) - t.height_at(0.0);
        }
    }
    for t in custom {
        let points: Vec<(f64, f64)> = t
            .positions
            .iter()
            .zip(&t.heights)
            .map(|(x, h)| (x * r.scale, h * r.scale))
            .collect();
        if t.positions.len() != t.heights.len() {
            bail!(
                "terrains.{}: positions and heights differ in length",
                t.name
            );
        }
        let mut profile = TerrainProfile::new(&t.name, t.kind, &points, toe)
            .map_err(|e| anyhow::anyhow!("terrains.{}: {e}", t.name))?;
        if let Some(d) = t.softfoot_delta {
            profile.softfoot_delta = d * r.scale;
            profile
                .validate()
                .map_err(|e| anyhow::anyhow!("terrains.{}: {e}", t.name))?;
        }
        r.prov
            .set(&format!("terrains.{}", t.name), "custom profile", "config");
        match available.iter_mut().find(|a| a.name == t.name) {
            Some(slot) => *slot = profile,
            None => available.push(profile),
        }
    }
    let terrains = match &raw.terrains {
        Some(names) => names
            .iter()
            .map(|n| {
                available
                    .iter()
                    .find(|t| &t.name == n)
                    .cloned()
                    .ok_or_else(|| anyhow::anyhow!("sweep.terrains: unknown terrain {n:?}"))
            })
            .collect::<Result<Vec<_>>>()?,
        None => {
            let names: Vec<&str> = available.iter().map(|t| t.name.as_str()).collect();
            r.prov
                .default_used("sweep.terrains", format!("[{}]", names.join(", ")));
            available.clone()
        }
    };
    let load_kg = r.value("sweep.load_kg", raw.load_kg, 1.5);
    let ankle_limit = r.value("sweep.ankle_limit", raw.ankle_limit, 0.35);
    let step = r.length("sweep.step", raw.step, 0.001);
    let range =
        |r: &mut Resolver<'_>, key: &str, given: Option<[f64; 2]>, default: [f64; 2]| match given {
            Some([a, b]) => {
                let v = [a * r.scale, b * r.scale];
                r.prov.set(key, format!("[{}, {}] m", v[0], v[1]), "config");
                v
            }
            None => {
                r.prov
                    .default_used(key, format!("[{}, {}] m", default[0], default[1]));
                default
            }
        };
    let lr = rigid.sole_length;
    let lc = compliant.sole_length;
    let rigid_range = range(r, "sweep.rigid_range", raw.rigid_range, [-0.02, lr + 0.02]);
    let compliant_range = range(
        r,
        "sweep.compliant_range",
        raw.compliant_range,
        [-0.5 * lc - 0.02, 0.5 * lc + 0.02],
    );
    let softfoot_range = range(r, "sweep.softfoot_range", raw.softfoot_range, [-0.02, toe]);
    let softfoot_pretension_angle = r.value(
        "sweep.softfoot_pretension_angle",
        raw.softfoot_pretension_angle,
        0.0,
    );
    let sweep = SweepConfig {
        models,
        terrains,
        load: load_kg * GRAVITY,
        ankle_limit,
        step,
        rigid_range,
        compliant_range,
        softfoot_range,
        softfoot_pretension_angle,
    };
    for spec in crate::commands::sweep_specs(&sweep) {
        spec.validate().map_err(|e| anyhow::anyhow!("sweep: {e}"))?;
    }
    Ok(sweep)
}

type Planar = (
    Vec<RigidFootScenario>,
    Vec<CompliantScenario>,
    Vec<AdaptiveArchParams>,
);

fn resolve_planar(r: &mut Resolver<'_>, raw: &RawPlanar) -> Result<Planar> {
    let s = r.scale;
    let rigid = match &raw.rigid {
        Some(v) => v
            .iter()
            .map(|x| RigidFootScenario {
                sole_length: x.sole_length * s,
                leg_height: x.leg_height * s,
                obstacle_position: x.obstacle_position * s,
                obstacle_height: x.obstacle_height * s,
                ankle_limit: x.ankle_limit,
            })
            .collect(),
        None => {
            r.prov.default_used(
                "planar.rigid",
                "one 0.219 m sole over a 0.01 m obstacle at 0.11 m",
            );
            vec![RigidFootScenario {
                sole_length: 0.219,
                leg_height: 0.8,
                obstacle_position: 0.11,
                obstacle_height: 0.01,
                ankle_limit: 0.35,
            }]
        }
    };
    for (i, sc) in rigid.iter().enumerate() {
        sc.validate()
            .map_err(|e| anyhow::anyhow!("planar.rigid[{i}]: {e}"))?;
    }
    let compliant = match &raw.compliant {
        Some(v) => v
            .iter()
            .map(|x| CompliantScenario {
                params: CompliantLumpedParams {
                    spring_stiffness: x.spring_stiffness,
                    sole_length: x.sole_length * s,
                    load: x.mass_kg * GRAVITY,
                    mass: x.mass_kg,
                    gravity: GRAVITY,
                    leg_height: x.leg_height * s,
                },
                ankle_limit: x.ankle_limit,
                com_offset: x.com_offset * s,
            })
            .collect(),
        None => {
            r.prov.default_used(
                "planar.compliant",
                "k = 500 N/m, 0.219 m sole, 1.5 kg, COM 0.05 m forward",
            );
            vec![CompliantScenario {
                params: CompliantLumpedParams {
                    spring_stiffness: 500.0,
                    sole_length: 0.219,
                    load: 1.5 * GRAVITY,
                    mass: 1.5,
                    gravity: GRAVITY,
                    leg_height: 0.8,
                },
                ankle_limit: 0.35,
                com_offset: 0.05,
            }]
        }
    };
    for (i, sc) in compliant.iter().enumerate() {
        sc.params
            .validate()
            .map_err(|e| anyhow::anyhow!("planar.compliant[{i}]: {e}"))?;
        if !(sc.ankle_limit > 0.0) {
            bail!("planar.compliant[{i}]: ankle_limit must be > 0");
        }
    }
    let adaptive = match &raw.adaptive {
        Some(v) => v
            .iter()
            .map(|x| AdaptiveArchParams {
                sole_length: x.sole_length * s,
                load: x.load,
                com_position: x.com_position * s,
                alpha_1: x.alpha_1,
                alpha_2: x.alpha_2,
                alpha_h: x.alpha_h,
            })
            .collect(),
        None => {
            r.prov.default_used(
                "planar.adaptive",
                "0.2 m sole, 14.715 N at 0.15 m, angles 0.3/0.4/0.5 rad",
            );
            vec![AdaptiveArchParams {
                sole_length: 0.2,
                load: 1.5 * GRAVITY,
                com_position: 0.15,
                alpha_1: 0.3,
                alpha_2: 0.4,
                alpha_h: 0.5,
            }]
        }
    };
    for (i, sc) in adaptive.iter().enumerate() {
        sc.validate()
            .map_err(|e| anyhow::anyhow!("planar.adaptive[{i}]: {e}"))?;
    }
    Ok((rigid, compliant, adaptive))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn resolve_text(text: &str) -> Result<(RunConfig, Provenance)> {
        resolve(parse_raw(text)?, &Overrides::default())
    }

    #[test]
    fn empty_config_is_all_defaults() {
        let (cfg, prov) = resolve_text("{}").unwrap();
        assert_eq!(cfg.foot, SoftFootParams::nominal());
        assert!(prov.lines.iter().all(|l| l.starts_with("default ")));
        for key in [
            "schema",
            "units",
            "foot.n",
            "foot.pretension_angle",
            "sweep.models",
            "gallery.loads_kg",
        ] {
            assert!(
                prov.lines
                    .iter()
                    .any(|l| l.starts_with(&format!("default {key} "))),
                "{key}"
            );
        }
    }

    #[test]
    fn zero_links_rejected() {
        let err = resolve_text(r#"{"schema": 1, "foot": {"n": 0}}"#).unwrap_err();
        assert!(format!("{err:#}").contains("n ≥ 1"));
    }

    #[test]
    fn millimetre_lengths() {
        let (cfg, _) =
            resolve_text(r#"{"schema": 1, "units": "mm", "foot": {"phalanx_length": 20}}"#)
                .unwrap();
        assert!((cfg.foot.phalanx_length - 0.02).abs() < 1e-15);
        assert!((cfg.foot.phalanx_length / Units::Mm.to_metres() - 20.0).abs() < 1e-12);
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(resolve_text(r#"{"schema": 1, "fooot": {}}"#).is_err());
        assert!(resolve_text(r#"{"schema": 1, "foot": {"m": 3}}"#).is_err());
        assert!(resolve_text(r#"{"schema": 2}"#).is_err());
    }

    #[test]
    fn unit_mismatch_is_an_error() {
        let raw = parse_raw(r#"{"units": "mm"}"#).unwrap();
        let o = Overrides {
            units: Some(Units::M),
            ..Overrides::default()
        };
        assert!(resolve(raw, &o).is_err());
    }

    #[test]
    fn flags_override_file() {
        let raw = parse_raw(r#"{"out": "a", "load_kg": 3}"#).unwrap();
        let o = Overrides {
            out: Some("b".into()),
            load_kg: Some(7.0),
            ..Overrides::default()
        };
        let (cfg, _) = resolve(raw, &o).unwrap();
        assert_eq!(cfg.out, PathBuf::from("b"));
        assert_eq!(cfg.load_kg, 7.0);
    }

    #[test]
    fn custom_links_close_the_arch() {
        let (cfg, _) = resolve_text(r#"{"foot": {"n": 4, "joint_stiffness": 3}}"#).unwrap();
        assert_eq!(cfg.foot.joint_stiffness, vec![3.0; 6]);
        assert_eq!(cfg.foot.pulley_radii.len(), 7);
        assert!((cfg.foot.arch_span() - 0.08).abs() < 1e-15);
        assert!(resolve_text(r#"{"foot": {"n": 4, "joint_stiffness": [1, 2]}}"#).is_err());
    }

    #[test]
    fn unknown_terrain_rejected() {
        assert!(resolve_text(r#"{"sweep": {"terrains": ["moon"]}}"#).is_err());
        let (cfg, _) = resolve_text(
            r#"{"units": "mm", "terrains": [{"name": "moon", "kind": "bump", "positions": [0, 50, 100], "heights": [0, 5, 0]}],
                "sweep": {"terrains": ["moon", "flat"]}}"#,
        )
        .unwrap();
        assert_eq!(cfg.sweep.terrains[0].positions, vec![0.0, 0.05, 0.1]);
        assert_eq!(cfg.sweep.terrains[1].name, "flat");
    }
}
