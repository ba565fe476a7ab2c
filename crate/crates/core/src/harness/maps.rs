use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::softfoot::{
    arch_compression, compliance_to_compression, equilibrium_path, foot_shape, ComplianceModel,
    EquilibriumState, FootLoad, FootShape, SoftFootParams,
};

/// Compliance over an `(ē, e₀)` grid for several loads.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplianceMap {
    pub e_bar: Vec<f64>,
    pub e0: Vec<f64>,
    pub loads_kg: Vec<f64>,
    /// Row-major `[load][e0][e_bar]`; `None` where the solve failed.
    pub values: Vec<Option<f64>>,
}

impl ComplianceMap {
    pub fn get(&self, load: usize, e0: usize, e_bar: usize) -> Option<f64> {
        self.values[(load * self.e0.len() + e0) * self.e_bar.len() + e_bar]
    }

    /// `(e_bar, e0, load_kg, compliance)` in storage order.
    pub fn records(&self) -> impl Iterator<Item = (f64, f64, f64, Option<f64>)> + '_ {
        let (ne, nb) = (self.e0.len(), self.e_bar.len());
        self.values.iter().enumerate().map(move |(k, v)| {
            let (load, rest) = (k / (ne * nb), k % (ne * nb));
            (
                self.e_bar[rest % nb],
                self.e0[rest / nb],
                self.loads_kg[load],
                *v,
            )
        })
    }

    /// True when compliance never grows along `ē` in any row of any load;
    /// missing cells break the chain and are skipped.
    pub fn non_increasing_in_e_bar(&self, tolerance: f64) -> bool {
        (0..self.loads_kg.len()).all(|l| {
            (0..self.e0.len()).all(|r| {
                let row: Vec<f64> = (0..self.e_bar.len())
                    .filter_map(|c| self.get(l, r, c))
                    .collect();
                row.windows(2)
                    .all(|w| w[1] <= w[0] + tolerance * w[0].abs().max(f64::MIN_POSITIVE))
            })
        })
    }
}

fn check_grid(name: &'static str, values: &[f64]) -> Result<()> {
    if values.is_empty() || values.iter().any(|v| !(*v > 0.0 && v.is_finite())) {
        return Err(Error::invalid(
            name,
            "grid must be nonempty with finite positive entries",
        ));
    }
    Ok(())
}

/// `template` with uniform sole stiffness `e_bar` and arch stiffness `e0`.
pub fn with_stiffness(template: &SoftFootParams, e_bar: f64, e0: f64) -> SoftFootParams {
    let mut p = template.clone();
    p.arch_stiffness = e0;
    p.joint_stiffness = vec![e_bar; p.n + 2];
    p
}

/// Evaluates the compliance on the Cartesian grid; cells run in parallel
/// and are stored in grid order.
pub fn compliance_map(
    template: &SoftFootParams,
    e_bar: &[f64],
    e0: &[f64],
    loads_kg: &[f64],
    model: ComplianceModel,
) -> Result<ComplianceMap> {
    check_grid("e_bar", e_bar)?;
    check_grid("e0", e0)?;
    if loads_kg.is_empty() {
        return Err(Error::invalid("loads", "need at least one load"));
    }
    let loads = loads_kg
        .iter()
        .map(|kg| FootLoad::from_mass(*kg))
        .collect::<Result<Vec<_>>>()?;
    template.validate()?;
    let cells: Vec<(usize, usize, usize)> = (0..loads.len())
        .flat_map(|l| (0..e0.len()).flat_map(move |r| (0..e_bar.len()).map(move |c| (l, r, c))))
        .collect();
    let values = cells
        .par_iter()
        .map(|&(l, r, c)| {
            let params = with_stiffness(template, e_bar[c], e0[r]);
            compliance_to_compression(&params, &loads[l], None, model).ok()
        })
        .collect();
    Ok(ComplianceMap {
        e_bar: e_bar.to_vec(),
        e0: e0.to_vec(),
        loads_kg: loads_kg.to_vec(),
        values,
    })
}

/// `count` points from `lo` to `hi`, evenly spaced in log scale.
pub fn log_grid(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    if count == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..count)
        .map(|i| (a + (b - a) * i as f64 / (count - 1) as f64).exp())
        .collect()
}

pub struct GalleryEntry {
    pub load_kg: f64,
    pub outcome: Result<(EquilibriumState, FootShape)>,
}

impl GalleryEntry {
    pub fn arch_height(&self) -> Option<f64> {
        self.outcome.as_ref().ok().map(|(_, s)| s.arch_height())
    }
}

pub struct Gallery {
    pub entries: Vec<GalleryEntry>,
    /// Arch height never grows along the load sequence (solved entries).
    pub monotone_compression: bool,
}

impl Gallery {
    /// Fraction of the unloaded arch height removed at each entry.
    pub fn compression_fractions(&self) -> Vec<Option<f64>> {
        let rest = self.entries.first().and_then(|e| e.arch_height());
        self.entries
            .iter()
            .map(|e| match (rest, e.arch_height()) {
                (Some(h0), Some(h)) if h0 > 0.0 => Some((h0 - h) / h0),
                (Some(_), Some(_)) => Some(0.0),
                _ => None,
            })
            .collect()
    }
}

/// Equilibrium shapes along an ascending load sequence.
pub fn configuration_gallery(params: &SoftFootParams, loads_kg: &[f64]) -> Result<Gallery> {
    if loads_kg.iter().any(|kg| !(*kg >= 0.0 && kg.is_finite())) {
        return Err(Error::invalid("loads", "must be finite and >= 0"));
    }
    if loads_kg.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::invalid("loads", "must be ascending"));
    }
    params.validate()?;
    let loads = loads_kg
        .iter()
        .map(|kg| FootLoad::from_mass(*kg))
        .collect::<Result<Vec<_>>>()?;
    let entries: Vec<GalleryEntry> = equilibrium_path(params, &loads)
        .into_iter()
        .zip(loads_kg)
        .map(|(state, kg)| GalleryEntry {
            load_kg: *kg,
            outcome: state.and_then(|s| foot_shape(params, &s.q).map(|shape| (s, shape))),
        })
        .collect();
    let heights: Vec<f64> = entries.iter().filter_map(|e| e.arch_height()).collect();
    let monotone_compression = heights.windows(2).all(|w| w[1] <= w[0] + 1e-12);
    Ok(Gallery {
        entries,
        monotone_compression,
    })
}

/// Compression at `kg` as a fraction of the full flattening stroke.
pub fn compression_fraction(params: &SoftFootParams, kg: f64) -> Result<f64> {
    Ok(arch_compression(params, &FootLoad::from_mass(kg)?)?.fraction())
}
