//! Experiment configuration: a single TOML document naming a flow, a
//! material surface, the integrals to track, and the time grid. Parsing and
//! validation are separate stages so every rejection can name the offending
//! field; nothing is computed until a config has passed validation.

use serde::{Deserialize, Serialize};
use toml::Table;

use crate::advect::{build_mesh, builder_names, SurfaceMesh};
use crate::error::{Error, Result};
use crate::flows;
use crate::integrals::IntegralSpec;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub flow: FlowSection,
    pub surface: SurfaceSection,
    pub integrals: Vec<IntegralSection>,
    pub grid: GridSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub refinement: Option<RefinementSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<OutputSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerances: Option<ToleranceSection>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FlowSection {
    pub name: String,
    #[serde(default, skip_serializing_if = "Table::is_empty")]
    pub params: Table,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SurfaceSection {
    pub builder: String,
    #[serde(default, skip_serializing_if = "Table::is_empty")]
    pub params: Table,
    /// Offset added to the built mesh, so one surface shape can be reused
    /// across placements without editing builder params.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub placement: Option<Vec<f64>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntegralSection {
    pub kind: String,
    /// Weight function (or weight pair, for the odd entropy circulation).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub f: Option<toml::Value>,
    /// Kind-specific extras; today only `energy_sign` on helicity.
    #[serde(default, skip_serializing_if = "Table::is_empty")]
    pub params: Table,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    #[serde(default)]
    pub t0: f64,
    pub t1: f64,
    pub dt: f64,
    /// Evaluate the integrals every this many advection steps.
    #[serde(default = "default_sample_every")]
    pub sample_every: usize,
}

fn default_sample_every() -> usize {
    10
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct RefinementSection {
    /// Step sizes rerun for the dt convergence fit; three or more levels.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub dt_levels: Vec<f64>,
    /// Factors multiplying every `*panels` count in the surface params.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub mesh_levels: Vec<u32>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    #[serde(default = "default_out_dir")]
    pub dir: String,
    #[serde(default = "default_formats")]
    pub formats: Vec<String>,
}

fn default_out_dir() -> String {
    "out".into()
}

fn default_formats() -> Vec<String> {
    vec!["csv".into(), "json".into()]
}

impl Default for OutputSection {
    fn default() -> Self {
        OutputSection {
            dir: default_out_dir(),
            formats: default_formats(),
        }
    }
}

/// Pass/fail thresholds applied to every tracked integral. A report only
/// carries a verdict when at least one threshold is set. Integrals whose
/// initial value sits at the relative floor are judged by drift_abs alone.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct ToleranceSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub drift_abs: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub drift_rel: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub flux_balance: Option<f64>,
}

impl ToleranceSection {
    pub fn is_empty(&self) -> bool {
        self.drift_abs.is_none() && self.drift_rel.is_none() && self.flux_balance.is_none()
    }
}

// ---------------------------------------------------------------------------
// parsing

fn section<T: serde::de::DeserializeOwned>(value: toml::Value, path: &str) -> Result<T> {
    value
        .try_into()
        .map_err(|e: toml::de::Error| Error::config(path, e.message()))
}

/// Parse the config text, naming the section or entry any rejection sits in.
pub fn parse_config(text: &str) -> Result<ExperimentConfig> {
    let root: Table =
        toml::from_str(text).map_err(|e| Error::config("<document>", e.message()))?;
    const SECTIONS: [&str; 7] = [
        "flow",
        "surface",
        "integrals",
        "grid",
        "refinement",
        "output",
        "tolerances",
    ];
    for key in root.keys() {
        if !SECTIONS.contains(&key.as_str()) {
            return Err(Error::config(key, "unknown section"));
        }
    }
    let need = |key: &str| -> Result<toml::Value> {
        root.get(key)
            .cloned()
            .ok_or_else(|| Error::config(key, "required section is missing"))
    };
    let integrals_raw = match need("integrals")? {
        toml::Value::Array(a) => a,
        _ => return Err(Error::config("integrals", "expected an array of tables")),
    };
    let mut integrals = Vec::with_capacity(integrals_raw.len());
    for (i, entry) in integrals_raw.into_iter().enumerate() {
        integrals.push(section(entry, &format!("integrals[{i}]"))?);
    }
    let opt = |key: &str| -> Result<Option<toml::Value>> { Ok(root.get(key).cloned()) };
    Ok(ExperimentConfig {
        flow: section(need("flow")?, "flow")?,
        surface: section(need("surface")?, "surface")?,
        integrals,
        grid: section(need("grid")?, "grid")?,
        refinement: opt("refinement")?
            .map(|v| section(v, "refinement"))
            .transpose()?,
        output: opt("output")?.map(|v| section(v, "output")).transpose()?,
        tolerances: opt("tolerances")?
            .map(|v| section(v, "tolerances"))
            .transpose()?,
    })
}

pub fn parse_config_file(path: &std::path::Path) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path)?;
    parse_config(&text)
}

pub fn to_toml_string(cfg: &ExperimentConfig) -> Result<String> {
    toml::to_string_pretty(cfg).map_err(|e| Error::Serialize(e.to_string()))
}

// ---------------------------------------------------------------------------
// weight-spec key checks
//
// The runtime weight types are internally tagged enums; serde ignores stray
// keys sitting next to a unit variant of such an enum, so the config layer
// polices key sets itself before handing the JSON over.

fn weight_keys(v: &toml::Value, path: &str) -> Result<()> {
    let table = v
        .as_table()
        .ok_or_else(|| Error::config(path, "a weight is a table with a `kind` key"))?;
    let kind = table
        .get("kind")
        .and_then(|k| k.as_str())
        .ok_or_else(|| Error::config(path, "a weight needs a string `kind`"))?;
    let allowed: &[&str] = match kind {
        "const" => &["kind", "value"],
        "identity" => &["kind"],
        "power" => &["kind", "k"],
        other => {
            return Err(Error::config(
                path,
                format!("unknown weight kind `{other}`; use const, identity, or power"),
            ))
        }
    };
    for key in table.keys() {
        if !allowed.contains(&key.as_str()) {
            return Err(Error::config(
                &format!("{path}.{key}"),
                format!("unknown key for a `{kind}` weight"),
            ));
        }
    }
    Ok(())
}

fn entropy_weight_keys(v: &toml::Value, path: &str) -> Result<()> {
    let table = v.as_table().ok_or_else(|| {
        Error::config(path, "expected a table of `of_entropy` / `of_vorticity` weights")
    })?;
    for key in table.keys() {
        match key.as_str() {
            "of_entropy" | "of_vorticity" => {
                weight_keys(&table[key], &format!("{path}.{key}"))?
            }
            other => {
                return Err(Error::config(
                    &format!("{path}.{other}"),
                    "unknown key; the odd entropy weight takes of_entropy and of_vorticity",
                ))
            }
        }
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// validation

const INTEGRAL_KINDS: [&str; 7] = [
    "circulation",
    "helicity",
    "enstrophy",
    "entropy_circ_even",
    "entropy_circ_odd",
    "mass",
    "spanning_constant",
];

fn toml_to_json(v: &toml::Value) -> Result<serde_json::Value> {
    serde_json::to_value(v).map_err(|e| Error::Serialize(e.to_string()))
}

impl IntegralSection {
    /// Assemble the flat JSON object the runtime selector deserializes.
    fn spec_json(&self) -> Result<serde_json::Value> {
        let mut obj = serde_json::Map::new();
        obj.insert("kind".into(), serde_json::Value::String(self.kind.clone()));
        if let Some(f) = &self.f {
            obj.insert("f".into(), toml_to_json(f)?);
        }
        for (k, v) in &self.params {
            obj.insert(k.clone(), toml_to_json(v)?);
        }
        Ok(serde_json::Value::Object(obj))
    }

    fn check(&self, path: &str) -> Result<()> {
        if !INTEGRAL_KINDS.contains(&self.kind.as_str()) {
            return Err(Error::config(
                &format!("{path}.kind"),
                format!(
                    "unknown integral `{}`; available: {}",
                    self.kind,
                    INTEGRAL_KINDS.join(", ")
                ),
            ));
        }
        let takes_weight = matches!(
            self.kind.as_str(),
            "enstrophy" | "entropy_circ_even" | "entropy_circ_odd" | "spanning_constant"
        );
        match (&self.f, takes_weight) {
            (Some(_), false) => {
                return Err(Error::config(
                    &format!("{path}.f"),
                    format!("`{}` takes no weight function", self.kind),
                ))
            }
            (None, true) if matches!(self.kind.as_str(), "enstrophy" | "entropy_circ_even") => {
                return Err(Error::config(
                    &format!("{path}.f"),
                    format!("`{}` needs a weight function", self.kind),
                ))
            }
            _ => {}
        }
        if let Some(f) = &self.f {
            if self.kind == "entropy_circ_odd" {
                entropy_weight_keys(f, &format!("{path}.f"))?;
            } else {
                weight_keys(f, &format!("{path}.f"))?;
            }
        }
        let allowed_params: &[&str] = match self.kind.as_str() {
            "helicity" => &["energy_sign"],
            _ => &[],
        };
        for key in self.params.keys() {
            if !allowed_params.contains(&key.as_str()) {
                return Err(Error::config(
                    &format!("{path}.params.{key}"),
                    format!("unknown parameter for `{}`", self.kind),
                ));
            }
        }
        Ok(())
    }
}

/// Surface/flow/integral parity rules, checked from dimensions alone so a
/// bad combination is rejected before any stepping. The runtime evaluators
/// enforce the same rules again on their own inputs.
fn compatibility(spec: &IntegralSpec, mesh: &SurfaceMesh, flow_dim: usize) -> std::result::Result<(), String> {
    let sdim = mesh.sdim;
    if mesh.adim != flow_dim {
        return Err(format!(
            "surface lives in ambient dimension {}, the flow in {}",
            mesh.adim, flow_dim
        ));
    }
    match spec {
        IntegralSpec::Circulation => {
            if sdim != 1 || !mesh.closed {
                return Err(format!(
                    "circulation needs a closed curve, got a{} {sdim}-surface",
                    if mesh.closed { " closed" } else { "n open" }
                ));
            }
        }
        IntegralSpec::Helicity { .. } => {
            if sdim % 2 != 1 {
                return Err(format!("helicity needs an odd-dimensional surface, got {sdim}"));
            }
            if !mesh.closed && mesh.boundary.is_none() {
                return Err("an open surface needs boundary quadrature for the flux term".into());
            }
        }
        IntegralSpec::Enstrophy { .. } => {
            if sdim % 2 != 0 || sdim == 0 {
                return Err(format!("enstrophy needs an even-dimensional surface, got {sdim}"));
            }
            if flow_dim % 2 != 0 {
                return Err(format!(
                    "the vorticity-scalar weight argument is undefined in odd flow dimension {flow_dim}"
                ));
            }
        }
        IntegralSpec::EntropyCircEven { .. } => {
            if sdim % 2 != 0 || sdim == 0 {
                return Err(format!(
                    "the even entropy circulation needs an even-dimensional surface, got {sdim}"
                ));
            }
            if !mesh.closed && mesh.boundary.is_none() {
                return Err("an open surface needs boundary quadrature for the flux term".into());
            }
        }
        IntegralSpec::EntropyCircOdd { f } => {
            if sdim % 2 != 1 {
                return Err(format!(
                    "the odd entropy circulation needs an odd-dimensional surface, got {sdim}"
                ));
            }
            if f.needs_circ_scalar() && flow_dim % 2 != 1 {
                return Err(format!(
                    "a weight in c/rho needs an odd flow dimension, got {flow_dim}"
                ));
            }
        }
        IntegralSpec::Mass => {
            if sdim != mesh.adim {
                return Err(format!(
                    "mass needs a full-dimensional region, got a {sdim}-surface in dimension {}",
                    mesh.adim
                ));
            }
        }
        IntegralSpec::SpanningConstant { .. } => {
            let closed_bd = mesh.boundary.as_deref().map(|b| b.closed);
            if mesh.closed || closed_bd != Some(true) {
                return Err("a spanning surface is open with a closed boundary".into());
            }
        }
    }
    Ok(())
}

/// A config that has passed every structural and dimensional check, with the
/// parsed integral selectors and the base mesh ready to advect. The flow is
/// still a name: building it may replay a stored solve, which only `run`
/// pays for.
pub struct Prepared {
    pub config: ExperimentConfig,
    pub specs: Vec<IntegralSpec>,
    pub mesh: SurfaceMesh,
    pub flow_params: serde_json::Value,
    pub flow_dim: usize,
    pub steps: usize,
}

impl Prepared {
    pub fn build_flow(&self) -> Result<std::sync::Arc<dyn crate::flows::FlowField>> {
        flows::build(&self.config.flow.name, &self.flow_params)
    }
}

fn check_steps(t0: f64, t1: f64, dt: f64, sample_every: usize, path: &str) -> Result<usize> {
    if !(dt > 0.0) || !(t1 > t0) {
        return Err(Error::config(path, format!("empty time grid [{t0}, {t1}] at dt {dt}")));
    }
    let raw = (t1 - t0) / dt;
    let steps = raw.round() as usize;
    if steps == 0 || (raw - steps as f64).abs() > 1e-9 * raw.max(1.0) {
        return Err(Error::config(
            path,
            format!("dt {dt} does not divide the interval [{t0}, {t1}]"),
        ));
    }
    if steps % sample_every != 0 {
        return Err(Error::config(
            path,
            format!("{steps} steps are not a multiple of the sampling cadence {sample_every}"),
        ));
    }
    Ok(steps)
}

pub fn validate(config: &ExperimentConfig) -> Result<Prepared> {
    if !flows::catalog_names().contains(&config.flow.name.as_str()) {
        return Err(Error::config(
            "flow.name",
            format!(
                "unknown flow `{}`; available: {}",
                config.flow.name,
                flows::catalog_names().join(", ")
            ),
        ));
    }
    if !builder_names().contains(&config.surface.builder.as_str()) {
        return Err(Error::config(
            "surface.builder",
            format!(
                "unknown surface builder `{}`; available: {}",
                config.surface.builder,
                builder_names().join(", ")
            ),
        ));
    }
    if config.integrals.is_empty() {
        return Err(Error::config("integrals", "track at least one integral"));
    }

    let grid = &config.grid;
    if grid.sample_every == 0 {
        return Err(Error::config("grid.sample_every", "cadence must be positive"));
    }
    let steps = check_steps(grid.t0, grid.t1, grid.dt, grid.sample_every, "grid.dt")?;

    if let Some(r) = &config.refinement {
        if r.dt_levels.is_empty() && r.mesh_levels.is_empty() {
            return Err(Error::config("refinement", "set dt_levels or mesh_levels"));
        }
        if !r.dt_levels.is_empty() && r.dt_levels.len() < 3 {
            return Err(Error::config(
                "refinement.dt_levels",
                "an order fit needs at least three levels",
            ));
        }
        if !r.mesh_levels.is_empty() && r.mesh_levels.len() < 3 {
            return Err(Error::config(
                "refinement.mesh_levels",
                "an order fit needs at least three levels",
            ));
        }
        for (i, &dt) in r.dt_levels.iter().enumerate() {
            check_steps(
                grid.t0,
                grid.t1,
                dt,
                grid.sample_every,
                &format!("refinement.dt_levels[{i}]"),
            )?;
        }
        for (i, &m) in r.mesh_levels.iter().enumerate() {
            if m == 0 {
                return Err(Error::config(
                    &format!("refinement.mesh_levels[{i}]"),
                    "a mesh factor must be at least 1",
                ));
            }
        }
    }

    if let Some(out) = &config.output {
        for (i, f) in out.formats.iter().enumerate() {
            if f != "csv" && f != "json" {
                return Err(Error::config(
                    &format!("output.formats[{i}]"),
                    format!("unknown format `{f}`; use csv or json"),
                ));
            }
        }
    }

    let flow_params = {
        let mut obj = serde_json::Map::new();
        for (k, v) in &config.flow.params {
            obj.insert(k.clone(), toml_to_json(v)?);
        }
        serde_json::Value::Object(obj)
    };
    let flow_dim = flows::dim_of(&config.flow.name, &flow_params)
        .map_err(|e| Error::config("flow.params", e.to_string()))?;

    let surface_params = {
        let mut obj = serde_json::Map::new();
        for (k, v) in &config.surface.params {
            obj.insert(k.clone(), toml_to_json(v)?);
        }
        serde_json::Value::Object(obj)
    };
    let mut mesh = build_mesh(&config.surface.builder, &surface_params)
        .map_err(|e| Error::config("surface.params", e.to_string()))?;
    if let Some(offset) = &config.surface.placement {
        mesh.translate(offset)
            .map_err(|e| Error::config("surface.placement", e.to_string()))?;
    }

    let mut specs = Vec::with_capacity(config.integrals.len());
    for (i, entry) in config.integrals.iter().enumerate() {
        let path = format!("integrals[{i}]");
        entry.check(&path)?;
        let spec: IntegralSpec = serde_json::from_value(entry.spec_json()?)
            .map_err(|e| Error::config(&path, e.to_string()))?;
        compatibility(&spec, &mesh, flow_dim)
            .map_err(|msg| Error::config(&format!("{path}.kind"), msg))?;
        specs.push(spec);
    }

    Ok(Prepared {
        config: config.clone(),
        specs,
        mesh,
        flow_params,
        flow_dim,
        steps,
    })
}

/// Surface params with every `*panels` count multiplied by `factor`; the
/// generic knob behind mesh-refinement levels.
pub fn scale_panels(params: &Table, factor: u32) -> Table {
    fn scale_value(v: &toml::Value, key_is_panels: bool, factor: i64) -> toml::Value {
        match v {
            toml::Value::Integer(n) if key_is_panels => toml::Value::Integer(n * factor),
            toml::Value::Table(t) => toml::Value::Table(scale_table(t, factor)),
            toml::Value::Array(a) => toml::Value::Array(
                a.iter().map(|x| scale_value(x, false, factor)).collect(),
            ),
            other => other.clone(),
        }
    }
    fn scale_table(t: &Table, factor: i64) -> Table {
        t.iter()
            .map(|(k, v)| (k.clone(), scale_value(v, k.ends_with("panels"), factor)))
            .collect()
    }
    scale_table(params, factor as i64)
}
