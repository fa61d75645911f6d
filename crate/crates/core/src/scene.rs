//! Deterministic ground truth for an incident scene.
//!
//! The hazard fields are a stand-in physical model: an inverse-square falloff
//! clamped at [`MIN_DISTANCE_M`], summed over sources. There is no plume,
//! wind or decay. Noise is added by the simulated sensors, never here.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geo::{self, EnuPoint, GeoError, GeoPoint};
use crate::Real;

/// Inverse-square clamp radius.
pub const MIN_DISTANCE_M: f64 = 1.0;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SceneError {
    #[error("invalid scene config: `{field}`: {reason}")]
    Invalid { field: String, reason: String },
    #[error("point ({east_m}, {north_m}) lies outside the terrain grid")]
    OutOfBounds { east_m: f64, north_m: f64 },
    #[error(transparent)]
    Geo(#[from] GeoError),
}

fn invalid(field: impl Into<String>, reason: impl Into<String>) -> SceneError {
    SceneError::Invalid { field: field.into(), reason: reason.into() }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HazardKind {
    Radiological,
    Chemical,
    Biological,
}

impl HazardKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            HazardKind::Radiological => "radiological",
            HazardKind::Chemical => "chemical",
            HazardKind::Biological => "biological",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HazardSource<T> {
    pub kind: HazardKind,
    pub position: EnuPoint<T>,
    /// µSv·m²/h for radiological sources, concentration·m² for chemical,
    /// dimensionless for biological.
    pub strength: T,
    pub substance_id: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundObject<T> {
    pub id: u32,
    pub class_label: String,
    pub position: EnuPoint<T>,
    pub radius_m: T,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubstanceEntry {
    pub id: String,
    pub kind: HazardKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TerrainClass {
    Road,
    Grass,
    Water,
    Rail,
    Rubble,
}

impl TerrainClass {
    /// Single-letter code used in scenario terrain rows.
    pub fn from_code(c: char) -> Option<Self> {
        match c.to_ascii_uppercase() {
            'R' => Some(TerrainClass::Road),
            'G' => Some(TerrainClass::Grass),
            'W' => Some(TerrainClass::Water),
            'T' => Some(TerrainClass::Rail),
            'X' => Some(TerrainClass::Rubble),
            _ => None,
        }
    }
}

/// Per-class traversal costs. Water is always impassable.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassCosts<T> {
    pub road: T,
    pub grass: T,
    pub rail: T,
    pub rubble: T,
}

impl<T: Real> Default for ClassCosts<T> {
    fn default() -> Self {
        Self { road: T::lit(1.0), grass: T::lit(2.0), rail: T::lit(3.0), rubble: T::lit(5.0) }
    }
}

impl<T: Real> ClassCosts<T> {
    pub fn cost(&self, class: TerrainClass) -> Option<T> {
        match class {
            TerrainClass::Road => Some(self.road),
            TerrainClass::Grass => Some(self.grass),
            TerrainClass::Rail => Some(self.rail),
            TerrainClass::Rubble => Some(self.rubble),
            TerrainClass::Water => None,
        }
    }
}

/// Terrain as written in a scenario file.
///
/// `rows[0]` is the southernmost row; within a row, characters run west to
/// east. Codes: `R` road, `G` grass, `W` water, `T` rail, `X` rubble.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(deserialize = "T: Real"))]
pub struct TerrainSpec<T> {
    /// South-west corner of cell (0, 0).
    pub origin: GeoPoint<T>,
    pub cell_size_m: T,
    pub width_cells: usize,
    pub height_cells: usize,
    pub rows: Vec<String>,
    #[serde(default)]
    pub class_costs: ClassCosts<T>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TerrainCell<T> {
    pub class: TerrainClass,
    /// `None` is the impassable sentinel.
    pub cost: Option<T>,
}

impl<T: Real> TerrainCell<T> {
    pub fn passable(&self) -> bool {
        self.cost.is_some()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Cell {
    pub row: usize,
    pub col: usize,
}

impl Cell {
    pub fn new(row: usize, col: usize) -> Self {
        Self { row, col }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TerrainGrid<T> {
    pub origin: GeoPoint<T>,
    /// Position of the grid's south-west corner in the scene frame.
    pub offset: EnuPoint<T>,
    pub cell_size_m: T,
    pub width_cells: usize,
    pub height_cells: usize,
    cells: Vec<TerrainCell<T>>,
}

impl<T: Real> TerrainGrid<T> {
    /// Builds a grid from row-major cells (row 0 first). The grid's corner
    /// sits at the origin of its own frame.
    pub fn from_cells(
        origin: GeoPoint<T>,
        cell_size_m: T,
        width_cells: usize,
        height_cells: usize,
        cells: Vec<TerrainCell<T>>,
    ) -> Result<Self, SceneError> {
        if width_cells == 0 {
            return Err(invalid("terrain.width_cells", "must be at least 1"));
        }
        if height_cells == 0 {
            return Err(invalid("terrain.height_cells", "must be at least 1"));
        }
        if !(cell_size_m > T::zero()) || !cell_size_m.is_finite() {
            return Err(invalid("terrain.cell_size_m", "must be positive"));
        }
        if cells.len() != width_cells * height_cells {
            return Err(invalid(
                "terrain.cells",
                format!("expected {} cells, got {}", width_cells * height_cells, cells.len()),
            ));
        }
        for (i, cell) in cells.iter().enumerate() {
            match (cell.class, cell.cost) {
                (TerrainClass::Water, Some(_)) => {
                    return Err(invalid(format!("terrain.cells[{i}]"), "water must be impassable"))
                }
                (_, Some(c)) if !(c > T::zero()) || !c.is_finite() => {
                    return Err(invalid(format!("terrain.cells[{i}].cost"), "must be positive"))
                }
                _ => {}
            }
        }
        Ok(Self { origin, offset: EnuPoint::origin(), cell_size_m, width_cells, height_cells, cells })
    }

    pub fn from_spec(spec: &TerrainSpec<T>) -> Result<Self, SceneError> {
        if spec.rows.len() != spec.height_cells {
            return Err(invalid(
                "terrain.rows",
                format!("expected {} rows, got {}", spec.height_cells, spec.rows.len()),
            ));
        }
        for (name, c) in [
            ("road", spec.class_costs.road),
            ("grass", spec.class_costs.grass),
            ("rail", spec.class_costs.rail),
            ("rubble", spec.class_costs.rubble),
        ] {
            if !(c > T::zero()) || !c.is_finite() {
                return Err(invalid(format!("terrain.class_costs.{name}"), "must be positive"));
            }
        }
        let mut cells = Vec::with_capacity(spec.width_cells * spec.height_cells);
        for (r, row) in spec.rows.iter().enumerate() {
            let chars: Vec<char> = row.chars().collect();
            if chars.len() != spec.width_cells {
                return Err(invalid(
                    format!("terrain.rows[{r}]"),
                    format!("expected {} cells, got {}", spec.width_cells, chars.len()),
                ));
            }
            for (c, ch) in chars.into_iter().enumerate() {
                let class = TerrainClass::from_code(ch).ok_or_else(|| {
                    invalid(format!("terrain.rows[{r}][{c}]"), format!("unknown terrain code {ch:?}"))
                })?;
                cells.push(TerrainCell { class, cost: spec.class_costs.cost(class) });
            }
        }
        spec.origin.validate()?;
        Self::from_cells(spec.origin, spec.cell_size_m, spec.width_cells, spec.height_cells, cells)
    }

    pub fn in_bounds(&self, cell: Cell) -> bool {
        cell.row < self.height_cells && cell.col < self.width_cells
    }

    pub fn cell(&self, cell: Cell) -> Option<&TerrainCell<T>> {
        if self.in_bounds(cell) {
            self.cells.get(cell.row * self.width_cells + cell.col)
        } else {
            None
        }
    }

    pub fn cells(&self) -> &[TerrainCell<T>] {
        &self.cells
    }

    /// Smallest passable cost, if any cell is passable.
    pub fn min_cost(&self) -> Option<T> {
        self.cells.iter().filter_map(|c| c.cost).fold(None, |acc, c| match acc {
            Some(m) if m <= c => Some(m),
            _ => Some(c),
        })
    }

    /// Containing cell of a scene-frame point, by floor division. A point on
    /// a shared edge belongs to the cell whose lower edge it lies on.
    pub fn locate(&self, p: &EnuPoint<T>) -> Result<Cell, SceneError> {
        let x = (p.east_m - self.offset.east_m) / self.cell_size_m;
        let y = (p.north_m - self.offset.north_m) / self.cell_size_m;
        let oob = || SceneError::OutOfBounds { east_m: p.east_m.as_f64(), north_m: p.north_m.as_f64() };
        if !x.is_finite() || !y.is_finite() || x < T::zero() || y < T::zero() {
            return Err(oob());
        }
        let col = x.floor().to_usize().ok_or_else(oob)?;
        let row = y.floor().to_usize().ok_or_else(oob)?;
        let cell = Cell::new(row, col);
        if self.in_bounds(cell) {
            Ok(cell)
        } else {
            Err(oob())
        }
    }

    /// Scene-frame centre of a cell (ground level).
    pub fn cell_center(&self, cell: Cell) -> EnuPoint<T> {
        let half = T::lit(0.5);
        EnuPoint::new(
            self.offset.east_m + (T::from_usize(cell.col).unwrap() + half) * self.cell_size_m,
            self.offset.north_m + (T::from_usize(cell.row).unwrap() + half) * self.cell_size_m,
            T::zero(),
        )
    }
}

/// Coupling of hazard strength to vegetation damage, per kind.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VegetationCoupling<T> {
    pub radiological: T,
    pub chemical: T,
}

impl<T: Real> Default for VegetationCoupling<T> {
    fn default() -> Self {
        Self { radiological: T::lit(0.05), chemical: T::lit(0.05) }
    }
}

pub fn default_substances() -> Vec<SubstanceEntry> {
    use HazardKind::*;
    [
        ("cs137", Radiological),
        ("co60", Radiological),
        ("am241", Radiological),
        ("chlorine", Chemical),
        ("sarin", Chemical),
        ("ammonia", Chemical),
        ("anthrax", Biological),
        ("ricin", Biological),
    ]
    .into_iter()
    .map(|(id, kind)| SubstanceEntry { id: id.to_string(), kind })
    .collect()
}

pub fn default_object_labels() -> Vec<String> {
    ["barrel", "rail_car", "debris", "casualty_mannequin", "vehicle"].into_iter().map(String::from).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(deserialize = "T: Real"))]
pub struct SceneConfig<T> {
    pub origin: GeoPoint<T>,
    #[serde(default)]
    pub sources: Vec<HazardSource<T>>,
    #[serde(default)]
    pub objects: Vec<GroundObject<T>>,
    pub terrain: TerrainSpec<T>,
    #[serde(rename = "background_dose_uSv_h")]
    pub background_dose_usv_h: T,
    pub rng_seed: u64,
    #[serde(default = "default_substances")]
    pub substances: Vec<SubstanceEntry>,
    #[serde(default = "default_object_labels")]
    pub object_labels: Vec<String>,
    #[serde(default)]
    pub vegetation_coupling: VegetationCoupling<T>,
}

impl<T: Real> SceneConfig<T> {
    /// A scene with no sources or objects over a single grass cell.
    pub fn empty(origin: GeoPoint<T>, background_dose_usv_h: T) -> Self {
        Self {
            origin,
            sources: Vec::new(),
            objects: Vec::new(),
            terrain: TerrainSpec {
                origin,
                cell_size_m: T::lit(10.0),
                width_cells: 1,
                height_cells: 1,
                rows: vec!["G".to_string()],
                class_costs: ClassCosts::default(),
            },
            background_dose_usv_h,
            rng_seed: 0,
            substances: default_substances(),
            object_labels: default_object_labels(),
            vegetation_coupling: VegetationCoupling::default(),
        }
    }

    pub fn validate(&self) -> Result<(), SceneError> {
        self.origin.validate().map_err(|e| invalid("origin", e.to_string()))?;
        if !(self.background_dose_usv_h >= T::zero()) || !self.background_dose_usv_h.is_finite() {
            return Err(invalid("background_dose_uSv_h", "must be finite and non-negative"));
        }
        for (name, k) in [
            ("vegetation_coupling.radiological", self.vegetation_coupling.radiological),
            ("vegetation_coupling.chemical", self.vegetation_coupling.chemical),
        ] {
            if !(k >= T::zero()) || !k.is_finite() {
                return Err(invalid(name, "must be finite and non-negative"));
            }
        }
        let mut catalog = BTreeMap::new();
        for (i, s) in self.substances.iter().enumerate() {
            if catalog.insert(s.id.as_str(), s.kind).is_some() {
                return Err(invalid(format!("substances[{i}].id"), format!("duplicate id {:?}", s.id)));
            }
        }
        for (i, src) in self.sources.iter().enumerate() {
            if !src.position.is_finite() {
                return Err(invalid(format!("sources[{i}].position"), "must be finite"));
            }
            if !(src.strength > T::zero()) || !src.strength.is_finite() {
                return Err(invalid(format!("sources[{i}].strength"), "must be positive"));
            }
            match catalog.get(src.substance_id.as_str()) {
                None => {
                    return Err(invalid(
                        format!("sources[{i}].substance_id"),
                        format!("{:?} is not in the substance catalog", src.substance_id),
                    ))
                }
                Some(kind) if *kind != src.kind => {
                    return Err(invalid(
                        format!("sources[{i}].substance_id"),
                        format!("{:?} is {} but the source is {}", src.substance_id, kind.as_str(), src.kind.as_str()),
                    ))
                }
                Some(_) => {}
            }
        }
        let labels: BTreeSet<&str> = self.object_labels.iter().map(String::as_str).collect();
        let mut ids = BTreeSet::new();
        for (i, obj) in self.objects.iter().enumerate() {
            if !ids.insert(obj.id) {
                return Err(invalid(format!("objects[{i}].id"), format!("duplicate id {}", obj.id)));
            }
            if !labels.contains(obj.class_label.as_str()) {
                return Err(invalid(
                    format!("objects[{i}].class_label"),
                    format!("{:?} is not a configured label", obj.class_label),
                ));
            }
            if !obj.position.is_finite() {
                return Err(invalid(format!("objects[{i}].position"), "must be finite"));
            }
            if !(obj.radius_m > T::zero()) || !obj.radius_m.is_finite() {
                return Err(invalid(format!("objects[{i}].radius_m"), "must be positive"));
            }
        }
        Ok(())
    }
}

/// Immutable ground truth built from a [`SceneConfig`].
#[derive(Debug, Clone, PartialEq)]
pub struct Scene<T> {
    config: SceneConfig<T>,
    objects: Vec<GroundObject<T>>,
    terrain: TerrainGrid<T>,
}

/// Validates `config` and builds the scene.
pub fn build_scene<T: Real>(config: SceneConfig<T>) -> Result<Scene<T>, SceneError> {
    config.validate()?;
    let mut terrain = TerrainGrid::from_spec(&config.terrain)?;
    terrain.offset = geo::to_enu(&config.origin, &config.terrain.origin)
        .map_err(|e| invalid("terrain.origin", e.to_string()))?;
    let mut objects = config.objects.clone();
    objects.sort_by_key(|o| o.id);
    Ok(Scene { config, objects, terrain })
}

fn inverse_square<T: Real>(strength: T, d2: T) -> T {
    let min2 = T::lit(MIN_DISTANCE_M * MIN_DISTANCE_M);
    strength / if d2 > min2 { d2 } else { min2 }
}

impl<T: Real> Scene<T> {
    pub fn config(&self) -> &SceneConfig<T> {
        &self.config
    }

    pub fn origin(&self) -> &GeoPoint<T> {
        &self.config.origin
    }

    pub fn sources(&self) -> &[HazardSource<T>] {
        &self.config.sources
    }

    /// Objects ordered by id.
    pub fn objects(&self) -> &[GroundObject<T>] {
        &self.objects
    }

    pub fn terrain(&self) -> &TerrainGrid<T> {
        &self.terrain
    }

    pub fn background_dose(&self) -> T {
        self.config.background_dose_usv_h
    }

    /// Dose-rate contribution of a single source, without background.
    pub fn source_contribution(source: &HazardSource<T>, p: &EnuPoint<T>) -> T {
        inverse_square(source.strength, source.position.distance_squared(p))
    }

    /// Dose rate in µSv/h.
    pub fn radiation_at(&self, p: &EnuPoint<T>) -> T {
        self.config
            .sources
            .iter()
            .filter(|s| s.kind == HazardKind::Radiological)
            .fold(self.config.background_dose_usv_h, |acc, s| acc + Self::source_contribution(s, p))
    }

    /// Vegetation damage level in [0, 1].
    pub fn vegetation_damage_at(&self, p: &EnuPoint<T>) -> T {
        let k = &self.config.vegetation_coupling;
        let raw = self.config.sources.iter().fold(T::zero(), |acc, s| {
            let coupling = match s.kind {
                HazardKind::Radiological => k.radiological,
                HazardKind::Chemical => k.chemical,
                HazardKind::Biological => return acc,
            };
            acc + Self::source_contribution(s, p) * coupling
        });
        raw.max(T::zero()).min(T::one())
    }

    /// Objects inside the closed axis-aligned square of side
    /// `2 * half_width_m` centred on `center`, by id.
    pub fn objects_in_footprint(&self, center: &EnuPoint<T>, half_width_m: T) -> Vec<&GroundObject<T>> {
        self.objects
            .iter()
            .filter(|o| {
                (o.position.east_m - center.east_m).abs() <= half_width_m
                    && (o.position.north_m - center.north_m).abs() <= half_width_m
            })
            .collect()
    }

    pub fn terrain_class_at(&self, p: &EnuPoint<T>) -> Result<(Cell, TerrainCell<T>), SceneError> {
        let cell = self.terrain.locate(p)?;
        Ok((cell, *self.terrain.cell(cell).expect("located cell is in bounds")))
    }
}
