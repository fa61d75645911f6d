//! Core models and algorithms for remote assessment of a hazardous incident
//! scene.
//!
//! The crate is organised bottom-up:
//!
//! - [`geo`]: geodetic points and the local east/north/up frame.
//! - [`scene`]: deterministic ground truth (hazard fields, objects, terrain).
//! - [`survey`]: grid discretisation, greedy multi-agent coverage routes and
//!   ground-vehicle paths over the terrain cost map.
//! - [`swarm`]: discrete-time simulation of aerial vehicles and their sensors.
//! - [`protocol`]: the JSON message envelope and its canonical encoding.
//! - [`inference`]: exact posterior over threat categories and substances.
//! - [`retrieval`]: TF-IDF ranking of response documentation.
//!
//! The numeric modules are generic over [`Real`]; the aliases at the crate
//! root fix the scalar to `f64`, which is what the simulator and hub use.

pub mod geo;
pub mod inference;
pub mod protocol;
pub mod retrieval;
pub mod scenario;
pub mod scene;
pub mod survey;
pub mod swarm;

mod scalar;

pub use scalar::Real;

pub type GeoPoint = geo::GeoPoint<f64>;
pub type EnuPoint = geo::EnuPoint<f64>;

pub type HazardSource = scene::HazardSource<f64>;
pub type GroundObject = scene::GroundObject<f64>;
pub type TerrainGrid = scene::TerrainGrid<f64>;
pub type SceneConfig = scene::SceneConfig<f64>;
pub type Scene = scene::Scene<f64>;

pub type SurveyRegion = survey::SurveyRegion<f64>;
pub type GridPoint = survey::GridPoint<f64>;
pub type RoutePlan = survey::RoutePlan<f64>;
pub type GroundPath = survey::GroundPath<f64>;

pub type ThreatModel = inference::ThreatModel<f64>;
pub type Belief = inference::Belief<f64>;
pub type BeliefState = inference::BeliefState<f64>;

pub type Index = retrieval::Index<f64>;
pub type SynonymSet = retrieval::SynonymSet<f64>;
pub type WeightedQuery = retrieval::WeightedQuery<f64>;
pub type RankedDoc = retrieval::RankedDoc<f64>;
