//! Geodetic coordinates and the local east/north/up tangent frame.
//!
//! Scenes are sub-kilometre, so an equirectangular projection about the scene
//! origin is used instead of full geodesy.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::Real;

/// Metres per degree of latitude (and of longitude at the equator).
pub const METERS_PER_DEGREE: f64 = 111_320.0;

/// Largest latitude/longitude offset from the origin the flat projection accepts.
pub const MAX_DELTA_DEG: f64 = 1.0;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeoError {
    #[error("{field} = {value} is out of range")]
    OutOfRange { field: &'static str, value: f64 },
    #[error("point is {delta_deg}° from the origin along {axis}; scene too large for a flat projection")]
    SceneTooLarge { axis: &'static str, delta_deg: f64 },
    #[error("non-finite coordinate in {field}")]
    NonFinite { field: &'static str },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeoPoint<T> {
    pub lat_deg: T,
    pub lon_deg: T,
    pub alt_m: T,
}

impl<T: Real> GeoPoint<T> {
    pub fn new(lat_deg: T, lon_deg: T, alt_m: T) -> Result<Self, GeoError> {
        let p = Self { lat_deg, lon_deg, alt_m };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<(), GeoError> {
        let check = |field, v: T, lo: f64, hi: f64| {
            if !v.is_finite() {
                Err(GeoError::NonFinite { field })
            } else if v < T::lit(lo) || v > T::lit(hi) {
                Err(GeoError::OutOfRange { field, value: v.as_f64() })
            } else {
                Ok(())
            }
        };
        check("lat_deg", self.lat_deg, -90.0, 90.0)?;
        check("lon_deg", self.lon_deg, -180.0, 180.0)?;
        check("alt_m", self.alt_m, 0.0, f64::MAX)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnuPoint<T> {
    pub east_m: T,
    pub north_m: T,
    pub up_m: T,
}

impl<T: Real> EnuPoint<T> {
    pub fn new(east_m: T, north_m: T, up_m: T) -> Self {
        Self { east_m, north_m, up_m }
    }

    pub fn origin() -> Self {
        Self::new(T::zero(), T::zero(), T::zero())
    }

    pub fn is_finite(&self) -> bool {
        self.east_m.is_finite() && self.north_m.is_finite() && self.up_m.is_finite()
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self::new(self.east_m - other.east_m, self.north_m - other.north_m, self.up_m - other.up_m)
    }

    pub fn add(&self, other: &Self) -> Self {
        Self::new(self.east_m + other.east_m, self.north_m + other.north_m, self.up_m + other.up_m)
    }

    pub fn scale(&self, k: T) -> Self {
        Self::new(self.east_m * k, self.north_m * k, self.up_m * k)
    }

    pub fn norm_squared(&self) -> T {
        self.east_m * self.east_m + self.north_m * self.north_m + self.up_m * self.up_m
    }

    pub fn distance_squared(&self, other: &Self) -> T {
        self.sub(other).norm_squared()
    }

    /// Straight-line 3D distance.
    pub fn distance(&self, other: &Self) -> T {
        self.distance_squared(other).sqrt()
    }

    /// Horizontal (east/north) distance, ignoring altitude.
    pub fn ground_distance(&self, other: &Self) -> T {
        let d = self.sub(other);
        (d.east_m * d.east_m + d.north_m * d.north_m).sqrt()
    }

    /// Same point projected to `up_m = 0`.
    pub fn on_ground(&self) -> Self {
        Self::new(self.east_m, self.north_m, T::zero())
    }
}

fn meters_per_deg_lon<T: Real>(origin: &GeoPoint<T>) -> T {
    T::lit(METERS_PER_DEGREE) * origin.lat_deg.to_radians().cos()
}

/// Projects `p` into the ENU frame anchored at `origin`.
pub fn to_enu<T: Real>(origin: &GeoPoint<T>, p: &GeoPoint<T>) -> Result<EnuPoint<T>, GeoError> {
    let dlat = p.lat_deg - origin.lat_deg;
    let dlon = p.lon_deg - origin.lon_deg;
    if !dlat.is_finite() || !dlon.is_finite() {
        return Err(GeoError::NonFinite { field: "lat_deg/lon_deg" });
    }
    if dlat.abs() >= T::lit(MAX_DELTA_DEG) {
        return Err(GeoError::SceneTooLarge { axis: "latitude", delta_deg: dlat.as_f64() });
    }
    if dlon.abs() >= T::lit(MAX_DELTA_DEG) {
        return Err(GeoError::SceneTooLarge { axis: "longitude", delta_deg: dlon.as_f64() });
    }
    Ok(EnuPoint::new(
        dlon * meters_per_deg_lon(origin),
        dlat * T::lit(METERS_PER_DEGREE),
        p.alt_m - origin.alt_m,
    ))
}

/// Inverse of [`to_enu`].
pub fn from_enu<T: Real>(origin: &GeoPoint<T>, e: &EnuPoint<T>) -> Result<GeoPoint<T>, GeoError> {
    if !e.is_finite() {
        return Err(GeoError::NonFinite { field: "enu" });
    }
    let dlat = e.north_m / T::lit(METERS_PER_DEGREE);
    let per_lon = meters_per_deg_lon(origin);
    let dlon = e.east_m / per_lon;
    if !dlon.is_finite() || dlon.abs() >= T::lit(MAX_DELTA_DEG) {
        return Err(GeoError::SceneTooLarge { axis: "longitude", delta_deg: dlon.as_f64() });
    }
    if dlat.abs() >= T::lit(MAX_DELTA_DEG) {
        return Err(GeoError::SceneTooLarge { axis: "latitude", delta_deg: dlat.as_f64() });
    }
    Ok(GeoPoint {
        lat_deg: origin.lat_deg + dlat,
        lon_deg: origin.lon_deg + dlon,
        alt_m: origin.alt_m + e.up_m,
    })
}
