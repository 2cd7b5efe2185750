//! Metric-space abstraction over spatial locations: Euclidean and spherical
//! (great-circle) distances, pairwise distance matrices, and coordinate
//! preprocessing.

use ndarray::{Array2, ArrayView1, ArrayView2};
use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::Result;

/// Mean Earth radius in kilometers, the default sphere radius for
/// great-circle distances when none is configured.
pub const EARTH_RADIUS_KM: f64 = 6371.0088;

/// Angular unit of stored coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum AngularUnit {
    /// Coordinates are plain lengths (Euclidean use).
    None,
    /// Coordinates are (latitude, longitude) in radians.
    Radians,
}

/// Ground metric for locations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Metric {
    Euclidean,
    /// Great-circle distance on a sphere of the given radius. Locations must
    /// be (latitude, longitude) pairs in radians.
    Haversine { radius: f64 },
}

impl Metric {
    /// Spherical metric with the mean Earth radius in kilometers.
    pub fn earth() -> Self {
        Metric::Haversine {
            radius: EARTH_RADIUS_KM,
        }
    }

    pub fn haversine(radius: f64) -> Result<Self> {
        if !(radius > 0.0) || !radius.is_finite() {
            return Err(Error::InvalidMetric(format!(
                "sphere radius must be positive and finite, got {radius}"
            )));
        }
        Ok(Metric::Haversine { radius })
    }

    /// Checks that a location set conforms to this metric (dimension, angular
    /// unit, latitude range).
    pub fn check(&self, set: &LocationSet) -> Result<()> {
        match self {
            Metric::Euclidean => Ok(()),
            Metric::Haversine { radius } => {
                if !(*radius > 0.0) {
                    return Err(Error::InvalidMetric(format!(
                        "sphere radius must be positive, got {radius}"
                    )));
                }
                if set.dim() != 2 {
                    return Err(Error::DimensionMismatch(format!(
                        "great-circle metric needs (lat, lon) pairs, got dim {}",
                        set.dim()
                    )));
                }
                if set.angular_unit != AngularUnit::Radians {
                    return Err(Error::InvalidMetric(
                        "great-circle metric requires coordinates in radians".into(),
                    ));
                }
                let half_pi = std::f64::consts::FRAC_PI_2;
                for row in set.coords.rows() {
                    let lat = row[0];
                    if lat < -half_pi - 1e-12 || lat > half_pi + 1e-12 {
                        return Err(Error::LatitudeOutOfRange(lat));
                    }
                }
                Ok(())
            }
        }
    }
}

/// An immutable collection of spatial locations (count x dim).
#[derive(Debug, Clone, PartialEq)]
pub struct LocationSet {
    coords: Array2<f64>,
    angular_unit: AngularUnit,
}

impl LocationSet {
    /// Euclidean locations (no angular interpretation).
    pub fn euclidean(coords: Array2<f64>) -> Result<Self> {
        Self::new(coords, AngularUnit::None)
    }

    /// (lat, lon) locations in radians.
    pub fn radians(coords: Array2<f64>) -> Result<Self> {
        Self::new(coords, AngularUnit::Radians)
    }

    pub fn new(coords: Array2<f64>, angular_unit: AngularUnit) -> Result<Self> {
        if coords.ncols() == 0 {
            return Err(Error::DimensionMismatch(
                "locations need at least one coordinate".into(),
            ));
        }
        for (i, row) in coords.rows().into_iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                if !v.is_finite() {
                    return Err(Error::NonFinite(format!("location ({i}, {j}) = {v}")));
                }
            }
        }
        Ok(LocationSet {
            coords,
            angular_unit,
        })
    }

    pub fn len(&self) -> usize {
        self.coords.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.coords.nrows() == 0
    }

    pub fn dim(&self) -> usize {
        self.coords.ncols()
    }

    pub fn coords(&self) -> ArrayView2<'_, f64> {
        self.coords.view()
    }

    pub fn angular_unit(&self) -> AngularUnit {
        self.angular_unit
    }

    pub fn row(&self, i: usize) -> ArrayView1<'_, f64> {
        self.coords.row(i)
    }

    /// New set containing the given rows, in order. Panics on out-of-range
    /// indices (internal misuse).
    pub fn select(&self, indices: &[usize]) -> LocationSet {
        let mut out = Array2::zeros((indices.len(), self.dim()));
        for (r, &i) in indices.iter().enumerate() {
            out.row_mut(r).assign(&self.coords.row(i));
        }
        LocationSet {
            coords: out,
            angular_unit: self.angular_unit,
        }
    }

    /// Stacks two sets with the same dimension and unit.
    pub fn concat(&self, other: &LocationSet) -> Result<LocationSet> {
        if self.dim() != other.dim() || self.angular_unit != other.angular_unit {
            return Err(Error::DimensionMismatch(
                "cannot concatenate location sets with different dim or unit".into(),
            ));
        }
        let mut out = Array2::zeros((self.len() + other.len(), self.dim()));
        for (r, row) in self
            .coords
            .rows()
            .into_iter()
            .chain(other.coords.rows())
            .enumerate()
        {
            out.row_mut(r).assign(&row);
        }
        Ok(LocationSet {
            coords: out,
            angular_unit: self.angular_unit,
        })
    }
}

/// Distance between two location rows under the metric.
///
/// Symmetric, nonnegative, and zero iff the points coincide (up to floating
/// tolerance). The great-circle form is `radius * central angle`, computed via
/// the arcsine formula with the argument clamped to [0, 1] so near-antipodal
/// pairs stay in domain.
pub fn distance(metric: &Metric, a: ArrayView1<f64>, b: ArrayView1<f64>) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch(format!(
            "distance between dim {} and dim {}",
            a.len(),
            b.len()
        )));
    }
    for v in a.iter().chain(b.iter()) {
        if !v.is_finite() {
            return Err(Error::NonFinite(format!("distance input {v}")));
        }
    }
    match metric {
        Metric::Euclidean => {
            let mut s = 0.0;
            for (x, y) in a.iter().zip(b.iter()) {
                let d = x - y;
                s += d * d;
            }
            Ok(s.sqrt())
        }
        Metric::Haversine { radius } => {
            if a.len() != 2 {
                return Err(Error::DimensionMismatch(format!(
                    "great-circle metric needs (lat, lon) pairs, got dim {}",
                    a.len()
                )));
            }
            let half_pi = std::f64::consts::FRAC_PI_2;
            for &lat in &[a[0], b[0]] {
                if lat < -half_pi - 1e-12 || lat > half_pi + 1e-12 {
                    return Err(Error::LatitudeOutOfRange(lat));
                }
            }
            Ok(haversine_angle(a[0], a[1], b[0], b[1]) * radius)
        }
    }
}

// central angle between (lat, lon) pairs in radians
fn haversine_angle(lat1: f64, lon1: f64, lat2: f64, lon2: f64) -> f64 {
    let sdlat = ((lat2 - lat1) / 2.0).sin();
    let sdlon = ((lon2 - lon1) / 2.0).sin();
    let h = sdlat * sdlat + lat1.cos() * lat2.cos() * sdlon * sdlon;
    2.0 * h.sqrt().clamp(0.0, 1.0).asin()
}

/// Pairwise distance matrix (|A| x |B|). Entry (i, j) equals
/// `distance(metric, A_i, B_j)`.
pub fn pairwise_distances(metric: &Metric, a: &LocationSet, b: &LocationSet) -> Result<Array2<f64>> {
    metric.check(a)?;
    metric.check(b)?;
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch(format!(
            "pairwise distances between dim {} and dim {}",
            a.dim(),
            b.dim()
        )));
    }
    let mut out = Array2::zeros((a.len(), b.len()));
    for i in 0..a.len() {
        let ra = a.row(i);
        for j in 0..b.len() {
            out[[i, j]] = distance(metric, ra, b.row(j))?;
        }
    }
    Ok(out)
}

/// Elementwise degrees-to-radians conversion.
pub fn degrees_to_radians(coords: &ArrayView2<f64>) -> Result<Array2<f64>> {
    for (i, row) in coords.rows().into_iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            if !v.is_finite() {
                return Err(Error::NonFinite(format!("coordinate ({i}, {j}) = {v}")));
            }
        }
    }
    Ok(coords.mapv(|v| v * std::f64::consts::PI / 180.0))
}
