//! Source/target data model, design-matrix helpers, and validation against
//! the fixed-design assumptions.

use ndarray::{Array1, Array2, ArrayView2};
use serde::Serialize;

use crate::error::Error;
use crate::geometry::LocationSet;
use crate::linalg::sym_eigenvalues;
use crate::Result;

/// Scale-free singularity threshold for Gram matrices: treated as singular
/// when min eigenvalue <= threshold * max eigenvalue.
pub const GRAM_SINGULARITY_RATIO: f64 = 1e-10;

/// Fully observed data: locations, covariates, responses.
#[derive(Debug, Clone)]
pub struct SourceDataset {
    pub locations: LocationSet,
    pub covariates: Array2<f64>,
    pub responses: Array1<f64>,
    pub intercept_included: bool,
}

impl SourceDataset {
    pub fn new(
        locations: LocationSet,
        covariates: Array2<f64>,
        responses: Array1<f64>,
        intercept_included: bool,
    ) -> Result<Self> {
        let n = locations.len();
        if n == 0 {
            return Err(Error::EmptySource);
        }
        if covariates.nrows() != n || responses.len() != n {
            return Err(Error::DimensionMismatch(format!(
                "source rows disagree: {} locations, {} covariate rows, {} responses",
                n,
                covariates.nrows(),
                responses.len()
            )));
        }
        if covariates.ncols() == 0 {
            return Err(Error::DimensionMismatch(
                "source needs at least one covariate column".into(),
            ));
        }
        check_finite("source covariates", &covariates.view())?;
        for (i, v) in responses.iter().enumerate() {
            if !v.is_finite() {
                return Err(Error::NonFinite(format!("response {i} = {v}")));
            }
        }
        Ok(SourceDataset {
            locations,
            covariates,
            responses,
            intercept_included,
        })
    }

    pub fn len(&self) -> usize {
        self.locations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn num_covariates(&self) -> usize {
        self.covariates.ncols()
    }

    /// Row subset in the given order (used by subsampling protocols).
    pub fn select(&self, indices: &[usize]) -> SourceDataset {
        let mut x = Array2::zeros((indices.len(), self.covariates.ncols()));
        let mut y = Array1::zeros(indices.len());
        for (r, &i) in indices.iter().enumerate() {
            x.row_mut(r).assign(&self.covariates.row(i));
            y[r] = self.responses[i];
        }
        SourceDataset {
            locations: self.locations.select(indices),
            covariates: x,
            responses: y,
            intercept_included: self.intercept_included,
        }
    }
}

/// Locations and covariates where inference is wanted; responses unobserved.
#[derive(Debug, Clone)]
pub struct TargetSet {
    pub locations: LocationSet,
    pub covariates: Array2<f64>,
}

impl TargetSet {
    pub fn new(locations: LocationSet, covariates: Array2<f64>) -> Result<Self> {
        let m = locations.len();
        if m == 0 {
            return Err(Error::DimensionMismatch("target set is empty".into()));
        }
        if covariates.nrows() != m {
            return Err(Error::DimensionMismatch(format!(
                "target rows disagree: {} locations, {} covariate rows",
                m,
                covariates.nrows()
            )));
        }
        if covariates.ncols() == 0 {
            return Err(Error::DimensionMismatch(
                "target needs at least one covariate column".into(),
            ));
        }
        check_finite("target covariates", &covariates.view())?;
        Ok(TargetSet {
            locations,
            covariates,
        })
    }

    pub fn len(&self) -> usize {
        self.locations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn num_covariates(&self) -> usize {
        self.covariates.ncols()
    }
}

/// Simulation-only ground truth: conditional mean surface, noise variance,
/// and the smallest Lipschitz constant of the mean.
pub struct GroundTruth {
    pub f: Box<dyn Fn(&[f64]) -> f64 + Send + Sync>,
    pub sigma2: f64,
    pub lipschitz_l0: f64,
}

impl GroundTruth {
    /// Conditional mean evaluated at each row of a location set.
    pub fn mean_at(&self, locations: &LocationSet) -> Array1<f64> {
        let coords = locations.coords();
        Array1::from_iter(
            coords
                .rows()
                .into_iter()
                .map(|row| (self.f)(row.as_slice().expect("contiguous row"))),
        )
    }
}

impl std::fmt::Debug for GroundTruth {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("GroundTruth")
            .field("sigma2", &self.sigma2)
            .field("lipschitz_l0", &self.lipschitz_l0)
            .finish()
    }
}

/// Prepends a constant-1 column; the intercept occupies coefficient index 0.
pub fn with_intercept(x: &ArrayView2<f64>) -> Result<Array2<f64>> {
    if x.ncols() == 0 {
        return Err(Error::DimensionMismatch(
            "cannot add intercept to a zero-column matrix".into(),
        ));
    }
    check_finite("design matrix", x)?;
    let mut out = Array2::ones((x.nrows(), x.ncols() + 1));
    for (i, row) in x.rows().into_iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            out[[i, j + 1]] = *v;
        }
    }
    Ok(out)
}

/// One finding from [`validate`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum Finding {
    DimensionMismatch { detail: String },
    NonFinite { detail: String },
    DuplicateSourceLocations { groups: usize, rows: usize },
    NearSingularTargetGram { min_eigenvalue: f64, max_eigenvalue: f64 },
}

/// Report from [`validate`]; empty findings means the pair looks usable.
#[derive(Debug, Clone, Serialize)]
pub struct ValidationReport {
    pub findings: Vec<Finding>,
    /// Smallest eigenvalue of the target Gram matrix X*ᵀX*.
    pub target_gram_min_eigenvalue: f64,
    pub target_gram_max_eigenvalue: f64,
}

impl ValidationReport {
    pub fn is_clean(&self) -> bool {
        self.findings.is_empty()
    }

    /// Whether X*ᵀX* passes the scale-free invertibility check.
    pub fn target_gram_invertible(&self) -> bool {
        self.target_gram_min_eigenvalue > GRAM_SINGULARITY_RATIO * self.target_gram_max_eigenvalue
    }
}

/// Report-only validation of a source/target pair: dimension agreement,
/// finiteness, duplicate source locations, and the spectrum of X*ᵀX*.
/// Never mutates inputs; repeated calls give identical reports.
pub fn validate(source: &SourceDataset, target: &TargetSet) -> ValidationReport {
    let mut findings = Vec::new();

    if source.num_covariates() != target.num_covariates() {
        findings.push(Finding::DimensionMismatch {
            detail: format!(
                "source has {} covariates, target has {}",
                source.num_covariates(),
                target.num_covariates()
            ),
        });
    }
    if source.locations.dim() != target.locations.dim() {
        findings.push(Finding::DimensionMismatch {
            detail: format!(
                "source locations dim {}, target locations dim {}",
                source.locations.dim(),
                target.locations.dim()
            ),
        });
    }

    // constructors enforce finiteness; re-scan so hand-built values are caught
    for (name, m) in [
        ("source covariates", source.covariates.view()),
        ("target covariates", target.covariates.view()),
    ] {
        if m.iter().any(|v| !v.is_finite()) {
            findings.push(Finding::NonFinite {
                detail: name.to_string(),
            });
        }
    }
    if source.responses.iter().any(|v| !v.is_finite()) {
        findings.push(Finding::NonFinite {
            detail: "source responses".to_string(),
        });
    }

    // duplicate source locations: exact coordinate equality
    let (groups, duplicate_rows) = duplicate_groups(&source.locations);
    if duplicate_rows > 0 {
        findings.push(Finding::DuplicateSourceLocations {
            groups,
            rows: duplicate_rows,
        });
    }

    let gram = target.covariates.t().dot(&target.covariates);
    let eigs = sym_eigenvalues(&gram.view());
    let min_eig = *eigs.first().unwrap_or(&0.0);
    let max_eig = *eigs.last().unwrap_or(&0.0);
    if min_eig <= GRAM_SINGULARITY_RATIO * max_eig {
        findings.push(Finding::NearSingularTargetGram {
            min_eigenvalue: min_eig,
            max_eigenvalue: max_eig,
        });
    }

    ValidationReport {
        findings,
        target_gram_min_eigenvalue: min_eig,
        target_gram_max_eigenvalue: max_eig,
    }
}

/// Groups source rows by exact coordinate equality. Returns (number of groups
/// with more than one member, number of rows in such groups beyond the first).
fn duplicate_groups(locations: &LocationSet) -> (usize, usize) {
    use std::collections::HashMap;
    let mut map: HashMap<Vec<u64>, usize> = HashMap::new();
    for row in locations.coords().rows() {
        let key: Vec<u64> = row.iter().map(|v| v.to_bits()).collect();
        *map.entry(key).or_insert(0) += 1;
    }
    let mut groups = 0;
    let mut extra = 0;
    for count in map.values() {
        if *count > 1 {
            groups += 1;
            extra += count - 1;
        }
    }
    (groups, extra)
}

fn check_finite(name: &str, m: &ArrayView2<f64>) -> Result<()> {
    for (i, row) in m.rows().into_iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            if !v.is_finite() {
                return Err(Error::NonFinite(format!("{name} ({i}, {j}) = {v}")));
            }
        }
    }
    Ok(())
}
