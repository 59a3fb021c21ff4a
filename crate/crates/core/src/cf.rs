//! Constructible functions on finite models and the Euler-calculus
//! operations on them: pullback, pushforward, the Radon transform, and a
//! checker for the Schapira inversion formula.
//!
//! A finite model is a [`CellDomain`]: a list of open cells, each carrying
//! its dimension. A finite set is the special case where every cell is a
//! point. The Euler characteristic of a union of open cells is the signed
//! count `sum (-1)^dim`, so every integral below is a finite signed sum.

use std::collections::BTreeMap;

use crate::complex::{euler_integral, Complex};
use crate::error::{Error, Result};

/// Open cells of a finite model, identified by index, with their dimensions.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CellDomain {
    dims: Vec<u8>,
}

impl CellDomain {
    /// A finite set of `n` points.
    pub fn points(n: usize) -> Self {
        CellDomain { dims: vec![0; n] }
    }

    pub fn cells(dims: Vec<u8>) -> Self {
        CellDomain { dims }
    }

    /// The open simplices of a complex, in [`Complex::iter`] order.
    pub fn of_complex(k: &Complex) -> Self {
        CellDomain {
            dims: k.iter().map(|s| (s.len() - 1) as u8).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.dims.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dims.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, u8> {
        self.dims.iter()
    }

    /// `chi` of a single open cell.
    pub fn cell_chi(&self, i: usize) -> i64 {
        if self.dims[i].is_multiple_of(2) {
            1
        } else {
            -1
        }
    }
}

/// Integer-valued function on the cells of a [`CellDomain`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConstructibleFunction {
    domain: CellDomain,
    values: Vec<i64>,
}

impl ConstructibleFunction {
    pub fn new(domain: CellDomain, values: Vec<i64>) -> Result<Self> {
        if domain.len() != values.len() {
            return Err(Error::param(format!(
                "domain has {} cells but {} values were given",
                domain.len(),
                values.len()
            )));
        }
        Ok(ConstructibleFunction { domain, values })
    }

    pub fn constant(domain: CellDomain, c: i64) -> Self {
        let n = domain.len();
        ConstructibleFunction { domain, values: vec![c; n] }
    }

    /// Indicator of a single cell.
    pub fn indicator(domain: CellDomain, cell: usize) -> Self {
        let mut values = vec![0; domain.len()];
        values[cell] = 1;
        ConstructibleFunction { domain, values }
    }

    /// `1_K` on the open simplices of `K`.
    pub fn indicator_of_complex(k: &Complex) -> Self {
        let domain = CellDomain::of_complex(k);
        ConstructibleFunction::constant(domain, 1)
    }

    pub fn domain(&self) -> &CellDomain {
        &self.domain
    }

    pub fn values(&self) -> &[i64] {
        &self.values
    }

    pub fn value(&self, cell: usize) -> i64 {
        self.values[cell]
    }

    /// Non-empty level sets, keyed by value.
    pub fn level_sets(&self) -> BTreeMap<i64, Vec<usize>> {
        let mut out: BTreeMap<i64, Vec<usize>> = BTreeMap::new();
        for (i, &v) in self.values.iter().enumerate() {
            out.entry(v).or_default().push(i);
        }
        out
    }

    pub fn integral(&self) -> i64 {
        euler_integral(self)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a * b)
    }

    pub fn scale(&self, c: i64) -> Self {
        ConstructibleFunction {
            domain: self.domain.clone(),
            values: self.values.iter().map(|v| v * c).collect(),
        }
    }

    fn zip_with(&self, other: &Self, op: impl Fn(i64, i64) -> i64) -> Result<Self> {
        if self.domain != other.domain {
            return Err(Error::param("constructible functions live on different domains"));
        }
        Ok(ConstructibleFunction {
            domain: self.domain.clone(),
            values: self.values.iter().zip(&other.values).map(|(&a, &b)| op(a, b)).collect(),
        })
    }
}

/// A cellular map from a finite model onto a finite set of points.
///
/// Each source cell is sent to one target point, so the fibre over a point is
/// a union of open source cells.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FiniteMap {
    source: CellDomain,
    target_len: usize,
    image: Vec<usize>,
}

impl FiniteMap {
    pub fn new(source: CellDomain, target_len: usize, image: Vec<usize>) -> Result<Self> {
        if image.len() != source.len() {
            return Err(Error::param("map must assign a target to every source cell"));
        }
        if let Some(&bad) = image.iter().find(|&&y| y >= target_len) {
            return Err(Error::param(format!("target index {bad} out of range")));
        }
        Ok(FiniteMap {
            source,
            target_len,
            image,
        })
    }

    pub fn identity(n: usize) -> Self {
        FiniteMap {
            source: CellDomain::points(n),
            target_len: n,
            image: (0..n).collect(),
        }
    }

    pub fn source(&self) -> &CellDomain {
        &self.source
    }

    pub fn target_len(&self) -> usize {
        self.target_len
    }

    pub fn image(&self) -> &[usize] {
        &self.image
    }

    /// `g . self`, where `g` starts on this map's target points.
    pub fn then(&self, g: &FiniteMap) -> Result<FiniteMap> {
        if g.source != CellDomain::points(self.target_len) {
            return Err(Error::param("maps do not compose"));
        }
        FiniteMap::new(
            self.source.clone(),
            g.target_len,
            self.image.iter().map(|&y| g.image[y]).collect(),
        )
    }
}

/// Pullback `f^* phi = phi . f`.
pub fn cf_pullback(phi: &ConstructibleFunction, f: &FiniteMap) -> Result<ConstructibleFunction> {
    if phi.domain.len() != f.target_len {
        return Err(Error::param("pullback: function domain is not the map's target"));
    }
    ConstructibleFunction::new(f.source.clone(), f.image.iter().map(|&y| phi.values[y]).collect())
}

/// Pushforward `f_* phi (y) = integral of phi over the fibre f^{-1}(y)`.
pub fn cf_pushforward(phi: &ConstructibleFunction, f: &FiniteMap) -> Result<ConstructibleFunction> {
    if phi.domain != f.source {
        return Err(Error::param("pushforward: function domain is not the map's source"));
    }
    let mut out = vec![0i64; f.target_len];
    for (cell, &y) in f.image.iter().enumerate() {
        out[y] += phi.values[cell] * phi.domain.cell_chi(cell);
    }
    ConstructibleFunction::new(CellDomain::points(f.target_len), out)
}

/// Incidence relation `S` between two finite sets `X` and `Y`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Kernel {
    nx: usize,
    ny: usize,
    incidence: Vec<bool>,
}

impl Kernel {
    pub fn new(nx: usize, ny: usize, incidence: Vec<bool>) -> Result<Self> {
        if incidence.len() != nx * ny {
            return Err(Error::param("incidence matrix must have nx * ny entries"));
        }
        Ok(Kernel { nx, ny, incidence })
    }

    pub fn from_pairs(nx: usize, ny: usize, pairs: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let mut incidence = vec![false; nx * ny];
        for (x, y) in pairs {
            if x >= nx || y >= ny {
                return Err(Error::param(format!("pair ({x}, {y}) out of range")));
            }
            incidence[x * ny + y] = true;
        }
        Ok(Kernel { nx, ny, incidence })
    }

    pub fn diagonal(n: usize) -> Self {
        Kernel::from_pairs(n, n, (0..n).map(|i| (i, i))).expect("in range")
    }

    pub fn full(nx: usize, ny: usize) -> Self {
        Kernel {
            nx,
            ny,
            incidence: vec![true; nx * ny],
        }
    }

    /// Point/line incidence of the Fano plane: points `0..7`, lines `{i, i+1, i+3} mod 7`.
    pub fn fano() -> Self {
        Kernel::from_pairs(7, 7, (0..7).flat_map(|l| [l, (l + 1) % 7, (l + 3) % 7].map(|p| (p, l)))).expect("in range")
    }

    pub fn transpose(&self) -> Self {
        let mut incidence = vec![false; self.nx * self.ny];
        for x in 0..self.nx {
            for y in 0..self.ny {
                incidence[y * self.nx + x] = self.contains(x, y);
            }
        }
        Kernel {
            nx: self.ny,
            ny: self.nx,
            incidence,
        }
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn ny(&self) -> usize {
        self.ny
    }

    pub fn contains(&self, x: usize, y: usize) -> bool {
        self.incidence[x * self.ny + y]
    }

    /// Indicator of `S` on the product `X x Y` (cells indexed `x * ny + y`).
    fn indicator(&self) -> ConstructibleFunction {
        let values = self.incidence.iter().map(|&b| b as i64).collect();
        ConstructibleFunction {
            domain: CellDomain::points(self.nx * self.ny),
            values,
        }
    }

    fn projections(&self) -> (FiniteMap, FiniteMap) {
        let product = CellDomain::points(self.nx * self.ny);
        let to_x = (0..self.nx * self.ny).map(|i| i / self.ny).collect();
        let to_y = (0..self.nx * self.ny).map(|i| i % self.ny).collect();
        (
            FiniteMap::new(product.clone(), self.nx, to_x).expect("in range"),
            FiniteMap::new(product, self.ny, to_y).expect("in range"),
        )
    }
}

/// Radon transform `R_S phi = pi_Y* [(pi_X^* phi) 1_S]` on finite sets.
pub fn radon(phi: &ConstructibleFunction, kernel: &Kernel) -> Result<ConstructibleFunction> {
    if phi.domain != CellDomain::points(kernel.nx) {
        return Err(Error::param("radon: function must live on the kernel's X"));
    }
    let (pi_x, pi_y) = kernel.projections();
    let lifted = cf_pullback(phi, &pi_x)?.mul(&kernel.indicator())?;
    cf_pushforward(&lifted, &pi_y)
}

/// Outcome of [`schapira_check`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SchapiraReport {
    pub chi1: i64,
    pub chi2: i64,
    pub verified: bool,
    /// First pair `(x, x')` whose fibre intersection breaks the hypotheses,
    /// or whose indicator breaks the identity (`x == x'`).
    pub violation: Option<(usize, usize)>,
}

/// Checks the hypotheses of the inversion formula for `S ⊂ X x Y`,
/// `S' ⊂ Y x X` and, when they hold, verifies
/// `R_S' R_S phi = (chi1 - chi2) phi + chi2 (integral phi) 1_X`
/// on every indicator function of a point of `X`.
pub fn schapira_check(s: &Kernel, s_prime: &Kernel) -> Result<SchapiraReport> {
    if s.ny != s_prime.nx || s.nx != s_prime.ny {
        return Err(Error::param("S must live in X x Y and S' in Y x X"));
    }
    let nx = s.nx;
    let fibre_meet = |x: usize, x2: usize| (0..s.ny).filter(|&y| s.contains(x, y) && s_prime.contains(y, x2)).count() as i64;

    let mut report = SchapiraReport {
        chi1: if nx > 0 { fibre_meet(0, 0) } else { 0 },
        chi2: if nx > 1 { fibre_meet(0, 1) } else { 0 },
        verified: false,
        violation: None,
    };
    for x in 0..nx {
        for x2 in 0..nx {
            let expected = if x == x2 { report.chi1 } else { report.chi2 };
            if fibre_meet(x, x2) != expected {
                report.violation = Some((x, x2));
                return Ok(report);
            }
        }
    }
    for x in 0..nx {
        let phi = ConstructibleFunction::indicator(CellDomain::points(nx), x);
        let lhs = radon(&radon(&phi, s)?, s_prime)?;
        let total = phi.integral();
        let rhs = phi
            .scale(report.chi1 - report.chi2)
            .add(&ConstructibleFunction::constant(CellDomain::points(nx), report.chi2 * total))?;
        if lhs != rhs {
            report.violation = Some((x, x));
            return Ok(report);
        }
    }
    report.verified = true;
    Ok(report)
}

/// Euler characteristic of real projective space `RP^{n}`:
/// `1` for even `n`, `0` for odd `n`. With `n = d - 1` this is the constant
/// `(1 + (-1)^{d-1}) / 2` that appears for hyperplane kernels in `R^d`.
pub const fn projective_space_chi(n: usize) -> i64 {
    if n.is_multiple_of(2) {
        1
    } else {
        0
    }
}
