//! Measure spaces, weight maps and subspaces.
//!
//! All measure spaces here are finite and atomic, so integrals are weighted
//! sums and every almost-everywhere statement holds at every atom.

use crate::error::{Error, Result};
use crate::numerics::{self, Tolerances};
use crate::{CMat, CVec};

/// Orthonormality slack accepted when adopting a basis as-is.
pub const BASIS_TOL: f64 = 1e-10;

/// One atom of a finite measure space.
#[derive(Clone, Debug, PartialEq)]
pub struct Atom {
    pub id: String,
    pub mass: f64,
}

/// A finite measure space: ordered atoms with strictly positive masses.
#[derive(Clone, Debug, PartialEq)]
pub struct MeasureSpace {
    atoms: Vec<Atom>,
}

impl MeasureSpace {
    /// Builds a measure space from `(id, mass)` pairs.
    pub fn new<I, S>(atoms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (S, f64)>,
        S: Into<String>,
    {
        let atoms: Vec<Atom> = atoms
            .into_iter()
            .map(|(id, mass)| Atom { id: id.into(), mass })
            .collect();
        if atoms.is_empty() {
            return Err(Error::Invariant("measure space needs at least one atom".into()));
        }
        for atom in &atoms {
            if atom.mass <= 0.0 || !atom.mass.is_finite() {
                return Err(Error::Invariant(format!(
                    "atom {:?} must have strictly positive finite mass, got {:e}",
                    atom.id, atom.mass
                )));
            }
        }
        for (i, a) in atoms.iter().enumerate() {
            if atoms[..i].iter().any(|b| b.id == a.id) {
                return Err(Error::Invariant(format!("duplicate atom id {:?}", a.id)));
            }
        }
        Ok(Self { atoms })
    }

    /// Counting measure on `len` atoms labelled "0", "1", ...
    pub fn counting(len: usize) -> Result<Self> {
        Self::new((0..len).map(|i| (i.to_string(), 1.0)))
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn mass(&self, index: usize) -> f64 {
        self.atoms[index].mass
    }

    pub fn total_mass(&self) -> f64 {
        self.atoms.iter().map(|a| a.mass).sum()
    }

    /// Product measure space: ordered pairs with multiplied masses.
    pub fn product(&self, other: &MeasureSpace) -> MeasureSpace {
        let atoms = self
            .atoms
            .iter()
            .flat_map(|a| {
                other.atoms.iter().map(move |b| Atom {
                    id: format!("({},{})", a.id, b.id),
                    mass: a.mass * b.mass,
                })
            })
            .collect();
        MeasureSpace { atoms }
    }
}

/// Per-atom weights, strictly positive at every atom.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightMap {
    values: Vec<f64>,
}

impl WeightMap {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Invariant("weight map needs at least one value".into()));
        }
        for (i, &v) in values.iter().enumerate() {
            if v <= 0.0 || !v.is_finite() {
                return Err(Error::Invariant(format!(
                    "weight at atom index {i} must be strictly positive, got {v:e}"
                )));
            }
        }
        Ok(Self { values })
    }

    /// Constant weight on `len` atoms.
    pub fn uniform(len: usize, value: f64) -> Result<Self> {
        Self::new(vec![value; len])
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn get(&self, index: usize) -> f64 {
        self.values[index]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

/// A closed subspace of the ambient space, stored as an orthonormal basis.
#[derive(Clone, Debug, PartialEq)]
pub struct Subspace {
    basis: CMat,
}

impl Subspace {
    /// Orthonormalizes spanning vectors into a basis (numerical rank many
    /// columns).
    pub fn from_spanning(vectors: &[CVec], tol: &Tolerances) -> Result<Self> {
        let basis = numerics::orthonormalize(vectors, tol)?;
        Ok(Self { basis })
    }

    /// Adopts an already orthonormal basis, verifying `B* B = I` within
    /// [`BASIS_TOL`].
    pub fn from_orthonormal(basis: CMat) -> Result<Self> {
        let (n, k) = basis.shape();
        if k == 0 || k > n {
            return Err(Error::Invariant(format!(
                "basis must have 1..=ambient_dim columns, got {k} in dimension {n}"
            )));
        }
        let gram = basis.adjoint() * &basis;
        let defect = numerics::max_abs(&(gram - CMat::identity(k, k)));
        if defect > BASIS_TOL {
            return Err(Error::Invariant(format!(
                "basis columns are not orthonormal (defect {defect:.3e})"
            )));
        }
        Ok(Self { basis })
    }

    /// The whole ambient space.
    pub fn full(n: usize) -> Self {
        Self {
            basis: CMat::identity(n, n),
        }
    }

    pub fn ambient_dim(&self) -> usize {
        self.basis.nrows()
    }

    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }

    pub fn basis(&self) -> &CMat {
        &self.basis
    }

    /// Orthogonal projection onto the subspace, `pi = B B*`.
    pub fn projection(&self) -> CMat {
        &self.basis * self.basis.adjoint()
    }

    /// Whether `v` lies in the subspace up to a relative residual.
    pub fn contains(&self, v: &CVec, residual_tol: f64) -> bool {
        if v.len() != self.ambient_dim() {
            return false;
        }
        let coeffs = self.basis.adjoint() * v;
        let residual = (v - &self.basis * coeffs).norm();
        residual <= residual_tol * v.norm().max(1.0)
    }
}

/// Image of a subspace under an invertible operator, re-orthonormalized.
pub fn image_subspace(m: &CMat, s: &Subspace, tol: &Tolerances) -> Result<Subspace> {
    let n = s.ambient_dim();
    if m.nrows() != n || m.ncols() != n {
        return Err(Error::ShapeMismatch(format!(
            "operator is {}x{} but the subspace lives in dimension {n}",
            m.nrows(),
            m.ncols()
        )));
    }
    let sv = numerics::singular_values(m);
    let top = sv.first().copied().unwrap_or(0.0);
    let bottom = sv.last().copied().unwrap_or(0.0);
    if top == 0.0 || bottom.is_nan() || bottom <= tol.rank_tol * top {
        return Err(Error::SingularOperator);
    }
    let mapped = m * s.basis();
    let cols: Vec<CVec> = (0..mapped.ncols()).map(|j| mapped.column(j).into_owned()).collect();
    let image = Subspace::from_spanning(&cols, tol)?;
    if image.dim() != s.dim() {
        // An invertible map preserves dimension; rank loss here means the
        // operator was effectively singular at this scale.
        return Err(Error::SingularOperator);
    }
    Ok(image)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::spectral_norm;
    use approx::assert_abs_diff_eq;
    use num_complex::Complex64;

    fn cvec(data: &[f64]) -> CVec {
        CVec::from_iterator(data.len(), data.iter().map(|&x| Complex64::new(x, 0.0)))
    }

    fn rmat(rows: usize, cols: usize, data: &[f64]) -> CMat {
        CMat::from_row_slice(
            rows,
            cols,
            &data.iter().map(|&x| Complex64::new(x, 0.0)).collect::<Vec<_>>(),
        )
    }

    #[test]
    fn measure_space_validates() {
        assert!(MeasureSpace::new([("a", 1.0)]).is_ok());
        assert!(MeasureSpace::new(Vec::<(String, f64)>::new()).is_err());
        assert!(MeasureSpace::new([("a", 0.0)]).is_err());
        assert!(MeasureSpace::new([("a", -1.0)]).is_err());
        assert!(MeasureSpace::new([("a", 1.0), ("a", 2.0)]).is_err());
    }

    #[test]
    fn product_space_masses() {
        let x = MeasureSpace::new([("a", 1.0)]).unwrap();
        let y = MeasureSpace::new([("b", 1.0)]).unwrap();
        let p = x.product(&y);
        assert_eq!(p.len(), 1);
        assert_eq!(p.atoms()[0].id, "(a,b)");
        assert_eq!(p.atoms()[0].mass, 1.0);

        let x = MeasureSpace::new([("a", 2.0)]).unwrap();
        let y = MeasureSpace::new([("b", 3.0), ("c", 4.0)]).unwrap();
        let p = x.product(&y);
        assert_eq!(
            p.atoms().iter().map(|a| a.mass).collect::<Vec<_>>(),
            vec![6.0, 8.0]
        );

        let x = MeasureSpace::new([("a", 0.5), ("b", 0.5)]).unwrap();
        let y = MeasureSpace::new([("c", 1.0), ("d", 1.0)]).unwrap();
        let p = x.product(&y);
        assert_abs_diff_eq!(p.total_mass(), 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(
            p.total_mass(),
            x.total_mass() * y.total_mass(),
            epsilon = 1e-12
        );
    }

    #[test]
    fn weight_map_requires_strict_positivity() {
        assert!(WeightMap::new(vec![1.0, 0.5]).is_ok());
        assert!(WeightMap::new(vec![1.0, 0.0]).is_err());
        assert!(WeightMap::new(vec![]).is_err());
    }

    #[test]
    fn projection_of_coordinate_line() {
        let tol = Tolerances::default();
        let s = Subspace::from_spanning(&[cvec(&[1.0, 0.0])], &tol).unwrap();
        let pi = s.projection();
        assert_eq!(pi, rmat(2, 2, &[1.0, 0.0, 0.0, 0.0]));
    }

    #[test]
    fn projection_of_full_space_is_identity() {
        let s = Subspace::full(2);
        assert_eq!(s.projection(), CMat::identity(2, 2));
    }

    #[test]
    fn projection_of_diagonal_line() {
        // Outer product of (1,1)/sqrt(2) with itself.
        let tol = Tolerances::default();
        let s = Subspace::from_spanning(&[cvec(&[1.0, 1.0])], &tol).unwrap();
        let pi = s.projection();
        for i in 0..2 {
            for j in 0..2 {
                assert_abs_diff_eq!(pi[(i, j)].re, 0.5, epsilon = 1e-12);
                assert_abs_diff_eq!(pi[(i, j)].im, 0.0, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn projection_is_hermitian_idempotent() {
        let tol = Tolerances::default();
        let s = Subspace::from_spanning(&[cvec(&[1.0, 2.0, -1.0]), cvec(&[0.0, 1.0, 1.0])], &tol)
            .unwrap();
        let pi = s.projection();
        assert!(spectral_norm(&(&pi * &pi - &pi)) <= 1e-9);
        assert!(spectral_norm(&(pi.adjoint() - &pi)) <= 1e-9);
        assert_abs_diff_eq!(pi.trace().re, s.dim() as f64, epsilon = 1e-8);
    }

    #[test]
    fn image_subspace_cases() {
        let tol = Tolerances::default();
        let s = Subspace::from_spanning(&[cvec(&[1.0, 0.0])], &tol).unwrap();

        let same = image_subspace(&CMat::identity(2, 2), &s, &tol).unwrap();
        assert!(spectral_norm(&(same.projection() - s.projection())) <= 1e-12);

        let scaled = image_subspace(&CMat::identity(2, 2).scale(2.0), &s, &tol).unwrap();
        assert!(spectral_norm(&(scaled.projection() - s.projection())) <= 1e-12);

        // Shear sends span{e2} to span{(1,1)}.
        let e2 = Subspace::from_spanning(&[cvec(&[0.0, 1.0])], &tol).unwrap();
        let shear = rmat(2, 2, &[1.0, 1.0, 0.0, 1.0]);
        let image = image_subspace(&shear, &e2, &tol).unwrap();
        let diag = Subspace::from_spanning(&[cvec(&[1.0, 1.0])], &tol).unwrap();
        assert!(spectral_norm(&(image.projection() - diag.projection())) <= 1e-12);
    }

    #[test]
    fn image_subspace_rejects_singular_operator() {
        let tol = Tolerances::default();
        let s = Subspace::full(2);
        let singular = rmat(2, 2, &[1.0, 0.0, 0.0, 0.0]);
        assert!(matches!(
            image_subspace(&singular, &s, &tol),
            Err(Error::SingularOperator)
        ));
    }

    #[test]
    fn from_orthonormal_validates() {
        assert!(Subspace::from_orthonormal(CMat::identity(3, 3)).is_ok());
        let skew = rmat(2, 2, &[1.0, 1.0, 0.0, 1.0]);
        assert!(Subspace::from_orthonormal(skew).is_err());
    }
}
