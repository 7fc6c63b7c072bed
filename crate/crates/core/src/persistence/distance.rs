use crate::embedding::PointCloud;
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Dense symmetric matrix of pairwise distances.
#[derive(Clone, Debug, PartialEq)]
pub struct DistanceMatrix<T> {
    n: usize,
    entries: Vec<T>,
}

impl<T: Real> DistanceMatrix<T> {
    /// Validates symmetry, zero diagonal, finiteness and nonnegativity.
    pub fn new(n: usize, entries: Vec<T>) -> Result<Self> {
        if entries.len() != n * n {
            return Err(Error::InvalidInput(format!(
                "{} entries for a {n}x{n} distance matrix",
                entries.len()
            )));
        }
        for i in 0..n {
            if entries[i * n + i] != T::zero() {
                return Err(Error::InvalidInput(format!("nonzero diagonal at {i}")));
            }
            for j in (i + 1)..n {
                let (a, b) = (entries[i * n + j], entries[j * n + i]);
                if !a.is_finite() || a < T::zero() {
                    return Err(Error::InvalidInput(format!("invalid distance at ({i}, {j})")));
                }
                if a != b {
                    return Err(Error::InvalidInput(format!("asymmetric entry at ({i}, {j})")));
                }
            }
        }
        Ok(DistanceMatrix { n, entries })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> T {
        self.entries[i * self.n + j]
    }

    pub fn entries(&self) -> &[T] {
        &self.entries
    }

    pub fn max_distance(&self) -> T {
        self.entries.iter().copied().fold(T::zero(), T::max)
    }
}

/// Euclidean distance with the squared terms summed in ascending order, so
/// the result does not depend on the coordinate order.
pub(crate) fn euclidean<T: Real>(p: &[T], q: &[T]) -> T {
    match p.len() {
        1 => (p[0] - q[0]).abs(),
        2 => {
            let a = (p[0] - q[0]) * (p[0] - q[0]);
            let b = (p[1] - q[1]) * (p[1] - q[1]);
            (a + b).sqrt()
        }
        _ => {
            let mut sq: Vec<T> = p.iter().zip(q).map(|(&a, &b)| (a - b) * (a - b)).collect();
            sq.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
            sq.into_iter().sum::<T>().sqrt()
        }
    }
}

pub fn pairwise_distances<T: Real>(cloud: &PointCloud<T>) -> Result<DistanceMatrix<T>> {
    let n = cloud.len();
    if n == 0 {
        return Err(Error::InvalidInput("point cloud is empty".into()));
    }
    if let Some(i) = cloud.coords().iter().position(|c| !c.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "non-finite coordinate in point {}",
            i / cloud.dim()
        )));
    }
    let mut entries = vec![T::zero(); n * n];
    for i in 0..n {
        for j in (i + 1)..n {
            let d = euclidean(cloud.point(i), cloud.point(j));
            entries[i * n + j] = d;
            entries[j * n + i] = d;
        }
    }
    Ok(DistanceMatrix { n, entries })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_square() {
        let c = PointCloud::from_points(&[vec![0.0, 0.0], vec![1.0, 0.0], vec![1.0, 1.0], vec![0.0, 1.0]]).unwrap();
        let d = pairwise_distances(&c).unwrap();
        let mut upper: Vec<f64> = (0..4)
            .flat_map(|i| ((i + 1)..4).map(move |j| (i, j)))
            .map(|(i, j)| d.get(i, j))
            .collect();
        upper.sort_by(f64::total_cmp);
        assert_eq!(&upper[..4], &[1.0; 4]);
        assert_eq!(&upper[4..], &[2f64.sqrt(); 2]);
    }

    #[test]
    fn single_point() {
        let d = pairwise_distances(&PointCloud::from_points(&[vec![3.0, 4.0]]).unwrap()).unwrap();
        assert_eq!(d.entries(), &[0.0]);
    }

    #[test]
    fn coordinate_reversal_is_exact() {
        let c = PointCloud::new(4, (0..40).map(|k| ((k * 37 % 11) as f64).sin() * 3.1).collect()).unwrap();
        let a = pairwise_distances(&c).unwrap();
        let b = pairwise_distances(&c.reversed_coordinates()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn rejects_bad_matrices() {
        assert!(DistanceMatrix::new(2, vec![0.0, 1.0, 2.0, 0.0]).is_err());
        assert!(DistanceMatrix::new(2, vec![0.0, -1.0, -1.0, 0.0]).is_err());
        assert!(DistanceMatrix::new(2, vec![1.0, 1.0, 1.0, 0.0]).is_err());
        assert!(DistanceMatrix::new(2, vec![0.0, 1.0, 1.0, 0.0]).is_ok());
    }

    #[test]
    fn empty_cloud_rejected() {
        let c = PointCloud::<f64>::new(2, vec![]).unwrap();
        assert!(pairwise_distances(&c).is_err());
    }
}
