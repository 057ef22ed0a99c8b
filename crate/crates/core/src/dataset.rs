use crate::error::{Error, Result};

/// Dense row-major collection of `n` points in `dim` dimensions. A point's id
/// is its row number.
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    dim: usize,
    values: Vec<f64>,
}

impl Dataset {
    pub fn new(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::invalid("dataset dimension must be at least 1"));
        }
        Ok(Self { dim, values: Vec::new() })
    }

    pub fn from_rows<I, R>(dim: usize, rows: I) -> Result<Self>
    where
        I: IntoIterator<Item = R>,
        R: AsRef<[f64]>,
    {
        let mut ds = Self::new(dim)?;
        for row in rows {
            ds.push(row.as_ref())?;
        }
        Ok(ds)
    }

    /// Wraps a flat buffer whose length is a multiple of `dim`.
    pub fn from_flat(dim: usize, values: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::invalid("dataset dimension must be at least 1"));
        }
        if !values.len().is_multiple_of(dim) {
            return Err(Error::invalid(format!(
                "flat buffer of length {} is not a multiple of dimension {dim}",
                values.len()
            )));
        }
        Ok(Self { dim, values })
    }

    /// Appends a point and returns its id.
    pub fn push(&mut self, point: &[f64]) -> Result<u32> {
        Error::check_dim(self.dim, point.len())?;
        let id = u32::try_from(self.len()).map_err(|_| Error::invalid("dataset exceeds 2^32 points"))?;
        self.values.extend_from_slice(point);
        Ok(id)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.values.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn point(&self, id: u32) -> &[f64] {
        let start = id as usize * self.dim;
        &self.values[start..start + self.dim]
    }

    pub fn get(&self, id: u32) -> Option<&[f64]> {
        ((id as usize) < self.len()).then(|| self.point(id))
    }

    pub fn iter(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.values.chunks_exact(self.dim)
    }

    pub fn as_flat(&self) -> &[f64] {
        &self.values
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rows_and_ids() {
        let ds = Dataset::from_rows(2, [[1.0, 2.0], [3.0, 4.0]]).unwrap();
        assert_eq!(ds.len(), 2);
        assert_eq!(ds.point(1), &[3.0, 4.0]);
        assert!(ds.get(2).is_none());
        assert_eq!(ds.iter().count(), 2);
    }

    #[test]
    fn rejects_ragged() {
        let err = Dataset::from_rows(2, [vec![1.0, 2.0], vec![1.0]]).unwrap_err();
        assert!(matches!(err, Error::DimensionMismatch { expected: 2, actual: 1 }));
        assert!(Dataset::from_flat(3, vec![0.0; 4]).is_err());
        assert!(Dataset::new(0).is_err());
    }
}
