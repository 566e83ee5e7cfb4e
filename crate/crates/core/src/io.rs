//! JSON encoding of channels.
//!
//! Matrices are arrays of rows, each entry a `[re, im]` pair. A channel file is
//! either `{"dim", "kraus": [matrix, …], "ideal_unitary"?: matrix}` or
//! `{"dim", "chi": matrix, "basis": "gellmann", "ideal_unitary"?: matrix}`.

use serde::{Deserialize, Serialize};

use crate::bases::hermitian_basis;
use crate::channels::{chi_to_kraus, deviation_channel, ChiMatrix, KrausChannel};
use crate::error::{Error, Result};
use crate::tensor::{ComplexMatrix, C64};

pub type MatrixJson = Vec<Vec<[f64; 2]>>;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelFile {
    pub dim: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kraus: Option<Vec<MatrixJson>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chi: Option<MatrixJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub basis: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ideal_unitary: Option<MatrixJson>,
}

pub fn matrix_from_json(m: &MatrixJson) -> Result<ComplexMatrix> {
    let rows: Vec<Vec<C64>> = m
        .iter()
        .map(|row| row.iter().map(|[re, im]| C64::new(*re, *im)).collect())
        .collect();
    ComplexMatrix::from_rows(&rows).map_err(|e| Error::InvalidInput(e.to_string()))
}

pub fn matrix_to_json(m: &ComplexMatrix) -> MatrixJson {
    (0..m.rows())
        .map(|i| m.row(i).iter().map(|z| [z.re, z.im]).collect())
        .collect()
}

fn square_of_dim(m: &MatrixJson, dim: usize, what: &str) -> Result<ComplexMatrix> {
    let mat = matrix_from_json(m)?;
    if mat.shape() != (dim, dim) {
        return Err(Error::InvalidInput(format!(
            "{what} has shape {}x{}, expected {dim}x{dim}",
            mat.rows(),
            mat.cols()
        )));
    }
    Ok(mat)
}

impl ChannelFile {
    pub fn from_json(text: &str) -> Result<Self> {
        let file: Self =
            serde_json::from_str(text).map_err(|e| Error::InvalidInput(e.to_string()))?;
        if file.dim < 2 {
            return Err(Error::InvalidInput(format!("dim {} is below 2", file.dim)));
        }
        match (&file.kraus, &file.chi) {
            (Some(_), Some(_)) => Err(Error::InvalidInput(
                "give either `kraus` or `chi`, not both".into(),
            )),
            (None, None) => Err(Error::InvalidInput("missing `kraus` or `chi`".into())),
            (Some(k), None) if k.is_empty() => Err(Error::InvalidInput("empty Kraus list".into())),
            (None, Some(_)) if file.basis.as_deref() != Some("gellmann") => Err(
                Error::InvalidInput("`chi` requires \"basis\": \"gellmann\"".into()),
            ),
            _ => Ok(file),
        }
    }

    pub fn from_channel(channel: &KrausChannel) -> Self {
        Self {
            dim: channel.dim(),
            kraus: Some(channel.kraus().iter().map(matrix_to_json).collect()),
            chi: None,
            basis: None,
            ideal_unitary: None,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plain data serializes")
    }

    /// The implemented channel `E`, shape-checked but not validated as CPTP.
    pub fn channel(&self) -> Result<KrausChannel> {
        if let Some(kraus) = &self.kraus {
            let ops = kraus
                .iter()
                .enumerate()
                .map(|(i, k)| square_of_dim(k, self.dim, &format!("Kraus operator {i}")))
                .collect::<Result<Vec<_>>>()?;
            return KrausChannel::from_operators(ops);
        }
        let chi = self
            .chi
            .as_ref()
            .ok_or_else(|| Error::InvalidInput("missing `chi`".into()))?;
        let n = self.dim * self.dim;
        let m = matrix_from_json(chi)?;
        if m.shape() != (n, n) {
            return Err(Error::InvalidInput(format!("chi must be {n}x{n}")));
        }
        chi_to_kraus(&ChiMatrix::new(hermitian_basis(self.dim)?, m)?)
    }

    pub fn ideal(&self) -> Result<Option<ComplexMatrix>> {
        self.ideal_unitary
            .as_ref()
            .map(|u| square_of_dim(u, self.dim, "ideal_unitary"))
            .transpose()
    }

    /// `Λ = U† ∘ E`, with `U` the file's ideal unitary (identity if absent).
    pub fn deviation(&self) -> Result<KrausChannel> {
        let e = self.channel()?;
        match self.ideal()? {
            Some(u) => deviation_channel(&e, &u),
            None => Ok(e),
        }
    }
}

#[derive(Deserialize)]
#[serde(untagged)]
enum UnitaryFile {
    Bare(MatrixJson),
    Wrapped { unitary: MatrixJson },
}

/// Reads a unitary given either as a bare matrix or as `{"unitary": matrix}`.
pub fn unitary_from_json(text: &str) -> Result<ComplexMatrix> {
    let parsed: UnitaryFile =
        serde_json::from_str(text).map_err(|e| Error::InvalidInput(e.to_string()))?;
    match parsed {
        UnitaryFile::Bare(m) | UnitaryFile::Wrapped { unitary: m } => matrix_from_json(&m),
    }
}
