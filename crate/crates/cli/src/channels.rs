//! Channel presets and the Kraus file format.

use std::path::Path;

use qbsim_core::channel::{completeness_error, presets, COMPLETENESS_TOL};
use qbsim_core::{DensityOperator, Mat, QuantumChannel, Space, C64};
use serde::Deserialize;

use crate::config::ChannelSpec;
use crate::CliError;

/// `{"d_in": 2, "out_dims": [2], "kraus": [[[re, im], ...], ...]}`, each
/// operator listed row-major as `d_out × d_in` entries.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KrausFile {
    pub d_in: usize,
    pub out_dims: Vec<usize>,
    pub kraus: Vec<Vec<[f64; 2]>>,
}

impl KrausFile {
    pub fn into_channel(self) -> Result<QuantumChannel, CliError> {
        let d_out: usize = self.out_dims.iter().product();
        if self.kraus.is_empty() {
            return Err(CliError::Config("Kraus file lists no operators".into()));
        }
        let mut ops = Vec::with_capacity(self.kraus.len());
        for (k, entries) in self.kraus.iter().enumerate() {
            if entries.len() != d_out * self.d_in {
                return Err(CliError::Config(format!(
                    "Kraus operator {k} has {} entries, expected {}",
                    entries.len(),
                    d_out * self.d_in
                )));
            }
            ops.push(Mat::from_fn(d_out, self.d_in, |r, c| {
                let [re, im] = entries[r * self.d_in + c];
                C64::new(re, im)
            }));
        }
        let dev = completeness_error(&ops, self.d_in);
        if dev > COMPLETENESS_TOL {
            return Err(CliError::Config(format!(
                "Kraus operators are not trace preserving: max |sum K^dag K - 1| = {dev:.3e}"
            )));
        }
        Ok(QuantumChannel::from_kraus(self.d_in, &self.out_dims, ops)?)
    }
}

pub fn read_kraus_file(path: &Path) -> Result<QuantumChannel, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    let file: KrausFile = serde_json::from_str(&text).map_err(|e| CliError::ConfigParse {
        line: e.line(),
        column: e.column(),
        message: format!("{}: {e}", path.display()),
    })?;
    file.into_channel()
}

fn diagonal_state(label: &str, spectrum: &[f64]) -> Result<DensityOperator, CliError> {
    Ok(DensityOperator::diagonal(Space::single(label, spectrum.len())?, spectrum)?)
}

fn noise(spec: &ChannelSpec, default: f64) -> f64 {
    spec.p.unwrap_or(default)
}

pub fn build_channel(spec: &ChannelSpec) -> Result<QuantumChannel, CliError> {
    match (&spec.preset, &spec.kraus_file) {
        (Some(_), Some(_)) => Err(CliError::Config("give either a preset or a Kraus file, not both".into())),
        (None, None) => Err(CliError::Config("channel needs a preset or a Kraus file".into())),
        (None, Some(path)) => read_kraus_file(path),
        (Some(name), None) => {
            let dim = spec.dim.unwrap_or(2);
            let ch = match name.as_str() {
                "identity" => presets::identity(dim)?,
                "copy" => presets::copy(dim)?,
                "depolarizing" => presets::depolarizing(noise(spec, 0.3))?,
                "dephasing" => presets::dephasing(noise(spec, 0.5))?,
                "complementary-dephasing" => presets::complementary_dephasing(noise(spec, 0.5))?,
                "constant" => {
                    let spectra = spec.spectra.clone().unwrap_or_else(|| vec![vec![0.5, 0.5]; 2]);
                    let mut sigma: Option<DensityOperator> = None;
                    for (l, s) in spectra.iter().enumerate() {
                        let f = diagonal_state(&format!("S{}", l + 1), s)?;
                        sigma = Some(match sigma {
                            None => f,
                            Some(acc) => acc.tensor(&f)?,
                        });
                    }
                    let sigma = sigma.ok_or_else(|| CliError::Config("constant preset needs a spectrum".into()))?;
                    presets::constant(dim, &sigma)?
                }
                "product-broadcast" => {
                    let spectrum = match &spec.spectra {
                        Some(v) if v.len() == 1 => v[0].clone(),
                        Some(_) => {
                            return Err(CliError::Config("product-broadcast takes one spectrum".into()))
                        }
                        None => vec![0.5, 0.5],
                    };
                    let first = presets::depolarizing(noise(spec, 0.3))?;
                    presets::product_broadcast(&first, &diagonal_state("S", &spectrum)?)?
                }
                other => return Err(CliError::Config(format!("unknown channel preset `{other}`"))),
            };
            Ok(ch)
        }
    }
}

/// Whether the preset reads `p`.
pub fn is_parametrized(spec: &ChannelSpec) -> bool {
    matches!(
        spec.preset.as_deref(),
        Some("depolarizing" | "dephasing" | "complementary-dephasing" | "product-broadcast")
    )
}
