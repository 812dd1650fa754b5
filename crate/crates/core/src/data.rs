//! Dataset types, file ingestion (svmlight and CSV), synthetic data
//! generation, and norm-cap enforcement.

use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::losses::ProblemKind;
use crate::scalar::Scalar;

/// One labeled data point: the unit of streaming input.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Example<S> {
    pub x: Vec<S>,
    pub y: S,
}

impl<S: Scalar> Example<S> {
    pub fn new(x: Vec<S>, y: S) -> Self {
        Example { x, y }
    }

    pub fn l2_norm(&self) -> S {
        self.x.iter().map(|&v| v * v).sum::<S>().sqrt()
    }
}

/// An ordered stream of examples plus metadata.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset<S> {
    pub examples: Vec<Example<S>>,
    pub dimension: usize,
    /// Ground-truth weights when the data is synthetic.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub u_true: Option<Vec<S>>,
}

impl<S: Scalar> Dataset<S> {
    pub fn len(&self) -> usize {
        self.examples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.examples.is_empty()
    }

    pub fn max_l2_norm(&self) -> S {
        self.examples
            .iter()
            .map(Example::l2_norm)
            .fold(S::zero(), S::max)
    }
}

/// On-disk dataset formats understood by [`load_dataset`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DatasetFormat {
    /// `label idx:val idx:val ...` with 1-based indices.
    Svmlight,
    /// Header row, label column first.
    Csv,
}

/// Where a run's data comes from and how it is shaped.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DatasetSpec<S> {
    File {
        path: String,
        format: DatasetFormat,
        dimension: usize,
        /// Norm cap applied after loading.
        c_bound: S,
    },
    Synthetic(SyntheticSpec<S>),
}

/// Parameters for synthetic Assumption-compliant streams.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSpec<S> {
    pub kind: ProblemKind,
    pub dimension: usize,
    pub rounds: usize,
    /// Fraction of coordinates carrying signal, in (0, 1].
    pub informative_fraction: f64,
    /// Standard deviation of the label noise.
    pub noise_level: S,
    /// Norm cap; every emitted example satisfies `‖x‖₂ ≤ c_bound`.
    pub c_bound: S,
}

impl<S: Scalar> SyntheticSpec<S> {
    pub fn new(kind: ProblemKind, dimension: usize, rounds: usize) -> Self {
        SyntheticSpec {
            kind,
            dimension,
            rounds,
            informative_fraction: 0.1,
            noise_level: S::from_f64_const(0.1),
            c_bound: S::one(),
        }
    }

    pub fn with_informative_fraction(mut self, fraction: f64) -> Self {
        self.informative_fraction = fraction;
        self
    }

    pub fn with_noise_level(mut self, noise: S) -> Self {
        self.noise_level = noise;
        self
    }

    pub fn with_c_bound(mut self, c: S) -> Self {
        self.c_bound = c;
        self
    }
}

/// Scales every example with `‖x‖₂ > c_bound` down to norm exactly
/// `c_bound`; examples already inside the ball are untouched.
pub fn normalize_to_ball<S: Scalar>(examples: &mut [Example<S>], c_bound: S) -> Result<()> {
    if c_bound.is_nan() || c_bound <= S::zero() {
        return Err(Error::invalid_param("c_bound", "must be > 0"));
    }
    for ex in examples.iter_mut() {
        let norm = ex.l2_norm();
        if norm > c_bound {
            let scale = c_bound / norm;
            for v in &mut ex.x {
                *v = *v * scale;
            }
        }
    }
    Ok(())
}

/// Generates a synthetic stream with a sparse ground-truth weight vector.
///
/// Features are i.i.d. Gaussian, normalized into the `c_bound` ball; labels
/// are `sign(u·x + noise)` for logistic/hinge and `u·x + noise` for least
/// squares, computed after normalization. `u_true` has
/// `ceil(fraction·d)` nonzero entries and unit `ℓ2` norm.
pub fn synth_dataset<S, R>(spec: &SyntheticSpec<S>, rng: &mut R) -> Result<Dataset<S>>
where
    S: Scalar,
    R: Rng + ?Sized,
{
    if spec.dimension == 0 || spec.rounds == 0 {
        return Err(Error::invalid_param(
            "synthetic spec",
            "dimension and rounds must be positive",
        ));
    }
    if !(spec.informative_fraction > 0.0 && spec.informative_fraction <= 1.0) {
        return Err(Error::invalid_param(
            "informative_fraction",
            "must lie in (0, 1]",
        ));
    }
    if !spec.c_bound.is_finite() || spec.c_bound <= S::zero() {
        return Err(Error::invalid_param("c_bound", "must be finite and > 0"));
    }

    let d = spec.dimension;
    let n_informative = (spec.informative_fraction * d as f64).ceil() as usize;
    let n_informative = n_informative.clamp(1, d);

    // Sparse ground truth on the first coordinates of a random permutation.
    let mut coords: Vec<usize> = (0..d).collect();
    for i in (1..d).rev() {
        let j = rng.random_range(0..=i);
        coords.swap(i, j);
    }
    let mut u_true = vec![S::zero(); d];
    for &c in coords.iter().take(n_informative) {
        u_true[c] = S::std_normal(rng);
    }
    let u_norm = u_true.iter().map(|&v| v * v).sum::<S>().sqrt();
    if u_norm > S::zero() {
        for v in &mut u_true {
            *v = *v / u_norm;
        }
    } else {
        u_true[coords[0]] = S::one();
    }

    let mut examples = Vec::with_capacity(spec.rounds);
    for _ in 0..spec.rounds {
        let x: Vec<S> = (0..d).map(|_| S::std_normal(rng)).collect();
        examples.push(Example::new(x, S::zero()));
    }
    normalize_to_ball(&mut examples, spec.c_bound)?;

    for ex in &mut examples {
        let clean: S = ex.x.iter().zip(u_true.iter()).map(|(&a, &b)| a * b).sum();
        let noise: S = S::std_normal(rng);
        let z = clean + spec.noise_level * noise;
        ex.y = match spec.kind {
            ProblemKind::Squared => z,
            ProblemKind::Logistic | ProblemKind::Hinge => {
                if z >= S::zero() {
                    S::one()
                } else {
                    -S::one()
                }
            }
        };
    }

    Ok(Dataset {
        examples,
        dimension: d,
        u_true: Some(u_true),
    })
}

/// Loads a dataset from a reader in the given format.
pub fn read_dataset<S: Scalar, R: Read>(
    reader: R,
    format: DatasetFormat,
    dimension: usize,
) -> Result<Dataset<S>> {
    match format {
        DatasetFormat::Svmlight => read_svmlight(reader, dimension),
        DatasetFormat::Csv => read_csv(reader, dimension),
    }
}

/// Loads a dataset file; see [`DatasetFormat`] for the layouts.
pub fn load_dataset<S: Scalar>(
    path: impl AsRef<Path>,
    format: DatasetFormat,
    dimension: usize,
) -> Result<Dataset<S>> {
    let file = std::fs::File::open(path)?;
    read_dataset(BufReader::new(file), format, dimension)
}

fn parse_scalar<S: Scalar>(tok: &str, line: usize) -> Result<S> {
    let v: f64 = tok.parse().map_err(|_| Error::Parse {
        line,
        msg: format!("invalid number {tok:?}"),
    })?;
    Ok(S::from_f64_const(v))
}

fn read_svmlight<S: Scalar, R: Read>(reader: R, dimension: usize) -> Result<Dataset<S>> {
    if dimension == 0 {
        return Err(Error::invalid_param("dimension", "must be positive"));
    }
    let mut examples = Vec::new();
    for (idx, line) in BufReader::new(reader).lines().enumerate() {
        let line_no = idx + 1;
        let line = line?;
        let body = line.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let mut toks = body.split_whitespace();
        let y = parse_scalar(toks.next().unwrap(), line_no)?;
        let mut x = vec![S::zero(); dimension];
        for tok in toks {
            let (i_str, v_str) = tok.split_once(':').ok_or_else(|| Error::Parse {
                line: line_no,
                msg: format!("expected idx:val, got {tok:?}"),
            })?;
            let i: usize = i_str.parse().map_err(|_| Error::Parse {
                line: line_no,
                msg: format!("invalid index {i_str:?}"),
            })?;
            if i == 0 || i > dimension {
                return Err(Error::Parse {
                    line: line_no,
                    msg: format!("index {i} out of declared dimension {dimension}"),
                });
            }
            x[i - 1] = parse_scalar(v_str, line_no)?;
        }
        examples.push(Example::new(x, y));
    }
    if examples.is_empty() {
        return Err(Error::EmptyInput {
            context: "no examples in svmlight input",
        });
    }
    Ok(Dataset {
        examples,
        dimension,
        u_true: None,
    })
}

fn read_csv<S: Scalar, R: Read>(reader: R, dimension: usize) -> Result<Dataset<S>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(reader);
    let mut examples = Vec::new();
    for (idx, record) in rdr.records().enumerate() {
        let line_no = idx + 2; // header is line 1
        let record = record?;
        if record.len() != dimension + 1 {
            return Err(Error::Parse {
                line: line_no,
                msg: format!(
                    "expected {} columns (label + {dimension} features), got {}",
                    dimension + 1,
                    record.len()
                ),
            });
        }
        let y = parse_scalar(&record[0], line_no)?;
        let x = record
            .iter()
            .skip(1)
            .map(|tok| parse_scalar(tok, line_no))
            .collect::<Result<Vec<S>>>()?;
        examples.push(Example::new(x, y));
    }
    if examples.is_empty() {
        return Err(Error::EmptyInput {
            context: "no examples in csv input",
        });
    }
    Ok(Dataset {
        examples,
        dimension,
        u_true: None,
    })
}

/// Writes a dataset in svmlight format. Values use the shortest
/// representation that round-trips, so write-then-load is lossless.
pub fn write_svmlight<S: Scalar, W: Write>(dataset: &Dataset<S>, mut w: W) -> Result<()> {
    for ex in &dataset.examples {
        write!(w, "{}", ex.y)?;
        for (j, &v) in ex.x.iter().enumerate() {
            if v != S::zero() {
                write!(w, " {}:{}", j + 1, v)?;
            }
        }
        writeln!(w)?;
    }
    Ok(())
}

/// Writes a dataset in CSV format (header row, label column first).
pub fn write_csv<S: Scalar, W: Write>(dataset: &Dataset<S>, w: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    let mut header = vec!["label".to_string()];
    header.extend((1..=dataset.dimension).map(|j| format!("f{j}")));
    wtr.write_record(&header)?;
    for ex in &dataset.examples {
        let mut row = vec![format!("{}", ex.y)];
        row.extend(ex.x.iter().map(|v| format!("{v}")));
        wtr.write_record(&row)?;
    }
    wtr.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha12Rng;

    #[test]
    fn svmlight_line_parses_sparse_entries() {
        let data = "+1 1:0.5 3:-0.2\n";
        let ds: Dataset<f64> = read_dataset(data.as_bytes(), DatasetFormat::Svmlight, 3).unwrap();
        assert_eq!(ds.examples.len(), 1);
        assert_eq!(ds.examples[0].x, vec![0.5, 0.0, -0.2]);
        assert_eq!(ds.examples[0].y, 1.0);
    }

    #[test]
    fn svmlight_rejects_empty_and_bad_indices() {
        let err = read_dataset::<f64, _>("".as_bytes(), DatasetFormat::Svmlight, 3).unwrap_err();
        assert!(matches!(err, Error::EmptyInput { .. }));
        let err = read_dataset::<f64, _>("+1 4:1.0\n".as_bytes(), DatasetFormat::Svmlight, 3)
            .unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }));
        let err = read_dataset::<f64, _>("+1 0:1.0\n".as_bytes(), DatasetFormat::Svmlight, 3)
            .unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }));
    }

    #[test]
    fn svmlight_round_trip_is_lossless() {
        let mut rng = ChaCha12Rng::seed_from_u64(7);
        let spec = SyntheticSpec::<f64>::new(ProblemKind::Squared, 12, 40);
        let ds = synth_dataset(&spec, &mut rng).unwrap();
        let mut buf = Vec::new();
        write_svmlight(&ds, &mut buf).unwrap();
        let back: Dataset<f64> = read_dataset(buf.as_slice(), DatasetFormat::Svmlight, 12).unwrap();
        assert_eq!(back.examples.len(), ds.examples.len());
        for (a, b) in ds.examples.iter().zip(back.examples.iter()) {
            assert_eq!(a.y, b.y);
            for (&u, &v) in a.x.iter().zip(b.x.iter()) {
                assert!((u - v).abs() <= 1e-15);
            }
        }
    }

    #[test]
    fn csv_round_trip_is_lossless() {
        let mut rng = ChaCha12Rng::seed_from_u64(8);
        let spec = SyntheticSpec::<f64>::new(ProblemKind::Logistic, 5, 10);
        let ds = synth_dataset(&spec, &mut rng).unwrap();
        let mut buf = Vec::new();
        write_csv(&ds, &mut buf).unwrap();
        let back: Dataset<f64> = read_dataset(buf.as_slice(), DatasetFormat::Csv, 5).unwrap();
        assert_eq!(back.examples, ds.examples);
    }

    #[test]
    fn normalize_scales_only_oversized_examples() {
        let mut exs: Vec<Example<f64>> = vec![
            Example::new(vec![3.0, 4.0], 1.0),
            Example::new(vec![0.1, 0.0], 1.0),
        ];
        normalize_to_ball(&mut exs, 1.0).unwrap();
        assert!((exs[0].x[0] - 0.6).abs() < 1e-12);
        assert!((exs[0].x[1] - 0.8).abs() < 1e-12);
        assert_eq!(exs[1].x, vec![0.1, 0.0]);
    }

    #[test]
    fn synth_respects_sparsity_and_norm_cap() {
        let mut rng = ChaCha12Rng::seed_from_u64(42);
        let spec = SyntheticSpec::<f64>::new(ProblemKind::Squared, 10, 100)
            .with_informative_fraction(0.2)
            .with_noise_level(0.0);
        let ds = synth_dataset(&spec, &mut rng).unwrap();
        let u = ds.u_true.as_ref().unwrap();
        assert_eq!(u.iter().filter(|&&v| v != 0.0).count(), 2);
        assert!(ds.max_l2_norm() <= 1.0 + 1e-12);
        // Zero noise: squared labels are exactly u·x.
        for ex in &ds.examples {
            let dot: f64 = ex.x.iter().zip(u.iter()).map(|(a, b)| a * b).sum();
            assert_eq!(ex.y, dot);
        }
    }

    #[test]
    fn synth_binary_labels_are_signs() {
        let mut rng = ChaCha12Rng::seed_from_u64(3);
        let spec = SyntheticSpec::<f64>::new(ProblemKind::Hinge, 8, 50);
        let ds = synth_dataset(&spec, &mut rng).unwrap();
        assert!(ds.examples.iter().all(|e| e.y == 1.0 || e.y == -1.0));
    }
}
