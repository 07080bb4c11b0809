use std::collections::{BTreeSet, HashMap};
use std::io::Write;
use std::path::Path;

use super::LabeledDataset;
use crate::error::{Error, Result};
use crate::ranking::{Instance, IntervalLabel};

/// Writes `x_1..x_d, y_true, y_lo, y_hi, is_partial` with a header row.
pub fn write_dataset<W: Write>(dataset: &LabeledDataset, writer: W) -> Result<()> {
    let mut out = ::csv::Writer::from_writer(writer);
    let mut header: Vec<String> = (1..=dataset.dim()).map(|j| format!("x_{j}")).collect();
    header.extend(["y_true", "y_lo", "y_hi", "is_partial"].map(String::from));
    out.write_record(&header)?;
    for i in 0..dataset.len() {
        let mut row: Vec<String> = dataset.instances[i].iter().map(|v| v.to_string()).collect();
        row.push(dataset.true_ranks[i].to_string());
        row.push(dataset.intervals[i].lo().to_string());
        row.push(dataset.intervals[i].hi().to_string());
        row.push(u8::from(dataset.is_partial[i]).to_string());
        out.write_record(&row)?;
    }
    out.flush()?;
    Ok(())
}

/// Reads a file written by [`write_dataset`]. The class count defaults to the
/// largest rank mentioned in the file.
pub fn read_dataset(path: &Path, k: Option<usize>) -> Result<LabeledDataset> {
    let mut reader = ::csv::Reader::from_path(path).map_err(|e| Error::data(path, e.to_string()))?;
    let header = reader.headers()?.clone();
    let col = |name: &str| {
        header
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::data(path, format!("missing column '{name}'")))
    };
    let (c_true, c_lo, c_hi, c_part) = (col("y_true")?, col("y_lo")?, col("y_hi")?, col("is_partial")?);
    let x_cols: Vec<usize> = header
        .iter()
        .enumerate()
        .filter(|(_, h)| h.starts_with("x_"))
        .map(|(i, _)| i)
        .collect();
    if x_cols.is_empty() {
        return Err(Error::data(path, "no feature columns"));
    }

    let mut instances = Vec::new();
    let mut rows = Vec::new();
    for (r, record) in reader.records().enumerate() {
        let record = record?;
        let int = |c: usize| -> Result<usize> {
            record[c]
                .trim()
                .parse()
                .map_err(|_| Error::data(path, format!("row {}: bad integer '{}'", r + 2, &record[c])))
        };
        let x = x_cols
            .iter()
            .map(|&c| parse_num(&record[c]).ok_or_else(|| bad_cell(path, r, &header[c], &record[c])))
            .collect::<Result<Vec<_>>>()?;
        instances.push(Instance::new(x).map_err(|e| Error::data(path, format!("row {}: {e}", r + 2)))?);
        rows.push((int(c_true)?, int(c_lo)?, int(c_hi)?, int(c_part)? != 0));
    }
    let k = k.unwrap_or_else(|| rows.iter().map(|r| r.0.max(r.2)).max().unwrap_or(2).max(2));
    let mut ranks = Vec::with_capacity(rows.len());
    let mut intervals = Vec::with_capacity(rows.len());
    let mut partial = Vec::with_capacity(rows.len());
    for (r, &(y, lo, hi, p)) in rows.iter().enumerate() {
        ranks.push(y);
        intervals.push(
            IntervalLabel::new(lo, hi, k).map_err(|e| Error::data(path, format!("row {}: {e}", r + 2)))?,
        );
        partial.push(p);
    }
    LabeledDataset::new(instances, ranks, intervals, partial, k).map_err(|e| Error::data(path, e.to_string()))
}

fn parse_num(cell: &str) -> Option<f64> {
    cell.trim().parse::<f64>().ok().filter(|v| v.is_finite())
}

fn bad_cell(path: &Path, row: usize, column: &str, cell: &str) -> Error {
    Error::data(
        path,
        format!("row {}, column '{column}': non-numeric value '{cell}'", row + 2),
    )
}

/// How a numeric target is cut into ranks.
#[derive(Clone, Debug, PartialEq)]
pub enum Binning {
    /// `n` equal-width bins spanning the observed target range.
    EqualWidth(usize),
    /// Rank is `1 + #{cut : value > cut}`.
    Cuts(Vec<f64>),
}

impl Binning {
    /// Ring-count bins 1-7, 8-9, 10-12, 13-29.
    pub fn abalone() -> Self {
        Binning::Cuts(vec![7.0, 9.0, 12.0])
    }

    /// Ten equal-width bins of the total UPDRS score.
    pub fn parkinsons() -> Self {
        Binning::EqualWidth(10)
    }

    pub fn k(&self) -> usize {
        match self {
            Binning::EqualWidth(n) => *n,
            Binning::Cuts(c) => c.len() + 1,
        }
    }

    fn assign(&self, values: &[f64]) -> Result<Vec<usize>> {
        match self {
            Binning::EqualWidth(n) => {
                let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
                let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                if !(hi > lo) {
                    return Err(Error::param("target is constant; cannot bin"));
                }
                let width = (hi - lo) / *n as f64;
                Ok(values
                    .iter()
                    .map(|v| (((v - lo) / width).floor() as usize + 1).min(*n))
                    .collect())
            }
            Binning::Cuts(cuts) => Ok(values
                .iter()
                .map(|&v| 1 + cuts.iter().filter(|&&c| v > c).count())
                .collect()),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum CategoricalPolicy {
    #[default]
    Drop,
    OneHot,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LoadOptions {
    pub target_column: String,
    pub binning: Binning,
    /// Standardize each feature to mean 0, standard deviation 1.
    pub normalize: bool,
    /// Columns holding category names rather than numbers.
    pub categorical: Vec<String>,
    pub categorical_policy: CategoricalPolicy,
}

impl LoadOptions {
    pub fn new(target_column: impl Into<String>, binning: Binning) -> Self {
        LoadOptions {
            target_column: target_column.into(),
            binning,
            normalize: false,
            categorical: Vec::new(),
            categorical_policy: CategoricalPolicy::Drop,
        }
    }
}

#[derive(Clone, Debug)]
pub struct LoadedCsv {
    pub dataset: LabeledDataset,
    pub feature_names: Vec<String>,
    /// Non-fatal findings, e.g. empty bins.
    pub warnings: Vec<String>,
}

/// Reads a headed CSV of numeric features plus a numeric target and bins the
/// target into ranks. All labels in the result are exact.
pub fn load_ordinal_csv(path: &Path, opts: &LoadOptions) -> Result<LoadedCsv> {
    let mut reader = ::csv::Reader::from_path(path).map_err(|e| Error::data(path, e.to_string()))?;
    let header: Vec<String> = reader.headers()?.iter().map(|h| h.trim().to_string()).collect();
    let target = header
        .iter()
        .position(|h| *h == opts.target_column)
        .ok_or_else(|| Error::data(path, format!("no column named '{}'", opts.target_column)))?;
    for name in &opts.categorical {
        if !header.contains(name) {
            return Err(Error::data(path, format!("no categorical column named '{name}'")));
        }
    }
    let records = reader.records().collect::<Result<Vec<_>, _>>()?;
    if records.is_empty() {
        return Err(Error::data(path, "no data rows"));
    }

    let mut targets = Vec::with_capacity(records.len());
    for (r, rec) in records.iter().enumerate() {
        targets.push(parse_num(&rec[target]).ok_or_else(|| bad_cell(path, r, &header[target], &rec[target]))?);
    }

    // Column-major feature matrix.
    let mut names = Vec::new();
    let mut columns: Vec<Vec<f64>> = Vec::new();
    for (c, name) in header.iter().enumerate() {
        if c == target {
            continue;
        }
        if opts.categorical.contains(name) {
            if opts.categorical_policy == CategoricalPolicy::OneHot {
                let levels: BTreeSet<&str> = records.iter().map(|r| r[c].trim()).collect();
                let slot: HashMap<&str, usize> = levels.iter().enumerate().map(|(i, l)| (*l, i)).collect();
                let base = columns.len();
                for level in &levels {
                    names.push(format!("{name}={level}"));
                    columns.push(vec![0.0; records.len()]);
                }
                for (r, rec) in records.iter().enumerate() {
                    columns[base + slot[rec[c].trim()]][r] = 1.0;
                }
            }
            continue;
        }
        let col = records
            .iter()
            .enumerate()
            .map(|(r, rec)| parse_num(&rec[c]).ok_or_else(|| bad_cell(path, r, name, &rec[c])))
            .collect::<Result<Vec<_>>>()?;
        names.push(name.clone());
        columns.push(col);
    }
    if columns.is_empty() {
        return Err(Error::data(path, "no feature columns"));
    }
    if opts.normalize {
        columns.iter_mut().for_each(|c| standardize(c));
    }

    let k = opts.binning.k();
    if k < 2 {
        return Err(Error::param("binning must produce at least 2 ranks"));
    }
    let ranks = opts.binning.assign(&targets)?;
    let mut counts = vec![0usize; k];
    for &r in &ranks {
        counts[r - 1] += 1;
    }
    let warnings: Vec<String> = counts
        .iter()
        .enumerate()
        .filter(|(_, &n)| n == 0)
        .map(|(i, _)| format!("rank {} has no examples", i + 1))
        .collect();
    for w in &warnings {
        log::warn!("{}: {w}", path.display());
    }

    let instances = (0..records.len())
        .map(|r| Instance::new(columns.iter().map(|c| c[r]).collect()))
        .collect::<Result<Vec<_>>>()?;
    Ok(LoadedCsv {
        dataset: LabeledDataset::exact(instances, ranks, k)?,
        feature_names: names,
        warnings,
    })
}

/// Population standardization; constant columns become all zeros.
fn standardize(col: &mut [f64]) {
    let n = col.len() as f64;
    let mean = col.iter().sum::<f64>() / n;
    let var = col.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    let sd = var.sqrt();
    for v in col.iter_mut() {
        *v = if sd > 0.0 { (*v - mean) / sd } else { 0.0 };
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datagen::synth_generate;

    fn temp_csv(content: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(content.as_bytes()).unwrap();
        f
    }

    #[test]
    fn abalone_bins() {
        let ranks = Binning::abalone().assign(&[1.0, 7.0, 8.0, 9.0, 10.0, 12.0, 13.0, 29.0]).unwrap();
        assert_eq!(ranks, vec![1, 1, 2, 2, 3, 3, 4, 4]);
    }

    #[test]
    fn equal_width_bins_cover_range() {
        let vals: Vec<f64> = (0..=48).map(|v| 7.0 + v as f64).collect();
        let ranks = Binning::parkinsons().assign(&vals).unwrap();
        assert_eq!(ranks[0], 1);
        assert_eq!(*ranks.last().unwrap(), 10);
        assert!(ranks.windows(2).all(|p| p[0] <= p[1]));
        assert!(Binning::EqualWidth(3).assign(&[1.0, 1.0]).is_err());
    }

    #[test]
    fn load_with_categorical_and_normalization() {
        let f = temp_csv("sex,len,flat,rings\nM,0.5,3,8\nF,0.7,3,13\nI,0.3,3,2\nM,0.5,3,10\n");
        let mut opts = LoadOptions::new("rings", Binning::abalone());
        opts.categorical = vec!["sex".into()];
        opts.normalize = true;
        let loaded = load_ordinal_csv(f.path(), &opts).unwrap();
        assert_eq!(loaded.feature_names, vec!["len", "flat"]);
        assert_eq!(loaded.dataset.true_ranks(), &[2, 4, 1, 3]);
        assert!(loaded.warnings.is_empty());
        // constant column maps to zeros
        assert!(loaded.dataset.instances().iter().all(|x| x[1] == 0.0));
        let mean: f64 = loaded.dataset.instances().iter().map(|x| x[0]).sum::<f64>() / 4.0;
        assert!(mean.abs() < 1e-12);

        opts.categorical_policy = CategoricalPolicy::OneHot;
        opts.normalize = false;
        let loaded = load_ordinal_csv(f.path(), &opts).unwrap();
        assert_eq!(loaded.feature_names, vec!["sex=F", "sex=I", "sex=M", "len", "flat"]);
        assert_eq!(&*loaded.dataset.instances()[0], &[0.0, 0.0, 1.0, 0.5, 3.0]);
    }

    #[test]
    fn load_errors_and_warnings() {
        let f = temp_csv("a,rings\n1,8\nx,9\n");
        let opts = LoadOptions::new("rings", Binning::abalone());
        assert!(matches!(load_ordinal_csv(f.path(), &opts), Err(Error::Data { .. })));
        assert!(load_ordinal_csv(Path::new("/nonexistent/file.csv"), &opts).is_err());
        let f = temp_csv("a,rings\n1,8\n2,9\n");
        let loaded = load_ordinal_csv(f.path(), &opts).unwrap();
        assert_eq!(loaded.warnings.len(), 3);
        let missing = LoadOptions::new("age", Binning::abalone());
        assert!(load_ordinal_csv(f.path(), &missing).is_err());
    }

    #[test]
    fn dataset_file_roundtrip() {
        let ds = synth_generate(50, 2).unwrap();
        let f = tempfile::NamedTempFile::new().unwrap();
        write_dataset(&ds, f.reopen().unwrap()).unwrap();
        let back = read_dataset(f.path(), Some(5)).unwrap();
        assert_eq!(back, ds);
        let text = std::fs::read_to_string(f.path()).unwrap();
        assert!(text.starts_with("x_1,x_2,y_true,y_lo,y_hi,is_partial\n"));
    }
}
