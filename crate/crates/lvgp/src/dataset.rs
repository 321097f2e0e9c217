//! Multi-source tabular data: schema, CSV ingestion, standardization and
//! seeded splitting.
//!
//! A dataset holds numeric input columns, optional categorical input
//! columns, an optional source column (one more categorical variable that
//! tags where each row came from) and a scalar response. Everything is
//! immutable after construction; splits return new datasets.

use std::collections::HashSet;
use std::fmt::Write as _;
use std::path::Path;

use rand::seq::SliceRandom;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A categorical input column and the levels registered for it.
///
/// Levels not declared up front are auto-registered during ingestion in
/// first-appearance order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CategoricalVar {
    pub name: String,
    pub levels: Vec<String>,
}

impl CategoricalVar {
    pub fn new(name: impl Into<String>) -> Self {
        CategoricalVar {
            name: name.into(),
            levels: Vec::new(),
        }
    }

    pub fn with_levels<S: Into<String>>(name: impl Into<String>, levels: Vec<S>) -> Self {
        CategoricalVar {
            name: name.into(),
            levels: levels.into_iter().map(Into::into).collect(),
        }
    }

    pub fn level_index(&self, label: &str) -> Option<usize> {
        self.levels.iter().position(|l| l == label)
    }

    fn register(&mut self, label: &str) -> usize {
        match self.level_index(label) {
            Some(i) => i,
            None => {
                self.levels.push(label.to_string());
                self.levels.len() - 1
            }
        }
    }
}

/// Column layout of a multi-source dataset.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VariableSchema {
    pub numeric_inputs: Vec<String>,
    pub categorical_inputs: Vec<CategoricalVar>,
    /// The source column, when the data is tagged by origin. Treated as
    /// one additional categorical variable by the latent-variable model.
    pub source: Option<CategoricalVar>,
    pub response_column: String,
}

impl VariableSchema {
    pub fn new(
        numeric_inputs: Vec<String>,
        categorical_inputs: Vec<CategoricalVar>,
        source_column: Option<&str>,
        response_column: &str,
    ) -> Result<Self> {
        let schema = VariableSchema {
            numeric_inputs,
            categorical_inputs,
            source: source_column.map(CategoricalVar::new),
            response_column: response_column.to_string(),
        };
        schema.validate()?;
        Ok(schema)
    }

    pub fn validate(&self) -> Result<()> {
        let mut seen = HashSet::new();
        for name in self.column_names() {
            if name.is_empty() {
                return Err(Error::Schema("empty column name".into()));
            }
            if !seen.insert(name.clone()) {
                return Err(Error::Schema(format!("duplicate column name '{name}'")));
            }
        }
        if self.numeric_inputs.is_empty() && self.categorical_inputs.is_empty() && self.source.is_none() {
            return Err(Error::Schema("schema declares no input columns".into()));
        }
        Ok(())
    }

    /// Number of numeric input columns.
    pub fn n_numeric(&self) -> usize {
        self.numeric_inputs.len()
    }

    /// Number of categorical input columns, not counting the source.
    pub fn n_categorical(&self) -> usize {
        self.categorical_inputs.len()
    }

    /// Categorical variables in model order: declared inputs first, then
    /// the source column last.
    pub fn categorical_with_source(&self) -> Vec<&CategoricalVar> {
        let mut vars: Vec<&CategoricalVar> = self.categorical_inputs.iter().collect();
        if let Some(src) = &self.source {
            vars.push(src);
        }
        vars
    }

    pub fn source_column(&self) -> Option<&str> {
        self.source.as_ref().map(|s| s.name.as_str())
    }

    fn column_names(&self) -> Vec<String> {
        let mut names: Vec<String> = self.numeric_inputs.clone();
        names.extend(self.categorical_inputs.iter().map(|c| c.name.clone()));
        if let Some(src) = &self.source {
            names.push(src.name.clone());
        }
        names.push(self.response_column.clone());
        names
    }

    /// Parse a schema from key-value config text.
    ///
    /// ```text
    /// numeric_inputs = x, y
    /// categorical_inputs =
    /// source_column = source
    /// response_column = z
    /// levels.source = Ground Source, Perturbed Source 1
    /// ```
    ///
    /// `levels.<column>` lines pre-declare levels and are optional; lists
    /// are comma-separated, so level names must not contain commas.
    pub fn from_config_str(text: &str) -> Result<Self> {
        let mut numeric: Vec<String> = Vec::new();
        let mut categorical_names: Vec<String> = Vec::new();
        let mut source_column: Option<String> = None;
        let mut response_column: Option<String> = None;
        let mut level_decls: Vec<(String, Vec<String>)> = Vec::new();

        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(Error::Schema(format!(
                    "config line {} is not 'key = value': '{line}'",
                    lineno + 1
                )));
            };
            let key = key.trim();
            let value = value.trim();
            let list = |v: &str| -> Vec<String> {
                v.split(',')
                    .map(str::trim)
                    .filter(|s| !s.is_empty())
                    .map(String::from)
                    .collect()
            };
            match key {
                "numeric_inputs" => numeric = list(value),
                "categorical_inputs" => categorical_names = list(value),
                "source_column" => {
                    source_column = (!value.is_empty()).then(|| value.to_string());
                }
                "response_column" => response_column = Some(value.to_string()),
                _ => {
                    if let Some(col) = key.strip_prefix("levels.") {
                        level_decls.push((col.trim().to_string(), list(value)));
                    } else {
                        return Err(Error::Schema(format!("unknown config key '{key}'")));
                    }
                }
            }
        }

        let response_column = response_column
            .ok_or_else(|| Error::Schema("config is missing 'response_column'".into()))?;
        let mut schema = VariableSchema::new(
            numeric,
            categorical_names.into_iter().map(CategoricalVar::new).collect(),
            source_column.as_deref(),
            &response_column,
        )?;
        for (col, levels) in level_decls {
            let var = schema
                .categorical_inputs
                .iter_mut()
                .find(|c| c.name == col)
                .or_else(|| schema.source.as_mut().filter(|s| s.name == col))
                .ok_or_else(|| {
                    Error::Schema(format!("levels declared for unknown categorical column '{col}'"))
                })?;
            var.levels = levels;
        }
        Ok(schema)
    }

    pub fn to_config_string(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "numeric_inputs = {}", self.numeric_inputs.join(", "));
        let cat_names: Vec<&str> = self.categorical_inputs.iter().map(|c| c.name.as_str()).collect();
        let _ = writeln!(out, "categorical_inputs = {}", cat_names.join(", "));
        let _ = writeln!(
            out,
            "source_column = {}",
            self.source_column().unwrap_or_default()
        );
        let _ = writeln!(out, "response_column = {}", self.response_column);
        for var in self.categorical_with_source() {
            if !var.levels.is_empty() {
                let _ = writeln!(out, "levels.{} = {}", var.name, var.levels.join(", "));
            }
        }
        out
    }

    pub fn load_config(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_config_str(&text)
    }

    pub fn save_config(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_config_string()).map_err(|e| Error::io(path, e))
    }
}

/// Rows of numeric inputs, categorical inputs, an optional source label and
/// a scalar response. Stored column-major.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiSourceDataset {
    schema: VariableSchema,
    /// One vector per numeric input column, each of length `n`.
    numeric: Vec<Vec<f64>>,
    /// One vector per categorical input column; entries are level indices.
    categorical: Vec<Vec<usize>>,
    /// Source level index per row; empty when the schema has no source.
    source: Vec<usize>,
    response: Vec<f64>,
}

impl MultiSourceDataset {
    /// Build a dataset from label-valued columns, auto-registering any
    /// levels the schema did not declare (first-appearance order).
    pub fn from_columns(
        mut schema: VariableSchema,
        numeric: Vec<Vec<f64>>,
        categorical: Vec<Vec<String>>,
        source: Option<Vec<String>>,
        response: Vec<f64>,
    ) -> Result<Self> {
        schema.validate()?;
        let n = response.len();
        if n == 0 {
            return Err(Error::EmptyDataset("dataset has no rows".into()));
        }
        if numeric.len() != schema.n_numeric() || categorical.len() != schema.n_categorical() {
            return Err(Error::Schema("column count does not match schema".into()));
        }
        for col in &numeric {
            if col.len() != n {
                return Err(Error::Schema("numeric column length mismatch".into()));
            }
        }
        let mut cat_idx = Vec::with_capacity(categorical.len());
        for (var, col) in schema.categorical_inputs.iter_mut().zip(&categorical) {
            if col.len() != n {
                return Err(Error::Schema("categorical column length mismatch".into()));
            }
            cat_idx.push(col.iter().map(|label| var.register(label)).collect());
        }
        let source_idx = match (&mut schema.source, source) {
            (Some(var), Some(col)) => {
                if col.len() != n {
                    return Err(Error::Schema("source column length mismatch".into()));
                }
                col.iter().map(|label| var.register(label)).collect()
            }
            (None, None) => Vec::new(),
            (Some(_), None) => {
                return Err(Error::Schema("schema declares a source column but no source values given".into()))
            }
            (None, Some(_)) => {
                return Err(Error::Schema("source values given but schema declares no source column".into()))
            }
        };
        Ok(MultiSourceDataset {
            schema,
            numeric,
            categorical: cat_idx,
            source: source_idx,
            response,
        })
    }

    /// Read a dataset from a headered CSV file. Column order in the file is
    /// free; columns are matched to the schema by header name.
    pub fn load_csv(path: &Path, schema: &VariableSchema) -> Result<Self> {
        schema.validate()?;
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(true)
            .trim(csv::Trim::All)
            .from_path(path)
            .map_err(|e| match e.kind() {
                csv::ErrorKind::Io(_) => {
                    Error::io(path, std::io::Error::other(e.to_string()))
                }
                _ => Error::Parse {
                    row: 0,
                    message: e.to_string(),
                },
            })?;

        let headers: Vec<String> = reader
            .headers()
            .map_err(|e| Error::Parse {
                row: 0,
                message: e.to_string(),
            })?
            .iter()
            .map(String::from)
            .collect();
        if headers.is_empty() {
            return Err(Error::EmptyDataset(format!("{} has no header row", path.display())));
        }
        let col = |name: &str| -> Result<usize> {
            headers
                .iter()
                .position(|h| h == name)
                .ok_or_else(|| Error::Schema(format!("missing column '{name}' in {}", path.display())))
        };

        let numeric_cols: Vec<usize> = schema
            .numeric_inputs
            .iter()
            .map(|n| col(n))
            .collect::<Result<_>>()?;
        let cat_cols: Vec<usize> = schema
            .categorical_inputs
            .iter()
            .map(|c| col(&c.name))
            .collect::<Result<_>>()?;
        let source_col = schema.source_column().map(col).transpose()?;
        let response_col = col(&schema.response_column)?;

        let mut numeric: Vec<Vec<f64>> = vec![Vec::new(); numeric_cols.len()];
        let mut categorical: Vec<Vec<String>> = vec![Vec::new(); cat_cols.len()];
        let mut source: Vec<String> = Vec::new();
        let mut response: Vec<f64> = Vec::new();

        for (row_idx, record) in reader.records().enumerate() {
            let row = row_idx + 1;
            let record = record.map_err(|e| Error::Parse {
                row,
                message: e.to_string(),
            })?;
            let cell = |i: usize| -> Result<&str> {
                record.get(i).ok_or(Error::Parse {
                    row,
                    message: format!("row has {} fields, expected at least {}", record.len(), i + 1),
                })
            };
            let parse_num = |i: usize, name: &str| -> Result<f64> {
                cell(i)?.parse::<f64>().map_err(|_| Error::Parse {
                    row,
                    message: format!("cannot parse '{}' in column '{name}' as a number", record.get(i).unwrap_or("")),
                })
            };
            for (k, &i) in numeric_cols.iter().enumerate() {
                numeric[k].push(parse_num(i, &schema.numeric_inputs[k])?);
            }
            for (k, &i) in cat_cols.iter().enumerate() {
                categorical[k].push(cell(i)?.to_string());
            }
            if let Some(i) = source_col {
                source.push(cell(i)?.to_string());
            }
            response.push(parse_num(response_col, &schema.response_column)?);
        }

        if response.is_empty() {
            return Err(Error::EmptyDataset(format!("{} contains no data rows", path.display())));
        }
        Self::from_columns(
            schema.clone(),
            numeric,
            categorical,
            source_col.map(|_| source),
            response,
        )
    }

    /// Write the dataset as CSV with columns in schema order: numeric
    /// inputs, categorical inputs, source, response.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut writer = csv::Writer::from_path(path).map_err(|e| {
            Error::io(path, std::io::Error::other(e.to_string()))
        })?;
        let mut header: Vec<String> = self.schema.numeric_inputs.clone();
        header.extend(self.schema.categorical_inputs.iter().map(|c| c.name.clone()));
        if let Some(src) = self.schema.source_column() {
            header.push(src.to_string());
        }
        header.push(self.schema.response_column.clone());
        writer
            .write_record(&header)
            .map_err(|e| Error::io(path, std::io::Error::other(e.to_string())))?;
        for row in 0..self.n() {
            let mut record: Vec<String> = Vec::with_capacity(header.len());
            for col in &self.numeric {
                record.push(format!("{}", col[row]));
            }
            for (var, col) in self.schema.categorical_inputs.iter().zip(&self.categorical) {
                record.push(var.levels[col[row]].clone());
            }
            if let Some(var) = &self.schema.source {
                record.push(var.levels[self.source[row]].clone());
            }
            record.push(format!("{}", self.response[row]));
            writer
                .write_record(&record)
                .map_err(|e| Error::io(path, std::io::Error::other(e.to_string())))?;
        }
        writer
            .flush()
            .map_err(|e| Error::io(path, e))
    }

    pub fn n(&self) -> usize {
        self.response.len()
    }

    pub fn schema(&self) -> &VariableSchema {
        &self.schema
    }

    pub fn response(&self) -> &[f64] {
        &self.response
    }

    pub fn numeric_column(&self, idx: usize) -> &[f64] {
        &self.numeric[idx]
    }

    /// Numeric input values of one row, in schema order.
    pub fn numeric_row(&self, row: usize) -> Vec<f64> {
        self.numeric.iter().map(|col| col[row]).collect()
    }

    /// Level indices of one row over categorical inputs then source.
    pub fn categorical_row(&self, row: usize) -> Vec<usize> {
        let mut out: Vec<usize> = self.categorical.iter().map(|col| col[row]).collect();
        if !self.source.is_empty() {
            out.push(self.source[row]);
        }
        out
    }

    /// Level labels of one row over categorical inputs then source.
    pub fn level_row(&self, row: usize) -> Vec<String> {
        let vars = self.schema.categorical_with_source();
        self.categorical_row(row)
            .into_iter()
            .zip(vars)
            .map(|(idx, var)| var.levels[idx].clone())
            .collect()
    }

    pub fn source_label(&self, row: usize) -> Option<&str> {
        let var = self.schema.source.as_ref()?;
        Some(&var.levels[self.source[row]])
    }

    /// Row indices carrying the given source label.
    pub fn rows_of_source(&self, label: &str) -> Result<Vec<usize>> {
        let var = self
            .schema
            .source
            .as_ref()
            .ok_or_else(|| Error::Schema("dataset has no source column".into()))?;
        let idx = var.level_index(label).ok_or_else(|| Error::UnknownLevel {
            variable: var.name.clone(),
            level: label.to_string(),
        })?;
        Ok((0..self.n()).filter(|&r| self.source[r] == idx).collect())
    }

    /// (label, row count) per registered source level, in registry order.
    pub fn per_source_counts(&self) -> Vec<(String, usize)> {
        match &self.schema.source {
            None => Vec::new(),
            Some(var) => {
                let mut counts = vec![0usize; var.levels.len()];
                for &s in &self.source {
                    counts[s] += 1;
                }
                var.levels
                    .iter()
                    .cloned()
                    .zip(counts)
                    .collect()
            }
        }
    }

    /// New dataset containing the given rows (callers pass indices in the
    /// order they want preserved). The level registries are kept as-is.
    pub fn subset(&self, indices: &[usize]) -> Self {
        MultiSourceDataset {
            schema: self.schema.clone(),
            numeric: self
                .numeric
                .iter()
                .map(|col| indices.iter().map(|&i| col[i]).collect())
                .collect(),
            categorical: self
                .categorical
                .iter()
                .map(|col| indices.iter().map(|&i| col[i]).collect())
                .collect(),
            source: if self.source.is_empty() {
                Vec::new()
            } else {
                indices.iter().map(|&i| self.source[i]).collect()
            },
            response: indices.iter().map(|&i| self.response[i]).collect(),
        }
    }

    /// Keep only rows whose source label is in `keep`, pruning the source
    /// registry to the survivors so the result can be refitted. Row order
    /// and registry order are preserved.
    pub fn retain_sources(&self, keep: &[String]) -> Result<Self> {
        let var = self
            .schema
            .source
            .as_ref()
            .ok_or_else(|| Error::Schema("dataset has no source column".into()))?;
        for label in keep {
            if var.level_index(label).is_none() {
                return Err(Error::UnknownLevel {
                    variable: var.name.clone(),
                    level: label.clone(),
                });
            }
        }
        let kept_levels: Vec<String> = var
            .levels
            .iter()
            .filter(|l| keep.contains(l))
            .cloned()
            .collect();
        let remap: Vec<Option<usize>> = var
            .levels
            .iter()
            .map(|l| kept_levels.iter().position(|k| k == l))
            .collect();
        let rows: Vec<usize> = (0..self.n())
            .filter(|&r| remap[self.source[r]].is_some())
            .collect();
        if rows.is_empty() {
            return Err(Error::EmptyDataset("no rows left after source filtering".into()));
        }
        let mut out = self.subset(&rows);
        out.source = out.source.iter().map(|&s| remap[s].unwrap()).collect();
        out.schema.source = Some(CategoricalVar {
            name: var.name.clone(),
            levels: kept_levels,
        });
        Ok(out)
    }

    /// Relabel the rows of one source half-and-half into `<source>_1` and
    /// `<source>_2` (seeded random assignment; the first half rounds up).
    /// The emptied original level is replaced in the registry by the two
    /// new labels so the result can be refitted directly.
    pub fn split_source(&self, source: &str, seed: u64) -> Result<Self> {
        let var = self
            .schema
            .source
            .as_ref()
            .ok_or_else(|| Error::Schema("dataset has no source column".into()))?;
        let level = var.level_index(source).ok_or_else(|| Error::UnknownLevel {
            variable: var.name.clone(),
            level: source.to_string(),
        })?;
        let rows: Vec<usize> = (0..self.n()).filter(|&r| self.source[r] == level).collect();
        if rows.len() < 2 {
            return Err(Error::InvalidArgument(format!(
                "source '{source}' has {} rows; need at least 2 to split",
                rows.len()
            )));
        }

        let mut shuffled = rows.clone();
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        shuffled.shuffle(&mut rng);
        let first_half: HashSet<usize> = shuffled[..rows.len().div_ceil(2)].iter().copied().collect();

        let mut schema = self.schema.clone();
        let src = schema.source.as_mut().unwrap();
        let label_1 = format!("{source}_1");
        let label_2 = format!("{source}_2");
        src.levels.splice(level..=level, [label_1, label_2]);
        let (idx_1, idx_2) = (level, level + 1);

        let source_idx = self
            .source
            .iter()
            .enumerate()
            .map(|(row, &s)| {
                if s == level {
                    if first_half.contains(&row) {
                        idx_1
                    } else {
                        idx_2
                    }
                } else if s > level {
                    s + 1
                } else {
                    s
                }
            })
            .collect();

        Ok(MultiSourceDataset {
            schema,
            numeric: self.numeric.clone(),
            categorical: self.categorical.clone(),
            source: source_idx,
            response: self.response.clone(),
        })
    }

    /// Map numeric inputs to [0,1] per column and the response to zero
    /// mean and unit variance (population convention), using statistics of
    /// this dataset. Returns the standardized copy and the transformer.
    pub fn standardize(&self) -> Result<(Self, Standardizer)> {
        if self.n() < 2 {
            return Err(Error::InvalidArgument(format!(
                "standardize needs at least 2 rows, got {}",
                self.n()
            )));
        }
        let standardizer = Standardizer::fit(self);
        let mut out = self.clone();
        for (idx, col) in out.numeric.iter_mut().enumerate() {
            for v in col.iter_mut() {
                *v = standardizer.scale_numeric(idx, *v);
            }
        }
        for y in out.response.iter_mut() {
            *y = standardizer.standardize_response(*y);
        }
        Ok((out, standardizer))
    }

    /// Seeded stratified k-fold split: per source (registry order), rows
    /// are shuffled and dealt round-robin to folds, with the dealing
    /// position carried over between sources so overall fold sizes differ
    /// by at most one. Returns `(train, validation)` pairs.
    pub fn stratified_kfold(&self, k: usize, seed: u64) -> Result<Vec<(Self, Self)>> {
        if k < 2 {
            return Err(Error::InvalidArgument(format!("k must be at least 2, got {k}")));
        }
        if k > self.n() {
            return Err(Error::InvalidArgument(format!(
                "k = {k} exceeds the {} available rows",
                self.n()
            )));
        }
        let strata: Vec<Vec<usize>> = match &self.schema.source {
            Some(var) => {
                let mut strata = vec![Vec::new(); var.levels.len()];
                for (row, &s) in self.source.iter().enumerate() {
                    strata[s].push(row);
                }
                for (level, stratum) in strata.iter().enumerate() {
                    if stratum.is_empty() {
                        return Err(Error::InvalidArgument(format!(
                            "source '{}' has no rows",
                            var.levels[level]
                        )));
                    }
                }
                strata
            }
            None => vec![(0..self.n()).collect()],
        };

        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        let mut fold_rows: Vec<Vec<usize>> = vec![Vec::new(); k];
        let mut deal = 0usize;
        for stratum in strata {
            let mut rows = stratum;
            rows.shuffle(&mut rng);
            for row in rows {
                fold_rows[deal % k].push(row);
                deal += 1;
            }
        }

        let pairs = (0..k)
            .map(|fold| {
                let mut val = fold_rows[fold].clone();
                val.sort_unstable();
                let val_set: HashSet<usize> = val.iter().copied().collect();
                let train: Vec<usize> = (0..self.n()).filter(|r| !val_set.contains(r)).collect();
                (self.subset(&train), self.subset(&val))
            })
            .collect();
        Ok(pairs)
    }

    /// Set aside `n_test` seeded-sampled rows of the named source as a
    /// test set; the remainder of all rows becomes the training set. Both
    /// halves preserve original row order.
    pub fn holdout_from_source(
        &self,
        source: &str,
        n_test: usize,
        seed: u64,
    ) -> Result<(Self, Self)> {
        let rows = self.rows_of_source(source)?;
        if n_test > rows.len() {
            return Err(Error::InvalidArgument(format!(
                "requested {n_test} test rows but source '{source}' has only {}",
                rows.len()
            )));
        }
        let mut shuffled = rows;
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        shuffled.shuffle(&mut rng);
        let chosen: HashSet<usize> = shuffled[..n_test].iter().copied().collect();
        let test: Vec<usize> = (0..self.n()).filter(|r| chosen.contains(r)).collect();
        let train: Vec<usize> = (0..self.n()).filter(|r| !chosen.contains(r)).collect();
        Ok((self.subset(&train), self.subset(&test)))
    }
}

/// Read prediction inputs from a headered CSV: numeric columns plus, when
/// the schema declares them, categorical and source labels. A response
/// column is not required and is ignored if present. Returns one
/// `(numeric values, level labels)` pair per row, labels ordered as
/// categorical inputs then source.
pub fn load_points_csv(
    path: &Path,
    schema: &VariableSchema,
) -> Result<Vec<(Vec<f64>, Vec<String>)>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| Error::io(path, std::io::Error::other(e.to_string())))?;
    let headers: Vec<String> = reader
        .headers()
        .map_err(|e| Error::Parse {
            row: 0,
            message: e.to_string(),
        })?
        .iter()
        .map(String::from)
        .collect();
    let col = |name: &str| -> Result<usize> {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::Schema(format!("missing column '{name}' in {}", path.display())))
    };
    let numeric_cols: Vec<usize> = schema
        .numeric_inputs
        .iter()
        .map(|n| col(n))
        .collect::<Result<_>>()?;
    let level_cols: Vec<usize> = schema
        .categorical_with_source()
        .iter()
        .map(|c| col(&c.name))
        .collect::<Result<_>>()?;

    let mut out = Vec::new();
    for (idx, record) in reader.records().enumerate() {
        let row = idx + 1;
        let record = record.map_err(|e| Error::Parse {
            row,
            message: e.to_string(),
        })?;
        let mut numeric = Vec::with_capacity(numeric_cols.len());
        for (k, &i) in numeric_cols.iter().enumerate() {
            let cell = record.get(i).unwrap_or("");
            numeric.push(cell.parse::<f64>().map_err(|_| Error::Parse {
                row,
                message: format!(
                    "cannot parse '{cell}' in column '{}' as a number",
                    schema.numeric_inputs[k]
                ),
            })?);
        }
        let levels = level_cols
            .iter()
            .map(|&i| record.get(i).unwrap_or("").to_string())
            .collect();
        out.push((numeric, levels));
    }
    if out.is_empty() {
        return Err(Error::EmptyDataset(format!(
            "{} contains no data rows",
            path.display()
        )));
    }
    Ok(out)
}

/// Affine transforms fitted on training data: per-column min/max scaling
/// for numeric inputs and mean/std standardization for the response.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    /// (min, max) per numeric column.
    pub numeric: Vec<(f64, f64)>,
    pub response_mean: f64,
    /// Population (divide-by-n) standard deviation of the response.
    pub response_std: f64,
    /// Set when the training response was constant; transforms then use a
    /// unit scale and fitted models short-circuit to the constant.
    pub constant_response: bool,
}

impl Standardizer {
    fn fit(data: &MultiSourceDataset) -> Self {
        let numeric = data
            .numeric
            .iter()
            .map(|col| {
                let min = col.iter().copied().fold(f64::INFINITY, f64::min);
                let max = col.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                (min, max)
            })
            .collect();
        let n = data.n() as f64;
        let mean = data.response.iter().sum::<f64>() / n;
        let var = data.response.iter().map(|y| (y - mean) * (y - mean)).sum::<f64>() / n;
        let std = var.sqrt();
        let constant = std <= 1e-12 * mean.abs().max(1.0);
        Standardizer {
            numeric,
            response_mean: mean,
            response_std: std,
            constant_response: constant,
        }
    }

    /// Scale one numeric value to the unit interval of its column.
    /// Constant columns map to 0.5; out-of-range inputs extrapolate.
    pub fn scale_numeric(&self, col: usize, v: f64) -> f64 {
        let (min, max) = self.numeric[col];
        if max > min {
            (v - min) / (max - min)
        } else {
            0.5
        }
    }

    pub fn unscale_numeric(&self, col: usize, v: f64) -> f64 {
        let (min, max) = self.numeric[col];
        min + v * (max - min)
    }

    fn scale(&self) -> f64 {
        if self.constant_response {
            1.0
        } else {
            self.response_std
        }
    }

    pub fn standardize_response(&self, y: f64) -> f64 {
        (y - self.response_mean) / self.scale()
    }

    pub fn unstandardize_mean(&self, y: f64) -> f64 {
        y * self.scale() + self.response_mean
    }

    /// Map a variance from standardized to original response units.
    pub fn unstandardize_variance(&self, var: f64) -> f64 {
        var * self.scale() * self.scale()
    }
}
