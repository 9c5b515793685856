use std::path::Path;

use csv::StringRecord;
use serde::{Deserialize, Serialize};

use super::{DataError, RawSample};

/// CSV header names for each sample field.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct ColumnMap {
    pub snr_tb_db: String,
    pub mcs_code_rate: String,
    pub mcs_modulation_index: String,
    pub v_rel_kmph: String,
    pub n_sub: String,
    pub n_dmrs: String,
    pub flag_urban: String,
    pub flag_nlos: String,
    pub bler: String,
}

impl Default for ColumnMap {
    fn default() -> Self {
        ColumnMap {
            snr_tb_db: "SNR_TB_dB".into(),
            mcs_code_rate: "MCS_Code_Rate".into(),
            mcs_modulation_index: "MCS_Modulation_Index".into(),
            v_rel_kmph: "v_rel_kmph".into(),
            n_sub: "N_sub".into(),
            n_dmrs: "N_DMRS".into(),
            flag_urban: "Flag_Urban".into(),
            flag_nlos: "Flag_NLOS".into(),
            bler: "BLER".into(),
        }
    }
}

impl ColumnMap {
    fn feature_columns(&self) -> [&str; 8] {
        [
            &self.snr_tb_db,
            &self.mcs_code_rate,
            &self.mcs_modulation_index,
            &self.v_rel_kmph,
            &self.n_sub,
            &self.n_dmrs,
            &self.flag_urban,
            &self.flag_nlos,
        ]
    }
}

#[derive(Debug, Clone)]
pub struct LoadOptions {
    pub columns: ColumnMap,
    /// Drop rows whose BLER is exactly zero.
    pub drop_zero_bler: bool,
    /// When false the BLER column may be absent (prediction inputs).
    pub require_bler: bool,
}

impl Default for LoadOptions {
    fn default() -> Self {
        LoadOptions {
            columns: ColumnMap::default(),
            drop_zero_bler: true,
            require_bler: true,
        }
    }
}

/// Parsed CSV: original header and records alongside validated samples
/// (one per kept record, same order).
#[derive(Debug, Clone)]
pub struct CsvTable {
    pub headers: StringRecord,
    pub records: Vec<StringRecord>,
    pub samples: Vec<RawSample>,
}

fn column_index(headers: &StringRecord, name: &str) -> Result<usize, DataError> {
    headers
        .iter()
        .position(|h| h.trim() == name)
        .ok_or_else(|| DataError::MissingColumn(name.to_string()))
}

fn parse_real(rec: &StringRecord, idx: usize, row: usize, column: &str) -> Result<f64, DataError> {
    let raw = rec.get(idx).unwrap_or("");
    raw.trim()
        .parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| DataError::Parse {
            row,
            column: column.to_string(),
            value: raw.to_string(),
        })
}

fn parse_count(rec: &StringRecord, idx: usize, row: usize, column: &str) -> Result<u32, DataError> {
    let v = parse_real(rec, idx, row, column)?;
    if v.fract() != 0.0 || v < 0.0 || v > u32::MAX as f64 {
        return Err(DataError::Parse {
            row,
            column: column.to_string(),
            value: rec[idx].to_string(),
        });
    }
    Ok(v as u32)
}

/// Reads and validates a sample CSV, keeping the original records.
/// Row numbers in errors are 1-based data rows (the header is row 0).
pub fn read_csv(path: &Path, opts: &LoadOptions) -> Result<CsvTable, DataError> {
    let file = std::fs::File::open(path).map_err(|source| DataError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(file);
    let headers = rdr.headers()?.clone();
    let cols = &opts.columns;
    let feature_idx = cols
        .feature_columns()
        .iter()
        .map(|name| column_index(&headers, name))
        .collect::<Result<Vec<_>, _>>()?;
    let bler_idx = match column_index(&headers, &cols.bler) {
        Ok(i) => Some(i),
        Err(e) if opts.require_bler => return Err(e),
        Err(_) => None,
    };
    let names = cols.feature_columns();
    let mut records = Vec::new();
    let mut samples = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let row = i + 1;
        let flag = |k: usize| -> Result<u8, DataError> {
            let v = parse_count(&rec, feature_idx[k], row, names[k])?;
            u8::try_from(v).map_err(|_| DataError::Invalid {
                row,
                message: format!("`{}` must be 0 or 1", names[k]),
            })
        };
        let sample = RawSample {
            snr_tb_db: parse_real(&rec, feature_idx[0], row, names[0])?,
            mcs_code_rate: parse_real(&rec, feature_idx[1], row, names[1])?,
            mcs_modulation_index: parse_count(&rec, feature_idx[2], row, names[2])?,
            v_rel_kmph: parse_real(&rec, feature_idx[3], row, names[3])?,
            n_sub: parse_count(&rec, feature_idx[4], row, names[4])?,
            n_dmrs: parse_count(&rec, feature_idx[5], row, names[5])?,
            flag_urban: flag(6)?,
            flag_nlos: flag(7)?,
            bler: match bler_idx {
                Some(b) => parse_real(&rec, b, row, &cols.bler)?,
                None => f64::NAN,
            },
        };
        sample
            .validate(bler_idx.is_some())
            .map_err(|message| DataError::Invalid { row, message })?;
        if opts.drop_zero_bler && bler_idx.is_some() && sample.bler == 0.0 {
            continue;
        }
        records.push(rec);
        samples.push(sample);
    }
    Ok(CsvTable {
        headers,
        records,
        samples,
    })
}

pub fn load_csv(path: &Path, opts: &LoadOptions) -> Result<Vec<RawSample>, DataError> {
    Ok(read_csv(path, opts)?.samples)
}

/// Writes samples under the given column names, shortest round-trip decimals.
pub fn write_csv(path: &Path, samples: &[RawSample], columns: &ColumnMap) -> Result<(), DataError> {
    let file = std::fs::File::create(path).map_err(|source| DataError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut w = csv::Writer::from_writer(file);
    let mut header: Vec<&str> = columns.feature_columns().to_vec();
    header.push(&columns.bler);
    w.write_record(&header)?;
    for s in samples {
        w.write_record([
            s.snr_tb_db.to_string(),
            s.mcs_code_rate.to_string(),
            s.mcs_modulation_index.to_string(),
            s.v_rel_kmph.to_string(),
            s.n_sub.to_string(),
            s.n_dmrs.to_string(),
            s.flag_urban.to_string(),
            s.flag_nlos.to_string(),
            s.bler.to_string(),
        ])?;
    }
    w.flush().map_err(|source| DataError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    Ok(())
}
