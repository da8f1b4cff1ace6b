//! Reading observations: `group,value` CSV or a pre-ranked label sequence.

use std::io::Read;
use std::path::Path;

use concordance::{arrangement_from_data, parse_pre_ranked, GroupedData, Record};

use crate::error::{CliError, Result};

/// Reads `path`, or standard input when the path is `-`.
pub fn read_source(path: &Path) -> Result<String> {
    let io = |source| CliError::Io {
        path: path.to_path_buf(),
        source,
    };
    if path == Path::new("-") {
        let mut text = String::new();
        std::io::stdin().read_to_string(&mut text).map_err(io)?;
        Ok(text)
    } else {
        std::fs::read_to_string(path).map_err(io)
    }
}

pub fn load(path: &Path, pre_ranked: bool) -> Result<GroupedData> {
    let text = read_source(path)?;
    if pre_ranked {
        Ok(parse_pre_ranked(&text)?)
    } else {
        parse_csv(&text)
    }
}

/// CSV with a `group,value` header. Blank lines are skipped; errors carry
/// the 1-based line number.
pub fn parse_csv(text: &str) -> Result<GroupedData> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(text.as_bytes());
    let header = reader.headers().map_err(|e| CliError::Input {
        line: 1,
        message: e.to_string(),
    })?;
    let columns: Vec<String> = header.iter().map(str::to_ascii_lowercase).collect();
    if columns != ["group", "value"] {
        return Err(CliError::Input {
            line: 1,
            message: format!("expected header `group,value`, found `{}`", columns.join(",")),
        });
    }
    let mut records = Vec::new();
    for row in reader.records() {
        let row = row.map_err(|e| CliError::Input {
            line: e.position().map_or(0, |p| p.line()),
            message: e.to_string(),
        })?;
        let line = row.position().map_or(0, |p| p.line());
        if row.iter().all(str::is_empty) {
            continue;
        }
        if row.len() != 2 {
            return Err(CliError::Input {
                line,
                message: format!("expected 2 fields, found {}", row.len()),
            });
        }
        let record = Record::parse(&row[0], &row[1]).map_err(|e| CliError::Input {
            line,
            message: e.to_string(),
        })?;
        records.push(record);
    }
    Ok(arrangement_from_data(&records)?)
}
