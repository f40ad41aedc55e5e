use std::collections::HashMap;
use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{ColumnKind, ColumnSchema, Schema, Table};
use crate::{Error, Result};

/// One `[[column]]` entry of a schema sidecar file.
#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ColumnEntry {
    name: String,
    kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    levels: Option<usize>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    target: bool,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    labels: Vec<String>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SchemaFile {
    column: Vec<ColumnEntry>,
}

/// Parse a schema sidecar:
///
/// ```toml
/// [[column]]
/// name = "age"
/// kind = "continuous"
///
/// [[column]]
/// name = "label"
/// kind = "categorical"
/// levels = 2
/// target = true
/// ```
pub fn parse_schema(text: &str) -> Result<Schema> {
    let file: SchemaFile =
        toml::from_str(text).map_err(|e| Error::Config(format!("schema sidecar: {e}")))?;
    let mut cols = Vec::with_capacity(file.column.len());
    for c in file.column {
        let kind = match c.kind.as_str() {
            "continuous" => {
                if c.levels.is_some() || !c.labels.is_empty() {
                    return Err(Error::Config(format!(
                        "continuous column `{}` cannot declare levels or labels",
                        c.name
                    )));
                }
                ColumnKind::Continuous
            }
            "categorical" => {
                let levels = c.levels.unwrap_or(c.labels.len());
                if levels < 2 {
                    return Err(Error::Config(format!(
                        "categorical column `{}` needs at least 2 levels",
                        c.name
                    )));
                }
                if !c.labels.is_empty() && c.labels.len() != levels {
                    return Err(Error::Config(format!(
                        "column `{}` lists {} labels for {levels} levels",
                        c.name,
                        c.labels.len()
                    )));
                }
                ColumnKind::Categorical { levels }
            }
            other => {
                return Err(Error::Config(format!(
                    "column `{}`: unknown kind `{other}` (expected `categorical` or `continuous`)",
                    c.name
                )))
            }
        };
        cols.push(ColumnSchema {
            name: c.name,
            kind,
            is_target: c.target,
            labels: c.labels,
            engineered: false,
        });
    }
    Schema::new(cols)
}

pub fn load_schema(path: impl AsRef<Path>) -> Result<Schema> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_schema(&text)
}

/// Render a schema as a sidecar file. Categorical columns always list their
/// labels, so a CSV written by [`write_csv`] reloads with the same codes.
pub fn schema_to_toml(schema: &Schema) -> String {
    let file = SchemaFile {
        column: schema
            .columns()
            .iter()
            .map(|c| ColumnEntry {
                name: c.name.clone(),
                kind: match c.kind {
                    ColumnKind::Continuous => "continuous".into(),
                    ColumnKind::Categorical { .. } => "categorical".into(),
                },
                levels: c.kind.levels(),
                target: c.is_target,
                // spelled out even when implicit, so codes survive a reload
                labels: (0..c.kind.levels().unwrap_or(0)).map(|l| c.label_of(l)).collect(),
            })
            .collect(),
    };
    toml::to_string(&file).expect("schema serializes")
}

pub fn load_csv(path: impl AsRef<Path>, schema: &Schema) -> Result<Table> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_csv(file, schema)
}

/// Read CSV data against `schema`. Header names must be exactly the schema's
/// names (any order). Categorical strings become level indices in order of
/// first appearance unless the schema already names its levels.
pub fn read_csv<R: Read>(reader: R, schema: &Schema) -> Result<Table> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(reader);
    let header = rdr
        .headers()
        .map_err(|e| Error::Ingest(format!("unreadable header: {e}")))?
        .clone();
    let cols = schema.columns();
    if header.len() != cols.len() {
        return Err(Error::Ingest(format!(
            "header has {} fields, schema has {} columns",
            header.len(),
            cols.len()
        )));
    }
    // position in the file of each schema column
    let mut file_pos = vec![usize::MAX; cols.len()];
    for (pos, name) in header.iter().enumerate() {
        let idx = schema.index_of(name.trim()).ok_or_else(|| {
            Error::Ingest(format!("header field `{name}` is not in the schema"))
        })?;
        if file_pos[idx] != usize::MAX {
            return Err(Error::Ingest(format!("header repeats `{name}`")));
        }
        file_pos[idx] = pos;
    }

    let mut level_maps: Vec<HashMap<String, usize>> = cols
        .iter()
        .map(|c| {
            c.labels
                .iter()
                .enumerate()
                .map(|(i, l)| (l.clone(), i))
                .collect()
        })
        .collect();
    let mut labels: Vec<Vec<String>> = cols.iter().map(|c| c.labels.clone()).collect();
    let mut columns: Vec<Vec<f64>> = vec![Vec::new(); cols.len()];

    for (row, record) in rdr.records().enumerate() {
        let record = record.map_err(|e| Error::Ingestion {
            row,
            column: String::new(),
            message: e.to_string(),
        })?;
        for (idx, c) in cols.iter().enumerate() {
            let cell = record.get(file_pos[idx]).unwrap_or("").trim();
            let err = |message: String| Error::Ingestion {
                row,
                column: c.name.clone(),
                message,
            };
            if cell.is_empty() || cell.eq_ignore_ascii_case("nan") || cell.eq_ignore_ascii_case("na")
            {
                return Err(err(format!("missing value `{cell}`")));
            }
            let value = match c.kind {
                ColumnKind::Continuous => {
                    let v: f64 = cell
                        .parse()
                        .map_err(|_| err(format!("cannot parse `{cell}` as a real number")))?;
                    if !v.is_finite() {
                        return Err(err(format!("non-finite value `{cell}`")));
                    }
                    v
                }
                ColumnKind::Categorical { levels } => {
                    let map = &mut level_maps[idx];
                    match map.get(cell) {
                        Some(&l) => l as f64,
                        None => {
                            if !c.labels.is_empty() {
                                return Err(err(format!("`{cell}` is not a declared label")));
                            }
                            let l = map.len();
                            if l >= levels {
                                return Err(err(format!(
                                    "more than {levels} distinct levels (new level `{cell}`)"
                                )));
                            }
                            map.insert(cell.to_string(), l);
                            labels[idx].push(cell.to_string());
                            l as f64
                        }
                    }
                }
            };
            columns[idx].push(value);
        }
    }

    let cols = cols
        .iter()
        .zip(labels)
        .map(|(c, l)| ColumnSchema {
            labels: l,
            ..c.clone()
        })
        .collect();
    Table::new(Schema::new(cols)?, columns)
}

/// Write a table as CSV. Reals use the shortest representation that parses
/// back to the same bits.
pub fn write_csv<W: Write>(table: &Table, writer: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    let cols = table.schema().columns();
    let to_err = |e: csv::Error| Error::Serde(e.to_string());
    wtr.write_record(cols.iter().map(|c| c.name.as_str()))
        .map_err(to_err)?;
    let mut rec = Vec::with_capacity(cols.len());
    for r in 0..table.n_rows() {
        rec.clear();
        for (i, c) in cols.iter().enumerate() {
            let v = table.column(i)[r];
            rec.push(match c.kind {
                ColumnKind::Categorical { .. } => c.label_of(v as usize),
                ColumnKind::Continuous => format!("{v}"),
            });
        }
        wtr.write_record(&rec).map_err(to_err)?;
    }
    wtr.flush().map_err(|e| Error::Serde(e.to_string()))?;
    Ok(())
}

pub fn write_csv_string(table: &Table) -> String {
    let mut buf = Vec::new();
    write_csv(table, &mut buf).expect("writing to memory");
    String::from_utf8(buf).expect("csv is utf-8")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn people_schema() -> Schema {
        Schema::new(vec![
            ColumnSchema::continuous("age"),
            ColumnSchema::categorical("sex", 2),
            ColumnSchema::categorical("label", 2).target(),
        ])
        .unwrap()
    }

    #[test]
    fn parses_small_file() {
        let data = "age,sex,label\n31.5,F,yes\n40,M,no\n22,F,no\n";
        let t = read_csv(data.as_bytes(), &people_schema()).unwrap();
        assert_eq!(t.n_rows(), 3);
        assert_eq!(t.column(0), &[31.5, 40.0, 22.0]);
        // first-appearance level order
        assert_eq!(t.column(1), &[0.0, 1.0, 0.0]);
        assert_eq!(t.column(2), &[0.0, 1.0, 1.0]);
        assert_eq!(t.schema().columns()[2].labels, vec!["yes", "no"]);
    }

    #[test]
    fn header_only_is_empty_table() {
        let t = read_csv("age,sex,label\n".as_bytes(), &people_schema()).unwrap();
        assert_eq!(t.n_rows(), 0);
    }

    #[test]
    fn bad_cells_report_location() {
        let data = "age,sex,label\n31,F,yes\nabc,M,no\n";
        match read_csv(data.as_bytes(), &people_schema()) {
            Err(Error::Ingestion { row, column, .. }) => {
                assert_eq!(row, 1);
                assert_eq!(column, "age");
            }
            other => panic!("expected ingestion error, got {other:?}"),
        }
        let nan = "age,sex,label\nNaN,F,yes\n";
        assert!(matches!(
            read_csv(nan.as_bytes(), &people_schema()),
            Err(Error::Ingestion { .. })
        ));
        let missing = "age,sex,label\n3,,yes\n";
        assert!(matches!(
            read_csv(missing.as_bytes(), &people_schema()),
            Err(Error::Ingestion { .. })
        ));
        let too_many = "age,sex,label\n3,F,yes\n3,M,yes\n3,X,yes\n";
        assert!(read_csv(too_many.as_bytes(), &people_schema()).is_err());
    }

    #[test]
    fn header_mismatch() {
        let data = "age,gender,label\n1,F,yes\n";
        assert!(matches!(
            read_csv(data.as_bytes(), &people_schema()),
            Err(Error::Ingest(_))
        ));
    }

    #[test]
    fn header_order_may_differ() {
        let data = "label,age,sex\nyes,3,F\n";
        let t = read_csv(data.as_bytes(), &people_schema()).unwrap();
        assert_eq!(t.column(0), &[3.0]);
    }

    #[test]
    fn missing_file() {
        assert!(matches!(
            load_csv("/nonexistent/file.csv", &people_schema()),
            Err(Error::Io { .. })
        ));
    }

    #[test]
    fn schema_sidecar_round_trip() {
        let text = r#"
[[column]]
name = "age"
kind = "continuous"

[[column]]
name = "sex"
kind = "categorical"
levels = 2

[[column]]
name = "label"
kind = "categorical"
levels = 2
target = true
"#;
        let s = parse_schema(text).unwrap();
        assert_eq!(s, people_schema());
        // rendering spells out implicit labels; after that it is a fixed point
        let once = parse_schema(&schema_to_toml(&s)).unwrap();
        assert_eq!(once.columns()[1].labels, ["0", "1"]);
        assert_eq!(parse_schema(&schema_to_toml(&once)).unwrap(), once);
    }

    #[test]
    fn unlabelled_codes_survive_a_reload() {
        let schema = Schema::new(vec![
            ColumnSchema::categorical("c", 4),
            ColumnSchema::categorical("y", 2).target(),
        ])
        .unwrap();
        // first row holds level 3, which first-appearance coding would call 0
        let t = Table::new(schema, vec![vec![3.0, 1.0, 0.0, 2.0], vec![1.0, 0.0, 1.0, 0.0]]).unwrap();
        let back = read_csv(write_csv_string(&t).as_bytes(), &parse_schema(&schema_to_toml(t.schema())).unwrap()).unwrap();
        assert_eq!(back.columns(), t.columns());
    }

    #[test]
    fn schema_sidecar_rejects_unknown_keys() {
        let text = "[[column]]\nname = \"a\"\nkind = \"continuous\"\ncolour = 1\n";
        assert!(matches!(parse_schema(text), Err(Error::Config(_))));
        let one_level = "[[column]]\nname = \"a\"\nkind = \"categorical\"\nlevels = 1\ntarget = true\n";
        assert!(parse_schema(one_level).is_err());
    }
}
