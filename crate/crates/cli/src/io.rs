//! CSV formats. Numbers are written in shortest round-trip form, so reading
//! a file back gives the exact values that were written.

use std::io::{Read, Write};

use hopf_tda::{PersistenceDiagram64, PersistencePair64, PointCloud64, TimeSeries64};

use crate::error::{CliError, Result};

/// One line of `sweep.csv`; `delta_h` is empty on the first line.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SweepRow {
    pub mu: f64,
    pub h: f64,
    pub betti_l1: f64,
    pub delta_h: Option<f64>,
}

fn csv_err(source: &str, row: usize) -> impl Fn(csv::Error) -> CliError + '_ {
    move |e| CliError::Parse {
        file: source.to_string(),
        row,
        message: e.to_string(),
    }
}

fn writer<W: Write>(w: W) -> csv::Writer<W> {
    csv::WriterBuilder::new().has_headers(false).from_writer(w)
}

fn write_err(e: csv::Error) -> CliError {
    let source = match e.into_kind() {
        csv::ErrorKind::Io(source) => source,
        other => std::io::Error::other(format!("{other:?}")),
    };
    CliError::Io {
        path: "output".into(),
        source,
    }
}

fn write_rows<W: Write>(w: W, header: &[String], rows: impl Iterator<Item = Vec<String>>) -> Result<()> {
    let mut out = writer(w);
    out.write_record(header).map_err(write_err)?;
    for row in rows {
        out.write_record(&row).map_err(write_err)?;
    }
    out.flush().map_err(|source| CliError::Io {
        path: "output".into(),
        source,
    })?;
    Ok(())
}

/// Data rows with their 1-based line numbers. A first line that does not
/// start with a number is taken as a header and skipped.
fn read_rows<R: Read>(r: R, source: &str, columns: Option<usize>) -> Result<Vec<(usize, Vec<String>)>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(r);
    let mut rows = Vec::new();
    for (k, record) in reader.records().enumerate() {
        let record = record.map_err(csv_err(source, k + 1))?;
        let line = record.position().map_or(k + 1, |p| p.line() as usize);
        let cells: Vec<String> = record.iter().map(str::to_string).collect();
        if k == 0 && cells.first().is_some_and(|c| c.parse::<f64>().is_err()) {
            continue;
        }
        if cells.len() == 1 && cells[0].is_empty() {
            continue;
        }
        if let Some(n) = columns {
            if cells.len() != n {
                return Err(CliError::Parse {
                    file: source.to_string(),
                    row: line,
                    message: format!("expected {n} columns, found {}", cells.len()),
                });
            }
        }
        rows.push((line, cells));
    }
    Ok(rows)
}

fn number(cell: &str, source: &str, row: usize) -> Result<f64> {
    cell.parse::<f64>().map_err(|_| CliError::Parse {
        file: source.to_string(),
        row,
        message: format!("{cell:?} is not a number"),
    })
}

fn numbers(cells: &[String], source: &str, row: usize) -> Result<Vec<f64>> {
    cells.iter().map(|c| number(c, source, row)).collect()
}

pub fn write_series<W: Write>(w: W, series: &TimeSeries64) -> Result<()> {
    let rows = series
        .values
        .iter()
        .enumerate()
        .map(|(i, x)| vec![series.time(i).to_string(), x.to_string()]);
    write_rows(w, &["t".into(), "x".into()], rows)
}

pub fn read_series<R: Read>(r: R, source: &str) -> Result<TimeSeries64> {
    let rows = read_rows(r, source, Some(2))?;
    let mut t = Vec::with_capacity(rows.len());
    let mut x = Vec::with_capacity(rows.len());
    for (line, cells) in &rows {
        let v = numbers(cells, source, *line)?;
        t.push(v[0]);
        x.push(v[1]);
    }
    let (t0, dt) = match t.as_slice() {
        [] => (0.0, 1.0),
        [t0] => (*t0, 1.0),
        [t0, t1, ..] => (*t0, t1 - t0),
    };
    Ok(TimeSeries64::new(t0, dt, x)?)
}

pub fn write_cloud<W: Write>(w: W, cloud: &PointCloud64) -> Result<()> {
    let header: Vec<String> = (0..cloud.dim()).map(|k| format!("x{k}")).collect();
    write_rows(
        w,
        &header,
        cloud.points().map(|p| p.iter().map(f64::to_string).collect()),
    )
}

pub fn read_cloud<R: Read>(r: R, source: &str) -> Result<PointCloud64> {
    let rows = read_rows(r, source, None)?;
    let dim = rows.first().map_or(1, |(_, c)| c.len());
    let mut coords = Vec::with_capacity(rows.len() * dim);
    for (line, cells) in &rows {
        if cells.len() != dim {
            return Err(CliError::Parse {
                file: source.to_string(),
                row: *line,
                message: format!("expected {dim} coordinates, found {}", cells.len()),
            });
        }
        coords.extend(numbers(cells, source, *line)?);
    }
    Ok(PointCloud64::new(dim, coords)?)
}

pub fn write_diagram<W: Write>(w: W, diagram: &PersistenceDiagram64) -> Result<()> {
    let rows = diagram
        .pairs()
        .iter()
        .map(|p| vec![p.dim.to_string(), p.birth.to_string(), p.death.to_string()]);
    write_rows(w, &["dim".into(), "birth".into(), "death".into()], rows)
}

pub fn read_diagram<R: Read>(r: R, source: &str) -> Result<PersistenceDiagram64> {
    let mut pairs = Vec::new();
    for (line, cells) in read_rows(r, source, Some(3))? {
        let dim = cells[0].parse::<usize>().map_err(|_| CliError::Parse {
            file: source.to_string(),
            row: line,
            message: format!("{:?} is not a dimension", cells[0]),
        })?;
        let birth = number(&cells[1], source, line)?;
        let death = number(&cells[2], source, line)?;
        pairs.push(PersistencePair64 { dim, birth, death });
    }
    Ok(PersistenceDiagram64::new(pairs))
}

pub fn write_sweep<W: Write>(w: W, rows: &[SweepRow]) -> Result<()> {
    let header = ["mu", "H", "betti_l1", "delta_H"].map(String::from);
    let body = rows.iter().map(|r| {
        vec![
            r.mu.to_string(),
            r.h.to_string(),
            r.betti_l1.to_string(),
            r.delta_h.map_or_else(String::new, |d| d.to_string()),
        ]
    });
    write_rows(w, &header, body)
}

pub fn read_sweep<R: Read>(r: R, source: &str) -> Result<Vec<SweepRow>> {
    let mut out = Vec::new();
    for (line, cells) in read_rows(r, source, Some(4))? {
        let v = numbers(&cells[..3], source, line)?;
        let delta_h = if cells[3].is_empty() {
            None
        } else {
            Some(number(&cells[3], source, line)?)
        };
        out.push(SweepRow {
            mu: v[0],
            h: v[1],
            betti_l1: v[2],
            delta_h,
        });
    }
    Ok(out)
}

pub fn write_pairs<W: Write>(w: W, names: [&str; 2], rows: &[(f64, f64)]) -> Result<()> {
    let header = names.map(String::from);
    write_rows(w, &header, rows.iter().map(|(a, b)| vec![a.to_string(), b.to_string()]))
}

/// First two columns of every row; further columns are ignored.
pub fn read_pairs<R: Read>(r: R, source: &str) -> Result<Vec<(f64, f64)>> {
    let mut out = Vec::new();
    for (line, cells) in read_rows(r, source, None)? {
        if cells.len() < 2 {
            return Err(CliError::Parse {
                file: source.to_string(),
                row: line,
                message: "need two columns".into(),
            });
        }
        out.push((number(&cells[0], source, line)?, number(&cells[1], source, line)?));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diagram_round_trip_keeps_infinity() {
        let d = PersistenceDiagram64::new(vec![
            PersistencePair64 {
                dim: 0,
                birth: 0.0,
                death: f64::INFINITY,
            },
            PersistencePair64 {
                dim: 1,
                birth: 0.1,
                death: 1.0 / 3.0,
            },
        ]);
        let mut buf = Vec::new();
        write_diagram(&mut buf, &d).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert_eq!(text, "dim,birth,death\n0,0,inf\n1,0.1,0.3333333333333333\n");
        assert_eq!(read_diagram(buf.as_slice(), "d").unwrap(), d);
    }

    #[test]
    fn series_round_trip_is_exact() {
        let s = TimeSeries64::new(0.01, 0.01, vec![std::f64::consts::PI, -1e-300, 2.5]).unwrap();
        let mut buf = Vec::new();
        write_series(&mut buf, &s).unwrap();
        assert_eq!(read_series(buf.as_slice(), "s").unwrap().values, s.values);
    }

    #[test]
    fn bad_cell_names_its_row() {
        let text = "mu,H,betti_l1,delta_H\n0,1,2,\n0.5,oops,2,1\n";
        let err = read_sweep(text.as_bytes(), "sweep.csv").unwrap_err();
        assert!(matches!(err, CliError::Parse { row: 3, .. }), "{err}");
        assert!(err.to_string().contains("row 3"));
    }

    #[test]
    fn headerless_cloud_accepted() {
        let c = read_cloud("1,2\n3,4\n".as_bytes(), "c").unwrap();
        assert_eq!(c.len(), 2);
        assert!(read_cloud("1,2\n3\n".as_bytes(), "c").is_err());
    }
}
