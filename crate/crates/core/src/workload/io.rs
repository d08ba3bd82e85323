use std::fs;
use std::path::Path;

use thiserror::Error;

use crate::model::{validate_workload, TaskSpec, Violation, Workload};
use crate::scalar::Scalar;
use crate::time::{TimeDelta, TimePoint};

const COLUMNS: [&str; 5] = ["id", "arrival", "burst", "deadline", "value"];

#[derive(Debug, Error)]
pub enum WorkloadIoError {
    #[error("line {line}: {message}")]
    Parse { line: u64, message: String },
    #[error("invalid workload: {}", .0.iter().map(ToString::to_string).collect::<Vec<_>>().join("; "))]
    Validation(Vec<Violation>),
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
}

fn parse_err(line: u64, message: impl Into<String>) -> WorkloadIoError {
    WorkloadIoError::Parse { line, message: message.into() }
}

/// Serializes `w` with `# workload:` / `# seed:` comment lines.
pub fn to_csv_string<V: Scalar>(w: &Workload<V>) -> String {
    let mut out = format!("# workload: {}\n", w.name);
    if let Some(seed) = w.seed {
        out.push_str(&format!("# seed: {seed}\n"));
    }
    let mut wr = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    wr.write_record(COLUMNS).expect("in-memory write");
    for t in &w.tasks {
        wr.write_record([
            t.id.to_string(),
            t.arrival.to_string(),
            t.burst.to_string(),
            t.deadline.to_string(),
            t.value.to_plain_string(),
        ])
        .expect("in-memory write");
    }
    out.push_str(&String::from_utf8(wr.into_inner().expect("in-memory flush")).expect("ascii"));
    out
}

/// Parses the workload CSV format. `default_name` is used when the text
/// has no `# workload:` line. The result is validated.
pub fn from_csv_str<V: Scalar>(text: &str, default_name: &str) -> Result<Workload<V>, WorkloadIoError> {
    let mut name = default_name.to_string();
    let mut seed = None;
    for (i, line) in text.lines().enumerate() {
        let Some(comment) = line.strip_prefix('#') else { continue };
        let comment = comment.trim();
        if let Some(n) = comment.strip_prefix("workload:") {
            name = n.trim().to_string();
        } else if let Some(s) = comment.strip_prefix("seed:") {
            seed = Some(s.trim().parse::<u64>().map_err(|e| parse_err(i as u64 + 1, format!("bad seed: {e}")))?);
        }
    }

    let mut rd = csv::ReaderBuilder::new().comment(Some(b'#')).trim(csv::Trim::All).from_reader(text.as_bytes());
    let header_line = text.lines().take_while(|l| l.starts_with('#')).count() as u64 + 1;
    let headers = rd.headers().map_err(|e| parse_err(header_line, e.to_string()))?.clone();
    let mut index = [None; 5];
    for (pos, h) in headers.iter().enumerate() {
        match COLUMNS.iter().position(|c| *c == h) {
            Some(c) if index[c].is_some() => return Err(parse_err(header_line, format!("duplicate column `{h}`"))),
            Some(c) => index[c] = Some(pos),
            None => return Err(parse_err(header_line, format!("unknown column `{h}`"))),
        }
    }
    for (c, col) in COLUMNS.iter().enumerate().take(4) {
        if index[c].is_none() {
            return Err(parse_err(header_line, format!("missing column `{col}`")));
        }
    }

    let mut tasks = Vec::new();
    for rec in rd.records() {
        let rec = rec.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            parse_err(line, e.to_string())
        })?;
        let line = rec.position().map_or(0, |p| p.line());
        let field = |c: usize| rec.get(index[c].expect("checked")).unwrap_or("");
        let int = |c: usize| -> Result<u64, WorkloadIoError> {
            field(c)
                .parse::<u64>()
                .map_err(|_| parse_err(line, format!("{}: expected ticks, got `{}`", COLUMNS[c], field(c))))
        };
        let value = match index[4] {
            Some(_) => V::parse_decimal(field(4))
                .ok_or_else(|| parse_err(line, format!("value: expected a decimal, got `{}`", field(4))))?,
            None => V::one(),
        };
        tasks.push(TaskSpec {
            id: int(0)? as usize,
            arrival: TimePoint(int(1)?),
            burst: TimeDelta(int(2)?),
            deadline: TimePoint(int(3)?),
            value,
        });
    }
    let w = Workload { name, seed, tasks };
    let violations = validate_workload(&w);
    if violations.is_empty() {
        Ok(w)
    } else {
        Err(WorkloadIoError::Validation(violations))
    }
}

/// Reads and validates a workload file. The file stem names the workload
/// unless the file carries a `# workload:` line.
pub fn parse<V: Scalar>(path: &Path) -> Result<Workload<V>, WorkloadIoError> {
    let text =
        fs::read_to_string(path).map_err(|source| WorkloadIoError::Io { path: path.display().to_string(), source })?;
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("workload");
    from_csv_str(&text, stem)
}

pub fn serialize<V: Scalar>(w: &Workload<V>, path: &Path) -> Result<(), WorkloadIoError> {
    fs::write(path, to_csv_string(w)).map_err(|source| WorkloadIoError::Io { path: path.display().to_string(), source })
}
