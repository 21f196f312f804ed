//! Trace and message-log CSV files.
//!
//! Trace files have the fixed header [`TRACE_HEADER`]. Ratios and times are
//! written with six fractional digits, lines end in LF.

use std::io::{Read, Write};
use std::path::Path;

use kcover::{MessageRecord, MetricsRow, MetricsTrace};

use crate::error::CliError;

pub const TRACE_HEADER: [&str; 10] =
    ["period", "alive", "awake", "theta1", "theta2", "theta3", "theta_p1", "theta_p2", "theta_p3", "messages"];

pub const MESSAGE_HEADER: [&str; 5] = ["period", "time", "kind", "sender", "receivers"];

pub fn fmt6(v: f64) -> String {
    format!("{v:.6}")
}

fn writer<W: Write>(w: W) -> csv::Writer<W> {
    csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(w)
}

fn io_err(e: csv::Error) -> std::io::Error {
    match e.into_kind() {
        csv::ErrorKind::Io(e) => e,
        other => std::io::Error::other(format!("{other:?}")),
    }
}

pub fn write_trace<W: Write>(w: W, trace: &MetricsTrace) -> std::io::Result<()> {
    let mut out = writer(w);
    out.write_record(TRACE_HEADER).map_err(io_err)?;
    for r in &trace.rows {
        let mut fields = vec![r.period.to_string(), r.alive.to_string(), r.awake.to_string()];
        fields.extend(r.theta.iter().chain(&r.theta_prime).map(|&v| fmt6(v)));
        fields.push(r.messages.to_string());
        out.write_record(&fields).map_err(io_err)?;
    }
    out.flush()
}

pub fn trace_to_string(trace: &MetricsTrace) -> String {
    let mut buf = Vec::new();
    write_trace(&mut buf, trace).expect("writing to memory");
    String::from_utf8(buf).expect("csv output is ASCII")
}

pub fn write_messages<W: Write>(w: W, messages: &[MessageRecord]) -> std::io::Result<()> {
    let mut out = writer(w);
    out.write_record(MESSAGE_HEADER).map_err(io_err)?;
    for m in messages {
        out.write_record([
            m.period.to_string(),
            fmt6(m.time),
            m.kind.as_str().to_string(),
            m.sender.to_string(),
            m.receivers.to_string(),
        ])
        .map_err(io_err)?;
    }
    out.flush()
}

/// Writes `contents` to `path`, creating parent directories.
pub fn write_file(path: &Path, contents: impl AsRef<[u8]>) -> Result<(), CliError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    }
    std::fs::write(path, contents).map_err(|e| CliError::io(path, e))
}

pub fn read_trace(path: &Path) -> Result<MetricsTrace, CliError> {
    let file = std::fs::File::open(path).map_err(|e| CliError::io(path, e))?;
    parse_trace(file, path)
}

/// Parses a trace; errors carry `path` and the 1-based line number.
pub fn parse_trace<R: Read>(input: R, path: &Path) -> Result<MetricsTrace, CliError> {
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(input);
    let parse_err = |line: u64, message: String| CliError::Parse { path: path.to_path_buf(), line, message };
    let header = reader.headers().map_err(|e| csv_err(e, path))?.clone();
    if header.iter().ne(TRACE_HEADER) {
        return Err(parse_err(
            1,
            format!(
                "expected header {:?}, found {:?}",
                TRACE_HEADER.join(","),
                header.iter().collect::<Vec<_>>().join(",")
            ),
        ));
    }
    let mut trace = MetricsTrace::default();
    for record in reader.records() {
        let record = record.map_err(|e| csv_err(e, path))?;
        let line = record.position().map_or(0, |p| p.line());
        let field = |i: usize| record.get(i).unwrap_or("");
        fn num<T: std::str::FromStr>(s: &str, name: &str) -> Result<T, String>
        where
            T::Err: std::fmt::Display,
        {
            s.trim().parse::<T>().map_err(|e| format!("column {name}: cannot parse {s:?}: {e}"))
        }
        let row = (|| -> Result<MetricsRow, String> {
            let mut theta = [0.0; 3];
            let mut theta_prime = [0.0; 3];
            for i in 0..3 {
                theta[i] = num(field(3 + i), TRACE_HEADER[3 + i])?;
                theta_prime[i] = num(field(6 + i), TRACE_HEADER[6 + i])?;
            }
            Ok(MetricsRow {
                period: num(field(0), "period")?,
                alive: num(field(1), "alive")?,
                awake: num(field(2), "awake")?,
                theta,
                theta_prime,
                messages: num(field(9), "messages")?,
            })
        })()
        .map_err(|m| parse_err(line, m))?;
        trace.rows.push(row);
    }
    Ok(trace)
}

pub(crate) fn csv_err(e: csv::Error, path: &Path) -> CliError {
    let line = e.position().map_or(0, |p| p.line());
    match e.into_kind() {
        csv::ErrorKind::Io(source) => CliError::io(path, source),
        csv::ErrorKind::UnequalLengths { expected_len, len, .. } => CliError::Parse {
            path: path.to_path_buf(),
            line,
            message: format!("expected {expected_len} fields, found {len}"),
        },
        other => CliError::Parse { path: path.to_path_buf(), line, message: format!("{other:?}") },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use kcover::{MessageKind, NodeId};

    fn sample() -> MetricsTrace {
        MetricsTrace {
            rows: vec![
                MetricsRow {
                    period: 1,
                    alive: 100,
                    awake: 75,
                    theta: [1.0, 1.0, 1.0],
                    theta_prime: [1.0, 1.0, 0.5],
                    messages: 225,
                },
                MetricsRow {
                    period: 2,
                    alive: 3,
                    awake: 0,
                    theta: [0.123457, 0.0, 0.0],
                    theta_prime: [0.0; 3],
                    messages: 0,
                },
            ],
        }
    }

    #[test]
    fn exact_layout() {
        let text = trace_to_string(&sample());
        let mut lines = text.split('\n');
        assert_eq!(lines.next(), Some("period,alive,awake,theta1,theta2,theta3,theta_p1,theta_p2,theta_p3,messages"));
        assert_eq!(lines.next(), Some("1,100,75,1.000000,1.000000,1.000000,1.000000,1.000000,0.500000,225"));
        assert_eq!(lines.next(), Some("2,3,0,0.123457,0.000000,0.000000,0.000000,0.000000,0.000000,0"));
        assert_eq!(lines.next(), Some(""));
        assert!(!text.contains('\r'));
    }

    #[test]
    fn round_trip() {
        let t = sample();
        assert_eq!(parse_trace(trace_to_string(&t).as_bytes(), Path::new("t.csv")).unwrap(), t);
    }

    #[test]
    fn malformed_value_names_file_and_line() {
        let text = format!("{}\n1,2,2,1,1,1,1,1,1,0\n2,2,x,1,1,1,1,1,1,0\n", TRACE_HEADER.join(","));
        let err = parse_trace(text.as_bytes(), Path::new("runs/a.csv")).unwrap_err();
        assert!(err.to_string().starts_with("runs/a.csv:3: column awake"), "{err}");
    }

    #[test]
    fn short_row_and_bad_header_are_errors() {
        let text = format!("{}\n1,2,2\n", TRACE_HEADER.join(","));
        let err = parse_trace(text.as_bytes(), Path::new("a.csv")).unwrap_err();
        assert!(matches!(err, CliError::Parse { line: 2, .. }), "{err}");
        let err = parse_trace("a,b\n".as_bytes(), Path::new("a.csv")).unwrap_err();
        assert!(matches!(err, CliError::Parse { line: 1, .. }), "{err}");
    }

    #[test]
    fn message_log() {
        let m = [MessageRecord { period: 3, time: 0.25, kind: MessageKind::Awake, sender: NodeId(7), receivers: 40 }];
        let mut buf = Vec::new();
        write_messages(&mut buf, &m).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "period,time,kind,sender,receivers\n3,0.250000,awake,7,40\n");
    }

    fn row() -> impl proptest::strategy::Strategy<Value = MetricsRow> {
        use proptest::prelude::*;
        let ratio = || (0u32..=1_000_000).prop_map(|n| n as f64 / 1e6);
        (1u32..10_000, 0usize..500, 0usize..500, [ratio(), ratio(), ratio()], [ratio(), ratio(), ratio()], any::<u32>())
            .prop_map(|(period, alive, awake, theta, theta_prime, messages)| MetricsRow {
                period,
                alive,
                awake,
                theta,
                theta_prime,
                messages: messages as u64,
            })
    }

    proptest::proptest! {
        #[test]
        fn round_trip_of_six_digit_values(rows in proptest::collection::vec(row(), 0..30)) {
            let trace = MetricsTrace { rows };
            let text = trace_to_string(&trace);
            proptest::prop_assert_eq!(parse_trace(text.as_bytes(), Path::new("t.csv")).unwrap(), trace);
        }
    }
}
