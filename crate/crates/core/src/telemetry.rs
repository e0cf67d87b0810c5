//! Line-delimited tick logs: one JSON object per line, UTF-8.

use std::io::{self, BufRead, Write};

use crate::sim::TickRecord;

pub fn encode_record(record: &TickRecord) -> String {
    serde_json::to_string(record).expect("tick records always serialize")
}

pub fn decode_record(line: &str) -> Result<TickRecord, serde_json::Error> {
    serde_json::from_str(line)
}

pub fn write_tick_log<W: Write>(mut out: W, records: &[TickRecord]) -> io::Result<()> {
    for r in records {
        out.write_all(encode_record(r).as_bytes())?;
        out.write_all(b"\n")?;
    }
    out.flush()
}

pub fn tick_log_bytes(records: &[TickRecord]) -> Vec<u8> {
    let mut buf = Vec::new();
    write_tick_log(&mut buf, records).expect("writing to a Vec cannot fail");
    buf
}

pub fn read_tick_log<R: BufRead>(input: R) -> io::Result<Vec<TickRecord>> {
    let mut records = Vec::new();
    for (n, line) in input.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let record = decode_record(&line).map_err(|e| {
            io::Error::new(io::ErrorKind::InvalidData, format!("line {}: {e}", n + 1))
        })?;
        records.push(record);
    }
    Ok(records)
}
