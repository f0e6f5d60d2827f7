//! Tick CSV loading and writing.
//!
//! Schema (header required): `date,timestamp_us,price,volume` with date
//! `YYYY-MM-DD`, timestamp_us integer microseconds since session open,
//! price decimal, volume integer.

use std::collections::BTreeMap;
use std::path::Path;

use super::tick::Tick;
use crate::error::{Error, Result};

/// All ticks of one trading day.
#[derive(Debug, Clone)]
pub struct DayTicks {
    pub date: String,
    pub ticks: Vec<Tick>,
}

fn valid_date(s: &str) -> bool {
    let b = s.as_bytes();
    b.len() == 10
        && b[4] == b'-'
        && b[7] == b'-'
        && b.iter()
            .enumerate()
            .all(|(i, c)| matches!(i, 4 | 7) || c.is_ascii_digit())
}

/// Load ticks grouped by trading day, in date order.
///
/// Malformed rows are rejected with their line number; timestamps must be
/// non-decreasing within each day.
pub fn load_ticks(path: impl AsRef<Path>) -> Result<Vec<DayTicks>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(path.as_ref())?;
    let headers = reader.headers()?.clone();
    let expected = ["date", "timestamp_us", "price", "volume"];
    let got: Vec<&str> = headers.iter().collect();
    if got != expected {
        return Err(Error::CsvRow {
            line: 1,
            msg: format!("expected header {expected:?}, got {got:?}"),
        });
    }

    let mut days: BTreeMap<String, Vec<Tick>> = BTreeMap::new();
    let mut last_ts: BTreeMap<String, (i64, u64)> = BTreeMap::new();
    for record in reader.records() {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line());
        let field = |i: usize| -> Result<&str> {
            record.get(i).ok_or(Error::CsvRow {
                line,
                msg: "missing field".into(),
            })
        };
        let date = field(0)?.to_string();
        if !valid_date(&date) {
            return Err(Error::CsvRow {
                line,
                msg: format!("bad date {date:?}, expected YYYY-MM-DD"),
            });
        }
        let timestamp_us: i64 = field(1)?.parse().map_err(|e| Error::CsvRow {
            line,
            msg: format!("bad timestamp_us: {e}"),
        })?;
        let price: f64 = field(2)?.parse().map_err(|e| Error::CsvRow {
            line,
            msg: format!("bad price: {e}"),
        })?;
        if !price.is_finite() || price <= 0.0 {
            return Err(Error::CsvRow {
                line,
                msg: format!("price must be positive, got {price}"),
            });
        }
        let volume: i64 = field(3)?.parse().map_err(|e| Error::CsvRow {
            line,
            msg: format!("bad volume: {e}"),
        })?;
        if volume <= 0 {
            return Err(Error::CsvRow {
                line,
                msg: format!("volume must be positive, got {volume}"),
            });
        }
        if let Some(&(prev, prev_line)) = last_ts.get(&date) {
            if timestamp_us < prev {
                let _ = prev_line;
                return Err(Error::NonMonotoneTimestamp { line });
            }
        }
        last_ts.insert(date.clone(), (timestamp_us, line));
        days.entry(date).or_default().push(Tick {
            timestamp_us,
            price,
            volume: volume as u64,
        });
    }
    Ok(days
        .into_iter()
        .map(|(date, ticks)| DayTicks { date, ticks })
        .collect())
}

/// Write one day of ticks using the documented schema.
pub fn write_ticks_csv(path: impl AsRef<Path>, date: &str, ticks: &[Tick]) -> Result<()> {
    let mut w = csv::Writer::from_path(path.as_ref())?;
    w.write_record(["date", "timestamp_us", "price", "volume"])?;
    for t in ticks {
        w.write_record([
            date.to_string(),
            t.timestamp_us.to_string(),
            // shortest representation that parses back to the same f64
            t.price.to_string(),
            t.volume.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn write_tmp(name: &str, contents: &str) -> std::path::PathBuf {
        let path = std::env::temp_dir().join(format!("tickspike-{}-{name}", std::process::id()));
        let mut f = std::fs::File::create(&path).unwrap();
        f.write_all(contents.as_bytes()).unwrap();
        path
    }

    #[test]
    fn loads_well_formed_rows() {
        let p = write_tmp(
            "ok.csv",
            "date,timestamp_us,price,volume\n2015-02-02,0,100.5,10\n2015-02-02,5,100.6,3\n2015-02-02,9,100.4,7\n",
        );
        let days = load_ticks(&p).unwrap();
        assert_eq!(days.len(), 1);
        assert_eq!(days[0].ticks.len(), 3);
        assert_eq!(days[0].ticks[1].volume, 3);
        std::fs::remove_file(p).ok();
    }

    #[test]
    fn rejects_negative_volume_with_line_number() {
        let p = write_tmp(
            "negvol.csv",
            "date,timestamp_us,price,volume\n2015-02-02,0,100.5,10\n2015-02-02,5,100.6,-3\n",
        );
        match load_ticks(&p) {
            Err(Error::CsvRow { line, msg }) => {
                assert_eq!(line, 3);
                assert!(msg.contains("volume"));
            }
            other => panic!("expected CsvRow error, got {other:?}"),
        }
        std::fs::remove_file(p).ok();
    }

    #[test]
    fn two_date_groups_in_date_order() {
        let p = write_tmp(
            "twodays.csv",
            "date,timestamp_us,price,volume\n2015-02-03,0,10,1\n2015-02-02,0,11,1\n2015-02-03,2,12,1\n",
        );
        let days = load_ticks(&p).unwrap();
        assert_eq!(days.len(), 2);
        assert_eq!(days[0].date, "2015-02-02");
        assert_eq!(days[1].date, "2015-02-03");
        assert_eq!(days[1].ticks.len(), 2);
        std::fs::remove_file(p).ok();
    }

    #[test]
    fn rejects_non_monotone_timestamps() {
        let p = write_tmp(
            "nonmono.csv",
            "date,timestamp_us,price,volume\n2015-02-02,5,10,1\n2015-02-02,4,11,1\n",
        );
        assert!(matches!(
            load_ticks(&p),
            Err(Error::NonMonotoneTimestamp { line: 3 })
        ));
        std::fs::remove_file(p).ok();
    }

    #[test]
    fn round_trips_through_writer() {
        let ticks = vec![
            Tick {
                timestamp_us: 0,
                price: 100.25,
                volume: 5,
            },
            Tick {
                timestamp_us: 17,
                price: 100.75,
                volume: 2,
            },
        ];
        let p = std::env::temp_dir().join(format!("tickspike-rt-{}.csv", std::process::id()));
        write_ticks_csv(&p, "2015-02-02", &ticks).unwrap();
        let days = load_ticks(&p).unwrap();
        assert_eq!(days[0].ticks.len(), 2);
        assert!((days[0].ticks[0].price - 100.25).abs() < 1e-9);
        std::fs::remove_file(p).ok();
    }
}
