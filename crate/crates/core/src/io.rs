//! File formats: float WAV, CSV tables and JSON, written atomically.

use std::fs;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::error::{Error, Result};

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> Error + '_ {
    move |source| Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Writes through a temporary file in the target directory and renames it
/// into place, so readers never see a partial file.
pub fn write_atomic(path: &Path, write: impl FnOnce(&mut dyn Write) -> Result<()>) -> Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d.to_path_buf(),
        _ => PathBuf::from("."),
    };
    fs::create_dir_all(&dir).map_err(io_err(&dir))?;
    let mut tmp = tempfile::NamedTempFile::new_in(&dir).map_err(io_err(&dir))?;
    {
        let mut w = BufWriter::new(tmp.as_file_mut());
        write(&mut w)?;
        w.flush().map_err(io_err(path))?;
    }
    tmp.persist(path).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e.error,
    })?;
    Ok(())
}

/// Writes one or more equally long channels as 32-bit float WAV.
pub fn write_wav(path: &Path, channels: &[Vec<f64>], sample_rate: f64) -> Result<()> {
    if channels.is_empty() || channels.iter().any(|c| c.len() != channels[0].len()) {
        return Err(Error::data("WAV channels must be non-empty and equally long"));
    }
    let spec = hound::WavSpec {
        channels: channels.len() as u16,
        sample_rate: sample_rate.round() as u32,
        bits_per_sample: 32,
        sample_format: hound::SampleFormat::Float,
    };
    let wav_err = |source| Error::Wav {
        path: path.to_path_buf(),
        source,
    };
    let mut bytes = std::io::Cursor::new(Vec::new());
    {
        let mut w = hound::WavWriter::new(&mut bytes, spec).map_err(wav_err)?;
        for n in 0..channels[0].len() {
            for c in channels {
                w.write_sample(c[n] as f32).map_err(wav_err)?;
            }
        }
        w.finalize().map_err(wav_err)?;
    }
    write_atomic(path, |w| w.write_all(bytes.get_ref()).map_err(io_err(path)))
}

/// Reads a WAV file into per-channel samples, scaling integer formats to
/// [-1, 1). Returns the channels and the sample rate.
pub fn read_wav(path: &Path) -> Result<(Vec<Vec<f64>>, f64)> {
    let wav_err = |source| Error::Wav {
        path: path.to_path_buf(),
        source,
    };
    let mut r = hound::WavReader::open(path).map_err(wav_err)?;
    let spec = r.spec();
    let ch = spec.channels as usize;
    let interleaved: Vec<f64> = match spec.sample_format {
        hound::SampleFormat::Float => r
            .samples::<f32>()
            .map(|s| s.map(f64::from))
            .collect::<std::result::Result<_, _>>()
            .map_err(wav_err)?,
        hound::SampleFormat::Int => {
            let scale = 2f64.powi(i32::from(spec.bits_per_sample) - 1);
            r.samples::<i32>()
                .map(|s| s.map(|v| f64::from(v) / scale))
                .collect::<std::result::Result<_, _>>()
                .map_err(wav_err)?
        }
    };
    let mut channels = vec![Vec::with_capacity(interleaved.len() / ch.max(1)); ch];
    for (i, v) in interleaved.into_iter().enumerate() {
        channels[i % ch].push(v);
    }
    Ok((channels, f64::from(spec.sample_rate)))
}

pub fn write_csv<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    write_atomic(path, |w| {
        let mut csv = csv::Writer::from_writer(w);
        for r in rows {
            csv.serialize(r).map_err(|e| Error::data(format!("{}: {e}", path.display())))?;
        }
        csv.flush().map_err(io_err(path))
    })
}

pub fn read_csv<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>> {
    let file = fs::File::open(path).map_err(io_err(path))?;
    csv::Reader::from_reader(BufReader::new(file))
        .deserialize()
        .collect::<std::result::Result<_, _>>()
        .map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            message: e.to_string(),
        })
}

pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    write_atomic(path, |w| {
        serde_json::to_writer_pretty(&mut *w, value).map_err(|e| Error::data(e.to_string()))?;
        w.write_all(b"\n").map_err(io_err(path))
    })
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    serde_json::from_str(&text).map_err(|e| Error::Parse {
        path: path.to_path_buf(),
        message: e.to_string(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scene::TruthRow;

    #[test]
    fn wav_round_trip_is_float_exact() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("x.wav");
        let ch = vec![vec![0.5, -0.25, 0.125], vec![0.0, 1.0, -1.0]];
        write_wav(&p, &ch, 48_000.0).unwrap();
        let (back, fs) = read_wav(&p).unwrap();
        assert_eq!(fs, 48_000.0);
        assert_eq!(back, ch);
    }

    #[test]
    fn csv_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("sub/truth.csv");
        let rows = vec![TruthRow {
            frame_index: 3,
            source_id: 1,
            doa_deg: 232.1,
            pitch_hz: 190.0,
            active: true,
        }];
        write_csv(&p, &rows).unwrap();
        let back: Vec<TruthRow> = read_csv(&p).unwrap();
        assert_eq!(back, rows);
    }

    #[test]
    fn malformed_json_is_a_parse_error() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("bad.json");
        fs::write(&p, "{ not json").unwrap();
        let e = read_json::<serde_json::Value>(&p).unwrap_err();
        assert_eq!(e.exit_code(), 1);
    }
}
