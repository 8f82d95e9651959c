//! Binary file formats: one ASCII header line followed by little-endian
//! `(re, im)` f64 pairs.
//!
//! | magic  | header fields                                  | payload                         |
//! |--------|------------------------------------------------|---------------------------------|
//! | `CT1`  | `N_rx N_tx N_sc`                               | one tensor in vec order         |
//! | `CTS1` | `T N_rx N_tx N_sc Tp_ms`                       | `T` tensors                     |
//! | `TKM1` | `N_rx R_rx N_tx R_tx N_sc R_sc`                | three factors, column-major     |
//! | `DMD1` | `N r`                                          | modes (column-major), eigenvalues, amplitudes |
//!
//! Readers reject trailing bytes.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use num_complex::Complex64;

use crate::dmd::DmdModel;
use crate::error::{Error, Result};
use crate::predictors::ChannelSequence;
use crate::tensor::{ChannelTensor, ComplexMatrix, ComplexVector};
use crate::tucker::TuckerModel;

const MAX_HEADER: usize = 512;

fn format_err(msg: impl Into<String>) -> Error {
    Error::Format(msg.into())
}

fn write_complex<W: Write>(w: &mut W, values: impl IntoIterator<Item = Complex64>) -> Result<()> {
    for z in values {
        w.write_all(&z.re.to_le_bytes())?;
        w.write_all(&z.im.to_le_bytes())?;
    }
    Ok(())
}

fn read_complex<R: Read>(r: &mut R, count: usize) -> Result<Vec<Complex64>> {
    let bytes = count
        .checked_mul(16)
        .ok_or_else(|| format_err("payload size overflows"))?;
    let mut buf = Vec::new();
    r.take(bytes as u64).read_to_end(&mut buf)?;
    if buf.len() != bytes {
        return Err(format_err(format!("truncated payload: expected {bytes} bytes, got {}", buf.len())));
    }
    Ok(buf
        .chunks_exact(16)
        .map(|c| {
            let re = f64::from_le_bytes(c[..8].try_into().expect("8 bytes"));
            let im = f64::from_le_bytes(c[8..].try_into().expect("8 bytes"));
            Complex64::new(re, im)
        })
        .collect())
}

fn expect_eof<R: Read>(r: &mut R) -> Result<()> {
    let mut probe = [0u8; 1];
    match r.read(&mut probe)? {
        0 => Ok(()),
        _ => Err(format_err("trailing bytes after payload")),
    }
}

/// Reads the header line and splits it into the magic and its fields.
fn read_header<R: BufRead>(r: &mut R, magic: &str, fields: usize) -> Result<Vec<String>> {
    let mut line = Vec::new();
    r.take(MAX_HEADER as u64).read_until(b'\n', &mut line)?;
    if line.last() != Some(&b'\n') {
        return Err(format_err(format!("missing or overlong {magic} header line")));
    }
    line.pop();
    let text = std::str::from_utf8(&line).map_err(|_| format_err("header is not ASCII"))?;
    let mut parts = text.split(' ');
    let found = parts.next().unwrap_or("");
    if found != magic {
        return Err(format_err(format!("expected magic {magic}, found {found:?}")));
    }
    let rest: Vec<String> = parts.map(str::to_owned).collect();
    if rest.len() != fields {
        return Err(format_err(format!("{magic} header needs {fields} fields, found {}", rest.len())));
    }
    Ok(rest)
}

fn parse_count(field: &str, name: &str) -> Result<usize> {
    match field.parse::<usize>() {
        Ok(n) if n > 0 => Ok(n),
        _ => Err(format_err(format!("{name} must be a positive integer, found {field:?}"))),
    }
}

fn parse_dims(fields: &[String]) -> Result<[usize; 3]> {
    Ok([
        parse_count(&fields[0], "N_rx")?,
        parse_count(&fields[1], "N_tx")?,
        parse_count(&fields[2], "N_sc")?,
    ])
}

fn tensor_from(dims: [usize; 3], data: Vec<Complex64>) -> Result<ChannelTensor> {
    ChannelTensor::new(dims, data).map_err(|e| format_err(e.to_string()))
}

pub fn write_tensor<W: Write>(w: &mut W, t: &ChannelTensor) -> Result<()> {
    let [a, b, c] = t.dims();
    writeln!(w, "CT1 {a} {b} {c}")?;
    write_complex(w, t.as_slice().iter().copied())
}

pub fn read_tensor<R: BufRead>(r: &mut R) -> Result<ChannelTensor> {
    let dims = parse_dims(&read_header(r, "CT1", 3)?)?;
    let data = read_complex(r, dims.iter().product())?;
    expect_eof(r)?;
    tensor_from(dims, data)
}

pub fn write_sequence<W: Write>(w: &mut W, seq: &ChannelSequence) -> Result<()> {
    let [a, b, c] = seq.dims();
    writeln!(w, "CTS1 {} {a} {b} {c} {}", seq.len(), seq.period_ms())?;
    for t in seq.snapshots() {
        write_complex(w, t.as_slice().iter().copied())?;
    }
    Ok(())
}

pub fn read_sequence<R: BufRead>(r: &mut R) -> Result<ChannelSequence> {
    let fields = read_header(r, "CTS1", 5)?;
    let len = parse_count(&fields[0], "T")?;
    let dims = parse_dims(&fields[1..4])?;
    let period: f64 = fields[4]
        .parse()
        .map_err(|_| format_err(format!("Tp_ms is not a number: {:?}", fields[4])))?;
    if !(period.is_finite() && period > 0.0) {
        return Err(format_err(format!("Tp_ms must be positive, found {period}")));
    }
    let n: usize = dims.iter().product();
    let snapshots = (0..len)
        .map(|_| tensor_from(dims, read_complex(r, n)?))
        .collect::<Result<Vec<_>>>()?;
    expect_eof(r)?;
    ChannelSequence::new(snapshots, period).map_err(|e| format_err(e.to_string()))
}

fn write_matrix<W: Write>(w: &mut W, m: &ComplexMatrix) -> Result<()> {
    // nalgebra storage is column-major
    write_complex(w, m.as_slice().iter().copied())
}

fn read_matrix<R: Read>(r: &mut R, rows: usize, cols: usize) -> Result<ComplexMatrix> {
    Ok(ComplexMatrix::from_vec(rows, cols, read_complex(r, rows * cols)?))
}

pub fn write_tucker<W: Write>(w: &mut W, model: &TuckerModel) -> Result<()> {
    let [n1, n2, n3] = model.full_dims();
    let [r1, r2, r3] = model.ranks();
    writeln!(w, "TKM1 {n1} {r1} {n2} {r2} {n3} {r3}")?;
    write_matrix(w, model.u_rx())?;
    write_matrix(w, model.u_tx())?;
    write_matrix(w, model.u_sc())
}

pub fn read_tucker<R: BufRead>(r: &mut R) -> Result<TuckerModel> {
    let f = read_header(r, "TKM1", 6)?;
    let names = ["N_rx", "R_rx", "N_tx", "R_tx", "N_sc", "R_sc"];
    let v = f
        .iter()
        .zip(names)
        .map(|(field, name)| parse_count(field, name))
        .collect::<Result<Vec<_>>>()?;
    let u_rx = read_matrix(r, v[0], v[1])?;
    let u_tx = read_matrix(r, v[2], v[3])?;
    let u_sc = read_matrix(r, v[4], v[5])?;
    expect_eof(r)?;
    TuckerModel::new(u_rx, u_tx, u_sc).map_err(|e| format_err(e.to_string()))
}

pub fn write_dmd<W: Write>(w: &mut W, model: &DmdModel) -> Result<()> {
    writeln!(w, "DMD1 {} {}", model.state_dim(), model.rank())?;
    write_matrix(w, &model.modes)?;
    write_complex(w, model.eigenvalues.iter().copied())?;
    write_complex(w, model.amplitudes.iter().copied())
}

pub fn read_dmd<R: BufRead>(r: &mut R) -> Result<DmdModel> {
    let f = read_header(r, "DMD1", 2)?;
    let n = parse_count(&f[0], "N")?;
    let rank = parse_count(&f[1], "r")?;
    let modes = read_matrix(r, n, rank)?;
    let eigenvalues = read_complex(r, rank)?;
    let amplitudes = ComplexVector::from_vec(read_complex(r, rank)?);
    expect_eof(r)?;
    DmdModel::new(modes, eigenvalues, amplitudes).map_err(|e| format_err(e.to_string()))
}

fn with_path(path: &Path, e: std::io::Error) -> Error {
    Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display())))
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path).map(BufWriter::new).map_err(|e| with_path(path, e))
}

fn open(path: &Path) -> Result<BufReader<File>> {
    File::open(path).map(BufReader::new).map_err(|e| with_path(path, e))
}

pub fn save_tensor(path: impl AsRef<Path>, t: &ChannelTensor) -> Result<()> {
    let mut w = create(path.as_ref())?;
    write_tensor(&mut w, t)?;
    Ok(w.flush()?)
}

pub fn load_tensor(path: impl AsRef<Path>) -> Result<ChannelTensor> {
    read_tensor(&mut open(path.as_ref())?)
}

pub fn save_sequence(path: impl AsRef<Path>, seq: &ChannelSequence) -> Result<()> {
    let mut w = create(path.as_ref())?;
    write_sequence(&mut w, seq)?;
    Ok(w.flush()?)
}

pub fn load_sequence(path: impl AsRef<Path>) -> Result<ChannelSequence> {
    read_sequence(&mut open(path.as_ref())?)
}

pub fn save_tucker(path: impl AsRef<Path>, model: &TuckerModel) -> Result<()> {
    let mut w = create(path.as_ref())?;
    write_tucker(&mut w, model)?;
    Ok(w.flush()?)
}

pub fn load_tucker(path: impl AsRef<Path>) -> Result<TuckerModel> {
    read_tucker(&mut open(path.as_ref())?)
}

pub fn save_dmd(path: impl AsRef<Path>, model: &DmdModel) -> Result<()> {
    let mut w = create(path.as_ref())?;
    write_dmd(&mut w, model)?;
    Ok(w.flush()?)
}

pub fn load_dmd(path: impl AsRef<Path>) -> Result<DmdModel> {
    read_dmd(&mut open(path.as_ref())?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synthetic::{random_sequence, random_tucker_model};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn tensor_bytes_follow_vec_order() {
        let t = ChannelTensor::from_fn([2, 1, 2], |i, _, k| Complex64::new(i as f64, k as f64)).unwrap();
        let mut buf = Vec::new();
        write_tensor(&mut buf, &t).unwrap();
        assert!(buf.starts_with(b"CT1 2 1 2\n"));
        let payload = &buf[10..];
        assert_eq!(payload.len(), 4 * 16);
        // entry (1, 0, 0) is second in vec order
        assert_eq!(f64::from_le_bytes(payload[16..24].try_into().unwrap()), 1.0);
        assert_eq!(f64::from_le_bytes(payload[24..32].try_into().unwrap()), 0.0);
        // entry (0, 0, 1) is third
        assert_eq!(f64::from_le_bytes(payload[40..48].try_into().unwrap()), 1.0);
        assert_eq!(read_tensor(&mut &buf[..]).unwrap(), t);
    }

    #[test]
    fn sequence_round_trip_is_bit_exact() {
        let seq = random_sequence([2, 3, 4], 5, 1);
        let seq = ChannelSequence::new(seq.into_snapshots(), 7.5).unwrap();
        let mut buf = Vec::new();
        write_sequence(&mut buf, &seq).unwrap();
        assert!(buf.starts_with(b"CTS1 5 2 3 4 7.5\n"));
        let back = read_sequence(&mut &buf[..]).unwrap();
        assert_eq!(back.snapshots(), seq.snapshots());
        assert_eq!(back.period_ms(), 7.5);
    }

    #[test]
    fn tucker_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let model = random_tucker_model([3, 4, 5], [2, 3, 1], &mut rng);
        let mut buf = Vec::new();
        write_tucker(&mut buf, &model).unwrap();
        assert!(buf.starts_with(b"TKM1 3 2 4 3 5 1\n"));
        assert_eq!(read_tucker(&mut &buf[..]).unwrap(), model);
    }

    #[test]
    fn dmd_round_trip() {
        let modes = ComplexMatrix::from_fn(4, 2, |i, j| Complex64::new(i as f64, j as f64));
        let eigs = vec![Complex64::new(0.9, 0.1), Complex64::new(0.5, -0.2)];
        let amps = ComplexVector::from_vec(vec![Complex64::new(1.0, 0.0), Complex64::new(0.0, 2.0)]);
        let model = DmdModel::new(modes, eigs, amps).unwrap();
        let mut buf = Vec::new();
        write_dmd(&mut buf, &model).unwrap();
        assert!(buf.starts_with(b"DMD1 4 2\n"));
        assert_eq!(read_dmd(&mut &buf[..]).unwrap(), model);
    }

    #[test]
    fn malformed_inputs_are_format_errors() {
        let t = ChannelTensor::zeros([1, 1, 2]).unwrap();
        let mut good = Vec::new();
        write_tensor(&mut good, &t).unwrap();

        let mut truncated = good.clone();
        truncated.pop();
        let mut trailing = good.clone();
        trailing.push(0);
        let cases: Vec<Vec<u8>> = vec![
            truncated,
            trailing,
            b"CT2 1 1 2\n".to_vec(),
            b"CT1 1 1\n".to_vec(),
            b"CT1 1 0 2\n".to_vec(),
            b"CT1 1 1 2".to_vec(),
            b"CTS1 1 1 1 1 -5\n".to_vec(),
        ];
        for bytes in cases {
            let err = read_tensor(&mut &bytes[..])
                .err()
                .or_else(|| read_sequence(&mut &bytes[..]).err())
                .unwrap();
            assert!(matches!(err, Error::Format(_)), "{err}");
        }

        // NaN payload is rejected by the tensor invariant
        let mut nan = b"CT1 1 1 1\n".to_vec();
        nan.extend_from_slice(&f64::NAN.to_le_bytes());
        nan.extend_from_slice(&0f64.to_le_bytes());
        assert!(matches!(read_tensor(&mut &nan[..]), Err(Error::Format(_))));
    }

    #[test]
    fn non_orthonormal_tucker_file_rejected() {
        let mut buf = b"TKM1 1 1 1 1 1 1\n".to_vec();
        for v in [2.0f64, 0.0, 1.0, 0.0, 1.0, 0.0] {
            buf.extend_from_slice(&v.to_le_bytes());
        }
        assert!(matches!(read_tucker(&mut &buf[..]), Err(Error::Format(_))));
    }
}
