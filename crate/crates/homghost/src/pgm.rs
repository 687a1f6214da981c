//! Binary (P5) PGM read/write. Masks use 255 = white/transmit, 0 = black;
//! on read, any value >= 128 counts as white.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};

pub fn write_pgm(path: &Path, width: u32, height: u32, data: &[u8]) -> Result<()> {
    if data.len() != width as usize * height as usize {
        return Err(Error::invalid(format!(
            "pgm payload {} bytes for {}x{}",
            data.len(),
            width,
            height
        )));
    }
    let mut w = BufWriter::new(File::create(path)?);
    write!(w, "P5\n{width} {height}\n255\n")?;
    w.write_all(data)?;
    w.flush()?;
    Ok(())
}

pub fn read_pgm(path: &Path) -> Result<(u32, u32, Vec<u8>)> {
    let mut r = BufReader::new(File::open(path)?);
    let mut raw = Vec::new();
    r.read_to_end(&mut raw)?;
    parse_pgm(&raw)
}

fn parse_pgm(raw: &[u8]) -> Result<(u32, u32, Vec<u8>)> {
    let mut pos = 0usize;
    let magic = next_token(raw, &mut pos).ok_or_else(|| Error::Pgm("missing magic".into()))?;
    if magic != b"P5" {
        return Err(Error::Pgm("not a P5 file".into()));
    }
    let mut dims = [0u32; 3];
    for d in dims.iter_mut() {
        let tok = next_token(raw, &mut pos).ok_or_else(|| Error::Pgm("truncated header".into()))?;
        let s = std::str::from_utf8(tok).map_err(|_| Error::Pgm("non-ascii header".into()))?;
        *d = s
            .parse()
            .map_err(|_| Error::Pgm(format!("bad header token {s:?}")))?;
    }
    let [width, height, maxval] = dims;
    if maxval == 0 || maxval > 255 {
        return Err(Error::Pgm(format!("unsupported maxval {maxval}")));
    }
    // Exactly one whitespace byte separates the header from the payload.
    let n = width as usize * height as usize;
    let data = raw
        .get(pos..pos + n)
        .ok_or_else(|| Error::Pgm("truncated payload".into()))?;
    Ok((width, height, data.to_vec()))
}

/// Advances past whitespace and `#` comments, returning the next token.
/// Leaves `pos` one byte past the token's trailing delimiter.
fn next_token<'a>(raw: &'a [u8], pos: &mut usize) -> Option<&'a [u8]> {
    loop {
        while *pos < raw.len() && raw[*pos].is_ascii_whitespace() {
            *pos += 1;
        }
        if *pos < raw.len() && raw[*pos] == b'#' {
            while *pos < raw.len() && raw[*pos] != b'\n' {
                *pos += 1;
            }
            continue;
        }
        break;
    }
    if *pos >= raw.len() {
        return None;
    }
    let start = *pos;
    while *pos < raw.len() && !raw[*pos].is_ascii_whitespace() {
        *pos += 1;
    }
    let tok = &raw[start..*pos];
    *pos += 1; // consume the single delimiter before binary data
    Some(tok)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.pgm");
        let data: Vec<u8> = (0..12).map(|i| (i * 20) as u8).collect();
        write_pgm(&path, 4, 3, &data).unwrap();
        let (w, h, back) = read_pgm(&path).unwrap();
        assert_eq!((w, h), (4, 3));
        assert_eq!(back, data);
    }

    #[test]
    fn comments_in_header() {
        let raw = b"P5\n# a comment\n2 2\n255\n\x00\xff\x80\x7f";
        let (w, h, data) = parse_pgm(raw).unwrap();
        assert_eq!((w, h), (2, 2));
        assert_eq!(data, vec![0x00, 0xff, 0x80, 0x7f]);
    }

    #[test]
    fn rejects_non_p5() {
        assert!(parse_pgm(b"P2\n2 2\n255\n....").is_err());
    }
}
