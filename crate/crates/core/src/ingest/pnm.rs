//! Netpbm greymaps and pixmaps (P2, P3, P5, P6).

use std::path::Path;

use crate::error::{CdamError, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct PnmImage {
    pub width: usize,
    pub height: usize,
    pub channels: usize,
    pub maxval: u32,
    /// Row-major, channel-minor samples.
    pub samples: Vec<u32>,
}

struct Header<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl Header<'_> {
    fn token(&mut self) -> Result<&str> {
        loop {
            while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_whitespace() {
                self.pos += 1;
            }
            if self.bytes.get(self.pos) == Some(&b'#') {
                while self.pos < self.bytes.len() && self.bytes[self.pos] != b'\n' {
                    self.pos += 1;
                }
                continue;
            }
            break;
        }
        let start = self.pos;
        while self.pos < self.bytes.len() && !self.bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(CdamError::Length("netpbm data ended early".into()));
        }
        std::str::from_utf8(&self.bytes[start..self.pos])
            .map_err(|_| CdamError::Format("netpbm header is not ASCII".into()))
    }

    fn number(&mut self) -> Result<u32> {
        let tok = self.token()?;
        tok.parse()
            .map_err(|_| CdamError::Format(format!("netpbm: bad number `{tok}`")))
    }
}

pub fn parse_pnm(bytes: &[u8]) -> Result<PnmImage> {
    let mut hd = Header { bytes, pos: 0 };
    let magic = hd.token()?.to_string();
    let (channels, ascii) = match magic.as_str() {
        "P2" => (1, true),
        "P3" => (3, true),
        "P5" => (1, false),
        "P6" => (3, false),
        other => {
            return Err(CdamError::Format(format!(
                "unsupported netpbm magic `{other}`"
            )))
        }
    };
    let width = hd.number()? as usize;
    let height = hd.number()? as usize;
    let maxval = hd.number()?;
    if maxval == 0 || maxval > 65535 {
        return Err(CdamError::Format(format!("netpbm maxval {maxval} out of range")));
    }
    let count = width * height * channels;
    let mut samples = Vec::with_capacity(count);
    if ascii {
        for _ in 0..count {
            samples.push(hd.number()?);
        }
    } else {
        // exactly one whitespace byte separates maxval from the raster
        let start = hd.pos + 1;
        let wide = maxval > 255;
        let need = count * if wide { 2 } else { 1 };
        let raster = bytes.get(start..start + need).ok_or_else(|| {
            CdamError::Length(format!(
                "netpbm raster has {} bytes, expected {need}",
                bytes.len().saturating_sub(start)
            ))
        })?;
        if wide {
            samples.extend(
                raster
                    .chunks_exact(2)
                    .map(|b| u32::from(u16::from_be_bytes([b[0], b[1]]))),
            );
        } else {
            samples.extend(raster.iter().map(|&b| u32::from(b)));
        }
    }
    if let Some(&bad) = samples.iter().find(|&&s| s > maxval) {
        return Err(CdamError::Format(format!(
            "netpbm sample {bad} exceeds maxval {maxval}"
        )));
    }
    Ok(PnmImage {
        width,
        height,
        channels,
        maxval,
        samples,
    })
}

pub fn read_pnm(path: &Path) -> Result<PnmImage> {
    parse_pnm(&std::fs::read(path)?)
}
