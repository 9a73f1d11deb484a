//! Image and sequence I/O: binary PGM (P5, 8- or 10-bit) and Y4M (mono or
//! 4:2:0, 8-bit).

use std::io::{BufRead, Read, Write};

use crate::plane::PixelPlane;
use crate::{Error, Result};

/// One video frame: a luma plane and, for 4:2:0 content, two half-size
/// chroma planes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Frame {
    pub y: PixelPlane,
    pub chroma: Option<(PixelPlane, PixelPlane)>,
}

impl Frame {
    pub fn mono(y: PixelPlane) -> Self {
        Self { y, chroma: None }
    }

    pub fn yuv420(y: PixelPlane, u: PixelPlane, v: PixelPlane) -> Result<Self> {
        if u.width != (y.width + 1) / 2
            || u.height != (y.height + 1) / 2
            || v.width != u.width
            || v.height != u.height
        {
            return Err(Error::DimensionMismatch(
                "chroma planes must be half the luma size".into(),
            ));
        }
        Ok(Self { y, chroma: Some((u, v)) })
    }
}

// ---------------------------------------------------------------- PGM --

pub fn read_pgm<R: Read>(r: &mut R) -> Result<PixelPlane> {
    let mut data = Vec::new();
    r.read_to_end(&mut data)?;
    let mut pos = 0usize;
    let magic = next_token(&data, &mut pos)?;
    if magic != b"P5" {
        return Err(Error::MalformedInput("not a binary PGM (P5) file".into()));
    }
    let width = parse_dim(&data, &mut pos, "width")?;
    let height = parse_dim(&data, &mut pos, "height")?;
    let maxval = parse_dim(&data, &mut pos, "maxval")?;
    // Exactly one whitespace byte separates the header from the raster.
    pos += 1;
    let bit_depth = match maxval {
        255 => 8u8,
        1023 => 10,
        other => {
            return Err(Error::MalformedInput(format!(
                "unsupported PGM maxval {other} (255 or 1023)"
            )))
        }
    };
    let n = width * height;
    let bytes_per = if maxval > 255 { 2 } else { 1 };
    if data.len() < pos + n * bytes_per {
        return Err(Error::Truncated("PGM raster shorter than header promises".into()));
    }
    let samples: Vec<i32> = if bytes_per == 1 {
        data[pos..pos + n].iter().map(|&b| b as i32).collect()
    } else {
        data[pos..pos + 2 * n]
            .chunks_exact(2)
            .map(|c| ((c[0] as i32) << 8) | c[1] as i32)
            .collect()
    };
    if samples.iter().any(|&s| s > maxval as i32) {
        return Err(Error::MalformedInput("PGM sample exceeds maxval".into()));
    }
    PixelPlane::new(width, height, bit_depth, samples)
}

pub fn write_pgm<W: Write>(w: &mut W, plane: &PixelPlane) -> Result<()> {
    let maxval = plane.max_value();
    write!(w, "P5\n{} {}\n{}\n", plane.width, plane.height, maxval)?;
    if maxval > 255 {
        for &s in &plane.samples {
            w.write_all(&(s as u16).to_be_bytes())?;
        }
    } else {
        let bytes: Vec<u8> = plane.samples.iter().map(|&s| s as u8).collect();
        w.write_all(&bytes)?;
    }
    Ok(())
}

fn next_token<'a>(data: &'a [u8], pos: &mut usize) -> Result<&'a [u8]> {
    loop {
        while *pos < data.len() && data[*pos].is_ascii_whitespace() {
            *pos += 1;
        }
        if *pos < data.len() && data[*pos] == b'#' {
            while *pos < data.len() && data[*pos] != b'\n' {
                *pos += 1;
            }
            continue;
        }
        break;
    }
    let start = *pos;
    while *pos < data.len() && !data[*pos].is_ascii_whitespace() {
        *pos += 1;
    }
    if start == *pos {
        return Err(Error::Truncated("PGM header ended unexpectedly".into()));
    }
    Ok(&data[start..*pos])
}

fn parse_dim(data: &[u8], pos: &mut usize, what: &str) -> Result<usize> {
    let tok = next_token(data, pos)?;
    std::str::from_utf8(tok)
        .ok()
        .and_then(|s| s.parse::<usize>().ok())
        .filter(|&v| v > 0)
        .ok_or_else(|| Error::MalformedInput(format!("bad PGM {what}")))
}

// ---------------------------------------------------------------- Y4M --

#[derive(Debug, Clone)]
pub struct Y4mHeader {
    pub width: usize,
    pub height: usize,
    pub mono: bool,
    pub fps: (u32, u32),
}

pub struct Y4mReader<R: BufRead> {
    inner: R,
    pub header: Y4mHeader,
}

impl<R: BufRead> Y4mReader<R> {
    pub fn new(mut inner: R) -> Result<Self> {
        let mut line = String::new();
        inner.read_line(&mut line)?;
        let line = line.trim_end();
        let mut parts = line.split(' ');
        if parts.next() != Some("YUV4MPEG2") {
            return Err(Error::MalformedInput("not a Y4M stream".into()));
        }
        let (mut width, mut height, mut mono, mut fps) = (0, 0, false, (25, 1));
        for p in parts {
            match p.split_at(1) {
                ("W", v) => width = v.parse().map_err(|_| bad_y4m("width"))?,
                ("H", v) => height = v.parse().map_err(|_| bad_y4m("height"))?,
                ("F", v) => {
                    let (n, d) = v.split_once(':').ok_or_else(|| bad_y4m("frame rate"))?;
                    fps = (
                        n.parse().map_err(|_| bad_y4m("frame rate"))?,
                        d.parse().map_err(|_| bad_y4m("frame rate"))?,
                    );
                }
                ("C", v) => match v {
                    "420" | "420jpeg" | "420mpeg2" | "420paldv" => mono = false,
                    "mono" => mono = true,
                    other => {
                        return Err(Error::MalformedInput(format!(
                            "unsupported Y4M chroma format C{other}"
                        )))
                    }
                },
                _ => {} // interlacing/aspect parameters are ignored
            }
        }
        if width == 0 || height == 0 {
            return Err(bad_y4m("dimensions"));
        }
        Ok(Self { inner, header: Y4mHeader { width, height, mono, fps } })
    }

    /// Reads the next frame; `Ok(None)` at a clean end of stream.
    pub fn next_frame(&mut self) -> Result<Option<Frame>> {
        let mut line = String::new();
        let n = self.inner.read_line(&mut line)?;
        if n == 0 {
            return Ok(None);
        }
        if !line.starts_with("FRAME") {
            return Err(Error::MalformedInput("missing Y4M FRAME marker".into()));
        }
        let (w, h, mono) = (self.header.width, self.header.height, self.header.mono);
        let y = self.read_plane(w, h)?;
        if mono {
            return Ok(Some(Frame::mono(y)));
        }
        let (cw, ch) = ((w + 1) / 2, (h + 1) / 2);
        let u = self.read_plane(cw, ch)?;
        let v = self.read_plane(cw, ch)?;
        Ok(Some(Frame::yuv420(y, u, v)?))
    }

    fn read_plane(&mut self, w: usize, h: usize) -> Result<PixelPlane> {
        let mut buf = vec![0u8; w * h];
        self.inner
            .read_exact(&mut buf)
            .map_err(|_| Error::Truncated("Y4M frame data truncated".into()))?;
        PixelPlane::new(w, h, 8, buf.into_iter().map(|b| b as i32).collect())
    }
}

fn bad_y4m(what: &str) -> Error {
    Error::MalformedInput(format!("bad Y4M {what}"))
}

pub struct Y4mWriter<W: Write> {
    inner: W,
    header: Y4mHeader,
}

impl<W: Write> Y4mWriter<W> {
    pub fn new(mut inner: W, header: Y4mHeader) -> Result<Self> {
        let chroma = if header.mono { "mono" } else { "420" };
        writeln!(
            inner,
            "YUV4MPEG2 W{} H{} F{}:{} Ip A1:1 C{chroma}",
            header.width, header.height, header.fps.0, header.fps.1
        )?;
        Ok(Self { inner, header })
    }

    pub fn write_frame(&mut self, frame: &Frame) -> Result<()> {
        if frame.y.width != self.header.width
            || frame.y.height != self.header.height
            || frame.chroma.is_some() == self.header.mono
        {
            return Err(Error::DimensionMismatch(
                "frame does not match the Y4M stream header".into(),
            ));
        }
        writeln!(self.inner, "FRAME")?;
        write_plane(&mut self.inner, &frame.y)?;
        if let Some((u, v)) = &frame.chroma {
            write_plane(&mut self.inner, u)?;
            write_plane(&mut self.inner, v)?;
        }
        Ok(())
    }
}

fn write_plane<W: Write>(w: &mut W, plane: &PixelPlane) -> Result<()> {
    let bytes: Vec<u8> = plane.samples.iter().map(|&s| s.clamp(0, 255) as u8).collect();
    w.write_all(&bytes)?;
    Ok(())
}
