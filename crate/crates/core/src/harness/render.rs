//! Binary PPM (P6) pictures of `A Δ B`, one lattice site per pixel.

use std::path::Path;

use crate::error::{Error, Result};
use crate::lattice::{volume_equivalent_norm2, Aggregate, LatticePoint};

pub const BLUE: [u8; 3] = [0, 0, 255];
pub const RED: [u8; 3] = [255, 0, 0];
pub const WHITE: [u8; 3] = [255, 255, 255];
pub const BLACK: [u8; 3] = [0, 0, 0];

/// Image size; the origin sits at pixel `(width / 2, height / 2)` and `y`
/// grows upward.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RenderSpec {
    pub width: u32,
    pub height: u32,
}

impl RenderSpec {
    /// Smallest odd square holding the aggregate and the comparison ball.
    pub fn fit(a: &Aggregate) -> Result<Self> {
        let k = volume_equivalent_norm2(a.dim(), a.len() as u64)?;
        let r = a.outradius().max((k as f64).sqrt()).ceil() as u32;
        let side = 2 * r + 3;
        Ok(RenderSpec { width: side, height: side })
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct RenderStats {
    pub blue: u64,
    pub red: u64,
    pub white: u64,
}

/// Pixel colours: blue in `A` only, red in the equal-volume ball only,
/// white in both, black elsewhere.
pub fn render_symdiff_bytes(a: &Aggregate, spec: RenderSpec) -> Result<(Vec<u8>, RenderStats)> {
    if a.dim().get() != 2 {
        return Err(Error::InvalidArgument(format!("rendering needs d = 2, got d = {}", a.dim())));
    }
    if a.is_empty() {
        return Err(Error::EmptyAggregate);
    }
    let k = volume_equivalent_norm2(a.dim(), a.len() as u64)?;
    let header = format!("P6\n{} {}\n255\n", spec.width, spec.height);
    let mut out = Vec::with_capacity(header.len() + 3 * (spec.width * spec.height) as usize);
    out.extend_from_slice(header.as_bytes());
    let mut stats = RenderStats::default();
    let (cx, cy) = ((spec.width / 2) as i32, (spec.height / 2) as i32);
    for row in 0..spec.height as i32 {
        for col in 0..spec.width as i32 {
            let p = LatticePoint::new(&[col - cx, cy - row]);
            let in_a = a.contains(&p);
            let in_b = p.norm2() <= k;
            let c = match (in_a, in_b) {
                (true, false) => {
                    stats.blue += 1;
                    BLUE
                }
                (false, true) => {
                    stats.red += 1;
                    RED
                }
                (true, true) => {
                    stats.white += 1;
                    WHITE
                }
                (false, false) => BLACK,
            };
            out.extend_from_slice(&c);
        }
    }
    Ok((out, stats))
}

pub fn render_symdiff(a: &Aggregate, path: &Path, spec: RenderSpec) -> Result<RenderStats> {
    let (bytes, stats) = render_symdiff_bytes(a, spec)?;
    super::write_atomic(path, &bytes)?;
    Ok(stats)
}

/// A decoded P6 image.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Pixmap {
    pub width: u32,
    pub height: u32,
    pub pixels: Vec<[u8; 3]>,
}

impl Pixmap {
    pub fn get(&self, col: u32, row: u32) -> [u8; 3] {
        self.pixels[(row * self.width + col) as usize]
    }
}

/// Parses a binary PPM with maxval 255 (no comments).
pub fn read_p6(bytes: &[u8]) -> Result<Pixmap> {
    let bad = |m: &str| Error::InvalidArgument(format!("invalid P6 image: {m}"));
    let mut fields = Vec::new();
    let mut pos = 0;
    while fields.len() < 4 {
        while pos < bytes.len() && bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        let start = pos;
        while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        if start == pos {
            return Err(bad("truncated header"));
        }
        fields.push(std::str::from_utf8(&bytes[start..pos]).map_err(|_| bad("non-ascii header"))?.to_string());
    }
    if fields[0] != "P6" {
        return Err(bad("missing P6 magic"));
    }
    let width: u32 = fields[1].parse().map_err(|_| bad("width"))?;
    let height: u32 = fields[2].parse().map_err(|_| bad("height"))?;
    if fields[3] != "255" {
        return Err(bad("maxval must be 255"));
    }
    // exactly one whitespace byte separates the header from the raster
    let data = bytes.get(pos + 1..).ok_or_else(|| bad("missing raster"))?;
    if data.len() != 3 * width as usize * height as usize {
        return Err(bad("raster size does not match header"));
    }
    let pixels = data.chunks_exact(3).map(|c| [c[0], c[1], c[2]]).collect();
    Ok(Pixmap { width, height, pixels })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::Dim;

    fn d2() -> Dim {
        Dim::new(2).unwrap()
    }

    #[test]
    fn ball_is_all_white() {
        let a = Aggregate::ball(d2(), 10.0).unwrap();
        let spec = RenderSpec::fit(&a).unwrap();
        assert_eq!(spec.width, 23);
        let (bytes, stats) = render_symdiff_bytes(&a, spec).unwrap();
        assert_eq!(
            stats,
            RenderStats {
                blue: 0,
                red: 0,
                white: a.len() as u64
            }
        );
        let img = read_p6(&bytes).unwrap();
        assert_eq!(img.get(11, 11), WHITE);
        assert_eq!(img.get(21, 11), WHITE); // (10, 0)
        assert_eq!(img.get(22, 11), BLACK);
        assert_eq!(img.get(0, 0), BLACK);
    }

    #[test]
    fn one_extra_site_is_one_blue_pixel() {
        let mut a = Aggregate::ball(d2(), 10.0).unwrap();
        a.insert(LatticePoint::new(&[11, 0])).unwrap();
        let (bytes, stats) = render_symdiff_bytes(&a, RenderSpec::fit(&a).unwrap()).unwrap();
        assert_eq!(stats.blue, 1);
        // 318 sites need B[sqrt(101)], which adds the 8 points (±10, ±1), (±1, ±10)
        assert_eq!(stats.red, 8);
        let img = read_p6(&bytes).unwrap();
        let c = (img.width / 2) as u32;
        assert_eq!(img.get(c + 11, c), BLUE);
        assert_eq!(img.get(c + 10, c + 1), RED); // (10, -1)
    }

    #[test]
    fn needs_two_dimensions() {
        let a = Aggregate::ball(Dim::new(3).unwrap(), 2.0).unwrap();
        assert!(render_symdiff_bytes(&a, RenderSpec { width: 5, height: 5 }).is_err());
        assert!(read_p6(b"P5\n1 1\n255\n\0").is_err());
        assert!(read_p6(b"P6\n2 1\n255\n\0\0\0").is_err());
    }

    #[test]
    fn writes_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("fig.ppm");
        let a = Aggregate::ball(d2(), 3.0).unwrap();
        render_symdiff(&a, &path, RenderSpec::fit(&a).unwrap()).unwrap();
        let img = read_p6(&std::fs::read(&path).unwrap()).unwrap();
        assert_eq!(img.width, 9);
    }
}
