//! Binary PGM (P5) and PPM (P6) encoders.

use crate::error::{Error, Result};

/// Grayscale P5 with maxval 255.
pub fn encode_pgm(width: usize, height: usize, pixels: &[u8]) -> Result<Vec<u8>> {
    if pixels.len() != width * height {
        return Err(Error::InvalidArgument(format!(
            "{} pixels for a {width}x{height} image",
            pixels.len()
        )));
    }
    let mut out = format!("P5\n{width} {height}\n255\n").into_bytes();
    out.extend_from_slice(pixels);
    Ok(out)
}

/// RGB P6 with maxval 255; `rgb` holds three bytes per pixel.
pub fn encode_ppm(width: usize, height: usize, rgb: &[u8]) -> Result<Vec<u8>> {
    if rgb.len() != 3 * width * height {
        return Err(Error::InvalidArgument(format!(
            "{} bytes for a {width}x{height} RGB image",
            rgb.len()
        )));
    }
    let mut out = format!("P6\n{width} {height}\n255\n").into_bytes();
    out.extend_from_slice(rgb);
    Ok(out)
}

/// Black → blue → red → yellow → white ramp.
pub fn false_color(v: u8) -> [u8; 3] {
    const STOPS: [(f64, [f64; 3]); 5] = [
        (0.0, [0.0, 0.0, 0.0]),
        (0.25, [32.0, 0.0, 160.0]),
        (0.5, [200.0, 30.0, 60.0]),
        (0.75, [250.0, 180.0, 0.0]),
        (1.0, [255.0, 255.0, 255.0]),
    ];
    let t = v as f64 / 255.0;
    let i = STOPS.iter().rposition(|s| s.0 <= t).unwrap_or(0).min(STOPS.len() - 2);
    let (t0, c0) = STOPS[i];
    let (t1, c1) = STOPS[i + 1];
    let s = (t - t0) / (t1 - t0);
    std::array::from_fn(|k| (c0[k] + s * (c1[k] - c0[k])).round() as u8)
}

pub fn colorize(pixels: &[u8]) -> Vec<u8> {
    pixels.iter().flat_map(|&p| false_color(p)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pgm_layout() {
        let img = encode_pgm(2, 1, &[0, 255]).unwrap();
        assert_eq!(img, b"P5\n2 1\n255\n\x00\xff".to_vec());
        assert!(encode_pgm(2, 2, &[0]).is_err());
    }

    #[test]
    fn ppm_layout() {
        let rgb = colorize(&[0, 255]);
        assert_eq!(rgb, vec![0, 0, 0, 255, 255, 255]);
        let img = encode_ppm(2, 1, &rgb).unwrap();
        assert!(img.starts_with(b"P6\n2 1\n255\n"));
        assert_eq!(img.len(), 11 + 6);
    }

    #[test]
    fn ramp_is_monotone_in_brightness() {
        let lum = |c: [u8; 3]| c.iter().map(|&x| x as u32).sum::<u32>();
        assert!(lum(false_color(0)) < lum(false_color(128)));
        assert!(lum(false_color(128)) < lum(false_color(255)));
    }
}
