//! 8-bit grayscale raster.

/// Row-major 8-bit grayscale image.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrayImage {
    width: u32,
    height: u32,
    data: Vec<u8>,
}

impl GrayImage {
    pub fn new(width: u32, height: u32) -> Self {
        Self::filled(width, height, 0)
    }

    pub fn filled(width: u32, height: u32, value: u8) -> Self {
        assert!(width > 0 && height > 0, "image dimensions must be positive");
        Self {
            width,
            height,
            data: vec![value; width as usize * height as usize],
        }
    }

    pub fn from_raw(width: u32, height: u32, data: Vec<u8>) -> Self {
        assert_eq!(data.len(), width as usize * height as usize);
        Self { width, height, data }
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn data(&self) -> &[u8] {
        &self.data
    }

    #[inline]
    pub fn get(&self, x: u32, y: u32) -> u8 {
        self.data[y as usize * self.width as usize + x as usize]
    }

    #[inline]
    pub fn set(&mut self, x: u32, y: u32, value: u8) {
        self.data[y as usize * self.width as usize + x as usize] = value;
    }

    /// Nearest pixel to real coordinates, clamped to the image bounds.
    #[inline]
    pub fn sample_nearest(&self, x: f64, y: f64) -> u8 {
        let xi = (x.floor() as i64).clamp(0, self.width as i64 - 1) as u32;
        let yi = (y.floor() as i64).clamp(0, self.height as i64 - 1) as u32;
        self.get(xi, yi)
    }
}

/// ITU-R BT.601 luminance, rounded to the nearest integer.
pub fn luminance(r: u8, g: u8, b: u8) -> u8 {
    (0.299 * r as f64 + 0.587 * g as f64 + 0.114 * b as f64).round() as u8
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sample_nearest_clamps() {
        let mut img = GrayImage::new(4, 3);
        img.set(0, 0, 10);
        img.set(3, 2, 20);
        assert_eq!(img.sample_nearest(-5.0, -5.0), 10);
        assert_eq!(img.sample_nearest(100.0, 100.0), 20);
        assert_eq!(img.sample_nearest(0.4, 0.9), 10);
    }

    #[test]
    fn luminance_matches_hand_computation() {
        // 0.299*200 + 0.587*100 + 0.114*50 = 59.8 + 58.7 + 5.7 = 124.2 -> 124
        assert_eq!(luminance(200, 100, 50), 124);
        assert_eq!(luminance(255, 255, 255), 255);
        assert_eq!(luminance(0, 0, 0), 0);
    }
}
