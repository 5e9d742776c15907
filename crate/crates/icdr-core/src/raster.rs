//! Decoded 8-bit RGB image buffer.

/// One pixel: R, G, B.
pub type Pixel = [u8; 3];

/// A decoded 8-bit RGB image: width, height, row-major pixel array.
///
/// This is the only image representation the disarm pipeline operates on;
/// everything that is not representable here (metadata, trailing bytes,
/// coefficient-level side data) is gone by construction once a file has been
/// rebuilt from its `Raster`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Raster {
    width: u32,
    height: u32,
    pixels: Vec<Pixel>,
}

impl Raster {
    /// Build from parts. Panics if `pixels.len() != width * height`;
    /// callers construct rasters from trusted dimensions only.
    pub fn from_pixels(width: u32, height: u32, pixels: Vec<Pixel>) -> Self {
        assert_eq!(
            pixels.len(),
            width as usize * height as usize,
            "pixel buffer does not match dimensions"
        );
        Self { width, height, pixels }
    }

    /// Solid-color raster.
    pub fn filled(width: u32, height: u32, color: Pixel) -> Self {
        Self::from_pixels(width, height, vec![color; width as usize * height as usize])
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn pixel_count(&self) -> u64 {
        self.width as u64 * self.height as u64
    }

    pub fn pixels(&self) -> &[Pixel] {
        &self.pixels
    }

    pub fn pixels_mut(&mut self) -> &mut [Pixel] {
        &mut self.pixels
    }

    #[inline]
    pub fn get(&self, x: u32, y: u32) -> Pixel {
        self.pixels[y as usize * self.width as usize + x as usize]
    }

    #[inline]
    pub fn set(&mut self, x: u32, y: u32, p: Pixel) {
        self.pixels[y as usize * self.width as usize + x as usize] = p;
    }

    /// Sample with coordinates clamped to the image border.
    #[inline]
    pub fn get_clamped(&self, x: i64, y: i64) -> Pixel {
        let cx = x.clamp(0, self.width as i64 - 1) as u32;
        let cy = y.clamp(0, self.height as i64 - 1) as u32;
        self.get(cx, cy)
    }

    /// BT.601 integer luma: (77 R + 150 G + 29 B + 128) >> 8.
    pub fn luma_plane(&self) -> Vec<u8> {
        self.pixels
            .iter()
            .map(|&[r, g, b]| {
                ((77 * r as u32 + 150 * g as u32 + 29 * b as u32 + 128) >> 8) as u8
            })
            .collect()
    }
}
