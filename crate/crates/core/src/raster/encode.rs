use super::Raster;

/// Binary PPM (`P6`), 8 bits per channel, rows top to bottom.
pub fn encode_ppm(r: &Raster) -> Vec<u8> {
    let mut out = format!("P6\n{} {}\n255\n", r.width, r.height).into_bytes();
    out.reserve(r.pixels.len() * 3);
    for p in &r.pixels {
        out.extend_from_slice(&[p.r, p.g, p.b]);
    }
    out
}

/// 8-bit RGB, non-interlaced PNG.
pub fn encode_png(r: &Raster) -> Vec<u8> {
    let mut out = Vec::new();
    {
        let mut encoder = png::Encoder::new(&mut out, r.width, r.height);
        encoder.set_color(png::ColorType::Rgb);
        encoder.set_depth(png::BitDepth::Eight);
        let mut writer = encoder.write_header().expect("in-memory png header");
        let data: Vec<u8> = r.pixels.iter().flat_map(|p| [p.r, p.g, p.b]).collect();
        writer.write_image_data(&data).expect("in-memory png data");
    }
    out
}
