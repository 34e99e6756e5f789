use std::io::Write;

use crate::error::{Error, Result};
use crate::geometry::Vec3;
use crate::reconstruction::PointCloud;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PlyFormat {
    #[default]
    Ascii,
    BinaryLittleEndian,
}

impl PlyFormat {
    fn header_name(self) -> &'static str {
        match self {
            PlyFormat::Ascii => "ascii",
            PlyFormat::BinaryLittleEndian => "binary_little_endian",
        }
    }
}

/// Serializes a cloud as PLY with `float` coordinates and optional `uchar`
/// colors. ASCII coordinates carry six decimals; lines end in `\n`.
pub fn write_ply(cloud: &PointCloud, format: PlyFormat) -> Vec<u8> {
    let mut out = Vec::new();
    write_ply_to(&mut out, cloud, format).expect("writing to a Vec cannot fail");
    out
}

pub fn write_ply_to<W: Write>(w: &mut W, cloud: &PointCloud, format: PlyFormat) -> std::io::Result<()> {
    writeln!(w, "ply")?;
    writeln!(w, "format {} 1.0", format.header_name())?;
    writeln!(w, "comment laserforge")?;
    writeln!(w, "element vertex {}", cloud.points.len())?;
    for axis in ["x", "y", "z"] {
        writeln!(w, "property float {axis}")?;
    }
    if cloud.colors.is_some() {
        for channel in ["red", "green", "blue"] {
            writeln!(w, "property uchar {channel}")?;
        }
    }
    writeln!(w, "end_header")?;
    for (i, p) in cloud.points.iter().enumerate() {
        let color = cloud.colors.as_ref().map(|c| c[i]);
        match format {
            PlyFormat::Ascii => {
                // Round through f32 so both encodings carry the same values.
                let (x, y, z) = (p.x as f32, p.y as f32, p.z as f32);
                write!(w, "{x:.6} {y:.6} {z:.6}")?;
                if let Some([r, g, b]) = color {
                    write!(w, " {r} {g} {b}")?;
                }
                writeln!(w)?;
            }
            PlyFormat::BinaryLittleEndian => {
                for c in [p.x, p.y, p.z] {
                    w.write_all(&(c as f32).to_le_bytes())?;
                }
                if let Some(rgb) = color {
                    w.write_all(&rgb)?;
                }
            }
        }
    }
    Ok(())
}

/// Reads the PLY layouts produced by [`write_ply`].
pub fn read_ply(bytes: &[u8]) -> Result<PointCloud> {
    let mut pos = 0;
    let mut next_line = || -> Result<&str> {
        let rest = &bytes[pos..];
        let end = rest
            .iter()
            .position(|b| *b == b'\n')
            .ok_or(Error::Truncated)?;
        pos += end + 1;
        std::str::from_utf8(&rest[..end])
            .map(|s| s.trim_end_matches('\r'))
            .map_err(|_| Error::Parse("PLY header is not UTF-8".into()))
    };
    if next_line()? != "ply" {
        return Err(Error::BadMagic("ply"));
    }
    let mut format = None;
    let mut count = None;
    let mut props = Vec::new();
    loop {
        let line = next_line()?;
        let fields: Vec<&str> = line.split_whitespace().collect();
        match fields.as_slice() {
            ["end_header"] => break,
            ["format", "ascii", "1.0"] => format = Some(PlyFormat::Ascii),
            ["format", "binary_little_endian", "1.0"] => {
                format = Some(PlyFormat::BinaryLittleEndian)
            }
            ["format", other, ..] => {
                return Err(Error::Parse(format!("unsupported PLY format {other}")))
            }
            ["comment", ..] | ["obj_info", ..] => {}
            ["element", "vertex", n] => {
                count = Some(
                    n.parse::<usize>()
                        .map_err(|_| Error::Parse(format!("bad vertex count {n}")))?,
                )
            }
            ["element", other, ..] => {
                return Err(Error::Parse(format!("unsupported PLY element {other}")))
            }
            ["property", ty, name] => props.push(((*ty).to_owned(), (*name).to_owned())),
            _ => return Err(Error::Parse(format!("unexpected PLY header line `{line}`"))),
        }
    }
    let format = format.ok_or_else(|| Error::MissingField("format".into()))?;
    let count = count.ok_or_else(|| Error::MissingField("element vertex".into()))?;
    let names: Vec<&str> = props.iter().map(|(_, n)| n.as_str()).collect();
    let has_color = match names.as_slice() {
        ["x", "y", "z"] => false,
        ["x", "y", "z", "red", "green", "blue"] => true,
        _ => return Err(Error::Parse(format!("unsupported PLY properties {names:?}"))),
    };
    let float_ok = props[..3].iter().all(|(t, _)| t == "float" || t == "float32");
    let uchar_ok = props[3..].iter().all(|(t, _)| t == "uchar" || t == "uint8");
    if !float_ok || !uchar_ok {
        return Err(Error::Parse("unsupported PLY property types".into()));
    }

    let body = &bytes[pos..];
    let mut points = Vec::with_capacity(count);
    let mut colors = has_color.then(|| Vec::with_capacity(count));
    match format {
        PlyFormat::Ascii => {
            let text = std::str::from_utf8(body)
                .map_err(|_| Error::Parse("PLY body is not UTF-8".into()))?;
            let mut lines = text.lines().filter(|l| !l.trim().is_empty());
            for _ in 0..count {
                let line = lines.next().ok_or(Error::Truncated)?;
                let vals: Vec<&str> = line.split_whitespace().collect();
                let want = if has_color { 6 } else { 3 };
                if vals.len() != want {
                    return Err(Error::Parse(format!("bad vertex line `{line}`")));
                }
                let f = |s: &str| {
                    s.parse::<f32>()
                        .map(f64::from)
                        .map_err(|_| Error::Parse(format!("bad coordinate `{s}`")))
                };
                points.push(Vec3::new(f(vals[0])?, f(vals[1])?, f(vals[2])?));
                if let Some(c) = colors.as_mut() {
                    let b = |s: &str| {
                        s.parse::<u8>()
                            .map_err(|_| Error::Parse(format!("bad color `{s}`")))
                    };
                    c.push([b(vals[3])?, b(vals[4])?, b(vals[5])?]);
                }
            }
        }
        PlyFormat::BinaryLittleEndian => {
            let stride = if has_color { 15 } else { 12 };
            if body.len() < count * stride {
                return Err(Error::Truncated);
            }
            for chunk in body.chunks_exact(stride).take(count) {
                let f = |i: usize| {
                    f64::from(f32::from_le_bytes(
                        chunk[4 * i..4 * i + 4].try_into().expect("4 bytes"),
                    ))
                };
                points.push(Vec3::new(f(0), f(1), f(2)));
                if let Some(c) = colors.as_mut() {
                    c.push([chunk[12], chunk[13], chunk[14]]);
                }
            }
        }
    }
    Ok(PointCloud { points, colors })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_ascii_header() {
        let text = String::from_utf8(write_ply(&PointCloud::default(), PlyFormat::Ascii)).unwrap();
        assert_eq!(
            text,
            "ply\nformat ascii 1.0\ncomment laserforge\nelement vertex 0\n\
             property float x\nproperty float y\nproperty float z\nend_header\n"
        );
    }

    #[test]
    fn ascii_vertex_line() {
        let cloud = PointCloud::new(vec![Vec3::new(1.0, 2.5, -3.0)]);
        let text = String::from_utf8(write_ply(&cloud, PlyFormat::Ascii)).unwrap();
        assert!(text.ends_with("end_header\n1.000000 2.500000 -3.000000\n"));
    }

    #[test]
    fn colored_header_and_roundtrip() {
        let cloud = PointCloud::with_colors(
            vec![Vec3::new(0.5, -1.25, 7.0), Vec3::new(3.0, 4.0, 5.0)],
            vec![[255, 0, 10], [1, 2, 3]],
        )
        .unwrap();
        for format in [PlyFormat::Ascii, PlyFormat::BinaryLittleEndian] {
            let bytes = write_ply(&cloud, format);
            let text = String::from_utf8_lossy(&bytes);
            assert!(text.contains("property uchar red\nproperty uchar green\nproperty uchar blue\nend_header\n"));
            assert_eq!(read_ply(&bytes).unwrap(), cloud);
        }
    }

    #[test]
    fn rejects_garbage() {
        assert!(matches!(read_ply(b"plx\n"), Err(Error::BadMagic(_))));
        assert!(matches!(read_ply(b"ply\nformat ascii 1.0\n"), Err(Error::Truncated)));
        let mut bytes = write_ply(
            &PointCloud::new(vec![Vec3::ZERO; 3]),
            PlyFormat::BinaryLittleEndian,
        );
        bytes.truncate(bytes.len() - 1);
        assert!(matches!(read_ply(&bytes), Err(Error::Truncated)));
    }
}
