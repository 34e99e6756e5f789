use std::path::{Path, PathBuf};

use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::laser::ScanDirection;

use super::json::{field, get_array, get_f64, get_str, object, parse_json};
use super::read_file;

#[derive(Debug, Clone, PartialEq)]
pub struct SessionFrame {
    /// Radians. Stored in degrees on disk.
    pub angle: f64,
    pub image_path: PathBuf,
}

/// Everything `reconstruct` needs: frames plus calibration artifacts.
///
/// The turntable rotates the object by `+angle` about the axis (see
/// [`crate::geometry::turntable_spin`]); merging applies `-angle`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScanSession {
    pub intrinsics_path: PathBuf,
    pub laser_plane_path: PathBuf,
    pub axis_path: PathBuf,
    pub frames: Vec<SessionFrame>,
    pub threshold: u8,
    pub scan_direction: ScanDirection,
}

const ANGLE_CONVENTION: &str =
    "object turns by +angle_deg, right-handed about the axis directed down the image";

impl ScanSession {
    /// JSON document with paths written as given (relative paths resolve
    /// against the session file's directory when loaded).
    pub fn to_json(&self) -> Value {
        let path = |p: &Path| p.to_string_lossy().into_owned();
        json!({
            "intrinsics_path": path(&self.intrinsics_path),
            "laser_plane_path": path(&self.laser_plane_path),
            "axis_path": path(&self.axis_path),
            "frames": self.frames.iter().map(|f| json!({
                "angle_deg": f.angle.to_degrees(),
                "image_path": path(&f.image_path),
            })).collect::<Vec<_>>(),
            "threshold": self.threshold,
            "scan_direction": match self.scan_direction {
                ScanDirection::Rows => "rows",
                ScanDirection::Columns => "columns",
            },
            "angle_convention": ANGLE_CONVENTION,
        })
    }

    /// Parses and validates a session document. Paths are joined onto
    /// `base_dir` but not checked for existence.
    pub fn from_json(v: &Value, base_dir: &Path) -> Result<Self> {
        let o = object(v, "session")?;
        let resolve = |name: &str| -> Result<PathBuf> { Ok(base_dir.join(get_str(o, name)?)) };
        let intrinsics_path = resolve("intrinsics_path")?;
        let laser_plane_path = resolve("laser_plane_path")?;
        let axis_path = resolve("axis_path")?;
        let frames = get_array(o, "frames")?
            .iter()
            .map(|f| {
                let f = object(f, "frame")?;
                Ok(SessionFrame {
                    angle: get_f64(f, "angle_deg")?.to_radians(),
                    image_path: base_dir.join(get_str(f, "image_path")?),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let threshold = field(o, "threshold")?
            .as_u64()
            .filter(|t| (1..=254).contains(t))
            .ok_or_else(|| Error::Parse("`threshold` must be an integer in 1..=254".into()))?
            as u8;
        let scan_direction = match get_str(o, "scan_direction")? {
            "rows" => ScanDirection::Rows,
            "columns" => ScanDirection::Columns,
            other => {
                return Err(Error::Parse(format!(
                    "`scan_direction` must be rows or columns, got `{other}`"
                )))
            }
        };
        if frames.is_empty() {
            return Err(Error::InvalidParameter("session has no frames".into()));
        }
        if frames.windows(2).any(|w| !(w[1].angle > w[0].angle)) {
            return Err(Error::BadAngles);
        }
        Ok(Self {
            intrinsics_path,
            laser_plane_path,
            axis_path,
            frames,
            threshold,
            scan_direction,
        })
    }

    fn check_paths(&self) -> Result<()> {
        let all = [&self.intrinsics_path, &self.laser_plane_path, &self.axis_path]
            .into_iter()
            .chain(self.frames.iter().map(|f| &f.image_path));
        for p in all {
            if !p.is_file() {
                return Err(Error::io(
                    p,
                    std::io::Error::new(std::io::ErrorKind::NotFound, "file not found"),
                ));
            }
        }
        Ok(())
    }
}

/// Reads, validates and resolves a session file.
pub fn load_session(path: impl AsRef<Path>) -> Result<ScanSession> {
    let path = path.as_ref();
    let text = String::from_utf8(read_file(path)?)
        .map_err(|_| Error::Parse(format!("{} is not UTF-8", path.display())))?;
    let base = path.parent().unwrap_or(Path::new(""));
    let session = ScanSession::from_json(&parse_json(&text)?, base)?;
    session.check_paths()?;
    Ok(session)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn doc(angles: &[f64]) -> Value {
        json!({
            "intrinsics_path": "calibration.json",
            "laser_plane_path": "laser_plane.json",
            "axis_path": "axis.json",
            "frames": angles.iter().enumerate().map(|(i, a)| json!({
                "angle_deg": a, "image_path": format!("frame_{i:04}.pgm"),
            })).collect::<Vec<_>>(),
            "threshold": 128,
            "scan_direction": "rows",
        })
    }

    #[test]
    fn angles_become_radians_and_paths_resolve() {
        let s = ScanSession::from_json(&doc(&[0.0, 90.0]), Path::new("/scan")).unwrap();
        assert_eq!(s.frames[1].angle, std::f64::consts::FRAC_PI_2);
        assert_eq!(s.frames[0].image_path, Path::new("/scan/frame_0000.pgm"));
        assert_eq!(s.threshold, 128);
    }

    #[test]
    fn repeated_angle_is_rejected() {
        let r = ScanSession::from_json(&doc(&[0.0, 90.0, 90.0]), Path::new(""));
        assert!(matches!(r, Err(Error::BadAngles)));
    }

    #[test]
    fn missing_threshold_is_named() {
        let mut v = doc(&[0.0]);
        v.as_object_mut().unwrap().remove("threshold");
        let r = ScanSession::from_json(&v, Path::new(""));
        assert!(matches!(r, Err(Error::MissingField(f)) if f == "threshold"));
    }

    #[test]
    fn json_roundtrip() {
        let s = ScanSession::from_json(&doc(&[0.0, 1.0, 2.5]), Path::new("")).unwrap();
        let again = ScanSession::from_json(&s.to_json(), Path::new("")).unwrap();
        assert_eq!(again.frames.len(), 3);
        assert!((again.frames[2].angle - s.frames[2].angle).abs() < 1e-15);
    }
}
