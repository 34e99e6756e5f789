//! JSON artifacts. Floats are written with 17 significant digits so every
//! value survives a round trip bit for bit.

use serde_json::{json, Map, Value};

use crate::calibration::{CalibrationResult, CameraIntrinsics, ChessboardSpec, PixelPoint, ViewObservation};
use crate::error::{Error, Result};
use crate::geometry::{rotation_from_vector, rotation_to_vector, Line3, Plane, RigidTransform, Vec3};
use crate::laser::{AxisCalibration, LaserPlaneCalibration};
use crate::simulator::{GroundTruth, SceneSurface};

/// Formats a finite float with 17 significant digits.
pub fn format_float(x: f64) -> String {
    if x == 0.0 {
        return if x.is_sign_negative() { "-0.0".into() } else { "0.0".into() };
    }
    let exp = x.abs().log10().floor() as i32;
    if (-5..15).contains(&exp) {
        let decimals = (16 - exp).max(1) as usize;
        format!("{x:.decimals$}")
    } else {
        format!("{x:.16e}")
    }
}

fn write_value(out: &mut String, v: &Value, indent: usize) {
    let pad = |out: &mut String, n: usize| out.extend(std::iter::repeat_n("  ", n));
    match v {
        Value::Null => out.push_str("null"),
        Value::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Value::Number(n) => match (n.as_u64(), n.as_i64()) {
            (Some(u), _) => out.push_str(&u.to_string()),
            (_, Some(i)) => out.push_str(&i.to_string()),
            _ => out.push_str(&format_float(n.as_f64().expect("numeric"))),
        },
        Value::String(s) => out.push_str(&Value::String(s.clone()).to_string()),
        Value::Array(items) => {
            // Short numeric vectors stay on one line.
            if items.iter().all(Value::is_number) && items.len() <= 4 {
                out.push('[');
                for (i, item) in items.iter().enumerate() {
                    if i > 0 {
                        out.push_str(", ");
                    }
                    write_value(out, item, indent);
                }
                out.push(']');
                return;
            }
            if items.is_empty() {
                out.push_str("[]");
                return;
            }
            out.push_str("[\n");
            for (i, item) in items.iter().enumerate() {
                pad(out, indent + 1);
                write_value(out, item, indent + 1);
                out.push_str(if i + 1 < items.len() { ",\n" } else { "\n" });
            }
            pad(out, indent);
            out.push(']');
        }
        Value::Object(map) => {
            if map.is_empty() {
                out.push_str("{}");
                return;
            }
            out.push_str("{\n");
            for (i, (k, item)) in map.iter().enumerate() {
                pad(out, indent + 1);
                out.push_str(&Value::String(k.clone()).to_string());
                out.push_str(": ");
                write_value(out, item, indent + 1);
                out.push_str(if i + 1 < map.len() { ",\n" } else { "\n" });
            }
            pad(out, indent);
            out.push('}');
        }
    }
}

/// Pretty-prints `v` with full float precision and a trailing newline.
pub fn to_json_string(v: &Value) -> String {
    let mut out = String::new();
    write_value(&mut out, v, 0);
    out.push('\n');
    out
}

pub fn parse_json(text: &str) -> Result<Value> {
    serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
}

// ---- field access ------------------------------------------------------

pub(crate) fn object<'a>(v: &'a Value, what: &str) -> Result<&'a Map<String, Value>> {
    v.as_object()
        .ok_or_else(|| Error::Parse(format!("{what} must be a JSON object")))
}

pub(crate) fn field<'a>(obj: &'a Map<String, Value>, name: &str) -> Result<&'a Value> {
    obj.get(name).ok_or_else(|| Error::MissingField(name.into()))
}

pub(crate) fn get_f64(obj: &Map<String, Value>, name: &str) -> Result<f64> {
    field(obj, name)?
        .as_f64()
        .ok_or_else(|| Error::Parse(format!("`{name}` must be a number")))
}

pub(crate) fn get_usize(obj: &Map<String, Value>, name: &str) -> Result<usize> {
    field(obj, name)?
        .as_u64()
        .and_then(|n| usize::try_from(n).ok())
        .ok_or_else(|| Error::Parse(format!("`{name}` must be a nonnegative integer")))
}

pub(crate) fn get_str<'a>(obj: &'a Map<String, Value>, name: &str) -> Result<&'a str> {
    field(obj, name)?
        .as_str()
        .ok_or_else(|| Error::Parse(format!("`{name}` must be a string")))
}

pub(crate) fn get_array<'a>(obj: &'a Map<String, Value>, name: &str) -> Result<&'a Vec<Value>> {
    field(obj, name)?
        .as_array()
        .ok_or_else(|| Error::Parse(format!("`{name}` must be an array")))
}

fn numbers<const N: usize>(v: &Value, name: &str) -> Result<[f64; N]> {
    let bad = || Error::Parse(format!("`{name}` must be an array of {N} numbers"));
    let items = v.as_array().ok_or_else(bad)?;
    if items.len() != N {
        return Err(bad());
    }
    let mut out = [0.0; N];
    for (o, item) in out.iter_mut().zip(items) {
        *o = item.as_f64().ok_or_else(bad)?;
    }
    Ok(out)
}

pub(crate) fn get_vec3(obj: &Map<String, Value>, name: &str) -> Result<Vec3> {
    let [x, y, z] = numbers::<3>(field(obj, name)?, name)?;
    Ok(Vec3::new(x, y, z))
}

fn vec3(v: Vec3) -> Value {
    json!([v.x, v.y, v.z])
}

// ---- artifacts ---------------------------------------------------------

pub fn intrinsics_to_json(k: &CameraIntrinsics) -> Value {
    json!({"fx": k.fx, "fy": k.fy, "cx": k.cx, "cy": k.cy, "k1": k.k1, "k2": k.k2})
}

pub fn intrinsics_from_json(v: &Value) -> Result<CameraIntrinsics> {
    let o = object(v, "intrinsics")?;
    let k = CameraIntrinsics::pinhole(
        get_f64(o, "fx")?,
        get_f64(o, "fy")?,
        get_f64(o, "cx")?,
        get_f64(o, "cy")?,
    )
    .with_distortion(get_f64(o, "k1")?, get_f64(o, "k2")?);
    k.validate()?;
    Ok(k)
}

pub fn pose_to_json(pose: &RigidTransform) -> Value {
    json!({"axis_angle": vec3(rotation_to_vector(&pose.rotation)), "t": vec3(pose.translation)})
}

pub fn pose_from_json(v: &Value) -> Result<RigidTransform> {
    let o = object(v, "pose")?;
    Ok(RigidTransform::new(
        rotation_from_vector(get_vec3(o, "axis_angle")?),
        get_vec3(o, "t")?,
    ))
}

pub fn calibration_to_json(c: &CalibrationResult) -> Value {
    let mut v = intrinsics_to_json(&c.intrinsics);
    let o = v.as_object_mut().expect("object");
    o.insert("rms_px".into(), json!(c.rms_reprojection));
    o.insert(
        "poses".into(),
        Value::Array(c.poses.iter().map(pose_to_json).collect()),
    );
    v
}

pub fn calibration_from_json(v: &Value) -> Result<CalibrationResult> {
    let o = object(v, "calibration")?;
    Ok(CalibrationResult {
        intrinsics: intrinsics_from_json(v)?,
        poses: get_array(o, "poses")?
            .iter()
            .map(pose_from_json)
            .collect::<Result<_>>()?,
        rms_reprojection: get_f64(o, "rms_px")?,
    })
}

pub fn plane_to_json(plane: &Plane) -> Value {
    json!({"normal": vec3(plane.normal()), "offset": plane.offset()})
}

pub fn plane_from_json(v: &Value) -> Result<Plane> {
    let o = object(v, "plane")?;
    Plane::new(get_vec3(o, "normal")?, get_f64(o, "offset")?)
}

pub fn axis_to_json(axis: &Line3) -> Value {
    json!({"point": vec3(axis.point()), "direction": vec3(axis.direction())})
}

pub fn axis_from_json(v: &Value) -> Result<Line3> {
    let o = object(v, "axis")?;
    Line3::new(get_vec3(o, "point")?, get_vec3(o, "direction")?)
}

pub fn laser_plane_to_json(c: &LaserPlaneCalibration) -> Value {
    let mut v = plane_to_json(&c.plane);
    v.as_object_mut()
        .expect("object")
        .insert("rms_mm".into(), json!(c.rms));
    v
}

pub fn laser_plane_from_json(v: &Value) -> Result<LaserPlaneCalibration> {
    Ok(LaserPlaneCalibration {
        plane: plane_from_json(v)?,
        rms: get_f64(object(v, "laser plane")?, "rms_mm")?,
    })
}

pub fn axis_calibration_to_json(c: &AxisCalibration) -> Value {
    let mut v = axis_to_json(&c.axis);
    v.as_object_mut()
        .expect("object")
        .insert("rms_mm".into(), json!(c.rms));
    v
}

pub fn axis_calibration_from_json(v: &Value) -> Result<AxisCalibration> {
    Ok(AxisCalibration {
        axis: axis_from_json(v)?,
        rms: get_f64(object(v, "axis")?, "rms_mm")?,
    })
}

pub fn board_spec_to_json(spec: &ChessboardSpec) -> Value {
    json!({
        "inner_cols": spec.inner_cols,
        "inner_rows": spec.inner_rows,
        "square_size": spec.square_size,
    })
}

pub fn board_spec_from_json(v: &Value) -> Result<ChessboardSpec> {
    let o = object(v, "board")?;
    ChessboardSpec::new(
        get_usize(o, "inner_cols")?,
        get_usize(o, "inner_rows")?,
        get_f64(o, "square_size")?,
    )
}

pub fn surface_to_json(surface: &SceneSurface) -> Value {
    match surface {
        SceneSurface::Cylinder { radius, height } => {
            json!({"kind": "cylinder", "radius": radius, "height": height})
        }
        SceneSurface::Sphere {
            radius,
            center_height,
        } => json!({"kind": "sphere", "radius": radius, "center_height": center_height}),
        SceneSurface::Board { spec, pose } => json!({
            "kind": "board",
            "board": board_spec_to_json(spec),
            "pose": pose_to_json(pose),
        }),
    }
}

pub fn surface_from_json(v: &Value) -> Result<SceneSurface> {
    let o = object(v, "surface")?;
    let surface = match get_str(o, "kind")? {
        "cylinder" => SceneSurface::Cylinder {
            radius: get_f64(o, "radius")?,
            height: get_f64(o, "height")?,
        },
        "sphere" => SceneSurface::Sphere {
            radius: get_f64(o, "radius")?,
            center_height: get_f64(o, "center_height")?,
        },
        "board" => SceneSurface::Board {
            spec: board_spec_from_json(field(o, "board")?)?,
            pose: pose_from_json(field(o, "pose")?)?,
        },
        other => return Err(Error::Parse(format!("unknown surface kind `{other}`"))),
    };
    surface.validate()?;
    Ok(surface)
}

pub fn ground_truth_to_json(gt: &GroundTruth) -> Value {
    json!({
        "plane": plane_to_json(&gt.plane),
        "axis": axis_to_json(&gt.axis),
        "surface": surface_to_json(&gt.surface),
        "intrinsics": intrinsics_to_json(&gt.intrinsics),
    })
}

pub fn ground_truth_from_json(v: &Value) -> Result<GroundTruth> {
    let o = object(v, "ground truth")?;
    Ok(GroundTruth {
        plane: plane_from_json(field(o, "plane")?)?,
        axis: axis_from_json(field(o, "axis")?)?,
        surface: surface_from_json(field(o, "surface")?)?,
        intrinsics: intrinsics_from_json(field(o, "intrinsics")?)?,
    })
}

pub fn corners_to_json(view: &ViewObservation) -> Value {
    Value::Array(view.corners.iter().map(|p| json!([p.u, p.v])).collect())
}

pub fn corners_from_json(v: &Value) -> Result<ViewObservation> {
    let items = v
        .as_array()
        .ok_or_else(|| Error::Parse("`corners` must be an array".into()))?;
    let corners = items
        .iter()
        .map(|c| numbers::<2>(c, "corners").map(|[u, w]| PixelPoint::new(u, w)))
        .collect::<Result<_>>()?;
    Ok(ViewObservation { corners })
}

/// Corner observations of one board across many views: the input of
/// camera calibration.
pub fn views_to_json(spec: &ChessboardSpec, views: &[ViewObservation]) -> Value {
    json!({
        "board": board_spec_to_json(spec),
        "views": views.iter().map(|v| json!({"corners": corners_to_json(v)})).collect::<Vec<_>>(),
    })
}

pub fn views_from_json(v: &Value) -> Result<(ChessboardSpec, Vec<ViewObservation>)> {
    let o = object(v, "views document")?;
    let spec = board_spec_from_json(field(o, "board")?)?;
    let views = get_array(o, "views")?
        .iter()
        .map(|view| corners_from_json(field(object(view, "view")?, "corners")?))
        .collect::<Result<Vec<_>>>()?;
    for view in &views {
        view.validate(&spec)?;
    }
    Ok((spec, views))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_keep_every_bit() {
        for x in [800.0, 0.1, -1.0 / 3.0, 1e-7, 6.02e23, 123456.789, -0.0, 2f64.sqrt()] {
            let s = format_float(x);
            assert_eq!(s.parse::<f64>().unwrap().to_bits(), x.to_bits(), "{s}");
            let digits = s
                .split('e')
                .next()
                .unwrap()
                .chars()
                .filter(char::is_ascii_digit)
                .count();
            assert!(x == 0.0 || digits >= 15, "{s}");
        }
    }

    #[test]
    fn calibration_field_names() {
        let c = CalibrationResult {
            intrinsics: CameraIntrinsics::pinhole(800.0, 801.0, 320.0, 240.0).with_distortion(-0.1, 0.02),
            poses: vec![RigidTransform::new(
                rotation_from_vector(Vec3::new(0.1, -0.2, 0.3)),
                Vec3::new(1.0, 2.0, 300.0),
            )],
            rms_reprojection: 0.25,
        };
        let v = calibration_to_json(&c);
        let keys: Vec<&String> = v.as_object().unwrap().keys().collect();
        for k in ["fx", "fy", "cx", "cy", "k1", "k2", "rms_px", "poses"] {
            assert!(keys.iter().any(|x| *x == k), "{k}");
        }
        let text = to_json_string(&v);
        assert!(text.contains("\"fx\": 800.00000000000000"));
        let back = calibration_from_json(&parse_json(&text).unwrap()).unwrap();
        assert_eq!(back.intrinsics, c.intrinsics);
        assert!(back.poses[0].rotation.max_abs_diff(&c.poses[0].rotation) < 1e-15);
        assert_eq!(back.poses[0].translation, c.poses[0].translation);
    }

    #[test]
    fn missing_field_is_named() {
        let v = parse_json(r#"{"normal": [1, 0, 0]}"#).unwrap();
        assert!(matches!(plane_from_json(&v), Err(Error::MissingField(f)) if f == "offset"));
    }

    #[test]
    fn ground_truth_roundtrip() {
        let gt = GroundTruth {
            surface: SceneSurface::Sphere { radius: 20.0, center_height: 5.0 },
            axis: Line3::new(Vec3::new(0.0, 0.0, 400.0), Vec3::Y).unwrap(),
            plane: Plane::new(Vec3::new(0.6, 0.0, 0.8), 320.0).unwrap(),
            intrinsics: CameraIntrinsics::pinhole(800.0, 800.0, 320.0, 240.0),
        };
        let text = to_json_string(&ground_truth_to_json(&gt));
        assert_eq!(ground_truth_from_json(&parse_json(&text).unwrap()).unwrap(), gt);
    }
}
