use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A detected saddle point in base-image coordinates.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Keypoint {
    /// Sub-pixel position, pixel-center convention.
    pub x: f64,
    pub y: f64,
    /// `scale_factor^level`.
    pub scale: f64,
    /// Pyramid level the point was found on.
    pub level: usize,
    /// Sum of absolute outer-ring deviations from the central intensity.
    pub response: f32,
}

pub const CSV_HEADER: &str = "x,y,scale,level,response";

/// CSV with a `x,y,scale,level,response` header, one row per keypoint in input order.
pub fn keypoints_to_csv(keypoints: &[Keypoint]) -> String {
    let mut out = String::with_capacity(32 * (keypoints.len() + 1));
    out.push_str(CSV_HEADER);
    out.push('\n');
    for k in keypoints {
        let _ = writeln!(
            out,
            "{:.3},{:.3},{:.6},{},{:.1}",
            k.x, k.y, k.scale, k.level, k.response
        );
    }
    out
}

pub fn keypoints_to_json(keypoints: &[Keypoint]) -> String {
    serde_json::to_string_pretty(keypoints).expect("keypoints serialize")
}

/// Parses the CSV written by [`keypoints_to_csv`].
pub fn keypoints_from_csv(text: &str) -> Result<Vec<Keypoint>> {
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h.trim() == CSV_HEADER => {}
        _ => return Err(Error::format("header", format!("expected `{CSV_HEADER}`"))),
    }
    lines
        .filter(|l| !l.trim().is_empty())
        .map(|line| {
            let f: Vec<&str> = line.split(',').map(str::trim).collect();
            if f.len() != 5 {
                return Err(Error::format(
                    "row",
                    format!("expected 5 fields in {line:?}"),
                ));
            }
            let num = |s: &str, field: &'static str| {
                s.parse::<f64>()
                    .map_err(|_| Error::format(field, format!("not a number: {s:?}")))
            };
            Ok(Keypoint {
                x: num(f[0], "x")?,
                y: num(f[1], "y")?,
                scale: num(f[2], "scale")?,
                level: f[3]
                    .parse()
                    .map_err(|_| Error::format("level", format!("not an integer: {:?}", f[3])))?,
                response: num(f[4], "response")? as f32,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_layout() {
        let kps = [
            Keypoint {
                x: 10.12345,
                y: 3.0,
                scale: 1.69,
                level: 2,
                response: 560.0,
            },
            Keypoint {
                x: 0.5,
                y: 7.25,
                scale: 1.0,
                level: 0,
                response: 320.5,
            },
        ];
        let csv = keypoints_to_csv(&kps);
        assert_eq!(
            csv,
            "x,y,scale,level,response\n10.123,3.000,1.690000,2,560.0\n0.500,7.250,1.000000,0,320.5\n"
        );
        let back = keypoints_from_csv(&csv).unwrap();
        assert_eq!(back.len(), 2);
        assert_eq!(back[1].level, 0);
        assert!((back[0].x - 10.123).abs() < 1e-9);
    }

    #[test]
    fn empty_list_is_header_only() {
        assert_eq!(keypoints_to_csv(&[]), "x,y,scale,level,response\n");
        assert_eq!(keypoints_to_json(&[]), "[]");
    }

    #[test]
    fn json_fields() {
        let kps = [Keypoint {
            x: 1.5,
            y: 2.0,
            scale: 1.3,
            level: 1,
            response: 40.0,
        }];
        let v: serde_json::Value = serde_json::from_str(&keypoints_to_json(&kps)).unwrap();
        let o = &v[0];
        for field in ["x", "y", "scale", "level", "response"] {
            assert!(o.get(field).is_some(), "{field}");
        }
    }

    #[test]
    fn bad_csv() {
        assert!(keypoints_from_csv("a,b\n").is_err());
        assert!(keypoints_from_csv("x,y,scale,level,response\n1,2,3\n").is_err());
        assert!(keypoints_from_csv("x,y,scale,level,response\n1,2,3,z,4\n").is_err());
    }
}
