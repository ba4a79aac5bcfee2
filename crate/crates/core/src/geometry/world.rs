use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::polygon::{Point, Polygon};
use super::space::Rect;
use super::GeometryError;

/// Names of the worlds shipped with the crate.
pub const BUNDLED_WORLDS: [&str; 4] = ["empty", "corridor", "decoys", "trivial"];

pub fn bundled_world_text(name: &str) -> Option<&'static str> {
    match name {
        "empty" => Some(include_str!("../../worlds/empty.world")),
        "corridor" => Some(include_str!("../../worlds/corridor.world")),
        "decoys" => Some(include_str!("../../worlds/decoys.world")),
        "trivial" => Some(include_str!("../../worlds/trivial.world")),
        _ => None,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct World {
    pub bounds: Rect,
    pub obstacles: Vec<Polygon>,
}

impl World {
    pub fn new(bounds: Rect, obstacles: Vec<Polygon>) -> Result<Self, GeometryError> {
        for (i, o) in obstacles.iter().enumerate() {
            if !o.is_simple() {
                return Err(GeometryError::BadObstacle {
                    index: i,
                    reason: "self-intersecting",
                });
            }
            if o.vertices().iter().any(|v| !bounds.contains(v.x, v.y)) {
                return Err(GeometryError::BadObstacle {
                    index: i,
                    reason: "vertex outside bounds",
                });
            }
        }
        Ok(World { bounds, obstacles })
    }

    pub fn empty(bounds: Rect) -> Self {
        World {
            bounds,
            obstacles: Vec::new(),
        }
    }

    pub fn bundled(name: &str) -> Result<Self, GeometryError> {
        let text = bundled_world_text(name).ok_or_else(|| GeometryError::UnknownWorld(name.to_string()))?;
        World::parse(text)
    }

    pub fn load(path: &Path) -> Result<Self, GeometryError> {
        let text = std::fs::read_to_string(path).map_err(|e| GeometryError::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        World::parse(&text)
    }

    /// Parses the line-oriented world format:
    /// `bounds xmin ymin xmax ymax` once, `poly x1 y1 x2 y2 ...` per
    /// obstacle, `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self, GeometryError> {
        let mut bounds = None;
        let mut polys: Vec<(usize, Polygon)> = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let mut words = line.split_whitespace();
            let keyword = words.next().unwrap_or_default();
            let nums: Vec<f64> = words
                .map(|w| {
                    w.parse::<f64>().map_err(|_| GeometryError::WorldSyntax {
                        line: line_no,
                        message: format!("not a number: {w:?}"),
                    })
                })
                .collect::<Result<_, _>>()?;
            match keyword {
                "bounds" => {
                    if bounds.is_some() {
                        return Err(GeometryError::WorldSyntax {
                            line: line_no,
                            message: "duplicate bounds line".into(),
                        });
                    }
                    if nums.len() != 4 {
                        return Err(GeometryError::WorldSyntax {
                            line: line_no,
                            message: format!("bounds needs 4 numbers, got {}", nums.len()),
                        });
                    }
                    bounds = Some(Rect::new(nums[0], nums[1], nums[2], nums[3]).map_err(|e| {
                        GeometryError::WorldSyntax {
                            line: line_no,
                            message: e.to_string(),
                        }
                    })?);
                }
                "poly" => {
                    if nums.len() < 6 || !nums.len().is_multiple_of(2) {
                        return Err(GeometryError::WorldSyntax {
                            line: line_no,
                            message: "poly needs an even count of at least 6 coordinates".into(),
                        });
                    }
                    let pts = nums.chunks(2).map(|c| Point::new(c[0], c[1])).collect();
                    let poly = Polygon::new(pts).ok_or_else(|| GeometryError::WorldSyntax {
                        line: line_no,
                        message: "degenerate polygon".into(),
                    })?;
                    polys.push((line_no, poly));
                }
                other => {
                    return Err(GeometryError::WorldSyntax {
                        line: line_no,
                        message: format!("unknown keyword {other:?}"),
                    })
                }
            }
        }
        let bounds = bounds.ok_or(GeometryError::WorldSyntax {
            line: 0,
            message: "missing bounds line".into(),
        })?;
        let lines: Vec<usize> = polys.iter().map(|(l, _)| *l).collect();
        World::new(bounds, polys.into_iter().map(|(_, p)| p).collect()).map_err(|e| match e {
            GeometryError::BadObstacle { index, reason } => GeometryError::WorldSyntax {
                line: lines[index],
                message: reason.to_string(),
            },
            other => other,
        })
    }

    pub fn to_text(&self) -> String {
        let b = &self.bounds;
        let mut out = format!("bounds {} {} {} {}\n", b.min_x, b.min_y, b.max_x, b.max_y);
        for o in &self.obstacles {
            out.push_str("poly");
            for v in o.vertices() {
                let _ = write!(out, " {} {}", v.x, v.y);
            }
            out.push('\n');
        }
        out
    }
}

/// Robot body in its own frame.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Robot {
    Point,
    Convex(Polygon),
}

impl Robot {
    pub fn convex(poly: Polygon) -> Result<Self, GeometryError> {
        if !poly.is_convex() {
            return Err(GeometryError::ConcaveRobot);
        }
        Ok(Robot::Convex(poly))
    }

    /// `point`, `box <w> <h>` (centered), or `poly x1 y1 x2 y2 ...`.
    pub fn parse(text: &str) -> Result<Self, GeometryError> {
        let mut words = text.split_whitespace();
        let bad = |m: &str| GeometryError::RobotSyntax(format!("{m}: {text:?}"));
        let kind = words.next().ok_or_else(|| bad("empty robot description"))?;
        let nums: Vec<f64> = words
            .map(|w| w.parse::<f64>())
            .collect::<Result<_, _>>()
            .map_err(|_| bad("non-numeric coordinate"))?;
        match kind {
            "point" if nums.is_empty() => Ok(Robot::Point),
            "box" if nums.len() == 2 && nums[0] > 0.0 && nums[1] > 0.0 => {
                let (hw, hh) = (nums[0] / 2.0, nums[1] / 2.0);
                Robot::convex(Polygon::rectangle(-hw, -hh, hw, hh).ok_or_else(|| bad("degenerate box"))?)
            }
            "poly" if nums.len() >= 6 && nums.len().is_multiple_of(2) => {
                let pts = nums.chunks(2).map(|c| Point::new(c[0], c[1])).collect();
                Robot::convex(Polygon::new(pts).ok_or_else(|| bad("degenerate polygon"))?)
            }
            _ => Err(bad("expected `point`, `box w h` or `poly x1 y1 ...`")),
        }
    }

    pub fn describe(&self) -> String {
        match self {
            Robot::Point => "point".into(),
            Robot::Convex(p) => {
                let mut s = String::from("poly");
                for v in p.vertices() {
                    let _ = write!(s, " {} {}", v.x, v.y);
                }
                s
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_worlds_parse() {
        for name in BUNDLED_WORLDS {
            let w = World::bundled(name).unwrap();
            assert!(w.bounds.width() > 0.0, "{name}");
        }
        assert_eq!(World::bundled("empty").unwrap().obstacles.len(), 0);
        assert_eq!(World::bundled("corridor").unwrap().obstacles.len(), 3);
    }

    #[test]
    fn text_round_trip() {
        let w = World::bundled("decoys").unwrap();
        assert_eq!(World::parse(&w.to_text()).unwrap(), w);
    }

    #[test]
    fn syntax_errors_carry_line_numbers() {
        let err = World::parse("# c\nbounds 0 0 1 1\npoly 0 0 1\n").unwrap_err();
        assert!(matches!(err, GeometryError::WorldSyntax { line: 3, .. }), "{err}");
        let err = World::parse("bounds 0 0 1 1\nwall 1 2\n").unwrap_err();
        assert!(matches!(err, GeometryError::WorldSyntax { line: 2, .. }));
        let err = World::parse("bounds 0 0 1 1\npoly 0 0 2 0 2 2\n").unwrap_err();
        assert!(matches!(err, GeometryError::WorldSyntax { line: 2, .. }));
        assert!(World::parse("poly 0 0 1 0 1 1\n").is_err());
    }

    #[test]
    fn robot_descriptions() {
        assert_eq!(Robot::parse("point").unwrap(), Robot::Point);
        let Robot::Convex(p) = Robot::parse("box 2 1").unwrap() else {
            panic!("expected polygon");
        };
        assert_eq!(p.bbox().0, Point::new(-1.0, -0.5));
        assert!(matches!(
            Robot::parse("poly 0 0 3 0 3 3 2 1 0 3"),
            Err(GeometryError::ConcaveRobot)
        ));
        assert!(Robot::parse("box -1 2").is_err());
    }
}
