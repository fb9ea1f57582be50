//! Minimal static SVG plots of regions in the horizontal plane.

use std::fmt::Write as _;

use feasible_region::geometry::{Point2, Polygon2};

const WIDTH: f64 = 600.0;
const PAD: f64 = 0.05;

pub enum Stroke {
    Solid,
    Dashed,
}

struct Shape {
    points: Vec<Point2>,
    color: &'static str,
    stroke: Stroke,
    closed: bool,
}

/// Collects polygons, paths and markers, then renders with y pointing up.
#[derive(Default)]
pub struct Plot {
    shapes: Vec<Shape>,
    markers: Vec<(Point2, &'static str, f64)>,
    labels: Vec<(Point2, String)>,
}

impl Plot {
    pub fn polygon(&mut self, p: &Polygon2, color: &'static str, stroke: Stroke) -> &mut Self {
        self.shapes.push(Shape { points: p.vertices().to_vec(), color, stroke, closed: true });
        self
    }

    pub fn path(&mut self, pts: &[Point2], color: &'static str) -> &mut Self {
        self.shapes.push(Shape { points: pts.to_vec(), color, stroke: Stroke::Solid, closed: false });
        self
    }

    pub fn marker(&mut self, p: Point2, color: &'static str, radius_px: f64) -> &mut Self {
        self.markers.push((p, color, radius_px));
        self
    }

    pub fn label(&mut self, p: Point2, text: impl Into<String>) -> &mut Self {
        self.labels.push((p, text.into()));
        self
    }

    pub fn render(&self) -> String {
        let all = self
            .shapes
            .iter()
            .flat_map(|s| s.points.iter())
            .chain(self.markers.iter().map(|m| &m.0))
            .chain(self.labels.iter().map(|l| &l.0));
        let (mut lo, mut hi) = (Point2::repeat(f64::INFINITY), Point2::repeat(f64::NEG_INFINITY));
        for p in all {
            lo = lo.inf(p);
            hi = hi.sup(p);
        }
        if !lo.x.is_finite() {
            lo = Point2::repeat(-1.0);
            hi = Point2::repeat(1.0);
        }
        lo -= Point2::repeat(PAD);
        hi += Point2::repeat(PAD);
        let k = WIDTH / (hi.x - lo.x);
        let height = ((hi.y - lo.y) * k).ceil();
        let px = |p: &Point2| format!("{:.2},{:.2}", (p.x - lo.x) * k, (hi.y - p.y) * k);

        let mut s = String::new();
        let _ = writeln!(
            s,
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH:.0}\" height=\"{height:.0}\" viewBox=\"0 0 {WIDTH:.0} {height:.0}\">"
        );
        let _ = writeln!(s, "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>");
        for sh in &self.shapes {
            let pts: Vec<String> = sh.points.iter().map(&px).collect();
            let dash = match sh.stroke {
                Stroke::Solid => "",
                Stroke::Dashed => " stroke-dasharray=\"6,4\"",
            };
            let tag = if sh.closed { "polygon" } else { "polyline" };
            let _ = writeln!(
                s,
                "<{tag} points=\"{}\" fill=\"none\" stroke=\"{}\" stroke-width=\"2\"{dash}/>",
                pts.join(" "),
                sh.color
            );
        }
        for (p, color, r) in &self.markers {
            let xy = px(p);
            let (x, y) = xy.split_once(',').expect("formatted pair");
            let _ = writeln!(s, "<circle cx=\"{x}\" cy=\"{y}\" r=\"{r}\" fill=\"{color}\"/>");
        }
        for (p, text) in &self.labels {
            let xy = px(p);
            let (x, y) = xy.split_once(',').expect("formatted pair");
            let _ = writeln!(s, "<text x=\"{x}\" y=\"{y}\" font-size=\"12\" font-family=\"sans-serif\">{text}</text>");
        }
        s.push_str("</svg>\n");
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use feasible_region::geometry::box_polygon;

    #[test]
    fn renders_shapes_in_order() {
        let mut p = Plot::default();
        p.polygon(&box_polygon(Point2::zeros(), 0.5), "gray", Stroke::Dashed)
            .marker(Point2::zeros(), "black", 3.0)
            .label(Point2::new(0.1, 0.1), "c");
        let svg = p.render();
        assert!(svg.starts_with("<svg"));
        assert!(svg.contains("stroke-dasharray"));
        assert!(svg.find("<polygon").unwrap() < svg.find("<circle").unwrap());
        assert!(svg.trim_end().ends_with("</svg>"));
    }
}
