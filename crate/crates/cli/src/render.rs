//! SVG drawing of a two-dimensional unit ball.

use std::cmp::Ordering;
use std::fmt::Write as _;

use gurarii_core::rational::{format_rational, to_f64};
use gurarii_core::spaces::PolyhedralSpace;
use gurarii_core::Rational;
use num_traits::{Signed, Zero};

/// Counter-clockwise angular order starting from the positive x-axis, exact.
fn angular(a: &[Rational], b: &[Rational]) -> Ordering {
    let upper = |p: &[Rational]| p[1].is_positive() || (p[1].is_zero() && p[0].is_positive());
    match (upper(a), upper(b)) {
        (true, false) => Ordering::Less,
        (false, true) => Ordering::Greater,
        _ => {
            let cross = &a[0] * &b[1] - &a[1] * &b[0];
            if cross.is_positive() {
                Ordering::Less
            } else if cross.is_negative() {
                Ordering::Greater
            } else {
                Ordering::Equal
            }
        }
    }
}

/// Vertices of the ball in drawing order.
pub fn polygon(space: &PolyhedralSpace) -> Vec<Vec<Rational>> {
    let mut pts = space.ball_vertices().points.clone();
    pts.sort_by(|a, b| angular(a, b));
    pts
}

fn num(q: &Rational, scale: u32) -> String {
    let v = to_f64(q) * f64::from(scale);
    let s = format!("{v:.6}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".to_string()
    } else {
        s.to_string()
    }
}

/// SVG with `scale` pixels per unit; the y-axis points up. Each facet
/// `w . x <= 1` is labelled with its normal `w` at the edge midpoint.
pub fn render_svg(space: &PolyhedralSpace, name: &str, scale: u32) -> String {
    let pts = polygon(space);
    let radius = pts
        .iter()
        .flatten()
        .map(|q| to_f64(q).abs())
        .fold(1.0_f64, f64::max);
    let half = (radius * f64::from(scale) * 1.5).ceil() as i64;
    let mut out = String::new();
    let _ = writeln!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"{} {} {} {}\" data-scale=\"{scale}\">",
        -half,
        -half,
        2 * half,
        2 * half
    );
    let _ = writeln!(out, "  <title>unit ball of {name}</title>");
    let exact: Vec<String> = pts
        .iter()
        .map(|p| format!("({}, {})", format_rational(&p[0]), format_rational(&p[1])))
        .collect();
    let _ = writeln!(out, "  <desc>vertices {}</desc>", exact.join(" "));
    let _ = writeln!(
        out,
        "  <line x1=\"{}\" y1=\"0\" x2=\"{half}\" y2=\"0\" stroke=\"#ccc\"/>",
        -half
    );
    let _ = writeln!(
        out,
        "  <line x1=\"0\" y1=\"{}\" x2=\"0\" y2=\"{half}\" stroke=\"#ccc\"/>",
        -half
    );
    let points: Vec<String> = pts
        .iter()
        .map(|p| format!("{},{}", num(&p[0], scale), num(&-&p[1], scale)))
        .collect();
    let _ = writeln!(
        out,
        "  <polygon points=\"{}\" fill=\"#dde8f5\" stroke=\"#24527a\"/>",
        points.join(" ")
    );
    let two = Rational::from_integer(2.into());
    for k in 0..pts.len() {
        let (a, b) = (&pts[k], &pts[(k + 1) % pts.len()]);
        let mid = [(&a[0] + &b[0]) / &two, (&a[1] + &b[1]) / &two];
        let facet = space
            .ball_facets()
            .rows
            .iter()
            .find(|h| {
                let on = |p: &[Rational]| &h.normal[0] * &p[0] + &h.normal[1] * &p[1] == h.offset;
                on(a) && on(b)
            })
            .map(|h| format!("({}, {})", format_rational(&h.normal[0]), format_rational(&h.normal[1])))
            .unwrap_or_default();
        let _ = writeln!(
            out,
            "  <text x=\"{}\" y=\"{}\" font-size=\"{}\" text-anchor=\"middle\">{facet}</text>",
            num(&(&mid[0] * Rational::new(6.into(), 5.into())), scale),
            num(&(-&mid[1] * Rational::new(6.into(), 5.into())), scale),
            (scale / 8).max(6)
        );
    }
    out.push_str("</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn l1_square_is_rotated() {
        let svg = render_svg(&PolyhedralSpace::l1(2), "l1", 100);
        assert!(svg.contains("points=\"100,0 0,-100 -100,0 0,100\""), "{svg}");
        assert_eq!(svg.matches("<text").count(), 4);
    }

    #[test]
    fn polygon_order_is_counter_clockwise() {
        let p = polygon(&PolyhedralSpace::l_inf(2));
        let first: Vec<String> = p[0].iter().map(format_rational).collect();
        assert_eq!(first, ["1", "1"]);
        assert_eq!(p.len(), 4);
    }
}
