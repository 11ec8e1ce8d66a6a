//! Affine and projective geometry over GF(q): points, lines in the form
//! aX + bY + cZ = 0, line/line and line/parabola intersections, and
//! deterministic enumeration of the q^2 + q affine lines.

use crate::ff::{Field, FieldElement};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GeomError {
    #[error("the two points coincide")]
    CoincidentPoints,
    #[error("the two lines are identical")]
    IdenticalLines,
    #[error("(a, b) = (0, 0) does not define an affine line")]
    LineAtInfinity,
    #[error("(0, 0, 0) is not a projective point")]
    ZeroVector,
}

/// A point (x, y) of the affine plane AG(2, q).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct AffinePoint {
    pub x: FieldElement,
    pub y: FieldElement,
}

impl AffinePoint {
    pub fn new(x: FieldElement, y: FieldElement) -> AffinePoint {
        AffinePoint { x, y }
    }
}

/// A point (X : Y : Z) of PG(2, q), stored with its last nonzero
/// coordinate normalized to 1, so equal points compare equal.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ProjPoint {
    pub x: FieldElement,
    pub y: FieldElement,
    pub z: FieldElement,
}

impl ProjPoint {
    pub fn new(
        field: &Field,
        x: FieldElement,
        y: FieldElement,
        z: FieldElement,
    ) -> Result<ProjPoint, GeomError> {
        if x.is_zero() && y.is_zero() && z.is_zero() {
            return Err(GeomError::ZeroVector);
        }
        let s = if !z.is_zero() {
            z
        } else if !y.is_zero() {
            y
        } else {
            x
        };
        let inv = field.inv(s).expect("nonzero by choice");
        Ok(ProjPoint {
            x: field.mul(x, inv),
            y: field.mul(y, inv),
            z: field.mul(z, inv),
        })
    }

    pub fn from_affine(field: &Field, p: AffinePoint) -> ProjPoint {
        ProjPoint {
            x: p.x,
            y: p.y,
            z: field.one(),
        }
    }

    pub fn is_affine(&self) -> bool {
        !self.z.is_zero()
    }

    /// The affine part (x, y), if the point is not at infinity.
    pub fn to_affine(&self) -> Option<AffinePoint> {
        self.is_affine().then_some(AffinePoint {
            x: self.x,
            y: self.y,
        })
    }
}

/// The affine line aX + bY + c = 0 (projectively aX + bY + cZ = 0) with
/// (a, b) != (0, 0), stored with the first nonzero coefficient of (a, b, c)
/// normalized to 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Line {
    pub a: FieldElement,
    pub b: FieldElement,
    pub c: FieldElement,
}

impl Line {
    pub fn new(
        field: &Field,
        a: FieldElement,
        b: FieldElement,
        c: FieldElement,
    ) -> Result<Line, GeomError> {
        if a.is_zero() && b.is_zero() {
            return Err(GeomError::LineAtInfinity);
        }
        let s = if !a.is_zero() { a } else { b };
        let inv = field.inv(s).expect("nonzero by choice");
        Ok(Line {
            a: field.mul(a, inv),
            b: field.mul(b, inv),
            c: field.mul(c, inv),
        })
    }

    /// The vertical line x = x0.
    pub fn vertical(field: &Field, x0: FieldElement) -> Line {
        Line {
            a: field.one(),
            b: field.zero(),
            c: field.neg(x0),
        }
    }

    /// The line y = mx + b.
    pub fn slope_intercept(field: &Field, m: FieldElement, b: FieldElement) -> Line {
        // mx - y + b = 0
        Line::new(field, m, field.neg(field.one()), b).expect("b-coefficient is nonzero")
    }

    pub fn is_vertical(&self) -> bool {
        self.b.is_zero()
    }

    pub fn is_horizontal(&self) -> bool {
        self.a.is_zero()
    }

    /// a*x + b*y + c.
    pub fn eval_affine(&self, field: &Field, p: AffinePoint) -> FieldElement {
        field.add(
            field.add(field.mul(self.a, p.x), field.mul(self.b, p.y)),
            self.c,
        )
    }

    /// a*X + b*Y + c*Z.
    pub fn eval_proj(&self, field: &Field, p: ProjPoint) -> FieldElement {
        field.add(
            field.add(field.mul(self.a, p.x), field.mul(self.b, p.y)),
            field.mul(self.c, p.z),
        )
    }

    pub fn contains_affine(&self, field: &Field, p: AffinePoint) -> bool {
        self.eval_affine(field, p).is_zero()
    }

    pub fn contains_proj(&self, field: &Field, p: ProjPoint) -> bool {
        self.eval_proj(field, p).is_zero()
    }

    /// The point at infinity in this line's direction: (b : -a : 0).
    pub fn direction(&self, field: &Field) -> ProjPoint {
        ProjPoint::new(field, self.b, field.neg(self.a), field.zero()).expect("(a, b) != (0, 0)")
    }

    pub fn is_parallel_to(&self, field: &Field, dir: ProjPoint) -> bool {
        debug_assert!(dir.z.is_zero());
        // (b, -a) parallel to (dx, dy) iff b*dy + a*dx = 0
        field
            .add(
                field.mul(self.b, dir.y),
                field.mul(field.neg(self.a), dir.x),
            )
            .is_zero()
    }
}

/// The line through two distinct affine points, via the cross product of
/// their homogeneous coordinates.
pub fn line_through(field: &Field, p1: AffinePoint, p2: AffinePoint) -> Result<Line, GeomError> {
    if p1 == p2 {
        return Err(GeomError::CoincidentPoints);
    }
    let a = field.sub(p1.y, p2.y);
    let b = field.sub(p2.x, p1.x);
    let c = field.sub(field.mul(p1.x, p2.y), field.mul(p2.x, p1.y));
    Line::new(field, a, b, c)
}

/// The unique projective intersection point of two distinct lines, via the
/// cross product of their coefficient triples.
pub fn intersect(field: &Field, l1: Line, l2: Line) -> Result<ProjPoint, GeomError> {
    if l1 == l2 {
        return Err(GeomError::IdenticalLines);
    }
    let x = field.sub(field.mul(l1.b, l2.c), field.mul(l1.c, l2.b));
    let y = field.sub(field.mul(l1.c, l2.a), field.mul(l1.a, l2.c));
    let z = field.sub(field.mul(l1.a, l2.b), field.mul(l1.b, l2.a));
    // distinct normalized lines are never proportional, so (x,y,z) != 0
    ProjPoint::new(field, x, y, z).map_err(|_| GeomError::IdenticalLines)
}

/// Intersection points of a non-infinite line with the parabola y = x^2,
/// sorted by x in canonical order. Vertical x = x0 meets it exactly once;
/// y = mx + b meets it where x^2 - mx - b = 0, decided by the discriminant
/// m^2 + 4b: two points if it is a nonzero square, one if zero, none if a
/// nonsquare.
pub fn parabola_meet(field: &Field, line: Line) -> Vec<AffinePoint> {
    if line.is_vertical() {
        // normalized vertical is (1, 0, c): x = -c
        let x = field.neg(line.c);
        return vec![AffinePoint::new(x, field.mul(x, x))];
    }
    let inv_b = field.inv(line.b).expect("non-vertical line has b != 0");
    let m = field.neg(field.mul(line.a, inv_b));
    let t = field.neg(field.mul(line.c, inv_b));
    let disc = field.add(field.mul(m, m), field.mul(field.scalar(4), t));
    let half = field.inv(field.scalar(2)).expect("odd characteristic");
    if disc.is_zero() {
        let x = field.mul(m, half);
        return vec![AffinePoint::new(x, field.mul(x, x))];
    }
    match field.sqrt(disc) {
        None => Vec::new(),
        Some(s) => {
            let x1 = field.mul(field.add(m, s), half);
            let x2 = field.mul(field.sub(m, s), half);
            let mut pts = vec![
                AffinePoint::new(x1, field.mul(x1, x1)),
                AffinePoint::new(x2, field.mul(x2, x2)),
            ];
            pts.sort();
            pts
        }
    }
}

/// Which affine lines to enumerate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LineFilter {
    All,
    NonHorizontal,
    NonVertical,
    NotParallelTo(ProjPoint),
}

/// Deterministic enumeration of affine lines: the q vertical lines x = c in
/// canonical order of c, then y = mx + b with m outer and b inner, both in
/// canonical order. Filters drop one parallel class (q lines).
pub fn enumerate_lines(field: &Field, filter: LineFilter) -> impl Iterator<Item = Line> + '_ {
    let q = field.q();
    let verticals = (0..q).map(move |c| Line::vertical(field, field.el(c)));
    let sloped = (0..q).flat_map(move |m| {
        (0..q).map(move |b| Line::slope_intercept(field, field.el(m), field.el(b)))
    });
    verticals.chain(sloped).filter(move |line| match filter {
        LineFilter::All => true,
        LineFilter::NonHorizontal => !line.is_horizontal(),
        LineFilter::NonVertical => !line.is_vertical(),
        LineFilter::NotParallelTo(dir) => !line.is_parallel_to(field, dir),
    })
}

/// The horizontal direction (1 : 0 : 0).
pub fn horizontal_direction(field: &Field) -> ProjPoint {
    ProjPoint {
        x: field.one(),
        y: field.zero(),
        z: field.zero(),
    }
}

/// The vertical direction (0 : 1 : 0).
pub fn vertical_direction(field: &Field) -> ProjPoint {
    ProjPoint {
        x: field.zero(),
        y: field.one(),
        z: field.zero(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ff::make_field;
    use proptest::prelude::*;
    use std::collections::HashSet;

    fn ap(f: &Field, x: u64, y: u64) -> AffinePoint {
        AffinePoint::new(f.el(x), f.el(y))
    }

    #[test]
    fn line_through_examples_gf5() {
        let f = make_field(5, 1).unwrap();
        // diagonal through the origin
        let l = line_through(&f, ap(&f, 0, 0), ap(&f, 1, 1)).unwrap();
        assert_eq!((l.a, l.b, l.c), (f.el(1), f.el(4), f.el(0)));
        // horizontal y = 2 normalizes to (0, 1, 3)
        let l = line_through(&f, ap(&f, 0, 2), ap(&f, 1, 2)).unwrap();
        assert_eq!((l.a, l.b, l.c), (f.el(0), f.el(1), f.el(3)));
        assert!(l.is_horizontal());
        // vertical x = 1 normalizes to (1, 0, 4)
        let l = line_through(&f, ap(&f, 1, 1), ap(&f, 1, 3)).unwrap();
        assert_eq!((l.a, l.b, l.c), (f.el(1), f.el(0), f.el(4)));
        assert!(l.is_vertical());
        assert_eq!(
            line_through(&f, ap(&f, 2, 2), ap(&f, 2, 2)).unwrap_err(),
            GeomError::CoincidentPoints
        );
    }

    #[test]
    fn intersect_examples() {
        let f = make_field(5, 1).unwrap();
        let x_axis = Line::slope_intercept(&f, f.el(0), f.el(0));
        let y_axis = Line::vertical(&f, f.el(0));
        let origin = intersect(&f, x_axis, y_axis).unwrap();
        assert_eq!((origin.x, origin.y, origin.z), (f.el(0), f.el(0), f.el(1)));

        // parallel horizontals meet at (1 : 0 : 0)
        let y1 = Line::slope_intercept(&f, f.el(0), f.el(1));
        let y2 = Line::slope_intercept(&f, f.el(0), f.el(2));
        let inf = intersect(&f, y1, y2).unwrap();
        assert_eq!((inf.x, inf.y, inf.z), (f.el(1), f.el(0), f.el(0)));
        assert!(!inf.is_affine());

        // y = x meets y = 2x + 1 at (4, 4)
        let d1 = Line::slope_intercept(&f, f.el(1), f.el(0));
        let d2 = Line::slope_intercept(&f, f.el(2), f.el(1));
        let p = intersect(&f, d1, d2).unwrap();
        assert_eq!(p.to_affine().unwrap(), ap(&f, 4, 4));

        assert_eq!(
            intersect(&f, d1, d1).unwrap_err(),
            GeomError::IdenticalLines
        );
    }

    #[test]
    fn parabola_meet_examples() {
        let f7 = make_field(7, 1).unwrap();
        // vertical x = 3 meets the parabola at (3, 2)
        let v = Line::vertical(&f7, f7.el(3));
        assert_eq!(parabola_meet(&f7, v), vec![ap(&f7, 3, 2)]);
        // y = 0 is tangent at the origin
        let l = Line::slope_intercept(&f7, f7.el(0), f7.el(0));
        assert_eq!(parabola_meet(&f7, l), vec![ap(&f7, 0, 0)]);

        let f5 = make_field(5, 1).unwrap();
        // y = 2: discriminant 8 = 3 is a nonsquare mod 5, no intersection
        let l = Line::slope_intercept(&f5, f5.el(0), f5.el(2));
        assert_eq!(parabola_meet(&f5, l), Vec::new());
        // y = 1: discriminant 4, meets at x = 1 and x = 4
        let l = Line::slope_intercept(&f5, f5.el(0), f5.el(1));
        assert_eq!(parabola_meet(&f5, l), vec![ap(&f5, 1, 1), ap(&f5, 4, 1)]);
    }

    /// Brute-force oracle: parabola_meet agrees with scanning all x.
    #[test]
    fn parabola_meet_matches_point_scan() {
        for (p, k) in [(5, 1), (7, 1), (3, 2), (11, 1), (13, 1), (5, 2), (3, 3)] {
            let f = make_field(p, k).unwrap();
            for line in enumerate_lines(&f, LineFilter::All) {
                let expected: Vec<AffinePoint> = f
                    .elements()
                    .map(|x| AffinePoint::new(x, f.mul(x, x)))
                    .filter(|&pt| line.contains_affine(&f, pt))
                    .collect();
                assert_eq!(parabola_meet(&f, line), expected, "{:?} over {}", line, f);
            }
        }
    }

    /// No affine line meets y = x^2 in three points.
    #[test]
    fn no_line_meets_parabola_thrice() {
        for (p, k) in [
            (5, 1),
            (7, 1),
            (3, 2),
            (11, 1),
            (13, 1),
            (5, 2),
            (3, 3),
            (101, 1),
        ] {
            let f = make_field(p, k).unwrap();
            for line in enumerate_lines(&f, LineFilter::All) {
                assert!(parabola_meet(&f, line).len() <= 2);
            }
        }
    }

    /// Exactly (q+1)/2 intercepts b give a nonempty parabola section for
    /// each fixed slope m (counting the tangent).
    #[test]
    fn secant_count_per_slope() {
        for (p, k) in [(5, 1), (7, 1), (3, 2), (13, 1), (5, 2), (101, 1)] {
            let f = make_field(p, k).unwrap();
            for m in f.elements() {
                let hits = f
                    .elements()
                    .filter(|&b| !parabola_meet(&f, Line::slope_intercept(&f, m, b)).is_empty())
                    .count() as u64;
                assert_eq!(hits, f.q().div_ceil(2), "slope {} over {}", m.index(), f);
            }
        }
    }

    #[test]
    fn line_counts() {
        let f5 = make_field(5, 1).unwrap();
        assert_eq!(enumerate_lines(&f5, LineFilter::All).count(), 30);
        assert_eq!(enumerate_lines(&f5, LineFilter::NonHorizontal).count(), 25);
        let f7 = make_field(7, 1).unwrap();
        assert_eq!(enumerate_lines(&f7, LineFilter::NonVertical).count(), 49);
        assert_eq!(
            enumerate_lines(&f7, LineFilter::NotParallelTo(horizontal_direction(&f7))).count(),
            49
        );
        // all enumerated lines are distinct after normalization
        let all: HashSet<Line> = enumerate_lines(&f7, LineFilter::All).collect();
        assert_eq!(all.len(), 56);
    }

    #[test]
    fn direction_classification() {
        let f = make_field(5, 1).unwrap();
        let h = Line::slope_intercept(&f, f.el(0), f.el(3));
        let v = Line::vertical(&f, f.el(2));
        assert_eq!(h.direction(&f), horizontal_direction(&f));
        assert_eq!(v.direction(&f), vertical_direction(&f));
        assert!(h.is_parallel_to(&f, horizontal_direction(&f)));
        assert!(!h.is_parallel_to(&f, vertical_direction(&f)));
    }

    proptest! {
        /// line_through contains both points; normalization is stable.
        #[test]
        fn line_through_incidence((pi, x1, y1, x2, y2) in
            (0usize..3).prop_flat_map(|pi| {
                let q = [5u64, 7, 9][pi];
                (Just(pi), 0..q, 0..q, 0..q, 0..q)
            }))
        {
            let (p, k) = [(5u64, 1usize), (7, 1), (3, 2)][pi];
            let f = make_field(p, k).unwrap();
            let p1 = AffinePoint::new(f.el(x1), f.el(y1));
            let p2 = AffinePoint::new(f.el(x2), f.el(y2));
            if p1 != p2 {
                let l = line_through(&f, p1, p2).unwrap();
                prop_assert!(l.contains_affine(&f, p1));
                prop_assert!(l.contains_affine(&f, p2));
                let l2 = line_through(&f, p2, p1).unwrap();
                prop_assert_eq!(l, l2);
            }
        }

        /// intersect lies on both lines and is symmetric.
        #[test]
        fn intersect_incidence((a1, b1, c1, a2, b2, c2) in
            (0u64..7, 0u64..7, 0u64..7, 0u64..7, 0u64..7, 0u64..7))
        {
            let f = make_field(7, 1).unwrap();
            let l1 = Line::new(&f, f.el(a1), f.el(b1), f.el(c1));
            let l2 = Line::new(&f, f.el(a2), f.el(b2), f.el(c2));
            if let (Ok(l1), Ok(l2)) = (l1, l2) {
                if l1 != l2 {
                    let p = intersect(&f, l1, l2).unwrap();
                    prop_assert!(l1.contains_proj(&f, p));
                    prop_assert!(l2.contains_proj(&f, p));
                    prop_assert_eq!(p, intersect(&f, l2, l1).unwrap());
                }
            }
        }
    }
}
