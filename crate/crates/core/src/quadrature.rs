//! Symmetric quadrature rules on triangles, in barycentric coordinates with
//! weights summing to one.

pub(crate) struct Rule {
    pub points: &'static [[f64; 3]],
    pub weights: &'static [f64],
}

const T3_POINTS: [[f64; 3]; 3] = [
    [2.0 / 3.0, 1.0 / 6.0, 1.0 / 6.0],
    [1.0 / 6.0, 2.0 / 3.0, 1.0 / 6.0],
    [1.0 / 6.0, 1.0 / 6.0, 2.0 / 3.0],
];
const T3_WEIGHTS: [f64; 3] = [1.0 / 3.0; 3];

/// degree 2
pub(crate) const THREE_POINT: Rule = Rule {
    points: &T3_POINTS,
    weights: &T3_WEIGHTS,
};

// (6 ∓ √15)/21, (9 ± 2√15)/21 and (155 ∓ √15)/1200
const A1: f64 = 0.101_286_507_323_456_34;
const B1: f64 = 0.797_426_985_353_087_3;
const A2: f64 = 0.470_142_064_105_115_1;
const B2: f64 = 0.059_715_871_789_769_82;
const W1: f64 = 0.125_939_180_544_827_15;
const W2: f64 = 0.132_394_152_788_506_18;

const T7_POINTS: [[f64; 3]; 7] = [
    [1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0],
    [B1, A1, A1],
    [A1, B1, A1],
    [A1, A1, B1],
    [B2, A2, A2],
    [A2, B2, A2],
    [A2, A2, B2],
];
const T7_WEIGHTS: [f64; 7] = [0.225, W1, W1, W1, W2, W2, W2];

/// degree 5
pub(crate) const SEVEN_POINT: Rule = Rule {
    points: &T7_POINTS,
    weights: &T7_WEIGHTS,
};

#[cfg(test)]
mod tests {
    use super::*;

    fn integrate(rule: &Rule, f: impl Fn(f64, f64) -> f64) -> f64 {
        // reference triangle (0,0),(1,0),(0,1), area 1/2
        rule.points
            .iter()
            .zip(rule.weights)
            .map(|(p, w)| w * f(p[1], p[2]))
            .sum::<f64>()
            * 0.5
    }

    #[test]
    fn exactness() {
        // ∫ x^a y^b over the reference triangle = a! b! / (a + b + 2)!
        let exact = |a: u32, b: u32| {
            let f = |n: u32| (1..=n).map(f64::from).product::<f64>();
            f(a) * f(b) / f(a + b + 2)
        };
        for (rule, deg) in [(&THREE_POINT, 2), (&SEVEN_POINT, 5)] {
            let s: f64 = rule.weights.iter().sum();
            assert!((s - 1.0).abs() < 1e-15);
            for a in 0..=deg {
                for b in 0..=(deg - a) {
                    let q = integrate(rule, |x, y| x.powi(a as i32) * y.powi(b as i32));
                    assert!((q - exact(a, b)).abs() < 1e-15, "{a} {b}");
                }
            }
        }
        assert!((A1 - (6.0 - 15f64.sqrt()) / 21.0).abs() < 1e-16);
        assert!((W2 - (155.0 + 15f64.sqrt()) / 1200.0).abs() < 1e-16);
    }
}
