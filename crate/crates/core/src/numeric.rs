//! Small numerical helpers shared across modules.

/// Abscissae of the 8-point Gauss-Legendre rule on [-1, 1] (positive half).
const GL8_X: [f64; 4] = [
    0.183_434_642_495_649_8,
    0.525_532_409_916_329,
    0.796_666_477_413_626_7,
    0.960_289_856_497_536_3,
];
const GL8_W: [f64; 4] = [
    0.362_683_783_378_362,
    0.313_706_645_877_887_3,
    0.222_381_034_453_374_5,
    0.101_228_536_290_376_3,
];

/// Integrates `f` over `[a, b]` with `panels` composite 8-point Gauss-Legendre panels.
pub fn gauss_legendre<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, panels: usize) -> f64 {
    let panels = panels.max(1);
    let width = (b - a) / panels as f64;
    let mut total = 0.0;
    for i in 0..panels {
        let lo = a + width * i as f64;
        let mid = lo + 0.5 * width;
        let half = 0.5 * width;
        let mut acc = 0.0;
        for (x, w) in GL8_X.iter().zip(GL8_W.iter()) {
            acc += w * (f(mid - half * x) + f(mid + half * x));
        }
        total += acc * half;
    }
    total
}

/// Quintic smoothstep `6x^5 - 15x^4 + 10x^3` with first and second
/// derivatives, clamped outside `[0, 1]`.
pub fn smoothstep5(x: f64) -> (f64, f64, f64) {
    if x <= 0.0 {
        return (0.0, 0.0, 0.0);
    }
    if x >= 1.0 {
        return (1.0, 0.0, 0.0);
    }
    let x2 = x * x;
    let x3 = x2 * x;
    let v = x3 * (10.0 + x * (-15.0 + 6.0 * x));
    let d = 30.0 * x2 * (1.0 - x) * (1.0 - x);
    let dd = 60.0 * x * (1.0 - x) * (1.0 - 2.0 * x);
    (v, d, dd)
}

/// Quintic polynomial on `[a, b]` matching value, slope and curvature at
/// both ends.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuinticHermite {
    a: f64,
    h: f64,
    c: [f64; 6],
}

impl QuinticHermite {
    pub fn new(a: f64, b: f64, left: [f64; 3], right: [f64; 3]) -> Self {
        let h = b - a;
        let [y0, d0, s0] = left;
        let [y1, d1, s1] = right;
        // Coefficients in the local variable x = t - a.
        let c0 = y0;
        let c1 = d0;
        let c2 = 0.5 * s0;
        let r0 = y1 - (c0 + c1 * h + c2 * h * h);
        let r1 = d1 - (c1 + 2.0 * c2 * h);
        let r2 = s1 - 2.0 * c2;
        let h2 = h * h;
        let h3 = h2 * h;
        let c3 = (20.0 * r0 - 8.0 * r1 * h + r2 * h2) / (2.0 * h3);
        let c4 = (-30.0 * r0 + 14.0 * r1 * h - 2.0 * r2 * h2) / (2.0 * h3 * h);
        let c5 = (12.0 * r0 - 6.0 * r1 * h + r2 * h2) / (2.0 * h3 * h2);
        Self {
            a,
            h,
            c: [c0, c1, c2, c3, c4, c5],
        }
    }

    pub fn start(&self) -> f64 {
        self.a
    }

    pub fn end(&self) -> f64 {
        self.a + self.h
    }

    /// Value, first and second derivative at `t`.
    pub fn eval(&self, t: f64) -> (f64, f64, f64) {
        let x = t - self.a;
        let c = &self.c;
        let v = c[0] + x * (c[1] + x * (c[2] + x * (c[3] + x * (c[4] + x * c[5]))));
        let d = c[1] + x * (2.0 * c[2] + x * (3.0 * c[3] + x * (4.0 * c[4] + x * 5.0 * c[5])));
        let dd = 2.0 * c[2] + x * (6.0 * c[3] + x * (12.0 * c[4] + x * 20.0 * c[5]));
        (v, d, dd)
    }
}

/// Formats a float with at most ten decimals and no trailing zeros, so that
/// values such as `8.000000000000002` print as `8`.
pub fn fmt_num(x: f64) -> String {
    if !x.is_finite() {
        return format!("{x}");
    }
    let s = format!("{:.10}", x);
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".to_string()
    } else {
        s.to_string()
    }
}

/// Single-source shortest paths on an implicit graph with nonnegative
/// weights. `neighbors(v, visit)` reports every edge `(v, w, weight)` through
/// `visit(w, weight)`.
pub fn dijkstra<F>(n: usize, source: usize, mut neighbors: F) -> Vec<f64>
where
    F: FnMut(usize, &mut dyn FnMut(usize, f64)),
{
    use std::cmp::Reverse;
    use std::collections::BinaryHeap;

    #[derive(PartialEq)]
    struct Key(f64);
    impl Eq for Key {}
    impl PartialOrd for Key {
        fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
            Some(self.cmp(other))
        }
    }
    impl Ord for Key {
        fn cmp(&self, other: &Self) -> std::cmp::Ordering {
            self.0.total_cmp(&other.0)
        }
    }

    let mut dist = vec![f64::INFINITY; n];
    let mut done = vec![false; n];
    let mut heap = BinaryHeap::new();
    dist[source] = 0.0;
    heap.push(Reverse((Key(0.0), source)));
    while let Some(Reverse((Key(d), v))) = heap.pop() {
        if done[v] {
            continue;
        }
        done[v] = true;
        neighbors(v, &mut |w, weight| {
            let nd = d + weight;
            if nd < dist[w] {
                dist[w] = nd;
                heap.push(Reverse((Key(nd), w)));
            }
        });
    }
    dist
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_integrates_polynomials_exactly() {
        let v = gauss_legendre(|x| x.powi(7) - 3.0 * x * x, -1.0, 2.0, 1);
        let exact = (2f64.powi(8) - 1.0) / 8.0 - (8.0 + 1.0);
        assert!((v - exact).abs() < 1e-12);
        let s = gauss_legendre(f64::sin, 0.0, std::f64::consts::PI, 16);
        assert!((s - 2.0).abs() < 1e-14);
    }

    #[test]
    fn hermite_matches_end_conditions() {
        let q = QuinticHermite::new(1.0, 2.0, [1.0, 0.0, 0.0], [1.5, 0.3, -0.2]);
        let (v0, d0, s0) = q.eval(1.0);
        let (v1, d1, s1) = q.eval(2.0);
        for (a, b) in [(v0, 1.0), (d0, 0.0), (s0, 0.0), (v1, 1.5), (d1, 0.3), (s1, -0.2)] {
            assert!((a - b).abs() < 1e-12, "{a} vs {b}");
        }
    }

    #[test]
    fn smoothstep_derivatives_match_differences() {
        let h = 1e-6;
        for &x in &[0.1, 0.37, 0.5, 0.81] {
            let (_, d, dd) = smoothstep5(x);
            let fd = (smoothstep5(x + h).0 - smoothstep5(x - h).0) / (2.0 * h);
            let fdd = (smoothstep5(x + h).1 - smoothstep5(x - h).1) / (2.0 * h);
            assert!((d - fd).abs() < 1e-7);
            assert!((dd - fdd).abs() < 1e-6);
        }
    }

    #[test]
    fn fmt_num_trims() {
        assert_eq!(fmt_num(8.000000000000002), "8");
        assert_eq!(fmt_num(0.25), "0.25");
        assert_eq!(fmt_num(-0.0), "0");
    }

    #[test]
    fn dijkstra_on_a_weighted_path() {
        // 0 - 1 - 2 with a long shortcut 0 - 2.
        let edges = [(0, 1, 1.0), (1, 2, 1.5), (0, 2, 3.0)];
        let d = dijkstra(4, 0, |v, visit| {
            for &(a, b, w) in &edges {
                if a == v {
                    visit(b, w);
                }
                if b == v {
                    visit(a, w);
                }
            }
        });
        assert_eq!(d[..3], [0.0, 1.0, 2.5]);
        assert!(d[3].is_infinite());
    }
}
