use serde::Serialize;

/// One sweep point: the metric over every repetition.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepPoint {
    pub x: f64,
    pub mean: f64,
    /// Sample standard deviation (`n − 1` denominator); 0 for one repetition.
    pub std: f64,
    pub raw: Vec<f64>,
}

impl SweepPoint {
    pub fn new(x: f64, raw: Vec<f64>) -> Self {
        let (mean, std) = mean_std(&raw);
        Self { x, mean, std, raw }
    }
}

/// One labelled curve over a sweep axis.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Curve {
    pub label: String,
    pub points: Vec<SweepPoint>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepResult {
    pub axis: String,
    pub metric: String,
    pub curves: Vec<Curve>,
}

impl SweepResult {
    pub fn curve(&self, label: &str) -> Option<&Curve> {
        self.curves.iter().find(|c| c.label == label)
    }

    /// Long-format CSV: `curve,<axis>,mean,std,rep_1..rep_n`.
    pub fn to_csv(&self) -> String {
        let reps = self.curves.iter().flat_map(|c| &c.points).map(|p| p.raw.len()).max().unwrap_or(0);
        let mut out = format!("curve,{},mean_{m},std_{m}", self.axis, m = self.metric);
        for r in 1..=reps {
            out.push_str(&format!(",rep_{r}"));
        }
        out.push('\n');
        for curve in &self.curves {
            for p in &curve.points {
                out.push_str(&format!("{},{},{},{}", curve.label, p.x, p.mean, p.std));
                for v in &p.raw {
                    out.push_str(&format!(",{v}"));
                }
                out.push('\n');
            }
        }
        out
    }
}

pub fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    (mean, var.sqrt())
}

/// `√((s_a² + s_b²)/2)`, the pooled deviation of two equally sized groups.
pub fn pooled_std(a: f64, b: f64) -> f64 {
    ((a * a + b * b) / 2.0).sqrt()
}
