//! Two-column interchange: `eps,value` where value is the quoted pair `"re,im"`.

use num_complex::Complex64;

use crate::{EpsError, EpsGrid, EpsNet, GridKind};

pub fn write_csv(net: &EpsNet) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["eps", "value"]).expect("in-memory write");
    for (e, z) in net.grid().values().iter().zip(net.samples()) {
        w.write_record([format!("{e:e}"), format!("{:e},{:e}", z.re, z.im)]).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("ascii output")
}

pub fn read_csv(text: &str) -> Result<EpsNet, EpsError> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let (mut eps, mut vals) = (Vec::new(), Vec::new());
    for (i, rec) in r.records().enumerate() {
        let line = i + 2;
        let rec = rec.map_err(|e| EpsError::Csv { line, msg: e.to_string() })?;
        if rec.len() != 2 {
            return Err(EpsError::Csv { line, msg: format!("{} columns", rec.len()) });
        }
        let num = |s: &str| s.trim().parse::<f64>().map_err(|e| EpsError::Csv { line, msg: format!("{s:?}: {e}") });
        eps.push(num(&rec[0])?);
        let (re, im) = rec[1]
            .split_once(',')
            .ok_or_else(|| EpsError::Csv { line, msg: "value must be \"re,im\"".into() })?;
        vals.push(Complex64::new(num(re)?, num(im)?));
    }
    let kind = infer_kind(&eps);
    EpsNet::new(EpsGrid::new(eps, kind)?, vals)
}

fn infer_kind(eps: &[f64]) -> GridKind {
    let close = |a: f64, b: f64| (a - b).abs() <= 1e-12 * b;
    let j0 = (-eps[0].log2()).round();
    if eps.iter().enumerate().all(|(i, &e)| close(e, 2f64.powf(-(j0 + i as f64)))) {
        return GridKind::Dyadic;
    }
    let k0 = (1.0 / eps[0]).round();
    if eps.iter().enumerate().all(|(i, &e)| close(e, 1.0 / (k0 + i as f64))) {
        return GridKind::Reciprocal;
    }
    let mid = EpsGrid::new(eps.to_vec(), GridKind::ReciprocalMidpoints).is_ok()
        && eps.iter().all(|&e| {
            let h = 2.0 / e;
            EpsGrid::is_resonant(e) || (h - h.round()).abs() <= 1e-9 * h
        });
    if mid {
        GridKind::ReciprocalMidpoints
    } else {
        GridKind::Explicit
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let g = EpsGrid::reciprocal_midpoints(6).unwrap();
        let net = EpsNet::from_fn(&g, |e| Complex64::new(e.sqrt(), -1.0 / e)).unwrap();
        let text = write_csv(&net);
        assert!(text.starts_with("eps,value\n"));
        let back = read_csv(&text).unwrap();
        assert_eq!(back, net);
    }

    #[test]
    fn bad_value_reports_line() {
        let err = read_csv("eps,value\n0.5,\"1,0\"\n0.25,\"oops\"\n").unwrap_err();
        assert_eq!(err, EpsError::Csv { line: 3, msg: "value must be \"re,im\"".into() });
    }
}
