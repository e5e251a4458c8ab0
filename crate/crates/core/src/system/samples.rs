use std::io::{Read, Write};

use rand::Rng;

use super::{SystemError, SystemModel};

/// One observed transition `(x, ν, x')`.
#[derive(Clone, Debug, PartialEq)]
pub struct TrajectorySample {
    pub x: Vec<f64>,
    pub nu: Vec<f64>,
    pub xp: Vec<f64>,
}

/// `per_input` transitions for each listed input, starting from states drawn
/// uniformly over the model's box.
pub fn sample_transitions<R: Rng + ?Sized>(
    model: &SystemModel,
    inputs: &[usize],
    per_input: usize,
    rng: &mut R,
) -> Result<Vec<TrajectorySample>, SystemError> {
    let mut noise = vec![0.0; model.dim()];
    let mut out = Vec::with_capacity(inputs.len() * per_input);
    for &u in inputs {
        for _ in 0..per_input {
            let x = model.state_box().sample(rng);
            model.sample_noise(rng, &mut noise);
            let xp = model.step(&x, u, &noise)?;
            out.push(TrajectorySample {
                x,
                nu: model.inputs()[u].clone(),
                xp,
            });
        }
    }
    Ok(out)
}

fn csv_err(e: csv::Error) -> SystemError {
    SystemError::Samples(e.to_string())
}

/// CSV with header `x_1..x_n,nu_1..nu_m,xp_1..xp_n`.
pub fn write_samples<W: Write>(out: W, samples: &[TrajectorySample]) -> Result<(), SystemError> {
    let mut w = csv::Writer::from_writer(out);
    if let Some(first) = samples.first() {
        let (n, m) = (first.x.len(), first.nu.len());
        let header: Vec<String> = (1..=n)
            .map(|i| format!("x_{i}"))
            .chain((1..=m).map(|i| format!("nu_{i}")))
            .chain((1..=n).map(|i| format!("xp_{i}")))
            .collect();
        w.write_record(&header).map_err(csv_err)?;
        for s in samples {
            if s.x.len() != n || s.xp.len() != n || s.nu.len() != m {
                return Err(SystemError::Samples(
                    "inconsistent sample dimensions".into(),
                ));
            }
            let row: Vec<String> =
                s.x.iter()
                    .chain(&s.nu)
                    .chain(&s.xp)
                    .map(|v| v.to_string())
                    .collect();
            w.write_record(&row).map_err(csv_err)?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn read_samples<R: Read>(input: R) -> Result<Vec<TrajectorySample>, SystemError> {
    let mut r = csv::Reader::from_reader(input);
    let header = r.headers().map_err(csv_err)?.clone();
    let count = |prefix: &str| header.iter().filter(|h| h.starts_with(prefix)).count();
    let n = count("x_");
    let m = count("nu_");
    let expected: Vec<String> = (1..=n)
        .map(|i| format!("x_{i}"))
        .chain((1..=m).map(|i| format!("nu_{i}")))
        .chain((1..=n).map(|i| format!("xp_{i}")))
        .collect();
    if n == 0 || m == 0 || header.iter().ne(expected.iter().map(String::as_str)) {
        return Err(SystemError::Samples("unexpected header".into()));
    }
    let mut out = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(csv_err)?;
        let vals = rec
            .iter()
            .map(|f| f.trim().parse::<f64>())
            .collect::<Result<Vec<f64>, _>>()
            .map_err(|e| SystemError::Samples(e.to_string()))?;
        out.push(TrajectorySample {
            x: vals[..n].to_vec(),
            nu: vals[n..n + m].to_vec(),
            xp: vals[n + m..].to_vec(),
        });
    }
    Ok(out)
}
