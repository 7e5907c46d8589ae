//! Plain-text weight files.
//!
//! Values are written with 17 significant digits, which round-trips every
//! finite `f64` bit-exactly, so a reloaded network reproduces forward
//! passes bitwise. The header carries the shape, activations and a free-form
//! provenance block (the resolved run configuration of whoever trained it).
//!
//! ```text
//! neurogate weights v1
//! dims 64 15 64
//! activations linear linear
//! provenance 2
//! gate = cnot
//! seed = 1
//! layer 0 weights
//! <one line per output row>
//! layer 0 bias
//! <one line>
//! ...
//! end
//! ```

use std::fs;
use std::io::{self, Write};
use std::path::Path;

use super::{Activation, Layer, Network};
use crate::error::WeightsError;

const MAGIC: &str = "neurogate weights v1";

pub fn save_network(
    path: &Path,
    net: &Network,
    provenance: &[(String, String)],
) -> Result<(), WeightsError> {
    let io_err = |source: io::Error| WeightsError::Io {
        path: path.to_path_buf(),
        source,
    };
    let mut buf = Vec::new();
    writeln!(buf, "{MAGIC}").map_err(io_err)?;
    let dims: Vec<String> = net.dims().iter().map(|d| d.to_string()).collect();
    writeln!(buf, "dims {}", dims.join(" ")).map_err(io_err)?;
    let acts: Vec<&str> = net.layers().iter().map(|l| l.activation().name()).collect();
    writeln!(buf, "activations {}", acts.join(" ")).map_err(io_err)?;
    writeln!(buf, "provenance {}", provenance.len()).map_err(io_err)?;
    for (k, v) in provenance {
        writeln!(buf, "{k} = {v}").map_err(io_err)?;
    }
    for (l, layer) in net.layers().iter().enumerate() {
        writeln!(buf, "layer {l} weights").map_err(io_err)?;
        for row in layer.weights().chunks(layer.in_dim()) {
            writeln!(buf, "{}", join_floats(row)).map_err(io_err)?;
        }
        writeln!(buf, "layer {l} bias").map_err(io_err)?;
        writeln!(buf, "{}", join_floats(layer.bias())).map_err(io_err)?;
    }
    writeln!(buf, "end").map_err(io_err)?;
    fs::write(path, buf).map_err(io_err)
}

fn join_floats(values: &[f64]) -> String {
    let mut s = String::with_capacity(values.len() * 24);
    for (i, v) in values.iter().enumerate() {
        if i > 0 {
            s.push(' ');
        }
        s.push_str(&format!("{v:.16e}"));
    }
    s
}

pub fn load_network(path: &Path) -> Result<(Network, Vec<(String, String)>), WeightsError> {
    let text = fs::read_to_string(path).map_err(|e| {
        if e.kind() == io::ErrorKind::NotFound {
            WeightsError::Missing {
                path: path.to_path_buf(),
            }
        } else {
            WeightsError::Io {
                path: path.to_path_buf(),
                source: e,
            }
        }
    })?;
    let corrupt = |line: usize, reason: String| WeightsError::Corrupt {
        path: path.to_path_buf(),
        line,
        reason,
    };

    let mut lines = text.lines().enumerate();
    let mut next = |expect: &str| -> Result<(usize, &str), WeightsError> {
        lines
            .next()
            .map(|(i, s)| (i + 1, s))
            .ok_or_else(|| corrupt(0, format!("unexpected end of file, expected {expect}")))
    };

    let (ln, magic) = next("header")?;
    if magic != MAGIC {
        return Err(corrupt(ln, format!("bad header {magic:?}")));
    }

    let (ln, dims_line) = next("dims")?;
    let dims: Vec<usize> = dims_line
        .strip_prefix("dims ")
        .ok_or_else(|| corrupt(ln, "expected dims".into()))?
        .split_whitespace()
        .map(|t| t.parse::<usize>())
        .collect::<Result<_, _>>()
        .map_err(|e| corrupt(ln, format!("bad dims: {e}")))?;
    if dims.len() < 2 {
        return Err(corrupt(ln, format!("need at least two dims, got {dims:?}")));
    }

    let (ln, acts_line) = next("activations")?;
    let acts: Vec<Activation> = acts_line
        .strip_prefix("activations ")
        .ok_or_else(|| corrupt(ln, "expected activations".into()))?
        .split_whitespace()
        .map(|t| t.parse::<Activation>())
        .collect::<Result<_, _>>()
        .map_err(|e| corrupt(ln, e))?;
    if acts.len() != dims.len() - 1 {
        return Err(corrupt(
            ln,
            format!("{} activations for {} layers", acts.len(), dims.len() - 1),
        ));
    }

    let (ln, prov_line) = next("provenance")?;
    let prov_count: usize = prov_line
        .strip_prefix("provenance ")
        .ok_or_else(|| corrupt(ln, "expected provenance count".into()))?
        .parse()
        .map_err(|e| corrupt(ln, format!("bad provenance count: {e}")))?;
    let mut provenance = Vec::with_capacity(prov_count);
    for _ in 0..prov_count {
        let (ln, kv) = next("provenance entry")?;
        let (k, v) = kv
            .split_once(" = ")
            .ok_or_else(|| corrupt(ln, format!("bad provenance entry {kv:?}")))?;
        provenance.push((k.to_string(), v.to_string()));
    }

    let mut layers = Vec::with_capacity(dims.len() - 1);
    for l in 0..dims.len() - 1 {
        let (in_dim, out_dim) = (dims[l], dims[l + 1]);
        let (ln, header) = next("layer weights header")?;
        if header != format!("layer {l} weights") {
            return Err(corrupt(ln, format!("expected layer {l} weights header")));
        }
        let mut layer = Layer::zeros(in_dim, out_dim, acts[l]);
        for o in 0..out_dim {
            let (ln, row) = next("weight row")?;
            parse_floats(row, &mut layer.weights_mut()[o * in_dim..(o + 1) * in_dim])
                .map_err(|e| corrupt(ln, e))?;
        }
        let (ln, header) = next("layer bias header")?;
        if header != format!("layer {l} bias") {
            return Err(corrupt(ln, format!("expected layer {l} bias header")));
        }
        let (ln, row) = next("bias row")?;
        parse_floats(row, layer.bias_mut()).map_err(|e| corrupt(ln, e))?;
        layers.push(layer);
    }

    let (ln, tail) = next("end")?;
    if tail != "end" {
        return Err(corrupt(ln, format!("expected end, got {tail:?}")));
    }
    for (i, rest) in lines {
        if !rest.trim().is_empty() {
            return Err(corrupt(i + 1, format!("trailing content {rest:?}")));
        }
    }

    let net = Network::from_layers(layers).map_err(|e| corrupt(0, e.to_string()))?;
    Ok((net, provenance))
}

fn parse_floats(line: &str, out: &mut [f64]) -> Result<(), String> {
    let mut n = 0;
    for tok in line.split_whitespace() {
        if n >= out.len() {
            return Err(format!("expected {} values, got more", out.len()));
        }
        out[n] = tok
            .parse::<f64>()
            .map_err(|e| format!("bad float {tok:?}: {e}"))?;
        n += 1;
    }
    if n != out.len() {
        return Err(format!("expected {} values, got {n}", out.len()));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn sample_net(seed: u64) -> Network {
        Network::init(&[7, 5, 6], &[Activation::Relu, Activation::Linear], seed).unwrap()
    }

    #[test]
    fn round_trip_is_bitwise_exact() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("weights.txt");
        let net = sample_net(123);
        let prov = vec![
            ("gate".to_string(), "cnot".to_string()),
            ("seed".to_string(), "123".to_string()),
        ];
        save_network(&path, &net, &prov).unwrap();
        let (loaded, loaded_prov) = load_network(&path).unwrap();
        assert_eq!(loaded_prov, prov);
        assert_eq!(loaded.dims(), net.dims());
        for (a, b) in net.layers().iter().zip(loaded.layers()) {
            assert_eq!(a.activation(), b.activation());
            for (x, y) in a.weights().iter().zip(b.weights()) {
                assert_eq!(x.to_bits(), y.to_bits());
            }
            for (x, y) in a.bias().iter().zip(b.bias()) {
                assert_eq!(x.to_bits(), y.to_bits());
            }
        }

        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..20 {
            let x: Vec<f64> = (0..7).map(|_| rng.gen_range(-2.0..=2.0)).collect();
            let a = net.forward(&x);
            let b = loaded.forward(&x);
            assert!(a.iter().zip(&b).all(|(p, q)| p.to_bits() == q.to_bits()));
        }
    }

    #[test]
    fn saving_twice_gives_identical_bytes() {
        let dir = tempfile::tempdir().unwrap();
        let (p1, p2) = (dir.path().join("a.txt"), dir.path().join("b.txt"));
        let net = sample_net(9);
        save_network(&p1, &net, &[]).unwrap();
        save_network(&p2, &net, &[]).unwrap();
        assert_eq!(fs::read(&p1).unwrap(), fs::read(&p2).unwrap());
    }

    #[test]
    fn missing_file_is_distinguished_from_corrupt() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("nope.txt");
        assert!(matches!(
            load_network(&path),
            Err(WeightsError::Missing { .. })
        ));

        fs::write(&path, "neurogate weights v1\ndims 4 2\n").unwrap();
        assert!(matches!(
            load_network(&path),
            Err(WeightsError::Corrupt { .. })
        ));
    }

    #[test]
    fn corrupt_values_report_the_line() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("weights.txt");
        let net = sample_net(4);
        save_network(&path, &net, &[]).unwrap();
        let mut text = fs::read_to_string(&path).unwrap();
        text = text.replacen("e-1", "exxx", 1);
        fs::write(&path, text).unwrap();
        match load_network(&path) {
            Err(WeightsError::Corrupt { line, .. }) => assert!(line > 4),
            other => panic!("expected corrupt, got {other:?}"),
        }
    }

    #[test]
    fn truncated_file_is_corrupt() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("weights.txt");
        let net = sample_net(4);
        save_network(&path, &net, &[]).unwrap();
        let text = fs::read_to_string(&path).unwrap();
        let cut: String = text.lines().take(6).collect::<Vec<_>>().join("\n");
        fs::write(&path, cut).unwrap();
        assert!(matches!(
            load_network(&path),
            Err(WeightsError::Corrupt { .. })
        ));
    }
}
