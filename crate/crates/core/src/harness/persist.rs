use std::path::Path;

use crate::error::{Error, Result};
use crate::models::{
    Classifier, ClassifierKind, CnnModel, LstmModel, MlpModel, ScalerParams, SvmModel, SvmPair, TrainedModel,
};
use crate::scalar::Float;

pub const MAGIC: &[u8; 4] = b"ASCA";
pub const FORMAT_VERSION: u32 = 1;

struct Tensor {
    name: String,
    dims: Vec<u64>,
    data: Vec<f64>,
}

#[derive(Default)]
struct Writer {
    buf: Vec<u8>,
    tensors: Vec<Tensor>,
}

impl Writer {
    fn u32(&mut self, v: u32) {
        self.buf.extend_from_slice(&v.to_le_bytes());
    }

    fn str(&mut self, s: &str) {
        self.u32(s.len() as u32);
        self.buf.extend_from_slice(s.as_bytes());
    }

    fn tensor<F: Float>(&mut self, name: impl Into<String>, dims: &[usize], data: &[F]) {
        debug_assert_eq!(dims.iter().product::<usize>(), data.len());
        self.tensors.push(Tensor {
            name: name.into(),
            dims: dims.iter().map(|&d| d as u64).collect(),
            data: data.iter().map(|v| v.as_f64()).collect(),
        });
    }

    fn ints(&mut self, name: &str, v: &[usize]) {
        let data: Vec<f64> = v.iter().map(|&x| x as f64).collect();
        self.tensor(name, &[v.len()], &data);
    }

    fn finish(mut self) -> Vec<u8> {
        let tensors = std::mem::take(&mut self.tensors);
        self.u32(tensors.len() as u32);
        for t in tensors {
            self.str(&t.name);
            self.u32(t.dims.len() as u32);
            for d in &t.dims {
                self.buf.extend_from_slice(&d.to_le_bytes());
            }
            for v in &t.data {
                self.buf.extend_from_slice(&v.to_le_bytes());
            }
        }
        self.buf
    }
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
    tensors: Vec<Tensor>,
}

fn truncated() -> Error {
    Error::Format("file is truncated".into())
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self.pos.checked_add(n).ok_or_else(truncated)?;
        let s = self.bytes.get(self.pos..end).ok_or_else(truncated)?;
        self.pos = end;
        Ok(s)
    }

    fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn str(&mut self) -> Result<String> {
        let n = self.u32()? as usize;
        String::from_utf8(self.take(n)?.to_vec()).map_err(|_| Error::Format("string is not UTF-8".into()))
    }

    fn read_tensors(&mut self) -> Result<()> {
        let n = self.u32()?;
        for _ in 0..n {
            let name = self.str()?;
            let ndim = self.u32()? as usize;
            let dims = (0..ndim).map(|_| self.u64()).collect::<Result<Vec<u64>>>()?;
            let count = dims
                .iter()
                .try_fold(1u64, |a, &d| a.checked_mul(d))
                .and_then(|c| usize::try_from(c).ok())
                .ok_or_else(|| Error::Format(format!("tensor '{name}' is too large")))?;
            let raw = self.take(count.checked_mul(8).ok_or_else(truncated)?)?;
            let data = raw.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect();
            self.tensors.push(Tensor { name, dims, data });
        }
        if self.pos != self.bytes.len() {
            return Err(Error::Format(format!("{} trailing bytes", self.bytes.len() - self.pos)));
        }
        Ok(())
    }

    fn get(&self, name: &str) -> Result<&Tensor> {
        self.tensors
            .iter()
            .find(|t| t.name == name)
            .ok_or_else(|| Error::Format(format!("missing tensor '{name}'")))
    }

    fn floats<F: Float>(&self, name: &str, len: Option<usize>) -> Result<Vec<F>> {
        let t = self.get(name)?;
        if let Some(n) = len {
            if t.data.len() != n {
                return Err(Error::Format(format!("tensor '{name}' has {} values, expected {n}", t.data.len())));
            }
        }
        Ok(t.data.iter().map(|&v| F::cst(v)).collect())
    }

    fn matrix<F: Float>(&self, name: &str, cols: usize) -> Result<Vec<Vec<F>>> {
        let t = self.get(name)?;
        if t.dims.len() != 2 || t.dims[1] as usize != cols {
            return Err(Error::Format(format!("tensor '{name}' has shape {:?}, expected [_, {cols}]", t.dims)));
        }
        if cols == 0 {
            return Ok(vec![Vec::new(); t.dims[0] as usize]);
        }
        Ok(t.data.chunks(cols).map(|r| r.iter().map(|&v| F::cst(v)).collect()).collect())
    }

    fn ints(&self, name: &str, len: usize) -> Result<Vec<usize>> {
        let t = self.get(name)?;
        if t.data.len() != len || t.data.iter().any(|&v| v < 0.0 || v.fract() != 0.0) {
            return Err(Error::Format(format!("tensor '{name}' is not {len} non-negative integers")));
        }
        Ok(t.data.iter().map(|&v| v as usize).collect())
    }
}

/// Serializes a model; values are widened to f64, so f32 and f64 models both
/// round-trip exactly.
pub fn model_to_bytes<F: Float>(model: &TrainedModel<F>) -> Vec<u8> {
    let mut w = Writer::default();
    w.buf.extend_from_slice(MAGIC);
    w.u32(FORMAT_VERSION);
    w.buf.push(model.kind().tag());
    w.u32(model.label_names.len() as u32);
    for l in &model.label_names {
        w.str(l);
    }
    let notes: &[String] = match &model.classifier {
        Classifier::Svm(m) => &m.warnings,
        _ => &[],
    };
    w.u32(notes.len() as u32);
    for n in notes {
        w.str(n);
    }
    let dim = model.scaler.dim();
    w.tensor("scaler.min", &[dim], &model.scaler.min);
    w.tensor("scaler.max", &[dim], &model.scaler.max);
    match &model.classifier {
        Classifier::Svm(m) => {
            w.tensor("svm.gamma_c", &[2], &[m.gamma, m.c]);
            w.ints("svm.shape", &[m.n_features, m.n_classes, m.pairs.len()]);
            for (i, p) in m.pairs.iter().enumerate() {
                w.ints(&format!("svm.pair{i}.classes"), &[p.class_a, p.class_b]);
                w.tensor(format!("svm.pair{i}.rho"), &[1], &[p.rho]);
                let flat: Vec<F> = p.support.iter().flatten().copied().collect();
                w.tensor(format!("svm.pair{i}.support"), &[p.support.len(), m.n_features], &flat);
                w.tensor(format!("svm.pair{i}.coef"), &[p.coef.len()], &p.coef);
            }
        }
        Classifier::Dnn(m) => {
            w.ints("mlp.sizes", &m.sizes);
            w.tensor("mlp.dropout", &[1], &[m.dropout]);
            w.tensor("mlp.params", &[m.params.len()], &m.params);
        }
        Classifier::Rnn(m) => {
            w.ints("lstm.shape", &[m.timesteps, m.units[0], m.units[1], m.n_classes]);
            w.tensor("lstm.dropout", &[1], &[m.dropout]);
            w.tensor("lstm.params", &[m.params.len()], &m.params);
        }
        Classifier::Cnn(m) => {
            w.ints("cnn.shape", &[m.length, m.channels[0], m.channels[1], m.n_classes]);
            w.tensor("cnn.params", &[m.params.len()], &m.params);
            w.tensor("cnn.running", &[m.running.len()], &m.running);
        }
    }
    w.finish()
}

pub fn model_from_bytes<F: Float>(bytes: &[u8]) -> Result<TrainedModel<F>> {
    let mut r = Reader {
        bytes,
        pos: 0,
        tensors: Vec::new(),
    };
    if r.take(4).ok() != Some(MAGIC.as_slice()) {
        return Err(Error::Format("bad magic bytes, not a model file".into()));
    }
    let version = r.u32()?;
    if version != FORMAT_VERSION {
        return Err(Error::Format(format!("format version {version}, this build reads {FORMAT_VERSION}")));
    }
    let tag = r.u8()?;
    let kind = ClassifierKind::from_tag(tag).ok_or_else(|| Error::Format(format!("unknown model kind tag {tag}")))?;
    let n_labels = r.u32()?;
    let label_names = (0..n_labels).map(|_| r.str()).collect::<Result<Vec<_>>>()?;
    let n_notes = r.u32()?;
    let notes = (0..n_notes).map(|_| r.str()).collect::<Result<Vec<_>>>()?;
    r.read_tensors()?;

    let scaler = ScalerParams {
        min: r.floats("scaler.min", None)?,
        max: r.floats("scaler.max", None)?,
    };
    if scaler.min.len() != scaler.max.len() {
        return Err(Error::Format("scaler min/max lengths differ".into()));
    }
    let n_classes = label_names.len();
    let classifier = match kind {
        ClassifierKind::Svm => {
            let gc = r.floats::<F>("svm.gamma_c", Some(2))?;
            let shape = r.ints("svm.shape", 3)?;
            let (n_features, n_pairs) = (shape[0], shape[2]);
            let pairs = (0..n_pairs)
                .map(|i| {
                    let classes = r.ints(&format!("svm.pair{i}.classes"), 2)?;
                    let support = r.matrix(&format!("svm.pair{i}.support"), n_features)?;
                    Ok(SvmPair {
                        class_a: classes[0],
                        class_b: classes[1],
                        coef: r.floats(&format!("svm.pair{i}.coef"), Some(support.len()))?,
                        support,
                        rho: r.floats(&format!("svm.pair{i}.rho"), Some(1))?[0],
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            Classifier::Svm(SvmModel {
                gamma: gc[0],
                c: gc[1],
                n_features,
                n_classes: shape[1],
                pairs,
                warnings: notes,
            })
        }
        ClassifierKind::Dnn => {
            let n = r.get("mlp.sizes")?.data.len();
            let sizes = r.ints("mlp.sizes", n)?;
            let params = r.floats("mlp.params", Some(MlpModel::<F>::n_params_for(&sizes)))?;
            Classifier::Dnn(MlpModel {
                dropout: r.floats("mlp.dropout", Some(1))?[0],
                sizes,
                params,
            })
        }
        ClassifierKind::Rnn => {
            let s = r.ints("lstm.shape", 4)?;
            let units = [s[1], s[2]];
            Classifier::Rnn(LstmModel {
                timesteps: s[0],
                units,
                n_classes: s[3],
                dropout: r.floats("lstm.dropout", Some(1))?[0],
                params: r.floats("lstm.params", Some(LstmModel::<F>::n_params_for(units, s[3])))?,
            })
        }
        ClassifierKind::Cnn => {
            let s = r.ints("cnn.shape", 4)?;
            let channels = [s[1], s[2]];
            Classifier::Cnn(CnnModel {
                length: s[0],
                channels,
                n_classes: s[3],
                params: r.floats("cnn.params", Some(CnnModel::<F>::n_params_for(channels, s[3])))?,
                running: r.floats("cnn.running", Some(2 * (channels[0] + channels[1])))?,
            })
        }
    };
    if classifier.n_inputs() != scaler.dim() {
        return Err(Error::Format(format!(
            "classifier expects {} inputs but the scaler has {}",
            classifier.n_inputs(),
            scaler.dim()
        )));
    }
    let out_classes = match &classifier {
        Classifier::Svm(m) => m.n_classes,
        Classifier::Dnn(m) => *m.sizes.last().unwrap_or(&0),
        Classifier::Rnn(m) => m.n_classes,
        Classifier::Cnn(m) => m.n_classes,
    };
    if out_classes != n_classes {
        return Err(Error::Format(format!("{out_classes} outputs for {n_classes} labels")));
    }
    Ok(TrainedModel {
        scaler,
        label_names,
        classifier,
    })
}

pub fn save_model<F: Float>(model: &TrainedModel<F>, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, model_to_bytes(model)).map_err(|e| Error::io(path, e))
}

pub fn load_model<F: Float>(path: impl AsRef<Path>) -> Result<TrainedModel<F>> {
    let path = path.as_ref();
    model_from_bytes(&std::fs::read(path).map_err(|e| Error::io(path, e))?)
}

/// Like `load_model`, but the file must hold a `kind` model.
pub fn load_model_as<F: Float>(path: impl AsRef<Path>, kind: ClassifierKind) -> Result<TrainedModel<F>> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    if let Some(found) = bytes.get(8).copied().and_then(ClassifierKind::from_tag) {
        if bytes.starts_with(MAGIC) && found != kind {
            return Err(Error::Format(format!("file holds a {found} model, expected {kind}")));
        }
    }
    model_from_bytes(&bytes)
}
