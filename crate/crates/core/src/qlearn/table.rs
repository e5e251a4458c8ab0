use std::collections::HashMap;
use std::io::{BufRead, Write};

use super::QLearnError;
use crate::product::{Policy, RewardMode};

/// Tables with more entries than this are stored sparsely.
pub const DENSE_LIMIT: usize = 1 << 22;

/// Run information kept alongside the values.
#[derive(Clone, Debug, PartialEq)]
pub struct QTableMeta {
    pub seed: u64,
    pub episodes: u64,
    pub mode: RewardMode,
    pub kappa: f64,
    pub delta: Option<f64>,
}

impl Default for QTableMeta {
    fn default() -> Self {
        QTableMeta {
            seed: 0,
            episodes: 0,
            mode: RewardMode::Sparse,
            kappa: crate::product::DEFAULT_KAPPA,
            delta: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Slots {
    Dense,
    Sparse(HashMap<(usize, usize, usize), usize>),
}

/// Time-indexed action values `Q[k](cell, q, input)` for `k < T` with visit
/// counts. Cells include the out token, numbered `num_cells`.
#[derive(Clone, Debug, PartialEq)]
pub struct QTable {
    horizon: usize,
    cells: usize,
    automaton: usize,
    inputs: usize,
    slots: Slots,
    values: Vec<f64>,
    visits: Vec<u64>,
    pub meta: QTableMeta,
}

impl QTable {
    /// Zero table; `num_cells` excludes the out token.
    pub fn new(horizon: usize, num_cells: usize, automaton: usize, inputs: usize) -> Self {
        let cells = num_cells + 1;
        let size = horizon
            .checked_mul(cells)
            .and_then(|v| v.checked_mul(automaton))
            .and_then(|v| v.checked_mul(inputs));
        let (slots, len) = match size {
            Some(n) if n <= DENSE_LIMIT => (Slots::Dense, n),
            _ => (Slots::Sparse(HashMap::new()), 0),
        };
        QTable {
            horizon,
            cells,
            automaton,
            inputs,
            slots,
            values: vec![0.0; len],
            visits: vec![0; len],
            meta: QTableMeta::default(),
        }
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    /// Cells without the out token.
    pub fn num_cells(&self) -> usize {
        self.cells - 1
    }

    pub fn num_automaton_states(&self) -> usize {
        self.automaton
    }

    pub fn num_inputs(&self) -> usize {
        self.inputs
    }

    pub fn is_dense(&self) -> bool {
        matches!(self.slots, Slots::Dense)
    }

    fn in_range(&self, k: usize, cell: usize, q: usize) -> bool {
        k < self.horizon && cell < self.cells && q < self.automaton
    }

    fn find(&self, k: usize, cell: usize, q: usize) -> Option<usize> {
        if !self.in_range(k, cell, q) {
            return None;
        }
        match &self.slots {
            Slots::Dense => Some(((k * self.cells + cell) * self.automaton + q) * self.inputs),
            Slots::Sparse(map) => map.get(&(k, cell, q)).copied(),
        }
    }

    fn find_or_insert(&mut self, k: usize, cell: usize, q: usize) -> usize {
        assert!(
            self.in_range(k, cell, q),
            "({k}, {cell}, {q}) outside the table"
        );
        match &mut self.slots {
            Slots::Dense => ((k * self.cells + cell) * self.automaton + q) * self.inputs,
            Slots::Sparse(map) => *map.entry((k, cell, q)).or_insert_with(|| {
                let at = self.values.len();
                self.values.resize(at + self.inputs, 0.0);
                self.visits.resize(at + self.inputs, 0);
                at
            }),
        }
    }

    /// Action values at `(k, cell, q)`, `None` if never stored.
    pub fn values(&self, k: usize, cell: usize, q: usize) -> Option<&[f64]> {
        self.find(k, cell, q)
            .map(|i| &self.values[i..i + self.inputs])
    }

    pub fn visits(&self, k: usize, cell: usize, q: usize) -> Option<&[u64]> {
        self.find(k, cell, q)
            .map(|i| &self.visits[i..i + self.inputs])
    }

    pub fn value(&self, k: usize, cell: usize, q: usize, input: usize) -> f64 {
        self.values(k, cell, q).map_or(0.0, |v| v[input])
    }

    /// `max_ν Q[k](cell, q, ν)`; zero where nothing is stored and for `k ≥ T`.
    pub fn max_value(&self, k: usize, cell: usize, q: usize) -> f64 {
        self.values(k, cell, q)
            .map_or(0.0, |v| v.iter().copied().fold(f64::NEG_INFINITY, f64::max))
    }

    /// Lowest-index argmax, `None` if the tuple was never updated.
    pub fn greedy(&self, k: usize, cell: usize, q: usize) -> Option<usize> {
        let i = self.find(k, cell, q)?;
        if self.visits[i..i + self.inputs].iter().all(|&n| n == 0) {
            return None;
        }
        Some(argmax(&self.values[i..i + self.inputs]))
    }

    /// `Q += α (target − Q)` with `α = rate(visits before the update)`.
    pub(crate) fn update<F: FnOnce(u64) -> f64>(
        &mut self,
        k: usize,
        cell: usize,
        q: usize,
        input: usize,
        target: f64,
        rate: F,
    ) {
        let i = self.find_or_insert(k, cell, q) + input;
        let alpha = rate(self.visits[i]);
        self.values[i] += alpha * (target - self.values[i]);
        self.visits[i] += 1;
    }

    /// Stored `(k, cell, q)` tuples in ascending order.
    pub fn keys(&self) -> Vec<(usize, usize, usize)> {
        match &self.slots {
            Slots::Dense => {
                let mut out = Vec::with_capacity(self.horizon * self.cells * self.automaton);
                for k in 0..self.horizon {
                    for c in 0..self.cells {
                        for q in 0..self.automaton {
                            out.push((k, c, q));
                        }
                    }
                }
                out
            }
            Slots::Sparse(map) => {
                let mut out: Vec<_> = map.keys().copied().collect();
                out.sort_unstable();
                out
            }
        }
    }

    /// CSV `k,cell,q,input,value,visits` preceded by `#` metadata lines.
    /// Dense tables list every entry; sparse ones only stored tuples.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "# format=qtable-1")?;
        writeln!(out, "# horizon={}", self.horizon)?;
        writeln!(out, "# cells={}", self.num_cells())?;
        writeln!(out, "# automaton_states={}", self.automaton)?;
        writeln!(out, "# inputs={}", self.inputs)?;
        writeln!(out, "# seed={}", self.meta.seed)?;
        writeln!(out, "# episodes={}", self.meta.episodes)?;
        writeln!(out, "# reward={}", self.meta.mode)?;
        writeln!(out, "# kappa={}", self.meta.kappa)?;
        if let Some(d) = self.meta.delta {
            writeln!(out, "# delta={d}")?;
        }
        writeln!(out, "k,cell,q,input,value,visits")?;
        for (k, c, q) in self.keys() {
            let i = self.find(k, c, q).expect("listed key");
            for u in 0..self.inputs {
                writeln!(
                    out,
                    "{k},{c},{q},{u},{},{}",
                    self.values[i + u],
                    self.visits[i + u]
                )?;
            }
        }
        Ok(())
    }

    pub fn read_csv<R: BufRead>(input: R) -> Result<QTable, QLearnError> {
        let mut meta = HashMap::new();
        let mut table: Option<QTable> = None;
        let mut header_seen = false;
        for (n, line) in input.lines().enumerate() {
            let line = line?;
            let lineno = n + 1;
            let bad = |msg: &str| QLearnError::Parse {
                line: lineno,
                msg: msg.to_string(),
            };
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix('#') {
                if let Some((k, v)) = rest.trim().split_once('=') {
                    meta.insert(k.trim().to_string(), v.trim().to_string());
                }
                continue;
            }
            if !header_seen {
                if line != "k,cell,q,input,value,visits" {
                    return Err(bad("unexpected header"));
                }
                header_seen = true;
                table = Some(table_from_meta(&meta).map_err(|m| bad(&m))?);
                continue;
            }
            let t = table.as_mut().expect("created at header");
            let f: Vec<&str> = line.split(',').collect();
            if f.len() != 6 {
                return Err(bad("expected 6 fields"));
            }
            let idx = |s: &str| s.parse::<usize>().map_err(|_| bad("bad index"));
            let (k, c, q, u) = (idx(f[0])?, idx(f[1])?, idx(f[2])?, idx(f[3])?);
            let value: f64 = f[4].parse().map_err(|_| bad("bad value"))?;
            let visits: u64 = f[5].parse().map_err(|_| bad("bad visit count"))?;
            if !t.in_range(k, c, q) || u >= t.inputs {
                return Err(bad("entry outside the declared shape"));
            }
            let i = t.find_or_insert(k, c, q) + u;
            t.values[i] = value;
            t.visits[i] = visits;
        }
        table.ok_or(QLearnError::Parse {
            line: 0,
            msg: "missing header".into(),
        })
    }
}

fn table_from_meta(meta: &HashMap<String, String>) -> Result<QTable, String> {
    let get = |k: &str| meta.get(k).ok_or_else(|| format!("missing metadata `{k}`"));
    let num = |k: &str| {
        get(k)?
            .parse::<usize>()
            .map_err(|_| format!("bad metadata `{k}`"))
    };
    let mut t = QTable::new(
        num("horizon")?,
        num("cells")?,
        num("automaton_states")?,
        num("inputs")?,
    );
    if let Ok(v) = get("seed") {
        t.meta.seed = v.parse().map_err(|_| "bad metadata `seed`")?;
    }
    if let Ok(v) = get("episodes") {
        t.meta.episodes = v.parse().map_err(|_| "bad metadata `episodes`")?;
    }
    if let Ok(v) = get("reward") {
        t.meta.mode = v.parse().map_err(|_| "bad metadata `reward`")?;
    }
    if let Ok(v) = get("kappa") {
        t.meta.kappa = v.parse().map_err(|_| "bad metadata `kappa`")?;
    }
    if let Ok(v) = get("delta") {
        t.meta.delta = Some(v.parse().map_err(|_| "bad metadata `delta`")?);
    }
    Ok(t)
}

fn argmax(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, x) in v.iter().enumerate() {
        if *x > v[best] {
            best = i;
        }
    }
    best
}

/// Greedy decisions extracted from a [`QTable`]; tuples never updated map
/// to the fallback input.
#[derive(Clone, Debug, PartialEq)]
pub struct LearnedPolicy {
    horizon: usize,
    choices: HashMap<(usize, usize, usize), usize>,
    fallback: usize,
}

impl LearnedPolicy {
    pub fn fallback(&self) -> usize {
        self.fallback
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    /// Number of tuples with a learned decision.
    pub fn len(&self) -> usize {
        self.choices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.choices.is_empty()
    }

    pub fn choice(&self, k: usize, cell: usize, q: usize) -> usize {
        self.choices
            .get(&(k, cell, q))
            .copied()
            .unwrap_or(self.fallback)
    }

    /// Whether `(k, cell, q)` has a learned decision.
    pub fn is_learned(&self, k: usize, cell: usize, q: usize) -> bool {
        self.choices.contains_key(&(k, cell, q))
    }
}

impl Policy for LearnedPolicy {
    fn action(&self, k: usize, cell: usize, q: usize) -> usize {
        self.choice(k, cell, q)
    }
}

/// Greedy policy with lowest-index tie-break and fallback input 0.
pub fn extract_policy(table: &QTable) -> LearnedPolicy {
    let choices = table
        .keys()
        .into_iter()
        .filter_map(|(k, c, q)| table.greedy(k, c, q).map(|u| ((k, c, q), u)))
        .collect();
    LearnedPolicy {
        horizon: table.horizon,
        choices,
        fallback: 0,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dense_and_sparse_agree() {
        let mut dense = QTable::new(2, 3, 2, 2);
        assert!(dense.is_dense());
        let mut sparse = QTable::new(2, 3, 2, 2);
        sparse.slots = Slots::Sparse(HashMap::new());
        sparse.values.clear();
        sparse.visits.clear();
        for t in [&mut dense, &mut sparse] {
            t.update(1, 3, 1, 1, 0.5, |_| 1.0);
            t.update(0, 0, 0, 0, 1.0, |n| 1.0 / (1.0 + n as f64));
        }
        for t in [&dense, &sparse] {
            assert_eq!(t.value(1, 3, 1, 1), 0.5);
            assert_eq!(t.greedy(1, 3, 1), Some(1));
            assert_eq!(t.greedy(0, 1, 0), None);
            assert_eq!(t.max_value(0, 0, 0), 1.0);
            assert_eq!(t.max_value(2, 0, 0), 0.0);
        }
    }

    #[test]
    fn csv_round_trip() {
        let mut t = QTable::new(2, 3, 2, 2);
        t.meta = QTableMeta {
            seed: 9,
            episodes: 5,
            mode: RewardMode::Shaped,
            kappa: 0.2,
            delta: Some(0.1),
        };
        t.update(1, 2, 1, 1, 0.125, |_| 1.0);
        let mut buf = Vec::new();
        t.write_csv(&mut buf).unwrap();
        let back = QTable::read_csv(buf.as_slice()).unwrap();
        assert_eq!(back, t);
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(
            text.lines().filter(|l| !l.starts_with('#')).count(),
            1 + 2 * 4 * 2 * 2
        );
    }

    #[test]
    fn malformed_csv_rejected() {
        let text = "# horizon=1\n# cells=1\n# automaton_states=1\n# inputs=1\nk,cell,q,input,value,visits\n0,5,0,0,1,1\n";
        assert!(matches!(
            QTable::read_csv(text.as_bytes()),
            Err(QLearnError::Parse { line: 6, .. })
        ));
        assert!(QTable::read_csv("k,cell,q,input,value,visits\n".as_bytes()).is_err());
    }

    #[test]
    fn argmax_invariant_under_shift() {
        let mut t = QTable::new(1, 1, 1, 3);
        t.update(0, 0, 0, 0, 0.2, |_| 1.0);
        t.update(0, 0, 0, 1, 0.7, |_| 1.0);
        t.update(0, 0, 0, 2, 0.7, |_| 1.0);
        let before = extract_policy(&t);
        for v in t.values.iter_mut() {
            *v += 3.5;
        }
        assert_eq!(extract_policy(&t), before);
        assert_eq!(before.choice(0, 0, 0), 1);
        assert_eq!(before.choice(0, 1, 0), 0);
    }
}
