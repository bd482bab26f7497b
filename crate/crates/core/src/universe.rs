//! Datasets, data universes and the graph metrics on them.
//!
//! A universe is either a product form (every record vector, or multiset, over
//! an alphabet with a length in a given set) or an explicit list of datasets.
//! Product universes are never materialized unless a full scan is requested;
//! neighbours are generated on demand.
//!
//! Every supported metric is the shortest-path distance of a graph with unit
//! edges: Hamming (change one record), symmetric difference (add or remove one
//! record) or an explicit edge list.

use std::collections::{BTreeSet, HashMap, VecDeque};
use std::fmt;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default cap on the number of datasets materialized from a universe.
pub const DEFAULT_MAX_DATASETS: usize = 1 << 20;

/// Universes up to this size are checked for the unit-edge graph property at
/// construction.
const VALIDATION_LIMIT: usize = 4096;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DatasetMode {
    Vector,
    Multiset,
}

/// A record value, stored as an index into the universe's alphabet.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Record(pub u32);

/// A dataset: an ordered record vector, or a multiset (kept sorted).
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Dataset {
    mode: DatasetMode,
    records: Vec<Record>,
}

impl Dataset {
    pub fn vector<I: IntoIterator<Item = u32>>(records: I) -> Self {
        Dataset {
            mode: DatasetMode::Vector,
            records: records.into_iter().map(Record).collect(),
        }
    }

    pub fn multiset<I: IntoIterator<Item = u32>>(records: I) -> Self {
        let mut records: Vec<Record> = records.into_iter().map(Record).collect();
        records.sort_unstable();
        Dataset {
            mode: DatasetMode::Multiset,
            records,
        }
    }

    pub fn with_mode<I: IntoIterator<Item = u32>>(mode: DatasetMode, records: I) -> Self {
        match mode {
            DatasetMode::Vector => Self::vector(records),
            DatasetMode::Multiset => Self::multiset(records),
        }
    }

    pub fn mode(&self) -> DatasetMode {
        self.mode
    }

    pub fn records(&self) -> &[Record] {
        &self.records
    }

    pub fn values(&self) -> impl Iterator<Item = u32> + '_ {
        self.records.iter().map(|r| r.0)
    }

    /// Number of records `|x|`.
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Record `i` (zero-based).
    pub fn get(&self, i: usize) -> Option<u32> {
        self.records.get(i).map(|r| r.0)
    }
}

impl fmt::Display for Dataset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let open = if self.mode == DatasetMode::Vector { '(' } else { '{' };
        let close = if self.mode == DatasetMode::Vector { ')' } else { '}' };
        write!(f, "{open}")?;
        for (i, r) in self.records.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{}", r.0)?;
        }
        write!(f, "{close}")
    }
}

/// Extended natural number: a graph distance that may be infinite.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Distance {
    Finite(u64),
    Infinite,
}

impl Distance {
    pub fn is_finite(self) -> bool {
        matches!(self, Distance::Finite(_))
    }

    pub fn finite(self) -> Option<u64> {
        match self {
            Distance::Finite(d) => Some(d),
            Distance::Infinite => None,
        }
    }

    pub fn as_f64(self) -> f64 {
        match self {
            Distance::Finite(d) => d as f64,
            Distance::Infinite => f64::INFINITY,
        }
    }

    /// `eps * d` with `0 * inf = inf`.
    pub fn times(self, eps: f64) -> f64 {
        match self {
            Distance::Finite(d) => eps * d as f64,
            Distance::Infinite => f64::INFINITY,
        }
    }
}

impl From<u64> for Distance {
    fn from(d: u64) -> Self {
        Distance::Finite(d)
    }
}

impl fmt::Display for Distance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Distance::Finite(d) => write!(f, "{d}"),
            Distance::Infinite => write!(f, "inf"),
        }
    }
}

impl Serialize for Distance {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Distance::Finite(d) => s.serialize_u64(*d),
            Distance::Infinite => s.serialize_str("inf"),
        }
    }
}

/// Hamming distance between record vectors; infinite across lengths.
pub fn hamming(x: &Dataset, y: &Dataset) -> Result<Distance> {
    if x.mode != DatasetMode::Vector || y.mode != DatasetMode::Vector {
        return Err(Error::InvalidInput("Hamming distance needs vector datasets".into()));
    }
    if x.len() != y.len() {
        return Ok(Distance::Infinite);
    }
    let d = x.records.iter().zip(&y.records).filter(|(a, b)| a != b).count();
    Ok(Distance::Finite(d as u64))
}

/// Symmetric difference `|x \ y| + |y \ x|` of multisets.
pub fn symdiff(x: &Dataset, y: &Dataset) -> Result<Distance> {
    if x.mode != DatasetMode::Multiset || y.mode != DatasetMode::Multiset {
        return Err(Error::InvalidInput(
            "symmetric difference needs multiset datasets".into(),
        ));
    }
    // both sorted: merge
    let (a, b) = (&x.records, &y.records);
    let (mut i, mut j, mut d) = (0, 0, 0u64);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Equal => {
                i += 1;
                j += 1;
            }
            std::cmp::Ordering::Less => {
                d += 1;
                i += 1;
            }
            std::cmp::Ordering::Greater => {
                d += 1;
                j += 1;
            }
        }
    }
    d += (a.len() - i + b.len() - j) as u64;
    Ok(Distance::Finite(d))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Metric {
    Hamming,
    SymmetricDifference,
    /// Unit edges between dataset indices of the universe.
    Graph(Vec<(usize, usize)>),
}

#[derive(Clone, Debug)]
enum Members {
    Product { lengths: BTreeSet<usize> },
    Explicit(Vec<Dataset>),
}

/// A finite data universe with a unit-edge graph metric.
#[derive(Clone, Debug)]
pub struct DataUniverse {
    mode: DatasetMode,
    alphabet: Vec<String>,
    members: Members,
    metric: Metric,
    max_datasets: usize,
    datasets: OnceLock<Vec<Dataset>>,
    index: OnceLock<HashMap<Dataset, usize>>,
    adjacency: OnceLock<Vec<Vec<usize>>>,
    record_values: OnceLock<Vec<f64>>,
}

impl DataUniverse {
    /// All record vectors over `alphabet` with a length in `lengths`, under
    /// the Hamming metric.
    pub fn hamming_product<S: Into<String>>(
        alphabet: impl IntoIterator<Item = S>,
        lengths: impl IntoIterator<Item = usize>,
    ) -> Result<Self> {
        Self::product(DatasetMode::Vector, alphabet, lengths, Metric::Hamming)
    }

    /// `{0,1}^n` under the Hamming metric.
    pub fn binary(n: usize) -> Self {
        Self::hamming_product(["0", "1"], [n]).expect("binary universe is valid")
    }

    /// All multisets over `alphabet` with a size in `lengths` (which must be
    /// contiguous), under the symmetric difference metric.
    pub fn multiset_product<S: Into<String>>(
        alphabet: impl IntoIterator<Item = S>,
        lengths: impl IntoIterator<Item = usize>,
    ) -> Result<Self> {
        Self::product(
            DatasetMode::Multiset,
            alphabet,
            lengths,
            Metric::SymmetricDifference,
        )
    }

    pub fn product<S: Into<String>>(
        mode: DatasetMode,
        alphabet: impl IntoIterator<Item = S>,
        lengths: impl IntoIterator<Item = usize>,
        metric: Metric,
    ) -> Result<Self> {
        let alphabet: Vec<String> = alphabet.into_iter().map(Into::into).collect();
        let lengths: BTreeSet<usize> = lengths.into_iter().collect();
        check_alphabet(&alphabet)?;
        if lengths.is_empty() {
            return Err(Error::InvalidInput("universe needs at least one length".into()));
        }
        check_metric_mode(mode, &metric)?;
        if metric == Metric::SymmetricDifference {
            let lo = *lengths.first().unwrap();
            let hi = *lengths.last().unwrap();
            if hi - lo + 1 != lengths.len() {
                // {a} and {a,b,c} are at symmetric difference 2 with no path
                return Err(Error::InvalidInput(
                    "symmetric-difference universes need a contiguous range of sizes".into(),
                ));
            }
        }
        let u = DataUniverse {
            mode,
            alphabet,
            members: Members::Product { lengths },
            metric,
            max_datasets: DEFAULT_MAX_DATASETS,
            datasets: OnceLock::new(),
            index: OnceLock::new(),
            adjacency: OnceLock::new(),
            record_values: OnceLock::new(),
        };
        u.validate_graph_edges()?;
        Ok(u)
    }

    /// An explicit list of datasets. With a Hamming or symmetric-difference
    /// metric the list must be closed enough that the metric is still the
    /// shortest-path distance of its unit edges; this is checked for
    /// universes of up to 4096 datasets.
    pub fn explicit<S: Into<String>>(
        mode: DatasetMode,
        alphabet: impl IntoIterator<Item = S>,
        datasets: Vec<Dataset>,
        metric: Metric,
    ) -> Result<Self> {
        let alphabet: Vec<String> = alphabet.into_iter().map(Into::into).collect();
        check_alphabet(&alphabet)?;
        check_metric_mode(mode, &metric)?;
        let mut seen = BTreeSet::new();
        let mut normalized = Vec::with_capacity(datasets.len());
        for d in datasets {
            let d = Dataset::with_mode(mode, d.values());
            if d.values().any(|r| r as usize >= alphabet.len()) {
                return Err(Error::InvalidInput(format!("{d} uses a record outside the alphabet")));
            }
            if !seen.insert(d.clone()) {
                return Err(Error::InvalidInput(format!("dataset {d} listed twice")));
            }
            normalized.push(d);
        }
        let u = DataUniverse {
            mode,
            alphabet,
            members: Members::Explicit(normalized),
            metric,
            max_datasets: DEFAULT_MAX_DATASETS,
            datasets: OnceLock::new(),
            index: OnceLock::new(),
            adjacency: OnceLock::new(),
            record_values: OnceLock::new(),
        };
        u.validate_graph_edges()?;
        if !matches!(u.metric, Metric::Graph(_)) && u.size() <= VALIDATION_LIMIT as u128 {
            u.validate_unit_edge_metric()?;
        }
        Ok(u)
    }

    /// Overrides the materialization cap.
    pub fn with_max_datasets(mut self, cap: usize) -> Self {
        self.max_datasets = cap;
        self
    }

    pub fn mode(&self) -> DatasetMode {
        self.mode
    }

    pub fn alphabet(&self) -> &[String] {
        &self.alphabet
    }

    pub fn metric(&self) -> &Metric {
        &self.metric
    }

    /// Lengths of a product universe, or `None` for an explicit one.
    pub fn product_lengths(&self) -> Option<Vec<usize>> {
        match &self.members {
            Members::Product { lengths } => Some(lengths.iter().copied().collect()),
            Members::Explicit(_) => None,
        }
    }

    /// Number of datasets, computed without materializing.
    pub fn size(&self) -> u128 {
        match &self.members {
            Members::Explicit(d) => d.len() as u128,
            Members::Product { lengths } => {
                let r = self.alphabet.len() as u128;
                lengths
                    .iter()
                    .map(|&n| match self.mode {
                        DatasetMode::Vector => sat_pow(r, n),
                        DatasetMode::Multiset => multichoose(r, n as u128),
                    })
                    .fold(0u128, u128::saturating_add)
            }
        }
    }

    pub fn contains(&self, x: &Dataset) -> bool {
        if x.mode != self.mode {
            return false;
        }
        match &self.members {
            Members::Product { lengths } => {
                lengths.contains(&x.len())
                    && x.values().all(|r| (r as usize) < self.alphabet.len())
            }
            Members::Explicit(_) => self.index_of(x).is_some(),
        }
    }

    fn require(&self, x: &Dataset) -> Result<()> {
        if self.contains(x) {
            Ok(())
        } else {
            Err(Error::NotInUniverse(x.to_string()))
        }
    }

    /// Every dataset, in a fixed order: by length, then lexicographically.
    /// Explicit universes keep their listed order.
    pub fn datasets(&self) -> Result<&[Dataset]> {
        if let Some(d) = self.datasets.get() {
            return Ok(d);
        }
        let size = self.size();
        if size > self.max_datasets as u128 {
            return Err(Error::Resource {
                size,
                cap: self.max_datasets,
            });
        }
        let list = match &self.members {
            Members::Explicit(d) => d.clone(),
            Members::Product { lengths } => {
                let r = self.alphabet.len() as u32;
                let mut out = Vec::with_capacity(size as usize);
                for &n in lengths {
                    match self.mode {
                        DatasetMode::Vector => enumerate_vectors(r, n, &mut out),
                        DatasetMode::Multiset => enumerate_multisets(r, n, &mut out),
                    }
                }
                out
            }
        };
        Ok(self.datasets.get_or_init(|| list))
    }

    /// Position of `x` in [`DataUniverse::datasets`].
    pub fn index_of(&self, x: &Dataset) -> Option<usize> {
        let index = match self.index.get() {
            Some(i) => i,
            None => {
                let list = self.datasets().ok()?;
                let map = list.iter().cloned().enumerate().map(|(i, d)| (d, i)).collect();
                self.index.get_or_init(|| map)
            }
        };
        index.get(x).copied()
    }

    pub fn dataset(&self, i: usize) -> Result<&Dataset> {
        self.datasets()?
            .get(i)
            .ok_or_else(|| Error::InvalidInput(format!("dataset index {i} out of range")))
    }

    /// Datasets at distance exactly one from `x`.
    pub fn neighbors(&self, x: &Dataset) -> Result<Vec<Dataset>> {
        self.require(x)?;
        match (&self.members, &self.metric) {
            (Members::Product { lengths }, Metric::Hamming) => {
                let _ = lengths;
                let mut out = Vec::new();
                for i in 0..x.len() {
                    for r in 0..self.alphabet.len() as u32 {
                        if r != x.records[i].0 {
                            let mut y = x.clone();
                            y.records[i] = Record(r);
                            out.push(y);
                        }
                    }
                }
                Ok(out)
            }
            (Members::Product { lengths }, Metric::SymmetricDifference) => {
                let mut out = Vec::new();
                if lengths.contains(&(x.len() + 1)) {
                    for r in 0..self.alphabet.len() as u32 {
                        out.push(Dataset::multiset(x.values().chain([r])));
                    }
                }
                if !x.is_empty() && lengths.contains(&(x.len() - 1)) {
                    let mut last = None;
                    for i in 0..x.len() {
                        if last == Some(x.records[i]) {
                            continue;
                        }
                        last = Some(x.records[i]);
                        let mut y = x.clone();
                        y.records.remove(i);
                        out.push(y);
                    }
                }
                Ok(out)
            }
            _ => {
                let i = self
                    .index_of(x)
                    .ok_or_else(|| Error::NotInUniverse(x.to_string()))?;
                let list = self.datasets()?;
                Ok(self.adjacency()?[i].iter().map(|&j| list[j].clone()).collect())
            }
        }
    }

    fn adjacency(&self) -> Result<&Vec<Vec<usize>>> {
        if let Some(a) = self.adjacency.get() {
            return Ok(a);
        }
        let list = self.datasets()?;
        let mut adj = vec![Vec::new(); list.len()];
        match &self.metric {
            Metric::Graph(edges) => {
                for &(a, b) in edges {
                    if a != b {
                        adj[a].push(b);
                        adj[b].push(a);
                    }
                }
            }
            _ => {
                for i in 0..list.len() {
                    for j in (i + 1)..list.len() {
                        if self.closed_form(&list[i], &list[j])? == Distance::Finite(1) {
                            adj[i].push(j);
                            adj[j].push(i);
                        }
                    }
                }
            }
        }
        for a in adj.iter_mut() {
            a.sort_unstable();
            a.dedup();
        }
        Ok(self.adjacency.get_or_init(|| adj))
    }

    fn closed_form(&self, x: &Dataset, y: &Dataset) -> Result<Distance> {
        match self.metric {
            Metric::Hamming => hamming(x, y),
            Metric::SymmetricDifference => symdiff(x, y),
            Metric::Graph(_) => Err(Error::Unsupported("graph metric has no closed form".into())),
        }
    }

    /// Shortest-path distance in the universe's unit-edge graph.
    ///
    /// For Hamming and symmetric-difference universes this is the closed-form
    /// metric (equal to the BFS distance by construction); explicit graphs
    /// use breadth-first search.
    pub fn distance(&self, x: &Dataset, y: &Dataset) -> Result<Distance> {
        self.require(x)?;
        self.require(y)?;
        match self.metric {
            Metric::Graph(_) => self.bfs_distance(x, y),
            _ => self.closed_form(x, y),
        }
    }

    /// Breadth-first search over on-demand neighbours.
    pub fn bfs_distance(&self, x: &Dataset, y: &Dataset) -> Result<Distance> {
        self.require(x)?;
        self.require(y)?;
        if x == y {
            return Ok(Distance::Finite(0));
        }
        let mut seen: HashMap<Dataset, u64> = HashMap::new();
        let mut queue = VecDeque::new();
        seen.insert(x.clone(), 0);
        queue.push_back(x.clone());
        while let Some(cur) = queue.pop_front() {
            let d = seen[&cur];
            for nb in self.neighbors(&cur)? {
                if seen.contains_key(&nb) {
                    continue;
                }
                if &nb == y {
                    return Ok(Distance::Finite(d + 1));
                }
                seen.insert(nb.clone(), d + 1);
                queue.push_back(nb);
            }
        }
        Ok(Distance::Infinite)
    }

    /// Connected components (finite-distance classes), in order of first
    /// member.
    pub fn connected_components(&self) -> Result<Vec<Vec<Dataset>>> {
        let list = self.datasets()?;
        let mut label = vec![usize::MAX; list.len()];
        let mut comps = Vec::new();
        for start in 0..list.len() {
            if label[start] != usize::MAX {
                continue;
            }
            let c = comps.len();
            let mut members = vec![start];
            label[start] = c;
            let mut k = 0;
            while k < members.len() {
                let cur = members[k];
                k += 1;
                for nb in self.neighbors(&list[cur])? {
                    let j = self.index_of(&nb).expect("neighbour is a member");
                    if label[j] == usize::MAX {
                        label[j] = c;
                        members.push(j);
                    }
                }
            }
            members.sort_unstable();
            comps.push(members.into_iter().map(|i| list[i].clone()).collect());
        }
        Ok(comps)
    }

    /// Index of the connected component containing each dataset.
    pub fn component_labels(&self) -> Result<Vec<usize>> {
        let comps = self.connected_components()?;
        let mut label = vec![0; self.datasets()?.len()];
        for (c, members) in comps.iter().enumerate() {
            for d in members {
                label[self.index_of(d).unwrap()] = c;
            }
        }
        Ok(label)
    }

    /// All unordered pairs of dataset indices at distance one.
    pub fn unit_pairs(&self) -> Result<Vec<(usize, usize)>> {
        let list = self.datasets()?;
        let mut pairs = Vec::new();
        for (i, x) in list.iter().enumerate() {
            for nb in self.neighbors(x)? {
                let j = self.index_of(&nb).expect("neighbour is a member");
                if i < j {
                    pairs.push((i, j));
                }
            }
        }
        pairs.sort_unstable();
        pairs.dedup();
        Ok(pairs)
    }

    /// Full distance matrix over the materialized universe.
    pub fn distance_matrix(&self) -> Result<Vec<Vec<Distance>>> {
        let list = self.datasets()?;
        let n = list.len();
        match self.metric {
            Metric::Graph(_) => {
                let adj = self.adjacency()?;
                Ok((0..n).map(|s| bfs_row(adj, s)).collect())
            }
            _ => {
                let mut m = vec![vec![Distance::Finite(0); n]; n];
                for i in 0..n {
                    for j in (i + 1)..n {
                        let d = self.closed_form(&list[i], &list[j])?;
                        m[i][j] = d;
                        m[j][i] = d;
                    }
                }
                Ok(m)
            }
        }
    }

    /// `sup_{y in set} d(x, y)` for every `x` in `set`.
    pub fn eccentricities(&self, set: &[Dataset]) -> Result<Vec<Distance>> {
        for x in set {
            self.require(x)?;
        }
        let n = set.len();
        let mut ecc = vec![Distance::Finite(0); n];
        match self.metric {
            Metric::Graph(_) => {
                let adj = self.adjacency()?;
                let idx: Vec<usize> = set.iter().map(|x| self.index_of(x).unwrap()).collect();
                for (e, &s) in ecc.iter_mut().zip(&idx) {
                    let row = bfs_row(adj, s);
                    *e = idx.iter().map(|&j| row[j]).max().unwrap_or(Distance::Finite(0));
                }
            }
            _ => {
                for i in 0..n {
                    for j in (i + 1)..n {
                        let d = self.closed_form(&set[i], &set[j])?;
                        ecc[i] = ecc[i].max(d);
                        ecc[j] = ecc[j].max(d);
                    }
                }
            }
        }
        Ok(ecc)
    }

    /// `sup_{y in set} d(x, y)`.
    pub fn eccentricity(&self, x: &Dataset, set: &[Dataset]) -> Result<Distance> {
        let mut best = Distance::Finite(0);
        for y in set {
            best = best.max(self.distance(x, y)?);
            if best == Distance::Infinite {
                break;
            }
        }
        Ok(best)
    }

    /// `sup_{x in a, y in b} d(x, y)`.
    pub fn cross_diameter(&self, a: &[Dataset], b: &[Dataset]) -> Result<Distance> {
        let mut best = Distance::Finite(0);
        for x in a {
            best = best.max(self.eccentricity(x, b)?);
            if best == Distance::Infinite {
                break;
            }
        }
        Ok(best)
    }

    /// Numeric value of a record: its alphabet label parsed as a number, or
    /// its index when the label is not numeric.
    pub fn record_value(&self, r: Record) -> f64 {
        let values = self.record_values.get_or_init(|| {
            self.alphabet
                .iter()
                .enumerate()
                .map(|(i, s)| s.trim().parse::<f64>().unwrap_or(i as f64))
                .collect()
        });
        values.get(r.0 as usize).copied().unwrap_or(r.0 as f64)
    }

    /// Renders a dataset with alphabet labels: concatenated when every label
    /// is one character, comma-separated otherwise.
    pub fn format_dataset(&self, x: &Dataset) -> String {
        let labels: Vec<&str> = x
            .values()
            .map(|r| self.alphabet.get(r as usize).map_or("?", String::as_str))
            .collect();
        if self.single_char_labels() {
            labels.concat()
        } else {
            labels.join(",")
        }
    }

    fn single_char_labels(&self) -> bool {
        self.alphabet.iter().all(|s| s.chars().count() == 1)
    }

    /// Parses the format produced by [`DataUniverse::format_dataset`]. A key
    /// containing a comma is split on commas.
    pub fn parse_dataset(&self, key: &str) -> Result<Dataset> {
        let parts: Vec<String> = if key.is_empty() {
            Vec::new()
        } else if key.contains(',') {
            key.split(',').map(|s| s.trim().to_string()).collect()
        } else if self.single_char_labels() {
            key.chars().map(|c| c.to_string()).collect()
        } else {
            vec![key.to_string()]
        };
        self.dataset_from_labels(&parts)
    }

    pub fn dataset_from_labels<S: AsRef<str>>(&self, labels: &[S]) -> Result<Dataset> {
        let mut records = Vec::with_capacity(labels.len());
        for l in labels {
            let l = l.as_ref();
            let i = self
                .alphabet
                .iter()
                .position(|a| a == l)
                .ok_or_else(|| Error::InvalidInput(format!("record label {l:?} not in alphabet")))?;
            records.push(i as u32);
        }
        let x = Dataset::with_mode(self.mode, records);
        self.require(&x)?;
        Ok(x)
    }

    fn validate_graph_edges(&self) -> Result<()> {
        if let Metric::Graph(edges) = &self.metric {
            let n = self.size();
            if let Some(&(a, b)) = edges.iter().find(|(a, b)| *a as u128 >= n || *b as u128 >= n) {
                return Err(Error::InvalidInput(format!(
                    "edge ({a}, {b}) refers to a dataset outside the universe"
                )));
            }
        }
        Ok(())
    }

    fn validate_unit_edge_metric(&self) -> Result<()> {
        let list = self.datasets()?;
        let adj = self.adjacency()?;
        for s in 0..list.len() {
            let row = bfs_row(adj, s);
            for (t, d) in row.into_iter().enumerate() {
                if d != self.closed_form(&list[s], &list[t])? {
                    return Err(Error::InvalidInput(format!(
                        "metric is not a unit-edge graph distance on this universe: {} to {}",
                        list[s], list[t]
                    )));
                }
            }
        }
        Ok(())
    }
}

fn bfs_row(adj: &[Vec<usize>], s: usize) -> Vec<Distance> {
    let mut dist = vec![Distance::Infinite; adj.len()];
    dist[s] = Distance::Finite(0);
    let mut queue = VecDeque::from([s]);
    while let Some(u) = queue.pop_front() {
        let du = dist[u].finite().unwrap();
        for &v in &adj[u] {
            if dist[v] == Distance::Infinite {
                dist[v] = Distance::Finite(du + 1);
                queue.push_back(v);
            }
        }
    }
    dist
}

fn check_alphabet(alphabet: &[String]) -> Result<()> {
    if alphabet.is_empty() {
        return Err(Error::InvalidInput("alphabet is empty".into()));
    }
    let set: BTreeSet<&String> = alphabet.iter().collect();
    if set.len() != alphabet.len() {
        return Err(Error::InvalidInput("alphabet labels are not unique".into()));
    }
    Ok(())
}

fn check_metric_mode(mode: DatasetMode, metric: &Metric) -> Result<()> {
    match (mode, metric) {
        (DatasetMode::Multiset, Metric::Hamming) => Err(Error::InvalidInput(
            "Hamming metric needs vector datasets".into(),
        )),
        (DatasetMode::Vector, Metric::SymmetricDifference) => Err(Error::InvalidInput(
            "symmetric difference metric needs multiset datasets".into(),
        )),
        _ => Ok(()),
    }
}

fn sat_pow(base: u128, exp: usize) -> u128 {
    let mut acc: u128 = 1;
    for _ in 0..exp {
        acc = acc.saturating_mul(base);
    }
    acc
}

fn multichoose(r: u128, n: u128) -> u128 {
    // C(n + r - 1, n)
    let mut acc: u128 = 1;
    for k in 1..=n {
        acc = acc.saturating_mul(r + k - 1) / k;
    }
    acc
}

fn enumerate_vectors(r: u32, n: usize, out: &mut Vec<Dataset>) {
    let mut cur = vec![0u32; n];
    loop {
        out.push(Dataset::vector(cur.iter().copied()));
        // odometer, last position fastest
        let mut i = n;
        loop {
            if i == 0 {
                return;
            }
            i -= 1;
            cur[i] += 1;
            if cur[i] < r {
                break;
            }
            cur[i] = 0;
        }
    }
}

fn enumerate_multisets(r: u32, n: usize, out: &mut Vec<Dataset>) {
    fn rec(r: u32, n: usize, min: u32, cur: &mut Vec<u32>, out: &mut Vec<Dataset>) {
        if cur.len() == n {
            out.push(Dataset::multiset(cur.iter().copied()));
            return;
        }
        for v in min..r {
            cur.push(v);
            rec(r, n, v, cur, out);
            cur.pop();
        }
    }
    rec(r, n, 0, &mut Vec::with_capacity(n), out);
}

/// JSON form of a universe.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UniverseConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub schema: Option<u32>,
    pub mode: DatasetMode,
    #[serde(deserialize_with = "crate::config::labels")]
    pub alphabet: Vec<String>,
    #[serde(default)]
    pub lengths: Vec<usize>,
    pub metric: MetricName,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub edges: Vec<(usize, usize)>,
    /// Explicit dataset list (as record-label arrays); the product form is
    /// used when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub datasets: Option<Vec<Vec<crate::config::Label>>>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MetricName {
    Hamming,
    Symdiff,
    Graph,
}

impl TryFrom<&UniverseConfig> for DataUniverse {
    type Error = Error;

    fn try_from(c: &UniverseConfig) -> Result<Self> {
        let metric = match c.metric {
            MetricName::Hamming => Metric::Hamming,
            MetricName::Symdiff => Metric::SymmetricDifference,
            MetricName::Graph => Metric::Graph(c.edges.clone()),
        };
        if c.metric != MetricName::Graph && !c.edges.is_empty() {
            return Err(Error::InvalidInput("edges are only allowed with the graph metric".into()));
        }
        match &c.datasets {
            None => DataUniverse::product(c.mode, c.alphabet.clone(), c.lengths.clone(), metric),
            Some(list) => {
                let mut ds = Vec::with_capacity(list.len());
                for labels in list {
                    let mut recs = Vec::with_capacity(labels.len());
                    for l in labels {
                        let i = c.alphabet.iter().position(|a| a == &l.0).ok_or_else(|| {
                            Error::InvalidInput(format!("record label {:?} not in alphabet", l.0))
                        })?;
                        recs.push(i as u32);
                    }
                    ds.push(Dataset::with_mode(c.mode, recs));
                }
                DataUniverse::explicit(c.mode, c.alphabet.clone(), ds, metric)
            }
        }
    }
}

/// Convenience wrapper around [`hamming`] / [`symdiff`] / BFS for a universe.
pub fn graph_distance(u: &DataUniverse, x: &Dataset, y: &Dataset) -> Result<Distance> {
    u.distance(x, y)
}

/// Partition of an explicit (or materializable) universe into components.
pub fn connected_components(u: &DataUniverse) -> Result<Vec<Vec<Dataset>>> {
    u.connected_components()
}
