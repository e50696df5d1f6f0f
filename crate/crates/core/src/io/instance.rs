//! Benchmark instance files.
//!
//! ```text
//! PROBLEM NAME:     a280-TTP
//! KNAPSACK DATA TYPE:     bounded strongly corr
//! DIMENSION:     280
//! NUMBER OF ITEMS:     279
//! CAPACITY OF KNAPSACK:     25936
//! MIN SPEED:     0.1
//! MAX SPEED:     1
//! RENTING RATIO:     5.61
//! EDGE_WEIGHT_TYPE:     CEIL_2D
//! NODE_COORD_SECTION    (INDEX, X, Y):
//! 1    288    149
//! ...
//! ITEMS SECTION    (INDEX, PROFIT, WEIGHT, ASSIGNED NODE NUMBER):
//! 1    101    1    2
//! ...
//! ```
//!
//! Indices in the file are 1-based; sections run until the next section or end of file.

use std::io::{BufRead, Write};

use crate::error::{Error, Result};
use crate::model::{EdgeWeightKind, Instance, InstanceParts, Item, Point};

const PROBLEM_NAME: &str = "PROBLEM NAME";
const DATA_TYPE: &str = "KNAPSACK DATA TYPE";
const DIMENSION: &str = "DIMENSION";
const ITEM_COUNT: &str = "NUMBER OF ITEMS";
const CAPACITY: &str = "CAPACITY OF KNAPSACK";
const MIN_SPEED: &str = "MIN SPEED";
const MAX_SPEED: &str = "MAX SPEED";
const RENTING_RATIO: &str = "RENTING RATIO";
const EDGE_WEIGHT_TYPE: &str = "EDGE_WEIGHT_TYPE";
const NODE_SECTION: &str = "NODE_COORD_SECTION";
const ITEMS_SECTION: &str = "ITEMS SECTION";

const HEADER_KEYS: [&str; 9] = [
    PROBLEM_NAME,
    DATA_TYPE,
    DIMENSION,
    ITEM_COUNT,
    CAPACITY,
    MIN_SPEED,
    MAX_SPEED,
    RENTING_RATIO,
    EDGE_WEIGHT_TYPE,
];

#[derive(Clone, Copy, PartialEq)]
enum Section {
    Header,
    Nodes,
    Items,
}

#[derive(Default)]
struct Header {
    values: [Option<(usize, String)>; 9],
}

impl Header {
    fn get(&self, key: &str, eof_line: usize) -> Result<&(usize, String)> {
        let idx = HEADER_KEYS.iter().position(|k| *k == key).unwrap();
        self.values[idx]
            .as_ref()
            .ok_or_else(|| Error::parse(eof_line, key, "missing header key"))
    }

    fn number<T: std::str::FromStr>(&self, key: &str, eof_line: usize) -> Result<T> {
        let (line, raw) = self.get(key, eof_line)?;
        raw.parse()
            .map_err(|_| Error::parse(*line, key, format!("cannot parse `{raw}`")))
    }
}

fn field<T: std::str::FromStr>(token: Option<&str>, line: usize, name: &str) -> Result<T> {
    let token = token.ok_or_else(|| Error::parse(line, name, "missing value"))?;
    token
        .parse()
        .map_err(|_| Error::parse(line, name, format!("cannot parse `{token}`")))
}

pub fn parse_instance_str(text: &str) -> Result<Instance> {
    parse_instance(text.as_bytes())
}

pub fn parse_instance<R: BufRead>(reader: R) -> Result<Instance> {
    let mut header = Header::default();
    let mut section = Section::Header;
    let mut nodes: Vec<(usize, Point)> = Vec::new();
    let mut items: Vec<(usize, Item)> = Vec::new();
    let mut node_section_line = None;
    let mut items_section_line = None;
    let mut last_line = 0;

    for (idx, line) in reader.lines().enumerate() {
        let lineno = idx + 1;
        last_line = lineno;
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        if trimmed.starts_with(NODE_SECTION) {
            section = Section::Nodes;
            node_section_line = Some(lineno);
            continue;
        }
        if trimmed.starts_with(ITEMS_SECTION) {
            section = Section::Items;
            items_section_line = Some(lineno);
            continue;
        }
        match section {
            Section::Header => {
                let (key, value) = trimmed
                    .split_once(':')
                    .ok_or_else(|| Error::parse(lineno, trimmed, "expected `KEY: value`"))?;
                let key = key.trim();
                let slot = HEADER_KEYS
                    .iter()
                    .position(|k| *k == key)
                    .ok_or_else(|| Error::parse(lineno, key, "unknown header key"))?;
                if header.values[slot].is_some() {
                    return Err(Error::parse(lineno, key, "duplicate header key"));
                }
                header.values[slot] = Some((lineno, value.trim().to_string()));
            }
            Section::Nodes => {
                let mut tokens = trimmed.split_whitespace();
                let index: usize = field(tokens.next(), lineno, "INDEX")?;
                let x = field(tokens.next(), lineno, "X")?;
                let y = field(tokens.next(), lineno, "Y")?;
                nodes.push((lineno, Point { x, y }));
                if index != nodes.len() {
                    return Err(Error::parse(
                        lineno,
                        "INDEX",
                        format!("expected node index {}, found {index}", nodes.len()),
                    ));
                }
            }
            Section::Items => {
                let mut tokens = trimmed.split_whitespace();
                let index: usize = field(tokens.next(), lineno, "INDEX")?;
                let profit = field(tokens.next(), lineno, "PROFIT")?;
                let weight = field(tokens.next(), lineno, "WEIGHT")?;
                let node: usize = field(tokens.next(), lineno, "ASSIGNED NODE NUMBER")?;
                if node == 0 {
                    return Err(Error::parse(
                        lineno,
                        "ASSIGNED NODE NUMBER",
                        "node numbers start at 1",
                    ));
                }
                if node == 1 {
                    return Err(Error::parse(
                        lineno,
                        "ASSIGNED NODE NUMBER",
                        "items may not be assigned to city 1",
                    ));
                }
                items.push((
                    lineno,
                    Item {
                        profit,
                        weight,
                        city: node - 1,
                    },
                ));
                if index != items.len() {
                    return Err(Error::parse(
                        lineno,
                        "INDEX",
                        format!("expected item index {}, found {index}", items.len()),
                    ));
                }
            }
        }
    }

    let eof = last_line + 1;
    let name = header.get(PROBLEM_NAME, eof)?.1.clone();
    let data_type = header.get(DATA_TYPE, eof)?.1.clone();
    let n: usize = header.number(DIMENSION, eof)?;
    let m: usize = header.number(ITEM_COUNT, eof)?;
    let capacity: f64 = header.number(CAPACITY, eof)?;
    let min_speed: f64 = header.number(MIN_SPEED, eof)?;
    let max_speed: f64 = header.number(MAX_SPEED, eof)?;
    let renting_rate: f64 = header.number(RENTING_RATIO, eof)?;
    let (kind_line, kind_raw) = header.get(EDGE_WEIGHT_TYPE, eof)?;
    let edge_weight_kind: EdgeWeightKind = kind_raw
        .parse()
        .map_err(|msg: String| Error::parse(*kind_line, EDGE_WEIGHT_TYPE, msg))?;

    let node_line =
        node_section_line.ok_or_else(|| Error::parse(eof, NODE_SECTION, "missing section"))?;
    if nodes.len() != n {
        return Err(Error::parse(
            node_line,
            NODE_SECTION,
            format!(
                "{DIMENSION} is {n} but the section lists {} nodes",
                nodes.len()
            ),
        ));
    }
    let items_line = match items_section_line {
        Some(line) => line,
        None if m == 0 => eof,
        None => return Err(Error::parse(eof, ITEMS_SECTION, "missing section")),
    };
    if items.len() != m {
        return Err(Error::parse(
            items_line,
            ITEMS_SECTION,
            format!(
                "{ITEM_COUNT} is {m} but the section lists {} items",
                items.len()
            ),
        ));
    }
    if let Some((line, item)) = items.iter().find(|(_, item)| item.city >= n) {
        return Err(Error::parse(
            *line,
            "ASSIGNED NODE NUMBER",
            format!("node {} exceeds {DIMENSION} {n}", item.city + 1),
        ));
    }

    Instance::new(InstanceParts {
        name,
        knapsack_data_type: data_type,
        edge_weight_kind,
        coords: nodes.into_iter().map(|(_, p)| p).collect(),
        items: items.into_iter().map(|(_, it)| it).collect(),
        capacity,
        renting_rate,
        min_speed,
        max_speed,
    })
    .map_err(|e| Error::parse(eof, "instance", e.to_string()))
}

/// Writes an instance in the format accepted by [`parse_instance`]. Numbers use the
/// shortest representation that parses back to the same `f64`.
pub fn write_instance<W: Write>(instance: &Instance, mut sink: W) -> Result<()> {
    writeln!(sink, "{PROBLEM_NAME}: \t{}", instance.name())?;
    writeln!(sink, "{DATA_TYPE}: \t{}", instance.knapsack_data_type())?;
    writeln!(sink, "{DIMENSION}: \t{}", instance.n())?;
    writeln!(sink, "{ITEM_COUNT}: \t{}", instance.m())?;
    writeln!(sink, "{CAPACITY}: \t{}", instance.capacity())?;
    writeln!(sink, "{MIN_SPEED}: \t{}", instance.min_speed())?;
    writeln!(sink, "{MAX_SPEED}: \t{}", instance.max_speed())?;
    writeln!(sink, "{RENTING_RATIO}: \t{}", instance.renting_rate())?;
    writeln!(
        sink,
        "{EDGE_WEIGHT_TYPE}: \t{}",
        instance.edge_weight_kind().as_str()
    )?;
    writeln!(sink, "{NODE_SECTION}\t(INDEX, X, Y): ")?;
    for (i, p) in instance.coords().iter().enumerate() {
        writeln!(sink, "{}\t{}\t{}", i + 1, p.x, p.y)?;
    }
    writeln!(
        sink,
        "{ITEMS_SECTION}\t(INDEX, PROFIT, WEIGHT, ASSIGNED NODE NUMBER): "
    )?;
    for (k, item) in instance.items().iter().enumerate() {
        writeln!(
            sink,
            "{}\t{}\t{}\t{}",
            k + 1,
            item.profit,
            item.weight,
            item.city + 1
        )?;
    }
    Ok(())
}

pub fn instance_to_string(instance: &Instance) -> String {
    let mut buf = Vec::new();
    write_instance(instance, &mut buf).expect("writing to memory");
    String::from_utf8(buf).expect("instance text is utf-8")
}
